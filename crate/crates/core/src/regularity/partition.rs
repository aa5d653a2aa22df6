use std::collections::BTreeMap;
use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::hypergraph::{base_edges, BaseEdge, BundleSpec};

/// A partition of `V_{f'} = (F_q^2)^a` given by atom labels, together with
/// the sets that generated it.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    q: usize,
    arity: usize,
    labels: Vec<u32>,
    atoms: usize,
    generators: Vec<Vec<bool>>,
}

impl Partition {
    pub fn trivial(q: usize, arity: usize) -> Self {
        let len = (q * q).pow(arity as u32);
        Self { q, arity, labels: vec![0; len], atoms: 1, generators: Vec::new() }
    }

    /// All singletons, generated by the binary digits of the point index.
    pub fn discrete(q: usize, arity: usize) -> Self {
        let len = (q * q).pow(arity as u32);
        let mut p = Self::trivial(q, arity);
        let bits = usize::BITS - (len - 1).leading_zeros();
        for b in 0..bits {
            let set: Vec<bool> = (0..len).map(|i| (i >> b) & 1 == 1).collect();
            p.refine(&set).expect("length matches");
        }
        p
    }

    pub fn from_generators(q: usize, arity: usize, generators: &[Vec<bool>]) -> Result<Self> {
        let mut p = Self::trivial(q, arity);
        for g in generators {
            p.refine(g)?;
        }
        Ok(p)
    }

    /// Split every atom by `set`. Returns false (and records nothing) when
    /// the set is already measurable.
    pub fn refine(&mut self, set: &[bool]) -> Result<bool> {
        if set.len() != self.labels.len() {
            return Err(Error::DimensionMismatch(format!(
                "set of length {} on a ground of {} points",
                set.len(),
                self.labels.len()
            )));
        }
        let mut relabel: HashMap<(u32, bool), u32> = HashMap::new();
        let labels: Vec<u32> = self
            .labels
            .iter()
            .zip(set)
            .map(|(&l, &s)| {
                let next = relabel.len() as u32;
                *relabel.entry((l, s)).or_insert(next)
            })
            .collect();
        if relabel.len() == self.atoms {
            return Ok(false);
        }
        self.atoms = relabel.len();
        self.labels = labels;
        self.generators.push(set.to_vec());
        Ok(true)
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn atom_count(&self) -> usize {
        self.atoms
    }

    pub fn generator_count(&self) -> usize {
        self.generators.len()
    }

    pub fn generators(&self) -> &[Vec<bool>] {
        &self.generators
    }

    /// Every atom of `self` lies inside an atom of `other`.
    pub fn refines(&self, other: &Partition) -> bool {
        if self.labels.len() != other.labels.len() {
            return false;
        }
        let mut image: HashMap<u32, u32> = HashMap::new();
        self.labels.iter().zip(&other.labels).all(|(&a, &b)| *image.entry(a).or_insert(b) == b)
    }
}

/// One partition on `V_{f'}` for every `f'` of arity `k - 1`.
#[derive(Debug, Clone)]
pub struct PartitionSystem {
    spec: BundleSpec,
    q: usize,
    parts: BTreeMap<BaseEdge, Partition>,
}

impl PartitionSystem {
    pub fn trivial(spec: BundleSpec, q: usize) -> Self {
        let arity = spec.k() - 1;
        let faces = if arity == 0 { vec![BaseEdge::empty()] } else { base_edges(spec.d(), arity) };
        let parts = faces.into_iter().map(|f| (f, Partition::trivial(q, arity))).collect();
        Self { spec, q, parts }
    }

    pub fn spec(&self) -> &BundleSpec {
        &self.spec
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn part(&self, face: &BaseEdge) -> Option<&Partition> {
        self.parts.get(face)
    }

    pub fn parts(&self) -> impl Iterator<Item = (&BaseEdge, &Partition)> {
        self.parts.iter()
    }

    pub fn set_part(&mut self, face: &BaseEdge, part: Partition) -> Result<()> {
        let slot = self.parts.get_mut(face).ok_or_else(|| Error::InvalidParameter(format!("no face {face}")))?;
        if part.len() != slot.len() || part.q() != slot.q() {
            return Err(Error::DimensionMismatch(format!("partition does not live on V_{face}")));
        }
        *slot = part;
        Ok(())
    }

    pub fn refine(&mut self, face: &BaseEdge, set: &[bool]) -> Result<bool> {
        self.parts
            .get_mut(face)
            .ok_or_else(|| Error::InvalidParameter(format!("no face {face}")))?
            .refine(set)
    }

    /// The faces of `edge` ordered by the position of the removed block.
    pub fn boundary_parts(&self, edge: &BaseEdge) -> Result<Vec<&Partition>> {
        if edge.arity() != self.spec.k() {
            return Err(Error::DimensionMismatch(format!(
                "edge {edge} has arity {}, system expects {}",
                edge.arity(),
                self.spec.k()
            )));
        }
        edge.blocks()
            .iter()
            .map(|&b| {
                let face = edge.without(b);
                self.parts.get(&face).ok_or_else(|| Error::InvalidParameter(format!("no face {face}")))
            })
            .collect()
    }

    pub fn complexities(&self) -> Vec<(BaseEdge, usize)> {
        self.parts.iter().map(|(f, p)| (f.clone(), p.generator_count())).collect()
    }
}
