//! Hypergraph bundles `H_{d,k}^{n}`.
//!
//! The labelled vertex set is `K = {(i, l) : 1 <= i <= d, 1 <= l <= n_i}`
//! with projection `(i, l) -> i`. An edge picks `k` labelled vertices from
//! `k` distinct blocks; a base edge is a `k`-subset of the blocks.
//! Blocks and labels are 1-based throughout.

use std::fmt;

use crate::error::{Error, Result};

/// Parameters of a bundle: `d` blocks, arity `k`, multiplicities `n_i`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BundleSpec {
    d: usize,
    k: usize,
    mults: Vec<usize>,
}

impl BundleSpec {
    pub fn new(d: usize, k: usize, mults: Vec<usize>) -> Result<Self> {
        if d == 0 || k == 0 || k > d {
            return Err(Error::InvalidBundle(format!("need 1 <= k <= d, got d={d} k={k}")));
        }
        if mults.len() != d {
            return Err(Error::InvalidBundle(format!("{} multiplicities for d={d}", mults.len())));
        }
        if mults.contains(&0) {
            return Err(Error::InvalidBundle("multiplicities must be >= 1".into()));
        }
        Ok(Self { d, k, mults })
    }

    /// The rectangle bundle `H_{d,k}^{(2,...,2)}`.
    pub fn rectangle(d: usize, k: usize) -> Result<Self> {
        Self::new(d, k, vec![2; d])
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn mults(&self) -> &[usize] {
        &self.mults
    }

    pub fn is_rectangle(&self) -> bool {
        self.mults.iter().all(|&n| n == 2)
    }

    /// `sum_{|e'| = k} prod_{i in e'} n_i`.
    pub fn edge_count(&self) -> usize {
        base_edges(self.d, self.k)
            .iter()
            .map(|b| b.blocks().iter().map(|&i| self.mults[i - 1]).product::<usize>())
            .sum()
    }
}

/// A `k`-subset of the blocks `{1..d}`, sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BaseEdge {
    blocks: Vec<usize>,
}

impl BaseEdge {
    pub fn new(mut blocks: Vec<usize>) -> Result<Self> {
        blocks.sort_unstable();
        if blocks.windows(2).any(|w| w[0] == w[1]) || blocks.contains(&0) {
            return Err(Error::InvalidBundle(format!("bad base edge {blocks:?}")));
        }
        Ok(Self { blocks })
    }

    pub fn empty() -> Self {
        Self { blocks: Vec::new() }
    }

    pub fn blocks(&self) -> &[usize] {
        &self.blocks
    }

    pub fn arity(&self) -> usize {
        self.blocks.len()
    }

    pub fn contains(&self, block: usize) -> bool {
        self.blocks.binary_search(&block).is_ok()
    }

    /// Position of `block` within the sorted block list.
    pub fn position(&self, block: usize) -> Option<usize> {
        self.blocks.binary_search(&block).ok()
    }

    pub fn without(&self, block: usize) -> BaseEdge {
        BaseEdge { blocks: self.blocks.iter().copied().filter(|&b| b != block).collect() }
    }

    /// The `k` faces of size `k - 1`, lexicographic. For `k = 1` this is `[{}]`.
    pub fn boundary(&self) -> Vec<BaseEdge> {
        let mut faces: Vec<BaseEdge> = self.blocks.iter().map(|&b| self.without(b)).collect();
        faces.sort();
        faces
    }
}

impl fmt::Display for BaseEdge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.blocks.iter().map(|b| b.to_string()).collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

/// All `k`-subsets of `{1..d}` in lexicographic order.
pub fn base_edges(d: usize, k: usize) -> Vec<BaseEdge> {
    fn rec(start: usize, d: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<BaseEdge>) {
        if cur.len() == k {
            out.push(BaseEdge { blocks: cur.clone() });
            return;
        }
        for b in start..=d {
            if d - b + 1 < k - cur.len() {
                break;
            }
            cur.push(b);
            rec(b + 1, d, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if k <= d {
        rec(1, d, k, &mut Vec::with_capacity(k), &mut out);
    }
    out
}

/// An edge of a bundle: `(block, label)` pairs with distinct blocks, sorted by block.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edge {
    entries: Vec<(usize, usize)>,
}

impl Edge {
    pub fn new(mut entries: Vec<(usize, usize)>) -> Result<Self> {
        entries.sort_unstable();
        if entries.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::InvalidBundle(format!("repeated block in {entries:?}")));
        }
        if entries.iter().any(|&(b, l)| b == 0 || l == 0) {
            return Err(Error::InvalidBundle("blocks and labels are 1-based".into()));
        }
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &[(usize, usize)] {
        &self.entries
    }

    pub fn arity(&self) -> usize {
        self.entries.len()
    }

    /// The base edge `pi(e)`.
    pub fn projection(&self) -> BaseEdge {
        BaseEdge { blocks: self.entries.iter().map(|&(b, _)| b).collect() }
    }

    /// Label used in `block`, if the block appears.
    pub fn label_of(&self, block: usize) -> Option<usize> {
        self.entries.iter().find(|&&(b, _)| b == block).map(|&(_, l)| l)
    }

    /// Drops the entry of block `j`.
    pub fn remove_entry(&self, block: usize) -> Result<Edge> {
        if self.label_of(block).is_none() {
            return Err(Error::BlockAbsent(block));
        }
        Ok(Edge { entries: self.entries.iter().copied().filter(|&(b, _)| b != block).collect() })
    }

    /// Text form `d.k:[i:l,...]`.
    pub fn to_text(&self, d: usize) -> String {
        let parts: Vec<String> = self.entries.iter().map(|(b, l)| format!("{b}:{l}")).collect();
        format!("{d}.{}:[{}]", self.arity(), parts.join(","))
    }

    /// Parses `d.k:[i:l,...]`, returning `d` and the edge.
    pub fn parse_text(text: &str) -> Result<(usize, Edge)> {
        let bad = || Error::Parse(format!("malformed edge `{text}`"));
        let (head, body) = text.trim().split_once(':').ok_or_else(bad)?;
        let (d, k) = head.split_once('.').ok_or_else(bad)?;
        let d: usize = d.parse().map_err(|_| bad())?;
        let k: usize = k.parse().map_err(|_| bad())?;
        let inner = body.strip_prefix('[').and_then(|s| s.strip_suffix(']')).ok_or_else(bad)?;
        let mut entries = Vec::new();
        if !inner.trim().is_empty() {
            for item in inner.split(',') {
                let (b, l) = item.trim().split_once(':').ok_or_else(bad)?;
                entries.push((b.parse().map_err(|_| bad())?, l.parse().map_err(|_| bad())?));
            }
        }
        let edge = Edge::new(entries)?;
        if edge.arity() != k || edge.entries.iter().any(|&(b, _)| b > d) {
            return Err(bad());
        }
        Ok((d, edge))
    }
}

/// All edges of the bundle, lexicographically sorted.
pub fn enumerate_bundle(spec: &BundleSpec) -> Vec<Edge> {
    fn rec(blocks: &[usize], mults: &[usize], cur: &mut Vec<(usize, usize)>, out: &mut Vec<Edge>) {
        let Some((&b, rest)) = blocks.split_first() else {
            out.push(Edge { entries: cur.clone() });
            return;
        };
        for l in 1..=mults[b - 1] {
            cur.push((b, l));
            rec(rest, mults, cur, out);
            cur.pop();
        }
    }
    let mut edges = Vec::with_capacity(spec.edge_count());
    for base in base_edges(spec.d, spec.k) {
        rec(base.blocks(), &spec.mults, &mut Vec::with_capacity(spec.k), &mut edges);
    }
    edges.sort();
    edges
}
