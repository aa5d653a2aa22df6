//! Partitions as finite sigma-algebras, conditional expectation, energy and
//! the energy-increment weak regularity algorithm.

mod partition;
mod witness;

use std::collections::HashMap;

pub use partition::{Partition, PartitionSystem};
pub use witness::{correlation, witness_search, witness_threshold, Witness};

use crate::error::{Error, Result};
use crate::ff::FieldFunction;
use crate::forms::{box_norm, EdgeFunctionFamily};
use crate::hypergraph::{BaseEdge, Edge};

/// Index in `n^{k-1}` of `x in n^k` with digit `pos` (0 = most significant) dropped.
pub(crate) fn remove_digit(x: usize, pos: usize, k: usize, n: usize) -> usize {
    let p = n.pow((k - 1 - pos) as u32);
    let high = x / (p * n);
    let low = x % p;
    high * p + low
}

/// Inverse of [`remove_digit`] with the dropped digit set to `digit`.
pub(crate) fn insert_digit(z: usize, pos: usize, digit: usize, k: usize, n: usize) -> usize {
    let p = n.pow((k - 1 - pos) as u32);
    let high = z / p;
    let low = z % p;
    (high * n + digit) * p + low
}

/// Atom labels of the join of the pullbacks of `faces` to `V_{e'}`, where
/// `faces[j]` lives on `V_{e' \ {j}}`. Labels are contiguous, in order of
/// first appearance.
pub fn join_labels(faces: &[&Partition]) -> Result<(Vec<u32>, usize)> {
    let k = faces.len();
    let first = faces.first().ok_or_else(|| Error::InvalidParameter("empty boundary".into()))?;
    let n = first.q() * first.q();
    let face_len = n.pow(k as u32 - 1);
    if faces.iter().any(|p| p.len() != face_len) {
        return Err(Error::DimensionMismatch("boundary partitions of unequal size".into()));
    }
    let len = face_len * n;
    let mut ids: HashMap<Vec<u32>, u32> = HashMap::new();
    let mut labels = Vec::with_capacity(len);
    let mut key = vec![0u32; k];
    for x in 0..len {
        for (j, p) in faces.iter().enumerate() {
            key[j] = p.labels()[remove_digit(x, j, k, n)];
        }
        let next = ids.len() as u32;
        labels.push(*ids.entry(key.clone()).or_insert(next));
    }
    Ok((labels, ids.len()))
}

fn check_table(f: &FieldFunction, faces: &[&Partition]) -> Result<()> {
    let k = faces.len();
    if f.m() != 2 * k || faces.iter().any(|p| p.q() != f.q()) {
        return Err(Error::DimensionMismatch(format!(
            "a function over F_{}^{} against {k} faces",
            f.q(),
            f.m()
        )));
    }
    Ok(())
}

/// `E(f | join of faces)`: the mean of `f` on each atom.
pub fn cond_exp_faces(f: &FieldFunction, faces: &[&Partition]) -> Result<FieldFunction> {
    check_table(f, faces)?;
    let (labels, atoms) = join_labels(faces)?;
    let mut sums = vec![0.0; atoms];
    let mut counts = vec![0usize; atoms];
    for (&l, &v) in labels.iter().zip(f.values()) {
        sums[l as usize] += v;
        counts[l as usize] += 1;
    }
    let means: Vec<f64> = sums.iter().zip(&counts).map(|(s, &c)| s / c as f64).collect();
    FieldFunction::from_values(f.q(), f.m(), labels.iter().map(|&l| means[l as usize]).collect())
}

/// `E(f | B_{e'})` with `B_{e'}` the join of the system's partitions on `∂e'`.
pub fn cond_exp(f: &FieldFunction, system: &PartitionSystem, edge: &BaseEdge) -> Result<FieldFunction> {
    cond_exp_faces(f, &system.boundary_parts(edge)?)
}

/// `||E(f | B_{e'})||_2^2`.
pub fn energy(f: &FieldFunction, system: &PartitionSystem, edge: &BaseEdge) -> Result<f64> {
    Ok(cond_exp(f, system, edge)?.mean_square())
}

/// Sum of the energies of all `f_e` against their joins.
pub fn total_energy(fam: &EdgeFunctionFamily, system: &PartitionSystem) -> Result<f64> {
    fam.iter().map(|(e, f)| energy(f, system, &e.projection())).sum()
}

/// `ceil(|edges| 2^{2k} eps^{-2^{k+1}}) + 1`.
pub fn iteration_cap(edges: usize, k: usize, eps: f64) -> u64 {
    let steps = edges as f64 * (1u64 << (2 * k)) as f64 * eps.powi(-(1i32 << (k + 1)));
    if steps >= u64::MAX as f64 {
        u64::MAX
    } else {
        steps.ceil() as u64 + 1
    }
}

/// One accepted refinement.
#[derive(Debug, Clone)]
pub struct RegularityStep {
    pub edge: Edge,
    pub residual_norm: f64,
    pub correlation: f64,
    pub energy_gain: f64,
    /// Faces whose partition actually changed.
    pub refined: Vec<BaseEdge>,
}

#[derive(Debug, Clone)]
pub struct Regularization {
    pub system: PartitionSystem,
    pub iterations: usize,
    /// Total energy before the first step and after each step.
    pub energy_trace: Vec<f64>,
    pub steps: Vec<RegularityStep>,
    /// `||f_e - E(f_e | B_{pi(e)})||_box` per edge, in bundle order.
    pub final_box_norms: Vec<f64>,
    pub eps: f64,
}

/// Residual box norms of every edge against the current system.
pub fn residual_box_norms(fam: &EdgeFunctionFamily, system: &PartitionSystem) -> Result<Vec<f64>> {
    let k = fam.spec().k();
    fam.iter()
        .map(|(e, f)| {
            let g = f.sub(&cond_exp(f, system, &e.projection())?)?;
            box_norm(&g, k)
        })
        .collect()
}

/// Refine the trivial system until every residual `f_e - E(f_e | B_{pi(e)})`
/// has box norm at most `eps`. Each step picks the edge with the largest
/// residual (first in bundle order on ties), finds a witness for it and adds
/// `B_j` to the partition on `pi(e) \ {j}`.
pub fn weak_regularize(fam: &EdgeFunctionFamily, eps: f64) -> Result<Regularization> {
    if !(eps > 0.0) {
        return Err(Error::InvalidParameter(format!("eps must be positive, got {eps}")));
    }
    let eps = if eps > 1.0 {
        log::warn!("eps = {eps} exceeds 1, using 1");
        1.0
    } else {
        eps
    };
    let k = fam.spec().k();
    let cap = iteration_cap(fam.edges().len(), k, eps);
    let mut system = PartitionSystem::trivial(fam.spec().clone(), fam.q());
    let mut energy_trace = vec![total_energy(fam, &system)?];
    let mut steps = Vec::new();

    loop {
        let norms = residual_box_norms(fam, &system)?;
        let (worst, &norm) = norms
            .iter()
            .enumerate()
            .fold((0, &f64::NEG_INFINITY), |acc, cur| if cur.1 > acc.1 { cur } else { acc });
        if norm <= eps {
            return Ok(Regularization {
                system,
                iterations: steps.len(),
                energy_trace,
                steps,
                final_box_norms: norms,
                eps,
            });
        }
        if steps.len() as u64 >= cap {
            return Err(Error::CapExceeded(format!("regularization passed {cap} iterations")));
        }
        let edge = fam.edges()[worst].clone();
        let base = edge.projection();
        let f = &fam.functions()[worst];
        let g = f.sub(&cond_exp(f, &system, &base)?)?;
        let witness = witness_search(&g, k, eps)?.ok_or_else(|| Error::WitnessNotFound {
            edge: edge.to_text(fam.spec().d()),
            norm,
        })?;
        let mut refined = Vec::new();
        for (j, set) in witness.sets.iter().enumerate() {
            let face = base.without(base.blocks()[j]);
            if system.refine(&face, set)? {
                refined.push(face);
            }
        }
        let energy = total_energy(fam, &system)?;
        let gain = energy - energy_trace.last().copied().unwrap_or(0.0);
        log::debug!(
            "step {}: edge {} residual {norm:.6} correlation {:.6} gain {gain:.3e}",
            steps.len() + 1,
            edge.to_text(fam.spec().d()),
            witness.correlation
        );
        energy_trace.push(energy);
        steps.push(RegularityStep {
            edge,
            residual_norm: norm,
            correlation: witness.correlation,
            energy_gain: gain,
            refined,
        });
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypergraph::BundleSpec;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_set(rng: &mut ChaCha8Rng, len: usize, p: f64) -> Vec<bool> {
        (0..len).map(|_| rng.gen_bool(p)).collect()
    }

    #[test]
    fn digits_round_trip() {
        for x in 0..125 {
            for pos in 0..3 {
                let z = remove_digit(x, pos, 3, 5);
                let digit = (x / 5usize.pow(2 - pos as u32)) % 5;
                assert_eq!(insert_digit(z, pos, digit, 3, 5), x);
            }
        }
        assert_eq!(remove_digit(7, 0, 1, 9), 0);
    }

    #[test]
    fn trivial_and_discrete_extremes() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let f = FieldFunction::from_fn(3, 4, |_| rng.gen_range(-1.0..1.0));
        let t = Partition::trivial(3, 1);
        let ce = cond_exp_faces(&f, &[&t, &t]).unwrap();
        assert!(ce.values().iter().all(|&v| (v - f.mean()).abs() < 1e-12));
        let d = Partition::discrete(3, 1);
        let ce = cond_exp_faces(&f, &[&d, &d]).unwrap();
        assert!(ce.max_abs_diff(&f) < 1e-12);
        let e_trivial = cond_exp_faces(&f, &[&t, &t]).unwrap().mean_square();
        assert!((e_trivial - f.mean().powi(2)).abs() < 1e-12);
        assert!((ce.mean_square() - f.mean_square()).abs() < 1e-12);
    }

    #[test]
    fn atom_means_by_grouping() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let f = FieldFunction::from_fn(3, 4, |_| rng.gen_range(-1.0..1.0));
        let a = random_set(&mut rng, 9, 0.5);
        let b = random_set(&mut rng, 9, 0.5);
        // faces[0] lives on the x_1 coordinate, faces[1] on x_0
        let p0 = Partition::from_generators(3, 1, std::slice::from_ref(&a)).unwrap();
        let p1 = Partition::from_generators(3, 1, std::slice::from_ref(&b)).unwrap();
        let ce = cond_exp_faces(&f, &[&p0, &p1]).unwrap();
        let mut groups: std::collections::BTreeMap<(bool, bool), Vec<f64>> = Default::default();
        for x0 in 0..9 {
            for x1 in 0..9 {
                groups.entry((a[x1], b[x0])).or_default().push(f.get(x0 * 9 + x1));
            }
        }
        for x0 in 0..9 {
            for x1 in 0..9 {
                let g = &groups[&(a[x1], b[x0])];
                let mean = g.iter().sum::<f64>() / g.len() as f64;
                assert!((ce.get(x0 * 9 + x1) - mean).abs() < 1e-12);
            }
        }
        let twice = cond_exp_faces(&ce, &[&p0, &p1]).unwrap();
        assert!(twice.max_abs_diff(&ce) < 1e-12);
        assert!(ce.sup_norm() <= f.sup_norm() + 1e-12);
    }

    #[test]
    fn pythagoras_and_monotone_chain() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..5 {
            let f = FieldFunction::from_fn(5, 4, |_| rng.gen_range(-1.0..1.0));
            let mut p0 = Partition::trivial(5, 1);
            let mut p1 = Partition::trivial(5, 1);
            let mut last = 0.0;
            for _ in 0..6 {
                let ce = cond_exp_faces(&f, &[&p0, &p1]).unwrap();
                let e = ce.mean_square();
                let residual = f.sub(&ce).unwrap().mean_square();
                assert!((f.mean_square() - e - residual).abs() < 1e-9);
                assert!(e >= last - 1e-12 && e <= f.mean_square() + 1e-12);
                last = e;
                p0.refine(&random_set(&mut rng, 25, 0.4)).unwrap();
                p1.refine(&random_set(&mut rng, 25, 0.6)).unwrap();
            }
        }
    }

    #[test]
    fn constants_need_no_steps() {
        let fam = EdgeFunctionFamily::uniform(BundleSpec::rectangle(2, 2).unwrap(), FieldFunction::constant(3, 4, 0.3)).unwrap();
        let r = weak_regularize(&fam, 0.1).unwrap();
        assert_eq!(r.iterations, 0);
        assert!(r.system.complexities().iter().all(|(_, c)| *c == 0));
        assert!(weak_regularize(&fam, 0.0).is_err());
        assert_eq!(weak_regularize(&fam, 3.0).unwrap().eps, 1.0);
    }

    #[test]
    fn planted_rectangles_are_recovered() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let q = 5;
        let spec = BundleSpec::rectangle(2, 2).unwrap();
        let a1 = random_set(&mut rng, 25, 0.5);
        let a2 = random_set(&mut rng, 25, 0.5);
        let f = FieldFunction::from_fn(q, 4, |x| if a1[x[0] * q + x[1]] && a2[x[2] * q + x[3]] { 1.0 } else { 0.0 });
        let fam = EdgeFunctionFamily::uniform(spec, f).unwrap();
        let r = weak_regularize(&fam, 0.1).unwrap();
        assert!(r.final_box_norms.iter().all(|&v| v <= 1e-9), "{:?}", r.final_box_norms);
        let independent = residual_box_norms(&fam, &r.system).unwrap();
        assert!(independent.iter().all(|&v| v <= 1e-9));
    }

    #[test]
    fn random_family_postcondition() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let q = 3;
        let spec = BundleSpec::rectangle(2, 2).unwrap();
        let fam = EdgeFunctionFamily::from_fn(spec, q, |_| {
            FieldFunction::from_fn(q, 4, |_| if rng.gen_bool(0.5) { 1.0 } else { -1.0 })
        })
        .unwrap();
        let eps = 0.4;
        let r = weak_regularize(&fam, eps).unwrap();
        assert!(r.iterations as u64 <= iteration_cap(fam.edges().len(), 2, eps));
        for (_, c) in r.system.complexities() {
            assert!(c <= r.iterations);
        }
        let step_floor = witness_threshold(2, eps).powi(2);
        for s in &r.steps {
            assert!(s.energy_gain >= step_floor - 1e-12);
            assert!(s.energy_gain >= s.correlation.powi(2) - 1e-12);
        }
        for (e, f) in fam.iter() {
            let g = f.sub(&cond_exp(f, &r.system, &e.projection()).unwrap()).unwrap();
            assert!(box_norm(&g, 2).unwrap() <= eps);
        }
    }

    #[test]
    fn arity_one_is_immediate() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let fam = EdgeFunctionFamily::from_fn(BundleSpec::rectangle(2, 1).unwrap(), 3, |_| {
            FieldFunction::from_fn(3, 2, |_| rng.gen_range(-1.0..1.0))
        })
        .unwrap();
        let r = weak_regularize(&fam, 0.05).unwrap();
        assert_eq!(r.iterations, 0);
    }
}
