use rand::seq::index::sample;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ff::FieldFunction;
use crate::lattice::{GridCube, LatticeSet};

/// Name recorded in manifests for the generator behind every seed.
pub const RNG_ALGORITHM: &str = "ChaCha8Rng/rand_chacha-0.3/seed_from_u64";

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// How to draw a set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SetGenerator {
    /// Exactly `round(delta * volume)` points, uniformly.
    RandomDensity { delta: f64 },
    /// `residue + (modulus Z)^n`.
    CongruenceClass { modulus: u64, residue: Vec<i64> },
    /// `A_1 x A_2` with random factors of the given densities; the first
    /// factor takes the first half of the coordinates.
    PlantedProduct { delta1: f64, delta2: f64 },
    /// Points whose first coordinate lies in an even block of length `fine`:
    /// balanced on every coarser aligned cell, structured at scale `fine`.
    TwoScale { fine: u64 },
    /// A fraction `share` of `size` points in `residue + (modulus Z)^n`, the
    /// rest spread over the other classes.
    Concentrated { modulus: u64, residue: Vec<i64>, share: f64, size: usize },
}

/// `round(delta * len)` distinct indices, sorted into a membership table.
pub fn random_subset(len: usize, delta: f64, rng: &mut impl Rng) -> Result<Vec<bool>> {
    if !(0.0..=1.0).contains(&delta) {
        return Err(Error::InvalidParameter(format!("density {delta} outside [0, 1]")));
    }
    let count = (delta * len as f64).round() as usize;
    let mut members = vec![false; len];
    for i in sample(rng, len, count) {
        members[i] = true;
    }
    Ok(members)
}

/// A set in `F_q^{2d}` given as a membership table in row-major order.
pub fn ff_set(generator: &SetGenerator, q: usize, d: usize, seed: u64) -> Result<Vec<bool>> {
    let mut rng = rng(seed);
    let len = q.pow(2 * d as u32);
    match generator {
        SetGenerator::RandomDensity { delta } => random_subset(len, *delta, &mut rng),
        SetGenerator::PlantedProduct { delta1, delta2 } => {
            let split = q.pow(2 * (d / 2).max(1) as u32);
            let rest = len / split;
            let a = random_subset(split, *delta1, &mut rng)?;
            let b = random_subset(rest, *delta2, &mut rng)?;
            Ok((0..len).map(|i| a[i / rest] && b[i % rest]).collect())
        }
        other => Err(Error::InvalidParameter(format!("{other:?} is a lattice generator"))),
    }
}

/// A uniformly random `+-1` table over `F_q^m`.
pub fn random_signs(q: usize, m: usize, rng: &mut impl Rng) -> FieldFunction {
    FieldFunction::from_fn(q, m, |_| if rng.gen_bool(0.5) { 1.0 } else { -1.0 })
}

/// A uniformly random table over `F_q^m` with values in `[-1, 1]`.
pub fn random_bounded(q: usize, m: usize, rng: &mut impl Rng) -> FieldFunction {
    FieldFunction::from_fn(q, m, |_| rng.gen_range(-1.0..=1.0))
}

fn in_class(p: &[i64], modulus: u64, residue: &[i64]) -> bool {
    let m = modulus as i64;
    p.iter().zip(residue).all(|(x, r)| (x - r).rem_euclid(m) == 0)
}

pub fn lattice_set(generator: &SetGenerator, window: &GridCube, seed: u64) -> Result<LatticeSet> {
    let mut rng = rng(seed);
    let n = window.n();
    match generator {
        SetGenerator::RandomDensity { delta } => {
            LatticeSet::new(window.clone(), random_subset(window.volume(), *delta, &mut rng)?)
        }
        SetGenerator::CongruenceClass { modulus, residue } => {
            if *modulus == 0 || residue.len() != n {
                return Err(Error::InvalidParameter("congruence class needs modulus >= 1 and n residues".into()));
            }
            Ok(LatticeSet::from_fn(window.clone(), |p| in_class(p, *modulus, residue)))
        }
        SetGenerator::PlantedProduct { delta1, delta2 } => {
            if n < 2 {
                return Err(Error::InvalidParameter("a planted product needs n >= 2".into()));
            }
            let side = window.side() as usize;
            let h = n / 2;
            let first = random_subset(side.pow(h as u32), *delta1, &mut rng)?;
            let second = random_subset(side.pow((n - h) as u32), *delta2, &mut rng)?;
            let rest = side.pow((n - h) as u32);
            let members = (0..window.volume()).map(|i| first[i / rest] && second[i % rest]).collect();
            LatticeSet::new(window.clone(), members)
        }
        SetGenerator::TwoScale { fine } => {
            if *fine == 0 {
                return Err(Error::InvalidParameter("fine scale must be positive".into()));
            }
            let f = *fine as i64;
            Ok(LatticeSet::from_fn(window.clone(), |p| (p[0] - window.corner()[0]).div_euclid(f) % 2 == 0))
        }
        SetGenerator::Concentrated { modulus, residue, share, size } => {
            if *modulus < 2 || residue.len() != n || !(0.0..=1.0).contains(share) {
                return Err(Error::InvalidParameter("concentrated set needs modulus >= 2, n residues, share in [0,1]".into()));
            }
            let (inside, outside): (Vec<usize>, Vec<usize>) =
                (0..window.volume()).partition(|&i| in_class(&window.point_of(i), *modulus, residue));
            let k_in = (share * *size as f64).round() as usize;
            let k_out = size - k_in.min(*size);
            if k_in > inside.len() || k_out > outside.len() {
                return Err(Error::InvalidParameter("window too small for the requested size".into()));
            }
            let mut members = vec![false; window.volume()];
            for j in sample(&mut rng, inside.len(), k_in) {
                members[inside[j]] = true;
            }
            for j in sample(&mut rng, outside.len(), k_out) {
                members[outside[j]] = true;
            }
            LatticeSet::new(window.clone(), members)
        }
    }
}
