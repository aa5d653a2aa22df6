use std::collections::HashMap;

use rayon::prelude::*;

use super::cube::{check_grid, CubeTable, GridCube};
use super::enumerate::{sigma_normalized, SigmaTable};
use super::simplex::SimplexSpec;
use crate::error::{Error, Result};

fn common_cube(fs: &[CubeTable]) -> Result<&GridCube> {
    let first = fs.first().ok_or_else(|| Error::InvalidParameter("need at least one function".into()))?;
    if fs.iter().any(|f| f.cube() != first.cube()) {
        return Err(Error::DimensionMismatch("functions live on different cubes".into()));
    }
    Ok(first.cube())
}

/// `out(x) = sum_{s = lo..=hi} in(x + s q e_axis)` along every axis in turn,
/// reading zero outside the cube.
pub(crate) fn strided_box_sum(cube: &GridCube, values: &[f64], q: usize, lo: i64, hi: i64) -> Vec<f64> {
    let side = cube.side() as usize;
    let mut cur = values.to_vec();
    for axis in 0..cube.n() {
        let stride = cube.stride(axis);
        let block = stride * side;
        let mut next = vec![0.0; cur.len()];
        let mut seq = Vec::with_capacity(side / q + 1);
        let mut prefix = Vec::with_capacity(side / q + 2);
        for outer in (0..cur.len()).step_by(block) {
            for inner in 0..stride {
                let base = outer + inner;
                for r in 0..q.min(side) {
                    seq.clear();
                    seq.extend((r..side).step_by(q).map(|i| cur[base + i * stride]));
                    prefix.clear();
                    prefix.push(0.0);
                    let mut acc = 0.0;
                    for &v in &seq {
                        acc += v;
                        prefix.push(acc);
                    }
                    let len = seq.len() as i64;
                    for j in 0..len {
                        let a = (j + lo).clamp(0, len);
                        let b = (j + hi + 1).clamp(0, len);
                        let sum = if b > a { prefix[b as usize] - prefix[a as usize] } else { 0.0 };
                        next[base + (r + j as usize * q) * stride] = sum;
                    }
                }
            }
        }
        cur = next;
    }
    cur
}

/// Points per axis of `Q(q, lambda) = [-lambda/2, lambda/2]^n ∩ (qZ)^n`: `2a + 1`
/// with `a` the largest integer such that `(2aq)^2 <= lambda^2`.
pub fn closed_window_radius(q: u64, lambda2: u64) -> i64 {
    let mut a = 0i64;
    while 4 * (a as u128 + 1).pow(2) * (q as u128).pow(2) <= lambda2 as u128 {
        a += 1;
    }
    a
}

/// `M^1_{lambda,q,Q}(f_1, ..., f_k) = E_{t in Q} prod_i E_{m in t + Q(q,lambda)} f_i(m)`.
pub fn eval_m1(q: u64, lambda2: u64, fs: &[CubeTable]) -> Result<f64> {
    let cube = common_cube(fs)?;
    if q == 0 || lambda2 == 0 {
        return Err(Error::InvalidParameter("q and lambda^2 must be positive".into()));
    }
    let a = closed_window_radius(q, lambda2);
    let count = ((2 * a + 1) as f64).powi(cube.n() as i32);
    let mut product = vec![1.0; cube.volume()];
    let mut cache: Vec<(&CubeTable, Vec<f64>)> = Vec::new();
    for f in fs {
        if !cache.iter().any(|(g, _)| *g == f) {
            let sums = strided_box_sum(cube, f.values(), q as usize, -a, a);
            cache.push((f, sums));
        }
        let sums = &cache.iter().find(|(g, _)| *g == f).expect("cached").1;
        for (p, s) in product.iter_mut().zip(sums) {
            *p *= s / count;
        }
    }
    Ok(product.iter().sum::<f64>() / product.len() as f64)
}

/// Offsets `s` with `sq ∈ [-L/2, L/2)`: `L/q` of them.
pub fn half_open_offsets(q: u64, l: u64) -> (i64, i64) {
    let (q, l) = (q as i64, l as i64);
    let lo = -(l / (2 * q));
    (lo, lo + l / q - 1)
}

/// `f * chi_{q,L}` on the cube: the average of `f(t - y)` over
/// `y ∈ [-L/2, L/2)^n ∩ (qZ)^n`, zero outside the cube.
pub fn grid_average(f: &CubeTable, q: u64, l: u64) -> Result<Vec<f64>> {
    if q == 0 || l == 0 || !l.is_multiple_of(q) || l > f.cube().side() {
        return Err(Error::InvalidParameter(format!("U^1 needs q | L <= side, got q={q} L={l}")));
    }
    let (lo, hi) = half_open_offsets(q, l);
    let count = ((l / q) as f64).powi(f.cube().n() as i32);
    let sums = strided_box_sum(f.cube(), f.values(), q as usize, -hi, -lo);
    Ok(sums.into_iter().map(|s| s / count).collect())
}

/// `||f||_{U^1_{q,L}(Q)} = (E_{t in Q} |f * chi_{q,L}(t)|^2)^{1/2}`.
pub fn u1_norm(f: &CubeTable, q: u64, l: u64) -> Result<f64> {
    let avg = grid_average(f, q, l)?;
    Ok((avg.iter().map(|v| v * v).sum::<f64>() / avg.len() as f64).sqrt())
}

/// Atom labels of `G_{q,L,Q}`: the `L`-cell (anchored at the corner)
/// together with the residue of the point modulo `q`.
pub fn grid_atoms(cube: &GridCube, q: u64, l: u64) -> Result<(Vec<u32>, usize)> {
    check_grid(cube.side(), q, l)?;
    let mut ids: HashMap<Vec<i64>, u32> = HashMap::new();
    let mut labels = Vec::with_capacity(cube.volume());
    let n = cube.n();
    for i in 0..cube.volume() {
        let p = cube.point_of(i);
        let mut key = Vec::with_capacity(2 * n);
        for (x, c) in p.iter().zip(cube.corner()) {
            key.push((x - c) / l as i64);
            key.push(x.rem_euclid(q as i64));
        }
        let next = ids.len() as u32;
        labels.push(*ids.entry(key).or_insert(next));
    }
    Ok((labels, ids.len()))
}

/// `E(f | G_{q,L,Q})`.
pub fn grid_cond_exp(f: &CubeTable, q: u64, l: u64) -> Result<CubeTable> {
    let (labels, atoms) = grid_atoms(f.cube(), q, l)?;
    let mut sums = vec![0.0; atoms];
    let mut counts = vec![0usize; atoms];
    for (&a, &v) in labels.iter().zip(f.values()) {
        sums[a as usize] += v;
        counts[a as usize] += 1;
    }
    let values = labels.iter().map(|&a| sums[a as usize] / counts[a as usize] as f64).collect();
    CubeTable::new(f.cube().clone(), values)
}

/// `N^1_{lambda Delta^0, q, Q}` against a precomputed `sigma`.
pub fn eval_n1_with(sigma: &SigmaTable, fs: &[CubeTable]) -> Result<f64> {
    let cube = common_cube(fs)?;
    let k = sigma.copies.first().map_or(0, |c| c.len() + 1);
    if fs.len() != k {
        return Err(Error::DimensionMismatch(format!("{} functions for a {k}-point simplex", fs.len())));
    }
    let w = sigma.weight();
    let total: f64 = (0..cube.volume())
        .into_par_iter()
        .map(|i| {
            let v1 = fs[0].values()[i];
            if v1 == 0.0 {
                return 0.0;
            }
            let m1 = cube.point_of(i);
            let mut point = m1.clone();
            let mut acc = 0.0;
            for copy in &sigma.copies {
                let mut prod = v1;
                for (f, m) in fs[1..].iter().zip(copy) {
                    for ((p, a), b) in point.iter_mut().zip(&m1).zip(m) {
                        *p = a + b;
                    }
                    prod *= f.get(&point);
                    if prod == 0.0 {
                        break;
                    }
                }
                acc += prod;
            }
            acc * w
        })
        .collect::<Vec<f64>>()
        .iter()
        .sum();
    Ok(total / cube.volume() as f64)
}

/// `N^1_{lambda Delta^0, q, Q}(f_1, ..., f_k) = E_{m_1 in Q} sum sigma(m_2 - m_1, ...) prod f_i(m_i)`
/// with `sigma` normalized per `lambda`.
pub fn eval_n1(spec: &SimplexSpec, q: u64, lambda2: u64, fs: &[CubeTable]) -> Result<f64> {
    if fs.len() != spec.k() {
        return Err(Error::DimensionMismatch(format!("{} functions for a {}-point simplex", fs.len(), spec.k())));
    }
    if fs.iter().any(|f| f.cube().n() != spec.n()) {
        return Err(Error::DimensionMismatch("cube and simplex dimensions differ".into()));
    }
    eval_n1_with(&sigma_normalized(spec, q, lambda2, None)?, fs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::LatticeSet;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_table(cube: &GridCube, rng: &mut ChaCha8Rng) -> CubeTable {
        CubeTable::new(cube.clone(), (0..cube.volume()).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap()
    }

    #[test]
    fn box_sum_matches_direct() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let cube = GridCube::new(vec![3, -1], 7).unwrap();
        let f = random_table(&cube, &mut rng);
        for (q, lo, hi) in [(1, -1, 1), (2, -2, 1), (3, 0, 2)] {
            let fast = strided_box_sum(&cube, f.values(), q, lo, hi);
            for i in 0..cube.volume() {
                let p = cube.point_of(i);
                let mut direct = 0.0;
                for s0 in lo..=hi {
                    for s1 in lo..=hi {
                        direct += f.get(&[p[0] + s0 * q as i64, p[1] + s1 * q as i64]);
                    }
                }
                assert!((fast[i] - direct).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn window_radius() {
        assert_eq!(closed_window_radius(1, 4), 1);
        assert_eq!(closed_window_radius(1, 3), 0);
        assert_eq!(closed_window_radius(1, 16), 2);
        assert_eq!(closed_window_radius(2, 16), 1);
        assert_eq!(half_open_offsets(1, 4), (-2, 1));
        assert_eq!(half_open_offsets(2, 6), (-1, 1));
    }

    #[test]
    fn m1_direct_double_average() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let cube = GridCube::origin(2, 6).unwrap();
        let fs = [random_table(&cube, &mut rng), random_table(&cube, &mut rng)];
        let (q, lambda2) = (1u64, 9u64);
        let a = 1i64;
        let mut direct = 0.0;
        for i in 0..cube.volume() {
            let t = cube.point_of(i);
            let mut prod = 1.0;
            for f in &fs {
                let mut s = 0.0;
                for d0 in -a..=a {
                    for d1 in -a..=a {
                        s += f.get(&[t[0] + d0 * q as i64, t[1] + d1 * q as i64]);
                    }
                }
                prod *= s / 9.0;
            }
            direct += prod;
        }
        direct /= cube.volume() as f64;
        assert!((eval_m1(q, lambda2, &fs).unwrap() - direct).abs() < 1e-12);
    }

    #[test]
    fn m1_constant_boundary_deficit() {
        let cube = GridCube::origin(2, 20).unwrap();
        let one = CubeTable::constant(cube, 1.0);
        let m = eval_m1(1, 4, &[one.clone(), one.clone()]).unwrap();
        // each axis loses 2/20 of a window at the two ends
        let axis: f64 = (18.0 + 2.0 * (2.0 / 3.0f64).powi(2)) / 20.0;
        assert!((m - axis * axis).abs() < 1e-12);
        assert!(1.0 - m <= 3.0 * 2.0 / 20.0 * 2.0);
    }

    #[test]
    fn m1_planted_cell() {
        // S fills the left half of a 1-d window: inside the cell the
        // relative density is 1, so M^1 ≈ (1/2) * 1^k away from the edge.
        let cube = GridCube::origin(1, 400).unwrap();
        let s = LatticeSet::from_fn(cube, |p| p[0] < 200).indicator();
        let m = eval_m1(1, 16, &[s.clone(), s.clone()]).unwrap();
        assert!((m - 0.5).abs() < 4.0 / 400.0);
    }

    #[test]
    fn u1_constants_cells_and_alternation() {
        let cube = GridCube::origin(2, 24).unwrap();
        let c = CubeTable::constant(cube.clone(), -0.5);
        let norm = u1_norm(&c, 2, 4).unwrap();
        assert!((0.5 * (1.0 - 2.0 * 4.0 / 24.0)..=0.5 + 1e-12).contains(&norm));
        let alt = CubeTable::from_fn(cube.clone(), |p| if (p[0] / 4) % 2 == 0 { 1.0 } else { -1.0 });
        let alt_norm = u1_norm(&alt, 1, 4).unwrap();
        assert!(alt_norm > 0.3);
        // union of full 4-blocks at density 1/2 against a coarser scale
        let line = GridCube::origin(1, 960).unwrap();
        let s = LatticeSet::from_fn(line.clone(), |p| (p[0] / 4) % 2 == 0);
        let delta = s.density();
        assert_eq!(delta, 0.5);
        let g = CubeTable::new(line, s.indicator().values().iter().map(|v| v - delta).collect()).unwrap();
        assert!(u1_norm(&g, 2, 24).unwrap() < 0.05);
        assert!(u1_norm(&c, 3, 4).is_err());
    }

    #[test]
    fn grid_cond_exp_cells() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let cube = GridCube::new(vec![1, 2], 8).unwrap();
        let f = random_table(&cube, &mut rng);
        let ce = grid_cond_exp(&f, 2, 4).unwrap();
        let (_, atoms) = grid_atoms(&cube, 2, 4).unwrap();
        assert_eq!(atoms, 4 * 4);
        let p = [1i64, 2];
        let mut s = 0.0;
        for a in (0..4).step_by(2) {
            for b in (0..4).step_by(2) {
                s += f.get(&[p[0] + a, p[1] + b]);
            }
        }
        assert!((ce.get(&p) - s / 4.0).abs() < 1e-12);
        assert!((ce.mean() - f.mean()).abs() < 1e-12);
        let twice = grid_cond_exp(&ce, 2, 4).unwrap();
        assert!(twice.values().iter().zip(ce.values()).all(|(a, b)| (a - b).abs() < 1e-12));
    }

    #[test]
    fn n1_parity_and_boundary() {
        let spec = SimplexSpec::segment(vec![1, 0, 0, 0, 0]).unwrap();
        let cube = GridCube::origin(5, 6).unwrap();
        let even = LatticeSet::from_fn(cube.clone(), |p| p.iter().all(|c| c % 2 == 0)).indicator();
        for lambda2 in [1u64, 3, 5] {
            assert_eq!(eval_n1(&spec, 1, lambda2, &[even.clone(), even.clone()]).unwrap(), 0.0);
        }
        assert!(eval_n1(&spec, 1, 4, &[even.clone(), even.clone()]).unwrap() > 0.0);
        let one = CubeTable::constant(cube.clone(), 1.0);
        let n = eval_n1(&spec, 1, 1, &[one.clone(), one.clone()]).unwrap();
        // a unit step leaves the cube from 1 of 6 positions on its axis
        assert!((n - 5.0 / 6.0).abs() < 1e-12);
        let zero = CubeTable::constant(cube, 0.0);
        assert_eq!(eval_n1(&spec, 1, 1, &[one, zero]).unwrap(), 0.0);
    }
}
