use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::ff::FieldFunction;

use super::{insert_digit, remove_digit};

/// Sets `B_j` on `V_{e' \ {j}}` (indexed by the position `j` of the removed
/// block) and the signed correlation `<g, prod_j 1_{B_j}>`.
#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    pub sets: Vec<Vec<bool>>,
    pub correlation: f64,
    /// Index of the fixed co-slice `(x_12, ..., x_k2)` in `V_{e'}`.
    pub coslice: usize,
}

/// `2^{-k} eps^{2^k}`.
pub fn witness_threshold(k: usize, eps: f64) -> f64 {
    eps.powi(1 << k) / (1u64 << k) as f64
}

/// `E_x g(x) prod_j 1_{B_j}(x without coordinate j)` over `V_{e'}`.
pub fn correlation(g: &FieldFunction, k: usize, sets: &[Vec<bool>]) -> Result<f64> {
    let n = g.q() * g.q();
    check_shape(g, k)?;
    if sets.len() != k || sets.iter().any(|s| s.len() != n.pow(k as u32 - 1)) {
        return Err(Error::DimensionMismatch("need k sets on V_{e' \\ {j}}".into()));
    }
    let mut acc = 0.0;
    for (x, &v) in g.values().iter().enumerate() {
        if (0..k).all(|j| sets[j][remove_digit(x, j, k, n)]) {
            acc += v;
        }
    }
    Ok(acc / g.len() as f64)
}

fn check_shape(g: &FieldFunction, k: usize) -> Result<()> {
    if k == 0 || g.m() != 2 * k {
        return Err(Error::DimensionMismatch(format!("expected a table over F_q^{}", 2 * k)));
    }
    Ok(())
}

struct Grid {
    n: usize,
    k: usize,
    pow: Vec<usize>,
}

impl Grid {
    fn new(n: usize, k: usize) -> Self {
        let pow = (0..k).map(|i| n.pow((k - 1 - i) as u32)).collect();
        Self { n, k, pow }
    }

    fn digit(&self, x: usize, i: usize) -> usize {
        (x / self.pow[i]) % self.n
    }

    /// Index of the point taking coordinate `i` from `y` when bit `i` of
    /// `mask` is set and from `x` otherwise.
    fn mix(&self, x: usize, y: usize, mask: usize) -> usize {
        (0..self.k)
            .map(|i| if (mask >> i) & 1 == 1 { self.digit(y, i) } else { self.digit(x, i) } * self.pow[i])
            .sum()
    }
}

/// `E_x prod_{l in {1,2}^k} g(x_l)` with the label-2 coordinates fixed to `y`.
fn inner_average(g: &[f64], grid: &Grid, y: usize) -> f64 {
    let masks = 1usize << grid.k;
    let mut acc = 0.0;
    for x in 0..g.len() {
        let mut prod = 1.0;
        for mask in 0..masks {
            prod *= g[grid.mix(x, y, mask)];
            if prod == 0.0 {
                break;
            }
        }
        acc += prod;
    }
    acc / g.len() as f64
}

/// `h_j` on `V_{e' \ {j}}`: the product of the factors whose first label-2
/// coordinate is `j`.
fn partial_products(g: &[f64], grid: &Grid, y: usize) -> Vec<Vec<f64>> {
    let (n, k) = (grid.n, grid.k);
    let face_len = n.pow(k as u32 - 1);
    (0..k)
        .map(|j| {
            let masks: Vec<usize> =
                (1..1usize << k).filter(|m| m.trailing_zeros() as usize == j).collect();
            (0..face_len)
                .map(|z| {
                    let x = insert_digit(z, j, 0, k, n);
                    masks.iter().map(|&m| g[grid.mix(x, y, m)]).product()
                })
                .collect()
        })
        .collect()
}

/// Indices of `values` sorted ascending, ties by index.
fn level_order(values: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    order
}

/// Best `|sum of c over a prefix or suffix of order|`; returns the sum and
/// the chosen set.
fn best_level_set(c: &[f64], order: &[usize]) -> (f64, Vec<bool>) {
    let total: f64 = c.iter().sum();
    let (mut best, mut best_len, mut best_suffix) = (0.0f64, 0usize, false);
    let mut prefix = 0.0;
    for (len, &i) in order.iter().enumerate() {
        prefix += c[i];
        if prefix.abs() > best.abs() {
            (best, best_len, best_suffix) = (prefix, len + 1, false);
        }
        let suffix = total - prefix;
        if len + 1 < order.len() && suffix.abs() > best.abs() {
            (best, best_len, best_suffix) = (suffix, len + 1, true);
        }
    }
    let mut set = vec![false; c.len()];
    let chosen = if best_suffix { &order[best_len..] } else { &order[..best_len] };
    for &i in chosen {
        set[i] = true;
    }
    (best, set)
}

/// `c_j(z) = sum_{x_j} g(x) prod_{i != j} 1_{B_i}(x without i)` at `z = x without j`.
fn marginal(g: &[f64], grid: &Grid, sets: &[Vec<bool>], j: usize) -> Vec<f64> {
    let (n, k) = (grid.n, grid.k);
    let mut c = vec![0.0; n.pow(k as u32 - 1)];
    for (x, &v) in g.iter().enumerate() {
        if (0..k).all(|i| i == j || sets[i][remove_digit(x, i, k, n)]) {
            c[remove_digit(x, j, k, n)] += v;
        }
    }
    c
}

fn raw_sum(g: &[f64], grid: &Grid, sets: &[Vec<bool>]) -> f64 {
    let c = marginal(g, grid, sets, 0);
    c.iter().zip(&sets[0]).filter(|(_, &s)| s).map(|(v, _)| v).sum()
}

/// Alternating improvement: each `B_j` in turn is replaced by the best level
/// set of `h_j` or the best response `{c_j > 0}` / `{c_j < 0}`.
fn ascend(g: &[f64], grid: &Grid, orders: &[Vec<usize>], mut sets: Vec<Vec<bool>>) -> (f64, Vec<Vec<bool>>) {
    let mut best = raw_sum(g, grid, &sets);
    for _ in 0..64 {
        let mut improved = false;
        for j in 0..grid.k {
            let c = marginal(g, grid, &sets, j);
            let mut candidates = vec![best_level_set(&c, &orders[j])];
            let pos: Vec<bool> = c.iter().map(|&v| v > 0.0).collect();
            let neg: Vec<bool> = c.iter().map(|&v| v < 0.0).collect();
            candidates.push((c.iter().filter(|&&v| v > 0.0).sum(), pos));
            candidates.push((c.iter().filter(|&&v| v < 0.0).sum(), neg));
            for (value, set) in candidates {
                if value.abs() > best.abs() * (1.0 + 1e-12) + 1e-300 {
                    best = value;
                    sets[j] = set;
                    improved = true;
                }
            }
        }
        if !improved {
            break;
        }
    }
    (best, sets)
}

/// Exhaustive scan for `k = 2`: every level set of `h_0` against every level
/// set of `h_1`.
fn scan_pairs(g: &[f64], grid: &Grid, orders: &[Vec<usize>]) -> (f64, Vec<Vec<bool>>) {
    let n = grid.n;
    let (mut best, mut best_b0, mut best_b1) = (0.0f64, Vec::new(), Vec::new());
    for reverse in [false, true] {
        let seq: Vec<usize> =
            if reverse { orders[0].iter().rev().copied().collect() } else { orders[0].clone() };
        // B_0 constrains x_1; c(x_0) = sum_{x_1 in B_0} g(x_0, x_1)
        let mut c = vec![0.0; n];
        for (len, &x1) in seq.iter().enumerate() {
            for (x0, cv) in c.iter_mut().enumerate() {
                *cv += g[x0 * n + x1];
            }
            let (value, b1) = best_level_set(&c, &orders[1]);
            if value.abs() > best.abs() {
                best = value;
                let mut b0 = vec![false; n];
                for &i in &seq[..=len] {
                    b0[i] = true;
                }
                best_b0 = b0;
                best_b1 = b1;
            }
        }
    }
    if best_b0.is_empty() {
        return (0.0, vec![vec![false; n], vec![false; n]]);
    }
    (best, vec![best_b0, best_b1])
}

fn search_coslice(g: &[f64], grid: &Grid, y: usize) -> (f64, Vec<Vec<bool>>) {
    let h = partial_products(g, grid, y);
    let orders: Vec<Vec<usize>> = h.iter().map(|hj| level_order(hj)).collect();
    let face_len = grid.n.pow(grid.k as u32 - 1);
    if grid.k == 2 {
        let start = scan_pairs(g, grid, &orders);
        return ascend(g, grid, &orders, start.1);
    }
    let starts = [
        vec![vec![true; face_len]; grid.k],
        h.iter().map(|hj| hj.iter().map(|&v| v > 0.0).collect()).collect(),
        h.iter().map(|hj| hj.iter().map(|&v| v < 0.0).collect()).collect(),
    ];
    starts
        .into_iter()
        .map(|s| ascend(g, grid, &orders, s))
        .fold((0.0, Vec::new()), |acc, cand| if cand.0.abs() > acc.0.abs() { cand } else { acc })
}

/// Looks for sets `B_j` with `|<g, prod_j 1_{B_j}>| >= 2^{-k} eps^{2^k}`.
///
/// Co-slices are visited by decreasing inner average (ties lexicographic);
/// at each one the level sets of the partial products `h_j` are scanned and
/// then improved coordinate-wise. The first co-slice reaching the threshold
/// wins.
pub fn witness_search(g: &FieldFunction, k: usize, eps: f64) -> Result<Option<Witness>> {
    check_shape(g, k)?;
    if !(eps > 0.0) {
        return Err(Error::InvalidParameter(format!("eps must be positive, got {eps}")));
    }
    g.check_bounded(2.0 + 1e-12)?;
    let n = g.q() * g.q();
    let grid = Grid::new(n, k);
    let values = g.values();
    let threshold = witness_threshold(k, eps);

    let inner: Vec<f64> = (0..values.len()).into_par_iter().map(|y| inner_average(values, &grid, y)).collect();
    let mut coslices: Vec<usize> = (0..values.len()).collect();
    coslices.sort_by(|&a, &b| inner[b].abs().total_cmp(&inner[a].abs()).then(a.cmp(&b)));
    let budget = if k == 2 { coslices.len() } else { coslices.len().min(256) };
    let total = values.len() as f64;

    for &y in &coslices[..budget] {
        let (sum, sets) = search_coslice(values, &grid, y);
        let corr = sum / total;
        if sets.len() == k && corr.abs() >= threshold {
            return Ok(Some(Witness { sets, correlation: corr, coslice: y }));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::box_norm;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_has_no_witness() {
        let g = FieldFunction::zeros(3, 4);
        assert!(witness_search(&g, 2, 0.1).unwrap().is_none());
        assert!(witness_search(&g, 2, 0.0).is_err());
        assert!(witness_search(&FieldFunction::constant(3, 4, 2.5), 2, 0.5).is_err());
    }

    #[test]
    fn planted_rectangle_is_recovered() {
        let q = 5;
        let n = 25;
        let b1: Vec<bool> = (0..n).map(|i| i % 3 == 0).collect();
        let b2: Vec<bool> = (0..n).map(|i| i < 10).collect();
        let (d1, d2) = (9.0 / 25.0, 10.0 / 25.0);
        let mean = d1 * d2;
        let g = FieldFunction::from_values(q, 4, (0..n * n).map(|i| {
            let (x0, x1) = (i / n, i % n);
            if b1[x0] && b2[x1] { 1.0 - mean } else { -mean }
        }).collect()).unwrap();
        // <g, 1_{B1 x B2}> = d1 d2 (1 - d1 d2)
        let planted = mean * (1.0 - mean);
        let w = witness_search(&g, 2, box_norm(&g, 2).unwrap()).unwrap().unwrap();
        assert!(w.correlation.abs() >= planted - 1e-12, "{} < {planted}", w.correlation);
        let check = correlation(&g, 2, &w.sets).unwrap();
        assert!((check - w.correlation).abs() < 1e-12);
    }

    /// Oracle: enumerate every pair of level sets of h_0, h_1 at the chosen
    /// co-slice by brute force.
    fn level_set_optimum(g: &FieldFunction) -> (usize, f64) {
        let n = g.q() * g.q();
        let v = g.values();
        let inner: Vec<f64> = (0..n * n)
            .map(|y| {
                let (y0, y1) = (y / n, y % n);
                let mut acc = 0.0;
                for x0 in 0..n {
                    for x1 in 0..n {
                        acc += v[x0 * n + x1] * v[y0 * n + x1] * v[x0 * n + y1] * v[y0 * n + y1];
                    }
                }
                acc / (n * n) as f64
            })
            .collect();
        let y = (0..n * n).fold(0, |b, y| if inner[y].abs() > inner[b].abs() { y } else { b });
        let (y0, y1) = (y / n, y % n);
        let h0: Vec<f64> = (0..n).map(|x1| v[y0 * n + x1] * v[y0 * n + y1]).collect();
        let h1: Vec<f64> = (0..n).map(|x0| v[x0 * n + y1]).collect();
        let sets = |h: &[f64]| -> Vec<Vec<bool>> {
            let mut out = Vec::new();
            for &t in h {
                out.push(h.iter().map(|&x| x >= t).collect());
                out.push(h.iter().map(|&x| x <= t).collect());
            }
            out
        };
        let mut best = 0.0f64;
        for s0 in sets(&h0) {
            for s1 in sets(&h1) {
                let c = correlation(g, 2, &[s0.clone(), s1]).unwrap();
                best = best.max(c.abs());
            }
        }
        (y, best)
    }

    #[test]
    fn exhaustive_level_sets_at_q3() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut tested = 0;
        for _ in 0..40 {
            let g = FieldFunction::from_fn(3, 4, |_| rng.gen_range(-1.0..1.0));
            let norm = box_norm(&g, 2).unwrap();
            if norm < 0.3 {
                continue;
            }
            tested += 1;
            let w = witness_search(&g, 2, 0.3).unwrap().expect("witness");
            assert!(w.correlation.abs() >= 0.002025);
            let (y, oracle) = level_set_optimum(&g);
            assert!(oracle >= 0.002025);
            if w.coslice == y {
                assert!(w.correlation.abs() >= oracle - 1e-12);
            }
        }
        assert!(tested >= 5);
    }

    #[test]
    fn three_blocks() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let g = FieldFunction::from_fn(3, 6, |x| if x[0] == 0 && x[2] < 2 { 1.0 } else { rng.gen_range(-0.2..0.2) });
        let eps = box_norm(&g, 3).unwrap();
        let w = witness_search(&g, 3, eps).unwrap().unwrap();
        assert!(w.correlation.abs() >= witness_threshold(3, eps));
        assert!((correlation(&g, 3, &w.sets).unwrap() - w.correlation).abs() < 1e-12);
    }
}
