use rayon::prelude::*;

use super::simplex::{dot, SimplexSpec};
use crate::error::{Error, Result};

/// The points `m_2, ..., m_k` of one copy (with `m_1 = 0`).
pub type SimplexCopy = Vec<Vec<i64>>;

pub(crate) fn isqrt(v: i64) -> i64 {
    if v <= 0 {
        return 0;
    }
    let mut r = (v as f64).sqrt() as i64;
    while r * r > v {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= v {
        r += 1;
    }
    r
}

/// Smallest coordinate bound that cannot clip a copy: `ceil(lambda * max_i |v_i|)`.
pub fn minimal_bound(spec: &SimplexSpec, lambda2: u64) -> i64 {
    let v = lambda2 as i64 * spec.max_sq_norm();
    let r = isqrt(v);
    if r * r == v {
        r
    } else {
        r + 1
    }
}

fn check_bound(spec: &SimplexSpec, lambda2: u64, bound: i64) -> Result<()> {
    let needed = minimal_bound(spec, lambda2);
    if bound < needed {
        return Err(Error::BoundTooSmall { bound, needed });
    }
    Ok(())
}

fn check_params(lambda2: u64, q: u64) -> Result<()> {
    if lambda2 == 0 || q == 0 {
        return Err(Error::InvalidParameter("lambda^2 and q must be positive".into()));
    }
    Ok(())
}

/// `lambda^2 t_ij / q^2`, or `None` when some entry is not divisible: dot
/// products of vectors in `(qZ)^n` are multiples of `q^2`.
fn reduced_targets(spec: &SimplexSpec, lambda2: u64, q: u64) -> Option<Vec<Vec<i64>>> {
    let q2 = (q * q) as i64;
    let l2 = lambda2 as i64;
    spec.gram()
        .iter()
        .map(|row| row.iter().map(|&t| if (l2 * t) % q2 == 0 { Some(l2 * t / q2) } else { None }).collect())
        .collect()
}

/// Walks all `(u_2, ..., u_k)` in `Z^n` with `u_i . u_j = targets[i][j]`.
/// Each `u_i` is built coordinate by coordinate; the remaining norm and the
/// residual dot products with earlier points are pruned by Cauchy-Schwarz
/// against the tails of those points.
struct Walker<'a> {
    n: usize,
    targets: &'a [Vec<i64>],
}

impl Walker<'_> {
    fn walk(&self, chosen: &mut Vec<Vec<i64>>, visit: &mut dyn FnMut(&[Vec<i64>])) {
        let p = chosen.len();
        if p == self.targets.len() {
            visit(chosen);
            return;
        }
        let tails: Vec<Vec<i64>> = chosen
            .iter()
            .map(|u| {
                let mut t = vec![0; self.n + 1];
                for c in (0..self.n).rev() {
                    t[c] = t[c + 1] + u[c] * u[c];
                }
                t
            })
            .collect();
        let residual: Vec<i64> = (0..p).map(|i| self.targets[p][i]).collect();
        let mut current = vec![0i64; self.n];
        self.coordinate(0, self.targets[p][p], residual, &tails, &mut current, chosen, visit, None);
    }

    #[allow(clippy::too_many_arguments)]
    fn coordinate(
        &self,
        c: usize,
        remaining: i64,
        residual: Vec<i64>,
        tails: &[Vec<i64>],
        current: &mut Vec<i64>,
        chosen: &mut Vec<Vec<i64>>,
        visit: &mut dyn FnMut(&[Vec<i64>]),
        only: Option<i64>,
    ) {
        if c == self.n {
            if remaining == 0 && residual.iter().all(|&r| r == 0) {
                chosen.push(current.clone());
                self.walk(chosen, visit);
                chosen.pop();
            }
            return;
        }
        let r = isqrt(remaining);
        let range: Vec<i64> = match only {
            Some(x) => vec![x],
            None if c + 1 == self.n => {
                if r * r != remaining {
                    return;
                }
                if r == 0 { vec![0] } else { vec![-r, r] }
            }
            None => (-r..=r).collect(),
        };
        for x in range {
            let rem = remaining - x * x;
            let res: Vec<i64> = residual.iter().zip(chosen.iter()).map(|(&v, u)| v - x * u[c]).collect();
            let feasible = res
                .iter()
                .zip(tails)
                .all(|(&v, t)| (v as i128) * (v as i128) <= rem as i128 * t[c + 1] as i128);
            if !feasible {
                continue;
            }
            current[c] = x;
            self.coordinate(c + 1, rem, res, tails, current, chosen, visit, None);
        }
        current[c] = 0;
    }
}

fn walk_parallel<T: Send>(
    n: usize,
    targets: &[Vec<i64>],
    make: impl Fn() -> T + Sync,
    visit: impl Fn(&mut T, &[Vec<i64>]) + Sync,
) -> Vec<T> {
    let walker = Walker { n, targets };
    let r = isqrt(targets[0][0]);
    (-r..=r)
        .into_par_iter()
        .map(|x0| {
            let mut acc = make();
            let mut current = vec![0i64; n];
            let mut chosen = Vec::new();
            let mut f = |pts: &[Vec<i64>]| visit(&mut acc, pts);
            if n == 1 {
                if x0 * x0 == targets[0][0] {
                    current[0] = x0;
                    chosen.push(current.clone());
                    walker.walk(&mut chosen, &mut f);
                }
            } else {
                walker.coordinate(0, targets[0][0], vec![], &[], &mut current, &mut chosen, &mut f, Some(x0));
            }
            acc
        })
        .collect()
}

/// All copies `(m_2, ..., m_k)` of `lambda * Delta^0` with every `m_i` in
/// `(qZ)^n ∩ [-bound, bound]^n`, sorted lexicographically.
pub fn enumerate_copies(spec: &SimplexSpec, lambda2: u64, q: u64, bound: i64) -> Result<Vec<SimplexCopy>> {
    check_params(lambda2, q)?;
    check_bound(spec, lambda2, bound)?;
    let Some(targets) = reduced_targets(spec, lambda2, q) else {
        return Ok(Vec::new());
    };
    let q = q as i64;
    let parts = walk_parallel(spec.n(), &targets, Vec::new, |acc: &mut Vec<SimplexCopy>, pts| {
        acc.push(pts.iter().map(|u| u.iter().map(|&c| c * q).collect()).collect());
    });
    let mut out: Vec<SimplexCopy> = parts.into_iter().flatten().collect();
    out.retain(|copy| copy.iter().all(|m| m.iter().all(|c| c.abs() <= bound)));
    out.sort();
    Ok(out)
}

/// `sum S_{lambda Delta^0, q}` without materializing the copies.
pub fn count_copies(spec: &SimplexSpec, lambda2: u64, q: u64) -> Result<u64> {
    check_params(lambda2, q)?;
    let Some(targets) = reduced_targets(spec, lambda2, q) else {
        return Ok(0);
    };
    let parts = walk_parallel(spec.n(), &targets, || 0u64, |acc, _| *acc += 1);
    Ok(parts.iter().sum())
}

/// Brute force over the full box: every `m_i` ranges over all of
/// `(qZ)^n ∩ [-bound, bound]^n` and is kept when its constraints with the
/// earlier points hold.
pub fn enumerate_copies_naive(spec: &SimplexSpec, lambda2: u64, q: u64, bound: i64) -> Result<Vec<SimplexCopy>> {
    check_params(lambda2, q)?;
    check_bound(spec, lambda2, bound)?;
    let n = spec.n();
    let q = q as i64;
    let axis: Vec<i64> = (-bound..=bound).filter(|c| c.rem_euclid(q) == 0).collect();
    let mut box_points = vec![Vec::with_capacity(n)];
    for _ in 0..n {
        box_points = box_points
            .into_iter()
            .flat_map(|p| {
                axis.iter().map(move |&c| {
                    let mut p = p.clone();
                    p.push(c);
                    p
                })
            })
            .collect();
    }
    let l2 = lambda2 as i64;
    let gram = spec.gram();
    let mut out = Vec::new();
    fn rec(
        chosen: &mut Vec<Vec<i64>>,
        box_points: &[Vec<i64>],
        gram: &[Vec<i64>],
        l2: i64,
        out: &mut Vec<SimplexCopy>,
    ) {
        let p = chosen.len();
        if p == gram.len() {
            out.push(chosen.clone());
            return;
        }
        for m in box_points {
            if dot(m, m) != l2 * gram[p][p] {
                continue;
            }
            if (0..p).all(|i| dot(m, &chosen[i]) == l2 * gram[p][i]) {
                chosen.push(m.clone());
                rec(chosen, box_points, gram, l2, out);
                chosen.pop();
            }
        }
    }
    rec(&mut Vec::new(), &box_points, gram, l2, &mut out);
    out.sort();
    Ok(out)
}

/// `r_n(m)` for `0 <= m <= max`: representations as ordered sums of `n`
/// squares of integers (signs counted).
pub fn sum_of_squares_counts(n: usize, max: usize) -> Vec<u64> {
    let mut counts = vec![0u64; max + 1];
    counts[0] = 1;
    let squares: Vec<usize> = (0..).map(|x: usize| x * x).take_while(|&s| s <= max).collect();
    for _ in 0..n {
        let mut next = vec![0u64; max + 1];
        for (m, &c) in counts.iter().enumerate() {
            if c == 0 {
                continue;
            }
            for (x, &s) in squares.iter().enumerate() {
                if m + s > max {
                    break;
                }
                next[m + s] += if x == 0 { c } else { 2 * c };
            }
        }
        counts = next;
    }
    counts
}

/// One row of a count scan: the exact count and `raw / (lambda/q)^{(n-k)(k-1)}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanRow {
    pub lambda2: u64,
    pub raw: u64,
    pub normalized: f64,
}

/// `(n - k)(k - 1)` with `k` the number of points.
pub fn scaling_exponent(spec: &SimplexSpec) -> i32 {
    ((spec.n() as i64 - spec.k() as i64) * (spec.k() as i64 - 1)) as i32
}

pub fn normalize_count(spec: &SimplexSpec, q: u64, lambda2: u64, raw: u64) -> f64 {
    let scale = (lambda2 as f64).sqrt() / q as f64;
    raw as f64 / scale.powi(scaling_exponent(spec))
}

/// Exact counts over `lambda2s`. Segments use the `r_n` table; other
/// simplices use the constrained recursion.
pub fn count_asymptotic_scan(spec: &SimplexSpec, q: u64, lambda2s: &[u64]) -> Result<Vec<ScanRow>> {
    if spec.n() < 2 * spec.k() + 1 {
        log::warn!("n = {} < 2k + 1 = {}: the asymptotic regime does not apply", spec.n(), 2 * spec.k() + 1);
    }
    for &l in lambda2s {
        check_params(l, q)?;
    }
    let raws: Vec<u64> = if spec.k() == 2 {
        let t = spec.gram()[0][0] as u64;
        let q2 = q * q;
        let max = lambda2s.iter().map(|&l| l * t / q2).max().unwrap_or(0) as usize;
        let table = sum_of_squares_counts(spec.n(), max);
        lambda2s.iter().map(|&l| if (l * t).is_multiple_of(q2) { table[(l * t / q2) as usize] } else { 0 }).collect()
    } else {
        lambda2s.iter().map(|&l| count_copies(spec, l, q)).collect::<Result<_>>()?
    };
    Ok(lambda2s
        .iter()
        .zip(raws)
        .map(|(&lambda2, raw)| ScanRow { lambda2, raw, normalized: normalize_count(spec, q, lambda2, raw) })
        .collect())
}

/// Median of the normalized column (the empirical singular series), the
/// max/min ratio over nonzero rows and a least-squares decay exponent `tau`
/// fitted to `|normalized / rho - 1| ~ lambda^{-tau}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanSummary {
    pub rho_hat: f64,
    pub max_min_ratio: f64,
    pub tau: Option<f64>,
}

pub fn summarize_scan(rows: &[ScanRow]) -> Option<ScanSummary> {
    let mut values: Vec<f64> = rows.iter().filter(|r| r.raw > 0).map(|r| r.normalized).collect();
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    let mid = values.len() / 2;
    let rho_hat = if values.len() % 2 == 1 { values[mid] } else { 0.5 * (values[mid - 1] + values[mid]) };
    let max_min_ratio = values[values.len() - 1] / values[0];
    let points: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.raw > 0)
        .map(|r| (0.5 * (r.lambda2 as f64).ln(), (r.normalized / rho_hat - 1.0).abs()))
        .filter(|&(_, dev)| dev > 0.0)
        .map(|(x, dev)| (x, dev.ln()))
        .collect();
    let tau = if points.len() >= 2 {
        let len = points.len() as f64;
        let mx = points.iter().map(|p| p.0).sum::<f64>() / len;
        let my = points.iter().map(|p| p.1).sum::<f64>() / len;
        let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
        let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        (sxx > 0.0).then(|| -sxy / sxx)
    } else {
        None
    };
    Some(ScanSummary { rho_hat, max_min_ratio, tau })
}

/// `sigma_{lambda Delta^0, q}` normalized per `lambda`: uniform weight
/// `1 / count` on the copy set.
#[derive(Debug, Clone)]
pub struct SigmaTable {
    pub lambda2: u64,
    pub q: u64,
    pub copies: Vec<SimplexCopy>,
    pub raw_count: u64,
    /// `raw / (lambda/q)^{(n-k)(k-1)}`.
    pub normalized: f64,
    /// `|normalized / rho_hat - 1|` when an estimate of `rho` is supplied.
    pub deviation: Option<f64>,
}

impl SigmaTable {
    pub fn weight(&self) -> f64 {
        1.0 / self.raw_count as f64
    }

    /// The weights as the exact fraction `numerator / denominator` each.
    pub fn exact_weight(&self) -> (u64, u64) {
        (1, self.raw_count)
    }
}

pub fn sigma_normalized(spec: &SimplexSpec, q: u64, lambda2: u64, rho_hat: Option<f64>) -> Result<SigmaTable> {
    let copies = enumerate_copies(spec, lambda2, q, minimal_bound(spec, lambda2))?;
    if copies.is_empty() {
        return Err(Error::NoCopies(lambda2));
    }
    let raw_count = copies.len() as u64;
    let normalized = normalize_count(spec, q, lambda2, raw_count);
    Ok(SigmaTable {
        lambda2,
        q,
        copies,
        raw_count,
        normalized,
        deviation: rho_hat.map(|rho| (normalized / rho - 1.0).abs()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_segment(n: usize) -> SimplexSpec {
        let mut v = vec![0; n];
        v[0] = 1;
        SimplexSpec::segment(v).unwrap()
    }

    #[test]
    fn unit_vectors_in_z5() {
        let s = unit_segment(5);
        assert_eq!(enumerate_copies(&s, 1, 1, 1).unwrap().len(), 10);
        assert_eq!(enumerate_copies(&s, 1, 2, 1).unwrap().len(), 0);
        assert_eq!(count_copies(&s, 1, 1).unwrap(), 10);
        assert!(matches!(enumerate_copies(&s, 4, 1, 1), Err(Error::BoundTooSmall { needed: 2, .. })));
    }

    #[test]
    fn right_triangles_in_z9() {
        let s = SimplexSpec::orthonormal(9, 3).unwrap();
        assert_eq!(enumerate_copies(&s, 1, 1, 1).unwrap().len(), 18 * 16);
    }

    #[test]
    fn matches_naive_small() {
        let segment = unit_segment(4);
        let tri = SimplexSpec::orthonormal(4, 3).unwrap();
        let skew = SimplexSpec::new(3, vec![vec![0, 0, 0], vec![1, 1, 0], vec![0, 1, 1]]).unwrap();
        for spec in [&segment, &tri, &skew] {
            for lambda2 in 1..=6 {
                for q in [1, 2] {
                    let b = minimal_bound(spec, lambda2);
                    let fast = enumerate_copies(spec, lambda2, q, b).unwrap();
                    let naive = enumerate_copies_naive(spec, lambda2, q, b).unwrap();
                    assert_eq!(fast, naive, "lambda2={lambda2} q={q}");
                    assert_eq!(count_copies(spec, lambda2, q).unwrap(), fast.len() as u64);
                    assert!(fast.iter().all(|c| {
                        let mut pts = vec![vec![0; spec.n()]];
                        pts.extend(c.iter().cloned());
                        super::super::isometry_check(spec, &pts, lambda2)
                    }));
                }
            }
        }
    }

    #[test]
    fn sum_of_squares_table() {
        let r4 = sum_of_squares_counts(4, 30);
        // Jacobi: r_4(m) = 8 * sum of divisors not divisible by 4
        for m in 1..=30usize {
            let s: usize = (1..=m).filter(|d| m % d == 0 && d % 4 != 0).sum();
            assert_eq!(r4[m], 8 * s as u64);
        }
        let r5 = sum_of_squares_counts(5, 40);
        let s = unit_segment(5);
        for m in 1..=40 {
            assert_eq!(r5[m as usize], count_copies(&s, m, 1).unwrap());
        }
    }

    #[test]
    fn rescaling_bijection() {
        let s = unit_segment(5);
        for l in 1..=12u64 {
            assert_eq!(count_copies(&s, 4 * l, 2).unwrap(), count_copies(&s, l, 1).unwrap());
            assert_eq!(count_copies(&s, 9 * l, 3).unwrap(), count_copies(&s, l, 1).unwrap());
        }
    }

    #[test]
    fn scan_segments() {
        let s = unit_segment(5);
        let rows = count_asymptotic_scan(&s, 1, &[1, 2, 3, 4]).unwrap();
        assert_eq!(rows.iter().map(|r| r.raw).collect::<Vec<_>>(), vec![10, 40, 80, 90]);
        assert!((rows[3].normalized - 90.0 / 8.0).abs() < 1e-12);
        let summary = summarize_scan(&rows).unwrap();
        assert!(summary.max_min_ratio >= 1.0);
        let tri = SimplexSpec::orthonormal(5, 3).unwrap();
        let rows = count_asymptotic_scan(&tri, 1, &[1, 2]).unwrap();
        assert_eq!(rows[0].raw, 10 * 8);
    }

    #[test]
    fn sigma_weights() {
        let s = unit_segment(5);
        let t = sigma_normalized(&s, 1, 1, None).unwrap();
        assert_eq!(t.raw_count, 10);
        assert_eq!(t.weight(), 0.1);
        assert!((t.copies.iter().map(|_| t.weight()).sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(matches!(sigma_normalized(&s, 2, 1, None), Err(Error::NoCopies(1))));
        let t = sigma_normalized(&s, 1, 4, Some(90.0 / 8.0)).unwrap();
        assert_eq!(t.deviation, Some(0.0));
    }
}
