use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Serialize, Deserialize)]
struct SimplexFile {
    n: usize,
    points: Vec<Vec<i64>>,
}

/// A non-degenerate simplex `{v_1 = 0, v_2, ..., v_k}` in `Z^n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimplexSpec {
    n: usize,
    points: Vec<Vec<i64>>,
    /// `t_ij = v_i . v_j` for `2 <= i, j <= k`, stored 0-based from `v_2`.
    gram: Vec<Vec<i64>>,
}

impl SimplexSpec {
    /// `points` lists `v_1, ..., v_k` with `v_1 = 0`.
    pub fn new(n: usize, points: Vec<Vec<i64>>) -> Result<Self> {
        if n == 0 || points.len() < 2 {
            return Err(Error::InvalidParameter("a simplex needs n >= 1 and at least two points".into()));
        }
        if points.iter().any(|p| p.len() != n) {
            return Err(Error::DimensionMismatch(format!("all points must have {n} coordinates")));
        }
        if points[0].iter().any(|&c| c != 0) {
            return Err(Error::InvalidParameter("the first point must be the origin".into()));
        }
        let gram: Vec<Vec<i64>> = points[1..]
            .iter()
            .map(|a| points[1..].iter().map(|b| dot(a, b)).collect())
            .collect();
        if !is_positive_definite(&gram) {
            return Err(Error::DegenerateSimplex);
        }
        Ok(Self { n, points, gram })
    }

    /// The segment `{0, v}`.
    pub fn segment(v: Vec<i64>) -> Result<Self> {
        let n = v.len();
        Self::new(n, vec![vec![0; n], v])
    }

    /// `{0, e_1, ..., e_{k-1}}` in `Z^n`.
    pub fn orthonormal(n: usize, k: usize) -> Result<Self> {
        let mut points = vec![vec![0; n]];
        for i in 0..k.saturating_sub(1) {
            let mut e = vec![0; n];
            if i < n {
                e[i] = 1;
            }
            points.push(e);
        }
        Self::new(n, points)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: SimplexFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        Self::new(raw.n, raw.points)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&SimplexFile { n: self.n, points: self.points.clone() }).expect("plain data")
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of points, including the origin.
    pub fn k(&self) -> usize {
        self.points.len()
    }

    pub fn points(&self) -> &[Vec<i64>] {
        &self.points
    }

    pub fn gram(&self) -> &[Vec<i64>] {
        &self.gram
    }

    /// `max_i t_ii`.
    pub fn max_sq_norm(&self) -> i64 {
        (0..self.gram.len()).map(|i| self.gram[i][i]).max().unwrap_or(0)
    }
}

pub(crate) fn dot(a: &[i64], b: &[i64]) -> i64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Fraction-free elimination; all leading principal minors positive.
fn is_positive_definite(m: &[Vec<i64>]) -> bool {
    let k = m.len();
    let mut a: Vec<Vec<i128>> = m.iter().map(|r| r.iter().map(|&v| v as i128).collect()).collect();
    let mut prev: i128 = 1;
    for p in 0..k {
        if a[p][p] <= 0 {
            return false;
        }
        for i in p + 1..k {
            for j in p + 1..k {
                a[i][j] = (a[i][j] * a[p][p] - a[i][p] * a[p][j]) / prev;
            }
        }
        prev = a[p][p];
    }
    true
}

/// Whether `m_1, ..., m_k` is a copy of `lambda * Delta^0`:
/// `(m_i - m_1) . (m_j - m_1) = lambda^2 t_ij` for all `2 <= i, j <= k`.
pub fn isometry_check(spec: &SimplexSpec, candidate: &[Vec<i64>], lambda2: u64) -> bool {
    if candidate.len() != spec.k() || candidate.iter().any(|p| p.len() != spec.n()) {
        return false;
    }
    let rel: Vec<Vec<i128>> = candidate[1..]
        .iter()
        .map(|p| p.iter().zip(&candidate[0]).map(|(&a, &b)| a as i128 - b as i128).collect())
        .collect();
    let l2 = lambda2 as i128;
    for i in 0..rel.len() {
        for j in i..rel.len() {
            let d: i128 = rel[i].iter().zip(&rel[j]).map(|(a, b)| a * b).sum();
            if d != l2 * spec.gram[i][j] as i128 {
                return false;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle() -> SimplexSpec {
        SimplexSpec::new(3, vec![vec![0, 0, 0], vec![1, 2, 0], vec![0, 1, 3]]).unwrap()
    }

    #[test]
    fn gram_and_validation() {
        let s = triangle();
        assert_eq!(s.gram(), &[vec![5, 2], vec![2, 10]]);
        assert_eq!(s.k(), 3);
        assert!(matches!(
            SimplexSpec::new(2, vec![vec![0, 0], vec![1, 1], vec![2, 2]]),
            Err(Error::DegenerateSimplex)
        ));
        assert!(SimplexSpec::new(2, vec![vec![1, 0], vec![0, 1]]).is_err());
        assert!(SimplexSpec::new(2, vec![vec![0, 0], vec![0, 0]]).is_err());
        let json = s.to_json();
        assert_eq!(SimplexSpec::from_json(&json).unwrap(), s);
        assert!(SimplexSpec::from_json("{\"n\": 2}").is_err());
    }

    #[test]
    fn dilates_and_signed_permutations() {
        let s = triangle();
        let lambda = 3i64;
        let dilate: Vec<Vec<i64>> = s.points().iter().map(|p| p.iter().map(|c| c * lambda).collect()).collect();
        assert!(isometry_check(&s, &dilate, 9));
        assert!(!isometry_check(&s, &dilate, 8));
        // signed permutation (x, y, z) -> (-z, x, -y), plus a translation
        let moved: Vec<Vec<i64>> = dilate.iter().map(|p| vec![-p[2] + 7, p[0] - 1, -p[1] + 4]).collect();
        assert!(isometry_check(&s, &moved, 9));
    }

    #[test]
    fn segment_in_z5() {
        let s = SimplexSpec::segment(vec![1, 0, 0, 0, 0]).unwrap();
        assert!(isometry_check(&s, &[vec![0; 5], vec![1, 1, 0, 0, 0]], 2));
        assert!(!isometry_check(&s, &[vec![0; 5], vec![1, 1, 0, 0, 0]], 1));
    }
}
