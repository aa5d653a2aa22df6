use super::cube::CubeTable;
use super::forms::{grid_cond_exp, u1_norm};
use crate::error::{Error, Result};

/// Ratio `c` in the admissibility condition `L_{j+1} <= c eps^2 L_j`.
pub const ADMISSIBLE_RATIO: f64 = 0.25;

/// Constant `C` in the level budget `ceil(C eps^{-2})`.
pub const KVN_LEVEL_CONSTANT: f64 = 4.0;

/// `ceil(C eps^{-2})`.
pub fn guaranteed_levels(eps: f64) -> usize {
    (KVN_LEVEL_CONSTANT / (eps * eps)).ceil() as usize
}

/// Scales `L_1 >= ... >= L_J` with moduli `q_j = q_0 q_1^j`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaleSequence {
    eps: f64,
    q0: u64,
    q1: u64,
    scales: Vec<u64>,
}

impl ScaleSequence {
    /// Checks `L_{j+1} | L_j`, `L_{j+1} <= eps^2 L_j / 4` and `q_j | L_j`.
    pub fn new(eps: f64, q0: u64, q1: u64, scales: Vec<u64>) -> Result<Self> {
        if !(eps > 0.0 && eps <= 1.0) {
            return Err(Error::InvalidScales(format!("eps must lie in (0, 1], got {eps}")));
        }
        if q0 == 0 || q1 == 0 || scales.is_empty() {
            return Err(Error::InvalidScales("need q_0, q_1 >= 1 and at least one scale".into()));
        }
        let seq = Self { eps, q0, q1, scales };
        for j in 1..=seq.scales.len() {
            let l = seq.scale(j);
            let q = seq.modulus(j)?;
            if l == 0 || !l.is_multiple_of(q) {
                return Err(Error::InvalidScales(format!("q_{j} = {q} does not divide L_{j} = {l}")));
            }
            if j < seq.scales.len() {
                let next = seq.scale(j + 1);
                if next == 0 || !l.is_multiple_of(next) {
                    return Err(Error::InvalidScales(format!("L_{} = {next} does not divide L_{j} = {l}", j + 1)));
                }
                if next as f64 > ADMISSIBLE_RATIO * eps * eps * l as f64 {
                    return Err(Error::InvalidScales(format!(
                        "L_{} = {next} exceeds eps^2 L_{j} / 4 = {}",
                        j + 1,
                        ADMISSIBLE_RATIO * eps * eps * l as f64
                    )));
                }
            }
        }
        Ok(seq)
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn levels(&self) -> usize {
        self.scales.len()
    }

    /// `L_j`, 1-based.
    pub fn scale(&self, j: usize) -> u64 {
        self.scales[j - 1]
    }

    /// `q_j = q_0 q_1^j`.
    pub fn modulus(&self, j: usize) -> Result<u64> {
        self.q1
            .checked_pow(j as u32)
            .and_then(|p| p.checked_mul(self.q0))
            .ok_or_else(|| Error::InvalidScales(format!("q_{j} overflows")))
    }
}

/// How to treat sequences shorter than `ceil(C eps^{-2})` levels.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LengthPolicy {
    /// Reject them.
    Strict,
    /// Search the available levels and fail only if none qualifies.
    Truncated,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KvnLevel {
    pub level: usize,
    pub q: u64,
    pub scale: u64,
    /// `||f - E(f | G_{q_j, L_j})||_{U^1_{q_{j+1}, L_{j+1}}}`.
    pub residual_norm: f64,
    /// `||E(f | G_{q_j, L_j})||_2^2`.
    pub energy: f64,
}

#[derive(Debug, Clone)]
pub struct KvnDecomposition {
    pub level: usize,
    pub cond_exp: CubeTable,
    pub residual_norm: f64,
    pub history: Vec<KvnLevel>,
}

/// The first level `j` with `||f - E(f | G_{q_j,L_j,Q})||_{U^1_{q_{j+1},L_{j+1}}(Q)} <= eps`.
pub fn kvn_grid_decompose(f: &CubeTable, scales: &ScaleSequence, policy: LengthPolicy) -> Result<KvnDecomposition> {
    let eps = scales.eps();
    let needed = guaranteed_levels(eps);
    if policy == LengthPolicy::Strict && scales.levels() < needed {
        return Err(Error::InvalidScales(format!(
            "{} levels given, {needed} required for eps = {eps}",
            scales.levels()
        )));
    }
    if scales.levels() < 2 {
        return Err(Error::InvalidScales("need at least two levels".into()));
    }
    if !f.cube().side().is_multiple_of(scales.scale(1)) {
        return Err(Error::InvalidScales(format!(
            "L_1 = {} does not divide the side {}",
            scales.scale(1),
            f.cube().side()
        )));
    }
    f.values()
        .iter()
        .try_for_each(|v| if v.abs() <= 1.0 { Ok(()) } else { Err(Error::Unbounded { bound: 1.0, found: v.abs() }) })?;

    let mut history = Vec::new();
    let last = scales.levels().min(needed.max(2));
    for j in 1..last {
        let (q, l) = (scales.modulus(j)?, scales.scale(j));
        let ce = grid_cond_exp(f, q, l)?;
        let residual = f.sub(&ce)?;
        let norm = u1_norm(&residual, scales.modulus(j + 1)?, scales.scale(j + 1))?;
        history.push(KvnLevel { level: j, q, scale: l, residual_norm: norm, energy: ce.mean_square() });
        log::debug!("level {j}: q={q} L={l} residual {norm:.6}");
        if norm <= eps {
            return Ok(KvnDecomposition { level: j, cond_exp: ce, residual_norm: norm, history });
        }
    }
    Err(Error::InvalidScales(format!("no level among the first {} met eps = {eps}", last - 1)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{GridCube, LatticeSet};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn two_scale_levels() -> ScaleSequence {
        ScaleSequence::new(0.2, 1, 2, vec![160_000, 1_600, 16]).unwrap()
    }

    #[test]
    fn validation() {
        assert!(ScaleSequence::new(0.2, 1, 2, vec![160_000, 1_600, 16]).is_ok());
        assert!(ScaleSequence::new(0.2, 1, 2, vec![160_000, 3_200]).is_err());
        assert!(ScaleSequence::new(0.2, 1, 2, vec![160_000, 1_500]).is_err());
        assert!(ScaleSequence::new(0.2, 1, 3, vec![90, 3]).is_err());
        assert!(ScaleSequence::new(0.0, 1, 2, vec![4]).is_err());
        assert_eq!(guaranteed_levels(0.2), 100);
        let f = CubeTable::constant(GridCube::origin(1, 320_000).unwrap(), 0.0);
        assert!(kvn_grid_decompose(&f, &two_scale_levels(), LengthPolicy::Strict).is_err());
    }

    #[test]
    fn measurable_function_stops_at_level_one() {
        let seq = ScaleSequence::new(0.5, 2, 1, vec![64, 4]).unwrap();
        let cube = GridCube::origin(2, 128).unwrap();
        let f = CubeTable::from_fn(cube, |p| if (p[0] / 64 + p[1] % 2) % 2 == 0 { 0.7 } else { -0.2 });
        let r = kvn_grid_decompose(&f, &seq, LengthPolicy::Truncated).unwrap();
        assert_eq!(r.level, 1);
        assert!(r.residual_norm < 1e-12);
    }

    #[test]
    fn noise_stops_at_level_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let seq = ScaleSequence::new(0.5, 1, 1, vec![64, 4]).unwrap();
        let cube = GridCube::origin(2, 128).unwrap();
        let f = CubeTable::new(cube.clone(), (0..cube.volume()).map(|_| if rng.gen_bool(0.5) { 1.0 } else { -1.0 }).collect()).unwrap();
        let r = kvn_grid_decompose(&f, &seq, LengthPolicy::Truncated).unwrap();
        assert_eq!(r.level, 1);
        // (L/q)^{-n/2} = 1/4 for the U^1_{1,4} window in the plane
        assert!(r.residual_norm < 0.5);
    }

    #[test]
    fn two_scale_needs_level_two() {
        let seq = two_scale_levels();
        let cube = GridCube::origin(1, 320_000).unwrap();
        let s = LatticeSet::from_fn(cube.clone(), |p| (p[0] / 1_600) % 2 == 0);
        let f = CubeTable::from_fn(cube, |p| if s.contains(p) { 1.0 } else { -1.0 });
        let r = kvn_grid_decompose(&f, &seq, LengthPolicy::Truncated).unwrap();
        assert_eq!(r.level, 2);
        assert!(r.history[0].residual_norm > 0.5);
        let check = u1_norm(&f.sub(&r.cond_exp).unwrap(), seq.modulus(3).unwrap(), seq.scale(3)).unwrap();
        assert!(check <= 0.2);
        assert!(r.history[1].energy - r.history[0].energy >= 0.2 * 0.2 / 4.0);
    }
}
