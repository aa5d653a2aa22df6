use num_bigint::BigUint;
use num_integer::Integer;

use super::cube::{GridCube, LatticeSet};
use crate::error::{Error, Result};

/// `lcm{1..6}`, the default stand-in for `q_eps` in experiments.
pub const SURROGATE_MODULUS: u64 = 60;

/// `lcm{1, ..., n}`.
pub fn lcm_range(n: u64) -> BigUint {
    (1..=n).fold(BigUint::from(1u32), |acc, k| acc.lcm(&BigUint::from(k)))
}

/// `q_eps = lcm{1 <= q <= C eps^{-10}}`; ranges beyond `cap` are refused.
pub fn q_epsilon(eps: f64, c: f64, cap: u64) -> Result<BigUint> {
    if !(eps > 0.0 && eps <= 1.0) || !(c > 0.0) {
        return Err(Error::InvalidParameter(format!("need 0 < eps <= 1 and C > 0, got eps={eps} C={c}")));
    }
    let range = (c * eps.powi(-10)).floor();
    if range > cap as f64 {
        return Err(Error::CapExceeded(format!("desk-scale cap: range 1..{range} exceeds {cap}")));
    }
    Ok(lcm_range(range as u64))
}

#[derive(Debug, Clone, PartialEq)]
pub struct UniformityReport {
    pub overall: f64,
    pub max_relative: f64,
    /// Lexicographically first residue class attaining `max_relative`.
    pub worst_residue: Vec<i64>,
    pub is_uniform: bool,
    pub modulus: u64,
    pub window: GridCube,
}

/// Density of `S` on each class `s + (qZ)^n` inside the window, compared with
/// `(1 + eps^2)` times the overall density.
pub fn uniformity_test(s: &LatticeSet, eps: f64, modulus: u64) -> Result<UniformityReport> {
    let window = s.window();
    if modulus == 0 || !window.side().is_multiple_of(modulus) {
        return Err(Error::InvalidParameter(format!(
            "window side {} is not divisible by {modulus}",
            window.side()
        )));
    }
    let n = window.n();
    let q = modulus as usize;
    let classes = q.pow(n as u32);
    let mut hits = vec![0u64; classes];
    let mut sizes = vec![0u64; classes];
    for (i, &b) in s.members().iter().enumerate() {
        let p = window.point_of(i);
        let class = p.iter().fold(0usize, |acc, &x| acc * q + x.rem_euclid(modulus as i64) as usize);
        sizes[class] += 1;
        if b {
            hits[class] += 1;
        }
    }
    let overall = s.density();
    let mut worst = 0usize;
    let mut max_relative = f64::NEG_INFINITY;
    for c in 0..classes {
        let rel = hits[c] as f64 / sizes[c] as f64;
        if rel > max_relative {
            max_relative = rel;
            worst = c;
        }
    }
    let mut worst_residue = vec![0i64; n];
    let mut c = worst;
    for i in (0..n).rev() {
        worst_residue[i] = (c % q) as i64;
        c /= q;
    }
    Ok(UniformityReport {
        overall,
        max_relative,
        worst_residue,
        is_uniform: max_relative <= (1.0 + eps * eps) * overall,
        modulus,
        window: window.clone(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IncrementStatus {
    Uniform,
    /// The window side is no longer a multiple of the modulus.
    WindowExhausted,
    /// The step bound was reached without uniformity.
    StepBound,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IncrementStep {
    pub residue: Vec<i64>,
    pub density_before: f64,
    pub density_after: f64,
    pub window_after: GridCube,
}

#[derive(Debug, Clone)]
pub struct IncrementResult {
    pub final_set: LatticeSet,
    pub steps: usize,
    pub history: Vec<IncrementStep>,
    pub status: IncrementStatus,
    /// `ceil(log(1/delta_0) / log(1 + eps^2))`.
    pub step_bound: usize,
}

/// `S' = {y : q y + s ∈ S}` on the window of such `y`.
pub fn restrict_and_rescale(s: &LatticeSet, residue: &[i64], modulus: u64) -> Result<LatticeSet> {
    let window = s.window();
    if !window.side().is_multiple_of(modulus) || residue.len() != window.n() {
        return Err(Error::InvalidParameter("residue or modulus does not fit the window".into()));
    }
    let q = modulus as i64;
    let corner: Vec<i64> = window.corner().iter().zip(residue).map(|(&c, &r)| Integer::div_ceil(&(c - r), &q)).collect();
    let new_window = GridCube::new(corner, window.side() / modulus)?;
    Ok(LatticeSet::from_fn(new_window, |y| {
        let x: Vec<i64> = y.iter().zip(residue).map(|(&v, &r)| q * v + r).collect();
        s.contains(&x)
    }))
}

/// Pass to the worst residue class and rescale until `S` is uniform or the
/// window no longer divides by the modulus.
pub fn density_increment(s: &LatticeSet, eps: f64, modulus: u64) -> Result<IncrementResult> {
    if s.count() == 0 {
        return Err(Error::InvalidParameter("density increment needs a nonempty set".into()));
    }
    if !(eps > 0.0) {
        return Err(Error::InvalidParameter(format!("eps must be positive, got {eps}")));
    }
    let delta0 = s.density();
    let step_bound = ((1.0 / delta0).ln() / (1.0 + eps * eps).ln()).ceil() as usize;
    let mut current = s.clone();
    let mut history = Vec::new();
    loop {
        if current.count() == current.window().volume() {
            return Ok(finish(current, history, IncrementStatus::Uniform, step_bound));
        }
        if !current.window().side().is_multiple_of(modulus) || current.window().side() < modulus {
            return Ok(finish(current, history, IncrementStatus::WindowExhausted, step_bound));
        }
        let report = uniformity_test(&current, eps, modulus)?;
        if report.is_uniform {
            return Ok(finish(current, history, IncrementStatus::Uniform, step_bound));
        }
        if history.len() >= step_bound {
            return Ok(finish(current, history, IncrementStatus::StepBound, step_bound));
        }
        let next = restrict_and_rescale(&current, &report.worst_residue, modulus)?;
        history.push(IncrementStep {
            residue: report.worst_residue.clone(),
            density_before: report.overall,
            density_after: next.density(),
            window_after: next.window().clone(),
        });
        current = next;
    }
}

fn finish(set: LatticeSet, history: Vec<IncrementStep>, status: IncrementStatus, step_bound: usize) -> IncrementResult {
    IncrementResult { steps: history.len(), final_set: set, history, status, step_bound }
}
