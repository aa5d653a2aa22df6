//! Rectangle counting forms over `V = F_q^{2d} = V_1 x ... x V_d`, `V_j = F_q^2`.
//!
//! Points of a block `V_j` are indexed `p = x0 * q + x1`; a function on
//! `V_{e'}` (`|e'| = k`) is a table over `F_q^{2k}` whose index is
//! `sum_i p_i * (q^2)^{k-1-i}` with the blocks of `e'` in ascending order.
//! A configuration `x in V^2` assigns one block point to every slot `(j, l)`,
//! `l in {1, 2}`.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::ff::{dft, make_sphere, FieldFunction, PrimeField, SphereFunction};
use crate::hypergraph::{enumerate_bundle, BundleSpec, Edge};

/// Slack allowed on sign checks of box averages before they count as bugs.
pub const BOX_NEGATIVE_TOLERANCE: f64 = 1e-9;

/// Prescribed squared side lengths `t_1..t_d` over a prime field.
#[derive(Debug, Clone)]
pub struct ConfigurationSpace {
    field: PrimeField,
    spheres: Vec<SphereFunction>,
}

impl ConfigurationSpace {
    pub fn new(q: u64, ts: &[u64]) -> Result<Self> {
        let field = PrimeField::new(q)?;
        if ts.is_empty() {
            return Err(Error::InvalidParameter("need at least one side length".into()));
        }
        let spheres = ts.iter().map(|&t| make_sphere(q, t)).collect::<Result<Vec<_>>>()?;
        Ok(Self { field, spheres })
    }

    pub fn q(&self) -> usize {
        self.field.q()
    }

    pub fn d(&self) -> usize {
        self.spheres.len()
    }

    pub fn ts(&self) -> Vec<usize> {
        self.spheres.iter().map(|s| s.t()).collect()
    }

    pub fn sphere(&self, block: usize) -> &SphereFunction {
        &self.spheres[block - 1]
    }

    /// `prod_j E sigma_{t_j}`: the value of the form on constant-one families.
    pub fn sphere_mass(&self) -> f64 {
        self.spheres.iter().map(|s| s.mean()).product()
    }
}

/// Functions `f_e : V_{pi(e)} -> [-1, 1]` for every edge of a rectangle bundle.
#[derive(Debug, Clone)]
pub struct EdgeFunctionFamily {
    spec: BundleSpec,
    q: usize,
    edges: Vec<Edge>,
    functions: Vec<FieldFunction>,
}

impl EdgeFunctionFamily {
    /// `functions` follow the order of [`enumerate_bundle`].
    pub fn new(spec: BundleSpec, q: usize, functions: Vec<FieldFunction>) -> Result<Self> {
        if !spec.is_rectangle() {
            return Err(Error::InvalidBundle("counting forms need multiplicities (2,...,2)".into()));
        }
        let edges = enumerate_bundle(&spec);
        if edges.len() != functions.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} functions for {} edges",
                functions.len(),
                edges.len()
            )));
        }
        for (edge, f) in edges.iter().zip(&functions) {
            if f.q() != q || f.m() != 2 * edge.arity() {
                return Err(Error::DimensionMismatch(format!(
                    "edge {} needs a table over F_{q}^{}, got F_{}^{}",
                    edge.to_text(spec.d()),
                    2 * edge.arity(),
                    f.q(),
                    f.m()
                )));
            }
            f.check_bounded(1.0)?;
        }
        Ok(Self { spec, q, edges, functions })
    }

    pub fn from_fn(spec: BundleSpec, q: usize, mut f: impl FnMut(&Edge) -> FieldFunction) -> Result<Self> {
        let functions = enumerate_bundle(&spec).iter().map(&mut f).collect();
        Self::new(spec, q, functions)
    }

    /// The same function on every edge.
    pub fn uniform(spec: BundleSpec, f: FieldFunction) -> Result<Self> {
        let q = f.q();
        Self::from_fn(spec, q, |_| f.clone())
    }

    pub fn spec(&self) -> &BundleSpec {
        &self.spec
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn functions(&self) -> &[FieldFunction] {
        &self.functions
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Edge, &FieldFunction)> {
        self.edges.iter().zip(&self.functions)
    }

    fn check_space(&self, space: &ConfigurationSpace) -> Result<()> {
        if space.q() != self.q || space.d() != self.spec.d() {
            return Err(Error::DimensionMismatch(format!(
                "family over q={} d={} but space has q={} d={}",
                self.q,
                self.spec.d(),
                space.q(),
                space.d()
            )));
        }
        Ok(())
    }
}

/// Block-point arithmetic on `F_q^2`.
#[derive(Clone, Copy)]
struct BlockPoints {
    q: usize,
}

impl BlockPoints {
    #[inline]
    fn add(self, a: usize, b: usize) -> usize {
        let q = self.q;
        ((a / q + b / q) % q) * q + (a % q + b % q) % q
    }

    #[inline]
    fn sub(self, a: usize, b: usize) -> usize {
        let q = self.q;
        ((a / q + q - b / q) % q) * q + (a % q + q - b % q) % q
    }
}

#[inline]
fn slot(block: usize, label: usize) -> usize {
    2 * (block - 1) + (label - 1)
}

/// Reference semantics: the full average over all `(q^2)^{2d}` configurations.
fn direct_sum(fam: &EdgeFunctionFamily, space: Option<&ConfigurationSpace>) -> f64 {
    let d = fam.spec.d();
    let q = fam.q;
    let n = q * q;
    let slots = 2 * d;
    let bp = BlockPoints { q };
    let edge_slots: Vec<Vec<usize>> =
        fam.edges.iter().map(|e| e.entries().iter().map(|&(b, l)| slot(b, l)).collect()).collect();
    let partials: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|first| {
            let mut x = vec![0usize; slots];
            x[0] = first;
            let mut acc = 0.0;
            loop {
                let mut term = 1.0;
                if let Some(space) = space {
                    for j in 1..=d {
                        let diff = bp.sub(x[slot(j, 2)], x[slot(j, 1)]);
                        term *= space.sphere(j).table().get(diff);
                    }
                }
                if term != 0.0 {
                    for (f, ss) in fam.functions.iter().zip(&edge_slots) {
                        let idx = ss.iter().fold(0, |acc, &s| acc * n + x[s]);
                        term *= f.get(idx);
                    }
                    acc += term;
                }
                // odometer over slots 1..
                let mut pos = slots;
                loop {
                    pos -= 1;
                    if pos == 0 {
                        return acc;
                    }
                    x[pos] += 1;
                    if x[pos] < n {
                        break;
                    }
                    x[pos] = 0;
                }
            }
        })
        .collect();
    partials.iter().sum::<f64>() / (n as f64).powi(slots as i32)
}

/// `N_t(f_e)` by direct summation over `V^2`.
pub fn eval_n_direct(space: &ConfigurationSpace, fam: &EdgeFunctionFamily) -> Result<f64> {
    fam.check_space(space)?;
    Ok(direct_sum(fam, Some(space)))
}

/// `M(f_e)` by direct summation over `V^2`.
pub fn eval_m_direct(fam: &EdgeFunctionFamily) -> Result<f64> {
    Ok(direct_sum(fam, None))
}

/// Factorized evaluation. Blocks `2..d` are enumerated as slot pairs (only
/// pairs on the sphere for `N`); block 1 is summed as a sparse convolution
/// against `sigma_{t_1}` (for `N`) or as a product of two sums (for `M`).
fn factorized_sum(fam: &EdgeFunctionFamily, space: Option<&ConfigurationSpace>) -> f64 {
    let d = fam.spec.d();
    let q = fam.q;
    let n = q * q;
    let bp = BlockPoints { q };

    // Outer pairs (x_j1, x_j2) and their weights for blocks 2..d.
    let pair_lists: Vec<Vec<(usize, usize)>> = (2..=d)
        .map(|j| match space {
            Some(space) => {
                let sphere = space.sphere(j).support();
                (0..n).flat_map(|a| sphere.iter().map(move |&y| (a, bp.add(a, y)))).collect()
            }
            None => (0..n).flat_map(|a| (0..n).map(move |b| (a, b))).collect(),
        })
        .collect();
    let outer_weight: f64 = match space {
        Some(_) => (q as f64).powi(d as i32 - 1),
        None => 1.0,
    };

    // Edge bookkeeping: for edges through block 1 the block-1 digit is the
    // most significant one, so f_e(x, rest) = values[x * stride + rest].
    struct EdgeInfo<'a> {
        f: &'a FieldFunction,
        other_slots: Vec<usize>,
        stride: usize,
        label1: Option<usize>,
    }
    let infos: Vec<EdgeInfo> = fam
        .iter()
        .map(|(e, f)| {
            let label1 = e.label_of(1);
            let other: Vec<usize> = e
                .entries()
                .iter()
                .filter(|&&(b, _)| b != 1)
                .map(|&(b, l)| slot(b, l) - 2)
                .collect();
            let stride = n.pow(other.len() as u32);
            EdgeInfo { f, other_slots: other, stride, label1 }
        })
        .collect();

    let shifts: Option<Vec<Vec<usize>>> = space.map(|space| {
        space.sphere(1).support().iter().map(|&y| (0..n).map(|x| bp.add(x, y)).collect()).collect()
    });

    let inner = |rest: &[usize]| -> f64 {
        let mut c = 1.0;
        let mut a = vec![1.0; n];
        let mut b = vec![1.0; n];
        for info in &infos {
            let r = info.other_slots.iter().fold(0, |acc, &s| acc * n + rest[s]);
            match info.label1 {
                None => c *= info.f.get(r),
                Some(l) => {
                    let target = if l == 1 { &mut a } else { &mut b };
                    for (x, t) in target.iter_mut().enumerate() {
                        *t *= info.f.get(x * info.stride + r);
                    }
                }
            }
            if c == 0.0 {
                return 0.0;
            }
        }
        let s = match &shifts {
            Some(shifts) => {
                let mut acc = 0.0;
                for (x, &ax) in a.iter().enumerate() {
                    if ax != 0.0 {
                        acc += ax * shifts.iter().map(|sh| b[sh[x]]).sum::<f64>();
                    }
                }
                acc * q as f64
            }
            None => a.iter().sum::<f64>() * b.iter().sum::<f64>(),
        };
        c * s
    };

    let total = if d == 1 {
        inner(&[])
    } else {
        let partials: Vec<f64> = pair_lists[0]
            .par_iter()
            .map(|&(a0, b0)| {
                let mut rest = vec![0usize; 2 * (d - 1)];
                rest[0] = a0;
                rest[1] = b0;
                let mut idx = vec![0usize; d - 1];
                let mut acc = 0.0;
                loop {
                    for (k, list) in pair_lists.iter().enumerate().skip(1) {
                        let (a, b) = list[idx[k]];
                        rest[2 * k] = a;
                        rest[2 * k + 1] = b;
                    }
                    acc += inner(&rest);
                    let mut pos = d - 1;
                    loop {
                        pos -= 1;
                        if pos == 0 {
                            return acc;
                        }
                        idx[pos] += 1;
                        if idx[pos] < pair_lists[pos].len() {
                            break;
                        }
                        idx[pos] = 0;
                    }
                }
            })
            .collect();
        partials.iter().sum::<f64>()
    };
    total * outer_weight / (n as f64).powi(2 * d as i32)
}

/// `N_t(f_e) = E_{x in V^2} prod_e f_e(x_e) prod_j sigma_{t_j}(x_j2 - x_j1)`.
pub fn eval_n(space: &ConfigurationSpace, fam: &EdgeFunctionFamily) -> Result<f64> {
    fam.check_space(space)?;
    Ok(factorized_sum(fam, Some(space)))
}

/// `M(f_e) = E_{x in V^2} prod_e f_e(x_e)`.
pub fn eval_m(fam: &EdgeFunctionFamily) -> Result<f64> {
    Ok(factorized_sum(fam, None))
}

/// The `d = 1` count `E f_1(x_1) f_2(x_2) sigma_t(x_2 - x_1)` on the frequency
/// side: `sum_xi conj(f_1^(xi)) f_2^(xi) sigma_t^(xi)`.
pub fn fourier_count_d1(q: u64, t: u64, f1: &FieldFunction, f2: &FieldFunction) -> Result<f64> {
    let sphere = make_sphere(q, t)?;
    for f in [f1, f2] {
        if f.q() != sphere.q() || f.m() != 2 {
            return Err(Error::DimensionMismatch("fourier_count_d1 needs tables over F_q^2".into()));
        }
    }
    let (h1, h2, hs) = (dft(f1), dft(f2), dft(sphere.table()));
    let total: Complex64 = h1
        .values()
        .iter()
        .zip(h2.values())
        .zip(hs.values())
        .map(|((a, b), s)| a.conj() * b * s)
        .sum();
    Ok(total.re)
}

/// `N_t` for `d = 1` through the transform route.
pub fn eval_n_fourier_d1(space: &ConfigurationSpace, fam: &EdgeFunctionFamily) -> Result<f64> {
    fam.check_space(space)?;
    if space.d() != 1 {
        return Err(Error::DimensionMismatch("the transform route covers d = 1 only".into()));
    }
    let q = space.q() as u64;
    fourier_count_d1(q, space.ts()[0] as u64, &fam.functions[0], &fam.functions[1])
}

/// The box average `E_{x in V_{e'}^2} prod_{l in {1,2}^k} f(x_l)` of a table
/// over `k` blocks of `F_q^2`.
pub fn box_average(f: &FieldFunction, k: usize) -> Result<f64> {
    if k == 0 || f.m() != 2 * k {
        return Err(Error::DimensionMismatch(format!(
            "box norm over {k} blocks needs a table over F_q^{}, got F_q^{}",
            2 * k,
            f.m()
        )));
    }
    let n = f.q() * f.q();
    Ok(box_average_rec(f.values(), k, n))
}

/// Recursion on the last (least significant) block:
/// `avg_k(f) = E_{y, y'} avg_{k-1}(f(., y) f(., y'))`.
fn box_average_rec(values: &[f64], k: usize, n: usize) -> f64 {
    if k == 1 {
        let mean = values.iter().sum::<f64>() / n as f64;
        return mean * mean;
    }
    let rows = values.len() / n;
    let pair_sum = |y: usize| -> f64 {
        let mut prod = vec![0.0; rows];
        let mut acc = 0.0;
        for y2 in y..n {
            for (r, p) in prod.iter_mut().enumerate() {
                *p = values[r * n + y] * values[r * n + y2];
            }
            let w = if y2 == y { 1.0 } else { 2.0 };
            acc += w * box_average_rec(&prod, k - 1, n);
        }
        acc
    };
    let partials: Vec<f64> = if k == 2 {
        (0..n).into_par_iter().map(pair_sum).collect()
    } else {
        (0..n).map(pair_sum).collect()
    };
    partials.iter().sum::<f64>() / (n * n) as f64
}

/// `||f||_box`: the `2^k`-th root of the box average.
pub fn box_norm(f: &FieldFunction, k: usize) -> Result<f64> {
    let avg = box_average(f, k)?;
    if avg < -BOX_NEGATIVE_TOLERANCE {
        return Err(Error::NegativeBoxAverage(avg));
    }
    Ok(avg.max(0.0).powf(1.0 / (1u64 << k) as f64))
}

/// Outcome of the Gowers-Cauchy-Schwarz comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GcsCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// `|M(f_e)| <= min_e ||f_e||_box`.
pub fn gowers_cs_check(fam: &EdgeFunctionFamily) -> Result<GcsCheck> {
    let lhs = eval_m(fam)?.abs();
    let rhs = min_box_norm(fam)?;
    Ok(GcsCheck { lhs, rhs, holds: lhs <= rhs + 1e-9 })
}

pub fn min_box_norm(fam: &EdgeFunctionFamily) -> Result<f64> {
    let k = fam.spec.k();
    fam.functions.iter().try_fold(f64::INFINITY, |acc, f| Ok(acc.min(box_norm(f, k)?)))
}

/// Counting statistics of a set `S` in `F_q^{2d}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CountingGap {
    pub n: f64,
    pub m: f64,
    pub gap: f64,
    pub lower_bound: f64,
    pub box_min: f64,
}

/// `N_t(1_S)`, `M(1_S)`, `|N - M|` and `(|S| / q^{2d})^{2^d}` for `f_e = 1_S`
/// on every edge of `H_{d,d}^2`.
pub fn counting_gap(space: &ConfigurationSpace, members: &[bool]) -> Result<CountingGap> {
    let d = space.d();
    let q = space.q();
    let indicator = FieldFunction::indicator(q, 2 * d, members)?;
    let density = members.iter().filter(|&&b| b).count() as f64 / members.len() as f64;
    let fam = EdgeFunctionFamily::uniform(BundleSpec::rectangle(d, d)?, indicator)?;
    let n = eval_n(space, &fam)?;
    let m = eval_m(&fam)?;
    let box_min = min_box_norm(&fam)?;
    Ok(CountingGap { n, m, gap: (n - m).abs(), lower_bound: density.powi(1 << d), box_min })
}
