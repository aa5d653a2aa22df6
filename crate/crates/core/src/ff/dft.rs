//! Discrete Fourier transform on `F_q^m`.
//!
//! Forward: `f^(xi) = q^{-m} sum_x f(x) e^{+2 pi i x.xi / q}` (mean on the
//! spatial side). Inverse: `f(x) = sum_xi f^(xi) e^{-2 pi i x.xi / q}`.

use num_complex::Complex64;

use super::function::{index_to_coords, ComplexFunction, FieldFunction};

/// The table of `e^{2 pi i k / q}`, `0 <= k < q`.
#[derive(Debug, Clone)]
pub struct Twiddles {
    roots: Vec<Complex64>,
}

impl Twiddles {
    pub fn new(q: usize) -> Self {
        let roots = (0..q)
            .map(|k| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / q as f64))
            .collect();
        Self { roots }
    }

    /// `e^{2 pi i k / q}` for `k` already reduced mod `q`.
    #[inline]
    pub fn get(&self, k: usize) -> Complex64 {
        self.roots[k]
    }
}

/// Reference transform: the full `O(q^{2m})` character sum.
pub fn dft_naive(f: &FieldFunction) -> ComplexFunction {
    let (q, m) = (f.q(), f.m());
    let tw = Twiddles::new(q);
    let n = f.len();
    let scale = 1.0 / n as f64;
    let mut out = ComplexFunction::zeros(q, m);
    let mut xi = vec![0; m];
    let mut x = vec![0; m];
    for (xi_idx, slot) in out.values_mut().iter_mut().enumerate() {
        index_to_coords(xi_idx, q, m, &mut xi);
        let mut acc = Complex64::new(0.0, 0.0);
        for (x_idx, &v) in f.values().iter().enumerate() {
            if v == 0.0 {
                continue;
            }
            index_to_coords(x_idx, q, m, &mut x);
            let dot = x.iter().zip(&xi).map(|(a, b)| a * b).sum::<usize>() % q;
            acc += tw.get(dot) * v;
        }
        *slot = acc * scale;
    }
    out
}

/// Applies the 1-D transform along every axis; `inverse` selects the sign.
fn axis_transform(data: &mut [Complex64], q: usize, m: usize, inverse: bool) {
    let tw = Twiddles::new(q);
    let mut line = vec![Complex64::new(0.0, 0.0); q];
    let mut out = vec![Complex64::new(0.0, 0.0); q];
    for axis in 0..m {
        let stride = q.pow((m - 1 - axis) as u32);
        let block = stride * q;
        for base in (0..data.len()).step_by(block) {
            for offset in 0..stride {
                let start = base + offset;
                for (k, slot) in line.iter_mut().enumerate() {
                    *slot = data[start + k * stride];
                }
                for (xi, o) in out.iter_mut().enumerate() {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for (x, v) in line.iter().enumerate() {
                        let k = (x * xi) % q;
                        let w = if inverse { tw.get((q - k) % q) } else { tw.get(k) };
                        acc += v * w;
                    }
                    *o = acc;
                }
                for (k, v) in out.iter().enumerate() {
                    data[start + k * stride] = *v;
                }
            }
        }
    }
}

/// Fast forward transform, `O(m q^{m+1})`, of a real table.
pub fn dft(f: &FieldFunction) -> ComplexFunction {
    dft_complex(&f.to_complex())
}

/// Fast forward transform of a complex table.
pub fn dft_complex(f: &ComplexFunction) -> ComplexFunction {
    let (q, m) = (f.q(), f.m());
    let mut out = f.clone();
    axis_transform(out.values_mut(), q, m, false);
    let scale = 1.0 / out.len() as f64;
    out.values_mut().iter_mut().for_each(|z| *z *= scale);
    out
}

/// Inverse transform: `f(x) = sum_xi f^(xi) e^{-2 pi i x.xi / q}`.
pub fn idft(fhat: &ComplexFunction) -> ComplexFunction {
    let mut out = fhat.clone();
    axis_transform(out.values_mut(), fhat.q(), fhat.m(), true);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(q: usize, m: usize, seed: u64) -> FieldFunction {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        FieldFunction::from_fn(q, m, |_| rng.gen_range(-1.0..1.0))
    }

    #[test]
    fn constant_one_transforms_to_delta() {
        let f = FieldFunction::constant(5, 2, 1.0);
        let fh = dft(&f);
        assert!((fh.get(0).re - 1.0).abs() < 1e-12);
        for z in &fh.values()[1..] {
            assert!(z.norm() < 1e-12);
        }
    }

    #[test]
    fn scaled_delta_transforms_to_one() {
        let mut f = FieldFunction::zeros(3, 2);
        f.values_mut()[0] = 9.0;
        for z in dft(&f).values() {
            assert!((z - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn fast_path_matches_naive() {
        for (q, m) in [(3, 1), (3, 2), (5, 2), (3, 3), (7, 2)] {
            let f = random(q, m, (q * 10 + m) as u64);
            let d = dft(&f).max_abs_diff(&dft_naive(&f));
            assert!(d < 1e-9, "q={q} m={m} diff={d}");
        }
    }

    #[test]
    fn parseval_and_round_trip() {
        for q in [3, 5, 7, 11] {
            for m in [1, 2, 4] {
                let f = random(q, m, (q * 31 + m) as u64);
                let fh = dft(&f);
                assert!((fh.sum_norm_sqr() - f.mean_square()).abs() < 1e-9, "parseval q={q} m={m}");
                let back = idft(&fh).into_real(1e-9).unwrap();
                let err = back.values().iter().zip(f.values()).fold(0.0f64, |a, (x, y)| a.max((x - y).abs()));
                assert!(err < 1e-9, "round trip q={q} m={m}");
            }
        }
    }

    #[test]
    fn first_coordinate_dominates_index() {
        // f = indicator of (1,0) in F_5^2: f^(xi) = e^{2 pi i xi_0 / 5} / 25.
        let mut f = FieldFunction::zeros(5, 2);
        f.values_mut()[5] = 1.0;
        let fh = dft(&f);
        let tw = Twiddles::new(5);
        assert!((fh.at(&[2, 3]) - tw.get(2) / 25.0).norm() < 1e-12);
    }
}
