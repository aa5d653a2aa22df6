use super::dft::dft;
use super::field::PrimeField;
use super::function::FieldFunction;
use crate::error::Result;

/// `sigma_t` on `F_q^2`: value `q` on the circle `x0^2 + x1^2 = t`, zero elsewhere.
#[derive(Debug, Clone)]
pub struct SphereFunction {
    field: PrimeField,
    t: usize,
    support: Vec<usize>,
    table: FieldFunction,
}

/// Builds `sigma_t`; rejects non-prime `q` and `t = 0 mod q`.
pub fn make_sphere(q: u64, t: u64) -> Result<SphereFunction> {
    let field = PrimeField::new(q)?;
    let t = field.nonzero(t)?;
    let qs = field.q();
    let mut support = Vec::new();
    let mut values = vec![0.0; qs * qs];
    for x0 in 0..qs {
        for x1 in 0..qs {
            if field.norm2(x0, x1) == t {
                let i = x0 * qs + x1;
                support.push(i);
                values[i] = qs as f64;
            }
        }
    }
    let table = FieldFunction::from_values(qs, 2, values)?;
    Ok(SphereFunction { field, t, support, table })
}

impl SphereFunction {
    pub fn q(&self) -> usize {
        self.field.q()
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    /// Row-major indices (`x0 * q + x1`) of the circle points, ascending.
    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn table(&self) -> &FieldFunction {
        &self.table
    }

    /// `E sigma_t = |circle| / q`.
    pub fn mean(&self) -> f64 {
        self.support.len() as f64 / self.q() as f64
    }
}

/// Normalized decay statistics of `sigma_t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphereDecay {
    /// `|E sigma_t - 1| * sqrt(q)`.
    pub mean_deviation: f64,
    /// `max_{xi != 0} |sigma_t^(xi)| * sqrt(q)`.
    pub max_decay_const: f64,
}

pub fn sphere_decay(q: u64, t: u64) -> Result<SphereDecay> {
    let sphere = make_sphere(q, t)?;
    let root_q = (sphere.q() as f64).sqrt();
    let fh = dft(sphere.table());
    let max = fh.values()[1..].iter().fold(0.0f64, |acc, z| acc.max(z.norm()));
    Ok(SphereDecay {
        mean_deviation: (sphere.mean() - 1.0).abs() * root_q,
        max_decay_const: max * root_q,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ff::dft::dft_naive;

    /// Brute-force circle over all of `F_q^2`.
    fn circle(q: usize, t: usize) -> Vec<(usize, usize)> {
        let mut pts = Vec::new();
        for a in 0..q {
            for b in 0..q {
                if (a * a + b * b) % q == t {
                    pts.push((a, b));
                }
            }
        }
        pts
    }

    #[test]
    fn q3_t1_support_and_mean() {
        let s = make_sphere(3, 1).unwrap();
        let pts: Vec<_> = s.support().iter().map(|i| (i / 3, i % 3)).collect();
        assert_eq!(pts, vec![(0, 1), (0, 2), (1, 0), (2, 0)]);
        assert_eq!(pts, circle(3, 1));
        for &i in s.support() {
            assert_eq!(s.table().get(i), 3.0);
        }
        assert!((s.table().mean() - 4.0 / 3.0).abs() < 1e-15);
        assert!((s.mean() - 4.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn q5_t2_has_four_points() {
        let s = make_sphere(5, 2).unwrap();
        assert_eq!(s.support().len(), 4);
        assert_eq!(circle(5, 2), vec![(1, 1), (1, 4), (4, 1), (4, 4)]);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(make_sphere(3, 3).is_err());
        assert!(make_sphere(9, 1).is_err());
    }

    #[test]
    fn q3_mean_deviation() {
        let d = sphere_decay(3, 1).unwrap();
        assert!((d.mean_deviation - 3f64.sqrt() / 3.0).abs() < 1e-12);
    }

    #[test]
    fn zero_frequency_is_the_mean() {
        for (q, t) in [(5u64, 1u64), (7, 3), (13, 5)] {
            let s = make_sphere(q, t).unwrap();
            let fh = dft_naive(s.table());
            assert!((fh.get(0).re - s.mean()).abs() < 1e-12);
        }
    }

    #[test]
    fn square_symmetries() {
        for (q, t) in [(7u64, 3u64), (11, 2), (13, 1)] {
            let s = make_sphere(q, t).unwrap();
            let q = q as usize;
            for a in 0..q {
                for b in 0..q {
                    let v = s.table().at(&[a, b]);
                    let (na, nb) = ((q - a) % q, (q - b) % q);
                    for (x, y) in [(b, a), (na, b), (a, nb), (nb, na), (nb, a), (b, na), (na, nb)] {
                        assert_eq!(s.table().at(&[x, y]), v);
                    }
                }
            }
        }
    }

    #[test]
    fn decay_envelope_small_primes() {
        for q in [3u64, 5, 7, 11, 13] {
            for t in 1..q {
                let d = sphere_decay(q, t).unwrap();
                assert!(d.max_decay_const <= 3.0 && d.mean_deviation <= 3.0);
            }
        }
    }
}
