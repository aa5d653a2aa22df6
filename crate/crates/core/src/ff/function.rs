use num_complex::Complex64;

use crate::error::{Error, Result};

fn table_len(q: usize, m: usize) -> usize {
    q.checked_pow(m as u32).expect("table size overflows usize")
}

/// Decomposes a row-major index into coordinates (coordinate 0 most significant).
pub(crate) fn index_to_coords(mut index: usize, q: usize, m: usize, out: &mut [usize]) {
    for c in out[..m].iter_mut().rev() {
        *c = index % q;
        index /= q;
    }
}

pub(crate) fn coords_to_index(coords: &[usize], q: usize) -> usize {
    coords.iter().fold(0, |acc, &c| acc * q + c)
}

/// A dense real-valued table over `F_q^m`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldFunction {
    q: usize,
    m: usize,
    values: Vec<f64>,
}

impl FieldFunction {
    pub fn zeros(q: usize, m: usize) -> Self {
        Self::constant(q, m, 0.0)
    }

    pub fn constant(q: usize, m: usize, c: f64) -> Self {
        Self { q, m, values: vec![c; table_len(q, m)] }
    }

    pub fn from_values(q: usize, m: usize, values: Vec<f64>) -> Result<Self> {
        if m == 0 {
            return Err(Error::DimensionMismatch("dimension m must be >= 1".into()));
        }
        let expected = table_len(q, m);
        if values.len() != expected {
            return Err(Error::DimensionMismatch(format!(
                "table has {} entries, expected q^m = {expected}",
                values.len()
            )));
        }
        Ok(Self { q, m, values })
    }

    /// Builds a table by evaluating `f` at every point's coordinates.
    pub fn from_fn(q: usize, m: usize, mut f: impl FnMut(&[usize]) -> f64) -> Self {
        let mut coords = vec![0; m];
        let values = (0..table_len(q, m))
            .map(|i| {
                index_to_coords(i, q, m, &mut coords);
                f(&coords)
            })
            .collect();
        Self { q, m, values }
    }

    /// The 0/1 indicator of a membership table.
    pub fn indicator(q: usize, m: usize, members: &[bool]) -> Result<Self> {
        Self::from_values(q, m, members.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect())
    }

    #[inline]
    pub fn q(&self) -> usize {
        self.q
    }

    #[inline]
    pub fn m(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.values.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    #[inline]
    pub fn get(&self, index: usize) -> f64 {
        self.values[index]
    }

    pub fn at(&self, coords: &[usize]) -> f64 {
        self.values[coords_to_index(coords, self.q)]
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn mean_square(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>() / self.values.len() as f64
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |acc: f64, v| acc.max(v.abs()))
    }

    /// Rejects tables with some `|value| > bound`.
    pub fn check_bounded(&self, bound: f64) -> Result<()> {
        let found = self.sup_norm();
        if found > bound {
            return Err(Error::Unbounded { bound, found });
        }
        Ok(())
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        self.q == other.q && self.m == other.m
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        if !self.same_shape(other) {
            return Err(Error::DimensionMismatch("tables differ in shape".into()));
        }
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect();
        Ok(Self { q: self.q, m: self.m, values })
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.values.iter().zip(&other.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self { q: self.q, m: self.m, values: self.values.iter().map(|&v| f(v)).collect() }
    }

    /// `x -> f(x - v)` for a shift `v` in `F_q^m`.
    pub fn translate(&self, shift: &[usize]) -> Self {
        let (q, m) = (self.q, self.m);
        let mut src = vec![0; m];
        Self::from_fn(q, m, |x| {
            for i in 0..m {
                src[i] = (x[i] + q - shift[i] % q) % q;
            }
            self.at(&src)
        })
    }

    pub fn to_complex(&self) -> ComplexFunction {
        ComplexFunction {
            q: self.q,
            m: self.m,
            values: self.values.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
        }
    }
}

/// A dense complex-valued table over `F_q^m`; the carrier of Fourier transforms.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexFunction {
    q: usize,
    m: usize,
    values: Vec<Complex64>,
}

impl ComplexFunction {
    pub fn zeros(q: usize, m: usize) -> Self {
        Self { q, m, values: vec![Complex64::new(0.0, 0.0); table_len(q, m)] }
    }

    pub fn from_values(q: usize, m: usize, values: Vec<Complex64>) -> Result<Self> {
        let expected = table_len(q, m);
        if m == 0 || values.len() != expected {
            return Err(Error::DimensionMismatch(format!(
                "table has {} entries, expected q^m = {expected}",
                values.len()
            )));
        }
        Ok(Self { q, m, values })
    }

    #[inline]
    pub fn q(&self) -> usize {
        self.q
    }

    #[inline]
    pub fn m(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.values.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    #[inline]
    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    #[inline]
    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    #[inline]
    pub fn get(&self, index: usize) -> Complex64 {
        self.values[index]
    }

    pub fn at(&self, coords: &[usize]) -> Complex64 {
        self.values[coords_to_index(coords, self.q)]
    }

    /// Sum of `|value|^2` over the table.
    pub fn sum_norm_sqr(&self) -> f64 {
        self.values.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.values.iter().zip(&other.values).fold(0.0, |acc: f64, (a, b)| acc.max((a - b).norm()))
    }

    /// Drops the imaginary part, failing if any exceeds `tol`.
    pub fn into_real(self, tol: f64) -> Result<FieldFunction> {
        let worst = self.values.iter().fold(0.0, |acc: f64, z| acc.max(z.im.abs()));
        if worst > tol {
            return Err(Error::InvalidParameter(format!(
                "imaginary part {worst} exceeds tolerance {tol}"
            )));
        }
        FieldFunction::from_values(self.q, self.m, self.values.iter().map(|z| z.re).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wrong_length_rejected() {
        assert!(FieldFunction::from_values(3, 2, vec![0.0; 8]).is_err());
        assert!(FieldFunction::from_values(3, 2, vec![0.0; 9]).is_ok());
    }

    #[test]
    fn coords_round_trip() {
        let mut c = [0; 3];
        for i in 0..125 {
            index_to_coords(i, 5, 3, &mut c);
            assert_eq!(coords_to_index(&c, 5), i);
        }
        index_to_coords(7, 5, 2, &mut c);
        assert_eq!(&c[..2], &[1, 2]);
    }

    #[test]
    fn translate_moves_support() {
        let mut v = vec![0.0; 9];
        v[0] = 1.0;
        let f = FieldFunction::from_values(3, 2, v).unwrap();
        let g = f.translate(&[1, 2]);
        assert_eq!(g.at(&[1, 2]), 1.0);
        assert_eq!(g.values().iter().sum::<f64>(), 1.0);
    }
}
