use crate::error::{Error, Result};

/// Trial-division primality test.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n.is_multiple_of(2) {
        return n == 2;
    }
    let mut d = 3;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

/// The prime field `F_q`, `q >= 3`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PrimeField {
    q: usize,
}

impl PrimeField {
    pub fn new(q: u64) -> Result<Self> {
        if q < 3 || !is_prime(q) {
            return Err(Error::NotPrime(q));
        }
        Ok(Self { q: q as usize })
    }

    #[inline]
    pub fn q(&self) -> usize {
        self.q
    }

    /// Reduces `t` and rejects zero.
    pub fn nonzero(&self, t: u64) -> Result<usize> {
        let r = (t % self.q as u64) as usize;
        if r == 0 {
            return Err(Error::ZeroElement { value: t, q: self.q as u64 });
        }
        Ok(r)
    }

    #[inline]
    pub fn add(&self, a: usize, b: usize) -> usize {
        (a + b) % self.q
    }

    #[inline]
    pub fn sub(&self, a: usize, b: usize) -> usize {
        (a + self.q - b) % self.q
    }

    #[inline]
    pub fn mul(&self, a: usize, b: usize) -> usize {
        (a * b) % self.q
    }

    #[inline]
    pub fn neg(&self, a: usize) -> usize {
        (self.q - a) % self.q
    }

    /// `x0^2 + x1^2` in the field.
    #[inline]
    pub fn norm2(&self, x0: usize, x1: usize) -> usize {
        (x0 * x0 + x1 * x1) % self.q
    }

    pub fn nonzero_elements(&self) -> impl Iterator<Item = usize> {
        1..self.q
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn primes_accepted_and_composites_rejected() {
        for q in [3, 5, 7, 11, 13, 101] {
            assert!(PrimeField::new(q).is_ok());
        }
        for q in [0, 1, 2, 4, 9, 15, 91] {
            assert!(matches!(PrimeField::new(q), Err(Error::NotPrime(_))));
        }
    }

    #[test]
    fn zero_element_rejected() {
        let f = PrimeField::new(5).unwrap();
        assert!(f.nonzero(10).is_err());
        assert_eq!(f.nonzero(7).unwrap(), 2);
    }
}
