use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The ambient setting: the prime field F_p and the dimension n of the space
/// the linear maps act on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FieldSpec {
    p: u64,
    n: usize,
}

/// A vector in F_p^n, coordinates reduced mod p.
pub type FpVector = Vec<u64>;

const MAX_P: u64 = 1 << 31;

fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    if p % 2 == 0 {
        return p == 2;
    }
    let mut d = 3u64;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

impl FieldSpec {
    pub fn new(p: u64, n: usize) -> Result<Self> {
        if p >= MAX_P {
            return Err(Error::Domain(format!("p = {p} exceeds 2^31")));
        }
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        if n == 0 {
            return Err(Error::InvalidDimension("n must be >= 1".into()));
        }
        Ok(FieldSpec { p, n })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// p^n as a u64, if it fits.
    pub fn point_count(&self) -> Option<u64> {
        self.p.checked_pow(u32::try_from(self.n).ok()?)
    }

    /// p^n exactly.
    pub fn point_count_big(&self) -> BigUint {
        BigUint::from(self.p).pow(self.n as u32)
    }

    /// p^(n^2), the number of linear maps F_p^n -> F_p^n.
    pub fn matrix_count_big(&self) -> BigUint {
        BigUint::from(self.p).pow((self.n * self.n) as u32)
    }

    pub fn reduce(&self, x: i64) -> u64 {
        let p = self.p as i64;
        (x.rem_euclid(p)) as u64
    }

    pub fn neg(&self, a: u64) -> u64 {
        (self.p - a % self.p) % self.p
    }

    pub fn add(&self, a: u64, b: u64) -> u64 {
        (a + b) % self.p
    }

    pub fn sub(&self, a: u64, b: u64) -> u64 {
        (a + self.p - b % self.p) % self.p
    }

    pub fn mul(&self, a: u64, b: u64) -> u64 {
        (a % self.p) * (b % self.p) % self.p
    }

    /// Multiplicative inverse via Fermat's little theorem.
    pub fn inv(&self, a: u64) -> u64 {
        assert!(a % self.p != 0, "inverse of zero");
        self.pow(a, self.p - 2)
    }

    pub fn pow(&self, mut base: u64, mut exp: u64) -> u64 {
        base %= self.p;
        let mut acc = 1u64;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = acc * base % self.p;
            }
            base = base * base % self.p;
            exp >>= 1;
        }
        acc
    }

    pub fn zero_vector(&self) -> FpVector {
        vec![0; self.n]
    }

    pub fn unit_vector(&self, i: usize) -> FpVector {
        let mut v = vec![0; self.n];
        v[i] = 1;
        v
    }

    pub fn is_zero_vector(&self, v: &[u64]) -> bool {
        v.iter().all(|&c| c % self.p == 0)
    }

    pub fn validate_vector(&self, v: &[u64]) -> Result<()> {
        if v.len() != self.n {
            return Err(Error::DimensionMismatch(format!(
                "vector has {} coordinates, expected {}",
                v.len(),
                self.n
            )));
        }
        if v.iter().any(|&c| c >= self.p) {
            return Err(Error::Domain("vector coordinate not reduced mod p".into()));
        }
        Ok(())
    }

    pub fn add_vec(&self, a: &[u64], b: &[u64]) -> FpVector {
        a.iter().zip(b).map(|(&x, &y)| self.add(x, y)).collect()
    }

    pub fn sub_vec(&self, a: &[u64], b: &[u64]) -> FpVector {
        a.iter().zip(b).map(|(&x, &y)| self.sub(x, y)).collect()
    }

    pub fn scale_vec(&self, c: u64, a: &[u64]) -> FpVector {
        a.iter().map(|&x| self.mul(c, x)).collect()
    }

    /// Standard bilinear form x . y over F_p.
    pub fn dot(&self, a: &[u64], b: &[u64]) -> u64 {
        a.iter()
            .zip(b)
            .fold(0u64, |acc, (&x, &y)| (acc + x * y) % self.p)
    }

    /// Base-p decoding of an index into a vector (least significant digit first).
    pub fn index_to_vector(&self, mut idx: u64) -> FpVector {
        let mut v = vec![0; self.n];
        for c in v.iter_mut() {
            *c = idx % self.p;
            idx /= self.p;
        }
        v
    }

    pub fn vector_to_index(&self, v: &[u64]) -> u64 {
        v.iter().rev().fold(0u64, |acc, &c| acc * self.p + c)
    }

    /// All p^n vectors in index order. Panics if p^n does not fit in a u64.
    pub fn vectors(&self) -> impl Iterator<Item = FpVector> + '_ {
        let count = self.point_count().expect("p^n overflows u64");
        (0..count).map(move |i| self.index_to_vector(i))
    }
}
