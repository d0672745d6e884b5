//! Prime field arithmetic and Gaussian elimination over GF(p).

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};

/// GF(p) for a prime `p < 2^32`, so products fit in a `u64`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PrimeField {
    p: u64,
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

impl PrimeField {
    pub fn new(p: u64) -> Result<Self> {
        if p >= 1 << 32 || !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        Ok(PrimeField { p })
    }

    pub fn modulus(&self) -> u64 {
        self.p
    }

    pub fn element(&self, value: u64) -> FieldElement {
        FieldElement {
            value: value % self.p,
            modulus: self.p,
        }
    }

    pub fn reduce(&self, x: i64) -> u64 {
        x.rem_euclid(self.p as i64) as u64
    }

    pub fn add(&self, a: u64, b: u64) -> u64 {
        (a + b) % self.p
    }

    pub fn sub(&self, a: u64, b: u64) -> u64 {
        (a + self.p - b) % self.p
    }

    pub fn mul(&self, a: u64, b: u64) -> u64 {
        (a * b) % self.p
    }

    pub fn neg(&self, a: u64) -> u64 {
        (self.p - a) % self.p
    }

    /// Multiplicative inverse by Fermat's little theorem. Panics on zero.
    pub fn inv(&self, a: u64) -> u64 {
        assert!(!a.is_multiple_of(self.p), "inverse of zero");
        self.pow(a, self.p - 2)
    }

    pub fn pow(&self, mut base: u64, mut exp: u64) -> u64 {
        let mut acc = 1 % self.p;
        base %= self.p;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            exp >>= 1;
        }
        acc
    }

    pub fn dot(&self, a: &[u64], b: &[u64]) -> u64 {
        a.iter()
            .zip(b)
            .fold(0, |acc, (&x, &y)| (acc + x * y) % self.p)
    }

    /// Solves `Σ λ_i · vectors[i] = target`.
    ///
    /// Returns the canonical solution: the augmented system is brought to reduced row
    /// echelon form with pivots chosen left to right, free variables are set to zero.
    pub fn solve_span(&self, vectors: &[Vec<u64>], target: &[u64]) -> Result<Option<Vec<u64>>> {
        let rows = target.len();
        let cols = vectors.len();
        for v in vectors {
            if v.len() != rows {
                return Err(Error::DimensionMismatch {
                    expected: rows,
                    found: v.len(),
                });
            }
        }
        // augmented matrix, one row per coordinate
        let mut m: Vec<Vec<u64>> = (0..rows)
            .map(|r| {
                let mut row: Vec<u64> = vectors.iter().map(|v| v[r] % self.p).collect();
                row.push(target[r] % self.p);
                row
            })
            .collect();
        let mut pivots = Vec::new();
        let mut rank = 0;
        for col in 0..cols {
            let Some(pr) = (rank..rows).find(|&r| m[r][col] != 0) else {
                continue;
            };
            m.swap(rank, pr);
            let inv = self.inv(m[rank][col]);
            for x in m[rank].iter_mut() {
                *x = self.mul(*x, inv);
            }
            for r in 0..rows {
                if r != rank && m[r][col] != 0 {
                    let f = m[r][col];
                    for c in 0..=cols {
                        let sub = self.mul(f, m[rank][c]);
                        m[r][c] = self.sub(m[r][c], sub);
                    }
                }
            }
            pivots.push(col);
            rank += 1;
            if rank == rows {
                break;
            }
        }
        if m[rank..].iter().any(|row| row[cols] != 0) {
            return Ok(None);
        }
        let mut coeffs = vec![0; cols];
        for (r, &col) in pivots.iter().enumerate() {
            coeffs[col] = m[r][cols];
        }
        Ok(Some(coeffs))
    }

    /// Rank of a list of vectors.
    pub fn rank(&self, vectors: &[Vec<u64>]) -> usize {
        let Some(len) = vectors.first().map(Vec::len) else {
            return 0;
        };
        let mut m: Vec<Vec<u64>> = vectors
            .iter()
            .map(|v| v.iter().map(|x| x % self.p).collect())
            .collect();
        let mut rank = 0;
        for col in 0..len {
            let Some(pr) = (rank..m.len()).find(|&r| m[r][col] != 0) else {
                continue;
            };
            m.swap(rank, pr);
            let inv = self.inv(m[rank][col]);
            for r in rank + 1..m.len() {
                let f = self.mul(m[r][col], inv);
                if f != 0 {
                    for c in col..len {
                        let sub = self.mul(f, m[rank][c]);
                        m[r][c] = self.sub(m[r][c], sub);
                    }
                }
            }
            rank += 1;
        }
        rank
    }
}

/// An element of GF(p), carrying its modulus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FieldElement {
    value: u64,
    modulus: u64,
}

impl FieldElement {
    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    fn same_field(&self, other: &Self) {
        assert_eq!(
            self.modulus, other.modulus,
            "mixing elements of different fields"
        );
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

impl Add for FieldElement {
    type Output = FieldElement;
    fn add(self, rhs: Self) -> Self {
        self.same_field(&rhs);
        FieldElement {
            value: (self.value + rhs.value) % self.modulus,
            modulus: self.modulus,
        }
    }
}

impl Sub for FieldElement {
    type Output = FieldElement;
    fn sub(self, rhs: Self) -> Self {
        self.same_field(&rhs);
        FieldElement {
            value: (self.value + self.modulus - rhs.value) % self.modulus,
            modulus: self.modulus,
        }
    }
}

impl Mul for FieldElement {
    type Output = FieldElement;
    fn mul(self, rhs: Self) -> Self {
        self.same_field(&rhs);
        FieldElement {
            value: (self.value * rhs.value) % self.modulus,
            modulus: self.modulus,
        }
    }
}

impl Neg for FieldElement {
    type Output = FieldElement;
    fn neg(self) -> Self {
        FieldElement {
            value: (self.modulus - self.value) % self.modulus,
            modulus: self.modulus,
        }
    }
}
