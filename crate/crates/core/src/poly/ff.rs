//! Prime fields and their small extensions.

use std::fmt::Debug;
use std::hash::Hash;

use num_bigint::BigUint;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[inline]
pub fn mulmod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

#[inline]
pub fn addmod(a: u64, b: u64, p: u64) -> u64 {
    let s = a as u128 + b as u128;
    (s % p as u128) as u64
}

#[inline]
pub fn submod(a: u64, b: u64, p: u64) -> u64 {
    if a >= b {
        a - b
    } else {
        p - (b - a)
    }
}

pub fn powmod(mut a: u64, mut e: u128, p: u64) -> u64 {
    let mut acc = 1 % p;
    a %= p;
    while e > 0 {
        if e & 1 == 1 {
            acc = mulmod(acc, a, p);
        }
        a = mulmod(a, a, p);
        e >>= 1;
    }
    acc
}

pub fn invmod(a: u64, p: u64) -> u64 {
    assert!(a % p != 0, "inverse of zero mod {p}");
    powmod(a, (p - 2) as u128, p)
}

/// Finite field interface used by the generic polynomial routines.
pub trait FiniteField: Clone + Debug {
    type Elem: Clone + PartialEq + Eq + Hash + Ord + Debug;

    fn characteristic(&self) -> u64;
    fn ext_degree(&self) -> usize;
    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    /// Image of an integer residue in the prime subfield.
    fn from_u64(&self, v: u64) -> Self::Elem;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn is_zero(&self, a: &Self::Elem) -> bool;
    fn random<R: Rng>(&self, rng: &mut R) -> Self::Elem;

    /// Field order `q = p^k`.
    fn order(&self) -> BigUint {
        BigUint::from(self.characteristic()).pow(self.ext_degree() as u32)
    }

    fn neg(&self, a: &Self::Elem) -> Self::Elem {
        self.sub(&self.zero(), a)
    }

    fn pow(&self, a: &Self::Elem, e: &BigUint) -> Self::Elem {
        let mut acc = self.one();
        for i in (0..e.bits()).rev() {
            acc = self.mul(&acc, &acc);
            if e.bit(i) {
                acc = self.mul(&acc, a);
            }
        }
        acc
    }

    fn inv(&self, a: &Self::Elem) -> Self::Elem {
        assert!(!self.is_zero(a), "inverse of zero");
        let e = self.order() - BigUint::from(2u32);
        self.pow(a, &e)
    }

    /// Unique `p`-th root (Frobenius is bijective on a finite field).
    fn pth_root(&self, a: &Self::Elem) -> Self::Elem {
        let e = BigUint::from(self.characteristic()).pow(self.ext_degree() as u32 - 1);
        self.pow(a, &e)
    }
}

/// `F_p` for a prime `p < 2^63`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PrimeField {
    p: u64,
}

impl PrimeField {
    pub fn new(p: u64) -> Self {
        assert!(p >= 2 && p < (1 << 63));
        PrimeField { p }
    }

    pub fn p(&self) -> u64 {
        self.p
    }
}

impl FiniteField for PrimeField {
    type Elem = u64;

    fn characteristic(&self) -> u64 {
        self.p
    }
    fn ext_degree(&self) -> usize {
        1
    }
    fn zero(&self) -> u64 {
        0
    }
    fn one(&self) -> u64 {
        1
    }
    fn from_u64(&self, v: u64) -> u64 {
        v % self.p
    }
    fn add(&self, a: &u64, b: &u64) -> u64 {
        addmod(*a, *b, self.p)
    }
    fn sub(&self, a: &u64, b: &u64) -> u64 {
        submod(*a, *b, self.p)
    }
    fn mul(&self, a: &u64, b: &u64) -> u64 {
        mulmod(*a, *b, self.p)
    }
    fn is_zero(&self, a: &u64) -> bool {
        *a == 0
    }
    fn random<R: Rng>(&self, rng: &mut R) -> u64 {
        rng.random_range(0..self.p)
    }
    fn inv(&self, a: &u64) -> u64 {
        invmod(*a, self.p)
    }
    fn pth_root(&self, a: &u64) -> u64 {
        *a
    }
}

/// `F_{p^k}` as `F_p[t] / (m(t))` with `m` the lexicographically smallest
/// monic irreducible of degree `k`.
///
/// Candidates `t^k + c_{k-1} t^{k-1} + ... + c_0` are enumerated in
/// increasing order of the integer `sum c_i p^i`, so the modulus (and hence
/// every serialized element) is the same across runs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExtField {
    p: u64,
    k: usize,
    /// Monic modulus, ascending, length `k + 1`.
    modulus: Vec<u64>,
}

impl ExtField {
    pub fn new(p: u64, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidInput("extension degree must be at least 1".into()));
        }
        if !crate::arith::is_prime_u64(p) {
            return Err(Error::InvalidInput(format!("{p} is not prime")));
        }
        if (p as f64).powi(k as i32) > 1e30 {
            return Err(Error::BudgetExceeded(format!("field F_{{{p}^{k}}} too large")));
        }
        let modulus = smallest_irreducible(p, k);
        Ok(ExtField { p, k, modulus })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn modulus(&self) -> &[u64] {
        &self.modulus
    }

    /// Embedding of the prime field element `v`.
    pub fn embed(&self, v: u64) -> Vec<u64> {
        let mut e = vec![0; self.k];
        e[0] = v % self.p;
        e
    }

    /// Returns `Some(c)` if the element lies in the prime field.
    pub fn as_prime(&self, a: &[u64]) -> Option<u64> {
        if a[1..].iter().all(|&c| c == 0) {
            Some(a[0])
        } else {
            None
        }
    }
}

impl FiniteField for ExtField {
    type Elem = Vec<u64>;

    fn characteristic(&self) -> u64 {
        self.p
    }
    fn ext_degree(&self) -> usize {
        self.k
    }
    fn zero(&self) -> Vec<u64> {
        vec![0; self.k]
    }
    fn one(&self) -> Vec<u64> {
        self.embed(1)
    }
    fn from_u64(&self, v: u64) -> Vec<u64> {
        self.embed(v)
    }
    fn add(&self, a: &Vec<u64>, b: &Vec<u64>) -> Vec<u64> {
        a.iter().zip(b).map(|(&x, &y)| addmod(x, y, self.p)).collect()
    }
    fn sub(&self, a: &Vec<u64>, b: &Vec<u64>) -> Vec<u64> {
        a.iter().zip(b).map(|(&x, &y)| submod(x, y, self.p)).collect()
    }
    fn mul(&self, a: &Vec<u64>, b: &Vec<u64>) -> Vec<u64> {
        let p = self.p;
        let k = self.k;
        let mut prod = vec![0u64; 2 * k - 1];
        for (i, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.iter().enumerate() {
                prod[i + j] = addmod(prod[i + j], mulmod(x, y, p), p);
            }
        }
        for top in (k..prod.len()).rev() {
            let c = prod[top];
            if c == 0 {
                continue;
            }
            for (j, &m) in self.modulus[..k].iter().enumerate() {
                let idx = top - k + j;
                prod[idx] = submod(prod[idx], mulmod(c, m, p), p);
            }
        }
        prod.truncate(k);
        prod
    }
    fn is_zero(&self, a: &Vec<u64>) -> bool {
        a.iter().all(|&c| c == 0)
    }
    fn random<R: Rng>(&self, rng: &mut R) -> Vec<u64> {
        (0..self.k).map(|_| rng.random_range(0..self.p)).collect()
    }
}

/// Element of `F_{p^k}` in the canonical basis `1, t, ..., t^(k-1)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FpkElem {
    pub p: u64,
    pub k: usize,
    pub repr: Vec<u64>,
}

impl FpkElem {
    pub fn is_prime_field(&self) -> bool {
        self.repr[1..].iter().all(|&c| c == 0)
    }
}

fn smallest_irreducible(p: u64, k: usize) -> Vec<u64> {
    let field = PrimeField::new(p);
    let mut digits = vec![0u64; k];
    loop {
        let mut cand = digits.clone();
        cand.push(1);
        if super::fpoly::is_irreducible(&field, &cand) {
            return cand;
        }
        // increment the base-p counter
        let mut i = 0;
        loop {
            digits[i] += 1;
            if digits[i] < p {
                break;
            }
            digits[i] = 0;
            i += 1;
            assert!(i < k, "no irreducible polynomial found");
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moduli_are_canonical() {
        assert_eq!(ExtField::new(3, 2).unwrap().modulus(), &[1, 0, 1]);
        assert_eq!(ExtField::new(2, 2).unwrap().modulus(), &[1, 1, 1]);
        assert_eq!(ExtField::new(5, 1).unwrap().modulus(), &[0, 1]);
        assert_eq!(ExtField::new(2, 3).unwrap().modulus(), &[1, 1, 0, 1]);
    }

    #[test]
    fn extension_field_axioms_spot_check() {
        let f = ExtField::new(7, 3).unwrap();
        let a = vec![3, 5, 1];
        let b = vec![6, 0, 2];
        let ab = f.mul(&a, &b);
        assert_eq!(ab, f.mul(&b, &a));
        let ainv = f.inv(&a);
        assert_eq!(f.mul(&a, &ainv), f.one());
        // a^(q-1) = 1
        let q1 = f.order() - BigUint::from(1u32);
        assert_eq!(f.pow(&b, &q1), f.one());
        // Frobenius inverse
        let r = f.pth_root(&a);
        assert_eq!(f.pow(&r, &BigUint::from(7u32)), a);
    }
}
