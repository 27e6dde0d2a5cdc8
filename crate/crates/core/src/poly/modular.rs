//! Multimodular helpers: word-size primes, reduction, CRT, rational
//! reconstruction and a modular gcd for large inputs.

use std::sync::OnceLock;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::ff::PrimeField;
use super::fpoly;
use super::IntPoly;
use crate::arith::prev_prime;

/// Descending primes just below `2^62`.
pub fn big_primes(count: usize) -> &'static [u64] {
    static PRIMES: OnceLock<Vec<u64>> = OnceLock::new();
    let all = PRIMES.get_or_init(|| {
        let mut out = Vec::with_capacity(4096);
        let mut n = 1u64 << 62;
        while out.len() < 4096 {
            n = prev_prime(n).expect("primes below 2^62");
            out.push(n);
        }
        out
    });
    assert!(count <= all.len(), "prime table exhausted");
    &all[..count]
}

/// Iterator over the cached large primes.
pub fn big_prime_iter() -> impl Iterator<Item = u64> {
    (0..4096).map(|i| big_primes(4096)[i])
}

/// Reduction of an integer into `[0, p)`.
pub fn reduce_int(c: &BigInt, p: u64) -> u64 {
    let r = c.mod_floor(&BigInt::from(p));
    r.to_u64().expect("residue fits")
}

/// Coefficientwise reduction, trimmed.
pub fn reduce(a: &IntPoly, p: u64) -> Vec<u64> {
    let mut v: Vec<u64> = a.coeffs().iter().map(|c| reduce_int(c, p)).collect();
    while v.last() == Some(&0) {
        v.pop();
    }
    v
}

/// Symmetric representative of `x mod m` in `(-m/2, m/2]`.
pub fn symmetric(x: &BigInt, m: &BigInt) -> BigInt {
    let r = x.mod_floor(m);
    if &r + &r > *m {
        r - m
    } else {
        r
    }
}

/// Incremental Chinese remaindering of coefficient vectors.
#[derive(Clone, Debug)]
pub struct Crt {
    pub modulus: BigInt,
    pub residues: Vec<BigInt>,
}

impl Crt {
    pub fn new(p: u64, residues: &[u64]) -> Self {
        Crt {
            modulus: BigInt::from(p),
            residues: residues.iter().map(|&r| BigInt::from(r)).collect(),
        }
    }

    /// Adds residues modulo a new prime `p` coprime to the current modulus.
    pub fn push(&mut self, p: u64, residues: &[u64]) {
        assert_eq!(residues.len(), self.residues.len());
        let pb = BigInt::from(p);
        let m_mod_p = reduce_int(&self.modulus, p);
        let inv = BigInt::from(super::ff::invmod(m_mod_p, p));
        for (acc, &r) in self.residues.iter_mut().zip(residues) {
            let cur = reduce_int(acc, p);
            let diff = (BigInt::from(r) - BigInt::from(cur)).mod_floor(&pb);
            let k = (diff * &inv).mod_floor(&pb);
            *acc += &self.modulus * k;
        }
        self.modulus *= pb;
    }

    pub fn symmetric(&self) -> Vec<BigInt> {
        self.residues
            .iter()
            .map(|r| symmetric(r, &self.modulus))
            .collect()
    }
}

/// Rational `n/d` with `n ≡ a d (mod m)`, `|n|, d <= sqrt(m/2)`, if one
/// exists.
pub fn rational_reconstruct(a: &BigInt, m: &BigInt) -> Option<BigRational> {
    let bound = (m >> 1u32).sqrt();
    let (mut r0, mut r1) = (m.clone(), a.mod_floor(m));
    let (mut t0, mut t1) = (BigInt::zero(), BigInt::one());
    while r1 > bound {
        let (q, r2) = r0.div_rem(&r1);
        let t2 = &t0 - &q * &t1;
        r0 = r1;
        r1 = r2;
        t0 = t1;
        t1 = t2;
    }
    if t1.is_zero() || t1.abs() > bound {
        return None;
    }
    if !r1.gcd(&t1).is_one() {
        return None;
    }
    Some(BigRational::new(r1, t1))
}

/// Primitive gcd over `Z[x]` by reduction modulo large primes, with the
/// candidate verified by exact division.
pub fn modular_gcd(a: &IntPoly, b: &IntPoly) -> IntPoly {
    if a.is_zero() {
        return b.primitive_part();
    }
    if b.is_zero() {
        return a.primitive_part();
    }
    let a = a.primitive_part();
    let b = b.primitive_part();
    if a.deg() == 0 || b.deg() == 0 {
        return IntPoly::one();
    }
    let gamma = a.lc().gcd(&b.lc());
    let mut best_deg = usize::MAX;
    let mut crt: Option<Crt> = None;
    let mut previous: Option<IntPoly> = None;
    for p in big_prime_iter() {
        if reduce_int(&a.lc(), p) == 0 || reduce_int(&b.lc(), p) == 0 {
            continue;
        }
        let field = PrimeField::new(p);
        let g = fpoly::gcd(&field, &reduce(&a, p), &reduce(&b, p));
        let dg = g.len() - 1;
        if dg == 0 {
            return IntPoly::one();
        }
        if dg > best_deg {
            continue;
        }
        let gm = reduce_int(&gamma, p);
        let scaled: Vec<u64> = g.iter().map(|&c| super::ff::mulmod(c, gm, p)).collect();
        if dg < best_deg {
            best_deg = dg;
            crt = Some(Crt::new(p, &scaled));
            previous = None;
            continue;
        }
        let c = crt.as_mut().expect("crt initialized");
        c.push(p, &scaled);
        let cand = IntPoly::new(c.symmetric()).primitive_part();
        if previous.as_ref() == Some(&cand)
            && a.div_exact(&cand).is_some()
            && b.div_exact(&cand).is_some()
        {
            return cand;
        }
        previous = Some(cand);
    }
    panic!("modular gcd exhausted the prime table");
}

/// Gcd dispatcher: subresultant PRS for small inputs, modular otherwise.
pub fn gcd_z(a: &IntPoly, b: &IntPoly) -> IntPoly {
    let small = |p: &IntPoly| p.deg() <= 12 && p.coeffs().iter().all(|c| c.bits() <= 64);
    if small(a) && small(b) {
        super::subresultant_gcd(a, b)
    } else {
        modular_gcd(a, b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn crt_and_reconstruction() {
        let ps = big_primes(3);
        assert!(ps.iter().all(|&p| crate::arith::is_prime_u64(p) && p < (1 << 62)));
        let target = [BigInt::from(-123456789012345678i64) * BigInt::from(987654321u64), BigInt::from(7)];
        let res = |p: u64| -> Vec<u64> { target.iter().map(|t| reduce_int(t, p)).collect() };
        let mut c = Crt::new(ps[0], &res(ps[0]));
        c.push(ps[1], &res(ps[1]));
        assert_eq!(c.symmetric(), target.to_vec());
        let q = BigRational::new(BigInt::from(-22), BigInt::from(7));
        let m = BigInt::from(ps[0]) * BigInt::from(ps[1]);
        let a = (q.numer() * BigInt::from(crate::poly::ff::invmod(reduce_int(q.denom(), ps[0]), ps[0])))
            .mod_floor(&BigInt::from(ps[0]));
        // reconstruct from the single-prime image
        let r = rational_reconstruct(&a, &BigInt::from(ps[0])).unwrap();
        assert_eq!(r, q);
        assert!(rational_reconstruct(&BigInt::from(5), &m).is_some());
    }

    #[test]
    fn modular_gcd_matches_subresultant() {
        let c = IntPoly::from_i64s(&[3, -7, 0, 2]);
        let a = &c * &IntPoly::from_i64s(&[1, 1, 1, 1, 5, 9, 2, 6, 5, 3, 5, 8, 9, 7]);
        let b = &c * &IntPoly::from_i64s(&[-4, 0, 2, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 11]);
        assert_eq!(modular_gcd(&a, &b), super::super::subresultant_gcd(&a, &b));
        assert_eq!(modular_gcd(&a, &b), c);
    }
}
