//! Integer number theory: primality, prime enumeration and factorization.

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::poly::ff::{mulmod, powmod};

/// Deterministic Miller–Rabin for 64-bit integers.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n % p == 0 {
            return n == p;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = powmod(a, d as u128, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mulmod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Miller–Rabin on arbitrary integers; deterministic below 3.3e24 and a
/// strong probable-prime test with 20 fixed bases above.
pub fn is_probable_prime(n: &BigUint) -> bool {
    if let Some(v) = n.to_u64() {
        return is_prime_u64(v);
    }
    if n.is_even() {
        return false;
    }
    let one = BigUint::one();
    let nm1 = n - &one;
    let s = nm1.trailing_zeros().unwrap_or(0);
    let d = &nm1 >> s;
    const BASES: [u32; 20] = [
        2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71,
    ];
    'witness: for a in BASES {
        let mut x = BigUint::from(a).modpow(&d, n);
        if x == one || x == nm1 {
            continue;
        }
        for _ in 1..s {
            x = (&x * &x) % n;
            if x == nm1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Primes in `[lo, hi]`, ascending.
pub fn primes_in_range(lo: u64, hi: u64) -> Vec<u64> {
    if hi < 2 || lo > hi {
        return Vec::new();
    }
    let lo = lo.max(2);
    if hi <= 50_000_000 {
        let n = hi as usize;
        let mut composite = vec![false; n + 1];
        let mut i = 2usize;
        while i * i <= n {
            if !composite[i] {
                let mut j = i * i;
                while j <= n {
                    composite[j] = true;
                    j += i;
                }
            }
            i += 1;
        }
        (lo as usize..=n)
            .filter(|&k| !composite[k])
            .map(|k| k as u64)
            .collect()
    } else {
        (lo..=hi).filter(|&k| is_prime_u64(k)).collect()
    }
}

/// Largest prime strictly below `n`.
pub fn prev_prime(mut n: u64) -> Option<u64> {
    while n > 2 {
        n -= 1;
        if is_prime_u64(n) {
            return Some(n);
        }
    }
    None
}

/// `p`-adic valuation of a nonzero integer.
pub fn valuation(n: &BigInt, p: u64) -> u32 {
    assert!(!n.is_zero());
    let p = BigInt::from(p);
    let mut n = n.clone();
    let mut v = 0;
    loop {
        let (q, r) = n.div_rem(&p);
        if !r.is_zero() {
            return v;
        }
        n = q;
        v += 1;
    }
}

/// Prime factorization of a positive integer, ascending by prime.
///
/// Trial division, then Pollard–Brent rho with at most `rho_budget`
/// iterations per composite cofactor.
pub fn factor_integer(n: &BigUint, rho_budget: u64) -> Result<Vec<(BigUint, u32)>> {
    assert!(!n.is_zero(), "factor_integer(0)");
    let mut n = n.clone();
    let mut found: Vec<BigUint> = Vec::new();
    for p in primes_in_range(2, 10_000) {
        let pb = BigUint::from(p);
        if &pb * &pb > n {
            break;
        }
        while (&n % &pb).is_zero() {
            n /= &pb;
            found.push(pb.clone());
        }
    }
    let mut stack = vec![n];
    while let Some(m) = stack.pop() {
        if m.is_one() {
            continue;
        }
        if is_probable_prime(&m) {
            found.push(m);
            continue;
        }
        let d = pollard_brent(&m, rho_budget).ok_or_else(|| {
            Error::BudgetExceeded(format!("integer factorization of a {}-bit cofactor", m.bits()))
        })?;
        let q = &m / &d;
        stack.push(d);
        stack.push(q);
    }
    found.sort();
    let mut out: Vec<(BigUint, u32)> = Vec::new();
    for p in found {
        match out.last_mut() {
            Some((q, e)) if *q == p => *e += 1,
            _ => out.push((p, 1)),
        }
    }
    Ok(out)
}

/// Nontrivial factor of an odd composite, or `None` once the iteration
/// budget is spent.
fn pollard_brent(n: &BigUint, budget: u64) -> Option<BigUint> {
    if let Some(v) = n.to_u64() {
        return pollard_brent_u64(v, budget).map(BigUint::from);
    }
    let one = BigUint::one();
    let mut spent = 0u64;
    for c in 1u32.. {
        let c = BigUint::from(c);
        let f = |x: &BigUint| (x * x + &c) % n;
        let mut y = BigUint::from(2u32);
        let mut x;
        let mut ys;
        let mut r = 1u64;
        let mut q = BigUint::one();
        let m = 128u64;
        let mut g;
        loop {
            x = y.clone();
            for _ in 0..r {
                y = f(&y);
            }
            let mut k = 0;
            loop {
                ys = y.clone();
                for _ in 0..m.min(r - k) {
                    y = f(&y);
                    let diff = if x > y { &x - &y } else { &y - &x };
                    q = (q * diff) % n;
                }
                spent += m.min(r - k);
                g = q.gcd(n);
                k += m;
                if k >= r || g != one {
                    break;
                }
            }
            r *= 2;
            if g != one || spent > budget {
                break;
            }
        }
        if spent > budget && g == one {
            return None;
        }
        if &g == n {
            loop {
                ys = f(&ys);
                let diff = if x > ys { &x - &ys } else { &ys - &x };
                g = diff.gcd(n);
                if g != one {
                    break;
                }
            }
        }
        if &g != n {
            return Some(g);
        }
        if spent > budget {
            return None;
        }
    }
    None
}

fn pollard_brent_u64(n: u64, budget: u64) -> Option<u64> {
    if n % 2 == 0 {
        return Some(2);
    }
    let mut spent = 0u64;
    for c in 1..u64::MAX {
        let f = |x: u64| (mulmod(x, x, n) + c) % n;
        let mut y = 2u64;
        let mut x = y;
        let mut ys = y;
        let mut r = 1u64;
        let mut q = 1u64;
        let mut g = 1u64;
        let m = 128u64;
        while g == 1 {
            x = y;
            for _ in 0..r {
                y = f(y);
            }
            let mut k = 0;
            while k < r && g == 1 {
                ys = y;
                for _ in 0..m.min(r - k) {
                    y = f(y);
                    q = mulmod(q, x.abs_diff(y), n);
                }
                spent += m.min(r - k);
                g = gcd_u64(q, n);
                k += m;
            }
            r *= 2;
            if spent > budget && g == 1 {
                return None;
            }
        }
        if g == n {
            loop {
                ys = f(ys);
                g = gcd_u64(x.abs_diff(ys), n);
                if g > 1 {
                    break;
                }
            }
        }
        if g != n {
            return Some(g);
        }
        if spent > budget {
            return None;
        }
    }
    None
}

fn gcd_u64(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Absolute value as an unsigned integer.
pub fn abs_uint(n: &BigInt) -> BigUint {
    n.magnitude().clone()
}

/// Signed integer from an unsigned magnitude.
pub fn to_int(n: &BigUint) -> BigInt {
    BigInt::from_biguint(Sign::Plus, n.clone())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_primality() {
        let brute = |n: u64| n >= 2 && (2..n).take_while(|d| d * d <= n).all(|d| n % d != 0);
        for n in 0..2000 {
            assert_eq!(is_prime_u64(n), brute(n), "{n}");
        }
        assert!(is_prime_u64((1 << 61) - 1));
        assert!(!is_prime_u64(3_215_031_751));
    }

    #[test]
    fn primes_range() {
        assert_eq!(primes_in_range(2, 30), vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29]);
        assert_eq!(primes_in_range(14, 16), Vec::<u64>::new());
        assert!(primes_in_range(10, 5).is_empty());
    }

    #[test]
    fn factors_multiply_back() {
        let cases: [&str; 4] = [
            "320",
            "600851475143",
            // two 31-bit primes and a 61-bit prime
            "3374569182522727197240329771839",
            "1",
        ];
        for s in cases {
            let n: BigUint = s.parse().unwrap();
            let f = factor_integer(&n, 1 << 24).unwrap();
            let back = f
                .iter()
                .fold(BigUint::one(), |acc, (p, e)| acc * p.pow(*e));
            assert_eq!(back, n);
            assert!(f.iter().all(|(p, _)| is_probable_prime(p)));
        }
        let f = factor_integer(&BigUint::from(320u32), 10).unwrap();
        assert_eq!(f, vec![(BigUint::from(2u32), 6), (BigUint::from(5u32), 1)]);
    }

    #[test]
    fn valuations() {
        assert_eq!(valuation(&BigInt::from(-320), 2), 6);
        assert_eq!(valuation(&BigInt::from(320), 5), 1);
        assert_eq!(valuation(&BigInt::from(7), 5), 0);
    }
}
