//! Factorization over `Z[x]`: squarefree decomposition, then Zassenhaus
//! (modular factorization, multifactor Hensel lifting, subset recombination).

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use super::ff::PrimeField;
use super::fpoly;
use super::modular::{reduce, reduce_int, symmetric};
use super::{squarefree_decomposition, IntPoly};
use crate::arith::primes_in_range;
use crate::budget::Budget;
use crate::error::{Error, Result};

/// `unit * content * prod factor^mult`, factors primitive irreducible with
/// positive leading coefficient, sorted by degree then coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Factorization {
    pub unit: i8,
    #[serde(serialize_with = "crate::serial::rational")]
    pub content: BigRational,
    pub factors: Vec<(IntPoly, u32)>,
}

impl Factorization {
    /// Multiplies the factorization back out.
    pub fn expand(&self) -> IntPoly {
        let mut acc = IntPoly::one();
        for (g, e) in &self.factors {
            acc = &acc * &g.pow(*e);
        }
        assert!(self.content.is_integer());
        let c = self.content.to_integer() * BigInt::from(self.unit);
        acc.scale(&c)
    }
}

/// Factors a nonzero integer polynomial with the default budget.
pub fn factor_over_z(a: &IntPoly) -> Result<Factorization> {
    factor_over_z_with(a, &Budget::default())
}

pub fn factor_over_z_with(a: &IntPoly, budget: &Budget) -> Result<Factorization> {
    if a.is_zero() {
        return Err(Error::ZeroInput("factor_over_Z"));
    }
    if a.deg() > budget.factor_degree_cap {
        return Err(Error::BudgetExceeded(format!(
            "degree {} above the factorization cap {}",
            a.deg(),
            budget.factor_degree_cap
        )));
    }
    let unit: i8 = if a.lc().is_negative() { -1 } else { 1 };
    let content = BigRational::from_integer(a.content());
    let mut factors: Vec<(IntPoly, u32)> = Vec::new();
    let f = a.primitive_part();
    // split off powers of x first
    let tz = f.coeffs().iter().take_while(|c| c.is_zero()).count();
    if tz > 0 {
        factors.push((IntPoly::x(), tz as u32));
    }
    let f = IntPoly::new(f.coeffs()[tz..].to_vec());
    if f.deg() > 0 {
        for (part, e) in squarefree_decomposition(&f) {
            for g in factor_squarefree(&part, budget)? {
                factors.push((g, e));
            }
        }
    }
    factors.sort_by(|x, y| x.0.canonical_cmp(&y.0));
    Ok(Factorization {
        unit,
        content,
        factors,
    })
}

/// Irreducible factors of a primitive squarefree polynomial with positive
/// leading coefficient.
pub fn factor_squarefree(f: &IntPoly, budget: &Budget) -> Result<Vec<IntPoly>> {
    let f = f.primitive_part();
    let n = f.deg();
    if n <= 1 {
        return Ok(vec![f]);
    }
    if n == 2 {
        return Ok(factor_quadratic(&f));
    }
    let (p, modular) = choose_prime(&f);
    if modular.len() == 1 {
        return Ok(vec![f]);
    }
    // coefficient bound for factors of lc * f: |lc| 2^n ||f||_1
    let bound = f.lc().abs() * (BigInt::one() << n) * f.norm1();
    let target = bound * 2u32 + 1u32;
    let pb = BigInt::from(p);
    let mut modulus = pb.clone();
    let mut l = 1u32;
    while modulus <= target {
        modulus *= &pb;
        l += 1;
    }
    let lifted = hensel_lift(&f, p, l, &modular);
    recombine(&f, lifted, &modulus, budget)
}

/// Quadratic: rational roots iff the discriminant is a square.
fn factor_quadratic(f: &IntPoly) -> Vec<IntPoly> {
    let (c, b, a) = (f.coeff(0), f.coeff(1), f.coeff(2));
    let disc = &b * &b - BigInt::from(4) * &a * &c;
    if disc.is_negative() {
        return vec![f.clone()];
    }
    let s = disc.sqrt();
    if &s * &s != disc {
        return vec![f.clone()];
    }
    // roots (-b ± s) / 2a, linear factors 2a x + b ∓ s
    let two_a = BigInt::from(2) * &a;
    let mut out = vec![
        IntPoly::new(vec![&b - &s, two_a.clone()]).primitive_part(),
        IntPoly::new(vec![&b + &s, two_a]).primitive_part(),
    ];
    out.sort_by(|x, y| x.canonical_cmp(y));
    out
}

/// Among the first few primes where `f` stays squarefree of full degree,
/// the one with the fewest modular factors.
fn choose_prime(f: &IntPoly) -> (u64, Vec<Vec<u64>>) {
    let df = f.derivative();
    let mut best: Option<(u64, Vec<Vec<u64>>)> = None;
    let mut tried = 0;
    for p in primes_in_range(3, 1 << 20) {
        if reduce_int(&f.lc(), p) == 0 {
            continue;
        }
        let field = PrimeField::new(p);
        let fp = reduce(f, p);
        let g = fpoly::gcd(&field, &fp, &reduce(&df, p));
        if g.len() != 1 {
            continue;
        }
        let facs: Vec<Vec<u64>> = fpoly::factor(&field, &fp).into_iter().map(|(g, _)| g).collect();
        if best.as_ref().is_none_or(|(_, b)| facs.len() < b.len()) {
            best = Some((p, facs));
        }
        tried += 1;
        if tried == 5 || best.as_ref().is_some_and(|(_, b)| b.len() == 1) {
            break;
        }
    }
    best.expect("a squarefree polynomial stays squarefree modulo almost all primes")
}

type ZPoly = Vec<BigInt>;

fn ztrim(mut a: ZPoly) -> ZPoly {
    while a.last().is_some_and(|c| c.is_zero()) {
        a.pop();
    }
    a
}

fn zmod(a: &[BigInt], m: &BigInt) -> ZPoly {
    ztrim(a.iter().map(|c| c.mod_floor(m)).collect())
}

fn zadd(a: &[BigInt], b: &[BigInt], m: &BigInt) -> ZPoly {
    let n = a.len().max(b.len());
    let z = BigInt::zero();
    ztrim(
        (0..n)
            .map(|i| (a.get(i).unwrap_or(&z) + b.get(i).unwrap_or(&z)).mod_floor(m))
            .collect(),
    )
}

fn zsub(a: &[BigInt], b: &[BigInt], m: &BigInt) -> ZPoly {
    let n = a.len().max(b.len());
    let z = BigInt::zero();
    ztrim(
        (0..n)
            .map(|i| (a.get(i).unwrap_or(&z) - b.get(i).unwrap_or(&z)).mod_floor(m))
            .collect(),
    )
}

fn zmul(a: &[BigInt], b: &[BigInt], m: &BigInt) -> ZPoly {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![BigInt::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    zmod(&out, m)
}

/// Division by a monic polynomial modulo `m`.
fn zdivrem_monic(a: &[BigInt], b: &[BigInt], m: &BigInt) -> (ZPoly, ZPoly) {
    let db = b.len() - 1;
    debug_assert!(b[db].is_one());
    if a.len() <= db {
        return (Vec::new(), a.to_vec());
    }
    let mut r = a.to_vec();
    let mut q = vec![BigInt::zero(); a.len() - db];
    for k in (0..q.len()).rev() {
        let c = r[k + db].mod_floor(m);
        if c.is_zero() {
            continue;
        }
        for (j, bj) in b.iter().enumerate() {
            r[k + j] -= &c * bj;
        }
        q[k] = c;
    }
    r.truncate(db);
    (ztrim(q), zmod(&r, m))
}

fn to_z(a: &[u64]) -> ZPoly {
    a.iter().map(|&c| BigInt::from(c)).collect()
}

/// Lifts `f ≡ lc(f) * prod g_i (mod p)` with monic `g_i` to monic factors
/// modulo `p^l`, splitting the factor list as a balanced binary tree.
fn hensel_lift(f: &IntPoly, p: u64, l: u32, factors: &[Vec<u64>]) -> Vec<ZPoly> {
    let pl = BigInt::from(p).pow(l);
    // monic image of f modulo p^l
    let lc = f.lc().mod_floor(&pl);
    let lc_inv = lc.modinv(&pl).expect("p does not divide lc");
    let fm: ZPoly = zmod(
        &f.coeffs().iter().map(|c| c * &lc_inv).collect::<Vec<_>>(),
        &pl,
    );
    let mut out = Vec::with_capacity(factors.len());
    lift_tree(&fm, p, l, factors, &mut out);
    out
}

fn lift_tree(fm: &ZPoly, p: u64, l: u32, factors: &[Vec<u64>], out: &mut Vec<ZPoly>) {
    if factors.len() == 1 {
        out.push(fm.clone());
        return;
    }
    let field = PrimeField::new(p);
    let mid = factors.len() / 2;
    let prod = |fs: &[Vec<u64>]| fs.iter().fold(vec![1u64], |acc, g| fpoly::mul(&field, &acc, g));
    let g0 = prod(&factors[..mid]);
    let h0 = prod(&factors[mid..]);
    let (one, s0, t0) = fpoly::xgcd(&field, &g0, &h0);
    debug_assert_eq!(one, vec![1]);
    let (g, h) = lift_pair(fm, to_z(&g0), to_z(&h0), to_z(&s0), to_z(&t0), p, l);
    lift_tree(&g, p, l, &factors[..mid], out);
    lift_tree(&h, p, l, &factors[mid..], out);
}

/// Quadratic Hensel lifting of `f ≡ g h` with `s g + t h ≡ 1` from `p` to
/// `p^l`; `f`, `g`, `h` monic.
fn lift_pair(
    f: &ZPoly,
    mut g: ZPoly,
    mut h: ZPoly,
    mut s: ZPoly,
    mut t: ZPoly,
    p: u64,
    l: u32,
) -> (ZPoly, ZPoly) {
    let pl = BigInt::from(p).pow(l);
    let mut m = BigInt::from(p);
    while m < pl {
        let m2 = &m * &m;
        let e = zsub(&zmod(f, &m2), &zmul(&g, &h, &m2), &m2);
        let (q, r) = zdivrem_monic(&zmul(&s, &e, &m2), &h, &m2);
        let g1 = zadd(&zadd(&g, &zmul(&t, &e, &m2), &m2), &zmul(&q, &g, &m2), &m2);
        let h1 = zadd(&h, &r, &m2);
        let b = zsub(
            &zadd(&zmul(&s, &g1, &m2), &zmul(&t, &h1, &m2), &m2),
            &[BigInt::one()],
            &m2,
        );
        let (c, d) = zdivrem_monic(&zmul(&s, &b, &m2), &h1, &m2);
        s = zsub(&s, &d, &m2);
        t = zsub(&zsub(&t, &zmul(&t, &b, &m2), &m2), &zmul(&c, &g1, &m2), &m2);
        g = g1;
        h = h1;
        m = m2;
    }
    (zmod(&g, &pl), zmod(&h, &pl))
}

/// Subset recombination of the lifted factors.
fn recombine(
    f: &IntPoly,
    mut lifted: Vec<ZPoly>,
    modulus: &BigInt,
    budget: &Budget,
) -> Result<Vec<IntPoly>> {
    let mut rest = f.clone();
    let mut found = Vec::new();
    let mut s = 1usize;
    while 2 * s <= lifted.len() {
        if s > budget.subset_cap {
            return Err(Error::BudgetExceeded(format!(
                "recombination needs subsets of size {s} among {} modular factors (cap {})",
                lifted.len(),
                budget.subset_cap
            )));
        }
        let mut hit: Option<(Vec<usize>, IntPoly)> = None;
        let b = rest.lc();
        let target0 = rest.coeff(0) * &b;
        for subset in Subsets::new(lifted.len(), s) {
            // cheap constant-term filter before the full product
            let c0 = subset
                .iter()
                .fold(b.clone(), |acc, &i| (acc * lifted[i].first().cloned().unwrap_or_default()).mod_floor(modulus));
            let c0 = symmetric(&c0, modulus);
            if c0.is_zero() || !(&target0 % &c0).is_zero() {
                continue;
            }
            let prod = subset.iter().fold(vec![b.clone()], |acc, &i| zmul(&acc, &lifted[i], modulus));
            let cand = IntPoly::new(prod.iter().map(|c| symmetric(c, modulus)).collect()).primitive_part();
            if let Some(q) = rest.div_exact(&cand) {
                hit = Some((subset, cand));
                rest = q;
                break;
            }
        }
        match hit {
            Some((subset, cand)) => {
                found.push(cand);
                let mut keep = Vec::with_capacity(lifted.len() - subset.len());
                for (i, g) in lifted.into_iter().enumerate() {
                    if !subset.contains(&i) {
                        keep.push(g);
                    }
                }
                lifted = keep;
            }
            None => s += 1,
        }
    }
    if rest.deg() > 0 {
        found.push(rest.primitive_part());
    }
    found.sort_by(|x, y| x.canonical_cmp(y));
    Ok(found)
}

/// `k`-subsets of `0..n` in lexicographic order.
struct Subsets {
    n: usize,
    cur: Option<Vec<usize>>,
}

impl Subsets {
    fn new(n: usize, k: usize) -> Self {
        Subsets {
            n,
            cur: if k <= n { Some((0..k).collect()) } else { None },
        }
    }
}

impl Iterator for Subsets {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let out = self.cur.clone()?;
        let k = out.len();
        let mut next = out.clone();
        let mut i = k;
        loop {
            if i == 0 {
                self.cur = None;
                break;
            }
            i -= 1;
            if next[i] < self.n - k + i {
                next[i] += 1;
                for j in i + 1..k {
                    next[j] = next[j - 1] + 1;
                }
                self.cur = Some(next);
                break;
            }
        }
        Some(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(c: &[i64]) -> IntPoly {
        IntPoly::from_i64s(c)
    }

    #[test]
    fn spec_examples() {
        let f = factor_over_z(&p(&[-1, 0, 1])).unwrap();
        assert_eq!(f.factors, vec![(p(&[-1, 1]), 1), (p(&[1, 1]), 1)]);
        let f = factor_over_z(&p(&[4, 0, 0, 0, 1])).unwrap();
        assert_eq!(f.factors, vec![(p(&[2, -2, 1]), 1), (p(&[2, 2, 1]), 1)]);
        let f = factor_over_z(&p(&[4, -2, 1])).unwrap();
        assert_eq!(f.factors, vec![(p(&[4, -2, 1]), 1)]);
    }

    #[test]
    fn swinnerton_dyer_like_and_units() {
        // x^4 - 10x^2 + 1 is irreducible but splits modulo every prime
        let f = factor_over_z(&p(&[1, 0, -10, 0, 1])).unwrap();
        assert_eq!(f.factors.len(), 1);
        let a = p(&[-6, 0, 0, 3, 0, -3]);
        let fa = factor_over_z(&a).unwrap();
        assert_eq!(fa.unit, -1);
        assert_eq!(fa.expand(), a);
    }

    #[test]
    fn products_round_trip() {
        let parts = [p(&[1, 1]), p(&[-2, 0, 1]), p(&[1, 1, 1]), p(&[3, 0, 0, 1]), p(&[5, -1, 0, 0, 2])];
        let a = &(&(&parts[0] * &parts[1]) * &(&parts[2] * &parts[2])) * &(&parts[3] * &parts[4]);
        let f = factor_over_z(&a).unwrap();
        assert_eq!(f.expand(), a);
        assert_eq!(f.factors.len(), 5);
        assert!(f.factors.iter().any(|(g, e)| g == &parts[2] && *e == 2));
    }

    #[test]
    fn many_linear_factors() {
        let a = (1..=14).fold(IntPoly::one(), |acc, k| &acc * &p(&[-k, 1]));
        let f = factor_over_z(&a).unwrap();
        assert_eq!(f.factors.len(), 14);
        assert_eq!(f.expand(), a);
    }

    #[test]
    fn subset_enumeration() {
        let all: Vec<Vec<usize>> = Subsets::new(4, 2).collect();
        assert_eq!(all.len(), 6);
        assert_eq!(all[0], vec![0, 1]);
        assert_eq!(all[5], vec![2, 3]);
    }
}
