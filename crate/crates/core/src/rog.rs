//! Valuation coordinates of multiplicative groups modulo torsion: rog
//! vectors, class norm vectors, exact rank and upper-triangle certificates.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};

use crate::arith::{abs_uint, factor_integer};
use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::map::RationalMap;
use crate::sieve::{self, SieveOptions};
use crate::spectrum::{AlgebraicClass, SpectrumEngine};

/// Sparse vector of rational exponents indexed by primes. Zero entries are
/// never stored.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct RogVector {
    entries: BTreeMap<BigUint, BigRational>,
}

impl RogVector {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a vector from `(prime, exponent)` pairs, summing repeats.
    pub fn from_pairs<I: IntoIterator<Item = (BigUint, BigRational)>>(pairs: I) -> Self {
        let mut v = RogVector::new();
        for (p, e) in pairs {
            v.add_entry(p, e);
        }
        v
    }

    pub fn from_i64s(pairs: &[(u64, i64, i64)]) -> Self {
        Self::from_pairs(
            pairs
                .iter()
                .map(|&(p, n, d)| (BigUint::from(p), BigRational::new(n.into(), d.into()))),
        )
    }

    fn add_entry(&mut self, p: BigUint, e: BigRational) {
        let slot = self.entries.entry(p.clone()).or_insert_with(BigRational::zero);
        *slot += e;
        if slot.is_zero() {
            self.entries.remove(&p);
        }
    }

    /// Exponent at `p`, zero if absent.
    pub fn get(&self, p: &BigUint) -> BigRational {
        self.entries.get(p).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn primes(&self) -> impl Iterator<Item = &BigUint> {
        self.entries.keys()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&BigUint, &BigRational)> {
        self.entries.iter()
    }

    pub fn add(&self, other: &RogVector) -> RogVector {
        let mut out = self.clone();
        for (p, e) in &other.entries {
            out.add_entry(p.clone(), e.clone());
        }
        out
    }

    pub fn scale(&self, c: &BigRational) -> RogVector {
        if c.is_zero() {
            return RogVector::new();
        }
        RogVector {
            entries: self.entries.iter().map(|(p, e)| (p.clone(), e * c)).collect(),
        }
    }

    /// `sum_p e_p log p`, the logarithm of the represented absolute value.
    pub fn log_value(&self) -> f64 {
        use num_traits::ToPrimitive;
        self.entries
            .iter()
            .map(|(p, e)| e.to_f64().unwrap_or(f64::NAN) * ln_biguint(p))
            .sum()
    }
}

fn ln_biguint(p: &BigUint) -> f64 {
    use num_traits::ToPrimitive;
    let bits = p.bits();
    if bits > 1000 {
        let sh = bits - 1000;
        (p >> sh).to_f64().expect("finite").ln() + sh as f64 * std::f64::consts::LN_2
    } else {
        p.to_f64().expect("finite").ln()
    }
}

impl Serialize for RogVector {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(Some(self.entries.len()))?;
        for (p, e) in &self.entries {
            m.serialize_entry(&p.to_string(), &crate::serial::rational_string(e))?;
        }
        m.end()
    }
}

impl fmt::Display for RogVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (p, e)) in self.entries.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{p}: {}", crate::serial::rational_string(e))?;
        }
        write!(f, "}}")
    }
}

/// Prime exponents of `|q|`; signs are torsion and vanish.
pub fn rog_of_rational(q: &BigRational) -> Result<RogVector> {
    rog_of_rational_with(q, &Budget::default())
}

pub fn rog_of_rational_with(q: &BigRational, budget: &Budget) -> Result<RogVector> {
    if q.is_zero() {
        return Err(Error::RogOfZero);
    }
    let mut v = RogVector::new();
    for (p, e) in factor_integer(&abs_uint(q.numer()), budget.rho_iterations)? {
        v.add_entry(p, BigRational::from_integer(BigInt::from(e)));
    }
    for (p, e) in factor_integer(&abs_uint(q.denom()), budget.rho_iterations)? {
        v.add_entry(p, -BigRational::from_integer(BigInt::from(e)));
    }
    Ok(v)
}

/// A multiplier class with its norm and normalized rog vector.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClassVector {
    pub class: AlgebraicClass,
    pub vector: RogVector,
    #[serde(serialize_with = "crate::serial::rational")]
    pub norm: BigRational,
}

/// `N = (-1)^deg c_0 / c_deg` and `vector = rog(|N|) / deg`.
pub fn norm_vector(c: &AlgebraicClass) -> Result<ClassVector> {
    norm_vector_with(c, &Budget::default())
}

pub fn norm_vector_with(c: &AlgebraicClass, budget: &Budget) -> Result<ClassVector> {
    let g = &c.minpoly;
    let deg = g.deg();
    let c0 = g.coeff(0);
    if deg == 0 || c0.is_zero() {
        return Err(Error::ZeroMultiplier);
    }
    let mut norm = BigRational::new(c0, g.lc());
    if deg % 2 == 1 {
        norm = -norm;
    }
    let vector = rog_of_rational_with(&norm, budget)?.scale(&BigRational::new(BigInt::one(), BigInt::from(deg)));
    Ok(ClassVector {
        class: c.clone(),
        vector,
        norm,
    })
}

/// Valuation coordinate of `v` at `p`.
pub fn phi_p(v: &RogVector, p: &BigUint) -> BigRational {
    v.get(p)
}

/// Exact rank over `Q` by fraction-free (Bareiss) elimination.
pub fn rank(vs: &[RogVector]) -> usize {
    let primes: Vec<BigUint> = {
        let mut s: Vec<BigUint> = vs.iter().flat_map(|v| v.primes().cloned()).collect();
        s.sort();
        s.dedup();
        s
    };
    if primes.is_empty() {
        return 0;
    }
    // integer rows: clear denominators row by row
    let mut m: Vec<Vec<BigInt>> = vs
        .iter()
        .filter(|v| !v.is_empty())
        .map(|v| {
            let l = v
                .iter()
                .fold(BigInt::one(), |acc, (_, e)| num_integer::Integer::lcm(&acc, e.denom()));
            primes.iter().map(|p| (v.get(p) * BigRational::from_integer(l.clone())).to_integer()).collect()
        })
        .collect();
    bareiss_rank(&mut m)
}

fn bareiss_rank(m: &mut [Vec<BigInt>]) -> usize {
    let rows = m.len();
    if rows == 0 {
        return 0;
    }
    let cols = m[0].len();
    let mut r = 0;
    let mut prev = BigInt::one();
    for c in 0..cols {
        let Some(piv) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, piv);
        for i in r + 1..rows {
            for j in c + 1..cols {
                let v = (&m[r][c] * &m[i][j] - &m[i][c] * &m[r][j]) / &prev;
                m[i][j] = v;
            }
            m[i][c] = BigInt::zero();
        }
        prev = m[r][c].clone();
        r += 1;
        if r == rows {
            break;
        }
    }
    r
}

/// `(v + w) / 2`.
pub fn fold_involution(v: &RogVector, w: &RogVector) -> RogVector {
    v.add(w).scale(&BigRational::new(BigInt::one(), BigInt::from(2)))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CertificateRow {
    pub class_vector: ClassVector,
    #[serde(serialize_with = "crate::serial::unsigned")]
    pub prime: BigUint,
}

/// Rows `(λ_i, v_i)` with the matrix `φ_{v_j}(λ_i)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TriangleCertificate {
    pub rows: Vec<CertificateRow>,
    #[serde(serialize_with = "serialize_matrix")]
    pub phi_matrix: Vec<Vec<BigRational>>,
    pub verified: bool,
}

fn serialize_matrix<S: Serializer>(m: &[Vec<BigRational>], s: S) -> std::result::Result<S::Ok, S::Error> {
    let strings: Vec<Vec<String>> = m
        .iter()
        .map(|row| row.iter().map(crate::serial::rational_string).collect())
        .collect();
    strings.serialize(s)
}

impl TriangleCertificate {
    /// Builds the certificate, fills the matrix and runs the verifier.
    pub fn new(rows: Vec<CertificateRow>) -> Self {
        let phi_matrix = phi_matrix(&rows);
        let mut cert = TriangleCertificate { rows, phi_matrix, verified: false };
        cert.verified = verify_upper_triangle(&cert).ok;
        cert
    }

    pub fn primes(&self) -> Vec<BigUint> {
        self.rows.iter().map(|r| r.prime.clone()).collect()
    }

    pub fn vectors(&self) -> Vec<RogVector> {
        self.rows.iter().map(|r| r.class_vector.vector.clone()).collect()
    }
}

fn phi_matrix(rows: &[CertificateRow]) -> Vec<Vec<BigRational>> {
    rows.iter()
        .map(|ri| rows.iter().map(|rj| phi_p(&ri.class_vector.vector, &rj.prime)).collect())
        .collect()
}

/// Outcome of [`verify_upper_triangle`]; the witness is 1-based `(i, j)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TriangleVerdict {
    pub ok: bool,
    pub witness: Option<(usize, usize)>,
    pub reason: Option<String>,
}

/// Checks `φ_{v_i}(λ_i) > 0`, `φ_{v_j}(λ_i) = 0` for `j > i` and
/// `φ_{v_j}(λ_i) >= 0` everywhere, recomputing every entry from the vectors.
pub fn verify_upper_triangle(cert: &TriangleCertificate) -> TriangleVerdict {
    let fresh = phi_matrix(&cert.rows);
    if fresh != cert.phi_matrix {
        return TriangleVerdict {
            ok: false,
            witness: None,
            reason: Some("stored matrix does not match the row vectors".into()),
        };
    }
    let fail = |i: usize, j: usize, why: &str| TriangleVerdict {
        ok: false,
        witness: Some((i + 1, j + 1)),
        reason: Some(why.into()),
    };
    for (i, row) in fresh.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            if v.is_negative() {
                return fail(i, j, "negative entry");
            }
            if j == i && !v.is_positive() {
                return fail(i, j, "diagonal entry not positive");
            }
            if j > i && !v.is_zero() {
                return fail(i, j, "nonzero entry above the row's prime");
            }
        }
    }
    TriangleVerdict { ok: true, witness: None, reason: None }
}

/// Result of the greedy certificate search.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CertificateOutcome {
    pub certificate: TriangleCertificate,
    pub target_dim: usize,
    pub achieved_dim: usize,
    /// True when the search ran out of primes or periods before reaching
    /// the target.
    pub budget_exceeded: bool,
    /// Rank of the row vectors, recomputed independently.
    pub rank: usize,
}

/// Greedy upper-triangle construction: sieve hits in ascending prime order
/// contribute a class with positive valuation at the hit prime that is
/// compatible with the rows already chosen. When the hits run out (or the
/// map has no non-preperiodic critical point) the classes of period at most
/// `period_max` are scanned by ascending prime, then period, then minimal
/// polynomial.
pub fn independence_certificate(
    f: &RationalMap,
    target_dim: usize,
    prime_max: u64,
    period_max: usize,
) -> Result<CertificateOutcome> {
    independence_certificate_with(&mut SpectrumEngine::new(f), target_dim, prime_max, period_max)
}

/// As [`independence_certificate`], reusing the engine's memoized classes
/// and budget.
pub fn independence_certificate_with(
    engine: &mut SpectrumEngine,
    target_dim: usize,
    prime_max: u64,
    period_max: usize,
) -> Result<CertificateOutcome> {
    if target_dim == 0 || period_max == 0 || prime_max < 2 {
        return Err(Error::InvalidInput("certificate budgets must be positive".into()));
    }
    let f = &engine.map().clone();
    let budget = engine.budget().clone();
    let mut rows: Vec<CertificateRow> = Vec::new();
    let compatible = |rows: &[CertificateRow], cv: &ClassVector, p: &BigUint| -> bool {
        phi_p(&cv.vector, p).is_positive()
            && rows.iter().all(|r| r.prime != *p && phi_p(&r.class_vector.vector, p).is_zero())
            && rows.iter().all(|r| !phi_p(&cv.vector, &r.prime).is_negative())
    };
    let opts = SieveOptions { pmin: 2, pmax: prime_max, kmax: 2, jobs: 1 };
    match sieve::sieve(f, &opts) {
        Ok(report) => {
            for hit in &report.hits {
                if rows.len() >= target_dim {
                    break;
                }
                if hit.cycle_len > period_max {
                    continue;
                }
                let p = BigUint::from(hit.p);
                let mut classes = engine.galois_classes(hit.cycle_len, true)?;
                classes.sort_by(|a, b| a.minpoly.canonical_cmp(&b.minpoly));
                for c in classes.iter().filter(|c| !c.is_zero_class()) {
                    let cv = norm_vector_with(c, &budget)?;
                    if compatible(&rows, &cv, &p) {
                        rows.push(CertificateRow { class_vector: cv, prime: p.clone() });
                        break;
                    }
                }
            }
        }
        Err(Error::NoNonPreperiodicCritical) => {}
        Err(e) => return Err(e),
    }
    if rows.len() < target_dim {
        let mut candidates: Vec<(BigUint, usize, ClassVector)> = Vec::new();
        for n in 1..=period_max {
            for c in engine.galois_classes(n, true)? {
                if c.is_zero_class() {
                    continue;
                }
                let cv = norm_vector_with(&c, &budget)?;
                for p in cv.vector.primes() {
                    if *p <= BigUint::from(prime_max) {
                        candidates.push((p.clone(), n, cv.clone()));
                    }
                }
            }
        }
        candidates.sort_by(|a, b| {
            a.0.cmp(&b.0)
                .then(a.1.cmp(&b.1))
                .then(a.2.class.minpoly.canonical_cmp(&b.2.class.minpoly))
        });
        for (p, _, cv) in candidates {
            if rows.len() >= target_dim {
                break;
            }
            if compatible(&rows, &cv, &p) {
                rows.push(CertificateRow { class_vector: cv, prime: p });
            }
        }
    }
    let certificate = TriangleCertificate::new(rows);
    let achieved = certificate.rows.len();
    let rank = rank(&certificate.vectors());
    if certificate.verified && rank != achieved {
        return Err(Error::Internal(format!("verified certificate of {achieved} rows has rank {rank}")));
    }
    Ok(CertificateOutcome {
        target_dim,
        achieved_dim: achieved,
        budget_exceeded: achieved < target_dim,
        rank,
        certificate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::IntPoly;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn class(c: &[i64]) -> AlgebraicClass {
        AlgebraicClass { minpoly: IntPoly::from_i64s(c), period: 1, multiplicity: 1, exact_period: true }
    }

    #[test]
    fn rog_examples() {
        assert_eq!(rog_of_rational(&q(8, 1)).unwrap(), RogVector::from_i64s(&[(2, 3, 1)]));
        assert_eq!(rog_of_rational(&q(-4, 9)).unwrap(), RogVector::from_i64s(&[(2, 2, 1), (3, -2, 1)]));
        assert!(rog_of_rational(&q(1, 1)).unwrap().is_empty());
        assert!(rog_of_rational(&q(-1, 1)).unwrap().is_empty());
        assert_eq!(rog_of_rational(&q(0, 1)), Err(Error::RogOfZero));
    }

    #[test]
    fn norm_vector_examples() {
        let cv = norm_vector(&class(&[4, -2, 1])).unwrap();
        assert_eq!(cv.norm, q(4, 1));
        assert_eq!(cv.vector, RogVector::from_i64s(&[(2, 1, 1)]));
        let cv = norm_vector(&class(&[-8, 1])).unwrap();
        assert_eq!(cv.norm, q(8, 1));
        assert_eq!(norm_vector(&class(&[0, 1])), Err(Error::ZeroMultiplier));
    }

    #[test]
    fn rank_examples() {
        let a = RogVector::from_i64s(&[(2, 1, 1)]);
        let b = RogVector::from_i64s(&[(2, 3, 1)]);
        let c = RogVector::from_i64s(&[(2, 3, 1), (5, 1, 2)]);
        assert_eq!(rank(&[a.clone(), b.clone()]), 1);
        assert_eq!(rank(&[a.clone(), b.clone(), c]), 2);
        assert_eq!(rank(&[]), 0);
        assert_eq!(fold_involution(&a, &b), RogVector::from_i64s(&[(2, 2, 1)]));
        assert_eq!(fold_involution(&a, &a), a);
        assert_eq!(fold_involution(&a, &RogVector::new()), RogVector::from_i64s(&[(2, 1, 2)]));
    }

    fn row(v: RogVector, p: u64) -> CertificateRow {
        CertificateRow {
            class_vector: ClassVector { class: class(&[-2, 1]), vector: v, norm: q(2, 1) },
            prime: BigUint::from(p),
        }
    }

    #[test]
    fn triangle_verification() {
        let one = TriangleCertificate::new(vec![row(RogVector::from_i64s(&[(2, 1, 1)]), 2)]);
        assert!(one.verified);
        let two = TriangleCertificate::new(vec![
            row(RogVector::from_i64s(&[(2, 1, 1)]), 2),
            row(RogVector::from_i64s(&[(2, 3, 1), (5, 1, 2)]), 5),
        ]);
        assert!(two.verified);
        assert_eq!(two.phi_matrix[1][1], q(1, 2));
        let bad = TriangleCertificate::new(vec![
            row(RogVector::from_i64s(&[(2, 1, 1), (5, -1, 1)]), 2),
            row(RogVector::from_i64s(&[(5, 1, 1)]), 5),
        ]);
        let verdict = verify_upper_triangle(&bad);
        assert!(!verdict.ok);
        assert_eq!(verdict.witness, Some((1, 2)));
    }

    #[test]
    fn certificates_for_fixtures() {
        let f = RationalMap::from_i64s(&[1, 0, 1], &[1]).unwrap();
        let out = independence_certificate(&f, 2, 100, 4).unwrap();
        assert!(out.certificate.verified);
        assert_eq!(out.certificate.primes(), vec![BigUint::from(2u32), BigUint::from(5u32)]);
        assert_eq!(out.rank, 2);
        let sq = RationalMap::from_i64s(&[0, 0, 1], &[1]).unwrap();
        let out = independence_certificate(&sq, 2, 100, 4).unwrap();
        assert_eq!(out.achieved_dim, 1);
        assert!(out.budget_exceeded);
        let one = independence_certificate(&sq, 1, 100, 4).unwrap();
        assert!(one.certificate.verified && !one.budget_exceeded);
    }
}
