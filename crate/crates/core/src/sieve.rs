//! Reduction of maps modulo primes, critical orbits over finite fields and
//! the sieve for primes at which a critical point becomes periodic.

use num_bigint::BigUint;
use num_traits::Signed;
use serde::{Serialize, Serializer};

use crate::arith::{is_prime_u64, primes_in_range};
use crate::error::{Error, Result};
use crate::map::{ProjPoint, RationalMap};
use crate::pcf::{critical_classes, critical_orbits, periodic_critical_points, CriticalClass, OrbitStatus};
use crate::poly::ff::{ExtField, FiniteField};
use crate::poly::fpoly;
use crate::poly::modular::reduce_int;
use crate::rog::{norm_vector_with, phi_p};
use crate::spectrum::{AlgebraicClass, SpectrumEngine};

/// A degree-`d` map over `F_p`: coefficient vectors of length `d + 1`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ReducedMap {
    pub p: u64,
    pub degree: usize,
    pub num: Vec<u64>,
    pub den: Vec<u64>,
}

/// Reduction modulo a prime of good reduction.
pub fn reduce_map(f: &RationalMap, p: u64) -> Result<ReducedMap> {
    if !is_prime_u64(p) || p >= 1 << 62 {
        return Err(Error::InvalidInput(format!("{p} is not a supported prime")));
    }
    let d = f.degree();
    let red = |coeffs: &[num_bigint::BigInt]| -> Vec<u64> {
        let mut v: Vec<u64> = coeffs.iter().map(|c| reduce_int(c, p)).collect();
        v.resize(d + 1, 0);
        v
    };
    let num = red(f.num().coeffs());
    let den = red(f.den().coeffs());
    let bad = |obstruction: &str| Error::BadReduction { p, obstruction: obstruction.into() };
    if num.iter().all(|&c| c == 0) {
        return Err(bad("numerator vanishes mod p"));
    }
    if den.iter().all(|&c| c == 0) {
        return Err(bad("denominator vanishes mod p"));
    }
    if !f.good_reduction(p) {
        return Err(bad("homogeneous resultant divisible by p"));
    }
    Ok(ReducedMap { p, degree: d, num, den })
}

/// Point of `P^1(F_{p^k})`; finite points are in the basis of the field
/// modulus.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FqPoint {
    Finite(Vec<u64>),
    Infinity,
}

impl Serialize for FqPoint {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            FqPoint::Finite(v) => v.serialize(s),
            FqPoint::Infinity => s.serialize_str("inf"),
        }
    }
}

impl ReducedMap {
    /// `fbar` acting on `P^1(F_{p^k})`.
    pub fn apply(&self, field: &ExtField, z: &FqPoint) -> FqPoint {
        let d = self.degree;
        match z {
            FqPoint::Infinity => {
                if self.den[d] == 0 {
                    FqPoint::Infinity
                } else {
                    let q = crate::poly::ff::invmod(self.den[d], self.p);
                    FqPoint::Finite(field.embed(crate::poly::ff::mulmod(self.num[d], q, self.p)))
                }
            }
            FqPoint::Finite(x) => {
                let horner = |c: &[u64]| {
                    let mut acc = field.zero();
                    for &ci in c.iter().rev() {
                        acc = field.add(&field.mul(&acc, x), &field.embed(ci));
                    }
                    acc
                };
                let q = horner(&self.den);
                if field.is_zero(&q) {
                    FqPoint::Infinity
                } else {
                    FqPoint::Finite(field.mul(&horner(&self.num), &field.inv(&q)))
                }
            }
        }
    }
}

/// Brent cycle detection: `(tail, cycle_len)` of the orbit of `start`.
pub fn orbit_mod_p(start: &FqPoint, fbar: &ReducedMap, field: &ExtField) -> (usize, usize) {
    let f = |z: &FqPoint| fbar.apply(field, z);
    let (mut power, mut lam) = (1usize, 1usize);
    let mut tortoise = start.clone();
    let mut hare = f(start);
    while tortoise != hare {
        if power == lam {
            tortoise = hare.clone();
            power *= 2;
            lam = 0;
        }
        hare = f(&hare);
        lam += 1;
    }
    let mut tortoise = start.clone();
    let mut hare = start.clone();
    for _ in 0..lam {
        hare = f(&hare);
    }
    let mut mu = 0;
    while tortoise != hare {
        tortoise = f(&tortoise);
        hare = f(&hare);
        mu += 1;
    }
    (mu, lam)
}

/// Reduction of a critical point, tagged with its characteristic-zero class
/// and the degree of the smallest field containing it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CriticalPointModP {
    pub crit_id: usize,
    pub k: usize,
    pub point: FqPoint,
}

fn min_field_degree(field: &ExtField, x: &[u64]) -> usize {
    let p = BigUint::from(field.p());
    let mut y = x.to_vec();
    for j in 1..=field.k() {
        y = field.pow(&y, &p);
        if y == x {
            return j;
        }
    }
    field.k()
}

fn critical_points_for(classes: &[CriticalClass], p: u64, kmax: usize) -> Result<Vec<CriticalPointModP>> {
    let mut out = Vec::new();
    for class in classes {
        let Some(g) = &class.minpoly else {
            out.push(CriticalPointModP { crit_id: class.id, k: 1, point: FqPoint::Infinity });
            continue;
        };
        let red: Vec<u64> = g.coeffs().iter().map(|c| reduce_int(c, p)).collect();
        let mut trimmed = red.clone();
        while trimmed.last() == Some(&0) {
            trimmed.pop();
        }
        if trimmed.len() < red.len() {
            out.push(CriticalPointModP { crit_id: class.id, k: 1, point: FqPoint::Infinity });
        }
        if trimmed.len() <= 1 {
            continue;
        }
        for k in 1..=kmax {
            let field = ExtField::new(p, k)?;
            let lifted: Vec<Vec<u64>> = trimmed.iter().map(|&c| field.embed(c)).collect();
            for (r, _) in fpoly::roots(&field, &lifted) {
                if min_field_degree(&field, &r) == k {
                    out.push(CriticalPointModP { crit_id: class.id, k, point: FqPoint::Finite(r) });
                }
            }
        }
    }
    Ok(out)
}

/// Critical points of the reduction in `F_{p^k}`, `k <= kmax`, each listed
/// at the smallest `k` containing it.
pub fn critical_points_mod_p(f: &RationalMap, p: u64, kmax: usize) -> Result<Vec<CriticalPointModP>> {
    reduce_map(f, p)?;
    critical_points_for(&critical_classes(f)?, p, kmax)
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct PrimeHit {
    pub p: u64,
    pub crit_id: usize,
    pub k: usize,
    pub tail: usize,
    pub cycle_len: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SieveReport {
    pub pmin: u64,
    pub pmax: u64,
    pub kmax: usize,
    /// Critical classes treated as non-preperiodic.
    pub marked: Vec<usize>,
    pub hits: Vec<PrimeHit>,
    /// Marked critical reductions with a positive tail.
    pub misses: usize,
    /// Reductions landing on a reduced periodic critical orbit.
    pub excluded: usize,
    pub bad_primes: Vec<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SieveOptions {
    pub pmin: u64,
    pub pmax: u64,
    pub kmax: usize,
    pub jobs: usize,
}

impl Default for SieveOptions {
    fn default() -> Self {
        SieveOptions { pmin: 2, pmax: 100, kmax: 2, jobs: 1 }
    }
}

struct Context<'a> {
    f: &'a RationalMap,
    classes: Vec<CriticalClass>,
    marked: Vec<usize>,
    excluded_points: Vec<ProjPoint>,
    kmax: usize,
}

#[derive(Default)]
struct Partial {
    hits: Vec<PrimeHit>,
    misses: usize,
    excluded: usize,
    bad: Vec<u64>,
}

fn reduce_point(z: &ProjPoint, p: u64) -> FqPoint {
    match z {
        ProjPoint::Infinity => FqPoint::Infinity,
        ProjPoint::Finite(q) => {
            let den = reduce_int(q.denom(), p);
            if den == 0 {
                FqPoint::Infinity
            } else {
                let num = reduce_int(q.numer(), p);
                FqPoint::Finite(vec![crate::poly::ff::mulmod(num, crate::poly::ff::invmod(den, p), p)])
            }
        }
    }
}

fn scan(ctx: &Context<'_>, primes: &[u64]) -> Result<Partial> {
    let mut out = Partial::default();
    for &p in primes {
        let fbar = match reduce_map(ctx.f, p) {
            Ok(m) => m,
            Err(Error::BadReduction { .. }) => {
                out.bad.push(p);
                continue;
            }
            Err(e) => return Err(e),
        };
        let excluded: Vec<FqPoint> = ctx.excluded_points.iter().map(|z| reduce_point(z, p)).collect();
        for cp in critical_points_for(&ctx.classes, p, ctx.kmax)? {
            if !ctx.marked.contains(&cp.crit_id) {
                continue;
            }
            if cp.k == 1 && excluded.contains(&cp.point) {
                out.excluded += 1;
                continue;
            }
            let field = ExtField::new(p, cp.k)?;
            let (tail, cycle) = orbit_mod_p(&cp.point, &fbar, &field);
            let bound = (p as u128).pow(cp.k as u32) + 1;
            if (tail + cycle) as u128 > bound {
                return Err(Error::Internal(format!("orbit of length {} exceeds |P^1(F_{{{p}^{}}})|", tail + cycle, cp.k)));
            }
            if tail == 0 {
                out.hits.push(PrimeHit { p, crit_id: cp.crit_id, k: cp.k, tail, cycle_len: cycle });
            } else {
                out.misses += 1;
            }
        }
    }
    Ok(out)
}

/// Scans the good-reduction primes in `[pmin, pmax]` for primes at which a
/// non-preperiodic critical point is periodic modulo `p`. Work is split into
/// `jobs` contiguous prime ranges and merged in ascending order.
pub fn sieve(f: &RationalMap, opts: &SieveOptions) -> Result<SieveReport> {
    if opts.pmin > opts.pmax {
        return Err(Error::InvalidInput(format!("empty prime window [{}, {}]", opts.pmin, opts.pmax)));
    }
    if opts.kmax == 0 {
        return Err(Error::InvalidInput("extension degree must be at least 1".into()));
    }
    if opts.pmax >= 1 << 62 {
        return Err(Error::InvalidInput("prime bound too large".into()));
    }
    let report = critical_orbits(f, 64, 4096)?;
    let marked: Vec<usize> = report
        .orbits
        .iter()
        .filter(|o| matches!(o.status, OrbitStatus::Open { .. }))
        .map(|o| o.class.id)
        .collect();
    if marked.is_empty() {
        return Err(Error::NoNonPreperiodicCritical);
    }
    let ctx = Context {
        f,
        classes: report.orbits.iter().map(|o| o.class.clone()).collect(),
        marked: marked.clone(),
        excluded_points: periodic_critical_points(&report),
        kmax: opts.kmax,
    };
    let primes = primes_in_range(opts.pmin, opts.pmax);
    let jobs = opts.jobs.max(1).min(primes.len().max(1));
    let chunk = primes.len().div_ceil(jobs).max(1);
    let parts: Vec<Result<Partial>> = if jobs == 1 {
        vec![scan(&ctx, &primes)]
    } else {
        std::thread::scope(|s| {
            let handles: Vec<_> = primes.chunks(chunk).map(|c| s.spawn(|| scan(&ctx, c))).collect();
            handles
                .into_iter()
                .map(|h| h.join().unwrap_or_else(|_| Err(Error::Internal("sieve worker panicked".into()))))
                .collect()
        })
    };
    let mut out = SieveReport {
        pmin: opts.pmin,
        pmax: opts.pmax,
        kmax: opts.kmax,
        marked,
        hits: Vec::new(),
        misses: 0,
        excluded: 0,
        bad_primes: Vec::new(),
    };
    for part in parts {
        let part = part?;
        out.hits.extend(part.hits);
        out.misses += part.misses;
        out.excluded += part.excluded;
        out.bad_primes.extend(part.bad);
    }
    out.hits.sort();
    Ok(out)
}

/// Exact-period class of period `hit.cycle_len` whose norm has positive
/// `p`-valuation; smallest minimal polynomial first.
pub fn attach_class(f: &RationalMap, hit: &PrimeHit, period_budget: usize) -> Result<AlgebraicClass> {
    attach_class_with(&mut SpectrumEngine::new(f), hit, period_budget)
}

pub fn attach_class_with(engine: &mut SpectrumEngine, hit: &PrimeHit, period_budget: usize) -> Result<AlgebraicClass> {
    if hit.cycle_len > period_budget {
        return Err(Error::BudgetExceeded(format!(
            "cycle length {} above period budget {period_budget}",
            hit.cycle_len
        )));
    }
    let budget = engine.budget().clone();
    let p = BigUint::from(hit.p);
    let mut classes = engine.galois_classes(hit.cycle_len, true)?;
    classes.sort_by(|a, b| a.minpoly.canonical_cmp(&b.minpoly));
    for c in classes.into_iter().filter(|c| !c.is_zero_class()) {
        let cv = norm_vector_with(&c, &budget)?;
        if phi_p(&cv.vector, &p).is_positive() {
            return Ok(c);
        }
    }
    Err(Error::HenselCrossCheck { p: hit.p, cycle_len: hit.cycle_len })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn map(num: &[i64], den: &[i64]) -> RationalMap {
        RationalMap::from_i64s(num, den).unwrap()
    }

    #[test]
    fn reductions() {
        let f = map(&[1, 0, 1], &[1]);
        assert_eq!(reduce_map(&f, 5).unwrap().num, vec![1, 0, 1]);
        assert_eq!(reduce_map(&map(&[-2, 0, 1], &[1]), 7).unwrap().num, vec![5, 0, 1]);
        let lattes = map(&[1, 0, 2, 0, 1], &[0, -4, 0, 4]);
        assert!(matches!(reduce_map(&lattes, 2), Err(Error::BadReduction { p: 2, .. })));
    }

    #[test]
    fn orbits_mod_p() {
        let f = map(&[1, 0, 1], &[1]);
        let f5 = ExtField::new(5, 1).unwrap();
        let f3 = ExtField::new(3, 1).unwrap();
        assert_eq!(orbit_mod_p(&FqPoint::Finite(vec![0]), &reduce_map(&f, 5).unwrap(), &f5), (0, 3));
        assert_eq!(orbit_mod_p(&FqPoint::Finite(vec![0]), &reduce_map(&f, 3).unwrap(), &f3), (2, 1));
        assert_eq!(orbit_mod_p(&FqPoint::Infinity, &reduce_map(&f, 3).unwrap(), &f3), (0, 1));
    }

    #[test]
    fn critical_points() {
        let f = map(&[1, 0, 1], &[1]);
        let pts = critical_points_mod_p(&f, 7, 2).unwrap();
        assert_eq!(pts.len(), 2);
        assert_eq!(pts[0].point, FqPoint::Finite(vec![0]));
        assert_eq!(pts[1].point, FqPoint::Infinity);
        let g = map(&[1, 0, 1], &[0, 1]);
        let pts: Vec<FqPoint> = critical_points_mod_p(&g, 5, 1).unwrap().into_iter().map(|c| c.point).collect();
        assert_eq!(pts, vec![FqPoint::Finite(vec![1]), FqPoint::Finite(vec![4])]);
        // critical points ±i: absent over F_3, present over F_9
        let h = map(&[-1, 0, 1], &[0, 2]);
        assert!(critical_points_mod_p(&h, 3, 1).unwrap().is_empty());
        let two = critical_points_mod_p(&h, 3, 2).unwrap();
        assert_eq!(two.len(), 2);
        assert!(two.iter().all(|c| c.k == 2));
    }

    #[test]
    fn sieve_examples() {
        let f = map(&[1, 0, 1], &[1]);
        let r = sieve(&f, &SieveOptions::default()).unwrap();
        assert!(r.hits.iter().any(|h| h.p == 5 && h.cycle_len == 3 && h.crit_id == 0));
        let split = sieve(&f, &SieveOptions { jobs: 3, ..Default::default() }).unwrap();
        assert_eq!(r, split);
        assert_eq!(sieve(&map(&[0, 0, 1], &[1]), &SieveOptions::default()), Err(Error::NoNonPreperiodicCritical));
        assert_eq!(sieve(&map(&[-2, 0, 1], &[1]), &SieveOptions::default()), Err(Error::NoNonPreperiodicCritical));
        assert!(sieve(&f, &SieveOptions { pmin: 10, pmax: 5, ..Default::default() }).is_err());
    }

    #[test]
    fn attach_classes() {
        let f = map(&[1, 0, 1], &[1]);
        let hit = PrimeHit { p: 5, crit_id: 0, k: 1, tail: 0, cycle_len: 3 };
        let c = attach_class(&f, &hit, 6).unwrap();
        assert_eq!(c.period, 3);
        assert!(attach_class(&f, &hit, 2).is_err());
    }
}
