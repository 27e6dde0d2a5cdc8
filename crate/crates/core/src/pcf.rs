//! Exact critical-orbit analysis, rank growth of norm vectors and the
//! PCF / likely-non-PCF classification.

use std::collections::HashMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::arith::{abs_uint, factor_integer};
use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::map::RationalMap;
use crate::poly::{factor_over_z_with, IntPoly};
use crate::rog::{norm_vector_with, rank, RogVector};
use crate::spectrum::SpectrumEngine;

/// Irreducible factor of the critical form; `minpoly == None` is the point
/// at infinity.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CriticalClass {
    pub id: usize,
    pub minpoly: Option<IntPoly>,
    pub multiplicity: u32,
}

impl CriticalClass {
    pub fn degree(&self) -> usize {
        self.minpoly.as_ref().map_or(1, |g| g.deg())
    }
}

/// Critical classes: affine factors in canonical factor order, then
/// infinity when it is critical.
pub fn critical_classes(f: &RationalMap) -> Result<Vec<CriticalClass>> {
    critical_classes_with(f, &Budget::default())
}

pub fn critical_classes_with(f: &RationalMap, budget: &Budget) -> Result<Vec<CriticalClass>> {
    let form = f.critical_form();
    let mut out = Vec::new();
    if form.poly.deg() > 0 {
        for (g, e) in factor_over_z_with(&form.poly, budget)?.factors {
            out.push(CriticalClass { id: out.len(), minpoly: Some(g), multiplicity: e });
        }
    }
    let inf = form.infinity_multiplicity();
    if inf > 0 {
        out.push(CriticalClass { id: out.len(), minpoly: None, multiplicity: inf as u32 });
    }
    Ok(out)
}

/// Element `a + b sqrt(D)` of `Q(sqrt(D))`, `D` squarefree and not 1.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct QuadElem {
    a: BigRational,
    b: BigRational,
}

/// Point of the projective line over `Q(sqrt(D))`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum QPoint {
    Finite(QuadElem),
    Infinity,
}

#[derive(Clone, Debug)]
struct QuadField {
    d: BigInt,
}

impl QuadField {
    fn rational(&self, q: BigRational) -> QuadElem {
        QuadElem { a: q, b: BigRational::zero() }
    }

    fn add(&self, x: &QuadElem, y: &QuadElem) -> QuadElem {
        QuadElem { a: &x.a + &y.a, b: &x.b + &y.b }
    }

    fn mul(&self, x: &QuadElem, y: &QuadElem) -> QuadElem {
        let d = BigRational::from_integer(self.d.clone());
        QuadElem {
            a: &x.a * &y.a + &x.b * &y.b * d,
            b: &x.a * &y.b + &x.b * &y.a,
        }
    }

    fn inv(&self, x: &QuadElem) -> QuadElem {
        let d = BigRational::from_integer(self.d.clone());
        let n = &x.a * &x.a - &x.b * &x.b * d;
        QuadElem { a: &x.a / &n, b: -&x.b / &n }
    }

    fn is_zero(x: &QuadElem) -> bool {
        x.a.is_zero() && x.b.is_zero()
    }

    fn eval(&self, g: &IntPoly, z: &QuadElem) -> QuadElem {
        let mut acc = self.rational(BigRational::zero());
        for c in g.coeffs().iter().rev() {
            acc = self.add(&self.mul(&acc, z), &self.rational(BigRational::from_integer(c.clone())));
        }
        acc
    }

    fn apply(&self, f: &RationalMap, z: &QPoint) -> QPoint {
        match z {
            QPoint::Infinity => {
                let d = f.degree();
                let (pd, qd) = (f.num().coeff(d), f.den().coeff(d));
                if qd.is_zero() {
                    QPoint::Infinity
                } else {
                    QPoint::Finite(self.rational(BigRational::new(pd, qd)))
                }
            }
            QPoint::Finite(x) => {
                let q = self.eval(f.den(), x);
                if Self::is_zero(&q) {
                    QPoint::Infinity
                } else {
                    let p = self.eval(f.num(), x);
                    QPoint::Finite(self.mul(&p, &self.inv(&q)))
                }
            }
        }
    }
}

fn rat_bits(q: &BigRational) -> u64 {
    q.numer().bits().max(q.denom().bits())
}

fn height_bits(z: &QPoint) -> u64 {
    match z {
        QPoint::Infinity => 0,
        QPoint::Finite(x) => rat_bits(&x.a).max(rat_bits(&x.b)),
    }
}

struct PointDisplay<'a>(&'a QPoint, &'a BigInt);

impl fmt::Display for PointDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use crate::serial::rational_string as rs;
        match self.0 {
            QPoint::Infinity => write!(f, "inf"),
            QPoint::Finite(x) if x.b.is_zero() => write!(f, "{}", rs(&x.a)),
            QPoint::Finite(x) => write!(f, "{} + {}*sqrt({})", rs(&x.a), rs(&x.b), self.1),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Exactness {
    Rational,
    Quadratic,
    Numeric,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum OrbitStatus {
    Periodic { cycle: usize },
    Preperiodic { tail: usize, cycle: usize },
    /// No collision within the budgets; `heights[i]` is the bit size of the
    /// `i`-th orbit point.
    Open { steps: usize, heights: Vec<u64> },
    /// Critical class of degree above 2.
    Unsupported,
}

impl OrbitStatus {
    pub fn is_finite(&self) -> bool {
        matches!(self, OrbitStatus::Periodic { .. } | OrbitStatus::Preperiodic { .. })
    }

    /// Longest run of strictly increasing consecutive heights.
    pub fn increasing_run(&self) -> usize {
        match self {
            OrbitStatus::Open { heights, .. } => {
                let mut best = 0;
                let mut cur = 0;
                for w in heights.windows(2) {
                    if w[1] > w[0] {
                        cur += 1;
                        best = best.max(cur);
                    } else {
                        cur = 0;
                    }
                }
                best
            }
            _ => 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CriticalOrbit {
    pub class: CriticalClass,
    pub exactness: Exactness,
    pub status: OrbitStatus,
    /// Exact orbit points up to the first repeat (finite statuses only).
    pub orbit: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CriticalOrbitReport {
    pub orbits: Vec<CriticalOrbit>,
    pub step_budget: usize,
    pub height_budget_bits: u64,
}

impl CriticalOrbitReport {
    pub fn all_finite(&self) -> bool {
        self.orbits.iter().all(|o| o.status.is_finite())
    }
}

/// Squarefree part of a nonzero integer, sign kept.
fn squarefree_kernel(n: &BigInt, budget: &Budget) -> Result<(BigInt, BigInt)> {
    let mut kernel = BigInt::one();
    let mut square_root = BigInt::one();
    for (p, e) in factor_integer(&abs_uint(n), budget.rho_iterations)? {
        let p = BigInt::from(p);
        if e % 2 == 1 {
            kernel *= &p;
        }
        for _ in 0..e / 2 {
            square_root *= &p;
        }
    }
    if n.is_negative() {
        kernel = -kernel;
    }
    Ok((kernel, square_root))
}

/// Exact starting point of a critical class of degree at most 2: the
/// root `(-B + s sqrt(D)) / (2A)` for quadratics.
fn class_point(c: &CriticalClass, budget: &Budget) -> Result<Option<(QuadField, QPoint)>> {
    let Some(g) = &c.minpoly else {
        return Ok(Some((QuadField { d: BigInt::from(-1) }, QPoint::Infinity)));
    };
    match g.deg() {
        1 => {
            let field = QuadField { d: BigInt::from(-1) };
            let z = BigRational::new(-g.coeff(0), g.coeff(1));
            Ok(Some((field.clone(), QPoint::Finite(field.rational(z)))))
        }
        2 => {
            let (a, b, c0) = (g.coeff(2), g.coeff(1), g.coeff(0));
            let disc = &b * &b - BigInt::from(4) * &a * &c0;
            let (d, s) = squarefree_kernel(&disc, budget)?;
            let two_a = BigInt::from(2) * a;
            let field = QuadField { d };
            let z = QuadElem { a: BigRational::new(-b, two_a.clone()), b: BigRational::new(s, two_a) };
            Ok(Some((field, QPoint::Finite(z))))
        }
        _ => Ok(None),
    }
}

/// Exact forward orbits of every critical class, with collision detection
/// by exact equality; an orbit is open once it exceeds `step_budget` steps
/// or a point exceeds `height_budget_bits`.
pub fn critical_orbits(f: &RationalMap, step_budget: usize, height_budget_bits: u64) -> Result<CriticalOrbitReport> {
    if step_budget == 0 || height_budget_bits == 0 {
        return Err(Error::InvalidInput("orbit budgets must be positive".into()));
    }
    let budget = Budget::default();
    let mut orbits = Vec::new();
    for class in critical_classes_with(f, &budget)? {
        let Some((field, start)) = class_point(&class, &budget)? else {
            orbits.push(CriticalOrbit {
                class,
                exactness: Exactness::Numeric,
                status: OrbitStatus::Unsupported,
                orbit: Vec::new(),
            });
            continue;
        };
        let exactness = match &start {
            QPoint::Finite(z) if !z.b.is_zero() => Exactness::Quadratic,
            _ => Exactness::Rational,
        };
        let mut seen: HashMap<QPoint, usize> = HashMap::new();
        let mut points: Vec<QPoint> = Vec::new();
        let mut heights = Vec::new();
        let mut z = start;
        let status = loop {
            if let Some(&i) = seen.get(&z) {
                let cycle = points.len() - i;
                break if i == 0 {
                    OrbitStatus::Periodic { cycle }
                } else {
                    OrbitStatus::Preperiodic { tail: i, cycle }
                };
            }
            let h = height_bits(&z);
            heights.push(h);
            if points.len() >= step_budget || h > height_budget_bits {
                break OrbitStatus::Open { steps: points.len(), heights: heights.clone() };
            }
            seen.insert(z.clone(), points.len());
            points.push(z.clone());
            z = field.apply(f, &z);
        };
        let orbit = if status.is_finite() {
            points.iter().map(|p| PointDisplay(p, &field.d).to_string()).collect()
        } else {
            Vec::new()
        };
        orbits.push(CriticalOrbit { class, exactness, status, orbit });
    }
    Ok(CriticalOrbitReport { orbits, step_budget, height_budget_bits })
}

/// Re-derives a finite orbit with exact arithmetic and checks the recorded
/// points and the collision.
pub fn replay(f: &RationalMap, orbit: &CriticalOrbit) -> bool {
    let (tail, cycle) = match orbit.status {
        OrbitStatus::Periodic { cycle } => (0, cycle),
        OrbitStatus::Preperiodic { tail, cycle } => (tail, cycle),
        _ => return false,
    };
    let Ok(Some((field, start))) = class_point(&orbit.class, &Budget::default()) else {
        return false;
    };
    let mut pts = vec![start];
    for _ in 0..tail + cycle {
        let next = field.apply(f, pts.last().expect("nonempty"));
        pts.push(next);
    }
    let distinct = (0..tail + cycle).all(|i| (i + 1..tail + cycle).all(|j| pts[i] != pts[j]));
    let strings: Vec<String> = pts[..tail + cycle].iter().map(|p| PointDisplay(p, &field.d).to_string()).collect();
    distinct && pts[tail + cycle] == pts[tail] && strings == orbit.orbit
}

/// `dims[n - 1]` is the rank of the norm vectors of all non-superattracting
/// exact-period classes of period at most `n`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RankGrowth {
    pub dims: Vec<usize>,
}

impl RankGrowth {
    pub fn strictly_increases(&self) -> bool {
        self.dims.windows(2).any(|w| w[1] > w[0])
    }
}

pub fn rank_growth(f: &RationalMap, nmax: usize) -> Result<RankGrowth> {
    let mut engine = SpectrumEngine::new(f);
    rank_growth_with(&mut engine, nmax).map(|(g, _)| g)
}

/// Rank growth together with the vectors used, per period.
pub fn rank_growth_with(engine: &mut SpectrumEngine, nmax: usize) -> Result<(RankGrowth, Vec<Vec<RogVector>>)> {
    let budget = engine.budget().clone();
    let mut all = Vec::new();
    let mut per_period = Vec::new();
    let mut dims = Vec::new();
    for n in 1..=nmax {
        let mut vs = Vec::new();
        for c in engine.galois_classes(n, true)? {
            if c.is_zero_class() {
                continue;
            }
            vs.push(norm_vector_with(&c, &budget)?.vector);
        }
        all.extend(vs.iter().cloned());
        per_period.push(vs);
        dims.push(rank(&all));
    }
    Ok((RankGrowth { dims }, per_period))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PcfBudgets {
    pub step_budget: usize,
    pub height_budget_bits: u64,
    pub rank_period: usize,
}

impl Default for PcfBudgets {
    fn default() -> Self {
        PcfBudgets { step_budget: 64, height_budget_bits: 4096, rank_period: 3 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Verdict {
    #[serde(rename = "PCF")]
    Pcf,
    LikelyNonPCF,
    Unknown,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Classification {
    pub verdict: Verdict,
    pub orbits: Option<CriticalOrbitReport>,
    pub rank_growth: Option<RankGrowth>,
    pub evidence: Vec<String>,
}

/// PCF when every critical orbit closes exactly; likely non-PCF when some
/// orbit is open with at least 10 consecutive height increases and the rank
/// of the norm vectors strictly grows; unknown otherwise.
pub fn classify(f: &RationalMap, budgets: &PcfBudgets) -> Classification {
    let mut evidence = Vec::new();
    let orbits = match critical_orbits(f, budgets.step_budget, budgets.height_budget_bits) {
        Ok(r) => r,
        Err(e) => {
            evidence.push(format!("critical orbits unavailable: {e}"));
            return Classification { verdict: Verdict::Unknown, orbits: None, rank_growth: None, evidence };
        }
    };
    if orbits.all_finite() {
        for o in &orbits.orbits {
            evidence.push(format!(
                "critical class {} closes after {} steps",
                o.class.id,
                o.orbit.len()
            ));
        }
        return Classification { verdict: Verdict::Pcf, orbits: Some(orbits), rank_growth: None, evidence };
    }
    let growing = orbits.orbits.iter().find(|o| o.status.increasing_run() >= 10);
    let rg = match rank_growth(f, budgets.rank_period) {
        Ok(r) => Some(r),
        Err(e) => {
            evidence.push(format!("rank growth unavailable: {e}"));
            None
        }
    };
    let verdict = match (growing, &rg) {
        (Some(o), Some(r)) if r.strictly_increases() => {
            evidence.push(format!(
                "critical class {} has {} consecutive height increases",
                o.class.id,
                o.status.increasing_run()
            ));
            evidence.push(format!("rank growth {:?} strictly increases", r.dims));
            Verdict::LikelyNonPCF
        }
        _ => {
            evidence.push("no open orbit with sustained height growth and rank increase".into());
            Verdict::Unknown
        }
    };
    Classification { verdict, orbits: Some(orbits), rank_growth: rg, evidence }
}

/// Exact rational points of the periodic critical orbits (used as the
/// excluded set by the sieve).
pub fn periodic_critical_points(report: &CriticalOrbitReport) -> Vec<crate::map::ProjPoint> {
    let mut out = Vec::new();
    for o in &report.orbits {
        if !matches!(o.status, OrbitStatus::Periodic { .. }) || o.exactness != Exactness::Rational {
            continue;
        }
        for s in &o.orbit {
            if s == "inf" {
                out.push(crate::map::ProjPoint::Infinity);
            } else if let Ok(q) = s.parse::<BigRational>() {
                out.push(crate::map::ProjPoint::Finite(q));
            }
        }
    }
    out
}
