//! Numeric multipliers, characteristic exponents, Lyapunov exponents and
//! equidistribution gaps.

use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::roots::{aberth, circle, complex_roots_prec};
use super::{normalize, HomMap};
use crate::error::{Error, Result};
use crate::map::RationalMap;
use crate::spectrum::SpectrumEngine;

pub const DEFAULT_BURN_IN: usize = 50;

/// Multiplier and characteristic exponent at one periodic point.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NumericMultiplier {
    /// Affine coordinate of the point; meaningless when `at_infinity`.
    #[serde(serialize_with = "crate::serial::complex")]
    pub point: Complex64,
    pub at_infinity: bool,
    #[serde(serialize_with = "crate::serial::complex")]
    pub rho: Complex64,
    /// `n^-1 log |rho|` in nats; `-inf` at superattracting points.
    pub chi: f64,
}

/// Multiplier of `f^n` at a point, as a product of chart derivatives
/// along the orbit: each factor is `J s^2 / (d t^2)` where `s` and `t` are
/// the chart denominators of the source and target points.
fn orbit_multiplier(h: &HomMap, x0: Complex64, y0: Complex64, n: usize) -> Complex64 {
    let d = h.degree as f64;
    let (mut x, mut y) = normalize(x0, y0);
    let chart0 = x.norm() > y.norm();
    let mut chart = chart0;
    let mut rho = Complex64::new(1.0, 0.0);
    for i in 0..n {
        let jet = h.jet(x, y);
        let next_chart = if i + 1 == n { chart0 } else { jet.p.norm() > jet.q.norm() };
        let s = if chart { x } else { y };
        let t = if next_chart { jet.p } else { jet.q };
        rho *= jet.jacobian() * s * s / (t * t * d);
        let (nx, ny) = normalize(jet.p, jet.q);
        x = nx;
        y = ny;
        chart = next_chart;
    }
    rho
}

/// Image of `[x0 : y0]` under `f^n`, normalized.
fn orbit_end(h: &HomMap, x0: Complex64, y0: Complex64, n: usize) -> (Complex64, Complex64) {
    let (mut x, mut y) = normalize(x0, y0);
    for _ in 0..n {
        let jet = h.jet(x, y);
        (x, y) = normalize(jet.p, jet.q);
    }
    (x, y)
}

/// Newton on `f^n(u) = u` in the affine chart of the starting point. The
/// root finder works on a high-degree form whose roots can be poorly
/// conditioned; this iteration only depends on `|rho - 1|`.
fn refine_periodic(h: &HomMap, x0: Complex64, y0: Complex64, n: usize) -> (Complex64, Complex64) {
    let one = Complex64::new(1.0, 0.0);
    let big_x = x0.norm() > y0.norm();
    let coord = |x: Complex64, y: Complex64| if big_x { y / x } else { x / y };
    let point = |u: Complex64| if big_x { (one, u) } else { (u, one) };
    let mut u = coord(x0, y0);
    let residual = |u: Complex64| {
        let (px, py) = point(u);
        let (ex, ey) = orbit_end(h, px, py, n);
        coord(ex, ey) - u
    };
    let mut r = residual(u);
    for _ in 0..6 {
        if !r.is_finite() || r.norm() <= 1e-16 * u.norm().max(1.0) {
            break;
        }
        let (px, py) = point(u);
        let rho = orbit_multiplier(h, px, py, n);
        let step = r / (rho - one);
        let next = u + step;
        let rn = residual(next);
        if !rn.is_finite() || rn.norm() >= r.norm() {
            break;
        }
        u = next;
        r = rn;
    }
    point(u)
}

/// Chain-rule multipliers at every root of the exact-period form of
/// period `n`, counted with multiplicity.
pub fn multipliers_numeric(f: &RationalMap, n: usize) -> Result<Vec<NumericMultiplier>> {
    let mut engine = SpectrumEngine::new(f);
    let form = engine.exact_period_form(n)?.form;
    let h = HomMap::new(f);
    let mut points: Vec<(Complex64, Complex64, bool)> = Vec::new();
    if form.poly.deg() > 0 {
        for z in complex_roots_prec(&form.poly, 106)?.roots {
            points.push((z, Complex64::new(1.0, 0.0), false));
        }
    }
    for _ in 0..form.infinity_multiplicity() {
        points.push((Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0), true));
    }
    Ok(points
        .into_iter()
        .map(|(x, y, inf)| {
            let (rx, ry) = if inf { (x, y) } else { refine_periodic(&h, x, y, n) };
            let rho = orbit_multiplier(&h, rx, ry, n);
            NumericMultiplier {
                point: if inf { Complex64::new(0.0, 0.0) } else { rx / ry },
                at_infinity: inf,
                rho,
                chi: rho.norm().ln() / n as f64,
            }
        })
        .collect())
}

/// Spherical derivative `|J| (|x|^2 + |y|^2) / (d (|P|^2 + |Q|^2))` of `f`
/// at the point `[x : y]`.
pub fn spherical_derivative(f: &RationalMap, x: Complex64, y: Complex64) -> f64 {
    spherical_derivative_h(&HomMap::new(f), x, y)
}

fn spherical_derivative_h(h: &HomMap, x: Complex64, y: Complex64) -> f64 {
    let (x, y) = normalize(x, y);
    let j = h.jet(x, y);
    j.jacobian().norm() * (x.norm_sqr() + y.norm_sqr()) / (h.degree as f64 * (j.p.norm_sqr() + j.q.norm_sqr()))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LyapunovEstimate {
    /// Mean of the log spherical derivative, in nats.
    pub value: f64,
    pub stderr: f64,
    pub samples: usize,
    pub burn_in: usize,
    pub seed: u64,
}

/// Roots of the binary form `sum c_i W^i Z^(d-i)` as normalized pairs,
/// solving in whichever chart keeps the leading coefficient large.
fn form_roots(c: &[Complex64]) -> Vec<(Complex64, Complex64)> {
    let d = c.len() - 1;
    let one = Complex64::new(1.0, 0.0);
    let flip = c[0].norm() > c[d].norm();
    let coeffs: Vec<Complex64> = if flip { c.iter().rev().copied().collect() } else { c.to_vec() };
    let lead = coeffs[d];
    let monic: Vec<Complex64> = coeffs.iter().map(|a| a / lead).collect();
    let ws = if d == 1 {
        vec![-monic[0]]
    } else if d == 2 {
        let (b, cc) = (monic[1], monic[0]);
        let disc = (b * b - cc * 4.0).sqrt();
        let q = if (b.conj() * disc).re >= 0.0 { -(b + disc) / 2.0 } else { -(b - disc) / 2.0 };
        if q.norm() == 0.0 {
            vec![Complex64::new(0.0, 0.0); 2]
        } else {
            vec![q, cc / q]
        }
    } else {
        let radius = monic[0].norm().powf(1.0 / d as f64).max(1e-3);
        let ratio = |z: Complex64| {
            let (mut p, mut dp) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
            for a in monic.iter().rev() {
                dp = dp * z + p;
                p = p * z + a;
            }
            p / dp
        };
        aberth(circle(d, radius), ratio, 500)
    };
    ws.into_iter()
        .map(|w| if flip { normalize(one, w) } else { normalize(w, one) })
        .collect()
}

/// Backward random orbit: `burn_in + samples` steps, each choosing one of
/// the `d` preimages uniformly; the retained points follow the burn-in.
fn backward_orbit(h: &HomMap, samples: usize, burn_in: usize, seed: u64) -> Vec<(Complex64, Complex64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = h.degree;
    let mut pt = normalize(Complex64::new(0.3711, 0.2237), Complex64::new(1.0, 0.0));
    let mut out = Vec::with_capacity(samples);
    for step in 0..burn_in + samples {
        // preimages of [x : y]: y P(W, Z) - x Q(W, Z) = 0
        let c: Vec<Complex64> = (0..=d).map(|i| pt.1 * h.p[i] - pt.0 * h.q[i]).collect();
        let pre = form_roots(&c);
        let k = rng.random_range(0..pre.len());
        pt = pre[k];
        if step >= burn_in {
            out.push(pt);
        }
    }
    out
}

/// Lyapunov exponent with respect to the maximal-entropy measure, sampled
/// by backward iteration.
pub fn lyapunov_estimate(f: &RationalMap, samples: usize, burn_in: usize, seed: u64) -> Result<LyapunovEstimate> {
    if samples == 0 || burn_in == 0 {
        return Err(Error::InvalidInput("samples and burn-in must be positive".into()));
    }
    let h = HomMap::new(f);
    let logs: Vec<f64> = backward_orbit(&h, samples, burn_in, seed)
        .into_iter()
        .map(|(x, y)| spherical_derivative_h(&h, x, y).ln())
        .filter(|v| v.is_finite())
        .collect();
    if logs.is_empty() {
        return Err(Error::Internal("no finite Lyapunov samples".into()));
    }
    let (mean, sd) = mean_sd(&logs);
    Ok(LyapunovEstimate {
        value: mean,
        stderr: sd / (logs.len() as f64).sqrt(),
        samples,
        burn_in,
        seed,
    })
}

fn mean_sd(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (mean, 0.0);
    }
    let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Smooth test functions on the sphere, in terms of the coordinates
/// `(X1, X2, X3) = (2 Re z, 2 Im z, |z|^2 - 1) / (|z|^2 + 1)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TestFunction {
    Const,
    Coord1,
    Coord2,
    Coord3,
    Coord1Sq,
    Coord3Sq,
}

impl TestFunction {
    pub const ALL: [TestFunction; 6] = [
        TestFunction::Const,
        TestFunction::Coord1,
        TestFunction::Coord2,
        TestFunction::Coord3,
        TestFunction::Coord1Sq,
        TestFunction::Coord3Sq,
    ];

    pub fn id(&self) -> &'static str {
        match self {
            TestFunction::Const => "const",
            TestFunction::Coord1 => "coord1",
            TestFunction::Coord2 => "coord2",
            TestFunction::Coord3 => "coord3",
            TestFunction::Coord1Sq => "coord1sq",
            TestFunction::Coord3Sq => "coord3sq",
        }
    }

    /// Value at the point `[x : y]`.
    pub fn eval(&self, x: Complex64, y: Complex64) -> f64 {
        let (x, y) = normalize(x, y);
        let den = x.norm_sqr() + y.norm_sqr();
        let xy = x * y.conj();
        let c1 = 2.0 * xy.re / den;
        let c2 = 2.0 * xy.im / den;
        let c3 = (x.norm_sqr() - y.norm_sqr()) / den;
        match self {
            TestFunction::Const => 1.0,
            TestFunction::Coord1 => c1,
            TestFunction::Coord2 => c2,
            TestFunction::Coord3 => c3,
            TestFunction::Coord1Sq => c1 * c1,
            TestFunction::Coord3Sq => c3 * c3,
        }
    }
}

impl FromStr for TestFunction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        TestFunction::ALL
            .into_iter()
            .find(|t| t.id() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown test function {s:?}")))
    }
}

/// Fixed rotation used to move infinity off the periodic points.
const CONJ_C: Complex64 = Complex64::new(0.3137, 0.2718);

/// All `d^n + 1` fixed points of `f^n` as normalized pairs, found by Aberth
/// iteration on the fixed-point equation of the conjugate
/// `g = m f m^-1`, `m(z) = 1/(z - c)`, evaluated by iterating the
/// homogeneous lift with forward-mode derivatives.
pub fn fixed_points_numeric(f: &RationalMap, n: usize) -> Result<Vec<(Complex64, Complex64)>> {
    if n == 0 {
        return Err(Error::InvalidInput("period must be at least 1".into()));
    }
    let h = HomMap::new(f);
    let total = (h.degree as u64)
        .checked_pow(n as u32)
        .and_then(|v| v.checked_add(1))
        .filter(|&v| v <= 1 << 16)
        .ok_or_else(|| Error::BudgetExceeded(format!("numeric period {n} too large")))? as usize;
    let c = CONJ_C;
    let one = Complex64::new(1.0, 0.0);
    let ratio = |w: Complex64| -> Complex64 {
        // m^-1(w) = (c w + 1) / w
        let (mut x, mut y) = (c * w + one, w);
        let (mut dx, mut dy) = (c, one);
        for _ in 0..n {
            let j = h.jet(x, y);
            let ndx = j.px * dx + j.py * dy;
            let ndy = j.qx * dx + j.qy * dy;
            let s = j.p.norm().max(j.q.norm());
            let s = if s > 0.0 { 1.0 / s } else { 1.0 };
            x = j.p * s;
            y = j.q * s;
            dx = ndx * s;
            dy = ndy * s;
        }
        // m(X, Y) = (Y, X - c Y); fixed points of g^n: X' - w Y' = 0
        let (mx, my) = (y, x - c * y);
        let (mdx, mdy) = (dy, dx - c * dy);
        let phi = mx - w * my;
        let dphi = mdx - my - w * mdy;
        phi / dphi
    };
    let init: Vec<Complex64> = circle(total, 1.0).into_iter().map(|z| (z - c).inv()).collect();
    let ws = aberth(init, ratio, 800);
    let worst = ws
        .iter()
        .map(|&w| ratio(w).norm() / w.norm().max(1.0))
        .fold(0.0f64, |a, b| if b.is_nan() { f64::INFINITY } else { a.max(b) });
    if worst > 1e-8 {
        return Err(Error::NonConvergence { residual: worst });
    }
    Ok(ws.into_iter().map(|w| normalize(c * w + one, w)).collect())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EquidistReport {
    pub gap: f64,
    /// Equal-weight average over the fixed points of `f^n`.
    pub fixed_point_average: f64,
    /// Monte Carlo estimate of the integral against the equilibrium measure.
    pub measure_estimate: f64,
    pub fixed_points: usize,
    pub test_function: TestFunction,
}

/// Distance between the periodic-point average of a test function and its
/// equilibrium-measure integral.
pub fn equidist_gap(f: &RationalMap, n: usize, g: TestFunction, samples: usize, seed: u64) -> Result<EquidistReport> {
    if samples == 0 {
        return Err(Error::InvalidInput("samples must be positive".into()));
    }
    let pts = fixed_points_numeric(f, n)?;
    let fix_avg = pts.iter().map(|&(x, y)| g.eval(x, y)).sum::<f64>() / pts.len() as f64;
    let h = HomMap::new(f);
    let mc = backward_orbit(&h, samples, DEFAULT_BURN_IN, seed);
    let mu = mc.iter().map(|&(x, y)| g.eval(x, y)).sum::<f64>() / mc.len() as f64;
    let gap = if g == TestFunction::Const { 0.0 } else { (fix_avg - mu).abs() };
    Ok(EquidistReport {
        gap,
        fixed_point_average: fix_avg,
        measure_estimate: mu,
        fixed_points: pts.len(),
        test_function: g,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChiEntry {
    pub period: usize,
    /// Largest characteristic exponent among exact-period points.
    pub max_chi: f64,
    /// Mean over repelling exact-period points; `None` if there are none.
    pub mean_repelling_chi: Option<f64>,
    pub repelling_points: usize,
}

/// Characteristic-exponent summary for periods `1..=nmax`.
pub fn chi_sequence(f: &RationalMap, nmax: usize) -> Result<Vec<ChiEntry>> {
    (1..=nmax)
        .map(|n| {
            let ms = multipliers_numeric(f, n)?;
            let max_chi = ms.iter().map(|m| m.chi).fold(f64::NEG_INFINITY, f64::max);
            let rep: Vec<f64> = ms.iter().filter(|m| m.rho.norm() > 1.0).map(|m| m.chi).collect();
            Ok(ChiEntry {
                period: n,
                max_chi,
                mean_repelling_chi: (!rep.is_empty()).then(|| rep.iter().sum::<f64>() / rep.len() as f64),
                repelling_points: rep.len(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::LN_2;

    fn map(num: &[i64], den: &[i64]) -> RationalMap {
        RationalMap::from_i64s(num, den).unwrap()
    }

    #[test]
    fn multipliers_of_basic_maps() {
        let sq = map(&[0, 0, 1], &[1]);
        let ms = multipliers_numeric(&sq, 3).unwrap();
        assert_eq!(ms.len(), 6);
        assert!(ms.iter().all(|m| (m.chi - LN_2).abs() < 1e-9));
        let f = map(&[1, 0, 1], &[1]);
        let ms = multipliers_numeric(&f, 2).unwrap();
        assert_eq!(ms.len(), 2);
        assert!(ms.iter().all(|m| (m.rho - 8.0).norm() < 1e-9));
        let ms1 = multipliers_numeric(&f, 1).unwrap();
        let affine: Vec<_> = ms1.iter().filter(|m| !m.at_infinity).collect();
        assert!(affine.iter().all(|m| (m.chi - LN_2).abs() < 1e-9));
        let inf = ms1.iter().find(|m| m.at_infinity).unwrap();
        assert!(inf.rho.norm() < 1e-12);
    }

    #[test]
    fn lattes_fixed_point_at_infinity() {
        let fl = map(&[1, 0, 2, 0, 1], &[0, -4, 0, 4]);
        let ms = multipliers_numeric(&fl, 1).unwrap();
        let inf = ms.iter().find(|m| m.at_infinity).unwrap();
        assert!((inf.rho - 4.0).norm() < 1e-9, "{}", inf.rho);
    }

    #[test]
    fn period_three_cycle_products() {
        let f = map(&[1, 0, 1], &[1]);
        let e3 = SpectrumEngine::new(&f).exact_period_form(3).unwrap().form;
        let roots = super::super::roots::complex_roots(&e3.poly, 1e-12).unwrap().roots;
        let prod: Complex64 = roots.iter().product();
        assert!((prod - 5.0).norm() < 1e-9);
    }

    #[test]
    fn lyapunov_reproducible_and_close() {
        let sq = map(&[0, 0, 1], &[1]);
        let a = lyapunov_estimate(&sq, 2000, 50, 7).unwrap();
        let b = lyapunov_estimate(&sq, 2000, 50, 7).unwrap();
        assert_eq!(a, b);
        assert!((a.value - LN_2).abs() < 1e-6);
    }

    #[test]
    fn fixed_points_by_evaluation() {
        let f = map(&[1, 0, 1], &[1]);
        let pts = fixed_points_numeric(&f, 3).unwrap();
        assert_eq!(pts.len(), 9);
        let inf = pts.iter().filter(|(_, y)| y.norm() < 1e-8).count();
        assert_eq!(inf, 1);
        let rep = equidist_gap(&f, 3, TestFunction::Const, 100, 1).unwrap();
        assert_eq!(rep.gap, 0.0);
    }

    #[test]
    fn test_function_ids_round_trip() {
        for t in TestFunction::ALL {
            assert_eq!(t.id().parse::<TestFunction>().unwrap(), t);
        }
        assert!("nope".parse::<TestFunction>().is_err());
    }
}
