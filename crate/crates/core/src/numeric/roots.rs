//! Simultaneous root finding (Aberth–Ehrlich) in double precision with a
//! fixed-point big-integer Newton retry.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{FromPrimitive, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::poly::IntPoly;

/// Approximate roots of an integer polynomial.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComplexRootSet {
    /// One entry per root counted with multiplicity.
    #[serde(serialize_with = "crate::serial::complexes")]
    pub roots: Vec<Complex64>,
    /// Roots grouped into clusters; a cluster of size > 1 is a multiple
    /// root estimate.
    pub clusters: Vec<RootCluster>,
    /// Largest normwise backward error `|a(r)| / sum |a_i| |r|^i`.
    pub max_residual: f64,
    /// Working precision that produced the roots.
    pub precision_bits: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RootCluster {
    #[serde(serialize_with = "crate::serial::complex")]
    pub center: Complex64,
    pub multiplicity: usize,
}

/// Tolerance used for a requested working precision in bits.
pub fn tolerance_for_bits(bits: u32) -> f64 {
    2f64.powf(-0.7 * bits as f64)
}

/// Roots of `a` with residual at most `tol`. Falls back to Newton
/// polishing at 106 and then 212 bits when double precision is not enough.
pub fn complex_roots(a: &IntPoly, tol: f64) -> Result<ComplexRootSet> {
    roots_impl(a, tol, 53)
}

/// [`complex_roots`] with the tolerance derived from a bit precision;
/// precisions above 53 start directly with the high-precision polish.
pub fn complex_roots_prec(a: &IntPoly, bits: u32) -> Result<ComplexRootSet> {
    roots_impl(a, tolerance_for_bits(bits), bits)
}

fn roots_impl(a: &IntPoly, tol: f64, bits: u32) -> Result<ComplexRootSet> {
    if a.deg() == 0 || a.is_zero() {
        return Err(Error::InvalidInput("root finding needs degree >= 1".into()));
    }
    let zeros = a.coeffs().iter().take_while(|c| c.is_zero()).count();
    let core = IntPoly::new(a.coeffs()[zeros..].to_vec());
    let mut roots = vec![Complex64::new(0.0, 0.0); zeros];
    if core.deg() == 0 {
        return Ok(finish(roots, 0.0, 53));
    }
    let coeffs = scaled_f64(&core);
    let approx = if core.deg() == 1 {
        vec![Complex64::new(-coeffs[0] / coeffs[1], 0.0)]
    } else if core.deg() == 2 {
        quadratic(&coeffs)
    } else {
        aberth_poly(&coeffs)
    };
    let res = max_residual_f64(&coeffs, &approx);
    if res <= tol && bits <= 53 {
        roots.extend(approx);
        return Ok(finish(roots, res, 53));
    }
    let mut best = res;
    let mut current = approx;
    for prec in [106u32, 212] {
        if prec < bits && prec != 212 {
            continue;
        }
        let (polished, r) = polish_fixed(&core, &current, prec);
        best = best.min(r);
        current = polished;
        if r <= tol {
            roots.extend(current);
            return Ok(finish(roots, r, prec));
        }
    }
    Err(Error::NonConvergence { residual: best })
}

fn finish(mut roots: Vec<Complex64>, max_residual: f64, precision_bits: u32) -> ComplexRootSet {
    roots.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));
    let clusters = cluster(&roots, 1e-4);
    ComplexRootSet {
        roots,
        clusters,
        max_residual,
        precision_bits,
    }
}

/// Single-linkage clustering with relative radius `rel`.
fn cluster(roots: &[Complex64], rel: f64) -> Vec<RootCluster> {
    let n = roots.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], i: usize) -> usize {
        let mut i = i;
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    for i in 0..n {
        for j in i + 1..n {
            let scale = roots[i].norm().max(roots[j].norm()).max(1.0);
            if (roots[i] - roots[j]).norm() <= rel * scale {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                parent[a] = b;
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<Complex64>> = Default::default();
    for (i, r) in roots.iter().enumerate() {
        let root = find(&mut parent, i);
        groups.entry(root).or_default().push(*r);
    }
    groups
        .into_values()
        .map(|g| RootCluster {
            center: g.iter().sum::<Complex64>() / g.len() as f64,
            multiplicity: g.len(),
        })
        .collect()
}

/// Coefficients as `f64` after a common power-of-two scaling.
fn scaled_f64(a: &IntPoly) -> Vec<f64> {
    let top = a.coeffs().iter().map(|c| c.bits()).max().unwrap_or(0);
    let shift = top.saturating_sub(960);
    a.coeffs()
        .iter()
        .map(|c| {
            let s: BigInt = if shift > 0 { c >> shift } else { c.clone() };
            s.to_f64().expect("finite after scaling")
        })
        .collect()
}

fn quadratic(c: &[f64]) -> Vec<Complex64> {
    let (a, b, cc) = (c[2], c[1], c[0]);
    let disc = Complex64::new(b * b - 4.0 * a * cc, 0.0).sqrt();
    // avoid cancellation
    let q = if b >= 0.0 { -(b + disc) / 2.0 } else { -(b - disc) / 2.0 };
    if q.norm() == 0.0 {
        return vec![Complex64::new(0.0, 0.0); 2];
    }
    vec![q / a, cc / q]
}

/// Newton ratio `a(z)/a'(z)`, evaluated through the reversed polynomial
/// outside the unit disc.
fn newton_ratio(c: &[f64], z: Complex64) -> Complex64 {
    let n = c.len() - 1;
    if z.norm() <= 1.0 {
        let (mut p, mut dp) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
        for &ci in c.iter().rev() {
            dp = dp * z + p;
            p = p * z + ci;
        }
        p / dp
    } else {
        let w = z.inv();
        let (mut r, mut dr) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
        for &ci in c.iter() {
            dr = dr * w + r;
            r = r * w + ci;
        }
        z * r / (r * n as f64 - w * dr)
    }
}

/// Normwise backward error of `z` as a root.
fn residual_f64(c: &[f64], z: Complex64) -> f64 {
    let (w, coeffs): (Complex64, Vec<f64>) = if z.norm() <= 1.0 {
        (z, c.to_vec())
    } else {
        (z.inv(), c.iter().rev().copied().collect())
    };
    let (mut p, mut s) = (Complex64::new(0.0, 0.0), 0.0f64);
    let wn = w.norm();
    for &ci in coeffs.iter().rev() {
        p = p * w + ci;
        s = s * wn + ci.abs();
    }
    if s == 0.0 {
        0.0
    } else {
        p.norm() / s
    }
}

fn max_residual_f64(c: &[f64], roots: &[Complex64]) -> f64 {
    roots.iter().map(|&z| residual_f64(c, z)).fold(0.0, f64::max)
}

fn aberth_poly(c: &[f64]) -> Vec<Complex64> {
    let n = c.len() - 1;
    let lead = c[n].abs();
    let tail = c[0].abs();
    let radius = if tail > 0.0 && lead > 0.0 {
        (tail / lead).powf(1.0 / n as f64)
    } else {
        1.0
    };
    let init = circle(n, radius);
    aberth(init, |z| newton_ratio(c, z), 2000)
}

/// Starting points on a circle, offset so no point is real.
pub(crate) fn circle(n: usize, radius: f64) -> Vec<Complex64> {
    (0..n)
        .map(|k| Complex64::from_polar(radius, 0.4 + std::f64::consts::TAU * k as f64 / n as f64))
        .collect()
}

/// Aberth–Ehrlich iteration for `init.len()` simultaneous roots of a
/// function given by its Newton ratio. Converged roots are frozen.
pub(crate) fn aberth<F: Fn(Complex64) -> Complex64>(mut z: Vec<Complex64>, ratio: F, max_iter: usize) -> Vec<Complex64> {
    let n = z.len();
    let mut done = vec![false; n];
    for _ in 0..max_iter {
        let mut active = false;
        for k in 0..n {
            if done[k] {
                continue;
            }
            let nr = ratio(z[k]);
            if !nr.is_finite() {
                done[k] = true;
                continue;
            }
            let mut s = Complex64::new(0.0, 0.0);
            for (j, zj) in z.iter().enumerate() {
                if j != k {
                    s += (z[k] - zj).inv();
                }
            }
            let denom = Complex64::new(1.0, 0.0) - nr * s;
            let step = if denom.norm() == 0.0 || !denom.is_finite() { nr } else { nr / denom };
            if !step.is_finite() {
                done[k] = true;
                continue;
            }
            z[k] -= step;
            if step.norm() <= 4.0 * f64::EPSILON * z[k].norm().max(1e-300) {
                done[k] = true;
            } else {
                active = true;
            }
        }
        if !active {
            break;
        }
    }
    z
}

/// Complex fixed-point number with `prec` fractional bits.
#[derive(Clone, Debug)]
struct Fx {
    re: BigInt,
    im: BigInt,
}

impl Fx {
    fn from_c(z: Complex64, prec: u32) -> Fx {
        let s = 2f64.powi(prec as i32);
        Fx {
            re: BigInt::from_f64((z.re * s).round()).unwrap_or_default(),
            im: BigInt::from_f64((z.im * s).round()).unwrap_or_default(),
        }
    }

    fn to_c(&self, prec: u32) -> Complex64 {
        Complex64::new(scaled_to_f64(&self.re, prec), scaled_to_f64(&self.im, prec))
    }

    fn add(&self, o: &Fx) -> Fx {
        Fx { re: &self.re + &o.re, im: &self.im + &o.im }
    }

    fn sub(&self, o: &Fx) -> Fx {
        Fx { re: &self.re - &o.re, im: &self.im - &o.im }
    }

    fn mul(&self, o: &Fx, prec: u32) -> Fx {
        Fx {
            re: (&self.re * &o.re - &self.im * &o.im) >> prec,
            im: (&self.re * &o.im + &self.im * &o.re) >> prec,
        }
    }

    fn div(&self, o: &Fx, prec: u32) -> Option<Fx> {
        let den = &o.re * &o.re + &o.im * &o.im;
        if den.is_zero() {
            return None;
        }
        let re = &self.re * &o.re + &self.im * &o.im;
        let im = &self.im * &o.re - &self.re * &o.im;
        Some(Fx { re: (re << prec) / &den, im: (im << prec) / &den })
    }

    fn ln_norm(&self, prec: u32) -> f64 {
        let sq = &self.re * &self.re + &self.im * &self.im;
        0.5 * ln_big(&sq) - prec as f64 * std::f64::consts::LN_2
    }
}

fn scaled_to_f64(x: &BigInt, prec: u32) -> f64 {
    let bits = x.bits();
    if bits > 900 {
        let sh = bits - 900;
        (x >> sh).to_f64().unwrap_or(0.0) * 2f64.powi(sh as i32 - prec as i32)
    } else {
        x.to_f64().unwrap_or(0.0) / 2f64.powi(prec as i32)
    }
}

/// Natural log of `|x|`, `-inf` for zero.
fn ln_big(x: &BigInt) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = x.bits();
    if bits > 1000 {
        let sh = bits - 1000;
        (x.abs() >> sh).to_f64().expect("finite").ln() + sh as f64 * std::f64::consts::LN_2
    } else {
        x.abs().to_f64().expect("finite").ln()
    }
}

/// Newton polishing of every root at `prec` bits; returns the roots and the
/// largest backward error measured at that precision.
/// Aberth iteration with the Newton ratio evaluated in fixed point at
/// `prec` bits; the repulsion sum only scales the step and stays in `f64`.
/// Returns the roots and the worst normwise backward error.
fn polish_fixed(a: &IntPoly, roots: &[Complex64], prec: u32) -> (Vec<Complex64>, f64) {
    let coeffs: Vec<Fx> = a
        .coeffs()
        .iter()
        .map(|c| Fx { re: c << prec, im: BigInt::zero() })
        .collect();
    let ln_abs: Vec<f64> = a.coeffs().iter().map(ln_big).collect();
    let n = roots.len();
    let mut fx: Vec<Fx> = roots.iter().map(|&r| Fx::from_c(r, prec)).collect();
    let mut approx: Vec<Complex64> = roots.to_vec();
    let mut done = vec![false; n];
    let one = Complex64::new(1.0, 0.0);
    for _ in 0..120 {
        if done.iter().all(|&d| d) {
            break;
        }
        for i in 0..n {
            if done[i] {
                continue;
            }
            let (p, dp) = horner(&coeffs, &fx[i], prec);
            let Some(ratio) = p.div(&dp, prec) else {
                done[i] = true;
                continue;
            };
            let rc = ratio.to_c(prec);
            let rep: Complex64 = (0..n)
                .filter(|&j| j != i)
                .map(|j| one / (approx[i] - approx[j]))
                .filter(|z| z.is_finite())
                .sum();
            let denom = one - rc * rep;
            let step = if denom.is_finite() && denom.norm() > 1e-12 {
                ratio.div(&Fx::from_c(denom, prec), prec).unwrap_or(ratio)
            } else {
                ratio
            };
            fx[i] = fx[i].sub(&step);
            approx[i] = fx[i].to_c(prec);
            let lstep = step.ln_norm(prec);
            let lr = fx[i].ln_norm(prec).max(0.0);
            if lstep < lr - (prec as f64 - 8.0) * std::f64::consts::LN_2 {
                done[i] = true;
            }
        }
    }
    let mut worst = 0f64;
    for r in &fx {
        let val = horner(&coeffs, r, prec).0;
        let lr = r.ln_norm(prec);
        let lsum = log_sum_exp(ln_abs.iter().enumerate().map(|(i, &l)| l + i as f64 * lr));
        worst = worst.max((val.ln_norm(prec) - lsum).exp());
    }
    (approx, worst)
}

fn horner(c: &[Fx], z: &Fx, prec: u32) -> (Fx, Fx) {
    let zero = Fx { re: BigInt::zero(), im: BigInt::zero() };
    let (mut p, mut dp) = (zero.clone(), zero);
    for ci in c.iter().rev() {
        dp = dp.mul(z, prec).add(&p);
        p = p.mul(z, prec).add(ci);
    }
    (p, dp)
}

fn log_sum_exp<I: Iterator<Item = f64>>(it: I) -> f64 {
    let v: Vec<f64> = it.filter(|x| x.is_finite()).collect();
    let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simple_roots() {
        let r = complex_roots(&IntPoly::from_i64s(&[1, 0, 1]), 1e-12).unwrap();
        assert_eq!(r.roots.len(), 2);
        assert!((r.roots[0] - Complex64::new(0.0, -1.0)).norm() < 1e-12);
        assert!((r.roots[1] - Complex64::new(0.0, 1.0)).norm() < 1e-12);
    }

    #[test]
    fn triple_root_is_clustered() {
        let r = complex_roots(&IntPoly::from_i64s(&[-1, 3, -3, 1]), 1e-12).unwrap();
        assert_eq!(r.clusters.len(), 1);
        assert_eq!(r.clusters[0].multiplicity, 3);
        assert!((r.clusters[0].center - 1.0).norm() < 1e-4);
    }

    #[test]
    fn wilkinson_like_needs_polish() {
        let mut a = IntPoly::one();
        for k in 1..=20 {
            a = &a * &IntPoly::from_i64s(&[-k, 1]);
        }
        let r = complex_roots(&a, 1e-30).unwrap();
        assert!(r.precision_bits > 53);
        for (k, z) in r.roots.iter().enumerate() {
            assert!((z - (k + 1) as f64).norm() < 1e-9, "{z}");
        }
    }

    #[test]
    fn zero_roots_and_errors() {
        let r = complex_roots(&IntPoly::from_i64s(&[0, 0, -2, 1]), 1e-12).unwrap();
        assert_eq!(r.roots.iter().filter(|z| z.norm() == 0.0).count(), 2);
        assert!(complex_roots(&IntPoly::from_i64s(&[3]), 1e-12).is_err());
    }
}
