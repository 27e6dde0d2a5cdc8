//! Floating-point dynamics: root finding, numeric multipliers,
//! Lyapunov exponents and equidistribution of periodic points.

mod dynamics;
mod roots;

pub use dynamics::{
    chi_sequence, equidist_gap, fixed_points_numeric, lyapunov_estimate, multipliers_numeric,
    spherical_derivative, ChiEntry, EquidistReport, LyapunovEstimate, NumericMultiplier, TestFunction,
    DEFAULT_BURN_IN,
};
pub use roots::{complex_roots, complex_roots_prec, tolerance_for_bits, ComplexRootSet, RootCluster};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::ToPrimitive;

use crate::map::RationalMap;

/// Homogeneous lift `F = (P, Q)` with double-precision coefficients.
#[derive(Clone, Debug)]
pub struct HomMap {
    pub degree: usize,
    p: Vec<f64>,
    q: Vec<f64>,
}

/// Values and first partials of `P` and `Q` at a point.
#[derive(Clone, Copy, Debug)]
pub struct HomJet {
    pub p: Complex64,
    pub q: Complex64,
    pub px: Complex64,
    pub py: Complex64,
    pub qx: Complex64,
    pub qy: Complex64,
}

impl HomJet {
    /// Jacobian determinant `P_X Q_Y - P_Y Q_X`.
    pub fn jacobian(&self) -> Complex64 {
        self.px * self.qy - self.py * self.qx
    }
}

impl HomMap {
    pub fn new(f: &RationalMap) -> Self {
        let d = f.degree();
        let top = f
            .num()
            .coeffs()
            .iter()
            .chain(f.den().coeffs())
            .map(|c| c.bits())
            .max()
            .unwrap_or(0);
        let shift = top.saturating_sub(900);
        let conv = |c: &BigInt| -> f64 {
            let s: BigInt = if shift > 0 { c >> shift } else { c.clone() };
            s.to_f64().expect("finite")
        };
        let pad = |v: &[BigInt]| -> Vec<f64> {
            let mut out: Vec<f64> = v.iter().map(conv).collect();
            out.resize(d + 1, 0.0);
            out
        };
        HomMap {
            degree: d,
            p: pad(f.num().coeffs()),
            q: pad(f.den().coeffs()),
        }
    }

    /// `(P(x, y), Q(x, y))`.
    pub fn eval(&self, x: Complex64, y: Complex64) -> (Complex64, Complex64) {
        let j = self.jet(x, y);
        (j.p, j.q)
    }

    pub fn jet(&self, x: Complex64, y: Complex64) -> HomJet {
        let d = self.degree;
        let mut xp = vec![Complex64::new(1.0, 0.0); d + 1];
        let mut yp = vec![Complex64::new(1.0, 0.0); d + 1];
        for i in 1..=d {
            xp[i] = xp[i - 1] * x;
            yp[i] = yp[i - 1] * y;
        }
        let zero = Complex64::new(0.0, 0.0);
        let mut j = HomJet { p: zero, q: zero, px: zero, py: zero, qx: zero, qy: zero };
        for i in 0..=d {
            let mono = xp[i] * yp[d - i];
            j.p += mono * self.p[i];
            j.q += mono * self.q[i];
            if i > 0 {
                let m = xp[i - 1] * yp[d - i] * i as f64;
                j.px += m * self.p[i];
                j.qx += m * self.q[i];
            }
            if i < d {
                let m = xp[i] * yp[d - i - 1] * (d - i) as f64;
                j.py += m * self.p[i];
                j.qy += m * self.q[i];
            }
        }
        j
    }
}

/// Rescales a homogeneous pair so the larger coordinate has modulus 1.
pub fn normalize(x: Complex64, y: Complex64) -> (Complex64, Complex64) {
    let m = x.norm().max(y.norm());
    if m == 0.0 || !m.is_finite() {
        (x, y)
    } else {
        (x / m, y / m)
    }
}
