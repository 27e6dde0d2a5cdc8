//! Rational self-maps of the projective line with rational coefficients.

use std::fmt;
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::poly::{resultant_formal, subresultant_gcd, IntPoly};

/// Homogeneous integer form in `(X, Y)` of formal degree `degree`, stored by
/// its dehomogenization `poly(z) = form(z, 1)`, so `poly.coeff(i)` is the
/// coefficient of `X^i Y^(degree - i)`.
///
/// Normalized primitive with positive coefficient on the highest power of
/// `X` present. The root at infinity has multiplicity
/// `degree - deg poly`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct BinaryForm {
    pub degree: usize,
    pub poly: IntPoly,
}

impl BinaryForm {
    pub fn new(degree: usize, poly: &IntPoly) -> Self {
        assert!(!poly.is_zero(), "zero binary form");
        assert!(poly.deg() <= degree, "polynomial exceeds the formal degree");
        BinaryForm {
            degree,
            poly: poly.primitive_part(),
        }
    }

    /// Multiplicity of `∞ = (1 : 0)` as a root.
    pub fn infinity_multiplicity(&self) -> usize {
        self.degree - self.poly.deg()
    }

    /// Coefficients of `X^i Y^(D-i)` for `i = 0..=D`.
    pub fn coeffs_xy(&self) -> Vec<BigInt> {
        (0..=self.degree).map(|i| self.poly.coeff(i)).collect()
    }

    pub fn eval(&self, x: &BigInt, y: &BigInt) -> BigInt {
        self.poly.eval_homogeneous(self.degree, x, y)
    }

    /// Product of forms (degrees add).
    pub fn mul(&self, other: &BinaryForm) -> BinaryForm {
        BinaryForm::new(self.degree + other.degree, &(&self.poly * &other.poly))
    }

    /// Exact quotient, `None` when `other` does not divide `self`.
    pub fn div_exact(&self, other: &BinaryForm) -> Option<BinaryForm> {
        if other.degree > self.degree
            || other.infinity_multiplicity() > self.infinity_multiplicity()
        {
            return None;
        }
        let q = self.poly.div_exact(&other.poly)?;
        Some(BinaryForm::new(self.degree - other.degree, &q))
    }
}

impl fmt::Display for BinaryForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let inf = self.infinity_multiplicity();
        match inf {
            0 => write!(f, "{}", self.poly.display_with("X")),
            1 => write!(f, "Y*({})", self.poly.display_with("X")),
            _ => write!(f, "Y^{inf}*({})", self.poly.display_with("X")),
        }
    }
}

/// A point of `P^1(Q)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ProjPoint {
    Finite(BigRational),
    Infinity,
}

impl ProjPoint {
    pub fn from_int(n: i64) -> Self {
        ProjPoint::Finite(BigRational::from_integer(n.into()))
    }

    /// Homogeneous integer coordinates `(x, y)`, coprime, `y >= 0`.
    pub fn coords(&self) -> (BigInt, BigInt) {
        match self {
            ProjPoint::Finite(q) => (q.numer().clone(), q.denom().clone()),
            ProjPoint::Infinity => (BigInt::one(), BigInt::zero()),
        }
    }

    pub fn from_coords(x: BigInt, y: BigInt) -> Self {
        assert!(!(x.is_zero() && y.is_zero()), "(0 : 0) is not a point");
        if y.is_zero() {
            ProjPoint::Infinity
        } else {
            ProjPoint::Finite(BigRational::new(x, y))
        }
    }

    /// Max bit size of the reduced coordinates.
    pub fn height_bits(&self) -> u64 {
        let (x, y) = self.coords();
        x.bits().max(y.bits())
    }
}

impl fmt::Display for ProjPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProjPoint::Finite(q) => write!(f, "{}", crate::serial::rational_string(q)),
            ProjPoint::Infinity => write!(f, "inf"),
        }
    }
}

/// Möbius transformation `z -> (a z + b) / (c z + d)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Mobius {
    #[serde(serialize_with = "crate::serial::rational")]
    pub a: BigRational,
    #[serde(serialize_with = "crate::serial::rational")]
    pub b: BigRational,
    #[serde(serialize_with = "crate::serial::rational")]
    pub c: BigRational,
    #[serde(serialize_with = "crate::serial::rational")]
    pub d: BigRational,
}

impl Mobius {
    pub fn new(a: BigRational, b: BigRational, c: BigRational, d: BigRational) -> Result<Self> {
        if (&a * &d - &b * &c).is_zero() {
            return Err(Error::InvalidInput("Möbius determinant is zero".into()));
        }
        Ok(Mobius { a, b, c, d })
    }

    pub fn from_ints(a: i64, b: i64, c: i64, d: i64) -> Result<Self> {
        let q = |v: i64| BigRational::from_integer(v.into());
        Mobius::new(q(a), q(b), q(c), q(d))
    }

    pub fn identity() -> Self {
        Mobius::from_ints(1, 0, 0, 1).expect("identity")
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Mobius) -> Mobius {
        Mobius {
            a: &self.a * &other.a + &self.b * &other.c,
            b: &self.a * &other.b + &self.b * &other.d,
            c: &self.c * &other.a + &self.d * &other.c,
            d: &self.c * &other.b + &self.d * &other.d,
        }
    }

    pub fn inverse(&self) -> Mobius {
        Mobius {
            a: self.d.clone(),
            b: -self.b.clone(),
            c: -self.c.clone(),
            d: self.a.clone(),
        }
    }

    /// Integer matrix proportional to this one.
    fn integer_matrix(&self) -> [BigInt; 4] {
        let entries = [&self.a, &self.b, &self.c, &self.d];
        let l = entries.iter().fold(BigInt::one(), |acc, q| acc.lcm(q.denom()));
        let m = entries.map(|q| (q * BigRational::from_integer(l.clone())).to_integer());
        let g = m.iter().fold(BigInt::zero(), |acc, v| acc.gcd(v));
        m.map(|v| v / &g)
    }

    pub fn apply(&self, z: &ProjPoint) -> ProjPoint {
        let [a, b, c, d] = self.integer_matrix();
        let (x, y) = z.coords();
        ProjPoint::from_coords(&a * &x + &b * &y, &c * &x + &d * &y)
    }
}

/// Degree `d >= 2` map `f = P / Q` with `P, Q` coprime, jointly primitive
/// and the leading coefficient of the higher-degree one positive (the
/// numerator's when the degrees agree).
#[derive(Clone)]
pub struct RationalMap {
    num: IntPoly,
    den: IntPoly,
    degree: usize,
    resultant: OnceLock<BigInt>,
}

impl PartialEq for RationalMap {
    fn eq(&self, other: &Self) -> bool {
        self.num == other.num && self.den == other.den
    }
}

impl Eq for RationalMap {}

impl fmt::Debug for RationalMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RationalMap({self})")
    }
}

impl fmt::Display for RationalMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.coeffs() == [BigInt::one()] {
            write!(f, "{}", self.num.display_with("z"))
        } else {
            write!(f, "({}) / ({})", self.num.display_with("z"), self.den.display_with("z"))
        }
    }
}

impl RationalMap {
    /// Builds a map from rational coefficient lists (ascending degree).
    ///
    /// Order: clear denominators, cancel the polynomial gcd, check the
    /// degree, then fix content and sign.
    pub fn parse_normalize(num: &[BigRational], den: &[BigRational]) -> Result<Self> {
        let l = num
            .iter()
            .chain(den)
            .fold(BigInt::one(), |acc, q| acc.lcm(q.denom()));
        let scale = BigRational::from_integer(l);
        let to_int = |v: &[BigRational]| {
            IntPoly::new(v.iter().map(|q| (q * &scale).to_integer()).collect())
        };
        Self::from_int_polys(&to_int(num), &to_int(den))
    }

    pub fn from_int_polys(num: &IntPoly, den: &IntPoly) -> Result<Self> {
        if num.is_zero() && den.is_zero() {
            return Err(Error::InvalidInput("numerator and denominator are both zero".into()));
        }
        let g = subresultant_gcd(num, den);
        let num = num.div_exact(&g).expect("gcd divides the numerator");
        let den = den.div_exact(&g).expect("gcd divides the denominator");
        let d = num.degree().unwrap_or(0).max(den.degree().unwrap_or(0));
        if d < 2 {
            return Err(Error::DegreeTooSmall(d));
        }
        let map = Self::from_coprime(num, den, d);
        if map.homogeneous_resultant().is_zero() {
            return Err(Error::DegeneratePair);
        }
        Ok(map)
    }

    pub fn from_i64s(num: &[i64], den: &[i64]) -> Result<Self> {
        Self::from_int_polys(&IntPoly::from_i64s(num), &IntPoly::from_i64s(den))
    }

    /// Normalizes content and sign of a pair already known to be coprime
    /// as forms of degree `d`.
    fn from_coprime(num: IntPoly, den: IntPoly, d: usize) -> Self {
        let g = num.content().gcd(&den.content());
        let lead = if num.degree().unwrap_or(0) >= den.degree().unwrap_or(0) && !num.is_zero() {
            num.lc()
        } else {
            den.lc()
        };
        let g = if lead.is_negative() { -g } else { g };
        RationalMap {
            num: num.div_scalar_exact(&g),
            den: den.div_scalar_exact(&g),
            degree: d,
            resultant: OnceLock::new(),
        }
    }

    pub fn num(&self) -> &IntPoly {
        &self.num
    }

    pub fn den(&self) -> &IntPoly {
        &self.den
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.deg() == 0
    }

    /// Resultant of the homogenizations `P(X, Y)`, `Q(X, Y)` of degree `d`.
    pub fn homogeneous_resultant(&self) -> &BigInt {
        self.resultant
            .get_or_init(|| resultant_formal(&self.num, self.degree, &self.den, self.degree))
    }

    /// `f^n` by homogeneous composition `f^(k+1) = f ∘ f^k`.
    pub fn iterate(&self, n: usize) -> Result<RationalMap> {
        self.iterate_with(n, &Budget::default())
    }

    pub fn iterate_with(&self, n: usize, budget: &Budget) -> Result<RationalMap> {
        if n == 0 {
            return Err(Error::InvalidInput("iterate count must be at least 1".into()));
        }
        let mut cur = self.clone();
        for _ in 1..n {
            cur = self.compose_after(&cur, budget)?;
        }
        Ok(cur)
    }

    /// `self ∘ g` as homogeneous forms of degree `d * deg g`.
    pub fn compose_after(&self, g: &RationalMap, budget: &Budget) -> Result<RationalMap> {
        let d = self.degree;
        let mut pow_p = vec![IntPoly::one()];
        let mut pow_q = vec![IntPoly::one()];
        for i in 1..=d {
            pow_p.push(&pow_p[i - 1] * &g.num);
            pow_q.push(&pow_q[i - 1] * &g.den);
        }
        let hom = |f: &IntPoly| {
            let mut acc = IntPoly::zero();
            for (i, c) in f.coeffs().iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                acc = &acc + &(&pow_p[i] * &pow_q[d - i]).scale(c);
            }
            acc
        };
        let num = hom(&self.num);
        let den = hom(&self.den);
        budget.check_bytes(num.coeff_bytes().max(den.coeff_bytes()), "iterate")?;
        Ok(Self::from_coprime(num, den, d * g.degree))
    }

    /// `(W, Q^2)` with `f' = W / Q^2`, `W = P'Q - PQ'`.
    pub fn derivative_parts(&self) -> (IntPoly, IntPoly) {
        let w = &(&self.num.derivative() * &self.den) - &(&self.num * &self.den.derivative());
        (w, &self.den * &self.den)
    }

    /// `m ∘ f ∘ m^{-1}`.
    pub fn conjugate(&self, m: &Mobius) -> Result<RationalMap> {
        let [a, b, c, d] = m.integer_matrix();
        // m^{-1}: (X, Y) -> (dX - bY, -cX + aY), dehomogenized at Y = 1
        let x_inv = IntPoly::new(vec![-b.clone(), d.clone()]);
        let y_inv = IntPoly::new(vec![a.clone(), -c.clone()]);
        let deg = self.degree;
        let mut pow_x = vec![IntPoly::one()];
        let mut pow_y = vec![IntPoly::one()];
        for i in 1..=deg {
            pow_x.push(&pow_x[i - 1] * &x_inv);
            pow_y.push(&pow_y[i - 1] * &y_inv);
        }
        let subst = |f: &IntPoly| {
            let mut acc = IntPoly::zero();
            for i in 0..=deg {
                let ci = f.coeff(i);
                if !ci.is_zero() {
                    acc = &acc + &(&pow_x[i] * &pow_y[deg - i]).scale(&ci);
                }
            }
            acc
        };
        let p1 = subst(&self.num);
        let q1 = subst(&self.den);
        let num = &p1.scale(&a) + &q1.scale(&b);
        let den = &p1.scale(&c) + &q1.scale(&d);
        Self::from_int_polys(&num, &den)
    }

    /// Jacobian form `P_X Q_Y - P_Y Q_X = d * W(X, Y)` of degree `2d - 2`,
    /// normalized; its roots are the critical points with multiplicity.
    pub fn critical_form(&self) -> BinaryForm {
        let (w, _) = self.derivative_parts();
        BinaryForm::new(2 * self.degree - 2, &w)
    }

    /// True iff the reductions mod `p` still define a degree-`d` map.
    pub fn good_reduction(&self, p: u64) -> bool {
        let r = self.homogeneous_resultant();
        !(r % BigInt::from(p)).is_zero()
    }

    /// Evaluates at a point of `P^1(Q)`.
    pub fn apply(&self, z: &ProjPoint) -> ProjPoint {
        let (x, y) = z.coords();
        let u = self.num.eval_homogeneous(self.degree, &x, &y);
        let v = self.den.eval_homogeneous(self.degree, &x, &y);
        ProjPoint::from_coords(u, v)
    }

    /// `f(z)` for finite `z` off the poles.
    pub fn eval_rational(&self, z: &BigRational) -> Option<BigRational> {
        let q = self.den.eval_rational(z);
        if q.is_zero() {
            return None;
        }
        Some(self.num.eval_rational(z) / q)
    }

    /// `f'(z)` for finite `z` off the poles.
    pub fn derivative_at(&self, z: &BigRational) -> Option<BigRational> {
        let (w, q2) = self.derivative_parts();
        let q = q2.eval_rational(z);
        if q.is_zero() {
            return None;
        }
        Some(w.eval_rational(z) / q)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }

    #[test]
    fn parse_examples() {
        let f = RationalMap::parse_normalize(&[q(1), q(0), q(1)], &[q(1)]).unwrap();
        assert_eq!(f.num(), &IntPoly::from_i64s(&[1, 0, 1]));
        assert_eq!(f.degree(), 2);
        let e = RationalMap::parse_normalize(&[q(0), q(2), q(0), q(2)], &[q(2), q(0), q(2)]);
        assert_eq!(e, Err(Error::DegreeTooSmall(1)));
        let half = BigRational::new(1.into(), 2.into());
        let g = RationalMap::parse_normalize(&[half.clone(), q(0), half], &[q(-1)]).unwrap();
        // (z^2 + 1) / (-2): the numerator carries the degree and stays positive
        assert_eq!(g.num(), &IntPoly::from_i64s(&[1, 0, 1]));
        assert_eq!(g.den(), &IntPoly::from_i64s(&[-2]));
        assert!(RationalMap::parse_normalize(&[], &[]).is_err());
    }

    #[test]
    fn iterate_examples() {
        let f = RationalMap::from_i64s(&[1, 0, 1], &[1]).unwrap();
        let f2 = f.iterate(2).unwrap();
        assert_eq!(f2.num(), &IntPoly::from_i64s(&[2, 0, 2, 0, 1]));
        assert_eq!(f.iterate(1).unwrap(), f);
        let sq = RationalMap::from_i64s(&[0, 0, 1], &[1]).unwrap();
        let s5 = sq.iterate(5).unwrap();
        assert_eq!(s5.num(), &IntPoly::monomial(BigInt::one(), 32));
        assert_eq!(s5.degree(), 32);
    }

    #[test]
    fn derivative_examples() {
        let f = RationalMap::from_i64s(&[1, 0, 1], &[1]).unwrap();
        assert_eq!(f.derivative_parts(), (IntPoly::from_i64s(&[0, 2]), IntPoly::one()));
        let inv = RationalMap::from_i64s(&[1], &[0, 1]);
        // 1/z has degree 1
        assert_eq!(inv, Err(Error::DegreeTooSmall(1)));
        let lattes = RationalMap::from_i64s(&[1, 0, 2, 0, 1], &[0, -4, 0, 4]).unwrap();
        let z = q(2);
        let (w, q2) = lattes.derivative_parts();
        let lhs = w.eval_rational(&z) / q2.eval_rational(&z);
        // quotient rule by hand: P = 25, P' = 40, Q = 24, Q' = 44
        let rhs = (q(40) * q(24) - q(25) * q(44)) / (q(24) * q(24));
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn conjugation_examples() {
        let sq = RationalMap::from_i64s(&[0, 0, 1], &[1]).unwrap();
        assert_eq!(sq.conjugate(&Mobius::identity()).unwrap(), sq);
        let inv = Mobius::from_ints(0, 1, 1, 0).unwrap();
        assert_eq!(sq.conjugate(&inv).unwrap(), sq);
        let f = RationalMap::from_i64s(&[1, 0, 1], &[1]).unwrap();
        let t = Mobius::from_ints(1, 1, 0, 1).unwrap();
        // z -> z + 1: g(z) = (z - 1)^2 + 2
        assert_eq!(f.conjugate(&t).unwrap().num(), &IntPoly::from_i64s(&[3, -2, 1]));
    }

    #[test]
    fn critical_forms() {
        let f = RationalMap::from_i64s(&[1, 0, 1], &[1]).unwrap();
        let c = f.critical_form();
        assert_eq!(c.degree, 2);
        assert_eq!(c.infinity_multiplicity(), 1);
        assert_eq!(c.poly, IntPoly::x());
        let g = RationalMap::from_i64s(&[1, 0, 1], &[0, 1]).unwrap();
        let c = g.critical_form();
        assert_eq!(c.infinity_multiplicity(), 0);
        assert_eq!(c.poly, IntPoly::from_i64s(&[-1, 0, 1]));
    }

    #[test]
    fn reduction() {
        let f = RationalMap::from_i64s(&[1, 0, 1], &[1]).unwrap();
        assert!(f.good_reduction(5));
        let lattes = RationalMap::from_i64s(&[1, 0, 2, 0, 1], &[0, -4, 0, 4]).unwrap();
        assert!(!lattes.good_reduction(2));
        let sq = RationalMap::from_i64s(&[0, 0, 1], &[1]).unwrap();
        assert!([2u64, 3, 5, 7, 11].iter().all(|&p| sq.good_reduction(p)));
    }

    #[test]
    fn projective_evaluation() {
        let f = RationalMap::from_i64s(&[1, 0, 1], &[1]).unwrap();
        assert_eq!(f.apply(&ProjPoint::Infinity), ProjPoint::Infinity);
        assert_eq!(f.apply(&ProjPoint::from_int(2)), ProjPoint::from_int(5));
        let lattes = RationalMap::from_i64s(&[1, 0, 2, 0, 1], &[0, -4, 0, 4]).unwrap();
        assert_eq!(lattes.apply(&ProjPoint::from_int(0)), ProjPoint::Infinity);
        assert_eq!(lattes.apply(&ProjPoint::Infinity), ProjPoint::Infinity);
    }
}
