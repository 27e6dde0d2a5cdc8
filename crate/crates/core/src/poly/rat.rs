use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::IntPoly;

/// Univariate polynomial with exact rational coefficients, ascending order.
///
/// `BigRational` keeps every coefficient in lowest terms with a positive
/// denominator.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct RatPoly {
    coeffs: Vec<BigRational>,
}

impl RatPoly {
    pub fn new(mut coeffs: Vec<BigRational>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        RatPoly { coeffs }
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn eval(&self, x: &BigRational) -> BigRational {
        let mut acc = BigRational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    /// Lcm of the coefficient denominators (1 for the zero polynomial).
    pub fn denominator_lcm(&self) -> BigInt {
        self.coeffs
            .iter()
            .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()))
    }

    /// `self * scale` as an integer polynomial; `scale` must clear every
    /// denominator.
    pub fn to_int_scaled(&self, scale: &BigInt) -> IntPoly {
        IntPoly::new(
            self.coeffs
                .iter()
                .map(|c| {
                    let v = c * BigRational::from_integer(scale.clone());
                    assert!(v.is_integer(), "scale does not clear denominators");
                    v.to_integer()
                })
                .collect(),
        )
    }
}

impl From<&IntPoly> for RatPoly {
    fn from(p: &IntPoly) -> Self {
        RatPoly::new(
            p.coeffs()
                .iter()
                .map(|c| BigRational::from_integer(c.clone()))
                .collect(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lowest_terms_and_scaling() {
        let half = BigRational::new(2.into(), 4.into());
        assert_eq!(half.denom(), &BigInt::from(2));
        let p = RatPoly::new(vec![half, BigRational::new(1.into(), 3.into())]);
        let l = p.denominator_lcm();
        assert_eq!(l, BigInt::from(6));
        assert_eq!(p.to_int_scaled(&l), IntPoly::from_i64s(&[3, 2]));
    }
}
