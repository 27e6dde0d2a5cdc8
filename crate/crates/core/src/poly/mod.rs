//! Exact univariate polynomial engine over `Z`, `Q` and finite fields.

pub mod factor;
pub mod ff;
pub mod fpoly;
mod gcd;
mod int;
pub mod modular;
mod rat;

use serde::{Deserialize, Serialize};

pub use factor::{factor_over_z, factor_over_z_with, Factorization};
pub use ff::{ExtField, FiniteField, FpkElem, PrimeField};
pub use gcd::{resultant, resultant_formal, squarefree_decomposition, squarefree_part, subresultant_gcd};
pub use int::{product, IntPoly};
pub use rat::RatPoly;

use crate::arith::is_prime_u64;
use crate::error::{Error, Result};

/// Monic polynomial over `F_p`, ascending coefficients in `[0, p)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FpPoly {
    pub p: u64,
    pub coeffs: Vec<u64>,
}

impl FpPoly {
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }
}

fn check_reduction(a: &IntPoly, p: u64) -> Result<()> {
    if !is_prime_u64(p) || p >= (1 << 62) {
        return Err(Error::InvalidInput(format!("{p} is not a supported prime")));
    }
    if a.is_zero() {
        return Err(Error::ZeroInput("reduction mod p"));
    }
    if modular::reduce_int(&a.lc(), p) == 0 {
        return Err(Error::BadLeadingReduction(p));
    }
    Ok(())
}

/// Factorization of `a mod p` into monic irreducibles with multiplicities,
/// sorted by degree then coefficients. The leading unit is dropped.
pub fn factor_mod_p(a: &IntPoly, p: u64) -> Result<Vec<(FpPoly, u32)>> {
    check_reduction(a, p)?;
    let field = PrimeField::new(p);
    Ok(fpoly::factor(&field, &modular::reduce(a, p))
        .into_iter()
        .map(|(coeffs, e)| (FpPoly { p, coeffs }, e))
        .collect())
}

/// Roots of `a` in `F_{p^k}` with multiplicities, sorted.
pub fn roots_in_fpk(a: &IntPoly, p: u64, k: usize) -> Result<Vec<(FpkElem, u32)>> {
    check_reduction(a, p)?;
    let field = ExtField::new(p, k)?;
    let lifted: Vec<Vec<u64>> = modular::reduce(a, p)
        .into_iter()
        .map(|c| field.embed(c))
        .collect();
    Ok(fpoly::roots(&field, &lifted)
        .into_iter()
        .map(|(repr, e)| (FpkElem { p, k, repr }, e))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factor_mod_p_examples() {
        let a = IntPoly::from_i64s(&[1, 0, 1]);
        let f5 = factor_mod_p(&a, 5).unwrap();
        let polys: Vec<Vec<u64>> = f5.iter().map(|(g, _)| g.coeffs.clone()).collect();
        assert_eq!(polys, vec![vec![2, 1], vec![3, 1]]);
        assert_eq!(factor_mod_p(&a, 3).unwrap().len(), 1);
        let sq = factor_mod_p(&IntPoly::from_i64s(&[0, 0, 1]), 7).unwrap();
        assert_eq!(sq, vec![(FpPoly { p: 7, coeffs: vec![0, 1] }, 2)]);
        assert_eq!(
            factor_mod_p(&IntPoly::from_i64s(&[1, 0, 5]), 5),
            Err(Error::BadLeadingReduction(5))
        );
    }

    #[test]
    fn roots_examples() {
        let a = IntPoly::from_i64s(&[1, 0, 1]);
        let r: Vec<u64> = roots_in_fpk(&a, 5, 1).unwrap().iter().map(|(e, _)| e.repr[0]).collect();
        assert_eq!(r, vec![2, 3]);
        assert!(roots_in_fpk(&a, 3, 1).unwrap().is_empty());
        let r9 = roots_in_fpk(&a, 3, 2).unwrap();
        assert_eq!(r9.len(), 2);
        // modulus t^2 + 1 over F_3: the roots are t and -t = 2t
        assert_eq!(r9[0].0.repr, vec![0, 1]);
        assert_eq!(r9[1].0.repr, vec![0, 2]);
    }
}
