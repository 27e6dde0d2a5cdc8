//! Subresultant gcd, resultants and squarefree decomposition over `Z[x]`.

use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::IntPoly;
use crate::error::{Error, Result};

/// Primitive gcd of `a` and `b` (positive leading coefficient) via the
/// subresultant polynomial remainder sequence.
///
/// `gcd(a, 0)` is the primitive part of `a`; `gcd(0, 0)` is zero.
pub fn subresultant_gcd(a: &IntPoly, b: &IntPoly) -> IntPoly {
    let (mut a, mut b) = if a.deg() >= b.deg() && !a.is_zero() || b.is_zero() {
        (a.clone(), b.clone())
    } else {
        (b.clone(), a.clone())
    };
    if b.is_zero() {
        return a.primitive_part();
    }
    a = a.primitive_part();
    b = b.primitive_part();
    let mut g = BigInt::one();
    let mut h = BigInt::one();
    loop {
        let delta = (a.deg() - b.deg()) as u32;
        let r = a.pseudo_rem(&b);
        if r.is_zero() {
            return b.primitive_part();
        }
        if r.deg() == 0 {
            return IntPoly::one();
        }
        a = b;
        let divisor = &g * num_traits::pow(h.clone(), delta as usize);
        b = r.div_scalar_exact(&divisor);
        g = a.lc();
        h = if delta == 0 {
            h
        } else {
            num_traits::pow(g.clone(), delta as usize) / num_traits::pow(h, delta as usize - 1)
        };
    }
}

/// Classical resultant `lc(a)^deg(b) * prod_{a(α)=0} b(α)`, i.e. the
/// determinant of the Sylvester matrix with the rows of `a` on top.
///
/// Returns zero when either input is zero.
pub(crate) fn resultant_classical(a: &IntPoly, b: &IntPoly) -> BigInt {
    if a.is_zero() || b.is_zero() {
        return BigInt::zero();
    }
    if a.deg() == 0 {
        return num_traits::pow(a.lc(), b.deg());
    }
    if b.deg() == 0 {
        return num_traits::pow(b.lc(), a.deg());
    }
    let ca = a.content();
    let cb = b.content();
    let mut a = a.div_scalar_exact(&ca);
    let mut b = b.div_scalar_exact(&cb);
    let t = num_traits::pow(ca, b.deg()) * num_traits::pow(cb, a.deg());
    let mut s = BigInt::one();
    if a.deg() < b.deg() {
        std::mem::swap(&mut a, &mut b);
        if a.deg() % 2 == 1 && b.deg() % 2 == 1 {
            s = -s;
        }
    }
    let mut g = BigInt::one();
    let mut h = BigInt::one();
    loop {
        let delta = a.deg() - b.deg();
        if a.deg() % 2 == 1 && b.deg() % 2 == 1 {
            s = -s;
        }
        let r = a.pseudo_rem(&b);
        if r.is_zero() {
            return BigInt::zero();
        }
        a = b;
        let divisor = &g * num_traits::pow(h.clone(), delta);
        b = r.div_scalar_exact(&divisor);
        g = a.lc();
        h = if delta == 0 {
            h
        } else {
            num_traits::pow(g.clone(), delta) / num_traits::pow(h, delta - 1)
        };
        if b.deg() == 0 {
            let da = a.deg();
            let hh = if da == 0 {
                h
            } else {
                num_traits::pow(b.lc(), da) / num_traits::pow(h, da - 1)
            };
            return s * t * hh;
        }
    }
}

/// Resultant with the convention `Res(a, b) = lc(b)^deg(a) * prod a(β)` over
/// the roots `β` of `b`, so that `Res(x - a, x - b) = b - a`.
///
/// Equals the Sylvester determinant with the rows of `b` placed first.
pub fn resultant(a: &IntPoly, b: &IntPoly) -> Result<BigInt> {
    if a.is_zero() || b.is_zero() {
        return Err(Error::ZeroInput("resultant"));
    }
    Ok(resultant_classical(b, a))
}

/// Resultant of two binary forms given by their dehomogenizations and formal
/// degrees `m >= deg p`, `n >= deg q`: the Sylvester determinant of the
/// padded coefficient vectors (classical row order, `p` on top).
pub fn resultant_formal(p: &IntPoly, m: usize, q: &IntPoly, n: usize) -> BigInt {
    debug_assert!(p.deg() <= m && q.deg() <= n);
    if p.is_zero() || q.is_zero() {
        return BigInt::zero();
    }
    if p.deg() == m {
        // Res_{m,n}(p,q) = lc(p)^n prod q(α) = lc(p)^(n - deg q) Res(p, q)
        num_traits::pow(p.lc(), n - q.deg()) * resultant_classical(p, q)
    } else if q.deg() == n {
        let sign = if (m * n) % 2 == 1 { -BigInt::one() } else { BigInt::one() };
        sign * num_traits::pow(q.lc(), m - p.deg()) * resultant_classical(q, p)
    } else {
        // both forms vanish at infinity
        BigInt::zero()
    }
}

/// Yun squarefree decomposition of a nonzero polynomial.
///
/// Returns primitive squarefree parts with their exponents, ascending by
/// exponent; the parts are pairwise coprime and
/// `sign * content * prod part^exp` reproduces the input.
pub fn squarefree_decomposition(a: &IntPoly) -> Vec<(IntPoly, u32)> {
    assert!(!a.is_zero(), "squarefree decomposition of zero");
    let f = a.primitive_part();
    if f.deg() == 0 {
        return Vec::new();
    }
    let df = f.derivative();
    let c = super::modular::gcd_z(&f, &df);
    let mut w = f.div_exact(&c).expect("gcd divides");
    let mut y = df.div_exact(&c).expect("gcd divides derivative");
    let mut z = &y - &w.derivative();
    let mut out = Vec::new();
    let mut i = 1u32;
    while w.deg() > 0 {
        let g = super::modular::gcd_z(&w, &z);
        if g.deg() > 0 {
            out.push((g.clone(), i));
        }
        w = w.div_exact(&g).expect("gcd divides w");
        y = z.div_exact(&g).expect("gcd divides z");
        z = &y - &w.derivative();
        i += 1;
    }
    out
}

/// Product of the distinct irreducible factors (primitive).
pub fn squarefree_part(a: &IntPoly) -> IntPoly {
    squarefree_decomposition(a)
        .into_iter()
        .fold(IntPoly::one(), |acc, (g, _)| &acc * &g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    fn p(c: &[i64]) -> IntPoly {
        IntPoly::from_i64s(c)
    }

    /// Sylvester determinant by rational Gaussian elimination, rows of `top`
    /// first. Independent of the PRS code.
    pub(crate) fn sylvester_det(top: &IntPoly, bottom: &IntPoly) -> BigInt {
        let m = top.deg();
        let n = bottom.deg();
        let size = m + n;
        let mut mat = vec![vec![BigRational::zero(); size]; size];
        for r in 0..n {
            for i in 0..=m {
                mat[r][r + i] = BigRational::from_integer(top.coeff(m - i));
            }
        }
        for r in 0..m {
            for i in 0..=n {
                mat[n + r][r + i] = BigRational::from_integer(bottom.coeff(n - i));
            }
        }
        let mut det = BigRational::one();
        for col in 0..size {
            let Some(piv) = (col..size).find(|&r| !mat[r][col].is_zero()) else {
                return BigInt::zero();
            };
            if piv != col {
                mat.swap(piv, col);
                det = -det;
            }
            let pv = mat[col][col].clone();
            det *= &pv;
            for r in col + 1..size {
                let f = &mat[r][col] / &pv;
                if f.is_zero() {
                    continue;
                }
                for c in col..size {
                    let t = &f * &mat[col][c];
                    mat[r][c] -= t;
                }
            }
        }
        det.to_integer()
    }

    #[test]
    fn gcd_examples() {
        assert_eq!(subresultant_gcd(&p(&[-1, 0, 1]), &p(&[-1, 1])), p(&[-1, 1]));
        assert_eq!(subresultant_gcd(&p(&[-6, 0, 6]), &IntPoly::zero()), p(&[-1, 0, 1]));
        let c = p(&[1, 0, 1]);
        let a = &c * &p(&[-2, 0, 0, 1]);
        let b = &c * &p(&[5, 1]);
        assert_eq!(subresultant_gcd(&a, &b), c);
        assert_eq!(subresultant_gcd(&p(&[1, 1]), &p(&[2, 1])), IntPoly::one());
    }

    #[test]
    fn resultant_examples() {
        // Res(x - a, x - b) = b - a
        assert_eq!(resultant(&p(&[-2, 1]), &p(&[-3, 1])).unwrap(), BigInt::from(1));
        assert_eq!(resultant(&p(&[1, 0, 1]), &p(&[-1, 1])).unwrap(), BigInt::from(2));
        assert_eq!(resultant(&p(&[-2, 0, 1]), &p(&[-3, 0, 1])).unwrap(), BigInt::from(1));
        assert_eq!(resultant(&IntPoly::zero(), &p(&[1, 1])), Err(Error::ZeroInput("resultant")));
    }

    #[test]
    fn resultant_matches_sylvester_determinant() {
        let cases = [
            (p(&[3, -1, 4, 1]), p(&[-5, 9, 2])),
            (p(&[2, 0, 0, 0, 7]), p(&[1, 1, 1])),
            (p(&[0, 6, -4]), p(&[9, 0, 3])),
            (p(&[1, 2, 3, 4, 5]), p(&[-2, 7, 1, 1, 3, 8])),
        ];
        for (a, b) in cases {
            assert_eq!(resultant(&a, &b).unwrap(), sylvester_det(&b, &a), "{a} / {b}");
            assert_eq!(resultant_classical(&a, &b), sylvester_det(&a, &b));
        }
    }

    #[test]
    fn formal_resultant_pads_degrees() {
        // X^2 + Y^2 and Y^2 as degree-2 forms
        let r = resultant_formal(&p(&[1, 0, 1]), 2, &p(&[1]), 2);
        assert_eq!(r, BigInt::one());
        // X*Y and Y^2 share the root at infinity
        assert_eq!(resultant_formal(&p(&[0, 1]), 2, &p(&[1]), 2), BigInt::zero());
    }

    #[test]
    fn squarefree_examples() {
        let a = &(&p(&[-1, 1]) * &p(&[-1, 1])) * &p(&[2, 1]);
        assert_eq!(squarefree_decomposition(&a), vec![(p(&[2, 1]), 1), (p(&[-1, 1]), 2)]);
        assert_eq!(squarefree_decomposition(&p(&[1, 0, 1])), vec![(p(&[1, 0, 1]), 1)]);
        assert_eq!(squarefree_decomposition(&p(&[1, 0, -2, 0, 1])), vec![(p(&[-1, 0, 1]), 2)]);
    }
}
