//! Periodic-point forms, multiplier polynomials, Galois classes of
//! multipliers and length spectra.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::map::{BinaryForm, Mobius, RationalMap};
use crate::numeric;
use crate::poly::ff::{mulmod, PrimeField};
use crate::poly::fpoly;
use crate::poly::modular::{big_prime_iter, rational_reconstruct, reduce, reduce_int, Crt};
use crate::poly::{factor_over_z_with, squarefree_part, IntPoly};

/// Galois conjugacy class of multipliers: an irreducible primitive
/// polynomial in `λ` with the period it came from and its multiplicity in
/// the multiplier polynomial.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct AlgebraicClass {
    pub minpoly: IntPoly,
    pub period: usize,
    pub multiplicity: u32,
    pub exact_period: bool,
}

impl AlgebraicClass {
    /// True for the class `λ` of superattracting points.
    pub fn is_zero_class(&self) -> bool {
        self.minpoly == IntPoly::x()
    }
}

/// Exact-period form together with how it was obtained.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ExactPeriodForm {
    pub form: BinaryForm,
    /// Set when the recursive division was not exact and the form was
    /// rebuilt from squarefree parts.
    pub division_fallback: bool,
}

/// Memoizing engine for one map: iterates, fixed-point forms and
/// exact-period forms are computed once per period.
#[derive(Clone, Debug)]
pub struct SpectrumEngine {
    map: RationalMap,
    budget: Budget,
    iterates: Vec<RationalMap>,
    fix_forms: BTreeMap<usize, BinaryForm>,
    exact_forms: BTreeMap<usize, ExactPeriodForm>,
    sigmas: BTreeMap<(usize, bool), IntPoly>,
}

impl SpectrumEngine {
    /// Engine with the default budget, honoring `SPECLAB_BUDGET_MB` when it
    /// parses.
    pub fn new(map: &RationalMap) -> Self {
        Self::with_budget(map, Budget::from_env().unwrap_or_default())
    }

    pub fn with_budget(map: &RationalMap, budget: Budget) -> Self {
        SpectrumEngine {
            map: map.clone(),
            budget,
            iterates: vec![map.clone()],
            fix_forms: BTreeMap::new(),
            exact_forms: BTreeMap::new(),
            sigmas: BTreeMap::new(),
        }
    }

    pub fn map(&self) -> &RationalMap {
        &self.map
    }

    pub fn budget(&self) -> &Budget {
        &self.budget
    }

    /// `f^n`, cached.
    pub fn iterate(&mut self, n: usize) -> Result<&RationalMap> {
        check_period(n)?;
        while self.iterates.len() < n {
            let next = self
                .map
                .compose_after(self.iterates.last().expect("nonempty"), &self.budget)?;
            self.iterates.push(next);
        }
        Ok(&self.iterates[n - 1])
    }

    /// `Φ_n = Y P_n - X Q_n`, degree `d^n + 1`.
    pub fn fixed_point_form(&mut self, n: usize) -> Result<BinaryForm> {
        if let Some(f) = self.fix_forms.get(&n) {
            return Ok(f.clone());
        }
        let fnn = self.iterate(n)?;
        let phi = fnn.num() - &(&IntPoly::x() * fnn.den());
        let form = BinaryForm::new(fnn.degree() + 1, &phi);
        self.fix_forms.insert(n, form.clone());
        Ok(form)
    }

    /// `E_n = Φ_n / prod_{m | n, m < n} E_m`.
    pub fn exact_period_form(&mut self, n: usize) -> Result<ExactPeriodForm> {
        if let Some(e) = self.exact_forms.get(&n) {
            return Ok(e.clone());
        }
        let phi = self.fixed_point_form(n)?;
        let mut lower = Vec::new();
        for m in proper_divisors(n) {
            lower.push(self.exact_period_form(m)?.form);
        }
        let mut cur = Some(phi.clone());
        for e in &lower {
            cur = cur.and_then(|c| c.div_exact(e));
        }
        let out = match cur {
            Some(form) => ExactPeriodForm {
                form,
                division_fallback: false,
            },
            None => {
                let mut base = squarefree_form(&phi);
                for e in &lower {
                    let g = gcd_form(&base, e);
                    base = base.div_exact(&g).expect("gcd divides");
                }
                ExactPeriodForm {
                    form: base,
                    division_fallback: true,
                }
            }
        };
        self.exact_forms.insert(n, out.clone());
        Ok(out)
    }

    /// The exact-period form when `exact_only`, else the fixed-point form.
    pub fn periodic_form(&mut self, n: usize, exact_only: bool) -> Result<BinaryForm> {
        if exact_only {
            Ok(self.exact_period_form(n)?.form)
        } else {
            self.fixed_point_form(n)
        }
    }

    /// Primitive `σ(λ)` whose roots with multiplicity are the multipliers of
    /// `f^n` at the roots of the chosen form.
    pub fn multiplier_polynomial(&mut self, n: usize, exact_only: bool) -> Result<IntPoly> {
        if let Some(s) = self.sigmas.get(&(n, exact_only)) {
            return Ok(s.clone());
        }
        let form = self.periodic_form(n, exact_only)?;
        if form.degree > self.budget.factor_degree_cap {
            return Err(Error::BudgetExceeded(format!(
                "multiplier polynomial of degree {} above the cap {}",
                form.degree, self.budget.factor_degree_cap
            )));
        }
        let sigma = if form.infinity_multiplicity() == 0 {
            sigma_from_form(&self.map, &form, n, &self.budget)?
        } else {
            let c = conjugation_constant(&form);
            let m = Mobius::from_ints(0, 1, 1, -c)?;
            let g = self.map.conjugate(&m)?;
            let mut other = SpectrumEngine::with_budget(&g, self.budget.clone());
            let gform = other.periodic_form(n, exact_only)?;
            if gform.infinity_multiplicity() != 0 {
                return Err(Error::Internal("conjugated form still vanishes at infinity".into()));
            }
            sigma_from_form(&g, &gform, n, &self.budget)?
        };
        self.sigmas.insert((n, exact_only), sigma.clone());
        Ok(sigma)
    }

    /// Irreducible factors of `σ_n` as classes, in canonical factor order.
    pub fn galois_classes(&mut self, n: usize, exact_only: bool) -> Result<Vec<AlgebraicClass>> {
        let sigma = self.multiplier_polynomial(n, exact_only)?;
        let fac = factor_over_z_with(&sigma, &self.budget)?;
        Ok(fac
            .factors
            .into_iter()
            .map(|(g, e)| AlgebraicClass {
                minpoly: g,
                period: n,
                multiplicity: e,
                exact_period: exact_only,
            })
            .collect())
    }

    /// `L_n` and `RL_n` from the full fixed-point multiplier classes.
    pub fn length_spectrum(&mut self, n: usize, precision: u32) -> Result<LengthSpectrum> {
        let classes = self.galois_classes(n, false)?;
        length_spectrum_from_classes(&classes, precision)
    }
}

fn check_period(n: usize) -> Result<()> {
    if n == 0 {
        Err(Error::InvalidInput("period must be at least 1".into()))
    } else {
        Ok(())
    }
}

fn proper_divisors(n: usize) -> Vec<usize> {
    (1..n).filter(|m| n % m == 0).collect()
}

fn squarefree_form(f: &BinaryForm) -> BinaryForm {
    let poly = if f.poly.deg() == 0 {
        IntPoly::one()
    } else {
        squarefree_part(&f.poly)
    };
    let inf = f.infinity_multiplicity().min(1);
    BinaryForm::new(poly.deg() + inf, &poly)
}

fn gcd_form(a: &BinaryForm, b: &BinaryForm) -> BinaryForm {
    let g = crate::poly::modular::gcd_z(&a.poly, &b.poly);
    let inf = a.infinity_multiplicity().min(b.infinity_multiplicity());
    BinaryForm::new(g.deg() + inf, &g)
}

/// First of `0, 1, -1, 2, -2, ...` that is not a root of the form.
pub fn conjugation_constant(form: &BinaryForm) -> i64 {
    let mut k = 0i64;
    loop {
        for c in if k == 0 { vec![0] } else { vec![k, -k] } {
            if !form.poly.eval(&BigInt::from(c)).is_zero() {
                return c;
            }
        }
        k += 1;
    }
}

/// `σ` for a form without a root at infinity.
///
/// Modulo each prime the multiplier `r = prod_i f'(z_i)` along the orbit
/// `z_{i+1} = f(z_i)` is computed in `F_p[z] / (E)`; the monic
/// characteristic polynomial `prod_α (λ - r(α))` is obtained by evaluating
/// resultants at `λ = 0..N` and interpolating. Images are combined by CRT
/// and rational reconstruction, and accepted once three further primes
/// agree with the reconstructed polynomial.
fn sigma_from_form(map: &RationalMap, form: &BinaryForm, n: usize, budget: &Budget) -> Result<IntPoly> {
    const CONFIRMATIONS: usize = 3;
    let e = &form.poly;
    let big_n = e.deg();
    debug_assert_eq!(big_n, form.degree);
    let (w, _) = map.derivative_parts();
    let mut crt: Option<Crt> = None;
    let mut candidate: Option<IntPoly> = None;
    let mut confirmed = 0usize;
    for p in big_prime_iter() {
        if reduce_int(&e.lc(), p) == 0 {
            continue;
        }
        let Some(image) = monic_sigma_mod_p(map, &w, e, n, p) else {
            continue;
        };
        if let Some(c) = &candidate {
            if matches_mod_p(c, &image, p) {
                confirmed += 1;
                if confirmed >= CONFIRMATIONS {
                    return Ok(c.clone());
                }
                continue;
            }
            confirmed = 0;
        }
        match crt.as_mut() {
            None => crt = Some(Crt::new(p, &image)),
            Some(c) => c.push(p, &image),
        }
        // coefficients recoverable from this modulus carry about half its bits
        let bytes = (crt.as_ref().expect("crt").modulus.bits() as usize / 16 + 1) * (big_n + 1);
        budget.check_bytes(bytes, "multiplier polynomial")?;
        candidate = reconstruct(crt.as_ref().expect("crt"));
    }
    Err(Error::BudgetExceeded("multiplier polynomial: prime table exhausted".into()))
}

fn matches_mod_p(c: &IntPoly, image: &[u64], p: u64) -> bool {
    let lc = reduce_int(&c.lc(), p);
    if lc == 0 {
        return false;
    }
    let inv = crate::poly::ff::invmod(lc, p);
    let red: Vec<u64> = (0..image.len())
        .map(|i| mulmod(reduce_int(&c.coeff(i), p), inv, p))
        .collect();
    red == image
}

/// Integer primitive polynomial from the CRT images of a monic rational one.
fn reconstruct(crt: &Crt) -> Option<IntPoly> {
    let mut coeffs = Vec::with_capacity(crt.residues.len());
    // leading coefficient is 1; reconstruct from the top so that failures
    // on large middle coefficients are found quickly
    for r in crt.residues.iter().rev() {
        coeffs.push(rational_reconstruct(r, &crt.modulus)?);
    }
    coeffs.reverse();
    let l = coeffs.iter().fold(BigInt::one(), |acc, q| acc.lcm(q.denom()));
    let scale = BigRational::from_integer(l);
    let ints: Vec<BigInt> = coeffs.iter().map(|q| (q * &scale).to_integer()).collect();
    Some(IntPoly::new(ints).primitive_part())
}

/// Monic `prod_α (λ - (f^n)'(α))` over the roots of `e` modulo `p`, or
/// `None` if `p` is unsuitable (a pole meets the orbit modulo `p`).
fn monic_sigma_mod_p(map: &RationalMap, w: &IntPoly, e: &IntPoly, n: usize, p: u64) -> Option<Vec<u64>> {
    let big_n = e.deg();
    if (p as u128) <= big_n as u128 + 1 {
        return None;
    }
    let field = PrimeField::new(p);
    let ep = reduce(e, p);
    let pp = reduce(map.num(), p);
    let qp = reduce(map.den(), p);
    let wp = reduce(w, p);
    let horner = |poly: &Vec<u64>, z: &Vec<u64>| -> Vec<u64> {
        let mut acc: Vec<u64> = Vec::new();
        for c in poly.iter().rev() {
            acc = fpoly::mulmod_poly(&field, &acc, z, &ep);
            acc = fpoly::add(&field, &acc, &vec![*c]);
        }
        acc
    };
    let mut z = fpoly::rem(&field, &vec![0, 1], &ep);
    let mut acc = fpoly::rem(&field, &vec![1], &ep);
    for i in 0..n {
        let qz = horner(&qp, &z);
        let (g, s, _) = fpoly::xgcd(&field, &qz, &ep);
        if g != vec![1] {
            return None;
        }
        let qinv = fpoly::rem(&field, &s, &ep);
        let wz = horner(&wp, &z);
        let step = fpoly::mulmod_poly(&field, &wz, &fpoly::mulmod_poly(&field, &qinv, &qinv, &ep), &ep);
        acc = fpoly::mulmod_poly(&field, &acc, &step, &ep);
        if i + 1 < n {
            z = fpoly::mulmod_poly(&field, &horner(&pp, &z), &qinv, &ep);
        }
    }
    // values of prod_α (λ_j - r(α)) = Res(e, λ_j - r) / lc(e)^deg(λ_j - r)
    let lc_inv = crate::poly::ff::invmod(*ep.last().expect("nonzero"), p);
    let xs: Vec<u64> = (0..=big_n as u64).collect();
    let ys: Vec<u64> = xs
        .iter()
        .map(|&lam| {
            let g = fpoly::sub(&field, &vec![lam], &acc);
            if g.is_empty() {
                return 0;
            }
            let res = fpoly::resultant(&field, &ep, &g);
            let k = (g.len() - 1) as u128;
            mulmod(res, crate::poly::ff::powmod(lc_inv, k, p), p)
        })
        .collect();
    let mut out = fpoly::interpolate(&field, &xs, &ys);
    out.resize(big_n + 1, 0);
    if out[big_n] != 1 {
        return None;
    }
    Some(out)
}

/// Sorted multiset of lengths `|ρ|` over all fixed points of `f^n`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LengthSpectrum {
    /// `L_n`, ascending, cardinality `d^n + 1`.
    pub lengths: Vec<f64>,
    /// `RL_n`: entries above `1 + guard`, ascending.
    pub repelling: Vec<f64>,
    /// Entries within the guard band around 1.
    pub boundary: Vec<f64>,
    pub guard: f64,
}

/// Lengths from classes: the roots of each minimal polynomial, repeated by
/// the class multiplicity.
pub fn length_spectrum_from_classes(classes: &[AlgebraicClass], precision: u32) -> Result<LengthSpectrum> {
    let guard = 2f64.powi(-(precision as i32) / 2);
    let mut lengths = Vec::new();
    for c in classes {
        let roots = numeric::complex_roots_prec(&c.minpoly, precision)?;
        for r in &roots.roots {
            for _ in 0..c.multiplicity {
                lengths.push(r.norm());
            }
        }
    }
    lengths.sort_by(f64::total_cmp);
    let repelling = lengths.iter().copied().filter(|&l| l > 1.0 + guard).collect();
    let boundary = lengths
        .iter()
        .copied()
        .filter(|&l| (l - 1.0).abs() <= guard)
        .collect();
    Ok(LengthSpectrum {
        lengths,
        repelling,
        boundary,
        guard,
    })
}

/// Period-wise table of classes and length spectra.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectrumTable {
    pub periods: Vec<PeriodEntry>,
    /// `RL*_m = RL_{m!}` for every `m` with `m! <= max period`.
    pub rl_star: Vec<(usize, Vec<f64>)>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PeriodEntry {
    pub period: usize,
    pub classes: Vec<AlgebraicClass>,
    pub spectrum: LengthSpectrum,
}

impl SpectrumEngine {
    pub fn spectrum_table(&mut self, max_period: usize, precision: u32) -> Result<SpectrumTable> {
        let mut periods = Vec::new();
        for n in 1..=max_period {
            periods.push(PeriodEntry {
                period: n,
                classes: self.galois_classes(n, true)?,
                spectrum: self.length_spectrum(n, precision)?,
            });
        }
        let mut rl_star = Vec::new();
        let mut m = 1;
        while factorial(m).is_some_and(|f| f <= max_period) {
            let f = factorial(m).expect("checked");
            rl_star.push((m, periods[f - 1].spectrum.repelling.clone()));
            m += 1;
        }
        Ok(SpectrumTable { periods, rl_star })
    }

    /// `RL*_m = RL_{m!}`, refusing `m` above `max_m`.
    pub fn rl_star(&mut self, m: usize, max_m: usize, precision: u32) -> Result<Vec<f64>> {
        if m == 0 {
            return Err(Error::InvalidInput("RL* index must be at least 1".into()));
        }
        if m > max_m {
            return Err(Error::BudgetExceeded(format!("RL*_{m} needs period {m}!, above the cap m <= {max_m}")));
        }
        let n = factorial(m).ok_or_else(|| Error::BudgetExceeded("factorial overflow".into()))?;
        Ok(self.length_spectrum(n, precision)?.repelling)
    }
}

fn factorial(m: usize) -> Option<usize> {
    (1..=m).try_fold(1usize, |acc, k| acc.checked_mul(k))
}

/// Default cap on the `RL*` index.
pub const RL_STAR_MAX: usize = 3;

#[cfg(test)]
mod tests {
    use super::*;

    fn p(c: &[i64]) -> IntPoly {
        IntPoly::from_i64s(c)
    }

    fn map(num: &[i64], den: &[i64]) -> RationalMap {
        RationalMap::from_i64s(num, den).unwrap()
    }

    #[test]
    fn fixed_point_forms() {
        let f = map(&[1, 0, 1], &[1]);
        let mut e = SpectrumEngine::new(&f);
        let phi = e.fixed_point_form(1).unwrap();
        assert_eq!(phi.degree, 3);
        assert_eq!(phi.infinity_multiplicity(), 1);
        assert_eq!(phi.poly, p(&[1, -1, 1]));
        for n in 1..=4 {
            assert_eq!(e.fixed_point_form(n).unwrap().degree, (1 << n) + 1);
        }
        let sq = map(&[0, 0, 1], &[1]);
        let phi2 = SpectrumEngine::new(&sq).fixed_point_form(2).unwrap();
        assert_eq!(phi2.degree, 5);
        assert_eq!(phi2.poly, p(&[0, -1, 0, 0, 1]));
    }

    #[test]
    fn exact_period_forms() {
        let f = map(&[1, 0, 1], &[1]);
        let mut e = SpectrumEngine::new(&f);
        assert_eq!(e.exact_period_form(2).unwrap().form.poly, p(&[2, 1, 1]));
        assert_eq!(e.exact_period_form(3).unwrap().form.poly, p(&[5, 4, 7, 3, 4, 1, 1]));
        let g = map(&[-1, 0, 1], &[1]);
        let e3 = SpectrumEngine::new(&g).exact_period_form(3).unwrap();
        assert_eq!(e3.form.poly, p(&[1, 0, 1, -1, -2, 1, 1]));
        assert!(!e3.division_fallback);
    }

    #[test]
    fn sigma_examples() {
        let f = map(&[1, 0, 1], &[1]);
        let mut e = SpectrumEngine::new(&f);
        assert_eq!(e.multiplier_polynomial(1, false).unwrap(), p(&[0, 4, -2, 1]));
        let s2 = e.multiplier_polynomial(2, true).unwrap();
        assert_eq!(s2, p(&[-8, 1]).pow(2));
        let classes = e.galois_classes(3, true).unwrap();
        assert_eq!(classes.len(), 1);
        assert_eq!(classes[0].minpoly.deg(), 2);
        assert_eq!(classes[0].multiplicity, 3);
        assert_eq!(classes[0].minpoly.coeff(0), BigInt::from(320));
    }

    #[test]
    fn monomial_classes() {
        let sq = map(&[0, 0, 1], &[1]);
        let mut e = SpectrumEngine::new(&sq);
        let c1 = e.galois_classes(1, false).unwrap();
        // fixed points 0, ∞ (λ = 0 twice) and 1 (λ = 2)
        assert_eq!(c1, vec![
            AlgebraicClass { minpoly: p(&[-2, 1]), period: 1, multiplicity: 1, exact_period: false },
            AlgebraicClass { minpoly: p(&[0, 1]), period: 1, multiplicity: 2, exact_period: false },
        ]);
        let c3 = e.galois_classes(3, true).unwrap();
        assert_eq!(c3, vec![AlgebraicClass { minpoly: p(&[-8, 1]), period: 3, multiplicity: 6, exact_period: true }]);
    }

    #[test]
    fn conjugation_constant_skips_roots() {
        let form = BinaryForm::new(3, &p(&[0, -1, 1]));
        assert_eq!(conjugation_constant(&form), -1);
    }
}
