use num_bigint::{BigInt, BigUint};
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use proptest::prelude::*;

use spectra_core::numeric::{self, spherical_derivative};
use spectra_core::poly::factor_over_z;
use spectra_core::rog::{self, rog_of_rational, RogVector};
use spectra_core::sieve::{self, SieveOptions};
use spectra_core::{Budget, IntPoly, Mobius, RationalMap, SpectrumEngine};

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, ..ProptestConfig::default() }
}

/// Degree-2 maps with small coefficients.
fn quadratic_maps() -> impl Strategy<Value = RationalMap> {
    (prop::collection::vec(-3i64..=3, 3), prop::collection::vec(-2i64..=2, 1..=3))
        .prop_filter_map("not a degree-2 map", |(num, den)| {
            RationalMap::from_i64s(&num, &den).ok().filter(|f| f.degree() == 2)
        })
}

fn mobius() -> impl Strategy<Value = Mobius> {
    (-2i64..=2, -2i64..=2, -2i64..=2, -2i64..=2)
        .prop_filter_map("singular", |(a, b, c, d)| Mobius::from_ints(a, b, c, d).ok())
}

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

/// Homogeneous evaluation in floating point, for the cocycle check.
fn eval_hom(f: &RationalMap, x: Complex64, y: Complex64) -> (Complex64, Complex64) {
    let d = f.degree();
    let ev = |p: &IntPoly| {
        (0..=d)
            .map(|i| x.powu(i as u32) * y.powu((d - i) as u32) * p.coeff(i).to_f64().unwrap())
            .sum::<Complex64>()
    };
    (ev(f.num()), ev(f.den()))
}

/// Rank by plain rational Gaussian elimination.
fn oracle_rank(rows: &[Vec<BigRational>]) -> usize {
    let mut m: Vec<Vec<BigRational>> = rows.to_vec();
    let cols = m.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..m.len()).find(|&r| !m[r][c].is_zero()) else { continue };
        m.swap(rank, p);
        for r in 0..m.len() {
            if r != rank && !m[r][c].is_zero() {
                let factor = &m[r][c] / &m[rank][c];
                for k in 0..cols {
                    let v = &factor * &m[rank][k];
                    m[r][k] -= v;
                }
            }
        }
        rank += 1;
    }
    rank
}

const PRIMES: [u64; 4] = [2, 3, 5, 7];

fn rog_rows() -> impl Strategy<Value = Vec<Vec<(i64, i64)>>> {
    prop::collection::vec(prop::collection::vec((-3i64..=3, 1i64..=2), PRIMES.len()), 0..6)
}

fn to_vectors(rows: &[Vec<(i64, i64)>]) -> (Vec<RogVector>, Vec<Vec<BigRational>>) {
    let dense: Vec<Vec<BigRational>> =
        rows.iter().map(|r| r.iter().map(|&(n, d)| q(n, d)).collect()).collect();
    let vs = dense
        .iter()
        .map(|r| {
            RogVector::from_pairs(
                PRIMES.iter().zip(r).map(|(&p, v)| (BigUint::from(p), v.clone())),
            )
        })
        .collect();
    (vs, dense)
}

proptest! {
    #![proptest_config(config(24))]

    #[test]
    fn fixed_point_counts(f in quadratic_maps()) {
        let mut e = SpectrumEngine::new(&f);
        let d = f.degree();
        for n in 1..=3 {
            prop_assert_eq!(e.fixed_point_form(n).unwrap().degree, d.pow(n as u32) + 1);
            let total: usize = (1..=n)
                .filter(|m| n % m == 0)
                .map(|m| e.exact_period_form(m).unwrap().form.degree)
                .sum();
            prop_assert_eq!(total, d.pow(n as u32) + 1);
        }
    }

    #[test]
    fn multiplier_polynomial_degree(f in quadratic_maps()) {
        let mut e = SpectrumEngine::new(&f);
        for n in 1..=2 {
            let s = e.multiplier_polynomial(n, false).unwrap();
            prop_assert_eq!(s.deg(), f.degree().pow(n as u32) + 1);
            prop_assert!(s.is_primitive());
        }
    }

    #[test]
    fn conjugation_invariance(f in quadratic_maps(), m in mobius()) {
        let g = f.conjugate(&m).unwrap();
        let mut a = SpectrumEngine::new(&f);
        let mut b = SpectrumEngine::new(&g);
        for n in 1..=2 {
            prop_assert_eq!(a.multiplier_polynomial(n, false).unwrap(), b.multiplier_polynomial(n, false).unwrap());
            prop_assert_eq!(a.multiplier_polynomial(n, true).unwrap(), b.multiplier_polynomial(n, true).unwrap());
        }
    }

    #[test]
    fn normalization_ignores_scaling(num in prop::collection::vec(-4i64..=4, 3), den in prop::collection::vec(-4i64..=4, 1..=3), k in 1i64..=6) {
        let plain = |v: &[i64], s: i64| v.iter().map(|&c| q(c, s)).collect::<Vec<_>>();
        let a = RationalMap::parse_normalize(&plain(&num, 1), &plain(&den, 1));
        let b = RationalMap::parse_normalize(&plain(&num, k), &plain(&den, k));
        prop_assert_eq!(a.ok(), b.ok());
    }

    #[test]
    fn holomorphic_fixed_point_index(f in quadratic_maps()) {
        // skip parabolic fixed points
        let sigma = SpectrumEngine::new(&f).multiplier_polynomial(1, false).unwrap();
        prop_assume!(!sigma.eval(&BigInt::one()).is_zero());
        let one = Complex64::new(1.0, 0.0);
        let rhos: Vec<Complex64> = numeric::multipliers_numeric(&f, 1).unwrap().into_iter().map(|m| m.rho).collect();
        prop_assume!(rhos.iter().all(|r| (one - r).norm() > 1e-3));
        let index: Complex64 = rhos.iter().map(|r| one / (one - r)).sum();
        prop_assert!((index - one).norm() < 1e-6, "index {}", index);
    }

    #[test]
    fn spherical_derivative_is_a_cocycle(f in quadratic_maps(), re in -2.0f64..2.0, im in -2.0f64..2.0) {
        let f2 = f.compose_after(&f, &Budget::default()).unwrap();
        let z = (Complex64::new(re, im), Complex64::new(1.0, 0.0));
        let (fx, fy) = eval_hom(&f, z.0, z.1);
        prop_assume!(fx.norm() + fy.norm() > 1e-6);
        let lhs = spherical_derivative(&f2, z.0, z.1);
        let rhs = spherical_derivative(&f, fx, fy) * spherical_derivative(&f, z.0, z.1);
        prop_assert!((lhs - rhs).abs() <= 1e-8 * lhs.max(rhs).max(1.0), "{} vs {}", lhs, rhs);
    }

    #[test]
    fn rog_is_a_homomorphism(a in (1i64..5000, 1i64..5000), b in (1i64..5000, 1i64..5000), k in 1i64..4) {
        let x = q(a.0, a.1);
        let y = q(-b.0, b.1);
        let rx = rog_of_rational(&x).unwrap();
        let ry = rog_of_rational(&y).unwrap();
        prop_assert_eq!(rog_of_rational(&(&x * &y)).unwrap(), rx.add(&ry));
        prop_assert_eq!(rog_of_rational(&x.recip()).unwrap(), rx.scale(&q(-1, 1)));
        let xk = (0..k).fold(BigRational::one(), |acc, _| acc * &x);
        prop_assert_eq!(rog_of_rational(&xk).unwrap(), rx.scale(&q(k, 1)));
        prop_assert!((rx.log_value() - x.abs().to_f64().unwrap().ln()).abs() < 1e-9);
    }

    #[test]
    fn rank_matches_gaussian_elimination(rows in rog_rows()) {
        let (vs, dense) = to_vectors(&rows);
        let r = rog::rank(&vs);
        prop_assert_eq!(r, oracle_rank(&dense));
        prop_assert!(r <= vs.len().min(PRIMES.len()));
        // invariant under reordering, nonzero scaling and appending a combination
        let mut rev = vs.clone();
        rev.reverse();
        prop_assert_eq!(rog::rank(&rev), r);
        let scaled: Vec<RogVector> = vs.iter().map(|v| v.scale(&q(-3, 2))).collect();
        prop_assert_eq!(rog::rank(&scaled), r);
        if vs.len() >= 2 {
            let mut more = vs.clone();
            more.push(vs[0].add(&vs[1].scale(&q(5, 7))));
            prop_assert_eq!(rog::rank(&more), r);
        }
    }

    #[test]
    fn factorization_round_trip(coeffs in prop::collection::vec(-20i64..=20, 2..=7)) {
        let a = IntPoly::from_i64s(&coeffs);
        prop_assume!(!a.is_zero());
        let fac = factor_over_z(&a).unwrap();
        prop_assert_eq!(fac.expand(), a);
        for (i, (g, e)) in fac.factors.iter().enumerate() {
            prop_assert!(*e >= 1 && g.deg() >= 1);
            prop_assert!(g.is_primitive() && g.lc().is_positive());
            prop_assert!(fac.factors[i + 1..].iter().all(|(h, _)| h != g));
        }
    }

    #[test]
    fn lyapunov_is_reproducible(f in quadratic_maps(), seed in any::<u64>()) {
        let a = numeric::lyapunov_estimate(&f, 400, 20, seed).unwrap();
        let b = numeric::lyapunov_estimate(&f, 400, 20, seed).unwrap();
        prop_assert_eq!(a.value.to_bits(), b.value.to_bits());
        prop_assert_eq!(a.stderr.to_bits(), b.stderr.to_bits());
    }
}

proptest! {
    #![proptest_config(config(12))]

    #[test]
    fn sieve_independent_of_job_split(c in 1i64..=4, pmin in 2u64..60, width in 0u64..120, jobs in 2usize..=4) {
        let f = RationalMap::from_i64s(&[c, 0, 1], &[1]).unwrap();
        let opts = SieveOptions { pmin, pmax: pmin + width, kmax: 2, jobs: 1 };
        let one = sieve::sieve(&f, &opts).unwrap();
        let many = sieve::sieve(&f, &SieveOptions { jobs, ..opts }).unwrap();
        prop_assert_eq!(one, many);
    }
}
