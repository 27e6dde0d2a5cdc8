//! Python bindings. Structured results cross the boundary as JSON-shaped
//! dicts and lists; exact integers become Python ints.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;
use serde::Serialize;

use spectra_core::numeric::{self, TestFunction, DEFAULT_BURN_IN};
use spectra_core::pcf::{self, PcfBudgets};
use spectra_core::rog;
use spectra_core::sieve::{self, SieveOptions};
use spectra_core::{Error, ErrorCategory, IntPoly, Mobius, SpectrumEngine};

create_exception!(spectra_lab, BudgetExceededError, PyException);
create_exception!(spectra_lab, InternalError, PyException);

fn to_py_err(e: Error) -> PyErr {
    match e.category() {
        ErrorCategory::InvalidInput => PyValueError::new_err(e.to_string()),
        ErrorCategory::Budget => BudgetExceededError::new_err(e.to_string()),
        ErrorCategory::Internal => InternalError::new_err(e.to_string()),
    }
}

fn to_py<'py, T: Serialize>(py: Python<'py>, v: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(v).map_err(|e| InternalError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn int_list<'py>(py: Python<'py>, p: &IntPoly) -> PyResult<Vec<Bound<'py, PyAny>>> {
    let int = py.import("builtins")?.getattr("int")?;
    p.to_strings().into_iter().map(|s| int.call1((s,))).collect()
}

/// Accepts Python ints, `fractions.Fraction` and strings like `"-1/10"`.
fn parse_coeff(obj: &Bound<'_, PyAny>) -> PyResult<BigRational> {
    let text = obj.str()?.to_string();
    let bad = || PyValueError::new_err(format!("bad rational coefficient {text:?}"));
    let (n, d) = match text.trim().split_once('/') {
        Some((n, d)) => (n.trim().to_string(), d.trim().to_string()),
        None => (text.trim().to_string(), "1".to_string()),
    };
    let n: BigInt = n.parse().map_err(|_| bad())?;
    let d: BigInt = d.parse().map_err(|_| bad())?;
    if d == BigInt::from(0) {
        return Err(bad());
    }
    Ok(BigRational::new(n, d))
}

/// A rational map of degree at least 2 over Q, with a memoizing engine
/// for its periodic-point data.
#[pyclass(name = "RationalMap", module = "spectra_lab")]
struct PyRationalMap {
    engine: SpectrumEngine,
}

impl PyRationalMap {
    fn map(&self) -> &spectra_core::RationalMap {
        self.engine.map()
    }
}

#[pymethods]
impl PyRationalMap {
    /// `RationalMap(num, den)` with coefficients in ascending degree.
    #[new]
    fn new(num: Vec<Bound<'_, PyAny>>, den: Vec<Bound<'_, PyAny>>) -> PyResult<Self> {
        let num = num.iter().map(parse_coeff).collect::<PyResult<Vec<_>>>()?;
        let den = den.iter().map(parse_coeff).collect::<PyResult<Vec<_>>>()?;
        let f = spectra_core::RationalMap::parse_normalize(&num, &den).map_err(to_py_err)?;
        Ok(PyRationalMap { engine: SpectrumEngine::new(&f) })
    }

    #[getter]
    fn degree(&self) -> usize {
        self.map().degree()
    }

    #[getter]
    fn num<'py>(&self, py: Python<'py>) -> PyResult<Vec<Bound<'py, PyAny>>> {
        int_list(py, self.map().num())
    }

    #[getter]
    fn den<'py>(&self, py: Python<'py>) -> PyResult<Vec<Bound<'py, PyAny>>> {
        int_list(py, self.map().den())
    }

    fn __repr__(&self) -> String {
        format!("RationalMap(num={:?}, den={:?})", self.map().num().to_strings(), self.map().den().to_strings())
    }

    /// `m ∘ f ∘ m⁻¹` for the integer Möbius map `(a z + b) / (c z + d)`.
    fn conjugate(&self, a: i64, b: i64, c: i64, d: i64) -> PyResult<Self> {
        let m = Mobius::from_ints(a, b, c, d).map_err(to_py_err)?;
        let g = self.map().conjugate(&m).map_err(to_py_err)?;
        Ok(PyRationalMap { engine: SpectrumEngine::with_budget(&g, self.engine.budget().clone()) })
    }

    /// Coefficients of the dehomogenized fixed-point form of `f^n` and its degree.
    fn fixed_point_form<'py>(&mut self, py: Python<'py>, n: usize) -> PyResult<(Vec<Bound<'py, PyAny>>, usize)> {
        let form = self.engine.fixed_point_form(n).map_err(to_py_err)?;
        Ok((int_list(py, &form.poly)?, form.degree))
    }

    fn exact_period_form<'py>(&mut self, py: Python<'py>, n: usize) -> PyResult<(Vec<Bound<'py, PyAny>>, usize)> {
        let form = self.engine.exact_period_form(n).map_err(to_py_err)?.form;
        Ok((int_list(py, &form.poly)?, form.degree))
    }

    #[pyo3(signature = (n, exact_only = false))]
    fn multiplier_polynomial<'py>(&mut self, py: Python<'py>, n: usize, exact_only: bool) -> PyResult<Vec<Bound<'py, PyAny>>> {
        let s = self.engine.multiplier_polynomial(n, exact_only).map_err(to_py_err)?;
        int_list(py, &s)
    }

    #[pyo3(signature = (n, exact_only = false))]
    fn galois_classes<'py>(&mut self, py: Python<'py>, n: usize, exact_only: bool) -> PyResult<Bound<'py, PyAny>> {
        let classes = self.engine.galois_classes(n, exact_only).map_err(to_py_err)?;
        to_py(py, &classes)
    }

    #[pyo3(signature = (n, precision = 53))]
    fn length_spectrum<'py>(&mut self, py: Python<'py>, n: usize, precision: u32) -> PyResult<Bound<'py, PyAny>> {
        let s = self.engine.length_spectrum(n, precision).map_err(to_py_err)?;
        to_py(py, &s)
    }

    fn rank_growth(&mut self, nmax: usize) -> PyResult<Vec<usize>> {
        let (rg, _) = pcf::rank_growth_with(&mut self.engine, nmax).map_err(to_py_err)?;
        Ok(rg.dims)
    }

    /// Multipliers of `f^n` at its exact-period points, as complex numbers.
    fn multipliers_numeric(&self, n: usize) -> PyResult<Vec<Complex64>> {
        let ms = numeric::multipliers_numeric(self.map(), n).map_err(to_py_err)?;
        Ok(ms.into_iter().map(|m| m.rho).collect())
    }

    #[pyo3(signature = (prime_min = 2, prime_max = 100, ext_degree = 2, jobs = 1))]
    fn sieve<'py>(&self, py: Python<'py>, prime_min: u64, prime_max: u64, ext_degree: usize, jobs: usize) -> PyResult<Bound<'py, PyAny>> {
        let opts = SieveOptions { pmin: prime_min, pmax: prime_max, kmax: ext_degree, jobs: jobs.max(1) };
        let r = sieve::sieve(self.map(), &opts).map_err(to_py_err)?;
        to_py(py, &r)
    }

    fn certify<'py>(&mut self, py: Python<'py>, target_dim: usize, prime_max: u64, max_period: usize) -> PyResult<Bound<'py, PyAny>> {
        let out = rog::independence_certificate_with(&mut self.engine, target_dim, prime_max, max_period)
            .map_err(to_py_err)?;
        to_py(py, &out)
    }

    #[pyo3(signature = (samples, seed, burn_in = DEFAULT_BURN_IN))]
    fn lyapunov<'py>(&self, py: Python<'py>, samples: usize, seed: u64, burn_in: usize) -> PyResult<Bound<'py, PyAny>> {
        let est = numeric::lyapunov_estimate(self.map(), samples, burn_in, seed).map_err(to_py_err)?;
        to_py(py, &est)
    }

    #[pyo3(signature = (steps = 64, height_bits = 4096, rank_period = 3))]
    fn classify_pcf<'py>(&self, py: Python<'py>, steps: usize, height_bits: u64, rank_period: usize) -> PyResult<Bound<'py, PyAny>> {
        let budgets = PcfBudgets { step_budget: steps, height_budget_bits: height_bits, rank_period };
        to_py(py, &pcf::classify(self.map(), &budgets))
    }

    /// Gap between the period-`n` point average of a test function and its
    /// sample average along the backward orbit.
    fn equidist_gap(&self, n: usize, test_fn: &str, samples: usize, seed: u64) -> PyResult<f64> {
        let g: TestFunction = test_fn
            .parse()
            .map_err(|_| PyValueError::new_err(format!("unknown test function {test_fn:?}")))?;
        let r = numeric::equidist_gap(self.map(), n, g, samples, seed).map_err(to_py_err)?;
        Ok(r.gap)
    }
}

/// Exact rank over Q of rog vectors given as `{prime: "p/q"}` dicts.
#[pyfunction]
fn rog_rank(vectors: Vec<std::collections::BTreeMap<u64, String>>) -> PyResult<usize> {
    let mut vs = Vec::with_capacity(vectors.len());
    for v in vectors {
        let mut pairs = Vec::new();
        for (p, q) in v {
            let q = parse_rational_str(&q)?;
            pairs.push((p.into(), q));
        }
        vs.push(rog::RogVector::from_pairs(pairs));
    }
    Ok(rog::rank(&vs))
}

fn parse_rational_str(s: &str) -> PyResult<BigRational> {
    let bad = || PyValueError::new_err(format!("bad rational {s:?}"));
    let (n, d) = s.split_once('/').unwrap_or((s, "1"));
    let n: BigInt = n.trim().parse().map_err(|_| bad())?;
    let d: BigInt = d.trim().parse().map_err(|_| bad())?;
    if d == BigInt::from(0) {
        return Err(bad());
    }
    Ok(BigRational::new(n, d))
}

#[pymodule]
fn spectra_lab(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyRationalMap>()?;
    m.add_function(wrap_pyfunction!(rog_rank, m)?)?;
    m.add("BudgetExceededError", m.py().get_type::<BudgetExceededError>())?;
    m.add("InternalError", m.py().get_type::<InternalError>())?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
