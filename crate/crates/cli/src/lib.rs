//! Command-line surface for spectra-core: argument parsing, map documents
//! and canonical JSON run reports.

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use spectra_core::numeric::{self, TestFunction, DEFAULT_BURN_IN};
use spectra_core::pcf::{self, OrbitStatus, PcfBudgets, Verdict};
use spectra_core::rog::{self, verify_upper_triangle};
use spectra_core::sieve::{self, SieveOptions};
use spectra_core::spectrum::length_spectrum_from_classes;
use spectra_core::{Budget, Error, ErrorCategory, RationalMap, SpectrumEngine};

/// Version tag of the RunReport layout.
pub const SCHEMA_VERSION: u32 = 1;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;
pub const EXIT_INTERNAL: i32 = 4;

#[derive(Parser, Debug)]
#[command(name = "spectra-lab", version, about = "Multiplier and length spectra of rational maps over Q")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct MapArg {
    /// MapDocument JSON file.
    #[arg(long = "map", value_name = "FILE")]
    pub map: PathBuf,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Multiplier classes and length spectrum at one period.
    Spectrum {
        #[command(flatten)]
        map: MapArg,
        #[arg(long)]
        period: usize,
        /// Classes of exact period only (lengths always cover all of Fix(f^N)).
        #[arg(long)]
        exact_only: bool,
        #[arg(long, default_value_t = 53)]
        precision: u32,
    },
    /// Rank of the accumulated multiplier norm vectors per period.
    Rank {
        #[command(flatten)]
        map: MapArg,
        #[arg(long)]
        max_period: usize,
    },
    /// Critical orbit cycles over finite fields.
    Sieve {
        #[command(flatten)]
        map: MapArg,
        #[arg(long)]
        prime_min: u64,
        #[arg(long)]
        prime_max: u64,
        #[arg(long, default_value_t = 2)]
        ext_degree: usize,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Upper-triangle independence certificate.
    Certify {
        #[command(flatten)]
        map: MapArg,
        #[arg(long)]
        target_dim: usize,
        #[arg(long)]
        prime_max: u64,
        #[arg(long)]
        max_period: usize,
    },
    /// Monte Carlo Lyapunov exponent.
    Lyapunov {
        #[command(flatten)]
        map: MapArg,
        #[arg(long)]
        samples: usize,
        #[arg(long, default_value_t = DEFAULT_BURN_IN)]
        burn: usize,
        #[arg(long)]
        seed: u64,
    },
    /// Post-critical finiteness classification.
    Pcf {
        #[command(flatten)]
        map: MapArg,
        #[arg(long, default_value_t = PcfBudgets::default().step_budget)]
        steps: usize,
        #[arg(long, default_value_t = PcfBudgets::default().height_budget_bits)]
        height_bits: u64,
        #[arg(long, default_value_t = PcfBudgets::default().rank_period)]
        rank_period: usize,
    },
    /// Periodic-point average against the Lyapunov-chain sample average.
    Equidist {
        #[command(flatten)]
        map: MapArg,
        #[arg(long)]
        period: usize,
        #[arg(long = "fn", value_name = "ID")]
        test_fn: String,
        #[arg(long)]
        samples: usize,
        #[arg(long)]
        seed: u64,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Spectrum { .. } => "spectrum",
            Command::Rank { .. } => "rank",
            Command::Sieve { .. } => "sieve",
            Command::Certify { .. } => "certify",
            Command::Lyapunov { .. } => "lyapunov",
            Command::Pcf { .. } => "pcf",
            Command::Equidist { .. } => "equidist",
        }
    }

    fn map_path(&self) -> &Path {
        match self {
            Command::Spectrum { map, .. }
            | Command::Rank { map, .. }
            | Command::Sieve { map, .. }
            | Command::Certify { map, .. }
            | Command::Lyapunov { map, .. }
            | Command::Pcf { map, .. }
            | Command::Equidist { map, .. } => &map.map,
        }
    }
}

/// One coefficient: a string `"p/q"` / `"n"`, or a bare JSON integer.
#[derive(Deserialize, Serialize, Debug, Clone, PartialEq)]
#[serde(untagged)]
pub enum Coefficient {
    Text(String),
    Integer(i64),
}

/// `{"num": [...], "den": [...]}`, ascending degree.
#[derive(Deserialize, Serialize, Debug, Clone, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct MapDocument {
    pub num: Vec<Coefficient>,
    pub den: Vec<Coefficient>,
}

impl MapDocument {
    pub fn from_map(f: &RationalMap) -> Self {
        let conv = |p: &spectra_core::IntPoly| p.to_strings().into_iter().map(Coefficient::Text).collect();
        MapDocument { num: conv(f.num()), den: conv(f.den()) }
    }

    pub fn to_map(&self) -> Result<RationalMap, Error> {
        let num = parse_coeffs(&self.num)?;
        let den = parse_coeffs(&self.den)?;
        RationalMap::parse_normalize(&num, &den)
    }
}

fn parse_coeffs(cs: &[Coefficient]) -> Result<Vec<BigRational>, Error> {
    cs.iter().map(parse_coefficient).collect()
}

pub fn parse_coefficient(c: &Coefficient) -> Result<BigRational, Error> {
    match c {
        Coefficient::Integer(n) => Ok(BigRational::from_integer(BigInt::from(*n))),
        Coefficient::Text(s) => {
            let t = s.trim();
            let bad = || Error::InvalidInput(format!("bad rational coefficient {s:?}"));
            let (n, d) = match t.split_once('/') {
                Some((n, d)) => (n.trim(), d.trim()),
                None => (t, "1"),
            };
            let n: BigInt = n.parse().map_err(|_| bad())?;
            let d: BigInt = d.parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(Error::InvalidInput(format!("zero denominator in {s:?}")));
            }
            Ok(BigRational::new(n, d))
        }
    }
}

pub fn read_map(path: &Path) -> Result<RationalMap, Error> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", path.display())))?;
    let doc: MapDocument = serde_json::from_str(&text)
        .map_err(|e| Error::InvalidInput(format!("malformed map document {}: {e}", path.display())))?;
    doc.to_map()
}

/// Result of one invocation: an optional report for stdout, an optional
/// diagnostic for stderr, and the exit code.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub report: Option<Value>,
    pub error: Option<Value>,
    pub exit_code: i32,
}

pub fn exit_code(cat: ErrorCategory) -> i32 {
    match cat {
        ErrorCategory::InvalidInput => EXIT_INVALID,
        ErrorCategory::Budget => EXIT_BUDGET,
        ErrorCategory::Internal => EXIT_INTERNAL,
    }
}

fn error_value(e: &Error) -> Value {
    let cat = match e.category() {
        ErrorCategory::InvalidInput => "invalid_input",
        ErrorCategory::Budget => "budget_exceeded",
        ErrorCategory::Internal => "internal",
    };
    json!({"error": {"category": cat, "message": e.to_string()}})
}

fn to_value<T: Serialize>(v: &T) -> Result<Value, Error> {
    serde_json::to_value(v).map_err(|e| Error::Internal(format!("serialization failed: {e}")))
}

struct Computed {
    params: Value,
    result: Value,
    /// Exit code for a report that is emitted but incomplete.
    exit_code: i32,
}

/// Runs one command and assembles the RunReport.
pub fn execute(cmd: &Command) -> Outcome {
    let run = || -> Result<(RationalMap, Computed, f64), Error> {
        let budget = Budget::from_env()?;
        let f = read_map(cmd.map_path())?;
        let start = Instant::now();
        let c = compute(cmd, &f, budget)?;
        Ok((f, c, start.elapsed().as_secs_f64() * 1e3))
    };
    match std::panic::catch_unwind(std::panic::AssertUnwindSafe(run)) {
        Ok(Ok((f, c, ms))) => {
            let mut report = json!({
                "command": cmd.name(),
                "map": MapDocument::from_map(&f),
                "params": c.params,
                "result": c.result,
                "timing_ms": ms,
                "version": {"schema": SCHEMA_VERSION, "engine": env!("CARGO_PKG_VERSION")},
            });
            canonicalize(&mut report);
            Outcome { report: Some(report), error: None, exit_code: c.exit_code }
        }
        Ok(Err(e)) => Outcome { report: None, error: Some(error_value(&e)), exit_code: exit_code(e.category()) },
        Err(p) => {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            let e = Error::Internal(msg);
            Outcome { report: None, error: Some(error_value(&e)), exit_code: EXIT_INTERNAL }
        }
    }
}

/// Objects are already key-sorted (serde_json's default map is ordered);
/// negative zero is normalized so equal runs print identically.
fn canonicalize(v: &mut Value) {
    match v {
        Value::Number(n) => {
            if n.as_f64() == Some(0.0) && n.is_f64() {
                *v = json!(0.0);
            }
        }
        Value::Array(a) => a.iter_mut().for_each(canonicalize),
        Value::Object(o) => o.values_mut().for_each(canonicalize),
        _ => {}
    }
}

fn compute(cmd: &Command, f: &RationalMap, budget: Budget) -> Result<Computed, Error> {
    let budget_v = to_value(&budget)?;
    let mut engine = SpectrumEngine::with_budget(f, budget.clone());
    let ok = |params: Value, result: Value| Ok(Computed { params, result, exit_code: EXIT_OK });
    match cmd {
        Command::Spectrum { period, exact_only, precision, .. } => {
            let n = *period;
            if n == 0 {
                return Err(Error::InvalidInput("period must be at least 1".into()));
            }
            if *precision < 24 || *precision > 4096 {
                return Err(Error::InvalidInput("precision must lie in [24, 4096] bits".into()));
            }
            let sigma = engine.multiplier_polynomial(n, *exact_only)?;
            let classes = engine.galois_classes(n, *exact_only)?;
            let spectrum = engine.length_spectrum(n, *precision)?;
            let listed = length_spectrum_from_classes(&classes, *precision)?;
            let class_values: Vec<Value> = classes
                .iter()
                .map(|c| {
                    let g = &c.minpoly;
                    let mut norm = BigRational::new(g.coeff(0), g.lc());
                    if g.deg() % 2 == 1 {
                        norm = -norm;
                    }
                    json!({
                        "minpoly": g.to_strings(),
                        "multiplicity": c.multiplicity,
                        "period": c.period,
                        "exact_period": c.exact_period,
                        "norm": rational_string(&norm),
                    })
                })
                .collect();
            ok(
                json!({
                    "period": n,
                    "exact_only": exact_only,
                    "precision_bits": precision,
                    "guard": spectrum.guard,
                    "budget": budget_v,
                }),
                json!({
                    "multiplier_polynomial": sigma.to_strings(),
                    "classes": class_values,
                    "class_lengths": listed.lengths,
                    "lengths": spectrum.lengths,
                    "repelling": spectrum.repelling,
                    "boundary": spectrum.boundary,
                }),
            )
        }
        Command::Rank { max_period, .. } => {
            let (rg, _) = pcf::rank_growth_with(&mut engine, *max_period)?;
            ok(json!({"max_period": max_period, "budget": budget_v}), json!({"dims": rg.dims}))
        }
        Command::Sieve { prime_min, prime_max, ext_degree, jobs, .. } => {
            if *jobs == 0 {
                return Err(Error::InvalidInput("jobs must be at least 1".into()));
            }
            let opts = SieveOptions { pmin: *prime_min, pmax: *prime_max, kmax: *ext_degree, jobs: *jobs };
            let report = sieve::sieve(f, &opts)?;
            let params = json!({
                "prime_min": prime_min,
                "prime_max": prime_max,
                "ext_degree": ext_degree,
                "jobs": jobs,
                "budget": budget_v,
            });
            ok(params, to_value(&report)?)
        }
        Command::Certify { target_dim, prime_max, max_period, .. } => {
            let outcome = rog::independence_certificate_with(&mut engine, *target_dim, *prime_max, *max_period)?;
            let check = verify_upper_triangle(&outcome.certificate);
            if check.ok != outcome.certificate.verified || rog::rank(&outcome.certificate.vectors()) != outcome.rank {
                return Err(Error::Internal("certificate re-verification disagrees".into()));
            }
            let params = json!({
                "target_dim": target_dim,
                "prime_max": prime_max,
                "max_period": max_period,
                "budget": budget_v,
            });
            let mut result = to_value(&outcome)?;
            result["reverification"] = to_value(&check)?;
            let code = if outcome.budget_exceeded { EXIT_BUDGET } else { EXIT_OK };
            Ok(Computed { params, result, exit_code: code })
        }
        Command::Lyapunov { samples, burn, seed, .. } => {
            let est = numeric::lyapunov_estimate(f, *samples, *burn, *seed)?;
            let d = f.degree() as f64;
            let floor = d.ln() / 2.0;
            ok(
                json!({"samples": samples, "burn_in": burn, "seed": seed}),
                json!({
                    "estimate": to_value(&est)?,
                    "lower_bound": floor,
                    "consistent_with_lower_bound": est.value >= floor - 3.0 * est.stderr,
                }),
            )
        }
        Command::Pcf { steps, height_bits, rank_period, .. } => {
            let budgets = PcfBudgets { step_budget: *steps, height_budget_bits: *height_bits, rank_period: *rank_period };
            if budgets.step_budget == 0 || budgets.rank_period == 0 {
                return Err(Error::InvalidInput("pcf budgets must be positive".into()));
            }
            let c = pcf::classify(f, &budgets);
            if c.verdict == Verdict::Pcf {
                let orbits = c.orbits.as_ref().ok_or_else(|| Error::Internal("PCF verdict without orbits".into()))?;
                for o in &orbits.orbits {
                    let closes = matches!(o.status, OrbitStatus::Periodic { .. } | OrbitStatus::Preperiodic { .. });
                    if !closes || !pcf::replay(f, o) {
                        return Err(Error::Internal(format!("critical class {} failed replay", o.class.id)));
                    }
                }
            }
            ok(to_value(&budgets)?, to_value(&c)?)
        }
        Command::Equidist { period, test_fn, samples, seed, .. } => {
            let g: TestFunction = test_fn
                .parse()
                .map_err(|_| Error::InvalidInput(format!("unknown test function {test_fn:?}")))?;
            let r = numeric::equidist_gap(f, *period, g, *samples, *seed)?;
            ok(
                json!({
                    "period": period,
                    "fn": g.id(),
                    "samples": samples,
                    "seed": seed,
                    "burn_in": DEFAULT_BURN_IN,
                }),
                json!({
                    "gap": r.gap,
                    "fixed_point_average": r.fixed_point_average,
                    "measure_estimate": r.measure_estimate,
                    "fixed_point_count": r.fixed_points,
                }),
            )
        }
    }
}

fn rational_string(q: &BigRational) -> String {
    if q.denom() == &BigInt::from(1) {
        q.numer().to_string()
    } else if q.denom().is_negative() {
        format!("{}/{}", -q.numer(), -q.denom())
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Serializes a report in canonical form (sorted keys, shortest floats).
pub fn render(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("Value serialization is infallible")
}
