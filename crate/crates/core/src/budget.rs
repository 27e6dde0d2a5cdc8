use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Environment variable overriding [`Budget::coeff_bytes`], in MiB.
pub const BUDGET_ENV: &str = "SPECLAB_BUDGET_MB";

/// Resource limits shared by the exact kernels.
///
/// Exceeding any limit is reported as [`Error::BudgetExceeded`]; nothing is
/// silently truncated.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budget {
    /// Total serialized size (bytes) of the coefficients of one polynomial.
    pub coeff_bytes: usize,
    /// Maximum number of modular factors entering Zassenhaus recombination.
    pub subset_cap: usize,
    /// Maximum degree accepted by integer factorization.
    pub factor_degree_cap: usize,
    /// Pollard rho iterations allowed when factoring one integer.
    pub rho_iterations: u64,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            coeff_bytes: 1 << 20,
            subset_cap: 12,
            factor_degree_cap: 1024,
            rho_iterations: 1 << 24,
        }
    }
}

impl Budget {
    /// Default budget with the coefficient limit taken from `SPECLAB_BUDGET_MB`
    /// when set.
    pub fn from_env() -> Result<Self> {
        let mut b = Budget::default();
        if let Ok(v) = std::env::var(BUDGET_ENV) {
            let mb: usize = v
                .trim()
                .parse()
                .map_err(|_| Error::InvalidInput(format!("{BUDGET_ENV}={v} is not an integer")))?;
            if mb == 0 {
                return Err(Error::InvalidInput(format!("{BUDGET_ENV} must be positive")));
            }
            b.coeff_bytes = mb << 20;
        }
        Ok(b)
    }

    pub(crate) fn check_bytes(&self, bytes: usize, what: &str) -> Result<()> {
        if bytes > self.coeff_bytes {
            Err(Error::BudgetExceeded(format!(
                "{what}: {bytes} coefficient bytes exceeds limit {}",
                self.coeff_bytes
            )))
        } else {
            Ok(())
        }
    }
}
