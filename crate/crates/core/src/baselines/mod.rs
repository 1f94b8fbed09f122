//! Comparison algorithms: multiplicative updates (with and without
//! extrapolation), cyclic coordinate descent, and alternating proximal
//! gradient with backtracking.
//!
//! Note that MUe has no convergence guarantee when `g ≢ 0`.

mod agd;
mod ccd;
mod mu;

pub use agd::{agd_block_step, agd_initial_step, agd_step, Agd, Block, BlockStep};
pub use ccd::{ccd_pass, Ccd};
pub use mu::{mu_step, mue_step, Mu, Mue};

use crate::error::{Error, Result};
use crate::runner::RunOptions;

#[derive(Debug, Clone, PartialEq)]
pub struct BaselineConfig {
    /// Coordinate sweeps per block in one CCD pass.
    pub ccd_inner_iters: usize,
    /// AGD starts from step `1/(c·L₀)`.
    pub agd_c: f64,
    pub agd_shrink: f64,
    pub agd_sufficient_decrease: f64,
    pub agd_max_backtracks: usize,
    /// MUe restart threshold.
    pub rho: f64,
    /// When false, MUe runs with `β ≡ 0`.
    pub extrapolate: bool,
    pub run: RunOptions,
}

impl Default for BaselineConfig {
    fn default() -> Self {
        Self {
            ccd_inner_iters: 100,
            agd_c: 2.0,
            agd_shrink: 0.5,
            agd_sufficient_decrease: 1e-4,
            agd_max_backtracks: 50,
            rho: 0.999,
            extrapolate: true,
            run: RunOptions::default(),
        }
    }
}

impl BaselineConfig {
    pub fn validate(&self) -> Result<()> {
        if self.ccd_inner_iters == 0 {
            return Err(Error::config("ccd_inner_iters must be positive"));
        }
        if !(self.agd_c > 1.0) {
            return Err(Error::config("agd_c must exceed 1"));
        }
        if !(self.agd_shrink > 0.0 && self.agd_shrink < 1.0) {
            return Err(Error::config("agd_shrink must lie in (0, 1)"));
        }
        if !(self.agd_sufficient_decrease > 0.0 && self.agd_sufficient_decrease < 1.0) {
            return Err(Error::config("agd_sufficient_decrease must lie in (0, 1)"));
        }
        if !(self.rho > 0.0 && self.rho <= 1.0) {
            return Err(Error::config("rho must lie in (0, 1]"));
        }
        self.run.validate()
    }
}
