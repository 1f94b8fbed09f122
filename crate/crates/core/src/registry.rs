//! Named algorithm strategies.
//!
//! Every solver and baseline implements [`Algorithm`]; the harness looks them
//! up by name in a [`Registry`] and drives them through
//! [`crate::runner::run`].

use std::collections::BTreeMap;
use std::fmt;

use crate::baselines::{Agd, BaselineConfig, Ccd, Mu, Mue};
use crate::error::{Error, Result};
use crate::matrix::FactorPair;
use crate::model::KlProblem;
use crate::solvers::{Mmbpg, Mmbpge, SolverConfig, Variant};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RestartReason {
    #[default]
    None,
    /// The extrapolated point left the open orthant.
    Nonpositive,
    /// `D_φ(Z^k, Y^k) > ρ·D_φ(Z^{k-1}, Z^k)`.
    DistanceTest,
}

impl RestartReason {
    pub fn as_str(self) -> &'static str {
        match self {
            RestartReason::None => "none",
            RestartReason::Nonpositive => "nonpositive",
            RestartReason::DistanceTest => "distance_test",
        }
    }
}

impl fmt::Display for RestartReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for RestartReason {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" | "" => Ok(RestartReason::None),
            "nonpositive" => Ok(RestartReason::Nonpositive),
            "distance_test" => Ok(RestartReason::DistanceTest),
            other => Err(Error::config(format!("unknown restart reason `{other}`"))),
        }
    }
}

/// Per-step bookkeeping reported by a strategy. Fields that do not apply to
/// an algorithm stay `None`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct StepInfo {
    pub restart: RestartReason,
    pub lambda_w: Option<f64>,
    pub lambda_h: Option<f64>,
    pub l_w: Option<f64>,
    pub l_h: Option<f64>,
    pub beta: Option<f64>,
    /// `M` used for the potential `Φ_M = Ψ + M·D_φ(Z^k, Z^{k+1})`.
    pub potential_m: Option<f64>,
    /// `D_φ(Z^{k-1}, Z^k)`, as used by the restart test.
    pub bregman_prev: Option<f64>,
    /// `D_φ(Z^k, Z^{k+1})`.
    pub bregman_step: Option<f64>,
    /// A line search gave up; the iterate was left unchanged.
    pub step_failed: bool,
}

/// One iteration of an algorithm that maps `Z^k` to `Z^{k+1}`.
///
/// Implementations may carry state between calls (momentum, step sizes); a
/// fresh instance is created per run.
pub trait Algorithm: Send {
    fn name(&self) -> &str;

    fn step(&mut self, problem: &KlProblem, z: &FactorPair) -> Result<(FactorPair, StepInfo)>;
}

/// Everything a factory may need to build a strategy.
#[derive(Debug, Clone, Default)]
pub struct AlgorithmSettings {
    pub solver: SolverConfig,
    pub baseline: BaselineConfig,
}

pub type Factory = fn(&AlgorithmSettings, &KlProblem) -> Result<Box<dyn Algorithm>>;

struct Entry {
    description: &'static str,
    factory: Factory,
}

pub struct Registry {
    entries: BTreeMap<String, Entry>,
}

impl Default for Registry {
    fn default() -> Self {
        Self::with_builtins()
    }
}

impl Registry {
    pub fn empty() -> Self {
        Self {
            entries: BTreeMap::new(),
        }
    }

    pub fn with_builtins() -> Self {
        let mut reg = Self::empty();
        reg.register(
            "mmbpg",
            "majorization-minimization Bregman proximal gradient",
            |s, _| {
                let mut cfg = s.solver.clone();
                cfg.variant = Variant::Mmbpg;
                Ok(Box::new(Mmbpg::new(cfg)?))
            },
        );
        reg.register(
            "mmbpge",
            "MMBPG with extrapolation and adaptive restart",
            |s, _| {
                let mut cfg = s.solver.clone();
                cfg.variant = Variant::Mmbpge;
                Ok(Box::new(Mmbpge::new(cfg)?))
            },
        );
        reg.register("mu", "multiplicative updates", |_, _| Ok(Box::new(Mu::new())));
        reg.register(
            "mue",
            "multiplicative updates with clipped extrapolation",
            |s, _| Ok(Box::new(Mue::new(s.baseline.rho, s.baseline.extrapolate)?)),
        );
        reg.register("ccd", "cyclic coordinate descent (Newton per coordinate)", |s, p| {
            Ok(Box::new(Ccd::new(p, s.baseline.ccd_inner_iters)?))
        });
        reg.register(
            "agd",
            "alternating proximal gradient with backtracking",
            |s, _| Ok(Box::new(Agd::new(&s.baseline)?)),
        );
        reg
    }

    /// Adds or replaces a strategy.
    pub fn register(&mut self, name: &str, description: &'static str, factory: Factory) {
        self.entries.insert(
            name.to_ascii_lowercase(),
            Entry {
                description,
                factory,
            },
        );
    }

    pub fn contains(&self, name: &str) -> bool {
        self.entries.contains_key(&name.to_ascii_lowercase())
    }

    pub fn names(&self) -> Vec<&str> {
        self.entries.keys().map(String::as_str).collect()
    }

    pub fn describe(&self) -> Vec<(&str, &'static str)> {
        self.entries
            .iter()
            .map(|(k, e)| (k.as_str(), e.description))
            .collect()
    }

    pub fn create(
        &self,
        name: &str,
        settings: &AlgorithmSettings,
        problem: &KlProblem,
    ) -> Result<Box<dyn Algorithm>> {
        let entry = self.entries.get(&name.to_ascii_lowercase()).ok_or_else(|| {
            Error::config(format!(
                "unknown algorithm `{name}` (known: {})",
                self.names().join(", ")
            ))
        })?;
        (entry.factory)(settings, problem)
    }
}
