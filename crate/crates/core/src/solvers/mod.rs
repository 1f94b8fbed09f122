//! MMBPG and MMBPGe for KL-NMF.
//!
//! Each iteration builds the Jensen majorizer `f̂_k` at the current iterate
//! `Z^k`, takes `λ` from the smooth-adaptable constant of `(f̂_k, φ)`, and
//! solves the Bregman proximal subproblem in closed form. MMBPGe linearizes
//! `f̂_k` at an extrapolated point `Y^k` instead of `Z^k`, with Nesterov's
//! `θ` schedule and an adaptive restart.

pub mod prox;

use crate::bregman::bregman_unchecked;
use crate::error::{Error, Result};
use crate::matrix::FactorPair;
use crate::model::{build_majorizer, objective, KlProblem, MajorizerState};
use crate::registry::{Algorithm, RestartReason, StepInfo};
use crate::runner::{self, RunOptions, RunOutput};

pub use prox::{apply_prox, assemble_p, prox_step_l1, prox_step_sqfro};

/// Shrink factor `1/(1+ε)` applied to `λ` in strict mode.
pub const STRICT_EPSILON: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Variant {
    Mmbpg,
    #[default]
    Mmbpge,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StepMode {
    /// One `λ_k` for both blocks from the joint constant.
    #[default]
    Joint,
    /// Per-block `λ_{k,1}, λ_{k,2}` from the W- and H-block constants.
    Split,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum LambdaRule {
    /// `λ = 1/L`.
    #[default]
    Reciprocal,
    /// `λ_w = c_w/L_w`, `λ_h = c_h/L_h` (in joint mode both use `L_joint`).
    Scaled { c_w: f64, c_h: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub variant: Variant,
    pub step_mode: StepMode,
    pub lambda_rule: LambdaRule,
    /// Multiply `λ` by `1/(1+ε)` so that `λL < 1` holds strictly.
    pub strict_step: bool,
    pub rho: f64,
    /// Position of `M` inside the admissible interval
    /// `(ρ(1+λL)/λ, 1/λ)`, interpolated geometrically; 0.5 is the
    /// geometric midpoint.
    pub potential_position: f64,
    /// When false, `β ≡ 0` (MMBPGe then reproduces MMBPG).
    pub extrapolate: bool,
    pub run: RunOptions,
    /// Seed for initial points generated by the harness.
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            variant: Variant::Mmbpge,
            step_mode: StepMode::Joint,
            lambda_rule: LambdaRule::Reciprocal,
            strict_step: false,
            rho: 0.999,
            potential_position: 0.5,
            extrapolate: true,
            run: RunOptions::default(),
            seed: 0,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rho > 0.0 && self.rho <= 1.0) {
            return Err(Error::config(format!("rho must lie in (0, 1], got {}", self.rho)));
        }
        if let LambdaRule::Scaled { c_w, c_h } = self.lambda_rule {
            if !(c_w > 0.0 && c_h > 0.0 && c_w.is_finite() && c_h.is_finite()) {
                return Err(Error::config(format!(
                    "lambda scale factors must be positive, got ({c_w}, {c_h})"
                )));
            }
        }
        if !(0.0..=1.0).contains(&self.potential_position) {
            return Err(Error::config("potential_position must lie in [0, 1]"));
        }
        self.run.validate()
    }

    /// `(λ_w, λ_h, L_w, L_h)` for a majorizer.
    pub fn step_sizes(&self, s: &MajorizerState) -> Result<(f64, f64, f64, f64)> {
        let (l_w, l_h) = match self.step_mode {
            StepMode::Joint => (s.l_joint, s.l_joint),
            StepMode::Split => (s.l_w, s.l_h),
        };
        let (c_w, c_h) = match self.lambda_rule {
            LambdaRule::Reciprocal => (1.0, 1.0),
            LambdaRule::Scaled { c_w, c_h } => (c_w, c_h),
        };
        let shrink = if self.strict_step {
            1.0 / (1.0 + STRICT_EPSILON)
        } else {
            1.0
        };
        let lambda_w = shrink * c_w / l_w;
        let lambda_h = shrink * c_h / l_h;
        if !(lambda_w > 0.0 && lambda_h > 0.0 && lambda_w.is_finite() && lambda_h.is_finite()) {
            return Err(Error::config(format!(
                "step sizes must be positive, got ({lambda_w}, {lambda_h})"
            )));
        }
        Ok((lambda_w, lambda_h, l_w, l_h))
    }

    /// `M` for monitoring `Φ_M`. Uses the smaller step and the larger `λL`
    /// product when the blocks differ.
    pub fn potential_m(&self, lambda_w: f64, lambda_h: f64, l_w: f64, l_h: f64) -> f64 {
        let lambda = lambda_w.min(lambda_h);
        let kappa = (lambda_w * l_w).max(lambda_h * l_h);
        let lo = self.rho * (1.0 + kappa) / lambda;
        let hi = 1.0 / lambda;
        let t = self.potential_position;
        lo.powf(1.0 - t) * hi.powf(t)
    }
}

/// Momentum state of MMBPGe (and MUe).
#[derive(Debug, Clone, PartialEq)]
pub struct ExtrapolationState {
    /// `θ_{k-1}` at the start of a step.
    pub theta_curr: f64,
    /// `θ_{k-2}`.
    pub theta_prev: f64,
    pub z_prev: FactorPair,
    /// Cached `D_φ(Z^{k-1}, Z^k)`.
    pub d_prev: f64,
}

impl ExtrapolationState {
    /// Initial state `θ_0 = θ_{-1} = 1`, `Z^{-1} = Z^0`.
    pub fn new(z0: &FactorPair) -> Self {
        Self {
            theta_curr: 1.0,
            theta_prev: 1.0,
            z_prev: z0.clone(),
            d_prev: 0.0,
        }
    }

    /// `(θ_k, β_k)` from `θ_{k-1}`.
    pub fn next_coefficients(&self) -> (f64, f64) {
        let theta = next_theta(self.theta_curr);
        (theta, (self.theta_curr - 1.0) / theta)
    }

    pub(crate) fn advance(&mut self, theta: f64) {
        self.theta_prev = self.theta_curr;
        self.theta_curr = theta;
    }

    pub(crate) fn reset(&mut self) {
        self.theta_curr = 1.0;
        self.theta_prev = 1.0;
    }
}

/// `θ_k = (1 + √(1 + 4θ²_{k-1})) / 2`.
pub fn next_theta(theta: f64) -> f64 {
    (1.0 + (1.0 + 4.0 * theta * theta).sqrt()) / 2.0
}

/// Metadata of one MMBPG(e) step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepMeta {
    pub lambda_w: f64,
    pub lambda_h: f64,
    pub l_w: f64,
    pub l_h: f64,
    pub beta: f64,
    pub restart: RestartReason,
    /// `D_φ(Z^k, Z^{k+1})`.
    pub bregman_step: f64,
    pub potential_m: f64,
}

impl StepMeta {
    fn into_info(self, bregman_prev: Option<f64>) -> StepInfo {
        StepInfo {
            restart: self.restart,
            lambda_w: Some(self.lambda_w),
            lambda_h: Some(self.lambda_h),
            l_w: Some(self.l_w),
            l_h: Some(self.l_h),
            beta: Some(self.beta),
            potential_m: Some(self.potential_m),
            bregman_prev,
            bregman_step: Some(self.bregman_step),
            step_failed: false,
        }
    }
}

/// Prox step from the majorizer built at `Z^k`, linearized at `y`.
fn prox_from(
    p: &KlProblem,
    s: &MajorizerState,
    y: &FactorPair,
    cfg: &SolverConfig,
) -> Result<(FactorPair, f64, f64, f64, f64)> {
    let (lambda_w, lambda_h, l_w, l_h) = cfg.step_sizes(s)?;
    let (pw, ph) = prox::assemble_unchecked(s, y, lambda_w, lambda_h);
    let next = apply_prox(p.reg(), &pw, &ph, lambda_w, lambda_h);
    if !next.all_finite() {
        return Err(Error::NonFinite("proximal step"));
    }
    Ok((next, lambda_w, lambda_h, l_w, l_h))
}

/// One MMBPG iteration from `z`.
pub fn mmbpg_step(p: &KlProblem, z: &FactorPair, cfg: &SolverConfig) -> Result<(FactorPair, StepMeta)> {
    p.check_factors(z)?;
    z.require_positive("mmbpg_step")?;
    let s = build_majorizer(p, z)?;
    let (next, lambda_w, lambda_h, l_w, l_h) = prox_from(p, &s, z, cfg)?;
    let bregman_step = bregman_unchecked(z, &next);
    Ok((
        next,
        StepMeta {
            lambda_w,
            lambda_h,
            l_w,
            l_h,
            beta: 0.0,
            restart: RestartReason::None,
            bregman_step,
            potential_m: cfg.potential_m(lambda_w, lambda_h, l_w, l_h),
        },
    ))
}

/// One MMBPGe iteration. The majorizer weights come from `Z^k`; the
/// linearization and the kernel gradient are taken at `Y^k`.
pub fn mmbpge_step(
    p: &KlProblem,
    z: &FactorPair,
    ext: &ExtrapolationState,
    cfg: &SolverConfig,
) -> Result<(FactorPair, ExtrapolationState, StepMeta)> {
    p.check_factors(z)?;
    z.require_positive("mmbpge_step")?;
    ext.z_prev.check_same_shape(z)?;
    ext.z_prev.require_positive("mmbpge_step previous iterate")?;

    let mut ext = ext.clone();
    let (theta, mut beta) = ext.next_coefficients();
    if !cfg.extrapolate {
        beta = 0.0;
    }

    let mut restart = RestartReason::None;
    let y = if beta == 0.0 {
        z.clone()
    } else {
        let y = z.zip_map(&ext.z_prev, |a, b| a + beta * (a - b))?;
        if !y.is_strictly_positive() {
            restart = RestartReason::Nonpositive;
        } else if bregman_unchecked(z, &y) > cfg.rho * ext.d_prev {
            restart = RestartReason::DistanceTest;
        }
        y
    };
    let y = if restart == RestartReason::None {
        ext.advance(theta);
        y
    } else {
        ext.reset();
        beta = 0.0;
        z.clone()
    };

    let s = build_majorizer(p, z)?;
    let (next, lambda_w, lambda_h, l_w, l_h) = prox_from(p, &s, &y, cfg)?;
    let bregman_step = bregman_unchecked(z, &next);
    ext.z_prev = z.clone();
    ext.d_prev = bregman_step;
    Ok((
        next,
        ext,
        StepMeta {
            lambda_w,
            lambda_h,
            l_w,
            l_h,
            beta,
            restart,
            bregman_step,
            potential_m: cfg.potential_m(lambda_w, lambda_h, l_w, l_h),
        },
    ))
}

/// `Ψ(Z_next) + M·D_φ(Z_curr, Z_next)`.
pub fn potential_value(
    p: &KlProblem,
    z_curr: &FactorPair,
    z_next: &FactorPair,
    m: f64,
) -> Result<f64> {
    let d = crate::bregman::bregman_distance(z_curr, z_next)?;
    Ok(objective(p, z_next)? + m * d)
}

/// MMBPG as a registry strategy.
pub struct Mmbpg {
    cfg: SolverConfig,
    d_prev: Option<f64>,
}

impl Mmbpg {
    pub fn new(cfg: SolverConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self { cfg, d_prev: None })
    }
}

impl Algorithm for Mmbpg {
    fn name(&self) -> &str {
        "mmbpg"
    }

    fn step(&mut self, problem: &KlProblem, z: &FactorPair) -> Result<(FactorPair, StepInfo)> {
        let (next, meta) = mmbpg_step(problem, z, &self.cfg)?;
        let prev = self.d_prev.replace(meta.bregman_step).unwrap_or(0.0);
        let mut info = meta.into_info(Some(prev));
        // the potential is an MMBPGe quantity
        info.potential_m = None;
        Ok((next, info))
    }
}

/// MMBPGe as a registry strategy; the momentum state starts at the first
/// iterate it sees.
pub struct Mmbpge {
    cfg: SolverConfig,
    ext: Option<ExtrapolationState>,
}

impl Mmbpge {
    pub fn new(cfg: SolverConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self { cfg, ext: None })
    }

    pub fn state(&self) -> Option<&ExtrapolationState> {
        self.ext.as_ref()
    }
}

impl Algorithm for Mmbpge {
    fn name(&self) -> &str {
        "mmbpge"
    }

    fn step(&mut self, problem: &KlProblem, z: &FactorPair) -> Result<(FactorPair, StepInfo)> {
        let ext = self.ext.take().unwrap_or_else(|| ExtrapolationState::new(z));
        let d_prev = ext.d_prev;
        let (next, ext, meta) = mmbpge_step(problem, z, &ext, &self.cfg)?;
        self.ext = Some(ext);
        Ok((next, meta.into_info(Some(d_prev))))
    }
}

/// Runs MMBPG or MMBPGe (per `cfg.variant`) from `z0`.
pub fn run_solver(p: &KlProblem, z0: &FactorPair, cfg: &SolverConfig) -> Result<RunOutput> {
    let mut alg: Box<dyn Algorithm> = match cfg.variant {
        Variant::Mmbpg => Box::new(Mmbpg::new(cfg.clone())?),
        Variant::Mmbpge => Box::new(Mmbpge::new(cfg.clone())?),
    };
    runner::run(p, z0, alg.as_mut(), &cfg.run)
}
