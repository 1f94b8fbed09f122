//! The iteration loop shared by every strategy: termination rule, trace
//! recording, and solver-only timing.

use std::time::{Duration, Instant};

use crate::error::{Error, Result};
use crate::matrix::FactorPair;
use crate::model::{self, KlProblem};
use crate::registry::{Algorithm, RestartReason, StepInfo};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOptions {
    pub max_iter: usize,
    /// Stop once `‖Z^{k+1} − Z^k‖_F / max{1, ‖Z^{k+1}‖_F} ≤ tol`.
    pub tol: f64,
    /// Metrics are evaluated every `trace_every` iterations and at the end.
    pub trace_every: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            max_iter: 3000,
            tol: 1e-9,
            trace_every: 10,
        }
    }
}

impl RunOptions {
    pub fn validate(&self) -> Result<()> {
        if self.max_iter == 0 {
            return Err(Error::config("max_iter must be positive"));
        }
        if !(self.tol >= 0.0) {
            return Err(Error::config("tol must be nonnegative"));
        }
        if self.trace_every == 0 {
            return Err(Error::config("trace_every must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    Converged,
    MaxIter,
    /// The strategy reported a failed step (line search exhausted).
    StepFailure,
}

impl StopReason {
    pub fn as_str(self) -> &'static str {
        match self {
            StopReason::Converged => "converged",
            StopReason::MaxIter => "max_iter",
            StopReason::StepFailure => "step_failure",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub iter: usize,
    /// Solver-only wall time up to this iterate.
    pub time_s: f64,
    pub objective: f64,
    /// `Ψ(Z^k) + M·D_φ(Z^{k-1}, Z^k)` for strategies that report `M`.
    pub potential: Option<f64>,
    pub rel_error: Option<f64>,
    pub kkt_w: f64,
    pub kkt_h: f64,
    pub restart: RestartReason,
    pub step_norm: f64,
    pub info: StepInfo,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverTrace {
    pub algorithm: String,
    pub records: Vec<TraceRecord>,
    pub iterations: usize,
    pub stop: StopReason,
    pub restarts_nonpositive: usize,
    pub restarts_distance: usize,
    pub solve_seconds: f64,
}

impl SolverTrace {
    fn new(algorithm: &str) -> Self {
        Self {
            algorithm: algorithm.to_string(),
            records: Vec::new(),
            iterations: 0,
            stop: StopReason::MaxIter,
            restarts_nonpositive: 0,
            restarts_distance: 0,
            solve_seconds: 0.0,
        }
    }

    pub fn last(&self) -> &TraceRecord {
        self.records.last().expect("trace always holds the initial record")
    }

    pub fn total_restarts(&self) -> usize {
        self.restarts_nonpositive + self.restarts_distance
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub z: FactorPair,
    pub trace: SolverTrace,
}

/// `‖Z⁺ − Z‖_F / max{1, ‖Z⁺‖_F}`.
pub fn relative_step(prev: &FactorPair, next: &FactorPair) -> Result<f64> {
    Ok(prev.distance(next)? / next.norm().max(1.0))
}

fn metrics(problem: &KlProblem, z: &FactorPair) -> Result<(f64, Option<f64>, f64, f64)> {
    let wh = z.product();
    let loss = model::kl_divergence(problem.x(), &wh)?;
    let objective = loss + problem.reg().value(z);
    let rel = model::relative_from_loss(problem, loss);
    let r = model::ratio(problem.x(), &wh)?;
    let (mut gw, mut gh) = model::grad_from_ratio(z, &r)?;
    add_regularizer_gradient(problem, z, &mut gw, &mut gh);
    let (kw, kh) = model::kkt_from_gradient(z, &gw, &gh).unwrap_or((f64::NAN, f64::NAN));
    Ok((objective, rel, kw, kh))
}

fn add_regularizer_gradient(
    problem: &KlProblem,
    z: &FactorPair,
    gw: &mut crate::matrix::DenseMatrix,
    gh: &mut crate::matrix::DenseMatrix,
) {
    use crate::model::RegKind;
    let reg = problem.reg();
    match reg.kind() {
        RegKind::None => {}
        RegKind::L1 => {
            gw.as_mut_slice().iter_mut().for_each(|g| *g += reg.mu_w());
            gh.as_mut_slice().iter_mut().for_each(|g| *g += reg.mu_h());
        }
        RegKind::SquaredFrobenius => {
            for (g, v) in gw.as_mut_slice().iter_mut().zip(z.w.as_slice()) {
                *g += reg.mu_w() * v;
            }
            for (g, v) in gh.as_mut_slice().iter_mut().zip(z.h.as_slice()) {
                *g += reg.mu_h() * v;
            }
        }
    }
}

/// Drives `algorithm` from `z0` until the termination rule, `max_iter`, or a
/// failed step. Iteration 0 (the initial point) is always recorded, as is
/// the final iterate.
pub fn run(
    problem: &KlProblem,
    z0: &FactorPair,
    algorithm: &mut dyn Algorithm,
    opts: &RunOptions,
) -> Result<RunOutput> {
    opts.validate()?;
    problem.check_factors(z0)?;
    z0.require_positive("initial point")?;

    let mut trace = SolverTrace::new(algorithm.name());
    let mut z = z0.clone();
    let mut clock = Duration::ZERO;

    let record = |trace: &mut SolverTrace,
                  z: &FactorPair,
                  iter: usize,
                  clock: Duration,
                  step_norm: f64,
                  info: StepInfo|
     -> Result<()> {
        let (objective, rel_error, kkt_w, kkt_h) = match metrics(problem, z) {
            Ok(m) if m.0.is_finite() => m,
            Ok(_) | Err(Error::NonFinite(_)) | Err(Error::Domain(_)) => {
                let snapshot = trace.clone();
                return Err(Error::Divergence {
                    iteration: iter,
                    reason: "objective is not finite".into(),
                    trace: Box::new(snapshot),
                });
            }
            Err(e) => return Err(e),
        };
        let potential = match (info.potential_m, info.bregman_step) {
            (Some(m), Some(d)) => Some(objective + m * d),
            _ => None,
        };
        trace.records.push(TraceRecord {
            iter,
            time_s: clock.as_secs_f64(),
            objective,
            potential,
            rel_error,
            kkt_w,
            kkt_h,
            restart: info.restart,
            step_norm,
            info,
        });
        Ok(())
    };

    record(&mut trace, &z, 0, clock, 0.0, StepInfo::default())?;

    for k in 1..=opts.max_iter {
        let started = Instant::now();
        let (next, info) = algorithm.step(problem, &z)?;
        let rel_step = relative_step(&z, &next)?;
        clock += started.elapsed();

        if !rel_step.is_finite() || !next.all_finite() {
            return Err(Error::Divergence {
                iteration: k,
                reason: "iterate is not finite".into(),
                trace: Box::new(trace),
            });
        }
        match info.restart {
            RestartReason::Nonpositive => trace.restarts_nonpositive += 1,
            RestartReason::DistanceTest => trace.restarts_distance += 1,
            RestartReason::None => {}
        }
        let failed = info.step_failed;
        let converged = !failed && rel_step <= opts.tol;
        z = next;
        trace.iterations = k;
        let last = converged || failed || k == opts.max_iter;
        if last || k % opts.trace_every == 0 {
            record(&mut trace, &z, k, clock, rel_step, info)?;
        }
        if failed {
            trace.stop = StopReason::StepFailure;
            break;
        }
        if converged {
            trace.stop = StopReason::Converged;
            break;
        }
    }
    trace.solve_seconds = clock.as_secs_f64();
    Ok(RunOutput { z, trace })
}
