//! Ergodic-rate maximization over cable-tip geometry: alternating
//! optimization across cables, each solved by Riemannian conjugate
//! gradient on its radius-`L` sphere with Armijo backtracking under the
//! tip-separation constraint.
//!
//! The objective is the Monte Carlo mean zero-forcing rate over a *fixed*
//! realization ensemble ([`ergodic_objective`]); keeping the ensemble
//! frozen turns a noisy expectation into a smooth deterministic surrogate
//! that a line search can trust. Gradients come from central finite
//! differences in the tip coordinates ([`euclid_grad`]), projected onto
//! the sphere's tangent plane ([`riem_grad`]). Candidate steps retract
//! back onto the sphere ([`retract`]) and must both clear every pairwise
//! separation constraint and satisfy the Armijo sufficient-increase test
//! before acceptance ([`line_search`]).
//!
//! [`optimize`] runs the full loop and returns the final geometry with a
//! per-step [`OptimizerTrace`]; the accepted-objective sequence is
//! non-decreasing by construction.

use crate::beamforming::{user_rate, zf_wbar_norm_sq};
use crate::channel::RadioParams;
use crate::geometry::{ArrayGeometry, Vec3};
use crate::parallel;
use crate::scenarios::Realization;
use thiserror::Error;

/// Gradient norms below this are treated as exactly zero (the conjugate
/// coefficient `0.5/‖g‖` would otherwise blow up).
pub const GRAD_FLOOR: f64 = 1e-15;

/// Tuning knobs for [`optimize`]. Defaults follow the reference downlink
/// configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerParams {
    /// Outer alternating-optimization sweeps over all cables.
    pub outer_iters: usize,
    /// Conjugate-gradient steps per cable within one sweep.
    pub inner_iters: usize,
    /// Initial (largest) line-search step.
    pub tau_max: f64,
    /// Line search fails once the step shrinks below this.
    pub tau_min: f64,
    /// Multiplicative step shrink factor, in (0, 1).
    pub shrink: f64,
    /// Armijo sufficient-increase slope, in (0, 1).
    pub armijo: f64,
    /// Outer loop stops once the objective gain falls below this.
    pub outer_tol: f64,
    /// Monte Carlo realizations the objective averages over.
    pub mc_samples: usize,
    /// Central finite-difference half-width in meters.
    pub fd_step: f64,
}

impl Default for OptimizerParams {
    fn default() -> Self {
        OptimizerParams {
            outer_iters: 20,
            inner_iters: 100,
            tau_max: 1e-2,
            tau_min: 1e-10,
            shrink: 0.5,
            armijo: 1e-4,
            outer_tol: 1e-3,
            mc_samples: 100,
            fd_step: 1e-5,
        }
    }
}

impl OptimizerParams {
    pub fn validate(&self) -> Result<(), OptimizerError> {
        let bad = |name: &'static str, value: f64, reason: &'static str| {
            Err(OptimizerError::InvalidParams { name, value, reason })
        };
        if self.outer_iters < 1 {
            return bad("outer_iters", self.outer_iters as f64, "must be at least 1");
        }
        if self.inner_iters < 1 {
            return bad("inner_iters", self.inner_iters as f64, "must be at least 1");
        }
        if !(self.tau_max > 0.0 && self.tau_max.is_finite()) {
            return bad("tau_max", self.tau_max, "must be positive and finite");
        }
        if !(self.tau_min > 0.0 && self.tau_min < self.tau_max) {
            return bad("tau_min", self.tau_min, "must satisfy 0 < tau_min < tau_max");
        }
        if !(self.shrink > 0.0 && self.shrink < 1.0) {
            return bad("shrink", self.shrink, "must lie in (0, 1)");
        }
        if !(self.armijo > 0.0 && self.armijo < 1.0) {
            return bad("armijo", self.armijo, "must lie in (0, 1)");
        }
        if !(self.outer_tol >= 0.0) {
            return bad("outer_tol", self.outer_tol, "must be non-negative");
        }
        if self.mc_samples < 1 {
            return bad("mc_samples", self.mc_samples as f64, "must be at least 1");
        }
        if !(self.fd_step > 0.0 && self.fd_step.is_finite()) {
            return bad("fd_step", self.fd_step, "must be positive and finite");
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum OptimizerError {
    #[error("initial geometry violates constraints: {first}")]
    InfeasibleStart { first: String },
    #[error("{name} = {value} is invalid: {reason}")]
    InvalidParams {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error("retraction of a zero vector is undefined")]
    DegenerateRetraction,
}

/// Sample-mean rate over an ensemble, with the count of realizations that
/// had to be scored zero because zero-forcing was numerically impossible
/// (rank-deficient stacked channels) or a terminal coincided with an
/// element. Such events are measure-zero under continuous placements and
/// must not abort a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectiveEval {
    pub mean_rate: f64,
    pub degenerate_count: usize,
}

/// Monte Carlo mean zero-forcing user rate of `geom` over a fixed
/// realization ensemble. Per-realization evaluations fan out in parallel;
/// the mean is reduced in slice order, so the value is identical under
/// any thread count.
pub fn ergodic_objective(
    geom: &ArrayGeometry,
    realizations: &[Realization],
    tx_power_w: f64,
    noise_power_w: f64,
) -> f64 {
    ergodic_objective_detailed(geom, realizations, tx_power_w, noise_power_w).mean_rate
}

/// [`ergodic_objective`] plus degenerate-sample diagnostics.
pub fn ergodic_objective_detailed(
    geom: &ArrayGeometry,
    realizations: &[Realization],
    tx_power_w: f64,
    noise_power_w: f64,
) -> ObjectiveEval {
    ergodic_rate_for_elements(&geom.element_positions(), realizations, tx_power_w, noise_power_w)
}

/// The same sample-mean rate for an arbitrary element layout — lets
/// fixed planar baseline arrays be scored through the identical code
/// path (and against the identical realization draws) as cable
/// geometries.
pub fn ergodic_rate_for_elements(
    elements: &[Vec3],
    realizations: &[Realization],
    tx_power_w: f64,
    noise_power_w: f64,
) -> ObjectiveEval {
    if realizations.is_empty() {
        return ObjectiveEval {
            mean_rate: 0.0,
            degenerate_count: 0,
        };
    }
    let rates = parallel::map_collect(realizations, |real| {
        real.channel_set(elements)
            .ok()
            .and_then(|cs| zf_wbar_norm_sq(&cs).ok())
            .map(|w| user_rate(w, tx_power_w, noise_power_w))
    });
    let degenerate_count = rates.iter().filter(|r| r.is_none()).count();
    let sum: f64 = rates.iter().map(|r| r.unwrap_or(0.0)).sum();
    ObjectiveEval {
        mean_rate: sum / realizations.len() as f64,
        degenerate_count,
    }
}

/// Euclidean gradient of an arbitrary geometry objective with respect to
/// one cable tip, by central finite differences per coordinate (six
/// objective evaluations).
pub fn euclid_grad<F>(objective: F, geom: &ArrayGeometry, cable: usize, fd_step: f64) -> Vec3
where
    F: Fn(&ArrayGeometry) -> f64,
{
    debug_assert!(fd_step > 0.0);
    let tip = geom.tip(cable);
    let axes = [Vec3::X, Vec3::Y, Vec3::Z];
    let mut g = [0.0; 3];
    for (i, axis) in axes.into_iter().enumerate() {
        let plus = objective(&geom.with_tip(cable, tip + axis * fd_step));
        let minus = objective(&geom.with_tip(cable, tip - axis * fd_step));
        g[i] = (plus - minus) / (2.0 * fd_step);
    }
    Vec3::new(g[0], g[1], g[2])
}

/// Projects a Euclidean gradient onto the tangent plane of the radius-`L`
/// sphere at `tip`: `g − t (tᵀg) / L²`.
pub fn riem_grad(euclid_g: Vec3, tip: Vec3, cable_len: f64) -> Vec3 {
    euclid_g - tip * (tip.dot(euclid_g) / (cable_len * cable_len))
}

/// Transports a tangent vector into the tangent plane at `tip_new` (the
/// same orthogonal projection, applied at the new base point).
pub fn transport(v: Vec3, tip_new: Vec3, cable_len: f64) -> Vec3 {
    v - tip_new * (tip_new.dot(v) / (cable_len * cable_len))
}

/// Maps a tangent step back onto the sphere: `L (t + s) / ‖t + s‖`.
/// Errors only when `t + s` is exactly zero.
pub fn retract(tip: Vec3, step: Vec3, cable_len: f64) -> Result<Vec3, OptimizerError> {
    let moved = tip + step;
    let norm = moved.norm();
    if norm == 0.0 {
        return Err(OptimizerError::DegenerateRetraction);
    }
    Ok(moved * (cable_len / norm))
}

/// Conjugate search direction `μ = g + κ · transport(μ_prev)` with
/// `κ = 0.5 / ‖g‖`, or plain `g` when the gradient has underflowed
/// (below [`GRAD_FLOOR`]).
pub fn search_direction(riem_g: Vec3, prev_dir: Vec3, tip_new: Vec3, cable_len: f64) -> Vec3 {
    let g_norm = riem_g.norm();
    if g_norm < GRAD_FLOOR {
        return riem_g;
    }
    riem_g + transport(prev_dir, tip_new, cable_len) * (0.5 / g_norm)
}

/// An accepted line-search step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineSearchOutcome {
    pub step: f64,
    pub tip: Vec3,
    pub objective: f64,
}

/// Backtracking search along `direction` from `geom`'s cable `cable`:
/// tries `tau_max, tau_max·ζ, tau_max·ζ², …` and accepts the first step
/// whose retracted tip keeps every pairwise tip separation feasible *and*
/// improves the objective by at least `armijo · τ · grad_norm`. Returns
/// `None` once the step would fall below `tau_min` — the normal inner
/// loop termination signal, not an error.
pub fn line_search<F>(
    objective: &F,
    geom: &ArrayGeometry,
    cable: usize,
    direction: Vec3,
    grad_norm: f64,
    current: f64,
    params: &OptimizerParams,
) -> Option<LineSearchOutcome>
where
    F: Fn(&ArrayGeometry) -> f64,
{
    let tip = geom.tip(cable);
    let mut tau = params.tau_max;
    while tau >= params.tau_min {
        if let Ok(cand_tip) = retract(tip, direction * tau, geom.cable_len()) {
            let cand = geom.with_tip(cable, cand_tip);
            if cand.is_feasible() {
                let value = objective(&cand);
                if value >= current + params.armijo * tau * grad_norm {
                    return Some(LineSearchOutcome {
                        step: tau,
                        tip: cand_tip,
                        objective: value,
                    });
                }
            }
        }
        tau *= params.shrink;
    }
    None
}

/// One accepted inner step, recorded for convergence analysis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AcceptedStep {
    pub cable: usize,
    pub inner_iter: usize,
    pub step: f64,
    pub tip: Vec3,
    pub objective: f64,
}

/// Objective value after one full sweep over all cables, plus every step
/// accepted during the sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct OuterIteration {
    pub objective: f64,
    pub steps: Vec<AcceptedStep>,
}

/// Why the outer loop stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    /// Objective gain over one sweep fell below `outer_tol`.
    Converged,
    /// All `outer_iters` sweeps ran.
    MaxOuterReached,
    /// No cable could accept any step this sweep (every line search hit
    /// the floor or every gradient underflowed).
    StepFloor,
}

/// Full record of an optimization run. The sequence
/// `initial_objective, outer[0].objective, outer[1].objective, …` is
/// non-decreasing: only accepted (improving) steps mutate the geometry.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerTrace {
    pub initial_objective: f64,
    pub outer: Vec<OuterIteration>,
    pub termination: Termination,
}

impl OptimizerTrace {
    /// Objective after the last completed sweep (the initial value when
    /// no sweep ran).
    pub fn final_objective(&self) -> f64 {
        self.outer
            .last()
            .map_or(self.initial_objective, |o| o.objective)
    }
}

/// Final geometry and trace of an optimization run.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizeResult {
    pub geometry: ArrayGeometry,
    pub trace: OptimizerTrace,
}

/// Maximizes an arbitrary smooth geometry objective by alternating
/// optimization: sweep the cables in index order; for each cable run up
/// to `inner_iters` conjugate-gradient steps (direction reset at the
/// start of each cable), stopping early when the gradient underflows or
/// the line search fails. After each sweep, stop with
/// [`Termination::StepFloor`] if nothing moved, else with
/// [`Termination::Converged`] once the sweep gained less than
/// `outer_tol`.
pub fn optimize_objective<F>(
    objective: F,
    geom0: &ArrayGeometry,
    params: &OptimizerParams,
) -> Result<OptimizeResult, OptimizerError>
where
    F: Fn(&ArrayGeometry) -> f64,
{
    params.validate()?;
    if let Some(violation) = geom0.validate().first() {
        return Err(OptimizerError::InfeasibleStart {
            first: violation.to_string(),
        });
    }

    let mut geom = geom0.clone();
    let cable_len = geom.cable_len();
    let initial_objective = objective(&geom);
    let mut f_prev = initial_objective;
    let mut f_now = initial_objective;
    let mut outer = Vec::new();
    let mut termination = Termination::MaxOuterReached;

    for _ in 0..params.outer_iters {
        let mut steps = Vec::new();
        for cable in 0..geom.num_cables() {
            let mut prev_dir = Vec3::ZERO;
            for inner_iter in 0..params.inner_iters {
                let tip = geom.tip(cable);
                let g = riem_grad(
                    euclid_grad(&objective, &geom, cable, params.fd_step),
                    tip,
                    cable_len,
                );
                let grad_norm = g.norm();
                if grad_norm < GRAD_FLOOR {
                    break;
                }
                let direction = if inner_iter == 0 {
                    g
                } else {
                    search_direction(g, prev_dir, tip, cable_len)
                };
                let Some(out) =
                    line_search(&objective, &geom, cable, direction, grad_norm, f_now, params)
                else {
                    break;
                };
                geom.set_tip(cable, out.tip);
                f_now = out.objective;
                prev_dir = direction;
                steps.push(AcceptedStep {
                    cable,
                    inner_iter,
                    step: out.step,
                    tip: out.tip,
                    objective: out.objective,
                });
            }
        }
        let moved = !steps.is_empty();
        outer.push(OuterIteration {
            objective: f_now,
            steps,
        });
        if !moved {
            termination = Termination::StepFloor;
            break;
        }
        if f_now - f_prev < params.outer_tol {
            termination = Termination::Converged;
            break;
        }
        f_prev = f_now;
    }

    Ok(OptimizeResult {
        geometry: geom,
        trace: OptimizerTrace {
            initial_objective,
            outer,
            termination,
        },
    })
}

/// [`optimize_objective`] specialized to the ergodic zero-forcing rate
/// over a fixed realization ensemble (the ensemble length, not
/// `params.mc_samples`, defines the sample size here; `mc_samples`
/// governs how many realizations callers draw up front).
pub fn optimize(
    geom0: &ArrayGeometry,
    realizations: &[Realization],
    radio: &RadioParams,
    params: &OptimizerParams,
) -> Result<OptimizeResult, OptimizerError> {
    let p = radio.tx_power_w();
    let sigma = radio.noise_power_w();
    optimize_objective(
        |g| ergodic_objective(g, realizations, p, sigma),
        geom0,
        params,
    )
}
