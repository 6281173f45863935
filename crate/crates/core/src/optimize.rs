//! Seeded derivative-free maximization of CHSH and rotated-family
//! values over measurement settings (and optionally the shared state).
//! Multi-start Nelder-Mead: deterministic for a fixed seed and budget,
//! ties broken toward the earliest restart.

use std::f64::consts::TAU;

use thiserror::Error;

use crate::correlations::{CorrelationError, CorrelationPoint, CorrelationQuadruple};
use crate::inequalities::{CLASSICAL_CHSH_BOUND, QUANTUM_CHSH_BOUND};
use crate::linalg::{c, c_re, Complex, ComplexMatrix, ComplexVector, LinalgError};
use crate::quantum::{QuantumError, QuantumState};
use crate::random;
use crate::tol;

/// Number of independent Nelder-Mead restarts per call.
pub const RESTARTS: usize = 8;

/// Minimum total evaluation budget.
pub const MIN_BUDGET: u64 = 1000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OptimizeError {
    #[error("budget {budget} below minimum {min}")]
    BudgetTooSmall { budget: u64, min: u64 },
    #[error("circle trace needs at least {min} steps, got {steps}")]
    StepsTooSmall { steps: usize, min: usize },
    #[error("fixed state must live on two qubits (dimension 4), got {dim}")]
    WrongStateDimension { dim: usize },
    #[error("settings carry no state parameters but the state is being optimized")]
    MissingStateParams,
    #[error("optimum {value} exceeds the bound {bound} beyond numerical slack")]
    ValueAboveBound { value: f64, bound: f64 },
    #[error(transparent)]
    Correlation(#[from] CorrelationError),
    #[error(transparent)]
    Quantum(#[from] QuantumError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// A full configuration of the two wings: polar and azimuthal Bloch
/// angles for each of the four observables, in the order
/// (θ_A, φ_A, θ_a, φ_a, θ_B, φ_B, θ_b, φ_b), plus the real and
/// imaginary parts of the four two-qubit amplitudes when the state is
/// part of the search space.
#[derive(Debug, Clone, PartialEq)]
pub struct SettingVector {
    pub angles: [f64; 8],
    pub state_params: Option<[f64; 8]>,
}

/// What the shared state is during optimization.
#[derive(Debug, Clone, PartialEq)]
pub enum StateTarget {
    /// A fixed two-qubit state; only the eight angles are searched.
    Fixed(QuantumState),
    /// The pure state is searched along with the angles.
    Optimize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizationResult {
    pub best_value: f64,
    pub best_settings: SettingVector,
    pub evaluations: u64,
    pub converged: bool,
}

/// One point of a traced rotated-family circle.
#[derive(Debug, Clone, PartialEq)]
pub struct TracedPoint {
    pub phi: f64,
    pub value: f64,
    pub point: CorrelationPoint,
    pub converged: bool,
}

#[derive(Clone, Copy)]
enum Objective {
    Chsh,
    Rotated { phi: f64 },
}

impl Objective {
    fn bound(self) -> f64 {
        match self {
            Objective::Chsh => QUANTUM_CHSH_BOUND,
            Objective::Rotated { .. } => CLASSICAL_CHSH_BOUND,
        }
    }

    fn combine(self, q: &[f64; 4]) -> f64 {
        match self {
            Objective::Chsh => q[0] + q[1] + q[2] - q[3],
            Objective::Rotated { phi } => {
                let x = q[1] + q[2];
                let y = q[0] - q[3];
                x * phi.sin() + y * phi.cos()
            }
        }
    }
}

/// Bloch observable at polar angle θ, azimuth φ: n·σ for the unit
/// vector n = (sinθ cosφ, sinθ sinφ, cosθ).
fn angle_observable(theta: f64, phi: f64) -> ComplexMatrix {
    let (st, ct) = theta.sin_cos();
    let entries = vec![
        c_re(ct),
        c(st * phi.cos(), -st * phi.sin()),
        c(st * phi.cos(), st * phi.sin()),
        c_re(-ct),
    ];
    ComplexMatrix::new(2, 2, entries).expect("2x2 observable entries are finite")
}

fn state_from_params(params: &[f64; 8]) -> Option<ComplexVector> {
    let amplitudes: Vec<Complex> = (0..4).map(|j| c(params[2 * j], params[2 * j + 1])).collect();
    let vector = ComplexVector::new(amplitudes).ok()?;
    if vector.norm() < 1e-12 {
        return None;
    }
    Some(vector.normalized())
}

/// The four correlations (e00, e01, e10, e11) at a parameter point, or
/// None when the state parameterization degenerates.
fn raw_correlations(params: &[f64], target: &StateTarget) -> Option<[f64; 4]> {
    let alice = [
        angle_observable(params[0], params[1]),
        angle_observable(params[2], params[3]),
    ];
    let bob = [
        angle_observable(params[4], params[5]),
        angle_observable(params[6], params[7]),
    ];
    enum Evaluator<'a> {
        Pure(ComplexVector),
        General(&'a QuantumState),
    }
    let evaluator = match target {
        StateTarget::Fixed(state) => Evaluator::General(state),
        StateTarget::Optimize => {
            let p: [f64; 8] = params[8..16].try_into().expect("state slice");
            Evaluator::Pure(state_from_params(&p)?)
        }
    };
    let mut out = [0.0; 4];
    for x in 0..2 {
        for y in 0..2 {
            let joint = alice[x].kron(&bob[y]).expect("4x4 within cap");
            let e = match &evaluator {
                Evaluator::Pure(psi) => {
                    let image = joint.matvec(psi).expect("dimension 4");
                    psi.inner(&image).expect("dimension 4").re
                }
                Evaluator::General(state) => {
                    state.expectation_of(&joint).expect("dimension 4").re
                }
            };
            out[x * 2 + y] = e;
        }
    }
    Some(out)
}

/// Objective value at a parameter point; degenerate states score an
/// arbitrarily bad finite value so the search moves away from them.
fn objective_value(params: &[f64], target: &StateTarget, objective: Objective) -> f64 {
    match raw_correlations(params, target) {
        Some(q) => objective.combine(&q),
        None => -1e6,
    }
}

struct SearchState {
    best_value: f64,
    best_params: Vec<f64>,
    evaluations: u64,
}

impl SearchState {
    fn evaluate(&mut self, params: &[f64], target: &StateTarget, objective: Objective) -> f64 {
        let value = objective_value(params, target, objective);
        self.evaluations += 1;
        if value > self.best_value {
            self.best_value = value;
            self.best_params = params.to_vec();
        }
        value
    }
}

/// One Nelder-Mead run from a given start, spending at most
/// `restart_budget` evaluations. Standard coefficients (reflection 1,
/// expansion 2, contraction 0.5, shrink 0.5); stops when the simplex
/// diameter falls below the termination threshold.
fn nelder_mead(
    start: Vec<f64>,
    restart_budget: u64,
    search: &mut SearchState,
    target: &StateTarget,
    objective: Objective,
) {
    let n = start.len();
    let mut spent = 0u64;
    let eval = |params: &[f64], search: &mut SearchState, spent: &mut u64| -> f64 {
        *spent += 1;
        search.evaluate(params, target, objective)
    };

    // Cost = negative objective; the textbook method minimizes.
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    if spent >= restart_budget {
        return;
    }
    let f0 = -eval(&start, search, &mut spent);
    simplex.push((start.clone(), f0));
    for i in 0..n {
        if spent >= restart_budget {
            return;
        }
        let mut vertex = start.clone();
        vertex[i] += 0.5;
        let fi = -eval(&vertex, search, &mut spent);
        simplex.push((vertex, fi));
    }

    while spent < restart_budget {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let diameter = simplex[1..]
            .iter()
            .flat_map(|(v, _)| {
                v.iter()
                    .zip(&simplex[0].0)
                    .map(|(a, b)| (a - b).abs())
            })
            .fold(0.0, f64::max);
        if diameter < tol::SIMPLEX_DIAMETER_TOL {
            return;
        }

        let mut centroid = vec![0.0; n];
        for (vertex, _) in &simplex[..n] {
            for (cj, vj) in centroid.iter_mut().zip(vertex) {
                *cj += vj / n as f64;
            }
        }
        let worst = simplex[n].clone();
        let point_at = |coef: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&worst.0)
                .map(|(cj, wj)| cj + coef * (cj - wj))
                .collect()
        };

        let reflected = point_at(1.0);
        let fr = -eval(&reflected, search, &mut spent);
        if fr < simplex[0].1 {
            if spent >= restart_budget {
                return;
            }
            let expanded = point_at(2.0);
            let fe = -eval(&expanded, search, &mut spent);
            simplex[n] = if fe < fr { (expanded, fe) } else { (reflected, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (reflected, fr);
        } else {
            if spent >= restart_budget {
                return;
            }
            let (contracted, fc) = if fr < worst.1 {
                let outside = point_at(0.5);
                let fc = -eval(&outside, search, &mut spent);
                (outside, fc)
            } else {
                let inside = point_at(-0.5);
                let fc = -eval(&inside, search, &mut spent);
                (inside, fc)
            };
            if fc < fr.min(worst.1) {
                simplex[n] = (contracted, fc);
            } else {
                // Shrink every vertex toward the best one.
                let best = simplex[0].0.clone();
                for (vertex, cost) in simplex.iter_mut().skip(1) {
                    for (vj, bj) in vertex.iter_mut().zip(&best) {
                        *vj = bj + 0.5 * (*vj - bj);
                    }
                    if spent >= restart_budget {
                        return;
                    }
                    *cost = -eval(vertex, search, &mut spent);
                }
            }
        }
    }
}

fn validate_target(target: &StateTarget) -> Result<(), OptimizeError> {
    if let StateTarget::Fixed(state) = target {
        if state.dim() != 4 {
            return Err(OptimizeError::WrongStateDimension { dim: state.dim() });
        }
    }
    Ok(())
}

fn run_multistart(
    target: &StateTarget,
    objective: Objective,
    budget: u64,
    seed: u64,
    attained_threshold: f64,
) -> Result<OptimizationResult, OptimizeError> {
    if budget < MIN_BUDGET {
        return Err(OptimizeError::BudgetTooSmall {
            budget,
            min: MIN_BUDGET,
        });
    }
    validate_target(target)?;
    let dim = match target {
        StateTarget::Fixed(_) => 8,
        StateTarget::Optimize => 16,
    };

    let mut rng = random::rng_from_seed(seed);
    let mut search = SearchState {
        best_value: f64::NEG_INFINITY,
        best_params: vec![0.0; dim],
        evaluations: 0,
    };
    let per_restart = budget / RESTARTS as u64;
    for _ in 0..RESTARTS {
        let start: Vec<f64> = (0..dim)
            .map(|i| {
                if i < 8 {
                    rand::Rng::random::<f64>(&mut rng) * TAU
                } else {
                    2.0 * rand::Rng::random::<f64>(&mut rng) - 1.0
                }
            })
            .collect();
        nelder_mead(start, per_restart, &mut search, target, objective);
    }

    // The reported optimum must be reproducible from the settings alone.
    let reproduced = objective_value(&search.best_params, target, objective);
    search.evaluations += 1;
    debug_assert!((reproduced - search.best_value).abs() <= 1e-12);
    let best_value = reproduced;

    let bound = objective.bound();
    if best_value > bound + 1e-8 {
        return Err(OptimizeError::ValueAboveBound {
            value: best_value,
            bound,
        });
    }

    let angles: [f64; 8] = search.best_params[..8].try_into().expect("angle block");
    let state_params = match target {
        StateTarget::Fixed(_) => None,
        StateTarget::Optimize => {
            Some(search.best_params[8..16].try_into().expect("state block"))
        }
    };
    Ok(OptimizationResult {
        best_value,
        best_settings: SettingVector {
            angles,
            state_params,
        },
        evaluations: search.evaluations,
        converged: best_value >= attained_threshold,
    })
}

/// Maximizes the CHSH combination. Converged means the quantum bound
/// 2√2 is matched to within the attainment tolerance.
pub fn maximize_chsh(
    target: &StateTarget,
    budget: u64,
    seed: u64,
) -> Result<OptimizationResult, OptimizeError> {
    run_multistart(
        target,
        Objective::Chsh,
        budget,
        seed,
        QUANTUM_CHSH_BOUND - tol::TOL_ATTAIN,
    )
}

/// Maximizes the signed rotated-family combination X sinφ + Y cosφ.
/// Converged means the radius-2 circle is reached at this angle.
pub fn maximize_rotated(
    phi: f64,
    target: &StateTarget,
    budget: u64,
    seed: u64,
) -> Result<OptimizationResult, OptimizeError> {
    run_multistart(
        target,
        Objective::Rotated { phi },
        budget,
        seed,
        CLASSICAL_CHSH_BOUND - tol::TOL_ATTAIN,
    )
}

/// The validated correlation quadruple realized by a setting vector.
pub fn settings_quadruple(
    settings: &SettingVector,
    target: &StateTarget,
) -> Result<CorrelationQuadruple, OptimizeError> {
    validate_target(target)?;
    let mut params: Vec<f64> = settings.angles.to_vec();
    if matches!(target, StateTarget::Optimize) {
        let state = settings
            .state_params
            .ok_or(OptimizeError::MissingStateParams)?;
        params.extend_from_slice(&state);
    }
    let q = raw_correlations(&params, target).ok_or(OptimizeError::MissingStateParams)?;
    Ok(CorrelationQuadruple::new(q[0], q[1], q[2], q[3])?)
}

/// Maximizes the rotated family on a uniform φ grid (at least 4 steps),
/// one independent optimization per grid point with the per-step seed
/// derived from the base seed by the step index.
pub fn trace_circle(
    steps: usize,
    target: &StateTarget,
    budget_per_step: u64,
    seed: u64,
) -> Result<Vec<TracedPoint>, OptimizeError> {
    if steps < 4 {
        return Err(OptimizeError::StepsTooSmall { steps, min: 4 });
    }
    let mut out = Vec::with_capacity(steps);
    for k in 0..steps {
        let phi = TAU * k as f64 / steps as f64;
        let result = maximize_rotated(phi, target, budget_per_step, seed.wrapping_add(k as u64))?;
        let q = settings_quadruple(&result.best_settings, target)?;
        out.push(TracedPoint {
            phi,
            value: result.best_value,
            point: CorrelationPoint::from_quadruple(&q),
            converged: result.converged,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inequalities::chsh_value;
    use crate::quantum::singlet_state;

    fn singlet_target() -> StateTarget {
        StateTarget::Fixed(singlet_state())
    }

    #[test]
    fn rejects_small_budgets_and_wrong_dimensions() {
        assert!(matches!(
            maximize_chsh(&singlet_target(), 999, 1),
            Err(OptimizeError::BudgetTooSmall { budget: 999, min: 1000 })
        ));
        let qubit = QuantumState::pure(ComplexVector::basis(2, 0)).unwrap();
        assert!(matches!(
            maximize_chsh(&StateTarget::Fixed(qubit), 2000, 1),
            Err(OptimizeError::WrongStateDimension { dim: 2 })
        ));
        assert!(matches!(
            trace_circle(3, &singlet_target(), 2000, 1),
            Err(OptimizeError::StepsTooSmall { steps: 3, min: 4 })
        ));
    }

    #[test]
    fn chsh_on_singlet_reaches_quantum_bound() {
        let result = maximize_chsh(&singlet_target(), 20_000, 1).unwrap();
        assert!(result.converged, "best = {}", result.best_value);
        assert!((result.best_value - QUANTUM_CHSH_BOUND).abs() <= tol::TOL_ATTAIN);
        assert!(result.evaluations <= 20_001);
        assert!(result.best_settings.state_params.is_none());

        let q = settings_quadruple(&result.best_settings, &singlet_target()).unwrap();
        assert!((chsh_value(&q) - result.best_value).abs() <= 1e-12);
    }

    #[test]
    fn chsh_with_state_optimization_reaches_quantum_bound() {
        let result = maximize_chsh(&StateTarget::Optimize, 40_000, 2).unwrap();
        assert!(result.converged, "best = {}", result.best_value);
        let settings = &result.best_settings;
        assert!(settings.state_params.is_some());
        let q = settings_quadruple(settings, &StateTarget::Optimize).unwrap();
        assert!((chsh_value(&q) - result.best_value).abs() <= 1e-12);
    }

    #[test]
    fn rotated_maximum_touches_circle() {
        for (phi, seed) in [(std::f64::consts::FRAC_PI_4, 3), (0.0, 4), (2.0, 5)] {
            let result = maximize_rotated(phi, &singlet_target(), 20_000, seed).unwrap();
            assert!(result.converged, "phi = {phi}, best = {}", result.best_value);
            assert!(result.best_value <= 2.0 + 1e-8);
        }
    }

    #[test]
    fn results_are_bit_identical_for_equal_seeds() {
        let a = maximize_chsh(&singlet_target(), 5_000, 11).unwrap();
        let b = maximize_chsh(&singlet_target(), 5_000, 11).unwrap();
        assert_eq!(a, b);

        let ta = trace_circle(4, &singlet_target(), 5_000, 12).unwrap();
        let tb = trace_circle(4, &singlet_target(), 5_000, 12).unwrap();
        assert_eq!(ta, tb);
        assert!(matches!(
            trace_circle(4, &singlet_target(), 999, 12),
            Err(OptimizeError::BudgetTooSmall { .. })
        ));
    }

    #[test]
    fn traced_circle_stays_on_radius_two() {
        let points = trace_circle(4, &singlet_target(), 20_000, 6).unwrap();
        assert_eq!(points.len(), 4);
        for (k, p) in points.iter().enumerate() {
            assert!(p.converged, "step {k} value {}", p.value);
            let radius = p.point.radius();
            assert!(radius >= 2.0 - 1e-3 && radius <= 2.0 + 1e-9, "radius {radius}");
            assert!((p.phi - TAU * k as f64 / 4.0).abs() < 1e-15);
        }
    }

    #[test]
    fn never_reports_above_the_bound() {
        for seed in 0..6 {
            let result = maximize_chsh(&singlet_target(), 1_000, seed).unwrap();
            assert!(result.best_value <= QUANTUM_CHSH_BOUND + 1e-8);
            assert_eq!(
                result.converged,
                result.best_value >= QUANTUM_CHSH_BOUND - tol::TOL_ATTAIN
            );
        }
    }
}
