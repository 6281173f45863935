//! Non-quantum reference models: the angle-parameterized PR box family
//! that saturates the logical CHSH maximum while staying no-signaling,
//! and the quantum protocol that reaches the same point by letting one
//! wing's measurement depend on the joint setting choice.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, TAU};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::correlations::{BehaviorTable, CorrelationError, CorrelationQuadruple};
use crate::inequalities::chsh_value;
use crate::linalg::LinalgError;
use crate::quantum::{pauli_x, singlet_state, QuantumError};
use crate::random;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("angle {theta} outside [0, pi]")]
    AngleOutOfRange { theta: f64 },
    #[error("sample count must be positive")]
    ZeroCount,
    #[error(transparent)]
    Correlation(#[from] CorrelationError),
    #[error(transparent)]
    Quantum(#[from] QuantumError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Folds an angle difference into [0, π]: absolute value, reduction
/// mod 2π, then reflection of the upper half-circle.
pub fn fold_angle(delta: f64) -> f64 {
    let mut t = delta.abs().rem_euclid(TAU);
    if t > PI {
        t = TAU - t;
    }
    t
}

/// The PR box correlation at folded angle difference θ ∈ [0, π]:
/// +1 up to π/4, −1 from 3π/4, linear in between. Continuous,
/// non-increasing, odd about π/2.
pub fn pr_correlation(theta: f64) -> Result<f64, ModelError> {
    if !theta.is_finite() || !(0.0..=PI).contains(&theta) {
        return Err(ModelError::AngleOutOfRange { theta });
    }
    let upper = 3.0 * FRAC_PI_4;
    Ok(if theta <= FRAC_PI_4 {
        1.0
    } else if theta >= upper {
        -1.0
    } else {
        2.0 - 4.0 * theta / PI
    })
}

/// The four cell probabilities of one PR box setting pair. Built so the
/// two-term marginal sums are exactly 1/2 in floating point: the
/// diagonal cell is (1+E)/4 and the off-diagonal cell is its exact
/// complement to one half.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrCells {
    pub p_pp: f64,
    pub p_pm: f64,
    pub p_mp: f64,
    pub p_mm: f64,
}

/// Cell probabilities for the PR box at folded angle θ.
pub fn pr_behavior(theta: f64) -> Result<PrCells, ModelError> {
    let e = pr_correlation(theta)?;
    let diag = (1.0 + e) / 4.0;
    let off = 0.5 - diag;
    Ok(PrCells {
        p_pp: diag,
        p_pm: off,
        p_mp: off,
        p_mm: diag,
    })
}

/// Measurement axes for the two wings, in radians. Setting 0 is the
/// unprimed axis on each wing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxisConfiguration {
    pub alice: f64,
    pub alice_prime: f64,
    pub bob: f64,
    pub bob_prime: f64,
}

impl AxisConfiguration {
    /// The quarter-spaced axes α′ = 0, β = π/4, α = π/2, β′ = 3π/4
    /// where every setting pair lands exactly on a plateau edge and the
    /// CHSH combination reaches 4 exactly.
    pub fn canonical() -> Self {
        Self {
            alice: FRAC_PI_2,
            alice_prime: 0.0,
            bob: FRAC_PI_4,
            bob_prime: 3.0 * FRAC_PI_4,
        }
    }

    fn folded_differences(&self) -> [f64; 4] {
        [
            fold_angle(self.alice - self.bob),
            fold_angle(self.alice - self.bob_prime),
            fold_angle(self.alice_prime - self.bob),
            fold_angle(self.alice_prime - self.bob_prime),
        ]
    }
}

/// PR box correlations for the four setting pairs of an axis
/// configuration.
pub fn pr_quadruple(axes: &AxisConfiguration) -> Result<CorrelationQuadruple, ModelError> {
    let [t00, t01, t10, t11] = axes.folded_differences();
    Ok(CorrelationQuadruple::new(
        pr_correlation(t00)?,
        pr_correlation(t01)?,
        pr_correlation(t10)?,
        pr_correlation(t11)?,
    )?)
}

/// Full 16-entry behavior table of the PR box on the given axes.
pub fn pr_box_table(axes: &AxisConfiguration) -> Result<BehaviorTable, ModelError> {
    let diffs = axes.folded_differences();
    let mut entries = [0.0; 16];
    for (pair, &theta) in diffs.iter().enumerate() {
        let cells = pr_behavior(theta)?;
        entries[pair * 4] = cells.p_pp;
        entries[pair * 4 + 1] = cells.p_pm;
        entries[pair * 4 + 2] = cells.p_mp;
        entries[pair * 4 + 3] = cells.p_mm;
    }
    Ok(BehaviorTable::new(entries)?)
}

/// Outcome tallies and frequencies from sampling one PR box setting
/// pair a fixed number of times with a seeded generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrSampleSummary {
    pub theta: f64,
    pub count: u64,
    pub seed: u64,
    /// Identifier of the stream algorithm behind the draws.
    pub algorithm: String,
    /// Tallies in cell order (+1,+1), (+1,−1), (−1,+1), (−1,−1).
    pub counts: [u64; 4],
    pub frequencies: [f64; 4],
    pub empirical_correlation: f64,
    pub exact_correlation: f64,
}

/// Samples the PR box cell distribution at folded angle θ.
pub fn pr_sample(theta: f64, count: u64, seed: u64) -> Result<PrSampleSummary, ModelError> {
    if count == 0 {
        return Err(ModelError::ZeroCount);
    }
    let cells = pr_behavior(theta)?;
    let thresholds = [
        cells.p_pp,
        cells.p_pp + cells.p_pm,
        cells.p_pp + cells.p_pm + cells.p_mp,
    ];
    let mut rng = random::rng_from_seed(seed);
    let mut counts = [0u64; 4];
    for _ in 0..count {
        let u: f64 = rand::Rng::random(&mut rng);
        let cell = thresholds.iter().position(|&t| u < t).unwrap_or(3);
        counts[cell] += 1;
    }
    let frequencies = counts.map(|c| c as f64 / count as f64);
    let empirical_correlation =
        frequencies[0] - frequencies[1] - frequencies[2] + frequencies[3];
    Ok(PrSampleSummary {
        theta,
        count,
        seed,
        algorithm: random::RNG_ALGORITHM.to_string(),
        counts,
        frequencies,
        empirical_correlation,
        exact_correlation: pr_correlation(theta)?,
    })
}

/// Result of the joint-setting-dependent singlet protocol.
#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolOutcome {
    pub quadruple: CorrelationQuadruple,
    pub chsh: f64,
    pub behavior: BehaviorTable,
    /// Largest marginal discrepancy across the other wing's settings.
    pub nosignal_violation: f64,
    /// False: Bob's observable depends on the pair of settings, not on
    /// his setting alone, so this is not a fixed local measurement.
    pub invariant_procedure: bool,
}

/// Runs the protocol: a singlet, σ_x on Alice for both settings, and
/// −σ_x on Bob except for the setting pair (1,1) where he uses +σ_x.
/// The quadruple is (1,1,1,−1) and the CHSH combination is 4, yet each
/// wing's marginals stay at 1/2 for every setting pair.
pub fn nonlocal_protocol() -> Result<ProtocolOutcome, ModelError> {
    let state = singlet_state();
    let alice = pauli_x();
    let minus_x = pauli_x().scale(crate::linalg::c_re(-1.0));

    let mut correlations = [0.0; 4];
    let mut entries = [0.0; 16];
    for x in 0..2 {
        for y in 0..2 {
            let bob = if x == 1 && y == 1 { pauli_x() } else { minus_x.clone() };
            let joint = alice.kron(&bob)?;
            let e = state.expectation_of(&joint)?.re;
            let pair = x * 2 + y;
            correlations[pair] = e;
            let diag = (1.0 + e) / 4.0;
            let off = 0.5 - diag;
            entries[pair * 4] = diag;
            entries[pair * 4 + 1] = off;
            entries[pair * 4 + 2] = off;
            entries[pair * 4 + 3] = diag;
        }
    }
    let quadruple = CorrelationQuadruple::new(
        correlations[0],
        correlations[1],
        correlations[2],
        correlations[3],
    )?;
    let chsh = chsh_value(&quadruple);
    let behavior = BehaviorTable::new(entries)?;
    let (_, nosignal_violation) = behavior.check_no_signaling(crate::tol::TOL_REPORT);
    Ok(ProtocolOutcome {
        quadruple,
        chsh,
        behavior,
        nosignal_violation,
        invariant_procedure: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ComplexMatrix;
    use rand::Rng;

    /// Expectation of σ_x on one wing of the singlet; pins the flat
    /// marginals of the protocol.
    fn singlet_wing_expectation(on_alice: bool) -> Result<f64, ModelError> {
        let state = singlet_state();
        let id = ComplexMatrix::identity(2);
        let lifted = if on_alice {
            pauli_x().kron(&id)?
        } else {
            id.kron(&pauli_x())?
        };
        Ok(state.expectation_of(&lifted)?.re)
    }

    #[test]
    fn correlation_plateaus_and_breakpoints_are_exact() {
        assert_eq!(pr_correlation(0.0).unwrap(), 1.0);
        assert_eq!(pr_correlation(FRAC_PI_4).unwrap(), 1.0);
        assert_eq!(pr_correlation(3.0 * FRAC_PI_4).unwrap(), -1.0);
        assert_eq!(pr_correlation(PI).unwrap(), -1.0);
        assert_eq!(pr_correlation(FRAC_PI_2).unwrap(), 0.0);
        // 3·(π/4) is exactly representable: the π/4 mantissa has three
        // trailing zero bits, so tripling stays within 53 bits.
        assert_eq!(3.0 * FRAC_PI_4, FRAC_PI_2 + FRAC_PI_4);
    }

    #[test]
    fn correlation_rejects_out_of_range_angles() {
        assert!(pr_correlation(-0.1).is_err());
        assert!(pr_correlation(PI + 0.1).is_err());
        assert!(pr_correlation(f64::NAN).is_err());
    }

    #[test]
    fn correlation_is_continuous_monotone_and_odd() {
        let n = 10_000;
        let h = PI / n as f64;
        let mut prev = pr_correlation(0.0).unwrap();
        for k in 1..=n {
            let theta = PI * k as f64 / n as f64;
            let e = pr_correlation(theta).unwrap();
            assert!((e - prev).abs() <= 4.0 * h / PI + 1e-12);
            assert!(e <= prev + 1e-12);
            let mirrored = pr_correlation(PI - theta).unwrap();
            assert!((mirrored + e).abs() < 1e-12);
            prev = e;
        }
    }

    #[test]
    fn fold_angle_reference_values() {
        assert_eq!(fold_angle(0.0), 0.0);
        assert_eq!(fold_angle(-FRAC_PI_4), FRAC_PI_4);
        assert!((fold_angle(TAU + 0.3) - 0.3).abs() < 1e-12);
        assert!((fold_angle(PI + 0.4) - (PI - 0.4)).abs() < 1e-12);
        assert!((fold_angle(-3.0 * PI) - PI).abs() < 1e-9);
    }

    #[test]
    fn behavior_marginals_are_exactly_half() {
        let mut rng = random::rng_from_seed(30);
        for _ in 0..200 {
            let theta = rng.random::<f64>() * PI;
            let cells = pr_behavior(theta).unwrap();
            assert_eq!(cells.p_pp + cells.p_pm, 0.5);
            assert_eq!(cells.p_mp + cells.p_mm, 0.5);
            assert_eq!(cells.p_pp + cells.p_mp, 0.5);
            assert!(cells.p_pp >= 0.0 && cells.p_pm >= 0.0);
        }
    }

    #[test]
    fn canonical_axes_reach_four_exactly() {
        let axes = AxisConfiguration::canonical();
        let q = pr_quadruple(&axes).unwrap();
        assert_eq!(q.as_array(), [1.0, 1.0, 1.0, -1.0]);
        assert_eq!(chsh_value(&q), 4.0);

        let table = pr_box_table(&axes).unwrap();
        let (ok, violation) = table.check_no_signaling(crate::tol::TOL_REPORT);
        assert!(ok);
        assert_eq!(violation, 0.0);
    }

    #[test]
    fn quadruple_is_invariant_under_rigid_rotation() {
        let mut rng = random::rng_from_seed(31);
        for _ in 0..100 {
            let axes = AxisConfiguration {
                alice: rng.random::<f64>() * TAU,
                alice_prime: rng.random::<f64>() * TAU,
                bob: rng.random::<f64>() * TAU,
                bob_prime: rng.random::<f64>() * TAU,
            };
            let delta = rng.random::<f64>() * TAU;
            let shifted = AxisConfiguration {
                alice: axes.alice + delta,
                alice_prime: axes.alice_prime + delta,
                bob: axes.bob + delta,
                bob_prime: axes.bob_prime + delta,
            };
            let q = pr_quadruple(&axes).unwrap().as_array();
            let q_shifted = pr_quadruple(&shifted).unwrap().as_array();
            for (a, b) in q.iter().zip(&q_shifted) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn sampling_is_seed_deterministic() {
        let a = pr_sample(1.0, 5_000, 42).unwrap();
        let b = pr_sample(1.0, 5_000, 42).unwrap();
        assert_eq!(a, b);
        let c = pr_sample(1.0, 5_000, 43).unwrap();
        assert_ne!(a.counts, c.counts);
        assert_eq!(a.algorithm, random::RNG_ALGORITHM);
        assert_eq!(a.counts.iter().sum::<u64>(), 5_000);
        assert!(pr_sample(1.0, 0, 42).is_err());
    }

    #[test]
    fn sampling_matches_exact_cells() {
        // Aligned axes: the off-diagonal cells carry zero probability,
        // so mismatched outcomes can never be drawn.
        let aligned = pr_sample(0.0, 100_000, 7).unwrap();
        assert_eq!(aligned.counts[1], 0);
        assert_eq!(aligned.counts[2], 0);
        assert!((aligned.empirical_correlation - 1.0).abs() < 1e-12);

        let balanced = pr_sample(FRAC_PI_2, 100_000, 8).unwrap();
        for f in balanced.frequencies {
            assert!((f - 0.25).abs() < 0.01);
        }
        assert!(balanced.empirical_correlation.abs() < 0.02);
    }

    #[test]
    fn protocol_reaches_four_with_flat_marginals() {
        let outcome = nonlocal_protocol().unwrap();
        assert!((outcome.chsh - 4.0).abs() < 1e-9);
        let e = outcome.quadruple.as_array();
        for (k, &target) in [1.0, 1.0, 1.0, -1.0].iter().enumerate() {
            assert!((e[k] - target).abs() < 1e-9);
        }
        assert!(!outcome.invariant_procedure);
        assert!(outcome.nosignal_violation <= 1e-12);
        for x in 0..2 {
            for y in 0..2 {
                for outcome_label in [1i64, -1] {
                    let a = outcome.behavior.alice_marginal(x, outcome_label, y);
                    let b = outcome.behavior.bob_marginal(y, outcome_label, x);
                    assert!((a - 0.5).abs() < 1e-9);
                    assert!((b - 0.5).abs() < 1e-9);
                }
            }
        }
        // The wing expectations of σ_x on the singlet vanish, which is
        // what keeps the marginals flat for every observable choice.
        assert!(singlet_wing_expectation(true).unwrap().abs() < 1e-12);
        assert!(singlet_wing_expectation(false).unwrap().abs() < 1e-12);
    }
}
