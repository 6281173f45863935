//! Seeded random generators for states, observables, and whole scenarios.
//!
//! Everything here is deterministic given the seed: the generator is
//! ChaCha12 and draws happen in a fixed order. These functions back the
//! fuzz suites and the optimizer restarts; nothing in the crate uses
//! ambient (OS) randomness.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

use crate::correlations::{Scenario, WingObservable};
use crate::linalg::{c_re, Complex, ComplexMatrix, ComplexVector};
use crate::quantum::{DichotomicObservable, Povm, QuantumState};

/// Identifier of the PRNG algorithm, recorded in sampling metadata so
/// runs can be reproduced bit-for-bit.
pub const RNG_ALGORITHM: &str = "chacha12";

/// Deterministic generator for a seed.
pub fn rng_from_seed(seed: u64) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(seed)
}

fn gaussian(rng: &mut impl Rng) -> f64 {
    rng.sample(StandardNormal)
}

fn gaussian_matrix(dim: usize, rng: &mut impl Rng) -> ComplexMatrix {
    let entries: Vec<Complex> = (0..dim * dim)
        .map(|_| Complex::new(gaussian(rng), gaussian(rng)))
        .collect();
    ComplexMatrix::new(dim, dim, entries).expect("finite gaussian entries")
}

/// Haar-like random unitary: the eigenvector matrix of a random
/// Hermitian matrix. Exact distribution does not matter here, only
/// coverage and determinism.
fn random_unitary(dim: usize, rng: &mut impl Rng) -> ComplexMatrix {
    let g = gaussian_matrix(dim, rng);
    let h = g.add(&g.dagger()).expect("same shape").scale(c_re(0.5));
    h.hermitian_eigensystem()
        .expect("hermitian by construction")
        .eigenvectors
}

/// V·diag(weights)·V† from the columns of a unitary.
fn from_diagonal(v: &ComplexMatrix, weights: &[f64]) -> ComplexMatrix {
    let dim = v.rows();
    let mut m = ComplexMatrix::zeros(dim, dim);
    for (i, &w) in weights.iter().enumerate() {
        let col = ComplexVector::new((0..dim).map(|r| v.get(r, i)).collect())
            .expect("unitary column");
        m = m.add(&col.outer_self().scale(c_re(w))).expect("same shape");
    }
    m
}

/// Random normalized pure state with complex Gaussian amplitudes.
pub fn pure_state(dim: usize, rng: &mut impl Rng) -> QuantumState {
    let entries: Vec<Complex> = (0..dim)
        .map(|_| Complex::new(gaussian(rng), gaussian(rng)))
        .collect();
    let v = ComplexVector::new(entries).expect("finite entries").normalized();
    QuantumState::pure(v).expect("normalized")
}

/// Random full-rank mixed state G·G†/Tr(G·G†).
pub fn mixed_state(dim: usize, rng: &mut impl Rng) -> QuantumState {
    let g = gaussian_matrix(dim, rng);
    let gram = g.matmul(&g.dagger()).expect("square");
    let trace = gram.trace().re;
    let rho = gram.scale(c_re(1.0 / trace));
    QuantumState::mixed(rho).expect("psd with unit trace by construction")
}

/// Random sharp dichotomic observable V·diag(±1)·V† with a random
/// unitary V and at least one eigenvalue of each sign.
pub fn dichotomic(dim: usize, rng: &mut impl Rng) -> DichotomicObservable {
    let v = random_unitary(dim, rng);
    let mut signs: Vec<f64> = (0..dim)
        .map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 })
        .collect();
    if signs.iter().all(|&s| s == signs[0]) {
        let flip = rng.random_range(0..dim);
        signs[flip] = -signs[flip];
    }
    let m = from_diagonal(&v, &signs);
    DichotomicObservable::new(m, "random_sharp").expect("involutory by construction")
}

/// Random unsharp two-outcome POVM: A₁ = G†G/(‖G†G‖ + ε) with
/// ε ∈ [0.1, 1], A₋₁ = 𝟙 − A₁. Both effects are PSD by construction and
/// the top effect stays strictly below 𝟙.
pub fn two_outcome_povm(dim: usize, rng: &mut impl Rng) -> Povm {
    let g = gaussian_matrix(dim, rng);
    let gram = g.dagger().matmul(&g).expect("square");
    let eps = 0.1 + 0.9 * rng.random::<f64>();
    let denom = gram.operator_norm().expect("hermitian gram") + eps;
    let plus = gram.scale(c_re(1.0 / denom));
    let minus = ComplexMatrix::identity(dim).sub(&plus).expect("same shape");
    Povm::new(vec![(1, plus), (-1, minus)], "random_unsharp").expect("valid by construction")
}

/// Random wing observable, sharp or unsharp with equal probability.
pub fn wing_observable(dim: usize, rng: &mut impl Rng) -> WingObservable {
    if rng.random::<bool>() {
        WingObservable::Sharp(dichotomic(dim, rng))
    } else {
        WingObservable::Generalized(two_outcome_povm(dim, rng))
    }
}

/// Random wing observable diagonal in the basis given by the columns of
/// `v`: sharp with ±1 weights or unsharp with weights in [0, 1].
fn diagonal_wing(v: &ComplexMatrix, rng: &mut impl Rng) -> WingObservable {
    let dim = v.rows();
    if rng.random::<bool>() {
        let mut signs: Vec<f64> = (0..dim)
            .map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 })
            .collect();
        if signs.iter().all(|&s| s == signs[0]) {
            let flip = rng.random_range(0..dim);
            signs[flip] = -signs[flip];
        }
        let m = from_diagonal(v, &signs);
        WingObservable::Sharp(
            DichotomicObservable::new(m, "shared_basis_sharp")
                .expect("involutory by construction"),
        )
    } else {
        let weights: Vec<f64> = (0..dim).map(|_| rng.random::<f64>()).collect();
        let plus = from_diagonal(v, &weights);
        let minus = ComplexMatrix::identity(dim).sub(&plus).expect("same shape");
        WingObservable::Generalized(
            Povm::new(vec![(1, plus), (-1, minus)], "shared_basis_unsharp")
                .expect("valid by construction"),
        )
    }
}

/// Two wing observables diagonal in one shared random eigenbasis, so
/// every effect of one commutes with every effect of the other.
pub fn commuting_wing_pair(
    dim: usize,
    rng: &mut impl Rng,
) -> (WingObservable, WingObservable) {
    let v = random_unitary(dim, rng);
    (diagonal_wing(&v, rng), diagonal_wing(&v, rng))
}

/// Random scenario with commuting wings: mostly tensor-embedded with
/// wing dimensions 2–4, otherwise joint-embedded with all four
/// observables diagonal in one shared basis (commuting cross-wing by
/// construction). State is pure or mixed with equal probability.
pub fn commuting_scenario(rng: &mut impl Rng) -> Scenario {
    if rng.random::<f64>() < 0.7 {
        let dim_a = rng.random_range(2..=4);
        let dim_b = rng.random_range(2..=4);
        let state = if rng.random::<bool>() {
            pure_state(dim_a * dim_b, rng)
        } else {
            mixed_state(dim_a * dim_b, rng)
        };
        let alice = [wing_observable(dim_a, rng), wing_observable(dim_a, rng)];
        let bob = [wing_observable(dim_b, rng), wing_observable(dim_b, rng)];
        Scenario::tensor(state, alice, bob).expect("valid tensor scenario")
    } else {
        let dim = rng.random_range(2..=4);
        let state = if rng.random::<bool>() {
            pure_state(dim, rng)
        } else {
            mixed_state(dim, rng)
        };
        let v = random_unitary(dim, rng);
        let alice = [diagonal_wing(&v, rng), diagonal_wing(&v, rng)];
        let bob = [diagonal_wing(&v, rng), diagonal_wing(&v, rng)];
        Scenario::joint(state, alice, bob).expect("commuting by construction")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::wings_commute;
    use crate::tol;

    #[test]
    fn generators_are_deterministic_for_a_seed() {
        let mut r1 = rng_from_seed(42);
        let mut r2 = rng_from_seed(42);
        let s1 = pure_state(4, &mut r1);
        let s2 = pure_state(4, &mut r2);
        assert_eq!(s1, s2);
        let o1 = dichotomic(3, &mut r1);
        let o2 = dichotomic(3, &mut r2);
        assert_eq!(o1.matrix(), o2.matrix());
        let p1 = two_outcome_povm(2, &mut r1);
        let p2 = two_outcome_povm(2, &mut r2);
        assert_eq!(p1.effects(), p2.effects());
    }

    #[test]
    fn random_dichotomic_squares_to_identity() {
        let mut rng = rng_from_seed(7);
        for dim in 2..=4 {
            for _ in 0..5 {
                let obs = dichotomic(dim, &mut rng);
                let sq = obs.matrix().matmul(obs.matrix()).unwrap();
                let residual = sq
                    .sub(&ComplexMatrix::identity(dim))
                    .unwrap()
                    .max_abs_entry();
                assert!(residual < tol::TOL_UNIT_SQUARE);
            }
        }
    }

    #[test]
    fn random_povm_effects_are_valid_and_unsharp() {
        let mut rng = rng_from_seed(8);
        for _ in 0..10 {
            let p = two_outcome_povm(2, &mut rng);
            assert_eq!(p.outcome_count(), 2);
            // ε > 0 keeps the top effect strictly below 𝟙, so the
            // difference operator norm is strictly below 1.
            let d = crate::quantum::difference_operator(&p).unwrap();
            assert!(d.matrix().operator_norm().unwrap() < 1.0);
        }
    }

    #[test]
    fn commuting_wing_pair_commutes() {
        let mut rng = rng_from_seed(9);
        for dim in 2..=4 {
            let (a, b) = commuting_wing_pair(dim, &mut rng);
            let pa = a.effect_povm().unwrap();
            let pb = b.effect_povm().unwrap();
            let (ok, residual) = wings_commute(&[pa], &[pb]).unwrap();
            assert!(ok, "residual {residual}");
        }
    }

    #[test]
    fn random_scenarios_construct_and_stay_in_range() {
        let mut rng = rng_from_seed(10);
        for _ in 0..40 {
            let scenario = commuting_scenario(&mut rng);
            let q = scenario.quadruple().unwrap();
            for e in q.as_array() {
                assert!(e.abs() <= 1.0 + 1e-9);
            }
        }
    }
}
