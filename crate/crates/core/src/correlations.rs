//! Bipartite Bell scenarios: a state plus two dichotomic observables per
//! wing, assembled either on a tensor product of wing spaces or on one
//! joint space where commutativity is what separates the wings.
//!
//! Settings are indexed 0 (unprimed) and 1 (primed) everywhere,
//! including serialized forms. Outcomes are +1 and −1.

use thiserror::Error;

use crate::linalg::{ComplexMatrix, LinalgError};
use crate::quantum::{
    difference_operator, sharp_to_povm, wings_commute, DichotomicObservable, Povm, QuantumError,
    QuantumState,
};
use crate::tol;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CorrelationError {
    #[error(transparent)]
    Quantum(#[from] QuantumError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("wing effects do not commute (max residual {max_residual:.3e}); products across wings are not observables")]
    LocalityViolation { max_residual: f64 },
    #[error("{wing} settings have different dimensions: {first} vs {second}")]
    WingDimensionMismatch {
        wing: &'static str,
        first: usize,
        second: usize,
    },
    #[error("state dimension {state_dim} does not match the wing spaces (expected {expected})")]
    StateDimension { state_dim: usize, expected: usize },
    #[error("correlation {name} = {value} lies outside [-1, 1]")]
    CorrelationRange { name: &'static str, value: f64 },
    #[error("expectation {value} lies outside [-1, 1]")]
    ExpectationRange { value: f64 },
    #[error("expectation has imaginary part {imag:.3e}; operator product is not Hermitian")]
    ExpectationNotReal { imag: f64 },
    #[error("probability {value} at settings ({x},{y}) lies outside [0, 1]")]
    ProbabilityRange { x: usize, y: usize, value: f64 },
    #[error("outcome distribution at settings ({x},{y}) sums to {total}, expected 1")]
    NotNormalized { x: usize, y: usize, total: f64 },
}

/// One wing's measurement for one setting: a sharp observable or a
/// two-outcome POVM (labels +1/−1).
#[derive(Debug, Clone, PartialEq)]
pub enum WingObservable {
    Sharp(DichotomicObservable),
    Generalized(Povm),
}

impl WingObservable {
    pub fn dim(&self) -> usize {
        match self {
            Self::Sharp(obs) => obs.dim(),
            Self::Generalized(povm) => povm.dim(),
        }
    }

    pub fn is_sharp(&self) -> bool {
        matches!(self, Self::Sharp(_))
    }

    /// The ±1-valued single-operator representative: the observable
    /// matrix itself, or A₁ − A₋₁ for a POVM.
    pub fn difference_matrix(&self) -> Result<ComplexMatrix, CorrelationError> {
        match self {
            Self::Sharp(obs) => Ok(obs.matrix().clone()),
            Self::Generalized(povm) => Ok(difference_operator(povm)?.matrix().clone()),
        }
    }

    /// Two-outcome effect form: spectral projectors for sharp
    /// observables, the effects themselves for POVMs.
    pub fn effect_povm(&self) -> Result<Povm, CorrelationError> {
        match self {
            Self::Sharp(obs) => Ok(sharp_to_povm(obs)?),
            Self::Generalized(povm) => {
                // Validates the two-outcome ±1 labeling.
                difference_operator(povm)?;
                Ok(povm.clone())
            }
        }
    }
}

/// How wing operators act on the state space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Embedding {
    /// Wings live on separate tensor factors and are lifted with
    /// identities on the other factor.
    Tensor { dim_a: usize, dim_b: usize },
    /// All operators act on one undivided space; wings must commute.
    Joint { dim: usize },
}

/// A complete bipartite scenario with everything pre-lifted to the full
/// state space. Immutable once constructed; construction performs all
/// validation, including the cross-wing commutativity requirement for
/// joint embeddings.
#[derive(Debug, Clone)]
pub struct Scenario {
    state: QuantumState,
    embedding: Embedding,
    diff_alice: [ComplexMatrix; 2],
    diff_bob: [ComplexMatrix; 2],
    // [setting][0 ↦ outcome +1, 1 ↦ outcome −1]
    effects_alice: [[ComplexMatrix; 2]; 2],
    effects_bob: [[ComplexMatrix; 2]; 2],
    all_sharp: bool,
}

fn wing_dims(
    wing: &'static str,
    observables: &[WingObservable; 2],
) -> Result<usize, CorrelationError> {
    let (first, second) = (observables[0].dim(), observables[1].dim());
    if first != second {
        return Err(CorrelationError::WingDimensionMismatch {
            wing,
            first,
            second,
        });
    }
    Ok(first)
}

fn split_effects(povm: &Povm) -> [ComplexMatrix; 2] {
    // Callers validate the ±1 labeling before this point.
    [
        povm.effect_for(1).expect("plus effect").clone(),
        povm.effect_for(-1).expect("minus effect").clone(),
    ]
}

impl Scenario {
    /// Scenario on a tensor product: Alice acts on the first factor,
    /// Bob on the second.
    pub fn tensor(
        state: QuantumState,
        alice: [WingObservable; 2],
        bob: [WingObservable; 2],
    ) -> Result<Self, CorrelationError> {
        let dim_a = wing_dims("alice", &alice)?;
        let dim_b = wing_dims("bob", &bob)?;
        if state.dim() != dim_a * dim_b {
            return Err(CorrelationError::StateDimension {
                state_dim: state.dim(),
                expected: dim_a * dim_b,
            });
        }
        let id_a = ComplexMatrix::identity(dim_a);
        let id_b = ComplexMatrix::identity(dim_b);
        let lift_a = |m: &ComplexMatrix| m.kron(&id_b);
        let lift_b = |m: &ComplexMatrix| id_a.kron(m);

        let diff_alice = [
            lift_a(&alice[0].difference_matrix()?)?,
            lift_a(&alice[1].difference_matrix()?)?,
        ];
        let diff_bob = [
            lift_b(&bob[0].difference_matrix()?)?,
            lift_b(&bob[1].difference_matrix()?)?,
        ];
        let mut effects_alice = Vec::with_capacity(2);
        let mut effects_bob = Vec::with_capacity(2);
        for setting in 0..2 {
            let [plus, minus] = split_effects(&alice[setting].effect_povm()?);
            effects_alice.push([lift_a(&plus)?, lift_a(&minus)?]);
            let [plus, minus] = split_effects(&bob[setting].effect_povm()?);
            effects_bob.push([lift_b(&plus)?, lift_b(&minus)?]);
        }
        let all_sharp = alice.iter().chain(bob.iter()).all(WingObservable::is_sharp);
        Ok(Self {
            state,
            embedding: Embedding::Tensor { dim_a, dim_b },
            diff_alice,
            diff_bob,
            effects_alice: effects_alice.try_into().expect("two settings"),
            effects_bob: effects_bob.try_into().expect("two settings"),
            all_sharp,
        })
    }

    /// Scenario on one joint space. Every Alice effect must commute with
    /// every Bob effect; otherwise the cross-wing products are not
    /// Hermitian and the construction refuses with a locality-violation
    /// error.
    pub fn joint(
        state: QuantumState,
        alice: [WingObservable; 2],
        bob: [WingObservable; 2],
    ) -> Result<Self, CorrelationError> {
        let dim_a = wing_dims("alice", &alice)?;
        let dim_b = wing_dims("bob", &bob)?;
        if dim_a != dim_b || state.dim() != dim_a {
            return Err(CorrelationError::StateDimension {
                state_dim: state.dim(),
                expected: dim_a.max(dim_b),
            });
        }

        let alice_povms = [alice[0].effect_povm()?, alice[1].effect_povm()?];
        let bob_povms = [bob[0].effect_povm()?, bob[1].effect_povm()?];
        let (ok, max_residual) = wings_commute(&alice_povms, &bob_povms)?;
        if !ok {
            return Err(CorrelationError::LocalityViolation { max_residual });
        }

        let diff_alice = [
            alice[0].difference_matrix()?,
            alice[1].difference_matrix()?,
        ];
        let diff_bob = [bob[0].difference_matrix()?, bob[1].difference_matrix()?];
        let effects_alice = [split_effects(&alice_povms[0]), split_effects(&alice_povms[1])];
        let effects_bob = [split_effects(&bob_povms[0]), split_effects(&bob_povms[1])];
        let all_sharp = alice.iter().chain(bob.iter()).all(WingObservable::is_sharp);
        Ok(Self {
            state,
            embedding: Embedding::Joint { dim: dim_a },
            diff_alice,
            diff_bob,
            effects_alice,
            effects_bob,
            all_sharp,
        })
    }

    pub fn state(&self) -> &QuantumState {
        &self.state
    }

    pub fn embedding(&self) -> Embedding {
        self.embedding
    }

    pub fn dim(&self) -> usize {
        self.state.dim()
    }

    /// True when all four wing observables are sharp (needed by checks
    /// that rely on M² = 𝟙).
    pub fn is_fully_sharp(&self) -> bool {
        self.all_sharp
    }

    /// Lifted difference operator for Alice's setting (0 or 1).
    pub fn alice_difference(&self, setting: usize) -> &ComplexMatrix {
        &self.diff_alice[setting]
    }

    /// Lifted difference operator for Bob's setting (0 or 1).
    pub fn bob_difference(&self, setting: usize) -> &ComplexMatrix {
        &self.diff_bob[setting]
    }

    /// Lifted effect for a wing/setting/outcome triple.
    fn effect(&self, wing: usize, setting: usize, outcome_index: usize) -> &ComplexMatrix {
        if wing == 0 {
            &self.effects_alice[setting][outcome_index]
        } else {
            &self.effects_bob[setting][outcome_index]
        }
    }

    /// ⟨D_A(x) · D_B(y)⟩ in the scenario state. Real by commutativity;
    /// magnitudes above 1 (beyond slack) are rejected as numerical
    /// failures.
    pub fn expectation(&self, x: usize, y: usize) -> Result<f64, CorrelationError> {
        assert!(x < 2 && y < 2, "settings are 0 or 1");
        let product = self.diff_alice[x].matmul(&self.diff_bob[y])?;
        let value = self.state.expectation_of(&product)?;
        if value.im.abs() > tol::TOL_REPORT {
            return Err(CorrelationError::ExpectationNotReal { imag: value.im });
        }
        if value.re.abs() > 1.0 + tol::TOL_REPORT {
            return Err(CorrelationError::ExpectationRange { value: value.re });
        }
        Ok(value.re)
    }

    /// The four correlations (AB, Ab, aB, ab) as a validated quadruple.
    pub fn quadruple(&self) -> Result<CorrelationQuadruple, CorrelationError> {
        CorrelationQuadruple::new(
            self.expectation(0, 0)?,
            self.expectation(0, 1)?,
            self.expectation(1, 0)?,
            self.expectation(1, 1)?,
        )
    }

    /// Full outcome distribution p(i,j|x,y) = ⟨A_i^(x) · B_j^(y)⟩.
    pub fn behavior_table(&self) -> Result<BehaviorTable, CorrelationError> {
        let mut p = [0.0_f64; 16];
        for x in 0..2 {
            for y in 0..2 {
                for oi in 0..2 {
                    for oj in 0..2 {
                        let product = self.effect(0, x, oi).matmul(self.effect(1, y, oj))?;
                        let value = self.state.expectation_of(&product)?;
                        if value.im.abs() > tol::TOL_REPORT {
                            return Err(CorrelationError::ExpectationNotReal { imag: value.im });
                        }
                        p[BehaviorTable::index(x, y, oi, oj)] = value.re;
                    }
                }
            }
        }
        BehaviorTable::new(p)
    }
}

/// The four joint correlations ⟨AB⟩, ⟨Ab⟩, ⟨aB⟩, ⟨ab⟩, indexed by
/// (Alice setting, Bob setting) with 0 unprimed and 1 primed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationQuadruple {
    e: [f64; 4],
}

impl CorrelationQuadruple {
    /// Entries are (e00, e01, e10, e11) = (⟨AB⟩, ⟨Ab⟩, ⟨aB⟩, ⟨ab⟩); each
    /// must lie in [−1, 1] up to [`tol::TOL_REPORT`].
    pub fn new(e00: f64, e01: f64, e10: f64, e11: f64) -> Result<Self, CorrelationError> {
        let named = [("e00", e00), ("e01", e01), ("e10", e10), ("e11", e11)];
        for (name, value) in named {
            if !value.is_finite() || value.abs() > 1.0 + tol::TOL_REPORT {
                return Err(CorrelationError::CorrelationRange { name, value });
            }
        }
        Ok(Self {
            e: [e00, e01, e10, e11],
        })
    }

    pub fn e00(&self) -> f64 {
        self.e[0]
    }

    pub fn e01(&self) -> f64 {
        self.e[1]
    }

    pub fn e10(&self) -> f64 {
        self.e[2]
    }

    pub fn e11(&self) -> f64 {
        self.e[3]
    }

    /// Entries in (e00, e01, e10, e11) order.
    pub fn as_array(&self) -> [f64; 4] {
        self.e
    }
}

/// A point in the correlation plane: x = ⟨Ab⟩ + ⟨aB⟩ (mixed pairs),
/// y = ⟨AB⟩ − ⟨ab⟩ (matched pairs).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationPoint {
    pub x: f64,
    pub y: f64,
}

impl CorrelationPoint {
    pub fn from_quadruple(q: &CorrelationQuadruple) -> Self {
        Self {
            x: q.e01() + q.e10(),
            y: q.e00() - q.e11(),
        }
    }

    /// Distance from the origin of the correlation plane.
    pub fn radius(&self) -> f64 {
        self.x.hypot(self.y)
    }
}

/// Conditional outcome distribution p(i,j|x,y) for the four setting
/// pairs; outcomes ordered (+1, −1) on each side.
#[derive(Debug, Clone, PartialEq)]
pub struct BehaviorTable {
    p: [f64; 16],
}

impl BehaviorTable {
    /// Flat index for (x, y, outcome indices). Outcome index 0 is +1,
    /// index 1 is −1.
    fn index(x: usize, y: usize, oi: usize, oj: usize) -> usize {
        ((x * 2 + y) * 2 + oi) * 2 + oj
    }

    fn outcome_index(v: i64) -> usize {
        match v {
            1 => 0,
            -1 => 1,
            other => panic!("outcomes are +1 or -1, got {other}"),
        }
    }

    /// Validates entry ranges and per-setting normalization.
    pub fn new(p: [f64; 16]) -> Result<Self, CorrelationError> {
        for x in 0..2 {
            for y in 0..2 {
                let mut total = 0.0;
                for oi in 0..2 {
                    for oj in 0..2 {
                        let value = p[Self::index(x, y, oi, oj)];
                        if !(-1e-12..=1.0 + 1e-12).contains(&value) {
                            return Err(CorrelationError::ProbabilityRange { x, y, value });
                        }
                        total += value;
                    }
                }
                if (total - 1.0).abs() > tol::TOL_REPORT {
                    return Err(CorrelationError::NotNormalized { x, y, total });
                }
            }
        }
        Ok(Self { p })
    }

    pub fn probability(&self, x: usize, y: usize, i: i64, j: i64) -> f64 {
        self.p[Self::index(x, y, Self::outcome_index(i), Self::outcome_index(j))]
    }

    /// Σ i·j·p(i,j|x,y).
    pub fn correlation(&self, x: usize, y: usize) -> f64 {
        self.probability(x, y, 1, 1) - self.probability(x, y, 1, -1)
            - self.probability(x, y, -1, 1)
            + self.probability(x, y, -1, -1)
    }

    /// Alice's marginal probability of outcome i under her setting x,
    /// conditioned on Bob's setting y.
    pub fn alice_marginal(&self, x: usize, i: i64, y: usize) -> f64 {
        self.probability(x, y, i, 1) + self.probability(x, y, i, -1)
    }

    /// Bob's marginal probability of outcome j under his setting y,
    /// conditioned on Alice's setting x.
    pub fn bob_marginal(&self, y: usize, j: i64, x: usize) -> f64 {
        self.probability(x, y, 1, j) + self.probability(x, y, -1, j)
    }

    /// Checks that each wing's marginals are independent of the other
    /// wing's setting. Returns the verdict and the largest deviation.
    pub fn check_no_signaling(&self, tolerance: f64) -> (bool, f64) {
        let mut max_violation: f64 = 0.0;
        for outcome in [1i64, -1] {
            for x in 0..2 {
                let diff =
                    (self.alice_marginal(x, outcome, 0) - self.alice_marginal(x, outcome, 1)).abs();
                max_violation = max_violation.max(diff);
            }
            for y in 0..2 {
                let diff =
                    (self.bob_marginal(y, outcome, 0) - self.bob_marginal(y, outcome, 1)).abs();
                max_violation = max_violation.max(diff);
            }
        }
        (max_violation <= tolerance, max_violation)
    }

    pub fn entries(&self) -> &[f64; 16] {
        &self.p
    }
}

/// x–z-plane Bloch observable at polar angle θ (test helper shared
/// across modules).
#[cfg(test)]
pub(crate) fn plane_observable(theta: f64) -> WingObservable {
    use crate::quantum::bloch_observable;
    WingObservable::Sharp(bloch_observable([theta.sin(), 0.0, theta.cos()]).unwrap())
}

/// Singlet scenario at the settings that drive the Bell combination to
/// the quantum maximum: every correlation is ±1/√2 with aligned signs.
#[cfg(test)]
pub(crate) fn canonical_singlet_scenario() -> Scenario {
    use crate::quantum::singlet_state;
    use std::f64::consts::PI;
    Scenario::tensor(
        singlet_state(),
        [plane_observable(PI / 2.0), plane_observable(0.0)],
        [
            plane_observable(5.0 * PI / 4.0),
            plane_observable(7.0 * PI / 4.0),
        ],
    )
    .unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c_re, ComplexVector};
    use crate::quantum::{pauli_x, pauli_z, singlet_state, bloch_observable};
    use crate::random;
    use rand::Rng;

    /// Unsharp version of the x–z-plane observable: effects (𝟙 ± η n·σ)/2.
    fn unsharp_plane_observable(theta: f64, eta: f64) -> WingObservable {
        let m = bloch_observable([theta.sin(), 0.0, theta.cos()]).unwrap();
        let id = ComplexMatrix::identity(2);
        let plus = id.add(&m.matrix().scale(c_re(eta))).unwrap().scale(c_re(0.5));
        let minus = id.sub(&m.matrix().scale(c_re(eta))).unwrap().scale(c_re(0.5));
        WingObservable::Generalized(
            Povm::new(vec![(1, plus), (-1, minus)], "unsharp_plane").unwrap(),
        )
    }

    fn singlet_scenario(a0: f64, a1: f64, b0: f64, b1: f64) -> Scenario {
        Scenario::tensor(
            singlet_state(),
            [plane_observable(a0), plane_observable(a1)],
            [plane_observable(b0), plane_observable(b1)],
        )
        .unwrap()
    }

    #[test]
    fn singlet_zz_expectation_is_minus_one() {
        let s = singlet_scenario(0.0, std::f64::consts::FRAC_PI_2, 0.0, std::f64::consts::FRAC_PI_2);
        let e = s.expectation(0, 0).unwrap();
        assert!((e + 1.0).abs() < 1e-12);
    }

    #[test]
    fn singlet_expectation_matches_cosine_oracle() {
        let mut rng = random::rng_from_seed(11);
        for _ in 0..25 {
            let ta = rng.random::<f64>() * std::f64::consts::TAU;
            let tb = rng.random::<f64>() * std::f64::consts::TAU;
            let s = singlet_scenario(ta, 0.0, tb, 1.0);
            let e = s.expectation(0, 0).unwrap();
            assert!((e + (ta - tb).cos()).abs() < 1e-10, "{ta} {tb}");
        }
    }

    #[test]
    fn unsharp_wings_scale_the_sharp_correlation() {
        let mut rng = random::rng_from_seed(12);
        for _ in 0..10 {
            let ta = rng.random::<f64>() * std::f64::consts::TAU;
            let tb = rng.random::<f64>() * std::f64::consts::TAU;
            let eta_a = 0.2 + 0.8 * rng.random::<f64>();
            let eta_b = 0.2 + 0.8 * rng.random::<f64>();
            let sharp = singlet_scenario(ta, 0.0, tb, 1.0).expectation(0, 0).unwrap();
            let unsharp = Scenario::tensor(
                singlet_state(),
                [unsharp_plane_observable(ta, eta_a), plane_observable(0.0)],
                [unsharp_plane_observable(tb, eta_b), plane_observable(1.0)],
            )
            .unwrap()
            .expectation(0, 0)
            .unwrap();
            assert!((unsharp - eta_a * eta_b * sharp).abs() < 1e-10);
        }
    }

    #[test]
    fn canonical_settings_give_equal_magnitude_correlations() {
        let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
        let q = canonical_singlet_scenario().quadruple().unwrap();
        assert!((q.e00() - inv_sqrt2).abs() < 1e-12);
        assert!((q.e01() - inv_sqrt2).abs() < 1e-12);
        assert!((q.e10() - inv_sqrt2).abs() < 1e-12);
        assert!((q.e11() + inv_sqrt2).abs() < 1e-12);
    }

    #[test]
    fn quarter_spaced_settings_give_equal_magnitude_correlations() {
        // Settings at 0, π/2 against π/4, 3π/4: every correlation has
        // magnitude 1/√2 on the singlet.
        use std::f64::consts::PI;
        let q = singlet_scenario(0.0, PI / 2.0, PI / 4.0, 3.0 * PI / 4.0)
            .quadruple()
            .unwrap();
        let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
        for e in q.as_array() {
            assert!((e.abs() - inv_sqrt2).abs() < 1e-12);
        }
    }

    #[test]
    fn product_state_all_z_gives_unit_correlations() {
        let ket00 = QuantumState::pure(ComplexVector::basis(4, 0)).unwrap();
        let z = || WingObservable::Sharp(DichotomicObservable::new(pauli_z(), "z").unwrap());
        let s = Scenario::tensor(ket00, [z(), z()], [z(), z()]).unwrap();
        let q = s.quadruple().unwrap();
        assert_eq!(q.as_array(), [1.0, 1.0, 1.0, 1.0]);
    }

    #[test]
    fn maximally_mixed_state_gives_zero_correlations() {
        // Sharp qubit observables are traceless, so every correlation
        // vanishes on 𝟙/4. (Unsharp difference operators can carry
        // trace and do correlate with the maximally mixed state.)
        let rho = ComplexMatrix::identity(4).scale(c_re(0.25));
        let state = QuantumState::mixed(rho).unwrap();
        let mut rng = random::rng_from_seed(13);
        let s = Scenario::tensor(
            state,
            [
                WingObservable::Sharp(random::dichotomic(2, &mut rng)),
                WingObservable::Sharp(random::dichotomic(2, &mut rng)),
            ],
            [
                WingObservable::Sharp(random::dichotomic(2, &mut rng)),
                WingObservable::Sharp(random::dichotomic(2, &mut rng)),
            ],
        )
        .unwrap();
        let q = s.quadruple().unwrap();
        for e in q.as_array() {
            assert!(e.abs() < 1e-10);
        }
    }

    #[test]
    fn correlation_point_arithmetic() {
        let q = CorrelationQuadruple::new(1.0, 1.0, 1.0, 1.0).unwrap();
        let p = CorrelationPoint::from_quadruple(&q);
        assert_eq!((p.x, p.y), (2.0, 0.0));
        let q = CorrelationQuadruple::new(1.0, 1.0, 1.0, -1.0).unwrap();
        let p = CorrelationPoint::from_quadruple(&q);
        assert_eq!((p.x, p.y), (2.0, 2.0));
        let q = canonical_singlet_scenario().quadruple().unwrap();
        let p = CorrelationPoint::from_quadruple(&q);
        let sqrt2 = std::f64::consts::SQRT_2;
        assert!((p.x - sqrt2).abs() < 1e-12 && (p.y - sqrt2).abs() < 1e-12);
    }

    #[test]
    fn quadruple_rejects_out_of_range_entries() {
        assert!(matches!(
            CorrelationQuadruple::new(1.2, 0.0, 0.0, 0.0),
            Err(CorrelationError::CorrelationRange { name: "e00", .. })
        ));
    }

    #[test]
    fn behavior_of_singlet_z_wings_is_perfectly_anticorrelated() {
        let s = singlet_scenario(0.0, 1.0, 0.0, 1.0);
        let t = s.behavior_table().unwrap();
        assert!((t.probability(0, 0, 1, -1) - 0.5).abs() < 1e-12);
        assert!((t.probability(0, 0, -1, 1) - 0.5).abs() < 1e-12);
        assert!(t.probability(0, 0, 1, 1).abs() < 1e-12);
        assert!(t.probability(0, 0, -1, -1).abs() < 1e-12);
    }

    #[test]
    fn behavior_of_maximally_mixed_state_factorizes() {
        let rho = ComplexMatrix::identity(4).scale(c_re(0.25));
        let state = QuantumState::mixed(rho).unwrap();
        let x = WingObservable::Sharp(DichotomicObservable::new(pauli_x(), "x").unwrap());
        let z = WingObservable::Sharp(DichotomicObservable::new(pauli_z(), "z").unwrap());
        let s = Scenario::tensor(state.clone(), [x, z.clone()], [z.clone(), z]).unwrap();
        let t = s.behavior_table().unwrap();
        // Projective wings on the maximally mixed state: every joint
        // outcome has probability 1/4.
        for x_set in 0..2 {
            for y_set in 0..2 {
                for i in [1i64, -1] {
                    for j in [1i64, -1] {
                        assert!((t.probability(x_set, y_set, i, j) - 0.25).abs() < 1e-12);
                    }
                }
            }
        }

        // Unsharp wings: joint probabilities factor into the product of
        // marginals (the state is product and wings are local).
        let mut rng = random::rng_from_seed(14);
        let s = Scenario::tensor(
            state,
            [
                WingObservable::Generalized(random::two_outcome_povm(2, &mut rng)),
                WingObservable::Generalized(random::two_outcome_povm(2, &mut rng)),
            ],
            [
                WingObservable::Generalized(random::two_outcome_povm(2, &mut rng)),
                WingObservable::Generalized(random::two_outcome_povm(2, &mut rng)),
            ],
        )
        .unwrap();
        let t = s.behavior_table().unwrap();
        for x_set in 0..2 {
            for y_set in 0..2 {
                for i in [1i64, -1] {
                    for j in [1i64, -1] {
                        let joint = t.probability(x_set, y_set, i, j);
                        let product = t.alice_marginal(x_set, i, y_set)
                            * t.bob_marginal(y_set, j, x_set);
                        assert!((joint - product).abs() < 1e-10);
                    }
                }
            }
        }
    }

    #[test]
    fn behavior_correlations_match_expectation_route() {
        let mut rng = random::rng_from_seed(15);
        for _ in 0..50 {
            let s = random::commuting_scenario(&mut rng);
            let t = s.behavior_table().unwrap();
            for x in 0..2 {
                for y in 0..2 {
                    let via_table = t.correlation(x, y);
                    let direct = s.expectation(x, y).unwrap();
                    assert!((via_table - direct).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn commuting_scenarios_never_signal() {
        let mut rng = random::rng_from_seed(16);
        for _ in 0..100 {
            let s = random::commuting_scenario(&mut rng);
            let t = s.behavior_table().unwrap();
            let (ok, violation) = t.check_no_signaling(1e-10);
            assert!(ok, "violation {violation}");
        }
    }

    #[test]
    fn hand_built_signaling_table_is_caught() {
        // Alice's +1 marginal under x=0 is 0.6 when Bob uses y=0 but
        // 0.5 when he uses y=1.
        let mut p = [0.25_f64; 16];
        let idx = |x: usize, y: usize, oi: usize, oj: usize| ((x * 2 + y) * 2 + oi) * 2 + oj;
        p[idx(0, 0, 0, 0)] = 0.3;
        p[idx(0, 0, 0, 1)] = 0.3;
        p[idx(0, 0, 1, 0)] = 0.2;
        p[idx(0, 0, 1, 1)] = 0.2;
        let t = BehaviorTable::new(p).unwrap();
        let (ok, violation) = t.check_no_signaling(1e-9);
        assert!(!ok);
        assert!((violation - 0.1).abs() < 1e-12);
    }

    #[test]
    fn expectation_is_linear_in_the_state() {
        let mut rng = random::rng_from_seed(17);
        let alice = [
            random::wing_observable(2, &mut rng),
            random::wing_observable(2, &mut rng),
        ];
        let bob = [
            random::wing_observable(2, &mut rng),
            random::wing_observable(2, &mut rng),
        ];
        let rho1 = random::mixed_state(4, &mut rng).density_matrix();
        let rho2 = random::mixed_state(4, &mut rng).density_matrix();
        let lambda = 0.3;
        let mix = rho1
            .scale(c_re(lambda))
            .add(&rho2.scale(c_re(1.0 - lambda)))
            .unwrap();
        let build = |rho: ComplexMatrix| {
            Scenario::tensor(
                QuantumState::mixed(rho).unwrap(),
                alice.clone(),
                bob.clone(),
            )
            .unwrap()
        };
        let e1 = build(rho1).expectation(0, 0).unwrap();
        let e2 = build(rho2).expectation(0, 0).unwrap();
        let e_mix = build(mix).expectation(0, 0).unwrap();
        assert!((e_mix - (lambda * e1 + (1.0 - lambda) * e2)).abs() < 1e-10);
    }

    #[test]
    fn joint_embedding_rejects_noncommuting_wings() {
        let state = QuantumState::pure(ComplexVector::basis(2, 0)).unwrap();
        let x = WingObservable::Sharp(DichotomicObservable::new(pauli_x(), "x").unwrap());
        let z = WingObservable::Sharp(DichotomicObservable::new(pauli_z(), "z").unwrap());
        let err = Scenario::joint(state, [x.clone(), x], [z.clone(), z]).unwrap_err();
        assert!(matches!(err, CorrelationError::LocalityViolation { .. }));
    }

    #[test]
    fn joint_embedding_accepts_codiagonal_wings() {
        let mut rng = random::rng_from_seed(18);
        let state = random::pure_state(3, &mut rng);
        let (a0, b0) = random::commuting_wing_pair(3, &mut rng);
        // Reuse the same pair for both settings: commutativity holds
        // within each draw.
        let s = Scenario::joint(state, [a0.clone(), a0], [b0.clone(), b0]).unwrap();
        assert!(matches!(s.embedding(), Embedding::Joint { dim: 3 }));
        s.quadruple().unwrap();
    }

    #[test]
    fn construction_rejects_dimension_mismatches() {
        let state = singlet_state();
        let z2 = WingObservable::Sharp(DichotomicObservable::new(pauli_z(), "z").unwrap());
        let z3 = {
            let m = ComplexMatrix::from_real(3, 3, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, -1.0])
                .unwrap();
            WingObservable::Sharp(DichotomicObservable::new(m, "z3").unwrap())
        };
        assert!(matches!(
            Scenario::tensor(state.clone(), [z2.clone(), z3.clone()], [z2.clone(), z2.clone()]),
            Err(CorrelationError::WingDimensionMismatch { wing: "alice", .. })
        ));
        assert!(matches!(
            Scenario::tensor(state, [z3.clone(), z3.clone()], [z3.clone(), z3]),
            Err(CorrelationError::StateDimension { state_dim: 4, expected: 9 })
        ));
    }

    #[test]
    fn behavior_table_validates_entries() {
        let mut p = [0.25_f64; 16];
        p[0] = 1.2;
        p[1] = -0.7;
        assert!(matches!(
            BehaviorTable::new(p),
            Err(CorrelationError::ProbabilityRange { .. })
        ));
        let mut p = [0.25_f64; 16];
        p[0] = 0.3;
        assert!(matches!(
            BehaviorTable::new(p),
            Err(CorrelationError::NotNormalized { x: 0, y: 0, .. })
        ));
    }
}
