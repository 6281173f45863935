//! States, sharp dichotomic observables, and generalized (POVM)
//! observables, together with the reduction of a two-outcome POVM to its
//! difference operator.
//!
//! Outcome labels are plain integers; dichotomic quantities always use
//! +1/−1. All values validate their invariants on construction and are
//! immutable afterwards.

use thiserror::Error;

use crate::linalg::{c_re, Complex, ComplexMatrix, ComplexVector, LinalgError};
use crate::tol;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuantumError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("state vector norm is {norm}, expected 1")]
    StateNorm { norm: f64 },
    #[error("density matrix trace is {trace}, expected 1")]
    StateTrace { trace: f64 },
    #[error("density matrix has eigenvalue {min_eigenvalue:.3e} below -{tolerance:.1e}")]
    StateNotPsd {
        min_eigenvalue: f64,
        tolerance: f64,
    },
    #[error("observable squared deviates from identity by {residual:.3e} (tolerance {tolerance:.1e})")]
    NotInvolutory { residual: f64, tolerance: f64 },
    #[error("direction vector has norm {norm}, expected a unit vector")]
    NotUnitVector { norm: f64 },
    #[error("POVM must have at least one effect")]
    EmptyPovm,
    #[error("effect {index} has eigenvalue {min_eigenvalue:.3e} below -{tolerance:.1e}")]
    EffectNotPsd {
        index: usize,
        min_eigenvalue: f64,
        tolerance: f64,
    },
    #[error("POVM effects sum deviates from identity by {residual:.3e}")]
    EffectSum { residual: f64 },
    #[error("expected a two-outcome POVM, got {count} effects")]
    NotTwoOutcome { count: usize },
    #[error("two-outcome POVM must carry labels +1 and -1, got {first} and {second}")]
    WrongLabels { first: i64, second: i64 },
    #[error("partition cell {cell} repeats effect index {index}")]
    PartitionOverlap { cell: usize, index: usize },
    #[error("partition does not cover effect index {index}")]
    PartitionGap { index: usize },
    #[error("partition references effect index {index}, but the POVM has {count} effects")]
    PartitionOutOfRange { index: usize, count: usize },
    #[error("difference operator norm {norm} exceeds 1 beyond tolerance")]
    NormBound { norm: f64 },
    #[error("inner product between effect branches has imaginary part {imag:.3e}")]
    InnerProductNotReal { imag: f64 },
    #[error("inner product between effect branches is {value:.3e}, expected nonnegative")]
    InnerProductNegative { value: f64 },
}

/// Pauli σ_x.
pub fn pauli_x() -> ComplexMatrix {
    ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]).expect("static entries")
}

/// Pauli σ_y.
pub fn pauli_y() -> ComplexMatrix {
    ComplexMatrix::new(
        2,
        2,
        vec![
            Complex::ZERO,
            Complex::new(0.0, -1.0),
            Complex::new(0.0, 1.0),
            Complex::ZERO,
        ],
    )
    .expect("static entries")
}

/// Pauli σ_z.
pub fn pauli_z() -> ComplexMatrix {
    ComplexMatrix::from_real(2, 2, &[1.0, 0.0, 0.0, -1.0]).expect("static entries")
}

/// A quantum state: either a normalized vector or a density matrix.
#[derive(Debug, Clone, PartialEq)]
pub enum QuantumState {
    Pure { vector: ComplexVector },
    Mixed { rho: ComplexMatrix },
}

impl QuantumState {
    /// Pure state from a vector; must be normalized within [`tol::TOL_STATE`].
    pub fn pure(vector: ComplexVector) -> Result<Self, QuantumError> {
        let norm = vector.norm();
        if (norm - 1.0).abs() > tol::TOL_STATE {
            return Err(QuantumError::StateNorm { norm });
        }
        Ok(Self::Pure { vector })
    }

    /// Mixed state from a density matrix: Hermitian, PSD, unit trace.
    pub fn mixed(rho: ComplexMatrix) -> Result<Self, QuantumError> {
        let eig = rho.hermitian_eigensystem()?;
        let min_eigenvalue = eig.eigenvalues.first().copied().unwrap_or(0.0);
        if min_eigenvalue < -tol::TOL_PSD {
            return Err(QuantumError::StateNotPsd {
                min_eigenvalue,
                tolerance: tol::TOL_PSD,
            });
        }
        let trace = rho.trace();
        if (trace.re - 1.0).abs() > tol::TOL_STATE || trace.im.abs() > tol::TOL_STATE {
            return Err(QuantumError::StateTrace { trace: trace.re });
        }
        Ok(Self::Mixed { rho })
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Pure { vector } => vector.dim(),
            Self::Mixed { rho } => rho.rows(),
        }
    }

    pub fn is_pure(&self) -> bool {
        matches!(self, Self::Pure { .. })
    }

    /// Density-matrix form: |ψ⟩⟨ψ| for pure states, ρ as stored otherwise.
    pub fn density_matrix(&self) -> ComplexMatrix {
        match self {
            Self::Pure { vector } => vector.outer_self(),
            Self::Mixed { rho } => rho.clone(),
        }
    }

    /// Raw expectation ⟨M⟩: ⟨ψ|M|ψ⟩ or Tr(ρM). The imaginary part is
    /// returned so callers can assert realness where it matters.
    pub fn expectation_of(&self, m: &ComplexMatrix) -> Result<Complex, QuantumError> {
        match self {
            Self::Pure { vector } => {
                let mv = m.matvec(vector)?;
                Ok(vector.inner(&mv)?)
            }
            Self::Mixed { rho } => Ok(rho.matmul(m)?.trace()),
        }
    }
}

/// Sharp ±1-valued observable: Hermitian with M² = 𝟙.
#[derive(Debug, Clone, PartialEq)]
pub struct DichotomicObservable {
    matrix: ComplexMatrix,
    label: String,
}

impl DichotomicObservable {
    pub fn new(matrix: ComplexMatrix, label: impl Into<String>) -> Result<Self, QuantumError> {
        if !matrix.is_hermitian(tol::TOL_HERM) {
            return Err(QuantumError::Linalg(LinalgError::NotHermitian {
                max_asymmetry: matrix.hermiticity_deviation(),
                tolerance: tol::TOL_HERM,
            }));
        }
        let square = matrix.matmul(&matrix)?;
        let residual = square
            .sub(&ComplexMatrix::identity(matrix.rows()))?
            .max_abs_entry();
        if residual > tol::TOL_UNIT_SQUARE {
            return Err(QuantumError::NotInvolutory {
                residual,
                tolerance: tol::TOL_UNIT_SQUARE,
            });
        }
        Ok(Self {
            matrix,
            label: label.into(),
        })
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }
}

/// Generalized observable: effects M_i ≥ 0 with Σ M_i = 𝟙.
#[derive(Debug, Clone, PartialEq)]
pub struct Povm {
    effects: Vec<(i64, ComplexMatrix)>,
    label: String,
}

impl Povm {
    pub fn new(
        effects: Vec<(i64, ComplexMatrix)>,
        label: impl Into<String>,
    ) -> Result<Self, QuantumError> {
        let first = effects.first().ok_or(QuantumError::EmptyPovm)?;
        let dim = first.1.rows();
        let mut sum = ComplexMatrix::zeros(dim, dim);
        for (index, (_, effect)) in effects.iter().enumerate() {
            if !effect.is_hermitian(tol::TOL_HERM) {
                return Err(QuantumError::Linalg(LinalgError::NotHermitian {
                    max_asymmetry: effect.hermiticity_deviation(),
                    tolerance: tol::TOL_HERM,
                }));
            }
            let eig = effect.hermitian_eigensystem()?;
            let min_eigenvalue = eig.eigenvalues.first().copied().unwrap_or(0.0);
            if min_eigenvalue < -tol::TOL_PSD {
                return Err(QuantumError::EffectNotPsd {
                    index,
                    min_eigenvalue,
                    tolerance: tol::TOL_PSD,
                });
            }
            sum = sum.add(effect)?;
        }
        let residual = sum.sub(&ComplexMatrix::identity(dim))?.max_abs_entry();
        if residual > tol::TOL_POVM_SUM {
            return Err(QuantumError::EffectSum { residual });
        }
        Ok(Self {
            effects,
            label: label.into(),
        })
    }

    pub fn effects(&self) -> &[(i64, ComplexMatrix)] {
        &self.effects
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dim(&self) -> usize {
        self.effects[0].1.rows()
    }

    pub fn outcome_count(&self) -> usize {
        self.effects.len()
    }

    /// The effect carrying a given outcome label, if present.
    pub fn effect_for(&self, outcome: i64) -> Option<&ComplexMatrix> {
        self.effects
            .iter()
            .find(|(label, _)| *label == outcome)
            .map(|(_, effect)| effect)
    }
}

/// A POVM whose index set carries two partitions; coarse-graining over
/// either partition yields a marginal observable, so the two marginals
/// are jointly measurable by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct MotherPovm {
    povm: Povm,
    partition_a: Vec<Vec<usize>>,
    partition_b: Vec<Vec<usize>>,
}

fn check_partition(partition: &[Vec<usize>], count: usize) -> Result<(), QuantumError> {
    let mut seen = vec![false; count];
    for (cell, indices) in partition.iter().enumerate() {
        for &index in indices {
            if index >= count {
                return Err(QuantumError::PartitionOutOfRange { index, count });
            }
            if seen[index] {
                return Err(QuantumError::PartitionOverlap { cell, index });
            }
            seen[index] = true;
        }
    }
    if let Some(index) = seen.iter().position(|&s| !s) {
        return Err(QuantumError::PartitionGap { index });
    }
    Ok(())
}

impl MotherPovm {
    pub fn new(
        povm: Povm,
        partition_a: Vec<Vec<usize>>,
        partition_b: Vec<Vec<usize>>,
    ) -> Result<Self, QuantumError> {
        check_partition(&partition_a, povm.outcome_count())?;
        check_partition(&partition_b, povm.outcome_count())?;
        Ok(Self {
            povm,
            partition_a,
            partition_b,
        })
    }

    pub fn povm(&self) -> &Povm {
        &self.povm
    }

    pub fn partition_a(&self) -> &[Vec<usize>] {
        &self.partition_a
    }

    pub fn partition_b(&self) -> &[Vec<usize>] {
        &self.partition_b
    }
}

/// Single-operator representative A₁ − A₋₁ of a two-outcome POVM;
/// always a Hermitian contraction.
#[derive(Debug, Clone, PartialEq)]
pub struct DifferenceOperator {
    matrix: ComplexMatrix,
    source: Povm,
}

impl DifferenceOperator {
    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn source(&self) -> &Povm {
        &self.source
    }
}

/// Observable n·σ for a unit Bloch vector n.
pub fn bloch_observable(n: [f64; 3]) -> Result<DichotomicObservable, QuantumError> {
    let norm = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
    if (norm - 1.0).abs() > tol::TOL_STATE {
        return Err(QuantumError::NotUnitVector { norm });
    }
    let m = pauli_x()
        .scale(c_re(n[0]))
        .add(&pauli_y().scale(c_re(n[1])))?
        .add(&pauli_z().scale(c_re(n[2])))?;
    DichotomicObservable::new(
        m,
        format!("bloch({:.6},{:.6},{:.6})", n[0], n[1], n[2]),
    )
}

/// The two-qubit singlet (|01⟩ − |10⟩)/√2.
pub fn singlet_state() -> QuantumState {
    let amp = std::f64::consts::FRAC_1_SQRT_2;
    let vector = ComplexVector::from_real(&[0.0, amp, -amp, 0.0]).expect("static entries");
    QuantumState::pure(vector).expect("normalized by construction")
}

/// Spectral POVM of a sharp observable: projectors onto the +1 and −1
/// eigenspaces, labeled +1 and −1.
pub fn sharp_to_povm(obs: &DichotomicObservable) -> Result<Povm, QuantumError> {
    let dim = obs.dim();
    let eig = obs.matrix().hermitian_eigensystem()?;
    let mut plus = ComplexMatrix::zeros(dim, dim);
    let mut minus = ComplexMatrix::zeros(dim, dim);
    for (col, &lambda) in eig.eigenvalues.iter().enumerate() {
        let column = ComplexVector::new(
            (0..dim).map(|row| eig.eigenvectors.get(row, col)).collect(),
        )?;
        let projector = column.outer_self();
        if lambda >= 0.0 {
            plus = plus.add(&projector)?;
        } else {
            minus = minus.add(&projector)?;
        }
    }
    Povm::new(
        vec![(1, plus), (-1, minus)],
        format!("sharp({})", obs.label()),
    )
}

fn two_outcome_effects(p: &Povm) -> Result<(&ComplexMatrix, &ComplexMatrix), QuantumError> {
    if p.outcome_count() != 2 {
        return Err(QuantumError::NotTwoOutcome {
            count: p.outcome_count(),
        });
    }
    match (p.effect_for(1), p.effect_for(-1)) {
        (Some(plus), Some(minus)) => Ok((plus, minus)),
        _ => Err(QuantumError::WrongLabels {
            first: p.effects()[0].0,
            second: p.effects()[1].0,
        }),
    }
}

/// A₁ − A₋₁ for a two-outcome POVM labeled +1/−1.
pub fn difference_operator(p: &Povm) -> Result<DifferenceOperator, QuantumError> {
    let (plus, minus) = two_outcome_effects(p)?;
    let matrix = plus.sub(minus)?;
    let norm = matrix.operator_norm()?;
    if norm > 1.0 + tol::TOL_NORM_BOUND {
        return Err(QuantumError::NormBound { norm });
    }
    Ok(DifferenceOperator {
        matrix,
        source: p.clone(),
    })
}

/// Both routes of the contraction identity for a two-outcome POVM on a
/// pure state: the left side is ‖(A₁−A₋₁)|ψ⟩‖², the right side is
/// 1 − 4(⟨ψ|A₁|ψ⟩ − ⟨ψ|A₁²|ψ⟩), computed without sharing intermediates.
/// Also asserts that ⟨A₁ψ|A₋₁ψ⟩ is real and nonnegative within
/// [`tol::TOL_NORM_IDENTITY`].
pub fn verify_norm_identity(
    p: &Povm,
    psi: &QuantumState,
) -> Result<(f64, f64), QuantumError> {
    let (plus, minus) = two_outcome_effects(p)?;
    let vector = match psi {
        QuantumState::Pure { vector } => vector,
        QuantumState::Mixed { .. } => {
            return Err(QuantumError::StateNorm { norm: f64::NAN });
        }
    };
    let branch_plus = plus.matvec(vector)?;
    let branch_minus = minus.matvec(vector)?;
    let lhs = branch_plus.sub(&branch_minus)?.norm_sqr();

    let inner = branch_plus.inner(&branch_minus)?;
    if inner.im.abs() > tol::TOL_NORM_IDENTITY {
        return Err(QuantumError::InnerProductNotReal { imag: inner.im });
    }
    if inner.re < -tol::TOL_NORM_IDENTITY {
        return Err(QuantumError::InnerProductNegative { value: inner.re });
    }

    let expect_plus = psi.expectation_of(plus)?.re;
    let expect_plus_sq = psi.expectation_of(&plus.matmul(plus)?)?.re;
    let rhs = 1.0 - 4.0 * (expect_plus - expect_plus_sq);
    Ok((lhs, rhs))
}

/// Marginal observables of a mother POVM: cell sums over each partition.
/// Two-cell partitions are labeled +1/−1 in cell order; larger
/// partitions are labeled by cell index.
pub fn coarse_grain(m: &MotherPovm) -> Result<(Povm, Povm), QuantumError> {
    let build = |partition: &[Vec<usize>], tag: &str| -> Result<Povm, QuantumError> {
        let dim = m.povm().dim();
        let mut effects = Vec::with_capacity(partition.len());
        for (cell, indices) in partition.iter().enumerate() {
            let mut sum = ComplexMatrix::zeros(dim, dim);
            for &index in indices {
                sum = sum.add(&m.povm().effects()[index].1)?;
            }
            let outcome = if partition.len() == 2 {
                if cell == 0 { 1 } else { -1 }
            } else {
                cell as i64
            };
            effects.push((outcome, sum));
        }
        Povm::new(effects, format!("{}[{}]", m.povm().label(), tag))
    };
    Ok((
        build(m.partition_a(), "a")?,
        build(m.partition_b(), "b")?,
    ))
}

/// Checks that every effect on one wing commutes with every effect on
/// the other. Returns the pass/fail verdict together with the largest
/// commutator residual found.
pub fn wings_commute(
    povms_a: &[Povm],
    povms_b: &[Povm],
) -> Result<(bool, f64), QuantumError> {
    let mut max_residual: f64 = 0.0;
    for pa in povms_a {
        for pb in povms_b {
            for (_, ea) in pa.effects() {
                for (_, eb) in pb.effects() {
                    let residual = ea.commutator(eb)?.max_abs_entry();
                    max_residual = max_residual.max(residual);
                }
            }
        }
    }
    Ok((max_residual <= tol::TOL_COMMUTE, max_residual))
}
