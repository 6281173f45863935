//! The inequality layer: Bell and quantum CHSH bounds, the rotated
//! one-parameter family, the circle bound in the correlation plane, the
//! operator identity behind the quantum bound, and membership in the
//! local deterministic polytope with explicit certificates.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::correlations::{
    CorrelationError, CorrelationPoint, CorrelationQuadruple, Scenario,
};
use crate::linalg::{c_re, ComplexMatrix, LinalgError};
use crate::tol;

/// 2√2, the quantum ceiling of the CHSH combination.
pub const QUANTUM_CHSH_BOUND: f64 = 2.0 * std::f64::consts::SQRT_2;

/// 2, the classical CHSH bound and the circle/rotated-family radius.
pub const CLASSICAL_CHSH_BOUND: f64 = 2.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InequalityError {
    #[error(transparent)]
    Correlation(#[from] CorrelationError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("operator identity requires sharp wings (observables squaring to identity)")]
    SharpOnly,
    #[error("sweep needs at least {min} grid points, got {steps}")]
    StepsTooSmall { steps: usize, min: usize },
}

/// One evaluated inequality: |value| compared against a bound with
/// one-sided numerical slack.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub name: String,
    pub value: f64,
    pub bound: f64,
    pub satisfied: bool,
    /// bound − |value|; negative means violated.
    pub margin: f64,
}

impl InequalityReport {
    pub fn new(name: impl Into<String>, value: f64, bound: f64) -> Self {
        let margin = bound - value.abs();
        Self {
            name: name.into(),
            value,
            bound,
            satisfied: margin >= -tol::TOL_REPORT,
            margin,
        }
    }
}

/// The CHSH combination ⟨AB⟩ + ⟨Ab⟩ + ⟨aB⟩ − ⟨ab⟩ (signed).
pub fn chsh_value(q: &CorrelationQuadruple) -> f64 {
    q.e00() + q.e01() + q.e10() - q.e11()
}

/// CHSH against the classical bound 2.
pub fn bell_report(q: &CorrelationQuadruple) -> InequalityReport {
    InequalityReport::new("bell", chsh_value(q), CLASSICAL_CHSH_BOUND)
}

/// CHSH against the quantum bound 2√2.
pub fn cirelson_report(q: &CorrelationQuadruple) -> InequalityReport {
    InequalityReport::new("cirelson", chsh_value(q), QUANTUM_CHSH_BOUND)
}

/// |X sinφ + Y cosφ| for a correlation-plane point; every quantum point
/// keeps this below 2 for every φ.
pub fn rotated_value(p: &CorrelationPoint, phi: f64) -> f64 {
    (p.x * phi.sin() + p.y * phi.cos()).abs()
}

/// One grid sample of the rotated family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhiSample {
    pub phi: f64,
    pub value: f64,
    pub bound: f64,
}

/// Uniform sweep of the rotated family over [0, 2π).
#[derive(Debug, Clone, PartialEq)]
pub struct PhiSweepResult {
    pub samples: Vec<PhiSample>,
}

impl PhiSweepResult {
    pub fn max_value(&self) -> f64 {
        self.samples.iter().map(|s| s.value).fold(0.0, f64::max)
    }
}

/// Evaluates the rotated family on a uniform φ grid (at least 4 points).
pub fn phi_sweep(p: &CorrelationPoint, steps: usize) -> Result<PhiSweepResult, InequalityError> {
    if steps < 4 {
        return Err(InequalityError::StepsTooSmall { steps, min: 4 });
    }
    let samples = (0..steps)
        .map(|k| {
            let phi = std::f64::consts::TAU * k as f64 / steps as f64;
            PhiSample {
                phi,
                value: rotated_value(p, phi),
                bound: CLASSICAL_CHSH_BOUND,
            }
        })
        .collect();
    Ok(PhiSweepResult { samples })
}

/// Distance of the correlation point from the origin against the
/// radius-2 circle, the strongest of the plane inequalities.
pub fn circle_report(p: &CorrelationPoint) -> InequalityReport {
    InequalityReport::new("circle", p.radius(), CLASSICAL_CHSH_BOUND)
}

/// Residual of the operator identity
/// C² = 4𝟙 − [A,a][B,b] for C = AB + Ab + aB − ab,
/// evaluated on the scenario's lifted observables. Requires all four
/// wings sharp; the identity is derived under A² = a² = B² = b² = 𝟙.
pub fn landau_identity_residual(scenario: &Scenario) -> Result<f64, InequalityError> {
    if !scenario.is_fully_sharp() {
        return Err(InequalityError::SharpOnly);
    }
    let a0 = scenario.alice_difference(0);
    let a1 = scenario.alice_difference(1);
    let b0 = scenario.bob_difference(0);
    let b1 = scenario.bob_difference(1);

    let c = a0
        .matmul(b0)?
        .add(&a0.matmul(b1)?)?
        .add(&a1.matmul(b0)?)?
        .sub(&a1.matmul(b1)?)?;
    let c_squared = c.matmul(&c)?;

    let comm_alice = a0.commutator(a1)?;
    let comm_bob = b0.commutator(b1)?;
    let rhs = ComplexMatrix::identity(c.rows())
        .scale(c_re(4.0))
        .sub(&comm_alice.matmul(&comm_bob)?)?;

    Ok(c_squared.sub(&rhs)?.max_abs_entry())
}

/// The 16 deterministic local strategies: assignments of ±1 to
/// (A, a, B, b), indexed by bits (A, a, B, b) from high to low with
/// bit 0 ↦ +1 and bit 1 ↦ −1. Entry k is that strategy's correlation
/// vector (A·B, A·b, a·B, a·b).
pub fn strategy_correlations() -> [[f64; 4]; 16] {
    let sign = |bit: usize| if bit == 0 { 1.0 } else { -1.0 };
    let mut table = [[0.0; 4]; 16];
    for (k, row) in table.iter_mut().enumerate() {
        let av = sign((k >> 3) & 1);
        let ap = sign((k >> 2) & 1);
        let bv = sign((k >> 1) & 1);
        let bp = sign(k & 1);
        *row = [av * bv, av * bp, ap * bv, ap * bp];
    }
    table
}

/// The 8 sign patterns (s00, s01, s10, s11) with product −1; each gives
/// a facet s·e ≤ 2 of the local polytope.
pub fn chsh_sign_variants() -> [[f64; 4]; 8] {
    let mut out = [[0.0; 4]; 8];
    let mut idx = 0;
    for mask in 0..16u32 {
        let signs = [
            if mask & 8 == 0 { 1.0 } else { -1.0 },
            if mask & 4 == 0 { 1.0 } else { -1.0 },
            if mask & 2 == 0 { 1.0 } else { -1.0 },
            if mask & 1 == 0 { 1.0 } else { -1.0 },
        ];
        if signs.iter().product::<f64>() < 0.0 {
            out[idx] = signs;
            idx += 1;
        }
    }
    debug_assert_eq!(idx, 8);
    out
}

/// Verdict of the local-polytope membership test. Both branches carry a
/// checkable certificate: convex weights that reproduce the quadruple,
/// or a facet the quadruple violates.
#[derive(Debug, Clone, PartialEq)]
pub enum LhvMembership {
    Member {
        /// Convex weights over the 16 deterministic strategies in
        /// [`strategy_correlations`] order; reproduces the quadruple
        /// within 1e−9.
        weights: Vec<f64>,
    },
    NonMember {
        /// Identifier of the violated facet, e.g. "chsh[+++-]".
        violated_id: String,
        value: f64,
        bound: f64,
    },
}

/// Gaussian elimination with partial pivoting for the small dense
/// systems of the witness search. Returns None when the pivot collapses.
fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n).max_by(|&r, &s| a[r][col].abs().total_cmp(&a[s][col].abs()))?;
        if a[pivot][col].abs() < 1e-12 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in (col + 1)..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for col in (0..n).rev() {
        let mut acc = b[col];
        for k in (col + 1)..n {
            acc -= a[col][k] * x[k];
        }
        x[col] = acc / a[col][col];
    }
    Some(x)
}

/// Least-squares weights for q over a set of strategy vectors, with the
/// normalization row appended. Returns per-vertex weights or None if
/// the normal equations are singular.
fn subset_weights(vertices: &[[f64; 4]], q: &[f64; 4]) -> Option<Vec<f64>> {
    let m = vertices.len();
    // Rows: 4 correlation coordinates plus the convexity row of ones.
    let rows = 5;
    let matrix_entry = |r: usize, c: usize| -> f64 {
        if r < 4 {
            vertices[c][r]
        } else {
            1.0
        }
    };
    let rhs_entry = |r: usize| -> f64 {
        if r < 4 {
            q[r]
        } else {
            1.0
        }
    };
    // Normal equations MᵀM w = Mᵀ b.
    let mut gram = vec![vec![0.0; m]; m];
    let mut rhs = vec![0.0; m];
    for i in 0..m {
        for j in 0..m {
            gram[i][j] = (0..rows).map(|r| matrix_entry(r, i) * matrix_entry(r, j)).sum();
        }
        rhs[i] = (0..rows).map(|r| matrix_entry(r, i) * rhs_entry(r)).sum();
    }
    solve_dense(gram, rhs)
}

/// Tests q against the 16 facets of the local polytope (box constraints
/// are already enforced by the quadruple's own invariant). On membership
/// the witness is found by enumerating vertex subsets of the 8 distinct
/// strategy correlation vectors (Carathéodory: 5 suffice in four
/// dimensions; 6 are allowed as numerical slack).
pub fn lhv_membership(q: &CorrelationQuadruple) -> LhvMembership {
    let e = q.as_array();

    let mut worst_value = f64::NEG_INFINITY;
    let mut worst_signs = [1.0; 4];
    for signs in chsh_sign_variants() {
        let value: f64 = (0..4).map(|i| signs[i] * e[i]).sum();
        if value > worst_value {
            worst_value = value;
            worst_signs = signs;
        }
    }
    if worst_value > CLASSICAL_CHSH_BOUND + tol::TOL_REPORT {
        let id: String = worst_signs
            .iter()
            .map(|&s| if s > 0.0 { '+' } else { '-' })
            .collect();
        return LhvMembership::NonMember {
            violated_id: format!("chsh[{id}]"),
            value: worst_value,
            bound: CLASSICAL_CHSH_BOUND,
        };
    }

    // Distinct correlation vertices with a representative strategy each
    // (a global sign flip of all four observables preserves products,
    // so each vertex is realized by exactly two strategies).
    let strategies = strategy_correlations();
    let mut classes: Vec<([f64; 4], usize)> = Vec::new();
    for (k, v) in strategies.iter().enumerate() {
        if !classes.iter().any(|(seen, _)| seen == v) {
            classes.push((*v, k));
        }
    }

    for size in 1..=6usize.min(classes.len()) {
        let mut picks: Vec<usize> = (0..size).collect();
        loop {
            let vertices: Vec<[f64; 4]> = picks.iter().map(|&i| classes[i].0).collect();
            if let Some(mut w) = subset_weights(&vertices, &e) {
                if w.iter().all(|&wi| wi >= -1e-12) {
                    for wi in &mut w {
                        *wi = wi.max(0.0);
                    }
                    let total: f64 = w.iter().sum();
                    if total > 1e-12 {
                        for wi in &mut w {
                            *wi /= total;
                        }
                        let mut reproduced = [0.0; 4];
                        for (wi, v) in w.iter().zip(&vertices) {
                            for (acc, coord) in reproduced.iter_mut().zip(v) {
                                *acc += wi * coord;
                            }
                        }
                        let error = reproduced
                            .iter()
                            .zip(&e)
                            .map(|(r, q)| (r - q).abs())
                            .fold(0.0, f64::max);
                        if error <= tol::TOL_REPORT {
                            let mut weights = vec![0.0; 16];
                            for (wi, &pick) in w.iter().zip(&picks) {
                                weights[classes[pick].1] = *wi;
                            }
                            return LhvMembership::Member { weights };
                        }
                    }
                }
            }
            // Advance to the next lexicographic subset of the classes.
            let mut i = size;
            loop {
                if i == 0 {
                    break;
                }
                i -= 1;
                if picks[i] != i + classes.len() - size {
                    picks[i] += 1;
                    for j in (i + 1)..size {
                        picks[j] = picks[j - 1] + 1;
                    }
                    break;
                }
                if i == 0 {
                    picks.clear();
                    break;
                }
            }
            if picks.is_empty() {
                break;
            }
        }
    }

    unreachable!("a quadruple inside all 16 facets lies in the polytope and the subset search must certify it");
}
