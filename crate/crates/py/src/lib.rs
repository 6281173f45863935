//! Python bindings for the correlation toolkit: scenario evaluation,
//! the box and protocol models, membership testing, and the optimizers.
//! Structured results cross the boundary as JSON strings; scalars and
//! small tuples stay native.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use qlocal::cli;
use qlocal::correlations::CorrelationPoint;
use qlocal::inequalities;
use qlocal::models;
use qlocal::optimize;
use qlocal::quantum::singlet_state;

fn value_error(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn runtime_error(e: impl std::fmt::Display) -> PyErr {
    PyRuntimeError::new_err(e.to_string())
}

fn cli_error(e: cli::CliError) -> PyErr {
    match e {
        cli::CliError::Internal(_) => runtime_error(e),
        other => value_error(other),
    }
}

/// A validated two-wing measurement scenario.
#[pyclass(frozen)]
struct Scenario {
    inner: qlocal::correlations::Scenario,
}

#[pymethods]
impl Scenario {
    /// Parses the same JSON schema the command-line tool reads.
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let file: cli::ScenarioFile = serde_json::from_str(text).map_err(value_error)?;
        let inner = cli::build_scenario(&file).map_err(cli_error)?;
        Ok(Self { inner })
    }

    fn quadruple(&self) -> PyResult<(f64, f64, f64, f64)> {
        let q = self.inner.quadruple().map_err(runtime_error)?;
        Ok((q.e00(), q.e01(), q.e10(), q.e11()))
    }

    fn chsh(&self) -> PyResult<f64> {
        let q = self.inner.quadruple().map_err(runtime_error)?;
        Ok(inequalities::chsh_value(&q))
    }

    /// Correlation-plane coordinates (x, y).
    fn point(&self) -> PyResult<(f64, f64)> {
        let q = self.inner.quadruple().map_err(runtime_error)?;
        let p = CorrelationPoint::from_quadruple(&q);
        Ok((p.x, p.y))
    }

    /// Bell, quantum-bound, and circle reports as a JSON array.
    fn reports_json(&self) -> PyResult<String> {
        let q = self.inner.quadruple().map_err(runtime_error)?;
        let p = CorrelationPoint::from_quadruple(&q);
        let reports = vec![
            inequalities::bell_report(&q),
            inequalities::cirelson_report(&q),
            inequalities::circle_report(&p),
        ];
        serde_json::to_string(&reports).map_err(runtime_error)
    }

    /// (satisfied, max marginal deviation) at tolerance 1e-9.
    fn no_signaling(&self) -> PyResult<(bool, f64)> {
        let table = self.inner.behavior_table().map_err(runtime_error)?;
        Ok(table.check_no_signaling(1e-9))
    }

    /// True when the correlations admit a local deterministic model.
    fn lhv_member(&self) -> PyResult<bool> {
        let q = self.inner.quadruple().map_err(runtime_error)?;
        Ok(matches!(
            inequalities::lhv_membership(&q),
            inequalities::LhvMembership::Member { .. }
        ))
    }

    fn is_fully_sharp(&self) -> bool {
        self.inner.is_fully_sharp()
    }

    /// Residual of C² = 4·1 − [A,a][B,b]; sharp scenarios only.
    fn landau_residual(&self) -> PyResult<f64> {
        inequalities::landau_identity_residual(&self.inner).map_err(value_error)
    }
}

/// Box correlation at a folded angle difference in [0, π].
#[pyfunction]
fn pr_correlation(theta: f64) -> PyResult<f64> {
    models::pr_correlation(theta).map_err(value_error)
}

/// Box correlations for axes (alice_prime, bob, alice, bob_prime).
#[pyfunction]
fn pr_quadruple(
    alice_prime: f64,
    bob: f64,
    alice: f64,
    bob_prime: f64,
) -> PyResult<(f64, f64, f64, f64)> {
    let axes = models::AxisConfiguration {
        alice,
        alice_prime,
        bob,
        bob_prime,
    };
    let q = models::pr_quadruple(&axes).map_err(value_error)?;
    Ok((q.e00(), q.e01(), q.e10(), q.e11()))
}

/// CHSH value of the box at the quarter-spaced canonical axes.
#[pyfunction]
fn pr_canonical_chsh() -> PyResult<f64> {
    let q = models::pr_quadruple(&models::AxisConfiguration::canonical()).map_err(value_error)?;
    Ok(inequalities::chsh_value(&q))
}

/// Seeded box sampling; returns the summary as JSON.
#[pyfunction]
fn pr_sample_json(theta: f64, count: u64, seed: u64) -> PyResult<String> {
    let summary = models::pr_sample(theta, count, seed).map_err(value_error)?;
    serde_json::to_string(&summary).map_err(runtime_error)
}

/// Full report of the joint-setting-dependent protocol as JSON.
#[pyfunction]
fn protocol_json() -> PyResult<String> {
    Ok(cli::protocol_document().map_err(cli_error)?.to_json())
}

/// Local-polytope membership for a correlation quadruple:
/// (member, detail) where detail is the witness weights or the violated
/// facet as JSON.
#[pyfunction]
fn lhv_membership(e00: f64, e01: f64, e10: f64, e11: f64) -> PyResult<(bool, String)> {
    let q = qlocal::correlations::CorrelationQuadruple::new(e00, e01, e10, e11)
        .map_err(value_error)?;
    match inequalities::lhv_membership(&q) {
        inequalities::LhvMembership::Member { weights } => Ok((
            true,
            serde_json::to_string(&weights).map_err(runtime_error)?,
        )),
        inequalities::LhvMembership::NonMember {
            violated_id,
            value,
            bound,
        } => Ok((
            false,
            serde_json::to_string(&serde_json::json!({
                "violated_id": violated_id,
                "value": value,
                "bound": bound,
            }))
            .map_err(runtime_error)?,
        )),
    }
}

/// Maximizes CHSH on the singlet; returns
/// (best_value, converged, evaluations, angles).
#[pyfunction]
fn maximize_chsh(budget: u64, seed: u64) -> PyResult<(f64, bool, u64, Vec<f64>)> {
    let target = optimize::StateTarget::Fixed(singlet_state());
    let result = optimize::maximize_chsh(&target, budget, seed).map_err(value_error)?;
    Ok((
        result.best_value,
        result.converged,
        result.evaluations,
        result.best_settings.angles.to_vec(),
    ))
}

/// Maximizes X sin(phi) + Y cos(phi) on the singlet; returns
/// (best_value, converged, x, y).
#[pyfunction]
fn maximize_rotated(phi: f64, budget: u64, seed: u64) -> PyResult<(f64, bool, f64, f64)> {
    let target = optimize::StateTarget::Fixed(singlet_state());
    let result = optimize::maximize_rotated(phi, &target, budget, seed).map_err(value_error)?;
    let q = optimize::settings_quadruple(&result.best_settings, &target).map_err(value_error)?;
    let p = CorrelationPoint::from_quadruple(&q);
    Ok((result.best_value, result.converged, p.x, p.y))
}

#[pymodule]
fn qlocal_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Scenario>()?;
    m.add_function(wrap_pyfunction!(pr_correlation, m)?)?;
    m.add_function(wrap_pyfunction!(pr_quadruple, m)?)?;
    m.add_function(wrap_pyfunction!(pr_canonical_chsh, m)?)?;
    m.add_function(wrap_pyfunction!(pr_sample_json, m)?)?;
    m.add_function(wrap_pyfunction!(protocol_json, m)?)?;
    m.add_function(wrap_pyfunction!(lhv_membership, m)?)?;
    m.add_function(wrap_pyfunction!(maximize_chsh, m)?)?;
    m.add_function(wrap_pyfunction!(maximize_rotated, m)?)?;
    m.add("QUANTUM_CHSH_BOUND", inequalities::QUANTUM_CHSH_BOUND)?;
    m.add("CLASSICAL_CHSH_BOUND", inequalities::CLASSICAL_CHSH_BOUND)?;
    Ok(())
}
