//! Command-line front end: scenario files in, machine-readable reports
//! and plot data out. Exit codes are a stable scripting contract:
//! 0 success (violated inequalities are findings, not errors), 2 input
//! or validation failure, 3 locality violation, 4 internal numerical
//! failure.

use std::ffi::OsString;
use std::path::Path;

use clap::{ArgGroup, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::correlations::{
    BehaviorTable, CorrelationError, CorrelationPoint, CorrelationQuadruple, Scenario,
    WingObservable,
};
use crate::inequalities::{
    bell_report, chsh_value, circle_report, cirelson_report, lhv_membership, phi_sweep,
    InequalityError, InequalityReport, LhvMembership,
};
use crate::linalg::{c, Complex, ComplexMatrix, ComplexVector};
use crate::models::{
    nonlocal_protocol, pr_box_table, pr_quadruple, pr_sample, AxisConfiguration, ModelError,
    PrSampleSummary,
};
use crate::optimize::{
    maximize_chsh, maximize_rotated, settings_quadruple, trace_circle, OptimizationResult,
    OptimizeError, StateTarget,
};
use crate::quantum::{bloch_observable, singlet_state, DichotomicObservable, Povm, QuantumState};
use crate::tol;

/// Seed used when neither --seed nor QLOCAL_SEED is given.
pub const DEFAULT_SEED: u64 = 42;

/// The only scenario/report schema this build accepts.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Locality(String),
    #[error("{0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Locality(_) => 3,
            CliError::Internal(_) => 4,
        }
    }
}

fn input_error(e: impl std::fmt::Display) -> CliError {
    CliError::Input(e.to_string())
}

fn internal_error(e: impl std::fmt::Display) -> CliError {
    CliError::Internal(e.to_string())
}

/// Build-phase scenario errors are the file's fault, except the
/// commutativity refusal which has its own exit code.
fn scenario_error(e: CorrelationError) -> CliError {
    match e {
        CorrelationError::LocalityViolation { .. } => CliError::Locality(e.to_string()),
        other => CliError::Input(other.to_string()),
    }
}

fn optimize_error(e: OptimizeError) -> CliError {
    match e {
        OptimizeError::BudgetTooSmall { .. }
        | OptimizeError::StepsTooSmall { .. }
        | OptimizeError::WrongStateDimension { .. }
        | OptimizeError::MissingStateParams => CliError::Input(e.to_string()),
        other => CliError::Internal(other.to_string()),
    }
}

// ---------------------------------------------------------------------------
// Scenario file schema

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub schema_version: u32,
    pub state: StateSpec,
    pub alice: Vec<ObservableSpec>,
    pub bob: Vec<ObservableSpec>,
    pub embedding: EmbeddingSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateSpec {
    /// "pure" or "mixed".
    pub kind: String,
    /// Total dimension; for joint embedding.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    /// Per-wing dimensions [d_a, d_b]; for tensor embedding.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dims: Option<[usize; 2]>,
    /// Amplitudes (pure) or row-major density matrix (mixed), each
    /// entry a [re, im] pair.
    pub entries: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EmbeddingSpec {
    Tensor,
    Joint,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ObservableSpec {
    /// Unit Bloch vector; two-dimensional wings only.
    Bloch([f64; 3]),
    /// Row-major Hermitian matrix squaring to the identity.
    Matrix(Vec<[f64; 2]>),
    /// Two-outcome POVM given as labeled effects.
    Povm(Vec<EffectSpec>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EffectSpec {
    pub label: i64,
    pub entries: Vec<[f64; 2]>,
}

fn complex_entries(pairs: &[[f64; 2]]) -> Vec<Complex> {
    pairs.iter().map(|p| c(p[0], p[1])).collect()
}

fn build_matrix(pairs: &[[f64; 2]], dim: usize, field: &str) -> Result<ComplexMatrix, CliError> {
    if pairs.len() != dim * dim {
        return Err(CliError::Input(format!(
            "{field}: expected {} entries for a {dim}x{dim} matrix, got {}",
            dim * dim,
            pairs.len()
        )));
    }
    ComplexMatrix::new(dim, dim, complex_entries(pairs))
        .map_err(|e| CliError::Input(format!("{field}: {e}")))
}

fn build_state(spec: &StateSpec, dim: usize) -> Result<QuantumState, CliError> {
    match spec.kind.as_str() {
        "pure" => {
            if spec.entries.len() != dim {
                return Err(CliError::Input(format!(
                    "state.entries: expected {dim} amplitudes, got {}",
                    spec.entries.len()
                )));
            }
            let vector = ComplexVector::new(complex_entries(&spec.entries))
                .map_err(|e| CliError::Input(format!("state.entries: {e}")))?;
            QuantumState::pure(vector).map_err(|e| CliError::Input(format!("state: {e}")))
        }
        "mixed" => {
            let rho = build_matrix(&spec.entries, dim, "state.entries")?;
            QuantumState::mixed(rho).map_err(|e| CliError::Input(format!("state: {e}")))
        }
        other => Err(CliError::Input(format!(
            "state.kind: expected \"pure\" or \"mixed\", got \"{other}\""
        ))),
    }
}

fn build_observable(
    spec: &ObservableSpec,
    dim: usize,
    field: &str,
) -> Result<WingObservable, CliError> {
    match spec {
        ObservableSpec::Bloch(n) => {
            if dim != 2 {
                return Err(CliError::Input(format!(
                    "{field}: bloch observables need a two-dimensional wing, got dimension {dim}"
                )));
            }
            bloch_observable(*n)
                .map(WingObservable::Sharp)
                .map_err(|e| CliError::Input(format!("{field}: {e}")))
        }
        ObservableSpec::Matrix(pairs) => {
            let matrix = build_matrix(pairs, dim, field)?;
            DichotomicObservable::new(matrix, field)
                .map(WingObservable::Sharp)
                .map_err(|e| CliError::Input(format!("{field}: {e}")))
        }
        ObservableSpec::Povm(effects) => {
            let mut built = Vec::with_capacity(effects.len());
            for (k, effect) in effects.iter().enumerate() {
                let matrix = build_matrix(&effect.entries, dim, &format!("{field}[{k}].entries"))?;
                built.push((effect.label, matrix));
            }
            Povm::new(built, field)
                .map(WingObservable::Generalized)
                .map_err(|e| CliError::Input(format!("{field}: {e}")))
        }
    }
}

fn build_wing(
    specs: &[ObservableSpec],
    dim: usize,
    wing: &str,
) -> Result<[WingObservable; 2], CliError> {
    if specs.len() != 2 {
        return Err(CliError::Input(format!(
            "{wing}: expected exactly 2 observable specs, got {}",
            specs.len()
        )));
    }
    Ok([
        build_observable(&specs[0], dim, &format!("{wing}[0]"))?,
        build_observable(&specs[1], dim, &format!("{wing}[1]"))?,
    ])
}

/// Turns a parsed scenario file into a validated scenario. Errors are
/// field-addressed input failures, except non-commuting joint wings.
pub fn build_scenario(file: &ScenarioFile) -> Result<Scenario, CliError> {
    if file.schema_version != SCHEMA_VERSION {
        return Err(CliError::Input(format!(
            "schema_version: unsupported version {}, this build reads {SCHEMA_VERSION}",
            file.schema_version
        )));
    }
    match file.embedding {
        EmbeddingSpec::Tensor => {
            let dims = file.state.dims.ok_or_else(|| {
                CliError::Input("state.dims: required for tensor embedding".into())
            })?;
            if file.state.dim.is_some() {
                return Err(CliError::Input(
                    "state.dim: not allowed for tensor embedding, use state.dims".into(),
                ));
            }
            let state = build_state(&file.state, dims[0] * dims[1])?;
            let alice = build_wing(&file.alice, dims[0], "alice")?;
            let bob = build_wing(&file.bob, dims[1], "bob")?;
            Scenario::tensor(state, alice, bob).map_err(scenario_error)
        }
        EmbeddingSpec::Joint => {
            let dim = file.state.dim.ok_or_else(|| {
                CliError::Input("state.dim: required for joint embedding".into())
            })?;
            if file.state.dims.is_some() {
                return Err(CliError::Input(
                    "state.dims: not allowed for joint embedding, use state.dim".into(),
                ));
            }
            let state = build_state(&file.state, dim)?;
            let alice = build_wing(&file.alice, dim, "alice")?;
            let bob = build_wing(&file.bob, dim, "bob")?;
            Scenario::joint(state, alice, bob).map_err(scenario_error)
        }
    }
}

fn load_scenario(path: &Path) -> Result<Scenario, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let file: ScenarioFile = serde_json::from_str(&text)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    build_scenario(&file)
}

// ---------------------------------------------------------------------------
// Report document

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadrupleRecord {
    pub e00: f64,
    pub e01: f64,
    pub e10: f64,
    pub e11: f64,
}

impl From<&CorrelationQuadruple> for QuadrupleRecord {
    fn from(q: &CorrelationQuadruple) -> Self {
        Self {
            e00: q.e00(),
            e01: q.e01(),
            e10: q.e10(),
            e11: q.e11(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointRecord {
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoSignalingRecord {
    pub satisfied: bool,
    pub max_violation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LhvRecord {
    pub member: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub violated_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bound: Option<f64>,
}

impl From<LhvMembership> for LhvRecord {
    fn from(m: LhvMembership) -> Self {
        match m {
            LhvMembership::Member { weights } => Self {
                member: true,
                weights: Some(weights),
                violated_id: None,
                value: None,
                bound: None,
            },
            LhvMembership::NonMember {
                violated_id,
                value,
                bound,
            } => Self {
                member: false,
                weights: None,
                violated_id: Some(violated_id),
                value: Some(value),
                bound: Some(bound),
            },
        }
    }
}

/// P(+1) on each wing for the setting pairs in order 00, 01, 10, 11.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarginalsRecord {
    pub alice_plus: [f64; 4],
    pub bob_plus: [f64; 4],
}

impl MarginalsRecord {
    fn from_table(table: &BehaviorTable) -> Self {
        let mut alice_plus = [0.0; 4];
        let mut bob_plus = [0.0; 4];
        for x in 0..2 {
            for y in 0..2 {
                alice_plus[x * 2 + y] = table.alice_marginal(x, 1, y);
                bob_plus[x * 2 + y] = table.bob_marginal(y, 1, x);
            }
        }
        Self {
            alice_plus,
            bob_plus,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizationRecord {
    pub target: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<f64>,
    pub budget: u64,
    pub evaluations: u64,
    pub best_value: f64,
    pub converged: bool,
    pub angles: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub state_params: Option<Vec<f64>>,
}

/// Machine-readable result record. Serialization is canonical: field
/// order is fixed and absent sections are omitted, so
/// serialize → parse → serialize is byte-identical.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportDocument {
    pub schema_version: u32,
    pub tool_version: String,
    pub generated_at: String,
    pub command: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub embedding: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quadruple: Option<QuadrupleRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub point: Option<PointRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chsh: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reports: Option<Vec<InequalityReport>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub no_signaling: Option<NoSignalingRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub marginals: Option<MarginalsRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lhv: Option<LhvRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub invariant_procedure: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample: Option<PrSampleSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub optimization: Option<OptimizationRecord>,
}

impl ReportDocument {
    fn skeleton(command: &str, timestamp: String) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            generated_at: timestamp,
            command: command.to_string(),
            source: None,
            seed: None,
            embedding: None,
            quadruple: None,
            point: None,
            chsh: None,
            reports: None,
            no_signaling: None,
            marginals: None,
            lhv: None,
            invariant_procedure: None,
            sample: None,
            optimization: None,
        }
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("report serializes");
        text.push('\n');
        text
    }
}

/// Current time in RFC 3339, or the QLOCAL_TIMESTAMP override (kept
/// verbatim) so tests and scripted runs can pin the output bytes.
fn timestamp(env_value: Option<String>) -> String {
    env_value.unwrap_or_else(|| {
        chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Micros, true)
    })
}

fn timestamp_from_env() -> String {
    timestamp(std::env::var("QLOCAL_TIMESTAMP").ok())
}

/// Seed precedence: explicit flag, then QLOCAL_SEED, then the default.
fn resolve_seed(flag: Option<u64>, env_value: Option<String>) -> Result<u64, CliError> {
    if let Some(seed) = flag {
        return Ok(seed);
    }
    match env_value {
        Some(text) => text
            .parse::<u64>()
            .map_err(|_| CliError::Input(format!("QLOCAL_SEED: not an unsigned integer: {text}"))),
        None => Ok(DEFAULT_SEED),
    }
}

fn seed_from_env(flag: Option<u64>) -> Result<u64, CliError> {
    resolve_seed(flag, std::env::var("QLOCAL_SEED").ok())
}

// ---------------------------------------------------------------------------
// Command implementations

fn inequality_bundle(q: &CorrelationQuadruple) -> (PointRecord, f64, Vec<InequalityReport>) {
    let point = CorrelationPoint::from_quadruple(q);
    let reports = vec![bell_report(q), cirelson_report(q), circle_report(&point)];
    (
        PointRecord {
            x: point.x,
            y: point.y,
        },
        chsh_value(q),
        reports,
    )
}

fn no_signaling_record(table: &BehaviorTable) -> NoSignalingRecord {
    let (satisfied, max_violation) = table.check_no_signaling(tol::TOL_REPORT);
    NoSignalingRecord {
        satisfied,
        max_violation,
    }
}

pub fn eval_document(path: &Path) -> Result<ReportDocument, CliError> {
    let scenario = load_scenario(path)?;
    let q = scenario.quadruple().map_err(internal_error)?;
    let table = scenario.behavior_table().map_err(internal_error)?;
    let (point, chsh, reports) = inequality_bundle(&q);

    let mut doc = ReportDocument::skeleton("eval", timestamp_from_env());
    doc.source = Some(path.display().to_string());
    doc.embedding = Some(
        match scenario.embedding() {
            crate::correlations::Embedding::Tensor { .. } => "tensor",
            crate::correlations::Embedding::Joint { .. } => "joint",
        }
        .to_string(),
    );
    doc.quadruple = Some(QuadrupleRecord::from(&q));
    doc.point = Some(point);
    doc.chsh = Some(chsh);
    doc.reports = Some(reports);
    doc.no_signaling = Some(no_signaling_record(&table));
    doc.lhv = Some(LhvRecord::from(lhv_membership(&q)));
    Ok(doc)
}

pub fn sweep_csv(path: &Path, steps: usize) -> Result<String, CliError> {
    let scenario = load_scenario(path)?;
    let q = scenario.quadruple().map_err(internal_error)?;
    let point = CorrelationPoint::from_quadruple(&q);
    let sweep = phi_sweep(&point, steps).map_err(|e| match e {
        InequalityError::StepsTooSmall { .. } => input_error(e),
        other => internal_error(other),
    })?;

    let mut writer = csv::Writer::from_writer(Vec::new());
    writer
        .write_record(["phi", "value", "bound"])
        .map_err(internal_error)?;
    for sample in &sweep.samples {
        writer
            .write_record(&[
                sample.phi.to_string(),
                sample.value.to_string(),
                sample.bound.to_string(),
            ])
            .map_err(internal_error)?;
    }
    let bytes = writer.into_inner().map_err(internal_error)?;
    String::from_utf8(bytes).map_err(internal_error)
}

/// Corner rows let a plotting tool draw the two reference squares next
/// to the traced circle: the axis-aligned square has corners (±2, ±2),
/// the slanted one (±2√2, 0) and (0, ±2√2).
fn corner_rows() -> Vec<(&'static str, f64, f64)> {
    let s = 2.0 * std::f64::consts::SQRT_2;
    vec![
        ("axis_square", 2.0, 2.0),
        ("axis_square", -2.0, 2.0),
        ("axis_square", -2.0, -2.0),
        ("axis_square", 2.0, -2.0),
        ("slanted_square", s, 0.0),
        ("slanted_square", 0.0, s),
        ("slanted_square", -s, 0.0),
        ("slanted_square", 0.0, -s),
    ]
}

pub fn circle_csv(steps: usize, budget: u64, seed: u64) -> Result<String, CliError> {
    let target = StateTarget::Fixed(singlet_state());
    let points = trace_circle(steps, &target, budget, seed).map_err(optimize_error)?;

    let mut writer = csv::Writer::from_writer(Vec::new());
    writer
        .write_record(["kind", "phi", "x", "y", "radius", "converged"])
        .map_err(internal_error)?;
    for p in &points {
        writer
            .write_record(&[
                "circle".to_string(),
                p.phi.to_string(),
                p.point.x.to_string(),
                p.point.y.to_string(),
                p.point.radius().to_string(),
                p.converged.to_string(),
            ])
            .map_err(internal_error)?;
    }
    for (kind, x, y) in corner_rows() {
        writer
            .write_record(&[
                kind.to_string(),
                String::new(),
                x.to_string(),
                y.to_string(),
                x.hypot(y).to_string(),
                String::new(),
            ])
            .map_err(internal_error)?;
    }
    let bytes = writer.into_inner().map_err(internal_error)?;
    String::from_utf8(bytes).map_err(internal_error)
}

fn model_input_error(e: ModelError) -> CliError {
    match e {
        ModelError::AngleOutOfRange { .. } | ModelError::ZeroCount => input_error(e),
        other => internal_error(other),
    }
}

pub fn prbox_document(axes: AxisConfiguration) -> Result<ReportDocument, CliError> {
    let q = pr_quadruple(&axes).map_err(model_input_error)?;
    let table = pr_box_table(&axes).map_err(model_input_error)?;
    let (point, chsh, reports) = inequality_bundle(&q);

    let mut doc = ReportDocument::skeleton("prbox", timestamp_from_env());
    doc.quadruple = Some(QuadrupleRecord::from(&q));
    doc.point = Some(point);
    doc.chsh = Some(chsh);
    doc.reports = Some(reports);
    doc.no_signaling = Some(no_signaling_record(&table));
    doc.lhv = Some(LhvRecord::from(lhv_membership(&q)));
    Ok(doc)
}

pub fn prbox_sample_document(
    theta: f64,
    count: u64,
    seed: u64,
) -> Result<ReportDocument, CliError> {
    let summary = pr_sample(theta, count, seed).map_err(model_input_error)?;
    let mut doc = ReportDocument::skeleton("prbox-sample", timestamp_from_env());
    doc.seed = Some(seed);
    doc.sample = Some(summary);
    Ok(doc)
}

pub fn protocol_document() -> Result<ReportDocument, CliError> {
    let outcome = nonlocal_protocol().map_err(internal_error)?;
    let (point, chsh, reports) = inequality_bundle(&outcome.quadruple);

    let mut doc = ReportDocument::skeleton("protocol", timestamp_from_env());
    doc.quadruple = Some(QuadrupleRecord::from(&outcome.quadruple));
    doc.point = Some(point);
    doc.chsh = Some(chsh);
    doc.reports = Some(reports);
    doc.no_signaling = Some(NoSignalingRecord {
        satisfied: outcome.nosignal_violation <= tol::TOL_REPORT,
        max_violation: outcome.nosignal_violation,
    });
    doc.marginals = Some(MarginalsRecord::from_table(&outcome.behavior));
    doc.lhv = Some(LhvRecord::from(lhv_membership(&outcome.quadruple)));
    doc.invariant_procedure = Some(outcome.invariant_procedure);
    Ok(doc)
}

/// State flag: absent = singlet, "optimize" = search the state too,
/// anything else = path to a JSON state spec of total dimension 4.
fn resolve_state_target(flag: Option<&str>) -> Result<StateTarget, CliError> {
    match flag {
        None => Ok(StateTarget::Fixed(singlet_state())),
        Some("optimize") => Ok(StateTarget::Optimize),
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Input(format!("{path}: {e}")))?;
            let spec: StateSpec = serde_json::from_str(&text)
                .map_err(|e| CliError::Input(format!("{path}: {e}")))?;
            let dim = match (spec.dim, spec.dims) {
                (Some(d), None) => d,
                (None, Some(ds)) => ds[0] * ds[1],
                (None, None) => {
                    return Err(CliError::Input(format!(
                        "{path}: state spec needs dim or dims"
                    )))
                }
                (Some(_), Some(_)) => {
                    return Err(CliError::Input(format!(
                        "{path}: state spec must not give both dim and dims"
                    )))
                }
            };
            if dim != 4 {
                return Err(CliError::Input(format!(
                    "{path}: optimization state must have total dimension 4, got {dim}"
                )));
            }
            Ok(StateTarget::Fixed(build_state(&spec, dim)?))
        }
    }
}

pub fn optimize_document(
    target_kind: TargetKind,
    phi: Option<f64>,
    budget: u64,
    seed: u64,
    state_flag: Option<&str>,
) -> Result<ReportDocument, CliError> {
    let target = resolve_state_target(state_flag)?;
    let (result, target_name, used_phi): (OptimizationResult, &str, Option<f64>) =
        match target_kind {
            TargetKind::Chsh => {
                if phi.is_some() {
                    return Err(CliError::Input(
                        "--phi only applies to --target rotated".into(),
                    ));
                }
                (
                    maximize_chsh(&target, budget, seed).map_err(optimize_error)?,
                    "chsh",
                    None,
                )
            }
            TargetKind::Rotated => {
                let phi = phi.ok_or_else(|| {
                    CliError::Input("--target rotated requires --phi".into())
                })?;
                (
                    maximize_rotated(phi, &target, budget, seed).map_err(optimize_error)?,
                    "rotated",
                    Some(phi),
                )
            }
        };
    let q = settings_quadruple(&result.best_settings, &target).map_err(optimize_error)?;
    let (point, chsh, reports) = inequality_bundle(&q);

    let mut doc = ReportDocument::skeleton("optimize", timestamp_from_env());
    doc.seed = Some(seed);
    doc.quadruple = Some(QuadrupleRecord::from(&q));
    doc.point = Some(point);
    doc.chsh = Some(chsh);
    doc.reports = Some(reports);
    doc.optimization = Some(OptimizationRecord {
        target: target_name.to_string(),
        phi: used_phi,
        budget,
        evaluations: result.evaluations,
        best_value: result.best_value,
        converged: result.converged,
        angles: result.best_settings.angles.to_vec(),
        state_params: result.best_settings.state_params.map(|p| p.to_vec()),
    });
    Ok(doc)
}

/// Parses "a′,b,a,b′" (alice-prime, bob, alice, bob-prime) in radians.
pub fn parse_axes(text: &str) -> Result<AxisConfiguration, CliError> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != 4 {
        return Err(CliError::Input(format!(
            "--axes: expected 4 comma-separated angles (alice-prime,bob,alice,bob-prime), got {}",
            parts.len()
        )));
    }
    let mut values = [0.0_f64; 4];
    for (slot, part) in values.iter_mut().zip(&parts) {
        *slot = part
            .trim()
            .parse::<f64>()
            .map_err(|_| CliError::Input(format!("--axes: not a number: {part}")))?;
    }
    Ok(AxisConfiguration {
        alice_prime: values[0],
        bob: values[1],
        alice: values[2],
        bob_prime: values[3],
    })
}

// ---------------------------------------------------------------------------
// Argument surface

#[derive(Debug, Parser)]
#[command(
    name = "qlocal",
    version,
    about = "Correlation bounds, their boundary, and the models that break them"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TargetKind {
    Chsh,
    Rotated,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate a scenario file: quadruple, inequalities, no-signaling,
    /// local-model membership.
    Eval {
        scenario: std::path::PathBuf,
    },
    /// CSV sweep of the rotated inequality family over a φ grid.
    Sweep {
        scenario: std::path::PathBuf,
        #[arg(long, default_value_t = 360)]
        steps: usize,
    },
    /// CSV trace of the quantum boundary circle plus the two reference
    /// squares.
    Circle {
        #[arg(long, default_value_t = 8)]
        steps: usize,
        #[arg(long, default_value_t = 20_000)]
        budget: u64,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Evaluate the angle-parameterized super-correlation box.
    #[command(group(ArgGroup::new("axis_source").required(true).args(["canonical", "axes"])))]
    Prbox {
        /// Quarter-spaced axes reaching the logical maximum 4.
        #[arg(long)]
        canonical: bool,
        /// Four comma-separated angles: alice-prime,bob,alice,bob-prime.
        #[arg(long, value_name = "AP,B,A,BP")]
        axes: Option<String>,
    },
    /// Sample one box setting pair and tally the outcome cells.
    PrboxSample {
        #[arg(long)]
        theta: f64,
        #[arg(long, default_value_t = 100_000)]
        count: u64,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run the joint-setting-dependent singlet protocol.
    Protocol,
    /// Maximize CHSH or a rotated-family value over settings.
    Optimize {
        #[arg(long, value_enum)]
        target: TargetKind,
        /// Rotation angle; required for --target rotated.
        #[arg(long)]
        phi: Option<f64>,
        #[arg(long, default_value_t = 20_000)]
        budget: u64,
        #[arg(long)]
        seed: Option<u64>,
        /// Path to a state spec JSON, or "optimize" to search the state.
        #[arg(long)]
        state: Option<String>,
    },
}

fn dispatch(cli: Cli) -> Result<String, CliError> {
    match cli.command {
        Command::Eval { scenario } => Ok(eval_document(&scenario)?.to_json()),
        Command::Sweep { scenario, steps } => sweep_csv(&scenario, steps),
        Command::Circle {
            steps,
            budget,
            seed,
        } => circle_csv(steps, budget, seed_from_env(seed)?),
        Command::Prbox { canonical, axes } => {
            let configuration = if canonical {
                AxisConfiguration::canonical()
            } else {
                parse_axes(axes.as_deref().expect("clap group guarantees one source"))?
            };
            Ok(prbox_document(configuration)?.to_json())
        }
        Command::PrboxSample { theta, count, seed } => {
            Ok(prbox_sample_document(theta, count, seed_from_env(seed)?)?.to_json())
        }
        Command::Protocol => Ok(protocol_document()?.to_json()),
        Command::Optimize {
            target,
            phi,
            budget,
            seed,
            state,
        } => Ok(
            optimize_document(target, phi, budget, seed_from_env(seed)?, state.as_deref())?
                .to_json(),
        ),
    }
}

/// Full CLI entry point; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.exit_code() == 0 { 0 } else { 2 };
        }
    };
    match dispatch(cli) {
        Ok(output) => {
            print!("{output}");
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
