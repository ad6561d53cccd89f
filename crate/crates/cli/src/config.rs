//! Scenario documents: JSON with complex numbers as `[re, im]` pairs and
//! matrices as row-major nested arrays.

use std::collections::BTreeMap;
use std::fmt;

use bochner::bernstein::{cone_combine, diagonal_lift, direct_sum, rescale, BernsteinFunction};
use bochner::linalg::CMatrix;
use bochner::semigroup::{
    fourier_translation_model, jordan_polynomial_tuple, make_commuting_random, OperatorTuple, SpectralBox,
};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Scenario bundled with the binary, selected by passing `paper-suite`.
pub const PAPER_SUITE: &str = include_str!("../scenarios/paper-suite.json");

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    /// Field path such as `functions[2].params.alpha`; empty for syntax errors.
    pub path: String,
    pub message: String,
    pub line: Option<usize>,
    pub column: Option<usize>,
}

impl ConfigError {
    fn at(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self { path: path.into(), message: message.into(), line: None, column: None }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.path.is_empty() && self.path != "." {
            write!(f, "{}: ", self.path)?;
        }
        write!(f, "{}", self.message)?;
        if let (Some(l), Some(c)) = (self.line, self.column) {
            write!(f, " (line {l}, column {c})")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Text,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Absolute tolerance of the Lévy quadrature.
    #[serde(default = "default_quadrature")]
    pub quadrature: f64,
    /// Relative tolerance of oracle comparisons and spectral matching.
    #[serde(default = "default_assertion")]
    pub assertion: f64,
    /// Relative slack allowed in the moment inequality.
    #[serde(default = "default_slack")]
    pub moment_slack: f64,
}

fn default_quadrature() -> f64 {
    1e-10
}
fn default_assertion() -> f64 {
    1e-6
}
fn default_slack() -> f64 {
    1e-9
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { quadrature: default_quadrature(), assertion: default_assertion(), moment_slack: default_slack() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub format: Format,
    #[serde(default)]
    pub functions: Vec<FunctionSpec>,
    #[serde(default)]
    pub operators: Vec<OperatorSpec>,
    #[serde(default)]
    pub experiments: Vec<ExperimentSpec>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Catalog {
    FractionalPower,
    Log1m,
    TemperedStable,
    Poisson,
    Linear,
    Killing,
    DiagonalStable,
    Cone,
    DirectSum,
    Lift,
    Rescale,
}

impl Catalog {
    pub const ALL: [Catalog; 11] = [
        Catalog::FractionalPower,
        Catalog::Log1m,
        Catalog::TemperedStable,
        Catalog::Poisson,
        Catalog::Linear,
        Catalog::Killing,
        Catalog::DiagonalStable,
        Catalog::Cone,
        Catalog::DirectSum,
        Catalog::Lift,
        Catalog::Rescale,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Catalog::FractionalPower => "fractional_power",
            Catalog::Log1m => "log1m",
            Catalog::TemperedStable => "tempered_stable",
            Catalog::Poisson => "poisson",
            Catalog::Linear => "linear",
            Catalog::Killing => "killing",
            Catalog::DiagonalStable => "diagonal_stable",
            Catalog::Cone => "cone",
            Catalog::DirectSum => "direct_sum",
            Catalog::Lift => "lift",
            Catalog::Rescale => "rescale",
        }
    }

    /// Parameters and a one-line description, for `--list-catalog`.
    pub fn describe(self) -> (&'static str, &'static str) {
        match self {
            Catalog::FractionalPower => ("alpha ∈ (0, 1]", "−(−s)^α"),
            Catalog::Log1m => ("", "−log(1 − s)"),
            Catalog::TemperedStable => ("alpha ∈ (0, 1), rate > 0", "rate^α − (rate − s)^α"),
            Catalog::Poisson => ("rate = 1, jump = 1", "rate·(e^{jump·s} − 1)"),
            Catalog::Linear => ("c1: [≥ 0, …]", "c₁·s"),
            Catalog::Killing => ("c0 ≤ 0, n", "constant c₀"),
            Catalog::DiagonalStable => ("alpha ∈ (0, 1), w: [≥ 0, …]", "−(−w·s)^α"),
            Catalog::Cone => ("terms: [[c ≥ 0, id], …]", "Σ cᵢψᵢ"),
            Catalog::DirectSum => ("left, right", "ψ(s′) + φ(s″)"),
            Catalog::Lift => ("inner (n = 1), w: [≥ 0, …]", "φ(w·s)"),
            Catalog::Rescale => ("inner, factor > 0", "ψ(factor·s)"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rate: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jump: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c1: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub terms: Option<Vec<(f64, String)>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub left: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub right: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inner: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub factor: Option<f64>,
}

impl Params {
    fn is_empty(&self) -> bool {
        *self == Params::default()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionSpec {
    pub id: String,
    pub catalog: Catalog,
    #[serde(default, skip_serializing_if = "Params::is_empty")]
    pub params: Params,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxSpec {
    pub re: (f64, f64),
    pub im: (f64, f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum OperatorSpec {
    /// One row-major matrix of `[re, im]` entries per generator.
    Explicit {
        id: String,
        matrices: Vec<Vec<Vec<[f64; 2]>>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        bounds: Option<Vec<f64>>,
    },
    Random {
        id: String,
        n: usize,
        d: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
        #[serde(rename = "box", default, skip_serializing_if = "Option::is_none")]
        spectral_box: Option<BoxSpec>,
    },
    Jordan {
        id: String,
        n: usize,
        d: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
    },
    Fourier {
        id: String,
        #[serde(rename = "K")]
        cutoff: usize,
        #[serde(default = "one")]
        n: usize,
    },
    Ray {
        id: String,
        theta: f64,
    },
}

fn one() -> usize {
    1
}

impl OperatorSpec {
    pub fn id(&self) -> &str {
        match self {
            OperatorSpec::Explicit { id, .. }
            | OperatorSpec::Random { id, .. }
            | OperatorSpec::Jordan { id, .. }
            | OperatorSpec::Fourier { id, .. }
            | OperatorSpec::Ray { id, .. } => id,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Inequality {
    #[default]
    Moment,
    Step,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// `ψ_k(s) = e^{s/k} − 1`
    PoissonRescaled,
    /// `ψ_k = ψ/k`
    Scaled,
    /// `ψ_k(s) = ψ(s/k)`
    Dilated,
}

fn default_times() -> Vec<f64> {
    vec![0.1, 1.0, 5.0]
}
fn default_limit_times() -> Vec<f64> {
    vec![1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6]
}
fn default_parts() -> Vec<u8> {
    vec![1, 2, 3, 4, 5]
}
fn default_max_d() -> usize {
    8
}
fn default_small_d() -> usize {
    4
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ExperimentSpec {
    OracleEquivalence {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        name: Option<String>,
        functions: Vec<String>,
        #[serde(default)]
        operators: Vec<String>,
        #[serde(default)]
        random_trials: usize,
        #[serde(default = "default_max_d")]
        max_d: usize,
        /// Points per function for the closed-form versus Lévy-integral check.
        #[serde(default)]
        grid_points: usize,
    },
    Subordination {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        name: Option<String>,
        functions: Vec<String>,
        operators: Vec<String>,
        #[serde(default = "default_times")]
        times: Vec<f64>,
        #[serde(default = "default_limit_times")]
        limit_times: Vec<f64>,
    },
    SpectralMapping {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        name: Option<String>,
        functions: Vec<String>,
        #[serde(default)]
        operators: Vec<String>,
        #[serde(default = "default_parts")]
        parts: Vec<u8>,
        #[serde(default)]
        random_trials: usize,
        #[serde(default)]
        jordan_trials: usize,
        #[serde(default = "default_small_d")]
        max_d: usize,
    },
    Factorization {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        name: Option<String>,
        functions: Vec<String>,
        #[serde(default)]
        operators: Vec<String>,
        #[serde(default)]
        random_trials: usize,
        #[serde(default = "default_small_d")]
        max_d: usize,
    },
    Holomorphy {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        name: Option<String>,
        function: String,
        /// Operator ids; a ray model contributes one generator, a tuple all of its own.
        sources: Vec<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        bounds: Option<Vec<f64>>,
    },
    MomentSweep {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        name: Option<String>,
        functions: Vec<String>,
        trials: usize,
        #[serde(default = "default_max_d")]
        max_d: usize,
        #[serde(default)]
        inequality: Inequality,
    },
    Boundedness {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        name: Option<String>,
        function: String,
        #[serde(rename = "K_list")]
        cutoffs: Vec<usize>,
    },
    Convergence {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        name: Option<String>,
        family: Family,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        function: Option<String>,
        ks: Vec<f64>,
        operator: String,
    },
}

impl ExperimentSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            ExperimentSpec::OracleEquivalence { .. } => "oracle_equivalence",
            ExperimentSpec::Subordination { .. } => "subordination",
            ExperimentSpec::SpectralMapping { .. } => "spectral_mapping",
            ExperimentSpec::Factorization { .. } => "factorization",
            ExperimentSpec::Holomorphy { .. } => "holomorphy",
            ExperimentSpec::MomentSweep { .. } => "moment_sweep",
            ExperimentSpec::Boundedness { .. } => "boundedness",
            ExperimentSpec::Convergence { .. } => "convergence",
        }
    }

    /// Label used in the `experiment` column.
    pub fn label(&self) -> String {
        let name = match self {
            ExperimentSpec::OracleEquivalence { name, .. }
            | ExperimentSpec::Subordination { name, .. }
            | ExperimentSpec::SpectralMapping { name, .. }
            | ExperimentSpec::Factorization { name, .. }
            | ExperimentSpec::Holomorphy { name, .. }
            | ExperimentSpec::MomentSweep { name, .. }
            | ExperimentSpec::Boundedness { name, .. }
            | ExperimentSpec::Convergence { name, .. } => name,
        };
        name.clone().unwrap_or_else(|| self.kind().to_string())
    }
}

/// Parses a scenario, reporting the field path and position of the first error.
pub fn parse(text: &str) -> Result<ScenarioConfig, ConfigError> {
    let mut de = serde_json::Deserializer::from_str(text);
    let config: ScenarioConfig = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        ConfigError {
            path,
            message: strip_position(&inner.to_string()),
            line: Some(inner.line()),
            column: Some(inner.column()),
        }
    })?;
    de.end().map_err(|e| ConfigError {
        path: String::new(),
        message: strip_position(&e.to_string()),
        line: Some(e.line()),
        column: Some(e.column()),
    })?;
    Ok(config)
}

fn strip_position(message: &str) -> String {
    match message.rfind(" at line ") {
        Some(i) => message[..i].to_string(),
        None => message.to_string(),
    }
}

/// Pretty JSON; `parse(&emit(&c)) == c`.
pub fn emit(config: &ScenarioConfig) -> String {
    let mut s = serde_json::to_string_pretty(config).expect("scenario serializes");
    s.push('\n');
    s
}

/// Bundled scenario for the name `paper-suite`, otherwise `None`.
pub fn bundled(name: &str) -> Option<&'static str> {
    (name == "paper-suite").then_some(PAPER_SUITE)
}

/// An operator after construction.
#[derive(Debug, Clone)]
pub enum Operator {
    Tuple(OperatorTuple),
    Ray(f64),
}

/// Functions and operators built from a scenario, keyed by id.
#[derive(Debug, Clone, Default)]
pub struct Resolved {
    pub functions: BTreeMap<String, BernsteinFunction>,
    pub operators: BTreeMap<String, Operator>,
}

impl Resolved {
    pub fn function(&self, id: &str, path: &str) -> Result<&BernsteinFunction, ConfigError> {
        self.functions.get(id).ok_or_else(|| ConfigError::at(path, format!("unknown function id `{id}`")))
    }

    pub fn tuple(&self, id: &str, path: &str) -> Result<&OperatorTuple, ConfigError> {
        match self.operators.get(id) {
            Some(Operator::Tuple(t)) => Ok(t),
            Some(Operator::Ray(_)) => Err(ConfigError::at(path, format!("`{id}` is a ray model, not a matrix tuple"))),
            None => Err(ConfigError::at(path, format!("unknown operator id `{id}`"))),
        }
    }
}

fn require<T: Clone>(value: &Option<T>, path: &str, field: &str) -> Result<T, ConfigError> {
    value.clone().ok_or_else(|| ConfigError::at(format!("{path}.{field}"), "missing parameter"))
}

fn library(path: String) -> impl Fn(bochner::Error) -> ConfigError {
    move |e| ConfigError::at(path.clone(), e.to_string())
}

/// Builds one catalog function; earlier functions are available by id.
fn build_function(
    spec: &FunctionSpec,
    known: &BTreeMap<String, BernsteinFunction>,
    path: &str,
) -> Result<BernsteinFunction, ConfigError> {
    let p = &spec.params;
    let pp = format!("{path}.params");
    let lookup = |id: &str, field: &str| -> Result<BernsteinFunction, ConfigError> {
        known.get(id).cloned().ok_or_else(|| ConfigError::at(format!("{pp}.{field}"), format!("unknown function id `{id}`")))
    };
    match spec.catalog {
        Catalog::FractionalPower => {
            let alpha = require(&p.alpha, &pp, "alpha")?;
            if !(alpha > 0.0 && alpha <= 1.0) {
                return Err(ConfigError::at(format!("{pp}.alpha"), format!("α = {alpha} outside (0, 1]")));
            }
            BernsteinFunction::fractional_power(alpha).map_err(library(format!("{pp}.alpha")))
        }
        Catalog::Log1m => Ok(BernsteinFunction::log1m()),
        Catalog::TemperedStable => {
            let alpha = require(&p.alpha, &pp, "alpha")?;
            if !(alpha > 0.0 && alpha < 1.0) {
                return Err(ConfigError::at(format!("{pp}.alpha"), format!("α = {alpha} outside (0, 1)")));
            }
            BernsteinFunction::tempered_stable(alpha, require(&p.rate, &pp, "rate")?).map_err(library(pp.clone()))
        }
        Catalog::Poisson => BernsteinFunction::poisson(p.rate.unwrap_or(1.0), p.jump.unwrap_or(1.0)).map_err(library(pp.clone())),
        Catalog::Linear => BernsteinFunction::linear(require(&p.c1, &pp, "c1")?).map_err(library(format!("{pp}.c1"))),
        Catalog::Killing => {
            BernsteinFunction::killing(require(&p.c0, &pp, "c0")?, p.n.unwrap_or(1)).map_err(library(format!("{pp}.c0")))
        }
        Catalog::DiagonalStable => {
            let alpha = require(&p.alpha, &pp, "alpha")?;
            if !(alpha > 0.0 && alpha < 1.0) {
                return Err(ConfigError::at(format!("{pp}.alpha"), format!("α = {alpha} outside (0, 1)")));
            }
            BernsteinFunction::diagonal_stable(alpha, require(&p.w, &pp, "w")?).map_err(library(format!("{pp}.w")))
        }
        Catalog::Cone => {
            let terms = require(&p.terms, &pp, "terms")?;
            let built = terms
                .iter()
                .enumerate()
                .map(|(i, (c, id))| Ok((*c, lookup(id, &format!("terms[{i}]"))?)))
                .collect::<Result<Vec<_>, ConfigError>>()?;
            cone_combine(&built).map_err(library(format!("{pp}.terms")))
        }
        Catalog::DirectSum => {
            let left = lookup(&require(&p.left, &pp, "left")?, "left")?;
            let right = lookup(&require(&p.right, &pp, "right")?, "right")?;
            Ok(direct_sum(&left, &right))
        }
        Catalog::Lift => {
            let inner = lookup(&require(&p.inner, &pp, "inner")?, "inner")?;
            diagonal_lift(&inner, require(&p.w, &pp, "w")?).map_err(library(pp.clone()))
        }
        Catalog::Rescale => {
            let inner = lookup(&require(&p.inner, &pp, "inner")?, "inner")?;
            rescale(&inner, require(&p.factor, &pp, "factor")?).map_err(library(format!("{pp}.factor")))
        }
    }
}

fn build_operator(spec: &OperatorSpec, default_seed: u64, path: &str) -> Result<Operator, ConfigError> {
    match spec {
        OperatorSpec::Explicit { matrices, bounds, .. } => {
            let mut generators = Vec::with_capacity(matrices.len());
            for (j, rows) in matrices.iter().enumerate() {
                let d = rows.len();
                if let Some(i) = rows.iter().position(|r| r.len() != d) {
                    return Err(ConfigError::at(format!("{path}.matrices[{j}][{i}]"), format!("row length differs from {d}")));
                }
                let entries: Vec<Complex64> = rows.iter().flatten().map(|z| Complex64::new(z[0], z[1])).collect();
                generators.push(CMatrix::from_row_slice(d, d, &entries));
            }
            let tuple = match bounds {
                Some(b) => OperatorTuple::with_bounds(generators, b.clone()),
                None => OperatorTuple::new(generators),
            };
            tuple.map(Operator::Tuple).map_err(library(format!("{path}.matrices")))
        }
        OperatorSpec::Random { n, d, seed, spectral_box, .. } => {
            let bx = match spectral_box {
                Some(b) => SpectralBox::new(b.re, b.im).map_err(library(format!("{path}.box")))?,
                None => SpectralBox::default(),
            };
            make_commuting_random(*n, *d, seed.unwrap_or(default_seed), bx)
                .map(Operator::Tuple)
                .map_err(library(path.to_string()))
        }
        OperatorSpec::Jordan { n, d, seed, .. } => jordan_polynomial_tuple(*n, *d, seed.unwrap_or(default_seed))
            .map(|(t, _)| Operator::Tuple(t))
            .map_err(library(path.to_string())),
        OperatorSpec::Fourier { cutoff, n, .. } => {
            fourier_translation_model(*cutoff, *n).map(Operator::Tuple).map_err(library(format!("{path}.K")))
        }
        OperatorSpec::Ray { theta, .. } => {
            bochner::semigroup::DiagonalRayModel::ray(*theta).map_err(library(format!("{path}.theta")))?;
            Ok(Operator::Ray(*theta))
        }
    }
}

/// Builds every function and operator. Operators without an explicit seed
/// draw one from the scenario seed and their position.
pub fn resolve(config: &ScenarioConfig, seed: u64) -> Result<Resolved, ConfigError> {
    let mut out = Resolved::default();
    for (i, spec) in config.functions.iter().enumerate() {
        let path = format!("functions[{i}]");
        if out.functions.contains_key(&spec.id) {
            return Err(ConfigError::at(format!("{path}.id"), format!("duplicate id `{}`", spec.id)));
        }
        let f = build_function(spec, &out.functions, &path)?;
        out.functions.insert(spec.id.clone(), f);
    }
    for (i, spec) in config.operators.iter().enumerate() {
        let path = format!("operators[{i}]");
        if out.operators.contains_key(spec.id()) {
            return Err(ConfigError::at(format!("{path}.id"), format!("duplicate id `{}`", spec.id())));
        }
        let op = build_operator(spec, seed.wrapping_add(i as u64), &path)?;
        out.operators.insert(spec.id().to_string(), op);
    }
    Ok(out)
}
