//! Executes the experiments of a scenario. Experiments and their trials run
//! on the rayon pool; results are collected in configuration order.

use std::f64::consts::PI;
use std::fmt;

use bochner::analysis::{
    boundedness_bound, boundedness_experiment, convergence_experiment, holomorphy_with_subordination,
    moment_check_given, step_bound_check, DefectSource,
};
use bochner::bernstein::{cone_combine, rescale, BernsteinFunction};
use bochner::calculus::{apply_psi_spectral, apply_psi_with, factorization_check, v_identity_residual, SubordinatorFamily};
use bochner::linalg::{expm, frobenius, op_norm, CVector};
use bochner::semigroup::{jordan_polynomial_tuple, make_commuting_random, OperatorTuple, SpectralBox};
use bochner::spectra::{mapping_check_given, MappingPart, Verdict, MATCH_TOL};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::{resolve, ConfigError, ExperimentSpec, Family, Inequality, Operator, Resolved, ScenarioConfig, Tolerances};

/// Defining identity of `V_j^λ` must hold to this absolute accuracy.
pub const V_IDENTITY_TOL: f64 = 1e-8;
/// Final residual required of a convergence sequence.
pub const CONVERGENCE_TARGET: f64 = 1e-3;
/// Final residual required of the generator limit `(g_t x − x)/t → ψ(A)x`.
pub const GENERATOR_LIMIT_TARGET: f64 = 1e-4;
/// Margin added to the weighted defect when comparing the measured limsup.
pub const HOLOMORPHY_MARGIN: f64 = 0.05;
/// Growth factor separating bounded from unbounded norm sequences.
pub const DICHOTOMY_RATIO: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    Inapplicable,
    Evidence,
    Error,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Inapplicable => "INAPPLICABLE",
            Status::Evidence => "EVIDENCE",
            Status::Error => "ERROR",
        })
    }
}

impl From<Verdict> for Status {
    fn from(v: Verdict) -> Self {
        match v {
            Verdict::Pass => Status::Pass,
            Verdict::Fail => Status::Fail,
            Verdict::Inapplicable => Status::Inapplicable,
            Verdict::Evidence => Status::Evidence,
        }
    }
}

fn at_most(value: f64, bound: f64) -> Status {
    if value <= bound {
        Status::Pass
    } else {
        Status::Fail
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub experiment: String,
    pub case_id: String,
    pub quantity: String,
    pub value: f64,
    pub bound: f64,
    pub status: Status,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutcome {
    pub label: String,
    pub kind: &'static str,
    pub rows: Vec<Row>,
    /// Free-form lines for the text report.
    pub notes: Vec<String>,
}

impl ExperimentOutcome {
    pub fn failures(&self) -> usize {
        self.rows.iter().filter(|r| r.status == Status::Fail).count()
    }

    pub fn errors(&self) -> usize {
        self.rows.iter().filter(|r| r.status == Status::Error).count()
    }

    /// Verdict of the summary row.
    pub fn status(&self) -> Status {
        if self.errors() > 0 {
            Status::Error
        } else if self.failures() > 0 {
            Status::Fail
        } else {
            Status::Pass
        }
    }

    pub fn summary_row(&self) -> Row {
        Row {
            experiment: self.label.clone(),
            case_id: "summary".into(),
            quantity: "failures".into(),
            value: (self.failures() + self.errors()) as f64,
            bound: 0.0,
            status: self.status(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub name: Option<String>,
    pub seed: u64,
    pub experiments: Vec<ExperimentOutcome>,
}

impl Report {
    /// 0 when everything passes, 3 on numeric failures, 1 on assertion failures.
    pub fn exit_code(&self) -> i32 {
        if self.experiments.iter().any(|e| e.errors() > 0) {
            3
        } else if self.experiments.iter().any(|e| e.failures() > 0) {
            1
        } else {
            0
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RunOptions {
    /// Overrides the scenario seed.
    pub seed: Option<u64>,
    /// Overrides `tolerances.assertion`.
    pub tol: Option<f64>,
}

struct Context<'a> {
    resolved: &'a Resolved,
    tol: Tolerances,
    label: String,
    seed: u64,
}

/// One case of an experiment: rows on success, the library error otherwise.
type CaseResult = bochner::Result<Vec<Row>>;

impl Context<'_> {
    fn row(&self, case_id: &str, quantity: impl Into<String>, value: f64, bound: f64, status: Status) -> Row {
        Row {
            experiment: self.label.clone(),
            case_id: case_id.to_string(),
            quantity: quantity.into(),
            value,
            bound,
            status,
        }
    }

    fn collect(&self, cases: Vec<(String, CaseResult)>, notes: &mut Vec<String>) -> Vec<Row> {
        let mut rows = Vec::new();
        for (case_id, result) in cases {
            match result {
                Ok(r) => rows.extend(r),
                Err(e) => {
                    notes.push(format!("{case_id}: {e}"));
                    rows.push(self.row(&case_id, "error", f64::NAN, f64::NAN, Status::Error));
                }
            }
        }
        rows
    }

    /// Independent seeds for the trials of this experiment.
    fn trial_seeds(&self, count: usize) -> Vec<u64> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        (0..count).map(|_| rng.random()).collect()
    }
}

/// Runs every experiment of the scenario.
pub fn run(config: &ScenarioConfig, options: RunOptions) -> Result<Report, ConfigError> {
    let seed = options.seed.unwrap_or(config.seed);
    let mut tol = config.tolerances.clone();
    if let Some(t) = options.tol {
        tol.assertion = t;
    }
    if !(tol.assertion > 0.0 && tol.quadrature > 0.0 && tol.moment_slack >= 0.0) {
        return Err(ConfigError {
            path: "tolerances".into(),
            message: "tolerances must be positive".into(),
            line: None,
            column: None,
        });
    }
    let resolved = resolve(config, seed)?;
    for (i, e) in config.experiments.iter().enumerate() {
        validate(e, &resolved, &format!("experiments[{i}]"))?;
    }
    let experiments = config
        .experiments
        .par_iter()
        .enumerate()
        .map(|(i, spec)| {
            let ctx = Context {
                resolved: &resolved,
                tol: tol.clone(),
                label: spec.label(),
                seed: seed ^ (i as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15),
            };
            execute(spec, &ctx)
        })
        .collect();
    Ok(Report { name: config.name.clone(), seed, experiments })
}

fn validate(spec: &ExperimentSpec, r: &Resolved, path: &str) -> Result<(), ConfigError> {
    let functions = |ids: &[String]| -> Result<(), ConfigError> {
        if ids.is_empty() {
            return Err(err(format!("{path}.functions"), "at least one function is required"));
        }
        for (k, id) in ids.iter().enumerate() {
            r.function(id, &format!("{path}.functions[{k}]"))?;
        }
        Ok(())
    };
    let tuples = |ids: &[String]| -> Result<(), ConfigError> {
        for (k, id) in ids.iter().enumerate() {
            r.tuple(id, &format!("{path}.operators[{k}]"))?;
        }
        Ok(())
    };
    match spec {
        ExperimentSpec::OracleEquivalence { functions: f, operators, max_d, .. }
        | ExperimentSpec::Factorization { functions: f, operators, max_d, .. } => {
            functions(f)?;
            tuples(operators)?;
            if *max_d == 0 {
                return Err(err(format!("{path}.max_d"), "must be ≥ 1"));
            }
        }
        ExperimentSpec::Subordination { functions: f, operators, times, limit_times, .. } => {
            functions(f)?;
            tuples(operators)?;
            if let Some(t) = times.iter().find(|t| !(**t >= 0.0 && t.is_finite())) {
                return Err(err(format!("{path}.times"), format!("time {t} must be finite and ≥ 0")));
            }
            if limit_times.windows(2).any(|w| w[1].partial_cmp(&w[0]) != Some(std::cmp::Ordering::Less))
                || limit_times.iter().any(|t| t.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater))
            {
                return Err(err(format!("{path}.limit_times"), "must be positive and strictly decreasing"));
            }
        }
        ExperimentSpec::SpectralMapping { functions: f, operators, parts, max_d, .. } => {
            functions(f)?;
            tuples(operators)?;
            for (k, p) in parts.iter().enumerate() {
                MappingPart::from_index(*p).map_err(|e| err(format!("{path}.parts[{k}]"), e.to_string()))?;
            }
            if *max_d < 2 {
                return Err(err(format!("{path}.max_d"), "must be ≥ 2"));
            }
        }
        ExperimentSpec::Holomorphy { function, sources, bounds, .. } => {
            let psi = r.function(function, &format!("{path}.function"))?;
            let mut n = 0;
            for (k, id) in sources.iter().enumerate() {
                n += match r.operators.get(id) {
                    Some(Operator::Ray(_)) => 1,
                    Some(Operator::Tuple(t)) => t.n(),
                    None => return Err(err(format!("{path}.sources[{k}]"), format!("unknown operator id `{id}`"))),
                };
            }
            if n != psi.dimension {
                return Err(err(format!("{path}.sources"), format!("{n} generators for a function of dimension {}", psi.dimension)));
            }
            if let Some(b) = bounds {
                if b.len() != n {
                    return Err(err(format!("{path}.bounds"), format!("expected {n} bounds, found {}", b.len())));
                }
            }
        }
        ExperimentSpec::MomentSweep { functions: f, max_d, .. } => {
            functions(f)?;
            if *max_d == 0 {
                return Err(err(format!("{path}.max_d"), "must be ≥ 1"));
            }
        }
        ExperimentSpec::Boundedness { function, cutoffs, .. } => {
            r.function(function, &format!("{path}.function"))?;
            if cutoffs.is_empty() || cutoffs.windows(2).any(|w| w[1] <= w[0]) || cutoffs[0] == 0 {
                return Err(err(format!("{path}.K_list"), "cutoffs must be positive and increasing"));
            }
        }
        ExperimentSpec::Convergence { family, function, ks, operator, .. } => {
            let a = r.tuple(operator, &format!("{path}.operator"))?;
            match (family, function) {
                (Family::PoissonRescaled, _) => {
                    if a.n() != 1 {
                        return Err(err(format!("{path}.operator"), "poisson_rescaled needs a single generator"));
                    }
                }
                (_, None) => return Err(err(format!("{path}.function"), "missing function for this family")),
                (_, Some(id)) => {
                    let psi = r.function(id, &format!("{path}.function"))?;
                    if psi.dimension != a.n() {
                        return Err(err(format!("{path}.operator"), "dimension differs from the function"));
                    }
                }
            }
            if ks.len() < 2 || ks.windows(2).any(|w| w[1] <= w[0]) || ks[0] <= 0.0 {
                return Err(err(format!("{path}.ks"), "need at least two positive increasing indices"));
            }
        }
    }
    Ok(())
}

fn err(path: String, message: impl Into<String>) -> ConfigError {
    ConfigError { path, message: message.into(), line: None, column: None }
}

fn execute(spec: &ExperimentSpec, ctx: &Context) -> ExperimentOutcome {
    let mut notes = Vec::new();
    let rows = match spec {
        ExperimentSpec::OracleEquivalence { functions, operators, random_trials, max_d, grid_points, .. } => {
            oracle_equivalence(ctx, functions, operators, *random_trials, *max_d, *grid_points, &mut notes)
        }
        ExperimentSpec::Subordination { functions, operators, times, limit_times, .. } => {
            subordination(ctx, functions, operators, times, limit_times, &mut notes)
        }
        ExperimentSpec::SpectralMapping { functions, operators, parts, random_trials, jordan_trials, max_d, .. } => {
            spectral_mapping(ctx, functions, operators, parts, *random_trials, *jordan_trials, *max_d, &mut notes)
        }
        ExperimentSpec::Factorization { functions, operators, random_trials, max_d, .. } => {
            factorization(ctx, functions, operators, *random_trials, *max_d, &mut notes)
        }
        ExperimentSpec::Holomorphy { function, sources, bounds, .. } => {
            holomorphy(ctx, function, sources, bounds.as_deref(), &mut notes)
        }
        ExperimentSpec::MomentSweep { functions, trials, max_d, inequality, .. } => {
            moment_sweep(ctx, functions, *trials, *max_d, *inequality, &mut notes)
        }
        ExperimentSpec::Boundedness { function, cutoffs, .. } => boundedness(ctx, function, cutoffs, &mut notes),
        ExperimentSpec::Convergence { family, function, ks, operator, .. } => {
            convergence(ctx, *family, function.as_deref(), ks, operator, &mut notes)
        }
    };
    ExperimentOutcome { label: ctx.label.clone(), kind: spec.kind(), rows, notes }
}

fn function<'a>(ctx: &'a Context, id: &str) -> &'a BernsteinFunction {
    &ctx.resolved.functions[id]
}

fn tuple<'a>(ctx: &'a Context, id: &str) -> &'a OperatorTuple {
    match &ctx.resolved.operators[id] {
        Operator::Tuple(t) => t,
        Operator::Ray(_) => unreachable!("validated as a tuple"),
    }
}

/// A random spectral tuple for a trial, with the generator's own stream.
fn random_case(rng: &mut ChaCha8Rng, n: usize, max_d: usize, min_d: usize) -> bochner::Result<OperatorTuple> {
    let d = rng.random_range(min_d..=max_d.max(min_d));
    make_commuting_random(n, d, rng.random(), SpectralBox::default())
}

fn random_unit(rng: &mut ChaCha8Rng, d: usize) -> CVector {
    loop {
        let x = CVector::from_fn(d, |_, _| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
        if x.norm() > 1e-3 {
            return x.normalize();
        }
    }
}

/// Closed left half-plane points `r·e^{iφ}` on a golden-angle sequence.
fn half_plane_points(count: usize, n: usize) -> Vec<Vec<Complex64>> {
    let golden = 0.5 * (5f64.sqrt() - 1.0);
    (0..count)
        .map(|k| {
            (0..n)
                .map(|j| {
                    let a = ((k * n + j) as f64 * golden).fract();
                    let b = ((k * n + j) as f64 * golden * golden + 0.3).fract();
                    let r = 10f64.powf(-2.0 + 4.0 * a);
                    let phi = PI / 2.0 + PI * b;
                    let mut z = Complex64::from_polar(r, phi);
                    z.re = z.re.min(0.0);
                    z
                })
                .collect()
        })
        .collect()
}

fn relative(a: &bochner::linalg::CMatrix, b: &bochner::linalg::CMatrix) -> f64 {
    frobenius(&(a - b)) / frobenius(b).max(f64::MIN_POSITIVE)
}

fn oracle_equivalence(
    ctx: &Context,
    functions: &[String],
    operators: &[String],
    trials: usize,
    max_d: usize,
    grid_points: usize,
    notes: &mut Vec<String>,
) -> Vec<Row> {
    let tol = ctx.tol.assertion;
    let mut cases: Vec<(String, Box<dyn Fn() -> CaseResult + Sync + '_>)> = Vec::new();
    if grid_points > 0 {
        for id in functions {
            let case_id = format!("f={id};grid");
            let c2 = case_id.clone();
            cases.push((case_id, Box::new(move || {
                let psi = function(ctx, id);
                let mut worst = 0.0f64;
                for s in half_plane_points(grid_points, psi.dimension) {
                    let exact = psi.eval(&s)?;
                    let levy = psi.eval_via_levy(&s)?;
                    worst = worst.max((exact - levy).norm() / (1.0 + exact.norm()));
                }
                Ok(vec![ctx.row(&c2, "eval_vs_levy", worst, tol, at_most(worst, tol))])
            })));
        }
    }
    let compare = move |case_id: String, psi: &BernsteinFunction, a: &OperatorTuple| -> CaseResult {
        if a.spectral().is_none() {
            return Ok(vec![ctx.row(&case_id, "quadrature_vs_spectral", f64::NAN, tol, Status::Inapplicable)]);
        }
        let quad = apply_psi_with(psi, a, ctx.tol.quadrature)?.value;
        let spectral = apply_psi_spectral(psi, a)?;
        let r = relative(&quad, &spectral);
        Ok(vec![ctx.row(&case_id, "quadrature_vs_spectral", r, tol, at_most(r, tol))])
    };
    for op in operators {
        for id in functions {
            if function(ctx, id).dimension != tuple(ctx, op).n() {
                continue;
            }
            let case_id = format!("f={id};A={op}");
            cases.push((case_id.clone(), Box::new(move || compare(case_id.clone(), function(ctx, id), tuple(ctx, op)))));
        }
    }
    for (t, seed) in ctx.trial_seeds(trials).into_iter().enumerate() {
        let id = &functions[t % functions.len()];
        let case_id = format!("trial-{t};f={id}");
        cases.push((case_id.clone(), Box::new(move || {
            let psi = function(ctx, id);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = random_case(&mut rng, psi.dimension, max_d, 1)?;
            compare(case_id.clone(), psi, &a)
        })));
    }
    run_cases(ctx, cases, notes)
}

fn run_cases(
    ctx: &Context,
    cases: Vec<(String, Box<dyn Fn() -> CaseResult + Sync + '_>)>,
    notes: &mut Vec<String>,
) -> Vec<Row> {
    let results: Vec<(String, CaseResult)> = cases.par_iter().map(|(id, f)| (id.clone(), f())).collect();
    ctx.collect(results, notes)
}

/// Arguments of the Laplace-identity check.
fn laplace_points(n: usize) -> Vec<Vec<Complex64>> {
    let base = [
        Complex64::new(-0.5, 0.0),
        Complex64::new(-2.0, 1.0),
        Complex64::new(0.0, 3.0),
        Complex64::new(-1.0, -2.0),
        Complex64::new(-0.1, 0.5),
        Complex64::new(-4.0, 0.0),
    ];
    (0..base.len()).map(|k| (0..n).map(|j| base[(k + j) % base.len()]).collect()).collect()
}

fn subordination(
    ctx: &Context,
    functions: &[String],
    operators: &[String],
    times: &[f64],
    limit_times: &[f64],
    notes: &mut Vec<String>,
) -> Vec<Row> {
    let tol = ctx.tol.assertion;
    let mut cases: Vec<(String, Box<dyn Fn() -> CaseResult + Sync + '_>)> = Vec::new();
    for id in functions {
        for op in operators {
            let psi = function(ctx, id);
            let a = tuple(ctx, op);
            if psi.dimension != a.n() {
                continue;
            }
            let case_id = format!("f={id};A={op}");
            let c2 = case_id.clone();
            cases.push((case_id, Box::new(move || {
                let family = match SubordinatorFamily::for_function(psi) {
                    Ok(f) => f,
                    Err(bochner::Error::NoSubordinator(_)) => {
                        return Ok(vec![ctx.row(&c2, "subordinator", f64::NAN, tol, Status::Inapplicable)]);
                    }
                    Err(e) => return Err(e),
                };
                let mut rows = Vec::new();
                let generator = apply_psi_with(psi, a, ctx.tol.quadrature)?.value;
                for &t in times {
                    let g = family.apply(a, t)?;
                    let e = expm(&(&generator * Complex64::new(t, 0.0)));
                    let r = relative(&g, &e);
                    rows.push(ctx.row(&c2, format!("g_t_vs_exp[t={t}]"), r, tol, at_most(r, tol)));
                }
                let mut worst = 0.0f64;
                for s in laplace_points(psi.dimension) {
                    let psi_s = psi.eval(&s)?;
                    for &t in times {
                        let want = (psi_s * t).exp();
                        worst = worst.max((family.laplace(&s, t)? - want).norm());
                    }
                }
                rows.push(ctx.row(&c2, "laplace", worst, tol, at_most(worst, tol)));
                if !limit_times.is_empty() {
                    let x = CVector::from_element(a.dim(), Complex64::new(1.0, 0.0)).normalize();
                    let gx = &generator * &x;
                    let mut residuals = Vec::with_capacity(limit_times.len());
                    for &t in limit_times {
                        let g = family.apply(a, t)?;
                        residuals.push(((g * &x - &x) / Complex64::new(t, 0.0) - &gx).norm());
                    }
                    let last = *residuals.last().unwrap();
                    let monotone = residuals.windows(2).all(|w| w[1] < w[0]);
                    let status = if monotone && last < GENERATOR_LIMIT_TARGET { Status::Pass } else { Status::Fail };
                    rows.push(ctx.row(&c2, "generator_limit", last, GENERATOR_LIMIT_TARGET, status));
                }
                Ok(rows)
            })));
        }
    }
    run_cases(ctx, cases, notes)
}

#[allow(clippy::too_many_arguments)]
fn spectral_mapping(
    ctx: &Context,
    functions: &[String],
    operators: &[String],
    parts: &[u8],
    random_trials: usize,
    jordan_trials: usize,
    max_d: usize,
    notes: &mut Vec<String>,
) -> Vec<Row> {
    let parts: Vec<MappingPart> = parts.iter().map(|&p| MappingPart::from_index(p).expect("validated")).collect();
    let parts = &parts;
    let check = move |case_id: String, psi: &BernsteinFunction, a: &OperatorTuple| -> CaseResult {
        let psi_a = apply_psi_with(psi, a, ctx.tol.quadrature)?.value;
        let norm = op_norm(&psi_a);
        let mut rows = Vec::new();
        for &part in parts {
            let report = mapping_check_given(psi, a, &psi_a, part)?;
            let mut value = report
                .rows
                .iter()
                .map(|r| if part == MappingPart::Paired { r.distance } else { r.residual } / (1.0 + r.image.norm()))
                .fold(0.0, f64::max);
            if let Some(s) = report.set_distance {
                value = value.max(s / (1.0 + norm));
            }
            let status = if part == MappingPart::Paired && report.rows.is_empty() {
                Status::Inapplicable
            } else {
                report.verdict.into()
            };
            rows.push(ctx.row(&case_id, format!("part{}", part.index()), value, MATCH_TOL, status));
        }
        Ok(rows)
    };
    let mut cases: Vec<(String, Box<dyn Fn() -> CaseResult + Sync + '_>)> = Vec::new();
    for op in operators {
        for id in functions {
            if function(ctx, id).dimension != tuple(ctx, op).n() {
                continue;
            }
            let case_id = format!("f={id};A={op}");
            cases.push((case_id.clone(), Box::new(move || check(case_id.clone(), function(ctx, id), tuple(ctx, op)))));
        }
    }
    let seeds = ctx.trial_seeds(random_trials + jordan_trials);
    for (t, &seed) in seeds.iter().enumerate() {
        let id = &functions[t % functions.len()];
        let jordan = t >= random_trials;
        let case_id = if jordan { format!("jordan-{};f={id}", t - random_trials) } else { format!("trial-{t};f={id}") };
        cases.push((case_id.clone(), Box::new(move || {
            let psi = function(ctx, id);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = if jordan {
                let d = rng.random_range(2..=max_d);
                jordan_polynomial_tuple(psi.dimension, d, rng.random())?.0
            } else {
                random_case(&mut rng, psi.dimension, max_d, 1)?
            };
            check(case_id.clone(), psi, &a)
        })));
    }
    run_cases(ctx, cases, notes)
}

/// `λ` with `Re λ_j ∈ [−2.2, −0.2]` and `Im λ_j ∈ [−2, 2]`.
fn random_lambda(rng: &mut ChaCha8Rng, n: usize) -> Vec<Complex64> {
    (0..n).map(|_| Complex64::new(-0.2 - 2.0 * rng.random::<f64>(), 4.0 * rng.random::<f64>() - 2.0)).collect()
}

fn factorization(
    ctx: &Context,
    functions: &[String],
    operators: &[String],
    trials: usize,
    max_d: usize,
    notes: &mut Vec<String>,
) -> Vec<Row> {
    let tol = ctx.tol.assertion;
    let check = move |case_id: String, psi: &BernsteinFunction, a: &OperatorTuple, lambda: Vec<Complex64>| -> CaseResult {
        let report = factorization_check(psi, a, &lambda)?;
        let mut rows = vec![ctx.row(&case_id, "relative_residual", report.relative, tol, at_most(report.relative, tol))];
        let v = v_identity_residual(lambda[0], a, 0, 1.0)?;
        rows.push(ctx.row(&case_id, "v_identity", v, V_IDENTITY_TOL, at_most(v, V_IDENTITY_TOL)));
        for (j, (w, b)) in report.w_norms.iter().zip(&report.w_bounds).enumerate() {
            let status = at_most(*w, b * (1.0 + 1e-9) + 1e-12);
            rows.push(ctx.row(&case_id, format!("w_norm[{j}]"), *w, *b, status));
        }
        Ok(rows)
    };
    let mut cases: Vec<(String, Box<dyn Fn() -> CaseResult + Sync + '_>)> = Vec::new();
    let seeds = ctx.trial_seeds(operators.len() * functions.len() + trials);
    let mut next = seeds.iter();
    for op in operators {
        for id in functions {
            let seed = *next.next().unwrap();
            if function(ctx, id).dimension != tuple(ctx, op).n() {
                continue;
            }
            let case_id = format!("f={id};A={op}");
            cases.push((case_id.clone(), Box::new(move || {
                let a = tuple(ctx, op);
                let lambda = random_lambda(&mut ChaCha8Rng::seed_from_u64(seed), a.n());
                check(case_id.clone(), function(ctx, id), a, lambda)
            })));
        }
    }
    for (t, &seed) in next.enumerate() {
        let id = &functions[t % functions.len()];
        let case_id = format!("trial-{t};f={id}");
        cases.push((case_id.clone(), Box::new(move || {
            let psi = function(ctx, id);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = random_case(&mut rng, psi.dimension, max_d, 1)?;
            let lambda = random_lambda(&mut rng, psi.dimension);
            check(case_id.clone(), psi, &a, lambda)
        })));
    }
    run_cases(ctx, cases, notes)
}

fn holomorphy(ctx: &Context, id: &str, sources: &[String], bounds: Option<&[f64]>, notes: &mut Vec<String>) -> Vec<Row> {
    let psi = function(ctx, id);
    let mut defects = Vec::new();
    let mut default_bounds = Vec::new();
    let mut tuples = Vec::new();
    for op in sources {
        match &ctx.resolved.operators[op] {
            Operator::Ray(theta) => {
                defects.push(DefectSource::Ray(*theta));
                default_bounds.push(1.0);
            }
            Operator::Tuple(t) => {
                defects.extend(std::iter::repeat_n(DefectSource::Matrix, t.n()));
                default_bounds.extend_from_slice(t.bounds());
                tuples.push(t);
            }
        }
    }
    let bounds = bounds.map(|b| b.to_vec()).unwrap_or(default_bounds);
    let tuple = if tuples.len() == 1 && defects.iter().all(|d| *d == DefectSource::Matrix) { Some(tuples[0]) } else { None };
    let case_id = format!("f={id};sources={}", sources.join("+"));
    let result = holomorphy_with_subordination(&defects, &bounds, psi, tuple).map(|report| {
        let mut rows = Vec::new();
        for (j, b) in report.defects.iter().enumerate() {
            let status = if (0.0..=2.0).contains(b) { Status::Pass } else { Status::Fail };
            rows.push(ctx.row(&case_id, format!("defect[{j}]"), *b, 2.0, status));
        }
        let status = if report.satisfied { Status::Pass } else { Status::Inapplicable };
        rows.push(ctx.row(&case_id, "weighted_defect", report.weighted_sum, 2.0, status));
        let bound = report.weighted_sum + HOLOMORPHY_MARGIN;
        match report.measured {
            Some(m) => rows.push(ctx.row(&case_id, "limsup_i_minus_g_t", m, bound, at_most(m, bound))),
            None => rows.push(ctx.row(&case_id, "limsup_i_minus_g_t", f64::NAN, bound, Status::Inapplicable)),
        }
        if let Some(n) = report.note {
            notes.push(format!("{case_id}: {n}"));
        }
        rows
    });
    ctx.collect(vec![(case_id.clone(), result)], notes)
}

fn moment_sweep(
    ctx: &Context,
    functions: &[String],
    trials: usize,
    max_d: usize,
    inequality: Inequality,
    notes: &mut Vec<String>,
) -> Vec<Row> {
    let slack_tol = ctx.tol.moment_slack;
    let seeds = ctx.trial_seeds(trials);
    let results: Vec<(String, CaseResult)> = seeds
        .par_iter()
        .enumerate()
        .map(|(t, &seed)| {
            let id = &functions[t % functions.len()];
            let case_id = format!("trial-{t};f={id}");
            let result = (|| {
                let psi = function(ctx, id);
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let a = random_case(&mut rng, psi.dimension, max_d, 1)?;
                let x = random_unit(&mut rng, a.dim());
                let row = match inequality {
                    Inequality::Moment => {
                        let psi_a = apply_psi_spectral(psi, &a)?;
                        let r = moment_check_given(psi, &a, &psi_a, &x)?;
                        let bound = -slack_tol * r.scale;
                        let status = if r.slack >= bound { Status::Pass } else { Status::Fail };
                        ctx.row(&case_id, "slack", r.slack, bound, status)
                    }
                    Inequality::Step => {
                        let u: Vec<f64> = (0..a.n()).map(|_| 5.0 * rng.random::<f64>()).collect();
                        let r = step_bound_check(&a, &x, &u)?;
                        let bound = -slack_tol * (1.0 + r.rhs);
                        let status = if r.residual >= bound { Status::Pass } else { Status::Fail };
                        ctx.row(&case_id, "step_residual", r.residual, bound, status)
                    }
                };
                Ok(vec![row])
            })();
            (case_id, result)
        })
        .collect();
    let rows = ctx.collect(results, notes);
    if let Some(w) = rows.iter().filter(|r| r.status != Status::Error).min_by(|a, b| a.value.total_cmp(&b.value)) {
        notes.push(format!("worst slack {:.6e} at {}", w.value, w.case_id));
    }
    rows
}

fn boundedness(ctx: &Context, id: &str, cutoffs: &[usize], notes: &mut Vec<String>) -> Vec<Row> {
    let psi = function(ctx, id);
    let case_id = format!("f={id}");
    let result = boundedness_experiment(psi, cutoffs).map(|norms| {
        let bound = boundedness_bound(psi, 1.0);
        let bounded = bound.is_finite();
        let mut rows: Vec<Row> = cutoffs
            .iter()
            .zip(&norms)
            .map(|(k, &v)| {
                let status = if bounded { at_most(v, bound * (1.0 + 1e-9)) } else { Status::Evidence };
                ctx.row(&case_id, format!("norm[K={k}]"), v, bound, status)
            })
            .collect();
        let first = norms[0];
        let last = *norms.last().unwrap();
        if bounded {
            let max = norms.iter().cloned().fold(0.0, f64::max);
            let min = norms.iter().cloned().fold(f64::INFINITY, f64::min);
            let ratio = if min > 0.0 { max / min } else { f64::INFINITY };
            rows.push(ctx.row(&case_id, "max_over_min", ratio, DICHOTOMY_RATIO, at_most(ratio, DICHOTOMY_RATIO)));
        } else {
            let ratio = last / first;
            let monotone = norms.windows(2).all(|w| w[1] >= w[0]);
            // the square-root law reaches exactly 10 on K ∈ {1, 100}
            let grows = ratio >= DICHOTOMY_RATIO * (1.0 - 1e-6);
            let status = if monotone && grows { Status::Pass } else { Status::Fail };
            rows.push(ctx.row(&case_id, "growth_ratio", ratio, DICHOTOMY_RATIO, status));
        }
        rows
    });
    ctx.collect(vec![(case_id.clone(), result)], notes)
}

fn convergence(
    ctx: &Context,
    family: Family,
    id: Option<&str>,
    ks: &[f64],
    op: &str,
    notes: &mut Vec<String>,
) -> Vec<Row> {
    let a = tuple(ctx, op);
    let case_id = match id {
        Some(id) => format!("f={id};A={op}"),
        None => format!("A={op}"),
    };
    let result = (|| {
        let sequence = ks
            .iter()
            .map(|&k| {
                let psi = match family {
                    Family::PoissonRescaled => BernsteinFunction::poisson(1.0, 1.0 / k)?,
                    Family::Scaled => cone_combine(&[(1.0 / k, function(ctx, id.unwrap()).clone())])?,
                    Family::Dilated => rescale(function(ctx, id.unwrap()), 1.0 / k)?,
                };
                Ok((k, psi))
            })
            .collect::<bochner::Result<Vec<_>>>()?;
        let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
        let x = random_unit(&mut rng, a.dim());
        let report = convergence_experiment(&sequence, a, &x)?;
        let gate = |s: Status| if report.applicable { s } else { Status::Inapplicable };
        let mut rows: Vec<Row> = report
            .indices
            .iter()
            .zip(&report.residuals)
            .map(|(k, r)| ctx.row(&case_id, format!("residual[k={k}]"), *r, f64::NAN, gate(Status::Evidence)))
            .collect();
        let last = *report.residuals.last().unwrap();
        rows.push(ctx.row(&case_id, "final_residual", last, CONVERGENCE_TARGET, gate(at_most(last, CONVERGENCE_TARGET))));
        let order_status = match family {
            Family::PoissonRescaled | Family::Scaled => {
                if (report.order - 1.0).abs() <= 0.1 {
                    Status::Pass
                } else {
                    Status::Fail
                }
            }
            Family::Dilated => Status::Evidence,
        };
        let expected = if family == Family::Dilated { f64::NAN } else { 1.0 };
        rows.push(ctx.row(&case_id, "order", report.order, expected, gate(order_status)));
        Ok(rows)
    })();
    ctx.collect(vec![(case_id.clone(), result)], notes)
}
