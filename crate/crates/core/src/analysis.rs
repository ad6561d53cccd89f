//! Quantitative checks on the calculus: the holomorphy criterion for
//! subordinated semigroups, the moment inequality
//!
//! ```text
//!     ‖ψ(A)x‖ ≤ −n·K_M·M^{n−1}·ψ(−‖A₁x‖/(n‖x‖), …, −‖Aₙx‖/(n‖x‖))·‖x‖,
//! ```
//!
//! and the boundedness and strong convergence experiments.

use num_complex::Complex64;

use crate::bernstein::{BernsteinFunction, SampleGrid};
use crate::calculus::{apply_psi, SubordinatorFamily};
use crate::error::{Error, Result};
use crate::linalg::{identity, op_norm, vector_norm, CMatrix, CVector};
use crate::semigroup::{fourier_translation_model, holomorphy_defect_ray, OperatorTuple, DEFAULT_RAY_RESOLUTION};

/// Relative slack allowed in the moment inequality before a trial counts as
/// a violation.
pub const MOMENT_SLACK: f64 = 1e-9;

/// `K_M = (M + 1)/(1 − e^{−(M+1)/M})`.
pub fn k_constant(m: f64) -> Result<f64> {
    if !(m >= 1.0 && m.is_finite()) {
        return Err(Error::InvalidParameter(format!("semigroup bound M = {m} must be ≥ 1")));
    }
    let q = (m + 1.0) / m;
    Ok((m + 1.0) / -(-q).exp_m1())
}

#[derive(Debug, Clone, PartialEq)]
pub struct MomentReport {
    pub m: f64,
    pub k_m: f64,
    pub n: usize,
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs − lhs`
    pub slack: f64,
    /// `lhs / rhs`, zero when both sides vanish.
    pub tightness: f64,
    /// Indices with `A_jx = 0`, where ψ is taken on the boundary face.
    pub zero_faces: Vec<usize>,
    pub scale: f64,
}

impl MomentReport {
    pub fn holds(&self) -> bool {
        self.slack >= -MOMENT_SLACK * self.scale
    }
}

fn check_vector(a: &OperatorTuple, x: &CVector) -> Result<f64> {
    if x.len() != a.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), found: x.len() });
    }
    let norm = vector_norm(x);
    if !(norm > 0.0) {
        return Err(Error::Domain("vector must be nonzero".into()));
    }
    Ok(norm)
}

/// Checks the moment inequality for `x` with `M` the common bound of the tuple.
pub fn moment_check(psi: &BernsteinFunction, a: &OperatorTuple, x: &CVector) -> Result<MomentReport> {
    let psi_a = apply_psi(psi, a)?;
    moment_check_given(psi, a, &psi_a, x)
}

/// As [`moment_check`] with `ψ(A)` already computed.
pub fn moment_check_given(
    psi: &BernsteinFunction,
    a: &OperatorTuple,
    psi_a: &CMatrix,
    x: &CVector,
) -> Result<MomentReport> {
    if psi.dimension != a.n() {
        return Err(Error::DimensionMismatch { expected: a.n(), found: psi.dimension });
    }
    let norm_x = check_vector(a, x)?;
    let n = a.n();
    let m = a.common_bound();
    let k_m = k_constant(m)?;
    let mut zero_faces = Vec::new();
    let point: Vec<f64> = a
        .generators()
        .iter()
        .enumerate()
        .map(|(j, g)| {
            let r = vector_norm(&(g * x));
            if r == 0.0 {
                zero_faces.push(j);
            }
            -r / (n as f64 * norm_x)
        })
        .collect();
    let lhs = vector_norm(&(psi_a * x));
    let rhs = -(n as f64) * k_m * m.powi(n as i32 - 1) * psi.eval_real(&point)? * norm_x;
    let tightness = if rhs > 0.0 { lhs / rhs } else { 0.0 };
    Ok(MomentReport { m, k_m, n, lhs, rhs, slack: rhs - lhs, tightness, zero_faces, scale: 1.0 + lhs.max(rhs) })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepBound {
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs − lhs`
    pub residual: f64,
}

/// `‖(T(u) − I)x‖ ≤ n·K_M·M^{n−1}·(1 − e^{−Σ_j ‖A_jx‖u_j / n})` for unit `x`.
pub fn step_bound_check(a: &OperatorTuple, x: &CVector, u: &[f64]) -> Result<StepBound> {
    let norm_x = check_vector(a, x)?;
    if (norm_x - 1.0).abs() > 1e-12 {
        return Err(Error::Domain(format!("vector norm {norm_x} is not 1")));
    }
    if u.len() != a.n() {
        return Err(Error::DimensionMismatch { expected: a.n(), found: u.len() });
    }
    let n = a.n() as f64;
    let m = a.common_bound();
    let k_m = k_constant(m)?;
    let t = a.semigroup_apply(u)?;
    let lhs = vector_norm(&(t * x - x));
    let exponent: f64 = a.generators().iter().zip(u).map(|(g, &uj)| vector_norm(&(g * x)) * uj).sum();
    let rhs = n * k_m * m.powi(a.n() as i32 - 1) * -(-exponent / n).exp_m1();
    Ok(StepBound { lhs, rhs, residual: rhs - lhs })
}

/// Where the defect `b_j = limsup_{t→0+} ‖I − T_j(t)‖` of a generator comes from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DefectSource {
    /// A bounded generator; its semigroup is norm continuous.
    Matrix,
    /// Diagonal model with spectrum on the ray of angle `θ`.
    Ray(f64),
}

impl DefectSource {
    pub fn defect(&self) -> Result<f64> {
        match *self {
            DefectSource::Matrix => Ok(0.0),
            DefectSource::Ray(theta) => holomorphy_defect_ray(theta, DEFAULT_RAY_RESOLUTION),
        }
    }
}

/// Dyadic grid `t = 2^{−k}`, `k = 0..=HOLOMORPHY_STEPS`.
pub const HOLOMORPHY_STEPS: usize = 40;
/// Number of trailing grid points whose maximum estimates the limsup.
pub const HOLOMORPHY_TAIL: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct HolomorphyReport {
    pub defects: Vec<f64>,
    pub weights: Vec<f64>,
    pub weighted_sum: f64,
    pub satisfied: bool,
    /// `(t, ‖I − g_t(A)‖)` on the dyadic grid, when measured.
    pub samples: Vec<(f64, f64)>,
    pub measured: Option<f64>,
    pub note: Option<String>,
}

/// Weighted defect `Σ_j C_j b_j` with `C_j = Π_{k<j} M_k`; the criterion
/// holds when it is below 2.
pub fn holomorphy_criterion(sources: &[DefectSource], bounds: &[f64]) -> Result<HolomorphyReport> {
    if sources.len() != bounds.len() {
        return Err(Error::DimensionMismatch { expected: sources.len(), found: bounds.len() });
    }
    if sources.is_empty() {
        return Err(Error::InvalidParameter("no generators".into()));
    }
    if let Some(m) = bounds.iter().find(|&&m| !(m >= 1.0 && m.is_finite())) {
        return Err(Error::InvalidParameter(format!("semigroup bound {m} must be ≥ 1")));
    }
    let defects = sources.iter().map(|s| s.defect()).collect::<Result<Vec<_>>>()?;
    let mut weights = Vec::with_capacity(bounds.len());
    let mut c = 1.0;
    for &m in bounds {
        weights.push(c);
        c *= m;
    }
    let weighted_sum: f64 = defects.iter().zip(&weights).map(|(b, c)| b * c).sum();
    Ok(HolomorphyReport {
        defects,
        weights,
        weighted_sum,
        satisfied: weighted_sum < 2.0,
        samples: Vec::new(),
        measured: None,
        note: None,
    })
}

/// [`holomorphy_criterion`] followed, when it holds, by a measurement of
/// `‖I − g_t(A)‖` on the dyadic grid.
///
/// Matrix sources need the tuple itself; ray sources are measured for
/// `n = 1` by scanning the image of the ray under `tψ`.
pub fn holomorphy_with_subordination(
    sources: &[DefectSource],
    bounds: &[f64],
    psi: &BernsteinFunction,
    tuple: Option<&OperatorTuple>,
) -> Result<HolomorphyReport> {
    let mut report = holomorphy_criterion(sources, bounds)?;
    if psi.dimension != sources.len() {
        return Err(Error::DimensionMismatch { expected: sources.len(), found: psi.dimension });
    }
    if !report.satisfied {
        report.note = Some("criterion fails; g_t not measured".into());
        return Ok(report);
    }
    let times: Vec<f64> = (0..=HOLOMORPHY_STEPS).map(|k| 0.5f64.powi(k as i32)).collect();
    let all_matrix = sources.iter().all(|s| *s == DefectSource::Matrix);
    let samples = if all_matrix {
        let Some(a) = tuple else {
            report.note = Some("no operator tuple supplied".into());
            return Ok(report);
        };
        let family = match SubordinatorFamily::for_function(psi) {
            Ok(f) => f,
            Err(Error::NoSubordinator(why)) => {
                report.note = Some(format!("no subordinator: {why}"));
                return Ok(report);
            }
            Err(e) => return Err(e),
        };
        let id = identity(a.dim());
        times
            .iter()
            .map(|&t| Ok((t, op_norm(&(&id - family.apply(a, t)?)))))
            .collect::<Result<Vec<_>>>()?
    } else if let [DefectSource::Ray(theta)] = sources {
        if psi.closed_form.is_none() {
            report.note = Some("ray scan needs a closed form".into());
            return Ok(report);
        }
        let mut out = Vec::with_capacity(times.len());
        for &t in &times {
            out.push((t, ray_image_defect(psi, *theta, t)?));
        }
        out
    } else {
        report.note = Some("mixed or multi-ray sources; g_t not measured".into());
        return Ok(report);
    };
    let tail = &samples[samples.len() - HOLOMORPHY_TAIL..];
    report.measured = Some(tail.iter().map(|s| s.1).fold(0.0, f64::max));
    report.samples = samples;
    Ok(report)
}

/// `sup_{ρ>0} |1 − e^{tψ(ρe^{iθ})}|` by a log-spaced scan with golden
/// refinement around the best point.
fn ray_image_defect(psi: &BernsteinFunction, theta: f64, t: f64) -> Result<f64> {
    let direction = Complex64::from_polar(1.0, theta);
    // the negative real ray must not pick up a positive real part from rounding
    let point = |log_rho: f64| {
        let mut z = direction * 10f64.powf(log_rho);
        z.re = z.re.min(0.0);
        z
    };
    let f = |log_rho: f64| -> Result<f64> { Ok((1.0 - (psi.eval(&[point(log_rho)])? * t).exp()).norm()) };
    const LOW: f64 = -8.0;
    const HIGH: f64 = 80.0;
    const PER_DECADE: f64 = 60.0;
    let steps = ((HIGH - LOW) * PER_DECADE) as usize;
    let h = 1.0 / PER_DECADE;
    let (mut best, mut at) = (0.0, LOW);
    for k in 0..=steps {
        let x = LOW + k as f64 * h;
        let v = f(x)?;
        if v > best {
            best = v;
            at = x;
        }
    }
    let (mut lo, mut hi) = (at - h, at + h);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..60 {
        let x1 = hi - g * (hi - lo);
        let x2 = lo + g * (hi - lo);
        if f(x1)? > f(x2)? {
            hi = x2;
        } else {
            lo = x1;
        }
    }
    Ok(best.max(f(0.5 * (lo + hi))?))
}

/// `‖ψ(A_K)‖` on the Fourier translation model for each cutoff `K`.
pub fn boundedness_experiment(psi: &BernsteinFunction, cutoffs: &[usize]) -> Result<Vec<f64>> {
    cutoffs
        .iter()
        .map(|&k| {
            let a = fourier_translation_model(k, psi.dimension)?;
            Ok(op_norm(&apply_psi(psi, &a)?))
        })
        .collect()
}

/// Bound `|c₀| + (Mⁿ + 1)·μ(ℝ₊ⁿ)` on `‖ψ(A)‖` for bounded ψ, infinite otherwise.
pub fn boundedness_bound(psi: &BernsteinFunction, m: f64) -> f64 {
    if !psi.is_bounded() {
        return f64::INFINITY;
    }
    psi.c0.abs() + (m.powi(psi.dimension as i32) + 1.0) * psi.measure.total_mass()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub indices: Vec<f64>,
    pub residuals: Vec<f64>,
    /// False when the grid spot-check of pointwise convergence fails.
    pub applicable: bool,
    /// `−d log r / d log k` over the second half of the sequence.
    pub order: f64,
}

/// Grid used to spot-check `ψ_k → 0` on the closed negative orthant.
fn spot_grid(n: usize) -> Vec<Vec<f64>> {
    let side = if n == 1 { 12 } else if n == 2 { 5 } else { 3 };
    let mut points = SampleGrid::cube(n, -10.0, -0.01, side).points();
    points.push(vec![0.0; n]);
    points
}

fn pointwise_decreasing(sequence: &[(f64, BernsteinFunction)]) -> Result<bool> {
    let n = sequence[0].1.dimension;
    for s in spot_grid(n) {
        let values = sequence.iter().map(|(_, psi)| Ok(psi.eval_real(&s)?.abs())).collect::<Result<Vec<f64>>>()?;
        let first = values[0];
        if values.windows(2).any(|w| w[1] > w[0] + 1e-12 * (1.0 + w[0])) {
            return Ok(false);
        }
        if first > 1e-12 && *values.last().unwrap() > 0.5 * first {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `‖ψ_k(A)x‖` along a sequence `(k, ψ_k)` with increasing `k`.
pub fn convergence_experiment(
    sequence: &[(f64, BernsteinFunction)],
    a: &OperatorTuple,
    x: &CVector,
) -> Result<ConvergenceReport> {
    if sequence.len() < 2 {
        return Err(Error::InvalidParameter("need at least two functions".into()));
    }
    if sequence.windows(2).any(|w| !(w[1].0 > w[0].0) || !(w[0].0 > 0.0)) {
        return Err(Error::InvalidParameter("indices must be positive and increasing".into()));
    }
    check_vector(a, x)?;
    let applicable = pointwise_decreasing(sequence)?;
    let residuals =
        sequence.iter().map(|(_, psi)| Ok(vector_norm(&(apply_psi(psi, a)? * x)))).collect::<Result<Vec<f64>>>()?;
    let indices: Vec<f64> = sequence.iter().map(|s| s.0).collect();
    let half = sequence.len() / 2;
    let order = log_slope(&indices[half..], &residuals[half..]);
    Ok(ConvergenceReport { indices, residuals, applicable, order })
}

/// Negated least-squares slope of `log r` against `log k`.
fn log_slope(k: &[f64], r: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = k.iter().zip(r).filter(|(_, &r)| r > 0.0).map(|(&k, &r)| (k.ln(), r.ln())).collect();
    if pts.len() < 2 {
        return f64::NAN;
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    -sxy / sxx
}
