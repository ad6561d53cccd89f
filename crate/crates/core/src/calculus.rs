//! `ψ(A)` for commuting tuples, the subordinated semigroups `g_t(A)`, and
//! the auxiliary operators `V_j^λ`, `W_j^λ` behind the factorization
//!
//! ```text
//!     ψ(λ)I − ψ(A) = Σ_j W_j^λ (λ_j I − A_j).
//! ```

use num_complex::Complex64;

use crate::bernstein::{dot, BernsteinFunction, LEVY_TOL};
use crate::error::{Error, Result};
use crate::linalg::{diagonal, expm, frobenius, identity, CMatrix, CVector};
use crate::quadrature::{integrate, QuadOptions, QuadValue};
use crate::ray::{ray_integral, MatrixKernel, RayDensity, ScalarKernel};
use crate::semigroup::OperatorTuple;

/// Absolute tolerance used for subordinated semigroups.
pub const SUBORDINATION_TOL: f64 = 1e-12;
/// Mass left in the tail of a truncated Poisson series.
pub const POISSON_TAIL: f64 = 1e-12;

/// A matrix together with the quadrature error estimate behind it.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluated {
    pub value: CMatrix,
    pub error: f64,
}

fn check_dimension(psi: &BernsteinFunction, a: &OperatorTuple) -> Result<()> {
    if psi.dimension != a.n() {
        return Err(Error::DimensionMismatch { expected: a.n(), found: psi.dimension });
    }
    Ok(())
}

fn diagonal_points(a: &OperatorTuple) -> Vec<Vec<Complex64>> {
    (0..a.dim()).map(|i| a.generators().iter().map(|g| g[(i, i)]).collect()).collect()
}

/// `ψ(A) = c₀I + Σ c₁ʲA_j + ∫ (T(u) − I) dμ(u)` by quadrature of the Lévy
/// integral.
pub fn apply_psi(psi: &BernsteinFunction, a: &OperatorTuple) -> Result<CMatrix> {
    Ok(apply_psi_with(psi, a, LEVY_TOL)?.value)
}

/// As [`apply_psi`] with an explicit absolute quadrature tolerance.
pub fn apply_psi_with(psi: &BernsteinFunction, a: &OperatorTuple, tol: f64) -> Result<Evaluated> {
    check_dimension(psi, a)?;
    if a.is_diagonal() {
        // the integral acts entry by entry
        let mut values = Vec::with_capacity(a.dim());
        let mut error = 0.0f64;
        for s in diagonal_points(a) {
            let (v, e) = psi.eval_via_levy_with_tol(&s, tol)?;
            values.push(v);
            error = error.max(e);
        }
        return Ok(Evaluated { value: diagonal(&values), error });
    }
    let d = a.dim();
    let id = identity(d);
    let mut value = &id * Complex64::new(psi.c0, 0.0) + a.combination(&psi.c1);
    let mut error = 0.0;
    for atom in &psi.measure.atoms {
        let t = a.semigroup_apply_dense(&atom.location)?;
        value += (t - &id) * Complex64::new(atom.mass, 0.0);
    }
    for part in &psi.measure.densities {
        if part.density.coef == 0.0 {
            continue;
        }
        let kernel = MatrixKernel::new(a.combination(&part.direction), a.ray_growth(&part.direction));
        let q = ray_integral(&kernel, &part.density.ray_density(), tol)?;
        value += q.value;
        error += q.error;
    }
    Ok(Evaluated { value, error })
}

/// `P·diag(ψ(λ⁽ⁱ⁾))·P⁻¹` from the stored joint eigen-decomposition.
pub fn apply_psi_spectral(psi: &BernsteinFunction, a: &OperatorTuple) -> Result<CMatrix> {
    check_dimension(psi, a)?;
    let sd = a.spectral().ok_or(Error::MissingSpectralData)?;
    let values = sd.joint_eigenvalues().iter().map(|lambda| psi.eval(lambda)).collect::<Result<Vec<_>>>()?;
    Ok(sd.reassemble(&values))
}

/// Outcome of re-running a quadrature at half the tolerance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelfConsistency {
    pub difference: f64,
    pub tolerance: f64,
    pub passed: bool,
}

/// Richardson-style self-consistency of [`apply_psi_with`]: the results at
/// `tol` and `tol/2` must differ by less than `10·tol`.
pub fn self_consistency(psi: &BernsteinFunction, a: &OperatorTuple, tol: f64) -> Result<SelfConsistency> {
    let coarse = apply_psi_with(psi, a, tol)?.value;
    let fine = apply_psi_with(psi, a, tol / 2.0)?.value;
    let difference = frobenius(&(coarse - fine));
    Ok(SelfConsistency { difference, tolerance: tol, passed: difference < 10.0 * tol })
}

/// One independent component of `ν_t`; the family is their convolution.
#[derive(Debug, Clone, PartialEq)]
pub enum SubordinatorFactor {
    /// Point mass at `t·c₁`.
    Drift(Vec<f64>),
    /// Compound Poisson: `e^{−λt} Σ_k (λt)^k/k! δ_{k·u}`.
    Poisson { location: Vec<f64>, rate: f64 },
    /// ½-stable law with `τ = scale·t`, pushed forward along the ray `w`.
    HalfStable { direction: Vec<f64>, scale: f64 },
    /// Gamma law with shape `coef·t` and rate `b`, pushed forward along `w`.
    Gamma { direction: Vec<f64>, coef: f64, rate: f64 },
}

/// Measures `ν_t` with `∫ e^{s·u} dν_t(u) = e^{tψ(s)}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SubordinatorFamily {
    pub catalog_id: Option<String>,
    /// `c₀`; the total mass of `ν_t` is `e^{t c₀}`.
    pub killing: f64,
    pub factors: Vec<SubordinatorFactor>,
    dimension: usize,
}

fn poisson_weights(mean: f64) -> Vec<f64> {
    let mut weights = Vec::new();
    let mut p = (-mean).exp();
    let mut cumulative = 0.0;
    let mut k = 0usize;
    loop {
        weights.push(p);
        cumulative += p;
        k += 1;
        if 1.0 - cumulative < POISSON_TAIL && k as f64 > mean {
            return weights;
        }
        p *= mean / k as f64;
        if k > 10_000 {
            return weights;
        }
    }
}

impl SubordinatorFamily {
    /// Builds `ν_t` from the Lévy triple. Known components: drift, atoms
    /// (compound Poisson), untempered ½-stable densities and logarithmic
    /// (gamma) densities, each on its own ray.
    pub fn for_function(psi: &BernsteinFunction) -> Result<Self> {
        let mut factors = Vec::new();
        if psi.c1.iter().any(|&c| c != 0.0) {
            factors.push(SubordinatorFactor::Drift(psi.c1.clone()));
        }
        for atom in &psi.measure.atoms {
            factors.push(SubordinatorFactor::Poisson { location: atom.location.clone(), rate: atom.mass });
        }
        for part in &psi.measure.densities {
            let d = part.density;
            if d.coef == 0.0 {
                continue;
            }
            if d.alpha == 0.5 && d.rate == 0.0 {
                // CΓ(−½)(−z)^{½} = −2√π·C·(−z)^{½}
                let scale = 2.0 * std::f64::consts::PI.sqrt() * d.coef;
                factors.push(SubordinatorFactor::HalfStable { direction: part.direction.clone(), scale });
            } else if d.alpha == 0.0 && d.rate > 0.0 {
                factors.push(SubordinatorFactor::Gamma { direction: part.direction.clone(), coef: d.coef, rate: d.rate });
            } else {
                return Err(Error::NoSubordinator(format!(
                    "{psi}: density with α = {}, rate = {} has no closed-form ν_t",
                    d.alpha, d.rate
                )));
            }
        }
        Ok(Self { catalog_id: psi.catalog_id.clone(), killing: psi.c0, factors, dimension: psi.dimension })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    /// `ν_t(ℝ₊ⁿ)`.
    pub fn total_mass(&self, t: f64) -> f64 {
        (t * self.killing).exp()
    }

    /// `∫ e^{s·u} dν_t(u)` from the measure (series and quadrature only).
    pub fn laplace(&self, s: &[Complex64], t: f64) -> Result<Complex64> {
        if s.len() != self.dimension {
            return Err(Error::DimensionMismatch { expected: self.dimension, found: s.len() });
        }
        check_time(t)?;
        let mut acc = Complex64::new(self.total_mass(t), 0.0);
        if t == 0.0 {
            return Ok(acc);
        }
        for factor in &self.factors {
            acc *= match factor {
                SubordinatorFactor::Drift(c1) => (dot(s, c1) * t).exp(),
                SubordinatorFactor::Poisson { location, rate } => {
                    let step = dot(s, location).exp();
                    let mut power = Complex64::new(1.0, 0.0);
                    let mut sum = Complex64::new(0.0, 0.0);
                    for p in poisson_weights(rate * t) {
                        sum += p * power;
                        power *= step;
                    }
                    sum
                }
                SubordinatorFactor::HalfStable { direction, .. } | SubordinatorFactor::Gamma { direction, .. } => {
                    let z = dot(s, direction);
                    let density = self.ray_density(factor, t);
                    if z.norm() == 0.0 {
                        Complex64::new(1.0, 0.0)
                    } else {
                        ray_integral(&ScalarKernel::rotated(z), &density, SUBORDINATION_TOL)?.value
                    }
                }
            };
        }
        Ok(acc)
    }

    fn ray_density(&self, factor: &SubordinatorFactor, t: f64) -> RayDensity {
        match *factor {
            SubordinatorFactor::HalfStable { scale, .. } => RayDensity::HalfStable { tau: scale * t },
            SubordinatorFactor::Gamma { coef, rate, .. } => RayDensity::Gamma { shape: coef * t, rate },
            _ => unreachable!("only ray factors carry densities"),
        }
    }

    /// `g_t(A) = ∫ T(u) dν_t(u)`.
    pub fn apply(&self, a: &OperatorTuple, t: f64) -> Result<CMatrix> {
        if a.n() != self.dimension {
            return Err(Error::DimensionMismatch { expected: a.n(), found: self.dimension });
        }
        check_time(t)?;
        if a.is_diagonal() {
            let values = diagonal_points(a).iter().map(|s| self.laplace(s, t)).collect::<Result<Vec<_>>>()?;
            return Ok(diagonal(&values));
        }
        let d = a.dim();
        let mut acc = identity(d) * Complex64::new(self.total_mass(t), 0.0);
        if t == 0.0 {
            return Ok(acc);
        }
        for factor in &self.factors {
            let op = match factor {
                SubordinatorFactor::Drift(c1) => {
                    let u: Vec<f64> = c1.iter().map(|c| c * t).collect();
                    a.semigroup_apply_dense(&u)?
                }
                SubordinatorFactor::Poisson { location, rate } => {
                    let step = a.semigroup_apply_dense(location)?;
                    let mut power = identity(d);
                    let mut sum = CMatrix::zeros(d, d);
                    for p in poisson_weights(rate * t) {
                        sum += &power * Complex64::new(p, 0.0);
                        power = &power * &step;
                    }
                    sum
                }
                SubordinatorFactor::HalfStable { direction, .. } | SubordinatorFactor::Gamma { direction, .. } => {
                    let kernel = MatrixKernel::new(a.combination(direction), a.ray_growth(direction));
                    ray_integral(&kernel, &self.ray_density(factor, t), SUBORDINATION_TOL)?.value
                }
            };
            acc *= op;
        }
        Ok(acc)
    }
}

fn check_time(t: f64) -> Result<()> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::Domain(format!("subordination time {t} must be finite and ≥ 0")));
    }
    Ok(())
}

/// `g_t(A)`; fails with [`Error::NoSubordinator`] when `ν_t` is not known.
pub fn subordinated(psi: &BernsteinFunction, a: &OperatorTuple, t: f64) -> Result<CMatrix> {
    check_dimension(psi, a)?;
    SubordinatorFamily::for_function(psi)?.apply(a, t)
}

/// `g_t(A)` or, without a known `ν_t`, `exp(t·ψ(A))`.
#[derive(Debug, Clone, PartialEq)]
pub struct Subordinated {
    pub value: CMatrix,
    pub fallback: bool,
}

pub fn subordinated_or_fallback(psi: &BernsteinFunction, a: &OperatorTuple, t: f64) -> Result<Subordinated> {
    match subordinated(psi, a, t) {
        Ok(value) => Ok(Subordinated { value, fallback: false }),
        Err(Error::NoSubordinator(_)) => {
            check_time(t)?;
            let generator = apply_psi(psi, a)?;
            Ok(Subordinated { value: expm(&(generator * Complex64::new(t, 0.0))), fallback: true })
        }
        Err(e) => Err(e),
    }
}

/// Residuals `r(t) = ‖(g_t(A)x − x)/t − ψ(A)x‖` along a decreasing sequence.
pub fn generator_limit_check(psi: &BernsteinFunction, a: &OperatorTuple, x: &CVector, times: &[f64]) -> Result<Vec<f64>> {
    check_dimension(psi, a)?;
    if x.len() != a.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), found: x.len() });
    }
    let family = SubordinatorFamily::for_function(psi)?;
    let generator_x = apply_psi(psi, a)? * x;
    times
        .iter()
        .map(|&t| {
            if !(t > 0.0) {
                return Err(Error::Domain(format!("time {t} must be positive")));
            }
            let g = family.apply(a, t)?;
            let difference = (g * x - x) / Complex64::new(t, 0.0) - &generator_x;
            Ok(difference.norm())
        })
        .collect()
}

/// `V_j^λ(u) = ∫₀ᵘ e^{(u−s)λ} T_j(s) ds` by adaptive quadrature.
pub fn v_operator(lambda: Complex64, a: &OperatorTuple, j: usize, u: f64) -> Result<CMatrix> {
    if j >= a.n() {
        return Err(Error::DimensionMismatch { expected: a.n(), found: j });
    }
    if !(u >= 0.0 && u.is_finite()) {
        return Err(Error::Domain(format!("u = {u} must be finite and ≥ 0")));
    }
    let d = a.dim();
    if u == 0.0 {
        return Ok(CMatrix::zeros(d, d));
    }
    let g = a.generator(j);
    let opts = QuadOptions { abs_tol: 1e-14, rel_tol: 1e-13, max_intervals: 400 };
    let q = integrate(|s| expm(&(g * Complex64::new(s, 0.0))).scaled(((u - s) * lambda).exp()), 0.0, u, &opts);
    let scale = q.value.norm().max(1.0);
    if q.error > 1e-10 * scale {
        return Err(Error::Quadrature { estimate: q.error, tolerance: 1e-10 * scale });
    }
    Ok(q.value)
}

/// `‖(λI − A_j)V_j^λ(u) − (e^{uλ}I − T_j(u))‖_F`, which vanishes identically.
pub fn v_identity_residual(lambda: Complex64, a: &OperatorTuple, j: usize, u: f64) -> Result<f64> {
    let v = v_operator(lambda, a, j, u)?;
    let d = a.dim();
    let id = identity(d);
    let t = expm(&(a.generator(j) * Complex64::new(u, 0.0)));
    let lhs = (&id * lambda - a.generator(j)) * v;
    Ok(frobenius(&(lhs - (&id * (u * lambda).exp() - t))))
}

fn check_lambda(a: &OperatorTuple, lambda: &[Complex64], j: usize) -> Result<()> {
    if lambda.len() != a.n() {
        return Err(Error::DimensionMismatch { expected: a.n(), found: lambda.len() });
    }
    if j >= a.n() {
        return Err(Error::DimensionMismatch { expected: a.n(), found: j });
    }
    if let Some(z) = lambda.iter().find(|z| !(z.re < 0.0)) {
        return Err(Error::Domain(format!("λ component {z} must have negative real part")));
    }
    Ok(())
}

/// Block generator whose exponential carries `U_j(rw)·V_j^λ(r w_j)` in its
/// upper-right block.
fn w_block(a: &OperatorTuple, lambda: &[Complex64], j: usize, w: &[f64]) -> CMatrix {
    let d = a.dim();
    let id = identity(d);
    let mut shared = CMatrix::zeros(d, d);
    for (l, &wl) in w.iter().enumerate().take(j) {
        if wl != 0.0 {
            shared += a.generator(l) * Complex64::new(wl, 0.0);
        }
    }
    let trailing: Complex64 = (j + 1..a.n()).map(|k| lambda[k] * w[k]).sum();
    shared += &id * trailing;
    let wj = Complex64::new(w[j], 0.0);
    let mut g = CMatrix::zeros(2 * d, 2 * d);
    g.view_mut((0, 0), (d, d)).copy_from(&(&shared + &id * (wj * lambda[j])));
    g.view_mut((0, d), (d, d)).copy_from(&(&id * wj));
    g.view_mut((d, d), (d, d)).copy_from(&(&shared + a.generator(j) * wj));
    g
}

/// `W_j^λ = c₁ʲ I + ∫ V_j^λ(u_j) U_j(u) dμ(u)`, with
/// `U_j(u) = Π_{l<j} T_l(u_l) Π_{k>j} e^{λ_k u_k}`.
pub fn w_operator(psi: &BernsteinFunction, a: &OperatorTuple, lambda: &[Complex64], j: usize) -> Result<CMatrix> {
    check_dimension(psi, a)?;
    check_lambda(a, lambda, j)?;
    let d = a.dim();
    let mut value = identity(d) * Complex64::new(psi.c1[j], 0.0);
    for atom in &psi.measure.atoms {
        if atom.location[j] == 0.0 {
            continue;
        }
        let e = expm(&w_block(a, lambda, j, &atom.location));
        value += e.view((0, d), (d, d)) * Complex64::new(atom.mass, 0.0);
    }
    let mj = a.bound(j);
    for part in &psi.measure.densities {
        let w = &part.direction;
        if w[j] == 0.0 || part.density.coef == 0.0 {
            continue;
        }
        let leading: f64 = (0..j).filter(|&l| w[l] > 0.0).map(|l| a.bound(l)).product();
        let growth = leading * (1.0 + mj + mj / -lambda[j].re);
        let kernel = MatrixKernel::new(w_block(a, lambda, j, w), growth);
        let q = ray_integral(&kernel, &part.density.ray_density(), LEVY_TOL)?;
        value += q.value.view((0, d), (d, d));
    }
    Ok(value)
}

/// `c₁ʲ + (Mⁿ/Re λ_j)(ψ((Re λ_j)e_j) − c₁ʲ Re λ_j − ψ(−0))` with
/// `M = max_k M_k`.
pub fn w_bound(psi: &BernsteinFunction, a: &OperatorTuple, lambda: &[Complex64], j: usize) -> Result<f64> {
    check_dimension(psi, a)?;
    check_lambda(a, lambda, j)?;
    let re = lambda[j].re;
    let mut point = vec![0.0; psi.dimension];
    point[j] = re;
    let integral = psi.eval_real(&point)? - psi.c1[j] * re - psi.value_at_zero();
    let m = a.common_bound();
    Ok(psi.c1[j] + m.powi(a.n() as i32) / re * integral)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FactorizationReport {
    /// `‖(ψ(λ)I − ψ(A)) − Σ_j W_j^λ(λ_j I − A_j)‖_F`
    pub residual: f64,
    pub scale: f64,
    pub relative: f64,
    pub w_norms: Vec<f64>,
    pub w_bounds: Vec<f64>,
}

pub fn factorization_check(psi: &BernsteinFunction, a: &OperatorTuple, lambda: &[Complex64]) -> Result<FactorizationReport> {
    check_dimension(psi, a)?;
    check_lambda(a, lambda, 0)?;
    let d = a.dim();
    let id = identity(d);
    let psi_a = apply_psi(psi, a)?;
    let psi_lambda = psi.eval(lambda)?;
    let lhs = &id * psi_lambda - &psi_a;
    let mut rhs = CMatrix::zeros(d, d);
    let mut w_norms = Vec::with_capacity(a.n());
    let mut w_bounds = Vec::with_capacity(a.n());
    for j in 0..a.n() {
        let w = w_operator(psi, a, lambda, j)?;
        w_norms.push(crate::linalg::op_norm(&w));
        w_bounds.push(w_bound(psi, a, lambda, j)?);
        rhs += &w * (&id * lambda[j] - a.generator(j));
    }
    let residual = frobenius(&(lhs - rhs));
    let scale = (frobenius(&psi_a) + psi_lambda.norm() * (d as f64).sqrt()).max(1.0);
    Ok(FactorizationReport { residual, scale, relative: residual / scale, w_norms, w_bounds })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;

    fn scalar(z: f64) -> OperatorTuple {
        OperatorTuple::new(vec![CMatrix::from_element(1, 1, c(z, 0.0))]).unwrap()
    }

    #[test]
    fn v_operator_scalar_value() {
        let v = v_operator(c(-2.0, 0.0), &scalar(-1.0), 0, 1.0).unwrap();
        let want = (-1.0f64).exp() - (-2.0f64).exp();
        assert!((v[(0, 0)].re - want).abs() < 1e-13);
    }

    #[test]
    fn w_operator_poisson_scalar() {
        let psi = BernsteinFunction::poisson(1.0, 1.0).unwrap();
        let w = w_operator(&psi, &scalar(-1.0), &[c(-1.0, 0.0)], 0).unwrap();
        // V^λ(1) with λ = A = −1 is e^{−1}
        assert!((w[(0, 0)].re - (-1.0f64).exp()).abs() < 1e-13, "{}", w[(0, 0)]);
    }

    #[test]
    fn log1m_subordination_scalar() {
        let g = subordinated(&BernsteinFunction::log1m(), &scalar(-1.0), 2.0).unwrap();
        assert!((g[(0, 0)].re - 0.25).abs() < 1e-11);
    }
}
