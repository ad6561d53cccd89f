//! Integrals of semigroup orbits against densities carried by a ray.
//!
//! Everything here computes
//!
//! ```text
//!     ∫₀^∞ e^{rG} f(r) dr        (probability-type densities), or
//!     ∫₀^∞ (e^{rG} − I) m(r) dr  (Lévy densities, compensated)
//! ```
//!
//! where `G` is either a complex scalar or a matrix generating a bounded
//! semigroup. Scalars are integrated along a rotated contour `r = ωρ` so that
//! `e^{rG}` decays even when `G` sits on the imaginary axis; matrices are
//! integrated on the real half-line. The interval near the origin is handled
//! by an exact power series, the rest by geometric panels of adaptive
//! Gauss–Kronrod with an explicit truncation bound.

use std::f64::consts::PI;

use num_complex::Complex64;
use statrs::function::gamma::{gamma_ur, ln_gamma};

use crate::error::{Error, Result};
use crate::linalg::{expm, frobenius, op_norm, CMatrix};
use crate::quadrature::{integrate, QuadOptions, QuadValue};

const MAX_PANELS: usize = 160;
const MAX_SERIES_TERMS: usize = 80;

/// A generator whose exponential can be integrated along the ray.
pub(crate) trait Kernel {
    type V: QuadValue;
    fn identity(&self) -> Self::V;
    /// `G·v + shift·v`
    fn apply_shifted(&self, v: &Self::V, shift: Complex64) -> Self::V;
    fn norm(&self) -> f64;
    fn exp(&self, rho: f64) -> Self::V;
    /// Upper bound for `sup_{r ≥ rho} ‖e^{rG}‖` given `e = e^{rho·G}`.
    fn sup_from(&self, e: &Self::V) -> f64;
    /// Contour rotation `ω` used for this kernel.
    fn omega(&self) -> Complex64;
}

pub(crate) struct ScalarKernel {
    g: Complex64,
    omega: Complex64,
}

impl ScalarKernel {
    /// Kernel for `e^{rz}` with `Re z ≤ 0`; the contour is rotated by at most
    /// π/4 so that `ωz` points into the left half-plane.
    pub fn rotated(z: Complex64) -> Self {
        let phi = if z.norm() == 0.0 { 0.0 } else { -(-z).arg().clamp(-PI / 4.0, PI / 4.0) };
        let omega = Complex64::from_polar(1.0, phi);
        Self { g: omega * z, omega }
    }
}

impl Kernel for ScalarKernel {
    type V = Complex64;
    fn identity(&self) -> Complex64 {
        Complex64::new(1.0, 0.0)
    }
    fn apply_shifted(&self, v: &Complex64, shift: Complex64) -> Complex64 {
        (self.g + shift) * v
    }
    fn norm(&self) -> f64 {
        self.g.norm()
    }
    fn exp(&self, rho: f64) -> Complex64 {
        (self.g * rho).exp()
    }
    fn sup_from(&self, e: &Complex64) -> f64 {
        // Re g ≤ 0, so |e^{rg}| is nonincreasing
        e.norm()
    }
    fn omega(&self) -> Complex64 {
        self.omega
    }
}

pub(crate) struct MatrixKernel {
    g: CMatrix,
    norm: f64,
    growth: f64,
}

impl MatrixKernel {
    /// `growth` must bound `sup_{r ≥ 0} ‖e^{rG}‖`.
    pub fn new(g: CMatrix, growth: f64) -> Self {
        let norm = op_norm(&g);
        Self { g, norm, growth }
    }
}

impl Kernel for MatrixKernel {
    type V = CMatrix;
    fn identity(&self) -> CMatrix {
        CMatrix::identity(self.g.nrows(), self.g.ncols())
    }
    fn apply_shifted(&self, v: &CMatrix, shift: Complex64) -> CMatrix {
        let mut out = &self.g * v;
        out.add_scaled(shift, v);
        out
    }
    fn norm(&self) -> f64 {
        self.norm
    }
    fn exp(&self, rho: f64) -> CMatrix {
        expm(&(&self.g * Complex64::new(rho, 0.0)))
    }
    fn sup_from(&self, e: &CMatrix) -> f64 {
        self.growth * frobenius(e)
    }
    fn omega(&self) -> Complex64 {
        Complex64::new(1.0, 0.0)
    }
}

/// Densities supported on `(0, ∞)` in the ray parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum RayDensity {
    /// `C r^{−1−α} e^{−b r}`, integrated against `e^{rG} − I`.
    Levy { coef: f64, alpha: f64, rate: f64 },
    /// One-sided ½-stable law with Laplace transform `e^{−τ√λ}`.
    HalfStable { tau: f64 },
    /// Gamma law with shape `a` and rate `b`.
    Gamma { shape: f64, rate: f64 },
}

impl RayDensity {
    fn rate(&self) -> f64 {
        match *self {
            RayDensity::Levy { rate, .. } | RayDensity::Gamma { rate, .. } => rate,
            RayDensity::HalfStable { .. } => 0.0,
        }
    }

    /// `f(ωρ)·ω`, including the density's own exponential factor.
    fn weight(&self, omega: Complex64, rho: f64) -> Complex64 {
        match *self {
            RayDensity::Levy { coef, alpha, rate } => {
                omega.powf(-alpha) * coef * rho.powf(-1.0 - alpha) * (-omega * rate * rho).exp()
            }
            RayDensity::Gamma { shape, rate } => {
                let log_norm = shape * rate.ln() - ln_gamma(shape);
                omega.powf(shape)
                    * (log_norm + (shape - 1.0) * rho.ln()).exp()
                    * (-omega * rate * rho).exp()
            }
            RayDensity::HalfStable { tau } => {
                let r = omega * rho;
                omega * tau / (2.0 * PI.sqrt()) * r.powf(-1.5) * (-tau * tau / (4.0 * r)).exp()
            }
        }
    }

    /// Bound for `∫_ρ^∞ |f(ωr)ω| dr`.
    fn tail_weight(&self, omega: Complex64, rho: f64) -> f64 {
        let damp = omega.re; // cos φ ≥ 1/√2
        match *self {
            RayDensity::Levy { coef, alpha, rate } => {
                let mut bound = f64::INFINITY;
                if alpha > 0.0 {
                    bound = coef * rho.powf(-alpha) / alpha;
                }
                if rate > 0.0 {
                    let decay = rate * damp;
                    bound = bound.min(coef * rho.powf(-1.0 - alpha) * (-decay * rho).exp() / decay);
                }
                bound
            }
            RayDensity::Gamma { shape, rate } => {
                let decay = rate * damp;
                (rate / decay).powf(shape) * gamma_ur(shape, decay * rho)
            }
            RayDensity::HalfStable { tau } => tau / (PI * rho).sqrt(),
        }
    }

    fn head_radius(&self, shifted_norm: f64) -> f64 {
        match *self {
            RayDensity::HalfStable { tau } => tau * tau / 240.0,
            _ => 1.0f64.min(0.5 / shifted_norm.max(1e-300)),
        }
    }

    /// Exact contribution of `[0, ρ₀]` by term-wise integration of the
    /// exponential series.
    fn head<K: Kernel>(&self, kernel: &K, rho0: f64) -> K::V {
        let omega = kernel.omega();
        let shift = -omega * self.rate();
        let mut power = kernel.identity(); // (G + shift)^k / k!
        let mut acc = power.zeros_like();
        match *self {
            RayDensity::HalfStable { .. } => acc,
            RayDensity::Levy { coef, alpha, .. } => {
                let pre = omega.powf(-alpha) * coef;
                let mut scalar = Complex64::new(1.0, 0.0); // shift^k / k!
                let identity = kernel.identity();
                for k in 1..MAX_SERIES_TERMS {
                    let kf = k as f64;
                    power = kernel.apply_shifted(&power, shift).scaled(Complex64::new(1.0 / kf, 0.0));
                    scalar *= shift / kf;
                    let w = pre * rho0.powf(kf - alpha) / (kf - alpha);
                    acc.add_scaled(w, &power);
                    acc.add_scaled(-w * scalar, &identity);
                    if (power.norm() + scalar.norm()) * rho0.powf(kf) < 1e-18 {
                        break;
                    }
                }
                acc
            }
            RayDensity::Gamma { shape, rate } => {
                let pre = omega.powf(shape) * (shape * rate.ln() - ln_gamma(shape)).exp();
                for k in 0..MAX_SERIES_TERMS {
                    let kf = k as f64;
                    if k > 0 {
                        power = kernel.apply_shifted(&power, shift).scaled(Complex64::new(1.0 / kf, 0.0));
                    }
                    acc.add_scaled(pre * rho0.powf(kf + shape) / (kf + shape), &power);
                    if power.norm() * rho0.powf(kf) < 1e-18 {
                        break;
                    }
                }
                acc
            }
        }
    }
}

/// `∫_{ρ₀}^∞ e^{ρG} w(ρ) dρ` by doubling panels, stopped once the analytic
/// tail bound falls below a fraction of the tolerance.
fn body<K: Kernel>(kernel: &K, density: &RayDensity, rho0: f64, tol: f64) -> Result<(K::V, f64)> {
    let omega = kernel.omega();
    let opts = QuadOptions { abs_tol: tol / 32.0, rel_tol: 1e-14, max_intervals: 400 };
    let mut a = rho0;
    let mut acc = kernel.identity().zeros_like();
    let mut error = 0.0;
    for _ in 0..MAX_PANELS {
        let b = 2.0 * a;
        let q = integrate(|rho| kernel.exp(rho).scaled(density.weight(omega, rho)), a, b, &opts);
        acc.add_scaled(Complex64::new(1.0, 0.0), &q.value);
        error += q.error;
        a = b;
        let tail = kernel.sup_from(&kernel.exp(a)) * density.tail_weight(omega, a);
        if tail < tol / 16.0 {
            return Ok((acc, error + tail));
        }
    }
    Err(Error::Quadrature { estimate: error + kernel.sup_from(&kernel.exp(a)) * density.tail_weight(omega, a), tolerance: tol })
}

/// Result of a ray integral together with its error estimate.
pub(crate) struct RayIntegral<V> {
    pub value: V,
    pub error: f64,
}

/// Integral of the kernel against the density; Lévy densities are
/// compensated by `−I`. The kernel generator must not include the density's
/// exponential rate.
pub(crate) fn ray_integral<K: Kernel>(kernel: &K, density: &RayDensity, tol: f64) -> Result<RayIntegral<K::V>> {
    let omega = kernel.omega();
    let shifted_norm = kernel.norm() + density.rate();
    let rho0 = density.head_radius(shifted_norm);
    let mut value = density.head(kernel, rho0);
    let (body_value, mut error) = body(kernel, density, rho0, tol)?;
    value.add_scaled(Complex64::new(1.0, 0.0), &body_value);
    if let RayDensity::Levy { coef, alpha, rate } = *density {
        let compensation = if rate == 0.0 {
            omega.powf(-alpha) * coef * rho0.powf(-alpha) / alpha
        } else {
            let flat = ScalarKernel { g: Complex64::new(0.0, 0.0), omega };
            let (c, e) = body(&flat, density, rho0, tol)?;
            error += e;
            c
        };
        let id = kernel.identity();
        value.add_scaled(-compensation, &id);
    }
    let scale = value.norm().max(1.0);
    if error > 4.0 * tol * scale {
        return Err(Error::Quadrature { estimate: error, tolerance: tol * scale });
    }
    Ok(RayIntegral { value, error })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;
    use statrs::function::gamma::gamma;

    fn levy_closed(coef: f64, alpha: f64, rate: f64, z: Complex64) -> Complex64 {
        if alpha == 0.0 {
            -coef * (1.0 - z / rate).ln()
        } else {
            let b = Complex64::new(rate, 0.0);
            coef * gamma(-alpha) * ((b - z).powf(alpha) - b.powf(alpha))
        }
    }

    #[test]
    fn stable_density_against_gamma_formula() {
        for &(alpha, z) in &[(0.7, c(-1.0, 0.0)), (0.3, c(-0.5, 4.0)), (0.5, c(0.0, -30.0))] {
            let d = RayDensity::Levy { coef: 1.0, alpha, rate: 0.0 };
            let got = ray_integral(&ScalarKernel::rotated(z), &d, 1e-12).unwrap().value;
            let want = levy_closed(1.0, alpha, 0.0, z);
            assert!((got - want).norm() < 1e-9 * (1.0 + want.norm()), "{alpha} {z}: {got} vs {want}");
        }
    }

    #[test]
    fn tempered_and_logarithmic_densities() {
        for &(alpha, rate, z) in &[(0.0, 1.0, c(-3.0, 0.0)), (0.0, 2.0, c(0.0, 7.0)), (-0.5, 1.0, c(-1.0, 1.0)), (0.4, 0.5, c(-2.0, 0.0))] {
            let d = RayDensity::Levy { coef: 0.8, alpha, rate };
            let got = ray_integral(&ScalarKernel::rotated(z), &d, 1e-12).unwrap().value;
            let want = levy_closed(0.8, alpha, rate, z);
            assert!((got - want).norm() < 1e-9 * (1.0 + want.norm()), "{alpha} {rate} {z}: {got} vs {want}");
        }
    }

    #[test]
    fn probability_densities_have_closed_laplace_transforms() {
        let z = c(-2.0, 1.5);
        let hs = ray_integral(&ScalarKernel::rotated(z), &RayDensity::HalfStable { tau: 0.7 }, 1e-13).unwrap().value;
        assert!((hs - (-0.7 * (-z).sqrt()).exp()).norm() < 1e-11);
        let g = ray_integral(&ScalarKernel::rotated(z), &RayDensity::Gamma { shape: 0.3, rate: 2.0 }, 1e-13).unwrap().value;
        assert!((g - (1.0 - z / 2.0).powf(-0.3)).norm() < 1e-11);
    }

    #[test]
    fn matrix_kernel_agrees_with_scalar_on_diagonal_input() {
        let z1 = c(-1.0, 0.5);
        let z2 = c(-0.3, 0.0);
        let g = CMatrix::from_row_slice(2, 2, &[z1, c(0.0, 0.0), c(0.0, 0.0), z2]);
        let d = RayDensity::Levy { coef: 1.0, alpha: 0.6, rate: 0.0 };
        let m = ray_integral(&MatrixKernel::new(g, 1.0), &d, 1e-11).unwrap().value;
        for (k, z) in [z1, z2].into_iter().enumerate() {
            let s = levy_closed(1.0, 0.6, 0.0, z);
            assert!((m[(k, k)] - s).norm() < 1e-8, "{k}: {} vs {s}", m[(k, k)]);
        }
    }
}
