//! Tuples of commuting generators and the n-parameter semigroups they
//! generate, `T(u) = e^{u₁A₁}⋯e^{uₙAₙ}`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{
    commutator_norm, condition_number, diagonal, eigenvalues, expm, frobenius, identity, inverse, is_diagonal,
    op_norm, CMatrix,
};

/// Relative commutator residual accepted as "commuting".
pub const COMMUTING_TOL: f64 = 1e-10;
const MAX_BASIS_ATTEMPTS: usize = 10;
/// Largest condition number accepted for a random eigenbasis.
pub const MAX_BASIS_CONDITION: f64 = 20.0;

/// Joint eigen-decomposition `A_j = P·diag(Λ_j)·P⁻¹`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralData {
    pub basis: CMatrix,
    pub inverse: CMatrix,
    /// `diagonals[j][i]` is the `i`-th eigenvalue of `A_j`.
    pub diagonals: Vec<Vec<Complex64>>,
    pub condition: f64,
}

impl SpectralData {
    /// Joint eigenvalues, one point of `ℂⁿ` per basis vector.
    pub fn joint_eigenvalues(&self) -> Vec<Vec<Complex64>> {
        let d = self.basis.ncols();
        (0..d).map(|i| self.diagonals.iter().map(|diag| diag[i]).collect()).collect()
    }

    /// `P·diag(values)·P⁻¹`.
    pub fn reassemble(&self, values: &[Complex64]) -> CMatrix {
        let mut scaled = self.basis.clone();
        for (k, mut col) in scaled.column_iter_mut().enumerate() {
            col *= values[k];
        }
        scaled * &self.inverse
    }
}

/// `n` commuting `d×d` generators with certified semigroup bounds
/// `M_j ≥ sup_{t ≥ 0} ‖e^{tA_j}‖`.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorTuple {
    generators: Vec<CMatrix>,
    bounds: Vec<f64>,
    commutator_residual: f64,
    spectral: Option<SpectralData>,
}

fn commutator_residual(generators: &[CMatrix]) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..generators.len() {
        for j in i + 1..generators.len() {
            worst = worst.max(commutator_norm(&generators[i], &generators[j]));
        }
    }
    worst
}

impl OperatorTuple {
    /// Validates shape and commutativity, then estimates each bound.
    pub fn new(generators: Vec<CMatrix>) -> Result<Self> {
        let mut tuple = Self::unbounded(generators)?;
        tuple.bounds = (0..tuple.n()).map(|j| estimate_bound(&tuple, j)).collect::<Result<_>>()?;
        Ok(tuple)
    }

    /// Uses caller-certified bounds instead of estimating them.
    pub fn with_bounds(generators: Vec<CMatrix>, bounds: Vec<f64>) -> Result<Self> {
        let mut tuple = Self::unbounded(generators)?;
        if bounds.len() != tuple.n() {
            return Err(Error::DimensionMismatch { expected: tuple.n(), found: bounds.len() });
        }
        if bounds.iter().any(|&m| !(m >= 1.0 && m.is_finite())) {
            return Err(Error::InvalidParameter("semigroup bounds must be finite and ≥ 1".into()));
        }
        tuple.bounds = bounds;
        Ok(tuple)
    }

    /// `A_j = P·diag(D_j)·P⁻¹` with `M_j = cond(P)`.
    pub fn from_spectral(basis: CMatrix, diagonals: Vec<Vec<Complex64>>) -> Result<Self> {
        let d = basis.nrows();
        if !basis.is_square() {
            return Err(Error::DimensionMismatch { expected: d, found: basis.ncols() });
        }
        if let Some(bad) = diagonals.iter().find(|diag| diag.len() != d) {
            return Err(Error::DimensionMismatch { expected: d, found: bad.len() });
        }
        if diagonals.iter().flatten().any(|z| z.re > 0.0) {
            return Err(Error::Unbounded("an eigenvalue has positive real part".into()));
        }
        let condition = condition_number(&basis);
        let inv = inverse(&basis).filter(|_| condition.is_finite()).ok_or(Error::DegenerateBasis(1))?;
        let spectral = SpectralData { basis, inverse: inv, diagonals, condition };
        let generators: Vec<CMatrix> = spectral.diagonals.iter().map(|diag| spectral.reassemble(diag)).collect();
        let mut tuple = Self::unbounded(generators)?;
        tuple.bounds = vec![condition.max(1.0); tuple.n()];
        tuple.spectral = Some(spectral);
        Ok(tuple)
    }

    fn unbounded(generators: Vec<CMatrix>) -> Result<Self> {
        let first = generators.first().ok_or_else(|| Error::InvalidParameter("empty generator tuple".into()))?;
        let d = first.nrows();
        for g in &generators {
            if g.nrows() != d || g.ncols() != d {
                return Err(Error::DimensionMismatch { expected: d, found: if g.nrows() != d { g.nrows() } else { g.ncols() } });
            }
            if g.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::InvalidParameter("generator entries must be finite".into()));
            }
        }
        let residual = commutator_residual(&generators);
        let scale = generators.iter().map(frobenius).fold(0.0, f64::max);
        let threshold = COMMUTING_TOL * scale * scale;
        if residual > threshold {
            return Err(Error::NonCommuting { residual, threshold });
        }
        let n = generators.len();
        Ok(Self { generators, bounds: vec![1.0; n], commutator_residual: residual, spectral: None })
    }

    pub fn n(&self) -> usize {
        self.generators.len()
    }

    pub fn dim(&self) -> usize {
        self.generators[0].nrows()
    }

    pub fn generators(&self) -> &[CMatrix] {
        &self.generators
    }

    pub fn generator(&self, j: usize) -> &CMatrix {
        &self.generators[j]
    }

    pub fn bounds(&self) -> &[f64] {
        &self.bounds
    }

    pub fn bound(&self, j: usize) -> f64 {
        self.bounds[j]
    }

    /// `max_j M_j`.
    pub fn common_bound(&self) -> f64 {
        self.bounds.iter().copied().fold(1.0, f64::max)
    }

    pub fn commutator_residual(&self) -> f64 {
        self.commutator_residual
    }

    pub fn spectral(&self) -> Option<&SpectralData> {
        self.spectral.as_ref()
    }

    pub fn is_diagonal(&self) -> bool {
        self.generators.iter().all(is_diagonal)
    }

    /// `Σ_j w_j A_j`.
    pub fn combination(&self, w: &[f64]) -> CMatrix {
        let mut acc = CMatrix::zeros(self.dim(), self.dim());
        for (g, &x) in self.generators.iter().zip(w) {
            if x != 0.0 {
                acc += g * Complex64::new(x, 0.0);
            }
        }
        acc
    }

    /// `Π_{w_j > 0} M_j`, a bound for `sup_r ‖e^{r Σ w_j A_j}‖`.
    pub fn ray_growth(&self, w: &[f64]) -> f64 {
        self.bounds.iter().zip(w).filter(|(_, &x)| x > 0.0).map(|(m, _)| m).product()
    }

    fn check_time(&self, u: &[f64]) -> Result<()> {
        if u.len() != self.n() {
            return Err(Error::DimensionMismatch { expected: self.n(), found: u.len() });
        }
        if let Some(x) = u.iter().find(|&&x| !(x >= 0.0 && x.is_finite())) {
            return Err(Error::Domain(format!("semigroup parameter {x} must be finite and ≥ 0")));
        }
        Ok(())
    }

    /// `T(u)`; uses the stored eigenbasis when present.
    pub fn semigroup_apply(&self, u: &[f64]) -> Result<CMatrix> {
        self.check_time(u)?;
        match &self.spectral {
            Some(sd) => {
                let values: Vec<Complex64> = (0..self.dim())
                    .map(|i| sd.diagonals.iter().zip(u).map(|(diag, &x)| diag[i] * x).sum::<Complex64>().exp())
                    .collect();
                Ok(sd.reassemble(&values))
            }
            None => self.semigroup_apply_dense(u),
        }
    }

    /// `T(u)` as a product of matrix exponentials in index order.
    pub fn semigroup_apply_dense(&self, u: &[f64]) -> Result<CMatrix> {
        let order: Vec<usize> = (0..self.n()).collect();
        self.semigroup_apply_ordered(u, &order)
    }

    /// `T(u)` with the factors multiplied in the given order.
    pub fn semigroup_apply_ordered(&self, u: &[f64], order: &[usize]) -> Result<CMatrix> {
        self.check_time(u)?;
        let mut acc = identity(self.dim());
        for &j in order {
            if u[j] != 0.0 {
                acc *= expm(&(&self.generators[j] * Complex64::new(u[j], 0.0)));
            }
        }
        Ok(acc)
    }

    /// `A − εI` in every generator. Bounds carry over since
    /// `‖e^{t(A−ε)}‖ ≤ ‖e^{tA}‖`.
    pub fn shifted(&self, eps: f64) -> Result<Self> {
        if !(eps >= 0.0) {
            return Err(Error::InvalidParameter(format!("shift {eps} must be ≥ 0")));
        }
        let shift = Complex64::new(eps, 0.0);
        let d = self.dim();
        let generators = self.generators.iter().map(|g| g - identity(d) * shift).collect();
        let spectral = self.spectral.as_ref().map(|sd| SpectralData {
            diagonals: sd.diagonals.iter().map(|diag| diag.iter().map(|z| z - shift).collect()).collect(),
            ..sd.clone()
        });
        Ok(Self { generators, bounds: self.bounds.clone(), commutator_residual: self.commutator_residual, spectral })
    }

    /// Tuple of adjoints `(A₁*, …, Aₙ*)`, same bounds.
    pub fn adjoint(&self) -> Self {
        let spectral = self.spectral.as_ref().map(|sd| SpectralData {
            basis: sd.inverse.adjoint(),
            inverse: sd.basis.adjoint(),
            diagonals: sd.diagonals.iter().map(|diag| diag.iter().map(|z| z.conj()).collect()).collect(),
            condition: sd.condition,
        });
        Self {
            generators: self.generators.iter().map(|g| g.adjoint()).collect(),
            bounds: self.bounds.clone(),
            commutator_residual: self.commutator_residual,
            spectral,
        }
    }
}

/// Closed rectangle `[re.0, re.1] × i[im.0, im.1]` inside `Re ≤ 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralBox {
    pub re: (f64, f64),
    pub im: (f64, f64),
}

impl SpectralBox {
    pub fn new(re: (f64, f64), im: (f64, f64)) -> Result<Self> {
        if !(re.0 <= re.1 && im.0 <= im.1) || !(re.0.is_finite() && im.0.is_finite() && im.1.is_finite()) {
            return Err(Error::InvalidParameter("spectral box bounds must be ordered and finite".into()));
        }
        if re.1 > 0.0 {
            return Err(Error::InvalidParameter("spectral box must lie in the closed left half-plane".into()));
        }
        Ok(Self { re, im })
    }

    fn sample(&self, rng: &mut impl Rng) -> Complex64 {
        let t: f64 = rng.random();
        let s: f64 = rng.random();
        Complex64::new(self.re.0 + t * (self.re.1 - self.re.0), self.im.0 + s * (self.im.1 - self.im.0))
    }
}

impl Default for SpectralBox {
    fn default() -> Self {
        Self { re: (-3.0, -0.2), im: (-2.0, 2.0) }
    }
}

fn gaussian_matrix(d: usize, rng: &mut impl Rng) -> CMatrix {
    CMatrix::from_fn(d, d, |_, _| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
}

fn random_unitary(d: usize, rng: &mut impl Rng) -> CMatrix {
    gaussian_matrix(d, rng).qr().q()
}

/// `Q₁·diag(σ)·Q₂*` with singular values spread over `[1, κ]`.
fn random_basis(d: usize, max_condition: f64, rng: &mut impl Rng) -> CMatrix {
    let q1 = random_unitary(d, rng);
    let q2 = random_unitary(d, rng);
    let kappa = 1.0 + rng.random::<f64>() * (max_condition - 1.0);
    let sigma: Vec<Complex64> = (0..d)
        .map(|i| {
            let x = if d == 1 { 0.0 } else if i == 0 { 1.0 } else if i == 1 { 0.0 } else { rng.random::<f64>() };
            Complex64::new(kappa.powf(x), 0.0)
        })
        .collect();
    q1 * diagonal(&sigma) * q2.adjoint()
}

/// Random jointly diagonalizable tuple with eigenvalues drawn from `bx`.
pub fn make_commuting_random(n: usize, d: usize, seed: u64, bx: SpectralBox) -> Result<OperatorTuple> {
    make_commuting_random_with(n, d, seed, bx, MAX_BASIS_CONDITION)
}

/// As [`make_commuting_random`] with an explicit cap on `cond(P)`.
pub fn make_commuting_random_with(n: usize, d: usize, seed: u64, bx: SpectralBox, max_condition: f64) -> Result<OperatorTuple> {
    if n == 0 || d == 0 {
        return Err(Error::InvalidParameter("need n ≥ 1 and d ≥ 1".into()));
    }
    if !(max_condition >= 1.0) {
        return Err(Error::InvalidParameter("condition cap must be ≥ 1".into()));
    }
    let bx = SpectralBox::new(bx.re, bx.im)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..MAX_BASIS_ATTEMPTS {
        let basis = random_basis(d, max_condition, &mut rng);
        let diagonals: Vec<Vec<Complex64>> = (0..n).map(|_| (0..d).map(|_| bx.sample(&mut rng)).collect()).collect();
        if condition_number(&basis) > max_condition * (1.0 + 1e-9) {
            continue;
        }
        match OperatorTuple::from_spectral(basis, diagonals) {
            Ok(t) => return Ok(t),
            Err(Error::DegenerateBasis(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::DegenerateBasis(MAX_BASIS_ATTEMPTS))
}

/// Non-diagonalizable commuting tuple `A_j = a_j B − b_j B²` where `B`
/// is similar to a matrix with one 2×2 Jordan block. Returns the tuple and
/// its joint eigenvalues `(p_j(μ))_j`, one per distinct eigenvalue `μ` of `B`.
pub fn jordan_polynomial_tuple(n: usize, d: usize, seed: u64) -> Result<(OperatorTuple, Vec<Vec<Complex64>>)> {
    if n == 0 || d < 2 {
        return Err(Error::InvalidParameter("Jordan tuples need n ≥ 1 and d ≥ 2".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let distinct = d - 1;
    let mu: Vec<f64> = (0..distinct)
        .map(|k| {
            let slot = 1.8 / distinct as f64;
            -0.2 - slot * (k as f64 + 0.2 + 0.6 * rng.random::<f64>())
        })
        .collect();
    let mut j = CMatrix::zeros(d, d);
    j[(0, 0)] = Complex64::new(mu[0], 0.0);
    j[(1, 1)] = Complex64::new(mu[0], 0.0);
    j[(0, 1)] = Complex64::new(1.0, 0.0);
    for k in 1..distinct {
        j[(k + 1, k + 1)] = Complex64::new(mu[k], 0.0);
    }
    let s = random_basis(d, 5.0, &mut rng);
    let s_inv = inverse(&s).ok_or(Error::DegenerateBasis(1))?;
    let b = &s * j * s_inv;
    let b2 = &b * &b;
    let mut generators = Vec::with_capacity(n);
    let mut coefficients = Vec::with_capacity(n);
    for _ in 0..n {
        let a = 0.5 + rng.random::<f64>();
        let q = 0.3 * rng.random::<f64>();
        generators.push(&b * Complex64::new(a, 0.0) - &b2 * Complex64::new(q, 0.0));
        coefficients.push((a, q));
    }
    let points = mu
        .iter()
        .map(|&m| coefficients.iter().map(|&(a, q)| Complex64::new(a * m - q * m * m, 0.0)).collect())
        .collect();
    Ok((OperatorTuple::new(generators)?, points))
}

fn is_normal(a: &CMatrix) -> bool {
    let ah = a.adjoint();
    let scale = frobenius(a);
    frobenius(&(a * &ah - &ah * a)) <= 1e-12 * scale * scale
}

/// Certified `M_j ≥ sup_{t ≥ 0} ‖e^{tA_j}‖`: `cond(P)` for spectral tuples,
/// 1 for normal generators, otherwise a sampled supremum with a 1% margin.
pub fn estimate_bound(tuple: &OperatorTuple, j: usize) -> Result<f64> {
    if j >= tuple.n() {
        return Err(Error::DimensionMismatch { expected: tuple.n(), found: j });
    }
    if let Some(sd) = tuple.spectral() {
        return Ok(sd.condition.max(1.0));
    }
    let a = tuple.generator(j);
    let norm = op_norm(a);
    if norm == 0.0 {
        return Ok(1.0);
    }
    if let Some(z) = eigenvalues(a).into_iter().find(|z| z.re > 1e-9 * (1.0 + norm)) {
        return Err(Error::Unbounded(format!("generator {j} has eigenvalue {z} with positive real part")));
    }
    if is_normal(a) {
        return Ok(1.0);
    }
    sampled_sup(a, norm).map(|m| (1.01 * m).max(1.0))
}

fn sampled_sup(a: &CMatrix, norm: f64) -> Result<f64> {
    let f = |t: f64| op_norm(&expm(&(a * Complex64::new(t, 0.0))));
    let ratio = 2f64.powf(0.25);
    let mut t = 1e-3 / norm;
    let t_max = 1e6 / norm;
    let mut best = (1.0, 0.0);
    let mut samples = vec![(0.0, 1.0)];
    let mut last_octave = 1.0;
    while t < t_max {
        let v = f(t);
        samples.push((t, v));
        if v > best.0 {
            best = (v, t);
        }
        if v < 1e-2 * best.0.min(1.0) {
            break;
        }
        if samples.len() % 4 == 0 {
            last_octave = v;
        }
        t *= ratio;
    }
    if t >= t_max && samples.last().map(|s| s.1).unwrap_or(1.0) > 1.01 * last_octave.max(1.0) {
        return Err(Error::Unbounded("sampled semigroup norms keep growing".into()));
    }
    if best.1 > 0.0 {
        let (mut lo, mut hi) = (best.1 / ratio, best.1 * ratio);
        let g = 0.5 * (5f64.sqrt() - 1.0);
        let mut x1 = hi - g * (hi - lo);
        let mut x2 = lo + g * (hi - lo);
        let (mut f1, mut f2) = (f(x1), f(x2));
        for _ in 0..40 {
            if f1 > f2 {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - g * (hi - lo);
                f1 = f(x1);
            } else {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + g * (hi - lo);
                f2 = f(x2);
            }
        }
        best.0 = best.0.max(f1).max(f2);
    }
    Ok(best.0)
}

/// Largest mode count of [`fourier_translation_model`]; generators are
/// stored densely.
pub const MAX_FOURIER_MODES: usize = 2048;

/// Diagonal tuple on `(2K+1)ⁿ` Fourier modes, `A_j = diag(i·k_j)`: a finite
/// surrogate for the partial-derivative generators of the translation group.
pub fn fourier_translation_model(cutoff: usize, n: usize) -> Result<OperatorTuple> {
    if cutoff == 0 || n == 0 {
        return Err(Error::InvalidParameter("Fourier model needs K ≥ 1 and n ≥ 1".into()));
    }
    let side = 2 * cutoff + 1;
    let d = side.checked_pow(n as u32).filter(|&d| d <= MAX_FOURIER_MODES).ok_or_else(|| {
        Error::InvalidParameter(format!("(2K+1)^n = {side}^{n} modes exceed the supported size"))
    })?;
    let diagonals: Vec<Vec<Complex64>> = (0..n)
        .map(|j| {
            (0..d)
                .map(|idx| {
                    let k = (idx / side.pow(j as u32)) % side;
                    Complex64::new(0.0, k as f64 - cutoff as f64)
                })
                .collect()
        })
        .collect();
    let generators = diagonals.iter().map(|diag| diagonal(diag)).collect();
    let spectral = SpectralData { basis: identity(d), inverse: identity(d), diagonals, condition: 1.0 };
    Ok(OperatorTuple { generators, bounds: vec![1.0; n], commutator_residual: 0.0, spectral: Some(spectral) })
}

/// Spectrum of a diagonal operator on a sequence space.
#[derive(Debug, Clone, PartialEq)]
pub enum RaySpectrum {
    /// `{r·e^{iθ} : r > 0}`
    Ray(f64),
    Points(Vec<Complex64>),
}

/// Lazily represented diagonal generator; norms of `I − T(t)` are suprema
/// over the spectrum, never over a truncation.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalRayModel {
    pub spectrum: RaySpectrum,
}

/// Grid size of the scan in [`holomorphy_defect_ray`].
pub const DEFAULT_RAY_RESOLUTION: usize = 4000;

impl DiagonalRayModel {
    pub fn ray(theta: f64) -> Result<Self> {
        check_angle(theta)?;
        Ok(Self { spectrum: RaySpectrum::Ray(theta) })
    }

    pub fn points(points: Vec<Complex64>) -> Result<Self> {
        if points.iter().any(|z| z.re > 0.0) {
            return Err(Error::Domain("spectrum must lie in Re z ≤ 0".into()));
        }
        Ok(Self { spectrum: RaySpectrum::Points(points) })
    }

    /// `‖I − T(t)‖ = sup_{z ∈ σ} |1 − e^{tz}|`.
    pub fn norm_i_minus_t(&self, t: f64) -> Result<f64> {
        match &self.spectrum {
            RaySpectrum::Ray(theta) => holomorphy_defect_ray(*theta, DEFAULT_RAY_RESOLUTION),
            RaySpectrum::Points(p) => Ok(p.iter().map(|z| (1.0 - (z * t).exp()).norm()).fold(0.0, f64::max)),
        }
    }

    /// `limsup_{t→0+} ‖I − T(t)‖`.
    pub fn defect(&self) -> Result<f64> {
        match &self.spectrum {
            RaySpectrum::Ray(theta) => holomorphy_defect_ray(*theta, DEFAULT_RAY_RESOLUTION),
            // finitely many points: T is norm continuous
            RaySpectrum::Points(_) => Ok(0.0),
        }
    }
}

fn check_angle(theta: f64) -> Result<()> {
    let eps = 1e-12;
    if !(theta >= PI / 2.0 - eps && theta <= 1.5 * PI + eps) {
        return Err(Error::Domain(format!("ray angle {theta} outside [π/2, 3π/2]")));
    }
    Ok(())
}

/// `sup_{ρ>0} |1 − e^{ρe^{iθ}}|`, which equals `limsup_{t→0+} ‖I − T(t)‖`
/// for the diagonal model with spectrum on the ray of angle `θ`.
pub fn holomorphy_defect_ray(theta: f64, resolution: usize) -> Result<f64> {
    check_angle(theta)?;
    let (s, c) = theta.sin_cos();
    let c = c.min(0.0);
    let s = s.abs();
    let f = |rho: f64| (1.0 - Complex64::new(rho * c, rho * s).exp()).norm();
    if s < 1e-15 {
        // 1 − e^{−ρ} increases to 1
        return Ok(1.0);
    }
    // beyond the first two oscillations |1 − e^{ρe^{iθ}}| ≤ 1 + e^{ρc}
    // stays below the first maximum
    let mut rho_max = 4.0 * PI / s;
    if c < 0.0 {
        rho_max = rho_max.min(40.0 / -c).max(2.0 * PI / s);
    }
    let m = resolution.max(16);
    let h = rho_max / m as f64;
    let (mut best, mut at) = (0.0, 0.0);
    for k in 1..=m {
        let rho = k as f64 * h;
        let v = f(rho);
        if v > best {
            best = v;
            at = rho;
        }
    }
    let (mut lo, mut hi) = ((at - h).max(0.0), at + h);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..100 {
        let x1 = hi - g * (hi - lo);
        let x2 = lo + g * (hi - lo);
        if f(x1) > f(x2) {
            hi = x2;
        } else {
            lo = x1;
        }
    }
    best = best.max(f(0.5 * (lo + hi)));
    if c < 0.0 {
        best = best.max(1.0);
    }
    Ok(best.min(2.0))
}
