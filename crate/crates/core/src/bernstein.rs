//! Negative Bernstein functions of several variables, stored as Lévy triples
//! `(c₀, c₁, μ)`:
//!
//! ```text
//!     ψ(s) = c₀ + c₁·s + ∫ (e^{s·u} − 1) dμ(u),   Re sⱼ ≤ 0.
//! ```
//!
//! Measures are structural: finitely many atoms plus parametric densities
//! carried by rays `u = r·w` in the closed orthant. Catalog members also
//! carry an analytic evaluator which is kept independent of the measure, so
//! the two evaluation paths can be checked against each other.

use std::fmt;

use num_complex::Complex64;
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::ray::{ray_integral, RayDensity, ScalarKernel};

/// Default absolute tolerance of the Lévy quadrature.
pub const LEVY_TOL: f64 = 1e-10;

/// Slack allowed on the sign of `Re sⱼ` before an argument is rejected.
const DOMAIN_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct Atom {
    pub location: Vec<f64>,
    pub mass: f64,
}

/// Where a density lives inside the orthant.
#[derive(Debug, Clone, PartialEq)]
pub enum Support {
    /// Coordinate axis `j`, parametrised by `u_j = r`.
    Axis(usize),
    /// Ray `u = r·w`.
    Ray(Vec<f64>),
}

/// `m(r) = C·r^{−1−α}·e^{−b r}` on `r > 0`.
///
/// `α < 1` keeps `∫ min(r, 1) m` finite; `α ≤ 0` needs `b > 0` for a finite
/// tail. The origin singularity exponent is `1 + α`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TemperedDensity {
    pub coef: f64,
    pub alpha: f64,
    pub rate: f64,
}

impl TemperedDensity {
    pub fn new(coef: f64, alpha: f64, rate: f64) -> Result<Self> {
        let d = Self { coef, alpha, rate };
        d.validate()?;
        Ok(d)
    }

    fn validate(&self) -> Result<()> {
        if !(self.coef >= 0.0 && self.coef.is_finite()) {
            return Err(Error::InvalidParameter(format!("density coefficient {} must be finite and nonnegative", self.coef)));
        }
        if !(self.alpha > -1.0 && self.alpha < 1.0) {
            return Err(Error::InvalidParameter(format!("density exponent α = {} outside (−1, 1)", self.alpha)));
        }
        if !(self.rate >= 0.0 && self.rate.is_finite()) {
            return Err(Error::InvalidParameter(format!("tempering rate {} must be finite and nonnegative", self.rate)));
        }
        if self.alpha <= 0.0 && self.rate == 0.0 {
            return Err(Error::InvalidParameter("α ≤ 0 requires a positive tempering rate".into()));
        }
        Ok(())
    }

    pub fn singularity_exponent(&self) -> f64 {
        1.0 + self.alpha
    }

    pub fn eval(&self, r: f64) -> f64 {
        self.coef * r.powf(-1.0 - self.alpha) * (-self.rate * r).exp()
    }

    /// Total mass, finite only for `α < 0`.
    pub fn total_mass(&self) -> f64 {
        if self.coef == 0.0 {
            0.0
        } else if self.alpha < 0.0 {
            self.coef * gamma(-self.alpha) * self.rate.powf(self.alpha)
        } else {
            f64::INFINITY
        }
    }

    /// `∫ r·m(r) dr`, finite iff the density is tempered.
    pub fn first_moment(&self) -> f64 {
        if self.coef == 0.0 {
            0.0
        } else if self.rate > 0.0 {
            self.coef * gamma(1.0 - self.alpha) * self.rate.powf(self.alpha - 1.0)
        } else {
            f64::INFINITY
        }
    }

    pub(crate) fn ray_density(&self) -> RayDensity {
        RayDensity::Levy { coef: self.coef, alpha: self.alpha, rate: self.rate }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityPart {
    pub direction: Vec<f64>,
    pub density: TemperedDensity,
}

impl DensityPart {
    pub fn support(&self) -> Support {
        let mut nonzero = self.direction.iter().enumerate().filter(|(_, &w)| w != 0.0);
        match (nonzero.next(), nonzero.next()) {
            (Some((j, 1.0)), None) => Support::Axis(j),
            _ => Support::Ray(self.direction.clone()),
        }
    }
}

/// Positive measure on `ℝ₊ⁿ \ {0}`.
#[derive(Debug, Clone, PartialEq)]
pub struct LevyMeasure {
    pub dimension: usize,
    pub atoms: Vec<Atom>,
    pub densities: Vec<DensityPart>,
}

fn check_direction(w: &[f64], dimension: usize) -> Result<()> {
    if w.len() != dimension {
        return Err(Error::DimensionMismatch { expected: dimension, found: w.len() });
    }
    if w.iter().any(|&x| !(x >= 0.0 && x.is_finite())) {
        return Err(Error::InvalidParameter("directions and atom locations must lie in the closed orthant".into()));
    }
    if w.iter().all(|&x| x == 0.0) {
        return Err(Error::InvalidParameter("the measure may not charge the origin".into()));
    }
    Ok(())
}

impl LevyMeasure {
    pub fn empty(dimension: usize) -> Self {
        Self { dimension, atoms: Vec::new(), densities: Vec::new() }
    }

    pub fn with_atom(mut self, location: Vec<f64>, mass: f64) -> Result<Self> {
        check_direction(&location, self.dimension)?;
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(Error::InvalidParameter(format!("atom mass {mass} must be positive")));
        }
        self.atoms.push(Atom { location, mass });
        Ok(self)
    }

    pub fn with_density(mut self, direction: Vec<f64>, density: TemperedDensity) -> Result<Self> {
        check_direction(&direction, self.dimension)?;
        density.validate()?;
        self.densities.push(DensityPart { direction, density });
        Ok(self)
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty() && self.densities.iter().all(|d| d.density.coef == 0.0)
    }

    /// `μ(ℝ₊ⁿ \ {0})`; infinite as soon as a density is not integrable at 0.
    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.mass).sum::<f64>()
            + self.densities.iter().map(|d| d.density.total_mass()).sum::<f64>()
    }

    /// `∫ u_j dμ(u)`.
    pub fn first_moment(&self, j: usize) -> f64 {
        let atoms: f64 = self.atoms.iter().map(|a| a.mass * a.location[j]).sum();
        let dens: f64 = self
            .densities
            .iter()
            .filter(|d| d.direction[j] > 0.0)
            .map(|d| d.direction[j] * d.density.first_moment())
            .sum();
        atoms + dens
    }

    pub(crate) fn scaled(&self, c: f64) -> Self {
        Self {
            dimension: self.dimension,
            atoms: self.atoms.iter().map(|a| Atom { location: a.location.clone(), mass: c * a.mass }).collect(),
            densities: self
                .densities
                .iter()
                .map(|d| DensityPart {
                    direction: d.direction.clone(),
                    density: TemperedDensity { coef: c * d.density.coef, ..d.density },
                })
                .collect(),
        }
    }

    /// Pushforward under a linear map of the orthant into `ℝ₊^dimension`.
    pub(crate) fn mapped(&self, dimension: usize, map: impl Fn(&[f64]) -> Vec<f64>) -> Self {
        Self {
            dimension,
            atoms: self.atoms.iter().map(|a| Atom { location: map(&a.location), mass: a.mass }).collect(),
            densities: self
                .densities
                .iter()
                .map(|d| DensityPart { direction: map(&d.direction), density: d.density })
                .collect(),
        }
    }

    /// `∫ (e^{s·u} − 1) dμ(u)` by atom sums and ray quadrature; returns the
    /// value and the accumulated error estimate.
    pub fn integral(&self, s: &[Complex64], tol: f64) -> Result<(Complex64, f64)> {
        let mut value = Complex64::new(0.0, 0.0);
        let mut error = 0.0;
        for atom in &self.atoms {
            value += atom.mass * (dot(s, &atom.location).exp() - 1.0);
        }
        for part in &self.densities {
            let z = dot(s, &part.direction);
            if z.norm() == 0.0 || part.density.coef == 0.0 {
                continue;
            }
            let q = ray_integral(&ScalarKernel::rotated(z), &part.density.ray_density(), tol)?;
            value += q.value;
            error += q.error;
        }
        Ok((value, error))
    }
}

pub(crate) fn dot(s: &[Complex64], w: &[f64]) -> Complex64 {
    s.iter().zip(w).map(|(z, &x)| z * x).sum()
}

/// Analytic evaluators for catalog members and their combinations.
#[derive(Debug, Clone, PartialEq)]
pub enum ClosedForm {
    /// `−(−s)^α`
    FractionalPower(f64),
    /// `−log(1 − s)`
    Log1m,
    /// `b^α − (b − s)^α`
    TemperedStable { alpha: f64, rate: f64 },
    /// `λ·(e^{h s} − 1)`
    Poisson { rate: f64, jump: f64 },
    Linear(Vec<f64>),
    Constant(f64),
    /// `φ(w·s)`
    Lift { inner: Box<ClosedForm>, weights: Vec<f64> },
    /// `ψ₁(s₁..s_m) + ψ₂(s_{m+1}..)`
    DirectSum { left: Box<ClosedForm>, right: Box<ClosedForm>, split: usize },
    Cone(Vec<(f64, ClosedForm)>),
    /// `ψ(c·s)`
    Rescale { inner: Box<ClosedForm>, factor: f64 },
}

impl ClosedForm {
    pub fn eval(&self, s: &[Complex64]) -> Complex64 {
        match self {
            ClosedForm::FractionalPower(alpha) => {
                let z = -s[0];
                if z.norm() == 0.0 {
                    Complex64::new(0.0, 0.0)
                } else {
                    -z.powf(*alpha)
                }
            }
            ClosedForm::Log1m => -(1.0 - s[0]).ln(),
            ClosedForm::TemperedStable { alpha, rate } => {
                let b = Complex64::new(*rate, 0.0);
                b.powf(*alpha) - (b - s[0]).powf(*alpha)
            }
            ClosedForm::Poisson { rate, jump } => *rate * ((*jump * s[0]).exp() - 1.0),
            ClosedForm::Linear(c1) => dot(s, c1),
            ClosedForm::Constant(c0) => Complex64::new(*c0, 0.0),
            ClosedForm::Lift { inner, weights } => inner.eval(&[dot(s, weights)]),
            ClosedForm::DirectSum { left, right, split } => left.eval(&s[..*split]) + right.eval(&s[*split..]),
            ClosedForm::Cone(terms) => terms.iter().map(|(c, f)| *c * f.eval(s)).sum(),
            ClosedForm::Rescale { inner, factor } => {
                let scaled: Vec<Complex64> = s.iter().map(|z| z * *factor).collect();
                inner.eval(&scaled)
            }
        }
    }
}

/// A function of class 𝒯ₙ given by its Lévy triple.
#[derive(Debug, Clone, PartialEq)]
pub struct BernsteinFunction {
    pub dimension: usize,
    pub c0: f64,
    pub c1: Vec<f64>,
    pub measure: LevyMeasure,
    pub closed_form: Option<ClosedForm>,
    pub catalog_id: Option<String>,
}

impl fmt::Display for BernsteinFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.catalog_id {
            Some(id) => f.write_str(id),
            None => write!(f, "levy_triple(n={})", self.dimension),
        }
    }
}

impl BernsteinFunction {
    /// Function given only by its triple; evaluation goes through quadrature.
    pub fn from_triple(c0: f64, c1: Vec<f64>, measure: LevyMeasure) -> Result<Self> {
        if !(c0 <= 0.0 && c0.is_finite()) {
            return Err(Error::InvalidParameter(format!("c₀ = {c0} must be finite and ≤ 0")));
        }
        if c1.len() != measure.dimension {
            return Err(Error::DimensionMismatch { expected: measure.dimension, found: c1.len() });
        }
        if c1.iter().any(|&x| !(x >= 0.0 && x.is_finite())) {
            return Err(Error::InvalidParameter("drift c₁ must lie in the closed orthant".into()));
        }
        Ok(Self { dimension: measure.dimension, c0, c1, measure, closed_form: None, catalog_id: None })
    }

    fn tagged(mut self, closed_form: ClosedForm, id: String) -> Self {
        self.closed_form = Some(closed_form);
        self.catalog_id = Some(id);
        self
    }

    /// `ψ(s) = −(−s)^α`, `0 < α ≤ 1`.
    pub fn fractional_power(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::InvalidParameter(format!("fractional power α = {alpha} outside (0, 1]")));
        }
        let base = if alpha == 1.0 {
            Self::from_triple(0.0, vec![1.0], LevyMeasure::empty(1))?
        } else {
            let coef = alpha / gamma(1.0 - alpha);
            let m = LevyMeasure::empty(1).with_density(vec![1.0], TemperedDensity::new(coef, alpha, 0.0)?)?;
            Self::from_triple(0.0, vec![0.0], m)?
        };
        Ok(base.tagged(ClosedForm::FractionalPower(alpha), format!("fractional_power({alpha})")))
    }

    /// `ψ(s) = −log(1 − s)`.
    pub fn log1m() -> Self {
        let m = LevyMeasure::empty(1)
            .with_density(vec![1.0], TemperedDensity { coef: 1.0, alpha: 0.0, rate: 1.0 })
            .expect("valid catalog density");
        Self::from_triple(0.0, vec![0.0], m).expect("valid catalog triple").tagged(ClosedForm::Log1m, "log1m".into())
    }

    /// `ψ(s) = b^α − (b − s)^α`, `0 < α < 1`, `b > 0`.
    pub fn tempered_stable(alpha: f64, rate: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidParameter(format!("tempered stable α = {alpha} outside (0, 1)")));
        }
        if !(rate > 0.0 && rate.is_finite()) {
            return Err(Error::InvalidParameter(format!("tempering rate {rate} must be positive")));
        }
        let coef = alpha / gamma(1.0 - alpha);
        let m = LevyMeasure::empty(1).with_density(vec![1.0], TemperedDensity::new(coef, alpha, rate)?)?;
        Ok(Self::from_triple(0.0, vec![0.0], m)?
            .tagged(ClosedForm::TemperedStable { alpha, rate }, format!("tempered_stable({alpha}, {rate})")))
    }

    /// `ψ(s) = λ(e^{hs} − 1)`: a single atom of mass `λ` at `h`.
    pub fn poisson(rate: f64, jump: f64) -> Result<Self> {
        if !(jump > 0.0 && jump.is_finite()) {
            return Err(Error::InvalidParameter(format!("jump size {jump} must be positive")));
        }
        let m = LevyMeasure::empty(1).with_atom(vec![jump], rate)?;
        let id = if rate == 1.0 && jump == 1.0 { "poisson".to_string() } else { format!("poisson({rate}, {jump})") };
        Ok(Self::from_triple(0.0, vec![0.0], m)?.tagged(ClosedForm::Poisson { rate, jump }, id))
    }

    /// `ψ(s) = c₁·s`.
    pub fn linear(c1: Vec<f64>) -> Result<Self> {
        if c1.is_empty() {
            return Err(Error::InvalidParameter("linear function needs at least one variable".into()));
        }
        let id = format!("linear({})", join(&c1));
        let n = c1.len();
        Ok(Self::from_triple(0.0, c1.clone(), LevyMeasure::empty(n))?.tagged(ClosedForm::Linear(c1), id))
    }

    /// Constant `ψ = c₀ ≤ 0` in `n` variables.
    pub fn killing(c0: f64, dimension: usize) -> Result<Self> {
        Ok(Self::from_triple(c0, vec![0.0; dimension], LevyMeasure::empty(dimension))?
            .tagged(ClosedForm::Constant(c0), format!("killing({c0})")))
    }

    /// `ψ(s) = −(−w·s)^α`.
    pub fn diagonal_stable(alpha: f64, w: Vec<f64>) -> Result<Self> {
        let id = format!("diagonal_stable({alpha}; {})", join(&w));
        let mut f = diagonal_lift(&Self::fractional_power(alpha)?, w)?;
        f.catalog_id = Some(id);
        Ok(f)
    }

    fn check_point(&self, s: &[Complex64]) -> Result<()> {
        if s.len() != self.dimension {
            return Err(Error::DimensionMismatch { expected: self.dimension, found: s.len() });
        }
        if let Some(z) = s.iter().find(|z| !(z.re <= DOMAIN_SLACK) || !z.im.is_finite()) {
            return Err(Error::Domain(format!("Re s = {} must be ≤ 0", z.re)));
        }
        Ok(())
    }

    /// `ψ(s)`, analytic when a closed form exists, otherwise by quadrature.
    pub fn eval(&self, s: &[Complex64]) -> Result<Complex64> {
        self.check_point(s)?;
        match &self.closed_form {
            Some(cf) => Ok(cf.eval(s)),
            None => self.eval_via_levy(s),
        }
    }

    /// `ψ` at a real point of the closed negative orthant.
    pub fn eval_real(&self, s: &[f64]) -> Result<f64> {
        let z: Vec<Complex64> = s.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        Ok(self.eval(&z)?.re)
    }

    /// `ψ(s)` from the Lévy triple, ignoring any closed form.
    pub fn eval_via_levy(&self, s: &[Complex64]) -> Result<Complex64> {
        Ok(self.eval_via_levy_with_tol(s, LEVY_TOL)?.0)
    }

    /// As [`eval_via_levy`](Self::eval_via_levy), also returning the
    /// quadrature error estimate.
    pub fn eval_via_levy_with_tol(&self, s: &[Complex64], tol: f64) -> Result<(Complex64, f64)> {
        self.check_point(s)?;
        let (integral, error) = self.measure.integral(s, tol)?;
        Ok((self.c0 + dot(s, &self.c1) + integral, error))
    }

    /// `ψ(−0)`, which equals `c₀`.
    pub fn value_at_zero(&self) -> f64 {
        self.c0
    }

    /// `∂ψ/∂s_j(−0) = c₁ʲ + ∫ u_j dμ`, possibly infinite.
    pub fn derivative_at_zero(&self, j: usize) -> f64 {
        self.c1[j] + self.measure.first_moment(j)
    }

    /// `sup |ψ|` over the closed negative orthant.
    pub fn sup_norm(&self) -> f64 {
        if self.c1.iter().any(|&c| c > 0.0) {
            return f64::INFINITY;
        }
        self.c0.abs() + self.measure.total_mass()
    }

    pub fn is_bounded(&self) -> bool {
        self.sup_norm().is_finite()
    }
}

fn join(v: &[f64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
}

/// `Σ cᵢψᵢ` with `cᵢ ≥ 0`; terms with zero coefficient are dropped.
pub fn cone_combine(terms: &[(f64, BernsteinFunction)]) -> Result<BernsteinFunction> {
    let first = terms.first().ok_or_else(|| Error::InvalidParameter("empty cone combination".into()))?;
    let n = first.1.dimension;
    let mut c0 = 0.0;
    let mut c1 = vec![0.0; n];
    let mut measure = LevyMeasure::empty(n);
    let mut forms = Vec::new();
    let mut all_closed = true;
    let mut ids = Vec::new();
    for (coef, f) in terms {
        if f.dimension != n {
            return Err(Error::DimensionMismatch { expected: n, found: f.dimension });
        }
        if !(*coef >= 0.0 && coef.is_finite()) {
            return Err(Error::InvalidParameter(format!("cone coefficient {coef} must be nonnegative")));
        }
        if *coef == 0.0 {
            continue;
        }
        c0 += coef * f.c0;
        for (acc, x) in c1.iter_mut().zip(&f.c1) {
            *acc += coef * x;
        }
        let part = f.measure.scaled(*coef);
        measure.atoms.extend(part.atoms);
        measure.densities.extend(part.densities);
        match &f.closed_form {
            Some(cf) => forms.push((*coef, cf.clone())),
            None => all_closed = false,
        }
        ids.push(format!("{coef}*{f}"));
    }
    let mut out = BernsteinFunction::from_triple(c0, c1, measure)?;
    if all_closed {
        out.closed_form = Some(ClosedForm::Cone(forms));
    }
    out.catalog_id = Some(format!("cone_combination({})", ids.join(" + ")));
    Ok(out)
}

/// `ψ(s) = ψ₁(s₁..s_m) + ψ₂(s_{m+1}..s_{m+k})`.
pub fn direct_sum(left: &BernsteinFunction, right: &BernsteinFunction) -> BernsteinFunction {
    let m = left.dimension;
    let n = m + right.dimension;
    let embed_left = |u: &[f64]| {
        let mut v = u.to_vec();
        v.resize(n, 0.0);
        v
    };
    let embed_right = |u: &[f64]| {
        let mut v = vec![0.0; m];
        v.extend_from_slice(u);
        v
    };
    let mut measure = left.measure.mapped(n, embed_left);
    let r = right.measure.mapped(n, embed_right);
    measure.atoms.extend(r.atoms);
    measure.densities.extend(r.densities);
    let mut c1 = left.c1.clone();
    c1.extend_from_slice(&right.c1);
    let closed_form = match (&left.closed_form, &right.closed_form) {
        (Some(a), Some(b)) => Some(ClosedForm::DirectSum { left: Box::new(a.clone()), right: Box::new(b.clone()), split: m }),
        _ => None,
    };
    BernsteinFunction {
        dimension: n,
        c0: left.c0 + right.c0,
        c1,
        measure,
        closed_form,
        catalog_id: Some(format!("direct_sum({left}, {right})")),
    }
}

/// `ψ(s) = φ(w·s)`: the measure of `φ` pushed forward along `r ↦ r·w`.
pub fn diagonal_lift(phi: &BernsteinFunction, w: Vec<f64>) -> Result<BernsteinFunction> {
    if phi.dimension != 1 {
        return Err(Error::DimensionMismatch { expected: 1, found: phi.dimension });
    }
    if w.is_empty() || w.iter().any(|&x| !(x >= 0.0 && x.is_finite())) || w.iter().all(|&x| x == 0.0) {
        return Err(Error::InvalidParameter("lift weights must be nonnegative and not all zero".into()));
    }
    let n = w.len();
    let push = |u: &[f64]| w.iter().map(|x| x * u[0]).collect::<Vec<f64>>();
    let measure = phi.measure.mapped(n, push);
    let c1 = w.iter().map(|x| x * phi.c1[0]).collect();
    let closed_form = phi.closed_form.as_ref().map(|cf| ClosedForm::Lift { inner: Box::new(cf.clone()), weights: w.clone() });
    Ok(BernsteinFunction {
        dimension: n,
        c0: phi.c0,
        c1,
        measure,
        closed_form,
        catalog_id: Some(format!("diagonal_lift({phi}; {})", join(&w))),
    })
}

/// `ψ(c·s)` for `c > 0`.
pub fn rescale(psi: &BernsteinFunction, factor: f64) -> Result<BernsteinFunction> {
    if !(factor > 0.0 && factor.is_finite()) {
        return Err(Error::InvalidParameter(format!("rescaling factor {factor} must be positive")));
    }
    let measure = psi.measure.mapped(psi.dimension, |u| u.iter().map(|x| x * factor).collect());
    Ok(BernsteinFunction {
        dimension: psi.dimension,
        c0: psi.c0,
        c1: psi.c1.iter().map(|x| x * factor).collect(),
        measure,
        closed_form: psi.closed_form.as_ref().map(|cf| ClosedForm::Rescale { inner: Box::new(cf.clone()), factor }),
        catalog_id: Some(format!("rescale({psi}; {factor})")),
    })
}

/// Axis-aligned lattice strictly inside `(−∞, 0)ⁿ`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleGrid {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub points_per_axis: usize,
}

impl SampleGrid {
    pub fn cube(n: usize, lower: f64, upper: f64, points_per_axis: usize) -> Self {
        Self { lower: vec![lower; n], upper: vec![upper; n], points_per_axis }
    }

    pub fn dimension(&self) -> usize {
        self.lower.len()
    }

    pub fn points(&self) -> Vec<Vec<f64>> {
        let n = self.dimension();
        let p = self.points_per_axis.max(1);
        let total = p.pow(n as u32);
        (0..total)
            .map(|mut idx| {
                (0..n)
                    .map(|j| {
                        let k = idx % p;
                        idx /= p;
                        if p == 1 {
                            self.lower[j]
                        } else {
                            self.lower[j] + (self.upper[j] - self.lower[j]) * k as f64 / (p - 1) as f64
                        }
                    })
                    .collect()
            })
            .collect()
    }
}

/// Which sign pattern is being certified.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MonotonicityMode {
    /// `f ≤ 0` and the first partial derivatives absolutely monotone.
    Bernstein,
    /// `f ≥ 0` together with its partial derivatives.
    AbsolutelyMonotone,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub point: Vec<f64>,
    /// Difference order per variable; all zeros marks the sign condition.
    pub multi_index: Vec<usize>,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonotonicityReport {
    pub passed: bool,
    pub checked: usize,
    pub violations: Vec<Violation>,
}

/// Relative tolerance of each forward difference.
pub const DIFFERENCE_TOL: f64 = 1e-7;

/// Certifies the sign pattern on a lattice with mixed forward differences
/// up to `order` for the derivatives (so up to `order + 1` differences of
/// `f` itself in the Bernstein mode).
pub fn check_absolute_monotonicity<F>(f: F, grid: &SampleGrid, order: usize, mode: MonotonicityMode) -> Result<MonotonicityReport>
where
    F: Fn(&[f64]) -> f64,
{
    let n = grid.dimension();
    if grid.upper.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: grid.upper.len() });
    }
    if grid.upper.iter().chain(&grid.lower).any(|&x| !(x < 0.0)) {
        return Err(Error::GridOnBoundary);
    }
    let max_order = match mode {
        MonotonicityMode::Bernstein => order + 1,
        MonotonicityMode::AbsolutelyMonotone => order,
    };
    let side = max_order + 1;
    let steps: Vec<f64> = (0..n)
        .map(|j| {
            let width = (grid.upper[j] - grid.lower[j]).abs();
            1e-2 * if width > 0.0 { width } else { grid.lower[j].abs() }
        })
        .collect();
    let offsets: Vec<Vec<usize>> = lattice(n, side);
    let indices: Vec<&Vec<usize>> = offsets.iter().filter(|m| (1..=max_order).contains(&m.iter().sum())).collect();
    let mut violations = Vec::new();
    let mut checked = 0;
    for p in grid.points() {
        let h: Vec<f64> = (0..n).map(|j| steps[j].min(-p[j] / (side as f64 + 1.0))).collect();
        let values: Vec<f64> = offsets
            .iter()
            .map(|m| {
                let q: Vec<f64> = (0..n).map(|j| p[j] + m[j] as f64 * h[j]).collect();
                f(&q)
            })
            .collect();
        let f0 = values[0];
        let scale = f0.abs().max(1.0);
        checked += 1;
        let sign_ok = match mode {
            MonotonicityMode::Bernstein => f0 <= 1e-12 * scale,
            MonotonicityMode::AbsolutelyMonotone => f0 >= -1e-12 * scale,
        };
        if !sign_ok || !f0.is_finite() {
            violations.push(Violation { point: p.clone(), multi_index: vec![0; n], value: f0 });
        }
        for m in &indices {
            checked += 1;
            let d = forward_difference(&values, m, side);
            if !(d >= -DIFFERENCE_TOL * scale) {
                violations.push(Violation { point: p.clone(), multi_index: (*m).clone(), value: d });
            }
        }
    }
    Ok(MonotonicityReport { passed: violations.is_empty(), checked, violations })
}

/// All multi-indices in `{0..side−1}ⁿ`, first coordinate fastest.
fn lattice(n: usize, side: usize) -> Vec<Vec<usize>> {
    let total = side.pow(n as u32);
    (0..total)
        .map(|mut idx| {
            (0..n)
                .map(|_| {
                    let k = idx % side;
                    idx /= side;
                    k
                })
                .collect()
        })
        .collect()
}

fn flat(m: &[usize], side: usize) -> usize {
    m.iter().rev().fold(0, |acc, &k| acc * side + k)
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `Δ^m f(p) = Σ_{l ≤ m} (−1)^{|m|−|l|} Π C(mⱼ, lⱼ) f(p + l·h)`.
fn forward_difference(values: &[f64], m: &[usize], side: usize) -> f64 {
    let total: usize = m.iter().sum();
    let mut acc = 0.0;
    for l in lattice(m.len(), side) {
        if l.iter().zip(m).any(|(a, b)| a > b) {
            continue;
        }
        let sign = if (total - l.iter().sum::<usize>()).is_multiple_of(2) { 1.0 } else { -1.0 };
        let weight: f64 = m.iter().zip(&l).map(|(&a, &b)| binomial(a, b)).product();
        acc += sign * weight * values[flat(&l, side)];
    }
    acc
}
