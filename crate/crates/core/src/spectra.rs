//! Joint spectra of commuting tuples and checks of the spectral mapping
//! inclusions for `ψ(A)`.
//!
//! In finite dimension every joint approximate eigenvalue is a joint
//! eigenvalue (the unit sphere is compact), and a tuple `λ` lies in the
//! residual spectrum iff the rows of `[(λ₁ − A₁) ⋯ (λₙ − Aₙ)]` are linearly
//! dependent, i.e. iff there is a common left eigenvector. All points carry
//! certificates computed from orthonormal bases of joint eigenspaces.

use std::fmt;

use nalgebra::SVD;
use num_complex::Complex64;

use crate::bernstein::BernsteinFunction;
use crate::calculus::apply_psi;
use crate::error::{Error, Result};
use crate::linalg::{cluster, eigenvalues, identity, null_space, op_norm, smallest_singular, CMatrix, CVector};
use crate::semigroup::OperatorTuple;

/// Default certificate tolerance, relative to `1 + max_j ‖A_j‖`.
pub const CERTIFICATE_TOL: f64 = 1e-6;
/// Point-matching tolerance, relative to `1 + |ψ(λ)|`.
pub const MATCH_TOL: f64 = 1e-6;
/// Minimal `|f(x)| / (‖f‖‖x‖)` for a left/right pairing to count.
pub const PAIRING_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    Pass,
    Fail,
    /// The hypothesis of the statement does not hold for this input.
    Inapplicable,
    /// Close to the threshold; reported as evidence rather than decided.
    Evidence,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::Inapplicable => "INAPPLICABLE",
            Verdict::Evidence => "EVIDENCE",
        })
    }
}

/// Orthonormal basis of a joint (left or right) eigenspace with its
/// residual `max_j ‖(A_j − λ_j)X‖`.
#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    pub basis: CMatrix,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralPoint {
    pub lambda: Vec<Complex64>,
    /// Right joint eigenspace (point spectrum).
    pub right: Option<Certificate>,
    /// Left joint eigenspace (residual spectrum).
    pub left: Option<Certificate>,
    /// `min_{‖x‖=1} (Σ_j ‖(A_j − λ_j)x‖²)^{½}` (approximate spectrum).
    pub approximate_residual: Option<f64>,
    /// Smallest singular value of `[(λ₁ − A₁) ⋯ (λₙ − Aₙ)]`.
    pub corank_residual: Option<f64>,
    pub verdict: Verdict,
}

impl SpectralPoint {
    fn bare(lambda: Vec<Complex64>) -> Self {
        Self { lambda, right: None, left: None, approximate_residual: None, corank_residual: None, verdict: Verdict::Pass }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct JointSpectrumResult {
    pub points: Vec<SpectralPoint>,
    /// Absolute tolerance the certificates were checked against.
    pub tolerance: f64,
}

impl JointSpectrumResult {
    pub fn lambdas(&self) -> Vec<Vec<Complex64>> {
        self.points.iter().map(|p| p.lambda.clone()).collect()
    }

    /// Index of a point within `tol` (max-norm) of `lambda`.
    pub fn find(&self, lambda: &[Complex64], tol: f64) -> Option<usize> {
        self.points.iter().position(|p| distance(&p.lambda, lambda) <= tol)
    }
}

pub(crate) fn distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn tuple_scale(a: &OperatorTuple) -> f64 {
    1.0 + a.generators().iter().map(op_norm).fold(0.0, f64::max)
}

fn eigenspace_residual(a: &OperatorTuple, basis: &CMatrix, lambda: &[Complex64]) -> f64 {
    a.generators()
        .iter()
        .zip(lambda)
        .map(|(g, &l)| op_norm(&(g * basis - basis * l)))
        .fold(0.0, f64::max)
}

fn lexicographic(a: &[Complex64], b: &[Complex64]) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        let o = x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im));
        if o != std::cmp::Ordering::Equal {
            return o;
        }
    }
    std::cmp::Ordering::Equal
}

/// Recursive refinement over shared invariant subspaces: the joint
/// eigenspaces of `A₁, …, A_j` are invariant under `A_{j+1}`.
fn refine(a: &OperatorTuple, basis: CMatrix, level: usize, out: &mut Vec<(Vec<Complex64>, CMatrix)>) {
    if level == a.n() {
        // Rayleigh means over the joint eigenspace
        let k = basis.ncols() as f64;
        let lambda = a
            .generators()
            .iter()
            .map(|g| (basis.adjoint() * g * &basis).trace() / k)
            .collect();
        out.push((lambda, basis));
        return;
    }
    let restricted = basis.adjoint() * a.generator(level) * &basis;
    let norm = op_norm(&restricted);
    let values = eigenvalues(&restricted);
    let k = restricted.nrows();
    for group in cluster(&values, 1e-5 * (1.0 + norm)) {
        let mu = group.iter().map(|&i| values[i]).sum::<Complex64>() / group.len() as f64;
        let spread = group.iter().map(|&i| (values[i] - mu).norm()).fold(0.0, f64::max);
        let shifted = &restricted - identity(k) * mu;
        let (vectors, _) = null_space(&shifted, (1e-8 * (1.0 + norm)).max(10.0 * spread), 1);
        refine(a, &basis * vectors, level + 1, out);
    }
}

/// Joint eigenvalues with right eigenspace certificates.
pub fn joint_point_spectrum(a: &OperatorTuple) -> Result<JointSpectrumResult> {
    joint_point_spectrum_with(a, CERTIFICATE_TOL)
}

pub fn joint_point_spectrum_with(a: &OperatorTuple, tol: f64) -> Result<JointSpectrumResult> {
    let tolerance = tol * tuple_scale(a);
    let mut found = Vec::new();
    refine(a, identity(a.dim()), 0, &mut found);
    let mut points: Vec<SpectralPoint> = Vec::new();
    for (lambda, basis) in found {
        let residual = eigenspace_residual(a, &basis, &lambda);
        if residual > tolerance {
            continue;
        }
        // merge points the recursion split by accident
        if let Some(p) = points.iter_mut().find(|p| distance(&p.lambda, &lambda) <= tolerance) {
            let cert = p.right.as_mut().expect("point spectrum entries carry a right certificate");
            let merged = orthonormal_union(&cert.basis, &basis);
            cert.residual = eigenspace_residual(a, &merged, &p.lambda);
            cert.basis = merged;
            continue;
        }
        let mut point = SpectralPoint::bare(lambda);
        point.right = Some(Certificate { basis, residual });
        points.push(point);
    }
    points.sort_by(|p, q| lexicographic(&p.lambda, &q.lambda));
    Ok(JointSpectrumResult { points, tolerance })
}

fn orthonormal_union(x: &CMatrix, y: &CMatrix) -> CMatrix {
    let mut stacked = CMatrix::zeros(x.nrows(), x.ncols() + y.ncols());
    stacked.view_mut((0, 0), (x.nrows(), x.ncols())).copy_from(x);
    stacked.view_mut((0, x.ncols()), (y.nrows(), y.ncols())).copy_from(y);
    let svd = SVD::new(stacked, true, false);
    let u = svd.u.expect("left singular vectors requested");
    let rank = svd.singular_values.iter().filter(|&&s| s > 1e-8).count().max(1);
    u.columns(0, rank).into_owned()
}

/// `[(λ₁ − A₁) ⋯ (λₙ − Aₙ)]`, a `d × nd` matrix.
fn concatenated(a: &OperatorTuple, lambda: &[Complex64]) -> CMatrix {
    let d = a.dim();
    let mut m = CMatrix::zeros(d, d * a.n());
    for (j, (g, &l)) in a.generators().iter().zip(lambda).enumerate() {
        m.view_mut((0, j * d), (d, d)).copy_from(&(identity(d) * l - g));
    }
    m
}

/// Smallest singular value of the concatenated matrix and the matching
/// left singular vector `f`, which satisfies `f*(A_j − λ_j) ≈ 0`.
pub fn left_null_vector(a: &OperatorTuple, lambda: &[Complex64]) -> Result<(f64, CVector)> {
    if lambda.len() != a.n() {
        return Err(Error::DimensionMismatch { expected: a.n(), found: lambda.len() });
    }
    let (sigma, v) = smallest_singular(&concatenated(a, lambda).adjoint());
    Ok((sigma, v))
}

/// `min_{‖x‖=1} (Σ_j ‖(A_j − λ_j)x‖²)^{½}`: smallest singular value of the
/// vertically stacked blocks.
pub fn approximate_residual(a: &OperatorTuple, lambda: &[Complex64]) -> Result<f64> {
    if lambda.len() != a.n() {
        return Err(Error::DimensionMismatch { expected: a.n(), found: lambda.len() });
    }
    Ok(smallest_singular(&stacked(a, lambda)).0)
}

/// `[(A₁ − λ₁); …; (Aₙ − λₙ)]`, an `nd × d` matrix.
fn stacked(a: &OperatorTuple, lambda: &[Complex64]) -> CMatrix {
    let d = a.dim();
    let mut m = CMatrix::zeros(d * a.n(), d);
    for (j, (g, &l)) in a.generators().iter().zip(lambda).enumerate() {
        m.view_mut((j * d, 0), (d, d)).copy_from(&(g - identity(d) * l));
    }
    m
}

/// Residual spectrum as the conjugated point spectrum of the adjoint tuple,
/// with a co-rank certificate for every point.
pub fn joint_residual_spectrum(a: &OperatorTuple) -> Result<JointSpectrumResult> {
    joint_residual_spectrum_with(a, CERTIFICATE_TOL)
}

pub fn joint_residual_spectrum_with(a: &OperatorTuple, tol: f64) -> Result<JointSpectrumResult> {
    let dual = joint_point_spectrum_with(&a.adjoint(), tol)?;
    let tolerance = dual.tolerance;
    let mut points = Vec::with_capacity(dual.points.len());
    for p in dual.points {
        let lambda: Vec<Complex64> = p.lambda.iter().map(|z| z.conj()).collect();
        let (corank, _) = left_null_vector(a, &lambda)?;
        let mut point = SpectralPoint::bare(lambda);
        point.left = p.right;
        point.corank_residual = Some(corank);
        point.verdict = if corank <= tolerance {
            Verdict::Pass
        } else if corank <= 10.0 * tolerance {
            Verdict::Evidence
        } else {
            Verdict::Fail
        };
        points.push(point);
    }
    points.sort_by(|p, q| lexicographic(&p.lambda, &q.lambda));
    Ok(JointSpectrumResult { points, tolerance })
}

/// Approximate spectrum: the point spectrum, each point re-certified by the
/// stacked smallest singular value.
pub fn joint_approximate_spectrum(a: &OperatorTuple) -> Result<JointSpectrumResult> {
    joint_approximate_spectrum_with(a, CERTIFICATE_TOL)
}

pub fn joint_approximate_spectrum_with(a: &OperatorTuple, tol: f64) -> Result<JointSpectrumResult> {
    let mut result = joint_point_spectrum_with(a, tol)?;
    for p in &mut result.points {
        let r = approximate_residual(a, &p.lambda)?;
        p.approximate_residual = Some(r);
        p.verdict = if r <= result.tolerance { Verdict::Pass } else { Verdict::Fail };
    }
    Ok(result)
}

/// `σ_J = σ_a ∪ σ_R` with certificates merged.
pub fn joint_spectrum(a: &OperatorTuple) -> Result<JointSpectrumResult> {
    joint_spectrum_with(a, CERTIFICATE_TOL)
}

pub fn joint_spectrum_with(a: &OperatorTuple, tol: f64) -> Result<JointSpectrumResult> {
    let approx = joint_approximate_spectrum_with(a, tol)?;
    let residual = joint_residual_spectrum_with(a, tol)?;
    let tolerance = approx.tolerance;
    let mut points = approx.points;
    for r in residual.points {
        match points.iter_mut().find(|p| distance(&p.lambda, &r.lambda) <= tolerance) {
            Some(p) => {
                p.left = r.left;
                p.corank_residual = r.corank_residual;
                if r.verdict != Verdict::Pass && p.verdict == Verdict::Pass {
                    p.verdict = r.verdict;
                }
            }
            None => points.push(r),
        }
    }
    points.sort_by(|p, q| lexicographic(&p.lambda, &q.lambda));
    Ok(JointSpectrumResult { points, tolerance })
}

/// Whether `λ ∈ σ(A₁) × ⋯ × σ(Aₙ)` up to `tol·(1 + |λ_j|)`.
pub fn in_product_of_spectra(a: &OperatorTuple, lambda: &[Complex64], tol: f64) -> bool {
    a.generators().iter().zip(lambda).all(|(g, l)| {
        eigenvalues(g).iter().any(|z| (z - l).norm() <= tol * (1.0 + l.norm()))
    })
}

/// Which inclusion of the mapping theorem is being checked.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MappingPart {
    /// `σ_R(ψ(A)) ⊇ ψ(σ_R(A))`
    Residual = 1,
    /// `σ_p(ψ(A)) ⊇ ψ(σ_p(A))`
    Point = 2,
    /// eigenvalues of `ψ(A)` paired with a joint left eigenvector lie in `ψ(σ_R(A))`
    Paired = 3,
    /// `σ_a(ψ(A)) ⊇ ψ(σ_a(A))`
    Approximate = 4,
    /// `σ(ψ(A)) ⊇ ψ(σ_J(A))`
    Full = 5,
}

impl MappingPart {
    pub fn from_index(k: u8) -> Result<Self> {
        match k {
            1 => Ok(Self::Residual),
            2 => Ok(Self::Point),
            3 => Ok(Self::Paired),
            4 => Ok(Self::Approximate),
            5 => Ok(Self::Full),
            _ => Err(Error::InvalidParameter(format!("mapping part {k} outside 1..=5"))),
        }
    }

    pub fn index(self) -> u8 {
        self as u8
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MappingRow {
    pub lambda: Vec<Complex64>,
    pub image: Complex64,
    /// Eigenvalue of `ψ(A)` closest to `image`.
    pub matched: Option<Complex64>,
    pub distance: f64,
    /// Certificate value the verdict is based on.
    pub residual: f64,
    pub bound: f64,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MappingReport {
    pub part: MappingPart,
    pub applicable: bool,
    pub note: String,
    pub rows: Vec<MappingRow>,
    /// Max distance after greedy matching of `ψ(σ_p(A))` (with multiplicity)
    /// against the eigenvalues of `ψ(A)`; only for tuples with spectral data.
    pub set_distance: Option<f64>,
    pub verdict: Verdict,
}

/// Hypothesis of parts 4 and 5: `Re λ_j < 0` on `σ_a(A)`, or every
/// `∂ψ/∂s_j(−0)` finite (decided from the Lévy triple).
pub fn mapping_hypothesis(psi: &BernsteinFunction, approx: &JointSpectrumResult) -> (bool, String) {
    let interior = approx.points.iter().all(|p| p.lambda.iter().all(|z| z.re < 0.0));
    if interior {
        return (true, "σ_a(A) inside the open left half-plane".into());
    }
    let finite = (0..psi.dimension).all(|j| psi.derivative_at_zero(j).is_finite());
    if finite {
        (true, "∂ψ/∂s_j(−0) finite for all j".into())
    } else {
        (false, "σ_a(A) touches Re λ_j = 0 and some ∂ψ/∂s_j(−0) is infinite".into())
    }
}

/// Checks one part of the mapping theorem, computing `ψ(A)` by quadrature.
pub fn mapping_check(psi: &BernsteinFunction, a: &OperatorTuple, part: MappingPart) -> Result<MappingReport> {
    let psi_a = apply_psi(psi, a)?;
    mapping_check_given(psi, a, &psi_a, part)
}

/// As [`mapping_check`] with a precomputed `ψ(A)`.
pub fn mapping_check_given(psi: &BernsteinFunction, a: &OperatorTuple, psi_a: &CMatrix, part: MappingPart) -> Result<MappingReport> {
    let images_of = |points: &JointSpectrumResult| -> Result<Vec<Complex64>> {
        points.points.iter().map(|p| psi.eval(&p.lambda)).collect()
    };
    let spectrum_of_image = eigenvalues(psi_a);
    let nearest = |z: Complex64| -> (Option<Complex64>, f64) {
        spectrum_of_image
            .iter()
            .map(|&w| (Some(w), (w - z).norm()))
            .fold((None, f64::INFINITY), |acc, x| if x.1 < acc.1 { x } else { acc })
    };
    let d = a.dim();
    let mut rows = Vec::new();
    let mut applicable = true;
    let mut note = String::new();
    let mut set_distance = None;
    match part {
        MappingPart::Point | MappingPart::Residual => {
            let spectrum = if part == MappingPart::Point { joint_point_spectrum(a)? } else { joint_residual_spectrum(a)? };
            let images = images_of(&spectrum)?;
            for (p, &image) in spectrum.points.iter().zip(&images) {
                let residual = if part == MappingPart::Point {
                    let x = &p.right.as_ref().expect("point spectrum certificate").basis;
                    op_norm(&(psi_a * x - x * image))
                } else {
                    let f = &p.left.as_ref().expect("residual spectrum certificate").basis;
                    op_norm(&(f.adjoint() * psi_a - f.adjoint() * image))
                };
                let bound = MATCH_TOL * (1.0 + image.norm());
                let (matched, dist) = nearest(image);
                let verdict = if residual <= bound { Verdict::Pass } else { Verdict::Fail };
                rows.push(MappingRow { lambda: p.lambda.clone(), image, matched, distance: dist, residual, bound, verdict });
            }
            if part == MappingPart::Point {
                if let Some(sd) = a.spectral() {
                    let all: Vec<Complex64> = sd.joint_eigenvalues().iter().map(|l| psi.eval(l)).collect::<Result<_>>()?;
                    set_distance = Some(greedy_match(&all, &spectrum_of_image));
                }
            }
        }
        MappingPart::Approximate | MappingPart::Full => {
            let spectrum = if part == MappingPart::Approximate { joint_approximate_spectrum(a)? } else { joint_spectrum(a)? };
            let approx = if part == MappingPart::Approximate { spectrum.clone() } else { joint_approximate_spectrum(a)? };
            let (ok, why) = mapping_hypothesis(psi, &approx);
            applicable = ok;
            note = why;
            if applicable {
                let images = images_of(&spectrum)?;
                for (p, &image) in spectrum.points.iter().zip(&images) {
                    let residual = smallest_singular(&(psi_a - identity(d) * image)).0;
                    let bound = MATCH_TOL * (1.0 + image.norm());
                    let (matched, dist) = nearest(image);
                    let verdict = if residual <= bound { Verdict::Pass } else { Verdict::Fail };
                    rows.push(MappingRow { lambda: p.lambda.clone(), image, matched, distance: dist, residual, bound, verdict });
                }
            }
        }
        MappingPart::Paired => {
            let residual_spectrum = joint_residual_spectrum(a)?;
            let images = images_of(&residual_spectrum)?;
            let norm = op_norm(psi_a);
            for group in cluster(&spectrum_of_image, 1e-5 * (1.0 + norm)) {
                let alpha = group.iter().map(|&i| spectrum_of_image[i]).sum::<Complex64>() / group.len() as f64;
                let spread = group.iter().map(|&i| (spectrum_of_image[i] - alpha).norm()).fold(0.0, f64::max);
                let (x, _) = null_space(&(psi_a - identity(d) * alpha), (1e-8 * (1.0 + norm)).max(10.0 * spread), 1);
                for (p, &image) in residual_spectrum.points.iter().zip(&images) {
                    let f = &p.left.as_ref().expect("residual spectrum certificate").basis;
                    let pairing = f.adjoint() * &x;
                    let strength = op_norm(&pairing);
                    if strength <= PAIRING_TOL {
                        continue;
                    }
                    // f*ψ(A)x = ψ(λ) f*x and = α f*x
                    let distance = (alpha - image).norm();
                    let bound = MATCH_TOL * (1.0 + image.norm());
                    let verdict = if distance <= bound { Verdict::Pass } else { Verdict::Fail };
                    rows.push(MappingRow {
                        lambda: p.lambda.clone(),
                        image,
                        matched: Some(alpha),
                        distance,
                        residual: strength,
                        bound,
                        verdict,
                    });
                }
            }
            if rows.is_empty() {
                note = "no non-degenerate left/right pairing".into();
            }
        }
    }
    let failed = rows.iter().any(|r| r.verdict == Verdict::Fail)
        || set_distance.is_some_and(|s| s > MATCH_TOL * (1.0 + op_norm(psi_a)));
    let verdict = if !applicable {
        Verdict::Inapplicable
    } else if failed {
        Verdict::Fail
    } else {
        Verdict::Pass
    };
    Ok(MappingReport { part, applicable, note, rows, set_distance, verdict })
}

/// Greedy bipartite matching on sorted pairwise distances; returns the
/// largest matched distance (infinite when the sizes differ).
pub fn greedy_match(a: &[Complex64], b: &[Complex64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let mut pairs: Vec<(f64, usize, usize)> =
        a.iter().enumerate().flat_map(|(i, x)| b.iter().enumerate().map(move |(j, y)| ((x - y).norm(), i, j))).collect();
    pairs.sort_by(|p, q| p.0.total_cmp(&q.0).then(p.1.cmp(&q.1)).then(p.2.cmp(&q.2)));
    let mut used_a = vec![false; a.len()];
    let mut used_b = vec![false; b.len()];
    let mut worst = 0.0f64;
    for (dist, i, j) in pairs {
        if !used_a[i] && !used_b[j] {
            used_a[i] = true;
            used_b[j] = true;
            worst = worst.max(dist);
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, diagonal};

    #[test]
    fn paired_diagonals() {
        let a = OperatorTuple::new(vec![
            diagonal(&[c(-1.0, 0.0), c(-2.0, 0.0)]),
            diagonal(&[c(-3.0, 0.0), c(-4.0, 0.0)]),
        ])
        .unwrap();
        let sp = joint_point_spectrum(&a).unwrap();
        assert_eq!(sp.points.len(), 2);
        assert!(distance(&sp.points[0].lambda, &[c(-2.0, 0.0), c(-4.0, 0.0)]) < 1e-12);
        assert!(distance(&sp.points[1].lambda, &[c(-1.0, 0.0), c(-3.0, 0.0)]) < 1e-12);
    }

    #[test]
    fn repeated_eigenvalue_split_by_second_generator() {
        let a = OperatorTuple::new(vec![
            diagonal(&[c(-1.0, 0.0), c(-1.0, 0.0)]),
            diagonal(&[c(-3.0, 0.0), c(-4.0, 0.0)]),
        ])
        .unwrap();
        assert_eq!(joint_point_spectrum(&a).unwrap().points.len(), 2);
    }

    #[test]
    fn greedy_matching() {
        let a = [c(0.0, 0.0), c(1.0, 0.0)];
        let b = [c(1.0, 1e-9), c(0.0, 0.0)];
        assert!(greedy_match(&a, &b) < 2e-9);
        assert!(greedy_match(&a, &b[..1]).is_infinite());
    }
}
