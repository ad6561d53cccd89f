//! Dense complex linear algebra helpers.
//!
//! Thin layer over `nalgebra` plus a scaling-and-squaring matrix exponential.
//! Everything works on dynamically sized complex matrices; the operator
//! tuples in this crate are small (d ≤ a few hundred) so no attempt is made
//! at blocking or in-place tricks.

use nalgebra::{DMatrix, DVector, Schur, SVD};
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
pub const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn identity(d: usize) -> CMatrix {
    CMatrix::identity(d, d)
}

pub fn diagonal(entries: &[Complex64]) -> CMatrix {
    CMatrix::from_diagonal(&CVector::from_column_slice(entries))
}

pub fn is_diagonal(m: &CMatrix) -> bool {
    m.is_square()
        && m.iter()
            .enumerate()
            .all(|(k, z)| k % m.nrows() == k / m.nrows() || (z.re == 0.0 && z.im == 0.0))
}

/// Frobenius norm.
pub fn frobenius(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn one_norm(m: &CMatrix) -> f64 {
    m.column_iter()
        .map(|col| col.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Spectral (operator 2-) norm.
pub fn op_norm(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    if is_diagonal(m) {
        return m.diagonal().iter().map(|z| z.norm()).fold(0.0, f64::max);
    }
    singular_values(m).iter().copied().fold(0.0, f64::max)
}

pub fn vector_norm(v: &CVector) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Singular values in descending order.
pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    SVD::new(m.clone(), false, false).singular_values.iter().copied().collect()
}

pub fn condition_number(m: &CMatrix) -> f64 {
    let sv = singular_values(m);
    match (sv.first(), sv.last()) {
        (Some(&hi), Some(&lo)) if lo > 0.0 => hi / lo,
        _ => f64::INFINITY,
    }
}

pub fn inverse(m: &CMatrix) -> Option<CMatrix> {
    m.clone().try_inverse()
}

pub fn adjoint(m: &CMatrix) -> CMatrix {
    m.adjoint()
}

pub fn commutator_norm(a: &CMatrix, b: &CMatrix) -> f64 {
    frobenius(&(a * b - b * a))
}

/// Eigenvalues from a complex Schur form (diagonal of the triangular factor).
pub fn eigenvalues(m: &CMatrix) -> Vec<Complex64> {
    if is_diagonal(m) {
        return m.diagonal().iter().copied().collect();
    }
    let schur = Schur::try_new(m.clone(), f64::EPSILON, 10_000)
        .unwrap_or_else(|| Schur::new(m.clone()));
    let (_, t) = schur.unpack();
    t.diagonal().iter().copied().collect()
}

/// Smallest singular value of a matrix with at least as many rows as
/// columns, together with the corresponding unit right singular vector.
pub fn smallest_singular(m: &CMatrix) -> (f64, CVector) {
    debug_assert!(m.nrows() >= m.ncols());
    let svd = SVD::new(m.clone(), false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let k = svd.singular_values.len() - 1;
    let v = v_t.row(k).adjoint();
    (svd.singular_values[k], v)
}

/// Orthonormal basis (as columns) of the numerical null space: right singular
/// vectors whose singular value does not exceed `tol`. At least `min_dim`
/// columns are returned (the smallest singular directions).
pub fn null_space(m: &CMatrix, tol: f64, min_dim: usize) -> (CMatrix, Vec<f64>) {
    let cols = m.ncols();
    // pad wide matrices so every right singular vector is available
    let padded = if m.nrows() < cols {
        let mut p = CMatrix::zeros(cols, cols);
        p.view_mut((0, 0), (m.nrows(), cols)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = SVD::new(padded, false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let sv: Vec<f64> = svd.singular_values.iter().copied().collect();
    let mut picked: Vec<usize> = (0..sv.len()).filter(|&k| sv[k] <= tol).collect();
    let mut k = sv.len();
    while picked.len() < min_dim.min(sv.len()) {
        k -= 1;
        if !picked.contains(&k) {
            picked.push(k);
        }
    }
    picked.sort_unstable();
    let mut basis = CMatrix::zeros(cols, picked.len());
    for (c_idx, &k) in picked.iter().enumerate() {
        basis.set_column(c_idx, &v_t.row(k).adjoint());
    }
    let values = picked.iter().map(|&k| sv[k]).collect();
    (basis, values)
}

// Padé coefficients for the diagonal approximants of degree 3, 5, 7, 9, 13.
const PADE_3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const PADE_5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const PADE_7: [f64; 8] = [17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0];
const PADE_9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const PADE_13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];
#[allow(clippy::excessive_precision)]
const THETA: [(usize, f64); 4] = [
    (3, 1.495585217958292e-2),
    (5, 2.539398330063230e-1),
    (7, 9.504178996162932e-1),
    (9, 2.097847961257068e0),
];
const THETA_13: f64 = 5.371920351148152;

/// Matrix exponential by scaling and squaring with a diagonal Padé
/// approximant (degree chosen from the 1-norm).
pub fn expm(a: &CMatrix) -> CMatrix {
    let d = a.nrows();
    if d == 0 {
        return a.clone();
    }
    if is_diagonal(a) {
        let diag: Vec<Complex64> = a.diagonal().iter().map(|z| z.exp()).collect();
        return diagonal(&diag);
    }
    let norm = one_norm(a);
    for &(m, theta) in &THETA {
        if norm <= theta {
            let coeffs: &[f64] = match m {
                3 => &PADE_3,
                5 => &PADE_5,
                7 => &PADE_7,
                _ => &PADE_9,
            };
            return pade_low(a, coeffs);
        }
    }
    let s = (norm / THETA_13).log2().ceil().max(0.0) as i32;
    let scaled = a * c(0.5f64.powi(s), 0.0);
    let mut r = pade_13(&scaled);
    for _ in 0..s {
        r = &r * &r;
    }
    r
}

fn solve_pade(u: CMatrix, v: CMatrix) -> CMatrix {
    let p = &v + &u;
    let q = &v - &u;
    q.lu().solve(&p).expect("Padé denominator is nonsingular inside its θ range")
}

fn pade_low(a: &CMatrix, b: &[f64]) -> CMatrix {
    let d = a.nrows();
    let id = identity(d);
    let a2 = a * a;
    let mut u_acc = &id * c(b[1], 0.0);
    let mut v_acc = &id * c(b[0], 0.0);
    let mut power = id.clone();
    let degree = b.len() - 1;
    for k in 1..=degree / 2 {
        power = &power * &a2;
        v_acc += &power * c(b[2 * k], 0.0);
        u_acc += &power * c(b[2 * k + 1], 0.0);
    }
    let u = a * u_acc;
    solve_pade(u, v_acc)
}

fn pade_13(a: &CMatrix) -> CMatrix {
    let b = &PADE_13;
    let d = a.nrows();
    let id = identity(d);
    let a2 = a * a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let s = |k: usize| c(b[k], 0.0);
    let inner_u = &a6 * s(13) + &a4 * s(11) + &a2 * s(9);
    let u = a * (&a6 * inner_u + &a6 * s(7) + &a4 * s(5) + &a2 * s(3) + &id * s(1));
    let inner_v = &a6 * s(12) + &a4 * s(10) + &a2 * s(8);
    let v = &a6 * inner_v + &a6 * s(6) + &a4 * s(4) + &a2 * s(2) + &id * s(0);
    solve_pade(u, v)
}

/// Greedy single-linkage clustering of complex numbers; returns clusters of
/// indices, each sorted.
pub fn cluster(values: &[Complex64], tol: f64) -> Vec<Vec<usize>> {
    let mut assigned = vec![usize::MAX; values.len()];
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for i in 0..values.len() {
        if assigned[i] != usize::MAX {
            continue;
        }
        let id = clusters.len();
        let mut members = vec![i];
        assigned[i] = id;
        let mut cursor = 0;
        while cursor < members.len() {
            let anchor = values[members[cursor]];
            for j in 0..values.len() {
                if assigned[j] == usize::MAX && (values[j] - anchor).norm() <= tol {
                    assigned[j] = id;
                    members.push(j);
                }
            }
            cursor += 1;
        }
        members.sort_unstable();
        clusters.push(members);
    }
    clusters
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn expm_matches_nalgebra_on_nonnormal_input() {
        let a = CMatrix::from_row_slice(
            3,
            3,
            &[
                c(-1.0, 0.3),
                c(2.0, 0.0),
                c(0.5, -1.0),
                c(0.0, 0.0),
                c(-0.5, 1.0),
                c(3.0, 0.0),
                c(0.1, 0.0),
                c(0.0, 0.2),
                c(-2.0, 0.0),
            ],
        );
        for scale in [1e-3, 0.2, 1.0, 7.0, 40.0] {
            let m = &a * c(scale, 0.0);
            let ours = expm(&m);
            let reference = m.clone().exp();
            let rel = frobenius(&(&ours - &reference)) / frobenius(&reference);
            assert!(rel < 1e-12, "scale {scale}: rel {rel}");
        }
    }

    #[test]
    fn expm_of_jordan_block() {
        let t = 1.7;
        let j = CMatrix::from_row_slice(2, 2, &[c(-t, 0.0), c(t, 0.0), ZERO, c(-t, 0.0)]);
        let e = expm(&j);
        let et = (-t).exp();
        assert_relative_eq!(e[(0, 0)].re, et, max_relative = 1e-14);
        assert_relative_eq!(e[(0, 1)].re, t * et, max_relative = 1e-14);
        assert!(e[(1, 0)].norm() < 1e-16);
    }

    #[test]
    fn eigenvalues_of_triangular_matrix() {
        let m = CMatrix::from_row_slice(2, 2, &[c(-1.0, 0.0), c(1.0, 0.0), ZERO, c(-2.0, 1.0)]);
        let mut ev = eigenvalues(&m);
        ev.sort_by(|a, b| a.re.total_cmp(&b.re));
        assert!((ev[0] - c(-2.0, 1.0)).norm() < 1e-12);
        assert!((ev[1] - c(-1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn null_space_of_rank_deficient_matrix() {
        let m = CMatrix::from_row_slice(2, 3, &[ONE, ONE, ZERO, ZERO, ZERO, ONE]);
        let (basis, _) = null_space(&m, 1e-12, 0);
        assert_eq!(basis.ncols(), 1);
        assert!(frobenius(&(&m * &basis)) < 1e-12);
    }

    #[test]
    fn clustering_merges_close_values() {
        let v = [c(0.0, 0.0), c(1e-9, 0.0), c(1.0, 0.0), c(2e-9, 1e-9)];
        let cl = cluster(&v, 1e-8);
        assert_eq!(cl, vec![vec![0, 1, 3], vec![2]]);
    }
}
