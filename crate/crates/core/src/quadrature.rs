//! Globally adaptive Gauss–Kronrod (7/15) quadrature for scalar- and
//! matrix-valued integrands.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::Complex64;

use crate::linalg::{frobenius, CMatrix};

/// Values that can be accumulated by the integrator.
pub trait QuadValue: Clone {
    fn zeros_like(&self) -> Self;
    /// `self += w * other`
    fn add_scaled(&mut self, w: Complex64, other: &Self);
    fn scaled(&self, w: Complex64) -> Self {
        let mut out = self.zeros_like();
        out.add_scaled(w, self);
        out
    }
    fn norm(&self) -> f64;
}

impl QuadValue for Complex64 {
    fn zeros_like(&self) -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn add_scaled(&mut self, w: Complex64, other: &Self) {
        *self += w * other;
    }
    fn norm(&self) -> f64 {
        Complex64::norm(*self)
    }
}

impl QuadValue for CMatrix {
    fn zeros_like(&self) -> Self {
        CMatrix::zeros(self.nrows(), self.ncols())
    }
    fn add_scaled(&mut self, w: Complex64, other: &Self) {
        self.zip_apply(other, |a, b| *a += w * b);
    }
    fn norm(&self) -> f64 {
        frobenius(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self { abs_tol: 1e-11, rel_tol: 1e-12, max_intervals: 2000 }
    }
}

#[derive(Debug, Clone)]
pub struct Quadrature<V> {
    pub value: V,
    pub error: f64,
    pub evaluations: usize,
    pub converged: bool,
}

#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

struct Segment<V> {
    a: f64,
    b: f64,
    value: V,
    error: f64,
}

impl<V> PartialEq for Segment<V> {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
    }
}
impl<V> Eq for Segment<V> {}
impl<V> PartialOrd for Segment<V> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<V> Ord for Segment<V> {
    fn cmp(&self, other: &Self) -> Ordering {
        // ties broken by position so the heap order is deterministic
        self.error.total_cmp(&other.error).then_with(|| other.a.total_cmp(&self.a))
    }
}

fn kronrod_segment<V: QuadValue, F: FnMut(f64) -> V>(f: &mut F, a: f64, b: f64) -> Segment<V> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc.scaled(Complex64::new(WGK[7], 0.0));
    let mut gauss = fc.scaled(Complex64::new(WG[3], 0.0));
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        let wk = Complex64::new(WGK[j], 0.0);
        kronrod.add_scaled(wk, &f1);
        kronrod.add_scaled(wk, &f2);
        if j % 2 == 1 {
            let wg = Complex64::new(WG[j / 2], 0.0);
            gauss.add_scaled(wg, &f1);
            gauss.add_scaled(wg, &f2);
        }
    }
    let h = Complex64::new(half, 0.0);
    let value = kronrod.scaled(h);
    let mut diff = value.clone();
    diff.add_scaled(-h, &gauss);
    Segment { a, b, error: diff.norm(), value }
}

/// Integrates `f` over `[a, b]`, bisecting the segment with the largest error
/// estimate until `error ≤ max(abs_tol, rel_tol·‖value‖)` or the interval
/// budget is exhausted. Non-convergence is reported, not raised.
pub fn integrate<V, F>(mut f: F, a: f64, b: f64, opts: &QuadOptions) -> Quadrature<V>
where
    V: QuadValue,
    F: FnMut(f64) -> V,
{
    let first: Segment<V> = kronrod_segment(&mut f, a, b);
    let mut evaluations = 15;
    let mut heap = BinaryHeap::new();
    heap.push(first);
    let mut total_error;
    loop {
        let (value, error) = summarize(&heap);
        total_error = error;
        let target = opts.abs_tol.max(opts.rel_tol * value.norm());
        if total_error <= target || heap.len() >= opts.max_intervals {
            let converged = total_error <= target;
            return Quadrature { value, error: total_error, evaluations, converged };
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // interval cannot be split further in floating point
            heap.push(worst);
            let (value, error) = summarize(&heap);
            return Quadrature { value, error, evaluations, converged: false };
        }
        heap.push(kronrod_segment(&mut f, worst.a, mid));
        heap.push(kronrod_segment(&mut f, mid, worst.b));
        evaluations += 30;
    }
}

fn summarize<V: QuadValue>(heap: &BinaryHeap<Segment<V>>) -> (V, f64) {
    // sum in positional order for reproducibility
    let mut segments: Vec<&Segment<V>> = heap.iter().collect();
    segments.sort_by(|x, y| x.a.total_cmp(&y.a));
    let mut value = segments[0].value.zeros_like();
    let mut error = 0.0;
    for s in segments {
        value.add_scaled(Complex64::new(1.0, 0.0), &s.value);
        error += s.error;
    }
    (value, error)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn real(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn polynomial_is_exact() {
        let q = integrate(|x| real(x.powi(5) - 2.0 * x), 0.0, 2.0, &QuadOptions::default());
        assert!((q.value.re - (64.0 / 6.0 - 4.0)).abs() < 1e-13);
        assert!(q.converged);
    }

    #[test]
    fn oscillatory_integrand_converges() {
        let q = integrate(|x| Complex64::new(0.0, 40.0 * x).exp(), 0.0, 3.0, &QuadOptions::default());
        let exact = (Complex64::new(0.0, 120.0).exp() - 1.0) / Complex64::new(0.0, 40.0);
        assert!((q.value - exact).norm() < 1e-11, "{:?} vs {:?}", q.value, exact);
    }

    #[test]
    fn sqrt_endpoint_singularity() {
        let q = integrate(|x| real(x.sqrt()), 0.0, 1.0, &QuadOptions::default());
        assert!((q.value.re - 2.0 / 3.0).abs() < 1e-10);
    }

    #[test]
    fn matrix_valued_integrand() {
        let q = integrate(
            |x| CMatrix::from_diagonal_element(2, 2, real(x * x)),
            0.0,
            3.0,
            &QuadOptions::default(),
        );
        assert!((q.value[(1, 1)].re - 9.0).abs() < 1e-12);
        assert_eq!(q.value[(0, 1)].norm(), 0.0);
    }
}
