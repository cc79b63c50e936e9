//! Quadrature kernels: Gauss-Legendre nodes on demand and an adaptive
//! Gauss-Kronrod (G7, K15) integrator for the oscillatory-integral oracle.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Gauss-Legendre nodes and weights on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Newton iteration on the Legendre recurrence; standard and exact to
    /// machine precision for the node counts used here (<= few thousand).
    fn compute(n: usize) -> Self {
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            // Tricomi initial guess
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let kf = k as f64;
                    let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-15 {
                    break;
                }
            }
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        GaussLegendre { nodes, weights }
    }

    /// Cached lookup by node count.
    pub fn with_nodes(n: usize) -> Arc<GaussLegendre> {
        static CACHE: OnceLock<Mutex<HashMap<usize, Arc<GaussLegendre>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().unwrap();
        guard
            .entry(n)
            .or_insert_with(|| Arc::new(Self::compute(n)))
            .clone()
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        let mut acc = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(c + h * x);
        }
        acc * h
    }
}

// Kronrod 15-point nodes/weights (positive half) with embedded Gauss 7.
const XGK: [f64; 8] = [
    0.991455371120813,
    0.949107912342759,
    0.864864423359769,
    0.741531185599394,
    0.586087235467691,
    0.405845151377397,
    0.207784955007898,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529,
    0.063092092629979,
    0.104790010322250,
    0.140653259715525,
    0.169004726639267,
    0.190350578064785,
    0.204432940075298,
    0.209482141084728,
];
const WG: [f64; 4] = [
    0.129484966168870,
    0.279705391489277,
    0.381830050505119,
    0.417959183673469,
];

fn qk15<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64) -> (Complex64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let f1 = f(c - dx);
        let f2 = f(c + dx);
        kronrod += (f1 + f2) * WGK[j];
        if j % 2 == 1 {
            gauss += (f1 + f2) * WG[j / 2];
        }
    }
    kronrod *= h;
    gauss *= h;
    ((kronrod), (kronrod - gauss).norm())
}

/// Adaptive Gauss-Kronrod integration of a complex-valued integrand.
pub fn integrate_complex<F: Fn(f64) -> Complex64>(
    f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    max_subdivisions: usize,
) -> Result<Complex64> {
    // Interval heap ordered by error estimate.
    let (v, e) = qk15(&f, a, b);
    let mut intervals = vec![(e, a, b, v)];
    let mut total = v;
    let mut total_err = e;
    for _ in 0..max_subdivisions {
        if total_err <= abs_tol {
            let acc: Complex64 = intervals.iter().map(|it| it.3).sum();
            return Ok(acc);
        }
        // split the worst interval
        let worst = intervals
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .0.partial_cmp(&y.1 .0).unwrap())
            .map(|(i, _)| i)
            .unwrap();
        let (err, ia, ib, iv) = intervals.swap_remove(worst);
        let mid = 0.5 * (ia + ib);
        if mid <= ia || mid >= ib {
            return Err(Error::QuadratureNonConvergence(format!(
                "interval [{ia}, {ib}] can no longer be split (err {err:.3e})"
            )));
        }
        let (v1, e1) = qk15(&f, ia, mid);
        let (v2, e2) = qk15(&f, mid, ib);
        total += v1 + v2 - iv;
        total_err += e1 + e2 - err;
        intervals.push((e1, ia, mid, v1));
        intervals.push((e2, mid, ib, v2));
    }
    if total_err <= abs_tol {
        Ok(intervals.iter().map(|it| it.3).sum())
    } else {
        Err(Error::QuadratureNonConvergence(format!(
            "error {total_err:.3e} above tolerance {abs_tol:.3e} after max subdivisions"
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_exactness() {
        // 5-point rule integrates degree-9 polynomials exactly.
        let gl = GaussLegendre::with_nodes(5);
        let exact = 2.0 / 10.0; // int_{-1}^{1} x^9 dx = 0; use x^8: 2/9
        let v = gl.integrate(-1.0, 1.0, |x| x.powi(8));
        assert!((v - 2.0 / 9.0).abs() < 1e-14);
        let v9 = gl.integrate(-1.0, 1.0, |x| x.powi(9));
        assert!(v9.abs() < 1e-15);
        let _ = exact;
    }

    #[test]
    fn legendre_weights_sum_to_two() {
        for n in [16, 32, 57, 128, 301] {
            let gl = GaussLegendre::with_nodes(n);
            let s: f64 = gl.weights.iter().sum();
            assert!((s - 2.0).abs() < 1e-12, "n={n}: {s}");
        }
    }

    #[test]
    fn kronrod_handles_oscillatory_integrand() {
        // int_0^1 e^{i w x} dx = (e^{iw} - 1)/(iw)
        let w = 500.0;
        let v = integrate_complex(
            |x| Complex64::from_polar(1.0, w * x),
            0.0,
            1.0,
            1e-13,
            10_000,
        )
        .unwrap();
        let exact = (Complex64::from_polar(1.0, w) - Complex64::new(1.0, 0.0))
            / Complex64::new(0.0, w);
        assert!((v - exact).norm() < 1e-12);
    }
}
