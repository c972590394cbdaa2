//! Deterministic quadrature building blocks.
//!
//! Two engines are provided: composite Gauss–Legendre panels on fixed,
//! reproducible node layouts (used for every energy integral so that repeated
//! runs are bit-identical), and a classic adaptive Gauss–Kronrod 15-point
//! rule used only where an independent error estimate is wanted (the
//! time-domain Green-function oracle).

use std::f64::consts::PI;
use std::sync::{Mutex, OnceLock};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Gauss–Legendre nodes and weights on the reference interval [−1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Computes an n-point rule by Newton iteration on Legendre polynomials,
    /// seeded with the Chebyshev-like asymptotic root estimate.
    pub fn new(n: usize) -> Self {
        assert!(n >= 2, "Gauss-Legendre order must be at least 2");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            // Root estimate for P_n, counted from +1 side.
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
            let (_, d) = legendre_with_derivative(n, 0.0);
            weights[n / 2] = 2.0 / (d * d);
        }
        GaussLegendre { nodes, weights }
    }

    /// Cached rule lookup; rules are immutable once built.
    pub fn cached(n: usize) -> &'static GaussLegendre {
        static CACHE: OnceLock<Mutex<Vec<(usize, &'static GaussLegendre)>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(Vec::new()));
        let mut guard = cache.lock().expect("quadrature cache poisoned");
        if let Some(&(_, rule)) = guard.iter().find(|(order, _)| *order == n) {
            return rule;
        }
        let rule: &'static GaussLegendre = Box::leak(Box::new(GaussLegendre::new(n)));
        guard.push((n, rule));
        rule
    }
}

/// Evaluates (P_n(x), P_n'(x)) by the standard three-term recurrence.
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Appends the scaled nodes/weights of an n-point rule on [a, b].
pub fn push_panel(nodes: &mut Vec<f64>, weights: &mut Vec<f64>, a: f64, b: f64, order: usize) {
    let rule = GaussLegendre::cached(order);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    for (x, w) in rule.nodes.iter().zip(&rule.weights) {
        nodes.push(mid + half * x);
        weights.push(half * w);
    }
}

/// Adaptive Gauss–Kronrod 15(7) integration of a complex-valued function.
///
/// Interval bisection on the largest-error segment until the summed error
/// estimate meets `abs_tol`, with a hard cap on subdivisions.
pub fn adaptive_gk15<F>(f: F, a: f64, b: f64, abs_tol: f64) -> Result<Complex64>
where
    F: Fn(f64) -> Complex64,
{
    #[derive(Debug)]
    struct Segment {
        a: f64,
        b: f64,
        value: Complex64,
        error: f64,
    }

    fn eval<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64) -> Segment {
        // Kronrod nodes (positive half) and weights; Gauss-7 embedded.
        const XGK: [f64; 8] = [
            0.991455371120812639206854697526329,
            0.949107912342758524526189684047851,
            0.864864423359769072789712788640926,
            0.741531185599394439863864773280788,
            0.586087235467691130294144838258730,
            0.405845151377397166906606412076961,
            0.207784955007898467600689403773245,
            0.000000000000000000000000000000000,
        ];
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
        const WG: [f64; 4] = [
            0.129484966168869693270611432679082,
            0.279705391489276667901467771423780,
            0.381830050505118944950369775488975,
            0.417959183673469387755102040816327,
        ];

        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let f_mid = f(mid);
        let mut kronrod = WGK[7] * f_mid;
        let mut gauss = WG[3] * f_mid;
        for j in 0..7 {
            let dx = half * XGK[j];
            let fsum = f(mid - dx) + f(mid + dx);
            kronrod += WGK[j] * fsum;
            if j % 2 == 1 {
                gauss += WG[j / 2] * fsum;
            }
        }
        kronrod *= half;
        gauss *= half;
        let error = (kronrod - gauss).norm();
        Segment { a, b, value: kronrod, error }
    }

    if !(b > a) {
        return Err(Error::QuadratureFailure(format!(
            "empty or inverted interval [{a}, {b}]"
        )));
    }

    let mut segments = vec![eval(&f, a, b)];
    for _ in 0..20_000 {
        let total_err: f64 = segments.iter().map(|s| s.error).sum();
        if total_err <= abs_tol {
            return Ok(segments.iter().map(|s| s.value).sum());
        }
        let worst = segments
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .map(|(i, _)| i)
            .expect("segment list never empty");
        let seg = segments.swap_remove(worst);
        let mid = 0.5 * (seg.a + seg.b);
        if mid <= seg.a || mid >= seg.b {
            return Err(Error::QuadratureFailure(format!(
                "interval [{}, {}] cannot be split further at tolerance {abs_tol:.3e}",
                seg.a, seg.b
            )));
        }
        segments.push(eval(&f, seg.a, mid));
        segments.push(eval(&f, mid, seg.b));
    }
    Err(Error::QuadratureFailure(format!(
        "adaptive rule exceeded subdivision budget before reaching {abs_tol:.3e}"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gauss_legendre_weights_sum_to_two() {
        for &n in &[2usize, 5, 8, 20, 40] {
            let rule = GaussLegendre::new(n);
            let sum: f64 = rule.weights.iter().sum();
            assert_relative_eq!(sum, 2.0, max_relative = 1e-14);
            // Nodes strictly increasing and symmetric.
            for w in rule.nodes.windows(2) {
                assert!(w[0] < w[1]);
            }
            for i in 0..n {
                assert_relative_eq!(rule.nodes[i], -rule.nodes[n - 1 - i], epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn gauss_legendre_exact_for_polynomials() {
        // n-point rule is exact through degree 2n−1.
        let rule = GaussLegendre::new(6);
        let integral: f64 = rule
            .nodes
            .iter()
            .zip(&rule.weights)
            .map(|(x, w)| w * x.powi(10))
            .sum();
        assert_relative_eq!(integral, 2.0 / 11.0, max_relative = 1e-13);
    }

    #[test]
    fn panel_integration_of_lorentzian() {
        // ∫ dx/(x²+1/4) over [−40, 40] = 2·[atan(2x)] = 4·atan(80).
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        let mut x = -40.0_f64;
        while x < 40.0 {
            let next = (x + 0.75).min(40.0);
            push_panel(&mut nodes, &mut weights, x, next, 20);
            x = next;
        }
        let val: f64 = nodes
            .iter()
            .zip(&weights)
            .map(|(x, w)| w / (x * x + 0.25))
            .sum();
        assert_relative_eq!(val, 4.0 * (80.0f64).atan(), max_relative = 1e-12);
    }

    #[test]
    fn gk15_oscillatory_integral() {
        // ∫₀^10 e^{i 7 x} dx = (e^{70i} − 1)/(7i).
        let exact = (Complex64::new(0.0, 70.0).exp() - 1.0) / Complex64::new(0.0, 7.0);
        let got = adaptive_gk15(|x| Complex64::new(0.0, 7.0 * x).exp(), 0.0, 10.0, 1e-12).unwrap();
        assert!((got - exact).norm() < 1e-11);
    }

    #[test]
    fn gk15_rejects_bad_interval() {
        assert!(adaptive_gk15(|_| Complex64::new(1.0, 0.0), 1.0, 1.0, 1e-10).is_err());
    }
}
