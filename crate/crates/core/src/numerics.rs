//! Small shared numerical kernels: composite Simpson, Gauss–Legendre nodes,
//! bracketed root finding and a tridiagonal solver.

use crate::error::{Error, Result};

/// Composite Simpson over equally spaced samples. `values.len() - 1` must be even.
pub fn simpson(values: &[f64], h: f64) -> f64 {
    let panels = values.len() - 1;
    debug_assert!(panels >= 2 && panels % 2 == 0, "Simpson needs an even panel count");
    let mut odd = 0.0;
    let mut even = 0.0;
    for (i, v) in values.iter().enumerate().take(panels).skip(1) {
        if i % 2 == 1 {
            odd += v;
        } else {
            even += v;
        }
    }
    h / 3.0 * (values[0] + values[panels] + 4.0 * odd + 2.0 * even)
}

/// Gauss–Legendre nodes and weights on [-1, 1], nodes ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
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
        let (_, d) = legendre_with_derivative(n, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    (p1, nf * (x * p1 - p0) / (x * x - 1.0))
}

/// Brent's method on a bracket `[a, b]` with `f(a) f(b) <= 0`.
pub fn brent<F: FnMut(f64) -> Result<f64>>(
    mut f: F,
    mut a: f64,
    mut b: f64,
    xtol: f64,
    max_iter: usize,
) -> Result<f64> {
    let mut fa = f(a)?;
    let mut fb = f(b)?;
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::Convergence(format!(
            "root not bracketed on [{a}, {b}]: f = ({fa:e}, {fb:e})"
        )));
    }
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;
    for _ in 0..max_iter {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * xtol;
        let m = 0.5 * (c - b);
        if m.abs() <= tol || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q) = if a == c {
                (2.0 * m * s, 1.0 - s)
            } else {
                let q = fa / fc;
                let r = fb / fc;
                (
                    s * (2.0 * m * q * (q - r) - (b - a) * (r - 1.0)),
                    (q - 1.0) * (r - 1.0) * (s - 1.0),
                )
            };
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol.copysign(m) };
        fb = f(b)?;
    }
    Err(Error::NoConvergence { iterations: max_iter, residual: fb.abs() })
}

/// Thomas algorithm for `lower[i] x[i-1] + diag[i] x[i] + upper[i] x[i+1] = rhs[i]`.
pub fn solve_tridiagonal(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let scale = diag.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    let mut pivot = diag[0];
    if pivot.abs() <= 1e-14 * scale {
        return Err(Error::SingularMatrix("zero pivot in row 0".into()));
    }
    c[0] = upper[0] / pivot;
    d[0] = rhs[0] / pivot;
    for i in 1..n {
        pivot = diag[i] - lower[i] * c[i - 1];
        if pivot.abs() <= 1e-14 * scale {
            return Err(Error::SingularMatrix(format!("zero pivot in row {i}")));
        }
        c[i] = if i + 1 < n { upper[i] / pivot } else { 0.0 };
        d[i] = (rhs[i] - lower[i] * d[i - 1]) / pivot;
    }
    let mut x = d;
    for i in (0..n - 1).rev() {
        x[i] -= c[i] * x[i + 1];
    }
    Ok(x)
}


/// Cyclic tridiagonal solve (Sherman–Morrison); `lower[0]` couples row 0 to
/// the last unknown and `upper[n-1]` couples the last row to unknown 0.
pub fn solve_cyclic_tridiagonal(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    if n < 3 {
        return Err(Error::SingularMatrix("cyclic system needs at least 3 unknowns".into()));
    }
    let alpha = upper[n - 1];
    let beta = lower[0];
    let gamma = -diag[0];
    let mut bb = diag.to_vec();
    bb[0] -= gamma;
    bb[n - 1] -= alpha * beta / gamma;
    let mut low = lower.to_vec();
    low[0] = 0.0;
    let mut up = upper.to_vec();
    up[n - 1] = 0.0;
    let x = solve_tridiagonal(&low, &bb, &up, rhs)?;
    let mut u = vec![0.0; n];
    u[0] = gamma;
    u[n - 1] = alpha;
    let z = solve_tridiagonal(&low, &bb, &up, &u)?;
    let fact = (x[0] + beta * x[n - 1] / gamma) / (1.0 + z[0] + beta * z[n - 1] / gamma);
    Ok(x.iter().zip(&z).map(|(x, z)| x - fact * z).collect())
}

/// Periodic cubic spline through equally spaced samples `y_0..y_K` with `y_K = y_0`.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicSpline {
    period: f64,
    values: Vec<f64>,
    second: Vec<f64>,
}

impl PeriodicSpline {
    /// `samples` covers one closed period: the last entry repeats the first.
    pub fn new(period: f64, samples: &[f64]) -> Result<Self> {
        let k = samples.len() - 1;
        if k < 3 {
            return Err(Error::GridTooSmall(format!("periodic spline needs >= 4 samples, got {}", k + 1)));
        }
        let h = period / k as f64;
        let values = samples[..k].to_vec();
        let rhs: Vec<f64> = (0..k)
            .map(|i| {
                let prev = values[(i + k - 1) % k];
                let next = values[(i + 1) % k];
                6.0 * (next - 2.0 * values[i] + prev) / (h * h)
            })
            .collect();
        let second = solve_cyclic_tridiagonal(&vec![1.0; k], &vec![4.0; k], &vec![1.0; k], &rhs)?;
        Ok(Self { period, values, second })
    }

    fn locate(&self, t: f64) -> (usize, f64, f64) {
        let k = self.values.len();
        let h = self.period / k as f64;
        let s = t.rem_euclid(self.period) / h;
        let i = (s.floor() as usize).min(k - 1);
        (i, s - i as f64, h)
    }

    pub fn value(&self, t: f64) -> f64 {
        let k = self.values.len();
        let (i, u, h) = self.locate(t);
        let j = (i + 1) % k;
        let a = 1.0 - u;
        a * self.values[i]
            + u * self.values[j]
            + h * h / 6.0 * ((a * a * a - a) * self.second[i] + (u * u * u - u) * self.second[j])
    }

    pub fn derivative(&self, t: f64) -> f64 {
        let k = self.values.len();
        let (i, u, h) = self.locate(t);
        let j = (i + 1) % k;
        let a = 1.0 - u;
        (self.values[j] - self.values[i]) / h
            + h / 6.0 * (-(3.0 * a * a - 1.0) * self.second[i] + (3.0 * u * u - 1.0) * self.second[j])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simpson_is_exact_for_cubics() {
        let h = 0.25;
        let v: Vec<f64> = (0..=8).map(|i| (i as f64 * h).powi(3)).collect();
        assert!((simpson(&v, h) - 2.0f64.powi(4) / 4.0).abs() < 1e-13);
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        for n in 1..=20 {
            let (x, w) = gauss_legendre(n);
            assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-13);
            let deg = 2 * n - 1;
            for p in 0..=deg {
                let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(p as i32)).sum();
                let exact = if p % 2 == 1 { 0.0 } else { 2.0 / (p as f64 + 1.0) };
                assert!((q - exact).abs() < 1e-13, "n={n} p={p}");
            }
            assert!(x.windows(2).all(|s| s[0] < s[1]));
        }
    }

    #[test]
    fn brent_finds_cubic_root() {
        let root = brent(|x| Ok(x * x * x - 2.0), 0.0, 2.0, 1e-15, 100).unwrap();
        assert!((root - 2f64.cbrt()).abs() < 1e-14);
        assert!(brent(|x| Ok(x * x + 1.0), -1.0, 1.0, 1e-12, 100).is_err());
    }

    #[test]
    fn tridiagonal_solution() {
        let lower = [0.0, -1.0, -1.0, -1.0];
        let diag = [2.0, 2.0, 2.0, 2.0];
        let upper = [-1.0, -1.0, -1.0, 0.0];
        let x_true = [1.0, -2.0, 0.5, 3.0];
        let rhs: Vec<f64> = (0..4)
            .map(|i| {
                let mut s = diag[i] * x_true[i];
                if i > 0 {
                    s += lower[i] * x_true[i - 1];
                }
                if i < 3 {
                    s += upper[i] * x_true[i + 1];
                }
                s
            })
            .collect();
        let x = solve_tridiagonal(&lower, &diag, &upper, &rhs).unwrap();
        for i in 0..4 {
            assert!((x[i] - x_true[i]).abs() < 1e-14);
        }
        assert!(solve_tridiagonal(&[0.0, 1.0], &[0.0, 1.0], &[1.0, 0.0], &[1.0, 1.0]).is_err());
    }

    #[test]
    fn periodic_spline_reproduces_trig() {
        let period = 2.0;
        let k = 256;
        let samples: Vec<f64> = (0..=k)
            .map(|i| (std::f64::consts::PI * i as f64 * period / k as f64).sin() + 0.3)
            .collect();
        let spline = PeriodicSpline::new(period, &samples).unwrap();
        for i in 0..50 {
            let t = 0.0371 * i as f64 - 0.4;
            let w = std::f64::consts::PI;
            assert!((spline.value(t) - ((w * t).sin() + 0.3)).abs() < 1e-7);
            assert!((spline.derivative(t) - w * (w * t).cos()).abs() < 1e-4);
        }
        // nodal derivatives superconverge
        let t = 5.0 * period / k as f64;
        let w = std::f64::consts::PI;
        assert!((spline.derivative(t) - w * (w * t).cos()).abs() < 1e-8);
    }
}
