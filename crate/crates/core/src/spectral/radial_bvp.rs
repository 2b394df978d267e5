//! Radial boundary-value problems on `(0, R)` with homogeneous Dirichlet
//! data at `R`:
//!
//! ```text
//! -(1/r^2)(r^2 u')' + (n(n+1)/r^2 + kappa) u = f
//! ```
//!
//! with `kappa = 1` for `xi` and `kappa = 0` for `psi`. The equation is
//! multiplied by `r^2` and discretized by a conservative three-point scheme
//! on a uniform grid. For `n >= 1` regularity forces `u(0) = 0`; for `n = 0`
//! the origin row is the zero-flux cell balance.

use crate::error::{Error, Result};
use crate::numerics::solve_tridiagonal;

/// Default number of radial intervals.
pub const DEFAULT_RADIAL_INTERVALS: usize = 2000;

#[derive(Debug, Clone, PartialEq)]
pub struct RadialBvpSolution {
    pub n: usize,
    /// `r_i = i R / N`, `i = 0..=N`.
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    /// `du/dr` at `r = R`, second-order one-sided difference.
    pub boundary_flux: f64,
}

struct System {
    lower: Vec<f64>,
    diag: Vec<f64>,
    upper: Vec<f64>,
    /// Cell volumes `int r^2 dr`, one per unknown.
    volume: Vec<f64>,
    /// Index of the first unknown node (0 or 1).
    first: usize,
    h: f64,
    grid: Vec<f64>,
}

fn assemble(n: usize, kappa: f64, radius: f64, intervals: usize) -> Result<System> {
    if intervals < 4 {
        return Err(Error::GridTooSmall(format!("radial solve needs at least 4 intervals, got {intervals}")));
    }
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(Error::Domain(format!("boundary radius must be positive, got {radius}")));
    }
    let h = radius / intervals as f64;
    let grid: Vec<f64> = (0..=intervals).map(|i| h * i as f64).collect();
    let first = usize::from(n > 0);
    let size = intervals - first;
    let mut lower = vec![0.0; size];
    let mut diag = vec![0.0; size];
    let mut upper = vec![0.0; size];
    let mut volume = vec![0.0; size];
    let centrifugal = (n * (n + 1)) as f64;
    for (row, i) in (first..intervals).enumerate() {
        let r = grid[i];
        let inner = if i == 0 { 0.0 } else { (r - 0.5 * h).powi(2) / h };
        let outer = (r + 0.5 * h).powi(2) / h;
        let (vol, span) = if i == 0 { (h * h * h / 24.0, 0.5 * h) } else { (r * r * h + h * h * h / 12.0, h) };
        diag[row] = inner + outer + centrifugal * span + kappa * vol;
        lower[row] = -inner;
        upper[row] = -outer;
        volume[row] = vol;
    }
    Ok(System { lower, diag, upper, volume, first, h, grid })
}

fn flux_from(values: &[f64], h: f64) -> f64 {
    let k = values.len() - 1;
    (3.0 * values[k] - 4.0 * values[k - 1] + values[k - 2]) / (2.0 * h)
}

fn solve(n: usize, kappa: f64, radius: f64, intervals: usize, forcing: &dyn Fn(f64) -> f64) -> Result<RadialBvpSolution> {
    let sys = assemble(n, kappa, radius, intervals)?;
    let rhs: Vec<f64> = sys
        .volume
        .iter()
        .enumerate()
        .map(|(row, v)| v * forcing(sys.grid[row + sys.first]))
        .collect();
    if let Some(bad) = rhs.iter().position(|v| !v.is_finite()) {
        return Err(Error::Domain(format!("forcing is not finite at r = {}", sys.grid[bad + sys.first])));
    }
    let inner = solve_tridiagonal(&sys.lower, &sys.diag, &sys.upper, &rhs)?;
    let mut values = vec![0.0; intervals + 1];
    values[sys.first..intervals].copy_from_slice(&inner);
    let boundary_flux = flux_from(&values, sys.h);
    Ok(RadialBvpSolution { n, grid: sys.grid, values, boundary_flux })
}

/// `-(1/r^2)(r^2 xi')' + (n(n+1)/r^2 + 1) xi = f`, `xi(R) = 0`.
pub fn solve_xi<F: Fn(f64) -> f64>(n: usize, forcing: F, radius: f64, intervals: usize) -> Result<RadialBvpSolution> {
    solve(n, 1.0, radius, intervals, &forcing)
}

/// `-(1/r^2)(r^2 psi')' + (n(n+1)/r^2) psi = mu f1 + f2`, `psi(R) = 0`.
pub fn solve_psi<F1, F2>(n: usize, f1: F1, f2: F2, mu: f64, radius: f64, intervals: usize) -> Result<RadialBvpSolution>
where
    F1: Fn(f64) -> f64,
    F2: Fn(f64) -> f64,
{
    solve(n, 0.0, radius, intervals, &|r| mu * f1(r) + f2(r))
}

/// Which radial operator a flux bound refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RadialOperator {
    /// With the zeroth-order term (`xi`).
    Screened,
    /// Without it (`psi`).
    Harmonic,
}

/// `(n+1) sup_f |u'(R)|^2 / int_0^R f^2 r^2 dr` for the discrete operator,
/// from the representer of the flux functional.
pub fn flux_bound_constant(n: usize, op: RadialOperator, radius: f64, intervals: usize) -> Result<f64> {
    let kappa = match op {
        RadialOperator::Screened => 1.0,
        RadialOperator::Harmonic => 0.0,
    };
    let sys = assemble(n, kappa, radius, intervals)?;
    let size = sys.diag.len();
    // flux = e . u with u = A^{-1} (V f); the representer solves A^T c = e
    let mut e = vec![0.0; size];
    e[size - 1] = -4.0 / (2.0 * sys.h);
    e[size - 2] = 1.0 / (2.0 * sys.h);
    let mut lower_t = vec![0.0; size];
    let mut upper_t = vec![0.0; size];
    lower_t[1..].copy_from_slice(&sys.upper[..size - 1]);
    upper_t[..size - 1].copy_from_slice(&sys.lower[1..]);
    let c = solve_tridiagonal(&lower_t, &sys.diag, &upper_t, &e)?;
    let sup: f64 = c.iter().zip(&sys.volume).map(|(c, v)| c * c * v).sum();
    Ok((n + 1) as f64 * sup)
}

/// `int_0^R f^2 r^2 dr` with the solver's cell volumes.
pub fn forcing_norm_sq<F: Fn(f64) -> f64>(n: usize, forcing: F, radius: f64, intervals: usize) -> Result<f64> {
    let sys = assemble(n, 0.0, radius, intervals)?;
    Ok(sys
        .volume
        .iter()
        .enumerate()
        .map(|(row, v)| v * forcing(sys.grid[row + sys.first]).powi(2))
        .sum())
}
