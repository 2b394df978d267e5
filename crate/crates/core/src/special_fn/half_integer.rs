use std::f64::consts::PI;

use super::lentz;
use crate::error::{Error, Result};

/// `P_0(r), ..., P_{n_max}(r)` at a single radius.
#[derive(Debug, Clone, PartialEq)]
pub struct PnTable {
    r: f64,
    values: Vec<f64>,
}

impl PnTable {
    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn max_order(&self) -> usize {
        self.values.len() - 1
    }

    /// `P_n(r)`; panics if `n > max_order`.
    pub fn get(&self, n: usize) -> f64 {
        self.values[n]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Order at which the downward recurrence is started for a table up to `n_max`.
pub fn seed_order(r: f64, n_max: usize) -> usize {
    n_max + 20usize.max(r.ceil() as usize)
}

/// Tail value `P_N(r)` used to seed the downward sweep.
fn tail(r: f64, order: usize) -> f64 {
    let r2 = r * r;
    let lead = (2 * order + 3) as f64;
    if r2 < 1e-17 * lead * (lead + 2.0) {
        return 1.0 / lead;
    }
    // 1/P_N = (2N+3) + r^2/((2N+5) + r^2/((2N+7) + ...))
    1.0 / lentz(|k| (2 * (order + k) + 3) as f64, r2)
}

/// Fills `out` with `P_0(r)..P_{out.len()-1}(r)`. No argument checking; `r > 0`.
pub fn pn_values_into(r: f64, out: &mut [f64]) {
    let n_max = out.len() - 1;
    let start = seed_order(r, n_max);
    let r2 = r * r;
    let mut p = tail(r, start);
    for n in (0..start).rev() {
        p = 1.0 / (r2 * p + (2 * n + 3) as f64);
        if n <= n_max {
            out[n] = p;
        }
    }
}

/// Table of `P_n(r)` for `0 <= n <= n_max`.
pub fn pn_table(r: f64, n_max: usize) -> Result<PnTable> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::Domain(format!("P_n(r) requires finite r > 0, got {r}")));
    }
    let mut values = vec![0.0; n_max + 1];
    pn_values_into(r, &mut values);
    Ok(PnTable { r, values })
}

/// `P_0(r) = coth(r)/r - 1/r^2`, switching to the recurrence below `r = 1`
/// where the closed form cancels.
pub fn p0(r: f64) -> f64 {
    if r > 1.0 {
        1.0 / (r * r.tanh()) - 1.0 / (r * r)
    } else {
        let mut v = [0.0];
        pn_values_into(r, &mut v);
        v[0]
    }
}

/// `e^{-r} I_{n+1/2}(r)`.
pub fn bessel_i_half_scaled(n: usize, r: f64) -> Result<f64> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::Domain(format!("I_(n+1/2)(r) requires finite r > 0, got {r}")));
    }
    // e^{-r} I_{1/2}(r) = sqrt(2/(pi r)) (1 - e^{-2r}) / 2
    let mut value = (2.0 / (PI * r)).sqrt() * (-(-2.0 * r).exp_m1()) * 0.5;
    if n > 0 {
        let mut ratios = vec![0.0; n];
        pn_values_into(r, &mut ratios);
        // I_{k+3/2} = r P_k I_{k+1/2}
        for p in ratios {
            value *= r * p;
        }
    }
    Ok(value)
}

/// `I_{n+1/2}(r)`. Signals [`Error::Overflow`] instead of returning infinity.
pub fn bessel_i_half(n: usize, r: f64) -> Result<f64> {
    let scaled = bessel_i_half_scaled(n, r)?;
    if scaled == 0.0 {
        return Ok(0.0);
    }
    if r < 700.0 {
        return Ok(scaled * r.exp());
    }
    let log_value = r + scaled.ln();
    if log_value >= f64::MAX.ln() {
        return Err(Error::Overflow(format!(
            "I_({n}+1/2)({r}) exceeds the double range (log value {log_value:.3})"
        )));
    }
    Ok(log_value.exp())
}

/// `|LHS - RHS|` of `d/dr (I_{n+1/2}(r)/r^{1/2}) = (I_{n+3/2}(r) + (n/r) I_{n+1/2}(r)) / r^{1/2}`,
/// with the derivative taken by central difference.
pub fn pn_derivative_identity_residual(n: usize, r: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::Domain(format!("identity residual requires r > 0, got {r}")));
    }
    let h = (1e-6f64).max(1e-6 * r);
    let g = |x: f64| -> Result<f64> { Ok(bessel_i_half(n, x)? / x.sqrt()) };
    let lhs = if r > h {
        (g(r + h)? - g(r - h)?) / (2.0 * h)
    } else {
        // forward three-point stencil keeps the argument positive
        (-3.0 * g(r)? + 4.0 * g(r + h)? - g(r + 2.0 * h)?) / (2.0 * h)
    };
    let inner = bessel_i_half(n, r)?;
    let outer = bessel_i_half(n + 1, r)?;
    let rhs = (outer + n as f64 / r * inner) / r.sqrt();
    Ok((lhs - rhs).abs())
}
