use super::lentz;
use crate::error::{Error, Result};

const SERIES_LIMIT: f64 = 12.0;

fn check_arg(x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("integer-order I_n(x) requires finite x > 0, got {x}")))
    }
}

/// Ratios `I_{k+1}(x) / I_k(x)` for `0 <= k <= n_max`, by downward recurrence
/// `r_k = 1 / (2(k+1)/x + r_{k+1})` seeded with a continued fraction.
pub fn bessel_i_int_ratios(n_max: usize, x: f64) -> Result<Vec<f64>> {
    check_arg(x)?;
    Ok(ratios_from(n_max, n_max + 20 + x.ceil() as usize, x))
}

fn ratios_from(n_max: usize, start: usize, x: f64) -> Vec<f64> {
    let inv = 2.0 / x;
    // r_start = 1 / (2(s+1)/x + 1/(2(s+2)/x + ...))
    let mut r = 1.0 / lentz(|k| (start + 1 + k) as f64 * inv, 1.0);
    let mut out = vec![0.0; n_max + 1];
    for k in (0..start).rev() {
        r = 1.0 / ((k + 1) as f64 * inv + r);
        if k <= n_max {
            out[k] = r;
        }
    }
    if start <= n_max {
        out[start..].iter_mut().for_each(|v| *v = f64::NAN);
    }
    out
}

/// `e^{-x} I_k(x)` for `0 <= k <= n_max`.
///
/// Power series for `x <= 12`; Miller's downward algorithm normalized by
/// `I_0 + 2 sum_{k>=1} I_k = e^x` above.
pub fn bessel_i_int_scaled(n_max: usize, x: f64) -> Result<Vec<f64>> {
    check_arg(x)?;
    if x <= SERIES_LIMIT {
        let scale = (-x).exp();
        return Ok((0..=n_max).map(|k| series(k, x) * scale).collect());
    }
    let depth = n_max + x.ceil() as usize + 10 * x.sqrt().ceil() as usize + 40;
    let ratios = ratios_from(depth, depth + 20, x);
    // I_k / I_0 = prod_{j<k} r_j
    let mut rel = Vec::with_capacity(depth + 1);
    let mut acc = 1.0;
    rel.push(acc);
    let mut neumann = 1.0;
    for r in ratios.iter().take(depth) {
        acc *= r;
        rel.push(acc);
        neumann += 2.0 * acc;
    }
    let i0 = 1.0 / neumann;
    Ok(rel[..=n_max].iter().map(|v| v * i0).collect())
}

fn series(k: usize, x: f64) -> f64 {
    let half = 0.5 * x;
    let mut term = (1..=k).fold(1.0, |acc, j| acc * half / j as f64);
    let mut sum = term;
    let q = half * half;
    for j in 1..500 {
        term *= q / (j * (j + k)) as f64;
        sum += term;
        if term < 1e-17 * sum {
            break;
        }
    }
    sum
}
