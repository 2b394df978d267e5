//! Linear growth rates of spherical-harmonic boundary modes about the
//! periodic base state.
//!
//! For mode `n` the rate is
//!
//! ```text
//! H_n = {R [P_1 - P_n] - (n-1)/R} R' - (n/R^3)(n(n+1)/2 - 1) + (mu sigma_tilde/3) R^2 [P_1 - P_n]
//! ```
//!
//! evaluated on `R = R*(t)`. Period integrals use Simpson's rule on the
//! half-step grid (orbit nodes plus interval midpoints).

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::base_state::{BaseState, ThresholdOptions};
use crate::error::{Error, Result};
use crate::numerics::{brent, simpson};
use crate::periodic_orbit::{find_periodic_radius, ModelParams, NutrientProfile};
use crate::special_fn::pn_values_into;

/// Radius, rate and `P_n` tables sampled on the half-step grid of one period.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeGrid {
    period: f64,
    mu: f64,
    sigma_tilde: f64,
    n_max: usize,
    radius: Vec<f64>,
    rate: Vec<f64>,
    p: Vec<f64>,
}

impl ModeGrid {
    /// Samples at `t_k = k h / 2`, `k = 0..=2M`, with `P_0..P_{n_max}` at each.
    pub fn new(state: &BaseState, n_max: usize) -> Self {
        let orbit = state.orbit();
        let m = orbit.intervals();
        let h = orbit.step();
        let width = n_max.max(2) + 1;
        let mut radius = Vec::with_capacity(2 * m + 1);
        let mut rate = Vec::with_capacity(2 * m + 1);
        for k in 0..=2 * m {
            if k % 2 == 0 {
                radius.push(orbit.values()[k / 2]);
                rate.push(orbit.derivs()[k / 2]);
            } else {
                let t = 0.5 * h * k as f64;
                radius.push(state.radius(t));
                rate.push(state.radius_rate(t));
            }
        }
        let mut p = vec![0.0; radius.len() * width];
        p.par_chunks_mut(width)
            .zip(radius.par_iter())
            .for_each(|(row, &r)| pn_values_into(r, row));
        Self {
            period: state.period(),
            mu: state.params().mu,
            sigma_tilde: state.params().sigma_tilde,
            n_max: width - 1,
            radius,
            rate,
            p,
        }
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    /// Number of half-step samples per period, excluding the closing one.
    pub fn half_steps(&self) -> usize {
        self.radius.len() - 1
    }

    pub fn half_step(&self) -> f64 {
        self.period / self.half_steps() as f64
    }

    pub fn radius(&self) -> &[f64] {
        &self.radius
    }

    pub fn rate(&self) -> &[f64] {
        &self.rate
    }

    fn pn(&self, n: usize, k: usize) -> f64 {
        self.p[k * (self.n_max + 1) + n]
    }

    fn check_order(&self, n: usize) {
        assert!(n <= self.n_max, "mode {n} exceeds the sampled order {}", self.n_max);
    }

    /// `R'`-proportional part of `H_n` at sample `k`.
    pub fn rate_part(&self, n: usize, k: usize) -> f64 {
        self.check_order(n);
        let r = self.radius[k];
        (r * (self.pn(1, k) - self.pn(n, k)) - (n as f64 - 1.0) / r) * self.rate[k]
    }

    /// `H_n` at sample `k` with the orbit frozen and `mu` overridden in the
    /// explicit term.
    pub fn h_with_mu(&self, n: usize, k: usize, mu: f64) -> f64 {
        let r = self.radius[k];
        let nf = n as f64;
        let curvature = nf / (r * r * r) * (0.5 * nf * (nf + 1.0) - 1.0);
        let source = mu * self.sigma_tilde / 3.0 * r * r * (self.pn(1, k) - self.pn(n, k));
        self.rate_part(n, k) - curvature + source
    }

    pub fn h(&self, n: usize, k: usize) -> f64 {
        self.h_with_mu(n, k, self.mu)
    }

    /// `H_n` over one period, `2M + 1` samples.
    pub fn h_samples(&self, n: usize) -> Vec<f64> {
        (0..self.radius.len()).map(|k| self.h(n, k)).collect()
    }

    pub fn log_multiplier(&self, n: usize) -> f64 {
        self.log_multiplier_with_mu(n, self.mu)
    }

    pub fn log_multiplier_with_mu(&self, n: usize, mu: f64) -> f64 {
        let v: Vec<f64> = (0..self.radius.len()).map(|k| self.h_with_mu(n, k, mu)).collect();
        simpson(&v, self.half_step())
    }

    /// Period integral of the `R'`-proportional part; zero up to quadrature error.
    pub fn closed_loop(&self, n: usize) -> f64 {
        let v: Vec<f64> = (0..self.radius.len()).map(|k| self.rate_part(n, k)).collect();
        simpson(&v, self.half_step())
    }

    /// `Lambda_0..Lambda_{n_max}`.
    pub fn log_multipliers(&self) -> Vec<f64> {
        (0..=self.n_max).into_par_iter().map(|n| self.log_multiplier(n)).collect()
    }

    /// Primitive `G(t_k) = int_0^{t_k} H_n` on the half-step grid of one
    /// period, plus the midpoint values `G(t_{2j+1})` from the quadratic rule.
    pub fn primitive(&self, n: usize) -> Vec<f64> {
        let h = self.h_samples(n);
        let step = 2.0 * self.half_step();
        let mut g = vec![0.0; h.len()];
        for j in 0..h.len() / 2 {
            let (a, b, c) = (h[2 * j], h[2 * j + 1], h[2 * j + 2]);
            g[2 * j + 1] = g[2 * j] + step * (5.0 * a + 8.0 * b - c) / 24.0;
            g[2 * j + 2] = g[2 * j] + step * (a + 4.0 * b + c) / 6.0;
        }
        g
    }
}

/// `H_n(tau)` evaluated directly from the orbit interpolant.
pub fn h_n(n: usize, tau: f64, state: &BaseState) -> f64 {
    let r = state.radius(tau);
    let rate = state.radius_rate(tau);
    let mut p = vec![0.0; n.max(1) + 1];
    pn_values_into(r, &mut p);
    let ModelParams { mu, sigma_tilde, .. } = *state.params();
    let nf = n as f64;
    let gap = p[1] - p[n];
    (r * gap - (nf - 1.0) / r) * rate - nf / (r * r * r) * (0.5 * nf * (nf + 1.0) - 1.0)
        + mu * sigma_tilde / 3.0 * r * r * gap
}

/// `Lambda_n = int_0^T H_n`.
pub fn log_multiplier(n: usize, state: &BaseState) -> f64 {
    ModeGrid::new(state, n).log_multiplier(n)
}

/// Per-mode summary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeMultiplier {
    pub n: usize,
    pub log_multiplier: f64,
    /// `-Lambda_n / (T (n^3 + 1))`, the decay rate this mode certifies.
    pub decay_delta: Option<f64>,
}

pub fn mode_multipliers(grid: &ModeGrid) -> Vec<ModeMultiplier> {
    let period = grid.period();
    grid.log_multipliers()
        .into_iter()
        .enumerate()
        .map(|(n, lambda)| ModeMultiplier {
            n,
            log_multiplier: lambda,
            decay_delta: (n >= 2).then(|| -lambda / (period * ((n * n * n) as f64 + 1.0))),
        })
        .collect()
}

/// `exp(int_s^t H_n)`.
pub fn multiplier_between(n: usize, s: f64, t: f64, state: &BaseState) -> Result<f64> {
    if !(t >= s) {
        return Err(Error::InvalidParameter { field: "t", reason: format!("t = {t} precedes s = {s}") });
    }
    let period = state.period();
    let whole = ((t - s) / period).floor();
    let rest = t - s - whole * period;
    let step = state.orbit().step();
    let mut total = if whole > 0.0 { whole * log_multiplier(n, state) } else { 0.0 };
    if rest > 0.0 {
        let panels = 2 * ((rest / step).ceil() as usize).max(1);
        let h = rest / panels as f64;
        let v: Vec<f64> = (0..=panels).map(|k| h_n(n, s + h * k as f64, state)).collect();
        total += simpson(&v, h);
    }
    Ok(total.exp())
}

/// Uniform decay rate certified over period-aligned windows.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    /// `min_{2<=n<=n_max} -Lambda_n / (T (n^3 + 1))`.
    pub delta: f64,
    /// Mode attaining the minimum.
    pub binding_mode: usize,
}

/// Over a window of `k` whole periods the exponent is exactly `k Lambda_n`,
/// so every aligned window gives the same per-mode rate.
pub fn fit_decay_delta(n_max: usize, state: &BaseState) -> Result<DecayFit> {
    decay_from_grid(&ModeGrid::new(state, n_max.max(2)), n_max.max(2))
}

pub fn decay_from_grid(grid: &ModeGrid, n_max: usize) -> Result<DecayFit> {
    let period = grid.period();
    let mut best = DecayFit { delta: f64::INFINITY, binding_mode: 2 };
    for n in 2..=n_max {
        let lambda = grid.log_multiplier(n);
        if lambda >= 0.0 {
            return Err(Error::Stability { n, log_multiplier: lambda });
        }
        let rate = -lambda / (period * ((n * n * n) as f64 + 1.0));
        if rate < best.delta {
            best = DecayFit { delta: rate, binding_mode: n };
        }
    }
    Ok(best)
}

/// Bound `exp(int_s^t H_0) <= C exp(-delta0 (t - s))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mode0Decay {
    pub constant: f64,
    pub rate: f64,
}

/// Takes `delta0 = -Lambda_0 / T` and the smallest `C` valid over all sample
/// pairs `s <= t` in `[0, horizon_periods T]`.
pub fn mode0_decay_check(state: &BaseState, horizon_periods: usize) -> Mode0Decay {
    let grid = ModeGrid::new(state, 2);
    mode0_from_grid(&grid, horizon_periods)
}

fn mode0_from_grid(grid: &ModeGrid, horizon_periods: usize) -> Mode0Decay {
    let g = grid.primitive(0);
    let steps = grid.half_steps();
    let lambda = g[steps];
    let rate = -lambda / grid.period();
    let dt = grid.half_step();
    // u(t) = G(t) + rate t is periodic; C = exp(max_{s<=t} u(t) - u(s))
    let mut lowest = f64::INFINITY;
    let mut excess = 0.0f64;
    for i in 0..=horizon_periods.max(1) * steps {
        let u = lambda * (i / steps) as f64 + g[i % steps] + rate * dt * i as f64;
        lowest = lowest.min(u);
        excess = excess.max(u - lowest);
    }
    Mode0Decay { constant: excess.exp(), rate }
}

/// Stability verdict for the state's own `mu`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Classification {
    /// All non-translational modes decay; mode 1 is neutral.
    Stable,
    /// Some `|Lambda_n| <= tol`, none clearly positive.
    ThresholdAdjacent { n: usize },
    Unstable { first_unstable_n: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassifyOptions {
    pub n_scan: usize,
    pub tol: f64,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        Self { n_scan: 64, tol: 1e-9 }
    }
}

pub fn classify(state: &BaseState, opts: &ClassifyOptions) -> Classification {
    classify_multipliers(&ModeGrid::new(state, opts.n_scan.max(2)).log_multipliers(), opts)
}

/// Classifies from `Lambda_0..Lambda_{n_scan}`.
pub fn classify_multipliers(lambdas: &[f64], opts: &ClassifyOptions) -> Classification {
    let scanned = || lambdas.iter().enumerate().filter(|&(n, _)| n != 1);
    if let Some((n, _)) = scanned().find(|&(_, &l)| l > opts.tol) {
        return Classification::Unstable { first_unstable_n: n };
    }
    if let Some((n, _)) = scanned().find(|&(_, &l)| l.abs() <= opts.tol) {
        return Classification::ThresholdAdjacent { n };
    }
    Classification::Stable
}

/// The threshold as the root in `mu` of `Lambda_2(mu) = 0`, with the orbit
/// recomputed for every trial `mu`.
pub fn mu_star_from_mode2(sigma_tilde: f64, phi: &NutrientProfile, opts: &ThresholdOptions) -> Result<f64> {
    let period = phi.period();
    let lambda2 = |mu: f64| -> Result<f64> {
        let params = ModelParams::new(mu, sigma_tilde, period)?;
        let state = BaseState::from_orbit(params, phi.clone(), find_periodic_radius(&params, phi, &opts.orbit)?, opts.orbit);
        Ok(ModeGrid::new(&state, 2).log_multiplier(2))
    };
    let mut hi = 1.0;
    let mut expansions = 0;
    while lambda2(hi)? < 0.0 {
        hi *= 2.0;
        expansions += 1;
        if expansions > 60 {
            return Err(Error::Convergence("mode 2 stays stable for every trial mu".into()));
        }
    }
    let mut lo = 0.5 * hi;
    while lambda2(lo)? > 0.0 {
        lo *= 0.5;
        expansions += 1;
        if expansions > 120 {
            return Err(Error::Convergence("mode 2 is unstable for every trial mu".into()));
        }
    }
    brent(lambda2, lo, hi, opts.rel_tol * lo, opts.max_iter)
}
