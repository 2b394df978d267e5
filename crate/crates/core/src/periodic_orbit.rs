//! The radius equation `R' = mu R (phi(t) P_0(R) - sigma_tilde/3)` and its
//! unique positive `T`-periodic solution.
//!
//! The orbit is located as the fixed point of the Poincaré map
//! `R(0) -> R(T)`. The flow of a scalar ODE preserves order, so the map is
//! strictly increasing and `R(T) - R(0)` changes sign exactly once on the
//! admissible bracket; bisection finds it and a few Newton steps polish it.

use std::f64::consts::PI;
use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::error::{check_positive, Error, Result};
use crate::numerics::{simpson, PeriodicSpline};
use crate::special_fn::p0;

/// Physical constants of the model. Surface tension is rescaled to one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Aggressiveness `mu`.
    pub mu: f64,
    /// Apoptosis threshold `sigma_tilde`.
    pub sigma_tilde: f64,
    /// Period `T` of the nutrient supply.
    pub period: f64,
}

impl ModelParams {
    pub fn new(mu: f64, sigma_tilde: f64, period: f64) -> Result<Self> {
        let params = Self { mu, sigma_tilde, period };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        check_positive("mu", self.mu)?;
        check_positive("sigma_tilde", self.sigma_tilde)?;
        check_positive("period", self.period)
    }

    /// Surface tension; fixed to one by rescaling.
    pub fn gamma(&self) -> f64 {
        1.0
    }

    pub fn with_mu(&self, mu: f64) -> Self {
        Self { mu, ..*self }
    }
}

/// A positive `T`-periodic nutrient supply `phi(t)`.
#[derive(Debug, Clone, PartialEq)]
pub enum NutrientProfile {
    /// `mean + amplitude * cos(2 pi t / period + phase)`.
    Cosine { mean: f64, amplitude: f64, period: f64, phase: f64 },
    Tabulated(TabulatedProfile),
}

/// One period of uniformly spaced samples, first and last equal, interpolated
/// by a periodic cubic spline.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedProfile {
    period: f64,
    samples: Vec<f64>,
    spline: PeriodicSpline,
}

impl TabulatedProfile {
    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }
}

impl NutrientProfile {
    pub fn cosine(mean: f64, amplitude: f64, period: f64) -> Result<Self> {
        Self::cosine_with_phase(mean, amplitude, period, 0.0)
    }

    pub fn cosine_with_phase(mean: f64, amplitude: f64, period: f64, phase: f64) -> Result<Self> {
        check_positive("mean", mean)?;
        check_positive("period", period)?;
        if !amplitude.is_finite() || amplitude.abs() >= mean {
            return Err(Error::InvalidParameter {
                field: "amplitude",
                reason: format!("|amplitude| must be below the mean {mean} to keep phi positive, got {amplitude}"),
            });
        }
        if !phase.is_finite() {
            return Err(Error::InvalidParameter { field: "phase", reason: "must be finite".into() });
        }
        Ok(Self::Cosine { mean, amplitude, period, phase })
    }

    pub fn constant(value: f64, period: f64) -> Result<Self> {
        Self::cosine(value, 0.0, period)
    }

    /// `samples` spans one closed period on a uniform grid (last = first).
    pub fn tabulated(period: f64, samples: Vec<f64>) -> Result<Self> {
        check_positive("period", period)?;
        if samples.len() < 4 {
            return Err(Error::InvalidParameter {
                field: "samples",
                reason: format!("need at least 4 samples over one period, got {}", samples.len()),
            });
        }
        if let Some(bad) = samples.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
            return Err(Error::InvalidParameter {
                field: "samples",
                reason: format!("nutrient samples must be positive, found {bad}"),
            });
        }
        let first = samples[0];
        let last = *samples.last().unwrap();
        if (first - last).abs() > 1e-9 {
            return Err(Error::InvalidParameter {
                field: "samples",
                reason: format!("first and last samples must agree within 1e-9 (periodicity), got {first} and {last}"),
            });
        }
        let spline = PeriodicSpline::new(period, &samples)?;
        Ok(Self::Tabulated(TabulatedProfile { period, samples, spline }))
    }

    /// Reads `(t, phi)` rows spanning exactly one period, starting at `t = 0`.
    pub fn from_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
        let mut times = Vec::new();
        let mut values = Vec::new();
        for (row, record) in rdr.records().enumerate() {
            let record = record.map_err(|e| Error::InvalidParameter { field: "profile", reason: e.to_string() })?;
            let parse = |i: usize| -> Result<f64> {
                record
                    .get(i)
                    .and_then(|s| s.parse::<f64>().ok())
                    .ok_or_else(|| Error::InvalidParameter {
                        field: "profile",
                        reason: format!("row {}: expected two numeric columns (t, phi)", row + 1),
                    })
            };
            times.push(parse(0)?);
            values.push(parse(1)?);
        }
        if times.len() < 4 {
            return Err(Error::InvalidParameter { field: "profile", reason: "need at least 4 rows".into() });
        }
        if times[0].abs() > 1e-12 {
            return Err(Error::InvalidParameter { field: "profile", reason: "first time must be 0".into() });
        }
        let period = *times.last().unwrap();
        let h = period / (times.len() - 1) as f64;
        for (i, t) in times.iter().enumerate() {
            if (t - i as f64 * h).abs() > 1e-9 * period.max(1.0) {
                return Err(Error::InvalidParameter {
                    field: "profile",
                    reason: format!("times must be uniformly spaced; row {} has t = {t}", i + 1),
                });
            }
        }
        Self::tabulated(period, values)
    }

    pub fn period(&self) -> f64 {
        match self {
            Self::Cosine { period, .. } => *period,
            Self::Tabulated(tab) => tab.period,
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        match self {
            Self::Cosine { mean, amplitude, period, phase } => mean + amplitude * (2.0 * PI * t / period + phase).cos(),
            Self::Tabulated(tab) => tab.spline.value(t),
        }
    }

    /// The same supply shifted in time: `t -> phi(t + shift)`.
    pub fn shifted(&self, shift: f64) -> Result<Self> {
        match self {
            Self::Cosine { mean, amplitude, period, phase } => {
                Self::cosine_with_phase(*mean, *amplitude, *period, phase + 2.0 * PI * shift / period)
            }
            Self::Tabulated(tab) => {
                let k = tab.samples.len() - 1;
                let h = tab.period / k as f64;
                let samples = (0..=k).map(|i| tab.spline.value(i as f64 * h + shift)).collect();
                Self::tabulated(tab.period, samples)
            }
        }
    }
}

/// `(1/T) int_0^T phi(t) dt` by composite Simpson on at least 256 panels.
pub fn mean_nutrient(phi: &NutrientProfile) -> f64 {
    let period = phi.period();
    if let NutrientProfile::Tabulated(tab) = phi {
        let panels = tab.samples.len() - 1;
        if panels >= 256 && panels % 2 == 0 {
            return simpson(&tab.samples, period / panels as f64) / period;
        }
    }
    let panels = 512;
    let h = period / panels as f64;
    let values: Vec<f64> = (0..=panels).map(|i| phi.value(i as f64 * h)).collect();
    simpson(&values, h) / period
}

/// Right-hand side `mu R (phi(t) P_0(R) - sigma_tilde/3)`.
pub fn radius_rhs(t: f64, radius: f64, params: &ModelParams, phi: &NutrientProfile) -> Result<f64> {
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(Error::Domain(format!("radius must be positive, got {radius}")));
    }
    Ok(rhs(t, radius, params, phi))
}

#[inline]
pub(crate) fn rhs(t: f64, radius: f64, params: &ModelParams, phi: &NutrientProfile) -> f64 {
    params.mu * radius * (phi.value(t) * p0(radius) - params.sigma_tilde / 3.0)
}

fn integrate(
    r0: f64,
    params: &ModelParams,
    phi: &NutrientProfile,
    steps: usize,
    mut record: Option<&mut Vec<f64>>,
) -> Result<f64> {
    let h = params.period / steps as f64;
    let mut r = r0;
    if let Some(out) = record.as_deref_mut() {
        out.push(r);
    }
    for k in 0..steps {
        let t = k as f64 * h;
        let k1 = rhs(t, r, params, phi);
        let k2 = rhs(t + 0.5 * h, positive(r + 0.5 * h * k1, t)?, params, phi);
        let k3 = rhs(t + 0.5 * h, positive(r + 0.5 * h * k2, t)?, params, phi);
        let k4 = rhs(t + h, positive(r + h * k3, t)?, params, phi);
        r = positive(r + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4), t + h)?;
        if let Some(out) = record.as_deref_mut() {
            out.push(r);
        }
    }
    Ok(r)
}

fn positive(r: f64, t: f64) -> Result<f64> {
    if r > 0.0 && r.is_finite() {
        Ok(r)
    } else {
        Err(Error::NonPositiveRadius { t, radius: r })
    }
}

/// `R(T)` from `R(0) = r0` by classical RK4 with `steps` equal steps.
pub fn integrate_period(r0: f64, params: &ModelParams, phi: &NutrientProfile, steps: usize) -> Result<f64> {
    if !(r0 > 0.0) {
        return Err(Error::Domain(format!("initial radius must be positive, got {r0}")));
    }
    if steps < 64 {
        return Err(Error::InvalidParameter { field: "steps", reason: format!("need at least 64 steps, got {steps}") });
    }
    integrate(r0, params, phi, steps, None)
}

/// Knobs for [`find_periodic_radius`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OrbitOptions {
    /// RK4 steps per period; also the number of stored orbit intervals.
    pub steps: usize,
    /// Target `|R(T) - R(0)|` at the fixed point.
    pub tol: f64,
    /// Search bracket for `R(0)`.
    pub bracket: [f64; 2],
    pub max_iter: usize,
}

impl Default for OrbitOptions {
    fn default() -> Self {
        Self { steps: 1024, tol: 1e-11, bracket: [1e-3, 1e3], max_iter: 200 }
    }
}

impl OrbitOptions {
    pub fn validate(&self) -> Result<()> {
        if self.steps < 64 || self.steps % 2 != 0 {
            return Err(Error::InvalidParameter {
                field: "orbit.steps",
                reason: format!("must be even and >= 64, got {}", self.steps),
            });
        }
        check_positive("orbit.tol", self.tol)?;
        let [lo, hi] = self.bracket;
        if !(lo > 0.0 && hi > lo && hi.is_finite()) {
            return Err(Error::InvalidParameter {
                field: "orbit.bracket",
                reason: format!("need 0 < lo < hi, got [{lo}, {hi}]"),
            });
        }
        Ok(())
    }
}

/// The periodic orbit `R*(t)` sampled on `steps + 1` uniform nodes of `[0, T]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicRadius {
    period: f64,
    values: Vec<f64>,
    derivs: Vec<f64>,
    iterations: usize,
    periodicity_residual: f64,
}

impl PeriodicRadius {
    pub fn period(&self) -> f64 {
        self.period
    }

    /// Number of intervals `M`; there are `M + 1` nodes.
    pub fn intervals(&self) -> usize {
        self.values.len() - 1
    }

    pub fn step(&self) -> f64 {
        self.period / self.intervals() as f64
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.values.len()).map(|k| k as f64 * self.step()).collect()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `dR*/dt` at the nodes, from the ODE right-hand side.
    pub fn derivs(&self) -> &[f64] {
        &self.derivs
    }

    /// Poincaré-map evaluations spent locating the fixed point.
    pub fn iterations(&self) -> usize {
        self.iterations
    }

    /// `|R(T) - R(0)|` of the stored samples.
    pub fn periodicity_residual(&self) -> f64 {
        self.periodicity_residual
    }

    fn locate(&self, t: f64) -> (usize, f64) {
        let m = self.intervals();
        let s = t.rem_euclid(self.period) / self.step();
        let i = (s.floor() as usize).min(m - 1);
        (i, s - i as f64)
    }

    /// `R*(t)` for any real `t`, by cubic Hermite interpolation on the nodal
    /// values and ODE derivatives (periodic by construction).
    pub fn value(&self, t: f64) -> f64 {
        let (i, u) = self.locate(t);
        let h = self.step();
        let (y0, y1, d0, d1) = (self.values[i], self.values[i + 1], self.derivs[i], self.derivs[i + 1]);
        let u2 = u * u;
        let u3 = u2 * u;
        (2.0 * u3 - 3.0 * u2 + 1.0) * y0
            + (u3 - 2.0 * u2 + u) * h * d0
            + (-2.0 * u3 + 3.0 * u2) * y1
            + (u3 - u2) * h * d1
    }

    /// Derivative of the Hermite interpolant.
    pub fn derivative(&self, t: f64) -> f64 {
        let (i, u) = self.locate(t);
        let h = self.step();
        let (y0, y1, d0, d1) = (self.values[i], self.values[i + 1], self.derivs[i], self.derivs[i + 1]);
        let u2 = u * u;
        ((6.0 * u2 - 6.0 * u) * (y0 - y1)) / h + (3.0 * u2 - 4.0 * u + 1.0) * d0 + (3.0 * u2 - 2.0 * u) * d1
    }

    /// Largest gap between the ODE right-hand side and the derivative of a
    /// periodic cubic spline through the samples, over all nodes.
    pub fn ode_residual(&self) -> f64 {
        let Ok(spline) = PeriodicSpline::new(self.period, &self.values) else {
            return f64::INFINITY;
        };
        let h = self.step();
        self.derivs
            .iter()
            .enumerate()
            .map(|(k, d)| (spline.derivative(k as f64 * h) - d).abs())
            .fold(0.0, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Time average of `R*` (Simpson).
    pub fn mean(&self) -> f64 {
        simpson(&self.values, self.step()) / self.period
    }
}

/// The Poincaré map `R(0) -> R(T)`.
pub fn poincare_map(r0: f64, params: &ModelParams, phi: &NutrientProfile, steps: usize) -> Result<f64> {
    integrate_period(r0, params, phi, steps)
}

fn check_admissible(params: &ModelParams, phi: &NutrientProfile) -> Result<()> {
    let mean = mean_nutrient(phi);
    if mean <= params.sigma_tilde {
        return Err(Error::Admissibility { mean, sigma_tilde: params.sigma_tilde });
    }
    Ok(())
}

/// Locates the unique positive `T`-periodic solution of the radius equation.
pub fn find_periodic_radius(params: &ModelParams, phi: &NutrientProfile, opts: &OrbitOptions) -> Result<PeriodicRadius> {
    params.validate()?;
    opts.validate()?;
    if (phi.period() - params.period).abs() > 1e-12 * params.period {
        return Err(Error::InvalidParameter {
            field: "period",
            reason: format!("profile period {} differs from model period {}", phi.period(), params.period),
        });
    }
    check_admissible(params, phi)?;

    let steps = opts.steps;
    let mut evals = 0usize;
    let mut gap = |r: f64| -> Result<f64> {
        evals += 1;
        Ok(integrate(r, params, phi, steps, None)? - r)
    };

    let [mut lo, mut hi] = opts.bracket;
    let g_lo = gap(lo)?;
    let g_hi = gap(hi)?;
    if !(g_lo > 0.0 && g_hi < 0.0) {
        return Err(Error::Convergence(format!(
            "no sign change of R(T) - R(0) on [{lo}, {hi}]: values {g_lo:e}, {g_hi:e}"
        )));
    }

    // geometric bisection down to a tight relative bracket
    let mut r = (lo * hi).sqrt();
    let mut g = gap(r)?;
    let mut iterations = 0;
    while hi / lo > 1.0 + 1e-7 && g.abs() > opts.tol {
        if iterations >= opts.max_iter {
            return Err(Error::Convergence(format!("bisection stalled at R = {r} (gap {g:e})")));
        }
        if g > 0.0 {
            lo = r;
        } else {
            hi = r;
        }
        r = (lo * hi).sqrt();
        g = gap(r)?;
        iterations += 1;
    }

    // Newton polish with a central-difference slope, safeguarded by the bracket
    while g.abs() > opts.tol {
        if iterations >= opts.max_iter {
            return Err(Error::Convergence(format!(
                "Newton polish did not reach tol {:e}: last gap {g:e} at R = {r}",
                opts.tol
            )));
        }
        let dr = 1e-6 * r;
        let slope = (gap(r + dr)? - gap(r - dr)?) / (2.0 * dr);
        let mut next = r - g / slope;
        if !(next > lo && next < hi) || !next.is_finite() {
            next = 0.5 * (lo + hi);
        }
        r = next;
        g = gap(r)?;
        if g > 0.0 {
            lo = lo.max(r);
        } else {
            hi = hi.min(r);
        }
        iterations += 1;
    }

    let mut values = Vec::with_capacity(steps + 1);
    integrate(r, params, phi, steps, Some(&mut values))?;
    let h = params.period / steps as f64;
    let derivs = values.iter().enumerate().map(|(k, &v)| rhs(k as f64 * h, v, params, phi)).collect();
    let periodicity_residual = (values[steps] - values[0]).abs();
    Ok(PeriodicRadius { period: params.period, values, derivs, iterations: evals, periodicity_residual })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn coth_p0(r: f64) -> f64 {
        1.0 / (r * r.tanh()) - 1.0 / (r * r)
    }

    fn stationary_root(phi: f64, sigma_tilde: f64) -> f64 {
        // bisection oracle on the closed form
        let target = sigma_tilde / (3.0 * phi);
        let (mut lo, mut hi) = (1.0, 1e4);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if coth_p0(mid) > target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn rhs_examples() {
        let params = ModelParams::new(1.0, 1.0, 1.0).unwrap();
        let phi = NutrientProfile::constant(1.0, 1.0).unwrap();
        let v = radius_rhs(0.0, 1.0, &params, &phi).unwrap();
        assert!((v - (1.0 / 1f64.tanh() - 1.0 - 1.0 / 3.0)).abs() < 1e-15);
        assert!((v + 0.020_298_0).abs() < 1e-7);

        let phi2 = NutrientProfile::constant(2.0, 1.0).unwrap();
        let root = stationary_root(2.0, 1.0);
        assert!(radius_rhs(0.3, root, &params, &phi2).unwrap().abs() < 1e-13);

        let small = 1e-6;
        let v = radius_rhs(0.0, small, &params, &phi2).unwrap();
        assert!((v - small * (2.0 / 3.0 - 1.0 / 3.0)).abs() < 1e-15);
        assert!(radius_rhs(0.0, 0.0, &params, &phi2).is_err());
    }

    #[test]
    fn mean_nutrient_examples() {
        let cos = NutrientProfile::cosine(2.0, 0.5, 1.0).unwrap();
        assert!((mean_nutrient(&cos) - 2.0).abs() < 1e-14);
        let flat = NutrientProfile::tabulated(1.0, vec![3.0; 257]).unwrap();
        assert!((mean_nutrient(&flat) - 3.0).abs() < 1e-14);
        let quad: Vec<f64> = (0..=256).map(|i| i as f64 / 256.0).map(|t| 1.0 + t * (1.0 - t)).collect();
        let quad = NutrientProfile::tabulated(1.0, quad).unwrap();
        assert!((mean_nutrient(&quad) - 7.0 / 6.0).abs() < 1e-14);
    }

    #[test]
    fn profile_validation() {
        assert!(NutrientProfile::cosine(1.0, 1.0, 1.0).is_err());
        assert!(NutrientProfile::tabulated(1.0, vec![1.0, 2.0, 3.0, 1.1]).is_err());
        assert!(NutrientProfile::tabulated(1.0, vec![1.0, -2.0, 3.0, 1.0]).is_err());
        let csv = "t,phi\n0,2\n0.25,2.5\n0.5,2\n0.75,1.5\n1.0,2\n";
        let p = NutrientProfile::from_csv(csv.as_bytes()).unwrap();
        assert_eq!(p.period(), 1.0);
        assert!((p.value(0.25) - 2.5).abs() < 1e-12);
        let skewed = "t,phi\n0,2\n0.3,2.5\n0.5,2\n0.75,1.5\n1.0,2\n";
        assert!(NutrientProfile::from_csv(skewed.as_bytes()).is_err());
    }

    #[test]
    fn fixed_point_and_order_preservation() {
        let params = ModelParams::new(1.0, 1.0, 1.0).unwrap();
        let phi = NutrientProfile::constant(2.0, 1.0).unwrap();
        let root = stationary_root(2.0, 1.0);
        assert!((integrate_period(root, &params, &phi, 256).unwrap() - root).abs() < 1e-10);

        let phi = NutrientProfile::cosine(2.0, 0.5, 1.0).unwrap();
        let a = integrate_period(1.0, &params, &phi, 256).unwrap();
        let b = integrate_period(2.0, &params, &phi, 256).unwrap();
        assert!(a < b);
        assert!(integrate_period(1.0, &params, &phi, 32).is_err());
    }

    #[test]
    fn rk4_is_fourth_order() {
        let params = ModelParams::new(1.0, 1.0, 1.0).unwrap();
        let phi = NutrientProfile::cosine(2.0, 0.5, 1.0).unwrap();
        let r = |s| integrate_period(4.0, &params, &phi, s).unwrap();
        let (a, b, c) = (r(64), r(128), r(256));
        let ratio = (a - b) / (b - c);
        assert!((ratio - 16.0).abs() < 1.0, "ratio {ratio}");
        // Richardson-extrapolated reference
        let reference = c + (c - b) / 15.0;
        let fine = r(1024);
        assert!((fine - reference).abs() < 1e-11);
    }

    #[test]
    fn constant_supply_gives_constant_orbit() {
        let params = ModelParams::new(0.7, 1.0, 1.0).unwrap();
        let phi = NutrientProfile::constant(2.0, 1.0).unwrap();
        let orbit = find_periodic_radius(&params, &phi, &OrbitOptions::default()).unwrap();
        let root = stationary_root(2.0, 1.0);
        assert!((root - 4.73).abs() < 0.01);
        for v in orbit.values() {
            assert!((v - root).abs() < 1e-9);
        }
        assert!(orbit.periodicity_residual() < 1e-11);
    }

    #[test]
    fn small_amplitude_stays_close_to_stationary_root() {
        let params = ModelParams::new(1.0, 1.0, 1.0).unwrap();
        let root = stationary_root(2.0, 1.0);
        let mut devs = Vec::new();
        for amp in [0.02, 0.01, 0.005] {
            let phi = NutrientProfile::cosine(2.0, amp, 1.0).unwrap();
            let orbit = find_periodic_radius(&params, &phi, &OrbitOptions::default()).unwrap();
            devs.push(orbit.values().iter().map(|v| (v - root).abs()).fold(0.0, f64::max));
        }
        // O(A) deviation: halving A roughly halves it
        assert!((devs[0] / devs[1] - 2.0).abs() < 0.1);
        assert!((devs[1] / devs[2] - 2.0).abs() < 0.1);
    }

    #[test]
    fn orbit_is_periodic_and_satisfies_ode() {
        let params = ModelParams::new(1.0, 1.0, 1.0).unwrap();
        let phi = NutrientProfile::cosine(2.0, 0.5, 1.0).unwrap();
        let opts = OrbitOptions::default();
        let orbit = find_periodic_radius(&params, &phi, &opts).unwrap();
        assert!(orbit.periodicity_residual() <= opts.tol);
        assert!(orbit.ode_residual() < 1e-8);
        assert!(orbit.min() > 0.0);
        // interpolation reproduces nodes and the ODE between them
        let h = orbit.step();
        assert!((orbit.value(7.0 * h) - orbit.values()[7]).abs() < 1e-14);
        let t = 7.5 * h;
        let d = rhs(t, orbit.value(t), &params, &phi);
        assert!((orbit.derivative(t) - d).abs() < 1e-7);
    }

    #[test]
    fn uniqueness_from_different_brackets() {
        let params = ModelParams::new(2.0, 1.5, 2.0).unwrap();
        let phi = NutrientProfile::cosine(2.5, 1.0, 2.0).unwrap();
        let mut starts = Vec::new();
        for bracket in [[1e-3, 1e3], [0.1, 50.0], [1e-2, 200.0], [0.5, 20.0], [0.05, 500.0]] {
            let opts = OrbitOptions { bracket, ..OrbitOptions::default() };
            starts.push(find_periodic_radius(&params, &phi, &opts).unwrap().values()[0]);
        }
        for s in &starts {
            assert!((s - starts[0]).abs() < 1e-10);
        }
    }

    #[test]
    fn poincare_map_is_monotone() {
        let params = ModelParams::new(1.0, 1.0, 1.0).unwrap();
        let phi = NutrientProfile::cosine(2.0, 0.8, 1.0).unwrap();
        let mut prev = 0.0;
        for k in 0..40 {
            let r0 = 1e-3 * 1.3f64.powi(k);
            let v = poincare_map(r0, &params, &phi, 256).unwrap();
            assert!(v > prev);
            prev = v;
        }
    }

    #[test]
    fn inadmissible_and_bracket_errors() {
        let params = ModelParams::new(1.0, 3.0, 1.0).unwrap();
        let phi = NutrientProfile::cosine(2.0, 0.5, 1.0).unwrap();
        let err = find_periodic_radius(&params, &phi, &OrbitOptions::default()).unwrap_err();
        assert!(matches!(err, Error::Admissibility { .. }));

        let params = ModelParams::new(1.0, 1.0, 1.0).unwrap();
        let opts = OrbitOptions { bracket: [10.0, 20.0], ..OrbitOptions::default() };
        let err = find_periodic_radius(&params, &phi, &opts).unwrap_err();
        assert!(matches!(err, Error::Convergence(_)));
    }
}
