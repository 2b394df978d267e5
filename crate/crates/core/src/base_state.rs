//! The radially symmetric periodic solution `(sigma*, p*, R*)` and the
//! critical aggressiveness thresholds.
//!
//! The orbit `R*` solves `R' = mu R (phi P_0(R) - sigma_tilde/3)`, so it
//! depends on `mu` whenever `phi` is not constant. The threshold formulas are
//! explicit functionals of the orbit; [`mu_star_3d`] and [`mu_star_2d`]
//! therefore solve `mu = M[R*_mu]` for the self-consistent value, while
//! [`threshold_3d_on_orbit`] and [`threshold_2d_on_orbit`] evaluate the
//! functional on a fixed orbit.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{brent, simpson};
use crate::periodic_orbit::{find_periodic_radius, rhs, ModelParams, NutrientProfile, OrbitOptions, PeriodicRadius};
use crate::special_fn::{bessel_i_half_scaled, bessel_i_int_ratios, pn_table, pn_values_into};

/// Radial base state built on the periodic orbit for `params.mu`.
#[derive(Debug, Clone, PartialEq)]
pub struct BaseState {
    params: ModelParams,
    phi: NutrientProfile,
    orbit: PeriodicRadius,
    orbit_options: OrbitOptions,
}

/// `(d sigma*/dr, d p*/dr, d^2 p*/dr^2)` at `r = R*(t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryDerivatives {
    pub dsigma_dr: f64,
    pub dp_dr: f64,
    pub d2p_dr2: f64,
}

impl BaseState {
    pub fn new(params: ModelParams, phi: NutrientProfile, opts: &OrbitOptions) -> Result<Self> {
        let orbit = find_periodic_radius(&params, &phi, opts)?;
        Ok(Self { params, phi, orbit, orbit_options: *opts })
    }

    /// Assembles a state from an orbit already computed for `params`.
    pub(crate) fn from_orbit(params: ModelParams, phi: NutrientProfile, orbit: PeriodicRadius, orbit_options: OrbitOptions) -> Self {
        Self { params, phi, orbit, orbit_options }
    }

    /// Same supply and `sigma_tilde`, orbit recomputed for a new `mu`.
    pub fn with_mu(&self, mu: f64) -> Result<Self> {
        Self::new(self.params.with_mu(mu), self.phi.clone(), &self.orbit_options)
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn phi(&self) -> &NutrientProfile {
        &self.phi
    }

    pub fn orbit(&self) -> &PeriodicRadius {
        &self.orbit
    }

    pub fn orbit_options(&self) -> &OrbitOptions {
        &self.orbit_options
    }

    pub fn period(&self) -> f64 {
        self.params.period
    }

    pub fn radius(&self, t: f64) -> f64 {
        self.orbit.value(t)
    }

    /// `dR*/dt`, from the radius equation evaluated on the interpolated orbit.
    pub fn radius_rate(&self, t: f64) -> f64 {
        rhs(t, self.orbit.value(t), &self.params, &self.phi)
    }

    fn check_radius(&self, r: f64, t: f64) -> Result<f64> {
        let big_r = self.radius(t);
        if !(r >= 0.0 && r <= big_r * (1.0 + 1e-14)) {
            return Err(Error::Domain(format!("r = {r} outside [0, R*(t) = {big_r}]")));
        }
        Ok(big_r)
    }

    /// Nutrient concentration
    /// `phi(t) R*^{1/2} / I_{1/2}(R*) * I_{1/2}(r) / r^{1/2}`.
    pub fn sigma_star(&self, r: f64, t: f64) -> Result<f64> {
        let big_r = self.check_radius(r, t)?;
        let phi = self.phi.value(t);
        // e^{-R} R^{1/2} / I_{1/2}(R) * sqrt(2/pi) = 2R / (1 - e^{-2R})
        let at_origin = 2.0 * big_r / (-(-2.0 * big_r).exp_m1());
        if r == 0.0 {
            return Ok(phi * at_origin * (-big_r).exp());
        }
        let ratio = bessel_i_half_scaled(0, r)? / bessel_i_half_scaled(0, big_r)?;
        Ok(phi * (big_r / r).sqrt() * ratio * (r - big_r).exp())
    }

    /// Pressure
    /// `-mu sigma* + mu sigma_tilde r^2/6 + 1/R* + mu phi - mu sigma_tilde R*^2/6`.
    pub fn p_star(&self, r: f64, t: f64) -> Result<f64> {
        let big_r = self.check_radius(r, t)?;
        let ModelParams { mu, sigma_tilde, .. } = self.params;
        let sigma = self.sigma_star(r, t)?;
        Ok(-mu * sigma + mu * sigma_tilde * r * r / 6.0 + 1.0 / big_r + mu * self.phi.value(t)
            - mu * sigma_tilde * big_r * big_r / 6.0)
    }

    pub fn boundary_derivatives(&self, t: f64) -> BoundaryDerivatives {
        let big_r = self.radius(t);
        let rate = self.radius_rate(t);
        let phi = self.phi.value(t);
        let table = pn_table(big_r, 1).expect("orbit radius is positive");
        let (p0, p1) = (table.get(0), table.get(1));
        BoundaryDerivatives {
            dsigma_dr: phi * big_r * p0,
            dp_dr: -rate,
            d2p_dr2: -self.params.mu * phi * big_r * big_r * p0 * p1 - rate / big_r,
        }
    }
}

/// Three-dimensional threshold functional on a fixed orbit:
/// `int 4/R^3 dt / int (sigma_tilde/3) R^2 (P_1(R) - P_2(R)) dt`.
pub fn threshold_3d_on_orbit(orbit: &PeriodicRadius, sigma_tilde: f64) -> f64 {
    let mut num = Vec::with_capacity(orbit.values().len());
    let mut den = Vec::with_capacity(orbit.values().len());
    let mut table = [0.0; 3];
    for &r in orbit.values() {
        pn_values_into(r, &mut table);
        num.push(4.0 / (r * r * r));
        den.push(sigma_tilde / 3.0 * r * r * (table[1] - table[2]));
    }
    let h = orbit.step();
    simpson(&num, h) / simpson(&den, h)
}

/// `R I_3(R)/I_2(R) - R I_0(R)/I_1(R) + 2`; negative for every `R > 0`.
pub fn planar_bracket(r: f64) -> Result<f64> {
    let ratios = bessel_i_int_ratios(2, r)?;
    Ok(r * ratios[2] - r / ratios[0] + 2.0)
}

/// Two-dimensional threshold functional on a fixed orbit:
/// `int 6/R^3 dt / (-(sigma_tilde/2) int [R I_3/I_2 - R I_0/I_1 + 2] dt)`.
pub fn threshold_2d_on_orbit(orbit: &PeriodicRadius, sigma_tilde: f64) -> Result<f64> {
    let mut num = Vec::with_capacity(orbit.values().len());
    let mut den = Vec::with_capacity(orbit.values().len());
    for &r in orbit.values() {
        num.push(6.0 / (r * r * r));
        den.push(-0.5 * sigma_tilde * planar_bracket(r)?);
    }
    let h = orbit.step();
    Ok(simpson(&num, h) / simpson(&den, h))
}

/// Threshold for the constant orbit `R`: `12 / (sigma_tilde R^5 (P_1 - P_2))`.
pub fn threshold_3d_constant(radius: f64, sigma_tilde: f64) -> Result<f64> {
    let table = pn_table(radius, 2)?;
    Ok(12.0 / (sigma_tilde * radius.powi(5) * (table.get(1) - table.get(2))))
}

/// Options for the self-consistent threshold solve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ThresholdOptions {
    pub orbit: OrbitOptions,
    /// Relative tolerance on `mu*`.
    pub rel_tol: f64,
    pub max_iter: usize,
}

impl Default for ThresholdOptions {
    fn default() -> Self {
        Self { orbit: OrbitOptions::default(), rel_tol: 1e-13, max_iter: 200 }
    }
}

/// A threshold value together with the orbit it was evaluated on.
#[derive(Debug, Clone, PartialEq)]
pub struct Threshold {
    pub mu_star: f64,
    pub orbit: PeriodicRadius,
}

fn self_consistent<F>(sigma_tilde: f64, phi: &NutrientProfile, opts: &ThresholdOptions, functional: F) -> Result<Threshold>
where
    F: Fn(&PeriodicRadius) -> Result<f64>,
{
    let period = phi.period();
    let orbit_at = |mu: f64| find_periodic_radius(&ModelParams::new(mu, sigma_tilde, period)?, phi, &opts.orbit);
    let first = functional(&orbit_at(1.0)?)?;
    let orbit = orbit_at(first)?;
    let second = functional(&orbit)?;
    if (second - first).abs() <= opts.rel_tol * first {
        return Ok(Threshold { mu_star: first, orbit });
    }

    let gap = |mu: f64| -> Result<f64> { Ok(mu - functional(&orbit_at(mu)?)?) };
    let (mut lo, mut hi) = (0.5 * second, 2.0 * second);
    let mut expansions = 0;
    while gap(lo)? > 0.0 {
        lo *= 0.5;
        expansions += 1;
        if expansions > 60 {
            return Err(Error::Convergence("no lower bracket for the threshold".into()));
        }
    }
    while gap(hi)? < 0.0 {
        hi *= 2.0;
        expansions += 1;
        if expansions > 60 {
            return Err(Error::Convergence("no upper bracket for the threshold".into()));
        }
    }
    let mu_star = brent(gap, lo, hi, opts.rel_tol * second, opts.max_iter)?;
    Ok(Threshold { mu_star, orbit: orbit_at(mu_star)? })
}

/// Self-consistent three-dimensional threshold `mu*`.
pub fn mu_star_3d(sigma_tilde: f64, phi: &NutrientProfile, opts: &ThresholdOptions) -> Result<Threshold> {
    self_consistent(sigma_tilde, phi, opts, |orbit| Ok(threshold_3d_on_orbit(orbit, sigma_tilde)))
}

/// Self-consistent planar threshold, evaluated on the three-dimensional orbit
/// equation (the planar radius equation is not modelled).
pub fn mu_star_2d(sigma_tilde: f64, phi: &NutrientProfile, opts: &ThresholdOptions) -> Result<Threshold> {
    self_consistent(sigma_tilde, phi, opts, |orbit| threshold_2d_on_orbit(orbit, sigma_tilde))
}
