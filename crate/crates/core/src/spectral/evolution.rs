use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::center::mode1_center;
use super::harmonics::{sh_synthesize, ShCoeffs, SphereGrid};
use crate::base_state::BaseState;
use crate::error::{check_positive, Error, Result};
use crate::mode_dynamics::ModeGrid;
use crate::special_fn::pn_values_into;

/// Boundary `r(theta, phi, t) = R*(t) + epsilon sum rho_{n,m} Y_{n,m}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryPerturbation {
    pub coeffs: ShCoeffs,
    pub epsilon: f64,
}

impl BoundaryPerturbation {
    pub fn new(coeffs: ShCoeffs, epsilon: f64) -> Result<Self> {
        if let Some((n, m, v)) = coeffs.iter().find(|(_, _, v)| !v.is_finite()) {
            return Err(Error::InvalidParameter { field: "coefficients", reason: format!("({n}, {m}) is {v}") });
        }
        if !epsilon.is_finite() || epsilon < 0.0 {
            return Err(Error::InvalidParameter { field: "epsilon", reason: format!("must be finite and >= 0, got {epsilon}") });
        }
        Ok(Self { coeffs, epsilon })
    }

    pub fn n_max(&self) -> usize {
        self.coeffs.n_max()
    }

    /// Boundary radius on `grid` about a sphere of radius `radius`.
    pub fn surface(&self, radius: f64, grid: &SphereGrid) -> Vec<f64> {
        sh_synthesize(&self.coeffs, grid).into_iter().map(|v| radius + self.epsilon * v).collect()
    }

    /// Fails with a domain error if the boundary crosses the origin anywhere on `grid`.
    pub fn check_positive(&self, radius: f64, grid: &SphereGrid) -> Result<()> {
        let min = self.surface(radius, grid).into_iter().fold(f64::INFINITY, f64::min);
        if min > 0.0 {
            Ok(())
        } else {
            Err(Error::Domain(format!("perturbed boundary reaches r = {min} <= 0")))
        }
    }

    /// Surface L2 norm of `sum rho Y` by quadrature on `grid`.
    pub fn l2_norm_on(&self, grid: &SphereGrid) -> f64 {
        let sq: Vec<f64> = sh_synthesize(&self.coeffs, grid).iter().map(|v| v * v).collect();
        grid.integrate(&sq).sqrt()
    }

    /// Distance from a translated sphere, `||rho - (degree-1 part)||`, in units of `epsilon`.
    pub fn deviation(&self) -> f64 {
        self.coeffs.norm_without_translation()
    }

    /// Center offset in units of `epsilon`.
    pub fn center(&self) -> [f64; 3] {
        mode1_center(self.coeffs.mode1())
    }
}

/// Boundary fluxes of the two radial problems for one mode at one time.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct BoundaryFluxes {
    pub xi: f64,
    pub psi: f64,
}

/// `Q_{n,m}(t) = mu xi'(R) - psi'(R) + b_1 + mu R P_n(R) b_2 - (n/R) b_3` with `R = R*(t)`.
pub fn q_forcing(n: usize, t: f64, fluxes: BoundaryFluxes, b: [f64; 3], state: &BaseState) -> f64 {
    let r = state.radius(t);
    let mu = state.params().mu;
    let mut p = vec![0.0; n + 1];
    pn_values_into(r, &mut p);
    mu * fluxes.xi - fluxes.psi + b[0] + mu * r * p[n] * b[1] - n as f64 / r * b[2]
}

/// Time stepping shared by all modes: `t_end` in time units, output every
/// `stride` orbit steps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolveOptions {
    pub t_end: f64,
    pub stride: usize,
    pub epsilon: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeTrajectory {
    pub n: usize,
    pub m: isize,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

fn step_count(grid: &ModeGrid, opts: &EvolveOptions) -> Result<usize> {
    check_positive("t_end", opts.t_end)?;
    if opts.stride == 0 {
        return Err(Error::InvalidParameter { field: "stride", reason: "must be at least 1".into() });
    }
    let h = 2.0 * grid.half_step();
    let steps = (opts.t_end / h).round() as usize;
    let out = h * opts.stride as f64;
    if steps == 0 || (steps as f64 * h - opts.t_end).abs() > 1e-9 * opts.t_end || steps % opts.stride != 0 {
        return Err(Error::InvalidParameter {
            field: "t_end",
            reason: format!("{} is not a multiple of the output step {out}", opts.t_end),
        });
    }
    Ok(steps)
}

/// Global primitive `G(t)` at half-step index `i`, using periodicity.
fn primitive_at(g: &[f64], i: usize) -> f64 {
    let per = g.len() - 1;
    g[per] * (i / per) as f64 + g[i % per]
}

/// `rho(t) = rho0 e^{G(t)} + epsilon int_0^t Q(s) e^{G(t) - G(s)} ds`, `G = int_0^t H_n`.
///
/// The Duhamel integral advances over each orbit step `[t_j, t_j + h]` by
/// Simpson's rule on `Q(s) e^{G(t_{j+1}) - G(s)}`, so no exponential of the
/// full primitive is ever formed.
pub fn evolve_mode(
    grid: &ModeGrid,
    n: usize,
    m: isize,
    rho0: f64,
    forcing: Option<&(dyn Fn(f64) -> f64 + Sync)>,
    opts: &EvolveOptions,
) -> Result<ModeTrajectory> {
    let steps = step_count(grid, opts)?;
    let g = grid.primitive(n);
    let half = grid.half_step();
    let h = 2.0 * half;
    let mut times = Vec::with_capacity(steps / opts.stride + 1);
    let mut values = Vec::with_capacity(steps / opts.stride + 1);
    let mut duhamel = 0.0;
    let mut q_prev = forcing.map_or(0.0, |q| q(0.0));
    for j in 0..=steps {
        if j > 0 {
            if let Some(q) = forcing {
                let (g0, gm, g1) = (primitive_at(&g, 2 * j - 2), primitive_at(&g, 2 * j - 1), primitive_at(&g, 2 * j));
                let t1 = h * j as f64;
                let qm = q(t1 - half);
                let q1 = q(t1);
                let growth = (g1 - g0).exp();
                duhamel = growth * duhamel + h / 6.0 * (q_prev * growth + 4.0 * qm * (g1 - gm).exp() + q1);
                q_prev = q1;
            }
        }
        if j % opts.stride == 0 {
            times.push(h * j as f64);
            values.push(rho0 * primitive_at(&g, 2 * j).exp() + opts.epsilon * duhamel);
        }
    }
    Ok(ModeTrajectory { n, m, times, values })
}

/// Mode forcing `Q_{n,m}(t)`.
pub type ModeForcing = dyn Fn(usize, isize, f64) -> f64 + Sync;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryEvolution {
    pub times: Vec<f64>,
    /// Coefficients at each output time.
    pub coeffs: Vec<ShCoeffs>,
    /// `d(t)`: deviation from a translated sphere.
    pub deviation: Vec<f64>,
    /// Running center from the degree-1 coefficients.
    pub centers: Vec<[f64; 3]>,
}

/// Evolves every retained mode of `init`.
pub fn evolve_boundary(
    grid: &ModeGrid,
    init: &BoundaryPerturbation,
    forcing: Option<&ModeForcing>,
    opts: &EvolveOptions,
) -> Result<BoundaryEvolution> {
    let n_max = init.n_max();
    if grid.n_max() < n_max {
        return Err(Error::InvalidParameter {
            field: "n_max",
            reason: format!("mode grid holds P_n up to {} but the perturbation has degree {n_max}", grid.n_max()),
        });
    }
    let opts = EvolveOptions { epsilon: init.epsilon, ..*opts };
    let modes: Vec<(usize, isize, f64)> = init.coeffs.iter().collect();
    let trajectories = modes
        .par_iter()
        .map(|&(n, m, rho0)| match forcing {
            Some(q) => {
                let qm = move |t: f64| q(n, m, t);
                evolve_mode(grid, n, m, rho0, Some(&qm), &opts)
            }
            None => evolve_mode(grid, n, m, rho0, None, &opts),
        })
        .collect::<Result<Vec<_>>>()?;
    let times = trajectories[0].times.clone();
    let coeffs: Vec<ShCoeffs> = (0..times.len())
        .map(|k| {
            let mut c = ShCoeffs::zeros(n_max);
            for tr in &trajectories {
                c.set(tr.n, tr.m, tr.values[k]);
            }
            c
        })
        .collect();
    let deviation = coeffs.iter().map(ShCoeffs::norm_without_translation).collect();
    let centers = coeffs.iter().map(|c| mode1_center(c.mode1())).collect();
    Ok(BoundaryEvolution { times, coeffs, deviation, centers })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::periodic_orbit::{ModelParams, NutrientProfile, OrbitOptions};
    use crate::mode_dynamics::h_n;

    fn state(mu: f64, amp: f64) -> BaseState {
        let params = ModelParams::new(mu, 1.0, 1.0).unwrap();
        let phi = NutrientProfile::cosine(2.0, amp, 1.0).unwrap();
        BaseState::new(params, phi, &OrbitOptions::default()).unwrap()
    }

    fn opts(t_end: f64, stride: usize, epsilon: f64) -> EvolveOptions {
        EvolveOptions { t_end, stride, epsilon }
    }

    #[test]
    fn q_forcing_terms() {
        let s = state(0.3, 0.5);
        let t = 0.25;
        let z = BoundaryFluxes::default();
        assert_eq!(q_forcing(2, t, z, [0.0; 3], &s), 0.0);
        assert_eq!(q_forcing(2, t, z, [1.0, 0.0, 0.0], &s), 1.0);
        assert!((q_forcing(2, t, z, [0.0, 0.0, 1.0], &s) + 2.0 / s.radius(t)).abs() < 1e-15);
        let f = BoundaryFluxes { xi: 2.0, psi: 0.5 };
        assert!((q_forcing(3, t, f, [0.0; 3], &s) - (0.6 - 0.5)).abs() < 1e-15);
    }

    #[test]
    fn neutral_mode_is_constant() {
        let grid = ModeGrid::new(&state(0.3, 0.8), 3);
        let tr = evolve_mode(&grid, 1, 0, 0.7, None, &opts(3.0, 16, 0.1)).unwrap();
        assert!(tr.values.iter().all(|v| *v == 0.7));
    }

    #[test]
    fn constant_coefficients_closed_form() {
        let s = state(0.3, 0.0);
        let grid = ModeGrid::new(&s, 4);
        let rate = h_n(3, 0.0, &s);
        let (rho0, q, eps) = (0.4, 1.3, 0.05);
        let forcing = |_: f64| q;
        let tr = evolve_mode(&grid, 3, 1, rho0, Some(&forcing), &opts(2.0, 64, eps)).unwrap();
        for (t, v) in tr.times.iter().zip(&tr.values) {
            let exact = rho0 * (rate * t).exp() + eps * q * ((rate * t).exp() - 1.0) / rate;
            assert!((v - exact).abs() < 1e-12, "t={t}: {v} vs {exact}");
        }
    }

    #[test]
    fn step_validation() {
        let grid = ModeGrid::new(&state(0.3, 0.0), 2);
        assert!(evolve_mode(&grid, 2, 0, 1.0, None, &opts(1.0, 3, 0.0)).is_err());
        assert!(evolve_mode(&grid, 2, 0, 1.0, None, &opts(0.0, 1, 0.0)).is_err());
        assert!(evolve_mode(&grid, 2, 0, 1.0, None, &opts(1.0001, 1, 0.0)).is_err());
        assert!(evolve_mode(&grid, 2, 0, 1.0, None, &opts(1.0, 0, 0.0)).is_err());
    }

    #[test]
    fn superposition() {
        let grid = ModeGrid::new(&state(0.2, 0.7), 5);
        let q1 = |t: f64| (3.0 * t).sin();
        let q2 = |t: f64| 1.0 + t.cos();
        let both = |t: f64| q1(t) - 2.5 * q2(t);
        let o = opts(4.0, 32, 0.3);
        let a = evolve_mode(&grid, 4, 0, 0.8, Some(&q1), &o).unwrap();
        let b = evolve_mode(&grid, 4, 0, -0.1, Some(&q2), &o).unwrap();
        let c = evolve_mode(&grid, 4, 0, 0.8 + 0.25, Some(&both), &o).unwrap();
        for k in 0..a.values.len() {
            let lin = a.values[k] - 2.5 * b.values[k];
            assert!((c.values[k] - lin).abs() < 1e-12);
        }
    }

    #[test]
    fn perturbation_checks() {
        let c = ShCoeffs::from_fn(4, |n, m| 0.1 * (n as f64 + 0.3 * m as f64).cos());
        let p = BoundaryPerturbation::new(c.clone(), 0.05).unwrap();
        let grid = SphereGrid::for_degree(6);
        assert!(p.check_positive(1.0, &grid).is_ok());
        assert!((p.l2_norm_on(&grid) - c.norm()).abs() < 1e-12);
        let big = BoundaryPerturbation::new(c, 100.0).unwrap();
        assert!(big.check_positive(1.0, &grid).is_err());
        let mut bad = ShCoeffs::zeros(1);
        bad.set(1, 0, f64::NAN);
        assert!(BoundaryPerturbation::new(bad, 0.1).is_err());
    }

    #[test]
    fn pure_translation_stays_put() {
        let grid = ModeGrid::new(&state(0.2, 0.7), 4);
        let mut c = ShCoeffs::zeros(2);
        c.set(1, -1, 0.3);
        c.set(1, 1, -0.2);
        let init = BoundaryPerturbation::new(c, 0.1).unwrap();
        let ev = evolve_boundary(&grid, &init, None, &opts(2.0, 64, 0.0)).unwrap();
        assert!(ev.deviation.iter().all(|d| *d == 0.0));
        assert!(ev.centers.iter().all(|a| *a == init.center()));
    }
}
