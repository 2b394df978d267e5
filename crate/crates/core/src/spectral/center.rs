use std::f64::consts::PI;

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn unit() -> f64 {
    (4.0 * PI / 3.0).sqrt()
}

/// Translation `a` of the sphere encoded by real degree-1 coefficients
/// `[c_{1,-1}, c_{1,0}, c_{1,1}]`. Since `Y_{1,(1,-1,0)} = sqrt(3/(4 pi)) (x, y, z)`,
/// a shift by `a` adds `sqrt(4 pi/3) (a_2, a_3, a_1)` in that order.
pub fn mode1_center(coeffs: [f64; 3]) -> [f64; 3] {
    let k = unit();
    [coeffs[2] / k, coeffs[0] / k, coeffs[1] / k]
}

/// Inverse of [`mode1_center`].
pub fn mode1_coefficients(a: [f64; 3]) -> [f64; 3] {
    let k = unit();
    [a[1] * k, a[2] * k, a[0] * k]
}

/// Complex degree-1 coefficients `(b_1, b_2, b_3)` with
///
/// ```text
/// b_1 = (c_{1,1} + i c_{1,-1}) / sqrt(2)
/// b_2 = c_{1,0}
/// b_3 = (-c_{1,1} + i c_{1,-1}) / sqrt(2)
/// ```
///
/// so that `b_1 - b_3 = a_1 sqrt(8 pi/3)`, `i (b_1 + b_3) = -a_2 sqrt(8 pi/3)`
/// and `b_2 = a_3 sqrt(4 pi/3)`.
pub fn mode1_complex(coeffs: [f64; 3]) -> [Complex64; 3] {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let [cm, c0, cp] = coeffs;
    [Complex64::new(cp * s, cm * s), Complex64::new(c0, 0.0), Complex64::new(-cp * s, cm * s)]
}

/// Center from complex coefficients through the three linear relations above.
pub fn center_from_complex(b: [Complex64; 3]) -> [f64; 3] {
    let wide = (8.0 * PI / 3.0).sqrt();
    let i = Complex64::i();
    [(b[0] - b[2]).re / wide, -(i * (b[0] + b[2])).re / wide, b[1].re / unit()]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CenterOptions {
    /// Stop when `|F(a)| <= tol`.
    pub tol: f64,
    pub max_iter: usize,
    /// Relative central-difference step for the Jacobian.
    pub fd_step: f64,
}

impl Default for CenterOptions {
    fn default() -> Self {
        Self { tol: 1e-12, max_iter: 50, fd_step: 1e-4 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CenterEstimate {
    pub a: [f64; 3],
    pub residual: f64,
    pub iterations: usize,
}

/// Damped Newton iteration for `F(a) = 0` with a central-difference Jacobian.
pub fn find_limiting_center<F>(mut f: F, a0: [f64; 3], opts: &CenterOptions) -> Result<CenterEstimate>
where
    F: FnMut([f64; 3]) -> Result<[f64; 3]>,
{
    let mut a = Vector3::from(a0);
    let mut fa = Vector3::from(f(a.into())?);
    let mut residual = fa.norm();
    for iteration in 0..opts.max_iter {
        if residual <= opts.tol {
            return Ok(CenterEstimate { a: a.into(), residual, iterations: iteration });
        }
        let mut jac = Matrix3::zeros();
        for j in 0..3 {
            let h = opts.fd_step * a[j].abs().max(1.0);
            let mut plus = a;
            let mut minus = a;
            plus[j] += h;
            minus[j] -= h;
            let column = (Vector3::from(f(plus.into())?) - Vector3::from(f(minus.into())?)) / (2.0 * h);
            jac.set_column(j, &column);
        }
        let step = jac
            .lu()
            .solve(&(-fa))
            .ok_or_else(|| Error::SingularMatrix("Jacobian of the center map is singular".into()))?;
        let mut scale = 1.0;
        loop {
            let trial = a + step * scale;
            let ft = Vector3::from(f(trial.into())?);
            if ft.norm() < residual || scale < 1e-10 {
                a = trial;
                fa = ft;
                residual = ft.norm();
                break;
            }
            scale *= 0.5;
        }
    }
    if residual <= opts.tol {
        return Ok(CenterEstimate { a: a.into(), residual, iterations: opts.max_iter });
    }
    Err(Error::NoConvergence { iterations: opts.max_iter, residual })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_maps_to_zero() {
        assert_eq!(mode1_center([0.0; 3]), [0.0; 3]);
    }

    #[test]
    fn unit_vertical_shift() {
        let b = [Complex64::new(0.0, 0.0), Complex64::new(unit(), 0.0), Complex64::new(0.0, 0.0)];
        let a = center_from_complex(b);
        assert!((a[0]).abs() < 1e-15 && a[1].abs() < 1e-15 && (a[2] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn complex_relations_and_round_trip() {
        let a = [0.3, -1.7, 2.2];
        let c = mode1_coefficients(a);
        let back = mode1_center(c);
        for k in 0..3 {
            assert!((back[k] - a[k]).abs() < 1e-14);
        }
        let b = mode1_complex(c);
        let wide = (8.0 * PI / 3.0).sqrt();
        assert!(((b[0] - b[2]) - Complex64::new(a[0] * wide, 0.0)).norm() < 1e-14);
        assert!(((Complex64::i() * (b[0] + b[2])) + Complex64::new(a[1] * wide, 0.0)).norm() < 1e-14);
        assert!((b[1] - Complex64::new(a[2] * unit(), 0.0)).norm() < 1e-14);
        let again = center_from_complex(b);
        for k in 0..3 {
            assert!((again[k] - a[k]).abs() < 1e-14);
        }
    }

    #[test]
    fn shifted_sphere_has_expected_degree_one_part() {
        use crate::spectral::{sh_analyze, SphereGrid};
        // |x - a| = 1 + a . x_hat + O(a^2) on the unit sphere
        let a = [1e-7, -2e-7, 3e-7];
        let grid = SphereGrid::for_degree(4);
        let samples = grid.sample(|t, p| {
            let x = [t.sin() * p.cos(), t.sin() * p.sin(), t.cos()];
            let dot: f64 = (0..3).map(|k| a[k] * x[k]).sum();
            // radius of the shifted unit sphere along x_hat
            dot + (1.0 - (0..3).map(|k| a[k] * a[k]).sum::<f64>() + dot * dot).sqrt() - 1.0
        });
        let c = sh_analyze(&samples, &grid, 4).unwrap();
        let got = mode1_center(c.mode1());
        for k in 0..3 {
            assert!((got[k] - a[k]).abs() < 1e-13);
        }
    }

    #[test]
    fn shifted_identity_in_one_step() {
        let target = [0.4, -0.2, 1.1];
        let f = |a: [f64; 3]| Ok([a[0] - target[0], a[1] - target[1], a[2] - target[2]]);
        let est = find_limiting_center(f, [0.0; 3], &CenterOptions::default()).unwrap();
        assert_eq!(est.iterations, 1, "{est:?}");
        assert!(est.residual <= 1e-12);
        for k in 0..3 {
            assert!((est.a[k] - target[k]).abs() <= 1e-12);
        }
    }

    #[test]
    fn general_affine_map() {
        let target = [0.4, -0.2, 1.1];
        let m = Matrix3::new(2.0, 0.3, 0.0, -0.1, 1.5, 0.2, 0.0, 0.4, 3.0);
        let f = |a: [f64; 3]| Ok((m * (Vector3::from(a) - Vector3::from(target))).into());
        let est = find_limiting_center(f, [0.0; 3], &CenterOptions::default()).unwrap();
        assert!(est.iterations <= 2, "{est:?}");
        assert!(est.residual <= 1e-12);
    }

    #[test]
    fn zero_epsilon_returns_root_of_leading_part() {
        let a0 = [0.1, 0.2, 0.3];
        let f = |a: [f64; 3]| Ok([a[0] - a0[0], 2.0 * (a[1] - a0[1]), a[2] - a0[2] + (a[0] - a0[0]).powi(2)]);
        let est = find_limiting_center(f, a0, &CenterOptions::default()).unwrap();
        assert_eq!(est.iterations, 0);
        assert_eq!(est.a, a0);
    }

    #[test]
    fn small_perturbation_moves_root_by_order_epsilon() {
        let a0 = [0.5, -0.3, 0.8];
        for &eps in &[1e-2, 1e-3, 1e-4] {
            let f = |a: [f64; 3]| {
                Ok([
                    a[0] - a0[0] + eps * (a[1].sin() + 1.0),
                    a[1] - a0[1] + eps * (a[0] * a[2]).cos(),
                    a[2] - a0[2] + eps * a[0].powi(2),
                ])
            };
            let est = find_limiting_center(f, a0, &CenterOptions::default()).unwrap();
            assert!(est.residual <= 1e-12);
            assert!(est.iterations <= 5);
            let dist = (0..3).map(|k| (est.a[k] - a0[k]).powi(2)).sum::<f64>().sqrt();
            assert!(dist < 3.0 * eps && dist > 0.1 * eps);
        }
    }

    #[test]
    fn reports_failure() {
        let f = |a: [f64; 3]| Ok([a[0] * a[0] + 1.0, a[1], a[2]]);
        let opts = CenterOptions { max_iter: 10, ..CenterOptions::default() };
        match find_limiting_center(f, [0.3, 0.0, 0.0], &opts) {
            Err(Error::NoConvergence { iterations: 10, residual }) => assert!(residual >= 1.0),
            other => panic!("{other:?}"),
        }
    }
}
