use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::gauss_legendre;

/// Product grid: Gauss–Legendre nodes in `cos(theta)` times uniform azimuths.
/// Samples are stored latitude-major: index `i * n_lon + j`.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereGrid {
    n_lon: usize,
    cos_theta: Vec<f64>,
    weights: Vec<f64>,
}

impl SphereGrid {
    pub fn new(n_lat: usize, n_lon: usize) -> Result<Self> {
        if n_lat == 0 || n_lon == 0 {
            return Err(Error::GridTooSmall(format!("sphere grid {n_lat} x {n_lon} is empty")));
        }
        let (cos_theta, weights) = gauss_legendre(n_lat);
        Ok(Self { n_lon, cos_theta, weights })
    }

    /// Smallest grid on which degree-`n_max` fields are analyzed exactly.
    pub fn for_degree(n_max: usize) -> Self {
        Self::new(n_max + 1, 2 * n_max + 1).expect("nonempty grid")
    }

    pub fn n_lat(&self) -> usize {
        self.cos_theta.len()
    }

    pub fn n_lon(&self) -> usize {
        self.n_lon
    }

    pub fn len(&self) -> usize {
        self.n_lat() * self.n_lon
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn cos_theta(&self) -> &[f64] {
        &self.cos_theta
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn azimuth(&self, j: usize) -> f64 {
        2.0 * PI * j as f64 / self.n_lon as f64
    }

    /// Largest degree this grid resolves exactly.
    pub fn max_degree(&self) -> usize {
        (self.n_lat() - 1).min((self.n_lon - 1) / 2)
    }

    /// Samples `f(theta, phi)` in grid order.
    pub fn sample<F: Fn(f64, f64) -> f64>(&self, f: F) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.len());
        for &x in &self.cos_theta {
            let theta = x.acos();
            for j in 0..self.n_lon {
                out.push(f(theta, self.azimuth(j)));
            }
        }
        out
    }

    /// Surface integral over the unit sphere.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        let dphi = 2.0 * PI / self.n_lon as f64;
        values
            .chunks(self.n_lon)
            .zip(&self.weights)
            .map(|(row, w)| w * dphi * row.iter().sum::<f64>())
            .sum()
    }
}

/// Coefficients `c_{n,m}`, `0 <= n <= n_max`, `|m| <= n`, of the real
/// orthonormal basis
///
/// ```text
/// Y_{n,0}  = N_n^0 P_n(cos theta)
/// Y_{n,m}  = sqrt(2) N_n^m P_n^m(cos theta) cos(m phi),   m > 0
/// Y_{n,-m} = sqrt(2) N_n^m P_n^m(cos theta) sin(m phi),   m > 0
/// ```
///
/// with `N_n^m = sqrt((2n+1)/(4 pi) (n-m)!/(n+m)!)` and no Condon–Shortley
/// phase. Degree 1 is then `sqrt(3/(4 pi)) (x, y, z)` for `m = (1, -1, 0)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShCoeffs {
    n_max: usize,
    values: Vec<f64>,
}

fn index(n: usize, m: isize) -> usize {
    debug_assert!(m.unsigned_abs() <= n);
    (n * n + n).wrapping_add_signed(m)
}

impl ShCoeffs {
    pub fn zeros(n_max: usize) -> Self {
        Self { n_max, values: vec![0.0; (n_max + 1) * (n_max + 1)] }
    }

    pub fn from_fn<F: FnMut(usize, isize) -> f64>(n_max: usize, mut f: F) -> Self {
        let mut c = Self::zeros(n_max);
        for n in 0..=n_max {
            for m in -(n as isize)..=n as isize {
                c.values[index(n, m)] = f(n, m);
            }
        }
        c
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    /// Zero for orders beyond the truncation.
    pub fn get(&self, n: usize, m: isize) -> f64 {
        if n > self.n_max || m.unsigned_abs() > n {
            0.0
        } else {
            self.values[index(n, m)]
        }
    }

    pub fn set(&mut self, n: usize, m: isize, value: f64) {
        assert!(n <= self.n_max && m.unsigned_abs() <= n, "({n}, {m}) outside degree {}", self.n_max);
        self.values[index(n, m)] = value;
    }

    /// `(n, m, c_{n,m})` in `(n ascending, m ascending)` order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, isize, f64)> + '_ {
        (0..=self.n_max).flat_map(move |n| (-(n as isize)..=n as isize).map(move |m| (n, m, self.get(n, m))))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    /// Coefficient l2 norm, equal to the surface L2 norm of the field.
    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// l2 norm with degree 1 removed.
    pub fn norm_without_translation(&self) -> f64 {
        self.iter().filter(|&(n, _, _)| n != 1).map(|(_, _, v)| v * v).sum::<f64>().sqrt()
    }

    /// Degree-1 coefficients ordered `m = -1, 0, 1`.
    pub fn mode1(&self) -> [f64; 3] {
        [self.get(1, -1), self.get(1, 0), self.get(1, 1)]
    }
}

/// Normalized associated Legendre values `N_n^m P_n^m(x)` for `m <= n <= n_max`,
/// stored at `n (n + 1) / 2 + m`.
pub fn legendre_table(n_max: usize, x: f64) -> Vec<f64> {
    let mut out = vec![0.0; (n_max + 1) * (n_max + 2) / 2];
    let at = |n: usize, m: usize| n * (n + 1) / 2 + m;
    let s = (1.0 - x * x).max(0.0).sqrt();
    let mut diag = 1.0 / (4.0 * PI).sqrt();
    for m in 0..=n_max {
        if m > 0 {
            diag *= ((2 * m + 1) as f64 / (2 * m) as f64).sqrt() * s;
        }
        out[at(m, m)] = diag;
        if m == n_max {
            break;
        }
        out[at(m + 1, m)] = ((2 * m + 3) as f64).sqrt() * x * diag;
        for n in m + 2..=n_max {
            let (nf, mf) = (n as f64, m as f64);
            let a = ((4.0 * nf * nf - 1.0) / (nf * nf - mf * mf)).sqrt();
            let b = (((nf - 1.0) * (nf - 1.0) - mf * mf) / (4.0 * (nf - 1.0) * (nf - 1.0) - 1.0)).sqrt();
            out[at(n, m)] = a * (x * out[at(n - 1, m)] - b * out[at(n - 2, m)]);
        }
    }
    out
}

/// Single real harmonic `Y_{n,m}(theta, phi)`.
pub fn real_harmonic(n: usize, m: isize, theta: f64, phi: f64) -> f64 {
    let table = legendre_table(n, theta.cos());
    let k = m.unsigned_abs();
    let p = table[n * (n + 1) / 2 + k];
    match m {
        0 => p,
        m if m > 0 => std::f64::consts::SQRT_2 * p * (k as f64 * phi).cos(),
        _ => std::f64::consts::SQRT_2 * p * (k as f64 * phi).sin(),
    }
}

fn check_grid(grid: &SphereGrid, n_max: usize) -> Result<()> {
    if grid.n_lat() < n_max + 1 || grid.n_lon() < 2 * n_max + 1 {
        return Err(Error::GridTooSmall(format!(
            "degree {n_max} needs at least {} x {} nodes, grid is {} x {}",
            n_max + 1,
            2 * n_max + 1,
            grid.n_lat(),
            grid.n_lon()
        )));
    }
    Ok(())
}

/// Forward transform; exact for fields of degree `<= n_max`.
pub fn sh_analyze(samples: &[f64], grid: &SphereGrid, n_max: usize) -> Result<ShCoeffs> {
    check_grid(grid, n_max)?;
    if samples.len() != grid.len() {
        return Err(Error::InvalidParameter {
            field: "samples",
            reason: format!("expected {} samples, got {}", grid.len(), samples.len()),
        });
    }
    let n_lon = grid.n_lon();
    let dphi = 2.0 * PI / n_lon as f64;
    let mut out = ShCoeffs::zeros(n_max);
    let mut cos_sum = vec![0.0; n_max + 1];
    let mut sin_sum = vec![0.0; n_max + 1];
    for (i, row) in samples.chunks(n_lon).enumerate() {
        for m in 0..=n_max {
            let (mut c, mut s) = (0.0, 0.0);
            for (j, v) in row.iter().enumerate() {
                let arg = m as f64 * grid.azimuth(j);
                c += v * arg.cos();
                s += v * arg.sin();
            }
            cos_sum[m] = c * dphi;
            sin_sum[m] = s * dphi;
        }
        let w = grid.weights()[i];
        let table = legendre_table(n_max, grid.cos_theta()[i]);
        for n in 0..=n_max {
            let base = n * (n + 1) / 2;
            out.values[index(n, 0)] += w * table[base] * cos_sum[0];
            for m in 1..=n {
                let p = std::f64::consts::SQRT_2 * w * table[base + m];
                out.values[index(n, m as isize)] += p * cos_sum[m];
                out.values[index(n, -(m as isize))] += p * sin_sum[m];
            }
        }
    }
    Ok(out)
}

/// Inverse transform onto `grid`.
pub fn sh_synthesize(coeffs: &ShCoeffs, grid: &SphereGrid) -> Vec<f64> {
    let n_max = coeffs.n_max();
    let n_lon = grid.n_lon();
    let mut out = vec![0.0; grid.len()];
    let mut cos_part = vec![0.0; n_max + 1];
    let mut sin_part = vec![0.0; n_max + 1];
    for (i, row) in out.chunks_mut(n_lon).enumerate() {
        let table = legendre_table(n_max, grid.cos_theta()[i]);
        cos_part.iter_mut().for_each(|v| *v = 0.0);
        sin_part.iter_mut().for_each(|v| *v = 0.0);
        for n in 0..=n_max {
            let base = n * (n + 1) / 2;
            cos_part[0] += coeffs.get(n, 0) * table[base];
            for m in 1..=n {
                let p = std::f64::consts::SQRT_2 * table[base + m];
                cos_part[m] += coeffs.get(n, m as isize) * p;
                sin_part[m] += coeffs.get(n, -(m as isize)) * p;
            }
        }
        for (j, v) in row.iter_mut().enumerate() {
            let phi = grid.azimuth(j);
            *v = cos_part[0]
                + (1..=n_max)
                    .map(|m| {
                        let arg = m as f64 * phi;
                        cos_part[m] * arg.cos() + sin_part[m] * arg.sin()
                    })
                    .sum::<f64>();
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn constant_field() {
        let grid = SphereGrid::for_degree(6);
        let c = sh_analyze(&vec![2.5; grid.len()], &grid, 6).unwrap();
        assert!((c.get(0, 0) - 2.5 * (4.0 * PI).sqrt()).abs() < 1e-13);
        for (n, _, v) in c.iter() {
            if n > 0 {
                assert!(v.abs() < 1e-13);
            }
        }
    }

    #[test]
    fn single_harmonic_is_a_delta() {
        let grid = SphereGrid::new(12, 25).unwrap();
        let samples = grid.sample(|t, p| real_harmonic(3, 2, t, p));
        let c = sh_analyze(&samples, &grid, 10).unwrap();
        for (n, m, v) in c.iter() {
            let expected = if (n, m) == (3, 2) { 1.0 } else { 0.0 };
            assert!((v - expected).abs() < 1e-12, "({n},{m}) = {v}");
        }
    }

    #[test]
    fn closed_forms() {
        let (t, p) = (0.7f64, 1.9f64);
        let k = (3.0 / (4.0 * PI)).sqrt();
        assert!((real_harmonic(1, 0, t, p) - k * t.cos()).abs() < 1e-15);
        assert!((real_harmonic(1, 1, t, p) - k * t.sin() * p.cos()).abs() < 1e-15);
        assert!((real_harmonic(1, -1, t, p) - k * t.sin() * p.sin()).abs() < 1e-15);
        let y22 = (15.0 / (16.0 * PI)).sqrt() * t.sin().powi(2) * (2.0 * p).cos();
        assert!((real_harmonic(2, 2, t, p) - y22).abs() < 1e-15);
        let y20 = (5.0 / (16.0 * PI)).sqrt() * (3.0 * t.cos().powi(2) - 1.0);
        assert!((real_harmonic(2, 0, t, p) - y20).abs() < 1e-15);
    }

    #[test]
    fn undersized_grid_is_rejected() {
        let grid = SphereGrid::new(5, 9).unwrap();
        assert!(sh_analyze(&vec![0.0; grid.len()], &grid, 4).is_ok());
        assert!(matches!(sh_analyze(&vec![0.0; grid.len()], &grid, 5), Err(Error::GridTooSmall(_))));
        let grid = SphereGrid::new(6, 8).unwrap();
        assert!(matches!(sh_analyze(&vec![0.0; grid.len()], &grid, 4), Err(Error::GridTooSmall(_))));
    }

    #[test]
    fn parseval() {
        let c = ShCoeffs::from_fn(7, |n, m| ((n * 7 + 3) as f64 + m as f64 * 0.37).sin());
        let grid = SphereGrid::for_degree(8);
        let f = sh_synthesize(&c, &grid);
        let sq: Vec<f64> = f.iter().map(|v| v * v).collect();
        assert!((grid.integrate(&sq).sqrt() - c.norm()).abs() < 1e-12 * c.norm());
    }

    #[test]
    fn high_degree_stays_orthonormal() {
        let grid = SphereGrid::for_degree(40);
        let samples = grid.sample(|t, p| real_harmonic(40, -17, t, p));
        let c = sh_analyze(&samples, &grid, 40).unwrap();
        assert!((c.get(40, -17) - 1.0).abs() < 1e-11);
        assert!(c.norm_without_translation() < 1.0 + 1e-11);
    }

    fn coeffs_strategy(n_max: usize) -> impl Strategy<Value = ShCoeffs> {
        prop::collection::vec(-1.0f64..1.0, (n_max + 1) * (n_max + 1))
            .prop_map(move |v| ShCoeffs { n_max, values: v })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn round_trip(c in coeffs_strategy(8)) {
            let grid = SphereGrid::for_degree(8);
            let back = sh_analyze(&sh_synthesize(&c, &grid), &grid, 8).unwrap();
            for (a, b) in c.as_slice().iter().zip(back.as_slice()) {
                prop_assert!((a - b).abs() < 1e-12);
            }
        }

        #[test]
        fn analysis_is_linear(a in coeffs_strategy(5), b in coeffs_strategy(5), s in -3.0f64..3.0) {
            let grid = SphereGrid::new(9, 13).unwrap();
            let fa = sh_synthesize(&a, &grid);
            let fb = sh_synthesize(&b, &grid);
            let mixed: Vec<f64> = fa.iter().zip(&fb).map(|(x, y)| x + s * y).collect();
            let ca = sh_analyze(&fa, &grid, 5).unwrap();
            let cb = sh_analyze(&fb, &grid, 5).unwrap();
            let cm = sh_analyze(&mixed, &grid, 5).unwrap();
            for i in 0..36 {
                prop_assert!((cm.as_slice()[i] - ca.as_slice()[i] - s * cb.as_slice()[i]).abs() < 1e-12);
            }
        }
    }
}
