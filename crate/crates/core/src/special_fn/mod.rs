//! Modified Bessel functions and the ratio family `P_n(r)`.
//!
//! The ratio `P_n(r) = I_{n+3/2}(r) / (r I_{n+1/2}(r))` drives the whole
//! stability analysis. It is evaluated by downward recurrence
//!
//! ```text
//! P_n(r) = 1 / (r^2 P_{n+1}(r) + 2n + 3)
//! ```
//!
//! which is contractive: an error in `P_{n+1}` is damped by the factor
//! `r^2 P_n P_{n+1} < 1` on every step down. Half-integer Bessel values are
//! then rebuilt from the closed form of `I_{1/2}` and the product of ratios,
//! so the unstable upward recurrence on `I_nu` is never used.
//!
//! Integer orders (`I_0..I_3`, only needed for the planar threshold) use the
//! power series for moderate arguments and Miller's downward algorithm with
//! Neumann-sum normalization otherwise.

mod half_integer;
mod integer;

pub use half_integer::{
    bessel_i_half, bessel_i_half_scaled, p0, pn_derivative_identity_residual, pn_table,
    pn_values_into, seed_order, PnTable,
};
pub use integer::{bessel_i_int_ratios, bessel_i_int_scaled};

/// Modified Lentz evaluation of `b0 + a1/(b1 + a2/(b2 + ...))` with constant
/// partial numerators `a`.
pub(crate) fn lentz<B: Fn(usize) -> f64>(b: B, a: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut f = b(0);
    if f == 0.0 {
        f = TINY;
    }
    let mut c = f;
    let mut d = 0.0;
    for j in 1..10_000 {
        let bj = b(j);
        d = bj + a * d;
        if d == 0.0 {
            d = TINY;
        }
        c = bj + a / c;
        if c == 0.0 {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    f
}
