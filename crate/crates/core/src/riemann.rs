//! Guaranteed upper bound on the maximum wave speed of the one-dimensional
//! Riemann problem projected on a direction `n`.
//!
//! The intermediate pressure is estimated with the two-rarefaction formula,
//! which bounds the exact star pressure from above for `1 < gamma <= 5/3`.
//! Plugging an upper bound of the star pressure into the shock-speed
//! formulas bounds both extreme wave speeds.

use crate::eos::{dot, ConservedState, GasModel};
use crate::error::{Error, Result};

/// Upper bound on `max(|lambda_1^-|, |lambda_3^+|)` of the Riemann fan.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct WaveSpeedBound {
    pub lambda_max: f64,
}

/// Bound for primitive data `(rho, v.n, p)` on both sides. No checks.
#[inline]
pub fn lambda_max_primitive(
    (rho_l, v_l, p_l): (f64, f64, f64),
    (rho_r, v_r, p_r): (f64, f64, f64),
    gamma: f64,
) -> f64 {
    let c_l = (gamma * p_l / rho_l).sqrt();
    let c_r = (gamma * p_r / rho_r).sqrt();
    let expo = (gamma - 1.0) / (2.0 * gamma);
    let num = c_l + c_r - 0.5 * (gamma - 1.0) * (v_r - v_l);
    let p_star = if num > 0.0 {
        let den = c_l * p_l.powf(-expo) + c_r * p_r.powf(-expo);
        (num / den).powf(1.0 / expo)
    } else {
        0.0
    };
    let shock = (gamma + 1.0) / (2.0 * gamma);
    let lam_l = v_l - c_l * (1.0 + shock * ((p_star - p_l) / p_l).max(0.0)).sqrt();
    let lam_r = v_r + c_r * (1.0 + shock * ((p_star - p_r) / p_r).max(0.0)).sqrt();
    (-lam_l).max(lam_r).max(0.0)
}

/// Same as [`max_wavespeed`] without admissibility checks, for hot loops
/// whose inputs were already validated.
#[inline]
pub(crate) fn max_wavespeed_unchecked<const D: usize>(
    n: &[f64; D],
    ul: &ConservedState<D>,
    ur: &ConservedState<D>,
    gas: &GasModel,
) -> f64 {
    let vl = dot(&ul.mom, n) / ul.rho;
    let vr = dot(&ur.mom, n) / ur.rho;
    lambda_max_primitive(
        (ul.rho, vl, ul.pressure(gas)),
        (ur.rho, vr, ur.pressure(gas)),
        gas.gamma,
    )
}

/// Upper bound on the maximum wave speed with left state `ul`, right state
/// `ur` and flux `f(u) n`. `n` must be a unit vector.
pub fn max_wavespeed<const D: usize>(
    n: &[f64; D],
    ul: &ConservedState<D>,
    ur: &ConservedState<D>,
    gas: &GasModel,
) -> Result<WaveSpeedBound> {
    for u in [ul, ur] {
        u.thermodynamics(gas)?;
    }
    let len = dot(n, n).sqrt();
    if (len - 1.0).abs() > 1e-12 {
        return Err(Error::Config(format!(
            "direction must be a unit vector, |n| = {len}"
        )));
    }
    Ok(WaveSpeedBound {
        lambda_max: max_wavespeed_unchecked(n, ul, ur, gas),
    })
}
