//! Exact viscous shock profile of the one-dimensional Navier-Stokes
//! equations for Prandtl number 3/4, in the shock frame and translated.
//!
//! With `m0 = rho0 v0` the velocity is defined implicitly by
//!
//! ```text
//! x = (2 / (gamma + 1)) kappa / (m0 c_v) *
//!     [ v0 / (v0 - v1) ln((v0 - v) / (v0 - v01))
//!     - v1 / (v0 - v1) ln((v - v1) / (v01 - v1)) ]
//! ```
//!
//! so that `v(0) = v01 = sqrt(v0 v1)`, and `rho = m0 / v`,
//! `e = ((gamma + 1) / (gamma - 1) v01^2 - v^2) / (2 gamma)`.

use crate::eos::{ConservedState, GasModel};
use crate::error::{Error, Result};

pub const BECKER_PRANDTL: f64 = 0.75;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BeckerParams {
    pub gamma: f64,
    pub mu: f64,
    /// Thermal conductivity `mu c_p / Pr`.
    pub kappa: f64,
    /// Upstream velocity in the shock frame.
    pub v0: f64,
    /// Downstream velocity in the shock frame.
    pub v1: f64,
    pub v01: f64,
    pub rho0: f64,
    pub m0: f64,
    /// Translation velocity of the shock.
    pub v_inf: f64,
}

/// Shock with pre-shock Mach number `mach`, viscosity 0.01 and no
/// translation; adjust with [`BeckerParams::with_viscosity`] and
/// [`BeckerParams::with_translation`].
pub fn shock_params(gamma: f64, mach: f64, v0: f64, rho0: f64) -> Result<BeckerParams> {
    if !(gamma > 1.0) {
        return Err(Error::Config(format!("gamma must exceed 1, got {gamma}")));
    }
    if !(mach > 1.0) {
        return Err(Error::Config(format!(
            "no shock for Mach number {mach} <= 1"
        )));
    }
    if !(v0 > 0.0) || !(rho0 > 0.0) {
        return Err(Error::Config(format!(
            "upstream velocity and density must be positive, got v0 = {v0}, rho0 = {rho0}"
        )));
    }
    let v1 = v0 * (gamma - 1.0 + 2.0 / (mach * mach)) / (gamma + 1.0);
    let mut p = BeckerParams {
        gamma,
        mu: 0.0,
        kappa: 0.0,
        v0,
        v1,
        v01: (v0 * v1).sqrt(),
        rho0,
        m0: rho0 * v0,
        v_inf: 0.0,
    };
    p = p.with_viscosity(0.01);
    Ok(p)
}

impl BeckerParams {
    pub fn with_viscosity(mut self, mu: f64) -> Self {
        self.mu = mu;
        self.kappa = mu * self.cp() / BECKER_PRANDTL;
        self
    }

    pub fn with_translation(mut self, v_inf: f64) -> Self {
        self.v_inf = v_inf;
        self
    }

    pub fn cv(&self) -> f64 {
        1.0 / (self.gamma - 1.0)
    }

    pub fn cp(&self) -> f64 {
        self.gamma / (self.gamma - 1.0)
    }

    /// Gas model the profile solves the equations for.
    pub fn gas(&self) -> Result<GasModel> {
        GasModel::new(self.gamma, self.mu, BECKER_PRANDTL)
    }

    fn length_scale(&self) -> f64 {
        2.0 / (self.gamma + 1.0) * self.kappa / (self.m0 * self.cv())
    }

    /// Position of velocity `v` in `(v1, v0)`.
    pub fn position_of_velocity(&self, v: f64) -> f64 {
        let (v0, v1, v01) = (self.v0, self.v1, self.v01);
        let w = v0 - v1;
        self.length_scale()
            * (v0 / w * ((v0 - v) / (v0 - v01)).ln() - v1 / w * ((v - v1) / (v01 - v1)).ln())
    }

    fn dposition_dv(&self, v: f64) -> f64 {
        let (v0, v1) = (self.v0, self.v1);
        let w = v0 - v1;
        self.length_scale() * (-v0 / (w * (v0 - v)) - v1 / (w * (v - v1)))
    }

    /// Shock-frame velocity at `x`.
    pub fn velocity_at(&self, x: f64) -> f64 {
        let eps = 1e-14 * (self.v0 - self.v1);
        let (mut lo, mut hi) = (self.v1 + eps, self.v0 - eps);
        if x >= self.position_of_velocity(lo) {
            return lo;
        }
        if x <= self.position_of_velocity(hi) {
            return hi;
        }
        let tol = 1e-13 * x.abs().max(self.length_scale());
        let mut v = self.v01;
        let mut best = (f64::INFINITY, v);
        for _ in 0..200 {
            let f = self.position_of_velocity(v) - x;
            if f.abs() <= tol {
                return v;
            }
            if f.abs() < best.0 {
                best = (f.abs(), v);
            }
            // x(v) is decreasing: a positive residual means v is too small.
            if f > 0.0 {
                lo = v;
            } else {
                hi = v;
            }
            let next = v - f / self.dposition_dv(v);
            v = if next > lo && next < hi {
                next
            } else {
                0.5 * (lo + hi)
            };
            if hi - lo <= 4.0 * f64::EPSILON * hi {
                // Bracket exhausted: settle on the best float nearby.
                let mut w = lo;
                while w <= hi {
                    let f = (self.position_of_velocity(w) - x).abs();
                    if f < best.0 {
                        best = (f, w);
                    }
                    w = w.next_up();
                }
                return best.1;
            }
        }
        best.1
    }

    /// `(rho, v, e)` in the shock frame.
    pub fn profile(&self, x: f64) -> (f64, f64, f64) {
        let v = self.velocity_at(x);
        (self.m0 / v, v, self.internal_energy_of_velocity(v))
    }

    pub fn internal_energy_of_velocity(&self, v: f64) -> f64 {
        let g = self.gamma;
        ((g + 1.0) / (g - 1.0) * self.v01 * self.v01 - v * v) / (2.0 * g)
    }

    /// Conserved state of the translated shock at `(x, t)`.
    pub fn state(&self, x: f64, t: f64) -> ConservedState<1> {
        let (rho, v, e) = self.profile(x - self.v_inf * t);
        ConservedState::from_primitive(rho, [self.v_inf + v], e)
    }
}

/// `(rho, v, e)` of the shock-frame profile at `x`.
pub fn becker_profile(x: f64, params: &BeckerParams) -> (f64, f64, f64) {
    params.profile(x)
}

/// Conserved state of the translated profile at `(x, t)`.
pub fn becker_state(x: f64, t: f64, params: &BeckerParams) -> ConservedState<1> {
    params.state(x, t)
}
