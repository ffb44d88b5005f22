//! Conserved-state algebra and ideal-gas thermodynamics.
//!
//! A nodal state is `(rho, m, E)` with `m` the momentum d-vector and `E` the
//! total mechanical energy density. The admissible set is
//! `{ rho > 0, e(U) > 0 }` with `e = E/rho - |m/rho|^2 / 2`.

use std::ops::{Add, AddAssign, Mul, Sub};

use crate::error::{Error, Result};

/// One nodal state `(rho, m, E)` in `D` space dimensions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConservedState<const D: usize> {
    pub rho: f64,
    pub mom: [f64; D],
    pub ener: f64,
}

impl<const D: usize> Default for ConservedState<D> {
    fn default() -> Self {
        Self::zero()
    }
}

#[inline]
pub(crate) fn dot<const D: usize>(a: &[f64; D], b: &[f64; D]) -> f64 {
    let mut s = 0.0;
    for k in 0..D {
        s += a[k] * b[k];
    }
    s
}

#[inline]
pub(crate) fn norm<const D: usize>(a: &[f64; D]) -> f64 {
    dot(a, a).sqrt()
}

impl<const D: usize> ConservedState<D> {
    pub const fn new(rho: f64, mom: [f64; D], ener: f64) -> Self {
        Self { rho, mom, ener }
    }

    pub const fn zero() -> Self {
        Self {
            rho: 0.0,
            mom: [0.0; D],
            ener: 0.0,
        }
    }

    /// Assemble a state from primitive quantities: density, velocity and
    /// specific internal energy.
    pub fn from_primitive(rho: f64, vel: [f64; D], e: f64) -> Self {
        let mut mom = [0.0; D];
        for k in 0..D {
            mom[k] = rho * vel[k];
        }
        let ener = rho * (e + 0.5 * dot(&vel, &vel));
        Self { rho, mom, ener }
    }

    /// Same as [`from_primitive`](Self::from_primitive) with pressure in
    /// place of internal energy.
    pub fn from_pressure(rho: f64, vel: [f64; D], p: f64, gas: &GasModel) -> Self {
        Self::from_primitive(rho, vel, p / ((gas.gamma - 1.0) * rho))
    }

    /// Velocity `m / rho`; only meaningful for positive density.
    #[inline]
    pub fn velocity(&self) -> [f64; D] {
        let mut v = [0.0; D];
        for k in 0..D {
            v[k] = self.mom[k] / self.rho;
        }
        v
    }

    /// Internal energy per unit volume, `rho e = E - |m|^2 / (2 rho)`.
    #[inline]
    pub fn internal_energy_density(&self) -> f64 {
        self.ener - 0.5 * dot(&self.mom, &self.mom) / self.rho
    }

    /// Specific internal energy `e = E/rho - |v|^2/2`.
    #[inline]
    pub fn internal_energy(&self) -> f64 {
        self.internal_energy_density() / self.rho
    }

    #[inline]
    pub fn kinetic_energy_density(&self) -> f64 {
        0.5 * dot(&self.mom, &self.mom) / self.rho
    }

    /// Strict membership in the admissible set. Total: NaN or non-positive
    /// density simply yields `false`.
    pub fn is_admissible(&self) -> bool {
        if !(self.rho > 0.0) || !self.rho.is_finite() {
            return false;
        }
        let e = self.internal_energy();
        e > 0.0 && e.is_finite()
    }

    /// Pressure `(gamma - 1) rho e` without any admissibility check.
    #[inline]
    pub fn pressure(&self, gas: &GasModel) -> f64 {
        (gas.gamma - 1.0) * self.internal_energy_density()
    }

    /// The entropy surrogate `rho e / rho^gamma = exp((gamma - 1) s)`.
    #[inline]
    pub fn entropy_surrogate(&self, gas: &GasModel) -> f64 {
        self.internal_energy_density() / self.rho.powf(gas.gamma)
    }

    /// Specific entropy `s = ln(e) / (gamma - 1) - ln(rho)`.
    #[inline]
    pub fn specific_entropy(&self, gas: &GasModel) -> f64 {
        self.internal_energy().ln() / (gas.gamma - 1.0) - self.rho.ln()
    }

    /// Thermodynamic closure; errors name the offending field.
    pub fn thermodynamics(&self, gas: &GasModel) -> Result<Thermodynamics> {
        if !(self.rho > 0.0) {
            return Err(Error::Domain {
                field: "density",
                value: self.rho,
                node: None,
            });
        }
        let e = self.internal_energy();
        if !(e > 0.0) {
            return Err(Error::Domain {
                field: "internal energy",
                value: e,
                node: None,
            });
        }
        let p = (gas.gamma - 1.0) * self.rho * e;
        Ok(Thermodynamics {
            e,
            p,
            temperature: e / gas.cv(),
            s: e.ln() / (gas.gamma - 1.0) - self.rho.ln(),
            c: (gas.gamma * p / self.rho).sqrt(),
        })
    }

    /// Hyperbolic flux contracted with a vector: `f(U) n`.
    #[inline]
    pub fn flux_dot(&self, n: &[f64; D], gas: &GasModel) -> Self {
        let v = self.velocity();
        let p = self.pressure(gas);
        let vn = dot(&v, n);
        let mut mom = [0.0; D];
        for k in 0..D {
            mom[k] = self.mom[k] * vn + p * n[k];
        }
        Self {
            rho: dot(&self.mom, n),
            mom,
            ener: (self.ener + p) * vn,
        }
    }

    /// Mathematical entropy `eta = rho s` and its gradient with respect to
    /// the conserved variables, evaluated for an admissible state.
    pub fn entropy_and_gradient(&self, gas: &GasModel) -> (f64, Self) {
        let gm1 = gas.gamma - 1.0;
        let v = self.velocity();
        let v2 = dot(&v, &v);
        let e = self.internal_energy();
        let s = e.ln() / gm1 - self.rho.ln();
        let inv = 1.0 / (gm1 * e);
        let mut dm = [0.0; D];
        for k in 0..D {
            dm[k] = -v[k] * inv;
        }
        let grad = Self {
            rho: s - gas.gamma / gm1 + 0.5 * v2 * inv,
            mom: dm,
            ener: inv,
        };
        (self.rho * s, grad)
    }

    /// Inner product treating the state as a flat `D + 2` vector.
    #[inline]
    pub fn dot(&self, other: &Self) -> f64 {
        self.rho * other.rho + dot(&self.mom, &other.mom) + self.ener * other.ener
    }

    /// Euclidean norm of the momentum vector.
    #[inline]
    pub fn momentum_norm(&self) -> f64 {
        norm(&self.mom)
    }
}

impl<const D: usize> Add for ConservedState<D> {
    type Output = Self;
    #[inline]
    fn add(self, o: Self) -> Self {
        let mut mom = self.mom;
        for k in 0..D {
            mom[k] += o.mom[k];
        }
        Self {
            rho: self.rho + o.rho,
            mom,
            ener: self.ener + o.ener,
        }
    }
}

impl<const D: usize> AddAssign for ConservedState<D> {
    #[inline]
    fn add_assign(&mut self, o: Self) {
        self.rho += o.rho;
        for k in 0..D {
            self.mom[k] += o.mom[k];
        }
        self.ener += o.ener;
    }
}

impl<const D: usize> Sub for ConservedState<D> {
    type Output = Self;
    #[inline]
    fn sub(self, o: Self) -> Self {
        let mut mom = self.mom;
        for k in 0..D {
            mom[k] -= o.mom[k];
        }
        Self {
            rho: self.rho - o.rho,
            mom,
            ener: self.ener - o.ener,
        }
    }
}

impl<const D: usize> Mul<ConservedState<D>> for f64 {
    type Output = ConservedState<D>;
    #[inline]
    fn mul(self, u: ConservedState<D>) -> ConservedState<D> {
        let mut mom = u.mom;
        for k in 0..D {
            mom[k] *= self;
        }
        ConservedState {
            rho: self * u.rho,
            mom,
            ener: self * u.ener,
        }
    }
}

/// Output of [`ConservedState::thermodynamics`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Thermodynamics {
    /// Specific internal energy.
    pub e: f64,
    /// Pressure.
    pub p: f64,
    pub temperature: f64,
    /// Specific entropy.
    pub s: f64,
    /// Sound speed.
    pub c: f64,
}

/// Ideal gas with constant transport coefficients.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GasModel {
    pub gamma: f64,
    /// Shear viscosity.
    pub mu: f64,
    /// Bulk viscosity.
    pub lambda: f64,
    pub prandtl: f64,
}

impl GasModel {
    /// Ideal gas with zero bulk viscosity.
    pub fn new(gamma: f64, mu: f64, prandtl: f64) -> Result<Self> {
        Self::with_bulk_viscosity(gamma, mu, 0.0, prandtl)
    }

    pub fn with_bulk_viscosity(gamma: f64, mu: f64, lambda: f64, prandtl: f64) -> Result<Self> {
        if !(gamma > 1.0) {
            return Err(Error::Config(format!("gamma must exceed 1, got {gamma}")));
        }
        if !(mu >= 0.0) || !(lambda >= 0.0) {
            return Err(Error::Config(format!(
                "viscosities must be non-negative, got mu = {mu}, lambda = {lambda}"
            )));
        }
        if !(prandtl > 0.0) {
            return Err(Error::Config(format!(
                "Prandtl number must be positive, got {prandtl}"
            )));
        }
        Ok(Self {
            gamma,
            mu,
            lambda,
            prandtl,
        })
    }

    /// Inviscid gas: all transport coefficients vanish.
    pub fn inviscid(gamma: f64) -> Self {
        Self {
            gamma,
            mu: 0.0,
            lambda: 0.0,
            prandtl: 1.0,
        }
    }

    #[inline]
    pub fn cv(&self) -> f64 {
        1.0 / (self.gamma - 1.0)
    }

    #[inline]
    pub fn cp(&self) -> f64 {
        self.gamma / (self.gamma - 1.0)
    }

    /// Thermal diffusivity in internal-energy form, `kappa / c_v = gamma mu / Pr`.
    #[inline]
    pub fn kappa_over_cv(&self) -> f64 {
        self.gamma * self.mu / self.prandtl
    }

    /// Thermal conductivity `kappa = mu c_p / Pr`.
    #[inline]
    pub fn kappa(&self) -> f64 {
        self.mu * self.cp() / self.prandtl
    }

    /// Constant `k` in `s(v):grad v >= 2 mu (1 - k) |e(v)|^2`.
    pub fn dissipation_constant(&self, dim: usize) -> f64 {
        if self.mu == 0.0 {
            return 0.0;
        }
        let d = dim as f64;
        (d / 3.0 * (1.0 - 1.5 * self.lambda / self.mu)).max(0.0)
    }
}
