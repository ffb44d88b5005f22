//! Invariant-domain-preserving update of the compressible Euler system.
//!
//! The low-order update is the graph-viscosity scheme
//!
//! ```text
//! m_i (U_i^L - U_i) / dt = sum_j -f(U_j) c_ij + d_ij (U_j - U_i)
//! ```
//!
//! which is a convex combination of bar states under `dt <= dt0`. The
//! high-order candidate reduces the viscosity with an entropy-commutator
//! indicator and inverts the consistent mass approximately. Both are blended
//! edge by edge with convex limiting on the density and on
//! `rho e - rho_min_entropy rho^gamma`. SSPRK(2,2) gives second order in time.

use crate::eos::{dot, ConservedState, GasModel};
use crate::error::{Error, Result};
use crate::field::{Discretization, SolutionField};
use crate::mesh::SparsityGraph;
use crate::operators::DiscreteOperators;
use crate::riemann::lambda_max_primitive;

type State<const D: usize> = ConservedState<D>;

/// Relative slack on `dt <= dt0` absorbing rounding in the time-step choice.
const CFL_SLACK: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HyperbolicConfig {
    /// Blend in the high-order candidate; otherwise the low-order update is used.
    pub high_order: bool,
    /// Widen the local bounds by `O(h^1.5)` before limiting.
    pub relaxation: bool,
    /// Largest accepted `dt / dt0` in each stage.
    pub max_stage_cfl: f64,
}

impl Default for HyperbolicConfig {
    fn default() -> Self {
        Self {
            high_order: true,
            relaxation: false,
            max_stage_cfl: 1.0,
        }
    }
}

/// Flux tensor `f(U)` of one state: rows for density, momentum and energy.
#[derive(Clone, Copy, Debug)]
struct Flux<const D: usize> {
    rho: [f64; D],
    mom: [[f64; D]; D],
    ener: [f64; D],
}

impl<const D: usize> Flux<D> {
    fn new(u: &State<D>, p: f64) -> Self {
        let v = u.velocity();
        let mut mom = [[0.0; D]; D];
        for k in 0..D {
            for l in 0..D {
                mom[k][l] = u.mom[k] * v[l];
            }
            mom[k][k] += p;
        }
        let mut ener = [0.0; D];
        for l in 0..D {
            ener[l] = (u.ener + p) * v[l];
        }
        Self {
            rho: u.mom,
            mom,
            ener,
        }
    }

    /// `f(U) c`.
    #[inline]
    fn apply(&self, c: &[f64; D]) -> State<D> {
        let mut mom = [0.0; D];
        for k in 0..D {
            mom[k] = dot(&self.mom[k], c);
        }
        State {
            rho: dot(&self.rho, c),
            mom,
            ener: dot(&self.ener, c),
        }
    }
}

/// Per-node quantities reused by every edge loop of a stage.
struct NodeCache<const D: usize> {
    pressure: Vec<f64>,
    flux: Vec<Flux<D>>,
}

impl<const D: usize> NodeCache<D> {
    fn new(states: &[State<D>], gas: &GasModel) -> Result<Self> {
        let mut pressure = Vec::with_capacity(states.len());
        let mut flux = Vec::with_capacity(states.len());
        for (i, u) in states.iter().enumerate() {
            let p = u.thermodynamics(gas).map_err(|e| e.at_node(i))?.p;
            pressure.push(p);
            flux.push(Flux::new(u, p));
        }
        Ok(Self { pressure, flux })
    }
}

/// Graph viscosity `d_ij` on the stencil graph, diagonal `d_ii = -sum_j d_ij`.
#[derive(Clone, Debug, PartialEq)]
pub struct GraphViscosity {
    pub d: Vec<f64>,
}

impl GraphViscosity {
    /// Largest admissible step `dt0 = min_i m_i / (2 |d_ii|)`.
    pub fn dt_max(&self, graph: &SparsityGraph, lumped: &[f64]) -> Result<f64> {
        let mut dt0 = f64::INFINITY;
        for (i, &m) in lumped.iter().enumerate() {
            let dii = self.d[graph.diag[i]];
            if dii < 0.0 {
                dt0 = dt0.min(m / (2.0 * -dii));
            }
        }
        if dt0.is_finite() {
            Ok(dt0)
        } else {
            Err(Error::NoHyperbolicScale)
        }
    }
}

fn check_cfl(stage: &'static str, dt: f64, dt0: f64, max_cfl: f64) -> Result<()> {
    if !(dt > 0.0) || dt > max_cfl * dt0 * (1.0 + CFL_SLACK) {
        return Err(Error::Cfl { stage, dt, dt0 });
    }
    Ok(())
}

fn graph_viscosity<const D: usize>(
    states: &[State<D>],
    ops: &DiscreteOperators<D>,
    cache: &NodeCache<D>,
) -> GraphViscosity {
    let g = &ops.graph;
    let gamma = ops.gas.gamma;
    let mut d = vec![0.0; g.nnz()];
    for i in 0..g.n_rows() {
        for k in g.row(i) {
            let j = g.cols[k];
            if j <= i {
                continue;
            }
            let kt = g.transpose[k];
            if ops.c_norm[k] == 0.0 && ops.c_norm[kt] == 0.0 {
                continue;
            }
            let (ui, uj) = (&states[i], &states[j]);
            let (pi, pj) = (cache.pressure[i], cache.pressure[j]);
            let lam = |n: &[f64; D], ul: &State<D>, pl: f64, ur: &State<D>, pr: f64| {
                lambda_max_primitive(
                    (ul.rho, dot(&ul.mom, n) / ul.rho, pl),
                    (ur.rho, dot(&ur.mom, n) / ur.rho, pr),
                    gamma,
                )
            };
            let dij = lam(&ops.n[k], ui, pi, uj, pj) * ops.c_norm[k];
            let dji = lam(&ops.n[kt], uj, pj, ui, pi) * ops.c_norm[kt];
            let v = dij.max(dji);
            d[k] = v;
            d[kt] = v;
        }
    }
    for i in 0..g.n_rows() {
        let s: f64 = g.row(i).filter(|&k| g.cols[k] != i).map(|k| d[k]).sum();
        d[g.diag[i]] = -s;
    }
    GraphViscosity { d }
}

/// Low-order graph viscosity of `states`. Errors on an inadmissible state.
pub fn compute_dij_low<const D: usize>(
    states: &[State<D>],
    ops: &DiscreteOperators<D>,
) -> Result<GraphViscosity> {
    let cache = NodeCache::new(states, &ops.gas)?;
    Ok(graph_viscosity(states, ops, &cache))
}

/// `dt0` of [`GraphViscosity::dt_max`] for the operators of `ops`.
pub fn dt_max<const D: usize>(gv: &GraphViscosity, ops: &DiscreteOperators<D>) -> Result<f64> {
    gv.dt_max(&ops.graph, &ops.lumped)
}

fn low_order_raw<const D: usize>(
    states: &[State<D>],
    ops: &DiscreteOperators<D>,
    cache: &NodeCache<D>,
    gv: &GraphViscosity,
    dt: f64,
) -> Vec<State<D>> {
    let g = &ops.graph;
    (0..g.n_rows())
        .map(|i| {
            let ui = states[i];
            let mut acc = State::zero();
            for k in g.row(i) {
                let j = g.cols[k];
                acc += -1.0 * cache.flux[j].apply(&ops.c[k]);
                if j != i {
                    acc += gv.d[k] * (states[j] - ui);
                }
            }
            ui + (dt / ops.lumped[i]) * acc
        })
        .collect()
}

/// One forward-Euler step of the low-order scheme, without boundary fix-up.
pub fn low_order_update<const D: usize>(
    states: &[State<D>],
    ops: &DiscreteOperators<D>,
    gv: &GraphViscosity,
    dt: f64,
) -> Result<Vec<State<D>>> {
    let dt0 = dt_max(gv, ops)?;
    check_cfl("low-order update", dt, dt0, 1.0)?;
    let cache = NodeCache::new(states, &ops.gas)?;
    Ok(low_order_raw(states, ops, &cache, gv, dt))
}

fn bar_states_raw<const D: usize>(
    states: &[State<D>],
    ops: &DiscreteOperators<D>,
    cache: &NodeCache<D>,
    gv: &GraphViscosity,
) -> Result<Vec<State<D>>> {
    let g = &ops.graph;
    let mut bars = vec![State::zero(); g.nnz()];
    for i in 0..g.n_rows() {
        for k in g.row(i) {
            let j = g.cols[k];
            if j == i {
                bars[k] = states[i];
                continue;
            }
            let dij = gv.d[k];
            if dij == 0.0 {
                if ops.c_norm[k] != 0.0 {
                    return Err(Error::ZeroViscosity { i, j });
                }
                // Decoupled pair: nothing is transported along this edge.
                bars[k] = states[i];
                continue;
            }
            let df = cache.flux[j].apply(&ops.c[k]) - cache.flux[i].apply(&ops.c[k]);
            bars[k] = 0.5 * (states[i] + states[j]) + (-0.5 / dij) * df;
        }
    }
    Ok(bars)
}

/// Bar states `U_ij = (U_i + U_j)/2 - (f(U_j) - f(U_i)) c_ij / (2 d_ij)` on
/// every edge; the diagonal entry holds `U_i`.
pub fn bar_states<const D: usize>(
    states: &[State<D>],
    ops: &DiscreteOperators<D>,
    gv: &GraphViscosity,
) -> Result<Vec<State<D>>> {
    let cache = NodeCache::new(states, &ops.gas)?;
    bar_states_raw(states, ops, &cache, gv)
}

/// High-order candidate together with its antidiffusive edge fluxes.
#[derive(Clone, Debug)]
pub struct HighOrderUpdate<const D: usize> {
    pub states: Vec<State<D>>,
    /// `A_ij` on the graph, antisymmetric; `U^H_i = U^L_i + sum_j A_ij / m_i`.
    pub fluxes: Vec<State<D>>,
    /// Entropy-commutator indicator in `[0, 1]`.
    pub indicator: Vec<f64>,
}

fn entropy_indicator<const D: usize>(
    states: &[State<D>],
    ops: &DiscreteOperators<D>,
    cache: &NodeCache<D>,
) -> Vec<f64> {
    let g = &ops.graph;
    let gas = &ops.gas;
    let ent: Vec<(f64, State<D>)> = states.iter().map(|u| u.entropy_and_gradient(gas)).collect();
    (0..g.n_rows())
        .map(|i| {
            let deta = ent[i].1;
            let (mut num, mut den) = (0.0, 0.0);
            for k in g.row(i) {
                let j = g.cols[k];
                let v = states[j].velocity();
                let a = ent[j].0 * dot(&v, &ops.c[k]);
                let b = deta.dot(&cache.flux[j].apply(&ops.c[k]));
                num += a - b;
                // Sum of magnitudes: in a constant state both sums above
                // cancel to rounding, and their ratio would be noise.
                den += a.abs() + b.abs();
            }
            if den <= f64::MIN_POSITIVE {
                return 0.0;
            }
            (num.abs() / den).min(1.0)
        })
        .collect()
}

fn high_order_raw<const D: usize>(
    states: &[State<D>],
    ops: &DiscreteOperators<D>,
    cache: &NodeCache<D>,
    gv: &GraphViscosity,
    low: &[State<D>],
    dt: f64,
) -> HighOrderUpdate<D> {
    let g = &ops.graph;
    let n = g.n_rows();
    let alpha = entropy_indicator(states, ops, cache);
    let dh = |k: usize, i: usize, j: usize| gv.d[k] * alpha[i].max(alpha[j]).min(1.0);
    let rhs: Vec<State<D>> = (0..n)
        .map(|i| {
            let ui = states[i];
            let mut acc = State::zero();
            for k in g.row(i) {
                let j = g.cols[k];
                acc += -1.0 * cache.flux[j].apply(&ops.c[k]);
                if j != i {
                    acc += dh(k, i, j) * (states[j] - ui);
                }
            }
            acc
        })
        .collect();
    let mut fluxes = vec![State::zero(); g.nnz()];
    for i in 0..n {
        let ri = (1.0 / ops.lumped[i]) * rhs[i];
        for k in g.row(i) {
            let j = g.cols[k];
            if j == i {
                continue;
            }
            let rj = (1.0 / ops.lumped[j]) * rhs[j];
            let visc = (dh(k, i, j) - gv.d[k]) * (states[j] - states[i]);
            fluxes[k] = dt * (visc + ops.mass[k] * (ri - rj));
        }
    }
    let high = (0..n)
        .map(|i| {
            let mut u = low[i];
            let inv = 1.0 / ops.lumped[i];
            for k in g.row(i) {
                if g.cols[k] != i {
                    u += inv * fluxes[k];
                }
            }
            u
        })
        .collect();
    HighOrderUpdate {
        states: high,
        fluxes,
        indicator: alpha,
    }
}

/// High-order candidate of one forward-Euler step from `states`.
pub fn high_order_update<const D: usize>(
    states: &[State<D>],
    ops: &DiscreteOperators<D>,
    gv: &GraphViscosity,
    dt: f64,
) -> Result<HighOrderUpdate<D>> {
    let dt0 = dt_max(gv, ops)?;
    check_cfl("high-order update", dt, dt0, 1.0)?;
    let cache = NodeCache::new(states, &ops.gas)?;
    let low = low_order_raw(states, ops, &cache, gv, dt);
    Ok(high_order_raw(states, ops, &cache, gv, &low, dt))
}

/// Local bounds of the limiter at every node.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalBounds {
    pub rho_min: Vec<f64>,
    pub rho_max: Vec<f64>,
    /// Lower bound on `rho e / rho^gamma`.
    pub entropy_min: Vec<f64>,
}

/// Bounds from the bar states around each node and the stencil minimum of
/// the entropy surrogate.
///
/// With `relaxation` the density bounds are widened by the smaller of
/// `r_i rho` with `r_i = (m_i / |Omega|)^(1.5/d)` and the mean second
/// difference `|sum_j (rho_i - rho_j)| / (card I(i) - 1)`, which is `O(h^2)`
/// in smooth regions. The entropy bound is never relaxed.
pub fn compute_local_bounds<const D: usize>(
    states: &[State<D>],
    bars: &[State<D>],
    ops: &DiscreteOperators<D>,
    relaxation: bool,
) -> LocalBounds {
    let g = &ops.graph;
    let n = g.n_rows();
    let surrogate: Vec<f64> = states
        .iter()
        .map(|u| u.entropy_surrogate(&ops.gas))
        .collect();
    let mut b = LocalBounds {
        rho_min: vec![0.0; n],
        rho_max: vec![0.0; n],
        entropy_min: vec![0.0; n],
    };
    for i in 0..n {
        let (mut lo, mut hi, mut smin) = (states[i].rho, states[i].rho, surrogate[i]);
        let mut second = 0.0;
        for k in g.row(i) {
            let j = g.cols[k];
            lo = lo.min(bars[k].rho);
            hi = hi.max(bars[k].rho);
            smin = smin.min(surrogate[j]);
            second += states[i].rho - states[j].rho;
        }
        let card = g.row(i).len();
        if relaxation && card > 1 {
            let r = (ops.lumped[i] / ops.domain_measure).powf(1.5 / D as f64);
            let delta = second.abs() / (card - 1) as f64;
            lo = (lo * (1.0 - r)).max(lo - delta);
            hi = (hi * (1.0 + r)).min(hi + delta);
        }
        b.rho_min[i] = lo;
        b.rho_max[i] = hi;
        b.entropy_min[i] = smin;
    }
    b
}

const LIMITER_MAX_ITER: usize = 32;
const LIMITER_TOL: f64 = 1e-12;

/// Largest `l` in `[0, 1]` such that `u + t p` satisfies the bounds for all
/// `t` in `[0, l]`, assuming `u` does.
///
/// The entropy constraint `psi(t) = rho e - s_min rho^gamma >= 0` is concave
/// along the ray: secant steps from the feasible end stay feasible and
/// Newton steps from the infeasible end stay infeasible, so the bracket
/// shrinks monotonically. Bisection takes over if rounding breaks this.
pub fn limit_edge<const D: usize>(
    u: &State<D>,
    p: &State<D>,
    rho_min: f64,
    rho_max: f64,
    entropy_min: f64,
    gamma: f64,
) -> f64 {
    let mut l: f64 = 1.0;
    if p.rho > 0.0 {
        l = l.min((rho_max - u.rho) / p.rho);
    } else if p.rho < 0.0 {
        l = l.min((rho_min - u.rho) / p.rho);
    }
    l = l.max(0.0);

    let psi = |t: f64| {
        let w = *u + t * *p;
        w.internal_energy_density() - entropy_min * w.rho.powf(gamma)
    };
    let dpsi = |t: f64| {
        let w = *u + t * *p;
        let m2 = dot(&w.mom, &w.mom);
        p.ener - dot(&w.mom, &p.mom) / w.rho + 0.5 * m2 * p.rho / (w.rho * w.rho)
            - gamma * entropy_min * w.rho.powf(gamma - 1.0) * p.rho
    };

    let mut psi_hi = psi(l);
    if psi_hi >= 0.0 {
        return l;
    }
    let (mut lo, mut hi) = (0.0, l);
    let mut psi_lo = psi(lo);
    if !(psi_lo >= 0.0) {
        return 0.0;
    }
    for _ in 0..LIMITER_MAX_ITER {
        let width = hi - lo;
        if width <= LIMITER_TOL {
            break;
        }
        let t_sec = lo + width * psi_lo / (psi_lo - psi_hi);
        let slope = dpsi(hi);
        let t_newton = if slope < 0.0 {
            hi - psi_hi / slope
        } else {
            f64::NAN
        };
        for t in [t_sec, t_newton] {
            if t > lo && t < hi {
                let v = psi(t);
                if v >= 0.0 {
                    lo = t;
                    psi_lo = v;
                } else {
                    hi = t;
                    psi_hi = v;
                }
            }
        }
        if hi - lo > 0.5 * width {
            let t = 0.5 * (lo + hi);
            let v = psi(t);
            if v >= 0.0 {
                lo = t;
                psi_lo = v;
            } else {
                hi = t;
                psi_hi = v;
            }
        }
    }
    lo
}

/// Summary of one limiting pass.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LimiterStats {
    pub min_factor: f64,
    pub limited_edges: usize,
}

/// Blend the low-order update with the high-order fluxes edge by edge.
///
/// Dirichlet dofs impose no constraint of their own since they are
/// overwritten after the stage.
pub fn convex_limit<const D: usize>(
    low: &[State<D>],
    high: &HighOrderUpdate<D>,
    bounds: &LocalBounds,
    ops: &DiscreteOperators<D>,
    dirichlet: &[bool],
) -> (Vec<State<D>>, LimiterStats) {
    let g = &ops.graph;
    let n = g.n_rows();
    let gamma = ops.gas.gamma;
    let mut li = vec![1.0; g.nnz()];
    for i in 0..n {
        if dirichlet.get(i).copied().unwrap_or(false) {
            continue;
        }
        let card = g.row(i).len();
        if card < 2 {
            continue;
        }
        let scale = (card - 1) as f64 / ops.lumped[i];
        for k in g.row(i) {
            if g.cols[k] == i {
                continue;
            }
            let p = scale * high.fluxes[k];
            li[k] = limit_edge(
                &low[i],
                &p,
                bounds.rho_min[i],
                bounds.rho_max[i],
                bounds.entropy_min[i],
                gamma,
            );
        }
    }
    let mut stats = LimiterStats {
        min_factor: 1.0,
        limited_edges: 0,
    };
    let out = (0..n)
        .map(|i| {
            let mut u = low[i];
            let inv = 1.0 / ops.lumped[i];
            for k in g.row(i) {
                if g.cols[k] == i {
                    continue;
                }
                let l = li[k].min(li[g.transpose[k]]);
                if l < 1.0 {
                    stats.limited_edges += 1;
                    stats.min_factor = stats.min_factor.min(l);
                }
                u += (l * inv) * high.fluxes[k];
            }
            u
        })
        .collect();
    (out, stats)
}

/// Audit record of one forward-Euler stage.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StageStats {
    pub dt: f64,
    pub dt0: f64,
    pub limiter: LimiterStats,
}

/// The hyperbolic substep on a fixed discretization.
pub struct HyperbolicSolver<'a, const D: usize> {
    pub disc: &'a Discretization<D>,
    pub config: HyperbolicConfig,
    dirichlet: Vec<bool>,
}

impl<'a, const D: usize> HyperbolicSolver<'a, D> {
    pub fn new(disc: &'a Discretization<D>, config: HyperbolicConfig) -> Self {
        let dirichlet = (0..disc.n_dofs()).map(|i| disc.is_dirichlet(i)).collect();
        Self {
            disc,
            config,
            dirichlet,
        }
    }

    /// `dt0` of the low-order scheme at `states`.
    pub fn dt_max(&self, states: &[State<D>]) -> Result<f64> {
        let gv = compute_dij_low(states, &self.disc.ops)?;
        dt_max(&gv, &self.disc.ops)
    }

    /// One limited forward-Euler stage ending at time `t_end`.
    pub fn euler_stage(
        &self,
        states: &[State<D>],
        dt: f64,
        t_end: f64,
        stage: &'static str,
    ) -> Result<(Vec<State<D>>, StageStats)> {
        let ops = &self.disc.ops;
        let cache = NodeCache::new(states, &ops.gas)?;
        let gv = graph_viscosity(states, ops, &cache);
        let dt0 = dt_max(&gv, ops)?;
        check_cfl(stage, dt, dt0, self.config.max_stage_cfl)?;
        let low = low_order_raw(states, ops, &cache, &gv, dt);
        let (mut out, limiter) = if self.config.high_order {
            let bars = bar_states_raw(states, ops, &cache, &gv)?;
            let bounds = compute_local_bounds(states, &bars, ops, self.config.relaxation);
            let high = high_order_raw(states, ops, &cache, &gv, &low, dt);
            convex_limit(&low, &high, &bounds, ops, &self.dirichlet)
        } else {
            (
                low,
                LimiterStats {
                    min_factor: 0.0,
                    limited_edges: 0,
                },
            )
        };
        self.disc.apply_hyperbolic_bc(&mut out, t_end)?;
        check_stage_output(&out, &ops.gas, stage)?;
        Ok((out, StageStats { dt, dt0, limiter }))
    }

    /// SSPRK(2,2) over `[t, t + dt]`.
    pub fn step(
        &self,
        field: &SolutionField<D>,
        dt: f64,
    ) -> Result<(SolutionField<D>, [StageStats; 2])> {
        let t = field.time;
        let (u1, s1) = self.euler_stage(&field.states, dt, t + dt, "hyperbolic stage 1")?;
        let (u2, s2) = self.euler_stage(&u1, dt, t + 2.0 * dt, "hyperbolic stage 2")?;
        let mut out: Vec<State<D>> = field
            .states
            .iter()
            .zip(&u2)
            .map(|(a, b)| 0.5 * (*a + *b))
            .collect();
        self.disc.apply_hyperbolic_bc(&mut out, t + dt)?;
        check_stage_output(&out, &self.disc.ops.gas, "hyperbolic average")?;
        Ok((SolutionField::new(out, t + dt), [s1, s2]))
    }
}

fn check_stage_output<const D: usize>(
    states: &[State<D>],
    gas: &GasModel,
    stage: &'static str,
) -> Result<()> {
    for (i, u) in states.iter().enumerate() {
        if u.thermodynamics(gas).is_err() {
            return Err(Error::Invariant(format!(
                "{stage} produced an inadmissible state at node {i}: {u:?}"
            )));
        }
    }
    Ok(())
}
