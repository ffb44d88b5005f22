//! Independent oracles and generators shared by the integration tests.
#![allow(dead_code)]

use idpns::{ConservedState, GasModel};
use rand::Rng;

/// Toro's pressure function of one side and its derivative.
fn side_function(p: f64, rho: f64, pk: f64, gamma: f64) -> (f64, f64) {
    let c = (gamma * pk / rho).sqrt();
    if p > pk {
        let a = 2.0 / ((gamma + 1.0) * rho);
        let b = (gamma - 1.0) / (gamma + 1.0) * pk;
        let q = (a / (p + b)).sqrt();
        ((p - pk) * q, q * (1.0 - 0.5 * (p - pk) / (p + b)))
    } else {
        let e = (gamma - 1.0) / (2.0 * gamma);
        let r = (p / pk).powf(e);
        let dr = (p / pk).powf(-(gamma + 1.0) / (2.0 * gamma));
        (2.0 * c / (gamma - 1.0) * (r - 1.0), dr / (rho * c))
    }
}

/// Exact star pressure of the Riemann problem, 0 when a vacuum forms.
pub fn exact_star_pressure(l: (f64, f64, f64), r: (f64, f64, f64), gamma: f64) -> f64 {
    let (rl, ul, pl) = l;
    let (rr, ur, pr) = r;
    let f = |p: f64| {
        let (fl, dl) = side_function(p, rl, pl, gamma);
        let (fr, dr) = side_function(p, rr, pr, gamma);
        (fl + fr + ur - ul, dl + dr)
    };
    if f(0.0).0 >= 0.0 {
        return 0.0;
    }
    // f is increasing and concave: bracket then Newton with bisection guard.
    let (mut lo, mut hi) = (0.0, pl.max(pr));
    while f(hi).0 < 0.0 {
        lo = hi;
        hi *= 2.0;
    }
    let mut p = 0.5 * (lo + hi);
    for _ in 0..200 {
        let (v, d) = f(p);
        if v < 0.0 {
            lo = p;
        } else {
            hi = p;
        }
        let next = p - v / d;
        p = if next > lo && next < hi && next != p {
            next
        } else {
            0.5 * (lo + hi)
        };
        if v == 0.0 || hi - lo <= 1e-15 * hi {
            break;
        }
    }
    p
}

/// `max(|s_left|, |s_right|)` of the extreme waves of the exact solution.
pub fn exact_max_wave_speed(l: (f64, f64, f64), r: (f64, f64, f64), gamma: f64) -> f64 {
    let (rl, ul, pl) = l;
    let (rr, ur, pr) = r;
    let cl = (gamma * pl / rl).sqrt();
    let cr = (gamma * pr / rr).sqrt();
    let p = exact_star_pressure(l, r, gamma);
    let g = (gamma + 1.0) / (2.0 * gamma);
    let s_l = if p > pl {
        ul - cl * (1.0 + g * (p / pl - 1.0)).sqrt()
    } else {
        ul - cl
    };
    let s_r = if p > pr {
        ur + cr * (1.0 + g * (p / pr - 1.0)).sqrt()
    } else {
        ur + cr
    };
    (-s_l).max(s_r).max(0.0)
}

pub fn log_uniform(rng: &mut impl Rng, lo: f64, hi: f64) -> f64 {
    (rng.gen_range(lo.ln()..hi.ln())).exp()
}

/// Random admissible state: log-uniform density and specific internal
/// energy in `[1e-3, 1e3]`, velocity components in `[-10, 10]`.
pub fn random_state<const D: usize>(rng: &mut impl Rng) -> ConservedState<D> {
    let rho = log_uniform(rng, 1e-3, 1e3);
    let e = log_uniform(rng, 1e-3, 1e3);
    let mut v = [0.0; D];
    for c in v.iter_mut() {
        *c = rng.gen_range(-10.0..10.0);
    }
    ConservedState::from_primitive(rho, v, e)
}

pub fn random_unit<const D: usize>(rng: &mut impl Rng) -> [f64; D] {
    loop {
        let mut n = [0.0; D];
        for c in n.iter_mut() {
            *c = rng.gen_range(-1.0..1.0);
        }
        let len = n.iter().map(|x| x * x).sum::<f64>().sqrt();
        if len > 1e-3 {
            return n.map(|x| x / len);
        }
    }
}

pub fn primitive<const D: usize>(
    u: &ConservedState<D>,
    n: &[f64; D],
    gas: &GasModel,
) -> (f64, f64, f64) {
    let vn: f64 = (0..D).map(|k| u.mom[k] * n[k]).sum::<f64>() / u.rho;
    (u.rho, vn, u.pressure(gas))
}

/// Gauss-Legendre nodes and weights on `[0, 1]`.
pub fn gauss_legendre_01(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 1..=n {
        let mut x = (std::f64::consts::PI * (i as f64 - 0.25) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((0.5 * (1.0 - x), 1.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

/// Collapsed tensor rule on the reference triangle `{(0,0), (1,0), (0,1)}`:
/// `(xi, eta, weight)` with weights summing to 1/2.
pub fn triangle_rule(n: usize) -> Vec<(f64, f64, f64)> {
    let g = gauss_legendre_01(n);
    let mut out = Vec::new();
    for &(a, wa) in &g {
        for &(b, wb) in &g {
            out.push((a, b * (1.0 - a), wa * wb * (1.0 - a)));
        }
    }
    out
}
