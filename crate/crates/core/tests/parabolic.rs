use idpns::eos::ConservedState;
use idpns::field::{Discretization, SolutionField};
use idpns::mesh::{structured_tri_2d, uniform_1d, BoundaryKind, DiagonalPattern, Side};
use idpns::operators::{assemble_operators, AssemblyOptions};
use idpns::parabolic::{fct_limit_energy, viscous_dissipation, ParabolicConfig, ParabolicSolver};
use idpns::GasModel;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn tight() -> ParabolicConfig {
    let mut c = ParabolicConfig::default();
    c.cg.tol = 1e-14;
    c
}

#[test]
fn inviscid_gas_makes_the_substep_the_identity() {
    let gas = GasModel::inviscid(1.4);
    let disc = Discretization::new(
        uniform_1d(0.0, 1.0, 9).unwrap(),
        gas,
        AssemblyOptions::default(),
    )
    .unwrap();
    let states = (0..9)
        .map(|i| ConservedState::from_primitive(1.0 + 0.1 * i as f64, [0.0], 1.0 + i as f64))
        .collect();
    let field = SolutionField::new(states, 0.5);
    let (out, rep) = ParabolicSolver::new(&disc, tight())
        .step(&field, None, 0.1)
        .unwrap();
    assert!(rep.skipped);
    assert_eq!(out.states, field.states);
    assert_eq!(out.time, 0.6);
}

/// Three nodes on [0, 1] with no-slip adiabatic ends: the velocity has one
/// unknown, the energy three. Both are checked against dense solves.
#[test]
fn three_node_system_matches_dense_solve() {
    let gas = GasModel::new(1.4, 0.2, 0.7).unwrap();
    let disc = Discretization::new(
        uniform_1d(0.0, 1.0, 3).unwrap(),
        gas,
        AssemblyOptions::default(),
    )
    .unwrap();
    let ops = &disc.ops;
    let rho = [1.0, 2.0, 0.5];
    let e = [1.0, 1.5, 2.0];
    let states: Vec<_> = (0..3)
        .map(|i| ConservedState::from_primitive(rho[i], [if i == 1 { 0.8 } else { 0.0 }], e[i]))
        .collect();
    let field = SolutionField::new(states, 0.0);
    let dt = 0.3;
    let solver = ParabolicSolver::new(&disc, tight());
    let vel = solver.velocity_update(&field, None, dt).unwrap();

    // m rho V + dt/2 B V = m rho v on the free node; h = 1/2, B_11 = 2 (4/3 mu) / h.
    let (h, m) = (0.5, 0.5);
    let b11 = 2.0 * (4.0 / 3.0 * gas.mu) / h;
    let v_half = m * rho[1] * 0.8 / (m * rho[1] + 0.5 * dt * b11);
    assert!((vel.v_half[1][0] - v_half).abs() < 1e-14);
    assert_eq!(vel.v_half[0][0], 0.0);
    assert!((vel.v_new[1][0] - (2.0 * v_half - 0.8)).abs() < 1e-14);

    // Backward-Euler energy: (diag(m rho) + dt beta) x = m rho e + dt m K.
    let k_nodal = viscous_dissipation(ops, &vel.v_half);
    let kk = gas.kappa_over_cv() / h;
    let beta = DMatrix::from_row_slice(3, 3, &[kk, -kk, 0.0, -kk, 2.0 * kk, -kk, 0.0, -kk, kk]);
    let mass = [0.25, 0.5, 0.25];
    let mut a = dt * beta;
    let mut rhs = DVector::zeros(3);
    for i in 0..3 {
        a[(i, i)] += mass[i] * rho[i];
        rhs[i] = mass[i] * rho[i] * e[i] + dt * mass[i] * k_nodal[i];
    }
    let x = a.lu().solve(&rhs).unwrap();
    let (e_l, _) = solver.energy_low_order(&rho, &e, &k_nodal, dt).unwrap();
    for i in 0..3 {
        assert!(
            (e_l[i] - x[i]).abs() < 1e-13,
            "node {i}: {} vs {}",
            e_l[i],
            x[i]
        );
    }
    // Dissipation on the two cells: (4/3) mu (v'/1)^2 spread to the vertices.
    let g = v_half / h;
    let sigma = 4.0 / 3.0 * gas.mu * g * g;
    assert!((k_nodal[1] - sigma * h / m).abs() < 1e-14);
    assert!((k_nodal[0] - sigma * h / 2.0 / mass[0]).abs() < 1e-14);
}

#[test]
fn without_conduction_energy_is_explicit() {
    // Infinite Prandtl number switches conduction off.
    let gas = GasModel::new(1.4, 0.05, f64::INFINITY).unwrap();
    assert_eq!(gas.kappa_over_cv(), 0.0);
    let disc = Discretization::new(
        uniform_1d(0.0, 1.0, 11).unwrap(),
        gas,
        AssemblyOptions::default(),
    )
    .unwrap();
    let states: Vec<_> = (0..11)
        .map(|i| {
            let x = i as f64 / 10.0;
            ConservedState::from_primitive(1.0 + x, [(std::f64::consts::PI * x).sin()], 1.0 + x * x)
        })
        .collect();
    let field = SolutionField::new(states, 0.0);
    let solver = ParabolicSolver::new(&disc, tight());
    let dt = 0.05;
    let vel = solver.velocity_update(&field, None, dt).unwrap();
    let k = viscous_dissipation(&disc.ops, &vel.v_half);
    let rho: Vec<f64> = field.states.iter().map(|u| u.rho).collect();
    let e: Vec<f64> = field.states.iter().map(|u| u.internal_energy()).collect();
    let (e_l, _) = solver.energy_low_order(&rho, &e, &k, dt).unwrap();
    let (e_h, _) = solver.energy_high_order(&rho, &e, &k, dt).unwrap();
    for i in 0..11 {
        let expect = e[i] + dt * k[i] / rho[i];
        assert!((e_l[i] - expect).abs() < 1e-13 * expect);
        assert!((e_h[i] - expect).abs() < 1e-13 * expect);
    }
}

#[test]
fn fct_on_a_hand_computed_system() {
    // beta on three nodes with h = 1/2 and kappa / c_v = 1: -2 off the diagonal.
    let gas = GasModel::new(1.4, 0.5, 0.7).unwrap();
    let ops = assemble_operators(
        &uniform_1d(0.0, 1.0, 3).unwrap(),
        &gas,
        AssemblyOptions::default(),
    )
    .unwrap();
    let kc = gas.kappa_over_cv();
    let b = -kc / 0.5;
    let dt = 0.1;
    let weight = [0.25, 0.5, 0.25];
    let e_n = [1.0, 1.0, 1.0];
    let e_l = [1.0, 1.0, 1.0];
    let e_h = [1.2, 0.9, 1.0];
    let e_min = [1.0; 3];
    // A_ij = -dt/2 beta_ij (eh_j - eh_i + en_j - en_i - 2 el_j + 2 el_i).
    let a01 = -0.5 * dt * b * (0.9 - 1.2);
    let a12 = -0.5 * dt * b * (1.0 - 0.9);
    // A_01 < 0 and A_21 = -A_12 < 0, so nodes 0 and 2 have P^- < 0 and,
    // with Q^- = 0, l^- = 0.
    let out = fct_limit_energy(&ops, &weight, &e_n, &e_l, &e_h, dt, &e_min, &[false; 3]);
    assert!(a01 < 0.0 && a12 > 0.0);
    assert!(out.bound_ok);
    assert_eq!(out.node_factor[0], 0.0);
    assert_eq!(out.node_factor[2], 0.0);
    // Edge 0-1 is limited by node 0, edge 1-2 by node 2.
    assert_eq!(out.e_new, e_l.to_vec());

    // With room below, l^- = Q^- / P^- exactly.
    let e_min = [0.99, 0.99, 0.99];
    let out = fct_limit_energy(&ops, &weight, &e_n, &e_l, &e_h, dt, &e_min, &[false; 3]);
    let l0 = (weight[0] * (0.99 - 1.0) / a01).min(1.0);
    assert!((out.node_factor[0] - l0).abs() < 1e-15);
    for i in 0..3 {
        assert!(out.e_new[i] >= 0.99 - 1e-15);
    }
    let budget: f64 = (0..3).map(|i| weight[i] * (out.e_new[i] - e_l[i])).sum();
    assert!(budget.abs() < 1e-16);
}

fn random_wall_field(disc: &Discretization<2>, seed: u64) -> SolutionField<2> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut states: Vec<_> = (0..disc.n_dofs())
        .map(|_| {
            ConservedState::from_primitive(
                rng.gen_range(0.2..3.0),
                [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)],
                rng.gen_range(0.01..3.0),
            )
        })
        .collect();
    disc.project_walls(&mut states);
    SolutionField::new(states, 0.0)
}

fn box_with_walls() -> Discretization<2> {
    let mut mesh = structured_tri_2d(
        (0.0, 1.0),
        (0.0, 1.0),
        7,
        7,
        DiagonalPattern::Alternating,
        false,
    )
    .unwrap();
    mesh.assign_side(Side::Top, BoundaryKind::Slip);
    let gas = GasModel::with_bulk_viscosity(1.4, 0.05, 0.01, 0.73).unwrap();
    Discretization::new(mesh, gas, AssemblyOptions::default()).unwrap()
}

#[test]
fn energy_balance_and_frozen_density() {
    let disc = box_with_walls();
    let field = random_wall_field(&disc, 5);
    let solver = ParabolicSolver::new(&disc, tight());
    let force: Vec<[f64; 2]> = (0..disc.n_dofs())
        .map(|i| [0.3, -1.0 + 0.01 * i as f64])
        .collect();
    for f in [None, Some(force.as_slice())] {
        let (out, rep) = solver.step(&field, f, 0.02).unwrap();
        assert!(rep.energy_balance <= 1e-8, "{}", rep.energy_balance);
        assert!(rep.fct_bound_ok);
        for (a, b) in field.states.iter().zip(&out.states) {
            assert_eq!(a.rho.to_bits(), b.rho.to_bits());
        }
    }
}

#[test]
fn admissible_for_every_time_step() {
    let disc = box_with_walls();
    let field = random_wall_field(&disc, 9);
    let solver = ParabolicSolver::new(&disc, ParabolicConfig::default());
    let e_min = field.min_internal_energy();
    for k in -4..=2 {
        let dt = 10f64.powi(k);
        let (out, rep) = solver.step(&field, None, dt).unwrap();
        out.check_admissible(disc.gas()).unwrap();
        assert!(rep.fct_bound_ok);
        assert!(
            out.min_internal_energy() >= e_min * (1.0 - 1e-14),
            "dt = {dt}"
        );
    }
}

/// Smooth decaying shear layer on a fixed mesh: the error of the Crank-Nicolson
/// substep against a fine-step reference decays at second order.
#[test]
fn crank_nicolson_is_second_order_in_time() {
    let gas = GasModel::new(1.4, 0.05, 0.75).unwrap();
    let disc = Discretization::new(
        uniform_1d(0.0, 1.0, 41).unwrap(),
        gas,
        AssemblyOptions::default(),
    )
    .unwrap();
    let states = (0..41)
        .map(|i| {
            let x = i as f64 / 40.0;
            let v = (std::f64::consts::PI * x).sin();
            ConservedState::from_primitive(1.0 + 0.5 * x, [v], 2.0 + (3.0 * x).cos())
        })
        .collect();
    let field = SolutionField::new(states, 0.0);
    let solver = ParabolicSolver::new(&disc, tight());
    let t_end = 0.4;
    let run = |steps: usize| {
        let mut f = field.clone();
        for _ in 0..steps {
            f = solver.step(&f, None, t_end / steps as f64).unwrap().0;
        }
        f
    };
    let reference = run(1024);
    let err = |f: &SolutionField<1>| {
        f.states
            .iter()
            .zip(&reference.states)
            .map(|(a, b)| (a.mom[0] - b.mom[0]).abs() + (a.ener - b.ener).abs())
            .fold(0.0, f64::max)
    };
    let e: Vec<f64> = [8, 16, 32].iter().map(|&n| err(&run(n))).collect();
    for w in e.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!(order >= 1.9, "errors {e:?}");
    }
}
