use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use idpns::harness::config::{RunConfig, OUTPUT_DIR_ENV};
use idpns::harness::convergence::{shock_study_1d, shock_study_2d, Quadrature, ShockStudy};
use idpns::harness::output::write_atomic;
use idpns::harness::run::execute;
use idpns::mesh::{peek_dimension, MeshTopology};
use idpns::operators::{assemble_operators, AssemblyOptions};
use idpns::{Error, GasModel, Result};

#[derive(Parser)]
#[command(
    name = "idpns",
    version,
    about = "Invariant-domain-preserving compressible Navier-Stokes solver"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the simulation described by a TOML config.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// Grid convergence study against the traveling viscous shock.
    Converge {
        #[arg(long, value_enum)]
        case: Case,
        /// Node counts of the uniform 1D grids.
        #[arg(long, value_delimiter = ',')]
        grids: Vec<usize>,
        /// Mesh files of the 2D study, coarse to fine.
        #[arg(long, value_delimiter = ',')]
        meshes: Vec<PathBuf>,
        #[arg(long, value_enum, default_value_t = QuadratureArg::Nodal)]
        quadrature: QuadratureArg,
        #[arg(long, default_value_t = 0.4)]
        cfl: f64,
        #[arg(long, default_value_t = 3.0)]
        t_final: f64,
        #[arg(long, default_value_t = 0.01)]
        mu: f64,
        #[arg(long, default_value_t = 3.0)]
        mach: f64,
        #[arg(long, default_value_t = 0.2)]
        v_inf: f64,
        /// Relax the density bounds of the convex limiter.
        #[arg(long)]
        relaxation: bool,
        /// First-order hyperbolic and backward-Euler parabolic steps only.
        #[arg(long)]
        low_order: bool,
        /// CSV path; defaults to `convergence.csv` in the output directory.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Mesh statistics and the sign audit of the off-diagonal stiffness.
    MeshInfo { path: PathBuf },
    /// Sample the exact viscous shock on a uniform 1D grid as CSV.
    ExportExact {
        #[arg(long, default_value_t = 1.4)]
        gamma: f64,
        #[arg(long, default_value_t = 3.0)]
        mach: f64,
        #[arg(long, default_value_t = 0.01)]
        mu: f64,
        #[arg(long, default_value_t = 0.2)]
        v_inf: f64,
        #[arg(long, default_value_t = 0.0)]
        t: f64,
        #[arg(long, default_value_t = -1.0, allow_hyphen_values = true)]
        a: f64,
        #[arg(long, default_value_t = 1.5)]
        b: f64,
        #[arg(long, default_value_t = 201)]
        n: usize,
        /// Write here instead of stdout.
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Case {
    Becker1d,
    Becker2d,
}

#[derive(Clone, Copy, ValueEnum)]
enum QuadratureArg {
    Nodal,
    Cellwise,
}

fn output_dir() -> PathBuf {
    std::env::var_os(OUTPUT_DIR_ENV)
        .filter(|d| !d.is_empty())
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("output"))
}

fn run(config: &Path) -> Result<()> {
    let cfg = RunConfig::load(config)?;
    let s = execute(&cfg)?;
    println!(
        "{}D, {} dofs: {} steps to t = {}",
        s.dim, s.n_dofs, s.steps, s.final_time
    );
    for f in &s.files {
        println!("wrote {}", f.display());
    }
    if let Some(e) = s.error {
        println!(
            "delta1 = {:.6e}  delta2 = {:.6e}  deltainf = {:.6e}",
            e.delta1, e.delta2, e.delta_inf
        );
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn converge(
    case: Case,
    grids: &[usize],
    meshes: &[PathBuf],
    study: ShockStudy,
    output: Option<PathBuf>,
) -> Result<()> {
    let outcome = match case {
        Case::Becker1d => {
            if grids.len() < 2 {
                return Err(Error::Config(
                    "--grids needs at least two node counts".into(),
                ));
            }
            shock_study_1d(&study, grids)
        }
        Case::Becker2d => {
            if meshes.len() < 2 {
                return Err(Error::Config(
                    "--meshes needs at least two mesh files".into(),
                ));
            }
            let meshes = meshes
                .iter()
                .map(|p| MeshTopology::<2>::read(p))
                .collect::<Result<Vec<_>>>()?;
            shock_study_2d(&study, meshes)
        }
    };
    let csv = outcome.table.to_csv();
    let path = output.unwrap_or_else(|| output_dir().join("convergence.csv"));
    write_atomic(&path, csv.as_bytes())?;
    print!("{csv}");
    eprintln!("wrote {}", path.display());
    match outcome.error {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

fn mesh_info(path: &Path) -> Result<()> {
    match peek_dimension(path)? {
        1 => mesh_info_dim(MeshTopology::<1>::read(path)?),
        2 => mesh_info_dim(MeshTopology::<2>::read(path)?),
        d => Err(Error::Mesh(format!("unsupported dimension {d}"))),
    }
}

fn mesh_info_dim<const D: usize>(mesh: MeshTopology<D>) -> Result<()> {
    let ops = assemble_operators(&mesh, &GasModel::inviscid(1.4), AssemblyOptions::default())?;
    let (lo, hi) = mesh.bounding_box();
    let periodic = (0..mesh.n_nodes())
        .filter(|&i| mesh.periodic_partner(i).is_some())
        .count();
    println!("dimension        {D}");
    println!("nodes            {}", mesh.n_nodes());
    println!("cells            {}", mesh.n_cells());
    println!("dofs             {}", mesh.n_dofs());
    println!("boundary dofs    {}", mesh.boundary_dofs().count());
    println!("periodic nodes   {periodic}");
    println!("bounding box     {lo:?} .. {hi:?}");
    println!("measure          {:e}", ops.domain_measure);
    println!("stencil nnz      {}", ops.graph.nnz());
    let beta = ops.max_offdiag_stiffness;
    println!("max offdiag beta {beta:e}");
    println!(
        "beta <= 0        {}",
        if beta <= 0.0 { "yes" } else { "no" }
    );
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn export_exact(
    gamma: f64,
    mach: f64,
    mu: f64,
    v_inf: f64,
    t: f64,
    (a, b, n): (f64, f64, usize),
    output: Option<PathBuf>,
) -> Result<()> {
    let p = idpns::becker::shock_params(gamma, mach, 1.0, 1.0)?
        .with_viscosity(mu)
        .with_translation(v_inf);
    let gas = p.gas()?;
    let mesh = idpns::mesh::uniform_1d(a, b, n)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| Error::Config(format!("csv: {e}"));
    w.write_record(["x", "rho", "v", "e", "p"])
        .map_err(csv_err)?;
    for x in mesh.coords() {
        let u = p.state(x[0], t);
        w.write_record(
            [
                x[0],
                u.rho,
                u.velocity()[0],
                u.internal_energy(),
                u.pressure(&gas),
            ]
            .map(|v| format!("{v:.15e}")),
        )
        .map_err(csv_err)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::Config(format!("csv: {e}")))?;
    match output {
        Some(path) => write_atomic(&path, &bytes),
        None => {
            print!("{}", String::from_utf8_lossy(&bytes));
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config } => run(&config),
        Command::Converge {
            case,
            grids,
            meshes,
            quadrature,
            cfl,
            t_final,
            mu,
            mach,
            v_inf,
            relaxation,
            low_order,
            output,
        } => {
            let mut study = ShockStudy {
                cfl,
                t_final,
                mu,
                mach,
                v_inf,
                quadrature: match quadrature {
                    QuadratureArg::Nodal => Quadrature::Nodal,
                    QuadratureArg::Cellwise => Quadrature::Cellwise,
                },
                ..ShockStudy::default()
            };
            study.hyperbolic.relaxation = relaxation;
            study.hyperbolic.high_order = !low_order;
            study.parabolic.high_order = !low_order;
            converge(case, &grids, &meshes, study, output)
        }
        Command::MeshInfo { path } => mesh_info(&path),
        Command::ExportExact {
            gamma,
            mach,
            mu,
            v_inf,
            t,
            a,
            b,
            n,
            output,
        } => export_exact(gamma, mach, mu, v_inf, t, (a, b, n), output),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let mut src = std::error::Error::source(&e);
            while let Some(s) = src {
                eprintln!("  caused by: {s}");
                src = s.source();
            }
            ExitCode::FAILURE
        }
    }
}
