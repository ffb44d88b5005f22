//! Run configuration in TOML: `key = value` pairs grouped in sections.
//!
//! ```toml
//! [mesh]
//! kind = "structured2d"        # or "uniform1d", "file"
//! x = [0.0, 1.0]
//! y = [0.0, 0.5]
//! nx = 80
//! ny = 40
//!
//! [gas]
//! gamma = 1.4
//! mu = 1e-3
//! prandtl = 0.73
//!
//! [initial]
//! kind = "sod2d"               # or "becker", "constant", "riemann"
//!
//! [bc]
//! left = "noslip"
//! right = "noslip"
//! bottom = "noslip"
//! top = "slip"
//!
//! [time]
//! cfl = 0.95
//! t_final = 1.0
//!
//! [output]
//! dir = "out/shocktube"
//! snapshots = [0.6, 0.8, 1.0]
//! ```
//!
//! Relative mesh paths are resolved against the directory of the config
//! file. `IDPNS_OUTPUT_DIR` overrides `output.dir`.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::Deserialize;

use crate::becker::{shock_params, BeckerParams, BECKER_PRANDTL};
use crate::eos::{ConservedState, GasModel};
use crate::error::{Error, Result};
use crate::harness::cases::{ExactFn, Problem};
use crate::hyperbolic::HyperbolicConfig;
use crate::linalg::CgOptions;
use crate::mesh::{
    structured_tri_2d, uniform_1d, BoundaryKind, DiagonalPattern, MeshTopology, Side,
};
use crate::operators::AssemblyOptions;
use crate::parabolic::{EnergyBound, ParabolicConfig};
use crate::splitting::TimeControls;

type InitFn<const D: usize> = Box<dyn Fn(&[f64; D]) -> ConservedState<D>>;

pub const OUTPUT_DIR_ENV: &str = "IDPNS_OUTPUT_DIR";

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub mesh: MeshConfig,
    #[serde(default)]
    pub gas: GasConfig,
    pub initial: InitialConfig,
    #[serde(default)]
    pub bc: BcConfig,
    #[serde(default)]
    pub time: TimeConfig,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub limiter: LimiterConfig,
    /// Runs are deterministic either way: every reduction is sequential in
    /// dof order. The key is kept so configs can state the intent.
    #[serde(default = "yes")]
    pub reproducible: bool,
}

fn yes() -> bool {
    true
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum MeshConfig {
    Uniform1d {
        a: f64,
        b: f64,
        n: usize,
    },
    Structured2d {
        x: [f64; 2],
        y: [f64; 2],
        nx: usize,
        ny: usize,
        #[serde(default)]
        pattern: PatternConfig,
        #[serde(default)]
        periodic_y: bool,
    },
    File {
        path: PathBuf,
    },
}

#[derive(Clone, Copy, Debug, Default, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum PatternConfig {
    Uniform,
    #[default]
    Alternating,
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct GasConfig {
    pub gamma: f64,
    pub mu: f64,
    /// Bulk viscosity; zero (Stokes hypothesis) when absent.
    pub lambda: Option<f64>,
    pub prandtl: f64,
}

impl Default for GasConfig {
    fn default() -> Self {
        Self {
            gamma: 1.4,
            mu: 0.0,
            lambda: None,
            prandtl: BECKER_PRANDTL,
        }
    }
}

impl GasConfig {
    pub fn model(&self) -> Result<GasModel> {
        match self.lambda {
            Some(l) => GasModel::with_bulk_viscosity(self.gamma, self.mu, l, self.prandtl),
            None => GasModel::new(self.gamma, self.mu, self.prandtl),
        }
    }
}

/// Primitive state `(rho, velocity, pressure)`.
#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct PrimitiveConfig {
    pub rho: f64,
    #[serde(default)]
    pub velocity: Vec<f64>,
    pub pressure: f64,
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum InitialConfig {
    /// Traveling viscous shock in `x`; viscosity and gamma come from `[gas]`.
    Becker {
        mach: f64,
        #[serde(default)]
        v_inf: f64,
    },
    /// `rho = 120 | 1.2` at rest with `p = rho / gamma`, diaphragm at `x = 1/2`.
    Sod2d,
    Constant(PrimitiveConfig),
    /// Two constant states separated at `x = x0`.
    Riemann {
        x0: f64,
        left: PrimitiveConfig,
        right: PrimitiveConfig,
    },
}

#[derive(Clone, Debug, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct BcConfig {
    pub left: Option<String>,
    pub right: Option<String>,
    pub bottom: Option<String>,
    pub top: Option<String>,
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct TimeConfig {
    pub cfl: f64,
    pub t_final: f64,
    pub max_steps: Option<usize>,
    pub audit_every: usize,
}

impl Default for TimeConfig {
    fn default() -> Self {
        let t = TimeControls::default();
        Self {
            cfl: t.cfl,
            t_final: t.t_final,
            max_steps: None,
            audit_every: t.audit_every,
        }
    }
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub snapshots: Vec<f64>,
    pub vtk: bool,
    pub series: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("output"),
            snapshots: Vec::new(),
            vtk: true,
            series: true,
        }
    }
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct LimiterConfig {
    pub high_order: bool,
    pub relaxation: bool,
    pub energy_bound: EnergyBoundConfig,
    pub cg_tol: f64,
    /// Fail on obtuse meshes instead of warning.
    pub strict_acute: bool,
}

impl Default for LimiterConfig {
    fn default() -> Self {
        Self {
            high_order: true,
            relaxation: false,
            energy_bound: EnergyBoundConfig::Global,
            cg_tol: CgOptions::default().tol,
            strict_acute: false,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum EnergyBoundConfig {
    #[default]
    Global,
    Local,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Read `path` and resolve relative mesh paths against its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg =
            Self::parse(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        if let MeshConfig::File { path: mesh } = &mut cfg.mesh {
            if mesh.is_relative() {
                if let Some(dir) = path.parent() {
                    *mesh = dir.join(&*mesh);
                }
            }
            if !mesh.exists() {
                return Err(Error::Config(format!(
                    "mesh file {} does not exist",
                    mesh.display()
                )));
            }
        }
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        self.gas.model()?;
        if let InitialConfig::Becker { mach, .. } = self.initial {
            if self.gas.prandtl != BECKER_PRANDTL {
                return Err(Error::Config(format!(
                    "initial.kind = \"becker\" needs gas.prandtl = {BECKER_PRANDTL}, got {}",
                    self.gas.prandtl
                )));
            }
            if !(self.gas.mu > 0.0) {
                return Err(Error::Config(
                    "initial.kind = \"becker\" needs gas.mu > 0".into(),
                ));
            }
            if self.gas.lambda.is_some_and(|l| l != 0.0) {
                return Err(Error::Config(
                    "initial.kind = \"becker\" needs zero bulk viscosity".into(),
                ));
            }
            shock_params(self.gas.gamma, mach, 1.0, 1.0)?;
        }
        for (name, tag) in self.bc.sides() {
            if let Some(t) = tag {
                BoundaryKind::parse(t).ok_or_else(|| {
                    Error::Config(format!("bc.{name}: unknown boundary kind `{t}`"))
                })?;
            }
        }
        self.time_controls().validate(0.0)
    }

    /// Spatial dimension of the configured mesh.
    pub fn dimension(&self) -> Result<usize> {
        match &self.mesh {
            MeshConfig::Uniform1d { .. } => Ok(1),
            MeshConfig::Structured2d { .. } => Ok(2),
            MeshConfig::File { path } => crate::mesh::peek_dimension(path),
        }
    }

    pub fn mesh_1d(&self) -> Result<MeshTopology<1>> {
        match &self.mesh {
            MeshConfig::Uniform1d { a, b, n } => uniform_1d(*a, *b, *n),
            MeshConfig::File { path } => MeshTopology::read(path),
            MeshConfig::Structured2d { .. } => Err(Error::Config("mesh is two-dimensional".into())),
        }
    }

    pub fn mesh_2d(&self) -> Result<MeshTopology<2>> {
        match &self.mesh {
            MeshConfig::Structured2d {
                x,
                y,
                nx,
                ny,
                pattern,
                periodic_y,
            } => {
                let pattern = match pattern {
                    PatternConfig::Uniform => DiagonalPattern::Uniform,
                    PatternConfig::Alternating => DiagonalPattern::Alternating,
                };
                structured_tri_2d((x[0], x[1]), (y[0], y[1]), *nx, *ny, pattern, *periodic_y)
            }
            MeshConfig::File { path } => MeshTopology::read(path),
            MeshConfig::Uniform1d { .. } => Err(Error::Config("mesh is one-dimensional".into())),
        }
    }

    pub fn time_controls(&self) -> TimeControls {
        TimeControls {
            cfl: self.time.cfl,
            t_final: self.time.t_final,
            max_steps: self.time.max_steps.unwrap_or(usize::MAX),
            audit_every: self.time.audit_every,
        }
    }

    pub fn hyperbolic_config(&self) -> HyperbolicConfig {
        HyperbolicConfig {
            high_order: self.limiter.high_order,
            relaxation: self.limiter.relaxation,
            ..HyperbolicConfig::default()
        }
    }

    pub fn parabolic_config(&self) -> ParabolicConfig {
        ParabolicConfig {
            cg: CgOptions {
                tol: self.limiter.cg_tol,
                ..CgOptions::default()
            },
            bound: match self.limiter.energy_bound {
                EnergyBoundConfig::Global => EnergyBound::Global,
                EnergyBoundConfig::Local => EnergyBound::Local,
            },
            high_order: self.limiter.high_order,
        }
    }

    /// Output directory, with `IDPNS_OUTPUT_DIR` taking precedence.
    pub fn output_dir(&self) -> PathBuf {
        match std::env::var_os(OUTPUT_DIR_ENV) {
            Some(d) if !d.is_empty() => PathBuf::from(d),
            _ => self.output.dir.clone(),
        }
    }

    fn becker(&self) -> Option<BeckerParams> {
        match self.initial {
            InitialConfig::Becker { mach, v_inf } => Some(
                shock_params(self.gas.gamma, mach, 1.0, 1.0)
                    .ok()?
                    .with_viscosity(self.gas.mu)
                    .with_translation(v_inf),
            ),
            _ => None,
        }
    }

    /// Tag the boundary, sample the initial data and attach exact data where
    /// it is known.
    pub fn problem<const D: usize>(&self, mut mesh: MeshTopology<D>) -> Result<Problem<D>> {
        let gas = self.gas.model()?;
        for ((name, tag), side) in
            self.bc
                .sides()
                .into_iter()
                .zip([Side::Left, Side::Right, Side::Bottom, Side::Top])
        {
            let Some(tag) = tag else { continue };
            if D == 1 && matches!(side, Side::Bottom | Side::Top) {
                return Err(Error::Config(format!("bc.{name} has no meaning in 1D")));
            }
            let kind = BoundaryKind::parse(tag).ok_or_else(|| {
                Error::Config(format!("bc.{name}: unknown boundary kind `{tag}`"))
            })?;
            mesh.assign_side(side, kind);
        }
        let opts = AssemblyOptions {
            strict_acute: self.limiter.strict_acute,
        };

        let exact: Option<ExactFn<D>> = self.becker().map(|p| {
            let f: ExactFn<D> = Arc::new(move |x: &[f64; D], t| embed(p.state(x[0], t)));
            f
        });
        let init: InitFn<D> = match &self.initial {
            InitialConfig::Becker { .. } => {
                let f = exact.clone().expect("validated shock parameters");
                Box::new(move |x| f(x, 0.0))
            }
            InitialConfig::Sod2d => Box::new(move |x| {
                let rho = if x[0] < 0.5 { 120.0 } else { 1.2 };
                ConservedState::from_pressure(rho, [0.0; D], rho / gas.gamma, &gas)
            }),
            InitialConfig::Constant(c) => {
                let u = primitive::<D>(c, &gas, "initial")?;
                Box::new(move |_| u)
            }
            InitialConfig::Riemann { x0, left, right } => {
                let (l, r, x0) = (
                    primitive::<D>(left, &gas, "initial.left")?,
                    primitive::<D>(right, &gas, "initial.right")?,
                    *x0,
                );
                Box::new(move |x| if x[0] < x0 { l } else { r })
            }
        };
        let mut p = Problem::from_closures(mesh, gas, init, exact.clone(), opts)?;
        p.exact = exact;
        Ok(p)
    }
}

impl BcConfig {
    fn sides(&self) -> [(&'static str, Option<&str>); 4] {
        [
            ("left", self.left.as_deref()),
            ("right", self.right.as_deref()),
            ("bottom", self.bottom.as_deref()),
            ("top", self.top.as_deref()),
        ]
    }
}

/// Lift a one-dimensional state to `D` dimensions with zero transverse
/// momentum.
pub fn embed<const D: usize>(u: ConservedState<1>) -> ConservedState<D> {
    let mut mom = [0.0; D];
    mom[0] = u.mom[0];
    ConservedState::new(u.rho, mom, u.ener)
}

fn primitive<const D: usize>(
    c: &PrimitiveConfig,
    gas: &GasModel,
    section: &str,
) -> Result<ConservedState<D>> {
    let mut v = [0.0; D];
    match c.velocity.len() {
        0 => {}
        n if n == D => v.copy_from_slice(&c.velocity),
        n => {
            return Err(Error::Config(format!(
                "{section}.velocity has {n} components, mesh is {D}D"
            )))
        }
    }
    let u = ConservedState::from_pressure(c.rho, v, c.pressure, gas);
    u.thermodynamics(gas)
        .map_err(|e| Error::Config(format!("{section}: {e}")))?;
    Ok(u)
}
