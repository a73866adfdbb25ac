use clap::ValueEnum;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Orbit,
    LimitSet,
    FundamentalDomain,
    ThetaEval,
    AutomorphyCheck,
    KernelMass,
    Norms,
    Pairing,
    Gram,
    Dimension,
    BoundaryDimension,
    FlatSolve,
    SchwarzianCheck,
    PinchSweep,
    AsymptoticSweep,
}

impl Command {
    pub fn name(self) -> &'static str {
        use Command::*;
        match self {
            Orbit => "orbit",
            LimitSet => "limit-set",
            FundamentalDomain => "fundamental-domain",
            ThetaEval => "theta-eval",
            AutomorphyCheck => "automorphy-check",
            KernelMass => "kernel-mass",
            Norms => "norms",
            Pairing => "pairing",
            Gram => "gram",
            Dimension => "dimension",
            BoundaryDimension => "boundary-dimension",
            FlatSolve => "flat-solve",
            SchwarzianCheck => "schwarzian-check",
            PinchSweep => "pinch-sweep",
            AsymptoticSweep => "asymptotic-sweep",
        }
    }
}

pub type Complex = [f64; 2];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum GroupSpec {
    Trivial,
    PuncturedTorus { x: f64, y: f64 },
    Pinch { u: f64 },
    GenusTwoOctagon,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum EnumerationSpec {
    WordLength { length: usize },
    Ball { radius: f64, slack: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QuadratureMode {
    Grid,
    MonteCarlo,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadratureSpec {
    pub mode: QuadratureMode,
    pub radial: usize,
    pub angular: usize,
    /// Disc grids cover |z| ≤ tanh(t_max).
    pub t_max: f64,
    /// Fundamental-domain grids drop points with 1 − |z|² below this.
    pub cusp_cutoff: f64,
    /// Sample count in Monte-Carlo mode.
    pub samples: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec { mode: QuadratureMode::Grid, radial: 96, angular: 64, t_max: 6.0, cusp_cutoff: 1e-5, samples: 200_000 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceSpec {
    pub genus: u32,
    pub punctures: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum MoveSpec {
    Nonseparating { part: usize },
    Separating { part: usize, left: SurfaceSpec, right: SurfaceSpec },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PeriodSpec {
    /// Rows of the symmetric period matrix.
    pub tau: Vec<Vec<Complex>>,
    pub sigma: Vec<Complex>,
    pub sigma_prime: Vec<Complex>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum MapSpec {
    Koebe,
    Moebius { a: Complex, b: Complex, c: Complex, d: Complex },
    Polynomial { coefficients: Vec<Complex> },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RadialGridSpec {
    pub radial: usize,
    pub r_max: f64,
    pub angles: usize,
}

impl Default for RadialGridSpec {
    fn default() -> Self {
        RadialGridSpec { radial: 50, r_max: 0.99, angles: 8 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Spacing {
    Linear,
    Geometric,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PathSpec {
    pub u_min: f64,
    pub u_max: f64,
    pub samples: usize,
    pub spacing: Spacing,
}

impl Default for PathSpec {
    fn default() -> Self {
        PathSpec { u_min: 1e-3, u_max: 1.0, samples: 25, spacing: Spacing::Geometric }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GramSpec {
    pub ball_radius: f64,
    pub slack: f64,
    pub rank_tol: f64,
}

impl Default for GramSpec {
    fn default() -> Self {
        GramSpec { ball_radius: 7.5, slack: 4.0, rank_tol: 1e-8 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EmbeddingSpec {
    pub ball_radius: f64,
    pub tester_radius: f64,
    pub radial: usize,
    pub angular: usize,
    pub max_lambda: f64,
}

impl Default for EmbeddingSpec {
    fn default() -> Self {
        EmbeddingSpec { ball_radius: 5.0, tester_radius: 4.5, radial: 32, angular: 32, max_lambda: 2.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSpec {
    pub dir: String,
    pub svg: bool,
}

impl Default for OutputSpec {
    fn default() -> Self {
        OutputSpec { dir: "out".into(), svg: true }
    }
}

/// One batch run. Every field has an explicit default, echoed in the report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub command: Option<Command>,
    pub group: GroupSpec,
    pub s: f64,
    pub enumeration: EnumerationSpec,
    pub quadrature: QuadratureSpec,
    /// Polynomial seeds as coefficient lists, constant term first.
    pub seeds: Vec<Vec<Complex>>,
    pub points: Vec<Complex>,
    /// Group words for automorphy checks; uppercase letters are generators.
    pub words: Vec<String>,
    pub surface: SurfaceSpec,
    pub plan: Vec<MoveSpec>,
    pub period: Option<PeriodSpec>,
    pub map: MapSpec,
    pub grid: RadialGridSpec,
    pub path: PathSpec,
    pub gram: GramSpec,
    pub embedding: EmbeddingSpec,
    pub output: OutputSpec,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            command: None,
            group: GroupSpec::PuncturedTorus { x: 3.0, y: 3.0 },
            s: 2.0,
            enumeration: EnumerationSpec::WordLength { length: 8 },
            quadrature: QuadratureSpec::default(),
            seeds: vec![vec![[1.0, 0.0]]],
            points: vec![[0.0, 0.0]],
            words: vec!["A".into(), "B".into(), "a".into(), "b".into()],
            surface: SurfaceSpec { genus: 1, punctures: 1 },
            plan: Vec::new(),
            period: None,
            map: MapSpec::Koebe,
            grid: RadialGridSpec::default(),
            path: PathSpec::default(),
            gram: GramSpec::default(),
            embedding: EmbeddingSpec::default(),
            output: OutputSpec::default(),
        }
    }
}

fn finite(name: &str, v: f64) -> Result<(), String> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(format!("{name} must be finite"))
    }
}

fn positive(name: &str, v: f64) -> Result<(), String> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(format!("{name} must be positive, got {v}"))
    }
}

fn in_disc(name: &str, z: Complex) -> Result<(), String> {
    if z[0].is_finite() && z[1].is_finite() && z[0] * z[0] + z[1] * z[1] < 1.0 {
        Ok(())
    } else {
        Err(format!("{name} {z:?} is not in the open unit disc"))
    }
}

impl RunConfig {
    /// Checks beyond the shape enforced by deserialization.
    pub fn validate(&self, cmd: Command) -> Result<(), String> {
        use Command::*;
        if let Some(c) = self.command {
            if c != cmd {
                return Err(format!("config is for {} but {} was requested", c.name(), cmd.name()));
            }
        }
        positive("s", self.s)?;
        match self.group {
            GroupSpec::PuncturedTorus { x, y } => {
                if !(x > 2.0 && y > 2.0 && x.is_finite() && y.is_finite()) {
                    return Err(format!("punctured torus traces must exceed 2, got ({x}, {y})"));
                }
            }
            GroupSpec::Pinch { u } => {
                if !(u > 0.0 && u <= 1.0) {
                    return Err(format!("pinch parameter u = {u} not in (0, 1]"));
                }
            }
            GroupSpec::Trivial | GroupSpec::GenusTwoOctagon => {}
        }
        match self.enumeration {
            EnumerationSpec::WordLength { length } if length > 14 => {
                return Err(format!("word length {length} exceeds 14"));
            }
            EnumerationSpec::Ball { radius, slack } => {
                positive("enumeration.radius", radius)?;
                if !(slack >= 1.0) {
                    return Err(format!("enumeration.slack must be at least 1, got {slack}"));
                }
            }
            _ => {}
        }
        let q = &self.quadrature;
        if q.radial == 0 || q.angular == 0 || q.samples == 0 {
            return Err("quadrature sizes must be positive".into());
        }
        positive("quadrature.t_max", q.t_max)?;
        if !(q.cusp_cutoff > 0.0 && q.cusp_cutoff < 1.0) {
            return Err(format!("quadrature.cusp_cutoff {} not in (0, 1)", q.cusp_cutoff));
        }
        if q.mode == QuadratureMode::MonteCarlo && cmd != KernelMass {
            return Err("Monte-Carlo quadrature is only available for kernel-mass".into());
        }
        for (k, h) in self.seeds.iter().enumerate() {
            if h.is_empty() {
                return Err(format!("seed {k} is empty"));
            }
            for c in h {
                finite("seed coefficient", c[0])?;
                finite("seed coefficient", c[1])?;
            }
        }
        for (k, &z) in self.points.iter().enumerate() {
            in_disc(&format!("point {k}"), z)?;
        }
        let needs_forms = matches!(cmd, ThetaEval | AutomorphyCheck | Norms | Pairing | Gram | AsymptoticSweep);
        if needs_forms && !(self.s >= 2.0) {
            return Err(format!("{} needs s ≥ 2, got {}", cmd.name(), self.s));
        }
        if needs_forms && self.seeds.is_empty() {
            return Err(format!("{} needs at least one seed", cmd.name()));
        }
        if matches!(cmd, ThetaEval | AutomorphyCheck | Orbit | KernelMass) && self.points.is_empty() {
            return Err(format!("{} needs at least one point", cmd.name()));
        }
        if matches!(cmd, KernelMass | Dimension) && !(self.s > 1.0) {
            return Err(format!("{} needs s > 1, got {}", cmd.name(), self.s));
        }
        if cmd == BoundaryDimension && (self.s.fract() != 0.0 || self.s < 2.0) {
            return Err(format!("boundary-dimension needs an integer s ≥ 2, got {}", self.s));
        }
        if cmd == AsymptoticSweep && self.seeds.len() < 2 {
            return Err("asymptotic-sweep needs two seeds".into());
        }
        if cmd == FlatSolve {
            let p = self.period.as_ref().ok_or("flat-solve needs period data")?;
            let g = p.tau.len();
            if g == 0 || p.tau.iter().any(|r| r.len() != g) || p.sigma.len() != g || p.sigma_prime.len() != g {
                return Err("period data must be a square g×g matrix with g exponents of each kind".into());
            }
        }
        if let MapSpec::Polynomial { coefficients } = &self.map {
            if coefficients.len() < 2 {
                return Err("polynomial map needs degree at least 1".into());
            }
        }
        let gr = &self.grid;
        if gr.radial < 2 || gr.angles == 0 || !(gr.r_max > 0.0 && gr.r_max < 1.0) {
            return Err("grid needs radial ≥ 2, angles ≥ 1 and 0 < r_max < 1".into());
        }
        let p = &self.path;
        if matches!(cmd, PinchSweep | AsymptoticSweep) {
            if !(p.u_min > 0.0 && p.u_min < p.u_max && p.u_max <= 1.0) {
                return Err(format!("path range [{}, {}] must satisfy 0 < u_min < u_max ≤ 1", p.u_min, p.u_max));
            }
            if p.samples < 2 {
                return Err("path.samples must be at least 2".into());
            }
        }
        positive("gram.ball_radius", self.gram.ball_radius)?;
        if !(self.gram.slack >= 1.0) {
            return Err("gram.slack must be at least 1".into());
        }
        positive("gram.rank_tol", self.gram.rank_tol)?;
        let e = &self.embedding;
        positive("embedding.ball_radius", e.ball_radius)?;
        positive("embedding.tester_radius", e.tester_radius)?;
        if e.radial == 0 || e.angular == 0 || !(e.max_lambda >= 1.0) {
            return Err("embedding grid sizes must be positive and max_lambda at least 1".into());
        }
        if self.output.dir.is_empty() {
            return Err("output.dir is empty".into());
        }
        Ok(())
    }

    /// Parameters sampled along the path, largest first.
    pub fn path_samples(&self) -> Vec<f64> {
        let p = &self.path;
        let n = p.samples;
        (0..n)
            .map(|k| {
                let t = k as f64 / (n - 1) as f64;
                match p.spacing {
                    Spacing::Linear => p.u_max + (p.u_min - p.u_max) * t,
                    Spacing::Geometric => p.u_max * (p.u_min / p.u_max).powf(t),
                }
            })
            .collect()
    }
}
