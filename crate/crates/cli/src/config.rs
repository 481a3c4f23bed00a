//! Run configuration: JSON schema, validation and construction of the
//! library objects.
//!
//! Component indices in constraint records (`cylinder.indices`, `slab.axis`)
//! are 1-based, as written by users; they are converted to 0-based here.

use conrelax::convex::{ConvexSet, Shape};
use conrelax::grid::{Field, Grid, Region};
use conrelax::linalg::Matrix;
use conrelax::solver::{Relaxation, Scheme, SolverConfig};
use conrelax::system::{FriedrichsSystem, Model, ModelSpec};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constraint: Option<ShapeConfig>,
    pub grid: GridConfig,
    pub solver: SolverSection,
    pub initial: InitialConfig,
    #[serde(default)]
    pub verify: Vec<CheckConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<String>,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", deny_unknown_fields)]
pub enum ModelConfig {
    #[serde(rename = "advection")]
    Advection { speeds: Vec<f64> },
    #[serde(rename = "wave_1d")]
    Wave1D { shear_modulus: f64 },
    #[serde(rename = "elastoplastic_1d")]
    ElastoPlastic1D { shear_modulus: f64, yield_stress: f64 },
    /// One symmetric matrix per space direction.
    #[serde(rename = "custom")]
    Custom { matrices: Vec<Vec<Vec<f64>>> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ShapeConfig {
    Ball { center: Vec<f64>, radius: f64 },
    Box { lo: Vec<f64>, hi: Vec<f64> },
    /// `⟨normal, x⟩ ≤ offset`; the normal need not be unit length.
    HalfSpace { normal: Vec<f64>, offset: f64 },
    Slab {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        axis: Option<usize>,
        lo: f64,
        hi: f64,
    },
    Cylinder { indices: Vec<usize>, inner: Box<ShapeConfig> },
    Intersection { members: Vec<ShapeConfig> },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(rename = "X")]
    pub extent: f64,
    #[serde(rename = "N")]
    pub cells: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeName {
    Upwind,
    Rusanov,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RelaxationName {
    Exact,
    ImplicitEuler,
}

fn default_cfl() -> f64 {
    0.9
}

fn default_scheme() -> SchemeName {
    SchemeName::Upwind
}

fn default_relaxation() -> RelaxationName {
    RelaxationName::Exact
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    pub epsilon: f64,
    #[serde(default)]
    pub eta: f64,
    pub final_time: f64,
    #[serde(default = "default_cfl")]
    pub cfl: f64,
    #[serde(default = "default_scheme")]
    pub scheme: SchemeName,
    #[serde(default = "default_relaxation")]
    pub relaxation: RelaxationName,
    /// Number of equal intervals between written snapshots.
    #[serde(default = "one")]
    pub snapshots: usize,
    #[serde(default = "one")]
    pub record_every: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialConfig {
    /// `amplitude[k]·b(|x − center|/width)` with the `C^∞` bump `b`.
    Bump {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        center: Option<Vec<f64>>,
        width: f64,
        amplitude: Vec<f64>,
    },
    /// `left` on `interface − half_width < x₁ < interface`, `right` on
    /// `interface ≤ x₁ < interface + half_width`, zero elsewhere; other
    /// coordinates are confined to `|x_j| < half_width`.
    Riemann {
        left: Vec<f64>,
        right: Vec<f64>,
        #[serde(default)]
        interface: f64,
        half_width: f64,
    },
    /// `state` on `|x| < radius` (whole grid when omitted), zero elsewhere.
    Constant {
        state: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        radius: Option<f64>,
    },
}

fn default_bumps() -> usize {
    5
}

fn default_residual_constant() -> f64 {
    conrelax::verify::DEFAULT_RESIDUAL_CONSTANT
}

fn default_offsets() -> Vec<isize> {
    vec![1]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "check", rename_all = "snake_case", deny_unknown_fields)]
pub enum CheckConfig {
    Energy,
    /// `radius` is the support radius of the initial data.
    FiniteSpeed { radius: f64 },
    /// Runs every listed `ε` (the solver's own when omitted).
    Entropy {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        epsilons: Option<Vec<f64>>,
        #[serde(default = "default_bumps")]
        bumps: usize,
        #[serde(default = "default_residual_constant")]
        residual_constant: f64,
    },
    /// Initial data against its lattice shift by `offsets` cells.
    Contraction {
        radii: Vec<f64>,
        #[serde(default = "default_offsets")]
        offsets: Vec<isize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        final_time: Option<f64>,
    },
    Translation {
        radius: f64,
        #[serde(default = "default_offsets")]
        offsets: Vec<isize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        final_time: Option<f64>,
    },
    EpsilonStudy { epsilons: Vec<f64>, omega_radius: f64 },
    EtaStudy { etas: Vec<f64>, omega_radius: f64 },
    L2Data { widths: Vec<f64> },
}

impl CheckConfig {
    pub fn name(&self) -> &'static str {
        match self {
            CheckConfig::Energy => "energy",
            CheckConfig::FiniteSpeed { .. } => "finite_speed",
            CheckConfig::Entropy { .. } => "entropy",
            CheckConfig::Contraction { .. } => "contraction",
            CheckConfig::Translation { .. } => "translation",
            CheckConfig::EpsilonStudy { .. } => "epsilon_study",
            CheckConfig::EtaStudy { .. } => "eta_study",
            CheckConfig::L2Data { .. } => "l2_data",
        }
    }

    /// Multi-run sweeps, executed only by the `study` command.
    pub fn is_study(&self) -> bool {
        matches!(
            self,
            CheckConfig::EpsilonStudy { .. } | CheckConfig::EtaStudy { .. } | CheckConfig::L2Data { .. }
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationError {
    pub path: String,
    pub message: String,
}

impl std::fmt::Display for ValidationError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("{} validation error(s):\n{}", .0.len(), join_errors(.0))]
    Invalid(Vec<ValidationError>),
}

fn join_errors(errors: &[ValidationError]) -> String {
    errors.iter().map(|e| format!("  {e}")).collect::<Vec<_>>().join("\n")
}

/// Parses and validates, reporting every validation error at once.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let cfg: RunConfig = serde_json::from_str(text).map_err(|e| ConfigError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let errors = validate(&cfg);
    if errors.is_empty() {
        Ok(cfg)
    } else {
        Err(ConfigError::Invalid(errors))
    }
}

struct Errors(Vec<ValidationError>);

impl Errors {
    fn push(&mut self, path: impl Into<String>, message: impl Into<String>) {
        self.0.push(ValidationError {
            path: path.into(),
            message: message.into(),
        });
    }

    fn positive(&mut self, path: impl Into<String>, x: f64) {
        if !(x > 0.0 && x.is_finite()) {
            self.push(path, format!("must be positive and finite, got {x}"));
        }
    }

    fn finite(&mut self, path: impl Into<String>, xs: &[f64]) {
        if xs.iter().any(|x| !x.is_finite()) {
            self.push(path, "entries must be finite");
        }
    }

    fn length(&mut self, path: impl Into<String>, got: usize, want: usize) {
        if got != want {
            self.push(path, format!("has length {got}, expected {want}"));
        }
    }

    fn descending(&mut self, path: &str, xs: &[f64]) {
        if xs.len() < 2 {
            self.push(path, "needs at least two values");
        }
        if xs.iter().any(|x| !(*x > 0.0 && x.is_finite())) {
            self.push(path, "values must be positive and finite");
        }
        if xs.windows(2).any(|w| !(w[1] < w[0])) {
            self.push(path, "values must be strictly decreasing");
        }
    }
}

impl ModelConfig {
    /// `(space dimension, state size)` when the record is well formed.
    fn shape(&self) -> Option<(usize, usize)> {
        match self {
            ModelConfig::Advection { speeds } => Some((speeds.len(), 1)),
            ModelConfig::Wave1D { .. } | ModelConfig::ElastoPlastic1D { .. } => Some((1, 2)),
            ModelConfig::Custom { matrices } => matrices.first().map(|m| (matrices.len(), m.len())),
        }
    }

    fn supplies_constraint(&self) -> bool {
        matches!(self, ModelConfig::ElastoPlastic1D { .. })
    }
}

fn validate_model(model: &ModelConfig, e: &mut Errors) {
    match model {
        ModelConfig::Advection { speeds } => {
            if !(1..=2).contains(&speeds.len()) {
                e.push("model.speeds", "needs one or two speeds");
            }
            e.finite("model.speeds", speeds);
        }
        ModelConfig::Wave1D { shear_modulus } => e.positive("model.shear_modulus", *shear_modulus),
        ModelConfig::ElastoPlastic1D {
            shear_modulus,
            yield_stress,
        } => {
            e.positive("model.shear_modulus", *shear_modulus);
            e.positive("model.yield_stress", *yield_stress);
        }
        ModelConfig::Custom { matrices } => {
            if !(1..=2).contains(&matrices.len()) {
                e.push("model.matrices", "needs one matrix per space direction (one or two)");
            }
            let m = matrices.first().map_or(0, Vec::len);
            if m == 0 {
                e.push("model.matrices", "matrices must be nonempty");
            }
            for (j, b) in matrices.iter().enumerate() {
                let path = format!("model.matrices[{j}]");
                if b.len() != m || b.iter().any(|row| row.len() != m) {
                    e.push(&path, format!("must be {m}×{m}"));
                    continue;
                }
                for row in b {
                    e.finite(&path, row);
                }
                let asym = (0..m)
                    .flat_map(|r| (0..m).map(move |c| (r, c)))
                    .map(|(r, c)| (b[r][c] - b[c][r]).abs())
                    .fold(0.0, f64::max);
                let scale = b.iter().flatten().fold(1.0f64, |a, x| a.max(x.abs()));
                if asym > 1e-12 * scale {
                    e.push(&path, format!("must be symmetric (asymmetry {asym:e})"));
                }
            }
        }
    }
}

fn validate_shape(shape: &ShapeConfig, dim: usize, path: &str, e: &mut Errors) {
    match shape {
        ShapeConfig::Ball { center, radius } => {
            e.length(format!("{path}.center"), center.len(), dim);
            e.finite(format!("{path}.center"), center);
            if !(*radius >= 0.0 && radius.is_finite()) {
                e.push(format!("{path}.radius"), "must be nonnegative and finite");
            }
        }
        ShapeConfig::Box { lo, hi } => {
            e.length(format!("{path}.lo"), lo.len(), dim);
            e.length(format!("{path}.hi"), hi.len(), dim);
            if lo.iter().zip(hi).any(|(l, h)| !(l <= h)) {
                e.push(path, "requires lo <= hi componentwise");
            }
        }
        ShapeConfig::HalfSpace { normal, offset } => {
            e.length(format!("{path}.normal"), normal.len(), dim);
            e.finite(format!("{path}.normal"), normal);
            if normal.iter().all(|x| *x == 0.0) {
                e.push(format!("{path}.normal"), "must be nonzero");
            }
            if !offset.is_finite() {
                e.push(format!("{path}.offset"), "must be finite");
            }
        }
        ShapeConfig::Slab { axis, lo, hi } => {
            if let Some(a) = axis {
                if *a == 0 || *a > dim {
                    e.push(format!("{path}.axis"), format!("must lie in 1..={dim} (1-based)"));
                }
            }
            if !(lo <= hi) {
                e.push(path, "requires lo <= hi");
            }
        }
        ShapeConfig::Cylinder { indices, inner } => {
            if indices.is_empty() || indices.windows(2).any(|w| w[0] >= w[1]) {
                e.push(format!("{path}.indices"), "must be nonempty, distinct and increasing");
            }
            if indices.iter().any(|&i| i == 0 || i > dim) {
                e.push(format!("{path}.indices"), format!("entries must lie in 1..={dim} (1-based)"));
            }
            validate_shape(inner, indices.len(), &format!("{path}.inner"), e);
        }
        ShapeConfig::Intersection { members } => {
            if members.is_empty() {
                e.push(format!("{path}.members"), "needs at least one member");
            }
            for (i, m) in members.iter().enumerate() {
                validate_shape(m, dim, &format!("{path}.members[{i}]"), e);
            }
        }
    }
}

fn validate_initial(initial: &InitialConfig, n: usize, m: usize, e: &mut Errors) {
    match initial {
        InitialConfig::Bump {
            center,
            width,
            amplitude,
        } => {
            if let Some(c) = center {
                e.length("initial.center", c.len(), n);
                e.finite("initial.center", c);
            }
            e.positive("initial.width", *width);
            e.length("initial.amplitude", amplitude.len(), m);
            e.finite("initial.amplitude", amplitude);
        }
        InitialConfig::Riemann {
            left,
            right,
            interface,
            half_width,
        } => {
            e.length("initial.left", left.len(), m);
            e.length("initial.right", right.len(), m);
            e.finite("initial.left", left);
            e.finite("initial.right", right);
            if !interface.is_finite() {
                e.push("initial.interface", "must be finite");
            }
            e.positive("initial.half_width", *half_width);
        }
        InitialConfig::Constant { state, radius } => {
            e.length("initial.state", state.len(), m);
            e.finite("initial.state", state);
            if let Some(r) = radius {
                e.positive("initial.radius", *r);
            }
        }
    }
}

fn validate_check(check: &CheckConfig, i: usize, h: Option<f64>, e: &mut Errors) {
    let path = format!("verify[{i}]");
    match check {
        CheckConfig::Energy => {}
        CheckConfig::FiniteSpeed { radius } => e.positive(format!("{path}.radius"), *radius),
        CheckConfig::Entropy {
            epsilons,
            residual_constant,
            ..
        } => {
            if let Some(eps) = epsilons {
                if eps.is_empty() || eps.iter().any(|x| !(*x > 0.0 && x.is_finite())) {
                    e.push(format!("{path}.epsilons"), "must be nonempty and positive");
                }
            }
            e.positive(format!("{path}.residual_constant"), *residual_constant);
        }
        CheckConfig::Contraction {
            radii, final_time, ..
        } => {
            if radii.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
                e.push(format!("{path}.radii"), "must be positive");
            }
            if let Some(t) = final_time {
                e.positive(format!("{path}.final_time"), *t);
            }
        }
        CheckConfig::Translation {
            radius, final_time, ..
        } => {
            e.positive(format!("{path}.radius"), *radius);
            if let Some(t) = final_time {
                e.positive(format!("{path}.final_time"), *t);
            }
        }
        CheckConfig::EpsilonStudy {
            epsilons,
            omega_radius,
        } => {
            e.descending(&format!("{path}.epsilons"), epsilons);
            e.positive(format!("{path}.omega_radius"), *omega_radius);
        }
        CheckConfig::EtaStudy { etas, omega_radius } => {
            e.descending(&format!("{path}.etas"), etas);
            if let Some(h) = h {
                for (k, eta) in etas.iter().enumerate() {
                    if *eta < h {
                        e.push(format!("{path}.etas[{k}]"), format!("must be at least the cell width {h}"));
                    }
                }
            }
            e.positive(format!("{path}.omega_radius"), *omega_radius);
        }
        CheckConfig::L2Data { widths } => {
            if widths.is_empty() || widths.windows(2).any(|w| w[1] > w[0]) {
                e.push(format!("{path}.widths"), "must be nonempty and nonincreasing");
            }
            if let Some(h) = h {
                for (k, w) in widths.iter().enumerate() {
                    if *w < h {
                        e.push(format!("{path}.widths[{k}]"), format!("must be at least the cell width {h}"));
                    }
                }
            }
        }
    }
}

/// Every semantic problem in the config.
pub fn validate(cfg: &RunConfig) -> Vec<ValidationError> {
    let mut e = Errors(Vec::new());
    validate_model(&cfg.model, &mut e);
    let shape = cfg.model.shape();

    let g = cfg.grid;
    e.positive("grid.X", g.extent);
    if g.cells < 4 || !g.cells.is_multiple_of(2) {
        e.push("grid.N", format!("must be even and at least 4, got {}", g.cells));
    }
    let h = (g.extent > 0.0 && g.cells >= 4).then(|| 2.0 * g.extent / g.cells as f64);

    if let Some((_, m)) = shape {
        if let Some(c) = &cfg.constraint {
            if cfg.model.supplies_constraint() {
                e.push("constraint", "the model already prescribes its constraint");
            } else {
                validate_shape(c, m, "constraint", &mut e);
            }
        }
        validate_initial(&cfg.initial, shape.map_or(1, |s| s.0), m, &mut e);
    }

    let s = &cfg.solver;
    e.positive("solver.epsilon", s.epsilon);
    if !(s.eta >= 0.0 && s.eta.is_finite()) {
        e.push("solver.eta", "must be nonnegative and finite");
    }
    if let Some(h) = h {
        if s.eta > 0.0 && s.eta < h {
            e.push("solver.eta", format!("must be 0 or at least the cell width {h}"));
        }
    }
    e.positive("solver.final_time", s.final_time);
    if !(s.cfl > 0.0 && s.cfl <= 1.0) {
        e.push("solver.cfl", "must lie in (0, 1]");
    }
    if s.snapshots == 0 {
        e.push("solver.snapshots", "must be at least 1");
    }
    if s.record_every == 0 {
        e.push("solver.record_every", "must be at least 1");
    }

    for (i, check) in cfg.verify.iter().enumerate() {
        validate_check(check, i, h, &mut e);
    }

    if e.0.is_empty() {
        match build_constraint(cfg) {
            Ok(k) => {
                let origin = vec![0.0; k.dim()];
                if !k.contains(&origin, 0.0).unwrap_or(false) {
                    e.push("constraint", "must contain the zero state (the far-field value)");
                }
            }
            Err(msg) => e.push("constraint", msg),
        }
    }
    e.0
}

fn to_shape(c: &ShapeConfig) -> Shape<f64> {
    match c {
        ShapeConfig::Ball { center, radius } => Shape::ball(center.clone(), *radius),
        ShapeConfig::Box { lo, hi } => Shape::cube(lo.clone(), hi.clone()),
        ShapeConfig::HalfSpace { normal, offset } => {
            let len = normal.iter().map(|x| x * x).sum::<f64>().sqrt();
            Shape::half_space(normal.iter().map(|x| x / len).collect(), offset / len)
        }
        ShapeConfig::Slab { axis, lo, hi } => Shape::slab(axis.map_or(0, |a| a - 1), *lo, *hi),
        ShapeConfig::Cylinder { indices, inner } => {
            Shape::cylinder(indices.iter().map(|i| i - 1).collect(), to_shape(inner))
        }
        ShapeConfig::Intersection { members } => Shape::intersection(members.iter().map(to_shape).collect()),
    }
}

/// The whole state space, as an unbounded slab.
fn unconstrained(m: usize) -> ConvexSet<f64> {
    ConvexSet::new(Shape::slab(0, f64::NEG_INFINITY, f64::INFINITY), m).expect("whole space")
}

fn build_constraint(cfg: &RunConfig) -> Result<ConvexSet<f64>, String> {
    let model = build_model(cfg)?;
    match (&model.constraint, &cfg.constraint) {
        (Some(k), _) => Ok(k.clone()),
        (None, Some(c)) => {
            let m = model.system.state_size();
            ConvexSet::allow_empty_interior(to_shape(c), vec![0.0; m]).map_err(|e| e.to_string())
        }
        (None, None) => Ok(unconstrained(model.system.state_size())),
    }
}

fn build_model(cfg: &RunConfig) -> Result<Model<f64>, String> {
    let spec = match &cfg.model {
        ModelConfig::Advection { speeds } => ModelSpec::Advection { speeds: speeds.clone() },
        ModelConfig::Wave1D { shear_modulus } => ModelSpec::Wave1D {
            shear_modulus: *shear_modulus,
        },
        ModelConfig::ElastoPlastic1D {
            shear_modulus,
            yield_stress,
        } => ModelSpec::ElastoPlastic1D {
            shear_modulus: *shear_modulus,
            yield_stress: *yield_stress,
        },
        ModelConfig::Custom { matrices } => ModelSpec::Custom {
            matrices: matrices
                .iter()
                .map(|b| Matrix::from_rows(b).ok_or_else(|| "matrices must be square".to_string()))
                .collect::<Result<Vec<_>, _>>()?,
            constraint: None,
        },
    };
    spec.build().map_err(|e| e.to_string())
}

/// Library objects for a validated config.
#[derive(Debug, Clone)]
pub struct Problem {
    pub system: FriedrichsSystem<f64>,
    pub constraint: ConvexSet<f64>,
    pub initial: Field<f64>,
    pub solver: SolverConfig<f64>,
}

impl Problem {
    pub fn grid(&self) -> &Grid<f64> {
        self.initial.grid()
    }
}

pub fn build(cfg: &RunConfig) -> Result<Problem, String> {
    let model = build_model(cfg)?;
    let constraint = build_constraint(cfg)?;
    let n = model.system.dim();
    let m = model.system.state_size();
    let grid = Grid::new(n, cfg.grid.extent, cfg.grid.cells).map_err(|e| e.to_string())?;
    let initial = initial_field(&cfg.initial, grid, m).map_err(|e| e.to_string())?;
    let s = &cfg.solver;
    let mut solver = SolverConfig::new(s.epsilon, s.final_time)
        .with_eta(s.eta)
        .with_cfl(s.cfl)
        .with_scheme(match s.scheme {
            SchemeName::Upwind => Scheme::Upwind,
            SchemeName::Rusanov => Scheme::Rusanov,
        })
        .with_uniform_snapshots(s.snapshots);
    solver.relaxation = match s.relaxation {
        RelaxationName::Exact => Relaxation::Exact,
        RelaxationName::ImplicitEuler => Relaxation::ImplicitEuler,
    };
    solver.record_every = s.record_every;
    Ok(Problem {
        system: model.system,
        constraint,
        initial,
        solver,
    })
}

fn smooth_bump(s: f64) -> f64 {
    if s >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - s * s)).exp()
    }
}

fn initial_field(init: &InitialConfig, grid: Grid<f64>, m: usize) -> Result<Field<f64>, conrelax::grid::GridError> {
    let n = grid.dim();
    match init {
        InitialConfig::Bump {
            center,
            width,
            amplitude,
        } => {
            let c = center.clone().unwrap_or_else(|| vec![0.0; n]);
            Field::from_fn(grid, m, |x| {
                let r = x.iter().zip(&c).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
                let b = smooth_bump(r / width);
                amplitude.iter().map(|a| a * b).collect()
            })
        }
        InitialConfig::Riemann {
            left,
            right,
            interface,
            half_width,
        } => Field::from_fn(grid, m, |x| {
            let inside = x[1..].iter().all(|y| y.abs() < *half_width);
            if inside && x[0] > interface - half_width && x[0] < *interface {
                left.clone()
            } else if inside && x[0] >= *interface && x[0] < interface + half_width {
                right.clone()
            } else {
                vec![0.0; m]
            }
        }),
        InitialConfig::Constant { state, radius } => Field::from_fn(grid, m, |x| {
            let r = x.iter().map(|a| a * a).sum::<f64>().sqrt();
            if radius.is_none_or(|rad| r < rad) {
                state.clone()
            } else {
                vec![0.0; m]
            }
        }),
    }
}

/// Region `B(0, r)`.
pub fn ball(radius: f64) -> Region<f64> {
    Region::Ball { radius }
}
