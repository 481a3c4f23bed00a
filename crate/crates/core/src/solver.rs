//! Time integration of the relaxed system
//!
//! ```text
//! ∂ₜW − η ΔW + Σⱼ Bⱼ ∂ⱼW = (P_K(W) − W) / ε
//! ```
//!
//! by Strang splitting: half a relaxation step, a transport step, an explicit
//! diffusion step (when `η > 0`), and another half relaxation step.
//!
//! The relaxation substep is solved exactly. Along the segment from `W` to
//! `p = P_K(W)` the projection is constant, so the source is linear there and
//! `W(s) = p + (W − p)·e^{−s/ε}`. In particular the distance to `K` decays by
//! exactly `e^{−dt/ε}` per substep and the time step never depends on `ε`.
//!
//! Every substep is nonexpansive in the discrete L² norm. Transport and
//! diffusion are convex combinations of neighbouring (characteristic) values,
//! and the relaxation map `W ↦ aW + (1−a)P_K(W)` averages the identity with a
//! 1-Lipschitz map fixing the origin.

use std::io::{self, Write};

use crate::convex::{ConvexError, ConvexSet};
use crate::format::g17;
use crate::grid::{Field, Grid, GridError};
use crate::scalar::{pairwise_sum, Scalar};
use crate::system::FriedrichsSystem;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SolverError {
    #[error("invalid solver configuration: {0}")]
    BadConfig(String),
    #[error("Courant number {courant} exceeds 1")]
    CflViolation { courant: f64 },
    #[error("diffusion number {number} exceeds the explicit stability limit {limit}")]
    StabilityViolation { number: f64, limit: f64 },
    #[error(
        "support check failed: data radius {support} + propagation {propagation} + margins {margins} exceeds extent {extent}"
    )]
    SupportPrecheckFailed {
        support: f64,
        propagation: f64,
        margins: f64,
        extent: f64,
    },
    #[error("the origin must belong to the constraint set (zero far-field state)")]
    OriginOutsideConstraint,
    #[error("incompatible inputs: {0}")]
    Mismatch(String),
    #[error(transparent)]
    Convex(#[from] ConvexError),
    #[error(transparent)]
    Grid(#[from] GridError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scheme {
    /// Characteristic first-order upwind, dimensionally split.
    #[default]
    Upwind,
    /// Unsplit local Lax–Friedrichs with dissipation `L` on every face.
    Rusanov,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Relaxation {
    #[default]
    Exact,
    /// `(W + (dt/ε)·P_K(W)) / (1 + dt/ε)`, kept as a cross-check.
    ImplicitEuler,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig<T> {
    pub epsilon: T,
    pub eta: T,
    pub final_time: T,
    pub cfl: T,
    pub scheme: Scheme,
    pub relaxation: Relaxation,
    /// Extra snapshot times in `(0, T)`; `0` and `T` are always recorded.
    pub snapshot_times: Vec<T>,
    pub record_every: usize,
}

impl<T: Scalar> SolverConfig<T> {
    pub fn new(epsilon: T, final_time: T) -> Self {
        Self {
            epsilon,
            eta: T::zero(),
            final_time,
            cfl: T::lit(0.9),
            scheme: Scheme::Upwind,
            relaxation: Relaxation::Exact,
            snapshot_times: Vec::new(),
            record_every: 1,
        }
    }

    pub fn with_eta(mut self, eta: T) -> Self {
        self.eta = eta;
        self
    }

    pub fn with_cfl(mut self, cfl: T) -> Self {
        self.cfl = cfl;
        self
    }

    pub fn with_scheme(mut self, scheme: Scheme) -> Self {
        self.scheme = scheme;
        self
    }

    /// `count` equally spaced snapshots over `(0, T]`.
    pub fn with_uniform_snapshots(mut self, count: usize) -> Self {
        let count = count.max(1);
        self.snapshot_times = (1..count)
            .map(|i| self.final_time * T::from_usize_lossy(i) / T::from_usize_lossy(count))
            .collect();
        self
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        let bad = |m: &str| Err(SolverError::BadConfig(m.to_string()));
        if !(self.epsilon > T::zero()) || !self.epsilon.is_finite() {
            return bad("epsilon must be positive and finite");
        }
        if !(self.eta >= T::zero()) || !self.eta.is_finite() {
            return bad("eta must be nonnegative");
        }
        if !(self.final_time > T::zero()) || !self.final_time.is_finite() {
            return bad("final time must be positive");
        }
        if !(self.cfl > T::zero() && self.cfl <= T::one()) {
            return bad("cfl must lie in (0, 1]");
        }
        if self.record_every == 0 {
            return bad("record_every must be at least 1");
        }
        if self
            .snapshot_times
            .iter()
            .any(|&s| !(s > T::zero() && s <= self.final_time))
        {
            return bad("snapshot times must lie in (0, T]");
        }
        Ok(())
    }

    /// Sorted, deduplicated stop times ending with `T`.
    fn stop_times(&self) -> Vec<T> {
        let mut stops: Vec<T> = self
            .snapshot_times
            .iter()
            .copied()
            .filter(|&s| s < self.final_time)
            .collect();
        stops.sort_by(|a, b| a.partial_cmp(b).expect("finite times"));
        stops.dedup();
        stops.push(self.final_time);
        stops
    }
}

/// `min(cfl·h/L, h²/(2nη), remaining)`, with `h` standing in for the
/// transport bound when `L = 0`.
pub fn stable_dt<T: Scalar>(
    sys: &FriedrichsSystem<T>,
    grid: &Grid<T>,
    cfg: &SolverConfig<T>,
    remaining: T,
) -> T {
    let h = grid.h();
    let speed = sys.speed_bound();
    let mut dt = remaining;
    if speed > T::zero() {
        dt = dt.min(cfg.cfl * h / speed);
    }
    if cfg.eta > T::zero() {
        let n = T::from_usize_lossy(grid.dim());
        dt = dt.min(h * h / (T::lit(2.0) * n * cfg.eta));
    }
    if speed == T::zero() && cfg.eta == T::zero() {
        dt = dt.min(h);
    }
    dt
}

fn check_layout<T: Scalar>(sys: &FriedrichsSystem<T>, f: &Field<T>) -> Result<(), SolverError> {
    if f.grid().dim() != sys.dim() || f.state_size() != sys.state_size() {
        return Err(SolverError::Mismatch(format!(
            "system is {}D with {} components, field is {}D with {}",
            sys.dim(),
            sys.state_size(),
            f.grid().dim(),
            f.state_size()
        )));
    }
    Ok(())
}

fn courant_guard<T: Scalar>(courant: T) -> Result<(), SolverError> {
    if courant > T::one() + T::slack() {
        Err(SolverError::CflViolation {
            courant: courant.as_f64(),
        })
    } else {
        Ok(())
    }
}

/// One-direction characteristic upwind sweep.
fn upwind_sweep<T: Scalar>(sys: &FriedrichsSystem<T>, f: &Field<T>, axis: usize, dt: T) -> Field<T> {
    let grid = *f.grid();
    let m = f.state_size();
    let eig = sys.characteristic_decompose(axis);
    let courant: Vec<T> = eig.values.iter().map(|&l| l * dt / grid.h()).collect();

    let mut chars = vec![T::zero(); f.data().len()];
    for cell in 0..grid.num_cells() {
        eig.vectors
            .apply_transpose(f.cell(cell), &mut chars[cell * m..(cell + 1) * m]);
    }
    let mut out = Field::zeros(grid, m).with_time(f.time());
    let mut updated = vec![T::zero(); m];
    for cell in 0..grid.num_cells() {
        let left = grid.neighbor(cell, axis, -1);
        let right = grid.neighbor(cell, axis, 1);
        for (k, &nu) in courant.iter().enumerate() {
            let c = chars[cell * m + k];
            updated[k] = if nu > T::zero() {
                let up = left.map_or(T::zero(), |l| chars[l * m + k]);
                (T::one() - nu) * c + nu * up
            } else if nu < T::zero() {
                let a = -nu;
                let up = right.map_or(T::zero(), |r| chars[r * m + k]);
                (T::one() - a) * c + a * up
            } else {
                c
            };
        }
        eig.vectors.apply(&updated, out.cell_mut(cell));
    }
    out
}

/// First-order characteristic upwinding; Strang-split across directions in 2D.
pub fn upwind_step<T: Scalar>(
    sys: &FriedrichsSystem<T>,
    f: &Field<T>,
    dt: T,
) -> Result<Field<T>, SolverError> {
    check_layout(sys, f)?;
    courant_guard(sys.speed_bound() * dt / f.grid().h())?;
    Ok(match sys.dim() {
        1 => upwind_sweep(sys, f, 0, dt),
        _ => {
            let half = dt / T::lit(2.0);
            let a = upwind_sweep(sys, f, 0, half);
            let b = upwind_sweep(sys, &a, 1, dt);
            upwind_sweep(sys, &b, 0, half)
        }
    })
}

/// Unsplit Rusanov flux. Stability needs `n·L·dt/h ≤ 1`.
pub fn rusanov_step<T: Scalar>(
    sys: &FriedrichsSystem<T>,
    f: &Field<T>,
    dt: T,
) -> Result<Field<T>, SolverError> {
    check_layout(sys, f)?;
    let grid = *f.grid();
    let n = T::from_usize_lossy(grid.dim());
    let speed = sys.speed_bound();
    courant_guard(n * speed * dt / grid.h())?;
    let m = f.state_size();
    let nu = dt / grid.h();
    let half = T::lit(0.5);
    let zero = vec![T::zero(); m];
    let mut out = f.clone();
    let mut jump = vec![T::zero(); m];
    let mut flux = vec![T::zero(); m];
    for cell in 0..grid.num_cells() {
        let w = f.cell(cell);
        for axis in 0..grid.dim() {
            let plus = grid.neighbor(cell, axis, 1).map_or(&zero[..], |c| f.cell(c));
            let minus = grid.neighbor(cell, axis, -1).map_or(&zero[..], |c| f.cell(c));
            for k in 0..m {
                jump[k] = plus[k] - minus[k];
            }
            sys.matrix(axis).apply(&jump, &mut flux);
            let target = out.cell_mut(cell);
            for k in 0..m {
                let second = plus[k] - w[k] - w[k] + minus[k];
                target[k] = target[k] - half * nu * flux[k] + half * nu * speed * second;
            }
        }
    }
    Ok(out)
}

/// Explicit three-point Laplacian per axis. Requires `η·dt ≤ h²/(2n)`.
pub fn diffusion_step<T: Scalar>(f: &Field<T>, eta: T, dt: T) -> Result<Field<T>, SolverError> {
    if eta == T::zero() {
        return Ok(f.clone());
    }
    let grid = *f.grid();
    let number = eta * dt / (grid.h() * grid.h());
    let limit = T::one() / (T::lit(2.0) * T::from_usize_lossy(grid.dim()));
    if number > limit * (T::one() + T::slack()) {
        return Err(SolverError::StabilityViolation {
            number: number.as_f64(),
            limit: limit.as_f64(),
        });
    }
    let m = f.state_size();
    let mut out = f.clone();
    for cell in 0..grid.num_cells() {
        for axis in 0..grid.dim() {
            let plus = grid.neighbor(cell, axis, 1);
            let minus = grid.neighbor(cell, axis, -1);
            for k in 0..m {
                let w = f.cell(cell)[k];
                let p = plus.map_or(T::zero(), |c| f.cell(c)[k]);
                let q = minus.map_or(T::zero(), |c| f.cell(c)[k]);
                let target = &mut out.cell_mut(cell)[k];
                *target = *target + number * (p - w - w + q);
            }
        }
    }
    Ok(out)
}

/// Exact solution of `dW/dt = (P_K(W) − W)/ε` over `dt`, cell by cell.
pub fn relaxation_step_exact<T: Scalar>(
    k: &ConvexSet<T>,
    f: &Field<T>,
    epsilon: T,
    dt: T,
) -> Result<Field<T>, SolverError> {
    let decay = (-dt / epsilon).exp();
    let mut out = f.clone();
    for cell in 0..f.num_cells() {
        let w = f.cell(cell);
        let p = k.project(w)?;
        if p.as_slice() == w {
            continue;
        }
        for ((o, &wi), &pi) in out.cell_mut(cell).iter_mut().zip(w).zip(&p) {
            *o = pi + (wi - pi) * decay;
        }
    }
    Ok(out)
}

/// Backward Euler for the relaxation ODE.
pub fn relaxation_step_implicit<T: Scalar>(
    k: &ConvexSet<T>,
    f: &Field<T>,
    epsilon: T,
    dt: T,
) -> Result<Field<T>, SolverError> {
    let ratio = dt / epsilon;
    let mut out = f.clone();
    for cell in 0..f.num_cells() {
        let w = f.cell(cell);
        let p = k.project(w)?;
        if p.as_slice() == w {
            continue;
        }
        for ((o, &wi), &pi) in out.cell_mut(cell).iter_mut().zip(w).zip(&p) {
            *o = (wi + ratio * pi) / (T::one() + ratio);
        }
    }
    Ok(out)
}

fn relax<T: Scalar>(
    k: &ConvexSet<T>,
    f: &Field<T>,
    cfg: &SolverConfig<T>,
    dt: T,
) -> Result<Field<T>, SolverError> {
    match cfg.relaxation {
        Relaxation::Exact => relaxation_step_exact(k, f, cfg.epsilon, dt),
        Relaxation::ImplicitEuler => relaxation_step_implicit(k, f, cfg.epsilon, dt),
    }
}

pub fn transport_step<T: Scalar>(
    sys: &FriedrichsSystem<T>,
    f: &Field<T>,
    scheme: Scheme,
    dt: T,
) -> Result<Field<T>, SolverError> {
    match scheme {
        Scheme::Upwind => upwind_step(sys, f, dt),
        Scheme::Rusanov => rusanov_step(sys, f, dt),
    }
}

/// `R(dt/2) ∘ D(dt) ∘ T(dt) ∘ R(dt/2)`, rightmost first.
pub fn strang_step<T: Scalar>(
    sys: &FriedrichsSystem<T>,
    k: &ConvexSet<T>,
    f: &Field<T>,
    cfg: &SolverConfig<T>,
    dt: T,
) -> Result<Field<T>, SolverError> {
    let half = dt / T::lit(2.0);
    let mut w = relax(k, f, cfg, half)?;
    w = transport_step(sys, &w, cfg.scheme, dt)?;
    if cfg.eta > T::zero() {
        w = diffusion_step(&w, cfg.eta, dt)?;
    }
    w = relax(k, &w, cfg, half)?;
    w.check_finite()?;
    w.set_time(f.time() + dt);
    Ok(w)
}

/// Cells per axis the support can advance in one [`strang_step`].
pub fn stencil_reach<T: Scalar>(sys: &FriedrichsSystem<T>, cfg: &SolverConfig<T>) -> usize {
    let transport = if sys.speed_bound() == T::zero() {
        0
    } else {
        match (cfg.scheme, sys.dim()) {
            (Scheme::Upwind, 1) | (Scheme::Rusanov, _) => 1,
            (Scheme::Upwind, _) => 2,
        }
    };
    transport + usize::from(cfg.eta > T::zero())
}

/// Margin in cells kept between the reachable support and the grid edge.
pub const SUPPORT_MARGIN_CELLS: usize = 8;

/// Requires `support(W⁰) + n·L·T + 4η + 8h ≤ X` so that nothing reaches the
/// truncation boundary before `T`.
pub fn check_support<T: Scalar>(
    sys: &FriedrichsSystem<T>,
    initial: &Field<T>,
    cfg: &SolverConfig<T>,
) -> Result<(), SolverError> {
    let grid = initial.grid();
    let support = initial.support_radius();
    let propagation = T::from_usize_lossy(sys.dim()) * sys.speed_bound() * cfg.final_time;
    let margins =
        T::lit(4.0) * cfg.eta + T::from_usize_lossy(SUPPORT_MARGIN_CELLS) * grid.h();
    if support + propagation + margins > grid.extent() {
        return Err(SolverError::SupportPrecheckFailed {
            support: support.as_f64(),
            propagation: propagation.as_f64(),
            margins: margins.as_f64(),
            extent: grid.extent().as_f64(),
        });
    }
    Ok(())
}

/// Diagnostics at one recorded step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord<T> {
    pub step: usize,
    pub t: T,
    pub dt: T,
    /// `‖W(t)‖²_{L²}`
    pub energy: T,
    /// `max over cells of dist(K, W)`
    pub constraint_dist: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot<T> {
    pub step: usize,
    /// Step size that landed on this snapshot (zero for the initial one).
    pub dt: T,
    pub field: Field<T>,
}

impl<T: Scalar> Snapshot<T> {
    pub fn time(&self) -> T {
        self.field.time()
    }
}

#[derive(Debug, Clone)]
pub struct RunReport<T> {
    pub label: String,
    pub config: SolverConfig<T>,
    pub grid: Grid<T>,
    pub records: Vec<StepRecord<T>>,
    /// Always starts with the (possibly mollified) state at `t = 0`.
    pub snapshots: Vec<Snapshot<T>>,
    /// `‖W⁰‖²` of the data as supplied, before any mollification.
    pub data_energy: T,
    pub stencil_reach: usize,
    pub steps: usize,
    pub complete: bool,
}

impl<T: Scalar> RunReport<T> {
    pub fn final_field(&self) -> &Field<T> {
        &self.snapshots.last().expect("initial snapshot always present").field
    }

    pub fn initial_field(&self) -> &Field<T> {
        &self.snapshots[0].field
    }

    pub fn max_constraint_dist(&self) -> T {
        self.records
            .iter()
            .fold(T::zero(), |m, r| m.max(r.constraint_dist))
    }

    /// Whether every recorded energy stays below the raw data energy.
    pub fn energy_bounded_by_data(&self) -> bool {
        let bound = self.data_energy * (T::one() + T::slack());
        self.records.iter().all(|r| r.energy <= bound)
    }

    /// `step,t,dt,energy,constraint_dist`
    pub fn write_csv(&self, mut out: impl Write) -> io::Result<()> {
        writeln!(out, "step,t,dt,energy,constraint_dist")?;
        for r in &self.records {
            writeln!(
                out,
                "{},{},{},{},{}",
                r.step,
                g17(r.t.as_f64()),
                g17(r.dt.as_f64()),
                g17(r.energy.as_f64()),
                g17(r.constraint_dist.as_f64())
            )?;
        }
        Ok(())
    }
}

/// A run that stopped early, with everything recorded up to the failure.
#[derive(Debug, Clone, thiserror::Error)]
#[error("{error}")]
pub struct RunFailure<T: std::fmt::Debug> {
    pub error: SolverError,
    pub partial: Option<Box<RunReport<T>>>,
}

impl<T: std::fmt::Debug> From<SolverError> for RunFailure<T> {
    fn from(error: SolverError) -> Self {
        Self {
            error,
            partial: None,
        }
    }
}

fn constraint_sup<T: Scalar>(k: &ConvexSet<T>, f: &Field<T>) -> Result<T, ConvexError> {
    let mut worst = T::zero();
    for cell in 0..f.num_cells() {
        worst = worst.max(k.distance(f.cell(cell))?);
    }
    Ok(worst)
}

/// Advances `initial` to `cfg.final_time`. With `η > 0` the data is first
/// mollified at width `η`.
pub fn run<T: Scalar>(
    sys: &FriedrichsSystem<T>,
    k: &ConvexSet<T>,
    initial: &Field<T>,
    cfg: &SolverConfig<T>,
) -> Result<RunReport<T>, RunFailure<T>> {
    cfg.validate()?;
    check_layout(sys, initial)?;
    if k.dim() != sys.state_size() {
        return Err(SolverError::Mismatch("constraint dimension differs from state size".into()).into());
    }
    if !k.contains(&vec![T::zero(); k.dim()], T::zero()).map_err(SolverError::from)? {
        return Err(SolverError::OriginOutsideConstraint.into());
    }
    check_support(sys, initial, cfg)?;

    let grid = *initial.grid();
    let mut w = if cfg.eta > T::zero() {
        initial.mollify(cfg.eta).map_err(SolverError::from)?
    } else {
        initial.clone()
    };
    w.set_time(T::zero());

    let mut report = RunReport {
        label: sys.label().to_string(),
        config: cfg.clone(),
        grid,
        records: Vec::new(),
        snapshots: Vec::new(),
        data_energy: initial.energy(),
        stencil_reach: stencil_reach(sys, cfg),
        steps: 0,
        complete: false,
    };
    let fail = |error: SolverError, report: RunReport<T>| RunFailure {
        error,
        partial: Some(Box::new(report)),
    };

    let dist0 = match constraint_sup(k, &w) {
        Ok(d) => d,
        Err(e) => return Err(fail(e.into(), report)),
    };
    report.records.push(StepRecord {
        step: 0,
        t: T::zero(),
        dt: T::zero(),
        energy: w.energy(),
        constraint_dist: dist0,
    });
    report.snapshots.push(Snapshot {
        step: 0,
        dt: T::zero(),
        field: w.clone(),
    });

    let mut t = T::zero();
    for stop in cfg.stop_times() {
        while t < stop {
            let remaining = stop - t;
            let dt = stable_dt(sys, &grid, cfg, remaining);
            let lands = dt >= remaining;
            w = match strang_step(sys, k, &w, cfg, dt) {
                Ok(next) => next,
                Err(e) => return Err(fail(e, report)),
            };
            t = if lands { stop } else { t + dt };
            w.set_time(t);
            report.steps += 1;
            if report.steps % cfg.record_every == 0 || lands {
                let constraint_dist = match constraint_sup(k, &w) {
                    Ok(d) => d,
                    Err(e) => return Err(fail(e.into(), report)),
                };
                report.records.push(StepRecord {
                    step: report.steps,
                    t,
                    dt,
                    energy: w.energy(),
                    constraint_dist,
                });
            }
            if lands {
                report.snapshots.push(Snapshot {
                    step: report.steps,
                    dt,
                    field: w.clone(),
                });
            }
        }
    }
    report.complete = true;
    Ok(report)
}

/// [`run`] for the viscous problem; `η = 0` is rejected.
pub fn parabolic_run<T: Scalar>(
    sys: &FriedrichsSystem<T>,
    k: &ConvexSet<T>,
    initial: &Field<T>,
    cfg: &SolverConfig<T>,
) -> Result<RunReport<T>, RunFailure<T>> {
    if !(cfg.eta > T::zero()) {
        return Err(SolverError::BadConfig("parabolic runs need eta > 0".into()).into());
    }
    run(sys, k, initial, cfg)
}

/// Trapezoid-in-time `‖a − b‖_{L²((0,T)×ω)}` over two runs that share their
/// snapshot times.
pub fn space_time_distance<T: Scalar>(
    a: &RunReport<T>,
    b: &RunReport<T>,
    region: crate::grid::Region<T>,
) -> Result<T, SolverError> {
    if a.snapshots.len() != b.snapshots.len() {
        return Err(SolverError::Mismatch("runs have different snapshot counts".into()));
    }
    let mut values = Vec::with_capacity(a.snapshots.len());
    let mut times = Vec::with_capacity(a.snapshots.len());
    for (sa, sb) in a.snapshots.iter().zip(&b.snapshots) {
        let gap = (sa.time() - sb.time()).abs();
        if gap > T::slack() * a.config.final_time {
            return Err(SolverError::Mismatch("snapshot times differ".into()));
        }
        values.push(sa.field.difference(&sb.field)?.l2_norm_squared(region));
        times.push(sa.time());
    }
    Ok(trapezoid(&times, &values).sqrt())
}

/// Trapezoid rule on nonuniform nodes.
pub fn trapezoid<T: Scalar>(times: &[T], values: &[T]) -> T {
    let terms: Vec<T> = times
        .windows(2)
        .zip(values.windows(2))
        .map(|(t, v)| (t[1] - t[0]) * (v[0] + v[1]) / T::lit(2.0))
        .collect();
    pairwise_sum(&terms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convex::Shape;
    use crate::system::ModelSpec;

    fn advection() -> FriedrichsSystem<f64> {
        ModelSpec::Advection { speeds: vec![1.0] }.build().unwrap().system
    }

    fn huge_ball(m: usize) -> ConvexSet<f64> {
        ConvexSet::new(Shape::ball(vec![0.0; m], 1e3), m).unwrap()
    }

    #[test]
    fn stable_dt_examples() {
        let sys = advection();
        let grid = Grid::new(1, 0.64, 128).unwrap();
        assert_eq!(grid.h(), 0.01);
        let cfg = SolverConfig::new(1.0, 10.0).with_cfl(0.9);
        assert!((stable_dt(&sys, &grid, &cfg, 10.0) - 0.009).abs() < 1e-15);
        let cfg = cfg.with_eta(0.01);
        assert!((stable_dt(&sys, &grid, &cfg, 10.0) - 0.005).abs() < 1e-15);
        assert_eq!(stable_dt(&sys, &grid, &cfg, 0.001), 0.001);

        let wave = ModelSpec::Wave1D { shear_modulus: 4.0_f64 }.build().unwrap().system;
        let grid = Grid::new(1, 1.28, 128).unwrap();
        let cfg = SolverConfig::new(1.0, 10.0).with_cfl(0.5);
        let expected = 0.5 * grid.h() / wave.speed_bound();
        assert!((stable_dt(&wave, &grid, &cfg, 10.0) - expected).abs() < 1e-16);
        assert!((expected - 0.005).abs() < 1e-15);

        let still = FriedrichsSystem::new("zero", vec![crate::linalg::Matrix::zeros(1)]).unwrap();
        assert_eq!(stable_dt(&still, &grid, &SolverConfig::new(1.0, 1.0), 1.0), grid.h());
    }

    #[test]
    fn unit_courant_upwind_is_exact_shift() {
        let sys = advection();
        let grid = Grid::<f64>::new(1, 1.0, 32).unwrap();
        let f = Field::from_fn(grid, 1, |x| vec![(3.0 * x[0]).sin()]).unwrap();
        let g = upwind_step(&sys, &f, grid.h()).unwrap();
        assert_eq!(g, f.shift(&[-1]));
    }

    #[test]
    fn upwind_rejects_large_steps() {
        let sys = advection();
        let grid = Grid::new(1, 1.0, 32).unwrap();
        let f = Field::zeros(grid, 1);
        assert!(matches!(
            upwind_step(&sys, &f, 1.1 * grid.h()),
            Err(SolverError::CflViolation { .. })
        ));
        assert!(matches!(
            rusanov_step(&sys, &f, 1.1 * grid.h()),
            Err(SolverError::CflViolation { .. })
        ));
    }

    #[test]
    fn constants_unchanged_away_from_boundary() {
        let sys = ModelSpec::Wave1D { shear_modulus: 1.0_f64 }.build().unwrap().system;
        let grid = Grid::new(1, 1.0, 32).unwrap();
        let f = Field::from_fn(grid, 2, |_| vec![0.3, -0.2]).unwrap();
        let dt = 0.9 * grid.h();
        for g in [upwind_step(&sys, &f, dt).unwrap(), rusanov_step(&sys, &f, dt).unwrap()] {
            for cell in 1..grid.num_cells() - 1 {
                for k in 0..2 {
                    assert!((g.cell(cell)[k] - f.cell(cell)[k]).abs() < 1e-15);
                }
            }
        }
        let d = diffusion_step(&f, 0.01, 0.5 * grid.h() * grid.h() / 0.01).unwrap();
        for cell in 1..grid.num_cells() - 1 {
            assert_eq!(d.cell(cell), f.cell(cell));
        }
    }

    #[test]
    fn rusanov_with_zero_matrices_is_identity() {
        let sys = FriedrichsSystem::new("zero", vec![crate::linalg::Matrix::zeros(2)]).unwrap();
        let grid = Grid::new(1, 1.0, 16).unwrap();
        let f = Field::from_fn(grid, 2, |x| vec![x[0], x[0] * x[0]]).unwrap();
        assert_eq!(rusanov_step(&sys, &f, 0.3).unwrap(), f);
    }

    #[test]
    fn diffusion_spike_by_hand() {
        let grid = Grid::<f64>::new(1, 1.0, 16).unwrap();
        let mut f = Field::zeros(grid, 1);
        f.cell_mut(8)[0] = 1.0;
        let (eta, dt) = (0.01, 0.5);
        let r = eta * dt / (grid.h() * grid.h());
        let g = diffusion_step(&f, eta, dt).unwrap();
        assert!((g.cell(7)[0] - r).abs() < 1e-15);
        assert!((g.cell(8)[0] - (1.0 - 2.0 * r)).abs() < 1e-15);
        assert!((g.cell(9)[0] - r).abs() < 1e-15);
        assert_eq!(g.cell(6)[0], 0.0);
        assert_eq!(diffusion_step(&f, 0.0, dt).unwrap(), f);
        assert!(matches!(
            diffusion_step(&f, 1.0, 1.0),
            Err(SolverError::StabilityViolation { .. })
        ));
    }

    #[test]
    fn relaxation_examples() {
        let k = ConvexSet::new(Shape::ball(vec![0.0, 0.0], 1.0), 2).unwrap();
        let grid = Grid::new(1, 1.0, 4).unwrap();
        let mut f = Field::zeros(grid, 2);
        f.cell_mut(0).copy_from_slice(&[2.0, 0.0]);
        f.cell_mut(1).copy_from_slice(&[0.5, 0.5]);
        let g = relaxation_step_exact(&k, &f, 1.0, 2f64.ln()).unwrap();
        assert!((g.cell(0)[0] - 1.5).abs() < 1e-15);
        assert_eq!(g.cell(1), f.cell(1));
        let g = relaxation_step_exact(&k, &f, 0.01, 0.5).unwrap();
        assert!((g.cell(0)[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn parabolic_run_requires_viscosity() {
        let sys = advection();
        let grid = Grid::new(1, 4.0, 64).unwrap();
        let f = Field::zeros(grid, 1);
        let err = parabolic_run(&sys, &huge_ball(1), &f, &SolverConfig::new(1.0, 1.0)).unwrap_err();
        assert!(matches!(err.error, SolverError::BadConfig(_)));
    }

    #[test]
    fn support_precheck() {
        let sys = advection();
        let grid = Grid::<f64>::new(1, 1.0, 64).unwrap();
        let f = Field::from_fn(grid, 1, |x| vec![if x[0].abs() < 0.5 { 1.0 } else { 0.0 }]).unwrap();
        let err = run(&sys, &huge_ball(1), &f, &SolverConfig::new(1.0, 1.0)).unwrap_err();
        assert!(matches!(err.error, SolverError::SupportPrecheckFailed { .. }));
        assert!(err.partial.is_none());
    }

    #[test]
    fn origin_must_be_admissible() {
        let sys = advection();
        let grid = Grid::new(1, 4.0, 64).unwrap();
        let k = ConvexSet::with_anchor(Shape::slab(0, 1.0, 2.0), vec![1.5]).unwrap();
        let err = run(&sys, &k, &Field::zeros(grid, 1), &SolverConfig::new(1.0, 1.0)).unwrap_err();
        assert_eq!(err.error, SolverError::OriginOutsideConstraint);
    }

    #[test]
    fn zero_data_run() {
        let sys = ModelSpec::Wave1D { shear_modulus: 1.0 }.build().unwrap().system;
        let grid = Grid::new(1, 4.0, 64).unwrap();
        let cfg = SolverConfig::new(0.1, 1.0).with_uniform_snapshots(4);
        let report = run(&sys, &huge_ball(2), &Field::zeros(grid, 2), &cfg).unwrap();
        assert!(report.complete);
        assert_eq!(report.snapshots.len(), 5);
        assert!(report.records.iter().all(|r| r.energy == 0.0));
        assert!(report.snapshots.iter().all(|s| s.field.max_abs() == 0.0));
        assert_eq!(report.final_field().time(), 1.0);
        let times: Vec<f64> = report.records.iter().map(|r| r.t).collect();
        assert!(times.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn report_csv_header() {
        let sys = advection();
        let grid = Grid::new(1, 4.0, 64).unwrap();
        let report = run(&sys, &huge_ball(1), &Field::zeros(grid, 1), &SolverConfig::new(1.0, 0.5)).unwrap();
        let mut buf = Vec::new();
        report.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("step,t,dt,energy,constraint_dist\n0,0,0,0,0\n"));
    }
}
