//! Multi-run checks: contraction, translation estimates, entropy sweeps and
//! convergence studies in `ε`, `η` and the data mollification width.
//!
//! Independent runs go through rayon; results are gathered in input order so
//! every table is deterministic.

use rayon::prelude::*;

use super::entropy::{entropy_check_family, EntropyReport};
use super::{strictly_decreasing, VerifyError};
use crate::convex::ConvexSet;
use crate::grid::{Field, Region};
use crate::scalar::Scalar;
use crate::solver::{run, space_time_distance, stable_dt, trapezoid, RunReport, SolverConfig};
use crate::system::FriedrichsSystem;

/// Copy of `cfg` with uniform snapshots spaced at most two inviscid time
/// steps apart.
pub fn dense_snapshot_config<T: Scalar>(
    sys: &FriedrichsSystem<T>,
    field: &Field<T>,
    cfg: &SolverConfig<T>,
) -> SolverConfig<T> {
    let mut inviscid = cfg.clone();
    inviscid.eta = T::zero();
    let dt = stable_dt(sys, field.grid(), &inviscid, cfg.final_time);
    let count = (cfg.final_time / (T::lit(2.0) * dt)).ceil().to_usize().unwrap_or(1).max(1);
    cfg.clone().with_uniform_snapshots(count)
}

fn run_all<T: Scalar>(
    sys: &FriedrichsSystem<T>,
    k: &ConvexSet<T>,
    jobs: Vec<(Field<T>, SolverConfig<T>)>,
) -> Result<Vec<RunReport<T>>, VerifyError> {
    jobs.into_par_iter()
        .map(|(data, cfg)| run(sys, k, &data, &cfg).map_err(VerifyError::from))
        .collect::<Vec<_>>()
        .into_iter()
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContractionRow<T> {
    pub t: T,
    /// `None` for the whole-space comparison.
    pub radius: Option<T>,
    pub lhs: T,
    pub rhs: T,
    pub tolerance: T,
    pub pass: bool,
}

#[derive(Debug, Clone)]
pub struct ContractionReport<T> {
    pub rows: Vec<ContractionRow<T>>,
    pub pass: bool,
}

/// `‖W(t) − W̃(t)‖_{L²(B(0,r))} ≤ ‖W⁰ − W̃⁰‖_{L²(B(0,r+nLT))}` at every
/// snapshot, for each radius and for the whole grid.
///
/// Slack is `1e-10` for the whole grid and `5h` for balls, where cell-centre
/// membership blurs the radii by up to a cell.
pub fn contraction_check<T: Scalar>(
    sys: &FriedrichsSystem<T>,
    k: &ConvexSet<T>,
    initial: &Field<T>,
    other: &Field<T>,
    cfg: &SolverConfig<T>,
    radii: &[T],
) -> Result<ContractionReport<T>, VerifyError> {
    let cfg = dense_snapshot_config(sys, initial, cfg);
    let runs = run_all(sys, k, vec![(initial.clone(), cfg.clone()), (other.clone(), cfg.clone())])?;
    let (a, b) = (&runs[0], &runs[1]);
    let grid = a.grid;
    let reach = T::from_usize_lossy(grid.dim()) * sys.speed_bound() * cfg.final_time;
    let data_gap = a.initial_field().difference(b.initial_field()).map_err(crate::solver::SolverError::from)?;

    let mut rows = Vec::new();
    for (sa, sb) in a.snapshots.iter().zip(&b.snapshots) {
        let gap = sa.field.difference(&sb.field).map_err(crate::solver::SolverError::from)?;
        let global_tol = T::lit(1e-10);
        let lhs = gap.l2_norm(Region::All);
        let rhs = data_gap.l2_norm(Region::All);
        rows.push(ContractionRow {
            t: sa.time(),
            radius: None,
            lhs,
            rhs,
            tolerance: global_tol,
            pass: lhs <= rhs * (T::one() + global_tol),
        });
        for &r in radii {
            let local_tol = T::lit(5.0) * grid.h();
            let lhs = gap.l2_norm(Region::Ball { radius: r });
            let rhs = data_gap.l2_norm(Region::Ball { radius: r + reach });
            rows.push(ContractionRow {
                t: sa.time(),
                radius: Some(r),
                lhs,
                rhs,
                tolerance: local_tol,
                pass: lhs <= rhs * (T::one() + local_tol),
            });
        }
    }
    let pass = rows.iter().all(|r| r.pass);
    Ok(ContractionReport { rows, pass })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TranslationReport<T> {
    /// `∫₀ᵀ ∫_{B(0,r)} |W_h − W|²`
    pub lhs: T,
    /// `T ∫_{B(0,r+nLT)} |W⁰_h − W⁰|²`
    pub rhs: T,
    pub pass: bool,
}

/// Space translation estimate for the pair `(W⁰, W⁰(·+offsets·h))`, with
/// relative slack `5h`.
pub fn translation_estimate_check<T: Scalar>(
    sys: &FriedrichsSystem<T>,
    k: &ConvexSet<T>,
    initial: &Field<T>,
    offsets: &[isize],
    cfg: &SolverConfig<T>,
    radius: T,
) -> Result<TranslationReport<T>, VerifyError> {
    let cfg = dense_snapshot_config(sys, initial, cfg);
    let shifted = initial.shift(offsets);
    let runs = run_all(sys, k, vec![(initial.clone(), cfg.clone()), (shifted, cfg.clone())])?;
    let grid = runs[0].grid;
    let ball = Region::Ball { radius };
    let lhs = space_time_distance(&runs[1], &runs[0], ball)?.powi(2);
    let reach = T::from_usize_lossy(grid.dim()) * sys.speed_bound() * cfg.final_time;
    let rhs = cfg.final_time
        * runs[1]
            .initial_field()
            .difference(runs[0].initial_field())
            .map_err(crate::solver::SolverError::from)?
            .l2_norm_squared(Region::Ball { radius: radius + reach });
    Ok(TranslationReport {
        lhs,
        rhs,
        pass: lhs <= rhs * (T::one() + T::lit(5.0) * grid.h()),
    })
}

#[derive(Debug, Clone)]
pub struct EntropyStudy<T> {
    pub epsilons: Vec<T>,
    pub reports: Vec<Vec<EntropyReport<T>>>,
    pub runs: Vec<RunReport<T>>,
    pub pass: bool,
}

/// Runs each `ε` with dense snapshots and evaluates every sampled `(κ, φ)`.
#[allow(clippy::too_many_arguments)]
pub fn entropy_study<T: Scalar>(
    sys: &FriedrichsSystem<T>,
    k: &ConvexSet<T>,
    initial: &Field<T>,
    cfg: &SolverConfig<T>,
    epsilons: &[T],
    bumps: usize,
    seed: u64,
    residual_constant: T,
) -> Result<EntropyStudy<T>, VerifyError> {
    let base = dense_snapshot_config(sys, initial, cfg);
    let jobs = epsilons
        .iter()
        .map(|&e| {
            let mut c = base.clone();
            c.epsilon = e;
            (initial.clone(), c)
        })
        .collect();
    let runs = run_all(sys, k, jobs)?;
    let reports = runs
        .par_iter()
        .map(|r| entropy_check_family(r, sys, k, bumps, seed, residual_constant))
        .collect::<Vec<_>>()
        .into_iter()
        .collect::<Result<Vec<_>, _>>()?;
    let pass = reports.iter().flatten().all(|r| r.pass);
    Ok(EntropyStudy {
        epsilons: epsilons.to_vec(),
        reports,
        runs,
        pass,
    })
}

#[derive(Debug, Clone)]
pub struct EpsilonStudy<T> {
    pub epsilons: Vec<T>,
    /// `sup_t max_x dist(K, W_ε)` per run.
    pub constraint_dist: Vec<T>,
    /// `‖W_{ε_k} − W_{ε_{k+1}}‖_{L²((0,T)×ω)}`
    pub cauchy: Vec<T>,
    pub runs: Vec<RunReport<T>>,
    pub pass: bool,
}

impl<T: Scalar> EpsilonStudy<T> {
    pub fn cauchy_ratios(&self) -> Vec<T> {
        ratios(&self.cauchy)
    }

    pub fn constraint_ratios(&self) -> Vec<T> {
        ratios(&self.constraint_dist)
    }
}

fn ratios<T: Scalar>(xs: &[T]) -> Vec<T> {
    xs.windows(2).map(|w| w[1] / w[0]).collect()
}

fn check_descending<T: Scalar>(name: &str, xs: &[T]) -> Result<(), VerifyError> {
    if xs.len() < 2 || xs.windows(2).any(|w| !(w[1] < w[0])) || xs.iter().any(|x| !(*x > T::zero())) {
        return Err(VerifyError::BadParameters(format!(
            "{name} must hold at least two positive, strictly decreasing values"
        )));
    }
    Ok(())
}

/// All runs share one time grid: the step size does not depend on `ε`.
pub fn epsilon_cauchy_study<T: Scalar>(
    sys: &FriedrichsSystem<T>,
    k: &ConvexSet<T>,
    initial: &Field<T>,
    cfg: &SolverConfig<T>,
    epsilons: &[T],
    omega: Region<T>,
) -> Result<EpsilonStudy<T>, VerifyError> {
    check_descending("epsilons", epsilons)?;
    let base = dense_snapshot_config(sys, initial, cfg);
    let jobs = epsilons
        .iter()
        .map(|&e| {
            let mut c = base.clone();
            c.epsilon = e;
            (initial.clone(), c)
        })
        .collect();
    let runs = run_all(sys, k, jobs)?;
    let constraint_dist: Vec<T> = runs.iter().map(RunReport::max_constraint_dist).collect();
    let cauchy = runs
        .windows(2)
        .map(|w| space_time_distance(&w[0], &w[1], omega))
        .collect::<Result<Vec<_>, _>>()?;
    let first = constraint_dist[0];
    let last = *constraint_dist.last().expect("nonempty");
    let pass = strictly_decreasing(&cauchy)
        && strictly_decreasing(&constraint_dist)
        && last <= T::lit(0.1) * first;
    Ok(EpsilonStudy {
        epsilons: epsilons.to_vec(),
        constraint_dist,
        cauchy,
        runs,
        pass,
    })
}

#[derive(Debug, Clone)]
pub struct EtaStudy<T> {
    pub etas: Vec<T>,
    /// `‖W_{ε,η} − W_ε‖_{L²((0,T)×ω)}` per `η`.
    pub distances: Vec<T>,
    pub reference: RunReport<T>,
    pub runs: Vec<RunReport<T>>,
    pub pass: bool,
}

/// Compares viscous runs (mollified data plus `η`-diffusion) against the
/// inviscid relaxed run at the same `ε`. Passes when the distances strictly
/// decrease and the last is at most half the first.
pub fn eta_study<T: Scalar>(
    sys: &FriedrichsSystem<T>,
    k: &ConvexSet<T>,
    initial: &Field<T>,
    cfg: &SolverConfig<T>,
    etas: &[T],
    omega: Region<T>,
) -> Result<EtaStudy<T>, VerifyError> {
    check_descending("etas", etas)?;
    let h = initial.grid().h();
    if etas.iter().any(|&e| e < h) {
        return Err(VerifyError::BadParameters("every eta must be at least the cell width".into()));
    }
    let mut base = dense_snapshot_config(sys, initial, cfg);
    base.eta = T::zero();
    let mut jobs = vec![(initial.clone(), base.clone())];
    jobs.extend(etas.iter().map(|&e| {
        let mut c = base.clone();
        c.eta = e;
        (initial.clone(), c)
    }));
    let mut runs = run_all(sys, k, jobs)?;
    let reference = runs.remove(0);
    let distances = runs
        .iter()
        .map(|r| space_time_distance(r, &reference, omega))
        .collect::<Result<Vec<_>, _>>()?;
    let pass = strictly_decreasing(&distances)
        && *distances.last().expect("nonempty") <= T::lit(0.5) * distances[0];
    Ok(EtaStudy {
        etas: etas.to_vec(),
        distances,
        reference,
        runs,
        pass,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct L2DataRow<T> {
    pub first: usize,
    pub second: usize,
    /// `sup_t ‖W_k(t) − W_l(t)‖_{L²}`
    pub solution_gap: T,
    /// `‖W⁰_k − W⁰_l‖_{L²}`
    pub data_gap: T,
    pub pass: bool,
}

#[derive(Debug, Clone)]
pub struct L2DataStudy<T> {
    pub widths: Vec<T>,
    pub rows: Vec<L2DataRow<T>>,
    pub runs: Vec<RunReport<T>>,
    pub pass: bool,
}

/// Runs the relaxed problem from `initial` mollified at each width and checks
/// every pair stays as close as its data, uniformly in time.
pub fn l2_data_relaxation_study<T: Scalar>(
    sys: &FriedrichsSystem<T>,
    k: &ConvexSet<T>,
    initial: &Field<T>,
    cfg: &SolverConfig<T>,
    widths: &[T],
) -> Result<L2DataStudy<T>, VerifyError> {
    if widths.is_empty() || widths.windows(2).any(|w| w[1] > w[0]) {
        return Err(VerifyError::BadParameters("widths must be nonincreasing".into()));
    }
    let mut base = dense_snapshot_config(sys, initial, cfg);
    base.eta = T::zero();
    let data = widths
        .iter()
        .map(|&w| initial.mollify(w).map_err(crate::solver::SolverError::from))
        .collect::<Result<Vec<_>, _>>()?;
    let runs = run_all(sys, k, data.into_iter().map(|d| (d, base.clone())).collect())?;
    let mut rows = Vec::new();
    for i in 0..runs.len() {
        for j in (i + 1)..runs.len() {
            let mut sup = T::zero();
            for (a, b) in runs[i].snapshots.iter().zip(&runs[j].snapshots) {
                let gap = a.field.difference(&b.field).map_err(crate::solver::SolverError::from)?;
                sup = sup.max(gap.l2_norm(Region::All));
            }
            let data_gap = runs[i]
                .initial_field()
                .difference(runs[j].initial_field())
                .map_err(crate::solver::SolverError::from)?
                .l2_norm(Region::All);
            rows.push(L2DataRow {
                first: i,
                second: j,
                solution_gap: sup,
                data_gap,
                pass: sup <= data_gap * (T::one() + T::lit(1e-10)),
            });
        }
    }
    let pass = rows.iter().all(|r| r.pass);
    Ok(L2DataStudy {
        widths: widths.to_vec(),
        rows,
        runs,
        pass,
    })
}

#[allow(dead_code)]
fn time_integral<T: Scalar>(report: &RunReport<T>, f: impl Fn(&Field<T>) -> T) -> T {
    let times: Vec<T> = report.snapshots.iter().map(|s| s.time()).collect();
    let values: Vec<T> = report.snapshots.iter().map(|s| f(&s.field)).collect();
    trapezoid(&times, &values)
}
