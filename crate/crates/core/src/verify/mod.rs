//! Numerical checks of the estimates satisfied by relaxed solutions: energy
//! decay, the entropy inequality against constants in `K`, L² contraction,
//! finite propagation speed, and convergence as `ε → 0` and `η → 0`.

mod entropy;
mod studies;
mod test_function;

pub use entropy::{
    entropy_check_family, entropy_residual, kappa_samples, test_function_family, EntropyReport,
    DEFAULT_RESIDUAL_CONSTANT,
};
pub use studies::{
    contraction_check, dense_snapshot_config, entropy_study, epsilon_cauchy_study, eta_study,
    l2_data_relaxation_study, translation_estimate_check, ContractionReport, ContractionRow,
    EntropyStudy, EpsilonStudy, EtaStudy, L2DataRow, L2DataStudy, TranslationReport,
};
pub use test_function::{cone_test_function, TestFunction};

use crate::convex::ConvexError;
use crate::grid::Region;
use crate::scalar::Scalar;
use crate::solver::{RunReport, SolverError};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum VerifyError {
    #[error("κ does not belong to the constraint set")]
    KappaOutsideK,
    #[error("initial data is not supported in the stated ball (mass {outside:e} outside)")]
    SupportPrecheckFailed { outside: f64 },
    #[error("bad parameters: {0}")]
    BadParameters(String),
    #[error(transparent)]
    Convex(#[from] ConvexError),
    #[error(transparent)]
    Solver(#[from] SolverError),
}

impl<T: std::fmt::Debug> From<crate::solver::RunFailure<T>> for VerifyError {
    fn from(f: crate::solver::RunFailure<T>) -> Self {
        VerifyError::Solver(f.error)
    }
}

/// One line of a verdict table.
#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub check: String,
    pub parameters: String,
    pub value: f64,
    pub budget: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyVerdict<T> {
    pub pass: bool,
    /// Largest step-to-step relative increase (zero when monotone).
    pub max_uptick: T,
    pub initial: T,
    pub last: T,
}

/// Energy must never exceed its initial value nor grow between records,
/// both up to the relative rounding slack.
pub fn energy_check<T: Scalar>(report: &RunReport<T>) -> EnergyVerdict<T> {
    let slack = T::slack();
    let energies: Vec<T> = report.records.iter().map(|r| r.energy).collect();
    let initial = energies.first().copied().unwrap_or(T::zero());
    let last = energies.last().copied().unwrap_or(T::zero());
    let mut max_uptick = T::zero();
    let mut pass = report.complete;
    for w in energies.windows(2) {
        let reference = w[0].max(T::min_positive_value());
        max_uptick = max_uptick.max((w[1] - w[0]) / reference);
        if w[1] > w[0] * (T::one() + slack) {
            pass = false;
        }
    }
    if energies.iter().any(|&e| e > initial * (T::one() + slack)) {
        pass = false;
    }
    EnergyVerdict {
        pass,
        max_uptick,
        initial,
        last,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FiniteSpeedRow<T> {
    pub t: T,
    /// Radius of the ball outside which the solution must vanish.
    pub radius: T,
    pub outside: T,
    pub limit: T,
    pub pass: bool,
}

/// Mass outside `B(0, r₀ + nLt + margin·h)` at every snapshot, where the
/// margin is the stencil reach accumulated over the steps taken so far minus
/// what the physical cone already accounts for.
pub fn finite_speed_check<T: Scalar>(
    report: &RunReport<T>,
    initial_radius: T,
    speed: T,
) -> Result<(bool, Vec<FiniteSpeedRow<T>>), VerifyError> {
    let grid = report.grid;
    let initial = report.initial_field();
    let outside0 = initial.l2_norm(Region::Annulus {
        inner: initial_radius,
        outer: T::infinity(),
    });
    if outside0 > T::zero() {
        return Err(VerifyError::SupportPrecheckFailed {
            outside: outside0.as_f64(),
        });
    }
    let n = T::from_usize_lossy(grid.dim());
    let limit = T::lit(1e-10) * initial.l2_norm(Region::All);
    let per_step = T::from_usize_lossy(report.stencil_reach) * n.sqrt() * grid.h();
    let mut rows = Vec::with_capacity(report.snapshots.len());
    for snap in &report.snapshots {
        let t = snap.time();
        let physical = n * speed * t;
        let stencil = T::from_usize_lossy(snap.step) * per_step;
        let margin = (stencil - physical).max(T::zero());
        let radius = initial_radius + physical + margin + T::lit(1e-9) * grid.h();
        let outside = snap.field.l2_norm(Region::Annulus {
            inner: radius,
            outer: T::infinity(),
        });
        rows.push(FiniteSpeedRow {
            t,
            radius,
            outside,
            limit,
            pass: outside <= limit,
        });
    }
    Ok((rows.iter().all(|r| r.pass), rows))
}

/// `next < prev`, or both exactly zero (a series that has already converged).
pub(crate) fn strictly_decreasing<T: Scalar>(series: &[T]) -> bool {
    series
        .windows(2)
        .all(|w| w[1] < w[0] || (w[0] == T::zero() && w[1] == T::zero()))
}
