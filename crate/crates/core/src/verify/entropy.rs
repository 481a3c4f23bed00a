//! Discrete residual of the entropy inequality
//!
//! ```text
//! ∬ |W−κ|² ∂ₜφ + Σⱼ ⟨W−κ, Bⱼ(W−κ)⟩ ∂ⱼφ  dt dx  +  ∫ |W⁰−κ|² φ(0,·) dx  ≥ 0
//! ```
//!
//! evaluated by midpoint quadrature in space and the trapezoid rule over
//! uniformly spaced snapshots in time. Derivatives of φ are centred
//! differences on the same space-time lattice, so the discrete support of φ
//! used by the budget is every cell where φ or a difference quotient is
//! nonzero.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::test_function::{cone_test_function, TestFunction};
use super::VerifyError;
use crate::convex::ConvexSet;
use crate::grid::Field;
use crate::scalar::{pairwise_sum, Scalar};
use crate::solver::RunReport;
use crate::system::FriedrichsSystem;

/// Residual budget constant.
pub const DEFAULT_RESIDUAL_CONSTANT: f64 = 4.0;

#[derive(Debug, Clone, PartialEq)]
pub struct EntropyReport<T> {
    pub kappa: Vec<T>,
    pub phi: TestFunction<T>,
    /// Left-hand side of the inequality.
    pub value: T,
    pub budget: T,
    pub pass: bool,
}

/// Evaluates the residual for one `(κ, φ)` pair.
///
/// `snapshots` must start at `t = 0` and be uniformly spaced.
pub fn entropy_residual<T: Scalar>(
    snapshots: &[&Field<T>],
    initial: &Field<T>,
    kappa: &[T],
    phi: &TestFunction<T>,
    sys: &FriedrichsSystem<T>,
    k: &ConvexSet<T>,
    residual_constant: T,
) -> Result<EntropyReport<T>, VerifyError> {
    if !k.contains(kappa, T::zero())? {
        return Err(VerifyError::KappaOutsideK);
    }
    if snapshots.len() < 2 {
        return Err(VerifyError::BadParameters("need at least two snapshots".into()));
    }
    let grid = *initial.grid();
    let times: Vec<T> = snapshots.iter().map(|s| s.time()).collect();
    let spacing = times[1] - times[0];
    let uniform = times
        .windows(2)
        .all(|w| ((w[1] - w[0]) - spacing).abs() <= T::lit(1e-9) * spacing.max(T::one()));
    if times[0] != T::zero() || !uniform || !(spacing > T::zero()) {
        return Err(VerifyError::BadParameters(
            "snapshots must start at t = 0 and be uniformly spaced".into(),
        ));
    }
    let h = grid.h();
    let n = grid.dim();
    let volume = grid.cell_volume();
    let last = times.len() - 1;
    let two = T::lit(2.0);

    let mut diff = vec![T::zero(); sys.state_size()];
    let mut layer_integrals = Vec::with_capacity(times.len());
    let mut layer_support = Vec::with_capacity(times.len());
    let mut worst = T::zero();
    for (idx, field) in snapshots.iter().enumerate() {
        let t = times[idx];
        let mut terms = Vec::with_capacity(grid.num_cells());
        let mut supported = 0usize;
        for cell in 0..grid.num_cells() {
            let x = grid.coords(cell);
            let phi_here = phi.eval(t, &x);
            let dt_phi = if idx == 0 {
                (phi.eval(times[1], &x) - phi_here) / spacing
            } else if idx == last {
                (phi_here - phi.eval(times[last - 1], &x)) / spacing
            } else {
                (phi.eval(times[idx + 1], &x) - phi.eval(times[idx - 1], &x)) / (two * spacing)
            };
            let mut grad = Vec::with_capacity(n);
            let mut probe = x.clone();
            for j in 0..n {
                probe[j] = x[j] + h;
                let fwd = phi.eval(t, &probe);
                probe[j] = x[j] - h;
                let bwd = phi.eval(t, &probe);
                probe[j] = x[j];
                grad.push((fwd - bwd) / (two * h));
            }
            if phi_here == T::zero() && dt_phi == T::zero() && grad.iter().all(|g| *g == T::zero()) {
                continue;
            }
            for ((d, &w), &kk) in diff.iter_mut().zip(field.cell(cell)).zip(kappa) {
                *d = w - kk;
            }
            let sq = crate::scalar::dot(&diff, &diff);
            supported += 1;
            worst = worst.max(sq);
            let mut integrand = sq * dt_phi;
            for (j, g) in grad.iter().enumerate() {
                integrand = integrand + sys.flux_form(j, &diff) * *g;
            }
            terms.push(integrand);
        }
        layer_integrals.push(pairwise_sum(&terms) * volume);
        layer_support.push(T::from_usize_lossy(supported) * volume);
    }
    let bulk = crate::solver::trapezoid(&times, &layer_integrals);
    let support_measure = crate::solver::trapezoid(&times, &layer_support);

    let mut initial_terms = Vec::new();
    for cell in 0..grid.num_cells() {
        let weight = phi.eval(T::zero(), &grid.coords(cell));
        if weight == T::zero() {
            continue;
        }
        for ((d, &w), &kk) in diff.iter_mut().zip(initial.cell(cell)).zip(kappa) {
            *d = w - kk;
        }
        let sq = crate::scalar::dot(&diff, &diff);
        worst = worst.max(sq);
        initial_terms.push(sq * weight);
    }
    let value = bulk + pairwise_sum(&initial_terms) * volume;
    let scale = worst * (T::one() + sys.speed_bound()) * support_measure;
    let budget = residual_constant * (h + spacing) * scale;
    Ok(EntropyReport {
        kappa: kappa.to_vec(),
        phi: phi.clone(),
        value,
        budget,
        pass: value >= -budget,
    })
}

/// Finite surrogate for "every κ ∈ K": the anchor, points at `±0.9·margin`
/// along each constrained axis, and the boundary point on each constrained
/// axis. An axis is constrained when the ray from the anchor along it leaves
/// `K`.
pub fn kappa_samples<T: Scalar>(k: &ConvexSet<T>) -> Result<Vec<Vec<T>>, VerifyError> {
    let m = k.dim();
    let anchor = k.anchor().to_vec();
    let limit = T::lit(1e6) * (T::one() + k.margin());
    let step = T::lit(0.9) * k.margin();
    let mut out = vec![anchor.clone()];
    for axis in 0..m {
        let mut dir = vec![T::zero(); m];
        dir[axis] = T::one();
        let forward = k.ray_exit(&dir, limit)?;
        dir[axis] = -T::one();
        let backward = k.ray_exit(&dir, limit)?;
        if forward.is_none() && backward.is_none() {
            continue;
        }
        for sign in [T::one(), -T::one()] {
            let mut p = anchor.clone();
            p[axis] = p[axis] + sign * step;
            out.push(p);
        }
        let mut boundary = anchor.clone();
        match (forward, backward) {
            (Some(s), _) => boundary[axis] = boundary[axis] + s,
            (None, Some(s)) => boundary[axis] = boundary[axis] - s,
            (None, None) => unreachable!(),
        }
        out.push(boundary);
    }
    Ok(out)
}

/// Cones at three radii plus `bumps` seeded random interior bumps, all
/// supported inside the grid box for the whole horizon.
pub fn test_function_family<T: Scalar>(
    report: &RunReport<T>,
    sys: &FriedrichsSystem<T>,
    bumps: usize,
    seed: u64,
) -> Vec<TestFunction<T>> {
    let grid = report.grid;
    let horizon = report.config.final_time;
    let n = grid.dim();
    let h = grid.h();
    let room = grid.extent() - T::lit(2.0) * h;
    let mut family = Vec::new();
    let spread = T::from_usize_lossy(n) * sys.speed_bound() * horizon;
    if sys.speed_bound() > T::zero() && room > spread {
        for frac in [0.25, 0.5, 0.75] {
            if let Some(cone) = cone_test_function(T::lit(frac) * (room - spread), sys.speed_bound(), horizon, n) {
                family.push(cone);
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let max_radius = (room * T::lit(0.25)).max(T::lit(8.0) * h);
    for _ in 0..bumps {
        let radius = T::lit(4.0) * h + (max_radius - T::lit(4.0) * h) * T::lit(rng.gen::<f64>());
        let reach = (room - radius).max(T::zero()) / T::from_usize_lossy(n).sqrt();
        let center = (0..n)
            .map(|_| reach * T::lit(2.0 * rng.gen::<f64>() - 1.0))
            .collect();
        family.push(TestFunction::Bump {
            center,
            radius,
            amplitude: T::one(),
            horizon,
        });
    }
    family
}

/// Every `(κ, φ)` pair of the sampled families against one run.
pub fn entropy_check_family<T: Scalar>(
    report: &RunReport<T>,
    sys: &FriedrichsSystem<T>,
    k: &ConvexSet<T>,
    bumps: usize,
    seed: u64,
    residual_constant: T,
) -> Result<Vec<EntropyReport<T>>, VerifyError> {
    let snapshots: Vec<&Field<T>> = report.snapshots.iter().map(|s| &s.field).collect();
    let mut out = Vec::new();
    for kappa in kappa_samples(k)? {
        for phi in test_function_family(report, sys, bumps, seed) {
            out.push(entropy_residual(
                &snapshots,
                report.initial_field(),
                &kappa,
                &phi,
                sys,
                k,
                residual_constant,
            )?);
        }
    }
    Ok(out)
}
