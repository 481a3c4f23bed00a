//! Random closed convex plane sets described by membership predicates, and
//! the projection properties every nearest-point map onto them must satisfy.
//!
//! Each property takes points already projected by the code under test and
//! returns a description of the violation, if any.

use proptest::prelude::*;

use crate::grid_search_projection_2d;

/// Plane sets that hold a ball of radius at least 0.1 around the origin.
#[derive(Debug, Clone)]
pub enum PlanarSet {
    Ball([f64; 2], f64),
    Rect([f64; 2], [f64; 2]),
    /// `⟨normal, y⟩ ≤ offset` with a unit normal.
    Half([f64; 2], f64),
    /// `lo ≤ y[axis] ≤ hi`.
    Slab(usize, f64, f64),
    /// One coordinate confined to the interval `center ± radius`.
    Cyl(usize, f64, f64),
    Inter(Vec<PlanarSet>),
}

impl PlanarSet {
    pub fn inside(&self, y: &[f64]) -> bool {
        match self {
            PlanarSet::Ball(c, r) => (y[0] - c[0]).powi(2) + (y[1] - c[1]).powi(2) <= r * r,
            PlanarSet::Rect(lo, hi) => (0..2).all(|i| lo[i] <= y[i] && y[i] <= hi[i]),
            PlanarSet::Half(n, off) => n[0] * y[0] + n[1] * y[1] <= *off,
            PlanarSet::Slab(a, lo, hi) => *lo <= y[*a] && y[*a] <= *hi,
            PlanarSet::Cyl(i, c, r) => (y[*i] - c).abs() <= *r,
            PlanarSet::Inter(ms) => ms.iter().all(|m| m.inside(y)),
        }
    }
}

fn simple() -> impl Strategy<Value = PlanarSet> {
    prop_oneof![
        ([-1.0..1.0, -1.0..1.0f64], 0.2..2.0f64).prop_map(|(c, extra)| {
            let r = c[0].hypot(c[1]) + extra;
            PlanarSet::Ball(c, r)
        }),
        ([-2.0..-0.2, -2.0..-0.2f64], [0.2..2.0, 0.2..2.0f64]).prop_map(|(lo, hi)| PlanarSet::Rect(lo, hi)),
        (0.0..std::f64::consts::TAU, 0.2..2.0f64).prop_map(|(a, off)| PlanarSet::Half([a.cos(), a.sin()], off)),
        (0..2usize, -2.0..-0.2f64, 0.2..2.0f64).prop_map(|(a, lo, hi)| PlanarSet::Slab(a, lo, hi)),
        (0..2usize, -1.0..1.0f64, 0.2..1.5f64).prop_map(|(i, c, extra)| PlanarSet::Cyl(i, c, c.abs() + extra)),
    ]
}

/// Single sets and intersections of two or three, in a 2:1 ratio.
pub fn planar_set() -> impl Strategy<Value = PlanarSet> {
    prop_oneof![
        2 => simple(),
        1 => prop::collection::vec(simple(), 2..4).prop_map(PlanarSet::Inter),
    ]
}

pub fn point() -> impl Strategy<Value = [f64; 2]> {
    [-5.0..5.0f64, -5.0..5.0f64]
}

fn sub(a: &[f64], b: &[f64]) -> [f64; 2] {
    [a[0] - b[0], a[1] - b[1]]
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Allowance for projections computed iteratively to a `1e-10` tolerance.
pub const SLACK: f64 = 1e-8;

/// Largest admissible gap to [`grid_search_projection_2d`].
pub const ORACLE_TOLERANCE: f64 = 2e-3;

type Verdict = Result<(), String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Verdict {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

/// `|Px − Py| ≤ |x − y|`
pub fn nonexpansive(x: &[f64], y: &[f64], px: &[f64], py: &[f64]) -> Verdict {
    let (lhs, rhs) = (norm(&sub(px, py)), norm(&sub(x, y)));
    ensure(lhs <= rhs + SLACK, || format!("|Px-Py| = {lhs} > |x-y| = {rhs}"))
}

/// `|Px − Py|² ≤ ⟨Px − Py, x − y⟩`
pub fn firmly_nonexpansive(x: &[f64], y: &[f64], px: &[f64], py: &[f64]) -> Verdict {
    let d = sub(px, py);
    let (lhs, rhs) = (dot(&d, &d), dot(&d, &sub(x, y)));
    ensure(lhs <= rhs + SLACK * (1.0 + norm(&sub(x, y))), || {
        format!("|Px-Py|^2 = {lhs} > <Px-Py, x-y> = {rhs}")
    })
}

/// `⟨x − Px, k − Px⟩ ≤ 0` for a member `k` of the set.
pub fn variational_inequality(x: &[f64], px: &[f64], member: &[f64]) -> Verdict {
    let lhs = dot(&sub(x, px), &sub(member, px));
    let scale = norm(&sub(x, px)) * norm(&sub(member, px));
    ensure(lhs <= SLACK * (1.0 + scale), || format!("<x-Px, k-Px> = {lhs} > 0"))
}

/// `P(Px) = Px`, `Px ∈ K`, and `Px = x` for `x ∈ K`.
pub fn idempotent_and_inside(set: &PlanarSet, x: &[f64], px: &[f64], ppx: &[f64]) -> Verdict {
    ensure(norm(&sub(px, ppx)) <= SLACK, || format!("P(Px) = {ppx:?} differs from Px = {px:?}"))?;
    // the boundary itself may test outside after rounding; pull slightly inward
    let nudged = [px[0] * (1.0 - 1e-7), px[1] * (1.0 - 1e-7)];
    ensure(set.inside(&nudged) || norm(&sub(&nudged, ppx)) < 1e-6, || {
        format!("Px = {px:?} lies outside the set")
    })?;
    ensure(!set.inside(x) || norm(&sub(x, px)) <= SLACK, || format!("x = {x:?} inside but moved to {px:?}"))
}

/// Agreement with the membership-only search.
pub fn matches_search(set: &PlanarSet, x: &[f64], px: &[f64]) -> Verdict {
    let oracle = grid_search_projection_2d(|y| set.inside(y), [0.0, 0.0], x, 100.0, 360);
    let gap = norm(&sub(px, &oracle));
    ensure(gap <= ORACLE_TOLERANCE, || format!("projection {px:?} vs search {oracle:?} (gap {gap})"))
}
