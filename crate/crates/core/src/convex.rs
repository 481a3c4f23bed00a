//! Closed convex constraint sets: projections, distances, membership.
//!
//! [`Shape`] is the bare geometry. [`ConvexSet`] binds a shape to a state
//! dimension and an interior anchor point whose clearance from the boundary
//! is checked when the set is built; the solver relies on the anchor (by
//! default the origin) lying strictly inside the constraint.
//!
//! Every shape except [`Shape::Intersection`] has a closed-form projection.
//! Intersections are projected with Dykstra's algorithm, which converges to
//! the true nearest point rather than merely to some point of the
//! intersection.

use crate::scalar::{dist, dot, norm, Scalar};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConvexError {
    #[error("Dykstra projection did not converge in {iterations} sweeps (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },
    #[error("ill-formed set: {0}")]
    Malformed(String),
    #[error("anchor is not an interior point (clearance {clearance:e})")]
    EmptyInterior { clearance: f64 },
}

/// Stopping rule for iterative projections.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectionOptions<T> {
    pub tol: T,
    pub max_iter: usize,
}

pub const DYKSTRA_MAX_ITER: usize = 10_000;

impl<T: Scalar> Default for ProjectionOptions<T> {
    fn default() -> Self {
        Self {
            tol: T::default_projection_tol(),
            max_iter: DYKSTRA_MAX_ITER,
        }
    }
}

/// Geometry of a closed convex set in ℝᵐ. Component indices are 0-based.
#[derive(Debug, Clone, PartialEq)]
pub enum Shape<T> {
    Ball { center: Vec<T>, radius: T },
    Box { lo: Vec<T>, hi: Vec<T> },
    /// `{x : ⟨normal, x⟩ ≤ offset}` with a unit normal.
    HalfSpace { normal: Vec<T>, offset: T },
    /// `{x : lo ≤ x[axis] ≤ hi}`; every other component is free.
    Slab { axis: usize, lo: T, hi: T },
    /// `{x : x|indices ∈ inner}`; components outside `indices` are free.
    Cylinder { indices: Vec<usize>, inner: Box<Shape<T>> },
    Intersection { members: Vec<Shape<T>> },
}

impl<T: Scalar> Shape<T> {
    pub fn ball(center: Vec<T>, radius: T) -> Self {
        Shape::Ball { center, radius }
    }

    pub fn cube(lo: Vec<T>, hi: Vec<T>) -> Self {
        Shape::Box { lo, hi }
    }

    pub fn half_space(normal: Vec<T>, offset: T) -> Self {
        Shape::HalfSpace { normal, offset }
    }

    pub fn slab(axis: usize, lo: T, hi: T) -> Self {
        Shape::Slab { axis, lo, hi }
    }

    pub fn cylinder(indices: Vec<usize>, inner: Shape<T>) -> Self {
        Shape::Cylinder {
            indices,
            inner: Box::new(inner),
        }
    }

    pub fn intersection(members: Vec<Shape<T>>) -> Self {
        Shape::Intersection { members }
    }

    /// Checks the shape is well formed for states of length `dim`.
    pub fn validate(&self, dim: usize) -> Result<(), ConvexError> {
        let bad = |msg: String| Err(ConvexError::Malformed(msg));
        match self {
            Shape::Ball { center, radius } => {
                if center.len() != dim {
                    return bad(format!("ball center has length {}, expected {dim}", center.len()));
                }
                if !(*radius >= T::zero()) || center.iter().any(|c| !c.is_finite()) {
                    return bad("ball radius must be a nonnegative finite number".into());
                }
            }
            Shape::Box { lo, hi } => {
                if lo.len() != dim || hi.len() != dim {
                    return bad(format!("box bounds must have length {dim}"));
                }
                if lo.iter().zip(hi).any(|(l, h)| !(l <= h)) {
                    return bad("box requires lo <= hi componentwise".into());
                }
            }
            Shape::HalfSpace { normal, offset } => {
                if normal.len() != dim {
                    return bad(format!("half-space normal must have length {dim}"));
                }
                if (norm(normal) - T::one()).abs() > T::lit(1e-12).max(T::lit(8.0) * T::epsilon())
                    || !offset.is_finite()
                {
                    return bad("half-space normal must have unit length".into());
                }
            }
            Shape::Slab { axis, lo, hi } => {
                if *axis >= dim {
                    return bad(format!("slab axis {axis} out of range for dimension {dim}"));
                }
                if !(lo <= hi) {
                    return bad("slab requires lo <= hi".into());
                }
            }
            Shape::Cylinder { indices, inner } => {
                if indices.is_empty() || indices.windows(2).any(|w| w[0] >= w[1]) {
                    return bad("cylinder indices must be nonempty, distinct and sorted".into());
                }
                if indices.iter().any(|&i| i >= dim) {
                    return bad(format!("cylinder index out of range for dimension {dim}"));
                }
                inner.validate(indices.len())?;
            }
            Shape::Intersection { members } => {
                if members.is_empty() {
                    return bad("intersection needs at least one member".into());
                }
                for m in members {
                    m.validate(dim)?;
                }
            }
        }
        Ok(())
    }

    /// Radius of the largest ball around `point` contained in the shape;
    /// negative when `point` lies outside.
    pub fn clearance(&self, point: &[T]) -> T {
        match self {
            Shape::Ball { center, radius } => *radius - dist(point, center),
            Shape::Box { lo, hi } => point
                .iter()
                .zip(lo.iter().zip(hi))
                .fold(T::infinity(), |m, (&x, (&l, &h))| m.min(x - l).min(h - x)),
            Shape::HalfSpace { normal, offset } => *offset - dot(normal, point),
            Shape::Slab { axis, lo, hi } => (point[*axis] - *lo).min(*hi - point[*axis]),
            Shape::Cylinder { indices, inner } => inner.clearance(&gather(point, indices)),
            Shape::Intersection { members } => members
                .iter()
                .fold(T::infinity(), |m, s| m.min(s.clearance(point))),
        }
    }

    /// Nearest point of the shape to `x`.
    pub fn project(&self, x: &[T], opts: &ProjectionOptions<T>) -> Result<Vec<T>, ConvexError> {
        Ok(match self {
            Shape::Ball { center, radius } => {
                let d = dist(x, center);
                if d <= *radius {
                    x.to_vec()
                } else {
                    let s = *radius / d;
                    center
                        .iter()
                        .zip(x)
                        .map(|(&c, &xi)| c + (xi - c) * s)
                        .collect()
                }
            }
            Shape::Box { lo, hi } => x
                .iter()
                .zip(lo.iter().zip(hi))
                .map(|(&xi, (&l, &h))| xi.max(l).min(h))
                .collect(),
            Shape::HalfSpace { normal, offset } => {
                let excess = dot(normal, x) - *offset;
                if excess <= T::zero() {
                    x.to_vec()
                } else {
                    x.iter().zip(normal).map(|(&xi, &ni)| xi - excess * ni).collect()
                }
            }
            Shape::Slab { axis, lo, hi } => {
                let mut p = x.to_vec();
                p[*axis] = p[*axis].max(*lo).min(*hi);
                p
            }
            Shape::Cylinder { indices, inner } => {
                let sub = inner.project(&gather(x, indices), opts)?;
                let mut p = x.to_vec();
                for (&i, v) in indices.iter().zip(sub) {
                    p[i] = v;
                }
                p
            }
            Shape::Intersection { members } => {
                if members.len() == 1 {
                    members[0].project(x, opts)?
                } else {
                    dykstra(members, x, opts.tol, opts.max_iter)?
                }
            }
        })
    }

    pub fn distance(&self, x: &[T], opts: &ProjectionOptions<T>) -> Result<T, ConvexError> {
        Ok(dist(x, &self.project(x, opts)?))
    }

    pub fn contains(&self, x: &[T], tol: T, opts: &ProjectionOptions<T>) -> Result<bool, ConvexError> {
        Ok(self.distance(x, opts)? <= tol)
    }
}

fn gather<T: Copy>(x: &[T], indices: &[usize]) -> Vec<T> {
    indices.iter().map(|&i| x[i]).collect()
}

/// Dykstra's alternating projection onto `∩ members`.
///
/// Stops once a full sweep moves neither the iterate nor any correction
/// increment by more than `tol / 10` and every member is within `tol`. The
/// iterate alone can stall for many sweeps while the increments still move.
pub fn dykstra<T: Scalar>(
    members: &[Shape<T>],
    x: &[T],
    tol: T,
    max_iter: usize,
) -> Result<Vec<T>, ConvexError> {
    let inner_opts = ProjectionOptions { tol, max_iter };
    let mut current = x.to_vec();
    let mut increments = vec![vec![T::zero(); x.len()]; members.len()];
    let mut shifted = vec![T::zero(); x.len()];
    let change_tol = tol / T::lit(10.0);
    let mut residual = T::infinity();

    for _ in 0..max_iter {
        let start = current.clone();
        let mut change = T::zero();
        for (set, inc) in members.iter().zip(increments.iter_mut()) {
            for ((s, &c), &i) in shifted.iter_mut().zip(&current).zip(inc.iter()) {
                *s = c + i;
            }
            let y = set.project(&shifted, &inner_opts)?;
            let mut moved = T::zero();
            for ((i, &s), &yk) in inc.iter_mut().zip(&shifted).zip(&y) {
                let next = s - yk;
                moved = moved + (next - *i) * (next - *i);
                *i = next;
            }
            change = change.max(moved.sqrt());
            current = y;
        }
        change = change.max(dist(&start, &current));
        let mut worst = T::zero();
        for set in members {
            worst = worst.max(set.distance(&current, &inner_opts)?);
        }
        residual = change.max(worst);
        if change < change_tol && worst < tol {
            return Ok(current);
        }
    }
    Err(ConvexError::NonConvergence {
        iterations: max_iter,
        residual: residual.as_f64(),
    })
}

/// A validated constraint set with a checked interior anchor.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexSet<T> {
    shape: Shape<T>,
    dim: usize,
    anchor: Vec<T>,
    clearance: T,
    options: ProjectionOptions<T>,
}

impl<T: Scalar> ConvexSet<T> {
    /// Anchored at the origin.
    pub fn new(shape: Shape<T>, dim: usize) -> Result<Self, ConvexError> {
        Self::with_anchor(shape, vec![T::zero(); dim])
    }

    pub fn with_anchor(shape: Shape<T>, anchor: Vec<T>) -> Result<Self, ConvexError> {
        let set = Self::build(shape, anchor)?;
        if !(set.clearance > T::zero()) {
            return Err(ConvexError::EmptyInterior {
                clearance: set.clearance.as_f64(),
            });
        }
        Ok(set)
    }

    /// Skips the interior check; degenerate sets (a point, a flat box) are
    /// accepted as long as the anchor belongs to them.
    pub fn allow_empty_interior(shape: Shape<T>, anchor: Vec<T>) -> Result<Self, ConvexError> {
        let set = Self::build(shape, anchor)?;
        if set.clearance < -T::default_projection_tol() {
            return Err(ConvexError::EmptyInterior {
                clearance: set.clearance.as_f64(),
            });
        }
        Ok(set)
    }

    fn build(shape: Shape<T>, anchor: Vec<T>) -> Result<Self, ConvexError> {
        let dim = anchor.len();
        shape.validate(dim)?;
        let clearance = shape.clearance(&anchor);
        Ok(Self {
            shape,
            dim,
            anchor,
            clearance,
            options: ProjectionOptions::default(),
        })
    }

    pub fn with_options(mut self, options: ProjectionOptions<T>) -> Self {
        self.options = options;
        self
    }

    pub fn shape(&self) -> &Shape<T> {
        &self.shape
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn anchor(&self) -> &[T] {
        &self.anchor
    }

    /// Clearance of the anchor from the boundary.
    pub fn margin(&self) -> T {
        self.clearance
    }

    pub fn options(&self) -> &ProjectionOptions<T> {
        &self.options
    }

    pub fn project(&self, x: &[T]) -> Result<Vec<T>, ConvexError> {
        debug_assert_eq!(x.len(), self.dim);
        self.shape.project(x, &self.options)
    }

    pub fn distance(&self, x: &[T]) -> Result<T, ConvexError> {
        self.shape.distance(x, &self.options)
    }

    pub fn contains(&self, x: &[T], tol: T) -> Result<bool, ConvexError> {
        self.shape.contains(x, tol, &self.options)
    }

    /// Largest `s ≥ 0` with `anchor + s·dir ∈ K`, or `None` if the ray never
    /// leaves `K` within `limit`.
    pub fn ray_exit(&self, dir: &[T], limit: T) -> Result<Option<T>, ConvexError> {
        let at = |s: T| -> Vec<T> {
            self.anchor
                .iter()
                .zip(dir)
                .map(|(&a, &d)| a + s * d)
                .collect()
        };
        if self.contains(&at(limit), T::zero())? {
            return Ok(None);
        }
        let (mut inside, mut outside) = (T::zero(), limit);
        for _ in 0..200 {
            let mid = (inside + outside) / T::lit(2.0);
            if mid <= inside || mid >= outside {
                break;
            }
            if self.contains(&at(mid), T::zero())? {
                inside = mid;
            } else {
                outside = mid;
            }
        }
        Ok(Some(inside))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts() -> ProjectionOptions<f64> {
        ProjectionOptions::default()
    }

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        dist(a, b) <= tol
    }

    #[test]
    fn membership_examples() {
        let ball = Shape::ball(vec![0.0, 0.0], 1.0);
        assert!(ball.contains(&[0.5, 0.0], 0.0, &opts()).unwrap());
        assert!(!ball.contains(&[2.0, 0.0], 0.0, &opts()).unwrap());
        let slab = Shape::slab(0, -1.0, 1.0);
        assert!(slab.contains(&[0.3, 99.0], 0.0, &opts()).unwrap());
    }

    #[test]
    fn closed_form_projections() {
        let ball = Shape::ball(vec![0.0, 0.0], 1.0);
        assert_eq!(ball.project(&[2.0, 0.0], &opts()).unwrap(), vec![1.0, 0.0]);
        let cube = Shape::cube(vec![-1.0, -1.0], vec![1.0, 1.0]);
        assert_eq!(cube.project(&[2.0, 3.0], &opts()).unwrap(), vec![1.0, 1.0]);
        let cyl = Shape::cylinder(vec![1], Shape::slab(0, -1.0, 1.0));
        assert_eq!(cyl.project(&[7.0, 3.0], &opts()).unwrap(), vec![7.0, 1.0]);
        let hs = Shape::half_space(vec![1.0, 0.0], 0.0);
        assert_eq!(hs.project(&[2.0, 5.0], &opts()).unwrap(), vec![0.0, 5.0]);
    }

    #[test]
    fn distance_examples() {
        let ball = Shape::ball(vec![0.0, 0.0], 1.0);
        assert_eq!(ball.distance(&[2.0, 0.0], &opts()).unwrap(), 1.0);
        let cube = Shape::cube(vec![0.0, 0.0], vec![1.0, 1.0]);
        let d = cube.distance(&[2.0, 2.0], &opts()).unwrap();
        assert!((d - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn dykstra_examples() {
        let p = dykstra(&[Shape::ball(vec![0.0, 0.0], 1.0)], &[3.0, 4.0], 1e-10, 10_000).unwrap();
        assert!(close(&p, &[0.6, 0.8], 1e-12));

        let orthant = [
            Shape::half_space(vec![1.0, 0.0], 0.0),
            Shape::half_space(vec![0.0, 1.0], 0.0),
        ];
        let p = dykstra(&orthant, &[1.0, 1.0], 1e-10, 10_000).unwrap();
        assert!(close(&p, &[0.0, 0.0], 1e-10));

        let lens = [
            Shape::ball(vec![0.0, 0.0], 1.0),
            Shape::cube(vec![0.0, -2.0], vec![2.0, 2.0]),
        ];
        let p = dykstra(&lens, &[-1.0, 0.5], 1e-10, 10_000).unwrap();
        assert!(close(&p, &[0.0, 0.5], 1e-9), "{p:?}");
    }

    #[test]
    fn intersection_with_half_space() {
        let set = Shape::intersection(vec![
            Shape::ball(vec![0.0, 0.0], 1.0),
            Shape::half_space(vec![-1.0, 0.0], -0.5),
        ]);
        let p = set.project(&[2.0, 0.0], &opts()).unwrap();
        assert!(close(&p, &[1.0, 0.0], 1e-10));
    }

    #[test]
    fn dykstra_reports_nonconvergence() {
        let lens = [
            Shape::ball(vec![0.0, 0.0], 1.0),
            Shape::cube(vec![0.0, -2.0], vec![2.0, 2.0]),
        ];
        let err = dykstra(&lens, &[-1.0, 0.5], 1e-10, 1).unwrap_err();
        assert!(matches!(err, ConvexError::NonConvergence { iterations: 1, .. }));
    }

    #[test]
    fn anchor_checks() {
        let set = ConvexSet::new(Shape::ball(vec![0.0, 0.0], 1.0), 2).unwrap();
        assert_eq!(set.margin(), 1.0);
        assert_eq!(set.distance(set.anchor()).unwrap(), 0.0);

        let point = Shape::ball(vec![0.0, 0.0], 0.0);
        assert!(matches!(
            ConvexSet::new(point.clone(), 2),
            Err(ConvexError::EmptyInterior { .. })
        ));
        let degenerate = ConvexSet::allow_empty_interior(point, vec![0.0, 0.0]).unwrap();
        assert_eq!(degenerate.project(&[3.0, 4.0]).unwrap(), vec![0.0, 0.0]);

        let flat = Shape::cube(vec![0.0, -1.0], vec![0.0, 1.0]);
        assert!(ConvexSet::new(flat.clone(), 2).is_err());
        assert!(ConvexSet::allow_empty_interior(flat, vec![0.0, 0.0]).is_ok());
    }

    #[test]
    fn validation_errors() {
        assert!(Shape::ball(vec![0.0], -1.0).validate(1).is_err());
        assert!(Shape::cube(vec![1.0], vec![0.0]).validate(1).is_err());
        assert!(Shape::half_space(vec![2.0, 0.0], 1.0).validate(2).is_err());
        assert!(Shape::<f64>::slab(2, -1.0, 1.0).validate(2).is_err());
        assert!(Shape::cylinder(vec![1, 0], Shape::ball(vec![0.0, 0.0], 1.0))
            .validate(2)
            .is_err());
        assert!(Shape::<f64>::intersection(vec![]).validate(2).is_err());
        assert!(Shape::cylinder(vec![1], Shape::slab(0, -1.0, 1.0)).validate(2).is_ok());
    }

    #[test]
    fn clearance_of_nested_sets() {
        let set = Shape::intersection(vec![
            Shape::cylinder(vec![1], Shape::slab(0, -0.5, 0.5)),
            Shape::ball(vec![0.0, 0.0], 3.0),
        ]);
        assert_eq!(set.clearance(&[0.0, 0.0]), 0.5);
        assert_eq!(set.clearance(&[0.0, 0.75]), -0.25);
    }

    #[test]
    fn ray_exit_finds_boundary() {
        let set = ConvexSet::new(Shape::cylinder(vec![1], Shape::slab(0, -0.5, 0.5)), 2).unwrap();
        let s: f64 = set.ray_exit(&[0.0, 1.0], 1e6).unwrap().unwrap();
        assert!((s - 0.5).abs() < 1e-12);
        assert_eq!(set.ray_exit(&[1.0, 0.0], 1e6).unwrap(), None);
    }
}
