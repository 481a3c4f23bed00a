//! Nonnegative, compactly supported space-time weights.

use crate::scalar::{norm, Scalar};

#[derive(Debug, Clone, PartialEq)]
pub enum TestFunction<T> {
    /// Equals `(T−t)/T` on `B(0, r)` and decays linearly to zero on the
    /// cone `|x| = r + nL(T−t)`, so its support shrinks at exactly the
    /// maximal propagation speed `nL`.
    Cone {
        radius: T,
        speed: T,
        horizon: T,
        dim: usize,
    },
    /// Smooth bump of the given radius around `center`, damped by
    /// `((T−t)/T)²` so it vanishes at the horizon.
    Bump {
        center: Vec<T>,
        radius: T,
        amplitude: T,
        horizon: T,
    },
}

/// The cone weight; `None` unless `radius`, `speed` and `horizon` are positive.
pub fn cone_test_function<T: Scalar>(radius: T, speed: T, horizon: T, dim: usize) -> Option<TestFunction<T>> {
    (radius > T::zero() && speed > T::zero() && horizon > T::zero() && dim > 0).then_some(
        TestFunction::Cone {
            radius,
            speed,
            horizon,
            dim,
        },
    )
}

impl<T: Scalar> TestFunction<T> {
    pub fn horizon(&self) -> T {
        match self {
            TestFunction::Cone { horizon, .. } | TestFunction::Bump { horizon, .. } => *horizon,
        }
    }

    pub fn eval(&self, t: T, x: &[T]) -> T {
        let horizon = self.horizon();
        if t >= horizon || t < T::zero() {
            return T::zero();
        }
        match self {
            TestFunction::Cone {
                radius,
                speed,
                dim,
                ..
            } => {
                let r = norm(x);
                let time_part = (horizon - t) / horizon;
                let spread = T::from_usize_lossy(*dim) * *speed;
                if r <= *radius {
                    time_part
                } else if r <= *radius + spread * (horizon - t) {
                    (time_part + (*radius - r) / (spread * horizon)).max(T::zero())
                } else {
                    T::zero()
                }
            }
            TestFunction::Bump {
                center,
                radius,
                amplitude,
                ..
            } => {
                let s = crate::scalar::dist(x, center) / *radius;
                if s >= T::one() {
                    return T::zero();
                }
                let damp = (horizon - t) / horizon;
                *amplitude * (T::one() - T::one() / (T::one() - s * s)).exp() * damp * damp
            }
        }
    }

    /// Largest `|x|` where the function can be nonzero at any time.
    pub fn outer_radius(&self) -> T {
        match self {
            TestFunction::Cone {
                radius,
                speed,
                horizon,
                dim,
            } => *radius + T::from_usize_lossy(*dim) * *speed * *horizon,
            TestFunction::Bump { center, radius, .. } => norm(center) + *radius,
        }
    }

    pub fn describe(&self) -> String {
        match self {
            TestFunction::Cone { radius, .. } => format!("cone(r={radius})"),
            TestFunction::Bump { center, radius, .. } => {
                let c: Vec<String> = center.iter().map(|c| format!("{:.4}", c.as_f64())).collect();
                format!("bump(c=[{}],R={:.4})", c.join(" "), radius.as_f64())
            }
        }
    }
}
