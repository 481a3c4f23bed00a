//! Constant-coefficient symmetric hyperbolic systems `∂ₜW + Σⱼ Bⱼ ∂ⱼW = 0`.

use crate::convex::{ConvexError, ConvexSet, Shape};
use crate::linalg::{symmetric_eigen, EigFailure, Matrix, SymmetricEigen};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SystemError {
    #[error("coefficient matrix {direction} is not symmetric (asymmetry {asymmetry:e})")]
    NonSymmetric { direction: usize, asymmetry: f64 },
    #[error("bad parameter: {0}")]
    BadParameter(String),
    #[error(transparent)]
    Eig(#[from] EigFailure),
    #[error("eigendecomposition of direction {direction} failed its accuracy check")]
    InaccurateEigen { direction: usize },
    #[error(transparent)]
    Constraint(#[from] ConvexError),
}

/// Validated system with per-direction characteristic decompositions.
#[derive(Debug, Clone)]
pub struct FriedrichsSystem<T> {
    label: String,
    state_size: usize,
    matrices: Vec<Matrix<T>>,
    eigen: Vec<SymmetricEigen<T>>,
    speed: T,
}

impl<T: Scalar> FriedrichsSystem<T> {
    /// One matrix per space direction; only 1 and 2 directions are supported.
    pub fn new(label: impl Into<String>, matrices: Vec<Matrix<T>>) -> Result<Self, SystemError> {
        if matrices.is_empty() || matrices.len() > 2 {
            return Err(SystemError::BadParameter(format!(
                "space dimension must be 1 or 2, got {}",
                matrices.len()
            )));
        }
        let state_size = matrices[0].size();
        if state_size == 0 || matrices.iter().any(|b| b.size() != state_size) {
            return Err(SystemError::BadParameter(
                "coefficient matrices must share a nonzero size".into(),
            ));
        }
        let mut eigen = Vec::with_capacity(matrices.len());
        for (direction, b) in matrices.iter().enumerate() {
            if b.max_abs().is_nan() || !b.max_abs().is_finite() {
                return Err(SystemError::BadParameter("non-finite coefficient".into()));
            }
            let scale = T::one().max(b.max_abs());
            let asymmetry = b.asymmetry();
            if asymmetry > T::lit(1e-12) * scale {
                return Err(SystemError::NonSymmetric {
                    direction,
                    asymmetry: asymmetry.as_f64(),
                });
            }
            let e = symmetric_eigen(b)?;
            let tol = T::lit(1e-10).max(T::lit(64.0) * T::epsilon());
            if e.orthogonality_defect() > tol || e.reconstruct().max_abs_diff(b) > tol * scale {
                return Err(SystemError::InaccurateEigen { direction });
            }
            eigen.push(e);
        }
        let speed = eigen
            .iter()
            .fold(T::zero(), |m, e| m.max(e.spectral_radius()));
        Ok(Self {
            label: label.into(),
            state_size,
            matrices,
            eigen,
            speed,
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Space dimension `n`.
    pub fn dim(&self) -> usize {
        self.matrices.len()
    }

    /// State size `m`.
    pub fn state_size(&self) -> usize {
        self.state_size
    }

    pub fn matrix(&self, direction: usize) -> &Matrix<T> {
        &self.matrices[direction]
    }

    pub fn matrices(&self) -> &[Matrix<T>] {
        &self.matrices
    }

    /// Maximum over directions of the spectral radius of `Bⱼ`.
    pub fn speed_bound(&self) -> T {
        self.speed
    }

    /// `(Q, Λ)` with ascending `Λ` and first nonzero entry of each column of
    /// `Q` positive.
    pub fn characteristic_decompose(&self, direction: usize) -> &SymmetricEigen<T> {
        &self.eigen[direction]
    }

    /// `⟨v, Bⱼ v⟩`
    pub fn flux_form(&self, direction: usize, v: &[T]) -> T {
        let mut bv = vec![T::zero(); self.state_size];
        self.matrices[direction].apply(v, &mut bv);
        crate::scalar::dot(v, &bv)
    }
}

/// Model catalogue.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelSpec<T> {
    /// Scalar transport, one speed per space direction.
    Advection { speeds: Vec<T> },
    /// 1D shear wave in `(v, w)` with `w = σ/√μ`.
    Wave1D { shear_modulus: T },
    /// [`ModelSpec::Wave1D`] plus the yield constraint `|σ| ≤ σ_Y`.
    ElastoPlastic1D { shear_modulus: T, yield_stress: T },
    Custom {
        matrices: Vec<Matrix<T>>,
        constraint: Option<Shape<T>>,
    },
}

/// A built model: system plus the constraint the model itself prescribes.
#[derive(Debug, Clone)]
pub struct Model<T> {
    pub system: FriedrichsSystem<T>,
    pub constraint: Option<ConvexSet<T>>,
}

fn positive<T: Scalar>(name: &str, x: T) -> Result<(), SystemError> {
    if x > T::zero() && x.is_finite() {
        Ok(())
    } else {
        Err(SystemError::BadParameter(format!("{name} must be positive, got {x}")))
    }
}

/// `−√μ·[[0,1],[1,0]]`: `∂ₜv = ∂ₓσ`, `∂ₜσ = μ ∂ₓv` in the scaled variables.
fn shear_matrix<T: Scalar>(shear_modulus: T) -> Matrix<T> {
    let c = shear_modulus.sqrt();
    Matrix::from_rows(&[vec![T::zero(), -c], vec![-c, T::zero()]]).expect("square")
}

impl<T: Scalar> ModelSpec<T> {
    pub fn build(&self) -> Result<Model<T>, SystemError> {
        match self {
            ModelSpec::Advection { speeds } => {
                if speeds.iter().any(|s| !s.is_finite()) {
                    return Err(SystemError::BadParameter("advection speeds must be finite".into()));
                }
                let matrices = speeds.iter().map(|&s| Matrix::diag(&[s])).collect();
                Ok(Model {
                    system: FriedrichsSystem::new("advection", matrices)?,
                    constraint: None,
                })
            }
            ModelSpec::Wave1D { shear_modulus } => {
                positive("shear modulus", *shear_modulus)?;
                Ok(Model {
                    system: FriedrichsSystem::new("wave_1d", vec![shear_matrix(*shear_modulus)])?,
                    constraint: None,
                })
            }
            ModelSpec::ElastoPlastic1D {
                shear_modulus,
                yield_stress,
            } => {
                positive("shear modulus", *shear_modulus)?;
                positive("yield stress", *yield_stress)?;
                let bound = *yield_stress / shear_modulus.sqrt();
                let yield_set = Shape::cylinder(vec![1], Shape::slab(0, -bound, bound));
                Ok(Model {
                    system: FriedrichsSystem::new(
                        "elastoplastic_1d",
                        vec![shear_matrix(*shear_modulus)],
                    )?,
                    constraint: Some(ConvexSet::new(yield_set, 2)?),
                })
            }
            ModelSpec::Custom {
                matrices,
                constraint,
            } => {
                let system = FriedrichsSystem::new("custom", matrices.clone())?;
                let constraint = match constraint {
                    Some(shape) => Some(ConvexSet::new(shape.clone(), system.state_size())?),
                    None => None,
                };
                Ok(Model { system, constraint })
            }
        }
    }
}

/// `(v, σ) → (v, σ/√μ)`
pub fn stress_to_state<T: Scalar>(velocity: T, stress: T, shear_modulus: T) -> [T; 2] {
    [velocity, stress / shear_modulus.sqrt()]
}

/// `(v, w) → (v, √μ·w)`
pub fn state_to_stress<T: Scalar>(state: &[T], shear_modulus: T) -> [T; 2] {
    [state[0], state[1] * shear_modulus.sqrt()]
}
