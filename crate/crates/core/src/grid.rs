//! Uniform Cartesian grids on `[-X, X]ⁿ` and cell-centred fields.
//!
//! The whole space is truncated to the grid box with zero ghost cells. Every
//! operator here treats the exterior as identically zero.

use std::io::{self, Write};

use crate::format::g17;
use crate::scalar::{pairwise_sum, Scalar};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GridError {
    #[error("bad grid: {0}")]
    BadGrid(String),
    #[error("field data has {got} entries, expected {expected}")]
    Shape { got: usize, expected: usize },
    #[error("field holds a non-finite value at cell {cell}")]
    NonFinite { cell: usize },
    #[error("mollifier width {eta:e} is below the cell width {h:e}")]
    KernelUnderresolved { eta: f64, h: f64 },
    #[error("fields live on different grids or have different state sizes")]
    Mismatch,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid<T> {
    dim: usize,
    extent: T,
    cells: usize,
}

impl<T: Scalar> Grid<T> {
    /// `cells` per axis on `[-extent, extent]^dim`.
    pub fn new(dim: usize, extent: T, cells: usize) -> Result<Self, GridError> {
        if !(1..=2).contains(&dim) {
            return Err(GridError::BadGrid(format!("dimension must be 1 or 2, got {dim}")));
        }
        if cells < 4 || !cells.is_multiple_of(2) {
            return Err(GridError::BadGrid(format!(
                "cells per axis must be even and at least 4, got {cells}"
            )));
        }
        if !(extent > T::zero()) || !extent.is_finite() {
            return Err(GridError::BadGrid("extent must be positive".into()));
        }
        Ok(Self { dim, extent, cells })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn extent(&self) -> T {
        self.extent
    }

    pub fn cells_per_axis(&self) -> usize {
        self.cells
    }

    pub fn num_cells(&self) -> usize {
        self.cells.pow(self.dim as u32)
    }

    pub fn h(&self) -> T {
        T::lit(2.0) * self.extent / T::from_usize_lossy(self.cells)
    }

    /// `hⁿ`
    pub fn cell_volume(&self) -> T {
        self.h().powi(self.dim as i32)
    }

    /// Centre of cell `i` along one axis; exactly antisymmetric in `i`.
    pub fn center(&self, i: usize) -> T {
        let k = T::lit(2.0 * i as f64 + 1.0 - self.cells as f64);
        k * self.h() / T::lit(2.0)
    }

    /// Linear-index stride of `axis` (axis 0 varies slowest).
    pub fn stride(&self, axis: usize) -> usize {
        self.cells.pow((self.dim - 1 - axis) as u32)
    }

    pub fn axis_index(&self, cell: usize, axis: usize) -> usize {
        (cell / self.stride(axis)) % self.cells
    }

    /// Neighbour of `cell` at `offset` cells along `axis`; `None` outside.
    #[inline]
    pub fn neighbor(&self, cell: usize, axis: usize, offset: isize) -> Option<usize> {
        let i = self.axis_index(cell, axis) as isize + offset;
        if i < 0 || i >= self.cells as isize {
            None
        } else {
            Some((cell as isize + offset * self.stride(axis) as isize) as usize)
        }
    }

    pub fn coords(&self, cell: usize) -> Vec<T> {
        (0..self.dim)
            .map(|a| self.center(self.axis_index(cell, a)))
            .collect()
    }

    pub fn radius(&self, cell: usize) -> T {
        crate::scalar::norm(&self.coords(cell))
    }
}

/// Membership is decided by the cell centre.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Region<T> {
    All,
    /// `|x| ≤ radius`
    Ball { radius: T },
    /// `inner < |x| ≤ outer`
    Annulus { inner: T, outer: T },
}

impl<T: Scalar> Region<T> {
    pub fn contains_radius(&self, r: T) -> bool {
        match *self {
            Region::All => true,
            Region::Ball { radius } => r <= radius,
            Region::Annulus { inner, outer } => r > inner && r <= outer,
        }
    }
}

/// `m` state components per cell at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct Field<T> {
    grid: Grid<T>,
    state_size: usize,
    time: T,
    data: Vec<T>,
}

impl<T: Scalar> Field<T> {
    pub fn zeros(grid: Grid<T>, state_size: usize) -> Self {
        Self {
            grid,
            state_size,
            time: T::zero(),
            data: vec![T::zero(); grid.num_cells() * state_size],
        }
    }

    pub fn new(grid: Grid<T>, state_size: usize, data: Vec<T>) -> Result<Self, GridError> {
        let expected = grid.num_cells() * state_size;
        if data.len() != expected {
            return Err(GridError::Shape {
                got: data.len(),
                expected,
            });
        }
        let field = Self {
            grid,
            state_size,
            time: T::zero(),
            data,
        };
        field.check_finite()?;
        Ok(field)
    }

    /// Samples `f` at every cell centre.
    pub fn from_fn(
        grid: Grid<T>,
        state_size: usize,
        mut f: impl FnMut(&[T]) -> Vec<T>,
    ) -> Result<Self, GridError> {
        let mut data = Vec::with_capacity(grid.num_cells() * state_size);
        for cell in 0..grid.num_cells() {
            let value = f(&grid.coords(cell));
            if value.len() != state_size {
                return Err(GridError::Shape {
                    got: value.len(),
                    expected: state_size,
                });
            }
            data.extend(value);
        }
        Self::new(grid, state_size, data)
    }

    pub fn check_finite(&self) -> Result<(), GridError> {
        match self.data.iter().position(|v| !v.is_finite()) {
            Some(i) => Err(GridError::NonFinite {
                cell: i / self.state_size.max(1),
            }),
            None => Ok(()),
        }
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    pub fn state_size(&self) -> usize {
        self.state_size
    }

    pub fn time(&self) -> T {
        self.time
    }

    pub fn set_time(&mut self, t: T) {
        self.time = t;
    }

    pub fn with_time(mut self, t: T) -> Self {
        self.time = t;
        self
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn cell(&self, i: usize) -> &[T] {
        &self.data[i * self.state_size..(i + 1) * self.state_size]
    }

    pub fn cell_mut(&mut self, i: usize) -> &mut [T] {
        &mut self.data[i * self.state_size..(i + 1) * self.state_size]
    }

    pub fn num_cells(&self) -> usize {
        self.grid.num_cells()
    }

    pub fn same_layout(&self, other: &Self) -> bool {
        self.grid == other.grid && self.state_size == other.state_size
    }

    /// `self − other`, keeping `self`'s time stamp.
    pub fn difference(&self, other: &Self) -> Result<Self, GridError> {
        if !self.same_layout(other) {
            return Err(GridError::Mismatch);
        }
        Ok(Self {
            grid: self.grid,
            state_size: self.state_size,
            time: self.time,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| a - b).collect(),
        })
    }

    /// Per-cell `|W(xᵢ)|²` for cells in `region`, in cell order.
    fn squared_terms(&self, region: Region<T>) -> Vec<T> {
        (0..self.num_cells())
            .filter(|&c| matches!(region, Region::All) || region.contains_radius(self.grid.radius(c)))
            .map(|c| self.cell(c).iter().fold(T::zero(), |acc, &v| acc + v * v))
            .collect()
    }

    /// `‖W‖²_{L²(region)}` by midpoint quadrature.
    pub fn l2_norm_squared(&self, region: Region<T>) -> T {
        pairwise_sum(&self.squared_terms(region)) * self.grid.cell_volume()
    }

    pub fn l2_norm(&self, region: Region<T>) -> T {
        self.l2_norm_squared(region).sqrt()
    }

    /// `‖W‖²_{L²}` over the whole grid.
    pub fn energy(&self) -> T {
        self.l2_norm_squared(Region::All)
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, &v| m.max(v.abs()))
    }

    /// Smallest `R` such that the field vanishes outside `B(0, R)`, counting
    /// each nonzero cell as a full cell (centre radius plus half diagonal).
    pub fn support_radius(&self) -> T {
        let half_diag = self.grid.h() * T::from_usize_lossy(self.grid.dim()).sqrt() / T::lit(2.0);
        (0..self.num_cells())
            .filter(|&c| self.cell(c).iter().any(|&v| v != T::zero()))
            .fold(T::zero(), |m, c| m.max(self.grid.radius(c) + half_diag))
    }

    /// Convolution with a truncated Gaussian of standard deviation `eta`,
    /// cut at `4·eta` and renormalised so its discrete weights sum to one.
    /// Applied axis by axis.
    pub fn mollify(&self, eta: T) -> Result<Self, GridError> {
        let h = self.grid.h();
        if !(eta >= h) {
            return Err(GridError::KernelUnderresolved {
                eta: eta.as_f64(),
                h: h.as_f64(),
            });
        }
        let weights = gaussian_weights(eta, h);
        let reach = (weights.len() / 2) as isize;
        let mut current = self.clone();
        for axis in 0..self.grid.dim() {
            let mut next = Self::zeros(self.grid, self.state_size).with_time(self.time);
            for cell in 0..self.num_cells() {
                for (k, &w) in weights.iter().enumerate() {
                    let offset = k as isize - reach;
                    if let Some(src) = self.grid.neighbor(cell, axis, offset) {
                        for comp in 0..self.state_size {
                            let v = current.data[src * self.state_size + comp];
                            next.data[cell * self.state_size + comp] =
                                next.data[cell * self.state_size + comp] + w * v;
                        }
                    }
                }
            }
            current = next;
        }
        Ok(current)
    }

    /// `W(· + offsets·h)`; cells pulled from outside the grid are zero.
    pub fn shift(&self, offsets: &[isize]) -> Self {
        assert_eq!(offsets.len(), self.grid.dim(), "one offset per axis");
        let mut out = Self::zeros(self.grid, self.state_size).with_time(self.time);
        for cell in 0..self.num_cells() {
            let mut src = Some(cell);
            for (axis, &o) in offsets.iter().enumerate() {
                src = src.and_then(|s| self.grid.neighbor(s, axis, o));
            }
            if let Some(src) = src {
                out.cell_mut(cell).copy_from_slice(self.cell(src));
            }
        }
        out
    }

    /// One row per cell: `x1..xn, w1..wm`.
    pub fn write_csv(&self, mut out: impl Write) -> io::Result<()> {
        let mut header: Vec<String> = (1..=self.grid.dim()).map(|i| format!("x{i}")).collect();
        header.extend((1..=self.state_size).map(|i| format!("w{i}")));
        writeln!(out, "{}", header.join(","))?;
        for cell in 0..self.num_cells() {
            let row: Vec<String> = self
                .grid
                .coords(cell)
                .into_iter()
                .chain(self.cell(cell).iter().copied())
                .map(|v| g17(v.as_f64()))
                .collect();
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }
}

/// Normalised weights for offsets `-K..=K`, `K = ⌊4η/h⌋`.
fn gaussian_weights<T: Scalar>(eta: T, h: T) -> Vec<T> {
    let reach = (T::lit(4.0) * eta / h).floor().to_usize().unwrap_or(0);
    let raw: Vec<T> = (0..=2 * reach)
        .map(|k| {
            let x = T::from_usize_lossy(k) * h - T::from_usize_lossy(reach) * h;
            (-(x * x) / (T::lit(2.0) * eta * eta)).exp()
        })
        .collect();
    let total = pairwise_sum(&raw);
    raw.into_iter().map(|w| w / total).collect()
}
