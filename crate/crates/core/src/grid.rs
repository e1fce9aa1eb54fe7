//! Rectangular sampling grid, field carriers and finite-difference operators.
//!
//! Storage is row-major with x as the slow index: the value at `(ix, iy)`
//! lives at `ix * ny + iy`. The binary field format depends on this layout.
//!
//! Derivatives use sixth-order central differences (seven points) in the
//! interior and sixth-order one-sided seven-point stencils on the three
//! outermost samples of each edge.

use crate::error::{Error, Result};

/// Minimum number of samples along each axis.
pub const MIN_POINTS: usize = 8;

/// Formal order of accuracy of [`gradient`], [`curl_z`] and [`derivative_1d`].
pub const STENCIL_ORDER: u32 = 6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid2D {
    pub nx: usize,
    pub ny: usize,
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub dx: f64,
    pub dy: f64,
}

impl Grid2D {
    pub fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64, nx: usize, ny: usize) -> Result<Self> {
        if !(x_min.is_finite() && x_max.is_finite()) || x_max <= x_min {
            return Err(Error::config(
                "x_max",
                format!("must exceed x_min (got {x_min}..{x_max})"),
            ));
        }
        if !(y_min.is_finite() && y_max.is_finite()) || y_max <= y_min {
            return Err(Error::config(
                "y_max",
                format!("must exceed y_min (got {y_min}..{y_max})"),
            ));
        }
        if nx < MIN_POINTS {
            return Err(Error::config(
                "nx",
                format!("below minimum {MIN_POINTS} (got {nx})"),
            ));
        }
        if ny < MIN_POINTS {
            return Err(Error::config(
                "ny",
                format!("below minimum {MIN_POINTS} (got {ny})"),
            ));
        }
        Ok(Self {
            nx,
            ny,
            x_min,
            x_max,
            y_min,
            y_max,
            dx: (x_max - x_min) / (nx - 1) as f64,
            dy: (y_max - y_min) / (ny - 1) as f64,
        })
    }

    #[inline]
    pub fn x(&self, ix: usize) -> f64 {
        self.x_min + ix as f64 * self.dx
    }

    #[inline]
    pub fn y(&self, iy: usize) -> f64 {
        self.y_min + iy as f64 * self.dy
    }

    #[inline]
    pub fn index(&self, ix: usize, iy: usize) -> usize {
        ix * self.ny + iy
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.nx).map(|i| self.x(i)).collect()
    }

    pub fn ys(&self) -> Vec<f64> {
        (0..self.ny).map(|j| self.y(j)).collect()
    }
}

/// Convenience wrapper matching the operation name used in the docs.
pub fn make_grid(x_min: f64, x_max: f64, y_min: f64, y_max: f64, nx: usize, ny: usize) -> Result<Grid2D> {
    Grid2D::new(x_min, x_max, y_min, y_max, nx, ny)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField2D {
    pub grid: Grid2D,
    pub values: Vec<f64>,
}

impl ScalarField2D {
    pub fn zeros(grid: Grid2D) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.len()],
        }
    }

    pub fn from_fn(grid: Grid2D, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut values = Vec::with_capacity(grid.len());
        for ix in 0..grid.nx {
            let x = grid.x(ix);
            for iy in 0..grid.ny {
                values.push(f(x, grid.y(iy)));
            }
        }
        Self { grid, values }
    }

    pub fn from_values(grid: Grid2D, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::config(
                "values",
                format!("length {} does not match nx*ny = {}", values.len(), grid.len()),
            ));
        }
        Ok(Self { grid, values })
    }

    #[inline]
    pub fn at(&self, ix: usize, iy: usize) -> f64 {
        self.values[self.grid.index(ix, iy)]
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Pointwise combination of two fields on the same grid.
    pub fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        assert_eq!(self.grid, other.grid, "fields live on different grids");
        Self {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// The x-profile at a fixed y-index.
    pub fn column(&self, iy: usize) -> Vec<f64> {
        (0..self.grid.nx).map(|ix| self.at(ix, iy)).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VectorField2D {
    pub grid: Grid2D,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl VectorField2D {
    pub fn zeros(grid: Grid2D) -> Self {
        Self {
            grid,
            x: vec![0.0; grid.len()],
            y: vec![0.0; grid.len()],
        }
    }

    pub fn from_fn(grid: Grid2D, f: impl Fn(f64, f64) -> (f64, f64)) -> Self {
        let mut out = Self::zeros(grid);
        for ix in 0..grid.nx {
            let x = grid.x(ix);
            for iy in 0..grid.ny {
                let (vx, vy) = f(x, grid.y(iy));
                let i = grid.index(ix, iy);
                out.x[i] = vx;
                out.y[i] = vy;
            }
        }
        out
    }

    pub fn component_x(&self) -> ScalarField2D {
        ScalarField2D {
            grid: self.grid,
            values: self.x.clone(),
        }
    }

    pub fn component_y(&self) -> ScalarField2D {
        ScalarField2D {
            grid: self.grid,
            values: self.y.clone(),
        }
    }

    /// Total number of stored reals (two per sample).
    pub fn value_count(&self) -> usize {
        self.x.len() + self.y.len()
    }
}

/// Sixth-order derivative of a uniformly sampled sequence with spacing `h`.
///
/// `values` must hold at least seven samples.
pub fn derivative_1d(values: &[f64], h: f64) -> Vec<f64> {
    let mut out = vec![0.0; values.len()];
    derivative_strided(values, 0, 1, values.len(), h, &mut out, 0, 1);
    out
}

/// One-sided and central weights (times `60 h`) for the first derivative at
/// distance 0, 1, 2 from the left edge, and in the interior.
const EDGE_WEIGHTS: [[f64; 7]; 3] = [
    [-147.0, 360.0, -450.0, 400.0, -225.0, 72.0, -10.0],
    [-10.0, -77.0, 150.0, -100.0, 50.0, -15.0, 2.0],
    [2.0, -24.0, -35.0, 80.0, -30.0, 8.0, -1.0],
];
const CENTRAL_WEIGHTS: [f64; 7] = [-1.0, 9.0, -45.0, 0.0, 45.0, -9.0, 1.0];

#[allow(clippy::too_many_arguments)]
fn derivative_strided(
    src: &[f64],
    start: usize,
    stride: usize,
    n: usize,
    h: f64,
    dst: &mut [f64],
    dst_start: usize,
    dst_stride: usize,
) {
    assert!(n >= 7, "sixth-order stencil needs at least seven samples");
    let f = |i: usize| src[start + i * stride];
    let inv = 1.0 / (60.0 * h);
    let mut put = |i: usize, v: f64| dst[dst_start + i * dst_stride] = v * inv;

    for (s, w) in EDGE_WEIGHTS.iter().enumerate() {
        let left: f64 = (0..7).map(|j| w[j] * f(j)).sum();
        // mirrored stencil at the right edge changes sign
        let right: f64 = (0..7).map(|j| -w[j] * f(n - 1 - j)).sum();
        put(s, left);
        put(n - 1 - s, right);
    }
    for i in 3..n - 3 {
        let v: f64 = (0..7).map(|j| CENTRAL_WEIGHTS[j] * f(i + j - 3)).sum();
        put(i, v);
    }
}

fn partial_x(values: &[f64], grid: &Grid2D) -> Vec<f64> {
    let mut out = vec![0.0; grid.len()];
    for iy in 0..grid.ny {
        derivative_strided(values, iy, grid.ny, grid.nx, grid.dx, &mut out, iy, grid.ny);
    }
    out
}

fn partial_y(values: &[f64], grid: &Grid2D) -> Vec<f64> {
    let mut out = vec![0.0; grid.len()];
    for ix in 0..grid.nx {
        let row = ix * grid.ny;
        derivative_strided(values, row, 1, grid.ny, grid.dy, &mut out, row, 1);
    }
    out
}

/// `(d/dx f, d/dy f)`.
pub fn gradient(field: &ScalarField2D) -> VectorField2D {
    VectorField2D {
        grid: field.grid,
        x: partial_x(&field.values, &field.grid),
        y: partial_y(&field.values, &field.grid),
    }
}

/// z-component of the curl, `d/dx A_y - d/dy A_x`.
pub fn curl_z(field: &VectorField2D) -> ScalarField2D {
    let dyax = partial_y(&field.x, &field.grid);
    let mut values = partial_x(&field.y, &field.grid);
    for (v, d) in values.iter_mut().zip(dyax) {
        *v -= d;
    }
    ScalarField2D {
        grid: field.grid,
        values,
    }
}
