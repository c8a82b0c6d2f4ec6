//! Rectangular index sets, their evaluation grids, distances and dilations.
//!
//! The index set is the compact rectangle `K = [−R, R]^d` for `d ∈ {1, 2}`;
//! the field is evaluated on the lattice `{−R, −R+h, …, R}^d`. Stopping
//! rules and the optimal shift density are defined on the continuum
//! rectangle while the field itself lives on the grid, so both views are
//! exposed here.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng::RngStream;

/// Maximum supported dimension.
pub const MAX_DIM: usize = 2;

/// A point in `ℝ^d`; coordinates beyond the active dimension are zero.
pub type Point = [f64; MAX_DIM];

/// Euclidean distance between two points in the first `dim` coordinates.
#[inline]
pub fn dist(a: &Point, b: &Point, dim: usize) -> f64 {
    let mut s = 0.0;
    for j in 0..dim {
        let d = a[j] - b[j];
        s += d * d;
    }
    s.sqrt()
}

#[derive(Debug, Error, PartialEq)]
pub enum GeometryError {
    #[error("dim must be 1 or 2, got {0}")]
    UnsupportedDim(usize),
    #[error("half_width must be finite and nonnegative, got {0}")]
    BadHalfWidth(f64),
    #[error("grid_step must be finite and positive, got {0}")]
    BadGridStep(f64),
    #[error("grid_step must divide 2R (2R/h = {ratio} is not an integer)")]
    MisalignedGrid { ratio: f64 },
    #[error("dilation parameter must be finite and positive, got {0}")]
    BadDilation(f64),
}

/// Shape of the structuring set in a Minkowski dilation `K ⊕ B`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DilationKind {
    /// `B = b(0, r)`, a Euclidean ball.
    Ball,
    /// `B = [−a, a]^d`, an axis-aligned cube.
    Cube,
}

/// The rectangle `K = [−R, R]^d` together with its evaluation lattice.
///
/// `2R` must be an integer multiple of the grid step (relative tolerance
/// 1e-9); misalignment is a configuration error, never silently snapped.
/// `R = 0` is the degenerate single-point domain.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RectDomain {
    dim: usize,
    half_width: f64,
    grid_step: f64,
    axis: Vec<f64>,
}

impl RectDomain {
    pub fn new(dim: usize, half_width: f64, grid_step: f64) -> Result<Self, GeometryError> {
        if dim == 0 || dim > MAX_DIM {
            return Err(GeometryError::UnsupportedDim(dim));
        }
        if !half_width.is_finite() || half_width < 0.0 {
            return Err(GeometryError::BadHalfWidth(half_width));
        }
        if !grid_step.is_finite() || grid_step <= 0.0 {
            return Err(GeometryError::BadGridStep(grid_step));
        }
        let ratio = 2.0 * half_width / grid_step;
        let steps = ratio.round();
        if (ratio - steps).abs() > 1e-9 * ratio.max(1.0) {
            return Err(GeometryError::MisalignedGrid { ratio });
        }
        let n = steps as usize + 1;
        let mut axis: Vec<f64> = (0..n).map(|i| -half_width + i as f64 * grid_step).collect();
        // Pin the endpoint so the grid contains +R exactly.
        axis[n - 1] = half_width;
        Ok(RectDomain {
            dim,
            half_width,
            grid_step,
            axis,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn grid_step(&self) -> f64 {
        self.grid_step
    }

    /// The 1-d lattice `−R, −R+h, …, R` shared by every axis.
    pub fn axis(&self) -> &[f64] {
        &self.axis
    }

    pub fn points_per_axis(&self) -> usize {
        self.axis.len()
    }

    /// Total number of grid points, `(2R/h + 1)^dim`.
    pub fn n_points(&self) -> usize {
        self.axis.len().pow(self.dim as u32)
    }

    /// Grid point for a flat row-major index (first axis varies slowest),
    /// i.e. points are ordered lexicographically in their coordinates.
    pub fn point(&self, flat: usize) -> Point {
        let mut p = [0.0; MAX_DIM];
        match self.dim {
            1 => p[0] = self.axis[flat],
            _ => {
                let n = self.axis.len();
                p[0] = self.axis[flat / n];
                p[1] = self.axis[flat % n];
            }
        }
        p
    }

    pub fn iter_points(&self) -> impl Iterator<Item = Point> + '_ {
        (0..self.n_points()).map(move |i| self.point(i))
    }

    /// Euclidean distance from `x` to the continuum rectangle `[−R, R]^d`,
    /// computed as `‖((|x_j| − R) ∨ 0)_j‖`.
    pub fn dist_to_rect(&self, x: &Point) -> f64 {
        let mut s = 0.0;
        for coord in x.iter().take(self.dim) {
            let e = coord.abs() - self.half_width;
            if e > 0.0 {
                s += e * e;
            }
        }
        s.sqrt()
    }

    /// Volume of the dilation `K ⊕ B` for a ball of radius `param` or a
    /// cube of half-width `param`.
    pub fn dilated_volume(&self, kind: DilationKind, param: f64) -> Result<f64, GeometryError> {
        if !param.is_finite() || param <= 0.0 {
            return Err(GeometryError::BadDilation(param));
        }
        let r = self.half_width;
        Ok(match (self.dim, kind) {
            (1, _) => 2.0 * (r + param),
            (2, DilationKind::Cube) => {
                let side = 2.0 * (r + param);
                side * side
            }
            // Steiner formula: area(K ⊕ b(0, r)) = 4R² + 8Rr + πr².
            (2, DilationKind::Ball) => {
                4.0 * r * r + 8.0 * r * param + std::f64::consts::PI * param * param
            }
            _ => unreachable!("dim checked at construction"),
        })
    }
}

/// Uniform sample from `K ⊕ b(0, radius)`.
///
/// In d=1 this is the interval `[−(R+r), R+r]` (one uniform draw). In d=2
/// the rounded rectangle is decomposed into the core rectangle, four edge
/// bands and four quarter discs, selected by area (three uniform draws).
/// This is the single code path used both for the optimal shift density of
/// indicator shapes and for the uniform shifts of the cut-off sampler with
/// a ball window, so paired-stream runs of the two consume identical draws.
pub fn sample_uniform_ball_dilation(
    domain: &RectDomain,
    radius: f64,
    stream: &mut RngStream,
) -> Point {
    let r = domain.half_width();
    let mut p: Point = [0.0; MAX_DIM];
    match domain.dim() {
        1 => {
            let lo = -(r + radius);
            let hi = r + radius;
            p[0] = lo + (hi - lo) * stream.next_uniform();
        }
        _ => {
            let core = 4.0 * r * r;
            let band = 2.0 * r * radius;
            let quarter = std::f64::consts::FRAC_PI_4 * radius * radius;
            let total = core + 4.0 * band + 4.0 * quarter;
            let mut v = stream.next_uniform() * total;
            let a = stream.next_uniform();
            let b = stream.next_uniform();
            if v < core {
                p[0] = -r + 2.0 * r * a;
                p[1] = -r + 2.0 * r * b;
                return p;
            }
            v -= core;
            // Bands in fixed order: x1-low, x1-high, x2-low, x2-high.
            for (axis, sign) in [(0, -1.0), (0, 1.0), (1, -1.0), (1, 1.0)] {
                if v < band {
                    p[axis] = sign * (r + radius * a);
                    p[1 - axis] = -r + 2.0 * r * b;
                    return p;
                }
                v -= band;
            }
            // Quarter discs in fixed order: (−,−), (−,+), (+,−), (+,+).
            let rho = radius * a.sqrt();
            let theta = b * std::f64::consts::FRAC_PI_2;
            let (ox, oy) = (rho * theta.cos(), rho * theta.sin());
            for (sx, sy) in [(-1.0, -1.0), (-1.0, 1.0), (1.0, -1.0), (1.0, 1.0)] {
                if v < quarter {
                    p[0] = sx * (r + ox);
                    p[1] = sy * (r + oy);
                    return p;
                }
                v -= quarter;
            }
            // Rounding of the cumulative masses can leave v marginally
            // positive; attribute it to the last corner.
            p[0] = r + ox;
            p[1] = r + oy;
        }
    }
    p
}

/// Uniform sample from `K ⊕ [−a, a]^d`, a plain rectangle.
pub fn sample_uniform_cube_dilation(
    domain: &RectDomain,
    halfwidth: f64,
    stream: &mut RngStream,
) -> Point {
    let hw = domain.half_width() + halfwidth;
    let mut p: Point = [0.0; MAX_DIM];
    for coord in p.iter_mut().take(domain.dim()) {
        *coord = -hw + 2.0 * hw * stream.next_uniform();
    }
    p
}
