//! Monotone radial shape families and the normalized-representation
//! ingredients: the shifted-shape envelope `f̃₀`, its integral `c`, and the
//! optimal shift sampler with density `f̃₀/c`.
//!
//! A moving-maxima spectral function is `f(y) = f₀(‖y − x‖)` for a shift
//! `x ∈ ℝ^d` and a nonincreasing profile `f₀`. Over the rectangle
//! `K = [−R, R]^d` the envelope is
//!
//! ```text
//! f̃₀(x) = sup_{y ∈ K} f₀(‖y − x‖) = f₀(d(x, K)),
//! ```
//!
//! and `c = ∫ f̃₀` is both the common supremum of the normalized spectral
//! functions and the exponent of the sup distribution,
//! `P(sup_K Z ≤ z) = exp(−c/z)`.

use serde::{Deserialize, Serialize};
use statrs::function::erf::erf_inv;
use thiserror::Error;

use crate::geometry::{sample_uniform_ball_dilation, DilationKind, Point, RectDomain, MAX_DIM};
use crate::quad;
use crate::rng::RngStream;

#[derive(Debug, Error)]
pub enum ShapeError {
    #[error("sigma must be finite and positive, got {0}")]
    BadSigma(f64),
    #[error("radius must be finite and positive, got {0}")]
    BadRadius(f64),
    #[error("shape dimension {shape} does not match domain dimension {domain}")]
    DimMismatch { shape: usize, domain: usize },
    #[error(
        "normalizing constant is not finite (quadrature of the shifted-shape envelope diverged)"
    )]
    NonFiniteConstant,
    #[error("shift density vanishes on a set where the shifted-shape envelope is positive: {0}")]
    RegularityViolation(String),
    #[error("invalid shift density: {0}")]
    BadDensity(String),
}

/// Normalization convention for indicator shapes.
///
/// `UnitIntegral` scales the indicator to integrate to one, which makes the
/// margins standard Fréchet; `Raw` keeps height one, the convention under
/// which `c` equals the dilation volume exactly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum IndicatorScaling {
    UnitIntegral,
    Raw,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ShapeKind {
    /// Density of `N(0, σ² Id)` in `dim` dimensions (the Smith model shape).
    Gaussian { sigma: f64 },
    /// Indicator of the ball `b(0, radius)`, optionally scaled to unit mass.
    Indicator {
        radius: f64,
        scaling: IndicatorScaling,
    },
}

/// A monotone nonincreasing radial profile `f₀: [0, ∞) → [0, ∞)` together
/// with the dimension it lives in.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialShape {
    kind: ShapeKind,
    dim: usize,
}

/// Volume of the unit ball in d dimensions (d = 1, 2).
fn unit_ball_volume(dim: usize) -> f64 {
    match dim {
        1 => 2.0,
        _ => std::f64::consts::PI,
    }
}

impl RadialShape {
    pub fn gaussian(dim: usize, sigma: f64) -> Result<Self, ShapeError> {
        if !sigma.is_finite() || sigma <= 0.0 {
            return Err(ShapeError::BadSigma(sigma));
        }
        Ok(RadialShape {
            kind: ShapeKind::Gaussian { sigma },
            dim,
        })
    }

    pub fn indicator(
        dim: usize,
        radius: f64,
        scaling: IndicatorScaling,
    ) -> Result<Self, ShapeError> {
        if !radius.is_finite() || radius <= 0.0 {
            return Err(ShapeError::BadRadius(radius));
        }
        Ok(RadialShape {
            kind: ShapeKind::Indicator { radius, scaling },
            dim,
        })
    }

    pub fn kind(&self) -> ShapeKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn indicator_height(radius: f64, scaling: IndicatorScaling, dim: usize) -> f64 {
        match scaling {
            IndicatorScaling::Raw => 1.0,
            IndicatorScaling::UnitIntegral => {
                1.0 / (unit_ball_volume(dim) * radius.powi(dim as i32))
            }
        }
    }

    /// Evaluates `f₀(r)`.
    #[inline]
    pub fn eval(&self, r: f64) -> f64 {
        debug_assert!(r >= 0.0);
        match self.kind {
            ShapeKind::Gaussian { sigma } => self.peak() * (-0.5 * (r / sigma) * (r / sigma)).exp(),
            ShapeKind::Indicator { radius, scaling } => {
                if r <= radius {
                    Self::indicator_height(radius, scaling, self.dim)
                } else {
                    0.0
                }
            }
        }
    }

    /// `C = f₀(0)`, the uniform bound on the shape.
    pub fn peak(&self) -> f64 {
        match self.kind {
            ShapeKind::Gaussian { sigma } => {
                (2.0 * std::f64::consts::PI * sigma * sigma).powf(-(self.dim as f64) / 2.0)
            }
            ShapeKind::Indicator { radius, scaling } => {
                Self::indicator_height(radius, scaling, self.dim)
            }
        }
    }

    /// `I = ∫_{ℝ^d} f₀(‖x‖) dx`. This is the Fréchet margin scale of the
    /// resulting field; it equals one for unit-integral shapes.
    pub fn total_integral(&self) -> f64 {
        match self.kind {
            ShapeKind::Gaussian { .. } => 1.0,
            ShapeKind::Indicator { radius, scaling } => {
                Self::indicator_height(radius, scaling, self.dim)
                    * unit_ball_volume(self.dim)
                    * radius.powi(self.dim as i32)
            }
        }
    }

    /// `∫_ℝ f₀(|t|) dt`, the profile integral along a line through the
    /// origin. Appears in the edge-band terms of `c` for d = 2.
    pub fn line_integral(&self) -> f64 {
        match self.kind {
            ShapeKind::Gaussian { sigma } => {
                self.peak() * sigma * (2.0 * std::f64::consts::PI).sqrt()
            }
            ShapeKind::Indicator { radius, scaling } => {
                Self::indicator_height(radius, scaling, self.dim) * 2.0 * radius
            }
        }
    }

    /// Radius of the support, if compact.
    pub fn support_radius(&self) -> Option<f64> {
        match self.kind {
            ShapeKind::Gaussian { .. } => None,
            ShapeKind::Indicator { radius, .. } => Some(radius),
        }
    }
}

/// One component of the mixture decomposition of the density `f̃₀/c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ShiftRegion {
    /// The rectangle itself, where `f̃₀ ≡ f₀(0)`.
    Center,
    /// Beyond one face: excess along `axis`, uniform along the other axis.
    /// In d = 1 these are the two half-line tails.
    Edge { axis: usize, positive: bool },
    /// Beyond a corner (d = 2): radial profile in the quadrant.
    Corner { positive: [bool; 2] },
}

/// Inverse CDF of the half-normal `|N(0, σ²)|`.
#[inline]
fn half_normal(sigma: f64, u: f64) -> f64 {
    sigma * std::f64::consts::SQRT_2 * erf_inv(u)
}

/// A probability density for shifts, used by the density-transformed
/// sampler. `GStar` is the optimal choice `f̃₀/c`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ShiftDensitySpec {
    GStar,
    /// Uniform on `[−halfwidth, halfwidth]^dim`.
    UniformWindow {
        halfwidth: f64,
    },
    /// Piecewise-constant histogram density (d = 1 only).
    Custom(TabulatedDensity),
}

/// Histogram density on equal-width bins over `[lo, hi]`, normalized to
/// integrate to one at construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TabulatedDensity {
    lo: f64,
    hi: f64,
    densities: Vec<f64>,
    cumulative: Vec<f64>,
}

impl TabulatedDensity {
    pub fn new(lo: f64, hi: f64, weights: &[f64]) -> Result<Self, ShapeError> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) || weights.is_empty() {
            return Err(ShapeError::BadDensity(format!(
                "need lo < hi and at least one bin, got [{lo}, {hi}] with {} bins",
                weights.len()
            )));
        }
        if weights.iter().any(|&w| !w.is_finite() || w < 0.0) {
            return Err(ShapeError::BadDensity(
                "bin weights must be finite and nonnegative".into(),
            ));
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(ShapeError::BadDensity(
                "bin weights must not all vanish".into(),
            ));
        }
        let bin_width = (hi - lo) / weights.len() as f64;
        let densities: Vec<f64> = weights.iter().map(|&w| w / (total * bin_width)).collect();
        let mut cumulative = Vec::with_capacity(weights.len());
        let mut acc = 0.0;
        for &w in weights {
            acc += w / total;
            cumulative.push(acc);
        }
        Ok(TabulatedDensity {
            lo,
            hi,
            densities,
            cumulative,
        })
    }

    pub fn bounds(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    fn bin_width(&self) -> f64 {
        (self.hi - self.lo) / self.densities.len() as f64
    }

    fn bin_bounds(&self, i: usize) -> (f64, f64) {
        let w = self.bin_width();
        (self.lo + i as f64 * w, self.lo + (i + 1) as f64 * w)
    }

    pub fn density(&self, x: f64) -> f64 {
        if x < self.lo || x >= self.hi {
            return 0.0;
        }
        let i = (((x - self.lo) / self.bin_width()) as usize).min(self.densities.len() - 1);
        self.densities[i]
    }

    /// Numeric integral of the density; one by construction up to rounding.
    pub fn integral(&self) -> f64 {
        self.densities.iter().sum::<f64>() * self.bin_width()
    }

    pub fn sample(&self, stream: &mut RngStream) -> f64 {
        let u = stream.next_uniform();
        let i = self
            .cumulative
            .iter()
            .position(|&cum| u < cum)
            .unwrap_or(self.densities.len() - 1);
        let (b0, b1) = self.bin_bounds(i);
        b0 + (b1 - b0) * stream.next_uniform()
    }
}

/// A moving-maxima spectral model over a rectangle: shape, domain, the
/// normalizing constant `c` and the mixture decomposition of `f̃₀/c`.
///
/// Immutable after construction; samplers take an exclusive stream.
#[derive(Debug, Clone)]
pub struct SpectralModel {
    shape: RadialShape,
    domain: RectDomain,
    regions: Vec<(ShiftRegion, f64)>,
    c: f64,
}

impl SpectralModel {
    pub fn new(shape: RadialShape, domain: RectDomain) -> Result<Self, ShapeError> {
        if shape.dim() != domain.dim() {
            return Err(ShapeError::DimMismatch {
                shape: shape.dim(),
                domain: domain.dim(),
            });
        }
        let regions = Self::build_regions(&shape, &domain);
        // For indicator shapes c = f₀(0)·|K ⊕ b(0, r)| via the same volume
        // routine the cut-off sampler uses, so the two samplers share the
        // constant bit for bit; the region-mass sum agrees to rounding.
        let c: f64 = match shape.kind() {
            ShapeKind::Indicator { radius, .. } => {
                let vol = domain
                    .dilated_volume(DilationKind::Ball, radius)
                    .expect("radius validated positive");
                shape.peak() * vol
            }
            ShapeKind::Gaussian { .. } => regions.iter().map(|&(_, m)| m).sum(),
        };
        if !c.is_finite() || c <= 0.0 {
            return Err(ShapeError::NonFiniteConstant);
        }
        Ok(SpectralModel {
            shape,
            domain,
            regions,
            c,
        })
    }

    /// Closed-form region masses of `∫ f̃₀`: the center contributes
    /// `(2R)^d f₀(0)`, each face band `R·∫_ℝ f₀` (d = 2), and the tails or
    /// corners jointly contribute the full integral `I`.
    fn build_regions(shape: &RadialShape, domain: &RectDomain) -> Vec<(ShiftRegion, f64)> {
        let r = domain.half_width();
        let peak = shape.peak();
        let total = shape.total_integral();
        match domain.dim() {
            1 => vec![
                (ShiftRegion::Center, 2.0 * r * peak),
                (
                    ShiftRegion::Edge {
                        axis: 0,
                        positive: false,
                    },
                    total / 2.0,
                ),
                (
                    ShiftRegion::Edge {
                        axis: 0,
                        positive: true,
                    },
                    total / 2.0,
                ),
            ],
            _ => {
                let band = r * shape.line_integral();
                let corner = total / 4.0;
                let mut v = vec![(ShiftRegion::Center, 4.0 * r * r * peak)];
                for axis in 0..2 {
                    for positive in [false, true] {
                        v.push((ShiftRegion::Edge { axis, positive }, band));
                    }
                }
                for sx in [false, true] {
                    for sy in [false, true] {
                        v.push((ShiftRegion::Corner { positive: [sx, sy] }, corner));
                    }
                }
                v
            }
        }
    }

    pub fn shape(&self) -> &RadialShape {
        &self.shape
    }

    pub fn domain(&self) -> &RectDomain {
        &self.domain
    }

    /// The constant `c = ∫ f̃₀`, the common supremum of the normalized
    /// spectral functions over the continuum rectangle.
    pub fn normalizing_constant(&self) -> f64 {
        self.c
    }

    /// `C = f₀(0)`.
    pub fn peak_bound(&self) -> f64 {
        self.shape.peak()
    }

    /// Scale of the Fréchet margins: `P(Z(y) ≤ z) = exp(−scale/z)`.
    pub fn margin_scale(&self) -> f64 {
        self.shape.total_integral()
    }

    /// Region masses of the mixture decomposition; they sum to `c`.
    pub fn region_masses(&self) -> &[(ShiftRegion, f64)] {
        &self.regions
    }

    /// The envelope `f̃₀(x) = sup_{y ∈ K} f₀(‖y − x‖) = f₀(d(x, K))`.
    pub fn sup_shifted(&self, x: &Point) -> f64 {
        self.shape.eval(self.domain.dist_to_rect(x))
    }

    /// Draws a shift with density `f̃₀/c`.
    ///
    /// Indicator shapes delegate to the uniform dilation sampler (the
    /// density is the normalized indicator of `K ⊕ b(0, r)`); Gaussian
    /// shapes use the exact mixture with half-normal tails. Coordinate
    /// draws always occur in axis order.
    pub fn sample_shift(&self, stream: &mut RngStream) -> Point {
        match self.shape.kind() {
            ShapeKind::Indicator { radius, .. } => {
                sample_uniform_ball_dilation(&self.domain, radius, stream)
            }
            ShapeKind::Gaussian { sigma } => self.sample_gaussian_shift(sigma, stream),
        }
    }

    fn sample_gaussian_shift(&self, sigma: f64, stream: &mut RngStream) -> Point {
        let mut v = stream.next_uniform() * self.c;
        let mut region = self.regions[self.regions.len() - 1].0;
        for &(reg, mass) in &self.regions {
            if v < mass {
                region = reg;
                break;
            }
            v -= mass;
        }
        let r = self.domain.half_width();
        let dim = self.domain.dim();
        let mut p: Point = [0.0; MAX_DIM];
        for (j, coord) in p.iter_mut().enumerate().take(dim) {
            let u = stream.next_uniform();
            *coord = match region {
                ShiftRegion::Center => -r + 2.0 * r * u,
                ShiftRegion::Edge { axis, positive } => {
                    if j == axis {
                        let sign = if positive { 1.0 } else { -1.0 };
                        sign * (r + half_normal(sigma, u))
                    } else {
                        -r + 2.0 * r * u
                    }
                }
                ShiftRegion::Corner { positive } => {
                    let sign = if positive[j] { 1.0 } else { -1.0 };
                    sign * (r + half_normal(sigma, u))
                }
            };
        }
        p
    }

    /// Independent check of `c` by adaptive quadrature of `f̃₀` (relative
    /// tolerance 1e-10). Indicator discontinuities and the rectangle faces
    /// are passed to the integrator as explicit splits.
    pub fn normalizing_constant_by_quadrature(&self) -> Result<f64, ShapeError> {
        let r = self.domain.half_width();
        let tail = match self.shape.kind() {
            ShapeKind::Gaussian { sigma } => 12.0 * sigma,
            ShapeKind::Indicator { radius, .. } => radius,
        };
        let hw = r + tail;
        let splits = [-r, r, -(r + tail), r + tail];
        let map_err = |_| ShapeError::NonFiniteConstant;
        match self.domain.dim() {
            1 => {
                let f = |x: f64| self.sup_shifted(&[x, 0.0]);
                let q = quad::integrate_with_splits(f, -hw, hw, &splits, 1e-10).map_err(map_err)?;
                Ok(q.value)
            }
            _ => {
                let support = self.shape.support_radius();
                let inner = |x1: f64| {
                    // The envelope's support boundary in x2 moves with x1
                    // for compact shapes; hand the jump to the integrator.
                    let mut inner_splits = vec![-r, r];
                    if let Some(rad) = support {
                        let e = (x1.abs() - r).max(0.0);
                        let s = rad * rad - e * e;
                        if s >= 0.0 {
                            inner_splits.push(-(r + s.sqrt()));
                            inner_splits.push(r + s.sqrt());
                        }
                    }
                    quad::integrate_with_splits(
                        |x2: f64| self.sup_shifted(&[x1, x2]),
                        -hw,
                        hw,
                        &inner_splits,
                        1e-11,
                    )
                    .map(|q| q.value)
                    .unwrap_or(f64::NAN)
                };
                let q =
                    quad::integrate_with_splits(inner, -hw, hw, &splits, 1e-10).map_err(map_err)?;
                if !q.value.is_finite() {
                    return Err(ShapeError::NonFiniteConstant);
                }
                Ok(q.value)
            }
        }
    }

    /// Density of a shift spec at `x`.
    pub fn shift_density(&self, spec: &ShiftDensitySpec, x: &Point) -> f64 {
        match spec {
            ShiftDensitySpec::GStar => self.sup_shifted(x) / self.c,
            ShiftDensitySpec::UniformWindow { halfwidth } => {
                let inside = (0..self.domain.dim()).all(|j| x[j].abs() <= *halfwidth);
                if inside {
                    (2.0 * halfwidth).powi(-(self.domain.dim() as i32))
                } else {
                    0.0
                }
            }
            ShiftDensitySpec::Custom(t) => t.density(x[0]),
        }
    }

    /// Draws a shift from a shift spec (assumed validated via
    /// [`SpectralModel::esssup_bound`]).
    pub fn sample_shift_weighted(&self, spec: &ShiftDensitySpec, stream: &mut RngStream) -> Point {
        match spec {
            ShiftDensitySpec::GStar => self.sample_shift(stream),
            ShiftDensitySpec::UniformWindow { halfwidth } => {
                let mut p: Point = [0.0; MAX_DIM];
                for coord in p.iter_mut().take(self.domain.dim()) {
                    *coord = -halfwidth + 2.0 * halfwidth * stream.next_uniform();
                }
                p
            }
            ShiftDensitySpec::Custom(t) => {
                let mut p: Point = [0.0; MAX_DIM];
                p[0] = t.sample(stream);
                p
            }
        }
    }

    /// `B_w = esssup_x f̃₀(x)/w(x)`, the constant entering the stopping rule
    /// of the density-transformed sampler. Exactly `c` for `w = g*`.
    ///
    /// Returns [`ShapeError::RegularityViolation`] if `w` vanishes on a set
    /// of positive measure where `f̃₀ > 0`.
    pub fn esssup_bound(&self, spec: &ShiftDensitySpec) -> Result<f64, ShapeError> {
        match spec {
            ShiftDensitySpec::GStar => Ok(self.c),
            ShiftDensitySpec::UniformWindow { halfwidth } => {
                if !halfwidth.is_finite() || *halfwidth <= 0.0 {
                    return Err(ShapeError::BadDensity(format!(
                        "window halfwidth must be positive, got {halfwidth}"
                    )));
                }
                let support = self.envelope_support_radius().ok_or_else(|| {
                    ShapeError::RegularityViolation(
                        "uniform window vs a shape with unbounded support".into(),
                    )
                })?;
                if *halfwidth < support {
                    return Err(ShapeError::RegularityViolation(format!(
                        "window halfwidth {halfwidth} does not cover the envelope support radius {support}"
                    )));
                }
                // Window meets K, so sup f̃₀ on it is the peak.
                Ok(self.shape.peak() * (2.0 * halfwidth).powi(self.domain.dim() as i32))
            }
            ShiftDensitySpec::Custom(t) => {
                if self.domain.dim() != 1 {
                    return Err(ShapeError::BadDensity(
                        "tabulated shift densities support dim 1 only".into(),
                    ));
                }
                let support = self.envelope_support_radius().ok_or_else(|| {
                    ShapeError::RegularityViolation(
                        "tabulated density vs a shape with unbounded support".into(),
                    )
                })?;
                let (lo, hi) = t.bounds();
                if lo > -support || hi < support {
                    return Err(ShapeError::RegularityViolation(format!(
                        "density support [{lo}, {hi}] does not cover [-{support}, {support}]"
                    )));
                }
                let r = self.domain.half_width();
                let mut bound: f64 = 0.0;
                for i in 0..t.densities.len() {
                    let (b0, b1) = t.bin_bounds(i);
                    if b1 <= -support || b0 >= support {
                        continue;
                    }
                    if t.densities[i] == 0.0 {
                        return Err(ShapeError::RegularityViolation(format!(
                            "zero-weight bin [{b0}, {b1}] overlaps the envelope support"
                        )));
                    }
                    // sup of f̃₀ over the bin: f₀ at the bin's distance to K.
                    let d = if b1 < -r {
                        -r - b1
                    } else if b0 > r {
                        b0 - r
                    } else {
                        0.0
                    };
                    bound = bound.max(self.shape.eval(d) / t.densities[i]);
                }
                Ok(bound)
            }
        }
    }

    /// Radius of `{f̃₀ > 0}` around the rectangle, if compact.
    fn envelope_support_radius(&self) -> Option<f64> {
        self.shape
            .support_radius()
            .map(|r| self.domain.half_width() + r)
    }
}
