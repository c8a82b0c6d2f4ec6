//! Exact field samplers.
//!
//! All three samplers share the same skeleton: walk the descending Poisson
//! arrivals `t_i = 1/S_i`, overlay one shifted shape per arrival onto the
//! running pointwise maximum, and stop as soon as the next arrival can no
//! longer change the field anywhere on the grid.
//!
//! - [`simulate_normalized`]: spectral functions rescaled to share the
//!   supremum `c` over the rectangle, shifts drawn from the optimal density
//!   `f̃₀/c`. Stops when `c·t_{m+1} ≤ inf Z^{(m)}`.
//! - [`simulate_schlather`]: the classical cut-off sampler; uniform shifts
//!   on `K ⊕ J̌`, shapes zeroed outside the window `J`, stop bound given by
//!   the shape peak, final field scaled by `|K ⊕ J̌|`.
//! - [`simulate_transformed`]: generic density transform; shifts drawn from
//!   an arbitrary admissible density `w`, stop bound `B_w = sup f̃₀/w`.
//!
//! The terminating exponential `E_{m+1}` is drawn and recorded but its
//! shape function is never sampled; `n_spectral` counts overlaid functions
//! only.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{
    sample_uniform_ball_dilation, sample_uniform_cube_dilation, DilationKind, GeometryError, Point,
    RectDomain, MAX_DIM,
};
use crate::rng::{ArrivalSequence, RngStream};
use crate::shapes::{RadialShape, ShapeError, ShapeKind, ShiftDensitySpec, SpectralModel};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("spectral-function budget exhausted ({limit} functions overlaid without stopping)")]
    BudgetExhausted { limit: usize },
    #[error("cutoff_k must be a positive integer")]
    InvalidCutoff,
    #[error(transparent)]
    Shape(#[from] ShapeError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Which sampler produced a realization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Normalized,
    Schlather,
    Transformed,
}

/// Stopping-rule variant for the normalized sampler.
///
/// For the moving-maxima models built here, shifts range over all of
/// `ℝ^d`, so the essential supremum in the exact rule attains `c` and the
/// exact rule coincides with the strong one; both labels run the same test
/// `c·t_{m+1} ≤ inf Z^{(m)}` over the grid. The weak rule compares against
/// the supremum instead, which over the continuum rectangle is exactly
/// `c·t₁` for every m, so it stops after the first function surely.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StoppingVariant {
    Exact,
    Strong,
    Weak,
}

/// Simulation limits.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SimOptions {
    /// Hard cap on the number of overlaid spectral functions.
    pub max_functions: usize,
}

impl Default for SimOptions {
    fn default() -> Self {
        SimOptions {
            max_functions: 10_000_000,
        }
    }
}

/// The cut-off window `J` of the Schlather sampler.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum CutoffWindow {
    Cube { halfwidth: f64 },
    Ball { radius: f64 },
}

impl CutoffWindow {
    pub fn dilation(&self) -> (DilationKind, f64) {
        match *self {
            CutoffWindow::Cube { halfwidth } => (DilationKind::Cube, halfwidth),
            CutoffWindow::Ball { radius } => (DilationKind::Ball, radius),
        }
    }
}

/// Window used by [`simulate_schlather`]: `[−kσ, kσ]^d` for the Gaussian
/// shape, the exact support ball for indicator shapes.
pub fn schlather_window(model: &SpectralModel, cutoff_k: u32) -> CutoffWindow {
    match model.shape().kind() {
        ShapeKind::Gaussian { sigma } => CutoffWindow::Cube {
            halfwidth: cutoff_k as f64 * sigma,
        },
        ShapeKind::Indicator { radius, .. } => CutoffWindow::Ball { radius },
    }
}

/// One simulated field.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Realization {
    /// Grid values in row-major (lexicographic) order.
    pub field: Vec<f64>,
    /// Number of overlaid spectral functions (m, or M for the cut-off
    /// sampler).
    pub n_spectral: usize,
    pub inf_field: f64,
    pub sup_field: f64,
    /// `t₁ = 1/E₁`.
    pub first_arrival: f64,
    /// Recorded partial sums `S_1, …, S_{m+1}` of the exponentials,
    /// including the terminating one.
    pub partial_sums: Vec<f64>,
    pub method: Method,
    pub variant: StoppingVariant,
}

impl Realization {
    /// Arrivals drawn, including the terminating one: `m + 1`.
    pub fn arrivals_consumed(&self) -> usize {
        self.partial_sums.len()
    }
}

fn min_max(xs: &[f64]) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &x in xs {
        if x < lo {
            lo = x;
        }
        if x > hi {
            hi = x;
        }
    }
    (lo, hi)
}

/// Overlays `y ↦ scale · f₀(‖y − center‖)/divisor` onto the running
/// maximum, restricted to `window` when given.
///
/// Cells that provably cannot exceed `current_inf` are skipped: beyond the
/// indicator support, or beyond the radius where the Gaussian value drops
/// below the field minimum (padded by one grid step so the skip never
/// changes the result). Per-cell values are computed as
/// `scale * (f₀/divisor)`; for the normalized sampler the ratio is ≤ 1, so
/// every written value is bounded by `scale` even after rounding, which is
/// what makes the stop-index recomputation exact.
#[allow(clippy::too_many_arguments, clippy::needless_range_loop)]
pub(crate) fn overlay(
    field: &mut [f64],
    domain: &RectDomain,
    shape: &RadialShape,
    center: &Point,
    scale: f64,
    divisor: f64,
    window: Option<&CutoffWindow>,
    current_inf: f64,
) {
    let reach = match shape.kind() {
        ShapeKind::Indicator { radius, .. } => radius,
        ShapeKind::Gaussian { sigma } => {
            if current_inf > 0.0 {
                let top = scale * shape.peak() / divisor;
                if top < current_inf {
                    return;
                }
                sigma * (2.0 * (top / current_inf).ln()).sqrt() + domain.grid_step()
            } else {
                f64::INFINITY
            }
        }
    };
    let mut ext = [reach; MAX_DIM];
    if let Some(w) = window {
        let bound = match *w {
            CutoffWindow::Cube { halfwidth } => halfwidth,
            CutoffWindow::Ball { radius } => radius,
        };
        for e in ext.iter_mut() {
            *e = e.min(bound);
        }
    }

    let axis = domain.axis();
    let n = axis.len();
    let h = domain.grid_step();
    let r = domain.half_width();
    let dim = domain.dim();

    // Conservative index range covering [x − e, x + e] on one axis.
    let range = |x: f64, e: f64| -> Option<(usize, usize)> {
        if !e.is_finite() {
            return Some((0, n - 1));
        }
        let lo = ((x - e + r) / h).floor() - 1.0;
        let hi = ((x + e + r) / h).ceil() + 1.0;
        if hi < 0.0 || lo > (n - 1) as f64 {
            return None;
        }
        Some((lo.max(0.0) as usize, hi.min((n - 1) as f64) as usize))
    };

    let Some((lo0, hi0)) = range(center[0], ext[0]) else {
        return;
    };
    let (lo1, hi1) = if dim == 2 {
        match range(center[1], ext[1]) {
            Some(b) => b,
            None => return,
        }
    } else {
        (0, 0)
    };

    for i0 in lo0..=hi0 {
        let dy0 = axis[i0] - center[0];
        for i1 in lo1..=hi1 {
            let (d, idx) = if dim == 1 {
                ((dy0 * dy0).sqrt(), i0)
            } else {
                let dy1 = axis[i1] - center[1];
                let mut s = dy0 * dy0;
                s += dy1 * dy1;
                (s.sqrt(), i0 * n + i1)
            };
            if let Some(w) = window {
                let inside = match *w {
                    CutoffWindow::Cube { halfwidth } => {
                        dy0.abs() <= halfwidth
                            && (dim == 1 || (axis[i1] - center[1]).abs() <= halfwidth)
                    }
                    CutoffWindow::Ball { radius } => d <= radius,
                };
                if !inside {
                    continue;
                }
            }
            let value = scale * (shape.eval(d) / divisor);
            if value > field[idx] {
                field[idx] = value;
            }
        }
    }
}

/// Exact sampler built on the normalized spectral representation.
///
/// Each arrival `t_i` overlays `y ↦ c·t_i·f₀(‖y − X_i‖)/f̃₀(X_i)` with
/// `X_i ~ f̃₀/c`, then the next exponential is drawn and the variant's stop
/// test runs. Returns the number of overlaid functions and the recorded
/// partial sums.
pub fn simulate_normalized(
    model: &SpectralModel,
    stream: &mut RngStream,
    variant: StoppingVariant,
    opts: &SimOptions,
) -> Result<Realization, SimError> {
    let c = model.normalizing_constant();
    let domain = model.domain();
    let shape = *model.shape();
    let mut field = vec![0.0; domain.n_points()];
    let mut arrivals = ArrivalSequence::new();

    let (t1, _) = arrivals.next_arrival(stream);
    let x = model.sample_shift(stream);
    overlay(
        &mut field,
        domain,
        &shape,
        &x,
        c * t1,
        model.sup_shifted(&x),
        None,
        0.0,
    );
    let (mut inf, mut sup) = min_max(&field);
    let mut m = 1usize;

    loop {
        let (t_next, _) = arrivals.next_arrival(stream);
        let stop = match variant {
            StoppingVariant::Exact | StoppingVariant::Strong => c * t_next <= inf,
            // sup over the continuum rectangle of Z^(m) is c·t₁ exactly.
            StoppingVariant::Weak => t_next <= t1,
        };
        if stop {
            break;
        }
        if m >= opts.max_functions {
            return Err(SimError::BudgetExhausted {
                limit: opts.max_functions,
            });
        }
        let x = model.sample_shift(stream);
        overlay(
            &mut field,
            domain,
            &shape,
            &x,
            c * t_next,
            model.sup_shifted(&x),
            None,
            inf,
        );
        (inf, sup) = min_max(&field);
        m += 1;
    }

    Ok(Realization {
        field,
        n_spectral: m,
        inf_field: inf,
        sup_field: sup,
        first_arrival: t1,
        partial_sums: arrivals.partial_sums().to_vec(),
        method: Method::Normalized,
        variant,
    })
}

/// Cut-off sampler: uniform shifts on `K ⊕ J̌`, shapes zeroed outside `J`,
/// stop bound `C·t_{m+1} ≤ inf` on the unscaled field, final field scaled
/// by `|K ⊕ J̌|`.
pub fn simulate_schlather(
    model: &SpectralModel,
    cutoff_k: u32,
    stream: &mut RngStream,
    opts: &SimOptions,
) -> Result<Realization, SimError> {
    if cutoff_k == 0 {
        return Err(SimError::InvalidCutoff);
    }
    let domain = model.domain();
    let shape = *model.shape();
    let window = schlather_window(model, cutoff_k);
    let (kind, param) = window.dilation();
    let vol = domain.dilated_volume(kind, param)?;
    let peak = shape.peak();

    let mut field = vec![0.0; domain.n_points()];
    let mut arrivals = ArrivalSequence::new();
    let sample = |stream: &mut RngStream| -> Point {
        match window {
            CutoffWindow::Cube { halfwidth } => {
                sample_uniform_cube_dilation(domain, halfwidth, stream)
            }
            CutoffWindow::Ball { radius } => sample_uniform_ball_dilation(domain, radius, stream),
        }
    };

    let (t1, _) = arrivals.next_arrival(stream);
    let u = sample(stream);
    overlay(&mut field, domain, &shape, &u, t1, 1.0, Some(&window), 0.0);
    let (mut inf, _) = min_max(&field);
    let mut m = 1usize;

    loop {
        let (t_next, _) = arrivals.next_arrival(stream);
        if peak * t_next <= inf {
            break;
        }
        if m >= opts.max_functions {
            return Err(SimError::BudgetExhausted {
                limit: opts.max_functions,
            });
        }
        let u = sample(stream);
        overlay(
            &mut field,
            domain,
            &shape,
            &u,
            t_next,
            1.0,
            Some(&window),
            inf,
        );
        (inf, _) = min_max(&field);
        m += 1;
    }

    for v in field.iter_mut() {
        *v *= vol;
    }
    let (inf, sup) = min_max(&field);

    Ok(Realization {
        field,
        n_spectral: m,
        inf_field: inf,
        sup_field: sup,
        first_arrival: t1,
        partial_sums: arrivals.partial_sums().to_vec(),
        method: Method::Schlather,
        variant: StoppingVariant::Exact,
    })
}

/// Density-transformed sampler: shifts `X_i ~ w`, overlays
/// `t_i·f₀(‖y − X_i‖)/w(X_i)`, strong stop rule `B_w·t_{m+1} ≤ inf` with
/// `B_w = esssup f̃₀/w` (valid for any admissible `w`).
pub fn simulate_transformed(
    model: &SpectralModel,
    weight: &ShiftDensitySpec,
    stream: &mut RngStream,
    opts: &SimOptions,
) -> Result<Realization, SimError> {
    if matches!(weight, ShiftDensitySpec::GStar) {
        // Same sampler path by construction.
        let mut r = simulate_normalized(model, stream, StoppingVariant::Strong, opts)?;
        r.method = Method::Transformed;
        return Ok(r);
    }
    let bound = model.esssup_bound(weight)?;
    let domain = model.domain();
    let shape = *model.shape();

    let mut field = vec![0.0; domain.n_points()];
    let mut arrivals = ArrivalSequence::new();

    let (t1, _) = arrivals.next_arrival(stream);
    let x = model.sample_shift_weighted(weight, stream);
    overlay(
        &mut field,
        domain,
        &shape,
        &x,
        t1,
        model.shift_density(weight, &x),
        None,
        0.0,
    );
    let (mut inf, mut sup) = min_max(&field);
    let mut m = 1usize;

    loop {
        let (t_next, _) = arrivals.next_arrival(stream);
        if bound * t_next <= inf {
            break;
        }
        if m >= opts.max_functions {
            return Err(SimError::BudgetExhausted {
                limit: opts.max_functions,
            });
        }
        let x = model.sample_shift_weighted(weight, stream);
        overlay(
            &mut field,
            domain,
            &shape,
            &x,
            t_next,
            model.shift_density(weight, &x),
            None,
            inf,
        );
        (inf, sup) = min_max(&field);
        m += 1;
    }

    Ok(Realization {
        field,
        n_spectral: m,
        inf_field: inf,
        sup_field: sup,
        first_arrival: t1,
        partial_sums: arrivals.partial_sums().to_vec(),
        method: Method::Transformed,
        variant: StoppingVariant::Strong,
    })
}

/// Recomputes the stopping index from a final field and the recorded
/// partial sums: the smallest `m̃ ≥ 1` with `bound·t_{m̃+1}` strictly below
/// the final field minimum.
///
/// The strict comparison is what makes this an exact integer identity with
/// the counted `n_spectral`: an overlay can raise a boundary grid point to
/// exactly `bound·t_{m̃+1}` (the shifted shape attains its supremum at ±R,
/// which is a grid point), and such ties must not terminate the
/// recomputation early.
pub fn stop_index_from_final(bound: f64, inf_field: f64, partial_sums: &[f64]) -> Option<usize> {
    partial_sums
        .iter()
        .skip(1)
        .position(|&s| bound * (1.0 / s) < inf_field)
        .map(|p| p + 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::RectDomain;
    use crate::shapes::{IndicatorScaling, RadialShape};

    fn smith_1d(r: f64, h: f64) -> SpectralModel {
        SpectralModel::new(
            RadialShape::gaussian(1, 1.0).unwrap(),
            RectDomain::new(1, r, h).unwrap(),
        )
        .unwrap()
    }

    fn indicator_raw(dim: usize, r_dom: f64, h: f64) -> SpectralModel {
        SpectralModel::new(
            RadialShape::indicator(dim, 1.0, IndicatorScaling::Raw).unwrap(),
            RectDomain::new(dim, r_dom, h).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn singleton_domain_needs_exactly_one_function() {
        let model = SpectralModel::new(
            RadialShape::gaussian(1, 1.0).unwrap(),
            RectDomain::new(1, 0.0, 0.1).unwrap(),
        )
        .unwrap();
        let opts = SimOptions::default();
        for i in 0..1000 {
            let mut stream = RngStream::derive(404, i);
            let r =
                simulate_normalized(&model, &mut stream, StoppingVariant::Exact, &opts).unwrap();
            assert_eq!(r.n_spectral, 1);
            // c = 1 for a unit-integral shape on a single point: Z = t₁.
            assert_eq!(r.field, vec![r.first_arrival]);
        }
    }

    #[test]
    fn weak_variant_always_stops_after_first_function() {
        let opts = SimOptions::default();
        let models = [smith_1d(1.0, 0.1), indicator_raw(1, 1.0, 0.25)];
        for model in &models {
            for i in 0..1000 {
                let mut stream = RngStream::derive(7, i);
                let r =
                    simulate_normalized(model, &mut stream, StoppingVariant::Weak, &opts).unwrap();
                assert_eq!(r.n_spectral, 1);
            }
        }
    }

    #[test]
    fn exact_and_strong_coincide_and_dominate_weak() {
        let model = smith_1d(1.0, 0.1);
        let opts = SimOptions::default();
        for i in 0..200 {
            let exact = simulate_normalized(
                &model,
                &mut RngStream::derive(5, i),
                StoppingVariant::Exact,
                &opts,
            )
            .unwrap();
            let strong = simulate_normalized(
                &model,
                &mut RngStream::derive(5, i),
                StoppingVariant::Strong,
                &opts,
            )
            .unwrap();
            let weak = simulate_normalized(
                &model,
                &mut RngStream::derive(5, i),
                StoppingVariant::Weak,
                &opts,
            )
            .unwrap();
            assert_eq!(exact.n_spectral, strong.n_spectral);
            assert_eq!(exact.field, strong.field);
            assert!(weak.n_spectral <= strong.n_spectral);
        }
    }

    #[test]
    fn field_is_positive_and_extrema_are_consistent() {
        let opts = SimOptions::default();
        for (k, model) in [smith_1d(1.0, 0.1), indicator_raw(1, 1.0, 0.25)]
            .iter()
            .enumerate()
        {
            for i in 0..100 {
                let mut stream = RngStream::derive(900 + k as u64, i);
                let r =
                    simulate_normalized(model, &mut stream, StoppingVariant::Exact, &opts).unwrap();
                assert!(r.field.iter().all(|&v| v > 0.0));
                let (lo, hi) = (
                    r.field.iter().cloned().fold(f64::INFINITY, f64::min),
                    r.field.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
                );
                assert_eq!((lo, hi), (r.inf_field, r.sup_field));
                assert!(r.n_spectral >= 1);
                assert_eq!(r.arrivals_consumed(), r.n_spectral + 1);
            }
        }
    }

    #[test]
    fn stop_threshold_sequence_is_strictly_decreasing() {
        let model = smith_1d(1.0, 0.1);
        let mut stream = RngStream::derive(21, 0);
        let r = simulate_normalized(
            &model,
            &mut stream,
            StoppingVariant::Exact,
            &SimOptions::default(),
        )
        .unwrap();
        let c = model.normalizing_constant();
        let mut prev = f64::INFINITY;
        for &s in &r.partial_sums {
            let threshold = c * (1.0 / s);
            assert!(threshold < prev);
            prev = threshold;
        }
    }

    #[test]
    fn per_replication_identity_recovers_count() {
        let model = smith_1d(1.0, 0.1);
        let c = model.normalizing_constant();
        let opts = SimOptions::default();
        for i in 0..500 {
            let mut stream = RngStream::derive(31_337, i);
            let r =
                simulate_normalized(&model, &mut stream, StoppingVariant::Exact, &opts).unwrap();
            let recomputed = stop_index_from_final(c, r.inf_field, &r.partial_sums);
            assert_eq!(recomputed, Some(r.n_spectral), "replication {i}");
        }
    }

    #[test]
    fn continuum_sup_identity_per_replication() {
        // sup over the grid sits in (1 − ε, 1] · c·t₁ with
        // ε = 1 − f₀(h/2)/f₀(0), the worst grid offset.
        let model = smith_1d(1.0, 0.1);
        let c = model.normalizing_constant();
        let eps = 1.0 - (-0.1f64 * 0.1 / 8.0).exp();
        let opts = SimOptions::default();
        for i in 0..500 {
            let mut stream = RngStream::derive(77, i);
            let r =
                simulate_normalized(&model, &mut stream, StoppingVariant::Exact, &opts).unwrap();
            let ratio = r.sup_field / (c * r.first_arrival);
            assert!(ratio <= 1.0 + 1e-12, "ratio {ratio}");
            assert!(ratio > 1.0 - eps - 1e-12, "ratio {ratio}");
        }
    }

    #[test]
    fn indicator_fields_coincide_with_cutoff_sampler() {
        // Matched streams: identical draw sequences make the two samplers
        // produce bit-identical fields and equal counts.
        let opts = SimOptions::default();
        for dim in [1usize, 2] {
            let model = indicator_raw(dim, 1.0, 0.25);
            for i in 0..50 {
                let mut s1 = RngStream::derive(123, i);
                let mut s2 = RngStream::derive(123, i);
                let a =
                    simulate_normalized(&model, &mut s1, StoppingVariant::Exact, &opts).unwrap();
                let b = simulate_schlather(&model, 2, &mut s2, &opts).unwrap();
                assert_eq!(a.n_spectral, b.n_spectral, "dim {dim} rep {i}");
                assert_eq!(a.field, b.field, "dim {dim} rep {i}");
            }
        }
    }

    #[test]
    fn transformed_with_gstar_matches_normalized_exactly() {
        let model = smith_1d(1.0, 0.1);
        let opts = SimOptions::default();
        let mut s1 = RngStream::derive(55, 3);
        let mut s2 = RngStream::derive(55, 3);
        let a = simulate_normalized(&model, &mut s1, StoppingVariant::Strong, &opts).unwrap();
        let b = simulate_transformed(&model, &ShiftDensitySpec::GStar, &mut s2, &opts).unwrap();
        assert_eq!(a.field, b.field);
        assert_eq!(a.n_spectral, b.n_spectral);
        assert_eq!(b.method, Method::Transformed);
    }

    #[test]
    fn transformed_rejects_inadmissible_weights() {
        let gauss = smith_1d(1.0, 0.1);
        let mut stream = RngStream::derive(9, 9);
        let err = simulate_transformed(
            &gauss,
            &ShiftDensitySpec::UniformWindow { halfwidth: 10.0 },
            &mut stream,
            &SimOptions::default(),
        )
        .unwrap_err();
        assert!(matches!(
            err,
            SimError::Shape(ShapeError::RegularityViolation(_))
        ));
    }

    #[test]
    fn budget_exhaustion_is_reported() {
        let model = smith_1d(5.0, 0.5);
        let mut stream = RngStream::derive(2, 2);
        let err = simulate_normalized(
            &model,
            &mut stream,
            StoppingVariant::Exact,
            &SimOptions { max_functions: 2 },
        )
        .unwrap_err();
        assert!(matches!(err, SimError::BudgetExhausted { limit: 2 }));
    }

    #[test]
    fn schlather_rejects_zero_cutoff() {
        let model = smith_1d(1.0, 0.1);
        let mut stream = RngStream::derive(1, 1);
        assert!(matches!(
            simulate_schlather(&model, 0, &mut stream, &SimOptions::default()),
            Err(SimError::InvalidCutoff)
        ));
    }

    #[test]
    fn overlay_skip_matches_full_scan_bitwise() {
        // The reach cutoff must never change the result, only skip cells
        // that cannot win the max.
        let model = smith_1d(2.0, 0.1);
        let domain = model.domain();
        let shape = *model.shape();
        let mut stream = RngStream::derive(42, 42);
        let mut field_full = vec![0.4; domain.n_points()];
        // Seed an uneven field.
        for (i, v) in field_full.iter_mut().enumerate() {
            *v += 0.3 * ((i % 7) as f64) / 7.0;
        }
        let mut field_skip = field_full.clone();
        for _ in 0..200 {
            let x = model.sample_shift(&mut stream);
            let t = 0.2 + stream.next_uniform();
            let scale = model.normalizing_constant() * t;
            let div = model.sup_shifted(&x);
            let inf = min_max(&field_skip).0;
            overlay(&mut field_full, domain, &shape, &x, scale, div, None, 0.0);
            overlay(&mut field_skip, domain, &shape, &x, scale, div, None, inf);
            assert_eq!(field_full, field_skip);
        }
    }

    #[test]
    fn overlay_is_monotone() {
        let model = smith_1d(1.0, 0.1);
        let domain = model.domain();
        let shape = *model.shape();
        let mut stream = RngStream::derive(6, 6);
        let mut field = vec![0.0; domain.n_points()];
        for _ in 0..50 {
            let before = field.clone();
            let x = model.sample_shift(&mut stream);
            let inf = min_max(&field).0.max(0.0);
            overlay(
                &mut field,
                domain,
                &shape,
                &x,
                0.5,
                model.sup_shifted(&x),
                None,
                inf,
            );
            for (b, a) in before.iter().zip(&field) {
                assert!(a >= b);
            }
        }
    }
}
