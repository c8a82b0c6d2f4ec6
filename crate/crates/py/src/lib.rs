//! Python bindings: the simulators, the normalizing constant, the
//! domain-size factor and the exponent-measure oracle, exposed as plain
//! functions returning dicts and floats.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use maxfield::estimators;
use maxfield::experiment::run_replications;
use maxfield::geometry::{Point, RectDomain};
use maxfield::rng::RngStream;
use maxfield::shapes::{IndicatorScaling, RadialShape, ShiftDensitySpec, SpectralModel};
use maxfield::simulate::{
    simulate_normalized, simulate_schlather, simulate_transformed, Realization, SimOptions,
    StoppingVariant,
};

fn value_err<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

#[allow(clippy::too_many_arguments)]
fn build_model(
    shape: &str,
    dim: usize,
    half_width: f64,
    grid_step: f64,
    sigma: Option<f64>,
    radius: Option<f64>,
    scaling: &str,
) -> PyResult<SpectralModel> {
    let domain = RectDomain::new(dim, half_width, grid_step).map_err(value_err)?;
    let shape = match shape {
        "gaussian" => {
            let sigma = sigma.ok_or_else(|| PyValueError::new_err("gaussian shape needs sigma"))?;
            RadialShape::gaussian(dim, sigma).map_err(value_err)?
        }
        "indicator" => {
            let radius =
                radius.ok_or_else(|| PyValueError::new_err("indicator shape needs radius"))?;
            let scaling = match scaling {
                "unit" => IndicatorScaling::UnitIntegral,
                "raw" => IndicatorScaling::Raw,
                other => {
                    return Err(PyValueError::new_err(format!(
                        "scaling must be 'unit' or 'raw', got {other:?}"
                    )))
                }
            };
            RadialShape::indicator(dim, radius, scaling).map_err(value_err)?
        }
        other => {
            return Err(PyValueError::new_err(format!(
                "shape must be 'gaussian' or 'indicator', got {other:?}"
            )))
        }
    };
    SpectralModel::new(shape, domain).map_err(value_err)
}

enum RunSpec {
    Normalized(StoppingVariant),
    Schlather(u32),
    Transformed(ShiftDensitySpec),
}

fn parse_run_spec(
    method: &str,
    variant: &str,
    cutoff_k: u32,
    weight: &str,
    weight_halfwidth: Option<f64>,
) -> PyResult<RunSpec> {
    let variant = match variant {
        "exact" => StoppingVariant::Exact,
        "strong" => StoppingVariant::Strong,
        "weak" => StoppingVariant::Weak,
        other => {
            return Err(PyValueError::new_err(format!(
                "variant must be exact, strong or weak, got {other:?}"
            )))
        }
    };
    match method {
        "normalized" => Ok(RunSpec::Normalized(variant)),
        "schlather" => Ok(RunSpec::Schlather(cutoff_k)),
        "transformed" => {
            let weight = match weight {
                "gstar" => ShiftDensitySpec::GStar,
                "uniform" => ShiftDensitySpec::UniformWindow {
                    halfwidth: weight_halfwidth.ok_or_else(|| {
                        PyValueError::new_err("uniform weight needs weight_halfwidth")
                    })?,
                },
                other => {
                    return Err(PyValueError::new_err(format!(
                        "weight must be gstar or uniform, got {other:?}"
                    )))
                }
            };
            Ok(RunSpec::Transformed(weight))
        }
        other => Err(PyValueError::new_err(format!(
            "method must be normalized, schlather or transformed, got {other:?}"
        ))),
    }
}

fn run_one(
    model: &SpectralModel,
    spec: &RunSpec,
    stream: &mut RngStream,
    opts: &SimOptions,
) -> Result<Realization, maxfield::simulate::SimError> {
    match spec {
        RunSpec::Normalized(variant) => simulate_normalized(model, stream, *variant, opts),
        RunSpec::Schlather(k) => simulate_schlather(model, *k, stream, opts),
        RunSpec::Transformed(weight) => simulate_transformed(model, weight, stream, opts),
    }
}

/// The constant c = ∫ f̃₀ of the normalized spectral representation.
#[pyfunction]
#[pyo3(signature = (shape, dim, half_width, sigma=None, radius=None, scaling="unit"))]
fn normalizing_constant(
    shape: &str,
    dim: usize,
    half_width: f64,
    sigma: Option<f64>,
    radius: Option<f64>,
    scaling: &str,
) -> PyResult<f64> {
    // Any aligned grid step works; c only depends on the rectangle.
    let step = if half_width > 0.0 { half_width } else { 1.0 };
    let model = build_model(shape, dim, half_width, step, sigma, radius, scaling)?;
    Ok(model.normalizing_constant())
}

/// Closed-form domain-size factor A of the efficiency ratio Q/E M_k.
#[pyfunction]
fn a_factor(half_width: f64, sigma: f64, cutoff_k: u32, dim: usize) -> f64 {
    estimators::a_factor(half_width, sigma, cutoff_k, dim)
}

/// Simulates one field and returns a dict with the grid axis, the field
/// values in row-major order and the stopping diagnostics.
#[pyfunction]
#[pyo3(signature = (shape, dim, half_width, grid_step, method, seed,
                    sigma=None, radius=None, scaling="unit", variant="exact",
                    cutoff_k=3, weight="gstar", weight_halfwidth=None,
                    replication=0, max_functions=10_000_000))]
#[allow(clippy::too_many_arguments)]
fn simulate<'py>(
    py: Python<'py>,
    shape: &str,
    dim: usize,
    half_width: f64,
    grid_step: f64,
    method: &str,
    seed: u64,
    sigma: Option<f64>,
    radius: Option<f64>,
    scaling: &str,
    variant: &str,
    cutoff_k: u32,
    weight: &str,
    weight_halfwidth: Option<f64>,
    replication: u64,
    max_functions: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let model = build_model(shape, dim, half_width, grid_step, sigma, radius, scaling)?;
    let spec = parse_run_spec(method, variant, cutoff_k, weight, weight_halfwidth)?;
    let opts = SimOptions { max_functions };
    let mut stream = RngStream::derive(seed, replication);
    let r = run_one(&model, &spec, &mut stream, &opts).map_err(value_err)?;
    let d = PyDict::new(py);
    d.set_item("axis", model.domain().axis().to_vec())?;
    d.set_item("dim", dim)?;
    d.set_item("values", r.field)?;
    d.set_item("m", r.n_spectral)?;
    d.set_item("inf", r.inf_field)?;
    d.set_item("sup", r.sup_field)?;
    d.set_item("t1", r.first_arrival)?;
    d.set_item("normalizing_constant", model.normalizing_constant())?;
    Ok(d)
}

/// Mean and standard error of the spectral-function count over
/// `n_replications` paired streams.
#[pyfunction]
#[pyo3(signature = (shape, dim, half_width, grid_step, method, seed, n_replications,
                    sigma=None, radius=None, scaling="unit", variant="exact",
                    cutoff_k=3, weight="gstar", weight_halfwidth=None))]
#[allow(clippy::too_many_arguments)]
fn mean_count(
    shape: &str,
    dim: usize,
    half_width: f64,
    grid_step: f64,
    method: &str,
    seed: u64,
    n_replications: usize,
    sigma: Option<f64>,
    radius: Option<f64>,
    scaling: &str,
    variant: &str,
    cutoff_k: u32,
    weight: &str,
    weight_halfwidth: Option<f64>,
) -> PyResult<(f64, f64)> {
    let model = build_model(shape, dim, half_width, grid_step, sigma, radius, scaling)?;
    let spec = parse_run_spec(method, variant, cutoff_k, weight, weight_halfwidth)?;
    let opts = SimOptions::default();
    let summaries = run_replications(n_replications, seed, |stream| {
        run_one(&model, &spec, stream, &opts)
    })
    .map_err(value_err)?;
    estimators::estimate_counts(&summaries).map_err(value_err)
}

/// Exponent-measure value −log P(Z(y_i) ≤ z_i for all i), by quadrature.
#[pyfunction]
#[pyo3(signature = (shape, dim, half_width, points, thresholds, sigma=None, radius=None, scaling="unit"))]
#[allow(clippy::too_many_arguments)]
fn exponent_measure(
    shape: &str,
    dim: usize,
    half_width: f64,
    points: Vec<Vec<f64>>,
    thresholds: Vec<f64>,
    sigma: Option<f64>,
    radius: Option<f64>,
    scaling: &str,
) -> PyResult<f64> {
    let step = if half_width > 0.0 { half_width } else { 1.0 };
    let model = build_model(shape, dim, half_width, step, sigma, radius, scaling)?;
    let points: Vec<Point> = points
        .into_iter()
        .map(|p| {
            if p.is_empty() || p.len() > 2 {
                Err(PyValueError::new_err("points must have 1 or 2 coordinates"))
            } else {
                Ok([p[0], p.get(1).copied().unwrap_or(0.0)])
            }
        })
        .collect::<PyResult<_>>()?;
    estimators::exponent_oracle(&model, &points, &thresholds).map_err(value_err)
}

#[pymodule]
fn maxfield_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(normalizing_constant, m)?)?;
    m.add_function(wrap_pyfunction!(a_factor, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(mean_count, m)?)?;
    m.add_function(wrap_pyfunction!(exponent_measure, m)?)?;
    Ok(())
}
