//! Paired replication runner and report assembly for the efficiency
//! comparison between the normalized and cut-off samplers.
//!
//! Replication `i` always runs on the stream derived from
//! `(master_seed, i)`, for every method, so method comparisons are paired
//! and the output is independent of the worker count: results are
//! collected in replication order and reduced sequentially.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::estimators::{self, EstimatorError, ReplicationSummary};
use crate::geometry::RectDomain;
use crate::rng::RngStream;
use crate::shapes::{RadialShape, ShapeError, SpectralModel};
use crate::simulate::{
    self, schlather_window, Method, Realization, SimError, SimOptions, StoppingVariant,
};

pub const REPORT_SCHEMA: &str = "maxfield/experiment/v1";

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Shape(#[from] ShapeError),
    #[error(transparent)]
    Geometry(#[from] crate::geometry::GeometryError),
    #[error(transparent)]
    Estimator(#[from] EstimatorError),
}

/// Runs `n_replications` independent replications, one derived stream per
/// replication index, in parallel over the current rayon pool. The result
/// vector is ordered by replication index regardless of scheduling.
pub fn run_replications<F>(
    n_replications: usize,
    master_seed: u64,
    run: F,
) -> Result<Vec<ReplicationSummary>, SimError>
where
    F: Fn(&mut RngStream) -> Result<Realization, SimError> + Sync,
{
    (0..n_replications)
        .into_par_iter()
        .map(|i| {
            let mut stream = RngStream::derive(master_seed, i as u64);
            run(&mut stream).map(|r| ReplicationSummary::from(&r))
        })
        .collect()
}

/// Experiment configuration: one Gaussian-shape model per `half_widths`
/// entry, compared against the cut-off sampler for each `cutoffs` entry.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub dim: usize,
    pub sigma: f64,
    pub grid_step: f64,
    pub half_widths: Vec<f64>,
    pub cutoffs: Vec<u32>,
    pub n_replications: usize,
    pub master_seed: u64,
    /// Attach published reference values to matching rows.
    pub compare_reference: bool,
    /// Keep per-replication trace rows in the report.
    pub collect_trace: bool,
    pub max_functions: usize,
}

impl ExperimentConfig {
    /// The d = 1 benchmark layout: σ = 1, h = 0.1, N = 5000.
    pub fn table_1d(half_widths: Vec<f64>, n_replications: usize, master_seed: u64) -> Self {
        ExperimentConfig {
            dim: 1,
            sigma: 1.0,
            grid_step: 0.1,
            half_widths,
            cutoffs: vec![2, 3],
            n_replications,
            master_seed,
            compare_reference: true,
            collect_trace: false,
            max_functions: SimOptions::default().max_functions,
        }
    }

    /// The d = 2 benchmark layout: σ = 1, h = 0.25, N = 2500.
    pub fn table_2d(half_widths: Vec<f64>, n_replications: usize, master_seed: u64) -> Self {
        ExperimentConfig {
            dim: 2,
            sigma: 1.0,
            grid_step: 0.25,
            half_widths,
            cutoffs: vec![2, 3],
            n_replications,
            master_seed,
            compare_reference: true,
            collect_trace: false,
            max_functions: SimOptions::default().max_functions,
        }
    }
}

/// Reference values attached to a row for side-by-side comparison.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct RowReference {
    pub q: f64,
    pub m: f64,
    pub a: f64,
    pub p: f64,
}

/// One `(R, k)` comparison row.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ExperimentRow {
    pub dim: usize,
    pub half_width: f64,
    pub cutoff_k: u32,
    pub n_replications: usize,
    /// Counted mean and SE for the normalized sampler.
    pub q_hat: f64,
    pub q_se: f64,
    /// Counted mean and SE for the cut-off sampler.
    pub m_hat: f64,
    pub m_se: f64,
    pub ratio: f64,
    pub ratio_se: f64,
    pub a_factor: f64,
    pub p_hat: f64,
    pub p_se: f64,
    /// `Q̂/M̂ − A·P̂` and its propagated SE.
    pub factorization_gap: f64,
    pub factorization_gap_se: f64,
    /// Formula cross-estimators (means of `c/inf` and `vol·C/inf`).
    pub formula_q: f64,
    pub formula_m: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reference: Option<RowReference>,
}

/// Per-replication trace row.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct TraceRow {
    pub method: Method,
    pub half_width: f64,
    pub cutoff_k: u32,
    pub replication: usize,
    pub n_spectral: usize,
    pub inf_field: f64,
    pub sup_field: f64,
    pub first_arrival: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ExperimentReport {
    pub schema: String,
    pub config: ExperimentConfig,
    pub rows: Vec<ExperimentRow>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub trace: Vec<TraceRow>,
}

impl PartialEq for ExperimentConfig {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim
            && self.sigma == other.sigma
            && self.grid_step == other.grid_step
            && self.half_widths == other.half_widths
            && self.cutoffs == other.cutoffs
            && self.n_replications == other.n_replications
            && self.master_seed == other.master_seed
    }
}

/// Runs the full comparison: for each half-width, N paired replications of
/// the normalized sampler and of the cut-off sampler at each `k`, reduced
/// to an [`ExperimentRow`] per `(R, k)`.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport, ExperimentError> {
    if config.n_replications < 2 {
        return Err(EstimatorError::EmptyInput {
            need: 2,
            got: config.n_replications,
        }
        .into());
    }
    let opts = SimOptions {
        max_functions: config.max_functions,
    };
    let mut rows = Vec::new();
    let mut trace = Vec::new();

    for &half_width in &config.half_widths {
        let shape = RadialShape::gaussian(config.dim, config.sigma)?;
        let domain = RectDomain::new(config.dim, half_width, config.grid_step)?;
        let model = SpectralModel::new(shape, domain)?;
        let c = model.normalizing_constant();

        let normalized = run_replications(config.n_replications, config.master_seed, |stream| {
            simulate::simulate_normalized(&model, stream, StoppingVariant::Exact, &opts)
        })?;
        if config.collect_trace {
            record_trace(&mut trace, &normalized, Method::Normalized, half_width, 0);
        }
        let counts_n = estimators::counts(&normalized);
        let inv_n = estimators::reciprocal_infima(&normalized);
        let (q_hat, q_se) = estimators::estimate_counts(&normalized)?;
        let formula_q = estimators::formula_estimate_q(&normalized, c)?;

        for &k in &config.cutoffs {
            let schlather =
                run_replications(config.n_replications, config.master_seed, |stream| {
                    simulate::simulate_schlather(&model, k, stream, &opts)
                })?;
            if config.collect_trace {
                record_trace(&mut trace, &schlather, Method::Schlather, half_width, k);
            }
            let counts_s = estimators::counts(&schlather);
            let inv_s = estimators::reciprocal_infima(&schlather);
            let (m_hat, m_se) = estimators::estimate_counts(&schlather)?;

            let window = schlather_window(&model, k);
            let (kind, param) = window.dilation();
            let vol = model.domain().dilated_volume(kind, param)?;
            let formula_m = estimators::formula_estimate_m(&schlather, vol, model.peak_bound())?;

            let a = estimators::a_factor(half_width, config.sigma, k, config.dim);
            let p_hat = estimators::p_factor(&normalized, &schlather)?;
            let p_se = estimators::paired_ratio_se(&inv_n, &inv_s);
            let ratio = q_hat / m_hat;
            let ratio_se = estimators::paired_ratio_se(&counts_n, &counts_s);
            let (gap, gap_se) =
                estimators::factorization_gap(&counts_n, &counts_s, &inv_n, &inv_s, a)?;

            let reference = if config.compare_reference {
                estimators::reference_row(config.dim, half_width).map(|r| RowReference {
                    q: r.q,
                    m: if k == 2 { r.m2 } else { r.m3 },
                    a: if k == 2 { r.a2 } else { r.a3 },
                    p: if k == 2 { r.p2 } else { r.p3 },
                })
            } else {
                None
            };

            rows.push(ExperimentRow {
                dim: config.dim,
                half_width,
                cutoff_k: k,
                n_replications: config.n_replications,
                q_hat,
                q_se,
                m_hat,
                m_se,
                ratio,
                ratio_se,
                a_factor: a,
                p_hat,
                p_se,
                factorization_gap: gap,
                factorization_gap_se: gap_se,
                formula_q,
                formula_m,
                reference,
            });
        }
    }

    Ok(ExperimentReport {
        schema: REPORT_SCHEMA.to_string(),
        config: config.clone(),
        rows,
        trace,
    })
}

fn record_trace(
    trace: &mut Vec<TraceRow>,
    summaries: &[ReplicationSummary],
    method: Method,
    half_width: f64,
    cutoff_k: u32,
) {
    for (i, s) in summaries.iter().enumerate() {
        trace.push(TraceRow {
            method,
            half_width,
            cutoff_k,
            replication: i,
            n_spectral: s.n_spectral,
            inf_field: s.inf_field,
            sup_field: s.sup_field,
            first_arrival: s.first_arrival,
        });
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_degenerate_replication_count() {
        let config = ExperimentConfig::table_1d(vec![1.0], 0, 7);
        assert!(matches!(
            run_experiment(&config),
            Err(ExperimentError::Estimator(
                EstimatorError::EmptyInput { .. }
            ))
        ));
    }

    #[test]
    fn small_run_produces_consistent_rows() {
        let config = ExperimentConfig::table_1d(vec![1.0], 200, 7);
        let report = run_experiment(&config).unwrap();
        assert_eq!(report.rows.len(), 2);
        for row in &report.rows {
            assert!(row.q_hat > 1.0 && row.m_hat > row.q_hat * 0.5);
            assert!(row.q_se > 0.0 && row.m_se > 0.0);
            assert!((row.ratio - row.q_hat / row.m_hat).abs() < 1e-15);
            assert!(row.reference.is_some());
            // The factorization gap should be small already at N = 200.
            assert!(
                row.factorization_gap.abs() < 5.0 * row.factorization_gap_se,
                "gap {} se {}",
                row.factorization_gap,
                row.factorization_gap_se
            );
        }
    }

    #[test]
    fn report_is_identical_across_thread_counts() {
        let config = ExperimentConfig::table_1d(vec![1.0], 120, 42);
        let run_with = |threads: usize| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| run_experiment(&config).unwrap())
        };
        let one = run_with(1);
        let eight = run_with(8);
        assert_eq!(one, eight);
    }

    #[test]
    fn trace_rows_cover_all_replications() {
        let mut config = ExperimentConfig::table_1d(vec![1.0], 10, 1);
        config.collect_trace = true;
        config.cutoffs = vec![2];
        let report = run_experiment(&config).unwrap();
        assert_eq!(report.trace.len(), 20);
        assert!(report.trace.iter().any(|t| t.method == Method::Schlather));
    }
}
