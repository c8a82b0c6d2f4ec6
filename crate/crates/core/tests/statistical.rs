//! Distributional checks that need large sample sizes: arrival-process
//! laws, shift-sampler laws, margin laws of the cut-off process, and the
//! formula cross-estimators. Seeds are fixed; thresholds use p > 0.001 or
//! 3σ bands.

use maxfield::estimators::{self, ReplicationSummary};
use maxfield::experiment::run_replications;
use maxfield::geometry::RectDomain;
use maxfield::rng::{ArrivalSequence, RngStream};
use maxfield::shapes::{IndicatorScaling, RadialShape, ShiftDensitySpec, SpectralModel};
use maxfield::simulate::{
    simulate_normalized, simulate_schlather, simulate_transformed, SimOptions, StoppingVariant,
};
use maxfield::stats;

fn smith(dim: usize, half_width: f64, h: f64) -> SpectralModel {
    SpectralModel::new(
        RadialShape::gaussian(dim, 1.0).unwrap(),
        RectDomain::new(dim, half_width, h).unwrap(),
    )
    .unwrap()
}

fn indicator(dim: usize, half_width: f64, h: f64, scaling: IndicatorScaling) -> SpectralModel {
    SpectralModel::new(
        RadialShape::indicator(dim, 1.0, scaling).unwrap(),
        RectDomain::new(dim, half_width, h).unwrap(),
    )
    .unwrap()
}

#[test]
fn exponential_draws_have_unit_mean() {
    let mut stream = RngStream::derive(2024, 0);
    let n = 1_000_000;
    let mut sum = 0.0;
    for _ in 0..n {
        sum += stream.next_exponential();
    }
    let mean = sum / n as f64;
    assert!((0.997..=1.003).contains(&mean), "mean {mean}");
}

#[test]
fn arrival_counts_above_level_are_poisson() {
    // The number of arrivals t_i > z is Poisson(1/z): chi-square GOF over
    // 1e5 sequences for z = 1 and z = 2.
    for (seed, z) in [(5150u64, 1.0f64), (5151, 2.0)] {
        let lambda = 1.0 / z;
        let n_seq = 100_000usize;
        let max_bin = 8usize;
        let mut observed = vec![0u64; max_bin + 1];
        let mut total = 0.0f64;
        for i in 0..n_seq {
            let mut stream = RngStream::derive(seed, i as u64);
            let mut seq = ArrivalSequence::new();
            let mut count = 0usize;
            loop {
                let (t, _) = seq.next_arrival(&mut stream);
                if t > z {
                    count += 1;
                } else {
                    break;
                }
            }
            total += count as f64;
            observed[count.min(max_bin)] += 1;
        }
        let mean = total / n_seq as f64;
        let se = (lambda / n_seq as f64).sqrt();
        assert!((mean - lambda).abs() < 3.0 * se, "z={z}: mean {mean}");

        let mut probs = vec![0.0f64; max_bin + 1];
        let mut pmf = (-lambda).exp();
        let mut acc = 0.0;
        for (k, p) in probs.iter_mut().enumerate().take(max_bin) {
            *p = pmf;
            acc += pmf;
            pmf *= lambda / (k + 1) as f64;
        }
        probs[max_bin] = 1.0 - acc;
        let (stat, p) = stats::chi_square_gof(&observed, &probs);
        assert!(p > 0.001, "z={z}: chi2 {stat}, p {p}");
    }
}

#[test]
fn gstar_shift_indicator_is_uniform_on_dilation() {
    let model = indicator(1, 1.0, 0.1, IndicatorScaling::Raw);
    let mut stream = RngStream::derive(61, 0);
    let xs: Vec<f64> = (0..100_000)
        .map(|_| model.sample_shift(&mut stream)[0])
        .collect();
    let (d, p) = stats::ks_one_sample(&xs, |x| ((x + 2.0) / 4.0).clamp(0.0, 1.0));
    assert!(p > 0.001, "D {d}, p {p}");
}

#[test]
fn gstar_shift_gaussian_interior_mass() {
    // P(|X| ≤ R) = 2R·f₀(0)/c = √(2/π)/(√(2/π)+1).
    let model = smith(1, 1.0, 0.1);
    let expected = (2.0f64 / std::f64::consts::PI).sqrt() / model.normalizing_constant();
    let n = 100_000;
    let mut stream = RngStream::derive(62, 0);
    let mut hits = 0u64;
    for _ in 0..n {
        if model.sample_shift(&mut stream)[0].abs() <= 1.0 {
            hits += 1;
        }
    }
    let p_hat = hits as f64 / n as f64;
    let se = (expected * (1.0 - expected) / n as f64).sqrt();
    assert!(
        (p_hat - expected).abs() < 3.0 * se,
        "interior mass {p_hat} vs {expected}"
    );
}

#[test]
fn gstar_shift_gaussian_2d_region_frequencies() {
    // Center, edge-band and corner masses, each over the constant c:
    // (2/π, 2√(2/π), 1)/c.
    let model = smith(2, 1.0, 0.25);
    let c = model.normalizing_constant();
    let expected = [
        2.0 / std::f64::consts::PI / c,
        2.0 * (2.0f64 / std::f64::consts::PI).sqrt() / c,
        1.0 / c,
    ];
    let n = 100_000;
    let mut stream = RngStream::derive(63, 0);
    let mut counts = [0u64; 3];
    for _ in 0..n {
        let x = model.sample_shift(&mut stream);
        let out = (x[0].abs() > 1.0) as usize + (x[1].abs() > 1.0) as usize;
        counts[out] += 1;
    }
    for (region, (&k, &p)) in counts.iter().zip(&expected).enumerate() {
        let p_hat = k as f64 / n as f64;
        let se = (p * (1.0 - p) / n as f64).sqrt();
        assert!(
            (p_hat - p).abs() < 3.0 * se,
            "region {region}: {p_hat} vs {p}"
        );
    }
}

#[test]
fn gstar_shift_gaussian_histogram_matches_envelope() {
    // Chi-square test of the empirical shift histogram against f̃₀/c on 50
    // interior bins plus two unbounded tail bins.
    let model = smith(1, 1.0, 0.1);
    let c = model.normalizing_constant();
    let peak = model.shape().peak();
    let (lo, hi) = (-5.0f64, 5.0f64);
    let n_bins = 50usize;
    let width = (hi - lo) / n_bins as f64;

    // ∫ f̃₀ over [a, b] for the 1-d Gaussian envelope with R = 1, σ = 1.
    let envelope_mass = |a: f64, b: f64| -> f64 {
        let interior = (b.min(1.0) - a.max(-1.0)).max(0.0) * peak;
        let right = if b > 1.0 {
            stats::normal_cdf(b - 1.0) - stats::normal_cdf((a - 1.0).max(0.0))
        } else {
            0.0
        };
        let left = if a < -1.0 {
            stats::normal_cdf(-1.0 - a) - stats::normal_cdf((-1.0 - b).max(0.0))
        } else {
            0.0
        };
        interior + right + left
    };

    let mut probs = Vec::with_capacity(n_bins + 2);
    probs.push(stats::normal_cdf(lo + 1.0) / c); // x < lo tail via symmetry
    for i in 0..n_bins {
        let a = lo + i as f64 * width;
        probs.push(envelope_mass(a, a + width) / c);
    }
    probs.push(stats::normal_cdf(-(hi - 1.0)) / c);

    let n = 100_000;
    let mut stream = RngStream::derive(64, 0);
    let mut observed = vec![0u64; n_bins + 2];
    for _ in 0..n {
        let x = model.sample_shift(&mut stream)[0];
        let bin = if x < lo {
            0
        } else if x >= hi {
            n_bins + 1
        } else {
            1 + ((x - lo) / width) as usize
        };
        observed[bin] += 1;
    }
    let (stat, p) = stats::chi_square_gof(&observed, &probs);
    assert!(p > 0.001, "chi2 {stat}, p {p}");
}

#[test]
fn cutoff_sampler_margin_law_is_truncated_frechet() {
    // The cut-off process has Fréchet margins with scale ∫_J f₀, which is
    // (2Φ(k)−1)^d: the truncation deficit is visible and exact.
    let model = smith(2, 1.0, 0.25);
    let opts = SimOptions::default();
    let one_d = 2.0 * stats::normal_cdf(2.0) - 1.0;
    let scale = one_d * one_d;
    let center = model.domain().n_points() / 2;
    let samples: Vec<f64> = (0..4000)
        .map(|i| {
            let mut stream = RngStream::derive(888, i);
            simulate_schlather(&model, 2, &mut stream, &opts)
                .unwrap()
                .field[center]
        })
        .collect();
    let (_, p_truncated) = stats::ks_one_sample(&samples, |z| stats::frechet_cdf(z, scale));
    let (_, p_unit) = stats::ks_one_sample(&samples, |z| stats::frechet_cdf(z, 1.0));
    assert!(p_truncated > 0.001, "p {p_truncated}");
    assert!(p_unit < 1e-4, "deficit not visible, p {p_unit}");
}

#[test]
fn formula_q_matches_counted_mean_for_smith() {
    let model = smith(1, 1.0, 0.1);
    let c = model.normalizing_constant();
    let opts = SimOptions::default();
    let summaries = run_replications(3000, 4242, |stream| {
        simulate_normalized(&model, stream, StoppingVariant::Exact, &opts)
    })
    .unwrap();
    let (counted, counted_se) = estimators::estimate_counts(&summaries).unwrap();
    let formula = estimators::formula_estimate_q(&summaries, c).unwrap();
    let formula_samples: Vec<f64> = summaries.iter().map(|s| c / s.inf_field).collect();
    let (_, formula_se) = stats::mean_and_se(&formula_samples);
    let combined = (counted_se * counted_se + formula_se * formula_se).sqrt();
    assert!(
        (formula - counted).abs() < 3.0 * combined,
        "formula {formula} vs counted {counted}"
    );
}

#[test]
fn formula_q_dominates_counted_mean_for_indicator() {
    // Flat-topped shapes break the sharpness condition, so the formula is
    // only an upper assessment of the expected count.
    let model = indicator(1, 1.0, 0.1, IndicatorScaling::Raw);
    let c = model.normalizing_constant();
    let opts = SimOptions::default();
    let summaries = run_replications(3000, 4243, |stream| {
        simulate_normalized(&model, stream, StoppingVariant::Exact, &opts)
    })
    .unwrap();
    let (counted, counted_se) = estimators::estimate_counts(&summaries).unwrap();
    let formula = estimators::formula_estimate_q(&summaries, c).unwrap();
    assert!(
        formula > counted - 3.0 * counted_se,
        "formula {formula} vs counted {counted}"
    );
}

#[test]
fn formula_m_matches_counted_mean_for_cutoff() {
    let model = smith(1, 1.0, 0.1);
    let opts = SimOptions::default();
    let k = 2;
    let summaries = run_replications(3000, 4244, |stream| {
        simulate_schlather(&model, k, stream, &opts)
    })
    .unwrap();
    let vol = model
        .domain()
        .dilated_volume(maxfield::DilationKind::Cube, 2.0)
        .unwrap();
    let peak = model.peak_bound();
    let (counted, counted_se) = estimators::estimate_counts(&summaries).unwrap();
    let formula = estimators::formula_estimate_m(&summaries, vol, peak).unwrap();
    let formula_samples: Vec<f64> = summaries.iter().map(|s| vol * peak / s.inf_field).collect();
    let (_, formula_se) = stats::mean_and_se(&formula_samples);
    let combined = (counted_se * counted_se + formula_se * formula_se).sqrt();
    assert!(
        (formula - counted).abs() < 3.0 * combined,
        "formula {formula} vs counted {counted}"
    );
}

#[test]
fn transformed_sampler_joint_exceedance_matches_oracle() {
    // Distributional equality of the density transform: joint exceedance
    // probabilities of the uniform-window sampler match the
    // exponent-measure oracle.
    let model = indicator(1, 1.0, 0.1, IndicatorScaling::Raw);
    let weight = ShiftDensitySpec::UniformWindow { halfwidth: 3.0 };
    let opts = SimOptions::default();
    let points = [[-0.5, 0.0], [0.5, 0.0]];
    let thresholds = [2.0, 2.5];
    let oracle = estimators::exponent_oracle(&model, &points, &thresholds).unwrap();

    let n = 5000usize;
    let axis_idx = [5usize, 15]; // grid points −0.5 and 0.5 at h = 0.1
    let mut joint = 0u64;
    for i in 0..n {
        let mut stream = RngStream::derive(4245, i as u64);
        let r = simulate_transformed(&model, &weight, &mut stream, &opts).unwrap();
        if r.field[axis_idx[0]] <= thresholds[0] && r.field[axis_idx[1]] <= thresholds[1] {
            joint += 1;
        }
    }
    let p_hat = joint as f64 / n as f64;
    let se = (p_hat * (1.0 - p_hat) / n as f64).sqrt();
    let diff = (-p_hat.ln() - oracle).abs();
    assert!(
        diff < 3.0 * se / p_hat,
        "-log p {} vs oracle {oracle}",
        -p_hat.ln()
    );
}

#[test]
fn p_factor_matches_reference_cells() {
    // P̂_{1,2} ≈ 0.94 and P̂_{5,3} ≈ 1.00, each within ±0.03.
    let opts = SimOptions::default();
    let cases = [(1.0f64, 2u32, 0.94f64), (5.0, 3, 1.00)];
    for (half_width, k, reference) in cases {
        let model = smith(1, half_width, 0.1);
        let normalized = run_replications(2500, 9001, |stream| {
            simulate_normalized(&model, stream, StoppingVariant::Exact, &opts)
        })
        .unwrap();
        let schlather = run_replications(2500, 9001, |stream| {
            simulate_schlather(&model, k, stream, &opts)
        })
        .unwrap();
        let p = estimators::p_factor(&normalized, &schlather).unwrap();
        assert!(
            (p - reference).abs() < 0.03,
            "P̂ for R={half_width}, k={k}: {p} vs {reference}"
        );
    }
}

#[test]
fn summary_conversion_keeps_scalars() {
    let model = smith(1, 1.0, 0.5);
    let mut stream = RngStream::derive(1, 1);
    let r = simulate_normalized(
        &model,
        &mut stream,
        StoppingVariant::Exact,
        &SimOptions::default(),
    )
    .unwrap();
    let s = ReplicationSummary::from(&r);
    assert_eq!(s.n_spectral, r.n_spectral);
    assert_eq!(s.inf_field, r.inf_field);
    assert_eq!(s.sup_field, r.sup_field);
    assert_eq!(s.first_arrival, r.first_arrival);
}
