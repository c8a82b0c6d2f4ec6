//! Small statistical toolbox: compensated means, Kolmogorov-Smirnov and
//! chi-square tests, and the Fréchet distribution used for margin checks.

use statrs::function::erf::erfc;
use statrs::function::gamma::gamma_ur;

/// Neumaier-compensated sum; reductions over replications stay
/// order-independent to within one rounding of the final result.
pub fn compensated_sum(xs: &[f64]) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for &x in xs {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

pub fn mean(xs: &[f64]) -> f64 {
    compensated_sum(xs) / xs.len() as f64
}

/// Sample mean and its standard error `sd/√n` (n−1 denominator in the
/// variance). Requires at least two observations.
pub fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = mean(xs);
    let devs: Vec<f64> = xs.iter().map(|&x| (x - m) * (x - m)).collect();
    let var = compensated_sum(&devs) / (n - 1.0);
    (m, (var / n).sqrt())
}

/// Sample covariance (n−1 denominator).
pub fn covariance(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    let mx = mean(xs);
    let my = mean(ys);
    let prods: Vec<f64> = xs
        .iter()
        .zip(ys)
        .map(|(&x, &y)| (x - mx) * (y - my))
        .collect();
    compensated_sum(&prods) / (n - 1.0)
}

/// Standard normal CDF.
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

/// Fréchet CDF `P(Z ≤ z) = exp(−scale/z)` for `z > 0`.
pub fn frechet_cdf(z: f64, scale: f64) -> f64 {
    if z <= 0.0 {
        0.0
    } else {
        (-scale / z).exp()
    }
}

/// Fréchet quantile, the inverse of [`frechet_cdf`].
pub fn frechet_quantile(u: f64, scale: f64) -> f64 {
    -scale / u.ln()
}

/// Survival function of the Kolmogorov distribution,
/// `P(K > λ) = 2 Σ_{k≥1} (−1)^{k−1} exp(−2k²λ²)`.
pub fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    let mut s = 0.0;
    for k in 1..=100 {
        let term = (-2.0 * (k * k) as f64 * lambda * lambda).exp();
        if term < 1e-18 {
            break;
        }
        s += if k % 2 == 1 { term } else { -term };
    }
    (2.0 * s).clamp(0.0, 1.0)
}

fn ks_p_value(d: f64, effective_n: f64) -> f64 {
    // Stephens' small-sample correction to the asymptotic distribution.
    let sq = effective_n.sqrt();
    kolmogorov_sf(d * (sq + 0.12 + 0.11 / sq))
}

/// One-sample two-sided KS test of `samples` against the CDF `cdf`.
/// Returns `(D, p)`.
pub fn ks_one_sample<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> (f64, f64) {
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        let f = cdf(x);
        d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    (d, ks_p_value(d, n))
}

/// Two-sample two-sided KS test. Returns `(D, p)`.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> (f64, f64) {
    let mut xs = a.to_vec();
    let mut ys = b.to_vec();
    xs.sort_by(f64::total_cmp);
    ys.sort_by(f64::total_cmp);
    let (n, m) = (xs.len(), ys.len());
    let mut d: f64 = 0.0;
    let (mut i, mut j) = (0usize, 0usize);
    while i < n && j < m {
        let x = xs[i];
        let y = ys[j];
        if x <= y {
            i += 1;
        }
        if y <= x {
            j += 1;
        }
        d = d.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
    }
    let ne = (n * m) as f64 / (n + m) as f64;
    (d, ks_p_value(d, ne))
}

/// Upper-tail chi-square p-value for `stat` with `df` degrees of freedom.
pub fn chi_square_p(stat: f64, df: f64) -> f64 {
    gamma_ur(df / 2.0, stat / 2.0)
}

/// Pearson chi-square goodness of fit of observed counts against expected
/// probabilities (which must sum to ~1). Returns `(statistic, p)` with
/// `len − 1` degrees of freedom.
pub fn chi_square_gof(observed: &[u64], expected_probs: &[f64]) -> (f64, f64) {
    assert_eq!(observed.len(), expected_probs.len());
    let n: u64 = observed.iter().sum();
    let mut stat = 0.0;
    for (&o, &p) in observed.iter().zip(expected_probs) {
        let e = p * n as f64;
        if e > 0.0 {
            let d = o as f64 - e;
            stat += d * d / e;
        } else {
            assert_eq!(o, 0, "observed count in a zero-probability bin");
        }
    }
    (stat, chi_square_p(stat, (observed.len() - 1) as f64))
}
