use approx::assert_abs_diff_eq;
use cdo_ld_core::merton::{
    build_gamma_merton_pool, gamma_inverse_cdf, gamma_merton_volatilities, limiting_measure,
    merton_default_prob, volatility_quadrature, GammaVolSpec, MertonParams,
};
use cdo_ld_core::pool::{assess_pool, DefaultDistribution, TrancheSpec};

const THETA: f64 = 6.0;
const BARRIER: f64 = 0.857;
const HORIZON: f64 = 5.0;

fn spec() -> GammaVolSpec {
    GammaVolSpec::new(0.3, 2.0).unwrap()
}

fn tranche() -> TrancheSpec {
    TrancheSpec::new(0.1, 0.15, 0.05, HORIZON, vec![1.0, 2.0, 3.0, 4.0, 5.0]).unwrap()
}

#[test]
fn small_pools_sit_at_quantiles() {
    let s = spec();
    let one = gamma_merton_volatilities(&s, 1).unwrap();
    assert_eq!(one, vec![gamma_inverse_cdf(&s, 0.5).unwrap()]);

    let three = gamma_merton_volatilities(&s, 3).unwrap();
    for (sigma, u) in three.iter().zip([0.25, 0.5, 0.75]) {
        assert_abs_diff_eq!(s.cdf(*sigma), u, epsilon = 1e-12);
    }
    assert!(three.windows(2).all(|w| w[0] < w[1]));
}

#[test]
fn shape_two_closed_form_quantile() {
    // F(t) = 1 − e^{−t/0.3}(1 + t/0.3)
    let u = 1.0 - 2.0 * (-1.0f64).exp();
    assert_abs_diff_eq!(gamma_inverse_cdf(&spec(), u).unwrap(), 0.3, epsilon = 1e-12);
}

#[test]
fn empirical_volatility_fraction_tracks_gamma_mass() {
    let s = spec();
    let sigmas = gamma_merton_volatilities(&s, 10_000).unwrap();
    let inside = sigmas.iter().filter(|&&x| x > 0.3 && x < 0.9).count() as f64 / 1e4;
    let exact = s.cdf(0.9) - s.cdf(0.3);
    assert_abs_diff_eq!(inside, exact, epsilon = 0.01);
}

#[test]
fn pool_construction_is_deterministic() {
    let a = build_gamma_merton_pool(&spec(), THETA, BARRIER, 257).unwrap();
    let b = build_gamma_merton_pool(&spec(), THETA, BARRIER, 257).unwrap();
    assert_eq!(a, b);
    let bits = |p: &cdo_ld_core::pool::PoolSpec| -> Vec<u64> {
        p.default_probs(HORIZON).iter().map(|x| x.to_bits()).collect()
    };
    assert_eq!(bits(&a), bits(&b));
}

#[test]
fn quadrature_weights_reproduce_gamma_mean() {
    let q = volatility_quadrature(&spec(), 96).unwrap();
    let total: f64 = q.nodes.iter().map(|n| n.1).sum();
    let mean: f64 = q.nodes.iter().map(|n| n.0 * n.1).sum();
    assert_abs_diff_eq!(total, 1.0, epsilon = 1e-12);
    assert_abs_diff_eq!(mean, 0.6, epsilon = 1e-4);
    assert!(q.truncated_mass <= 1e-8);
}

#[test]
fn limiting_mean_converges_as_nodes_double() {
    let means: Vec<f64> = [8, 16, 32, 64, 128]
        .iter()
        .map(|&n| limiting_measure(&spec(), THETA, BARRIER, HORIZON, n).unwrap().mean())
        .collect();
    let diffs: Vec<f64> = means.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    for w in diffs.windows(2) {
        // once differences reach rounding level there is nothing left to shrink
        if w[0] > 1e-13 {
            assert!(w[1] <= w[0] / 2.0, "differences {diffs:?}");
        }
    }
}

#[test]
fn default_probability_monotone_in_sigma_and_horizon() {
    // quadrature is accurate to 1e-10 absolute; below that the values are noise
    const SLACK: f64 = 1e-10;
    let sigmas = [0.05, 0.1, 0.2, 0.4, 0.8, 1.2, 1.6, 2.0, 2.4, 3.0, 3.4];
    let horizons = [0.1, 0.5, 1.0, 2.0, 5.0, 10.0];
    for &t in &horizons {
        let mut prev = -1.0;
        for &s in &sigmas {
            let p = merton_default_prob(&MertonParams::new(THETA, BARRIER, s).unwrap(), t).unwrap();
            assert!(p >= prev - SLACK, "σ={s}, T={t}");
            prev = p;
        }
    }
    for &s in &sigmas {
        let params = MertonParams::new(THETA, BARRIER, s).unwrap();
        let mut prev = -1.0;
        for &t in &horizons {
            let p = merton_default_prob(&params, t).unwrap();
            assert!(p >= prev - SLACK, "σ={s}, T={t}");
            prev = p;
        }
    }
}

#[test]
fn drift_pushes_defaults_to_the_start_of_the_window() {
    // with θ = 6 almost no name keeps 1e-8 of default mass for the last T/20
    let pool = build_gamma_merton_pool(&spec(), THETA, BARRIER, 100).unwrap();
    let report = assess_pool(&pool, &tranche(), Some(0.25), Some(1e-6)).unwrap();
    assert_eq!(report.notflat_fraction, 1.0);
    assert!(!report.notflat_ok);
    assert!(report.ig_ok && report.nondegen_ok);

    let largest = pool
        .names()
        .iter()
        .map(|d| d.window_prob(4.75, 5.0))
        .fold(0.0, f64::max);
    assert!(largest < 1e-6);
}

#[test]
fn slow_drift_pool_is_not_flat() {
    let pool = build_gamma_merton_pool(&spec(), 0.05, BARRIER, 100).unwrap();
    let report = assess_pool(&pool, &tranche(), None, None).unwrap();
    assert!(report.notflat_ok, "fraction {}", report.notflat_fraction);
    assert!(matches!(pool.names()[0], DefaultDistribution::Merton(_)));
}
