//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails. Run with `cargo test -p cdo-ld-core --test acceptance`.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use cdo_ld_core::asymptotics::{
    granularity, i2_factor, lambda_curve, sstar_curve, LimitMode,
};
use cdo_ld_core::correlation::{
    conditional_default_prob, gaussian_copula_grid, mixture_protection_leg, MixtureState,
    StatePolicy, SystemicMixture,
};
use cdo_ld_core::entropy::{brute_force_rate, rate_i, solve, solve_lambda};
use cdo_ld_core::merton::{
    build_gamma_merton_pool, limiting_measure, merton_default_prob, merton_default_prob_closed,
    GammaVolSpec, MertonParams,
};
use cdo_ld_core::montecarlo::{
    enumerate_protection, estimate_protection_is, estimate_protection_plain, local_clt_check,
    tilt_pool, hn_empirical,
};
use cdo_ld_core::pool::{
    build_loss_measure, DefaultDistribution, DiscreteLaw, LossProbMeasure, PoolSpec, TrancheSpec,
};

const THETA: f64 = 6.0;
const BARRIER: f64 = 0.857;
const HORIZON: f64 = 5.0;
const N_QUAD: usize = 96;

fn gamma_spec() -> GammaVolSpec {
    GammaVolSpec::new(0.3, 2.0).unwrap()
}

fn tranche(alpha: f64, beta: f64) -> TrancheSpec {
    TrancheSpec::new(alpha, beta, 0.05, HORIZON, vec![1.0, 2.0, 3.0, 4.0, 5.0]).unwrap()
}

fn merton_pool(n: usize) -> PoolSpec {
    build_gamma_merton_pool(&gamma_spec(), THETA, BARRIER, n).unwrap()
}

struct Outcome {
    pass: bool,
    detail: String,
    limit: Option<Duration>,
}

fn check(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
        limit: None,
    }
}

fn within(limit_secs: u64, o: Outcome) -> Outcome {
    Outcome {
        limit: Some(Duration::from_secs(limit_secs)),
        ..o
    }
}

fn criterion_1() -> Outcome {
    let m = limiting_measure(&gamma_spec(), THETA, BARRIER, HORIZON, N_QUAD).unwrap();
    let mean = m.mean();
    within(5, check((mean - 0.0738).abs() <= 5e-4, format!("mean default probability {mean:.6} (target 0.0738 ± 5e-4)")))
}

fn criterion_2() -> Outcome {
    let m = limiting_measure(&gamma_spec(), THETA, BARRIER, HORIZON, N_QUAD).unwrap();
    let lambda = solve_lambda(&m, 0.1).unwrap().lambda;
    within(5, check((lambda - 0.5848).abs() <= 2e-3, format!("Λ(0.1) = {lambda:.6} (target 0.5848 ± 2e-3)")))
}

fn criterion_3() -> Outcome {
    let two: [(&[(f64, f64)], f64); 5] = [
        (&[(0.02, 1.0 / 3.0), (0.05, 2.0 / 3.0)], 0.1),
        (&[(0.01, 0.5), (0.08, 0.5)], 0.12),
        (&[(0.03, 0.2), (0.06, 0.8)], 0.15),
        (&[(0.005, 0.7), (0.2, 0.3)], 0.1),
        (&[(0.1, 0.4), (0.3, 0.6)], 0.35),
    ];
    let three: [(&[(f64, f64)], f64); 5] = [
        (&[(0.01, 0.25), (0.05, 0.5), (0.2, 0.25)], 0.15),
        (&[(0.02, 0.3), (0.04, 0.3), (0.1, 0.4)], 0.12),
        (&[(0.0, 0.2), (0.05, 0.5), (0.15, 0.3)], 0.12),
        (&[(0.03, 0.5), (0.07, 0.25), (0.12, 0.25)], 0.1),
        (&[(0.1, 0.2), (0.2, 0.3), (0.4, 0.5)], 0.4),
    ];
    let mut worst1: f64 = 0.0;
    let mut worst2: f64 = 0.0;
    for (atoms, alpha) in two {
        let m = LossProbMeasure::new(atoms).unwrap();
        let diff = (rate_i(&m, alpha).unwrap() - brute_force_rate(&m, alpha, 1e-4).unwrap()).abs();
        worst1 = worst1.max(diff);
    }
    for (atoms, alpha) in three {
        let m = LossProbMeasure::new(atoms).unwrap();
        let diff = (rate_i(&m, alpha).unwrap() - brute_force_rate(&m, alpha, 1e-3).unwrap()).abs();
        worst2 = worst2.max(diff);
    }
    within(
        60,
        check(
            worst1 <= 1e-6 && worst2 <= 1e-5,
            format!("max |rate − oracle|: 1-D {worst1:.2e} (≤1e-6), 2-D {worst2:.2e} (≤1e-5)"),
        ),
    )
}

fn criterion_4() -> Outcome {
    let t = tranche(0.1, 0.15);
    let a = DefaultDistribution::uniform_before(0.06, HORIZON).unwrap();
    let b = DefaultDistribution::uniform_before(0.02, HORIZON).unwrap();
    let pools = [
        ("homogeneous", PoolSpec::from_default_probs(&[0.03; 50], HORIZON).unwrap()),
        ("two-type", PoolSpec::two_type(90, a, b).unwrap()),
        (
            "heterogeneous",
            PoolSpec::from_default_probs(&[0.0, 0.001, 0.01, 0.04, 0.09, 0.2, 0.02, 0.05], HORIZON).unwrap(),
        ),
        ("merton-100", merton_pool(100)),
        ("merton-300", merton_pool(300)),
    ];
    let mut worst: f64 = 0.0;
    for (_, pool) in &pools {
        let tilted = tilt_pool(pool, &t).unwrap();
        worst = worst.max((tilted.tilted_mean() - 0.1).abs());
    }
    check(worst <= 1e-12, format!("max |mean ũ − α| over {} pools: {worst:.2e}", pools.len()))
}

fn criterion_5() -> Outcome {
    let alpha = 0.1;
    let t = tranche(alpha, 0.15);
    let homogeneous = |n: usize| local_clt_check(&vec![alpha; n], alpha).unwrap().max_relative_error;
    let merton = |n: usize| {
        let tilted = tilt_pool(&merton_pool(n), &t).unwrap();
        local_clt_check(&tilted.tilted_probs, alpha).unwrap().max_relative_error
    };
    let (h400, h1600) = (homogeneous(400), homogeneous(1600));
    let (m400, m1600) = (merton(400), merton(1600));
    let pass = h400 <= 0.1 && m400 <= 0.1 && h1600 < h400 && m1600 < m400;
    within(
        60,
        check(
            pass,
            format!(
                "max rel. error homogeneous {h400:.4} → {h1600:.4}, merton {m400:.4} → {m1600:.4} (N=400 bound 0.1)"
            ),
        ),
    )
}

fn criterion_6() -> Outcome {
    let n = 300;
    let t = tranche(0.1, 0.15);
    let pool = merton_pool(n);
    let m = build_loss_measure(&pool, HORIZON);
    let sol = solve(&m, 0.1).unwrap();
    let g = granularity(n, 0.1);
    let closed = (-t.rate * t.horizon).exp() * i2_factor(sol.lambda, g).unwrap()
        / ((n as f64).powf(1.5) * t.width() * (2.0 * std::f64::consts::PI * sol.sigma_sq).sqrt());
    let est = estimate_protection_is(&pool, &t, 100_000, 20_240_601).unwrap();
    let ratio = est.scaled_mean / closed;
    let bracket = (est.scaled_mean - closed).abs() <= 3.0 * est.scaled_standard_error;
    within(
        300,
        check(
            (0.85..=1.15).contains(&ratio) && bracket,
            format!(
                "I_N = {:.4e} ± {:.1e}, closed form {closed:.4e}, ratio {ratio:.4} (needs [0.85, 1.15] and ±3 SE)",
                est.scaled_mean, est.scaled_standard_error
            ),
        ),
    )
}

fn discrete_pool(n: usize) -> PoolSpec {
    // 4-point time grid, two name types
    let grid = [1.0, 2.0, 3.5, 4.5];
    let law = |masses: [f64; 4]| {
        let atoms: Vec<(f64, f64)> = grid.iter().copied().zip(masses).collect();
        DefaultDistribution::Discrete(DiscreteLaw::new(&atoms, 1.0 - masses.iter().sum::<f64>()).unwrap())
    };
    let a = law([0.02, 0.03, 0.05, 0.05]);
    let b = law([0.01, 0.01, 0.02, 0.04]);
    PoolSpec::two_type(n, a, b).unwrap()
}

fn criterion_7() -> Outcome {
    let samples = 200_000;
    let t = TrancheSpec::new(0.2, 0.3, 0.05, HORIZON, vec![1.0, 2.0, 3.0, 4.0, 5.0]).unwrap();
    let pool = PoolSpec::from_default_probs(&[0.15; 40], HORIZON).unwrap();
    let plain = estimate_protection_plain(&pool, &t, samples, 11).unwrap();
    let is = estimate_protection_is(&pool, &t, samples, 12).unwrap();
    let combined = (plain.standard_error.powi(2) + is.standard_error.powi(2)).sqrt();
    let z_cross = (plain.mean - is.mean).abs() / combined;

    let small = discrete_pool(8);
    let t_small = TrancheSpec::new(0.25, 0.5, 0.05, HORIZON, vec![1.0, 2.0, 3.0, 4.0, 5.0]).unwrap();
    let exact = enumerate_protection(&small, &t_small).unwrap();
    let p = estimate_protection_plain(&small, &t_small, samples, 13).unwrap();
    let q = estimate_protection_is(&small, &t_small, samples, 14).unwrap();
    let z_plain = (p.mean - exact).abs() / p.standard_error;
    let z_is = (q.mean - exact).abs() / q.standard_error;
    within(
        120,
        check(
            z_cross <= 3.0 && z_plain <= 3.0 && z_is <= 3.0,
            format!(
                "plain vs IS {z_cross:.2} SE; enumeration (N=8) {exact:.5e}: plain {z_plain:.2} SE, IS {z_is:.2} SE"
            ),
        ),
    )
}

fn criterion_8() -> Outcome {
    let mut worst: f64 = 0.0;
    for &sigma in &[0.1, 0.3, 0.8, 1.5, 3.0] {
        for &horizon in &[0.25, 1.0, 2.5, 5.0, 10.0] {
            let p = MertonParams::new(THETA, BARRIER, sigma).unwrap();
            let q = merton_default_prob(&p, horizon).unwrap();
            let c = merton_default_prob_closed(&p, horizon).unwrap();
            worst = worst.max((q - c).abs());
        }
    }
    check(worst <= 1e-6, format!("max |quadrature − closed form| over 5×5 grid: {worst:.2e}"))
}

fn criterion_9() -> Outcome {
    let n = 200;
    let t = tranche(0.1, 0.15);
    let rows = hn_empirical(&merton_pool(n), &t, 100_000, 77).unwrap();
    let mut pass = true;
    let mut parts = Vec::new();
    for s in [1.0, 2.0, 3.0] {
        match rows.iter().find(|r| (r.s - s).abs() < 1e-9) {
            Some(r) => {
                pass &= !r.flagged && (0.8..=1.2).contains(&r.ratio);
                parts.push(format!("s={s}: {:.3} ({} samples)", r.ratio, r.samples));
            }
            None => {
                pass = false;
                parts.push(format!("s={s}: missing"));
            }
        }
    }
    check(pass, format!("Ê[P|γ=s]/reference {} (needs [0.8, 1.2])", parts.join(", ")))
}

fn criterion_10() -> Outcome {
    let m = limiting_measure(&gamma_spec(), THETA, BARRIER, HORIZON, N_QUAD).unwrap();
    let mean = m.mean();
    let mut rate_ok = true;
    let mut prev = 0.0;
    for k in 0..=60 {
        let alpha = mean + (0.5 - mean) * k as f64 / 60.0;
        let r = rate_i(&m, alpha).unwrap();
        rate_ok &= r >= prev;
        prev = r;
    }
    let grid: Vec<f64> = (0..=400).map(|k| -20.0 + 0.1 * k as f64).collect();
    let curve = lambda_curve(&m, &grid).unwrap();
    let curve_ok = curve.windows(2).all(|w| w[1].1 >= w[0].1);

    let n_list: Vec<usize> = (1..=20).map(|k| 50 * k).collect();
    let curves: Vec<Vec<f64>> = [0.08, 0.1, 0.12]
        .iter()
        .map(|&alpha| {
            sstar_curve(
                |n| Ok(build_loss_measure(&merton_pool(n), HORIZON)),
                Some(&m),
                &tranche(alpha, 0.15),
                &n_list,
                LimitMode::Limiting,
            )
            .unwrap()
            .into_iter()
            .map(|row| row.result.map(|r| r.spread).unwrap_or(f64::NAN))
            .collect()
        })
        .collect();
    let ordered = (0..n_list.len()).all(|i| curves[0][i] > curves[1][i] && curves[1][i] > curves[2][i]);
    check(
        rate_ok && curve_ok && ordered,
        format!("rate nondecreasing in α: {rate_ok}; λ-curve nondecreasing: {curve_ok}; S*_N ordered in α: {ordered}"),
    )
}

fn criterion_11() -> Outcome {
    let t = tranche(0.1, 0.15);
    let states = vec![
        MixtureState {
            label: "calm".into(),
            prob: 0.7,
            measure: LossProbMeasure::new(&[(0.01, 0.5), (0.03, 0.5)]).unwrap(),
            not_flat: None,
        },
        MixtureState {
            label: "mid".into(),
            prob: 0.2,
            measure: LossProbMeasure::new(&[(0.02, 0.5), (0.05, 0.5)]).unwrap(),
            not_flat: None,
        },
        MixtureState {
            label: "stress".into(),
            prob: 0.1,
            measure: LossProbMeasure::new(&[(0.04, 0.5), (0.08, 0.5)]).unwrap(),
            not_flat: None,
        },
    ];
    let mix = SystemicMixture::new(states).unwrap();
    let leg = mixture_protection_leg(&mix, &t, 250, StatePolicy::default()).unwrap();
    let assembled: f64 = leg.states.iter().map(|s| s.prob * s.result.protection_leg).sum();
    let assembly_gap = (leg.protection_leg - assembled).abs();

    let sums_exact = [1, 2, 7, 20, 40].iter().all(|&m| {
        let g = gaussian_copula_grid(m, 0.35).unwrap();
        g.probs.iter().sum::<f64>() == 1.0
    });
    let g = gaussian_copula_grid(20, 0.35).unwrap();
    let mut tower: f64 = 0.0;
    for &p in &[0.005, 0.02, 0.08, 0.3] {
        let avg: f64 = g
            .nodes
            .iter()
            .zip(&g.probs)
            .map(|(&x, &w)| w * conditional_default_prob(p, g.rho, x).unwrap())
            .sum();
        tower = tower.max((avg - p).abs());
    }
    check(
        assembly_gap <= 1e-12 && sums_exact && tower <= 2e-3,
        format!("assembly gap {assembly_gap:.1e}; grid sums exactly 1: {sums_exact}; tower error at M=20 {tower:.2e}"),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("limiting mean default probability", criterion_1),
        ("multiplier at α = 0.1", criterion_2),
        ("rate vs brute-force oracle", criterion_3),
        ("tilt identity", criterion_4),
        ("local CLT", criterion_5),
        ("importance-sampling prefactor", criterion_6),
        ("cross-estimator agreement", criterion_7),
        ("Merton quadrature vs closed form", criterion_8),
        ("conditional payoff shape", criterion_9),
        ("monotonicity suite", criterion_10),
        ("correlation assembly", criterion_11),
    ];
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let in_time = outcome.limit.map_or(true, |l| elapsed <= l);
        let pass = outcome.pass && in_time;
        if !pass {
            failures += 1;
        }
        let budget = outcome
            .limit
            .map(|l| format!(" / {}s", l.as_secs()))
            .unwrap_or_default();
        println!(
            "criterion {:>2} {}: {} [{:.2}s{}] {}",
            i + 1,
            if pass { "PASS" } else { "FAIL" },
            name,
            elapsed.as_secs_f64(),
            budget,
            outcome.detail
        );
    }
    println!("acceptance: {} passed, {} failed", criteria.len() - failures, failures);
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
