//! Statistical checks of the samplers against their laws and against each
//! other. Tolerances are four standard errors throughout, on sample sizes
//! large enough that a real defect trips them deterministically.

use frog_core::model::{DriftSpec, FrogCountSpec, LambdaSpec, ModelConfig};
use frog_core::pgf::DistributionSpec;
use frog_core::rng::{SplitMix64, TrialStream};
use frog_core::sim::{
    estimate_survival, fplus_zero_mask, run_activation, sample_max_reach, sample_reach,
    step_walk_max, zero_site_probability,
};

fn det1_cfg(p: f64) -> ModelConfig {
    ModelConfig {
        drift: DriftSpec::Constant { p },
        counts: FrogCountSpec::Iid(DistributionSpec::Deterministic { k: 1 }),
        p0: p,
    }
}

#[test]
fn reach_tail_matches_martingale_law() {
    let n = 1_000_000u64;
    for p in [0.55f64, 0.65, 0.8, 0.95] {
        let r = (1.0 - p) / p;
        let mut rng = SplitMix64::new(0xF00D + (p * 1000.0) as u64);
        let mut tail_counts = [0u64; 11];
        for _ in 0..n {
            let off = sample_reach(p, &mut rng);
            for (k, slot) in tail_counts.iter_mut().enumerate() {
                if off >= k as u64 {
                    *slot += 1;
                }
            }
        }
        for (k, &count) in tail_counts.iter().enumerate() {
            let expect = r.powi(k as i32);
            let got = count as f64 / n as f64;
            let sigma = (expect * (1.0 - expect) / n as f64).sqrt();
            assert!(
                (got - expect).abs() <= 4.0 * sigma + 1e-12,
                "p={p} k={k}: got {got}, expect {expect} ± {sigma}"
            );
        }
    }
}

#[test]
fn reach_tail_point_check() {
    // P(offset >= 3) at p = 0.7 is (3/7)^3.
    let n = 1_000_000u64;
    let mut rng = SplitMix64::new(0x37);
    let hits = (0..n).filter(|_| sample_reach(0.7, &mut rng) >= 3).count() as f64;
    let expect = (3.0f64 / 7.0).powi(3);
    let sigma = (expect * (1.0 - expect) / n as f64).sqrt();
    assert!((hits / n as f64 - expect).abs() <= 4.0 * sigma);
}

#[test]
fn death_at_first_site_has_martingale_probability() {
    // With overwhelming drift the run dies at site 1 unless the origin frog
    // reaches it: P(died_at = 1) = 1 - r0 = 98/99 for p = 0.99.
    let cfg = det1_cfg(0.99);
    let trials = 1_000_000u64;
    let mut died_at_one = 0u64;
    for trial in 0..trials {
        let mut stream = TrialStream::for_trial(0x99, trial);
        let out = run_activation(&cfg, 50, &mut stream).unwrap();
        died_at_one += u64::from(out.died_at == Some(1));
    }
    let expect = 98.0 / 99.0;
    let got = died_at_one as f64 / trials as f64;
    let sigma = (expect * (1.0 - expect) / trials as f64).sqrt();
    assert!(
        (got - expect).abs() <= 4.0 * sigma,
        "got {got}, expect {expect} ± {sigma}"
    );
}

#[test]
fn step_walk_agrees_with_reach_sampler() {
    let p = 0.65;
    let n = 100_000u64;
    let mut walk_rng = SplitMix64::new(11);
    let mut reach_rng = SplitMix64::new(22);
    let mut walk_tail = [0u64; 9];
    let mut reach_tail = [0u64; 9];
    for _ in 0..n {
        let w = step_walk_max(p, &mut walk_rng, 60);
        let s = sample_reach(p, &mut reach_rng);
        for k in 0..9 {
            walk_tail[k] += u64::from(w >= k as u64);
            reach_tail[k] += u64::from(s >= k as u64);
        }
    }
    for k in 0..9 {
        let a = walk_tail[k] as f64 / n as f64;
        let b = reach_tail[k] as f64 / n as f64;
        let pool = 0.5 * (a + b);
        let sigma = (pool * (1.0 - pool) * 2.0 / n as f64).sqrt();
        assert!(
            (a - b).abs() <= 4.0 * sigma + 1e-12,
            "k={k}: walk {a} vs reach {b} ± {sigma}"
        );
    }
}

#[test]
fn one_shot_maximum_matches_k_draws() {
    // The u^{1/k} trick must be indistinguishable from drawing k reaches
    // and taking the max.
    let p = 0.7;
    let k = 5u64;
    let n = 200_000u64;
    let mut one_rng = SplitMix64::new(33);
    let mut many_rng = SplitMix64::new(44);
    let mut one_tail = [0u64; 9];
    let mut many_tail = [0u64; 9];
    for _ in 0..n {
        let one = sample_max_reach(p, k, &mut one_rng);
        let many = (0..k).map(|_| sample_reach(p, &mut many_rng)).max().unwrap();
        for j in 0..9 {
            one_tail[j] += u64::from(one >= j as u64);
            many_tail[j] += u64::from(many >= j as u64);
        }
    }
    let r = (1.0 - p) / p;
    for j in 0..9 {
        let a = one_tail[j] as f64 / n as f64;
        let b = many_tail[j] as f64 / n as f64;
        let exact = 1.0 - (1.0 - r.powi(j as i32)).powi(k as i32);
        let sigma = (exact.max(1e-9) * (1.0 - exact).max(1e-9) / n as f64).sqrt();
        assert!((a - b).abs() <= 4.0 * 1.42 * sigma + 1e-12, "j={j}: {a} vs {b}");
        assert!((a - exact).abs() <= 4.0 * sigma + 1e-12, "j={j}: {a} vs exact {exact}");
    }
}

#[test]
fn sample_count_empirical_pgf_at_half() {
    let dists = [
        DistributionSpec::Poisson { lambda: 2.0 },
        DistributionSpec::Geometric { q: 0.4 },
        DistributionSpec::Table {
            values: vec![0, 2, 5],
            probs: vec![0.3, 0.5, 0.2],
        },
        DistributionSpec::Deterministic { k: 3 },
    ];
    let n = 1_000_000u64;
    for (i, d) in dists.iter().enumerate() {
        let mut rng = SplitMix64::new(0xABC + i as u64);
        let mut sum = 0.0;
        let mut sumsq = 0.0;
        for _ in 0..n {
            let x = d.sample_count(&mut rng);
            let v = 0.5f64.powi(x.min(200) as i32);
            sum += v;
            sumsq += v * v;
        }
        let mean = sum / n as f64;
        let var = (sumsq / n as f64 - mean * mean).max(1e-12);
        let expect = d.pgf_eval(0.5).unwrap();
        let sigma = (var / n as f64).sqrt();
        assert!(
            (mean - expect).abs() <= 4.0 * sigma,
            "{d:?}: {mean} vs {expect} ± {sigma}"
        );
    }
}

#[test]
fn poisson_sample_mean() {
    let d = DistributionSpec::Poisson { lambda: 4.0 };
    let n = 1_000_000u64;
    let mut rng = SplitMix64::new(777);
    let total: u64 = (0..n).map(|_| d.sample_count(&mut rng)).sum();
    let mean = total as f64 / n as f64;
    let sigma = (4.0f64 / n as f64).sqrt();
    assert!((mean - 4.0).abs() <= 4.0 * sigma, "{mean}");
}

#[test]
fn fplus_zero_count_mean_matches_closed_form_sum() {
    let cfg = det1_cfg(0.7);
    let cap = 50usize;
    let trials = 200_000u64;
    let mut total = 0u64;
    let mut total_sq = 0u64;
    for trial in 0..trials {
        let mut stream = TrialStream::for_trial(0xBEE, trial);
        let mask = fplus_zero_mask(&cfg, cap, &mut stream).unwrap();
        let zeros = mask.iter().filter(|z| **z).count() as u64;
        total += zeros;
        total_sq += zeros * zeros;
    }
    let mean = total as f64 / trials as f64;
    let var = total_sq as f64 / trials as f64 - mean * mean;
    let sigma = (var / trials as f64).sqrt();
    let expect: f64 = (1..=cap).map(|n| zero_site_probability(&cfg, n)).sum();
    assert!(
        (mean - expect).abs() <= 4.0 * sigma,
        "mean {mean} vs closed form {expect} ± {sigma}"
    );
}

#[test]
fn stronger_drift_survives_no_more_often() {
    // Same count draws, same uniforms: the run with larger drifts has
    // pointwise smaller reaches, so its survivals are a subset.
    let weak = ModelConfig {
        drift: DriftSpec::Constant { p: 0.58 },
        counts: FrogCountSpec::PoissonSeq {
            lambda: LambdaSpec::Linear {
                alpha: 1.0,
                beta: 0.0,
            },
        },
        p0: 0.58,
    };
    let strong = ModelConfig {
        drift: DriftSpec::Constant { p: 0.72 },
        p0: 0.72,
        counts: weak.counts.clone(),
    };
    let trials = 4_000u64;
    let cap = 300;
    let weak_est = estimate_survival(&weak, cap, trials, 42).unwrap();
    let strong_est = estimate_survival(&strong, cap, trials, 42).unwrap();
    assert!(
        strong_est.survived <= weak_est.survived,
        "strong {} vs weak {}",
        strong_est.survived,
        weak_est.survived
    );
}
