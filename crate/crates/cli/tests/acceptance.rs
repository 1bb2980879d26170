//! Acceptance suite: one test per criterion, each printing a PASS line with
//! the measured numbers (run with `--nocapture` to see them). Tolerances are
//! pinned here and nowhere else.

use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use frog_core::criteria::{general_series, iid_drift_terms, k_constant, poisson_terms};
use frog_core::model::{DriftSpec, FrogCountSpec, LambdaSpec, ModelConfig};
use frog_core::pgf::DistributionSpec;
use frog_core::rng::{SplitMix64, TrialStream};
use frog_core::sim::{estimate_survival, fplus_zero_mask, sample_reach, step_walk_max};

const PI2_6: f64 = std::f64::consts::PI * std::f64::consts::PI / 6.0;

fn det1_cfg(p: f64) -> ModelConfig {
    ModelConfig {
        drift: DriftSpec::Constant { p },
        counts: FrogCountSpec::Iid(DistributionSpec::Deterministic { k: 1 }),
        p0: p,
    }
}

fn poisson_linear_cfg() -> ModelConfig {
    ModelConfig {
        drift: DriftSpec::Constant { p: 0.6 },
        counts: FrogCountSpec::PoissonSeq {
            lambda: LambdaSpec::Linear {
                alpha: 1.0,
                beta: 0.0,
            },
        },
        p0: 0.6,
    }
}

#[test]
fn criterion_01_k_constant_quadrature() {
    let start = Instant::now();

    let det1 = DistributionSpec::Deterministic { k: 1 };
    let k = k_constant(&det1, 1e-10).unwrap();
    assert!(
        (k.value - PI2_6).abs() <= 1e-8,
        "K(det 1) = {} vs pi^2/6 = {PI2_6}",
        k.value
    );

    for lambda in [0.5, 1.0, 2.0, 7.0] {
        let kp = k_constant(&DistributionSpec::Poisson { lambda }, 1e-11).unwrap();
        assert!(
            (kp.value - lambda).abs() <= 1e-10,
            "K(poisson {lambda}) = {}",
            kp.value
        );
    }

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 1.0, "took {elapsed:?}");
    println!(
        "[acceptance] criterion 1 (K-constant quadrature): PASS — K(det1) = {:.12}, |Δ| = {:.2e}, {elapsed:?}",
        k.value,
        (k.value - PI2_6).abs()
    );
}

#[test]
fn criterion_02_exponent_identity_and_series_relation() {
    let start = Instant::now();

    for i in 1..=49 {
        let a = i as f64 * 0.01;
        let p = 0.5 + a;
        let lhs = (1.0 - p) / (2.0 * p - 1.0);
        let rhs = 1.0 / (4.0 * a) - 0.5;
        assert!(
            (lhs - rhs).abs() <= 1e-13,
            "a = {a}: |{lhs} - {rhs}| > 1e-13"
        );
    }

    // Constant λ, d = 0, K = λ: poisson-series terms equal e^{λ/2} times
    // the iid-series terms.
    let lambda = 3.0;
    let a = 0.12;
    let drift = DriftSpec::Constant { p: 0.5 + a };
    let pois = poisson_terms(&LambdaSpec::Constant { value: lambda }, &drift, 256);
    let iid = iid_drift_terms(&drift, &DistributionSpec::Poisson { lambda }, 256, 1e-12).unwrap();
    let boost = (lambda / 2.0).exp();
    for (n, (tp, ti)) in pois.terms.iter().zip(&iid.terms).enumerate() {
        let rel = ((tp - boost * ti) / tp).abs();
        assert!(rel <= 1e-12, "n = {}: rel = {rel:e}", n + 1);
    }

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 1.0, "took {elapsed:?}");
    println!("[acceptance] criterion 2 (exponent identity + series relation): PASS — {elapsed:?}");
}

#[test]
fn criterion_03_reach_sampler_vs_martingale_law() {
    let start = Instant::now();
    let n = 1_000_000u64;
    let mut worst = 0.0f64;
    for p in [0.55f64, 0.65, 0.8, 0.95] {
        let r = (1.0 - p) / p;
        let mut rng = SplitMix64::new(0xACCE97 + (p * 100.0) as u64);
        let mut tail = [0u64; 11];
        for _ in 0..n {
            let off = sample_reach(p, &mut rng);
            for (k, slot) in tail.iter_mut().enumerate() {
                *slot += u64::from(off >= k as u64);
            }
        }
        for (k, &count) in tail.iter().enumerate() {
            let expect = r.powi(k as i32);
            let got = count as f64 / n as f64;
            let sigma = (expect * (1.0 - expect) / n as f64).sqrt();
            if sigma > 0.0 {
                worst = worst.max((got - expect).abs() / sigma);
            }
            assert!(
                (got - expect).abs() <= 4.0 * sigma + 1e-12,
                "p = {p}, k = {k}: {got} vs {expect} ± {sigma}"
            );
        }
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 10.0, "took {elapsed:?}");
    println!(
        "[acceptance] criterion 3 (reach sampler vs martingale law): PASS — worst deviation {worst:.2}σ, {elapsed:?}"
    );
}

#[test]
fn criterion_04_step_walk_oracle_equivalence() {
    let start = Instant::now();
    let p = 0.65;
    let n = 100_000u64;
    let mut walk_rng = SplitMix64::new(0x0A11);
    let mut reach_rng = SplitMix64::new(0x0B22);
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
    let mut worst = 0.0f64;
    for k in 0..9 {
        let a = walk_tail[k] as f64 / n as f64;
        let b = reach_tail[k] as f64 / n as f64;
        let pool = 0.5 * (a + b);
        let sigma = (pool * (1.0 - pool) * 2.0 / n as f64).sqrt();
        if sigma > 0.0 {
            worst = worst.max((a - b).abs() / sigma);
        }
        assert!(
            (a - b).abs() <= 4.0 * sigma + 1e-12,
            "k = {k}: walk {a} vs reach {b} ± {sigma}"
        );
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 30.0, "took {elapsed:?}");
    println!(
        "[acceptance] criterion 4 (step-walk oracle equivalence): PASS — worst bin gap {worst:.2}σ, {elapsed:?}"
    );
}

#[test]
fn criterion_05_fplus_closed_form() {
    let start = Instant::now();
    let cfg = det1_cfg(0.7);
    let trials = 1_000_000u64;
    let cap = 8usize;
    let mut zeros = [0u64; 8];
    for trial in 0..trials {
        let mut stream = TrialStream::for_trial(0x0F1, trial);
        let mask = fplus_zero_mask(&cfg, cap, &mut stream).unwrap();
        for (i, z) in mask.iter().enumerate() {
            zeros[i] += u64::from(*z);
        }
    }
    let mut worst = 0.0f64;
    for n in [1usize, 2, 3, 5, 8] {
        let expect = frog_core::sim::zero_site_probability(&cfg, n);
        let got = zeros[n - 1] as f64 / trials as f64;
        let sigma = (expect * (1.0 - expect) / trials as f64).sqrt();
        worst = worst.max((got - expect).abs() / sigma);
        assert!(
            (got - expect).abs() <= 4.0 * sigma,
            "n = {n}: {got} vs {expect} ± {sigma}"
        );
        if n == 2 {
            assert!((expect - 160.0 / 343.0).abs() < 1e-15);
        }
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 60.0, "took {elapsed:?}");
    println!(
        "[acceptance] criterion 5 (all-awake closed form): PASS — worst deviation {worst:.2}σ over n ∈ {{1,2,3,5,8}}, {elapsed:?}"
    );
}

#[test]
fn criterion_06_regime_separation() {
    let start = Instant::now();
    let trials = 10_000u64;
    let seed = 0x6a;

    // (a) transient: single frog per site, strong drift.
    let transient = det1_cfg(0.7);
    let small = estimate_survival(&transient, 1_000, trials, seed).unwrap();
    let large = estimate_survival(&transient, 10_000, trials, seed).unwrap();
    assert!(
        large.proportion <= small.proportion,
        "coupled caps: {} vs {}",
        large.proportion,
        small.proportion
    );
    assert!(
        large.proportion <= 0.05,
        "transient survival at cap 1e4 = {}",
        large.proportion
    );

    // (b) non-transient: growing Poisson counts beat the drift.
    let nontransient = poisson_linear_cfg();
    let small_nt = estimate_survival(&nontransient, 1_000, trials, seed).unwrap();
    let large_nt = estimate_survival(&nontransient, 10_000, trials, seed).unwrap();
    assert!(
        large_nt.ci_low > 0.0,
        "non-transient CI at cap 1e4 must exclude 0, got [{}, {}]",
        large_nt.ci_low,
        large_nt.ci_high
    );
    assert!(
        large_nt.ci_low <= small_nt.ci_high && small_nt.ci_low <= large_nt.ci_high,
        "cap-1e3 and cap-1e4 CIs must overlap: [{}, {}] vs [{}, {}]",
        small_nt.ci_low,
        small_nt.ci_high,
        large_nt.ci_low,
        large_nt.ci_high
    );

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 300.0, "took {elapsed:?}");
    println!(
        "[acceptance] criterion 6 (regime separation): PASS — transient {:.4} ≤ 0.05, non-transient CI [{:.4}, {:.4}], {elapsed:?}",
        large.proportion, large_nt.ci_low, large_nt.ci_high
    );
}

#[test]
fn criterion_07_phase_transition_sweep() {
    let start = Instant::now();
    let critical = PI2_6 / 4.0; // π²/24

    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("model.json"),
        r#"{"drift":{"kind":"c_over_log","C":0.3,"n0":6},
            "counts":{"kind":"iid","dist":{"kind":"deterministic","k":1}},
            "p0":0.7}"#,
    )
    .unwrap();
    fs::write(
        dir.path().join("grid.json"),
        format!(
            r#"{{"field":"drift.c","values":[0.1,0.2,0.35,{critical},0.45,0.6,0.8]}}"#
        ),
    )
    .unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_frog"))
        .current_dir(dir.path())
        .args([
            "sweep", "--config", "model.json", "--grid", "grid.json", "--n-max", "10000",
            "--out", "sweep.csv",
        ])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let text = fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    let rows: Vec<(f64, String, String)> = text
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("value,"))
        .map(|l| {
            let mut it = l.split(',');
            let c: f64 = it.next().unwrap().parse().unwrap();
            let closed = it.nth(2).unwrap().to_string();
            let series = it.next().unwrap().to_string();
            (c, closed, series)
        })
        .collect();
    assert_eq!(rows.len(), 7);

    for (c, closed, series) in &rows {
        // Closed-form column flips exactly at the critical constant, with
        // the critical point itself on the transient side.
        let expect_closed = if *c >= critical - 1e-9 {
            "transient"
        } else {
            "non-transient"
        };
        assert_eq!(closed, expect_closed, "closed verdict at c = {c}");
        if *c >= 0.6 {
            assert_eq!(series, "diverges", "classifier at c = {c}");
        }
        if *c <= 0.2 {
            assert_ne!(series, "diverges", "classifier at c = {c}");
        }
        // Near-critical values may be inconclusive; nothing to assert.
    }

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 300.0, "took {elapsed:?}");
    println!(
        "[acceptance] criterion 7 (phase-transition sweep): PASS — flip at c = {critical:.6}, {elapsed:?}"
    );
}

#[test]
fn criterion_08_series_consistency() {
    let start = Instant::now();
    let cfg = det1_cfg(0.7);
    let n_max = 1000usize;
    let report = general_series(&cfg, n_max).unwrap();

    // Direct product oracle in linear space.
    let r: f64 = 3.0 / 7.0;
    let mut product = 1.0f64;
    let mut worst_rel = 0.0f64;
    for (idx, n) in (2..=n_max).enumerate() {
        product *= 1.0 - r.powi(n as i32 - 1);
        let rel = ((report.terms[idx] - product) / product).abs();
        worst_rel = worst_rel.max(rel);
        assert!(rel <= 1e-12, "n = {n}: rel = {rel:e}");
    }
    assert!(
        (report.terms[n_max - 2] - product).abs() <= 1e-9 * product,
        "term_1000 = {} vs oracle {product}",
        report.terms[n_max - 2]
    );
    assert!((product - 0.4049).abs() < 2e-4, "oracle limit ≈ 0.4049");

    // Same check through a nontrivial PGF.
    let dist = DistributionSpec::Table {
        values: vec![1, 3],
        probs: vec![0.5, 0.5],
    };
    let cfg2 = ModelConfig {
        drift: DriftSpec::Constant { p: 0.72 },
        counts: FrogCountSpec::Iid(dist.clone()),
        p0: 0.72,
    };
    let report2 = general_series(&cfg2, n_max).unwrap();
    let r2 = cfg2.ratio_at(1);
    let mut product2 = 1.0f64;
    for (idx, n) in (2..=n_max).enumerate() {
        product2 *= dist.pgf_eval(1.0 - r2.powi(n as i32 - 1)).unwrap();
        let rel = ((report2.terms[idx] - product2) / product2).abs();
        assert!(rel <= 1e-12, "table dist, n = {n}: rel = {rel:e}");
    }

    let elapsed = start.elapsed();
    println!(
        "[acceptance] criterion 8 (series consistency): PASS — worst rel {worst_rel:.2e}, term_1000 = {:.12}, {elapsed:?}",
        report.terms[n_max - 2]
    );
}

#[test]
fn criterion_09_byte_identical_reruns_and_thread_counts() {
    let start = Instant::now();
    let dir = tempfile::tempdir().unwrap();

    let config = r#"{"drift":{"kind":"constant","p":0.62},
        "counts":{"kind":"poisson_sequence","lambda":{"kind":"linear","alpha":0.5,"beta":0.5}},
        "p0":0.62}"#;

    let run_in = |sub: &Path, threads: &str| {
        fs::create_dir_all(sub).unwrap();
        fs::write(sub.join("model.json"), config).unwrap();
        for (cmd, extra) in [
            ("simulate", vec!["--cap", "200", "--trials", "2000", "--seed", "11", "--per-trial", "trials.csv"]),
            ("criteria", vec!["--n-max", "300"]),
        ] {
            let mut args = vec![cmd, "--config", "model.json", "--out"];
            let out_name = format!("{cmd}.csv");
            args.push(&out_name);
            args.extend(extra.iter().copied());
            let out = Command::new(env!("CARGO_BIN_EXE_frog"))
                .current_dir(sub)
                .env("FROG_THREADS", threads)
                .args(&args)
                .output()
                .unwrap();
            assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        }
    };

    run_in(&dir.path().join("t1_run1"), "1");
    run_in(&dir.path().join("t1_run2"), "1");
    run_in(&dir.path().join("t4_run1"), "4");

    for file in ["simulate.csv", "trials.csv", "criteria.csv"] {
        let a = fs::read(dir.path().join("t1_run1").join(file)).unwrap();
        let b = fs::read(dir.path().join("t1_run2").join(file)).unwrap();
        let c = fs::read(dir.path().join("t4_run1").join(file)).unwrap();
        assert_eq!(a, b, "{file}: rerun differs");
        assert_eq!(a, c, "{file}: FROG_THREADS=4 differs from 1");
        assert!(!a.is_empty());
    }

    let elapsed = start.elapsed();
    println!(
        "[acceptance] criterion 9 (determinism across reruns and worker counts): PASS — {elapsed:?}"
    );
}

#[test]
fn criterion_06a_survival_monotone_under_coupling_per_trial() {
    // Companion to criterion 6(a): the coupling argument checked trial by
    // trial rather than in aggregate.
    let cfg = det1_cfg(0.7);
    for trial in 0..2_000u64 {
        let mut s_small = TrialStream::for_trial(0x6a, trial);
        let mut s_large = TrialStream::for_trial(0x6a, trial);
        let small = frog_core::sim::run_activation(&cfg, 100, &mut s_small).unwrap();
        let large = frog_core::sim::run_activation(&cfg, 1_000, &mut s_large).unwrap();
        if large.survived_to_cap {
            assert!(small.survived_to_cap, "trial {trial}");
        }
    }
    println!("[acceptance] criterion 6a companion (per-trial cap coupling): PASS");
}
