//! Reach-based Monte Carlo for the activation process.
//!
//! A frog with leftward drift never needs to be walked step by step here:
//! its maximum rightward excursion (its *reach*) is geometric, with
//! `P(reach ≥ k) = r^k` for `r = (1-p)/p`, and a nearest-neighbor path
//! visits every site up to its reach. Activation therefore only depends on
//! per-site reach maxima, and a trial costs `O(1)` draws per activated site:
//! the maximum reach among the `k` frogs of a site is sampled in one shot by
//! inverse transform through `u ↦ u^{1/k}`. [`step_walk_max`] keeps the
//! explicit walk around as the oracle that the geometric law (and the
//! every-intermediate-site argument) is tested against.
//!
//! Return trips are not simulated at all: drift makes every active frog hit
//! the origin almost surely, so counting origin visits is counting activated
//! frogs (plus the origin frog itself).

use rand::Rng;
use rayon::prelude::*;

use crate::model::ModelConfig;
use crate::rng::TrialStream;
use crate::{Error, Result};

/// Frogs representable per trial before the run aborts with a resource
/// error. Never silently truncated.
pub const DEFAULT_FROG_BUDGET: u64 = 100_000_000;

/// z for the 95% Wilson interval.
const Z95: f64 = 1.959_963_984_540_054;

/// Outcome of one activation (or all-awake) run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimOutcome {
    /// First site the process failed to reach; `None` when it survived.
    pub died_at: Option<usize>,
    pub survived_to_cap: bool,
    /// Sleeping frogs woken (the origin frog not included).
    pub activated_frogs: u64,
    /// Positive-integer sites whose counts were drawn.
    pub activated_sites: usize,
    /// Frogs that ever visit the origin: every activated frog plus the
    /// origin frog, since drift sends each one home almost surely.
    pub origin_hits: u64,
    /// All-awake runs only: sites `1..=cap` that no frog from the left ever
    /// reaches.
    pub zero_sites: Option<usize>,
}

/// Survival proportion over independent trials with a Wilson 95% interval.
#[derive(Debug, Clone, PartialEq)]
pub struct SurvivalEstimate {
    pub trials: u64,
    pub survived: u64,
    pub proportion: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub master_seed: u64,
    pub cap: usize,
}

/// Inverse-transform kernel: the reach offset a uniform `u ∈ [0, 1)` maps to
/// under `P(offset ≥ k) = r^k`, i.e. `⌊log(1-u) / log r⌋`.
pub fn reach_offset(p: f64, u: f64) -> u64 {
    debug_assert!(p > 0.5 && p < 1.0);
    let r = (1.0 - p) / p;
    ((-u).ln_1p() / r.ln()) as u64
}

/// Kernel for the maximum reach among `count` i.i.d. frogs: inverse
/// transform of the CDF power `F^count` via `u^{1/count}`, so
/// `P(max ≥ k) = 1 - (1 - r^k)^count` exactly.
pub fn max_reach_offset(p: f64, count: u64, u: f64) -> u64 {
    debug_assert!(count >= 1);
    if count == 1 {
        return reach_offset(p, u);
    }
    let r = (1.0 - p) / p;
    // 1 - u^{1/count} without cancellation.
    let v = -(u.ln() / count as f64).exp_m1();
    (v.ln() / r.ln()) as u64
}

/// Draws one reach offset.
pub fn sample_reach<R: Rng + ?Sized>(p: f64, rng: &mut R) -> u64 {
    reach_offset(p, rng.random())
}

/// Draws the maximum reach offset among `count` frogs in one uniform.
pub fn sample_max_reach<R: Rng + ?Sized>(p: f64, count: u64, rng: &mut R) -> u64 {
    max_reach_offset(p, count, rng.random())
}

/// Oracle for [`sample_reach`]: walks the ±1 steps explicitly and returns
/// the maximum position reached, killing the walk once it falls
/// `abort_depth` below its start (truncation probability ≤ r^abort_depth).
pub fn step_walk_max<R: Rng + ?Sized>(p: f64, rng: &mut R, abort_depth: u32) -> u64 {
    assert!(abort_depth >= 1);
    let floor = -i64::from(abort_depth);
    let mut pos: i64 = 0;
    let mut max_pos: i64 = 0;
    while pos > floor {
        if rng.random::<f64>() < p {
            pos -= 1;
        } else {
            pos += 1;
            if pos > max_pos {
                max_pos = pos;
            }
        }
    }
    max_pos as u64
}

/// Runs the sleeping-frog activation process up to `cap` with the default
/// frog budget.
pub fn run_activation(cfg: &ModelConfig, cap: usize, stream: &mut TrialStream) -> Result<SimOutcome> {
    run_activation_with_budget(cfg, cap, stream, DEFAULT_FROG_BUDGET)
}

/// Frontier algorithm: the origin frog's reach seeds the frontier; every
/// newly reachable site wakes its frogs, whose maximum reach may extend the
/// frontier. The run dies at the first site the frontier never covers, or
/// survives as soon as the frontier meets `cap` (no draws are consumed past
/// that point, which is what couples runs at different caps on one stream).
pub fn run_activation_with_budget(
    cfg: &ModelConfig,
    cap: usize,
    stream: &mut TrialStream,
    budget: u64,
) -> Result<SimOutcome> {
    assert!(cap >= 1, "cap must be at least 1");
    let mut frontier = sample_reach(cfg.p0, &mut stream.reaches) as usize;
    let mut activated_frogs: u64 = 0;
    let mut activated_sites: usize = 0;
    let mut next_site: usize = 1;

    while frontier < cap && next_site <= frontier {
        let count = cfg.counts.dist_at(next_site).sample_count(&mut stream.counts);
        activated_sites += 1;
        activated_frogs += count;
        if activated_frogs > budget {
            return Err(Error::BudgetExceeded {
                frogs: activated_frogs,
                budget,
                trial: None,
            });
        }
        if count > 0 {
            let off = sample_max_reach(cfg.drift.p_at(next_site), count, &mut stream.reaches);
            frontier = frontier.max(next_site.saturating_add(off as usize));
        }
        next_site += 1;
    }

    let survived = frontier >= cap;
    Ok(SimOutcome {
        died_at: (!survived).then_some(frontier + 1),
        survived_to_cap: survived,
        activated_frogs,
        activated_sites,
        origin_hits: activated_frogs + 1,
        zero_sites: None,
    })
}

fn fplus_core(
    cfg: &ModelConfig,
    cap: usize,
    stream: &mut TrialStream,
    budget: u64,
) -> Result<(Vec<bool>, u64)> {
    assert!(cap >= 1, "cap must be at least 1");
    let mut total_frogs: u64 = 0;
    // Site 0 holds the origin frog; running_max tracks max_j (j + reach_j)
    // over the sites drawn so far.
    let mut running_max = sample_reach(cfg.p0, &mut stream.reaches) as usize;
    let mut zero_at = Vec::with_capacity(cap);

    for n in 1..=cap {
        // Sites 0..n-1 are drawn by now; site n is unreached exactly when
        // none of them reaches it.
        zero_at.push(running_max < n);
        if n < cap {
            let count = cfg.counts.dist_at(n).sample_count(&mut stream.counts);
            total_frogs += count;
            if total_frogs > budget {
                return Err(Error::BudgetExceeded {
                    frogs: total_frogs,
                    budget,
                    trial: None,
                });
            }
            if count > 0 {
                let off = sample_max_reach(cfg.drift.p_at(n), count, &mut stream.reaches);
                running_max = running_max.max(n.saturating_add(off as usize));
            }
        }
    }
    Ok((zero_at, total_frogs))
}

/// Runs the all-awake variant: every site `0..cap-1` draws its frogs and
/// reaches unconditionally, and `zero_sites` counts the sites `1..=cap`
/// that no frog from their left ever hits.
pub fn run_fplus(cfg: &ModelConfig, cap: usize, stream: &mut TrialStream) -> Result<SimOutcome> {
    let (zero_at, total_frogs) = fplus_core(cfg, cap, stream, DEFAULT_FROG_BUDGET)?;
    let zero_sites = zero_at.iter().filter(|z| **z).count();
    let first_zero = zero_at.iter().position(|z| *z).map(|i| i + 1);
    Ok(SimOutcome {
        died_at: first_zero,
        survived_to_cap: first_zero.is_none(),
        activated_frogs: total_frogs,
        activated_sites: cap - 1,
        origin_hits: total_frogs + 1,
        zero_sites: Some(zero_sites),
    })
}

/// Per-site unreached flags of one all-awake run: entry `n-1` says whether
/// site `n` was hit by nobody.
pub fn fplus_zero_mask(cfg: &ModelConfig, cap: usize, stream: &mut TrialStream) -> Result<Vec<bool>> {
    fplus_core(cfg, cap, stream, DEFAULT_FROG_BUDGET).map(|(mask, _)| mask)
}

/// Closed form for the probability that site `n` goes unreached in the
/// all-awake variant:
/// `(1 - r₀ⁿ) · Π_{j=1}^{n-1} f_j(1 - r_j^{n-j})`.
pub fn zero_site_probability(cfg: &ModelConfig, n: usize) -> f64 {
    assert!(n >= 1);
    let r0 = cfg.ratio_at(0);
    let head = 1.0 - r0.powi(n as i32);
    let log_prod: f64 = (1..n)
        .map(|j| {
            let eps = cfg.ratio_at(j).powi((n - j) as i32);
            cfg.counts.log_pgf_one_minus_at(j, eps)
        })
        .sum();
    head * log_prod.exp()
}

/// Wilson 95% score interval for `successes / trials`.
pub fn wilson_ci(successes: u64, trials: u64) -> (f64, f64) {
    assert!(trials >= 1 && successes <= trials);
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = Z95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    // The score interval touches the boundary exactly at degenerate counts;
    // pin those endpoints so rounding cannot exclude the point estimate.
    let lo = if successes == 0 { 0.0 } else { (center - half).max(0.0) };
    let hi = if successes == trials {
        1.0
    } else {
        (center + half).min(1.0)
    };
    (lo, hi)
}

/// Estimates survival-to-cap over `trials` independent runs.
///
/// Trial `i` draws from `TrialStream::for_trial(master_seed, i)` and
/// aggregation is plain integer counting, so the estimate is identical for
/// any number of workers and any scheduling.
pub fn estimate_survival(
    cfg: &ModelConfig,
    cap: usize,
    trials: u64,
    master_seed: u64,
) -> Result<SurvivalEstimate> {
    assert!(trials >= 1, "need at least one trial");
    let survived = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut stream = TrialStream::for_trial(master_seed, trial);
            match run_activation(cfg, cap, &mut stream) {
                Ok(out) => Ok(u64::from(out.survived_to_cap)),
                Err(Error::BudgetExceeded { frogs, budget, .. }) => Err(Error::BudgetExceeded {
                    frogs,
                    budget,
                    trial: Some(trial),
                }),
                Err(e) => Err(e),
            }
        })
        .try_reduce(|| 0u64, |a, b| Ok(a + b))?;

    let proportion = survived as f64 / trials as f64;
    let (ci_low, ci_high) = wilson_ci(survived, trials);
    Ok(SurvivalEstimate {
        trials,
        survived,
        proportion,
        ci_low,
        ci_high,
        master_seed,
        cap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{DriftSpec, FrogCountSpec, LambdaSpec};
    use crate::pgf::DistributionSpec;
    use rand::RngCore;

    fn det1_cfg(p: f64) -> ModelConfig {
        ModelConfig {
            drift: DriftSpec::Constant { p },
            counts: FrogCountSpec::Iid(DistributionSpec::Deterministic { k: 1 }),
            p0: p,
        }
    }

    /// Feeds a scripted sequence of uniforms to anything expecting an Rng.
    struct Script {
        bits: Vec<u64>,
        at: usize,
    }

    impl Script {
        fn from_uniforms(us: &[f64]) -> Self {
            Script {
                bits: us.iter().map(|u| ((u * (1u64 << 53) as f64) as u64) << 11).collect(),
                at: 0,
            }
        }
    }

    impl RngCore for Script {
        fn next_u32(&mut self) -> u32 {
            (self.next_u64() >> 32) as u32
        }
        fn next_u64(&mut self) -> u64 {
            let v = self.bits[self.at % self.bits.len()];
            self.at += 1;
            v
        }
        fn fill_bytes(&mut self, dest: &mut [u8]) {
            for chunk in dest.chunks_mut(8) {
                let bytes = self.next_u64().to_le_bytes();
                chunk.copy_from_slice(&bytes[..chunk.len()]);
            }
        }
    }

    #[test]
    fn reach_offset_inverse_cdf_examples() {
        // floor(ln 0.1 / ln(3/7)) = floor(2.7175) = 2
        assert_eq!(reach_offset(0.7, 0.9), 2);
        for p in [0.55, 0.7, 0.9, 0.99] {
            assert_eq!(reach_offset(p, 0.0), 0);
        }
    }

    #[test]
    fn max_reach_consumes_one_uniform_and_dominates_single() {
        // For fixed u the k-maximum is monotone in k.
        for &u in &[0.1, 0.5, 0.9, 0.999] {
            let mut prev = 0;
            for k in 1..=64 {
                let off = max_reach_offset(0.65, k, u);
                assert!(off >= prev, "k={k} u={u}");
                prev = off;
            }
        }
        assert_eq!(max_reach_offset(0.65, 7, 0.0), 0);
    }

    #[test]
    fn step_walk_forced_sequences() {
        // Two lefts: walk dies at the abort floor without ever going right.
        let mut ll = Script::from_uniforms(&[0.1]);
        assert_eq!(step_walk_max(0.7, &mut ll, 3), 0);

        // Two rights first: offset at least 2 regardless of what follows.
        let mut rr = Script::from_uniforms(&[0.9, 0.9, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1]);
        assert!(step_walk_max(0.7, &mut rr, 6) >= 2);
    }

    #[test]
    fn activation_cap_one_is_origin_reach() {
        let cfg = det1_cfg(0.7);
        for trial in 0..200 {
            let mut stream = TrialStream::for_trial(99, trial);
            let out = run_activation(&cfg, 1, &mut stream).unwrap();
            // Replay the same lane to recover the origin draw.
            let mut replay = TrialStream::for_trial(99, trial);
            let off0 = sample_reach(cfg.p0, &mut replay.reaches);
            assert_eq!(out.survived_to_cap, off0 >= 1, "trial {trial}");
            if !out.survived_to_cap && off0 == 0 {
                assert_eq!(out.died_at, Some(1));
            }
            assert_eq!(out.origin_hits, out.activated_frogs + 1);
        }
    }

    #[test]
    fn death_is_monotone_in_cap_on_coupled_streams() {
        let cfg = ModelConfig {
            drift: DriftSpec::Constant { p: 0.6 },
            counts: FrogCountSpec::PoissonSeq {
                lambda: LambdaSpec::Linear {
                    alpha: 0.5,
                    beta: 0.5,
                },
            },
            p0: 0.6,
        };
        for trial in 0..500 {
            let mut small = TrialStream::for_trial(7, trial);
            let mut large = TrialStream::for_trial(7, trial);
            let out_small = run_activation(&cfg, 50, &mut small).unwrap();
            let out_large = run_activation(&cfg, 400, &mut large).unwrap();
            if out_large.survived_to_cap {
                assert!(out_small.survived_to_cap, "trial {trial}");
            }
            if !out_small.survived_to_cap {
                assert_eq!(out_small.died_at, out_large.died_at, "trial {trial}");
            }
        }
    }

    #[test]
    fn fplus_zero_flags_match_closed_form_shape() {
        let cfg = det1_cfg(0.7);
        // Exact closed-form check of the first flag: P(site 1 unreached)
        // equals 1 - r0 by construction of the kernel.
        let trials = 200_000u64;
        let mut zeros = 0u64;
        for trial in 0..trials {
            let mut stream = TrialStream::for_trial(3, trial);
            let mask = fplus_zero_mask(&cfg, 1, &mut stream).unwrap();
            zeros += u64::from(mask[0]);
        }
        let expect = 1.0 - cfg.ratio_at(0);
        let got = zeros as f64 / trials as f64;
        let sigma = (expect * (1.0 - expect) / trials as f64).sqrt();
        assert!(
            (got - expect).abs() < 4.0 * sigma,
            "got {got}, expect {expect} ± {sigma}"
        );
    }

    #[test]
    fn zero_site_probability_closed_form_values() {
        let cfg = det1_cfg(0.7);
        let r: f64 = 3.0 / 7.0;
        assert!((zero_site_probability(&cfg, 1) - (1.0 - r)).abs() < 1e-15);
        let expect2 = (1.0 - r * r) * (1.0 - r); // 160/343
        assert!((zero_site_probability(&cfg, 2) - expect2).abs() < 1e-15);
        assert!((zero_site_probability(&cfg, 2) - 160.0 / 343.0).abs() < 1e-15);
    }

    #[test]
    fn estimate_single_trial_is_zero_or_one() {
        let cfg = det1_cfg(0.7);
        let est = estimate_survival(&cfg, 10, 1, 5).unwrap();
        assert!(est.proportion == 0.0 || est.proportion == 1.0);
        assert!(est.ci_low <= est.proportion && est.proportion <= est.ci_high);
    }

    #[test]
    fn estimates_are_reproducible() {
        let cfg = det1_cfg(0.65);
        let a = estimate_survival(&cfg, 100, 2_000, 12).unwrap();
        let b = estimate_survival(&cfg, 100, 2_000, 12).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn estimates_identical_across_worker_counts() {
        let cfg = det1_cfg(0.62);
        let one = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| estimate_survival(&cfg, 200, 3_000, 21).unwrap());
        let four = rayon::ThreadPoolBuilder::new()
            .num_threads(4)
            .build()
            .unwrap()
            .install(|| estimate_survival(&cfg, 200, 3_000, 21).unwrap());
        assert_eq!(one, four);
    }

    #[test]
    fn budget_breach_is_an_error_with_trial_index() {
        let cfg = ModelConfig {
            drift: DriftSpec::Constant { p: 0.55 },
            counts: FrogCountSpec::DeterministicSeq { counts: vec![1000] },
            p0: 0.55,
        };
        // The budget admits at most a handful of sites' worth of frogs.
        let err = (0..50u64)
            .find_map(|trial| {
                let mut stream = TrialStream::for_trial(1, trial);
                run_activation_with_budget(&cfg, 1000, &mut stream, 5000).err()
            })
            .expect("some trial must blow the budget");
        assert!(matches!(err, Error::BudgetExceeded { .. }));

        let res = estimate_survival(
            &ModelConfig {
                counts: FrogCountSpec::DeterministicSeq {
                    counts: vec![DEFAULT_FROG_BUDGET + 1],
                },
                ..cfg
            },
            10,
            200,
            1,
        );
        match res {
            Err(Error::BudgetExceeded { trial: Some(_), .. }) => {}
            other => panic!("expected budget error with trial index, got {other:?}"),
        }
    }

    #[test]
    fn wilson_interval_brackets_the_proportion() {
        for (s, n) in [(0u64, 10u64), (10, 10), (1, 30), (500, 1000), (999, 1000)] {
            let (lo, hi) = wilson_ci(s, n);
            let p = s as f64 / n as f64;
            assert!(lo <= p && p <= hi, "({s}, {n})");
            assert!((0.0..=1.0).contains(&lo) && (0.0..=1.0).contains(&hi));
        }
        // Interval tightens with sample size.
        let (lo1, hi1) = wilson_ci(50, 100);
        let (lo2, hi2) = wilson_ci(5000, 10_000);
        assert!(hi2 - lo2 < hi1 - lo1);
    }

    #[test]
    fn sample_reach_script_alignment() {
        // The generic sampler over a scripted Rng reproduces the kernel.
        let mut rng = Script::from_uniforms(&[0.9, 0.0, 0.5]);
        assert_eq!(sample_reach(0.7, &mut rng), reach_offset(0.7, 0.9));
        assert_eq!(sample_reach(0.7, &mut rng), 0);
    }
}
