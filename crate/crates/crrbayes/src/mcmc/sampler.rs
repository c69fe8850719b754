//! The Metropolis-within-Gibbs sampler and its adaptive pre-burn-in tuner.
//!
//! One sweep draws `p` exactly from its Beta full conditional (the mixture
//! memberships are known, so no latent allocation step is needed), then
//! updates `u*`, `d*`, `σ_u²`, `σ_d²` by random-walk Metropolis with normal
//! proposals. All acceptance ratios are blockwise: an up-parameter move
//! touches only the up-block likelihood and the up-side prior factors, and
//! symmetrically for the down side.
//!
//! Proposal variances come from a pre-burn-in phase that monitors per-block
//! acceptance counts and doubles/halves each variance until every
//! parameter's acceptance frequency lands in the `(N/10, N/2)` band
//! ([`adaptive_pre_burn_in`]).

use rand::RngExt;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::mcmc::likelihood::{log_down_block, log_up_block};
use crate::mcmc::{
    sample_mean, sample_variance, AcceptanceCounts, Chain, ChainConfig, ParamId, PerParam,
    PriorConfig, ProposalVariances, ReturnSeries, ThetaSample, TunerOptions, TunerRule,
    VARIANCE_FLOOR,
};
use crate::rng::{domains, RngStream};
use crate::stats::sample_beta;

/// Draws `p` from its exact full conditional
/// `Beta(a + #ups, b + #downs)`.
///
/// The conditional depends on the data only through the up/down counts and
/// on no other parameter.
pub fn sample_p(data: &ReturnSeries, prior: &PriorConfig, rng: &mut RngStream) -> Result<f64> {
    sample_beta(
        prior.a + data.ups().len() as f64,
        prior.b + data.downs().len() as f64,
        rng,
    )
}

/// Unnormalized Inverse-Gamma log-density `-(α+1)·ln x - β/x`.
fn ig_ln_kernel(x: f64, alpha: f64, beta: f64) -> f64 {
    -(alpha + 1.0) * x.ln() - beta / x
}

/// Log acceptance ratio for proposing `proposed` as the new value of
/// `param`, everything else held at `current`.
///
/// Pure function of its inputs; `-∞` encodes deterministic rejection
/// (proposal outside the parameter's support). Uniform-prior density terms
/// cancel between numerator and denominator, so `u*`/`d*` ratios reduce to
/// indicator × likelihood-block differences, and `σ²` ratios additionally
/// carry the Inverse-Gamma prior kernel.
pub fn log_accept_ratio(
    param: ParamId,
    current: &ThetaSample,
    proposed: f64,
    data: &ReturnSeries,
    prior: &PriorConfig,
) -> f64 {
    let growth = 1.0 + data.r_f();
    let (num, den) = match param {
        ParamId::UStar => {
            if !(proposed > growth && proposed < prior.u_upper) {
                return f64::NEG_INFINITY;
            }
            (
                log_up_block(proposed, current.sigma2_u, data),
                log_up_block(current.u_star, current.sigma2_u, data),
            )
        }
        ParamId::DStar => {
            if !(proposed > 0.0 && proposed < growth) {
                return f64::NEG_INFINITY;
            }
            (
                log_down_block(proposed, current.sigma2_d, data),
                log_down_block(current.d_star, current.sigma2_d, data),
            )
        }
        ParamId::Sigma2U => {
            if !(proposed > 0.0) {
                return f64::NEG_INFINITY;
            }
            (
                ig_ln_kernel(proposed, prior.alpha_u, prior.beta_u)
                    + log_up_block(current.u_star, proposed, data),
                ig_ln_kernel(current.sigma2_u, prior.alpha_u, prior.beta_u)
                    + log_up_block(current.u_star, current.sigma2_u, data),
            )
        }
        ParamId::Sigma2D => {
            if !(proposed > 0.0) {
                return f64::NEG_INFINITY;
            }
            (
                ig_ln_kernel(proposed, prior.alpha_d, prior.beta_d)
                    + log_down_block(current.d_star, proposed, data),
                ig_ln_kernel(current.sigma2_d, prior.alpha_d, prior.beta_d)
                    + log_down_block(current.d_star, current.sigma2_d, data),
            )
        }
    };
    if num == f64::NEG_INFINITY {
        // Proposed state has zero posterior density.
        f64::NEG_INFINITY
    } else if den == f64::NEG_INFINITY {
        // Escaping a zero-density current state is always accepted.
        f64::INFINITY
    } else {
        num - den
    }
}

/// One random-walk Metropolis update of `param`.
///
/// Proposes `Normal(current value, proposal_variance)`, accepts with
/// probability `min(1, ratio)`. Out-of-support proposals reject without
/// consuming the acceptance uniform; certain acceptances (`ratio ≥ 1`) skip
/// it as well, so the draw count per step depends only on the ratio's sign
/// pattern, which is itself deterministic given the stream.
pub fn metropolis_step(
    param: ParamId,
    current: &ThetaSample,
    data: &ReturnSeries,
    prior: &PriorConfig,
    proposal_variance: f64,
    rng: &mut RngStream,
) -> Result<(ThetaSample, bool)> {
    if !(proposal_variance.is_finite() && proposal_variance > 0.0) {
        return Err(Error::invalid(
            "proposal_variance",
            format!("must be finite and positive, got {proposal_variance}"),
        ));
    }
    let noise: f64 = rng.sample(StandardNormal);
    let proposed = current.get(param) + proposal_variance.sqrt() * noise;
    let ln_ratio = log_accept_ratio(param, current, proposed, data, prior);
    let accepted = if ln_ratio == f64::NEG_INFINITY {
        false
    } else if ln_ratio >= 0.0 {
        true
    } else {
        let u: f64 = rng.random();
        u.ln() < ln_ratio
    };
    if accepted {
        Ok((current.with(param, proposed), true))
    } else {
        Ok((*current, false))
    }
}

/// Pure per-block tuning rule: returns the adjusted variance and whether
/// the parameter freezes.
///
/// With [`TunerRule::Standard`], acceptance above `N/2` doubles the
/// variance, below `N/10` halves it, and anything in between freezes the
/// parameter. [`TunerRule::Literal`] swaps the two adjustments.
pub fn tuner_adjust(
    variance: f64,
    accepted: usize,
    block_size: usize,
    rule: TunerRule,
) -> (f64, bool) {
    let high = 2 * accepted > block_size;
    let low = 10 * accepted < block_size;
    let factor = match (high, low, rule) {
        (true, _, TunerRule::Standard) => 2.0,
        (_, true, TunerRule::Standard) => 0.5,
        (true, _, TunerRule::Literal) => 0.5,
        (_, true, TunerRule::Literal) => 2.0,
        _ => return (variance, true),
    };
    (variance * factor, false)
}

/// Result of the adaptive pre-burn-in phase.
#[derive(Debug, Clone)]
pub struct TunerResult {
    /// Tuned proposal variances (frozen ones and, if the cap was hit, the
    /// last values of still-adapting ones).
    pub variances: ProposalVariances,
    /// Sampler state at the end of tuning; the main run continues from it.
    pub state: ThetaSample,
    /// False when the block cap was reached before all four parameters
    /// froze.
    pub converged: bool,
    /// Monitoring blocks consumed.
    pub blocks_used: usize,
    /// Total pre-burn-in sweeps (`blocks_used × block_size`).
    pub iterations: usize,
}

/// Scale-aware starting proposal variances.
///
/// A random-walk proposal mixes best when its standard deviation is a few
/// times the conditional posterior's, so each location starts from
/// `32 · Var/n` (several standard errors of a mean, squared) and each
/// variance parameter from `64 · Var²/n` (the same margin on a sample
/// variance's standard error). The constants center typical long-run
/// acceptance near 30%, the middle of the tuner's band. Starting near the
/// target matters: a grossly oversized start makes the tuner crawl toward
/// the band one halving at a time and freeze at the band's edge, where
/// the long-run acceptance rate can fall just outside it.
fn initial_proposal_variances(data: &ReturnSeries) -> ProposalVariances {
    let v_up = sample_variance(data.ups()).max(VARIANCE_FLOOR);
    let v_down = sample_variance(data.downs()).max(VARIANCE_FLOOR);
    let n_up = data.ups().len().max(1) as f64;
    let n_down = data.downs().len().max(1) as f64;
    PerParam {
        u_star: 32.0 * v_up / n_up,
        d_star: 32.0 * v_down / n_down,
        sigma2_u: 64.0 * v_up * v_up / n_up,
        sigma2_d: 64.0 * v_down * v_down / n_down,
    }
}

/// Runs monitoring blocks of full Gibbs sweeps, adjusting each proposal
/// variance after every block per [`tuner_adjust`], until all four freeze
/// or `opts.max_blocks` is exhausted (in which case `converged = false` and
/// the caller may warn).
///
/// Frozen parameters keep sampling with their frozen variance so the chain
/// state keeps mixing while the rest adapt.
pub fn adaptive_pre_burn_in(
    data: &ReturnSeries,
    prior: &PriorConfig,
    initial: &ThetaSample,
    opts: &TunerOptions,
    rng: &mut RngStream,
) -> Result<TunerResult> {
    initial.validate(data.r_f(), prior.u_upper)?;
    let mut state = *initial;
    let mut variances = initial_proposal_variances(data);
    let mut frozen = PerParam::<bool>::default();
    let mut blocks_used = 0;

    for _ in 0..opts.max_blocks {
        blocks_used += 1;
        let mut accepted = PerParam::<usize>::default();
        for _ in 0..opts.block_size {
            state.p = sample_p(data, prior, rng)?;
            for param in ParamId::ALL {
                let (next, ok) =
                    metropolis_step(param, &state, data, prior, *variances.get(param), rng)?;
                state = next;
                if ok {
                    *accepted.get_mut(param) += 1;
                }
            }
        }
        for param in ParamId::ALL {
            if !*frozen.get(param) {
                let (v, freeze) = tuner_adjust(
                    *variances.get(param),
                    *accepted.get(param),
                    opts.block_size,
                    opts.rule,
                );
                *variances.get_mut(param) = v;
                *frozen.get_mut(param) = freeze;
            }
        }
        if ParamId::ALL.iter().all(|p| *frozen.get(*p)) {
            return Ok(TunerResult {
                variances,
                state,
                converged: true,
                blocks_used,
                iterations: blocks_used * opts.block_size,
            });
        }
    }
    Ok(TunerResult {
        variances,
        state,
        converged: false,
        blocks_used,
        iterations: blocks_used * opts.block_size,
    })
}

/// Starting state from the data: class means for the locations, class
/// variances (floored) for the component variances, the observed up-share
/// for `p`.
fn initial_state(data: &ReturnSeries, prior: &PriorConfig) -> ThetaSample {
    let growth = 1.0 + data.r_f();
    // Class means sit inside their supports except in corner cases (e.g.
    // every up equal to 1+r_f); nudge into the open interval.
    let u_star = sample_mean(data.ups())
        .clamp(growth, prior.u_upper)
        .max(growth.next_up())
        .min(prior.u_upper.next_down());
    let d_star = sample_mean(data.downs())
        .clamp(0.0, growth)
        .max(0.0f64.next_up())
        .min(growth.next_down());
    ThetaSample {
        u_star,
        d_star,
        sigma2_u: sample_variance(data.ups()).max(VARIANCE_FLOOR),
        sigma2_d: sample_variance(data.downs()).max(VARIANCE_FLOOR),
        p: data.ups().len() as f64 / data.len() as f64,
    }
}

/// Runs the full sampler: initialization from the data, adaptive
/// pre-burn-in, then `config.iterations` main sweeps of which the
/// post-burn-in states are kept at stride `config.thin`.
///
/// Requires at least one observation on each side of `1 + r_f`
/// ([`Error::DegenerateWindow`] otherwise) and every observation below the
/// prior's `u_upper`. Bit-reproducible for a fixed `config.seed`.
pub fn run_chain(data: &ReturnSeries, prior: &PriorConfig, config: &ChainConfig) -> Result<Chain> {
    config.validate()?;
    prior.validate(data.r_f())?;
    let (n_ups, n_downs) = (data.ups().len(), data.downs().len());
    if n_ups == 0 || n_downs == 0 {
        return Err(Error::DegenerateWindow {
            ups: n_ups,
            downs: n_downs,
        });
    }
    if let Some(max) = data.max_value() {
        if max >= prior.u_upper {
            return Err(Error::invalid(
                "u_upper",
                format!(
                    "largest observed gross return {max} is not below the \
                     u* prior upper bound {}; raise u_upper",
                    prior.u_upper
                ),
            ));
        }
    }

    let root = RngStream::from_seed(config.seed);
    let mut tuner_rng = root.substream(domains::TUNER, 0);
    let mut main_rng = root.substream(domains::MAIN_CHAIN, 0);

    let tuned = adaptive_pre_burn_in(data, prior, &initial_state(data, prior), &config.tuner, &mut tuner_rng)?;
    let mut state = tuned.state;
    let variances = tuned.variances;

    let kept = (config.iterations - config.burn_in).div_ceil(config.thin);
    let mut samples = Vec::with_capacity(kept);
    let mut accept_flags = Vec::with_capacity(config.iterations);
    let mut counts = AcceptanceCounts::default();

    for i in 0..config.iterations {
        state.p = sample_p(data, prior, &mut main_rng)?;
        let mut flags = PerParam::<bool>::default();
        for param in ParamId::ALL {
            let (next, accepted) =
                metropolis_step(param, &state, data, prior, *variances.get(param), &mut main_rng)?;
            state = next;
            *flags.get_mut(param) = accepted;
            if accepted {
                *counts.get_mut(param) += 1;
            }
        }
        accept_flags.push(flags);
        if i >= config.burn_in && (i - config.burn_in) % config.thin == 0 {
            samples.push(state);
        }
    }

    Ok(Chain {
        samples,
        proposal_variances: variances,
        acceptance_counts: counts,
        accept_flags,
        iterations: config.iterations,
        burn_in: config.burn_in,
        thin: config.thin,
        seed: config.seed,
        r_f: data.r_f(),
        u_upper: prior.u_upper,
        tuner_converged: tuned.converged,
        tuner_blocks: tuned.blocks_used,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    /// Deterministic synthetic window with ups around 1.008 and downs
    /// around 0.996.
    fn synthetic_window(r_f: f64) -> ReturnSeries {
        let mut values = Vec::new();
        for i in 0..30 {
            values.push(1.004 + 0.0005 * (i % 13) as f64); // ups 1.004..1.010
            if i % 3 != 0 {
                values.push(0.9985 - 0.0004 * (i % 11) as f64); // downs
            }
        }
        ReturnSeries::new(values, r_f).unwrap()
    }

    fn base_theta() -> ThetaSample {
        ThetaSample {
            u_star: 1.006,
            d_star: 0.996,
            sigma2_u: 4e-6,
            sigma2_d: 4e-6,
            p: 0.6,
        }
    }

    #[test]
    fn sample_p_reduces_to_prior_on_empty_data() {
        // With no observations the conditional is Beta(a, b); check the
        // first two moments of Beta(3, 2).
        let data = ReturnSeries::new(vec![], 0.0).unwrap();
        let prior = PriorConfig {
            a: 3.0,
            b: 2.0,
            alpha_u: 2.0,
            beta_u: 1e-8,
            alpha_d: 2.0,
            beta_d: 1e-8,
            u_upper: 2.0,
        };
        let mut rng = RngStream::from_seed(8);
        let n = 50_000;
        let mean = (0..n)
            .map(|_| sample_p(&data, &prior, &mut rng).unwrap())
            .sum::<f64>()
            / n as f64;
        let expect = 0.6;
        let var = 3.0 * 2.0 / (25.0 * 6.0);
        assert!((mean - expect).abs() < 3.0 * (var / n as f64).sqrt());
    }

    #[test]
    fn sample_p_all_ups_matches_beta_21_1() {
        let values = vec![1.01; 20];
        let data = ReturnSeries::new(values, 0.0).unwrap();
        let prior = PriorConfig {
            a: 1.0,
            b: 1.0,
            alpha_u: 2.0,
            beta_u: 1e-8,
            alpha_d: 2.0,
            beta_d: 1e-8,
            u_upper: 2.0,
        };
        let mut rng = RngStream::from_seed(9);
        let n = 100_000;
        let mean = (0..n)
            .map(|_| sample_p(&data, &prior, &mut rng).unwrap())
            .sum::<f64>()
            / n as f64;
        let expect = 21.0 / 22.0;
        let var = 21.0 / (22.0f64.powi(2) * 23.0);
        assert!(
            (mean - expect).abs() < 3.0 * (var / n as f64).sqrt(),
            "mean {mean} vs {expect}"
        );
    }

    #[test]
    fn out_of_support_proposals_reject_deterministically() {
        let data = synthetic_window(2e-4);
        let prior = PriorConfig::default_for(&data);
        let th = base_theta();
        // u* proposals at/below 1+r_f or at/above u_upper.
        assert_eq!(
            log_accept_ratio(ParamId::UStar, &th, 1.0 + 2e-4, &data, &prior),
            f64::NEG_INFINITY
        );
        assert_eq!(
            log_accept_ratio(ParamId::UStar, &th, 0.9, &data, &prior),
            f64::NEG_INFINITY
        );
        assert_eq!(
            log_accept_ratio(ParamId::UStar, &th, 2.0, &data, &prior),
            f64::NEG_INFINITY
        );
        // d* outside (0, 1+r_f).
        assert_eq!(
            log_accept_ratio(ParamId::DStar, &th, 1.1, &data, &prior),
            f64::NEG_INFINITY
        );
        assert_eq!(
            log_accept_ratio(ParamId::DStar, &th, 0.0, &data, &prior),
            f64::NEG_INFINITY
        );
        // Nonpositive variances.
        assert_eq!(
            log_accept_ratio(ParamId::Sigma2U, &th, 0.0, &data, &prior),
            f64::NEG_INFINITY
        );
        assert_eq!(
            log_accept_ratio(ParamId::Sigma2D, &th, -1e-6, &data, &prior),
            f64::NEG_INFINITY
        );
    }

    #[test]
    fn identical_proposal_ratio_is_one() {
        let data = synthetic_window(2e-4);
        let prior = PriorConfig::default_for(&data);
        let th = base_theta();
        for param in ParamId::ALL {
            let r = log_accept_ratio(param, &th, th.get(param), &data, &prior);
            assert_relative_eq!(r, 0.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn ratio_is_antisymmetric_between_states() {
        // min(1, r(x→y)) balance reduces to ln r(x→y) = -ln r(y→x); this
        // holds because the ratio is a posterior-density quotient.
        let data = synthetic_window(2e-4);
        let prior = PriorConfig::default_for(&data);
        let th_x = base_theta();
        for (param, y) in [
            (ParamId::UStar, 1.0071),
            (ParamId::DStar, 0.9952),
            (ParamId::Sigma2U, 6.3e-6),
            (ParamId::Sigma2D, 2.9e-6),
        ] {
            let forward = log_accept_ratio(param, &th_x, y, &data, &prior);
            let th_y = th_x.with(param, y);
            let backward = log_accept_ratio(param, &th_y, th_x.get(param), &data, &prior);
            assert_relative_eq!(forward, -backward, max_relative = 1e-9, epsilon = 1e-10);
        }
    }

    #[test]
    fn up_moves_do_not_read_down_parameters() {
        let data = synthetic_window(2e-4);
        let prior = PriorConfig::default_for(&data);
        let th = base_theta();
        let altered = ThetaSample {
            d_star: 0.99,
            sigma2_d: 9e-6,
            ..th
        };
        for (param, proposed) in [(ParamId::UStar, 1.0065), (ParamId::Sigma2U, 5e-6)] {
            assert_eq!(
                log_accept_ratio(param, &th, proposed, &data, &prior),
                log_accept_ratio(param, &altered, proposed, &data, &prior)
            );
        }
    }

    #[test]
    fn metropolis_step_validates_variance_and_is_reproducible() {
        let data = synthetic_window(2e-4);
        let prior = PriorConfig::default_for(&data);
        let th = base_theta();
        let mut rng = RngStream::from_seed(4);
        assert!(metropolis_step(ParamId::UStar, &th, &data, &prior, 0.0, &mut rng).is_err());
        assert!(metropolis_step(ParamId::UStar, &th, &data, &prior, -1.0, &mut rng).is_err());

        let run = |seed: u64| {
            let mut rng = RngStream::from_seed(seed);
            let mut state = th;
            let mut path = Vec::new();
            for _ in 0..200 {
                for param in ParamId::ALL {
                    let (next, _) =
                        metropolis_step(param, &state, &data, &prior, 1e-6, &mut rng).unwrap();
                    state = next;
                }
                path.push(state);
            }
            path
        };
        assert_eq!(run(12), run(12));
    }

    #[test]
    fn tuner_adjust_standard_rule() {
        // 60/100 acceptances: widen. 5/100: narrow. 30/100: freeze.
        assert_eq!(tuner_adjust(1.0, 60, 100, TunerRule::Standard), (2.0, false));
        assert_eq!(tuner_adjust(1.0, 5, 100, TunerRule::Standard), (0.5, false));
        assert_eq!(tuner_adjust(1.0, 30, 100, TunerRule::Standard), (1.0, true));
        // Band edges: exactly N/2 and exactly N/10 freeze (the adjustments
        // require strictly more / strictly fewer).
        assert_eq!(tuner_adjust(1.0, 50, 100, TunerRule::Standard), (1.0, true));
        assert_eq!(tuner_adjust(1.0, 10, 100, TunerRule::Standard), (1.0, true));
        assert_eq!(tuner_adjust(1.0, 51, 100, TunerRule::Standard), (2.0, false));
        assert_eq!(tuner_adjust(1.0, 9, 100, TunerRule::Standard), (0.5, false));
    }

    #[test]
    fn tuner_adjust_literal_rule_swaps_directions() {
        assert_eq!(tuner_adjust(1.0, 60, 100, TunerRule::Literal), (0.5, false));
        assert_eq!(tuner_adjust(1.0, 5, 100, TunerRule::Literal), (2.0, false));
        assert_eq!(tuner_adjust(1.0, 30, 100, TunerRule::Literal), (1.0, true));
    }

    #[test]
    fn pre_burn_in_converges_on_well_behaved_data() {
        let data = synthetic_window(2e-4);
        let prior = PriorConfig::default_for(&data);
        let initial = initial_state(&data, &prior);
        let mut rng = RngStream::from_seed(77);
        let tuned =
            adaptive_pre_burn_in(&data, &prior, &initial, &TunerOptions::default(), &mut rng)
                .unwrap();
        assert!(tuned.converged, "tuner failed to converge");
        assert!(tuned.blocks_used <= 50);
        assert!(tuned.iterations == tuned.blocks_used * 100);
        for param in ParamId::ALL {
            assert!(*tuned.variances.get(param) > 0.0);
        }
        tuned.state.validate(data.r_f(), prior.u_upper).unwrap();
    }

    #[test]
    fn run_chain_rejects_degenerate_windows_and_bad_lengths() {
        let all_ups = ReturnSeries::new(vec![1.01, 1.02, 1.03], 0.0).unwrap();
        let prior = PriorConfig::default_for(&all_ups);
        let err = run_chain(&all_ups, &prior, &ChainConfig::default()).unwrap_err();
        assert!(matches!(err, Error::DegenerateWindow { ups: 3, downs: 0 }));

        let data = synthetic_window(0.0);
        let prior = PriorConfig::default_for(&data);
        let bad = ChainConfig {
            iterations: 50,
            burn_in: 50,
            ..ChainConfig::default()
        };
        assert!(run_chain(&data, &prior, &bad).is_err());

        // Observation at/above u_upper must be rejected up front.
        let spike = ReturnSeries::new(vec![1.01, 0.99, 2.4], 0.0).unwrap();
        let prior = PriorConfig::default_for(&spike);
        assert!(run_chain(&spike, &prior, &ChainConfig::default()).is_err());
    }

    #[test]
    fn run_chain_sample_count_arithmetic() {
        let data = synthetic_window(2e-4);
        let prior = PriorConfig::default_for(&data);
        // Minimal run: one kept sample.
        let cfg = ChainConfig {
            iterations: 61,
            burn_in: 60,
            thin: 1,
            seed: 5,
            tuner: TunerOptions {
                max_blocks: 3,
                ..TunerOptions::default()
            },
        };
        let chain = run_chain(&data, &prior, &cfg).unwrap();
        assert_eq!(chain.len(), 1);
        assert_eq!(chain.kept_iteration(0), 60);

        // ceil((iterations - burn_in)/thin) kept samples.
        let cfg = ChainConfig {
            iterations: 107,
            burn_in: 20,
            thin: 10,
            seed: 5,
            tuner: TunerOptions {
                max_blocks: 3,
                ..TunerOptions::default()
            },
        };
        let chain = run_chain(&data, &prior, &cfg).unwrap();
        assert_eq!(chain.len(), 9); // ceil(87/10)
        assert_eq!(chain.kept_iteration(8), 100);
        assert_eq!(chain.accept_flags.len(), 107);
        // Counts are the column sums of the flags.
        for param in ParamId::ALL {
            let from_flags = chain
                .accept_flags
                .iter()
                .filter(|f| *f.get(param))
                .count() as u64;
            assert_eq!(from_flags, *chain.acceptance_counts.get(param));
        }
    }

    #[test]
    fn run_chain_is_bit_reproducible() {
        let data = synthetic_window(2e-4);
        let prior = PriorConfig::default_for(&data);
        let cfg = ChainConfig {
            iterations: 400,
            burn_in: 100,
            thin: 3,
            seed: 99,
            tuner: TunerOptions::default(),
        };
        let a = run_chain(&data, &prior, &cfg).unwrap();
        let b = run_chain(&data, &prior, &cfg).unwrap();
        assert_eq!(a.samples, b.samples);
        assert_eq!(a.proposal_variances, b.proposal_variances);
        assert_eq!(a.acceptance_counts, b.acceptance_counts);
        let c = run_chain(
            &data,
            &prior,
            &ChainConfig {
                seed: 100,
                ..cfg
            },
        )
        .unwrap();
        assert_ne!(a.samples, c.samples);
    }

    #[test]
    fn every_kept_sample_satisfies_support_ordering() {
        let data = synthetic_window(2e-4);
        let prior = PriorConfig::default_for(&data);
        let cfg = ChainConfig {
            iterations: 500,
            burn_in: 50,
            thin: 2,
            seed: 123,
            tuner: TunerOptions::default(),
        };
        let chain = run_chain(&data, &prior, &cfg).unwrap();
        assert_eq!(chain.len(), 225);
        for s in &chain.samples {
            s.validate(data.r_f(), prior.u_upper).unwrap();
        }
    }
}
