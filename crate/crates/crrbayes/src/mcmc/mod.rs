//! Posterior sampling for the truncated-normal mixture model of gross
//! returns.
//!
//! The model: each observed gross return `ξ_i` is an up-move drawn from
//! `TN(u*, σ_u², 1+r_f, +∞)` with probability `p`, or a down-move from
//! `TN(d*, σ_d², 0, 1+r_f)` with probability `1-p`. Priors are
//! `d* ~ U(0, 1+r_f)`, `u* ~ U(1+r_f, u_upper)`, `σ² ~ InverseGamma`, and
//! `p ~ Beta(a, b)`.
//!
//! Because the component supports are disjoint, the up/down membership of
//! every observation is known, which makes `p`'s full conditional an exact
//! Beta — it is drawn in closed form each sweep — while `u*`, `d*`, `σ_u²`,
//! `σ_d²` move by random-walk Metropolis with per-parameter proposal
//! variances tuned during an adaptive pre-burn-in phase
//! ([`adaptive_pre_burn_in`]). The up-parameters and down-parameters touch
//! disjoint likelihood factors, so each Metropolis ratio involves only its
//! own block of observations.

mod diagnostics;
mod export;
mod likelihood;
mod sampler;

pub use diagnostics::{
    autocorrelation, chain_diagnostics, Diagnostics, Histogram, SeriesDiagnostics,
    DEFAULT_ACF_LAGS, DEFAULT_HISTOGRAM_BINS,
};
pub use export::{
    read_theta_samples_csv, write_chain_csv, write_chain_csv_path, CHAIN_CSV_HEADER,
};
pub use likelihood::{log_down_block, log_likelihood, log_up_block};
pub use sampler::{
    adaptive_pre_burn_in, log_accept_ratio, metropolis_step, run_chain, sample_p, tuner_adjust,
    TunerResult,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Floor applied to data-derived variances (initial values, proposal
/// variances, prior scales) so single-point or constant windows cannot
/// produce zero.
pub(crate) const VARIANCE_FLOOR: f64 = 1e-8;

/// The four parameters updated by Metropolis steps.
///
/// `p` is not listed: its full conditional is sampled exactly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParamId {
    UStar,
    DStar,
    Sigma2U,
    Sigma2D,
}

impl ParamId {
    /// Update order within one Gibbs sweep (after the exact `p` draw),
    /// matching the sampler's published description: `u*`, `d*`, `σ_u²`,
    /// `σ_d²`.
    pub const ALL: [ParamId; 4] = [ParamId::UStar, ParamId::DStar, ParamId::Sigma2U, ParamId::Sigma2D];

    pub fn name(&self) -> &'static str {
        match self {
            ParamId::UStar => "u_star",
            ParamId::DStar => "d_star",
            ParamId::Sigma2U => "sigma2_u",
            ParamId::Sigma2D => "sigma2_d",
        }
    }
}

/// A value per Metropolis-updated parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct PerParam<T> {
    pub u_star: T,
    pub d_star: T,
    pub sigma2_u: T,
    pub sigma2_d: T,
}

impl<T> PerParam<T> {
    pub fn get(&self, id: ParamId) -> &T {
        match id {
            ParamId::UStar => &self.u_star,
            ParamId::DStar => &self.d_star,
            ParamId::Sigma2U => &self.sigma2_u,
            ParamId::Sigma2D => &self.sigma2_d,
        }
    }

    pub fn get_mut(&mut self, id: ParamId) -> &mut T {
        match id {
            ParamId::UStar => &mut self.u_star,
            ParamId::DStar => &mut self.d_star,
            ParamId::Sigma2U => &mut self.sigma2_u,
            ParamId::Sigma2D => &mut self.sigma2_d,
        }
    }

    pub fn map<U>(&self, mut f: impl FnMut(&T) -> U) -> PerParam<U> {
        PerParam {
            u_star: f(&self.u_star),
            d_star: f(&self.d_star),
            sigma2_u: f(&self.sigma2_u),
            sigma2_d: f(&self.sigma2_d),
        }
    }
}

/// Per-parameter random-walk proposal variances (`v_u`, `v_d`, `v_{σ_u²}`,
/// `v_{σ_d²}` in the usual notation).
pub type ProposalVariances = PerParam<f64>;

/// Per-parameter Metropolis acceptance tallies.
pub type AcceptanceCounts = PerParam<u64>;

/// An observed window of gross returns plus the per-period risk-free rate
/// that splits it into up-moves and down-moves.
///
/// Observations exactly equal to `1 + r_f` sit on the boundary the mixture
/// components cannot reach; they are classified as up-moves and counted in
/// [`ReturnSeries::tie_count`] so callers can warn.
#[derive(Debug, Clone)]
pub struct ReturnSeries {
    values: Vec<f64>,
    ups: Vec<f64>,
    downs: Vec<f64>,
    r_f: f64,
    tie_count: usize,
}

impl ReturnSeries {
    /// Validates and partitions a window of gross returns.
    ///
    /// Every value must be finite and strictly positive. An empty window is
    /// allowed here (the likelihood of no data is an empty product);
    /// [`run_chain`] separately requires at least one observation on each
    /// side of `1 + r_f`.
    pub fn new(values: Vec<f64>, r_f: f64) -> Result<Self> {
        if !(r_f.is_finite() && r_f > -1.0) {
            return Err(Error::invalid(
                "r_f",
                format!("must be finite and greater than -1, got {r_f}"),
            ));
        }
        let growth = 1.0 + r_f;
        let mut ups = Vec::new();
        let mut downs = Vec::new();
        let mut tie_count = 0;
        for (i, &v) in values.iter().enumerate() {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(
                    "values",
                    format!("gross return at index {i} must be finite and positive, got {v}"),
                ));
            }
            if v >= growth {
                if v == growth {
                    tie_count += 1;
                }
                ups.push(v);
            } else {
                downs.push(v);
            }
        }
        Ok(ReturnSeries {
            values,
            ups,
            downs,
            r_f,
            tie_count,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn ups(&self) -> &[f64] {
        &self.ups
    }

    pub fn downs(&self) -> &[f64] {
        &self.downs
    }

    pub fn r_f(&self) -> f64 {
        self.r_f
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Number of observations exactly equal to `1 + r_f` (classified up).
    pub fn tie_count(&self) -> usize {
        self.tie_count
    }

    /// Largest observed gross return; must stay below the prior's `u_upper`.
    pub fn max_value(&self) -> Option<f64> {
        self.values.iter().copied().reduce(f64::max)
    }
}

/// Prior hyperparameters.
///
/// Defaults (the source model leaves them unstated): `a = b = 1` (uniform on
/// `p`), `α_u = α_d = 2`, and `β = (α - 1) ×` the sample variance of the
/// matching return class, centering each Inverse-Gamma prior on the
/// empirical variance while keeping it weakly informative. `u_upper`
/// defaults to 2, the upper bound of the uniform prior on `u*`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PriorConfig {
    /// Beta prior shape for up-probability successes.
    pub a: f64,
    /// Beta prior shape for down-probability successes.
    pub b: f64,
    /// Inverse-Gamma shape for `σ_u²`.
    pub alpha_u: f64,
    /// Inverse-Gamma rate for `σ_u²`.
    pub beta_u: f64,
    /// Inverse-Gamma shape for `σ_d²`.
    pub alpha_d: f64,
    /// Inverse-Gamma rate for `σ_d²`.
    pub beta_d: f64,
    /// Upper bound of the uniform prior on `u*`.
    pub u_upper: f64,
}

impl PriorConfig {
    /// Data-adapted default prior: uniform on `p`, Inverse-Gamma variances
    /// centered on the per-class sample variances.
    pub fn default_for(data: &ReturnSeries) -> Self {
        let alpha = 2.0;
        PriorConfig {
            a: 1.0,
            b: 1.0,
            alpha_u: alpha,
            beta_u: (alpha - 1.0) * sample_variance(data.ups()).max(VARIANCE_FLOOR),
            alpha_d: alpha,
            beta_d: (alpha - 1.0) * sample_variance(data.downs()).max(VARIANCE_FLOOR),
            u_upper: 2.0,
        }
    }

    pub fn validate(&self, r_f: f64) -> Result<()> {
        for (name, v) in [
            ("a", self.a),
            ("b", self.b),
            ("alpha_u", self.alpha_u),
            ("beta_u", self.beta_u),
            ("alpha_d", self.alpha_d),
            ("beta_d", self.beta_d),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(
                    "prior",
                    format!("{name} must be finite and positive, got {v}"),
                ));
            }
        }
        if !(self.u_upper.is_finite() && self.u_upper > 1.0 + r_f) {
            return Err(Error::invalid(
                "u_upper",
                format!("must exceed 1 + r_f = {}, got {}", 1.0 + r_f, self.u_upper),
            ));
        }
        Ok(())
    }
}

/// Unbiased sample variance, 0 for fewer than two points.
pub(crate) fn sample_variance(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
}

pub(crate) fn sample_mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// One state of the sampler: the four structural parameters plus the mixture
/// weight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThetaSample {
    pub u_star: f64,
    pub d_star: f64,
    pub sigma2_u: f64,
    pub sigma2_d: f64,
    pub p: f64,
}

impl ThetaSample {
    pub fn get(&self, id: ParamId) -> f64 {
        match id {
            ParamId::UStar => self.u_star,
            ParamId::DStar => self.d_star,
            ParamId::Sigma2U => self.sigma2_u,
            ParamId::Sigma2D => self.sigma2_d,
        }
    }

    /// Copy of `self` with one Metropolis parameter replaced.
    pub fn with(&self, id: ParamId, value: f64) -> ThetaSample {
        let mut next = *self;
        match id {
            ParamId::UStar => next.u_star = value,
            ParamId::DStar => next.d_star = value,
            ParamId::Sigma2U => next.sigma2_u = value,
            ParamId::Sigma2D => next.sigma2_d = value,
        }
        next
    }

    /// Checks the support ordering `0 < d* < 1+r_f < u* < u_upper`, positive
    /// variances, and `0 < p < 1`.
    pub fn validate(&self, r_f: f64, u_upper: f64) -> Result<()> {
        let growth = 1.0 + r_f;
        if !(self.d_star > 0.0 && self.d_star < growth && growth < self.u_star && self.u_star < u_upper)
        {
            return Err(Error::invalid(
                "theta",
                format!(
                    "support ordering 0 < d* < 1+r_f < u* < u_upper violated: \
                     d*={}, u*={}, 1+r_f={growth}, u_upper={u_upper}",
                    self.d_star, self.u_star
                ),
            ));
        }
        if !(self.sigma2_u.is_finite() && self.sigma2_u > 0.0) {
            return Err(Error::invalid("sigma2_u", format!("must be positive, got {}", self.sigma2_u)));
        }
        if !(self.sigma2_d.is_finite() && self.sigma2_d > 0.0) {
            return Err(Error::invalid("sigma2_d", format!("must be positive, got {}", self.sigma2_d)));
        }
        if !(self.p > 0.0 && self.p < 1.0) {
            return Err(Error::invalid("p", format!("must lie in (0, 1), got {}", self.p)));
        }
        Ok(())
    }
}

/// Tuning rule direction for the adaptive pre-burn-in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TunerRule {
    /// High acceptance → larger proposal variance (the standard Metropolis
    /// tuning direction, and the default).
    #[default]
    Standard,
    /// High acceptance → smaller proposal variance, reproducing the source
    /// description verbatim. That direction moves acceptance *away* from
    /// the stated 10–50% target; it is provided for comparison runs.
    Literal,
}

/// Adaptive pre-burn-in settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TunerOptions {
    pub rule: TunerRule,
    /// Iterations per monitoring block (`N`).
    pub block_size: usize,
    /// Hard cap on blocks; hitting it returns with `converged = false`.
    pub max_blocks: usize,
}

impl Default for TunerOptions {
    fn default() -> Self {
        TunerOptions {
            rule: TunerRule::Standard,
            block_size: 100,
            max_blocks: 50,
        }
    }
}

/// Main-run settings for [`run_chain`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainConfig {
    /// Main-chain iterations (tuner iterations are extra).
    pub iterations: usize,
    /// Leading iterations discarded from the kept sample.
    pub burn_in: usize,
    /// Keep every `thin`-th post-burn-in state.
    pub thin: usize,
    pub seed: u64,
    pub tuner: TunerOptions,
}

impl Default for ChainConfig {
    fn default() -> Self {
        ChainConfig {
            iterations: 10_000,
            burn_in: 1_000,
            thin: 5,
            seed: 0,
            tuner: TunerOptions::default(),
        }
    }
}

impl ChainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return Err(Error::invalid("iterations", "must be at least 1"));
        }
        if self.iterations <= self.burn_in {
            return Err(Error::invalid(
                "burn_in",
                format!(
                    "iterations ({}) must exceed burn_in ({})",
                    self.iterations, self.burn_in
                ),
            ));
        }
        if self.thin == 0 {
            return Err(Error::invalid("thin", "must be at least 1"));
        }
        if self.tuner.block_size == 0 {
            return Err(Error::invalid("tuner.block_size", "must be at least 1"));
        }
        if self.tuner.max_blocks == 0 {
            return Err(Error::invalid("tuner.max_blocks", "must be at least 1"));
        }
        Ok(())
    }
}

/// The output of one MCMC run: kept posterior samples plus the bookkeeping
/// needed for diagnostics and reproducibility.
#[derive(Debug, Clone)]
pub struct Chain {
    /// Kept (post-burn-in, thinned) states in iteration order.
    pub samples: Vec<ThetaSample>,
    /// Final proposal variances (after adaptive tuning).
    pub proposal_variances: ProposalVariances,
    /// Main-run acceptance totals per parameter.
    pub acceptance_counts: AcceptanceCounts,
    /// Per-iteration acceptance flags for the whole main run, in sweep
    /// order; `acceptance_counts` is their column sum.
    pub accept_flags: Vec<PerParam<bool>>,
    /// Main-run iteration count.
    pub iterations: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub seed: u64,
    /// Rate the chain was conditioned on.
    pub r_f: f64,
    /// Upper support bound for `u*` the chain was run with.
    pub u_upper: f64,
    /// False if the adaptive tuner hit its block cap without freezing all
    /// four proposal variances.
    pub tuner_converged: bool,
    /// Blocks the tuner consumed.
    pub tuner_blocks: usize,
}

impl Chain {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Absolute main-run iteration index of kept sample `k`.
    pub fn kept_iteration(&self, k: usize) -> usize {
        self.burn_in + k * self.thin
    }

    /// Main-run acceptance rates per parameter.
    pub fn acceptance_rates(&self) -> PerParam<f64> {
        self.acceptance_counts.map(|&c| c as f64 / self.iterations as f64)
    }

    /// Wraps externally produced samples (e.g. re-read from a chain file) so
    /// they can drive propagation. Bookkeeping fields that only a live run
    /// can know (proposal variances, acceptance history) are zeroed.
    pub fn from_samples(samples: Vec<ThetaSample>, r_f: f64, u_upper: f64) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::Empty("chain samples"));
        }
        for (k, s) in samples.iter().enumerate() {
            s.validate(r_f, u_upper).map_err(|e| {
                Error::invalid("samples", format!("sample {k} invalid: {e}"))
            })?;
        }
        let n = samples.len();
        Ok(Chain {
            samples,
            proposal_variances: PerParam::default(),
            acceptance_counts: PerParam::default(),
            accept_flags: Vec::new(),
            iterations: n,
            burn_in: 0,
            thin: 1,
            seed: 0,
            r_f,
            u_upper,
            tuner_converged: true,
            tuner_blocks: 0,
        })
    }
}
