//! The rolling-window experiment driver and its configuration.
//!
//! For every analyzable business day in a daily price series, the harness
//! calibrates the posterior on the trailing window of gross returns, runs
//! the selected pricing methods with the remaining business days to
//! maturity as the tree depth, and collects per-date summaries into a
//! [`RollingReport`]. Days whose window lacks an up or a down observation
//! are recorded as gaps instead of aborting the run.
//!
//! Determinism: each date's seed is derived from `(run seed, date)`, and
//! dates are independent parallel jobs merged in chronological order, so
//! reports are byte-identical regardless of the worker-pool size.

pub mod report;
pub mod series;

pub use report::{emit_report, EmitOptions};
pub use series::{load_series, PriceSeriesFile, SeriesRow};

use chrono::{Datelike, NaiveDate};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{
    bootstrapped_means, bootstrapped_values, sample_means_calibration, BootstrapConfig,
};
use crate::error::{Error, Result};
use crate::mcmc::{run_chain, Chain, ChainConfig, PriorConfig, ReturnSeries};
use crate::propagate::{
    expected_xi_method, summarize, theta_method, xi_method, xi_method_bin_free, MethodTag,
    PriceDistribution, Summary, DEFAULT_BINS_PER_AXIS, DEFAULT_INNER_DRAWS, DEFAULT_OUTER_DRAWS,
};
use crate::rng::{domains, mix, RngStream};
use crate::tree::{MarketFrame, OptionKind};

/// Default trailing-window length in business days.
pub const DEFAULT_WINDOW: usize = 252;

/// Day-count convention for annualized-to-per-period rate conversion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum RateBasis {
    /// 252 business days per year, geometric compounding.
    #[default]
    Business252,
}

impl std::str::FromStr for RateBasis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "business_252" | "business-252" | "business252" => Ok(RateBasis::Business252),
            other => Err(Error::invalid(
                "basis",
                format!("unknown day-count basis `{other}`; expected business_252"),
            )),
        }
    }
}

/// Converts an annualized rate quote to the per-period (per business day)
/// rate used by the tree and the return partition.
pub fn per_period_rate(annualized: f64, basis: RateBasis) -> Result<f64> {
    if !(annualized.is_finite() && annualized >= -1.0) {
        return Err(Error::invalid(
            "annualized",
            format!("must be finite and at least -1, got {annualized}"),
        ));
    }
    match basis {
        RateBasis::Business252 => Ok((1.0 + annualized).powf(1.0 / 252.0) - 1.0),
    }
}

/// Counts business days (Mon–Fri) in the half-open calendar interval
/// `(from, to]`.
pub fn business_days_between(from: NaiveDate, to: NaiveDate) -> u32 {
    if to <= from {
        return 0;
    }
    let mut count = 0;
    let mut day = from.succ_opt().expect("date overflow");
    loop {
        if day.weekday().number_from_monday() <= 5 {
            count += 1;
        }
        if day == to {
            break;
        }
        day = day.succ_opt().expect("date overflow");
    }
    count
}

/// Full configuration of a rolling run.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    /// Trailing-window length in returns (business days).
    pub window: usize,
    /// Option strike.
    pub strike: f64,
    /// Option maturity (calendar day; tree depth counts business days).
    pub maturity: NaiveDate,
    /// Methods to run per date, in execution order.
    pub methods: Vec<MethodTag>,
    /// MCMC settings; the seed field is replaced by the per-date seed.
    pub chain: ChainConfig,
    /// Outer draw count `L` shared by the three posterior methods.
    pub outer_draws: usize,
    /// Inner `ξ | θ` draws per outer draw (θ method).
    pub inner_draws: usize,
    /// Histogram resolution per axis (ξ method).
    pub bins_per_axis: usize,
    /// Price raw ξ draws instead of binning (ξ method variant).
    pub bin_free: bool,
    /// Bootstrap replicates (BM/BV).
    pub replicates: usize,
    /// Run seed; per-date seeds are derived from it.
    pub seed: u64,
    /// Constant annualized rate used where the series has no `rate`
    /// column value.
    pub rate: Option<f64>,
    /// Day-count basis for rate conversion.
    pub rate_basis: RateBasis,
    /// Payoff type.
    pub option_kind: OptionKind,
    /// Retain per-date price samples in the report (for sample-file
    /// emission).
    pub keep_samples: bool,
}

impl RunConfig {
    /// A call-option configuration with library defaults everywhere but
    /// the contract terms.
    pub fn new(strike: f64, maturity: NaiveDate) -> Self {
        RunConfig {
            window: DEFAULT_WINDOW,
            strike,
            maturity,
            methods: MethodTag::ALL.to_vec(),
            chain: ChainConfig::default(),
            outer_draws: DEFAULT_OUTER_DRAWS,
            inner_draws: DEFAULT_INNER_DRAWS,
            bins_per_axis: DEFAULT_BINS_PER_AXIS,
            bin_free: false,
            replicates: crate::baselines::DEFAULT_REPLICATES,
            seed: 0,
            rate: None,
            rate_basis: RateBasis::Business252,
            option_kind: OptionKind::EuropeanCall,
            keep_samples: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.window < 2 {
            return Err(Error::invalid("window", "must be at least 2 returns"));
        }
        if !(self.strike.is_finite() && self.strike > 0.0) {
            return Err(Error::invalid(
                "strike",
                format!("must be positive, got {}", self.strike),
            ));
        }
        self.chain.validate()?;
        for (name, v) in [
            ("outer_draws", self.outer_draws),
            ("inner_draws", self.inner_draws),
            ("replicates", self.replicates),
        ] {
            if v == 0 {
                return Err(Error::invalid(name, "must be at least 1"));
            }
        }
        if self.bins_per_axis < 2 {
            return Err(Error::invalid("bins_per_axis", "must be at least 2"));
        }
        if let Some(r) = self.rate {
            if !(r.is_finite() && r >= -1.0) {
                return Err(Error::invalid(
                    "rate",
                    format!("must be finite and at least -1, got {r}"),
                ));
            }
        }
        Ok(())
    }
}

/// Result of one method on one date.
#[derive(Debug, Clone, Serialize)]
pub struct MethodResult {
    pub method: MethodTag,
    pub summary: Summary,
    /// Raw price samples, kept only when the run was configured to retain
    /// them.
    pub samples: Option<Vec<f64>>,
}

/// All method results for one evaluation date.
#[derive(Debug, Clone, Serialize)]
pub struct DateResult {
    pub date: NaiveDate,
    /// Business days to maturity (the tree depth used).
    pub periods: u32,
    /// Closing price on the date (the tree's spot).
    pub spot: f64,
    /// Market option price from the input file, if present.
    pub market: Option<f64>,
    /// One entry per configured method, in configuration order.
    pub results: Vec<MethodResult>,
}

/// A date skipped because its window could not be calibrated.
#[derive(Debug, Clone, Serialize)]
pub struct GapEntry {
    pub date: NaiveDate,
    pub reason: String,
}

/// Per-method averages over all evaluation dates.
#[derive(Debug, Clone, Serialize)]
pub struct TableRow {
    pub method: MethodTag,
    /// Average posterior mean.
    pub mean: f64,
    /// Average posterior median.
    pub median: f64,
    /// Average 99% credible-interval width.
    pub width: f64,
}

/// Output of [`rolling_run`].
#[derive(Debug, Clone, Serialize)]
pub struct RollingReport {
    /// Methods that were run, in configuration order.
    pub methods: Vec<MethodTag>,
    /// Per-date results in chronological order.
    pub entries: Vec<DateResult>,
    /// Dates skipped due to degenerate windows.
    pub gaps: Vec<GapEntry>,
}

impl RollingReport {
    /// Per-method averages over dates (empty when there are no entries).
    pub fn table_summary(&self) -> Vec<TableRow> {
        if self.entries.is_empty() {
            return Vec::new();
        }
        self.methods
            .iter()
            .map(|&method| {
                let summaries: Vec<&Summary> = self
                    .entries
                    .iter()
                    .flat_map(|e| e.results.iter())
                    .filter(|r| r.method == method)
                    .map(|r| &r.summary)
                    .collect();
                let n = summaries.len() as f64;
                TableRow {
                    method,
                    mean: summaries.iter().map(|s| s.mean).sum::<f64>() / n,
                    median: summaries.iter().map(|s| s.median).sum::<f64>() / n,
                    width: summaries.iter().map(|s| s.width).sum::<f64>() / n,
                }
            })
            .collect()
    }
}

/// Stable per-date seed: mixes the run seed with the date's day number.
fn date_seed(seed: u64, date: NaiveDate) -> u64 {
    mix(seed, domains::ROLLING_DATE, date.num_days_from_ce() as i64 as u64)
}

enum DateOutcome {
    Entry(Box<DateResult>),
    Gap(GapEntry),
}

fn needs_chain(methods: &[MethodTag]) -> bool {
    methods
        .iter()
        .any(|m| matches!(m, MethodTag::Theta | MethodTag::Xi | MethodTag::ExpectedXi))
}

fn run_date(
    series: &PriceSeriesFile,
    returns: &[f64],
    t: usize,
    periods: u32,
    config: &RunConfig,
) -> Result<DateOutcome> {
    let row = &series.rows[t];
    let annualized = row.rate.or(config.rate).ok_or_else(|| {
        Error::invalid(
            "rate",
            format!(
                "no risk-free rate available for {}: the series has no rate \
                 column value and no constant rate was configured",
                row.date
            ),
        )
    })?;
    let r_f = per_period_rate(annualized, config.rate_basis)?;
    let window_returns = returns[t - config.window..t].to_vec();
    let data = ReturnSeries::new(window_returns, r_f)?;
    if data.ups().is_empty() || data.downs().is_empty() {
        return Ok(DateOutcome::Gap(GapEntry {
            date: row.date,
            reason: format!(
                "degenerate window: {} ups, {} downs",
                data.ups().len(),
                data.downs().len()
            ),
        }));
    }
    let frame = MarketFrame::new(row.close, config.strike, periods, r_f, config.option_kind)?;
    let seed = date_seed(config.seed, row.date);

    let chain: Option<Chain> = if needs_chain(&config.methods) {
        let chain_config = ChainConfig {
            seed,
            ..config.chain
        };
        Some(run_chain(&data, &PriorConfig::default_for(&data), &chain_config)?)
    } else {
        None
    };
    let mut method_rng = RngStream::from_seed(seed);

    let mut results = Vec::with_capacity(config.methods.len());
    for &method in &config.methods {
        let dist: PriceDistribution = match method {
            MethodTag::Theta => theta_method(
                chain.as_ref().expect("chain exists"),
                &frame,
                config.outer_draws,
                config.inner_draws,
                &mut method_rng,
            )?,
            MethodTag::Xi => {
                let chain = chain.as_ref().expect("chain exists");
                if config.bin_free {
                    xi_method_bin_free(chain, &frame, config.outer_draws, &mut method_rng)?
                } else {
                    xi_method(
                        chain,
                        &frame,
                        config.outer_draws,
                        config.bins_per_axis,
                        &mut method_rng,
                    )?
                    .1
                }
            }
            MethodTag::ExpectedXi => expected_xi_method(
                chain.as_ref().expect("chain exists"),
                &frame,
                config.outer_draws,
                &mut method_rng,
            )?,
            MethodTag::Sm => PriceDistribution::new(
                vec![sample_means_calibration(&data, &frame)?],
                MethodTag::Sm,
            )?,
            MethodTag::Bm => {
                let cfg = BootstrapConfig {
                    replicates: config.replicates,
                    seed,
                };
                bootstrapped_means(&data, &frame, &cfg)?
            }
            MethodTag::Bv => {
                let cfg = BootstrapConfig {
                    replicates: config.replicates,
                    seed,
                };
                bootstrapped_values(&data, &frame, &cfg)?
            }
        };
        let summary = summarize(&dist, &[])?;
        results.push(MethodResult {
            method,
            summary,
            samples: config.keep_samples.then_some(dist.samples),
        });
    }
    Ok(DateOutcome::Entry(Box::new(DateResult {
        date: row.date,
        periods,
        spot: row.close,
        market: row.market_option_price,
        results,
    })))
}

/// Runs the full rolling experiment.
///
/// Evaluation dates are the series dates with a full trailing window that
/// fall strictly before `config.maturity` in business time. Dates whose
/// window has no up or no down observation become [`GapEntry`] records;
/// any other failure aborts the run.
pub fn rolling_run(series: &PriceSeriesFile, config: &RunConfig) -> Result<RollingReport> {
    config.validate()?;
    series.validate()?;
    if series.len() <= config.window {
        return Err(Error::invalid(
            "series",
            format!(
                "need more than window = {} rows to form a trailing-window \
                 return set, got {}",
                config.window,
                series.len()
            ),
        ));
    }
    let first_date = series.rows[config.window].date;
    if config.maturity <= first_date {
        return Err(Error::invalid(
            "maturity",
            format!(
                "maturity {} must fall after the first analyzable date {first_date}",
                config.maturity
            ),
        ));
    }
    let returns = series.gross_returns();
    // Return i lands on rows[i + 1], so the window ending at rows[t] is
    // returns[t - window .. t].
    let jobs: Vec<(usize, u32)> = (config.window..series.len())
        .filter(|&t| series.rows[t].date < config.maturity)
        .map(|t| (t, business_days_between(series.rows[t].date, config.maturity)))
        .filter(|&(_, periods)| periods >= 1)
        .collect();

    let outcomes: Vec<Result<DateOutcome>> = jobs
        .par_iter()
        .map(|&(t, periods)| run_date(series, &returns, t, periods, config))
        .collect();

    let mut entries = Vec::new();
    let mut gaps = Vec::new();
    for outcome in outcomes {
        match outcome? {
            DateOutcome::Entry(e) => entries.push(*e),
            DateOutcome::Gap(g) => gaps.push(g),
        }
    }
    Ok(RollingReport {
        methods: config.methods.clone(),
        entries,
        gaps,
    })
}
