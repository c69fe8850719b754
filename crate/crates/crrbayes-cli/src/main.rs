//! Command-line front end for the `crrbayes` library.
//!
//! Five subcommands cover the pipeline end to end:
//!
//! * `calibrate` — run the posterior sampler on one window of returns and
//!   write the kept chain plus diagnostics,
//! * `price` — turn a stored chain into posterior option-price
//!   distributions,
//! * `roll` — run the rolling-window experiment over a daily price series,
//! * `baselines` — sample-means and bootstrap reference calibrations,
//! * `utility` — expected-utility quote selection.
//!
//! Every flag can also be set in a TOML file passed with `--config`, under
//! a table named after the subcommand (`[calibrate]`, `[roll]`, ...) with
//! keys spelled like the flags but with underscores. Explicit flags
//! override file values.
//!
//! Exit codes: 0 on success, 1 on a validation error (bad flags, bad
//! input files, impossible configurations), 2 on a numerical failure
//! (a computation that started from valid inputs but lost all precision).

use std::fs::{self, File};
use std::io::BufRead;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use crrbayes::baselines::{
    bootstrapped_means, bootstrapped_values, sample_means_calibration, BootstrapConfig,
    DEFAULT_REPLICATES,
};
use crrbayes::harness::{
    business_days_between, emit_report, load_series, per_period_rate, rolling_run, EmitOptions,
    PriceSeriesFile, RateBasis, RunConfig, SeriesRow,
};
use crrbayes::mcmc::{
    chain_diagnostics, read_theta_samples_csv, run_chain, write_chain_csv_path, Chain,
    ChainConfig, PriorConfig, ReturnSeries, DEFAULT_ACF_LAGS,
};
use crrbayes::propagate::{
    expected_xi_method, summarize, theta_method, xi_method, xi_method_bin_free, MethodTag,
    PriceDistribution, Summary, DEFAULT_BINS_PER_AXIS, DEFAULT_INNER_DRAWS, DEFAULT_OUTER_DRAWS,
};
use crrbayes::tree::{MarketFrame, OptionKind};
use crrbayes::utility::{
    normal_band_example, optimal_quote, uniform_grid, write_curve, ScalarPriceModel, UtilityKind,
    UtilitySpec, EXAMPLE_THETA_POINTS,
};
use crrbayes::{Error, Result, RngStream};

/// Default prior upper bound on gross up-moves, matching
/// [`PriorConfig::default_for`]; `price` needs it to revalidate a stored
/// chain.
const DEFAULT_U_UPPER: f64 = 2.0;

/// Default quote-grid resolution for the `utility` subcommand.
const DEFAULT_QUOTE_POINTS: usize = 2_001;

#[derive(Parser)]
#[command(
    name = "crrbayes",
    version,
    about = "Bayesian calibration of binomial option trees from historical returns"
)]
struct Cli {
    /// TOML configuration file; flags override its values.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Size of the global worker-thread pool (default: one per core).
    /// Results are identical for any value; this only trades latency for
    /// core usage.
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample the parameter posterior for one window of returns.
    Calibrate(CalibrateArgs),
    /// Price an option under a stored parameter chain.
    Price(PriceArgs),
    /// Run the rolling-window experiment over a daily price series.
    Roll(RollArgs),
    /// Sample-means and bootstrap reference calibrations.
    Baselines(BaselinesArgs),
    /// Select a quote by expected-utility maximization.
    Utility(UtilityArgs),
}

/// Implements "flags win, file fills the gaps" merging for an argument
/// struct whose fields are all `Option`s.
macro_rules! impl_merge {
    ($ty:ident { $($field:ident),* $(,)? }) => {
        impl $ty {
            fn merged(mut self, file: $ty) -> $ty {
                $( self.$field = self.$field.or(file.$field); )*
                self
            }
        }
    };
}

#[derive(Args, Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct CalibrateArgs {
    /// Daily price CSV with columns `date,close[,market_option_price,rate]`.
    #[arg(long, value_name = "FILE")]
    series: Option<PathBuf>,

    /// Calibrate on the last N returns of the series (default: all).
    #[arg(long, value_name = "N")]
    window: Option<usize>,

    /// Constant annualized risk-free rate; default is the `rate` column
    /// value on the final row of the window.
    #[arg(long, value_name = "RATE", allow_hyphen_values = true)]
    rate: Option<f64>,

    /// Day-count basis for the annualized rate (business_252).
    #[arg(long, value_name = "BASIS")]
    rate_basis: Option<RateBasis>,

    /// Main-chain iterations.
    #[arg(long, value_name = "N")]
    iterations: Option<usize>,

    /// Leading iterations discarded before keeping samples.
    #[arg(long, value_name = "N")]
    burn_in: Option<usize>,

    /// Keep every N-th post-burn-in state.
    #[arg(long, value_name = "N")]
    thin: Option<usize>,

    /// Sampler seed; every output is a pure function of inputs and seed.
    #[arg(long, value_name = "SEED")]
    seed: Option<u64>,

    /// Autocorrelation lags reported in the diagnostics (capped below the
    /// kept-sample count).
    #[arg(long, value_name = "N")]
    acf_lags: Option<usize>,

    /// Output directory for `chain.csv` and `diagnostics.json`.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

impl_merge!(CalibrateArgs {
    series, window, rate, rate_basis, iterations, burn_in, thin, seed, acf_lags, out,
});

#[derive(Args, Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct PriceArgs {
    /// Chain CSV written by `calibrate`.
    #[arg(long, value_name = "FILE")]
    chain: Option<PathBuf>,

    /// Per-period risk-free rate the chain was calibrated with (printed by
    /// `calibrate` and stored in its diagnostics.json).
    #[arg(long, value_name = "RATE", allow_hyphen_values = true)]
    r_f: Option<f64>,

    /// Prior upper bound on gross up-moves used at calibration.
    #[arg(long, value_name = "BOUND")]
    u_upper: Option<f64>,

    /// Spot price of the underlying.
    #[arg(long, value_name = "PRICE")]
    spot: Option<f64>,

    /// Option strike.
    #[arg(long, value_name = "PRICE")]
    strike: Option<f64>,

    /// Tree depth in periods.
    #[arg(long, value_name = "N")]
    periods: Option<u32>,

    /// Option kind: call or put.
    #[arg(long, value_name = "KIND")]
    kind: Option<OptionKind>,

    /// Comma-separated posterior methods: theta, xi, expected_xi.
    #[arg(long, value_delimiter = ',', value_name = "LIST")]
    methods: Option<Vec<MethodTag>>,

    /// Outer posterior draws L shared by all methods.
    #[arg(long, value_name = "N")]
    outer_draws: Option<usize>,

    /// Inner return draws per outer draw (theta method).
    #[arg(long, value_name = "N")]
    inner_draws: Option<usize>,

    /// Histogram resolution per axis (xi method).
    #[arg(long, value_name = "N")]
    bins_per_axis: Option<usize>,

    /// Price raw draws instead of binning them (xi method variant).
    #[arg(long, value_name = "BOOL", num_args = 0..=1, default_missing_value = "true")]
    bin_free: Option<bool>,

    /// Seed for the propagation draws.
    #[arg(long, value_name = "SEED")]
    seed: Option<u64>,

    /// If set, write `<method>_samples.csv` per method into this directory.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

impl_merge!(PriceArgs {
    chain, r_f, u_upper, spot, strike, periods, kind, methods, outer_draws, inner_draws,
    bins_per_axis, bin_free, seed, out,
});

#[derive(Args, Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct RollArgs {
    /// Daily price CSV with columns `date,close[,market_option_price,rate]`.
    #[arg(long, value_name = "FILE")]
    series: Option<PathBuf>,

    /// Option strike.
    #[arg(long, value_name = "PRICE")]
    strike: Option<f64>,

    /// Option maturity (YYYY-MM-DD); evaluation stops the business day
    /// before.
    #[arg(long, value_name = "DATE")]
    maturity: Option<NaiveDate>,

    /// Trailing-window length in returns.
    #[arg(long, value_name = "N")]
    window: Option<usize>,

    /// Comma-separated methods: theta, xi, expected_xi, sm, bm, bv.
    #[arg(long, value_delimiter = ',', value_name = "LIST")]
    methods: Option<Vec<MethodTag>>,

    /// Main-chain iterations per date.
    #[arg(long, value_name = "N")]
    iterations: Option<usize>,

    /// Leading iterations discarded before keeping samples.
    #[arg(long, value_name = "N")]
    burn_in: Option<usize>,

    /// Keep every N-th post-burn-in state.
    #[arg(long, value_name = "N")]
    thin: Option<usize>,

    /// Outer posterior draws L shared by the posterior methods.
    #[arg(long, value_name = "N")]
    outer_draws: Option<usize>,

    /// Inner return draws per outer draw (theta method).
    #[arg(long, value_name = "N")]
    inner_draws: Option<usize>,

    /// Histogram resolution per axis (xi method).
    #[arg(long, value_name = "N")]
    bins_per_axis: Option<usize>,

    /// Price raw draws instead of binning them (xi method variant).
    #[arg(long, value_name = "BOOL", num_args = 0..=1, default_missing_value = "true")]
    bin_free: Option<bool>,

    /// Bootstrap replicates for the bm/bv baselines.
    #[arg(long, value_name = "N")]
    replicates: Option<usize>,

    /// Run seed; per-date seeds are derived from it, so results do not
    /// depend on which dates share a run.
    #[arg(long, value_name = "SEED")]
    seed: Option<u64>,

    /// Constant annualized risk-free rate used where the series has no
    /// `rate` value.
    #[arg(long, value_name = "RATE", allow_hyphen_values = true)]
    rate: Option<f64>,

    /// Day-count basis for annualized rates (business_252).
    #[arg(long, value_name = "BASIS")]
    rate_basis: Option<RateBasis>,

    /// Option kind: call or put.
    #[arg(long, value_name = "KIND")]
    kind: Option<OptionKind>,

    /// Also write per-date price-sample files.
    #[arg(long, value_name = "BOOL", num_args = 0..=1, default_missing_value = "true")]
    keep_samples: Option<bool>,

    /// Output directory for the per-method time series and the run
    /// summary.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

impl_merge!(RollArgs {
    series, strike, maturity, window, methods, iterations, burn_in, thin, outer_draws,
    inner_draws, bins_per_axis, bin_free, replicates, seed, rate, rate_basis, kind,
    keep_samples, out,
});

#[derive(Args, Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct BaselinesArgs {
    /// Daily price CSV with columns `date,close[,market_option_price,rate]`.
    #[arg(long, value_name = "FILE")]
    series: Option<PathBuf>,

    /// Calibrate on the last N returns of the series (default: all).
    #[arg(long, value_name = "N")]
    window: Option<usize>,

    /// Option strike.
    #[arg(long, value_name = "PRICE")]
    strike: Option<f64>,

    /// Spot price (default: the final close of the window).
    #[arg(long, value_name = "PRICE")]
    spot: Option<f64>,

    /// Tree depth in periods; overrides --maturity.
    #[arg(long, value_name = "N")]
    periods: Option<u32>,

    /// Option maturity (YYYY-MM-DD); the depth is the business-day count
    /// from the final window date.
    #[arg(long, value_name = "DATE")]
    maturity: Option<NaiveDate>,

    /// Option kind: call or put.
    #[arg(long, value_name = "KIND")]
    kind: Option<OptionKind>,

    /// Constant annualized risk-free rate; default is the `rate` column
    /// value on the final row of the window.
    #[arg(long, value_name = "RATE", allow_hyphen_values = true)]
    rate: Option<f64>,

    /// Day-count basis for the annualized rate (business_252).
    #[arg(long, value_name = "BASIS")]
    rate_basis: Option<RateBasis>,

    /// Comma-separated baselines: sm, bm, bv.
    #[arg(long, value_delimiter = ',', value_name = "LIST")]
    methods: Option<Vec<MethodTag>>,

    /// Bootstrap replicates for bm/bv.
    #[arg(long, value_name = "N")]
    replicates: Option<usize>,

    /// Seed for the bootstrap resampling.
    #[arg(long, value_name = "SEED")]
    seed: Option<u64>,

    /// If set, write `<method>_samples.csv` per method into this directory.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

impl_merge!(BaselinesArgs {
    series, window, strike, spot, periods, maturity, kind, rate, rate_basis, methods,
    replicates, seed, out,
});

#[derive(Args, Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct UtilityArgs {
    /// Price-sample file (one value per line, optional `price` header),
    /// e.g. written by `price` or `roll`; default is the built-in analytic
    /// example.
    #[arg(long, value_name = "FILE")]
    prices: Option<PathBuf>,

    /// Grid resolution of the built-in example prior.
    #[arg(long, value_name = "N")]
    points: Option<usize>,

    /// Utility form: quadratic, zero_one, or volatility_threshold.
    #[arg(long, value_name = "KIND")]
    utility: Option<UtilityKind>,

    /// Volatility gate for the volatility_threshold utility.
    #[arg(long, value_name = "SD")]
    threshold: Option<f64>,

    /// Probability of selling at the quote.
    #[arg(long, value_name = "P")]
    sell_probability: Option<f64>,

    /// Lowest candidate quote (default: smallest model price).
    #[arg(long, value_name = "Q", allow_hyphen_values = true)]
    quote_min: Option<f64>,

    /// Highest candidate quote (default: largest model price).
    #[arg(long, value_name = "Q", allow_hyphen_values = true)]
    quote_max: Option<f64>,

    /// Number of candidate quotes.
    #[arg(long, value_name = "N")]
    quote_points: Option<usize>,

    /// Write the full (quote, expected utility) curve to this CSV file.
    #[arg(long, value_name = "FILE")]
    curve: Option<PathBuf>,
}

impl_merge!(UtilityArgs {
    prices, points, utility, threshold, sell_probability, quote_min, quote_max, quote_points,
    curve,
});

/// Per-subcommand tables of a `--config` TOML file.
#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct FileConfig {
    calibrate: CalibrateArgs,
    price: PriceArgs,
    roll: RollArgs,
    baselines: BaselinesArgs,
    utility: UtilityArgs,
}

impl FileConfig {
    fn load(path: Option<&Path>) -> Result<FileConfig> {
        let Some(path) = path else {
            return Ok(FileConfig::default());
        };
        let text = fs::read_to_string(path)?;
        toml::from_str(&text)
            .map_err(|e| Error::invalid("config", format!("{}: {e}", path.display())))
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // --help and --version surface as "errors" here; both are
            // successes. Anything clap routes to stderr is a validation
            // failure.
            let code = u8::from(err.use_stderr());
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(if err.is_numerical() { 2 } else { 1 })
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    if let Some(threads) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| Error::invalid("threads", e.to_string()))?;
    }
    let file = FileConfig::load(cli.config.as_deref())?;
    match cli.command {
        Command::Calibrate(args) => calibrate_cmd(args.merged(file.calibrate)),
        Command::Price(args) => price_cmd(args.merged(file.price)),
        Command::Roll(args) => roll_cmd(args.merged(file.roll)),
        Command::Baselines(args) => baselines_cmd(args.merged(file.baselines)),
        Command::Utility(args) => utility_cmd(args.merged(file.utility)),
    }
}

/// Rejects a still-unset value after flag/file merging.
fn require<T>(value: Option<T>, flag: &'static str) -> Result<T> {
    value.ok_or_else(|| {
        Error::invalid(flag, "required; pass the flag or set it in the config file")
    })
}

/// A calibration window cut from the tail of a daily price series.
struct Window<'a> {
    returns: ReturnSeries,
    /// Per-period risk-free rate backing `returns`.
    r_f: f64,
    /// Row the window ends on (the quote date).
    last: &'a SeriesRow,
}

/// Cuts the last `window` returns (default: all) out of `series` and
/// resolves the per-period rate from the `--rate` flag or the final row's
/// `rate` column.
fn cut_window(
    series: &PriceSeriesFile,
    window: Option<usize>,
    rate: Option<f64>,
    basis: RateBasis,
) -> Result<Window<'_>> {
    let all = series.gross_returns();
    if all.is_empty() {
        return Err(Error::invalid(
            "series",
            "need at least two rows to form a return",
        ));
    }
    let take = window.unwrap_or(all.len());
    if take == 0 || take > all.len() {
        return Err(Error::invalid(
            "window",
            format!("need between 1 and {} returns, got {take}", all.len()),
        ));
    }
    let last = series.rows.last().expect("series has rows");
    let annualized = rate.or(last.rate).ok_or_else(|| {
        Error::invalid(
            "rate",
            "series has no `rate` value on the final row; pass --rate",
        )
    })?;
    let r_f = per_period_rate(annualized, basis)?;
    let returns = ReturnSeries::new(all[all.len() - take..].to_vec(), r_f)?;
    Ok(Window { returns, r_f, last })
}

fn summary_header() -> String {
    format!(
        "{:<12} {:>8} {:>12} {:>12} {:>12} {:>12} {:>12} {:>12}",
        "method", "n", "mean", "sd", "median", "p0.5", "p99.5", "width"
    )
}

fn summary_row(s: &Summary) -> String {
    format!(
        "{:<12} {:>8} {:>12.6} {:>12.6} {:>12.6} {:>12.6} {:>12.6} {:>12.6}",
        s.method.to_string(),
        s.n,
        s.mean,
        s.sd,
        s.median,
        s.ci_lower,
        s.ci_upper,
        s.width
    )
}

/// Writes one `<method>_samples.csv` into `dir` and reports the path.
fn write_sample_file(dir: &Path, dist: &PriceDistribution) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(format!("{}_samples.csv", dist.method_tag));
    dist.write_samples(&mut File::create(&path)?)?;
    Ok(path)
}

fn calibrate_cmd(args: CalibrateArgs) -> Result<()> {
    let series = load_series(require(args.series, "series")?)?;
    let basis = args.rate_basis.unwrap_or_default();
    let win = cut_window(&series, args.window, args.rate, basis)?;
    let prior = PriorConfig::default_for(&win.returns);
    let mut config = ChainConfig::default();
    if let Some(v) = args.iterations {
        config.iterations = v;
    }
    if let Some(v) = args.burn_in {
        config.burn_in = v;
    }
    if let Some(v) = args.thin {
        config.thin = v;
    }
    if let Some(v) = args.seed {
        config.seed = v;
    }
    let chain = run_chain(&win.returns, &prior, &config)?;

    // Cap the lag window below the kept length so short smoke-test chains
    // still produce diagnostics.
    let lags = args
        .acf_lags
        .unwrap_or(DEFAULT_ACF_LAGS)
        .min(chain.len().saturating_sub(1));
    let diag = chain_diagnostics(&chain, lags)?;

    let out = args.out.unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&out)?;
    let chain_path = out.join("chain.csv");
    write_chain_csv_path(&chain, &chain_path)?;
    let diag_path = out.join("diagnostics.json");
    let payload = serde_json::json!({
        "window_returns": win.returns.len(),
        "window_end": win.last.date,
        "r_f": win.r_f,
        "u_upper": chain.u_upper,
        "iterations": chain.iterations,
        "burn_in": chain.burn_in,
        "thin": chain.thin,
        "seed": chain.seed,
        "diagnostics": diag,
    });
    fs::write(&diag_path, serde_json::to_string_pretty(&payload)?)?;

    println!(
        "calibrated {} returns ({} up, {} down) ending {}",
        win.returns.len(),
        win.returns.ups().len(),
        win.returns.downs().len(),
        win.last.date
    );
    // Full precision: `price --r-f` must reuse this value exactly.
    println!("per-period r_f {}", win.r_f);
    println!(
        "kept {} samples ({} iterations, burn-in {}, thin {}, seed {})",
        chain.len(),
        chain.iterations,
        chain.burn_in,
        chain.thin,
        chain.seed
    );
    let rates = &diag.acceptance_rates;
    println!(
        "acceptance rates: u* {:.3}  d* {:.3}  sigma2_u {:.3}  sigma2_d {:.3}  (tuner converged: {})",
        rates.u_star, rates.d_star, rates.sigma2_u, rates.sigma2_d, diag.tuner_converged
    );
    for (name, s) in &diag.series {
        println!("posterior {:<9} mean {:>12.6e}  sd {:>12.6e}", name, s.mean, s.sd);
    }
    println!("wrote {}", chain_path.display());
    println!("wrote {}", diag_path.display());
    Ok(())
}

fn price_cmd(args: PriceArgs) -> Result<()> {
    let chain_path = require(args.chain, "chain")?;
    let samples = read_theta_samples_csv(&chain_path)?;
    let r_f = require(args.r_f, "r-f")?;
    let chain = Chain::from_samples(samples, r_f, args.u_upper.unwrap_or(DEFAULT_U_UPPER))?;
    let frame = MarketFrame::new(
        require(args.spot, "spot")?,
        require(args.strike, "strike")?,
        require(args.periods, "periods")?,
        r_f,
        args.kind.unwrap_or(OptionKind::EuropeanCall),
    )?;
    let methods = args
        .methods
        .unwrap_or_else(|| vec![MethodTag::Theta, MethodTag::Xi, MethodTag::ExpectedXi]);
    let l = args.outer_draws.unwrap_or(DEFAULT_OUTER_DRAWS);
    let m = args.inner_draws.unwrap_or(DEFAULT_INNER_DRAWS);
    let bins = args.bins_per_axis.unwrap_or(DEFAULT_BINS_PER_AXIS);
    let bin_free = args.bin_free.unwrap_or(false);
    let mut rng = RngStream::from_seed(args.seed.unwrap_or(0));

    println!("{}", summary_header());
    let mut written = Vec::new();
    for method in methods {
        let dist = match method {
            MethodTag::Theta => theta_method(&chain, &frame, l, m, &mut rng)?,
            MethodTag::Xi if bin_free => xi_method_bin_free(&chain, &frame, l, &mut rng)?,
            MethodTag::Xi => xi_method(&chain, &frame, l, bins, &mut rng)?.1,
            MethodTag::ExpectedXi => expected_xi_method(&chain, &frame, l, &mut rng)?,
            MethodTag::Sm | MethodTag::Bm | MethodTag::Bv => {
                return Err(Error::invalid(
                    "methods",
                    format!(
                        "`{method}` needs the raw return window; use the `baselines` subcommand"
                    ),
                ));
            }
        };
        println!("{}", summary_row(&summarize(&dist, &[])?));
        if let Some(dir) = &args.out {
            written.push(write_sample_file(dir, &dist)?);
        }
    }
    for path in &written {
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn roll_cmd(args: RollArgs) -> Result<()> {
    let series = load_series(require(args.series, "series")?)?;
    let mut config = RunConfig::new(
        require(args.strike, "strike")?,
        require(args.maturity, "maturity")?,
    );
    if let Some(v) = args.window {
        config.window = v;
    }
    if let Some(v) = args.methods {
        config.methods = v;
    }
    if let Some(v) = args.iterations {
        config.chain.iterations = v;
    }
    if let Some(v) = args.burn_in {
        config.chain.burn_in = v;
    }
    if let Some(v) = args.thin {
        config.chain.thin = v;
    }
    if let Some(v) = args.outer_draws {
        config.outer_draws = v;
    }
    if let Some(v) = args.inner_draws {
        config.inner_draws = v;
    }
    if let Some(v) = args.bins_per_axis {
        config.bins_per_axis = v;
    }
    if let Some(v) = args.bin_free {
        config.bin_free = v;
    }
    if let Some(v) = args.replicates {
        config.replicates = v;
    }
    if let Some(v) = args.seed {
        config.seed = v;
    }
    config.rate = args.rate;
    if let Some(v) = args.rate_basis {
        config.rate_basis = v;
    }
    if let Some(v) = args.kind {
        config.option_kind = v;
    }
    if let Some(v) = args.keep_samples {
        config.keep_samples = v;
    }
    let out = args.out.unwrap_or_else(|| PathBuf::from("out"));

    let report = rolling_run(&series, &config)?;
    let written = emit_report(
        &report,
        &out,
        &EmitOptions {
            write_samples: config.keep_samples,
        },
    )?;

    println!(
        "evaluated {} dates ({} skipped)",
        report.entries.len(),
        report.gaps.len()
    );
    for gap in &report.gaps {
        println!("skipped {}: {}", gap.date, gap.reason);
    }
    println!(
        "{:<12} {:>12} {:>12} {:>12}",
        "method", "mean", "median", "width"
    );
    for row in report.table_summary() {
        println!(
            "{:<12} {:>12.6} {:>12.6} {:>12.6}",
            row.method.to_string(),
            row.mean,
            row.median,
            row.width
        );
    }
    for path in &written {
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn baselines_cmd(args: BaselinesArgs) -> Result<()> {
    let series = load_series(require(args.series, "series")?)?;
    let basis = args.rate_basis.unwrap_or_default();
    let win = cut_window(&series, args.window, args.rate, basis)?;
    let periods = match (args.periods, args.maturity) {
        (Some(p), _) => p,
        (None, Some(m)) => {
            let p = business_days_between(win.last.date, m);
            if p == 0 {
                return Err(Error::invalid(
                    "maturity",
                    format!("no business days between {} and {m}", win.last.date),
                ));
            }
            p
        }
        (None, None) => return Err(Error::invalid("periods", "pass --periods or --maturity")),
    };
    let frame = MarketFrame::new(
        args.spot.unwrap_or(win.last.close),
        require(args.strike, "strike")?,
        periods,
        win.r_f,
        args.kind.unwrap_or(OptionKind::EuropeanCall),
    )?;
    let cfg = BootstrapConfig {
        replicates: args.replicates.unwrap_or(DEFAULT_REPLICATES),
        seed: args.seed.unwrap_or(0),
    };
    let methods = args
        .methods
        .unwrap_or_else(|| vec![MethodTag::Sm, MethodTag::Bm, MethodTag::Bv]);

    println!("{}", summary_header());
    let mut written = Vec::new();
    for method in methods {
        let dist = match method {
            MethodTag::Sm => PriceDistribution::new(
                vec![sample_means_calibration(&win.returns, &frame)?],
                MethodTag::Sm,
            )?,
            MethodTag::Bm => bootstrapped_means(&win.returns, &frame, &cfg)?,
            MethodTag::Bv => bootstrapped_values(&win.returns, &frame, &cfg)?,
            MethodTag::Theta | MethodTag::Xi | MethodTag::ExpectedXi => {
                return Err(Error::invalid(
                    "methods",
                    format!("`{method}` needs a posterior chain; use `calibrate` and `price`"),
                ));
            }
        };
        println!("{}", summary_row(&summarize(&dist, &[])?));
        if let Some(dir) = &args.out {
            written.push(write_sample_file(dir, &dist)?);
        }
    }
    for path in &written {
        println!("wrote {}", path.display());
    }
    Ok(())
}

/// Reads a one-column price file: a float per line, with an optional
/// `price` header as written by the `price` and `roll` subcommands.
fn read_price_file(path: &Path) -> Result<Vec<f64>> {
    let file = File::open(path)?;
    let mut prices = Vec::new();
    for (idx, line) in std::io::BufReader::new(file).lines().enumerate() {
        let line = line?;
        let text = line.trim();
        if text.is_empty() || (idx == 0 && text == "price") {
            continue;
        }
        let value: f64 = text.parse().map_err(|_| Error::Series {
            path: path.to_path_buf(),
            line: (idx + 1) as u64,
            reason: format!("expected one price per line, got `{text}`"),
        })?;
        prices.push(value);
    }
    Ok(prices)
}

fn utility_cmd(args: UtilityArgs) -> Result<()> {
    let model = match &args.prices {
        Some(path) => ScalarPriceModel::from_price_samples(read_price_file(path)?)?,
        None => normal_band_example(args.points.unwrap_or(EXAMPLE_THETA_POINTS))?,
    };
    let util = UtilitySpec {
        kind: args.utility.unwrap_or(UtilityKind::Quadratic),
        threshold: args.threshold,
        sell_probability: args.sell_probability.unwrap_or(0.5),
    };
    // Quotes outside the model's price range are never optimal, so the
    // price extremes are the natural default search interval.
    let lo = args.quote_min.unwrap_or_else(|| {
        model.prices().iter().copied().fold(f64::INFINITY, f64::min)
    });
    let hi = args.quote_max.unwrap_or_else(|| {
        model.prices().iter().copied().fold(f64::NEG_INFINITY, f64::max)
    });
    let grid = uniform_grid(lo, hi, args.quote_points.unwrap_or(DEFAULT_QUOTE_POINTS))?;
    let (best, curve) = optimal_quote(&model, &util, &grid)?;
    let best_eu = curve
        .iter()
        .find(|(q, _)| *q == best)
        .map(|(_, eu)| *eu)
        .expect("best quote comes from the curve");

    println!("prior mean price {:.6}", model.prior_mean_price());
    println!("prior price sd   {:.6}", model.price_sd());
    println!("optimal quote    {:.6} (expected utility {:.6})", best, best_eu);
    if let Some(path) = &args.curve {
        write_curve(&curve, &mut File::create(path)?)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}
