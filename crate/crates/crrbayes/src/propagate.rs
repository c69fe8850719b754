//! Propagation of posterior parameter uncertainty into option prices.
//!
//! Three schemes turn a [`Chain`] into a posterior distribution over model
//! prices:
//!
//! * **θ method** — draw a parameter vector θ uniformly from the chain,
//!   average the tree price over fresh `(u, d)` draws from the mixture
//!   components given θ, and record that average; the samples estimate the
//!   distribution of the θ-conditional price.
//! * **ξ method** — draw `(u, d)` pairs marginally (θ first, then ξ | θ),
//!   histogram them on a two-dimensional grid, then resample grid centers
//!   by mass and price one tree per resampled center. The samples describe
//!   the price unconditionally of θ. A bin-free variant prices the raw
//!   draws directly and is used to check that binning is consistent.
//! * **expected-ξ method** — price each drawn θ at the conditional means
//!   `(E(u | θ), E(d | θ))` of the truncated components, collapsing
//!   within-θ spread and isolating parameter uncertainty.
//!
//! All three agree exactly when every component variance collapses to a
//! point mass. Sampling is parallelized over independent per-index
//! substreams, so results are identical at any thread-pool size.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mcmc::{Chain, ThetaSample};
use crate::rng::{domains, RngStream};
use crate::stats::{TruncatedMoments, TruncatedNormal};
use crate::tree::{price_european, MarketFrame, XiPair};

use rand::RngExt;

/// Default number of outer draws (`L`) for all three methods, matching the
/// bootstrap baselines' replicate count so widths are comparable.
pub const DEFAULT_OUTER_DRAWS: usize = 5_000;

/// Default number of inner `ξ | θ` draws per outer draw in the θ method.
pub const DEFAULT_INNER_DRAWS: usize = 100;

/// Default histogram resolution per axis for the ξ method.
pub const DEFAULT_BINS_PER_AXIS: usize = 100;

/// The grid covers this central quantile range of the draws per axis, so a
/// single outlier cannot flatten the histogram.
pub const GRID_QUANTILE_LOWER: f64 = 0.001;
/// Upper end of the grid quantile range.
pub const GRID_QUANTILE_UPPER: f64 = 0.999;

/// Credible-interval levels reported by [`summarize`].
pub const CREDIBLE_LOWER: f64 = 0.005;
/// Upper credible level.
pub const CREDIBLE_UPPER: f64 = 0.995;

/// Which procedure produced a [`PriceDistribution`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodTag {
    /// θ method: per-θ averaged prices.
    Theta,
    /// ξ method: prices of grid-resampled `(u, d)` pairs.
    Xi,
    /// Expected-ξ method: prices at conditional component means.
    ExpectedXi,
    /// Sample-means point calibration.
    Sm,
    /// Bootstrapped-means baseline.
    Bm,
    /// Bootstrapped-values baseline.
    Bv,
}

impl MethodTag {
    /// All tags in canonical reporting order.
    pub const ALL: [MethodTag; 6] = [
        MethodTag::Theta,
        MethodTag::Xi,
        MethodTag::ExpectedXi,
        MethodTag::Sm,
        MethodTag::Bm,
        MethodTag::Bv,
    ];

    /// Stable lowercase identifier used in file names and reports.
    pub fn as_str(&self) -> &'static str {
        match self {
            MethodTag::Theta => "theta",
            MethodTag::Xi => "xi",
            MethodTag::ExpectedXi => "expected_xi",
            MethodTag::Sm => "sm",
            MethodTag::Bm => "bm",
            MethodTag::Bv => "bv",
        }
    }
}

impl std::fmt::Display for MethodTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for MethodTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "theta" => Ok(MethodTag::Theta),
            "xi" => Ok(MethodTag::Xi),
            "expected_xi" => Ok(MethodTag::ExpectedXi),
            "sm" => Ok(MethodTag::Sm),
            "bm" => Ok(MethodTag::Bm),
            "bv" => Ok(MethodTag::Bv),
            other => Err(Error::invalid(
                "method",
                format!("unknown method `{other}`; expected one of theta, xi, expected_xi, sm, bm, bv"),
            )),
        }
    }
}

/// A Monte Carlo sample of option prices with its provenance tag.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PriceDistribution {
    /// Price samples in draw order.
    pub samples: Vec<f64>,
    /// Procedure that produced them.
    pub method_tag: MethodTag,
}

impl PriceDistribution {
    /// Validates that the sample is nonempty and every price is finite and
    /// nonnegative.
    pub fn new(samples: Vec<f64>, method_tag: MethodTag) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::Empty("price distribution has no samples"));
        }
        if let Some(bad) = samples.iter().find(|s| !(s.is_finite() && **s >= 0.0)) {
            return Err(Error::invalid(
                "samples",
                format!("prices must be finite and nonnegative, got {bad}"),
            ));
        }
        Ok(PriceDistribution {
            samples,
            method_tag,
        })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Sample mean.
    pub fn mean(&self) -> f64 {
        self.samples.iter().sum::<f64>() / self.samples.len() as f64
    }

    /// Samples sorted ascending (NaN-free by construction).
    pub fn sorted_samples(&self) -> Vec<f64> {
        let mut out = self.samples.clone();
        out.sort_by(f64::total_cmp);
        out
    }

    /// Writes the samples as a one-column CSV with header `price`.
    pub fn write_samples<W: Write>(&self, out: &mut W) -> Result<()> {
        writeln!(out, "price")?;
        for s in &self.samples {
            writeln!(out, "{s}")?;
        }
        Ok(())
    }
}

/// Binned posterior-predictive distribution of `(u, d)` used by the ξ
/// method: occupied bins only, row-major in `(u, d)` order.
#[derive(Debug, Clone, Serialize)]
pub struct XiGrid {
    /// Center of each occupied bin; always a valid no-arbitrage pair.
    pub bin_centers: Vec<XiPair>,
    /// Probability mass of each occupied bin; sums to 1.
    pub masses: Vec<f64>,
    /// Requested resolution per axis (an axis with zero spread collapses
    /// to a single exact-valued bin).
    pub bins_per_axis: usize,
    /// True when every underlying draw was identical, i.e. the grid is a
    /// single point mass and carries no spread information.
    pub degenerate: bool,
}

impl XiGrid {
    /// Sum of all bin masses (1 up to float rounding).
    pub fn total_mass(&self) -> f64 {
        self.masses.iter().sum()
    }

    /// Number of occupied bins.
    pub fn occupied(&self) -> usize {
        self.bin_centers.len()
    }
}

/// Order statistics and moments of a price distribution.
#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub method: MethodTag,
    /// Sample count.
    pub n: usize,
    pub mean: f64,
    /// Sample standard deviation (denominator `n - 1`).
    pub sd: f64,
    pub median: f64,
    /// `(level, value)` pairs for the requested levels, in input order.
    pub percentiles: Vec<(f64, f64)>,
    /// 0.5% percentile.
    pub ci_lower: f64,
    /// 99.5% percentile.
    pub ci_upper: f64,
    /// `ci_upper - ci_lower`, the 99% credible-interval width.
    pub width: f64,
}

/// Linear-interpolation quantile (type 7: `h = (n-1)·level`) of an
/// ascending slice. Expects a nonempty, sorted input and a level in
/// `[0, 1]`.
pub fn quantile_sorted(sorted: &[f64], level: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = (n - 1) as f64 * level;
    let lo = h.floor() as usize;
    if lo + 1 >= n {
        return sorted[n - 1];
    }
    let frac = h - lo as f64;
    sorted[lo] + frac * (sorted[lo + 1] - sorted[lo])
}

/// Summarizes a price distribution: mean, standard deviation, median, the
/// requested percentiles, and the 99% credible interval
/// (0.5%–99.5%). Levels must lie strictly in `(0, 1)`.
pub fn summarize(dist: &PriceDistribution, levels: &[f64]) -> Result<Summary> {
    for &lv in levels {
        if !(lv > 0.0 && lv < 1.0) {
            return Err(Error::invalid(
                "level",
                format!("percentile levels must lie in (0, 1), got {lv}"),
            ));
        }
    }
    let sorted = dist.sorted_samples();
    let n = sorted.len();
    let mean = sorted.iter().sum::<f64>() / n as f64;
    let var = if n > 1 {
        sorted.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64
    } else {
        0.0
    };
    let ci_lower = quantile_sorted(&sorted, CREDIBLE_LOWER);
    let ci_upper = quantile_sorted(&sorted, CREDIBLE_UPPER);
    Ok(Summary {
        method: dist.method_tag,
        n,
        mean,
        sd: var.sqrt(),
        median: quantile_sorted(&sorted, 0.5),
        percentiles: levels
            .iter()
            .map(|&lv| (lv, quantile_sorted(&sorted, lv)))
            .collect(),
        ci_lower,
        ci_upper,
        width: ci_upper - ci_lower,
    })
}

fn ensure_chain(chain: &Chain, frame: &MarketFrame) -> Result<()> {
    if chain.is_empty() {
        return Err(Error::Empty("chain has no kept samples"));
    }
    frame.validate()?;
    if chain.r_f != frame.r_f {
        return Err(Error::invalid(
            "r_f",
            format!(
                "chain was conditioned on per-period rate {} but the pricing \
                 frame uses {}; they must match",
                chain.r_f, frame.r_f
            ),
        ));
    }
    Ok(())
}

fn ensure_positive(name: &'static str, n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::invalid(name, "must be at least 1"));
    }
    Ok(())
}

/// Truncated-normal mixture components conditional on one θ.
fn component_distributions(
    theta: &ThetaSample,
    r_f: f64,
    u_upper: f64,
) -> Result<(TruncatedNormal, TruncatedNormal)> {
    let growth = 1.0 + r_f;
    Ok((
        TruncatedNormal::new(theta.u_star, theta.sigma2_u.sqrt(), growth, u_upper)?,
        TruncatedNormal::new(theta.d_star, theta.sigma2_d.sqrt(), 0.0, growth)?,
    ))
}

fn draw_theta<'c>(chain: &'c Chain, rng: &mut RngStream) -> &'c ThetaSample {
    &chain.samples[rng.random_range(0..chain.len())]
}

/// Runs `n` independent indexed tasks in parallel and collects their
/// results in index order, failing on the first error.
fn run_indexed<F>(n: usize, task: F) -> Result<Vec<f64>>
where
    F: Fn(usize) -> Result<f64> + Sync + Send,
{
    (0..n)
        .into_par_iter()
        .map(task)
        .collect::<Vec<Result<f64>>>()
        .into_iter()
        .collect()
}

/// θ method: `l` uniform chain draws, each averaged over `m` fresh
/// `ξ | θ` draws; the `l` averages are the price sample.
pub fn theta_method(
    chain: &Chain,
    frame: &MarketFrame,
    l: usize,
    m: usize,
    rng: &mut RngStream,
) -> Result<PriceDistribution> {
    ensure_positive("l", l)?;
    ensure_positive("m", m)?;
    ensure_chain(chain, frame)?;
    let root = rng.fork();
    let samples = run_indexed(l, |i| {
        let mut task = root.substream(domains::THETA_OUTER, i as u64);
        let theta = draw_theta(chain, &mut task);
        let (tn_u, tn_d) = component_distributions(theta, chain.r_f, chain.u_upper)?;
        // Running mean rather than sum-then-divide: exact when every inner
        // price is identical, which keeps the point-mass limit coincident
        // with the other methods to the last bit.
        let mut mean = 0.0;
        for j in 0..m {
            let u = tn_u.sample(&mut task);
            let d = tn_d.sample(&mut task);
            let price = price_european(XiPair::new(u, d)?, frame)?;
            mean += (price - mean) / (j + 1) as f64;
        }
        Ok(mean)
    })?;
    PriceDistribution::new(samples, MethodTag::Theta)
}

/// Draws `l` marginal `(u, d)` pairs: θ uniformly from the chain, then one
/// draw from each component given θ.
fn draw_xi_pairs(chain: &Chain, l: usize, root: &RngStream) -> Result<Vec<XiPair>> {
    (0..l)
        .into_par_iter()
        .map(|i| {
            let mut task = root.substream(domains::XI_DRAW, i as u64);
            let theta = draw_theta(chain, &mut task);
            let (tn_u, tn_d) = component_distributions(theta, chain.r_f, chain.u_upper)?;
            let u = tn_u.sample(&mut task);
            let d = tn_d.sample(&mut task);
            XiPair::new(u, d)
        })
        .collect::<Vec<Result<XiPair>>>()
        .into_iter()
        .collect()
}

/// One histogram axis: `bins` equal-width cells over `[lo, lo + bins·width)`,
/// or a single exact-valued cell when the axis has no spread.
struct Axis {
    lo: f64,
    width: f64,
    bins: usize,
}

impl Axis {
    fn from_sorted(sorted: &[f64], bins: usize) -> Axis {
        let lo = quantile_sorted(sorted, GRID_QUANTILE_LOWER);
        let hi = quantile_sorted(sorted, GRID_QUANTILE_UPPER);
        if hi <= lo {
            Axis {
                lo,
                width: 0.0,
                bins: 1,
            }
        } else {
            Axis {
                lo,
                width: (hi - lo) / bins as f64,
                bins,
            }
        }
    }

    /// Bin index of `x`; values beyond the quantile range clamp into the
    /// edge bins.
    fn index(&self, x: f64) -> usize {
        if self.bins == 1 || x <= self.lo {
            return 0;
        }
        (((x - self.lo) / self.width) as usize).min(self.bins - 1)
    }

    fn center(&self, k: usize) -> f64 {
        if self.bins == 1 {
            self.lo
        } else {
            self.lo + (k as f64 + 0.5) * self.width
        }
    }
}

/// Histograms the draws on a `bins_per_axis`² grid over the central
/// quantile range of each axis.
fn bin_draws(draws: &[XiPair], bins_per_axis: usize) -> Result<XiGrid> {
    let mut us: Vec<f64> = draws.iter().map(|x| x.u()).collect();
    let mut ds: Vec<f64> = draws.iter().map(|x| x.d()).collect();
    us.sort_by(f64::total_cmp);
    ds.sort_by(f64::total_cmp);
    let degenerate = us[0] == us[us.len() - 1] && ds[0] == ds[ds.len() - 1];
    let ax_u = Axis::from_sorted(&us, bins_per_axis);
    let ax_d = Axis::from_sorted(&ds, bins_per_axis);

    let mut counts = vec![0u64; ax_u.bins * ax_d.bins];
    for pair in draws {
        counts[ax_u.index(pair.u()) * ax_d.bins + ax_d.index(pair.d())] += 1;
    }
    let total = draws.len() as f64;
    let mut bin_centers = Vec::new();
    let mut masses = Vec::new();
    for ku in 0..ax_u.bins {
        for kd in 0..ax_d.bins {
            let c = counts[ku * ax_d.bins + kd];
            if c > 0 {
                bin_centers.push(XiPair::new(ax_u.center(ku), ax_d.center(kd))?);
                masses.push(c as f64 / total);
            }
        }
    }
    Ok(XiGrid {
        bin_centers,
        masses,
        bins_per_axis,
        degenerate,
    })
}

/// ξ method: draws `l` marginal pairs, bins them on a `bins_per_axis`²
/// grid, then prices `l` grid centers resampled by mass.
///
/// Returns the grid alongside the price sample. `bins_per_axis` must be at
/// least 2 (an axis still collapses to one exact bin when its draws have
/// no spread, which keeps the point-mass limit exact).
pub fn xi_method(
    chain: &Chain,
    frame: &MarketFrame,
    l: usize,
    bins_per_axis: usize,
    rng: &mut RngStream,
) -> Result<(XiGrid, PriceDistribution)> {
    ensure_positive("l", l)?;
    if bins_per_axis < 2 {
        return Err(Error::invalid("bins_per_axis", "must be at least 2"));
    }
    ensure_chain(chain, frame)?;
    let root = rng.fork();
    let draws = draw_xi_pairs(chain, l, &root)?;
    let grid = bin_draws(&draws, bins_per_axis)?;

    // Cumulative masses for inverse-CDF resampling of centers.
    let mut cumulative = Vec::with_capacity(grid.masses.len());
    let mut acc = 0.0;
    for m in &grid.masses {
        acc += m;
        cumulative.push(acc);
    }
    let last = grid.bin_centers.len() - 1;
    let samples = run_indexed(l, |j| {
        let mut task = root.substream(domains::XI_RESAMPLE, j as u64);
        let uniform: f64 = task.random();
        let k = cumulative.partition_point(|&c| c <= uniform).min(last);
        price_european(grid.bin_centers[k], frame)
    })?;
    let dist = PriceDistribution::new(samples, MethodTag::Xi)?;
    Ok((grid, dist))
}

/// Bin-free variant of the ξ method: prices the `l` raw marginal draws
/// directly, skipping the histogram approximation.
///
/// With the same stream state it consumes the identical draws as
/// [`xi_method`], so the two quantify the binning error alone.
pub fn xi_method_bin_free(
    chain: &Chain,
    frame: &MarketFrame,
    l: usize,
    rng: &mut RngStream,
) -> Result<PriceDistribution> {
    ensure_positive("l", l)?;
    ensure_chain(chain, frame)?;
    let root = rng.fork();
    let draws = draw_xi_pairs(chain, l, &root)?;
    let samples = run_indexed(l, |i| price_european(draws[i], frame))?;
    PriceDistribution::new(samples, MethodTag::Xi)
}

/// Expected-ξ method: prices each of `l` uniform chain draws at the
/// conditional component means `(E(u | θ), E(d | θ))`.
pub fn expected_xi_method(
    chain: &Chain,
    frame: &MarketFrame,
    l: usize,
    rng: &mut RngStream,
) -> Result<PriceDistribution> {
    ensure_positive("l", l)?;
    ensure_chain(chain, frame)?;
    let root = rng.fork();
    let samples = run_indexed(l, |i| {
        let mut task = root.substream(domains::EXPECTED_XI, i as u64);
        let theta = draw_theta(chain, &mut task);
        let moments = TruncatedMoments::new(
            theta.u_star,
            theta.sigma2_u.sqrt(),
            theta.d_star,
            theta.sigma2_d.sqrt(),
            chain.r_f,
        )?;
        price_european(XiPair::new(moments.mean_u, moments.mean_d)?, frame)
    })?;
    PriceDistribution::new(samples, MethodTag::ExpectedXi)
}
