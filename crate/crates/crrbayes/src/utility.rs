//! Expected-utility price selection.
//!
//! Given a prior over a scalar parameter θ, a pricing map `P(θ)`, and a
//! utility over (quoted price, realized fair price), the quoted price is
//! chosen to maximize prior expected utility. The utility mixes the
//! seller's and buyer's sides as `p·U_S + (1−p)·U_B`; the kinds shipped
//! here are side-symmetric, so the sell probability `p` does not move the
//! optimum — it is carried to keep the decision structure explicit.
//!
//! Priors enter either as a density on a bounded grid (integrated by the
//! trapezoid rule) or as an empirical sample (e.g. prices derived from an
//! MCMC chain), in which case expectations are sample averages.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::Write;

use crate::error::{Error, Result};
use crate::stats::std_normal_cdf;

/// Tolerance on `∫ prior dθ = 1` for grid-based priors.
pub const PRIOR_MASS_TOLERANCE: f64 = 1e-6;

/// Upper integration bound for the [`normal_band_example`] prior; the
/// Gamma(2, 1) tail mass beyond it is below 1e−8.
pub const EXAMPLE_THETA_MAX: f64 = 30.0;

/// Grid resolution of [`normal_band_example`], chosen so the trapezoid
/// discretization error stays within [`PRIOR_MASS_TOLERANCE`].
pub const EXAMPLE_THETA_POINTS: usize = 30_001;

/// Functional form of the utility.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UtilityKind {
    /// `−(quote − P(θ))²`.
    Quadratic,
    /// Indicator of exact equality `quote = P(θ)`; degenerate under a
    /// continuous prior (every quote scores 0) and included for the
    /// discrete/empirical case.
    ZeroOne,
    /// Quadratic, but the trade is declined — utility identically 0 —
    /// when the prior standard deviation of `P(θ)` exceeds `threshold`.
    VolatilityThreshold,
}

impl std::str::FromStr for UtilityKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "quadratic" => Ok(UtilityKind::Quadratic),
            "zero_one" | "zero-one" => Ok(UtilityKind::ZeroOne),
            "volatility_threshold" | "volatility-threshold" => Ok(UtilityKind::VolatilityThreshold),
            other => Err(Error::invalid(
                "utility",
                format!(
                    "unknown utility `{other}`; expected quadratic, zero_one, or volatility_threshold"
                ),
            )),
        }
    }
}

/// A utility specification: kind, optional volatility threshold, and the
/// probability that the quoting side ends up selling.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct UtilitySpec {
    pub kind: UtilityKind,
    /// Required iff `kind` is [`UtilityKind::VolatilityThreshold`].
    pub threshold: Option<f64>,
    /// Probability of selling at the quote; buyer side has `1 − p`.
    pub sell_probability: f64,
}

impl UtilitySpec {
    pub fn quadratic() -> Self {
        UtilitySpec {
            kind: UtilityKind::Quadratic,
            threshold: None,
            sell_probability: 0.5,
        }
    }

    pub fn zero_one() -> Self {
        UtilitySpec {
            kind: UtilityKind::ZeroOne,
            threshold: None,
            sell_probability: 0.5,
        }
    }

    pub fn volatility_threshold(threshold: f64) -> Self {
        UtilitySpec {
            kind: UtilityKind::VolatilityThreshold,
            threshold: Some(threshold),
            sell_probability: 0.5,
        }
    }

    pub fn with_sell_probability(mut self, p: f64) -> Self {
        self.sell_probability = p;
        self
    }

    pub fn validate(&self) -> Result<()> {
        match (self.kind, self.threshold) {
            (UtilityKind::VolatilityThreshold, None) => {
                return Err(Error::invalid(
                    "threshold",
                    "volatility_threshold utility requires a threshold",
                ));
            }
            (UtilityKind::VolatilityThreshold, Some(t)) if !(t.is_finite() && t >= 0.0) => {
                return Err(Error::invalid(
                    "threshold",
                    format!("must be finite and nonnegative, got {t}"),
                ));
            }
            (UtilityKind::Quadratic | UtilityKind::ZeroOne, Some(_)) => {
                return Err(Error::invalid(
                    "threshold",
                    "only the volatility_threshold utility takes a threshold",
                ));
            }
            _ => {}
        }
        if !(self.sell_probability.is_finite()
            && (0.0..=1.0).contains(&self.sell_probability))
        {
            return Err(Error::invalid(
                "sell_probability",
                format!("must lie in [0, 1], got {}", self.sell_probability),
            ));
        }
        Ok(())
    }
}

/// A scalar-parameter pricing model: grid points θ_i, normalized prior
/// weights w_i, and precomputed prices `P(θ_i)`.
///
/// Construction validates the invariants (prior mass 1 up to tolerance,
/// finite prices), so downstream code can treat a value of this type as
/// well-formed.
#[derive(Debug, Clone, Serialize)]
pub struct ScalarPriceModel {
    thetas: Vec<f64>,
    weights: Vec<f64>,
    prices: Vec<f64>,
}

impl ScalarPriceModel {
    /// Builds the model from explicit grid points, prior density values at
    /// those points, and a pricing map; integrates by the trapezoid rule.
    ///
    /// The grid must be strictly increasing with at least two points, the
    /// density nonnegative, and its trapezoid integral within
    /// [`PRIOR_MASS_TOLERANCE`] of 1 (weights are then renormalized to sum
    /// to exactly 1).
    pub fn from_grid_density<F>(thetas: Vec<f64>, densities: Vec<f64>, price_fn: F) -> Result<Self>
    where
        F: Fn(f64) -> f64,
    {
        if thetas.len() < 2 {
            return Err(Error::invalid("thetas", "need at least two grid points"));
        }
        if thetas.len() != densities.len() {
            return Err(Error::invalid(
                "densities",
                format!(
                    "length {} does not match grid length {}",
                    densities.len(),
                    thetas.len()
                ),
            ));
        }
        if thetas.windows(2).any(|w| !(w[1] > w[0])) || thetas.iter().any(|t| !t.is_finite()) {
            return Err(Error::invalid("thetas", "grid must be finite and strictly increasing"));
        }
        if densities.iter().any(|d| !(d.is_finite() && *d >= 0.0)) {
            return Err(Error::invalid("densities", "must be finite and nonnegative"));
        }
        let n = thetas.len();
        let mut weights = vec![0.0; n];
        for i in 0..n - 1 {
            let h = thetas[i + 1] - thetas[i];
            weights[i] += 0.5 * h * densities[i];
            weights[i + 1] += 0.5 * h * densities[i + 1];
        }
        let mass: f64 = weights.iter().sum();
        if (mass - 1.0).abs() > PRIOR_MASS_TOLERANCE {
            return Err(Error::invalid(
                "prior",
                format!("density integrates to {mass}, not 1 ± {PRIOR_MASS_TOLERANCE}"),
            ));
        }
        for w in &mut weights {
            *w /= mass;
        }
        let prices: Vec<f64> = thetas.iter().map(|&t| price_fn(t)).collect();
        if prices.iter().any(|p| !p.is_finite()) {
            return Err(Error::invalid("price_fn", "must be finite on the grid"));
        }
        Ok(ScalarPriceModel {
            thetas,
            weights,
            prices,
        })
    }

    /// Convenience wrapper: uniform grid of `points` over `[lo, hi]`.
    pub fn from_density<D, F>(lo: f64, hi: f64, points: usize, density: D, price_fn: F) -> Result<Self>
    where
        D: Fn(f64) -> f64,
        F: Fn(f64) -> f64,
    {
        if !(lo.is_finite() && hi.is_finite() && hi > lo) {
            return Err(Error::invalid("range", format!("need finite lo < hi, got [{lo}, {hi}]")));
        }
        if points < 2 {
            return Err(Error::invalid("points", "need at least two grid points"));
        }
        let step = (hi - lo) / (points - 1) as f64;
        let thetas: Vec<f64> = (0..points).map(|i| lo + step * i as f64).collect();
        let densities: Vec<f64> = thetas.iter().map(|&t| density(t)).collect();
        Self::from_grid_density(thetas, densities, price_fn)
    }

    /// Empirical prior: equal weight on each sampled price (for instance
    /// prices computed from posterior chain draws). The parameter grid is
    /// the price itself, i.e. an identity pricing map.
    pub fn from_price_samples(prices: Vec<f64>) -> Result<Self> {
        if prices.is_empty() {
            return Err(Error::Empty("empirical prior has no samples"));
        }
        if prices.iter().any(|p| !p.is_finite()) {
            return Err(Error::invalid("prices", "must be finite"));
        }
        let w = 1.0 / prices.len() as f64;
        Ok(ScalarPriceModel {
            thetas: prices.clone(),
            weights: vec![w; prices.len()],
            prices,
        })
    }

    pub fn thetas(&self) -> &[f64] {
        &self.thetas
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn prices(&self) -> &[f64] {
        &self.prices
    }

    /// Prior mean of `P(θ)` — the exact maximizer of quadratic expected
    /// utility.
    pub fn prior_mean_price(&self) -> f64 {
        self.weights
            .iter()
            .zip(&self.prices)
            .map(|(w, p)| w * p)
            .sum()
    }

    /// Prior standard deviation of `P(θ)`, used by the
    /// volatility-threshold utility.
    pub fn price_sd(&self) -> f64 {
        let mean = self.prior_mean_price();
        let var: f64 = self
            .weights
            .iter()
            .zip(&self.prices)
            .map(|(w, p)| w * (p - mean).powi(2))
            .sum();
        var.max(0.0).sqrt()
    }
}

/// Reference model: Gamma(2, 1) prior over θ ≥ 0 and pricing map
/// `P(θ) = Φ(θ/2) − Φ(−θ/2)`, the probability that a standard normal
/// lands within `±θ/2`.
///
/// Its quadratic-utility optimum is ≈ 0.587, strictly between the price
/// at the prior mode (`P(1) ≈ 0.383`) and at the prior mean
/// (`P(2) ≈ 0.683`).
pub fn normal_band_example(points: usize) -> Result<ScalarPriceModel> {
    ScalarPriceModel::from_density(
        0.0,
        EXAMPLE_THETA_MAX,
        points,
        |t| t * (-t).exp(),
        |t| std_normal_cdf(t / 2.0) - std_normal_cdf(-t / 2.0),
    )
}

/// Per-θ utility of quoting `quote` when the fair price is `price`. The
/// seller/buyer mix is explicit even though the shipped kinds are
/// side-symmetric.
fn utility_at(quote: f64, price: f64, spec: &UtilitySpec) -> f64 {
    let base = match spec.kind {
        UtilityKind::Quadratic | UtilityKind::VolatilityThreshold => -(quote - price).powi(2),
        UtilityKind::ZeroOne => {
            if quote == price {
                1.0
            } else {
                0.0
            }
        }
    };
    let p = spec.sell_probability;
    p * base + (1.0 - p) * base
}

/// Prior expected utility of quoting `quote`.
pub fn expected_utility(quote: f64, model: &ScalarPriceModel, util: &UtilitySpec) -> Result<f64> {
    util.validate()?;
    if !quote.is_finite() {
        return Err(Error::invalid("quote", format!("must be finite, got {quote}")));
    }
    if util.kind == UtilityKind::VolatilityThreshold {
        // Declined trade: the volatility gate fails, so no quote carries
        // utility.
        if model.price_sd() > util.threshold.expect("validated above") {
            return Ok(0.0);
        }
    }
    Ok(model
        .weights
        .iter()
        .zip(&model.prices)
        .map(|(w, p)| w * utility_at(quote, *p, util))
        .sum())
}

/// Maximizes expected utility over a grid of candidate quotes.
///
/// Returns the best quote and the full `(quote, expected utility)` curve
/// in grid order. Ties resolve to the earliest grid point.
pub fn optimal_quote(
    model: &ScalarPriceModel,
    util: &UtilitySpec,
    grid: &[f64],
) -> Result<(f64, Vec<(f64, f64)>)> {
    util.validate()?;
    if grid.is_empty() {
        return Err(Error::Empty("quote search grid is empty"));
    }
    let curve: Vec<(f64, f64)> = grid
        .par_iter()
        .map(|&q| Ok((q, expected_utility(q, model, util)?)))
        .collect::<Vec<Result<(f64, f64)>>>()
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let mut best = 0;
    for (i, (_, eu)) in curve.iter().enumerate() {
        if *eu > curve[best].1 {
            best = i;
        }
    }
    Ok((curve[best].0, curve))
}

/// Uniform candidate grid of `points` quotes over `[lo, hi]`.
pub fn uniform_grid(lo: f64, hi: f64, points: usize) -> Result<Vec<f64>> {
    if !(lo.is_finite() && hi.is_finite() && hi > lo) {
        return Err(Error::invalid("range", format!("need finite lo < hi, got [{lo}, {hi}]")));
    }
    if points < 2 {
        return Err(Error::invalid("points", "need at least two grid points"));
    }
    let step = (hi - lo) / (points - 1) as f64;
    Ok((0..points).map(|i| lo + step * i as f64).collect())
}

/// Writes a `(quote, expected utility)` curve as a two-column CSV.
pub fn write_curve<W: Write>(curve: &[(f64, f64)], out: &mut W) -> Result<()> {
    writeln!(out, "quote,expected_utility")?;
    for (q, eu) in curve {
        writeln!(out, "{q},{eu}")?;
    }
    Ok(())
}
