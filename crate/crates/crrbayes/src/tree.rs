//! Cox-Ross-Rubinstein binomial-tree valuation of European options.
//!
//! One period multiplies the underlying by the gross up-return `u` with
//! risk-neutral probability `q` or the gross down-return `d` with `1 - q`,
//! where `q = ((1+r_f) - d)/(u - d)` is the unique probability making the
//! discounted underlying a martingale. European payoffs admit the closed
//! binomial sum
//!
//! ```text
//! P = (1+r_f)^-T · Σ_k C(T,k) q^k (1-q)^(T-k) payoff(S u^k d^(T-k))
//! ```
//!
//! evaluated in log space so neither the binomial weights nor `u^T`
//! overflow at large depths. Backward induction is available behind the same
//! interface for future payoff types but the closed sum is the hot path:
//! uncertainty propagation prices 10⁵–10⁶ trees per run.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::special::ln_choose;

/// `u - d` below this is treated as a degenerate (flat) tree.
const DEGENERATE_GAP: f64 = 1e-12;

/// One pair of gross per-period returns for the tree.
///
/// Construction checks only what the pair alone can guarantee (`0 < d < u`,
/// both finite); the no-arbitrage ordering against `1 + r_f` is checked at
/// pricing time by [`risk_neutral_q`], which knows the rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct XiPair {
    u: f64,
    d: f64,
}

impl XiPair {
    pub fn new(u: f64, d: f64) -> Result<Self> {
        if !(u.is_finite() && d.is_finite() && d > 0.0 && d < u) {
            return Err(Error::invalid(
                "xi",
                format!("need 0 < d < u with both finite, got u={u}, d={d}"),
            ));
        }
        Ok(XiPair { u, d })
    }

    pub fn u(&self) -> f64 {
        self.u
    }

    pub fn d(&self) -> f64 {
        self.d
    }
}

/// European payoff type.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptionKind {
    EuropeanCall,
    EuropeanPut,
}

impl OptionKind {
    /// Terminal payoff at underlying level `s` for strike `k`.
    pub fn payoff(&self, s: f64, k: f64) -> f64 {
        match self {
            OptionKind::EuropeanCall => (s - k).max(0.0),
            OptionKind::EuropeanPut => (k - s).max(0.0),
        }
    }
}

impl std::str::FromStr for OptionKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "call" | "european_call" | "european-call" => Ok(OptionKind::EuropeanCall),
            "put" | "european_put" | "european-put" => Ok(OptionKind::EuropeanPut),
            other => Err(Error::invalid(
                "option_kind",
                format!("unknown option kind `{other}`; expected call or put"),
            )),
        }
    }
}

/// Contract and market context for one valuation.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct MarketFrame {
    /// Current underlying price `S_t`.
    pub spot: f64,
    /// Strike `K`.
    pub strike: f64,
    /// Number of tree steps to expiry.
    pub periods: u32,
    /// Per-period risk-free rate.
    pub r_f: f64,
    pub option_kind: OptionKind,
}

impl MarketFrame {
    pub fn new(spot: f64, strike: f64, periods: u32, r_f: f64, option_kind: OptionKind) -> Result<Self> {
        let frame = MarketFrame {
            spot,
            strike,
            periods,
            r_f,
            option_kind,
        };
        frame.validate()?;
        Ok(frame)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.spot.is_finite() && self.spot > 0.0) {
            return Err(Error::invalid("spot", format!("must be positive, got {}", self.spot)));
        }
        if !(self.strike.is_finite() && self.strike > 0.0) {
            return Err(Error::invalid(
                "strike",
                format!("must be positive, got {}", self.strike),
            ));
        }
        if self.periods < 1 {
            return Err(Error::invalid("periods", "must be at least 1"));
        }
        if !(self.r_f.is_finite() && self.r_f > -1.0) {
            return Err(Error::invalid(
                "r_f",
                format!("must be finite and greater than -1, got {}", self.r_f),
            ));
        }
        Ok(())
    }
}

/// Risk-neutral up-probability `q = ((1+r_f) - d)/(u - d)`.
///
/// Errors when `u - d` is numerically zero (`Error::DegenerateTree`) or
/// when the no-arbitrage ordering `0 < d < 1+r_f < u` fails
/// (`Error::ArbitrageViolation`). Degeneracy is diagnosed first: a flat
/// tree can never bracket the growth factor, so reporting it as an
/// arbitrage violation would misname the real problem. The ordering
/// guarantees `0 < q < 1`.
pub fn risk_neutral_q(xi: XiPair, r_f: f64) -> Result<f64> {
    let gap = xi.u - xi.d;
    if gap < DEGENERATE_GAP {
        return Err(Error::DegenerateTree { gap });
    }
    let growth = 1.0 + r_f;
    if !(xi.d < growth && growth < xi.u) {
        return Err(Error::ArbitrageViolation {
            u: xi.u,
            d: xi.d,
            r_f,
        });
    }
    Ok((growth - xi.d) / gap)
}

/// Prices a European option by the closed binomial sum over terminal nodes.
pub fn price_european(xi: XiPair, frame: &MarketFrame) -> Result<f64> {
    frame.validate()?;
    let q = risk_neutral_q(xi, frame.r_f)?;
    let t = frame.periods as u64;
    let ln_q = q.ln();
    let ln_1q = (1.0 - q).ln();
    let ln_u = xi.u.ln();
    let ln_d = xi.d.ln();
    let ln_spot = frame.spot.ln();

    let mut acc = 0.0;
    for k in 0..=t {
        let s_k = (ln_spot + k as f64 * ln_u + (t - k) as f64 * ln_d).exp();
        let pay = frame.option_kind.payoff(s_k, frame.strike);
        if pay > 0.0 {
            let ln_weight = ln_choose(t, k) + k as f64 * ln_q + (t - k) as f64 * ln_1q;
            acc += ln_weight.exp() * pay;
        }
    }
    // Discount in log space: (1+r_f)^-T without intermediate overflow.
    Ok(acc * (-(t as f64) * (1.0 + frame.r_f).ln()).exp())
}

/// Prices by explicit backward induction through the recombinant lattice.
///
/// Semantically identical to [`price_european`] for European payoffs (they
/// are cross-checked in tests) but O(T²); kept behind the same interface as
/// the extension point for payoffs that need node-by-node evaluation.
pub fn price_european_backward(xi: XiPair, frame: &MarketFrame) -> Result<f64> {
    frame.validate()?;
    let q = risk_neutral_q(xi, frame.r_f)?;
    let t = frame.periods as usize;
    let discount = 1.0 / (1.0 + frame.r_f);

    // Terminal node k has k up-moves.
    let mut values: Vec<f64> = (0..=t)
        .map(|k| {
            let s = frame.spot * xi.u.powi(k as i32) * xi.d.powi((t - k) as i32);
            frame.option_kind.payoff(s, frame.strike)
        })
        .collect();
    for step in (0..t).rev() {
        for k in 0..=step {
            values[k] = discount * ((1.0 - q) * values[k] + q * values[k + 1]);
        }
    }
    Ok(values[0])
}
