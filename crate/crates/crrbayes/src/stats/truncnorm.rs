//! Truncated normal distribution: density, sampling, and means.
//!
//! The model uses two instances: the "up" component on `(1 + r_f, +∞)` and
//! the "down" component on `(0, 1 + r_f)`. Both are thin slices of a parent
//! normal, so naive formulas fail exactly where the sampler likes to walk:
//! truncation regions far in a tail, vanishing masses, near-zero scales.
//! This module centralizes the guarded arithmetic; everything else in the
//! crate goes through [`TruncatedNormal`].

use rand::RngExt;

use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::stats::special::{
    mills_hazard, std_normal_cdf, std_normal_inv_cdf, std_normal_inv_sf, std_normal_pdf,
    std_normal_sf, LN_SQRT_2PI,
};

/// Scales below `location`-relative this threshold behave as a point mass at
/// the location; see [`TruncatedNormal::is_degenerate`].
const DEGENERATE_SCALE_FACTOR: f64 = 1e-14;

/// Standardized distance into the tail beyond which inverse-CDF sampling is
/// replaced by one-sided exponential rejection.
const TAIL_SAMPLING_CUTOFF: f64 = 5.0;

/// Mass of the parent standard normal on `[alpha, beta]`, with the branch
/// chosen so the subtraction happens between same-tail survival values and
/// never cancels catastrophically.
fn interval_mass(alpha: f64, beta: f64) -> f64 {
    if beta <= 0.0 {
        // Both bounds in the left tail: mirror to survival differences.
        std_normal_sf(-beta) - std_normal_sf(-alpha)
    } else {
        // Straddling or right tail: survival values decrease in z.
        std_normal_sf(alpha) - std_normal_sf(beta)
    }
}

/// A normal distribution restricted and renormalized to `(lower, upper)`.
///
/// `location` and `scale` are the parameters of the *parent* normal, not the
/// mean and standard deviation of the truncated law; the model's `u*`, `d*`
/// are exactly such parent locations.
#[derive(Debug, Clone, Copy)]
pub struct TruncatedNormal {
    location: f64,
    scale: f64,
    lower: f64,
    upper: f64,
    /// Standardized lower bound `(lower - location)/scale`.
    alpha: f64,
    /// Standardized upper bound `(upper - location)/scale`.
    beta: f64,
    /// Parent-normal mass on the support.
    mass: f64,
    ln_mass: f64,
    degenerate: bool,
}

impl TruncatedNormal {
    /// Validates parameters and precomputes the truncation mass.
    ///
    /// `lower` may be `-∞` and `upper` may be `+∞`. Fails with
    /// [`Error::MassVanished`] when the parent normal places no representable
    /// mass on `(lower, upper)`, which callers like the Metropolis sampler
    /// treat as "reject this parameter value".
    pub fn new(location: f64, scale: f64, lower: f64, upper: f64) -> Result<Self> {
        if !location.is_finite() {
            return Err(Error::invalid("location", format!("must be finite, got {location}")));
        }
        if !(scale.is_finite() && scale > 0.0) {
            return Err(Error::invalid(
                "scale",
                format!("must be finite and positive, got {scale}"),
            ));
        }
        if lower.is_nan() || upper.is_nan() {
            return Err(Error::invalid("bounds", "lower/upper must not be NaN"));
        }
        if !(lower < upper) {
            return Err(Error::invalid(
                "bounds",
                format!("need lower < upper, got ({lower}, {upper})"),
            ));
        }

        let degenerate = scale < DEGENERATE_SCALE_FACTOR * location.abs().max(1.0);
        if degenerate {
            // Point mass at the location: the entire distribution is the
            // location value, which therefore must lie inside the support.
            if !(location > lower && location < upper) {
                return Err(Error::MassVanished {
                    location,
                    scale,
                    lower,
                    upper,
                });
            }
            return Ok(TruncatedNormal {
                location,
                scale,
                lower,
                upper,
                alpha: f64::NEG_INFINITY,
                beta: f64::INFINITY,
                mass: 1.0,
                ln_mass: 0.0,
                degenerate,
            });
        }

        let alpha = (lower - location) / scale;
        let beta = (upper - location) / scale;
        let mass = interval_mass(alpha, beta);
        if !(mass > 0.0) {
            return Err(Error::MassVanished {
                location,
                scale,
                lower,
                upper,
            });
        }
        Ok(TruncatedNormal {
            location,
            scale,
            lower,
            upper,
            alpha,
            beta,
            mass,
            ln_mass: mass.ln(),
            degenerate,
        })
    }

    pub fn location(&self) -> f64 {
        self.location
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn lower(&self) -> f64 {
        self.lower
    }

    pub fn upper(&self) -> f64 {
        self.upper
    }

    /// Parent-normal probability of the support interval.
    pub fn mass(&self) -> f64 {
        self.mass
    }

    /// Whether the scale is so small relative to the location that the
    /// distribution is numerically a point mass at the location.
    pub fn is_degenerate(&self) -> bool {
        self.degenerate
    }

    /// Log-density at `x`; `-∞` outside the open support.
    ///
    /// No input validation — this is the likelihood hot path. NaN propagates.
    pub fn ln_pdf(&self, x: f64) -> f64 {
        if x <= self.lower || x >= self.upper {
            return f64::NEG_INFINITY;
        }
        if self.degenerate {
            return if x == self.location { f64::INFINITY } else { f64::NEG_INFINITY };
        }
        let z = (x - self.location) / self.scale;
        -0.5 * z * z - LN_SQRT_2PI - self.scale.ln() - self.ln_mass
    }

    /// Density at `x`: `φ((x-loc)/scale)/scale` renormalized by the
    /// truncation mass; `0` outside the open support.
    pub fn pdf(&self, x: f64) -> Result<f64> {
        if !x.is_finite() {
            return Err(Error::invalid("x", format!("must be finite, got {x}")));
        }
        let lp = self.ln_pdf(x);
        Ok(if lp == f64::NEG_INFINITY { 0.0 } else { lp.exp() })
    }

    /// Mean of the truncated distribution.
    ///
    /// One-sided truncations use the Mills-ratio hazard (scaled-complement
    /// form in the far tail); two-sided truncations deep in a tail factor
    /// the common `φ` term out so nothing underflows before it cancels.
    pub fn mean(&self) -> f64 {
        if self.degenerate {
            return self.location;
        }
        let r = if self.beta == f64::INFINITY {
            if self.alpha == f64::NEG_INFINITY {
                0.0
            } else {
                mills_hazard(self.alpha)
            }
        } else if self.alpha == f64::NEG_INFINITY {
            -mills_hazard(-self.beta)
        } else {
            standardized_two_sided_mean(self.alpha, self.beta, self.mass)
        };
        let mean = self.location + self.scale * r;
        // The exact mean lies strictly inside the support; rounding of the
        // sum must not be allowed to push it onto a bound.
        clamp_into_open_interval(mean, self.lower, self.upper)
    }

    /// Draws one value, strictly inside `(lower, upper)`.
    pub fn sample(&self, rng: &mut RngStream) -> f64 {
        if self.degenerate {
            return self.location;
        }
        let z = if self.alpha > TAIL_SAMPLING_CUTOFF {
            sample_right_tail(self.alpha, self.beta, rng)
        } else if self.beta < -TAIL_SAMPLING_CUTOFF {
            -sample_right_tail(-self.beta, -self.alpha, rng)
        } else if self.alpha >= 0.0 {
            // Right-of-center region: invert in survival space, where both
            // endpoint masses are far from 1 and keep full precision.
            let s_hi = std_normal_sf(self.alpha);
            let s_lo = std_normal_sf(self.beta);
            let u = open_unit(rng);
            std_normal_inv_sf(s_lo + u * (s_hi - s_lo))
        } else if self.beta <= 0.0 {
            // Mirror of the previous case.
            let s_hi = std_normal_sf(-self.beta);
            let s_lo = std_normal_sf(-self.alpha);
            let u = open_unit(rng);
            -std_normal_inv_sf(s_lo + u * (s_hi - s_lo))
        } else {
            // Support straddles the parent mean: plain CDF inversion.
            let p_lo = std_normal_cdf(self.alpha);
            let p_hi = std_normal_cdf(self.beta);
            let u = open_unit(rng);
            std_normal_inv_cdf(p_lo + u * (p_hi - p_lo))
        };
        clamp_into_open_interval(self.location + self.scale * z, self.lower, self.upper)
    }
}

/// `(φ(alpha) - φ(beta)) / mass` for finite bounds, the standardized mean
/// offset of a two-sided truncation.
fn standardized_two_sided_mean(alpha: f64, beta: f64, mass: f64) -> f64 {
    if alpha >= 6.0 {
        // Entire support in the right tail. Factor out φ(alpha):
        //   ratio = (1 - e) / (m(alpha) - e·m(beta)),
        // where e = φ(beta)/φ(alpha) and m is the Mills ratio 1/h.
        let e = (-0.5 * (beta - alpha) * (beta + alpha)).exp();
        let m_a = 1.0 / mills_hazard(alpha);
        let m_b = 1.0 / mills_hazard(beta);
        (1.0 - e) / (m_a - e * m_b)
    } else if beta <= -6.0 {
        -standardized_two_sided_mean(-beta, -alpha, mass)
    } else {
        (std_normal_pdf(alpha) - std_normal_pdf(beta)) / mass
    }
}

/// Robert's exponential-proposal rejection sampler for the standardized
/// right tail `z ∈ (alpha, beta)`, `alpha > 0`.
///
/// The acceptance rate is high for any `alpha` in this branch, but a finite
/// `beta` additionally rejects draws past the upper bound; for pathologically
/// thin slices the loop is capped and falls back to survival-space
/// inversion, whose worst case is a less accurate (not invalid) draw.
fn sample_right_tail(alpha: f64, beta: f64, rng: &mut RngStream) -> f64 {
    let lambda = 0.5 * (alpha + (alpha * alpha + 4.0).sqrt());
    for _ in 0..10_000 {
        let e: f64 = -open_unit(rng).ln();
        let z = alpha + e / lambda;
        if z >= beta {
            continue;
        }
        let diff = z - lambda;
        if open_unit(rng) <= (-0.5 * diff * diff).exp() {
            return z;
        }
    }
    let s_hi = std_normal_sf(alpha);
    let s_lo = std_normal_sf(beta);
    std_normal_inv_sf(s_lo + open_unit(rng) * (s_hi - s_lo))
}

/// Uniform draw from the open interval (0, 1).
fn open_unit(rng: &mut RngStream) -> f64 {
    loop {
        let u: f64 = rng.random();
        if u > 0.0 {
            return u;
        }
    }
}

/// Nudges `x` off the interval bounds if rounding placed it exactly there.
fn clamp_into_open_interval(x: f64, lower: f64, upper: f64) -> f64 {
    let mut x = x.clamp(lower, upper);
    if x <= lower {
        x = lower.next_up();
    }
    if x >= upper {
        x = upper.next_down();
    }
    x
}

/// Density of `dist` at `x` (module-level spelling of
/// [`TruncatedNormal::pdf`]).
pub fn truncnorm_pdf(x: f64, dist: &TruncatedNormal) -> Result<f64> {
    dist.pdf(x)
}

/// One draw from `dist` (module-level spelling of
/// [`TruncatedNormal::sample`]).
pub fn truncnorm_sample(dist: &TruncatedNormal, rng: &mut RngStream) -> f64 {
    dist.sample(rng)
}

/// `E(u)` for the up component `TN(u*, σ_u², 1+r_f, +∞)`:
/// `u* + σ_u · φ(c0)/(1 - Φ(c0))` with `c0 = (1+r_f - u*)/σ_u`.
pub fn truncnorm_mean_u(u_star: f64, sigma_u: f64, r_f: f64) -> Result<f64> {
    let dist = TruncatedNormal::new(u_star, sigma_u, 1.0 + r_f, f64::INFINITY)?;
    Ok(dist.mean())
}

/// `E(d)` for the down component `TN(d*, σ_d², 0, 1+r_f)`:
/// `d* - σ_d · (φ(b0) - φ(a0))/(Φ(b0) - Φ(a0))` with `a0 = -d*/σ_d`,
/// `b0 = (1+r_f - d*)/σ_d`.
pub fn truncnorm_mean_d(d_star: f64, sigma_d: f64, r_f: f64) -> Result<f64> {
    let dist = TruncatedNormal::new(d_star, sigma_d, 0.0, 1.0 + r_f)?;
    Ok(dist.mean())
}

/// The standardized truncation points and truncated means of one parameter
/// draw `θ = (u*, σ_u, d*, σ_d)` at risk-free rate `r_f`.
#[derive(Debug, Clone, Copy)]
pub struct TruncatedMoments {
    /// `(1+r_f - u*)/σ_u`, the up component's standardized lower bound.
    pub c0: f64,
    /// `-d*/σ_d`, the down component's standardized lower bound.
    pub a0: f64,
    /// `(1+r_f - d*)/σ_d`, the down component's standardized upper bound.
    pub b0: f64,
    /// `E(u) > 1+r_f`.
    pub mean_u: f64,
    /// `E(d) ∈ (0, 1+r_f)`.
    pub mean_d: f64,
}

impl TruncatedMoments {
    /// Computes both truncated means for one parameter draw.
    pub fn new(u_star: f64, sigma_u: f64, d_star: f64, sigma_d: f64, r_f: f64) -> Result<Self> {
        let mean_u = truncnorm_mean_u(u_star, sigma_u, r_f)?;
        let mean_d = truncnorm_mean_d(d_star, sigma_d, r_f)?;
        Ok(TruncatedMoments {
            c0: (1.0 + r_f - u_star) / sigma_u,
            a0: -d_star / sigma_d,
            b0: (1.0 + r_f - d_star) / sigma_d,
            mean_u,
            mean_d,
        })
    }
}
