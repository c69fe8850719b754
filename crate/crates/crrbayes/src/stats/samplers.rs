//! Draws from the prior families: Beta and Inverse-Gamma.
//!
//! Both delegate to `rand_distr` for the actual algorithms; this module adds
//! parameter validation with crate errors and fixes the Inverse-Gamma
//! parameterization (shape `α`, *rate* `β`, mean `β/(α-1)` for `α > 1`),
//! matching how the model's priors are written.

use rand_distr::{Beta, Distribution, Gamma};

use crate::error::{Error, Result};
use crate::rng::RngStream;

/// One draw from `Beta(a, b)`.
pub fn sample_beta(a: f64, b: f64, rng: &mut RngStream) -> Result<f64> {
    if !(a.is_finite() && a > 0.0) {
        return Err(Error::invalid("a", format!("Beta shape must be positive, got {a}")));
    }
    if !(b.is_finite() && b > 0.0) {
        return Err(Error::invalid("b", format!("Beta shape must be positive, got {b}")));
    }
    let dist = Beta::new(a, b)
        .map_err(|e| Error::invalid("a/b", format!("Beta parameters rejected: {e}")))?;
    Ok(dist.sample(rng))
}

/// One draw from `InverseGamma(shape, rate)`.
///
/// Implemented as the reciprocal of a `Gamma(shape, rate)` draw: if
/// `Y ~ Gamma(α, rate β)` then `1/Y ~ IG(α, β)`.
pub fn sample_inverse_gamma(shape: f64, rate: f64, rng: &mut RngStream) -> Result<f64> {
    if !(shape.is_finite() && shape > 0.0) {
        return Err(Error::invalid(
            "shape",
            format!("Inverse-Gamma shape must be positive, got {shape}"),
        ));
    }
    if !(rate.is_finite() && rate > 0.0) {
        return Err(Error::invalid(
            "rate",
            format!("Inverse-Gamma rate must be positive, got {rate}"),
        ));
    }
    // rand_distr's Gamma takes (shape, scale); scale = 1/rate.
    let dist = Gamma::new(shape, 1.0 / rate)
        .map_err(|e| Error::invalid("shape/rate", format!("Gamma parameters rejected: {e}")))?;
    loop {
        let y = dist.sample(rng);
        // A zero draw (possible only by underflow for tiny shapes) would
        // produce an infinite reciprocal; redraw instead.
        if y > 0.0 {
            return Ok(1.0 / y);
        }
    }
}
