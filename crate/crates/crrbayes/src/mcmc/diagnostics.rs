//! Post-hoc chain diagnostics: acceptance rates, autocorrelations,
//! histograms, and simple summary moments per parameter.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::mcmc::{Chain, ParamId, PerParam};

/// Default number of autocorrelation lags reported by
/// [`chain_diagnostics`].
pub const DEFAULT_ACF_LAGS: usize = 50;

/// Default number of histogram bins per parameter.
pub const DEFAULT_HISTOGRAM_BINS: usize = 40;

/// Equal-width histogram over the kept samples of one parameter.
#[derive(Debug, Clone, Serialize)]
pub struct Histogram {
    /// Midpoints of the bins, ascending.
    pub centers: Vec<f64>,
    /// Sample counts per bin; sums to the chain length.
    pub counts: Vec<u64>,
    /// Left edge of the first bin.
    pub lower: f64,
    /// Right edge of the last bin.
    pub upper: f64,
}

/// Diagnostics for one scalar parameter trace.
#[derive(Debug, Clone, Serialize)]
pub struct SeriesDiagnostics {
    /// Posterior mean of the kept samples.
    pub mean: f64,
    /// Posterior standard deviation (denominator `n - 1`).
    pub sd: f64,
    /// Autocorrelation at lags `1..=max_lag`; empty when the trace is
    /// constant (autocorrelation undefined).
    pub acf: Vec<f64>,
    /// True when every kept sample is identical, e.g. a stuck sampler.
    pub degenerate: bool,
    /// Histogram of the kept samples.
    pub histogram: Histogram,
}

/// Full diagnostic bundle for a chain.
#[derive(Debug, Clone, Serialize)]
pub struct Diagnostics {
    /// Overall acceptance rate per Metropolis parameter, recomputed from
    /// the per-iteration accept flags.
    pub acceptance_rates: PerParam<f64>,
    /// Per-parameter trace diagnostics in the order
    /// `u*, d*, σ_u², σ_d², p`.
    pub series: Vec<(String, SeriesDiagnostics)>,
    /// Number of kept samples the diagnostics were computed from.
    pub kept: usize,
    /// Whether the adaptive pre-burn-in phase converged.
    pub tuner_converged: bool,
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample autocorrelation at lags `1..=max_lag` using the standard biased
/// denominator (lag-0 autocovariance over the full length).
pub fn autocorrelation(xs: &[f64], max_lag: usize) -> Result<Vec<f64>> {
    let n = xs.len();
    if max_lag >= n {
        return Err(Error::invalid(
            "max_lag",
            format!("lag {max_lag} requires a chain longer than {n} kept samples"),
        ));
    }
    let m = mean(xs);
    let c0 = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n as f64;
    if c0 == 0.0 {
        // Constant trace: autocorrelation is 0/0 at every lag.
        return Ok(Vec::new());
    }
    Ok((1..=max_lag)
        .map(|lag| {
            let c = (0..n - lag)
                .map(|i| (xs[i] - m) * (xs[i + lag] - m))
                .sum::<f64>()
                / n as f64;
            c / c0
        })
        .collect())
}

fn histogram(xs: &[f64], bins: usize) -> Histogram {
    let lower = xs.iter().cloned().fold(f64::INFINITY, f64::min);
    let upper = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if lower == upper {
        // Point mass: one bin centred on the value.
        return Histogram {
            centers: vec![lower],
            counts: vec![xs.len() as u64],
            lower,
            upper,
        };
    }
    let width = (upper - lower) / bins as f64;
    let mut counts = vec![0u64; bins];
    for &x in xs {
        let idx = (((x - lower) / width) as usize).min(bins - 1);
        counts[idx] += 1;
    }
    let centers = (0..bins)
        .map(|i| lower + (i as f64 + 0.5) * width)
        .collect();
    Histogram {
        centers,
        counts,
        lower,
        upper,
    }
}

fn series_diagnostics(xs: &[f64], max_lag: usize, bins: usize) -> Result<SeriesDiagnostics> {
    let n = xs.len();
    let m = mean(xs);
    let var = if n > 1 {
        xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1) as f64
    } else {
        0.0
    };
    let acf = autocorrelation(xs, max_lag)?;
    let degenerate = xs.iter().all(|&x| x == xs[0]);
    Ok(SeriesDiagnostics {
        mean: m,
        sd: var.sqrt(),
        acf,
        degenerate,
        histogram: histogram(xs, bins),
    })
}

/// Computes acceptance rates, per-parameter trace summaries,
/// autocorrelations up to `max_lag`, and histograms for `chain`.
///
/// Errors when the chain is empty or `max_lag` is not below the number of
/// kept samples.
pub fn chain_diagnostics(chain: &Chain, max_lag: usize) -> Result<Diagnostics> {
    if chain.is_empty() {
        return Err(Error::Empty("chain has no kept samples"));
    }
    if max_lag >= chain.len() {
        return Err(Error::invalid(
            "max_lag",
            format!(
                "lag {max_lag} must be below the kept sample count {}",
                chain.len()
            ),
        ));
    }
    let mut rates = PerParam::<f64>::default();
    for param in ParamId::ALL {
        let accepted = chain
            .accept_flags
            .iter()
            .filter(|f| *f.get(param))
            .count() as f64;
        *rates.get_mut(param) = if chain.accept_flags.is_empty() {
            f64::NAN
        } else {
            accepted / chain.accept_flags.len() as f64
        };
    }

    let traces: [(&str, Box<dyn Fn(&crate::mcmc::ThetaSample) -> f64>); 5] = [
        ("u_star", Box::new(|s| s.u_star)),
        ("d_star", Box::new(|s| s.d_star)),
        ("sigma2_u", Box::new(|s| s.sigma2_u)),
        ("sigma2_d", Box::new(|s| s.sigma2_d)),
        ("p", Box::new(|s| s.p)),
    ];
    let mut series = Vec::with_capacity(traces.len());
    for (name, extract) in traces {
        let xs: Vec<f64> = chain.samples.iter().map(&extract).collect();
        series.push((
            name.to_string(),
            series_diagnostics(&xs, max_lag, DEFAULT_HISTOGRAM_BINS)?,
        ));
    }
    Ok(Diagnostics {
        acceptance_rates: rates,
        series,
        kept: chain.len(),
        tuner_converged: chain.tuner_converged,
    })
}
