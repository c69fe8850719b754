//! Chain serialization: CSV export of the kept samples and the matching
//! reader, so downstream commands can price from a previously saved chain.
//!
//! Floats are written with Rust's shortest-round-trip `Display`, so a
//! write/read cycle reproduces the samples bit for bit.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::mcmc::{Chain, ThetaSample};

/// Column header of the chain CSV.
pub const CHAIN_CSV_HEADER: &str = "iteration,u_star,d_star,sigma2_u,sigma2_d,p";

/// Writes the kept samples of `chain` as CSV to `out`.
///
/// The `iteration` column is the original sweep index of each kept sample
/// (`burn_in + k·thin`), so thinning is visible in the file.
pub fn write_chain_csv<W: Write>(chain: &Chain, out: &mut W) -> Result<()> {
    writeln!(out, "{CHAIN_CSV_HEADER}")?;
    for (k, s) in chain.samples.iter().enumerate() {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            chain.kept_iteration(k),
            s.u_star,
            s.d_star,
            s.sigma2_u,
            s.sigma2_d,
            s.p
        )?;
    }
    Ok(())
}

/// Writes the chain CSV to a file path, creating or truncating it.
pub fn write_chain_csv_path<P: AsRef<Path>>(chain: &Chain, path: P) -> Result<()> {
    let mut file = File::create(path)?;
    write_chain_csv(chain, &mut file)
}

/// Reads parameter samples back from a chain CSV produced by
/// [`write_chain_csv`].
///
/// Only the five parameter columns are recovered; sampler bookkeeping
/// (proposal variances, acceptance flags) is not stored in the CSV. Errors
/// carry the path and 1-based line number of the offending row.
pub fn read_theta_samples_csv<P: AsRef<Path>>(path: P) -> Result<Vec<ThetaSample>> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)?;
    let headers = reader.headers()?.clone();
    let expected: Vec<&str> = CHAIN_CSV_HEADER.split(',').collect();
    let got: Vec<&str> = headers.iter().collect();
    if got != expected {
        return Err(Error::Series {
            path: path.to_path_buf(),
            line: 1,
            reason: format!("unexpected header {got:?}, expected {expected:?}"),
        });
    }
    let mut samples = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let line = (idx + 2) as u64; // 1-based, after the header
        let record = record?;
        let field = |i: usize, name: &str| -> Result<f64> {
            record
                .get(i)
                .ok_or_else(|| Error::Series {
                    path: path.to_path_buf(),
                    line,
                    reason: format!("missing column `{name}`"),
                })?
                .trim()
                .parse::<f64>()
                .map_err(|e| Error::Series {
                    path: path.to_path_buf(),
                    line,
                    reason: format!("column `{name}` is not a number: {e}"),
                })
        };
        samples.push(ThetaSample {
            u_star: field(1, "u_star")?,
            d_star: field(2, "d_star")?,
            sigma2_u: field(3, "sigma2_u")?,
            sigma2_d: field(4, "sigma2_d")?,
            p: field(5, "p")?,
        });
    }
    Ok(samples)
}
