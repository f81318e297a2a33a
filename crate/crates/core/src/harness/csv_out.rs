//! CSV output of sweep results.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::fusion::TrialMetrics;

use super::run::SweepPoint;

pub const CSV_COLUMNS: [&str; 8] = [
    "sweep_var",
    "q_fa",
    "q_d",
    "mu_detection_rate",
    "honest_exclusion_rate",
    "mean_estimated_t",
    "trials",
    "seed",
];

/// Marker for rates with an empty denominator.
pub const UNDEFINED: &str = "NA";

fn fmt12(v: f64) -> String {
    format!("{v:.11e}")
}

fn fmt_rate(v: Option<f64>) -> String {
    v.map_or_else(|| UNDEFINED.to_string(), fmt12)
}

/// Writes one header row and one row per point.
pub fn write_csv<W: Write>(points: &[SweepPoint], seed: u64, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_COLUMNS)?;
    for p in points {
        let m = &p.metrics;
        w.write_record([
            fmt12(p.value),
            fmt_rate(m.q_fa),
            fmt_rate(m.q_d),
            fmt_rate(m.mu_detection_rate),
            fmt_rate(m.honest_exclusion_rate),
            fmt_rate(m.mean_estimated_t),
            m.trials.to_string(),
            seed.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn emit_csv(points: &[SweepPoint], seed: u64, path: &Path) -> Result<()> {
    write_csv(points, seed, File::create(path)?)
}

/// Parses a file written by [`write_csv`] back into points and the seed column.
pub fn read_csv<R: std::io::Read>(input: R) -> Result<Vec<(SweepPoint, u64)>> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers()?.clone();
    if header.iter().ne(CSV_COLUMNS) {
        return Err(Error::Config(format!("unexpected CSV header {header:?}")));
    }
    let num = |s: &str| -> Result<f64> { s.parse().map_err(|_| Error::Config(format!("bad number {s:?}"))) };
    let rate = |s: &str| -> Result<Option<f64>> {
        if s == UNDEFINED {
            Ok(None)
        } else {
            num(s).map(Some)
        }
    };
    let int = |s: &str| -> Result<u64> { s.parse().map_err(|_| Error::Config(format!("bad integer {s:?}"))) };
    r.records()
        .map(|rec| {
            let rec = rec?;
            Ok((
                SweepPoint {
                    value: num(&rec[0])?,
                    metrics: TrialMetrics {
                        q_fa: rate(&rec[1])?,
                        q_d: rate(&rec[2])?,
                        mu_detection_rate: rate(&rec[3])?,
                        honest_exclusion_rate: rate(&rec[4])?,
                        mean_estimated_t: rate(&rec[5])?,
                        trials: int(&rec[6])?,
                    },
                },
                int(&rec[7])?,
            ))
        })
        .collect()
}
