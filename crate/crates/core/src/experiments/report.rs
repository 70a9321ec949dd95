use std::io::{BufRead, BufWriter, Write};
use std::path::Path;

use crate::numeric::format_g17;
use crate::oracle::mean_and_se;
use crate::{Error, Result};

pub const CSV_HEADER: &str = "experiment,epsilon,trial,true_value,naive,unbiased";

/// One row of experiment output.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub experiment: String,
    pub epsilon: f64,
    pub trial: u64,
    pub true_value: f64,
    pub naive: f64,
    pub unbiased: f64,
}

/// Noise parameters of a run, written as the leading comment line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunMetadata {
    pub p: f64,
    pub sensitivity: u32,
    pub seed: u64,
}

impl RunMetadata {
    pub fn comment_line(&self) -> String {
        format!(
            "# p={} sensitivity={} seed={}",
            format_g17(self.p),
            self.sensitivity,
            self.seed
        )
    }
}

/// Writes the optional metadata comment, the header and one row per record.
pub fn write_csv<W: Write>(
    out: W,
    metadata: Option<&RunMetadata>,
    records: &[TrialRecord],
) -> std::io::Result<()> {
    let mut out = BufWriter::new(out);
    if let Some(m) = metadata {
        writeln!(out, "{}", m.comment_line())?;
    }
    writeln!(out, "{CSV_HEADER}")?;
    for r in records {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            r.experiment,
            format_g17(r.epsilon),
            r.trial,
            format_g17(r.true_value),
            format_g17(r.naive),
            format_g17(r.unbiased)
        )?;
    }
    out.flush()
}

/// [`write_csv`] to a file.
pub fn emit_csv(
    path: impl AsRef<Path>,
    metadata: Option<&RunMetadata>,
    records: &[TrialRecord],
) -> Result<()> {
    let path = path.as_ref();
    let io_err = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let file = std::fs::File::create(path).map_err(io_err)?;
    write_csv(file, metadata, records).map_err(io_err)
}

/// Reads records written by [`emit_csv`], skipping `#` lines.
pub fn read_csv(path: impl AsRef<Path>) -> Result<Vec<TrialRecord>> {
    let path = path.as_ref();
    let io_err = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let file = std::fs::File::open(path).map_err(io_err)?;
    let mut records = Vec::new();
    let mut header_seen = false;
    for (i, line) in std::io::BufReader::new(file).lines().enumerate() {
        let line = line.map_err(io_err)?;
        let parse_err = |message: String| Error::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            message,
        };
        if line.starts_with('#') {
            continue;
        }
        if !header_seen {
            if line != CSV_HEADER {
                return Err(parse_err(format!("expected header {CSV_HEADER:?}")));
            }
            header_seen = true;
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 6 {
            return Err(parse_err(format!(
                "expected 6 fields, found {}",
                fields.len()
            )));
        }
        let num = |s: &str| {
            s.parse::<f64>()
                .map_err(|_| parse_err(format!("invalid number {s:?}")))
        };
        records.push(TrialRecord {
            experiment: fields[0].to_string(),
            epsilon: num(fields[1])?,
            trial: fields[2]
                .parse()
                .map_err(|_| parse_err(format!("invalid trial index {:?}", fields[2])))?,
            true_value: num(fields[3])?,
            naive: num(fields[4])?,
            unbiased: num(fields[5])?,
        });
    }
    Ok(records)
}

/// Monte Carlo means and standard errors of both estimators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub true_value: f64,
    pub naive_mean: f64,
    pub naive_se: f64,
    pub unbiased_mean: f64,
    pub unbiased_se: f64,
}

impl Summary {
    /// `|unbiased mean - truth|` in standard errors.
    pub fn unbiased_z(&self) -> f64 {
        (self.unbiased_mean - self.true_value).abs() / self.unbiased_se
    }

    pub fn naive_z(&self) -> f64 {
        (self.naive_mean - self.true_value).abs() / self.naive_se
    }
}

/// Summarizes the records of one experiment name. Returns `None` when no
/// record carries that name.
pub fn summarize(records: &[TrialRecord], experiment: &str) -> Option<Summary> {
    let rows: Vec<&TrialRecord> = records
        .iter()
        .filter(|r| r.experiment == experiment)
        .collect();
    let first = rows.first()?;
    let naive: Vec<f64> = rows.iter().map(|r| r.naive).collect();
    let unbiased: Vec<f64> = rows.iter().map(|r| r.unbiased).collect();
    let (naive_mean, naive_se) = mean_and_se(&naive);
    let (unbiased_mean, unbiased_se) = mean_and_se(&unbiased);
    Some(Summary {
        true_value: first.true_value,
        naive_mean,
        naive_se,
        unbiased_mean,
        unbiased_se,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_stream_is_header_only() {
        let mut buf = Vec::new();
        write_csv(&mut buf, None, &[]).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), format!("{CSV_HEADER}\n"));
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.csv");
        let records: Vec<TrialRecord> = (0..50)
            .map(|i| TrialRecord {
                experiment: "entropy".into(),
                epsilon: 0.1 * i as f64,
                trial: i,
                true_value: std::f64::consts::PI * i as f64,
                naive: 1.0 / (i as f64 + 3.0),
                unbiased: -1e-300 * i as f64,
            })
            .collect();
        let meta = RunMetadata {
            p: (-1.0f64).exp(),
            sensitivity: 1,
            seed: 9,
        };
        emit_csv(&path, Some(&meta), &records).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("# p=0.36787944117144233 sensitivity=1 seed=9\n"));
        assert!(!text.contains('\r'));
        let back = read_csv(&path).unwrap();
        assert_eq!(back.len(), records.len());
        for (a, b) in back.iter().zip(&records) {
            assert_eq!(a.true_value.to_bits(), b.true_value.to_bits());
            assert_eq!(a.naive.to_bits(), b.naive.to_bits());
            assert_eq!(a.unbiased.to_bits(), b.unbiased.to_bits());
            assert_eq!(a.epsilon.to_bits(), b.epsilon.to_bits());
        }
    }

    #[test]
    fn io_failure_names_path() {
        let err = emit_csv("/nonexistent-dir/x.csv", None, &[]).unwrap_err();
        assert!(err.to_string().contains("/nonexistent-dir/x.csv"));
    }
}
