//! File formats: distributions as `value,weight` CSV, samples as one
//! positive real per line, score reports as `forecaster,n,mean_score` CSV.

use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use serde::Deserialize;

use crate::dist::{DiscreteDistribution, Sample};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::scoring::ScoreReport;

#[derive(Deserialize)]
struct Row {
    value: f64,
    weight: f64,
}

/// Reads a `value,weight` CSV (header required).
pub fn read_distribution<T: Scalar, R: Read>(input: R) -> Result<DiscreteDistribution<T>> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let headers = reader.headers().map_err(|e| Error::Parse(e.to_string()))?;
    if headers.len() != 2 || &headers[0] != "value" || &headers[1] != "weight" {
        return Err(Error::Parse(format!(
            "distribution header must be `value,weight`, found `{}`",
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let (mut support, mut weights) = (Vec::new(), Vec::new());
    for (i, row) in reader.deserialize::<Row>().enumerate() {
        let row = row.map_err(|e| Error::Parse(format!("distribution row {}: {e}", i + 1)))?;
        support.push(T::lit(row.value));
        weights.push(T::lit(row.weight));
    }
    DiscreteDistribution::new(support, weights)
}

/// Reads one positive real per line; blank lines are skipped.
pub fn read_sample<T: Scalar, R: Read>(input: R) -> Result<Sample<T>> {
    let mut values = Vec::new();
    for (i, line) in BufReader::new(input).lines().enumerate() {
        let line = line.map_err(|e| Error::Parse(e.to_string()))?;
        let text = line.trim();
        if text.is_empty() {
            continue;
        }
        let v: f64 = text
            .parse()
            .map_err(|_| Error::Parse(format!("sample line {}: `{text}` is not a number", i + 1)))?;
        values.push(T::lit(v));
    }
    Sample::new(values, None)
}

pub fn read_distribution_file<T: Scalar>(path: &Path) -> Result<DiscreteDistribution<T>> {
    read_distribution(open(path)?)
}

pub fn read_sample_file<T: Scalar>(path: &Path) -> Result<Sample<T>> {
    read_sample(open(path)?)
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

/// Writes a `value,weight` CSV.
pub fn write_distribution<T: Scalar, W: Write>(dist: &DiscreteDistribution<T>, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let err = |e: csv::Error| Error::Parse(e.to_string());
    w.write_record(["value", "weight"]).map_err(err)?;
    for (x, p) in dist.iter() {
        w.write_record([x.to_string(), p.to_string()]).map_err(err)?;
    }
    w.flush().map_err(|e| Error::Parse(e.to_string()))
}

/// Writes `forecaster,n,mean_score` rows in the given order.
pub fn write_score_reports<T: Scalar, W: Write>(reports: &[ScoreReport<T>], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let err = |e: csv::Error| Error::Parse(e.to_string());
    w.write_record(["forecaster", "n", "mean_score"]).map_err(err)?;
    for r in reports {
        w.write_record([r.forecaster.clone(), r.n.to_string(), r.mean_score.to_string()])
            .map_err(err)?;
    }
    w.flush().map_err(|e| Error::Parse(e.to_string()))
}
