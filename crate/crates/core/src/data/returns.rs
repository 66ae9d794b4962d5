use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// Raw exchange rates and the derived mean-corrected percentage returns
/// `y_t = 100 (log(r_t / r_{t-1}) - mean of the log returns)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ReturnSeries {
    pub rates: Vec<f64>,
    pub y: Vec<f64>,
}

pub fn mean_corrected_returns(rates: &[f64]) -> Result<ReturnSeries> {
    if rates.len() < 2 {
        return Err(Error::InvalidSize(format!("need at least two rates, got {}", rates.len())));
    }
    if let Some((i, r)) = rates.iter().enumerate().find(|(_, r)| !(**r > 0.0 && r.is_finite())) {
        return Err(Error::InvalidModel(format!("rate {} is {r}, expected a positive number", i + 1)));
    }
    let log_returns: Vec<f64> = rates.windows(2).map(|w| (w[1] / w[0]).ln()).collect();
    let mean = log_returns.iter().sum::<f64>() / log_returns.len() as f64;
    let y = log_returns.iter().map(|l| 100.0 * (l - mean)).collect();
    Ok(ReturnSeries { rates: rates.to_vec(), y })
}

/// Reads the `rate` column of a CSV file with a header row.
pub fn read_rates<R: Read>(input: R) -> Result<Vec<f64>> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let col = reader
        .headers()?
        .iter()
        .position(|h| h == "rate")
        .ok_or_else(|| Error::MissingColumn("rate".into()))?;
    reader
        .records()
        .map(|rec| {
            let rec = rec?;
            let cell = rec.get(col).unwrap_or("");
            cell.parse::<f64>().map_err(|_| Error::Parse {
                row: rec.position().map_or(0, |p| p.line() as usize),
                column: "rate".into(),
                value: cell.into(),
            })
        })
        .collect()
}

pub fn load_returns(path: impl AsRef<Path>) -> Result<ReturnSeries> {
    mean_corrected_returns(&read_rates(std::fs::File::open(path.as_ref())?)?)
}

/// Writes `t,y` with `t` starting at 1.
pub fn write_returns_csv<W: Write>(series: &ReturnSeries, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t", "y"])?;
    for (t, y) in series.y.iter().enumerate() {
        w.write_record([(t + 1).to_string(), format!("{y:?}")])?;
    }
    w.flush()?;
    Ok(())
}
