use std::fs::File;
use std::path::Path;

use super::ExperimentRecord;
use crate::error::{invalid, Error, Result};

/// Exact header line of experiment CSV files.
pub const CSV_HEADER: [&str; 6] = ["epsilon", "alpha", "err_cur", "err_svd", "pred_cur", "pred_svd"];

// `{:e}` prints the shortest decimal that parses back to the same f64.
fn fmt(x: f64) -> String {
    format!("{x:e}")
}

fn csv_err(path: &Path, source: csv::Error) -> Error {
    Error::Csv { path: path.to_path_buf(), source }
}

/// Writes `records` with the fixed header; `alpha` is left empty when absent.
pub fn write_csv(records: &[ExperimentRecord], path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
    write_records(records, file).map_err(|e| csv_err(path, e))
}

pub(crate) fn write_records<W: std::io::Write>(records: &[ExperimentRecord], sink: W) -> std::result::Result<(), csv::Error> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(sink);
    w.write_record(CSV_HEADER)?;
    for r in records {
        w.write_record([
            fmt(r.epsilon),
            r.alpha.map(fmt).unwrap_or_default(),
            fmt(r.err_cur),
            fmt(r.err_svd),
            fmt(r.pred_cur),
            fmt(r.pred_svd),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Parses a file written by [`write_csv`].
pub fn read_csv(path: &Path) -> Result<Vec<ExperimentRecord>> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    let header = rdr.headers().map_err(|e| csv_err(path, e))?.clone();
    if header.iter().ne(CSV_HEADER.iter().copied()) {
        return Err(invalid(format!("{}: unexpected header {:?}", path.display(), header)));
    }
    let parse = |s: &str| -> Result<f64> {
        s.parse::<f64>().map_err(|_| invalid(format!("{}: bad number {s:?}", path.display())))
    };
    let mut out = Vec::new();
    for row in rdr.records() {
        let row = row.map_err(|e| csv_err(path, e))?;
        let alpha = match &row[1] {
            "" => None,
            s => Some(parse(s)?),
        };
        out.push(ExperimentRecord {
            epsilon: parse(&row[0])?,
            alpha,
            err_cur: parse(&row[2])?,
            err_svd: parse(&row[3])?,
            pred_cur: parse(&row[4])?,
            pred_svd: parse(&row[5])?,
        });
    }
    Ok(out)
}
