//! CSV reports and greyscale image dumps.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use crate::engine::record::{format_wallet, parse_wallet};

use super::runner::MatchReport;
use super::HarnessError;

pub const CSV_HEADER: [&str; 7] = [
    "seed",
    "match_rate",
    "cost_to_go",
    "mean_abs_err_x",
    "mean_abs_err_y",
    "episodes",
    "wallet",
];

/// One parsed CSV line.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvRow {
    pub seed: u64,
    pub match_rate: f64,
    pub cost_to_go: f64,
    pub mean_abs_err_x: f64,
    pub mean_abs_err_y: f64,
    pub episodes: u32,
    pub wallet: f64,
}

fn csv_err(e: csv::Error) -> HarnessError {
    HarnessError::Format(e.to_string())
}

pub fn write_csv<W: Write>(report: &MatchReport, out: W) -> Result<(), HarnessError> {
    let mut wtr = csv::Writer::from_writer(out);
    wtr.write_record(CSV_HEADER).map_err(csv_err)?;
    for r in &report.runs {
        wtr.write_record([
            r.seed.to_string(),
            r.match_rate.to_string(),
            r.cost_to_go.to_string(),
            r.mean_abs_err_x.to_string(),
            r.mean_abs_err_y.to_string(),
            r.episodes.to_string(),
            format_wallet(r.wallet),
        ])
        .map_err(csv_err)?;
    }
    wtr.flush().map_err(|e| HarnessError::Format(e.to_string()))?;
    Ok(())
}

pub fn report_csv(report: &MatchReport) -> String {
    let mut buf = Vec::new();
    write_csv(report, &mut buf).expect("writing to memory cannot fail");
    String::from_utf8(buf).expect("csv output is utf-8")
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<CsvRow>, HarnessError> {
    let mut rdr = csv::Reader::from_reader(input);
    let headers = rdr.headers().map_err(csv_err)?;
    if headers.iter().ne(CSV_HEADER) {
        return Err(HarnessError::Format(format!("unexpected header {headers:?}")));
    }
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(csv_err)?;
        let field = |i: usize| rec.get(i).unwrap_or("");
        let num = |i: usize| {
            field(i)
                .parse::<f64>()
                .map_err(|_| HarnessError::Format(format!("bad {} in {rec:?}", CSV_HEADER[i])))
        };
        rows.push(CsvRow {
            seed: field(0)
                .parse()
                .map_err(|_| HarnessError::Format(format!("bad seed in {rec:?}")))?,
            match_rate: num(1)?,
            cost_to_go: num(2)?,
            mean_abs_err_x: num(3)?,
            mean_abs_err_y: num(4)?,
            episodes: field(5)
                .parse()
                .map_err(|_| HarnessError::Format(format!("bad episodes in {rec:?}")))?,
            wallet: parse_wallet(field(6)).map_err(HarnessError::Format)?,
        });
    }
    Ok(rows)
}

/// Write `bytes` to `path`, naming the path on failure.
pub fn write_file(path: &Path, bytes: &[u8]) -> Result<(), HarnessError> {
    fs::write(path, bytes).map_err(|source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn export_csv(report: &MatchReport, path: &Path) -> Result<(), HarnessError> {
    write_file(path, report_csv(report).as_bytes())
}

/// Write an already-encoded greyscale image.
pub fn export_ppm(image: &[u8], path: &Path) -> Result<(), HarnessError> {
    write_file(path, image)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_report_is_header_only() {
        assert_eq!(
            report_csv(&MatchReport::default()),
            "seed,match_rate,cost_to_go,mean_abs_err_x,mean_abs_err_y,episodes,wallet\n"
        );
    }
}
