//! One CSV row per convergence measurement.
//!
//! Every estimate is stored as (ln |value|, sign) so that rows round-trip
//! losslessly through `Display`/`parse` even for values far outside f64's
//! linear range. Columns that do not apply to a method (for example `chi`
//! on a quasi-Monte-Carlo row) are left empty.

use std::fmt::Write as _;

/// Fixed column order shared by the writer and the parser.
pub const CSV_HEADER: &str = "family,seed,method,chi,g,n_samples,estimate_log,estimate_sign,\
reference_log,reference_sign,relative_error,elapsed_seconds,max_bond_reached,discarded_weight";

const N_COLUMNS: usize = 14;

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceRecord {
    pub family: String,
    pub seed: u64,
    /// "tn", "qmc", "recursion", or "brute".
    pub method: String,
    pub chi: Option<usize>,
    pub g: Option<usize>,
    pub n_samples: Option<u64>,
    pub estimate_log: f64,
    pub estimate_sign: i8,
    pub reference_log: f64,
    pub reference_sign: i8,
    pub relative_error: f64,
    pub elapsed_seconds: f64,
    pub max_bond_reached: Option<usize>,
    pub discarded_weight: Option<f64>,
}

fn opt_cell<T: std::fmt::Display>(v: &Option<T>) -> String {
    v.as_ref().map(|x| x.to_string()).unwrap_or_default()
}

impl ConvergenceRecord {
    pub fn to_csv_row(&self) -> String {
        let mut row = String::new();
        // f64 Display picks the shortest representation that parses back to
        // the same bits, so the file is a faithful archive of the run.
        let _ = write!(
            row,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.family,
            self.seed,
            self.method,
            opt_cell(&self.chi),
            opt_cell(&self.g),
            opt_cell(&self.n_samples),
            self.estimate_log,
            self.estimate_sign,
            self.reference_log,
            self.reference_sign,
            self.relative_error,
            self.elapsed_seconds,
            opt_cell(&self.max_bond_reached),
            opt_cell(&self.discarded_weight),
        );
        row
    }

    pub fn parse_csv_row(line: &str) -> Result<ConvergenceRecord, String> {
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != N_COLUMNS {
            return Err(format!("expected {N_COLUMNS} columns, found {}", cells.len()));
        }
        fn req<T: std::str::FromStr>(cell: &str, name: &str) -> Result<T, String> {
            cell.parse().map_err(|_| format!("column `{name}`: cannot parse `{cell}`"))
        }
        fn opt<T: std::str::FromStr>(cell: &str, name: &str) -> Result<Option<T>, String> {
            if cell.is_empty() { Ok(None) } else { req(cell, name).map(Some) }
        }
        Ok(ConvergenceRecord {
            family: cells[0].to_string(),
            seed: req(cells[1], "seed")?,
            method: cells[2].to_string(),
            chi: opt(cells[3], "chi")?,
            g: opt(cells[4], "g")?,
            n_samples: opt(cells[5], "n_samples")?,
            estimate_log: req(cells[6], "estimate_log")?,
            estimate_sign: req(cells[7], "estimate_sign")?,
            reference_log: req(cells[8], "reference_log")?,
            reference_sign: req(cells[9], "reference_sign")?,
            relative_error: req(cells[10], "relative_error")?,
            elapsed_seconds: req(cells[11], "elapsed_seconds")?,
            max_bond_reached: opt(cells[12], "max_bond_reached")?,
            discarded_weight: opt(cells[13], "discarded_weight")?,
        })
    }
}

/// Renders the header plus one line per record.
pub fn to_csv(records: &[ConvergenceRecord]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&r.to_csv_row());
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> ConvergenceRecord {
        ConvergenceRecord {
            family: "polynomial-power".into(),
            seed: 3,
            method: "tn".into(),
            chi: Some(8),
            g: Some(10),
            n_samples: None,
            estimate_log: 41.25 + 0.1 + 0.2,
            estimate_sign: 1,
            reference_log: 41.55000000000001,
            reference_sign: 1,
            relative_error: 3.3306690738754696e-16,
            elapsed_seconds: 0.0271828,
            max_bond_reached: Some(8),
            discarded_weight: Some(0.0),
        }
    }

    #[test]
    fn rows_round_trip_bit_exactly() {
        let r = sample();
        let back = ConvergenceRecord::parse_csv_row(&r.to_csv_row()).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn empty_cells_become_none() {
        let mut r = sample();
        r.chi = None;
        r.max_bond_reached = None;
        r.discarded_weight = None;
        r.method = "recursion".into();
        let row = r.to_csv_row();
        assert!(row.contains(",recursion,,10,"));
        assert_eq!(ConvergenceRecord::parse_csv_row(&row).unwrap(), r);
    }

    #[test]
    fn zero_values_round_trip_through_infinite_logs() {
        let mut r = sample();
        r.estimate_log = f64::NEG_INFINITY;
        r.estimate_sign = 0;
        let back = ConvergenceRecord::parse_csv_row(&r.to_csv_row()).unwrap();
        assert_eq!(back.estimate_log, f64::NEG_INFINITY);
        assert_eq!(back.estimate_sign, 0);
    }

    #[test]
    fn header_matches_the_column_count() {
        assert_eq!(CSV_HEADER.split(',').count(), N_COLUMNS);
        let row = sample().to_csv_row();
        assert_eq!(row.split(',').count(), N_COLUMNS);
    }

    #[test]
    fn malformed_rows_are_rejected_with_the_column_name() {
        let row = sample().to_csv_row();
        let truncated: Vec<&str> = row.split(',').take(5).collect();
        assert!(ConvergenceRecord::parse_csv_row(&truncated.join(",")).is_err());
        let bad = row.replacen("tn", "tn,extra", 1);
        assert!(ConvergenceRecord::parse_csv_row(&bad).is_err());
        let unparsable = row.replace("0.0271828", "fast");
        let err = ConvergenceRecord::parse_csv_row(&unparsable).unwrap_err();
        assert!(err.contains("elapsed_seconds"), "{err}");
    }
}
