//! Text and CSV renderings of a [`Report`].

use std::fmt::Write as _;

use crate::runner::{Report, Row};

/// Column names of the CSV output, version 1.
pub const CSV_COLUMNS: [&str; 6] = ["experiment", "case_id", "quantity", "value", "bound", "verdict"];

fn number(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.9e}")
    }
}

fn all_rows(report: &Report) -> Vec<Row> {
    let mut rows = Vec::new();
    for e in &report.experiments {
        rows.extend(e.rows.iter().cloned());
        rows.push(e.summary_row());
    }
    rows
}

/// One line per row plus one summary row per experiment; LF line endings,
/// strings quoted.
pub fn to_csv(report: &Report) -> String {
    let mut w = csv::WriterBuilder::new()
        .quote_style(csv::QuoteStyle::NonNumeric)
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(CSV_COLUMNS).expect("in-memory write");
    for r in all_rows(report) {
        w.write_record([
            r.experiment.as_str(),
            r.case_id.as_str(),
            r.quantity.as_str(),
            &number(r.value),
            &number(r.bound),
            &r.status.to_string(),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flush to memory")).expect("utf-8 fields")
}

/// Aligned table followed by a per-experiment verdict and notes.
pub fn to_text(report: &Report) -> String {
    let rows: Vec<[String; 6]> = all_rows(report)
        .into_iter()
        .map(|r| [r.experiment, r.case_id, r.quantity, number(r.value), number(r.bound), r.status.to_string()])
        .collect();
    let mut width = CSV_COLUMNS.map(str::len);
    for r in &rows {
        for (w, cell) in width.iter_mut().zip(r) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let mut out = String::new();
    let line = |out: &mut String, cells: [&str; 6]| {
        let mut s = String::new();
        for (i, (cell, w)) in cells.iter().zip(width).enumerate() {
            let pad = w - cell.chars().count();
            // numbers right-aligned, text left-aligned
            if i == 3 || i == 4 {
                s.push_str(&" ".repeat(pad));
                s.push_str(cell);
            } else {
                s.push_str(cell);
                s.push_str(&" ".repeat(pad));
            }
            if i < 5 {
                s.push_str("  ");
            }
        }
        out.push_str(s.trim_end());
        out.push('\n');
    };
    line(&mut out, CSV_COLUMNS);
    for r in &rows {
        line(&mut out, [&r[0], &r[1], &r[2], &r[3], &r[4], &r[5]]);
    }
    if !report.experiments.is_empty() {
        out.push('\n');
    }
    for e in &report.experiments {
        let _ = writeln!(
            out,
            "{}: {} rows, {} failed, {} errors: {}",
            e.label,
            e.rows.len(),
            e.failures(),
            e.errors(),
            e.status()
        );
        for n in &e.notes {
            let _ = writeln!(out, "  {n}");
        }
    }
    out
}
