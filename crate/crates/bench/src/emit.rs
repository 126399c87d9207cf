//! CSV and markdown renderings of measurement rows and verdicts.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use crate::lengths::{self, LengthRow};
use crate::timings::{self, TimingRow};
use crate::{messages as m, BenchReport, Verdict};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Markdown,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(Format::Csv),
            "md" | "markdown" => Ok(Format::Markdown),
            other => Err(format!("unknown format {other:?}; expected csv or md")),
        }
    }
}

fn csv_table<const N: usize>(header: [&str; N], rows: impl IntoIterator<Item = [String; N]>) -> String {
    let mut writer = csv::Writer::from_writer(Vec::new());
    // Writing into a Vec cannot fail.
    writer.write_record(header).expect("in-memory csv");
    for row in rows {
        writer.write_record(&row).expect("in-memory csv");
    }
    String::from_utf8(writer.into_inner().expect("in-memory csv")).expect("csv of UTF-8 fields")
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

fn ms(ns: f64) -> String {
    format!("{:.3}", ns / 1e6)
}

pub fn lengths_csv(rows: &[LengthRow]) -> String {
    csv_table(
        ["standard", "message", "measured_bytes", "paper_bytes"],
        rows.iter().map(|r| {
            [r.standard.to_string(), r.message.to_string(), r.measured_bytes.to_string(), opt(r.paper_bytes)]
        }),
    )
}

pub fn timings_csv(rows: &[TimingRow]) -> String {
    csv_table(
        ["standard", "message", "phase", "samples", "median_ms", "p10_ms", "p90_ms", "paper_ms"],
        rows.iter().map(|r| {
            [
                r.standard.to_string(),
                r.message.to_string(),
                r.phase.to_string(),
                r.samples_ns.len().to_string(),
                ms(r.median_ns()),
                ms(r.p10_ns() as f64),
                ms(r.p90_ns() as f64),
                opt(r.paper_ms),
            ]
        }),
    )
}

pub fn verdicts_csv(verdicts: &[Verdict]) -> String {
    csv_table(
        ["check", "left", "left_value", "relation", "right", "right_value", "result"],
        verdicts.iter().map(|v| {
            [
                v.name.clone(),
                v.left.label.clone(),
                v.left.display_value(),
                v.relation.to_string(),
                v.right.label.clone(),
                v.right.display_value(),
                if v.passed { "pass" } else { "fail" }.to_string(),
            ]
        }),
    )
}

/// IEEE and ETSI messages that share a table row.
const LENGTH_PAIRS: [(&str, Option<&str>); 5] = [
    (m::EE_ECA_CERT_REQUEST, Some(m::ENROLMENT_REQUEST)),
    (m::ECA_EE_CERT_RESPONSE, Some(m::ENROLMENT_RESPONSE)),
    (m::EE_RA_CERT_REQUEST, Some(m::AUTHORIZATION_REQUEST)),
    (m::RA_EE_CERT_INFO, Some(m::AUTHORIZATION_RESPONSE)),
    (m::ACA_RESPONSE, None),
];

const TIMING_PAIRS: [(&str, Option<&str>); 6] = [
    (m::EE_ECA_CERT_REQUEST, Some(m::ENROLMENT_REQUEST)),
    (m::ECA_EE_CERT_RESPONSE, Some(m::ENROLMENT_RESPONSE)),
    (m::EE_RA_CERT_REQUEST, Some(m::AUTHORIZATION_REQUEST)),
    (m::RA_EE_CERT_INFO_AND_ACA_RESPONSE, Some(m::AUTHORIZATION_RESPONSE)),
    (m::RA_EE_CERT_INFO, None),
    (m::ACA_RESPONSE, None),
];

fn length_cells(row: Option<&LengthRow>) -> String {
    match row {
        Some(r) => format!("{} | {} | {}", r.message, r.measured_bytes, opt(r.paper_bytes)),
        None => " | | ".to_string(),
    }
}

fn timing_cells(row: Option<&TimingRow>) -> String {
    match row {
        Some(r) => format!(
            "{} | {} | {} | {} | {} | {}",
            r.message,
            r.phase,
            ms(r.median_ns()),
            ms(r.p10_ns() as f64),
            ms(r.p90_ns() as f64),
            opt(r.paper_ms)
        ),
        None => " | | | | | ".to_string(),
    }
}

/// Both standards side by side, then the messages without a counterpart.
pub fn lengths_markdown(rows: &[LengthRow]) -> String {
    let mut out = String::from(
        "| IEEE 1609.2.1 | measured (B) | reference (B) | ETSI TS 102 941 | measured (B) | reference (B) |\n\
         |---|---:|---:|---|---:|---:|\n",
    );
    let mut shown = Vec::new();
    for (ieee, etsi) in LENGTH_PAIRS {
        let left = lengths::find(rows, ieee);
        let right = etsi.and_then(|e| lengths::find(rows, e));
        if left.is_none() && right.is_none() {
            continue;
        }
        shown.extend([Some(ieee), etsi].into_iter().flatten());
        let _ = writeln!(out, "| {} | {} |", length_cells(left), length_cells(right));
    }
    let rest: Vec<_> = rows.iter().filter(|r| !shown.contains(&r.message)).collect();
    if !rest.is_empty() {
        out.push_str("\n| standard | other message | measured (B) |\n|---|---|---:|\n");
        for r in rest {
            let _ = writeln!(out, "| {} | {} | {} |", r.standard, r.message, r.measured_bytes);
        }
    }
    out
}

pub fn timings_markdown(rows: &[TimingRow]) -> String {
    let mut out = String::from(
        "| IEEE 1609.2.1 | phase | median (ms) | p10 (ms) | p90 (ms) | reference (ms) \
         | ETSI TS 102 941 | phase | median (ms) | p10 (ms) | p90 (ms) | reference (ms) |\n\
         |---|---|---:|---:|---:|---:|---|---|---:|---:|---:|---:|\n",
    );
    for (ieee, etsi) in TIMING_PAIRS {
        let left = timings::find(rows, ieee);
        let right = etsi.and_then(|e| timings::find(rows, e));
        if left.is_none() && right.is_none() {
            continue;
        }
        let _ = writeln!(out, "| {} | {} |", timing_cells(left), timing_cells(right));
    }
    if let Some(n) = rows.first().map(|r| r.samples_ns.len()) {
        let _ = writeln!(out, "\nMedians over {n} iterations per row.");
    }
    out
}

pub fn verdicts_markdown(verdicts: &[Verdict]) -> String {
    let mut out = String::from("| check | left | | right | result |\n|---|---|---|---|---|\n");
    for v in verdicts {
        let result = if v.passed { "pass" } else { "**fail**" };
        let _ = writeln!(out, "| {} | {} | {} | {} | {} |", v.name, v.left, v.relation, v.right, result);
    }
    out
}

/// Markdown gives every section; CSV gives the verdict table, one row per
/// check.
pub fn render_report(report: &BenchReport, format: Format) -> String {
    match format {
        Format::Csv => verdicts_csv(&report.verdicts),
        Format::Markdown => {
            let mut out = String::from("## Message lengths\n\n");
            out.push_str(&lengths_markdown(&report.lengths));
            if !report.timings.is_empty() {
                out.push_str("\n## Computation times\n\n");
                out.push_str(&timings_markdown(&report.timings));
            }
            out.push_str("\n## Checks\n\n");
            out.push_str(&verdicts_markdown(&report.verdicts));
            out
        }
    }
}

pub fn render_lengths(rows: &[LengthRow], format: Format) -> String {
    match format {
        Format::Csv => lengths_csv(rows),
        Format::Markdown => lengths_markdown(rows),
    }
}

pub fn render_timings(rows: &[TimingRow], format: Format) -> String {
    match format {
        Format::Csv => timings_csv(rows),
        Format::Markdown => timings_markdown(rows),
    }
}

pub fn emit(report: &BenchReport, format: Format, path: &Path) -> std::io::Result<()> {
    std::fs::write(path, render_report(report, format))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{measure_lengths, run_report};
    use v2x_core::transcript::FlowParams;

    #[test]
    fn csv_has_one_line_per_row_plus_header() {
        let rows = measure_lengths(&FlowParams::default()).unwrap();
        let text = lengths_csv(&rows);
        let mut reader = csv::Reader::from_reader(text.as_bytes());
        assert_eq!(reader.headers().unwrap().len(), 4);
        assert_eq!(reader.records().count(), rows.len());
        assert_eq!(text.lines().count(), rows.len() + 1);
    }

    #[test]
    fn markdown_pairs_the_standards() {
        let rows = measure_lengths(&FlowParams::default()).unwrap();
        let text = lengths_markdown(&rows);
        let line = text.lines().find(|l| l.contains(m::EE_ECA_CERT_REQUEST)).unwrap();
        assert!(line.contains(m::ENROLMENT_REQUEST));
        assert!(line.contains("| 151 |") && line.contains("| 424 |"));
        assert!(text.contains(m::CERT_BATCH_ARCHIVE));
    }

    #[test]
    fn re_emitting_a_report_is_byte_identical() {
        let report = run_report(&FlowParams::default(), None, false).unwrap();
        let dir = tempfile::tempdir().unwrap();
        for format in [Format::Csv, Format::Markdown] {
            let (a, b) = (dir.path().join("a"), dir.path().join("b"));
            emit(&report, format, &a).unwrap();
            emit(&report, format, &b).unwrap();
            assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
        }
        let csv = render_report(&report, Format::Csv);
        assert_eq!(csv.lines().count(), report.verdicts.len() + 1);
    }

    #[test]
    fn formats_parse() {
        assert_eq!("md".parse::<Format>().unwrap(), Format::Markdown);
        assert_eq!("csv".parse::<Format>().unwrap(), Format::Csv);
        assert!("json".parse::<Format>().is_err());
    }
}
