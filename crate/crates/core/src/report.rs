//! Report files. Stored numbers keep full precision as unit-interval
//! fractions; only [`percent`] rounds, for display.

use crate::evaluator::{DatasetReport, GLOBAL_HEADERS};

pub const PER_SEQUENCE_HEADER: [&str; 10] = [
    "sequence",
    "object_id",
    "matched_id",
    "J_mean",
    "J_recall",
    "J_decay",
    "F_mean",
    "F_recall",
    "F_decay",
    "JF_mean",
];

pub const PER_SEQUENCE_FILE: &str = "per-sequence.csv";
pub const GLOBAL_FILE: &str = "global.csv";
pub const JSON_FILE: &str = "report.json";

/// Rounds half away from zero to `decimals` places.
pub fn round_half_away(x: f64, decimals: i32) -> f64 {
    let scale = 10f64.powi(decimals);
    (x * scale).round() / scale
}

/// A fraction as a percentage with one decimal, e.g. `0.4125 -> "41.3"`.
pub fn percent(x: f64) -> String {
    let v = round_half_away(x * 100.0, 1);
    // avoid "-0.0"
    let v = if v == 0.0 { 0.0 } else { v };
    format!("{v:.1}")
}

fn write_csv(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(&r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
}

/// One row per ground-truth object, ordered by sequence then object id.
pub fn per_sequence_csv(report: &DatasetReport) -> String {
    let rows = report.sequences.iter().flat_map(|s| {
        s.rows.iter().map(move |r| {
            vec![
                s.sequence.clone(),
                r.object_id.to_string(),
                r.matched_id.map(|m| m.to_string()).unwrap_or_default(),
                r.j.mean.to_string(),
                r.j.recall.to_string(),
                r.j.decay.to_string(),
                r.f.mean.to_string(),
                r.f.recall.to_string(),
                r.f.decay.to_string(),
                r.jf_mean.to_string(),
            ]
        })
    });
    write_csv(&PER_SEQUENCE_HEADER, rows)
}

pub fn global_csv(report: &DatasetReport) -> String {
    let row = report.global.columns().iter().map(f64::to_string).collect();
    write_csv(&GLOBAL_HEADERS, [row])
}

pub fn report_json(report: &DatasetReport) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("plain data");
    s.push('\n');
    s
}

/// The seven headline columns as a two-line table in percent.
pub fn global_table(report: &DatasetReport) -> String {
    let header = GLOBAL_HEADERS.join("\t");
    let values: Vec<String> = report.global.columns().iter().map(|&v| percent(v)).collect();
    format!("{header}\n{}\n", values.join("\t"))
}
