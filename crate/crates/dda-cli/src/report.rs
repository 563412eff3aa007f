//! CSV emission: per-epoch training reports, projection tables, and the
//! run summary. Floats print with Rust's shortest-roundtrip formatting, so
//! identical runs emit identical bytes.

use dda_core::classifier::TrainReport;
use dda_core::dataset::DomainTag;
use dda_core::pca::ProjectionRow;

pub fn train_report_csv(report: &TrainReport) -> String {
    let mut out = String::from("epoch,train_loss,train_acc");
    for name in &report.eval_names {
        out.push_str(&format!(",{name}_acc"));
    }
    out.push('\n');
    for row in &report.epochs {
        out.push_str(&format!("{},{},{}", row.epoch, row.train_loss, row.train_acc));
        for acc in &row.eval_accs {
            out.push_str(&format!(",{acc}"));
        }
        out.push('\n');
    }
    out
}

pub fn projection_csv(rows: &[ProjectionRow]) -> String {
    let mut out = String::from("domain,label,pc1,pc2\n");
    for row in rows {
        let domain = match row.domain {
            DomainTag::Source => "source",
            DomainTag::Target => "target",
        };
        out.push_str(&format!("{domain},{},{},{}\n", row.label, row.pc1, row.pc2));
    }
    out
}

/// Ordered key/value summary written as CSV and echoed to the console.
#[derive(Debug, Default)]
pub struct Summary {
    rows: Vec<(String, String)>,
}

impl Summary {
    pub fn push(&mut self, key: &str, value: impl std::fmt::Display) {
        self.rows.push((key.to_string(), value.to_string()));
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("key,value\n");
        for (k, v) in &self.rows {
            out.push_str(&format!("{k},{v}\n"));
        }
        out
    }

    pub fn rows(&self) -> &[(String, String)] {
        &self.rows
    }
}
