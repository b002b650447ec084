//! Confusion matrix and class-balanced rates. Healthy is the positive class.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Label {
    /// Healthy bearing (class P).
    #[serde(rename = "P")]
    Healthy,
    /// Damaged bearing (class N).
    #[serde(rename = "N")]
    Damaged,
}

impl Label {
    pub fn from_inlier(is_inlier: bool) -> Self {
        if is_inlier {
            Label::Healthy
        } else {
            Label::Damaged
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Label::Healthy => "P",
            Label::Damaged => "N",
        })
    }
}

impl FromStr for Label {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "P" | "p" | "healthy" => Ok(Label::Healthy),
            "N" | "n" | "damaged" => Ok(Label::Damaged),
            other => Err(Error::Parse(format!("unknown label {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub fp: u64,
    pub tn: u64,
}

impl ConfusionMatrix {
    pub fn total(&self) -> u64 {
        self.tp + self.fn_ + self.fp + self.tn
    }
}

pub fn confusion(labels_true: &[Label], labels_pred: &[Label]) -> Result<ConfusionMatrix> {
    if labels_true.len() != labels_pred.len() {
        return Err(Error::DimensionMismatch {
            expected: labels_true.len(),
            got: labels_pred.len(),
        });
    }
    if labels_true.is_empty() {
        return invalid("no labels to compare");
    }
    let mut cm = ConfusionMatrix::default();
    for (t, p) in labels_true.iter().zip(labels_pred) {
        match (t, p) {
            (Label::Healthy, Label::Healthy) => cm.tp += 1,
            (Label::Healthy, Label::Damaged) => cm.fn_ += 1,
            (Label::Damaged, Label::Healthy) => cm.fp += 1,
            (Label::Damaged, Label::Damaged) => cm.tn += 1,
        }
    }
    Ok(cm)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub tpr: f64,
    pub tnr: f64,
    pub fpr: f64,
    pub fnr: f64,
    pub ba: f64,
    pub accuracy: f64,
}

pub fn report(cm: &ConfusionMatrix) -> Result<EvalReport> {
    let pos = cm.tp + cm.fn_;
    let neg = cm.tn + cm.fp;
    if pos == 0 || neg == 0 {
        return invalid(format!(
            "rates need both classes present (healthy {pos}, damaged {neg})"
        ));
    }
    let tpr = cm.tp as f64 / pos as f64;
    let tnr = cm.tn as f64 / neg as f64;
    Ok(EvalReport {
        tpr,
        tnr,
        fpr: 1.0 - tnr,
        fnr: 1.0 - tpr,
        ba: (tpr + tnr) / 2.0,
        accuracy: (cm.tp + cm.tn) as f64 / cm.total() as f64,
    })
}

impl EvalReport {
    /// Field-wise arithmetic mean.
    pub fn mean(reports: &[EvalReport]) -> Result<EvalReport> {
        if reports.is_empty() {
            return invalid("no reports to average");
        }
        let n = reports.len() as f64;
        let avg = |f: fn(&EvalReport) -> f64| reports.iter().map(f).sum::<f64>() / n;
        Ok(EvalReport {
            tpr: avg(|r| r.tpr),
            tnr: avg(|r| r.tnr),
            fpr: avg(|r| r.fpr),
            fnr: avg(|r| r.fnr),
            ba: avg(|r| r.ba),
            accuracy: avg(|r| r.accuracy),
        })
    }

    pub const CSV_HEADER: [&'static str; 6] = ["tpr", "tnr", "fpr", "fnr", "ba", "accuracy"];

    pub fn csv_fields(&self) -> [String; 6] {
        [self.tpr, self.tnr, self.fpr, self.fnr, self.ba, self.accuracy].map(|v| format!("{v:.6}"))
    }
}

/// Writes labelled reports as CSV with a leading `name` column.
pub fn write_reports_csv<W: Write>(out: W, rows: &[(String, EvalReport)]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["name"];
    header.extend(EvalReport::CSV_HEADER);
    w.write_record(&header)?;
    for (name, r) in rows {
        let mut rec = vec![name.clone()];
        rec.extend(r.csv_fields());
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Aligned text table with rates in percent.
pub fn format_reports_table(rows: &[(String, EvalReport)]) -> String {
    let width = rows.iter().map(|(n, _)| n.len()).max().unwrap_or(0).max(4);
    let mut s = format!(
        "{:<width$}  {:>7}  {:>7}  {:>7}  {:>7}  {:>7}  {:>7}\n",
        "name", "TPR", "TNR", "FPR", "FNR", "BA", "Acc"
    );
    for (name, r) in rows {
        s += &format!(
            "{:<width$}  {:>7.2}  {:>7.2}  {:>7.2}  {:>7.2}  {:>7.2}  {:>7.2}\n",
            name,
            100.0 * r.tpr,
            100.0 * r.tnr,
            100.0 * r.fpr,
            100.0 * r.fnr,
            100.0 * r.ba,
            100.0 * r.accuracy
        );
    }
    s
}
