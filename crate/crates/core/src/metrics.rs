//! Confusion matrices, per-class detection and false-alarm rates, and
//! timing capture.

use std::fmt::Write as _;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Counts indexed `(actual, predicted)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    class_names: Vec<String>,
    /// Row-major, actual rows.
    counts: Vec<u64>,
}

impl ConfusionMatrix {
    pub fn zeros(class_names: Vec<String>) -> ConfusionMatrix {
        let c = class_names.len();
        ConfusionMatrix {
            class_names,
            counts: vec![0; c * c],
        }
    }

    pub fn from_rows(class_names: Vec<String>, rows: &[Vec<u64>]) -> Result<ConfusionMatrix> {
        let c = class_names.len();
        if rows.len() != c {
            return Err(Error::DimensionMismatch {
                expected: c,
                found: rows.len(),
            });
        }
        let mut counts = Vec::with_capacity(c * c);
        for r in rows {
            if r.len() != c {
                return Err(Error::DimensionMismatch {
                    expected: c,
                    found: r.len(),
                });
            }
            counts.extend_from_slice(r);
        }
        Ok(ConfusionMatrix { class_names, counts })
    }

    pub fn classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn get(&self, actual: usize, predicted: usize) -> u64 {
        self.counts[actual * self.classes() + predicted]
    }

    pub fn rows(&self) -> Vec<Vec<u64>> {
        let c = self.classes();
        (0..c).map(|a| self.counts[a * c..(a + 1) * c].to_vec()).collect()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn row_sum(&self, actual: usize) -> u64 {
        (0..self.classes()).map(|p| self.get(actual, p)).sum()
    }

    pub fn col_sum(&self, predicted: usize) -> u64 {
        (0..self.classes()).map(|a| self.get(a, predicted)).sum()
    }

    pub fn transposed(&self) -> ConfusionMatrix {
        let c = self.classes();
        let mut counts = vec![0; c * c];
        for a in 0..c {
            for p in 0..c {
                counts[p * c + a] = self.get(a, p);
            }
        }
        ConfusionMatrix {
            class_names: self.class_names.clone(),
            counts,
        }
    }

    /// A (truth, prediction) stream that tabulates back to this matrix.
    pub fn reconstruct(&self) -> (Vec<usize>, Vec<usize>) {
        let c = self.classes();
        let mut truth = Vec::with_capacity(self.total() as usize);
        let mut pred = Vec::with_capacity(truth.capacity());
        for a in 0..c {
            for p in 0..c {
                for _ in 0..self.get(a, p) {
                    truth.push(a);
                    pred.push(p);
                }
            }
        }
        (truth, pred)
    }

    /// Plain-text table with a `% Correct` row and column. `transpose`
    /// prints predicted classes as rows instead.
    pub fn render(&self, transpose: bool) -> String {
        let m = if transpose { self.transposed() } else { self.clone() };
        let pct = table_percentages(&m);
        let fmt = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |v| format!("{v:.2}"));
        let mut out = String::new();
        let corner = if transpose { "pred\\actual" } else { "actual\\pred" };
        let _ = write!(out, "{corner:<12}");
        for n in &m.class_names {
            let _ = write!(out, "\t{n}");
        }
        out.push_str("\t% Correct\n");
        for (a, row) in m.rows().iter().enumerate() {
            let _ = write!(out, "{:<12}", m.class_names[a]);
            for v in row {
                let _ = write!(out, "\t{v}");
            }
            let _ = writeln!(out, "\t{}", fmt(pct.rows[a]));
        }
        let _ = write!(out, "{:<12}", "% Correct");
        for v in &pct.cols {
            let _ = write!(out, "\t{}", fmt(*v));
        }
        out.push('\n');
        out
    }
}

pub fn confusion_matrix(truth: &[usize], pred: &[usize], class_names: &[String]) -> Result<ConfusionMatrix> {
    if truth.len() != pred.len() {
        return Err(Error::DimensionMismatch {
            expected: truth.len(),
            found: pred.len(),
        });
    }
    let c = class_names.len();
    let mut cm = ConfusionMatrix::zeros(class_names.to_vec());
    for (&a, &p) in truth.iter().zip(pred) {
        if a >= c || p >= c {
            return Err(Error::InvalidArgument(format!(
                "class id {} out of range for {c} classes",
                a.max(p)
            )));
        }
        cm.counts[a * c + p] += 1;
    }
    Ok(cm)
}

/// One-vs-rest tabulation for class `c`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OneVsRest {
    pub tp: u64,
    pub fp: u64,
    pub fn_: u64,
    pub tn: u64,
}

pub fn one_vs_rest(cm: &ConfusionMatrix, c: usize) -> OneVsRest {
    let tp = cm.get(c, c);
    let fn_ = cm.row_sum(c) - tp;
    let fp = cm.col_sum(c) - tp;
    OneVsRest {
        tp,
        fp,
        fn_,
        tn: cm.total() - tp - fp - fn_,
    }
}

fn percent(num: u64, den: u64) -> Result<f64> {
    if den == 0 {
        return Err(Error::ZeroDenominator);
    }
    Ok(100.0 * num as f64 / den as f64)
}

fn check_class(cm: &ConfusionMatrix, c: usize) -> Result<()> {
    if c >= cm.classes() {
        return Err(Error::InvalidArgument(format!("class {c} out of range")));
    }
    Ok(())
}

/// `TP / (TP + FN)` in percent.
pub fn detection_rate(cm: &ConfusionMatrix, c: usize) -> Result<f64> {
    check_class(cm, c)?;
    percent(cm.get(c, c), cm.row_sum(c))
}

/// `FP / (FP + TN)` in percent, one-vs-rest.
pub fn far_textual(cm: &ConfusionMatrix, c: usize) -> Result<f64> {
    check_class(cm, c)?;
    let o = one_vs_rest(cm, c);
    percent(o.fp, o.fp + o.tn)
}

/// `TP / (TP + FP)` in percent.
pub fn precision(cm: &ConfusionMatrix, c: usize) -> Result<f64> {
    check_class(cm, c)?;
    percent(cm.get(c, c), cm.col_sum(c))
}

/// False alarms as a share of everything predicted as `c`: `100 − precision`.
pub fn far_tabular(cm: &ConfusionMatrix, c: usize) -> Result<f64> {
    check_class(cm, c)?;
    percent(cm.col_sum(c) - cm.get(c, c), cm.col_sum(c))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassReport {
    pub class: String,
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tn: u64,
    pub support: u64,
    /// Percentages; `None` where the denominator is zero.
    pub detection_rate: Option<f64>,
    pub far_textual: Option<f64>,
    pub far_tabular: Option<f64>,
    pub precision: Option<f64>,
}

pub fn class_reports(cm: &ConfusionMatrix) -> Vec<ClassReport> {
    (0..cm.classes())
        .map(|c| {
            let o = one_vs_rest(cm, c);
            ClassReport {
                class: cm.class_names[c].clone(),
                tp: o.tp,
                fp: o.fp,
                fn_: o.fn_,
                tn: o.tn,
                support: cm.row_sum(c),
                detection_rate: detection_rate(cm, c).ok(),
                far_textual: far_textual(cm, c).ok(),
                far_tabular: far_tabular(cm, c).ok(),
                precision: precision(cm, c).ok(),
            }
        })
        .collect()
}

pub fn accuracy(cm: &ConfusionMatrix) -> Option<f64> {
    let total = cm.total();
    if total == 0 {
        return None;
    }
    let diag: u64 = (0..cm.classes()).map(|c| cm.get(c, c)).sum();
    Some(diag as f64 / total as f64)
}

/// The `% Correct` margins: diagonal over row sums and over column sums.
#[derive(Debug, Clone, PartialEq)]
pub struct TablePercentages {
    pub rows: Vec<Option<f64>>,
    pub cols: Vec<Option<f64>>,
}

pub fn table_percentages(cm: &ConfusionMatrix) -> TablePercentages {
    let c = cm.classes();
    TablePercentages {
        rows: (0..c).map(|i| percent(cm.get(i, i), cm.row_sum(i)).ok()).collect(),
        cols: (0..c).map(|i| percent(cm.get(i, i), cm.col_sum(i)).ok()).collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub tag: String,
    pub seconds: f64,
}

/// Runs `f` and measures it with the monotonic clock.
pub fn timed<T>(tag: &str, f: impl FnOnce() -> T) -> (T, Timing) {
    let start = Instant::now();
    let out = f();
    let elapsed: Duration = start.elapsed();
    (
        out,
        Timing {
            tag: tag.to_string(),
            seconds: elapsed.as_secs_f64(),
        },
    )
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TimingReport {
    pub entries: Vec<Timing>,
}

impl TimingReport {
    pub fn time<T>(&mut self, tag: &str, f: impl FnOnce() -> T) -> T {
        let (out, t) = timed(tag, f);
        self.entries.push(t);
        out
    }

    pub fn get(&self, tag: &str) -> Option<f64> {
        self.entries.iter().find(|t| t.tag == tag).map(|t| t.seconds)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(c: usize) -> Vec<String> {
        (0..c).map(|i| format!("c{i}")).collect()
    }

    fn gda_tree_fixture() -> ConfusionMatrix {
        ConfusionMatrix::from_rows(
            ["Normal", "Probe", "DOS", "R2L", "U2R"].map(String::from).to_vec(),
            &[
                vec![60400, 151, 38, 1, 3],
                vec![10, 4150, 4, 1, 1],
                vec![3058, 160, 227339, 2, 3],
                vec![3468, 984, 1010, 10726, 1],
                vec![46, 47, 4, 1, 130],
            ],
        )
        .unwrap()
    }

    #[test]
    fn identity_and_single_column() {
        let cm = confusion_matrix(&[0, 1, 2], &[0, 1, 2], &names(3)).unwrap();
        assert_eq!(cm.rows(), vec![vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]]);
        assert_eq!(cm.total(), 3);
        for c in 0..3 {
            assert_eq!(detection_rate(&cm, c).unwrap(), 100.0);
            assert_eq!(far_textual(&cm, c).unwrap(), 0.0);
            assert_eq!(far_tabular(&cm, c).unwrap(), 0.0);
        }
        let cm = confusion_matrix(&[0, 1, 2, 2], &[0, 0, 0, 0], &names(3)).unwrap();
        assert_eq!(cm.col_sum(0), 4);
        assert_eq!(cm.col_sum(1) + cm.col_sum(2), 0);
        assert!(far_tabular(&cm, 1).is_err());
        assert_eq!(table_percentages(&cm).cols[1], None);
    }

    #[test]
    fn input_errors() {
        assert!(confusion_matrix(&[0, 1], &[0], &names(2)).is_err());
        assert!(confusion_matrix(&[0, 2], &[0, 1], &names(2)).is_err());
        let cm = ConfusionMatrix::from_rows(names(2), &[vec![0, 0], vec![1, 1]]).unwrap();
        assert!(detection_rate(&cm, 0).is_err());
    }

    #[test]
    fn two_class_textual_far() {
        let cm = ConfusionMatrix::from_rows(names(2), &[vec![8, 2], vec![1, 9]]).unwrap();
        assert_eq!(one_vs_rest(&cm, 1), OneVsRest { tp: 9, fp: 2, fn_: 1, tn: 8 });
        assert!((far_textual(&cm, 1).unwrap() - 20.0).abs() < 1e-12);
    }

    #[test]
    fn gda_tree_fixture_margins() {
        let cm = gda_tree_fixture();
        let p = table_percentages(&cm);
        let rows = [99.68, 99.61, 98.60, 66.25, 57.01];
        let cols = [90.17, 75.56, 99.53, 99.95, 94.2];
        let far = [9.83, 24.44, 0.47, 0.05, 5.8];
        for c in 0..5 {
            assert!((p.rows[c].unwrap() - rows[c]).abs() < 0.05);
            assert!((p.cols[c].unwrap() - cols[c]).abs() < 0.05);
            assert!((far_tabular(&cm, c).unwrap() - far[c]).abs() < 0.05);
            assert_eq!(detection_rate(&cm, c).unwrap(), p.rows[c].unwrap());
            assert_eq!(far_tabular(&cm, c).unwrap() + precision(&cm, c).unwrap(), 100.0);
        }
    }

    #[test]
    fn one_vs_rest_identities() {
        let cm = gda_tree_fixture();
        for (c, r) in class_reports(&cm).iter().enumerate() {
            assert_eq!(r.tp + r.fn_, cm.row_sum(c));
            assert_eq!(r.tp + r.fp, cm.col_sum(c));
            assert_eq!(r.tp + r.fp + r.fn_ + r.tn, cm.total());
            assert_eq!(r.support, cm.row_sum(c));
        }
    }

    #[test]
    fn reconstruction_round_trips() {
        let cm = gda_tree_fixture();
        let (t, p) = cm.reconstruct();
        assert_eq!(confusion_matrix(&t, &p, cm.class_names()).unwrap(), cm);
        assert_eq!(cm.transposed().transposed(), cm);
    }

    #[test]
    fn uniform_ones() {
        let cm = ConfusionMatrix::from_rows(names(3), &vec![vec![1; 3]; 3]).unwrap();
        let p = table_percentages(&cm);
        for v in p.rows.iter().chain(&p.cols) {
            assert!((v.unwrap() - 33.33).abs() < 0.01);
        }
    }

    #[test]
    fn render_has_margins() {
        let s = gda_tree_fixture().render(false);
        assert!(s.contains("99.68"));
        assert!(s.contains("90.17"));
        assert_eq!(s.lines().count(), 7);
    }

    #[test]
    fn timing_report_keeps_tags() {
        let mut r = TimingReport::default();
        let v = r.time("first", || 3);
        r.time("second", || ());
        assert_eq!(v, 3);
        assert!(r.get("first").unwrap() >= 0.0);
        assert!(r.get("second").is_some());
        assert_eq!(r.entries.len(), 2);
    }
}
