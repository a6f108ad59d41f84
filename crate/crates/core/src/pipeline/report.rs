//! Run reports (JSON/CSV) and comparison charts (SVG).

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::container::write_atomic;
use crate::dataset::NumericDataset;
use crate::error::{Error, Result};
use crate::metrics::ClassReport;

pub const FORMAT: &str = "gdakit-run-report";
pub const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub rows: usize,
    pub width: usize,
    pub class_sizes: Vec<usize>,
}

impl DatasetSummary {
    pub fn of(ds: &NumericDataset) -> DatasetSummary {
        DatasetSummary {
            rows: ds.rows(),
            width: ds.dim(),
            class_sizes: ds.class_sizes(),
        }
    }
}

/// Wall-clock seconds. The only fields that vary between identical runs.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunTimings {
    pub reduce_fit_s: f64,
    pub classifier_train_s: f64,
    pub classifier_test_s: f64,
}

/// One evaluated pipeline variant. Documented in `docs/report-schema.md` at the workspace root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub format: String,
    pub version: u32,
    pub variant: String,
    pub dataset: String,
    pub reducer: String,
    pub classifier: String,
    pub config: BTreeMap<String, String>,
    pub components: usize,
    pub eigenvalues: Vec<f64>,
    pub basis_rows: Option<usize>,
    pub train: DatasetSummary,
    pub test: DatasetSummary,
    pub class_names: Vec<String>,
    /// Actual rows, predicted columns.
    pub confusion: Vec<Vec<u64>>,
    pub accuracy: Option<f64>,
    pub classes: Vec<ClassReport>,
    pub timings: RunTimings,
    /// Artifact file names relative to the report's directory.
    pub artifacts: BTreeMap<String, String>,
}

impl RunReport {
    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<RunReport> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::from(e).in_file(path))?;
        let r: RunReport = serde_json::from_str(&text).map_err(|e| Error::from(e).in_file(path))?;
        if r.format != FORMAT {
            return Err(Error::Format(format!("not a run report (format `{}`)", r.format)).in_file(path));
        }
        Ok(r)
    }

    pub fn save_json(&self, path: &Path) -> Result<()> {
        write_atomic(path, self.to_json()?.as_bytes())
    }
}

pub const CSV_HEADER: [&str; 7] = ["class", "variant", "DR", "FAR_tabular", "FAR_textual", "train_s", "test_s"];

fn cell(v: Option<f64>) -> String {
    v.map_or_else(String::new, |v| format!("{v:.4}"))
}

/// One row per (class, report), in the detection/false-alarm table layout.
pub fn summary_csv(reports: &[RunReport]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER)?;
    for r in reports {
        for c in &r.classes {
            w.write_record([
                c.class.clone(),
                r.variant.clone(),
                cell(c.detection_rate),
                cell(c.far_tabular),
                cell(c.far_textual),
                format!("{:.6}", r.timings.classifier_train_s),
                format!("{:.6}", r.timings.classifier_test_s),
            ])?;
        }
    }
    w.into_inner().map_err(|e| Error::Io(e.into_error()))
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

const PALETTE: [&str; 8] = [
    "#4e79a7", "#f28e2b", "#59a14f", "#e15759", "#76b7b2", "#edc948", "#b07aa1", "#9c755f",
];

/// Grouped bar chart: one group per category, one bar per series.
pub fn bar_chart_svg(
    title: &str,
    y_label: &str,
    categories: &[String],
    series: &[(String, Vec<Option<f64>>)],
) -> String {
    let (w, h) = (720.0, 400.0);
    let (left, right, top, bottom) = (70.0, 150.0, 40.0, 50.0);
    let plot_w = w - left - right;
    let plot_h = h - top - bottom;
    let max = series
        .iter()
        .flat_map(|(_, v)| v.iter().flatten())
        .fold(0.0f64, |a, &b| a.max(b));
    let y_max = if max > 0.0 { max * 1.1 } else { 1.0 };
    let y = |v: f64| top + plot_h * (1.0 - v / y_max);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="22" text-anchor="middle" font-size="15">{}</text>"#,
        left + plot_w / 2.0,
        escape(title)
    );
    for k in 0..=5 {
        let v = y_max * k as f64 / 5.0;
        let yy = y(v);
        let _ = writeln!(
            s,
            r##"<line x1="{left}" y1="{yy:.1}" x2="{:.1}" y2="{yy:.1}" stroke="#ddd"/><text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"##,
            left + plot_w,
            left - 6.0,
            yy + 4.0,
            format_tick(v)
        );
    }
    let _ = writeln!(
        s,
        r#"<text transform="translate(18 {:.1}) rotate(-90)" text-anchor="middle">{}</text>"#,
        top + plot_h / 2.0,
        escape(y_label)
    );
    let group_w = plot_w / categories.len().max(1) as f64;
    let bar_w = group_w * 0.8 / series.len().max(1) as f64;
    for (g, cat) in categories.iter().enumerate() {
        let gx = left + g as f64 * group_w;
        for (k, (_, values)) in series.iter().enumerate() {
            if let Some(Some(v)) = values.get(g) {
                let x = gx + group_w * 0.1 + k as f64 * bar_w;
                let _ = writeln!(
                    s,
                    r#"<rect x="{x:.1}" y="{:.1}" width="{bar_w:.1}" height="{:.1}" fill="{}"><title>{}</title></rect>"#,
                    y(*v),
                    (plot_h - (y(*v) - top)).max(0.0),
                    PALETTE[k % PALETTE.len()],
                    format_tick(*v)
                );
            }
        }
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            gx + group_w / 2.0,
            top + plot_h + 18.0,
            escape(cat)
        );
    }
    let _ = writeln!(
        s,
        r#"<line x1="{left}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="black"/>"#,
        top + plot_h,
        left + plot_w,
        top + plot_h
    );
    for (k, (name, _)) in series.iter().enumerate() {
        let ly = top + 10.0 + k as f64 * 20.0;
        let lx = left + plot_w + 15.0;
        let _ = writeln!(
            s,
            r#"<rect class="series" x="{lx:.1}" y="{:.1}" width="12" height="12" fill="{}"/><text x="{:.1}" y="{:.1}">{}</text>"#,
            ly - 10.0,
            PALETTE[k % PALETTE.len()],
            lx + 18.0,
            ly,
            escape(name)
        );
    }
    s.push_str("</svg>\n");
    s
}

fn format_tick(v: f64) -> String {
    if v == 0.0 || v.abs() >= 1.0 {
        format!("{v:.2}")
    } else {
        format!("{v:.4}")
    }
}

/// Writes `dr.svg`, `far.svg`, `train_time.svg`, `test_time.svg` and
/// `summary.csv` into `out`; returns the written paths.
pub fn write_comparison(reports: &[RunReport], out: &Path) -> Result<Vec<PathBuf>> {
    let first = reports
        .first()
        .ok_or_else(|| Error::InvalidArgument("at least one report is required".into()))?;
    for r in &reports[1..] {
        if r.class_names != first.class_names {
            return Err(Error::InvalidArgument(format!(
                "class sets differ: {:?} vs {:?}",
                first.class_names, r.class_names
            )));
        }
    }
    let classes = &first.class_names;
    let per_class = |f: &dyn Fn(&RunReport, &ClassReport) -> Option<f64>| -> Vec<(String, Vec<Option<f64>>)> {
        reports
            .iter()
            .map(|r| (r.variant.clone(), r.classes.iter().map(|c| f(r, c)).collect()))
            .collect()
    };
    let charts: [(&str, &str, &str, Vec<(String, Vec<Option<f64>>)>); 4] = [
        ("dr.svg", "Detection rate", "DR %", per_class(&|_, c| c.detection_rate)),
        ("far.svg", "False alarm rate", "FAR % (100 - precision)", per_class(&|_, c| c.far_tabular)),
        (
            "train_time.svg",
            "Training time",
            "seconds",
            per_class(&|r, _| Some(r.timings.classifier_train_s)),
        ),
        (
            "test_time.svg",
            "Testing time",
            "seconds",
            per_class(&|r, _| Some(r.timings.classifier_test_s)),
        ),
    ];
    let mut written = Vec::new();
    for (file, title, label, series) in &charts {
        let p = out.join(file);
        write_atomic(&p, bar_chart_svg(title, label, classes, series).as_bytes())?;
        written.push(p);
    }
    let p = out.join("summary.csv");
    write_atomic(&p, &summary_csv(reports)?)?;
    written.push(p);
    Ok(written)
}
