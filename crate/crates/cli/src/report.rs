//! Presentation artifacts: a two-decimal summary table and one SVG bar
//! chart per metric, bars indexed by the epoch budget.

use std::fs;
use std::path::Path;

use crate::error::Error;
use crate::pipeline::ResultRow;

const CHART_WIDTH: f64 = 480.0;
const CHART_HEIGHT: f64 = 320.0;
const MARGIN_LEFT: f64 = 48.0;
const MARGIN_RIGHT: f64 = 16.0;
const MARGIN_TOP: f64 = 24.0;
const MARGIN_BOTTOM: f64 = 40.0;

fn two_decimals(value: Option<f64>) -> String {
    match value {
        Some(v) => format!("{v:.2}"),
        None => "nan".into(),
    }
}

pub fn summary_csv(rows: &[ResultRow]) -> String {
    let mut out = String::from("epochs,sensitivity,specificity,accuracy,mcc\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.epochs,
            two_decimals(r.sensitivity),
            two_decimals(r.specificity),
            two_decimals(r.accuracy),
            two_decimals(Some(r.mcc)),
        ));
    }
    out
}

/// Vertical bar chart of one metric across the sweep. The root element
/// carries a `data-axis-max` attribute and every row contributes one
/// `class="bar"` rect; undefined values draw as zero-height bars.
pub fn bar_chart_svg(title: &str, rows: &[(usize, Option<f64>)], axis_min: f64) -> String {
    let axis_max = 1.0;
    let plot_w = CHART_WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = CHART_HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let baseline_y = MARGIN_TOP + plot_h * (axis_max - 0.0f64.max(axis_min)) / (axis_max - axis_min);

    let mut svg = String::new();
    svg.push_str(&format!(
        concat!(
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" "#,
            r#"viewBox="0 0 {w} {h}" data-axis-max="{max}" data-axis-min="{min}">"#,
            "\n"
        ),
        w = CHART_WIDTH,
        h = CHART_HEIGHT,
        max = axis_max,
        min = axis_min,
    ));
    svg.push_str(&format!(
        "  <title>{title}</title>\n  <rect x=\"0\" y=\"0\" width=\"{CHART_WIDTH}\" height=\"{CHART_HEIGHT}\" fill=\"white\"/>\n"
    ));
    svg.push_str(&format!(
        "  <text x=\"{:.2}\" y=\"16\" text-anchor=\"middle\" font-size=\"13\">{title}</text>\n",
        CHART_WIDTH / 2.0
    ));
    // y axis and baseline
    svg.push_str(&format!(
        "  <line x1=\"{MARGIN_LEFT}\" y1=\"{MARGIN_TOP}\" x2=\"{MARGIN_LEFT}\" y2=\"{:.2}\" stroke=\"black\"/>\n",
        MARGIN_TOP + plot_h
    ));
    svg.push_str(&format!(
        "  <line x1=\"{MARGIN_LEFT}\" y1=\"{baseline_y:.2}\" x2=\"{:.2}\" y2=\"{baseline_y:.2}\" stroke=\"black\"/>\n",
        MARGIN_LEFT + plot_w
    ));

    let n = rows.len().max(1);
    let slot = plot_w / n as f64;
    for (i, &(epochs, value)) in rows.iter().enumerate() {
        let v = value.unwrap_or(0.0).clamp(axis_min, axis_max);
        let x = MARGIN_LEFT + slot * i as f64 + slot * 0.2;
        let bar_w = slot * 0.6;
        let value_y = MARGIN_TOP + plot_h * (axis_max - v) / (axis_max - axis_min);
        let (y, height) = if v >= 0.0 {
            (value_y, baseline_y - value_y)
        } else {
            (baseline_y, value_y - baseline_y)
        };
        svg.push_str(&format!(
            "  <rect class=\"bar\" x=\"{x:.2}\" y=\"{y:.2}\" width=\"{bar_w:.2}\" height=\"{height:.2}\" fill=\"#4477aa\"/>\n"
        ));
        svg.push_str(&format!(
            "  <text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\" font-size=\"11\">{epochs}</text>\n",
            x + bar_w / 2.0,
            MARGIN_TOP + plot_h + 16.0
        ));
        svg.push_str(&format!(
            "  <text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\" font-size=\"10\">{}</text>\n",
            x + bar_w / 2.0,
            (value_y - 4.0).max(12.0),
            two_decimals(value)
        ));
    }
    svg.push_str("</svg>\n");
    svg
}

/// Writes `summary.csv` and the four metric charts into `report_dir`.
/// An empty result set is an error and produces no files.
pub fn cmd_report(rows: &[ResultRow], report_dir: &Path) -> Result<(), Error> {
    if rows.is_empty() {
        return Err(Error::Invalid("no results to report".into()));
    }
    fs::create_dir_all(report_dir).map_err(|e| Error::io(report_dir, e))?;

    let summary_path = report_dir.join("summary.csv");
    fs::write(&summary_path, summary_csv(rows)).map_err(|e| Error::io(&summary_path, e))?;

    let mcc_min = if rows.iter().any(|r| r.mcc < 0.0) {
        -1.0
    } else {
        0.0
    };
    let charts: [(&str, Vec<(usize, Option<f64>)>, f64); 4] = [
        (
            "sensitivity",
            rows.iter().map(|r| (r.epochs, r.sensitivity)).collect(),
            0.0,
        ),
        (
            "specificity",
            rows.iter().map(|r| (r.epochs, r.specificity)).collect(),
            0.0,
        ),
        (
            "accuracy",
            rows.iter().map(|r| (r.epochs, r.accuracy)).collect(),
            0.0,
        ),
        (
            "mcc",
            rows.iter().map(|r| (r.epochs, Some(r.mcc))).collect(),
            mcc_min,
        ),
    ];
    for (name, data, axis_min) in charts {
        let path = report_dir.join(format!("{name}.svg"));
        fs::write(&path, bar_chart_svg(name, &data, axis_min)).map_err(|e| Error::io(&path, e))?;
    }
    Ok(())
}
