use std::fmt;
use std::str::FromStr;

use super::{PropertyReport, RunAggregate, RunSummary};
use crate::property::{HierarchyProperty, PropertyGroup};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReportFormat {
    #[default]
    Markdown,
    Csv,
}

impl FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "markdown" | "md" => Ok(ReportFormat::Markdown),
            "csv" => Ok(ReportFormat::Csv),
            other => Err(format!("unknown report format `{other}`")),
        }
    }
}

impl fmt::Display for ReportFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ReportFormat::Markdown => "markdown",
            ReportFormat::Csv => "csv",
        })
    }
}

/// Significance level for the `*` marker.
const ALPHA: f64 = 0.05;

/// Accuracy in `[0, 1]` as a percentage with one decimal; `-` when undefined.
pub fn format_percent(value: Option<f64>) -> String {
    match value {
        Some(v) => format!("{:.1}", v * 100.0),
        None => "-".to_string(),
    }
}

fn header() -> Vec<String> {
    HierarchyProperty::ALL
        .iter()
        .map(|p| p.as_str())
        .chain(PropertyGroup::ALL.iter().map(|g| g.as_str()))
        .chain(["All"])
        .map(str::to_string)
        .collect()
}

fn cells(report: &PropertyReport) -> Vec<String> {
    HierarchyProperty::ALL
        .iter()
        .map(|p| report.accuracy(*p))
        .chain(PropertyGroup::ALL.iter().map(|g| report.group(*g)))
        .chain([report.all])
        .map(format_percent)
        .collect()
}

fn stat_cells(agg: &RunAggregate, f: impl Fn(&RunSummary) -> String) -> Vec<String> {
    let dash = || "-".to_string();
    HierarchyProperty::ALL
        .iter()
        .map(|p| agg.per_property.get(p).map(&f).unwrap_or_else(dash))
        .chain(
            PropertyGroup::ALL
                .iter()
                .map(|g| agg.groups.get(g).map(&f).unwrap_or_else(dash)),
        )
        .chain([agg.all.as_ref().map(&f).unwrap_or_else(dash)])
        .collect()
}

fn table(rows: &[Vec<String>], format: ReportFormat) -> String {
    let mut out = String::new();
    match format {
        ReportFormat::Markdown => {
            for (i, row) in rows.iter().enumerate() {
                out.push_str("| ");
                out.push_str(&row.join(" | "));
                out.push_str(" |\n");
                if i == 0 {
                    out.push('|');
                    out.push_str(&"---|".repeat(row.len()));
                    out.push('\n');
                }
            }
        }
        ReportFormat::Csv => {
            for row in rows {
                let escaped: Vec<String> = row.iter().map(|c| csv_cell(c)).collect();
                out.push_str(&escaped.join(","));
                out.push('\n');
            }
        }
    }
    out
}

fn csv_cell(c: &str) -> String {
    if c.contains([',', '"', '\n']) {
        format!("\"{}\"", c.replace('"', "\"\""))
    } else {
        c.to_string()
    }
}

/// One-row table with columns P-A, P-S, P-F, A-S, A-F, S-F, P-*, A-*, S-*, All.
pub fn render_report(report: &PropertyReport, format: ReportFormat) -> String {
    table(&[header(), cells(report)], format)
}

fn fmt_stat(x: f64, decimals: usize) -> String {
    if x.is_finite() {
        format!("{x:.decimals$}")
    } else if x.is_nan() {
        "nan".to_string()
    } else if x > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}

/// Per-run rows followed by mean and stdev rows. With `show_test`, adds `t`
/// and `p` rows and a `sig` column marking the mean row with `*` when the
/// `All` p-value is below 0.05.
pub fn render_aggregate(
    runs: &[PropertyReport],
    agg: &RunAggregate,
    show_test: bool,
    format: ReportFormat,
) -> String {
    let mut head = vec!["run".to_string()];
    head.extend(header());
    if show_test {
        head.push("sig".to_string());
    }
    let mut rows = vec![head];
    let mut push = |label: String, mut values: Vec<String>, marker: &str| {
        let mut row = vec![label];
        row.append(&mut values);
        if show_test {
            row.push(marker.to_string());
        }
        rows.push(row);
    };
    for (i, r) in runs.iter().enumerate() {
        let label = if r.label.is_empty() {
            format!("run{}", i + 1)
        } else {
            r.label.clone()
        };
        push(label, cells(r), "");
    }
    let significant = agg.all.is_some_and(|s| s.p_value < ALPHA);
    push(
        "mean".into(),
        cells(&agg.mean_report),
        if significant { "*" } else { "" },
    );
    push(
        "stdev".into(),
        stat_cells(agg, |s| format!("{:.1}", s.stdev * 100.0)),
        "",
    );
    if show_test {
        push("t".into(), stat_cells(agg, |s| fmt_stat(s.t_stat, 2)), "");
        push("p".into(), stat_cells(agg, |s| fmt_stat(s.p_value, 4)), "");
    }
    table(&rows, format)
}
