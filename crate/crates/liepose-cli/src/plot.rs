//! Static SVG plots of trace error series: one file per (filter, chart)
//! showing the attitude and position error of every seed over time, with
//! the statistics window shaded. Self-contained output, no plotting
//! dependency.

use std::path::{Path, PathBuf};

use crate::config::{Chart, Filter};
use crate::error::HarnessError;
use crate::trace::TraceSummaryData;

const WIDTH: f64 = 900.0;
const PANEL_H: f64 = 250.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 20.0;
const MARGIN_TOP: f64 = 40.0;
const PANEL_GAP: f64 = 55.0;
const MAX_POINTS: usize = 1200;

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f",
];

struct Panel<'a> {
    title: &'a str,
    /// One (label, series) per seed; series is (t, value).
    lines: Vec<(String, Vec<(f64, f64)>)>,
}

/// Writes `plot_{filter}_{chart}.svg` for every (filter, chart) group in
/// `traces`, returning the created paths.
pub fn write_plots(
    dir: &Path,
    traces: &[TraceSummaryData],
    window: (f64, f64),
) -> Result<Vec<PathBuf>, HarnessError> {
    let mut groups: Vec<(Filter, Chart)> = traces.iter().map(|t| (t.filter, t.chart)).collect();
    groups.sort();
    groups.dedup();

    let mut written = Vec::new();
    for (filter, chart) in groups {
        let members: Vec<&TraceSummaryData> = traces
            .iter()
            .filter(|t| t.filter == filter && t.chart == chart)
            .collect();
        let take = |pick: fn(&(f64, f64, f64)) -> f64| -> Vec<(String, Vec<(f64, f64)>)> {
            members
                .iter()
                .map(|m| {
                    let stride = (m.series.len() / MAX_POINTS).max(1);
                    let pts = m
                        .series
                        .iter()
                        .enumerate()
                        .filter(|(i, _)| i % stride == 0 || *i == m.series.len() - 1)
                        .map(|(_, row)| (row.0, pick(row)))
                        .collect();
                    (format!("seed {}", m.seed), pts)
                })
                .collect()
        };
        let svg = render(
            &format!("{} / {}", filter.as_str(), chart.as_str()),
            window,
            &[
                Panel {
                    title: "attitude error",
                    lines: take(|r| r.1),
                },
                Panel {
                    title: "position error",
                    lines: take(|r| r.2),
                },
            ],
        );
        let path = dir.join(format!("plot_{}_{}.svg", filter.as_str(), chart.as_str()));
        std::fs::write(&path, svg).map_err(HarnessError::io(&path))?;
        written.push(path);
    }
    Ok(written)
}

fn render(title: &str, window: (f64, f64), panels: &[Panel]) -> String {
    use std::fmt::Write as _;
    let height = MARGIN_TOP + panels.len() as f64 * (PANEL_H + PANEL_GAP);
    let plot_w = WIDTH - MARGIN_L - MARGIN_R;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" viewBox="0 0 {WIDTH} {height}" font-family="sans-serif">"#
    );
    let _ = writeln!(
        svg,
        r#"<rect width="{WIDTH}" height="{height}" fill="white"/>"#
    );
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="24" font-size="16" text-anchor="middle">{}</text>"#,
        WIDTH / 2.0,
        title
    );

    for (pi, panel) in panels.iter().enumerate() {
        let top = MARGIN_TOP + pi as f64 * (PANEL_H + PANEL_GAP);
        let t_max = panel
            .lines
            .iter()
            .flat_map(|(_, pts)| pts.iter().map(|p| p.0))
            .fold(0.0_f64, f64::max)
            .max(1e-12);
        let y_max = panel
            .lines
            .iter()
            .flat_map(|(_, pts)| pts.iter().map(|p| p.1))
            .fold(0.0_f64, f64::max)
            .max(1e-12)
            * 1.05;
        let x = |t: f64| MARGIN_L + t / t_max * plot_w;
        let y = |v: f64| top + PANEL_H - (v / y_max * PANEL_H);

        // statistics window
        let _ = writeln!(
            svg,
            r##"<rect x="{:.2}" y="{top:.2}" width="{:.2}" height="{PANEL_H}" fill="#f0f0f0"/>"##,
            x(window.0.min(t_max)),
            (x(window.1.min(t_max)) - x(window.0.min(t_max))).max(0.0),
        );
        // frame
        let _ = writeln!(
            svg,
            r##"<rect x="{MARGIN_L}" y="{top:.2}" width="{plot_w}" height="{PANEL_H}" fill="none" stroke="#333" stroke-width="1"/>"##
        );
        let _ = writeln!(
            svg,
            r#"<text x="{MARGIN_L}" y="{:.2}" font-size="13">{}</text>"#,
            top - 8.0,
            panel.title
        );

        for k in 0..=5 {
            let t = t_max * k as f64 / 5.0;
            let _ = writeln!(
                svg,
                r#"<text x="{:.2}" y="{:.2}" font-size="11" text-anchor="middle">{:.1}</text>"#,
                x(t),
                top + PANEL_H + 16.0,
                t
            );
        }
        for k in 0..=4 {
            let v = y_max * k as f64 / 4.0;
            let _ = writeln!(
                svg,
                r#"<text x="{:.2}" y="{:.2}" font-size="11" text-anchor="end">{}</text>"#,
                MARGIN_L - 6.0,
                y(v) + 4.0,
                format_tick(v)
            );
            if k > 0 {
                let _ = writeln!(
                    svg,
                    r##"<line x1="{MARGIN_L}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#ddd" stroke-width="0.5"/>"##,
                    y(v),
                    MARGIN_L + plot_w,
                    y(v)
                );
            }
        }
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" font-size="12" text-anchor="middle">t (s)</text>"#,
            MARGIN_L + plot_w / 2.0,
            top + PANEL_H + 34.0
        );

        for (li, (label, pts)) in panel.lines.iter().enumerate() {
            let color = PALETTE[li % PALETTE.len()];
            let mut d = String::new();
            for (i, (t, v)) in pts.iter().enumerate() {
                let _ = write!(
                    d,
                    "{}{:.2},{:.2} ",
                    if i == 0 { "M" } else { "L" },
                    x(*t),
                    y(v.min(y_max))
                );
            }
            let _ = writeln!(
                svg,
                r#"<path d="{}" fill="none" stroke="{color}" stroke-width="1"><title>{label}</title></path>"#,
                d.trim_end()
            );
        }
    }
    let _ = writeln!(svg, "</svg>");
    svg
}

fn format_tick(v: f64) -> String {
    if v == 0.0 {
        "0".to_string()
    } else if v.abs() >= 0.01 && v.abs() < 1000.0 {
        format!("{v:.3}")
    } else {
        format!("{v:.2e}")
    }
}
