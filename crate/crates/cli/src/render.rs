//! Report rendering to JSON, CSV and a self-contained SVG plot.

use std::fmt::Write as _;
use std::path::Path;

use clap::ValueEnum;
use sminlab::experiments::{ExperimentReport, TailCell};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Svg,
    Text,
}

#[derive(Debug, Error)]
pub enum RenderError {
    #[error("report has an empty eps grid")]
    EmptyGrid,
    #[error("format {0:?} is not available for reports")]
    Unsupported(Format),
    #[error("cannot write {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

/// Renders `report` in memory.
pub fn render(report: &ExperimentReport, format: Format) -> Result<String, RenderError> {
    if report.cells.is_empty() {
        return Err(RenderError::EmptyGrid);
    }
    match format {
        Format::Json => Ok(report.to_json()),
        Format::Csv => Ok(report.to_csv()),
        Format::Svg => Ok(render_svg(report)),
        Format::Text => Err(RenderError::Unsupported(format)),
    }
}

/// Renders and writes `report`; nothing is written when rendering fails.
pub fn render_report(report: &ExperimentReport, path: &Path, format: Format) -> Result<(), RenderError> {
    let body = render(report, format)?;
    std::fs::write(path, body).map_err(|source| RenderError::Io { path: path.display().to_string(), source })
}

const WIDTH: f64 = 760.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 200.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 50.0;
const ENVELOPE_SAMPLES: usize = 48;
const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2"];

struct Frame {
    x_max: f64,
    y_max: f64,
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        LEFT + x / self.x_max * (WIDTH - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        TOP + (1.0 - y / self.y_max) * (HEIGHT - TOP - BOTTOM)
    }
}

fn groups(report: &ExperimentReport) -> Vec<Vec<&TailCell>> {
    let mut out: Vec<Vec<&TailCell>> = Vec::new();
    for c in &report.cells {
        match out.iter_mut().find(|g| g[0].dist == c.dist && g[0].n == c.n) {
            Some(g) => g.push(c),
            None => out.push(vec![c]),
        }
    }
    for g in &mut out {
        g.sort_by(|a, b| a.epsilon.total_cmp(&b.epsilon));
    }
    out
}

/// `p_hat` against `eps` for every `(dist, n)` with the envelope
/// `C_hat (eps + 1/sqrt(n))` drawn over the same range. Envelope vertices
/// include every plotted `eps`, so points under the envelope stay under the
/// drawn line.
pub fn render_svg(report: &ExperimentReport) -> String {
    let groups = groups(report);
    let eps_max = report.cells.iter().map(|c| c.epsilon).fold(0.0, f64::max);
    let x_max = 1.1 * eps_max;
    let envelope = |c: &TailCell, eps: f64| report.c_hat * (eps + c.envelope_unit - c.epsilon);
    let mut y_max = report.cells.iter().map(|c| c.p_hat.max(envelope(c, x_max))).fold(0.0, f64::max);
    if y_max.is_nan() || y_max <= 0.0 {
        y_max = 1.0;
    }
    let frame = Frame { x_max, y_max: 1.05 * y_max };

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let (x0, y0) = (frame.px(0.0), frame.py(0.0));
    let (x1, y1) = (frame.px(x_max), frame.py(frame.y_max));
    let _ = writeln!(
        s,
        r#"<path class="axes" d="M{x0:.2} {y1:.2} L{x0:.2} {y0:.2} L{x1:.2} {y0:.2}" stroke="black" fill="none"/>"#
    );
    for i in 0..=5 {
        let xv = x_max * i as f64 / 5.0;
        let yv = frame.y_max * i as f64 / 5.0;
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{xv:.3}</text>"#,
            frame.px(xv),
            y0 + 18.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{yv:.3}</text>"#,
            x0 - 6.0,
            frame.py(yv) + 4.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">epsilon</text>"#,
        frame.px(x_max / 2.0),
        HEIGHT - 12.0
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">exceedance frequency</text>"#,
        frame.py(frame.y_max / 2.0),
        frame.py(frame.y_max / 2.0)
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="18" text-anchor="middle">C_hat = {:.4}</text>"#,
        frame.px(x_max / 2.0),
        report.c_hat
    );

    for (gi, g) in groups.iter().enumerate() {
        let color = PALETTE[gi % PALETTE.len()];
        let mut xs: Vec<f64> = (0..=ENVELOPE_SAMPLES).map(|i| x_max * i as f64 / ENVELOPE_SAMPLES as f64).collect();
        xs.extend(g.iter().map(|c| c.epsilon));
        xs.sort_by(f64::total_cmp);
        xs.dedup();
        let points: Vec<String> = xs
            .iter()
            .map(|&x| format!("{:.3},{:.3}", frame.px(x), frame.py(envelope(g[0], x))))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline class="envelope" data-dist="{}" data-n="{}" points="{}" stroke="{color}" fill="none" stroke-dasharray="5 3"/>"#,
            g[0].dist,
            g[0].n,
            points.join(" ")
        );
        for c in g {
            let _ = writeln!(
                s,
                r#"<circle class="point" data-dist="{}" data-n="{}" data-eps="{}" data-p="{}" data-envelope="{}" cx="{:.3}" cy="{:.3}" r="4" fill="{color}"/>"#,
                c.dist,
                c.n,
                c.epsilon,
                c.p_hat,
                report.c_hat * c.envelope_unit,
                frame.px(c.epsilon),
                frame.py(c.p_hat)
            );
        }
        let ly = TOP + 18.0 * gi as f64;
        let lx = WIDTH - RIGHT + 16.0;
        let _ = writeln!(
            s,
            r#"<circle cx="{lx:.2}" cy="{:.2}" r="4" fill="{color}"/><text x="{:.2}" y="{:.2}">{} n={}</text>"#,
            ly,
            lx + 10.0,
            ly + 4.0,
            g[0].dist,
            g[0].n
        );
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cell(eps: f64, p_hat: f64) -> TailCell {
        TailCell {
            dist: "gaussian".into(),
            n: 100,
            epsilon: eps,
            threshold: 1.0 / (eps * eps * 10.0),
            trials: 10,
            exceedances: (p_hat * 10.0) as usize,
            p_hat,
            wilson_low: 0.0,
            wilson_high: 1.0,
            envelope_unit: eps + 0.1,
            degenerate: 0,
        }
    }

    fn report(cells: Vec<TailCell>) -> ExperimentReport {
        let c_hat = cells.iter().map(|c| c.p_hat / c.envelope_unit).fold(0.0, f64::max);
        ExperimentReport {
            schema_version: 1,
            config: None,
            cells,
            c_hat,
            degenerate_total: 0,
            monotonicity: Vec::new(),
            timestamp: None,
            wall_time_s: None,
        }
    }

    #[test]
    fn empty_report_is_rejected() {
        assert!(matches!(render(&report(vec![]), Format::Svg), Err(RenderError::EmptyGrid)));
        let dir = std::env::temp_dir().join("rmt-render-empty.svg");
        let _ = std::fs::remove_file(&dir);
        assert!(render_report(&report(vec![]), &dir, Format::Svg).is_err());
        assert!(!dir.exists());
    }

    #[test]
    fn one_cell_one_point_one_curve() {
        let svg = render_svg(&report(vec![cell(0.1, 0.2)]));
        assert_eq!(svg.matches(r#"class="point""#).count(), 1);
        assert_eq!(svg.matches(r#"class="envelope""#).count(), 1);
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
    }

    #[test]
    fn rendering_is_deterministic() {
        let r = report(vec![cell(0.1, 0.0), cell(0.2, 0.1), cell(0.3, 0.1)]);
        assert_eq!(render_svg(&r), render_svg(&r));
        assert!(render(&r, Format::Text).is_err());
        assert_eq!(render(&r, Format::Csv).unwrap().lines().count(), 4);
    }
}
