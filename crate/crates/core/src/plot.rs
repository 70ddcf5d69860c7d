//! Standalone SVG log-log rate charts: one series per learner, a fitted
//! line with its slope annotated, x ticks at powers of 2, y ticks at powers
//! of 10. The output is a plain string render, byte-stable for a given
//! table.

use crate::risk::fit_rate;
use crate::{Error, Result};
use std::fmt::Write as _;
use std::path::Path;

/// One learner's `(n, risk)` rate curve.
#[derive(Clone, Debug)]
pub struct RateSeries {
    pub learner: String,
    pub points: Vec<(f64, f64)>,
}

const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
];

const WIDTH: f64 = 780.0;
const HEIGHT: f64 = 520.0;
const ML: f64 = 74.0;
const MR: f64 = 190.0;
const MT: f64 = 36.0;
const MB: f64 = 56.0;

/// Renders the chart as an SVG document.
pub fn render_svg(series: &[RateSeries]) -> Result<String> {
    let usable: Vec<(&RateSeries, Vec<(f64, f64)>)> = series
        .iter()
        .map(|s| {
            let pts: Vec<(f64, f64)> = s
                .points
                .iter()
                .copied()
                .filter(|&(n, r)| n > 0.0 && r > 0.0)
                .collect();
            (s, pts)
        })
        .collect();
    if usable.is_empty() || usable.iter().all(|(_, p)| p.is_empty()) {
        return Err(Error::domain("plot needs a nonempty rate table"));
    }

    let (mut nmin, mut nmax) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut rmin, mut rmax) = (f64::INFINITY, f64::NEG_INFINITY);
    for (_, pts) in &usable {
        for &(n, r) in pts {
            nmin = nmin.min(n);
            nmax = nmax.max(n);
            rmin = rmin.min(r);
            rmax = rmax.max(r);
        }
    }
    if nmin == nmax {
        nmax = nmin * 2.0;
    }
    if rmin == rmax {
        rmax = rmin * 10.0;
        rmin /= 10.0;
    }

    let (lx0, lx1) = (nmin.ln(), nmax.ln());
    let (ly0, ly1) = (rmin.ln(), rmax.ln());
    let to_x = |n: f64| ML + (n.ln() - lx0) / (lx1 - lx0) * (WIDTH - ML - MR);
    let to_y = |r: f64| HEIGHT - MB - (r.ln() - ly0) / (ly1 - ly0) * (HEIGHT - MT - MB);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">"
    );
    let _ = writeln!(svg, "<rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>");
    let _ = writeln!(
        svg,
        "<text x=\"{}\" y=\"20\" font-family=\"sans-serif\" font-size=\"14\">excess risk vs budget (log-log)</text>",
        ML
    );

    // axes
    let _ = writeln!(
        svg,
        "<line x1=\"{ML}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>",
        HEIGHT - MB,
        WIDTH - MR,
        HEIGHT - MB
    );
    let _ = writeln!(
        svg,
        "<line x1=\"{ML}\" y1=\"{MT}\" x2=\"{ML}\" y2=\"{}\" stroke=\"black\"/>",
        HEIGHT - MB
    );

    // x ticks at powers of 2
    let mut e = nmin.log2().ceil() as i64;
    while (2.0f64).powi(e as i32) <= nmax * 1.0001 {
        let n = (2.0f64).powi(e as i32);
        let x = to_x(n);
        let _ = writeln!(
            svg,
            "<line x1=\"{x:.2}\" y1=\"{}\" x2=\"{x:.2}\" y2=\"{}\" stroke=\"#cccccc\"/>",
            MT,
            HEIGHT - MB
        );
        let _ = writeln!(
            svg,
            "<text x=\"{x:.2}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">2^{e}</text>",
            HEIGHT - MB + 18.0
        );
        e += 1;
    }
    // y ticks at powers of 10
    let mut p = rmin.log10().floor() as i64;
    while (10.0f64).powi(p as i32) <= rmax * 1.0001 {
        let r = (10.0f64).powi(p as i32);
        if r >= rmin * 0.999 {
            let y = to_y(r);
            let _ = writeln!(
                svg,
                "<line x1=\"{ML}\" y1=\"{y:.2}\" x2=\"{}\" y2=\"{y:.2}\" stroke=\"#dddddd\"/>",
                WIDTH - MR
            );
            let _ = writeln!(
                svg,
                "<text x=\"{}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">1e{p}</text>",
                ML - 6.0,
                y + 4.0
            );
        }
        p += 1;
    }
    let _ = writeln!(
        svg,
        "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">budget n</text>",
        (ML + WIDTH - MR) / 2.0,
        HEIGHT - 14.0
    );

    // series
    let mut legend_y = MT + 10.0;
    for (si, (s, pts)) in usable.iter().enumerate() {
        if pts.is_empty() {
            continue;
        }
        let color = PALETTE[si % PALETTE.len()];
        let mut sorted = pts.clone();
        sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
        let path: Vec<String> = sorted
            .iter()
            .map(|&(n, r)| format!("{:.2},{:.2}", to_x(n), to_y(r)))
            .collect();
        let _ = writeln!(
            svg,
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>",
            path.join(" ")
        );
        for &(n, r) in &sorted {
            let _ = writeln!(
                svg,
                "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"3\" fill=\"{color}\"/>",
                to_x(n),
                to_y(r)
            );
        }
        // fitted line where a fit is possible
        let mut slope_note = String::new();
        if let Ok(fit) = fit_rate(&sorted) {
            let y_at = |n: f64| (fit.intercept + fit.slope * n.ln()).exp();
            let _ = writeln!(
                svg,
                "<line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"{color}\" stroke-dasharray=\"5,4\" stroke-width=\"1\"/>",
                to_x(nmin),
                to_y(y_at(nmin)),
                to_x(nmax),
                to_y(y_at(nmax))
            );
            slope_note = format!(" (slope {:.3})", fit.slope);
        }
        // legend entry
        let lx = WIDTH - MR + 14.0;
        let _ = writeln!(
            svg,
            "<line x1=\"{lx}\" y1=\"{legend_y:.2}\" x2=\"{:.2}\" y2=\"{legend_y:.2}\" stroke=\"{color}\" stroke-width=\"2\"/>",
            lx + 22.0
        );
        let _ = writeln!(
            svg,
            "<text x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"11\">{}{}</text>",
            lx + 28.0,
            legend_y + 4.0,
            s.learner,
            slope_note
        );
        legend_y += 18.0;
    }
    let _ = writeln!(svg, "</svg>");
    Ok(svg)
}

/// Writes the chart to `path`.
pub fn emit_plot(series: &[RateSeries], path: &Path) -> Result<()> {
    let svg = render_svg(series)?;
    std::fs::write(path, svg)?;
    Ok(())
}
