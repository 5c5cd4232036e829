//! Self-contained SVG rendering of mean/variance-vs-N panels.

use std::fmt::Write;

use super::McSummary;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Figure {
    /// Linear y axis with a dotted truth line.
    Mean,
    /// Logarithmic y axis.
    Variance,
}

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf",
];

const WIDTH: f64 = 720.0;
const PANEL_H: f64 = 240.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 200.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 40.0;

struct Axis {
    lo: f64,
    hi: f64,
    log: bool,
}

impl Axis {
    fn new(values: impl Iterator<Item = f64>, log: bool) -> Option<Self> {
        let vals: Vec<f64> = values
            .filter(|v| v.is_finite() && (!log || *v > 0.0))
            .map(|v| if log { v.log10() } else { v })
            .collect();
        let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !lo.is_finite() {
            return None;
        }
        let (lo, hi) = if log {
            (lo.floor(), hi.ceil().max(lo.floor() + 1.0))
        } else {
            let pad = ((hi - lo) * 0.08).max(1e-9 * hi.abs().max(1.0));
            (lo - pad, hi + pad)
        };
        Some(Self { lo, hi, log })
    }

    /// Position in [0, 1].
    fn frac(&self, v: f64) -> Option<f64> {
        let v = if self.log {
            if v <= 0.0 {
                return None;
            }
            v.log10()
        } else {
            v
        };
        Some((v - self.lo) / (self.hi - self.lo))
    }

    fn ticks(&self) -> Vec<(f64, String)> {
        if self.log {
            let mut out = Vec::new();
            let mut e = self.lo;
            while e <= self.hi + 1e-9 {
                out.push((10f64.powf(e), format!("1e{}", e as i64)));
                e += 1.0;
            }
            out
        } else {
            (0..=4)
                .map(|i| {
                    let v = self.lo + (self.hi - self.lo) * i as f64 / 4.0;
                    (v, format!("{v:.4}"))
                })
                .collect()
        }
    }
}

/// One panel per parameter stacked vertically, every instance overlaid.
pub fn render_svg(summary: &McSummary, truth: &[f64], fig: Figure) -> String {
    let panels = summary.param_names.len();
    let height = TOP + panels as f64 * PANEL_H + BOTTOM;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" viewBox="0 0 {WIDTH} {height}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let title = match fig {
        Figure::Mean => "Mean of the estimated parameters",
        Figure::Variance => "Variance of the estimated parameters",
    };
    let _ = writeln!(
        s,
        r#"<text x="{}" y="18" text-anchor="middle" font-size="14">{title}</text>"#,
        (WIDTH - RIGHT + LEFT) / 2.0
    );

    let x_axis = Axis::new(summary.n_grid.iter().map(|&n| n as f64), true);
    let plot_w = WIDTH - LEFT - RIGHT;
    let inner_h = PANEL_H - 30.0;

    for (p, name) in summary.param_names.iter().enumerate() {
        let y0 = TOP + p as f64 * PANEL_H;
        let values = summary
            .cells
            .iter()
            .filter(|c| c.param == p)
            .filter_map(|c| match fig {
                Figure::Mean => c.mean,
                Figure::Variance => c.variance,
            });
        let y_axis = match fig {
            Figure::Mean => Axis::new(values.chain(std::iter::once(truth[p])), false),
            Figure::Variance => Axis::new(values, true),
        };
        let _ = writeln!(
            s,
            r#"<rect x="{LEFT}" y="{y0:.2}" width="{plot_w:.2}" height="{inner_h:.2}" fill="none" stroke="black"/>"#
        );
        let _ = writeln!(
            s,
            r#"<text x="18" y="{:.2}" transform="rotate(-90 18 {:.2})" text-anchor="middle">{name}</text>"#,
            y0 + inner_h / 2.0,
            y0 + inner_h / 2.0
        );
        let (Some(xa), Some(ya)) = (&x_axis, &y_axis) else {
            continue;
        };
        let px = |n: f64| xa.frac(n).map(|f| LEFT + f * plot_w);
        let py = |v: f64| ya.frac(v).map(|f| y0 + inner_h - f * inner_h);

        for (v, label) in xa.ticks() {
            if let Some(x) = px(v) {
                let _ = writeln!(
                    s,
                    r##"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="#ccc"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">{label}</text>"##,
                    y0,
                    y0 + inner_h,
                    y0 + inner_h + 14.0
                );
            }
        }
        for (v, label) in ya.ticks() {
            if let Some(y) = py(v) {
                let _ = writeln!(
                    s,
                    r##"<line x1="{LEFT}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#eee"/><text x="{:.2}" y="{:.2}" text-anchor="end">{label}</text>"##,
                    LEFT + plot_w,
                    LEFT - 4.0,
                    y + 4.0
                );
            }
        }
        if fig == Figure::Mean {
            if let Some(y) = py(truth[p]) {
                let _ = writeln!(
                    s,
                    r#"<line class="truth" x1="{LEFT}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="black" stroke-dasharray="2,3"/>"#,
                    LEFT + plot_w
                );
            }
        }
        for (i, inst) in summary.instances.iter().enumerate() {
            let color = PALETTE[i % PALETTE.len()];
            let pts: Vec<String> = summary
                .series(inst, p)
                .iter()
                .filter_map(|c| {
                    let v = match fig {
                        Figure::Mean => c.mean,
                        Figure::Variance => c.variance,
                    }?;
                    Some(format!("{:.2},{:.2}", px(c.n as f64)?, py(v)?))
                })
                .collect();
            if !pts.is_empty() {
                let _ = writeln!(
                    s,
                    r#"<polyline fill="none" stroke="{color}" stroke-width="1.2" points="{}"/>"#,
                    pts.join(" ")
                );
            }
        }
    }

    // legend
    let lx = WIDTH - RIGHT + 12.0;
    for (i, inst) in summary.instances.iter().enumerate() {
        let y = TOP + 12.0 + i as f64 * 16.0;
        let color = PALETTE[i % PALETTE.len()];
        let _ = writeln!(
            s,
            r#"<line x1="{lx}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="{color}" stroke-width="2"/><text x="{:.2}" y="{:.2}">{}</text>"#,
            lx + 20.0,
            lx + 26.0,
            y + 4.0,
            escape(inst)
        );
    }
    if fig == Figure::Mean {
        let y = TOP + 12.0 + summary.instances.len() as f64 * 16.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="black" stroke-dasharray="2,3"/><text x="{:.2}" y="{:.2}">true value</text>"#,
            lx + 20.0,
            lx + 26.0,
            y + 4.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">N (samples)</text>"#,
        LEFT + plot_w / 2.0,
        height - 6.0
    );
    s.push_str("</svg>\n");
    s
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}
