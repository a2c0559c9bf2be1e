//! Static SVG charts of the sweep aggregates against payload.

use std::fmt::Write as _;

use emla_core::SensitivityReport;

const WIDTH: f64 = 720.0;
const PANEL_HEIGHT: f64 = 260.0;
const MARGIN_LEFT: f64 = 90.0;
const MARGIN_RIGHT: f64 = 150.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 50.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

/// One chart: an aggregate and its payload derivative.
pub struct Chart {
    pub file: &'static str,
    pub title: &'static str,
    pub value_label: &'static str,
    pub pd_label: &'static str,
}

pub const CHARTS: [Chart; 4] = [
    Chart {
        file: "power.svg",
        title: "Peak delivered power",
        value_label: "max |ψ1| (W)",
        pd_label: "∂/∂m (W/kg)",
    },
    Chart {
        file: "force.svg",
        title: "Peak actuator force",
        value_label: "max |ψ2| (N)",
        pd_label: "∂/∂m (N/kg)",
    },
    Chart {
        file: "energy.svg",
        title: "Consumed energy",
        value_label: "ψ3 (J)",
        pd_label: "∂/∂m (J/kg)",
    },
    Chart {
        file: "efficiency.svg",
        title: "Mean efficiency",
        value_label: "mean ψ4 (-)",
        pd_label: "∂/∂m (1/kg)",
    },
];

type Series = Vec<Vec<Option<f64>>>;

fn extract(report: &SensitivityReport, chart: usize) -> (Series, Series) {
    let n = report.actuator_names.len();
    let mut values = vec![Vec::new(); n];
    let mut pds = vec![Vec::new(); n];
    for e in &report.entries {
        for a in 0..n {
            let (s, d) = (&e.summaries[a], &e.summary_derivatives[a]);
            let (v, p) = match chart {
                0 => (Some(s.peak_power), Some(d.peak_power)),
                1 => (Some(s.peak_force), Some(d.peak_force)),
                2 => (Some(s.energy), Some(d.energy)),
                _ => (s.mean_efficiency, d.mean_efficiency),
            };
            values[a].push(v);
            pds[a].push(p);
        }
    }
    (values, pds)
}

fn nice_step(span: f64) -> f64 {
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let frac = raw / mag;
    let nice = if frac <= 1.0 {
        1.0
    } else if frac <= 2.0 {
        2.0
    } else if frac <= 5.0 {
        5.0
    } else {
        10.0
    };
    nice * mag
}

fn bounds<'a>(values: impl Iterator<Item = &'a f64>) -> (f64, f64) {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for &v in values {
        if v.is_finite() {
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 * hi.abs().max(1.0) {
        let pad = hi.abs().max(1.0) * 0.05;
        return (lo - pad, hi + pad);
    }
    (lo, hi)
}

fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    let step = nice_step(hi - lo);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|k| k as f64 * step).collect()
}

fn label(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else if v.abs() >= 1e4 || v.abs() < 1e-2 {
        format!("{v:.2e}")
    } else {
        let s = format!("{v:.3}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn panel(svg: &mut String, top: f64, x: &[f64], series: &Series, names: &[String], y_label: &str) {
    let (x0, x1) = bounds(x.iter());
    let (y0, y1) = bounds(series.iter().flatten().flatten());
    let left = MARGIN_LEFT;
    let right = WIDTH - MARGIN_RIGHT;
    let bottom = top + PANEL_HEIGHT - MARGIN_BOTTOM;
    let upper = top + MARGIN_TOP;
    let sx = |v: f64| left + (v - x0) / (x1 - x0) * (right - left);
    let sy = |v: f64| bottom - (v - y0) / (y1 - y0) * (bottom - upper);

    let _ = writeln!(
        svg,
        r##"<rect x="{left:.2}" y="{upper:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="#333"/>"##,
        right - left,
        bottom - upper
    );
    for t in ticks(x0, x1) {
        let px = sx(t);
        let _ = writeln!(
            svg,
            r##"<line x1="{px:.2}" y1="{bottom:.2}" x2="{px:.2}" y2="{:.2}" stroke="#333"/><text x="{px:.2}" y="{:.2}" text-anchor="middle">{}</text>"##,
            bottom + 5.0,
            bottom + 18.0,
            label(t)
        );
    }
    for t in ticks(y0, y1) {
        let py = sy(t);
        let _ = writeln!(
            svg,
            r##"<line x1="{:.2}" y1="{py:.2}" x2="{left:.2}" y2="{py:.2}" stroke="#333"/><line x1="{left:.2}" y1="{py:.2}" x2="{right:.2}" y2="{py:.2}" stroke="#ddd"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"##,
            left - 5.0,
            left - 8.0,
            py + 4.0,
            label(t)
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">payload m_TCP (kg)</text>"#,
        (left + right) / 2.0,
        bottom + 38.0
    );
    let _ = writeln!(
        svg,
        r#"<text transform="translate({:.2},{:.2}) rotate(-90)" text-anchor="middle">{}</text>"#,
        left - 62.0,
        (upper + bottom) / 2.0,
        escape(y_label)
    );
    for (i, (s, name)) in series.iter().zip(names).enumerate() {
        let color = COLORS[i % COLORS.len()];
        let points: Vec<String> = x
            .iter()
            .zip(s)
            .filter_map(|(&xv, yv)| yv.filter(|v| v.is_finite()).map(|yv| format!("{:.2},{:.2}", sx(xv), sy(yv))))
            .collect();
        if points.len() > 1 {
            let _ = writeln!(
                svg,
                r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
                points.join(" ")
            );
        } else if let Some(p) = points.first() {
            let (px, py) = p.split_once(',').unwrap_or(("0", "0"));
            let _ = writeln!(svg, r#"<circle cx="{px}" cy="{py}" r="3" fill="{color}"/>"#);
        }
        let ly = upper + 14.0 + 18.0 * i as f64;
        let _ = writeln!(
            svg,
            r#"<line x1="{:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/><text x="{:.2}" y="{:.2}">{}</text>"#,
            right + 12.0,
            right + 32.0,
            right + 38.0,
            ly + 4.0,
            escape(name)
        );
    }
}

/// Renders one chart. The derivative panel needs at least two payloads.
pub fn render(report: &SensitivityReport, index: usize) -> String {
    let chart = &CHARTS[index];
    let x = report.payloads();
    let (values, pds) = extract(report, index);
    let with_pd = x.len() >= 2;
    let height = if with_pd { 2.0 * PANEL_HEIGHT } else { PANEL_HEIGHT + 30.0 };
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" viewBox="0 0 {WIDTH} {height}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="22" text-anchor="middle" font-size="15">{}</text>"#,
        WIDTH / 2.0,
        escape(chart.title)
    );
    panel(&mut svg, 0.0, &x, &values, &report.actuator_names, chart.value_label);
    if with_pd {
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="13">Payload derivative</text>"#,
            WIDTH / 2.0,
            PANEL_HEIGHT + 22.0
        );
        panel(&mut svg, PANEL_HEIGHT, &x, &pds, &report.actuator_names, chart.pd_label);
    } else {
        let _ = writeln!(
            svg,
            r##"<text x="{:.2}" y="{:.2}" text-anchor="middle" fill="#666">derivative panel omitted: needs at least two payloads</text>"##,
            WIDTH / 2.0,
            PANEL_HEIGHT + 14.0
        );
    }
    svg.push_str("</svg>\n");
    svg
}
