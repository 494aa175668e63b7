//! Self-contained SVG line and scatter charts. Display only; no layout
//! engine, just polylines, circles, axes and a few labels.

use std::fmt::Write as _;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 440.0;
const MARGIN_L: f64 = 80.0;
const MARGIN_R: f64 = 20.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 50.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

#[derive(Debug, Clone)]
pub struct Curve {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    pub dashed: bool,
}

impl Curve {
    pub fn new(label: impl Into<String>, ys: &[f64]) -> Self {
        Self {
            label: label.into(),
            points: ys.iter().enumerate().map(|(k, y)| (k as f64, *y)).collect(),
            dashed: false,
        }
    }

    pub fn dashed(mut self) -> Self {
        self.dashed = true;
        self
    }
}

#[derive(Debug, Clone, Default)]
pub struct Chart {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_y: bool,
    pub curves: Vec<Curve>,
    /// Horizontal reference lines `(label, y)`.
    pub rules: Vec<(String, f64)>,
    /// Scatter points `(label, points)`.
    pub scatter: Vec<(String, Vec<(f64, f64)>)>,
}

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
    log_y: bool,
}

impl Frame {
    fn ty(&self, y: f64) -> f64 {
        if self.log_y { y.log10() } else { y }
    }

    fn px(&self, x: f64) -> f64 {
        MARGIN_L + (x - self.x0) / (self.x1 - self.x0) * (WIDTH - MARGIN_L - MARGIN_R)
    }

    fn py(&self, y: f64) -> f64 {
        let t = (self.ty(y) - self.y0) / (self.y1 - self.y0);
        HEIGHT - MARGIN_B - t * (HEIGHT - MARGIN_T - MARGIN_B)
    }
}

fn span(values: impl Iterator<Item = f64>) -> Option<(f64, f64)> {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        return None;
    }
    Some(if hi > lo { (lo, hi) } else { (lo - 0.5, hi + 0.5) })
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

impl Chart {
    pub fn new(title: impl Into<String>, x_label: impl Into<String>, y_label: impl Into<String>) -> Self {
        Self {
            title: title.into(),
            x_label: x_label.into(),
            y_label: y_label.into(),
            ..Self::default()
        }
    }

    fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        let usable = move |p: &(f64, f64)| p.0.is_finite() && p.1.is_finite() && (!self.log_y || p.1 > 0.0);
        self.curves
            .iter()
            .flat_map(|c| c.points.iter())
            .chain(self.scatter.iter().flat_map(|s| s.1.iter()))
            .copied()
            .filter(usable)
    }

    fn frame(&self) -> Frame {
        let (x0, x1) = span(self.points().map(|p| p.0)).unwrap_or((0.0, 1.0));
        let ys = self
            .points()
            .map(|p| p.1)
            .chain(self.rules.iter().map(|r| r.1).filter(|y| !self.log_y || *y > 0.0))
            .map(|y| if self.log_y { y.log10() } else { y });
        let (y0, y1) = span(ys).unwrap_or((0.0, 1.0));
        let pad = 0.05 * (y1 - y0);
        Frame { x0, x1, y0: y0 - pad, y1: y1 + pad, log_y: self.log_y }
    }

    pub fn render(&self) -> String {
        let f = self.frame();
        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let (left, right, top, bottom) = (MARGIN_L, WIDTH - MARGIN_R, MARGIN_T, HEIGHT - MARGIN_B);
        let _ = writeln!(
            s,
            r#"<path d="M{left},{top} L{left},{bottom} L{right},{bottom}" fill="none" stroke="black"/>"#
        );
        for i in 0..=4 {
            let t = i as f64 / 4.0;
            let xv = f.x0 + t * (f.x1 - f.x0);
            let yv = f.y0 + t * (f.y1 - f.y0);
            let ylab = if f.log_y { format!("1e{yv:.1}") } else { format!("{yv:.3e}") };
            let px = f.px(xv);
            let py = bottom - t * (bottom - top);
            let _ = writeln!(s, r#"<text x="{px:.1}" y="{:.1}" text-anchor="middle">{xv:.4}</text>"#, bottom + 16.0);
            let _ = writeln!(s, r#"<text x="{:.1}" y="{py:.1}" text-anchor="end">{ylab}</text>"#, left - 4.0);
        }
        let _ = writeln!(s, r#"<text x="{:.1}" y="20" text-anchor="middle" font-size="14">{}</text>"#, WIDTH / 2.0, escape(&self.title));
        let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#, WIDTH / 2.0, HEIGHT - 10.0, escape(&self.x_label));
        let _ = writeln!(
            s,
            r#"<text x="14" y="{:.1}" text-anchor="middle" transform="rotate(-90 14 {:.1})">{}</text>"#,
            HEIGHT / 2.0,
            HEIGHT / 2.0,
            escape(&self.y_label)
        );

        let mut legend = Vec::new();
        for (i, c) in self.curves.iter().enumerate() {
            let color = PALETTE[i % PALETTE.len()];
            let pts: Vec<String> = c
                .points
                .iter()
                .filter(|p| p.1.is_finite() && (!f.log_y || p.1 > 0.0))
                .map(|p| format!("{:.2},{:.2}", f.px(p.0), f.py(p.1)))
                .collect();
            let dash = if c.dashed { r#" stroke-dasharray="5,3""# } else { "" };
            let _ = writeln!(
                s,
                r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.2"{dash}/>"#,
                pts.join(" ")
            );
            legend.push((c.label.as_str(), color));
        }
        for (label, y) in &self.rules {
            if f.log_y && *y <= 0.0 {
                continue;
            }
            let py = f.py(*y);
            let _ = writeln!(
                s,
                r#"<line x1="{left}" y1="{py:.2}" x2="{right}" y2="{py:.2}" stroke="black" stroke-dasharray="2,2"/>"#
            );
            let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#, right - 4.0, py - 4.0, escape(label));
        }
        for (i, (label, pts)) in self.scatter.iter().enumerate() {
            let color = PALETTE[(self.curves.len() + i) % PALETTE.len()];
            for p in pts.iter().filter(|p| p.0.is_finite() && p.1.is_finite()) {
                let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="1.5" fill="{color}"/>"#, f.px(p.0), f.py(p.1));
            }
            legend.push((label.as_str(), color));
        }
        for (i, (label, color)) in legend.iter().enumerate() {
            let y = top + 14.0 + 16.0 * i as f64;
            let _ = writeln!(s, r#"<rect x="{:.1}" y="{:.1}" width="10" height="10" fill="{color}"/>"#, left + 10.0, y - 9.0);
            let _ = writeln!(s, r#"<text x="{:.1}" y="{y:.1}">{}</text>"#, left + 24.0, escape(label));
        }
        s.push_str("</svg>\n");
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_curves_rules_and_scatter() {
        let mut c = Chart::new("error", "k", "R_k");
        c.log_y = true;
        c.curves.push(Curve::new("r_hat", &[1.0, 0.5, 0.1, 0.05]));
        c.curves.push(Curve::new("bound", &[2.0, f64::INFINITY, 0.2, 0.1]).dashed());
        c.rules.push(("z0^2".into(), 0.03));
        c.scatter.push(("theta".into(), vec![(0.0, 1.0), (1.0, 0.5)]));
        let svg = c.render();
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert_eq!(svg.matches("<circle").count(), 2);
        assert!(svg.contains("stroke-dasharray=\"2,2\""));
        assert!(!svg.contains("NaN") && !svg.contains("inf"));
    }

    #[test]
    fn empty_chart_is_valid() {
        let svg = Chart::new("a < b", "x", "y").render();
        assert!(svg.contains("a &lt; b"));
    }
}
