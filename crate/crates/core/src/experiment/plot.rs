//! Minimal SVG charts: lines, step functions, shaded bands and bars.

use std::fmt::Write;

const W: f64 = 640.0;
const H: f64 = 420.0;
const LEFT: f64 = 64.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 36.0;
const BOTTOM: f64 = 48.0;

#[derive(Debug, Clone)]
pub enum Mark {
    Line,
    Dashed,
    /// Right-continuous step function through the points.
    Step,
    /// Area between the points and `upper`.
    Band { upper: Vec<(f64, f64)> },
    /// Bars centred at each x.
    Bars { width: f64 },
    Dots,
}

#[derive(Debug, Clone)]
pub struct Series {
    pub name: String,
    pub color: &'static str,
    pub points: Vec<(f64, f64)>,
    pub mark: Mark,
}

impl Series {
    pub fn new(name: impl Into<String>, color: &'static str, points: Vec<(f64, f64)>, mark: Mark) -> Self {
        Self { name: name.into(), color, points, mark }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Chart {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
    pub x_range: Option<(f64, f64)>,
    pub y_range: Option<(f64, f64)>,
}

fn nice_step(span: f64) -> f64 {
    let raw = span / 6.0;
    let mag = 10f64.powf(raw.log10().floor());
    let r = raw / mag;
    let m = if r < 1.5 {
        1.0
    } else if r < 3.5 {
        2.0
    } else if r < 7.5 {
        5.0
    } else {
        10.0
    };
    m * mag
}

fn fmt_tick(v: f64, step: f64) -> String {
    let digits = (-step.log10().floor()).max(0.0) as usize;
    let s = format!("{v:.digits$}");
    if s == "-0" || s.starts_with("-0.") && s.trim_start_matches(['-', '0', '.']).is_empty() {
        s.trim_start_matches('-').to_string()
    } else {
        s
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

impl Chart {
    pub fn new(title: impl Into<String>, x_label: impl Into<String>, y_label: impl Into<String>) -> Self {
        Self { title: title.into(), x_label: x_label.into(), y_label: y_label.into(), ..Default::default() }
    }

    pub fn with(mut self, s: Series) -> Self {
        self.series.push(s);
        self
    }

    pub fn x_range(mut self, lo: f64, hi: f64) -> Self {
        self.x_range = Some((lo, hi));
        self
    }

    pub fn y_range(mut self, lo: f64, hi: f64) -> Self {
        self.y_range = Some((lo, hi));
        self
    }

    fn bounds(&self) -> ((f64, f64), (f64, f64)) {
        let mut xs = (f64::INFINITY, f64::NEG_INFINITY);
        let mut ys = (f64::INFINITY, f64::NEG_INFINITY);
        let mut take = |(x, y): (f64, f64)| {
            if x.is_finite() && y.is_finite() {
                xs = (xs.0.min(x), xs.1.max(x));
                ys = (ys.0.min(y), ys.1.max(y));
            }
        };
        for s in &self.series {
            s.points.iter().copied().for_each(&mut take);
            match &s.mark {
                Mark::Band { upper } => upper.iter().copied().for_each(&mut take),
                Mark::Bars { width } => {
                    for &(x, _) in &s.points {
                        take((x - width / 2.0, 0.0));
                        take((x + width / 2.0, 0.0));
                    }
                }
                _ => {}
            }
        }
        let fix = |(lo, hi): (f64, f64)| {
            if !lo.is_finite() {
                (0.0, 1.0)
            } else if hi - lo < 1e-12 {
                (lo - 0.5, hi + 0.5)
            } else {
                (lo, hi)
            }
        };
        (self.x_range.unwrap_or_else(|| fix(xs)), self.y_range.unwrap_or_else(|| fix(ys)))
    }

    pub fn render(&self) -> String {
        let ((x0, x1), (y0, y1)) = self.bounds();
        let pw = W - LEFT - RIGHT;
        let ph = H - TOP - BOTTOM;
        let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * pw;
        let sy = |y: f64| TOP + ph - (y - y0) / (y1 - y0) * ph;
        let clampx = |x: f64| x.clamp(x0, x1);
        let clampy = |y: f64| y.clamp(y0, y1);
        let mut o = String::new();
        let _ = writeln!(
            o,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="11">"#
        );
        let _ = writeln!(o, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
        let _ = writeln!(o, r#"<text x="{}" y="20" text-anchor="middle" font-size="13">{}</text>"#, W / 2.0, escape(&self.title));
        // grid and ticks
        let xs = nice_step(x1 - x0);
        let mut v = (x0 / xs).ceil() * xs;
        while v <= x1 + 1e-9 * xs {
            let px = sx(v);
            let _ = writeln!(o, r##"<line x1="{px:.2}" y1="{TOP}" x2="{px:.2}" y2="{:.2}" stroke="#eee"/>"##, TOP + ph);
            let _ = writeln!(o, r#"<text x="{px:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, TOP + ph + 14.0, fmt_tick(v, xs));
            v += xs;
        }
        let ys = nice_step(y1 - y0);
        let mut v = (y0 / ys).ceil() * ys;
        while v <= y1 + 1e-9 * ys {
            let py = sy(v);
            let _ = writeln!(o, r##"<line x1="{LEFT}" y1="{py:.2}" x2="{:.2}" y2="{py:.2}" stroke="#eee"/>"##, LEFT + pw);
            let _ = writeln!(o, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#, LEFT - 6.0, py + 4.0, fmt_tick(v, ys));
            v += ys;
        }
        let _ = writeln!(o, r##"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="#444"/>"##);
        let _ = writeln!(o, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, LEFT + pw / 2.0, H - 10.0, escape(&self.x_label));
        let _ = writeln!(
            o,
            r#"<text x="14" y="{:.2}" text-anchor="middle" transform="rotate(-90 14 {:.2})">{}</text>"#,
            TOP + ph / 2.0,
            TOP + ph / 2.0,
            escape(&self.y_label)
        );
        let _ = writeln!(o, r#"<clipPath id="plot"><rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}"/></clipPath>"#);
        let _ = writeln!(o, r#"<g clip-path="url(#plot)">"#);
        for s in &self.series {
            let pts: Vec<(f64, f64)> = s.points.iter().copied().filter(|p| p.0.is_finite() && p.1.is_finite()).collect();
            let path = |pts: &[(f64, f64)]| {
                pts.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(clampx(x)), sy(clampy(y)))).collect::<Vec<_>>().join(" ")
            };
            match &s.mark {
                Mark::Line | Mark::Dashed => {
                    let dash = if matches!(s.mark, Mark::Dashed) { r#" stroke-dasharray="5,3""# } else { "" };
                    let _ = writeln!(o, r#"<polyline points="{}" fill="none" stroke="{}" stroke-width="1.5"{dash}/>"#, path(&pts), s.color);
                }
                Mark::Step => {
                    let mut st = Vec::with_capacity(2 * pts.len());
                    for (i, &(x, y)) in pts.iter().enumerate() {
                        if i > 0 {
                            st.push((x, pts[i - 1].1));
                        }
                        st.push((x, y));
                    }
                    let _ = writeln!(o, r#"<polyline points="{}" fill="none" stroke="{}" stroke-width="1.5"/>"#, path(&st), s.color);
                }
                Mark::Band { upper } => {
                    let mut poly = pts.clone();
                    poly.extend(upper.iter().rev().copied().filter(|p| p.0.is_finite() && p.1.is_finite()));
                    let _ = writeln!(o, r#"<polygon points="{}" fill="{}" fill-opacity="0.2" stroke="none"/>"#, path(&poly), s.color);
                }
                Mark::Bars { width } => {
                    for &(x, y) in &pts {
                        let (a, b) = (sx(clampx(x - width / 2.0)), sx(clampx(x + width / 2.0)));
                        let (top, base) = (sy(clampy(y.max(0.0))), sy(clampy(0.0)));
                        let _ = writeln!(
                            o,
                            r#"<rect x="{a:.2}" y="{top:.2}" width="{:.2}" height="{:.2}" fill="{}" fill-opacity="0.6"/>"#,
                            (b - a).max(0.5),
                            (base - top).max(0.0),
                            s.color
                        );
                    }
                }
                Mark::Dots => {
                    for &(x, y) in &pts {
                        let _ = writeln!(o, r#"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="{}"/>"#, sx(clampx(x)), sy(clampy(y)), s.color);
                    }
                }
            }
        }
        let _ = writeln!(o, "</g>");
        for (i, s) in self.series.iter().enumerate() {
            let y = TOP + 14.0 + 16.0 * i as f64;
            let x = LEFT + 12.0;
            let _ = writeln!(o, r#"<rect x="{x}" y="{:.2}" width="14" height="4" fill="{}"/>"#, y - 4.0, s.color);
            let _ = writeln!(o, r#"<text x="{}" y="{y:.2}">{}</text>"#, x + 20.0, escape(&s.name));
        }
        o.push_str("</svg>\n");
        o
    }
}

/// ECDF as step points, thinned to at most `max_points` steps.
pub fn ecdf_points(sorted: &[f64], max_points: usize) -> Vec<(f64, f64)> {
    let n = sorted.len();
    if n == 0 {
        return vec![];
    }
    let stride = n.div_ceil(max_points.max(1)).max(1);
    let mut out = Vec::new();
    let mut i = 0;
    while i < n {
        let x = sorted[i];
        let mut j = i;
        while j < n && sorted[j] == x {
            j += 1;
        }
        let j = j.max((i + stride).min(n));
        out.push((sorted[j - 1], j as f64 / n as f64));
        i = j;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_every_mark() {
        let svg = Chart::new("t", "x", "y")
            .with(Series::new("a", "#1f77b4", vec![(0.0, 0.0), (1.0, 1.0)], Mark::Line))
            .with(Series::new("b", "#ff7f0e", vec![(0.0, 0.2), (0.5, 0.6)], Mark::Step))
            .with(Series::new("c", "#2ca02c", vec![(0.0, 0.0), (1.0, 0.5)], Mark::Band { upper: vec![(0.0, 0.2), (1.0, 0.8)] }))
            .with(Series::new("d", "#d62728", vec![(0.5, 0.3)], Mark::Bars { width: 0.1 }))
            .with(Series::new("e <x>", "#000", vec![(0.2, 0.2)], Mark::Dots))
            .render();
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
        assert!(svg.contains("polygon") && svg.contains("circle") && svg.contains("e &lt;x&gt;"));
    }

    #[test]
    fn ecdf_points_end_at_one() {
        let v: Vec<f64> = (0..1000).map(|i| i as f64).collect();
        let p = ecdf_points(&v, 50);
        assert!(p.len() <= 51);
        assert_eq!(p.last().unwrap().1, 1.0);
        assert!(ecdf_points(&[], 10).is_empty());
    }

    #[test]
    fn empty_chart_renders() {
        assert!(Chart::new("e", "", "").render().contains("</svg>"));
    }
}
