//! Minimal SVG writer: polylines, segments and dots in a fitted viewport.

use std::fmt::Write;

#[derive(Debug, Clone)]
enum Item {
    Polyline { points: Vec<(f64, f64)>, stroke: String, width: f64 },
    Segment { a: (f64, f64), b: (f64, f64), stroke: String, width: f64 },
    Dot { at: (f64, f64), r: f64, fill: String },
}

/// Accumulates shapes in data coordinates and maps them onto a fixed-size
/// canvas with the y axis pointing up.
#[derive(Debug, Clone)]
pub struct Canvas {
    width: f64,
    height: f64,
    items: Vec<Item>,
}

impl Canvas {
    pub fn new(width: f64, height: f64) -> Self {
        Canvas { width, height, items: Vec::new() }
    }

    pub fn polyline(&mut self, points: Vec<(f64, f64)>, stroke: &str, width: f64) {
        self.items.push(Item::Polyline { points, stroke: stroke.to_string(), width });
    }

    pub fn segment(&mut self, a: (f64, f64), b: (f64, f64), stroke: &str, width: f64) {
        self.items.push(Item::Segment { a, b, stroke: stroke.to_string(), width });
    }

    pub fn dot(&mut self, at: (f64, f64), r: f64, fill: &str) {
        self.items.push(Item::Dot { at, r, fill: fill.to_string() });
    }

    fn bounds(&self) -> (f64, f64, f64, f64) {
        let mut b = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
        let mut grow = |(x, y): (f64, f64)| {
            if x.is_finite() && y.is_finite() {
                b = (b.0.min(x), b.1.min(y), b.2.max(x), b.3.max(y));
            }
        };
        for it in &self.items {
            match it {
                Item::Polyline { points, .. } => points.iter().for_each(|p| grow(*p)),
                Item::Segment { a, b, .. } => {
                    grow(*a);
                    grow(*b);
                }
                Item::Dot { at, .. } => grow(*at),
            }
        }
        if !b.0.is_finite() {
            return (0.0, 0.0, 1.0, 1.0);
        }
        if b.2 - b.0 < 1e-12 {
            b.0 -= 0.5;
            b.2 += 0.5;
        }
        if b.3 - b.1 < 1e-12 {
            b.1 -= 0.5;
            b.3 += 0.5;
        }
        b
    }

    pub fn render(&self) -> String {
        let (x0, y0, x1, y1) = self.bounds();
        let pad = 20.0;
        let sx = (self.width - 2.0 * pad) / (x1 - x0);
        let sy = (self.height - 2.0 * pad) / (y1 - y0);
        let map = |(x, y): (f64, f64)| (pad + (x - x0) * sx, self.height - pad - (y - y0) * sy);
        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#,
            w = self.width,
            h = self.height
        );
        let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
        for it in &self.items {
            match it {
                Item::Polyline { points, stroke, width } => {
                    let pts: Vec<String> = points
                        .iter()
                        .map(|p| {
                            let (x, y) = map(*p);
                            format!("{x:.3},{y:.3}")
                        })
                        .collect();
                    let _ = writeln!(
                        s,
                        r#"<polyline points="{}" fill="none" stroke="{stroke}" stroke-width="{width}"/>"#,
                        pts.join(" ")
                    );
                }
                Item::Segment { a, b, stroke, width } => {
                    let (ax, ay) = map(*a);
                    let (bx, by) = map(*b);
                    let _ = writeln!(
                        s,
                        r#"<line x1="{ax:.3}" y1="{ay:.3}" x2="{bx:.3}" y2="{by:.3}" stroke="{stroke}" stroke-width="{width}"/>"#
                    );
                }
                Item::Dot { at, r, fill } => {
                    let (x, y) = map(*at);
                    let _ = writeln!(s, r#"<circle cx="{x:.3}" cy="{y:.3}" r="{r}" fill="{fill}"/>"#);
                }
            }
        }
        s.push_str("</svg>\n");
        s
    }
}
