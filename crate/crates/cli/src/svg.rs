//! Minimal SVG emitter: scatter points, circles, polylines and bars inside a
//! framed data rectangle.

use std::fmt::Write as _;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 48.0;

pub struct Plot {
    x: (f64, f64),
    y: (f64, f64),
    title: String,
    body: String,
}

impl Plot {
    pub fn new(title: &str, x: (f64, f64), y: (f64, f64)) -> Self {
        let pad = |r: (f64, f64)| if r.1 > r.0 { r } else { (r.0 - 0.5, r.0 + 0.5) };
        Plot { x: pad(x), y: pad(y), title: title.to_string(), body: String::new() }
    }

    /// Square plot centred on the origin.
    pub fn square(title: &str, half: f64) -> Self {
        Plot::new(title, (-half, half), (-half, half))
    }

    fn sx(&self, x: f64) -> f64 {
        MARGIN + (x - self.x.0) / (self.x.1 - self.x.0) * (WIDTH - 2.0 * MARGIN)
    }

    fn sy(&self, y: f64) -> f64 {
        HEIGHT - MARGIN - (y - self.y.0) / (self.y.1 - self.y.0) * (HEIGHT - 2.0 * MARGIN)
    }

    pub fn points(&mut self, pts: &[(f64, f64)], radius: f64, color: &str) {
        for &(x, y) in pts {
            let _ = writeln!(
                self.body,
                r#"<circle cx="{:.2}" cy="{:.2}" r="{radius:.2}" fill="{color}"/>"#,
                self.sx(x),
                self.sy(y)
            );
        }
    }

    /// Circle of data radius `r`, drawn as an ellipse if the axes differ in scale.
    pub fn circle(&mut self, c: (f64, f64), r: f64, color: &str) {
        let rx = (self.sx(c.0 + r) - self.sx(c.0)).abs();
        let ry = (self.sy(c.1 + r) - self.sy(c.1)).abs();
        let _ = writeln!(
            self.body,
            r#"<ellipse cx="{:.2}" cy="{:.2}" rx="{rx:.2}" ry="{ry:.2}" fill="none" stroke="{color}"/>"#,
            self.sx(c.0),
            self.sy(c.1)
        );
    }

    pub fn polyline(&mut self, pts: &[(f64, f64)], color: &str) {
        let mut d = String::new();
        for &(x, y) in pts {
            let _ = write!(d, "{:.2},{:.2} ", self.sx(x), self.sy(y));
        }
        let _ = writeln!(self.body, r#"<polyline points="{}" fill="none" stroke="{color}"/>"#, d.trim_end());
    }

    /// Bars of the given data width rising from `y = 0`.
    pub fn bars(&mut self, bars: &[(f64, f64)], width: f64, color: &str) {
        for &(x, h) in bars {
            let (x0, x1) = (self.sx(x - width / 2.0), self.sx(x + width / 2.0));
            let (top, base) = (self.sy(h.max(0.0)), self.sy(0.0));
            let _ = writeln!(
                self.body,
                r#"<rect x="{x0:.2}" y="{top:.2}" width="{:.2}" height="{:.2}" fill="{color}"/>"#,
                x1 - x0,
                base - top
            );
        }
    }

    pub fn finish(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
        );
        let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
        let _ = writeln!(
            s,
            r#"<rect x="{MARGIN}" y="{MARGIN}" width="{}" height="{}" fill="none" stroke="black"/>"#,
            WIDTH - 2.0 * MARGIN,
            HEIGHT - 2.0 * MARGIN
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="middle" font-family="sans-serif" font-size="14">{}</text>"#,
            WIDTH / 2.0,
            MARGIN / 2.0,
            escape(&self.title)
        );
        let label = |v: f64| format!("{v:.4}");
        let _ = writeln!(
            s,
            r#"<text x="{MARGIN}" y="{}" font-family="sans-serif" font-size="10">{}</text>"#,
            HEIGHT - MARGIN / 3.0,
            label(self.x.0)
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="end" font-family="sans-serif" font-size="10">{}</text>"#,
            WIDTH - MARGIN,
            HEIGHT - MARGIN / 3.0,
            label(self.x.1)
        );
        let _ = writeln!(
            s,
            r#"<text x="4" y="{}" font-family="sans-serif" font-size="10">{}</text>"#,
            HEIGHT - MARGIN,
            label(self.y.0)
        );
        let _ = writeln!(s, r#"<text x="4" y="{}" font-family="sans-serif" font-size="10">{}</text>"#, MARGIN + 10.0, label(self.y.1));
        s.push_str(&self.body);
        s.push_str("</svg>\n");
        s
    }
}

fn escape(t: &str) -> String {
    t.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corners_map_to_the_frame() {
        let p = Plot::new("t", (0.0, 10.0), (-1.0, 1.0));
        assert_eq!(p.sx(0.0), MARGIN);
        assert_eq!(p.sx(10.0), WIDTH - MARGIN);
        assert_eq!(p.sy(-1.0), HEIGHT - MARGIN);
        assert_eq!(p.sy(1.0), MARGIN);
    }

    #[test]
    fn document_is_closed_and_escaped() {
        let mut p = Plot::square("a < b", 1.0);
        p.points(&[(0.0, 0.0)], 1.0, "black");
        p.bars(&[(0.0, 0.5)], 0.2, "gray");
        let s = p.finish();
        assert!(s.starts_with("<svg") && s.ends_with("</svg>\n"));
        assert!(s.contains("a &lt; b"));
        assert_eq!(s.matches("<circle").count(), 1);
    }
}
