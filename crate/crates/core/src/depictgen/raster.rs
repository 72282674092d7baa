//! Anti-aliased grayscale drawing on an ink-coverage buffer.

use crate::chemgraph::Point;

pub struct Canvas {
    pub width: usize,
    pub height: usize,
    ink: Vec<f32>,
}

fn dist_to_segment(p: Point, a: Point, b: Point) -> f64 {
    let ab = b.sub(a);
    let len2 = ab.x * ab.x + ab.y * ab.y;
    let t = if len2 <= 0.0 {
        0.0
    } else {
        (((p.x - a.x) * ab.x + (p.y - a.y) * ab.y) / len2).clamp(0.0, 1.0)
    };
    p.dist(a.add(ab.scale(t)))
}

impl Canvas {
    pub fn new(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            ink: vec![0.0; width * height],
        }
    }

    fn span(&self, lo: f64, hi: f64, max: usize) -> (usize, usize) {
        let a = lo.floor().max(0.0) as usize;
        let b = (hi.ceil().max(0.0) as usize).min(max);
        (a.min(max), b)
    }

    fn plot(&mut self, x: usize, y: usize, cov: f64) {
        let i = y * self.width + x;
        let c = cov.clamp(0.0, 1.0) as f32;
        if c > self.ink[i] {
            self.ink[i] = c;
        }
    }

    /// Line with round caps and the given full width.
    pub fn line(&mut self, a: Point, b: Point, width: f64) {
        let r = width / 2.0;
        let pad = r + 1.0;
        let (x0, x1) = self.span(a.x.min(b.x) - pad, a.x.max(b.x) + pad, self.width);
        let (y0, y1) = self.span(a.y.min(b.y) - pad, a.y.max(b.y) + pad, self.height);
        for y in y0..y1 {
            for x in x0..x1 {
                let p = Point::new(x as f64 + 0.5, y as f64 + 0.5);
                let d = dist_to_segment(p, a, b);
                if d < r + 0.5 {
                    self.plot(x, y, r + 0.5 - d);
                }
            }
        }
    }

    pub fn polyline(&mut self, pts: &[Point], width: f64) {
        for w in pts.windows(2) {
            self.line(w[0], w[1], width);
        }
    }

    /// Filled convex polygon with an anti-aliased rim.
    pub fn fill_convex(&mut self, poly: &[Point]) {
        let n = poly.len();
        if n < 3 {
            return;
        }
        let min_x = poly.iter().map(|p| p.x).fold(f64::INFINITY, f64::min) - 1.0;
        let max_x = poly.iter().map(|p| p.x).fold(f64::NEG_INFINITY, f64::max) + 1.0;
        let min_y = poly.iter().map(|p| p.y).fold(f64::INFINITY, f64::min) - 1.0;
        let max_y = poly.iter().map(|p| p.y).fold(f64::NEG_INFINITY, f64::max) + 1.0;
        let (x0, x1) = self.span(min_x, max_x, self.width);
        let (y0, y1) = self.span(min_y, max_y, self.height);
        // orientation sign so "inside" has a consistent sign
        let area: f64 = (0..n)
            .map(|i| {
                let (a, b) = (poly[i], poly[(i + 1) % n]);
                a.x * b.y - b.x * a.y
            })
            .sum();
        let sign = if area >= 0.0 { 1.0 } else { -1.0 };
        for y in y0..y1 {
            for x in x0..x1 {
                let p = Point::new(x as f64 + 0.5, y as f64 + 0.5);
                let mut inside = true;
                let mut edge_d = f64::INFINITY;
                for i in 0..n {
                    let (a, b) = (poly[i], poly[(i + 1) % n]);
                    let c = (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x);
                    if c * sign < 0.0 {
                        inside = false;
                    }
                    edge_d = edge_d.min(dist_to_segment(p, a, b));
                }
                let cov = if inside { 0.5 + edge_d } else { 0.5 - edge_d };
                if cov > 0.0 {
                    self.plot(x, y, cov);
                }
            }
        }
    }

    /// Removes all ink inside the rectangle.
    pub fn clear_rect(&mut self, x0: f64, y0: f64, x1: f64, y1: f64) {
        let (ax, bx) = self.span(x0, x1, self.width);
        let (ay, by) = self.span(y0, y1, self.height);
        for y in ay..by {
            for x in ax..bx {
                self.ink[y * self.width + x] = 0.0;
            }
        }
    }

    /// 8-bit grayscale pixels, white background.
    pub fn to_gray(&self) -> Vec<u8> {
        self.ink
            .iter()
            .map(|&c| (255.0 * (1.0 - c)).round() as u8)
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn horizontal_line_inks_its_row() {
        let mut c = Canvas::new(20, 10);
        c.line(Point::new(2.0, 5.0), Point::new(18.0, 5.0), 2.0);
        let px = c.to_gray();
        assert_eq!(px[5 * 20 + 10], 0);
        assert_eq!(px[20 + 10], 255);
    }

    #[test]
    fn triangle_fill_and_clear() {
        let mut c = Canvas::new(20, 20);
        c.fill_convex(&[
            Point::new(2.0, 2.0),
            Point::new(18.0, 2.0),
            Point::new(10.0, 18.0),
        ]);
        assert_eq!(c.to_gray()[5 * 20 + 10], 0);
        c.clear_rect(0.0, 0.0, 20.0, 20.0);
        assert!(c.to_gray().iter().all(|&p| p == 255));
    }
}
