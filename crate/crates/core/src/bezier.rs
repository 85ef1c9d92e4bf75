//! Bernstein polynomials, Bezier curves, and stroke rasterization.

use crate::raster::{blend, check_opacity, RasterImage};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

/// Ordered control points `v_0..v_n` of a Bezier curve of degree `n >= 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlPolygon {
    points: Vec<Point2>,
}

impl ControlPolygon {
    pub fn new(points: Vec<Point2>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::invalid(format!(
                "a control polygon needs at least 2 points, got {}",
                points.len()
            )));
        }
        if let Some(p) = points.iter().find(|p| !p.is_finite()) {
            return Err(Error::invalid(format!("non-finite control point {p:?}")));
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[Point2] {
        &self.points
    }

    pub fn degree(&self) -> usize {
        self.points.len() - 1
    }
}

/// `n choose j` computed multiplicatively in floating point.
fn binomial(n: usize, j: usize) -> f64 {
    let j = j.min(n - j);
    (0..j).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Bernstein basis polynomial `C(n, j) s^j (1 - s)^(n - j)`, with `0^0 = 1`.
pub fn bernstein(j: usize, n: usize, s: f64) -> Result<f64> {
    if j > n {
        return Err(Error::invalid(format!("basis index {j} exceeds degree {n}")));
    }
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::invalid(format!("parameter {s} outside [0, 1]")));
    }
    Ok(bernstein_unchecked(j, n, s))
}

#[inline]
fn bernstein_unchecked(j: usize, n: usize, s: f64) -> f64 {
    binomial(n, j) * s.powi(j as i32) * (1.0 - s).powi((n - j) as i32)
}

/// Point on the curve at parameter `s`: the Bernstein-weighted sum of control points.
pub fn bezier_point(polygon: &ControlPolygon, s: f64) -> Result<Point2> {
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::invalid(format!("parameter {s} outside [0, 1]")));
    }
    Ok(eval(polygon, s))
}

fn eval(polygon: &ControlPolygon, s: f64) -> Point2 {
    let n = polygon.degree();
    polygon
        .points
        .iter()
        .enumerate()
        .fold(Point2::new(0.0, 0.0), |acc, (j, v)| {
            let b = bernstein_unchecked(j, n, s);
            Point2::new(acc.x + b * v.x, acc.y + b * v.y)
        })
}

/// Evaluate the curve at `samples` evenly spaced parameters, `s = i / (samples - 1)`.
pub fn sample_curve(polygon: &ControlPolygon, samples: usize) -> Result<Vec<Point2>> {
    if samples < 2 {
        return Err(Error::invalid(format!(
            "need at least 2 samples, got {samples}"
        )));
    }
    let last = (samples - 1) as f64;
    Ok((0..samples)
        .map(|i| eval(polygon, i as f64 / last))
        .collect())
}

/// Squared distance from `p` to the closed segment `a..b`.
pub(crate) fn segment_distance_sq(p: Point2, a: Point2, b: Point2) -> f64 {
    let (dx, dy) = (b.x - a.x, b.y - a.y);
    let len_sq = dx * dx + dy * dy;
    let t = if len_sq > 0.0 {
        (((p.x - a.x) * dx + (p.y - a.y) * dy) / len_sq).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let (cx, cy) = (a.x + t * dx - p.x, a.y + t * dy - p.y);
    cx * cx + cy * cy
}

/// Pixels whose centers (integer coordinates) lie within `thickness / 2` of
/// any segment of `path`, each listed once, in row-major order.
pub fn stroke_coverage(width: u32, height: u32, path: &[Point2], thickness: f64) -> Vec<(u32, u32)> {
    if path.is_empty() || width == 0 || height == 0 {
        return Vec::new();
    }
    let r = thickness / 2.0;
    let r_sq = r * r;
    let clip = |v: f64, hi: u32| v.clamp(0.0, hi as f64 - 1.0) as u32;
    let (lo_x, hi_x, lo_y, hi_y) = path.iter().fold(
        (f64::MAX, f64::MIN, f64::MAX, f64::MIN),
        |(a, b, c, d), p| (a.min(p.x), b.max(p.x), c.min(p.y), d.max(p.y)),
    );
    if hi_x + r < 0.0 || hi_y + r < 0.0 || lo_x - r > (width - 1) as f64 || lo_y - r > (height - 1) as f64 {
        return Vec::new();
    }
    // the mask only spans the stroke's clipped bounding box
    let (ox, oy) = (clip((lo_x - r).floor(), width), clip((lo_y - r).floor(), height));
    let mw = (clip((hi_x + r).ceil(), width) - ox + 1) as usize;
    let mh = (clip((hi_y + r).ceil(), height) - oy + 1) as usize;
    let mut mask = vec![false; mw * mh];

    let pairs: Vec<(Point2, Point2)> = if path.len() == 1 {
        vec![(path[0], path[0])]
    } else {
        path.windows(2).map(|w| (w[0], w[1])).collect()
    };
    for (a, b) in pairs {
        let x0 = (a.x.min(b.x) - r).floor().max(0.0);
        let x1 = (a.x.max(b.x) + r).ceil().min(width as f64 - 1.0);
        let y0 = (a.y.min(b.y) - r).floor().max(0.0);
        let y1 = (a.y.max(b.y) + r).ceil().min(height as f64 - 1.0);
        if x0 > x1 || y0 > y1 {
            continue;
        }
        for y in y0 as u32..=y1 as u32 {
            for x in x0 as u32..=x1 as u32 {
                let idx = (y - oy) as usize * mw + (x - ox) as usize;
                if !mask[idx] && segment_distance_sq(Point2::new(x as f64, y as f64), a, b) <= r_sq {
                    mask[idx] = true;
                }
            }
        }
    }
    mask.iter()
        .enumerate()
        .filter(|(_, &m)| m)
        .map(|(i, _)| (ox + (i % mw) as u32, oy + (i / mw) as u32))
        .collect()
}

/// Draw `path` as a polyline stroke.
///
/// Every covered pixel is composited exactly once, however many segments
/// touch it, so the stroke's darkness does not depend on sampling density.
/// Pixels outside the image are skipped.
pub fn rasterize_stroke(
    image: &RasterImage,
    path: &[Point2],
    thickness: f64,
    opacity: f64,
    ink: u8,
) -> Result<RasterImage> {
    check_opacity(opacity)?;
    if path.is_empty() {
        return Err(Error::invalid("stroke path is empty"));
    }
    if !(thickness >= 1.0 && thickness.is_finite()) {
        return Err(Error::invalid(format!(
            "stroke thickness must be at least 1, got {thickness}"
        )));
    }
    let mut out = image.clone();
    for (x, y) in stroke_coverage(image.width(), image.height(), path, thickness) {
        let old = out.get(x, y).expect("coverage is clipped to the image");
        out.set(x, y, blend(old, opacity, ink));
    }
    Ok(out)
}
