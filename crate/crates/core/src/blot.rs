//! Strikethrough ("handwritten blot") augmentation.
//!
//! A blot is a Bezier scribble drawn over a randomly chosen region of the
//! line. Control points zigzag between the top and bottom thirds of the
//! region, which gives the crossed-out look of a hand scribble.

use serde::{Deserialize, Serialize};

use crate::bezier::{rasterize_stroke, sample_curve, ControlPolygon, Point2};
use crate::ctc::BoundarySet;
use crate::raster::{RasterImage, Rect, BLACK};
use crate::{Error, Result, RngState};

/// Probability that a generated control point is used twice in a row.
pub const POINT_REPEAT_PROBA: f64 = 0.2;

/// Parameters of the blot augmentation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BlotConfig {
    pub min_h: u32,
    pub max_h: u32,
    pub min_w: u32,
    pub max_w: u32,
    /// Vertical jitter of control points, in pixels.
    pub incline: f64,
    /// Density of control points along the region.
    pub intensity: f64,
    /// Stroke opacity.
    pub transparency: f64,
    pub count_min: u32,
    pub count_max: u32,
    /// Probability of blotting a given image at all.
    pub proba: f64,
    pub thickness: f64,
}

impl Default for BlotConfig {
    fn default() -> Self {
        Self {
            min_h: 50,
            max_h: 100,
            min_w: 10,
            max_w: 50,
            incline: 15.0,
            intensity: 0.9,
            transparency: 0.95,
            count_min: 1,
            count_max: 11,
            proba: 0.5,
            thickness: 3.0,
        }
    }
}

impl BlotConfig {
    pub fn validate(&self) -> Result<()> {
        let fraction = |name: &str, v: f64| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(Error::invalid(format!("{name} must be within [0, 1], got {v}")))
            }
        };
        fraction("intensity", self.intensity)?;
        fraction("transparency", self.transparency)?;
        fraction("proba", self.proba)?;
        if self.min_h > self.max_h || self.min_w > self.max_w {
            return Err(Error::invalid("blot size bounds are inverted"));
        }
        if self.min_h == 0 || self.min_w == 0 {
            return Err(Error::invalid("blot sizes must be positive"));
        }
        if self.count_min == 0 || self.count_min > self.count_max {
            return Err(Error::invalid(format!(
                "blot count range {}..={} is invalid",
                self.count_min, self.count_max
            )));
        }
        if !(self.incline >= 0.0 && self.incline.is_finite()) {
            return Err(Error::invalid("incline must be a non-negative number"));
        }
        if !(self.thickness >= 1.0 && self.thickness.is_finite()) {
            return Err(Error::invalid("thickness must be at least 1"));
        }
        Ok(())
    }
}

/// Start offsets `[lo, hi]` for an extent of `size` so that it sits inside
/// `[span_start, span_end)` when it fits there, or covers it otherwise,
/// while staying inside `[0, limit)`.
fn placement_range(span_start: u32, span_end: u32, size: u32, limit: u32) -> (i64, i64) {
    let max_start = (limit - size) as i64;
    let a = span_start as i64;
    let b = span_end as i64 - size as i64;
    (a.min(b).clamp(0, max_start), a.max(b).clamp(0, max_start))
}

/// Draw the strikethrough regions for one image.
pub fn choose_regions(
    image: &RasterImage,
    config: &BlotConfig,
    rng: &mut RngState,
    boundaries: Option<&BoundarySet>,
) -> Vec<Rect> {
    let (width, height) = (image.width(), image.height());
    let bbox = image
        .ink_bbox()
        .unwrap_or_else(|| Rect::new(0, 0, width, height));
    let spans = boundaries.map(|b| b.spans()).filter(|s| !s.is_empty());

    let count = rng.uniform_int(config.count_min as i64, config.count_max as i64);
    (0..count)
        .map(|_| {
            let w_hi = config.max_w.min(width);
            let w = rng.uniform_int(config.min_w.min(w_hi) as i64, w_hi as i64) as u32;
            let h_hi = config.max_h.min(height);
            let h = rng.uniform_int(config.min_h.min(h_hi) as i64, h_hi as i64) as u32;

            let x = match spans {
                Some(spans) => {
                    let span = &spans[rng.index(spans.len())];
                    let center = (span.start_px + span.end_px) as i64 / 2;
                    (center - w as i64 / 2).clamp(0, (width - w) as i64)
                }
                None => {
                    let (lo, hi) = placement_range(bbox.x, bbox.right(), w, width);
                    rng.uniform_int(lo, hi)
                }
            };
            let (lo, hi) = placement_range(bbox.y, bbox.bottom(), h, height);
            let y = rng.uniform_int(lo, hi);
            Rect::new(x as u32, y as u32, w, h)
        })
        .collect()
}

/// Number of point bands for a region: `max(2, round(intensity * w / 5))`.
pub fn band_count(region_width: u32, intensity: f64) -> usize {
    ((intensity * region_width as f64 / 5.0).round() as usize).max(2)
}

/// Zigzag control points across `region`, left to right.
pub fn generate_control_points(
    region: Rect,
    config: &BlotConfig,
    rng: &mut RngState,
) -> Result<ControlPolygon> {
    if region.w == 0 || region.h == 0 {
        return Err(Error::invalid("blot region has zero area"));
    }
    let k = band_count(region.w, config.intensity);
    let band_w = region.w as f64 / k as f64;
    let (top, bottom) = (region.y as f64, region.bottom() as f64);
    let mut points = Vec::with_capacity(2 * k);
    for band in 0..k {
        let bx = region.x as f64 + band as f64 * band_w;
        let x = rng.uniform_real(bx, bx + band_w);
        let center = if band % 2 == 0 {
            top + region.h as f64 / 6.0
        } else {
            top + region.h as f64 * 5.0 / 6.0
        };
        let y_lo = (center - config.incline).max(top);
        let y_hi = (center + config.incline).min(bottom);
        let y = rng.uniform_real(y_lo, y_hi);
        let p = Point2::new(x, y);
        points.push(p);
        if rng.bernoulli(POINT_REPEAT_PROBA) {
            points.push(p);
        }
    }
    ControlPolygon::new(points)
}

/// Curve samples used when drawing a polygon: ten per control point, at least 50.
pub fn blot_samples(polygon: &ControlPolygon) -> usize {
    (10 * polygon.points().len()).max(50)
}

/// Result of one blot application, with the regions that were struck through.
#[derive(Debug, Clone)]
pub struct BlotOutcome {
    pub image: RasterImage,
    /// Empty when the image was left untouched.
    pub regions: Vec<Rect>,
    pub applied: bool,
}

/// Apply the augmentation, reporting which regions were drawn.
pub fn apply_blots_detailed(
    image: &RasterImage,
    config: &BlotConfig,
    rng: &mut RngState,
    boundaries: Option<&BoundarySet>,
) -> Result<BlotOutcome> {
    config.validate()?;
    if !rng.bernoulli(config.proba) {
        return Ok(BlotOutcome {
            image: image.clone(),
            regions: Vec::new(),
            applied: false,
        });
    }
    let regions = choose_regions(image, config, rng, boundaries);
    let mut out = image.clone();
    for region in &regions {
        let polygon = generate_control_points(*region, config, rng)?;
        let path = sample_curve(&polygon, blot_samples(&polygon))?;
        out = rasterize_stroke(&out, &path, config.thickness, config.transparency, BLACK)?;
    }
    Ok(BlotOutcome {
        image: out,
        regions,
        applied: true,
    })
}

/// Strike through random parts of `image` with probability `config.proba`.
pub fn apply_handwritten_blots(
    image: &RasterImage,
    config: &BlotConfig,
    rng: &mut RngState,
    boundaries: Option<&BoundarySet>,
) -> Result<RasterImage> {
    apply_blots_detailed(image, config, rng, boundaries).map(|o| o.image)
}
