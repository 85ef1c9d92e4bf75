//! Single-channel 8-bit line images.
//!
//! Luminance convention: `0` is full ink, `255` is background. Every
//! operation returns a new image and leaves its inputs untouched.

mod io;

use sha2::{Digest, Sha256};

use crate::{Error, Result};

pub use io::{decode_pgm, encode_pgm, luminance_from_rgba};

/// Background value of a blank line.
pub const WHITE: u8 = 255;
/// Darkest ink value.
pub const BLACK: u8 = 0;

/// Width and height of a canonical text line.
pub const CANONICAL_WIDTH: u32 = 2048;
pub const CANONICAL_HEIGHT: u32 = 128;

/// Pixels strictly below this value count as ink when locating text.
pub const INK_THRESHOLD: u8 = 250;

#[derive(Clone, PartialEq, Eq)]
pub struct RasterImage {
    width: u32,
    height: u32,
    pixels: Vec<u8>,
}

impl std::fmt::Debug for RasterImage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RasterImage")
            .field("width", &self.width)
            .field("height", &self.height)
            .finish_non_exhaustive()
    }
}

/// Axis-aligned pixel rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct Rect {
    pub x: u32,
    pub y: u32,
    pub w: u32,
    pub h: u32,
}

impl Rect {
    pub fn new(x: u32, y: u32, w: u32, h: u32) -> Self {
        Self { x, y, w, h }
    }

    pub fn right(&self) -> u32 {
        self.x + self.w
    }

    pub fn bottom(&self) -> u32 {
        self.y + self.h
    }

    pub fn fits_in(&self, image: &RasterImage) -> bool {
        self.right() <= image.width() && self.bottom() <= image.height()
    }
}

/// Round half away from zero and clamp into the 8-bit range.
pub(crate) fn to_u8(v: f64) -> u8 {
    v.round().clamp(0.0, 255.0) as u8
}

/// Blend `ink` over `old` with the given opacity.
#[inline]
pub fn blend(old: u8, opacity: f64, ink: u8) -> u8 {
    to_u8((1.0 - opacity) * old as f64 + opacity * ink as f64)
}

impl RasterImage {
    pub fn new_blank(width: u32, height: u32, fill: u8) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::invalid(format!(
                "image dimensions must be positive, got {width}x{height}"
            )));
        }
        Ok(Self {
            width,
            height,
            pixels: vec![fill; width as usize * height as usize],
        })
    }

    /// Wrap a row-major luminance buffer.
    pub fn from_pixels(width: u32, height: u32, pixels: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::invalid(format!(
                "image dimensions must be positive, got {width}x{height}"
            )));
        }
        if pixels.len() != width as usize * height as usize {
            return Err(Error::invalid(format!(
                "pixel buffer has {} values, expected {}",
                pixels.len(),
                width as usize * height as usize
            )));
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn into_pixels(self) -> Vec<u8> {
        self.pixels
    }

    #[inline]
    fn offset(&self, x: u32, y: u32) -> usize {
        y as usize * self.width as usize + x as usize
    }

    pub fn get(&self, x: u32, y: u32) -> Option<u8> {
        (x < self.width && y < self.height).then(|| self.pixels[self.offset(x, y)])
    }

    pub fn contains(&self, x: i64, y: i64) -> bool {
        x >= 0 && y >= 0 && x < self.width as i64 && y < self.height as i64
    }

    pub(crate) fn set(&mut self, x: u32, y: u32, v: u8) {
        let off = self.offset(x, y);
        self.pixels[off] = v;
    }

    /// Composite one ink sample at `(x, y)`.
    ///
    /// `(x, y)` must lie inside the image; unlike strokes, single-pixel
    /// compositing does not clip.
    pub fn composite_ink(&self, x: u32, y: u32, opacity: f64, ink: u8) -> Result<Self> {
        check_opacity(opacity)?;
        if x >= self.width || y >= self.height {
            return Err(Error::invalid(format!(
                "pixel ({x}, {y}) outside {}x{} image",
                self.width, self.height
            )));
        }
        let mut out = self.clone();
        let off = out.offset(x, y);
        out.pixels[off] = blend(out.pixels[off], opacity, ink);
        Ok(out)
    }

    /// Bilinear resize preserving aspect ratio.
    ///
    /// Output width is `round(width * target_height / height)`, at least 1.
    pub fn resize_to_height(&self, target_height: u32) -> Result<Self> {
        if target_height == 0 {
            return Err(Error::invalid("target height must be positive"));
        }
        if target_height == self.height {
            return Ok(self.clone());
        }
        let new_w = ((self.width as f64 * target_height as f64 / self.height as f64).round()
            as u32)
            .max(1);
        Ok(self.resize(new_w, target_height))
    }

    /// Bilinear resample to an explicit size, using pixel-center alignment.
    pub fn resize(&self, new_w: u32, new_h: u32) -> Self {
        if new_w == self.width && new_h == self.height {
            return self.clone();
        }
        let xs = sample_axis(self.width, new_w);
        let ys = sample_axis(self.height, new_h);
        let w = self.width as usize;
        let mut pixels = Vec::with_capacity(new_w as usize * new_h as usize);
        for &(y0, y1, fy) in &ys {
            let row0 = &self.pixels[y0 * w..(y0 + 1) * w];
            let row1 = &self.pixels[y1 * w..(y1 + 1) * w];
            for &(x0, x1, fx) in &xs {
                let top = row0[x0] as f64 * (1.0 - fx) + row0[x1] as f64 * fx;
                let bottom = row1[x0] as f64 * (1.0 - fx) + row1[x1] as f64 * fx;
                pixels.push(to_u8(top * (1.0 - fy) + bottom * fy));
            }
        }
        Self {
            width: new_w,
            height: new_h,
            pixels,
        }
    }

    /// Copy out the column range `[x0, x1)` at full height.
    pub fn crop_columns(&self, x0: u32, x1: u32) -> Result<Self> {
        if x0 >= x1 || x1 > self.width {
            return Err(Error::invalid(format!(
                "column range [{x0}, {x1}) invalid for width {}",
                self.width
            )));
        }
        let w = self.width as usize;
        let mut pixels = Vec::with_capacity((x1 - x0) as usize * self.height as usize);
        for row in self.pixels.chunks_exact(w) {
            pixels.extend_from_slice(&row[x0 as usize..x1 as usize]);
        }
        Ok(Self {
            width: x1 - x0,
            height: self.height,
            pixels,
        })
    }

    /// Tightest rectangle containing every ink pixel (value below
    /// [`INK_THRESHOLD`]), or `None` for a blank image.
    pub fn ink_bbox(&self) -> Option<Rect> {
        let (mut x0, mut y0, mut x1, mut y1) = (u32::MAX, u32::MAX, 0, 0);
        for (y, row) in self.pixels.chunks_exact(self.width as usize).enumerate() {
            for (x, &v) in row.iter().enumerate() {
                if v < INK_THRESHOLD {
                    let (x, y) = (x as u32, y as u32);
                    x0 = x0.min(x);
                    y0 = y0.min(y);
                    x1 = x1.max(x);
                    y1 = y1.max(y);
                }
            }
        }
        (x0 != u32::MAX).then(|| Rect::new(x0, y0, x1 - x0 + 1, y1 - y0 + 1))
    }

    /// SHA-256 over the dimensions and pixel buffer, hex encoded.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.width.to_le_bytes());
        h.update(self.height.to_le_bytes());
        h.update(&self.pixels);
        hex::encode(h.finalize())
    }
}

pub(crate) fn check_opacity(opacity: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&opacity) {
        return Err(Error::invalid(format!(
            "opacity must be within [0, 1], got {opacity}"
        )));
    }
    Ok(())
}

/// For each output coordinate, the two source indices and the weight of the second.
fn sample_axis(src: u32, dst: u32) -> Vec<(usize, usize, f64)> {
    let scale = src as f64 / dst as f64;
    let last = src as usize - 1;
    (0..dst)
        .map(|i| {
            let pos = ((i as f64 + 0.5) * scale - 0.5).clamp(0.0, last as f64);
            let i0 = pos.floor() as usize;
            let i1 = (i0 + 1).min(last);
            (i0, i1, pos - i0 as f64)
        })
        .collect()
}

/// Concatenate images left to right after resizing each to `target_height`.
pub fn hstack(images: &[RasterImage], target_height: u32) -> Result<RasterImage> {
    if images.is_empty() {
        return Err(Error::invalid("hstack needs at least one image"));
    }
    let resized = images
        .iter()
        .map(|im| im.resize_to_height(target_height))
        .collect::<Result<Vec<_>>>()?;
    let width: u32 = resized.iter().map(RasterImage::width).sum();
    let mut pixels = Vec::with_capacity(width as usize * target_height as usize);
    for y in 0..target_height as usize {
        for im in &resized {
            let w = im.width as usize;
            pixels.extend_from_slice(&im.pixels[y * w..(y + 1) * w]);
        }
    }
    RasterImage::from_pixels(width, target_height, pixels)
}

/// Stack images top to bottom, right-padding narrower ones with `fill` and
/// inserting `gap` rows of `fill` between consecutive images.
pub fn vstack(images: &[RasterImage], gap: u32, fill: u8) -> Result<RasterImage> {
    if images.is_empty() {
        return Err(Error::invalid("vstack needs at least one image"));
    }
    let width = images.iter().map(RasterImage::width).max().unwrap_or(1) as usize;
    let height: u32 =
        images.iter().map(RasterImage::height).sum::<u32>() + gap * (images.len() as u32 - 1);
    let mut pixels = Vec::with_capacity(width * height as usize);
    for (i, im) in images.iter().enumerate() {
        if i > 0 {
            pixels.resize(pixels.len() + gap as usize * width, fill);
        }
        for row in im.pixels.chunks_exact(im.width as usize) {
            pixels.extend_from_slice(row);
            pixels.resize(pixels.len() + width - row.len(), fill);
        }
    }
    RasterImage::from_pixels(width as u32, height, pixels)
}
