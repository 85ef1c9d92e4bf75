//! PNG and binary PGM (P5) codecs.

use std::io::Cursor;
use std::path::Path;

use image::codecs::png::PngEncoder;
use image::{DynamicImage, ExtendedColorType, ImageEncoder, ImageReader};

use super::{to_u8, RasterImage};
use crate::{Error, Result};

/// Luminance of an RGBA sample composited over white.
pub fn luminance_from_rgba(r: u8, g: u8, b: u8, a: u8) -> u8 {
    let alpha = a as f64 / 255.0;
    let over_white = |c: u8| to_u8(c as f64 * alpha + 255.0 * (1.0 - alpha)) as f64;
    to_u8(0.299 * over_white(r) + 0.587 * over_white(g) + 0.114 * over_white(b))
}

fn from_dynamic(img: DynamicImage) -> Result<RasterImage> {
    let (w, h) = (img.width(), img.height());
    let pixels = match img {
        DynamicImage::ImageLuma8(buf) => buf.into_raw(),
        DynamicImage::ImageLumaA8(buf) => buf
            .pixels()
            .map(|p| luminance_from_rgba(p[0], p[0], p[0], p[1]))
            .collect(),
        other => other
            .to_rgba8()
            .pixels()
            .map(|p| luminance_from_rgba(p[0], p[1], p[2], p[3]))
            .collect(),
    };
    RasterImage::from_pixels(w, h, pixels)
}

/// Encode as binary PGM with maxval 255.
pub fn encode_pgm(image: &RasterImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", image.width(), image.height()).into_bytes();
    out.extend_from_slice(image.pixels());
    out
}

/// Decode a binary PGM (P5) with maxval 255. Comments in the header are skipped.
pub fn decode_pgm(bytes: &[u8]) -> std::result::Result<RasterImage, String> {
    let mut pos = 0;
    let mut fields = Vec::with_capacity(4);
    while fields.len() < 4 {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if pos < bytes.len() && bytes[pos] == b'#' {
            while pos < bytes.len() && bytes[pos] != b'\n' {
                pos += 1;
            }
            continue;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err("truncated PGM header".into());
        }
        fields.push(std::str::from_utf8(&bytes[start..pos]).map_err(|e| e.to_string())?);
    }
    // exactly one whitespace byte separates the header from the raster
    pos += 1;
    if fields[0] != "P5" {
        return Err(format!("unsupported PGM magic {:?}", fields[0]));
    }
    let parse = |s: &str| s.parse::<u32>().map_err(|_| format!("bad PGM field {s:?}"));
    let (w, h, maxval) = (parse(fields[1])?, parse(fields[2])?, parse(fields[3])?);
    if maxval != 255 {
        return Err(format!("only maxval 255 is supported, got {maxval}"));
    }
    let n = w as usize * h as usize;
    let data = bytes
        .get(pos..pos + n)
        .ok_or_else(|| "truncated PGM raster".to_string())?;
    RasterImage::from_pixels(w, h, data.to_vec()).map_err(|e| e.to_string())
}

fn is_pgm(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("pgm"))
}

impl RasterImage {
    /// Load a PNG (or anything else the decoder recognises) or a `.pgm` file.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        if is_pgm(path) {
            let bytes = std::fs::read(path)?;
            return decode_pgm(&bytes).map_err(|reason| Error::format(path, reason));
        }
        let img = ImageReader::open(path)?
            .with_guessed_format()?
            .decode()
            .map_err(|e| Error::format(path, e.to_string()))?;
        from_dynamic(img)
    }

    /// Save as PGM when the extension is `.pgm`, otherwise as 8-bit grayscale PNG.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let bytes = if is_pgm(path) {
            encode_pgm(self)
        } else {
            self.encode_png()?
        };
        std::fs::write(path, bytes)?;
        Ok(())
    }

    pub fn encode_png(&self) -> Result<Vec<u8>> {
        let mut buf = Vec::new();
        PngEncoder::new(&mut buf).write_image(
            self.pixels(),
            self.width(),
            self.height(),
            ExtendedColorType::L8,
        )?;
        Ok(buf)
    }

    pub fn decode_png(bytes: &[u8]) -> Result<Self> {
        let img = ImageReader::new(Cursor::new(bytes))
            .with_guessed_format()?
            .decode()?;
        from_dynamic(img)
    }
}
