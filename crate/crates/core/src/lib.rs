//! Synthetic training data for handwritten text recognition.
//!
//! The crate is organised around one line-image type, [`RasterImage`], and the
//! operations that produce or consume it:
//!
//! * [`bezier`] and [`blot`] draw strikethrough scribbles over existing lines.
//! * [`ctc`] turns a CTC posterior dump plus the known transcript into
//!   per-character pixel boundaries.
//! * [`stackmix`] cuts training lines at those boundaries and stacks the
//!   pieces into new labelled lines for arbitrary corpus text.
//! * [`metrics`] scores recognition output (CER, WER, string accuracy).

pub mod bezier;
pub mod blot;
pub mod ctc;
mod error;
pub mod metrics;
pub mod raster;
pub mod rng;
pub mod stackmix;

pub use error::{Error, Result};
pub use raster::{RasterImage, Rect};
pub use rng::RngState;
