//! `CTCP1` posterior dumps.
//!
//! Layout (little endian): `b"CTCP"`, version byte `0x01`, `u32` frames,
//! `u32` columns, `frames * columns` `f32` values frame-major, `u32` byte
//! length of the alphabet, then the alphabet as UTF-8 in column order. The
//! blank is the implicit last column.

use std::io::{Read, Write};
use std::path::Path;

use super::{Alphabet, PosteriorMatrix};
use crate::{Error, Result};

pub const CTCP_MAGIC: &[u8; 4] = b"CTCP";
pub const CTCP_VERSION: u8 = 1;

pub fn write_posteriors(
    mut w: impl Write,
    posteriors: &PosteriorMatrix,
    alphabet: &Alphabet,
) -> Result<()> {
    if posteriors.columns() != alphabet.len() + 1 {
        return Err(Error::invalid(format!(
            "posteriors have {} columns, alphabet implies {}",
            posteriors.columns(),
            alphabet.len() + 1
        )));
    }
    let alpha = alphabet.as_string();
    let mut buf = Vec::with_capacity(17 + 4 * posteriors.values().len() + alpha.len());
    buf.extend_from_slice(CTCP_MAGIC);
    buf.push(CTCP_VERSION);
    buf.extend_from_slice(&(posteriors.frames() as u32).to_le_bytes());
    buf.extend_from_slice(&(posteriors.columns() as u32).to_le_bytes());
    for v in posteriors.values() {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    buf.extend_from_slice(&(alpha.len() as u32).to_le_bytes());
    buf.extend_from_slice(alpha.as_bytes());
    w.write_all(&buf)?;
    Ok(())
}

fn take<'a>(bytes: &'a [u8], pos: &mut usize, n: usize) -> std::result::Result<&'a [u8], String> {
    let out = bytes
        .get(*pos..*pos + n)
        .ok_or_else(|| format!("truncated at byte {}", *pos))?;
    *pos += n;
    Ok(out)
}

fn take_u32(bytes: &[u8], pos: &mut usize) -> std::result::Result<u32, String> {
    let b = take(bytes, pos, 4)?;
    Ok(u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
}

fn parse(bytes: &[u8]) -> std::result::Result<(PosteriorMatrix, Alphabet), String> {
    let mut pos = 0;
    let magic = take(bytes, &mut pos, 4)?;
    if magic != CTCP_MAGIC {
        return Err(format!("bad magic bytes {magic:02x?}, expected \"CTCP\""));
    }
    let version = take(bytes, &mut pos, 1)?[0];
    if version != CTCP_VERSION {
        return Err(format!("unsupported version {version}"));
    }
    let frames = take_u32(bytes, &mut pos)? as usize;
    let columns = take_u32(bytes, &mut pos)? as usize;
    let n = frames
        .checked_mul(columns)
        .filter(|n| n.checked_mul(4).is_some_and(|b| b <= bytes.len()))
        .ok_or_else(|| format!("declared size {frames}x{columns} exceeds file length"))?;
    let values = take(bytes, &mut pos, 4 * n)?
        .chunks_exact(4)
        .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]))
        .collect();
    let alpha_len = take_u32(bytes, &mut pos)? as usize;
    let alpha = std::str::from_utf8(take(bytes, &mut pos, alpha_len)?)
        .map_err(|e| format!("alphabet is not UTF-8: {e}"))?;
    if pos != bytes.len() {
        return Err(format!("{} trailing bytes", bytes.len() - pos));
    }
    let alphabet = Alphabet::from_str(alpha).map_err(|e| e.to_string())?;
    if alphabet.len() + 1 != columns {
        return Err(format!(
            "{columns} columns but alphabet has {} symbols",
            alphabet.len()
        ));
    }
    let post = PosteriorMatrix::new(frames, columns, values).map_err(|e| e.to_string())?;
    Ok((post, alphabet))
}

/// Read and validate a posterior file. Any structural problem is reported
/// as a format error naming `path`.
pub fn read_posteriors(path: impl AsRef<Path>) -> Result<(PosteriorMatrix, Alphabet)> {
    let path = path.as_ref();
    let mut bytes = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut bytes)?;
    parse(&bytes).map_err(|reason| Error::format(path, reason))
}
