//! 8-bit PGM (P5) and grayscale PNG reading and writing.

use std::fs;
use std::path::Path;

use ::image as codec;

use super::{BinaryMask, GrayImage};
use crate::error::{Error, Result};

const PNG_MAGIC: &[u8] = b"\x89PNG\r\n\x1a\n";

/// Reads an 8-bit binary PGM or 8-bit grayscale PNG, scaling bytes by 1/255.
pub fn load_image(path: impl AsRef<Path>) -> Result<GrayImage> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let (w, h, pixels) = decode(&bytes)?;
    GrayImage::new(w, h, pixels.iter().map(|&b| f64::from(b) / 255.0).collect())
}

/// Reads a mask file; any byte ≥ 128 is foreground.
pub fn load_mask(path: impl AsRef<Path>) -> Result<BinaryMask> {
    Ok(load_image(path)?.threshold(0.5))
}

/// Writes a mask as 0/255 bytes. `.png` paths get PNG, anything else PGM.
pub fn save_mask(mask: &BinaryMask, path: impl AsRef<Path>) -> Result<()> {
    let bytes: Vec<u8> = mask.data().iter().map(|&b| if b { 255 } else { 0 }).collect();
    write_gray(path.as_ref(), mask.width(), mask.height(), bytes)
}

/// Writes an intensity image quantized to `round(255·v)` after clipping to `[0, 1]`.
pub fn save_image(img: &GrayImage, path: impl AsRef<Path>) -> Result<()> {
    let bytes: Vec<u8> = img
        .data()
        .iter()
        .map(|&v| (v.clamp(0.0, 1.0) * 255.0).round() as u8)
        .collect();
    write_gray(path.as_ref(), img.width(), img.height(), bytes)
}

fn write_gray(path: &Path, width: usize, height: usize, bytes: Vec<u8>) -> Result<()> {
    let encoded = if is_png_path(path) {
        encode_png(width, height, bytes)?
    } else {
        encode_pgm(width, height, &bytes)
    };
    fs::write(path, encoded).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn is_png_path(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("png"))
}

fn decode(bytes: &[u8]) -> Result<(usize, usize, Vec<u8>)> {
    if bytes.starts_with(b"P5") {
        decode_pgm(bytes)
    } else if bytes.starts_with(PNG_MAGIC) {
        decode_png(bytes)
    } else {
        Err(Error::Format("expected binary PGM (P5) or PNG data".to_string()))
    }
}

pub(crate) fn encode_pgm(width: usize, height: usize, bytes: &[u8]) -> Vec<u8> {
    let mut out = format!("P5\n{width} {height}\n255\n").into_bytes();
    out.extend_from_slice(bytes);
    out
}

fn decode_pgm(bytes: &[u8]) -> Result<(usize, usize, Vec<u8>)> {
    let mut pos = 2;
    let mut fields = [0usize; 3];
    for field in fields.iter_mut() {
        // whitespace and comments between header tokens
        loop {
            match bytes.get(pos) {
                Some(b) if b.is_ascii_whitespace() => pos += 1,
                Some(b'#') => {
                    while bytes.get(pos).is_some_and(|&b| b != b'\n') {
                        pos += 1;
                    }
                }
                _ => break,
            }
        }
        let start = pos;
        while bytes.get(pos).is_some_and(u8::is_ascii_digit) {
            pos += 1;
        }
        *field = std::str::from_utf8(&bytes[start..pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::Format("malformed PGM header".to_string()))?;
    }
    let [w, h, maxval] = fields;
    if maxval != 255 {
        return Err(Error::Format(format!(
            "PGM maxval {maxval} unsupported, only 8-bit (255) images are read"
        )));
    }
    if w == 0 || h == 0 {
        return Err(Error::Format("PGM has zero width or height".to_string()));
    }
    if !bytes.get(pos).is_some_and(u8::is_ascii_whitespace) {
        return Err(Error::Format("malformed PGM header".to_string()));
    }
    pos += 1;
    let n = w * h;
    let data = bytes
        .get(pos..pos + n)
        .ok_or_else(|| Error::Format(format!("PGM truncated, expected {n} pixel bytes")))?;
    Ok((w, h, data.to_vec()))
}

fn decode_png(bytes: &[u8]) -> Result<(usize, usize, Vec<u8>)> {
    let img = codec::load_from_memory_with_format(bytes, codec::ImageFormat::Png)
        .map_err(|e| Error::Format(format!("PNG decode failed: {e}")))?;
    if img.color() != codec::ColorType::L8 {
        return Err(Error::Format(format!(
            "PNG color type {:?} unsupported, expected 8-bit grayscale",
            img.color()
        )));
    }
    let (w, h) = (img.width() as usize, img.height() as usize);
    Ok((w, h, img.into_luma8().into_raw()))
}

fn encode_png(width: usize, height: usize, bytes: Vec<u8>) -> Result<Vec<u8>> {
    let buf = codec::ImageBuffer::<codec::Luma<u8>, _>::from_raw(width as u32, height as u32, bytes)
        .ok_or_else(|| Error::Format("pixel buffer does not match dimensions".to_string()))?;
    let mut out = std::io::Cursor::new(Vec::new());
    buf.write_to(&mut out, codec::ImageFormat::Png)
        .map_err(|e| Error::Format(format!("PNG encode failed: {e}")))?;
    Ok(out.into_inner())
}
