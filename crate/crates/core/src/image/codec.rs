//! PNG and binary PGM/PPM decode/encode.
//!
//! PGM (P5) payloads are promoted to RGB by channel triplication. Decode
//! errors carry the byte offset at which parsing failed.

use std::cell::Cell;
use std::io::{BufRead, Read, Seek, SeekFrom};
use std::rc::Rc;

use crate::error::{Error, Result};
use crate::image::{GrayImage, RgbImage};
use crate::mask::BinaryMask;
use crate::scalar::Real;

const PNG_MAGIC: [u8; 8] = [0x89, b'P', b'N', b'G', b'\r', b'\n', 0x1a, b'\n'];

/// Decodes a PNG or binary PGM/PPM stream into an RGB image.
pub fn decode_image(bytes: &[u8]) -> Result<RgbImage> {
    if bytes.starts_with(&PNG_MAGIC) {
        decode_png(bytes)
    } else if bytes.starts_with(b"P5") || bytes.starts_with(b"P6") {
        decode_pnm(bytes)
    } else {
        Err(Error::Decode {
            offset: 0,
            message: "unrecognized magic (expected PNG, P5 or P6)".into(),
        })
    }
}

/// Slice reader that publishes its cursor position, so decode errors can
/// report the byte offset reached when parsing stopped.
struct CountingReader<'a> {
    bytes: &'a [u8],
    pos: Rc<Cell<usize>>,
}

impl Read for CountingReader<'_> {
    fn read(&mut self, buf: &mut [u8]) -> std::io::Result<usize> {
        let pos = self.pos.get();
        let n = (self.bytes.len() - pos).min(buf.len());
        buf[..n].copy_from_slice(&self.bytes[pos..pos + n]);
        self.pos.set(pos + n);
        Ok(n)
    }
}

impl BufRead for CountingReader<'_> {
    fn fill_buf(&mut self) -> std::io::Result<&[u8]> {
        Ok(&self.bytes[self.pos.get()..])
    }

    fn consume(&mut self, amt: usize) {
        self.pos.set((self.pos.get() + amt).min(self.bytes.len()));
    }
}

impl Seek for CountingReader<'_> {
    fn seek(&mut self, pos: SeekFrom) -> std::io::Result<u64> {
        let target = match pos {
            SeekFrom::Start(v) => v as i64,
            SeekFrom::End(v) => self.bytes.len() as i64 + v,
            SeekFrom::Current(v) => self.pos.get() as i64 + v,
        };
        if target < 0 {
            return Err(std::io::Error::new(
                std::io::ErrorKind::InvalidInput,
                "seek before start",
            ));
        }
        self.pos.set((target as usize).min(self.bytes.len()));
        Ok(self.pos.get() as u64)
    }
}

fn decode_png(bytes: &[u8]) -> Result<RgbImage> {
    let pos = Rc::new(Cell::new(0usize));
    let reader = CountingReader { bytes, pos: Rc::clone(&pos) };
    let mut decoder = png::Decoder::new(reader);
    decoder.set_transformations(png::Transformations::EXPAND | png::Transformations::STRIP_16);
    let mut reader = decoder.read_info().map_err(|e| Error::Decode {
        offset: pos.get() as u64,
        message: format!("png header: {e}"),
    })?;
    let mut buf = vec![0u8; reader.output_buffer_size().unwrap_or(0)];
    let info = reader.next_frame(&mut buf).map_err(|e| Error::Decode {
        offset: pos.get() as u64,
        message: format!("png data: {e}"),
    })?;
    let (w, h) = (info.width as usize, info.height as usize);
    buf.truncate(info.buffer_size());
    let pixels = match info.color_type {
        png::ColorType::Grayscale => buf.iter().flat_map(|&g| [g, g, g]).collect(),
        png::ColorType::GrayscaleAlpha => {
            buf.chunks_exact(2).flat_map(|p| [p[0], p[0], p[0]]).collect()
        }
        png::ColorType::Rgb => buf,
        png::ColorType::Rgba => buf.chunks_exact(4).flat_map(|p| [p[0], p[1], p[2]]).collect(),
        other => {
            return Err(Error::Decode {
                offset: 0,
                message: format!("unsupported png color type {other:?}"),
            })
        }
    };
    RgbImage::new(w, h, pixels)
}

struct PnmParser<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> PnmParser<'a> {
    fn err(&self, message: impl Into<String>) -> Error {
        Error::Decode { offset: self.pos as u64, message: message.into() }
    }

    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    /// Skips whitespace and `#` comment lines between header tokens.
    fn skip_separators(&mut self) {
        while let Some(b) = self.peek() {
            if b.is_ascii_whitespace() {
                self.pos += 1;
            } else if b == b'#' {
                while let Some(b) = self.peek() {
                    self.pos += 1;
                    if b == b'\n' {
                        break;
                    }
                }
            } else {
                break;
            }
        }
    }

    fn read_number(&mut self) -> Result<usize> {
        self.skip_separators();
        let start = self.pos;
        while self.peek().is_some_and(|b| b.is_ascii_digit()) {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(self.err("expected ASCII decimal header field"));
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| self.err("header field out of range"))
    }
}

fn decode_pnm(bytes: &[u8]) -> Result<RgbImage> {
    let channels = match &bytes[..2] {
        b"P5" => 1usize,
        b"P6" => 3usize,
        _ => unreachable!("dispatched on magic"),
    };
    let mut p = PnmParser { bytes, pos: 2 };
    let width = p.read_number()?;
    let height = p.read_number()?;
    let maxval = p.read_number()?;
    if width == 0 || height == 0 {
        return Err(p.err("zero image dimension"));
    }
    if maxval != 255 {
        return Err(p.err(format!("unsupported maxval {maxval} (expected 255)")));
    }
    match p.peek() {
        Some(b) if b.is_ascii_whitespace() => p.pos += 1,
        _ => return Err(p.err("expected single whitespace before raster data")),
    }
    let need = width * height * channels;
    let raster = &bytes[p.pos..];
    if raster.len() < need {
        return Err(Error::Decode {
            offset: bytes.len() as u64,
            message: format!("raster truncated: need {need} bytes, have {}", raster.len()),
        });
    }
    let pixels = if channels == 3 {
        raster[..need].to_vec()
    } else {
        raster[..need].iter().flat_map(|&g| [g, g, g]).collect()
    };
    RgbImage::new(width, height, pixels)
}

/// Encodes a grayscale image as binary PGM (P5, maxval 255).
pub fn encode_pgm<T: Real>(img: &GrayImage<T>) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.cols(), img.rows()).into_bytes();
    out.extend(img.to_u8());
    out
}

/// Encodes an RGB image as binary PPM (P6, maxval 255).
pub fn encode_ppm(img: &RgbImage) -> Vec<u8> {
    let mut out = format!("P6\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.extend_from_slice(img.pixels());
    out
}

/// Encodes a grayscale image as an 8-bit PNG.
pub fn encode_png_gray<T: Real>(img: &GrayImage<T>) -> Result<Vec<u8>> {
    encode_png_bytes(img.cols(), img.rows(), png::ColorType::Grayscale, &img.to_u8())
}

/// Encodes an RGB image as an 8-bit PNG.
pub fn encode_png_rgb(img: &RgbImage) -> Result<Vec<u8>> {
    encode_png_bytes(img.width(), img.height(), png::ColorType::Rgb, img.pixels())
}

/// Encodes a binary mask as an 8-bit PNG with values {0, 255}.
pub fn encode_png_mask(mask: &BinaryMask) -> Result<Vec<u8>> {
    let bytes: Vec<u8> = mask.bits().iter().map(|&b| if b { 255 } else { 0 }).collect();
    encode_png_bytes(mask.cols(), mask.rows(), png::ColorType::Grayscale, &bytes)
}

/// Encodes a binary mask as binary PGM with values {0, 255}.
pub fn encode_pgm_mask(mask: &BinaryMask) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", mask.cols(), mask.rows()).into_bytes();
    out.extend(mask.bits().iter().map(|&b| if b { 255u8 } else { 0 }));
    out
}

fn encode_png_bytes(
    width: usize,
    height: usize,
    color: png::ColorType,
    data: &[u8],
) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    {
        let mut encoder = png::Encoder::new(&mut out, width as u32, height as u32);
        encoder.set_color(color);
        encoder.set_depth(png::BitDepth::Eight);
        let mut writer = encoder
            .write_header()
            .map_err(|e| Error::Numeric(format!("png encode: {e}")))?;
        writer
            .write_image_data(data)
            .map_err(|e| Error::Numeric(format!("png encode: {e}")))?;
    }
    Ok(out)
}
