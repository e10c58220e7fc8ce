//! Binary PNM (P5 gray, P6 RGB) with maxval 255.

use super::{Frame, ImagingError, PixelFormat, Result};

fn err(offset: usize, reason: impl Into<String>) -> ImagingError {
    ImagingError::Pnm {
        offset,
        reason: reason.into(),
    }
}

struct Header<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Header<'_> {
    fn skip_space(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b == b'#' {
                while let Some(&c) = self.bytes.get(self.pos) {
                    self.pos += 1;
                    if c == b'\n' {
                        break;
                    }
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn number(&mut self) -> Result<u32> {
        self.skip_space();
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(err(start, "expected a decimal number"));
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| err(start, "number out of range"))
    }
}

pub fn read_pnm(bytes: &[u8]) -> Result<Frame> {
    let format = match bytes.get(..2) {
        Some(b"P5") => PixelFormat::Gray8,
        Some(b"P6") => PixelFormat::Rgb24,
        Some(_) => return Err(err(0, "unsupported magic (expected P5 or P6)")),
        None => return Err(err(bytes.len(), "file too short for magic")),
    };
    let mut h = Header { bytes, pos: 2 };
    if !bytes.get(2).is_some_and(u8::is_ascii_whitespace) {
        return Err(err(2, "expected whitespace after magic"));
    }
    let width = h.number()?;
    let height = h.number()?;
    h.skip_space();
    let maxval_at = h.pos;
    let maxval = h.number()?;
    if maxval != 255 {
        return Err(err(maxval_at, format!("maxval {maxval} unsupported (expected 255)")));
    }
    // exactly one whitespace byte separates the header from the body
    if !bytes.get(h.pos).is_some_and(u8::is_ascii_whitespace) {
        return Err(err(h.pos, "expected single whitespace before pixel data"));
    }
    let body = h.pos + 1;
    if width == 0 || height == 0 {
        return Err(err(2, format!("invalid dimensions {width}x{height}")));
    }
    let len = width as usize * height as usize * format.channels();
    let end = body + len;
    if bytes.len() < end {
        return Err(err(
            bytes.len(),
            format!("truncated body: need {len} bytes of pixel data"),
        ));
    }
    if bytes.len() > end {
        return Err(err(end, "trailing bytes after pixel data"));
    }
    Frame::new(width, height, format, bytes[body..end].to_vec())
}

pub fn write_pnm(f: &Frame) -> Vec<u8> {
    let magic = match f.format() {
        PixelFormat::Gray8 => "P5",
        PixelFormat::Rgb24 => "P6",
    };
    let mut out = format!("{magic}\n{} {}\n255\n", f.width(), f.height()).into_bytes();
    out.extend_from_slice(f.data());
    out
}
