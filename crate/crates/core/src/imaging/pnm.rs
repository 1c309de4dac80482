//! Netpbm (PBM/PGM/PPM) decoding of all six variants and binary encoding.
//!
//! PBM bit 1 is black, which maps to mask foreground (`true`).

use thiserror::Error;

use super::{BinaryMask, GrayImage, RgbImage};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PnmError {
    #[error("bad magic number at byte {offset}")]
    BadMagic { offset: usize },
    #[error("malformed header at byte {offset}: {reason}")]
    MalformedHeader { offset: usize, reason: &'static str },
    #[error("unsupported maxval {maxval} at byte {offset} (only 255 is accepted)")]
    UnsupportedMaxval { offset: usize, maxval: u32 },
    #[error("truncated payload at byte {offset}")]
    Truncated { offset: usize },
    #[error("invalid sample at byte {offset}")]
    InvalidSample { offset: usize },
}

/// Any raster a PNM file can hold.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Raster {
    Binary(BinaryMask),
    Gray(GrayImage),
    Rgb(RgbImage),
}

impl From<RgbImage> for Raster {
    fn from(img: RgbImage) -> Self {
        Raster::Rgb(img)
    }
}

impl From<GrayImage> for Raster {
    fn from(img: GrayImage) -> Self {
        Raster::Gray(img)
    }
}

impl From<BinaryMask> for Raster {
    fn from(mask: BinaryMask) -> Self {
        Raster::Binary(mask)
    }
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    /// Skips whitespace and `#` comments running to end of line.
    fn skip_ws(&mut self) {
        while let Some(c) = self.peek() {
            if c == b'#' {
                while let Some(c) = self.peek() {
                    self.pos += 1;
                    if c == b'\n' || c == b'\r' {
                        break;
                    }
                }
            } else if c.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn header_uint(&mut self, what: &'static str) -> Result<u32, PnmError> {
        self.skip_ws();
        let start = self.pos;
        let mut value: u32 = 0;
        while let Some(c) = self.peek().filter(u8::is_ascii_digit) {
            value = value
                .checked_mul(10)
                .and_then(|v| v.checked_add((c - b'0') as u32))
                .ok_or(PnmError::MalformedHeader { offset: start, reason: "number overflow" })?;
            self.pos += 1;
        }
        if self.pos == start {
            return Err(match self.peek() {
                None => PnmError::Truncated { offset: start },
                Some(_) => PnmError::MalformedHeader { offset: start, reason: what },
            });
        }
        Ok(value)
    }

    /// Consumes the single whitespace byte separating a binary header from
    /// its payload.
    fn raster_separator(&mut self) -> Result<(), PnmError> {
        match self.peek() {
            Some(c) if c.is_ascii_whitespace() => {
                self.pos += 1;
                Ok(())
            }
            Some(_) => Err(PnmError::MalformedHeader {
                offset: self.pos,
                reason: "expected whitespace before raster",
            }),
            None => Err(PnmError::Truncated { offset: self.pos }),
        }
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8], PnmError> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        match end {
            Some(end) => {
                let slice = &self.bytes[self.pos..end];
                self.pos = end;
                Ok(slice)
            }
            None => Err(PnmError::Truncated { offset: self.bytes.len() }),
        }
    }

    fn ascii_sample(&mut self) -> Result<u8, PnmError> {
        let offset = {
            self.skip_ws();
            self.pos
        };
        let v = self.header_uint("expected sample").map_err(|e| match e {
            PnmError::MalformedHeader { offset, .. } => PnmError::InvalidSample { offset },
            other => other,
        })?;
        u8::try_from(v).map_err(|_| PnmError::InvalidSample { offset })
    }

    /// P1 bits may be packed without separating whitespace.
    fn ascii_bit(&mut self) -> Result<bool, PnmError> {
        self.skip_ws();
        match self.peek() {
            Some(b'0') => {
                self.pos += 1;
                Ok(false)
            }
            Some(b'1') => {
                self.pos += 1;
                Ok(true)
            }
            Some(_) => Err(PnmError::InvalidSample { offset: self.pos }),
            None => Err(PnmError::Truncated { offset: self.pos }),
        }
    }
}

/// Decodes a PNM byte stream. P1/P4 yield a mask, P2/P5 a gray image and
/// P3/P6 an RGB image. Maxval must be 255 where present.
pub fn read_pnm(bytes: &[u8]) -> Result<Raster, PnmError> {
    if bytes.len() < 2 || bytes[0] != b'P' || !(b'1'..=b'6').contains(&bytes[1]) {
        return Err(PnmError::BadMagic { offset: 0 });
    }
    let kind = bytes[1] - b'0';
    let mut cur = Cursor { bytes, pos: 2 };
    match cur.peek() {
        Some(c) if c.is_ascii_whitespace() || c == b'#' => {}
        Some(_) => return Err(PnmError::BadMagic { offset: 2 }),
        None => return Err(PnmError::Truncated { offset: 2 }),
    }

    let dims_offset = cur.pos;
    let width = cur.header_uint("expected width")? as usize;
    let height = cur.header_uint("expected height")? as usize;
    if width == 0 || height == 0 {
        return Err(PnmError::MalformedHeader { offset: dims_offset, reason: "zero dimension" });
    }
    let count = width
        .checked_mul(height)
        .ok_or(PnmError::MalformedHeader { offset: dims_offset, reason: "dimensions overflow" })?;

    if kind != 1 && kind != 4 {
        cur.skip_ws();
        let offset = cur.pos;
        let maxval = cur.header_uint("expected maxval")?;
        if maxval != 255 {
            return Err(PnmError::UnsupportedMaxval { offset, maxval });
        }
    }

    let raster = match kind {
        1 => {
            let bits = (0..count).map(|_| cur.ascii_bit()).collect::<Result<Vec<_>, _>>()?;
            Raster::Binary(BinaryMask { width, height, bits })
        }
        2 => {
            let pixels = (0..count).map(|_| cur.ascii_sample()).collect::<Result<Vec<_>, _>>()?;
            Raster::Gray(GrayImage { width, height, pixels })
        }
        3 => {
            let mut pixels = Vec::with_capacity(count);
            for _ in 0..count {
                pixels.push([cur.ascii_sample()?, cur.ascii_sample()?, cur.ascii_sample()?]);
            }
            Raster::Rgb(RgbImage { width, height, pixels })
        }
        4 => {
            cur.raster_separator()?;
            let stride = width.div_ceil(8);
            let data = cur.take(stride * height)?;
            let mut bits = Vec::with_capacity(count);
            for row in data.chunks_exact(stride) {
                for x in 0..width {
                    bits.push(row[x / 8] & (0x80 >> (x % 8)) != 0);
                }
            }
            Raster::Binary(BinaryMask { width, height, bits })
        }
        5 => {
            cur.raster_separator()?;
            let pixels = cur.take(count)?.to_vec();
            Raster::Gray(GrayImage { width, height, pixels })
        }
        6 => {
            cur.raster_separator()?;
            let data = cur.take(count * 3)?;
            let pixels = data.chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect();
            Raster::Rgb(RgbImage { width, height, pixels })
        }
        _ => unreachable!("magic validated above"),
    };
    Ok(raster)
}

/// Encodes a raster in the binary variant of its PNM family (P4, P5 or P6).
pub fn write_pnm(raster: &Raster) -> Vec<u8> {
    match raster {
        Raster::Binary(mask) => {
            let stride = mask.width.div_ceil(8);
            let mut out = format!("P4\n{} {}\n", mask.width, mask.height).into_bytes();
            out.reserve(stride * mask.height);
            for row in mask.bits.chunks_exact(mask.width) {
                let mut packed = vec![0u8; stride];
                for (x, _) in row.iter().enumerate().filter(|(_, &b)| b) {
                    packed[x / 8] |= 0x80 >> (x % 8);
                }
                out.extend_from_slice(&packed);
            }
            out
        }
        Raster::Gray(img) => {
            let mut out = format!("P5\n{} {}\n255\n", img.width, img.height).into_bytes();
            out.extend_from_slice(&img.pixels);
            out
        }
        Raster::Rgb(img) => {
            let mut out = format!("P6\n{} {}\n255\n", img.width, img.height).into_bytes();
            out.reserve(img.pixels.len() * 3);
            for p in &img.pixels {
                out.extend_from_slice(p);
            }
            out
        }
    }
}
