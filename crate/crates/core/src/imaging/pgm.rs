//! 8-bit PGM (P2 ASCII and P5 binary) reading and writing.
//!
//! Pixel value `p` maps to `T = p / maxval`; written files always use
//! `maxval = 255`.

use crate::error::{Error, Result};

use super::{checked_area, TransmittanceMap};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PgmFormat {
    /// P2
    Ascii,
    /// P5
    Binary,
}

struct Cursor<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn skip_whitespace_and_comments(&mut self) {
        while let Some(&b) = self.data.get(self.pos) {
            if b == b'#' {
                while let Some(&c) = self.data.get(self.pos) {
                    self.pos += 1;
                    if c == b'\n' || c == b'\r' {
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

    fn number(&mut self, what: &str) -> Result<u64> {
        self.skip_whitespace_and_comments();
        let start = self.pos;
        while self.data.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(match self.data.get(self.pos) {
                None => Error::Parse(format!("unexpected end of file reading {what}")),
                Some(&b) => Error::Parse(format!("expected {what}, found byte {:?}", b as char)),
            });
        }
        std::str::from_utf8(&self.data[start..self.pos])
            .expect("ascii digits")
            .parse()
            .map_err(|_| Error::Parse(format!("{what} does not fit in 64 bits")))
    }
}

pub fn parse_pgm(data: &[u8]) -> Result<TransmittanceMap> {
    let format = match data.get(..2) {
        Some(b"P2") => PgmFormat::Ascii,
        Some(b"P5") => PgmFormat::Binary,
        _ => return Err(Error::Parse("not a P2/P5 PGM file (bad magic number)".into())),
    };
    let mut cur = Cursor { data, pos: 2 };
    let width = cur.number("width")?;
    let height = cur.number("height")?;
    let maxval = cur.number("maxval")?;
    if width == 0 || height == 0 {
        return Err(Error::Parse(format!("invalid dimensions {width}x{height}")));
    }
    let (width, height) = match (usize::try_from(width), usize::try_from(height)) {
        (Ok(w), Ok(h)) => (w, h),
        _ => return Err(Error::Parse("dimensions overflow".into())),
    };
    let n = checked_area(width, height)
        .map_err(|_| Error::Parse(format!("dimensions {width}x{height} overflow the pixel limit")))?;
    if !(1..=255).contains(&maxval) {
        return Err(Error::Parse(format!("unsupported maxval {maxval} (expected 1..=255)")));
    }

    let raw: Vec<u64> = match format {
        PgmFormat::Ascii => (0..n)
            .map(|k| cur.number(&format!("pixel {k}")))
            .collect::<Result<_>>()?,
        PgmFormat::Binary => {
            // exactly one whitespace byte separates the header from the raster
            match data.get(cur.pos) {
                Some(b) if b.is_ascii_whitespace() => cur.pos += 1,
                _ => return Err(Error::Parse("missing whitespace after maxval".into())),
            }
            let raster = data
                .get(cur.pos..cur.pos + n)
                .ok_or_else(|| Error::Parse(format!("truncated raster: expected {n} bytes")))?;
            raster.iter().map(|&b| b as u64).collect()
        }
    };
    if let Some((k, p)) = raw.iter().enumerate().find(|(_, &p)| p > maxval) {
        return Err(Error::Parse(format!("pixel {k} value {p} exceeds maxval {maxval}")));
    }
    let scale = maxval as f64;
    TransmittanceMap::new(width, height, raw.into_iter().map(|p| p as f64 / scale).collect())
}

fn quantize(t: f64) -> u8 {
    (t * 255.0).round().clamp(0.0, 255.0) as u8
}

pub fn to_pgm(map: &TransmittanceMap, format: PgmFormat) -> Vec<u8> {
    let magic = match format {
        PgmFormat::Ascii => "P2",
        PgmFormat::Binary => "P5",
    };
    let mut out = format!("{magic}\n{} {}\n255\n", map.width(), map.height()).into_bytes();
    match format {
        PgmFormat::Binary => out.extend(map.values().iter().map(|&t| quantize(t))),
        PgmFormat::Ascii => {
            for row in map.values().chunks(map.width()) {
                let line: Vec<String> = row.iter().map(|&t| quantize(t).to_string()).collect();
                out.extend(line.join(" ").into_bytes());
                out.push(b'\n');
            }
        }
    }
    out
}
