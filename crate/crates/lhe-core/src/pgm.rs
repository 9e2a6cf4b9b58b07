//! PGM (netpbm grayscale) codec, ASCII `P2` and binary `P5`, maxval 255.
//!
//! The writer always emits `P5` with a single comment line naming the tool,
//! so identical images encode to identical bytes.

use std::fs;
use std::io;
use std::path::Path;

use thiserror::Error;

use crate::GrayImage;

/// Comment line embedded in every written file.
const TOOL_COMMENT: &str = "lhetool";

#[derive(Debug, Error)]
pub enum PgmError {
    #[error("malformed header: {0}")]
    MalformedHeader(String),

    #[error("unsupported maxval {0}, only 255 is accepted")]
    UnsupportedMaxval(u32),

    #[error("bad dimensions {width}x{height}")]
    BadDimensions { width: usize, height: usize },

    #[error("truncated payload: got {got} samples, expected {expected}")]
    Truncated { got: usize, expected: usize },

    #[error("trailing data after {expected} samples")]
    TrailingData { expected: usize },

    #[error("sample value {0} exceeds maxval 255")]
    SampleOutOfRange(u32),

    #[error(transparent)]
    Io(#[from] io::Error),
}

pub fn read_pgm(path: impl AsRef<Path>) -> Result<GrayImage, PgmError> {
    decode_pgm(&fs::read(path)?)
}

pub fn write_pgm(image: &GrayImage, path: impl AsRef<Path>) -> Result<(), PgmError> {
    fs::write(path, encode_pgm(image))?;
    Ok(())
}

/// Serializes as binary `P5`, maxval 255.
pub fn encode_pgm(image: &GrayImage) -> Vec<u8> {
    assert_eq!(
        image.levels(),
        GrayImage::DEFAULT_LEVELS,
        "PGM output is 8-bit; image has {} levels",
        image.levels()
    );
    let header = format!(
        "P5\n# {}\n{} {}\n255\n",
        TOOL_COMMENT,
        image.width(),
        image.height()
    );
    let mut out = header.into_bytes();
    out.extend(image.pixels().iter().map(|&v| v as u8));
    out
}

/// Parses `P2` or `P5` bytes. Both formats decode to the same image.
pub fn decode_pgm(data: &[u8]) -> Result<GrayImage, PgmError> {
    let mut cursor = Cursor { data, pos: 0 };
    let magic = cursor.token()?;
    let binary = match magic.as_slice() {
        b"P2" => false,
        b"P5" => true,
        other => {
            return Err(PgmError::MalformedHeader(format!(
                "unknown magic {:?}",
                String::from_utf8_lossy(other)
            )))
        }
    };

    let width = cursor.number("width")? as usize;
    let height = cursor.number("height")? as usize;
    let maxval = cursor.number("maxval")?;
    if maxval != 255 {
        return Err(PgmError::UnsupportedMaxval(maxval));
    }
    if width == 0 || height == 0 {
        return Err(PgmError::BadDimensions { width, height });
    }
    let expected = width
        .checked_mul(height)
        .ok_or(PgmError::BadDimensions { width, height })?;

    let pixels = if binary {
        // Exactly one whitespace byte separates the header from the raster.
        cursor.single_whitespace()?;
        let rest = &cursor.data[cursor.pos..];
        if rest.len() < expected {
            return Err(PgmError::Truncated {
                got: rest.len(),
                expected,
            });
        }
        if rest.len() > expected {
            return Err(PgmError::TrailingData { expected });
        }
        rest.iter().map(|&b| u16::from(b)).collect()
    } else {
        let mut pixels = Vec::with_capacity(expected);
        for _ in 0..expected {
            match cursor.try_number()? {
                Some(v) if v <= 255 => pixels.push(v as u16),
                Some(v) => return Err(PgmError::SampleOutOfRange(v)),
                None => {
                    return Err(PgmError::Truncated {
                        got: pixels.len(),
                        expected,
                    })
                }
            }
        }
        if cursor.try_number()?.is_some() {
            return Err(PgmError::TrailingData { expected });
        }
        pixels
    };

    GrayImage::new(width, height, GrayImage::DEFAULT_LEVELS, pixels)
        .map_err(|e| PgmError::MalformedHeader(e.to_string()))
}

struct Cursor<'a> {
    data: &'a [u8],
    pos: usize,
}

impl Cursor<'_> {
    /// Skips whitespace and `#` comments (which run to end of line).
    fn skip_filler(&mut self) {
        while self.pos < self.data.len() {
            let b = self.data[self.pos];
            if b.is_ascii_whitespace() {
                self.pos += 1;
            } else if b == b'#' {
                while self.pos < self.data.len() && self.data[self.pos] != b'\n' {
                    self.pos += 1;
                }
            } else {
                break;
            }
        }
    }

    fn token(&mut self) -> Result<Vec<u8>, PgmError> {
        self.skip_filler();
        let start = self.pos;
        while self.pos < self.data.len()
            && !self.data[self.pos].is_ascii_whitespace()
            && self.data[self.pos] != b'#'
        {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(PgmError::MalformedHeader("unexpected end of header".into()));
        }
        Ok(self.data[start..self.pos].to_vec())
    }

    fn number(&mut self, what: &str) -> Result<u32, PgmError> {
        let tok = self
            .token()
            .map_err(|_| PgmError::MalformedHeader(format!("missing {what}")))?;
        std::str::from_utf8(&tok)
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| {
                PgmError::MalformedHeader(format!(
                    "bad {what} {:?}",
                    String::from_utf8_lossy(&tok)
                ))
            })
    }

    /// Like `number`, but `None` at end of input (for counting P2 samples).
    fn try_number(&mut self) -> Result<Option<u32>, PgmError> {
        self.skip_filler();
        if self.pos >= self.data.len() {
            return Ok(None);
        }
        self.number("sample").map(Some)
    }

    fn single_whitespace(&mut self) -> Result<(), PgmError> {
        match self.data.get(self.pos) {
            Some(b) if b.is_ascii_whitespace() => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(PgmError::MalformedHeader(
                "missing whitespace before P5 raster".into(),
            )),
        }
    }
}
