//! Transverse-plane imaging: object maps, their file formats, synthetic
//! test objects and the per-pixel reconstruction pipeline.

mod glyph;
mod pgm;
mod reconstruct;

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::fmt_sig17;

pub use glyph::{synth_letter_object, Glyph};
pub use pgm::{parse_pgm, to_pgm, PgmFormat};
pub use reconstruct::{reconstruct, Execution, ReconstructionPlan, ReconstructionReport};

/// Largest accepted pixel count, to reject absurd headers before allocating.
pub const MAX_PIXELS: usize = 1 << 28;

/// Row-major grid of amplitude transmittances in `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct TransmittanceMap {
    width: usize,
    height: usize,
    values: Vec<f64>,
}

impl TransmittanceMap {
    pub fn new(width: usize, height: usize, values: Vec<f64>) -> Result<Self> {
        let expected = checked_area(width, height)?;
        if values.len() != expected {
            return Err(Error::DimensionMismatch {
                left: expected,
                right: values.len(),
            });
        }
        if let Some(&bad) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::InvalidParameter {
                name: "transmittance",
                value: bad,
                reason: "must lie in [0, 1]",
            });
        }
        Ok(Self { width, height, values })
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Result<Self> {
        let n = checked_area(width, height)?;
        Self::new(width, height, vec![value; n])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.values[y * self.width + x]
    }

    /// Headerless CSV, one line per row.
    pub fn to_csv(&self) -> String {
        grid_to_csv(self.width, &self.values)
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut values = Vec::new();
        let mut width = None;
        let mut height = 0;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let row = line
                .split(',')
                .map(|cell| {
                    cell.trim().parse::<f64>().map_err(|e| {
                        Error::Parse(format!("line {}: bad value {cell:?}: {e}", lineno + 1))
                    })
                })
                .collect::<Result<Vec<f64>>>()?;
            match width {
                None => width = Some(row.len()),
                Some(w) if w != row.len() => {
                    return Err(Error::Parse(format!(
                        "line {}: expected {w} values, found {}",
                        lineno + 1,
                        row.len()
                    )))
                }
                Some(_) => {}
            }
            if let Some(bad) = row.iter().find(|v| !(0.0..=1.0).contains(*v)) {
                return Err(Error::Parse(format!(
                    "line {}: transmittance {bad} outside [0, 1]",
                    lineno + 1
                )));
            }
            values.extend(row);
            height += 1;
            if values.len() > MAX_PIXELS {
                return Err(Error::Parse("grid too large".into()));
            }
        }
        let width = width.ok_or_else(|| Error::Parse("empty CSV grid".into()))?;
        Self::new(width, height, values)
    }
}

fn checked_area(width: usize, height: usize) -> Result<usize> {
    if width == 0 || height == 0 {
        return Err(Error::InvalidParameter {
            name: "dimensions",
            value: 0.0,
            reason: "width and height must be at least 1",
        });
    }
    match width.checked_mul(height) {
        Some(n) if n <= MAX_PIXELS => Ok(n),
        _ => Err(Error::InvalidParameter {
            name: "dimensions",
            value: width as f64 * height as f64,
            reason: "too many pixels",
        }),
    }
}

/// Headerless CSV of a row-major grid with 17 significant digits.
pub fn grid_to_csv(width: usize, values: &[f64]) -> String {
    let mut out = String::new();
    for row in values.chunks(width) {
        let line: Vec<String> = row.iter().map(|&v| fmt_sig17(v)).collect();
        writeln!(out, "{}", line.join(",")).expect("string write");
    }
    out
}

fn is_pgm(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("pgm"))
}

/// Loads a `.pgm` (P2 or P5) or CSV map; other extensions are sniffed by
/// magic number.
pub fn load_map(path: impl AsRef<Path>) -> Result<TransmittanceMap> {
    let path = path.as_ref();
    let bytes = std::fs::read(path)?;
    if is_pgm(path) || bytes.starts_with(b"P2") || bytes.starts_with(b"P5") {
        parse_pgm(&bytes)
    } else {
        let text = String::from_utf8(bytes).map_err(|_| Error::Parse("CSV is not valid UTF-8".into()))?;
        TransmittanceMap::from_csv(&text)
    }
}

/// Saves as binary PGM for `.pgm` paths and as CSV otherwise.
pub fn save_map(map: &TransmittanceMap, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    if is_pgm(path) {
        std::fs::write(path, to_pgm(map, PgmFormat::Binary))?;
    } else {
        std::fs::write(path, map.to_csv())?;
    }
    Ok(())
}

fn same_shape(a: &TransmittanceMap, b: &TransmittanceMap) -> Result<()> {
    if (a.width, a.height) != (b.width, b.height) {
        return Err(Error::DimensionMismatch {
            left: a.values.len(),
            right: b.values.len(),
        });
    }
    Ok(())
}

/// Root-mean-square pixel difference.
pub fn rmse(a: &TransmittanceMap, b: &TransmittanceMap) -> Result<f64> {
    same_shape(a, b)?;
    let sum: f64 = a.values.iter().zip(&b.values).map(|(x, y)| (x - y).powi(2)).sum();
    Ok((sum / a.values.len() as f64).sqrt())
}

/// Largest absolute pixel difference.
pub fn max_abs_error(a: &TransmittanceMap, b: &TransmittanceMap) -> Result<f64> {
    same_shape(a, b)?;
    Ok(a.values
        .iter()
        .zip(&b.values)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max))
}

/// Ranks starting at 1, ties sharing their mean rank.
fn mean_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        let rank = 0.5 * (start + end + 1) as f64;
        for &i in &order[start..end] {
            ranks[i] = rank;
        }
        start = end;
    }
    ranks
}

/// Spearman rank correlation of the pixel values. `None` when either map is
/// constant.
pub fn rank_correlation(a: &TransmittanceMap, b: &TransmittanceMap) -> Result<Option<f64>> {
    same_shape(a, b)?;
    let (ra, rb) = (mean_ranks(&a.values), mean_ranks(&b.values));
    let mean = 0.5 * (ra.len() + 1) as f64;
    let (mut cov, mut va, mut vb) = (0.0, 0.0, 0.0);
    for (x, y) in ra.iter().zip(&rb) {
        cov += (x - mean) * (y - mean);
        va += (x - mean) * (x - mean);
        vb += (y - mean) * (y - mean);
    }
    if va == 0.0 || vb == 0.0 {
        return Ok(None);
    }
    Ok(Some(cov / (va * vb).sqrt()))
}
