//! Synthetic cut-out objects.
//!
//! A glyph is a set of stroke centerlines in the unit square. Pixels within
//! half a stroke width of a centerline belong to the cut-out; the
//! transmittance ramps linearly from 0 at the stroke boundary to 1 once the
//! pixel is `edge_softness` pixels deep inside, and the background is
//! opaque.

use std::f64::consts::PI;
use std::str::FromStr;

use crate::error::{Error, Result};

use super::TransmittanceMap;

/// Stroke width as a fraction of the shorter image side.
const STROKE_WIDTH: f64 = 0.14;
const ARC_SEGMENTS: usize = 96;
/// Transmittances are snapped to multiples of `1 / LEVELS`. Mirror-image
/// pixels reach their distances along different rounding paths, and the
/// snap makes them exactly equal instead of one ulp apart.
const LEVELS: f64 = 4_294_967_296.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Glyph {
    S,
    O,
    I,
}

impl FromStr for Glyph {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "S" | "s" => Ok(Glyph::S),
            "O" | "o" => Ok(Glyph::O),
            "I" | "i" => Ok(Glyph::I),
            other => Err(Error::Parse(format!("unknown glyph {other:?} (expected S, O or I)"))),
        }
    }
}

type Point = (f64, f64);

/// Arc around `center` from `start` to `end` (degrees, counterclockwise as
/// seen on screen, y pointing down).
fn arc(center: Point, radius: f64, start: f64, end: f64) -> Vec<Point> {
    (0..=ARC_SEGMENTS)
        .map(|k| {
            let deg = start + (end - start) * k as f64 / ARC_SEGMENTS as f64;
            let rad = deg * PI / 180.0;
            (center.0 + radius * rad.cos(), center.1 - radius * rad.sin())
        })
        .collect()
}

impl Glyph {
    /// Centerline polylines in unit-square coordinates.
    fn strokes(self) -> Vec<Vec<Point>> {
        match self {
            // upper bowl opens to the lower right, lower bowl to the upper left
            Glyph::S => vec![
                arc((0.5, 0.3), 0.2, 20.0, 270.0),
                arc((0.5, 0.7), 0.2, 90.0, -160.0),
            ],
            Glyph::O => vec![arc((0.5, 0.5), 0.33, 0.0, 360.0)],
            Glyph::I => vec![vec![(0.5, 0.12), (0.5, 0.88)]],
        }
    }
}

fn segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let len2 = dx * dx + dy * dy;
    let t = if len2 > 0.0 {
        (((p.0 - a.0) * dx + (p.1 - a.1) * dy) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    (p.0 - a.0 - t * dx).hypot(p.1 - a.1 - t * dy)
}

/// Renders `glyph` as a soft-edged cut-out. `edge_softness` is the ramp
/// width in pixels.
pub fn synth_letter_object(width: usize, height: usize, glyph: Glyph, edge_softness: f64) -> Result<TransmittanceMap> {
    if width < 16 || height < 16 {
        return Err(Error::InvalidParameter {
            name: "dimensions",
            value: width.min(height) as f64,
            reason: "synthetic objects need at least 16x16 pixels",
        });
    }
    if !(edge_softness > 0.0 && edge_softness.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "edge_softness",
            value: edge_softness,
            reason: "must be positive",
        });
    }
    let side = width.min(height) as f64;
    let origin = ((width as f64 - side) / 2.0, (height as f64 - side) / 2.0);
    let half_width = 0.5 * STROKE_WIDTH * side;
    let strokes: Vec<Vec<Point>> = glyph
        .strokes()
        .into_iter()
        .map(|line| {
            line.into_iter()
                .map(|(u, v)| (origin.0 + u * side, origin.1 + v * side))
                .collect()
        })
        .collect();

    let mut values = Vec::with_capacity(width * height);
    for y in 0..height {
        for x in 0..width {
            let p = (x as f64 + 0.5, y as f64 + 0.5);
            let d = strokes
                .iter()
                .flat_map(|line| line.windows(2))
                .map(|seg| segment_distance(p, seg[0], seg[1]))
                .fold(f64::INFINITY, f64::min);
            let t = ((half_width - d) / edge_softness).clamp(0.0, 1.0);
            values.push((t * LEVELS).round() / LEVELS);
        }
    }
    TransmittanceMap::new(width, height, values)
}
