//! Finite bit-grid materialization of point sets, and grid I/O.

use crate::geom::Window;
use crate::set::PointSet;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Default cap on rasterized bits (2^31).
pub const DEFAULT_BIT_CAP: u128 = 1 << 31;

#[derive(Debug, thiserror::Error)]
pub enum RasterError {
    #[error("window needs {bits} bits, above the cap of {cap}")]
    WindowTooLarge { bits: u128, cap: u128 },
    #[error("dimension mismatch: set has {set}, window has {window}")]
    DimensionMismatch { set: usize, window: usize },
    #[error("{format} output requires dimension 2, grid has {dim}")]
    ImageDimension { format: &'static str, dim: usize },
    #[error("malformed grid JSON: {0}")]
    Json(String),
}

/// A packed bit raster of a window of `Z^d`.
///
/// Bits are stored row-major with the last axis varying fastest, 64 bits per
/// word. The origin is the low corner of the window.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Grid {
    dim: usize,
    origin: Vec<i64>,
    extents: Vec<usize>,
    words: Vec<u64>,
}

impl Grid {
    /// An all-clear grid covering `window`.
    pub fn empty(window: &Window) -> Grid {
        let extents = window.extents();
        let bits: usize = extents.iter().product();
        Grid {
            dim: window.dim(),
            origin: window.bounds().iter().map(|&(lo, _)| lo).collect(),
            extents,
            words: vec![0; bits.div_ceil(64)],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn origin(&self) -> &[i64] {
        &self.origin
    }

    pub fn extents(&self) -> &[usize] {
        &self.extents
    }

    pub fn window(&self) -> Window {
        Window::new(
            self.origin
                .iter()
                .zip(&self.extents)
                .map(|(&o, &e)| (o, o + e as i64 - 1))
                .collect(),
        )
        .expect("grid bounds are valid")
    }

    pub fn bit_count(&self) -> usize {
        self.extents.iter().product()
    }

    pub fn ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Linear index of an in-window point.
    fn index(&self, p: &[i64]) -> usize {
        debug_assert_eq!(p.len(), self.dim);
        let mut idx = 0usize;
        for (i, &c) in p.iter().enumerate() {
            let off = (c - self.origin[i]) as usize;
            debug_assert!(off < self.extents[i]);
            idx = idx * self.extents[i] + off;
        }
        idx
    }

    pub fn contains_point(&self, p: &[i64]) -> bool {
        p.len() == self.dim
            && p.iter().zip(&self.origin).zip(&self.extents).all(
                |((&c, &o), &e)| c >= o && c < o + e as i64,
            )
    }

    /// Membership bit of an in-window point; panics outside the window.
    pub fn get(&self, p: &[i64]) -> bool {
        let idx = self.index(p);
        self.words[idx / 64] >> (idx % 64) & 1 == 1
    }

    pub fn set(&mut self, p: &[i64], value: bool) {
        let idx = self.index(p);
        if value {
            self.words[idx / 64] |= 1 << (idx % 64);
        } else {
            self.words[idx / 64] &= !(1 << (idx % 64));
        }
    }

    pub(crate) fn get_linear(&self, idx: usize) -> bool {
        self.words[idx / 64] >> (idx % 64) & 1 == 1
    }

    pub(crate) fn words(&self) -> &[u64] {
        &self.words
    }

    pub(crate) fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1usize; self.dim];
        for i in (0..self.dim.saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * self.extents[i + 1];
        }
        strides
    }

    /// ASCII rendering for 2-D grids: rows from high `y` down to low `y`,
    /// `#` for members, `.` otherwise.
    pub fn to_ascii(&self) -> Result<String, RasterError> {
        if self.dim != 2 {
            return Err(RasterError::ImageDimension {
                format: "ascii",
                dim: self.dim,
            });
        }
        let (w, h) = (self.extents[0], self.extents[1]);
        let mut out = String::with_capacity((w + 1) * h);
        for row in (0..h).rev() {
            for col in 0..w {
                let idx = col * h + row;
                out.push(if self.get_linear(idx) { '#' } else { '.' });
            }
            out.push('\n');
        }
        Ok(out)
    }

    /// Plain PBM (P1): width = x extent, height = y extent, rows top-to-bottom
    /// in decreasing `y`, `1` for members.
    pub fn to_pbm(&self) -> Result<Vec<u8>, RasterError> {
        if self.dim != 2 {
            return Err(RasterError::ImageDimension {
                format: "pbm",
                dim: self.dim,
            });
        }
        let (w, h) = (self.extents[0], self.extents[1]);
        let mut out = format!("P1\n{w} {h}\n").into_bytes();
        for row in (0..h).rev() {
            let mut line = String::with_capacity(2 * w);
            for col in 0..w {
                if col > 0 {
                    line.push(' ');
                }
                line.push(if self.get_linear(col * h + row) { '1' } else { '0' });
            }
            line.push('\n');
            out.extend_from_slice(line.as_bytes());
        }
        Ok(out)
    }

    pub fn to_json(&self) -> String {
        let bits: String = (0..self.bit_count())
            .map(|i| if self.get_linear(i) { '1' } else { '0' })
            .collect();
        let doc = GridJson {
            dim: self.dim,
            origin: self.origin.clone(),
            extents: self.extents.clone(),
            bits,
        };
        serde_json::to_string(&doc).expect("grid serializes")
    }

    pub fn from_json(text: &str) -> Result<Grid, RasterError> {
        let doc: GridJson =
            serde_json::from_str(text).map_err(|e| RasterError::Json(e.to_string()))?;
        if doc.dim == 0 || doc.origin.len() != doc.dim || doc.extents.len() != doc.dim {
            return Err(RasterError::Json(
                "dim, origin and extents are inconsistent".into(),
            ));
        }
        if doc.extents.iter().any(|&e| e == 0) {
            return Err(RasterError::Json("extents must be positive".into()));
        }
        let expected: usize = doc.extents.iter().product();
        if doc.bits.len() != expected {
            return Err(RasterError::Json(format!(
                "bit string has {} characters, extents require {expected}",
                doc.bits.len()
            )));
        }
        let window = Window::new(
            doc.origin
                .iter()
                .zip(&doc.extents)
                .map(|(&o, &e)| (o, o + e as i64 - 1))
                .collect(),
        )
        .map_err(|e| RasterError::Json(e.to_string()))?;
        let mut grid = Grid::empty(&window);
        for (i, ch) in doc.bits.bytes().enumerate() {
            match ch {
                b'1' => grid.words[i / 64] |= 1 << (i % 64),
                b'0' => {}
                other => {
                    return Err(RasterError::Json(format!(
                        "bit string may contain only 0 and 1, found '{}'",
                        other as char
                    )))
                }
            }
        }
        Ok(grid)
    }
}

#[derive(Serialize, Deserialize)]
struct GridJson {
    dim: usize,
    origin: Vec<i64>,
    extents: Vec<usize>,
    bits: String,
}

/// Materializes `set` over `window`; the bit at `p` equals membership.
pub fn rasterize(set: &PointSet, window: &Window) -> Result<Grid, RasterError> {
    rasterize_capped(set, window, DEFAULT_BIT_CAP)
}

/// As [`rasterize`] with an explicit bit cap.
pub fn rasterize_capped(
    set: &PointSet,
    window: &Window,
    cap: u128,
) -> Result<Grid, RasterError> {
    if set.dim() != window.dim() {
        return Err(RasterError::DimensionMismatch {
            set: set.dim(),
            window: window.dim(),
        });
    }
    let bits = window.point_count();
    if bits > cap {
        return Err(RasterError::WindowTooLarge { bits, cap });
    }
    let mut grid = Grid::empty(window);
    let evaluator = set.evaluator();
    let extents = grid.extents.clone();
    let origin = grid.origin.clone();
    let dim = grid.dim;
    let total = grid.bit_count();

    let word_of = |w: usize| -> u64 {
        let mut word = 0u64;
        let base = w * 64;
        let count = 64.min(total - base);
        let mut p = vec![0i64; dim];
        for b in 0..count {
            let mut idx = base + b;
            for axis in (0..dim).rev() {
                p[axis] = origin[axis] + (idx % extents[axis]) as i64;
                idx /= extents[axis];
            }
            if evaluator.contains(&p) {
                word |= 1 << b;
            }
        }
        word
    };

    const PARALLEL_THRESHOLD: usize = 1 << 16;
    if total >= PARALLEL_THRESHOLD {
        let words: Vec<u64> = (0..grid.words.len()).into_par_iter().map(word_of).collect();
        grid.words = words;
    } else {
        for w in 0..grid.words.len() {
            grid.words[w] = word_of(w);
        }
    }
    Ok(grid)
}
