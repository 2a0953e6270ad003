//! Block and recurrent-block counting over finite windows.

use crate::geom::{sup_norm, Window};
use crate::raster::{rasterize, Grid, RasterError};
use crate::set::PointSet;
use rayon::prelude::*;
use std::collections::HashSet;
use std::fmt::Write as _;
use std::hash::{BuildHasher, Hash, Hasher};

#[derive(Debug, thiserror::Error)]
pub enum CountError {
    #[error("window is too small for blocks of size {n} on axis {axis}")]
    WindowTooSmall { n: usize, axis: usize },
    #[error("escape radius {escape} leaves no anchors in the window")]
    EscapeTooLarge { escape: i64 },
    #[error("block sizes must be positive")]
    ZeroBlockSize,
    #[error("anchored cube leaves the grid")]
    CubeOutsideGrid,
    #[error(transparent)]
    Raster(#[from] RasterError),
    #[error("growth fit needs at least {needed} stabilized rows with positive counts, got {got}")]
    InsufficientRows { needed: usize, got: usize },
}

/// A block: the restriction of a set to an anchored box, compared as a map
/// on `[[0, n-1]]^d`. Equality is full bit equality; the cached hash is only
/// a filter.
#[derive(Clone, Debug)]
pub struct Block {
    sizes: Vec<usize>,
    words: Vec<u64>,
    hash: u128,
}

impl PartialEq for Block {
    fn eq(&self, other: &Self) -> bool {
        self.sizes == other.sizes && self.words == other.words
    }
}

impl Eq for Block {}

impl Hash for Block {
    fn hash<H: Hasher>(&self, state: &mut H) {
        state.write_u128(self.hash);
    }
}

impl Block {
    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn bit(&self, offsets: &[usize]) -> bool {
        let mut idx = 0usize;
        for (o, s) in offsets.iter().zip(&self.sizes) {
            debug_assert!(o < s);
            idx = idx * s + o;
        }
        self.words[idx / 64] >> (idx % 64) & 1 == 1
    }

    pub fn ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }
}

/// 128-bit non-cryptographic hash of the packed bits (two mixed 64-bit lanes).
fn mix64(mut x: u64) -> u64 {
    x ^= x >> 33;
    x = x.wrapping_mul(0xff51afd7ed558ccd);
    x ^= x >> 33;
    x = x.wrapping_mul(0xc4ceb9fe1a85ec53);
    x ^= x >> 33;
    x
}

fn block_hash(sizes: &[usize], words: &[u64]) -> u128 {
    let mut lo = 0x9e3779b97f4a7c15u64;
    let mut hi = 0x2545f4914f6cdd1du64;
    for &s in sizes {
        lo = mix64(lo ^ s as u64);
        hi = mix64(hi.wrapping_add(s as u64));
    }
    for &w in words {
        lo = mix64(lo ^ w);
        hi = mix64(hi.rotate_left(29) ^ w.wrapping_mul(0x9e3779b97f4a7c15));
    }
    ((hi as u128) << 64) | lo as u128
}

/// Pass-through hasher: `Block` already carries a mixed 128-bit hash.
#[derive(Clone, Default)]
struct BlockHashBuilder;

struct BlockHasher(u64);

impl Hasher for BlockHasher {
    fn finish(&self) -> u64 {
        self.0
    }
    fn write(&mut self, bytes: &[u8]) {
        for &b in bytes {
            self.0 = self.0.rotate_left(8) ^ b as u64;
        }
    }
    fn write_u128(&mut self, v: u128) {
        self.0 = (v as u64) ^ ((v >> 64) as u64);
    }
}

impl BuildHasher for BlockHashBuilder {
    type Hasher = BlockHasher;
    fn build_hasher(&self) -> BlockHasher {
        BlockHasher(0)
    }
}

type BlockSet = HashSet<Block, BlockHashBuilder>;

/// Extracts the block anchored at `anchor` with per-axis `sizes` from `g`.
pub fn block_at_sizes(g: &Grid, anchor: &[i64], sizes: &[usize]) -> Result<Block, CountError> {
    if sizes.iter().any(|&s| s == 0) {
        return Err(CountError::ZeroBlockSize);
    }
    let window = g.window();
    for (i, (&a, &s)) in anchor.iter().zip(sizes).enumerate() {
        if a < window.lo(i) || a + s as i64 - 1 > window.hi(i) {
            return Err(CountError::CubeOutsideGrid);
        }
    }
    Ok(extract_block(g, anchor, sizes, &g.strides()))
}

/// Extracts the cubic block of side `n` anchored at `anchor`.
pub fn block_at(g: &Grid, anchor: &[i64], n: usize) -> Result<Block, CountError> {
    block_at_sizes(g, anchor, &vec![n; g.dim()])
}

fn extract_block(g: &Grid, anchor: &[i64], sizes: &[usize], strides: &[usize]) -> Block {
    let dim = g.dim();
    let bit_count: usize = sizes.iter().product();
    let mut words = vec![0u64; bit_count.div_ceil(64)];
    let origin = g.origin();
    let base: usize = (0..dim)
        .map(|i| (anchor[i] - origin[i]) as usize * strides[i])
        .sum();
    let run = sizes[dim - 1];
    let mut offsets = vec![0usize; dim.saturating_sub(1)];
    let mut out_bit = 0usize;
    loop {
        let mut start = base;
        for (i, &o) in offsets.iter().enumerate() {
            start += o * strides[i];
        }
        copy_bits(g.words(), start, run, &mut words, out_bit);
        out_bit += run;
        // advance the outer (all but last) axes
        let mut axis = offsets.len();
        loop {
            if axis == 0 {
                return Block {
                    hash: block_hash(sizes, &words),
                    sizes: sizes.to_vec(),
                    words,
                };
            }
            axis -= 1;
            offsets[axis] += 1;
            if offsets[axis] < sizes[axis] {
                break;
            }
            offsets[axis] = 0;
        }
    }
}

/// Copies `len` bits from `src` starting at bit `src_start` into `dst` at
/// bit `dst_start`.
fn copy_bits(src: &[u64], src_start: usize, len: usize, dst: &mut [u64], dst_start: usize) {
    let mut copied = 0usize;
    while copied < len {
        let s_bit = src_start + copied;
        let d_bit = dst_start + copied;
        let s_word = s_bit / 64;
        let s_off = s_bit % 64;
        let d_off = d_bit % 64;
        let chunk = (64 - s_off).min(64 - d_off).min(len - copied);
        let mask = if chunk == 64 {
            u64::MAX
        } else {
            (1u64 << chunk) - 1
        };
        let bits = (src[s_word] >> s_off) & mask;
        dst[d_bit / 64] |= bits << d_off;
        copied += chunk;
    }
}

/// Anchors whose `sizes`-box fits inside the grid.
fn anchor_window(g: &Grid, sizes: &[usize]) -> Result<Window, CountError> {
    let w = g.window();
    let mut bounds = Vec::with_capacity(g.dim());
    for i in 0..g.dim() {
        let hi = w.hi(i) - (sizes[i] as i64 - 1);
        if hi < w.lo(i) {
            return Err(CountError::WindowTooSmall {
                n: sizes[i],
                axis: i + 1,
            });
        }
        bounds.push((w.lo(i), hi));
    }
    Ok(Window::new(bounds).expect("validated above"))
}

fn distinct_blocks(
    g: &Grid,
    sizes: &[usize],
    min_anchor_norm: Option<i64>,
) -> Result<usize, CountError> {
    let anchors = anchor_window(g, sizes)?;
    let strides = g.strides();
    let anchor_points: Vec<Vec<i64>> = anchors
        .points()
        .filter(|p| min_anchor_norm.map_or(true, |l| sup_norm(p) >= l))
        .collect();
    if anchor_points.is_empty() {
        if let Some(l) = min_anchor_norm {
            return Err(CountError::EscapeTooLarge { escape: l });
        }
        return Ok(0);
    }
    const PARALLEL_THRESHOLD: usize = 1 << 14;
    let set: BlockSet = if anchor_points.len() >= PARALLEL_THRESHOLD {
        anchor_points
            .par_chunks(1 << 12)
            .map(|chunk| {
                let mut local: BlockSet = HashSet::with_hasher(BlockHashBuilder);
                for a in chunk {
                    local.insert(extract_block(g, a, sizes, &strides));
                }
                local
            })
            .reduce(
                || HashSet::with_hasher(BlockHashBuilder),
                |mut a, b| {
                    a.extend(b);
                    a
                },
            )
    } else {
        let mut local: BlockSet = HashSet::with_hasher(BlockHashBuilder);
        for a in &anchor_points {
            local.insert(extract_block(g, a, sizes, &strides));
        }
        local
    };
    Ok(set.len())
}

/// Number of distinct `n`-blocks over all anchors whose cube fits in `w`.
pub fn p_count(s: &PointSet, n: usize, w: &Window) -> Result<usize, CountError> {
    if n == 0 {
        return Err(CountError::ZeroBlockSize);
    }
    let g = rasterize(s, w)?;
    distinct_blocks(&g, &vec![n; s.dim()], None)
}

/// Number of distinct `n`-blocks having an anchor of sup norm at least
/// `escape` inside `w` (the finite surrogate for recurrent blocks).
pub fn r_count(s: &PointSet, n: usize, w: &Window, escape: i64) -> Result<usize, CountError> {
    if n == 0 {
        return Err(CountError::ZeroBlockSize);
    }
    let g = rasterize(s, w)?;
    distinct_blocks(&g, &vec![n; s.dim()], Some(escape))
}

/// Number of distinct rectangular patterns with per-axis `sizes`.
pub fn rect_count(s: &PointSet, sizes: &[usize], w: &Window) -> Result<usize, CountError> {
    if sizes.iter().any(|&k| k == 0) {
        return Err(CountError::ZeroBlockSize);
    }
    assert_eq!(sizes.len(), s.dim());
    let g = rasterize(s, w)?;
    distinct_blocks(&g, sizes, None)
}

/// Options for the stabilized recurrent count.
#[derive(Clone, Debug)]
pub struct StabilizeOptions {
    /// Starting window. Defaults to the cube `[-r, r]^d` with
    /// `r = max(4n, 16, hint)`.
    pub initial: Option<Window>,
    /// Which axes double on each step; defaults to all.
    pub grow: Option<Vec<bool>>,
    /// Stop growing once the largest growing bound would exceed this.
    pub max_radius: i64,
}

impl Default for StabilizeOptions {
    fn default() -> Self {
        StabilizeOptions {
            initial: None,
            grow: None,
            max_radius: 4096,
        }
    }
}

/// Result of one stabilized count.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StabilizedCount {
    pub n: usize,
    pub count: usize,
    pub stabilized: bool,
    pub window: Window,
    pub escape: i64,
}

/// Escape radius for a window: half the largest growing-axis bound.
fn escape_for(w: &Window, grow: &[bool]) -> i64 {
    let growing_max = w
        .bounds()
        .iter()
        .zip(grow)
        .filter(|(_, &g)| g)
        .map(|(&(lo, hi), _)| lo.abs().max(hi.abs()))
        .max()
        .unwrap_or_else(|| w.max_norm());
    growing_max / 2
}

/// Doubles the window (and the escape radius with it) until the count is
/// unchanged across a doubling, or the radius cap is hit.
pub fn stabilized_r(
    s: &PointSet,
    n: usize,
    opts: &StabilizeOptions,
) -> Result<StabilizedCount, CountError> {
    if n == 0 {
        return Err(CountError::ZeroBlockSize);
    }
    let initial = match &opts.initial {
        Some(w) => w.clone(),
        None => {
            let r = (4 * n as i64).max(16).max(s.recurrence_radius_hint().unwrap_or(0));
            Window::cube(s.dim(), r)
        }
    };
    let grow = match &opts.grow {
        Some(g) => {
            assert_eq!(g.len(), s.dim());
            g.clone()
        }
        None => vec![true; s.dim()],
    };

    let mut window = initial;
    let mut escape = escape_for(&window, &grow);
    let mut count = r_count(s, n, &window, escape)?;
    if grow.iter().all(|&g| !g) {
        // nothing can grow, so stability cannot be confirmed
        return Ok(StabilizedCount {
            n,
            count,
            stabilized: false,
            window,
            escape,
        });
    }
    loop {
        let next = window.doubled(&grow);
        if next
            .bounds()
            .iter()
            .zip(&grow)
            .any(|(&(lo, hi), &g)| g && lo.abs().max(hi.abs()) > opts.max_radius)
        {
            return Ok(StabilizedCount {
                n,
                count,
                stabilized: false,
                window,
                escape,
            });
        }
        let next_escape = escape_for(&next, &grow);
        let next_count = r_count(s, n, &next, next_escape)?;
        if next_count == count {
            return Ok(StabilizedCount {
                n,
                count: next_count,
                stabilized: true,
                window: next,
                escape: next_escape,
            });
        }
        window = next;
        escape = next_escape;
        count = next_count;
    }
}

/// One row of a complexity table.
#[derive(Clone, Debug)]
pub struct TableRow {
    pub n: usize,
    pub count: usize,
    pub stabilized: Option<bool>,
    pub window: Window,
    pub escape: Option<i64>,
}

/// A table of counts indexed by block size.
#[derive(Clone, Debug, Default)]
pub struct ComplexityTable {
    pub rows: Vec<TableRow>,
}

impl ComplexityTable {
    pub fn push(&mut self, row: TableRow) {
        if let Some(last) = self.rows.last() {
            assert!(row.n > last.n, "rows must have strictly increasing n");
        }
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,count,stabilized,window,L\n");
        for r in &self.rows {
            let stab = r
                .stabilized
                .map(|b| b.to_string())
                .unwrap_or_else(|| "-".into());
            let escape = r
                .escape
                .map(|l| l.to_string())
                .unwrap_or_else(|| "-".into());
            let _ = writeln!(out, "{},{},{},{},{}", r.n, r.count, stab, r.window, escape);
        }
        out
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{:>4} {:>10} {:>11} {:>24} {:>8}", "n", "count", "stabilized", "window", "L");
        for r in &self.rows {
            let stab = r
                .stabilized
                .map(|b| b.to_string())
                .unwrap_or_else(|| "-".into());
            let escape = r
                .escape
                .map(|l| l.to_string())
                .unwrap_or_else(|| "-".into());
            let _ = writeln!(
                out,
                "{:>4} {:>10} {:>11} {:>24} {:>8}",
                r.n,
                r.count,
                stab,
                r.window.to_string(),
                escape
            );
        }
        out
    }
}

/// Least-squares slope of `log count` against `log n`, with RMS residual.
pub fn growth_fit(table: &ComplexityTable) -> Result<(f64, f64), CountError> {
    let rows: Vec<&TableRow> = table
        .rows
        .iter()
        .filter(|r| r.stabilized.unwrap_or(true) && r.count >= 1)
        .collect();
    if rows.len() < 4 {
        return Err(CountError::InsufficientRows {
            needed: 4,
            got: rows.len(),
        });
    }
    let points: Vec<(f64, f64)> = rows
        .iter()
        .map(|r| ((r.n as f64).ln(), (r.count as f64).ln()))
        .collect();
    let n = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    let sxy: f64 = points
        .iter()
        .map(|p| (p.0 - mean_x) * (p.1 - mean_y))
        .sum();
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let rss: f64 = points
        .iter()
        .map(|p| (p.1 - (intercept + slope * p.0)).powi(2))
        .sum();
    let residual = (rss / n).sqrt();
    Ok((slope, residual))
}

/// JSON form of a growth fit.
pub fn growth_fit_json(table: &ComplexityTable) -> Result<String, CountError> {
    let (exponent, residual) = growth_fit(table)?;
    Ok(format!(
        "{{\"exponent\":{exponent},\"residual\":{residual}}}"
    ))
}

/// Counts distinct factors of length `n` in a finite 0/1 word.
pub fn word_factor_count(word: &[bool], n: usize) -> usize {
    if n == 0 || word.len() < n {
        return 0;
    }
    let mut seen: HashSet<&[bool]> = HashSet::new();
    for i in 0..=word.len() - n {
        seen.insert(&word[i..i + n]);
    }
    seen.len()
}
