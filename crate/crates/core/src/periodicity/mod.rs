//! Period search and certification: local periods inside neighborhoods, the
//! pigeonhole period finder, local-periodicity and Muchnik-condition
//! verification, the one-dimensional ultimate-periodicity test, global
//! period search, a repetitivity probe, and the definability classifier.

mod classify;

pub use classify::{classify_definability, ClassifyBudget, DefinabilityReport, Verdict, Witness};

use crate::complexity::{block_at, word_factor_count, CountError};
use crate::geom::{sup_norm, Window};
use crate::raster::{rasterize, Grid, RasterError};
use crate::set::PointSet;
use num::rational::Ratio;
use num::ToPrimitive;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

#[derive(Debug, thiserror::Error)]
pub enum PeriodError {
    #[error("period vector must be nonzero")]
    ZeroVector,
    #[error("invalid certificate: K={k} must exceed the period norm sum {sum}")]
    CertificateNormSum { k: i64, sum: i64 },
    #[error("invalid certificate: {0}")]
    Certificate(String),
    #[error("invalid search parameters: {0}")]
    Parameters(String),
    #[error("blocks required by the search leave the grid")]
    Geometry,
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("word too short: need at least {needed} letters, got {got}")]
    WordTooShort { needed: usize, got: usize },
    #[error("operation requires dimension {needed}, got {got}")]
    Dimension { needed: usize, got: usize },
    #[error(transparent)]
    Count(#[from] CountError),
    #[error(transparent)]
    Raster(#[from] RasterError),
}

/// A nonzero candidate period vector.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PeriodVector(pub Vec<i64>);

impl PeriodVector {
    pub fn new(v: Vec<i64>) -> Result<PeriodVector, PeriodError> {
        if v.iter().all(|&c| c == 0) {
            return Err(PeriodError::ZeroVector);
        }
        Ok(PeriodVector(v))
    }

    pub fn norm(&self) -> i64 {
        sup_norm(&self.0)
    }

    pub fn as_slice(&self) -> &[i64] {
        &self.0
    }
}

/// A local-periodicity certificate: far beyond radius `L`, every
/// `K`-neighborhood admits some vector of `V` as a local period.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LocalPeriodicityCert {
    #[serde(rename = "V")]
    pub periods: Vec<Vec<i64>>,
    #[serde(rename = "K")]
    pub k: i64,
    #[serde(rename = "L")]
    pub l: i64,
}

impl LocalPeriodicityCert {
    /// Checks the structural invariants: nonempty `V` of nonzero vectors and
    /// `K` strictly above the sum of their norms.
    pub fn validate(&self) -> Result<(), PeriodError> {
        if self.periods.is_empty() {
            return Err(PeriodError::Certificate("period set is empty".into()));
        }
        if self.periods.iter().any(|v| v.iter().all(|&c| c == 0)) {
            return Err(PeriodError::Certificate("period set contains zero".into()));
        }
        let sum: i64 = self.periods.iter().map(|v| sup_norm(v)).sum();
        if self.k <= sum {
            return Err(PeriodError::CertificateNormSum { k: self.k, sum });
        }
        if self.l < 0 {
            return Err(PeriodError::Certificate("L must be nonnegative".into()));
        }
        Ok(())
    }
}

/// True iff any two points of `B(x, K)` differing by `v` agree on
/// membership in `s`.
pub fn is_v_periodic_inside(s: &PointSet, v: &PeriodVector, x: &[i64], k: i64) -> bool {
    assert!(k >= 1);
    assert_eq!(x.len(), s.dim());
    let evaluator = s.evaluator();
    let ball = ball_window(x, k);
    for m in ball.points() {
        let shifted: Vec<i64> = m.iter().zip(v.as_slice()).map(|(&a, &d)| a + d).collect();
        if !ball.contains(&shifted) {
            continue;
        }
        if evaluator.contains(&m) != evaluator.contains(&shifted) {
            return false;
        }
    }
    true
}

/// The neighborhood `{y : ||x - y|| < k}` as a window.
fn ball_window(x: &[i64], k: i64) -> Window {
    Window::new(x.iter().map(|&c| (c - k + 1, c + k - 1)).collect()).expect("k >= 1")
}

/// Grid-backed variant used by the window scanners.
fn v_periodic_on_grid(g: &Grid, v: &[i64], x: &[i64], k: i64) -> bool {
    let ball = ball_window(x, k);
    for m in ball.points() {
        let shifted: Vec<i64> = m.iter().zip(v).map(|(&a, &d)| a + d).collect();
        if !ball.contains(&shifted) {
            continue;
        }
        if g.get(&m) != g.get(&shifted) {
            return false;
        }
    }
    true
}

/// Parameters for the pigeonhole period finder.
#[derive(Clone, Debug)]
pub struct PeriodSearchParams {
    /// Complexity constant: the set is assumed to satisfy `R(n) <= C n^(d-1)`.
    pub c: Ratio<i64>,
    /// Block size inspected by the finder.
    pub n: usize,
    /// Pigeonhole box size; a period of norm at most `m` is produced.
    pub m: usize,
    /// Escape radius: anchors must satisfy `||z|| >= m0 + m`.
    pub m0: i64,
}

impl PeriodSearchParams {
    /// Validates `m < n` and `m^d - C n^(d-1) >= 1`.
    pub fn validate(&self, dim: usize) -> Result<(), PeriodError> {
        if self.m == 0 || self.n == 0 {
            return Err(PeriodError::Parameters("m and n must be positive".into()));
        }
        if self.m >= self.n {
            return Err(PeriodError::Parameters(format!(
                "m={} must be below n={}",
                self.m, self.n
            )));
        }
        if self.c <= Ratio::new(0, 1) {
            return Err(PeriodError::Parameters("C must be positive".into()));
        }
        // m^d - C n^(d-1) >= 1, checked exactly by cross-multiplication.
        let m_pow = (self.m as i128).pow(dim as u32);
        let n_pow = (self.n as i128).pow(dim as u32 - 1);
        let num = *self.c.numer() as i128;
        let den = *self.c.denom() as i128;
        if m_pow * den - num * n_pow < den {
            return Err(PeriodError::Parameters(format!(
                "m^d - C n^(d-1) >= 1 fails for m={}, n={}, C={}",
                self.m, self.n, self.c
            )));
        }
        Ok(())
    }
}

/// Searches the `m^d` anchors `z + y`, `y in [[-m+1, 0]]^d`, for two equal
/// `n`-blocks; their offset is a local period whose triple block equality
/// `M(z-v) = M(z) = M(z+v)` (block size `n - m`) is re-verified bitwise.
///
/// Returns `None` only when all touched anchors carry pairwise distinct
/// blocks. When several collisions exist the returned vector is minimal in
/// `(norm, coordinates)` order after sign canonicalization.
pub fn find_local_period(
    g: &Grid,
    z: &[i64],
    params: &PeriodSearchParams,
) -> Result<Option<PeriodVector>, PeriodError> {
    let dim = g.dim();
    params.validate(dim)?;
    if sup_norm(z) < params.m0 + params.m as i64 {
        return Err(PeriodError::Parameters(format!(
            "||z|| = {} is below m0 + m = {}",
            sup_norm(z),
            params.m0 + params.m as i64
        )));
    }
    let (n, m) = (params.n, params.m);
    // Geometry: all touched blocks must fit in the grid.
    let offsets = Window::new(vec![(-(m as i64) + 1, 0); dim]).expect("m >= 1");
    let mut blocks: HashMap<crate::complexity::Block, Vec<Vec<i64>>> = HashMap::new();
    for y in offsets.points() {
        let anchor: Vec<i64> = z.iter().zip(&y).map(|(&a, &b)| a + b).collect();
        let block = block_at(g, &anchor, n).map_err(|_| PeriodError::Geometry)?;
        blocks.entry(block).or_default().push(y);
    }
    let mut candidates: Vec<Vec<i64>> = Vec::new();
    for anchors in blocks.values() {
        for i in 0..anchors.len() {
            for j in i + 1..anchors.len() {
                let mut v: Vec<i64> = anchors[i]
                    .iter()
                    .zip(&anchors[j])
                    .map(|(&a, &b)| a - b)
                    .collect();
                // canonical sign: first nonzero coordinate positive
                if let Some(first) = v.iter().find(|&&c| c != 0) {
                    if *first < 0 {
                        v.iter_mut().for_each(|c| *c = -*c);
                    }
                }
                candidates.push(v);
            }
        }
    }
    if candidates.is_empty() {
        return Ok(None);
    }
    candidates.sort_by_key(|v| (sup_norm(v), v.clone()));
    let v = candidates.swap_remove(0);
    debug_assert!(sup_norm(&v) <= m as i64);

    // Re-verify the triple equality bitwise at block size n - m.
    let side = n - m;
    let center = block_at(g, z, side).map_err(|_| PeriodError::Geometry)?;
    for sign in [-1i64, 1] {
        let shifted: Vec<i64> = z.iter().zip(&v).map(|(&a, &d)| a + sign * d).collect();
        let other = block_at(g, &shifted, side).map_err(|_| PeriodError::Geometry)?;
        if other != center {
            return Err(PeriodError::Precondition(format!(
                "pigeonhole produced v={v:?} but the triple equality fails; \
                 the grid content changed under the search"
            )));
        }
    }
    Ok(Some(PeriodVector(v)))
}

/// The norm bound `(2C)^(1/d) * (5K)^((d-1)/d)` on local periods.
pub fn period_norm_bound(c: Ratio<i64>, k: i64, dim: u32) -> f64 {
    assert!(dim >= 1 && k >= 1);
    let c = c.to_f64().expect("ratio fits in f64");
    let d = dim as f64;
    (2.0 * c).powf(1.0 / d) * (5.0 * k as f64).powf((d - 1.0) / d)
}

/// Outcome of a certificate verification scan.
#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub holds: bool,
    /// Lexicographically first `x` (with `||x|| >= L`) where no period of
    /// `V` works, if any.
    pub first_violation: Option<Vec<i64>>,
    pub points_checked: u64,
}

/// Exhaustively checks the local-periodicity certificate over all window
/// points of norm at least `cert.l`.
pub fn verify_local_periodicity(
    s: &PointSet,
    cert: &LocalPeriodicityCert,
    w: &Window,
) -> Result<VerifyReport, PeriodError> {
    cert.validate()?;
    scan_certificate(s, &cert.periods, cert.k, cert.l, w)
}

fn scan_certificate(
    s: &PointSet,
    periods: &[Vec<i64>],
    k: i64,
    l: i64,
    w: &Window,
) -> Result<VerifyReport, PeriodError> {
    assert_eq!(w.dim(), s.dim());
    let max_norm = periods.iter().map(|v| sup_norm(v)).max().unwrap_or(0);
    let padded = w.padded(k - 1 + max_norm);
    let grid = rasterize(s, &padded)?;
    let mut checked = 0u64;
    for x in w.points() {
        if sup_norm(&x) < l {
            continue;
        }
        checked += 1;
        let ok = periods
            .iter()
            .any(|v| v_periodic_on_grid(&grid, v, &x, k));
        if !ok {
            return Ok(VerifyReport {
                holds: false,
                first_violation: Some(x),
                points_checked: checked,
            });
        }
    }
    Ok(VerifyReport {
        holds: true,
        first_violation: None,
        points_checked: checked,
    })
}

/// Finds the smallest escape radius `L` within the window for which the
/// sampled Muchnik instance at `K` holds, or `None` if even the window's
/// edge fails. Unlike certificate verification there is no constraint
/// relating `K` to the period norms.
pub fn muchnik_sample(
    s: &PointSet,
    k: i64,
    periods: &[PeriodVector],
    w: &Window,
) -> Result<Option<i64>, PeriodError> {
    assert!(k >= 1);
    if periods.is_empty() {
        return Err(PeriodError::Certificate("period set is empty".into()));
    }
    let raw: Vec<Vec<i64>> = periods.iter().map(|p| p.0.clone()).collect();
    let max_norm = raw.iter().map(|v| sup_norm(v)).max().unwrap_or(0);
    let padded = w.padded(k - 1 + max_norm);
    let grid = rasterize(s, &padded)?;
    let mut worst_failure: Option<i64> = None;
    for x in w.points() {
        let ok = raw.iter().any(|v| v_periodic_on_grid(&grid, v, &x, k));
        if !ok {
            let norm = sup_norm(&x);
            worst_failure = Some(worst_failure.map_or(norm, |w: i64| w.max(norm)));
        }
    }
    let l = match worst_failure {
        None => 0,
        Some(norm) => norm + 1,
    };
    if l > w.max_norm() {
        return Ok(None); // no point of the window lies beyond every failure
    }
    Ok(Some(l))
}

/// Verdict of the one-dimensional ultimate-periodicity test.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum MhVerdict {
    /// Some `n <= n_max` has at most `n` distinct factors of length `n`;
    /// the word is ultimately periodic with period at most `n`.
    Certificate { n: usize, factor_count: usize },
    /// Factor counts exceed `n` for every `n <= n_max`.
    NoCertificate { n_max: usize },
}

/// Finds the least `n <= n_max` whose factor count is at most `n`.
/// The word must be at least `2 * n_max` letters long for the counts to be
/// meaningful.
pub fn mh_classify_1d(word: &[bool], n_max: usize) -> Result<MhVerdict, PeriodError> {
    if n_max == 0 {
        return Err(PeriodError::Parameters("n_max must be positive".into()));
    }
    if word.len() < 2 * n_max {
        return Err(PeriodError::WordTooShort {
            needed: 2 * n_max,
            got: word.len(),
        });
    }
    for n in 1..=n_max {
        let count = word_factor_count(word, n);
        if count <= n {
            return Ok(MhVerdict::Certificate {
                n,
                factor_count: count,
            });
        }
    }
    Ok(MhVerdict::NoCertificate { n_max })
}

/// Checks the distinct-blocks consequence of a minimal local period in two
/// dimensions: with `v` a minimal-norm local period of `g` inside `B(x, n)`,
/// the `||v||^2` blocks of size `2n + ||v||` anchored at `x - n*1 - z`,
/// `z in [[0, ||v||-1]]^2`, are pairwise distinct.
///
/// Both preconditions (periodicity of `v`, and no strictly smaller period)
/// are re-verified; their failure is reported distinctly from geometry
/// errors. Under verified preconditions the result is always `true`.
pub fn distinct_block_cert(
    g: &Grid,
    x: &[i64],
    n: usize,
    v: &PeriodVector,
) -> Result<bool, PeriodError> {
    if g.dim() != 2 {
        return Err(PeriodError::Dimension {
            needed: 2,
            got: g.dim(),
        });
    }
    let norm = v.norm();
    if norm as usize >= n {
        return Err(PeriodError::Parameters(format!(
            "||v|| = {norm} must be below n = {n}"
        )));
    }
    let ball = ball_window(x, n as i64);
    if !g.window().contains(&[ball.lo(0), ball.lo(1)])
        || !g.window().contains(&[ball.hi(0), ball.hi(1)])
    {
        return Err(PeriodError::Geometry);
    }
    if !v_periodic_on_grid(g, v.as_slice(), x, n as i64) {
        return Err(PeriodError::Precondition(format!(
            "{:?} is not a local period inside the {n}-neighborhood",
            v.0
        )));
    }
    // Minimality: exhaust all nonzero vectors of strictly smaller norm.
    for wy in -(norm - 1)..=(norm - 1) {
        for wx in -(norm - 1)..=(norm - 1) {
            if (wx, wy) == (0, 0) {
                continue;
            }
            if v_periodic_on_grid(g, &[wx, wy], x, n as i64) {
                return Err(PeriodError::Precondition(format!(
                    "{:?} is not minimal: [{wx}, {wy}] is also a local period",
                    v.0
                )));
            }
        }
    }
    let side = 2 * n + norm as usize;
    let mut blocks = Vec::new();
    for zx in 0..norm {
        for zy in 0..norm {
            let anchor = [x[0] - n as i64 - zx, x[1] - n as i64 - zy];
            blocks.push(block_at(g, &anchor, side).map_err(|_| PeriodError::Geometry)?);
        }
    }
    for i in 0..blocks.len() {
        for j in i + 1..blocks.len() {
            if blocks[i] == blocks[j] {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// All vectors `v` with `1 <= ||v|| <= max_norm` (sign-canonicalized) such
/// that membership agrees at every in-window pair `(p, p + v)`.
pub fn global_period_search(g: &Grid, max_norm: i64) -> Vec<PeriodVector> {
    assert!(max_norm >= 1);
    let dim = g.dim();
    let mut found = Vec::new();
    let candidates = Window::new(vec![(-max_norm, max_norm); dim]).expect("max_norm >= 1");
    'next: for v in candidates.points() {
        match v.iter().find(|&&c| c != 0) {
            None => continue,
            Some(&first) if first < 0 => continue, // keep one of v, -v
            _ => {}
        }
        let w = g.window();
        for p in w.points() {
            let q: Vec<i64> = p.iter().zip(&v).map(|(&a, &d)| a + d).collect();
            if !w.contains(&q) {
                continue;
            }
            if g.get(&p) != g.get(&q) {
                continue 'next;
            }
        }
        found.push(PeriodVector(v));
    }
    found.sort_by_key(|v| (v.norm(), v.0.clone()));
    found
}

/// Estimates the repetitivity radius `M(t)`: the smallest `R` such that
/// every in-window ball of radius `R` contains every `t`-patch seen in the
/// window (patches compared up to translation). `None` when no such `R`
/// fits in the window.
pub fn repetitivity_probe(
    s: &PointSet,
    t: i64,
    w: &Window,
) -> Result<Option<i64>, PeriodError> {
    assert!(t >= 1);
    assert_eq!(w.dim(), s.dim());
    let grid = rasterize(s, w)?;
    let dim = s.dim();
    let side = (2 * t - 1) as usize;

    // Patch ids over all centers whose t-ball fits in the window.
    let center_bounds: Vec<(i64, i64)> = w
        .bounds()
        .iter()
        .map(|&(lo, hi)| (lo + t - 1, hi - t + 1))
        .collect();
    if center_bounds.iter().any(|&(lo, hi)| lo > hi) {
        return Ok(None);
    }
    let centers = Window::new(center_bounds).expect("validated");
    let mut patch_ids: HashMap<crate::complexity::Block, usize> = HashMap::new();
    let mut id_of_center: HashMap<Vec<i64>, usize> = HashMap::new();
    for c in centers.points() {
        let anchor: Vec<i64> = c.iter().map(|&a| a - (t - 1)).collect();
        let patch = block_at(&grid, &anchor, side).map_err(|_| PeriodError::Geometry)?;
        let next_id = patch_ids.len();
        let id = *patch_ids.entry(patch).or_insert(next_id);
        id_of_center.insert(c, id);
    }
    let patch_count = patch_ids.len();
    if patch_count == 0 {
        return Ok(None);
    }

    // Candidate radii stop at a quarter of the window so that balls far from
    // the center remain available; otherwise every surviving ball hugs the
    // already-seen region and the answer is vacuous.
    let max_radius = w
        .bounds()
        .iter()
        .map(|&(lo, hi)| (hi - lo + 1) / 4)
        .min()
        .unwrap_or(0);
    'radius: for r in t..=max_radius {
        // Balls B(y, r) fully inside the window.
        let ys: Vec<(i64, i64)> = w
            .bounds()
            .iter()
            .map(|&(lo, hi)| (lo + r - 1, hi - r + 1))
            .collect();
        if ys.iter().any(|&(lo, hi)| lo > hi) {
            continue;
        }
        let ball_centers = Window::new(ys).expect("validated");
        for y in ball_centers.points() {
            // Patches inside B(y, r): centers within r - t of y.
            let mut seen = vec![false; patch_count];
            let mut seen_count = 0usize;
            let reach = r - t;
            let nearby = Window::new(y.iter().map(|&c| (c - reach, c + reach)).collect());
            let Ok(nearby) = nearby else { continue 'radius };
            for z in nearby.points() {
                if let Some(&id) = id_of_center.get(&z) {
                    if !seen[id] {
                        seen[id] = true;
                        seen_count += 1;
                    }
                }
            }
            if seen_count < patch_count {
                continue 'radius;
            }
        }
        let _ = dim;
        return Ok(Some(r));
    }
    Ok(None)
}
