//! Empirical definability classification from recurrent-block growth.
//!
//! A set definable in integer linear arithmetic has recurrent block
//! complexity in `O(n^(d-1))` and all of its sections definable, recursively
//! down to dimension one. The classifier measures stabilized recurrent
//! counts, fits a growth exponent per level, and recurses into sampled
//! sections. Its verdicts are evidence, not proof: finite windows cannot
//! decide definability.

use super::PeriodError;
use crate::complexity::{growth_fit, stabilized_r, ComplexityTable, StabilizeOptions, TableRow};
use crate::geom::Window;
use crate::qe::QeConfig;
use crate::set::PointSet;
use num::ToPrimitive;
use serde::Serialize;

/// Budget and sampling knobs for the classifier.
#[derive(Clone, Debug)]
pub struct ClassifyBudget {
    /// Block sizes to measure, inclusive.
    pub n_range: (usize, usize),
    /// Cap on window doubling for default frames.
    pub max_radius: i64,
    /// Stabilization frame for the top level: the maximum window; growth
    /// starts at quarter scale and axes too small to halve stay fixed.
    pub frame: Option<Window>,
    /// Total rasterized-cell budget; exhaustion downgrades to inconclusive.
    pub cell_budget: u64,
    /// Reserved for randomized sampling extensions; fixed grids are used
    /// for section constants, so the default classifier is deterministic.
    pub seed: u64,
}

impl Default for ClassifyBudget {
    fn default() -> Self {
        ClassifyBudget {
            n_range: (2, 9),
            max_radius: 4096,
            frame: None,
            cell_budget: 400_000_000,
            seed: 0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Verdict {
    #[serde(rename = "consistent-with-definable")]
    ConsistentWithDefinable,
    #[serde(rename = "not-definable-evidence")]
    NotDefinableEvidence,
    #[serde(rename = "inconclusive")]
    Inconclusive,
}

/// Concrete witness behind a not-definable verdict.
#[derive(Clone, Debug, Serialize)]
pub struct Witness {
    /// Which level produced the witness, e.g. `top` or `axis 2, c = 0`.
    pub path: String,
    pub dim: usize,
    pub exponent: f64,
    pub residual: f64,
    /// The growth threshold `d - 1` the exponent was measured against.
    pub threshold: f64,
}

/// Growth measurement at one recursion level.
#[derive(Clone, Debug, Serialize)]
pub struct LevelReport {
    pub path: String,
    pub dim: usize,
    pub exponent: Option<f64>,
    pub residual: Option<f64>,
    pub stabilized_rows: usize,
    pub total_rows: usize,
    /// True when the level's growth significantly exceeds `O(n^(d-1))`.
    pub exceeds: bool,
    /// Section constants for procedural sets are a heuristic sample.
    pub heuristic_sampling: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct DefinabilityReport {
    pub verdict: Verdict,
    pub witness: Option<Witness>,
    pub levels: Vec<LevelReport>,
    pub budget_exhausted: bool,
}

impl DefinabilityReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Exponent margin above `d - 1` that counts as significant growth, and the
/// fit quality and evidence requirements that gate it.
const EXPONENT_MARGIN: f64 = 0.5;
const RESIDUAL_CAP: f64 = 0.1;
const MIN_STABILIZED_POINTS: usize = 5;

struct Run<'a> {
    budget: &'a ClassifyBudget,
    cells_left: i128,
    levels: Vec<LevelReport>,
    exhausted: bool,
}

/// Classifies a set by recurrent-block growth at the top level and in
/// sampled sections, descending at most `depth` section levels.
pub fn classify_definability(
    s: &PointSet,
    depth: usize,
    budget: &ClassifyBudget,
) -> Result<DefinabilityReport, PeriodError> {
    let mut run = Run {
        budget,
        cells_left: budget.cell_budget as i128,
        levels: Vec::new(),
        exhausted: false,
    };
    let witness = classify_level(s, "top", depth, budget.frame.as_ref(), &mut run)?;
    let verdict = if let Some(w) = &witness {
        let _ = w;
        Verdict::NotDefinableEvidence
    } else if run.exhausted
        || run
            .levels
            .iter()
            .any(|l| l.stabilized_rows < MIN_STABILIZED_POINTS || l.exponent.is_none())
    {
        Verdict::Inconclusive
    } else {
        Verdict::ConsistentWithDefinable
    };
    Ok(DefinabilityReport {
        verdict,
        witness,
        levels: run.levels,
        budget_exhausted: run.exhausted,
    })
}

fn classify_level(
    s: &PointSet,
    path: &str,
    depth: usize,
    frame: Option<&Window>,
    run: &mut Run<'_>,
) -> Result<Option<Witness>, PeriodError> {
    let dim = s.dim();
    let threshold = (dim as f64) - 1.0;
    let (n_lo, mut n_hi) = run.budget.n_range;
    if let Some(f) = frame {
        // Axes too small to grow pin the usable block sizes: near the strip
        // height the anchors lose freedom and counts stop being comparable.
        for &e in &f.extents() {
            if (e as i64) <= 16 * n_hi as i64 {
                n_hi = n_hi.min(e.saturating_sub(3));
            }
        }
    }

    let mut table = ComplexityTable::default();
    for n in n_lo..=n_hi {
        if run.cells_left <= 0 {
            run.exhausted = true;
            break;
        }
        let opts = stabilize_options(n, frame, run.budget.max_radius);
        let stab = stabilized_r(s, n, &opts)?;
        // Geometric window series: final window dominates; double it as the
        // cost estimate for the whole doubling run.
        run.cells_left -= 2 * stab.window.point_count() as i128;
        table.push(TableRow {
            n,
            count: stab.count,
            stabilized: Some(stab.stabilized),
            window: stab.window,
            escape: Some(stab.escape),
        });
    }

    let stabilized_rows = table
        .rows
        .iter()
        .filter(|r| r.stabilized == Some(true))
        .count();
    let total_rows = table.rows.len();
    let fit = growth_fit(&table).ok();
    let (exponent, residual) = match fit {
        Some((e, r)) => (Some(e), Some(r)),
        None => (None, None),
    };
    let exceeds = match (exponent, residual) {
        (Some(e), Some(r)) => {
            stabilized_rows >= MIN_STABILIZED_POINTS
                && e >= threshold + EXPONENT_MARGIN
                && r <= RESIDUAL_CAP
        }
        _ => false,
    };
    let heuristic_sampling = s.qfnf().is_none();
    run.levels.push(LevelReport {
        path: path.to_string(),
        dim,
        exponent,
        residual,
        stabilized_rows,
        total_rows,
        exceeds,
        heuristic_sampling,
    });

    if exceeds {
        return Ok(Some(Witness {
            path: path.to_string(),
            dim,
            exponent: exponent.unwrap(),
            residual: residual.unwrap(),
            threshold,
        }));
    }

    if dim < 2 || depth == 0 {
        return Ok(None);
    }

    let config = QeConfig::default();
    let constants = section_constants(s, frame);
    for axis in 1..=dim {
        for &c in &constants[axis - 1] {
            if run.cells_left <= 0 {
                run.exhausted = true;
                return Ok(None);
            }
            let section = s.section(axis, c, &config).map_err(|e| {
                PeriodError::Parameters(format!("section axis {axis} at {c}: {e}"))
            })?;
            let sub_path = format!("{path} / axis {axis}, c = {c}");
            if let Some(w) = classify_level(&section, &sub_path, depth - 1, None, run)? {
                return Ok(Some(w));
            }
        }
    }
    Ok(None)
}

/// Section constants per axis: `[-2J, 2J]` plus window extremes for
/// symbolic sets, a fixed `[-8, 8]` sample for procedural ones.
fn section_constants(s: &PointSet, frame: Option<&Window>) -> Vec<Vec<i64>> {
    let dim = s.dim();
    let mut out = Vec::with_capacity(dim);
    for axis in 0..dim {
        let mut cs: Vec<i64> = match s.qfnf() {
            Some(q) => {
                let j = q.modulus().to_i64().unwrap_or(8).clamp(1, 16);
                (-2 * j..=2 * j).collect()
            }
            None => (-8..=8).collect(),
        };
        if let Some(w) = frame {
            cs.push(w.lo(axis));
            cs.push(w.hi(axis));
        }
        cs.sort_unstable();
        cs.dedup();
        out.push(cs);
    }
    out
}

/// Builds stabilization options for one level. With a frame, growth starts
/// at quarter scale on axes large enough to matter and is capped at the
/// frame; otherwise the default symmetric doubling is used.
fn stabilize_options(n: usize, frame: Option<&Window>, max_radius: i64) -> StabilizeOptions {
    match frame {
        None => StabilizeOptions {
            initial: None,
            grow: None,
            max_radius,
        },
        Some(f) => {
            let grow: Vec<bool> = f
                .extents()
                .iter()
                .map(|&e| e as i64 > 16 * n as i64)
                .collect();
            let bounds: Vec<(i64, i64)> = f
                .bounds()
                .iter()
                .zip(&grow)
                .map(|(&(lo, hi), &g)| if g { (lo / 4, hi / 4) } else { (lo, hi) })
                .collect();
            let initial = Window::new(bounds).expect("frame scaling keeps axes nonempty");
            let cap = f
                .bounds()
                .iter()
                .zip(&grow)
                .filter(|(_, &g)| g)
                .map(|(&(lo, hi), _)| lo.abs().max(hi.abs()))
                .max()
                .unwrap_or(max_radius);
            StabilizeOptions {
                initial: Some(initial),
                grow: Some(grow),
                max_radius: cap,
            }
        }
    }
}
