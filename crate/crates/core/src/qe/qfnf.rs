use super::linexpr::LinExpr;
use super::nnf::{dnf, lcm_big, Ir, RawCell};
use super::{QeConfig, QeError};
use crate::formula::VarName;
use crate::geom::Window;
use num::bigint::BigInt;
use num::{Integer, One, Signed, ToPrimitive, Zero};
use std::fmt::Write as _;

/// `u . x >= c`, with `u` nonzero and gcd-reduced jointly with `c`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LinearInequality {
    pub(crate) coeffs: Vec<BigInt>,
    pub(crate) bound: BigInt,
}

impl LinearInequality {
    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn bound(&self) -> &BigInt {
        &self.bound
    }
}

/// `u . x = residue (mod J)` where `J` lives on the enclosing [`Qfnf`].
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Congruence {
    pub(crate) coeffs: Vec<BigInt>,
    pub(crate) residue: BigInt,
}

impl Congruence {
    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn residue(&self) -> &BigInt {
        &self.residue
    }
}

/// One conjunctive cell of the normal form.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Cell {
    pub(crate) inequalities: Vec<LinearInequality>,
    pub(crate) congruences: Vec<Congruence>,
}

impl Cell {
    pub fn inequalities(&self) -> &[LinearInequality] {
        &self.inequalities
    }

    pub fn congruences(&self) -> &[Congruence] {
        &self.congruences
    }

    pub fn is_unconstrained(&self) -> bool {
        self.inequalities.is_empty() && self.congruences.is_empty()
    }

    fn holds_at(&self, p: &[i64], modulus: &BigInt) -> bool {
        for ineq in &self.inequalities {
            let mut dot = BigInt::zero();
            for (c, &x) in ineq.coeffs.iter().zip(p) {
                dot += c * x;
            }
            if dot < ineq.bound {
                return false;
            }
        }
        for cong in &self.congruences {
            let mut dot = BigInt::zero();
            for (c, &x) in cong.coeffs.iter().zip(p) {
                dot += c * x;
            }
            if dot.mod_floor(modulus) != cong.residue {
                return false;
            }
        }
        true
    }
}

/// Integer input form for hand-written cells (see [`Qfnf::from_cells`]).
#[derive(Clone, Debug, Default)]
pub struct CellSpec {
    /// `(coeffs, bound)` meaning `coeffs . x >= bound`.
    pub inequalities: Vec<(Vec<i64>, i64)>,
    /// `(coeffs, modulus, residue)` meaning `coeffs . x = residue (mod modulus)`.
    pub congruences: Vec<(Vec<i64>, i64, i64)>,
}

/// Quantifier-free normal form: a union of cells sharing one modulus.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Qfnf {
    dim: usize,
    vars: Vec<String>,
    modulus: BigInt,
    cells: Vec<Cell>,
}

impl Qfnf {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn modulus(&self) -> &BigInt {
        &self.modulus
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    /// Builds a normal form from explicit cells, normalizing and validating
    /// all invariants (shared modulus, reduced atoms, feasible cells).
    pub fn from_cells(
        vars: &[&str],
        cells: Vec<CellSpec>,
        config: &QeConfig,
    ) -> Result<Qfnf, QeError> {
        let raw: Vec<RawCell> = cells
            .iter()
            .map(|spec| {
                let mut rc = RawCell::default();
                for (coeffs, bound) in &spec.inequalities {
                    rc.geqs.push(spec_expr(vars, coeffs, -bound));
                }
                for (coeffs, modulus, residue) in &spec.congruences {
                    rc.congs
                        .push((spec_expr(vars, coeffs, -residue), BigInt::from(*modulus)));
                }
                rc
            })
            .collect();
        Qfnf::from_raw_cells(vars, raw, config, "explicit cell list")
    }

    /// The set containing every point of `Z^d`.
    pub fn everything(vars: &[&str]) -> Qfnf {
        Qfnf {
            dim: vars.len(),
            vars: vars.iter().map(|s| s.to_string()).collect(),
            modulus: BigInt::one(),
            cells: vec![Cell {
                inequalities: vec![],
                congruences: vec![],
            }],
        }
    }

    /// The empty subset of `Z^d`.
    pub fn nothing(vars: &[&str]) -> Qfnf {
        Qfnf {
            dim: vars.len(),
            vars: vars.iter().map(|s| s.to_string()).collect(),
            modulus: BigInt::one(),
            cells: vec![],
        }
    }

    pub(crate) fn from_raw_cells(
        vars: &[&str],
        raw: Vec<RawCell>,
        config: &QeConfig,
        context: &str,
    ) -> Result<Qfnf, QeError> {
        let dim = vars.len();
        let limit_err = |what: String| QeError::ResourceLimit {
            limit: what,
            subformula: context.to_string(),
        };

        // Expand negated congruences into residue alternatives.
        let mut expanded: Vec<(Vec<(Vec<BigInt>, BigInt)>, Vec<(Vec<BigInt>, BigInt, BigInt)>)> =
            Vec::new();
        for cell in &raw {
            let base_ineqs: Vec<(Vec<BigInt>, BigInt)> = cell
                .geqs
                .iter()
                .map(|e| {
                    let (u, k) = to_vector(vars, e);
                    (u, -k) // u.x + k >= 0  <=>  u.x >= -k
                })
                .collect();
            let base_congs: Vec<(Vec<BigInt>, BigInt, BigInt)> = cell
                .congs
                .iter()
                .map(|(e, m)| {
                    let (u, k) = to_vector(vars, e);
                    let residue = (-k).mod_floor(m);
                    (u, m.clone(), residue)
                })
                .collect();
            // Each negated congruence multiplies the cell by its nonzero
            // residue alternatives.
            let mut variants: Vec<Vec<(Vec<BigInt>, BigInt, BigInt)>> = vec![base_congs];
            for (e, m) in &cell.notcongs {
                let (u, k) = to_vector(vars, e);
                let forbidden = (-k).mod_floor(m);
                let m_u64 = m
                    .to_u64()
                    .filter(|&v| v <= config.max_cells as u64)
                    .ok_or_else(|| limit_err(format!("negated congruence modulus {m}")))?;
                let mut next = Vec::new();
                for variant in &variants {
                    for r in 0..m_u64 {
                        let r = BigInt::from(r);
                        if r == forbidden {
                            continue;
                        }
                        let mut with = variant.clone();
                        with.push((u.clone(), m.clone(), r));
                        next.push(with);
                        if next.len() > config.max_cells {
                            return Err(limit_err("cell count".to_string()));
                        }
                    }
                }
                variants = next;
            }
            for congs in variants {
                expanded.push((base_ineqs.clone(), congs));
                if expanded.len() > config.max_cells {
                    return Err(limit_err("cell count".to_string()));
                }
            }
        }

        // Per-cell normalization.
        let mut normalized: Vec<(Vec<(Vec<BigInt>, BigInt)>, Vec<(Vec<BigInt>, BigInt, BigInt)>)> =
            Vec::new();
        'cells: for (ineqs, congs) in expanded {
            let mut out_ineqs: Vec<(Vec<BigInt>, BigInt)> = Vec::new();
            for (u, c) in ineqs {
                if u.iter().all(|x| x.is_zero()) {
                    if c > BigInt::zero() {
                        continue 'cells; // infeasible
                    }
                    continue; // trivially true
                }
                let g = vector_gcd(&u);
                let u: Vec<BigInt> = u.iter().map(|x| x / &g).collect();
                let c = c.div_ceil(&g);
                out_ineqs.push((u, c));
            }
            // Keep only the strongest bound per direction.
            out_ineqs.sort();
            out_ineqs.dedup();
            let mut strongest: Vec<(Vec<BigInt>, BigInt)> = Vec::new();
            for (u, c) in out_ineqs {
                match strongest.last_mut() {
                    Some((pu, pc)) if *pu == u => {
                        if c > *pc {
                            *pc = c;
                        }
                    }
                    _ => strongest.push((u, c)),
                }
            }

            let mut out_congs: Vec<(Vec<BigInt>, BigInt, BigInt)> = Vec::new();
            for (u, m, e) in congs {
                if u.iter().all(|x| x.is_zero()) {
                    if !e.mod_floor(&m).is_zero() {
                        continue 'cells;
                    }
                    continue;
                }
                let g = vector_gcd(&u).gcd(&m);
                if !e.mod_floor(&g).is_zero() {
                    continue 'cells; // residue outside the coefficient lattice
                }
                let u: Vec<BigInt> = u.iter().map(|x| x / &g).collect();
                let m = &m / &g;
                let e = &e / &g;
                if m.is_one() {
                    continue; // everything is congruent mod 1
                }
                let u: Vec<BigInt> = u.iter().map(|x| x.mod_floor(&m)).collect();
                if u.iter().all(|x| x.is_zero()) {
                    if !e.mod_floor(&m).is_zero() {
                        continue 'cells;
                    }
                    continue;
                }
                out_congs.push((u, m.clone(), e.mod_floor(&m)));
            }
            out_congs.sort();
            out_congs.dedup();

            if !fm_feasible(&strongest, dim) {
                continue 'cells;
            }
            normalized.push((strongest, out_congs));
        }

        // Fold all congruences into one shared modulus.
        let mut modulus = BigInt::one();
        for (_, congs) in &normalized {
            for (_, m, _) in congs {
                modulus = lcm_big(&modulus, m);
            }
        }
        let mut cells: Vec<Cell> = normalized
            .into_iter()
            .map(|(ineqs, congs)| Cell {
                inequalities: ineqs
                    .into_iter()
                    .map(|(coeffs, bound)| LinearInequality { coeffs, bound })
                    .collect(),
                congruences: congs
                    .into_iter()
                    .map(|(u, m, e)| {
                        let k = &modulus / &m;
                        let coeffs: Vec<BigInt> =
                            u.iter().map(|x| (x * &k).mod_floor(&modulus)).collect();
                        Congruence {
                            coeffs,
                            residue: (&e * &k).mod_floor(&modulus),
                        }
                    })
                    .collect(),
            })
            .collect();
        for cell in &mut cells {
            cell.inequalities.sort();
            cell.congruences.sort();
            cell.congruences.dedup();
        }

        // An unconstrained cell absorbs everything else.
        if cells.iter().any(Cell::is_unconstrained) {
            cells = vec![Cell {
                inequalities: vec![],
                congruences: vec![],
            }];
            modulus = BigInt::one();
        }
        cells.sort();
        cells.dedup();

        if cells.len() > config.max_cells {
            return Err(limit_err("cell count".to_string()));
        }
        let bits: u64 = cells
            .iter()
            .map(|c| {
                c.inequalities
                    .iter()
                    .map(|i| {
                        i.coeffs.iter().map(|x| x.bits()).sum::<u64>() + i.bound.bits()
                    })
                    .sum::<u64>()
                    + c.congruences
                        .iter()
                        .map(|g| {
                            g.coeffs.iter().map(|x| x.bits()).sum::<u64>() + g.residue.bits()
                        })
                        .sum::<u64>()
            })
            .sum();
        if bits > config.coeff_bit_budget {
            return Err(limit_err(format!("{bits} coefficient bits")));
        }

        // If no congruences survived, the modulus collapses to 1.
        if cells.iter().all(|c| c.congruences.is_empty()) {
            modulus = BigInt::one();
        }

        Ok(Qfnf {
            dim,
            vars: vars.iter().map(|s| s.to_string()).collect(),
            modulus,
            cells,
        })
    }

    /// True iff some cell's constraints all hold at `p`.
    pub fn evaluate(&self, p: &[i64]) -> Result<bool, QeError> {
        if p.len() != self.dim {
            return Err(QeError::PointDimension {
                got: p.len(),
                dim: self.dim,
            });
        }
        Ok(self.cells.iter().any(|c| c.holds_at(p, &self.modulus)))
    }

    /// Pointwise complement.
    pub fn complement(&self, config: &QeConfig) -> Result<Qfnf, QeError> {
        let negated: Vec<Ir> = self
            .cells
            .iter()
            .map(|cell| {
                Ir::or(cell_to_ir_atoms(cell, &self.vars, &self.modulus)
                    .into_iter()
                    .map(|a| a.dual())
                    .collect())
            })
            .collect();
        let ir = Ir::and(negated);
        let vars: Vec<&str> = self.vars.iter().map(|s| s.as_str()).collect();
        let raw = dnf(&ir, config, "complement")?;
        Qfnf::from_raw_cells(&vars, raw, config, "complement")
    }

    /// Pointwise union.
    pub fn union(&self, other: &Qfnf, config: &QeConfig) -> Result<Qfnf, QeError> {
        self.check_compatible(other)?;
        let mut raw = self.to_raw_cells();
        raw.extend(other.to_raw_cells());
        let vars: Vec<&str> = self.vars.iter().map(|s| s.as_str()).collect();
        Qfnf::from_raw_cells(&vars, raw, config, "union")
    }

    /// Pointwise intersection.
    pub fn intersect(&self, other: &Qfnf, config: &QeConfig) -> Result<Qfnf, QeError> {
        self.check_compatible(other)?;
        let a = self.to_raw_cells();
        let b = other.to_raw_cells();
        let mut raw = Vec::new();
        for x in &a {
            for y in &b {
                let mut merged = x.clone();
                merged.geqs.extend(y.geqs.iter().cloned());
                merged.congs.extend(y.congs.iter().cloned());
                if raw.len() >= config.max_cells {
                    return Err(QeError::ResourceLimit {
                        limit: "cell count".into(),
                        subformula: "intersection".into(),
                    });
                }
                raw.push(merged);
            }
        }
        let vars: Vec<&str> = self.vars.iter().map(|s| s.as_str()).collect();
        Qfnf::from_raw_cells(&vars, raw, config, "intersection")
    }

    /// The translated set `{x + t : x in self}`.
    pub fn translate(&self, t: &[i64], config: &QeConfig) -> Result<Qfnf, QeError> {
        if t.len() != self.dim {
            return Err(QeError::VectorDimension);
        }
        let mut raw = Vec::new();
        for cell in &self.cells {
            let mut rc = RawCell::default();
            for ineq in &cell.inequalities {
                // u.(x - t) >= c  <=>  u.x >= c + u.t
                let shift: BigInt = ineq.coeffs.iter().zip(t).map(|(c, &v)| c * v).sum();
                rc.geqs.push(vec_expr(
                    &self.vars,
                    &ineq.coeffs,
                    -(ineq.bound.clone() + shift),
                ));
            }
            for cong in &cell.congruences {
                let shift: BigInt = cong.coeffs.iter().zip(t).map(|(c, &v)| c * v).sum();
                let residue = (cong.residue.clone() + shift).mod_floor(&self.modulus);
                rc.congs.push((
                    vec_expr(&self.vars, &cong.coeffs, -residue),
                    self.modulus.clone(),
                ));
            }
            raw.push(rc);
        }
        let vars: Vec<&str> = self.vars.iter().map(|s| s.as_str()).collect();
        Qfnf::from_raw_cells(&vars, raw, config, "translation")
    }

    /// The section with coordinate `axis` (1-based) fixed to `c`.
    pub fn section(&self, axis: usize, c: i64, config: &QeConfig) -> Result<Qfnf, QeError> {
        if axis < 1 || axis > self.dim {
            return Err(QeError::AxisOutOfRange {
                axis,
                dim: self.dim,
            });
        }
        let keep: Vec<usize> = (0..self.dim).filter(|&i| i != axis - 1).collect();
        let vars: Vec<&str> = keep.iter().map(|&i| self.vars[i].as_str()).collect();
        let mut raw = Vec::new();
        for cell in &self.cells {
            let mut rc = RawCell::default();
            for ineq in &cell.inequalities {
                let fixed = &ineq.coeffs[axis - 1] * c;
                let u: Vec<BigInt> = keep.iter().map(|&i| ineq.coeffs[i].clone()).collect();
                rc.geqs
                    .push(vec_expr(&vars_owned(&vars), &u, -(ineq.bound.clone() - fixed)));
            }
            for cong in &cell.congruences {
                let fixed = &cong.coeffs[axis - 1] * c;
                let u: Vec<BigInt> = keep.iter().map(|&i| cong.coeffs[i].clone()).collect();
                let residue = (cong.residue.clone() - fixed).mod_floor(&self.modulus);
                rc.congs.push((
                    vec_expr(&vars_owned(&vars), &u, -residue),
                    self.modulus.clone(),
                ));
            }
            raw.push(rc);
        }
        Qfnf::from_raw_cells(&vars, raw, config, "section")
    }

    /// Points of the set whose translate by `v` leaves the set.
    pub fn border(&self, v: &[i64], config: &QeConfig) -> Result<Qfnf, QeError> {
        if v.len() != self.dim {
            return Err(QeError::VectorDimension);
        }
        if v.iter().all(|&c| c == 0) {
            return Err(QeError::ZeroVector);
        }
        let minus_v: Vec<i64> = v.iter().map(|&c| -c).collect();
        let outside_after_v = self.complement(config)?.translate(&minus_v, config)?;
        self.intersect(&outside_after_v, config)
    }

    /// Exhaustive pointwise comparison over a window.
    pub fn equivalent_on_window(&self, other: &Qfnf, window: &Window) -> Result<bool, QeError> {
        Ok(self.first_disagreement(other, window)?.is_none())
    }

    /// Exhaustive pointwise comparison over a window; returns the first
    /// disagreeing point in lexicographic order, or `None` if equivalent.
    pub fn first_disagreement(
        &self,
        other: &Qfnf,
        window: &Window,
    ) -> Result<Option<Vec<i64>>, QeError> {
        self.check_compatible(other)?;
        if window.dim() != self.dim {
            return Err(QeError::DimensionMismatch(window.dim(), self.dim));
        }
        let a = CompiledQfnf::new(self);
        let b = CompiledQfnf::new(other);
        for p in window.points() {
            if a.evaluate(&p) != b.evaluate(&p) {
                return Ok(Some(p));
            }
        }
        Ok(None)
    }

    /// Printable form: a header line then one line per cell.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "dim={} vars={} J={}",
            self.dim,
            self.vars.join(","),
            self.modulus
        );
        for cell in &self.cells {
            let mut atoms: Vec<String> = Vec::new();
            for ineq in &cell.inequalities {
                atoms.push(format!(
                    "{}>={}",
                    coeff_row(&ineq.coeffs, &self.vars),
                    ineq.bound
                ));
            }
            for cong in &cell.congruences {
                atoms.push(format!(
                    "{}={} (mod {})",
                    coeff_row(&cong.coeffs, &self.vars),
                    cong.residue,
                    self.modulus
                ));
            }
            if atoms.is_empty() {
                let _ = writeln!(out, "cell: true");
            } else {
                let _ = writeln!(out, "cell: {}", atoms.join(" ; "));
            }
        }
        out
    }

    /// Largest sum of absolute coefficients over any atom (0 if cell-free).
    pub fn max_coeff_sum(&self) -> BigInt {
        let mut best = BigInt::zero();
        for cell in &self.cells {
            for i in &cell.inequalities {
                let s: BigInt = i.coeffs.iter().map(|c| c.abs()).sum();
                best = best.max(s);
            }
            for g in &cell.congruences {
                let s: BigInt = g.coeffs.iter().map(|c| c.abs()).sum();
                best = best.max(s);
            }
        }
        best
    }

    /// Largest absolute bound or residue over any atom.
    pub fn max_constant(&self) -> BigInt {
        let mut best = BigInt::zero();
        for cell in &self.cells {
            for i in &cell.inequalities {
                best = best.max(i.bound.abs());
            }
            for g in &cell.congruences {
                best = best.max(g.residue.abs());
            }
        }
        best
    }

    fn check_compatible(&self, other: &Qfnf) -> Result<(), QeError> {
        if self.dim != other.dim {
            return Err(QeError::DimensionMismatch(self.dim, other.dim));
        }
        if self.vars != other.vars {
            return Err(QeError::VariableOrderMismatch);
        }
        Ok(())
    }

    fn to_raw_cells(&self) -> Vec<RawCell> {
        self.cells
            .iter()
            .map(|cell| {
                let mut rc = RawCell::default();
                for ineq in &cell.inequalities {
                    rc.geqs
                        .push(vec_expr(&self.vars, &ineq.coeffs, -ineq.bound.clone()));
                }
                for cong in &cell.congruences {
                    rc.congs.push((
                        vec_expr(&self.vars, &cong.coeffs, -cong.residue.clone()),
                        self.modulus.clone(),
                    ));
                }
                rc
            })
            .collect()
    }
}

fn vars_owned(vars: &[&str]) -> Vec<String> {
    vars.iter().map(|s| s.to_string()).collect()
}

fn cell_to_ir_atoms(cell: &Cell, vars: &[String], modulus: &BigInt) -> Vec<Ir> {
    let mut atoms = Vec::new();
    for ineq in &cell.inequalities {
        atoms.push(Ir::Geq(vec_expr(vars, &ineq.coeffs, -ineq.bound.clone())));
    }
    for cong in &cell.congruences {
        atoms.push(Ir::Cong(
            vec_expr(vars, &cong.coeffs, -cong.residue.clone()),
            modulus.clone(),
        ));
    }
    atoms
}

fn spec_expr(vars: &[&str], coeffs: &[i64], constant: i64) -> LinExpr {
    let mut e = LinExpr::constant(constant);
    for (name, &c) in vars.iter().zip(coeffs) {
        if c != 0 {
            e.coeffs.insert(VarName::source(name), BigInt::from(c));
        }
    }
    e
}

fn vec_expr(vars: &[String], coeffs: &[BigInt], constant: BigInt) -> LinExpr {
    let mut e = LinExpr::constant(constant);
    for (name, c) in vars.iter().zip(coeffs) {
        if !c.is_zero() {
            e.coeffs.insert(VarName::source(name), c.clone());
        }
    }
    e
}

/// Projects a linear expression onto the variable order, returning the
/// coefficient vector and the constant.
fn to_vector(vars: &[&str], e: &LinExpr) -> (Vec<BigInt>, BigInt) {
    let mut u = vec![BigInt::zero(); vars.len()];
    for (v, c) in &e.coeffs {
        let idx = vars
            .iter()
            .position(|name| *name == v.base && v.tag == 0)
            .unwrap_or_else(|| panic!("unexpected variable {v:?} after elimination"));
        u[idx] = c.clone();
    }
    (u, e.constant.clone())
}

fn vector_gcd(u: &[BigInt]) -> BigInt {
    let mut g = BigInt::zero();
    for c in u {
        g = g.gcd(c);
    }
    if g.is_zero() {
        BigInt::one()
    } else {
        g
    }
}

/// Rational feasibility of a conjunction of `u.x >= c` rows, by
/// Fourier-Motzkin elimination. Returns `true` when in doubt (row cap).
fn fm_feasible(rows: &[(Vec<BigInt>, BigInt)], dim: usize) -> bool {
    const ROW_CAP: usize = 512;
    let mut rows: Vec<(Vec<BigInt>, BigInt)> = rows.to_vec();
    for axis in 0..dim {
        let mut lower = Vec::new(); // coefficient > 0
        let mut upper = Vec::new(); // coefficient < 0
        let mut rest = Vec::new();
        for (u, c) in rows {
            match u[axis].sign() {
                num::bigint::Sign::Plus => lower.push((u, c)),
                num::bigint::Sign::Minus => upper.push((u, c)),
                num::bigint::Sign::NoSign => rest.push((u, c)),
            }
        }
        if lower.len() * upper.len() + rest.len() > ROW_CAP {
            return true;
        }
        for (lu, lc) in &lower {
            for (uu, uc) in &upper {
                let a = lu[axis].clone(); // > 0
                let b = -uu[axis].clone(); // > 0
                let mut u: Vec<BigInt> = lu
                    .iter()
                    .zip(uu)
                    .map(|(x, y)| x * &b + y * &a)
                    .collect();
                let mut c = lc * &b + uc * &a;
                let g = vector_gcd(&u);
                if !g.is_one() {
                    u = u.iter().map(|x| x / &g).collect();
                    c = c.div_ceil(&g);
                }
                if u.iter().all(|x| x.is_zero()) {
                    if c > BigInt::zero() {
                        return false;
                    }
                } else {
                    rest.push((u, c));
                }
            }
        }
        rows = rest;
    }
    rows.iter().all(|(_, c)| *c <= BigInt::zero())
}

/// Cells downcast to machine integers for fast window scans, with a checked
/// fallback to exact arithmetic when coefficients do not fit.
pub(crate) struct CompiledQfnf {
    exact: Option<Qfnf>,
    modulus: i128,
    cells: Vec<CompiledCell>,
}

struct CompiledCell {
    ineqs: Vec<(Vec<i128>, i128)>,
    congs: Vec<(Vec<i128>, i128)>,
}

impl CompiledQfnf {
    pub fn new(q: &Qfnf) -> CompiledQfnf {
        let mut cells = Vec::with_capacity(q.cells.len());
        let to_i128 = |v: &BigInt| {
            v.to_i128()
                .filter(|x| x.checked_abs().is_some_and(|a| a < i128::MAX / 4))
        };
        let mut ok = true;
        'compile: for cell in &q.cells {
            let mut cc = CompiledCell {
                ineqs: Vec::new(),
                congs: Vec::new(),
            };
            for ineq in &cell.inequalities {
                let coeffs: Option<Vec<i128>> = ineq.coeffs.iter().map(to_i128).collect();
                match (coeffs, to_i128(&ineq.bound)) {
                    (Some(u), Some(c)) => cc.ineqs.push((u, c)),
                    _ => {
                        ok = false;
                        break 'compile;
                    }
                }
            }
            for cong in &cell.congruences {
                let coeffs: Option<Vec<i128>> = cong.coeffs.iter().map(to_i128).collect();
                match (coeffs, to_i128(&cong.residue)) {
                    (Some(u), Some(e)) => cc.congs.push((u, e)),
                    _ => {
                        ok = false;
                        break 'compile;
                    }
                }
            }
            cells.push(cc);
        }
        if ok {
            if let Some(modulus) = q.modulus.to_i128() {
                return CompiledQfnf {
                    exact: None,
                    modulus,
                    cells,
                };
            }
        }
        CompiledQfnf {
            exact: Some(q.clone()),
            modulus: 1,
            cells: Vec::new(),
        }
    }

    pub fn evaluate(&self, p: &[i64]) -> bool {
        if let Some(exact) = &self.exact {
            return exact.evaluate(p).expect("dimension checked by caller");
        }
        self.cells.iter().any(|cell| {
            cell.ineqs.iter().all(|(u, c)| {
                let dot: i128 = u.iter().zip(p).map(|(a, &x)| a * x as i128).sum();
                dot >= *c
            }) && cell.congs.iter().all(|(u, e)| {
                let dot: i128 = u.iter().zip(p).map(|(a, &x)| a * x as i128).sum();
                dot.rem_euclid(self.modulus) == *e
            })
        })
    }
}

fn coeff_row(coeffs: &[BigInt], vars: &[String]) -> String {
    let mut out = String::new();
    for (i, (c, v)) in coeffs.iter().zip(vars).enumerate() {
        if i == 0 {
            let _ = write!(out, "{c}{v}");
        } else if c.is_negative() {
            let _ = write!(out, "-{}{v}", c.abs());
        } else {
            let _ = write!(out, "+{c}{v}");
        }
    }
    if coeffs.is_empty() {
        out.push('0');
    }
    out
}
