use super::linexpr::LinExpr;
use super::{QeConfig, QeError};
use crate::formula::{CmpOp, Formula, Term, VarName};
use num::bigint::BigInt;
use num::{Integer, One, Signed, Zero};
use std::sync::Arc;

/// Negation-normal intermediate form. Inequalities are `e >= 0`; congruences
/// are `e = 0 (mod m)` and their negations are kept first-class so that
/// Cooper elimination does not have to expand residue classes early.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub(crate) enum Ir {
    False,
    True,
    Geq(LinExpr),
    Cong(LinExpr, BigInt),
    NotCong(LinExpr, BigInt),
    And(Vec<Ir>),
    Or(Vec<Ir>),
    Exists(VarName, Box<Ir>, Arc<str>),
    Forall(VarName, Box<Ir>, Arc<str>),
}

impl Ir {
    pub fn and(children: Vec<Ir>) -> Ir {
        let mut flat = Vec::new();
        for c in children {
            match c {
                Ir::True => {}
                Ir::False => return Ir::False,
                Ir::And(xs) => flat.extend(xs),
                other => flat.push(other),
            }
        }
        flat.sort();
        flat.dedup();
        match flat.len() {
            0 => Ir::True,
            1 => flat.pop().unwrap(),
            _ => Ir::And(flat),
        }
    }

    pub fn or(children: Vec<Ir>) -> Ir {
        let mut flat = Vec::new();
        for c in children {
            match c {
                Ir::False => {}
                Ir::True => return Ir::True,
                Ir::Or(xs) => flat.extend(xs),
                other => flat.push(other),
            }
        }
        flat.sort();
        flat.dedup();
        match flat.len() {
            0 => Ir::False,
            1 => flat.pop().unwrap(),
            _ => Ir::Or(flat),
        }
    }

    /// Structural negation. Only valid on quantifier-free forms.
    pub fn dual(&self) -> Ir {
        match self {
            Ir::True => Ir::False,
            Ir::False => Ir::True,
            // not(e >= 0)  <=>  -e - 1 >= 0
            Ir::Geq(e) => Ir::Geq(-(e.clone()) - LinExpr::constant(1)),
            Ir::Cong(e, m) => Ir::NotCong(e.clone(), m.clone()),
            Ir::NotCong(e, m) => Ir::Cong(e.clone(), m.clone()),
            Ir::And(xs) => Ir::or(xs.iter().map(|x| x.dual()).collect()),
            Ir::Or(xs) => Ir::and(xs.iter().map(|x| x.dual()).collect()),
            Ir::Exists(..) | Ir::Forall(..) => {
                unreachable!("dual is applied to quantifier-free forms only")
            }
        }
    }

    /// Simplifies constant atoms.
    pub fn fold_constants(self) -> Ir {
        match self {
            Ir::Geq(e) if e.is_constant() => {
                if e.constant >= BigInt::zero() {
                    Ir::True
                } else {
                    Ir::False
                }
            }
            Ir::Cong(e, m) if e.is_constant() => {
                if e.constant.mod_floor(&m).is_zero() {
                    Ir::True
                } else {
                    Ir::False
                }
            }
            Ir::NotCong(e, m) if e.is_constant() => {
                if e.constant.mod_floor(&m).is_zero() {
                    Ir::False
                } else {
                    Ir::True
                }
            }
            other => other,
        }
    }
}

struct Converter {
    fresh: u32,
    scopes: Vec<(VarName, VarName)>,
}

impl Converter {
    fn resolve_term(&self, t: &Term) -> LinExpr {
        let mut e = LinExpr::from_term(t);
        // Rebind via the scope stack (innermost wins).
        for (orig, fresh) in self.scopes.iter().rev() {
            let c = e.take_var(orig);
            if !c.is_zero() {
                *e.coeffs.entry(fresh.clone()).or_insert_with(BigInt::zero) += c;
            }
        }
        e.coeffs.retain(|_, c| !c.is_zero());
        e
    }

    fn cmp(&self, lhs: &Term, op: CmpOp, rhs: &Term) -> Ir {
        let l = self.resolve_term(lhs);
        let r = self.resolve_term(rhs);
        let diff = |a: &LinExpr, b: &LinExpr| a.clone() - b.clone();
        match op {
            // l < r  <=>  r - l - 1 >= 0
            CmpOp::Lt => Ir::Geq(diff(&r, &l) - LinExpr::constant(1)).fold_constants(),
            CmpOp::Le => Ir::Geq(diff(&r, &l)).fold_constants(),
            CmpOp::Ge => Ir::Geq(diff(&l, &r)).fold_constants(),
            CmpOp::Gt => Ir::Geq(diff(&l, &r) - LinExpr::constant(1)).fold_constants(),
            CmpOp::Eq => Ir::and(vec![
                Ir::Geq(diff(&l, &r)).fold_constants(),
                Ir::Geq(diff(&r, &l)).fold_constants(),
            ]),
            CmpOp::Ne => Ir::or(vec![
                Ir::Geq(diff(&l, &r) - LinExpr::constant(1)).fold_constants(),
                Ir::Geq(diff(&r, &l) - LinExpr::constant(1)).fold_constants(),
            ]),
        }
    }

    /// NNF conversion; `positive` is the polarity of the current subtree.
    fn convert(&mut self, f: &Formula, positive: bool) -> Ir {
        match f {
            Formula::Cmp(l, op, r) => {
                if positive {
                    self.cmp(l, *op, r)
                } else {
                    let negated = match op {
                        CmpOp::Lt => CmpOp::Ge,
                        CmpOp::Le => CmpOp::Gt,
                        CmpOp::Eq => CmpOp::Ne,
                        CmpOp::Ne => CmpOp::Eq,
                        CmpOp::Ge => CmpOp::Lt,
                        CmpOp::Gt => CmpOp::Le,
                    };
                    self.cmp(l, negated, r)
                }
            }
            Formula::Congruence(t, m, r) => {
                let e = self.resolve_term(t) - LinExpr::constant(r.clone());
                let atom = if positive {
                    Ir::Cong(e, m.clone())
                } else {
                    Ir::NotCong(e, m.clone())
                };
                atom.fold_constants()
            }
            Formula::Not(x) => self.convert(x, !positive),
            Formula::And(a, b) => {
                let ca = self.convert(a, positive);
                let cb = self.convert(b, positive);
                if positive {
                    Ir::and(vec![ca, cb])
                } else {
                    Ir::or(vec![ca, cb])
                }
            }
            Formula::Or(a, b) => {
                let ca = self.convert(a, positive);
                let cb = self.convert(b, positive);
                if positive {
                    Ir::or(vec![ca, cb])
                } else {
                    Ir::and(vec![ca, cb])
                }
            }
            Formula::Implies(a, b) => {
                // a -> b  ==  !a | b
                let na = self.convert(a, !positive);
                let cb = self.convert(b, positive);
                if positive {
                    Ir::or(vec![na, cb])
                } else {
                    Ir::and(vec![na, cb])
                }
            }
            Formula::Iff(a, b) => {
                // (a & b) | (!a & !b); negation swaps one side's polarity.
                let pa = self.convert(a, true);
                let pb = self.convert(b, positive);
                let na = self.convert(a, false);
                let nb = self.convert(b, !positive);
                Ir::or(vec![Ir::and(vec![pa, pb]), Ir::and(vec![na, nb])])
            }
            Formula::Exists(v, body) | Formula::Forall(v, body) => {
                self.fresh += 1;
                let fresh = VarName {
                    base: v.base.clone(),
                    tag: self.fresh,
                };
                self.scopes.push((v.clone(), fresh.clone()));
                let inner = self.convert(body, positive);
                self.scopes.pop();
                let src: Arc<str> = Arc::from(f.render().as_str());
                let existential = matches!(f, Formula::Exists(_, _)) == positive;
                if existential {
                    Ir::Exists(fresh, Box::new(inner), src)
                } else {
                    Ir::Forall(fresh, Box::new(inner), src)
                }
            }
        }
    }
}

/// Converts a formula to NNF with freshly tagged bound variables. Fresh tags
/// start above any tag already present so hand-built trees cannot collide.
pub(crate) fn to_ir(f: &Formula) -> Ir {
    let mut converter = Converter {
        fresh: 1_000_000,
        scopes: Vec::new(),
    };
    converter.convert(f, true)
}

/// A conjunction of atoms destined to become one cell.
#[derive(Clone, Debug, Default)]
pub(crate) struct RawCell {
    pub geqs: Vec<LinExpr>,
    pub congs: Vec<(LinExpr, BigInt)>,
    pub notcongs: Vec<(LinExpr, BigInt)>,
}

impl RawCell {
    fn merged(&self, other: &RawCell) -> RawCell {
        let mut out = self.clone();
        out.geqs.extend(other.geqs.iter().cloned());
        out.congs.extend(other.congs.iter().cloned());
        out.notcongs.extend(other.notcongs.iter().cloned());
        out
    }

    /// Cheap in-product normalization: folds constant atoms, drops duplicate
    /// atoms, and detects directly contradictory inequality pairs. Returns
    /// `false` when the cell is plainly infeasible.
    fn prune(&mut self) -> bool {
        self.geqs.sort();
        self.geqs.dedup();
        self.congs.sort();
        self.congs.dedup();
        self.notcongs.sort();
        self.notcongs.dedup();
        let mut i = 0;
        while i < self.geqs.len() {
            if self.geqs[i].is_constant() {
                if self.geqs[i].constant < BigInt::from(0) {
                    return false;
                }
                self.geqs.remove(i);
            } else {
                i += 1;
            }
        }
        for (e, m) in &self.congs {
            if e.is_constant() && !e.constant.mod_floor(m).is_zero() {
                return false;
            }
        }
        for (e, m) in &self.notcongs {
            if e.is_constant() && e.constant.mod_floor(m).is_zero() {
                return false;
            }
        }
        self.congs.retain(|(e, _)| !e.is_constant());
        self.notcongs.retain(|(e, _)| !e.is_constant());
        // u.x >= -k1 together with -u.x >= -k2 needs k1 + k2 >= 0.
        for i in 0..self.geqs.len() {
            for j in i + 1..self.geqs.len() {
                let (a, b) = (&self.geqs[i], &self.geqs[j]);
                if a.coeffs.len() == b.coeffs.len()
                    && a.coeffs.iter().all(|(v, c)| b.coeff(v) == -c.clone())
                    && a.constant.clone() + &b.constant < BigInt::from(0)
                {
                    return false;
                }
            }
        }
        true
    }

    fn sort_key(&self) -> (Vec<LinExpr>, Vec<(LinExpr, BigInt)>, Vec<(LinExpr, BigInt)>) {
        (self.geqs.clone(), self.congs.clone(), self.notcongs.clone())
    }

    /// True when every atom of `self` also appears in `other` (so `other`
    /// implies `self` and is absorbed by it in a disjunction).
    fn subsumes(&self, other: &RawCell) -> bool {
        self.geqs.iter().all(|a| other.geqs.contains(a))
            && self.congs.iter().all(|a| other.congs.contains(a))
            && self.notcongs.iter().all(|a| other.notcongs.contains(a))
    }
}

/// Deduplicates and applies absorption on a pruned cell list.
fn compact(cells: &mut Vec<RawCell>) {
    cells.sort_by_key(RawCell::sort_key);
    cells.dedup_by(|a, b| a.sort_key() == b.sort_key());
    const ABSORPTION_CAP: usize = 1500;
    if cells.len() > ABSORPTION_CAP {
        return;
    }
    let mut kept: Vec<RawCell> = Vec::with_capacity(cells.len());
    'outer: for cell in cells.drain(..) {
        for k in &kept {
            if k.subsumes(&cell) {
                continue 'outer;
            }
        }
        kept.retain(|k| !cell.subsumes(k));
        kept.push(cell);
    }
    *cells = kept;
}

/// Distributes a quantifier-free form into disjunctive normal form.
pub(crate) fn dnf(ir: &Ir, config: &QeConfig, context: &str) -> Result<Vec<RawCell>, QeError> {
    let limit_err = |what: &str| QeError::ResourceLimit {
        limit: what.to_string(),
        subformula: context.to_string(),
    };
    match ir {
        Ir::False => Ok(vec![]),
        Ir::True => Ok(vec![RawCell::default()]),
        Ir::Geq(e) => Ok(vec![RawCell {
            geqs: vec![e.clone()],
            ..RawCell::default()
        }]),
        Ir::Cong(e, m) => Ok(vec![RawCell {
            congs: vec![(e.clone(), m.clone())],
            ..RawCell::default()
        }]),
        Ir::NotCong(e, m) => Ok(vec![RawCell {
            notcongs: vec![(e.clone(), m.clone())],
            ..RawCell::default()
        }]),
        Ir::Or(xs) => {
            let mut out = Vec::new();
            for x in xs {
                out.extend(dnf(x, config, context)?);
                if out.len() > config.max_cells {
                    return Err(limit_err("cell count"));
                }
            }
            Ok(out)
        }
        Ir::And(xs) => {
            let mut acc = vec![RawCell::default()];
            for x in xs {
                let cells = dnf(x, config, context)?;
                let mut next = Vec::with_capacity(acc.len() * cells.len().max(1));
                for a in &acc {
                    for c in &cells {
                        let mut merged = a.merged(c);
                        if !merged.prune() {
                            continue;
                        }
                        next.push(merged);
                        if next.len() > config.max_cells {
                            return Err(limit_err("cell count"));
                        }
                    }
                }
                compact(&mut next);
                acc = next;
            }
            Ok(acc)
        }
        Ir::Exists(_, _, src) | Ir::Forall(_, _, src) => {
            unreachable!("quantifier {src} survived elimination")
        }
    }
}

/// lcm of two positive integers.
pub(crate) fn lcm_big(a: &BigInt, b: &BigInt) -> BigInt {
    if a.is_zero() || b.is_zero() {
        return BigInt::one();
    }
    a.abs().lcm(&b.abs())
}
