//! Shared test oracles: a bounded-quantifier brute-force evaluator that is
//! independent of the elimination path, a seeded random-formula generator,
//! and naive hash-free block recounts.

#![allow(dead_code)]

use defilab_core::formula::{CmpOp, Formula, Term, VarName};
use defilab_core::geom::Window;
use defilab_core::qe::{eliminate, Qfnf, QeConfig};
use num::bigint::BigInt;
use num::{Integer, Signed, ToPrimitive, Zero};
use rand::rngs::StdRng;
use rand::Rng;
use std::collections::HashMap;

// ---------------------------------------------------------------------------
// Bounded-quantifier oracle
// ---------------------------------------------------------------------------

/// A formula compiled to machine integers with per-quantifier scan plans.
///
/// Truth evaluation recurses over the original syntax tree (independent of
/// the elimination path); only the *ranges* scanned by outer quantifiers are
/// taken from elimination profiles, per the soundness-test design. The
/// innermost quantifier over a quantifier-free body is decided exactly: for
/// fixed other variables the body's truth in that variable is constant
/// between atom thresholds and periodic (lcm of moduli) beyond them, so
/// scanning candidates near each threshold plus one period of slack is
/// conclusive.
pub struct BoundedOracle {
    root: Node,
    pub slots: Vec<VarName>,
    pub free_slots: Vec<usize>,
    /// Estimated number of quantifier-free evaluations per window point.
    pub cost_per_point: u128,
}

enum Node {
    Geq { terms: Vec<(usize, i64)>, k: i64 },
    Cong { terms: Vec<(usize, i64)>, k: i64, m: i64 },
    Not(Box<Node>),
    And(Box<Node>, Box<Node>),
    Or(Box<Node>, Box<Node>),
    Implies(Box<Node>, Box<Node>),
    Iff(Box<Node>, Box<Node>),
    Quantifier {
        exists: bool,
        slot: usize,
        body: Box<Node>,
        scan: Scan,
    },
}

enum Scan {
    /// Exact threshold scan: `(terms, k, a)` lists atoms with coefficient
    /// `a` on the quantified variable; `period` is the lcm of relevant
    /// moduli and scaled coefficients.
    Exact {
        thresholds: Vec<(Vec<(usize, i64)>, i64, i64)>,
        period: i64,
    },
    /// Plain scan over `[-bound, bound]`.
    Range { bound: i64 },
}

#[derive(Debug, thiserror::Error)]
pub enum OracleError {
    #[error("coefficient or constant does not fit the compiled range")]
    Overflow,
    #[error("range bound {0} exceeds the scan budget")]
    RangeTooLarge(i64),
    #[error("elimination of a subformula failed: {0}")]
    Elimination(String),
}

/// Caps for oracle construction; formulas exceeding them should be resampled.
pub const MAX_RANGE_BOUND: i64 = 2_000;
pub const MAX_COST_PER_POINT: u128 = 2_000_000;
/// Cap on (window points) x (cost per point) for one soundness check.
pub const MAX_TOTAL_COST: u128 = 25_000_000;

impl BoundedOracle {
    /// Builds the oracle for `f`. `ambient` bounds the absolute value of the
    /// free variables it will be evaluated at (the window radius).
    pub fn build(f: &Formula, ambient: i64) -> Result<BoundedOracle, OracleError> {
        let mut slots: Vec<VarName> = Vec::new();
        let free: Vec<VarName> = f.free_vars();
        for v in &free {
            slots.push(v.clone());
        }
        let root = compile(f, &mut slots, ambient)?;
        let free_slots: Vec<usize> = (0..free.len()).collect();
        let cost = cost_of(&root);
        if cost > MAX_COST_PER_POINT {
            return Err(OracleError::RangeTooLarge(cost.min(i64::MAX as u128) as i64));
        }
        Ok(BoundedOracle {
            root,
            slots,
            free_slots,
            cost_per_point: cost,
        })
    }

    /// Truth at a free-variable assignment (by free-variable order).
    pub fn eval(&self, frees: &[i64]) -> bool {
        let mut values = vec![0i64; self.slots.len()];
        for (slot, &v) in self.free_slots.iter().zip(frees) {
            values[*slot] = v;
        }
        eval_node(&self.root, &mut values)
    }
}

fn cost_of(node: &Node) -> u128 {
    match node {
        Node::Geq { .. } | Node::Cong { .. } => 1,
        Node::Not(a) => cost_of(a),
        Node::And(a, b) | Node::Or(a, b) | Node::Implies(a, b) | Node::Iff(a, b) => {
            cost_of(a) + cost_of(b)
        }
        Node::Quantifier { body, scan, .. } => {
            let width: u128 = match scan {
                Scan::Exact { thresholds, period } => {
                    (thresholds.len() as u128 + 1) * (2 * *period as u128 + 5)
                }
                Scan::Range { bound } => 2 * *bound as u128 + 1,
            };
            width * cost_of(body)
        }
    }
}

fn lin_to_terms(
    t: &Term,
    slots: &mut Vec<VarName>,
) -> Result<(Vec<(usize, i64)>, i64), OracleError> {
    let (coeffs, k) = t.linearize();
    let k = k.to_i64().ok_or(OracleError::Overflow)?;
    let mut terms = Vec::new();
    for (v, c) in coeffs {
        let c = c.to_i64().ok_or(OracleError::Overflow)?;
        let slot = match slots.iter().position(|s| *s == v) {
            Some(i) => i,
            None => {
                slots.push(v.clone());
                slots.len() - 1
            }
        };
        terms.push((slot, c));
    }
    Ok((terms, k))
}

fn compile(f: &Formula, slots: &mut Vec<VarName>, ambient: i64) -> Result<Node, OracleError> {
    match f {
        Formula::Cmp(lhs, op, rhs) => {
            let diff = Term::Sub(Box::new(lhs.clone()), Box::new(rhs.clone()));
            let (terms, k) = lin_to_terms(&diff, slots)?;
            // lhs - rhs (op) 0, expressed with >= and negations.
            let geq = |terms: Vec<(usize, i64)>, k: i64| Node::Geq { terms, k };
            Ok(match op {
                CmpOp::Ge => geq(terms, k),
                CmpOp::Gt => geq(terms, k - 1),
                CmpOp::Le => geq(neg_terms(&terms), -k),
                CmpOp::Lt => geq(neg_terms(&terms), -k - 1),
                CmpOp::Eq => Node::And(
                    Box::new(geq(terms.clone(), k)),
                    Box::new(geq(neg_terms(&terms), -k)),
                ),
                CmpOp::Ne => Node::Or(
                    Box::new(geq(terms.clone(), k - 1)),
                    Box::new(geq(neg_terms(&terms), -k - 1)),
                ),
            })
        }
        Formula::Congruence(t, m, r) => {
            let (terms, k) = lin_to_terms(t, slots)?;
            let m = m.to_i64().ok_or(OracleError::Overflow)?;
            let r = r.to_i64().ok_or(OracleError::Overflow)?;
            Ok(Node::Cong {
                terms,
                k: k - r,
                m,
            })
        }
        Formula::Not(x) => Ok(Node::Not(Box::new(compile(x, slots, ambient)?))),
        Formula::And(a, b) => Ok(Node::And(
            Box::new(compile(a, slots, ambient)?),
            Box::new(compile(b, slots, ambient)?),
        )),
        Formula::Or(a, b) => Ok(Node::Or(
            Box::new(compile(a, slots, ambient)?),
            Box::new(compile(b, slots, ambient)?),
        )),
        Formula::Implies(a, b) => Ok(Node::Implies(
            Box::new(compile(a, slots, ambient)?),
            Box::new(compile(b, slots, ambient)?),
        )),
        Formula::Iff(a, b) => Ok(Node::Iff(
            Box::new(compile(a, slots, ambient)?),
            Box::new(compile(b, slots, ambient)?),
        )),
        Formula::Exists(v, body) | Formula::Forall(v, body) => {
            let exists = matches!(f, Formula::Exists(_, _));
            // Allocate the slot before compiling the body so occurrences bind.
            let slot = match slots.iter().position(|s| s == v) {
                Some(i) => i,
                None => {
                    slots.push(v.clone());
                    slots.len() - 1
                }
            };
            let compiled_body = compile(body, slots, ambient)?;
            let scan = if body_is_quantifier_free(body) {
                exact_scan(v, body, slots)?
            } else {
                range_scan(v, body, ambient)?
            };
            Ok(Node::Quantifier {
                exists,
                slot,
                body: Box::new(compiled_body),
                scan,
            })
        }
    }
}

fn neg_terms(terms: &[(usize, i64)]) -> Vec<(usize, i64)> {
    terms.iter().map(|&(s, c)| (s, -c)).collect()
}

fn body_is_quantifier_free(f: &Formula) -> bool {
    match f {
        Formula::Cmp(..) | Formula::Congruence(..) => true,
        Formula::Not(x) => body_is_quantifier_free(x),
        Formula::And(a, b)
        | Formula::Or(a, b)
        | Formula::Implies(a, b)
        | Formula::Iff(a, b) => body_is_quantifier_free(a) && body_is_quantifier_free(b),
        Formula::Exists(..) | Formula::Forall(..) => false,
    }
}

/// Threshold scan data for a quantifier over a quantifier-free body.
fn exact_scan(
    v: &VarName,
    body: &Formula,
    slots: &mut Vec<VarName>,
) -> Result<Scan, OracleError> {
    let mut thresholds = Vec::new();
    let mut period = 1i64;
    collect_v_atoms(body, v, slots, &mut thresholds, &mut period)?;
    Ok(Scan::Exact { thresholds, period })
}

fn collect_v_atoms(
    f: &Formula,
    v: &VarName,
    slots: &mut Vec<VarName>,
    thresholds: &mut Vec<(Vec<(usize, i64)>, i64, i64)>,
    period: &mut i64,
) -> Result<(), OracleError> {
    match f {
        Formula::Cmp(lhs, _, rhs) => {
            let diff = Term::Sub(Box::new(lhs.clone()), Box::new(rhs.clone()));
            let (coeffs, k) = diff.linearize();
            let a = coeffs.get(v).cloned().unwrap_or_else(BigInt::zero);
            if a.is_zero() {
                return Ok(());
            }
            let a = a.to_i64().ok_or(OracleError::Overflow)?;
            let k = k.to_i64().ok_or(OracleError::Overflow)?;
            let mut rest = Vec::new();
            for (name, c) in coeffs {
                if name == *v {
                    continue;
                }
                let c = c.to_i64().ok_or(OracleError::Overflow)?;
                let slot = match slots.iter().position(|s| *s == name) {
                    Some(i) => i,
                    None => {
                        slots.push(name.clone());
                        slots.len() - 1
                    }
                };
                rest.push((slot, c));
            }
            thresholds.push((rest, k, a));
            Ok(())
        }
        Formula::Congruence(t, m, _) => {
            let (coeffs, _) = t.linearize();
            if let Some(a) = coeffs.get(v) {
                if !a.is_zero() {
                    let m = m.to_i64().ok_or(OracleError::Overflow)?;
                    let a = a.abs().to_i64().ok_or(OracleError::Overflow)?;
                    *period = period.lcm(&m).lcm(&a);
                    if *period > 10_000 {
                        return Err(OracleError::RangeTooLarge(*period));
                    }
                }
            }
            Ok(())
        }
        Formula::Not(x) => collect_v_atoms(x, v, slots, thresholds, period),
        Formula::And(a, b)
        | Formula::Or(a, b)
        | Formula::Implies(a, b)
        | Formula::Iff(a, b) => {
            collect_v_atoms(a, v, slots, thresholds, period)?;
            collect_v_atoms(b, v, slots, thresholds, period)
        }
        Formula::Exists(..) | Formula::Forall(..) => unreachable!("body is quantifier-free"),
    }
}

/// Scan bound for an outer quantifier, from the elimination profile of its
/// body (with the quantified variable treated as free).
fn range_scan(v: &VarName, body: &Formula, ambient: i64) -> Result<Scan, OracleError> {
    // The quantified variable may carry a parse-time alpha-renaming tag;
    // rename its occurrences to a fresh source-level name so the body can be
    // eliminated with it as a free variable.
    let fresh = VarName::source("qv_profile");
    let body = rename_free_var(body, v, &fresh);
    let mut order: Vec<String> = body.free_vars().iter().map(|n| n.base.clone()).collect();
    if !order.contains(&fresh.base) {
        order.push(fresh.base.clone());
    }
    let refs: Vec<&str> = order.iter().map(|s| s.as_str()).collect();
    let config = QeConfig {
        max_cells: 20_000,
        coeff_bit_budget: 1_000_000,
    };
    let q: Qfnf =
        eliminate(&body, &refs, &config).map_err(|e| OracleError::Elimination(e.to_string()))?;
    let coeff_sum = q.max_coeff_sum().to_i64().ok_or(OracleError::Overflow)?;
    let constant = q.max_constant().to_i64().ok_or(OracleError::Overflow)?;
    let modulus = q.modulus().to_i64().ok_or(OracleError::Overflow)?;
    let bound = constant
        .saturating_add(coeff_sum.saturating_mul(ambient))
        .saturating_add(modulus)
        .saturating_add(8);
    if bound > MAX_RANGE_BOUND {
        return Err(OracleError::RangeTooLarge(bound));
    }
    Ok(Scan::Range { bound })
}

/// Renames free occurrences of `from` to `to`, stopping at rebinding scopes.
fn rename_free_var(f: &Formula, from: &VarName, to: &VarName) -> Formula {
    fn term(t: &Term, from: &VarName, to: &VarName) -> Term {
        match t {
            Term::Const(_) => t.clone(),
            Term::Var(v) => Term::Var(if v == from { to.clone() } else { v.clone() }),
            Term::Add(a, b) => Term::Add(
                Box::new(term(a, from, to)),
                Box::new(term(b, from, to)),
            ),
            Term::Sub(a, b) => Term::Sub(
                Box::new(term(a, from, to)),
                Box::new(term(b, from, to)),
            ),
            Term::Mul(c, v) => {
                Term::Mul(c.clone(), if v == from { to.clone() } else { v.clone() })
            }
            Term::Neg(a) => Term::Neg(Box::new(term(a, from, to))),
        }
    }
    match f {
        Formula::Cmp(a, op, b) => Formula::Cmp(term(a, from, to), *op, term(b, from, to)),
        Formula::Congruence(t, m, r) => {
            Formula::Congruence(term(t, from, to), m.clone(), r.clone())
        }
        Formula::Not(x) => Formula::Not(Box::new(rename_free_var(x, from, to))),
        Formula::And(a, b) => Formula::And(
            Box::new(rename_free_var(a, from, to)),
            Box::new(rename_free_var(b, from, to)),
        ),
        Formula::Or(a, b) => Formula::Or(
            Box::new(rename_free_var(a, from, to)),
            Box::new(rename_free_var(b, from, to)),
        ),
        Formula::Implies(a, b) => Formula::Implies(
            Box::new(rename_free_var(a, from, to)),
            Box::new(rename_free_var(b, from, to)),
        ),
        Formula::Iff(a, b) => Formula::Iff(
            Box::new(rename_free_var(a, from, to)),
            Box::new(rename_free_var(b, from, to)),
        ),
        Formula::Exists(v, body) if v != from => Formula::Exists(
            v.clone(),
            Box::new(rename_free_var(body, from, to)),
        ),
        Formula::Forall(v, body) if v != from => Formula::Forall(
            v.clone(),
            Box::new(rename_free_var(body, from, to)),
        ),
        shadowed => shadowed.clone(),
    }
}

fn eval_node(node: &Node, values: &mut Vec<i64>) -> bool {
    match node {
        Node::Geq { terms, k } => dot(terms, values) + k >= 0,
        Node::Cong { terms, k, m } => (dot(terms, values) + k).rem_euclid(*m) == 0,
        Node::Not(a) => !eval_node(a, values),
        Node::And(a, b) => eval_node(a, values) && eval_node(b, values),
        Node::Or(a, b) => eval_node(a, values) || eval_node(b, values),
        Node::Implies(a, b) => !eval_node(a, values) || eval_node(b, values),
        Node::Iff(a, b) => eval_node(a, values) == eval_node(b, values),
        Node::Quantifier {
            exists,
            slot,
            body,
            scan,
        } => {
            let candidates = candidates_for(scan, values);
            let mut result = !*exists;
            for c in candidates {
                values[*slot] = c;
                let truth = eval_node(body, values);
                if truth == *exists {
                    result = *exists;
                    break;
                }
            }
            values[*slot] = 0;
            result
        }
    }
}

fn dot(terms: &[(usize, i64)], values: &[i64]) -> i64 {
    terms.iter().map(|&(s, c)| c * values[s]).sum()
}

fn candidates_for(scan: &Scan, values: &[i64]) -> Vec<i64> {
    match scan {
        Scan::Range { bound } => (-bound..=*bound).collect(),
        Scan::Exact { thresholds, period } => {
            let slop = period + 2;
            let mut anchors: Vec<i64> = vec![0];
            for (rest, k, a) in thresholds {
                let r = dot(rest, values) + k;
                // threshold of  a*v + r >= 0  at  v ~ -r/a
                anchors.push((-r).div_euclid(*a));
            }
            anchors.sort_unstable();
            anchors.dedup();
            let mut out = Vec::with_capacity(anchors.len() * (2 * slop as usize + 1));
            for t in anchors {
                for c in t - slop..=t + slop {
                    out.push(c);
                }
            }
            out.sort_unstable();
            out.dedup();
            out
        }
    }
}

// ---------------------------------------------------------------------------
// Random formula generator
// ---------------------------------------------------------------------------

/// Settings matching the soundness criterion: at most 3 variables, at most 2
/// quantifiers, atom coefficients in [-4, 4].
pub struct GeneratorConfig {
    pub max_vars: usize,
    pub max_quantifiers: usize,
    pub max_atoms: usize,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            max_vars: 3,
            max_quantifiers: 2,
            max_atoms: 6,
        }
    }
}

const VAR_POOL: [&str; 3] = ["x", "y", "z"];

fn random_term(rng: &mut StdRng, vars: &[&str]) -> Term {
    let parts = rng.gen_range(1..=2);
    let mut t: Option<Term> = None;
    for _ in 0..parts {
        let piece = if rng.gen_bool(0.8) {
            let v = vars[rng.gen_range(0..vars.len())];
            let c: i64 = rng.gen_range(-4..=4);
            match c {
                0 => Term::int(0),
                1 => Term::var(v),
                -1 => Term::Neg(Box::new(Term::var(v))),
                c => Term::scaled(c, v),
            }
        } else {
            Term::int(rng.gen_range(-4..=4i64))
        };
        t = Some(match t {
            None => piece,
            Some(acc) => {
                if rng.gen_bool(0.5) {
                    acc.add(piece)
                } else {
                    acc.sub(piece)
                }
            }
        });
    }
    t.unwrap()
}

fn random_atom(rng: &mut StdRng, vars: &[&str]) -> Formula {
    if rng.gen_bool(0.25) {
        let m = rng.gen_range(2..=4i64);
        let r = rng.gen_range(0..m);
        Formula::congruence(random_term(rng, vars), m, r)
    } else {
        let ops = [CmpOp::Lt, CmpOp::Le, CmpOp::Eq, CmpOp::Ne, CmpOp::Ge, CmpOp::Gt];
        let op = ops[rng.gen_range(0..ops.len())];
        Formula::cmp(random_term(rng, vars), op, random_term(rng, vars))
    }
}

fn random_qf(rng: &mut StdRng, vars: &[&str], atoms: usize) -> Formula {
    if atoms <= 1 {
        return random_atom(rng, vars);
    }
    let left = rng.gen_range(1..atoms);
    let a = random_qf(rng, vars, left);
    let b = random_qf(rng, vars, atoms - left);
    match rng.gen_range(0..10) {
        0..=3 => Formula::and(a, b),
        4..=7 => Formula::or(a, b),
        8 => Formula::implies(a, b),
        _ => {
            if rng.gen_bool(0.5) {
                Formula::iff(a, b)
            } else {
                Formula::not(Formula::and(a, b))
            }
        }
    }
}

/// One random formula plus its free variables in order.
pub fn random_formula(rng: &mut StdRng, config: &GeneratorConfig) -> (Formula, Vec<String>) {
    let nvars = rng.gen_range(1..=config.max_vars);
    let vars: Vec<&str> = VAR_POOL[..nvars].to_vec();
    let quantified = rng.gen_range(0..=config.max_quantifiers.min(nvars));
    let atoms = rng.gen_range(1..=config.max_atoms);
    let mut f = random_qf(rng, &vars, atoms);
    // Quantify the last `quantified` variables, innermost first, sometimes
    // mixing in an extra quantifier-free conjunct between levels.
    for i in 0..quantified {
        let var = vars[nvars - 1 - i];
        if i > 0 && rng.gen_bool(0.4) {
            let frees = &vars[..nvars - i];
            let extra_atoms = rng.gen_range(1..=2);
            let extra = random_qf(rng, frees, extra_atoms);
            f = if rng.gen_bool(0.5) {
                Formula::and(f, extra)
            } else {
                Formula::or(f, extra)
            };
        }
        f = if rng.gen_bool(0.5) {
            Formula::exists(var, f)
        } else {
            Formula::forall(var, f)
        };
    }
    let frees: Vec<String> = f.free_vars().iter().map(|v| v.base.clone()).collect();
    (f, frees)
}

// ---------------------------------------------------------------------------
// Naive block-count oracles (no grids, no hashing)
// ---------------------------------------------------------------------------

/// Distinct cubic blocks by direct membership evaluation and linear-scan
/// deduplication. `escape` restricts anchors to sup norm at least that.
pub fn naive_block_count(
    member: &dyn Fn(&[i64]) -> bool,
    dim: usize,
    n: usize,
    window: &Window,
    escape: Option<i64>,
) -> usize {
    assert_eq!(window.dim(), dim);
    let anchor_bounds: Vec<(i64, i64)> = window
        .bounds()
        .iter()
        .map(|&(lo, hi)| (lo, hi - n as i64 + 1))
        .collect();
    if anchor_bounds.iter().any(|&(lo, hi)| lo > hi) {
        return 0;
    }
    let anchors = Window::new(anchor_bounds).unwrap();
    let offsets = Window::new(vec![(0, n as i64 - 1); dim]).unwrap();
    let offset_list: Vec<Vec<i64>> = offsets.points().collect();
    let mut seen: Vec<Vec<bool>> = Vec::new();
    for a in anchors.points() {
        if let Some(l) = escape {
            if defilab_core::geom::sup_norm(&a) < l {
                continue;
            }
        }
        let block: Vec<bool> = offset_list
            .iter()
            .map(|off| {
                let p: Vec<i64> = a.iter().zip(off).map(|(&x, &d)| x + d).collect();
                member(&p)
            })
            .collect();
        if !seen.contains(&block) {
            seen.push(block);
        }
    }
    seen.len()
}

/// Membership closure for a point set.
pub fn member_fn(set: &defilab_core::PointSet) -> impl Fn(&[i64]) -> bool + '_ {
    let evaluator = set.evaluator();
    move |p: &[i64]| evaluator.contains(p)
}

// ---------------------------------------------------------------------------
// Misc helpers
// ---------------------------------------------------------------------------

/// The paper formulas for the running examples, as grammar text.
pub const EX31_FORMULA: &str = "(x >= 0) & (y >= 0) & \
    ((E l. (x = l) & (y = l) & (l >= 0)) | (E l. (x = l) & (y = 1) & (l >= 0)))";

pub const EX32_FORMULA: &str = "(x >= 0) & (y >= 0) & \
    ((E l. (x = l) & (y = l) & (l >= 0)) | \
     (E l. E m. (x = 4 + l + m) & (y = 3 + 2*m) & (l >= 0) & (m >= 0)))";

/// Counts distinct factors with an occurrence at index >= escape, over a
/// two-sided word given as (letters, start index).
pub fn escaped_factor_count(word: &[bool], start: i64, n: usize, escape: i64) -> usize {
    let mut seen: Vec<&[bool]> = Vec::new();
    for i in 0..word.len().saturating_sub(n - 1) {
        let anchor = start + i as i64;
        if anchor.abs() < escape {
            continue;
        }
        let f = &word[i..i + n];
        if !seen.contains(&f) {
            seen.push(f);
        }
    }
    seen.len()
}

/// Deterministic window evaluation map for cross-checks.
pub fn truth_map(oracle: &BoundedOracle, window: &Window) -> HashMap<Vec<i64>, bool> {
    window.points().map(|p| {
        let t = oracle.eval(&p);
        (p, t)
    }).collect()
}
