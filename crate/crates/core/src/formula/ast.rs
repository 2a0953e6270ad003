use num::bigint::BigInt;
use num::Zero;
use std::collections::BTreeMap;
use std::fmt;

/// A variable identifier. `tag` 0 is a source-level name; parsing and
/// quantifier handling rename bound variables to fresh positive tags while
/// keeping `base` for display.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarName {
    pub base: String,
    pub tag: u32,
}

impl VarName {
    pub fn source(name: &str) -> Self {
        VarName {
            base: name.to_string(),
            tag: 0,
        }
    }
}

impl fmt::Debug for VarName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.tag == 0 {
            write!(f, "{}", self.base)
        } else {
            write!(f, "{}#{}", self.base, self.tag)
        }
    }
}

/// A linear integer term.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Term {
    Const(BigInt),
    Var(VarName),
    Add(Box<Term>, Box<Term>),
    Sub(Box<Term>, Box<Term>),
    /// Scalar multiple `c * x`; general products are rejected at parse time.
    Mul(BigInt, VarName),
    Neg(Box<Term>),
}

impl Term {
    pub fn var(name: &str) -> Term {
        Term::Var(VarName::source(name))
    }

    pub fn int(value: impl Into<BigInt>) -> Term {
        Term::Const(value.into())
    }

    pub fn scaled(coefficient: impl Into<BigInt>, name: &str) -> Term {
        Term::Mul(coefficient.into(), VarName::source(name))
    }

    pub fn add(self, rhs: Term) -> Term {
        Term::Add(Box::new(self), Box::new(rhs))
    }

    pub fn sub(self, rhs: Term) -> Term {
        Term::Sub(Box::new(self), Box::new(rhs))
    }

    /// Linearizes the term to a coefficient map over its variables plus a
    /// constant offset. The decomposition is unique.
    pub fn linearize(&self) -> (BTreeMap<VarName, BigInt>, BigInt) {
        let mut coeffs = BTreeMap::new();
        let mut constant = BigInt::zero();
        self.accumulate(&BigInt::from(1), &mut coeffs, &mut constant);
        coeffs.retain(|_, c| !c.is_zero());
        (coeffs, constant)
    }

    fn accumulate(
        &self,
        scale: &BigInt,
        coeffs: &mut BTreeMap<VarName, BigInt>,
        constant: &mut BigInt,
    ) {
        match self {
            Term::Const(c) => *constant += scale * c,
            Term::Var(v) => *coeffs.entry(v.clone()).or_insert_with(BigInt::zero) += scale,
            Term::Add(a, b) => {
                a.accumulate(scale, coeffs, constant);
                b.accumulate(scale, coeffs, constant);
            }
            Term::Sub(a, b) => {
                a.accumulate(scale, coeffs, constant);
                b.accumulate(&-scale, coeffs, constant);
            }
            Term::Mul(c, v) => {
                *coeffs.entry(v.clone()).or_insert_with(BigInt::zero) += scale * c
            }
            Term::Neg(a) => a.accumulate(&-scale, coeffs, constant),
        }
    }

    fn visit_vars(&self, f: &mut impl FnMut(&VarName)) {
        match self {
            Term::Const(_) => {}
            Term::Var(v) | Term::Mul(_, v) => f(v),
            Term::Add(a, b) | Term::Sub(a, b) => {
                a.visit_vars(f);
                b.visit_vars(f);
            }
            Term::Neg(a) => a.visit_vars(f),
        }
    }

    fn map_vars(&self, f: &impl Fn(&VarName) -> Option<Term>) -> Term {
        match self {
            Term::Const(_) => self.clone(),
            Term::Var(v) => f(v).unwrap_or_else(|| self.clone()),
            Term::Add(a, b) => Term::Add(Box::new(a.map_vars(f)), Box::new(b.map_vars(f))),
            Term::Sub(a, b) => Term::Sub(Box::new(a.map_vars(f)), Box::new(b.map_vars(f))),
            Term::Mul(c, v) => match f(v) {
                Some(Term::Const(k)) => Term::Const(c * k),
                Some(Term::Var(w)) => Term::Mul(c.clone(), w),
                Some(_) => unreachable!("replacements are constants or variables"),
                None => self.clone(),
            },
            Term::Neg(a) => Term::Neg(Box::new(a.map_vars(f))),
        }
    }
}

/// Comparison operators available in atoms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Lt,
    Le,
    Eq,
    Ne,
    Ge,
    Gt,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Eq => "=",
            CmpOp::Ne => "!=",
            CmpOp::Ge => ">=",
            CmpOp::Gt => ">",
        }
    }

    pub fn holds(self, lhs: &BigInt, rhs: &BigInt) -> bool {
        match self {
            CmpOp::Lt => lhs < rhs,
            CmpOp::Le => lhs <= rhs,
            CmpOp::Eq => lhs == rhs,
            CmpOp::Ne => lhs != rhs,
            CmpOp::Ge => lhs >= rhs,
            CmpOp::Gt => lhs > rhs,
        }
    }
}

/// A first-order formula. Comparators and congruences are first-class; the
/// quantifier-elimination stage normalizes them.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Formula {
    Cmp(Term, CmpOp, Term),
    /// `lhs ≡ residue (mod modulus)`, modulus ≥ 1, residue in `[0, modulus)`.
    Congruence(Term, BigInt, BigInt),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Iff(Box<Formula>, Box<Formula>),
    Exists(VarName, Box<Formula>),
    Forall(VarName, Box<Formula>),
}

impl Formula {
    pub fn cmp(lhs: Term, op: CmpOp, rhs: Term) -> Formula {
        Formula::Cmp(lhs, op, rhs)
    }

    /// Congruence atom with the residue normalized into `[0, modulus)`.
    /// Panics on modulus < 1; the parser reports that case as an error.
    pub fn congruence(lhs: Term, modulus: impl Into<BigInt>, residue: impl Into<BigInt>) -> Formula {
        let m: BigInt = modulus.into();
        assert!(m >= BigInt::from(1), "congruence modulus must be >= 1");
        let r = residue.into().mod_floor_big(&m);
        Formula::Congruence(lhs, m, r)
    }

    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn iff(a: Formula, b: Formula) -> Formula {
        Formula::Iff(Box::new(a), Box::new(b))
    }

    /// Binds every free occurrence of the source name `var` in `body`.
    pub fn exists(var: &str, body: Formula) -> Formula {
        Formula::Exists(VarName::source(var), Box::new(body))
    }

    pub fn forall(var: &str, body: Formula) -> Formula {
        Formula::Forall(VarName::source(var), Box::new(body))
    }

    pub fn and_all(mut parts: Vec<Formula>) -> Formula {
        let mut acc = parts.pop().expect("and_all needs at least one conjunct");
        while let Some(p) = parts.pop() {
            acc = Formula::and(p, acc);
        }
        acc
    }

    pub fn or_all(mut parts: Vec<Formula>) -> Formula {
        let mut acc = parts.pop().expect("or_all needs at least one disjunct");
        while let Some(p) = parts.pop() {
            acc = Formula::or(p, acc);
        }
        acc
    }

    /// Free variables in first-appearance order; bound variables excluded.
    pub fn free_vars(&self) -> Vec<VarName> {
        let mut seen = Vec::new();
        let mut bound = Vec::new();
        self.collect_free(&mut bound, &mut seen);
        seen
    }

    fn collect_free(&self, bound: &mut Vec<VarName>, seen: &mut Vec<VarName>) {
        let note = |v: &VarName, bound: &Vec<VarName>, seen: &mut Vec<VarName>| {
            if !bound.contains(v) && !seen.contains(v) {
                seen.push(v.clone());
            }
        };
        match self {
            Formula::Cmp(a, _, b) => {
                a.visit_vars(&mut |v| note(v, bound, seen));
                b.visit_vars(&mut |v| note(v, bound, seen));
            }
            Formula::Congruence(t, _, _) => t.visit_vars(&mut |v| note(v, bound, seen)),
            Formula::Not(f) => f.collect_free(bound, seen),
            Formula::And(a, b)
            | Formula::Or(a, b)
            | Formula::Implies(a, b)
            | Formula::Iff(a, b) => {
                a.collect_free(bound, seen);
                b.collect_free(bound, seen);
            }
            Formula::Exists(v, body) | Formula::Forall(v, body) => {
                bound.push(v.clone());
                body.collect_free(bound, seen);
                bound.pop();
            }
        }
    }

    /// Replaces every free occurrence of the source-level variable `var` by
    /// the integer `value`. Capture cannot occur since the replacement is a
    /// constant.
    pub fn substitute(&self, var: &str, value: &BigInt) -> Formula {
        let target = VarName::source(var);
        self.substitute_var(&target, value)
    }

    pub(crate) fn substitute_var(&self, target: &VarName, value: &BigInt) -> Formula {
        let replace = |v: &VarName| -> Option<Term> {
            if v == target {
                Some(Term::Const(value.clone()))
            } else {
                None
            }
        };
        self.map_terms_shadowed(target, &|t| t.map_vars(&replace))
    }

    /// Applies `f` to every atom's terms, skipping scopes that rebind `target`.
    fn map_terms_shadowed(&self, target: &VarName, f: &impl Fn(&Term) -> Term) -> Formula {
        match self {
            Formula::Cmp(a, op, b) => Formula::Cmp(f(a), *op, f(b)),
            Formula::Congruence(t, m, r) => Formula::Congruence(f(t), m.clone(), r.clone()),
            Formula::Not(x) => Formula::Not(Box::new(x.map_terms_shadowed(target, f))),
            Formula::And(a, b) => Formula::And(
                Box::new(a.map_terms_shadowed(target, f)),
                Box::new(b.map_terms_shadowed(target, f)),
            ),
            Formula::Or(a, b) => Formula::Or(
                Box::new(a.map_terms_shadowed(target, f)),
                Box::new(b.map_terms_shadowed(target, f)),
            ),
            Formula::Implies(a, b) => Formula::Implies(
                Box::new(a.map_terms_shadowed(target, f)),
                Box::new(b.map_terms_shadowed(target, f)),
            ),
            Formula::Iff(a, b) => Formula::Iff(
                Box::new(a.map_terms_shadowed(target, f)),
                Box::new(b.map_terms_shadowed(target, f)),
            ),
            Formula::Exists(v, body) => {
                if v == target {
                    self.clone()
                } else {
                    Formula::Exists(v.clone(), Box::new(body.map_terms_shadowed(target, f)))
                }
            }
            Formula::Forall(v, body) => {
                if v == target {
                    self.clone()
                } else {
                    Formula::Forall(v.clone(), Box::new(body.map_terms_shadowed(target, f)))
                }
            }
        }
    }

    /// Structural equality up to renaming of bound variables.
    pub fn alpha_eq(&self, other: &Formula) -> bool {
        alpha_eq_rec(self, other, &mut Vec::new())
    }
}

fn alpha_eq_rec(a: &Formula, b: &Formula, pairs: &mut Vec<(VarName, VarName)>) -> bool {
    // Terms compare by linearization, with bound variables identified by the
    // innermost binder pair they belong to (de Bruijn style).
    let term_eq = |x: &Term, y: &Term, pairs: &Vec<(VarName, VarName)>| -> bool {
        let rename = |v: &VarName, side: usize| -> VarName {
            for (i, pair) in pairs.iter().enumerate().rev() {
                let own = if side == 0 { &pair.0 } else { &pair.1 };
                if v == own {
                    return VarName {
                        base: format!("@{i}"),
                        tag: 0,
                    };
                }
            }
            v.clone()
        };
        let (cx, kx) = x.linearize();
        let (cy, ky) = y.linearize();
        if kx != ky {
            return false;
        }
        let mx: BTreeMap<VarName, BigInt> =
            cx.into_iter().map(|(v, c)| (rename(&v, 0), c)).collect();
        let my: BTreeMap<VarName, BigInt> =
            cy.into_iter().map(|(v, c)| (rename(&v, 1), c)).collect();
        mx == my
    };
    match (a, b) {
        (Formula::Cmp(l1, o1, r1), Formula::Cmp(l2, o2, r2)) => {
            // Normalize both sides to lhs - rhs and compare with the operator.
            o1 == o2
                && term_eq(
                    &Term::Sub(Box::new(l1.clone()), Box::new(r1.clone())),
                    &Term::Sub(Box::new(l2.clone()), Box::new(r2.clone())),
                    pairs,
                )
        }
        (Formula::Congruence(t1, m1, r1), Formula::Congruence(t2, m2, r2)) => {
            m1 == m2 && r1 == r2 && term_eq(t1, t2, pairs)
        }
        (Formula::Not(x), Formula::Not(y)) => alpha_eq_rec(x, y, pairs),
        (Formula::And(x1, y1), Formula::And(x2, y2))
        | (Formula::Or(x1, y1), Formula::Or(x2, y2))
        | (Formula::Implies(x1, y1), Formula::Implies(x2, y2))
        | (Formula::Iff(x1, y1), Formula::Iff(x2, y2)) => {
            alpha_eq_rec(x1, x2, pairs) && alpha_eq_rec(y1, y2, pairs)
        }
        (Formula::Exists(v1, b1), Formula::Exists(v2, b2))
        | (Formula::Forall(v1, b1), Formula::Forall(v2, b2)) => {
            pairs.push((v1.clone(), v2.clone()));
            let r = alpha_eq_rec(b1, b2, pairs);
            pairs.pop();
            r
        }
        _ => false,
    }
}

pub(crate) trait ModFloorExt {
    fn mod_floor_big(self, m: &BigInt) -> BigInt;
}

impl ModFloorExt for BigInt {
    fn mod_floor_big(self, m: &BigInt) -> BigInt {
        use num::Integer;
        self.mod_floor(m)
    }
}
