use super::linexpr::LinExpr;
use super::nnf::{dnf, lcm_big, to_ir, Ir};
use super::qfnf::Qfnf;
use super::{QeConfig, QeError};
use crate::formula::{Formula, VarName};
use num::bigint::BigInt;
use num::{One, Signed, ToPrimitive, Zero};
use std::sync::Arc;

/// Eliminates all quantifiers from `f`, producing the disjunction-of-cells
/// normal form over the given variable order.
///
/// Every free variable of `f` must appear in `var_order`; unused entries of
/// `var_order` become unconstrained axes. Universal quantifiers are handled
/// as negated existentials; existentials are eliminated innermost first with
/// Cooper's method in its upper-bound form.
pub fn eliminate(f: &Formula, var_order: &[&str], config: &QeConfig) -> Result<Qfnf, QeError> {
    for v in f.free_vars() {
        if v.tag != 0 {
            return Err(QeError::UnlistedFreeVariable(format!(
                "{}#{}",
                v.base, v.tag
            )));
        }
        if !var_order.contains(&v.base.as_str()) {
            return Err(QeError::UnlistedFreeVariable(v.base));
        }
    }
    let ir = to_ir(f);
    let qf = eliminate_ir(ir, config)?;
    let context = f.render();
    let cells = dnf(&qf, config, &context)?;
    Qfnf::from_raw_cells(var_order, cells, config, &context)
}

fn eliminate_ir(ir: Ir, config: &QeConfig) -> Result<Ir, QeError> {
    match ir {
        Ir::And(xs) => Ok(Ir::and(
            xs.into_iter()
                .map(|x| eliminate_ir(x, config))
                .collect::<Result<Vec<_>, _>>()?,
        )),
        Ir::Or(xs) => Ok(Ir::or(
            xs.into_iter()
                .map(|x| eliminate_ir(x, config))
                .collect::<Result<Vec<_>, _>>()?,
        )),
        Ir::Exists(v, body, src) => {
            let inner = eliminate_ir(*body, config)?;
            cooper_exists(&v, inner, &src, config)
        }
        Ir::Forall(v, body, src) => {
            let inner = eliminate_ir(*body, config)?;
            Ok(cooper_exists(&v, inner.dual(), &src, config)?.dual())
        }
        leaf => Ok(leaf),
    }
}

/// One step of Cooper's method: `exists t. phi(t)` for quantifier-free `phi`.
///
/// With upper boundary terms `A` (from atoms `t <= a`) and `delta` the lcm of
/// the variable's scaled coefficient and all congruence moduli involving it:
///
/// ```text
/// exists t. phi  <=>  OR_{j in [0,delta)} phi_inf[t := j]
///                  |  OR_{a in A} OR_{j in [0,delta)} phi[t := a - j]
/// ```
///
/// where `phi_inf` replaces lower-bound atoms by true and upper-bound atoms
/// by false (the limit of large `t`).
fn cooper_exists(v: &VarName, phi: Ir, src: &Arc<str>, config: &QeConfig) -> Result<Ir, QeError> {
    let limit_err = |what: String| QeError::ResourceLimit {
        limit: what,
        subformula: src.to_string(),
    };

    // Scale factor: lcm of |coefficient of v| over all atoms.
    let mut lambda = BigInt::one();
    let mut occurs = false;
    visit_atoms(&phi, &mut |e: &LinExpr, _| {
        let c = e.coeff(v);
        if !c.is_zero() {
            occurs = true;
            lambda = lcm_big(&lambda, &c);
        }
    });
    if !occurs {
        return Ok(phi);
    }

    // Rewrite every atom so v's coefficient is (+/-)lambda, then read it as a
    // unit coefficient on t = lambda*v, with lambda | t kept as a congruence.
    let t = VarName {
        base: "_qe".into(),
        tag: u32::MAX,
    };
    let scaled = scale_var(&phi, v, &lambda, &t);
    let divisibility = Ir::Cong(unit_term(&t), lambda.clone());
    let phi_t = Ir::and(vec![scaled, divisibility]);

    // delta: lcm of lambda and the moduli of congruences involving t.
    let mut delta = lambda.clone();
    visit_atoms(&phi_t, &mut |e: &LinExpr, m: Option<&BigInt>| {
        if let Some(m) = m {
            if !e.coeff(&t).is_zero() {
                delta = lcm_big(&delta, m);
            }
        }
    });
    let delta_u64 = delta
        .to_u64()
        .filter(|&d| d <= config.max_cells as u64)
        .ok_or_else(|| limit_err(format!("elimination modulus {delta}")))?;

    // Upper boundary terms: atoms -t + r >= 0 contribute r.
    let mut uppers: Vec<LinExpr> = Vec::new();
    visit_geqs(&phi_t, &mut |e: &LinExpr| {
        let c = e.coeff(&t);
        if c == BigInt::from(-1) {
            let mut r = e.clone();
            r.take_var(&t);
            uppers.push(r);
        }
    });
    uppers.sort();
    uppers.dedup();

    let branch_count = (delta_u64 as usize).saturating_mul(1 + uppers.len());
    if branch_count > config.max_cells {
        return Err(limit_err(format!("{branch_count} elimination branches")));
    }

    let mut branches = Vec::with_capacity(branch_count);
    for j in 0..delta_u64 {
        let j_expr = LinExpr::constant(BigInt::from(j));
        branches.push(substitute_inf(&phi_t, &t, &j_expr));
    }
    for a in &uppers {
        for j in 0..delta_u64 {
            let value = a.clone() - LinExpr::constant(BigInt::from(j));
            branches.push(substitute_atoms(&phi_t, &t, &value));
        }
    }
    let result = Ir::or(branches);

    let mut bits = 0u64;
    visit_atoms(&result, &mut |e: &LinExpr, _| bits += e.bit_size());
    if bits > config.coeff_bit_budget {
        return Err(limit_err(format!("{bits} coefficient bits")));
    }
    Ok(result)
}

fn unit_term(v: &VarName) -> LinExpr {
    let mut e = LinExpr::constant(0);
    e.coeffs.insert(v.clone(), BigInt::one());
    e
}

fn visit_atoms(ir: &Ir, f: &mut impl FnMut(&LinExpr, Option<&BigInt>)) {
    match ir {
        Ir::Geq(e) => f(e, None),
        Ir::Cong(e, m) | Ir::NotCong(e, m) => f(e, Some(m)),
        Ir::And(xs) | Ir::Or(xs) => xs.iter().for_each(|x| visit_atoms(x, f)),
        Ir::Exists(_, b, _) | Ir::Forall(_, b, _) => visit_atoms(b, f),
        Ir::True | Ir::False => {}
    }
}

fn visit_geqs(ir: &Ir, f: &mut impl FnMut(&LinExpr)) {
    match ir {
        Ir::Geq(e) => f(e),
        Ir::And(xs) | Ir::Or(xs) => xs.iter().for_each(|x| visit_geqs(x, f)),
        Ir::Exists(_, b, _) | Ir::Forall(_, b, _) => visit_geqs(b, f),
        _ => {}
    }
}

/// Multiplies atoms through so that `v`'s coefficient becomes `+/-lambda`,
/// then renames that occurrence to a unit coefficient on `t`.
fn scale_var(ir: &Ir, v: &VarName, lambda: &BigInt, t: &VarName) -> Ir {
    match ir {
        Ir::Geq(e) => {
            let c = e.coeff(v);
            if c.is_zero() {
                return Ir::Geq(e.clone());
            }
            let k = lambda / c.abs();
            let mut scaled = e.clone() * k;
            let cv = scaled.take_var(v);
            scaled
                .coeffs
                .insert(t.clone(), if cv.is_positive() { BigInt::one() } else { -BigInt::one() });
            Ir::Geq(scaled)
        }
        Ir::Cong(e, m) | Ir::NotCong(e, m) => {
            let c = e.coeff(v);
            let (e2, m2) = if c.is_zero() {
                (e.clone(), m.clone())
            } else {
                let k = lambda / c.abs();
                let mut scaled = e.clone() * k.clone();
                let cv = scaled.take_var(v);
                scaled.coeffs.insert(
                    t.clone(),
                    if cv.is_positive() { BigInt::one() } else { -BigInt::one() },
                );
                (scaled, m * k)
            };
            if matches!(ir, Ir::Cong(_, _)) {
                Ir::Cong(e2, m2)
            } else {
                Ir::NotCong(e2, m2)
            }
        }
        Ir::And(xs) => Ir::and(xs.iter().map(|x| scale_var(x, v, lambda, t)).collect()),
        Ir::Or(xs) => Ir::or(xs.iter().map(|x| scale_var(x, v, lambda, t)).collect()),
        Ir::True => Ir::True,
        Ir::False => Ir::False,
        Ir::Exists(..) | Ir::Forall(..) => unreachable!("quantifier below elimination point"),
    }
}

/// `phi[t := value]` on every atom.
fn substitute_atoms(ir: &Ir, t: &VarName, value: &LinExpr) -> Ir {
    match ir {
        Ir::Geq(e) => Ir::Geq(e.substitute(t, value)).fold_constants(),
        Ir::Cong(e, m) => Ir::Cong(e.substitute(t, value), m.clone()).fold_constants(),
        Ir::NotCong(e, m) => Ir::NotCong(e.substitute(t, value), m.clone()).fold_constants(),
        Ir::And(xs) => Ir::and(xs.iter().map(|x| substitute_atoms(x, t, value)).collect()),
        Ir::Or(xs) => Ir::or(xs.iter().map(|x| substitute_atoms(x, t, value)).collect()),
        Ir::True => Ir::True,
        Ir::False => Ir::False,
        Ir::Exists(..) | Ir::Forall(..) => unreachable!("quantifier below elimination point"),
    }
}

/// The large-`t` limit: lower bounds on `t` hold, upper bounds fail, and
/// congruences keep only the residue `value`.
fn substitute_inf(ir: &Ir, t: &VarName, value: &LinExpr) -> Ir {
    match ir {
        Ir::Geq(e) => {
            let c = e.coeff(t);
            if c.is_zero() {
                Ir::Geq(e.clone())
            } else if c.is_positive() {
                Ir::True
            } else {
                Ir::False
            }
        }
        Ir::Cong(e, m) => Ir::Cong(e.substitute(t, value), m.clone()).fold_constants(),
        Ir::NotCong(e, m) => Ir::NotCong(e.substitute(t, value), m.clone()).fold_constants(),
        Ir::And(xs) => Ir::and(xs.iter().map(|x| substitute_inf(x, t, value)).collect()),
        Ir::Or(xs) => Ir::or(xs.iter().map(|x| substitute_inf(x, t, value)).collect()),
        Ir::True => Ir::True,
        Ir::False => Ir::False,
        Ir::Exists(..) | Ir::Forall(..) => unreachable!("quantifier below elimination point"),
    }
}
