use super::ast::{Formula, Term, VarName};
use num::bigint::BigInt;
use num::{One, Signed, Zero};
use std::collections::BTreeMap;
use std::fmt;

impl Formula {
    /// Renders the formula in the grammar's concrete syntax with canonical
    /// parenthesization. `parse(render(f))` is alpha-equivalent to `f`.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let mut scope = Vec::new();
        render_formula(self, &mut scope, true, &mut out);
        out
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

fn render_formula(f: &Formula, scope: &mut Vec<(VarName, String)>, top: bool, out: &mut String) {
    let wrap = |inner: &Formula, scope: &mut Vec<(VarName, String)>, out: &mut String| {
        out.push('(');
        render_formula(inner, scope, false, out);
        out.push(')');
    };
    match f {
        Formula::Cmp(lhs, op, rhs) => {
            render_term(lhs, scope, out);
            out.push(' ');
            out.push_str(op.symbol());
            out.push(' ');
            render_term(rhs, scope, out);
        }
        Formula::Congruence(t, m, r) => {
            render_term(t, scope, out);
            out.push_str(&format!(" % {m} = {r}"));
        }
        Formula::Not(x) => {
            out.push('!');
            wrap(x, scope, out);
        }
        Formula::And(a, b) => {
            wrap(a, scope, out);
            out.push_str(" & ");
            wrap(b, scope, out);
        }
        Formula::Or(a, b) => {
            wrap(a, scope, out);
            out.push_str(" | ");
            wrap(b, scope, out);
        }
        Formula::Implies(a, b) => {
            wrap(a, scope, out);
            out.push_str(" -> ");
            wrap(b, scope, out);
        }
        Formula::Iff(a, b) => {
            wrap(a, scope, out);
            out.push_str(" <-> ");
            wrap(b, scope, out);
        }
        Formula::Exists(v, body) | Formula::Forall(v, body) => {
            let display = pick_display_name(v, body, scope);
            out.push_str(if matches!(f, Formula::Exists(_, _)) {
                "E "
            } else {
                "A "
            });
            out.push_str(&display);
            out.push_str(". ");
            scope.push((v.clone(), display));
            wrap(body, scope, out);
            scope.pop();
        }
    }
    let _ = top;
}

/// Chooses a display name for a binder that cannot capture or be captured by
/// anything visible in `body` under the current scope.
fn pick_display_name(v: &VarName, body: &Formula, scope: &[(VarName, String)]) -> String {
    let mut taken: Vec<String> = scope.iter().map(|(_, d)| d.clone()).collect();
    // Free (source-level) variables of the body keep their own names.
    for fv in body.free_vars() {
        if fv != *v {
            taken.push(fv.base.clone());
        }
    }
    if !taken.contains(&v.base) {
        return v.base.clone();
    }
    let mut i = 2;
    loop {
        let candidate = format!("{}_{}", v.base, i);
        if !taken.contains(&candidate) {
            return candidate;
        }
        i += 1;
    }
}

fn display_of(v: &VarName, scope: &[(VarName, String)]) -> String {
    if v.tag == 0 {
        return v.base.clone();
    }
    for (name, display) in scope.iter().rev() {
        if name == v {
            return display.clone();
        }
    }
    // Unbound internal variable in a hand-built tree; render something legal.
    format!("{}_t{}", v.base, v.tag)
}

/// Terms render from their linearization: `c1*v1 + c2*v2 + ... + k`.
fn render_term(t: &Term, scope: &[(VarName, String)], out: &mut String) {
    let (coeffs, k) = t.linearize();
    let mut first = true;
    let push_part = |sign_negative: bool, body: String, out: &mut String, first: &mut bool| {
        if *first {
            if sign_negative {
                out.push('-');
            }
            out.push_str(&body);
            *first = false;
        } else {
            out.push_str(if sign_negative { " - " } else { " + " });
            out.push_str(&body);
        }
    };
    let ordered: BTreeMap<&VarName, &BigInt> = coeffs.iter().collect();
    for (v, c) in ordered {
        let name = display_of(v, scope);
        let mag = c.abs();
        let body = if mag.is_one() {
            name
        } else {
            format!("{mag}*{name}")
        };
        push_part(c.is_negative(), body, out, &mut first);
    }
    if first {
        out.push_str(&k.to_string());
    } else if !k.is_zero() {
        push_part(k.is_negative(), k.abs().to_string(), out, &mut first);
    }
}
