// One-off deep soundness sweep (not part of the test suite).
// Mirrors the acceptance oracle inline to avoid depending on test modules.
use defilab_core::formula::{CmpOp, Formula, Term};
use defilab_core::geom::Window;
use defilab_core::qe::{eliminate, QeConfig};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use std::collections::BTreeMap;
use num::BigInt;

const VARS: [&str; 3] = ["x", "y", "z"];

fn random_term(rng: &mut StdRng, vars: &[&str]) -> Term {
    let parts = rng.gen_range(1..=2);
    let mut t: Option<Term> = None;
    for _ in 0..parts {
        let piece = if rng.gen_bool(0.8) {
            let v = vars[rng.gen_range(0..vars.len())];
            match rng.gen_range(-4..=4i64) {
                0 => Term::int(0),
                1 => Term::var(v),
                -1 => Term::Neg(Box::new(Term::var(v))),
                c => Term::scaled(c, v),
            }
        } else { Term::int(rng.gen_range(-4..=4i64)) };
        t = Some(match t { None => piece, Some(a) => if rng.gen_bool(0.5) { a.add(piece) } else { a.sub(piece) } });
    }
    t.unwrap()
}

fn random_atom(rng: &mut StdRng, vars: &[&str]) -> Formula {
    if rng.gen_bool(0.25) {
        let m = rng.gen_range(2..=4i64);
        Formula::congruence(random_term(rng, vars), m, rng.gen_range(0..m))
    } else {
        let ops = [CmpOp::Lt, CmpOp::Le, CmpOp::Eq, CmpOp::Ne, CmpOp::Ge, CmpOp::Gt];
        Formula::cmp(random_term(rng, vars), ops[rng.gen_range(0..ops.len())], random_term(rng, vars))
    }
}

fn random_qf(rng: &mut StdRng, vars: &[&str], atoms: usize) -> Formula {
    if atoms <= 1 { return random_atom(rng, vars); }
    let left = rng.gen_range(1..atoms);
    let a = random_qf(rng, vars, left);
    let b = random_qf(rng, vars, atoms - left);
    match rng.gen_range(0..10) {
        0..=3 => Formula::and(a, b),
        4..=7 => Formula::or(a, b),
        8 => Formula::implies(a, b),
        _ => if rng.gen_bool(0.5) { Formula::iff(a, b) } else { Formula::not(Formula::and(a, b)) },
    }
}

// slow but simple reference: scan both quantifiers over a FIXED range derived
// from the eliminated form's profile (independent evaluation route)
fn brute(f: &Formula, asg: &mut BTreeMap<defilab_core::VarName, BigInt>, bound: i64) -> bool {
    match f {
        Formula::Exists(v, body) => {
            for t in -bound..=bound {
                asg.insert(v.clone(), BigInt::from(t));
                if brute(body, asg, bound) { asg.remove(v); return true; }
            }
            asg.remove(v);
            false
        }
        Formula::Forall(v, body) => {
            for t in -bound..=bound {
                asg.insert(v.clone(), BigInt::from(t));
                if !brute(body, asg, bound) { asg.remove(v); return false; }
            }
            asg.remove(v);
            true
        }
        Formula::Not(x) => !brute(x, asg, bound),
        Formula::And(a, b) => brute(a, asg, bound) && brute(b, asg, bound),
        Formula::Or(a, b) => brute(a, asg, bound) || brute(b, asg, bound),
        Formula::Implies(a, b) => !brute(a, asg, bound) || brute(b, asg, bound),
        Formula::Iff(a, b) => brute(a, asg, bound) == brute(b, asg, bound),
        qf => qf.eval_qf(asg).unwrap(),
    }
}

fn main() {
    let mut rng = StdRng::seed_from_u64(0xFEEDFACE);
    let config = QeConfig::default();
    let mut tested = 0u32;
    let mut skipped = 0u32;
    let mut mismatch = 0u32;
    while tested < 500 {
        let nvars = rng.gen_range(1..=3);
        let vars: Vec<&str> = VARS[..nvars].to_vec();
        let quantified = rng.gen_range(0..=2usize.min(nvars));
        let atom_count = rng.gen_range(1..=6);
        let mut f = random_qf(&mut rng, &vars, atom_count);
        for i in 0..quantified {
            let var = vars[nvars - 1 - i];
            f = if rng.gen_bool(0.5) { Formula::exists(var, f) } else { Formula::forall(var, f) };
        }
        let frees: Vec<String> = f.free_vars().iter().map(|v| v.base.clone()).collect();
        let refs: Vec<&str> = frees.iter().map(|s| s.as_str()).collect();
        let q = match eliminate(&f, &refs, &config) { Ok(q) => q, Err(_) => { skipped += 1; continue; } };
        // bound from the final profile; keep the brute force affordable
        let profile = q.max_constant().to_string().parse::<i64>().unwrap_or(i64::MAX/4)
            + q.max_coeff_sum().to_string().parse::<i64>().unwrap_or(i64::MAX/4) * 9
            + q.modulus().to_string().parse::<i64>().unwrap_or(i64::MAX/4) + 6;
        let cost = (2*profile+1).pow(quantified as u32) as i128 * 19i128.pow((nvars-quantified) as u32);
        if profile > 150 || cost > 2_500_000 { skipped += 1; continue; }
        let window = if frees.is_empty() { vec![vec![]] } else {
            Window::cube(frees.len(), 9).points().collect::<Vec<_>>()
        };
        for p in window {
            let mut asg: BTreeMap<_, _> = frees.iter().zip(&p)
                .map(|(n, &v)| (defilab_core::VarName::source(n), BigInt::from(v))).collect();
            let direct = brute(&f, &mut asg, profile);
            if q.evaluate(&p).unwrap() != direct {
                mismatch += 1;
                println!("MISMATCH at {p:?}: {}", f.render());
                break;
            }
        }
        tested += 1;
        if tested % 100 == 0 { println!("... {tested} tested, {skipped} skipped"); }
    }
    println!("sweep done: {tested} tested, {skipped} skipped, {mismatch} mismatches");
}
