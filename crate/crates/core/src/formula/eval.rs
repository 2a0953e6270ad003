use super::ast::{Formula, Term, VarName};
use num::bigint::BigInt;
use num::Integer;
use std::collections::BTreeMap;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("formula contains a quantifier; eliminate first")]
    Quantified,
    #[error("unbound variable '{0}'")]
    Unbound(String),
}

impl Term {
    pub fn eval(&self, asg: &BTreeMap<VarName, BigInt>) -> Result<BigInt, EvalError> {
        let (coeffs, k) = self.linearize();
        let mut acc = k;
        for (v, c) in coeffs {
            let value = asg
                .get(&v)
                .ok_or_else(|| EvalError::Unbound(v.base.clone()))?;
            acc += c * value;
        }
        Ok(acc)
    }
}

impl Formula {
    /// Evaluates a quantifier-free formula under the given assignment.
    pub fn eval_qf(&self, asg: &BTreeMap<VarName, BigInt>) -> Result<bool, EvalError> {
        match self {
            Formula::Cmp(lhs, op, rhs) => Ok(op.holds(&lhs.eval(asg)?, &rhs.eval(asg)?)),
            Formula::Congruence(t, m, r) => Ok(t.eval(asg)?.mod_floor(m) == *r),
            Formula::Not(f) => Ok(!f.eval_qf(asg)?),
            Formula::And(a, b) => Ok(a.eval_qf(asg)? && b.eval_qf(asg)?),
            Formula::Or(a, b) => Ok(a.eval_qf(asg)? || b.eval_qf(asg)?),
            Formula::Implies(a, b) => Ok(!a.eval_qf(asg)? || b.eval_qf(asg)?),
            Formula::Iff(a, b) => Ok(a.eval_qf(asg)? == b.eval_qf(asg)?),
            Formula::Exists(_, _) | Formula::Forall(_, _) => Err(EvalError::Quantified),
        }
    }

    /// Convenience wrapper taking source-level variable names.
    pub fn eval_qf_at(&self, values: &[(&str, i64)]) -> Result<bool, EvalError> {
        let asg: BTreeMap<VarName, BigInt> = values
            .iter()
            .map(|(n, v)| (VarName::source(n), BigInt::from(*v)))
            .collect();
        self.eval_qf(&asg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn evaluates_atoms_and_connectives() {
        let f = Formula::parse("(x < y) -> (x + 1 <= y)").unwrap();
        assert_eq!(f.eval_qf_at(&[("x", 1), ("y", 2)]), Ok(true));
        assert_eq!(f.eval_qf_at(&[("x", 5), ("y", 2)]), Ok(true));
        let g = Formula::parse("2*x % 4 = 2").unwrap();
        assert_eq!(g.eval_qf_at(&[("x", 3)]), Ok(true));
        assert_eq!(g.eval_qf_at(&[("x", 4)]), Ok(false));
        assert_eq!(g.eval_qf_at(&[("x", -1)]), Ok(true));
    }

    #[test]
    fn quantifier_is_rejected() {
        let f = Formula::parse("E y. x = 2*y").unwrap();
        assert_eq!(f.eval_qf_at(&[("x", 2)]), Err(EvalError::Quantified));
    }
}
