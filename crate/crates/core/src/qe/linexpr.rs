use crate::formula::{Term, VarName};
use num::bigint::BigInt;
use num::Zero;
use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

/// A linear expression `sum of coeff*var + constant` over internal variables.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct LinExpr {
    pub coeffs: BTreeMap<VarName, BigInt>,
    pub constant: BigInt,
}

impl LinExpr {
    pub fn constant(k: impl Into<BigInt>) -> Self {
        LinExpr {
            coeffs: BTreeMap::new(),
            constant: k.into(),
        }
    }

    pub fn from_term(t: &Term) -> Self {
        let (coeffs, constant) = t.linearize();
        LinExpr { coeffs, constant }
    }

    pub fn coeff(&self, v: &VarName) -> BigInt {
        self.coeffs.get(v).cloned().unwrap_or_else(BigInt::zero)
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.is_empty()
    }

    fn normalized(mut self) -> Self {
        self.coeffs.retain(|_, c| !c.is_zero());
        self
    }

    /// Removes `v` from the expression, returning its coefficient.
    pub fn take_var(&mut self, v: &VarName) -> BigInt {
        self.coeffs.remove(v).unwrap_or_else(BigInt::zero)
    }

    /// Substitutes `v := e`, where the coefficient of `v` is `c`.
    pub fn substitute(&self, v: &VarName, e: &LinExpr) -> LinExpr {
        let mut out = self.clone();
        let c = out.take_var(v);
        if c.is_zero() {
            return out;
        }
        out + e.clone() * c
    }

    /// Total bit size of all coefficients and the constant.
    pub fn bit_size(&self) -> u64 {
        self.coeffs
            .values()
            .map(|c| c.bits())
            .sum::<u64>()
            + self.constant.bits()
    }
}

impl Add for LinExpr {
    type Output = LinExpr;
    fn add(mut self, rhs: LinExpr) -> LinExpr {
        for (v, c) in rhs.coeffs {
            *self.coeffs.entry(v).or_insert_with(BigInt::zero) += c;
        }
        self.constant += rhs.constant;
        self.normalized()
    }
}

impl Sub for LinExpr {
    type Output = LinExpr;
    fn sub(self, rhs: LinExpr) -> LinExpr {
        self + (-rhs)
    }
}

impl Neg for LinExpr {
    type Output = LinExpr;
    fn neg(mut self) -> LinExpr {
        for c in self.coeffs.values_mut() {
            *c = -c.clone();
        }
        self.constant = -self.constant;
        self
    }
}

impl Mul<BigInt> for LinExpr {
    type Output = LinExpr;
    fn mul(mut self, k: BigInt) -> LinExpr {
        for c in self.coeffs.values_mut() {
            *c = c.clone() * &k;
        }
        self.constant *= k;
        self.normalized()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(n: &str) -> VarName {
        VarName::source(n)
    }

    #[test]
    fn substitution_folds_through() {
        // 2x + y - 1 with x := 3z + 4  ->  6z + y + 7
        let mut e = LinExpr::constant(-1);
        e.coeffs.insert(v("x"), BigInt::from(2));
        e.coeffs.insert(v("y"), BigInt::from(1));
        let mut r = LinExpr::constant(4);
        r.coeffs.insert(v("z"), BigInt::from(3));
        let s = e.substitute(&v("x"), &r);
        assert_eq!(s.coeff(&v("z")), BigInt::from(6));
        assert_eq!(s.coeff(&v("y")), BigInt::from(1));
        assert_eq!(s.constant, BigInt::from(7));
        assert_eq!(s.coeff(&v("x")), BigInt::zero());
    }
}
