//! Semilinear sets: finite unions of `{base} + N v_1 + ... + N v_k`.

use crate::formula::{CmpOp, Formula, Term};

/// One linear component: a base point plus nonnegative integer combinations
/// of finitely many generator vectors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearComponent {
    pub base: Vec<i64>,
    pub generators: Vec<Vec<i64>>,
}

/// A finite union of linear components.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SemiLinearSet {
    pub components: Vec<LinearComponent>,
}

impl SemiLinearSet {
    pub fn new(components: Vec<LinearComponent>) -> SemiLinearSet {
        assert!(!components.is_empty(), "a semilinear set needs a component");
        let dim = components[0].base.len();
        for c in &components {
            assert_eq!(c.base.len(), dim);
            assert!(c.generators.iter().all(|g| g.len() == dim));
        }
        SemiLinearSet { components }
    }

    pub fn dim(&self) -> usize {
        self.components[0].base.len()
    }

    /// The defining formula over variables `x1..xd`: a disjunction with one
    /// existential nonnegative coefficient per generator.
    pub fn to_formula(&self) -> Formula {
        let dim = self.dim();
        let vars: Vec<String> = (1..=dim).map(|i| format!("x{i}")).collect();
        let disjuncts: Vec<Formula> = self
            .components
            .iter()
            .map(|component| component_formula(component, &vars))
            .collect();
        Formula::or_all(disjuncts)
    }

    /// Direct membership by bounded cone enumeration, for cross-checking.
    /// Coefficients are searched up to `coeff_bound` per generator.
    pub fn contains_bounded(&self, p: &[i64], coeff_bound: i64) -> bool {
        self.components.iter().any(|component| {
            let residual: Vec<i64> = p
                .iter()
                .zip(&component.base)
                .map(|(&a, &b)| a - b)
                .collect();
            cone_search(&residual, &component.generators, 0, coeff_bound)
        })
    }
}

fn cone_search(residual: &[i64], generators: &[Vec<i64>], idx: usize, bound: i64) -> bool {
    if idx == generators.len() {
        return residual.iter().all(|&c| c == 0);
    }
    let g = &generators[idx];
    let mut current = residual.to_vec();
    for _ in 0..=bound {
        if cone_search(&current, generators, idx + 1, bound) {
            return true;
        }
        for (c, &gi) in current.iter_mut().zip(g) {
            *c -= gi;
        }
    }
    false
}

fn component_formula(component: &LinearComponent, vars: &[String]) -> Formula {
    let k = component.generators.len();
    let lambda_names: Vec<String> = (1..=k).map(|i| format!("l{i}")).collect();
    // x_j = base_j + sum_i l_i * v_ij, plus l_i >= 0 for every generator.
    let mut conjuncts: Vec<Formula> = Vec::new();
    for (j, var) in vars.iter().enumerate() {
        let mut rhs = Term::int(component.base[j]);
        for (i, generator) in component.generators.iter().enumerate() {
            if generator[j] != 0 {
                rhs = rhs.add(Term::scaled(generator[j], &lambda_names[i]));
            }
        }
        conjuncts.push(Formula::cmp(Term::var(var), CmpOp::Eq, rhs));
    }
    for name in &lambda_names {
        conjuncts.push(Formula::cmp(Term::var(name), CmpOp::Ge, Term::int(0)));
    }
    let mut body = Formula::and_all(conjuncts);
    for name in lambda_names.iter().rev() {
        body = Formula::exists(name, body);
    }
    body
}
