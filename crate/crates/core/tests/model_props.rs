//! Built-in examples against from-scratch evaluations of their defining
//! formulas, plus word and semilinear invariants.

mod common;

use common::{BoundedOracle, EX31_FORMULA, EX32_FORMULA};
use defilab_core::geom::Window;
use defilab_core::qe::{eliminate, QeConfig};
use defilab_core::set::{
    checkerboard, example31, example32, fibonacci_set, fibonacci_word_prefix, singleton_origin,
    toeplitz_set, LinearComponent, SemiLinearSet,
};
use defilab_core::Formula;

/// The symbolic examples agree with a bounded-quantifier evaluation of the
/// original quantified formulas on [-20, 40]^2.
#[test]
fn symbolic_examples_match_their_defining_formulas() {
    let window = Window::new(vec![(-20, 40), (-20, 40)]).unwrap();
    for (set, formula_text) in [(example31(), EX31_FORMULA), (example32(), EX32_FORMULA)] {
        let f = Formula::parse(formula_text).unwrap();
        let oracle = BoundedOracle::build(&f, 40).unwrap();
        let evaluator = set.evaluator();
        for p in window.points() {
            assert_eq!(
                evaluator.contains(&p),
                oracle.eval(&p),
                "{} at {p:?}",
                set.name()
            );
        }
    }
}

#[test]
fn checkerboard_and_singleton_match_direct_definitions() {
    let window = Window::new(vec![(-20, 40), (-20, 40)]).unwrap();
    let cb = checkerboard();
    let origin = singleton_origin(2);
    for p in window.points() {
        assert_eq!(cb.membership(&p), (p[0] + p[1]).rem_euclid(2) == 0);
        assert_eq!(origin.membership(&p), p == [0, 0]);
    }
}

/// The length-n prefix of the nonnegative part equals the morphism iterate
/// truncated, for every iterate long enough.
#[test]
fn fibonacci_prefixes_are_morphism_iterates() {
    fn iterate(k: usize) -> Vec<u8> {
        let mut w = vec![0u8];
        for _ in 0..k {
            let mut next = Vec::with_capacity(w.len() * 2);
            for &c in &w {
                if c == 0 {
                    next.extend_from_slice(&[0, 1]);
                } else {
                    next.push(0);
                }
            }
            w = next;
        }
        w
    }
    let n = 200;
    let prefix = fibonacci_word_prefix(n);
    for k in 0..=14 {
        let it = iterate(k);
        if it.len() >= n {
            assert_eq!(&prefix[..n], &it[..n], "iterate {k}");
        } else {
            assert_eq!(&prefix[..it.len()], &it[..], "iterate {k}");
        }
    }
}

#[test]
fn fibonacci_set_reads_the_two_sided_word() {
    let g = fibonacci_set(2);
    let prefix = fibonacci_word_prefix(64);
    for x in -10i64..64 {
        let expected = if x < 0 { true } else { prefix[x as usize] == 1 };
        for y in [-7i64, 0, 13] {
            assert_eq!(g.membership(&[x, y]), expected, "at ({x},{y})");
        }
    }
}

#[test]
fn toeplitz_matches_its_closed_form() {
    let t = toeplitz_set();
    for i in -8i64..=300 {
        for j in -2i64..=9 {
            let expected = i >= 1 && j >= 0 && i % (1i64 << (j + 1)) == 0;
            assert_eq!(t.membership(&[i, j]), expected, "at ({i},{j})");
        }
    }
}

/// semilinear_to_formula followed by elimination agrees with direct cone
/// enumeration on all window points.
#[test]
fn semilinear_formula_matches_cone_enumeration() {
    let cases = vec![
        SemiLinearSet::new(vec![LinearComponent {
            base: vec![0, 0],
            generators: vec![vec![1, 1]],
        }]),
        SemiLinearSet::new(vec![LinearComponent {
            base: vec![4, 3],
            generators: vec![vec![1, 0], vec![1, 2]],
        }]),
        SemiLinearSet::new(vec![
            LinearComponent {
                base: vec![2, 5],
                generators: vec![],
            },
            LinearComponent {
                base: vec![-3, 0],
                generators: vec![vec![0, 2], vec![3, 1]],
            },
        ]),
    ];
    let window = Window::new(vec![(-6, 20), (-6, 20)]).unwrap();
    for sl in cases {
        let f = sl.to_formula();
        let q = eliminate(&f, &["x1", "x2"], &QeConfig::default()).unwrap();
        for p in window.points() {
            assert_eq!(
                q.evaluate(&p).unwrap(),
                sl.contains_bounded(&p, 40),
                "at {p:?} for {sl:?}"
            );
        }
    }
}

/// The second disjunct of the running example is exactly the two-generator
/// cone from (4, 3).
#[test]
fn example32_cone_equals_semilinear_component() {
    let cone = SemiLinearSet::new(vec![LinearComponent {
        base: vec![4, 3],
        generators: vec![vec![1, 0], vec![1, 2]],
    }]);
    let f = cone.to_formula();
    let q = eliminate(&f, &["x1", "x2"], &QeConfig::default()).unwrap();
    let m = example32();
    let diag = |p: &[i64]| p[0] == p[1] && p[0] >= 0;
    for p in Window::new(vec![(0, 30), (0, 30)]).unwrap().points() {
        let in_cone = q.evaluate(&p).unwrap();
        assert_eq!(m.membership(&p), in_cone || diag(&p), "at {p:?}");
    }
}
