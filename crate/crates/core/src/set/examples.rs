//! Built-in example sets addressable by name.

use super::fibonacci::two_sided_digit;
use super::{MembershipOracle, PointSet};
use crate::qe::{CellSpec, Qfnf, QeConfig};
use std::sync::Arc;

/// Registry names accepted by [`example_by_name`].
pub fn example_names() -> &'static [&'static str] {
    &[
        "fibonacci",
        "toeplitz",
        "ex31",
        "ex31-strict",
        "ex32",
        "origin",
        "checkerboard",
    ]
}

/// Looks up a built-in example. Two-dimensional variants are returned for
/// the dimension-parametric families.
pub fn example_by_name(name: &str) -> Option<PointSet> {
    match name {
        "fibonacci" => Some(fibonacci_set(2)),
        "toeplitz" => Some(toeplitz_set()),
        "ex31" => Some(example31()),
        "ex31-strict" => Some(example31_strict()),
        "ex32" => Some(example32()),
        "origin" => Some(singleton_origin(2)),
        "checkerboard" => Some(checkerboard()),
        _ => None,
    }
}

struct FibonacciOracle;

impl MembershipOracle for FibonacciOracle {
    fn contains(&self, p: &[i64]) -> bool {
        two_sided_digit(p[0]) == 1
    }
}

/// The set `{x : g(x_1) = 1}` where `g` is all ones at negative indices and
/// the Fibonacci word at nonnegative ones.
pub fn fibonacci_set(dim: usize) -> PointSet {
    assert!(dim >= 1);
    PointSet::oracle("fibonacci", dim, Arc::new(FibonacciOracle))
        .with_recurrence_radius_hint(16)
}

struct ToeplitzOracle;

impl MembershipOracle for ToeplitzOracle {
    fn contains(&self, p: &[i64]) -> bool {
        let (i, j) = (p[0], p[1]);
        if j < 0 || i < 1 {
            return false;
        }
        // member iff i is a positive multiple of 2^(j+1)
        if j >= 62 {
            return false; // 2^(j+1) exceeds any positive i64
        }
        i % (1i64 << (j + 1)) == 0
    }
}

/// The Toeplitz-like set `{(i, j) : i, j >= 0, i = n * 2^(j+1), n > 0}`.
/// Procedural only: the defining condition is exponential in `j`.
pub fn toeplitz_set() -> PointSet {
    PointSet::oracle("toeplitz", 2, Arc::new(ToeplitzOracle))
}

fn symbolic(name: &str, cells: Vec<CellSpec>, hint: i64) -> PointSet {
    let qfnf = Qfnf::from_cells(&["x", "y"], cells, &QeConfig::default())
        .expect("built-in example cells are valid");
    PointSet::symbolic(name, qfnf).with_recurrence_radius_hint(hint)
}

/// The union of the diagonal `{(k, k) : k >= 0}` and the horizontal line
/// `{(k, 1) : k >= 0}` (the figure's reading of the first running example).
pub fn example31() -> PointSet {
    symbolic(
        "ex31",
        vec![
            CellSpec {
                // x = y, x >= 0
                inequalities: vec![
                    (vec![1, -1], 0),
                    (vec![-1, 1], 0),
                    (vec![1, 0], 0),
                ],
                congruences: vec![],
            },
            CellSpec {
                // y = 1, x >= 0
                inequalities: vec![
                    (vec![0, 1], 1),
                    (vec![0, -1], -1),
                    (vec![1, 0], 0),
                ],
                congruences: vec![],
            },
        ],
        24,
    )
}

/// The literal conjunctive reading of the same formula: the single point
/// `(1, 1)`.
pub fn example31_strict() -> PointSet {
    symbolic(
        "ex31-strict",
        vec![CellSpec {
            inequalities: vec![
                (vec![1, 0], 1),
                (vec![-1, 0], -1),
                (vec![0, 1], 1),
                (vec![0, -1], -1),
            ],
            congruences: vec![],
        }],
        8,
    )
}

/// Diagonal plus the cone `{(4,3) + a(1,0) + b(1,2) : a, b >= 0}`, in its
/// quantifier-free three-disjunct form.
pub fn example32() -> PointSet {
    let nonneg = vec![(vec![1, 0], 0), (vec![0, 1], 0)];
    let with_nonneg = |mut extra: Vec<(Vec<i64>, i64)>| {
        extra.extend(nonneg.iter().cloned());
        extra
    };
    symbolic(
        "ex32",
        vec![
            CellSpec {
                // y >= x, 2x >= y + 5, y odd
                inequalities: with_nonneg(vec![(vec![-1, 1], 0), (vec![2, -1], 5)]),
                congruences: vec![(vec![0, 1], 2, 1)],
            },
            CellSpec {
                // x = y
                inequalities: with_nonneg(vec![(vec![-1, 1], 0), (vec![1, -1], 0)]),
                congruences: vec![],
            },
            CellSpec {
                // x >= y, y >= 3, y odd
                inequalities: with_nonneg(vec![(vec![1, -1], 0), (vec![0, 1], 3)]),
                congruences: vec![(vec![0, 1], 2, 1)],
            },
        ],
        48,
    )
}

/// The singleton `{0} in Z^d`.
pub fn singleton_origin(dim: usize) -> PointSet {
    assert!(dim >= 1);
    let vars: Vec<String> = (1..=dim).map(|i| format!("x{i}")).collect();
    let var_refs: Vec<&str> = vars.iter().map(|s| s.as_str()).collect();
    let mut inequalities = Vec::new();
    for i in 0..dim {
        let mut up = vec![0i64; dim];
        up[i] = 1;
        let mut down = vec![0i64; dim];
        down[i] = -1;
        inequalities.push((up, 0));
        inequalities.push((down, 0));
    }
    let qfnf = Qfnf::from_cells(
        &var_refs,
        vec![CellSpec {
            inequalities,
            congruences: vec![],
        }],
        &QeConfig::default(),
    )
    .expect("singleton cells are valid");
    PointSet::symbolic("origin", qfnf).with_recurrence_radius_hint(2)
}

/// The parity checkerboard `{(x, y) : x + y even}`.
pub fn checkerboard() -> PointSet {
    symbolic(
        "checkerboard",
        vec![CellSpec {
            inequalities: vec![],
            congruences: vec![(vec![1, 1], 2, 0)],
        }],
        1,
    )
}
