//! Acceptance suite: one test per criterion, each printing a pass/fail line
//! with its measured values and elapsed time. Run with `--nocapture` to see
//! the lines for passing criteria too.

mod common;

use common::{
    random_formula, BoundedOracle, GeneratorConfig, EX32_FORMULA, MAX_TOTAL_COST,
};
use defilab_core::complexity::{
    block_at, p_count, r_count, stabilized_r, StabilizeOptions,
};
use defilab_core::geom::{sup_norm, Window};
use defilab_core::periodicity::{
    classify_definability, find_local_period, is_v_periodic_inside, mh_classify_1d,
    period_norm_bound, verify_local_periodicity, ClassifyBudget, LocalPeriodicityCert, MhVerdict,
    PeriodSearchParams, PeriodVector, Verdict,
};
use defilab_core::qe::{eliminate, CellSpec, Qfnf, QeConfig};
use defilab_core::raster::rasterize;
use defilab_core::set::{
    checkerboard, example31, example32, fibonacci_set, fibonacci_word_prefix, singleton_origin,
    toeplitz_set, PointSet,
};
use defilab_core::{Formula, Ratio};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use std::time::Instant;

struct Outcome {
    failures: Vec<String>,
    detail: String,
}

impl Outcome {
    fn new() -> Self {
        Outcome {
            failures: Vec::new(),
            detail: String::new(),
        }
    }

    fn check(&mut self, ok: bool, message: impl Into<String>) {
        if !ok {
            self.failures.push(message.into());
        }
    }

    fn finish(self, number: u32, label: &str, started: Instant, budget_s: f64) {
        let elapsed = started.elapsed().as_secs_f64();
        let status = if self.failures.is_empty() && elapsed <= budget_s {
            "PASS"
        } else {
            "FAIL"
        };
        let mut line = format!(
            "criterion {number:>2} ({label}): {status} [{elapsed:.2}s / {budget_s:.0}s]"
        );
        if !self.detail.is_empty() {
            line.push_str(&format!(" - {}", self.detail));
        }
        println!("{line}");
        for f in &self.failures {
            println!("    failure: {f}");
        }
        assert!(
            self.failures.is_empty(),
            "criterion {number} failed: {:?}",
            self.failures
        );
        assert!(
            elapsed <= budget_s,
            "criterion {number} exceeded its {budget_s}s budget ({elapsed:.2}s)"
        );
    }
}

#[test]
fn criterion_01_example31_recurrent_counts() {
    let started = Instant::now();
    let mut outcome = Outcome::new();
    let m = example31();
    let mut values = Vec::new();
    for n in 1..=8usize {
        let s = stabilized_r(&m, n, &StabilizeOptions::default()).unwrap();
        values.push(s.count);
        outcome.check(s.stabilized, format!("R({n}) did not stabilize"));
        outcome.check(
            s.count == 3 * n,
            format!("R({n}) = {} but the stated value is 3n = {}", s.count, 3 * n),
        );
    }
    outcome.detail = format!("measured {values:?}");
    outcome.finish(1, "ex31, R(n) = 3n for n = 1..8", started, 10.0);
}

#[test]
fn criterion_02_example32_recurrent_counts() {
    let started = Instant::now();
    let mut outcome = Outcome::new();
    let m = example32();
    let mut values = Vec::new();
    for n in 1..=8usize {
        let s = stabilized_r(&m, n, &StabilizeOptions::default()).unwrap();
        values.push(s.count);
        outcome.check(s.stabilized, format!("R({n}) did not stabilize"));
        outcome.check(
            s.count == 7 * n - 1,
            format!(
                "R({n}) = {} but the stated value is 7n-1 = {}",
                s.count,
                7 * n - 1
            ),
        );
    }
    outcome.detail = format!("measured {values:?}");
    outcome.finish(2, "ex32, R(n) = 7n-1 for n = 1..8", started, 20.0);
}

#[test]
fn criterion_03_fibonacci_counts() {
    let started = Instant::now();
    let mut outcome = Outcome::new();
    let g = fibonacci_set(2);
    let w = Window::new(vec![(-80, 160), (-80, 160)]).unwrap();
    for n in 1..=10usize {
        let p = p_count(&g, n, &w).unwrap();
        let r = r_count(&g, n, &w, 80).unwrap();
        outcome.check(
            p == 2 * n,
            format!("p({n}) = {p}, stated 2n = {}", 2 * n),
        );
        outcome.check(
            r == 2 * n,
            format!("R({n}) = {r}, stated 2n = {}", 2 * n),
        );
    }
    outcome.finish(3, "fibonacci set, p = R = 2n for n = 1..10", started, 10.0);
}

#[test]
fn criterion_04_toeplitz_quadratic_lower_bound() {
    let started = Instant::now();
    let mut outcome = Outcome::new();
    let t = toeplitz_set();
    // The count on the stated window, plus stabilization confirmed by
    // doubling the strip length beyond it.
    let stated = Window::new(vec![(0, 1024), (0, 8)]).unwrap();
    let opts = StabilizeOptions {
        initial: Some(stated.clone()),
        grow: Some(vec![true, false]),
        max_radius: 4096,
    };
    let mut values = Vec::new();
    for n in 2..=6usize {
        let direct = r_count(&t, n, &stated, 512).unwrap();
        values.push(direct);
        outcome.check(
            direct >= n * n,
            format!("R({n}) = {direct} on the stated window, below n^2 = {}", n * n),
        );
        let s = stabilized_r(&t, n, &opts).unwrap();
        outcome.check(s.stabilized, format!("R({n}) did not stabilize"));
        outcome.check(
            s.count >= n * n,
            format!("stabilized R({n}) = {} below n^2 = {}", s.count, n * n),
        );
    }
    outcome.detail = format!("stated-window counts {values:?}");
    outcome.finish(4, "toeplitz, R(n) >= n^2 for n = 2..6", started, 30.0);
}

#[test]
fn criterion_05_singleton_counts() {
    let started = Instant::now();
    let mut outcome = Outcome::new();
    let o = singleton_origin(2);
    for n in 1..=10usize {
        let w = Window::cube(2, n as i64 + 2);
        let p = p_count(&o, n, &w).unwrap();
        outcome.check(
            p == n * n + 1,
            format!("p({n}) = {p}, stated n^2+1 = {}", n * n + 1),
        );
        let s = stabilized_r(&o, n, &StabilizeOptions::default()).unwrap();
        outcome.check(
            s.count == 1 && s.stabilized,
            format!("R({n}) = {} (stabilized {})", s.count, s.stabilized),
        );
    }
    outcome.finish(5, "singleton, p = n^2+1 and R = 1 for n = 1..10", started, 5.0);
}

#[test]
fn criterion_06_qe_soundness_against_bounded_oracle() {
    let started = Instant::now();
    let mut outcome = Outcome::new();
    let mut rng = StdRng::seed_from_u64(0xD15C0);
    let gen = GeneratorConfig::default();
    let config = QeConfig::default();
    let mut tested = 0u32;
    let mut skipped = 0u32;
    let mut mismatches = 0u32;
    while tested < 200 {
        let (f, frees) = random_formula(&mut rng, &gen);
        let oracle = match BoundedOracle::build(&f, 15) {
            Ok(o) => o,
            Err(_) => {
                skipped += 1;
                assert!(skipped < 3000, "the oracle rejected too many formulas");
                continue;
            }
        };
        let refs: Vec<&str> = frees.iter().map(|s| s.as_str()).collect();
        let q = match eliminate(&f, &refs, &config) {
            Ok(q) => q,
            Err(_) => {
                skipped += 1;
                continue;
            }
        };
        let points: Vec<Vec<i64>> = if frees.is_empty() {
            vec![vec![]]
        } else {
            Window::cube(frees.len(), 15).points().collect()
        };
        if points.len() as u128 * oracle.cost_per_point > MAX_TOTAL_COST {
            skipped += 1;
            continue;
        }
        for p in points {
            if q.evaluate(&p).unwrap() != oracle.eval(&p) {
                mismatches += 1;
                outcome.check(
                    false,
                    format!("{} disagrees with the oracle at {p:?}", f.render()),
                );
                break;
            }
        }
        tested += 1;
    }
    outcome.detail = format!("{tested} formulas tested, {skipped} resampled, {mismatches} mismatches");
    outcome.finish(6, "elimination matches the bounded oracle", started, 120.0);
}

#[test]
fn criterion_07_quantifier_free_form_reproduction() {
    let started = Instant::now();
    let mut outcome = Outcome::new();
    let phi = Formula::parse(EX32_FORMULA).unwrap();
    let eliminated = eliminate(&phi, &["x", "y"], &QeConfig::default()).unwrap();
    let hand_coded = example32().qfnf().unwrap().clone();
    let w = Window::new(vec![(-5, 30), (-5, 30)]).unwrap();
    match eliminated.first_disagreement(&hand_coded, &w).unwrap() {
        None => {}
        Some(p) => outcome.check(false, format!("disagreement at {p:?}")),
    }
    outcome.finish(
        7,
        "eliminate(ex32 formula) equals the hand-coded form on [-5,30]^2",
        started,
        5.0,
    );
}

#[test]
fn criterion_08_ex31_certificate() {
    let started = Instant::now();
    let mut outcome = Outcome::new();
    let m = example31();
    let cert = LocalPeriodicityCert {
        periods: vec![vec![1, 1], vec![1, 0]],
        k: 3,
        l: 4,
    };
    let norm_sum: i64 = cert.periods.iter().map(|v| sup_norm(v)).sum();
    outcome.check(
        cert.k > norm_sum && norm_sum == 2,
        format!("K = {} must exceed the norm sum {norm_sum}", cert.k),
    );
    let report = verify_local_periodicity(&m, &cert, &Window::cube(2, 50)).unwrap();
    outcome.check(
        report.holds,
        format!(
            "certificate (V = {{(1,1),(1,0)}}, K = 3, L = 4) violated at {:?}",
            report.first_violation
        ),
    );
    outcome.detail = format!("{} points checked", report.points_checked);
    outcome.finish(8, "ex31 certificate K=3, L=4 on [-50,50]^2", started, 10.0);
}

#[test]
fn criterion_09_morse_hedlund_classification() {
    let started = Instant::now();
    let mut outcome = Outcome::new();
    let mut word = vec![false];
    for _ in 0..200 {
        word.push(false);
        word.push(true);
    }
    match mh_classify_1d(&word, 5).unwrap() {
        MhVerdict::Certificate { n: 3, .. } => {}
        other => outcome.check(false, format!("0(01)^200 gave {other:?}, expected n = 3")),
    }
    let prefix = fibonacci_word_prefix(500);
    let bits: Vec<bool> = prefix[..500].iter().map(|&b| b == 1).collect();
    match mh_classify_1d(&bits, 10).unwrap() {
        MhVerdict::NoCertificate { .. } => {}
        other => outcome.check(false, format!("fibonacci gave {other:?}")),
    }
    outcome.finish(9, "1-D classification certificates", started, 2.0);
}

#[test]
fn criterion_10_pigeonhole_property_suite() {
    let started = Instant::now();
    let mut outcome = Outcome::new();
    let mut rng = StdRng::seed_from_u64(510);
    let cases: Vec<(PointSet, i64)> =
        vec![(example31(), 3), (example32(), 8), (checkerboard(), 2)];
    let window = Window::new(vec![(-12, 95), (-12, 95)]).unwrap();
    let grids: Vec<_> = cases
        .iter()
        .map(|(set, _)| rasterize(set, &window).unwrap())
        .collect();
    let mut verified = 0u32;
    let mut drawn = 0u32;
    while verified < 100 {
        drawn += 1;
        assert!(drawn < 20_000, "hypothesis rarely verified");
        let idx = rng.gen_range(0..cases.len());
        let (set, c) = &cases[idx];
        let grid = &grids[idx];
        let n = rng.gen_range(9..=13usize);
        let m_lo = (1..)
            .find(|&m: &usize| (m * m) as i64 >= c * n as i64 + 1)
            .unwrap();
        if m_lo >= n {
            continue;
        }
        let m = rng.gen_range(m_lo..n);
        let m0 = set.recurrence_radius_hint().unwrap_or(8);
        if m0 + (m as i64) + 2 >= 95 - n as i64 {
            continue;
        }
        let z = [
            rng.gen_range(m0 + m as i64..=95 - n as i64),
            rng.gen_range(m0 + m as i64..=95 - n as i64),
        ];
        // machine-verify the counting hypothesis on the touched anchors
        let offsets = Window::new(vec![(-(m as i64) + 1, 0); 2]).unwrap();
        let mut blocks = Vec::new();
        for y in offsets.points() {
            let anchor: Vec<i64> = z.iter().zip(&y).map(|(&a, &b)| a + b).collect();
            blocks.push(block_at(grid, &anchor, n).unwrap());
        }
        let total = blocks.len();
        let mut dedup = blocks.clone();
        dedup.sort_by_key(|b| format!("{b:?}"));
        dedup.dedup();
        if dedup.len() == total {
            continue; // hypothesis not verified here
        }
        verified += 1;
        let params = PeriodSearchParams {
            c: Ratio::new(*c, 1),
            n,
            m,
            m0,
        };
        match find_local_period(grid, &z, &params).unwrap() {
            None => outcome.check(
                false,
                format!("{}: hypothesis verified at {z:?} but no period", set.name()),
            ),
            Some(v) => {
                outcome.check(
                    v.norm() <= m as i64,
                    format!("{}: ||v|| = {} above m = {m}", set.name(), v.norm()),
                );
                let side = n - m;
                let center = block_at(grid, &z, side).unwrap();
                for sign in [-1i64, 1] {
                    let shifted: Vec<i64> = z
                        .iter()
                        .zip(v.as_slice())
                        .map(|(&a, &d)| a + sign * d)
                        .collect();
                    outcome.check(
                        block_at(grid, &shifted, side).unwrap() == center,
                        format!("{}: triple equality fails at {z:?}", set.name()),
                    );
                }
            }
        }
    }
    outcome.detail = format!("{verified} verified instances from {drawn} draws");
    outcome.finish(10, "pigeonhole period finder property suite", started, 60.0);
}

#[test]
fn criterion_11_norm_bound_audit() {
    let started = Instant::now();
    let mut outcome = Outcome::new();
    for set in [example31(), example32()] {
        // measure C = max_n R(n)/n over the criterion-1/2 range
        let mut c = Ratio::new(0, 1);
        for n in 1..=8usize {
            let s = stabilized_r(&set, n, &StabilizeOptions::default()).unwrap();
            c = c.max(Ratio::new(s.count as i64, n as i64));
        }
        let probes: Vec<[i64; 2]> = vec![[40, 40], [52, 9], [21, 56], [60, 1], [33, 33], [48, 17]];
        for k in 3..=10i64 {
            let bound = period_norm_bound(c, k, 2);
            for x in &probes {
                let mut minimal: Option<i64> = None;
                'search: for norm in 1..=(bound.ceil() as i64 + 2) {
                    let candidates = Window::new(vec![(-norm, norm); 2]).unwrap();
                    for v in candidates.points() {
                        if sup_norm(&v) != norm {
                            continue;
                        }
                        let pv = PeriodVector::new(v).unwrap();
                        if is_v_periodic_inside(&set, &pv, x, k) {
                            minimal = Some(norm);
                            break 'search;
                        }
                    }
                }
                match minimal {
                    Some(norm) => outcome.check(
                        (norm as f64) <= bound,
                        format!(
                            "{}: minimal period norm {norm} above bound {bound:.3} at K={k}, x={x:?}",
                            set.name()
                        ),
                    ),
                    None => outcome.check(
                        false,
                        format!("{}: no period within the bound at K={k}, x={x:?}", set.name()),
                    ),
                }
            }
        }
    }
    outcome.finish(11, "minimal periods respect (2C)^(1/2) (5K)^(1/2)", started, 60.0);
}

#[test]
fn criterion_12_border_and_section_invariants() {
    let started = Instant::now();
    let mut outcome = Outcome::new();
    let cfg = QeConfig::default();
    let window = Window::cube(2, 20);

    let mut rng = StdRng::seed_from_u64(12);
    let mut subjects: Vec<Qfnf> = vec![
        example31().qfnf().unwrap().clone(),
        example31().qfnf().unwrap().clone(),
        example32().qfnf().unwrap().clone(),
        checkerboard().qfnf().unwrap().clone(),
        singleton_origin(2).qfnf().unwrap().clone(),
    ];
    for _ in 0..50 {
        subjects.push(random_small_qfnf(&mut rng));
    }

    for (i, q) in subjects.iter().enumerate() {
        let set = PointSet::symbolic("subject", q.clone());
        let padded = rasterize(&set, &window.padded(3)).unwrap();
        // border against the brute-force grid border
        let v = [
            [1i64, 0],
            [0, -1],
            [rng.gen_range(-2..=2), rng.gen_range(-2..=2)],
        ]
        .into_iter()
        .find(|v| *v != [0, 0])
        .unwrap();
        let border = q.border(&v, &cfg).unwrap();
        for p in window.points() {
            let shifted = [p[0] + v[0], p[1] + v[1]];
            let expected = padded.get(&p) && !padded.get(&shifted);
            if border.evaluate(&p).unwrap() != expected {
                outcome.check(false, format!("subject {i}: border({v:?}) wrong at {p:?}"));
                break;
            }
        }
        // sections against raster slices
        for axis in 1..=2usize {
            let c = rng.gen_range(-6..=6i64);
            let section = q.section(axis, c, &cfg).unwrap();
            for t in -20..=20i64 {
                let p = if axis == 1 { [c, t] } else { [t, c] };
                if section.evaluate(&[t]).unwrap() != padded.get(&p) {
                    outcome.check(
                        false,
                        format!("subject {i}: section(axis {axis}, {c}) wrong at {t}"),
                    );
                    break;
                }
            }
        }
    }

    // Lemma 5.7 shrink property for example31 at its measured minimal L.
    let m = example31();
    let q31 = m.qfnf().unwrap();
    let (k, l) = (3i64, 8i64);
    let full = LocalPeriodicityCert {
        periods: vec![vec![1, 1], vec![1, 0]],
        k,
        l,
    };
    let w = Window::cube(2, 40);
    let base = verify_local_periodicity(&m, &full, &w).unwrap();
    outcome.check(
        base.holds,
        format!("example31 certificate at L={l} violated at {:?}", base.first_violation),
    );
    for (v, kept) in [(vec![1i64, 1], vec![1i64, 0]), (vec![1, 0], vec![1, 1])] {
        let border = PointSet::symbolic("border", q31.border(&v, &cfg).unwrap());
        let inner = w.shrunk(sup_norm(&v)).unwrap();
        let shrunk = LocalPeriodicityCert {
            periods: vec![kept.clone()],
            k,
            l,
        };
        let report = verify_local_periodicity(&border, &shrunk, &inner).unwrap();
        outcome.check(
            report.holds,
            format!(
                "border({v:?}) not {kept:?}-periodic: violation at {:?}",
                report.first_violation
            ),
        );
    }
    outcome.finish(12, "symbolic border/section match brute force", started, 60.0);
}

fn random_small_qfnf(rng: &mut StdRng) -> Qfnf {
    let moduli = [2i64, 3, 4];
    let mut cells = Vec::new();
    for _ in 0..rng.gen_range(1..=3) {
        let mut spec = CellSpec::default();
        for _ in 0..rng.gen_range(0..=3) {
            let coeffs = vec![rng.gen_range(-3..=3), rng.gen_range(-3..=3)];
            if coeffs.iter().all(|&c| c == 0) {
                continue;
            }
            spec.inequalities.push((coeffs, rng.gen_range(-6..=6)));
        }
        if rng.gen_bool(0.6) {
            let coeffs = vec![rng.gen_range(-2..=3), rng.gen_range(-2..=3)];
            if !coeffs.iter().all(|&c| c == 0) {
                let m = moduli[rng.gen_range(0..moduli.len())];
                spec.congruences.push((coeffs, m, rng.gen_range(0..m)));
            }
        }
        cells.push(spec);
    }
    Qfnf::from_cells(&["x", "y"], cells, &QeConfig::default()).unwrap()
}

#[test]
fn criterion_13_classifier_verdicts() {
    let started = Instant::now();
    let mut outcome = Outcome::new();
    let budget = ClassifyBudget::default();

    for set in [example31(), example32(), checkerboard()] {
        let report = classify_definability(&set, 1, &budget).unwrap();
        outcome.check(
            report.verdict == Verdict::ConsistentWithDefinable,
            format!("{}: verdict {:?}", set.name(), report.verdict),
        );
    }

    // The strip frame must be long enough for counts to stabilize: the far
    // region has to cover a full power-of-two period of the low rows.
    let toeplitz_budget = ClassifyBudget {
        frame: Some(Window::new(vec![(0, 4096), (0, 8)]).unwrap()),
        ..ClassifyBudget::default()
    };
    let report = classify_definability(&toeplitz_set(), 1, &toeplitz_budget).unwrap();
    outcome.check(
        report.verdict == Verdict::NotDefinableEvidence,
        format!("toeplitz: verdict {:?}", report.verdict),
    );
    if let Some(w) = &report.witness {
        outcome.check(
            w.path == "top",
            format!("toeplitz witness should be top-level growth, got {}", w.path),
        );
    }

    let report = classify_definability(&fibonacci_set(2), 1, &budget).unwrap();
    outcome.check(
        report.verdict == Verdict::NotDefinableEvidence,
        format!("fibonacci: verdict {:?}", report.verdict),
    );
    match &report.witness {
        Some(w) => outcome.check(
            w.path.contains("axis 2"),
            format!("fibonacci witness must name an axis-2 section, got {}", w.path),
        ),
        None => outcome.check(false, "fibonacci produced no witness".to_string()),
    }
    outcome.finish(13, "classifier verdicts", started, 90.0);
}
