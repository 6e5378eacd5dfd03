use std::sync::LazyLock;

use gds_core::analysis::{
    check_dominated, check_gds, lyapunov_spectrum, recurrence_analysis, uniform_negativity_search, EmpiricalMeasure,
    GdsParams, Verdict,
};
use gds_core::cocycle::{a_n, b_k};
use gds_core::splittings::{coordinate_split, golden_example_splittings, stable_unstable, Selector};
use gds_core::systems::{golden_contraction, golden_expansion, CircleMapG, FactorKind, Minimality, RotationSystem};
use gds_core::{GridSpec, SplittingSpec, TorusMapSystem, TorusPoint};
use proptest::prelude::*;

/// Invariant line of the derivative: a circle axis (chain rule) or a line
/// stretched by a constant factor per step.
#[derive(Clone, Copy)]
enum Line {
    Circle(usize),
    Const(f64),
}

struct Pair {
    name: &'static str,
    system: TorusMapSystem,
    splitting: SplittingSpec,
    e: Vec<Line>,
    f: Vec<Line>,
}

impl Pair {
    fn one_dimensional(&self) -> bool {
        self.e.len() == 1 && self.f.len() == 1
    }
}

fn line_log(sys: &TorusMapSystem, l: Line, x: &TorusPoint, n: usize) -> f64 {
    match l {
        Line::Circle(i) => sys.closed_form_log_derivative(i, x, n).unwrap(),
        Line::Const(c) => n as f64 * c,
    }
}

/// `a_n` for splittings made of mutually orthogonal invariant lines.
fn oracle_a(p: &Pair, x: &TorusPoint, n: usize) -> f64 {
    let e = p.e.iter().map(|&l| line_log(&p.system, l, x, n)).fold(f64::NEG_INFINITY, f64::max);
    let f = p.f.iter().map(|&l| line_log(&p.system, l, x, n)).fold(f64::INFINITY, f64::min);
    e - f
}

fn golden_pairs(name: &'static str, system: TorusMapSystem, out: &mut Vec<Pair>) {
    let (ls, lu) = (golden_contraction().ln(), golden_expansion().ln());
    let lines = [
        (vec![Line::Circle(0), Line::Const(ls)], vec![Line::Const(lu)]),
        (vec![Line::Const(ls)], vec![Line::Circle(0), Line::Const(lu)]),
        (vec![Line::Circle(0)], vec![Line::Const(ls), Line::Const(lu)]),
    ];
    for (s, (e, f)) in golden_example_splittings(&system).unwrap().into_iter().zip(lines) {
        out.push(Pair {
            name,
            system: system.clone(),
            splitting: s,
            e,
            f,
        });
    }
}

static PAIRS: LazyLock<Vec<Pair>> = LazyLock::new(|| {
    let mut out = Vec::new();
    golden_pairs("golden", TorusMapSystem::golden_example(), &mut out);
    golden_pairs("modified", TorusMapSystem::modified_example(2.0).unwrap(), &mut out);
    let cat = TorusMapSystem::cat_map();
    out.push(Pair {
        name: "cat",
        splitting: stable_unstable(&cat, "h").unwrap(),
        system: cat,
        e: vec![Line::Const(golden_contraction().ln())],
        f: vec![Line::Const(golden_expansion().ln())],
    });
    let rot = TorusMapSystem::rotation(vec![(5f64.sqrt() - 1.0) / 2.0, 2f64.sqrt() - 1.0], Minimality::KnownMinimal)
        .unwrap();
    out.push(Pair {
        name: "rotation",
        splitting: coordinate_split(&rot, 1).unwrap(),
        system: rot,
        e: vec![Line::Const(0.0)],
        f: vec![Line::Const(0.0)],
    });
    let mixed = TorusMapSystem::product(vec![
        ("g".into(), FactorKind::Circle(CircleMapG::golden())),
        (
            "r".into(),
            FactorKind::Rotation(RotationSystem::new(vec![2f64.sqrt() - 1.0], Minimality::Unknown).unwrap()),
        ),
    ])
    .unwrap();
    for (e, f, le, lf) in [("g", "r", Line::Circle(0), Line::Const(0.0)), ("r", "g", Line::Const(0.0), Line::Circle(0))] {
        out.push(Pair {
            name: "circle x rotation",
            splitting: SplittingSpec::from_selectors(
                format!("{e} | {f}"),
                &mixed,
                &[Selector::Factor(e.into())],
                &[Selector::Factor(f.into())],
            )
            .unwrap(),
            system: mixed.clone(),
            e: vec![le],
            f: vec![lf],
        });
    }
    out
});

fn point(p: &Pair, coords: &[f64]) -> TorusPoint {
    TorusPoint::new(coords[..p.system.dim()].to_vec())
}

fn a(p: &Pair, x: &TorusPoint, n: usize) -> f64 {
    if n == 0 {
        0.0
    } else {
        a_n(&p.system, &p.splitting, x, n).unwrap()
    }
}

fn b(p: &Pair, x: &TorusPoint, k: usize) -> f64 {
    if k == 0 {
        0.0
    } else {
        b_k(&p.system, &p.splitting, x, k).unwrap()
    }
}

fn iterate(sys: &TorusMapSystem, x: &TorusPoint, n: usize) -> TorusPoint {
    sys.orbit(x, n).last().unwrap()
}

fn coords() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..1.0, 3)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn subadditivity(pi in 0..PAIRS.len(), c in coords(), n in 0usize..60, k in 0usize..60) {
        let p = &PAIRS[pi];
        let x = point(p, &c);
        let lhs = a(p, &x, n + k);
        let rhs = a(p, &iterate(&p.system, &x, k), n) + a(p, &x, k);
        prop_assert!(lhs <= rhs + 1e-8, "{} {}: {lhs} > {rhs}", p.name, p.splitting.label);
        let lhs3 = a(p, &x, n);
        let rhs3 = rhs + b(p, &iterate(&p.system, &x, n), k);
        prop_assert!(lhs3 <= rhs3 + 1e-8, "{} {}: {lhs3} > {rhs3}", p.name, p.splitting.label);
        if p.one_dimensional() {
            prop_assert!((lhs - rhs).abs() <= 1e-9);
            prop_assert!((lhs3 - rhs3).abs() <= 1e-9);
        }
    }

    #[test]
    fn sandwich(pi in 0..PAIRS.len(), c in coords(), n in 1usize..200, s in 1usize..10) {
        let p = &PAIRS[pi];
        let x = point(p, &c);
        let lnc = p.system.derivative_sup().ln();
        let diff = a(p, &x, n) - a(p, &x, n / s * s);
        prop_assert!(diff.abs() <= 2.0 * s as f64 * lnc + 1e-8);
    }

    #[test]
    fn generic_cocycle_matches_chain_rule(pi in 0..PAIRS.len(), c in coords(), n in 1usize..300) {
        let p = &PAIRS[pi];
        let x = point(p, &c);
        let got = a(p, &x, n);
        let want = oracle_a(p, &x, n);
        prop_assert!((got - want).abs() <= 1e-8, "{} {} n={n}: {got} vs {want}", p.name, p.splitting.label);
    }

    #[test]
    fn lyapunov_sum_rule(c in coords(), f1 in 0.0f64..1.0, f2 in 0.0f64..1.0) {
        let cat = TorusMapSystem::cat_map();
        let l = lyapunov_spectrum(&cat, &c[..2], 2000).unwrap();
        prop_assert!(l.iter().sum::<f64>().abs() <= 1e-5);
        let rot = TorusMapSystem::rotation(vec![f1, f2], Minimality::Unknown).unwrap();
        let l = lyapunov_spectrum(&rot, &c[..2], 500).unwrap();
        prop_assert!(l.iter().sum::<f64>().abs() <= 1e-5);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn dominated_implies_gds(pi in prop::sample::select(vec![3usize, 6]), lambda in 0.3f64..0.99, s in 1usize..4) {
        let p = &PAIRS[pi];
        let grid = GridSpec::uniform(16, 4);
        let d = check_dominated(&p.system, &p.splitting, s, lambda, &grid).unwrap();
        if d.verdict == Verdict::Dominated {
            let g = check_gds(&p.system, &p.splitting, &GdsParams::new(s, lambda).with_k_max(10), &grid).unwrap();
            prop_assert!(matches!(g.verdict, Verdict::Dominated | Verdict::GdsNotDominated), "{:?}", g.verdict);
        }
    }

    #[test]
    fn larger_k_max_never_rescues_not_gds(
        pi in 0usize..6, lambda in 0.5f64..2.0, k1 in 1usize..8, extra in 1usize..8,
    ) {
        let p = &PAIRS[pi];
        let grid = GridSpec::uniform(16, 4);
        let v1 = check_gds(&p.system, &p.splitting, &GdsParams::new(1, lambda).with_k_max(k1), &grid).unwrap();
        let v2 = check_gds(&p.system, &p.splitting, &GdsParams::new(1, lambda).with_k_max(k1 + extra), &grid).unwrap();
        if v1.verdict == Verdict::NotGds {
            prop_assert_eq!(v2.verdict, Verdict::NotGds);
        }
        prop_assert!(v2.worst_ratio_log >= v1.worst_ratio_log);
    }

    #[test]
    fn negativity_search_is_sound(pi in prop::sample::select(vec![3usize, 6]), t in 0.0f64..1.0) {
        let p = &PAIRS[pi];
        let grid = GridSpec::uniform(32, 8);
        let r = uniform_negativity_search(&p.system, &p.splitting, &grid, 10).unwrap().unwrap();
        let tau_prime = r.tau + (1.0 - r.tau) * (0.001 + 0.998 * t);
        let d = check_dominated(&p.system, &p.splitting, r.n, tau_prime, &grid).unwrap();
        prop_assert_eq!(d.verdict, Verdict::Dominated);
    }

    #[test]
    fn visit_frequency_matches_return_times(x1 in 0.02f64..0.45, eps in 0.05f64..0.6) {
        let p = &PAIRS[0];
        let x = TorusPoint::new(vec![x1, 0.3, 0.7]);
        let n_max = 400;
        let r = recurrence_analysis(&p.system, &p.splitting, 1, 1.0, eps, &x, n_max).unwrap();
        prop_assert!(r.times.windows(2).all(|w| w[0] < w[1]));
        if let Some(est) = r.ratio_estimate() {
            prop_assert!((r.chi_star - est).abs() <= 1.0 / (n_max as f64).sqrt());
        }
    }

    #[test]
    fn uniform_measure_is_normalized(n in 1usize..50) {
        let pts = (0..n).map(|i| TorusPoint::new(vec![i as f64 / n as f64])).collect();
        let mu = EmpiricalMeasure::uniform(pts).unwrap();
        let total: f64 = mu.samples().iter().map(|(_, w)| w).sum();
        prop_assert!((total - 1.0).abs() <= 1e-12);
    }
}
