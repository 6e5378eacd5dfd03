//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::time::{Duration, Instant};

use gds_cli::config::Analysis;
use gds_cli::presets;
use gds_cli::run_config;
use gds_core::analysis::{
    check_gds, lyapunov_spectrum, measure_average_inf, minimality_probe, proof_bound_check,
    uniform_negativity_search, BoundStatus, EmpiricalMeasure, GdsParams, Verdict,
};
use gds_core::cocycle::{a_n, a_trace, b_k};
use gds_core::splittings::{coordinate_split, golden_example_splittings, stable_unstable, Selector};
use gds_core::systems::{CircleMapG, FactorKind, Minimality, RotationSystem};
use gds_core::{Grid, GridSpec, SplittingSpec, TorusMapSystem, TorusPoint};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn e<E: std::fmt::Display>(err: E) -> String {
    err.to_string()
}

// Closed forms: the cat map eigenvalues (3 ± √5)/2.
fn alpha() -> f64 {
    (3.0 - 5f64.sqrt()) / 2.0
}

fn beta() -> f64 {
    (3.0 + 5f64.sqrt()) / 2.0
}

fn golden() -> (TorusMapSystem, Vec<SplittingSpec>) {
    let sys = TorusMapSystem::golden_example();
    let sp = golden_example_splittings(&sys).unwrap();
    (sys, sp)
}

fn criterion_1() -> Outcome {
    let t = Instant::now();
    let mut config = presets::load("verify-example").map_err(e)?;
    config.analyses = vec![Analysis::Classify];
    ensure((config.grid.circle, config.grid.toral) == (256, 64), || "preset grid is not 256×64²".into())?;
    let report = run_config(&config).map_err(e)?;
    let elapsed = t.elapsed();
    let c = &report.payload.classify;
    ensure(c.len() == 3, || format!("{} splittings classified", c.len()))?;

    let first = &c[0].gds;
    ensure(first.verdict == Verdict::GdsNotDominated, || format!("first: {:?}", first.verdict))?;
    ensure(first.params.s == 1 && first.params.lambda == 1.0, || "first: not S=1, λ=1".into())?;
    let w = first.witness_x0.as_ref().ok_or("first: no witness")?;
    ensure(w.log_ratio <= -1.9, || format!("first: witness a_1 = {}", w.log_ratio))?;

    ensure(c[1].gds.verdict == Verdict::GdsNotDominated, || format!("second: {:?}", c[1].gds.verdict))?;

    let third = &c[2].gds;
    ensure(third.verdict == Verdict::NotGds, || format!("third: {:?}", third.verdict))?;
    let rate = third.growth_rate.ok_or("third: no growth rate")?;
    let want = 2.0 * beta().ln();
    ensure((rate - want).abs() <= 1e-3, || format!("third: growth {rate} vs {want}"))?;
    ensure(third.worst_point.coords()[0] == 0.5, || format!("third: worst point {:?}", third.worst_point))?;
    ensure(elapsed <= Duration::from_secs(30), || format!("took {elapsed:?}"))?;
    Ok(format!(
        "verdicts ok, witness a_1 = {:.6}, growth {rate:.6} (want {want:.6}), {:.2}s",
        w.log_ratio,
        elapsed.as_secs_f64()
    ))
}

fn criterion_2() -> Outcome {
    let (sys, sp) = golden();
    let grid = Grid::new(&sys, &GridSpec::uniform(256, 64)).map_err(e)?;
    // nearest circle node to x1 = 1/2, across a spread of toral nodes
    let node = (0.5 * 256.0f64).round() / 256.0;
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    let mut x = vec![0.0; 3];
    for i in (0..grid.len()).step_by(97) {
        grid.point_into(i, &mut x);
        x[0] = node;
        let p = TorusPoint::new(x.clone());
        for s in 1..=10 {
            worst = worst.max(a_n(&sys, &sp[0], &p, s).map_err(e)?.abs());
        }
        checked += 1;
    }
    ensure(worst <= 1e-6, || format!("max |a_S| = {worst:e}"))?;
    Ok(format!("{checked} points on x1 = 1/2, S = 1..10: max |a_S| = {worst:e}"))
}

fn criterion_3() -> Outcome {
    let sys = TorusMapSystem::golden_example();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let l = beta().ln();
    let want = [-l, -l, l];
    let reported = [-0.9624, -0.9624, 0.9624];
    let t = Instant::now();
    let mut worst: f64 = 0.0;
    for _ in 0..4 {
        let x = [0.0, rng.random::<f64>(), rng.random::<f64>()];
        let got = lyapunov_spectrum(&sys, &x, 100_000).map_err(e)?;
        for i in 0..3 {
            ensure((got[i] - want[i]).abs() <= 1e-4, || format!("{x:?}: {got:?}"))?;
            worst = worst.max((got[i] - reported[i]).abs());
        }
    }
    let elapsed = t.elapsed();
    ensure(worst <= 1e-4, || format!("off the reported ±0.9624 by {worst:e}"))?;
    ensure(elapsed <= Duration::from_secs(5), || format!("took {elapsed:?}"))?;
    Ok(format!("4 orbits from δ0×m, max deviation from ±0.9624: {worst:.2e}, {:.2}s", elapsed.as_secs_f64()))
}

fn criterion_4() -> Outcome {
    let freqs = vec![(5f64.sqrt() - 1.0) / 2.0, 2f64.sqrt() - 1.0];
    let sys = TorusMapSystem::rotation(freqs, Minimality::KnownMinimal).map_err(e)?;
    let sp = coordinate_split(&sys, 1).map_err(e)?;
    let spec = GridSpec::uniform(256, 64);
    let grid = Grid::new(&sys, &spec).map_err(e)?;
    let mut worst: f64 = 0.0;
    for i in 0..grid.len() {
        let trace = a_trace(&sys, &sp, &grid.point(i), 100).map_err(e)?;
        worst = trace.iter().fold(worst, |m, a| m.max(a.abs()));
    }
    ensure(worst <= 1e-12, || format!("max |a_k| = {worst:e}"))?;

    let r = check_gds(&sys, &sp, &GdsParams::new(1, 1.0), &spec).map_err(e)?;
    ensure(r.verdict == Verdict::Conditions12Only, || format!("verdict {:?}", r.verdict))?;

    let circle = TorusMapSystem::rotation(vec![(5f64.sqrt() - 1.0) / 2.0], Minimality::KnownMinimal).map_err(e)?;
    let d = minimality_probe(&circle, &TorusPoint::new(vec![0.0]), 100_000, 1000).map_err(e)?;
    ensure(d.fraction >= 0.999, || format!("density {}", d.fraction))?;
    Ok(format!(
        "{} grid points × k ≤ 100: max |a_k| = {worst:e}; conditions12_only; density {}",
        grid.len(),
        d.fraction
    ))
}

/// Invariant line of the derivative: a circle factor (chain rule along the
/// orbit) or a line stretched by a fixed factor each step.
#[derive(Clone, Copy)]
enum Line {
    Circle(usize),
    Const(f64),
}

struct Pair {
    system: TorusMapSystem,
    splitting: SplittingSpec,
    e: Vec<Line>,
    f: Vec<Line>,
}

fn golden_lines(system: TorusMapSystem, out: &mut Vec<Pair>) {
    let (ls, lu) = (alpha().ln(), beta().ln());
    let lines = [
        (vec![Line::Circle(0), Line::Const(ls)], vec![Line::Const(lu)]),
        (vec![Line::Const(ls)], vec![Line::Circle(0), Line::Const(lu)]),
        (vec![Line::Circle(0)], vec![Line::Const(ls), Line::Const(lu)]),
    ];
    for (s, (e, f)) in golden_example_splittings(&system).unwrap().into_iter().zip(lines) {
        out.push(Pair {
            system: system.clone(),
            splitting: s,
            e,
            f,
        });
    }
}

fn pairs() -> Vec<Pair> {
    let mut out = Vec::new();
    golden_lines(TorusMapSystem::golden_example(), &mut out);
    golden_lines(TorusMapSystem::modified_example(2.0).unwrap(), &mut out);
    let cat = TorusMapSystem::cat_map();
    out.push(Pair {
        splitting: stable_unstable(&cat, "h").unwrap(),
        system: cat,
        e: vec![Line::Const(alpha().ln())],
        f: vec![Line::Const(beta().ln())],
    });
    let rot = TorusMapSystem::rotation(vec![(5f64.sqrt() - 1.0) / 2.0, 2f64.sqrt() - 1.0], Minimality::KnownMinimal)
        .unwrap();
    out.push(Pair {
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
    for (a, b, la, lb) in [("g", "r", Line::Circle(0), Line::Const(0.0)), ("r", "g", Line::Const(0.0), Line::Circle(0))] {
        out.push(Pair {
            splitting: SplittingSpec::from_selectors(
                format!("{a} | {b}"),
                &mixed,
                &[Selector::Factor(a.into())],
                &[Selector::Factor(b.into())],
            )
            .unwrap(),
            system: mixed.clone(),
            e: vec![la],
            f: vec![lb],
        });
    }
    out
}

fn random_point(rng: &mut ChaCha8Rng, d: usize) -> TorusPoint {
    TorusPoint::new((0..d).map(|_| rng.random::<f64>()).collect::<Vec<_>>())
}

fn a0(p: &Pair, x: &TorusPoint, n: usize) -> Result<f64, String> {
    if n == 0 {
        Ok(0.0)
    } else {
        a_n(&p.system, &p.splitting, x, n).map_err(e)
    }
}

fn b0(p: &Pair, x: &TorusPoint, k: usize) -> Result<f64, String> {
    if k == 0 {
        Ok(0.0)
    } else {
        b_k(&p.system, &p.splitting, x, k).map_err(e)
    }
}

fn iterate(sys: &TorusMapSystem, x: &TorusPoint, n: usize) -> TorusPoint {
    sys.orbit(x, n).last().unwrap()
}

fn criterion_5() -> Outcome {
    let ps = pairs();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut worst2, mut worst3, mut worst_eq): (f64, f64, f64) = (f64::NEG_INFINITY, f64::NEG_INFINITY, 0.0);
    for _ in 0..10_000 {
        let p = &ps[rng.random_range(0..ps.len())];
        let x = random_point(&mut rng, p.system.dim());
        let n = rng.random_range(0..60);
        let k = rng.random_range(0..60);
        let lhs2 = a0(p, &x, n + k)?;
        let rhs2 = a0(p, &iterate(&p.system, &x, k), n)? + a0(p, &x, k)?;
        let lhs3 = a0(p, &x, n)?;
        let rhs3 = rhs2 + b0(p, &iterate(&p.system, &x, n), k)?;
        worst2 = worst2.max(lhs2 - rhs2);
        worst3 = worst3.max(lhs3 - rhs3);
        if p.e.len() == 1 && p.f.len() == 1 {
            worst_eq = worst_eq.max((lhs2 - rhs2).abs()).max((lhs3 - rhs3).abs());
        }
    }
    ensure(worst2 <= 1e-8, || format!("first inequality off by {worst2:e}"))?;
    ensure(worst3 <= 1e-8, || format!("second inequality off by {worst3:e}"))?;
    ensure(worst_eq <= 1e-9, || format!("1D equality off by {worst_eq:e}"))?;
    Ok(format!("10^4 triples: max excess {worst2:.1e} / {worst3:.1e}, 1D equality within {worst_eq:.1e}"))
}

fn criterion_6() -> Outcome {
    let ps = pairs();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..1000 {
        let p = &ps[rng.random_range(0..ps.len())];
        let x = random_point(&mut rng, p.system.dim());
        let n = rng.random_range(1..300);
        let s = rng.random_range(1..12);
        let bound = 2.0 * s as f64 * p.system.derivative_sup().ln();
        let diff = (a0(p, &x, n)? - a0(p, &x, n / s * s)?).abs();
        worst = worst.max(diff - bound);
    }
    ensure(worst <= 1e-8, || format!("bound exceeded by {worst:e}"))?;
    Ok(format!("10^3 samples: max (|a_n − a_(n−n mod S)| − 2S ln C) = {worst:.3}"))
}

/// `ln |D f^j|` on a line for `j = 1..=n`, from the factor's own map.
fn line_trace(sys: &TorusMapSystem, l: Line, x: &TorusPoint, n: usize) -> Vec<f64> {
    match l {
        Line::Const(c) => (1..=n).map(|j| j as f64 * c).collect(),
        Line::Circle(i) => {
            let f = &sys.factors()[i];
            let FactorKind::Circle(g) = &f.kind else { unreachable!() };
            let mut s = x.coords()[f.offset];
            let mut acc = 0.0;
            (0..n)
                .map(|_| {
                    acc += g.derivative(s).ln();
                    s = g.eval(s);
                    acc
                })
                .collect()
        }
    }
}

fn criterion_7() -> Outcome {
    let ps: Vec<Pair> = pairs().into_iter().filter(|p| p.system.factors().len() > 1).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let n = 1000;
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let p = &ps[rng.random_range(0..ps.len())];
        let x = random_point(&mut rng, p.system.dim());
        let got = a_trace(&p.system, &p.splitting, &x, n).map_err(e)?;
        let es: Vec<_> = p.e.iter().map(|&l| line_trace(&p.system, l, &x, n)).collect();
        let fs: Vec<_> = p.f.iter().map(|&l| line_trace(&p.system, l, &x, n)).collect();
        for j in 0..n {
            let top = es.iter().map(|t| t[j]).fold(f64::NEG_INFINITY, f64::max);
            let bottom = fs.iter().map(|t| t[j]).fold(f64::INFINITY, f64::min);
            worst = worst.max((got[j] - (top - bottom)).abs());
        }
    }
    ensure(worst <= 1e-8, || format!("max deviation {worst:e}"))?;
    Ok(format!("10^3 points × n ≤ 1000 on {} product pairs: max deviation {worst:.2e}", ps.len()))
}

fn criterion_8() -> Outcome {
    let (sys, sp) = golden();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let x = TorusPoint::new(vec![0.25, rng.random::<f64>(), rng.random::<f64>()]);
    let r = proof_bound_check(&sys, &sp[0], 1, 1.0, 0.3, &x, 10_000).map_err(e)?;
    ensure(r.status == BoundStatus::Holds, || format!("status {:?}, min margin {}", r.status, r.min_margin))?;
    let slope = 0.7f64.ln();
    for row in &r.rows {
        ensure((row.bound - row.i as f64 * slope).abs() <= 1e-12, || format!("row {}: bound {}", row.i, row.bound))?;
        ensure(row.c <= row.bound + 1e-6, || format!("row {}: c = {} > {}", row.i, row.c, row.bound))?;
    }
    let chi = r.record.chi_star;
    ensure(chi >= 0.9, || format!("chi* = {chi}"))?;
    Ok(format!("{} recurrence times, min margin {:.3e}, chi* = {chi}", r.rows.len(), r.min_margin))
}

fn criterion_9() -> Outcome {
    let cat = TorusMapSystem::cat_map();
    let su = stable_unstable(&cat, "h").map_err(e)?;
    let spec = GridSpec::uniform(256, 64);
    let r = uniform_negativity_search(&cat, &su, &spec, 200).map_err(e)?.ok_or("cat map: none found")?;
    let want = alpha() * alpha();
    ensure(r.n == 1, || format!("cat map: N = {}", r.n))?;
    ensure((r.tau - want).abs() <= 1e-9, || format!("cat map: tau {} vs {want}", r.tau))?;

    let (sys, sp) = golden();
    let none = uniform_negativity_search(&sys, &sp[0], &spec, 200).map_err(e)?;
    ensure(none.is_none(), || format!("golden: found {none:?}"))?;
    let mu = EmpiricalMeasure::dirac(TorusPoint::new(vec![0.5, 0.1, 0.2]));
    let avg = measure_average_inf(&sys, &sp[0], &mu, &[1, 10, 100, 1000]).map_err(e)?;
    ensure(avg.abs() <= 1e-9, || format!("golden: fiber-1/2 average {avg}"))?;
    Ok(format!("cat N = 1, tau = {} (want {want}); golden none to 200, fiber-1/2 average {avg:e}", r.tau))
}

fn criterion_10() -> Outcome {
    let config = presets::load("verify-example").map_err(e)?;
    let pool = |k| rayon::ThreadPoolBuilder::new().num_threads(k).build().unwrap();
    let a = pool(1).install(|| run_config(&config)).map_err(e)?;
    let b = pool(4).install(|| run_config(&config)).map_err(e)?;
    let (ja, jb) = (a.payload_json(), b.payload_json());
    ensure(ja == jb, || "payloads differ".into())?;
    let tables_equal = a.tables.iter().zip(&b.tables).all(|(x, y)| x.to_csv_bytes() == y.to_csv_bytes());
    ensure(tables_equal && a.tables.len() == b.tables.len(), || "plot tables differ".into())?;
    Ok(format!("two runs (1 and 4 threads): {} payload bytes identical, {} tables identical", ja.len(), a.tables.len()))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("golden example verdicts", criterion_1),
        ("non-domination on the repelling fiber", criterion_2),
        ("Lyapunov spectrum", criterion_3),
        ("rotation products", criterion_4),
        ("subadditivity suite", criterion_5),
        ("sandwich inequality", criterion_6),
        ("generic cocycle vs chain rule", criterion_7),
        ("recurrence bound", criterion_8),
        ("uniform negativity correspondence", criterion_9),
        ("determinism", criterion_10),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        match f() {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {why}", i + 1);
            }
        }
    }
    println!("\n{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
