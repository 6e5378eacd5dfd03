use serde::{Deserialize, Serialize};

use super::{check_step, GdsParams, CONDITION_TOL, DEFAULT_DELTA};
use crate::cocycle::{CocycleWalker, Needs};
use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::splittings::SplittingSpec;
use crate::sweep::Sweep;
use crate::systems::{TorusMapSystem, TorusPoint};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    /// Uniform one-step ratio below some `λ < 1`.
    Dominated,
    /// Generalized dominated splitting that is not dominated.
    GdsNotDominated,
    /// Ratios bounded by `λ` at multiples of `S`, but no strict witness.
    Conditions12Only,
    /// Some `a_{kS}` exceeds `ln λ`.
    NotGds,
    /// Returned by [`check_dominated`] when the classical bound fails.
    NotDominated,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Dominated => "dominated",
            Verdict::GdsNotDominated => "gds_not_dominated",
            Verdict::Conditions12Only => "conditions12_only",
            Verdict::NotGds => "not_gds",
            Verdict::NotDominated => "not_dominated",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub point: TorusPoint,
    /// `a_S` at the point.
    pub log_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evidence {
    pub grid_points: usize,
    /// Distinct orbits actually walked (see the sweep reduction).
    pub orbits_walked: usize,
    /// True when the verdict rests on a violation found on the grid.
    pub conclusive: bool,
    pub summary: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DominationReport {
    pub verdict: Verdict,
    /// Largest `a_{kS}(x)` over the grid and `k = 1..k_max`.
    pub worst_ratio_log: f64,
    pub worst_point: TorusPoint,
    pub worst_k: usize,
    /// First grid point with `a_S(x₀) ≤ −ln λ − δ`.
    pub witness_x0: Option<Witness>,
    /// Grid point with the smallest `a_S`.
    pub strongest_point: Witness,
    /// Largest one-step ratio `max_x a_S(x)`.
    pub one_step_max: f64,
    /// `exp(one_step_max)` when the splitting is dominated.
    pub ds_lambda: Option<f64>,
    /// Per-step slope of `a_{kS}` at the worst point, for `not_gds`.
    pub growth_rate: Option<f64>,
    pub evidence: Evidence,
    pub params: GdsParams,
    pub grid: GridSpec,
}

struct ClassStats {
    max_a: f64,
    max_k: usize,
    a_s: f64,
}

fn walk_class(
    system: &TorusMapSystem,
    splitting: &SplittingSpec,
    sweep: &Sweep,
    class: usize,
    s: usize,
    k_max: usize,
) -> Result<ClassStats> {
    let mut x = vec![0.0; sweep.dim()];
    sweep.point_into(class, &mut x);
    let mut w = CocycleWalker::new(system, splitting, &x, Needs::RATIO)?;
    let mut st = ClassStats {
        max_a: f64::NEG_INFINITY,
        max_k: 0,
        a_s: f64::NAN,
    };
    for k in 1..=k_max {
        w.advance(s)?;
        let a = w.a();
        if !a.is_finite() {
            return Err(Error::Numeric(format!("a_{} is not finite at {x:?}", k * s)));
        }
        if k == 1 {
            st.a_s = a;
        }
        if a > st.max_a {
            st.max_a = a;
            st.max_k = k;
        }
    }
    Ok(st)
}

struct SweepStats {
    stats: Vec<ClassStats>,
    worst: usize,
    strongest: usize,
    one_step_max: f64,
}

fn sweep_stats(
    system: &TorusMapSystem,
    splitting: &SplittingSpec,
    sweep: &Sweep,
    s: usize,
    k_max: usize,
) -> Result<SweepStats> {
    if splitting.dim() != system.dim() {
        return Err(Error::Dimension("splitting and system dimensions differ".into()));
    }
    let stats = crate::par::try_map_collect(sweep.classes(), |c| {
        walk_class(system, splitting, sweep, c, s, k_max)
    })?;
    if stats.is_empty() {
        return Err(Error::param("grid", "grid is empty"));
    }
    // strict comparisons keep the first index on ties
    let mut worst = 0;
    let mut strongest = 0;
    let mut one_step_max = stats[0].a_s;
    for (i, st) in stats.iter().enumerate() {
        if st.max_a > stats[worst].max_a {
            worst = i;
        }
        if st.a_s < stats[strongest].a_s {
            strongest = i;
        }
        one_step_max = one_step_max.max(st.a_s);
    }
    Ok(SweepStats {
        stats,
        worst,
        strongest,
        one_step_max,
    })
}

fn first_witness(sweep: &Sweep, stats: &[ClassStats], threshold: f64) -> Option<Witness> {
    stats.iter().position(|st| st.a_s <= threshold).map(|c| Witness {
        point: sweep.point(c),
        log_ratio: stats[c].a_s,
    })
}

fn evidence(sweep: &Sweep, conclusive: bool) -> Evidence {
    Evidence {
        grid_points: sweep.grid_points(),
        orbits_walked: sweep.classes(),
        conclusive,
        summary: if conclusive {
            "violation found".into()
        } else {
            "no violation on grid".into()
        },
    }
}

/// Classical `(S, λ)`-domination: `a_S(x) ≤ ln λ` on the grid, `0 < λ < 1`.
pub fn check_dominated(
    system: &TorusMapSystem,
    splitting: &SplittingSpec,
    s: usize,
    lambda: f64,
    grid: &GridSpec,
) -> Result<DominationReport> {
    check_step(s)?;
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::param(
            "lambda",
            format!("domination needs 0 < lambda < 1, got {lambda}"),
        ));
    }
    let sweep = Sweep::new(system, splitting, grid)?;
    let st = sweep_stats(system, splitting, &sweep, s, 1)?;
    let ok = st.one_step_max <= lambda.ln() + CONDITION_TOL;
    let verdict = if ok {
        Verdict::Dominated
    } else {
        Verdict::NotDominated
    };
    let witness = if ok {
        first_witness(&sweep, &st.stats, -lambda.ln() - DEFAULT_DELTA)
    } else {
        None
    };
    Ok(DominationReport {
        verdict,
        worst_ratio_log: st.one_step_max,
        worst_point: sweep.point(st.worst),
        worst_k: 1,
        // dominated ⇒ a_S ≤ ln λ < −ln λ − δ at every point for λ not too close to 1
        witness_x0: witness,
        strongest_point: Witness {
            point: sweep.point(st.strongest),
            log_ratio: st.stats[st.strongest].a_s,
        },
        one_step_max: st.one_step_max,
        ds_lambda: ok.then(|| st.one_step_max.exp()),
        growth_rate: None,
        evidence: evidence(&sweep, !ok),
        params: GdsParams {
            s,
            lambda,
            k_max: 1,
            delta: DEFAULT_DELTA,
        },
        grid: grid.clone(),
    })
}

/// Generalized domination on the grid.
///
/// Checks `a_{kS}(x) ≤ ln λ` for `k = 1..k_max`, then looks for the first
/// grid point with `a_S(x₀) ≤ −ln λ − δ`. A GDS is reported as dominated when
/// the classical check also passes for `λ' = 1 − δ` (and hence for some
/// smaller `λ'`).
pub fn check_gds(
    system: &TorusMapSystem,
    splitting: &SplittingSpec,
    params: &GdsParams,
    grid: &GridSpec,
) -> Result<DominationReport> {
    params.validate()?;
    let s = params.s;
    let ln_lambda = params.lambda.ln();
    let sweep = Sweep::new(system, splitting, grid)?;
    let st = sweep_stats(system, splitting, &sweep, s, params.k_max)?;
    let worst = &st.stats[st.worst];
    let cond2 = worst.max_a <= ln_lambda + CONDITION_TOL;
    let witness = first_witness(&sweep, &st.stats, -ln_lambda - params.delta);
    let dominated = st.one_step_max <= (1.0 - params.delta).ln() + CONDITION_TOL;
    let verdict = match (cond2, witness.is_some()) {
        (false, _) => Verdict::NotGds,
        (true, false) => Verdict::Conditions12Only,
        (true, true) if dominated => Verdict::Dominated,
        (true, true) => Verdict::GdsNotDominated,
    };
    let worst_point = sweep.point(st.worst);
    let growth_rate = if verdict == Verdict::NotGds {
        let mut w = CocycleWalker::new(system, splitting, worst_point.coords(), Needs::RATIO)?;
        w.advance(s)?;
        let first = w.a();
        Some(if params.k_max >= 2 {
            w.advance((params.k_max - 1) * s)?;
            (w.a() - first) / ((params.k_max - 1) * s) as f64
        } else {
            first / s as f64
        })
    } else {
        None
    };
    Ok(DominationReport {
        verdict,
        worst_ratio_log: worst.max_a,
        worst_point,
        worst_k: worst.max_k,
        witness_x0: if matches!(verdict, Verdict::Dominated | Verdict::GdsNotDominated) {
            witness
        } else {
            None
        },
        strongest_point: Witness {
            point: sweep.point(st.strongest),
            log_ratio: st.stats[st.strongest].a_s,
        },
        one_step_max: st.one_step_max,
        ds_lambda: (verdict == Verdict::Dominated).then(|| st.one_step_max.exp()),
        growth_rate,
        evidence: evidence(&sweep, verdict == Verdict::NotGds),
        params: params.clone(),
        grid: grid.clone(),
    })
}

/// `(t, a_S(x(t)))` for `t = i/points`, moving coordinate `axis` of `base`.
pub fn ratio_profile(
    system: &TorusMapSystem,
    splitting: &SplittingSpec,
    s: usize,
    axis: usize,
    points: usize,
    base: &[f64],
) -> Result<Vec<(f64, f64)>> {
    check_step(s)?;
    if base.len() != system.dim() || axis >= system.dim() {
        return Err(Error::Dimension(format!(
            "profile base has {} coordinates and axis {axis}; system has dimension {}",
            base.len(),
            system.dim()
        )));
    }
    crate::par::try_map_collect(points, |i| {
        let t = i as f64 / points as f64;
        let mut x = base.to_vec();
        x[axis] = t;
        let mut w = CocycleWalker::new(system, splitting, &x, Needs::RATIO)?;
        w.advance(s)?;
        Ok((t, w.a()))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::splittings::{coordinate_split, golden_example_splittings, stable_unstable};
    use crate::systems::{golden_contraction, golden_expansion, Minimality};
    use approx::assert_relative_eq;

    fn small() -> GridSpec {
        GridSpec::uniform(32, 8)
    }

    #[test]
    fn cat_map_is_dominated() {
        let sys = TorusMapSystem::cat_map();
        let s = stable_unstable(&sys, "h").unwrap();
        let r = check_dominated(&sys, &s, 1, 0.2, &small()).unwrap();
        assert_eq!(r.verdict, Verdict::Dominated);
        assert_relative_eq!(r.worst_ratio_log, 2.0 * golden_contraction().ln(), epsilon = 1e-12);
        assert!(r.witness_x0.is_some());
        assert!(!r.evidence.conclusive);
        assert!(matches!(
            check_dominated(&sys, &s, 1, 1.0, &small()),
            Err(Error::Parameter { name: "lambda", .. })
        ));
    }

    #[test]
    fn golden_verdicts_on_small_grid() {
        let sys = TorusMapSystem::golden_example();
        let sp = golden_example_splittings(&sys).unwrap();
        let p = GdsParams::new(1, 1.0).with_k_max(20);
        let r0 = check_gds(&sys, &sp[0], &p, &small()).unwrap();
        assert_eq!(r0.verdict, Verdict::GdsNotDominated);
        let w = r0.witness_x0.as_ref().unwrap();
        assert_eq!(w.point.coords(), &[0.0, 0.0, 0.0]);
        assert_relative_eq!(w.log_ratio, golden_contraction().ln() - golden_expansion().ln(), epsilon = 1e-12);
        assert_eq!(r0.worst_point.coords()[0], 0.5);
        assert!(r0.worst_ratio_log.abs() < 1e-12);

        let r1 = check_gds(&sys, &sp[1], &p, &small()).unwrap();
        assert_eq!(r1.verdict, Verdict::GdsNotDominated);
        assert_eq!(r1.strongest_point.point.coords()[0], 0.5);

        let r2 = check_gds(&sys, &sp[2], &p, &small()).unwrap();
        assert_eq!(r2.verdict, Verdict::NotGds);
        assert!(r2.witness_x0.is_none());
        assert!(r2.evidence.conclusive);
        assert_eq!(r2.worst_point.coords()[0], 0.5);
        assert_relative_eq!(r2.growth_rate.unwrap(), 2.0 * golden_expansion().ln(), epsilon = 1e-9);

        let d = check_dominated(&sys, &sp[0], 3, 0.9, &small()).unwrap();
        assert_eq!(d.verdict, Verdict::NotDominated);
        assert_eq!(d.worst_point.coords()[0], 0.5);
        assert!(d.worst_ratio_log.abs() < 1e-12);
    }

    #[test]
    fn rotations_only_meet_conditions_one_and_two() {
        let sys = TorusMapSystem::rotation(vec![0.3, 2f64.sqrt() - 1.0], Minimality::KnownMinimal).unwrap();
        let s = coordinate_split(&sys, 1).unwrap();
        let r = check_gds(&sys, &s, &GdsParams::new(2, 1.0), &small()).unwrap();
        assert_eq!(r.verdict, Verdict::Conditions12Only);
        assert_eq!(r.worst_ratio_log, 0.0);
        assert!(r.witness_x0.is_none());
        let d = check_dominated(&sys, &s, 1, 0.5, &small()).unwrap();
        assert_eq!(d.verdict, Verdict::NotDominated);
    }

    #[test]
    fn invalid_params_name_their_field() {
        let sys = TorusMapSystem::cat_map();
        let s = stable_unstable(&sys, "h").unwrap();
        let e = check_gds(&sys, &s, &GdsParams::new(1, 0.0), &small()).unwrap_err();
        assert!(matches!(e, Error::Parameter { name: "GdsParams.lambda", .. }));
        let e = check_gds(&sys, &s, &GdsParams::new(0, 1.0), &small()).unwrap_err();
        assert!(matches!(e, Error::Parameter { name: "GdsParams.S", .. }));
    }

    #[test]
    fn reduced_sweep_matches_exhaustive() {
        let sys = TorusMapSystem::golden_example();
        let sp = golden_example_splittings(&sys).unwrap();
        let grid = GridSpec::uniform(8, 4);
        let full = Sweep::exhaustive(&sys, &grid).unwrap();
        for s in &sp {
            let reduced = check_gds(&sys, s, &GdsParams::new(1, 1.0).with_k_max(5), &grid).unwrap();
            let st = sweep_stats(&sys, s, &full, 1, 5).unwrap();
            assert_eq!(reduced.worst_ratio_log, st.stats[st.worst].max_a);
            assert_eq!(reduced.worst_point, full.point(st.worst));
            assert_eq!(reduced.one_step_max, st.one_step_max);
            assert_eq!(reduced.strongest_point.point, full.point(st.strongest));
        }
    }

    #[test]
    fn profile_peaks_on_the_repelling_fiber() {
        let sys = TorusMapSystem::golden_example();
        let sp = golden_example_splittings(&sys).unwrap();
        let prof = ratio_profile(&sys, &sp[0], 1, 0, 256, &[0.0, 0.3, 0.7]).unwrap();
        assert_eq!(prof.len(), 256);
        let (imax, max) = prof.iter().enumerate().fold((0, f64::NEG_INFINITY), |b, (i, p)| {
            if p.1 > b.1 { (i, p.1) } else { b }
        });
        assert_eq!(imax, 128);
        assert!(max.abs() < 1e-12);
        assert_relative_eq!(prof[0].1, -2.0 * golden_expansion().ln(), epsilon = 1e-12);
    }
}
