use serde::{Deserialize, Serialize};

use super::GdsParams;
use crate::cocycle::{a_trace, CocycleWalker, Needs};
use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::splittings::SplittingSpec;
use crate::sweep::Sweep;
use crate::systems::{TorusMapSystem, TorusPoint};

/// `a_N` must stay below `−NEGATIVITY_TOL` everywhere to count as negative.
pub const NEGATIVITY_TOL: f64 = 1e-9;

/// Finitely supported probability measure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalMeasure {
    samples: Vec<(TorusPoint, f64)>,
}

impl EmpiricalMeasure {
    /// Weights must be nonnegative and sum to 1 within `1e-12`.
    pub fn new(samples: Vec<(TorusPoint, f64)>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::param("mu", "needs at least one sample"));
        }
        if samples.iter().any(|(_, w)| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::param("mu", "weights must be nonnegative"));
        }
        let total: f64 = samples.iter().map(|(_, w)| w).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::param("mu", format!("weights sum to {total}, not 1")));
        }
        Ok(EmpiricalMeasure { samples })
    }

    pub fn dirac(x: TorusPoint) -> Self {
        EmpiricalMeasure {
            samples: vec![(x, 1.0)],
        }
    }

    pub fn uniform(points: Vec<TorusPoint>) -> Result<Self> {
        let w = 1.0 / points.len() as f64;
        let n = points.len();
        let mut samples: Vec<_> = points.into_iter().map(|p| (p, w)).collect();
        // absorb rounding into the last weight
        if n > 0 {
            let head: f64 = samples[..n - 1].iter().map(|(_, w)| w).sum();
            samples[n - 1].1 = 1.0 - head;
        }
        Self::new(samples)
    }

    pub fn samples(&self) -> &[(TorusPoint, f64)] {
        &self.samples
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NegativityResult {
    #[serde(rename = "N")]
    pub n: usize,
    /// `exp(max_x a_N(x))`: the splitting is `(N, τ)`-dominated on the grid.
    pub tau: f64,
    pub max_log_ratio: f64,
    pub worst_point: TorusPoint,
    pub orbits_walked: usize,
}

/// Points in van der Corput order, so early chunks are spread over the grid.
fn spread_order(n: usize) -> Vec<usize> {
    if n <= 1 {
        return (0..n).collect();
    }
    let bits = usize::BITS - (n - 1).leading_zeros();
    (0..1usize << bits)
        .map(|r| r.reverse_bits() >> (usize::BITS - bits))
        .filter(|&i| i < n)
        .collect()
}

const SEARCH_CHUNK: usize = 512;

/// Smallest `N ≤ n_max` with `max_x a_N(x) < 0` on the grid.
///
/// Candidates are discarded as soon as one grid point has `a_N ≥ 0`, so a
/// single bad fiber ends the search early. The result does not depend on the
/// order in which points are visited.
pub fn uniform_negativity_search(
    system: &TorusMapSystem,
    splitting: &SplittingSpec,
    grid: &GridSpec,
    n_max: usize,
) -> Result<Option<NegativityResult>> {
    if n_max == 0 {
        return Err(Error::param("N_max", "must be at least 1"));
    }
    if splitting.dim() != system.dim() {
        return Err(Error::Dimension("splitting and system dimensions differ".into()));
    }
    let sweep = Sweep::new(system, splitting, grid)?;
    let order = spread_order(sweep.classes());
    // index N-1 holds data for N
    let mut alive = vec![true; n_max];
    let mut max_a = vec![f64::NEG_INFINITY; n_max];
    let mut arg = vec![usize::MAX; n_max];
    for chunk in order.chunks(SEARCH_CHUNK) {
        let Some(depth) = alive.iter().rposition(|&a| a).map(|i| i + 1) else {
            return Ok(None);
        };
        let traces = crate::par::try_map_collect(chunk.len(), |i| {
            let mut x = vec![0.0; sweep.dim()];
            sweep.point_into(chunk[i], &mut x);
            let mut w = CocycleWalker::new(system, splitting, &x, Needs::RATIO)?;
            let mut t = Vec::with_capacity(depth);
            for _ in 0..depth {
                w.step()?;
                t.push(w.a());
            }
            Ok::<_, Error>(t)
        })?;
        for (&class, trace) in chunk.iter().zip(&traces) {
            for (k, &a) in trace.iter().enumerate() {
                if !alive[k] {
                    continue;
                }
                if a >= -NEGATIVITY_TOL || a.is_nan() {
                    alive[k] = false;
                } else if a > max_a[k] || (a == max_a[k] && class < arg[k]) {
                    max_a[k] = a;
                    arg[k] = class;
                }
            }
        }
    }
    Ok(alive.iter().position(|&a| a).map(|k| NegativityResult {
        n: k + 1,
        tau: max_a[k].exp(),
        max_log_ratio: max_a[k],
        worst_point: sweep.point(arg[k]),
        orbits_walked: sweep.classes(),
    }))
}

/// `min_{n ∈ schedule} (1/n)·Σ_j w_j·a_n(x_j)`.
pub fn measure_average_inf(
    system: &TorusMapSystem,
    splitting: &SplittingSpec,
    mu: &EmpiricalMeasure,
    n_schedule: &[usize],
) -> Result<f64> {
    if n_schedule.is_empty() {
        return Err(Error::param("n_schedule", "must not be empty"));
    }
    if n_schedule.contains(&0) {
        return Err(Error::param("n_schedule", "entries must be at least 1"));
    }
    let depth = *n_schedule.iter().max().unwrap();
    let traces = crate::par::try_map_collect(mu.samples().len(), |j| {
        a_trace(system, splitting, &mu.samples()[j].0, depth)
    })?;
    let mut best = f64::INFINITY;
    for &n in n_schedule {
        let mut acc = 0.0;
        for ((_, w), t) in mu.samples().iter().zip(&traces) {
            acc += w * t[n - 1];
        }
        best = best.min(acc / n as f64);
    }
    Ok(best)
}

/// `min_{n_max − window ≤ n ≤ n_max} a_n(x)/n`.
pub fn liminf_probe(
    system: &TorusMapSystem,
    splitting: &SplittingSpec,
    x: &TorusPoint,
    n_max: usize,
    window: usize,
) -> Result<f64> {
    if window == 0 || window > n_max {
        return Err(Error::param("window", "needs 1 ≤ window ≤ n_max"));
    }
    let t = a_trace(system, splitting, x, n_max)?;
    let lo = (n_max - window).max(1);
    Ok((lo..=n_max).map(|n| t[n - 1] / n as f64).fold(f64::INFINITY, f64::min))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleBound {
    pub x: TorusPoint,
    /// Largest `a_n/n − bound_n` over `n = 1..=n_max`.
    pub max_excess: f64,
    pub worst_n: usize,
    /// `a_{n_max}(x)/n_max`.
    pub final_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticBoundReport {
    /// `(1/S)·min(ln λ, 0)`.
    pub limit_bound: f64,
    /// Derivative bound used in the slack `2S·ln C`.
    pub c: f64,
    pub slack: f64,
    pub n_max: usize,
    pub samples: Vec<SampleBound>,
    pub pass: bool,
}

const ASYMPTOTIC_TOL: f64 = 1e-9;

/// Finite-`n` form of the asymptotic ratio bound.
///
/// With `k = ⌊n/S⌋`, the multiples-of-S condition and subadditivity give
/// `a_{kS} ≤ min(k·ln λ, ln λ)` (and `a_0 = 0`), and the sandwich inequality
/// adds at most `2S·ln C`. Dividing by `n` gives a bound that tends to
/// `(1/S)·min(ln λ, 0)`.
pub fn asymptotic_ratio_bound_check(
    system: &TorusMapSystem,
    splitting: &SplittingSpec,
    params: &GdsParams,
    samples: &[TorusPoint],
    n_max: usize,
) -> Result<AsymptoticBoundReport> {
    params.validate()?;
    if n_max == 0 {
        return Err(Error::param("n_max", "must be at least 1"));
    }
    let s = params.s;
    let ln_l = params.lambda.ln();
    let c = system.derivative_sup();
    let slack = 2.0 * s as f64 * c.ln();
    let bound = |n: usize| {
        let k = n / s;
        let head = if k == 0 { 0.0 } else { (k as f64 * ln_l).min(ln_l) };
        (head + slack) / n as f64
    };
    let rows = crate::par::try_map_collect(samples.len(), |j| {
        let t = a_trace(system, splitting, &samples[j], n_max)?;
        let mut max_excess = f64::NEG_INFINITY;
        let mut worst_n = 0;
        for (i, &a) in t.iter().enumerate() {
            let n = i + 1;
            let e = a / n as f64 - bound(n);
            if e > max_excess {
                max_excess = e;
                worst_n = n;
            }
        }
        Ok::<_, Error>(SampleBound {
            x: samples[j].clone(),
            max_excess,
            worst_n,
            final_ratio: t[n_max - 1] / n_max as f64,
        })
    })?;
    let pass = rows.iter().all(|r| r.max_excess <= ASYMPTOTIC_TOL);
    Ok(AsymptoticBoundReport {
        limit_bound: ln_l.min(0.0) / s as f64,
        c,
        slack,
        n_max,
        samples: rows,
        pass,
    })
}
