use serde::{Deserialize, Serialize};

use super::check_step;
use crate::cocycle::{CocycleWalker, Needs};
use crate::error::{Error, Result};
use crate::splittings::SplittingSpec;
use crate::systems::{TorusMapSystem, TorusPoint};

/// Slack on `c_{t_i}(x) ≤ i·ln(1 − ελ)`.
pub const BOUND_TOL: f64 = 1e-6;

fn log_threshold(lambda: f64, epsilon: f64) -> Result<f64> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::param("lambda", format!("must be positive, got {lambda}")));
    }
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(Error::param("epsilon", format!("must be positive, got {epsilon}")));
    }
    let t = 1.0 / lambda - epsilon;
    if t <= 0.0 {
        return Err(Error::param(
            "epsilon",
            format!("A_ε is empty: 1/lambda − epsilon = {t} ≤ 0"),
        ));
    }
    Ok(t.ln())
}

/// Whether `x ∈ A_ε`, i.e. `exp(a_S(x)) < 1/λ − ε`.
pub fn a_epsilon_membership(
    system: &TorusMapSystem,
    splitting: &SplittingSpec,
    s: usize,
    lambda: f64,
    epsilon: f64,
    x: &TorusPoint,
) -> Result<bool> {
    check_step(s)?;
    let ln_t = log_threshold(lambda, epsilon)?;
    let mut w = CocycleWalker::new(system, splitting, x.coords(), Needs::RATIO)?;
    w.advance(s)?;
    Ok(w.a() < ln_t)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecurrenceRecord {
    pub epsilon: f64,
    #[serde(rename = "S")]
    pub s: usize,
    pub lambda: f64,
    /// Times `j < n_max` with `f^{jS}(x) ∈ A_ε`. Starts with 0 exactly when
    /// `x ∈ A_ε`.
    pub times: Vec<usize>,
    pub n_max: usize,
    /// Fraction of `j < n_max` with `f^{jS}(x) ∈ A_ε`.
    pub chi_star: f64,
}

impl RecurrenceRecord {
    pub fn starts_in_a_epsilon(&self) -> bool {
        self.times.first() == Some(&0)
    }

    /// `i / t_i` at the last recorded visit, the other estimate of `χ*`.
    pub fn ratio_estimate(&self) -> Option<f64> {
        match self.times.as_slice() {
            [] | [0] => None,
            ts => Some((ts.len() - 1) as f64 / *ts.last().unwrap() as f64),
        }
    }
}

/// Visits of the `S`-step orbit of `x` to `A_ε` together with the cumulative
/// `c_j(x) = a_{jS}(x)` for `j = 0..=n_max`.
fn visits_and_cocycle(
    system: &TorusMapSystem,
    splitting: &SplittingSpec,
    s: usize,
    ln_t: f64,
    x: &TorusPoint,
    n_max: usize,
) -> Result<(Vec<usize>, Vec<f64>)> {
    let mut c = CocycleWalker::new(system, splitting, x.coords(), Needs::RATIO)?;
    let mut times = Vec::new();
    let mut cumulative = Vec::with_capacity(n_max + 1);
    cumulative.push(0.0);
    for j in 0..n_max {
        let mut one = CocycleWalker::new(system, splitting, c.point(), Needs::RATIO)?;
        one.advance(s)?;
        if one.a() < ln_t {
            times.push(j);
        }
        c.advance(s)?;
        cumulative.push(c.a());
    }
    Ok((times, cumulative))
}

pub fn recurrence_analysis(
    system: &TorusMapSystem,
    splitting: &SplittingSpec,
    s: usize,
    lambda: f64,
    epsilon: f64,
    x: &TorusPoint,
    n_max: usize,
) -> Result<RecurrenceRecord> {
    check_step(s)?;
    if n_max == 0 {
        return Err(Error::param("n_max", "must be at least 1"));
    }
    let ln_t = log_threshold(lambda, epsilon)?;
    let (times, _) = visits_and_cocycle(system, splitting, s, ln_t, x, n_max)?;
    Ok(RecurrenceRecord {
        epsilon,
        s,
        lambda,
        chi_star: times.len() as f64 / n_max as f64,
        times,
        n_max,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundStatus {
    Holds,
    Violated,
    /// `x ∉ A_ε`, so the chain of inequalities does not start.
    HypothesisNotMet,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundRow {
    pub i: usize,
    pub t_i: usize,
    /// `c_{t_i}(x) = a_{t_i S}(x)`.
    pub c: f64,
    /// `i·ln(1 − ελ)`.
    pub bound: f64,
    /// `bound − c`; nonnegative when the inequality holds exactly.
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProofBoundReport {
    pub status: BoundStatus,
    pub rows: Vec<BoundRow>,
    pub min_margin: f64,
    pub record: RecurrenceRecord,
    /// `c_{t_last}(x) / t_last`.
    pub observed_slope: Option<f64>,
    /// `χ*·ln(1 − ελ)`.
    pub predicted_slope: f64,
}

/// Checks `c_{t_i}(x) ≤ i·ln(1 − ελ)` at every visit time up to `n_max`.
pub fn proof_bound_check(
    system: &TorusMapSystem,
    splitting: &SplittingSpec,
    s: usize,
    lambda: f64,
    epsilon: f64,
    x: &TorusPoint,
    n_max: usize,
) -> Result<ProofBoundReport> {
    check_step(s)?;
    if n_max == 0 {
        return Err(Error::param("n_max", "must be at least 1"));
    }
    if epsilon * lambda >= 1.0 {
        return Err(Error::param(
            "epsilon",
            format!("needs epsilon·lambda < 1, got {}", epsilon * lambda),
        ));
    }
    let ln_t = log_threshold(lambda, epsilon)?;
    let (times, cumulative) = visits_and_cocycle(system, splitting, s, ln_t, x, n_max)?;
    let slope = (1.0 - epsilon * lambda).ln();
    let record = RecurrenceRecord {
        epsilon,
        s,
        lambda,
        chi_star: times.len() as f64 / n_max as f64,
        times,
        n_max,
    };
    let predicted_slope = record.chi_star * slope;
    if !record.starts_in_a_epsilon() {
        return Ok(ProofBoundReport {
            status: BoundStatus::HypothesisNotMet,
            rows: Vec::new(),
            min_margin: f64::NAN,
            record,
            observed_slope: None,
            predicted_slope,
        });
    }
    let rows: Vec<BoundRow> = record
        .times
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            let c = cumulative[t];
            let bound = i as f64 * slope;
            BoundRow {
                i,
                t_i: t,
                c,
                bound,
                margin: bound - c,
            }
        })
        .collect();
    let min_margin = rows.iter().map(|r| r.margin).fold(f64::INFINITY, f64::min);
    let status = if min_margin >= -BOUND_TOL {
        BoundStatus::Holds
    } else {
        BoundStatus::Violated
    };
    let last = rows.last().unwrap();
    Ok(ProofBoundReport {
        status,
        observed_slope: (last.t_i > 0).then(|| last.c / last.t_i as f64),
        min_margin,
        rows,
        record,
        predicted_slope,
    })
}
