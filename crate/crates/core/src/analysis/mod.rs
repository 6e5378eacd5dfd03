//! Classification of splittings and the quantities used around it:
//! Lyapunov spectra, visits to `A_ε`, the recurrence bound, uniform
//! negativity of `a_N`, liminf probes and orbit density.
//!
//! Every "for all x" statement is evaluated on a [`GridSpec`]. A violation
//! found on the grid is conclusive; the absence of one is evidence only, and
//! reports say which of the two they carry.

mod classify;
mod lemma;
mod lyapunov;
mod minimality;
mod recurrence;

pub use classify::{
    check_dominated, check_gds, ratio_profile, DominationReport, Evidence, Verdict, Witness,
};
pub use lemma::{
    asymptotic_ratio_bound_check, liminf_probe, measure_average_inf, uniform_negativity_search,
    AsymptoticBoundReport, EmpiricalMeasure, NegativityResult, SampleBound,
};
pub use lyapunov::lyapunov_spectrum;
pub use minimality::{marginal_density, minimality_probe, DensityEvidence, MAX_BOXES};
pub use recurrence::{
    a_epsilon_membership, proof_bound_check, recurrence_analysis, BoundRow, BoundStatus,
    ProofBoundReport, RecurrenceRecord,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Slack allowed on `a_{kS}(x) ≤ ln λ` before a point counts as a violation.
pub const CONDITION_TOL: f64 = 1e-9;

/// Default margin for the strict inequality of the witness condition.
pub const DEFAULT_DELTA: f64 = 1e-6;

/// Default truncation of "for every k" in the multiples-of-S condition.
pub const DEFAULT_K_MAX: usize = 50;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GdsParams {
    #[serde(rename = "S", alias = "s")]
    pub s: usize,
    pub lambda: f64,
    #[serde(default = "default_k_max")]
    pub k_max: usize,
    #[serde(default = "default_delta")]
    pub delta: f64,
}

fn default_k_max() -> usize {
    DEFAULT_K_MAX
}

fn default_delta() -> f64 {
    DEFAULT_DELTA
}

impl GdsParams {
    pub fn new(s: usize, lambda: f64) -> Self {
        GdsParams {
            s,
            lambda,
            k_max: DEFAULT_K_MAX,
            delta: DEFAULT_DELTA,
        }
    }

    pub fn with_k_max(mut self, k_max: usize) -> Self {
        self.k_max = k_max;
        self
    }

    pub fn with_delta(mut self, delta: f64) -> Self {
        self.delta = delta;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.s == 0 {
            return Err(Error::param("GdsParams.S", "must be at least 1"));
        }
        if !(self.lambda.is_finite() && self.lambda > 0.0) {
            return Err(Error::param("GdsParams.lambda", format!("must be positive, got {}", self.lambda)));
        }
        if self.k_max == 0 {
            return Err(Error::param("GdsParams.k_max", "must be at least 1"));
        }
        if !(self.delta.is_finite() && self.delta > 0.0) {
            return Err(Error::param("GdsParams.delta", format!("must be positive, got {}", self.delta)));
        }
        Ok(())
    }
}

fn check_step(s: usize) -> Result<()> {
    if s == 0 {
        return Err(Error::param("S", "must be at least 1"));
    }
    Ok(())
}
