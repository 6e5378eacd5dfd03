use std::fmt::Write as _;

use gds_core::analysis::{
    AsymptoticBoundReport, BoundStatus, DensityEvidence, DominationReport, NegativityResult, Verdict,
};
use gds_core::splittings::{ContinuityEvidence, InvarianceReport};
use gds_core::systems::Minimality;
use gds_core::TorusPoint;
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::plots::PlotTable;

pub const TOOL: &str = "gds";

/// Attached to every report: grid checks are evidence, not proofs.
pub const GRID_CAVEAT: &str =
    "for-all statements are checked on a finite grid: violations are conclusive, passes are evidence only";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorInfo {
    pub label: String,
    pub kind: String,
    pub dim: usize,
    pub offset: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemInfo {
    pub dim: usize,
    pub factors: Vec<FactorInfo>,
    pub declared_minimality: Minimality,
    /// Closed-form `sup max(‖Df‖, ‖Df⁻¹‖)`.
    pub derivative_sup: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifyEntry {
    pub splitting: String,
    pub invariance: InvarianceReport,
    pub continuity: ContinuityEvidence,
    pub gds: DominationReport,
    /// Classical check at the configured `(S, λ)`, when `λ < 1`.
    pub dominated: Option<DominationReport>,
    pub asymptotic: AsymptoticBoundReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LyapunovEntry {
    pub x: TorusPoint,
    pub n: usize,
    /// Ascending.
    pub exponents: Vec<f64>,
    pub sum: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecurrenceEntry {
    pub splitting: String,
    pub x: TorusPoint,
    pub n_max: usize,
    pub visits: usize,
    pub first_times: Vec<usize>,
    pub chi_star: f64,
    /// `i/t_i` at the last visit.
    pub ratio_estimate: Option<f64>,
    pub bound_status: BoundStatus,
    pub min_margin: Option<f64>,
    pub observed_slope: Option<f64>,
    pub predicted_slope: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleAverage {
    pub x: TorusPoint,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaEntry {
    pub splitting: String,
    #[serde(rename = "N_max")]
    pub n_max: usize,
    pub uniform_negativity: Option<NegativityResult>,
    pub schedule: Vec<usize>,
    /// Infimum for the uniform measure on all samples.
    pub measure_average_inf: f64,
    /// Same quantity for the Dirac measure at each sample.
    pub per_sample: Vec<SampleAverage>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiminfEntry {
    pub splitting: String,
    pub x: TorusPoint,
    pub n_max: usize,
    pub window: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpectationCheck {
    pub splitting: String,
    pub expected: Verdict,
    pub got: Verdict,
    pub ok: bool,
}

/// Everything in a report except timing. Identical configs give
/// byte-identical serializations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportPayload {
    pub tool: String,
    pub version: String,
    pub config: ExperimentConfig,
    /// The config as TOML; parses back to `config`.
    pub config_toml: String,
    pub system: SystemInfo,
    pub samples: Vec<TorusPoint>,
    pub caveats: Vec<String>,
    pub analyses: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub classify: Vec<ClassifyEntry>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub lyapunov: Vec<LyapunovEntry>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub recurrence: Vec<RecurrenceEntry>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub lemma_search: Vec<LemmaEntry>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub liminf: Vec<LiminfEntry>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub minimality: Vec<DensityEvidence>,
    pub expectations: Vec<ExpectationCheck>,
    /// Plot-data file names written next to the report.
    pub plots: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub total_seconds: f64,
    pub per_analysis: Vec<(String, f64)>,
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub payload: ReportPayload,
    pub timing: Timing,
    pub tables: Vec<PlotTable>,
}

impl RunReport {
    pub fn payload_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.payload).expect("payload serializes");
        s.push('\n');
        s
    }

    pub fn expectations_met(&self) -> bool {
        self.payload.expectations.iter().all(|e| e.ok)
    }

    pub fn summary(&self) -> String {
        let p = &self.payload;
        let mut s = String::new();
        let _ = writeln!(s, "{} {}  config: {}", p.tool, p.version, p.config.name.as_deref().unwrap_or("(unnamed)"));
        let _ = writeln!(s, "system: {} (dimension {})", p.config.system.decl, p.system.dim);
        let _ = writeln!(s, "note: {GRID_CAVEAT}");
        for c in &p.classify {
            let g = &c.gds;
            let _ = writeln!(s, "\n[classify] {}", c.splitting);
            let _ = writeln!(
                s,
                "  verdict {} (S = {}, lambda = {}, k_max = {}) [{}]",
                g.verdict.as_str(),
                g.params.s,
                g.params.lambda,
                g.params.k_max,
                g.evidence.summary
            );
            let _ = writeln!(s, "  max a_kS = {:.6} at {:?} (k = {})", g.worst_ratio_log, g.worst_point.coords(), g.worst_k);
            if let Some(w) = &g.witness_x0 {
                let _ = writeln!(s, "  witness x0 = {:?}, a_S = {:.6}", w.point.coords(), w.log_ratio);
            }
            if let Some(r) = g.growth_rate {
                let _ = writeln!(s, "  growth rate at worst point: {r:.6} per step");
            }
            let _ = writeln!(s, "  invariance defect {:.3e}", c.invariance.max_principal_angle_defect);
            let _ = writeln!(s, "  asymptotic bound: {}", if c.asymptotic.pass { "holds on samples" } else { "VIOLATED" });
        }
        for l in &p.lyapunov {
            let _ = writeln!(s, "\n[lyapunov] x = {:?}, n = {}: {:?}", l.x.coords(), l.n, l.exponents);
        }
        for r in &p.recurrence {
            let _ = writeln!(
                s,
                "\n[recurrence] {} from {:?}: chi* = {:.6}, bound {:?}",
                r.splitting,
                r.x.coords(),
                r.chi_star,
                r.bound_status
            );
        }
        for l in &p.lemma_search {
            let n = match &l.uniform_negativity {
                Some(r) => format!("N = {}, tau = {:.6e}", r.n, r.tau),
                None => format!("none up to N_max = {}", l.n_max),
            };
            let _ = writeln!(s, "\n[lemma-search] {}: {n}; inf average = {:.6}", l.splitting, l.measure_average_inf);
        }
        for l in &p.liminf {
            let _ = writeln!(s, "\n[liminf] {} from {:?}: {:.6}", l.splitting, l.x.coords(), l.value);
        }
        for m in &p.minimality {
            let _ = writeln!(
                s,
                "\n[minimality] axes {:?}: {}/{} boxes ({:.6}), declared {:?}",
                m.axes, m.visited, m.boxes, m.fraction, m.declared
            );
        }
        for e in &p.expectations {
            let _ = writeln!(
                s,
                "\n[expect] {}: expected {}, got {} -> {}",
                e.splitting,
                e.expected.as_str(),
                e.got.as_str(),
                if e.ok { "ok" } else { "MISMATCH" }
            );
        }
        s
    }
}
