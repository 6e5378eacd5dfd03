//! Experiment configuration files.
//!
//! A config is a TOML document. Only `[system]` is required; every other
//! section has defaults. See `README.md` for the full grammar and the
//! presets under `presets/` for complete examples.

use gds_core::analysis::{GdsParams, Verdict, MAX_BOXES};
use gds_core::decl::{parse_splitting, parse_system};
use gds_core::{GridSpec, SplittingSpec, TorusMapSystem, TorusPoint};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Analysis {
    Classify,
    Lyapunov,
    Recurrence,
    LemmaSearch,
    Liminf,
    Minimality,
    /// Every analysis, with `expect` verdicts enforced.
    VerifyExample,
    All,
}

impl Analysis {
    pub const CONCRETE: [Analysis; 6] = [
        Analysis::Classify,
        Analysis::Lyapunov,
        Analysis::Recurrence,
        Analysis::LemmaSearch,
        Analysis::Liminf,
        Analysis::Minimality,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Analysis::Classify => "classify",
            Analysis::Lyapunov => "lyapunov",
            Analysis::Recurrence => "recurrence",
            Analysis::LemmaSearch => "lemma-search",
            Analysis::Liminf => "liminf",
            Analysis::Minimality => "minimality",
            Analysis::VerifyExample => "verify-example",
            Analysis::All => "all",
        }
    }

    fn needs_splittings(self) -> bool {
        !matches!(self, Analysis::Lyapunov | Analysis::Minimality)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSection {
    pub decl: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplittingSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub decl: String,
    /// Verdict the classifier must return.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expect: Option<Verdict>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSection {
    pub circle: usize,
    pub toral: usize,
    pub extra: Vec<Vec<f64>>,
}

impl Default for GridSection {
    fn default() -> Self {
        let g = GridSpec::default();
        GridSection {
            circle: g.circle,
            toral: g.toral,
            extra: g.extra,
        }
    }
}

impl GridSection {
    pub fn spec(&self) -> GridSpec {
        GridSpec {
            circle: self.circle,
            toral: self.toral,
            extra: self.extra.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct SamplesSection {
    /// Explicit sample points, used first.
    pub points: Vec<Vec<f64>>,
    /// Additional points drawn uniformly from the seed.
    pub random: usize,
    /// `[axis, value]` overrides applied to the random points.
    pub pin: Vec<(usize, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RecurrenceSection {
    pub epsilon: f64,
    pub n_max: usize,
}

impl Default for RecurrenceSection {
    fn default() -> Self {
        RecurrenceSection {
            epsilon: 0.3,
            n_max: 10_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LemmaSection {
    #[serde(rename = "N_max")]
    pub n_max: usize,
    /// `n` values for the measure average.
    pub schedule: Vec<usize>,
}

impl Default for LemmaSection {
    fn default() -> Self {
        LemmaSection {
            n_max: 200,
            schedule: vec![1, 10, 100, 1000],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LiminfSection {
    pub n_max: usize,
    pub window: usize,
}

impl Default for LiminfSection {
    fn default() -> Self {
        LiminfSection {
            n_max: 1000,
            window: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LyapunovSection {
    pub n: usize,
}

impl Default for LyapunovSection {
    fn default() -> Self {
        LyapunovSection { n: 100_000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MinimalitySection {
    pub n: usize,
    /// Boxes per axis.
    pub resolution: usize,
    /// Coordinates to project on; empty means all.
    pub axes: Vec<usize>,
}

impl Default for MinimalitySection {
    fn default() -> Self {
        MinimalitySection {
            n: 100_000,
            resolution: 1000,
            axes: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AsymptoticSection {
    pub n_max: usize,
}

impl Default for AsymptoticSection {
    fn default() -> Self {
        AsymptoticSection { n_max: 1000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct ProfileSection {
    pub axis: usize,
    /// Profile resolution; 0 means the circle grid resolution.
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_analyses")]
    pub analyses: Vec<Analysis>,
    pub system: SystemSection,
    #[serde(default)]
    pub splittings: Vec<SplittingSection>,
    #[serde(default = "default_gds")]
    pub gds: GdsParams,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub samples: SamplesSection,
    #[serde(default)]
    pub recurrence: RecurrenceSection,
    #[serde(default)]
    pub lemma: LemmaSection,
    #[serde(default)]
    pub liminf: LiminfSection,
    #[serde(default)]
    pub lyapunov: LyapunovSection,
    #[serde(default)]
    pub minimality: MinimalitySection,
    #[serde(default)]
    pub asymptotic: AsymptoticSection,
    #[serde(default)]
    pub profile: ProfileSection,
}

fn default_analyses() -> Vec<Analysis> {
    vec![Analysis::All]
}

fn default_gds() -> GdsParams {
    GdsParams::new(1, 1.0)
}

fn line_col(src: &str, offset: usize) -> (usize, usize) {
    let before = &src[..offset.min(src.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

impl ExperimentConfig {
    pub fn from_toml_str(src: &str) -> Result<Self> {
        toml::from_str(src).map_err(|e| {
            let (line, column) = e.span().map_or((1, 1), |s| line_col(src, s.start));
            CliError::Parse {
                line,
                column,
                message: e.message().trim().to_string(),
            }
        })
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes to TOML")
    }

    /// Concrete analyses to run, in a fixed order.
    pub fn selected(&self) -> Vec<Analysis> {
        let mut out: Vec<Analysis> = if self
            .analyses
            .iter()
            .any(|a| matches!(a, Analysis::All | Analysis::VerifyExample))
        {
            Analysis::CONCRETE.to_vec()
        } else {
            self.analyses.clone()
        };
        out.sort();
        out.dedup();
        out
    }

    pub fn enforces_expectations(&self) -> bool {
        self.analyses.contains(&Analysis::VerifyExample)
    }

    /// Overrides the grid resolution: `n` points per circle axis and
    /// `max(n/4, 2)` per toral axis, the ratio of the defaults.
    pub fn set_grid_resolution(&mut self, n: usize) {
        self.grid.circle = n;
        self.grid.toral = (n / 4).max(2);
    }
}

/// A config whose declarations have been parsed and checked.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub config: ExperimentConfig,
    pub system: TorusMapSystem,
    pub splittings: Vec<SplittingSpec>,
    pub samples: Vec<TorusPoint>,
}

fn core_field(err: gds_core::Error, field: &str) -> CliError {
    match err {
        gds_core::Error::Parameter { name, message } => {
            let path = if name.contains('.') {
                name.to_string()
            } else {
                format!("{field}.{name}")
            };
            CliError::validation(path, message)
        }
        gds_core::Error::Declaration { column, message } => {
            CliError::validation(field, format!("column {column}: {message}"))
        }
        other => CliError::validation(field, other.to_string()),
    }
}

fn check(cond: bool, field: &str, message: impl Into<String>) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(CliError::validation(field, message))
    }
}

fn check_point(p: &[f64], d: usize, field: &str) -> Result<()> {
    check(p.len() == d, field, format!("has {} coordinates, the system has {d}", p.len()))?;
    check(p.iter().all(|v| v.is_finite()), field, "coordinates must be finite")
}

impl ExperimentConfig {
    pub fn prepare(&self) -> Result<Prepared> {
        let system = parse_system(&self.system.decl).map_err(|e| core_field(e, "system.decl"))?;
        let d = system.dim();
        let selected = self.selected();
        check(!selected.is_empty(), "analyses", "select at least one analysis")?;

        let mut splittings = Vec::with_capacity(self.splittings.len());
        for (i, s) in self.splittings.iter().enumerate() {
            let field = format!("splittings[{i}].decl");
            let label = s.label.clone().unwrap_or_else(|| format!("splitting {i}"));
            splittings.push(parse_splitting(&s.decl, &label, &system).map_err(|e| core_field(e, &field))?);
        }
        if selected.iter().any(|a| a.needs_splittings()) {
            check(!splittings.is_empty(), "splittings", "the selected analyses need at least one splitting")?;
        }

        self.gds.validate().map_err(|e| core_field(e, "GdsParams"))?;

        let g = &self.grid;
        check(g.circle >= 1, "grid.circle", "must be at least 1")?;
        check(g.toral >= 1, "grid.toral", "must be at least 1")?;
        for (i, p) in g.extra.iter().enumerate() {
            check_point(p, d, &format!("grid.extra[{i}]"))?;
        }

        let sm = &self.samples;
        for (i, p) in sm.points.iter().enumerate() {
            check_point(p, d, &format!("samples.points[{i}]"))?;
        }
        for (i, &(axis, v)) in sm.pin.iter().enumerate() {
            let f = format!("samples.pin[{i}]");
            check(axis < d, &f, format!("axis {axis} out of range for dimension {d}"))?;
            check(v.is_finite(), &f, "value must be finite")?;
        }
        check(sm.points.len() + sm.random > 0, "samples", "needs at least one sample point")?;

        let r = &self.recurrence;
        let lambda = self.gds.lambda;
        check(r.epsilon > 0.0 && r.epsilon.is_finite(), "recurrence.epsilon", "must be positive")?;
        check(
            r.epsilon < 1.0 / lambda,
            "recurrence.epsilon",
            format!("must be below 1/lambda = {}", 1.0 / lambda),
        )?;
        check(r.epsilon * lambda < 1.0, "recurrence.epsilon", "needs epsilon·lambda < 1")?;
        check(r.n_max >= 1, "recurrence.n_max", "must be at least 1")?;

        check(self.lemma.n_max >= 1, "lemma.N_max", "must be at least 1")?;
        check(!self.lemma.schedule.is_empty(), "lemma.schedule", "must not be empty")?;
        check(!self.lemma.schedule.contains(&0), "lemma.schedule", "entries must be at least 1")?;

        let li = &self.liminf;
        check(li.window >= 1 && li.window <= li.n_max, "liminf.window", "needs 1 ≤ window ≤ n_max")?;

        check(self.lyapunov.n >= 1, "lyapunov.n", "must be at least 1")?;

        let m = &self.minimality;
        check(m.resolution >= 1, "minimality.resolution", "must be at least 1")?;
        for (i, &a) in m.axes.iter().enumerate() {
            check(a < d, &format!("minimality.axes[{i}]"), format!("axis {a} out of range"))?;
        }
        let k = if m.axes.is_empty() { d } else { m.axes.len() };
        let boxes = (m.resolution as u128).checked_pow(k as u32);
        check(
            !selected.contains(&Analysis::Minimality) || boxes.is_some_and(|b| b <= MAX_BOXES),
            "minimality.resolution",
            format!("{}^{k} boxes exceeds {MAX_BOXES}", m.resolution),
        )?;

        check(self.asymptotic.n_max >= 1, "asymptotic.n_max", "must be at least 1")?;
        check(self.profile.axis < d, "profile.axis", format!("out of range for dimension {d}"))?;

        let mut samples: Vec<TorusPoint> = sm.points.iter().map(|p| TorusPoint::new(p.clone())).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        for _ in 0..sm.random {
            let mut p: Vec<f64> = (0..d).map(|_| rng.random::<f64>()).collect();
            for &(axis, v) in &sm.pin {
                p[axis] = v;
            }
            samples.push(TorusPoint::new(p));
        }

        Ok(Prepared {
            config: self.clone(),
            system,
            splittings,
            samples,
        })
    }
}
