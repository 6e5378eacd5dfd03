//! Executes a prepared config and writes its outputs.

use std::path::{Path, PathBuf};
use std::time::Instant;

use gds_core::analysis::{
    asymptotic_ratio_bound_check, check_dominated, check_gds, liminf_probe, lyapunov_spectrum, marginal_density,
    measure_average_inf, minimality_probe, proof_bound_check, ratio_profile, uniform_negativity_search,
    EmpiricalMeasure,
};
use gds_core::cocycle::a_trace;
use gds_core::splittings::{check_invariance, continuity_evidence};
use gds_core::SplittingSpec;

use crate::config::{Analysis, ExperimentConfig, Prepared};
use crate::error::{CliError, NumericContext, Result};
use crate::plots::{emit_plot_data, slug, PlotTable};
use crate::report::{
    ClassifyEntry, ExpectationCheck, FactorInfo, LemmaEntry, LiminfEntry, LyapunovEntry, RecurrenceEntry,
    ReportPayload, RunReport, SampleAverage, SystemInfo, Timing, GRID_CAVEAT, TOOL,
};

/// How many leading recurrence times go into the report; the full list is in
/// the bound-trace table.
const FIRST_TIMES: usize = 20;

fn system_info(p: &Prepared) -> SystemInfo {
    SystemInfo {
        dim: p.system.dim(),
        factors: p
            .system
            .factors()
            .iter()
            .map(|f| FactorInfo {
                label: f.label.clone(),
                kind: f.kind.kind_name().to_string(),
                dim: f.kind.dim(),
                offset: f.offset,
            })
            .collect(),
        declared_minimality: p.system.declared_minimality(),
        derivative_sup: p.system.derivative_sup(),
    }
}

fn table_stem(kind: &str, i: usize, s: &SplittingSpec) -> String {
    format!("{kind}__{i}_{}", slug(&s.label))
}

struct Runner<'a> {
    p: &'a Prepared,
    payload: ReportPayload,
    tables: Vec<PlotTable>,
}

impl Runner<'_> {
    fn cfg(&self) -> &ExperimentConfig {
        &self.p.config
    }

    fn classify(&mut self) -> Result<()> {
        let p = self.p;
        let c = &p.config;
        let grid = c.grid.spec();
        let params = &c.gds;
        for (i, s) in p.splittings.iter().enumerate() {
            let invariance = check_invariance(&p.system, s, &grid).during("check_invariance", None)?;
            let continuity = continuity_evidence(&p.system, s, &grid).during("continuity_evidence", None)?;
            let gds = check_gds(&p.system, s, params, &grid).during("check_gds", None)?;
            let dominated = if params.lambda < 1.0 {
                Some(check_dominated(&p.system, s, params.s, params.lambda, &grid).during("check_dominated", None)?)
            } else {
                None
            };
            let asymptotic = asymptotic_ratio_bound_check(&p.system, s, params, &p.samples, c.asymptotic.n_max)
                .during("asymptotic_ratio_bound_check", None)?;

            let points = if c.profile.points == 0 { c.grid.circle } else { c.profile.points };
            let base = p.samples[0].coords();
            let profile = ratio_profile(&p.system, s, params.s, c.profile.axis, points, base)
                .during("ratio_profile", Some(base))?;
            let mut t = PlotTable::new(table_stem("ratio_profile", i, s), &["x", "a_S"]);
            for (x, a) in profile {
                t.push(vec![x, a]);
            }
            self.tables.push(t);

            for (j, x) in p.samples.iter().enumerate() {
                let trace = a_trace(&p.system, s, x, c.asymptotic.n_max).during("a_trace", Some(x.coords()))?;
                let mut t = PlotTable::new(format!("{}__x{j}", table_stem("convergence", i, s)), &["n", "a_n_over_n"]);
                for (k, a) in trace.iter().enumerate() {
                    let n = (k + 1) as f64;
                    t.push(vec![n, a / n]);
                }
                self.tables.push(t);
            }

            if let Some(expected) = c.splittings[i].expect {
                self.payload.expectations.push(ExpectationCheck {
                    splitting: s.label.clone(),
                    expected,
                    got: gds.verdict,
                    ok: expected == gds.verdict,
                });
            }
            self.payload.classify.push(ClassifyEntry {
                splitting: s.label.clone(),
                invariance,
                continuity,
                gds,
                dominated,
                asymptotic,
            });
        }
        Ok(())
    }

    fn lyapunov(&mut self) -> Result<()> {
        let n = self.cfg().lyapunov.n;
        for x in &self.p.samples {
            let exponents = lyapunov_spectrum(&self.p.system, x.coords(), n).during("lyapunov_spectrum", Some(x.coords()))?;
            self.payload.lyapunov.push(LyapunovEntry {
                x: x.clone(),
                n,
                sum: exponents.iter().sum(),
                exponents,
            });
        }
        Ok(())
    }

    fn recurrence(&mut self) -> Result<()> {
        let p = self.p;
        let c = &p.config;
        let r = &c.recurrence;
        for (i, s) in p.splittings.iter().enumerate() {
            for (j, x) in p.samples.iter().enumerate() {
                let rep = proof_bound_check(&p.system, s, c.gds.s, c.gds.lambda, r.epsilon, x, r.n_max)
                    .during("proof_bound_check", Some(x.coords()))?;
                let mut t = PlotTable::new(
                    format!("{}__x{j}", table_stem("bound_trace", i, s)),
                    &["i", "t_i", "c_t_i", "bound"],
                );
                for row in &rep.rows {
                    t.push(vec![row.i as f64, row.t_i as f64, row.c, row.bound]);
                }
                self.tables.push(t);
                let rec = &rep.record;
                self.payload.recurrence.push(RecurrenceEntry {
                    splitting: s.label.clone(),
                    x: x.clone(),
                    n_max: rec.n_max,
                    visits: rec.times.len(),
                    first_times: rec.times.iter().take(FIRST_TIMES).copied().collect(),
                    chi_star: rec.chi_star,
                    ratio_estimate: rec.ratio_estimate(),
                    bound_status: rep.status,
                    min_margin: (!rep.rows.is_empty()).then_some(rep.min_margin),
                    observed_slope: rep.observed_slope,
                    predicted_slope: rep.predicted_slope,
                });
            }
        }
        Ok(())
    }

    fn lemma_search(&mut self) -> Result<()> {
        let p = self.p;
        let c = &p.config;
        let grid = c.grid.spec();
        let schedule = &c.lemma.schedule;
        let mu = EmpiricalMeasure::uniform(p.samples.clone()).during("empirical measure", None)?;
        for s in &p.splittings {
            let uniform_negativity =
                uniform_negativity_search(&p.system, s, &grid, c.lemma.n_max).during("uniform_negativity_search", None)?;
            let avg = measure_average_inf(&p.system, s, &mu, schedule).during("measure_average_inf", None)?;
            let per_sample = p
                .samples
                .iter()
                .map(|x| {
                    let d = EmpiricalMeasure::dirac(x.clone());
                    measure_average_inf(&p.system, s, &d, schedule)
                        .during("measure_average_inf", Some(x.coords()))
                        .map(|value| SampleAverage { x: x.clone(), value })
                })
                .collect::<Result<Vec<_>>>()?;
            self.payload.lemma_search.push(LemmaEntry {
                splitting: s.label.clone(),
                n_max: c.lemma.n_max,
                uniform_negativity,
                schedule: schedule.clone(),
                measure_average_inf: avg,
                per_sample,
            });
        }
        Ok(())
    }

    fn liminf(&mut self) -> Result<()> {
        let p = self.p;
        let li = &p.config.liminf;
        for s in &p.splittings {
            for x in &p.samples {
                let value =
                    liminf_probe(&p.system, s, x, li.n_max, li.window).during("liminf_probe", Some(x.coords()))?;
                self.payload.liminf.push(LiminfEntry {
                    splitting: s.label.clone(),
                    x: x.clone(),
                    n_max: li.n_max,
                    window: li.window,
                    value,
                });
            }
        }
        Ok(())
    }

    fn minimality(&mut self) -> Result<()> {
        let p = self.p;
        let m = &p.config.minimality;
        for x in &p.samples {
            let ev = if m.axes.is_empty() {
                minimality_probe(&p.system, x, m.n, m.resolution).during("minimality_probe", Some(x.coords()))?
            } else {
                marginal_density(&p.system, x, m.n, m.resolution, &m.axes)
                    .during("marginal_density", Some(x.coords()))?
            };
            self.payload.minimality.push(ev);
        }
        Ok(())
    }
}

/// Runs every selected analysis. Nothing is written to disk.
pub fn run(prepared: &Prepared) -> Result<RunReport> {
    let start = Instant::now();
    let config = &prepared.config;
    let selected = config.selected();
    let payload = ReportPayload {
        tool: TOOL.to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        config: config.clone(),
        config_toml: config.to_toml_string(),
        system: system_info(prepared),
        samples: prepared.samples.clone(),
        caveats: vec![GRID_CAVEAT.to_string()],
        analyses: selected.iter().map(|a| a.name().to_string()).collect(),
        classify: Vec::new(),
        lyapunov: Vec::new(),
        recurrence: Vec::new(),
        lemma_search: Vec::new(),
        liminf: Vec::new(),
        minimality: Vec::new(),
        expectations: Vec::new(),
        plots: Vec::new(),
    };
    let mut runner = Runner {
        p: prepared,
        payload,
        tables: Vec::new(),
    };
    let mut per_analysis = Vec::new();
    for a in selected {
        let t = Instant::now();
        match a {
            Analysis::Classify => runner.classify()?,
            Analysis::Lyapunov => runner.lyapunov()?,
            Analysis::Recurrence => runner.recurrence()?,
            Analysis::LemmaSearch => runner.lemma_search()?,
            Analysis::Liminf => runner.liminf()?,
            Analysis::Minimality => runner.minimality()?,
            Analysis::VerifyExample | Analysis::All => unreachable!("selected() expands these"),
        }
        per_analysis.push((a.name().to_string(), t.elapsed().as_secs_f64()));
    }
    let Runner {
        mut payload, tables, ..
    } = runner;
    payload.plots = tables.iter().map(|t| format!("plots/{}", t.file_name())).collect();
    Ok(RunReport {
        payload,
        timing: Timing {
            total_seconds: start.elapsed().as_secs_f64(),
            per_analysis,
        },
        tables,
    })
}

/// Parses, validates and runs.
pub fn run_config(config: &ExperimentConfig) -> Result<RunReport> {
    run(&config.prepare()?)
}

fn write(path: PathBuf, bytes: &[u8]) -> Result<()> {
    std::fs::write(&path, bytes).map_err(|e| CliError::io(path, e))
}

/// Writes `report.json`, `timing.json`, `summary.txt` and `plots/*.csv`.
pub fn write_outputs(report: &RunReport, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    write(dir.join("report.json"), report.payload_json().as_bytes())?;
    let timing = serde_json::to_string_pretty(&report.timing).expect("timing serializes") + "\n";
    write(dir.join("timing.json"), timing.as_bytes())?;
    write(dir.join("summary.txt"), report.summary().as_bytes())?;
    let plots = dir.join("plots");
    for t in &report.tables {
        emit_plot_data(t, &plots)?;
    }
    Ok(())
}

/// Fails with an expectation error when a config that enforces verdicts
/// got a different one.
pub fn enforce(report: &RunReport) -> Result<()> {
    if !report.payload.config.enforces_expectations() {
        return Ok(());
    }
    let bad: Vec<String> = report
        .payload
        .expectations
        .iter()
        .filter(|e| !e.ok)
        .map(|e| format!("{}: expected {}, got {}", e.splitting, e.expected.as_str(), e.got.as_str()))
        .collect();
    if bad.is_empty() {
        Ok(())
    } else {
        Err(CliError::Expectation(bad.join("; ")))
    }
}
