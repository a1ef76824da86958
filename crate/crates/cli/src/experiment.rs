//! Experiment specifications and the `verify` report.
//!
//! A specification is a JSON document:
//!
//! ```text
//! {
//!   "form": "x1^2 + x2^2 + x3^2 + x4^2 + x5^2",   // or "form_file": "f.txt"
//!   "s": null,                                     // optional
//!   "m": 2,
//!   "family": { "diag_scale": { "base": "11:1,22:1", "n": [4, 9] } },
//!                                                  // or { "explicit": ["11:4,22:4"] }
//!   "exact": "representations",                    // or "boxed"
//!   "count_limit": null,                           // exact-count budget
//!   "density": { "seed": 7, "p_max": 53, "schedule": "2:6,3:3", "eps": 0.05,
//!                "samples": 1000000, "chi_p_limit": null, "fallback_samples": null },
//!   "outputs": { "csv": "report.csv", "json": "report.json" }
//! }
//! ```
//!
//! Relative paths are resolved against the directory of the specification.
//! `"boxed"` counts inside the box `P_i = n_i^{1/d}` that the prediction is
//! normalised to; `"representations"` counts everything and needs a positive
//! definite quadratic form.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::Args;
use repcount_core::density::{DensityConfig, Level, LevelSchedule, MainTermReport, CHI_P_WORK_LIMIT};
use repcount_core::enumerate::{count_boxed_part, count_representations_part, BlockBox};
use repcount_core::TargetForm;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::cache::{cached, Cache, FactorRecord, PredictionRecord, ResultRecord, VERSION};
use crate::commands::split;
use crate::input::{input_error, parse_form, parse_psi, read_text, Instance};
use crate::output::{write_atomic, Cell, Format, RowBuilder, Table};
use crate::{require_seed, Common};

#[derive(Args, Clone, Debug)]
pub struct DensityArgs {
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value_t = 53)]
    pub p_max: u64,
    /// Level overrides such as "2:6,3:3".
    #[arg(long, default_value = "")]
    pub schedule: String,
    #[arg(long, default_value_t = 0.05)]
    pub eps: f64,
    #[arg(long, default_value_t = 1_000_000)]
    pub samples: u64,
    #[arg(long, default_value_t = CHI_P_WORK_LIMIT)]
    pub chi_p_limit: u128,
    /// Sample local factors that exceed the work limit instead of refusing.
    #[arg(long)]
    pub fallback_samples: Option<u64>,
}

impl DensityArgs {
    pub fn config(&self) -> Result<DensityConfig> {
        let mut cfg = DensityConfig::new(require_seed(self.seed)?);
        cfg.p_max = self.p_max;
        cfg.schedule = LevelSchedule::parse(&self.schedule)?;
        cfg.eps = self.eps;
        cfg.samples = self.samples;
        cfg.chi_p_limit = self.chi_p_limit;
        cfg.chi_p_fallback_samples = self.fallback_samples;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DensitySpec {
    pub seed: u64,
    #[serde(default = "default_p_max")]
    pub p_max: u64,
    #[serde(default)]
    pub schedule: String,
    #[serde(default = "default_eps")]
    pub eps: f64,
    #[serde(default = "default_samples")]
    pub samples: u64,
    #[serde(default)]
    pub chi_p_limit: Option<u128>,
    #[serde(default)]
    pub fallback_samples: Option<u64>,
}

fn default_p_max() -> u64 {
    53
}

fn default_eps() -> f64 {
    0.05
}

fn default_samples() -> u64 {
    1_000_000
}

impl DensitySpec {
    fn args(&self) -> DensityArgs {
        DensityArgs {
            seed: Some(self.seed),
            p_max: self.p_max,
            schedule: self.schedule.clone(),
            eps: self.eps,
            samples: self.samples,
            chi_p_limit: self.chi_p_limit.unwrap_or(CHI_P_WORK_LIMIT),
            fallback_samples: self.fallback_samples,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Family {
    Explicit(Vec<String>),
    DiagScale { base: String, n: Vec<u64> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExactMode {
    Representations,
    Boxed,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    pub csv: Option<PathBuf>,
    pub json: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub form: Option<String>,
    pub form_file: Option<PathBuf>,
    pub s: Option<usize>,
    pub m: usize,
    pub family: Family,
    #[serde(default = "default_exact")]
    pub exact: ExactMode,
    /// Work budget of the exact count.
    #[serde(default)]
    pub count_limit: Option<u128>,
    pub density: DensitySpec,
    #[serde(default)]
    pub outputs: Outputs,
}

fn default_exact() -> ExactMode {
    ExactMode::Representations
}

/// A family member with its label (`n` for scaled families, the 1-based
/// position otherwise).
struct Member {
    label: u64,
    psi: TargetForm,
}

impl ExperimentSpec {
    pub fn load(path: &Path) -> Result<ExperimentSpec> {
        let text = read_text(path)?;
        let mut spec: ExperimentSpec = serde_json::from_str(&text)
            .map_err(|e| input_error(format!("invalid experiment spec {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        spec.form_file = spec.form_file.map(|p| base.join(p));
        spec.outputs.csv = spec.outputs.csv.map(|p| base.join(p));
        spec.outputs.json = spec.outputs.json.map(|p| base.join(p));
        spec.validate()?;
        Ok(spec)
    }

    fn validate(&self) -> Result<()> {
        match (&self.form, &self.form_file) {
            (Some(_), None) => {}
            (None, Some(p)) if p.is_file() => {}
            (None, Some(p)) => return Err(input_error(format!("form file {} does not exist", p.display()))),
            _ => return Err(input_error("give exactly one of form and form_file")),
        }
        let empty = match &self.family {
            Family::Explicit(v) => v.is_empty(),
            Family::DiagScale { n, .. } => n.is_empty(),
        };
        if empty {
            return Err(input_error("the family is empty"));
        }
        for p in [&self.outputs.csv, &self.outputs.json].into_iter().flatten() {
            let dir = p.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
            if !dir.is_dir() {
                return Err(input_error(format!("output directory {} does not exist", dir.display())));
            }
        }
        Ok(())
    }

    fn form_text(&self) -> Result<String> {
        match (&self.form, &self.form_file) {
            (Some(t), _) => Ok(t.clone()),
            (None, Some(p)) => read_text(p),
            (None, None) => Err(input_error("no form given")),
        }
    }

    fn members(&self, d: u32) -> Result<Vec<Member>> {
        match &self.family {
            Family::Explicit(list) => list
                .iter()
                .enumerate()
                .map(|(k, t)| Ok(Member { label: k as u64 + 1, psi: parse_psi(t, self.m, Some(d))? }))
                .collect(),
            Family::DiagScale { base, n } => {
                let b = parse_psi(base, self.m, Some(d))?;
                Ok(n.iter().map(|&k| Member { label: k, psi: b.scale(&k.into()) }).collect())
            }
        }
    }
}

/// `⌊n^{1/d}⌋` when `n` is a perfect power, `n^{1/d}` otherwise.
fn root(n: &dyn std::fmt::Display, d: u32) -> Result<f64> {
    let v: f64 = n.to_string().parse().context("diagonal coefficient")?;
    let guess = v.powf(1.0 / d as f64).round();
    if guess.powi(d as i32) == v {
        return Ok(guess);
    }
    Ok(v.powf(1.0 / d as f64))
}

/// The box `P_i = n_i^{1/d}` the prediction refers to.
pub fn natural_box(psi: &TargetForm) -> Result<BlockBox> {
    let bounds = psi.diagonals().iter().map(|n| root(n, psi.d())).collect::<Result<Vec<_>>>()?;
    Ok(BlockBox::new(bounds)?)
}

pub fn prediction_record(rep: &MainTermReport) -> PredictionRecord {
    let factors = rep
        .euler
        .factors
        .iter()
        .map(|(p, e)| FactorRecord {
            p: *p,
            level: match e.level {
                Level::PAdic { l, .. } => l,
                _ => 0,
            },
            value: e.value,
            stderr: e.stderr,
            method: e.method.as_str().into(),
        })
        .collect();
    PredictionRecord {
        magnitude_factor: rep.magnitude_factor,
        chi_inf: rep.chi_inf.value,
        chi_inf_stderr: rep.chi_inf.stderr,
        chi_inf_half: rep.chi_inf_half.map(|e| e.value),
        chi_inf_half_stderr: rep.chi_inf_half.map(|e| e.stderr),
        eps_consistent: rep.eps_consistent,
        euler: rep.euler.estimate.value,
        euler_stderr: rep.euler.estimate.stderr,
        local_obstruction: rep.euler.local_obstruction,
        factors,
        prediction: rep.prediction,
        stderr: rep.stderr,
    }
}

fn run_member(inst: &Instance, spec: &ExperimentSpec, density: &DensityArgs, threads: u64, rec: &mut ResultRecord) {
    let limit = spec.count_limit.unwrap_or(repcount_core::DEFAULT_ENUMERATION_LIMIT);
    let count = match spec.exact {
        ExactMode::Representations => {
            split(threads, |part| count_representations_part(&inst.form, &inst.psi, part, limit))
        }
        ExactMode::Boxed => match natural_box(&inst.psi) {
            Ok(bx) => split(threads, |part| {
                count_boxed_part(&inst.sys, &inst.psi, &bx, part, limit)
            }),
            Err(e) => {
                rec.error = Some(format!("{e:#}"));
                return;
            }
        },
    };
    let mut errors = Vec::new();
    match count {
        Ok(parts) => rec.exact_count = Some(parts.iter().sum::<u128>().to_string()),
        Err(e) => errors.push(format!("exact count: {e}")),
    }
    match density.config().and_then(|cfg| Ok(repcount_core::density::main_term(&inst.form, &inst.psi, &cfg)?)) {
        Ok(rep) => rec.prediction = Some(prediction_record(&rep)),
        Err(e) => errors.push(format!("prediction: {e:#}")),
    }
    if !errors.is_empty() {
        rec.error = Some(errors.join("; "));
    }
}

fn row(label: u64, psi: &TargetForm, rec: &ResultRecord) -> RowBuilder {
    let p = rec.prediction.as_ref();
    let f = |g: fn(&PredictionRecord) -> f64| Cell::opt_float(p.map(g));
    RowBuilder::new()
        .int("n", label)
        .text("psi", psi.to_spec_string())
        .cell("exact", rec.exact_count.as_ref().map_or(Cell::Null, Cell::int))
        .cell("magnitude_factor", f(|p| p.magnitude_factor))
        .cell("chi_inf", f(|p| p.chi_inf))
        .cell("chi_inf_stderr", f(|p| p.chi_inf_stderr))
        .cell("euler", f(|p| p.euler))
        .cell("euler_stderr", f(|p| p.euler_stderr))
        .cell("prediction", f(|p| p.prediction))
        .cell("prediction_stderr", f(|p| p.stderr))
        .cell("ratio", Cell::opt_float(rec.ratio))
        .cell("eps_consistent", p.map_or(Cell::Null, |p| Cell::Bool(p.eps_consistent)))
        .cell("local_obstruction", p.map_or(Cell::Null, |p| Cell::Bool(p.local_obstruction)))
        .text("status", rec.error.clone().map_or("ok".into(), |e| format!("error: {e}")))
        .text("digest", rec.digest.clone())
}

pub fn verify(path: &Path, common: &Common) -> Result<Table> {
    let spec = ExperimentSpec::load(path)?;
    let form = parse_form(&spec.form_text()?, spec.s)?;
    let members = spec.members(form.d())?;
    let density = spec.density.args();
    density.config()?;
    let cache = Cache::from_env()?;
    let mut table = Table::new("verify");
    for mem in members {
        let key = json!({
            "kind": "verify", "version": VERSION,
            "form": form.to_string(), "s": form.s(), "psi": mem.psi.to_spec_string(), "m": mem.psi.m(),
            "exact": spec.exact, "density": spec.density,
        });
        let rec = match Instance::new(form.clone(), mem.psi.clone()) {
            Ok(inst) => cached(cache.as_ref(), key, |rec| {
                run_member(&inst, &spec, &density, common.threads, rec);
                Ok(())
            })?,
            Err(e) => {
                let mut rec = ResultRecord::new(key);
                rec.error = Some(format!("{e:#}"));
                rec
            }
        };
        table.push(row(mem.label, &mem.psi, &rec));
    }
    if let Some(p) = &spec.outputs.csv {
        write_atomic(p, table.render(Format::Csv)?.as_bytes())?;
    }
    if let Some(p) = &spec.outputs.json {
        write_atomic(p, table.render(Format::Json)?.as_bytes())?;
    }
    Ok(table)
}
