//! Model files and run documents.
//!
//! A [`RunDocument`] echoes the full [`CommandConfig`] of a command next to
//! its results. Replaying the config through [`execute`] reproduces the
//! `result` value exactly; `kdr rerun` checks this.

use std::fs;
use std::path::{Path, PathBuf};

use kdr_core::classify::{evaluate_with_classes, Classifier, EvalReport};
use kdr_core::dimred::{FitReport, Projector};
use kdr_core::pipeline::{
    alternating_protocol, bootstrap_ensemble, evaluate_model, fit_model, grid_search, lopo_cv, simulation_study,
    Dataset, EnsembleConfig, Executor, ExperimentConfig, ParamGrid, StudyConfig,
};
use kdr_core::synthdata::{generate, SynthSpec};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::io::{self, read_dataset, write_text};
use crate::resources::Resources;
use crate::Error;

pub const FORMAT_VERSION: u32 = 1;
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, Error> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io { path: path.into(), source })?;
    serde_json::from_str(&text).map_err(|source| Error::Json { path: path.into(), source })
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), Error> {
    let mut text = serde_json::to_string_pretty(value).map_err(|source| Error::Json { path: path.into(), source })?;
    text.push('\n');
    write_text(path, &text)
}

fn check_version(path: &Path, found: u32) -> Result<(), Error> {
    if found != FORMAT_VERSION {
        return Err(Error::schema(path, format!("format version {found}, expected {FORMAT_VERSION}")));
    }
    Ok(())
}

/// A fitted projector and classifier with the configuration that made them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub format_version: u32,
    pub tool_version: String,
    pub config: ExperimentConfig,
    pub projector: Projector,
    pub classifier: Classifier,
}

impl ModelFile {
    pub fn new(config: ExperimentConfig, projector: Projector, classifier: Classifier) -> Self {
        Self { format_version: FORMAT_VERSION, tool_version: TOOL_VERSION.into(), config, projector, classifier }
    }

    pub fn save(&self, path: &Path) -> Result<(), Error> {
        write_json(path, self)
    }

    pub fn load(path: &Path) -> Result<Self, Error> {
        let m: Self = read_json(path)?;
        check_version(path, m.format_version)?;
        Ok(m)
    }
}

/// Everything a command needs to run, inputs named by path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "snake_case")]
pub enum CommandConfig {
    Gen { spec: SynthSpec, out: PathBuf },
    Fit { config: ExperimentConfig, input: PathBuf, model: PathBuf },
    Transform { model: PathBuf, input: PathBuf, out: PathBuf },
    Classify { model: PathBuf, input: PathBuf, out: Option<PathBuf> },
    Tune { config: ExperimentConfig, grid: ParamGrid, train: PathBuf, test: PathBuf, out: Option<PathBuf> },
    Ensemble { config: ExperimentConfig, ensemble: EnsembleConfig, train: PathBuf, test: PathBuf, out: Option<PathBuf> },
    Lopo { config: ExperimentConfig, input: PathBuf },
    Roc { input: PathBuf, out: PathBuf },
    Alternate { config: ExperimentConfig, s1: PathBuf, s2: PathBuf, r: Option<PathBuf> },
    Study { data: SynthSpec, study: StudyConfig },
}

impl CommandConfig {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Gen { .. } => "gen",
            Self::Fit { .. } => "fit",
            Self::Transform { .. } => "transform",
            Self::Classify { .. } => "classify",
            Self::Tune { .. } => "tune",
            Self::Ensemble { .. } => "ensemble",
            Self::Lopo { .. } => "lopo",
            Self::Roc { .. } => "roc",
            Self::Alternate { .. } => "alternate",
            Self::Study { .. } => "study",
        }
    }

    /// Every seed that influences the result.
    pub fn seeds(&self) -> Vec<u64> {
        let svm = |c: &ExperimentConfig| c.svm.seed;
        match self {
            Self::Gen { spec, .. } => vec![spec.seed],
            Self::Fit { config, .. }
            | Self::Tune { config, .. }
            | Self::Lopo { config, .. }
            | Self::Alternate { config, .. } => vec![svm(config)],
            Self::Ensemble { config, ensemble, .. } => {
                let mut s = vec![svm(config)];
                s.extend(ensemble.seeds());
                s
            }
            Self::Study { data, study } => {
                let mut s = vec![data.seed, study.split_seed];
                s.extend(study.methods.iter().map(|m| m.base.svm.seed));
                s.dedup();
                s
            }
            Self::Transform { .. } | Self::Classify { .. } | Self::Roc { .. } => Vec::new(),
        }
    }
}

/// The record written by every command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunDocument {
    pub format_version: u32,
    pub tool_version: String,
    pub config: CommandConfig,
    pub seeds: Vec<u64>,
    pub artifacts: Vec<PathBuf>,
    pub result: Value,
    /// Absent when the run was asked to leave out timing, which keeps the
    /// document byte-identical across runs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resources: Option<Resources>,
}

impl RunDocument {
    pub fn new(config: CommandConfig, outcome: Outcome, resources: Option<Resources>) -> Self {
        Self {
            format_version: FORMAT_VERSION,
            tool_version: TOOL_VERSION.into(),
            seeds: config.seeds(),
            config,
            artifacts: outcome.artifacts,
            result: outcome.result,
            resources,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("run documents hold only JSON-representable values");
        s.push('\n');
        s
    }

    pub fn save(&self, path: &Path) -> Result<(), Error> {
        write_text(path, &self.to_json())
    }

    pub fn load(path: &Path) -> Result<Self, Error> {
        let d: Self = read_json(path)?;
        check_version(path, d.format_version)?;
        Ok(d)
    }
}

pub struct Outcome {
    pub result: Value,
    pub artifacts: Vec<PathBuf>,
    /// One line for the terminal.
    pub summary: String,
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("results hold only JSON-representable values")
}

/// FNV-1a over the bit patterns, to pin bulk outputs in a document.
pub fn fnv64(values: impl IntoIterator<Item = u64>) -> String {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for v in values {
        for b in v.to_le_bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
    }
    format!("{h:016x}")
}

fn labels_fnv(labels: &[i64]) -> String {
    fnv64(labels.iter().map(|&v| v as u64))
}

/// Training-set report from the stored training projections.
fn train_report(projector: &Projector, classifier: &Classifier, train: &Dataset) -> Result<EvalReport, Error> {
    let proj = projector.train_projections();
    let pred = classifier.predict(proj)?;
    let scores = classifier.scores(proj)?;
    let mut classes = classifier.classes();
    classes.extend_from_slice(train.y());
    classes.sort_unstable();
    classes.dedup();
    Ok(evaluate_with_classes(&classes, train.y(), &pred, scores.as_deref())?)
}

#[derive(Serialize)]
struct FitResult<'a> {
    fit: &'a FitReport,
    train: &'a EvalReport,
}

/// Runs `cfg`. With `write` unset nothing is written to disk, which is how
/// run documents are replayed.
pub fn execute<E: Executor>(cfg: &CommandConfig, exec: &E, write: bool) -> Result<Outcome, Error> {
    let mut artifacts = Vec::new();
    let mut emit = |path: &Path, text: String| -> Result<(), Error> {
        if write {
            write_text(path, &text)?;
            artifacts.push(path.to_path_buf());
        }
        Ok(())
    };
    let (result, summary) = match cfg {
        CommandConfig::Gen { spec, out } => {
            let data = generate(spec);
            let text = io::dataset_to_csv(&data, out)?;
            let digest = fnv64(text.bytes().map(u64::from));
            emit(out, text)?;
            let counts = data.class_counts();
            let summary = format!("{} rows, {} features, classes {:?}", data.n(), data.p(), counts);
            (json!({ "rows": data.n(), "features": data.p(), "class_counts": counts, "file_fnv": digest }), summary)
        }
        CommandConfig::Fit { config, input, model } => {
            let train = read_dataset(input)?;
            let (projector, classifier) = fit_model(&train, config)?;
            let report = train_report(&projector, &classifier, &train)?;
            let result = to_value(&FitResult { fit: projector.report(), train: &report });
            let summary = format!("retained d={} train {}", projector.d(), io::summary(&report));
            if write {
                ModelFile::new(config.clone(), projector, classifier).save(model)?;
                artifacts.push(model.clone());
            }
            (result, summary)
        }
        CommandConfig::Transform { model, input, out } => {
            let m = ModelFile::load(model)?;
            let data = read_dataset(input)?;
            let proj = m.projector.transform(data.x())?;
            let digest = fnv64(proj.iter().map(|v| v.to_bits()));
            emit(out, io::dataset_to_csv(&io::projection_dataset(&proj, &data)?, out)?)?;
            let summary = format!("{} rows projected to {} columns", proj.nrows(), proj.ncols());
            (json!({ "rows": proj.nrows(), "d": proj.ncols(), "projection_fnv": digest }), summary)
        }
        CommandConfig::Classify { model, input, out } => {
            let m = ModelFile::load(model)?;
            let data = read_dataset(input)?;
            let eval = evaluate_model(&m.projector, &m.classifier, &data)?;
            if let Some(out) = out {
                emit(out, io::predictions_to_csv(data.y(), &eval.predictions, eval.scores.as_deref(), out)?)?;
            }
            let summary = io::summary(&eval.report);
            (json!({ "report": to_value(&eval.report), "predictions_fnv": labels_fnv(&eval.predictions) }), summary)
        }
        CommandConfig::Tune { config, grid, train, test, out } => {
            let rows = grid_search(&read_dataset(train)?, &read_dataset(test)?, config, grid, exec)?;
            if let Some(out) = out {
                emit(out, io::tuning_to_csv(&rows, out)?)?;
            }
            let ok = rows.iter().filter(|r| r.accuracy.is_some()).count();
            let best = rows.first().and_then(|r| r.accuracy).unwrap_or(f64::NAN);
            let summary = format!("{} rows ({} failed), best accuracy {best:.4}", rows.len(), rows.len() - ok);
            (json!({ "rows": to_value(&rows) }), summary)
        }
        CommandConfig::Ensemble { config, ensemble, train, test, out } => {
            let m2 = read_dataset(test)?;
            let res = bootstrap_ensemble(&read_dataset(train)?, &m2, config, ensemble, exec)?;
            if let Some(out) = out {
                emit(out, io::predictions_to_csv(m2.y(), &res.predictions, res.scores.as_deref(), out)?)?;
            }
            let workers: Vec<Value> = res
                .workers
                .iter()
                .map(|w| json!({ "index": w.index, "seed": w.seed, "report": to_value(&w.report) }))
                .collect();
            let summary = format!("{} workers, merged {}", workers.len(), io::summary(&res.report));
            let result = json!({
                "workers": workers,
                "report": to_value(&res.report),
                "predictions_fnv": labels_fnv(&res.predictions),
            });
            (result, summary)
        }
        CommandConfig::Lopo { config, input } => {
            let res = lopo_cv(&read_dataset(input)?, config, exec)?;
            let summary = format!("{} folds, mean accuracy {:.4}", res.folds.len(), res.mean.accuracy);
            (to_value(&res), summary)
        }
        CommandConfig::Roc { input, out } => {
            let (labels, scores) = io::read_scores(input)?;
            let report = kdr_core::classify::evaluate(&labels, &labels, Some(&scores))?;
            let (roc, auc) = report
                .roc
                .zip(report.auc)
                .ok_or_else(|| Error::schema(input, "ROC needs exactly two classes among the labels"))?;
            emit(out, io::roc_to_csv(&roc, auc))?;
            (json!({ "auc": auc, "points": roc.len() }), format!("auc={auc:.4} over {} points", roc.len()))
        }
        CommandConfig::Alternate { config, s1, s2, r } => {
            let s1 = read_dataset(s1)?;
            let s2 = read_dataset(s2)?;
            let r = match r {
                Some(p) => read_dataset(p)?,
                None => s1.subset(&[])?,
            };
            let res = alternating_protocol(&s1, &s2, &r, config)?;
            let summary = format!("mean accuracy {:.4}", res.mean.accuracy);
            (to_value(&res), summary)
        }
        CommandConfig::Study { data, study } => {
            let res = simulation_study(&generate(data), study, exec)?;
            let summary = res
                .rows
                .iter()
                .map(|r| format!("{}={:.4}", r.best.dr.method().name(), r.report.accuracy))
                .collect::<Vec<_>>()
                .join(" ");
            (to_value(&res), summary)
        }
    };
    Ok(Outcome { result, artifacts, summary })
}

/// Path of the first difference between two JSON values, if any.
pub fn first_difference(a: &Value, b: &Value) -> Option<String> {
    fn walk(a: &Value, b: &Value, at: &mut String) -> bool {
        match (a, b) {
            (Value::Object(x), Value::Object(y)) => {
                if x.len() != y.len() {
                    return false;
                }
                for (k, v) in x {
                    let Some(w) = y.get(k) else { return false };
                    let len = at.len();
                    at.push('.');
                    at.push_str(k);
                    if !walk(v, w, at) {
                        return false;
                    }
                    at.truncate(len);
                }
                true
            }
            (Value::Array(x), Value::Array(y)) => {
                if x.len() != y.len() {
                    return false;
                }
                for (i, (v, w)) in x.iter().zip(y).enumerate() {
                    let len = at.len();
                    at.push_str(&format!("[{i}]"));
                    if !walk(v, w, at) {
                        return false;
                    }
                    at.truncate(len);
                }
                true
            }
            _ => a == b,
        }
    }
    let mut at = String::from("result");
    (!walk(a, b, &mut at)).then_some(at)
}

/// Replays a document without writing artifacts and checks the result.
pub fn rerun<E: Executor>(doc: &RunDocument, exec: &E) -> Result<Outcome, Error> {
    let outcome = execute(&doc.config, exec, false)?;
    // Compare through the serialized form so both sides went through the
    // same float printing and parsing.
    let fresh: Value = serde_json::from_str(&outcome.result.to_string()).expect("round trip of a JSON value");
    let recorded: Value = serde_json::from_str(&doc.result.to_string()).expect("round trip of a JSON value");
    match first_difference(&recorded, &fresh) {
        Some(path) => Err(Error::RerunMismatch(path)),
        None => Ok(outcome),
    }
}
