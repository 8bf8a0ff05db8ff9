use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use kdr_core::classify::SvmParams;
use kdr_core::dimred::DrSpec;
use kdr_core::hsic::LinkSpec;
use kdr_core::kernels::KernelSpec;
use kdr_core::pipeline::{EnsembleConfig, ExperimentConfig, StudyConfig};
use kdr_core::synthdata::{SynthDataset, SynthSpec, DEFAULT_NOISE_SD};

use crate::doc::{execute, rerun, CommandConfig, RunDocument};
use crate::exec::Workers;
use crate::io::read_grid;
use crate::resources::Stopwatch;
use crate::Error;

#[derive(Debug, Parser)]
#[command(name = "kdr", version, about = "Kernel dimension reduction and linear SVM experiments")]
pub struct Cli {
    /// Worker threads for grid rows, folds and ensemble members.
    #[arg(long, global = true, default_value_t = 1)]
    pub workers: usize,
    /// Where to write the run document; printed to stdout when absent.
    #[arg(long, global = true)]
    pub doc: Option<PathBuf>,
    /// Leave wall time and memory out of the run document.
    #[arg(long, global = true)]
    pub no_resources: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic dataset.
    Gen {
        #[arg(long, value_enum)]
        dataset: DatasetArg,
        #[arg(long)]
        n_per_class: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_NOISE_SD)]
        noise_sd: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit a projector and classifier and save them as a model file.
    Fit {
        #[command(flatten)]
        method: MethodArgs,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        model: PathBuf,
    },
    /// Project a dataset with a saved model.
    Transform {
        #[arg(long)]
        model: PathBuf,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Predict and score a labelled dataset with a saved model.
    Classify {
        #[arg(long)]
        model: PathBuf,
        #[arg(long = "in")]
        input: PathBuf,
        /// Predictions CSV (`label,predicted,score`).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Grid search on a tuning train/test pair.
    Tune {
        #[command(flatten)]
        method: MethodArgs,
        #[arg(long)]
        grid: PathBuf,
        #[arg(long)]
        train: PathBuf,
        #[arg(long)]
        test: PathBuf,
        /// Ranked table CSV.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Bootstrap ensemble trained on `--train`, majority vote on `--test`.
    Ensemble {
        #[command(flatten)]
        method: MethodArgs,
        #[arg(long)]
        train: PathBuf,
        #[arg(long)]
        test: PathBuf,
        #[arg(long)]
        samples: usize,
        #[arg(long)]
        sample_size: usize,
        /// Worker `i` samples with seed `seed + i`.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Leave-one-subject-out cross-validation.
    Lopo {
        #[command(flatten)]
        method: MethodArgs,
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// ROC points and AUC from a predictions CSV.
    Roc {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train on S1 and test on S2 ∪ R, then the reverse; report the mean.
    Alternate {
        #[command(flatten)]
        method: MethodArgs,
        #[arg(long)]
        s1: PathBuf,
        #[arg(long)]
        s2: PathBuf,
        #[arg(long)]
        r: Option<PathBuf>,
    },
    /// Tune and test every method on a generated dataset.
    Study {
        #[arg(long, value_enum)]
        dataset: DatasetArg,
        #[arg(long, default_value_t = 300)]
        n_per_class: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_NOISE_SD)]
        noise_sd: f64,
        /// Defaults to `--seed`.
        #[arg(long)]
        split_seed: Option<u64>,
        /// Tune against the test partition instead of held-out training rows.
        #[arg(long)]
        allow_overlap: bool,
    },
    /// Replay a run document and check that every result value matches.
    Rerun {
        #[arg(long = "from")]
        from: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum DatasetArg {
    #[value(alias = "wine-chocolate")]
    WineChocolate,
    #[value(alias = "apple-tart")]
    AppleTart,
    #[value(alias = "swiss-roll")]
    SwissRoll,
}

impl From<DatasetArg> for SynthDataset {
    fn from(d: DatasetArg) -> Self {
        match d {
            DatasetArg::WineChocolate => Self::WineChocolate,
            DatasetArg::AppleTart => Self::AppleTart,
            DatasetArg::SwissRoll => Self::SwissRoll,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum MethodArg {
    Pca,
    Lda,
    Kpca,
    Skpca,
    Klda,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum KernelArg {
    Rbf,
    Linear,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum LinkArg {
    Indicator,
    Modified,
}

#[derive(Debug, Clone, Args)]
pub struct MethodArgs {
    #[arg(long, value_enum)]
    pub method: MethodArg,
    #[arg(long, value_enum, default_value = "rbf")]
    pub kernel: KernelArg,
    /// RBF scale in `exp(−δ‖x−y‖²)`.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub delta: f64,
    /// Read `--delta`, `--link-delta` and grid deltas in the
    /// positive-exponent form `exp(δ‖x−y‖²)` and negate them.
    #[arg(long)]
    pub paper_sign: bool,
    #[arg(long, value_enum, default_value = "indicator")]
    pub link: LinkArg,
    #[arg(long, default_value_t = 1.0)]
    pub eta: f64,
    /// Scale of the modified link's kernel; defaults to `--delta`.
    #[arg(long, allow_negative_numbers = true)]
    pub link_delta: Option<f64>,
    #[arg(long, default_value_t = 2)]
    pub d: usize,
    #[arg(long, default_value_t = 1.0)]
    pub cost: f64,
    #[arg(long, default_value_t = SvmParams::default().tol)]
    pub tol: f64,
    #[arg(long, default_value_t = SvmParams::default().max_updates)]
    pub max_updates: u64,
    #[arg(long, default_value_t = 0)]
    pub svm_seed: u64,
    /// Train the SVM on raw projections instead of z-scored ones.
    #[arg(long)]
    pub no_svm_scale: bool,
    /// Skip Platt calibration of binary classifiers.
    #[arg(long)]
    pub no_platt: bool,
}

impl MethodArgs {
    fn signed(&self, delta: f64) -> f64 {
        if self.paper_sign {
            -delta
        } else {
            delta
        }
    }

    pub fn config(&self) -> ExperimentConfig {
        let kernel = match self.kernel {
            KernelArg::Rbf => KernelSpec::rbf(self.signed(self.delta)),
            KernelArg::Linear => KernelSpec::Linear,
        };
        let link = match self.link {
            LinkArg::Indicator => LinkSpec::Indicator,
            LinkArg::Modified => {
                LinkSpec::Modified { eta: self.eta, delta: self.signed(self.link_delta.unwrap_or(self.delta)) }
            }
        };
        let d = self.d;
        let dr = match self.method {
            MethodArg::Pca => DrSpec::Pca { d },
            MethodArg::Lda => DrSpec::Lda { d },
            MethodArg::Kpca => DrSpec::Kpca { kernel, d },
            MethodArg::Skpca => DrSpec::Skpca { kernel, link, d },
            MethodArg::Klda => DrSpec::Klda { kernel, d },
        };
        let svm = SvmParams {
            cost: self.cost,
            tol: self.tol,
            max_updates: self.max_updates,
            seed: self.svm_seed,
            scale: !self.no_svm_scale,
        };
        ExperimentConfig { dr, svm, platt: !self.no_platt }
    }
}

fn synth_spec(dataset: DatasetArg, n_per_class: usize, noise_sd: f64, seed: u64) -> Result<SynthSpec, Error> {
    if n_per_class == 0 {
        return Err(Error::Usage("--n-per-class must be at least 1".into()));
    }
    if !(noise_sd >= 0.0 && noise_sd.is_finite()) {
        return Err(Error::Usage(format!("--noise-sd must be finite and non-negative, got {noise_sd}")));
    }
    Ok(SynthSpec { dataset: dataset.into(), n_per_class, noise_sd, seed })
}

/// Builds the replayable configuration of a command. `None` for `rerun`.
pub fn command_config(command: &Command) -> Result<Option<CommandConfig>, Error> {
    let cfg = match command {
        Command::Gen { dataset, n_per_class, seed, noise_sd, out } => {
            CommandConfig::Gen { spec: synth_spec(*dataset, *n_per_class, *noise_sd, *seed)?, out: out.clone() }
        }
        Command::Fit { method, input, model } => {
            CommandConfig::Fit { config: method.config(), input: input.clone(), model: model.clone() }
        }
        Command::Transform { model, input, out } => {
            CommandConfig::Transform { model: model.clone(), input: input.clone(), out: out.clone() }
        }
        Command::Classify { model, input, out } => {
            CommandConfig::Classify { model: model.clone(), input: input.clone(), out: out.clone() }
        }
        Command::Tune { method, grid, train, test, out } => CommandConfig::Tune {
            config: method.config(),
            grid: read_grid(grid, method.paper_sign)?,
            train: train.clone(),
            test: test.clone(),
            out: out.clone(),
        },
        Command::Ensemble { method, train, test, samples, sample_size, seed, out } => CommandConfig::Ensemble {
            config: method.config(),
            ensemble: EnsembleConfig { n_samples: *samples, sample_size: *sample_size, base_seed: *seed },
            train: train.clone(),
            test: test.clone(),
            out: out.clone(),
        },
        Command::Lopo { method, input } => CommandConfig::Lopo { config: method.config(), input: input.clone() },
        Command::Roc { input, out } => CommandConfig::Roc { input: input.clone(), out: out.clone() },
        Command::Alternate { method, s1, s2, r } => {
            CommandConfig::Alternate { config: method.config(), s1: s1.clone(), s2: s2.clone(), r: r.clone() }
        }
        Command::Study { dataset, n_per_class, seed, noise_sd, split_seed, allow_overlap } => {
            let data = synth_spec(*dataset, *n_per_class, *noise_sd, *seed)?;
            let mut study = StudyConfig::simulation(split_seed.unwrap_or(*seed));
            study.allow_overlap = *allow_overlap;
            CommandConfig::Study { data, study }
        }
        Command::Rerun { .. } => return Ok(None),
    };
    Ok(Some(cfg))
}

fn emit(doc: &RunDocument, path: Option<&Path>) -> Result<(), Error> {
    match path {
        Some(p) => doc.save(p),
        None => {
            print!("{}", doc.to_json());
            Ok(())
        }
    }
}

/// Runs a parsed command line. The summary line goes to stderr.
pub fn run(cli: &Cli) -> Result<(), Error> {
    let workers = Workers::new(cli.workers)?;
    let watch = Stopwatch::start();
    match command_config(&cli.command)? {
        Some(cfg) => {
            let outcome = execute(&cfg, &workers, true)?;
            eprintln!("{}: {}", cfg.name(), outcome.summary);
            let resources = (!cli.no_resources).then(|| watch.finish(workers.count()));
            emit(&RunDocument::new(cfg, outcome, resources), cli.doc.as_deref())
        }
        None => {
            let Command::Rerun { from } = &cli.command else { unreachable!("only rerun has no config") };
            let recorded = RunDocument::load(from)?;
            let outcome = rerun(&recorded, &workers)?;
            eprintln!("rerun {}: result identical; {}", recorded.config.name(), outcome.summary);
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn paper_sign_negates_every_delta() {
        let cli = Cli::parse_from([
            "kdr",
            "fit",
            "--method",
            "skpca",
            "--delta",
            "0.1",
            "--paper-sign",
            "--link",
            "modified",
            "--eta",
            "2",
            "--in",
            "a.csv",
            "--model",
            "m.json",
        ]);
        let Command::Fit { method, .. } = cli.command else { panic!() };
        let cfg = method.config();
        assert_eq!(cfg.dr.kernel(), Some(KernelSpec::rbf(-0.1)));
        assert_eq!(cfg.dr.link(), Some(LinkSpec::Modified { eta: 2.0, delta: -0.1 }));
    }

    #[test]
    fn defaults() {
        let cli = Cli::parse_from(["kdr", "lopo", "--method", "pca", "--in", "a.csv"]);
        assert_eq!(cli.workers, 1);
        let Command::Lopo { method, .. } = cli.command else { panic!() };
        let cfg = method.config();
        assert_eq!(cfg.dr, DrSpec::Pca { d: 2 });
        assert_eq!(cfg.svm, SvmParams::default());
        assert!(cfg.platt);
    }

    #[test]
    fn negative_delta_accepted() {
        let cli = Cli::parse_from(["kdr", "fit", "--method", "kpca", "--delta", "-1", "--in", "a", "--model", "m"]);
        let Command::Fit { method, .. } = cli.command else { panic!() };
        assert_eq!(method.config().dr.kernel(), Some(KernelSpec::rbf(-1.0)));
    }
}
