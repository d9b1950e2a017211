//! The `projreg` command line: four experiment subcommands writing CSV plus
//! a resolved-config audit file.
//!
//! Exit codes: 0 success, 1 failed check or divergence, 2 usage error.

mod config;

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

pub use config::{render_audit, ConfigFile, List, Resolver};

use crate::analysis::{
    log_grid, norm_histogram, penalty_density_sweep, sparse_parent, uniform_edges,
    verify_bound_exhaustive, verify_bound_mc, BoundReport, EXHAUSTIVE_MAX_LEN,
};
use crate::data::{
    dataset_from_idx, decode_idx_images, decode_idx_labels, load_idx_images, Dataset,
    SparseClassification, SparseRegression, Split, SynthSpec,
};
use crate::error::{Error, Result};
use crate::learn::{
    train, write_metrics_csv, Activation, LossKind, Model, OptimizerKind, Regularizer, TrainConfig,
};
use crate::numerics::{l2_norm, Rng};
use crate::penalty::{PenaltyFamily, PenaltySpec};
use crate::sampler::{SamplerConfig, ScoreMode, SelectionMode};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

// Streams of the root RNG used by the commands.
const STREAM_PARENT: u64 = 0;
const STREAM_DRAWS: u64 = 1;
pub const STREAM_MODEL: u64 = 0;
pub const STREAM_TASK: u64 = 10;
pub const STREAM_TRAIN_SAMPLE: u64 = 11;
pub const STREAM_TEST_SAMPLE: u64 = 12;

const DIGITS_TRAIN_IMAGES: &[u8] = include_bytes!(concat!(
    env!("CARGO_MANIFEST_DIR"),
    "/fixtures/digits/train-images.idx"
));
const DIGITS_TRAIN_LABELS: &[u8] = include_bytes!(concat!(
    env!("CARGO_MANIFEST_DIR"),
    "/fixtures/digits/train-labels.idx"
));
const DIGITS_TEST_IMAGES: &[u8] = include_bytes!(concat!(
    env!("CARGO_MANIFEST_DIR"),
    "/fixtures/digits/test-images.idx"
));
const DIGITS_TEST_LABELS: &[u8] = include_bytes!(concat!(
    env!("CARGO_MANIFEST_DIR"),
    "/fixtures/digits/test-labels.idx"
));

#[derive(Debug, Parser)]
#[command(
    name = "projreg",
    version,
    about = "Stochastic-projection regularization experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check E||w⊙I||₂ ≤ √(1−T)·||w||₂ by Monte Carlo (and exhaustively for small n).
    VerifyBound(VerifyBoundArgs),
    /// Histograms of sampled-vector norms for one or more sampling densities.
    HistNorms(HistNormsArgs),
    /// L1, L2 and projected penalty of unit-norm vectors across densities.
    PenaltySweep(PenaltySweepArgs),
    /// Train a model and log per-epoch metrics.
    Train(TrainArgs),
}

#[derive(Debug, Args)]
struct Common {
    #[arg(long)]
    seed: Option<u64>,
    /// Output CSV; the audit file is written next to it with a `.config` extension.
    #[arg(long)]
    out: Option<PathBuf>,
    /// key=value or JSON config file; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SamplerFlags {
    #[arg(long = "T")]
    threshold: Option<f64>,
    #[arg(long)]
    selection: Option<SelectionMode>,
    #[arg(long)]
    score_mode: Option<ScoreMode>,
}

#[derive(Debug, Args)]
struct VerifyBoundArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    n: Option<usize>,
    /// Fraction of non-zero entries in the tested vector.
    #[arg(long)]
    density: Option<f64>,
    #[arg(long = "T")]
    threshold: Option<f64>,
    #[arg(long = "S")]
    experiments: Option<usize>,
    /// Sampling density entering the scaled bound column.
    #[arg(long)]
    sp: Option<f64>,
    /// Relative slack allowed on the Monte Carlo mean.
    #[arg(long)]
    tolerance: Option<f64>,
}

#[derive(Debug, Args)]
struct HistNormsArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    sampler: SamplerFlags,
    #[arg(long)]
    sp: Option<List<f64>>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    experiments: Option<usize>,
    #[arg(long)]
    parent_density: Option<f64>,
    #[arg(long)]
    bins: Option<usize>,
    /// Upper edge of the last bin (may be `inf`); default ||w||₂.
    #[arg(long)]
    bin_max: Option<f64>,
}

#[derive(Debug, Args)]
struct PenaltySweepArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    sampler: SamplerFlags,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    sp: Option<f64>,
    #[arg(long = "S")]
    experiments: Option<usize>,
    /// Explicit density grid; overrides lo/hi/points.
    #[arg(long)]
    densities: Option<List<f64>>,
    #[arg(long)]
    points: Option<usize>,
    #[arg(long)]
    lo: Option<f64>,
    #[arg(long)]
    hi: Option<f64>,
}

#[derive(Debug, Args)]
struct TrainArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    sampler: SamplerFlags,
    /// synth-reg, synth-cls or digits.
    #[arg(long)]
    task: Option<Task>,
    #[arg(long)]
    reg: Option<Regularizer>,
    #[arg(long)]
    loss: Option<LossKind>,
    /// Projected penalty variant used by `--reg proposed`.
    #[arg(long)]
    penalty: Option<PenaltyFamily>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    sp: Option<f64>,
    #[arg(long = "S")]
    experiments: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    momentum: Option<bool>,
    #[arg(long)]
    loss_sp: Option<f64>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    batch: Option<usize>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    optimizer: Option<OptimizerKind>,
    /// Hidden layer widths, e.g. `128,64`; empty for a linear model.
    #[arg(long)]
    hidden: Option<List<usize>>,
    #[arg(long)]
    metric_threshold: Option<f64>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    n_test: Option<usize>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    true_density: Option<f64>,
    #[arg(long)]
    noise: Option<f64>,
    #[arg(long)]
    classes: Option<usize>,
    #[arg(long)]
    separation: Option<f64>,
    /// Directory holding {train,test}-{images,labels}.idx; default is the
    /// bundled 8×8 digits.
    #[arg(long)]
    data_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Task {
    SynthReg,
    SynthCls,
    Digits,
}

impl std::str::FromStr for Task {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "synth-reg" => Ok(Task::SynthReg),
            "synth-cls" => Ok(Task::SynthCls),
            "digits" => Ok(Task::Digits),
            other => Err(Error::InvalidConfig(format!("unknown task `{other}`"))),
        }
    }
}

impl std::fmt::Display for Task {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Task::SynthReg => "synth-reg",
            Task::SynthCls => "synth-cls",
            Task::Digits => "digits",
        })
    }
}

/// Parses `args` (program name first), runs the subcommand and returns the
/// process exit code. Diagnostics go to stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let (name, result) = match cli.command {
        Command::VerifyBound(a) => ("verify-bound", cmd_verify_bound(a)),
        Command::HistNorms(a) => ("hist-norms", cmd_hist_norms(a)),
        Command::PenaltySweep(a) => ("penalty-sweep", cmd_penalty_sweep(a)),
        Command::Train(a) => ("train", cmd_train(a)),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("projreg {name}: error: {e}");
            if is_usage_error(&e) {
                eprintln!("see `projreg {name} --help`");
                EXIT_USAGE
            } else {
                EXIT_FAILURE
            }
        }
    }
}

fn is_usage_error(e: &Error) -> bool {
    matches!(
        e,
        Error::InvalidConfig(_)
            | Error::ConfigParse { .. }
            | Error::UnknownKey(_)
            | Error::DensityExceedsLength { .. }
            | Error::WrongSelectionMode(_)
            | Error::UseMonteCarlo(_)
    )
}

fn resolver(common: &Common) -> Result<Resolver> {
    let file = match &common.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    Ok(Resolver::new(file))
}

fn out_path(common: &Common, command: &str) -> PathBuf {
    common
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(format!("{command}.csv")))
}

/// Path of the audit file accompanying `out`.
pub fn audit_path(out: &Path) -> PathBuf {
    out.with_extension("config")
}

fn write_file(
    path: &Path,
    body: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    body(&mut w)
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(path, e))
}

/// Writes the audit, then the CSV.
fn emit(
    command: &str,
    out: &Path,
    resolved: &[(String, String)],
    body: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
) -> Result<()> {
    let audit = render_audit(command, resolved);
    write_file(&audit_path(out), |w| w.write_all(audit.as_bytes()))?;
    write_file(out, body)
}

fn sampler_config(
    r: &mut Resolver,
    flags: SamplerFlags,
    default_selection: SelectionMode,
) -> Result<SamplerConfig> {
    let d = SamplerConfig::default();
    Ok(SamplerConfig {
        threshold: r.get("T", flags.threshold, d.threshold)?,
        selection: r.get("selection", flags.selection, default_selection)?,
        score_mode: r.get("score_mode", flags.score_mode, d.score_mode)?,
        ..d
    })
}

fn cmd_verify_bound(a: VerifyBoundArgs) -> Result<i32> {
    let mut r = resolver(&a.common)?;
    let n: usize = r.require("n", a.n)?;
    let density = r.get("density", a.density, 0.01)?;
    let threshold = r.get("T", a.threshold, 0.5)?;
    let experiments = r.get("S", a.experiments, 500)?;
    let sp = r.get("sp", a.sp, 0.01)?;
    let tolerance = r.get("tolerance", a.tolerance, 0.02)?;
    let seed = r.get("seed", a.common.seed, 0)?;
    let resolved = r.finish()?;

    if n == 0 {
        return Err(Error::InvalidConfig("--n must be positive".into()));
    }
    if !(density > 0.0 && density <= 1.0) {
        return Err(Error::InvalidConfig(format!(
            "density must be in (0, 1], got {density}"
        )));
    }
    let cfg = SamplerConfig {
        density: sp,
        experiments,
        threshold,
        selection: SelectionMode::UniformThreshold,
        ..SamplerConfig::default()
    };
    cfg.validate()?;

    let root = Rng::new(seed);
    let w = sparse_parent(n, density, &mut root.substream(STREAM_PARENT));
    let mut reports = vec![verify_bound_mc(
        &w,
        &cfg,
        &mut root.substream(STREAM_DRAWS),
        tolerance,
    )?];
    if n <= EXHAUSTIVE_MAX_LEN {
        reports.push(verify_bound_exhaustive(&w, threshold, seed)?);
    }

    let out = out_path(&a.common, "verify-bound");
    emit("verify-bound", &out, &resolved, |w| {
        writeln!(w, "{}", BoundReport::CSV_HEADER)?;
        reports
            .iter()
            .try_for_each(|rep| writeln!(w, "{}", rep.csv_row()))
    })?;

    let mut code = EXIT_OK;
    for rep in &reports {
        let verdict = if rep.holds { "holds" } else { "VIOLATED" };
        println!(
            "{}: mean {:.6} vs bound {:.6} (n={}, T={}) {verdict}",
            rep.method, rep.mc_mean_lhs, rep.analytic_rhs, rep.n, rep.threshold
        );
        if !rep.holds {
            code = EXIT_FAILURE;
        }
    }
    Ok(code)
}

fn cmd_hist_norms(a: HistNormsArgs) -> Result<i32> {
    let mut r = resolver(&a.common)?;
    let sps = r.get("sp", a.sp, List(vec![0.01, 0.05, 0.1]))?;
    let n = r.get("n", a.n, 10_000)?;
    let experiments = r.get("experiments", a.experiments, 10_000)?;
    let parent_density = r.get("parent_density", a.parent_density, 0.01)?;
    let bins = r.get("bins", a.bins, 50)?;
    let bin_max: Option<f64> = r.optional("bin_max", a.bin_max)?;
    let base = sampler_config(&mut r, a.sampler, SelectionMode::Sampled)?;
    let seed = r.get("seed", a.common.seed, 0)?;
    let resolved = r.finish()?;

    if sps.0.is_empty() {
        return Err(Error::InvalidConfig("no sampling density given".into()));
    }
    if n == 0 || bins == 0 {
        return Err(Error::InvalidConfig("n and bins must be positive".into()));
    }
    if !(parent_density > 0.0 && parent_density <= 1.0) {
        return Err(Error::InvalidConfig(format!(
            "parent density must be in (0, 1], got {parent_density}"
        )));
    }
    let configs = sps
        .0
        .iter()
        .map(|&sp| {
            let cfg = SamplerConfig {
                density: sp,
                experiments: 1,
                ..base.clone()
            };
            cfg.validate().map(|_| cfg)
        })
        .collect::<Result<Vec<_>>>()?;

    let root = Rng::new(seed);
    let w = sparse_parent(n, parent_density, &mut root.substream(STREAM_PARENT));
    let hi = match bin_max {
        Some(hi) if hi > 0.0 => hi,
        Some(hi) => {
            return Err(Error::InvalidConfig(format!(
                "bin_max must be positive, got {hi}"
            )))
        }
        None => l2_norm(&w).max(f64::MIN_POSITIVE),
    };
    let edges = uniform_edges(hi, bins);
    let hists = configs
        .iter()
        .map(|cfg| {
            norm_histogram(
                &w,
                cfg,
                experiments,
                Some(edges.clone()),
                &mut root.substream(STREAM_DRAWS),
            )
        })
        .collect::<Result<Vec<_>>>()?;

    let out = out_path(&a.common, "hist-norms");
    emit("hist-norms", &out, &resolved, |f| {
        writeln!(f, "s_p,bin_lo,bin_hi,count")?;
        for h in &hists {
            for (i, count) in h.counts.iter().enumerate() {
                writeln!(
                    f,
                    "{},{},{},{}",
                    h.s_p,
                    h.bin_edges[i],
                    h.bin_edges[i + 1],
                    count
                )?;
            }
        }
        Ok(())
    })?;
    for h in &hists {
        println!("s_p={}: mean norm {:.6}", h.s_p, h.mean_norm());
    }
    Ok(EXIT_OK)
}

fn cmd_penalty_sweep(a: PenaltySweepArgs) -> Result<i32> {
    let mut r = resolver(&a.common)?;
    let n = r.get("n", a.n, 1000)?;
    let sp = r.get("sp", a.sp, 0.01)?;
    let experiments = r.get("S", a.experiments, 100)?;
    let densities: Option<List<f64>> = r.optional("densities", a.densities)?;
    let points = r.get("points", a.points, 40)?;
    let lo = r.get("lo", a.lo, 0.001)?;
    let hi = r.get("hi", a.hi, 1.0)?;
    let grid = match densities {
        Some(list) => list.0,
        None if lo > 0.0 && lo <= hi => log_grid(lo, hi, points),
        None => {
            return Err(Error::InvalidConfig(format!(
                "need 0 < lo <= hi, got {lo}, {hi}"
            )))
        }
    };
    let base = sampler_config(&mut r, a.sampler, SelectionMode::Sampled)?;
    let seed = r.get("seed", a.common.seed, 0)?;
    let resolved = r.finish()?;

    let cfg = SamplerConfig {
        density: sp,
        experiments,
        ..base
    };
    let rows = penalty_density_sweep(n, &grid, &cfg, &mut Rng::new(seed).substream(STREAM_DRAWS))?;

    let out = out_path(&a.common, "penalty-sweep");
    emit("penalty-sweep", &out, &resolved, |f| {
        writeln!(f, "density,r_l1,r_l2,r_proposed")?;
        rows.iter().try_for_each(|row| {
            writeln!(
                f,
                "{},{},{},{}",
                row.density, row.r_l1, row.r_l2, row.r_proposed
            )
        })
    })?;
    println!("{} densities written to {}", rows.len(), out.display());
    Ok(EXIT_OK)
}

/// Training and test sets for `task`, drawn from the streams of `seed`
/// listed in the module constants.
pub fn build_task(
    task: Task,
    spec: &SynthSpec,
    n_test: usize,
    data_dir: Option<&Path>,
    seed: u64,
) -> Result<(Dataset, Dataset)> {
    let root = Rng::new(seed);
    match task {
        Task::SynthReg => {
            let t = SparseRegression::new(spec, &mut root.substream(STREAM_TASK))?;
            Ok((
                t.sample(
                    spec.n,
                    Split::Train,
                    &mut root.substream(STREAM_TRAIN_SAMPLE),
                ),
                t.sample(n_test, Split::Test, &mut root.substream(STREAM_TEST_SAMPLE)),
            ))
        }
        Task::SynthCls => {
            let t = SparseClassification::new(spec, &mut root.substream(STREAM_TASK))?;
            Ok((
                t.sample(
                    spec.n,
                    Split::Train,
                    &mut root.substream(STREAM_TRAIN_SAMPLE),
                ),
                t.sample(n_test, Split::Test, &mut root.substream(STREAM_TEST_SAMPLE)),
            ))
        }
        Task::Digits => {
            let (train, mut test) = match data_dir {
                Some(dir) => (
                    load_idx_images(dir.join("train-images.idx"), dir.join("train-labels.idx"))?,
                    load_idx_images(dir.join("test-images.idx"), dir.join("test-labels.idx"))?,
                ),
                None => (
                    dataset_from_idx(
                        &decode_idx_images(DIGITS_TRAIN_IMAGES)?,
                        &decode_idx_labels(DIGITS_TRAIN_LABELS)?,
                    )?,
                    dataset_from_idx(
                        &decode_idx_images(DIGITS_TEST_IMAGES)?,
                        &decode_idx_labels(DIGITS_TEST_LABELS)?,
                    )?,
                ),
            };
            if train.dim() != test.dim() {
                return Err(Error::Dimension(
                    "train and test images differ in size".into(),
                ));
            }
            // Either split may miss the highest label.
            let classes = train.n_classes.max(test.n_classes);
            test.split = Split::Test;
            Ok((
                Dataset {
                    n_classes: classes,
                    ..train
                },
                Dataset {
                    n_classes: classes,
                    ..test
                },
            ))
        }
    }
}

fn cmd_train(a: TrainArgs) -> Result<i32> {
    let mut r = resolver(&a.common)?;
    let d_cfg = TrainConfig::default();
    let d_spec = SynthSpec::default();

    let task = r.get("task", a.task, Task::SynthCls)?;
    let default_loss = if task == Task::SynthReg {
        LossKind::Mse
    } else {
        LossKind::CrossEntropy
    };
    let loss = r.get("loss", a.loss, default_loss)?;
    let reg = r.get("reg", a.reg, Regularizer::None)?;
    let family = r.get("penalty", a.penalty, d_cfg.penalty.family)?;
    let lambda = r.get("lambda", a.lambda, d_cfg.penalty.lambda)?;
    let sp = r.get("sp", a.sp, d_cfg.sampler.density)?;
    let experiments = r.get("S", a.experiments, d_cfg.sampler.experiments)?;
    let alpha = r.get("alpha", a.alpha, d_cfg.sampler.alpha)?;
    let momentum = r.get("momentum", a.momentum, d_cfg.momentum)?;
    let loss_sp = r.get("loss_sp", a.loss_sp, d_cfg.loss_sampler.density)?;
    let base = sampler_config(&mut r, a.sampler, d_cfg.sampler.selection)?;
    let learning_rate = r.get("lr", a.lr, d_cfg.learning_rate)?;
    let batch_size = r.get("batch", a.batch, d_cfg.batch_size)?;
    let epochs = r.get("epochs", a.epochs, d_cfg.epochs)?;
    let optimizer = r.get("optimizer", a.optimizer, d_cfg.optimizer)?;
    let hidden = r.get("hidden", a.hidden, List(Vec::new()))?;
    let metric_threshold = r.get(
        "metric_threshold",
        a.metric_threshold,
        d_cfg.metric_threshold,
    )?;
    let spec = if task == Task::Digits {
        d_spec
    } else {
        SynthSpec {
            n: r.get("n", a.n, d_spec.n)?,
            d: r.get("d", a.d, d_spec.d)?,
            true_density: r.get("true_density", a.true_density, d_spec.true_density)?,
            noise_std: r.get("noise", a.noise, d_spec.noise_std)?,
            n_classes: r.get("classes", a.classes, d_spec.n_classes)?,
            separation: r.get("separation", a.separation, d_spec.separation)?,
            seed: 0,
        }
    };
    let n_test = if task == Task::Digits {
        0
    } else {
        r.get("n_test", a.n_test, 1000)?
    };
    let data_dir: Option<PathBuf> = if task == Task::Digits {
        r.optional("data_dir", a.data_dir.map(|p| p.display().to_string()))?
            .map(PathBuf::from)
    } else {
        None
    };
    let seed = r.get("seed", a.common.seed, 0)?;
    let resolved = r.finish()?;

    if loss.is_classification() == (task == Task::SynthReg) {
        return Err(Error::InvalidConfig(format!(
            "loss {loss} does not fit task {task}"
        )));
    }
    if task != Task::Digits && n_test == 0 {
        return Err(Error::InvalidConfig("n_test must be positive".into()));
    }
    let cfg = TrainConfig {
        loss,
        reg,
        sampler: SamplerConfig {
            density: sp,
            experiments,
            alpha,
            ..base.clone()
        },
        penalty: PenaltySpec {
            family,
            lambda,
            ..d_cfg.penalty.clone()
        },
        momentum,
        loss_sampler: SamplerConfig {
            density: loss_sp,
            alpha,
            ..d_cfg.loss_sampler.clone()
        },
        learning_rate,
        batch_size,
        epochs,
        optimizer,
        seed,
        metric_threshold,
    };
    cfg.validate()?;

    let (train_data, test_data) = build_task(task, &spec, n_test, data_dir.as_deref(), seed)?;
    let (outputs, output_activation) = match train_data.n_classes {
        Some(k) => (k, Activation::SoftmaxOutput),
        None => (1, Activation::Identity),
    };
    let mut model = Model::mlp(
        train_data.dim(),
        &hidden.0,
        outputs,
        output_activation,
        &mut Rng::new(seed).substream(STREAM_MODEL),
    );
    let rows = train(&mut model, &train_data, &test_data, &cfg)?;

    let out = out_path(&a.common, "train");
    emit("train", &out, &resolved, |f| write_metrics_csv(&rows, f))?;
    if let Some(last) = rows.last() {
        println!(
            "final test loss {:.6}, accuracy {:.4}, weight density {:.4}",
            last.loss, last.accuracy, last.weight_density
        );
    }
    Ok(EXIT_OK)
}
