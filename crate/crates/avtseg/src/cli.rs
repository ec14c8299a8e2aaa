//! Command-line driver.
//!
//! Exit codes: 0 success, 2 usage or configuration error, 3 I/O or file
//! format error, 4 no vessel proposal, 5 evaluation mismatch.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use avtseg_core::centerline::CenterSet;
use avtseg_core::metrics::{evaluate_case, make_folds};
use avtseg_core::phantom::{axis_points, generate};
use avtseg_core::pipeline::{self, PipelineError};
use avtseg_core::volume::{harmonize, SourceTag, Volume, VolumeKind};
use avtseg_core::Executor;
use clap::{Args, Parser, Subcommand};

use crate::centers::{format_centers, parse_centers};
use crate::config::{parse_override, parse_pairs, phantom_spec, ConfigError, PipelineSettings};
use crate::folds::{format_folds, parse_folds, parse_ids};
use crate::manifest::RunManifest;
use crate::nifti::{self, Datatype, KindHint, NiftiError, NiftiHeader};
use crate::report::{format_aggregate, format_report, parse_aggregate_input, CaseFailure, CaseRecord, Report};

pub const EXIT_OK: u8 = 0;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_IO: u8 = 3;
pub const EXIT_NO_PROPOSAL: u8 = 4;
pub const EXIT_MISMATCH: u8 = 5;

#[derive(Parser, Debug)]
#[command(name = "avtseg", version, about = "Two-stage aortic vessel tree segmentation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Full pipeline: harmonize, coarse, centerline, refine.
    Run(RunArgs),
    /// Apply the source-dependent intensity shift.
    Harmonize(HarmonizeArgs),
    /// Coarse sliding-window stage.
    Coarse(CoarseArgs),
    /// Pseudo-centerline and sparse fine-patch centers from a coarse mask.
    Centerline(CenterlineArgs),
    /// Fine stage at given centers, fused with a coarse probability map.
    Refine(RefineArgs),
    /// Score predicted masks against references.
    Eval(EvalArgs),
    /// Seeded k-fold split of case ids.
    Folds(FoldsArgs),
    /// Synthetic vessel-tree phantom.
    Phantom(PhantomArgs),
}

#[derive(Args, Debug, Clone)]
pub struct ConfigArgs {
    /// Config file of `key = value` lines.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Override one config key; repeatable. Wins over the config file.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
}

#[derive(Args, Debug, Clone)]
pub struct WorkerArgs {
    /// Worker threads; outputs do not depend on it. Defaults to all cores.
    #[arg(long, env = "AVTSEG_WORKERS")]
    pub workers: Option<usize>,
}

#[derive(Args, Debug)]
pub struct RunArgs {
    #[arg(long, short)]
    pub input: PathBuf,
    /// Final mask.
    #[arg(long, short)]
    pub output: PathBuf,
    /// Defaults to `<output>.manifest.txt`.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    #[arg(long)]
    pub coarse_prob: Option<PathBuf>,
    #[arg(long)]
    pub coarse_mask: Option<PathBuf>,
    #[arg(long)]
    pub centers: Option<PathBuf>,
    #[arg(long)]
    pub dense_centers: Option<PathBuf>,
    #[arg(long)]
    pub fine_prob: Option<PathBuf>,
    #[arg(long)]
    pub final_prob: Option<PathBuf>,
    #[command(flatten)]
    pub config: ConfigArgs,
    #[command(flatten)]
    pub workers: WorkerArgs,
}

#[derive(Args, Debug)]
pub struct HarmonizeArgs {
    #[arg(long, short)]
    pub input: PathBuf,
    #[arg(long, short)]
    pub output: PathBuf,
    /// Source convention of the input: K, R, D or unknown.
    #[arg(long, value_parser = parse_tag)]
    pub tag: SourceTag,
}

#[derive(Args, Debug)]
pub struct CoarseArgs {
    /// Raw HU volume; harmonized according to `source_tag`.
    #[arg(long, short)]
    pub input: PathBuf,
    #[arg(long)]
    pub output_prob: PathBuf,
    #[arg(long)]
    pub output_mask: PathBuf,
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    #[command(flatten)]
    pub config: ConfigArgs,
    #[command(flatten)]
    pub workers: WorkerArgs,
}

#[derive(Args, Debug)]
pub struct CenterlineArgs {
    #[arg(long)]
    pub mask: PathBuf,
    /// Sparse centers.
    #[arg(long, short)]
    pub output: PathBuf,
    /// Dense pseudo-centerline before thinning.
    #[arg(long)]
    pub dense: Option<PathBuf>,
    #[command(flatten)]
    pub config: ConfigArgs,
}

#[derive(Args, Debug)]
pub struct RefineArgs {
    /// Raw HU volume; harmonized according to `source_tag`.
    #[arg(long, short)]
    pub input: PathBuf,
    #[arg(long)]
    pub coarse_prob: PathBuf,
    #[arg(long)]
    pub centers: PathBuf,
    /// Final mask.
    #[arg(long, short)]
    pub output: PathBuf,
    #[arg(long)]
    pub fine_prob: Option<PathBuf>,
    #[arg(long)]
    pub final_prob: Option<PathBuf>,
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    #[command(flatten)]
    pub config: ConfigArgs,
    #[command(flatten)]
    pub workers: WorkerArgs,
}

#[derive(Args, Debug)]
pub struct EvalArgs {
    /// Predicted masks, paired in order with `--truth`.
    #[arg(long, num_args = 1..)]
    pub pred: Vec<PathBuf>,
    #[arg(long, num_args = 1..)]
    pub truth: Vec<PathBuf>,
    /// Case list with lines `<id> <pred path> <truth path>`.
    #[arg(long, conflicts_with_all = ["pred", "truth"])]
    pub list: Option<PathBuf>,
    /// Fold file; enables per-fold records and fold-averaged overall.
    #[arg(long)]
    pub folds: Option<PathBuf>,
    /// Average precomputed rows instead of scoring masks.
    #[arg(long, conflicts_with_all = ["pred", "truth", "list", "folds"])]
    pub aggregate: Option<PathBuf>,
    /// Report destination; stdout when absent.
    #[arg(long, short)]
    pub report: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct FoldsArgs {
    /// Case ids, one per line.
    #[arg(long)]
    pub ids: PathBuf,
    #[arg(long, short, default_value_t = 5)]
    pub k: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Destination; stdout when absent.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct PhantomArgs {
    /// Phantom spec of `key = value` lines.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    #[arg(long)]
    pub hu: PathBuf,
    #[arg(long)]
    pub mask: PathBuf,
    /// Generating polyline vertices, one `x y z` per line.
    #[arg(long)]
    pub axis: Option<PathBuf>,
}

fn parse_tag(s: &str) -> Result<SourceTag, String> {
    s.parse().map_err(|_| format!("unknown source tag {s:?} (expected K, R, D or unknown)"))
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Format {
        path: PathBuf,
        #[source]
        source: NiftiError,
    },
    #[error("{path}: {reason}")]
    Text { path: PathBuf, reason: String },
    #[error(transparent)]
    Engine(#[from] avtseg_core::Error),
    #[error("no vessel proposal: {0}")]
    NoProposal(String),
    #[error("{0} case(s) could not be evaluated")]
    Mismatch(usize),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        use avtseg_core::Error as E;
        match self {
            Self::Usage(_) | Self::Config(_) => EXIT_USAGE,
            Self::Io { .. } | Self::Format { .. } | Self::Text { .. } => EXIT_IO,
            Self::Engine(E::DimsMismatch { .. } | E::SpacingMismatch { .. } | E::DataLength { .. } | E::ValueDomain { .. } | E::WrongKind { .. }) => EXIT_IO,
            Self::Engine(_) => EXIT_USAGE,
            Self::NoProposal(_) => EXIT_NO_PROPOSAL,
            Self::Mismatch(_) => EXIT_MISMATCH,
        }
    }
}

type CliResult<T = ()> = Result<T, CliError>;

fn read_text(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.into(),
        source,
    })
}

fn write_text(path: &Path, text: &str) -> CliResult {
    std::fs::write(path, text).map_err(|source| CliError::Io {
        path: path.into(),
        source,
    })
}

fn format_err(path: &Path) -> impl FnOnce(NiftiError) -> CliError + '_ {
    move |source| match source {
        NiftiError::Io(source) => CliError::Io {
            path: path.into(),
            source,
        },
        source => CliError::Format {
            path: path.into(),
            source,
        },
    }
}

fn read_volume(path: &Path, hint: KindHint) -> CliResult<(Volume, NiftiHeader)> {
    nifti::read_volume_file(path, hint).map_err(format_err(path))
}

fn read_mask(path: &Path) -> CliResult<(Volume, NiftiHeader)> {
    let (v, h) = read_volume(path, KindHint::Hu)?;
    match v.kind() {
        VolumeKind::Label => Ok((v, h)),
        _ => v.with_kind(VolumeKind::Label).map(|v| (v, h)).map_err(|_| CliError::Text {
            path: path.into(),
            reason: "not a binary mask".into(),
        }),
    }
}

fn read_hu(path: &Path) -> CliResult<(Volume, NiftiHeader)> {
    let (v, h) = read_volume(path, KindHint::Hu)?;
    let v = if v.kind() == VolumeKind::Hu { v } else { v.with_kind(VolumeKind::Hu)? };
    Ok((v, h))
}

fn write_volume(path: &Path, v: &Volume, datatype: Datatype, template: &NiftiHeader) -> CliResult {
    nifti::write_volume_file(path, v, datatype, Some(template)).map_err(format_err(path))
}

fn write_mask(path: &Path, v: &Volume, template: &NiftiHeader) -> CliResult {
    write_volume(path, v, Datatype::Uint8, template)
}

/// Probabilities are stored as float64 so that stage outputs can be fed
/// back in without loss.
fn write_prob(path: &Path, v: &Volume, template: &NiftiHeader) -> CliResult {
    write_volume(path, v, Datatype::Float64, template)
}

fn settings(args: &ConfigArgs) -> CliResult<PipelineSettings> {
    let file = match &args.config {
        Some(p) => parse_pairs(&read_text(p)?)?,
        None => Vec::new(),
    };
    let flags = args.set.iter().map(|s| parse_override(s)).collect::<Result<Vec<_>, _>>()?;
    Ok(PipelineSettings::resolve(&file, &flags)?)
}

fn executor(args: &WorkerArgs) -> Executor {
    match args.workers {
        Some(n) => Executor::new(n),
        None => Executor::available(),
    }
}

fn default_manifest(output: &Path) -> PathBuf {
    let mut name = output.as_os_str().to_owned();
    name.push(".manifest.txt");
    PathBuf::from(name)
}

fn cmd_run(a: &RunArgs) -> CliResult {
    let settings = settings(&a.config)?;
    let cfg = settings.to_config()?;
    let exec = executor(&a.workers);
    let (raw, header) = read_hu(&a.input)?;
    let manifest_path = a.manifest.clone().unwrap_or_else(|| default_manifest(&a.output));
    let mut manifest = RunManifest::new("run");
    manifest.settings = Some(settings);
    manifest.path("input", &a.input);
    manifest.path("output", &a.output);
    manifest.stat("workers", exec.workers());

    match pipeline::run(&raw, &cfg, &exec) {
        Ok(r) => {
            write_mask(&a.output, &r.final_mask, &header)?;
            if let Some(p) = &a.coarse_prob {
                write_prob(p, &r.coarse_prob, &header)?;
                manifest.path("coarse_prob", p);
            }
            if let Some(p) = &a.coarse_mask {
                write_mask(p, &r.coarse_mask, &header)?;
                manifest.path("coarse_mask", p);
            }
            if let Some(p) = &a.centers {
                write_text(p, &format_centers(&r.centers))?;
                manifest.path("centers", p);
            }
            if let Some(p) = &a.dense_centers {
                write_text(p, &format_centers(&r.dense_centers))?;
                manifest.path("dense_centers", p);
            }
            if let Some(p) = &a.fine_prob {
                write_prob(p, &r.fine_prob, &header)?;
                manifest.path("fine_prob", p);
            }
            if let Some(p) = &a.final_prob {
                write_prob(p, &r.final_prob, &header)?;
                manifest.path("final_prob", p);
            }
            manifest.stage_timings(&r.timings);
            manifest.stat("coarse_tiles", r.tiles);
            manifest.stat("coarse_voxels", r.coarse_mask.count_nonzero());
            manifest.stat("dense_centers", r.dense_centers.len());
            manifest.stat("sparse_centers", r.centers.len());
            manifest.stat("fine_patches", r.fine_patches);
            manifest.stat("final_voxels", r.final_mask.count_nonzero());
            manifest.stat("final_components", r.final_components);
            write_text(&manifest_path, &manifest.format())
        }
        Err(PipelineError::NoProposal(coarse)) => {
            manifest.status = "no-proposal".into();
            if let Some(p) = &a.coarse_prob {
                write_prob(p, &coarse.probability, &header)?;
                manifest.path("coarse_prob", p);
            }
            if let Some(p) = &a.coarse_mask {
                write_mask(p, &coarse.mask, &header)?;
                manifest.path("coarse_mask", p);
            }
            manifest.stat("coarse_tiles", coarse.plan.starts.len());
            manifest.stat("coarse_voxels", 0);
            write_text(&manifest_path, &manifest.format())?;
            Err(CliError::NoProposal("coarse mask is empty".into()))
        }
        Err(PipelineError::Engine(e)) => {
            manifest.status = format!("error: {e}");
            write_text(&manifest_path, &manifest.format())?;
            Err(e.into())
        }
    }
}

fn cmd_harmonize(a: &HarmonizeArgs) -> CliResult {
    let (raw, header) = read_hu(&a.input)?;
    let out = harmonize(&raw, a.tag)?;
    let datatype = header.datatype().map_err(format_err(&a.input))?;
    write_volume(&a.output, &out, datatype, &header)
}

fn cmd_coarse(a: &CoarseArgs) -> CliResult {
    let settings = settings(&a.config)?;
    let cfg = settings.to_config()?;
    let exec = executor(&a.workers);
    let (raw, header) = read_hu(&a.input)?;
    let mut timings = avtseg_core::pipeline::StageTimings::default();
    let clock = std::time::Instant::now();
    let hu = harmonize(&raw, cfg.source_tag)?;
    timings.harmonize_ms = clock.elapsed().as_secs_f64() * 1e3;
    let clock = std::time::Instant::now();
    let coarse = pipeline::coarse_stage(&hu, &cfg, &exec)?;
    timings.coarse_ms = clock.elapsed().as_secs_f64() * 1e3;
    write_prob(&a.output_prob, &coarse.probability, &header)?;
    write_mask(&a.output_mask, &coarse.mask, &header)?;
    if let Some(path) = &a.manifest {
        let mut m = RunManifest::new("coarse");
        m.settings = Some(settings);
        m.path("input", &a.input);
        m.path("output_prob", &a.output_prob);
        m.path("output_mask", &a.output_mask);
        m.timings.push(("harmonize".into(), timings.harmonize_ms));
        m.timings.push(("coarse".into(), timings.coarse_ms));
        m.stat("workers", exec.workers());
        m.stat("coarse_tiles", coarse.plan.starts.len());
        m.stat("coarse_voxels", coarse.mask.count_nonzero());
        write_text(path, &m.format())?;
    }
    Ok(())
}

fn cmd_centerline(a: &CenterlineArgs) -> CliResult {
    let cfg = settings(&a.config)?.to_config_unloaded()?;
    let (mask, _) = read_mask(&a.mask)?;
    if mask.count_nonzero() == 0 {
        return Err(CliError::NoProposal(format!("{} is empty", a.mask.display())));
    }
    let proposal = pipeline::propose_centers(&mask, &cfg)?;
    write_text(&a.output, &format_centers(&proposal.sparse))?;
    if let Some(p) = &a.dense {
        write_text(p, &format_centers(&proposal.dense))?;
    }
    Ok(())
}

fn cmd_refine(a: &RefineArgs) -> CliResult {
    let settings = settings(&a.config)?;
    let cfg = settings.to_config()?;
    let exec = executor(&a.workers);
    let (raw, header) = read_hu(&a.input)?;
    let (coarse_prob, _) = read_volume(&a.coarse_prob, KindHint::Probability)?;
    let coarse_prob = match coarse_prob.kind() {
        VolumeKind::Probability => coarse_prob,
        _ => coarse_prob.with_kind(VolumeKind::Probability)?,
    };
    let centers: CenterSet = parse_centers(&read_text(&a.centers)?).map_err(|e| CliError::Text {
        path: a.centers.clone(),
        reason: e.to_string(),
    })?;
    let clock = std::time::Instant::now();
    let hu = harmonize(&raw, cfg.source_tag)?;
    let harmonize_ms = clock.elapsed().as_secs_f64() * 1e3;
    let clock = std::time::Instant::now();
    let refined = pipeline::refine_stage(&hu, &coarse_prob, &centers, &cfg, &exec)?;
    let fine_ms = clock.elapsed().as_secs_f64() * 1e3;
    write_mask(&a.output, &refined.final_mask, &header)?;
    if let Some(p) = &a.fine_prob {
        write_prob(p, &refined.fine_probability, &header)?;
    }
    if let Some(p) = &a.final_prob {
        write_prob(p, &refined.final_probability, &header)?;
    }
    if let Some(path) = &a.manifest {
        let mut m = RunManifest::new("refine");
        m.settings = Some(settings);
        m.path("input", &a.input);
        m.path("coarse_prob", &a.coarse_prob);
        m.path("centers", &a.centers);
        m.path("output", &a.output);
        m.timings.push(("harmonize".into(), harmonize_ms));
        m.timings.push(("fine".into(), fine_ms));
        m.stat("workers", exec.workers());
        m.stat("sparse_centers", centers.len());
        m.stat("fine_patches", refined.fine_patches.len());
        m.stat("final_voxels", refined.final_mask.count_nonzero());
        m.stat("final_components", refined.final_components);
        write_text(path, &m.format())?;
    }
    Ok(())
}

/// Case id from a file name: the name without `.nii` / `.nii.gz`.
pub fn case_id_from_path(path: &Path) -> String {
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let stem = name.strip_suffix(".gz").unwrap_or(&name);
    stem.strip_suffix(".nii").unwrap_or(stem).to_string()
}

fn cmd_eval(a: &EvalArgs) -> CliResult {
    let emit = |text: &str| match &a.report {
        Some(p) => write_text(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    };
    if let Some(path) = &a.aggregate {
        let rows = parse_aggregate_input(&read_text(path)?).map_err(|e| CliError::Text {
            path: path.clone(),
            reason: e.to_string(),
        })?;
        let text = format_aggregate(&rows).map_err(|e| CliError::Text {
            path: path.clone(),
            reason: e.to_string(),
        })?;
        return emit(&text);
    }

    let cases: Vec<(String, PathBuf, PathBuf)> = if let Some(list) = &a.list {
        let base = list.parent().unwrap_or(Path::new(""));
        let mut cases = Vec::new();
        for (n, line) in read_text(list)?.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let parts: Vec<&str> = line.split_whitespace().collect();
            let [id, pred, truth] = parts[..] else {
                return Err(CliError::Text {
                    path: list.clone(),
                    reason: format!("line {}: expected `<id> <pred> <truth>`", n + 1),
                });
            };
            cases.push((id.to_string(), base.join(pred), base.join(truth)));
        }
        cases
    } else {
        if a.pred.len() != a.truth.len() {
            return Err(CliError::Usage(format!(
                "{} prediction(s) but {} reference(s)",
                a.pred.len(),
                a.truth.len()
            )));
        }
        a.pred
            .iter()
            .zip(&a.truth)
            .map(|(p, t)| (case_id_from_path(p), p.clone(), t.clone()))
            .collect()
    };
    if cases.is_empty() {
        return Err(CliError::Usage("no cases to evaluate".into()));
    }
    let split = match &a.folds {
        Some(p) => Some(parse_folds(&read_text(p)?).map_err(|e| CliError::Text {
            path: p.clone(),
            reason: e.to_string(),
        })?),
        None => None,
    };

    let mut records = Vec::new();
    let mut failures = Vec::new();
    for (id, pred_path, truth_path) in &cases {
        let fold = split.as_ref().and_then(|s| s.fold_of.get(id).copied());
        if split.is_some() && fold.is_none() {
            failures.push(CaseFailure {
                case_id: id.clone(),
                fold: None,
                reason: "case not in fold file".into(),
            });
            continue;
        }
        let outcome = read_mask(pred_path)
            .and_then(|(p, _)| read_mask(truth_path).map(|(t, _)| (p, t)))
            .and_then(|(p, t)| Ok(evaluate_case(id, &p, &t)?));
        match outcome {
            Ok(row) => records.push(CaseRecord { row, fold }),
            Err(e @ CliError::Io { .. }) => return Err(e),
            Err(e) => failures.push(CaseFailure {
                case_id: id.clone(),
                fold,
                reason: e.to_string(),
            }),
        }
    }
    let n_failed = failures.len();
    let report = Report::build(records, failures)?;
    emit(&format_report(&report))?;
    if n_failed > 0 {
        return Err(CliError::Mismatch(n_failed));
    }
    Ok(())
}

impl From<crate::report::ReportError> for CliError {
    fn from(e: crate::report::ReportError) -> Self {
        match e {
            crate::report::ReportError::Engine(e) => Self::Engine(e),
            other => Self::Usage(other.to_string()),
        }
    }
}

fn cmd_folds(a: &FoldsArgs) -> CliResult {
    let ids = parse_ids(&read_text(&a.ids)?).map_err(|e| CliError::Text {
        path: a.ids.clone(),
        reason: e.to_string(),
    })?;
    let split = make_folds(&ids, a.k, a.seed).map_err(|e| CliError::Usage(e.to_string()))?;
    let text = format_folds(&split);
    match &a.output {
        Some(p) => write_text(p, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_phantom(a: &PhantomArgs) -> CliResult {
    let mut pairs = match &a.spec {
        Some(p) => parse_pairs(&read_text(p)?)?,
        None => Vec::new(),
    };
    for s in &a.set {
        let (k, v) = parse_override(s)?;
        pairs.retain(|(existing, _)| *existing != k);
        pairs.push((k, v));
    }
    let spec = phantom_spec(&pairs)?;
    let phantom = generate(&spec)?;
    nifti::write_volume_file(&a.hu, &phantom.hu, Datatype::Int16, None).map_err(format_err(&a.hu))?;
    nifti::write_volume_file(&a.mask, &phantom.mask, Datatype::Uint8, None).map_err(format_err(&a.mask))?;
    if let Some(p) = &a.axis {
        let text: String = axis_points(&spec)?
            .iter()
            .map(|[x, y, z]| format!("{x} {y} {z}\n"))
            .collect();
        write_text(p, &text)?;
    }
    Ok(())
}

pub fn execute(cli: &Cli) -> CliResult {
    match &cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Harmonize(a) => cmd_harmonize(a),
        Command::Coarse(a) => cmd_coarse(a),
        Command::Centerline(a) => cmd_centerline(a),
        Command::Refine(a) => cmd_refine(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Folds(a) => cmd_folds(a),
        Command::Phantom(a) => cmd_phantom(a),
    }
}

/// Parses `args` (including the program name), runs the command and
/// returns the process exit code. Errors are reported on stderr.
pub fn main_with_args<I, T>(args: I) -> u8
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
    match execute(&cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("avtseg: {e}");
            e.exit_code()
        }
    }
}
