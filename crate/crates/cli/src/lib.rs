//! Command-line front end: synthetic data generation, skeletonization and
//! evaluation.
//!
//! Exit codes: 0 on success, 1 on a domain error (reported as one line on
//! stderr), 2 on command-line misuse.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;
use treeskel_core::eval::{evaluate, render_svg};
use treeskel_core::io::{read_cloud, read_skeleton, write_cloud, write_skeleton, PlyFormat, SkeletonMeta};
use treeskel_core::skeletonize::Diagnostics;
use treeskel_core::synth::{augment, generate_skeleton, prune_ground_truth, prune_skeleton, sample_surface};
use treeskel_core::{
    skeletonize, AdmissionRule, AugmentParams, Error, Estimator, EvalReport, MedialField, PointCloud, Result, Skeleton,
    SkeletonizeConfig, TreeParams,
};

#[derive(Parser, Debug)]
#[command(name = "treeskel", version, about = "Tree point-cloud skeletonization toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a synthetic tree: ground-truth skeleton JSON and labelled PLY cloud.
    Generate(GenerateArgs),
    /// Skeletonize a PLY cloud into a skeleton JSON.
    Skeletonize(SkeletonizeArgs),
    /// Compare a predicted skeleton against ground truth; writes a CSV curve.
    Evaluate(EvaluateArgs),
    /// Generate, skeletonize and evaluate in one run.
    Pipeline(PipelineArgs),
}

#[derive(Args, Debug, Clone)]
struct TreeArgs {
    /// Branching generations below the trunk.
    #[arg(long, default_value_t = 3)]
    depth: u32,
    /// Trunk length in metres.
    #[arg(long, default_value_t = 2.0)]
    trunk_length: f64,
    /// Trunk base radius in metres.
    #[arg(long, default_value_t = 0.06)]
    trunk_radius: f64,
    /// Child length as a fraction of its parent's.
    #[arg(long, default_value_t = 0.6)]
    length_decay: f64,
    /// Child base radius as a fraction of the parent radius at the fork.
    #[arg(long, default_value_t = 0.6)]
    radius_decay: f64,
    /// Smallest branching angle, radians.
    #[arg(long, default_value_t = 0.5)]
    angle_min: f64,
    /// Largest branching angle, radians.
    #[arg(long, default_value_t = 1.0)]
    angle_max: f64,
    /// Fewest children per branch.
    #[arg(long, default_value_t = 2)]
    children_min: u32,
    /// Most children per branch.
    #[arg(long, default_value_t = 3)]
    children_max: u32,
    /// Surface samples per square metre of bark.
    #[arg(long, default_value_t = 20_000.0)]
    density: f64,
}

#[derive(Args, Debug, Clone)]
struct AugmentArgs {
    /// Gaussian position noise, metres.
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    /// Probability of dropping each point.
    #[arg(long, default_value_t = 0.0)]
    dropout: f64,
    /// Number of spherical occluders.
    #[arg(long, default_value_t = 0)]
    occlusions: u32,
    /// Occluder radius, metres.
    #[arg(long, default_value_t = 0.1)]
    occlusion_radius: f64,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum EstimatorKind {
    /// Ground-truth labels stored in the cloud.
    Oracle,
    /// Label-free geometric estimate.
    Baseline,
    /// Predicted field stored in the cloud (pred_* properties).
    Field,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Admission {
    Min,
    Max,
    Source,
}

#[derive(Args, Debug, Clone)]
struct SkelArgs {
    /// Medial field source.
    #[arg(long, value_enum, default_value_t = EstimatorKind::Oracle)]
    estimator: EstimatorKind,
    /// Neighbours per point for the baseline estimator.
    #[arg(long, default_value_t = 16)]
    k: usize,
    /// Refinement rounds for the baseline estimator.
    #[arg(long, default_value_t = 8)]
    iterations: usize,
    /// Voxel size for downsampling, metres; 0 disables it.
    #[arg(long, default_value_t = 0.01)]
    voxel: f64,
    /// Which endpoint radius bounds a graph edge.
    #[arg(long, value_enum, default_value_t = Admission::Min)]
    admission: Admission,
    /// Allocation reach as a multiple of the path radius.
    #[arg(long, default_value_t = 1.0)]
    allocation_factor: f64,
    /// Smaller connected components are discarded.
    #[arg(long, default_value_t = 5)]
    min_subgraph_points: usize,
    /// Shorter extracted paths are absorbed rather than emitted.
    #[arg(long, default_value_t = 2)]
    min_path_nodes: usize,
}

#[derive(Args, Debug, Clone)]
struct EvalArgs {
    /// Skeleton resampling step, metres.
    #[arg(long, default_value_t = 0.001)]
    spacing: f64,
    /// Number of thresholds in [0, 1].
    #[arg(long, default_value_t = 101)]
    steps: usize,
    /// Ground-truth branches thinner than this are pruned, metres.
    #[arg(long, default_value_t = 0.01)]
    prune_radius: f64,
    /// Ground-truth branches shorter than this are pruned, metres.
    #[arg(long, default_value_t = 0.10)]
    prune_length: f64,
    /// Write the curve as an SVG plot.
    #[arg(long)]
    plot: Option<PathBuf>,
    /// Write the AUCs and counts as JSON.
    #[arg(long)]
    summary: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct GenerateArgs {
    #[command(flatten)]
    tree: TreeArgs,
    #[command(flatten)]
    augment: AugmentArgs,
    /// Seed for every random draw.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Prune branches thinner than this from both outputs, metres.
    #[arg(long, default_value_t = 0.0)]
    prune_radius: f64,
    /// Prune branches shorter than this from both outputs, metres.
    #[arg(long, default_value_t = 0.0)]
    prune_length: f64,
    /// Ground-truth skeleton output (JSON).
    #[arg(short = 'o', long)]
    output: PathBuf,
    /// Labelled cloud output (PLY).
    #[arg(short = 'c', long)]
    cloud: PathBuf,
    /// Write the cloud as ASCII PLY instead of binary.
    #[arg(long)]
    ascii: bool,
}

#[derive(Args, Debug)]
struct SkeletonizeArgs {
    /// Input PLY cloud.
    input: PathBuf,
    #[command(flatten)]
    skel: SkelArgs,
    /// Skeleton output (JSON).
    #[arg(short = 'o', long)]
    output: PathBuf,
}

#[derive(Args, Debug)]
struct EvaluateArgs {
    /// Ground-truth skeleton JSON.
    #[arg(long)]
    gt: PathBuf,
    /// Predicted skeleton JSON.
    #[arg(long)]
    pred: PathBuf,
    #[command(flatten)]
    eval: EvalArgs,
    /// CSV output; stdout when omitted.
    #[arg(short = 'o', long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct PipelineArgs {
    #[command(flatten)]
    tree: TreeArgs,
    #[command(flatten)]
    augment: AugmentArgs,
    /// Seed for every random draw.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    skel: SkelArgs,
    #[command(flatten)]
    eval: EvalArgs,
    /// CSV output; stdout when omitted.
    #[arg(short = 'o', long)]
    output: Option<PathBuf>,
    /// Also write the pruned ground truth, cloud and predicted skeleton here.
    #[arg(long)]
    save_dir: Option<PathBuf>,
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let result = match cli.command {
        Command::Generate(a) => cmd_generate(a),
        Command::Skeletonize(a) => cmd_skeletonize(a),
        Command::Evaluate(a) => cmd_evaluate(a),
        Command::Pipeline(a) => cmd_pipeline(a),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {}", one_line(&e));
            1
        }
    }
}

/// Prefixes I/O failures with the file they concern.
fn at<T>(path: &Path, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::Io(io) => Error::Io(std::io::Error::new(io.kind(), format!("{}: {io}", path.display()))),
        Error::Parse { offset, message } => Error::Parse {
            offset,
            message: format!("{}: {message}", path.display()),
        },
        other => other,
    })
}

fn one_line(e: &Error) -> String {
    e.to_string().replace('\n', " ")
}

fn tree_params(t: &TreeArgs, seed: u64) -> TreeParams {
    TreeParams {
        depth: t.depth,
        trunk_length: t.trunk_length,
        trunk_radius: t.trunk_radius,
        length_decay: t.length_decay,
        radius_decay: t.radius_decay,
        branch_angle_range: (t.angle_min, t.angle_max),
        children_range: (t.children_min, t.children_max),
        seed,
    }
}

fn augment_params(a: &AugmentArgs, seed: u64) -> AugmentParams {
    AugmentParams {
        noise_sigma: a.noise,
        dropout_prob: a.dropout,
        occlusion_count: a.occlusions,
        occlusion_radius: a.occlusion_radius,
        seed,
    }
}

fn check_thresholds(radius: f64, length: f64) -> Result<()> {
    if !(radius >= 0.0 && length >= 0.0 && radius.is_finite() && length.is_finite()) {
        return Err(Error::InvalidInput("prune thresholds must be non-negative".into()));
    }
    Ok(())
}

/// Skeleton, cloud and the parameters that produced them.
struct Synthetic {
    skeleton: Skeleton,
    cloud: PointCloud,
    params: serde_json::Value,
}

fn synthesize(tree: &TreeArgs, aug: &AugmentArgs, seed: u64, prune: (f64, f64)) -> Result<Synthetic> {
    check_thresholds(prune.0, prune.1)?;
    let tp = tree_params(tree, seed);
    let ap = augment_params(aug, seed);
    let skeleton = generate_skeleton(&tp)?;
    let mut cloud = sample_surface(&skeleton, tree.density, seed)?;
    ap.validate()?;
    if !ap.is_identity() {
        cloud = augment(&cloud, &ap)?;
    }
    let (skeleton, cloud) = prune_ground_truth(&skeleton, &cloud, prune.0, prune.1);
    let params = json!({
        "tree": tp,
        "density": tree.density,
        "augment": ap,
        "prune_radius": prune.0,
        "prune_length": prune.1,
    });
    Ok(Synthetic {
        skeleton,
        cloud,
        params,
    })
}

fn cmd_generate(a: GenerateArgs) -> Result<()> {
    let syn = synthesize(&a.tree, &a.augment, a.seed, (a.prune_radius, a.prune_length))?;
    let meta = SkeletonMeta {
        generator: "treeskel generate".into(),
        seed: Some(a.seed),
        params: syn.params,
    };
    let format = if a.ascii {
        PlyFormat::Ascii
    } else {
        PlyFormat::BinaryLittleEndian
    };
    at(&a.output, write_skeleton(&a.output, &syn.skeleton, &meta))?;
    at(&a.cloud, write_cloud(&a.cloud, &syn.cloud, None, format))?;
    eprintln!(
        "generated {} skeleton nodes and {} points",
        syn.skeleton.len(),
        syn.cloud.len()
    );
    Ok(())
}

fn config(s: &SkelArgs) -> SkeletonizeConfig {
    SkeletonizeConfig {
        voxel_size: (s.voxel != 0.0).then_some(s.voxel),
        admission_rule: match s.admission {
            Admission::Min => AdmissionRule::Min,
            Admission::Max => AdmissionRule::Max,
            Admission::Source => AdmissionRule::Source,
        },
        allocation_factor: s.allocation_factor,
        min_subgraph_points: s.min_subgraph_points,
        min_path_nodes: s.min_path_nodes,
    }
}

fn estimator(s: &SkelArgs, field: Option<MedialField>) -> Result<Estimator> {
    Ok(match s.estimator {
        EstimatorKind::Oracle => Estimator::Oracle,
        EstimatorKind::Baseline => Estimator::Baseline {
            k: s.k,
            iterations: s.iterations,
        },
        EstimatorKind::Field => {
            Estimator::Provided(field.ok_or_else(|| {
                Error::InvalidInput("`--estimator field` needs pred_* properties in the cloud".into())
            })?)
        }
    })
}

fn skeleton_meta(s: &SkelArgs, cfg: &SkeletonizeConfig, d: &Diagnostics) -> SkeletonMeta {
    SkeletonMeta {
        generator: "treeskel skeletonize".into(),
        seed: None,
        params: json!({
            "estimator": format!("{:?}", s.estimator).to_lowercase(),
            "k": s.k,
            "iterations": s.iterations,
            "config": cfg,
            "counts": {
                "input_points": d.input_points,
                "downsampled_points": d.downsampled_points,
                "edges": d.edges,
                "components": d.components,
                "residue_components": d.residue_components,
                "residue_points": d.residue_points,
                "nodes": d.nodes,
            },
        }),
    }
}

fn report_diagnostics(d: &Diagnostics) {
    let timings: Vec<String> = d
        .timings
        .iter()
        .map(|(stage, t)| format!("{stage} {:.3}s", t.as_secs_f64()))
        .collect();
    eprintln!(
        "points {} -> {} after downsampling; {} edges; {} trees ({} residue components, {} points); {} nodes; {}",
        d.input_points,
        d.downsampled_points,
        d.edges,
        d.components,
        d.residue_components,
        d.residue_points,
        d.nodes,
        timings.join(", ")
    );
}

fn cmd_skeletonize(a: SkeletonizeArgs) -> Result<()> {
    let file = at(&a.input, read_cloud(&a.input))?;
    let cfg = config(&a.skel);
    let est = estimator(&a.skel, file.field)?;
    let out = skeletonize(&file.cloud, &est, &cfg)?;
    report_diagnostics(&out.diagnostics);
    at(
        &a.output,
        write_skeleton(
            &a.output,
            &out.skeleton,
            &skeleton_meta(&a.skel, &cfg, &out.diagnostics),
        ),
    )?;
    Ok(())
}

fn score(pred: &Skeleton, gt: &Skeleton, e: &EvalArgs) -> Result<EvalReport> {
    check_thresholds(e.prune_radius, e.prune_length)?;
    let (gt, _) = prune_skeleton(gt, e.prune_radius, e.prune_length);
    if gt.is_empty() {
        return Err(Error::InvalidInput("ground truth is empty after pruning".into()));
    }
    if pred.is_empty() {
        return Err(Error::InvalidInput("predicted skeleton is empty".into()));
    }
    evaluate(pred, &gt, e.spacing, e.steps)
}

fn emit_report(report: &EvalReport, e: &EvalArgs, output: Option<&Path>, extra: serde_json::Value) -> Result<()> {
    let csv = report.to_csv();
    match output {
        Some(p) => at(p, std::fs::write(p, &csv).map_err(Error::from))?,
        None => std::io::stdout().lock().write_all(csv.as_bytes())?,
    }
    if let Some(p) = &e.plot {
        at(p, std::fs::write(p, render_svg(report)).map_err(Error::from))?;
    }
    if let Some(p) = &e.summary {
        let mut s = json!({
            "precision_auc": report.precision_auc,
            "recall_auc": report.recall_auc,
            "f1_auc": report.f1_auc,
        });
        if let (Some(obj), serde_json::Value::Object(more)) = (s.as_object_mut(), extra) {
            obj.extend(more);
        }
        let mut text = serde_json::to_string_pretty(&s).expect("plain JSON values");
        text.push('\n');
        at(p, std::fs::write(p, text).map_err(Error::from))?;
    }
    eprintln!(
        "precision AUC {:.4}, recall AUC {:.4}, F1 AUC {:.4}",
        report.precision_auc, report.recall_auc, report.f1_auc
    );
    Ok(())
}

fn cmd_evaluate(a: EvaluateArgs) -> Result<()> {
    let (gt, _) = at(&a.gt, read_skeleton(&a.gt))?;
    let (pred, _) = at(&a.pred, read_skeleton(&a.pred))?;
    let report = score(&pred, &gt, &a.eval)?;
    emit_report(&report, &a.eval, a.output.as_deref(), json!({}))
}

fn cmd_pipeline(a: PipelineArgs) -> Result<()> {
    let prune = (a.eval.prune_radius, a.eval.prune_length);
    let syn = synthesize(&a.tree, &a.augment, a.seed, prune)?;
    if syn.cloud.is_empty() {
        return Err(Error::InvalidInput(
            "generated cloud is empty after augmentation and pruning".into(),
        ));
    }
    let cfg = config(&a.skel);
    let est = estimator(&a.skel, None)?;
    let out = skeletonize(&syn.cloud, &est, &cfg)?;
    report_diagnostics(&out.diagnostics);
    if let Some(dir) = &a.save_dir {
        std::fs::create_dir_all(dir)?;
        let gt_meta = SkeletonMeta {
            generator: "treeskel pipeline".into(),
            seed: Some(a.seed),
            params: syn.params.clone(),
        };
        write_skeleton(dir.join("ground_truth.json"), &syn.skeleton, &gt_meta)?;
        write_cloud(dir.join("cloud.ply"), &syn.cloud, None, PlyFormat::BinaryLittleEndian)?;
        write_skeleton(
            dir.join("skeleton.json"),
            &out.skeleton,
            &skeleton_meta(&a.skel, &cfg, &out.diagnostics),
        )?;
    }
    let report = score(&out.skeleton, &syn.skeleton, &a.eval)?;
    let d = &out.diagnostics;
    emit_report(
        &report,
        &a.eval,
        a.output.as_deref(),
        json!({
            "seed": a.seed,
            "points": syn.cloud.len(),
            "downsampled_points": d.downsampled_points,
            "trees": d.components,
            "nodes": d.nodes,
        }),
    )
}
