//! Command-line front end: scene generation, field synthesis, detection,
//! tracking, evaluation and overlay rendering.

mod render;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use jointtrack::io::{
    canonical, decode_field_stream, encode_field_stack, load_annotations, load_poses,
    report_entries, save_annotations, save_poses, save_report, AnnotationDocument, PoseFrame,
};
use jointtrack::pipeline::{detect_frames, track_sequence};
use jointtrack::simgen::generate;
use jointtrack::synth::synth_sequence;
use jointtrack::{
    default_topology, AffinityKind, AffinityNormalization, AssocConfig, EvalConfig, MaskPolicy,
    PipelineConfig, SceneConfig, SynthConfig, TrackerConfig,
};
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

#[derive(Parser)]
#[command(
    name = "jointtrack",
    version,
    about = "Bottom-up multi-person pose detection and tracking"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    synth: SynthArgs,
    #[command(flatten)]
    assoc: AssocArgs,
    #[command(flatten)]
    tracker: TrackerArgs,
    #[command(flatten)]
    eval: EvalArgs,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic annotated scene.
    Gen(GenArgs),
    /// Render ground-truth fields for every processed frame of an annotation file.
    Synth(IoArgs),
    /// Detect poses independently in every frame of a field stream.
    Detect(IoArgs),
    /// Detect and link poses into tracklets over a field stream.
    Track(IoArgs),
    /// Score predictions against ground-truth annotations.
    Eval(EvalCmd),
    /// Draw poses over a background image or a blank canvas.
    Render(RenderArgs),
}

#[derive(Args)]
struct IoArgs {
    /// Input file, `-` or absent for stdin.
    input: Option<PathBuf>,
    /// Output file, stdout when absent.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// People per scene as MIN,MAX.
    #[arg(long, value_parser = pair::<u32>, default_value = "1,20")]
    people: (u32, u32),
    /// Image size as WIDTH,HEIGHT.
    #[arg(long, value_parser = pair::<u32>, default_value = "1920,1080")]
    image_size: (u32, u32),
    /// Camera distance range in meters as MIN,MAX.
    #[arg(long, value_parser = pair::<f64>, default_value = "0.1,100")]
    distance: (f64, f64),
    /// Walking speed range in pixels per frame as MIN,MAX.
    #[arg(long, value_parser = pair::<f64>, default_value = "1,6")]
    speed: (f64, f64),
    #[arg(long, default_value_t = 0.0)]
    occluder_events: f64,
    /// Frames to generate.
    #[arg(long, default_value_t = 30)]
    duration: u32,
    #[arg(long, default_value_t = 0)]
    crossing_pairs: u32,
    #[arg(long, default_value_t = 30.0)]
    fps: f64,
    /// Pixel gap kept between people that are not a crossing pair.
    #[arg(long, default_value_t = 0.0)]
    min_gap: f64,
    #[arg(long)]
    keep_in_frame: bool,
    /// Probability of flagging each joint occluded.
    #[arg(long, default_value_t = 0.0)]
    random_occlusion: f64,
    /// Process every n-th frame downstream.
    #[arg(long, default_value_t = 1)]
    clip_stride: u32,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct EvalCmd {
    /// Predicted poses, stdin when absent.
    predictions: Option<PathBuf>,
    /// Ground-truth annotation file.
    #[arg(long)]
    gt: PathBuf,
    /// Also write the report as a structured document.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct RenderArgs {
    /// Pose file, stdin when absent.
    poses: Option<PathBuf>,
    /// Output image; the format follows the extension.
    #[arg(short, long)]
    output: PathBuf,
    /// Frame to draw. Defaults to the first frame in the file.
    #[arg(long)]
    frame: Option<u32>,
    /// Write every frame, inserting `_<frame>` before the extension.
    #[arg(long, conflicts_with = "frame")]
    all: bool,
    #[arg(long)]
    background: Option<PathBuf>,
    /// Canvas size as WIDTH,HEIGHT when there is no background.
    #[arg(long, value_parser = pair::<u32>, default_value = "1920,1080")]
    size: (u32, u32),
}

#[derive(Args)]
#[command(next_help_heading = "Field synthesis")]
struct SynthArgs {
    /// Distance in meters at which a heatmap peak spans one grid pixel.
    #[arg(long, global = true, default_value_t = 20.0)]
    alpha_sigma: f64,
    #[arg(long, global = true, default_value_t = 1.0)]
    paf_half_width: f64,
    #[arg(long, global = true, default_value_t = 1.0)]
    taf_half_width: f64,
    #[arg(long, global = true, value_enum, default_value_t = MaskArg::AllOnes)]
    mask_policy: MaskArg,
}

#[derive(Args)]
#[command(next_help_heading = "Association")]
struct AssocArgs {
    #[arg(long, global = true, default_value_t = 1.0)]
    temporal_weight: f64,
    /// Samples per line integral, shared by association and tracking.
    #[arg(long, global = true, default_value_t = 10)]
    integral_samples: usize,
    #[arg(long, global = true, default_value_t = 0.1)]
    nms_threshold: f64,
    #[arg(long, global = true, default_value_t = 3)]
    nms_window: usize,
    #[arg(long, global = true, default_value_t = 0.05)]
    min_limb_score: f64,
    #[arg(long, global = true, default_value_t = 2.0)]
    search_radius_multiplier: f64,
    #[arg(long, global = true, action = clap::ArgAction::Set, default_value_t = true)]
    use_occluded_candidates: bool,
}

#[derive(Args)]
#[command(next_help_heading = "Tracking")]
struct TrackerArgs {
    #[arg(long, global = true, default_value_t = 1)]
    max_age: u32,
    #[arg(long, global = true, default_value_t = 0.1)]
    min_match_score: f64,
    #[arg(long, global = true, default_value_t = 3)]
    min_joints_for_birth: usize,
    #[arg(long, global = true, default_value_t = 3)]
    min_joints_for_match: usize,
    #[arg(long, global = true, value_enum, default_value_t = AffinityArg::Taf)]
    affinity: AffinityArg,
    #[arg(long, global = true, value_enum, default_value_t = NormalizationArg::Union)]
    normalization: NormalizationArg,
    #[arg(long, global = true, default_value_t = 0.5)]
    stationary_score: f64,
}

#[derive(Args)]
#[command(next_help_heading = "Evaluation")]
struct EvalArgs {
    #[arg(long, global = true, default_value_t = 0.5)]
    pckh_ratio: f64,
    #[arg(long, global = true, default_value_t = 0.5)]
    iou_threshold: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum MaskArg {
    AllOnes,
    ExcludeOccluded,
}

#[derive(Clone, Copy, ValueEnum)]
enum AffinityArg {
    Taf,
    BoxIou,
}

#[derive(Clone, Copy, ValueEnum)]
enum NormalizationArg {
    Shared,
    Union,
}

fn pair<T: FromStr>(s: &str) -> Result<(T, T), String> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| format!("expected A,B, got `{s}`"))?;
    let parse = |v: &str| {
        v.trim()
            .parse::<T>()
            .map_err(|_| format!("cannot parse `{v}`"))
    };
    Ok((parse(a)?, parse(b)?))
}

impl SynthArgs {
    fn config(&self) -> SynthConfig {
        SynthConfig {
            alpha_sigma: self.alpha_sigma,
            paf_half_width: self.paf_half_width,
            taf_half_width: self.taf_half_width,
            mask_policy: match self.mask_policy {
                MaskArg::AllOnes => MaskPolicy::AllOnes,
                MaskArg::ExcludeOccluded => MaskPolicy::ExcludeOccludedDisks,
            },
        }
    }
}

impl Cli {
    fn pipeline(&self) -> Result<PipelineConfig> {
        let a = &self.assoc;
        let t = &self.tracker;
        let cfg = PipelineConfig {
            assoc: AssocConfig {
                temporal_weight: a.temporal_weight,
                integral_samples: a.integral_samples,
                nms_threshold: a.nms_threshold,
                nms_window: a.nms_window,
                min_limb_score: a.min_limb_score,
                search_radius_multiplier: a.search_radius_multiplier,
                use_occluded_candidates: a.use_occluded_candidates,
            },
            tracker: TrackerConfig {
                max_age: t.max_age,
                min_match_score: t.min_match_score,
                min_joints_for_birth: t.min_joints_for_birth,
                min_joints_for_match: t.min_joints_for_match,
                affinity: match t.affinity {
                    AffinityArg::Taf => AffinityKind::Taf,
                    AffinityArg::BoxIou => AffinityKind::BoxIou,
                },
                normalization: match t.normalization {
                    NormalizationArg::Shared => AffinityNormalization::Shared,
                    NormalizationArg::Union => AffinityNormalization::Union,
                },
                integral_samples: a.integral_samples,
                stationary_score: t.stationary_score,
            },
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn eval_config(&self) -> EvalConfig {
        EvalConfig {
            pckh_ratio: self.eval.pckh_ratio,
            iou_threshold: self.eval.iou_threshold,
        }
    }
}

fn read_input(path: Option<&Path>) -> Result<Vec<u8>> {
    match path {
        Some(p) if p != Path::new("-") => {
            std::fs::read(p).with_context(|| format!("reading {}", p.display()))
        }
        _ => {
            let mut buf = Vec::new();
            std::io::stdin()
                .read_to_end(&mut buf)
                .context("reading stdin")?;
            Ok(buf)
        }
    }
}

fn read_text(path: Option<&Path>) -> Result<String> {
    let name = path.map_or("stdin".into(), |p| p.display().to_string());
    String::from_utf8(read_input(path)?).with_context(|| format!("{name} is not UTF-8 text"))
}

fn write_output(path: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match path {
        Some(p) if p != Path::new("-") => {
            std::fs::write(p, bytes).with_context(|| format!("writing {}", p.display()))
        }
        _ => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes)?;
            out.flush()?;
            Ok(())
        }
    }
}

fn run(cli: &Cli) -> Result<()> {
    let topo = default_topology();
    match &cli.command {
        Command::Gen(g) => {
            let scene = SceneConfig {
                seed: g.seed,
                num_people: g.people,
                image_size: g.image_size,
                distance_range: g.distance,
                speed_range: g.speed,
                occluder_events: g.occluder_events,
                duration: g.duration,
                crossing_pairs: g.crossing_pairs,
                fps: g.fps,
                min_gap: g.min_gap,
                keep_in_frame: g.keep_in_frame,
                random_occlusion: g.random_occlusion,
            };
            scene
                .validate()
                .map_err(anyhow::Error::msg)
                .context("invalid scene")?;
            if g.clip_stride == 0 {
                bail!("clip stride must be >= 1");
            }
            let mut sequence = generate(&scene);
            sequence.clip_stride = g.clip_stride;
            let text = save_annotations(&AnnotationDocument {
                sequence,
                topology: topo,
            })?;
            write_output(g.output.as_deref(), text.as_bytes())
        }
        Command::Synth(io) => {
            let doc = load_annotations(&read_text(io.input.as_deref())?)?;
            let stacks = synth_sequence(&doc.sequence, &doc.topology, &cli.synth.config())?;
            let mut bytes = Vec::new();
            for s in &stacks {
                encode_field_stack(s, &mut bytes);
            }
            write_output(io.output.as_deref(), &bytes)
        }
        Command::Detect(io) => {
            let cfg = cli.pipeline()?;
            let stacks = decode_field_stream(&read_input(io.input.as_deref())?)?;
            let frames = detect_frames(&stacks, &topo, &cfg.assoc)?;
            write_output(
                io.output.as_deref(),
                save_poses(&numbered(frames)).as_bytes(),
            )
        }
        Command::Track(io) => {
            let cfg = cli.pipeline()?;
            let stacks = decode_field_stream(&read_input(io.input.as_deref())?)?;
            let tracked = track_sequence(&stacks, &topo, &cfg)?;
            eprintln!(
                "{} tracklets over {} frames",
                tracked.tracklets.len(),
                tracked.frames.len()
            );
            write_output(
                io.output.as_deref(),
                save_poses(&numbered(tracked.frames)).as_bytes(),
            )
        }
        Command::Eval(e) => {
            let preds = load_poses(&read_text(e.predictions.as_deref())?).context("predictions")?;
            let gt = load_annotations(&read_text(Some(&e.gt))?).context("ground truth")?;
            let gt_frames: Vec<_> = gt.sequence.processed_frames().cloned().collect();
            if preds.len() != gt_frames.len() {
                bail!(
                    "sequence length mismatch: {} predicted frames vs {} processed ground-truth frames",
                    preds.len(),
                    gt_frames.len()
                );
            }
            let pred_frames: Vec<_> = preds.into_iter().map(|f| f.poses).collect();
            let report =
                jointtrack::metrics::evaluate(&pred_frames, &gt_frames, &cli.eval_config())?;
            let entries = report_entries(&report);
            let width = entries.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
            let mut table = String::new();
            for (k, v) in &entries {
                let v = v.map_or("n/a".to_string(), |v| canonical(v).to_string());
                table.push_str(&format!("{k:<width$}  {v}\n"));
            }
            write_output(None, table.as_bytes())?;
            if let Some(path) = &e.report {
                write_output(Some(path), save_report(&report).as_bytes())?;
            }
            Ok(())
        }
        Command::Render(r) => render::run(r, &read_text(r.poses.as_deref())?, &topo),
    }
}

/// Pose frames numbered by their position in the processed sequence.
fn numbered(frames: Vec<Vec<jointtrack::PosePrediction>>) -> Vec<PoseFrame> {
    frames
        .into_iter()
        .enumerate()
        .map(|(i, poses)| PoseFrame {
            frame_index: i as u32,
            poses,
        })
        .collect()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
