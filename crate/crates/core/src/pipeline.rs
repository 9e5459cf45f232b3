//! File-based pipeline stages behind the `scenelang` binary.
//!
//! Each stage reads the files written by the previous one and writes its
//! own outputs atomically, so reruns on identical inputs produce identical
//! bytes. Exit codes: 0 ok, 2 invalid input or configuration, 3 I/O,
//! 4 provider failure.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::caption::{self, CaptionSettings, CropEmbeddings, Refiner};
use crate::config::{load_config, PipelineConfig};
use crate::embed::{Embedder, HashingEmbedder};
use crate::error::{Error, Result};
use crate::io;
use crate::metrics::report::{self, evaluate, render_table, Record, Sample};
use crate::projection::{self, project_box};
use crate::provider::{HttpCorrector, HttpEmbedder, HttpJudge, HttpRefiner, HttpService};
use crate::reasoner::{build_scene_graph, load_graph, save_graph, VerticalAxis};
use crate::reflection::{self, Corrector, Judge, ReflectConfig, RuleBased};
use crate::scene::{load_priors, load_scene, save_scene, PriorTable, Scene, View};
use crate::scene_info::{self, build_scene_information, load_scene_information, ExpressionMode};
use crate::selection::{self, load_embeddings, EmbeddingFile};
use crate::synth;

#[derive(Debug, Parser)]
#[command(name = "scenelang", version, about = "3D scene to language pipeline")]
pub struct Cli {
    /// TOML configuration file; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Worker threads for parallel stages.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Seed for synthetic data.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build the spatial relation graph of a scene.
    Parse(ParseArgs),
    /// Caption objects and write the scene description.
    Describe(DescribeArgs),
    /// Score and correct captions and relation sentences.
    Reflect(ReflectArgs),
    /// Select the captions relevant to a question and assemble the prompt.
    Select(SelectArgs),
    /// Score predictions against references.
    Eval(EvalArgs),
    /// Generate a synthetic scene with caption candidates and references.
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
pub struct ParseArgs {
    #[arg(long)]
    pub scene: PathBuf,
    #[arg(long)]
    pub priors: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub theta_tol: Option<f64>,
    #[arg(long)]
    pub sectors: Option<u32>,
    #[arg(long)]
    pub saliency_m: Option<usize>,
    /// Emit directional tags for nearby pairs too.
    #[arg(long)]
    pub inclusive_nearby: bool,
    #[arg(long, value_parser = parse_vertical_axis)]
    pub vertical_axis: Option<VerticalAxis>,
}

#[derive(Debug, Args)]
pub struct DescribeArgs {
    #[arg(long)]
    pub scene: PathBuf,
    #[arg(long)]
    pub graph: PathBuf,
    /// Offline caption candidates (object id to texts and embeddings).
    #[arg(long)]
    pub candidates: Option<PathBuf>,
    /// Offline crop embeddings (object id to vector).
    #[arg(long)]
    pub crops: Option<PathBuf>,
    #[arg(long, value_parser = parse_mode)]
    pub mode: Option<ExpressionMode>,
    #[arg(long)]
    pub top_n: Option<usize>,
    /// Also write the crop manifest here.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Scene description JSON; a `.txt` rendering is written next to it.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ReflectArgs {
    #[arg(long)]
    pub scene: PathBuf,
    #[arg(long)]
    pub info: PathBuf,
    #[arg(long)]
    pub priors: Option<PathBuf>,
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long)]
    pub rounds: Option<u32>,
    /// Judge captions by picking the right label among the scene's labels.
    #[arg(long)]
    pub gt_labels: bool,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub reports: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SelectArgs {
    #[arg(long)]
    pub info: PathBuf,
    #[arg(long)]
    pub question: String,
    /// Precomputed token embeddings; computed on the fly when absent.
    #[arg(long)]
    pub embeddings: Option<PathBuf>,
    /// Scene used to derive the image-side query for the second round.
    #[arg(long)]
    pub scene: Option<PathBuf>,
    /// 0 = no filtering, 1 = question only, 2 = question then image.
    #[arg(long)]
    pub rounds: Option<u8>,
    #[arg(long)]
    pub k1: Option<usize>,
    #[arg(long)]
    pub k2: Option<usize>,
    /// Selection JSON; the prompt prefix is written next to it as `.txt`.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// JSON-lines predictions file.
    #[arg(long, conflicts_with = "info")]
    pub predictions: Option<PathBuf>,
    /// Scene description whose captions are scored against `--references`.
    #[arg(long, requires = "references")]
    pub info: Option<PathBuf>,
    /// Object id to reference captions.
    #[arg(long)]
    pub references: Option<PathBuf>,
    /// Metrics to report (repeatable); all applicable ones by default.
    #[arg(long = "metric")]
    pub metrics: Vec<String>,
    /// Report JSON; a `.txt` table is written next to it.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 60)]
    pub objects: usize,
    #[arg(long, default_value_t = 12)]
    pub candidates_per_object: usize,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

fn parse_mode(s: &str) -> std::result::Result<ExpressionMode, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_vertical_axis(s: &str) -> std::result::Result<VerticalAxis, String> {
    serde_json::from_value(serde_json::Value::String(s.to_string()))
        .map_err(|_| format!("expected camera_up, world_up or camera_forward, got {s:?}"))
}

fn priors_or_empty(path: Option<&Path>) -> Result<PriorTable> {
    path.map(load_priors).transpose().map(Option::unwrap_or_default)
}

pub fn cmd_parse(cfg: &PipelineConfig, a: &ParseArgs) -> Result<usize> {
    let mut rc = cfg.reasoner.clone();
    if let Some(b) = a.beta {
        rc.beta = b;
    }
    if let Some(t) = a.theta_tol {
        rc.theta_tol_deg = t;
    }
    if let Some(n) = a.sectors {
        rc.n_sectors = n;
    }
    if let Some(m) = a.saliency_m {
        rc.saliency_m = m;
    }
    if a.inclusive_nearby {
        rc.nearby_exclusive = false;
    }
    if let Some(v) = a.vertical_axis {
        rc.vertical_axis = v;
    }
    rc.validate()?;
    let scene = load_scene(&a.scene)?;
    let priors = priors_or_empty(a.priors.as_deref())?;
    let graph = build_scene_graph(&scene, &priors, &rc);
    save_graph(&a.out, &graph)?;
    Ok(graph.len())
}

fn embedder(cfg: &PipelineConfig) -> Box<dyn Embedder> {
    match &cfg.providers.embedding {
        Some(url) => Box::new(HttpEmbedder(HttpService::new(cfg.providers.service(url)))),
        None => Box::new(HashingEmbedder::default()),
    }
}

pub fn cmd_describe(cfg: &PipelineConfig, a: &DescribeArgs) -> Result<usize> {
    let scene = load_scene(&a.scene)?;
    let graph = load_graph(&a.graph)?;
    let candidates = match &a.candidates {
        Some(p) => caption::load_candidates(p)?,
        None => caption::CandidateFile::new(),
    };
    let crops: Option<CropEmbeddings> = a.crops.as_deref().map(io::read_json).transpose()?;
    let refiner: Option<HttpRefiner> = cfg
        .providers
        .refiner
        .as_ref()
        .map(|url| HttpRefiner(HttpService::new(cfg.providers.service(url))));
    let emb = embedder(cfg);
    let settings = CaptionSettings {
        embedder: emb.as_ref(),
        refiner: refiner.as_ref().map(|r| r as &dyn Refiner),
        crops: crops.as_ref(),
        top_n: a.top_n.unwrap_or(cfg.captions.top_n),
        max_in_flight: cfg.providers.max_in_flight,
    };
    if settings.top_n == 0 {
        return Err(Error::Config("top_n must be at least 1".into()));
    }
    let captions = caption::caption_scene(&scene, &candidates, &settings)?;
    let info = build_scene_information(&scene, &graph, &captions, a.mode.unwrap_or(cfg.mode))?;
    if let Some(m) = &a.manifest {
        projection::save_manifest(m, &projection::crop_manifest(&scene, cfg.captions.max_views))?;
    }
    scene_info::save_scene_information(&a.out, &info)?;
    Ok(info.token_estimate)
}

pub fn cmd_reflect(cfg: &PipelineConfig, a: &ReflectArgs) -> Result<usize> {
    let scene = load_scene(&a.scene)?;
    let info = load_scene_information(&a.info)?;
    let priors = priors_or_empty(a.priors.as_deref())?;
    let rc = ReflectConfig {
        tau: a.tau.unwrap_or(cfg.reflection.tau),
        rounds: a.rounds.unwrap_or(cfg.reflection.rounds),
        max_in_flight: cfg.providers.max_in_flight,
    };
    let rules = RuleBased {
        scene: &scene,
        priors: &priors,
        cfg: &cfg.reasoner,
        mode: info.mode,
    };
    let p = &cfg.providers;
    let http_judge = p.judge.as_ref().map(|u| HttpJudge(HttpService::new(p.service(u))));
    let http_corrector = p
        .corrector
        .as_ref()
        .map(|u| HttpCorrector(HttpService::new(p.service(u))));
    let judge: &dyn Judge = match &http_judge {
        Some(j) => j,
        None => &rules,
    };
    let corrector: &dyn Corrector = match &http_corrector {
        Some(c) => c,
        None => &rules,
    };
    let gt = a.gt_labels.then(|| scene.labels());
    let (out, reports) = reflection::reflect(&info, &scene, judge, corrector, &rc, gt.as_ref())?;
    if let Some(r) = &a.reports {
        reflection::save_reports(r, &reports)?;
    }
    scene_info::save_scene_information(&a.out, &out)?;
    Ok(reports.iter().filter(|r| r.replaced).count())
}

/// Display labels of the objects the reference camera sees, or of every
/// object when the camera has no intrinsics.
pub fn visible_label_text(scene: &Scene) -> String {
    let view = View {
        frame_id: "reference".into(),
        camera: scene.camera.clone(),
        image: String::new(),
    };
    let mut labels: Vec<String> = scene
        .objects
        .iter()
        .filter(|o| scene.camera.intrinsics.is_none() || project_box(o, &view).is_some())
        .map(|o| o.display_label())
        .collect();
    if labels.is_empty() {
        labels = scene.objects.iter().map(|o| o.display_label()).collect();
    }
    labels.sort();
    labels.dedup();
    labels.join(" ")
}

pub fn cmd_select(cfg: &PipelineConfig, a: &SelectArgs) -> Result<selection::SelectionResult> {
    let info = load_scene_information(&a.info)?;
    let rounds = a.rounds.unwrap_or(cfg.selection.rounds);
    let (k1, k2) = (a.k1.unwrap_or(cfg.selection.k1), a.k2.unwrap_or(cfg.selection.k2));
    let result = match rounds {
        0 => selection::unfiltered(&info, &a.question),
        1 | 2 => {
            let file: EmbeddingFile = match &a.embeddings {
                Some(p) => load_embeddings(p)?,
                None => {
                    let image_text = match (rounds, &a.scene) {
                        (2, Some(s)) => Some(visible_label_text(&load_scene(s)?)),
                        _ => None,
                    };
                    selection::embed_inputs(&info, &a.question, image_text.as_deref(), embedder(cfg).as_ref())?
                }
            };
            let m = file.matrices()?;
            if rounds == 1 {
                selection::select_top_k(&info, &m.question, &m.captions, k1, &a.question)?
            } else {
                let image = m.image.as_ref().ok_or_else(|| {
                    Error::Validation("two-round selection needs image embeddings (--embeddings or --scene)".into())
                })?;
                selection::select_two_round(&info, &m.question, image, &m.captions, k1, k2, &a.question)?
            }
        }
        r => return Err(Error::Config(format!("selection rounds must be 0, 1 or 2, got {r}"))),
    };
    selection::save_selection(&a.out, &result)?;
    Ok(result)
}

pub fn cmd_eval(_cfg: &PipelineConfig, a: &EvalArgs) -> Result<BTreeMap<String, f64>> {
    let records: Vec<Record> = match (&a.predictions, &a.info, &a.references) {
        (Some(p), _, _) => report::load_predictions(p)?,
        (None, Some(info), Some(refs)) => {
            let info = load_scene_information(info)?;
            let refs: BTreeMap<u32, Vec<String>> = io::read_json(refs)?;
            info.captions
                .iter()
                .map(|c| {
                    let r = refs
                        .get(&c.object_id)
                        .filter(|r| !r.is_empty())
                        .ok_or(Error::MissingCaption(c.object_id))?;
                    Ok(Record {
                        id: c.object_id.to_string(),
                        sample: Sample::Text {
                            pred: c.text.clone(),
                            refs: r.clone(),
                        },
                    })
                })
                .collect::<Result<Vec<_>>>()?
        }
        _ => {
            return Err(Error::Config(
                "eval needs --predictions, or --info with --references".into(),
            ))
        }
    };
    let only = (!a.metrics.is_empty()).then_some(a.metrics.as_slice());
    let rep = evaluate(&records, only)?;
    if let Some(out) = &a.out {
        io::write_json(out, &rep)?;
        io::write_atomic(&out.with_extension("txt"), render_table(&rep).as_bytes())?;
    }
    Ok(rep)
}

pub fn cmd_synth(seed: u64, a: &SynthArgs) -> Result<()> {
    let scene = synth::generate_synthetic_scene(seed, a.objects, synth::default_room_extent(a.objects))?;
    let candidates = caption::synthetic_candidates(
        &scene,
        seed,
        a.candidates_per_object.max(1),
        &HashingEmbedder::default(),
    )?;
    std::fs::create_dir_all(&a.out).map_err(|e| Error::io(&a.out, e))?;
    save_scene(&a.out.join("scene.json"), &scene)?;
    io::write_json(&a.out.join("priors.json"), synth::default_priors().rules())?;
    caption::save_candidates(&a.out.join("candidates.json"), &candidates)?;
    io::write_json(
        &a.out.join("references.json"),
        &synth::synthetic_references(&scene, seed),
    )?;
    Ok(())
}

fn dispatch(cli: &Cli) -> Result<String> {
    let cfg = load_config(cli.config.as_deref())?;
    if let Some(j) = cli.jobs {
        if j == 0 {
            return Err(Error::Config("--jobs must be at least 1".into()));
        }
        // the global pool can only be configured once per process
        let _ = rayon::ThreadPoolBuilder::new().num_threads(j).build_global();
    }
    Ok(match &cli.command {
        Command::Parse(a) => format!("wrote {} relations to {}", cmd_parse(&cfg, a)?, a.out.display()),
        Command::Describe(a) => format!("wrote {} (~{} tokens)", a.out.display(), cmd_describe(&cfg, a)?),
        Command::Reflect(a) => format!("replaced {} items; wrote {}", cmd_reflect(&cfg, a)?, a.out.display()),
        Command::Select(a) => {
            let r = cmd_select(&cfg, a)?;
            format!(
                "kept {} captions ({} tokens); wrote {}",
                r.kept.len(),
                r.token_count,
                a.out.display()
            )
        }
        Command::Eval(a) => render_table(&cmd_eval(&cfg, a)?).trim_end().to_string(),
        Command::Synth(a) => {
            cmd_synth(cli.seed, a)?;
            format!("wrote synthetic scene to {}", a.out.display())
        }
    })
}

/// Run the command line; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(&cli) {
        Ok(msg) => {
            println!("{msg}");
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
