//! `foon`: batch front end for building networks, generating traces,
//! recognizing functional units, evaluating and classifying recipes.
//!
//! Exit codes: 0 on success, 2 on any input, parse or configuration error,
//! 3 when no segment of the whole input produced a candidate unit.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use foon_core::config::PipelineConfig;
use foon_core::evaluation::{leave_one_out, results_csv, summary_csv, summary_table};
use foon_core::foon::{merge, RecipeClass, Subgraph, UniversalFoon};
use foon_core::format::{parse_subgraph, serialize_foon, serialize_subgraph};
use foon_core::recognition::recognize;
use foon_core::task::{classification_csv, infer_task};
use foon_core::taxonomy::MotionTaxonomy;
use foon_core::trace::{parse_trace, serialize_trace, VideoTrace};
use foon_core::tracegen::{gen_trace, synthetic_corpus, Layout, NoiseParams};
use foon_core::Error as CoreError;

const TRACE_SUFFIX: &str = ".trace.json";

#[derive(Debug, thiserror::Error)]
enum Failure {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    NoCandidates(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Input(_) => 2,
            Failure::NoCandidates(_) => 3,
        }
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn at(path: &Path, e: impl std::fmt::Display) -> Failure {
    Failure::Input(format!("{}: {e}", path.display()))
}

#[derive(Parser)]
#[command(name = "foon", version, about = "Functional object-oriented network toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Pipeline {
    /// key=value weight file; omitted keys keep their defaults
    #[arg(long)]
    config: Option<PathBuf>,
    /// Motion taxonomy file (synonym groups, then a CLASSMAP section)
    #[arg(long)]
    taxonomy: Option<PathBuf>,
    /// Overrides top_k from the config
    #[arg(long)]
    top_k: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Merge subgraph files (or directories of *.foon files) into a universal FOON
    Merge {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        /// Output file; the network goes to stdout when omitted
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print node, edge and unit counts of the merged network
    Stats {
        #[arg(long, required = true, num_args = 1..)]
        foon: Vec<PathBuf>,
    },
    /// Rank candidate functional units for every segment of a trace
    Recognize {
        #[arg(long, required = true, num_args = 1..)]
        foon: Vec<PathBuf>,
        #[arg(long)]
        trace: PathBuf,
        #[command(flatten)]
        pipeline: Pipeline,
        /// CSV output file
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Leave-one-out evaluation over a directory of *.foon and *.trace.json files
    Evaluate {
        corpus: PathBuf,
        #[command(flatten)]
        pipeline: Pipeline,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Directory receiving results.csv and summary.csv
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Classify traces into recipe classes against annotated training videos
    InferTask {
        /// Annotated subgraphs; a video is never compared with its own annotation
        #[arg(long, required = true, num_args = 1..)]
        foon: Vec<PathBuf>,
        #[arg(long, required = true, num_args = 1..)]
        trace: Vec<PathBuf>,
        #[command(flatten)]
        pipeline: Pipeline,
        /// CSV output file
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Synthesize a perception trace for an annotated subgraph
    GenTrace {
        #[arg(long)]
        foon: PathBuf,
        #[arg(long)]
        seed: u64,
        #[command(flatten)]
        noise: NoiseArgs,
        #[arg(long)]
        taxonomy: Option<PathBuf>,
        /// Output file; the trace goes to stdout when omitted
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a synthetic annotated corpus with matching traces
    GenCorpus {
        /// Comma-separated recipe classes with built-in templates
        #[arg(long, value_delimiter = ',', default_value = "omelette,salad,pasta")]
        classes: Vec<String>,
        #[arg(long, default_value_t = 4)]
        videos: usize,
        #[arg(long)]
        seed: u64,
        #[command(flatten)]
        noise: NoiseArgs,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct NoiseArgs {
    #[arg(long, default_value_t = 0.0)]
    drop_prob: f64,
    #[arg(long, default_value_t = 0.0)]
    spurious_prob: f64,
    #[arg(long, default_value_t = 0.0)]
    jitter_px: f64,
    #[arg(long, default_value_t = 0.0)]
    motion_eps: f64,
    #[arg(long, default_value_t = 640)]
    width: u32,
    #[arg(long, default_value_t = 480)]
    height: u32,
    #[arg(long, default_value_t = 20)]
    frames: usize,
}

impl NoiseArgs {
    fn resolve(&self, seed: u64) -> CliResult<(NoiseParams, Layout)> {
        let noise = NoiseParams {
            drop_prob: self.drop_prob,
            spurious_prob: self.spurious_prob,
            jitter_px: self.jitter_px,
            motion_eps: self.motion_eps,
            seed,
        };
        noise.validate().map_err(|e| Failure::Input(e.to_string()))?;
        if self.width == 0 || self.height == 0 || self.frames == 0 {
            return Err(Failure::Input("width, height and frames must be positive".into()));
        }
        let layout = Layout {
            width: self.width,
            height: self.height,
            frames_per_segment: self.frames,
        };
        Ok((noise, layout))
    }
}

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| at(path, e))
}

fn write(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|e| at(path, e))
}

fn emit(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(p) => write(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Files under `inputs` with the given suffix: files are taken as given,
/// directories contribute their matching entries in name order.
fn expand(inputs: &[PathBuf], suffix: &str) -> CliResult<Vec<PathBuf>> {
    let mut files = Vec::new();
    for p in inputs {
        if p.is_dir() {
            let mut found: Vec<PathBuf> = fs::read_dir(p)
                .map_err(|e| at(p, e))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|f| f.is_file() && f.to_string_lossy().ends_with(suffix))
                .collect();
            found.sort();
            files.extend(found);
        } else if p.is_file() {
            files.push(p.clone());
        } else {
            return Err(at(p, "no such file or directory"));
        }
    }
    if files.is_empty() {
        return Err(Failure::Input(format!("no {suffix} files found")));
    }
    Ok(files)
}

fn load_subgraphs(inputs: &[PathBuf]) -> CliResult<Vec<Subgraph>> {
    expand(inputs, ".foon")?
        .iter()
        .map(|p| parse_subgraph(&read(p)?).map_err(|e| at(p, e)))
        .collect()
}

fn load_trace(path: &Path) -> CliResult<VideoTrace> {
    parse_trace(&read(path)?).map_err(|e| at(path, e))
}

fn load_pipeline(p: &Pipeline) -> CliResult<(PipelineConfig, MotionTaxonomy)> {
    let mut cfg = match &p.config {
        Some(path) => PipelineConfig::parse(&read(path)?).map_err(|e| at(path, e))?,
        None => PipelineConfig::default(),
    };
    if let Some(k) = p.top_k {
        cfg.fusion.top_k = k;
    }
    cfg.validate().map_err(|e| Failure::Input(e.to_string()))?;
    Ok((cfg, load_taxonomy(p.taxonomy.as_deref())?))
}

fn load_taxonomy(path: Option<&Path>) -> CliResult<MotionTaxonomy> {
    match path {
        Some(path) => MotionTaxonomy::parse(&read(path)?).map_err(|e| at(path, e)),
        None => Ok(MotionTaxonomy::default()),
    }
}

fn cmd_merge(inputs: &[PathBuf], out: Option<&Path>) -> CliResult<()> {
    let foon = merge(&load_subgraphs(inputs)?);
    let text = serialize_foon(&foon);
    match out {
        Some(p) => {
            write(p, &text)?;
            println!("{}", foon.stats());
        }
        None => {
            print!("{text}");
            eprintln!("{}", foon.stats());
        }
    }
    Ok(())
}

fn recognize_csv(
    foon: &UniversalFoon,
    trace: &VideoTrace,
    cfg: &PipelineConfig,
    tax: &MotionTaxonomy,
) -> CliResult<(String, String)> {
    let sw = cfg.scoring.resolve(trace.frame_width, trace.frame_height);
    let mut csv = String::from("video_id,segment_index,rank,motion,conf_foon,conf_motion,unit_key\n");
    let mut text = String::new();
    for (i, seg) in trace.segments.iter().enumerate() {
        let _ = writeln!(text, "segment {i} [{}-{}]", seg.start_frame, seg.end_frame);
        match recognize(foon, seg, &sw, &cfg.fusion, tax) {
            Ok(ranked) => {
                for (r, c) in ranked.iter().enumerate() {
                    let _ = writeln!(
                        text,
                        "  {:>2}  {:>8.4}  {:>8.4}  {:<10} {}",
                        r + 1,
                        c.conf_motion,
                        c.conf_foon,
                        c.unit.motion.label,
                        c.key
                    );
                    let _ = writeln!(
                        csv,
                        "{},{i},{},{},{:.6},{:.6},{}",
                        trace.video_id,
                        r + 1,
                        c.unit.motion.label,
                        c.conf_foon,
                        c.conf_motion,
                        c.key
                    );
                }
            }
            Err(CoreError::NoCandidates) => {
                text.push_str("   1  UNKNOWN\n");
                let _ = writeln!(csv, "{},{i},1,UNKNOWN,,,", trace.video_id);
            }
            Err(e) => return Err(Failure::Input(format!("segment {i}: {e}"))),
        }
    }
    Ok((text, csv))
}

fn cmd_recognize(foon: &[PathBuf], trace: &Path, p: &Pipeline, out: Option<&Path>) -> CliResult<()> {
    let (cfg, tax) = load_pipeline(p)?;
    let foon = merge(&load_subgraphs(foon)?);
    let trace = load_trace(trace)?;
    let (text, csv) = recognize_csv(&foon, &trace, &cfg, &tax)?;
    print!("{text}");
    if let Some(out) = out {
        write(out, &csv)?;
    }
    Ok(())
}

fn load_corpus(dir: &Path) -> CliResult<Vec<(Subgraph, VideoTrace)>> {
    if !dir.is_dir() {
        return Err(at(dir, "not a directory"));
    }
    let mut graphs: BTreeMap<String, Subgraph> = BTreeMap::new();
    for g in load_subgraphs(&[dir.to_path_buf()])? {
        if graphs.contains_key(&g.video_id) {
            return Err(Failure::Input(format!("duplicate video id {:?}", g.video_id)));
        }
        graphs.insert(g.video_id.clone(), g);
    }
    let mut corpus = Vec::new();
    for path in expand(&[dir.to_path_buf()], TRACE_SUFFIX)? {
        let t = load_trace(&path)?;
        let g = graphs
            .remove(&t.video_id)
            .ok_or_else(|| at(&path, format!("no annotated subgraph for video {:?}", t.video_id)))?;
        if g.units.len() != t.segments.len() {
            return Err(at(
                &path,
                format!("{} segments but {} annotated units", t.segments.len(), g.units.len()),
            ));
        }
        corpus.push((g, t));
    }
    if let Some(id) = graphs.keys().next() {
        return Err(Failure::Input(format!("no trace for video {id:?}")));
    }
    Ok(corpus)
}

fn cmd_evaluate(dir: &Path, p: &Pipeline, jobs: usize, out: Option<&Path>) -> CliResult<()> {
    let (cfg, tax) = load_pipeline(p)?;
    let corpus = load_corpus(dir)?;
    let report = leave_one_out(&corpus, &cfg, &tax, jobs).map_err(|e| Failure::Input(e.to_string()))?;
    print!("{}", summary_table(&report.result));
    println!(
        "videos={} segments={} unknown={}",
        report.videos.len(),
        report.segments,
        report.unknown_segments
    );
    if let Some(out) = out {
        fs::create_dir_all(out).map_err(|e| at(out, e))?;
        write(&out.join("results.csv"), &results_csv(report.rows()))?;
        write(&out.join("summary.csv"), &summary_csv(&report.result))?;
    }
    if report.unknown_segments == report.segments {
        return Err(Failure::NoCandidates("no segment produced a candidate unit".into()));
    }
    Ok(())
}

fn cmd_infer_task(foon: &[PathBuf], traces: &[PathBuf], p: &Pipeline, out: Option<&Path>) -> CliResult<()> {
    let (cfg, tax) = load_pipeline(p)?;
    let graphs = load_subgraphs(foon)?;
    let mut traces = expand(traces, TRACE_SUFFIX)?
        .iter()
        .map(|t| load_trace(t))
        .collect::<CliResult<Vec<_>>>()?;
    traces.sort_by(|a, b| a.video_id.cmp(&b.video_id));

    let mut csv = String::new();
    let (mut segments, mut unknown) = (0, 0);
    for t in &traces {
        let training: Vec<Subgraph> = graphs.iter().filter(|g| g.video_id != t.video_id).cloned().collect();
        let inf = infer_task(&training, t, &cfg, &tax).map_err(|e| Failure::Input(format!("{}: {e}", t.video_id)))?;
        segments += inf.segment_units.len();
        unknown += inf.segment_units.iter().filter(|u| u.is_none()).count();
        let best = inf.ranking.first().map_or(RecipeClass::Unlabeled, |r| r.0);
        println!("{}\t{best}", t.video_id);
        let block = classification_csv(&t.video_id, &inf.ranking);
        let body = if csv.is_empty() {
            block.as_str()
        } else {
            block.split_once('\n').map_or("", |(_, rest)| rest)
        };
        csv.push_str(body);
    }
    if let Some(out) = out {
        write(out, &csv)?;
    }
    if unknown == segments {
        return Err(Failure::NoCandidates("no segment produced a candidate unit".into()));
    }
    Ok(())
}

fn cmd_gen_trace(
    foon: &Path,
    seed: u64,
    noise: &NoiseArgs,
    taxonomy: Option<&Path>,
    out: Option<&Path>,
) -> CliResult<()> {
    let (noise, layout) = noise.resolve(seed)?;
    let tax = load_taxonomy(taxonomy)?;
    let g = parse_subgraph(&read(foon)?).map_err(|e| at(foon, e))?;
    emit(out, &serialize_trace(&gen_trace(&g, &layout, &noise, &tax)))
}

fn cmd_gen_corpus(classes: &[String], videos: usize, seed: u64, noise: &NoiseArgs, out: &Path) -> CliResult<()> {
    let classes = classes
        .iter()
        .map(|c| c.parse::<RecipeClass>().map_err(Failure::Input))
        .collect::<CliResult<Vec<_>>>()?;
    let (noise, layout) = noise.resolve(seed)?;
    let corpus = synthetic_corpus(&classes, videos, seed).map_err(|e| Failure::Input(e.to_string()))?;
    let tax = MotionTaxonomy::default();
    fs::create_dir_all(out).map_err(|e| at(out, e))?;
    for (i, g) in corpus.iter().enumerate() {
        let n = NoiseParams {
            seed: seed.wrapping_add(i as u64),
            ..noise
        };
        write(&out.join(format!("{}.foon", g.video_id)), &serialize_subgraph(g))?;
        let trace = serialize_trace(&gen_trace(g, &layout, &n, &tax));
        write(&out.join(format!("{}{TRACE_SUFFIX}", g.video_id)), &trace)?;
    }
    println!("wrote {} videos to {}", corpus.len(), out.display());
    Ok(())
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Merge { inputs, out } => cmd_merge(&inputs, out.as_deref()),
        Command::Stats { foon } => {
            println!("{}", merge(&load_subgraphs(&foon)?).stats());
            Ok(())
        }
        Command::Recognize {
            foon,
            trace,
            pipeline,
            out,
        } => cmd_recognize(&foon, &trace, &pipeline, out.as_deref()),
        Command::Evaluate {
            corpus,
            pipeline,
            jobs,
            out,
        } => cmd_evaluate(&corpus, &pipeline, jobs, out.as_deref()),
        Command::InferTask {
            foon,
            trace,
            pipeline,
            out,
        } => cmd_infer_task(&foon, &trace, &pipeline, out.as_deref()),
        Command::GenTrace {
            foon,
            seed,
            noise,
            taxonomy,
            out,
        } => cmd_gen_trace(&foon, seed, &noise, taxonomy.as_deref(), out.as_deref()),
        Command::GenCorpus {
            classes,
            videos,
            seed,
            noise,
            out,
        } => cmd_gen_corpus(&classes, videos, seed, &noise, &out),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.code())
        }
    }
}
