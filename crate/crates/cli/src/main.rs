use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use roadfuse::pipeline::dataset::{frame_file_name, load_sequence, write_rgb};
use roadfuse::pipeline::output::{read_records, ResultWriter};
use roadfuse::pipeline::{render_overlay, Pipeline, PipelineConfig};
use roadfuse::synth::eval::metrics_json;
use roadfuse::synth::{evaluate, read_truth, scene_seed, standard_suites, suite_by_name, write_scene, Metrics};
use roadfuse::{BBox2D, Error};

#[derive(Parser, Debug)]
#[command(name = "detect", version, about = "Road obstacle detection from stereo color and disparity frames")]
struct Cli {
    /// Log more (repeat for debug output).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Detect obstacles in every frame of a dataset.
    Run {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Also write annotated frames to OUT/overlay.
        #[arg(long)]
        overlay: bool,
        /// Worker threads, 0 for one per core.
        #[arg(long, default_value_t = 0)]
        threads: usize,
        /// Overrides the plane-fitting seed from the config.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Draw the configured ROI over the first frame.
    RoiPreview {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "roi_preview.png")]
        out: PathBuf,
    },
    /// Render a benchmark suite into dataset directories.
    Synth {
        /// Suite name or its short form (s1 .. s5); "all" renders every suite.
        #[arg(long)]
        suite: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Score detection records against rendered truth.
    Eval {
        #[arg(long)]
        results: PathBuf,
        /// Scene directory holding truth/.
        #[arg(long)]
        truth: PathBuf,
        #[arg(long, default_value_t = 0.5)]
        iou: f64,
        #[arg(long, value_enum, default_value_t = StageArg::Fused)]
        stage: StageArg,
        /// Ignore frames with an id below this.
        #[arg(long, default_value_t = 0)]
        skip: u64,
        /// Print the full metrics as JSON.
        #[arg(long)]
        json: bool,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum StageArg {
    Fused,
    Rgb,
    Stereo,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    let outcome = match cli.command {
        Command::Run {
            dataset,
            config,
            out,
            overlay,
            threads,
            seed,
        } => run(&dataset, &config, &out, overlay, threads, seed),
        Command::RoiPreview { dataset, config, out } => roi_preview(&dataset, &config, &out).map(|_| 0),
        Command::Synth { suite, out, seed } => synth(&suite, &out, seed).map(|_| 0),
        Command::Eval {
            results,
            truth,
            iou,
            stage,
            skip,
            json,
        } => eval(&results, &truth, iou, stage, skip, json).map(|_| 0),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn load_config(path: &Path, seed: Option<u64>) -> Result<PipelineConfig> {
    let mut cfg = PipelineConfig::load(path)?;
    if let Some(s) = seed {
        cfg.ransac.seed = s;
        cfg.validate()?;
    }
    Ok(cfg)
}

/// Returns 0 on success, 2 when some frames failed.
fn run(dataset: &Path, config: &Path, out: &Path, overlay: bool, threads: usize, seed: Option<u64>) -> Result<u8> {
    if threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .context("configuring worker threads")?;
    }
    let mut cfg = load_config(config, seed)?;
    if threads > 0 {
        cfg.runtime.threads = threads;
    }
    let seq = load_sequence(dataset)?;
    let intr = seq.intrinsics;
    let cam = intr.camera()?;
    if (cam.fx - cfg.camera.fx).abs() > 1e-9 || (cam.baseline - cfg.camera.baseline).abs() > 1e-9 {
        log::warn!("dataset intrinsics differ from the config camera; using the config");
    }
    let pipeline = Pipeline::new(cfg, intr.width, intr.height)?;
    let mut state = pipeline.new_state()?;
    let mut writer = ResultWriter::create(out)?;
    let overlay_dir = out.join("overlay");
    if overlay {
        fs::create_dir_all(&overlay_dir).with_context(|| format!("creating {}", overlay_dir.display()))?;
    }
    if seq.frame_ids.is_empty() {
        println!("no frames in {}", dataset.display());
    }

    let mut failed = 0usize;
    for (id, bundle) in seq.frames() {
        let result = bundle.and_then(|b| pipeline.process(&b, &mut state).map(|r| (b, r)));
        match result {
            Ok((bundle, r)) => {
                writer.push(&r)?;
                if overlay {
                    let img = render_overlay(&bundle.rgb, &r, pipeline.roi_mask());
                    write_rgb(&overlay_dir.join(frame_file_name(id)), &img)?;
                }
                log::info!("frame {id}: {} detections in {:.0} ms", r.detections.len(), r.timings.total_ms);
            }
            Err(e @ (Error::Io { .. } | Error::Image { .. } | Error::DimensionMismatch { .. })) => {
                log::error!("frame {id}: {e}");
                writer.record_failure(id, &e);
                failed += 1;
            }
            Err(e) => return Err(e.into()),
        }
    }
    let summary = writer.finish(seq.warnings.clone())?;
    println!(
        "{} frames, {} detections, mean {:.1} ms/frame (rgb {:.1}, stereo {:.1})",
        summary.frames,
        summary.detections,
        summary.mean_timings.total_ms,
        summary.mean_timings.rgb_ms,
        summary.mean_timings.stereo_ms
    );
    if failed > 0 || !seq.warnings.is_empty() {
        eprintln!("{failed} frames failed, {} skipped", seq.warnings.len());
        return Ok(2);
    }
    Ok(0)
}

fn roi_preview(dataset: &Path, config: &Path, out: &Path) -> Result<()> {
    let cfg = load_config(config, None)?;
    let seq = load_sequence(dataset)?;
    let Some(&first) = seq.frame_ids.first() else {
        bail!("no frames in {}", dataset.display());
    };
    let bundle = seq.read(first)?;
    let pipeline = Pipeline::new(cfg, seq.intrinsics.width, seq.intrinsics.height)?;
    let empty = roadfuse::pipeline::FrameResult {
        frame_id: first,
        rgb_boxes: Vec::new(),
        stereo_boxes: Vec::new(),
        rgb_averaged: Vec::new(),
        stereo_averaged: Vec::new(),
        detections: Vec::new(),
        ground_found: true,
        timings: Default::default(),
    };
    write_rgb(out, &render_overlay(&bundle.rgb, &empty, pipeline.roi_mask()))?;
    println!("wrote {}", out.display());
    Ok(())
}

fn synth(name: &str, out: &Path, seed: u64) -> Result<()> {
    let suites = if name == "all" {
        standard_suites()
    } else {
        vec![suite_by_name(name).with_context(|| {
            let names: Vec<String> = standard_suites().into_iter().map(|s| s.name).collect();
            format!("unknown suite '{name}', expected one of {}", names.join(", "))
        })?]
    };
    for suite in suites {
        for spec in &suite.scenes {
            let dir = out.join(&spec.name);
            write_scene(spec, scene_seed(seed, &spec.name), &dir)?;
            println!("{}: {} frames -> {}", spec.name, spec.frames, dir.display());
        }
    }
    Ok(())
}

fn eval(results: &Path, truth_dir: &Path, iou: f64, stage: StageArg, skip: u64, json: bool) -> Result<()> {
    let records = read_records(results)?;
    let truth: Vec<_> = read_truth(truth_dir)?.into_iter().filter(|t| t.frame_id >= skip).collect();
    let dets: Vec<(u64, Vec<BBox2D>)> = records
        .iter()
        .filter(|r| r.frame_id >= skip)
        .map(|r| {
            let boxes = match stage {
                StageArg::Fused => r.detections.iter().map(|d| d.bbox).collect(),
                StageArg::Rgb => r.rgb_averaged.iter().map(|a| a.bbox).collect(),
                StageArg::Stereo => r.stereo_averaged.iter().map(|a| a.bbox).collect(),
            };
            (r.frame_id, boxes)
        })
        .collect();
    let m = evaluate(&dets, &truth, iou)?;
    if json {
        println!("{}", metrics_json(&m));
    } else {
        print_table(&m, iou);
    }
    Ok(())
}

fn print_table(m: &Metrics, iou: f64) {
    println!("frames          {}", m.frames);
    println!("iou threshold   {iou}");
    println!("tp / fp / fn    {} / {} / {}", m.tp, m.fp, m.fn_);
    println!("detection rate  {:.3}", m.detection_rate);
    println!("fp per frame    {:.3}", m.fp_per_frame);
    println!("mean iou        {:.3}", m.mean_iou);
    for (id, s) in &m.per_obstacle {
        println!("obstacle {id:<6} {}/{} frames ({:.3})", s.detected, s.frames, s.rate());
    }
}
