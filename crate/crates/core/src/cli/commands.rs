use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::json;

use super::config::{write_back, DatasetConfig, MarkerSource, Setting};
use super::experiment::{
    augmentation_table, calibrate_on, markertype_table, measure_d_inf, oracle_predictions, segfunction_table, ExperimentTable,
};
use super::layout::{ensure_dir, SequenceLayout};
use super::oracle::{frame_seed, oracle_predict};
use super::synth::{touching_pair_case, write_synthetic, SynthSpec};
use crate::dataprep::{augment, make_reference, markers_from_weak, normalize, weight_map, AugmentationSpec, ElasticParams, FullAnnotation, WeakAnnotation};
use crate::error::{Error, Result};
use crate::io::{read_gray, read_labels, write_labels, write_mask, write_probability, write_scaled};
use crate::markerseg::{calibrate_tc, segment_image_detailed, PipelineParams};
use crate::metrics::{evaluate_frames, EvalReport};
use crate::raster::{GrayImage, LabelMap};

/// Everything a command needs besides its own arguments.
#[derive(Clone, Debug)]
pub struct RunContext {
    pub config: DatasetConfig,
    /// Config file that `calibrate` writes the threshold back to.
    pub config_path: Option<PathBuf>,
    pub root: PathBuf,
    pub out: PathBuf,
    pub sequences: Vec<String>,
    pub workers: usize,
    pub seed: u64,
}

impl RunContext {
    /// Context rooted at `root` with outputs in the same directory.
    pub fn new(config: DatasetConfig, root: impl Into<PathBuf>) -> RunContext {
        let root = root.into();
        RunContext {
            sequences: config.sequences.clone(),
            seed: config.seed,
            config,
            config_path: None,
            out: root.clone(),
            root,
            workers: 1,
        }
    }

    fn layouts(&self) -> Vec<SequenceLayout> {
        self.sequences
            .iter()
            .map(|s| SequenceLayout::new(&self.root, &self.out, s))
            .collect()
    }

    /// Runs `f` over `items` on `workers` threads. Results keep input order and
    /// the first failing item in that order decides the error.
    fn parallel<I: Sync, T: Send>(&self, items: &[I], f: impl Fn(&I) -> Result<T> + Sync) -> Result<Vec<T>> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(self.workers.max(1))
            .build()
            .map_err(|e| Error::Config(format!("cannot start workers: {e}")))?;
        let results: Vec<Result<T>> = pool.install(|| items.par_iter().map(&f).collect());
        results.into_iter().collect()
    }
}

/// What a command reports back: lines for stdout and `key=value` warnings.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Outcome {
    pub lines: Vec<String>,
    pub warnings: Vec<String>,
}

fn in_frame<T>(frame: &str, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        e @ Error::Frame { .. } => e,
        other => Error::frame(frame, other.to_string()),
    })
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        ensure_dir(dir)?;
    }
    std::fs::write(path, text)?;
    Ok(())
}

fn resolve_t_c(ctx: &RunContext) -> Result<u8> {
    match ctx.config.t_c {
        Setting::Fixed(t) => Ok(t),
        Setting::FromData => Err(Error::Config("t_c = calibrate; run `calibrate` first".into())),
    }
}

fn load_annotations(ctx: &RunContext) -> Result<Vec<LabelMap>> {
    let mut all = Vec::new();
    for layout in ctx.layouts() {
        for frame in layout.seg_frames()? {
            all.push(in_frame(&frame, read_labels(&layout.seg(&frame)))?);
        }
    }
    Ok(all)
}

fn resolve_d_inf(ctx: &RunContext) -> Result<f64> {
    match ctx.config.d_inf {
        Setting::Fixed(d) => Ok(d),
        Setting::FromData => measure_d_inf(&load_annotations(ctx)?),
    }
}

fn params_json(p: &PipelineParams) -> serde_json::Value {
    json!({
        "t_m": p.t_m.to_string().parse::<f64>().unwrap_or(f64::from(p.t_m)),
        "h": p.h,
        "k": p.k,
        "d_inf": p.d_inf,
        "t_c": p.t_c,
        "connectivity": p.connectivity.as_u8(),
        "remove_border": p.remove_border,
    })
}

/// Writes normalized images, marker and foreground targets and weight maps for
/// every annotated frame, plus `manifest.jsonl` in `<seq>_PREP`.
pub fn cmd_prepare(ctx: &RunContext) -> Result<Outcome> {
    let cfg = &ctx.config;
    let mut outcome = Outcome::default();
    for layout in ctx.layouts() {
        let frames = match cfg.marker_source {
            MarkerSource::ErodedFull => layout.seg_frames()?,
            MarkerSource::Weak => layout.tra_frames()?,
        };
        let dir = layout.prep_dir();
        ensure_dir(&dir)?;
        if frames.is_empty() {
            outcome
                .warnings
                .push(format!("kind=no_annotations seq={} dir={}", layout.seq, layout.root.display()));
        }
        let rows = ctx.parallel(&frames, |frame| in_frame(frame, prepare_frame(ctx, &layout, frame)))?;
        let mut manifest = String::new();
        let mut written = 0;
        for row in rows.into_iter().flatten() {
            if row.get("skipped").is_none() {
                written += 1;
            }
            manifest.push_str(&row.to_string());
            manifest.push('\n');
        }
        write_text(&dir.join("manifest.jsonl"), &manifest)?;
        outcome.lines.push(format!("seq={} prepared={} rows={}", layout.seq, written, manifest.lines().count()));
    }
    Ok(outcome)
}

struct Prepared {
    image: GrayImage,
    full: LabelMap,
    weak: Option<LabelMap>,
}

fn prepare_frame(ctx: &RunContext, layout: &SequenceLayout, frame: &str) -> Result<Vec<serde_json::Value>> {
    let cfg = &ctx.config;
    let image_path = layout.image(frame);
    let seg_path = layout.seg(frame);
    let tra_path = layout.tra(frame);
    let missing = [Some(&image_path), Some(&seg_path), (cfg.marker_source == MarkerSource::Weak).then_some(&tra_path)]
        .into_iter()
        .flatten()
        .find(|p| !p.exists());
    if let Some(p) = missing {
        return Ok(vec![json!({ "frame": frame, "skipped": format!("missing {}", p.display()) })]);
    }
    let base = Prepared {
        image: read_gray(&image_path)?,
        full: read_labels(&seg_path)?,
        weak: match cfg.marker_source {
            MarkerSource::Weak => Some(read_labels(&tra_path)?),
            MarkerSource::ErodedFull => None,
        },
    };
    let mut variants = vec![(frame.to_string(), base)];
    for copy in 1..=cfg.augment_copies {
        let spec = AugmentationSpec {
            elastic: cfg.elastic.then(ElasticParams::default),
            seed: frame_seed(ctx.seed, &format!("{}/{frame}/{copy}", layout.seq)),
            ..AugmentationSpec::default()
        };
        let src = &variants[0].1;
        // identical RNG streams give the same transform for both label maps
        let (image, full) = augment(&src.image, &src.full, &spec, &mut spec.rng())?;
        let weak = match &src.weak {
            Some(w) => Some(augment(&src.image, w, &spec, &mut spec.rng())?.1),
            None => None,
        };
        variants.push((format!("{frame}_aug{copy}"), Prepared { image, full, weak }));
    }

    let mut rows = Vec::new();
    for (id, p) in variants {
        let full = FullAnnotation(p.full);
        let reference = make_reference(&full, cfg.k, cfg.connectivity)?;
        let markers = match &p.weak {
            Some(w) => markers_from_weak(&WeakAnnotation(w.clone()), cfg.connectivity)?.to_mask(),
            None => reference.markers.clone(),
        };
        let weights = weight_map(&full, &cfg.weights)?;
        let peak = weights.min_max().map_or(1.0, |(_, hi)| hi.max(1e-6));
        let weight_scale = (u16::MAX as f32 / peak).floor().min(1000.0);
        let dir = layout.prep_dir();
        let names = [
            format!("t{id}_norm.tif"),
            format!("t{id}_ym.tif"),
            format!("t{id}_yc.tif"),
            format!("t{id}_weight.tif"),
        ];
        let normalized = normalize(&p.image, cfg.normalization).map(|&v| (v + 0.5).clamp(0.0, 1.0));
        write_probability(&dir.join(&names[0]), &normalized)?;
        write_mask(&dir.join(&names[1]), &markers)?;
        write_mask(&dir.join(&names[2]), &reference.foreground)?;
        write_scaled(&dir.join(&names[3]), &weights, weight_scale)?;
        rows.push(json!({
            "frame": id,
            "image": layout.image(frame).display().to_string(),
            "seg": layout.seg(frame).display().to_string(),
            "tra": p.weak.as_ref().map(|_| layout.tra(frame).display().to_string()),
            "normalization": cfg.normalization.to_string(),
            "marker_source": cfg.marker_source.to_string(),
            "k": cfg.k,
            "weight_a": cfg.weights.a,
            "weight_d": cfg.weights.d,
            "weight_scale": weight_scale,
            "seed": ctx.seed,
            "normalized": names[0],
            "y_m": names[1],
            "y_c": names[2],
            "weight": names[3],
        }));
    }
    Ok(rows)
}

/// Writes oracle marker and foreground predictions for every annotated frame.
pub fn cmd_oracle_predict(ctx: &RunContext) -> Result<Outcome> {
    let mut outcome = Outcome::default();
    for layout in ctx.layouts() {
        let frames = layout.seg_frames()?;
        if frames.is_empty() {
            return Err(Error::MissingFile(layout.seg_dir()));
        }
        ensure_dir(&layout.pred_dir())?;
        ctx.parallel(&frames, |frame| {
            in_frame(frame, {
                let full = FullAnnotation(read_labels(&layout.seg(frame))?);
                let mut rng = ChaCha8Rng::seed_from_u64(frame_seed(ctx.seed, &format!("{}/{frame}", layout.seq)));
                oracle_predict(&full, &ctx.config.oracle, ctx.config.connectivity, &mut rng).and_then(|(m, fg)| {
                    write_probability(&layout.marker_pred(frame), &m)?;
                    write_probability(&layout.fg_pred(frame), &fg)
                })
            })
        })?;
        outcome.lines.push(format!("seq={} predicted={}", layout.seq, frames.len()));
    }
    Ok(outcome)
}

/// Calibrates `t_c` on frames that have both a foreground prediction and a full
/// annotation. Writes the Jaccard curve and, when the config is a file, the
/// chosen threshold back into it.
pub fn cmd_calibrate(ctx: &RunContext) -> Result<Outcome> {
    let mut pairs: Vec<(SequenceLayout, String)> = Vec::new();
    for layout in ctx.layouts() {
        for frame in layout.seg_frames()? {
            if layout.fg_pred(&frame).exists() {
                pairs.push((layout.clone(), frame));
            }
        }
    }
    if pairs.is_empty() {
        return Err(Error::frame("*", "no frame has both a foreground prediction and an annotation"));
    }
    let loaded = ctx.parallel(&pairs, |(layout, frame)| {
        in_frame(frame, Ok((read_gray(&layout.fg_pred(frame))?, read_labels(&layout.seg(frame))?.to_mask())))
    })?;
    let (preds, refs): (Vec<_>, Vec<_>) = loaded.into_iter().unzip();
    let cal = calibrate_tc(&preds, &refs)?;
    let mut csv = String::from("t,jaccard\n");
    for (t, j) in cal.curve.iter().enumerate() {
        csv.push_str(&format!("{t},{j:.6}\n"));
    }
    write_text(&ctx.out.join("calibration.csv"), &csv)?;
    let mut outcome = Outcome::default();
    if let Some(path) = &ctx.config_path {
        write_back(path, "t_c", &cal.t_c.to_string())?;
    } else {
        outcome.warnings.push(format!("kind=config_not_written t_c={}", cal.t_c));
    }
    outcome
        .lines
        .push(format!("t_c={} jaccard={:.6} frames={}", cal.t_c, cal.best_jaccard(), pairs.len()));
    Ok(outcome)
}

/// Segments every predicted frame into `<seq>_RES/maskNNN.tif`, with a
/// deterministic `run_log.jsonl` and wall times in `timing.csv`.
pub fn cmd_segment(ctx: &RunContext) -> Result<Outcome> {
    let params = ctx.config.params_with(resolve_t_c(ctx)?, resolve_d_inf(ctx)?);
    params.validate().map_err(|e| Error::Config(e.to_string()))?;
    let mut outcome = Outcome::default();
    for layout in ctx.layouts() {
        let frames = layout.prediction_frames()?;
        if frames.is_empty() {
            return Err(Error::MissingFile(layout.pred_dir()));
        }
        ensure_dir(&layout.res_dir())?;
        let stats = ctx.parallel(&frames, |frame| {
            in_frame(frame, {
                let start = Instant::now();
                let marker = read_gray(&layout.marker_pred(frame));
                let fg = read_gray(&layout.fg_pred(frame));
                marker.and_then(|m| {
                    let report = segment_image_detailed(&m, &fg?, &params)?;
                    write_labels(&layout.mask(frame), &report.labels)?;
                    Ok((report, start.elapsed()))
                })
            })
        })?;
        let mut log = json!({ "sequence": layout.seq, "params": params_json(&params) }).to_string() + "\n";
        let mut timing = String::from("frame,millis\n");
        for (frame, (report, elapsed)) in frames.iter().zip(&stats) {
            let objects = report.labels.object_count();
            log.push_str(
                &json!({
                    "frame": frame,
                    "markers": report.markers.count(),
                    "dropped_markers": report.dropped_markers,
                    "segments": report.segments,
                    "objects": objects,
                })
                .to_string(),
            );
            log.push('\n');
            timing.push_str(&format!("{frame},{:.3}\n", elapsed.as_secs_f64() * 1000.0));
            if objects == 0 {
                outcome.warnings.push(format!("kind=empty_mask seq={} frame={frame}", layout.seq));
            }
            if report.dropped_markers > 0 {
                outcome.warnings.push(format!(
                    "kind=markers_outside_region seq={} frame={frame} count={}",
                    layout.seq, report.dropped_markers
                ));
            }
        }
        write_text(&layout.res_dir().join("run_log.jsonl"), &log)?;
        write_text(&layout.res_dir().join("timing.csv"), &timing)?;
        let total: usize = stats.iter().map(|(r, _)| r.labels.object_count()).sum();
        outcome
            .lines
            .push(format!("seq={} frames={} objects={total} t_c={} d_inf={}", layout.seq, frames.len(), params.t_c, params.d_inf));
    }
    Ok(outcome)
}

/// Scores `<seq>_RES` masks against the full annotations. Writes
/// `<seq>_eval.json` per sequence and `evaluation.csv` with one row each.
pub fn cmd_evaluate(ctx: &RunContext) -> Result<Outcome> {
    let mut outcome = Outcome::default();
    let mut csv = format!("{}\n", EvalReport::CSV_HEADER);
    for layout in ctx.layouts() {
        let frames = layout.seg_frames()?;
        if frames.is_empty() {
            return Err(Error::MissingFile(layout.seg_dir()));
        }
        let pairs = ctx.parallel(&frames, |frame| {
            in_frame(frame, {
                let truth = read_labels(&layout.seg(frame))?;
                let result = read_labels(&layout.mask(frame))?;
                truth.ensure_same_dims(&result).map(|_| (truth, result))
            })
        })?;
        let report = evaluate_frames(&pairs)?;
        write_text(
            &ctx.out.join(format!("{}_eval.json", layout.seq)),
            &(serde_json::to_string_pretty(&report)? + "\n"),
        )?;
        csv.push_str(&report.csv_row(&layout.seq));
        csv.push('\n');
        outcome.lines.push(format!(
            "seq={} seg={:.6} det={:.6} op_csb={:.6}",
            layout.seq, report.seg, report.det, report.op_csb
        ));
    }
    write_text(&ctx.out.join("evaluation.csv"), &csv)?;
    Ok(outcome)
}

/// Names accepted by [`cmd_experiment`].
pub const EXPERIMENTS: [&str; 3] = ["augmentation", "segfunction", "markertype"];

/// Touching-pair cases used by the segmentation-function experiment.
pub const SEGFUNCTION_CASES: usize = 40;

/// Runs a comparison harness on the annotated frames and writes
/// `experiment_<name>.csv`.
pub fn cmd_experiment(ctx: &RunContext, name: &str) -> Result<Outcome> {
    if !EXPERIMENTS.contains(&name) {
        return Err(Error::Config(format!("unknown experiment `{name}`; expected one of {}", EXPERIMENTS.join(", "))));
    }
    let cfg = &ctx.config;
    let table: ExperimentTable = match name {
        "segfunction" => {
            let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
            let cases = (0..SEGFUNCTION_CASES)
                .map(|i| touching_pair_case(&mut rng, 0.3 + 0.2 * (i % 3) as f64 / 2.0))
                .collect::<Result<Vec<_>>>()?;
            let truths: Vec<LabelMap> = cases.iter().map(|c| c.truth.clone()).collect();
            let params = PipelineParams {
                k: 0.2,
                d_inf: measure_d_inf(&truths)?,
                t_c: 128,
                ..cfg.params_with(128, 1.0)
            };
            segfunction_table(&cases, &params)?
        }
        _ => {
            let truths = load_annotations(ctx)?;
            if truths.is_empty() {
                return Err(Error::MissingFile(ctx.root.join(format!("{}_GT", ctx.sequences[0]))));
            }
            let d_inf = resolve_d_inf(ctx)?;
            let t_c = match cfg.t_c {
                Setting::Fixed(t) => t,
                Setting::FromData => calibrate_on(&truths, &oracle_predictions(&truths, &cfg.oracle, cfg.connectivity, ctx.seed)?)?,
            };
            let params = cfg.params_with(t_c, d_inf);
            if name == "markertype" {
                let mut weak = Vec::new();
                for layout in ctx.layouts() {
                    for frame in layout.seg_frames()? {
                        let path = layout.tra(&frame);
                        if path.exists() {
                            weak.push(read_labels(&path)?);
                        }
                    }
                }
                let weak = (weak.len() == truths.len()).then_some(weak.as_slice());
                markertype_table(&truths, weak, &[0.2, 0.4, 0.6, 0.8], &cfg.oracle, &params, ctx.seed)?
            } else {
                let mut frames = Vec::new();
                for layout in ctx.layouts() {
                    for frame in layout.seg_frames()? {
                        let labels = read_labels(&layout.seg(&frame))?;
                        let image = match read_gray(&layout.image(&frame)) {
                            Ok(img) => img,
                            Err(_) => labels.to_mask().to_gray(),
                        };
                        frames.push((image, labels));
                    }
                }
                augmentation_table(&frames, &cfg.oracle, &params, ctx.seed)?
            }
        }
    };
    let csv = table.to_csv();
    write_text(&ctx.out.join(format!("experiment_{name}.csv")), &csv)?;
    Ok(Outcome {
        lines: csv.lines().map(str::to_string).collect(),
        warnings: Vec::new(),
    })
}

/// Writes synthetic sequences in the challenge layout under `ctx.out`.
pub fn cmd_synth(ctx: &RunContext, spec: &SynthSpec) -> Result<Outcome> {
    let mut outcome = Outcome::default();
    for seq in &ctx.sequences {
        let spec = SynthSpec {
            seed: frame_seed(ctx.seed, seq),
            ..spec.clone()
        };
        let ids = write_synthetic(&ctx.out, seq, &spec)?;
        outcome.lines.push(format!("seq={seq} frames={}", ids.len()));
    }
    Ok(outcome)
}
