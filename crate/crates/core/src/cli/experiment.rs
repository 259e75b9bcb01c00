use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::oracle::{frame_seed, oracle_predict, OraclePredictorSpec};
use super::synth::TouchingPairCase;
use crate::dataprep::{augment, markers_from_weak, AugmentationSpec, ElasticParams, FullAnnotation, WeakAnnotation};
use crate::error::{Error, Result};
use crate::markerseg::{calibrate_tc, remove_border_cells, cell_region_mask, distance_baseline, extract_markers, segment_image, segmentation_function, watershed, PipelineParams};
use crate::metrics::{evaluate_frames, seg_measure, EvalReport};
use crate::morphology::max_inscribed_diameter;
use crate::raster::{connected_components, gaussian_blur, Connectivity, GrayImage, LabelMap};

/// A small CSV-shaped result table.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl ExperimentTable {
    fn new(header: &[&str]) -> Self {
        ExperimentTable {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.header.join(",");
        s.push('\n');
        for row in &self.rows {
            s.push_str(&row.join(","));
            s.push('\n');
        }
        s
    }
}

fn fmt(v: f64) -> String {
    format!("{v:.6}")
}

/// Smallest maximal inscribed diameter over all cells of all annotations.
pub fn measure_d_inf(annotations: &[LabelMap]) -> Result<f64> {
    let mut d_inf = f64::INFINITY;
    for labels in annotations {
        let boxes = labels.bounding_boxes();
        for l in labels.labels() {
            let (x0, y0, x1, y1) = boxes[l as usize].expect("label present");
            let cell = labels.crop(x0, y0, x1 - x0 + 1, y1 - y0 + 1)?.map(|&v| v == l);
            d_inf = d_inf.min(max_inscribed_diameter(&cell)?);
        }
    }
    if d_inf.is_finite() {
        Ok(d_inf)
    } else {
        Err(Error::Empty("training cells"))
    }
}

/// Oracle predictions for every annotation, with per-frame seeds.
pub fn oracle_predictions(
    truths: &[LabelMap],
    spec: &OraclePredictorSpec,
    connectivity: Connectivity,
    seed: u64,
) -> Result<Vec<(GrayImage, GrayImage)>> {
    truths
        .iter()
        .enumerate()
        .map(|(i, t)| {
            let mut rng = ChaCha8Rng::seed_from_u64(frame_seed(seed, &i.to_string()));
            oracle_predict(&FullAnnotation(t.clone()), spec, connectivity, &mut rng)
        })
        .collect()
}

/// `t_c` calibrated on foreground predictions against their annotations.
pub fn calibrate_on(truths: &[LabelMap], preds: &[(GrayImage, GrayImage)]) -> Result<u8> {
    let fg: Vec<GrayImage> = preds.iter().map(|(_, f)| f.clone()).collect();
    let refs: Vec<_> = truths.iter().map(|t| t.to_mask()).collect();
    Ok(calibrate_tc(&fg, &refs)?.t_c)
}

/// Segments oracle predictions of every annotation and scores them.
pub fn oracle_pipeline(
    truths: &[LabelMap],
    spec: &OraclePredictorSpec,
    params: &PipelineParams,
    seed: u64,
) -> Result<EvalReport> {
    let preds = oracle_predictions(truths, spec, params.connectivity, seed)?;
    let mut pairs = Vec::new();
    for (t, (m, f)) in truths.iter().zip(&preds) {
        pairs.push((t.clone(), segment_image(m, f, params)?));
    }
    evaluate_frames(&pairs)
}

/// SEG of the watershed and of the nearest-marker baseline on one case, using
/// the same markers and cell region for both.
pub fn compare_segmentation_functions(case: &TouchingPairCase, params: &PipelineParams) -> Result<(f64, f64)> {
    let markers = extract_markers(&case.marker_pred, params.marker_diameter(), params.t_m, params.h, params.connectivity)?;
    let region = cell_region_mask(&case.fg_pred, params.t_c)?;
    let relief = segmentation_function(&case.fg_pred)?;
    let flooded = watershed(&markers, &relief, &region, params.connectivity)?;
    let nearest = distance_baseline(&markers, &region)?;
    Ok((
        seg_measure(&case.truth, &flooded)?.seg,
        seg_measure(&case.truth, &nearest)?.seg,
    ))
}

/// Watershed versus distance baseline over a suite of cases.
pub fn segfunction_table(cases: &[TouchingPairCase], params: &PipelineParams) -> Result<ExperimentTable> {
    let mut table = ExperimentTable::new(&["case", "seg_baseline", "seg_watershed", "diff"]);
    let (mut sb, mut sw) = (0.0, 0.0);
    for (i, case) in cases.iter().enumerate() {
        let (w, b) = compare_segmentation_functions(case, params)?;
        sb += b;
        sw += w;
        table.rows.push(vec![i.to_string(), fmt(b), fmt(w), fmt(w - b)]);
    }
    let n = cases.len().max(1) as f64;
    table
        .rows
        .push(vec!["mean".into(), fmt(sb / n), fmt(sw / n), fmt((sw - sb) / n)]);
    Ok(table)
}

/// DET for markers of several sizes `k` (the same ratio shapes the marker
/// targets and the opening) and for markers derived from weak annotations.
pub fn markertype_table(
    truths: &[LabelMap],
    weak: Option<&[LabelMap]>,
    ks: &[f64],
    spec: &OraclePredictorSpec,
    params: &PipelineParams,
    seed: u64,
) -> Result<ExperimentTable> {
    let mut table = ExperimentTable::new(&["markers", "k", "det", "seg"]);
    for &k in ks {
        let spec = OraclePredictorSpec { k, ..*spec };
        let params = PipelineParams { k, ..params.clone() };
        let report = oracle_pipeline(truths, &spec, &params, seed)?;
        table.rows.push(vec!["full".into(), k.to_string(), fmt(report.det), fmt(report.seg)]);
    }
    if let Some(weak) = weak {
        let preds = oracle_predictions(truths, spec, params.connectivity, seed)?;
        let markers = weak
            .iter()
            .map(|w| markers_from_weak(&WeakAnnotation(w.clone()), params.connectivity))
            .collect::<Result<Vec<_>>>()?;
        // annotated markers are smaller than cells, so the opening is sized
        // from the markers themselves
        let params = PipelineParams {
            d_inf: measure_d_inf(&markers)?,
            ..params.clone()
        };
        let mut pairs = Vec::new();
        for ((t, m), (_, fg)) in truths.iter().zip(&markers).zip(&preds) {
            let marker_pred = gaussian_blur(&m.to_mask().to_gray(), spec.sigma).map(|&v| v.clamp(0.0, 1.0));
            pairs.push((t.clone(), segment_image(&marker_pred, fg, &params)?));
        }
        let report = evaluate_frames(&pairs)?;
        table.rows.push(vec!["weak".into(), "-".into(), fmt(report.det), fmt(report.seg)]);
    }
    Ok(table)
}

/// Relabels every connected piece of every label as its own object.
fn split_pieces(labels: &LabelMap, connectivity: Connectivity) -> LabelMap {
    let mut out = LabelMap::filled(labels.width(), labels.height(), 0);
    let mut next = 0;
    for l in labels.labels() {
        let pieces = connected_components(&labels.mask_of(l), connectivity);
        for (o, &p) in out.data_mut().iter_mut().zip(pieces.data()) {
            if p > 0 {
                *o = next + p;
            }
        }
        next += pieces.max_label();
    }
    out
}

/// The four augmentation settings compared by the augmentation experiment.
pub const AUGMENTATIONS: [&str; 4] = ["none", "ED", "ED+RTS", "RTS"];

fn augmentation_spec(name: &str, seed: u64) -> AugmentationSpec {
    let rigid = name.contains("RTS");
    let elastic = name.contains("ED");
    let base = if rigid {
        AugmentationSpec::default()
    } else {
        AugmentationSpec::identity()
    };
    AugmentationSpec {
        elastic: elastic.then(ElasticParams::default),
        seed,
        ..base
    }
}

/// Oracle pipeline scores on augmented copies of the annotated frames, one row
/// per augmentation setting. Mirrored sampling can duplicate cells near the
/// border, so augmented labels are split into connected pieces and cells on
/// the border are dropped before scoring. `d_inf` is re-measured per setting.
pub fn augmentation_table(
    frames: &[(GrayImage, LabelMap)],
    spec: &OraclePredictorSpec,
    params: &PipelineParams,
    seed: u64,
) -> Result<ExperimentTable> {
    let mut table = ExperimentTable::new(&["augmentation", "seg", "det", "op_csb"]);
    for name in AUGMENTATIONS {
        let mut truths = Vec::new();
        for (i, (image, labels)) in frames.iter().enumerate() {
            let aug = augmentation_spec(name, frame_seed(seed, &format!("{name}/{i}")));
            let mut rng = aug.rng();
            let (_, labels) = augment(image, labels, &aug, &mut rng)?;
            let labels = remove_border_cells(&split_pieces(&labels, params.connectivity));
            if labels.max_label() > 0 {
                truths.push(labels);
            }
        }
        let params = PipelineParams {
            d_inf: measure_d_inf(&truths)?,
            ..params.clone()
        };
        let report = oracle_pipeline(&truths, spec, &params, seed)?;
        table
            .rows
            .push(vec![name.into(), fmt(report.seg), fmt(report.det), fmt(report.op_csb)]);
    }
    Ok(table)
}
