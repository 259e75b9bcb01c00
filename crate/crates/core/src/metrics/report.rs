use serde::{Deserialize, Serialize};

use super::MatchTable;
use crate::error::{Error, Result};
use crate::raster::LabelMap;

const MISS_WEIGHT: f64 = 10.0;
const SPURIOUS_WEIGHT: f64 = 1.0;
const SPLIT_WEIGHT: f64 = 5.0;

/// Detection error counts.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DetEvents {
    /// Reference objects matched by no segment.
    #[serde(rename = "fn")]
    pub missed: usize,
    /// Segments matching no reference object.
    #[serde(rename = "fp")]
    pub spurious: usize,
    /// Extra references claimed by segments that match several.
    #[serde(rename = "ns")]
    pub splits: usize,
}

impl DetEvents {
    pub fn cost(&self) -> f64 {
        MISS_WEIGHT * self.missed as f64 + SPURIOUS_WEIGHT * self.spurious as f64 + SPLIT_WEIGHT * self.splits as f64
    }

    fn from_table(table: &MatchTable) -> DetEvents {
        DetEvents {
            missed: table.references.iter().filter(|m| m.segment.is_none()).count(),
            spurious: table.segments.values().filter(|v| v.is_empty()).count(),
            splits: table.segments.values().map(|v| v.len().saturating_sub(1)).sum(),
        }
    }

    fn add(&mut self, other: DetEvents) {
        self.missed += other.missed;
        self.spurious += other.spurious;
        self.splits += other.splits;
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SegScore {
    pub seg: f64,
    pub per_region_jaccard: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DetScore {
    pub det: f64,
    pub events: DetEvents,
}

/// Mean Jaccard index over reference objects, 0 for unmatched ones.
pub fn seg_measure(refs: &LabelMap, segs: &LabelMap) -> Result<SegScore> {
    let report = evaluate_frames(&[(refs.clone(), segs.clone())])?;
    Ok(SegScore {
        seg: report.seg,
        per_region_jaccard: report.per_region_jaccard,
    })
}

/// `max(0, 1 - cost / (10 · #references))` with cost weights 10 per missed
/// reference, 1 per spurious segment and 5 per extra reference in a merged segment.
pub fn det_measure(refs: &LabelMap, segs: &LabelMap) -> Result<DetScore> {
    let report = evaluate_frames(&[(refs.clone(), segs.clone())])?;
    Ok(DetScore {
        det: report.det,
        events: report.det_event_counts,
    })
}

pub fn op_csb(seg: f64, det: f64) -> f64 {
    (seg + det) / 2.0
}

/// Scores of a whole sequence. SEG averages over all reference objects of all
/// frames and DET normalizes the summed cost by all reference objects.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub seg: f64,
    pub det: f64,
    pub op_csb: f64,
    pub frames: usize,
    pub reference_objects: usize,
    pub per_region_jaccard: Vec<f64>,
    pub det_event_counts: DetEvents,
}

impl EvalReport {
    pub fn from_tables(tables: &[MatchTable]) -> Result<EvalReport> {
        let mut per_region_jaccard = Vec::new();
        let mut events = DetEvents::default();
        for t in tables {
            per_region_jaccard.extend(t.references.iter().map(|m| m.jaccard));
            events.add(DetEvents::from_table(t));
        }
        let n = per_region_jaccard.len();
        if n == 0 {
            return Err(Error::Empty("reference objects"));
        }
        let seg = per_region_jaccard.iter().sum::<f64>() / n as f64;
        let det = (1.0 - events.cost() / (MISS_WEIGHT * n as f64)).max(0.0);
        Ok(EvalReport {
            seg,
            det,
            op_csb: op_csb(seg, det),
            frames: tables.len(),
            reference_objects: n,
            per_region_jaccard,
            det_event_counts: events,
        })
    }

    /// One-line CSV summary; see [`EvalReport::CSV_HEADER`].
    pub fn csv_row(&self, sequence: &str) -> String {
        format!(
            "{sequence},{:.6},{:.6},{:.6},{},{},{},{},{}",
            self.seg,
            self.det,
            self.op_csb,
            self.frames,
            self.reference_objects,
            self.det_event_counts.missed,
            self.det_event_counts.spurious,
            self.det_event_counts.splits
        )
    }

    pub const CSV_HEADER: &'static str = "sequence,seg,det,op_csb,frames,reference_objects,fn,fp,ns";
}

/// Evaluates `(reference, result)` pairs as one sequence.
pub fn evaluate_frames(pairs: &[(LabelMap, LabelMap)]) -> Result<EvalReport> {
    let tables = pairs
        .iter()
        .map(|(r, s)| MatchTable::build(r, s))
        .collect::<Result<Vec<_>>>()?;
    EvalReport::from_tables(&tables)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// AOGM-D cost counted from scratch: every (reference, segment) pair is
    /// tested by rescanning the pixels, then events are tallied per object.
    fn aogm_oracle(refs: &LabelMap, segs: &LabelMap) -> (f64, f64) {
        let rl = refs.labels();
        let sl = segs.labels();
        let count = |pred: &dyn Fn(u32, u32) -> bool| refs.data().iter().zip(segs.data()).filter(|&(&a, &b)| pred(a, b)).count();
        let matched = |r: u32, s: u32| {
            let inter = count(&|a, b| a == r && b == s);
            let area = count(&|a, _| a == r);
            2 * inter > area
        };
        let mut cost = 0.0;
        for &r in &rl {
            if !sl.iter().any(|&s| matched(r, s)) {
                cost += 10.0;
            }
        }
        for &s in &sl {
            let m = rl.iter().filter(|&&r| matched(r, s)).count();
            if m == 0 {
                cost += 1.0;
            } else {
                cost += 5.0 * (m - 1) as f64;
            }
        }
        let normalizer = 10.0 * rl.len() as f64;
        (cost, (1.0 - cost / normalizer).max(0.0))
    }

    /// Ten 3x3 squares on a 40x10 grid.
    fn ten_refs() -> LabelMap {
        LabelMap::from_fn(40, 10, |x, y| {
            if x % 4 < 3 && (2..5).contains(&y) {
                (x / 4) as u32 + 1
            } else {
                0
            }
        })
    }

    #[test]
    fn det_fixtures() {
        let refs = ten_refs();
        let perfect = det_measure(&refs, &refs).unwrap();
        assert_eq!(perfect.det, 1.0);
        assert_eq!(perfect.events, DetEvents::default());

        let missed = refs.map(|&l| if l == 4 { 0 } else { l });
        let one_fn = det_measure(&refs, &missed).unwrap();
        assert_eq!(one_fn.events.missed, 1);
        assert_eq!(one_fn.det, aogm_oracle(&refs, &missed).1);
        assert!((one_fn.det - 0.9).abs() < 1e-12);

        let mut extra = refs.clone();
        extra.set(5, 8, 11);
        let one_fp = det_measure(&refs, &extra).unwrap();
        assert_eq!(one_fp.events.spurious, 1);
        assert_eq!(one_fp.det, aogm_oracle(&refs, &extra).1);
        assert!((one_fp.det - 0.99).abs() < 1e-12);
    }

    #[test]
    fn merged_segment_costs_five_per_extra_reference() {
        let refs = ten_refs();
        let merged = refs.map(|&l| if l == 2 || l == 3 { 2 } else { l });
        let score = det_measure(&refs, &merged).unwrap();
        assert_eq!(score.events, DetEvents { missed: 0, spurious: 0, splits: 1 });
        assert!((score.det - 0.95).abs() < 1e-12);
        let all = refs.map(|&l| u32::from(l > 0));
        let score = det_measure(&refs, &all).unwrap();
        assert_eq!(score.events.splits, 9);
        assert!((score.det - 0.55).abs() < 1e-12);
    }

    #[test]
    fn seg_fixtures() {
        let refs = ten_refs();
        assert_eq!(seg_measure(&refs, &refs).unwrap().seg, 1.0);

        let two = LabelMap::from_fn(20, 1, |x, _| if x < 10 { 1 } else { 2 });
        let half_cover = LabelMap::from_fn(20, 1, |x, _| u32::from(x < 10));
        assert_eq!(seg_measure(&two, &half_cover).unwrap().seg, 0.5);

        let r = LabelMap::from_fn(200, 1, |x, _| u32::from(x < 100));
        let s = LabelMap::from_fn(200, 1, |x, _| u32::from((40..120).contains(&x)));
        let score = seg_measure(&r, &s).unwrap();
        assert_eq!(score.seg, 0.5);
        assert_eq!(score.per_region_jaccard, vec![0.5]);

        assert!(matches!(
            seg_measure(&LabelMap::filled(4, 1, 0), &LabelMap::filled(4, 1, 1)),
            Err(Error::Empty(_))
        ));
    }

    #[test]
    fn op_csb_table_rows() {
        assert_eq!(op_csb(1.0, 1.0), 1.0);
        assert!((op_csb(0.863, 0.961) - 0.912).abs() < 5e-4);
        assert!((op_csb(0.715, 0.967) - 0.841).abs() < 5e-4);
    }

    #[test]
    fn det_floor_and_deletion_steps() {
        let refs = ten_refs();
        let mut segs = refs.clone();
        let mut last = 0.0;
        for l in 1..=10 {
            segs = segs.map(|&v| if v == l { 0 } else { v });
            let cost = det_measure(&refs, &segs).unwrap().events.cost();
            assert_eq!(cost - last, 10.0);
            last = cost;
        }
        let junk = LabelMap::from_fn(40, 10, |x, y| if y == 9 { x as u32 + 1 } else { 0 });
        assert_eq!(det_measure(&refs, &junk).unwrap().det, 0.0);
    }

    #[test]
    fn pooled_over_frames() {
        let refs = ten_refs();
        let missed = refs.map(|&l| if l <= 2 { 0 } else { l });
        let report = evaluate_frames(&[(refs.clone(), refs.clone()), (refs.clone(), missed)]).unwrap();
        assert_eq!(report.reference_objects, 20);
        assert!((report.seg - 18.0 / 20.0).abs() < 1e-12);
        assert!((report.det - 0.9).abs() < 1e-12);
        assert_eq!(report.op_csb, op_csb(report.seg, report.det));
    }

    #[test]
    fn report_json_round_trip() {
        let refs = ten_refs();
        let report = evaluate_frames(&[(refs.clone(), refs.map(|&l| l % 7))]).unwrap();
        let text = serde_json::to_string(&report).unwrap();
        assert!(text.contains("\"fn\":"));
        let back: EvalReport = serde_json::from_str(&text).unwrap();
        assert_eq!(back, report);
        assert_eq!(serde_json::to_string(&back).unwrap(), text);
    }

    fn permuted(map: &LabelMap, shift: u32) -> LabelMap {
        let max = map.max_label().max(1);
        map.map(|&l| if l == 0 { 0 } else { (l - 1 + shift) % max + 1 })
    }

    proptest! {
        #[test]
        fn det_matches_event_oracle(
            r in prop::collection::vec(0u32..6, 100),
            s in prop::collection::vec(0u32..7, 100),
        ) {
            let refs = LabelMap::new(10, 10, r).unwrap();
            let segs = LabelMap::new(10, 10, s).unwrap();
            prop_assume!(refs.max_label() > 0);
            let got = det_measure(&refs, &segs).unwrap();
            let (cost, det) = aogm_oracle(&refs, &segs);
            prop_assert_eq!(got.events.cost(), cost);
            prop_assert_eq!(got.det, det);
        }

        #[test]
        fn invariant_under_relabeling(
            r in prop::collection::vec(0u32..6, 100),
            s in prop::collection::vec(0u32..7, 100),
            a in 0u32..6,
            b in 0u32..7,
        ) {
            let refs = LabelMap::new(10, 10, r).unwrap();
            let segs = LabelMap::new(10, 10, s).unwrap();
            prop_assume!(refs.max_label() > 0);
            let x = evaluate_frames(&[(refs.clone(), segs.clone())]).unwrap();
            let y = evaluate_frames(&[(permuted(&refs, a), permuted(&segs, b))]).unwrap();
            prop_assert!((x.seg - y.seg).abs() < 1e-12);
            prop_assert_eq!(x.det, y.det);
        }
    }
}
