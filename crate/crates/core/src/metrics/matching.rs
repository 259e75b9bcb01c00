use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::raster::{BinaryMask, LabelMap};

/// `|R ∩ S| / |R ∪ S|` for a nonempty reference set `R`.
pub fn jaccard(reference: &BinaryMask, segment: &BinaryMask) -> Result<f64> {
    reference.ensure_same_dims(segment)?;
    let (mut inter, mut union) = (0usize, 0usize);
    for (&r, &s) in reference.data().iter().zip(segment.data()) {
        inter += (r && s) as usize;
        union += (r || s) as usize;
    }
    if !reference.data().iter().any(|&r| r) {
        return Err(Error::Empty("reference region"));
    }
    Ok(inter as f64 / union as f64)
}

/// Outcome for one reference object.
#[derive(Clone, Debug, PartialEq)]
pub struct RegionMatch {
    pub label: u32,
    pub area: usize,
    /// Segment covering more than half of the reference, if any.
    pub segment: Option<u32>,
    /// Jaccard index with the matched segment, 0 without a match.
    pub jaccard: f64,
}

/// Majority-overlap matching between the objects of one reference frame and
/// one segmentation frame.
#[derive(Clone, Debug, PartialEq)]
pub struct MatchTable {
    /// One entry per reference label, ascending.
    pub references: Vec<RegionMatch>,
    /// Segment label to the reference labels it matches, for every segment.
    pub segments: BTreeMap<u32, Vec<u32>>,
}

impl MatchTable {
    pub fn build(refs: &LabelMap, segs: &LabelMap) -> Result<MatchTable> {
        refs.ensure_same_dims(segs)?;
        let ref_areas = refs.areas();
        let seg_areas = segs.areas();
        let mut overlap: BTreeMap<(u32, u32), usize> = BTreeMap::new();
        for (&r, &s) in refs.data().iter().zip(segs.data()) {
            if r > 0 && s > 0 {
                *overlap.entry((r, s)).or_default() += 1;
            }
        }
        let mut segments: BTreeMap<u32, Vec<u32>> = segs.labels().into_iter().map(|s| (s, Vec::new())).collect();
        let mut references = Vec::new();
        for r in refs.labels() {
            let area = ref_areas[r as usize];
            let hit = overlap
                .range((r, 0)..=(r, u32::MAX))
                .find(|&(_, &n)| 2 * n > area)
                .map(|(&(_, s), &n)| (s, n));
            let (segment, jaccard) = match hit {
                Some((s, n)) => {
                    segments.get_mut(&s).expect("overlapping segment is listed").push(r);
                    (Some(s), n as f64 / (area + seg_areas[s as usize] - n) as f64)
                }
                None => (None, 0.0),
            };
            references.push(RegionMatch {
                label: r,
                area,
                segment,
                jaccard,
            });
        }
        Ok(MatchTable { references, segments })
    }
}
