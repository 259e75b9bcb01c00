use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::layout::{ensure_dir, frame_id, SequenceLayout};
use crate::error::{Error, Result};
use crate::io::{write_labels, write_probability};
use crate::morphology::interior_squared_distance;
use crate::raster::{gaussian_blur, largest_component, BinaryMask, Connectivity, GrayImage, LabelMap};

/// Parameters of the synthetic ellipse sequences.
#[derive(Clone, Debug, PartialEq)]
pub struct SynthSpec {
    pub frames: usize,
    pub width: usize,
    pub height: usize,
    pub min_cells: usize,
    pub max_cells: usize,
    /// Semi-axis range in pixels.
    pub semi_axes: (f64, f64),
    /// Chance that a new cell is placed touching an existing one.
    pub touching_probability: f64,
    /// Radius of the disk drawn as the weak (tracking) marker.
    pub marker_radius: f64,
    pub seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec {
            frames: 20,
            width: 160,
            height: 160,
            min_cells: 3,
            max_cells: 15,
            semi_axes: (8.0, 14.0),
            touching_probability: 0.35,
            marker_radius: 3.0,
            seed: 0,
        }
    }
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        if self.frames == 0 {
            return Err(Error::param("frames", "must be positive"));
        }
        if self.min_cells == 0 || self.min_cells > self.max_cells {
            return Err(Error::param("cells", format!("bad range {}..={}", self.min_cells, self.max_cells)));
        }
        let (lo, hi) = self.semi_axes;
        if !(lo >= 3.0 && hi >= lo) {
            return Err(Error::param("semi_axes", format!("bad range {lo}..{hi}")));
        }
        if self.width < 8 * hi as usize || self.height < 8 * hi as usize {
            return Err(Error::param("size", "frame too small for the cell sizes"));
        }
        Ok(())
    }
}

/// One generated frame.
#[derive(Clone, Debug, PartialEq)]
pub struct SynthFrame {
    pub image: GrayImage,
    /// Full annotation.
    pub labels: LabelMap,
    /// Weak annotation: one small disk per cell, around its deepest point.
    pub markers: LabelMap,
    /// Pairs of labels placed touching each other.
    pub touching_pairs: Vec<(u32, u32)>,
}

#[derive(Clone, Copy, Debug)]
struct Ellipse {
    cx: f64,
    cy: f64,
    a: f64,
    b: f64,
    angle: f64,
}

impl Ellipse {
    /// Squared normalized radius; inside when at most 1.
    fn value(&self, x: f64, y: f64) -> f64 {
        let (s, c) = self.angle.sin_cos();
        let (dx, dy) = (x - self.cx, y - self.cy);
        let u = c * dx + s * dy;
        let v = -s * dx + c * dy;
        (u / self.a).powi(2) + (v / self.b).powi(2)
    }

    fn extent(&self) -> f64 {
        self.a.max(self.b)
    }

    fn random<R: Rng>(rng: &mut R, spec: &SynthSpec, cx: f64, cy: f64) -> Ellipse {
        let (lo, hi) = spec.semi_axes;
        let a = rng.gen_range(lo..=hi);
        let b = rng.gen_range(lo..=a.min(hi));
        Ellipse {
            cx,
            cy,
            a,
            b,
            angle: rng.gen_range(0.0..std::f64::consts::PI),
        }
    }
}

/// Renders ellipses; a pixel inside several goes to the one with the smallest
/// normalized radius. Returns labels `1..=n` in ellipse order.
fn render(ellipses: &[Ellipse], w: usize, h: usize) -> LabelMap {
    LabelMap::from_fn(w, h, |x, y| {
        let mut best = (1.0, 0u32);
        for (i, e) in ellipses.iter().enumerate() {
            let v = e.value(x as f64, y as f64);
            if v <= best.0 {
                best = (v, i as u32 + 1);
            }
        }
        best.1
    })
}

const GAP: f64 = 4.0;
const MIN_AREA: usize = 120;

fn inside_frame(e: &Ellipse, w: usize, h: usize) -> bool {
    let m = e.extent() + 3.0;
    e.cx >= m && e.cy >= m && e.cx <= w as f64 - 1.0 - m && e.cy <= h as f64 - 1.0 - m
}

/// Bounding-circle clearance between two ellipses.
fn clear_of(e: &Ellipse, other: &Ellipse) -> bool {
    ((e.cx - other.cx).powi(2) + (e.cy - other.cy).powi(2)).sqrt() > e.extent() + other.extent() + GAP
}

fn place<R: Rng>(rng: &mut R, spec: &SynthSpec, n: usize) -> (Vec<Ellipse>, Vec<(u32, u32)>) {
    let (w, h) = (spec.width, spec.height);
    let mut cells: Vec<Ellipse> = Vec::new();
    // index of the partner for touching cells
    let mut partner: Vec<Option<usize>> = Vec::new();
    let mut attempts = 0;
    while cells.len() < n && attempts < 2000 {
        attempts += 1;
        let free: Vec<usize> = (0..cells.len()).filter(|&i| partner[i].is_none()).collect();
        let touching = !free.is_empty() && rng.gen_bool(spec.touching_probability);
        let candidate = if touching {
            let j = free[rng.gen_range(0..free.len())];
            let base = cells[j];
            let mut e = Ellipse::random(rng, spec, 0.0, 0.0);
            let dir = rng.gen_range(0.0..std::f64::consts::TAU);
            // each ellipse contains the disk of its minor semi-axis, so this overlaps
            let dist = (base.b + e.b) * rng.gen_range(0.75..0.95);
            e.cx = base.cx + dist * dir.cos();
            e.cy = base.cy + dist * dir.sin();
            (e, Some(j))
        } else {
            let lo = spec.semi_axes.0;
            let cx = rng.gen_range(lo..w as f64 - lo);
            let cy = rng.gen_range(lo..h as f64 - lo);
            (Ellipse::random(rng, spec, cx, cy), None)
        };
        let (e, with) = candidate;
        if !inside_frame(&e, w, h) {
            continue;
        }
        let ok = cells.iter().enumerate().all(|(i, c)| {
            if Some(i) == with {
                return true;
            }
            // keep away from the partner's partner too
            clear_of(&e, c)
        });
        if !ok {
            continue;
        }
        if let Some(j) = with {
            partner[j] = Some(cells.len());
        }
        partner.push(with);
        cells.push(e);
    }
    let pairs = partner
        .iter()
        .enumerate()
        .filter_map(|(i, p)| p.filter(|&j| j < i).map(|j| (j as u32 + 1, i as u32 + 1)))
        .collect();
    (cells, pairs)
}

/// Keeps the largest connected piece of every label.
fn tidy(labels: &LabelMap) -> LabelMap {
    let mut out = LabelMap::filled(labels.width(), labels.height(), 0);
    for l in labels.labels() {
        let piece = largest_component(&labels.mask_of(l), Connectivity::Four);
        for (o, &p) in out.data_mut().iter_mut().zip(piece.data()) {
            if p {
                *o = l;
            }
        }
    }
    out
}

fn weak_markers(labels: &LabelMap, radius: f64) -> LabelMap {
    let mut out = LabelMap::filled(labels.width(), labels.height(), 0);
    for l in labels.labels() {
        let cell = labels.mask_of(l);
        let depth = interior_squared_distance(&cell);
        let (mut best, mut at) = (-1.0, 0);
        for (i, &d) in depth.iter().enumerate() {
            if d > best {
                best = d;
                at = i;
            }
        }
        let (cx, cy) = ((at % labels.width()) as f64, (at / labels.width()) as f64);
        for (i, o) in out.data_mut().iter_mut().enumerate() {
            let (x, y) = ((i % labels.width()) as f64, (i / labels.width()) as f64);
            if cell.data()[i] && (x - cx).powi(2) + (y - cy).powi(2) <= radius * radius {
                *o = l;
            }
        }
    }
    out
}

fn texture<R: Rng>(labels: &LabelMap, rng: &mut R) -> GrayImage {
    let (w, h) = labels.dims();
    // bright cells with darker rims on a dim noisy background
    let raw = GrayImage::from_fn(w, h, |x, y| {
        let l = labels.get(x, y);
        let base = if l == 0 {
            0.2
        } else {
            let rim = crate::raster::Connectivity::Four.offsets().iter().any(|&(dx, dy)| {
                let (nx, ny) = (x as isize + dx, y as isize + dy);
                nx < 0 || ny < 0 || nx >= w as isize || ny >= h as isize || labels.get(nx as usize, ny as usize) != l
            });
            if rim {
                0.35
            } else {
                0.65
            }
        };
        base + rng.gen_range(-0.08f32..0.08)
    });
    gaussian_blur(&raw, 1.0).map(|&v| v.clamp(0.0, 1.0))
}

/// Generates one frame; regenerates internally until every cell is large enough.
pub fn synth_frame<R: Rng>(spec: &SynthSpec, rng: &mut R) -> Result<SynthFrame> {
    spec.validate()?;
    for _ in 0..100 {
        let n = rng.gen_range(spec.min_cells..=spec.max_cells);
        let (cells, touching_pairs) = place(rng, spec, n);
        if cells.len() < spec.min_cells {
            continue;
        }
        let labels = tidy(&render(&cells, spec.width, spec.height));
        let areas = labels.areas();
        if labels.object_count() != cells.len() || areas[1..].iter().any(|&a| a < MIN_AREA) {
            continue;
        }
        let markers = weak_markers(&labels, spec.marker_radius);
        let image = texture(&labels, rng);
        return Ok(SynthFrame {
            image,
            labels,
            markers,
            touching_pairs,
        });
    }
    Err(Error::param("spec", "could not place cells; enlarge the frame or shrink the cells"))
}

/// Generates `spec.frames` frames from `spec.seed`.
pub fn synth_sequence(spec: &SynthSpec) -> Result<Vec<SynthFrame>> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    (0..spec.frames).map(|_| synth_frame(spec, &mut rng)).collect()
}

/// Writes a synthetic sequence in the challenge layout under `root`.
/// Returns the frame ids.
pub fn write_synthetic(root: &Path, seq: &str, spec: &SynthSpec) -> Result<Vec<String>> {
    let layout = SequenceLayout::new(root, root, seq);
    for dir in [layout.images_dir(), layout.seg_dir(), layout.tra_dir()] {
        ensure_dir(&dir)?;
    }
    let frames = synth_sequence(spec)?;
    let mut ids = Vec::new();
    for (i, f) in frames.iter().enumerate() {
        let id = frame_id(i, frames.len());
        write_probability(&layout.image(&id), &f.image)?;
        write_labels(&layout.seg(&id), &f.labels)?;
        write_labels(&layout.tra(&id), &f.markers)?;
        ids.push(id);
    }
    Ok(ids)
}

/// A touching pair whose marker prediction sits off-center, together with the
/// foreground prediction of a detector that dims the shared boundary.
#[derive(Clone, Debug)]
pub struct TouchingPairCase {
    pub truth: LabelMap,
    pub marker_pred: GrayImage,
    pub fg_pred: GrayImage,
}

/// Builds a touching-pair case. Each marker is a radius-3 disk whose center is
/// moved from the ellipse center by `offset` times the minor semi-axis in a
/// random direction.
pub fn touching_pair_case<R: Rng>(rng: &mut R, offset: f64) -> Result<TouchingPairCase> {
    let spec = SynthSpec {
        width: 96,
        height: 96,
        semi_axes: (10.0, 16.0),
        ..SynthSpec::default()
    };
    for _ in 0..200 {
        let (cx, cy) = (48.0 + rng.gen_range(-4.0..4.0), 48.0 + rng.gen_range(-4.0..4.0));
        let first = Ellipse::random(rng, &spec, cx, cy);
        let mut second = Ellipse::random(rng, &spec, 0.0, 0.0);
        let dir = rng.gen_range(0.0..std::f64::consts::TAU);
        let dist = (first.a.min(first.b) + second.a.min(second.b)) * rng.gen_range(0.9..1.1);
        second.cx = first.cx + dist * dir.cos();
        second.cy = first.cy + dist * dir.sin();
        if !inside_frame(&second, spec.width, spec.height) || !inside_frame(&first, spec.width, spec.height) {
            continue;
        }
        let truth = tidy(&render(&[first, second], spec.width, spec.height));
        let areas = truth.areas();
        if truth.object_count() != 2 || areas[1..].iter().any(|&a| a < MIN_AREA) || !labels_touch(&truth, 1, 2) {
            continue;
        }
        let centers = [(first.cx, first.cy), (second.cx, second.cy)];
        let mut marker = BinaryMask::filled(spec.width, spec.height, false);
        for (i, &(cx, cy)) in centers.iter().enumerate() {
            let e = if i == 0 { first } else { second };
            let shift = offset * e.b;
            let dir = rng.gen_range(0.0..std::f64::consts::TAU);
            let (mx, my) = (cx + shift * dir.cos(), cy + shift * dir.sin());
            let cell = truth.mask_of(i as u32 + 1);
            for (j, m) in marker.data_mut().iter_mut().enumerate() {
                let (x, y) = ((j % spec.width) as f64, (j / spec.width) as f64);
                if cell.data()[j] && (x - mx).powi(2) + (y - my).powi(2) <= 9.0 {
                    *m = true;
                }
            }
        }
        // foreground with the shared boundary zeroed before blurring
        let fg = GrayImage::from_fn(spec.width, spec.height, |x, y| {
            let l = truth.get(x, y);
            let boundary = Connectivity::Eight.offsets().iter().any(|&(dx, dy)| {
                let (nx, ny) = (x as isize + dx, y as isize + dy);
                nx >= 0
                    && ny >= 0
                    && (nx as usize) < spec.width
                    && (ny as usize) < spec.height
                    && {
                        let o = truth.get(nx as usize, ny as usize);
                        o != 0 && o != l
                    }
            });
            if l > 0 && !boundary {
                1.0
            } else {
                0.0
            }
        });
        return Ok(TouchingPairCase {
            truth,
            marker_pred: gaussian_blur(&marker.to_gray(), 1.0).map(|&v| v.clamp(0.0, 1.0)),
            fg_pred: gaussian_blur(&fg, 1.5).map(|&v| v.clamp(0.0, 1.0)),
        });
    }
    Err(Error::param("offset", "could not build a touching pair"))
}

fn labels_touch(labels: &LabelMap, a: u32, b: u32) -> bool {
    let (w, h) = labels.dims();
    (0..h).any(|y| {
        (0..w).any(|x| {
            labels.get(x, y) == a
                && Connectivity::Four.offsets().iter().any(|&(dx, dy)| {
                    let (nx, ny) = (x as isize + dx, y as isize + dy);
                    nx >= 0 && ny >= 0 && (nx as usize) < w && (ny as usize) < h && labels.get(nx as usize, ny as usize) == b
                })
        })
    })
}
