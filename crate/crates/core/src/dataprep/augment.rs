use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::raster::{gaussian_blur, mirror_index, GrayImage, LabelMap};

/// Smooth random displacement field settings (Simard-style elastic deformation).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ElasticParams {
    /// Displacement magnitude in pixels.
    pub alpha: f64,
    /// Gaussian smoothing of the raw field in pixels.
    pub sigma: f64,
}

impl Default for ElasticParams {
    fn default() -> Self {
        ElasticParams {
            alpha: 300.0,
            sigma: 12.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AugmentationSpec {
    pub scale_range: (f64, f64),
    /// Draw a uniform rotation angle in `[0, 2π)`.
    pub rotate: bool,
    pub flip_probability: f64,
    pub elastic: Option<ElasticParams>,
    pub seed: u64,
}

impl Default for AugmentationSpec {
    fn default() -> Self {
        AugmentationSpec {
            scale_range: (0.6, 1.4),
            rotate: true,
            flip_probability: 0.5,
            elastic: None,
            seed: 0,
        }
    }
}

impl AugmentationSpec {
    /// A spec that leaves samples untouched.
    pub fn identity() -> Self {
        AugmentationSpec {
            scale_range: (1.0, 1.0),
            rotate: false,
            flip_probability: 0.0,
            elastic: None,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.scale_range;
        if !(lo > 0.0 && hi >= lo && hi.is_finite()) {
            return Err(Error::param("scale_range", format!("({lo}, {hi}) is not a positive interval")));
        }
        if !(0.0..=1.0).contains(&self.flip_probability) {
            return Err(Error::param("flip_probability", "must lie in [0, 1]"));
        }
        if let Some(e) = self.elastic {
            if !(e.sigma > 0.0) {
                return Err(Error::param("elastic.sigma", "must be positive"));
            }
        }
        Ok(())
    }

    pub fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }

    pub fn draw_rigid<R: Rng>(&self, rng: &mut R) -> RigidDraw {
        let (lo, hi) = self.scale_range;
        let scale = if hi > lo { rng.gen_range(lo..hi) } else { lo };
        let angle = if self.rotate {
            rng.gen_range(0.0..std::f64::consts::TAU)
        } else {
            0.0
        };
        let flip = self.flip_probability > 0.0 && rng.gen_bool(self.flip_probability);
        RigidDraw { scale, angle, flip }
    }
}

/// One realized rigid transform.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RigidDraw {
    pub scale: f64,
    /// Counter-clockwise rotation in radians.
    pub angle: f64,
    /// Horizontal flip applied before rotation.
    pub flip: bool,
}

fn snap(v: f64) -> f64 {
    let r = v.round();
    if (v - r).abs() < 1e-6 {
        r
    } else {
        v
    }
}

fn displacement_field<R: Rng>(w: usize, h: usize, params: &ElasticParams, rng: &mut R) -> (GrayImage, GrayImage) {
    let mut raw = || GrayImage::from_fn(w, h, |_, _| rng.gen_range(-1.0f32..=1.0));
    let (rx, ry) = (raw(), raw());
    let scale = |g: GrayImage| gaussian_blur(&g, params.sigma).map(|&v| (v as f64 * params.alpha) as f32);
    (scale(rx), scale(ry))
}

/// Draws a transform from `spec` and applies it to an image and its labels.
pub fn augment<R: Rng>(
    image: &GrayImage,
    labels: &LabelMap,
    spec: &AugmentationSpec,
    rng: &mut R,
) -> Result<(GrayImage, LabelMap)> {
    spec.validate()?;
    let draw = spec.draw_rigid(rng);
    let field = spec
        .elastic
        .map(|e| displacement_field(image.width(), image.height(), &e, rng));
    augment_with(image, labels, &draw, field.as_ref())
}

/// Applies a fixed rigid transform (about the image center) and an optional
/// displacement field. Images are sampled bilinearly, labels by nearest
/// neighbor, and samples falling outside the domain are mirrored back in.
pub fn augment_with(
    image: &GrayImage,
    labels: &LabelMap,
    draw: &RigidDraw,
    field: Option<&(GrayImage, GrayImage)>,
) -> Result<(GrayImage, LabelMap)> {
    image.ensure_same_dims(labels)?;
    if !(draw.scale > 0.0) {
        return Err(Error::param("scale", "must be positive"));
    }
    let (w, h) = image.dims();
    let cx = (w as f64 - 1.0) / 2.0;
    let cy = (h as f64 - 1.0) / 2.0;
    let (sin, cos) = draw.angle.sin_cos();

    let source = |x: usize, y: usize| -> (f64, f64) {
        let (mut ox, mut oy) = (x as f64, y as f64);
        if let Some((fx, fy)) = field {
            ox += fx.get(x, y) as f64;
            oy += fy.get(x, y) as f64;
        }
        let (u, v) = (ox - cx, oy - cy);
        let sx = cx + (cos * u + sin * v) / draw.scale;
        let sy = cy + (-sin * u + cos * v) / draw.scale;
        let sx = if draw.flip { 2.0 * cx - sx } else { sx };
        (snap(sx), snap(sy))
    };

    let sample = |sx: f64, sy: f64| -> f32 {
        let x0 = sx.floor();
        let y0 = sy.floor();
        let (fx, fy) = (sx - x0, sy - y0);
        let at = |dx: isize, dy: isize| {
            image.get(
                mirror_index(x0 as isize + dx, w),
                mirror_index(y0 as isize + dy, h),
            ) as f64
        };
        let mut v = at(0, 0) * (1.0 - fx) * (1.0 - fy);
        if fx > 0.0 {
            v += at(1, 0) * fx * (1.0 - fy);
        }
        if fy > 0.0 {
            v += at(0, 1) * (1.0 - fx) * fy;
        }
        if fx > 0.0 && fy > 0.0 {
            v += at(1, 1) * fx * fy;
        }
        v as f32
    };

    let mut out_img = GrayImage::filled(w, h, 0.0);
    let mut out_lab = LabelMap::filled(w, h, 0);
    for y in 0..h {
        for x in 0..w {
            let (sx, sy) = source(x, y);
            out_img.set(x, y, sample(sx, sy));
            let nx = mirror_index(sx.round() as isize, w);
            let ny = mirror_index(sy.round() as isize, h);
            out_lab.set(x, y, labels.get(nx, ny));
        }
    }
    Ok((out_img, out_lab))
}
