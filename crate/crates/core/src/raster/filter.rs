use super::{mirror_index, GrayImage};

/// Separable Gaussian blur with mirrored borders. The kernel spans `ceil(3σ)`
/// pixels on each side; `sigma <= 0` returns the input unchanged.
pub fn gaussian_blur(img: &GrayImage, sigma: f64) -> GrayImage {
    if sigma <= 0.0 || img.is_empty() {
        return img.clone();
    }
    let radius = (3.0 * sigma).ceil() as isize;
    let mut kernel: Vec<f64> = (-radius..=radius)
        .map(|i| (-(i * i) as f64 / (2.0 * sigma * sigma)).exp())
        .collect();
    let total: f64 = kernel.iter().sum();
    kernel.iter_mut().for_each(|k| *k /= total);

    let (w, h) = img.dims();
    let src = img.data();
    let mut tmp = vec![0f64; w * h];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for (k, i) in kernel.iter().zip(-radius..=radius) {
                acc += k * src[y * w + mirror_index(x as isize + i, w)] as f64;
            }
            tmp[y * w + x] = acc;
        }
    }
    GrayImage::from_fn(w, h, |x, y| {
        let mut acc = 0.0;
        for (k, i) in kernel.iter().zip(-radius..=radius) {
            acc += k * tmp[mirror_index(y as isize + i, h) * w + x];
        }
        acc as f32
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_sigma_is_identity() {
        let img = GrayImage::from_fn(5, 4, |x, y| (x * y) as f32);
        assert_eq!(gaussian_blur(&img, 0.0), img);
    }

    #[test]
    fn preserves_constant_images() {
        let img = GrayImage::filled(9, 7, 0.25);
        let out = gaussian_blur(&img, 1.5);
        assert!(out.data().iter().all(|v| (v - 0.25).abs() < 1e-6));
    }

    #[test]
    fn impulse_response_is_symmetric_and_peaked() {
        let mut img = GrayImage::filled(21, 21, 0.0);
        img.set(10, 10, 1.0);
        let out = gaussian_blur(&img, 2.0);
        assert!((out.get(8, 10) - out.get(12, 10)).abs() < 1e-7);
        assert!((out.get(10, 7) - out.get(7, 10)).abs() < 1e-7);
        assert!(out.get(10, 10) > out.get(11, 10));
        let sum: f32 = out.data().iter().sum();
        assert!((sum - 1.0).abs() < 1e-5);
    }
}
