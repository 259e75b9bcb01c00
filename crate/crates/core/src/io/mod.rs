//! Reading and writing rasters as 8/16-bit grayscale PNG or TIFF files. The
//! format follows the file extension.

use std::path::Path;

use image::{DynamicImage, ImageBuffer, Luma};

use crate::error::{Error, Result};
use crate::raster::{BinaryMask, GrayImage, LabelMap};

const U16_MAX: f32 = u16::MAX as f32;

fn open(path: &Path) -> Result<DynamicImage> {
    if !path.exists() {
        return Err(Error::MissingFile(path.to_path_buf()));
    }
    Ok(image::open(path)?)
}

fn format_error(path: &Path, reason: impl Into<String>) -> Error {
    Error::Format {
        path: path.to_path_buf(),
        reason: reason.into(),
    }
}

/// Reads a grayscale image scaled to `[0, 1]` by its bit depth.
pub fn read_gray(path: &Path) -> Result<GrayImage> {
    let img = open(path)?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    let data: Vec<f32> = match img {
        DynamicImage::ImageLuma8(buf) => buf.into_raw().into_iter().map(|v| v as f32 / 255.0).collect(),
        other => other.into_luma16().into_raw().into_iter().map(|v| v as f32 / U16_MAX).collect(),
    };
    GrayImage::new(w, h, data)
}

/// Reads an integer label image; 0 is background.
pub fn read_labels(path: &Path) -> Result<LabelMap> {
    let img = open(path)?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    let data: Vec<u32> = match img {
        DynamicImage::ImageLuma8(buf) => buf.into_raw().into_iter().map(u32::from).collect(),
        DynamicImage::ImageLuma16(buf) => buf.into_raw().into_iter().map(u32::from).collect(),
        DynamicImage::ImageRgb32F(_) | DynamicImage::ImageRgba32F(_) => {
            return Err(format_error(path, "floating point label images are not supported"))
        }
        other => other.into_luma16().into_raw().into_iter().map(u32::from).collect(),
    };
    LabelMap::new(w, h, data)
}

/// Reads a mask; any nonzero pixel is set.
pub fn read_mask(path: &Path) -> Result<BinaryMask> {
    Ok(read_labels(path)?.to_mask())
}

fn save_u16(path: &Path, w: usize, h: usize, data: Vec<u16>) -> Result<()> {
    let buf: ImageBuffer<Luma<u16>, Vec<u16>> =
        ImageBuffer::from_raw(w as u32, h as u32, data).expect("buffer length matches dimensions");
    buf.save(path)?;
    Ok(())
}

/// Writes labels as a 16-bit image.
pub fn write_labels(path: &Path, labels: &LabelMap) -> Result<()> {
    if labels.max_label() > u16::MAX as u32 {
        return Err(format_error(path, format!("label {} does not fit in 16 bits", labels.max_label())));
    }
    let (w, h) = labels.dims();
    save_u16(path, w, h, labels.data().iter().map(|&l| l as u16).collect())
}

/// Writes a `[0, 1]` image as 16-bit, scaled by 65535.
pub fn write_probability(path: &Path, img: &GrayImage) -> Result<()> {
    img.check_probability()?;
    let (w, h) = img.dims();
    save_u16(path, w, h, img.data().iter().map(|&v| (v * U16_MAX).round() as u16).collect())
}

/// Writes nonnegative values as 16-bit after multiplying by `scale`.
pub fn write_scaled(path: &Path, img: &GrayImage, scale: f32) -> Result<()> {
    let (w, h) = img.dims();
    let mut data = Vec::with_capacity(w * h);
    for &v in img.data() {
        let s = (v * scale).round();
        if !(0.0..=U16_MAX).contains(&s) {
            return Err(format_error(path, format!("value {v} times {scale} does not fit in 16 bits")));
        }
        data.push(s as u16);
    }
    save_u16(path, w, h, data)
}

/// Writes a mask as 8-bit 0/255.
pub fn write_mask(path: &Path, mask: &BinaryMask) -> Result<()> {
    let (w, h) = mask.dims();
    let data = mask.data().iter().map(|&b| if b { 255u8 } else { 0 }).collect();
    let buf: ImageBuffer<Luma<u8>, Vec<u8>> =
        ImageBuffer::from_raw(w as u32, h as u32, data).expect("buffer length matches dimensions");
    buf.save(path)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labels_round_trip_16_bit() {
        let dir = tempfile::tempdir().unwrap();
        let labels = LabelMap::from_fn(13, 7, |x, y| ((x * 7 + y * 1000) % 40000) as u32);
        for name in ["a.tif", "a.png"] {
            let path = dir.path().join(name);
            write_labels(&path, &labels).unwrap();
            assert_eq!(read_labels(&path).unwrap(), labels);
        }
        let big = LabelMap::filled(2, 2, 70000);
        assert!(write_labels(&dir.path().join("b.tif"), &big).is_err());
    }

    #[test]
    fn probability_round_trip_within_half_step() {
        let dir = tempfile::tempdir().unwrap();
        let img = GrayImage::from_fn(9, 5, |x, y| ((x + 3 * y) as f32 / 40.0).min(1.0));
        let path = dir.path().join("p.tif");
        write_probability(&path, &img).unwrap();
        let back = read_gray(&path).unwrap();
        for (a, b) in img.data().iter().zip(back.data()) {
            assert!((a - b).abs() <= 0.5 / U16_MAX + 1e-7);
        }
    }

    #[test]
    fn masks_and_scaled_values() {
        let dir = tempfile::tempdir().unwrap();
        let mask = BinaryMask::from_fn(6, 6, |x, y| x > y);
        let path = dir.path().join("m.png");
        write_mask(&path, &mask).unwrap();
        assert_eq!(read_mask(&path).unwrap(), mask);
        assert_eq!(read_gray(&path).unwrap(), mask.to_gray());

        let w = GrayImage::from_fn(4, 4, |x, _| 1.0 + x as f32 * 0.25);
        let path = dir.path().join("w.tif");
        write_scaled(&path, &w, 1000.0).unwrap();
        let back = read_labels(&path).unwrap();
        assert_eq!(back.get(3, 0), 1750);
        assert!(write_scaled(&path, &w, 60000.0).is_err());
    }

    #[test]
    fn missing_file_reported() {
        let err = read_gray(Path::new("/nonexistent/t000.tif")).unwrap_err();
        assert!(matches!(err, Error::MissingFile(_)));
    }
}
