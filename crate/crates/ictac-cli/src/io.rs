//! PNG ingestion and emission for image tensors and observation masks.
//!
//! Images are 8-bit RGB PNGs mapped to rows x cols x 3 tensors on the
//! 0..255 scale, row 0 being the top scanline. Masks are 8-bit grayscale
//! PNGs holding the three channel planes stacked vertically (R plane on
//! top), 0 for missing and 255 for observed, so a mask for an H x W image
//! is a (3 H) x W PNG.

use std::path::Path;

use anyhow::{bail, Context, Result};
use image::{DynamicImage, GrayImage, RgbImage};
use ictac::{DenseTensor, ObservationMask};

/// Loads an 8-bit RGB PNG as a rows x cols x 3 tensor.
pub fn load_image(path: &Path) -> Result<DenseTensor> {
    let img = image::open(path).with_context(|| format!("cannot read {}", path.display()))?;
    let rgb = match img {
        DynamicImage::ImageRgb8(buf) => buf,
        other => bail!(
            "{}: expected an 8-bit RGB image, found {:?}",
            path.display(),
            other.color()
        ),
    };
    let (w, h) = rgb.dimensions();
    let (rows, cols) = (h as usize, w as usize);
    let mut data = vec![0.0f64; rows * cols * 3];
    for (x, y, pixel) in rgb.enumerate_pixels() {
        let (r, c) = (y as usize, x as usize);
        for ch in 0..3 {
            data[r + c * rows + ch * rows * cols] = pixel[ch] as f64;
        }
    }
    Ok(DenseTensor::new(vec![rows, cols, 3], data)?)
}

/// Clamps to [0, 255], rounds half up, and writes an 8-bit RGB PNG.
pub fn save_image(t: &DenseTensor, path: &Path) -> Result<()> {
    let [rows, cols, channels] = tensor_image_dims(t)?;
    if channels != 3 {
        bail!("expected 3 channels, found {channels}");
    }
    let mut img = RgbImage::new(cols as u32, rows as u32);
    for (x, y, pixel) in img.enumerate_pixels_mut() {
        let (r, c) = (y as usize, x as usize);
        for ch in 0..3 {
            pixel[ch] = quantize(t.data()[r + c * rows + ch * rows * cols]);
        }
    }
    img.save(path)
        .with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}

pub fn quantize(v: f64) -> u8 {
    (v.clamp(0.0, 255.0) + 0.5).floor() as u8
}

/// Writes a mask as a grayscale PNG of stacked channel planes.
pub fn save_mask(mask: &ObservationMask, path: &Path) -> Result<()> {
    let shape = mask.shape();
    if shape.len() != 3 {
        bail!("mask must be rows x cols x channels, found {shape:?}");
    }
    let [rows, cols, channels] = [shape[0], shape[1], shape[2]];
    let mut img = GrayImage::new(cols as u32, (channels * rows) as u32);
    for (x, y, pixel) in img.enumerate_pixels_mut() {
        let c = x as usize;
        let ch = y as usize / rows;
        let r = y as usize % rows;
        pixel[0] = if mask.flags()[r + c * rows + ch * rows * cols] {
            255
        } else {
            0
        };
    }
    img.save(path)
        .with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}

/// Reads a stacked-plane grayscale mask PNG for a rows x cols x channels
/// tensor shape.
pub fn load_mask(path: &Path, shape: &[usize]) -> Result<ObservationMask> {
    if shape.len() != 3 {
        bail!("mask shape must be rows x cols x channels, found {shape:?}");
    }
    let [rows, cols, channels] = [shape[0], shape[1], shape[2]];
    let img = image::open(path).with_context(|| format!("cannot read {}", path.display()))?;
    let gray = match img {
        DynamicImage::ImageLuma8(buf) => buf,
        other => bail!(
            "{}: expected an 8-bit grayscale mask, found {:?}",
            path.display(),
            other.color()
        ),
    };
    let (w, h) = gray.dimensions();
    if (w as usize, h as usize) != (cols, channels * rows) {
        bail!(
            "{}: mask is {}x{}, expected {}x{} for image shape {:?}",
            path.display(),
            w,
            h,
            cols,
            channels * rows,
            shape
        );
    }
    let mut flags = vec![false; rows * cols * channels];
    for (x, y, pixel) in gray.enumerate_pixels() {
        let c = x as usize;
        let ch = y as usize / rows;
        let r = y as usize % rows;
        flags[r + c * rows + ch * rows * cols] = match pixel[0] {
            255 => true,
            0 => false,
            v => bail!("{}: mask value {v} is neither 0 nor 255", path.display()),
        };
    }
    Ok(ObservationMask::new(shape.to_vec(), flags)?)
}

pub fn tensor_image_dims(t: &DenseTensor) -> Result<[usize; 3]> {
    match *t.shape() {
        [r, c, ch] => Ok([r, c, ch]),
        ref s => bail!("expected a rows x cols x channels tensor, found {s:?}"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantize_clamps_and_rounds_half_up() {
        assert_eq!(quantize(255.7), 255);
        assert_eq!(quantize(-3.2), 0);
        assert_eq!(quantize(127.5), 128);
        assert_eq!(quantize(127.49), 127);
        assert_eq!(quantize(0.0), 0);
        assert_eq!(quantize(255.0), 255);
    }
}
