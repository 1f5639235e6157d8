//! Ket augmentation: bijective reshaping of an I1 x I2 x channels image
//! into an (n+1)-order tensor whose first n modes address nested spatial
//! blocks (finest scale first) and whose last mode is the channel.
//!
//! The original scheme covers square 2^n x 2^n images (mode size 4); the
//! modified scheme covers rectangular 3^n x 2^n images (mode size 6), the
//! shape produced by stacking image copies into a tall tensor.
//!
//! A pixel at zero-based (row, col) with base-`row_radix` row digits
//! r_n..r_1 and base-`col_radix` column digits c_n..c_1 is addressed at
//! mode k by the digit `col_radix * r_k + c_k`; digit k=1 selects within
//! the smallest blocks, digit k=n the top-level block.

use crate::error::{Error, Result};
use crate::mask::ObservationMask;
use crate::tensor::DenseTensor;

/// Which block addressing to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KaVariant {
    /// 2^n x 2^n images, mode size 4.
    Original,
    /// 3^n x 2^n images, mode size 6.
    Modified,
}

impl KaVariant {
    pub fn row_radix(self) -> usize {
        match self {
            KaVariant::Original => 2,
            KaVariant::Modified => 3,
        }
    }

    pub fn col_radix(self) -> usize {
        2
    }
}

/// A concrete ket-augmentation addressing for one image shape.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KaSpec {
    levels: usize,
    row_radix: usize,
    col_radix: usize,
    channels: usize,
}

impl KaSpec {
    /// Derives the unique spec matching `shape` (rows, cols, channels),
    /// solving row_radix^n = rows and col_radix^n = cols for a common n.
    pub fn for_shape(shape: &[usize], variant: KaVariant) -> Result<Self> {
        let err = || Error::NotAugmentable {
            shape: shape.to_vec(),
            row_radix: variant.row_radix(),
            col_radix: variant.col_radix(),
        };
        if shape.len() != 3 || shape[2] == 0 {
            return Err(err());
        }
        let n = exact_log(shape[0], variant.row_radix()).ok_or_else(err)?;
        let n_col = exact_log(shape[1], variant.col_radix()).ok_or_else(err)?;
        if n != n_col || n == 0 {
            return Err(err());
        }
        Ok(Self {
            levels: n,
            row_radix: variant.row_radix(),
            col_radix: variant.col_radix(),
            channels: shape[2],
        })
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn row_radix(&self) -> usize {
        self.row_radix
    }

    pub fn col_radix(&self) -> usize {
        self.col_radix
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    /// Mode size of the spatial modes of the augmented tensor.
    pub fn block_size(&self) -> usize {
        self.row_radix * self.col_radix
    }

    pub fn image_shape(&self) -> Vec<usize> {
        vec![
            self.row_radix.pow(self.levels as u32),
            self.col_radix.pow(self.levels as u32),
            self.channels,
        ]
    }

    pub fn augmented_shape(&self) -> Vec<usize> {
        let mut shape = vec![self.block_size(); self.levels];
        shape.push(self.channels);
        shape
    }

    /// Per-row offsets into the augmented linear index: entry r is the sum
    /// over levels of col_radix * r_k * block_size^(k-1).
    fn row_offsets(&self) -> Vec<usize> {
        digit_offsets(
            self.row_radix.pow(self.levels as u32),
            self.row_radix,
            self.block_size(),
            self.col_radix,
        )
    }

    /// Per-column offsets: entry c is the sum of c_k * block_size^(k-1).
    fn col_offsets(&self) -> Vec<usize> {
        digit_offsets(
            self.col_radix.pow(self.levels as u32),
            self.col_radix,
            self.block_size(),
            1,
        )
    }
}

/// Offsets of each 0..extent value: decompose the value in base `radix`
/// and weight digit k by `digit_scale * block_size^(k-1)`.
fn digit_offsets(extent: usize, radix: usize, block_size: usize, digit_scale: usize) -> Vec<usize> {
    let mut offsets = Vec::with_capacity(extent);
    for v in 0..extent {
        let mut rest = v;
        let mut weight = 1usize;
        let mut off = 0usize;
        while rest > 0 {
            off += digit_scale * (rest % radix) * weight;
            rest /= radix;
            weight *= block_size;
        }
        offsets.push(off);
    }
    offsets
}

fn exact_log(value: usize, base: usize) -> Option<usize> {
    if value == 0 {
        return None;
    }
    let mut v = value;
    let mut n = 0;
    while v % base == 0 {
        v /= base;
        n += 1;
    }
    (v == 1).then_some(n)
}

fn check_image_shape(spec: &KaSpec, shape: &[usize]) -> Result<()> {
    let expected = spec.image_shape();
    if shape != expected.as_slice() {
        return Err(Error::ShapeMismatch(shape.to_vec(), expected));
    }
    Ok(())
}

fn check_augmented_shape(spec: &KaSpec, shape: &[usize]) -> Result<()> {
    let expected = spec.augmented_shape();
    if shape != expected.as_slice() {
        return Err(Error::ShapeMismatch(shape.to_vec(), expected));
    }
    Ok(())
}

fn map_to_augmented<T: Copy + Default>(data: &[T], spec: &KaSpec) -> Vec<T> {
    let [rows, cols, channels] = [
        spec.row_radix.pow(spec.levels as u32),
        spec.col_radix.pow(spec.levels as u32),
        spec.channels,
    ];
    let row_off = spec.row_offsets();
    let col_off = spec.col_offsets();
    let bn = spec.block_size().pow(spec.levels as u32);
    let mut out = vec![T::default(); data.len()];
    let mut src = 0usize;
    for j in 0..channels {
        let ch_off = j * bn;
        for c in 0..cols {
            let cc = col_off[c] + ch_off;
            for r in 0..rows {
                out[row_off[r] + cc] = data[src];
                src += 1;
            }
        }
    }
    out
}

fn map_from_augmented<T: Copy + Default>(data: &[T], spec: &KaSpec) -> Vec<T> {
    let [rows, cols, channels] = [
        spec.row_radix.pow(spec.levels as u32),
        spec.col_radix.pow(spec.levels as u32),
        spec.channels,
    ];
    let row_off = spec.row_offsets();
    let col_off = spec.col_offsets();
    let bn = spec.block_size().pow(spec.levels as u32);
    let mut out = vec![T::default(); data.len()];
    let mut dst = 0usize;
    for j in 0..channels {
        let ch_off = j * bn;
        for c in 0..cols {
            let cc = col_off[c] + ch_off;
            for r in 0..rows {
                out[dst] = data[row_off[r] + cc];
                dst += 1;
            }
        }
    }
    out
}

/// Augments an image tensor into its (n+1)-order block-addressed form.
pub fn ka_augment(img: &DenseTensor, spec: &KaSpec) -> Result<DenseTensor> {
    check_image_shape(spec, img.shape())?;
    DenseTensor::new(spec.augmented_shape(), map_to_augmented(img.data(), spec))
}

/// Exact inverse of [`ka_augment`].
pub fn ka_invert(aug: &DenseTensor, spec: &KaSpec) -> Result<DenseTensor> {
    check_augmented_shape(spec, aug.shape())?;
    DenseTensor::new(spec.image_shape(), map_from_augmented(aug.data(), spec))
}

/// Augments a mask with the identical addressing, so the solver sees the
/// observed set in augmented coordinates.
pub fn ka_augment_mask(mask: &ObservationMask, spec: &KaSpec) -> Result<ObservationMask> {
    check_image_shape(spec, mask.shape())?;
    Ok(ObservationMask::from_parts_unchecked(
        spec.augmented_shape(),
        map_to_augmented(mask.flags(), spec),
    ))
}

/// Inverse mask transport, for completeness with [`ka_invert`].
pub fn ka_invert_mask(mask: &ObservationMask, spec: &KaSpec) -> Result<ObservationMask> {
    check_augmented_shape(spec, mask.shape())?;
    Ok(ObservationMask::from_parts_unchecked(
        spec.image_shape(),
        map_from_augmented(mask.flags(), spec),
    ))
}
