//! End-to-end recovery pipelines.
//!
//! `run_ictac` wires the three concatenated-completion steps together:
//! stack C copies of the corrupted image into a fourth-order tensor, merge
//! the copy index into the row mode (the "video sequence tensor"), augment
//! with the modified ket scheme, complete with the factorization solver,
//! then invert every transformation and extract one image.
//! `run_ka_tmactt` is the single-image baseline (augment, complete,
//! invert) and `run_tmac_tt` the bare solver on the raw image tensor.

use crate::error::{Error, Result};
use crate::ka::{ka_augment, ka_augment_mask, ka_invert, KaSpec, KaVariant};
use crate::mask::ObservationMask;
use crate::solver::{solve, SolveReport, SolverConfig};
use crate::tensor::DenseTensor;

/// How image copies are merged into the combined row mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StackMode {
    /// Combined row (i1, c) -> i1 * C + c: each image row repeated C
    /// consecutive times, a continuous stream of the image.
    Interleave,
    /// Combined row (i1, c) -> c * I1 + i1: whole copies stacked
    /// vertically.
    Stack,
}

/// How the recovered image is read out of the recovered copy tensor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExtractMode {
    /// The first copy slice.
    First,
    /// Entrywise mean over the copies.
    Average,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub copies: usize,
    pub stack_mode: StackMode,
    pub extract_mode: ExtractMode,
    pub ka_variant: KaVariant,
    pub solver: SolverConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            copies: 81,
            stack_mode: StackMode::Interleave,
            extract_mode: ExtractMode::First,
            ka_variant: KaVariant::Modified,
            solver: SolverConfig::default(),
        }
    }
}

/// Third-order copy tensor with the provenance needed to undo the merge.
#[derive(Debug, Clone, PartialEq)]
pub struct VstTensor {
    tensor: DenseTensor,
    copies: usize,
    image_rows: usize,
    stack_mode: StackMode,
}

impl VstTensor {
    /// Reconstitutes a VST value around replacement data (for example a
    /// completed tensor), validating the combined row count.
    pub fn from_parts(
        tensor: DenseTensor,
        copies: usize,
        image_rows: usize,
        stack_mode: StackMode,
    ) -> Result<Self> {
        if tensor.order() != 3 || copies == 0 || tensor.shape()[0] != copies * image_rows {
            return Err(Error::ShapeMismatch(
                tensor.shape().to_vec(),
                vec![copies * image_rows, 0, 0],
            ));
        }
        Ok(Self {
            tensor,
            copies,
            image_rows,
            stack_mode,
        })
    }

    pub fn tensor(&self) -> &DenseTensor {
        &self.tensor
    }

    pub fn copies(&self) -> usize {
        self.copies
    }

    pub fn image_rows(&self) -> usize {
        self.image_rows
    }

    pub fn stack_mode(&self) -> StackMode {
        self.stack_mode
    }
}

fn check_image(img: &DenseTensor) -> Result<()> {
    if img.order() != 3 {
        return Err(Error::ShapeMismatch(img.shape().to_vec(), vec![0, 0, 3]));
    }
    Ok(())
}

fn check_fourth_order(ci: &DenseTensor) -> Result<()> {
    if ci.order() != 4 {
        return Err(Error::ShapeMismatch(
            ci.shape().to_vec(),
            vec![0, 0, 3, 0],
        ));
    }
    Ok(())
}

/// Stacks `copies` identical copies of the image (and its mask) into an
/// I1 x I2 x channels x C tensor.
pub fn concatenate(
    img: &DenseTensor,
    mask: &ObservationMask,
    copies: usize,
) -> Result<(DenseTensor, ObservationMask)> {
    check_image(img)?;
    if !mask.is_congruent(img) {
        return Err(Error::ShapeMismatch(
            mask.shape().to_vec(),
            img.shape().to_vec(),
        ));
    }
    if copies == 0 {
        return Err(Error::InvalidConfig("copies must be at least 1".into()));
    }
    let mut shape = img.shape().to_vec();
    shape.push(copies);
    // Copy slices are contiguous in the linearization.
    let data = img.data().repeat(copies);
    let flags = mask.flags().repeat(copies);
    Ok((
        DenseTensor::new(shape.clone(), data)?,
        ObservationMask::new(shape, flags)?,
    ))
}

fn vst_map<T: Copy + Default>(
    data: &[T],
    i1: usize,
    i2: usize,
    ch: usize,
    copies: usize,
    mode: StackMode,
    forward: bool,
) -> Vec<T> {
    let rows = copies * i1;
    let mut out = vec![T::default(); data.len()];
    for c in 0..copies {
        for j in 0..ch {
            for col in 0..i2 {
                for r in 0..i1 {
                    let ci_idx = r + i1 * (col + i2 * (j + ch * c));
                    let vrow = match mode {
                        StackMode::Interleave => r * copies + c,
                        StackMode::Stack => c * i1 + r,
                    };
                    let vst_idx = vrow + rows * (col + i2 * j);
                    if forward {
                        out[vst_idx] = data[ci_idx];
                    } else {
                        out[ci_idx] = data[vst_idx];
                    }
                }
            }
        }
    }
    out
}

/// Merges the copy mode of an I1 x I2 x ch x C tensor into the row mode,
/// producing the (C I1) x I2 x ch video sequence tensor.
pub fn to_vst(ci: &DenseTensor, mode: StackMode) -> Result<VstTensor> {
    check_fourth_order(ci)?;
    let [i1, i2, ch, copies] = [ci.shape()[0], ci.shape()[1], ci.shape()[2], ci.shape()[3]];
    let data = vst_map(ci.data(), i1, i2, ch, copies, mode, true);
    Ok(VstTensor {
        tensor: DenseTensor::new(vec![copies * i1, i2, ch], data)?,
        copies,
        image_rows: i1,
        stack_mode: mode,
    })
}

/// Transports a mask through the same merge as [`to_vst`].
pub fn to_vst_mask(mask: &ObservationMask, mode: StackMode) -> Result<ObservationMask> {
    if mask.shape().len() != 4 {
        return Err(Error::ShapeMismatch(
            mask.shape().to_vec(),
            vec![0, 0, 3, 0],
        ));
    }
    let [i1, i2, ch, copies] = [
        mask.shape()[0],
        mask.shape()[1],
        mask.shape()[2],
        mask.shape()[3],
    ];
    let flags = vst_map(mask.flags(), i1, i2, ch, copies, mode, true);
    ObservationMask::new(vec![copies * i1, i2, ch], flags)
}

/// Exact inverse of [`to_vst`], using the provenance carried by the value.
pub fn from_vst(vst: &VstTensor) -> Result<DenseTensor> {
    let shape = vst.tensor.shape();
    let i1 = vst.image_rows;
    let copies = vst.copies;
    if shape.len() != 3 || shape[0] != copies * i1 || copies == 0 {
        return Err(Error::ShapeMismatch(
            shape.to_vec(),
            vec![copies * i1, 0, 0],
        ));
    }
    let [i2, ch] = [shape[1], shape[2]];
    let data = vst_map(
        vst.tensor.data(),
        i1,
        i2,
        ch,
        copies,
        vst.stack_mode,
        false,
    );
    DenseTensor::new(vec![i1, i2, ch, copies], data)
}

/// Reads a single image out of an I1 x I2 x ch x C tensor.
pub fn extract_image(ci: &DenseTensor, mode: ExtractMode) -> Result<DenseTensor> {
    check_fourth_order(ci)?;
    let shape = ci.shape();
    let copies = shape[3];
    let plane = shape[0] * shape[1] * shape[2];
    let out_shape = shape[..3].to_vec();
    match mode {
        ExtractMode::First => DenseTensor::new(out_shape, ci.data()[..plane].to_vec()),
        ExtractMode::Average => {
            let mut acc = vec![0.0; plane];
            for c in 0..copies {
                let slice = &ci.data()[c * plane..(c + 1) * plane];
                for (a, &v) in acc.iter_mut().zip(slice) {
                    *a += v;
                }
            }
            let inv = 1.0 / copies as f64;
            for a in acc.iter_mut() {
                *a *= inv;
            }
            DenseTensor::new(out_shape, acc)
        }
    }
}

/// Validates an ICTAC configuration against an image shape before any
/// allocation: the combined row count and the column count must match the
/// ket addressing of the chosen variant.
pub fn validate_ictac_shape(
    shape: &[usize],
    copies: usize,
    variant: KaVariant,
) -> Result<KaSpec> {
    if shape.len() != 3 {
        return Err(Error::ShapeMismatch(shape.to_vec(), vec![0, 0, 3]));
    }
    if copies == 0 {
        return Err(Error::InvalidConfig("copies must be at least 1".into()));
    }
    let vst_shape = [copies * shape[0], shape[1], shape[2]];
    KaSpec::for_shape(&vst_shape, variant)
}

/// Full concatenated pipeline: concatenate, merge, augment, complete,
/// invert, extract. Observed pixels of the input are preserved exactly.
pub fn run_ictac(
    img: &DenseTensor,
    mask: &ObservationMask,
    cfg: &PipelineConfig,
) -> Result<(DenseTensor, SolveReport)> {
    check_image(img)?;
    let spec = validate_ictac_shape(img.shape(), cfg.copies, cfg.ka_variant)?;

    let observed = mask.zero_missing(img)?;
    let (ci, ci_mask) = concatenate(&observed, mask, cfg.copies)?;
    debug_assert_eq!(ci.shape()[3], cfg.copies);

    let vst = to_vst(&ci, cfg.stack_mode)?;
    let vst_mask = to_vst_mask(&ci_mask, cfg.stack_mode)?;
    debug_assert_eq!(vst.tensor().shape()[0], cfg.copies * img.shape()[0]);

    let aug = ka_augment(vst.tensor(), &spec)?;
    let aug_mask = ka_augment_mask(&vst_mask, &spec)?;
    debug_assert_eq!(aug.shape(), spec.augmented_shape().as_slice());

    let (completed, report) = solve(&aug, &aug_mask, &cfg.solver)?;

    let vst_rec = VstTensor {
        tensor: ka_invert(&completed, &spec)?,
        copies: vst.copies,
        image_rows: vst.image_rows,
        stack_mode: vst.stack_mode,
    };
    let ci_rec = from_vst(&vst_rec)?;
    let mut out = extract_image(&ci_rec, cfg.extract_mode)?;
    mask.project_observed(&observed, &mut out)?;
    Ok((out, report))
}

/// Single-image baseline: ket augmentation followed by completion, no
/// concatenation.
pub fn run_ka_tmactt(
    img: &DenseTensor,
    mask: &ObservationMask,
    cfg: &PipelineConfig,
) -> Result<(DenseTensor, SolveReport)> {
    check_image(img)?;
    let spec = KaSpec::for_shape(img.shape(), cfg.ka_variant)?;
    let observed = mask.zero_missing(img)?;
    let aug = ka_augment(&observed, &spec)?;
    let aug_mask = ka_augment_mask(mask, &spec)?;
    let (completed, report) = solve(&aug, &aug_mask, &cfg.solver)?;
    let mut out = ka_invert(&completed, &spec)?;
    mask.project_observed(&observed, &mut out)?;
    Ok((out, report))
}

/// Bare completion of the raw image tensor, no augmentation.
pub fn run_tmac_tt(
    img: &DenseTensor,
    mask: &ObservationMask,
    cfg: &SolverConfig,
) -> Result<(DenseTensor, SolveReport)> {
    let observed = mask.zero_missing(img)?;
    solve(&observed, mask, cfg)
}
