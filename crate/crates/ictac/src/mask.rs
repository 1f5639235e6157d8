//! Observation masks: which tensor entries belong to the known set.

use crate::error::{Error, Result};
use crate::tensor::DenseTensor;

/// Boolean tensor congruent to a [`DenseTensor`]; `true` marks a known entry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObservationMask {
    shape: Vec<usize>,
    flags: Vec<bool>,
}

impl ObservationMask {
    pub fn new(shape: Vec<usize>, flags: Vec<bool>) -> Result<Self> {
        if shape.is_empty() || shape.iter().any(|&s| s == 0) {
            return Err(Error::EmptyMode(shape));
        }
        let expected: usize = shape.iter().product();
        if flags.len() != expected {
            return Err(Error::DataLength {
                shape,
                expected,
                found: flags.len(),
            });
        }
        Ok(Self { shape, flags })
    }

    /// Mask marking every entry as observed.
    pub fn all_observed(shape: Vec<usize>) -> Result<Self> {
        let len = shape.iter().product();
        Self::new(shape, vec![true; len])
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn flags(&self) -> &[bool] {
        &self.flags
    }

    pub fn len(&self) -> usize {
        self.flags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.flags.is_empty()
    }

    pub fn observed_count(&self) -> usize {
        self.flags.iter().filter(|&&f| f).count()
    }

    pub fn missing_count(&self) -> usize {
        self.len() - self.observed_count()
    }

    pub fn any_observed(&self) -> bool {
        self.flags.iter().any(|&f| f)
    }

    pub fn is_congruent(&self, t: &DenseTensor) -> bool {
        self.shape == t.shape()
    }

    /// Copy of `t` with every missing entry set to zero.
    pub fn zero_missing(&self, t: &DenseTensor) -> Result<DenseTensor> {
        if !self.is_congruent(t) {
            return Err(Error::ShapeMismatch(
                self.shape.clone(),
                t.shape().to_vec(),
            ));
        }
        let data = t
            .data()
            .iter()
            .zip(&self.flags)
            .map(|(&v, &keep)| if keep { v } else { 0.0 })
            .collect();
        DenseTensor::new(self.shape.clone(), data)
    }

    /// Overwrites the observed entries of `target` with those of `source`.
    pub fn project_observed(&self, source: &DenseTensor, target: &mut DenseTensor) -> Result<()> {
        if !self.is_congruent(source) || !self.is_congruent(target) {
            return Err(Error::ShapeMismatch(
                self.shape.clone(),
                target.shape().to_vec(),
            ));
        }
        let src = source.data();
        let dst = target.data_mut();
        for (i, &keep) in self.flags.iter().enumerate() {
            if keep {
                dst[i] = src[i];
            }
        }
        Ok(())
    }

    pub(crate) fn from_parts_unchecked(shape: Vec<usize>, flags: Vec<bool>) -> Self {
        Self { shape, flags }
    }
}
