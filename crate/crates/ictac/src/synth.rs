//! Seeded synthetic data: low-TT-rank tensors built by direct core
//! contraction, and uniform random observation masks. Used for solver
//! benchmarks and ground-truth recovery tests.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::mask::ObservationMask;
use crate::tensor::DenseTensor;

/// Name of the generator behind every seeded sampler in this crate.
pub const RNG_NAME: &str = "chacha12";

/// Builds a tensor with TT ranks at most `ranks` by contracting Gaussian
/// cores G_1 (I_1 x r_1), G_k (r_{k-1} x I_k x r_k), G_N (r_{N-1} x I_N).
///
/// The contraction is carried out left to right on the prefix unfolding:
/// starting from the 1 x 1 identity, mode k maps an (P x r) panel to a
/// (P I_k x r') panel. With Gaussian cores the TT ranks equal `ranks`
/// with probability one.
pub fn synthetic_tt_tensor(shape: &[usize], ranks: &[usize], seed: u64) -> Result<DenseTensor> {
    if shape.is_empty() || ranks.len() + 1 != shape.len() {
        return Err(Error::RankCount {
            expected: shape.len().saturating_sub(1),
            found: ranks.len(),
        });
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut bounds = Vec::with_capacity(shape.len() + 1);
    bounds.push(1usize);
    bounds.extend_from_slice(ranks);
    bounds.push(1);

    // panel: (prod of processed mode sizes) x r_right, column-major.
    let mut panel = vec![1.0f64];
    let mut rows = 1usize;
    for (k, &dim) in shape.iter().enumerate() {
        let r_left = bounds[k];
        let r_right = bounds[k + 1];
        let core: Vec<f64> = (0..r_left * dim * r_right)
            .map(|_| rng.sample::<f64, _>(StandardNormal))
            .collect();
        // core layout: (r_left, dim, r_right), first index fastest.
        let mut next = vec![0.0f64; rows * dim * r_right];
        for rr in 0..r_right {
            for i in 0..dim {
                for rl in 0..r_left {
                    let c = core[rl + i * r_left + rr * r_left * dim];
                    if c == 0.0 {
                        continue;
                    }
                    let src = &panel[rl * rows..(rl + 1) * rows];
                    let dst_off = rr * rows * dim + i * rows;
                    let dst = &mut next[dst_off..dst_off + rows];
                    for (d, s) in dst.iter_mut().zip(src) {
                        *d += c * s;
                    }
                }
            }
        }
        panel = next;
        rows *= dim;
    }
    DenseTensor::new(shape.to_vec(), panel)
}

/// Mask with exactly `missing` entries false, drawn uniformly without
/// replacement; deterministic per seed.
pub fn random_mask(shape: &[usize], missing: usize, seed: u64) -> Result<ObservationMask> {
    let total: usize = shape.iter().product();
    if missing > total {
        return Err(Error::InvalidConfig(format!(
            "cannot remove {missing} of {total} entries"
        )));
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut flags = vec![true; total];
    for idx in rand::seq::index::sample(&mut rng, total, missing) {
        flags[idx] = false;
    }
    ObservationMask::new(shape.to_vec(), flags)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn synthetic_tensor_has_requested_tt_ranks() {
        let t = synthetic_tt_tensor(&[5, 4, 6], &[2, 3], 7).unwrap();
        assert_eq!(t.shape(), &[5, 4, 6]);
        assert_eq!(t.tt_ranks(1e-10).unwrap().ranks(), &[2, 3]);
    }

    #[test]
    fn synthetic_tensor_is_deterministic() {
        let a = synthetic_tt_tensor(&[3, 3, 3], &[2, 2], 99).unwrap();
        let b = synthetic_tt_tensor(&[3, 3, 3], &[2, 2], 99).unwrap();
        assert_eq!(a, b);
        let c = synthetic_tt_tensor(&[3, 3, 3], &[2, 2], 100).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn random_mask_exact_count_and_determinism() {
        let m = random_mask(&[10, 10, 3], 150, 5).unwrap();
        assert_eq!(m.missing_count(), 150);
        assert_eq!(m, random_mask(&[10, 10, 3], 150, 5).unwrap());

        let none = random_mask(&[4, 4], 0, 1).unwrap();
        assert_eq!(none.missing_count(), 0);
        let all = random_mask(&[4, 4], 16, 1).unwrap();
        assert_eq!(all.observed_count(), 0);
        assert!(random_mask(&[4, 4], 17, 1).is_err());
    }
}
