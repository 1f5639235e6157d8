//! Evaluation metrics: missing ratio, relative square error and SSIM.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::mask::ObservationMask;
use crate::tensor::DenseTensor;

/// SSIM window and stabilization constants: 11x11 Gaussian window with
/// sigma 1.5, K1 = 0.01, K2 = 0.03 on an 8-bit dynamic range, channel
/// SSIM averaged over the channels.
pub const SSIM_WINDOW: usize = 11;
pub const SSIM_SIGMA: f64 = 1.5;
pub const SSIM_K1: f64 = 0.01;
pub const SSIM_K2: f64 = 0.03;
pub const SSIM_DYNAMIC_RANGE: f64 = 255.0;

/// Quantitative evaluation of one recovery run.
#[derive(Debug, Clone, Serialize)]
pub struct MetricsReport {
    pub algorithm: String,
    pub shape: Vec<usize>,
    pub rse: f64,
    pub ssim: f64,
    pub mr_percent: f64,
}

/// Percentage of missing entries over all modes.
pub fn missing_ratio(mask: &ObservationMask) -> f64 {
    100.0 * mask.missing_count() as f64 / mask.len() as f64
}

/// Relative square error ||recovered - truth||_F / ||truth||_F.
pub fn rse(recovered: &DenseTensor, truth: &DenseTensor) -> Result<f64> {
    if recovered.shape() != truth.shape() {
        return Err(Error::ShapeMismatch(
            recovered.shape().to_vec(),
            truth.shape().to_vec(),
        ));
    }
    let denom = truth.frobenius_norm();
    if denom == 0.0 {
        return Err(Error::ZeroNormReference);
    }
    let diff: f64 = recovered
        .data()
        .iter()
        .zip(truth.data())
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    Ok(diff.sqrt() / denom)
}

/// Mean SSIM between two images on the 0..255 scale, over all fully
/// contained 11x11 windows, averaged across channels. Symmetric in its
/// arguments; 1.0 exactly when the images are identical.
///
/// Accepts rows x cols x channels tensors (or rows x cols for a single
/// plane).
pub fn ssim(a: &DenseTensor, b: &DenseTensor) -> Result<f64> {
    if a.shape() != b.shape() {
        return Err(Error::ShapeMismatch(
            a.shape().to_vec(),
            b.shape().to_vec(),
        ));
    }
    let (rows, cols, channels) = match *a.shape() {
        [r, c] => (r, c, 1),
        [r, c, ch] => (r, c, ch),
        _ => {
            return Err(Error::ShapeMismatch(
                a.shape().to_vec(),
                vec![0, 0, 3],
            ))
        }
    };
    if rows < SSIM_WINDOW || cols < SSIM_WINDOW {
        return Err(Error::WindowTooLarge {
            rows,
            cols,
            window: SSIM_WINDOW,
        });
    }
    let kernel = gaussian_kernel(SSIM_WINDOW, SSIM_SIGMA);
    let plane = rows * cols;
    let mut total = 0.0;
    for ch in 0..channels {
        let pa = &a.data()[ch * plane..(ch + 1) * plane];
        let pb = &b.data()[ch * plane..(ch + 1) * plane];
        total += plane_ssim(pa, pb, rows, cols, &kernel);
    }
    Ok(total / channels as f64)
}

fn gaussian_kernel(size: usize, sigma: f64) -> Vec<f64> {
    let half = (size / 2) as f64;
    let mut k: Vec<f64> = (0..size)
        .map(|i| (-((i as f64 - half).powi(2)) / (2.0 * sigma * sigma)).exp())
        .collect();
    let sum: f64 = k.iter().sum();
    for v in k.iter_mut() {
        *v /= sum;
    }
    k
}

/// Separable Gaussian filtering of the five moment maps, evaluated on the
/// valid region only (windows fully inside the plane).
fn plane_ssim(a: &[f64], b: &[f64], rows: usize, cols: usize, kernel: &[f64]) -> f64 {
    let win = kernel.len();
    let vr = rows - win + 1;
    let vc = cols - win + 1;
    let c1 = (SSIM_K1 * SSIM_DYNAMIC_RANGE).powi(2);
    let c2 = (SSIM_K2 * SSIM_DYNAMIC_RANGE).powi(2);

    // Filter columns (vertical pass): rows shrink to vr.
    let filter_vertical = |src: &dyn Fn(usize, usize) -> f64| -> Vec<f64> {
        let mut out = vec![0.0; vr * cols];
        for c in 0..cols {
            for r in 0..vr {
                let mut acc = 0.0;
                for (t, &kv) in kernel.iter().enumerate() {
                    acc += kv * src(r + t, c);
                }
                out[r + c * vr] = acc;
            }
        }
        out
    };
    let va = filter_vertical(&|r, c| a[r + c * rows]);
    let vb = filter_vertical(&|r, c| b[r + c * rows]);
    let vaa = filter_vertical(&|r, c| a[r + c * rows] * a[r + c * rows]);
    let vbb = filter_vertical(&|r, c| b[r + c * rows] * b[r + c * rows]);
    let vab = filter_vertical(&|r, c| a[r + c * rows] * b[r + c * rows]);

    // Horizontal pass and SSIM accumulation over the valid windows.
    let mut sum = 0.0;
    for c in 0..vc {
        for r in 0..vr {
            let mut mu_a = 0.0;
            let mut mu_b = 0.0;
            let mut m_aa = 0.0;
            let mut m_bb = 0.0;
            let mut m_ab = 0.0;
            for (t, &kv) in kernel.iter().enumerate() {
                let col = c + t;
                mu_a += kv * va[r + col * vr];
                mu_b += kv * vb[r + col * vr];
                m_aa += kv * vaa[r + col * vr];
                m_bb += kv * vbb[r + col * vr];
                m_ab += kv * vab[r + col * vr];
            }
            let var_a = m_aa - mu_a * mu_a;
            let var_b = m_bb - mu_b * mu_b;
            let cov = m_ab - mu_a * mu_b;
            let num = (2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2);
            let den = (mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2);
            sum += num / den;
        }
    }
    sum / (vr * vc) as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    fn random_image(rows: usize, cols: usize, seed: u64) -> DenseTensor {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        DenseTensor::from_fn(vec![rows, cols, 3], |_| rng.random::<f64>() * 255.0).unwrap()
    }

    #[test]
    fn missing_ratio_cases() {
        let all = ObservationMask::all_observed(vec![5, 5]).unwrap();
        assert_eq!(missing_ratio(&all), 0.0);

        let none = ObservationMask::new(vec![5, 5], vec![false; 25]).unwrap();
        assert_eq!(missing_ratio(&none), 100.0);

        let m = crate::synth::random_mask(&[10, 10, 3], 150, 1).unwrap();
        assert_eq!(missing_ratio(&m), 50.0);
        assert_eq!(missing_ratio(&m) + 100.0 * m.observed_count() as f64 / 300.0, 100.0);
    }

    #[test]
    fn rse_cases() {
        let t = random_image(4, 4, 2);
        assert_eq!(rse(&t, &t).unwrap(), 0.0);

        let doubled =
            DenseTensor::new(t.shape().to_vec(), t.data().iter().map(|v| 2.0 * v).collect())
                .unwrap();
        assert_relative_eq!(rse(&doubled, &t).unwrap(), 1.0, max_relative = 1e-12);

        let zero = DenseTensor::zeros(t.shape().to_vec()).unwrap();
        assert_relative_eq!(rse(&zero, &t).unwrap(), 1.0, max_relative = 1e-12);

        assert_eq!(rse(&t, &zero).unwrap_err(), Error::ZeroNormReference);
        let other = DenseTensor::zeros(vec![4, 4]).unwrap();
        assert!(rse(&t, &other).is_err());
    }

    #[test]
    fn rse_scales_linearly_in_the_error() {
        let t = random_image(5, 5, 3);
        let noise = random_image(5, 5, 4);
        let perturb = |scale: f64| {
            DenseTensor::new(
                t.shape().to_vec(),
                t.data()
                    .iter()
                    .zip(noise.data())
                    .map(|(a, e)| a + scale * (e / 255.0))
                    .collect(),
            )
            .unwrap()
        };
        let r1 = rse(&perturb(1.0), &t).unwrap();
        let r3 = rse(&perturb(3.0), &t).unwrap();
        assert_relative_eq!(r3, 3.0 * r1, max_relative = 1e-10);
    }

    #[test]
    fn ssim_identical_images() {
        let t = random_image(16, 20, 7);
        assert_eq!(ssim(&t, &t).unwrap(), 1.0);
    }

    #[test]
    fn ssim_constant_black_vs_white() {
        let a = DenseTensor::zeros(vec![16, 16, 3]).unwrap();
        let b = DenseTensor::new(vec![16, 16, 3], vec![255.0; 768]).unwrap();
        let s = ssim(&a, &b).unwrap();
        // Closed form for constant planes: C1 / (255^2 + C1).
        let c1 = (SSIM_K1 * SSIM_DYNAMIC_RANGE).powi(2);
        let expected = c1 / (255.0_f64.powi(2) + c1);
        assert_relative_eq!(s, expected, max_relative = 1e-12);
        assert!(s < 0.01);
    }

    #[test]
    fn ssim_is_symmetric() {
        let a = random_image(14, 18, 11);
        let b = random_image(14, 18, 12);
        assert_relative_eq!(
            ssim(&a, &b).unwrap(),
            ssim(&b, &a).unwrap(),
            max_relative = 1e-12
        );
    }

    #[test]
    fn ssim_stays_in_range_and_orders_degradation() {
        let a = random_image(20, 20, 21);
        let near = DenseTensor::new(
            a.shape().to_vec(),
            a.data().iter().map(|v| (v + 2.0).min(255.0)).collect(),
        )
        .unwrap();
        let far = random_image(20, 20, 22);
        let s_near = ssim(&a, &near).unwrap();
        let s_far = ssim(&a, &far).unwrap();
        for s in [s_near, s_far] {
            assert!((-1.0..=1.0).contains(&s));
        }
        assert!(s_near > s_far);
    }

    #[test]
    fn ssim_rejects_small_images() {
        let a = DenseTensor::zeros(vec![8, 8, 3]).unwrap();
        assert!(matches!(
            ssim(&a, &a).unwrap_err(),
            Error::WindowTooLarge { .. }
        ));
    }
}
