//! Property tests: matricization roundtrips, the index-map oracle for
//! mode-n unfolding, norm invariance, augmentation bijectivity and the
//! metric identities.

use ictac::*;
use proptest::collection::vec as pvec;
use proptest::prelude::*;

fn shapes(max_order: usize, max_dim: usize) -> impl Strategy<Value = Vec<usize>> {
    pvec(1..=max_dim, 1..=max_order)
}

fn tensors(max_order: usize, max_dim: usize) -> impl Strategy<Value = DenseTensor> {
    shapes(max_order, max_dim).prop_flat_map(|shape| {
        let len = shape.iter().product::<usize>();
        pvec(-10.0..10.0f64, len..=len)
            .prop_map(move |data| DenseTensor::new(shape.clone(), data).unwrap())
    })
}

/// Row and one-based column of an element under mode-n unfolding, computed
/// by direct enumeration of the index map: j = 1 + sum_{k != n} (i_k - 1) J_k
/// with J_k the product of the mode sizes before k, skipping n.
fn index_map_oracle(shape: &[usize], idx: &[usize], n: usize) -> (usize, usize) {
    let mut j = 1usize;
    for k in 0..shape.len() {
        if k == n {
            continue;
        }
        let mut jk = 1usize;
        for m in 0..k {
            if m == n {
                continue;
            }
            jk *= shape[m];
        }
        j += idx[k] * jk; // idx is zero-based, so idx[k] = i_k - 1
    }
    (idx[n] + 1, j)
}

fn for_each_index(shape: &[usize], mut f: impl FnMut(&[usize])) {
    let len: usize = shape.iter().product();
    let mut idx = vec![0usize; shape.len()];
    for _ in 0..len {
        f(&idx);
        for (i, &s) in idx.iter_mut().zip(shape) {
            *i += 1;
            if *i < s {
                break;
            }
            *i = 0;
        }
    }
}

proptest! {
    #[test]
    fn unfold_fold_roundtrips(t in tensors(4, 4)) {
        for n in 0..t.order() {
            let view = t.unfold_mode(n).unwrap();
            prop_assert_eq!(view.fold().unwrap(), t.clone());
        }
        for k in 1..t.order() {
            let view = t.unfold_prefix(k).unwrap();
            prop_assert_eq!(view.fold().unwrap(), t.clone());
        }
    }

    #[test]
    fn unfold_mode_matches_index_map_oracle(t in tensors(4, 4)) {
        for n in 0..t.order() {
            let view = t.unfold_mode(n).unwrap();
            for_each_index(t.shape(), |idx| {
                let (row, col) = index_map_oracle(t.shape(), idx, n);
                assert_eq!(view.get(row - 1, col - 1), t.get(idx));
            });
        }
    }

    #[test]
    fn norm_is_invariant_under_rearrangement(t in tensors(4, 4)) {
        let norm = t.frobenius_norm();
        let rev: Vec<usize> = (0..t.order()).rev().collect();
        let p = t.permute(&rev).unwrap();
        prop_assert!((p.frobenius_norm() - norm).abs() <= 1e-12 * (1.0 + norm));
        let flat = t.reshape(&[t.len()]).unwrap();
        prop_assert!((flat.frobenius_norm() - norm).abs() <= 1e-12 * (1.0 + norm));
    }

    #[test]
    fn tt_ranks_respect_unfolding_bounds(t in tensors(4, 4)) {
        let ranks = t.tt_ranks(1e-10).unwrap();
        let dims = tensor::prefix_dims(t.shape());
        for (r, (m, n)) in ranks.ranks().iter().zip(dims) {
            prop_assert!(*r <= m.min(n));
        }
    }

    #[test]
    fn reshape_then_reshape_back_is_identity(t in tensors(4, 4)) {
        let flat = t.reshape(&[t.len()]).unwrap();
        prop_assert_eq!(flat.reshape(t.shape()).unwrap(), t);
    }

    #[test]
    fn ka_roundtrip_with_random_masks(
        n in 1usize..=3,
        seed in 0u64..1000,
        original in proptest::bool::ANY,
    ) {
        let (variant, rows) = if original {
            (KaVariant::Original, 2usize.pow(n as u32))
        } else {
            (KaVariant::Modified, 3usize.pow(n as u32))
        };
        let shape = vec![rows, 2usize.pow(n as u32), 3];
        let spec = KaSpec::for_shape(&shape, variant).unwrap();
        let t = synth::synthetic_tt_tensor(
            &shape,
            &vec![2; shape.len() - 1],
            seed,
        ).unwrap();
        let aug = ka_augment(&t, &spec).unwrap();
        prop_assert_eq!(ka_invert(&aug, &spec).unwrap(), t.clone());

        let len = t.len();
        let mask = synth::random_mask(&shape, len / 3, seed).unwrap();
        let aug_mask = ka_augment_mask(&mask, &spec).unwrap();
        prop_assert_eq!(aug_mask.missing_count(), mask.missing_count());
        // Zeroing then inverting commutes with zeroing in image space.
        let a = ka_invert(&aug_mask.zero_missing(&aug).unwrap(), &spec).unwrap();
        let b = mask.zero_missing(&t).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn rse_identity_and_homogeneity(t in tensors(3, 4), scale in 0.1..5.0f64) {
        prop_assume!(t.frobenius_norm() > 1e-9);
        prop_assert_eq!(rse(&t, &t).unwrap(), 0.0);
        let shifted = DenseTensor::new(
            t.shape().to_vec(),
            t.data().iter().map(|v| v + scale).collect(),
        ).unwrap();
        let base = rse(&shifted, &t).unwrap();
        let shifted2 = DenseTensor::new(
            t.shape().to_vec(),
            t.data().iter().map(|v| v + 2.0 * scale).collect(),
        ).unwrap();
        let doubled = rse(&shifted2, &t).unwrap();
        prop_assert!((doubled - 2.0 * base).abs() <= 1e-9 * (1.0 + doubled));
    }

    #[test]
    fn missing_plus_observed_is_total(shape in shapes(3, 6), seed in 0u64..500) {
        let len: usize = shape.iter().product();
        let mask = synth::random_mask(&shape, len / 2, seed).unwrap();
        let observed_pct = 100.0 * mask.observed_count() as f64 / len as f64;
        prop_assert_eq!(missing_ratio(&mask) + observed_pct, 100.0);
    }
}

#[test]
fn vst_roundtrip_randomized() {
    for seed in 0..20u64 {
        let i1 = 1 + (seed as usize % 5);
        let i2 = 2 + (seed as usize % 4);
        let copies = 1 + (seed as usize % 6);
        let img = synth::synthetic_tt_tensor(&[i1, i2, 3], &[1, 1], seed).unwrap();
        let mask = ObservationMask::all_observed(vec![i1, i2, 3]).unwrap();
        let (ci, _) = concatenate(&img, &mask, copies).unwrap();
        for mode in [StackMode::Interleave, StackMode::Stack] {
            let vst = to_vst(&ci, mode).unwrap();
            assert_eq!(from_vst(&vst).unwrap(), ci);
        }
    }
}

#[test]
fn ssim_bounds_and_self_similarity() {
    for seed in 0..10u64 {
        let a = synth::synthetic_tt_tensor(&[13, 15, 3], &[3, 2], seed).unwrap();
        let scaled = DenseTensor::new(
            a.shape().to_vec(),
            a.data().iter().map(|v| 127.0 + 40.0 * v.tanh()).collect(),
        )
        .unwrap();
        assert_eq!(ssim(&scaled, &scaled).unwrap(), 1.0);
        let b = synth::synthetic_tt_tensor(&[13, 15, 3], &[3, 2], seed + 100).unwrap();
        let other = DenseTensor::new(
            b.shape().to_vec(),
            b.data().iter().map(|v| 127.0 + 40.0 * v.tanh()).collect(),
        )
        .unwrap();
        let s = ssim(&scaled, &other).unwrap();
        assert!((-1.0..=1.0).contains(&s));
        assert!((ssim(&other, &scaled).unwrap() - s).abs() < 1e-12);
    }
}
