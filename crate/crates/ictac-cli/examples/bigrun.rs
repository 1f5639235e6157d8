//! Full-scale ICTAC experiments with optional rank continuation.
//! Usage: bigrun <fixture> <mr> <stage_caps e.g. 4,8,12,16> <iters_per_stage> [stack|inter]

use ictac::*;
use ictac_cli::{gen_mask, io};
use std::time::Instant;

fn capped(shape: &[usize], cap: usize) -> Vec<usize> {
    tensor::prefix_dims(shape)
        .iter()
        .map(|&(m, n)| m.min(n).min(cap))
        .collect()
}

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let img = io::load_image(args[1].as_ref()).unwrap();
    let mr: f64 = args[2].parse().unwrap();
    let caps: Vec<usize> = args[3].split(',').map(|s| s.parse().unwrap()).collect();
    let per_stage: usize = args[4].parse().unwrap();
    let stack = args.get(5).map(|s| s == "stack").unwrap_or(true);

    let mask = gen_mask(img.shape(), mr, 7).unwrap();
    let observed = mask.zero_missing(&img).unwrap();
    let copies = 81;
    let spec = validate_ictac_shape(img.shape(), copies, KaVariant::Modified).unwrap();
    let mode = if stack { StackMode::Stack } else { StackMode::Interleave };

    let (ci, ci_mask) = concatenate(&observed, &mask, copies).unwrap();
    let vst = to_vst(&ci, mode).unwrap();
    let vst_mask = to_vst_mask(&ci_mask, mode).unwrap();
    let aug = ka_augment(vst.tensor(), &spec).unwrap();
    let aug_mask = ka_augment_mask(&vst_mask, &spec).unwrap();
    let aug_shape = spec.augmented_shape();

    let final_profile: Option<Vec<usize>> = args
        .get(6)
        .map(|s| s.split(',').map(|v| v.parse().unwrap()).collect());
    let final_iters: usize = args.get(7).and_then(|s| s.parse().ok()).unwrap_or(120);

    let t0 = Instant::now();
    let mut current: Option<DenseTensor> = None;
    for &cap in &caps {
        let cfg = SolverConfig {
            ranks: RankSpec::Fixed(TTRankVector::new(capped(&aug_shape, cap))),
            max_iters: per_stage,
            tol: 1e-5,
            ..SolverConfig::default()
        };
        let (x, rep) = solve_from(&aug, &aug_mask, &cfg, current.as_ref()).unwrap();
        current = Some(x);
        // progress snapshot
        let vst_rec = vst_with(&vst, ka_invert(current.as_ref().unwrap(), &spec).unwrap());
        let ci_rec = from_vst(&vst_rec).unwrap();
        let mut out = extract_image(&ci_rec, ExtractMode::First).unwrap();
        mask.project_observed(&observed, &mut out).unwrap();
        println!(
            "  cap {cap}: rse {:.4} ssim {:.4} ({} iters, {:.0}s elapsed)",
            rse(&out, &img).unwrap(),
            ssim(&out, &img).unwrap(),
            rep.iterations_run,
            t0.elapsed().as_secs_f64()
        );
    }

    if let Some(profile) = final_profile {
        let cfg = SolverConfig {
            ranks: RankSpec::Fixed(TTRankVector::new(profile.clone())),
            max_iters: final_iters,
            tol: 1e-5,
            ..SolverConfig::default()
        };
        let (x, rep) = solve_from(&aug, &aug_mask, &cfg, current.as_ref()).unwrap();
        current = Some(x);
        let vst_rec = vst_with(&vst, ka_invert(current.as_ref().unwrap(), &spec).unwrap());
        let ci_rec = from_vst(&vst_rec).unwrap();
        let mut out = extract_image(&ci_rec, ExtractMode::First).unwrap();
        mask.project_observed(&observed, &mut out).unwrap();
        println!(
            "  final {profile:?}: rse {:.4} ssim {:.4} ({} iters, {:.0}s elapsed)",
            rse(&out, &img).unwrap(),
            ssim(&out, &img).unwrap(),
            rep.iterations_run,
            t0.elapsed().as_secs_f64()
        );
        io::save_image(&out, "/tmp/ictac_final.png".as_ref()).unwrap();
    }
}

fn vst_with(template: &VstTensor, tensor: DenseTensor) -> VstTensor {
    VstTensor::from_parts(
        tensor,
        template.copies(),
        template.image_rows(),
        template.stack_mode(),
    )
    .unwrap()
}
