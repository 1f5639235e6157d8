//! Rank/iteration sweeps on the checked-in fixtures. Scratch harness for
//! calibrating the acceptance thresholds.

use std::time::Instant;

use ictac::*;
use ictac_cli::{gen_mask, io};

fn capped_ranks(shape: &[usize], cap: usize) -> Vec<usize> {
    tensor::prefix_dims(shape)
        .iter()
        .map(|&(m, n)| m.min(n).min(cap))
        .collect()
}

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let which = args.get(1).map(|s| s.as_str()).unwrap_or("ka");

    if which == "ka" {
        // KA+TMac-TT on 256x256 at mr=80.
        let img = io::load_image("fixtures/chelsea_256x256.png".as_ref()).unwrap();
        let mask = gen_mask(img.shape(), 80.0, 7).unwrap();
        let spec = KaSpec::for_shape(img.shape(), KaVariant::Original).unwrap();
        let aug_shape = spec.augmented_shape();
        let dims = tensor::prefix_dims(&aug_shape);
        let min_dim_weights = {
            let d: Vec<f64> = dims.iter().map(|&(m, n)| m.min(n) as f64).collect();
            let s: f64 = d.iter().sum();
            Weights::Custom(d.iter().map(|v| v / s).collect())
        };
        for cap in [10usize, 14, 20, 28] {
            for (wname, w) in [("uniform", Weights::Uniform), ("mindim", min_dim_weights.clone())] {
                let ranks = capped_ranks(&aug_shape, cap);
                let cfg = PipelineConfig {
                    ka_variant: KaVariant::Original,
                    solver: SolverConfig {
                        ranks: RankSpec::Fixed(TTRankVector::new(ranks.clone())),
                        weights: w,
                        max_iters: 1500,
                        tol: 1e-6,
                        ..SolverConfig::default()
                    },
                    ..PipelineConfig::default()
                };
                let t0 = Instant::now();
                let (out, rep) = run_ka_tmactt(&img, &mask, &cfg).unwrap();
                println!(
                    "ka cap {cap:3} {wname:7} -> rse {:.4} ssim {:.4} iters {} {:.1}s",
                    rse(&out, &img).unwrap(),
                    ssim(&out, &img).unwrap(),
                    rep.iterations_run,
                    t0.elapsed().as_secs_f64()
                );
            }
        }
    }

    if which == "ictac" {
        let img = io::load_image("fixtures/chelsea_243x512.png".as_ref()).unwrap();
        let mr: f64 = args.get(5).and_then(|s| s.parse().ok()).unwrap_or(80.0);
        let mask = gen_mask(img.shape(), mr, 7).unwrap();
        let vst_shape = [81 * 243, 512, 3];
        let spec = KaSpec::for_shape(&vst_shape, KaVariant::Modified).unwrap();
        let aug_shape = spec.augmented_shape();
        let cap_or_profile = args.get(2).cloned().unwrap_or_else(|| "14".to_string());
        let iters: usize = args.get(3).and_then(|s| s.parse().ok()).unwrap_or(60);
        let stack = args.get(4).map(|s| s == "stack").unwrap_or(false);
        let ranks: Vec<usize> = if cap_or_profile.contains(',') {
            cap_or_profile
                .split(',')
                .map(|s| s.parse().unwrap())
                .collect()
        } else {
            capped_ranks(&aug_shape, cap_or_profile.parse().unwrap())
        };
        let cap = &cap_or_profile;
        let cfg = PipelineConfig {
            copies: 81,
            stack_mode: if stack {
                StackMode::Stack
            } else {
                StackMode::Interleave
            },
            extract_mode: ExtractMode::Average,
            solver: SolverConfig {
                ranks: RankSpec::Fixed(TTRankVector::new(ranks.clone())),
                max_iters: iters,
                tol: 1e-6,
                ..SolverConfig::default()
            },
            ..PipelineConfig::default()
        };
        let t0 = Instant::now();
        let (out, rep) = run_ictac(&img, &mask, &cfg).unwrap();
        println!(
            "ictac mr {mr} cap {cap} stack={stack} ranks {ranks:?} -> rse {:.4} ssim {:.4} iters {} {:.1}s",
            rse(&out, &img).unwrap(),
            ssim(&out, &img).unwrap(),
            rep.iterations_run,
            t0.elapsed().as_secs_f64()
        );
    }
}
