//! Rank-continuation experiments on the 256x256 baseline (fast scale).

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
    let fixture = std::env::var("ANNEAL_FIXTURE")
        .unwrap_or_else(|_| "fixtures/chelsea_256x256.png".to_string());
    let img = io::load_image(fixture.as_ref()).unwrap();
    let mask = gen_mask(img.shape(), 80.0, 7).unwrap();
    let spec = KaSpec::for_shape(img.shape(), KaVariant::Original).unwrap();
    let aug_shape = spec.augmented_shape();
    let observed_img = mask.zero_missing(&img).unwrap();
    let aug = ka_augment(&observed_img, &spec).unwrap();
    let aug_mask = ka_augment_mask(&mask, &spec).unwrap();

    let eval = |x: &DenseTensor| {
        let rec = ka_invert(x, &spec).unwrap();
        let mut out = rec.clone();
        mask.project_observed(&observed_img, &mut out).unwrap();
        (rse(&out, &img).unwrap(), ssim(&out, &img).unwrap())
    };

    // Fixed-rank references.
    for cap in [10usize, 16, 20] {
        let cfg = SolverConfig {
            ranks: RankSpec::Fixed(TTRankVector::new(capped(&aug_shape, cap))),
            max_iters: 600,
            tol: 1e-6,
            ..SolverConfig::default()
        };
        let t0 = Instant::now();
        let (x, rep) = solve(&aug, &aug_mask, &cfg).unwrap();
        let (r, s) = eval(&x);
        println!(
            "fixed cap {cap:2}: rse {r:.4} ssim {s:.4} iters {} {:.1}s",
            rep.iterations_run,
            t0.elapsed().as_secs_f64()
        );
    }

    // Continuation schedules: caps with per-stage iteration budgets.
    let schedules: Vec<(Vec<usize>, usize)> = vec![
        (vec![4, 8, 12, 16, 20], 120),
        (vec![2, 4, 6, 8, 10, 12, 14, 16, 18, 20], 80),
        (vec![4, 8, 12, 16, 20, 24, 28], 120),
    ];
    for (caps, per_stage) in schedules {
        let t0 = Instant::now();
        let mut current: Option<DenseTensor> = None;
        let mut iters = 0;
        for &cap in &caps {
            let cfg = SolverConfig {
                ranks: RankSpec::Fixed(TTRankVector::new(capped(&aug_shape, cap))),
                max_iters: per_stage,
                tol: 1e-5,
                ..SolverConfig::default()
            };
            let (x, rep) = solve_from(&aug, &aug_mask, &cfg, current.as_ref()).unwrap();
            iters += rep.iterations_run;
            current = Some(x);
        }
        let (r, s) = eval(current.as_ref().unwrap());
        println!(
            "anneal {caps:?} x{per_stage}: rse {r:.4} ssim {s:.4} iters {iters} {:.1}s",
            t0.elapsed().as_secs_f64()
        );
        let rec = ka_invert(current.as_ref().unwrap(), &spec).unwrap();
        let mut out = rec.clone();
        mask.project_observed(&observed_img, &mut out).unwrap();
        io::save_image(&out, "/tmp/rec256.png".as_ref()).unwrap();
    }

    // Continuation into explicit final profiles (mid-heavy capacity).
    let dims = tensor::prefix_dims(&aug_shape);
    let mins: Vec<usize> = dims.iter().map(|&(m, n)| m.min(n)).collect();
    let finals: Vec<Vec<usize>> = vec![
        mins.iter().map(|&d| d.min(28)).collect(),
        vec![4, 16, 40, 56, 48, 28, 12, 3],
        vec![4, 16, 48, 72, 56, 32, 12, 3],
    ];
    for final_profile in finals {
        let t0 = Instant::now();
        let mut current: Option<DenseTensor> = None;
        for &cap in &[4usize, 8, 12, 16, 20, 24] {
            let cfg = SolverConfig {
                ranks: RankSpec::Fixed(TTRankVector::new(capped(&aug_shape, cap))),
                max_iters: 100,
                tol: 1e-5,
                ..SolverConfig::default()
            };
            let (x, _) = solve_from(&aug, &aug_mask, &cfg, current.as_ref()).unwrap();
            current = Some(x);
        }
        let cfg = SolverConfig {
            ranks: RankSpec::Fixed(TTRankVector::new(final_profile.clone())),
            max_iters: 200,
            tol: 1e-6,
            ..SolverConfig::default()
        };
        let (x, _) = solve_from(&aug, &aug_mask, &cfg, current.as_ref()).unwrap();
        let (r, s) = eval(&x);
        println!(
            "anneal->profile {final_profile:?}: rse {r:.4} ssim {s:.4} {:.1}s",
            t0.elapsed().as_secs_f64()
        );
    }
}

// (appended) save the last annealed recovery for offline inspection
