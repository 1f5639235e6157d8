//! Plain fixed-rank baseline sweeps at 256 scale (criterion-band checks).
use ictac::*;
use ictac_cli::{gen_mask, io};

fn capped(shape: &[usize], cap: usize) -> Vec<usize> {
    tensor::prefix_dims(shape).iter().map(|&(m, n)| m.min(n).min(cap)).collect()
}

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let img = io::load_image(args[1].as_ref()).unwrap();
    let mr: f64 = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(80.0);
    let iters: usize = args.get(3).and_then(|s| s.parse().ok()).unwrap_or(300);
    let mask = gen_mask(img.shape(), mr, 7).unwrap();
    let spec = KaSpec::for_shape(img.shape(), KaVariant::Original).unwrap();
    let aug_shape = spec.augmented_shape();
    for cap in [8usize, 10, 12, 14, 16, 20] {
        let cfg = PipelineConfig {
            ka_variant: KaVariant::Original,
            solver: SolverConfig {
                ranks: RankSpec::Fixed(TTRankVector::new(capped(&aug_shape, cap))),
                max_iters: iters,
                tol: 1e-5,
                ..SolverConfig::default()
            },
            ..PipelineConfig::default()
        };
        let (out, rep) = run_ka_tmactt(&img, &mask, &cfg).unwrap();
        println!(
            "cap {cap:2} iters<={iters}: rse {:.4} ssim {:.4} ran {}",
            rse(&out, &img).unwrap(),
            ssim(&out, &img).unwrap(),
            rep.iterations_run
        );
    }
}
