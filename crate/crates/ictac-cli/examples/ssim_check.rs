//! Prints this library's SSIM for two PNGs, for cross-checking.
use ictac::ssim;
use ictac_cli::io;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let a = io::load_image(args[1].as_ref()).unwrap();
    let b = io::load_image(args[2].as_ref()).unwrap();
    println!("{:.6}", ssim(&a, &b).unwrap());
}
