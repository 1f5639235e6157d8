//! Color-image completion via tensor augmentation.
//!
//! The library recovers missing entries of RGB images by casting them into
//! high-order tensors and completing those with a tensor-train rank based
//! alternating factorization:
//!
//! - [`tensor`]: dense N-order tensors, matricizations and TT ranks.
//! - [`ka`]: ket augmentation (block-structured reshaping) and its inverse.
//! - [`solver`]: the TMac-TT completion solver over all prefix unfoldings.
//! - [`pipeline`]: the ICTAC concatenated pipeline and the single-image
//!   baselines.
//! - [`metrics`]: missing ratio, relative square error and SSIM.
//! - [`synth`]: seeded synthetic tensors and masks for benchmarks.

pub mod error;
pub mod ka;
pub mod linalg;
pub mod mask;
pub mod metrics;
pub mod pipeline;
pub mod solver;
pub mod synth;
pub mod tensor;

pub use error::{Error, Result};
pub use ka::{ka_augment, ka_augment_mask, ka_invert, ka_invert_mask, KaSpec, KaVariant};
pub use mask::ObservationMask;
pub use metrics::{missing_ratio, rse, ssim, MetricsReport};
pub use pipeline::{
    concatenate, extract_image, from_vst, run_ictac, run_ka_tmactt, run_tmac_tt, to_vst,
    to_vst_mask, validate_ictac_shape, ExtractMode, PipelineConfig, StackMode, VstTensor,
};
pub use solver::{
    auto_ranks, solve, solve_from, update_factors, FactorPair, InitMethod, RankSpec, SolveReport,
    SolverConfig, SubproblemSample, Weights,
};
pub use tensor::{DenseTensor, MatricizedView, Split, TTRankVector};
