//! Tensor completion by parallel matrix factorization over all prefix
//! unfoldings (TMac-TT).
//!
//! Each iteration updates, for every prefix length k, the pair (U_k, V_k)
//! approximating the mode-(1..k) unfolding X_[k]:
//!
//!   U_k <- X_[k] V_k^T
//!   V_k <- (U_k^T U_k)^+ U_k^T X_[k]
//!
//! then merges the refolded products into a weighted estimate
//! X <- sum_k alpha_k fold(U_k V_k) and restores the observed entries.
//! Because the linearization is first-index-fastest, every X_[k] is the
//! same buffer read with different matrix dimensions and the fold is free.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg;
use crate::mask::ObservationMask;
use crate::tensor::{prefix_dims, DenseTensor, TTRankVector};

/// The (U_k, V_k) factor pair for one prefix unfolding.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorPair {
    /// Prefix length k (1..order): the unfolding this pair factorizes.
    pub k: usize,
    /// m_k x r, column-major.
    pub u: DMatrix<f64>,
    /// r x n_k, column-major.
    pub v: DMatrix<f64>,
}

impl FactorPair {
    pub fn rank(&self) -> usize {
        self.u.ncols()
    }

    /// Checks the pair against a tensor shape.
    pub fn validate_for(&self, shape: &[usize]) -> Result<()> {
        let order = shape.len();
        if self.k == 0 || self.k >= order {
            return Err(Error::PrefixOutOfRange { k: self.k, order });
        }
        let m: usize = shape[..self.k].iter().product();
        let n: usize = shape[self.k..].iter().product();
        let r = self.rank();
        if self.u.nrows() != m || self.v.ncols() != n || self.v.nrows() != r {
            return Err(Error::ShapeMismatch(
                vec![self.u.nrows(), r, self.v.ncols()],
                vec![m, n],
            ));
        }
        if r == 0 {
            return Err(Error::RankZero(self.k));
        }
        if r > m.min(n) {
            return Err(Error::RankTooLarge {
                k: self.k,
                rank: r,
                m,
                n,
            });
        }
        Ok(())
    }
}

/// How to pick the per-prefix ranks.
#[derive(Debug, Clone, PartialEq)]
pub enum RankSpec {
    /// Smallest rank capturing the given singular-value energy fraction of
    /// each zero-filled unfolding.
    Auto { energy: f64 },
    Fixed(TTRankVector),
}

/// Merge weights alpha_k over the prefix unfoldings.
#[derive(Debug, Clone, PartialEq)]
pub enum Weights {
    Uniform,
    Custom(Vec<f64>),
}

impl Weights {
    fn resolve(&self, count: usize) -> Result<Vec<f64>> {
        match self {
            Weights::Uniform => Ok(vec![1.0 / count as f64; count]),
            Weights::Custom(w) => {
                if w.len() != count {
                    return Err(Error::RankCount {
                        expected: count,
                        found: w.len(),
                    });
                }
                let sum: f64 = w.iter().sum();
                if w.iter().any(|&x| x < 0.0) || (sum - 1.0).abs() > 1e-12 {
                    return Err(Error::BadWeights(sum));
                }
                Ok(w.clone())
            }
        }
    }
}

/// Factor initialization strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitMethod {
    /// U_k from the leading left singular vectors of the zero-filled
    /// unfolding, V_k = U_k^T X_[k].
    Svd,
    /// Seeded Gaussian U_k, V_k = U_k^T X_[k].
    Gaussian,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub ranks: RankSpec,
    pub weights: Weights,
    pub max_iters: usize,
    /// Relative-change stopping threshold on consecutive iterates.
    pub tol: f64,
    pub seed: u64,
    /// Pseudoinverse cutoff, relative to the largest singular value.
    pub pinv_cutoff: f64,
    pub init: InitMethod,
    /// Record the subproblem objective before and after every factor
    /// update (costs one extra product per update; diagnostics only).
    pub track_subproblem_objectives: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            ranks: RankSpec::Auto { energy: 0.98 },
            weights: Weights::Uniform,
            max_iters: 500,
            tol: 1e-4,
            seed: 0,
            pinv_cutoff: 1e-12,
            init: InitMethod::Svd,
            track_subproblem_objectives: false,
        }
    }
}

/// One recorded factor update: subproblem objective before and after.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SubproblemSample {
    pub iteration: usize,
    pub k: usize,
    pub before: f64,
    pub after: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveReport {
    pub iterations_run: usize,
    pub final_relative_change: f64,
    /// Per-iteration weighted objective sum_k alpha_k ||U_k V_k - X_[k]||_F^2,
    /// measured against the iterate the updates consumed.
    pub objective_history: Vec<f64>,
    pub converged: bool,
    /// The ranks actually used (resolved from the config).
    pub ranks: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub subproblem_objectives: Option<Vec<SubproblemSample>>,
}

struct Subproblem {
    m: usize,
    n: usize,
    rank: usize,
    u: Vec<f64>,
    v: Vec<f64>,
    w: Vec<f64>,
    g: Vec<f64>,
}

impl Subproblem {
    /// Exact subproblem objective ||U V - X||_F^2 with compensated
    /// summation; materializes the product.
    fn direct_objective(&self, x: &[f64]) -> f64 {
        let mut prod = vec![0.0; self.m * self.n];
        linalg::gemm_nn(self.m, self.rank, self.n, 1.0, &self.u, &self.v, 0.0, &mut prod);
        sum_squared_diff(&prod, x)
    }
}

/// One alternating update of (U, V) against the snapshot `x` read as an
/// m x n column-major matrix. Returns ||U V - X||_F^2 computed from the
/// Gram identities (no extra product).
#[allow(clippy::too_many_arguments)]
fn als_update(
    x: &[f64],
    x_norm_sq: f64,
    m: usize,
    n: usize,
    r: usize,
    u: &mut [f64],
    v: &mut [f64],
    w: &mut [f64],
    g: &mut [f64],
    cutoff: f64,
) -> f64 {
    // U = X V^T
    linalg::gemm_nt(m, n, r, 1.0, x, v, 0.0, u);
    // G = U^T U
    linalg::gemm_tn(r, m, r, 1.0, u, u, 0.0, g);
    // W = U^T X
    linalg::gemm_tn(r, m, n, 1.0, u, x, 0.0, w);
    // V = G^+ W
    let p = linalg::pinv_symmetric(&DMatrix::from_column_slice(r, r, g), cutoff);
    linalg::gemm_nn(r, r, n, 1.0, p.as_slice(), w, 0.0, v);
    // ||U V - X||^2 = ||X||^2 - 2 <V, W> + <V, G V>
    let vw = linalg::dot(v, w);
    linalg::gemm_nn(r, r, n, 1.0, g, v, 0.0, w);
    let vgv = linalg::dot(v, w);
    (x_norm_sq - 2.0 * vw + vgv).max(0.0)
}

/// Applies the alternating update to one factor pair. The subproblem
/// objective never increases across a call.
pub fn update_factors(x: &DenseTensor, pair: &FactorPair, cutoff: f64) -> Result<FactorPair> {
    pair.validate_for(x.shape())?;
    let (m, n, r) = (pair.u.nrows(), pair.v.ncols(), pair.rank());
    let mut u = pair.u.clone();
    let mut v = pair.v.clone();
    let mut w = vec![0.0; r * n];
    let mut g = vec![0.0; r * r];
    let x_norm_sq = linalg::norm_sq(x.data());
    als_update(
        x.data(),
        x_norm_sq,
        m,
        n,
        r,
        u.as_mut_slice(),
        v.as_mut_slice(),
        &mut w,
        &mut g,
        cutoff,
    );
    Ok(FactorPair { k: pair.k, u, v })
}

/// Rank selection from the singular-value energy of each zero-filled
/// unfolding: the smallest count of leading singular values whose squared
/// sum reaches `energy` times the total squared sum, clamped to
/// [1, min(m_k, n_k)].
pub fn auto_ranks(
    observed: &DenseTensor,
    mask: &ObservationMask,
    energy: f64,
) -> Result<TTRankVector> {
    if !(energy > 0.0 && energy <= 1.0) {
        return Err(Error::InvalidConfig(format!(
            "rank energy must lie in (0, 1], got {energy}"
        )));
    }
    let x = mask.zero_missing(observed)?;
    let total = linalg::norm_sq(x.data());
    let dims = prefix_dims(x.shape());
    let mut rng = ChaCha12Rng::seed_from_u64(AUTO_RANK_SEED);
    let mut ranks = Vec::with_capacity(dims.len());
    for &(m, n) in &dims {
        if total == 0.0 {
            ranks.push(1);
            continue;
        }
        let short = m.min(n);
        let cap = if short <= 1024 { short } else { RANK_PROBE_CAP };
        let svals = linalg::leading_singular_values(x.data(), m, n, cap, &mut rng);
        let smax = svals.first().copied().unwrap_or(0.0);
        let target = energy * total;
        let mut cum = 0.0;
        let mut r = 0usize;
        for &s in &svals {
            // Values at the Gram-eigensolve noise floor carry no energy.
            if s <= 1e-7 * smax {
                break;
            }
            cum += s * s;
            r += 1;
            if cum >= target {
                break;
            }
        }
        ranks.push(r.clamp(1, short));
    }
    Ok(TTRankVector::new(ranks))
}

const AUTO_RANK_SEED: u64 = 0x6b95_2a1c_41d7_03e9;
const RANK_PROBE_CAP: usize = 512;

/// Completes `observed` on the complement of the mask.
///
/// Entries of `observed` outside the mask are treated as zero regardless
/// of their value. On return the observed entries match the input exactly.
pub fn solve(
    observed: &DenseTensor,
    mask: &ObservationMask,
    cfg: &SolverConfig,
) -> Result<(DenseTensor, SolveReport)> {
    solve_from(observed, mask, cfg, None)
}

/// Runs a sequence of solves, each warm-started from the previous iterate
/// (rank continuation). Reports are merged: iteration counts add up,
/// objective histories concatenate, convergence and ranks come from the
/// final stage.
pub fn solve_schedule(
    observed: &DenseTensor,
    mask: &ObservationMask,
    stages: &[SolverConfig],
) -> Result<(DenseTensor, SolveReport)> {
    if stages.is_empty() {
        return Err(Error::InvalidConfig(
            "schedule needs at least one stage".into(),
        ));
    }
    let mut current: Option<DenseTensor> = None;
    let mut merged: Option<SolveReport> = None;
    for cfg in stages {
        let (x, report) = solve_from(observed, mask, cfg, current.as_ref())?;
        current = Some(x);
        merged = Some(match merged {
            None => report,
            Some(mut acc) => {
                acc.iterations_run += report.iterations_run;
                acc.final_relative_change = report.final_relative_change;
                acc.objective_history.extend(report.objective_history);
                acc.converged = report.converged;
                acc.ranks = report.ranks;
                if let (Some(a), Some(b)) =
                    (acc.subproblem_objectives.as_mut(), report.subproblem_objectives)
                {
                    a.extend(b);
                }
                acc
            }
        });
    }
    Ok((current.unwrap(), merged.unwrap()))
}

/// [`solve`] with an optional warm-start iterate: factor initialization and
/// the first factor updates run against `start` (with the observed entries
/// restored) instead of the zero-filled tensor.
pub fn solve_from(
    observed: &DenseTensor,
    mask: &ObservationMask,
    cfg: &SolverConfig,
    start: Option<&DenseTensor>,
) -> Result<(DenseTensor, SolveReport)> {
    if !mask.is_congruent(observed) {
        return Err(Error::ShapeMismatch(
            mask.shape().to_vec(),
            observed.shape().to_vec(),
        ));
    }
    if !mask.any_observed() {
        return Err(Error::EmptyMask);
    }
    if observed.order() < 2 {
        return Err(Error::InvalidConfig(
            "completion requires a tensor of order at least 2".into(),
        ));
    }
    if cfg.max_iters == 0 || cfg.tol <= 0.0 {
        return Err(Error::InvalidConfig(
            "max_iters must be at least 1 and tol positive".into(),
        ));
    }
    let shape = observed.shape().to_vec();
    let dims = prefix_dims(&shape);
    let weights = cfg.weights.resolve(dims.len())?;
    let zero_filled = mask.zero_missing(observed)?;
    let ranks = match &cfg.ranks {
        RankSpec::Fixed(rv) => {
            rv.validate_for(&shape)?;
            rv.ranks().to_vec()
        }
        RankSpec::Auto { energy } => auto_ranks(observed, mask, *energy)?.ranks().to_vec(),
    };

    let obs = zero_filled.data().to_vec();
    let flags = mask.flags();
    let mut x = match start {
        Some(t) => {
            if t.shape() != shape.as_slice() {
                return Err(Error::ShapeMismatch(t.shape().to_vec(), shape));
            }
            let mut x = t.data().to_vec();
            for (i, &keep) in flags.iter().enumerate() {
                if keep {
                    x[i] = obs[i];
                }
            }
            x
        }
        None => obs.clone(),
    };
    let mut x_next = vec![0.0; x.len()];

    let mut subs = init_subproblems(&x, &dims, &ranks, cfg);

    let mut history = Vec::new();
    let mut samples = cfg.track_subproblem_objectives.then(Vec::new);
    let mut converged = false;
    let mut final_rel = f64::INFINITY;
    let mut iterations = 0usize;

    for iter in 0..cfg.max_iters {
        let x_norm_sq = linalg::norm_sq(&x);

        let befores: Option<Vec<f64>> = samples
            .as_ref()
            .map(|_| subs.iter().map(|s| s.direct_objective(&x)).collect());

        let objectives: Vec<f64> = subs
            .par_iter_mut()
            .map(|s| {
                als_update(
                    &x,
                    x_norm_sq,
                    s.m,
                    s.n,
                    s.rank,
                    &mut s.u,
                    &mut s.v,
                    &mut s.w,
                    &mut s.g,
                    cfg.pinv_cutoff,
                )
            })
            .collect();

        if let Some(samples) = samples.as_mut() {
            let befores = befores.unwrap();
            for (k, s) in subs.iter().enumerate() {
                samples.push(SubproblemSample {
                    iteration: iter + 1,
                    k: k + 1,
                    before: befores[k],
                    after: s.direct_objective(&x),
                });
            }
        }

        history.push(
            objectives
                .iter()
                .zip(&weights)
                .map(|(o, a)| o * a)
                .sum::<f64>(),
        );

        merge(&subs, &weights, &mut x_next);
        for (i, &keep) in flags.iter().enumerate() {
            if keep {
                x_next[i] = obs[i];
            }
        }
        if x_next.iter().any(|v| !v.is_finite()) {
            return Err(Error::Diverged(iter + 1));
        }

        let diff_sq = sum_squared_diff(&x, &x_next);
        final_rel = if diff_sq == 0.0 {
            0.0
        } else if x_norm_sq == 0.0 {
            f64::INFINITY
        } else {
            (diff_sq / x_norm_sq).sqrt()
        };
        std::mem::swap(&mut x, &mut x_next);
        iterations = iter + 1;
        if final_rel < cfg.tol {
            converged = true;
            break;
        }
    }

    let report = SolveReport {
        iterations_run: iterations,
        final_relative_change: final_rel,
        objective_history: history,
        converged,
        ranks,
        subproblem_objectives: samples,
    };
    let recovered = DenseTensor::new(shape, x)?;
    Ok((recovered, report))
}

/// x_next = sum_k alpha_k U_k V_k, written in place. Each product is the
/// folded estimate because the unfolding is a reinterpretation.
fn merge(subs: &[Subproblem], weights: &[f64], x_next: &mut [f64]) {
    for (k, s) in subs.iter().enumerate() {
        let beta = if k == 0 { 0.0 } else { 1.0 };
        linalg::gemm_nn(s.m, s.rank, s.n, weights[k], &s.u, &s.v, beta, x_next);
    }
}

fn init_subproblems(
    x: &[f64],
    dims: &[(usize, usize)],
    ranks: &[usize],
    cfg: &SolverConfig,
) -> Vec<Subproblem> {
    dims.par_iter()
        .zip(ranks)
        .enumerate()
        .map(|(idx, (&(m, n), &r))| {
            let mut rng = ChaCha12Rng::seed_from_u64(
                cfg.seed
                    .wrapping_add((idx as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)),
            );
            let u = match cfg.init {
                InitMethod::Svd => linalg::leading_left_singular_vectors(x, m, n, r, &mut rng),
                InitMethod::Gaussian => (0..m * r)
                    .map(|_| rng.sample::<f64, _>(StandardNormal))
                    .collect(),
            };
            let mut v = vec![0.0; r * n];
            linalg::gemm_tn(r, m, n, 1.0, &u, x, 0.0, &mut v);
            Subproblem {
                m,
                n,
                rank: r,
                u,
                v,
                w: vec![0.0; r * n],
                g: vec![0.0; r * r],
            }
        })
        .collect()
}

/// Compensated sum of squared differences (Neumaier).
fn sum_squared_diff(a: &[f64], b: &[f64]) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for (&x, &y) in a.iter().zip(b) {
        let d = x - y;
        let term = d * d;
        let t = sum + term;
        if sum.abs() >= term {
            comp += (sum - t) + term;
        } else {
            comp += (term - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth;
    use approx::assert_relative_eq;

    fn rse(recovered: &DenseTensor, truth: &DenseTensor) -> f64 {
        sum_squared_diff(recovered.data(), truth.data()).sqrt() / truth.frobenius_norm()
    }

    fn fixed_cfg(ranks: Vec<usize>) -> SolverConfig {
        SolverConfig {
            ranks: RankSpec::Fixed(TTRankVector::new(ranks)),
            tol: 1e-8,
            ..SolverConfig::default()
        }
    }

    #[test]
    fn fully_observed_returns_input_exactly() {
        let t = DenseTensor::from_fn(vec![3, 4, 2], |idx| {
            (idx[0] * 5 + idx[1] * 2 + idx[2] + 1) as f64
        })
        .unwrap();
        let mask = ObservationMask::all_observed(t.shape().to_vec()).unwrap();
        let (out, report) = solve(&t, &mask, &fixed_cfg(vec![2, 2])).unwrap();
        assert_eq!(out, t);
        assert!(report.converged);
        assert_eq!(report.iterations_run, 1);
    }

    #[test]
    fn rank_one_all_ones_recovers_exactly() {
        let shape = vec![4, 4, 4];
        let truth = DenseTensor::new(shape.clone(), vec![1.0; 64]).unwrap();
        let mask = synth::random_mask(&shape, 45, 3).unwrap(); // 70% observed
        let observed = mask.zero_missing(&truth).unwrap();
        let (out, _) = solve(&observed, &mask, &fixed_cfg(vec![1, 1])).unwrap();
        assert!(rse(&out, &truth) < 1e-6, "rse {}", rse(&out, &truth));
    }

    #[test]
    fn synthetic_tt_rank_recovery() {
        let shape = vec![8, 8, 8, 8];
        let ranks = vec![2, 2, 2];
        let truth = synth::synthetic_tt_tensor(&shape, &ranks, 17).unwrap();
        let mask = synth::random_mask(&shape, truth.len() / 2, 17).unwrap();
        let observed = mask.zero_missing(&truth).unwrap();
        let (out, report) = solve(&observed, &mask, &fixed_cfg(ranks)).unwrap();
        let err = rse(&out, &truth);
        assert!(err < 1e-3, "rse {err} after {} iters", report.iterations_run);
    }

    #[test]
    fn observed_entries_survive_bitwise() {
        let shape = vec![6, 5, 4];
        let truth = synth::synthetic_tt_tensor(&shape, &[3, 3], 5).unwrap();
        let mask = synth::random_mask(&shape, 40, 9).unwrap();
        let observed = mask.zero_missing(&truth).unwrap();
        let cfg = SolverConfig {
            max_iters: 7,
            ..fixed_cfg(vec![2, 2])
        };
        let (out, _) = solve(&observed, &mask, &cfg).unwrap();
        for (i, &keep) in mask.flags().iter().enumerate() {
            if keep {
                assert_eq!(out.data()[i].to_bits(), observed.data()[i].to_bits());
            }
        }
    }

    #[test]
    fn determinism_across_runs() {
        let shape = vec![6, 6, 6];
        let truth = synth::synthetic_tt_tensor(&shape, &[2, 2], 23).unwrap();
        let mask = synth::random_mask(&shape, 100, 23).unwrap();
        let observed = mask.zero_missing(&truth).unwrap();
        let cfg = SolverConfig {
            max_iters: 12,
            ..fixed_cfg(vec![2, 2])
        };
        let (a, ra) = solve(&observed, &mask, &cfg).unwrap();
        let (b, rb) = solve(&observed, &mask, &cfg).unwrap();
        let bits = |t: &DenseTensor| t.data().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&a), bits(&b));
        assert_eq!(ra.objective_history, rb.objective_history);
    }

    #[test]
    fn gaussian_init_also_recovers() {
        let shape = vec![8, 8, 8];
        let truth = synth::synthetic_tt_tensor(&shape, &[2, 2], 31).unwrap();
        let mask = synth::random_mask(&shape, truth.len() / 4, 31).unwrap();
        let observed = mask.zero_missing(&truth).unwrap();
        let cfg = SolverConfig {
            init: InitMethod::Gaussian,
            seed: 4,
            ..fixed_cfg(vec![2, 2])
        };
        let (out, _) = solve(&observed, &mask, &cfg).unwrap();
        assert!(rse(&out, &truth) < 1e-3);
    }

    #[test]
    fn update_factors_fixed_point_keeps_zero_objective() {
        // X equals U V exactly: the objective is and stays zero.
        let m = 4;
        let n = 6;
        let r = 2;
        let u0 = DMatrix::from_fn(m, r, |i, j| (i + 2 * j + 1) as f64 * 0.3);
        let v0 = DMatrix::from_fn(r, n, |i, j| ((i * n + j) as f64).sin());
        let prod = &u0 * &v0;
        let x = DenseTensor::new(vec![4, 2, 3], prod.as_slice().to_vec()).unwrap();
        let pair = FactorPair { k: 1, u: u0, v: v0 };
        let next = update_factors(&x, &pair, 1e-12).unwrap();
        let resid = (&next.u * &next.v - &prod).norm();
        assert!(resid < 1e-10, "residual {resid}");
    }

    #[test]
    fn update_factors_respects_svd_truncation_bound() {
        // After one update the objective sits between the optimal rank-2
        // residual (SVD truncation) and the pre-update objective.
        let x = DenseTensor::from_fn(vec![6, 4], |idx| {
            ((idx[0] * 7 + idx[1] * 13 + 3) % 11) as f64 - 5.0
        })
        .unwrap();
        let r = 2;
        let mut rng = ChaCha12Rng::seed_from_u64(2);
        let u = DMatrix::from_fn(6, r, |_, _| rng.sample::<f64, _>(StandardNormal));
        let v = DMatrix::from_fn(r, 4, |_, _| rng.sample::<f64, _>(StandardNormal));
        let pair = FactorPair { k: 1, u, v };

        let mat = DMatrix::from_column_slice(6, 4, x.data());
        let before = (&pair.u * &pair.v - &mat).norm_squared();
        let next = update_factors(&x, &pair, 1e-12).unwrap();
        let after = (&next.u * &next.v - &mat).norm_squared();

        let svals = mat.singular_values();
        let optimal: f64 = svals.iter().skip(r).map(|s| s * s).sum();
        assert!(after <= before + 1e-10, "after {after} before {before}");
        assert!(after + 1e-10 >= optimal, "after {after} optimal {optimal}");
    }

    #[test]
    fn update_factors_handles_zero_columns() {
        let x = DenseTensor::from_fn(vec![4, 4], |idx| (idx[0] + idx[1]) as f64).unwrap();
        let u = DMatrix::zeros(4, 2);
        let v = DMatrix::from_fn(2, 4, |i, j| (i + j) as f64);
        let pair = FactorPair { k: 1, u, v };
        let next = update_factors(&x, &pair, 1e-12).unwrap();
        assert!(next.u.iter().chain(next.v.iter()).all(|v| v.is_finite()));
    }

    #[test]
    fn auto_ranks_full_energy_finds_true_ranks() {
        let shape = vec![6, 6, 6];
        let truth = synth::synthetic_tt_tensor(&shape, &[2, 3], 11).unwrap();
        let mask = ObservationMask::all_observed(shape).unwrap();
        let ranks = auto_ranks(&truth, &mask, 1.0).unwrap();
        assert_eq!(ranks.ranks(), &[2, 3]);
    }

    #[test]
    fn auto_ranks_tiny_energy_gives_ones() {
        let shape = vec![5, 4, 3];
        let truth = synth::synthetic_tt_tensor(&shape, &[2, 2], 19).unwrap();
        let mask = ObservationMask::all_observed(shape).unwrap();
        let ranks = auto_ranks(&truth, &mask, 1e-9).unwrap();
        assert_eq!(ranks.ranks(), &[1, 1]);
    }

    #[test]
    fn auto_ranks_rank_one_observed_pattern() {
        // Zero off the mask, rank-1 on it.
        let shape = vec![4, 4, 4];
        let t = DenseTensor::new(shape.clone(), vec![2.0; 64]).unwrap();
        let mut flags = vec![false; 64];
        flags[0] = true;
        let mask = ObservationMask::new(shape, flags).unwrap();
        let ranks = auto_ranks(&t, &mask, 0.98).unwrap();
        assert_eq!(ranks.ranks(), &[1, 1]);
    }

    #[test]
    fn merge_is_a_convex_combination() {
        // Two rank-1 subproblems of a 2x2 problem with known products.
        let make = |scale: f64| Subproblem {
            m: 2,
            n: 2,
            rank: 1,
            u: vec![scale, scale],
            v: vec![1.0, 1.0],
            w: vec![0.0; 2],
            g: vec![0.0; 1],
        };
        let subs = vec![make(1.0), make(3.0)];
        let weights = [0.25, 0.75];
        let mut out = vec![0.0; 4];
        merge(&subs, &weights, &mut out);
        // Products are all-1 and all-3; the merge must land inside [1, 3].
        for &v in &out {
            assert!((1.0..=3.0).contains(&v));
            assert_relative_eq!(v, 2.5, max_relative = 1e-15);
        }
    }

    #[test]
    fn tracked_objectives_never_increase() {
        let shape = vec![6, 6, 6];
        let truth = synth::synthetic_tt_tensor(&shape, &[3, 3], 41).unwrap();
        let mask = synth::random_mask(&shape, 70, 41).unwrap();
        let observed = mask.zero_missing(&truth).unwrap();
        let cfg = SolverConfig {
            max_iters: 25,
            track_subproblem_objectives: true,
            ..fixed_cfg(vec![2, 2])
        };
        let (_, report) = solve(&observed, &mask, &cfg).unwrap();
        let samples = report.subproblem_objectives.unwrap();
        assert!(!samples.is_empty());
        for s in &samples {
            assert!(
                s.after <= s.before + 1e-10,
                "iter {} k {}: {} -> {}",
                s.iteration,
                s.k,
                s.before,
                s.after
            );
        }
    }

    #[test]
    fn error_paths() {
        let t = DenseTensor::zeros(vec![4, 4]).unwrap();
        let empty = ObservationMask::new(vec![4, 4], vec![false; 16]).unwrap();
        assert_eq!(
            solve(&t, &empty, &SolverConfig::default()).unwrap_err(),
            Error::EmptyMask
        );

        let mask = ObservationMask::all_observed(vec![4, 4]).unwrap();
        let too_big = fixed_cfg(vec![5]);
        assert!(matches!(
            solve(&t, &mask, &too_big).unwrap_err(),
            Error::RankTooLarge { .. }
        ));

        let t3 = DenseTensor::zeros(vec![4, 4, 4]).unwrap();
        let mask3 = ObservationMask::all_observed(vec![4, 4, 4]).unwrap();
        let cfg3 = SolverConfig {
            weights: Weights::Custom(vec![0.9, 0.3]),
            ..fixed_cfg(vec![2, 2])
        };
        assert!(matches!(
            solve(&t3, &mask3, &cfg3).unwrap_err(),
            Error::BadWeights(_)
        ));

        let vec_mask = ObservationMask::all_observed(vec![4]).unwrap();
        let vec_t = DenseTensor::zeros(vec![4]).unwrap();
        assert!(solve(&vec_t, &vec_mask, &SolverConfig::default()).is_err());
    }

    #[test]
    fn overflow_is_reported_as_divergence() {
        let shape = vec![4, 4];
        let t = DenseTensor::new(shape.clone(), vec![1e200; 16]).unwrap();
        let mut flags = vec![true; 16];
        flags[5] = false;
        let mask = ObservationMask::new(shape, flags).unwrap();
        let cfg = SolverConfig {
            init: InitMethod::Gaussian,
            ..fixed_cfg(vec![1])
        };
        match solve(&t, &mask, &cfg) {
            Err(Error::Diverged(_)) => {}
            Ok((out, _)) => assert!(out.data().iter().all(|v| v.is_finite())),
            Err(e) => panic!("unexpected error {e}"),
        }
    }
}
