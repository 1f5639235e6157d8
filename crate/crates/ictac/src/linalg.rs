//! Column-major matrix kernels shared by the solver and rank estimation.
//!
//! All buffers are interpreted column-major (element (i, j) of an m x n
//! matrix at `i + j*m`), matching the tensor linearization. Multiplication
//! goes through `matrixmultiply`; factorizations of small matrices go
//! through `nalgebra`.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

/// C (m x n) = alpha * A (m x k) * B (k x n) + beta * C.
pub fn gemm_nn(
    m: usize,
    k: usize,
    n: usize,
    alpha: f64,
    a: &[f64],
    b: &[f64],
    beta: f64,
    c: &mut [f64],
) {
    debug_assert!(a.len() >= m * k && b.len() >= k * n && c.len() >= m * n);
    if m == 0 || n == 0 || k == 0 {
        return;
    }
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            alpha,
            a.as_ptr(),
            1,
            m as isize,
            b.as_ptr(),
            1,
            k as isize,
            beta,
            c.as_mut_ptr(),
            1,
            m as isize,
        );
    }
}

/// C (m x n) = alpha * A^T * B + beta * C, with A stored k x m.
pub fn gemm_tn(
    m: usize,
    k: usize,
    n: usize,
    alpha: f64,
    a: &[f64],
    b: &[f64],
    beta: f64,
    c: &mut [f64],
) {
    debug_assert!(a.len() >= k * m && b.len() >= k * n && c.len() >= m * n);
    if m == 0 || n == 0 || k == 0 {
        return;
    }
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            alpha,
            a.as_ptr(),
            k as isize,
            1,
            b.as_ptr(),
            1,
            k as isize,
            beta,
            c.as_mut_ptr(),
            1,
            m as isize,
        );
    }
}

/// C (m x n) = alpha * A * B^T + beta * C, with B stored n x k.
pub fn gemm_nt(
    m: usize,
    k: usize,
    n: usize,
    alpha: f64,
    a: &[f64],
    b: &[f64],
    beta: f64,
    c: &mut [f64],
) {
    debug_assert!(a.len() >= m * k && b.len() >= n * k && c.len() >= m * n);
    if m == 0 || n == 0 || k == 0 {
        return;
    }
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            alpha,
            a.as_ptr(),
            1,
            m as isize,
            b.as_ptr(),
            n as isize,
            1,
            beta,
            c.as_mut_ptr(),
            1,
            m as isize,
        );
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm_sq(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum()
}

/// Singular values of an m x n column-major matrix, unordered filtering is
/// left to the caller. Exact (full bidiagonal SVD); small matrices only.
pub fn singular_values(data: &[f64], m: usize, n: usize) -> Vec<f64> {
    let mat = DMatrix::from_column_slice(m, n, data);
    mat.singular_values().as_slice().to_vec()
}

/// Moore-Penrose pseudoinverse of a symmetric PSD matrix (such as U^T U),
/// zeroing eigenvalues below `cutoff` times the largest.
pub fn pinv_symmetric(g: &DMatrix<f64>, cutoff: f64) -> DMatrix<f64> {
    let r = g.nrows();
    debug_assert_eq!(r, g.ncols());
    if r == 0 {
        return g.clone();
    }
    let eig = SymmetricEigen::new(g.clone());
    let max = eig
        .eigenvalues
        .iter()
        .cloned()
        .fold(0.0_f64, |acc, v| acc.max(v.abs()));
    let threshold = cutoff * max;
    let mut inv = DMatrix::zeros(r, r);
    for (i, &lambda) in eig.eigenvalues.iter().enumerate() {
        if lambda.abs() > threshold && lambda != 0.0 {
            let q = eig.eigenvectors.column(i);
            // inv += q q^T / lambda
            for c in 0..r {
                let scale = q[c] / lambda;
                for rr in 0..r {
                    inv[(rr, c)] += q[rr] * scale;
                }
            }
        }
    }
    inv
}

/// Leading left singular vectors of an m x n column-major matrix.
///
/// Returns an m x r column-major buffer. Uses an exact Gram eigensolve when
/// the short side is small, and seeded randomized subspace iteration
/// otherwise. Columns beyond the numerical rank are filled with Gaussian
/// draws from `rng` so the result always has r usable columns.
pub fn leading_left_singular_vectors(
    data: &[f64],
    m: usize,
    n: usize,
    r: usize,
    rng: &mut ChaCha12Rng,
) -> Vec<f64> {
    let r = r.min(m).min(n).max(1);
    let mut u = if m.min(n) <= EXACT_GRAM_LIMIT {
        exact_left_singular_vectors(data, m, n, r)
    } else {
        randomized_left_singular_vectors(data, m, n, r, rng)
    };
    // Replace any dead columns so the factor never starts with zero rank.
    for col in 0..r {
        let s = &u[col * m..(col + 1) * m];
        if norm_sq(s) < 1e-300 {
            let fresh = &mut u[col * m..(col + 1) * m];
            for v in fresh.iter_mut() {
                *v = rng.sample::<f64, _>(StandardNormal);
            }
            let scale = 1.0 / norm_sq(fresh).sqrt();
            for v in fresh.iter_mut() {
                *v *= scale;
            }
        }
    }
    u
}

/// Leading singular values (descending), stopping after `max_count` values.
/// Same exact/randomized split as the singular-vector path.
pub fn leading_singular_values(
    data: &[f64],
    m: usize,
    n: usize,
    max_count: usize,
    rng: &mut ChaCha12Rng,
) -> Vec<f64> {
    let cap = max_count.min(m).min(n);
    if cap == 0 {
        return Vec::new();
    }
    if m.min(n) <= EXACT_GRAM_LIMIT {
        let mut vals = gram_singular_values(data, m, n);
        vals.truncate(cap);
        vals
    } else {
        let (_, vals) = randomized_svd_core(data, m, n, cap, rng);
        vals
    }
}

const EXACT_GRAM_LIMIT: usize = 1024;
const OVERSAMPLE: usize = 10;
const POWER_ITERS: usize = 2;

/// All singular values via the Gram matrix of the short side, descending.
fn gram_singular_values(data: &[f64], m: usize, n: usize) -> Vec<f64> {
    let short = m.min(n);
    let mut g = vec![0.0; short * short];
    if m <= n {
        // G = X X^T (m x m)
        gemm_nt(m, n, m, 1.0, data, data, 0.0, &mut g);
    } else {
        // G = X^T X (n x n)
        gemm_tn(n, m, n, 1.0, data, data, 0.0, &mut g);
    }
    let gm = DMatrix::from_column_slice(short, short, &g);
    let eig = SymmetricEigen::new(gm);
    let mut vals: Vec<f64> = eig
        .eigenvalues
        .iter()
        .map(|&l| l.max(0.0).sqrt())
        .collect();
    vals.sort_by(|a, b| b.partial_cmp(a).unwrap());
    vals
}

fn exact_left_singular_vectors(data: &[f64], m: usize, n: usize, r: usize) -> Vec<f64> {
    if m <= n {
        // Eigenvectors of X X^T are the left singular vectors.
        let mut g = vec![0.0; m * m];
        gemm_nt(m, n, m, 1.0, data, data, 0.0, &mut g);
        let eig = SymmetricEigen::new(DMatrix::from_column_slice(m, m, &g));
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&a, &b| {
            eig.eigenvalues[b]
                .partial_cmp(&eig.eigenvalues[a])
                .unwrap()
        });
        let mut u = vec![0.0; m * r];
        for (col, &src) in order.iter().take(r).enumerate() {
            if eig.eigenvalues[src] <= 0.0 {
                continue;
            }
            for row in 0..m {
                u[col * m + row] = eig.eigenvectors[(row, src)];
            }
        }
        u
    } else {
        // Right singular vectors from X^T X, then U = X V / sigma.
        let mut g = vec![0.0; n * n];
        gemm_tn(n, m, n, 1.0, data, data, 0.0, &mut g);
        let eig = SymmetricEigen::new(DMatrix::from_column_slice(n, n, &g));
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| {
            eig.eigenvalues[b]
                .partial_cmp(&eig.eigenvalues[a])
                .unwrap()
        });
        let mut v = vec![0.0; n * r];
        let mut sigmas = vec![0.0; r];
        for (col, &src) in order.iter().take(r).enumerate() {
            let lambda = eig.eigenvalues[src].max(0.0);
            sigmas[col] = lambda.sqrt();
            for row in 0..n {
                v[col * n + row] = eig.eigenvectors[(row, src)];
            }
        }
        let mut u = vec![0.0; m * r];
        gemm_nn(m, n, r, 1.0, data, &v, 0.0, &mut u);
        for col in 0..r {
            if sigmas[col] > 0.0 {
                let inv = 1.0 / sigmas[col];
                for row in 0..m {
                    u[col * m + row] *= inv;
                }
            } else {
                for row in 0..m {
                    u[col * m + row] = 0.0;
                }
            }
        }
        u
    }
}

fn randomized_left_singular_vectors(
    data: &[f64],
    m: usize,
    n: usize,
    r: usize,
    rng: &mut ChaCha12Rng,
) -> Vec<f64> {
    let (q, _) = randomized_svd_core(data, m, n, r, rng);
    q
}

/// Randomized range finder with power iteration: returns (approximate
/// leading left singular vectors m x r, singular value estimates).
fn randomized_svd_core(
    data: &[f64],
    m: usize,
    n: usize,
    r: usize,
    rng: &mut ChaCha12Rng,
) -> (Vec<f64>, Vec<f64>) {
    let p = (r + OVERSAMPLE).min(m).min(n);
    // Y = X * Omega, Omega n x p Gaussian.
    let mut omega = vec![0.0; n * p];
    for v in omega.iter_mut() {
        *v = rng.sample::<f64, _>(StandardNormal);
    }
    let mut y = vec![0.0; m * p];
    gemm_nn(m, n, p, 1.0, data, &omega, 0.0, &mut y);
    orthonormalize_columns(&mut y, m, p);
    let mut z = vec![0.0; n * p];
    for _ in 0..POWER_ITERS {
        gemm_tn(n, m, p, 1.0, data, &y, 0.0, &mut z);
        gemm_nn(m, n, p, 1.0, data, &z, 0.0, &mut y);
        orthonormalize_columns(&mut y, m, p);
    }
    // B = Q^T X (p x n); small SVD of B via its Gram matrix.
    let mut b = vec![0.0; p * n];
    gemm_tn(p, m, n, 1.0, &y, data, 0.0, &mut b);
    let mut bbt = vec![0.0; p * p];
    gemm_nt(p, n, p, 1.0, &b, &b, 0.0, &mut bbt);
    let eig = SymmetricEigen::new(DMatrix::from_column_slice(p, p, &bbt));
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .unwrap()
    });
    let keep = r.min(p);
    let mut w = vec![0.0; p * keep];
    let mut sigmas = Vec::with_capacity(keep);
    for (col, &src) in order.iter().take(keep).enumerate() {
        sigmas.push(eig.eigenvalues[src].max(0.0).sqrt());
        for row in 0..p {
            w[col * p + row] = eig.eigenvectors[(row, src)];
        }
    }
    let mut u = vec![0.0; m * keep];
    gemm_nn(m, p, keep, 1.0, &y, &w, 0.0, &mut u);
    (u, sigmas)
}

/// Cholesky-based column orthonormalization applied twice, with a Gram-
/// Schmidt fallback when the Gram matrix is numerically singular.
fn orthonormalize_columns(y: &mut [f64], m: usize, p: usize) {
    for _ in 0..2 {
        let mut g = vec![0.0; p * p];
        gemm_tn(p, m, p, 1.0, y, y, 0.0, &mut g);
        let gm = DMatrix::from_column_slice(p, p, &g);
        match gm.cholesky() {
            Some(chol) => {
                // Y <- Y * L^{-T}
                let l = chol.l();
                let mut out = vec![0.0; m * p];
                // Solve column by column: Y L^{-T}: iterate columns of result.
                // L^{-T} is upper triangular; forward substitution over columns.
                for j in 0..p {
                    // result col j = (y col j - sum_{i<j} L[j][i]^T ... ) use
                    // standard triangular solve on the right.
                    for row in 0..m {
                        out[j * m + row] = y[j * m + row];
                    }
                    for i in 0..j {
                        let coef = l[(j, i)];
                        for row in 0..m {
                            out[j * m + row] -= coef * out[i * m + row];
                        }
                    }
                    let d = l[(j, j)];
                    let inv = if d > 0.0 { 1.0 / d } else { 0.0 };
                    for row in 0..m {
                        out[j * m + row] *= inv;
                    }
                }
                y.copy_from_slice(&out);
            }
            None => {
                gram_schmidt(y, m, p);
            }
        }
    }
}

fn gram_schmidt(y: &mut [f64], m: usize, p: usize) {
    for j in 0..p {
        for i in 0..j {
            let (head, tail) = y.split_at_mut(j * m);
            let qi = &head[i * m..(i + 1) * m];
            let col = &mut tail[..m];
            let proj = dot(qi, col);
            for (c, q) in col.iter_mut().zip(qi) {
                *c -= proj * q;
            }
        }
        let col = &mut y[j * m..(j + 1) * m];
        let nrm = norm_sq(col).sqrt();
        if nrm > 1e-300 {
            for c in col.iter_mut() {
                *c /= nrm;
            }
        }
    }
}
