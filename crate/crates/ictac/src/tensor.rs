//! Dense N-order tensors with first-index-fastest linearization.
//!
//! Element (i_0, ..., i_{N-1}) of a tensor with shape (I_0, ..., I_{N-1})
//! lives at linear position i_0 + i_1*I_0 + i_2*I_0*I_1 + ... (the first
//! index varies fastest). Under this convention a mode-(1..k) unfolding is
//! a pure reinterpretation of the linear buffer as an m x n column-major
//! matrix, and folding it back is the identity.

use crate::error::{Error, Result};
use crate::linalg;

/// Dense real-valued tensor of arbitrary order.
///
/// Invariants: the scalar count equals the product of the mode sizes, every
/// mode size is at least 1, and all scalars are finite.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseTensor {
    shape: Vec<usize>,
    data: Vec<f64>,
}

impl DenseTensor {
    pub fn new(shape: Vec<usize>, data: Vec<f64>) -> Result<Self> {
        validate_shape(&shape)?;
        let expected: usize = shape.iter().product();
        if data.len() != expected {
            return Err(Error::DataLength {
                shape,
                expected,
                found: data.len(),
            });
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(pos));
        }
        Ok(Self { shape, data })
    }

    pub fn zeros(shape: Vec<usize>) -> Result<Self> {
        validate_shape(&shape)?;
        let len = shape.iter().product();
        Ok(Self {
            shape,
            data: vec![0.0; len],
        })
    }

    /// Builds a tensor by evaluating `f` at every multi-index.
    pub fn from_fn(shape: Vec<usize>, mut f: impl FnMut(&[usize]) -> f64) -> Result<Self> {
        validate_shape(&shape)?;
        let len: usize = shape.iter().product();
        let mut idx = vec![0usize; shape.len()];
        let mut data = Vec::with_capacity(len);
        for _ in 0..len {
            let v = f(&idx);
            if !v.is_finite() {
                return Err(Error::NonFinite(data.len()));
            }
            data.push(v);
            increment_index(&mut idx, &shape);
        }
        Ok(Self { shape, data })
    }

    pub fn order(&self) -> usize {
        self.shape.len()
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub(crate) fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    /// Linear position of a multi-index (first index fastest).
    pub fn linear_index(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.order());
        let mut lin = 0;
        let mut stride = 1;
        for (i, &size) in idx.iter().zip(&self.shape) {
            debug_assert!(*i < size);
            lin += i * stride;
            stride *= size;
        }
        lin
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        self.data[self.linear_index(idx)]
    }

    pub fn set(&mut self, idx: &[usize], value: f64) {
        let lin = self.linear_index(idx);
        self.data[lin] = value;
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Mode-n unfolding: rows indexed by mode `n` (zero-based), columns by
    /// the remaining modes in order, first index fastest.
    ///
    /// Element (i_0, ..., i_{N-1}) maps to row i_n and column
    /// sum over k != n of i_k * prod of I_m for m < k, m != n.
    pub fn unfold_mode(&self, n: usize) -> Result<MatricizedView> {
        let order = self.order();
        if n >= order {
            return Err(Error::ModeOutOfRange { mode: n, order });
        }
        let rows = self.shape[n];
        let cols = self.len() / rows;
        let mut out = vec![0.0; self.len()];
        let mut idx = vec![0usize; order];
        for &v in &self.data {
            let r = idx[n];
            let mut col = 0;
            let mut stride = 1;
            for (k, &i) in idx.iter().enumerate() {
                if k == n {
                    continue;
                }
                col += i * stride;
                stride *= self.shape[k];
            }
            out[r + col * rows] = v;
            increment_index(&mut idx, &self.shape);
        }
        Ok(MatricizedView {
            rows,
            cols,
            data: out,
            origin_shape: self.shape.clone(),
            split: Split::Mode(n),
        })
    }

    /// Mode-(1..k) unfolding: the first `k` modes index the rows jointly,
    /// the remaining modes the columns. With the first-index-fastest
    /// convention this is a pure reshape of the linear buffer.
    pub fn unfold_prefix(&self, k: usize) -> Result<MatricizedView> {
        let order = self.order();
        if k == 0 || k >= order {
            return Err(Error::PrefixOutOfRange { k, order });
        }
        let rows: usize = self.shape[..k].iter().product();
        let cols = self.len() / rows;
        Ok(MatricizedView {
            rows,
            cols,
            data: self.data.clone(),
            origin_shape: self.shape.clone(),
            split: Split::Prefix(k),
        })
    }

    /// Reorders the modes: output mode `j` is input mode `perm[j]`.
    pub fn permute(&self, perm: &[usize]) -> Result<DenseTensor> {
        let order = self.order();
        if !is_permutation(perm, order) {
            return Err(Error::NotAPermutation(perm.to_vec(), order));
        }
        let in_strides = strides_of(&self.shape);
        let out_shape: Vec<usize> = perm.iter().map(|&p| self.shape[p]).collect();
        let mut out = Vec::with_capacity(self.len());
        let mut idx = vec![0usize; order];
        for _ in 0..self.len() {
            let mut lin = 0;
            for (j, &i) in idx.iter().enumerate() {
                lin += i * in_strides[perm[j]];
            }
            out.push(self.data[lin]);
            increment_index(&mut idx, &out_shape);
        }
        Ok(DenseTensor {
            shape: out_shape,
            data: out,
        })
    }

    /// Changes the shape metadata; the linear data is untouched.
    pub fn reshape(&self, new_shape: &[usize]) -> Result<DenseTensor> {
        validate_shape(new_shape)?;
        let to_len: usize = new_shape.iter().product();
        if to_len != self.len() {
            return Err(Error::ReshapeMismatch {
                from: self.shape.clone(),
                from_len: self.len(),
                to: new_shape.to_vec(),
                to_len,
            });
        }
        Ok(DenseTensor {
            shape: new_shape.to_vec(),
            data: self.data.clone(),
        })
    }

    /// Numerical TT ranks: for each k, the count of singular values of the
    /// mode-(1..k) unfolding above `tol` times the largest one.
    ///
    /// Runs a full SVD per prefix, so it is meant for small and mid-sized
    /// tensors (tests, diagnostics), not the augmented solver inputs.
    pub fn tt_ranks(&self, tol: f64) -> Result<TTRankVector> {
        let order = self.order();
        let mut ranks = Vec::with_capacity(order.saturating_sub(1));
        for k in 1..order {
            let view = self.unfold_prefix(k)?;
            let svals = linalg::singular_values(&view.data, view.rows, view.cols);
            let max = svals.iter().cloned().fold(0.0_f64, f64::max);
            let rank = if max == 0.0 {
                0
            } else {
                svals.iter().filter(|&&s| s > tol * max).count()
            };
            ranks.push(rank);
        }
        Ok(TTRankVector::new(ranks))
    }
}

/// Which unfolding produced a [`MatricizedView`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Split {
    /// Unbalanced: a single mode indexes the rows.
    Mode(usize),
    /// Balanced: the first `k` modes index the rows jointly.
    Prefix(usize),
}

/// A matricized tensor: column-major matrix data plus enough provenance
/// (origin shape and split) to refold it exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct MatricizedView {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
    origin_shape: Vec<usize>,
    split: Split,
}

impl MatricizedView {
    pub fn new(
        rows: usize,
        cols: usize,
        data: Vec<f64>,
        origin_shape: Vec<usize>,
        split: Split,
    ) -> Result<Self> {
        validate_shape(&origin_shape)?;
        let expected: usize = origin_shape.iter().product();
        if rows * cols != expected || data.len() != expected {
            return Err(Error::DataLength {
                shape: origin_shape,
                expected,
                found: data.len(),
            });
        }
        Ok(Self {
            rows,
            cols,
            data,
            origin_shape,
            split,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn origin_shape(&self) -> &[usize] {
        &self.origin_shape
    }

    pub fn split(&self) -> Split {
        self.split
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        debug_assert!(r < self.rows && c < self.cols);
        self.data[r + c * self.rows]
    }

    /// Inverse of the unfolding that produced this view; exact on scalars.
    pub fn fold(&self) -> Result<DenseTensor> {
        match self.split {
            Split::Prefix(k) => {
                if k == 0 || k >= self.origin_shape.len() {
                    return Err(Error::PrefixOutOfRange {
                        k,
                        order: self.origin_shape.len(),
                    });
                }
                let rows: usize = self.origin_shape[..k].iter().product();
                if rows != self.rows {
                    return Err(Error::ShapeMismatch(
                        vec![self.rows, self.cols],
                        self.origin_shape.clone(),
                    ));
                }
                DenseTensor::new(self.origin_shape.clone(), self.data.clone())
            }
            Split::Mode(n) => {
                let order = self.origin_shape.len();
                if n >= order {
                    return Err(Error::ModeOutOfRange { mode: n, order });
                }
                if self.origin_shape[n] != self.rows {
                    return Err(Error::ShapeMismatch(
                        vec![self.rows, self.cols],
                        self.origin_shape.clone(),
                    ));
                }
                let mut data = vec![0.0; self.data.len()];
                let mut idx = vec![0usize; order];
                for slot in data.iter_mut() {
                    let r = idx[n];
                    let mut col = 0;
                    let mut stride = 1;
                    for (k, &i) in idx.iter().enumerate() {
                        if k == n {
                            continue;
                        }
                        col += i * stride;
                        stride *= self.origin_shape[k];
                    }
                    *slot = self.data[r + col * self.rows];
                    increment_index(&mut idx, &self.origin_shape);
                }
                DenseTensor::new(self.origin_shape.clone(), data)
            }
        }
    }
}

/// TT rank vector r = (r_1, ..., r_{N-1}): one rank per prefix unfolding.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TTRankVector(Vec<usize>);

impl TTRankVector {
    pub fn new(ranks: Vec<usize>) -> Self {
        Self(ranks)
    }

    pub fn ranks(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Checks the vector against a shape: length order-1 and every rank at
    /// least 1 and within the unfolding bound min(m_k, n_k).
    pub fn validate_for(&self, shape: &[usize]) -> Result<()> {
        let order = shape.len();
        if self.0.len() + 1 != order {
            return Err(Error::RankCount {
                expected: order - 1,
                found: self.0.len(),
            });
        }
        let total: usize = shape.iter().product();
        let mut m = 1usize;
        for (k, &r) in self.0.iter().enumerate() {
            m *= shape[k];
            let n = total / m;
            if r == 0 {
                return Err(Error::RankZero(k + 1));
            }
            if r > m.min(n) {
                return Err(Error::RankTooLarge {
                    k: k + 1,
                    rank: r,
                    m,
                    n,
                });
            }
        }
        Ok(())
    }
}

/// Row/column dimensions (m_k, n_k) of every prefix unfolding of `shape`.
pub fn prefix_dims(shape: &[usize]) -> Vec<(usize, usize)> {
    let total: usize = shape.iter().product();
    let mut dims = Vec::with_capacity(shape.len().saturating_sub(1));
    let mut m = 1usize;
    for &s in &shape[..shape.len() - 1] {
        m *= s;
        dims.push((m, total / m));
    }
    dims
}

fn validate_shape(shape: &[usize]) -> Result<()> {
    if shape.is_empty() || shape.iter().any(|&s| s == 0) {
        return Err(Error::EmptyMode(shape.to_vec()));
    }
    Ok(())
}

pub(crate) fn strides_of(shape: &[usize]) -> Vec<usize> {
    let mut strides = Vec::with_capacity(shape.len());
    let mut s = 1;
    for &dim in shape {
        strides.push(s);
        s *= dim;
    }
    strides
}

pub(crate) fn increment_index(idx: &mut [usize], shape: &[usize]) {
    for (i, &size) in idx.iter_mut().zip(shape) {
        *i += 1;
        if *i < size {
            return;
        }
        *i = 0;
    }
}

fn is_permutation(perm: &[usize], order: usize) -> bool {
    if perm.len() != order {
        return false;
    }
    let mut seen = vec![false; order];
    for &p in perm {
        if p >= order || seen[p] {
            return false;
        }
        seen[p] = true;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn iota(shape: Vec<usize>) -> DenseTensor {
        let len = shape.iter().product();
        DenseTensor::new(shape, (1..=len).map(|v| v as f64).collect()).unwrap()
    }

    #[test]
    fn frobenius_norm_cases() {
        let zero = DenseTensor::zeros(vec![3, 3, 3]).unwrap();
        assert_eq!(zero.frobenius_norm(), 0.0);

        let ones = DenseTensor::new(vec![2, 2], vec![1.0; 4]).unwrap();
        assert_eq!(ones.frobenius_norm(), 2.0);

        // Entries 1..12: sum of squares is 650.
        let t = iota(vec![2, 3, 2]);
        assert_relative_eq!(t.frobenius_norm(), 650.0_f64.sqrt(), max_relative = 1e-15);
    }

    #[test]
    fn rejects_bad_construction() {
        assert!(DenseTensor::new(vec![2, 3], vec![0.0; 5]).is_err());
        assert!(DenseTensor::new(vec![2, 0], vec![]).is_err());
        assert!(DenseTensor::new(vec![2], vec![1.0, f64::NAN]).is_err());
        assert!(DenseTensor::new(vec![], vec![]).is_err());
    }

    #[test]
    fn unfold_mode_matches_index_formula() {
        // 2x3x2 tensor, mode 0 (math mode 1): element (2,1,2) in one-based
        // math coordinates sits at matrix position (2,4).
        let t = iota(vec![2, 3, 2]);
        let view = t.unfold_mode(0).unwrap();
        assert_eq!((view.rows(), view.cols()), (2, 6));
        assert_eq!(view.get(1, 3), t.get(&[1, 0, 1]));

        let view2 = t.unfold_mode(1).unwrap();
        assert_eq!((view2.rows(), view2.cols()), (3, 4));
    }

    #[test]
    fn unfold_mode_order_one() {
        let t = iota(vec![4]);
        let view = t.unfold_mode(0).unwrap();
        assert_eq!((view.rows(), view.cols()), (4, 1));
        assert_eq!(view.data(), t.data());
    }

    #[test]
    fn unfold_mode_out_of_range() {
        let t = iota(vec![2, 2]);
        assert!(matches!(
            t.unfold_mode(2),
            Err(Error::ModeOutOfRange { mode: 2, order: 2 })
        ));
    }

    #[test]
    fn unfold_prefix_dims_and_positions() {
        let t = iota(vec![2, 3, 4]);
        let view = t.unfold_prefix(2).unwrap();
        assert_eq!((view.rows(), view.cols()), (6, 4));

        // Shape (2,2), k=1: the matrix is the tensor itself.
        let m = iota(vec![2, 2]);
        let mv = m.unfold_prefix(1).unwrap();
        assert_eq!(mv.data(), m.data());

        // Shape (2,2,2), element (2,1,2) one-based -> row 2, column 2.
        let c = iota(vec![2, 2, 2]);
        let cv = c.unfold_prefix(2).unwrap();
        assert_eq!(cv.get(1, 1), c.get(&[1, 0, 1]));
    }

    #[test]
    fn unfold_prefix_out_of_range() {
        let t = iota(vec![2, 3]);
        assert!(t.unfold_prefix(0).is_err());
        assert!(t.unfold_prefix(2).is_err());
    }

    #[test]
    fn fold_roundtrips_exactly() {
        let t = DenseTensor::from_fn(vec![3, 4, 5], |idx| {
            (idx[0] as f64) + 10.0 * idx[1] as f64 + 0.25 * idx[2] as f64
        })
        .unwrap();
        for n in 0..3 {
            assert_eq!(t.unfold_mode(n).unwrap().fold().unwrap(), t);
        }
        let q = DenseTensor::from_fn(vec![2, 3, 2, 2], |idx| {
            (1 + idx[0] + 2 * idx[1] + 6 * idx[2] + 12 * idx[3]) as f64 * 1.5
        })
        .unwrap();
        for k in 1..4 {
            assert_eq!(q.unfold_prefix(k).unwrap().fold().unwrap(), q);
        }
    }

    #[test]
    fn fold_manual_view() {
        let t = iota(vec![2, 3, 4]);
        let view = MatricizedView::new(
            6,
            4,
            t.data().to_vec(),
            vec![2, 3, 4],
            Split::Prefix(2),
        )
        .unwrap();
        let folded = view.fold().unwrap();
        assert_eq!(folded.unfold_prefix(2).unwrap(), view);
    }

    #[test]
    fn fold_rejects_inconsistent_length() {
        assert!(MatricizedView::new(6, 4, vec![0.0; 23], vec![2, 3, 4], Split::Prefix(2)).is_err());
    }

    #[test]
    fn permute_transpose_and_inverse() {
        let t = iota(vec![2, 3]);
        let tt = t.permute(&[1, 0]).unwrap();
        assert_eq!(tt.shape(), &[3, 2]);
        assert_eq!(tt.get(&[1, 0]), t.get(&[0, 1]));

        let id = t.permute(&[0, 1]).unwrap();
        assert_eq!(id, t);

        let r = DenseTensor::from_fn(vec![2, 3, 4, 2], |idx| {
            (idx[0] * 7 + idx[1] * 3 + idx[2] * 11 + idx[3]) as f64
        })
        .unwrap();
        let perm = [2, 0, 3, 1];
        let mut inv = [0usize; 4];
        for (j, &p) in perm.iter().enumerate() {
            inv[p] = j;
        }
        assert_eq!(r.permute(&perm).unwrap().permute(&inv).unwrap(), r);
    }

    #[test]
    fn permute_rejects_non_permutation() {
        let t = iota(vec![2, 3]);
        assert!(t.permute(&[0, 0]).is_err());
        assert!(t.permute(&[0]).is_err());
    }

    #[test]
    fn reshape_keeps_linear_data() {
        let t = iota(vec![4, 3]);
        let r = t.reshape(&[2, 2, 3]).unwrap();
        assert_eq!(r.data(), t.data());
        assert_eq!(r.data()[5], t.data()[5]);

        let v = iota(vec![6]);
        assert_eq!(
            v.reshape(&[2, 3]).unwrap().reshape(&[6]).unwrap(),
            v
        );

        let s = iota(vec![2, 3, 4]);
        let flat = s.reshape(&[24]).unwrap();
        assert_eq!(
            flat.data().iter().sum::<f64>(),
            s.data().iter().sum::<f64>()
        );

        assert!(t.reshape(&[5, 2]).is_err());
    }

    #[test]
    fn tt_ranks_cases() {
        let ones = DenseTensor::new(vec![4, 4, 4], vec![1.0; 64]).unwrap();
        assert_eq!(ones.tt_ranks(1e-10).unwrap().ranks(), &[1, 1]);

        let zero = DenseTensor::zeros(vec![3, 3, 3]).unwrap();
        assert_eq!(zero.tt_ranks(1e-10).unwrap().ranks(), &[0, 0]);

        // Full-rank with probability 1; fixed data keeps the test stable.
        let r = DenseTensor::new(
            vec![2, 2, 2],
            vec![0.91, -0.37, 0.24, 1.62, -1.05, 0.48, 0.77, -0.19],
        )
        .unwrap();
        assert_eq!(r.tt_ranks(1e-10).unwrap().ranks(), &[2, 2]);
    }

    #[test]
    fn rank_vector_validation() {
        let shape = [2, 3, 4];
        TTRankVector::new(vec![2, 3]).validate_for(&shape).unwrap();
        assert!(TTRankVector::new(vec![2]).validate_for(&shape).is_err());
        assert!(TTRankVector::new(vec![3, 3]).validate_for(&shape).is_err());
        assert!(TTRankVector::new(vec![0, 1]).validate_for(&shape).is_err());
    }

    #[test]
    fn norm_invariance_under_rearrangement() {
        let t = DenseTensor::from_fn(vec![3, 2, 4], |idx| {
            ((idx[0] + 1) * (idx[1] + 2)) as f64 - 0.5 * idx[2] as f64
        })
        .unwrap();
        let norm = t.frobenius_norm();
        let perm = t.permute(&[2, 0, 1]).unwrap();
        assert_relative_eq!(perm.frobenius_norm(), norm, max_relative = 1e-15);
        let rs = t.reshape(&[6, 4]).unwrap();
        assert_relative_eq!(rs.frobenius_norm(), norm, max_relative = 1e-15);
        let uf = t.unfold_mode(1).unwrap();
        let folded_norm = uf.fold().unwrap().frobenius_norm();
        assert_relative_eq!(folded_norm, norm, max_relative = 1e-15);
    }
}
