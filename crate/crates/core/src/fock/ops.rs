//! Sparse operators on the truncated Fock space (CSR, complex entries).

use ndarray::Array2;
use num_complex::Complex64;

use super::space::FockSpace;
use super::FockError;
use crate::model::SaturationLaw;

/// Sparse complex matrix on the product space, stored row-compressed with
/// sorted column indices per row.
#[derive(Debug, Clone)]
pub struct FockOperator {
    space: FockSpace,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<Complex64>,
}

impl FockOperator {
    pub fn space(&self) -> &FockSpace {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn from_triplets(
        space: FockSpace,
        triplets: impl IntoIterator<Item = (usize, usize, Complex64)>,
    ) -> Self {
        let d = space.dim();
        let mut rows: Vec<Vec<(usize, Complex64)>> = vec![Vec::new(); d];
        for (r, c, v) in triplets {
            if v != Complex64::new(0.0, 0.0) {
                rows[r].push((c, v));
            }
        }
        let mut indptr = Vec::with_capacity(d + 1);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        indptr.push(0);
        for row in &mut rows {
            row.sort_by_key(|&(c, _)| c);
            let mut merged: Vec<(usize, Complex64)> = Vec::with_capacity(row.len());
            for &(c, v) in row.iter() {
                match merged.last_mut() {
                    Some(last) if last.0 == c => last.1 += v,
                    _ => merged.push((c, v)),
                }
            }
            for (c, v) in merged {
                indices.push(c);
                values.push(v);
            }
            indptr.push(indices.len());
        }
        Self { space, indptr, indices, values }
    }

    /// Annihilation operator of `mode`: `⟨…,n−1,…|a|…,n,…⟩ = √n`.
    pub fn annihilation(space: FockSpace, mode: usize) -> Result<Self, FockError> {
        space.check_mode(mode)?;
        Ok(Self::lowering_with(space, mode, |n| (n as f64).sqrt()))
    }

    /// Saturated lowering operator `A = f(a†a)·a`:
    /// `⟨n−1|A|n⟩ = √n · f(n−1)`. The gain jump operator is the adjoint,
    /// `⟨n+1|A†|n⟩ = √(n+1) · f(n)`.
    pub fn saturated_lowering(
        space: FockSpace,
        mode: usize,
        law: &SaturationLaw,
    ) -> Result<Self, FockError> {
        space.check_mode(mode)?;
        let law = *law;
        Ok(Self::lowering_with(space, mode, move |n| {
            (n as f64).sqrt() * law.f_unchecked((n - 1) as f64)
        }))
    }

    /// Number operator of `mode` (diagonal).
    pub fn number(space: FockSpace, mode: usize) -> Result<Self, FockError> {
        space.check_mode(mode)?;
        let d = space.dim();
        Ok(Self::from_triplets(
            space,
            (0..d).map(|i| (i, i, Complex64::new(space.occupation(i, mode) as f64, 0.0))),
        ))
    }

    fn lowering_with(space: FockSpace, mode: usize, amp: impl Fn(usize) -> f64) -> Self {
        let d = space.dim();
        let stride = space.stride(mode);
        let triplets = (0..d).filter_map(|col| {
            let n = space.occupation(col, mode);
            (n > 0).then(|| (col - stride, col, Complex64::new(amp(n), 0.0)))
        });
        Self::from_triplets(space, triplets)
    }

    pub fn adjoint(&self) -> Self {
        let triplets: Vec<_> = self
            .iter()
            .map(|(r, c, v)| (c, r, v.conj()))
            .collect();
        Self::from_triplets(self.space, triplets)
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        let mut out = self.clone();
        for v in &mut out.values {
            *v *= factor;
        }
        out
    }

    /// Sparse sum (same space).
    pub fn add(&self, other: &Self) -> Self {
        let triplets = self.iter().chain(other.iter()).collect::<Vec<_>>();
        Self::from_triplets(self.space, triplets)
    }

    /// Iterates non-zeros as `(row, col, value)`.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, Complex64)> + '_ {
        (0..self.dim()).flat_map(move |r| {
            (self.indptr[r]..self.indptr[r + 1]).map(move |p| (r, self.indices[p], self.values[p]))
        })
    }

    /// `out = M·x`.
    pub fn apply(&self, x: &[Complex64], out: &mut [Complex64]) {
        for r in 0..self.dim() {
            let mut acc = Complex64::new(0.0, 0.0);
            for p in self.indptr[r]..self.indptr[r + 1] {
                acc += self.values[p] * x[self.indices[p]];
            }
            out[r] = acc;
        }
    }

    /// `out[r] = (M·x)[r]` for the listed rows; other entries are left
    /// untouched.
    pub fn apply_rows(&self, rows: &[usize], x: &[Complex64], out: &mut [Complex64]) {
        for &r in rows {
            let mut acc = Complex64::new(0.0, 0.0);
            for p in self.indptr[r]..self.indptr[r + 1] {
                acc += self.values[p] * x[self.indices[p]];
            }
            out[r] = acc;
        }
    }

    /// `⟨x|M|x⟩` without allocating.
    pub fn expectation(&self, x: &[Complex64]) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for r in 0..self.dim() {
            let mut row = Complex64::new(0.0, 0.0);
            for p in self.indptr[r]..self.indptr[r + 1] {
                row += self.values[p] * x[self.indices[p]];
            }
            acc += x[r].conj() * row;
        }
        acc
    }

    /// Diagonal of `M†M` for a single-band `M` (used for jump weights).
    pub fn gram_diagonal(&self) -> Vec<f64> {
        let mut diag = vec![0.0; self.dim()];
        for (_, c, v) in self.iter() {
            diag[c] += v.norm_sqr();
        }
        diag
    }

    pub fn to_dense(&self) -> Array2<Complex64> {
        let d = self.dim();
        let mut m = Array2::zeros((d, d));
        for (r, c, v) in self.iter() {
            m[(r, c)] += v;
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn ladder_matrix_elements() {
        let space = FockSpace::new(1, 6).unwrap();
        let a = FockOperator::annihilation(space, 0).unwrap();
        let dense = a.to_dense();
        for n in 1..6 {
            assert_relative_eq!(dense[(n - 1, n)].re, (n as f64).sqrt());
        }
        let adag = a.adjoint();
        let dense_dag = adag.to_dense();
        for n in 0..5 {
            assert_relative_eq!(dense_dag[(n + 1, n)].re, ((n + 1) as f64).sqrt());
        }
    }

    #[test]
    fn saturated_lowering_elements() {
        let space = FockSpace::new(1, 8).unwrap();
        let law = SaturationLaw::standard(1.0).unwrap();
        let a_sat = FockOperator::saturated_lowering(space, 0, &law).unwrap();
        let dense = a_sat.to_dense();
        // ⟨0|A|1⟩ = 1·f(0) = 1
        assert_relative_eq!(dense[(0, 1)].re, 1.0);
        // ⟨1|A|2⟩ = √2·f(1) = √2/2
        assert_relative_eq!(dense[(1, 2)].re, 2f64.sqrt() / 2.0, max_relative = 1e-14);
        // n0 → ∞ recovers the bare ladder
        let linear = SaturationLaw::standard(1e12).unwrap();
        let almost_a = FockOperator::saturated_lowering(space, 0, &linear).unwrap();
        for ((_, _, v), (_, _, w)) in
            almost_a.iter().zip(FockOperator::annihilation(space, 0).unwrap().iter())
        {
            assert_relative_eq!(v.re, w.re, max_relative = 1e-10);
        }
    }

    #[test]
    fn two_mode_tensor_structure() {
        let space = FockSpace::new(2, 3).unwrap();
        let a1 = FockOperator::annihilation(space, 1).unwrap();
        let dense = a1.to_dense();
        // |n0=2, n1=1⟩ → √1 |2,0⟩
        let from = space.index_of(&[2, 1]);
        let to = space.index_of(&[2, 0]);
        assert_relative_eq!(dense[(to, from)].re, 1.0);
        let n0_op = FockOperator::number(space, 0).unwrap();
        let idx = space.index_of(&[2, 1]);
        assert_relative_eq!(n0_op.to_dense()[(idx, idx)].re, 2.0);
    }

    #[test]
    fn gram_diagonal_matches_dense() {
        let space = FockSpace::new(2, 4).unwrap();
        let law = SaturationLaw::standard(2.0).unwrap();
        let op = FockOperator::saturated_lowering(space, 0, &law).unwrap();
        let diag = op.gram_diagonal();
        let dense = op.to_dense();
        for i in 0..space.dim() {
            let direct: f64 = (0..space.dim()).map(|r| dense[(r, i)].norm_sqr()).sum();
            assert_relative_eq!(diag[i], direct, max_relative = 1e-13);
        }
    }
}
