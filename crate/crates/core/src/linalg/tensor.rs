//! Multi-factor bookkeeping on dense matrices.
//!
//! Composite indices are row-major with the leftmost factor most significant:
//! `|i⟩⊗|j⟩ ↦ i·d_j + j`.

use super::ComplexMatrix;
use crate::error::{Error, Result};
use num_complex::Complex64;

/// Ordered list of tensor-factor dimensions annotating a square matrix.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TensorShape {
    factors: Vec<usize>,
}

impl TensorShape {
    pub fn new(factors: impl Into<Vec<usize>>) -> Result<Self> {
        let factors = factors.into();
        if factors.is_empty() || factors.contains(&0) {
            return Err(Error::InvalidArgument(format!(
                "tensor factors must be non-empty and positive, got {factors:?}"
            )));
        }
        Ok(Self { factors })
    }

    pub fn factors(&self) -> &[usize] {
        &self.factors
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    /// Product of all factor dimensions.
    pub fn total(&self) -> usize {
        self.factors.iter().product()
    }

    /// Shape obtained by reordering the factors: output factor `k` is input factor `perm[k]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        check_permutation(perm, self.len())?;
        Ok(Self {
            factors: perm.iter().map(|&p| self.factors[p]).collect(),
        })
    }

    /// Digits of `index` in this mixed radix, leftmost factor first.
    pub fn digits(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.factors.len()];
        for (slot, &d) in out.iter_mut().zip(&self.factors).rev() {
            *slot = index % d;
            index /= d;
        }
        out
    }

    pub fn index(&self, digits: &[usize]) -> usize {
        digits
            .iter()
            .zip(&self.factors)
            .fold(0, |acc, (&x, &d)| acc * d + x)
    }

    fn check_square(&self, m: &ComplexMatrix) -> Result<()> {
        let n = self.total();
        if m.nrows() != n || m.ncols() != n {
            return Err(Error::DimensionMismatch(format!(
                "matrix is {}x{}, shape {:?} needs {n}x{n}",
                m.nrows(),
                m.ncols(),
                self.factors
            )));
        }
        Ok(())
    }
}

fn check_permutation(perm: &[usize], n: usize) -> Result<()> {
    let mut seen = vec![false; n];
    if perm.len() != n {
        return Err(Error::InvalidPermutation(perm.to_vec()));
    }
    for &p in perm {
        if p >= n || seen[p] {
            return Err(Error::InvalidPermutation(perm.to_vec()));
        }
        seen[p] = true;
    }
    Ok(())
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

/// Kronecker product of a sequence, left to right. An empty list yields the 1×1 identity.
pub fn kron_all<'a>(factors: impl IntoIterator<Item = &'a ComplexMatrix>) -> ComplexMatrix {
    factors
        .into_iter()
        .fold(ComplexMatrix::identity(1, 1), |acc, f| acc.kronecker(f))
}

/// Traces out every factor not listed in `keep`. Kept factors stay in their original order.
pub fn partial_trace(
    m: &ComplexMatrix,
    shape: &TensorShape,
    keep: &[usize],
) -> Result<ComplexMatrix> {
    shape.check_square(m)?;
    let n = shape.len();
    let mut kept = vec![false; n];
    for &k in keep {
        if k >= n || kept[k] {
            return Err(Error::InvalidArgument(format!(
                "keep set {keep:?} invalid for {n} factors"
            )));
        }
        kept[k] = true;
    }
    let dims = shape.factors();
    let kept_dim: usize = (0..n).filter(|&k| kept[k]).map(|k| dims[k]).product();

    // split every flat index into (kept part, traced part)
    let split: Vec<(usize, usize)> = (0..shape.total())
        .map(|i| {
            let digits = shape.digits(i);
            let (mut a, mut b) = (0, 0);
            for k in 0..n {
                if kept[k] {
                    a = a * dims[k] + digits[k];
                } else {
                    b = b * dims[k] + digits[k];
                }
            }
            (a, b)
        })
        .collect();

    let mut out = ComplexMatrix::zeros(kept_dim, kept_dim);
    for (i, &(ri, ti)) in split.iter().enumerate() {
        for (j, &(rj, tj)) in split.iter().enumerate() {
            if ti == tj {
                out[(ri, rj)] += m[(i, j)];
            }
        }
    }
    Ok(out)
}

/// Transposes the indices of factor `which` in the computational basis.
pub fn partial_transpose(
    m: &ComplexMatrix,
    shape: &TensorShape,
    which: usize,
) -> Result<ComplexMatrix> {
    shape.check_square(m)?;
    if which >= shape.len() {
        return Err(Error::InvalidArgument(format!(
            "factor {which} out of range for {} factors",
            shape.len()
        )));
    }
    let total = shape.total();
    let mut out = ComplexMatrix::zeros(total, total);
    let digits: Vec<Vec<usize>> = (0..total).map(|i| shape.digits(i)).collect();
    for i in 0..total {
        for j in 0..total {
            let mut di = digits[i].clone();
            let mut dj = digits[j].clone();
            std::mem::swap(&mut di[which], &mut dj[which]);
            out[(shape.index(&di), shape.index(&dj))] = m[(i, j)];
        }
    }
    Ok(out)
}

/// Unitary `P` sending `|i_0 … i_{n-1}⟩` to `|i_{perm[0]} … i_{perm[n-1]}⟩`.
pub fn permutation_matrix(shape: &TensorShape, perm: &[usize]) -> Result<ComplexMatrix> {
    let target = shape.permuted(perm)?;
    let total = shape.total();
    let mut p = ComplexMatrix::zeros(total, total);
    for i in 0..total {
        let d = shape.digits(i);
        let nd: Vec<usize> = perm.iter().map(|&k| d[k]).collect();
        p[(target.index(&nd), i)] = Complex64::new(1.0, 0.0);
    }
    Ok(p)
}

/// Reorders tensor factors of a square matrix: returns `P m P†` with `P` from [`permutation_matrix`].
pub fn permute_systems(
    m: &ComplexMatrix,
    shape: &TensorShape,
    perm: &[usize],
) -> Result<ComplexMatrix> {
    shape.check_square(m)?;
    let target = shape.permuted(perm)?;
    let total = shape.total();
    let new_index: Vec<usize> = (0..total)
        .map(|i| {
            let d = shape.digits(i);
            let nd: Vec<usize> = perm.iter().map(|&k| d[k]).collect();
            target.index(&nd)
        })
        .collect();
    let mut out = ComplexMatrix::zeros(total, total);
    for i in 0..total {
        for j in 0..total {
            out[(new_index[i], new_index[j])] = m[(i, j)];
        }
    }
    Ok(out)
}

/// Inverse of a permutation in the convention of [`permute_systems`].
pub fn inverse_permutation(perm: &[usize]) -> Result<Vec<usize>> {
    check_permutation(perm, perm.len())?;
    let mut inv = vec![0; perm.len()];
    for (k, &p) in perm.iter().enumerate() {
        inv[p] = k;
    }
    Ok(inv)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, frobenius, pauli, random};

    fn close(a: &ComplexMatrix, b: &ComplexMatrix) -> bool {
        frobenius(&(a - b)) < 1e-12
    }

    #[test]
    fn kron_identities() {
        let i2 = ComplexMatrix::identity(2, 2);
        assert_eq!(kron(&i2, &i2), ComplexMatrix::identity(4, 4));
        let p0 = ComplexMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            c(1.0, 0.0),
            c(0.0, 0.0),
        ]));
        let expect = ComplexMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            c(1.0, 0.0),
            c(1.0, 0.0),
            c(0.0, 0.0),
            c(0.0, 0.0),
        ]));
        assert_eq!(kron(&p0, &i2), expect);
    }

    #[test]
    fn kron_matches_elementwise_definition() {
        let (x, z) = (pauli::x(), pauli::z());
        let k = kron(&x, &z);
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(k[(i, j)], x[(i / 2, j / 2)] * z[(i % 2, j % 2)]);
            }
        }
        // off-diagonal blocks ±Z, zero diagonal blocks
        assert_eq!(k[(0, 2)], c(1.0, 0.0));
        assert_eq!(k[(1, 3)], c(-1.0, 0.0));
        assert_eq!(k[(0, 0)], c(0.0, 0.0));
    }

    #[test]
    fn partial_trace_of_product() {
        let mut rng = random::rng(3);
        let a = random::ginibre(&mut rng, 3, 3);
        let b = random::ginibre(&mut rng, 2, 2);
        let shape = TensorShape::new([3, 2]).unwrap();
        let got = partial_trace(&kron(&a, &b), &shape, &[0]).unwrap();
        assert!(close(&got, &(&a * b.trace())));
        let got = partial_trace(&kron(&a, &b), &shape, &[1]).unwrap();
        assert!(close(&got, &(&b * a.trace())));
    }

    #[test]
    fn partial_trace_of_maximally_entangled() {
        let omega = crate::linalg::max_entangled_projector(2);
        let shape = TensorShape::new([2, 2]).unwrap();
        let got = partial_trace(&omega, &shape, &[1]).unwrap();
        assert_eq!(got, ComplexMatrix::identity(2, 2));
    }

    #[test]
    fn partial_trace_index_summation_oracle() {
        let mut rng = random::rng(11);
        let h = random::hermitian(&mut rng, 4);
        let shape = TensorShape::new([2, 2]).unwrap();
        let keep0 = partial_trace(&h, &shape, &[0]).unwrap();
        let keep1 = partial_trace(&h, &shape, &[1]).unwrap();
        for a in 0..2 {
            for b in 0..2 {
                let mut s0 = c(0.0, 0.0);
                let mut s1 = c(0.0, 0.0);
                for t in 0..2 {
                    s0 += h[(2 * a + t, 2 * b + t)];
                    s1 += h[(2 * t + a, 2 * t + b)];
                }
                assert!((keep0[(a, b)] - s0).norm() < 1e-14);
                assert!((keep1[(a, b)] - s1).norm() < 1e-14);
            }
        }
        let empty = partial_trace(&h, &shape, &[]).unwrap();
        assert!((empty[(0, 0)] - h.trace()).norm() < 1e-14);
    }

    #[test]
    fn partial_trace_rejects_bad_shape() {
        let shape = TensorShape::new([2, 3]).unwrap();
        assert!(matches!(
            partial_trace(&ComplexMatrix::identity(4, 4), &shape, &[0]),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn partial_transpose_cases() {
        let mut rng = random::rng(5);
        let a = random::ginibre(&mut rng, 2, 2);
        let b = random::ginibre(&mut rng, 3, 3);
        let shape = TensorShape::new([2, 3]).unwrap();
        let m = kron(&a, &b);
        let pt = partial_transpose(&m, &shape, 1).unwrap();
        assert!(close(&pt, &kron(&a, &b.transpose())));
        assert!(close(&partial_transpose(&pt, &shape, 1).unwrap(), &m));

        let omega = crate::linalg::max_entangled_projector(2);
        let s2 = TensorShape::new([2, 2]).unwrap();
        let swap = partial_transpose(&omega, &s2, 1).unwrap();
        // Σ |n⟩⟨m| ⊗ |m⟩⟨n|
        let mut expect = ComplexMatrix::zeros(4, 4);
        for n in 0..2 {
            for m in 0..2 {
                expect[(2 * n + m, 2 * m + n)] = c(1.0, 0.0);
            }
        }
        assert_eq!(swap, expect);
    }

    #[test]
    fn permutation_cases() {
        let mut rng = random::rng(8);
        let a = random::ginibre(&mut rng, 2, 2);
        let b = random::ginibre(&mut rng, 3, 3);
        let shape = TensorShape::new([2, 3]).unwrap();
        let m = kron(&a, &b);
        assert_eq!(permute_systems(&m, &shape, &[0, 1]).unwrap(), m);
        assert!(close(
            &permute_systems(&m, &shape, &[1, 0]).unwrap(),
            &kron(&b, &a)
        ));
        assert!(matches!(
            permute_systems(&m, &shape, &[0, 0]),
            Err(Error::InvalidPermutation(_))
        ));
    }

    #[test]
    fn permutation_matches_explicit_matrix_oracle() {
        let mut rng = random::rng(21);
        let shape = TensorShape::new([2, 3, 2]).unwrap();
        let m = random::ginibre(&mut rng, 12, 12);
        let perm = [2, 0, 1];
        // explicit permutation matrix built element by element
        let mut p = ComplexMatrix::zeros(12, 12);
        for i0 in 0..2 {
            for i1 in 0..3 {
                for i2 in 0..2 {
                    let src = (i0 * 3 + i1) * 2 + i2;
                    // new order (i2, i0, i1) with dims (2, 2, 3)
                    let dst = (i2 * 2 + i0) * 3 + i1;
                    p[(dst, src)] = c(1.0, 0.0);
                }
            }
        }
        assert_eq!(permutation_matrix(&shape, &perm).unwrap(), p);
        let expect = &p * &m * p.adjoint();
        assert!(close(&permute_systems(&m, &shape, &perm).unwrap(), &expect));
    }
}
