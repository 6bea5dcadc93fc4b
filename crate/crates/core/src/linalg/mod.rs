//! Dense complex linear algebra shared by every other module.

pub mod random;
mod tensor;

pub use tensor::{
    inverse_permutation, kron, kron_all, partial_trace, partial_transpose, permutation_matrix,
    permute_systems, TensorShape,
};

use crate::error::{Error, Result};
use crate::tol;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

/// Dense complex matrix; the carrier for every operator in the crate.
pub type ComplexMatrix = DMatrix<Complex64>;

#[inline]
pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn frobenius(m: &ComplexMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `‖a − b‖_F / max(1, ‖b‖_F)`; infinite when shapes differ.
pub fn rel_diff(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    if a.shape() != b.shape() {
        return f64::INFINITY;
    }
    frobenius(&(a - b)) / frobenius(b).max(1.0)
}

pub fn approx_eq(a: &ComplexMatrix, b: &ComplexMatrix, tol: f64) -> bool {
    rel_diff(a, b) <= tol
}

/// Hilbert–Schmidt inner product `Tr[a† b]`.
pub fn hs_inner(a: &ComplexMatrix, b: &ComplexMatrix) -> Complex64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

/// `Tr[a b]` without forming the product.
pub fn trace_product(a: &ComplexMatrix, b: &ComplexMatrix) -> Complex64 {
    let mut s = c(0.0, 0.0);
    for i in 0..a.nrows() {
        for k in 0..a.ncols() {
            s += a[(i, k)] * b[(k, i)];
        }
    }
    s
}

pub fn check_finite(m: &ComplexMatrix) -> Result<()> {
    if m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite)
    }
}

pub fn check_square(m: &ComplexMatrix, n: usize, what: &str) -> Result<()> {
    if m.nrows() != n || m.ncols() != n {
        return Err(Error::DimensionMismatch(format!(
            "{what} must be {n}x{n}, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(())
}

pub fn hermiticity_residual(m: &ComplexMatrix) -> f64 {
    if !m.is_square() {
        return f64::INFINITY;
    }
    rel_diff(&m.adjoint(), m)
}

pub fn check_hermitian(m: &ComplexMatrix) -> Result<()> {
    let residual = hermiticity_residual(m);
    if residual <= tol::EPS_HERM {
        Ok(())
    } else {
        Err(Error::NotHermitian { residual })
    }
}

pub fn hermitian_part(m: &ComplexMatrix) -> ComplexMatrix {
    (m + m.adjoint()).scale(0.5)
}

/// Eigendecomposition of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct Eigh {
    /// Sorted descending.
    pub values: Vec<f64>,
    /// Column `k` is the eigenvector of `values[k]`, with its first non-negligible
    /// entry made real positive.
    pub vectors: ComplexMatrix,
}

impl Eigh {
    pub fn reconstruct(&self) -> ComplexMatrix {
        let n = self.vectors.nrows();
        let mut out = ComplexMatrix::zeros(n, n);
        for (k, &lambda) in self.values.iter().enumerate() {
            let v = self.vectors.column(k);
            out += (v * v.adjoint()).scale(lambda);
        }
        out
    }

    pub fn max(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    pub fn min(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }
}

/// Hermitian eigendecomposition with descending eigenvalues and a fixed phase convention.
pub fn eigh(m: &ComplexMatrix) -> Result<Eigh> {
    check_finite(m)?;
    check_hermitian(m)?;
    let n = m.nrows();
    let decomposition = hermitian_part(m).symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| decomposition.eigenvalues[b].total_cmp(&decomposition.eigenvalues[a]));

    let mut vectors = ComplexMatrix::zeros(n, n);
    let mut values = Vec::with_capacity(n);
    for (dst, &src) in order.iter().enumerate() {
        values.push(decomposition.eigenvalues[src]);
        let mut v: DVector<Complex64> = decomposition.eigenvectors.column(src).into_owned();
        if let Some(lead) = v.iter().find(|z| z.norm() > tol::PHASE_THRESHOLD).copied() {
            let phase = lead.conj() / lead.norm();
            v *= phase;
        }
        vectors.set_column(dst, &v);
    }
    Ok(Eigh { values, vectors })
}

/// Tolerance floor for "non-negative" eigenvalues given the spectrum's maximum.
pub fn positivity_floor(max_eigenvalue: f64) -> f64 {
    -tol::EPS_POS * max_eigenvalue.max(1.0)
}

/// Checks `m ≥ 0` within the positivity tolerance; returns the decomposition on success.
pub fn check_psd(m: &ComplexMatrix) -> Result<Eigh> {
    let e = eigh(m)?;
    if e.min() < positivity_floor(e.max()) {
        return Err(Error::NotPositive {
            min_eigenvalue: e.min(),
        });
    }
    Ok(e)
}

/// Checks that `rho` is a density matrix of dimension `dim`.
pub fn check_density_matrix(rho: &ComplexMatrix, dim: usize) -> Result<()> {
    check_square(rho, dim, "density matrix")?;
    check_psd(rho).map_err(|e| Error::NotState(e.to_string()))?;
    let t = rho.trace();
    if (t - c(1.0, 0.0)).norm() > tol::EPS_EQ {
        return Err(Error::NotState(format!("trace is {t}")));
    }
    Ok(())
}

/// `‖X†X − I‖_F`.
pub fn isometry_residual(x: &ComplexMatrix) -> f64 {
    frobenius(&(x.adjoint() * x - ComplexMatrix::identity(x.ncols(), x.ncols())))
}

/// Numerical rank: singular values above `rel · σ_max`.
pub fn numerical_rank(m: &ComplexMatrix, rel: f64) -> usize {
    if m.is_empty() {
        return 0;
    }
    let sv = m.clone().svd(false, false).singular_values;
    let max = sv.iter().copied().fold(0.0, f64::max);
    if max == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rel * max).count()
}

/// Extends a matrix with orthonormal columns to a square unitary.
///
/// The input columns are kept verbatim; new columns come from the eigenvectors of the
/// complementary projector, so the result is deterministic.
pub fn complete_isometry(partial: &ComplexMatrix) -> Result<ComplexMatrix> {
    let (rows, cols) = partial.shape();
    let mut padded = ComplexMatrix::zeros(rows, rows);
    if cols > rows {
        return Err(Error::TooManyColumns { rows, cols });
    }
    padded.view_mut((0, 0), (rows, cols)).copy_from(partial);
    let mut determined = vec![false; rows];
    determined[..cols].fill(true);
    complete_isometry_masked(&padded, &determined)
}

/// Replaces the columns with `determined[k] == false` by an orthonormal basis of the
/// complement of the determined columns, which must themselves be orthonormal.
pub fn complete_isometry_masked(m: &ComplexMatrix, determined: &[bool]) -> Result<ComplexMatrix> {
    let (rows, cols) = m.shape();
    if cols > rows {
        return Err(Error::TooManyColumns { rows, cols });
    }
    if determined.len() != cols {
        return Err(Error::DimensionMismatch(format!(
            "mask has {} entries for {cols} columns",
            determined.len()
        )));
    }
    check_finite(m)?;
    let known: Vec<usize> = (0..cols).filter(|&k| determined[k]).collect();
    let mut q = ComplexMatrix::zeros(rows, known.len());
    for (dst, &src) in known.iter().enumerate() {
        q.set_column(dst, &m.column(src));
    }
    let residual = isometry_residual(&q);
    if residual > tol::EPS_EQ * (known.len().max(1) as f64).sqrt() {
        return Err(Error::NotIsometry { residual });
    }

    let missing: Vec<usize> = (0..cols).filter(|&k| !determined[k]).collect();
    let mut out = m.clone();
    if missing.is_empty() {
        return Ok(out);
    }
    let complement = ComplexMatrix::identity(rows, rows) - &q * q.adjoint();
    let spectrum = eigh(&complement)?;
    // Gram–Schmidt the leading complement eigenvectors against everything kept so far.
    let mut basis: Vec<DVector<Complex64>> =
        known.iter().map(|&k| m.column(k).into_owned()).collect();
    for (slot, &col) in missing.iter().enumerate() {
        let mut v: DVector<Complex64> = spectrum.vectors.column(slot).into_owned();
        for _ in 0..2 {
            for b in &basis {
                let proj = b.dotc(&v);
                v -= b * proj;
            }
        }
        let norm = v.norm();
        if norm < 0.5 {
            return Err(Error::NotIsometry {
                residual: 1.0 - norm,
            });
        }
        v /= c(norm, 0.0);
        out.set_column(col, &v);
        basis.push(v);
    }
    Ok(out)
}

/// Unnormalized maximally entangled vector `|I⟩ = Σ_n |n⟩|n⟩` on `C^d ⊗ C^d`.
pub fn max_entangled_vector(d: usize) -> DVector<Complex64> {
    let mut v = DVector::zeros(d * d);
    for n in 0..d {
        v[n * d + n] = c(1.0, 0.0);
    }
    v
}

/// `|I⟩⟨I|` (unnormalized).
pub fn max_entangled_projector(d: usize) -> ComplexMatrix {
    let v = max_entangled_vector(d);
    &v * v.adjoint()
}

/// Row-major vectorization: `vec(A) = (A ⊗ I)|I⟩`, entry `(o, i) ↦ o·cols + i`.
pub fn vectorize(a: &ComplexMatrix) -> DVector<Complex64> {
    let (rows, cols) = a.shape();
    DVector::from_fn(rows * cols, |k, _| a[(k / cols, k % cols)])
}

/// Inverse of [`vectorize`].
pub fn unvectorize(v: &DVector<Complex64>, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |o, i| v[o * cols + i])
}

/// Matrix unit `|a⟩⟨b|` of size `d×d`.
pub fn matrix_unit(d: usize, a: usize, b: usize) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(d, d);
    m[(a, b)] = c(1.0, 0.0);
    m
}

/// Projector `|k⟩⟨k|` on `C^d`.
pub fn basis_projector(d: usize, k: usize) -> ComplexMatrix {
    matrix_unit(d, k, k)
}

/// Pauli matrices.
pub mod pauli {
    use super::{c, ComplexMatrix};

    pub fn i() -> ComplexMatrix {
        ComplexMatrix::identity(2, 2)
    }

    pub fn x() -> ComplexMatrix {
        ComplexMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)])
    }

    pub fn y() -> ComplexMatrix {
        ComplexMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)])
    }

    pub fn z() -> ComplexMatrix {
        ComplexMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)])
    }

    /// The six-outcome Pauli-eigenbasis POVM on a qubit (each projector weighted 1/3).
    pub fn eigenbasis_povm() -> Vec<ComplexMatrix> {
        let id = i();
        [x(), y(), z()]
            .into_iter()
            .flat_map(|p| {
                let plus = (&id + &p).scale(1.0 / 6.0);
                let minus = (&id - &p).scale(1.0 / 6.0);
                [plus, minus]
            })
            .collect()
    }
}
