//! Quantum operations stored as Choi operators.
//!
//! The Choi operator of `E: B(H_in) → B(H_out)` is `E = (E ⊗ I)(|I⟩⟨I|)` on `H_out ⊗ H_in`
//! with the unnormalized `|I⟩ = Σ_n |n⟩|n⟩`, and the map is recovered as
//! `E(ρ) = Tr_in[(I ⊗ ρᵀ) E]`. States are operations with `dim_in = 1`, effects are
//! operations with `dim_out = 1`.

use crate::error::{Error, Result};
use crate::linalg::{
    self, c, check_finite, check_square, eigh, frobenius, kron, matrix_unit, permute_systems,
    random, unvectorize, vectorize, ComplexMatrix, TensorShape,
};
use crate::tol;
use rand::Rng;

/// A completely positive, trace non-increasing map held as its Choi operator
/// (factor order `out, in`). Invariants are checked on construction.
#[derive(Debug, Clone)]
pub struct QuantumOperation {
    dim_in: usize,
    dim_out: usize,
    choi: ComplexMatrix,
}

/// Kraus form `E(ρ) = Σ_j E_j ρ E_j†` with every `E_j` of shape `dim_out × dim_in`.
#[derive(Debug, Clone)]
pub struct KrausSet {
    dim_in: usize,
    dim_out: usize,
    operators: Vec<ComplexMatrix>,
}

fn check_dims(dim_in: usize, dim_out: usize) -> Result<()> {
    if dim_in == 0 || dim_out == 0 {
        return Err(Error::InvalidArgument("dimensions must be positive".into()));
    }
    Ok(())
}

/// Largest eigenvalue of a Hermitian operator that is supposed to be `≤ I`, and whether it is.
fn below_identity(p: &ComplexMatrix) -> Result<(bool, f64)> {
    let e = eigh(p)?;
    let max = e.max();
    Ok((max <= 1.0 + tol::EPS_POS * max.abs().max(1.0), max))
}

impl KrausSet {
    pub fn new(dim_in: usize, dim_out: usize, operators: Vec<ComplexMatrix>) -> Result<Self> {
        check_dims(dim_in, dim_out)?;
        if operators.is_empty() {
            return Err(Error::EmptyKraus);
        }
        for k in &operators {
            if k.shape() != (dim_out, dim_in) {
                return Err(Error::DimensionMismatch(format!(
                    "Kraus operator is {}x{}, expected {dim_out}x{dim_in}",
                    k.nrows(),
                    k.ncols()
                )));
            }
            check_finite(k)?;
        }
        let set = Self {
            dim_in,
            dim_out,
            operators,
        };
        let (ok, max_eigenvalue) = below_identity(&set.effect())?;
        if !ok {
            return Err(Error::KrausBoundViolated { max_eigenvalue });
        }
        Ok(set)
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn operators(&self) -> &[ComplexMatrix] {
        &self.operators
    }

    pub fn len(&self) -> usize {
        self.operators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.operators.is_empty()
    }

    /// `Σ_j E_j† E_j`.
    pub fn effect(&self) -> ComplexMatrix {
        self.operators
            .iter()
            .fold(ComplexMatrix::zeros(self.dim_in, self.dim_in), |acc, k| {
                acc + k.adjoint() * k
            })
    }

    /// `Σ_j E_j ρ E_j†`.
    pub fn apply(&self, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        check_square(rho, self.dim_in, "input operator")?;
        Ok(self.operators.iter().fold(
            ComplexMatrix::zeros(self.dim_out, self.dim_out),
            |acc, k| acc + k * rho * k.adjoint(),
        ))
    }

    /// Choi operator `Σ_j vec(E_j) vec(E_j)†`.
    pub fn to_operation(&self) -> Result<QuantumOperation> {
        let n = self.dim_out * self.dim_in;
        let choi = self
            .operators
            .iter()
            .fold(ComplexMatrix::zeros(n, n), |acc, k| {
                let v = vectorize(k);
                acc + &v * v.adjoint()
            });
        QuantumOperation::new(self.dim_in, self.dim_out, choi)
    }
}

/// `Tr_in[(I ⊗ ρᵀ) X]` for any operator `X` on `out ⊗ in`; the linear extension of
/// [`QuantumOperation::apply`] to Choi-space operators that need not be positive.
pub fn contract_choi(
    x: &ComplexMatrix,
    dim_in: usize,
    dim_out: usize,
    rho: &ComplexMatrix,
) -> Result<ComplexMatrix> {
    check_square(x, dim_out * dim_in, "Choi-space operator")?;
    check_square(rho, dim_in, "input operator")?;
    check_finite(rho)?;
    Ok(ComplexMatrix::from_fn(dim_out, dim_out, |a, b| {
        let mut s = c(0.0, 0.0);
        for r in 0..dim_in {
            for p in 0..dim_in {
                s += rho[(r, p)] * x[(a * dim_in + r, b * dim_in + p)];
            }
        }
        s
    }))
}

/// Hilbert–Schmidt orthogonal Kraus operators `√λ_k · unvec(v_k)` from the eigenpairs of a
/// Choi operator on `out ⊗ in`. Eigenvalues at or below `EPS_POS · λ_max` are dropped; the
/// zero map yields a single zero operator.
pub fn canonical_kraus(
    choi: &ComplexMatrix,
    dim_out: usize,
    dim_in: usize,
) -> Result<Vec<ComplexMatrix>> {
    check_square(choi, dim_out * dim_in, "Choi operator")?;
    let e = eigh(choi)?;
    let cutoff = tol::EPS_POS * e.max();
    let mut operators: Vec<ComplexMatrix> = e
        .values
        .iter()
        .enumerate()
        .take_while(|&(_, &lambda)| lambda > cutoff && lambda > 0.0)
        .map(|(k, &lambda)| {
            unvectorize(&e.vectors.column(k).into_owned(), dim_out, dim_in).scale(lambda.sqrt())
        })
        .collect();
    if operators.is_empty() {
        operators.push(ComplexMatrix::zeros(dim_out, dim_in));
    }
    Ok(operators)
}

impl QuantumOperation {
    /// Validates Hermiticity, positivity, and `Tr_out[choi] ≤ I`.
    pub fn new(dim_in: usize, dim_out: usize, choi: ComplexMatrix) -> Result<Self> {
        check_dims(dim_in, dim_out)?;
        check_square(&choi, dim_in * dim_out, "Choi operator")?;
        linalg::check_psd(&choi)?;
        let op = Self {
            dim_in,
            dim_out,
            choi,
        };
        let (ok, max_eigenvalue) = below_identity(&op.effect())?;
        if !ok {
            return Err(Error::TraceIncreasing { max_eigenvalue });
        }
        Ok(op)
    }

    pub fn identity(d: usize) -> Self {
        Self {
            dim_in: d,
            dim_out: d,
            choi: linalg::max_entangled_projector(d),
        }
    }

    /// Channel `ρ ↦ U ρ U†` for an isometry (or any contraction) `U`.
    pub fn from_isometry(u: &ComplexMatrix) -> Result<Self> {
        KrausSet::new(u.ncols(), u.nrows(), vec![u.clone()])?.to_operation()
    }

    /// State preparation: `dim_in = 1`, Choi equal to `rho`.
    pub fn from_state(rho: &ComplexMatrix) -> Result<Self> {
        linalg::check_density_matrix(rho, rho.nrows())?;
        Self::new(1, rho.nrows(), rho.clone())
    }

    /// Effect `0 ≤ P ≤ I` as an operation with `dim_out = 1`; its Choi operator is `Pᵀ`.
    pub fn from_effect(p: &ComplexMatrix) -> Result<Self> {
        Self::new(p.nrows(), 1, p.transpose())
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn choi(&self) -> &ComplexMatrix {
        &self.choi
    }

    pub fn into_choi(self) -> ComplexMatrix {
        self.choi
    }

    /// `[dim_out, dim_in]`.
    pub fn shape(&self) -> TensorShape {
        TensorShape::new([self.dim_out, self.dim_in]).expect("positive dims")
    }

    /// `Tr_in[(I ⊗ ρᵀ) E]`. Linear in `rho`, so any `dim_in × dim_in` operator is accepted;
    /// for a density matrix the trace of the result is the occurrence probability.
    pub fn apply(&self, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        contract_choi(&self.choi, self.dim_in, self.dim_out, rho)
    }

    /// Effect `P = Tr_out[E]` on `H_in`; `p(E|ρ) = Tr[ρᵀ P]`.
    pub fn effect(&self) -> ComplexMatrix {
        linalg::partial_trace(&self.choi, &self.shape(), &[1]).expect("consistent shape")
    }

    /// Occurrence probability `Tr[ρᵀ P]`.
    pub fn probability(&self, rho: &ComplexMatrix) -> Result<f64> {
        check_square(rho, self.dim_in, "input state")?;
        Ok(linalg::trace_product(&rho.transpose(), &self.effect()).re)
    }

    /// `‖Tr_out[E] − I‖_F`.
    pub fn channel_residual(&self) -> f64 {
        frobenius(&(self.effect() - ComplexMatrix::identity(self.dim_in, self.dim_in)))
    }

    pub fn is_channel(&self) -> bool {
        self.channel_residual() <= tol::EPS_EQ * (self.dim_in as f64).sqrt()
    }

    /// Canonical Kraus form; see [`canonical_kraus`].
    pub fn kraus(&self) -> KrausSet {
        let operators = canonical_kraus(&self.choi, self.dim_out, self.dim_in)
            .expect("Choi operator validated as Hermitian");
        KrausSet {
            dim_in: self.dim_in,
            dim_out: self.dim_out,
            operators,
        }
    }

    /// Multiplies the Choi operator by `factor ≥ 0`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.dim_in, self.dim_out, self.choi.scale(factor))
    }

    /// Sequential composition `second ∘ first`.
    pub fn compose(second: &Self, first: &Self) -> Result<Self> {
        if first.dim_out != second.dim_in {
            return Err(Error::DimensionMismatch(format!(
                "cannot feed output dimension {} into input dimension {}",
                first.dim_out, second.dim_in
            )));
        }
        let (din, dout) = (first.dim_in, second.dim_out);
        let mut choi = ComplexMatrix::zeros(dout * din, dout * din);
        for m in 0..din {
            for n in 0..din {
                let unit = matrix_unit(din, m, n);
                let image = second.apply(&first.apply(&unit)?)?;
                choi += kron(&image, &unit);
            }
        }
        Self::new(din, dout, choi)
    }

    /// Parallel composition `a ⊗ b` with Choi factors reordered to `(out_a out_b, in_a in_b)`.
    pub fn tensor(a: &Self, b: &Self) -> Self {
        let shape = TensorShape::new([a.dim_out, a.dim_in, b.dim_out, b.dim_in]).expect("positive");
        let choi = permute_systems(&kron(&a.choi, &b.choi), &shape, &[0, 2, 1, 3])
            .expect("valid permutation");
        Self {
            dim_in: a.dim_in * b.dim_in,
            dim_out: a.dim_out * b.dim_out,
            choi,
        }
    }

    /// Channel built from a random Stinespring isometry `C^{dim_in} → C^{dim_out} ⊗ C^{rank}`.
    pub fn random_channel(
        dim_in: usize,
        dim_out: usize,
        kraus_rank: usize,
        seed: u64,
    ) -> Result<Self> {
        Self::random_channel_with(&mut random::rng(seed), dim_in, dim_out, kraus_rank)
    }

    pub fn random_channel_with<R: Rng + ?Sized>(
        rng: &mut R,
        dim_in: usize,
        dim_out: usize,
        kraus_rank: usize,
    ) -> Result<Self> {
        check_dims(dim_in, dim_out)?;
        if kraus_rank == 0 || dim_out * kraus_rank < dim_in {
            return Err(Error::InvalidArgument(format!(
                "no channel {dim_in} -> {dim_out} with Kraus rank {kraus_rank}"
            )));
        }
        let v = random::isometry(rng, dim_out * kraus_rank, dim_in)?;
        let operators = (0..kraus_rank)
            .map(|k| ComplexMatrix::from_fn(dim_out, dim_in, |o, i| v[(o * kraus_rank + k, i)]))
            .collect();
        KrausSet::new(dim_in, dim_out, operators)?.to_operation()
    }
}
