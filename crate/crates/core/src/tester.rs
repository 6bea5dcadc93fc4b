//! Testers (process POVMs): families of positive operators `{P_j}` on `H_out ⊗ H_in` with
//! `Σ_j P_j = I_{H_out} ⊗ σ`, assigning outcome probabilities `p_j = Tr[E P_j]` to
//! operations with Choi operator `E`.
//!
//! A tester built from a physical experiment (prepare `ω` on `H_in ⊗ B`, run the channel on
//! the first factor, measure `{M_j}` on `H_out ⊗ B`) carries `σ = ω_inᵀ`, the transposed
//! reduced input, because Choi-space pairing introduces a transpose on the input side.

use crate::error::{Error, Result};
use crate::linalg::{
    self, c, check_psd, frobenius, kron, numerical_rank, partial_trace, vectorize, ComplexMatrix,
    TensorShape,
};
use crate::operation::QuantumOperation;
use crate::supermap::{Supermap, SupermapDims};
use crate::tol;

#[derive(Debug, Clone)]
pub struct Tester {
    h_in: usize,
    h_out: usize,
    effects: Vec<ComplexMatrix>,
    sigma: ComplexMatrix,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeDistribution {
    pub probabilities: Vec<f64>,
}

impl OutcomeDistribution {
    pub fn total(&self) -> f64 {
        self.probabilities.iter().sum()
    }
}

/// Checks that `effects` form a POVM on `C^dim`; returns the normalization residual.
pub fn check_povm(effects: &[ComplexMatrix], dim: usize) -> Result<f64> {
    if effects.is_empty() {
        return Err(Error::InvalidPovm {
            residual: f64::INFINITY,
        });
    }
    let mut sum = ComplexMatrix::zeros(dim, dim);
    for e in effects {
        linalg::check_square(e, dim, "POVM element")?;
        check_psd(e)?;
        sum += e;
    }
    let residual = frobenius(&(sum - ComplexMatrix::identity(dim, dim)));
    if residual > tol::EPS_EQ * (dim as f64).sqrt() {
        return Err(Error::InvalidPovm { residual });
    }
    Ok(residual)
}

impl Tester {
    /// Validates positivity of every effect and the normalization `Σ_j P_j = I ⊗ σ`,
    /// with `σ = Tr_{H_out}[Σ_j P_j] / h_out` a density matrix.
    pub fn new(h_in: usize, h_out: usize, effects: Vec<ComplexMatrix>) -> Result<Self> {
        if h_in == 0 || h_out == 0 {
            return Err(Error::InvalidArgument("dimensions must be positive".into()));
        }
        if effects.is_empty() {
            return Err(Error::InvalidArgument(
                "a tester needs at least one effect".into(),
            ));
        }
        let n = h_in * h_out;
        let mut sum = ComplexMatrix::zeros(n, n);
        for p in &effects {
            linalg::check_square(p, n, "tester effect")?;
            check_psd(p)?;
            sum += p;
        }
        let residual = Self::normalization_residual_of(&sum, h_in, h_out);
        if residual > tol::EPS_EQ {
            return Err(Error::NotNormalized { residual });
        }
        let sigma =
            partial_trace(&sum, &TensorShape::new([h_out, h_in])?, &[1])?.unscale(h_out as f64);
        Ok(Self {
            h_in,
            h_out,
            effects,
            sigma,
        })
    }

    /// Combined deviation of `Σ_j P_j` from `I ⊗ σ` (relative) and of `Tr[σ]` from one.
    fn normalization_residual_of(sum: &ComplexMatrix, h_in: usize, h_out: usize) -> f64 {
        let shape = TensorShape::new([h_out, h_in]).expect("positive");
        let sigma = partial_trace(sum, &shape, &[1])
            .expect("consistent")
            .unscale(h_out as f64);
        let product = kron(&ComplexMatrix::identity(h_out, h_out), &sigma);
        let product_residual = linalg::rel_diff(sum, &product);
        let trace_residual = (sigma.trace() - c(1.0, 0.0)).norm();
        product_residual.max(trace_residual)
    }

    /// Normalization residual of an arbitrary effect list (no validation).
    pub fn normalization_residual(
        effects: &[ComplexMatrix],
        h_in: usize,
        h_out: usize,
    ) -> Result<f64> {
        let n = h_in * h_out;
        let mut sum = ComplexMatrix::zeros(n, n);
        for p in effects {
            linalg::check_square(p, n, "tester effect")?;
            sum += p;
        }
        Ok(Self::normalization_residual_of(&sum, h_in, h_out))
    }

    /// Prepare-and-measure tester: feed `rho` and measure the output with `povm`;
    /// effects `M_j ⊗ ρᵀ`.
    pub fn prepare_measure(rho: &ComplexMatrix, povm: &[ComplexMatrix]) -> Result<Self> {
        let h_in = rho.nrows();
        linalg::check_density_matrix(rho, h_in)?;
        let h_out = povm.first().map(|m| m.nrows()).unwrap_or(0);
        check_povm(povm, h_out)?;
        let rt = rho.transpose();
        Self::new(h_in, h_out, povm.iter().map(|m| kron(m, &rt)).collect())
    }

    /// Tester of the experiment "prepare `input_state` on `H_in ⊗ B`, apply the operation to
    /// `H_in`, measure `povm` on `H_out ⊗ B`". Effects are
    /// `P_j[(b,q),(a,p)] = Σ_{s,t} ω[(p,s),(q,t)] M_j[(b,t),(a,s)]`.
    pub fn from_circuit(
        h_in: usize,
        h_out: usize,
        input_state: &ComplexMatrix,
        povm: &[ComplexMatrix],
    ) -> Result<Self> {
        if h_in == 0 || h_out == 0 || !input_state.nrows().is_multiple_of(h_in) {
            return Err(Error::DimensionMismatch(format!(
                "input state of size {} does not factor as {h_in} x ancilla",
                input_state.nrows()
            )));
        }
        let anc = input_state.nrows() / h_in;
        linalg::check_density_matrix(input_state, h_in * anc)?;
        check_povm(povm, h_out * anc)?;
        let effects = povm
            .iter()
            .map(|m| {
                ComplexMatrix::from_fn(h_out * h_in, h_out * h_in, |row, col| {
                    let (b, q) = (row / h_in, row % h_in);
                    let (a, p) = (col / h_in, col % h_in);
                    let mut acc = c(0.0, 0.0);
                    for s in 0..anc {
                        for t in 0..anc {
                            acc += input_state[(p * anc + s, q * anc + t)]
                                * m[(b * anc + t, a * anc + s)];
                        }
                    }
                    acc
                })
            })
            .collect();
        Self::new(h_in, h_out, effects)
    }

    pub fn h_in(&self) -> usize {
        self.h_in
    }

    pub fn h_out(&self) -> usize {
        self.h_out
    }

    pub fn effects(&self) -> &[ComplexMatrix] {
        &self.effects
    }

    pub fn sigma(&self) -> &ComplexMatrix {
        &self.sigma
    }

    pub fn len(&self) -> usize {
        self.effects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.effects.is_empty()
    }

    /// `p_j = Tr[E P_j]`, snapped into `[0, 1]` only when within `EPS_EQ` of the interval.
    pub fn evaluate(&self, op: &QuantumOperation) -> Result<OutcomeDistribution> {
        if op.dim_in() != self.h_in || op.dim_out() != self.h_out {
            return Err(Error::DimensionMismatch(format!(
                "tester for {} -> {} operations, got {} -> {}",
                self.h_in,
                self.h_out,
                op.dim_in(),
                op.dim_out()
            )));
        }
        let probabilities = self
            .effects
            .iter()
            .map(|p| {
                let raw = linalg::trace_product(op.choi(), p).re;
                match raw {
                    x if (-tol::EPS_EQ..0.0).contains(&x) => 0.0,
                    x if x > 1.0 && x <= 1.0 + tol::EPS_EQ => 1.0,
                    x => x,
                }
            })
            .collect();
        Ok(OutcomeDistribution { probabilities })
    }

    /// Success probability `Σ_j prior_j · p(j | ops[j])` of guessing "operation j" on outcome j.
    pub fn discrimination_probability(
        &self,
        ops: &[QuantumOperation],
        priors: &[f64],
    ) -> Result<f64> {
        if ops.len() != self.effects.len() || priors.len() != ops.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} outcomes, {} operations, {} priors",
                self.effects.len(),
                ops.len(),
                priors.len()
            )));
        }
        let total: f64 = priors.iter().sum();
        if priors.iter().any(|&p| p < 0.0) || (total - 1.0).abs() > tol::EPS_EQ {
            return Err(Error::InvalidArgument(format!(
                "priors must be a distribution, sum is {total}"
            )));
        }
        ops.iter()
            .zip(priors)
            .enumerate()
            .map(|(j, (op, prior))| Ok(prior * self.evaluate(op)?.probabilities[j]))
            .sum()
    }

    /// Rank of the span of the effects (rank of the stacked vectorized effects).
    pub fn span_rank(&self) -> usize {
        let n = self.h_in * self.h_out;
        let mut stacked = ComplexMatrix::zeros(self.effects.len(), n * n);
        for (j, p) in self.effects.iter().enumerate() {
            stacked.set_row(j, &vectorize(p).transpose());
        }
        numerical_rank(&stacked, tol::RANK_REL)
    }

    /// The effects span the whole operator space on `H_out ⊗ H_in`, so `E ↦ (p_j)` is injective.
    pub fn is_informationally_complete(&self) -> bool {
        let n = self.h_in * self.h_out;
        self.span_rank() == n * n
    }

    /// One probabilistic supermap per outcome, with one-dimensional `K_in`, `K_out` and
    /// bra-vector Kraus operators `⟨v_i|`, `P_j = Σ_i |v_i⟩⟨v_i|`.
    pub fn as_supermaps(&self) -> Result<Vec<Supermap>> {
        let dims = SupermapDims::new(self.h_in, self.h_out, 1, 1);
        self.effects
            .iter()
            .map(|p| {
                let e = linalg::eigh(p)?;
                let mut kraus: Vec<ComplexMatrix> = e
                    .values
                    .iter()
                    .enumerate()
                    .filter(|&(_, &lambda)| lambda > tol::EPS_POS * e.max())
                    .map(|(k, &lambda)| {
                        let bra = e.vectors.column(k).adjoint().scale(lambda.sqrt());
                        ComplexMatrix::from_iterator(1, p.ncols(), bra.iter().copied())
                    })
                    .collect();
                if kraus.is_empty() {
                    kraus.push(ComplexMatrix::zeros(1, p.ncols()));
                }
                Supermap::new(dims, kraus)
            })
            .collect()
    }
}
