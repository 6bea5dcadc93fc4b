//! Circuit realization of supermaps.
//!
//! A deterministic supermap factors as `ρ ↦ Tr_A[W (E ⊗ I_B)(V ρ V†) W†]` with isometries
//! `V: K_in → B ⊗ H_in` and `W: H_out ⊗ B → K_out ⊗ A`. The construction:
//!
//! 1. take the canonical Kraus operators `N_j` (`h_in × k_in`) of the effect map;
//!    `V = Σ_j |b_j⟩ ⊗ N_j*`, the partial transpose of `Z = Σ_j |b_j⟩ ⊗ N_j†`;
//! 2. the operators `L_{ni} = (⟨k_n| ⊗ I) S_i` and `R_{mj} = ⟨h_m| ⊗ N_j†` are two Kraus forms
//!    of the same map and the `R_{mj}` are Hilbert–Schmidt orthogonal, so the connecting
//!    isometry is `W_{ni,mj} = Tr[R_{mj}† L_{ni}] / Tr[R_{mj}† R_{mj}]`;
//! 3. conversely `S_i = (I ⊗ ⟨a_i|) W (I ⊗ Z)`.
//!
//! Index conventions: `V` rows are `(j, p)` over `(B, H_in)`; `W` rows are `(n, i)` over
//! `(K_out, A)` and columns `(m, j)` over `(H_out, B)`. Ancilla `A` has one basis vector per
//! Kraus operator of the realized supermap, `B` one per canonical effect-map Kraus operator.

use crate::error::{Error, Result};
use crate::linalg::{
    self, c, eigh, frobenius, isometry_residual, kron, partial_trace, permute_systems, random,
    rel_diff, ComplexMatrix, TensorShape,
};
use crate::operation::{contract_choi, QuantumOperation};
use crate::supermap::{Supermap, SupermapDims};
use crate::tol;

/// Isometries `V`, `W` with ancilla sizes and, for probabilistic realizations, one
/// projector on `A` per outcome.
#[derive(Debug, Clone)]
pub struct CircuitRealization {
    dims: SupermapDims,
    v: ComplexMatrix,
    w: ComplexMatrix,
    dim_a: usize,
    dim_b: usize,
    projectors: Option<Vec<ComplexMatrix>>,
}

fn isometry_check(x: &ComplexMatrix) -> Result<()> {
    let residual = isometry_residual(x);
    if residual > tol::EPS_EQ * (x.ncols().max(1) as f64).sqrt() {
        return Err(Error::NotIsometry { residual });
    }
    Ok(())
}

impl CircuitRealization {
    /// Assembles and validates a circuit. `v` is `(dim_b·h_in) × k_in`, `w` is
    /// `(k_out·dim_a) × (h_out·dim_b)`.
    pub fn new(
        dims: SupermapDims,
        v: ComplexMatrix,
        w: ComplexMatrix,
        projectors: Option<Vec<ComplexMatrix>>,
    ) -> Result<Self> {
        if v.ncols() != dims.k_in || !v.nrows().is_multiple_of(dims.h_in) || v.nrows() == 0 {
            return Err(Error::DimensionMismatch(format!(
                "V is {}x{}, expected (dim_b*{})x{}",
                v.nrows(),
                v.ncols(),
                dims.h_in,
                dims.k_in
            )));
        }
        let dim_b = v.nrows() / dims.h_in;
        if w.ncols() != dims.h_out * dim_b
            || !w.nrows().is_multiple_of(dims.k_out)
            || w.nrows() == 0
        {
            return Err(Error::DimensionMismatch(format!(
                "W is {}x{}, expected (dim_a*{})x{}",
                w.nrows(),
                w.ncols(),
                dims.k_out,
                dims.h_out * dim_b
            )));
        }
        let dim_a = w.nrows() / dims.k_out;
        linalg::check_finite(&v)?;
        linalg::check_finite(&w)?;
        isometry_check(&v)?;
        isometry_check(&w)?;
        if let Some(ps) = &projectors {
            check_projective_measurement(ps, dim_a)?;
        }
        Ok(Self {
            dims,
            v,
            w,
            dim_a,
            dim_b,
            projectors,
        })
    }

    pub fn dims(&self) -> SupermapDims {
        self.dims
    }

    pub fn v(&self) -> &ComplexMatrix {
        &self.v
    }

    pub fn w(&self) -> &ComplexMatrix {
        &self.w
    }

    pub fn dim_a(&self) -> usize {
        self.dim_a
    }

    pub fn dim_b(&self) -> usize {
        self.dim_b
    }

    pub fn projectors(&self) -> Option<&[ComplexMatrix]> {
        self.projectors.as_deref()
    }

    /// `Z = Σ_j |b_j⟩ ⊗ N_j†` as a `(dim_b·k_in) × h_in` matrix, read off `V` by partial
    /// transposition of its second factor.
    pub fn z(&self) -> ComplexMatrix {
        let SupermapDims { h_in, k_in, .. } = self.dims;
        ComplexMatrix::from_fn(self.dim_b * k_in, h_in, |row, p| {
            let (j, q) = (row / k_in, row % k_in);
            self.v[(j * h_in + p, q)]
        })
    }

    /// `S_i = (I ⊗ ⟨a_i|) W (I ⊗ Z)` for every ancilla index `i`.
    pub fn kraus_operators(&self) -> Vec<ComplexMatrix> {
        let SupermapDims {
            h_in,
            h_out,
            k_in,
            k_out,
        } = self.dims;
        let (dim_a, dim_b) = (self.dim_a, self.dim_b);
        (0..dim_a)
            .map(|i| {
                ComplexMatrix::from_fn(k_out * k_in, h_out * h_in, |row, col| {
                    let (n, q) = (row / k_in, row % k_in);
                    let (m, p) = (col / h_in, col % h_in);
                    let mut s = c(0.0, 0.0);
                    for j in 0..dim_b {
                        s += self.w[(n * dim_a + i, m * dim_b + j)] * self.v[(j * h_in + p, q)];
                    }
                    s
                })
            })
            .collect()
    }

    /// The realized supermap(s): one per projector, or a single deterministic one when no
    /// measurement is attached.
    pub fn to_supermaps(&self) -> Result<Vec<Supermap>> {
        let kraus = self.kraus_operators();
        match &self.projectors {
            None => Ok(vec![Supermap::new(self.dims, kraus)?]),
            Some(ps) => ps
                .iter()
                .map(|p| {
                    let e = eigh(p)?;
                    let ops: Vec<ComplexMatrix> = e
                        .values
                        .iter()
                        .enumerate()
                        .take_while(|&(_, &lambda)| lambda > 0.5)
                        .map(|(k, _)| {
                            let u = e.vectors.column(k);
                            kraus.iter().enumerate().fold(
                                ComplexMatrix::zeros(kraus[0].nrows(), kraus[0].ncols()),
                                |acc, (i, s)| acc + s * u[i].conj(),
                            )
                        })
                        .collect();
                    if ops.is_empty() {
                        Supermap::new(
                            self.dims,
                            vec![ComplexMatrix::zeros(kraus[0].nrows(), kraus[0].ncols())],
                        )
                    } else {
                        Supermap::new(self.dims, ops)
                    }
                })
                .collect(),
        }
    }

    fn projector(&self, outcome: Option<usize>) -> Result<Option<&ComplexMatrix>> {
        match outcome {
            None => Ok(None),
            Some(k) => self
                .projectors
                .as_ref()
                .and_then(|ps| ps.get(k))
                .map(Some)
                .ok_or_else(|| Error::InvalidArgument(format!("no projector for outcome {k}"))),
        }
    }

    /// Runs the circuit on an input operation and state:
    /// `Tr_A[(I ⊗ P) W (E ⊗ I_B)(V ρ V†) W†]`, with `P` the projector of `outcome`
    /// (or the identity for `None`).
    pub fn simulate(
        &self,
        op: &QuantumOperation,
        rho: &ComplexMatrix,
        outcome: Option<usize>,
    ) -> Result<ComplexMatrix> {
        let SupermapDims {
            h_in,
            h_out,
            k_in,
            k_out,
        } = self.dims;
        if op.dim_in() != h_in || op.dim_out() != h_out {
            return Err(Error::DimensionMismatch(
                "operation does not fit the circuit".into(),
            ));
        }
        linalg::check_square(rho, k_in, "input state")?;
        let projector = self.projector(outcome)?;

        let prepared = &self.v * rho * self.v.adjoint();
        let b_first = TensorShape::new([self.dim_b, h_in])?;
        let in_first = permute_systems(&prepared, &b_first, &[1, 0])?;
        let extended = QuantumOperation::tensor(op, &QuantumOperation::identity(self.dim_b));
        let mid = extended.apply(&in_first)?;
        let mut out = &self.w * mid * self.w.adjoint();
        if let Some(p) = projector {
            out = kron(&ComplexMatrix::identity(k_out, k_out), p) * out;
        }
        partial_trace(&out, &TensorShape::new([k_out, self.dim_a])?, &[0])
    }

    /// Output Choi operator `Tr_A[(I ⊗ P ⊗ I) M E M†]` with `M = (W ⊗ I_{K_in})(I_{H_out} ⊗ Z)`,
    /// for any operator `E` on `H_out ⊗ H_in`.
    pub fn output_choi(&self, e: &ComplexMatrix, outcome: Option<usize>) -> Result<ComplexMatrix> {
        let SupermapDims {
            h_in,
            h_out,
            k_in,
            k_out,
        } = self.dims;
        linalg::check_square(e, h_out * h_in, "input Choi operator")?;
        let projector = self.projector(outcome)?;
        let m = kron(&self.w, &ComplexMatrix::identity(k_in, k_in))
            * kron(&ComplexMatrix::identity(h_out, h_out), &self.z());
        let mut x = &m * e * m.adjoint();
        let shape = TensorShape::new([k_out, self.dim_a, k_in])?;
        if let Some(p) = projector {
            let lift = linalg::kron_all([
                &ComplexMatrix::identity(k_out, k_out),
                p,
                &ComplexMatrix::identity(k_in, k_in),
            ]);
            x = lift * x;
        }
        partial_trace(&x, &shape, &[0, 2])
    }
}

fn check_projective_measurement(ps: &[ComplexMatrix], dim_a: usize) -> Result<()> {
    if ps.is_empty() {
        return Err(Error::InvalidArgument("empty projector list".into()));
    }
    let mut sum = ComplexMatrix::zeros(dim_a, dim_a);
    for (k, p) in ps.iter().enumerate() {
        linalg::check_square(p, dim_a, "ancilla projector")?;
        let residual = rel_diff(&(p * p), p).max(linalg::hermiticity_residual(p));
        if residual > tol::EPS_EQ {
            return Err(Error::InvalidArgument(format!(
                "projector {k} is not an orthogonal projector (residual {residual:.3e})"
            )));
        }
        for q in &ps[k + 1..] {
            let overlap = frobenius(&(p * q));
            if overlap > tol::EPS_EQ {
                return Err(Error::InvalidArgument(format!(
                    "projectors are not mutually orthogonal (overlap {overlap:.3e})"
                )));
            }
        }
        sum += p;
    }
    let residual = rel_diff(&sum, &ComplexMatrix::identity(dim_a, dim_a));
    if residual > tol::EPS_EQ {
        return Err(Error::InvalidArgument(format!(
            "projectors do not sum to the identity (residual {residual:.3e})"
        )));
    }
    Ok(())
}

/// Factors a deterministic supermap into isometries `V`, `W`.
pub fn realize(s: &Supermap) -> Result<CircuitRealization> {
    let n = s.effect_map()?;
    let SupermapDims {
        h_in,
        h_out,
        k_in,
        k_out,
    } = s.dims();
    let n_ops = n.kraus();
    let dim_b = n_ops.len();
    let dim_a = s.kraus().len();

    let v = ComplexMatrix::from_fn(dim_b * h_in, k_in, |row, q| {
        let (j, p) = (row / h_in, row % h_in);
        n_ops[j][(p, q)].conj()
    });

    let norms: Vec<f64> = n_ops.iter().map(|nj| nj.norm_squared()).collect();
    let mut w = ComplexMatrix::zeros(k_out * dim_a, h_out * dim_b);
    for (i, si) in s.kraus().iter().enumerate() {
        for nk in 0..k_out {
            for m in 0..h_out {
                for (j, nj) in n_ops.iter().enumerate() {
                    // Tr[R_{mj}† L_{ni}] = Σ_{q,p} N_j[p,q] S_i[(n,q),(m,p)]
                    let mut overlap = c(0.0, 0.0);
                    for q in 0..k_in {
                        for p in 0..h_in {
                            overlap += nj[(p, q)] * si[(nk * k_in + q, m * h_in + p)];
                        }
                    }
                    w[(nk * dim_a + i, m * dim_b + j)] = overlap / norms[j];
                }
            }
        }
    }

    CircuitRealization::new(s.dims(), v, w, None)
}

/// Realizes a family of probabilistic supermaps whose sum is deterministic: the circuit of
/// the sum followed by a projective measurement of `A`, one projector per part.
pub fn realize_probabilistic(parts: &[Supermap]) -> Result<CircuitRealization> {
    let total = Supermap::sum(parts)?;
    let base = realize(&total)?;
    let dim_a = base.dim_a;
    let mut offset = 0;
    let projectors = parts
        .iter()
        .map(|part| {
            let mut p = ComplexMatrix::zeros(dim_a, dim_a);
            for k in offset..offset + part.kraus().len() {
                p[(k, k)] = c(1.0, 0.0);
            }
            offset += part.kraus().len();
            p
        })
        .collect();
    CircuitRealization::new(base.dims, base.v, base.w, Some(projectors))
}

/// Supermap(s) realized by a circuit; see [`CircuitRealization::to_supermaps`].
pub fn circuit_to_supermap(circuit: &CircuitRealization) -> Result<Vec<Supermap>> {
    circuit.to_supermaps()
}

/// Result of comparing a measured circuit against the per-part supermaps it realizes.
#[derive(Debug, Clone, PartialEq)]
pub struct DelayedReadingReport {
    pub trials: usize,
    pub outcomes: usize,
    /// Largest `‖circuit output − direct part action‖_F` over trials and outcomes.
    pub max_residual: f64,
    /// Largest `|Σ_j p_j − 1|` over trials, for random channels and states.
    pub max_probability_residual: f64,
    pub failures: Vec<String>,
}

impl DelayedReadingReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
            && self.max_residual <= tol::EPS_EQ
            && self.max_probability_residual <= tol::EPS_EQ
    }
}

/// Checks that the single-final-measurement circuit of [`realize_probabilistic`] reproduces
/// each part's action on random channels and states.
pub fn delayed_reading_check(parts: &[Supermap], trials: usize, seed: u64) -> DelayedReadingReport {
    let mut report = DelayedReadingReport {
        trials,
        outcomes: parts.len(),
        max_residual: 0.0,
        max_probability_residual: 0.0,
        failures: Vec::new(),
    };
    let circuit = match realize_probabilistic(parts) {
        Ok(circuit) => circuit,
        Err(e) => {
            report.failures.push(format!("realization failed: {e}"));
            return report;
        }
    };
    let dims = circuit.dims();
    let mut rng = random::rng(seed);
    let min_rank = dims.h_in.div_ceil(dims.h_out);
    for trial in 0..trials {
        let rank = min_rank + trial % 3;
        let e = match QuantumOperation::random_channel_with(&mut rng, dims.h_in, dims.h_out, rank) {
            Ok(e) => e,
            Err(err) => {
                report.failures.push(format!("trial {trial}: {err}"));
                continue;
            }
        };
        let rho = random::density_matrix(&mut rng, dims.k_in, dims.k_in);
        let mut total_probability = 0.0;
        for (j, part) in parts.iter().enumerate() {
            let outcome = (|| -> Result<(f64, f64)> {
                let direct =
                    contract_choi(&part.apply_choi(e.choi())?, dims.k_in, dims.k_out, &rho)?;
                let measured = circuit.simulate(&e, &rho, Some(j))?;
                Ok((frobenius(&(measured.clone() - direct)), measured.trace().re))
            })();
            match outcome {
                Ok((residual, p)) => {
                    report.max_residual = report.max_residual.max(residual);
                    total_probability += p;
                }
                Err(err) => report
                    .failures
                    .push(format!("trial {trial}, outcome {j}: {err}")),
            }
        }
        report.max_probability_residual = report
            .max_probability_residual
            .max((total_probability - 1.0).abs());
    }
    report
}

/// Deterministic supermap built from random isometries `V: K_in → B ⊗ H_in` and
/// `W: H_out ⊗ B → K_out ⊗ A`; a fixture for the realization round trip.
pub fn random_deterministic_supermap<R: rand::Rng + ?Sized>(
    rng: &mut R,
    dims: SupermapDims,
    dim_b: usize,
    dim_a: usize,
) -> Result<Supermap> {
    let v = random::isometry(rng, dim_b * dims.h_in, dims.k_in)?;
    let w = random::isometry(rng, dims.k_out * dim_a, dims.h_out * dim_b)?;
    let circuit = CircuitRealization::new(dims, v, w, None)?;
    Supermap::new(dims, circuit.kraus_operators())
}

/// Splits `s` into `parts` probabilistic supermaps summing to `s`: the Kraus index is
/// mixed by a random isometry `C^n → C^parts ⊗ C^n`, and block `k` gives the Kraus list of part `k`.
pub fn random_decomposition<R: rand::Rng + ?Sized>(
    rng: &mut R,
    s: &Supermap,
    parts: usize,
) -> Result<Vec<Supermap>> {
    if parts == 0 {
        return Err(Error::InvalidArgument(
            "at least one part is required".into(),
        ));
    }
    let n = s.kraus().len();
    let mix = random::isometry(rng, parts * n, n)?;
    (0..parts)
        .map(|k| {
            let kraus = (0..n)
                .map(|l| {
                    s.kraus().iter().enumerate().fold(
                        ComplexMatrix::zeros(s.kraus()[0].nrows(), s.kraus()[0].ncols()),
                        |acc, (i, si)| acc + si * mix[(k * n + l, i)],
                    )
                })
                .collect();
            Supermap::new(s.dims(), kraus)
        })
        .collect()
}
