//! Supermaps: completely positive maps acting on Choi operators,
//! `S(E) = Σ_i S_i E S_i†` with `S_i: H_out ⊗ H_in → K_out ⊗ K_in`.
//!
//! A supermap is deterministic when it sends channels to channels. This is decided
//! through the dual map: `S_*(I_{K_out} ⊗ ρ)` must equal `I_{H_out} ⊗ N_*(ρ)` for a
//! channel `N_*` from `K_in` to `H_in`. The Heisenberg picture `N` of that channel is the
//! effect map, which carries input effects to output effects:
//! `Tr_{K_out}[S(E)] = N(Tr_{H_out}[E])`.

use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::linalg::{
    self, check_finite, frobenius, hermitian_part, kron, matrix_unit, partial_trace,
    permutation_matrix, rel_diff, ComplexMatrix, TensorShape,
};
use crate::operation::{canonical_kraus, QuantumOperation};
use crate::tol;

/// Space dimensions of a supermap: it maps operations `H_in → H_out` to operations
/// `K_in → K_out`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SupermapDims {
    pub h_in: usize,
    pub h_out: usize,
    pub k_in: usize,
    pub k_out: usize,
}

impl SupermapDims {
    pub fn new(h_in: usize, h_out: usize, k_in: usize, k_out: usize) -> Self {
        Self {
            h_in,
            h_out,
            k_in,
            k_out,
        }
    }

    /// Dimension of `H_out ⊗ H_in`.
    pub fn input_space(&self) -> usize {
        self.h_out * self.h_in
    }

    /// Dimension of `K_out ⊗ K_in`.
    pub fn output_space(&self) -> usize {
        self.k_out * self.k_in
    }
}

#[derive(Debug, Clone)]
struct Determinism {
    /// Largest normalized violation found; zero-ish for deterministic supermaps.
    residual: f64,
    deterministic: bool,
    /// Choi operator of `N_*` on `H_in ⊗ K_in`.
    induced_choi: ComplexMatrix,
}

/// A supermap in Kraus form. The determinism verdict is computed lazily and cached.
#[derive(Debug, Clone)]
pub struct Supermap {
    dims: SupermapDims,
    kraus: Vec<ComplexMatrix>,
    analysis: OnceLock<Determinism>,
}

/// Identity-preserving CP map `N(P) = Σ_l N_l† P N_l` from effects on `H_in` to effects on `K_in`.
/// Each `N_l` is `h_in × k_in`; `N_*(ρ) = Σ_l N_l ρ N_l†` is the Schrödinger picture.
#[derive(Debug, Clone)]
pub struct EffectMap {
    h_in: usize,
    k_in: usize,
    kraus: Vec<ComplexMatrix>,
}

impl EffectMap {
    pub fn new(h_in: usize, k_in: usize, kraus: Vec<ComplexMatrix>) -> Result<Self> {
        if kraus.is_empty() {
            return Err(Error::EmptyKraus);
        }
        if let Some(bad) = kraus.iter().find(|n| n.shape() != (h_in, k_in)) {
            return Err(Error::DimensionMismatch(format!(
                "effect-map Kraus operator is {}x{}, expected {h_in}x{k_in}",
                bad.nrows(),
                bad.ncols()
            )));
        }
        let map = Self { h_in, k_in, kraus };
        let residual = map.identity_residual();
        if residual > tol::EPS_EQ * (k_in as f64).sqrt() {
            return Err(Error::NotChannel { residual });
        }
        Ok(map)
    }

    pub fn h_in(&self) -> usize {
        self.h_in
    }

    pub fn k_in(&self) -> usize {
        self.k_in
    }

    pub fn kraus(&self) -> &[ComplexMatrix] {
        &self.kraus
    }

    /// `N(P) = Σ_l N_l† P N_l`.
    pub fn apply(&self, p: &ComplexMatrix) -> Result<ComplexMatrix> {
        linalg::check_square(p, self.h_in, "effect")?;
        Ok(self
            .kraus
            .iter()
            .fold(ComplexMatrix::zeros(self.k_in, self.k_in), |acc, n| {
                acc + n.adjoint() * p * n
            }))
    }

    /// `N_*(ρ) = Σ_l N_l ρ N_l†`.
    pub fn apply_predual(&self, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        linalg::check_square(rho, self.k_in, "state")?;
        Ok(self
            .kraus
            .iter()
            .fold(ComplexMatrix::zeros(self.h_in, self.h_in), |acc, n| {
                acc + n * rho * n.adjoint()
            }))
    }

    /// `‖Σ_l N_l† N_l − I‖_F`.
    pub fn identity_residual(&self) -> f64 {
        let sum = self
            .kraus
            .iter()
            .fold(ComplexMatrix::zeros(self.k_in, self.k_in), |acc, n| {
                acc + n.adjoint() * n
            });
        frobenius(&(sum - ComplexMatrix::identity(self.k_in, self.k_in)))
    }

    /// Largest deviation of `N` from the identity map on the matrix-unit basis;
    /// infinite when `h_in != k_in`.
    pub fn identity_map_residual(&self) -> f64 {
        if self.h_in != self.k_in {
            return f64::INFINITY;
        }
        let d = self.h_in;
        let mut worst: f64 = 0.0;
        for a in 0..d {
            for b in 0..d {
                let u = matrix_unit(d, a, b);
                let image = self.apply(&u).expect("square");
                worst = worst.max(frobenius(&(image - u)));
            }
        }
        worst
    }
}

impl Supermap {
    pub fn new(dims: SupermapDims, kraus: Vec<ComplexMatrix>) -> Result<Self> {
        if [dims.h_in, dims.h_out, dims.k_in, dims.k_out].contains(&0) {
            return Err(Error::InvalidArgument(
                "supermap dimensions must be positive".into(),
            ));
        }
        if kraus.is_empty() {
            return Err(Error::EmptyKraus);
        }
        for s in &kraus {
            if s.shape() != (dims.output_space(), dims.input_space()) {
                return Err(Error::DimensionMismatch(format!(
                    "supermap Kraus operator is {}x{}, expected {}x{}",
                    s.nrows(),
                    s.ncols(),
                    dims.output_space(),
                    dims.input_space()
                )));
            }
            check_finite(s)?;
        }
        Ok(Self {
            dims,
            kraus,
            analysis: OnceLock::new(),
        })
    }

    /// The identity supermap on operations `H_in → H_out`.
    pub fn identity(h_in: usize, h_out: usize) -> Self {
        let n = h_in * h_out;
        Self::new(
            SupermapDims::new(h_in, h_out, h_in, h_out),
            vec![ComplexMatrix::identity(n, n)],
        )
        .expect("identity is well formed")
    }

    pub fn dims(&self) -> SupermapDims {
        self.dims
    }

    pub fn kraus(&self) -> &[ComplexMatrix] {
        &self.kraus
    }

    /// `Σ_i S_i X S_i†` for an arbitrary operator `X` on `H_out ⊗ H_in`.
    pub fn apply_choi(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        let n = self.dims.output_space();
        linalg::check_square(x, self.dims.input_space(), "input Choi operator")?;
        Ok(self
            .kraus
            .iter()
            .fold(ComplexMatrix::zeros(n, n), |acc, s| {
                acc + s * x * s.adjoint()
            }))
    }

    /// Transforms a quantum operation. Fails if the image is not a valid operation
    /// (for instance a probabilistic supermap fed with something that is not a channel).
    pub fn apply(&self, op: &QuantumOperation) -> Result<QuantumOperation> {
        if op.dim_in() != self.dims.h_in || op.dim_out() != self.dims.h_out {
            return Err(Error::DimensionMismatch(format!(
                "supermap expects operations {} -> {}, got {} -> {}",
                self.dims.h_in,
                self.dims.h_out,
                op.dim_in(),
                op.dim_out()
            )));
        }
        let choi = hermitian_part(&self.apply_choi(op.choi())?);
        QuantumOperation::new(self.dims.k_in, self.dims.k_out, choi)
    }

    /// Dual map `S_*(O) = Σ_i S_i† O S_i`.
    pub fn dual(&self, o: &ComplexMatrix) -> Result<ComplexMatrix> {
        let n = self.dims.input_space();
        linalg::check_square(o, self.dims.output_space(), "dual-map argument")?;
        Ok(self
            .kraus
            .iter()
            .fold(ComplexMatrix::zeros(n, n), |acc, s| {
                acc + s.adjoint() * o * s
            }))
    }

    fn analysis(&self) -> &Determinism {
        self.analysis.get_or_init(|| self.analyze())
    }

    fn analyze(&self) -> Determinism {
        let SupermapDims {
            h_in,
            h_out,
            k_in,
            k_out,
        } = self.dims;
        let h_shape = TensorShape::new([h_out, h_in]).expect("positive");
        let id_kout = ComplexMatrix::identity(k_out, k_out);
        let id_hout = ComplexMatrix::identity(h_out, h_out);
        let mut residual: f64 = 0.0;
        let mut induced_choi = ComplexMatrix::zeros(h_in * k_in, h_in * k_in);

        for a in 0..k_in {
            for b in 0..k_in {
                let unit = matrix_unit(k_in, a, b);
                let x = self.dual(&kron(&id_kout, &unit)).expect("square");
                let image = partial_trace(&x, &h_shape, &[1])
                    .expect("consistent")
                    .unscale(h_out as f64);
                let product = kron(&id_hout, &image);
                residual = residual.max(rel_diff(&x, &product).min(frobenius(&(&x - &product))));
                induced_choi += kron(&image, &unit);
            }
        }

        // N_* must be trace preserving and CP.
        let n_shape = TensorShape::new([h_in, k_in]).expect("positive");
        let marginal = partial_trace(&induced_choi, &n_shape, &[1]).expect("consistent");
        let tp =
            frobenius(&(marginal - ComplexMatrix::identity(k_in, k_in))) / (k_in as f64).sqrt();
        residual = residual.max(tp);
        let cp_ok = match linalg::eigh(&induced_choi) {
            Ok(e) => {
                let floor = linalg::positivity_floor(e.max());
                if e.min() < floor {
                    residual = residual.max(-e.min());
                    false
                } else {
                    true
                }
            }
            Err(Error::NotHermitian { residual: r }) => {
                residual = residual.max(r);
                false
            }
            Err(_) => false,
        };
        Determinism {
            residual,
            deterministic: cp_ok && residual <= tol::EPS_EQ,
            induced_choi,
        }
    }

    /// Largest violation of the dual-map determinism condition (relative residuals of the
    /// product form, trace preservation and positivity of the induced map).
    pub fn determinism_residual(&self) -> f64 {
        self.analysis().residual
    }

    pub fn is_deterministic(&self) -> bool {
        self.analysis().deterministic
    }

    /// Canonical Kraus form of the effect map; requires a deterministic supermap.
    pub fn effect_map(&self) -> Result<EffectMap> {
        let analysis = self.analysis();
        if !analysis.deterministic {
            return Err(Error::NotDeterministic {
                residual: analysis.residual,
            });
        }
        let SupermapDims { h_in, k_in, .. } = self.dims;
        let choi = hermitian_part(&analysis.induced_choi);
        let kraus = canonical_kraus(&choi, h_in, k_in)?;
        EffectMap::new(h_in, k_in, kraus)
    }

    /// A deterministic supermap with `H_in = K_in` whose effect map is the identity.
    pub fn is_probability_preserving(&self) -> Result<bool> {
        if self.dims.h_in != self.dims.k_in {
            return Err(Error::DimensionMismatch(format!(
                "probability preservation needs H_in = K_in, got {} and {}",
                self.dims.h_in, self.dims.k_in
            )));
        }
        let n = self.effect_map()?;
        Ok(n.identity_map_residual() <= tol::EPS_EQ)
    }

    /// Independent determinism test through output effects: `E ↦ Tr_{K_out}[S(E)]` must
    /// factor through `Tr_{H_out}` via an identity-preserving CP map. Returns the verdict
    /// and the largest violation.
    pub fn effect_condition(&self) -> (bool, f64) {
        let SupermapDims {
            h_in,
            h_out,
            k_in,
            k_out,
        } = self.dims;
        let k_shape = TensorShape::new([k_out, k_in]).expect("positive");
        let output_effect = |x: &ComplexMatrix| {
            partial_trace(&self.apply_choi(x).expect("square"), &k_shape, &[1]).expect("consistent")
        };
        let mut residual: f64 = 0.0;
        // candidate N(|p⟩⟨q|) read off the first H_out diagonal block
        let mut n_images = Vec::with_capacity(h_in * h_in);
        for p in 0..h_in {
            for q in 0..h_in {
                let e = kron(&matrix_unit(h_out, 0, 0), &matrix_unit(h_in, p, q));
                n_images.push(output_effect(&e));
            }
        }
        for m in 0..h_out {
            for mp in 0..h_out {
                for p in 0..h_in {
                    for q in 0..h_in {
                        if m == 0 && mp == 0 {
                            continue;
                        }
                        let e = kron(&matrix_unit(h_out, m, mp), &matrix_unit(h_in, p, q));
                        let got = output_effect(&e);
                        let diff = if m == mp {
                            frobenius(&(got - &n_images[p * h_in + q]))
                        } else {
                            frobenius(&got)
                        };
                        residual = residual.max(diff);
                    }
                }
            }
        }
        // identity preservation
        let n_of_identity = (0..h_in).fold(ComplexMatrix::zeros(k_in, k_in), |acc, p| {
            acc + &n_images[p * h_in + p]
        });
        residual = residual.max(
            frobenius(&(n_of_identity - ComplexMatrix::identity(k_in, k_in)))
                / (k_in as f64).sqrt(),
        );
        // complete positivity: Choi of N on K_in ⊗ H_in
        let mut choi = ComplexMatrix::zeros(k_in * h_in, k_in * h_in);
        for p in 0..h_in {
            for q in 0..h_in {
                choi += kron(&n_images[p * h_in + q], &matrix_unit(h_in, p, q));
            }
        }
        let cp_ok = match linalg::eigh(&choi) {
            Ok(e) if e.min() >= linalg::positivity_floor(e.max()) => true,
            Ok(e) => {
                residual = residual.max(-e.min());
                false
            }
            Err(_) => false,
        };
        (cp_ok && residual <= tol::EPS_EQ, residual)
    }

    /// Largest `‖S(E) − T(E)‖_F` over the matrix-unit basis of `H_out ⊗ H_in`.
    pub fn action_distance(&self, other: &Supermap) -> Result<f64> {
        if self.dims != other.dims {
            return Err(Error::DimensionMismatch(format!(
                "{:?} vs {:?}",
                self.dims, other.dims
            )));
        }
        let n = self.dims.input_space();
        let mut worst: f64 = 0.0;
        for x in 0..n {
            for y in 0..n {
                let e = matrix_unit(n, x, y);
                worst = worst.max(frobenius(&(self.apply_choi(&e)? - other.apply_choi(&e)?)));
            }
        }
        Ok(worst)
    }

    /// Local parallel action `a ⊗ b`, with both input and output Choi factors in canonical
    /// `(out_a out_b, in_a in_b)` order.
    pub fn tensor(a: &Supermap, b: &Supermap) -> Supermap {
        let (da, db) = (a.dims, b.dims);
        let h_shape = TensorShape::new([da.h_out, da.h_in, db.h_out, db.h_in]).expect("positive");
        let k_shape = TensorShape::new([da.k_out, da.k_in, db.k_out, db.k_in]).expect("positive");
        let ph = permutation_matrix(&h_shape, &[0, 2, 1, 3]).expect("valid");
        let pk = permutation_matrix(&k_shape, &[0, 2, 1, 3]).expect("valid");
        let ph_dag = ph.adjoint();
        let kraus = a
            .kraus
            .iter()
            .flat_map(|ai| b.kraus.iter().map(move |bj| (ai, bj)))
            .map(|(ai, bj)| &pk * kron(ai, bj) * &ph_dag)
            .collect();
        Supermap::new(
            SupermapDims::new(
                da.h_in * db.h_in,
                da.h_out * db.h_out,
                da.k_in * db.k_in,
                da.k_out * db.k_out,
            ),
            kraus,
        )
        .expect("shapes follow from the factors")
    }

    /// Sum of supermaps with identical dimensions: the concatenation of Kraus lists.
    pub fn sum(parts: &[Supermap]) -> Result<Supermap> {
        let first = parts
            .first()
            .ok_or_else(|| Error::InvalidArgument("empty list of supermaps".into()))?;
        if let Some(bad) = parts.iter().find(|p| p.dims != first.dims) {
            return Err(Error::DimensionMismatch(format!(
                "{:?} vs {:?}",
                first.dims, bad.dims
            )));
        }
        Supermap::new(
            first.dims,
            parts.iter().flat_map(|p| p.kraus.iter().cloned()).collect(),
        )
    }
}

/// Returns `ρ` when `c = I_{H_out} ⊗ ρ` with `Tr[ρ] = 1`, i.e. when `E ↦ Tr[c E]` is one on every channel.
pub fn normalization_functional(
    c: &ComplexMatrix,
    h_out: usize,
    h_in: usize,
) -> Result<Option<ComplexMatrix>> {
    linalg::check_square(c, h_out * h_in, "functional")?;
    let shape = TensorShape::new([h_out, h_in])?;
    let rho = partial_trace(c, &shape, &[1])?.unscale(h_out as f64);
    let residual = frobenius(&(c - kron(&ComplexMatrix::identity(h_out, h_out), &rho)));
    let trace_ok = (rho.trace() - linalg::c(1.0, 0.0)).norm() <= tol::EPS_EQ;
    Ok((residual <= tol::EPS_EQ && trace_ok).then_some(rho))
}
