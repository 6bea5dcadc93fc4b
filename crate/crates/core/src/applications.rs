//! Worked constructions on top of the supermap machinery: coding sandwiches, programmable
//! channels and measurements, and process tomography through a faithful state.

use crate::error::{Error, Result};
use crate::linalg::{
    self, c, check_psd, kron, matrix_unit, numerical_rank, partial_trace, vectorize, ComplexMatrix,
    TensorShape,
};
use crate::operation::{KrausSet, QuantumOperation};
use crate::supermap::{Supermap, SupermapDims};
use crate::tester::{check_povm, Tester};
use crate::tol;

fn require_channel(op: &QuantumOperation) -> Result<()> {
    if op.is_channel() {
        Ok(())
    } else {
        Err(Error::NotChannel {
            residual: op.channel_residual(),
        })
    }
}

/// The deterministic supermap `E ↦ post ∘ E ∘ pre`, with Kraus operators `D_k ⊗ C_jᵀ`.
pub fn sandwich_supermap(pre: &QuantumOperation, post: &QuantumOperation) -> Result<Supermap> {
    require_channel(pre)?;
    require_channel(post)?;
    let pre_kraus = pre.kraus();
    let kraus = post
        .kraus()
        .operators()
        .iter()
        .flat_map(|d| {
            pre_kraus
                .operators()
                .iter()
                .map(move |cj| kron(d, &cj.transpose()))
        })
        .collect();
    Supermap::new(
        SupermapDims::new(pre.dim_out(), post.dim_in(), pre.dim_in(), post.dim_out()),
        kraus,
    )
}

/// Three-qubit bit-flip repetition code.
pub mod repetition {
    use super::*;

    fn ket(d: usize, k: usize) -> ComplexMatrix {
        let mut v = ComplexMatrix::zeros(d, 1);
        v[(k, 0)] = c(1.0, 0.0);
        v
    }

    /// `|0⟩ ↦ |000⟩`, `|1⟩ ↦ |111⟩`.
    pub fn encoder() -> QuantumOperation {
        let mut u = ComplexMatrix::zeros(8, 2);
        u[(0, 0)] = c(1.0, 0.0);
        u[(7, 1)] = c(1.0, 0.0);
        QuantumOperation::from_isometry(&u).expect("isometry")
    }

    /// Majority vote: Kraus `|0⟩⟨000⊕e| + |1⟩⟨111⊕e|` over the four patterns `e` of weight ≤ 1.
    pub fn majority_decoder() -> QuantumOperation {
        let ops = [0b000usize, 0b100, 0b010, 0b001]
            .iter()
            .map(|&e| ket(2, 0) * ket(8, e).adjoint() + ket(2, 1) * ket(8, 0b111 ^ e).adjoint())
            .collect();
        KrausSet::new(8, 2, ops)
            .and_then(|k| k.to_operation())
            .expect("complete Kraus set")
    }

    /// Bit flip with probability `p` on qubit `site` (0 is the most significant).
    pub fn single_site_flip(site: usize, p: f64) -> Result<QuantumOperation> {
        if site > 2 || !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidArgument(format!(
                "site {site}, probability {p}"
            )));
        }
        let (id, x) = (linalg::pauli::i(), linalg::pauli::x());
        let mut flip = ComplexMatrix::identity(1, 1);
        for q in 0..3 {
            flip = kron(&flip, if q == site { &x } else { &id });
        }
        KrausSet::new(
            8,
            8,
            vec![
                ComplexMatrix::identity(8, 8).scale((1.0 - p).sqrt()),
                flip.scale(p.sqrt()),
            ],
        )?
        .to_operation()
    }
}

/// A fixed interaction between a system and a program register.
#[derive(Debug, Clone)]
pub enum ProgrammableDevice {
    /// Unitary `U` on `H_sys ⊗ H_prog`.
    Channel {
        unitary: ComplexMatrix,
        sys: usize,
        prog: usize,
    },
    /// Joint POVM `{E_j}` on `H_sys ⊗ H_prog`.
    Measurement {
        effects: Vec<ComplexMatrix>,
        sys: usize,
        prog: usize,
    },
}

impl ProgrammableDevice {
    pub fn unitary(unitary: ComplexMatrix, sys: usize, prog: usize) -> Result<Self> {
        let n = sys * prog;
        linalg::check_square(&unitary, n, "device unitary")?;
        let id = ComplexMatrix::identity(n, n);
        let residual = linalg::frobenius(&(unitary.adjoint() * &unitary - &id))
            .max(linalg::frobenius(&(&unitary * unitary.adjoint() - &id)));
        if residual > tol::EPS_EQ * (n as f64).sqrt() {
            return Err(Error::NotUnitary { residual });
        }
        Ok(Self::Channel { unitary, sys, prog })
    }

    pub fn measurement(effects: Vec<ComplexMatrix>, sys: usize, prog: usize) -> Result<Self> {
        check_povm(&effects, sys * prog)?;
        Ok(Self::Measurement { effects, sys, prog })
    }

    pub fn sys(&self) -> usize {
        match self {
            Self::Channel { sys, .. } | Self::Measurement { sys, .. } => *sys,
        }
    }

    pub fn prog(&self) -> usize {
        match self {
            Self::Channel { prog, .. } | Self::Measurement { prog, .. } => *prog,
        }
    }
}

/// The channel `ρ ↦ Tr_prog[U (ρ ⊗ σ) U†]` selected by the program state `σ`.
pub fn programmable_channel(
    dev: &ProgrammableDevice,
    program: &ComplexMatrix,
) -> Result<QuantumOperation> {
    let ProgrammableDevice::Channel { unitary, sys, prog } = dev else {
        return Err(Error::InvalidArgument("device has no unitary".into()));
    };
    let (sys, prog) = (*sys, *prog);
    linalg::check_density_matrix(program, prog)?;
    let shape = TensorShape::new([sys, prog])?;
    let mut choi = ComplexMatrix::zeros(sys * sys, sys * sys);
    for a in 0..sys {
        for b in 0..sys {
            let joint = unitary * kron(&matrix_unit(sys, a, b), program) * unitary.adjoint();
            let out = partial_trace(&joint, &shape, &[0])?;
            choi += kron(&out, &matrix_unit(sys, a, b));
        }
    }
    QuantumOperation::new(sys, sys, linalg::hermitian_part(&choi))
}

/// The effective POVM `P_j = Tr_prog[E_j (I ⊗ σ)]` on the system.
pub fn programmable_povm(
    dev: &ProgrammableDevice,
    program: &ComplexMatrix,
) -> Result<Vec<ComplexMatrix>> {
    let ProgrammableDevice::Measurement { effects, sys, prog } = dev else {
        return Err(Error::InvalidArgument("device has no joint POVM".into()));
    };
    linalg::check_density_matrix(program, *prog)?;
    let shape = TensorShape::new([*sys, *prog])?;
    let lifted = kron(&ComplexMatrix::identity(*sys, *sys), program);
    effects
        .iter()
        .map(|e| {
            Ok(linalg::hermitian_part(&partial_trace(
                &(e * &lifted),
                &shape,
                &[0],
            )?))
        })
        .collect()
}

/// Process tomography through a bipartite state `F` on `H_in ⊗ R`.
#[derive(Debug, Clone)]
pub struct TomographySetup {
    faithful_state: ComplexMatrix,
    h_in: usize,
    h_out: usize,
    aux: usize,
}

impl TomographySetup {
    pub fn new(faithful_state: ComplexMatrix, h_in: usize, h_out: usize) -> Result<Self> {
        if h_in == 0
            || h_out == 0
            || !faithful_state.nrows().is_multiple_of(h_in)
            || faithful_state.nrows() == 0
        {
            return Err(Error::DimensionMismatch(format!(
                "state of size {} does not factor over an input of dimension {h_in}",
                faithful_state.nrows()
            )));
        }
        let aux = faithful_state.nrows() / h_in;
        linalg::check_density_matrix(&faithful_state, h_in * aux)?;
        Ok(Self {
            faithful_state,
            h_in,
            h_out,
            aux,
        })
    }

    pub fn faithful_state(&self) -> &ComplexMatrix {
        &self.faithful_state
    }

    pub fn h_in(&self) -> usize {
        self.h_in
    }

    pub fn h_out(&self) -> usize {
        self.h_out
    }

    pub fn aux(&self) -> usize {
        self.aux
    }
}

fn psd_sqrt(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    let e = check_psd(m)?;
    let mut d = e.vectors.clone();
    for (k, &lambda) in e.values.iter().enumerate() {
        let s = lambda.max(0.0).sqrt();
        d.column_mut(k).scale_mut(s);
    }
    Ok(&d * e.vectors.adjoint())
}

/// Deterministic supermap `E ↦ (E ⊗ I_R)(F)` with trivial `K_in`.
///
/// Kraus operators are `I ⊗ G_k` with `G_k[s, p] = f_k[(p, s)]` for the columns `f_k` of `√F`.
pub fn tomography_supermap(setup: &TomographySetup) -> Result<Supermap> {
    let (h_in, h_out, r) = (setup.h_in, setup.h_out, setup.aux);
    let root = psd_sqrt(&setup.faithful_state)?;
    let id = ComplexMatrix::identity(h_out, h_out);
    let kraus = (0..root.ncols())
        .filter(|&k| root.column(k).norm() > 0.0)
        .map(|k| {
            let g = ComplexMatrix::from_fn(r, h_in, |s, p| root[(p * r + s, k)]);
            kron(&id, &g)
        })
        .collect();
    Supermap::new(SupermapDims::new(h_in, h_out, 1, h_out * r), kraus)
}

/// Rank of `E ↦ (E ⊗ I)(F)` on the operator space of `H_out ⊗ H_in`.
pub fn tomography_rank(setup: &TomographySetup) -> Result<usize> {
    let s = tomography_supermap(setup)?;
    let n = setup.h_out * setup.h_in;
    let m = s.dims().output_space();
    let mut columns = ComplexMatrix::zeros(m * m, n * n);
    for x in 0..n {
        for y in 0..n {
            let image = s.apply_choi(&matrix_unit(n, x, y))?;
            columns.set_column(x * n + y, &vectorize(&image));
        }
    }
    Ok(numerical_rank(&columns, tol::RANK_REL))
}

/// `F` is faithful when `E ↦ (E ⊗ I)(F)` is injective.
pub fn is_faithful(setup: &TomographySetup) -> Result<bool> {
    let n = setup.h_out * setup.h_in;
    Ok(tomography_rank(setup)? == n * n)
}

/// Tester `P_j = S_*(M_j)` obtained by measuring `(E ⊗ I)(F)` with an informationally
/// complete POVM on `H_out ⊗ R`.
pub fn informationally_complete_tester_for(
    setup: &TomographySetup,
    povm: &[ComplexMatrix],
) -> Result<Tester> {
    if !is_faithful(setup)? {
        return Err(Error::NotFaithful);
    }
    let m = setup.h_out * setup.aux;
    check_povm(povm, m)?;
    let mut stacked = ComplexMatrix::zeros(povm.len(), m * m);
    for (j, e) in povm.iter().enumerate() {
        stacked.set_row(j, &vectorize(e).transpose());
    }
    let rank = numerical_rank(&stacked, tol::RANK_REL);
    if rank != m * m {
        return Err(Error::PovmNotInformationallyComplete {
            rank,
            required: m * m,
        });
    }
    let s = tomography_supermap(setup)?;
    let effects = povm
        .iter()
        .map(|e| s.dual(e).map(|p| linalg::hermitian_part(&p)))
        .collect::<Result<Vec<_>>>()?;
    Tester::new(setup.h_in, setup.h_out, effects)
}

/// Measure-and-prepare channel `ρ ↦ Σ_n Tr[P_n ρ] |n⟩⟨n|` onto a classical register.
pub fn povm_as_channel(povm: &[ComplexMatrix]) -> Result<QuantumOperation> {
    let d = povm.first().map(|p| p.nrows()).unwrap_or(0);
    check_povm(povm, d)?;
    let n = povm.len();
    let mut choi = ComplexMatrix::zeros(n * d, n * d);
    for (k, p) in povm.iter().enumerate() {
        choi += kron(&linalg::basis_projector(n, k), &p.transpose());
    }
    QuantumOperation::new(d, n, choi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{basis_projector, max_entangled_projector, pauli, random, rel_diff};
    use crate::realization::realize;

    fn swap(d: usize) -> ComplexMatrix {
        ComplexMatrix::from_fn(d * d, d * d, |r, col| {
            if r == (col % d) * d + col / d {
                c(1.0, 0.0)
            } else {
                c(0.0, 0.0)
            }
        })
    }

    fn cnot() -> ComplexMatrix {
        let mut u = ComplexMatrix::zeros(4, 4);
        for (r, col) in [(0, 0), (1, 1), (2, 3), (3, 2)] {
            u[(r, col)] = c(1.0, 0.0);
        }
        u
    }

    // Choi of ρ ↦ Σ_k ⟨k|ρ|k⟩ |k⟩⟨k|.
    fn dephasing_choi(d: usize) -> ComplexMatrix {
        (0..d).fold(ComplexMatrix::zeros(d * d, d * d), |acc, k| {
            acc + kron(&basis_projector(d, k), &basis_projector(d, k))
        })
    }

    #[test]
    fn identity_sandwich_is_identity_supermap() {
        let id = QuantumOperation::identity(2);
        let s = sandwich_supermap(&id, &id).unwrap();
        assert!(s.action_distance(&Supermap::identity(2, 2)).unwrap() < 1e-12);
    }

    #[test]
    fn sandwich_rejects_non_channels() {
        let half = QuantumOperation::identity(2).scaled(0.5).unwrap();
        let id = QuantumOperation::identity(2);
        assert!(matches!(
            sandwich_supermap(&half, &id),
            Err(Error::NotChannel { .. })
        ));
        assert!(matches!(
            sandwich_supermap(&id, &half),
            Err(Error::NotChannel { .. })
        ));
    }

    #[test]
    fn unitary_sandwich_matches_composition() {
        let mut rng = random::rng(11);
        let u = QuantumOperation::from_isometry(&random::unitary(&mut rng, 2)).unwrap();
        let v =
            QuantumOperation::from_isometry(&random::isometry(&mut rng, 3, 2).unwrap()).unwrap();
        let s = sandwich_supermap(&u, &v).unwrap();
        assert!(s.is_deterministic());
        let e = QuantumOperation::random_channel(2, 2, 3, 12).unwrap();
        let expect =
            QuantumOperation::compose(&v, &QuantumOperation::compose(&e, &u).unwrap()).unwrap();
        assert!(rel_diff(s.apply(&e).unwrap().choi(), expect.choi()) < 1e-8);
    }

    #[test]
    fn post_processing_sandwich_is_probability_preserving() {
        let post = QuantumOperation::random_channel(2, 3, 2, 13).unwrap();
        let s = sandwich_supermap(&QuantumOperation::identity(2), &post).unwrap();
        assert!(s.is_probability_preserving().unwrap());
    }

    #[test]
    fn repetition_code_corrects_single_known_flip() {
        let enc = repetition::encoder();
        let dec = repetition::majority_decoder();
        assert!(enc.is_channel() && dec.is_channel());
        let s = sandwich_supermap(&enc, &dec).unwrap();
        let id = max_entangled_projector(2);
        for site in 0..3 {
            for p in [0.0, 0.1, 0.5, 1.0] {
                let noise = repetition::single_site_flip(site, p).unwrap();
                let out = s.apply(&noise).unwrap();
                assert!(rel_diff(out.choi(), &id) < 1e-8, "site {site}, p {p}");
            }
        }
    }

    #[test]
    fn repetition_code_fails_on_double_flip() {
        let enc = repetition::encoder();
        let dec = repetition::majority_decoder();
        let s = sandwich_supermap(&enc, &dec).unwrap();
        let double = QuantumOperation::compose(
            &repetition::single_site_flip(0, 1.0).unwrap(),
            &repetition::single_site_flip(1, 1.0).unwrap(),
        )
        .unwrap();
        let out = s.apply(&double).unwrap();
        let x = QuantumOperation::from_isometry(&pauli::x()).unwrap();
        assert!(rel_diff(out.choi(), x.choi()) < 1e-8);
    }

    #[test]
    fn unitary_pre_sandwich_realization_ancilla() {
        // Observation only: the ancilla dimension the realization produces.
        let mut rng = random::rng(14);
        let u = QuantumOperation::from_isometry(&random::unitary(&mut rng, 2)).unwrap();
        let unitary_post = QuantumOperation::from_isometry(&random::unitary(&mut rng, 2)).unwrap();
        let noisy_post = QuantumOperation::random_channel(2, 2, 2, 15).unwrap();
        let a = realize(&sandwich_supermap(&u, &unitary_post).unwrap()).unwrap();
        let b = realize(&sandwich_supermap(&u, &noisy_post).unwrap()).unwrap();
        assert_eq!(a.dim_b(), 1);
        assert_eq!(b.dim_b(), 1);
        assert_eq!(b.dim_a(), 2);
    }

    #[test]
    fn identity_device_gives_identity_channel() {
        let dev = ProgrammableDevice::unitary(ComplexMatrix::identity(4, 4), 2, 2).unwrap();
        let mut rng = random::rng(16);
        let sigma = random::density_matrix(&mut rng, 2, 2);
        let e = programmable_channel(&dev, &sigma).unwrap();
        assert!(rel_diff(e.choi(), &max_entangled_projector(2)) < 1e-12);
    }

    #[test]
    fn swap_device_gives_constant_channel() {
        let dev = ProgrammableDevice::unitary(swap(2), 2, 2).unwrap();
        let mut rng = random::rng(17);
        let sigma = random::density_matrix(&mut rng, 2, 2);
        let e = programmable_channel(&dev, &sigma).unwrap();
        assert!(rel_diff(e.choi(), &kron(&sigma, &pauli::i())) < 1e-8);
        let rho = random::density_matrix(&mut rng, 2, 1);
        assert!(rel_diff(&e.apply(&rho).unwrap(), &sigma) < 1e-10);
    }

    #[test]
    fn cnot_device_with_zero_program_dephases() {
        let dev = ProgrammableDevice::unitary(cnot(), 2, 2).unwrap();
        let e = programmable_channel(&dev, &basis_projector(2, 0)).unwrap();
        assert!(rel_diff(e.choi(), &dephasing_choi(2)) < 1e-8);
    }

    #[test]
    fn device_rejects_non_unitary() {
        let mut m = ComplexMatrix::identity(4, 4);
        m[(0, 0)] = c(2.0, 0.0);
        assert!(matches!(
            ProgrammableDevice::unitary(m, 2, 2),
            Err(Error::NotUnitary { .. })
        ));
    }

    #[test]
    fn programmable_channel_is_affine_in_program() {
        let mut rng = random::rng(18);
        let u = random::unitary(&mut rng, 6);
        let dev = ProgrammableDevice::unitary(u, 2, 3).unwrap();
        let s1 = random::density_matrix(&mut rng, 3, 3);
        let s2 = random::density_matrix(&mut rng, 3, 1);
        let lambda = 0.3;
        let mix = s1.scale(lambda) + s2.scale(1.0 - lambda);
        let lhs = programmable_channel(&dev, &mix).unwrap();
        let rhs = programmable_channel(&dev, &s1)
            .unwrap()
            .choi()
            .scale(lambda)
            + programmable_channel(&dev, &s2)
                .unwrap()
                .choi()
                .scale(1.0 - lambda);
        assert!(lhs.is_channel());
        assert!(rel_diff(lhs.choi(), &rhs) < 1e-8);
    }

    #[test]
    fn programmable_povm_examples() {
        let trivial =
            ProgrammableDevice::measurement(vec![ComplexMatrix::identity(4, 4)], 2, 2).unwrap();
        let p = programmable_povm(&trivial, &basis_projector(2, 1)).unwrap();
        assert_eq!(p.len(), 1);
        assert!(rel_diff(&p[0], &pauli::i()) < 1e-14);

        let basis =
            ProgrammableDevice::measurement((0..4).map(|k| basis_projector(4, k)).collect(), 2, 2)
                .unwrap();
        let p = programmable_povm(&basis, &basis_projector(2, 0)).unwrap();
        let expect = [
            basis_projector(2, 0),
            ComplexMatrix::zeros(2, 2),
            basis_projector(2, 1),
            ComplexMatrix::zeros(2, 2),
        ];
        for (a, b) in p.iter().zip(&expect) {
            assert!(linalg::frobenius(&(a - b)) < 1e-14);
        }
    }

    #[test]
    fn random_programmable_povm_is_normalized_and_reproduces_probabilities() {
        let mut rng = random::rng(19);
        let u = random::unitary(&mut rng, 6);
        let joint: Vec<ComplexMatrix> = (0..6)
            .map(|k| {
                let v = u.column(k);
                v * v.adjoint()
            })
            .collect();
        let dev = ProgrammableDevice::measurement(joint.clone(), 3, 2).unwrap();
        let sigma = random::density_matrix(&mut rng, 2, 2);
        let p = programmable_povm(&dev, &sigma).unwrap();
        assert!(check_povm(&p, 3).is_ok());
        let rho = random::density_matrix(&mut rng, 3, 3);
        let joint_state = kron(&rho, &sigma);
        for (e, pj) in joint.iter().zip(&p) {
            let direct = linalg::trace_product(e, &joint_state).re;
            assert!((direct - linalg::trace_product(pj, &rho).re).abs() < 1e-12);
        }
    }

    #[test]
    fn tomography_with_maximally_entangled_state_returns_scaled_choi() {
        let f = max_entangled_projector(2).scale(0.5);
        let setup = TomographySetup::new(f, 2, 2).unwrap();
        let s = tomography_supermap(&setup).unwrap();
        assert!(s.is_deterministic());
        let e = QuantumOperation::random_channel(2, 2, 3, 20).unwrap();
        let out = s.apply_choi(e.choi()).unwrap();
        assert!(rel_diff(&out, &e.choi().scale(0.5)) < 1e-8);
        assert!(is_faithful(&setup).unwrap());
    }

    #[test]
    fn tomography_of_identity_returns_state() {
        let mut rng = random::rng(21);
        let f = random::density_matrix(&mut rng, 6, 4);
        let setup = TomographySetup::new(f.clone(), 2, 2).unwrap();
        assert_eq!(setup.aux(), 3);
        let s = tomography_supermap(&setup).unwrap();
        let out = s.apply_choi(QuantumOperation::identity(2).choi()).unwrap();
        assert!(rel_diff(&out, &f) < 1e-8);
    }

    #[test]
    fn tomography_matches_index_summation() {
        let mut rng = random::rng(22);
        let (h_in, h_out, r) = (2, 3, 2);
        let f = random::density_matrix(&mut rng, h_in * r, 3);
        let setup = TomographySetup::new(f.clone(), h_in, h_out).unwrap();
        let e = QuantumOperation::random_channel(h_in, h_out, 2, 23).unwrap();
        let out = tomography_supermap(&setup)
            .unwrap()
            .apply_choi(e.choi())
            .unwrap();
        // (E ⊗ I)(F) = Σ_{p,p'} E(|p⟩⟨p'|) ⊗ F_{p p'} with F_{p p'}[s, s'] = F[(p,s),(p',s')]
        let mut expect = ComplexMatrix::zeros(h_out * r, h_out * r);
        for p in 0..h_in {
            for q in 0..h_in {
                let block = ComplexMatrix::from_fn(r, r, |s, t| f[(p * r + s, q * r + t)]);
                expect += kron(&e.apply(&matrix_unit(h_in, p, q)).unwrap(), &block);
            }
        }
        assert!(rel_diff(&out, &expect) < 1e-8);
    }

    #[test]
    fn product_state_is_not_faithful() {
        let mut rng = random::rng(24);
        let rho = random::density_matrix(&mut rng, 2, 2);
        let setup = TomographySetup::new(kron(&rho, &rho), 2, 2).unwrap();
        assert!(!is_faithful(&setup).unwrap());
        assert!(matches!(
            informationally_complete_tester_for(&setup, &pauli::eigenbasis_povm()),
            Err(Error::NotFaithful)
        ));
    }

    fn realignment_rank(f: &ComplexMatrix, d: usize) -> usize {
        // R[(p,q),(s,t)] = F[(p,s),(q,t)]
        let r = ComplexMatrix::from_fn(d * d, d * d, |row, col| {
            let (p, q) = (row / d, row % d);
            let (s, t) = (col / d, col % d);
            f[(p * d + s, q * d + t)]
        });
        numerical_rank(&r, tol::RANK_REL)
    }

    #[test]
    fn werner_state_verdict_agrees_with_realignment() {
        let p = 0.2;
        let f = max_entangled_projector(2).scale(p / 2.0)
            + ComplexMatrix::identity(4, 4).scale((1.0 - p) / 4.0);
        let setup = TomographySetup::new(f.clone(), 2, 2).unwrap();
        let verdict = is_faithful(&setup).unwrap();
        assert_eq!(verdict, realignment_rank(&f, 2) == 4);
        assert!(verdict);
    }

    fn pauli_product_povm() -> Vec<ComplexMatrix> {
        let single = pauli::eigenbasis_povm();
        single
            .iter()
            .flat_map(|a| single.iter().map(move |b| kron(a, b)))
            .collect()
    }

    #[test]
    fn complete_tester_from_faithful_state() {
        let setup = TomographySetup::new(max_entangled_projector(2).scale(0.5), 2, 2).unwrap();
        let t = informationally_complete_tester_for(&setup, &pauli_product_povm()).unwrap();
        assert_eq!(t.len(), 36);
        assert!(t.is_informationally_complete());
        assert_eq!(t.span_rank(), 16);
        let basis: Vec<ComplexMatrix> = (0..4).map(|k| basis_projector(4, k)).collect();
        assert!(matches!(
            informationally_complete_tester_for(&setup, &basis),
            Err(Error::PovmNotInformationallyComplete {
                rank: 4,
                required: 16
            })
        ));
    }

    #[test]
    fn povm_channel_examples() {
        let trivial = povm_as_channel(&[pauli::i()]).unwrap();
        assert_eq!(trivial.dim_out(), 1);
        assert!(trivial.is_channel());

        let basis: Vec<ComplexMatrix> = (0..2).map(|k| basis_projector(2, k)).collect();
        let e = povm_as_channel(&basis).unwrap();
        assert!(rel_diff(e.choi(), &dephasing_choi(2)) < 1e-14);

        let povm = pauli::eigenbasis_povm();
        let e = povm_as_channel(&povm).unwrap();
        assert!(e.is_channel());
        let mut rng = random::rng(25);
        let rho = random::density_matrix(&mut rng, 2, 2);
        let out = e.apply(&rho).unwrap();
        assert!((out.trace().re - 1.0).abs() < 1e-12);
        for (n, p) in povm.iter().enumerate() {
            assert!((out[(n, n)].re - linalg::trace_product(p, &rho).re).abs() < 1e-12);
        }
    }
}
