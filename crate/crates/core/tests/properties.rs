use proptest::prelude::*;
use qsupermap::applications::{
    povm_as_channel, programmable_channel, programmable_povm, tomography_supermap,
};
use qsupermap::linalg::{
    self, frobenius, kron, partial_trace, permute_systems, random, trace_product,
};
use qsupermap::realization::{
    random_decomposition, random_deterministic_supermap, realize, realize_probabilistic,
};
use qsupermap::tester::check_povm;
use qsupermap::{
    ComplexMatrix, ProgrammableDevice, QuantumOperation, SupermapDims, TensorShape, Tester,
    TomographySetup,
};

fn config() -> ProptestConfig {
    ProptestConfig {
        cases: 32,
        ..ProptestConfig::default()
    }
}

fn projective_povm(rng: &mut random::FixtureRng, d: usize) -> Vec<ComplexMatrix> {
    let u = random::unitary(rng, d);
    (0..d)
        .map(|k| {
            let v = u.column(k);
            v * v.adjoint()
        })
        .collect()
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn partial_trace_of_product(seed: u64, da in 1usize..4, db in 1usize..4) {
        let mut rng = random::rng(seed);
        let a = random::ginibre(&mut rng, da, da);
        let b = random::ginibre(&mut rng, db, db);
        let shape = TensorShape::new([da, db]).unwrap();
        let kept = partial_trace(&kron(&a, &b), &shape, &[0]).unwrap();
        prop_assert!(frobenius(&(kept - a.scale(1.0) * b.trace())) <= 1e-10 * (1.0 + frobenius(&a) * frobenius(&b)));
    }

    #[test]
    fn permutation_then_inverse_is_identity(seed: u64, dims in proptest::collection::vec(1usize..4, 3)) {
        let mut rng = random::rng(seed);
        let shape = TensorShape::new(dims.clone()).unwrap();
        let n = shape.total();
        let m = random::ginibre(&mut rng, n, n);
        let perm = [2, 0, 1];
        let moved = permute_systems(&m, &shape, &perm).unwrap();
        let back = permute_systems(&moved, &shape.permuted(&perm).unwrap(), &linalg::inverse_permutation(&perm).unwrap()).unwrap();
        prop_assert!(frobenius(&(back - m)) <= 1e-12);
    }

    #[test]
    fn choi_kraus_roundtrip(seed: u64, din in 1usize..4, dout in 1usize..4, extra in 0usize..3, scale in 0.1f64..1.0) {
        let rank = din.div_ceil(dout) + extra;
        let op = QuantumOperation::random_channel(din, dout, rank, seed).unwrap().scaled(scale).unwrap();
        let back = op.kraus().to_operation().unwrap();
        prop_assert!(linalg::rel_diff(back.choi(), op.choi()) <= 1e-8);
        prop_assert!(op.kraus().len() <= din * dout);
    }

    #[test]
    fn supermap_duality(seed: u64, dim_b in 1usize..3, extra in 0usize..2) {
        let mut rng = random::rng(seed);
        let dims = SupermapDims::new(2, 2, 2, 2);
        let s = random_deterministic_supermap(&mut rng, dims, dim_b, dim_b + extra).unwrap();
        let e = random::ginibre(&mut rng, 4, 4);
        let o = random::ginibre(&mut rng, 4, 4);
        let lhs = trace_product(&o, &s.apply_choi(&e).unwrap());
        let rhs = trace_product(&s.dual(&o).unwrap(), &e);
        prop_assert!((lhs - rhs).norm() <= 1e-10 * (1.0 + lhs.norm()));
    }

    #[test]
    fn deterministic_supermaps_send_channels_to_channels(seed: u64, h_in in 1usize..3, h_out in 1usize..3, k_in in 1usize..3, k_out in 1usize..3) {
        let mut rng = random::rng(seed);
        let dims = SupermapDims::new(h_in, h_out, k_in, k_out);
        let dim_b = 2;
        let dim_a = (h_out * dim_b).div_ceil(k_out) + 1;
        let s = random_deterministic_supermap(&mut rng, dims, dim_b, dim_a).unwrap();
        prop_assert!(s.is_deterministic());
        prop_assert!(s.effect_condition().0);
        let e = QuantumOperation::random_channel_with(&mut rng, h_in, h_out, h_in.div_ceil(h_out) + 1).unwrap();
        prop_assert!(s.apply(&e).unwrap().is_channel());
    }

    #[test]
    fn realization_roundtrip(seed: u64, dim_b in 1usize..3, extra in 0usize..3) {
        let mut rng = random::rng(seed);
        let dims = SupermapDims::new(2, 2, 2, 2);
        let s = random_deterministic_supermap(&mut rng, dims, dim_b, dim_b + extra).unwrap();
        let c = realize(&s).unwrap();
        prop_assert!(linalg::isometry_residual(c.v()) <= 1e-8);
        prop_assert!(linalg::isometry_residual(c.w()) <= 1e-8);
        prop_assert!(s.action_distance(&c.to_supermaps().unwrap()[0]).unwrap() <= 1e-8);
    }

    #[test]
    fn measured_circuit_probabilities_sum_to_one(seed: u64, parts in 2usize..4) {
        let mut rng = random::rng(seed);
        let dims = SupermapDims::new(2, 2, 2, 2);
        let s = random_deterministic_supermap(&mut rng, dims, 2, 2).unwrap();
        let split = random_decomposition(&mut rng, &s, parts).unwrap();
        let c = realize_probabilistic(&split).unwrap();
        let e = QuantumOperation::random_channel_with(&mut rng, 2, 2, 2).unwrap();
        let rho = random::density_matrix(&mut rng, 2, 2);
        let total: f64 = (0..parts).map(|j| c.simulate(&e, &rho, Some(j)).unwrap().trace().re).sum();
        prop_assert!((total - 1.0).abs() <= 1e-8);
    }

    #[test]
    fn tester_probabilities_form_a_distribution(seed: u64, din in 1usize..4, dout in 1usize..4) {
        let mut rng = random::rng(seed);
        let rho = random::density_matrix(&mut rng, din, din);
        let povm = projective_povm(&mut rng, dout);
        let t = Tester::prepare_measure(&rho, &povm).unwrap();
        let e = QuantumOperation::random_channel_with(&mut rng, din, dout, din.div_ceil(dout) + 1).unwrap();
        let p = t.evaluate(&e).unwrap();
        prop_assert!((p.total() - 1.0).abs() <= 1e-8);
        prop_assert!(p.probabilities.iter().all(|&x| (-1e-8..=1.0 + 1e-8).contains(&x)));
    }

    #[test]
    fn programmable_channel_is_a_channel_and_affine(seed: u64, lambda in 0.0f64..1.0) {
        let mut rng = random::rng(seed);
        let dev = ProgrammableDevice::unitary(random::unitary(&mut rng, 4), 2, 2).unwrap();
        let s1 = random::density_matrix(&mut rng, 2, 2);
        let s2 = random::density_matrix(&mut rng, 2, 1);
        let e1 = programmable_channel(&dev, &s1).unwrap();
        let e2 = programmable_channel(&dev, &s2).unwrap();
        let mix = programmable_channel(&dev, &(s1.scale(lambda) + s2.scale(1.0 - lambda))).unwrap();
        prop_assert!(e1.is_channel() && e2.is_channel() && mix.is_channel());
        let expect = e1.choi().scale(lambda) + e2.choi().scale(1.0 - lambda);
        prop_assert!(frobenius(&(mix.choi() - expect)) <= 1e-8);
    }

    #[test]
    fn programmable_povm_is_normalized(seed: u64) {
        let mut rng = random::rng(seed);
        let dev = ProgrammableDevice::measurement(projective_povm(&mut rng, 6), 3, 2).unwrap();
        let sigma = random::density_matrix(&mut rng, 2, 2);
        prop_assert!(check_povm(&programmable_povm(&dev, &sigma).unwrap(), 3).is_ok());
    }

    #[test]
    fn tomography_supermap_is_deterministic(seed: u64, rank in 1usize..5) {
        let mut rng = random::rng(seed);
        let f = random::density_matrix(&mut rng, 4, rank);
        let s = tomography_supermap(&TomographySetup::new(f, 2, 2).unwrap()).unwrap();
        prop_assert!(s.is_deterministic());
    }

    #[test]
    fn povm_channel_reads_out_probabilities(seed: u64, d in 1usize..4) {
        let mut rng = random::rng(seed);
        let povm = projective_povm(&mut rng, d);
        let e = povm_as_channel(&povm).unwrap();
        prop_assert!(e.is_channel());
        let rho = random::density_matrix(&mut rng, d, d);
        let out = e.apply(&rho).unwrap();
        for (n, p) in povm.iter().enumerate() {
            prop_assert!((out[(n, n)].re - trace_product(p, &rho).re).abs() <= 1e-10);
        }
    }
}
