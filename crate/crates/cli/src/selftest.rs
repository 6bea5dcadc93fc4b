use qsupermap::linalg::{self, random};
use qsupermap::realization::{
    delayed_reading_check, random_decomposition, random_deterministic_supermap, realize,
};
use qsupermap::{
    CircuitRealization, ComplexMatrix, QuantumOperation, Supermap, SupermapDims, Tester,
};
use rand::Rng;
use serde_json::{json, Map, Value};

use crate::commands::Context;
use crate::{CliError, Corruption, Report};

#[derive(Default)]
struct Suite {
    trials: usize,
    max_residual: f64,
    failures: Vec<String>,
}

impl Suite {
    fn record(&mut self, residual: f64) {
        self.trials += 1;
        self.max_residual = self.max_residual.max(residual);
    }

    fn fail(&mut self, message: String) {
        self.failures.push(message);
    }

    fn passed(&self, tol: f64) -> bool {
        self.failures.is_empty() && self.max_residual <= tol
    }

    fn summary(&self, tol: f64) -> Value {
        json!({
            "trials": self.trials,
            "max_residual": self.max_residual,
            "pass": self.passed(tol),
            "failures": self.failures,
        })
    }
}

const QUBITS: SupermapDims = SupermapDims {
    h_in: 2,
    h_out: 2,
    k_in: 2,
    k_out: 2,
};

fn choi_kraus(rng: &mut random::FixtureRng, suite: &mut Suite) -> qsupermap::Result<()> {
    let (din, dout): (usize, usize) = (rng.random_range(2..=3), rng.random_range(2..=3));
    let rank = rng.random_range(din.div_ceil(dout)..=4);
    let op = QuantumOperation::random_channel_with(rng, din, dout, rank)?;
    let back = op.kraus().to_operation()?;
    suite.record(linalg::frobenius(&(back.choi() - op.choi())));
    Ok(())
}

fn perturbed(rng: &mut random::FixtureRng, s: &Supermap) -> qsupermap::Result<Supermap> {
    let kraus = s
        .kraus()
        .iter()
        .map(|k| k + random::ginibre(rng, k.nrows(), k.ncols()).scale(0.1))
        .collect();
    Supermap::new(s.dims(), kraus)
}

fn determinism(rng: &mut random::FixtureRng, suite: &mut Suite) -> qsupermap::Result<()> {
    let s = random_deterministic_supermap(rng, QUBITS, 2, 2)?;
    let p = perturbed(rng, &s)?;
    for (label, candidate, expect) in [("fixture", &s, true), ("perturbed", &p, false)] {
        let product_test = candidate.is_deterministic();
        let (effect_test, _) = candidate.effect_condition();
        if product_test != effect_test || product_test != expect {
            suite.fail(format!(
                "{label}: product test {product_test}, effect test {effect_test}"
            ));
        }
    }
    suite.record(s.determinism_residual());
    Ok(())
}

fn roundtrip(rng: &mut random::FixtureRng, suite: &mut Suite) -> qsupermap::Result<()> {
    let dim_a = rng.random_range(2..=4);
    let s = random_deterministic_supermap(rng, QUBITS, 2, dim_a)?;
    let c = realize(&s)?;
    let back = &c.to_supermaps()?[0];
    let residual = s
        .action_distance(back)?
        .max(linalg::isometry_residual(c.v()))
        .max(linalg::isometry_residual(c.w()));
    suite.record(residual);
    Ok(())
}

fn delayed_reading(rng: &mut random::FixtureRng, suite: &mut Suite) -> qsupermap::Result<()> {
    let s = random_deterministic_supermap(rng, QUBITS, 2, 2)?;
    let count = rng.random_range(2..=3);
    let parts = random_decomposition(rng, &s, count)?;
    let report = delayed_reading_check(&parts, 2, rng.random());
    suite.failures.extend(report.failures);
    suite.record(report.max_residual.max(report.max_probability_residual));
    Ok(())
}

fn tester_normalization(rng: &mut random::FixtureRng, suite: &mut Suite) -> qsupermap::Result<()> {
    let rho = random::density_matrix(rng, 2, 2);
    let u = random::unitary(rng, 2);
    let povm: Vec<ComplexMatrix> = (0..2)
        .map(|k| {
            let v = u.column(k);
            v * v.adjoint()
        })
        .collect();
    let t = Tester::prepare_measure(&rho, &povm)?;
    let e = QuantumOperation::random_channel_with(rng, 2, 2, 2)?;
    suite.record((t.evaluate(&e)?.total() - 1.0).abs());
    Ok(())
}

type Step = fn(&mut random::FixtureRng, &mut Suite) -> qsupermap::Result<()>;

const SUITES: [(&str, Step); 5] = [
    ("choi_kraus_roundtrip", choi_kraus),
    ("determinism_agreement", determinism),
    ("realization_roundtrip", roundtrip),
    ("delayed_reading", delayed_reading),
    ("tester_normalization", tester_normalization),
];

// Negative controls: each builds a fixture that must be rejected.
fn corrupted(kind: Corruption, seed: u64, tol: f64) -> qsupermap::Result<Value> {
    let mut rng = random::rng(seed);
    match kind {
        Corruption::Isometry => {
            let s = random_deterministic_supermap(&mut rng, QUBITS, 2, 2)?;
            let c = realize(&s)?;
            let bad = c.v().scale(1.1);
            let residual = linalg::isometry_residual(&bad);
            let rejected = CircuitRealization::new(c.dims(), bad, c.w().clone(), None).is_err();
            Ok(
                json!({ "fixture": "isometry", "residual": residual, "rejected": rejected, "pass": residual <= tol && !rejected }),
            )
        }
        Corruption::Tester => {
            let rho = random::density_matrix(&mut rng, 2, 2);
            let t = Tester::prepare_measure(
                &rho,
                &[linalg::basis_projector(2, 0), linalg::basis_projector(2, 1)],
            )?;
            let bad: Vec<ComplexMatrix> = t.effects().iter().map(|p| p.scale(1.2)).collect();
            let residual = Tester::normalization_residual(&bad, 2, 2)?;
            let rejected = Tester::new(2, 2, bad).is_err();
            Ok(
                json!({ "fixture": "tester", "residual": residual, "rejected": rejected, "pass": residual <= tol && !rejected }),
            )
        }
    }
}

pub(crate) fn run(
    ctx: &Context,
    trials: usize,
    corrupt: Option<Corruption>,
) -> Result<Report, CliError> {
    let seed = ctx.require_seed()?;
    let mut details = Map::new();
    let mut pass = true;
    let mut residual: f64 = 0.0;
    if trials > 0 {
        let mut rng = random::rng(seed);
        for (name, step) in SUITES {
            let mut suite = Suite::default();
            for trial in 0..trials {
                if let Err(e) = step(&mut rng, &mut suite) {
                    suite.fail(format!("trial {trial}: {e}"));
                }
            }
            pass &= suite.passed(ctx.tol);
            residual = residual.max(suite.max_residual);
            details.insert(name.to_string(), suite.summary(ctx.tol));
        }
    }
    if let Some(kind) = corrupt {
        let control = corrupted(kind, seed, ctx.tol)?;
        residual = residual.max(control["residual"].as_f64().unwrap_or(f64::INFINITY));
        pass &= control["pass"].as_bool() == Some(true);
        details.insert("corrupted".to_string(), control);
    }
    Ok(Report::new(
        "selftest",
        pass,
        residual,
        Value::Object(details),
    ))
}
