use std::path::{Path, PathBuf};

use qsupermap::applications::{
    self, informationally_complete_tester_for, is_faithful, tomography_rank,
};
use qsupermap::linalg::{self, matrix_unit, partial_trace};
use qsupermap::operation::contract_choi;
use qsupermap::realization::{self, delayed_reading_check};
use qsupermap::{
    ComplexMatrix, Error, KrausSet, ProgrammableDevice, QuantumOperation, Supermap, SupermapDims,
    TensorShape, Tester, TomographySetup,
};
use serde::Serialize;
use serde_json::{json, Value};

use crate::format::{
    self, matrices, matrix_files, KrausFile, MatrixFile, MatrixListFile, OperationFile,
    SupermapFile, TesterFile,
};
use crate::{CliError, Report, SupermapCheck};

pub(crate) struct Context {
    pub seed: Option<u64>,
    pub tol: f64,
    pub out: Option<PathBuf>,
}

impl Context {
    pub fn require_seed(&self) -> Result<u64, CliError> {
        self.seed.ok_or_else(|| {
            CliError::Invalid("this command samples at random and needs --seed".into())
        })
    }

    fn write<T: Serialize + ?Sized>(
        &self,
        name: &str,
        value: &T,
    ) -> Result<Option<String>, CliError> {
        match &self.out {
            Some(dir) => {
                let path = dir.join(name);
                format::write_json(&path, value)?;
                Ok(Some(path.display().to_string()))
            }
            None => Ok(None),
        }
    }
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serializable")
}

fn operation_file(op: &QuantumOperation) -> OperationFile {
    OperationFile {
        dim_in: op.dim_in(),
        dim_out: op.dim_out(),
        choi: MatrixFile::from_matrix(op.choi()),
    }
}

fn load_choi(path: &Path) -> Result<(usize, usize, ComplexMatrix), CliError> {
    let f: OperationFile = format::read_json(path)?;
    let choi = f.choi.to_matrix()?;
    let n = f.dim_in * f.dim_out;
    if n == 0 || choi.shape() != (n, n) {
        return Err(CliError::Invalid(format!(
            "Choi operator must be {n}x{n} for dim_in {} and dim_out {}, got {}x{}",
            f.dim_in,
            f.dim_out,
            choi.nrows(),
            choi.ncols()
        )));
    }
    Ok((f.dim_in, f.dim_out, choi))
}

pub(crate) fn load_operation(path: &Path) -> Result<QuantumOperation, CliError> {
    let (dim_in, dim_out, choi) = load_choi(path)?;
    Ok(QuantumOperation::new(dim_in, dim_out, choi)?)
}

pub(crate) fn load_supermap(path: &Path) -> Result<Supermap, CliError> {
    let f: SupermapFile = format::read_json(path)?;
    Ok(Supermap::new(
        SupermapDims::new(f.h_in, f.h_out, f.k_in, f.k_out),
        matrices(&f.kraus)?,
    )?)
}

fn load_matrix(path: &Path) -> Result<ComplexMatrix, CliError> {
    format::read_json::<MatrixFile>(path)?.to_matrix()
}

pub(crate) fn check_op(
    _ctx: &Context,
    path: &Path,
    require_channel: bool,
) -> Result<Report, CliError> {
    let (dim_in, dim_out, choi) = load_choi(path)?;
    let herm_residual = linalg::hermiticity_residual(&choi);
    let herm = linalg::hermitian_part(&choi);
    let spectrum = linalg::eigh(&herm)?;
    let effect = partial_trace(&herm, &TensorShape::new([dim_out, dim_in])?, &[1])?;
    let effect_max = linalg::eigh(&effect)?.max();
    let channel_residual = linalg::frobenius(&(&effect - ComplexMatrix::identity(dim_in, dim_in)));

    let (cp, trace_non_increasing) = match QuantumOperation::new(dim_in, dim_out, choi) {
        Ok(_) => (true, true),
        Err(Error::TraceIncreasing { .. }) => (true, false),
        Err(Error::NotHermitian { .. } | Error::NotPositive { .. }) => {
            (false, effect_max <= 1.0 + qsupermap::tol::EPS_EQ)
        }
        Err(e) => return Err(e.into()),
    };
    let channel = cp
        && trace_non_increasing
        && channel_residual <= qsupermap::tol::EPS_EQ * (dim_in as f64).sqrt();
    let mut residual = herm_residual.max(-spectrum.min()).max(effect_max - 1.0);
    if require_channel {
        residual = residual.max(channel_residual);
    }
    let pass = cp && trace_non_increasing && (!require_channel || channel);
    Ok(Report::new(
        "check-op",
        pass,
        residual,
        json!({
            "cp": cp,
            "trace_non_increasing": trace_non_increasing,
            "channel": channel,
            "hermiticity_residual": herm_residual,
            "min_eigenvalue": spectrum.min(),
            "max_effect_eigenvalue": effect_max,
            "channel_residual": channel_residual,
        }),
    ))
}

// Largest gap between the Kraus sum and the Choi contraction over matrix-unit inputs.
fn kraus_choi_gap(kraus: &KrausSet, op: &QuantumOperation) -> Result<f64, CliError> {
    let d = op.dim_in();
    let mut worst: f64 = 0.0;
    for a in 0..d {
        for b in 0..d {
            let x = matrix_unit(d, a, b);
            let direct = kraus.operators().iter().fold(
                ComplexMatrix::zeros(op.dim_out(), op.dim_out()),
                |acc, k| acc + k * &x * k.adjoint(),
            );
            let via_choi = contract_choi(op.choi(), d, op.dim_out(), &x)?;
            worst = worst.max(linalg::frobenius(&(direct - via_choi)));
        }
    }
    Ok(worst)
}

pub(crate) fn kraus_to_choi(ctx: &Context, path: &Path) -> Result<Report, CliError> {
    let f: KrausFile = format::read_json(path)?;
    let kraus = KrausSet::new(f.dim_in, f.dim_out, matrices(&f.kraus)?)?;
    let op = kraus.to_operation()?;
    let gap = kraus_choi_gap(&kraus, &op)?;
    let file = operation_file(&op);
    let written = ctx.write("operation.json", &file)?;
    Ok(Report::new(
        "kraus2choi",
        gap <= ctx.tol,
        gap,
        json!({ "operation": to_value(&file), "channel": op.is_channel(), "written": written }),
    ))
}

pub(crate) fn choi_to_kraus(ctx: &Context, path: &Path) -> Result<Report, CliError> {
    let op = load_operation(path)?;
    let kraus = op.kraus();
    let rebuilt = kraus.to_operation()?;
    let residual = linalg::frobenius(&(rebuilt.choi() - op.choi()));
    let file = KrausFile {
        dim_in: op.dim_in(),
        dim_out: op.dim_out(),
        kraus: matrix_files(kraus.operators()),
    };
    let written = ctx.write("kraus.json", &file)?;
    Ok(Report::new(
        "choi2kraus",
        residual <= ctx.tol,
        residual,
        json!({ "kraus": to_value(&file), "rank": kraus.len(), "written": written }),
    ))
}

pub(crate) fn apply(ctx: &Context, op_path: &Path, state_path: &Path) -> Result<Report, CliError> {
    let op = load_operation(op_path)?;
    let rho = load_matrix(state_path)?;
    linalg::check_density_matrix(&rho, op.dim_in())?;
    let out = op.apply(&rho)?;
    let kraus = op.kraus();
    let direct = kraus.operators().iter().fold(
        ComplexMatrix::zeros(op.dim_out(), op.dim_out()),
        |acc, k| acc + k * &rho * k.adjoint(),
    );
    let residual = linalg::frobenius(&(&direct - &out));
    let file = MatrixFile::from_matrix(&out);
    let written = ctx.write("output.json", &file)?;
    Ok(Report::new(
        "apply",
        residual <= ctx.tol,
        residual,
        json!({ "output": to_value(&file), "trace": out.trace().re, "written": written }),
    ))
}

fn not_deterministic(check: &str, residual: f64) -> Report {
    Report::new(
        check,
        false,
        residual,
        json!({ "error": "not deterministic" }),
    )
}

pub(crate) fn supermap(
    ctx: &Context,
    path: &Path,
    check: SupermapCheck,
) -> Result<Report, CliError> {
    let s = load_supermap(path)?;
    let residual = s.determinism_residual();
    match check {
        SupermapCheck::Deterministic => {
            let (effect_condition, effect_residual) = s.effect_condition();
            Ok(Report::new(
                "deterministic",
                s.is_deterministic(),
                residual,
                json!({ "effect_condition": effect_condition, "effect_condition_residual": effect_residual }),
            ))
        }
        SupermapCheck::ProbPreserving => match s.is_probability_preserving() {
            Ok(pass) => {
                let n = s.effect_map()?;
                Ok(Report::new(
                    "prob-preserving",
                    pass,
                    n.identity_map_residual(),
                    json!({ "determinism_residual": residual }),
                ))
            }
            Err(Error::NotDeterministic { residual }) => {
                Ok(not_deterministic("prob-preserving", residual))
            }
            Err(e) => Ok(Report::new(
                "prob-preserving",
                false,
                f64::NAN,
                json!({ "error": e.to_string() }),
            )),
        },
        SupermapCheck::EffectMap => match s.effect_map() {
            Ok(n) => {
                let kraus = matrix_files(n.kraus());
                let written = ctx.write(
                    "effect_map.json",
                    &MatrixListFile {
                        matrices: kraus.clone(),
                    },
                )?;
                Ok(Report::new(
                    "effect-map",
                    true,
                    n.identity_residual(),
                    json!({ "h_in": n.h_in(), "k_in": n.k_in(), "kraus": to_value(&kraus), "written": written }),
                ))
            }
            Err(Error::NotDeterministic { residual }) => {
                Ok(not_deterministic("effect-map", residual))
            }
            Err(e) => Err(e.into()),
        },
    }
}

pub(crate) fn realize(ctx: &Context, path: &Path) -> Result<Report, CliError> {
    let s = load_supermap(path)?;
    let circuit = match realization::realize(&s) {
        Ok(c) => c,
        Err(Error::NotDeterministic { residual }) => {
            return Ok(not_deterministic("realize", residual))
        }
        Err(e) => return Err(e.into()),
    };
    let back = &circuit.to_supermaps()?[0];
    let roundtrip = s.action_distance(back)?;
    let v_res = linalg::isometry_residual(circuit.v());
    let w_res = linalg::isometry_residual(circuit.w());
    let meta = json!({
        "dim_a": circuit.dim_a(),
        "dim_b": circuit.dim_b(),
        "roundtrip_residual": roundtrip,
        "v_isometry_residual": v_res,
        "w_isometry_residual": w_res,
    });
    ctx.write("v.json", &MatrixFile::from_matrix(circuit.v()))?;
    ctx.write("w.json", &MatrixFile::from_matrix(circuit.w()))?;
    ctx.write("meta.json", &meta)?;
    let residual = roundtrip.max(v_res).max(w_res);
    Ok(Report::new("realize", residual <= ctx.tol, residual, meta))
}

pub(crate) fn realize_prob(
    ctx: &Context,
    paths: &[PathBuf],
    trials: usize,
) -> Result<Report, CliError> {
    let seed = ctx.require_seed()?;
    let parts = paths
        .iter()
        .map(|p| load_supermap(p))
        .collect::<Result<Vec<_>, _>>()?;
    let circuit = match realization::realize_probabilistic(&parts) {
        Ok(c) => c,
        Err(Error::NotDeterministic { residual }) => {
            return Ok(not_deterministic("realize-prob", residual))
        }
        Err(e) => return Err(e.into()),
    };
    let mut roundtrip: f64 = 0.0;
    for (part, back) in parts.iter().zip(circuit.to_supermaps()?) {
        roundtrip = roundtrip.max(part.action_distance(&back)?);
    }
    let check = delayed_reading_check(&parts, trials, seed);
    let meta = json!({
        "dim_a": circuit.dim_a(),
        "dim_b": circuit.dim_b(),
        "outcomes": parts.len(),
        "roundtrip_residual": roundtrip,
        "delayed_reading_residual": check.max_residual,
        "probability_residual": check.max_probability_residual,
        "trials": trials,
        "failures": check.failures,
    });
    ctx.write("v.json", &MatrixFile::from_matrix(circuit.v()))?;
    ctx.write("w.json", &MatrixFile::from_matrix(circuit.w()))?;
    ctx.write(
        "projectors.json",
        &MatrixListFile {
            matrices: matrix_files(circuit.projectors().unwrap_or_default()),
        },
    )?;
    ctx.write("meta.json", &meta)?;
    let residual = roundtrip
        .max(check.max_residual)
        .max(check.max_probability_residual);
    let pass = residual <= ctx.tol && check.failures.is_empty();
    Ok(Report::new("realize-prob", pass, residual, meta))
}

pub(crate) fn tester_eval(
    ctx: &Context,
    tester_path: &Path,
    op_path: Option<&PathBuf>,
) -> Result<Report, CliError> {
    let check = if op_path.is_some() {
        "tester-eval"
    } else {
        "tester-check"
    };
    let f: TesterFile = format::read_json(tester_path)?;
    let effects = matrices(&f.effects)?;
    let normalization = Tester::normalization_residual(&effects, f.h_in, f.h_out)?;
    let tester = match Tester::new(f.h_in, f.h_out, effects) {
        Ok(t) => t,
        Err(
            e @ (Error::NotNormalized { .. }
            | Error::NotPositive { .. }
            | Error::NotHermitian { .. }),
        ) => {
            return Ok(Report::new(
                check,
                false,
                normalization,
                json!({ "error": e.to_string(), "normalization_residual": normalization }),
            ))
        }
        Err(e) => return Err(e.into()),
    };
    let mut details = json!({
        "outcomes": tester.len(),
        "normalization_residual": normalization,
        "informationally_complete": tester.is_informationally_complete(),
        "span_rank": tester.span_rank(),
    });
    let mut residual = normalization;
    if let Some(op_path) = op_path {
        let op = load_operation(op_path)?;
        let dist = tester.evaluate(&op)?;
        let total = dist.total();
        if op.is_channel() {
            residual = residual.max((total - 1.0).abs());
        }
        details["probabilities"] = json!(dist.probabilities);
        details["total"] = json!(total);
    }
    Ok(Report::new(check, residual <= ctx.tol, residual, details))
}

pub(crate) fn tomography_check(
    _ctx: &Context,
    state: &Path,
    h_in: usize,
    h_out: usize,
    povm: Option<&Path>,
) -> Result<Report, CliError> {
    let setup = TomographySetup::new(load_matrix(state)?, h_in, h_out)?;
    let rank = tomography_rank(&setup)?;
    let required = (h_in * h_out).pow(2);
    let faithful = is_faithful(&setup)?;
    let mut details = json!({ "faithful": faithful, "rank": rank, "required": required });
    let mut pass = faithful;
    if let Some(povm) = povm {
        let list: MatrixListFile = format::read_json(povm)?;
        match informationally_complete_tester_for(&setup, &matrices(&list.matrices)?) {
            Ok(t) => {
                details["tester_outcomes"] = json!(t.len());
                details["tester_span_rank"] = json!(t.span_rank());
                details["informationally_complete"] = json!(t.is_informationally_complete());
                pass &= t.is_informationally_complete();
            }
            Err(e @ (Error::NotFaithful | Error::PovmNotInformationallyComplete { .. })) => {
                details["informationally_complete"] = json!(false);
                details["error"] = json!(e.to_string());
                pass = false;
            }
            Err(e) => return Err(e.into()),
        }
    }
    Ok(Report::new(
        "tomography-check",
        pass,
        (required - rank) as f64,
        details,
    ))
}

pub(crate) fn program_channel(
    ctx: &Context,
    unitary: &Path,
    program: &Path,
    sys: usize,
) -> Result<Report, CliError> {
    let u = load_matrix(unitary)?;
    if sys == 0 || u.nrows() % sys != 0 {
        return Err(CliError::Invalid(format!(
            "unitary of size {} does not factor over a system of dimension {sys}",
            u.nrows()
        )));
    }
    let prog = u.nrows() / sys;
    let dev = ProgrammableDevice::unitary(u, sys, prog)?;
    let op = applications::programmable_channel(&dev, &load_matrix(program)?)?;
    let residual = op.channel_residual();
    let file = operation_file(&op);
    let written = ctx.write("operation.json", &file)?;
    Ok(Report::new(
        "program-channel",
        residual <= ctx.tol,
        residual,
        json!({ "operation": to_value(&file), "program_dim": prog, "written": written }),
    ))
}
