#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::Command;

use qsupermap::{ComplexMatrix, QuantumOperation, Supermap};
use qsupermap_cli::format::{
    self, matrix_files, MatrixFile, OperationFile, SupermapFile, TesterFile,
};
use qsupermap_cli::Report;

pub struct Run {
    pub code: i32,
    pub report: Option<Report>,
    pub stderr: String,
}

pub fn qsupermap(args: &[&str]) -> Run {
    let out = Command::new(env!("CARGO_BIN_EXE_qsupermap"))
        .args(args)
        .output()
        .expect("binary runs");
    let stdout = String::from_utf8(out.stdout).unwrap();
    let report = stdout
        .lines()
        .next()
        .map(|l| serde_json::from_str(l).expect("stdout is one JSON report"));
    Run {
        code: out.status.code().unwrap_or(-1),
        report,
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

pub fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

pub fn write_matrix(dir: &Path, name: &str, m: &ComplexMatrix) -> PathBuf {
    let p = dir.join(name);
    format::write_json(&p, &MatrixFile::from_matrix(m)).unwrap();
    p
}

pub fn write_operation(
    dir: &Path,
    name: &str,
    dim_in: usize,
    dim_out: usize,
    choi: &ComplexMatrix,
) -> PathBuf {
    let p = dir.join(name);
    let f = OperationFile {
        dim_in,
        dim_out,
        choi: MatrixFile::from_matrix(choi),
    };
    format::write_json(&p, &f).unwrap();
    p
}

pub fn write_op(dir: &Path, name: &str, op: &QuantumOperation) -> PathBuf {
    write_operation(dir, name, op.dim_in(), op.dim_out(), op.choi())
}

pub fn write_supermap(dir: &Path, name: &str, s: &Supermap) -> PathBuf {
    let d = s.dims();
    let p = dir.join(name);
    let f = SupermapFile {
        h_in: d.h_in,
        h_out: d.h_out,
        k_in: d.k_in,
        k_out: d.k_out,
        kraus: matrix_files(s.kraus()),
    };
    format::write_json(&p, &f).unwrap();
    p
}

pub fn write_tester(
    dir: &Path,
    name: &str,
    h_in: usize,
    h_out: usize,
    effects: &[ComplexMatrix],
) -> PathBuf {
    let p = dir.join(name);
    let f = TesterFile {
        h_in,
        h_out,
        effects: matrix_files(effects),
    };
    format::write_json(&p, &f).unwrap();
    p
}
