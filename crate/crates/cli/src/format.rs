//! JSON file formats. Matrices are row-major lists of `[re, im]` pairs; floats are written
//! with 17 significant digits so that reading a file back reproduces every value exactly.

use std::fs;
use std::io;
use std::path::Path;

use qsupermap::{Complex64, ComplexMatrix};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::ser::Formatter;

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixFile {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<[f64; 2]>,
}

impl MatrixFile {
    pub fn from_matrix(m: &ComplexMatrix) -> Self {
        let mut data = Vec::with_capacity(m.len());
        for r in 0..m.nrows() {
            for c in 0..m.ncols() {
                let z = m[(r, c)];
                data.push([z.re, z.im]);
            }
        }
        Self {
            rows: m.nrows(),
            cols: m.ncols(),
            data,
        }
    }

    pub fn to_matrix(&self) -> Result<ComplexMatrix, CliError> {
        if self.data.len() != self.rows * self.cols {
            return Err(CliError::Invalid(format!(
                "matrix declares {}x{} but holds {} entries",
                self.rows,
                self.cols,
                self.data.len()
            )));
        }
        if self.data.iter().flatten().any(|x| !x.is_finite()) {
            return Err(CliError::Invalid("matrix entries must be finite".into()));
        }
        Ok(ComplexMatrix::from_row_iterator(
            self.rows,
            self.cols,
            self.data.iter().map(|&[re, im]| Complex64::new(re, im)),
        ))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OperationFile {
    pub dim_in: usize,
    pub dim_out: usize,
    pub choi: MatrixFile,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KrausFile {
    pub dim_in: usize,
    pub dim_out: usize,
    pub kraus: Vec<MatrixFile>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SupermapFile {
    pub h_in: usize,
    pub h_out: usize,
    pub k_in: usize,
    pub k_out: usize,
    pub kraus: Vec<MatrixFile>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TesterFile {
    pub h_in: usize,
    pub h_out: usize,
    pub effects: Vec<MatrixFile>,
}

/// POVMs and projector lists.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixListFile {
    pub matrices: Vec<MatrixFile>,
}

pub fn matrices(list: &[MatrixFile]) -> Result<Vec<ComplexMatrix>, CliError> {
    list.iter().map(MatrixFile::to_matrix).collect()
}

pub fn matrix_files(list: &[ComplexMatrix]) -> Vec<MatrixFile> {
    list.iter().map(MatrixFile::from_matrix).collect()
}

/// Compact JSON with every float printed as `d.dddddddddddddddde±x`.
#[derive(Debug, Clone, Copy, Default)]
pub struct SeventeenDigits;

impl Formatter for SeventeenDigits {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, f64::from(value))
    }
}

pub fn to_json<T: Serialize + ?Sized>(value: &T) -> String {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, SeventeenDigits);
    value
        .serialize(&mut ser)
        .expect("in-memory JSON serialization");
    String::from_utf8(out).expect("JSON is UTF-8")
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.display().to_string(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|source| CliError::Parse {
        path: path.display().to_string(),
        source,
    })
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir).map_err(|source| CliError::Write {
                path: dir.display().to_string(),
                source,
            })?;
        }
    }
    fs::write(path, to_json(value) + "\n").map_err(|source| CliError::Write {
        path: path.display().to_string(),
        source,
    })
}
