//! Seeded random fixtures. Every generator is deterministic per seed.

use super::{c, ComplexMatrix};
use crate::error::{Error, Result};
use nalgebra::DVector;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub type FixtureRng = ChaCha8Rng;

pub fn rng(seed: u64) -> FixtureRng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    c(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Matrix of i.i.d. standard complex Gaussians.
pub fn ginibre<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> ComplexMatrix {
    // fill row by row so the draw order matches the row-major convention
    let mut m = ComplexMatrix::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            m[(i, j)] = gaussian(rng);
        }
    }
    m
}

pub fn hermitian<R: Rng + ?Sized>(rng: &mut R, d: usize) -> ComplexMatrix {
    let g = ginibre(rng, d, d);
    (&g + g.adjoint()).scale(0.5)
}

/// Random density matrix `G G† / Tr[G G†]` with `G` a `d × rank` Ginibre matrix.
pub fn density_matrix<R: Rng + ?Sized>(rng: &mut R, d: usize, rank: usize) -> ComplexMatrix {
    let g = ginibre(rng, d, rank.max(1));
    let rho = &g * g.adjoint();
    let t = rho.trace().re;
    rho.unscale(t)
}

pub fn pure_state<R: Rng + ?Sized>(rng: &mut R, d: usize) -> DVector<Complex64> {
    let v: DVector<Complex64> = DVector::from_fn(d, |_, _| gaussian(rng));
    let n = v.norm();
    v.unscale(n)
}

/// Haar-distributed isometry via Gram–Schmidt on a Gaussian matrix.
pub fn isometry<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> Result<ComplexMatrix> {
    if cols > rows {
        return Err(Error::TooManyColumns { rows, cols });
    }
    let mut m = ginibre(rng, rows, cols);
    for k in 0..cols {
        let mut v = m.column(k).into_owned();
        for _ in 0..2 {
            for j in 0..k {
                let b = m.column(j);
                let proj = b.dotc(&v);
                v -= b * proj;
            }
        }
        let n = v.norm();
        m.set_column(k, &v.unscale(n));
    }
    Ok(m)
}

pub fn random_isometry(rows: usize, cols: usize, seed: u64) -> Result<ComplexMatrix> {
    isometry(&mut rng(seed), rows, cols)
}

pub fn unitary<R: Rng + ?Sized>(rng: &mut R, d: usize) -> ComplexMatrix {
    isometry(rng, d, d).expect("square isometry")
}
