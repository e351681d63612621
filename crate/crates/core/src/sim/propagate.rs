//! Single-step propagators `ψ ← exp(−i H h) ψ` for a constant `H`.
//!
//! Small bases use the exact eigendecomposition. Larger ones use a Lanczos
//! approximation whose Krylov dimension grows until the residual estimate
//! drops below [`KRYLOV_TOLERANCE`]; steps that do not converge are halved.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use super::Operator;

/// Largest basis propagated by exact diagonalization.
pub const EXACT_DIM_CAP: usize = 64;
const KRYLOV_TOLERANCE: f64 = 1e-13;
const KRYLOV_MAX: usize = 40;

pub(super) fn step(op: &Operator, rabi: f64, detuning: f64, h: f64, psi: &mut [Complex64]) {
    if op.dim() <= EXACT_DIM_CAP {
        exact(op, rabi, detuning, h, psi);
    } else {
        let diag = op.diagonal(detuning);
        krylov(op, rabi, &diag, h, psi);
    }
}

fn exact(op: &Operator, rabi: f64, detuning: f64, h: f64, psi: &mut [Complex64]) {
    let eig = SymmetricEigen::new(op.dense(rabi, detuning));
    let q = &eig.eigenvectors;
    let n = op.dim();
    let coeffs: Vec<Complex64> = (0..n)
        .map(|l| {
            let overlap: Complex64 = (0..n).map(|k| psi[k] * q[(k, l)]).sum();
            overlap * Complex64::from_polar(1.0, -eig.eigenvalues[l] * h)
        })
        .collect();
    for (k, out) in psi.iter_mut().enumerate() {
        *out = (0..n).map(|l| coeffs[l] * q[(k, l)]).sum();
    }
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

fn krylov(op: &Operator, rabi: f64, diag: &[f64], h: f64, psi: &mut [Complex64]) {
    let beta0 = norm(psi);
    if beta0 == 0.0 {
        return;
    }
    let n = op.dim();
    let mut basis: Vec<Vec<Complex64>> = vec![psi.iter().map(|x| x / beta0).collect()];
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut w = vec![Complex64::new(0.0, 0.0); n];
    loop {
        let j = basis.len() - 1;
        op.apply(rabi, diag, &basis[j], &mut w);
        let a = dot(&basis[j], &w).re;
        for (k, x) in w.iter_mut().enumerate() {
            *x -= basis[j][k] * a;
            if j > 0 {
                *x -= basis[j - 1][k] * beta[j - 1];
            }
        }
        alpha.push(a);
        let b = norm(&w);
        let y = tridiagonal_exp(&alpha, &beta, h);
        let residual = beta0 * b * y[j].norm();
        if residual < KRYLOV_TOLERANCE || b < 1e-14 {
            for (k, out) in psi.iter_mut().enumerate() {
                *out = (0..=j).map(|l| basis[l][k] * y[l]).sum::<Complex64>() * beta0;
            }
            return;
        }
        if basis.len() == KRYLOV_MAX {
            krylov(op, rabi, diag, h / 2.0, psi);
            krylov(op, rabi, diag, h / 2.0, psi);
            return;
        }
        beta.push(b);
        basis.push(w.iter().map(|x| x / b).collect());
    }
}

/// `exp(−i h T) e₁` for the symmetric tridiagonal `T`.
fn tridiagonal_exp(alpha: &[f64], beta: &[f64], h: f64) -> Vec<Complex64> {
    let m = alpha.len();
    let mut t = DMatrix::zeros(m, m);
    for k in 0..m {
        t[(k, k)] = alpha[k];
        if k + 1 < m {
            t[(k, k + 1)] = beta[k];
            t[(k + 1, k)] = beta[k];
        }
    }
    let eig = SymmetricEigen::new(t);
    let q = &eig.eigenvectors;
    (0..m)
        .map(|k| (0..m).map(|l| q[(k, l)] * q[(0, l)] * Complex64::from_polar(1.0, -eig.eigenvalues[l] * h)).sum())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mis::builtin::builtin;
    use crate::sim::{HamiltonianSpec, StateVector};
    use std::f64::consts::TAU;

    #[test]
    fn krylov_agrees_with_exact_steps() {
        let op = Operator::new(&HamiltonianSpec::blockade(builtin("G6").unwrap().graph)).unwrap();
        let mut a = StateVector::empty_configuration(op.basis.clone()).amplitudes;
        let mut b = a.clone();
        let diag = op.diagonal(TAU * 1.0);
        for _ in 0..50 {
            exact(&op, TAU * 1.5, TAU * 1.0, 0.01, &mut a);
            krylov(&op, TAU * 1.5, &diag, 0.01, &mut b);
        }
        let err: f64 = a.iter().zip(&b).map(|(x, y)| (x - y).norm()).sum();
        assert!(err < 1e-10, "{err}");
        assert!((norm(&b) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn long_krylov_step_is_split() {
        let op = Operator::new(&HamiltonianSpec::blockade(builtin("G6").unwrap().graph)).unwrap();
        let mut a = StateVector::empty_configuration(op.basis.clone()).amplitudes;
        let mut b = a.clone();
        exact(&op, TAU * 1.5, TAU * 3.0, 2.0, &mut a);
        krylov(&op, TAU * 1.5, &op.diagonal(TAU * 3.0), 2.0, &mut b);
        let err: f64 = a.iter().zip(&b).map(|(x, y)| (x - y).norm()).sum();
        assert!(err < 1e-9, "{err}");
    }
}
