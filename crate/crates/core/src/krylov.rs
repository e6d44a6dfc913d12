//! Lanczos recursion with full reorthogonalization, shared by the ground-state
//! solver and the Krylov propagator.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::hilbert::{Operator, C64};

/// Below this norm the Krylov space is treated as invariant.
pub(crate) const BREAKDOWN: f64 = 1e-13;

pub(crate) fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub(crate) fn norm(a: &[C64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub(crate) fn scale_in_place(a: &mut [C64], s: f64) {
    a.iter_mut().for_each(|z| *z *= s);
}

/// Orthonormal Krylov basis together with the tridiagonal projection.
pub(crate) struct Decomposition {
    pub basis: Vec<Vec<C64>>,
    /// Diagonal of T.
    pub alpha: Vec<f64>,
    /// Off-diagonal of T; `beta[j]` couples vectors j and j+1, the last entry
    /// is the norm of the unused residual.
    pub beta: Vec<f64>,
}

impl Decomposition {
    pub fn size(&self) -> usize {
        self.alpha.len()
    }

    pub fn residual_norm(&self) -> f64 {
        *self.beta.last().unwrap_or(&0.0)
    }

    pub fn tridiagonal(&self, k: usize) -> DMatrix<f64> {
        let mut t = DMatrix::zeros(k, k);
        for j in 0..k {
            t[(j, j)] = self.alpha[j];
            if j + 1 < k {
                t[(j, j + 1)] = self.beta[j];
                t[(j + 1, j)] = self.beta[j];
            }
        }
        t
    }

    /// Ascending Ritz values and the matching eigenvectors of the leading k x k block.
    pub fn ritz(&self, k: usize) -> (Vec<f64>, DMatrix<f64>) {
        let eig = SymmetricEigen::new(self.tridiagonal(k));
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
        let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let vectors = DMatrix::from_fn(k, k, |r, c| eig.eigenvectors[(r, order[c])]);
        (values, vectors)
    }

    /// Sum_j coeffs[j] * basis[j].
    pub fn combine(&self, coeffs: impl Iterator<Item = C64>) -> Vec<C64> {
        let dim = self.basis[0].len();
        let mut out = vec![C64::new(0.0, 0.0); dim];
        for (c, v) in coeffs.zip(&self.basis) {
            for (o, x) in out.iter_mut().zip(v) {
                *o += c * x;
            }
        }
        out
    }
}

/// Run up to `max_dim` Lanczos steps from a normalized `start`.
///
/// `mask`, when given, is a diagonal symmetry projector (entries 0 or 1) that
/// is reapplied after every matvec to remove numerical leakage out of the
/// sector. `stop` is consulted after each step with the current decomposition.
pub(crate) fn lanczos(
    h: &Operator,
    start: Vec<C64>,
    max_dim: usize,
    mask: Option<&[f64]>,
    mut stop: impl FnMut(&Decomposition) -> bool,
) -> Decomposition {
    let dim = start.len();
    let max_dim = max_dim.min(dim).max(1);
    let mut dec = Decomposition {
        basis: vec![start],
        alpha: Vec::with_capacity(max_dim),
        beta: Vec::with_capacity(max_dim),
    };
    let mut w = vec![C64::new(0.0, 0.0); dim];
    loop {
        let j = dec.basis.len() - 1;
        h.matvec(&dec.basis[j], &mut w);
        if let Some(mask) = mask {
            w.iter_mut().zip(mask).for_each(|(z, m)| *z *= *m);
        }
        let alpha = dot(&dec.basis[j], &w).re;
        // two passes of classical Gram-Schmidt against the whole basis
        for _ in 0..2 {
            for v in &dec.basis {
                let c = dot(v, &w);
                w.iter_mut().zip(v).for_each(|(x, y)| *x -= c * y);
            }
        }
        let beta = norm(&w);
        dec.alpha.push(alpha);
        dec.beta.push(beta);
        if beta < BREAKDOWN * (1.0 + alpha.abs()) || dec.size() >= max_dim || stop(&dec) {
            return dec;
        }
        let mut next = w.clone();
        scale_in_place(&mut next, 1.0 / beta);
        dec.basis.push(next);
    }
}
