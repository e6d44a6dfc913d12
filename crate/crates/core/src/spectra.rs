//! Ground states and spectra.
//!
//! Small Hamiltonians go through a dense Hermitian eigensolver; large sparse
//! ones through restarted Lanczos with full reorthogonalization.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dynamics::PureState;
use crate::error::{Error, Result};
use crate::hilbert::{Operator, C64, DEFAULT_DENSE_THRESHOLD};
use crate::krylov::{self, norm, scale_in_place};

/// Default seed for Lanczos start vectors.
pub const DEFAULT_SEED: u64 = 0x5eed_d1c4e;

/// Ground-state gap below which the ground level is reported as degenerate.
pub const DEGENERACY_GAP: f64 = 1e-8;

#[derive(Clone, Debug)]
pub struct EigenResult {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Option<Vec<PureState>>,
    /// ||H v - E v|| per returned pair; empty without eigenvectors.
    pub residuals: Vec<f64>,
}

/// Ascending eigenvalues and matching eigenvector columns of a Hermitian operator.
pub(crate) fn dense_eigh(h: &Operator, threshold: usize) -> Result<(Vec<f64>, DMatrix<C64>)> {
    h.check_hermitian()?;
    let dense = h.to_dense(threshold)?;
    let (values, vectors): (Vec<f64>, DMatrix<C64>) = if h.is_real() {
        let eig = SymmetricEigen::new(dense.map(|z| z.re));
        (
            eig.eigenvalues.iter().copied().collect(),
            eig.eigenvectors.map(|x| C64::new(x, 0.0)),
        )
    } else {
        let eig = SymmetricEigen::new(dense);
        (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
    };
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let sorted = order.iter().map(|&i| values[i]).collect();
    let columns = DMatrix::from_fn(n, n, |r, c| vectors[(r, order[c])]);
    Ok((sorted, columns))
}

/// Full spectrum of a Hermitian operator below the densification threshold.
pub fn dense_spectrum(h: &Operator, threshold: usize, with_vectors: bool) -> Result<EigenResult> {
    if !with_vectors {
        h.check_hermitian()?;
        let dense = h.to_dense(threshold)?;
        let mut eigenvalues: Vec<f64> = if h.is_real() {
            dense.map(|z| z.re).symmetric_eigenvalues().iter().copied().collect()
        } else {
            dense.symmetric_eigenvalues().iter().copied().collect()
        };
        eigenvalues.sort_by(f64::total_cmp);
        return Ok(EigenResult {
            eigenvalues,
            eigenvectors: None,
            residuals: Vec::new(),
        });
    }
    let (eigenvalues, vectors) = dense_eigh(h, threshold)?;
    let scale = h.norm_inf().max(1.0);
    let mut states = Vec::with_capacity(eigenvalues.len());
    let mut residuals = Vec::with_capacity(eigenvalues.len());
    for (i, &e) in eigenvalues.iter().enumerate() {
        let v: Vec<C64> = vectors.column(i).iter().copied().collect();
        let hv = h.apply(&v);
        let r = hv
            .iter()
            .zip(&v)
            .map(|(a, b)| (a - b * e).norm_sqr())
            .sum::<f64>()
            .sqrt();
        if r > 1e-10 * scale {
            return Err(Error::NoConvergence {
                iterations: 0,
                residual: r,
            });
        }
        residuals.push(r);
        states.push(PureState::normalized(h.basis().clone(), v)?);
    }
    Ok(EigenResult {
        eigenvalues,
        eigenvectors: Some(states),
        residuals,
    })
}

/// Restrict a Lanczos run to the eigenspace of a diagonal symmetry.
#[derive(Clone, Debug)]
pub struct Sector {
    /// Diagonal of the symmetry operator in the computational basis.
    pub diagonal: Vec<f64>,
    /// Eigenvalue selecting the sector.
    pub eigenvalue: f64,
}

impl Sector {
    fn mask(&self) -> Vec<f64> {
        self.diagonal
            .iter()
            .map(|&d| if (d - self.eigenvalue).abs() < 1e-12 { 1.0 } else { 0.0 })
            .collect()
    }
}

#[derive(Clone, Debug)]
pub struct LanczosConfig {
    /// Required residual ||H v - E v||.
    pub tol: f64,
    pub seed: u64,
    /// Krylov vectors per cycle before an explicit restart from the Ritz vector.
    pub krylov_dim: usize,
    pub max_restarts: usize,
    pub sector: Option<Sector>,
}

impl Default for LanczosConfig {
    fn default() -> Self {
        LanczosConfig {
            tol: 1e-9,
            seed: DEFAULT_SEED,
            krylov_dim: 160,
            max_restarts: 60,
            sector: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct GroundState {
    pub energy: f64,
    pub state: PureState,
    pub residual: f64,
    /// Total Lanczos steps over all cycles.
    pub iterations: usize,
    /// Lowest Ritz gap of the final cycle.
    pub gap: f64,
    /// Set when the gap is below [`DEGENERACY_GAP`]; the returned vector is
    /// then one arbitrary member of the ground multiplet.
    pub degenerate: bool,
}

/// Deterministic pseudo-random real start vector.
pub fn start_vector(dim: usize, seed: u64) -> Vec<C64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..dim)
        .map(|_| C64::new(rng.random_range(-1.0..1.0), 0.0))
        .collect()
}

/// Lowest eigenpair by restarted Lanczos with full reorthogonalization.
pub fn ground_state(h: &Operator, cfg: &LanczosConfig) -> Result<GroundState> {
    h.check_hermitian()?;
    let dim = h.dim();
    let mask = cfg.sector.as_ref().map(|s| {
        assert_eq!(s.diagonal.len(), dim, "sector diagonal length");
        s.mask()
    });
    let mut v = start_vector(dim, cfg.seed);
    if let Some(mask) = &mask {
        v.iter_mut().zip(mask).for_each(|(z, m)| *z *= *m);
    }
    let n0 = norm(&v);
    if n0 == 0.0 {
        return Err(Error::InvalidParameter("requested symmetry sector is empty".into()));
    }
    scale_in_place(&mut v, 1.0 / n0);

    let mut iterations = 0;
    let mut last_residual = f64::INFINITY;
    for _ in 0..=cfg.max_restarts {
        let tol = cfg.tol;
        let dec = krylov::lanczos(h, v, cfg.krylov_dim, mask.as_deref(), |d| {
            // cheap convergence probe every few steps
            let k = d.size();
            if k % 8 != 0 {
                return false;
            }
            let (_, s) = d.ritz(k);
            d.residual_norm() * s[(k - 1, 0)].abs() < 0.1 * tol
        });
        iterations += dec.size();
        let k = dec.size();
        let (theta, s) = dec.ritz(k);
        let mut x = dec.combine(s.column(0).iter().map(|&c| C64::new(c, 0.0)));
        if let Some(mask) = &mask {
            x.iter_mut().zip(mask).for_each(|(z, m)| *z *= *m);
        }
        let nx = norm(&x);
        scale_in_place(&mut x, 1.0 / nx);
        let hx = h.apply(&x);
        let energy = krylov::dot(&x, &hx).re;
        let residual = hx
            .iter()
            .zip(&x)
            .map(|(a, b)| (a - b * energy).norm_sqr())
            .sum::<f64>()
            .sqrt();
        last_residual = residual;
        if residual < cfg.tol {
            let gap = if k > 1 { theta[1] - theta[0] } else { f64::INFINITY };
            return Ok(GroundState {
                energy,
                state: PureState::normalized(h.basis().clone(), x)?,
                residual,
                iterations,
                gap,
                degenerate: gap < DEGENERACY_GAP,
            });
        }
        v = x;
    }
    Err(Error::NoConvergence {
        iterations,
        residual: last_residual,
    })
}

/// Ground state through the dense solver when small enough, Lanczos otherwise.
pub fn ground_state_auto(h: &Operator, cfg: &LanczosConfig, threshold: usize) -> Result<GroundState> {
    if h.dim() <= threshold.min(DEFAULT_DENSE_THRESHOLD) && cfg.sector.is_none() {
        let spec = dense_spectrum(h, threshold, true)?;
        let gap = spec.eigenvalues.get(1).map_or(f64::INFINITY, |e1| e1 - spec.eigenvalues[0]);
        let state = spec.eigenvectors.unwrap().swap_remove(0);
        return Ok(GroundState {
            energy: spec.eigenvalues[0],
            state,
            residual: spec.residuals[0],
            iterations: 0,
            gap,
            degenerate: gap < DEGENERACY_GAP,
        });
    }
    ground_state(h, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{fock_number, CompositeBasis, FockMode};
    use crate::model::{build_dicke, build_mirror_driven, ModelParams};

    #[test]
    fn oscillator_ladder() {
        let mode = FockMode::new("c", 5).unwrap();
        let h = &fock_number(&mode) * 0.1;
        let spec = dense_spectrum(&h, 2048, true).unwrap();
        for (n, e) in spec.eigenvalues.iter().enumerate() {
            assert!((e - 0.1 * n as f64).abs() < 1e-14);
        }
        assert!(spec.residuals.iter().all(|&r| r < 1e-12));
    }

    #[test]
    fn decoupled_dicke_ground() {
        let p = ModelParams { lambda: 0.0, two_j: 6, cutoff_field: 6, ..ModelParams::default() };
        let h = build_dicke(&p, &p.dicke_basis().unwrap()).unwrap();
        let spec = dense_spectrum(&h, 2048, false).unwrap();
        assert!((spec.eigenvalues[0] + 3.0).abs() < 1e-14);
        let gs = ground_state(&h, &LanczosConfig::default()).unwrap();
        assert!((gs.energy + 3.0).abs() < 1e-12);
        // |0> x |J,-J> is flat index 0
        assert!((gs.state.amplitudes()[0].norm() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn driven_mirror_ladder_shift() {
        let p = ModelParams { cutoff_mirror: 60, ..ModelParams::default() };
        let h = build_mirror_driven(&p, &p.mirror_basis().unwrap()).unwrap();
        let omega = p.drive().unwrap();
        let spec = dense_spectrum(&h, 2048, true).unwrap();
        for n in 0..20 {
            let expect = p.omega_m * n as f64 - omega * omega / p.omega_m;
            assert!((spec.eigenvalues[n] - expect).abs() < 1e-10, "level {n}");
        }
    }

    #[test]
    fn lanczos_matches_dense_on_dicke() {
        let p = ModelParams { two_j: 8, cutoff_field: 20, ..ModelParams::default() };
        let h = build_dicke(&p, &p.dicke_basis().unwrap()).unwrap();
        let dense = dense_spectrum(&h, 2048, false).unwrap();
        let gs = ground_state(&h, &LanczosConfig::default()).unwrap();
        assert!((gs.energy - dense.eigenvalues[0]).abs() < 1e-9);
        assert!(gs.residual < 1e-9);
    }

    #[test]
    fn sector_restriction_and_reproducibility() {
        let p = ModelParams { two_j: 8, cutoff_field: 20, ..ModelParams::default() };
        let basis = p.dicke_basis().unwrap();
        let h = build_dicke(&p, &basis).unwrap();
        let parity = basis.parity(&[0, 1]);
        let cfg = LanczosConfig {
            sector: Some(Sector { diagonal: parity.clone(), eigenvalue: 1.0 }),
            ..LanczosConfig::default()
        };
        let a = ground_state(&h, &cfg).unwrap();
        let b = ground_state(&h, &cfg).unwrap();
        assert_eq!(a.state.amplitudes(), b.state.amplitudes());
        let odd: f64 = a
            .state
            .amplitudes()
            .iter()
            .zip(&parity)
            .filter(|(_, &s)| s < 0.0)
            .map(|(z, _)| z.norm_sqr())
            .sum();
        assert!(odd < 1e-20);
    }

    #[test]
    fn non_hermitian_rejected() {
        let basis = CompositeBasis::single(FockMode::new("a", 2).unwrap());
        let h = Operator::from_real_triplets(basis, vec![(0, 1, 1.0)], false);
        assert!(matches!(dense_spectrum(&h, 2048, false), Err(Error::NotHermitian(_))));
        assert!(matches!(ground_state(&h, &LanczosConfig::default()), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn non_convergence_is_an_error() {
        let p = ModelParams { two_j: 8, cutoff_field: 20, ..ModelParams::default() };
        let h = build_dicke(&p, &p.dicke_basis().unwrap()).unwrap();
        let cfg = LanczosConfig { krylov_dim: 3, max_restarts: 1, tol: 1e-12, ..LanczosConfig::default() };
        assert!(matches!(ground_state(&h, &cfg), Err(Error::NoConvergence { .. })));
    }
}
