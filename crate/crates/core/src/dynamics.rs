//! Unitary dynamics, reduced mirror states and the finite-J trajectory runs.

use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hilbert::{CompositeBasis, Operator, Space, C64, DEFAULT_DENSE_THRESHOLD};
use crate::krylov::{self, dot, norm, scale_in_place};
use crate::model::{self, ModelParams};
use crate::spectra::{self, LanczosConfig, Sector};

/// Top-level Fock population above which a cutoff is rejected.
pub const CUTOFF_TOLERANCE: f64 = 1e-6;

/// A normalized state vector over a composite basis.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    basis: Arc<CompositeBasis>,
    amplitudes: Vec<C64>,
}

impl PureState {
    /// Wrap amplitudes that are already normalized to within 1e-10.
    pub fn new(basis: Arc<CompositeBasis>, amplitudes: Vec<C64>) -> Result<Self> {
        check_len(&basis, amplitudes.len())?;
        let n = norm(&amplitudes);
        if (n - 1.0).abs() > 1e-10 {
            return Err(Error::CorruptedState(format!("state norm {n} is not 1")));
        }
        Ok(PureState { basis, amplitudes })
    }

    /// Normalize and wrap.
    pub fn normalized(basis: Arc<CompositeBasis>, mut amplitudes: Vec<C64>) -> Result<Self> {
        check_len(&basis, amplitudes.len())?;
        let n = norm(&amplitudes);
        if !(n.is_finite() && n > 0.0) {
            return Err(Error::CorruptedState(format!("cannot normalize a vector of norm {n}")));
        }
        scale_in_place(&mut amplitudes, 1.0 / n);
        Ok(PureState { basis, amplitudes })
    }

    pub fn basis_state(basis: Arc<CompositeBasis>, index: usize) -> Result<Self> {
        if index >= basis.total_dim() {
            return Err(Error::DimensionMismatch(format!(
                "basis index {index} outside dimension {}",
                basis.total_dim()
            )));
        }
        let mut amplitudes = vec![C64::new(0.0, 0.0); basis.total_dim()];
        amplitudes[index] = C64::new(1.0, 0.0);
        Ok(PureState { basis, amplitudes })
    }

    pub fn basis(&self) -> &Arc<CompositeBasis> {
        &self.basis
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        norm(&self.amplitudes)
    }

    /// <self|other>
    pub fn inner(&self, other: &PureState) -> Result<C64> {
        same_basis(&self.basis, &other.basis)?;
        Ok(dot(&self.amplitudes, &other.amplitudes))
    }

    /// Tensor product, `self` on the leading factors.
    pub fn tensor(&self, other: &PureState) -> Result<PureState> {
        let basis = Arc::new(self.basis.tensor(&other.basis)?);
        let mut amplitudes = Vec::with_capacity(basis.total_dim());
        for a in &self.amplitudes {
            amplitudes.extend(other.amplitudes.iter().map(|b| a * b));
        }
        Ok(PureState { basis, amplitudes })
    }

    /// Probability of the top occupation of every Fock factor, by slot.
    pub fn top_level_populations(&self) -> Vec<(usize, f64)> {
        let dims = self.basis.dims();
        self.basis
            .factors()
            .iter()
            .enumerate()
            .filter(|(_, f)| matches!(f, Space::Fock(_)))
            .map(|(slot, _)| {
                let stride = self.basis.stride(slot);
                let d = dims[slot];
                let p = self
                    .amplitudes
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| (i / stride) % d == d - 1)
                    .map(|(_, z)| z.norm_sqr())
                    .sum();
                (slot, p)
            })
            .collect()
    }
}

fn check_len(basis: &CompositeBasis, len: usize) -> Result<()> {
    if len != basis.total_dim() {
        return Err(Error::DimensionMismatch(format!(
            "{len} amplitudes for a basis of dimension {}",
            basis.total_dim()
        )));
    }
    Ok(())
}

fn same_basis(a: &Arc<CompositeBasis>, b: &Arc<CompositeBasis>) -> Result<()> {
    if Arc::ptr_eq(a, b) || **a == **b {
        Ok(())
    } else {
        Err(Error::DimensionMismatch(format!("basis mismatch: {a} vs {b}")))
    }
}

/// Reduced state of a subsystem.
#[derive(Clone, Debug)]
pub struct DensityMatrix {
    matrix: DMatrix<C64>,
    basis: Arc<CompositeBasis>,
}

impl DensityMatrix {
    /// Checks hermiticity (1e-12) and unit trace (1e-10); positivity is
    /// checked where the spectrum is computed.
    pub fn new(basis: Arc<CompositeBasis>, matrix: DMatrix<C64>) -> Result<Self> {
        let n = basis.total_dim();
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix for a basis of dimension {n}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let herm = (0..n)
            .flat_map(|r| (0..n).map(move |c| (r, c)))
            .map(|(r, c)| (matrix[(r, c)] - matrix[(c, r)].conj()).norm())
            .fold(0.0, f64::max);
        if herm > 1e-12 {
            return Err(Error::CorruptedState(format!("density matrix not hermitian ({herm:e})")));
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > 1e-10 || tr.im.abs() > 1e-10 {
            return Err(Error::CorruptedState(format!("density matrix trace {tr}")));
        }
        Ok(DensityMatrix { matrix, basis })
    }

    pub fn pure(state: &PureState) -> Self {
        let v = nalgebra::DVector::from_column_slice(state.amplitudes());
        DensityMatrix {
            matrix: &v * v.adjoint(),
            basis: state.basis.clone(),
        }
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn basis(&self) -> &Arc<CompositeBasis> {
        &self.basis
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = self.matrix.clone().symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    /// Tr(rho^2).
    pub fn purity(&self) -> f64 {
        (&self.matrix * &self.matrix).trace().re
    }

    pub fn expectation(&self, op: &Operator) -> Result<f64> {
        same_basis(&self.basis, op.basis())?;
        let mut acc = C64::new(0.0, 0.0);
        for (r, c, v) in op.triplets() {
            acc += v * self.matrix[(c, r)];
        }
        Ok(acc.re)
    }
}

/// Ascending time grid with values of one observable.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeSeries {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub label: String,
}

impl TimeSeries {
    pub fn new(times: Vec<f64>, values: Vec<f64>, label: impl Into<String>) -> Result<Self> {
        if times.len() != values.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} times but {} values",
                times.len(),
                values.len()
            )));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParameter("times must be strictly ascending".into()));
        }
        if times.iter().chain(&values).any(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter("time series entries must be finite".into()));
        }
        Ok(TimeSeries {
            times,
            values,
            label: label.into(),
        })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Largest pointwise |self - other| over times up to `t_max`; the grids must agree.
    pub fn linf_distance(&self, other: &TimeSeries, t_max: f64) -> Result<f64> {
        if self.times != other.times {
            return Err(Error::DimensionMismatch("time grids differ".into()));
        }
        Ok(self
            .times
            .iter()
            .zip(self.values.iter().zip(&other.values))
            .filter(|(t, _)| **t <= t_max)
            .map(|(_, (a, b))| (a - b).abs())
            .fold(0.0, f64::max))
    }
}

/// Uniform grid of `steps + 1` points on [0, t_max].
pub fn uniform_grid(t_max: f64, steps: usize) -> Vec<f64> {
    (0..=steps)
        .map(|k| t_max * k as f64 / steps as f64)
        .collect()
}

/// Default figure grid: two mirror periods, 400 points.
pub fn figure_grid(params: &ModelParams) -> Vec<f64> {
    let period = 2.0 * std::f64::consts::PI / params.omega_m;
    uniform_grid(2.0 * period, 399)
}

/// Real part of <psi|op|psi>; the imaginary part must vanish to 1e-10.
pub fn expectation(op: &Operator, psi: &PureState) -> Result<f64> {
    same_basis(op.basis(), psi.basis())?;
    let v = op.apply(psi.amplitudes());
    let z = dot(psi.amplitudes(), &v);
    if z.im.abs() > 1e-10 * z.re.abs().max(1.0) {
        return Err(Error::CorruptedState(format!(
            "expectation value has imaginary part {:e}",
            z.im
        )));
    }
    Ok(z.re)
}

/// Propagation method for [`evolve_with`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    /// Dense eigendecomposition at or below the threshold, Krylov above.
    Auto,
    Dense,
    Krylov,
}

#[derive(Clone, Debug)]
pub struct EvolveOptions {
    pub method: Method,
    pub dense_threshold: usize,
    /// Maximum Krylov subspace size per step.
    pub krylov_dim: usize,
    /// Local error target per Krylov step.
    pub local_tol: f64,
    /// Steps shorter than this abort with [`Error::StepUnderflow`].
    pub min_step: f64,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        EvolveOptions {
            method: Method::Auto,
            dense_threshold: DEFAULT_DENSE_THRESHOLD,
            krylov_dim: 40,
            local_tol: 1e-9,
            min_step: 1e-10,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct EvolveStats {
    pub steps: usize,
    pub rejected: usize,
    pub matvecs: usize,
}

/// exp(-i H t) psi0 at every requested time.
pub fn evolve(h: &Operator, psi0: &PureState, times: &[f64]) -> Result<Vec<PureState>> {
    let mut out = Vec::with_capacity(times.len());
    evolve_with(h, psi0, times, &EvolveOptions::default(), |_, _, psi| {
        out.push(psi.clone());
        Ok(())
    })?;
    Ok(out)
}

/// Propagate and hand every requested time's state to `visit(index, t, psi)`
/// without storing the trajectory.
pub fn evolve_with(
    h: &Operator,
    psi0: &PureState,
    times: &[f64],
    opts: &EvolveOptions,
    mut visit: impl FnMut(usize, f64, &PureState) -> Result<()>,
) -> Result<EvolveStats> {
    same_basis(h.basis(), psi0.basis())?;
    h.check_hermitian()?;
    if times.iter().any(|t| !t.is_finite() || *t < 0.0) || times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidParameter(
            "evolution times must be finite, non-negative and ascending".into(),
        ));
    }
    let dense = match opts.method {
        Method::Dense => true,
        Method::Krylov => false,
        Method::Auto => h.dim() <= opts.dense_threshold,
    };
    if dense {
        dense_propagate(h, psi0, times, opts.dense_threshold, &mut visit)
    } else {
        krylov_propagate(h, psi0, times, opts, &mut visit)
    }
}

fn dense_propagate(
    h: &Operator,
    psi0: &PureState,
    times: &[f64],
    threshold: usize,
    visit: &mut impl FnMut(usize, f64, &PureState) -> Result<()>,
) -> Result<EvolveStats> {
    let (energies, v) = spectra::dense_eigh(h, threshold)?;
    let psi = nalgebra::DVector::from_column_slice(psi0.amplitudes());
    let coeffs = v.adjoint() * psi;
    for (k, &t) in times.iter().enumerate() {
        let phased = nalgebra::DVector::from_iterator(
            coeffs.len(),
            coeffs
                .iter()
                .zip(&energies)
                .map(|(c, e)| c * C64::from_polar(1.0, -e * t)),
        );
        let out = &v * phased;
        let state = PureState {
            basis: psi0.basis.clone(),
            amplitudes: out.iter().copied().collect(),
        };
        visit(k, t, &state)?;
    }
    Ok(EvolveStats::default())
}

fn krylov_propagate(
    h: &Operator,
    psi0: &PureState,
    times: &[f64],
    opts: &EvolveOptions,
    visit: &mut impl FnMut(usize, f64, &PureState) -> Result<()>,
) -> Result<EvolveStats> {
    let mut stats = EvolveStats::default();
    let mut psi = psi0.amplitudes.clone();
    let mut t = 0.0;
    let mut tau = 1.0 / h.norm_inf().max(1e-300);
    for (k, &target) in times.iter().enumerate() {
        while target - t > 1e-13 * target.max(1.0) {
            let beta0 = norm(&psi);
            let mut start = psi.clone();
            scale_in_place(&mut start, 1.0 / beta0);
            let dec = krylov::lanczos(h, start, opts.krylov_dim, None, |_| false);
            stats.matvecs += dec.size();
            let m = dec.size();
            let eig = SymmetricEigen::new(dec.tridiagonal(m));
            let residual = dec.residual_norm();
            let happy = residual < krylov::BREAKDOWN * (1.0 + h.norm_inf());
            // coefficients of e1 in the Ritz basis
            let first: Vec<f64> = (0..m).map(|j| eig.eigenvectors[(0, j)]).collect();
            let project = |step: f64| -> Vec<C64> {
                (0..m)
                    .map(|r| {
                        (0..m)
                            .map(|j| {
                                eig.eigenvectors[(r, j)]
                                    * first[j]
                                    * C64::from_polar(1.0, -eig.eigenvalues[j] * step)
                            })
                            .sum()
                    })
                    .collect()
            };
            loop {
                let remaining = target - t;
                let clipped = tau >= remaining;
                let step = if clipped { remaining } else { tau };
                let y = project(step);
                let err = if happy { 0.0 } else { beta0 * residual * y[m - 1].norm() };
                if err <= opts.local_tol {
                    psi = dec.combine(y.iter().map(|c| c * beta0));
                    t = if clipped { target } else { t + step };
                    stats.steps += 1;
                    if !clipped {
                        let grow = if err > 0.0 {
                            (0.9 * (opts.local_tol / err).powf(1.0 / m as f64)).min(2.0)
                        } else {
                            2.0
                        };
                        tau = step * grow.max(1.0);
                    }
                    break;
                }
                stats.rejected += 1;
                tau = step * 0.5;
                if tau < opts.min_step {
                    return Err(Error::StepUnderflow { time: t, step: tau });
                }
            }
        }
        let state = PureState {
            basis: psi0.basis.clone(),
            amplitudes: psi.clone(),
        };
        visit(k, target, &state)?;
    }
    Ok(stats)
}

/// Dense von Neumann evolution rho(t) = U rho0 U^dagger for mixed states.
pub fn evolve_density(h: &Operator, rho0: &DensityMatrix, times: &[f64], threshold: usize) -> Result<Vec<DensityMatrix>> {
    same_basis(h.basis(), rho0.basis())?;
    let (energies, v) = spectra::dense_eigh(h, threshold)?;
    let rho_eig = v.adjoint() * rho0.matrix() * &v;
    let n = energies.len();
    times
        .iter()
        .map(|&t| {
            let phased = DMatrix::from_fn(n, n, |r, c| {
                rho_eig[(r, c)] * C64::from_polar(1.0, -(energies[r] - energies[c]) * t)
            });
            Ok(DensityMatrix {
                matrix: &v * phased * v.adjoint(),
                basis: rho0.basis.clone(),
            })
        })
        .collect()
}

/// Thermodynamic-limit occupation of a mirror starting in its vacuum,
/// (2 Omega^2 / omega_m^2)(1 - cos omega_m t); defined for lambda > lambda_c.
pub fn analytic_occupation(t: f64, params: &ModelParams) -> Result<f64> {
    if params.lambda <= params.lambda_c() {
        return Err(params.phase_error("the driven-mirror occupation law", ">"));
    }
    let omega = params.drive()?;
    let wm = params.omega_m;
    Ok(2.0 * omega * omega / (wm * wm) * (1.0 - (wm * t).cos()))
}

/// Thermodynamic-limit mirror occupation: the driven law above lambda_c and
/// zero (free mirror in its vacuum) otherwise.
pub fn limit_occupation(t: f64, params: &ModelParams) -> f64 {
    analytic_occupation(t, params).unwrap_or(0.0)
}

/// Partial trace over every factor except the last.
pub fn reduce_to_last(psi: &PureState) -> Result<DensityMatrix> {
    let basis = psi.basis();
    let slot = basis.arity() - 1;
    let dm = basis.dims()[slot];
    let rest = basis.total_dim() / dm;
    let amps = psi.amplitudes();
    let mut rho = DMatrix::<C64>::zeros(dm, dm);
    for r in 0..rest {
        let row = &amps[r * dm..(r + 1) * dm];
        for i in 0..dm {
            if row[i] == C64::new(0.0, 0.0) {
                continue;
            }
            for j in 0..dm {
                rho[(i, j)] += row[i] * row[j].conj();
            }
        }
    }
    // enforce exact hermiticity lost to summation order
    let rho = (&rho + rho.adjoint()) * C64::new(0.5, 0.0);
    let sub = CompositeBasis::single(basis.factors()[slot].clone());
    DensityMatrix::new(sub, rho)
}

/// Mirror state rho_c = Tr_{field, spin} |psi><psi| for a (field, spin, mirror) basis.
pub fn reduce_to_mirror(psi: &PureState) -> Result<DensityMatrix> {
    let basis = psi.basis();
    if basis.arity() != 3 || !matches!(basis.factors()[2], Space::Fock(_)) {
        return Err(Error::DimensionMismatch(format!(
            "reduce_to_mirror needs a three-factor basis ending in the mirror, got {basis}"
        )));
    }
    reduce_to_last(psi)
}

/// -Tr(rho ln rho) in nats.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> Result<f64> {
    let mut s = 0.0;
    for p in rho.eigenvalues() {
        if p < -1e-8 {
            return Err(Error::CorruptedState(format!("density matrix eigenvalue {p:e}")));
        }
        if p > 0.0 {
            s -= p * p.ln();
        }
    }
    // eigenvalues a hair above 1 give a round-off negative
    Ok(s.max(0.0))
}

/// Symmetry sector used for the finite-J Dicke ground state.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ParitySector {
    Even,
    Odd,
    Unrestricted,
}

impl ParitySector {
    pub fn as_str(self) -> &'static str {
        match self {
            ParitySector::Even => "even",
            ParitySector::Odd => "odd",
            ParitySector::Unrestricted => "unrestricted",
        }
    }

    fn sector(self, basis: &CompositeBasis) -> Option<Sector> {
        let eigenvalue = match self {
            ParitySector::Even => 1.0,
            ParitySector::Odd => -1.0,
            ParitySector::Unrestricted => return None,
        };
        Some(Sector {
            diagonal: basis.parity(&[0, 1]),
            eigenvalue,
        })
    }
}

impl std::str::FromStr for ParitySector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "even" => Ok(ParitySector::Even),
            "odd" => Ok(ParitySector::Odd),
            "unrestricted" | "none" => Ok(ParitySector::Unrestricted),
            _ => Err(Error::InvalidParameter(format!("unknown parity sector {s:?}"))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct TrajectoryOptions {
    pub evolve: EvolveOptions,
    pub lanczos: LanczosConfig,
    pub parity: ParitySector,
    /// Maximum tolerated top-level Fock population.
    pub cutoff_tol: f64,
    /// Relative energy drift tolerated along a trajectory.
    pub energy_tol: f64,
    /// When set, a failed cutoff validation raises the offending cutoff(s) by
    /// half and retries, up to this value.
    pub max_cutoff: Option<usize>,
}

impl Default for TrajectoryOptions {
    fn default() -> Self {
        TrajectoryOptions {
            evolve: EvolveOptions::default(),
            lanczos: LanczosConfig::default(),
            parity: ParitySector::Even,
            cutoff_tol: CUTOFF_TOLERANCE,
            energy_tol: 1e-8,
            max_cutoff: None,
        }
    }
}

/// Largest top-level populations seen in a run.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct CutoffReport {
    pub field_top: f64,
    pub mirror_top: f64,
}

impl CutoffReport {
    pub fn max(&self) -> f64 {
        self.field_top.max(self.mirror_top)
    }

    fn absorb(&mut self, pops: &[(usize, f64)], field_slot: usize, mirror_slot: usize) {
        for &(slot, p) in pops {
            if slot == field_slot {
                self.field_top = self.field_top.max(p);
            } else if slot == mirror_slot {
                self.mirror_top = self.mirror_top.max(p);
            }
        }
    }
}

/// One finite-J exact simulation started from the Dicke ground state times
/// the mirror vacuum.
#[derive(Clone, Debug)]
pub struct FiniteJRun {
    pub two_j: u32,
    /// Cutoffs actually used, after any escalation.
    pub cutoff_field: usize,
    pub cutoff_mirror: usize,
    pub occupation: TimeSeries,
    pub entropy: TimeSeries,
    pub ground_energy: f64,
    pub ground_degenerate: bool,
    /// Ground-state <a^dagger a> / J.
    pub order_parameter: f64,
    pub cutoff: CutoffReport,
    pub energy_drift: f64,
    pub norm_drift: f64,
    pub stats: EvolveStats,
}

/// Ground state of the Dicke Hamiltonian in the chosen parity sector.
pub fn dicke_ground_state(
    params: &ModelParams,
    opts: &TrajectoryOptions,
) -> Result<spectra::GroundState> {
    let basis = params.dicke_basis()?;
    let h = model::build_dicke(params, &basis)?;
    let cfg = LanczosConfig {
        sector: opts.parity.sector(&basis),
        ..opts.lanczos.clone()
    };
    spectra::ground_state(&h, &cfg)
}

pub fn simulate_finite_j(params: &ModelParams, times: &[f64], opts: &TrajectoryOptions) -> Result<FiniteJRun> {
    params.validate()?;
    let mut p = params.clone();
    loop {
        let (report, t) = match simulate_once(&p, times, opts)? {
            Ok(run) => return Ok(run),
            Err(failure) => failure,
        };
        let cap = match opts.max_cutoff {
            Some(cap) => cap,
            None => return Err(cutoff_error(&p, &report, t)),
        };
        let grow = |c: usize| (c + c / 2).min(cap);
        let mut grown = false;
        if report.field_top > opts.cutoff_tol && p.cutoff_field < cap {
            p.cutoff_field = grow(p.cutoff_field);
            grown = true;
        }
        if report.mirror_top > opts.cutoff_tol && p.cutoff_mirror < cap {
            p.cutoff_mirror = grow(p.cutoff_mirror);
            grown = true;
        }
        if !grown {
            return Err(cutoff_error(&p, &report, t));
        }
    }
}

type CutoffFailure = (CutoffReport, f64);

fn simulate_once(
    params: &ModelParams,
    times: &[f64],
    opts: &TrajectoryOptions,
) -> Result<std::result::Result<FiniteJRun, CutoffFailure>> {
    let ground = dicke_ground_state(params, opts)?;
    let dicke_basis = params.dicke_basis()?;
    let n_a = model::field_number(&dicke_basis)?;
    let order_parameter = expectation(&n_a, &ground.state)? / params.j();

    let mut cutoff = CutoffReport::default();
    cutoff.absorb(&ground.state.top_level_populations(), 0, usize::MAX);
    if cutoff.max() > opts.cutoff_tol {
        return Ok(Err((cutoff, 0.0)));
    }

    let mirror_vacuum = PureState::basis_state(params.mirror_basis()?, 0)?;
    let psi0 = ground.state.tensor(&mirror_vacuum)?;
    let basis = params.full_basis()?;
    let psi0 = PureState::new(basis.clone(), psi0.amplitudes)?;
    let h = model::build_full(params, &basis, None)?;
    let n_c = model::mirror_number(&basis)?;

    let e0 = expectation(&h, &psi0)?;
    let mut occupation = Vec::with_capacity(times.len());
    let mut entropy = Vec::with_capacity(times.len());
    let mut energy_drift: f64 = 0.0;
    let mut norm_drift: f64 = 0.0;
    let mut failed_at = None;
    let evolved = evolve_with(&h, &psi0, times, &opts.evolve, |_, t, psi| {
        occupation.push(expectation(&n_c, psi)?);
        entropy.push(von_neumann_entropy(&reduce_to_mirror(psi)?)?);
        energy_drift = energy_drift.max((expectation(&h, psi)? - e0).abs() / e0.abs().max(1.0));
        norm_drift = norm_drift.max((psi.norm() - 1.0).abs());
        cutoff.absorb(&psi.top_level_populations(), 0, 2);
        if cutoff.max() > opts.cutoff_tol {
            failed_at = Some(t);
            return Err(cutoff_error(params, &cutoff, t));
        }
        Ok(())
    });
    let stats = match (evolved, failed_at) {
        (_, Some(t)) => return Ok(Err((cutoff, t))),
        (r, None) => r?,
    };
    if energy_drift > opts.energy_tol {
        return Err(Error::EnergyDrift {
            drift: energy_drift,
            bound: opts.energy_tol,
        });
    }
    let label = format!("J={}", model::format_half_integer(params.two_j));
    Ok(Ok(FiniteJRun {
        two_j: params.two_j,
        cutoff_field: params.cutoff_field,
        cutoff_mirror: params.cutoff_mirror,
        occupation: TimeSeries::new(times.to_vec(), occupation, label.clone())?,
        entropy: TimeSeries::new(times.to_vec(), entropy, label)?,
        ground_energy: ground.energy,
        ground_degenerate: ground.degenerate,
        order_parameter,
        cutoff,
        energy_drift,
        norm_drift,
        stats,
    }))
}

fn cutoff_error(params: &ModelParams, report: &CutoffReport, t: f64) -> Error {
    Error::CutoffValidation(format!(
        "J = {} at t = {t}: top-level populations field {:e} (cutoff {}), mirror {:e} (cutoff {})",
        model::format_half_integer(params.two_j),
        report.field_top,
        params.cutoff_field,
        report.mirror_top,
        params.cutoff_mirror
    ))
}

/// Finite-J runs for every entry of `two_j_list` plus the thermodynamic-limit curve.
#[derive(Clone, Debug)]
pub struct TrajectorySet {
    pub runs: Vec<FiniteJRun>,
    pub limit: TimeSeries,
}

impl TrajectorySet {
    /// L-infinity distance of each run's occupation to the limit curve over [0, t_max].
    pub fn convergence(&self, t_max: f64) -> Result<Vec<(u32, f64)>> {
        self.runs
            .iter()
            .map(|r| Ok((r.two_j, r.occupation.linf_distance(&self.limit, t_max)?)))
            .collect()
    }
}

pub fn limit_series(params: &ModelParams, times: &[f64]) -> Result<TimeSeries> {
    let values = times.iter().map(|&t| limit_occupation(t, params)).collect();
    TimeSeries::new(times.to_vec(), values, "TL")
}

/// Runs the J values concurrently; results are ordered as `two_j_list`.
pub fn occupation_trajectory(
    params: &ModelParams,
    two_j_list: &[u32],
    times: &[f64],
    opts: &TrajectoryOptions,
) -> Result<TrajectorySet> {
    params.validate()?;
    let runs = two_j_list
        .par_iter()
        .map(|&two_j| {
            let p = ModelParams {
                two_j,
                ..params.clone()
            };
            simulate_finite_j(&p, times, opts)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TrajectorySet {
        runs,
        limit: limit_series(params, times)?,
    })
}

/// Thermodynamic-limit effective Hamiltonians.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EffectiveModel {
    Normal,
    Superradiant,
}

impl EffectiveModel {
    pub fn as_str(self) -> &'static str {
        match self {
            EffectiveModel::Normal => "normal",
            EffectiveModel::Superradiant => "superradiant",
        }
    }
}

/// Mirror observables of a run whose initial state is a product with the mirror vacuum.
#[derive(Clone, Debug)]
pub struct MirrorRun {
    pub occupation: TimeSeries,
    pub entropy: TimeSeries,
    pub stats: EvolveStats,
}

/// Evolve (two-mode ground state) x (mirror vacuum) under an effective
/// Hamiltonian on field x atom boson x mirror.
pub fn simulate_effective(
    params: &ModelParams,
    kind: EffectiveModel,
    times: &[f64],
    opts: &TrajectoryOptions,
) -> Result<MirrorRun> {
    params.validate()?;
    let two_mode = params.two_mode_basis()?;
    let block = match kind {
        EffectiveModel::Normal => model::normal_phase_dicke_block(params, &two_mode)?,
        EffectiveModel::Superradiant => model::superradiant_dicke_block(params, &two_mode)?,
    };
    let ground = spectra::ground_state_auto(&block, &opts.lanczos, opts.evolve.dense_threshold)?;
    let mirror_vacuum = PureState::basis_state(params.mirror_basis()?, 0)?;
    let basis = params.hp_basis()?;
    let psi0 = PureState::new(basis.clone(), ground.state.tensor(&mirror_vacuum)?.amplitudes)?;
    let h = match kind {
        EffectiveModel::Normal => model::build_normal_phase(params, &basis)?,
        EffectiveModel::Superradiant => model::build_superradiant(params, &basis)?,
    };
    let n_c = model::mirror_number(&basis)?;
    let mut occupation = Vec::with_capacity(times.len());
    let mut entropy = Vec::with_capacity(times.len());
    let stats = evolve_with(&h, &psi0, times, &opts.evolve, |_, _, psi| {
        occupation.push(expectation(&n_c, psi)?);
        entropy.push(von_neumann_entropy(&reduce_to_mirror(psi)?)?);
        Ok(())
    })?;
    Ok(MirrorRun {
        occupation: TimeSeries::new(times.to_vec(), occupation, kind.as_str())?,
        entropy: TimeSeries::new(times.to_vec(), entropy, kind.as_str())?,
        stats,
    })
}

/// Mirror vacuum evolved under the classically driven oscillator.
pub fn simulate_mirror_driven(params: &ModelParams, times: &[f64], opts: &EvolveOptions) -> Result<MirrorRun> {
    let basis = params.mirror_basis()?;
    let h = model::build_mirror_driven(params, &basis)?;
    let psi0 = PureState::basis_state(basis.clone(), 0)?;
    let n_c = model::mirror_number(&basis)?;
    let mut occupation = Vec::with_capacity(times.len());
    let stats = evolve_with(&h, &psi0, times, opts, |_, _, psi| {
        occupation.push(expectation(&n_c, psi)?);
        Ok(())
    })?;
    Ok(MirrorRun {
        occupation: TimeSeries::new(times.to_vec(), occupation, "driven")?,
        entropy: TimeSeries::new(times.to_vec(), vec![0.0; times.len()], "driven")?,
        stats,
    })
}
