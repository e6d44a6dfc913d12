//! Model parameters and Hamiltonian assembly.
//!
//! Energies are measured in units of the field frequency when reproducing the
//! reference figures (omega = omega0 = 1, omega_m = 0.1). Constant offsets that
//! the effective Hamiltonians drop are dropped here as well.

use std::collections::HashSet;
use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt::Write as _;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::hilbert::{
    embed, fock_annihilation, fock_number, fock_quadrature, spin_operators, CompositeBasis,
    FockMode, Operator, Space, SpinSector, C64,
};

/// Largest composite dimension a builder will assemble.
pub const DEFAULT_DIM_BUDGET: usize = 1 << 22;

/// Bare cavity QED inputs from which the model couplings follow.
#[derive(Clone, Debug, PartialEq)]
pub struct PhysicalCavityParams {
    pub mode_index: u32,
    pub light_speed: f64,
    pub cavity_length: f64,
    pub atom_position: f64,
    pub dipole_moment: f64,
    pub vacuum_permittivity: f64,
    pub mirror_mass: f64,
    pub mirror_frequency: f64,
    pub atom_number: u64,
}

/// Couplings derived from a [`PhysicalCavityParams`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DerivedCouplings {
    /// Field mode angular frequency n pi C / L.
    pub omega: f64,
    /// Wave number n pi / L.
    pub k: f64,
    /// RMS vacuum field amplitude sqrt(omega / (eps0 L)).
    pub field_amplitude: f64,
    pub lambda: f64,
    /// Rate of change of the mode profile with cavity length.
    pub delta: f64,
    /// Single-atom radiation pressure coupling.
    pub g: f64,
    /// Three-body (mirror, field, atoms) coupling.
    pub eta: f64,
    /// Collective radiation pressure coupling g N.
    pub g0: f64,
}

impl DerivedCouplings {
    pub fn eta_over_g(&self) -> f64 {
        self.eta / self.g
    }
}

pub fn derive_couplings(p: &PhysicalCavityParams) -> Result<DerivedCouplings> {
    let positive = [
        ("light_speed", p.light_speed),
        ("cavity_length", p.cavity_length),
        ("atom_position", p.atom_position),
        ("dipole_moment", p.dipole_moment),
        ("vacuum_permittivity", p.vacuum_permittivity),
        ("mirror_mass", p.mirror_mass),
        ("mirror_frequency", p.mirror_frequency),
    ];
    for (name, v) in positive {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
        }
    }
    if p.mode_index == 0 || p.atom_number == 0 {
        return Err(Error::InvalidParameter(
            "mode_index and atom_number must be positive".into(),
        ));
    }
    if p.atom_position >= p.cavity_length {
        return Err(Error::InvalidParameter(format!(
            "atom_position {} must lie inside the cavity (0, {})",
            p.atom_position, p.cavity_length
        )));
    }
    let n = f64::from(p.mode_index);
    let l = p.cavity_length;
    let omega = n * PI * p.light_speed / l;
    let k = n * PI / l;
    let field_amplitude = (omega / (p.vacuum_permittivity * l)).sqrt();
    let kx = k * p.atom_position;
    let lambda = p.dipole_moment * field_amplitude * kx.sin();
    let delta = (kx.sin() + kx * kx.cos()) / l;
    let zpf = (2.0 * p.mirror_mass * p.mirror_frequency).sqrt();
    let g = omega / (l * zpf);
    let eta = p.dipole_moment * field_amplitude * delta / zpf;
    Ok(DerivedCouplings {
        omega,
        k,
        field_amplitude,
        lambda,
        delta,
        g,
        eta,
        g0: g * p.atom_number as f64,
    })
}

/// Value of k x0 in (pi/2, pi) where the three-body coupling vanishes,
/// i.e. the root of sin x + x cos x.
pub fn eta_zero_position() -> f64 {
    let f = |x: f64| x.sin() + x * x.cos();
    let df = |x: f64| 2.0 * x.cos() - x * x.sin();
    let (mut lo, mut hi) = (FRAC_PI_2, PI);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut x = 0.5 * (lo + hi);
    for _ in 0..3 {
        x -= f(x) / df(x);
    }
    x
}

/// Working parameter set of the tripartite model.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelParams {
    pub omega: f64,
    pub omega0: f64,
    pub omega_m: f64,
    pub lambda: f64,
    pub g0: f64,
    /// Twice the collective spin, i.e. the atom number N.
    pub two_j: u32,
    pub cutoff_field: usize,
    pub cutoff_mirror: usize,
    /// Holstein-Primakoff boson cutoff; `None` means min(N, 40).
    pub cutoff_atom: Option<usize>,
    pub dim_budget: usize,
}

impl Default for ModelParams {
    fn default() -> Self {
        ModelParams {
            omega: 1.0,
            omega0: 1.0,
            omega_m: 0.1,
            lambda: 0.6,
            g0: 0.2,
            two_j: 30,
            cutoff_field: 40,
            cutoff_mirror: 40,
            cutoff_atom: None,
            dim_budget: DEFAULT_DIM_BUDGET,
        }
    }
}

/// Keys accepted in a parameter file.
pub const PARAM_KEYS: [&str; 9] = [
    "omega",
    "omega0",
    "omega_m",
    "lambda",
    "g0",
    "J",
    "cutoff_field",
    "cutoff_mirror",
    "cutoff_atom",
];

impl ModelParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("omega", self.omega),
            ("omega0", self.omega0),
            ("omega_m", self.omega_m),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.lambda.is_finite() && self.lambda >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "lambda must be non-negative, got {}",
                self.lambda
            )));
        }
        if !self.g0.is_finite() {
            return Err(Error::InvalidParameter(format!("g0 must be finite, got {}", self.g0)));
        }
        if self.two_j < 1 {
            return Err(Error::InvalidParameter("J must be at least 1/2".into()));
        }
        if self.cutoff_field < 1 || self.cutoff_mirror < 1 || self.cutoff_atom == Some(0) {
            return Err(Error::InvalidParameter("cutoffs must be at least 1".into()));
        }
        Ok(())
    }

    pub fn j(&self) -> f64 {
        f64::from(self.two_j) / 2.0
    }

    /// Atom number N = 2J.
    pub fn n_atoms(&self) -> f64 {
        f64::from(self.two_j)
    }

    pub fn atom_cutoff(&self) -> usize {
        self.cutoff_atom.unwrap_or((self.two_j as usize).min(40))
    }

    pub fn lambda_c(&self) -> f64 {
        (self.omega * self.omega0).sqrt() / 2.0
    }

    /// (lambda_c / lambda)^2; infinite at lambda = 0.
    pub fn mu(&self) -> f64 {
        self.omega * self.omega0 / (4.0 * self.lambda * self.lambda)
    }

    pub fn is_superradiant(&self) -> bool {
        self.lambda >= self.lambda_c()
    }

    pub(crate) fn require_superradiant(&self, context: &'static str) -> Result<()> {
        if self.is_superradiant() {
            Ok(())
        } else {
            Err(self.phase_error(context, ">="))
        }
    }

    pub(crate) fn phase_error(&self, context: &'static str, relation: &'static str) -> Error {
        Error::PhaseMismatch {
            context,
            relation,
            lambda: self.lambda,
            lambda_c: self.lambda_c(),
            mu: self.mu(),
        }
    }

    /// Mirror drive Omega = -(g0 lambda^2 / omega^2)(1 - mu^2), defined for lambda >= lambda_c.
    pub fn drive(&self) -> Result<f64> {
        self.require_superradiant("the mirror drive")?;
        Ok(self.drive_unchecked())
    }

    pub(crate) fn drive_unchecked(&self) -> f64 {
        let mu = self.mu();
        -(self.g0 * self.lambda * self.lambda / (self.omega * self.omega)) * (1.0 - mu * mu)
    }

    /// Field displacement alpha = (lambda^2 / omega^2) N (1 - mu^2).
    pub fn alpha(&self) -> Result<f64> {
        self.require_superradiant("the field displacement")?;
        let mu = self.mu();
        Ok(self.lambda * self.lambda / (self.omega * self.omega) * self.n_atoms() * (1.0 - mu * mu))
    }

    /// Atomic displacement beta = (N / 2)(1 - mu).
    pub fn beta(&self) -> Result<f64> {
        self.require_superradiant("the atomic displacement")?;
        Ok(self.n_atoms() / 2.0 * (1.0 - self.mu()))
    }

    /// Thermodynamic-limit order parameter <a^dagger a> / J; zero in the normal phase.
    pub fn order_parameter(&self) -> f64 {
        match self.alpha() {
            Ok(alpha) => alpha / self.j(),
            Err(_) => 0.0,
        }
    }

    fn check_budget(&self, basis: &CompositeBasis) -> Result<()> {
        if basis.total_dim() > self.dim_budget {
            return Err(Error::DimensionBudget {
                dim: basis.total_dim(),
                budget: self.dim_budget,
            });
        }
        Ok(())
    }

    fn field_mode(&self) -> Result<FockMode> {
        FockMode::new("field", self.cutoff_field)
    }

    fn mirror_mode(&self) -> Result<FockMode> {
        FockMode::new("mirror", self.cutoff_mirror)
    }

    fn spin_sector(&self) -> Result<SpinSector> {
        SpinSector::new(self.two_j)
    }

    /// field x spin
    pub fn dicke_basis(&self) -> Result<Arc<CompositeBasis>> {
        let b = CompositeBasis::new(vec![self.field_mode()?.into(), self.spin_sector()?.into()])?;
        Ok(Arc::new(b))
    }

    /// field x spin x mirror
    pub fn full_basis(&self) -> Result<Arc<CompositeBasis>> {
        let b = CompositeBasis::new(vec![
            self.field_mode()?.into(),
            self.spin_sector()?.into(),
            self.mirror_mode()?.into(),
        ])?;
        Ok(Arc::new(b))
    }

    /// field x atom boson x mirror
    pub fn hp_basis(&self) -> Result<Arc<CompositeBasis>> {
        let b = CompositeBasis::new(vec![
            self.field_mode()?.into(),
            FockMode::new("atom", self.atom_cutoff())?.into(),
            self.mirror_mode()?.into(),
        ])?;
        Ok(Arc::new(b))
    }

    /// field x atom boson
    pub fn two_mode_basis(&self) -> Result<Arc<CompositeBasis>> {
        let b = CompositeBasis::new(vec![
            self.field_mode()?.into(),
            FockMode::new("atom", self.atom_cutoff())?.into(),
        ])?;
        Ok(Arc::new(b))
    }

    pub fn mirror_basis(&self) -> Result<Arc<CompositeBasis>> {
        Ok(CompositeBasis::single(self.mirror_mode()?))
    }

    /// Parse a flat key=value parameter file on top of the defaults.
    pub fn from_kv_str(text: &str) -> Result<Self> {
        let mut params = ModelParams::default();
        params.apply_kv_str(text)?;
        Ok(params)
    }

    /// Apply key=value lines; blank lines and `#` comments are ignored,
    /// unknown and repeated keys are rejected.
    pub fn apply_kv_str(&mut self, text: &str) -> Result<()> {
        let mut seen = HashSet::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(line_no, format!("expected key=value, got {line:?}")))?;
            let key = key.trim();
            if !seen.insert(key.to_string()) {
                return Err(Error::parse(line_no, format!("duplicate key {key:?}")));
            }
            self.set(key, value.trim())
                .map_err(|e| Error::parse(line_no, e.to_string()))?;
        }
        self.validate()
    }

    /// Set a single parameter by its file key.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "omega" => self.omega = parse_real(key, value)?,
            "omega0" => self.omega0 = parse_real(key, value)?,
            "omega_m" => self.omega_m = parse_real(key, value)?,
            "lambda" => self.lambda = parse_real(key, value)?,
            "g0" => self.g0 = parse_real(key, value)?,
            "J" => self.two_j = parse_half_integer(value)?,
            "cutoff_field" => self.cutoff_field = parse_cutoff(key, value)?,
            "cutoff_mirror" => self.cutoff_mirror = parse_cutoff(key, value)?,
            "cutoff_atom" => self.cutoff_atom = Some(parse_cutoff(key, value)?),
            _ => {
                return Err(Error::InvalidParameter(format!(
                    "unknown key {key:?} (expected one of {})",
                    PARAM_KEYS.join(", ")
                )))
            }
        }
        Ok(())
    }

    /// Serialize in the parameter-file format; parses back to an equal value.
    pub fn to_kv_string(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "omega={}", self.omega);
        let _ = writeln!(s, "omega0={}", self.omega0);
        let _ = writeln!(s, "omega_m={}", self.omega_m);
        let _ = writeln!(s, "lambda={}", self.lambda);
        let _ = writeln!(s, "g0={}", self.g0);
        let _ = writeln!(s, "J={}", format_half_integer(self.two_j));
        let _ = writeln!(s, "cutoff_field={}", self.cutoff_field);
        let _ = writeln!(s, "cutoff_mirror={}", self.cutoff_mirror);
        let _ = writeln!(s, "cutoff_atom={}", self.atom_cutoff());
        s
    }
}

fn parse_real(key: &str, value: &str) -> Result<f64> {
    let v: f64 = value
        .parse()
        .map_err(|_| Error::InvalidParameter(format!("{key}: {value:?} is not a number")))?;
    if !v.is_finite() {
        return Err(Error::InvalidParameter(format!("{key} must be finite")));
    }
    Ok(v)
}

fn parse_cutoff(key: &str, value: &str) -> Result<usize> {
    let v: usize = value
        .parse()
        .map_err(|_| Error::InvalidParameter(format!("{key}: {value:?} is not a cutoff")))?;
    if v < 1 {
        return Err(Error::InvalidParameter(format!("{key} must be at least 1")));
    }
    Ok(v)
}

/// Parse J given as an integer, a decimal multiple of 1/2, or `n/2`; returns 2J.
pub fn parse_half_integer(value: &str) -> Result<u32> {
    let bad = || Error::InvalidParameter(format!("J: {value:?} is not a positive half-integer"));
    let two_j = if let Some(num) = value.strip_suffix("/2") {
        num.trim().parse::<u32>().map_err(|_| bad())?
    } else {
        let v: f64 = value.parse().map_err(|_| bad())?;
        let twice = 2.0 * v;
        if !twice.is_finite() || twice.fract() != 0.0 || twice < 1.0 || twice > f64::from(u32::MAX) {
            return Err(bad());
        }
        twice as u32
    };
    if two_j < 1 {
        return Err(bad());
    }
    Ok(two_j)
}

pub fn format_half_integer(two_j: u32) -> String {
    if two_j % 2 == 0 {
        format!("{}", two_j / 2)
    } else {
        format!("{}.5", two_j / 2)
    }
}

/// Coefficients of the quadratic two-mode Hamiltonians
/// `field a^dagger a + atom b^dagger b + squeeze (b^dagger + b)^2
///  + coupling (a^dagger + a)(b^dagger + b)`, plus the linear mirror drive.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadraticCoefficients {
    pub field: f64,
    pub atom: f64,
    pub squeeze: f64,
    pub coupling: f64,
    pub drive: f64,
}

impl QuadraticCoefficients {
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        [
            self.field - other.field,
            self.atom - other.atom,
            self.squeeze - other.squeeze,
            self.coupling - other.coupling,
            self.drive - other.drive,
        ]
        .iter()
        .map(|d| d.abs())
        .fold(0.0, f64::max)
    }
}

pub fn normal_phase_coefficients(p: &ModelParams) -> QuadraticCoefficients {
    QuadraticCoefficients {
        field: p.omega,
        atom: p.omega0,
        squeeze: 0.0,
        coupling: p.lambda,
        drive: 0.0,
    }
}

pub fn superradiant_coefficients(p: &ModelParams) -> Result<QuadraticCoefficients> {
    p.require_superradiant("the super-radiant effective Hamiltonian")?;
    let mu = p.mu();
    Ok(QuadraticCoefficients {
        field: p.omega,
        atom: p.omega0 / (2.0 * mu) * (1.0 + mu),
        squeeze: p.omega0 * (1.0 - mu) * (3.0 + mu) / (8.0 * mu * (1.0 + mu)),
        coupling: p.lambda * mu * (2.0 / (1.0 + mu)).sqrt(),
        drive: p.drive_unchecked(),
    })
}

fn expect_layout(basis: &CompositeBasis, kinds: &[&str], what: &str) -> Result<()> {
    let ok = basis.arity() == kinds.len()
        && basis.factors().iter().zip(kinds).all(|(f, k)| {
            matches!((f, *k), (Space::Fock(_), "fock") | (Space::Spin(_), "spin"))
        });
    if ok {
        Ok(())
    } else {
        Err(Error::DimensionMismatch(format!(
            "{what} needs a ({}) basis, got {basis}",
            kinds.join(" x ")
        )))
    }
}

fn fock_at(basis: &CompositeBasis, slot: usize) -> FockMode {
    match &basis.factors()[slot] {
        Space::Fock(m) => m.clone(),
        Space::Spin(_) => unreachable!("layout checked"),
    }
}

fn spin_at(basis: &CompositeBasis, slot: usize, p: &ModelParams) -> Result<SpinSector> {
    match &basis.factors()[slot] {
        Space::Spin(s) if s.two_j() == p.two_j => Ok(*s),
        Space::Spin(s) => Err(Error::DimensionMismatch(format!(
            "basis spin sector 2J = {} differs from parameters 2J = {}",
            s.two_j(),
            p.two_j
        ))),
        Space::Fock(_) => unreachable!("layout checked"),
    }
}

fn sum(terms: &[Operator]) -> Operator {
    let mut acc = Operator::zeros(terms[0].basis().clone());
    for t in terms {
        acc = &acc + t;
    }
    acc.with_hermitian_hint(true)
}

/// Dicke Hamiltonian on field x spin.
pub fn build_dicke(p: &ModelParams, basis: &Arc<CompositeBasis>) -> Result<Operator> {
    p.validate()?;
    expect_layout(basis, &["fock", "spin"], "build_dicke")?;
    p.check_budget(basis)?;
    let field = fock_at(basis, 0);
    let spin = spin_operators(&spin_at(basis, 1, p)?);
    let n = embed(&fock_number(&field), 0, basis)?;
    let x = embed(&fock_quadrature(&field), 0, basis)?;
    let jz = embed(&spin.z, 1, basis)?;
    let jx2 = embed(&(&spin.plus + &spin.minus), 1, basis)?;
    let coupling = &(&x * &jx2) * (p.lambda / p.n_atoms().sqrt());
    Ok(sum(&[&n * p.omega, &jz * p.omega0, coupling]))
}

/// Tripartite Hamiltonian on field x spin x mirror; with `eta` the three-body
/// term is included.
pub fn build_full(p: &ModelParams, basis: &Arc<CompositeBasis>, eta: Option<f64>) -> Result<Operator> {
    p.validate()?;
    expect_layout(basis, &["fock", "spin", "fock"], "build_full")?;
    p.check_budget(basis)?;
    let field = fock_at(basis, 0);
    let mirror = fock_at(basis, 2);
    let spin = spin_operators(&spin_at(basis, 1, p)?);
    let n_atoms = p.n_atoms();

    let n_a = embed(&fock_number(&field), 0, basis)?;
    let x_a = embed(&fock_quadrature(&field), 0, basis)?;
    let jz = embed(&spin.z, 1, basis)?;
    let jx2 = embed(&(&spin.plus + &spin.minus), 1, basis)?;
    let n_c = embed(&fock_number(&mirror), 2, basis)?;
    let x_c = embed(&fock_quadrature(&mirror), 2, basis)?;

    let x_jx = &x_a * &jx2;
    let mut terms = vec![
        &n_a * p.omega,
        &jz * p.omega0,
        &x_jx * (p.lambda / n_atoms.sqrt()),
        &n_c * p.omega_m,
        &(&n_a * &x_c) * (-p.g0 / n_atoms),
    ];
    if let Some(eta) = eta {
        terms.push(&(&x_c * &x_jx) * (-eta / n_atoms.sqrt()));
    }
    Ok(sum(&terms))
}

/// Holstein-Primakoff form on field x atom boson x mirror, with the square
/// root factor sqrt(1 - b^dagger b / N) kept exactly.
pub fn build_hp(p: &ModelParams, basis: &Arc<CompositeBasis>) -> Result<Operator> {
    p.validate()?;
    expect_layout(basis, &["fock", "fock", "fock"], "build_hp")?;
    p.check_budget(basis)?;
    let field = fock_at(basis, 0);
    let atom = fock_at(basis, 1);
    let mirror = fock_at(basis, 2);
    let n_atoms = p.n_atoms();
    if atom.cutoff() > p.two_j as usize {
        return Err(Error::InvalidParameter(format!(
            "atom boson cutoff {} exceeds N = {}",
            atom.cutoff(),
            p.two_j
        )));
    }
    // b^dagger f(n) + f(n) b with <n+1| b^dagger f |n> = sqrt(n+1) sqrt(1 - n/N)
    let atom_basis = CompositeBasis::single(atom.clone());
    let raise = Operator::from_real_triplets(
        atom_basis,
        (0..atom.cutoff()).map(|n| {
            let n = n as f64;
            (n as usize + 1, n as usize, (n + 1.0).sqrt() * (1.0 - n / n_atoms).sqrt())
        }),
        false,
    );
    let atom_x = &raise + &raise.adjoint();

    let n_a = embed(&fock_number(&field), 0, basis)?;
    let x_a = embed(&fock_quadrature(&field), 0, basis)?;
    let n_b = embed(&fock_number(&atom), 1, basis)?;
    let xb = embed(&atom_x, 1, basis)?;
    let n_c = embed(&fock_number(&mirror), 2, basis)?;
    let x_c = embed(&fock_quadrature(&mirror), 2, basis)?;
    Ok(sum(&[
        &n_a * p.omega,
        &n_b * p.omega0,
        &n_c * p.omega_m,
        &(&n_a * &x_c) * (-p.g0 / n_atoms),
        &(&x_a * &xb) * p.lambda,
    ]))
}

fn quadratic_block(c: &QuadraticCoefficients, basis: &Arc<CompositeBasis>) -> Result<Operator> {
    let field = fock_at(basis, 0);
    let atom = fock_at(basis, 1);
    let n_a = embed(&fock_number(&field), 0, basis)?;
    let x_a = embed(&fock_quadrature(&field), 0, basis)?;
    let n_b = embed(&fock_number(&atom), 1, basis)?;
    let x_b = embed(&fock_quadrature(&atom), 1, basis)?;
    Ok(sum(&[
        &n_a * c.field,
        &n_b * c.atom,
        &(&x_b * &x_b) * c.squeeze,
        &(&x_a * &x_b) * c.coupling,
    ]))
}

fn mirror_terms(c: &QuadraticCoefficients, p: &ModelParams, basis: &Arc<CompositeBasis>, slot: usize) -> Result<Operator> {
    let mirror = fock_at(basis, slot);
    let n_c = embed(&fock_number(&mirror), slot, basis)?;
    let x_c = embed(&fock_quadrature(&mirror), slot, basis)?;
    Ok(sum(&[&n_c * p.omega_m, &x_c * c.drive]))
}

fn with_mirror(
    c: &QuadraticCoefficients,
    p: &ModelParams,
    basis: &Arc<CompositeBasis>,
    what: &str,
) -> Result<Operator> {
    p.validate()?;
    expect_layout(basis, &["fock", "fock", "fock"], what)?;
    p.check_budget(basis)?;
    let block = quadratic_block(c, basis)?;
    let mirror = mirror_terms(c, p, basis, 2)?;
    Ok(sum(&[block, mirror]))
}

/// Normal-phase two-mode block on field x atom boson.
pub fn normal_phase_dicke_block(p: &ModelParams, basis: &Arc<CompositeBasis>) -> Result<Operator> {
    p.validate()?;
    expect_layout(basis, &["fock", "fock"], "normal_phase_dicke_block")?;
    quadratic_block(&normal_phase_coefficients(p), basis)
}

/// Super-radiant two-mode block on field x atom boson.
pub fn superradiant_dicke_block(p: &ModelParams, basis: &Arc<CompositeBasis>) -> Result<Operator> {
    p.validate()?;
    expect_layout(basis, &["fock", "fock"], "superradiant_dicke_block")?;
    quadratic_block(&superradiant_coefficients(p)?, basis)
}

/// Normal-phase effective Hamiltonian; the mirror is a free oscillator.
pub fn build_normal_phase(p: &ModelParams, basis: &Arc<CompositeBasis>) -> Result<Operator> {
    with_mirror(&normal_phase_coefficients(p), p, basis, "build_normal_phase")
}

/// Super-radiant effective Hamiltonian; the mirror is a driven oscillator.
pub fn build_superradiant(p: &ModelParams, basis: &Arc<CompositeBasis>) -> Result<Operator> {
    let c = superradiant_coefficients(p)?;
    with_mirror(&c, p, basis, "build_superradiant")
}

/// Driven mirror `omega_m c^dagger c + Omega (c^dagger + c)` on a single mode.
pub fn build_mirror_driven(p: &ModelParams, basis: &Arc<CompositeBasis>) -> Result<Operator> {
    p.validate()?;
    expect_layout(basis, &["fock"], "build_mirror_driven")?;
    let c = QuadraticCoefficients {
        drive: p.drive()?,
        ..normal_phase_coefficients(p)
    };
    mirror_terms(&c, p, basis, 0)
}

/// Mirror displacement operator exp(d (c^dagger - c)) applied to the vacuum,
/// built from the truncated coherent amplitudes.
pub fn displaced_vacuum(mode: &FockMode, d: f64) -> Vec<C64> {
    // coherent amplitudes e^{-d^2/2} d^n / sqrt(n!)
    let mut amps = Vec::with_capacity(mode.dim());
    let mut a = (-d * d / 2.0).exp();
    for n in 0..mode.dim() {
        if n > 0 {
            a *= d / (n as f64).sqrt();
        }
        amps.push(C64::new(a, 0.0));
    }
    amps
}

/// Mirror annihilation operator lifted into `basis` at the last slot.
pub fn mirror_number(basis: &Arc<CompositeBasis>) -> Result<Operator> {
    let slot = basis.arity() - 1;
    match &basis.factors()[slot] {
        Space::Fock(m) => embed(&fock_number(m), slot, basis),
        Space::Spin(_) => Err(Error::DimensionMismatch(
            "last factor is not a mirror mode".into(),
        )),
    }
}

/// Field number operator lifted into `basis` at slot 0.
pub fn field_number(basis: &Arc<CompositeBasis>) -> Result<Operator> {
    match &basis.factors()[0] {
        Space::Fock(m) => embed(&fock_number(m), 0, basis),
        Space::Spin(_) => Err(Error::DimensionMismatch("slot 0 is not a field mode".into())),
    }
}

/// J_z lifted into `basis` at slot 1.
pub fn spin_z(basis: &Arc<CompositeBasis>) -> Result<Operator> {
    match basis.factors().get(1) {
        Some(Space::Spin(s)) => embed(&spin_operators(s).z, 1, basis),
        _ => Err(Error::DimensionMismatch("slot 1 is not a spin sector".into())),
    }
}

/// Field annihilation operator lifted into `basis` at slot 0.
pub fn field_annihilation(basis: &Arc<CompositeBasis>) -> Result<Operator> {
    match &basis.factors()[0] {
        Space::Fock(m) => embed(&fock_annihilation(m), 0, basis),
        Space::Spin(_) => Err(Error::DimensionMismatch("slot 0 is not a field mode".into())),
    }
}
