//! Coherent-state classical analogue of the tripartite model.
//!
//! Phase-space coordinates are (q1, p1) for the collective spin, (q2, p2) for
//! the field and (q3, p3) for the mirror. The spin pair lives on the disc
//! (q1^2 + p1^2)/2 < 2J.

use std::fmt;
use std::ops::{Add, Mul};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::hilbert::C64;
use crate::model::ModelParams;

/// Minimum distance kept between (q1^2 + p1^2)/2 and 2J.
pub const DOMAIN_MARGIN: f64 = 1e-9;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ClassicalState {
    pub q1: f64,
    pub p1: f64,
    pub q2: f64,
    pub p2: f64,
    pub q3: f64,
    pub p3: f64,
}

impl ClassicalState {
    pub const ORIGIN: ClassicalState = ClassicalState {
        q1: 0.0,
        p1: 0.0,
        q2: 0.0,
        p2: 0.0,
        q3: 0.0,
        p3: 0.0,
    };

    pub fn from_array(a: [f64; 6]) -> Self {
        ClassicalState {
            q1: a[0],
            p1: a[1],
            q2: a[2],
            p2: a[3],
            q3: a[4],
            p3: a[5],
        }
    }

    pub fn to_array(self) -> [f64; 6] {
        [self.q1, self.p1, self.q2, self.p2, self.q3, self.p3]
    }

    /// (q1^2 + p1^2) / 2
    pub fn spin_action(&self) -> f64 {
        0.5 * (self.q1 * self.q1 + self.p1 * self.p1)
    }

    pub fn norm(&self) -> f64 {
        self.to_array().iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn distance(&self, other: &ClassicalState) -> f64 {
        (*self + *other * -1.0).norm()
    }

    /// Mirror image under (q1, q2) -> (-q1, -q2).
    pub fn mirrored(&self) -> Self {
        ClassicalState {
            q1: -self.q1,
            q2: -self.q2,
            ..*self
        }
    }
}

/// Comma-separated q1,p1,q2,p2,q3,p3.
impl fmt::Display for ClassicalState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let a = self.to_array();
        write!(f, "{},{},{},{},{},{}", a[0], a[1], a[2], a[3], a[4], a[5])
    }
}

impl FromStr for ClassicalState {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() != 6 {
            return Err(Error::parse(1, format!("expected 6 comma-separated numbers, found {}", parts.len())));
        }
        let mut a = [0.0; 6];
        for (slot, raw) in a.iter_mut().zip(&parts) {
            let v: f64 = raw.parse().map_err(|e| Error::parse(1, format!("{raw:?}: {e}")))?;
            if !v.is_finite() {
                return Err(Error::parse(1, format!("{raw:?} is not finite")));
            }
            *slot = v;
        }
        Ok(ClassicalState::from_array(a))
    }
}

impl Add for ClassicalState {
    type Output = ClassicalState;

    fn add(self, o: ClassicalState) -> ClassicalState {
        let (a, b) = (self.to_array(), o.to_array());
        ClassicalState::from_array(std::array::from_fn(|i| a[i] + b[i]))
    }
}

impl Mul<f64> for ClassicalState {
    type Output = ClassicalState;

    fn mul(self, s: f64) -> ClassicalState {
        ClassicalState::from_array(self.to_array().map(|x| x * s))
    }
}

/// sqrt(2J - H1), or a domain error.
fn spin_root(s: &ClassicalState, two_j: f64, time: f64) -> Result<f64> {
    let h1 = s.spin_action();
    let arg = two_j - h1;
    if !(arg > DOMAIN_MARGIN) {
        return Err(Error::DomainViolation { time, h1, two_j });
    }
    Ok(arg.sqrt())
}

/// Classical energy <z_a, w, z_c| H |z_a, w, z_c>.
pub fn classical_energy(s: &ClassicalState, p: &ModelParams) -> Result<f64> {
    let two_j = p.n_atoms();
    let j = p.j();
    let root = spin_root(s, two_j, 0.0)?;
    let field = s.q2 * s.q2 + s.p2 * s.p2;
    Ok(0.5 * p.omega0 * (s.q1 * s.q1 + s.p1 * s.p1) - j * p.omega
        + 0.5 * p.omega * field
        + 0.5 * p.omega_m * (s.q3 * s.q3 + s.p3 * s.p3)
        + 2.0 * p.lambda / two_j.sqrt() * root * s.q1 * s.q2
        - p.g0 * std::f64::consts::SQRT_2 / (4.0 * j) * field * s.q3)
}

/// Time derivative of every coordinate under the classical equations of motion.
pub fn eom_rhs(s: &ClassicalState, p: &ModelParams) -> Result<ClassicalState> {
    eom_at(s, p, 0.0)
}

fn eom_at(s: &ClassicalState, p: &ModelParams, time: f64) -> Result<ClassicalState> {
    let two_j = p.n_atoms();
    let j = p.j();
    let root = spin_root(s, two_j, time)?;
    let lam = p.lambda / two_j.sqrt();
    let rp = p.g0 * std::f64::consts::SQRT_2 / (2.0 * j);
    Ok(ClassicalState {
        q1: p.omega0 * s.p1 - lam * s.p1 * s.q1 * s.q2 / root,
        p1: -p.omega0 * s.q1 - 2.0 * lam * root * s.q2 + lam * s.q1 * s.q1 * s.q2 / root,
        q2: p.omega * s.p2 - rp * s.p2 * s.q3,
        p2: -p.omega * s.q2 - 2.0 * lam * root * s.q1 + rp * s.q2 * s.q3,
        q3: p.omega_m * s.p3,
        p3: -p.omega_m * s.q3 + 0.5 * rp * (s.q2 * s.q2 + s.p2 * s.p2),
    })
}

/// Static mirror displacement sqrt(2) g0 lambda^2 (1 - mu^2) / (omega^2 omega_m).
pub fn mirror_equilibrium(p: &ModelParams) -> f64 {
    if !p.is_superradiant() {
        return 0.0;
    }
    let mu = p.mu();
    std::f64::consts::SQRT_2 * p.g0 * p.lambda * p.lambda * (1.0 - mu * mu)
        / (p.omega * p.omega * p.omega_m)
}

/// Lowest-energy fixed points at first order in g0.
///
/// Below lambda_c only the origin; from lambda_c on, the two pitchfork
/// branches, the +q2 branch first.
pub fn fixed_points(p: &ModelParams) -> Vec<ClassicalState> {
    if !p.is_superradiant() {
        return vec![ClassicalState::ORIGIN];
    }
    let j = p.j();
    let mu = p.mu();
    let q1 = (2.0 * j * (1.0 - mu)).sqrt();
    let q2 = (4.0 * j * p.lambda * p.lambda / (p.omega * p.omega) * (1.0 - mu * mu)).sqrt();
    let plus = ClassicalState {
        q1: -q1,
        q2,
        q3: mirror_equilibrium(p),
        ..ClassicalState::ORIGIN
    };
    vec![plus, plus.mirrored()]
}

/// The +q2 branch above lambda_c, the origin below.
pub fn representative_fixed_point(p: &ModelParams) -> ClassicalState {
    fixed_points(p)[0]
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<ClassicalState>,
    pub energies: Vec<f64>,
    /// Time at which the phase-space domain was left, if it was.
    pub truncated_at: Option<f64>,
}

impl Trajectory {
    /// max_t |E(t) - E(0)| / |E(0)|
    pub fn relative_energy_drift(&self) -> f64 {
        let e0 = self.energies[0];
        let scale = if e0 != 0.0 { e0.abs() } else { 1.0 };
        self.energies
            .iter()
            .map(|e| (e - e0).abs() / scale)
            .fold(0.0, f64::max)
    }
}

fn rk4_step(s: &ClassicalState, p: &ModelParams, t: f64, h: f64) -> Result<ClassicalState> {
    let k1 = eom_at(s, p, t)?;
    let k2 = eom_at(&(*s + k1 * (0.5 * h)), p, t)?;
    let k3 = eom_at(&(*s + k2 * (0.5 * h)), p, t)?;
    let k4 = eom_at(&(*s + k3 * h), p, t)?;
    Ok(*s + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0))
}

/// Classical RK4 with fixed step `dt` (the last step is shortened to land on `t_end`).
///
/// Leaving the phase-space domain mid-run truncates the trajectory and sets
/// [`Trajectory::truncated_at`]; an invalid initial state is an error.
pub fn integrate(s0: ClassicalState, p: &ModelParams, t_end: f64, dt: f64) -> Result<Trajectory> {
    p.validate()?;
    if !(dt > 0.0 && dt.is_finite() && t_end >= 0.0 && t_end.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "need dt > 0 and t_end >= 0, got dt = {dt}, t_end = {t_end}"
        )));
    }
    let e0 = classical_energy(&s0, p)?;
    let steps = ((t_end / dt) - 1e-9).ceil().max(0.0) as usize;
    let mut traj = Trajectory {
        times: Vec::with_capacity(steps + 1),
        states: Vec::with_capacity(steps + 1),
        energies: Vec::with_capacity(steps + 1),
        truncated_at: None,
    };
    traj.times.push(0.0);
    traj.states.push(s0);
    traj.energies.push(e0);
    let mut s = s0;
    for k in 0..steps {
        let t = k as f64 * dt;
        let h = dt.min(t_end - t);
        let next = rk4_step(&s, p, t, h).and_then(|n| classical_energy(&n, p).map(|e| (n, e)));
        match next {
            Ok((n, e)) => {
                s = n;
                traj.times.push(if k + 1 == steps { t_end } else { t + h });
                traj.states.push(s);
                traj.energies.push(e);
            }
            Err(Error::DomainViolation { .. }) => {
                traj.truncated_at = Some(t);
                break;
            }
            Err(e) => return Err(e),
        }
    }
    Ok(traj)
}

/// Integrate, halving `dt` until the relative energy drift per mirror period
/// stays below `drift_per_period`.
pub fn integrate_checked(
    s0: ClassicalState,
    p: &ModelParams,
    t_end: f64,
    mut dt: f64,
    drift_per_period: f64,
    max_halvings: usize,
) -> Result<Trajectory> {
    let periods = (t_end * p.omega_m / (2.0 * std::f64::consts::PI)).max(1.0);
    let bound = drift_per_period * periods;
    let mut drift = f64::INFINITY;
    for _ in 0..=max_halvings {
        let traj = integrate(s0, p, t_end, dt)?;
        drift = traj.relative_energy_drift();
        if drift <= bound {
            return Ok(traj);
        }
        dt *= 0.5;
    }
    Err(Error::EnergyDrift { drift, bound })
}

/// lambda_c shifted by cavity loss kappa: (1/2) sqrt(omega omega0 (1 + kappa^2 / omega^2)).
pub fn dissipative_lambda_c(p: &ModelParams, kappa: f64) -> f64 {
    0.5 * (p.omega * p.omega0 * (1.0 + kappa * kappa / (p.omega * p.omega))).sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Drive {
    /// Right-hand side F of q3'' + omega_m^2 q3 = F.
    pub force: f64,
    pub lambda_c: f64,
    /// Set when lambda lies at or below the (loss-shifted) critical point.
    pub normal_phase: bool,
}

/// Constant force on the mirror coordinate in the macroscopic limit, with the
/// small-loss correction factor (1 - kappa^2 / omega^2).
pub fn forced_oscillator_drive(p: &ModelParams, kappa: f64) -> Result<Drive> {
    p.validate()?;
    if !(kappa >= 0.0 && kappa.is_finite()) {
        return Err(Error::InvalidParameter(format!("kappa must be non-negative, got {kappa}")));
    }
    let lambda_c = dissipative_lambda_c(p, kappa);
    if p.lambda <= lambda_c {
        return Ok(Drive {
            force: 0.0,
            lambda_c,
            normal_phase: true,
        });
    }
    let mu = p.mu();
    let force = std::f64::consts::SQRT_2 * p.omega_m * p.g0 * p.lambda * p.lambda
        / (p.omega * p.omega)
        * (1.0 - mu * mu)
        * (1.0 - kappa * kappa / (p.omega * p.omega));
    Ok(Drive {
        force,
        lambda_c,
        normal_phase: false,
    })
}

/// Mirror coordinate of the forced oscillator started at rest at the origin.
pub fn forced_response(force: f64, omega_m: f64, t: f64) -> f64 {
    force / (omega_m * omega_m) * (1.0 - (omega_m * t).cos())
}

/// Phase-space point of the product coherent state |z_a> |w> |z_c>.
pub fn coherent_coordinates(z_a: C64, w: C64, z_c: C64, j: f64) -> ClassicalState {
    let pref = (j / (1.0 + w.norm_sqr())).sqrt();
    let s2 = std::f64::consts::SQRT_2;
    ClassicalState {
        q1: pref * 2.0 * w.re,
        p1: pref * 2.0 * w.im,
        q2: s2 * z_a.re,
        p2: s2 * z_a.im,
        q3: s2 * z_c.re,
        p3: s2 * z_c.im,
    }
}

/// Norm of the full right-hand side at the representative fixed point,
/// which is exact only as J grows.
pub fn fixed_point_residual(p: &ModelParams) -> Result<f64> {
    Ok(eom_rhs(&representative_fixed_point(p), p)?.norm())
}
