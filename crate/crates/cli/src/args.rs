use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use dicke_mirror::model::parse_half_integer;
use dicke_mirror::spectra::DEFAULT_SEED;
use dicke_mirror::{Error, ModelParams, Result};

/// Figure defaults: J in {1, 3, 7, 15}.
pub const DEFAULT_TWO_J_LIST: [u32; 4] = [2, 6, 14, 30];

#[derive(Parser, Debug)]
#[command(name = "dicke-mirror", version, about = "Vibrating cavity mirror coupled to the Dicke model")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Mirror occupation <c^dagger c>(t) for several J against the large-J law.
    Fig2(FigureArgs),
    /// Mirror von Neumann entropy S_c(t) for several J.
    Fig3(FigureArgs),
    /// Peak mirror occupation, order parameter and drive across a lambda grid.
    PhaseScan(ScanArgs),
    /// Classical coherent-state trajectory and forced-oscillator drive.
    Classical(ClassicalArgs),
    /// Dicke ground state at a single J.
    Ground(GroundArgs),
    /// Raw time evolution under one of the model Hamiltonians.
    Evolve(EvolveArgs),
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    #[arg(long)]
    pub omega: Option<f64>,
    #[arg(long)]
    pub omega0: Option<f64>,
    #[arg(long = "omega-m")]
    pub omega_m: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub g0: Option<f64>,
    /// Collective spin, integer or half-integer ("7.5" or "15/2").
    #[arg(long = "J")]
    pub j: Option<String>,
    /// Comma-separated J values; an empty string selects none.
    #[arg(long = "J-list")]
    pub j_list: Option<String>,
    #[arg(long = "cutoff-field")]
    pub cutoff_field: Option<usize>,
    #[arg(long = "cutoff-mirror")]
    pub cutoff_mirror: Option<usize>,
    #[arg(long = "cutoff-atom")]
    pub cutoff_atom: Option<usize>,
    /// End time; defaults to two mirror periods.
    #[arg(long)]
    pub tmax: Option<f64>,
    /// Number of output intervals on [0, tmax].
    #[arg(long, default_value_t = 400)]
    pub steps: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long = "out-dir", default_value = "out")]
    pub out_dir: PathBuf,
    /// key=value parameter file; command-line flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

impl Common {
    /// Defaults, then the config file, then explicit flags.
    pub fn resolve(&self) -> Result<ModelParams> {
        let mut p = match &self.config {
            Some(path) => dicke_mirror::io::load_params(path)?,
            None => ModelParams::default(),
        };
        let reals = [
            ("omega", self.omega),
            ("omega0", self.omega0),
            ("omega_m", self.omega_m),
            ("lambda", self.lambda),
            ("g0", self.g0),
        ];
        for (key, value) in reals {
            if let Some(v) = value {
                p.set(key, &v.to_string())?;
            }
        }
        if let Some(j) = &self.j {
            p.set("J", j)?;
        }
        let cutoffs = [
            ("cutoff_field", self.cutoff_field),
            ("cutoff_mirror", self.cutoff_mirror),
            ("cutoff_atom", self.cutoff_atom),
        ];
        for (key, value) in cutoffs {
            if let Some(v) = value {
                p.set(key, &v.to_string())?;
            }
        }
        p.validate()?;
        Ok(p)
    }

    pub fn two_j_list(&self) -> Result<Vec<u32>> {
        match &self.j_list {
            None => Ok(DEFAULT_TWO_J_LIST.to_vec()),
            Some(s) => parse_j_list(s),
        }
    }

    pub fn t_max(&self, p: &ModelParams) -> Result<f64> {
        let t = self.tmax.unwrap_or(4.0 * std::f64::consts::PI / p.omega_m);
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::InvalidParameter(format!("--tmax must be positive, got {t}")));
        }
        if self.steps == 0 {
            return Err(Error::InvalidParameter("--steps must be at least 1".into()));
        }
        Ok(t)
    }
}

/// Comma-separated half-integers, returned as 2J, in the given order.
pub fn parse_j_list(s: &str) -> Result<Vec<u32>> {
    let s = s.trim();
    if s.is_empty() {
        return Ok(Vec::new());
    }
    let list = s.split(',').map(|x| parse_half_integer(x.trim())).collect::<Result<Vec<_>>>()?;
    let mut seen = std::collections::HashSet::new();
    for &two_j in &list {
        if !seen.insert(two_j) {
            return Err(Error::InvalidParameter(format!("J = {} listed twice", two_j as f64 / 2.0)));
        }
    }
    Ok(list)
}

#[derive(Args, Debug, Clone)]
pub struct Solver {
    /// Symmetry sector of the Dicke ground state.
    #[arg(long, default_value = "even")]
    pub parity: String,
    /// Largest cutoff reached when escalating after a failed cutoff check;
    /// 0 disables escalation.
    #[arg(long = "max-cutoff", default_value_t = 0)]
    pub max_cutoff: usize,
}

#[derive(Args, Debug)]
pub struct FigureArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub solver: Solver,
    /// Skip writing the plot script.
    #[arg(long = "no-plot")]
    pub no_plot: bool,
}

#[derive(Args, Debug)]
pub struct ScanArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub solver: Solver,
    /// Comma-separated values or start:stop:count.
    #[arg(long = "lambda-grid", default_value = "0.3:0.8:11")]
    pub lambda_grid: String,
    /// Skip the finite-J time evolution and report only the ground state and limit columns.
    #[arg(long = "no-dynamics")]
    pub no_dynamics: bool,
}

#[derive(Args, Debug)]
pub struct ClassicalArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, default_value_t = 0.0)]
    pub kappa: f64,
    /// RK4 step; defaults to a ten-thousandth of a mirror period.
    #[arg(long)]
    pub dt: Option<f64>,
    /// "fixed" (+q2 fixed point, mirror at rest at the origin), "origin",
    /// or six comma-separated numbers q1,p1,q2,p2,q3,p3.
    #[arg(long, default_value = "fixed")]
    pub initial: String,
}

#[derive(Args, Debug)]
pub struct GroundArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub solver: Solver,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum EvolveModel {
    /// Field x spin x mirror at finite J.
    Full,
    /// Quadratic normal-phase effective model.
    Normal,
    /// Quadratic super-radiant effective model.
    Superradiant,
    /// Mirror alone under the classical drive.
    MirrorDriven,
}

#[derive(Args, Debug)]
pub struct EvolveArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub solver: Solver,
    #[arg(long, value_enum, default_value = "full")]
    pub model: EvolveModel,
}

/// start:stop:count (inclusive ends) or a comma-separated list.
pub fn parse_grid(s: &str) -> Result<Vec<f64>> {
    let bad = |m: String| Error::InvalidParameter(format!("lambda grid {s:?}: {m}"));
    let parts: Vec<&str> = s.split(':').map(str::trim).collect();
    let values: Vec<f64> = match parts.as_slice() {
        [start, stop, count] => {
            let start: f64 = start.parse().map_err(|e| bad(format!("{e}")))?;
            let stop: f64 = stop.parse().map_err(|e| bad(format!("{e}")))?;
            let count: usize = count.parse().map_err(|e| bad(format!("{e}")))?;
            match count {
                0 => return Err(bad("count must be positive".into())),
                1 => vec![start],
                n => (0..n).map(|k| start + (stop - start) * k as f64 / (n - 1) as f64).collect(),
            }
        }
        [list] => list
            .split(',')
            .map(|x| x.trim().parse::<f64>().map_err(|e| bad(format!("{x:?}: {e}"))))
            .collect::<Result<_>>()?,
        _ => return Err(bad("expected start:stop:count or a comma list".into())),
    };
    if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
        return Err(bad("values must be finite and non-negative".into()));
    }
    Ok(values)
}
