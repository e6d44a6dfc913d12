use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use dicke_mirror::dynamics::{
    self, limit_series, occupation_trajectory, simulate_effective, simulate_finite_j, simulate_mirror_driven,
    uniform_grid, EffectiveModel, FiniteJRun, ParitySector, TimeSeries, TrajectoryOptions,
};
use dicke_mirror::io::{self, Manifest};
use dicke_mirror::model::format_half_integer;
use dicke_mirror::semiclassical::{self, ClassicalState};
use dicke_mirror::spectra::LanczosConfig;
use dicke_mirror::{Error, ModelParams, Result};

use crate::args::{ClassicalArgs, Common, EvolveArgs, EvolveModel, FigureArgs, GroundArgs, ScanArgs, Solver};
use crate::plot;

/// Output directory plus the manifest being assembled.
pub struct Run {
    pub dir: PathBuf,
    pub manifest: Manifest,
    files: Vec<String>,
}

impl Run {
    pub fn new(dir: PathBuf) -> Self {
        Run {
            dir,
            manifest: Manifest::new(),
            files: Vec::new(),
        }
    }

    fn create(&mut self, name: &str) -> Result<BufWriter<File>> {
        let f = File::create(self.dir.join(name))?;
        self.files.push(name.to_string());
        Ok(BufWriter::new(f))
    }

    fn series(&mut self, name: &str, ts: &TimeSeries) -> Result<()> {
        let w = self.create(name)?;
        io::write_timeseries(w, ts)
    }

    fn table(&mut self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
        let w = self.create(name)?;
        io::write_table(w, header, rows)
    }

    fn text(&mut self, name: &str, body: &str) -> Result<()> {
        std::fs::write(self.dir.join(name), body)?;
        self.files.push(name.to_string());
        Ok(())
    }

    pub fn files(&self) -> &[String] {
        &self.files
    }

    pub fn manifest_path(&self) -> PathBuf {
        self.dir.join("manifest.txt")
    }
}

pub fn ensure_dir(path: &Path) -> Result<()> {
    std::fs::create_dir_all(path)?;
    Ok(())
}

/// "J15", "J7_2"
fn j_tag(two_j: u32) -> String {
    if two_j % 2 == 0 {
        format!("J{}", two_j / 2)
    } else {
        format!("J{two_j}_2")
    }
}

fn record_params(run: &mut Run, p: &ModelParams) {
    run.manifest.set_params(p);
    run.manifest.set("derived.lambda_c", p.lambda_c());
    run.manifest.set("derived.mu", p.mu());
    run.manifest.set("derived.drive", p.drive().map_or(f64::NAN, |d| d));
    run.manifest.set("derived.alpha", p.alpha().unwrap_or(0.0));
    run.manifest.set("derived.beta", p.beta().unwrap_or(0.0));
    run.manifest.set("derived.order_parameter_limit", p.order_parameter());
    run.manifest.set(
        "note.g0",
        "g0 is not fixed by the source figures; 0.2 is this tool's default",
    );
}

fn trajectory_options(common: &Common, solver: &Solver) -> Result<TrajectoryOptions> {
    let parity: ParitySector = solver.parity.parse()?;
    Ok(TrajectoryOptions {
        lanczos: LanczosConfig {
            seed: common.seed,
            ..LanczosConfig::default()
        },
        parity,
        max_cutoff: (solver.max_cutoff > 0).then_some(solver.max_cutoff),
        ..TrajectoryOptions::default()
    })
}

fn record_solver(run: &mut Run, common: &Common, opts: &TrajectoryOptions) {
    run.manifest.set("solver.parity_sector", opts.parity.as_str());
    run.manifest.set("solver.seed", common.seed);
    run.manifest.set("solver.lanczos_tol", opts.lanczos.tol);
    run.manifest.set("solver.krylov_dim", opts.evolve.krylov_dim);
    run.manifest.set("solver.local_tol", opts.evolve.local_tol);
    run.manifest.set("solver.cutoff_tol", opts.cutoff_tol);
    run.manifest.set("solver.energy_tol", opts.energy_tol);
    run.manifest.set(
        "solver.max_cutoff",
        opts.max_cutoff.map_or("off".to_string(), |c| c.to_string()),
    );
}

fn record_cutoffs(run: &mut Run, r: &FiniteJRun) {
    let tag = j_tag(r.two_j);
    run.manifest.set(&format!("cutoff.{tag}.field"), r.cutoff_field);
    run.manifest.set(&format!("cutoff.{tag}.mirror"), r.cutoff_mirror);
    run.manifest.set(&format!("cutoff.{tag}.field_top"), r.cutoff.field_top);
    run.manifest.set(&format!("cutoff.{tag}.mirror_top"), r.cutoff.mirror_top);
    run.manifest.set(&format!("run.{tag}.energy_drift"), r.energy_drift);
    run.manifest.set(&format!("run.{tag}.ground_degenerate"), r.ground_degenerate);
}

fn require_above_critical(p: &ModelParams, context: &'static str) -> Result<()> {
    if p.lambda > p.lambda_c() {
        Ok(())
    } else {
        Err(Error::PhaseMismatch {
            context,
            relation: ">",
            lambda: p.lambda,
            lambda_c: p.lambda_c(),
            mu: p.mu(),
        })
    }
}

fn strictly_decreasing(values: &[f64]) -> bool {
    values.windows(2).all(|w| w[1] < w[0])
}

#[derive(Clone, Copy, PartialEq, Eq)]
pub enum Figure {
    Occupation,
    Entropy,
}

pub fn figure(run: &mut Run, args: &FigureArgs, which: Figure) -> Result<()> {
    let context = match which {
        Figure::Occupation => "fig2",
        Figure::Entropy => "fig3",
    };
    let p = args.common.resolve()?;
    record_params(run, &p);
    let two_js = args.common.two_j_list()?;
    run.manifest.set(
        "J_list",
        two_js.iter().map(|&t| format_half_integer(t)).collect::<Vec<_>>().join(","),
    );
    if args.common.j_list.is_none() {
        run.manifest.set("note.J_list", "the source figures do not list J; 1,3,7,15 is this tool's default");
    }
    require_above_critical(&p, context)?;
    let t_max = args.common.t_max(&p)?;
    let times = uniform_grid(t_max, args.common.steps);
    let opts = trajectory_options(&args.common, &args.solver)?;
    record_solver(run, &args.common, &opts);

    let set = occupation_trajectory(&p, &two_js, &times, &opts)?;
    for r in &set.runs {
        record_cutoffs(run, r);
    }
    let mut plotted = Vec::new();
    match which {
        Figure::Occupation => {
            let period = (2.0 * std::f64::consts::PI / p.omega_m).min(t_max);
            let mut rows = Vec::new();
            let mut distances = Vec::new();
            for r in &set.runs {
                let name = format!("occupation_{}.csv", j_tag(r.two_j));
                run.series(&name, &r.occupation)?;
                plotted.push(name);
                let d = r.occupation.linf_distance(&set.limit, period)?;
                distances.push(d);
                rows.push(vec![
                    format_half_integer(r.two_j),
                    d.to_string(),
                    r.occupation.max().to_string(),
                ]);
            }
            run.series("occupation_TL.csv", &set.limit)?;
            plotted.push("occupation_TL.csv".into());
            run.table("convergence.csv", &["J", "linf_to_limit", "max_occupation"], &rows)?;
            run.manifest.set("convergence.window", period);
            run.manifest.set("convergence.strictly_decreasing", strictly_decreasing(&distances));
            if !args.no_plot {
                run.text("plot_fig2.py", &plot::series_script(&plotted, "<c^dagger c>", "fig2.png"))?;
            }
        }
        Figure::Entropy => {
            let mut rows = Vec::new();
            let mut peaks = Vec::new();
            for r in &set.runs {
                let name = format!("entropy_{}.csv", j_tag(r.two_j));
                run.series(&name, &r.entropy)?;
                plotted.push(name);
                peaks.push(r.entropy.max());
                rows.push(vec![
                    format_half_integer(r.two_j),
                    r.entropy.values[0].to_string(),
                    r.entropy.max().to_string(),
                ]);
            }
            run.table("entropy_summary.csv", &["J", "initial_entropy", "max_entropy"], &rows)?;
            run.manifest.set("entropy.max_strictly_decreasing", strictly_decreasing(&peaks));
            if !args.no_plot {
                run.text("plot_fig3.py", &plot::series_script(&plotted, "S_c", "fig3.png"))?;
            }
        }
    }
    Ok(())
}

pub fn phase_scan(run: &mut Run, args: &ScanArgs) -> Result<()> {
    let base = args.common.resolve()?;
    record_params(run, &base);
    let grid = crate::args::parse_grid(&args.lambda_grid)?;
    run.manifest.set("scan.lambda_grid", &args.lambda_grid);
    let opts = trajectory_options(&args.common, &args.solver)?;
    record_solver(run, &args.common, &opts);
    let period = 2.0 * std::f64::consts::PI / base.omega_m;
    let times = uniform_grid(period, args.common.steps);
    let mut rows = Vec::with_capacity(grid.len());
    for &lambda in &grid {
        let p = ModelParams { lambda, ..base.clone() };
        p.validate()?;
        let (peak, order) = if args.no_dynamics {
            let g = dynamics::dicke_ground_state(&p, &opts)?;
            let n_a = dicke_mirror::model::field_number(&p.dicke_basis()?)?;
            (f64::NAN, dynamics::expectation(&n_a, &g.state)? / p.j())
        } else {
            let r = simulate_finite_j(&p, &times, &opts)?;
            (r.occupation.max(), r.order_parameter)
        };
        let (limit_peak, drive) = match p.drive() {
            Ok(d) => (4.0 * d * d / (p.omega_m * p.omega_m), d),
            Err(_) => (0.0, f64::NAN),
        };
        rows.push(vec![
            lambda.to_string(),
            peak.to_string(),
            limit_peak.to_string(),
            order.to_string(),
            p.order_parameter().to_string(),
            drive.to_string(),
        ]);
    }
    run.table(
        "phase_scan.csv",
        &["lambda", "peak_occupation", "peak_occupation_limit", "order_parameter", "order_parameter_limit", "drive"],
        &rows,
    )
}

fn initial_state(spec: &str, p: &ModelParams) -> Result<ClassicalState> {
    match spec.trim() {
        "fixed" => Ok(ClassicalState {
            q3: 0.0,
            p3: 0.0,
            ..semiclassical::representative_fixed_point(p)
        }),
        "origin" => Ok(ClassicalState::ORIGIN),
        other => other.parse(),
    }
}

pub fn classical(run: &mut Run, args: &ClassicalArgs) -> Result<()> {
    let p = args.common.resolve()?;
    record_params(run, &p);
    let period = 2.0 * std::f64::consts::PI / p.omega_m;
    let t_end = args.common.t_max(&p)?;
    let dt = args.dt.unwrap_or(period / 1e4);
    let s0 = initial_state(&args.initial, &p)?;
    run.manifest.set("classical.initial", s0.to_string());
    run.manifest.set("classical.dt", dt);
    run.manifest.set("classical.t_end", t_end);

    let drive = semiclassical::forced_oscillator_drive(&p, args.kappa)?;
    run.manifest.set("classical.kappa", args.kappa);
    run.manifest.set("classical.lambda_c_kappa", drive.lambda_c);
    run.manifest.set("classical.normal_phase", drive.normal_phase);
    run.manifest.set("classical.drive", drive.force);
    if let Ok(omega) = p.drive() {
        run.manifest.set("classical.sqrt2_omega_m_abs_drive", std::f64::consts::SQRT_2 * p.omega_m * omega.abs());
    }

    let mut rows = Vec::new();
    for (k, fp) in semiclassical::fixed_points(&p).iter().enumerate() {
        let mut row = vec![k.to_string()];
        row.extend(fp.to_array().iter().map(f64::to_string));
        row.push(semiclassical::classical_energy(fp, &p)?.to_string());
        rows.push(row);
    }
    run.table("fixed_points.csv", &["branch", "q1", "p1", "q2", "p2", "q3", "p3", "energy"], &rows)?;

    let traj = semiclassical::integrate(s0, &p, t_end, dt)?;
    let w = run.create("trajectory.csv")?;
    io::write_trajectory(w, &traj)?;
    run.manifest.set("classical.relative_energy_drift", traj.relative_energy_drift());
    if args.kappa == 0.0 && !drive.normal_phase {
        let amplitude = 2.0 * drive.force / (p.omega_m * p.omega_m);
        let worst = traj
            .times
            .iter()
            .zip(&traj.states)
            .map(|(&t, s)| (s.q3 - semiclassical::forced_response(drive.force, p.omega_m, t)).abs())
            .fold(0.0, f64::max);
        run.manifest.set("classical.forced_law_max_relative_error", worst / amplitude);
    }
    if let Some(t) = traj.truncated_at {
        let last = traj.states.last().copied().unwrap_or_default();
        return Err(Error::DomainViolation {
            time: t,
            h1: last.spin_action(),
            two_j: p.n_atoms(),
        });
    }
    Ok(())
}

pub fn ground(run: &mut Run, args: &GroundArgs) -> Result<()> {
    let p = args.common.resolve()?;
    record_params(run, &p);
    let opts = trajectory_options(&args.common, &args.solver)?;
    record_solver(run, &args.common, &opts);
    let g = dynamics::dicke_ground_state(&p, &opts)?;
    let n_a = dicke_mirror::model::field_number(&p.dicke_basis()?)?;
    let order = dynamics::expectation(&n_a, &g.state)? / p.j();
    let field_top = g.state.top_level_populations().iter().filter(|(s, _)| *s == 0).map(|x| x.1).fold(0.0, f64::max);
    let row = vec![
        format_half_integer(p.two_j),
        g.energy.to_string(),
        order.to_string(),
        p.order_parameter().to_string(),
        g.gap.to_string(),
        g.degenerate.to_string(),
        g.residual.to_string(),
        g.iterations.to_string(),
        field_top.to_string(),
    ];
    println!(
        "J = {}: E0 = {}, <a^dagger a>/J = {} (limit {}), gap = {}",
        row[0], row[1], row[2], row[3], row[4]
    );
    run.table(
        "ground.csv",
        &[
            "J",
            "energy",
            "order_parameter",
            "order_parameter_limit",
            "gap",
            "degenerate",
            "residual",
            "iterations",
            "field_top",
        ],
        &[row],
    )?;
    if field_top > opts.cutoff_tol {
        return Err(Error::CutoffValidation(format!(
            "field top-level population {field_top:e} at cutoff {}",
            p.cutoff_field
        )));
    }
    Ok(())
}

pub fn evolve(run: &mut Run, args: &EvolveArgs) -> Result<()> {
    let p = args.common.resolve()?;
    record_params(run, &p);
    let opts = trajectory_options(&args.common, &args.solver)?;
    record_solver(run, &args.common, &opts);
    let times = uniform_grid(args.common.t_max(&p)?, args.common.steps);
    run.manifest.set("evolve.model", format!("{:?}", args.model));
    let (occupation, entropy) = match args.model {
        EvolveModel::Full => {
            let r = simulate_finite_j(&p, &times, &opts)?;
            record_cutoffs(run, &r);
            (r.occupation, r.entropy)
        }
        EvolveModel::Normal | EvolveModel::Superradiant => {
            let kind = if args.model == EvolveModel::Normal {
                EffectiveModel::Normal
            } else {
                EffectiveModel::Superradiant
            };
            let r = simulate_effective(&p, kind, &times, &opts)?;
            (r.occupation, r.entropy)
        }
        EvolveModel::MirrorDriven => {
            let r = simulate_mirror_driven(&p, &times, &opts.evolve)?;
            (r.occupation, r.entropy)
        }
    };
    run.series("occupation.csv", &occupation)?;
    run.series("entropy.csv", &entropy)?;
    if p.lambda > p.lambda_c() {
        run.series("occupation_TL.csv", &limit_series(&p, &times)?)?;
    }
    Ok(())
}
