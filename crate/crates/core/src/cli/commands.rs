use std::f64::consts::PI;
use std::path::PathBuf;

use rayon::prelude::*;
use serde::Serialize;

use super::output::{num, Artifacts, Manifest, Table};
use super::*;
use super::{progress, quiet};
use crate::analysis::{
    compare_state, count_bound_states, left_right_superpositions, ring_analytic_state, ring_mode,
    tunneling_frequency, well_masses,
};
use crate::grid::{abs_pow, Grid};
use crate::mittag_leffler::{mittag_leffler, MlParams};
use crate::potentials::PotentialSpec;
use crate::solver::{
    real_time_propagate_observed, solve_spectrum, EigenSolution, Parity, Refine, SolveConfig,
};
use crate::splitting::SplitScheme;

const DEFAULT_OUTPUT_DIR: &str = "fracstep-out";

pub(super) fn execute(cli: Cli) -> Result<()> {
    let path = cli.config.as_deref();
    match cli.command {
        Command::Solve {
            opts,
            grid,
            solver,
            output,
        } => {
            let file = ConfigFile::load(
                path,
                &[
                    SolveOpts::KEYS,
                    GridOpts::KEYS,
                    SolverOpts::KEYS,
                    OutputOpts::KEYS,
                ],
            )?;
            solve(
                opts.merge(file.group()?),
                grid.merge(file.group()?),
                solver.merge(file.group()?),
                output.merge(file.group()?),
            )
        }
        Command::RingBenchmark {
            opts,
            grid,
            solver,
            output,
        } => {
            let file = ConfigFile::load(
                path,
                &[
                    RingOpts::KEYS,
                    GridOpts::KEYS,
                    SolverOpts::KEYS,
                    OutputOpts::KEYS,
                ],
            )?;
            ring_benchmark(
                opts.merge(file.group()?),
                grid.merge(file.group()?),
                solver.merge(file.group()?),
                output.merge(file.group()?),
            )
        }
        Command::SpectrumSweep {
            opts,
            grid,
            solver,
            output,
        } => {
            let file = ConfigFile::load(
                path,
                &[
                    SweepOpts::KEYS,
                    GridOpts::KEYS,
                    SolverOpts::KEYS,
                    OutputOpts::KEYS,
                ],
            )?;
            spectrum_sweep(
                opts.merge(file.group()?),
                grid.merge(file.group()?),
                solver.merge(file.group()?),
                output.merge(file.group()?),
            )
        }
        Command::WellCount { opts, grid, output } => {
            let file = ConfigFile::load(path, &[WellOpts::KEYS, GridOpts::KEYS, OutputOpts::KEYS])?;
            well_count(
                opts.merge(file.group()?),
                grid.merge(file.group()?),
                output.merge(file.group()?),
            )
        }
        Command::Tunneling {
            opts,
            grid,
            solver,
            output,
        } => {
            let file = ConfigFile::load(
                path,
                &[
                    TunnelOpts::KEYS,
                    GridOpts::KEYS,
                    SolverOpts::KEYS,
                    OutputOpts::KEYS,
                ],
            )?;
            tunneling(
                opts.merge(file.group()?),
                grid.merge(file.group()?),
                solver.merge(file.group()?),
                output.merge(file.group()?),
            )
        }
        Command::MlEval { opts, output } => {
            let file = ConfigFile::load(path, &[MlOpts::KEYS, OutputOpts::KEYS])?;
            ml_eval(opts.merge(file.group()?), output.merge(file.group()?))
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
struct GridSetting {
    n_points: usize,
    x_min: f64,
    x_max: f64,
    dx: f64,
}

impl From<&Grid> for GridSetting {
    fn from(g: &Grid) -> Self {
        Self {
            n_points: g.len(),
            x_min: g.x_min(),
            x_max: g.x_max(),
            dx: g.dx(),
        }
    }
}

fn resolve_grid(opts: &GridOpts, default: Grid) -> Result<Grid> {
    let n = opts.grid.unwrap_or(default.len());
    let (lo, hi) = match opts.domain.as_deref() {
        Some(&[lo, hi]) => (lo, hi),
        Some(other) => {
            return Err(Error::Config(format!(
                "domain needs two values, got {}",
                other.len()
            )));
        }
        None => (default.x_min(), default.x_max()),
    };
    Grid::new(n, lo, hi)
}

#[derive(Debug, Clone, Copy, Serialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
enum RefineRule {
    /// Potential-dependent stages (the finite well gets the sharp cascade).
    Default,
    Off,
    Single {
        dt_fine: f64,
        n_steps: usize,
    },
}

#[derive(Debug, Clone, Serialize)]
struct SolverSettings {
    dt: f64,
    tol: f64,
    max_iters: usize,
    scheme: String,
    seed: u64,
    refine: RefineRule,
}

impl SolverSettings {
    fn resolve(o: SolverOpts) -> Result<Self> {
        let no_refine = o.no_refine.unwrap_or(false);
        let refine = match (o.refine_dt, o.refine_steps, no_refine) {
            (Some(_), _, true) => {
                return Err(Error::Config(
                    "refine-dt and no-refine are mutually exclusive".into(),
                ));
            }
            (None, Some(_), _) => return Err(Error::Config("refine-steps needs refine-dt".into())),
            (Some(dt_fine), steps, false) => RefineRule::Single {
                dt_fine,
                n_steps: steps.unwrap_or(Refine::SHARP.n_steps),
            },
            (None, None, true) => RefineRule::Off,
            (None, None, false) => RefineRule::Default,
        };
        let s = Self {
            dt: o.dt.unwrap_or(1e-2),
            tol: o.tol.unwrap_or(1e-12),
            max_iters: o.max_iters.unwrap_or(1_000_000),
            scheme: o.scheme.unwrap_or_else(|| "sixth".into()),
            seed: o.seed.unwrap_or(0),
            refine,
        };
        s.scheme()?;
        Ok(s)
    }

    fn scheme(&self) -> Result<SplitScheme> {
        SplitScheme::by_name(&self.scheme)
    }

    fn config(&self, alpha: f64, spec: &PotentialSpec, grid: &Grid) -> SolveConfig {
        let mut cfg = SolveConfig::for_potential(alpha, spec, grid);
        cfg.dt = self.dt;
        cfg.tol = self.tol;
        cfg.max_iters = self.max_iters;
        cfg.seed = self.seed;
        match self.refine {
            RefineRule::Default => cfg.refine.retain(|r| r.dt_fine < self.dt),
            RefineRule::Off => cfg.refine.clear(),
            RefineRule::Single { dt_fine, n_steps } => {
                cfg.refine = vec![Refine { dt_fine, n_steps }]
            }
        }
        cfg
    }
}

#[derive(Debug, Clone, Serialize)]
struct StagesAt {
    alpha: f64,
    stages: Vec<Refine>,
}

fn parse_parity(name: &str) -> Result<Parity> {
    match name {
        "none" => Ok(Parity::None),
        "even" => Ok(Parity::Even),
        "odd" => Ok(Parity::Odd),
        other => Err(Error::Config(format!(
            "unknown parity '{other}' (expected none, even or odd)"
        ))),
    }
}

/// `start, start + step, ...` up to `stop`, rounded to suppress drift.
fn range(start: f64, stop: f64, step: f64) -> Vec<f64> {
    let n = ((stop - start) / step).round() as usize;
    (0..=n)
        .map(|i| ((start + i as f64 * step) * 1e9).round() / 1e9)
        .collect()
}

fn require_alphas(alphas: &[f64]) -> Result<()> {
    if alphas.is_empty() {
        return Err(Error::Config("empty list of orders".into()));
    }
    match alphas.iter().find(|&&a| !(a > 0.0 && a <= 4.0)) {
        Some(&a) => Err(Error::InvalidAlpha(a)),
        None => Ok(()),
    }
}

fn finish(artifacts: Artifacts, dir: Option<PathBuf>) -> Result<()> {
    let dir = dir.unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR));
    for path in artifacts.write_to(&dir)? {
        progress!("wrote {}", path.display());
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
struct StateSummary {
    index: usize,
    alpha: f64,
    energy: f64,
    energy_decay: f64,
    residual: f64,
    iterations: usize,
    parity: Parity,
    final_change: f64,
    boundary_ratio: f64,
    domain_too_small: bool,
}

impl StateSummary {
    /// `periodic` marks potentials whose domain is the physical ring, where
    /// boundary weight is expected.
    fn new(s: &EigenSolution, periodic: bool) -> Self {
        Self {
            index: s.index,
            alpha: s.alpha,
            energy: s.energy,
            energy_decay: s.energy_decay,
            residual: s.residual,
            iterations: s.iterations,
            parity: s.parity,
            final_change: s.final_change,
            boundary_ratio: s.boundary_ratio,
            domain_too_small: !periodic && s.domain_too_small(),
        }
    }
}

fn warn_boundary(states: &[EigenSolution], spec: &PotentialSpec) {
    if matches!(spec, PotentialSpec::RingZero) {
        return;
    }
    for s in states.iter().filter(|s| s.domain_too_small()) {
        eprintln!(
            "warning: state {} at alpha {} has boundary ratio {:.2e}; widen the domain",
            s.index, s.alpha, s.boundary_ratio
        );
    }
}

#[derive(Serialize)]
struct SolveManifest {
    potential: String,
    potential_spec: Option<PotentialSpec>,
    alpha: f64,
    n_states: usize,
    parity: Parity,
    grid: GridSetting,
    solver: SolverSettings,
    refine_stages: Vec<Refine>,
    output_dir: PathBuf,
}

fn solve(opts: SolveOpts, grid_opts: GridOpts, solver: SolverOpts, out: OutputOpts) -> Result<()> {
    let potential = opts.potential.unwrap_or_else(|| "harmonic".into());
    let spec = PotentialSpec::from_name(&potential)?;
    let alpha = opts.alpha.unwrap_or(2.0);
    require_alphas(&[alpha])?;
    let n_states = opts.n_states.unwrap_or(1);
    let parity = parse_parity(opts.parity.as_deref().unwrap_or("none"))?;
    let grid = resolve_grid(&grid_opts, spec.default_grid()?)?;
    let settings = SolverSettings::resolve(solver)?;
    let scheme = settings.scheme()?;
    let mut cfg = settings.config(alpha, &spec, &grid);
    cfg.parity = parity;
    let output_dir = out
        .output_dir
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR));

    let states = solve_spectrum(&cfg, &spec, &grid, &scheme, n_states)?;
    warn_boundary(&states, &spec);

    let mut artifacts = Artifacts::default();
    for s in &states {
        let mut table = Table::new(&["x", "re", "im"])?;
        for (j, z) in s.psi.values().iter().enumerate() {
            table.row(&[num(grid.x(j)), num(z.re), num(z.im)])?;
        }
        artifacts.table(&format!("state_{:03}.csv", s.index), table)?;
    }
    let summary: Vec<StateSummary> = states
        .iter()
        .map(|s| StateSummary::new(s, matches!(spec, PotentialSpec::RingZero)))
        .collect();
    let summary_json = serde_json::json!({ "potential": potential, "states": summary });
    artifacts.json("summary.json", &summary_json)?;
    let manifest = SolveManifest {
        potential_spec: (!matches!(spec, PotentialSpec::Tabulated { .. })).then(|| spec.clone()),
        potential,
        alpha,
        n_states,
        parity,
        grid: GridSetting::from(&grid),
        solver: settings,
        refine_stages: cfg.refine.clone(),
        output_dir: output_dir.clone(),
    };
    artifacts.json("manifest.json", &Manifest::new("solve", manifest))?;
    finish(artifacts, Some(output_dir))?;
    if !quiet() {
        println!(
            "{}",
            serde_json::to_string_pretty(&summary_json).map_err(|e| Error::Io(e.to_string()))?
        );
    }
    Ok(())
}

#[derive(Serialize)]
struct RingManifest {
    alphas: Vec<f64>,
    n_max: usize,
    grid: GridSetting,
    solver: SolverSettings,
    output_dir: PathBuf,
}

fn ring_benchmark(
    opts: RingOpts,
    grid_opts: GridOpts,
    solver: SolverOpts,
    out: OutputOpts,
) -> Result<()> {
    let spec = PotentialSpec::RingZero;
    let alphas = opts.alphas.unwrap_or_else(|| vec![1.5, 1.8, 2.0, 2.2]);
    require_alphas(&alphas)?;
    let n_max = opts.n_max.unwrap_or(10);
    let grid = resolve_grid(&grid_opts, spec.default_grid()?)?;
    let settings = SolverSettings::resolve(solver)?;
    let scheme = settings.scheme()?;
    let references = (0..=n_max)
        .map(|n| ring_analytic_state(n, &grid))
        .collect::<Result<Vec<_>>>()?;
    let output_dir = out
        .output_dir
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR));

    let per_alpha = alphas
        .par_iter()
        .map(|&alpha| {
            let cfg = settings.config(alpha, &spec, &grid);
            let states = solve_spectrum(&cfg, &spec, &grid, &scheme, n_max + 1)?;
            let rows = states
                .iter()
                .zip(&references)
                .enumerate()
                .map(|(n, (s, reference))| {
                    let e_ref = 0.5 * abs_pow(ring_mode(n) as f64 * grid.dk(), alpha);
                    compare_state(&s.psi, reference, s.energy, e_ref).map(|r| r.labeled(n, alpha))
                })
                .collect::<Result<Vec<_>>>()?;
            progress!("alpha {alpha}: {} states", rows.len());
            Ok(rows)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut table = Table::new(&["alpha", "n", "max_pointwise_error", "energy_error"])?;
    for r in per_alpha.iter().flatten() {
        table.row(&[
            num(r.alpha),
            r.index.to_string(),
            num(r.max_pointwise),
            num(r.energy_error),
        ])?;
    }
    let mut artifacts = Artifacts::default();
    artifacts.table("ring_benchmark.csv", table)?;
    let manifest = RingManifest {
        alphas,
        n_max,
        grid: GridSetting::from(&grid),
        solver: settings,
        output_dir: output_dir.clone(),
    };
    artifacts.json("manifest.json", &Manifest::new("ring-benchmark", manifest))?;
    finish(artifacts, Some(output_dir))
}

#[derive(Serialize)]
struct SweepManifest {
    potential: String,
    potential_spec: Option<PotentialSpec>,
    alphas: Vec<f64>,
    n_states: usize,
    grid: GridSetting,
    solver: SolverSettings,
    refine_stages: Vec<StagesAt>,
    output_dir: PathBuf,
}

fn spectrum_sweep(
    opts: SweepOpts,
    grid_opts: GridOpts,
    solver: SolverOpts,
    out: OutputOpts,
) -> Result<()> {
    let potential = opts.potential.unwrap_or_else(|| "harmonic".into());
    let spec = PotentialSpec::from_name(&potential)?;
    let alphas = opts.alphas.unwrap_or_else(|| range(1.5, 2.4, 0.1));
    require_alphas(&alphas)?;
    let n_states = opts.n_states.unwrap_or(5);
    let grid = resolve_grid(&grid_opts, spec.default_grid()?)?;
    let settings = SolverSettings::resolve(solver)?;
    let scheme = settings.scheme()?;
    let output_dir = out
        .output_dir
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR));

    let per_alpha = alphas
        .par_iter()
        .map(|&alpha| {
            let cfg = settings.config(alpha, &spec, &grid);
            let states = solve_spectrum(&cfg, &spec, &grid, &scheme, n_states)?;
            progress!("alpha {alpha}: E0 = {:.12}", states[0].energy);
            Ok(states)
        })
        .collect::<Result<Vec<_>>>()?;
    for states in &per_alpha {
        warn_boundary(states, &spec);
    }

    let mut table = Table::new(&["alpha", "n", "energy", "residual"])?;
    for s in per_alpha.iter().flatten() {
        table.row(&[
            num(s.alpha),
            s.index.to_string(),
            num(s.energy),
            num(s.residual),
        ])?;
    }
    let mut artifacts = Artifacts::default();
    artifacts.table("spectrum_sweep.csv", table)?;
    let manifest = SweepManifest {
        potential_spec: (!matches!(spec, PotentialSpec::Tabulated { .. })).then(|| spec.clone()),
        potential,
        refine_stages: alphas
            .iter()
            .map(|&alpha| StagesAt {
                alpha,
                stages: settings.config(alpha, &spec, &grid).refine,
            })
            .collect(),
        alphas,
        n_states,
        grid: GridSetting::from(&grid),
        solver: settings,
        output_dir: output_dir.clone(),
    };
    artifacts.json("manifest.json", &Manifest::new("spectrum-sweep", manifest))?;
    finish(artifacts, Some(output_dir))
}

#[derive(Serialize)]
struct WellManifest {
    potential_spec: PotentialSpec,
    alphas: Vec<f64>,
    grid: GridSetting,
    method: &'static str,
    output_dir: PathBuf,
}

/// Grid for counting: walls fall midway between samples.
fn well_count_grid() -> Result<Grid> {
    let half = 512.0 / 25.5;
    Grid::new(1024, -half, half)
}

fn well_count(opts: WellOpts, grid_opts: GridOpts, out: OutputOpts) -> Result<()> {
    let spec =
        PotentialSpec::finite_well(opts.v0.unwrap_or(100.0), opts.half_width.unwrap_or(1.0))?;
    let alphas = opts.alphas.unwrap_or_else(|| range(1.5, 2.4, 0.1));
    require_alphas(&alphas)?;
    let grid = resolve_grid(&grid_opts, well_count_grid()?)?;
    let output_dir = out
        .output_dir
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR));

    let counts = alphas
        .par_iter()
        .map(|&alpha| count_bound_states(alpha, &spec, &grid))
        .collect::<Result<Vec<_>>>()?;

    let mut table = Table::new(&["alpha", "bound_count", "marginal"])?;
    for (alpha, c) in alphas.iter().zip(&counts) {
        table.row(&[
            num(*alpha),
            c.count.to_string(),
            c.marginal.len().to_string(),
        ])?;
        if !c.marginal.is_empty() {
            eprintln!(
                "warning: alpha {alpha}: {} bound energies within 1e-6 of V0",
                c.marginal.len()
            );
        }
    }
    let mut artifacts = Artifacts::default();
    artifacts.table("well_count.csv", table)?;
    let manifest = WellManifest {
        potential_spec: spec,
        alphas,
        grid: GridSetting::from(&grid),
        method: "dense",
        output_dir: output_dir.clone(),
    };
    artifacts.json("manifest.json", &Manifest::new("well-count", manifest))?;
    finish(artifacts, Some(output_dir))
}

#[derive(Debug, Clone, Serialize)]
struct TraceSettings {
    alpha: f64,
    dt: f64,
    every: usize,
    duration: f64,
    n_steps: usize,
    scheme: &'static str,
}

#[derive(Serialize)]
struct TunnelManifest {
    potential: String,
    potential_spec: Option<PotentialSpec>,
    alphas: Vec<f64>,
    grid: GridSetting,
    solver: SolverSettings,
    trace: Option<TraceSettings>,
    output_dir: PathBuf,
}

fn tunneling(
    opts: TunnelOpts,
    grid_opts: GridOpts,
    solver: SolverOpts,
    out: OutputOpts,
) -> Result<()> {
    let potential = opts.potential.unwrap_or_else(|| "double-well".into());
    let spec = PotentialSpec::from_name(&potential)?;
    let alphas = opts.alphas.unwrap_or_else(|| range(1.8, 2.2, 0.05));
    require_alphas(&alphas)?;
    if let Some(a) = opts.trace_alpha {
        require_alphas(&[a])?;
    }
    let trace_dt = opts.trace_dt.unwrap_or(1e-2);
    let trace_every = opts.trace_every.unwrap_or(100);
    if !(trace_dt > 0.0 && trace_dt.is_finite()) || trace_every == 0 {
        return Err(Error::Config(
            "trace-dt and trace-every must be positive".into(),
        ));
    }
    let grid = resolve_grid(&grid_opts, spec.default_grid()?)?;
    let settings = SolverSettings::resolve(solver)?;
    let scheme = settings.scheme()?;
    let output_dir = out
        .output_dir
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR));

    let mut all: Vec<f64> = alphas.clone();
    if let Some(a) = opts.trace_alpha {
        if !alphas.contains(&a) {
            all.push(a);
        }
    }
    let pairs = all
        .par_iter()
        .map(|&alpha| {
            let cfg = settings.config(alpha, &spec, &grid);
            let states = solve_spectrum(&cfg, &spec, &grid, &scheme, 2)?;
            progress!(
                "alpha {alpha}: gap {:.6e}",
                states[1].energy - states[0].energy
            );
            Ok(states)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut table = Table::new(&["alpha", "e0", "e1", "gap", "frequency"])?;
    for (alpha, states) in alphas.iter().zip(&pairs) {
        let (e0, e1) = (states[0].energy, states[1].energy);
        table.row(&[
            num(*alpha),
            num(e0),
            num(e1),
            num(e1 - e0),
            num(tunneling_frequency(e0, e1)),
        ])?;
    }
    let mut artifacts = Artifacts::default();
    artifacts.table("tunneling.csv", table)?;

    let mut trace_settings = None;
    if let Some(alpha) = opts.trace_alpha {
        let states = &pairs[all
            .iter()
            .position(|&a| a == alpha)
            .expect("trace order solved")];
        let gap = states[1].energy - states[0].energy;
        let duration = opts.trace_duration.unwrap_or(PI / gap);
        if !(duration > 0.0 && duration.is_finite()) {
            return Err(Error::Config(format!(
                "trace duration must be positive, got {duration}"
            )));
        }
        let n_steps = (duration / trace_dt).round() as usize;
        let (left, _) = left_right_superpositions(&states[0].psi, &states[1].psi)?;
        let strang = SplitScheme::strang();
        let mut trace = Table::new(&["t", "left_mass", "right_mass"])?;
        let mut rows = Vec::new();
        real_time_propagate_observed(
            &left,
            &spec,
            alpha,
            trace_dt,
            n_steps,
            &strang,
            trace_every,
            |step, psi| {
                let (l, r) = well_masses(psi);
                rows.push([num(step as f64 * trace_dt), num(l), num(r)]);
            },
        )?;
        for row in &rows {
            trace.row(row)?;
        }
        artifacts.table("tunneling_trace.csv", trace)?;
        trace_settings = Some(TraceSettings {
            alpha,
            dt: trace_dt,
            every: trace_every,
            duration,
            n_steps,
            scheme: "strang",
        });
    }

    let manifest = TunnelManifest {
        potential_spec: (!matches!(spec, PotentialSpec::Tabulated { .. })).then(|| spec.clone()),
        potential,
        alphas,
        grid: GridSetting::from(&grid),
        solver: settings,
        trace: trace_settings,
        output_dir: output_dir.clone(),
    };
    artifacts.json("manifest.json", &Manifest::new("tunneling", manifest))?;
    finish(artifacts, Some(output_dir))
}

#[derive(Serialize)]
struct MlManifest {
    q: Vec<f64>,
    beta: f64,
    x_min: f64,
    x_max: f64,
    points: usize,
    argument: &'static str,
    output_dir: PathBuf,
}

fn ml_eval(opts: MlOpts, out: OutputOpts) -> Result<()> {
    let qs = opts.q.unwrap_or_else(|| vec![0.9, 1.0, 1.1]);
    let beta = opts.beta.unwrap_or(1.0);
    let x_min = opts.x_min.unwrap_or(-5.0);
    let x_max = opts.x_max.unwrap_or(5.0);
    let points = opts.points.unwrap_or(1001);
    if qs.is_empty() {
        return Err(Error::Config("empty list of q values".into()));
    }
    if points < 2 || !(x_min.is_finite() && x_max.is_finite() && x_min < x_max) {
        return Err(Error::Config(
            "need at least 2 points on a finite interval x-min < x-max".into(),
        ));
    }
    let params = qs
        .iter()
        .map(|&q| MlParams::new(q, beta))
        .collect::<Result<Vec<_>>>()
        .map_err(|e| Error::Config(e.to_string()))?;
    let output_dir = out
        .output_dir
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR));

    let step = (x_max - x_min) / (points - 1) as f64;
    let mut header = vec!["x".to_string()];
    for q in &qs {
        header.push(format!("ml_q{q}"));
        header.push(format!("err_q{q}"));
    }
    header.push("gaussian".into());
    let mut table = Table::new(&header)?;
    let mut skipped = 0usize;
    for i in 0..points {
        let x = x_min + i as f64 * step;
        let mut row = vec![num(x)];
        for p in &params {
            match mittag_leffler(*p, -x * x) {
                Ok(v) => {
                    row.push(num(v.value));
                    row.push(num(v.error));
                }
                Err(_) => {
                    skipped += 1;
                    row.push(num(f64::NAN));
                    row.push(num(f64::INFINITY));
                }
            }
        }
        row.push(num((-x * x).exp()));
        table.row(&row)?;
    }
    if skipped > 0 {
        eprintln!(
            "warning: {skipped} samples outside the series domain or accuracy limit written as NaN"
        );
    }
    let mut artifacts = Artifacts::default();
    artifacts.table("ml_eval.csv", table)?;
    let manifest = MlManifest {
        q: qs,
        beta,
        x_min,
        x_max,
        points,
        argument: "-x^2",
        output_dir: output_dir.clone(),
    };
    artifacts.json("manifest.json", &Manifest::new("ml-eval", manifest))?;
    finish(artifacts, Some(output_dir))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges_are_clean() {
        assert_eq!(
            range(1.5, 2.4, 0.1),
            vec![1.5, 1.6, 1.7, 1.8, 1.9, 2.0, 2.1, 2.2, 2.3, 2.4]
        );
        assert_eq!(range(1.8, 2.2, 0.05).len(), 9);
    }

    #[test]
    fn refine_rules() {
        let base = SolverOpts::default();
        assert!(matches!(
            SolverSettings::resolve(base.clone()).unwrap().refine,
            RefineRule::Default
        ));
        let both = SolverOpts {
            refine_dt: Some(1e-3),
            no_refine: Some(true),
            ..base.clone()
        };
        assert!(SolverSettings::resolve(both).is_err());
        let steps_only = SolverOpts {
            refine_steps: Some(5),
            ..base.clone()
        };
        assert!(SolverSettings::resolve(steps_only).is_err());
        let bad_scheme = SolverOpts {
            scheme: Some("rk4".into()),
            ..base
        };
        assert!(matches!(
            SolverSettings::resolve(bad_scheme),
            Err(Error::InvalidScheme(_))
        ));
    }

    #[test]
    fn default_refine_follows_potential() {
        let s = SolverSettings::resolve(SolverOpts::default()).unwrap();
        let g = Grid::new(1024, -8.0, 8.0).unwrap();
        let fw = s.config(2.0, &PotentialSpec::default_finite_well(), &g);
        assert_eq!(fw.refine, Refine::sharp_stages(&g, 2.0));
        assert!(s
            .config(2.0, &PotentialSpec::Harmonic, &g)
            .refine
            .is_empty());
    }

    #[test]
    fn grid_override() {
        let d = Grid::new(480, -1.0, 1.0).unwrap();
        let g = resolve_grid(
            &GridOpts {
                grid: Some(256),
                domain: None,
            },
            d,
        )
        .unwrap();
        assert_eq!((g.len(), g.x_min(), g.x_max()), (256, -1.0, 1.0));
        let bad = GridOpts {
            grid: None,
            domain: Some(vec![1.0]),
        };
        assert!(resolve_grid(&bad, d).is_err());
    }
}
