//! Command-line front end: figure reproductions, config-driven runs and
//! CSV / plot-script output.
//!
//! Each `cmd_*` function returns a [`ResultTable`]; [`run`] handles
//! arguments, thread count, files and exit codes.

pub mod config;
pub mod table;

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use clap::{Parser, Subcommand};
use rayon::prelude::*;

use crate::error::Error;
use crate::fock::{Bipartition, DensityMatrix, Operator};
use crate::freefermion::{correlations_from_occupations, entanglement_length_sweep, projected_two_site, LinearFit};
use crate::measures::{entanglement_of_particles, EPReport};
use crate::models::{bose_hubbard_ring, dimer_ground_momentum, hubbard_dimer, partitions, ModelFamily, ModelSpec};
use crate::thermal::{
    chemical_potential_for_filling, fermi_occupations, ground_state, occupations_for_filling, Ensemble, ThermalSolver,
    ThermalSpec,
};

pub use config::{Config, ConfigError, Spacing, Sweep};
pub use table::{format_value, PlotSpec, ResultTable};

/// Failure of a command, mapped onto the process exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("config error: {0}")]
    Config(#[from] ConfigError),
    #[error("computation error: {0}")]
    Compute(#[from] Error),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Config(_) => 1,
            CliError::Compute(_) | CliError::Io(_) => 2,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "epart", version, about = "Entanglement of particles in lattice models")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Configuration file of `key = value` lines.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Write PREFIX.csv (and PREFIX.gp with --plot) instead of printing.
    #[arg(long, global = true, value_name = "PREFIX")]
    pub out: Option<String>,
    /// Also emit a gnuplot script that renders an SVG.
    #[arg(long, global = true)]
    pub plot: bool,
    /// Worker threads; EPART_THREADS takes precedence.
    #[arg(long, global = true, value_name = "N")]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Ground-state E_P of two bosons on a four-site ring against U/t.
    FigBoseGround,
    /// Canonical thermal E_P of the four-site Bose-Hubbard ring.
    FigBoseThermal,
    /// Thermal Hubbard dimer: P11, posterior E_F and E_P.
    FigDimer,
    /// Free electrons on a ring: E_P against inverse temperature and separation.
    FigLatticeCool,
    /// Free electrons at T -> 0: posterior E_F and P11 against filling.
    FigFilling,
    /// Entanglement length against inverse filling.
    FigEntlength,
    /// E_P of an arbitrary small model described by --config.
    Compute,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::FigBoseGround => "fig-bose-ground",
            Command::FigBoseThermal => "fig-bose-thermal",
            Command::FigDimer => "fig-dimer",
            Command::FigLatticeCool => "fig-lattice-cool",
            Command::FigFilling => "fig-filling",
            Command::FigEntlength => "fig-entlength",
            Command::Compute => "compute",
        }
    }
}

/// Parses arguments, runs the command and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("epart: {e}");
            e.exit_code()
        }
    }
}

fn thread_count(flag: Option<usize>) -> CliResult<Option<usize>> {
    match std::env::var("EPART_THREADS") {
        Ok(v) if !v.trim().is_empty() => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .map(Some)
            .ok_or_else(|| CliError::Usage(format!("EPART_THREADS must be a positive integer, got `{v}`"))),
        _ => match flag {
            Some(0) => Err(CliError::Usage("--threads must be positive".into())),
            other => Ok(other),
        },
    }
}

fn load_config(path: Option<&Path>) -> CliResult<Config> {
    match path {
        None => Ok(Config::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| {
                CliError::Config(ConfigError {
                    line: None,
                    message: format!("{}: {e}", p.display()),
                })
            })?;
            Ok(Config::parse(&text)?)
        }
    }
}

pub fn execute(cli: &Cli) -> CliResult<()> {
    if let Some(n) = thread_count(cli.threads)? {
        // a second initialization in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let cfg = load_config(cli.config.as_deref())?;
    let started = Instant::now();
    let (table, default_prefix) = match cli.command {
        Command::Compute => {
            if cli.config.is_none() {
                return Err(CliError::Usage("compute needs --config FILE".into()));
            }
            let run = RunConfig::from_config(&cfg)?;
            let prefix = run.output.clone();
            (compute(&run)?, prefix)
        }
        cmd => (figure(cmd, &cfg)?, None),
    };
    let csv = table.to_csv(Some(started.elapsed().as_secs_f64()));
    let prefix = cli.out.clone().or(default_prefix);
    let write = |path: &str, text: &str| std::fs::write(path, text).map_err(|e| CliError::Io(format!("{path}: {e}")));
    match &prefix {
        Some(p) => {
            write(&format!("{p}.csv"), &csv)?;
            eprintln!("wrote {p}.csv");
        }
        None => print!("{csv}"),
    }
    if cli.plot {
        let p = prefix.unwrap_or_else(|| cli.command.name().to_string());
        let svg = format!("{p}.svg");
        if let Some(script) = table.plot_script(&svg) {
            write(&format!("{p}.gp"), &script)?;
            eprintln!("wrote {p}.gp (run `gnuplot {p}.gp` for {svg})");
        }
    }
    Ok(())
}

/// Runs a figure subcommand with its defaults overridden by `cfg`.
pub fn figure(cmd: Command, cfg: &Config) -> CliResult<ResultTable> {
    let mut table = match cmd {
        Command::FigBoseGround => cmd_fig_bose_ground(cfg)?,
        Command::FigBoseThermal => cmd_fig_bose_thermal(cfg)?,
        Command::FigDimer => cmd_fig_dimer(cfg)?,
        Command::FigLatticeCool => cmd_fig_lattice_cool(cfg)?,
        Command::FigFilling => cmd_fig_filling(cfg)?,
        Command::FigEntlength => cmd_fig_entlength(cfg)?,
        Command::Compute => return Err(CliError::Usage("compute is not a figure".into())),
    };
    let mut head = vec![
        ("tool".to_string(), format!("epart {}", env!("CARGO_PKG_VERSION"))),
        ("command".to_string(), cmd.name().to_string()),
    ];
    head.extend(cfg.echo().into_iter().map(|l| ("config".to_string(), l)));
    table.prepend_meta(head);
    Ok(table)
}

fn keys_with(base: &[&str], sweeps: &[&str]) -> Vec<String> {
    let mut keys: Vec<String> = base.iter().map(|s| s.to_string()).collect();
    for s in sweeps {
        keys.extend(Sweep::keys(s));
    }
    keys
}

fn check_keys(cfg: &Config, keys: &[String]) -> CliResult<()> {
    let refs: Vec<&str> = keys.iter().map(String::as_str).collect();
    Ok(cfg.check_keys(&refs)?)
}

fn positive(cfg: &Config, key: &str, v: f64) -> CliResult<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(cfg.error(key, format!("`{key}` must be positive, got {v}")).into())
    }
}

fn ep(rho: &DensityMatrix, partition: &Bipartition) -> CliResult<EPReport> {
    Ok(entanglement_of_particles(rho, partition)?)
}

fn collect_rows(rows: Vec<CliResult<Vec<Vec<f64>>>>, table: &mut ResultTable) -> CliResult<()> {
    for block in rows {
        for row in block? {
            table.push(row);
        }
    }
    Ok(())
}

/// Two bosons on a four-site ring at `T = 0` against `U/t`.
pub fn cmd_fig_bose_ground(cfg: &Config) -> CliResult<ResultTable> {
    check_keys(cfg, &keys_with(&["sweep.include_zero"], &["sweep"]))?;
    let sweep = Sweep::from_config(cfg, "sweep", Sweep::new(0.01, 1000.0, 41, Spacing::Log))?;
    let mut grid = sweep.values();
    if cfg.get_or("sweep.include_zero", true)? {
        grid.insert(0, 0.0);
    }
    let mut table = ResultTable::new(["U_over_t", "E_P_adjacent", "E_P_diagonal", "P11", "EF"]);
    table.meta("model", "bose-hubbard ring, M=4, N=2, t=1");
    table.meta("U_over_t", sweep.describe());
    let rows: Vec<CliResult<Vec<Vec<f64>>>> = grid
        .par_iter()
        .map(|&u| {
            let g = ground_state(&bose_hubbard_ring(4, 1.0, u, 2)?)?;
            let adj = ep(&g.mixture, &partitions::ring_adjacent())?;
            let diag = ep(&g.mixture, &partitions::ring_diagonal())?;
            Ok(vec![vec![u, adj.total, diag.total, adj.p11(), adj.posterior_11()]])
        })
        .collect();
    collect_rows(rows, &mut table)?;
    table.plot = Some(PlotSpec {
        title: "Two bosons in four modes, ground state".into(),
        x: "U_over_t".into(),
        y: vec!["E_P_adjacent".into(), "E_P_diagonal".into(), "P11".into(), "EF".into()],
        color: None,
        log_x: true,
    });
    Ok(table)
}

/// Canonical state of two bosons on the four-site ring against `t/U` and
/// `U/(k_B T)`, with `U = 1`.
pub fn cmd_fig_bose_thermal(cfg: &Config) -> CliResult<ResultTable> {
    check_keys(cfg, &keys_with(&[], &["t_over_u", "u_over_kt"]))?;
    let tu = Sweep::from_config(cfg, "t_over_u", Sweep::new(0.001, 0.1, 9, Spacing::Log))?;
    let beta = Sweep::from_config(cfg, "u_over_kt", Sweep::new(1.0, 1e4, 25, Spacing::Log))?;
    let betas = beta.values();
    if betas.iter().any(|&b| b <= 0.0) {
        return Err(cfg
            .error("u_over_kt.start", "inverse temperatures must be positive")
            .into());
    }
    let mut table = ResultTable::new(["t_over_U", "kT_over_U", "E_P", "P11", "EF_posterior"]);
    table.meta("model", "bose-hubbard ring, M=4, N=2, U=1, canonical ensemble");
    table.meta("t_over_U", tu.describe());
    table.meta("U_over_kT", beta.describe());
    let rows: Vec<CliResult<Vec<Vec<f64>>>> = tu
        .values()
        .par_iter()
        .map(|&t| {
            let solver = ThermalSolver::new(&bose_hubbard_ring(4, t, 1.0, 2)?)?;
            betas
                .iter()
                .map(|&b| {
                    let r = ep(&solver.canonical(1.0 / b)?, &partitions::ring_adjacent())?;
                    Ok(vec![t, 1.0 / b, r.total, r.p11(), r.posterior_11()])
                })
                .collect()
        })
        .collect();
    collect_rows(rows, &mut table)?;
    table.plot = Some(PlotSpec {
        title: "Two bosons in four modes, canonical ensemble".into(),
        x: "kT_over_U".into(),
        y: vec!["E_P".into()],
        color: Some("t_over_U".into()),
        log_x: true,
    });
    Ok(table)
}

/// Canonical Hubbard dimer against `U/t` and `k_B T/t`, with `t = 1`.
/// Momentum- and spin-partition columns are evaluated on the ground state.
pub fn cmd_fig_dimer(cfg: &Config) -> CliResult<ResultTable> {
    check_keys(cfg, &keys_with(&["kt_over_t.include_zero"], &["u_over_t", "kt_over_t"]))?;
    let us = Sweep::from_config(cfg, "u_over_t", Sweep::new(0.0, 20.0, 41, Spacing::Linear))?;
    let ts = Sweep::from_config(cfg, "kt_over_t", Sweep::new(0.02, 5.0, 25, Spacing::Log))?;
    if us.values().iter().any(|&u| u < 0.0) {
        return Err(cfg.error("u_over_t.start", "U/t must be non-negative").into());
    }
    let mut temps = ts.values();
    if temps.iter().any(|&t| t < 0.0) {
        return Err(cfg.error("kt_over_t.start", "temperatures must be non-negative").into());
    }
    if cfg.get_or("kt_over_t.include_zero", true)? {
        temps.insert(0, 0.0);
    }
    let mut table = ResultTable::new([
        "U_over_t",
        "kT_over_t",
        "P11",
        "EF_posterior",
        "E_P",
        "E_P_momentum_ground",
        "E_P_spin_ground",
    ]);
    table.meta("model", "hubbard dimer, N=2, t=1, canonical ensemble, site partition");
    table.meta("U_over_t", us.describe());
    table.meta("kT_over_t", ts.describe());
    let rows: Vec<CliResult<Vec<Vec<f64>>>> = us
        .values()
        .par_iter()
        .map(|&u| {
            let h = hubbard_dimer(1.0, u)?;
            let momentum = ep(
                &DensityMatrix::from_pure(&dimer_ground_momentum(1.0, u)?),
                &partitions::dimer_momenta(),
            )?;
            let spin = ep(&ground_state(&h)?.mixture, &partitions::dimer_spins())?;
            let solver = ThermalSolver::new(&h)?;
            temps
                .iter()
                .map(|&kt| {
                    let r = ep(&solver.canonical(kt)?, &partitions::dimer_sites())?;
                    Ok(vec![
                        u,
                        kt,
                        r.p11(),
                        r.posterior_11(),
                        r.total,
                        momentum.total,
                        spin.total,
                    ])
                })
                .collect()
        })
        .collect();
    collect_rows(rows, &mut table)?;
    table.plot = Some(PlotSpec {
        title: "Hubbard dimer, canonical ensemble".into(),
        x: "U_over_t".into(),
        y: vec!["E_P".into()],
        color: Some("kT_over_t".into()),
        log_x: false,
    });
    Ok(table)
}

fn lattice_basics(cfg: &Config, default_sites: usize) -> CliResult<(usize, f64)> {
    let m: usize = cfg.get_or("lattice.sites", default_sites)?;
    if m < 3 {
        return Err(cfg.error("lattice.sites", "the ring needs at least 3 sites").into());
    }
    let t = positive(cfg, "lattice.t", cfg.get_or("lattice.t", 1.0)?)?;
    Ok((m, t))
}

fn separations(cfg: &Config, m: usize, default_max: usize) -> CliResult<Vec<usize>> {
    let max: usize = cfg.get_or("separation.max", default_max.min(m / 2))?;
    if max == 0 || max >= m {
        return Err(cfg
            .error("separation.max", format!("separation.max must lie in 1..{m}"))
            .into());
    }
    Ok((1..=max).collect())
}

/// Projected-matrix quantities for every separation at given occupations:
/// `(P11, E_F, E_P)` per separation.
fn separation_rows(n: &[f64], ds: &[usize]) -> CliResult<Vec<(f64, f64, f64)>> {
    ds.iter()
        .map(|&d| {
            let p = projected_two_site(&correlations_from_occupations(n, d)?)?;
            let ef = p.eof()?;
            Ok((p.weight, ef, p.weight * ef))
        })
        .collect()
}

/// Grand-canonical free electrons with `mu` fixed by the `T -> 0` filling,
/// against `t/(k_B T)` and separation.
pub fn cmd_fig_lattice_cool(cfg: &Config) -> CliResult<ResultTable> {
    check_keys(
        cfg,
        &keys_with(
            &[
                "lattice.sites",
                "lattice.t",
                "lattice.electrons_per_site",
                "separation.max",
                "t_over_kt.include_ground",
            ],
            &["t_over_kt"],
        ),
    )?;
    let (m, t) = lattice_basics(cfg, 30)?;
    let per_site: f64 = cfg.get_or("lattice.electrons_per_site", 0.2)?;
    if !(per_site > 0.0 && per_site < 2.0) {
        return Err(cfg
            .error("lattice.electrons_per_site", "electrons per site must lie in (0, 2)")
            .into());
    }
    let ds = separations(cfg, m, 8)?;
    let sweep = Sweep::from_config(cfg, "t_over_kt", Sweep::new(0.0, 10.0, 41, Spacing::Linear))?;
    let mut grid = sweep.values();
    if grid.iter().any(|&x| x < 0.0) {
        return Err(cfg
            .error("t_over_kt.start", "inverse temperatures must be non-negative")
            .into());
    }
    if cfg.get_or("t_over_kt.include_ground", true)? {
        grid.push(f64::INFINITY);
    }
    let sol = chemical_potential_for_filling(m, t, 0.0, per_site / 2.0)?;
    let mut table = ResultTable::new(["t_over_kT", "separation", "E_P", "P11", "EF_posterior"]);
    table.meta(
        "model",
        format!("free electrons, ring of {m} sites, t={t}, grand-canonical"),
    );
    table.meta("electrons_per_site", per_site);
    table.meta("mu", format_value(sol.mu));
    table.meta("t_over_kT", sweep.describe());
    let rows: Vec<CliResult<Vec<Vec<f64>>>> = grid
        .par_iter()
        .map(|&x| {
            let temperature = if x == 0.0 { f64::INFINITY } else { t / x };
            let n = fermi_occupations(m, t, temperature, sol.mu);
            Ok(ds
                .iter()
                .zip(separation_rows(&n, &ds)?)
                .map(|(&d, (p11, ef, e))| vec![x, d as f64, e, p11, ef])
                .collect())
        })
        .collect();
    collect_rows(rows, &mut table)?;
    table.plot = Some(PlotSpec {
        title: format!("Free electrons on {m} sites, cooling"),
        x: "separation".into(),
        y: vec!["E_P".into()],
        color: Some("t_over_kT".into()),
        log_x: false,
    });
    Ok(table)
}

fn filling_grid(cfg: &Config, m: usize) -> CliResult<Vec<f64>> {
    let grid = match cfg.get_list::<f64>("filling.values")? {
        Some(v) => v,
        None => (1..m).map(|k| k as f64 / m as f64).collect(),
    };
    if grid.iter().any(|&f| !(f > 0.0 && f < 1.0)) {
        return Err(cfg.error("filling.values", "fillings must lie in (0, 1)").into());
    }
    Ok(grid)
}

/// `T -> 0` free electrons against filling per spin-orbital and separation.
/// `EF_posterior_mirror` is the same quantity at filling `1 - n`.
pub fn cmd_fig_filling(cfg: &Config) -> CliResult<ResultTable> {
    check_keys(
        cfg,
        &keys_with(&["lattice.sites", "lattice.t", "filling.values", "separation.max"], &[]),
    )?;
    let (m, t) = lattice_basics(cfg, 30)?;
    let ds = separations(cfg, m, m / 2)?;
    let grid = filling_grid(cfg, m)?;
    let mut table = ResultTable::new(["filling", "separation", "EF_posterior", "P11", "EF_posterior_mirror"]);
    table.meta("model", format!("free electrons, ring of {m} sites, t={t}, T -> 0"));
    let rows: Vec<CliResult<Vec<Vec<f64>>>> = grid
        .par_iter()
        .map(|&f| {
            let here = separation_rows(&occupations_for_filling(m, t, 0.0, f)?, &ds)?;
            let mirror = separation_rows(&occupations_for_filling(m, t, 0.0, 1.0 - f)?, &ds)?;
            Ok(ds
                .iter()
                .zip(here.iter().zip(&mirror))
                .map(|(&d, (h, r))| vec![f, d as f64, h.1, h.0, r.1])
                .collect())
        })
        .collect();
    collect_rows(rows, &mut table)?;
    table.plot = Some(PlotSpec {
        title: format!("Free electrons on {m} sites, T -> 0"),
        x: "separation".into(),
        y: vec!["EF_posterior".into()],
        color: Some("filling".into()),
        log_x: false,
    });
    Ok(table)
}

fn length_value(r: Option<usize>) -> f64 {
    r.map_or(f64::INFINITY, |r| r as f64)
}

/// Entanglement length of the projected and spin matrices against filling.
pub fn cmd_fig_entlength(cfg: &Config) -> CliResult<ResultTable> {
    check_keys(
        cfg,
        &keys_with(
            &[
                "lattice.sites",
                "lattice.t",
                "lattice.temperature",
                "fit.min",
                "fit.max",
            ],
            &["filling"],
        ),
    )?;
    let (m, t) = lattice_basics(cfg, 1000)?;
    let temperature: f64 = cfg.get_or("lattice.temperature", 0.0)?;
    if !(temperature >= 0.0 && temperature.is_finite()) {
        return Err(cfg
            .error("lattice.temperature", "temperature must be finite and non-negative")
            .into());
    }
    let sweep = Sweep::from_config(cfg, "filling", Sweep::new(0.01, 0.99, 99, Spacing::Linear))?;
    let grid = sweep.values();
    if grid.iter().any(|&f| !(f > 0.0 && f < 1.0)) {
        return Err(cfg.error("filling.start", "fillings must lie in (0, 1)").into());
    }
    let window = (cfg.get_or("fit.min", 0.02)?, cfg.get_or("fit.max", 0.1)?);
    let result = entanglement_length_sweep(m, t, temperature, &grid, window)?;
    let mut table = ResultTable::new(["filling", "inv_filling", "r_e_projected", "r_e_spin"]);
    table.meta(
        "model",
        format!("free electrons, ring of {m} sites, t={t}, T={temperature}"),
    );
    table.meta("filling", sweep.describe());
    table.meta("fit_window", format!("{} to {}", window.0, window.1));
    match result.fit {
        Some(LinearFit {
            slope,
            intercept,
            r_squared,
            points,
        }) => {
            table.meta("fit_slope", format_value(slope));
            table.meta("fit_intercept", format_value(intercept));
            table.meta("fit_r_squared", format_value(r_squared));
            table.meta("fit_points", points);
        }
        None => table.meta("fit_slope", "unavailable"),
    }
    for row in &result.rows {
        table.push(vec![
            row.filling,
            row.inverse_filling,
            length_value(row.r_projected),
            length_value(row.r_spin),
        ]);
    }
    table.plot = Some(PlotSpec {
        title: format!("Entanglement length, {m} sites"),
        x: "inv_filling".into(),
        y: vec!["r_e_projected".into(), "r_e_spin".into()],
        color: None,
        log_x: false,
    });
    Ok(table)
}

/// Parameter varied by a `compute` sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    U,
    T,
    Temperature,
    Mu,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::U => "u",
            SweepAxis::T => "t",
            SweepAxis::Temperature => "temperature",
            SweepAxis::Mu => "mu",
        }
    }
}

impl FromStr for SweepAxis {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        match s {
            "u" => Ok(SweepAxis::U),
            "t" => Ok(SweepAxis::T),
            "temperature" => Ok(SweepAxis::Temperature),
            "mu" => Ok(SweepAxis::Mu),
            _ => Err(()),
        }
    }
}

/// A validated `compute` run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub model: ModelSpec,
    pub particles: Option<usize>,
    pub ensemble: ThermalSpec,
    pub partition: Bipartition,
    pub sweep: Option<(SweepAxis, Sweep)>,
    pub output: Option<String>,
    /// Config lines echoed into the output.
    pub echo: Vec<String>,
}

const COMPUTE_KEYS: &[&str] = &[
    "model.family",
    "model.sites",
    "model.t",
    "model.u",
    "model.particles",
    "model.periodic",
    "ensemble.kind",
    "ensemble.temperature",
    "ensemble.mu",
    "partition.a",
    "partition.b",
    "sweep.axis",
    "sweep.start",
    "sweep.stop",
    "sweep.points",
    "sweep.spacing",
    "output.prefix",
];

impl RunConfig {
    pub fn parse(text: &str) -> CliResult<Self> {
        Self::from_config(&Config::parse(text)?)
    }

    pub fn from_config(cfg: &Config) -> CliResult<Self> {
        cfg.check_keys(COMPUTE_KEYS)?;
        let family: ModelFamily = cfg
            .get::<String>("model.family")?
            .ok_or_else(|| cfg.error("model.family", "missing required key `model.family`"))?
            .parse()
            .map_err(|e: Error| cfg.error("model.family", e.to_string()))?;
        let default_sites = if family == ModelFamily::HubbardDimer { 2 } else { 4 };
        let mut model = ModelSpec::new(
            family,
            cfg.get_or("model.sites", default_sites)?,
            cfg.get_or("model.t", 1.0)?,
            cfg.get_or("model.u", 0.0)?,
        );
        if let Some(s) = cfg.get::<usize>("model.sites")? {
            model.sites = s;
        }
        model.periodic = cfg.get_or("model.periodic", true)?;
        model.validate().map_err(|e| cfg.error("model.sites", e.to_string()))?;
        let particles: Option<usize> = match cfg.get("model.particles")? {
            Some(n) => Some(n),
            None if family == ModelFamily::HubbardDimer => Some(2),
            None => None,
        };
        let kind = cfg.get_or("ensemble.kind", "ground".to_string())?;
        let temperature: f64 = cfg.get_or("ensemble.temperature", 0.0)?;
        let ensemble = match kind.as_str() {
            "ground" => ThermalSpec::ground(),
            "canonical" => ThermalSpec::canonical(temperature),
            "grand-canonical" => ThermalSpec::grand_canonical(temperature, cfg.require("ensemble.mu")?),
            other => return Err(cfg.error("ensemble.kind", format!("unknown ensemble `{other}`")).into()),
        };
        ensemble
            .validate()
            .map_err(|e| cfg.error("ensemble.temperature", e.to_string()))?;
        if ensemble.ensemble == Ensemble::GrandCanonical && particles.is_some() {
            return Err(cfg
                .error(
                    "model.particles",
                    "the grand-canonical ensemble needs the full Fock space; drop model.particles",
                )
                .into());
        }
        if ensemble.ensemble != Ensemble::GrandCanonical && particles.is_none() {
            return Err(cfg
                .error("model.particles", "missing required key `model.particles`")
                .into());
        }
        let a: Vec<usize> = cfg
            .get_list("partition.a")?
            .ok_or_else(|| cfg.error("partition.a", "missing required key `partition.a`"))?;
        let b: Vec<usize> = cfg
            .get_list("partition.b")?
            .ok_or_else(|| cfg.error("partition.b", "missing required key `partition.b`"))?;
        let partition = Bipartition::new(a, b)
            .and_then(|p| p.validate_for(model.modes()).map(|_| p))
            .map_err(|e| cfg.error("partition.a", e.to_string()))?;
        let sweep = match cfg.get::<String>("sweep.axis")? {
            None => {
                if let Some(k) = Sweep::keys("sweep").iter().find(|k| cfg.contains(k)) {
                    return Err(cfg.error(k, "sweep settings need `sweep.axis`").into());
                }
                None
            }
            Some(axis) => {
                let axis: SweepAxis = axis.parse().map_err(|_| {
                    cfg.error(
                        "sweep.axis",
                        format!("unknown sweep axis `{axis}` (u, t, temperature, mu)"),
                    )
                })?;
                if axis == SweepAxis::Mu && ensemble.ensemble != Ensemble::GrandCanonical {
                    return Err(cfg
                        .error("sweep.axis", "a mu sweep needs the grand-canonical ensemble")
                        .into());
                }
                if axis == SweepAxis::Temperature && ensemble.ensemble == Ensemble::Ground {
                    return Err(cfg
                        .error("sweep.axis", "a temperature sweep needs a thermal ensemble")
                        .into());
                }
                for k in ["sweep.start", "sweep.stop"] {
                    if !cfg.contains(k) {
                        return Err(cfg.error(k, format!("missing required key `{k}`")).into());
                    }
                }
                let s = Sweep::from_config(cfg, "sweep", Sweep::new(0.0, 1.0, 11, Spacing::Linear))?;
                if axis == SweepAxis::Temperature && s.values().iter().any(|&x| x < 0.0) {
                    return Err(cfg.error("sweep.start", "temperatures must be non-negative").into());
                }
                Some((axis, s))
            }
        };
        Ok(Self {
            model,
            particles,
            ensemble,
            partition,
            sweep,
            output: cfg.get("output.prefix")?,
            echo: cfg.echo(),
        })
    }
}

fn compute_point(run: &RunConfig, axis: Option<SweepAxis>, x: f64) -> CliResult<EPReport> {
    let mut model = run.model.clone();
    let mut spec = run.ensemble;
    match axis {
        Some(SweepAxis::U) => model.u = x,
        Some(SweepAxis::T) => model.t = x,
        Some(SweepAxis::Temperature) => spec.temperature = x,
        Some(SweepAxis::Mu) => spec.mu = Some(x),
        None => {}
    }
    let h = model.hamiltonian(run.particles)?;
    let rho = match spec.ensemble {
        Ensemble::Ground => ground_state(&h)?.mixture,
        Ensemble::Canonical => ThermalSolver::new(&h)?.state(&spec)?,
        Ensemble::GrandCanonical => {
            let n = Operator::total_number(h.basis(), None)?;
            ThermalSolver::with_number(&h, &n)?.state(&spec)?
        }
    };
    ep(&rho, &run.partition)
}

/// `E_P`, `P_{1,1}` and the posterior `(1,1)` entanglement for every point of
/// the configured sweep (or a single point).
pub fn compute(run: &RunConfig) -> CliResult<ResultTable> {
    let (axis, grid) = match &run.sweep {
        Some((a, s)) => (Some(*a), s.values()),
        None => (None, vec![0.0]),
    };
    let axis_name = axis.map_or("point", SweepAxis::name);
    let mut table = ResultTable::new([axis_name, "E_P", "P11", "EF_posterior"]);
    table.meta("tool", format!("epart {}", env!("CARGO_PKG_VERSION")));
    table.meta("command", "compute");
    for line in &run.echo {
        table.meta("config", line);
    }
    let rows: Vec<CliResult<Vec<Vec<f64>>>> = grid
        .par_iter()
        .map(|&x| {
            let r = compute_point(run, axis, x)?;
            Ok(vec![vec![x, r.total, r.p11(), r.posterior_11()]])
        })
        .collect();
    collect_rows(rows, &mut table)?;
    table.plot = axis.map(|a| PlotSpec {
        title: format!("{} E_P", run.model.family),
        x: a.name().into(),
        y: vec!["E_P".into(), "P11".into(), "EF_posterior".into()],
        color: None,
        log_x: false,
    });
    Ok(table)
}

/// Reads and runs a `compute` config file.
pub fn cmd_compute(path: &Path) -> CliResult<ResultTable> {
    let cfg = load_config(Some(path))?;
    compute(&RunConfig::from_config(&cfg)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(text: &str) -> Config {
        Config::parse(text).unwrap()
    }

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::Usage(String::new()).exit_code(), 1);
        let parse = Config::parse("oops\n").unwrap_err();
        assert_eq!(CliError::Config(parse).exit_code(), 1);
        assert_eq!(CliError::Compute(Error::InvalidSeparation(0)).exit_code(), 2);
    }

    #[test]
    fn compute_spinless_ring() {
        let adjacent = RunConfig::parse(
            "model.family = spinless-fermion-ring\nmodel.sites = 4\nmodel.particles = 2\npartition.a = 0, 1\npartition.b = 2, 3\n",
        )
        .unwrap();
        let t = compute(&adjacent).unwrap();
        assert!((t.column("P11").unwrap()[0] - 0.75).abs() < 1e-10);
        let diagonal = RunConfig::parse(
            "model.family = spinless-fermion-ring\nmodel.particles = 2\npartition.a = 0, 2\npartition.b = 1, 3\nsweep.axis = t\nsweep.start = 0.5\nsweep.stop = 2\nsweep.points = 4\n",
        )
        .unwrap();
        let t = compute(&diagonal).unwrap();
        assert_eq!(t.rows().len(), 4);
        assert!(t.column("E_P").unwrap().iter().all(|&e| e.abs() < 1e-10));
    }

    #[test]
    fn compute_config_errors() {
        let e = RunConfig::parse("model.family = hubbard-dimer\nmodel.uu = 1\n").unwrap_err();
        assert!(e.to_string().contains("line 2") && e.to_string().contains("model.uu"));
        assert_eq!(e.exit_code(), 1);
        let e = RunConfig::parse("model.family = hubbard-dimer\npartition.a = 0\npartition.b = 1, 9\n").unwrap_err();
        assert!(e.to_string().contains("line 2"));
        let e = RunConfig::parse("model.family = dimer\n").unwrap_err();
        assert!(e.to_string().contains("line 1"));
    }

    #[test]
    fn bose_ground_endpoints() {
        let t = cmd_fig_bose_ground(&cfg("sweep.start = 1000\nsweep.stop = 1000.5\nsweep.points = 2\n")).unwrap();
        let ep = t.column("E_P_adjacent").unwrap();
        assert!(ep[0].abs() < 1e-10);
        assert!((ep[1] - 0.1405).abs() < 1e-3);
        assert!(t.column("E_P_diagonal").unwrap().iter().all(|e| e.abs() < 1e-10));
    }

    #[test]
    fn unknown_figure_key() {
        let e = cmd_fig_dimer(&cfg("u_over_t.stop = 5\nkt_over_t.stp = 2\n")).unwrap_err();
        assert_eq!(e.to_string(), "config error: line 2: unknown key `kt_over_t.stp`");
    }

    #[test]
    fn lattice_cool_limits() {
        let t = cmd_fig_lattice_cool(&cfg("t_over_kt.start = 0\nt_over_kt.stop = 1\nt_over_kt.points = 2\n")).unwrap();
        let rows = t.rows();
        let hot: Vec<&Vec<f64>> = rows.iter().filter(|r| r[0] == 0.0).collect();
        assert!(hot.iter().all(|r| (r[3] - 0.25).abs() < 1e-12 && r[2].abs() < 1e-12));
        let cold: Vec<&Vec<f64>> = rows.iter().filter(|r| r[0].is_infinite()).collect();
        let first_zero = cold.iter().find(|r| r[2] < 1e-12).map(|r| r[1]);
        assert_eq!(first_zero, Some(5.0));
    }
}
