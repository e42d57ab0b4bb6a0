use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use floquet_sweep::output::{heatmap_svg, line_chart_svg, Table};
use floquet_sweep::provenance::Provenance;
use floquet_sweep::reports::{self, CHANNELS};
use floquet_sweep::{sweep, ConfigError, RawConfig, RunConfig, SweepResult, WORKERS_ENV};

#[derive(Parser)]
#[command(version, about = "Steady-state entanglement sweeps for a driven, dissipative qubit pair")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Steady state of a single parameter point.
    Point(Common),
    /// Steady-state concurrence over one or two swept parameters.
    Sweep(Common),
    /// Transition rates in four bases against the coupling asymmetry xi.
    Rates(Common),
    /// Stroboscopic populations and concurrence from the ground state.
    Trace(Common),
    /// Static eigenenergies and ground-state concurrence against eps0.
    Spectrum(Common),
}

#[derive(Args)]
struct Common {
    /// Flat `key = value` configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override one key, e.g. `--set bath.xi=0.1`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    sets: Vec<String>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Worker threads [default: available parallelism]
    #[arg(long, env = WORKERS_ENV)]
    workers: Option<usize>,
    #[arg(long, value_enum, default_value_t = Format::CsvPlot)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    #[value(name = "csv+plot")]
    CsvPlot,
}

enum Failure {
    Config(ConfigError),
    Io(std::io::Error),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e)
    }
}

fn resolve(common: &Common) -> Result<RunConfig, ConfigError> {
    let mut raw = match &common.config {
        Some(path) => RawConfig::load(path)?,
        None => RawConfig::default(),
    };
    for s in &common.sets {
        raw.set_assignment(s)?;
    }
    raw.resolve()
}

struct Outputs<'a> {
    dir: &'a Path,
    plot: bool,
    files: Vec<String>,
}

impl Outputs<'_> {
    fn csv(&mut self, product: &str, table: &Table) -> std::io::Result<()> {
        let name = format!("{product}.csv");
        table.write_csv(&self.dir.join(&name))?;
        self.files.push(name);
        Ok(())
    }

    fn svg(&mut self, product: &str, svg: impl FnOnce() -> String) -> std::io::Result<()> {
        if !self.plot {
            return Ok(());
        }
        let name = format!("{product}.svg");
        std::fs::write(self.dir.join(&name), svg())?;
        self.files.push(name);
        Ok(())
    }
}

fn sweep_plot(res: &SweepResult) -> Option<String> {
    let x = res.x?;
    let title = "steady-state concurrence C_inf";
    Some(match res.y {
        Some(y) => heatmap_svg(title, x.name.as_str(), y.name.as_str(), &x.values(), &y.values(), &res.concurrence_grid()),
        None => {
            let t = res.table();
            let series: Vec<(&str, Vec<f64>)> =
                ["C_inf", "P0", "P1", "P2", "P3"].iter().map(|&k| (k, t.column(k))).collect();
            line_chart_svg(title, x.name.as_str(), "C_inf, P_k", &x.values(), &series, false)
        }
    })
}

fn run(command: &Command, common: &Common, label: &str) -> Result<usize, Failure> {
    let start = Instant::now();
    let cfg = resolve(common)?;
    let workers = common
        .workers
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
        .max(1);
    std::fs::create_dir_all(&common.out)?;
    let mut out = Outputs {
        dir: &common.out,
        plot: common.format == Format::CsvPlot,
        files: Vec::new(),
    };
    let mut extra = Vec::new();
    let failures = match command {
        Command::Point(_) => {
            if cfg.x.is_some() {
                return Err(ConfigError::Invalid("point takes no sweep axes; use the sweep subcommand".into()).into());
            }
            let res = sweep(&cfg, 1);
            out.csv("point", &res.table())?;
            res.failures()
        }
        Command::Sweep(_) => {
            let res = sweep(&cfg, workers);
            out.csv("steady_concurrence", &res.table())?;
            if let Some(svg) = sweep_plot(&res) {
                out.svg("steady_concurrence", || svg)?;
            }
            res.failures()
        }
        Command::Rates(_) => {
            let rep = reports::rates_report(&cfg)?;
            out.csv("rates_vs_xi", &rep.table)?;
            out.csv("rates_vs_xi_crossover", &rep.crossover_table())?;
            for (basis, roots) in &rep.crossovers {
                let v = match roots {
                    Ok(r) => r.iter().map(|x| format!("{x:.10}")).collect::<Vec<_>>().join(" "),
                    Err(e) => format!("error: {e}"),
                };
                extra.push((format!("xi_c.{basis}"), if v.is_empty() { "none".into() } else { v }));
            }
            out.svg("rates_vs_xi", || {
                let names: Vec<String> = ["fgr", "floquet"]
                    .iter()
                    .flat_map(|b| CHANNELS[..3].iter().map(move |(i, f)| format!("{b}_{i}{f}")))
                    .collect();
                let series: Vec<(&str, Vec<f64>)> = names.iter().map(|n| (n.as_str(), rep.table.column(n))).collect();
                line_chart_svg("transition rates", "xi", "rate", &rep.table.column("xi"), &series, true)
            })?;
            rep.failures()
        }
        Command::Trace(_) => {
            let table = reports::trace_report(&cfg)?;
            out.csv("populations_trace", &table)?;
            out.svg("populations_trace", || {
                let log = cfg.numerics.log_points > 0;
                let t: Vec<f64> = table
                    .column("t_over_tau")
                    .iter()
                    .map(|&t| if log { if t > 0.0 { t.log10() } else { f64::NAN } } else { t })
                    .collect();
                let series: Vec<(&str, Vec<f64>)> =
                    ["P0", "P1", "P2", "P3", "C"].iter().map(|&k| (k, table.column(k))).collect();
                let xlabel = if log { "log10 t/tau" } else { "t/tau" };
                line_chart_svg("populations and concurrence", xlabel, "P_k, C", &t, &series, false)
            })?;
            table.error_rows()
        }
        Command::Spectrum(_) => {
            let table = reports::spectrum_report(&cfg)?;
            out.csv("spectrum", &table)?;
            out.svg("spectrum", || {
                let series: Vec<(&str, Vec<f64>)> =
                    ["E0", "E1", "E2", "E3", "C_ground"].iter().map(|&k| (k, table.column(k))).collect();
                line_chart_svg("H0 spectrum", "eps0", "E, C_ground", &table.column("eps0"), &series, false)
            })?;
            0
        }
    };
    let prov = Provenance {
        command: label.to_string(),
        config: cfg,
        workers,
        wall_time: start.elapsed(),
        files: out.files,
        failures,
        extra,
    };
    std::fs::write(common.out.join("provenance.txt"), prov.render())?;
    Ok(failures)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (common, label) = match &cli.command {
        Command::Point(c) => (c, "point"),
        Command::Sweep(c) => (c, "sweep"),
        Command::Rates(c) => (c, "rates"),
        Command::Trace(c) => (c, "trace"),
        Command::Spectrum(c) => (c, "spectrum"),
    };
    match run(&cli.command, common, label) {
        Ok(0) => ExitCode::SUCCESS,
        Ok(n) => {
            eprintln!("{n} point(s) failed; see the error column");
            ExitCode::from(3)
        }
        Err(Failure::Config(e)) => {
            eprintln!("config error: {e}");
            ExitCode::from(2)
        }
        Err(Failure::Io(e)) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
