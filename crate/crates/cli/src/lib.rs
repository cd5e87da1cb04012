//! `buckle` command line: run a config file or a preset, or run an oracle.
//!
//! Exit codes: 0 success, 2 bad input (arguments, config, preset or oracle
//! name), 3 failure while running (solver, I/O, or a failed oracle check).

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use buckle::adapt::{adaptive_loop_with, AdaptRecord, StepState};
use buckle::config::RunConfig;
use buckle::io::{export_history, export_vtk, parse_config, preset, serialize_config, Field};
use buckle::verify::oracle;
use buckle::Error;
use clap::{Args, Parser, Subcommand};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;

/// Environment variable that overrides `--out`.
pub const OUT_ENV: &str = "BUCKLE_OUT_DIR";

#[derive(Parser, Debug)]
#[command(name = "buckle", version, about = "Adaptive c/dG buckling analysis of Kirchhoff-Love plates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the adaptive loop from a config file.
    Run {
        config: PathBuf,
        #[command(flatten)]
        flags: RunFlags,
    },
    /// Run a named preset.
    Preset {
        name: String,
        #[command(flatten)]
        flags: RunFlags,
    },
    /// Run a verification oracle and print PASS/FAIL lines.
    Oracle { name: String },
}

#[derive(Args, Debug)]
struct RunFlags {
    /// Output directory; `BUCKLE_OUT_DIR` takes precedence.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Maximum number of refinement steps.
    #[arg(long)]
    steps: Option<usize>,
    /// DOF budget.
    #[arg(long)]
    dofs: Option<usize>,
}

fn exit_code(e: &Error) -> i32 {
    if e.is_config_error() {
        EXIT_CONFIG
    } else {
        EXIT_SOLVER
    }
}

/// Parses `args` (program name first) and executes the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_with_env(args, std::env::var_os(OUT_ENV).map(PathBuf::from))
}

/// As [`run`] with the `BUCKLE_OUT_DIR` value passed explicitly.
pub fn run_with_env<I, T>(args: I, env_out: Option<PathBuf>) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    let result = match cli.command {
        Command::Run { config, flags } => fs::read_to_string(&config)
            .map_err(|e| Error::ConfigValue {
                field: "config".into(),
                message: format!("cannot read {}: {e}", config.display()),
            })
            .and_then(|text| parse_config(&text))
            .and_then(|cfg| execute(cfg, &flags, env_out)),
        Command::Preset { name, flags } => preset(&name).and_then(|cfg| execute(cfg, &flags, env_out)),
        Command::Oracle { name } => return run_oracle(&name),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn run_oracle(name: &str) -> i32 {
    match oracle(name) {
        Ok(checks) => {
            for c in &checks {
                println!("{c}");
            }
            if checks.iter().all(|c| c.passed) {
                EXIT_OK
            } else {
                EXIT_SOLVER
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn apply_flags(mut cfg: RunConfig, flags: &RunFlags, env_out: Option<PathBuf>) -> buckle::Result<RunConfig> {
    if let Some(s) = flags.steps {
        cfg.max_steps = s;
    }
    if let Some(d) = flags.dofs {
        cfg.max_dofs = d;
    }
    if let Some(o) = env_out.or_else(|| flags.out.clone()) {
        cfg.output = o;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn write_step(dir: &Path, state: &StepState) -> buckle::Result<()> {
    let mesh = &state.mesh;
    let nv = mesh.n_vertices();
    // scalar spaces number vertex nodes first
    let names: Vec<String> = (1..=state.modes.len()).map(|i| format!("mode_{i}")).collect();
    let mut point: Vec<Field> = names.iter().zip(&state.modes).map(|(n, m)| (n.as_str(), &m[..nv])).collect();
    let membrane: Option<[Vec<f64>; 2]> = state
        .membrane
        .as_ref()
        .map(|m| [0, 1].map(|c| (0..nv).map(|v| m.displacement[2 * v + c]).collect()));
    if let Some([ux, uy]) = &membrane {
        point.push(("membrane_x", ux));
        point.push(("membrane_y", uy));
    }
    let cell: [Field; 1] = [("eta", &state.indicators.eta)];
    export_vtk(mesh, &point, &cell, &dir.join(format!("step_{:03}.vtk", state.step)))
}

fn execute(cfg: RunConfig, flags: &RunFlags, env_out: Option<PathBuf>) -> buckle::Result<()> {
    let cfg = apply_flags(cfg, flags, env_out)?;
    let dir = cfg.output.clone();
    fs::create_dir_all(&dir)?;
    fs::write(dir.join("config.toml"), serialize_config(&cfg))?;
    let history = dir.join("history.csv");
    let mut records: Vec<AdaptRecord> = Vec::new();
    let run = adaptive_loop_with(&cfg, |state, rec| {
        write_step(&dir, state)?;
        records.push(rec.clone());
        export_history(&records, &history)?;
        let eff = rec.effectivity.map_or(String::new(), |e| format!(", effectivity {e:.3}"));
        println!(
            "step {:>2}: {:>7} dofs {:>6} elements  lambda_{} = {:.10}  estimate {:.4e}{eff}",
            rec.step,
            rec.n_dofs,
            rec.n_elements,
            rec.tracked + 1,
            rec.target_lambda(),
            rec.estimate
        );
        Ok(())
    })?;
    println!("wrote {} steps to {}", run.records.len(), dir.display());
    Ok(())
}
