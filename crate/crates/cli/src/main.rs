use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::anyhow;
use clap::{Parser, Subcommand};
use qvortex_cli::commands::{with_threads, CmdResult};
use qvortex_cli::{cmd_coupler, cmd_field, cmd_sit, cmd_verify, cmd_wigner, CmdError, CouplerRequest, RunConfig};
use qvortex_core::io::Clamp;
use qvortex_core::wigner::SlicePlane;

#[derive(Parser, Debug)]
#[command(name = "qvortex", version, about = "Displaced elliptical vortex states in phase space")]
struct Cli {
    /// Worker threads for grid sampling [default: available parallelism]
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Debug)]
struct Common {
    /// Run configuration (TOML)
    #[arg(long)]
    config: PathBuf,
    /// Output directory [default: `out_dir` from the config, else ./out]
    #[arg(long)]
    out: Option<PathBuf>,
    /// Render range for PGM output: a positive number c for [−c, c], or auto
    #[arg(long)]
    clamp: Option<String>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Position-space intensity |ψ|²
    Field(Common),
    /// Wigner slices (one plane, or all six)
    Wigner {
        #[command(flatten)]
        common: Common,
        /// xy, pxpy, xpx, ypy, xpy, ypx or all
        #[arg(long, default_value = "all")]
        plane: String,
    },
    /// Scaled interference terms
    Sit {
        #[command(flatten)]
        common: Common,
        /// Single vorticity [default: `sit_m` from the config, else 1..=4]
        #[arg(long)]
        m: Option<usize>,
    },
    /// Checks the closed form against the numerical transform
    Verify {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Coupler coefficients
    #[command(subcommand)]
    Coupler(CouplerCommand),
}

#[derive(Subcommand, Debug)]
enum CouplerCommand {
    /// Beam splitter with mixing angle θ and phase φ
    Bs {
        #[arg(long, allow_hyphen_values = true)]
        theta: f64,
        #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
        phi: f64,
    },
    /// Directional coupler after time t
    Dcdc {
        #[arg(long)]
        g: f64,
        #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
        delta: f64,
        #[arg(long)]
        t: f64,
    },
    /// Shortest directional-coupler time giving |A1|/|A2| = ratio
    Ratio {
        #[arg(long)]
        ratio: f64,
        #[arg(long)]
        g: f64,
        #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
        delta: f64,
    },
}

fn load(path: &Path) -> CmdResult<RunConfig> {
    RunConfig::load(path).map_err(CmdError::Config)
}

fn out_dir(flag: Option<PathBuf>, cfg: &RunConfig) -> PathBuf {
    flag.or_else(|| cfg.out_dir.clone()).unwrap_or_else(|| PathBuf::from("out"))
}

fn clamp(flag: Option<&str>, cfg: &RunConfig) -> CmdResult<Clamp> {
    match flag {
        Some(s) => s.parse().map_err(|e| CmdError::Config(anyhow!("--clamp: {e}"))),
        None => cfg.clamp().map_err(CmdError::Config),
    }
}

fn print_files(files: &[PathBuf]) {
    for f in files {
        println!("{}", f.display());
    }
}

fn run(command: Command) -> CmdResult<()> {
    match command {
        Command::Field(c) => {
            let cfg = load(&c.config)?;
            let clamp = clamp(c.clamp.as_deref(), &cfg)?;
            print_files(&cmd_field(&cfg, &out_dir(c.out, &cfg), clamp)?);
        }
        Command::Wigner { common: c, plane } => {
            let cfg = load(&c.config)?;
            let clamp = clamp(c.clamp.as_deref(), &cfg)?;
            let planes = if plane.eq_ignore_ascii_case("all") {
                SlicePlane::ALL.to_vec()
            } else {
                vec![plane.parse().map_err(|e| CmdError::Config(anyhow!("--plane: {e}")))?]
            };
            print_files(&cmd_wigner(&cfg, &planes, &out_dir(c.out, &cfg), clamp)?);
        }
        Command::Sit { common: c, m } => {
            let cfg = load(&c.config)?;
            let clamp = clamp(c.clamp.as_deref(), &cfg)?;
            let ms = m.map(|m| vec![m]).unwrap_or_else(|| cfg.sit_ms());
            print_files(&cmd_sit(&cfg, &ms, &out_dir(c.out, &cfg), clamp)?);
        }
        Command::Verify { config, out } => {
            let cfg = load(&config)?;
            let outcome = cmd_verify(&cfg, &out_dir(out, &cfg))?;
            for s in &outcome.suites {
                println!("{} {}: {}", if s.passed { "PASS" } else { "FAIL" }, s.name, s.detail);
            }
            println!("verdict={}", outcome.verdict);
            println!("report: {}", outcome.report.display());
            outcome.status()?;
        }
        Command::Coupler(c) => {
            let req = match c {
                CouplerCommand::Bs { theta, phi } => CouplerRequest::Bs { theta, phi },
                CouplerCommand::Dcdc { g, delta, t } => CouplerRequest::Dcdc { g, delta, t },
                CouplerCommand::Ratio { ratio, g, delta } => CouplerRequest::Ratio { ratio, g, delta },
            };
            print!("{}", cmd_coupler(req)?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match with_threads(cli.threads, || run(cli.command)) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(e)) => {
            eprintln!("qvortex: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("qvortex: {e:#}");
            ExitCode::from(2)
        }
    }
}
