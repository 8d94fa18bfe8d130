use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use shellstat_cli::commands::{
    cmd_analyze, cmd_scaling, cmd_sweep, cmd_walk, render_scaling, render_sweep,
};
use shellstat_cli::config::{parse_list, OutputFormat, RunConfig};
use shellstat_cli::verify::{cmd_verify_paper, render_verify, VerifyTolerances};
use shellstat_cli::{exit, CliError};
use shellstat_core::{MeasureSpec, SamplerMethod};

#[derive(Debug, Clone)]
struct List(Vec<f64>);

fn list(s: &str) -> Result<List, String> {
    parse_list(s).map(List)
}

#[derive(Parser, Debug)]
#[command(
    name = "shellstat",
    version,
    about = "Microcanonical energy-shell averages versus the canonical distribution",
    after_help = "Exit codes: 0 success, 1 i/o, 2 configuration, 3 infeasible energy, \
                  4 sampler failure, 5 verification failure."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Ensemble mean, canonical fit and discrepancy for one shell.
    Analyze(Common),
    /// `analyze` over a grid of energies, one CSV row per energy.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Comma-separated energy grid.
        #[arg(long, value_parser = list, allow_hyphen_values = true)]
        energies: Option<List>,
    },
    /// Discrepancy versus level count on random spectra.
    Scaling {
        #[command(flatten)]
        common: Common,
        /// Smallest level count [default: 3].
        #[arg(long)]
        n_min: Option<usize>,
        /// Largest level count [default: 8].
        #[arg(long)]
        n_max: Option<usize>,
        /// Random spectra per level count [default: 30].
        #[arg(long)]
        trials: Option<usize>,
        /// Energy placement between lowest and highest level [default: 0.25].
        #[arg(long)]
        quantile: Option<f64>,
    },
    /// Metropolis walk on the shell; time average versus ensemble average.
    Walk {
        #[command(flatten)]
        common: Common,
        /// Recorded walk steps after burn-in [default: 1000000].
        #[arg(long)]
        steps: Option<usize>,
        /// Proposal half-width in free coordinates [default: 0.05].
        #[arg(long)]
        step_scale: Option<f64>,
        /// Walk steps discarded before recording [default: 10000].
        #[arg(long)]
        burn_in: Option<usize>,
        /// Record every k-th step [default: 10].
        #[arg(long)]
        record_every: Option<usize>,
        /// Write recorded states as CSV (step, p_1..p_N).
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Recompute the two worked three-level cases and check every reported value.
    VerifyPaper {
        /// Output format [default: table].
        #[arg(long)]
        format: Option<OutputFormat>,
        /// Write output to a file instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Tolerance on microcanonical means [default: 0.001].
        #[arg(long)]
        mean_tol: Option<f64>,
        /// Tolerance on beta [default: 0.002].
        #[arg(long)]
        beta_tol: Option<f64>,
        /// Tolerance on canonical probabilities [default: 0.003].
        #[arg(long)]
        prob_tol: Option<f64>,
    },
}

#[derive(Args, Debug)]
struct Common {
    /// Comma-separated, strictly increasing energy levels.
    #[arg(long, value_parser = list, allow_hyphen_values = true)]
    levels: Option<List>,
    /// Total energy of the shell.
    #[arg(long, allow_hyphen_values = true)]
    energy: Option<f64>,
    /// Shell measure: amplitude | flat [default: amplitude].
    #[arg(long)]
    measure: Option<MeasureSpec>,
    /// Monte Carlo samples [default: 100000].
    #[arg(long)]
    samples: Option<usize>,
    /// Seed for sampler and walk [default: 42].
    #[arg(long)]
    seed: Option<u64>,
    /// Sampler: auto | rejection | hit-and-run [default: auto].
    #[arg(long)]
    method: Option<SamplerMethod>,
    /// Hit-and-run steps per recorded sample [default: 1].
    #[arg(long)]
    thinning: Option<usize>,
    /// Hit-and-run burn-in steps [default: 10 * N * thinning].
    #[arg(long)]
    sampler_burn_in: Option<usize>,
    /// Sample even where a closed form exists.
    #[arg(long)]
    force_monte_carlo: bool,
    /// Energy residual accepted by the beta fit [default: 1e-10].
    #[arg(long)]
    fit_tol: Option<f64>,
    /// Output format: table | json | csv [default: table; csv for sweep and scaling].
    #[arg(long)]
    format: Option<OutputFormat>,
    /// JSON run configuration; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Write output to a file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Common {
    fn resolve(&self) -> Result<RunConfig, CliError> {
        let mut c = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        if let Some(List(levels)) = &self.levels {
            c.levels = levels.clone();
        }
        if let Some(e) = self.energy {
            c.total_energy = Some(e);
        }
        if let Some(m) = self.measure {
            c.measure = m;
        }
        if let Some(n) = self.samples {
            c.sampler.samples = n;
        }
        if let Some(s) = self.seed {
            c.sampler.seed = s;
            c.walk.seed = s;
        }
        if let Some(m) = self.method {
            c.sampler.method = m;
        }
        if let Some(t) = self.thinning {
            c.sampler.thinning = t;
        }
        if let Some(b) = self.sampler_burn_in {
            c.sampler.burn_in = Some(b);
        }
        if self.force_monte_carlo {
            c.sampler.force_monte_carlo = true;
        }
        if let Some(t) = self.fit_tol {
            c.tolerances.fit_tol = t;
        }
        if let Some(f) = self.format {
            c.output_format = Some(f);
        }
        Ok(c)
    }
}

fn emit(text: &str, out: Option<&PathBuf>) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| CliError::Io(e.to_string()))
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Analyze(common) => {
            let config = common.resolve()?;
            let doc = cmd_analyze(&config)?;
            emit(&doc.render(config.output_format.unwrap_or_default()), common.out.as_ref())
        }
        Command::Sweep { common, energies } => {
            let mut config = common.resolve()?;
            if let Some(List(e)) = energies {
                config.energies = e;
            }
            let rows = cmd_sweep(&config)?;
            let format = config.output_format.unwrap_or(OutputFormat::Csv);
            emit(&render_sweep(config.levels.len(), &rows, format), common.out.as_ref())
        }
        Command::Scaling {
            common,
            n_min,
            n_max,
            trials,
            quantile,
        } => {
            let mut config = common.resolve()?;
            if let Some(v) = n_min {
                config.scaling.n_min = v;
            }
            if let Some(v) = n_max {
                config.scaling.n_max = v;
            }
            if let Some(v) = trials {
                config.scaling.trials = v;
            }
            if let Some(v) = quantile {
                config.scaling.energy_quantile = v;
            }
            let out = cmd_scaling(&config)?;
            let format = config.output_format.unwrap_or(OutputFormat::Csv);
            emit(&render_scaling(&out, format), common.out.as_ref())
        }
        Command::Walk {
            common,
            steps,
            step_scale,
            burn_in,
            record_every,
            trace,
        } => {
            let mut config = common.resolve()?;
            if let Some(v) = steps {
                config.walk.steps = v;
            }
            if let Some(v) = step_scale {
                config.walk.step_scale = v;
            }
            if let Some(v) = burn_in {
                config.walk.burn_in = v;
            }
            if let Some(v) = record_every {
                config.walk.record_every = v;
            }
            let doc = cmd_walk(&config, trace.as_deref())?;
            emit(&doc.render(config.output_format.unwrap_or_default()), common.out.as_ref())
        }
        Command::VerifyPaper {
            format,
            out,
            mean_tol,
            beta_tol,
            prob_tol,
        } => {
            let mut tol = VerifyTolerances::default();
            if let Some(v) = mean_tol {
                tol.mean = v;
            }
            if let Some(v) = beta_tol {
                tol.beta = v;
            }
            if let Some(v) = prob_tol {
                tol.probability = v;
            }
            let report = cmd_verify_paper(&tol)?;
            emit(&render_verify(&report, format.unwrap_or_default()), out.as_ref())?;
            if report.all_pass {
                Ok(())
            } else {
                Err(CliError::Verification)
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::from(exit::SUCCESS as u8),
        Err(e) => {
            eprintln!("shellstat: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
