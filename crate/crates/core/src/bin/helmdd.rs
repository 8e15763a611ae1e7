use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use helmdd::harness::{
    self, format_table, parse_config, parse_residual_norm, parse_selection, parse_sweep_spec,
    run_and_write,
};
use helmdd::linalg::ResidualNorm;
use helmdd::preconditioner::{CoarseMode, SelectionPolicy};
use helmdd::solver::{solve, PreconKind, SolveConfig};
use helmdd::Error;

#[derive(Parser)]
#[command(
    name = "helmdd",
    version,
    about = "Schwarz-preconditioned GMRES for P1 Helmholtz problems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct Common {
    /// Random initial guess seed (single solve) or seed list start (presets)
    #[arg(long)]
    seed: Option<u64>,
    /// GMRES relative residual tolerance
    #[arg(long)]
    tol: Option<f64>,
    /// GMRES iteration cap
    #[arg(long)]
    max_iter: Option<usize>,
    /// Stopping rule normalization: rhs or initial
    #[arg(long, value_parser = parse_residual_norm)]
    residual_norm: Option<ResidualNorm>,
    /// Normalization for the reported iteration count: rhs or initial
    #[arg(long, value_parser = parse_residual_norm)]
    count_norm: Option<ResidualNorm>,
    /// Output file (JSON report for solve, CSV for sweeps)
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Common {
    fn apply(&self, c: &mut SolveConfig) {
        if let Some(s) = self.seed {
            c.seed = s;
        }
        if let Some(t) = self.tol {
            c.tol = t;
        }
        if let Some(m) = self.max_iter {
            c.max_iter = m;
        }
        if let Some(r) = self.residual_norm {
            c.residual_norm = r;
        }
        if let Some(r) = self.count_norm {
            c.count_norm = r;
        }
    }

    /// Three consecutive seeds from `--seed` (default 0).
    fn seeds(&self) -> Vec<u64> {
        let s = self.seed.unwrap_or(0);
        vec![s, s + 1, s + 2]
    }
}

#[derive(Args)]
struct PresetArgs {
    /// Drop wavenumbers above this value
    #[arg(long)]
    kmax: Option<f64>,
    /// Use the full wavenumber range up to k = 80 (slow)
    #[arg(long)]
    full: bool,
    /// Concurrent configurations
    #[arg(long, default_value_t = 1)]
    workers: usize,
    #[command(flatten)]
    common: Common,
}

#[derive(Subcommand)]
enum Command {
    /// Run one solve from flags or a key = value config file
    Solve {
        /// Config file; flags override its values
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        dim: Option<usize>,
        #[arg(long)]
        k: Option<f64>,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        alpha_prime: Option<f64>,
        /// Absorption exponent, ε_prec = k^β; "none" for no absorption
        #[arg(long)]
        beta: Option<String>,
        /// none, one_level, grid or dtn
        #[arg(long, value_parser = |s: &str| PreconKind::parse(s))]
        precon: Option<PreconKind>,
        /// additive or hybrid
        #[arg(long, value_parser = |s: &str| CoarseMode::parse(s))]
        mode: Option<CoarseMode>,
        /// automatic, fixed:m or capped:m
        #[arg(long, value_parser = parse_selection)]
        selection: Option<SelectionPolicy>,
        #[arg(long)]
        subdomains_per_dim: Option<usize>,
        #[arg(long)]
        coarse_intervals: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Run a sweep specification file
    Sweep {
        spec: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// 2d preset: α ∈ {0.6, 0.8, 1}, β ∈ {1, 2}, all preconditioners
    Table1Desk(PresetArgs),
    /// 2d preset: grid and DtN coarse spaces forced to comparable sizes
    Table2Desk(PresetArgs),
    /// 3d preset: α' = 1.5 - α, DtN capped at 20 per subdomain
    Table3Desk(PresetArgs),
}

fn read(path: &Path) -> Result<String, Error> {
    std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn usage_error(e: &Error) -> bool {
    matches!(
        e,
        Error::Io { .. } | Error::Parse { .. } | Error::InvalidArgument(_)
    )
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Solve {
            config,
            dim,
            k,
            alpha,
            alpha_prime,
            beta,
            precon,
            mode,
            selection,
            subdomains_per_dim,
            coarse_intervals,
            common,
        } => {
            let mut c = match &config {
                Some(path) => parse_config(&read(path)?)?,
                None => SolveConfig::new(
                    dim.unwrap_or(2),
                    k.ok_or_else(|| Error::invalid("--k is required without --config"))?,
                    alpha.unwrap_or(1.0),
                ),
            };
            if config.is_some() {
                dim.inspect(|&d| c.dim = d);
                k.inspect(|&v| c.k = v);
                alpha.inspect(|&v| c.alpha = v);
            }
            if let Some(v) = alpha_prime {
                c.alpha_prime = Some(v);
            }
            if let Some(b) = beta {
                c.beta = if b.eq_ignore_ascii_case("none") {
                    None
                } else {
                    Some(
                        b.parse()
                            .map_err(|_| Error::invalid(format!("invalid --beta '{b}'")))?,
                    )
                };
            }
            precon.inspect(|&p| c.precon = p);
            mode.inspect(|&m| c.mode = m);
            selection.inspect(|&s| c.selection = s);
            subdomains_per_dim.inspect(|&n| c.subdomains_per_dim = Some(n));
            coarse_intervals.inspect(|&n| c.coarse_intervals = Some(n));
            common.apply(&mut c);
            c.validate()?;
            let report = solve(&c)?;
            println!(
                "precon={} n={} N_sub={} n_CS={} iterations={} arnoldi_steps={} converged={} residual={:.3e} verified={:.3e} setup={:.2}s solve={:.2}s",
                harness::precon_label(&c),
                report.n,
                report.n_sub,
                report.n_cs,
                report.iterations,
                report.arnoldi_steps,
                report.converged,
                report.final_residual(),
                report.verified_residual,
                report.timings.setup_seconds,
                report.timings.solve_seconds
            );
            if let Some(out) = &common.out {
                let json = serde_json::to_string_pretty(&report)?;
                std::fs::write(out, json).map_err(|source| Error::Io {
                    path: out.clone(),
                    source,
                })?;
            }
        }
        Command::Sweep { spec, common } => {
            let mut s = parse_sweep_spec(&read(&spec)?)?;
            common.apply(&mut s.base);
            if let Some(seed) = common.seed {
                s.seeds = vec![seed];
            }
            if common.out.is_some() {
                s.output = common.out.clone();
            }
            let configs = s.configs()?;
            finish(
                run_and_write(&configs, &s.seeds, s.workers, s.output.as_deref())?,
                s.base.max_iter,
                s.output.as_deref(),
            );
        }
        Command::Table1Desk(p) => {
            warn_full(p.full);
            let mut s = harness::table1_spec(p.kmax, p.full);
            p.common.apply(&mut s.base);
            run_preset(s.configs()?, &p)?;
        }
        Command::Table2Desk(p) => {
            warn_full(p.full);
            let mut base = SolveConfig::new(2, 1.0, 1.0);
            p.common.apply(&mut base);
            let ks = harness::table2_ks(p.kmax, p.full);
            let mut configs = Vec::new();
            for alpha in harness::TABLE2_ALPHAS {
                configs.extend(harness::table2_configs(&ks, alpha, &base, p.workers)?);
            }
            run_preset(configs, &p)?;
        }
        Command::Table3Desk(p) => {
            warn_full(p.full);
            let mut s = harness::table3_spec(p.kmax, p.full);
            p.common.apply(&mut s.base);
            run_preset(s.configs()?, &p)?;
        }
    }
    Ok(())
}

fn warn_full(full: bool) {
    if full {
        eprintln!("warning: --full runs wavenumbers up to 80; expect hours of runtime and tens of GB of memory");
    }
}

fn run_preset(configs: Vec<SolveConfig>, p: &PresetArgs) -> Result<(), Error> {
    let max_iter = configs.first().map_or(500, |c| c.max_iter);
    let result = run_and_write(
        &configs,
        &p.common.seeds(),
        p.workers,
        p.common.out.as_deref(),
    )?;
    finish(result, max_iter, p.common.out.as_deref());
    Ok(())
}

fn finish(result: harness::SweepResult, max_iter: usize, out: Option<&Path>) {
    print!("{}", format_table(&result.summary, max_iter));
    for r in &result.records {
        if let Err(e) = &r.result {
            eprintln!(
                "failed: k={} alpha={} precon={} seed={}: {e}",
                r.config.k, r.config.alpha, r.row.precon, r.seed
            );
        }
    }
    if let Some(path) = out {
        println!(
            "rows: {}  summary: {}",
            path.display(),
            harness::summary_path(path).display()
        );
    }
    println!("elapsed {:.1}s", result.elapsed_seconds);
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    ExitCode::SUCCESS
                }
                _ => ExitCode::from(2),
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if usage_error(&e) {
                ExitCode::from(2)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
