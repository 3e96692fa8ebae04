use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use dirac_core::norms::{NormSpec, SlobodeckijForm};
use dirac_core::DomainTag;
use dirac_lab::config::{parse_experiment, parse_list};
use dirac_lab::{run_experiment, Experiment, ExperimentConfig, UsageError, OUT_DIR_ENV};

#[derive(Parser)]
#[command(name = "dirac-lab", version, about = "Clifford-analysis experiments: transforms, norms and boundary value problems")]
struct Cli {
    /// JSON config; flags given on the command line override its entries.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Cap on worker threads.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output directory (otherwise $DIRAC_LAB_OUT_DIR, then the config, then ./out).
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Also write the meshes as CSV.
    #[arg(long, global = true)]
    dump_mesh: bool,
    /// Also write the solution at the cell centres as CSV (solve only).
    #[arg(long, global = true)]
    dump_field: bool,
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    #[arg(long, global = true, value_parser = parse_domain)]
    domain: Option<DomainTag>,
    #[arg(long, global = true)]
    dim: Option<usize>,
    #[arg(long, global = true)]
    resolution: Option<usize>,
    #[arg(long, global = true)]
    boundary_resolution: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Interior sample points.
    #[arg(long, global = true)]
    points: Option<usize>,
    /// Minimum distance of sample points from the boundary.
    #[arg(long, global = true)]
    margin: Option<f64>,
    #[arg(long, global = true)]
    p: Option<f64>,
    #[arg(long, global = true)]
    k: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment named in --config.
    Run,
    /// Check blade products against a symbol-sort oracle and print the table.
    VerifyAlgebra {
        #[arg(long)]
        n: Option<usize>,
    },
    /// Borel–Pompeiu residuals of manufactured fields.
    BorelPompeiu {
        /// Comma-separated field names.
        #[arg(long)]
        fields: Option<String>,
    },
    /// Solve a manufactured first- or second-order problem.
    Solve {
        #[arg(long)]
        order: Option<u8>,
        #[arg(long)]
        case: Option<String>,
        /// Attach an estimate report (default: first order only).
        #[arg(long)]
        estimate: Option<bool>,
        #[arg(long)]
        norm_resolution: Option<usize>,
    },
    /// One norm of a named field.
    Norm {
        #[arg(long)]
        field: Option<String>,
        #[arg(long, value_enum)]
        kind: Option<NormKind>,
        /// Smoothness λ of the Slobodeckij norm or exponent of the Hölder norm.
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long, value_enum)]
        form: Option<Form>,
        #[arg(long)]
        pairs: Option<usize>,
    },
    /// Empirical constants of the norm estimate over a random family.
    EstimateConstants {
        #[arg(long)]
        family: Option<String>,
        #[arg(long)]
        count: Option<usize>,
        /// Use the Hölder-embedding form (set --p to twice the dimension).
        #[arg(long)]
        holder: bool,
        #[arg(long)]
        norm_resolution: Option<usize>,
    },
    /// Refinement study of borel-pompeiu or solve.
    Convergence {
        #[arg(long = "experiment")]
        study: Option<String>,
        #[arg(long)]
        resolutions: Option<String>,
        #[arg(long)]
        fields: Option<String>,
        #[arg(long)]
        order: Option<u8>,
        #[arg(long)]
        case: Option<String>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum NormKind {
    Sobolev,
    Slobodeckij,
    DualLower,
    Holder,
}

#[derive(Clone, Copy, ValueEnum)]
enum Form {
    Seminorm,
    Full,
}

fn parse_domain(s: &str) -> Result<DomainTag, String> {
    DomainTag::parse(s).ok_or_else(|| format!("unknown domain '{s}'; valid names: disk, ball, box"))
}

fn split_names(s: &str) -> Vec<String> {
    s.split(',').map(|t| t.trim().to_string()).filter(|t| !t.is_empty()).collect()
}

fn build_config(cli: Cli) -> anyhow::Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::from_file(path)?,
        None => ExperimentConfig::default(),
    };
    if let Ok(dir) = std::env::var(OUT_DIR_ENV) {
        cfg.out_dir = dir.into();
    }
    if let Some(dir) = cli.out_dir {
        cfg.out_dir = dir;
    }
    if cli.threads.is_some() {
        cfg.threads = cli.threads;
    }
    cfg.dump_mesh |= cli.dump_mesh;
    cfg.dump_field |= cli.dump_field;
    let c = cli.common;
    if let Some(d) = c.domain {
        cfg.domain = d;
    }
    cfg.dim = c.dim.or(cfg.dim);
    cfg.resolution = c.resolution.or(cfg.resolution);
    cfg.boundary_resolution = c.boundary_resolution.or(cfg.boundary_resolution);
    cfg.seed = c.seed.unwrap_or(cfg.seed);
    cfg.points = c.points.unwrap_or(cfg.points);
    cfg.margin = c.margin.unwrap_or(cfg.margin);
    cfg.p = c.p.unwrap_or(cfg.p);
    cfg.k = c.k.unwrap_or(cfg.k);
    match cli.command {
        Command::Run => {
            if cli.config.is_none() {
                return Err(UsageError("run: --config is required".into()).into());
            }
        }
        Command::VerifyAlgebra { n } => {
            cfg.experiment = Experiment::VerifyAlgebra;
            cfg.n = n.unwrap_or(cfg.n);
        }
        Command::BorelPompeiu { fields } => {
            cfg.experiment = Experiment::BorelPompeiu;
            if let Some(f) = fields {
                cfg.fields = split_names(&f);
            }
        }
        Command::Solve { order, case, estimate, norm_resolution } => {
            cfg.experiment = Experiment::Solve;
            cfg.order = order.unwrap_or(cfg.order);
            cfg.case = case.unwrap_or(cfg.case);
            cfg.estimate = estimate.or(cfg.estimate);
            cfg.norm_resolution = norm_resolution.unwrap_or(cfg.norm_resolution);
        }
        Command::Norm { field, kind, lambda, form, pairs } => {
            cfg.experiment = Experiment::Norm;
            cfg.field = field.unwrap_or(cfg.field);
            let p = cfg.p;
            let form = match form {
                Some(Form::Seminorm) => SlobodeckijForm::Seminorm,
                Some(Form::Full) => SlobodeckijForm::Full,
                None if lambda.is_some_and(|l| l > 1.0) => SlobodeckijForm::Full,
                None => SlobodeckijForm::Seminorm,
            };
            if let Some(kind) = kind {
                cfg.norm = match kind {
                    NormKind::Sobolev => NormSpec::Sobolev { k: cfg.k, p },
                    NormKind::Slobodeckij => NormSpec::Slobodeckij { lambda: lambda.unwrap_or(0.5), p, form },
                    NormKind::DualLower => NormSpec::DualLower { p },
                    NormKind::Holder => NormSpec::Holder {
                        lambda_h: lambda.unwrap_or(0.5),
                        sample_pairs: pairs.unwrap_or(cfg.holder_pairs),
                        seed: cfg.seed,
                    },
                };
            }
        }
        Command::EstimateConstants { family, count, holder, norm_resolution } => {
            cfg.experiment = Experiment::EstimateConstants;
            cfg.family = family.unwrap_or(cfg.family);
            cfg.count = count.unwrap_or(cfg.count);
            cfg.holder |= holder;
            cfg.norm_resolution = norm_resolution.unwrap_or(cfg.norm_resolution);
        }
        Command::Convergence { study, resolutions, fields, order, case } => {
            cfg.experiment = Experiment::Convergence;
            if let Some(s) = study {
                cfg.study = parse_experiment(&s)?;
            }
            if let Some(r) = resolutions {
                cfg.resolutions = parse_list(&r)?;
            }
            if let Some(f) = fields {
                cfg.fields = split_names(&f);
            }
            cfg.order = order.unwrap_or(cfg.order);
            cfg.case = case.unwrap_or(cfg.case);
        }
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let cfg = match build_config(cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(1);
        }
    };
    if let Some(t) = cfg.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: threads: {e}");
            return ExitCode::from(1);
        }
    }
    match run_experiment(cfg) {
        Ok(out) => {
            if let Some(t) = out.report.outputs.get("table").and_then(|t| t.as_str()) {
                if out.report.config.n <= 3 {
                    print!("{t}");
                }
            }
            for c in &out.report.checks {
                let op = if c.at_least { ">=" } else { "<=" };
                println!("{} {}: {:.6e} {op} {:.6e}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.value, c.threshold);
            }
            for f in &out.files {
                println!("wrote {}", f.display());
            }
            if out.report.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
