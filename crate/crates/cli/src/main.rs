use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use solenoidk::ktheory::pq_family;
use solenoidk_cli::config::ReportFormat;
use solenoidk_cli::pipeline::{self, render_stage, Stage, StageStatus};
use solenoidk_cli::{exit, parse_config, parse_rows, render_dot, run_pipeline, DotKind, RunConfig};

#[derive(Parser)]
#[command(
    name = "solenoidk",
    version,
    about = "Quotient dynamics and K-theory of rose pre-solenoids"
)]
struct Cli {
    /// Output format for stage results.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Worker threads for parallel stages.
    #[arg(long, global = true, env = "SOLENOIDK_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Check the substitution and report its entropy.
    Validate { config: PathBuf },
    /// Germs, germ map, Hausdorff test and flattening constant.
    Quotient { config: PathBuf },
    /// Fixed-point counts and the zeta function.
    Zeta {
        config: PathBuf,
        #[arg(long)]
        max_n: Option<usize>,
    },
    /// Wieler axiom witness and forward-expansiveness separation.
    Expansive {
        config: PathBuf,
        #[arg(long)]
        level: Option<usize>,
        #[arg(long)]
        n_max: Option<usize>,
        #[arg(long)]
        density: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// K-theory of the quotient, stable and Ruelle algebras.
    Ktheory {
        config: PathBuf,
        /// Wrong-way matrix on K^0, rows separated by `;`, e.g. "2,1;1,1".
        #[arg(long, requires = "a1", value_parser = parse_matrix_flag)]
        a0: Option<Rows>,
        /// Wrong-way matrix on K^1.
        #[arg(long, requires = "a0", value_parser = parse_matrix_flag)]
        a1: Option<Rows>,
    },
    /// Full pipeline.
    Report {
        config: PathBuf,
        /// Write the JSON report here.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Graphviz export of the quotient.
    Dot {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = DotKind::Automaton)]
        kind: DotKind,
    },
    /// K-theory of the p/q-solenoid family, both torsion placements.
    Pq {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        q: u64,
    },
}

#[derive(Clone)]
struct Rows(Vec<Vec<i64>>);

fn parse_matrix_flag(s: &str) -> Result<Rows, String> {
    parse_rows(s).map(Rows)
}

fn load(path: &Path) -> Result<RunConfig, u8> {
    parse_config(path).map_err(|e| {
        eprintln!("error: {e}");
        exit::USAGE as u8
    })
}

fn emit(format: Format, stages: &[(&str, &Stage)]) -> u8 {
    match format {
        Format::Json => {
            let map: serde_json::Map<String, serde_json::Value> = stages
                .iter()
                .map(|(n, s)| {
                    (
                        n.to_string(),
                        serde_json::to_value(s).expect("stage serializes"),
                    )
                })
                .collect();
            println!(
                "{}",
                serde_json::to_string_pretty(&map).expect("stages serialize")
            );
        }
        Format::Text => {
            for (n, s) in stages {
                print!("{}", render_stage(n, s));
            }
        }
    }
    let failed = stages.iter().any(|(_, s)| s.status == StageStatus::Error);
    if failed {
        exit::MODEL_FAILURE as u8
    } else {
        exit::SUCCESS as u8
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), u8> {
    std::fs::write(path, text).map_err(|e| {
        eprintln!("error: cannot write {}: {e}", path.display());
        exit::MODEL_FAILURE as u8
    })
}

fn run(cli: Cli) -> Result<u8, u8> {
    let format = cli.format;
    match cli.command {
        Command::Validate { config } => {
            let c = load(&config)?;
            let s = pipeline::validation_stage(&c.system, &c.options);
            Ok(emit(format, &[("validation", &s)]))
        }
        Command::Quotient { config } => {
            let c = load(&config)?;
            let s = pipeline::quotient_stage(&c.system);
            Ok(emit(format, &[("quotient", &s)]))
        }
        Command::Zeta { config, max_n } => {
            let mut c = load(&config)?;
            if let Some(n) = max_n {
                if n == 0 {
                    eprintln!("error: --max-n must be at least 1");
                    return Err(exit::USAGE as u8);
                }
                c.options.zeta_max_n = n;
            }
            let s = pipeline::zeta_stage(&c.system, &c.options);
            Ok(emit(format, &[("zeta", &s)]))
        }
        Command::Expansive {
            config,
            level,
            n_max,
            density,
            seed,
        } => {
            let mut c = load(&config)?;
            let o = &mut c.options;
            o.cover_level = level.unwrap_or(o.cover_level);
            o.n_max = n_max.unwrap_or(o.n_max);
            o.grid_density = density.unwrap_or(o.grid_density);
            o.seed = seed.unwrap_or(o.seed);
            if o.cover_level == 0 || o.grid_density < 2 {
                eprintln!("error: --level must be at least 1 and --density at least 2");
                return Err(exit::USAGE as u8);
            }
            let (w, x) = rayon::join(
                || pipeline::wieler_stage(&c.system, &c.options),
                || pipeline::expansive_stage(&c.system, &c.options),
            );
            Ok(emit(format, &[("wieler", &w), ("expansive", &x)]))
        }
        Command::Ktheory { config, a0, a1 } => {
            let mut c = load(&config)?;
            if a0.is_some() {
                c.options.a0 = a0.map(|r| r.0);
                c.options.a1 = a1.map(|r| r.0);
            }
            let q = pipeline::quotient_stage(&c.system);
            if q.status == StageStatus::Error {
                return Ok(emit(format, &[("quotient", &q)]));
            }
            let k = pipeline::ktheory_stage(&c.system, &c.options);
            Ok(emit(format, &[("ktheory", &k)]))
        }
        Command::Report { config, json } => {
            let c = load(&config)?;
            let report = run_pipeline(&c);
            let path = json.or_else(|| c.output.json.clone());
            if let Some(p) = &path {
                write_file(p, &report.to_json())?;
            }
            if let Some(p) = &c.output.dot {
                write_file(p, &render_dot(&c.system, DotKind::Automaton))?;
            }
            let as_json = format == Format::Json || c.output.format == ReportFormat::Json;
            if as_json && path.is_none() {
                print!("{}", report.to_json());
            } else {
                print!("{}", report.to_text());
            }
            Ok(report.exit_status as u8)
        }
        Command::Dot { config, out, kind } => {
            let c = load(&config)?;
            let text = render_dot(&c.system, kind);
            match out.or_else(|| c.output.dot.clone()) {
                Some(p) => write_file(&p, &text)?,
                None => print!("{text}"),
            }
            Ok(exit::SUCCESS as u8)
        }
        Command::Pq { p, q } => {
            if p < 2 || q < 2 {
                eprintln!("error: --p and --q must be at least 2");
                return Err(exit::USAGE as u8);
            }
            let r = pq_family(p, q).map_err(|e| {
                eprintln!("error: {e}");
                exit::MODEL_FAILURE as u8
            })?;
            match format {
                Format::Json => {
                    println!("{}", serde_json::to_string_pretty(&r).expect("serializes"))
                }
                Format::Text => {
                    println!(
                        "p/q-solenoid p={p} q={q} (non-normative: {})",
                        r.non_normative
                    );
                    println!("  stable: K0 = {}, K1 = {}", r.stable.k0, r.stable.k1);
                    println!(
                        "  convention (torsion in degree {}): K0 = {}, K1 = {}",
                        r.convention.torsion_degree, r.convention.k0, r.convention.k1
                    );
                    println!(
                        "  alternative (torsion in degree {}): K0 = {}, K1 = {}",
                        r.alternative.torsion_degree, r.alternative.k0, r.alternative.k1
                    );
                    println!(
                        "  bookkeeping: {}",
                        if r.pimsner.bookkeeping_ok {
                            "ok"
                        } else {
                            "FAILED"
                        }
                    );
                }
            }
            Ok(if r.pimsner.bookkeeping_ok {
                exit::SUCCESS as u8
            } else {
                exit::MODEL_FAILURE as u8
            })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: thread count must be at least 1");
            return ExitCode::from(exit::USAGE as u8);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::from(exit::USAGE as u8);
        }
    }
    match run(cli) {
        Ok(code) | Err(code) => ExitCode::from(code),
    }
}
