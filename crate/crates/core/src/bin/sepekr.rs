use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use sepekr::compression::lemma_sweep;
use sepekr::graph::{
    build_kneser_limited, build_schrijver_limited, chromatic_number, independence_number,
    ColoringConfig,
};
use sepekr::report::{emit_report, run_grid, Format, Grid};
use sepekr::weighted::verify_weighted_ekr;
use sepekr::{
    count_star_formula, enumerate_separated, extremal_classes, max_intersecting, Error, Group,
    Parallelism, SearchConfig, SearchResult, SetFamily,
};

const EXIT_VERIFICATION: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_RESOURCE: u8 = 3;

#[derive(Parser)]
#[command(
    name = "sepekr",
    version,
    about = "Intersecting families of k-separated sets on a circle"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value = "text")]
    format: OutFormat,
    /// Write to this file instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Refuse instances with more vertices than this (default 20000, or
    /// 2000 for class enumeration).
    #[arg(long, global = true)]
    limit_vertices: Option<usize>,
    /// Abort searches after this many seconds.
    #[arg(long, global = true)]
    limit_seconds: Option<f64>,
    /// Identify families up to rotation only (default: rotations and reflections).
    #[arg(long, global = true)]
    rotations_only: bool,
    /// Include runtimes and node counts.
    #[arg(long, global = true)]
    diagnostics: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutFormat {
    Json,
    Csv,
    Text,
}

impl From<OutFormat> for Format {
    fn from(f: OutFormat) -> Format {
        match f {
            OutFormat::Json => Format::Json,
            OutFormat::Csv => Format::Csv,
            OutFormat::Text => Format::Text,
        }
    }
}

#[derive(Args, Clone, Copy)]
struct Params {
    #[arg(long)]
    n: u32,
    #[arg(long)]
    r: u32,
    #[arg(long, default_value_t = 1)]
    k: u32,
}

#[derive(Subcommand)]
enum Command {
    /// List every k-separated r-subset of [n].
    Enumerate(Params),
    /// Exact maximum intersecting family with a witness.
    MaxFamily(Params),
    /// All maximum intersecting families up to symmetry.
    Classes(Params),
    /// Compression checks on random maximal intersecting families.
    Lemmas {
        #[command(flatten)]
        p: Params,
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[arg(long, default_value_t = sepekr::report::DEFAULT_LEMMA_SEED)]
        seed: u64,
    },
    /// Exact maximum weight against C(n-1, (k+1)r - 1).
    Weighted(Params),
    /// Disjointness graph on the k-separated r-sets (k = 0: Kneser graph).
    Graph {
        #[command(flatten)]
        p: Params,
        /// Write the graph in DIMACS format instead of a summary.
        #[arg(long)]
        dimacs: bool,
        /// Also compute the chromatic number (small graphs only).
        #[arg(long)]
        chromatic: bool,
    },
    /// Run a whole grid and print the acceptance table.
    Report {
        /// Grid name: default, quick or empty.
        #[arg(long, default_value = "default")]
        grid: String,
    },
}

enum Outcome {
    Verified,
    Failed,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(Outcome::Verified) => ExitCode::SUCCESS,
        Ok(Outcome::Failed) => ExitCode::from(EXIT_VERIFICATION),
        Err(e) => {
            eprintln!("sepekr: {e}");
            if e.is_resource_limit() {
                ExitCode::from(EXIT_RESOURCE)
            } else {
                ExitCode::from(EXIT_USAGE)
            }
        }
    }
}

fn search_config(c: &Common) -> sepekr::Result<SearchConfig> {
    let time_limit = match c.limit_seconds {
        None => None,
        Some(s) if s.is_finite() && s > 0.0 => Some(Duration::from_secs_f64(s)),
        Some(s) => {
            return Err(Error::InvalidParameter(format!(
                "--limit-seconds must be positive, got {s}"
            )))
        }
    };
    let defaults = SearchConfig::default();
    Ok(SearchConfig {
        vertex_limit: c.limit_vertices.unwrap_or(defaults.vertex_limit),
        class_vertex_limit: c.limit_vertices.unwrap_or(defaults.class_vertex_limit),
        time_limit,
        group: Group::from_rotations_only(c.rotations_only),
        parallelism: Parallelism::from_env(),
        ..defaults
    })
}

fn open_output(c: &Common) -> sepekr::Result<Box<dyn Write>> {
    Ok(match &c.output {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_json(out: &mut dyn Write, v: &serde_json::Value) -> sepekr::Result<()> {
    serde_json::to_writer_pretty(&mut *out, v)?;
    writeln!(out)?;
    Ok(())
}

fn write_sets_csv(out: &mut dyn Write, families: &[(usize, &SetFamily)]) -> sepekr::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["family", "n", "r", "k", "set"])?;
    for (i, f) in families {
        for s in f.iter() {
            let elems: Vec<String> = s.iter().map(|e| e.to_string()).collect();
            w.write_record([
                i.to_string(),
                f.n().to_string(),
                f.r().to_string(),
                f.k().to_string(),
                elems.join(" "),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

fn search_json(res: &SearchResult, diagnostics: bool) -> serde_json::Value {
    if diagnostics {
        serde_json::to_value(res).expect("search results serialize")
    } else {
        res.to_canonical_json()
    }
}

fn run(cli: &Cli) -> sepekr::Result<Outcome> {
    let c = &cli.common;
    let cfg = search_config(c)?;
    match &cli.command {
        Command::Enumerate(p) => {
            if p.r > 0 && p.n >= (p.k + 1) * p.r {
                let total =
                    count_star_formula(p.n, p.r, p.k)?.saturating_mul(p.n as u128) / p.r as u128;
                if total > cfg.vertex_limit as u128 {
                    return Err(Error::TooLarge {
                        vertices: usize::try_from(total).unwrap_or(usize::MAX),
                        limit: cfg.vertex_limit,
                    });
                }
            }
            let fam = enumerate_separated(p.n, p.r, p.k)?;
            let mut out = open_output(c)?;
            match c.format {
                OutFormat::Json => write_json(&mut out, &serde_json::to_value(&fam)?)?,
                OutFormat::Csv => write_sets_csv(&mut out, &[(0, &fam)])?,
                OutFormat::Text => writeln!(out, "{}", fam.to_line())?,
            }
            out.flush()?;
            Ok(Outcome::Verified)
        }
        Command::MaxFamily(p) => {
            let res = max_intersecting(p.n, p.r, p.k, &cfg)?;
            let mut out = open_output(c)?;
            match c.format {
                OutFormat::Json => write_json(&mut out, &search_json(&res, c.diagnostics))?,
                OutFormat::Csv => write_sets_csv(&mut out, &[(0, &res.witness)])?,
                OutFormat::Text => {
                    writeln!(out, "optimum {}", res.optimum)?;
                    writeln!(out, "witness {}", res.witness.to_line())?;
                    if c.diagnostics {
                        writeln!(out, "nodes {}", res.nodes_explored)?;
                    }
                }
            }
            out.flush()?;
            Ok(Outcome::Verified)
        }
        Command::Classes(p) => {
            let res = extremal_classes(p.n, p.r, p.k, &cfg)?;
            let classes = res.classes.clone().unwrap_or_default();
            let mut out = open_output(c)?;
            match c.format {
                OutFormat::Json => write_json(&mut out, &search_json(&res, c.diagnostics))?,
                OutFormat::Csv => {
                    let listed: Vec<(usize, &SetFamily)> = classes.iter().enumerate().collect();
                    write_sets_csv(&mut out, &listed)?
                }
                OutFormat::Text => {
                    writeln!(out, "optimum {}", res.optimum)?;
                    writeln!(out, "classes {}", classes.len())?;
                    for (i, f) in classes.iter().enumerate() {
                        writeln!(out, "class {i}: {}", f.to_line())?;
                    }
                }
            }
            out.flush()?;
            Ok(Outcome::Verified)
        }
        Command::Lemmas { p, samples, seed } => {
            let sweep = lemma_sweep(p.n, p.r, p.k, *samples, *seed, cfg.parallelism)?;
            let mut out = open_output(c)?;
            match c.format {
                OutFormat::Json => write_json(&mut out, &serde_json::to_value(&sweep)?)?,
                OutFormat::Csv => {
                    let mut w = csv::Writer::from_writer(&mut out);
                    w.write_record(["n", "r", "k", "samples", "passed"])?;
                    w.write_record([
                        p.n.to_string(),
                        p.r.to_string(),
                        p.k.to_string(),
                        sweep.samples.to_string(),
                        sweep.passed.to_string(),
                    ])?;
                    w.flush()?;
                }
                OutFormat::Text => {
                    writeln!(out, "{}/{} families passed", sweep.passed, sweep.samples)?;
                    for (i, clauses) in &sweep.failures {
                        writeln!(out, "sample {i}: failed {}", clauses.join(", "))?;
                    }
                }
            }
            out.flush()?;
            Ok(if sweep.all_passed() {
                Outcome::Verified
            } else {
                Outcome::Failed
            })
        }
        Command::Weighted(p) => {
            let rep = verify_weighted_ekr(p.n, p.r, p.k, &cfg)?;
            let mut out = open_output(c)?;
            match c.format {
                OutFormat::Json => write_json(&mut out, &serde_json::to_value(&rep)?)?,
                OutFormat::Csv => {
                    let mut w = csv::Writer::from_writer(&mut out);
                    w.serialize(&rep)?;
                    w.flush()?;
                }
                OutFormat::Text => writeln!(
                    out,
                    "optimum {} star {} binomial {} pass {}",
                    rep.optimum, rep.star_weight, rep.binomial, rep.pass
                )?,
            }
            out.flush()?;
            Ok(if rep.pass {
                Outcome::Verified
            } else {
                Outcome::Failed
            })
        }
        Command::Graph {
            p,
            dimacs,
            chromatic,
        } => {
            let g = if p.k == 0 {
                build_kneser_limited(p.n, p.r, cfg.vertex_limit)?
            } else {
                build_schrijver_limited(p.n, p.r, p.k, cfg.vertex_limit)?
            };
            let mut out = open_output(c)?;
            if *dimacs {
                g.export_dimacs(&mut out)?;
                return Ok(Outcome::Verified);
            }
            let alpha = independence_number(&g, &cfg)?;
            let chi = if *chromatic {
                let cc = ColoringConfig {
                    time_limit: cfg.time_limit,
                    ..ColoringConfig::default()
                };
                Some(chromatic_number(&g, &cc)?)
            } else {
                None
            };
            match c.format {
                OutFormat::Json => {
                    let mut v = json!({
                        "vertices": g.vertex_count(),
                        "edges": g.edge_count(),
                        "alpha": alpha,
                    });
                    if let Some(x) = chi {
                        v["chi"] = json!(x);
                    }
                    write_json(&mut out, &v)?
                }
                OutFormat::Csv => {
                    let mut w = csv::Writer::from_writer(&mut out);
                    w.write_record(["vertices", "edges", "alpha", "chi"])?;
                    w.write_record([
                        g.vertex_count().to_string(),
                        g.edge_count().to_string(),
                        alpha.to_string(),
                        chi.map(|x| x.to_string()).unwrap_or_default(),
                    ])?;
                    w.flush()?;
                }
                OutFormat::Text => {
                    write!(
                        out,
                        "vertices {} edges {} alpha {alpha}",
                        g.vertex_count(),
                        g.edge_count()
                    )?;
                    if let Some(x) = chi {
                        write!(out, " chi {x}")?;
                    }
                    writeln!(out)?;
                }
            }
            out.flush()?;
            Ok(Outcome::Verified)
        }
        Command::Report { grid } => {
            let grid = Grid::by_name(grid).ok_or_else(|| {
                Error::InvalidParameter(format!(
                    "unknown grid {grid:?}; expected default, quick or empty"
                ))
            })?;
            let report = run_grid(&grid, &cfg, c.diagnostics)?;
            let out = open_output(c)?;
            emit_report(&report, c.format.into(), out)?;
            Ok(if report.passed() {
                Outcome::Verified
            } else {
                Outcome::Failed
            })
        }
    }
}
