//! `confcoh`: Betti numbers, extremal rays and vanishing checks for unordered
//! configuration spaces.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use confcoh::{
    detect_quasi_polynomial, hilbert_ray, make_cpm, validate_ring, verify_vanishing_ranges_with,
    BettiTable, Engine, Error, Mode, RingPresentation, DEFAULT_DEG_MAX, DEFAULT_P_MAX,
};
use serde_json::json;

#[derive(Parser, Debug)]
#[command(
    name = "confcoh",
    version,
    about = "Rational cohomology of unordered configuration spaces"
)]
struct Cli {
    /// Worker threads; 0 uses one per core.
    #[arg(
        short = 'j',
        long,
        global = true,
        env = "CONFCOH_JOBS",
        default_value_t = 0
    )]
    jobs: usize,

    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,

    /// Write to this file instead of standard output.
    #[arg(short, long, global = true)]
    output: Option<PathBuf>,

    /// Abort with exit code 3 if a complex has more monomials than this.
    #[arg(long, global = true, default_value_t = 2_000_000)]
    max_monomials: u128,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Betti numbers of C_k(M) for one k or an inclusive range `A..B`.
    Betti {
        #[command(flatten)]
        ring: RingSource,
        #[arg(long, value_parser = parse_k_range)]
        k: KRange,
        #[arg(long, value_enum, default_value_t = ModeArg::Full)]
        mode: ModeArg,
        /// Label degrees homologically (H_i instead of H^i).
        #[arg(long)]
        homological: bool,
    },
    /// The extremal ray `k -> dim H^{k(d-2)+i}` and its quasi-polynomial certificate.
    Ray {
        #[command(flatten)]
        ring: RingSource,
        #[arg(long)]
        i: u32,
        #[arg(long, value_parser = parse_k_range, default_value = "2..12")]
        k: KRange,
        #[arg(long, value_enum, default_value_t = ModeArg::Full)]
        mode: ModeArg,
        #[command(flatten)]
        bounds: Bounds,
    },
    /// Check the extremal vanishing ranges and rank facts for CP^m.
    Verify {
        #[command(flatten)]
        ring: RingSource,
        #[arg(long, default_value_t = 12)]
        k_max: u32,
        #[command(flatten)]
        bounds: Bounds,
    },
    /// Validate a cohomology ring presentation.
    RingCheck {
        /// Ring JSON file.
        #[arg(conflicts_with = "cpm", required_unless_present = "cpm")]
        file: Option<PathBuf>,
        #[arg(long)]
        cpm: Option<u32>,
    },
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false)]
struct RingSource {
    /// Built-in H^*(CP^M).
    #[arg(long, value_name = "M")]
    cpm: Option<u32>,
    /// Ring presentation as JSON.
    #[arg(long, value_name = "FILE")]
    ring: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct Bounds {
    /// Largest period tried by the quasi-polynomial search.
    #[arg(long, default_value_t = DEFAULT_P_MAX)]
    p_max: u32,
    /// Largest degree tried by the quasi-polynomial search.
    #[arg(long, default_value_t = DEFAULT_DEG_MAX)]
    deg_max: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
    Text,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Full,
    Reduced,
    Both,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct KRange {
    start: u32,
    end: u32,
}

impl KRange {
    fn is_single(&self) -> bool {
        self.start == self.end
    }
}

fn parse_k_range(s: &str) -> Result<KRange, String> {
    let num = |t: &str| {
        t.trim()
            .parse::<u32>()
            .map_err(|e| format!("bad k '{t}': {e}"))
    };
    let (start, end) = match s.split_once("..") {
        Some((a, b)) => (num(a)?, num(b.trim_start_matches('='))?),
        None => {
            let k = num(s)?;
            (k, k)
        }
    };
    if start > end {
        return Err(format!("empty k-range {s}"));
    }
    Ok(KRange { start, end })
}

/// A failure carrying its exit status.
struct Exit {
    code: u8,
    message: String,
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::TooLarge { .. }) => 3,
        Some(Error::ClaimFailed(_) | Error::NonZeroSquare { .. } | Error::Grading(_)) => 1,
        _ => 2,
    }
}

impl From<anyhow::Error> for Exit {
    fn from(err: anyhow::Error) -> Self {
        Exit {
            code: exit_code(&err),
            message: format!("{err:#}"),
        }
    }
}

/// What a command produced: the artifact and whether its claims held.
struct Outcome {
    body: String,
    ok: bool,
}

fn load_ring(src: &RingSource) -> anyhow::Result<RingPresentation> {
    match (src.cpm, &src.ring) {
        (Some(m), None) => Ok(make_cpm(m)?),
        (None, Some(path)) => Ok(RingPresentation::from_json_file(path)
            .with_context(|| format!("loading {}", path.display()))?),
        _ => Err(anyhow!("give exactly one of --cpm and --ring")),
    }
}

fn engine(src: &RingSource, cap: u128) -> anyhow::Result<Engine> {
    Ok(Engine::new(load_ring(src)?)?.with_max_monomials(cap))
}

fn render_tables(tables: &[BettiTable], format: Format, homological: bool, single: bool) -> String {
    match format {
        Format::Csv if single => tables[0].to_csv(),
        Format::Csv => {
            let mut out = String::from("k,degree,dim\n");
            for t in tables {
                for (i, d) in &t.dims {
                    writeln!(out, "{},{i},{d}", t.k).unwrap();
                }
            }
            out
        }
        Format::Json => {
            let value = if single {
                tables[0].to_json(homological)
            } else {
                json!(tables
                    .iter()
                    .map(|t| t.to_json(homological))
                    .collect::<Vec<_>>())
            };
            serde_json::to_string_pretty(&value).unwrap() + "\n"
        }
        Format::Text => tables.iter().map(|t| t.to_text(homological)).collect(),
    }
}

fn run_betti(
    engine: &Engine,
    k: KRange,
    mode: ModeArg,
    homological: bool,
    format: Format,
) -> anyhow::Result<Outcome> {
    let ks = k.start..=k.end;
    match mode {
        ModeArg::Full | ModeArg::Reduced => {
            let mode = if mode == ModeArg::Full {
                Mode::Full
            } else {
                Mode::Reduced
            };
            let tables = ks
                .map(|k| engine.betti(k, mode))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(Outcome {
                body: render_tables(&tables, format, homological, k.is_single()),
                ok: true,
            })
        }
        ModeArg::Both => {
            let reports = ks
                .map(|k| engine.consistency_report(k))
                .collect::<Result<Vec<_>, _>>()?;
            let ok = reports.iter().all(|r| r.ok());
            let body = match format {
                Format::Json => {
                    let values: Vec<_> = reports
                        .iter()
                        .map(|r| {
                            json!({
                                "k": r.k,
                                "consistent": r.ok(),
                                "first_discrepancy": r.first_discrepancy,
                                "full": r.full.to_json(homological),
                                "reduced": r.reduced.to_json(homological),
                            })
                        })
                        .collect();
                    let value = if k.is_single() {
                        values[0].clone()
                    } else {
                        json!(values)
                    };
                    serde_json::to_string_pretty(&value).unwrap() + "\n"
                }
                _ => {
                    let tables: Vec<BettiTable> = reports.iter().map(|r| r.full.clone()).collect();
                    render_tables(&tables, format, homological, k.is_single())
                }
            };
            for r in reports.iter().filter(|r| !r.ok()) {
                if let Err(e) = r.clone().into_result() {
                    eprintln!("{e}");
                }
            }
            Ok(Outcome { body, ok })
        }
    }
}

fn run_ray(
    engine: &Engine,
    i: u32,
    k: KRange,
    mode: ModeArg,
    bounds: &Bounds,
    format: Format,
) -> anyhow::Result<Outcome> {
    let mode = match mode {
        ModeArg::Full => Mode::Full,
        ModeArg::Reduced => Mode::Reduced,
        ModeArg::Both => {
            return Err(Error::InvalidParameter("ray takes --mode full or reduced".into()).into())
        }
    };
    let ray = hilbert_ray(engine, i, k.start, k.end, mode)?;
    let qp = detect_quasi_polynomial(&ray.samples, bounds.p_max, bounds.deg_max)?;
    let body = match format {
        Format::Csv => {
            match &qp {
                Some(q) => eprintln!("certificate: {q}"),
                None => eprintln!("certificate: none within bounds"),
            }
            ray.to_csv()
        }
        Format::Json => {
            let value = json!({
                "ring": engine.ring().name,
                "i": ray.i,
                "mode": ray.mode,
                "samples": ray.samples.iter()
                    .map(|(k, d)| json!({"k": k, "degree": ray.degree_at(*k), "dim": d}))
                    .collect::<Vec<_>>(),
                "certificate": qp.as_ref().map(|q| q.to_json()),
            });
            serde_json::to_string_pretty(&value).unwrap() + "\n"
        }
        Format::Text => {
            let mut out = format!(
                "{} ray i={} mode={}: dim H^(k*{}+{})\n",
                engine.ring().name,
                ray.i,
                ray.mode,
                ray.d - 2,
                ray.i
            );
            for (k, d) in &ray.samples {
                writeln!(out, "  k={k}: {d}").unwrap();
            }
            match &qp {
                Some(q) => writeln!(out, "certificate: {q}").unwrap(),
                None => writeln!(out, "certificate: none within bounds").unwrap(),
            }
            out
        }
    };
    Ok(Outcome { body, ok: true })
}

fn run_verify(
    engine: &Engine,
    k_max: u32,
    bounds: &Bounds,
    format: Format,
) -> anyhow::Result<Outcome> {
    let report = verify_vanishing_ranges_with(engine, k_max, bounds.p_max, bounds.deg_max)?;
    let body = match format {
        Format::Json => report.to_json(),
        Format::Text => report.to_text(),
        Format::Csv => {
            let mut out = String::from("claim,status,observed_onset\n");
            for c in &report.claims {
                let onset = c.observed_onset.map(|n| n.to_string()).unwrap_or_default();
                writeln!(out, "{},{},{onset}", c.id, c.status).unwrap();
            }
            out
        }
    };
    Ok(Outcome {
        body,
        ok: report.passed(),
    })
}

fn run_ring_check(
    file: Option<&PathBuf>,
    cpm: Option<u32>,
    format: Format,
) -> anyhow::Result<Outcome> {
    let ring = match (file, cpm) {
        (Some(path), _) => RingPresentation::from_json_file(path)
            .with_context(|| format!("loading {}", path.display()))?,
        (None, Some(m)) => make_cpm(m)?,
        (None, None) => return Err(anyhow!("give a ring file or --cpm")),
    };
    let diag = validate_ring(&ring);
    let body = match format {
        Format::Json => serde_json::to_string_pretty(&diag).unwrap() + "\n",
        Format::Text => format!("{}: {diag}", ring.name),
        Format::Csv => {
            let mut out = String::from("rule,message\n");
            for v in &diag.violations {
                writeln!(out, "{},\"{}\"", v.rule, v.message.replace('"', "\"\"")).unwrap();
            }
            out
        }
    };
    if !diag.valid {
        emit(&body, None)?;
        return Err(Error::InvalidRing(diag).into());
    }
    Ok(Outcome { body, ok: true })
}

fn emit(body: &str, path: Option<&PathBuf>) -> anyhow::Result<()> {
    match path {
        Some(p) => std::fs::write(p, body).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(body.as_bytes())?;
            out.flush()?;
            Ok(())
        }
    }
}

fn run(cli: &Cli) -> anyhow::Result<Outcome> {
    let cap = cli.max_monomials;
    match &cli.command {
        Command::Betti {
            ring,
            k,
            mode,
            homological,
        } => run_betti(&engine(ring, cap)?, *k, *mode, *homological, cli.format),
        Command::Ray {
            ring,
            i,
            k,
            mode,
            bounds,
        } => run_ray(&engine(ring, cap)?, *i, *k, *mode, bounds, cli.format),
        Command::Verify {
            ring,
            k_max,
            bounds,
        } => run_verify(&engine(ring, cap)?, *k_max, bounds, cli.format),
        Command::RingCheck { file, cpm } => run_ring_check(file.as_ref(), *cpm, cli.format),
    }
}

fn main_inner() -> Result<(), Exit> {
    let cli = Cli::parse();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.jobs)
        .build()
        .map_err(|e| Exit {
            code: 2,
            message: format!("cannot start {} worker threads: {e}", cli.jobs),
        })?;
    let outcome = pool.install(|| run(&cli))?;
    emit(&outcome.body, cli.output.as_ref())?;
    if outcome.ok {
        Ok(())
    } else {
        Err(Exit {
            code: 1,
            message: "one or more claims failed".into(),
        })
    }
}

fn main() -> ExitCode {
    match main_inner() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("confcoh: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
