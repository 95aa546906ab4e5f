mod output;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use superpose_core::bounds::{self, BoundOptions, LowerBoundForm, TheoremSelector};
use superpose_core::harness::{self, CampaignConfig, CampaignKind, FaultInjection};
use superpose_core::states::{relation_residuals, PureState, StateFile, SuperpositionInput};
use superpose_core::Complex64;

use output::Emit;

const DEFAULT_REPLAY_TOL: f64 = 1e-10;

/// Concurrence of bipartite pure states and bounds on the concurrence of superpositions.
#[derive(Parser, Debug)]
#[command(name = "superpose", version)]
struct Cli {
    /// Output format (default depends on the subcommand).
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// Seed for random campaigns.
    #[arg(long, global = true, env = "SUPERPOSE_SEED")]
    seed: Option<u64>,

    /// Numerical tolerance: sandwich tolerance for `verify`, identity tolerance for
    /// `replay`, premise tolerance for `bounds`.
    #[arg(long, global = true)]
    tolerance: Option<f64>,

    /// Write structured output here instead of stdout.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,

    /// Extra diagnostics on stderr.
    #[arg(long, short, global = true)]
    verbose: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum RecordsFormat {
    Csv,
    Jsonl,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Concurrence of a state file [default format: text].
    Concurrence {
        #[arg(value_parser = existing_file)]
        state: PathBuf,
    },
    /// Bounds on C(αΨ + βΦ) [default format: text].
    Bounds {
        #[command(flatten)]
        pair: Pair,
        /// `|α|²`; `α = √|α|²` and `β = e^{i·phase}√(1 − |α|²)`.
        #[arg(long, default_value_t = 0.5)]
        alpha_sq: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        phase: f64,
        /// auto, T1, T2 or T3.
        #[arg(long, default_value = "auto")]
        theorem: TheoremSelector,
        /// Evaluate T1/T2 even if the premise does not hold.
        #[arg(long)]
        force: bool,
        #[command(flatten)]
        form: FormArg,
    },
    /// Seeded Monte Carlo check of a theorem's bounds [default format: json].
    Verify {
        /// T1, T2, T3 or Weyl.
        #[arg(long)]
        theorem: CampaignKind,
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
        /// Comma-separated shapes, e.g. `2x4,3x4`.
        #[arg(long, default_value = "2x2", value_parser = parse_dims)]
        dims: Dims,
        /// `lo,hi` bounds for `|α|²`.
        #[arg(long, default_value = "0,1", value_parser = parse_range)]
        alpha_sq_range: (f64, f64),
        /// Stream every trial record to this file.
        #[arg(long)]
        records: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = RecordsFormat::Csv)]
        records_format: RecordsFormat,
        /// Split trials into this many blocks; the summary does not depend on it.
        #[arg(long, default_value_t = 1)]
        partitions: u64,
        #[command(flatten)]
        form: FormArg,
        #[arg(long, hide = true)]
        inject_fault: Option<FaultInjection>,
    },
    /// Bounds over a uniform `|α|²` grid [default format: csv].
    Sweep {
        #[command(flatten)]
        pair: Pair,
        #[arg(long, default_value_t = 11)]
        steps: usize,
        #[arg(long, default_value = "auto")]
        theorem: TheoremSelector,
        #[command(flatten)]
        form: FormArg,
    },
    /// Replays the matrix identities behind the bounds for one instance [default format: text].
    Replay {
        #[command(flatten)]
        pair: Pair,
        #[arg(long, default_value_t = 0.5)]
        alpha_sq: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        phase: f64,
    },
}

#[derive(Args, Debug)]
struct Pair {
    #[arg(value_parser = existing_file)]
    psi: PathBuf,
    #[arg(value_parser = existing_file)]
    phi: PathBuf,
}

#[derive(Args, Debug)]
struct FormArg {
    /// Closed form of the T2/T3 lower bound: printed or rederived.
    #[arg(long = "lower-form", default_value = "printed")]
    lower_form: LowerBoundForm,
}

#[derive(Clone, Debug)]
struct Dims(Vec<(usize, usize)>);

fn existing_file(s: &str) -> Result<PathBuf, String> {
    let p = PathBuf::from(s);
    if p.is_file() {
        Ok(p)
    } else {
        Err(format!("no such file: {s}"))
    }
}

fn parse_dims(s: &str) -> Result<Dims, String> {
    s.split(',')
        .map(|tok| {
            let (n, m) = tok
                .trim()
                .split_once(['x', 'X'])
                .ok_or_else(|| format!("`{tok}` is not of the form NxM"))?;
            let n: usize = n.parse().map_err(|_| format!("bad row count in `{tok}`"))?;
            let m: usize = m
                .parse()
                .map_err(|_| format!("bad column count in `{tok}`"))?;
            if n == 0 || m == 0 {
                return Err(format!("`{tok}` has a zero side"));
            }
            Ok((n, m))
        })
        .collect::<Result<_, _>>()
        .map(Dims)
}

fn parse_range(s: &str) -> Result<(f64, f64), String> {
    let (lo, hi) = s.split_once(',').ok_or("expected `lo,hi`")?;
    let lo: f64 = lo.trim().parse().map_err(|e| format!("lo: {e}"))?;
    let hi: f64 = hi.trim().parse().map_err(|e| format!("hi: {e}"))?;
    Ok((lo, hi))
}

/// Failure that ends the run with exit code 2.
#[derive(Debug)]
struct Failure {
    op: &'static str,
    msg: String,
}

fn fail(op: &'static str) -> impl FnOnce(String) -> Failure {
    move |msg| Failure { op, msg }
}

trait Context<T> {
    fn during(self, op: &'static str) -> Result<T, Failure>;
}

impl<T, E: std::fmt::Display> Context<T> for Result<T, E> {
    fn during(self, op: &'static str) -> Result<T, Failure> {
        self.map_err(|e| Failure {
            op,
            msg: e.to_string(),
        })
    }
}

struct Ctx {
    format: Option<Format>,
    tolerance: Option<f64>,
    output: Option<PathBuf>,
    verbose: bool,
    seed: u64,
}

impl Ctx {
    fn format(&self, default: Format) -> Format {
        self.format.unwrap_or(default)
    }

    fn log(&self, msg: impl AsRef<str>) {
        if self.verbose {
            eprintln!("{}", msg.as_ref());
        }
    }

    fn load(&self, path: &Path) -> Result<PureState, Failure> {
        let err =
            |e: &dyn std::fmt::Display| fail("load_state")(format!("{}: {e}", path.display()));
        let text = std::fs::read_to_string(path).map_err(|e| err(&e))?;
        let file = StateFile::parse(&text).map_err(|e| err(&e))?;
        let (state, norm) = file.to_state().map_err(|e| err(&e))?;
        self.log(format!(
            "loaded {}: {}x{}, normalized by {norm}",
            path.display(),
            file.n,
            file.m
        ));
        Ok(state)
    }

    fn emit(&self, value: &dyn Emit, default: Format) -> Result<(), Failure> {
        let mut buf = Vec::new();
        match self.format(default) {
            Format::Json => {
                value.json(&mut buf).during("write")?;
                buf.push(b'\n');
            }
            Format::Csv => value.csv(&mut buf).during("write")?,
            Format::Text => value.text(&mut buf).during("write")?,
        }
        match &self.output {
            Some(p) => std::fs::write(p, &buf).during("write"),
            None => io::stdout().write_all(&buf).during("write"),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let seed = cli.seed.unwrap_or(0);
    eprintln!("seed: {seed}");
    let ctx = Ctx {
        format: cli.format,
        tolerance: cli.tolerance,
        output: cli.output,
        verbose: cli.verbose,
        seed,
    };
    match run(&ctx, cli.command) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}: {}", f.op, f.msg);
            ExitCode::from(2)
        }
    }
}

fn amplitudes(alpha_sq: f64, phase: f64) -> Result<(Complex64, Complex64), Failure> {
    if !(0.0..=1.0).contains(&alpha_sq) {
        return Err(fail("amplitudes")(format!(
            "--alpha-sq must lie in [0, 1], got {alpha_sq}"
        )));
    }
    Ok((
        Complex64::new(alpha_sq.sqrt(), 0.0),
        Complex64::from_polar((1.0 - alpha_sq).sqrt(), phase),
    ))
}

fn run(ctx: &Ctx, command: Command) -> Result<ExitCode, Failure> {
    match command {
        Command::Concurrence { state } => {
            let s = ctx.load(&state)?;
            let c = s.concurrence().during("concurrence")?;
            ctx.emit(&output::ConcurrenceOut { concurrence: c }, Format::Text)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Bounds {
            pair,
            alpha_sq,
            phase,
            theorem,
            force,
            form,
        } => {
            let (psi, phi) = (ctx.load(&pair.psi)?, ctx.load(&pair.phi)?);
            let (alpha, beta) = amplitudes(alpha_sq, phase)?;
            let inp = SuperpositionInput::new_padded(alpha, beta, psi, phi).during("bounds")?;
            let mut opts = BoundOptions {
                force,
                lower_form: form.lower_form,
                ..BoundOptions::default()
            };
            if let Some(t) = ctx.tolerance {
                opts.premise_tol = t;
            }
            let report = bounds::evaluate(&inp, theorem, &opts).during("bounds")?;
            if let Some(w) = &report.premise_warning {
                eprintln!("warning: {w}");
            }
            ctx.emit(&report, Format::Text)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify {
            theorem,
            trials,
            dims,
            alpha_sq_range,
            records,
            records_format,
            partitions,
            form,
            inject_fault,
        } => {
            let mut cfg = CampaignConfig::new(theorem, trials, dims.0, ctx.seed);
            if let Some(t) = ctx.tolerance {
                cfg.tolerance = t;
            }
            cfg.alpha_sq_range = alpha_sq_range;
            cfg.lower_form = form.lower_form;
            cfg.fault = inject_fault;
            cfg.validate().during("verify")?;
            let summary = match records {
                None => harness::run_campaign_partitioned(&cfg, partitions).during("verify")?,
                Some(path) => stream_records(&cfg, &path, records_format)?,
            };
            eprintln!("runtime: {:.3} s", summary.runtime.as_secs_f64());
            ctx.emit(&summary, Format::Json)?;
            Ok(if summary.violations > 0 {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            })
        }
        Command::Sweep {
            pair,
            steps,
            theorem,
            form,
        } => {
            let (psi, phi) = (ctx.load(&pair.psi)?, ctx.load(&pair.phi)?);
            let opts = BoundOptions {
                lower_form: form.lower_form,
                ..BoundOptions::default()
            };
            let table = harness::sweep_alpha(&psi, &phi, steps, theorem, &opts).during("sweep")?;
            ctx.emit(&table, Format::Csv)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Replay {
            pair,
            alpha_sq,
            phase,
        } => {
            let (psi, phi) = (ctx.load(&pair.psi)?, ctx.load(&pair.phi)?);
            let (alpha, beta) = amplitudes(alpha_sq, phase)?;
            let inp = SuperpositionInput::new_padded(alpha, beta, psi, phi).during("replay")?;
            let tol = ctx.tolerance.unwrap_or(DEFAULT_REPLAY_TOL);
            let (_, tr) = relation_residuals(&inp.psi, &inp.phi).during("replay")?;
            let t2 = if tr <= bounds::PREMISE_TOL {
                Some(
                    harness::derivation_replay_t2(&inp.psi, &inp.phi, alpha, beta, tol)
                        .during("replay")?,
                )
            } else {
                ctx.log(format!(
                    "|Tr ΨΦ†| = {tr:e}: trace-orthogonal replay not applicable"
                ));
                None
            };
            let t3 = harness::derivation_replay_t3(&inp.psi, &inp.phi, alpha, beta, tol)
                .during("replay")?;
            let out = output::ReplayOut {
                tolerance: tol,
                t2,
                t3,
            };
            let ok = out.ok();
            ctx.emit(&out, Format::Text)?;
            Ok(if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
    }
}

fn stream_records(
    cfg: &CampaignConfig,
    path: &Path,
    format: RecordsFormat,
) -> Result<harness::CampaignSummary, Failure> {
    let file =
        File::create(path).map_err(|e| fail("records")(format!("{}: {e}", path.display())))?;
    let result = match format {
        RecordsFormat::Csv => {
            let mut w = csv::Writer::from_writer(BufWriter::new(file));
            let summary = harness::run_campaign_streaming(cfg, |r| w.serialize(r.row()))
                .during("verify")?
                .during("records")?;
            w.flush().during("records")?;
            summary
        }
        RecordsFormat::Jsonl => {
            let mut w = BufWriter::new(file);
            let summary =
                harness::run_campaign_streaming(cfg, |r| writeln!(w, "{}", r.row().to_json_line()))
                    .during("verify")?
                    .during("records")?;
            w.flush().during("records")?;
            summary
        }
    };
    Ok(result)
}
