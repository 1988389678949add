use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use vcinv::action::r4;
use vcinv::gens::{make_u, BasisElementSpec, GeneratorSet, Relation};
use vcinv::gf::prime_power;
use vcinv::verify::{
    check_hilbert, check_invariance, check_kernel, check_products, check_relations, reduce_product,
    verify_certificate, KernelOptions, ProductContext, RelationOptions, Sample, Status, VerificationReport,
    VerifyError,
};
use vcinv::{GaloisField, GroebnerError, Polynomial};

const SUPPORTED_Q: [u32; 7] = [2, 3, 4, 5, 7, 8, 9];

#[derive(Parser)]
#[command(name = "verify", version, about = "Exact checks for the vector-covector invariants of GL_2(F_q)")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Expand every relation among the generators
    Relations {
        #[command(flatten)]
        run: RunArgs,
        /// Replace T1 by a sign-corrupted copy (negative control)
        #[arg(long)]
        corrupt_t1: bool,
    },
    /// Act with every group element on the generators
    Invariance {
        #[command(flatten)]
        run: RunArgs,
    },
    /// Compare invariant dimensions, series coefficients and standard monomials
    Hilbert {
        #[command(flatten)]
        run: RunArgs,
    },
    /// Certify ker(pi) = I degree by degree
    Kernel {
        #[command(flatten)]
        run: RunArgs,
        /// Also run the 11-variable elimination experiment (q = 2)
        #[arg(long)]
        elimination: bool,
    },
    /// Build and re-verify product certificates
    Products {
        #[command(flatten)]
        run: RunArgs,
        /// Number of sampled pairs; all pairs when omitted for q = 2, 100 otherwise
        #[arg(long)]
        sample: Option<usize>,
        /// Check every pair regardless of q
        #[arg(long, conflicts_with = "sample")]
        all: bool,
    },
    /// Print a generator, auxiliary polynomial or relation
    Show {
        /// c0 c1 c0s c1s um1 u0 u1 u2 d0 d1 d2 d0s d1s d2s k00 h delta delta_corrected T1 T1s T00 T10 T01
        name: String,
        #[command(flatten)]
        run: RunArgs,
        /// Index for h
        #[arg(long)]
        s: Option<u32>,
    },
    /// Certificate for the product of two basis elements, e.g. `A:1,1,0 B:0,0,1,0`
    Reduce {
        f: String,
        g: String,
        #[command(flatten)]
        run: RunArgs,
    },
}

#[derive(Args, Clone)]
struct RunArgs {
    #[arg(long, default_value_t = 2)]
    q: u32,
    /// Irreducible modulus in `t` for extension fields, e.g. `t^2+t+1`
    #[arg(long)]
    modulus: Option<String>,
    /// Degree bound; 24 for q = 2 and 16 otherwise
    #[arg(long)]
    max_degree: Option<u32>,
    #[arg(long, default_value_t = 600)]
    timeout_secs: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write to this file instead of standard output
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

/// Failure classes mapped onto exit codes.
enum Outcome {
    Pass,
    Fail,
    Timeout,
}

struct InvalidInput(anyhow::Error);

impl RunArgs {
    fn field(&self) -> Result<GaloisField> {
        let (p, s) = prime_power(self.q).ok_or_else(|| anyhow!("NotPrimePower: {} is not a prime power", self.q))?;
        if !SUPPORTED_Q.contains(&self.q) {
            bail!("unsupported q = {}; expected one of {:?}", self.q, SUPPORTED_Q);
        }
        Ok(GaloisField::new(p, s, self.modulus.as_deref())?)
    }

    fn generators(&self) -> Result<GeneratorSet> {
        Ok(GeneratorSet::new(&self.field()?)?)
    }

    fn max_degree(&self) -> u32 {
        self.max_degree.unwrap_or(if self.q == 2 { 24 } else { 16 })
    }

    fn deadline(&self) -> Option<Instant> {
        Instant::now().checked_add(Duration::from_secs(self.timeout_secs))
    }

    fn emit(&self, text: &str) -> Result<()> {
        match &self.out {
            Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
            None => {
                print!("{text}");
                Ok(())
            }
        }
    }

    fn emit_json(&self, v: &Value) -> Result<()> {
        self.emit(&format!("{}\n", serde_json::to_string_pretty(v)?))
    }
}

fn emit_report(run: &RunArgs, report: &VerificationReport) -> Result<Outcome> {
    match run.format {
        Format::Json => run.emit_json(&report.to_json())?,
        Format::Text => run.emit(&report.to_text())?,
    }
    Ok(match report.overall() {
        Status::Pass | Status::Skipped => Outcome::Pass,
        Status::Fail => Outcome::Fail,
        Status::Timeout => Outcome::Timeout,
    })
}

fn show(name: &str, run: &RunArgs, s: Option<u32>) -> Result<Polynomial, InvalidInput> {
    let gs = run.generators().map_err(InvalidInput)?;
    let d = &gs.dickson;
    let poly = match name {
        "c0" => d.c0.clone(),
        "c1" => d.c1.clone(),
        "c0s" => d.c0s.clone(),
        "c1s" => d.c1s.clone(),
        "d0" => d.d0.clone(),
        "d1" => d.d1.clone(),
        "d2" => d.d2.clone(),
        "d0s" => d.d0s.clone(),
        "d1s" => d.d1s.clone(),
        "d2s" => d.d2s.clone(),
        "um1" => gs.um1.clone(),
        "u0" => gs.u0.clone(),
        "u1" => gs.u1.clone(),
        "u2" => make_u(&r4(&gs.field), 2),
        "k00" => gs.k00(),
        "delta" => gs.make_delta().0,
        "delta_corrected" => gs.make_delta_corrected().0,
        "h" => {
            let s = s.ok_or_else(|| InvalidInput(anyhow!("`show h` needs --s")))?;
            gs.make_h(s).map_err(|e| InvalidInput(e.into()))?
        }
        other => match other.parse::<Relation>() {
            Ok(rel) => gs.relation(rel),
            Err(_) => return Err(InvalidInput(anyhow!("UnknownName: `{other}`"))),
        },
    };
    Ok(poly)
}

fn reduce(f: &str, g: &str, run: &RunArgs) -> Result<Outcome, InvalidInput> {
    let invalid = |e: anyhow::Error| InvalidInput(e);
    let gs = run.generators().map_err(invalid)?;
    let q = gs.q();
    let spec = |text: &str| -> Result<BasisElementSpec, InvalidInput> {
        let spec: BasisElementSpec = text.parse().map_err(|e: vcinv::gens::GenError| invalid(e.into()))?;
        if !spec.in_range(q) {
            return Err(invalid(anyhow!("{spec} is not a basis element for q = {q}")));
        }
        Ok(spec)
    };
    let (f, g) = (spec(f)?, spec(g)?);
    let failure = |e: VerifyError| -> Result<Outcome, InvalidInput> {
        let outcome = match e {
            VerifyError::Groebner(GroebnerError::Timeout) => Outcome::Timeout,
            _ => Outcome::Fail,
        };
        run.emit_json(&json!({"factors": [f.to_string(), g.to_string()], "error": e.to_string(), "verified": false}))
            .map_err(invalid)?;
        Ok(outcome)
    };
    let mut ctx = match ProductContext::new(&gs, None, run.deadline()) {
        Ok(c) => c,
        Err(e) => return failure(e),
    };
    let cert = match reduce_product(&mut ctx, f, g) {
        Ok(c) => c,
        Err(e) => return failure(e),
    };
    let check = match verify_certificate(&gs, &cert) {
        Ok(c) => c,
        Err(e) => return failure(e),
    };
    let verified = check.verified();
    match run.format {
        Format::Json => run.emit_json(&cert.to_json(&gs, verified)),
        Format::Text => {
            let mut text = format!("{f} * {g} (degree {})\n", cert.degree);
            for (b, c) in &cert.ell {
                text.push_str(&format!("  ({c}) * {b}\n"));
            }
            text.push_str(&format!("verified: {verified}\n"));
            run.emit(&text)
        }
    }
    .map_err(invalid)?;
    Ok(if verified { Outcome::Pass } else { Outcome::Fail })
}

fn run(cli: Cli) -> Result<Outcome, InvalidInput> {
    let invalid = |e: anyhow::Error| InvalidInput(e);
    match cli.command {
        Command::Relations { run, corrupt_t1 } => {
            let gs = run.generators().map_err(invalid)?;
            let opts = RelationOptions {
                corrupt_t1,
                deadline: run.deadline(),
            };
            emit_report(&run, &check_relations(&gs, &opts)).map_err(invalid)
        }
        Command::Invariance { run } => {
            let gs = run.generators().map_err(invalid)?;
            emit_report(&run, &check_invariance(&gs, run.deadline())).map_err(invalid)
        }
        Command::Hilbert { run } => {
            let gs = run.generators().map_err(invalid)?;
            emit_report(&run, &check_hilbert(&gs, run.max_degree(), run.deadline())).map_err(invalid)
        }
        Command::Kernel { run, elimination } => {
            let gs = run.generators().map_err(invalid)?;
            let opts = KernelOptions {
                deadline: run.deadline(),
                elimination,
            };
            emit_report(&run, &check_kernel(&gs, run.max_degree(), &opts)).map_err(invalid)
        }
        Command::Products { run, sample, all } => {
            let gs = run.generators().map_err(invalid)?;
            let sample = match (all, sample) {
                (true, _) => Sample::All,
                (false, Some(n)) => Sample::Random { n, seed: run.seed },
                (false, None) if gs.q() == 2 => Sample::All,
                (false, None) => Sample::Random { n: 100, seed: run.seed },
            };
            emit_report(&run, &check_products(&gs, sample, run.deadline())).map_err(invalid)
        }
        Command::Show { name, run, s } => {
            let poly = show(&name, &run, s)?;
            let text = match run.format {
                Format::Text => format!("{poly}\n"),
                Format::Json => format!("{}\n", json!({"name": name, "q": run.q, "polynomial": poly.to_string()})),
            };
            run.emit(&text).map_err(invalid)?;
            Ok(Outcome::Pass)
        }
        Command::Reduce { f, g, run } => reduce(&f, &g, &run),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::Fail) => ExitCode::from(1),
        Ok(Outcome::Timeout) => ExitCode::from(3),
        Err(InvalidInput(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
