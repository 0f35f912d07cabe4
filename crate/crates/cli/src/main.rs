use std::f64::consts::PI;
use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::json;

use photon_bottleneck::circuit::{builtin_circuit, load_circuit, simulate, BuiltinKind, CircuitSpec};
use photon_bottleneck::entanglement::{
    four_photon_fraction_closed_form, four_photon_fraction_first_order, mixture_fraction, witness_passes,
};
use photon_bottleneck::mismatch::{mixed_circular_distribution, MismatchScenario};
use photon_bottleneck::polarization::{circular_distribution, four_photon_fringes, linear_distribution};
use photon_bottleneck::validate::{run_all, significant};
use photon_bottleneck::FockState;

const PHOTON_CAP: usize = 10;
const DEFAULT_PRECISION: usize = 15;

#[derive(Parser)]
#[command(name = "pbsim", version, about = "Photon bottleneck simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the merge network and print the post-selection result as JSON.
    Simulate {
        #[command(flatten)]
        input: Input,
        /// Include the normalized output state.
        #[arg(long)]
        dump_state: bool,
        /// Include the network mode map.
        #[arg(long)]
        dump_unitary: bool,
    },
    /// Photon-number-difference distribution of the output state (CSV).
    Stats {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_enum, default_value = "circular")]
        basis: BasisArg,
        /// Linear polarization angle in radians.
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        phi: f64,
    },
    /// Linear-basis distribution at φ = jπ/k for j = 0..k (CSV).
    Sweep {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value_t = 64)]
        phi_steps: usize,
    },
    /// Circular statistics with one mode-mismatched photon (CSV).
    Error {
        #[arg(long, default_value_t = 4)]
        photons: usize,
        #[arg(long, default_value_t = 1.0)]
        epsilon: f64,
        #[arg(long, default_value_t = 0)]
        bad_port: usize,
        #[arg(long)]
        force: bool,
    },
    /// GHZ fraction after redistribution, plus the curve over ε (CSV).
    Ghz {
        #[arg(long, default_value_t = 4)]
        photons: usize,
        #[arg(long, default_value_t = 0.0)]
        epsilon: f64,
        #[arg(long, default_value_t = 0)]
        bad_port: usize,
        #[arg(long)]
        force: bool,
    },
    /// Run the built-in acceptance checks.
    Validate,
}

#[derive(Args)]
struct Input {
    /// Number of photons in the standard merge network.
    #[arg(long, conflicts_with = "circuit")]
    photons: Option<usize>,
    /// Circuit description file.
    #[arg(long)]
    circuit: Option<PathBuf>,
    /// Lift the photon cap.
    #[arg(long)]
    force: bool,
}

#[derive(Copy, Clone, ValueEnum)]
enum BasisArg {
    Circular,
    Linear,
}

fn check_cap(n: usize, force: bool) -> anyhow::Result<()> {
    if n > PHOTON_CAP && !force {
        bail!("{n} photons exceeds the cap of {PHOTON_CAP}; pass --force to run anyway");
    }
    Ok(())
}

impl Input {
    fn spec(&self) -> anyhow::Result<CircuitSpec> {
        let spec = match &self.circuit {
            Some(path) => {
                let text =
                    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                load_circuit(&text).with_context(|| format!("parsing {}", path.display()))?
            }
            None => builtin_circuit(BuiltinKind::Merge, self.photons.unwrap_or(4))?,
        };
        check_cap(spec.photon_count(), self.force)?;
        Ok(spec)
    }

    /// The normalized post-selected output state.
    fn output(&self) -> anyhow::Result<FockState> {
        let sim = simulate(&self.spec()?)?;
        let (state, _) = sim.state.normalize().context("post-selection never succeeds")?;
        Ok(state)
    }
}

struct Printer {
    digits: usize,
}

impl Printer {
    fn from_env() -> anyhow::Result<Self> {
        let digits = match std::env::var("PBSIM_PRECISION") {
            Ok(v) => {
                let d: usize = v.trim().parse().with_context(|| format!("PBSIM_PRECISION `{v}` is not an integer"))?;
                if !(12..=17).contains(&d) {
                    bail!("PBSIM_PRECISION must be between 12 and 17");
                }
                d
            }
            Err(_) => DEFAULT_PRECISION,
        };
        Ok(Printer { digits })
    }

    /// Plain decimal with the configured significant digits; roundoff below
    /// 1e-14 in magnitude prints as 0.
    fn num(&self, x: f64) -> String {
        if x.abs() < 1e-14 {
            return "0".into();
        }
        significant(x, self.digits)
    }

    /// A JSON number rounded to the configured significant digits.
    fn json(&self, x: f64) -> serde_json::Value {
        let rounded: f64 = format!("{:.*e}", self.digits - 1, x).parse().unwrap_or(x);
        json!(rounded)
    }
}

macro_rules! emit {
    ($buf:expr, $($arg:tt)*) => {{
        use std::fmt::Write as _;
        let _ = writeln!($buf, $($arg)*);
    }};
}

/// Runs one command, appending its stdout data to `buf`. Returns false when
/// validation checks fail.
fn run(cli: Cli, buf: &mut String) -> anyhow::Result<bool> {
    let out = Printer::from_env()?;
    match cli.command {
        Command::Simulate { input, dump_state, dump_unitary } => {
            let spec = input.spec()?;
            let sim = simulate(&spec)?;
            let mut doc = json!({
                "photons": spec.photon_count(),
                "probability": out.json(sim.probability),
            });
            if dump_state {
                let (state, _) = sim.state.normalize().context("post-selection never succeeds")?;
                doc["state"] = serde_json::to_value(&state)?;
            }
            if dump_unitary {
                doc["unitary"] = serde_json::to_value(&sim.unitary)?;
            }
            emit!(buf, "{}", serde_json::to_string_pretty(&doc)?);
        }
        Command::Stats { input, basis, phi } => {
            let state = input.output()?;
            emit!(buf, "basis,phi,delta_n,probability");
            match basis {
                BasisArg::Circular => {
                    for (d, p) in circular_distribution(&state)?.iter() {
                        emit!(buf, "circular,,{d},{}", out.num(p));
                    }
                }
                BasisArg::Linear => {
                    for (d, p) in linear_distribution(&state, phi)?.iter() {
                        emit!(buf, "linear,{},{d},{}", out.num(phi), out.num(p));
                    }
                }
            }
        }
        Command::Sweep { input, phi_steps } => {
            if phi_steps == 0 {
                bail!("--phi-steps must be positive");
            }
            let state = input.output()?;
            let four = state.photon_number() == 4;
            let rows = (0..phi_steps)
                .into_par_iter()
                .map(|j| {
                    let phi = PI * j as f64 / phi_steps as f64;
                    linear_distribution(&state, phi).map(|d| (phi, d))
                })
                .collect::<Result<Vec<_>, _>>()?;
            emit!(buf, "phi,delta_n,probability,closed_form");
            for (phi, d) in rows {
                let closed = four_photon_fringes(phi);
                for (k, (delta, p)) in d.iter().enumerate() {
                    let c = if four { out.num(closed[k]) } else { String::new() };
                    emit!(buf, "{},{delta},{},{c}", out.num(phi), out.num(p));
                }
            }
        }
        Command::Error { photons, epsilon, bad_port, force } => {
            check_cap(photons, force)?;
            let mix = mixed_circular_distribution(&MismatchScenario::new(photons, bad_port, epsilon)?)?;
            emit!(buf, "delta_n,n_r,n_l,ideal_probability,mismatch_probability,weight,probability");
            let rows = mix.ideal.iter().zip(mix.error.iter()).zip(mix.normalized()).zip(&mix.weights);
            for ((((d, ideal), (_, err)), (_, p)), &(_, w)) in rows {
                let n_r = (photons as i64 + d) / 2;
                let n_l = photons as i64 - n_r;
                emit!(buf, 
                    "{d},{n_r},{n_l},{},{},{},{}",
                    out.num(ideal),
                    out.num(err),
                    out.num(w),
                    out.num(p)
                );
            }
        }
        Command::Ghz { photons, epsilon, bad_port, force } => {
            check_cap(photons, force)?;
            let four = photons == 4;
            let mut points = vec![("point", epsilon)];
            points.extend((0..=10).map(|k| ("curve", k as f64 / 10.0)));
            let fractions = points
                .par_iter()
                .map(|&(_, eps)| mixture_fraction(&MismatchScenario::new(photons, bad_port, eps)?))
                .collect::<Result<Vec<_>, _>>()?;
            emit!(buf, "kind,epsilon,fraction,closed_form,first_order,witness");
            for (&(kind, eps), f) in points.iter().zip(fractions) {
                let (closed, first) = if four {
                    (out.num(four_photon_fraction_closed_form(eps)), out.num(four_photon_fraction_first_order(eps)))
                } else {
                    (String::new(), String::new())
                };
                let verdict = if witness_passes(f) { "pass" } else { "fail" };
                emit!(buf, "{kind},{},{},{closed},{first},{verdict}", out.num(eps), out.num(f));
            }
        }
        Command::Validate => {
            let results = run_all();
            for r in &results {
                emit!(buf, "{r}");
            }
            let failed = results.iter().filter(|r| !r.passed).count();
            if failed > 0 {
                eprintln!("{failed} of {} checks failed", results.len());
                return Ok(false);
            }
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut buf = String::new();
    let status = run(cli, &mut buf);
    let mut stdout = std::io::stdout().lock();
    if let Err(e) = stdout.write_all(buf.as_bytes()).and_then(|_| stdout.flush()) {
        if e.kind() != std::io::ErrorKind::BrokenPipe {
            eprintln!("error: writing output: {e}");
            return ExitCode::FAILURE;
        }
    }
    match status {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
