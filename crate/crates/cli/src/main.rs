//! `hforge`: compile formulas and circuits into decision processes,
//! evaluate policies exactly, and check value dichotomies end to end.
//!
//! Exit status is 0 on success or PASS, 1 when a verification fails and 2
//! for usage, parse and input errors.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use hforge_core::approx::positive_value_lower_bound;
use hforge_core::evaluation::performance;
use hforge_core::io;
use hforge_core::oracles::{
    brute_force_stationary_value_pruned, brute_force_time_dependent_value, exact_history_value, expand_2tbn,
    expand_2tbn_reachable,
};
use hforge_core::reductions::{
    amplify_uomdp, choose_ssat_constants, circuit_to_2tbn, cvp_to_mdp, epsilon_gap_gadget, infinite_horizon_sat_gadget,
    ssat_repeat, ssat_to_pomdp, succinct_cvp_to_2tbn, synthesize_succinct_instance, threesat_to_pomdp,
    threesat_to_uomdp, ExponentMode, GadgetModel, GadgetOutput,
};
use hforge_core::verify::{parse_source, verify_source, Construction, Source};
use hforge_core::{rat, Caps, Metric, Policy, Rat};

#[derive(Parser)]
#[command(name = "hforge", version, about = "Hard POMDP instance compiler and exact evaluator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compile a formula or circuit into a POMDP or 2TBN file.
    Compile {
        #[command(subcommand)]
        what: CompileCommand,
    },
    /// Evaluate a policy file on a model.
    Eval {
        pomdp: PathBuf,
        #[arg(long)]
        policy: PathBuf,
        #[command(flatten)]
        metric: MetricArgs,
    },
    /// Exact optimal value over a policy class.
    Value {
        pomdp: PathBuf,
        #[arg(long, value_enum)]
        class: ClassArg,
        #[command(flatten)]
        metric: MetricArgs,
        /// Write the optimal stationary or time-dependent policy here.
        #[arg(long)]
        witness: Option<PathBuf>,
    },
    /// Compile a source instance and check every declared dichotomy.
    Verify {
        source: PathBuf,
        #[command(flatten)]
        via: ViaArgs,
    },
    /// Lower bound on any positive value of the model.
    Bounds {
        pomdp: PathBuf,
        #[command(flatten)]
        metric: MetricArgs,
    },
    /// Expand a 2TBN into a flat POMDP.
    Expand {
        tbn: PathBuf,
        /// Keep only states reachable from the initial assignment.
        #[arg(long)]
        reachable: bool,
        #[arg(short, long)]
        output: PathBuf,
    },
}

#[derive(Subcommand)]
enum CompileCommand {
    /// Clause/literal gadget, its reward gap, or the amplified chain.
    Sat3 {
        cnf: PathBuf,
        #[arg(long, conflicts_with = "amplify")]
        eps: Option<String>,
        #[arg(long)]
        amplify: bool,
        #[arg(long, requires = "amplify")]
        discount: Option<String>,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Unobservable clause-counting gadget.
    Uomdp {
        cnf: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Stochastic satisfiability gadget, repeated k times.
    Ssat {
        ssat: PathBuf,
        #[arg(long, conflicts_with_all = ["c", "k"], required_unless_present_all = ["c", "k"])]
        eps: Option<String>,
        #[arg(long, requires = "k")]
        c: Option<u32>,
        #[arg(long, requires = "c")]
        k: Option<usize>,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Circuit value gadget with reward gap K.
    Cvp {
        circuit: PathBuf,
        #[arg(long)]
        gap: u64,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// One-step 2TBN that computes the circuit.
    Tbn {
        circuit: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// 2TBN for a succinctly given circuit (a plain netlist is encoded first).
    SuccinctCvp {
        instance: PathBuf,
        #[arg(long)]
        gap: u64,
        /// Pay 2^W instead of the full exponent.
        #[arg(long)]
        test_exponent: Option<u64>,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Infinite-horizon satisfiability gadget.
    Inf {
        cnf: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum MetricKind {
    Total,
    Disc,
    Avg,
}

#[derive(Clone, Copy, ValueEnum)]
enum ClassArg {
    Stat,
    Time,
    Hist,
}

#[derive(Args)]
struct MetricArgs {
    #[arg(long, value_enum)]
    metric: MetricKind,
    /// Discount factor p/q, required for disc.
    #[arg(long)]
    beta: Option<String>,
    /// Horizon; omit with disc for the infinite-horizon sum.
    #[arg(long)]
    horizon: Option<usize>,
}

impl MetricArgs {
    fn metric(&self) -> Result<Metric> {
        Ok(match (self.metric, self.horizon) {
            (MetricKind::Total, Some(h)) => Metric::total(h),
            (MetricKind::Total, None) => bail!("--metric total needs --horizon"),
            (MetricKind::Disc, h) => {
                let beta = rational(self.beta.as_deref().context("--metric disc needs --beta")?)?;
                match h {
                    Some(h) => Metric::discounted(beta, h)?,
                    None => Metric::infinite_discounted(beta)?,
                }
            }
            (MetricKind::Avg, None) => Metric::Average,
            (MetricKind::Avg, Some(_)) => bail!("--metric avg takes no --horizon"),
        })
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ViaKind {
    Sat3,
    Gap,
    Uomdp,
    Amplify,
    Inf,
    Ssat,
    Cvp,
    Tbn,
    SuccinctCvp,
}

/// Construction override for `verify`; the source format picks the default.
#[derive(Args)]
struct ViaArgs {
    #[arg(long, value_enum)]
    via: Option<ViaKind>,
    #[arg(long)]
    eps: Option<String>,
    #[arg(long)]
    discount: Option<String>,
    #[arg(long)]
    c: Option<u32>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    gap: Option<u64>,
    #[arg(long)]
    test_exponent: Option<u64>,
}

impl ViaArgs {
    fn construction(&self, src: &Source) -> Result<Construction> {
        let Some(via) = self.via else {
            return Ok(Construction::default_for(src));
        };
        let gap = self.gap.unwrap_or(1);
        Ok(match via {
            ViaKind::Sat3 => Construction::Sat3,
            ViaKind::Gap => Construction::Gap(rational(self.eps.as_deref().context("--via gap needs --eps")?)?),
            ViaKind::Uomdp => Construction::Uomdp,
            ViaKind::Amplify => Construction::Amplify(self.discount.as_deref().map(rational).transpose()?),
            ViaKind::Inf => Construction::Inf,
            ViaKind::Ssat => {
                let Source::Ssat(phi) = src else { bail!("--via ssat needs an SSAT source") };
                let (c, k) = ssat_constants(phi.n_vars(), self.eps.as_deref(), self.c, self.k)?;
                Construction::Ssat { c, k }
            }
            ViaKind::Cvp => Construction::Cvp { gap },
            ViaKind::Tbn => Construction::Tbn,
            ViaKind::SuccinctCvp => Construction::SuccinctCvp { gap, exponent: self.test_exponent },
        })
    }
}

fn rational(text: &str) -> Result<Rat> {
    Ok(rat::parse(text)?)
}

fn ssat_constants(n: usize, eps: Option<&str>, c: Option<u32>, k: Option<usize>) -> Result<(u32, usize)> {
    match (eps, c, k) {
        (Some(e), None, None) => Ok(choose_ssat_constants(&rational(e)?, n)?),
        (None, Some(c), Some(k)) => Ok((c, k)),
        (None, None, None) => Ok((1, 1)),
        _ => bail!("give either --eps or both --c and --k"),
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

fn load_pomdp(path: &Path) -> Result<hforge_core::Pomdp> {
    io::parse_pomdp(&read(path)?).with_context(|| path.display().to_string())
}

fn emit(g: &GadgetOutput, output: &Path) -> Result<()> {
    match &g.model {
        GadgetModel::Pomdp(m) => {
            write(output, &io::serialize_pomdp(m))?;
            println!(
                "wrote {}: {} states, {} actions, {} observations",
                output.display(),
                m.n_states(),
                m.n_actions(),
                m.n_obs()
            );
        }
        GadgetModel::Tbn(t) => {
            write(output, &io::serialize_tbn(t))?;
            println!("wrote {}: {} fluents, {} actions", output.display(), t.n_fluents(), t.n_actions());
        }
    }
    println!("metric: {}", g.recommended_metric.describe());
    for claim in &g.claims {
        println!("claim: {claim}");
    }
    Ok(())
}

fn compile(what: CompileCommand) -> Result<()> {
    match what {
        CompileCommand::Sat3 { cnf, eps, amplify, discount, output } => {
            let phi = io::parse_cnf(&read(&cnf)?)?;
            let g = match (eps, amplify) {
                (Some(e), _) => epsilon_gap_gadget(&phi, &rational(&e)?)?,
                (None, true) => amplify_uomdp(&phi, discount.as_deref().map(rational).transpose()?.as_ref())?,
                (None, false) => threesat_to_pomdp(&phi),
            };
            emit(&g, &output)
        }
        CompileCommand::Uomdp { cnf, output } => emit(&threesat_to_uomdp(&io::parse_cnf(&read(&cnf)?)?), &output),
        CompileCommand::Ssat { ssat, eps, c, k, output } => {
            let phi = io::parse_ssat(&read(&ssat)?)?;
            let (c, k) = ssat_constants(phi.n_vars(), eps.as_deref(), c, k)?;
            println!("constants: c={c} k={k}");
            emit(&ssat_repeat(&ssat_to_pomdp(&phi), k, c)?, &output)
        }
        CompileCommand::Cvp { circuit, gap, output } => {
            emit(&cvp_to_mdp(&io::parse_circuit(&read(&circuit)?)?, gap)?, &output)
        }
        CompileCommand::Tbn { circuit, output } => {
            let (t, layout) = circuit_to_2tbn(&io::parse_circuit(&read(&circuit)?)?)?;
            write(&output, &io::serialize_tbn(&t))?;
            println!("wrote {}: {} fluents, {} actions", output.display(), t.n_fluents(), t.n_actions());
            println!("output fluents: {:?}", layout.outputs);
            Ok(())
        }
        CompileCommand::SuccinctCvp { instance, gap, test_exponent, output } => {
            let s = match parse_source(&read(&instance)?)? {
                Source::Succinct(s) => s,
                Source::Circuit(c) => synthesize_succinct_instance(&c)?.0,
                _ => bail!("{} is neither a succinct instance nor a netlist", instance.display()),
            };
            let mode = test_exponent.map_or(ExponentMode::Production, ExponentMode::Test);
            emit(&succinct_cvp_to_2tbn(&s, gap, mode)?, &output)
        }
        CompileCommand::Inf { cnf, output } => {
            emit(&infinite_horizon_sat_gadget(&io::parse_cnf(&read(&cnf)?)?), &output)
        }
    }
}

fn value(pomdp: &Path, class: ClassArg, metric: &Metric, witness: Option<&Path>, caps: &Caps) -> Result<()> {
    let m = load_pomdp(pomdp)?;
    let (v, policy) = match class {
        ClassArg::Stat => {
            let o = brute_force_stationary_value_pruned(&m, metric, caps)?;
            (o.value, Some(Policy::Stationary(o.policy)))
        }
        ClassArg::Time => {
            let o = brute_force_time_dependent_value(&m, metric, caps)?;
            (o.value, Some(Policy::TimeDependent(o.policy)))
        }
        ClassArg::Hist => (exact_history_value(&m, metric, caps)?.value, None),
    };
    println!("value: {}", rat::fmt(&v));
    if let Some(path) = witness {
        let p = policy.context("history-dependent optima are not written as policies")?;
        write(path, &io::serialize_policy(&p)?)?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<ExitCode> {
    let caps = Caps::from_env()?;
    match cli.command {
        Command::Compile { what } => compile(what)?,
        Command::Eval { pomdp, policy, metric } => {
            let m = load_pomdp(&pomdp)?;
            let p = io::parse_policy(&read(&policy)?).with_context(|| policy.display().to_string())?;
            let metric = metric.metric()?;
            println!("value: {}", rat::fmt(&performance(&m, &p, &metric)?));
        }
        Command::Value { pomdp, class, metric, witness } => {
            value(&pomdp, class, &metric.metric()?, witness.as_deref(), &caps)?
        }
        Command::Verify { source, via } => {
            let mut src = parse_source(&read(&source)?).with_context(|| source.display().to_string())?;
            let how = via.construction(&src)?;
            if let (Source::Circuit(c), Construction::SuccinctCvp { .. }) = (&src, &how) {
                src = Source::Succinct(synthesize_succinct_instance(c)?.0);
            }
            let report = verify_source(&src, &how, &caps)?;
            print!("{report}");
            if report.checks.is_empty() {
                println!("no checks: instance lies outside the promise");
            }
            return Ok(if report.passed() { ExitCode::SUCCESS } else { ExitCode::from(1) });
        }
        Command::Bounds { pomdp, metric } => {
            let m = load_pomdp(&pomdp)?;
            println!("delta: {}", rat::fmt(&positive_value_lower_bound(&m, &metric.metric()?)?));
        }
        Command::Expand { tbn, reachable, output } => {
            let t = io::parse_tbn(&read(&tbn)?).with_context(|| tbn.display().to_string())?;
            let m = if reachable { expand_2tbn_reachable(&t, &caps)?.0 } else { expand_2tbn(&t, &caps)? };
            write(&output, &io::serialize_pomdp(&m))?;
            println!("wrote {}: {} states, {} actions", output.display(), m.n_states(), m.n_actions());
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
