mod render;
mod report;

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use cfp_core::classifier::ClassLabel;
use cfp_core::io::{self as formats, parse_angle, write_certificate, write_trace, ConfigFile};
use cfp_core::simulator::{Outcome, SchedulerPolicy};
use cfp_core::sweep::{ExperimentSpec, FramePolicy, InitialClass, UtpCell};
use cfp_core::utp::{Verdict, RULE_NAMES as UTP_RULES};
use cfp_core::{classify, ExactAngle};

/// Exit status of `demo-utp` when the adversary's groups merged.
const EXIT_MERGED: u8 = 3;
/// Exit status of `demo-utp` when the biangular structure was lost.
const EXIT_STRUCTURE_LOST: u8 = 4;
/// Exit status of `demo-utp` when the rule formed a regular n-gon.
const EXIT_VIOLATED: u8 = 5;

#[derive(Parser)]
#[command(name = "cfp", version, about = "Circle formation for oblivious robots: generate, classify, simulate, render")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a configuration of the requested class (self-checked).
    Generate(GenerateArgs),
    /// Print the class of a configuration file and its structure.
    Classify {
        file: PathBuf,
    },
    /// Simulate the protocol and write a JSON-lines trace.
    Run(RunArgs),
    /// Render a trace as one SVG per step.
    Render {
        trace: PathBuf,
        /// Output directory.
        #[arg(long, default_value = "frames")]
        out: PathBuf,
    },
    /// Run the adversarial scheduler against an on-circle rule.
    DemoUtp(DemoArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ClassArg {
    Regular,
    StrictBiangular,
    QuasiArbitrary,
    QuasiAligned,
}

#[derive(Args)]
struct InitialArgs {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, value_enum)]
    class: Option<ClassArg>,
    /// Smaller biangular angle, e.g. `pi/10`, `18deg`, `1/20turn`.
    #[arg(long, default_value = "pi/10")]
    alpha: String,
    #[arg(long, env = "CFP_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1e-9)]
    epsilon: f64,
}

impl InitialArgs {
    fn initial(&self) -> Result<(usize, InitialClass)> {
        let n = self.n.ok_or_else(|| anyhow!("--n is required"))?;
        let class = self.class.ok_or_else(|| anyhow!("--class is required"))?;
        let initial = match class {
            ClassArg::Regular => InitialClass::Regular,
            ClassArg::StrictBiangular => InitialClass::StrictBiangular {
                alpha: parse_angle(&self.alpha)?,
            },
            ClassArg::QuasiArbitrary => InitialClass::QuasiArbitrary { seed: self.seed },
            ClassArg::QuasiAligned => InitialClass::QuasiAligned { seed: self.seed },
        };
        Ok((n, initial))
    }
}

#[derive(Args)]
struct GenerateArgs {
    #[command(flatten)]
    initial: InitialArgs,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    initial: InitialArgs,
    /// Start from this configuration file instead of --n/--class.
    #[arg(long, conflicts_with = "class")]
    config: Option<PathBuf>,
    /// Read the whole experiment from a JSON spec; other flags are ignored.
    #[arg(long)]
    spec: Option<PathBuf>,
    /// `synchronous`, `round-robin[:BLOCK]`, `random-fair[:K]` or
    /// `scripted:0,1/2,3`.
    #[arg(long, default_value = "random-fair:3")]
    scheduler: String,
    /// Local frames: `random` (seeded by --seed) or `identity`.
    #[arg(long, default_value = "random")]
    frames: String,
    #[arg(long, default_value = "ngon")]
    rule: String,
    #[arg(long, default_value_t = 2000)]
    budget: u64,
    /// Trace file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DemoArgs {
    #[arg(long, default_value = "midpoint")]
    rule: String,
    #[arg(long, default_value_t = 10)]
    n: usize,
    #[arg(long, default_value = "pi/10")]
    alpha: String,
    #[arg(long, default_value_t = 10_000)]
    budget: u64,
    /// Certificate file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", error_chain(&e));
            ExitCode::FAILURE
        }
    }
}

/// The context chain joined by `: `, skipping causes already quoted by the
/// message above them.
fn error_chain(e: &anyhow::Error) -> String {
    let mut out = String::new();
    for cause in e.chain() {
        let msg = cause.to_string();
        if out.ends_with(&msg) {
            continue;
        }
        if !out.is_empty() {
            out.push_str(": ");
        }
        out.push_str(&msg);
    }
    out
}

fn dispatch(cmd: Command) -> Result<ExitCode> {
    match cmd {
        Command::Generate(a) => generate(a),
        Command::Classify { file } => classify_file(&file),
        Command::Run(a) => run(a),
        Command::Render { trace, out } => render_trace(&trace, &out),
        Command::DemoUtp(a) => demo_utp(a),
    }
    .map(|code| code.unwrap_or(ExitCode::SUCCESS))
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn read_to_string(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn expected_label(class: &InitialClass) -> Option<ClassLabel> {
    match class {
        InitialClass::Regular => Some(ClassLabel::RegularNGon),
        InitialClass::StrictBiangular { .. } => Some(ClassLabel::StrictBiangular),
        InitialClass::QuasiArbitrary { .. } => Some(ClassLabel::QuasiArbitrary),
        InitialClass::QuasiAligned { .. } => Some(ClassLabel::QuasiAligned),
        InitialClass::Explicit { .. } => None,
    }
}

fn generate(a: GenerateArgs) -> Result<Option<ExitCode>> {
    let (n, initial) = a.initial.initial()?;
    let mut spec = ExperimentSpec::new(n, initial, SchedulerPolicy::Synchronous, a.initial.seed, 1);
    spec.epsilon = a.initial.epsilon;
    let config = spec.initial_config()?;
    let got = classify(&config).label();
    if let Some(want) = expected_label(&spec.initial) {
        if got != want {
            bail!("generated configuration classifies as {got}, not {want}");
        }
    }
    let mut w = output(a.out.as_deref())?;
    writeln!(w, "{}", formats::config_to_json(&config))?;
    w.flush()?;
    Ok(None)
}

fn classify_file(path: &Path) -> Result<Option<ExitCode>> {
    let text = read_to_string(path)?;
    let config = formats::config_from_json(&text).with_context(|| format!("parsing {}", path.display()))?;
    print!("{}", report::describe(&config));
    Ok(None)
}

fn parse_scheduler(s: &str, seed: u64) -> Result<SchedulerPolicy> {
    let (kind, arg) = match s.split_once(':') {
        Some((k, a)) => (k, Some(a)),
        None => (s, None),
    };
    let number = |default: usize| -> Result<usize> {
        arg.map_or(Ok(default), |a| a.parse().with_context(|| format!("bad scheduler argument `{a}`")))
    };
    Ok(match kind {
        "synchronous" => SchedulerPolicy::Synchronous,
        "round-robin" => SchedulerPolicy::RoundRobin { block: number(1)? },
        "random-fair" => SchedulerPolicy::SeededRandomFair { seed, k: number(3)? },
        "scripted" => {
            let sets = arg
                .ok_or_else(|| anyhow!("scripted needs activation sets, e.g. scripted:0,1/2"))?
                .split('/')
                .map(|set| {
                    set.split(',')
                        .map(|i| i.trim().parse::<usize>().with_context(|| format!("bad robot index `{i}`")))
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<Vec<_>>>()?;
            SchedulerPolicy::Scripted { sets }
        }
        other => bail!("unknown scheduler `{other}` (synchronous, round-robin, random-fair, scripted)"),
    })
}

fn run_spec(a: &RunArgs) -> Result<ExperimentSpec> {
    if let Some(p) = &a.spec {
        return serde_json::from_str(&read_to_string(p)?).with_context(|| format!("parsing spec {}", p.display()));
    }
    let seed = a.initial.seed;
    let (n, initial) = match &a.config {
        Some(p) => {
            let text = read_to_string(p)?;
            let config: ConfigFile =
                serde_json::from_str(&text).with_context(|| format!("parsing {}", p.display()))?;
            (config.n, InitialClass::Explicit { config })
        }
        None => a.initial.initial()?,
    };
    let frames = match a.frames.as_str() {
        "random" => FramePolicy::Random { seed },
        "identity" => FramePolicy::Identity,
        other => bail!("unknown frame policy `{other}` (random, identity)"),
    };
    Ok(ExperimentSpec {
        n,
        initial,
        scheduler: parse_scheduler(&a.scheduler, seed)?,
        frames,
        rule: a.rule.clone(),
        budget: a.budget,
        epsilon: a.initial.epsilon,
    })
}

fn run(a: RunArgs) -> Result<Option<ExitCode>> {
    let spec = run_spec(&a)?;
    let trace = spec.run()?;
    let mut w = output(a.out.as_deref())?;
    write_trace(&mut w, Some(&spec), &trace)?;
    drop(w);
    // the summary goes to stderr when the trace itself is on stdout
    let mut summary: Box<dyn Write> = if a.out.is_some() {
        Box::new(io::stdout().lock())
    } else {
        Box::new(io::stderr().lock())
    };
    let outcome = match trace.outcome {
        Outcome::Formed { step } => format!("Formed@{step}"),
        Outcome::Quiescent { step } => format!("Quiescent@{step}"),
        Outcome::BudgetExhausted => "BudgetExhausted".into(),
    };
    let classes: Vec<&str> = trace.class_runs().iter().map(|c| c.as_str()).collect();
    writeln!(summary, "outcome: {outcome}")?;
    writeln!(summary, "steps: {}", trace.steps.len())?;
    writeln!(summary, "classes: {}", classes.join(" -> "))?;
    writeln!(summary, "warnings: {}", trace.steps.iter().map(|s| s.warnings.len()).sum::<usize>())?;
    Ok(None)
}

fn render_trace(path: &Path, out: &Path) -> Result<Option<ExitCode>> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let trace = formats::read_trace(BufReader::new(file)).with_context(|| format!("reading {}", path.display()))?;
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let frames = render::frames(&trace);
    let width = frames.len().saturating_sub(1).to_string().len().max(3);
    for (i, doc) in frames.iter().enumerate() {
        let p = out.join(format!("step-{i:0width$}.svg"));
        svg::save(&p, doc).with_context(|| format!("writing {}", p.display()))?;
    }
    println!("wrote {} frames to {}", frames.len(), out.display());
    Ok(None)
}

fn demo_utp(a: DemoArgs) -> Result<Option<ExitCode>> {
    if !UTP_RULES.contains(&a.rule.as_str()) {
        bail!("unknown rule `{}` (known: {})", a.rule, UTP_RULES.join(", "));
    }
    let alpha: ExactAngle = parse_angle(&a.alpha)?;
    let cell = UtpCell {
        rule: a.rule.clone(),
        n: a.n,
        alpha,
        budget: a.budget,
    };
    let cert = match cell.demonstrate() {
        Ok(c) => c,
        Err(cfp_core::sweep::SweepError::Utp(cfp_core::utp::UtpError::CertificateViolated { certificate, .. })) => {
            *certificate
        }
        Err(e) => return Err(e.into()),
    };
    let mut w = output(a.out.as_deref())?;
    write_certificate(&mut w, &cert)?;
    drop(w);
    let (text, code) = match cert.verdict {
        Verdict::Certified => ("certified: no regular n-gon formed".to_string(), ExitCode::SUCCESS),
        Verdict::GroupsMerged { step } => (
            format!("groups merged at step {step}: separation impossible"),
            ExitCode::from(EXIT_MERGED),
        ),
        Verdict::StructureLost { step } => (
            format!("biangular structure lost at step {step}"),
            ExitCode::from(EXIT_STRUCTURE_LOST),
        ),
        Verdict::Violated { step } => (
            format!("VIOLATED: regular n-gon formed at step {step}"),
            ExitCode::from(EXIT_VIOLATED),
        ),
    };
    eprintln!(
        "{} n={} α={}: {text} ({} steps, {} merge hazards)",
        cert.rule,
        cert.n,
        cert.alpha,
        cert.steps.len(),
        cert.merge_hazards()
    );
    Ok(Some(code))
}
