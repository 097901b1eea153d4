//! The `revgreedy` command line.
//!
//! Exit codes: 0 pass, 1 verification failure, 2 usage or input error,
//! 3 verification incomplete (a cap was hit).

use std::ffi::OsString;
use std::fmt::Display;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::consolidation::{verify_gamma_decrement, GammaConfig, GammaVerdict};
use crate::error::Error;
use crate::exact::{exact_opt, ExactConfig};
use crate::experiments::{
    gamma_battery, lower_case, separation_battery, sweep, trial_specs, upper_battery, SWEEP_HEADER,
};
use crate::format::{schedule_from_json, schedule_to_json, trace_from_json, trace_to_json, Generator, Instance};
use crate::kcenter::{reverse_greedy, TiePolicy};
use crate::lowerbound::{
    base_size, known_opt, phases_from_trace, scripted_schedule, to_dot, LowerBoundInstance, LEGALITY_CAP,
};
use crate::metric::{random_metric, Arithmetic, RandomKind};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INCOMPLETE: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "revgreedy", version, about = "Reverse greedy for k-center: run, verify, sweep, export")]
pub struct Cli {
    /// Seed for random instances, seeded tie policies and batteries.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Output format (defaults depend on the command).
    #[arg(long, global = true, value_enum)]
    format: Option<OutputFormat>,
    /// Write the main output here; a summary goes to standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Largest n solved by exact subset enumeration.
    #[arg(long, global = true, default_value_t = 20)]
    exact_cap: usize,
    /// Search-node budget of the exact oracle above `--exact-cap`.
    #[arg(long, global = true, default_value_t = 20_000_000)]
    exact_budget: u64,
    /// Most maximal cliques the Γ search may enumerate.
    #[arg(long, global = true, default_value_t = 100_000)]
    gamma_cap: usize,
    /// Trust scripted schedules and check final costs only.
    #[arg(long, global = true)]
    fast: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Json,
    Csv,
    Dot,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate an instance file.
    Gen {
        #[command(subcommand)]
        family: GenFamily,
    },
    /// Run reverse greedy on an instance and write its trace.
    Run(RunArgs),
    /// Check one of the approximation claims.
    Verify {
        #[command(subcommand)]
        target: VerifyTarget,
    },
    /// Scripted adversarial runs over a range of k, as CSV.
    Sweep {
        /// Range such as `2..10` (inclusive), a single value, or a list `2,4,8`.
        #[arg(long)]
        k: KRange,
    },
    /// Graphviz rendering of a lower-bound instance.
    ExportDot {
        #[arg(long)]
        instance: PathBuf,
        /// Trace whose removal phases colour the vertices.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Colour by the scripted schedule instead of a trace file.
        #[arg(long, conflicts_with = "trace")]
        scripted: bool,
    },
}

#[derive(Debug, Subcommand)]
enum GenFamily {
    /// The adversarial star family.
    Lowerbound {
        #[arg(long)]
        k: usize,
        /// Pad `C_0` with extra leaves up to this many points.
        #[arg(long)]
        n: Option<usize>,
        /// Also write the scripted phase schedule here.
        #[arg(long)]
        schedule: Option<PathBuf>,
    },
    /// A random metric.
    Random {
        #[arg(long, value_enum)]
        kind: KindArg,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long, default_value_t = 100.0)]
        side: f64,
        #[arg(long, default_value_t = 0.3)]
        edge_prob: f64,
        #[arg(long, default_value_t = 10)]
        max_weight: u64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum KindArg {
    Euclidean,
    RandomGraph,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PolicyArg {
    LowestIndex,
    SeededRandom,
    Scripted,
}

#[derive(Debug, Args)]
struct RunArgs {
    #[arg(long)]
    instance: PathBuf,
    /// Overrides the instance's own k.
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, value_enum, default_value_t = PolicyArg::LowestIndex)]
    policy: PolicyArg,
    /// Schedule file for `--policy scripted`; lower-bound instances default
    /// to their own scripted schedule.
    #[arg(long)]
    schedule: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum VerifyTarget {
    /// Scripted adversarial runs end at (2k − 2)·OPT.
    Lower {
        #[arg(long)]
        k: KRange,
    },
    /// Random battery: reverse greedy within 2k·OPT, farthest-first within 2·OPT.
    Upper {
        #[arg(long, default_value_t = 200)]
        trials: usize,
        /// Largest instance size.
        #[arg(long, default_value_t = 12)]
        n: usize,
        /// Smallest instance size (defaults to `--n`).
        #[arg(long)]
        n_min: Option<usize>,
        #[arg(long, default_value = "2..4")]
        k: KRange,
    },
    /// Γ drops between consecutive critical states.
    Gamma {
        /// Lower-bound instance for this k (default), or k for `--instance`.
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, conflicts_with = "trials")]
        instance: Option<PathBuf>,
        /// Run a random battery collecting this many premise-satisfying runs.
        #[arg(long)]
        trials: Option<usize>,
        /// Largest instance size for the random battery.
        #[arg(long, default_value_t = 10)]
        n: usize,
    },
    /// Ratios on instances with well-separated optimal balls (advisory).
    Separation {
        #[arg(long, default_value_t = 50)]
        trials: usize,
        #[arg(long, default_value_t = 12)]
        n: usize,
        #[arg(long, default_value_t = 3)]
        k: usize,
    },
}

/// Inclusive `a..b`, a single value, or a comma list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KRange(pub Vec<usize>);

impl FromStr for KRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let bad = |e: std::num::ParseIntError| format!("invalid k range {s:?}: {e}");
        if let Some((a, b)) = s.split_once("..") {
            let b = b.strip_prefix('=').unwrap_or(b);
            let (a, b): (usize, usize) = (a.trim().parse().map_err(bad)?, b.trim().parse().map_err(bad)?);
            return Ok(KRange((a..=b).collect()));
        }
        s.split(',')
            .map(|x| x.trim().parse().map_err(bad))
            .collect::<Result<Vec<_>, _>>()
            .map(KRange)
    }
}

struct Failure {
    code: i32,
    message: String,
}

impl<E: Into<Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        let e = e.into();
        let code = match e {
            Error::ExactCapExceeded | Error::GammaInfeasible { .. } => EXIT_INCOMPLETE,
            _ => EXIT_USAGE,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn usage(message: impl Display) -> Failure {
    Failure {
        code: EXIT_USAGE,
        message: message.to_string(),
    }
}

type CmdResult = Result<i32, Failure>;

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match cli.dispatch() {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}

// A closed pipe (`| head`) is not an error worth reporting.
fn print_stdout(text: &str) -> Result<(), Failure> {
    let mut out = std::io::stdout().lock();
    match writeln!(out, "{text}").and_then(|_| out.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(Error::from(e).into()),
        _ => Ok(()),
    }
}

fn fmt_cost(c: f64, ar: Arithmetic) -> String {
    if ar.is_exact() {
        format!("{}", c as u64)
    } else {
        format!("{c}")
    }
}

fn fmt_ratio(r: f64) -> String {
    if r.fract() == 0.0 {
        format!("{}", r as u64)
    } else {
        format!("{r:.6}")
    }
}

impl Cli {
    fn exact(&self) -> ExactConfig {
        ExactConfig {
            enumeration_cap: self.exact_cap,
            node_budget: self.exact_budget,
        }
    }

    fn gamma_cfg(&self) -> GammaConfig {
        GammaConfig {
            max_cliques: self.gamma_cap,
            ..GammaConfig::default()
        }
    }

    fn format_or(&self, default: OutputFormat, allowed: &[OutputFormat]) -> Result<OutputFormat, Failure> {
        let f = self.format.unwrap_or(default);
        if allowed.contains(&f) {
            Ok(f)
        } else {
            Err(usage(format!("--format {f:?} is not supported by this command").to_lowercase()))
        }
    }

    /// Writes `payload` to `--out` and the summary to stdout, or the payload
    /// to stdout and the summary to stderr.
    fn emit(&self, payload: &str, summary: &str) -> Result<(), Failure> {
        match &self.out {
            Some(path) => {
                fs::write(path, payload).map_err(Error::from)?;
                print_stdout(summary)?;
            }
            None => {
                print_stdout(payload)?;
                eprintln!("{summary}");
            }
        }
        Ok(())
    }

    fn emit_report(&self, target: &str, passed: bool, body: impl Serialize, summary: &str) -> Result<(), Failure> {
        self.format_or(OutputFormat::Json, &[OutputFormat::Json])?;
        let doc = json!({ "version": 1, "target": target, "passed": passed, "report": body });
        let payload = serde_json::to_string_pretty(&doc).map_err(Error::from)?;
        self.emit(&payload, summary)
    }

    fn dispatch(&self) -> CmdResult {
        match &self.command {
            Command::Gen { family } => self.cmd_gen(family),
            Command::Run(args) => self.cmd_run(args),
            Command::Verify { target } => self.cmd_verify(target),
            Command::Sweep { k } => self.cmd_sweep(k),
            Command::ExportDot {
                instance,
                trace,
                scripted,
            } => self.cmd_export_dot(instance, trace.as_deref(), *scripted),
        }
    }

    fn cmd_gen(&self, family: &GenFamily) -> CmdResult {
        self.format_or(OutputFormat::Json, &[OutputFormat::Json])?;
        match family {
            GenFamily::Lowerbound { k, n, schedule } => {
                let inst = LowerBoundInstance::build(*k, *n)?;
                if let Some(path) = schedule {
                    fs::write(path, schedule_to_json(&inst, &scripted_schedule(&inst))?).map_err(Error::from)?;
                }
                let file = Instance::from_lower_bound(&inst);
                let summary = format!("n={} k={} formula_n={}", inst.n, inst.k, base_size(inst.k));
                self.emit(&file.to_json()?, &summary)?;
            }
            GenFamily::Random {
                kind,
                n,
                k,
                dim,
                side,
                edge_prob,
                max_weight,
            } => {
                let kind = match kind {
                    KindArg::Euclidean => RandomKind::Euclidean { dim: *dim, side: *side },
                    KindArg::RandomGraph => RandomKind::RandomGraph {
                        edge_prob: *edge_prob,
                        max_weight: *max_weight,
                    },
                };
                let metric = random_metric(kind, *n, self.seed)?;
                if let Some(k) = *k {
                    if k < 1 || k > *n {
                        return Err(Error::InvalidK { k, n: *n }.into());
                    }
                }
                let mut file = Instance::from_metric(metric, *k);
                file.generator = Some(Generator::Random {
                    kind,
                    n: *n,
                    seed: self.seed,
                });
                let summary = format!("n={} k={}", n, k.map_or("-".into(), |k| k.to_string()));
                self.emit(&file.to_json()?, &summary)?;
            }
        }
        Ok(EXIT_PASS)
    }

    fn cmd_run(&self, args: &RunArgs) -> CmdResult {
        self.format_or(OutputFormat::Json, &[OutputFormat::Json])?;
        let inst = Instance::load(&args.instance)?;
        let lb = inst.lower_bound()?;
        let m = &inst.metric;
        let k = args
            .k
            .or(inst.k)
            .ok_or_else(|| usage("no k: pass --k or store \"k\" in the instance"))?;
        let policy = match args.policy {
            PolicyArg::LowestIndex => TiePolicy::LowestIndex,
            PolicyArg::SeededRandom => TiePolicy::SeededRandom { seed: self.seed },
            PolicyArg::Scripted => {
                let sequence = match (&args.schedule, &lb) {
                    (Some(path), _) => schedule_from_json(&fs::read_to_string(path).map_err(Error::from)?)?
                        .2
                        .points(),
                    (None, Some(lb)) => scripted_schedule(lb).points(),
                    (None, None) => return Err(usage("--policy scripted needs --schedule")),
                };
                TiePolicy::Scripted { sequence }
            }
        };
        let trace = reverse_greedy(m, k, policy)?;
        let ar = m.arithmetic();
        let opt = match &lb {
            Some(lb) if lb.k == k => Some(known_opt(lb).opt_value),
            _ => match exact_opt(m, k, &self.exact()) {
                Ok(s) => Some(s.opt_value),
                Err(Error::ExactCapExceeded) => {
                    eprintln!("warning: exact oracle cap exceeded, ratio omitted");
                    None
                }
                Err(e) => return Err(e.into()),
            },
        };
        let mut summary = format!("final_cost={}", fmt_cost(trace.final_cost(), ar));
        if let Some(opt) = opt {
            summary += &format!(" opt={}", fmt_cost(opt, ar));
            if opt > 0.0 {
                summary += &format!(" ratio={}", fmt_ratio(trace.final_cost() / opt));
            }
        }
        self.emit(&trace_to_json(&trace)?, &summary)?;
        Ok(EXIT_PASS)
    }

    fn cmd_verify(&self, target: &VerifyTarget) -> CmdResult {
        match target {
            VerifyTarget::Lower { k } => {
                if !self.fast {
                    if let Some(&big) = k.0.iter().find(|&&k| k > LEGALITY_CAP) {
                        return Err(usage(format!(
                            "k = {big} exceeds the legality cap {LEGALITY_CAP}; pass --fast"
                        )));
                    }
                }
                let exact = self.exact();
                let cases = k
                    .0
                    .iter()
                    .map(|&k| lower_case(k, None, self.fast, &exact))
                    .collect::<Result<Vec<_>, _>>()?;
                let mut lines = Vec::new();
                for c in &cases {
                    lines.push(format!(
                        "k={} n={} final_cost={} opt={} ratio={} legality={} {}",
                        c.report.k,
                        c.report.n,
                        c.report.final_cost.map_or("-".into(), |v| fmt_cost(v, Arithmetic::Exact)),
                        fmt_cost(c.opt, Arithmetic::Exact),
                        fmt_ratio(c.ratio),
                        if c.report.legality_verified { "verified" } else { "unverified" },
                        if c.passed() { "PASS" } else { "FAIL" }
                    ));
                }
                let passed = cases.iter().all(|c| c.passed());
                self.emit_report("lower", passed, &cases, &lines.join("\n"))?;
                Ok(if passed { EXIT_PASS } else { EXIT_FAIL })
            }
            VerifyTarget::Upper { trials, n, n_min, k } => {
                if k.0.is_empty() {
                    return Err(usage("empty k range"));
                }
                let specs = trial_specs(*trials, (n_min.unwrap_or(*n), *n), &k.0, self.seed);
                let r = upper_battery(&specs, self.seed, &self.exact())?;
                let worst = r.trials.iter().map(|t| t.worst_ratio / t.spec.k as f64).fold(0.0, f64::max);
                let summary = format!(
                    "trials={} policies={} upper_violations={} greedy_violations={} worst_ratio_over_k={:.4} {}",
                    r.trials.len(),
                    r.policies,
                    r.upper_violations,
                    r.greedy_violations,
                    worst,
                    if r.passed() { "PASS" } else { "FAIL" }
                );
                self.emit_report("upper", r.passed(), &r, &summary)?;
                Ok(if r.passed() { EXIT_PASS } else { EXIT_FAIL })
            }
            VerifyTarget::Gamma { k, instance, trials, n } => self.verify_gamma(*k, instance.as_deref(), *trials, *n),
            VerifyTarget::Separation { trials, n, k } => {
                let r = separation_battery(*trials, *n, *k, self.seed, &self.exact())?;
                let summary = format!(
                    "trials={} separated={} above_two={} (advisory)",
                    r.trials.len(),
                    r.separated,
                    r.above_two
                );
                self.emit_report("separation", true, &r, &summary)?;
                Ok(EXIT_PASS)
            }
        }
    }

    fn verify_gamma(&self, k: Option<usize>, instance: Option<&Path>, trials: Option<usize>, n: usize) -> CmdResult {
        let cfg = self.gamma_cfg();
        if let Some(wanted) = trials {
            let ks: Vec<usize> = match k {
                Some(k) => vec![k],
                None => vec![2, 3, 4],
            };
            let b = gamma_battery(wanted, (4.min(n), n), &ks, self.seed, wanted * 200, &self.exact(), &cfg)?;
            let (fail, incomplete) = (b.failures(), b.incomplete());
            let passed = fail == 0 && incomplete == 0 && b.trials.len() == wanted;
            let summary = format!(
                "premise_runs={} examined={} failures={} incomplete={} {}",
                b.trials.len(),
                b.examined,
                fail,
                incomplete,
                if passed { "PASS" } else { "FAIL" }
            );
            self.emit_report("gamma", passed, &b, &summary)?;
            return Ok(if fail > 0 {
                EXIT_FAIL
            } else if incomplete > 0 || b.trials.len() < wanted {
                EXIT_INCOMPLETE
            } else {
                EXIT_PASS
            });
        }
        let (m, trace, opt) = match instance {
            Some(path) => {
                let inst = Instance::load(path)?;
                let k = k
                    .or(inst.k)
                    .ok_or_else(|| usage("no k: pass --k or store \"k\" in the instance"))?;
                let opt = exact_opt(&inst.metric, k, &self.exact())?;
                let policy = match inst.lower_bound()? {
                    Some(lb) if lb.k == k => TiePolicy::Scripted {
                        sequence: scripted_schedule(&lb).points(),
                    },
                    _ => TiePolicy::LowestIndex,
                };
                let trace = reverse_greedy(&inst.metric, k, policy)?;
                (inst.metric, trace, opt)
            }
            None => {
                let k = k.ok_or_else(|| usage("pass --k, --instance or --trials"))?;
                let lb = LowerBoundInstance::build(k, None)?;
                let trace = reverse_greedy(
                    &lb.metric,
                    k,
                    TiePolicy::Scripted {
                        sequence: scripted_schedule(&lb).points(),
                    },
                )?;
                let opt = known_opt(&lb);
                (lb.metric, trace, opt)
            }
        };
        let r = verify_gamma_decrement(&m, &trace, &opt, &cfg);
        let seq: Vec<String> = r
            .gamma_sequence
            .iter()
            .map(|g| g.gamma.map_or(format!("≥{}", g.lower_bound.unwrap_or(1)), |v| v.to_string()))
            .collect();
        let verdict = serde_json::to_value(r.verdict).map_err(Error::from)?;
        let summary = format!(
            "verdict={} critical={:?} gamma=[{}]",
            verdict.as_str().unwrap_or("?"),
            r.critical.0,
            seq.join(", ")
        );
        let code = match r.verdict {
            GammaVerdict::Fail => EXIT_FAIL,
            GammaVerdict::Incomplete => EXIT_INCOMPLETE,
            _ => EXIT_PASS,
        };
        self.emit_report("gamma", code == EXIT_PASS, &r, &summary)?;
        Ok(code)
    }

    fn cmd_sweep(&self, k: &KRange) -> CmdResult {
        let format = self.format_or(OutputFormat::Csv, &[OutputFormat::Csv, OutputFormat::Json])?;
        if !self.fast {
            if let Some(&big) = k.0.iter().find(|&&k| k > LEGALITY_CAP) {
                return Err(usage(format!(
                    "k = {big} exceeds the legality cap {LEGALITY_CAP}; pass --fast"
                )));
            }
        }
        if k.0.iter().any(|&k| k < 2) {
            return Err(Error::ConstructionNeedsK2.into());
        }
        let rows = sweep(&k.0, self.fast)?;
        let payload = match format {
            OutputFormat::Json => serde_json::to_string_pretty(&rows).map_err(Error::from)?,
            _ => std::iter::once(SWEEP_HEADER.to_string())
                .chain(rows.iter().map(|r| r.csv()))
                .collect::<Vec<_>>()
                .join("\n"),
        };
        let summary = format!("rows={}", rows.len());
        self.emit(&payload, &summary)?;
        Ok(if rows.iter().all(|r| r.legality != "failed") {
            EXIT_PASS
        } else {
            EXIT_FAIL
        })
    }

    fn cmd_export_dot(&self, instance: &Path, trace: Option<&Path>, scripted: bool) -> CmdResult {
        self.format_or(OutputFormat::Dot, &[OutputFormat::Dot])?;
        let inst = Instance::load(instance)?;
        let lb = inst
            .lower_bound()?
            .ok_or_else(|| usage("export-dot needs an instance generated by `gen lowerbound`"))?;
        let phases = match trace {
            Some(path) => {
                let t = trace_from_json(&fs::read_to_string(path).map_err(Error::from)?)?;
                if t.n != lb.n {
                    return Err(usage("trace does not belong to this instance"));
                }
                Some(phases_from_trace(&t))
            }
            None if scripted => Some(scripted_schedule(&lb).phase_of(lb.n)),
            None => None,
        };
        let dot = to_dot(&lb, phases.as_deref());
        let summary = format!("nodes={} clusters={}", lb.n, lb.stars.len());
        self.emit(&dot, &summary)?;
        Ok(EXIT_PASS)
    }
}
