use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use contestq::concavity::{self, Variant};
use contestq::contiguous::{self, Precheck};
use contestq::dynamics::{self, GraphMode, PathOutcome, Policy};
use contestq::format::{self, ProfileSpec};
use contestq::game::PneCheck;
use contestq::instances::{self, InstanceId};
use contestq::payments;
use contestq::potential;
use contestq::solvers::{self, Scope};
use contestq::{ContestGame, Limits, QualityVector, Rational};

#[derive(Parser)]
#[command(
    name = "contestq",
    version,
    about = "Pure Nash equilibria of discrete contest games"
)]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Text)]
    format: OutputFormat,
    /// Cap on both profiles scanned and graph nodes built.
    #[arg(long, global = true, env = "CONTESTQ_CAP")]
    cap: Option<u64>,
    /// Worker threads for the parallel solvers (default: all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Print elapsed time in text output.
    #[arg(long, global = true)]
    timing: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Text,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Brute,
    Contiguous,
    AllAtOne,
    Potential,
}

#[derive(Clone, Copy, ValueEnum)]
enum PolicyArg {
    First,
    Best,
    Random,
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    Auto,
    Specific,
    Invariant,
}

#[derive(Clone, Copy, ValueEnum)]
enum InstanceName {
    Counterexample1,
    Counterexample2,
    MatchingPennies,
    FipVoluntary,
    FipMandatory,
    LowerBounded,
}

#[derive(Subcommand)]
enum Command {
    /// Find a pure Nash equilibrium.
    Solve {
        #[arg(long)]
        game: PathBuf,
        #[arg(long, value_enum, default_value_t = Method::Brute)]
        method: Method,
        /// List every equilibrium (brute force only).
        #[arg(long)]
        all: bool,
        /// Concavity reading for the contiguous method.
        #[arg(long, value_enum, default_value_t = VariantArg::Auto)]
        variant: VariantArg,
        /// Skip the concavity check before the contiguous method.
        #[arg(long)]
        trust: bool,
        /// Start of the potential ascent (default: everyone at quality 1).
        #[arg(long)]
        start: Option<ProfileSpec>,
    },
    /// Check whether a profile is a pure Nash equilibrium.
    Verify {
        #[arg(long)]
        game: PathBuf,
        /// One-based qualities `1,2,1`, or loads `L:2,1,0`.
        #[arg(
            long,
            conflicts_with = "profile_file",
            required_unless_present = "profile_file"
        )]
        profile: Option<ProfileSpec>,
        /// JSON array of qualities, or an object with a `profile` field.
        #[arg(long)]
        profile_file: Option<PathBuf>,
    },
    /// Follow an improvement path.
    Dynamics {
        #[arg(long)]
        game: PathBuf,
        #[arg(long)]
        start: Option<ProfileSpec>,
        #[arg(long, value_enum, default_value_t = PolicyArg::First)]
        policy: PolicyArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 10_000)]
        max_steps: usize,
    },
    /// Build the improvement graph and look for cycles and sinks.
    Graph {
        #[arg(long)]
        game: PathBuf,
        /// Nodes are load vectors instead of profiles.
        #[arg(long)]
        anonymous: bool,
        /// Write the graph in DOT format.
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Check three-discrete concavity of the payments.
    Concavity {
        #[arg(long)]
        game: PathBuf,
        #[arg(long, value_enum, default_value_t = VariantArg::Auto)]
        variant: VariantArg,
    },
    /// Build a catalog instance.
    Instance {
        #[arg(value_enum)]
        id: InstanceName,
        #[arg(long, default_value_t = 2)]
        k: usize,
        #[arg(long, default_value_t = 3)]
        n: usize,
        #[arg(long, default_value_t = 3)]
        q: usize,
        /// Comma-separated skills for `lower-bounded`.
        #[arg(long, default_value = "2,2")]
        skills: String,
        /// Comma-separated efforts for `lower-bounded`.
        #[arg(long, default_value = "1,2,3")]
        efforts: String,
        /// Write the game file here instead of stdout.
        #[arg(long)]
        emit: Option<PathBuf>,
        /// Check the instance's certificate.
        #[arg(long)]
        verify: bool,
    },
    /// Report the payment classes and validation warnings.
    Classify {
        #[arg(long)]
        game: PathBuf,
    },
}

/// Exit status of a command that ran to completion.
#[derive(Clone, Copy, PartialEq, Eq)]
enum Outcome {
    Positive,
    Negative,
}

struct Ctx {
    format: OutputFormat,
    limits: Limits,
    timing: bool,
    started: Instant,
}

impl Ctx {
    fn emit(&self, text: String, mut value: Value) {
        match self.format {
            OutputFormat::Text => {
                print!("{text}");
                if self.timing {
                    println!("time {:.3} ms", self.elapsed_ms());
                }
            }
            OutputFormat::Json => {
                if let Value::Object(map) = &mut value {
                    map.insert("elapsed_ms".into(), json!(self.elapsed_ms()));
                }
                println!(
                    "{}",
                    serde_json::to_string_pretty(&value).expect("values serialize")
                );
            }
        }
    }

    fn elapsed_ms(&self) -> f64 {
        self.started.elapsed().as_secs_f64() * 1000.0
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(workers) = cli.workers {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let ctx = Ctx {
        format: cli.format,
        limits: cli.cap.map(Limits::uniform).unwrap_or_default(),
        timing: cli.timing,
        started: Instant::now(),
    };
    match run(cli.command, &ctx) {
        Ok(Outcome::Positive) => ExitCode::SUCCESS,
        Ok(Outcome::Negative) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command, ctx: &Ctx) -> Result<Outcome> {
    match command {
        Command::Solve {
            game,
            method,
            all,
            variant,
            trust,
            start,
        } => solve(ctx, &load_game(&game)?, method, all, variant, trust, start),
        Command::Verify {
            game,
            profile,
            profile_file,
        } => {
            let game = load_game(&game)?;
            let profile = match (profile, profile_file) {
                (Some(spec), _) => spec.resolve(&game)?,
                (None, Some(path)) => read_profile_file(&game, &path)?,
                (None, None) => bail!("give --profile or --profile-file"),
            };
            verify(ctx, &game, &profile)
        }
        Command::Dynamics {
            game,
            start,
            policy,
            seed,
            max_steps,
        } => {
            let game = load_game(&game)?;
            let start = start_profile(&game, start)?;
            let policy = match policy {
                PolicyArg::First => Policy::FirstImproving,
                PolicyArg::Best => Policy::BestResponse,
                PolicyArg::Random => Policy::Random(seed),
            };
            run_dynamics(ctx, &game, &start, policy, max_steps)
        }
        Command::Graph {
            game,
            anonymous,
            dot,
        } => graph(ctx, &load_game(&game)?, anonymous, dot.as_deref()),
        Command::Concavity { game, variant } => {
            let game = load_game(&game)?;
            check_concavity(ctx, &game, variant)
        }
        Command::Instance {
            id,
            k,
            n,
            q,
            skills,
            efforts,
            emit,
            verify,
        } => {
            let id = match id {
                InstanceName::Counterexample1 => InstanceId::Counterexample1,
                InstanceName::Counterexample2 => InstanceId::Counterexample2 { k },
                InstanceName::MatchingPennies => InstanceId::MatchingPennies,
                InstanceName::FipVoluntary => InstanceId::FipVoluntary { n, q },
                InstanceName::FipMandatory => InstanceId::FipMandatory { n, q },
                InstanceName::LowerBounded => InstanceId::LowerBoundedSkills {
                    skills: parse_rationals(&skills)?,
                    efforts: parse_rationals(&efforts)?,
                },
            };
            instance(ctx, id, emit.as_deref(), verify)
        }
        Command::Classify { game } => classify(ctx, &load_game(&game)?),
    }
}

fn load_game(path: &Path) -> Result<ContestGame> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    format::parse_game(&text).with_context(|| format!("loading {}", path.display()))
}

fn parse_rationals(list: &str) -> Result<Vec<Rational>> {
    list.split(',')
        .map(|s| s.parse::<Rational>().map_err(Into::into))
        .collect()
}

fn read_profile_file(game: &ContestGame, path: &Path) -> Result<QualityVector> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let value: Value =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    let array = match &value {
        Value::Object(map) => map.get("profile").context("no \"profile\" field")?,
        other => other,
    };
    let choices: Vec<usize> =
        serde_json::from_value(array.clone()).context("profile must be an array of qualities")?;
    Ok(game.profile_from_one_based(&choices)?)
}

fn start_profile(game: &ContestGame, start: Option<ProfileSpec>) -> Result<QualityVector> {
    Ok(match start {
        Some(spec) => spec.resolve(game)?,
        None => QualityVector::from_zero_based_unchecked(vec![0; game.n()]),
    })
}

fn resolve_variant(game: &ContestGame, variant: VariantArg, limits: &Limits) -> Result<Variant> {
    Ok(match variant {
        VariantArg::Specific => Variant::Specific,
        VariantArg::Invariant => Variant::Invariant,
        VariantArg::Auto => {
            if payments::classify(game, limits)?.player_invariant {
                Variant::Invariant
            } else {
                Variant::Specific
            }
        }
    })
}

fn variant_name(variant: Variant) -> &'static str {
    match variant {
        Variant::Specific => "specific",
        Variant::Invariant => "invariant",
    }
}

fn join<T: ToString>(items: &[T]) -> String {
    items.iter().map(T::to_string).collect::<Vec<_>>().join(" ")
}

fn strings<T: ToString>(items: &[T]) -> Vec<String> {
    items.iter().map(T::to_string).collect()
}

fn equilibrium_report(game: &ContestGame, profile: &QualityVector) -> (String, Value) {
    let loads = game.load_of(profile);
    let utilities = game.utilities(profile);
    let text = format!(
        "pure Nash equilibrium {profile}\nloads {loads}\nutilities {}\n",
        join(&utilities)
    );
    let value = json!({
        "profile": profile.to_one_based(),
        "loads": loads.as_slice(),
        "utilities": strings(&utilities),
    });
    (text, value)
}

fn solve(
    ctx: &Ctx,
    game: &ContestGame,
    method: Method,
    all: bool,
    variant: VariantArg,
    trust: bool,
    start: Option<ProfileSpec>,
) -> Result<Outcome> {
    if all && !matches!(method, Method::Brute) {
        bail!("--all needs --method brute");
    }
    let (found, stats_text, stats): (Option<QualityVector>, String, Value) = match method {
        Method::Brute => {
            let scope = if all { Scope::All } else { Scope::First };
            let brute = solvers::brute_force_pne(game, &ctx.limits, scope)?;
            if all {
                let text = if brute.equilibria.is_empty() {
                    format!(
                        "no pure Nash equilibrium ({} profiles scanned)\n",
                        brute.scanned
                    )
                } else {
                    let mut text = format!(
                        "{} pure Nash equilibria ({} profiles scanned)\n",
                        brute.equilibria.len(),
                        brute.scanned
                    );
                    for p in &brute.equilibria {
                        text.push_str(&format!("{p} loads {}\n", game.load_of(p)));
                    }
                    text
                };
                let value = json!({
                    "method": "brute",
                    "found": !brute.equilibria.is_empty(),
                    "equilibria": brute.equilibria.iter().map(QualityVector::to_one_based).collect::<Vec<_>>(),
                    "profile": brute.equilibria.first().map(QualityVector::to_one_based),
                    "profiles_scanned": brute.scanned,
                });
                ctx.emit(text, value);
                return Ok(if brute.equilibria.is_empty() {
                    Outcome::Negative
                } else {
                    Outcome::Positive
                });
            }
            (
                brute.equilibria.into_iter().next(),
                format!("{} profiles scanned", brute.scanned),
                json!({"method": "brute", "profiles_scanned": brute.scanned}),
            )
        }
        Method::Contiguous => {
            let variant = resolve_variant(game, variant, &ctx.limits)?;
            let precheck = if trust {
                Precheck::Trust
            } else {
                Precheck::Verify
            };
            let out = match variant {
                Variant::Specific => {
                    contiguous::solve_contiguous_specific(game, precheck, &ctx.limits)?
                }
                Variant::Invariant => {
                    contiguous::solve_contiguous_invariant(game, precheck, &ctx.limits)?
                }
            };
            (
                out.assignment.map(|a| a.profile),
                format!("{} candidates checked", out.candidates),
                json!({"method": "contiguous", "variant": variant_name(variant), "candidates": out.candidates}),
            )
        }
        Method::AllAtOne => {
            let out = solvers::solve_all_at_lowest(game)?;
            let relation = if out.bound_holds { ">=" } else { "<" };
            if !out.bound_holds {
                ctx.emit(
                    format!(
                        "skill bound fails (min skill {} {relation} bound {}), no conclusion\n",
                        out.min_skill, out.bound
                    ),
                    json!({
                        "method": "all-at-one",
                        "found": false,
                        "profile": null,
                        "bound": out.bound.to_string(),
                        "min_skill": out.min_skill.to_string(),
                        "bound_holds": false,
                    }),
                );
                return Ok(Outcome::Negative);
            }
            (
                out.profile,
                format!("min skill {} {relation} bound {}", out.min_skill, out.bound),
                json!({
                    "method": "all-at-one",
                    "bound": out.bound.to_string(),
                    "min_skill": out.min_skill.to_string(),
                    "bound_holds": out.bound_holds,
                }),
            )
        }
        Method::Potential => {
            let start = start_profile(game, start)?;
            let ascent = potential::potential_ascent(game, &start, &ctx.limits)?;
            let phi = potential::potential(game, &ascent.profile, &ctx.limits)?;
            (
                Some(ascent.profile),
                format!(
                    "{} ascent steps from {start}, potential {phi}",
                    ascent.steps
                ),
                json!({"method": "potential", "steps": ascent.steps, "potential": phi.to_string()}),
            )
        }
    };
    let mut value = stats;
    match found {
        Some(profile) => {
            let (text, report) = equilibrium_report(game, &profile);
            merge(&mut value, report);
            value["found"] = json!(true);
            ctx.emit(format!("{text}{stats_text}\n"), value);
            Ok(Outcome::Positive)
        }
        None => {
            value["found"] = json!(false);
            value["profile"] = Value::Null;
            ctx.emit(format!("no pure Nash equilibrium ({stats_text})\n"), value);
            Ok(Outcome::Negative)
        }
    }
}

fn merge(into: &mut Value, from: Value) {
    if let (Value::Object(a), Value::Object(b)) = (into, from) {
        a.extend(b);
    }
}

fn verify(ctx: &Ctx, game: &ContestGame, profile: &QualityVector) -> Result<Outcome> {
    match game.is_pne(profile) {
        PneCheck::Equilibrium => {
            let (text, mut value) = equilibrium_report(game, profile);
            value["equilibrium"] = json!(true);
            ctx.emit(text, value);
            Ok(Outcome::Positive)
        }
        PneCheck::Deviation { player, to, gain } => {
            let text = format!(
                "{profile} is not an equilibrium: player {} gains {gain} by moving to quality {}\n",
                player + 1,
                to + 1
            );
            let value = json!({
                "profile": profile.to_one_based(),
                "equilibrium": false,
                "deviation": {"player": player + 1, "to": to + 1, "gain": gain.to_string()},
            });
            ctx.emit(text, value);
            Ok(Outcome::Negative)
        }
    }
}

fn run_dynamics(
    ctx: &Ctx,
    game: &ContestGame,
    start: &QualityVector,
    policy: Policy,
    max_steps: usize,
) -> Result<Outcome> {
    let outcome = dynamics::run_improvement_path(game, start, policy, max_steps)?;
    let (text, value, result) = match outcome {
        PathOutcome::Converged { profile, steps } => (
            format!("converged to {profile} after {steps} steps\n"),
            json!({"outcome": "converged", "profile": profile.to_one_based(), "steps": steps}),
            Outcome::Positive,
        ),
        PathOutcome::CycleDetected { cycle } => (
            format!(
                "cycle of length {}: {}\n",
                cycle.len() - 1,
                cycle
                    .iter()
                    .map(ToString::to_string)
                    .collect::<Vec<_>>()
                    .join(" -> ")
            ),
            json!({
                "outcome": "cycle",
                "cycle": cycle.iter().map(QualityVector::to_one_based).collect::<Vec<_>>(),
            }),
            Outcome::Negative,
        ),
        PathOutcome::Truncated { profile, steps } => (
            format!("stopped at {profile} after {steps} steps\n"),
            json!({"outcome": "truncated", "profile": profile.to_one_based(), "steps": steps}),
            Outcome::Negative,
        ),
    };
    ctx.emit(text, value);
    Ok(result)
}

fn graph(ctx: &Ctx, game: &ContestGame, anonymous: bool, dot: Option<&Path>) -> Result<Outcome> {
    let mode = if anonymous {
        GraphMode::Anonymous
    } else {
        GraphMode::Full
    };
    let (graph, analysis) = dynamics::analyze_graph(game, mode, &ctx.limits)?;
    if let Some(path) = dot {
        fs::write(path, graph.to_dot()).with_context(|| format!("writing {}", path.display()))?;
    }
    let sinks: Vec<String> = analysis.sinks.iter().map(|&v| graph.label(v)).collect();
    let cycle: Option<Vec<String>> = analysis
        .cycle
        .as_ref()
        .map(|c| c.iter().map(|&v| graph.label(v)).collect());
    let mut text = format!(
        "{} nodes, {} edges\n{}\nsinks {}\n",
        graph.node_count(),
        graph.edge_count(),
        if analysis.acyclic {
            "acyclic"
        } else {
            "cyclic"
        },
        if sinks.is_empty() {
            "none".to_string()
        } else {
            sinks.join(" ")
        },
    );
    if let Some(c) = &cycle {
        text.push_str(&format!("cycle {}\n", c.join(" -> ")));
    }
    let value = json!({
        "mode": if anonymous { "anonymous" } else { "full" },
        "nodes": graph.node_count(),
        "edges": graph.edge_count(),
        "acyclic": analysis.acyclic,
        "sinks": sinks,
        "cycle": cycle,
    });
    ctx.emit(text, value);
    Ok(if analysis.acyclic {
        Outcome::Positive
    } else {
        Outcome::Negative
    })
}

fn check_concavity(ctx: &Ctx, game: &ContestGame, variant: VariantArg) -> Result<Outcome> {
    let variant = resolve_variant(game, variant, &ctx.limits)?;
    let report = concavity::check(game, variant, &ctx.limits)?;
    let name = variant_name(variant);
    match &report.violation {
        None => {
            ctx.emit(
                format!(
                    "three-discrete concave ({name}): {} inequalities checked\n",
                    report.checked
                ),
                json!({"variant": name, "holds": true, "checked": report.checked}),
            );
            Ok(Outcome::Positive)
        }
        Some(v) => {
            let text = format!(
                "not three-discrete concave ({name}): player {}, loads {}, qualities {} {} {}: {} > {}\n",
                v.player + 1,
                v.loads,
                v.q_i + 1,
                v.q_k + 1,
                v.q + 1,
                v.lhs,
                v.rhs
            );
            let value = json!({
                "variant": name,
                "holds": false,
                "checked": report.checked,
                "violation": {
                    "player": v.player + 1,
                    "loads": v.loads.as_slice(),
                    "q_i": v.q_i + 1,
                    "q_k": v.q_k + 1,
                    "q": v.q + 1,
                    "lhs": v.lhs.to_string(),
                    "rhs": v.rhs.to_string(),
                },
            });
            ctx.emit(text, value);
            Ok(Outcome::Negative)
        }
    }
}

fn instance(ctx: &Ctx, id: InstanceId, emit: Option<&Path>, verify: bool) -> Result<Outcome> {
    let inst = instances::build(id)?;
    let game_json = format::game_to_json(&inst.game);
    if let Some(path) = emit {
        fs::write(path, format!("{game_json}\n"))
            .with_context(|| format!("writing {}", path.display()))?;
    }
    if !verify {
        if emit.is_none() {
            println!("{game_json}");
        } else {
            ctx.emit(
                format!("wrote {}\n", inst.id),
                json!({"instance": inst.id.to_string(), "written": true}),
            );
        }
        return Ok(Outcome::Positive);
    }
    let report = instances::verify_certificate(&inst, &ctx.limits)?;
    let mut text = format!("{}\n", inst.id);
    for r in &report.results {
        text.push_str(&format!(
            "{} {}: {}\n",
            if r.passed { "PASS" } else { "FAIL" },
            r.claim,
            r.detail
        ));
    }
    let value = json!({
        "instance": inst.id.to_string(),
        "passed": report.passed(),
        "claims": report.results.iter().map(|r| json!({
            "claim": r.claim.to_string(),
            "passed": r.passed,
            "detail": r.detail,
        })).collect::<Vec<_>>(),
    });
    ctx.emit(text, value);
    Ok(if report.passed() {
        Outcome::Positive
    } else {
        Outcome::Negative
    })
}

fn classify(ctx: &Ctx, game: &ContestGame) -> Result<Outcome> {
    let class = payments::classify(game, &ctx.limits)?;
    let warnings = game.validate(&ctx.limits);
    let constant = game.normalization_constant().map(ToString::to_string);
    let mut text = format!(
        "payment {}\noblivious {}\nplayer-invariant {}\n",
        game.payment_function().name(),
        yes_no(class.oblivious),
        yes_no(class.player_invariant)
    );
    if let Some(c) = &constant {
        text.push_str(&format!("normalization constant {c}\n"));
    }
    for w in &warnings {
        text.push_str(&format!("warning: {w}\n"));
    }
    let value = json!({
        "payment": game.payment_function().name(),
        "oblivious": class.oblivious,
        "player_invariant": class.player_invariant,
        "normalization_constant": constant,
        "warnings": strings(&warnings),
    });
    ctx.emit(text, value);
    Ok(Outcome::Positive)
}

fn yes_no(flag: bool) -> &'static str {
    if flag {
        "yes"
    } else {
        "no"
    }
}
