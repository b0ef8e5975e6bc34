use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lnfplan::frontend::load_task;
use lnfplan::gen::{generate, Family};
use lnfplan::lnf::{check_acyclic, compute_relevance, normalize, verify_lnf, LnfTask};
use lnfplan::model::GroundTask;
use lnfplan::plan_io::{format_plan, parse_plan};
use lnfplan::rational::{int, parse_rational, Rational};
use lnfplan::relaxation::{check_monotonic_structure, decide_strong, Verdict};
use lnfplan::rpg::GraphBuilder;
use lnfplan::search::{solve, CostModel, CostWeights, Mode, SearchConfig, DEFAULT_MAX_EXPANSIONS};
use lnfplan::validate::validate_plan;
use lnfplan::NumericTask;

#[derive(Parser)]
#[command(name = "lnfplan", version, about = "Forward-search planner for numeric tasks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Search for a plan; the plan goes to stdout, statistics to stderr.
    Solve {
        domain: PathBuf,
        problem: PathBuf,
        #[command(flatten)]
        search: SearchArgs,
        /// Print the planning graph of the initial state to stderr.
        #[arg(long)]
        dump_rpg: bool,
    },
    /// Replay a plan file; the metric goes to stdout, the diagnosis to stderr.
    Validate { domain: PathBuf, problem: PathBuf, plan: PathBuf },
    /// Report the normal form, assignment dependencies, relevant variables
    /// and monotonicity flags.
    Analyze {
        domain: PathBuf,
        problem: PathBuf,
        /// Also print the planning graph of the initial state.
        #[arg(long)]
        dump_rpg: bool,
        #[arg(long, default_value_t = lnfplan::rpg::DEFAULT_MAX_LAYERS, value_parser = positive)]
        max_layers: usize,
    },
    /// Decide relaxed solvability from the initial state.
    Decide { domain: PathBuf, problem: PathBuf },
    /// Write a generated instance and its witness plan.
    Gen {
        /// zeno-lite or depot-lite
        family: String,
        #[arg(value_parser = positive)]
        size: usize,
        #[arg(conflicts_with = "seed_flag")]
        seed: Option<u64>,
        #[arg(long = "seed", id = "seed_flag")]
        seed_flag: Option<u64>,
        /// Output directory.
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
}

#[derive(Copy, Clone, ValueEnum)]
enum ModeArg {
    Speed,
    Quality,
}

#[derive(Args)]
struct SearchArgs {
    #[arg(long, value_enum, default_value = "speed")]
    mode: ModeArg,
    /// Weight of the path cost in quality mode.
    #[arg(long, default_value = "1", value_parser = rational)]
    wg: Rational,
    /// Weight of the heuristic in quality mode.
    #[arg(long, default_value = "5", value_parser = rational)]
    wh: Rational,
    /// Expansion limit per search stage.
    #[arg(long, default_value_t = DEFAULT_MAX_EXPANSIONS, value_parser = positive)]
    max_expansions: usize,
    /// Layer limit of the planning graph.
    #[arg(long, default_value_t = lnfplan::rpg::DEFAULT_MAX_LAYERS, value_parser = positive)]
    max_layers: usize,
    /// Disable the helpful-action restriction in the first stage.
    #[arg(long)]
    no_helpful: bool,
    /// Weight of the relaxed plan length added to the cost heuristic.
    #[arg(long, default_value = "0", value_parser = rational)]
    h_mix: Rational,
}

impl SearchArgs {
    fn config(&self) -> Result<SearchConfig, Error> {
        let weights = CostWeights::new(self.wg.clone(), self.wh.clone()).map_err(Error::Usage)?;
        if self.h_mix < int(0) {
            return Err(Error::Usage("--h-mix must be non-negative".into()));
        }
        Ok(SearchConfig {
            mode: match self.mode {
                ModeArg::Speed => Mode::Speed,
                ModeArg::Quality => Mode::Quality,
            },
            weights,
            max_expansions: self.max_expansions,
            max_layers: self.max_layers,
            helpful_pruning: !self.no_helpful,
            h_mix: self.h_mix.clone(),
        })
    }
}

fn rational(text: &str) -> Result<Rational, String> {
    parse_rational(text).ok_or_else(|| format!("not a number: {text}"))
}

fn positive(text: &str) -> Result<usize, String> {
    match text.parse::<usize>() {
        Ok(n) if n > 0 => Ok(n),
        _ => Err(format!("expected a positive integer, got {text}")),
    }
}

enum Error {
    Usage(String),
    Input(String),
}

/// Exit status of a verb that ran to completion.
enum Outcome {
    Success,
    Negative,
}

fn read(path: &Path) -> Result<String, Error> {
    fs::read_to_string(path).map_err(|e| Error::Input(format!("{}: {e}", path.display())))
}

fn load(domain: &Path, problem: &Path) -> Result<(NumericTask, LnfTask), Error> {
    let task = load_task(&read(domain)?, &read(problem)?).map_err(|e| Error::Input(e.to_string()))?;
    let lnf = normalize(&task).map_err(|e| Error::Input(e.to_string()))?;
    Ok((task, lnf))
}

fn dump_graph(lnf: &LnfTask, max_layers: usize) -> String {
    let builder = GraphBuilder::new(lnf).with_max_layers(max_layers);
    builder.build(&lnf.init).dump(lnf)
}

fn run_solve(domain: &Path, problem: &Path, search: &SearchArgs, dump_rpg: bool) -> Result<Outcome, Error> {
    let config = search.config()?;
    let (task, lnf) = load(domain, problem)?;
    if dump_rpg {
        eprint!("{}", dump_graph(&lnf, config.max_layers));
    }
    let out = solve(&lnf, &config);
    if out.guarantees_void {
        eprintln!("warning: cyclic assignments, dead-end detection is not guaranteed");
    }
    if let CostModel::Rejected(r) = &out.cost_model {
        eprintln!("{r}; using speed mode");
    }
    eprintln!("{}", out.stats_line());
    let Some(plan) = &out.plan else {
        if let Some(f) = &out.failure {
            eprintln!("no plan: {f}");
        }
        return Ok(Outcome::Negative);
    };
    let plan = lnf.source_plan(plan);
    let verdict = validate_plan(&task, &plan);
    if !verdict.valid {
        let reason = verdict.failure.map_or_else(String::new, |f| f.to_string());
        eprintln!("internal error: the plan found does not validate: {reason}");
        return Ok(Outcome::Negative);
    }
    let names = plan.steps.iter().map(|a| task.action_name(*a));
    print!("{}", format_plan(names, verdict.metric.as_ref()));
    Ok(Outcome::Success)
}

fn run_validate(domain: &Path, problem: &Path, plan: &Path) -> Result<Outcome, Error> {
    let (task, _) = load(domain, problem)?;
    let names: Vec<&str> = (0..task.num_actions()).map(|a| task.action_name(lnfplan::ActionId(a))).collect();
    let plan = match parse_plan(&read(plan)?, &names) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("invalid: {e}");
            return Ok(Outcome::Negative);
        }
    };
    let verdict = validate_plan(&task, &plan);
    match &verdict.failure {
        None => {
            eprintln!("valid: {} steps", plan.len());
            println!("{}", verdict.metric.map_or("-".to_string(), |m| m.to_string()));
            Ok(Outcome::Success)
        }
        Some(f) => {
            eprintln!("invalid: {f}");
            Ok(Outcome::Negative)
        }
    }
}

fn run_analyze(domain: &Path, problem: &Path, dump_rpg: bool, max_layers: usize) -> Result<Outcome, Error> {
    let (task, lnf) = load(domain, problem)?;
    println!(
        "ground: props={} vars={} actions={} goal_props={} goal_constraints={}",
        task.props.len(),
        task.vars.len(),
        task.actions.len(),
        task.goal.props.len(),
        task.goal.constraints.len()
    );
    println!(
        "normal form: vars={} inverted={} actions={} goal_constraints={}",
        lnf.num_vars(),
        lnf.num_vars() - lnf.original_vars,
        lnf.actions.len(),
        lnf.goal_nums.len()
    );
    let report = verify_lnf(&lnf);
    if report.ok() {
        println!("verified: yes");
    } else {
        for v in &report.violations {
            println!("violation: {v}");
        }
    }
    for v in &lnf.vars[lnf.original_vars..] {
        let of = v.inverse_of.expect("variables past the originals are inverses");
        println!("inverse: {} = -{}", v.name, lnf.vars[of.0].name);
    }
    let deps = check_acyclic(&lnf);
    println!("assignments: {}", if deps.acyclic { "acyclic" } else { "cyclic" });
    for (u, v) in &deps.edges {
        println!("assign-edge: {} -> {}", lnf.vars[u.0].name, lnf.vars[v.0].name);
    }
    let rv = compute_relevance(&lnf);
    let relevant: Vec<&str> = rv.vars.ones().map(|v| lnf.vars[v].name.as_str()).collect();
    println!("relevant: [{}]", relevant.join(" "));
    let mono = check_monotonic_structure(&lnf);
    println!("monotone: {}", if mono.all_monotone() { "yes" } else { "no" });
    for item in mono.flagged() {
        println!("non-monotone: {} {}", item.location, item.reason.as_deref().unwrap_or(""));
    }
    if dump_rpg {
        print!("{}", dump_graph(&lnf, max_layers));
    }
    Ok(if report.ok() { Outcome::Success } else { Outcome::Negative })
}

fn run_decide(domain: &Path, problem: &Path) -> Result<Outcome, Error> {
    let (_, lnf) = load(domain, problem)?;
    let fixpoint = decide_strong(&lnf, &lnf.init).map_err(|e| Error::Input(e.to_string()))?;
    println!("{}", fixpoint.verdict);
    eprintln!("iterations={}", fixpoint.iterations);
    Ok(match fixpoint.verdict {
        Verdict::Solvable => Outcome::Success,
        Verdict::Unsolvable => Outcome::Negative,
    })
}

fn run_gen(family: &str, size: usize, seed: u64, out: &Path) -> Result<Outcome, Error> {
    let names: Vec<&str> = Family::ALL.iter().map(|f| f.name()).collect();
    let family =
        Family::parse(family).ok_or_else(|| Error::Usage(format!("unknown family {family}, expected one of {names:?}")))?;
    let inst = generate(family, size, seed);
    fs::create_dir_all(out).map_err(|e| Error::Input(format!("{}: {e}", out.display())))?;
    let stem = format!("{}-{size}-{seed}", family.name());
    for (suffix, text) in
        [("domain.pddl", inst.domain.clone()), ("problem.pddl", inst.problem.clone()), ("witness.plan", inst.witness_text())]
    {
        let path = out.join(format!("{stem}.{suffix}"));
        fs::write(&path, text).map_err(|e| Error::Input(format!("{}: {e}", path.display())))?;
        println!("{}", path.display());
    }
    Ok(Outcome::Success)
}

fn run(cli: Cli) -> Result<Outcome, Error> {
    match cli.command {
        Command::Solve { domain, problem, search, dump_rpg } => run_solve(&domain, &problem, &search, dump_rpg),
        Command::Validate { domain, problem, plan } => run_validate(&domain, &problem, &plan),
        Command::Analyze { domain, problem, dump_rpg, max_layers } => {
            run_analyze(&domain, &problem, dump_rpg, max_layers)
        }
        Command::Decide { domain, problem } => run_decide(&domain, &problem),
        Command::Gen { family, size, seed, seed_flag, out } => {
            run_gen(&family, size, seed.or(seed_flag).unwrap_or(0), &out)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(Outcome::Success) => ExitCode::SUCCESS,
        Ok(Outcome::Negative) => ExitCode::from(1),
        Err(Error::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            ExitCode::from(2)
        }
        Err(Error::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
