//! The `detpomdp` command line.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cost::{format_rational, format_sig9, rational_to_f64};
use crate::criterion::{Criterion, CriterionKind, MinExp, MinMax};
use crate::domains::{self, DomainError, DomainSpec, FormulaError, GridSpec, RandomSpec};
use crate::model::{load_model, model_hash, save_model, DetPomdp, LoadError, StateId};
use crate::perm::{
    action_as_permutation, build_from_cycles, diameter_conditions_with, measure_diameter, prime_packing, DiameterConfig, LargeOrderError,
    LastStateRule,
};
use crate::policy::{load_policy, save_policy, PolicyFile, PolicyFileError};
use crate::solvers::{
    evaluate_policy, monte_carlo, simulate, solve_explicit, solve_explicit_symmetric, solve_heuristic, solve_unobservable, Heuristic,
    SimulateError, SolveResult, SolveStatus, Symmetry, SymmetryError, DEFAULT_BUDGET,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NO_POLICY: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Algorithm {
    Explicit,
    Aostar,
    Unobservable,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Rule {
    Precondition,
    Trap,
    FixOthers,
}

impl From<Rule> for LastStateRule {
    fn from(r: Rule) -> Self {
        match r {
            Rule::Precondition => LastStateRule::Precondition,
            Rule::Trap => LastStateRule::Trap,
            Rule::FixOthers => LastStateRule::FixOthers,
        }
    }
}

/// Solve, analyze and generate deterministic POMDPs.
#[derive(Debug, Parser)]
#[command(name = "detpomdp", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// minmax or minexp. Defaults to minmax, or to the policy's criterion.
    #[arg(long, global = true)]
    pub criterion: Option<CriterionKind>,
    #[arg(long, global = true, value_enum, default_value = "explicit")]
    pub algorithm: Algorithm,
    /// zero or fullobs.
    #[arg(long, global = true, default_value = "fullobs")]
    pub heuristic: Heuristic,
    /// Node budget for solvers and enumeration.
    #[arg(long, global = true, default_value_t = DEFAULT_BUDGET)]
    pub budget: usize,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Output file for generated models and policies.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a model file.
    Validate { model: PathBuf },
    /// Generate a model.
    Gen {
        #[command(subcommand)]
        domain: GenCommand,
    },
    /// Compute an optimal policy.
    Solve {
        model: PathBuf,
        /// Interchangeable state blocks, as {"blocks": [[..], ..]}.
        #[arg(long)]
        symmetry: Option<PathBuf>,
    },
    /// Value of a policy file.
    Evaluate { model: PathBuf, policy: PathBuf },
    /// Diameter conditions, permutation actions, measured diameter.
    Analyze {
        model: PathBuf,
        #[arg(long, default_value_t = 3)]
        support_bound: usize,
        #[arg(long, default_value_t = 3)]
        cycle_bound: usize,
        #[arg(long, default_value_t = 3)]
        moved_bound: usize,
    },
    /// Execute a policy from a hidden start state.
    Simulate {
        model: PathBuf,
        policy: PathBuf,
        #[arg(required_unless_present = "all")]
        state: Option<StateId>,
        /// Run every state of the initial support.
        #[arg(long, conflicts_with = "state")]
        all: bool,
        #[arg(long, default_value_t = 10_000)]
        max_steps: usize,
        /// Monte Carlo runs with start states drawn from b0, seeded by --seed.
        #[arg(long)]
        runs: Option<usize>,
    },
}

#[derive(Debug, Subcommand)]
pub enum GenCommand {
    Coins {
        n: usize,
        /// Also write the coin-swap symmetry for `solve --symmetry`.
        #[arg(long)]
        symmetry_out: Option<PathBuf>,
    },
    Mastermind { m: usize, n: usize },
    /// Test matrix file: one row of 0/1 per system state.
    Diagnosis { matrix: PathBuf },
    /// Grid description in JSON.
    Gridnav { spec: PathBuf },
    /// DIMACS CNF with at most three literals per clause.
    Sat { formula: PathBuf },
    /// The permutation instance whose plans are as long as its order.
    LargeOrder {
        /// Pack primes into this many states.
        #[arg(required_unless_present = "cycles")]
        n: Option<usize>,
        /// Explicit cycle lengths instead of a packing.
        #[arg(long, value_delimiter = ',', conflicts_with = "n")]
        cycles: Vec<usize>,
        #[arg(long, value_enum, default_value = "precondition")]
        rule: Rule,
    },
    /// A random model drawn with --seed.
    Random {
        #[arg(long, default_value_t = 5)]
        states: usize,
        #[arg(long, default_value_t = 3)]
        actions: usize,
        #[arg(long, default_value_t = 2)]
        observations: usize,
        #[arg(long, default_value_t = 1)]
        goals: usize,
        #[arg(long, default_value_t = 3)]
        initial: usize,
        #[arg(long, default_value_t = 0.8)]
        applicability: f64,
        #[arg(long, default_value_t = 3)]
        max_cost: i64,
        #[arg(long)]
        dist: bool,
    },
    /// Any generator, from a JSON spec with a "domain" tag.
    Spec { file: PathBuf },
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}: {source}")]
    Model { path: PathBuf, source: LoadError },
    #[error("{path}: {source}")]
    Policy { path: PathBuf, source: PolicyFileError },
    #[error("{path}: {source}")]
    Json { path: PathBuf, source: serde_json::Error },
    #[error("{path}: {source}")]
    Formula { path: PathBuf, source: FormulaError },
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error(transparent)]
    LargeOrder(#[from] LargeOrderError),
    #[error(transparent)]
    Symmetry(#[from] SymmetryError),
    #[error(transparent)]
    Simulate(#[from] SimulateError),
    #[error("{0}")]
    Usage(String),
}

#[derive(Serialize, Deserialize)]
struct SymmetryDoc {
    blocks: Vec<Vec<StateId>>,
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io { path: path.into(), source })
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|source| CliError::Io { path: path.into(), source })
}

fn read_model(path: &Path) -> Result<DetPomdp, CliError> {
    load_model(&read(path)?).map_err(|source| CliError::Model { path: path.into(), source })
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CliError> {
    serde_json::from_str(&read(path)?).map_err(|source| CliError::Json { path: path.into(), source })
}

fn read_policy(model: &DetPomdp, path: &Path) -> Result<PolicyFile, CliError> {
    let file = load_policy(model, &read(path)?).map_err(|source| CliError::Policy { path: path.into(), source })?;
    if file.model_hash != model_hash(model) {
        return Err(CliError::Usage(format!("{}: policy was computed for a different model", path.display())));
    }
    Ok(file)
}

fn io_err(e: io::Error) -> CliError {
    CliError::Io { path: PathBuf::from("<stdout>"), source: e }
}

/// Runs one command. Reports go to `out`; timings and errors go to `err`.
/// Returns the process exit status.
pub fn run(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    match dispatch(cli, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_USAGE
        }
    }
}

fn dispatch(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, CliError> {
    let criterion = cli.criterion.unwrap_or(CriterionKind::MinMax);
    match &cli.command {
        Command::Validate { model } => validate(model, out),
        Command::Gen { domain } => generate(cli, domain, out),
        Command::Solve { model, symmetry } => {
            let m = read_model(model)?;
            let sym = symmetry.as_deref().map(read_json::<SymmetryDoc>).transpose()?;
            match criterion {
                CriterionKind::MinMax => solve::<MinMax>(cli, &m, sym, out, err),
                CriterionKind::MinExp => solve::<MinExp>(cli, &m, sym, out, err),
            }
        }
        Command::Evaluate { model, policy } => {
            let m = read_model(model)?;
            let p = read_policy(&m, policy)?;
            check_criterion(cli, &p)?;
            match p.criterion {
                CriterionKind::MinMax => evaluate::<MinMax>(&m, &p, out),
                CriterionKind::MinExp => evaluate::<MinExp>(&m, &p, out),
            }
        }
        Command::Analyze { model, support_bound, cycle_bound, moved_bound } => {
            let m = read_model(model)?;
            let config = DiameterConfig { support_bound: *support_bound, cycle_bound: *cycle_bound, moved_bound: *moved_bound };
            analyze(cli, &m, config, criterion, out)
        }
        Command::Simulate { model, policy, state, all, max_steps, runs } => {
            let m = read_model(model)?;
            let p = read_policy(&m, policy)?;
            check_criterion(cli, &p)?;
            let args = SimArgs { state: *state, all: *all, max_steps: *max_steps, runs: *runs, seed: cli.seed };
            match p.criterion {
                CriterionKind::MinMax => simulate_cmd::<MinMax>(&m, &p, args, out),
                CriterionKind::MinExp => simulate_cmd::<MinExp>(&m, &p, args, out),
            }
        }
    }
}

fn check_criterion(cli: &Cli, p: &PolicyFile) -> Result<(), CliError> {
    match cli.criterion {
        Some(c) if c != p.criterion => Err(CliError::Usage(format!("--criterion {c} does not match the {} policy", p.criterion))),
        _ => Ok(()),
    }
}

fn validate(path: &Path, out: &mut dyn Write) -> Result<i32, CliError> {
    match load_model(&read(path)?) {
        Ok(m) => {
            writeln!(out, "valid").map_err(io_err)?;
            writeln!(out, "states {}", m.num_states).map_err(io_err)?;
            writeln!(out, "observations {}", m.num_observations).map_err(io_err)?;
            writeln!(out, "actions {}", m.num_actions()).map_err(io_err)?;
            writeln!(out, "hash {}", model_hash(&m)).map_err(io_err)?;
            Ok(EXIT_OK)
        }
        Err(LoadError::Schema(vs)) => {
            writeln!(out, "invalid").map_err(io_err)?;
            for v in vs {
                writeln!(out, "violation {v}").map_err(io_err)?;
            }
            Ok(EXIT_USAGE)
        }
        Err(source) => Err(CliError::Model { path: path.into(), source }),
    }
}

fn emit(cli: &Cli, text: &str, out: &mut dyn Write) -> Result<(), CliError> {
    match &cli.out {
        Some(p) => write_file(p, text),
        None => out.write_all(text.as_bytes()).map_err(io_err),
    }
}

fn read_matrix(path: &Path) -> Result<Vec<Vec<bool>>, CliError> {
    let text = read(path)?;
    let mut rows = Vec::new();
    for (k, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let row: Option<Vec<bool>> = line
            .chars()
            .filter(|c| !c.is_whitespace())
            .map(|c| match c {
                '0' => Some(false),
                '1' => Some(true),
                _ => None,
            })
            .collect();
        rows.push(row.ok_or_else(|| CliError::Usage(format!("{}:{}: rows must contain only 0 and 1", path.display(), k + 1)))?);
    }
    Ok(rows)
}

fn generate(cli: &Cli, domain: &GenCommand, out: &mut dyn Write) -> Result<i32, CliError> {
    let model = match domain {
        GenCommand::Coins { n, symmetry_out } => {
            let m = domains::gen_coins(*n)?;
            if let Some(p) = symmetry_out {
                let doc = SymmetryDoc { blocks: domains::coins_symmetry(*n).blocks };
                write_file(p, &(serde_json::to_string(&doc).expect("symmetry serializes") + "\n"))?;
            }
            m
        }
        GenCommand::Mastermind { m, n } => domains::gen_mastermind(*m, *n)?,
        GenCommand::Diagnosis { matrix } => domains::gen_diagnosis(&read_matrix(matrix)?)?,
        GenCommand::Gridnav { spec } => domains::gen_gridnav(&read_json::<GridSpec>(spec)?)?,
        GenCommand::Sat { formula } => {
            let f = domains::parse_formula(&read(formula)?).map_err(|source| CliError::Formula { path: formula.clone(), source })?;
            domains::gen_sat(&f)?
        }
        GenCommand::LargeOrder { n, cycles, rule } => {
            let (cycles, pad) = match n {
                Some(n) => (packing(*n)?, *n),
                None => (cycles.clone(), 0),
            };
            build_from_cycles(&cycles, pad, (*rule).into())?.model
        }
        GenCommand::Random { states, actions, observations, goals, initial, applicability, max_cost, dist } => {
            let spec = RandomSpec {
                states: *states,
                actions: *actions,
                observations: *observations,
                goals: *goals,
                initial: *initial,
                applicability: *applicability,
                max_cost: *max_cost,
                dist: *dist,
            };
            let ok = spec.states >= 1
                && spec.observations >= 1
                && spec.max_cost >= 1
                && spec.goals <= spec.states
                && (1..=spec.states).contains(&spec.initial)
                && (0.0..=1.0).contains(&spec.applicability);
            if !ok {
                return Err(CliError::Usage("random model parameters out of range".into()));
            }
            domains::random_model(&spec, &mut ChaCha8Rng::seed_from_u64(cli.seed))
        }
        GenCommand::Spec { file } => read_json::<DomainSpec>(file)?.build()?,
    };
    emit(cli, &save_model(&model), out)?;
    Ok(EXIT_OK)
}

fn packing(n: usize) -> Result<Vec<usize>, CliError> {
    let p = prime_packing(n);
    if p.is_empty() {
        return Err(LargeOrderError::TooSmall(n).into());
    }
    Ok(p)
}

fn solve<C: Criterion>(cli: &Cli, model: &DetPomdp, sym: Option<SymmetryDoc>, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, CliError> {
    let result: SolveResult<C::Value> = match (cli.algorithm, sym) {
        (Algorithm::Explicit, Some(doc)) => {
            let verified = Symmetry { blocks: doc.blocks }.verify(model)?;
            solve_explicit_symmetric::<C>(model, &verified, cli.budget)
        }
        (_, Some(_)) => return Err(CliError::Usage("--symmetry needs --algorithm explicit".into())),
        (Algorithm::Explicit, None) => solve_explicit::<C>(model, cli.budget),
        (Algorithm::Aostar, None) => solve_heuristic::<C>(model, cli.heuristic, cli.budget),
        (Algorithm::Unobservable, None) => solve_unobservable::<C>(model, cli.budget).map_err(|e| CliError::Usage(e.to_string()))?,
    };
    let value = match result.status {
        SolveStatus::BudgetExceeded => "unknown".to_string(),
        _ => C::format(&result.value),
    };
    let w = |out: &mut dyn Write, s: String| writeln!(out, "{s}").map_err(io_err);
    w(out, format!("status {}", result.status))?;
    w(out, format!("criterion {}", C::KIND))?;
    w(out, format!("value {value}"))?;
    w(out, format!("expanded {}", result.stats.expanded))?;
    w(out, format!("beliefs {}", result.stats.beliefs))?;
    if let Some(policy) = &result.policy {
        w(out, format!("policy_entries {}", policy.len()))?;
        if let Some(plan) = &result.plan {
            let names: Vec<&str> = plan.actions.iter().map(|&a| model.actions[a].name.as_str()).collect();
            w(out, format!("plan_length {}", names.len()))?;
            w(out, format!("plan {}", names.join(" ")))?;
        }
        if let Some(path) = &cli.out {
            write_file(path, &save_policy(model, &PolicyFile::new(model, C::KIND, value, policy.clone())))?;
        }
    }
    let _ = writeln!(err, "wall {:.6}s", result.stats.wall.as_secs_f64());
    Ok(match result.status {
        SolveStatus::Solved => EXIT_OK,
        SolveStatus::NoFinitePolicy => EXIT_NO_POLICY,
        SolveStatus::BudgetExceeded => EXIT_BUDGET,
    })
}

fn evaluate<C: Criterion>(model: &DetPomdp, p: &PolicyFile, out: &mut dyn Write) -> Result<i32, CliError> {
    let v = evaluate_policy::<C>(model, &p.policy).map_err(|e| CliError::Usage(format!("policy is not closed: {e}")))?;
    writeln!(out, "criterion {}", C::KIND).map_err(io_err)?;
    writeln!(out, "value {}", C::format(&v)).map_err(io_err)?;
    Ok(EXIT_OK)
}

fn analyze(cli: &Cli, m: &DetPomdp, config: DiameterConfig, criterion: CriterionKind, out: &mut dyn Write) -> Result<i32, CliError> {
    let report = diameter_conditions_with(m, config);
    write!(out, "{report}").map_err(io_err)?;
    for (a, act) in m.actions.iter().enumerate() {
        let line = match action_as_permutation(m, a) {
            Ok(p) => format!("action {:?} permutation {p} order {} moved {}", act.name, p.order(), p.moved()),
            Err(e) => format!("action {:?} not_permutation {e}", act.name),
        };
        writeln!(out, "{line}").map_err(io_err)?;
    }
    let d = match criterion {
        CriterionKind::MinMax => measure_diameter::<MinMax>(m, cli.budget),
        CriterionKind::MinExp => measure_diameter::<MinExp>(m, cli.budget),
    };
    match d {
        Ok(d) => writeln!(out, "diameter {d}"),
        Err(e) => writeln!(out, "diameter unknown ({e})"),
    }
    .map_err(io_err)?;
    Ok(EXIT_OK)
}

#[derive(Clone, Copy)]
struct SimArgs {
    state: Option<StateId>,
    all: bool,
    max_steps: usize,
    runs: Option<usize>,
    seed: u64,
}

fn simulate_cmd<C: Criterion>(model: &DetPomdp, p: &PolicyFile, args: SimArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let w = |out: &mut dyn Write, s: String| writeln!(out, "{s}").map_err(io_err);
    if args.all {
        let dist = model.initial_distribution();
        let (mut worst, mut mean) = (None, 0.0);
        for &(s, prob) in &dist {
            let t = simulate::<C>(model, &p.policy, s, args.max_steps)?;
            let yes = if t.reached_target { "yes" } else { "no" };
            w(out, format!("start {s} cost {} steps {} final {} target {yes}", format_rational(&t.total), t.steps.len(), t.final_state))?;
            worst = worst.max(Some(t.total));
            mean += prob * rational_to_f64(&t.total);
        }
        if let Some(x) = worst {
            w(out, format!("simulated_max {}", format_rational(&x)))?;
        }
        w(out, format!("simulated_mean {}", format_sig9(mean)))?;
        let v = evaluate_policy::<C>(model, &p.policy).map_err(|e| CliError::Usage(format!("policy is not closed: {e}")))?;
        w(out, format!("value_{} {}", C::KIND, C::format(&v)))?;
    } else if let Some(s) = args.state {
        let t = simulate::<C>(model, &p.policy, s, args.max_steps)?;
        w(out, format!("start {s}"))?;
        for (k, st) in t.steps.iter().enumerate() {
            w(
                out,
                format!(
                    "step {k} belief {} action {:?} cost {} obs {} next {}",
                    st.belief,
                    model.actions[st.action].name,
                    format_rational(&st.cost),
                    st.obs,
                    st.next
                ),
            )?;
        }
        w(out, format!("total {}", format_rational(&t.total)))?;
        w(out, format!("final {}", t.final_state))?;
        w(out, format!("target {}", if t.reached_target { "yes" } else { "no" }))?;
    }
    if let Some(runs) = args.runs {
        if runs == 0 {
            return Err(CliError::Usage("--runs must be positive".into()));
        }
        let mc = monte_carlo::<C>(model, &p.policy, runs, args.seed, args.max_steps)?;
        w(out, format!("mc_runs {} mean {} std_err {}", mc.runs, format_sig9(mc.mean), format_sig9(mc.std_err)))?;
    }
    Ok(EXIT_OK)
}
