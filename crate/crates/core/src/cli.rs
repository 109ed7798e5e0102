//! The `quasistable` command line.
//!
//! Exit codes: 0 on success, 1 when a checked property fails, 2 on bad input.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::choice::{verify_all, DEFAULT_VERIFY_CAP};
use crate::da::{da_run, format_trace, verify_trace, ProposalStrategy};
use crate::error::{Error, Result};
use crate::format::{load_market, market_to_string, save_market};
use crate::gen::{gen_market, Family, GenParams};
use crate::lattice::{blair_dominates, join_w, meet_w, tarski_iterate};
use crate::model::{split_list, Agent, Market, Side, View};
use crate::oracle::{certify, enumerate};
use crate::scenario::{load_scenario, EventKind};
use crate::set::ContractSet;
use crate::stability::block_report;

#[derive(Debug, Parser)]
#[command(
    name = "quasistable",
    version,
    about = "Stability, quasi-stability and deferred acceptance for matching markets with contracts"
)]
struct Cli {
    /// Also write a JSON dump of the result to this path.
    #[arg(long, global = true, value_name = "PATH")]
    dump: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct MarketArgs {
    /// Market file.
    #[arg(short, long, value_name = "FILE")]
    market: PathBuf,
    /// Comma-separated worker ids of the view (default: all).
    #[arg(long, value_name = "LIST")]
    workers: Option<String>,
    /// Comma-separated firm ids of the view (default: all).
    #[arg(long, value_name = "LIST")]
    firms: Option<String>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SideArg {
    #[value(name = "w", alias = "workers")]
    Workers,
    #[value(name = "f", alias = "firms")]
    Firms,
}

impl From<SideArg> for Side {
    fn from(s: SideArg) -> Side {
        match s {
            SideArg::Workers => Side::Workers,
            SideArg::Firms => Side::Firms,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum StrategyArg {
    Full,
    Single,
    Random,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FamilyArg {
    GreedyOnly,
    Mixed,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the four preference verifiers on every agent.
    VerifyPrefs {
        #[arg(short, long, value_name = "FILE")]
        market: PathBuf,
        /// Largest number of incident contracts to verify.
        #[arg(long, default_value_t = DEFAULT_VERIFY_CAP)]
        cap: usize,
    },
    /// Individual rationality, quasi-stability and stability of an allocation.
    Check {
        #[command(flatten)]
        market: MarketArgs,
        /// Comma-separated contract ids.
        #[arg(short, long, value_name = "IDS", allow_hyphen_values = true)]
        allocation: String,
    },
    /// List every allocation of a view by class.
    Enumerate {
        #[command(flatten)]
        market: MarketArgs,
    },
    /// Cross-check the stability predicates and lattice operations against enumeration.
    Certify {
        #[command(flatten)]
        market: MarketArgs,
    },
    /// Join, meet or Blair comparison of two allocations.
    #[command(group(ArgGroup::new("op").required(true).args(["join", "meet", "compare"])))]
    Lattice {
        #[command(flatten)]
        market: MarketArgs,
        #[arg(long, num_args = 2, value_names = ["A", "B"])]
        join: Option<Vec<String>>,
        #[arg(long, num_args = 2, value_names = ["A", "B"])]
        meet: Option<Vec<String>>,
        #[arg(long, num_args = 2, value_names = ["A", "B"])]
        compare: Option<Vec<String>>,
        #[arg(long, value_enum, default_value = "w")]
        side: SideArg,
    },
    /// Iterate the Tarski operator from a quasi-stable allocation.
    Tarski {
        #[command(flatten)]
        market: MarketArgs,
        #[arg(short, long, value_name = "IDS", default_value = "")]
        allocation: String,
    },
    /// Run deferred acceptance and print its trace.
    Da {
        #[command(flatten)]
        market: MarketArgs,
        /// Starting allocation (default: empty).
        #[arg(short, long, value_name = "IDS", default_value = "")]
        allocation: String,
        #[arg(long, value_enum, default_value = "full")]
        strategy: StrategyArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run a disruption scenario file.
    Scenario {
        #[arg(short, long, value_name = "FILE")]
        scenario: PathBuf,
    },
    /// Generate a random market.
    Gen {
        #[arg(long, default_value_t = 2)]
        workers: usize,
        #[arg(long, default_value_t = 2)]
        firms: usize,
        #[arg(long, default_value_t = 1)]
        max_contracts_per_pair: usize,
        #[arg(long, default_value_t = 1.0)]
        density: f64,
        #[arg(long, default_value_t = 1)]
        quota_min: usize,
        #[arg(long, default_value_t = 1)]
        quota_max: usize,
        #[arg(long, default_value_t = 1.0)]
        acceptability: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value = "greedy-only")]
        family: FamilyArg,
        /// Output file (default: standard output).
        #[arg(short, long, value_name = "FILE")]
        output: Option<PathBuf>,
    },
    /// Swap the roles of workers and firms.
    Dual {
        #[arg(short, long, value_name = "FILE")]
        market: PathBuf,
        #[arg(short, long, value_name = "FILE")]
        output: PathBuf,
    },
}

/// Text for standard output, the JSON dump, and whether a property failed.
struct Outcome {
    text: String,
    dump: Value,
    violated: bool,
}

impl Outcome {
    fn ok(text: String, dump: Value) -> Self {
        Self {
            text,
            dump,
            violated: false,
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{text}");
                    0
                }
                _ => {
                    let _ = write!(err, "{text}");
                    2
                }
            };
        }
    };
    let result = execute(cli.command).and_then(|o| {
        if let Some(path) = &cli.dump {
            write_dump(path, &o.dump)?;
        }
        Ok(o)
    });
    match result {
        Ok(o) => {
            let _ = out.write_all(o.text.as_bytes());
            if o.violated {
                1
            } else {
                0
            }
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn write_dump(path: &Path, value: &Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::Internal(e.to_string()))?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

fn ids(m: &Market, y: &ContractSet) -> Value {
    json!(m.ids(y))
}

fn id_lists(m: &Market, ys: &[ContractSet]) -> Value {
    Value::Array(ys.iter().map(|y| ids(m, y)).collect())
}

fn view_json(v: &View<'_>) -> Value {
    json!({"workers": v.worker_names(), "firms": v.firm_names()})
}

fn open_view<'m>(market: &'m Market, args: &MarketArgs) -> Result<View<'m>> {
    let workers = args.workers.as_deref().map(split_list);
    let firms = args.firms.as_deref().map(split_list);
    market.view_from_ids(workers.as_deref(), firms.as_deref())
}

fn execute(command: Command) -> Result<Outcome> {
    match command {
        Command::VerifyPrefs { market, cap } => verify_prefs(&load_market(market)?, cap),
        Command::Check { market, allocation } => {
            let m = load_market(&market.market)?;
            check(&open_view(&m, &market)?, &allocation)
        }
        Command::Enumerate { market } => {
            let m = load_market(&market.market)?;
            enumerate_cmd(&open_view(&m, &market)?)
        }
        Command::Certify { market } => {
            let m = load_market(&market.market)?;
            certify_cmd(&open_view(&m, &market)?)
        }
        Command::Lattice {
            market,
            join,
            meet,
            compare,
            side,
        } => {
            let m = load_market(&market.market)?;
            let view = open_view(&m, &market)?;
            lattice_cmd(&view, join, meet, compare, side.into())
        }
        Command::Tarski { market, allocation } => {
            let m = load_market(&market.market)?;
            tarski_cmd(&open_view(&m, &market)?, &allocation)
        }
        Command::Da {
            market,
            allocation,
            strategy,
            seed,
        } => {
            let m = load_market(&market.market)?;
            let strategy = match strategy {
                StrategyArg::Full => ProposalStrategy::Full,
                StrategyArg::Single => ProposalStrategy::SingleLex,
                StrategyArg::Random => ProposalStrategy::RandomSubset { seed },
            };
            da_cmd(&open_view(&m, &market)?, &allocation, strategy)
        }
        Command::Scenario { scenario } => scenario_cmd(&scenario),
        Command::Gen {
            workers,
            firms,
            max_contracts_per_pair,
            density,
            quota_min,
            quota_max,
            acceptability,
            seed,
            family,
            output,
        } => {
            let params = GenParams {
                n_workers: workers,
                n_firms: firms,
                max_contracts_per_pair,
                density,
                quota_range: (quota_min, quota_max),
                acceptability_rate: acceptability,
                seed,
                family: match family {
                    FamilyArg::GreedyOnly => Family::GreedyOnly,
                    FamilyArg::Mixed => Family::Mixed,
                },
            };
            gen_cmd(&params, output.as_deref())
        }
        Command::Dual { market, output } => {
            let dual = load_market(&market)?.dualize();
            save_market(&dual, &output)?;
            Ok(Outcome::ok(
                format!("wrote {}\n", output.display()),
                json!({"output": output.display().to_string()}),
            ))
        }
    }
}

fn verify_prefs(m: &Market, cap: usize) -> Result<Outcome> {
    let reports = verify_all(m, cap)?;
    let mut text = String::new();
    for r in &reports {
        text.push_str(&format!(
            "{} {} {}",
            r.agent,
            r.property,
            if r.passed { "pass" } else { "FAIL" }
        ));
        if let Some(w) = &r.witness {
            text.push_str(&format!(" Y={{{}}} Z={{{}}}", w.y.join(","), w.z.join(",")));
        }
        text.push('\n');
    }
    let failed = reports.iter().filter(|r| !r.passed).count();
    text.push_str(&format!("{} checks, {failed} failed\n", reports.len()));
    Ok(Outcome {
        text,
        dump: json!({"reports": reports}),
        violated: failed > 0,
    })
}

fn check(view: &View<'_>, allocation: &str) -> Result<Outcome> {
    let m = view.market();
    let y = m.parse_list(allocation)?;
    let r = block_report(view, &y)?;
    let is_allocation = m.is_allocation(&y);
    let text = format!(
        "view: {view}\nallocation: {}\nis-allocation: {is_allocation}\nindividually-rational: {}\nquasi-stable: {}\nstable: {}\nblocking-contracts: {}\n",
        m.format_set(&y),
        r.is_ir,
        r.is_quasi_stable,
        r.is_stable,
        m.format_set(&r.blocking_contracts)
    );
    let dump = json!({
        "view": view_json(view),
        "allocation": ids(m, &y),
        "is_allocation": is_allocation,
        "individually_rational": r.is_ir,
        "quasi_stable": r.is_quasi_stable,
        "stable": r.is_stable,
        "blocking_contracts": ids(m, &r.blocking_contracts),
    });
    Ok(Outcome::ok(text, dump))
}

fn enumerate_cmd(view: &View<'_>) -> Result<Outcome> {
    let m = view.market();
    let e = enumerate(view)?;
    let line = |ys: &[ContractSet]| ys.iter().map(|y| m.format_set(y)).collect::<Vec<_>>().join(" ");
    let text = format!(
        "view: {view}\nallocations: {}\nindividually-rational: {}\nquasi-stable: {}\nstable: {}\nquasi-stable-allocations: {}\nstable-allocations: {}\n",
        e.all_allocations.len(),
        e.ir.len(),
        e.quasi_stable.len(),
        e.stable.len(),
        line(&e.quasi_stable),
        line(&e.stable)
    );
    let dump = json!({
        "view": view_json(view),
        "counts": {
            "allocations": e.all_allocations.len(),
            "individually_rational": e.ir.len(),
            "quasi_stable": e.quasi_stable.len(),
            "stable": e.stable.len(),
        },
        "allocations": id_lists(m, &e.all_allocations),
        "individually_rational": id_lists(m, &e.ir),
        "quasi_stable": id_lists(m, &e.quasi_stable),
        "stable": id_lists(m, &e.stable),
    });
    Ok(Outcome::ok(text, dump))
}

fn certify_cmd(view: &View<'_>) -> Result<Outcome> {
    let c = certify(view)?;
    let mut text = format!(
        "view: {}\nallocations: {}, individually-rational: {}, quasi-stable: {}, stable: {}\n",
        c.view, c.allocations, c.individually_rational, c.quasi_stable, c.stable
    );
    for check in &c.checks {
        text.push_str(&format!(
            "{} {}\n",
            check.name,
            if check.passed { "pass" } else { "FAIL" }
        ));
        for w in &check.witnesses {
            text.push_str(&format!("  {w}\n"));
        }
    }
    if !c.non_substitutable_agents.is_empty() {
        text.push_str(&format!(
            "non-substitutable: {}\n",
            c.non_substitutable_agents.join(" ")
        ));
    }
    let passed = c.passed();
    let mut dump = serde_json::to_value(&c).map_err(|e| Error::Internal(e.to_string()))?;
    dump["passed"] = json!(passed);
    Ok(Outcome {
        text,
        dump,
        violated: !passed,
    })
}

fn pair(m: &Market, ab: &[String]) -> Result<(ContractSet, ContractSet)> {
    Ok((m.parse_list(&ab[0])?, m.parse_list(&ab[1])?))
}

fn lattice_cmd(
    view: &View<'_>,
    join: Option<Vec<String>>,
    meet: Option<Vec<String>>,
    compare: Option<Vec<String>>,
    side: Side,
) -> Result<Outcome> {
    let m = view.market();
    if let Some(ab) = compare {
        let (a, b) = pair(m, &ab)?;
        let ab_dom = blair_dominates(view, &a, &b, side)?;
        let ba_dom = blair_dominates(view, &b, &a, side)?;
        let text = format!(
            "side: {side}\n{} dominates {}: {ab_dom}\n{} dominates {}: {ba_dom}\n",
            m.format_set(&a),
            m.format_set(&b),
            m.format_set(&b),
            m.format_set(&a)
        );
        let dump = json!({
            "operation": "compare",
            "side": side.to_string(),
            "a": ids(m, &a),
            "b": ids(m, &b),
            "a_dominates_b": ab_dom,
            "b_dominates_a": ba_dom,
        });
        return Ok(Outcome::ok(text, dump));
    }
    let (op, ab) = match (join, meet) {
        (Some(ab), _) => ("join", ab),
        (_, Some(ab)) => ("meet", ab),
        _ => unreachable!("clap enforces one operation"),
    };
    let (a, b) = pair(m, &ab)?;
    let result = if op == "join" {
        join_w(view, &a, &b)?
    } else {
        meet_w(view, &a, &b, &enumerate(view)?)?
    };
    let symbol = if op == "join" { "∨" } else { "∧" };
    let text = format!(
        "{} {symbol} {} = {}\n",
        m.format_set(&a),
        m.format_set(&b),
        m.format_set(&result)
    );
    let dump = json!({"operation": op, "a": ids(m, &a), "b": ids(m, &b), "result": ids(m, &result)});
    Ok(Outcome::ok(text, dump))
}

fn tarski_cmd(view: &View<'_>, allocation: &str) -> Result<Outcome> {
    let m = view.market();
    let y = m.parse_list(allocation)?;
    let t = tarski_iterate(view, &y)?;
    let mut text = String::new();
    for (i, it) in t.iterates.iter().enumerate() {
        text.push_str(&format!("t={i} {}\n", m.format_set(it)));
    }
    text.push_str(&format!("fixed-point: {}\n", m.format_set(&t.fixed_point)));
    let dump = json!({
        "iterates": id_lists(m, &t.iterates),
        "fixed_point": ids(m, &t.fixed_point),
        "steps": t.steps(),
    });
    Ok(Outcome::ok(text, dump))
}

fn da_cmd(view: &View<'_>, allocation: &str, strategy: ProposalStrategy) -> Result<Outcome> {
    let m = view.market();
    let y = m.parse_list(allocation)?;
    let trace = da_run(view, &y, strategy)?;
    verify_trace(view, &trace)?;
    let steps: Vec<Value> = trace
        .steps
        .iter()
        .enumerate()
        .map(|(i, s)| {
            json!({
                "t": i + 1,
                "proposals": ids(m, &s.proposals),
                "added": ids(m, &s.added),
                "allocation": ids(m, &s.allocation),
            })
        })
        .collect();
    let dump = json!({
        "view": view_json(view),
        "strategy": trace.strategy,
        "start": ids(m, &trace.start),
        "steps": steps,
        "outcome": ids(m, &trace.outcome),
    });
    Ok(Outcome::ok(format_trace(m, &trace), dump))
}

fn scenario_cmd(path: &Path) -> Result<Outcome> {
    let s = load_scenario(path)?;
    let event = s.event()?;
    let o = s.run()?;
    let m = &s.market;
    let r = &o.report;
    let kind = match r.kind {
        EventKind::AddFirms => "add-firms",
        EventKind::RemoveWorkers => "remove-workers",
        EventKind::Combined => "combined",
    };
    let mut text = format!(
        "event: {kind}\nbefore: {}\nafter: {}\nstart: {}\nrestart: {}\nstrategy: {}\nsteps: {}\noutcome: {}\nworker-pessimal: {}\nremaining-workers-gain: {}\nincumbent-firms-lose: {}\n",
        event.before,
        event.after,
        m.format_set(&r.start),
        m.format_set(&r.restart),
        r.strategy,
        r.steps,
        m.format_set(&r.outcome),
        m.format_set(&r.worker_pessimal),
        r.remaining_workers_gain,
        r.incumbent_firms_lose
    );
    for e in &r.new_entrant_slices {
        text.push_str(&format!(
            "entrant {}: outcome {} worker-pessimal {}\n",
            m.agent_name(Agent::Firm(e.firm)),
            m.format_set(&e.outcome),
            m.format_set(&e.worker_pessimal)
        ));
    }
    text.push_str(&format!(
        "transferred-worker-pessimal: {}\n",
        m.format_set(&o.transferred_worker_pessimal)
    ));
    if let Some((a, b)) = &o.interrupted {
        text.push_str(&format!(
            "interrupted: {} immediate: {}\n",
            m.format_set(a),
            m.format_set(b)
        ));
    }
    text.push_str(&format!(
        "polarity: workers-prefer-after={} firms-prefer-before={}\n",
        o.polarity.workers_prefer_after, o.polarity.firms_prefer_before
    ));
    let entrants: Vec<Value> = r
        .new_entrant_slices
        .iter()
        .map(|e| {
            json!({
                "firm": m.agent_name(Agent::Firm(e.firm)),
                "outcome": ids(m, &e.outcome),
                "worker_pessimal": ids(m, &e.worker_pessimal),
            })
        })
        .collect();
    let dump = json!({
        "event": kind,
        "before": view_json(&event.before),
        "after": view_json(&event.after),
        "start": ids(m, &r.start),
        "restart": ids(m, &r.restart),
        "strategy": r.strategy,
        "steps": r.steps,
        "outcome": ids(m, &r.outcome),
        "worker_pessimal": ids(m, &r.worker_pessimal),
        "remaining_workers_gain": r.remaining_workers_gain,
        "incumbent_firms_lose": r.incumbent_firms_lose,
        "new_entrants": entrants,
        "transferred_worker_pessimal": ids(m, &o.transferred_worker_pessimal),
        "interrupted": o.interrupted.as_ref().map(|(a, b)| json!({"interrupted": ids(m, a), "immediate": ids(m, b)})),
        "polarity": o.polarity,
    });
    Ok(Outcome::ok(text, dump))
}

fn gen_cmd(params: &GenParams, output: Option<&Path>) -> Result<Outcome> {
    let g = gen_market(params)?;
    let text = match output {
        Some(path) => {
            save_market(&g.market, path)?;
            format!("wrote {}\n", path.display())
        }
        None => market_to_string(&g.market),
    };
    let failed = g.reports.iter().filter(|r| !r.passed).count();
    let dump = json!({"params": params, "reports": g.reports, "failed": failed});
    Ok(Outcome::ok(text, dump))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> (i32, String, String) {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = run(
            std::iter::once("quasistable").chain(args.iter().copied()),
            &mut out,
            &mut err,
        );
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    fn m1_file(dir: &tempfile::TempDir) -> String {
        let p = dir.path().join("m1.json");
        std::fs::write(&p, crate::fixtures::M1_JSON).unwrap();
        p.display().to_string()
    }

    #[test]
    fn check_stable_allocation() {
        let dir = tempfile::tempdir().unwrap();
        let m = m1_file(&dir);
        let (code, out, _) = run_args(&["check", "-m", &m, "-a", "a,d"]);
        assert_eq!(code, 0);
        assert!(out.contains("stable: true"), "{out}");
    }

    #[test]
    fn unknown_contract_is_input_error() {
        let dir = tempfile::tempdir().unwrap();
        let m = m1_file(&dir);
        let (code, _, err) = run_args(&["check", "-m", &m, "-a", "a,zz"]);
        assert_eq!(code, 2);
        assert!(err.contains("zz"));
    }

    #[test]
    fn single_strategy_trace() {
        let dir = tempfile::tempdir().unwrap();
        let m = m1_file(&dir);
        let (code, out, _) = run_args(&["da", "-m", &m, "--strategy", "single"]);
        assert_eq!(code, 0);
        assert_eq!(
            out,
            "strategy single\nstart {}\nt=1 X={b} Z={b} Y={b}\nt=2 X={b,c} Z={c} Y={b,c}\noutcome {b,c}\n"
        );
    }

    #[test]
    fn usage_errors_exit_2_and_help_exits_0() {
        assert_eq!(run_args(&["frobnicate"]).0, 2);
        assert_eq!(run_args(&["lattice", "-m", "x.json"]).0, 2);
        let (code, out, _) = run_args(&["--help"]);
        assert_eq!(code, 0);
        assert!(out.contains("deferred acceptance"));
    }
}
