//! Command line front end. Every command reads a game (and usually a
//! strategy) from a file, computes in exact rationals, and prints either
//! plain text or a single JSON object. Exit codes: 0 on success, 1 on domain
//! errors (bad input, oversized instance, failed verification), 2 when
//! `check-optimal` cannot decide within the horizon, 64 on usage errors,
//! 66 when a file cannot be read.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{ArgAction, Parser, Subcommand};
use num_bigint::BigUint;
use serde_json::{json, Value};

use dsregret::admissible::{admissibilize, check_admissible, weakly_dominates, Admissibility};
use dsregret::error::Error;
use dsregret::game::Game;
use dsregret::history::History;
use dsregret::oracle::{oracle_min_regret, oracle_regret_of, oracle_values};
use dsregret::product::{build_product, saturation};
use dsregret::pumping::{compress_history, val_history, val_pumped};
use dsregret::rational::{format_rational, to_decimal, Rational};
use dsregret::regret::{default_horizon, is_regret_optimal, min_regret, regret_of, Optimality};
use dsregret::strategy::{FiniteMemoryStrategy, SwitchingStrategy};
use dsregret::values::{cval_witness, solve_values};
use dsregret::VertexId;

#[derive(Parser)]
#[command(
    name = "dsregret",
    version,
    about = "Exact values, regret and admissibility for discounted-sum games"
)]
struct Cli {
    /// Emit a single JSON object instead of plain text
    #[arg(long, global = true)]
    json: bool,

    /// Append decimal approximations with this many fraction digits
    #[arg(long, global = true, value_name = "DIGITS")]
    decimal: Option<u32>,

    /// Cross-check the result against brute-force enumeration (small games)
    #[arg(long, global = true)]
    verify: bool,

    /// Threshold search horizon; overrides DSREGRET_HORIZON and the
    /// game-derived default
    #[arg(long, global = true, value_name = "STEPS")]
    horizon: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print antagonistic, cooperative and restricted cooperative values
    Values {
        game: PathBuf,
        /// Also print a value-attaining lasso from this vertex
        #[arg(long, value_name = "VERTEX")]
        witness: Option<String>,
    },
    /// Measure the regret of a switching strategy
    Regret { game: PathBuf, strategy: PathBuf },
    /// Synthesise a switching strategy with minimal regret
    MinRegret { game: PathBuf },
    /// Decide whether a switching strategy has minimal regret
    CheckOptimal { game: PathBuf, strategy: PathBuf },
    /// Decide whether a switching strategy is admissible
    CheckAdmissible { game: PathBuf, strategy: PathBuf },
    /// Repair a switching strategy into an admissible finite-memory strategy
    Admissibilize { game: PathBuf, strategy: PathBuf },
    /// Compare two switching strategies by weak dominance
    Dominates {
        game: PathBuf,
        strategy_a: PathBuf,
        strategy_b: PathBuf,
    },
    /// Rewrite a history as a short path with one pumped cycle, keeping the
    /// length and never increasing the value
    Compress {
        game: PathBuf,
        /// Comma-separated vertex names
        #[arg(long, value_name = "V0,V1,...")]
        history: String,
    },
    /// Decide whether the strategy admits a consistent history of a given
    /// length ending in a given move
    Exists {
        game: PathBuf,
        strategy: PathBuf,
        /// History length in edges (any nonnegative integer, however large)
        #[arg(long, value_name = "COUNT")]
        n: String,
        /// Switch flag the history must end with
        #[arg(long, value_name = "BOOL", action = ArgAction::Set, value_parser = clap::value_parser!(bool))]
        switched: bool,
        /// Vertex the history must end at (owned by Eve)
        #[arg(long, value_name = "VERTEX")]
        at: String,
        /// Move the strategy must continue with
        #[arg(long, value_name = "VERTEX")]
        action: String,
    },
    /// Print the strategy product automaton
    Product { game: PathBuf, strategy: PathBuf },
}

enum CliError {
    Io(String),
    Domain(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> CliError {
        CliError::Domain(e)
    }
}

/// Output accumulator: plain text lines, plus the pieces of the JSON object.
struct Report {
    command: &'static str,
    headline: String,
    lines: Vec<String>,
    exact: BTreeMap<String, String>,
    decimal: BTreeMap<String, String>,
    extra: BTreeMap<String, Value>,
}

struct Fmt {
    json: bool,
    decimal: Option<u32>,
}

impl Report {
    fn new(command: &'static str) -> Report {
        Report {
            command,
            headline: String::from("ok"),
            lines: Vec::new(),
            exact: BTreeMap::new(),
            decimal: BTreeMap::new(),
            extra: BTreeMap::new(),
        }
    }

    /// Sets the JSON result string and prints it as a text line.
    fn head(&mut self, s: impl Into<String>) {
        let s = s.into();
        self.headline = s.clone();
        self.lines.push(s);
    }

    fn line(&mut self, s: impl Into<String>) {
        self.lines.push(s.into());
    }

    fn rational(&mut self, key: &str, r: &Rational, fmt: &Fmt) {
        self.exact.insert(key.to_string(), format_rational(r));
        if let Some(d) = fmt.decimal {
            self.decimal.insert(key.to_string(), to_decimal(r, d));
        }
    }

    fn extra(&mut self, key: &str, v: Value) {
        self.extra.insert(key.to_string(), v);
    }

    fn print(self, fmt: &Fmt) {
        let text = if fmt.json {
            let mut obj = serde_json::Map::new();
            obj.insert("command".into(), json!(self.command));
            obj.insert("result".into(), json!(self.headline));
            if !self.exact.is_empty() {
                obj.insert("exact".into(), json!(self.exact));
            }
            if !self.decimal.is_empty() {
                obj.insert("decimal".into(), json!(self.decimal));
            }
            for (k, v) in self.extra {
                obj.insert(k, v);
            }
            let mut s = serde_json::to_string_pretty(&Value::Object(obj)).unwrap();
            s.push('\n');
            s
        } else {
            let mut s = self.lines.join("\n");
            s.push('\n');
            s
        };
        // A closed pipe on the other end is not our error.
        use std::io::Write;
        let _ = std::io::stdout().write_all(text.as_bytes());
    }
}

/// Rational for text output, with the optional decimal rendering appended.
fn show(r: &Rational, fmt: &Fmt) -> String {
    match fmt.decimal {
        Some(d) => format!("{} ({})", format_rational(r), to_decimal(r, d)),
        None => format_rational(r),
    }
}

fn read_file(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn in_file(path: &Path, e: Error) -> CliError {
    CliError::Domain(Error::Invalid(format!("{}: {e}", path.display())))
}

fn load_game(path: &Path) -> Result<Game, CliError> {
    let text = read_file(path)?;
    Game::parse(&text).map_err(|e| in_file(path, e))
}

fn load_strategy(g: &Game, path: &Path) -> Result<SwitchingStrategy, CliError> {
    let text = read_file(path)?;
    SwitchingStrategy::parse(g, &text).map_err(|e| in_file(path, e))
}

fn resolve_vertex(g: &Game, name: &str) -> Result<VertexId, CliError> {
    g.vertex(name)
        .ok_or_else(|| CliError::Domain(Error::Invalid(format!("unknown vertex '{name}'"))))
}

fn resolve_horizon(flag: Option<u64>, g: &Game) -> Result<u64, CliError> {
    if let Some(h) = flag {
        return Ok(h);
    }
    match std::env::var("DSREGRET_HORIZON") {
        Ok(s) => s.trim().parse::<u64>().map_err(|_| {
            CliError::Domain(Error::Invalid(
                "DSREGRET_HORIZON must be a nonnegative integer".to_string(),
            ))
        }),
        Err(_) => Ok(default_horizon(g)),
    }
}

fn verify_failed(what: &str) -> CliError {
    CliError::Domain(Error::Invalid(format!("verification failed: {what}")))
}

fn names(g: &Game, vs: &[VertexId]) -> Vec<String> {
    vs.iter().map(|&v| g.name(v).to_string()).collect()
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 64,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    let fmt = Fmt { json: cli.json, decimal: cli.decimal };
    match run(&cli, &fmt) {
        Ok(code) => std::process::exit(code),
        Err(CliError::Io(msg)) => {
            eprintln!("error: {msg}");
            std::process::exit(66);
        }
        Err(CliError::Domain(e)) => {
            eprintln!("error: {e}");
            std::process::exit(1);
        }
    }
}

fn run(cli: &Cli, fmt: &Fmt) -> Result<i32, CliError> {
    match &cli.command {
        Command::Values { game, witness } => cmd_values(fmt, game, witness.as_deref(), cli.verify),
        Command::Regret { game, strategy } => cmd_regret(fmt, game, strategy, cli.verify),
        Command::MinRegret { game } => cmd_min_regret(fmt, game, cli.horizon, cli.verify),
        Command::CheckOptimal { game, strategy } => {
            cmd_check_optimal(fmt, game, strategy, cli.horizon)
        }
        Command::CheckAdmissible { game, strategy } => cmd_check_admissible(fmt, game, strategy),
        Command::Admissibilize { game, strategy } => cmd_admissibilize(fmt, game, strategy),
        Command::Dominates { game, strategy_a, strategy_b } => {
            cmd_dominates(fmt, game, strategy_a, strategy_b)
        }
        Command::Compress { game, history } => cmd_compress(fmt, game, history),
        Command::Exists { game, strategy, n, switched, at, action } => {
            cmd_exists(fmt, game, strategy, n, *switched, at, action)
        }
        Command::Product { game, strategy } => cmd_product(fmt, game, strategy),
    }
}

fn cmd_values(
    fmt: &Fmt,
    game: &Path,
    witness: Option<&str>,
    verify: bool,
) -> Result<i32, CliError> {
    let g = load_game(game)?;
    let vt = solve_values(&g);
    let mut rep = Report::new("values");
    for v in g.vertices() {
        rep.line(format!(
            "{} {} {} {}",
            g.name(v),
            show(&vt.a_val[v], fmt),
            show(&vt.c_val[v], fmt),
            show(&vt.ac_val[v], fmt)
        ));
        rep.rational(&format!("{}.aVal", g.name(v)), &vt.a_val[v], fmt);
        rep.rational(&format!("{}.cVal", g.name(v)), &vt.c_val[v], fmt);
        rep.rational(&format!("{}.acVal", g.name(v)), &vt.ac_val[v], fmt);
    }
    if let Some(name) = witness {
        let u = resolve_vertex(&g, name)?;
        let l = cval_witness(&g, &vt, u);
        rep.line(format!(
            "witness {}: alpha {} ; beta {}",
            name,
            l.alpha.format(&g),
            l.beta.format(&g)
        ));
        rep.extra(
            "witness",
            json!({
                "vertex": name,
                "alpha": names(&g, l.alpha.vertices()),
                "beta": names(&g, l.beta.vertices()),
            }),
        );
    }
    if verify {
        let ov = oracle_values(&g)?;
        if ov.a_val != vt.a_val || ov.c_val != vt.c_val || ov.ac_val != vt.ac_val {
            return Err(verify_failed("solved values differ from enumerated values"));
        }
        rep.line("verified against oracle");
        rep.extra("verified", json!(true));
    }
    rep.print(fmt);
    Ok(0)
}

fn cmd_regret(fmt: &Fmt, game: &Path, strategy: &Path, verify: bool) -> Result<i32, CliError> {
    let g = load_game(game)?;
    let s = load_strategy(&g, strategy)?;
    let vt = solve_values(&g);
    let r = regret_of(&g, &vt, &s)?;
    let mut rep = Report::new("regret");
    rep.head(format!("regret {}", show(&r.regret, fmt)));
    rep.rational("regret", &r.regret, fmt);
    if let Some(w) = &r.witness {
        rep.line(format!(
            "witness length={} vertex={} switched={} deviate-to={}",
            w.length,
            g.name(w.vertex),
            w.switched,
            g.name(w.deviation)
        ));
        rep.extra(
            "witness",
            json!({
                "length": w.length,
                "vertex": g.name(w.vertex),
                "switched": w.switched,
                "deviate-to": g.name(w.deviation),
            }),
        );
    }
    if verify {
        let cap = 2 * g.vertex_count() as u64 + saturation(&s);
        let or = oracle_regret_of(&g, &s, cap)?;
        if or != r.regret {
            return Err(verify_failed("regret differs from the unfolded value"));
        }
        rep.line("verified against oracle");
        rep.extra("verified", json!(true));
    }
    rep.print(fmt);
    Ok(0)
}

fn cmd_min_regret(
    fmt: &Fmt,
    game: &Path,
    horizon: Option<u64>,
    verify: bool,
) -> Result<i32, CliError> {
    let g = load_game(game)?;
    let vt = solve_values(&g);
    let horizon = resolve_horizon(horizon, &g)?;
    let mr = min_regret(&g, &vt, horizon)?;
    let mut rep = Report::new("min-regret");
    rep.head(format!("Regret {}", show(&mr.regret, fmt)));
    rep.line(format!(
        "horizon {} {}",
        mr.horizon,
        if mr.horizon_sufficient { "sufficient" } else { "insufficient" }
    ));
    for l in mr.strategy.format(&g).lines() {
        rep.line(l);
    }
    rep.rational("regret", &mr.regret, fmt);
    rep.extra("horizon", json!(mr.horizon));
    rep.extra("sufficient", json!(mr.horizon_sufficient));
    rep.extra("strategy", json!(mr.strategy.format(&g)));
    if verify {
        let max_t = mr.strategy.thresholds.max_finite().unwrap_or(0);
        let om = oracle_min_regret(&g, max_t)?;
        let ok = if mr.horizon_sufficient { om == mr.regret } else { om <= mr.regret };
        if !ok {
            return Err(verify_failed("synthesised regret differs from the enumerated minimum"));
        }
        rep.line("verified against oracle");
        rep.extra("verified", json!(true));
    }
    rep.print(fmt);
    Ok(0)
}

fn cmd_check_optimal(
    fmt: &Fmt,
    game: &Path,
    strategy: &Path,
    horizon: Option<u64>,
) -> Result<i32, CliError> {
    let g = load_game(game)?;
    let s = load_strategy(&g, strategy)?;
    let vt = solve_values(&g);
    let horizon = resolve_horizon(horizon, &g)?;
    let (verdict, r, mr) = is_regret_optimal(&g, &vt, &s, horizon)?;
    let mut rep = Report::new("check-optimal");
    let code = match verdict {
        Optimality::Optimal => {
            rep.head(format!(
                "optimal regret={} minimum={}",
                show(&r.regret, fmt),
                show(&mr.regret, fmt)
            ));
            rep.rational("regret", &r.regret, fmt);
            rep.rational("minimum", &mr.regret, fmt);
            0
        }
        Optimality::Suboptimal => {
            rep.head(format!(
                "suboptimal regret={} minimum={}",
                show(&r.regret, fmt),
                show(&mr.regret, fmt)
            ));
            rep.rational("regret", &r.regret, fmt);
            rep.rational("minimum", &mr.regret, fmt);
            0
        }
        Optimality::Inconclusive => {
            rep.head(format!(
                "inconclusive regret={} horizon={}",
                show(&r.regret, fmt),
                mr.horizon
            ));
            rep.rational("regret", &r.regret, fmt);
            rep.extra("horizon", json!(mr.horizon));
            2
        }
    };
    rep.print(fmt);
    Ok(code)
}

fn cmd_check_admissible(fmt: &Fmt, game: &Path, strategy: &Path) -> Result<i32, CliError> {
    let g = load_game(game)?;
    let s = load_strategy(&g, strategy)?;
    let vt = solve_values(&g);
    let mut rep = Report::new("check-admissible");
    match check_admissible(&g, &vt, &s)? {
        Admissibility::Admissible => rep.head("admissible"),
        Admissibility::Dominated { vertex, counter, switched } => {
            rep.head(format!(
                "dominated vertex={} counter={} switched={}",
                g.name(vertex),
                counter,
                switched
            ));
            rep.extra(
                "witness",
                json!({
                    "vertex": g.name(vertex),
                    "counter": counter,
                    "switched": switched,
                }),
            );
        }
    }
    rep.print(fmt);
    Ok(0)
}

fn cmd_admissibilize(fmt: &Fmt, game: &Path, strategy: &Path) -> Result<i32, CliError> {
    let g = load_game(game)?;
    let s = load_strategy(&g, strategy)?;
    let vt = solve_values(&g);
    let fm = admissibilize(&g, &vt, &s)?;
    let mut rep = Report::new("admissibilize");
    rep.head(format!("memory-states {}", fm.memory_count()));
    rep.line(format!("initial {}", fm.label(fm.initial())));
    let mut states = Vec::new();
    for m in 0..fm.memory_count() {
        rep.line(format!("state {}", fm.label(m)));
        let mut actions = BTreeMap::new();
        for v in g.eve_vertices() {
            if let Some(w) = fm.action(m, v) {
                rep.line(format!("  at {} -> {}", g.name(v), g.name(w)));
                actions.insert(g.name(v).to_string(), g.name(w).to_string());
            }
        }
        let mut updates = BTreeMap::new();
        for v in g.vertices() {
            let to = fm.update(m, v);
            rep.line(format!("  on {} -> {}", g.name(v), fm.label(to)));
            updates.insert(g.name(v).to_string(), fm.label(to).to_string());
        }
        states.push(json!({
            "label": fm.label(m),
            "actions": actions,
            "updates": updates,
        }));
    }
    rep.extra("memory-states", json!(fm.memory_count()));
    rep.extra("initial", json!(fm.label(fm.initial())));
    rep.extra("states", Value::Array(states));
    rep.print(fmt);
    Ok(0)
}

fn cmd_dominates(
    fmt: &Fmt,
    game: &Path,
    strategy_a: &Path,
    strategy_b: &Path,
) -> Result<i32, CliError> {
    let g = load_game(game)?;
    let sa = load_strategy(&g, strategy_a)?;
    let sb = load_strategy(&g, strategy_b)?;
    let a = FiniteMemoryStrategy::from_switching(&g, &sa)?;
    let b = FiniteMemoryStrategy::from_switching(&g, &sb)?;
    let ab = weakly_dominates(&g, &a, &b)?;
    let ba = weakly_dominates(&g, &b, &a)?;
    let mut rep = Report::new("dominates");
    rep.head(match (ab, ba) {
        (true, true) => "equivalent",
        (true, false) => "A-dominates-B",
        (false, true) => "B-dominates-A",
        (false, false) => "incomparable",
    });
    rep.extra("a-dominates-b", json!(ab));
    rep.extra("b-dominates-a", json!(ba));
    rep.print(fmt);
    Ok(0)
}

fn cmd_compress(fmt: &Fmt, game: &Path, history: &str) -> Result<i32, CliError> {
    let g = load_game(game)?;
    let h = History::parse(&g, history)?;
    let p = compress_history(&g, &h);
    let input = val_history(&g, &h);
    let output = val_pumped(&g, &p)?
        .to_rational(g.lambda())
        .expect("compressed value of a materialized history stays materializable");
    let mut rep = Report::new("compress");
    rep.line(format!("alpha {}", p.alpha.format(&g)));
    match &p.pump {
        Some(pump) => {
            rep.line(format!("beta {}", pump.beta.format(&g)));
            rep.line(format!("k {}", pump.k));
            rep.extra("beta", json!(names(&g, pump.beta.vertices())));
            rep.extra("k", json!(pump.k.to_string()));
        }
        None => {
            rep.line("beta -");
            rep.line("k 0");
            rep.extra("beta", Value::Null);
            rep.extra("k", json!("0"));
        }
    }
    rep.line(format!("gamma {}", p.gamma.format(&g)));
    rep.line(format!("input-value {}", show(&input, fmt)));
    rep.line(format!("output-value {}", show(&output, fmt)));
    rep.extra("alpha", json!(names(&g, p.alpha.vertices())));
    rep.extra("gamma", json!(names(&g, p.gamma.vertices())));
    rep.rational("input-value", &input, fmt);
    rep.rational("output-value", &output, fmt);
    rep.print(fmt);
    Ok(0)
}

fn cmd_exists(
    fmt: &Fmt,
    game: &Path,
    strategy: &Path,
    n: &str,
    switched: bool,
    at: &str,
    action: &str,
) -> Result<i32, CliError> {
    let g = load_game(game)?;
    let s = load_strategy(&g, strategy)?;
    let count: BigUint = n.trim().parse().map_err(|_| {
        CliError::Domain(Error::Invalid(
            "history length must be a nonnegative integer".to_string(),
        ))
    })?;
    let v = resolve_vertex(&g, at)?;
    let v2 = resolve_vertex(&g, action)?;
    let yes = dsregret::pumping::history_exists(&g, &s, &count, switched, v, v2)?;
    let mut rep = Report::new("exists");
    rep.head(if yes { "yes" } else { "no" });
    rep.print(fmt);
    Ok(0)
}

fn cmd_product(fmt: &Fmt, game: &Path, strategy: &Path) -> Result<i32, CliError> {
    let g = load_game(game)?;
    let s = load_strategy(&g, strategy)?;
    let p = build_product(&g, &s)?;
    let mut rep = Report::new("product");
    rep.head(format!("states {}", p.states.len()));
    let mut state_list = Vec::new();
    for (i, q) in p.states.iter().enumerate() {
        let marker = if i == p.initial { " initial" } else { "" };
        rep.line(format!(
            "state {i} vertex={} counter={} switched={}{marker}",
            g.name(q.vertex),
            q.counter,
            q.switched
        ));
        state_list.push(json!({
            "index": i,
            "vertex": g.name(q.vertex),
            "counter": q.counter,
            "switched": q.switched,
            "initial": i == p.initial,
        }));
    }
    let mut edge_list = Vec::new();
    for (i, edges) in p.succ.iter().enumerate() {
        for &(j, w) in edges {
            rep.line(format!("edge {i} -> {j} weight={w}"));
            edge_list.push(json!({ "from": i, "to": j, "weight": w }));
        }
    }
    rep.extra("states", json!(p.states.len()));
    rep.extra("state-list", Value::Array(state_list));
    rep.extra("edges", Value::Array(edge_list));
    rep.print(fmt);
    Ok(0)
}
