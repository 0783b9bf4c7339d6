//! Command-line surface. Every command produces a [`CommandResult`]; JSON is
//! the default rendering and tabular commands can also emit CSV.
//!
//! Exit codes: 0 ok, 1 domain or runtime error (with a reason code), 2 usage.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::channel::{
    all_bit_channel_stats, bhattacharyya_exact, certify_degradation, find_elementary_certificate, ChannelSpec,
    PointTransform,
};
use crate::code::{build_code, main_theorem_parameters, rate_asymptotic_lower, rate_parameters, CodeSpec, ZOracle};
use crate::decoder::{mc_block_error, union_bound};
use crate::error::{Error, Result};
use crate::lower_bound::{
    entropy_assignment, lower_sets_construction, verify_assignment_with, EntropyAssignment, VerifyOptions,
};
use crate::orders::{compare_decoding, constructible, expansion_ratio, OrderRelation, SubsetMask};
use crate::walk::{
    max_tail_exact, mc_pair_not_constructible, pair_bound_unchecked, pair_sizes, prob_not_good, WalkQuery,
};

#[derive(Parser, Debug)]
#[command(name = "almost-rm", version, about = "Exact and Monte Carlo tools for δ-almost Reed–Muller codes on the BSC")]
pub struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = OutFormat::Json)]
    pub out: OutFormat,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutFormat {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Decoding and constructible orders.
    #[command(subcommand)]
    Order(OrderCmd),
    /// Random-walk formulas and the pair probability.
    #[command(subcommand)]
    Walk(WalkCmd),
    /// Exact bit-channel statistics and degradation certificates.
    #[command(subcommand)]
    Z(ZCmd),
    /// Rate parameters of the main construction.
    Rate(RateArgs),
    /// The closed-form asymptotic lower bound on the rate.
    RateLower(RateLowerArgs),
    /// Build a δ-almost RM code.
    Build(BuildArgs),
    /// Monte Carlo block error under successive decoding.
    Simulate(SimulateArgs),
    /// Lower-bound set families and entropy assignments.
    #[command(subcommand, name = "lower-bound")]
    LowerBound(LowerBoundCmd),
    /// Small-instance oracle checks of every module.
    Selfcheck,
}

#[derive(Subcommand, Debug)]
pub enum OrderCmd {
    /// Compare two sets in the decoding order and the constructible order.
    Compare {
        #[arg(long)]
        m: u32,
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
    },
    /// Sets of a given size that are ≪ some member of a family.
    Closure {
        #[arg(long)]
        m: u32,
        /// Sets separated by ';', e.g. "1,2;3,4".
        #[arg(long)]
        family: String,
        #[arg(long)]
        size: u32,
    },
    /// Expansion ratio of a family of size-r sets at size r + k.
    Expansion {
        #[arg(long)]
        m: u32,
        #[arg(long)]
        r: u32,
        #[arg(long)]
        k: u32,
        #[arg(long)]
        family: String,
        /// Sample instead of failing when enumeration is too large.
        #[arg(long, requires = "seed")]
        allow_sampling: bool,
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
        #[arg(long)]
        seed: Option<u64>,
    },
}

#[derive(Subcommand, Debug)]
pub enum WalkCmd {
    /// Pr[max S_i >= d | S_m = s].
    Tail {
        #[arg(long)]
        m: u32,
        #[arg(long, allow_hyphen_values = true)]
        s: i64,
        #[arg(long, allow_hyphen_values = true)]
        d: i64,
    },
    /// Fraction of size-r sets that are not d-good.
    NotGood {
        #[arg(long)]
        m: u32,
        #[arg(long)]
        r: u32,
        #[arg(long)]
        d: u32,
    },
    /// Seeded estimate of Pr[not (A ≪ B)] for random |A| = r + k, |B| = r.
    McPair {
        #[arg(long)]
        m: u32,
        #[arg(long, conflicts_with = "alpha")]
        r: Option<u32>,
        #[arg(long, conflicts_with = "beta")]
        k: Option<u32>,
        #[arg(long, allow_hyphen_values = true, requires = "beta")]
        alpha: Option<f64>,
        #[arg(long, requires = "alpha")]
        beta: Option<f64>,
        /// Constant of the analytic bound reported next to the estimate.
        #[arg(long, default_value_t = 1.0)]
        c: f64,
        #[arg(long)]
        trials: u64,
        #[arg(long)]
        seed: u64,
    },
}

#[derive(Subcommand, Debug)]
pub enum ZCmd {
    /// Z, H and MAP error of every bit (or one set).
    Exact {
        #[arg(long)]
        m: u32,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        set: Option<String>,
        /// Permit the 2^32-step engine at m = 5.
        #[arg(long)]
        allow_high_cost: bool,
    },
    /// Certify Z_A >= Z_B by a point transform (searched when not given).
    Certify {
        #[arg(long)]
        m: u32,
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
        /// Transform as JSON, e.g. '{"kind":"transposition","a":1,"b":2}'.
        #[arg(long)]
        transform: Option<String>,
    },
}

#[derive(Args, Debug)]
pub struct RateArgs {
    #[arg(long)]
    p: f64,
    #[arg(long)]
    delta: f64,
    /// Also report the finite-m parameters.
    #[arg(long)]
    m: Option<u32>,
}

#[derive(Args, Debug)]
pub struct RateLowerArgs {
    #[arg(long)]
    p: f64,
    #[arg(long)]
    delta: f64,
    #[arg(long, default_value_t = 1.0)]
    c: f64,
}

#[derive(Args, Debug)]
pub struct CodeArgs {
    #[arg(long)]
    m: Option<u32>,
    #[arg(long)]
    r: Option<u32>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long, value_enum, default_value_t = OracleKind::Exact)]
    oracle: OracleKind,
    #[arg(long)]
    allow_high_cost: bool,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum OracleKind {
    Exact,
    Proxy,
}

#[derive(Args, Debug)]
pub struct BuildArgs {
    #[command(flatten)]
    code: CodeArgs,
    /// Channel for the exact oracle.
    #[arg(long)]
    p: Option<f64>,
    /// Write the code in its text format.
    #[arg(long)]
    write: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    /// Code file in the text format; otherwise built from --m/--r/--delta.
    #[arg(long)]
    code: Option<PathBuf>,
    #[command(flatten)]
    build: CodeArgs,
    #[arg(long)]
    p: f64,
    #[arg(long)]
    trials: u64,
    #[arg(long)]
    seed: u64,
}

#[derive(Subcommand, Debug)]
pub enum LowerBoundCmd {
    /// Set families 𝓑 ⊆ C(m, <= r) with a small ≪-closure.
    Construct {
        #[arg(long)]
        m: u32,
        #[arg(long)]
        rate: f64,
        #[arg(long)]
        eps: f64,
        /// Include the families in the output.
        #[arg(long)]
        families: bool,
    },
    /// Greedy entropy assignment.
    Assign {
        #[arg(long)]
        m: u32,
        #[arg(long)]
        rate: f64,
        #[arg(long)]
        eps: f64,
        /// Write the assignment as CSV.
        #[arg(long)]
        write: Option<PathBuf>,
    },
    /// Check the four properties of an assignment read from CSV.
    Verify {
        #[arg(long)]
        m: u32,
        #[arg(long)]
        rate: f64,
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        delta: f64,
        #[arg(long)]
        assignment: PathBuf,
        #[arg(long, default_value_t = crate::lower_bound::DEFAULT_SAMPLED_PAIRS)]
        pairs: u64,
        #[arg(long)]
        seed: u64,
    },
}

/// The envelope every command returns.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CommandResult {
    /// `"ok"` or `"error"`.
    pub status: String,
    pub payload: Value,
    pub elapsed_ms: f64,
}

/// A rendered command: the JSON envelope, an optional table and the exit code.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub result: CommandResult,
    pub table: Option<Table>,
    pub exit_code: i32,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let err = |e: csv::Error| Error::Io(e.to_string());
        w.write_record(&self.header).map_err(err)?;
        for row in &self.rows {
            w.write_record(row).map_err(err)?;
        }
        String::from_utf8(w.into_inner().map_err(|e| Error::Io(e.to_string()))?).map_err(|e| Error::Io(e.to_string()))
    }

    /// Top-level scalars of a JSON object as `key,value` rows.
    fn from_payload(payload: &Value) -> Self {
        let rows = payload
            .as_object()
            .map(|obj| {
                obj.iter()
                    .filter(|(_, v)| !v.is_object() && !v.is_array())
                    .map(|(k, v)| vec![k.clone(), v.as_str().map_or_else(|| v.to_string(), str::to_string)])
                    .collect()
            })
            .unwrap_or_default();
        Self { header: vec!["key".into(), "value".into()], rows }
    }
}

type Produced = (Value, Option<Table>);

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("plain data serializes")
}

fn parse_set(m: u32, s: &str) -> Result<SubsetMask> {
    SubsetMask::parse(m, s)
}

fn parse_family(m: u32, s: &str) -> Result<Vec<SubsetMask>> {
    s.split(';').map(str::trim).filter(|x| !x.is_empty()).map(|x| parse_set(m, x)).collect()
}

fn relation_name(r: OrderRelation) -> Value {
    to_value(&r)
}

fn run_order(cmd: &OrderCmd) -> Result<Produced> {
    match cmd {
        OrderCmd::Compare { m, a, b } => {
            let (a, b) = (parse_set(*m, a)?, parse_set(*m, b)?);
            let forward = constructible(&a, &b)?;
            let backward = constructible(&b, &a)?;
            let cons = match (forward, backward) {
                (true, true) => OrderRelation::Equal,
                (true, false) => OrderRelation::Less,
                (false, true) => OrderRelation::Greater,
                (false, false) => OrderRelation::Incomparable,
            };
            Ok((
                json!({
                    "relation": relation_name(compare_decoding(&a, &b)?),
                    "constructible": relation_name(cons),
                    "a_rank": a.decoding_rank().to_string(),
                    "b_rank": b.decoding_rank().to_string(),
                }),
                None,
            ))
        }
        OrderCmd::Closure { m, family, size } => {
            let family = parse_family(*m, family)?;
            let closure = crate::lower_bound::closure_up(*m, &family, *size)?;
            let sets: Vec<String> = closure.iter().map(ToString::to_string).collect();
            let table = Table { header: vec!["set".into()], rows: sets.iter().map(|s| vec![s.clone()]).collect() };
            Ok((json!({"m": m, "size": size, "count": sets.len(), "sets": sets}), Some(table)))
        }
        OrderCmd::Expansion { m, r, k, family, allow_sampling, samples, seed } => {
            let family = parse_family(*m, family)?;
            let est = expansion_ratio(*m, *r, *k, &family, *allow_sampling, *samples, seed.unwrap_or(0))?;
            Ok((to_value(&est), None))
        }
    }
}

fn run_walk(cmd: &WalkCmd) -> Result<Produced> {
    match *cmd {
        WalkCmd::Tail { m, s, d } => {
            let p = max_tail_exact(WalkQuery::new(m, s, d)?)?;
            Ok((json!({"m": m, "s": s, "d": d, "exact": p.fraction_string(), "value": p.value}), None))
        }
        WalkCmd::NotGood { m, r, d } => {
            let p = prob_not_good(m, r, d)?;
            Ok((json!({"m": m, "r": r, "d": d, "exact": p.fraction_string(), "value": p.value}), None))
        }
        WalkCmd::McPair { m, r, k, alpha, beta, c, trials, seed } => {
            let (r, k, bound) = match (r, k, alpha, beta) {
                (Some(r), Some(k), None, None) => (r, k, None),
                (None, None, Some(alpha), Some(beta)) => {
                    let (r, k) = pair_sizes(m, alpha, beta);
                    (r, k, Some(pair_bound_unchecked(m, alpha, beta, c)?))
                }
                _ => return Err(Error::Precondition("give either --r and --k or --alpha and --beta".into())),
            };
            let est = mc_pair_not_constructible(m, r, k, trials, seed)?;
            let mut payload = json!({"m": m, "r": r, "k": k, "seed": seed});
            let obj = payload.as_object_mut().expect("object");
            for (key, v) in to_value(&est).as_object().expect("object") {
                obj.insert(key.clone(), v.clone());
            }
            if let Some(b) = bound {
                obj.insert("bound".into(), to_value(&b));
            }
            Ok((payload, None))
        }
    }
}

fn run_z(cmd: &ZCmd) -> Result<Produced> {
    match cmd {
        ZCmd::Exact { m, p, set, allow_high_cost } => {
            let ch = ChannelSpec::new(*p)?;
            let stats = match set {
                Some(s) => {
                    let a = parse_set(*m, s)?;
                    vec![(a, crate::channel::bit_channel_stats(a, ch, *allow_high_cost)?)]
                }
                None => all_bit_channel_stats(*m, ch, *allow_high_cost)?,
            };
            let rows: Vec<Value> =
                stats.iter().map(|(a, s)| json!({"set": a.to_string(), "z": s.z, "h": s.h, "pe": s.pe})).collect();
            let table = Table {
                header: ["set", "z", "h", "pe"].map(String::from).to_vec(),
                rows: stats
                    .iter()
                    .map(|(a, s)| vec![a.to_string(), s.z.to_string(), s.h.to_string(), s.pe.to_string()])
                    .collect(),
            };
            Ok((json!({"m": m, "p": p, "bits": rows}), Some(table)))
        }
        ZCmd::Certify { m, a, b, transform } => {
            let (a, b) = (parse_set(*m, a)?, parse_set(*m, b)?);
            let (t, searched) = match transform {
                Some(text) => {
                    let t: PointTransform =
                        serde_json::from_str(text).map_err(|e| Error::Parse(format!("transform: {e}")))?;
                    t.validate(*m)?;
                    (Some(t), false)
                }
                None => (find_elementary_certificate(a, b)?, true),
            };
            let certified = match &t {
                Some(t) => certify_degradation(a, b, t)?,
                None => false,
            };
            Ok((
                json!({
                    "a": a.to_string(),
                    "b": b.to_string(),
                    "certified": certified,
                    "searched": searched,
                    "transform": t.as_ref().map(to_value),
                    "constructible": constructible(&a, &b)?,
                }),
                None,
            ))
        }
    }
}

fn oracle_for(args: &CodeArgs, p: Option<f64>) -> Result<ZOracle> {
    Ok(match args.oracle {
        OracleKind::Proxy => ZOracle::Proxy,
        OracleKind::Exact => {
            let p = p.ok_or_else(|| Error::Precondition("the exact oracle needs --p".into()))?;
            ZOracle::Exact { channel: ChannelSpec::new(p)?, allow_high_cost: args.allow_high_cost }
        }
    })
}

fn code_from_args(args: &CodeArgs, p: Option<f64>) -> Result<CodeSpec> {
    let missing = |what: &str| Error::Precondition(format!("--{what} is required"));
    build_code(
        args.m.ok_or_else(|| missing("m"))?,
        args.r.ok_or_else(|| missing("r"))?,
        args.delta.ok_or_else(|| missing("delta"))?,
        &oracle_for(args, p)?,
    )
}

fn code_summary(code: &CodeSpec) -> Value {
    json!({
        "m": code.m,
        "r": code.r,
        "delta": code.delta,
        "oracle": code.oracle,
        "candidates": code.candidates().to_string(),
        "kept": code.family.len(),
        "rate": code.rate(),
        "family": code.family.iter().map(ToString::to_string).collect::<Vec<_>>(),
    })
}

fn run_build(args: &BuildArgs) -> Result<Produced> {
    let code = code_from_args(&args.code, args.p)?;
    if let Some(path) = &args.write {
        std::fs::write(path, code.to_text())?;
    }
    let table = Table { header: vec!["set".into()], rows: code.family.iter().map(|a| vec![a.to_string()]).collect() };
    Ok((code_summary(&code), Some(table)))
}

fn run_simulate(args: &SimulateArgs) -> Result<Produced> {
    let code = match &args.code {
        Some(path) => CodeSpec::from_text(&std::fs::read_to_string(path)?)?,
        None => code_from_args(&args.build, Some(args.p))?,
    };
    let ch = ChannelSpec::new(args.p)?;
    let mut report = mc_block_error(&code, ch, args.trials, args.seed)?;
    if code.m <= crate::channel::EXACT_MAX_M {
        let z: BTreeMap<SubsetMask, f64> =
            code.family.iter().map(|&a| Ok((a, bhattacharyya_exact(a, ch, false)?))).collect::<Result<_>>()?;
        report.union_bound = Some(union_bound(&code, &z)?);
    }
    Ok((to_value(&report), None))
}

fn run_lower_bound(cmd: &LowerBoundCmd) -> Result<Produced> {
    match cmd {
        LowerBoundCmd::Construct { m, rate, eps, families } => {
            let out = lower_sets_construction(*m, *rate, *eps)?;
            let mut payload = to_value(&out.report);
            if *families {
                let names = |f: &Option<Vec<SubsetMask>>| {
                    f.as_ref().map(|v| v.iter().map(ToString::to_string).collect::<Vec<_>>())
                };
                let obj = payload.as_object_mut().expect("object");
                obj.insert("b_family".into(), to_value(&names(&out.b_family)));
                obj.insert("a_family".into(), to_value(&names(&out.a_family)));
            }
            Ok((payload, None))
        }
        LowerBoundCmd::Assign { m, rate, eps, write } => {
            let (h, report) = entropy_assignment(*m, *rate, *eps)?;
            let csv = h.to_csv()?;
            if let Some(path) = write {
                std::fs::write(path, &csv)?;
            }
            let table = Table {
                header: vec!["set".into(), "value".into()],
                rows: crate::orders::decoding_order(*m)?
                    .iter()
                    .map(|a| vec![a.to_string(), h.get(a).to_string()])
                    .collect(),
            };
            Ok((
                json!({
                    "construction": to_value(&report),
                    "sum": h.sum(),
                    "fractional": h.fractional_count(),
                    "ones": table.rows.iter().filter(|r| r[1] == "1").count(),
                }),
                Some(table),
            ))
        }
        LowerBoundCmd::Verify { m, rate, eps, delta, assignment, pairs, seed } => {
            let h = EntropyAssignment::from_csv(*m, &std::fs::read_to_string(assignment)?)?;
            let check =
                verify_assignment_with(&h, *rate, *eps, *delta, VerifyOptions { sampled_pairs: *pairs, seed: *seed })?;
            Ok((to_value(&check), None))
        }
    }
}

fn run_rate(args: &RateArgs) -> Result<Produced> {
    let report = rate_parameters(args.p, args.delta).into_result()?;
    let mut payload = to_value(&report);
    if let Some(m) = args.m {
        payload
            .as_object_mut()
            .expect("object")
            .insert("finite_m".into(), to_value(&main_theorem_parameters(args.p, args.delta, m)?));
    }
    Ok((payload, None))
}

fn run_rate_lower(args: &RateLowerArgs) -> Result<Produced> {
    let lower = rate_asymptotic_lower(args.p, args.delta, args.c)?;
    let report = rate_parameters(args.p, args.delta).into_result()?;
    Ok((json!({"p": args.p, "delta": args.delta, "c": args.c, "lower": lower, "r": report.r}), None))
}

fn execute(cli: &Cli) -> Result<Produced> {
    match &cli.command {
        Command::Order(c) => run_order(c),
        Command::Walk(c) => run_walk(c),
        Command::Z(c) => run_z(c),
        Command::Rate(a) => run_rate(a),
        Command::RateLower(a) => run_rate_lower(a),
        Command::Build(a) => run_build(a),
        Command::Simulate(a) => run_simulate(a),
        Command::LowerBound(c) => run_lower_bound(c),
        Command::Selfcheck => {
            let report = crate::selfcheck::run_all();
            let passed = report.iter().all(|c| c.passed);
            let table = Table {
                header: ["check", "passed", "detail"].map(String::from).to_vec(),
                rows: report.iter().map(|c| vec![c.name.clone(), c.passed.to_string(), c.detail.clone()]).collect(),
            };
            let payload = json!({"passed": passed, "checks": to_value(&report)});
            if passed {
                Ok((payload, Some(table)))
            } else {
                Err(Error::Precondition(format!("selfcheck failed: {payload}")))
            }
        }
    }
}

/// Parses `argv` (including the program name) and runs the command.
/// Usage errors come back as `Err` with clap's rendered message.
pub fn dispatch<I, T>(argv: I) -> std::result::Result<Outcome, clap::Error>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv)?;
    let start = Instant::now();
    let produced = execute(&cli);
    let elapsed_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok(match produced {
        Ok((payload, table)) => Outcome {
            table: match cli.out {
                OutFormat::Csv => Some(table.unwrap_or_else(|| Table::from_payload(&payload))),
                OutFormat::Json => None,
            },
            result: CommandResult { status: "ok".into(), payload, elapsed_ms },
            exit_code: 0,
        },
        Err(e) => Outcome {
            result: CommandResult {
                status: "error".into(),
                payload: json!({"reason": e.code(), "message": e.to_string()}),
                elapsed_ms,
            },
            table: None,
            exit_code: 1,
        },
    })
}

/// Runs the CLI, writing the result to `out` and diagnostics to `err`.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match dispatch(argv) {
        Ok(outcome) => {
            let text = match &outcome.table {
                Some(table) => table.to_csv().unwrap_or_default(),
                None => serde_json::to_string(&outcome.result).expect("serializable") + "\n",
            };
            let _ = out.write_all(text.as_bytes());
            if outcome.exit_code != 0 {
                let _ = writeln!(err, "{}", outcome.result.payload["message"].as_str().unwrap_or(""));
            }
            outcome.exit_code
        }
        Err(e) => {
            let informational =
                matches!(e.kind(), clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion);
            if informational {
                let _ = write!(out, "{e}");
                0
            } else {
                let _ = write!(err, "{}", e.render());
                2
            }
        }
    }
}
