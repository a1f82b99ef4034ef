use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use boundlab::attn::{forward_tokens, AttnError, EvalTrace};
use boundlab::bitnum::{arith_demo, Num};
use boundlab::commsim::{self, CommError};
use boundlab::constructs::{self, ConstructError, Construction, ConstructionId, EqInstance, Params};
use boundlab::oracle::{self, OracleError, VerifyOptions, VerifyReport};
use boundlab::quantlab::{self, EvalSet, QuantError, QuantFormat, QuantReport, SchemaError};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "boundlab", version, about = "Bounded-precision attention experiments on the equality function")]
struct Cli {
    /// Seed for every sampled quantity.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Write the report here instead of stdout.
    #[arg(long, global = true, env = "BOUNDLAB_OUT")]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = OutFormat::Text)]
    format: OutFormat,
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true, env = "BOUNDLAB_JOBS")]
    jobs: Option<usize>,
    /// Print per-token evaluation traces for reported pairs to stderr.
    #[arg(long, global = true)]
    trace: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutFormat {
    Text,
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check a construction on every promise pair (or a seeded sample).
    Verify(VerifyArgs),
    /// Verify several sizes at several precision offsets.
    Sweep(SweepArgs),
    /// Run the one-way protocol compiled from a construction.
    Protocol(ProtocolArgs),
    /// Count fooling sets and compare with the closed form.
    Fooling(FoolingArgs),
    /// Quantize a model to several formats and measure accuracy.
    Quantize(QuantizeArgs),
    /// Print the worked rounding examples.
    ArithDemo,
    /// Print a construction's weight table, or its weights document with --format json.
    Build(BuildArgs),
    /// Validate a weights document and optionally verify it.
    ImportCheck(ImportArgs),
}

#[derive(Args, Clone)]
struct ConstructionArgs {
    #[arg(long, default_value = "fx-tight")]
    construction: ConstructionId,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    t: Option<usize>,
    #[arg(long)]
    e: Option<usize>,
    /// Bits added to every stage precision.
    #[arg(long, default_value_t = 0, allow_negative_numbers = true)]
    precision_delta: i32,
    /// Non-query token count.
    #[arg(long)]
    n: Option<usize>,
}

impl ConstructionArgs {
    fn params(&self) -> Params {
        Params { m: self.m, t: self.t, e: self.e, precision_delta: self.precision_delta, n: self.n }
    }

    fn build(&self) -> Result<Construction, CliError> {
        Ok(constructs::build(self.construction, &self.params())?)
    }
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    c: ConstructionArgs,
    /// Sample this many uniform pairs plus the single-flip set instead of enumerating.
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long, default_value_t = oracle::DEFAULT_PAIR_CAP)]
    pair_cap: u64,
    #[arg(long)]
    stop_after: Option<u64>,
    #[arg(long, default_value_t = 16)]
    max_examples: usize,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, value_delimiter = ',', default_value = "fx-simple,fx-tight")]
    constructions: Vec<ConstructionId>,
    /// String lengths for the fixed-point constructions.
    #[arg(long, value_delimiter = ',', default_value = "5,7,9,11")]
    ms: Vec<usize>,
    /// (t, e) pairs for the floating-point constructions, as t:e.
    #[arg(long, value_delimiter = ',', default_value = "4:3,5:3,4:4")]
    te: Vec<String>,
    #[arg(long, value_delimiter = ',', default_value = "0,-1", allow_negative_numbers = true)]
    deltas: Vec<i32>,
    #[arg(long, default_value_t = 100_000)]
    samples: usize,
    #[arg(long, default_value_t = oracle::DEFAULT_PAIR_CAP)]
    pair_cap: u64,
}

#[derive(Args)]
struct ProtocolArgs {
    #[command(flatten)]
    c: ConstructionArgs,
    /// Alice's string; with --z runs a single instance, otherwise every promise pair.
    #[arg(long, requires = "z")]
    y: Option<String>,
    #[arg(long, requires = "y")]
    z: Option<String>,
    #[arg(long, default_value_t = 1 << 22)]
    pair_cap: u64,
}

#[derive(Args)]
struct FoolingArgs {
    /// Single m; all 4..=max-m when omitted.
    #[arg(long)]
    m: Option<usize>,
    /// Single e; all 2 <= e < m when omitted.
    #[arg(long)]
    e: Option<usize>,
    #[arg(long, default_value_t = 16)]
    max_m: usize,
}

#[derive(Args)]
struct QuantizeArgs {
    #[command(flatten)]
    c: ConstructionArgs,
    /// Quantize this weights document instead of a built construction.
    #[arg(long)]
    weights: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', default_value = "p,p-1,p-2")]
    formats: Vec<QuantFormat>,
    /// Evaluate on a seeded dataset of this size instead of every promise pair.
    #[arg(long)]
    dataset: Option<usize>,
}

#[derive(Args)]
struct BuildArgs {
    #[command(flatten)]
    c: ConstructionArgs,
    /// Positions to list in the table (all when omitted).
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    positions: Option<Vec<i32>>,
}

#[derive(Args)]
struct ImportArgs {
    weights: PathBuf,
    /// Also verify the imported model on every promise pair.
    #[arg(long)]
    verify: bool,
    #[arg(long, default_value_t = oracle::DEFAULT_PAIR_CAP)]
    pair_cap: u64,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Internal(String),
}

impl From<ConstructError> for CliError {
    fn from(e: ConstructError) -> CliError {
        CliError::Usage(e.to_string())
    }
}

impl From<OracleError> for CliError {
    fn from(e: OracleError) -> CliError {
        match e {
            OracleError::BudgetExceeded { .. } | OracleError::Construct(_) => CliError::Usage(e.to_string()),
            _ => CliError::Internal(e.to_string()),
        }
    }
}

impl From<QuantError> for CliError {
    fn from(e: QuantError) -> CliError {
        match e {
            QuantError::Oracle(o) => o.into(),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<CommError> for CliError {
    fn from(e: CommError) -> CliError {
        match e {
            CommError::Attn(_) => CliError::Internal(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<SchemaError> for CliError {
    fn from(e: SchemaError) -> CliError {
        CliError::Usage(e.to_string())
    }
}

impl From<AttnError> for CliError {
    fn from(e: AttnError) -> CliError {
        CliError::Internal(e.to_string())
    }
}

/// Outcome of a command: whether everything checked out, and the report text.
struct Outcome {
    ok: bool,
    body: String,
}

struct Ctx {
    seed: u64,
    format: OutFormat,
    trace: bool,
}

fn json<T: serde::Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("report serialises");
    s.push('\n');
    s
}

fn join(v: &[Num]) -> String {
    v.iter().map(Num::to_string).collect::<Vec<_>>().join(" ")
}

fn trace_text(t: &EvalTrace) -> String {
    let mut s = String::new();
    s.push_str(&format!("  q=[{}]\n", join(&t.q)));
    for j in 0..t.logits.len() {
        s.push_str(&format!(
            "  token {j}: logit={} a_num={} a_den={} contrib=[{}] num=[{}]\n",
            t.logits[j],
            t.a_num[j],
            t.a_den[j],
            join(&t.contributions[j]),
            join(&t.num_partials[j])
        ));
    }
    if let Some(d) = &t.denominator {
        s.push_str(&format!("  denominator={d}\n"));
    }
    s.push_str(&format!("  sa=[{}] hidden=[{}] out=[{}]\n", join(&t.sa), join(&t.hidden), join(&t.outputs)));
    s
}

fn print_trace(c: &Construction, y: &str, z: &str) -> Result<(), CliError> {
    let inst = EqInstance::parse(y, z)?;
    let t = forward_tokens(&c.spec, &c.layout.encode_unchecked(&inst))?;
    eprintln!("trace y={y} z={z}\n{}", trace_text(&t));
    Ok(())
}

fn verify_report(c: &Construction, samples: Option<usize>, seed: u64, opts: &VerifyOptions) -> Result<VerifyReport, CliError> {
    let samples = match samples {
        Some(s) => Some(s),
        None if oracle::count_pairs(&c.layout) > opts.pair_cap => {
            eprintln!("{} pairs exceed the cap; sampling 100000 pairs", oracle::count_pairs(&c.layout));
            Some(100_000)
        }
        None => None,
    };
    Ok(match samples {
        Some(s) => oracle::verify_sampled_construction(c, s, seed, opts)?,
        None => oracle::verify_construction(c, opts)?,
    })
}

fn render_verify(ctx: &Ctx, reports: &[VerifyReport]) -> String {
    match ctx.format {
        OutFormat::Text => reports.iter().map(|r| format!("{r}\n")).collect(),
        OutFormat::Csv => {
            let mut s = format!("{}\n", VerifyReport::CSV_HEADER);
            for r in reports {
                s.push_str(&r.csv_row(false));
                s.push('\n');
            }
            s
        }
        OutFormat::Json if reports.len() == 1 => json(&reports[0]),
        OutFormat::Json => json(&reports),
    }
}

fn cmd_verify(ctx: &Ctx, a: &VerifyArgs) -> Result<Outcome, CliError> {
    let c = a.c.build()?;
    let opts = VerifyOptions { pair_cap: a.pair_cap, stop_after: a.stop_after, max_examples: a.max_examples };
    let r = verify_report(&c, a.samples, ctx.seed, &opts)?;
    if ctx.trace {
        for f in &r.failures {
            print_trace(&c, &f.y, &f.z)?;
        }
    }
    Ok(Outcome { ok: r.passed(), body: render_verify(ctx, &[r]) })
}

fn parse_te(s: &str) -> Result<(usize, usize), CliError> {
    let bad = || CliError::Usage(format!("expected t:e, got {s:?}"));
    let (t, e) = s.split_once(':').ok_or_else(bad)?;
    Ok((t.parse().map_err(|_| bad())?, e.parse().map_err(|_| bad())?))
}

fn cmd_sweep(ctx: &Ctx, a: &SweepArgs) -> Result<Outcome, CliError> {
    let opts = VerifyOptions { pair_cap: a.pair_cap, stop_after: None, max_examples: 1 };
    let te: Vec<(usize, usize)> = a.te.iter().map(|s| parse_te(s)).collect::<Result<_, _>>()?;
    let mut reports = vec![];
    let mut ok = true;
    for &id in &a.constructions {
        let params: Vec<Params> = if id.is_fixed_point() {
            a.ms.iter().map(|&m| Params::m(m)).collect()
        } else {
            te.iter().map(|&(t, e)| Params::te(t, e)).collect()
        };
        for p in &params {
            for &d in &a.deltas {
                let c = match constructs::build(id, &p.delta(d)) {
                    Ok(c) => c,
                    Err(e) if d != 0 => {
                        eprintln!("skipping {id} delta={d}: {e}");
                        continue;
                    }
                    Err(e) => return Err(e.into()),
                };
                let r = verify_report(&c, None, ctx.seed, &opts)?;
                ok &= d < 0 || r.passed();
                reports.push(r);
            }
        }
    }
    let body = match ctx.format {
        OutFormat::Text => {
            let mut s = format!("{}\n", VerifyReport::CSV_HEADER);
            for r in &reports {
                s.push_str(&r.csv_row(false));
                s.push('\n');
            }
            s
        }
        _ => render_verify(ctx, &reports),
    };
    Ok(Outcome { ok, body })
}

fn cmd_protocol(ctx: &Ctx, a: &ProtocolArgs) -> Result<Outcome, CliError> {
    let c = a.c.build()?;
    if let (Some(y), Some(z)) = (&a.y, &a.z) {
        let inst = EqInstance::parse(y, z)?;
        let run = commsim::run_protocol(&c, &inst, c.spec.kind)?;
        let direct = forward_tokens(&c.spec, &c.layout.encode(&inst)?)?;
        if ctx.trace {
            print_trace(&c, y, z)?;
        }
        let ok = run.bob_output == direct.bit && run.sa == direct.sa;
        let bit = |b: Option<u8>| b.map_or("none".to_string(), |b| b.to_string());
        let body = match ctx.format {
            OutFormat::Json => json(&serde_json::json!({
                "y": y, "z": z,
                "l1": run.l1.map(|x| x.to_string()),
                "l2": run.l2.iter().map(Num::to_string).collect::<Vec<_>>(),
                "bit_cost": run.bit_cost,
                "bob_output": run.bob_output,
                "forward_output": direct.bit,
                "agree": ok,
            })),
            OutFormat::Csv => format!(
                "y,z,bit_cost,bob_output,forward_output\n{y},{z},{},{},{}\n",
                run.bit_cost,
                bit(run.bob_output),
                bit(direct.bit)
            ),
            OutFormat::Text => format!("{run}\nforward output={}\n{}\n", bit(direct.bit), if ok { "AGREE" } else { "DISAGREE" }),
        };
        return Ok(Outcome { ok, body });
    }
    let check = commsim::check_protocol(&c, a.pair_cap)?;
    let body = match ctx.format {
        OutFormat::Json => json(&check),
        OutFormat::Csv => format!(
            "construction,m,pairs,agree,correct,bit_cost\n{},{},{},{},{},{}\n",
            check.construction, check.m, check.pairs, check.agree, check.correct, check.bit_cost
        ),
        OutFormat::Text => format!("{check}\n{}\n", if check.passed() { "PASS" } else { "FAIL" }),
    };
    Ok(Outcome { ok: check.passed(), body })
}

fn cmd_fooling(ctx: &Ctx, a: &FoolingArgs) -> Result<Outcome, CliError> {
    let ms: Vec<usize> = match a.m {
        Some(m) => vec![m],
        None => (3..=a.max_m).collect(),
    };
    let mut rows = vec![];
    for m in ms {
        let es: Vec<usize> = match a.e {
            Some(e) => vec![e],
            None => (2..m).collect(),
        };
        for e in es {
            rows.push(commsim::enumerate_fooling(m, e)?);
        }
    }
    let ok = rows.iter().all(|r| r.formula_matches() && r.bound as usize == r.m);
    let body = match ctx.format {
        OutFormat::Json => json(&rows),
        _ => {
            let mut s = String::from("m,e,size,bound,formula,matches\n");
            for r in &rows {
                s.push_str(&format!("{},{},{},{},{},{}\n", r.m, r.e, r.enumerated, r.bound, r.formula, r.formula_matches()));
            }
            s
        }
    };
    Ok(Outcome { ok, body })
}

fn cmd_quantize(ctx: &Ctx, a: &QuantizeArgs) -> Result<Outcome, CliError> {
    let subject = match &a.weights {
        Some(path) => {
            let imp = quantlab::import_weights(path)?;
            (imp.spec.id.clone(), imp.spec, imp.layout)
        }
        None => {
            let c = a.c.build()?;
            (c.id.to_string(), c.spec, c.layout)
        }
    };
    let set = a.dataset.map_or(EvalSet::Exhaustive, EvalSet::Dataset);
    let mut report = QuantReport { source: subject.0.clone(), rows: vec![] };
    for f in &a.formats {
        match quantlab::sweep(std::slice::from_ref(&subject), &[*f], set, ctx.seed) {
            Ok(r) => report.rows.extend(r.rows),
            Err(QuantError::InvalidTarget(msg)) => eprintln!("skipping {f}: {msg}"),
            Err(e) => return Err(e.into()),
        }
    }
    let body = match ctx.format {
        OutFormat::Json => json(&report),
        _ => report.to_csv(false),
    };
    Ok(Outcome { ok: true, body })
}

fn cmd_build(ctx: &Ctx, a: &BuildArgs) -> Result<Outcome, CliError> {
    let c = a.c.build()?;
    let body = match ctx.format {
        OutFormat::Json => quantlab::export_weights(&c.spec, &c.layout),
        _ => constructs::render_table(&c, a.positions.as_deref()),
    };
    Ok(Outcome { ok: true, body })
}

fn cmd_import(ctx: &Ctx, a: &ImportArgs) -> Result<Outcome, CliError> {
    let imp = quantlab::import_weights(&a.weights)?;
    let spec = &imp.spec;
    let mut body = format!(
        "{}: {} attention, m={}, {} tokens, d={}, d_v={}, formats num={} den={} out={}, capacity={}\n",
        spec.id,
        spec.kind.as_str(),
        spec.m,
        spec.n_tokens,
        spec.d,
        spec.d_v(),
        spec.num_fmt,
        spec.den_fmt,
        spec.out_fmt,
        spec.capacity()
    );
    let mut ok = true;
    if a.verify {
        let opts = VerifyOptions { pair_cap: a.pair_cap, ..VerifyOptions::default() };
        let model = oracle::Model { label: &spec.id, spec, layout: &imp.layout };
        let r = oracle::verify_model(model, &opts)?;
        ok = r.passed();
        body = match ctx.format {
            OutFormat::Text => format!("{body}{r}\n"),
            _ => render_verify(ctx, &[r]),
        };
    } else if ctx.format == OutFormat::Json {
        body = json(&serde_json::json!({ "id": spec.id, "valid": true, "capacity": spec.capacity() }));
    }
    Ok(Outcome { ok, body })
}

fn run(cli: &Cli) -> Result<Outcome, CliError> {
    if let Some(j) = cli.jobs {
        if j == 0 {
            return Err(CliError::Usage("--jobs must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build_global()
            .map_err(|e| CliError::Internal(e.to_string()))?;
    }
    let ctx = Ctx { seed: cli.seed, format: cli.format, trace: cli.trace };
    match &cli.cmd {
        Cmd::Verify(a) => cmd_verify(&ctx, a),
        Cmd::Sweep(a) => cmd_sweep(&ctx, a),
        Cmd::Protocol(a) => cmd_protocol(&ctx, a),
        Cmd::Fooling(a) => cmd_fooling(&ctx, a),
        Cmd::Quantize(a) => cmd_quantize(&ctx, a),
        Cmd::ArithDemo => Ok(Outcome { ok: true, body: arith_demo() }),
        Cmd::Build(a) => cmd_build(&ctx, a),
        Cmd::ImportCheck(a) => cmd_import(&ctx, a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(out) => {
            let written = match &cli.out {
                Some(path) => std::fs::write(path, &out.body),
                None => std::io::stdout().write_all(out.body.as_bytes()),
            };
            if let Err(e) = written {
                eprintln!("error: {e}");
                return ExitCode::from(3);
            }
            ExitCode::from(if out.ok { 0 } else { 1 })
        }
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Internal(msg)) => {
            eprintln!("internal error: {msg}");
            ExitCode::from(3)
        }
    }
}
