//! Exact reference evaluation and exhaustive or sampled verification of constructions.

use std::fmt;
use std::time::Instant;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::attn::{forward, mlp_eval, output_bit, token_term, AttentionKind, AttnError, FoldState, Token, TokenTerm, TransformerSpec};
use crate::bitnum::{round_exact, BitnumError, ExactRat, Num};
use crate::constructs::{bits_str, build, int_bits, ConstructError, Construction, ConstructionId, EqInstance, Params, ReprLayout};
use crate::lintens::BMat;

/// Logits beyond this magnitude are treated as exact 0 or +inf weights by the exact evaluator.
pub const EXACT_LOGIT_CUTOFF: i64 = 1 << 16;

/// Default cap on the number of pairs an exhaustive run may evaluate.
pub const DEFAULT_PAIR_CAP: u64 = 100_000_000;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error("{pairs} pairs exceed the exhaustive budget of {cap}; use sampled mode")]
    BudgetExceeded { pairs: u64, cap: u64 },
    #[error(transparent)]
    Construct(#[from] ConstructError),
    #[error(transparent)]
    Attn(#[from] AttnError),
    #[error("exact evaluation: {0}")]
    Exact(#[from] BitnumError),
    #[error("division by exact zero")]
    DivByZero,
}

/// 1 iff the two strings are equal.
pub fn eq_truth(inst: &EqInstance) -> u8 {
    inst.eq_truth()
}

/// Every stage of a forward pass in exact rational arithmetic.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactTrace {
    pub logits: Vec<ExactRat>,
    /// `2^logit` for softmax, the logit itself for linear attention.
    pub weights: Vec<ExactRat>,
    /// `weight · value` per token and value coordinate.
    pub contributions: Vec<Vec<ExactRat>>,
    /// Numerator sums after each token.
    pub num_partials: Vec<Vec<ExactRat>>,
    pub numerator: Vec<ExactRat>,
    pub denominator: Option<ExactRat>,
    pub sa: Vec<ExactRat>,
    pub hidden: Vec<ExactRat>,
    pub outputs: Vec<ExactRat>,
    pub bit: Option<u8>,
}

fn exact_dot(a: &[Num], b: &[Num]) -> Result<ExactRat, BitnumError> {
    a.iter().zip(b).try_fold(ExactRat::zero(), |acc, (x, y)| acc.add(&ExactRat::from(x).mul(&ExactRat::from(y))?))
}

fn exact_dot_rat(a: &[ExactRat], b: &[Num]) -> Result<ExactRat, BitnumError> {
    a.iter().zip(b).try_fold(ExactRat::zero(), |acc, (x, y)| acc.add(&x.mul(&ExactRat::from(y))?))
}

fn exact_pow2(l: &ExactRat) -> Result<ExactRat, BitnumError> {
    let r = match l {
        ExactRat::NegInf => return Ok(ExactRat::zero()),
        ExactRat::PosInf => return Ok(ExactRat::PosInf),
        ExactRat::Fin(r) => r,
    };
    if !r.is_integer() {
        return Err(BitnumError::NonDyadicLogit(l.to_string()));
    }
    let k = r.to_integer().to_i64().unwrap_or(if r.numer() < &BigInt::from(0) { i64::MIN } else { i64::MAX });
    if k < -EXACT_LOGIT_CUTOFF {
        return Ok(ExactRat::zero());
    }
    if k > EXACT_LOGIT_CUTOFF {
        return Ok(ExactRat::PosInf);
    }
    let p = BigInt::one() << k.unsigned_abs() as usize;
    Ok(ExactRat::Fin(if k >= 0 { BigRational::from_integer(p) } else { BigRational::new(BigInt::one(), p) }))
}

/// The attention pipeline with no rounding at any stage. Weights and embeddings are taken
/// at their stored (already representable) values.
pub fn exact_forward(spec: &TransformerSpec, x: &BMat) -> Result<ExactTrace, OracleError> {
    let qrow = x.row(x.rows - 1);
    let q: Vec<ExactRat> = (0..spec.d_q()).map(|c| exact_dot(qrow, &spec.wq.col(c))).collect::<Result<_, _>>()?;
    let d_v = spec.d_v();
    let mut tr = ExactTrace {
        logits: vec![],
        weights: vec![],
        contributions: vec![],
        num_partials: vec![],
        numerator: vec![ExactRat::zero(); d_v],
        denominator: None,
        sa: vec![],
        hidden: vec![],
        outputs: vec![],
        bit: None,
    };
    let mut den = ExactRat::zero();
    for j in 0..x.rows {
        let row = x.row(j);
        let key: Vec<Num> = (0..spec.d_q())
            .map(|c| {
                let k = exact_dot(row, &spec.wk.col(c))?;
                k.to_num().ok_or(BitnumError::BadScalar(k.to_string()))
            })
            .collect::<Result<_, _>>()?;
        let logit = exact_dot_rat(&q, &key)?;
        let w = match spec.kind {
            AttentionKind::Softmax => exact_pow2(&logit)?,
            AttentionKind::Linear => logit.clone(),
        };
        let mut contrib = Vec::with_capacity(d_v);
        for (c, acc) in tr.numerator.iter_mut().enumerate() {
            let wv = w.mul(&exact_dot(row, &spec.wv.col(c))?)?;
            *acc = acc.add(&wv)?;
            contrib.push(wv);
        }
        tr.contributions.push(contrib);
        tr.num_partials.push(tr.numerator.clone());
        den = den.add(&w)?;
        tr.logits.push(logit);
        tr.weights.push(w);
    }
    tr.sa = match spec.kind {
        AttentionKind::Softmax => {
            if den.is_zero() {
                return Err(OracleError::DivByZero);
            }
            let sa = tr.numerator.iter().map(|n| n.div(&den)).collect::<Result<_, _>>()?;
            tr.denominator = Some(den);
            sa
        }
        AttentionKind::Linear => tr.numerator.clone(),
    };
    let mlp = &spec.mlp;
    tr.hidden = (0..mlp.d_ff())
        .map(|i| Ok(exact_dot_rat(&tr.sa, &mlp.w1.col(i))?.add(&ExactRat::from(&mlp.b1[i]))?.relu()))
        .collect::<Result<_, BitnumError>>()?;
    tr.outputs = (0..mlp.w2.cols)
        .map(|o| Ok(exact_dot_rat(&tr.hidden, &mlp.w2.col(o))?.add(&ExactRat::from(&mlp.b2[o]))?.relu()))
        .collect::<Result<_, BitnumError>>()?;
    tr.bit = tr.outputs.first().and_then(|o| match o.to_num() {
        Some(Num::Zero) => Some(0),
        Some(v) if v == Num::ONE => Some(1),
        _ => None,
    });
    Ok(tr)
}

/// Outcome of comparing a bounded forward pass with the exact one.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Consistency {
    /// Some step before the final normalisation rounded.
    Inexact,
    /// Every earlier step was exact and the attention output is the rounded exact output.
    Consistent,
    /// Every earlier step was exact but the attention output differs from the rounded exact one.
    Inconsistent,
}

/// Runs both evaluators on `x` and classifies the pair of traces.
pub fn check_consistency(spec: &TransformerSpec, x: &BMat) -> Result<Consistency, OracleError> {
    let b = forward(spec, x)?;
    let ex = exact_forward(spec, x)?;
    let same = |a: &Num, r: &ExactRat| ExactRat::from(a) == *r;
    let rows = |a: &[Vec<Num>], r: &[Vec<ExactRat>]| a.iter().zip(r).all(|(a, r)| a.iter().zip(r).all(|(a, r)| same(a, r)));
    let exact_steps = b.logits.iter().zip(&ex.logits).all(|(a, r)| same(a, r))
        && b.a_num.iter().zip(&ex.weights).all(|(a, r)| same(a, r))
        && rows(&b.contributions, &ex.contributions)
        && rows(&b.num_partials, &ex.num_partials)
        && match (spec.kind, &b.denominator, &ex.denominator) {
            (AttentionKind::Softmax, Some(bd), Some(ed)) => {
                same(bd, ed) && b.a_den.iter().zip(&ex.weights).all(|(a, r)| same(a, r))
            }
            (AttentionKind::Linear, _, _) => true,
            _ => false,
        };
    if !exact_steps {
        return Ok(Consistency::Inexact);
    }
    let want: Vec<Num> = ex.sa.iter().map(|s| round_exact(s, &spec.out_fmt)).collect();
    Ok(if want == b.sa { Consistency::Consistent } else { Consistency::Inconsistent })
}

/// Forward evaluator that reuses the y-prefix fold and the z-suffix token terms across pairs.
///
/// Terms that contribute exactly zero to every fold are dropped; adding an exact zero to a
/// representable accumulator is the identity in both formats.
pub struct Compiled<'a> {
    spec: &'a TransformerSpec,
    layout: &'a ReprLayout,
    q: Vec<Num>,
}

impl<'a> Compiled<'a> {
    pub fn new(spec: &'a TransformerSpec, layout: &'a ReprLayout) -> Result<Compiled<'a>, AttnError> {
        if layout.n_tokens() != spec.n_tokens {
            return Err(AttnError::Length { expected: spec.n_tokens, got: layout.n_tokens() });
        }
        let qi = spec.index_base + layout.n as i32;
        let q = spec.query(spec.row_of(qi, &Token::query())?)?;
        Ok(Compiled { spec, layout, q })
    }

    pub fn of(c: &'a Construction) -> Result<Compiled<'a>, AttnError> {
        Compiled::new(&c.spec, &c.layout)
    }

    fn terms(&self, tokens: &[Token], first: usize) -> Result<Vec<(usize, TokenTerm)>, AttnError> {
        let spec = self.spec;
        let mut out = vec![];
        for (k, tok) in tokens.iter().enumerate() {
            let j = first + k;
            let row = spec.row_of(spec.index_base + j as i32, tok)?;
            let term = token_term(spec, &self.q, row, j)?;
            if term.a_den.is_zero() && term.contrib.iter().all(Num::is_zero) {
                continue;
            }
            out.push((j, term));
        }
        Ok(out)
    }

    /// Fold state after Alice's tokens.
    pub fn prefix(&self, y: &[u8]) -> Result<FoldState, AttnError> {
        let spec = self.spec;
        let mut st = FoldState::new(spec.d_v());
        for (j, t) in self.terms(&self.layout.encode_y(y), 0)? {
            st.push(spec, &t, j)?;
        }
        Ok(st)
    }

    /// Nonzero terms of every token after Alice's prefix, the query included.
    pub fn suffix(&self, z: &[u8]) -> Result<Vec<(usize, TokenTerm)>, AttnError> {
        let mut toks = self.layout.encode_z(z);
        toks.push(Token::query());
        self.terms(&toks, self.layout.alice_len())
    }

    /// Completes the fold and applies the head; returns the attention output and MLP outputs.
    pub fn complete(&self, pre: &FoldState, suf: &[(usize, TokenTerm)]) -> Result<(Vec<Num>, Vec<Num>), AttnError> {
        let spec = self.spec;
        let mut st = pre.clone();
        for (j, t) in suf {
            st.push(spec, t, *j)?;
        }
        if !st.started {
            st.started = true;
        }
        let sa = st.finish(spec)?;
        let (_, out) = mlp_eval(&sa, &spec.mlp, &spec.out_fmt)?;
        Ok((sa, out))
    }

    pub fn eval(&self, y: &[u8], z: &[u8]) -> Result<(Vec<Num>, Vec<Num>), AttnError> {
        self.complete(&self.prefix(y)?, &self.suffix(z)?)
    }
}

/// One misclassified promise pair.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Failure {
    pub y: String,
    pub z: String,
    pub expected: u8,
    pub got: Option<u8>,
    /// Attention output and head output, or the evaluation error.
    pub digest: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum VerifyMode {
    Exhaustive,
    Sampled,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyReport {
    pub construction: String,
    pub mode: VerifyMode,
    pub m: usize,
    pub t: Option<u32>,
    pub e: Option<u32>,
    /// Precision the stages were evaluated at (p, or t + e).
    pub p: u32,
    pub total: u64,
    pub failure_count: u64,
    /// Pairs whose evaluation raised an error or produced an infinite attention output.
    pub inf_count: u64,
    /// Failures in canonical (y, z) order, truncated to the configured example count.
    pub failures: Vec<Failure>,
    /// True when evaluation stopped early after reaching the failure limit.
    pub stopped_early: bool,
    pub seconds: f64,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.failure_count == 0
    }

    pub const CSV_HEADER: &'static str = "construction,m,t,e,p,total,failures,seconds";

    /// One CSV row; `timing` false writes an empty seconds field for byte-stable output.
    pub fn csv_row(&self, timing: bool) -> String {
        let opt = |x: Option<u32>| x.map(|v| v.to_string()).unwrap_or_default();
        let secs = if timing { format!("{:.3}", self.seconds) } else { String::new() };
        format!(
            "{},{},{},{},{},{},{},{}",
            self.construction,
            self.m,
            opt(self.t),
            opt(self.e),
            self.p,
            self.total,
            self.failure_count,
            secs
        )
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} m={}", self.construction, self.m)?;
        if let (Some(t), Some(e)) = (self.t, self.e) {
            write!(f, " t={t} e={e}")?;
        }
        writeln!(
            f,
            " p={} mode={:?} total={} failures={}{}",
            self.p,
            self.mode,
            self.total,
            self.failure_count,
            if self.stopped_early { " (stopped early)" } else { "" }
        )?;
        for x in &self.failures {
            let got = x.got.map_or("none".to_string(), |b| b.to_string());
            writeln!(f, "  y={} z={} expected={} got={} {}", x.y, x.z, x.expected, got, x.digest)?;
        }
        write!(f, "{}", if self.passed() { "PASS" } else { "FAIL" })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct VerifyOptions {
    pub pair_cap: u64,
    /// Stop once this many failures are found (counts then are lower bounds).
    pub stop_after: Option<u64>,
    /// Number of failure examples kept in the report.
    pub max_examples: usize,
}

impl Default for VerifyOptions {
    fn default() -> VerifyOptions {
        VerifyOptions { pair_cap: DEFAULT_PAIR_CAP, stop_after: None, max_examples: 16 }
    }
}

fn digest(r: &Result<(Vec<Num>, Vec<Num>), AttnError>) -> String {
    match r {
        Ok((sa, out)) => {
            let j = |v: &[Num]| v.iter().map(Num::to_string).collect::<Vec<_>>().join(" ");
            format!("sa=[{}] out=[{}]", j(sa), j(out))
        }
        Err(e) => format!("error: {e}"),
    }
}

struct Judged {
    failure: Option<Failure>,
    inf: bool,
}

fn judge(res: Result<(Vec<Num>, Vec<Num>), AttnError>, y: &[u8], z: &[u8]) -> Judged {
    let expected = u8::from(y == z);
    let inf = match &res {
        Ok((sa, _)) => sa.iter().any(Num::is_inf),
        Err(_) => true,
    };
    let got = res.as_ref().ok().and_then(|(_, out)| output_bit(out));
    let failure =
        (got != Some(expected)).then(|| Failure { y: bits_str(y), z: bits_str(z), expected, got, digest: digest(&res) });
    Judged { failure, inf }
}

/// A transformer together with the representation that feeds it.
#[derive(Clone, Copy, Debug)]
pub struct Model<'a> {
    pub label: &'a str,
    pub spec: &'a TransformerSpec,
    pub layout: &'a ReprLayout,
}

impl<'a> From<&'a Construction> for Model<'a> {
    fn from(c: &'a Construction) -> Model<'a> {
        Model { label: c.id.as_str(), spec: &c.spec, layout: &c.layout }
    }
}

/// Number of promise pairs an exhaustive run visits.
pub fn count_pairs(layout: &ReprLayout) -> u64 {
    let m = layout.m;
    let pr = &layout.promises;
    if m % 2 == 0 && pr.flags.contains(&crate::constructs::Promise::MOdd) {
        return 0;
    }
    let zs: Vec<bool> = (0..1u64 << m).map(|v| pr.z_ok(&int_bits(m, v))).collect();
    // suffix[v] = number of valid z >= v
    let mut suffix = vec![0u64; zs.len() + 1];
    for v in (0..zs.len()).rev() {
        suffix[v] = suffix[v + 1] + u64::from(zs[v]);
    }
    (0..1u64 << m).filter(|&v| pr.y_ok(&int_bits(m, v))).map(|v| suffix[v as usize]).sum()
}

/// A (y, z) string pair.
pub type Pair = (Vec<u8>, Vec<u8>);

/// Every promise pair in canonical (y, z) order; fails above `cap` pairs.
pub fn promise_pairs(layout: &ReprLayout, cap: u64) -> Result<Vec<Pair>, OracleError> {
    let pairs = count_pairs(layout);
    if pairs > cap {
        return Err(OracleError::BudgetExceeded { pairs, cap });
    }
    if pairs == 0 {
        return Ok(vec![]);
    }
    let m = layout.m;
    let pr = &layout.promises;
    let zs: Vec<Vec<u8>> = (0..1u64 << m).map(|v| int_bits(m, v)).filter(|z| pr.z_ok(z)).collect();
    let mut out = Vec::with_capacity(pairs as usize);
    for yv in 0..1u64 << m {
        let y = int_bits(m, yv);
        if !pr.y_ok(&y) {
            continue;
        }
        out.extend(zs.iter().filter(|z| **z >= y).map(|z| (y.clone(), z.clone())));
    }
    Ok(out)
}

#[derive(Default)]
struct Partial {
    total: u64,
    count: u64,
    inf: u64,
    examples: Vec<Failure>,
}

impl Partial {
    fn add(&mut self, j: Judged, keep: usize) {
        self.total += 1;
        self.inf += u64::from(j.inf);
        if let Some(f) = j.failure {
            self.count += 1;
            if self.examples.len() < keep {
                self.examples.push(f);
            }
        }
    }

    fn merge(mut self, o: Partial, keep: usize) -> Partial {
        self.total += o.total;
        self.count += o.count;
        self.inf += o.inf;
        self.examples.extend(o.examples);
        self.examples.sort_by(|a, b| (&a.y, &a.z).cmp(&(&b.y, &b.z)));
        self.examples.truncate(keep);
        self
    }
}

fn report(model: &Model, mode: VerifyMode, part: Partial, stopped: bool, start: Instant) -> VerifyReport {
    let spec = model.spec;
    VerifyReport {
        construction: model.label.to_string(),
        mode,
        m: model.layout.m,
        t: spec.t,
        e: spec.e,
        p: spec.num_fmt.precision_bits(),
        total: part.total,
        failure_count: part.count,
        inf_count: part.inf,
        failures: part.examples,
        stopped_early: stopped,
        seconds: start.elapsed().as_secs_f64(),
    }
}

/// y values per scheduling chunk; early stopping is checked between chunks only, so
/// truncated runs are still deterministic.
const Y_CHUNK: usize = 256;

/// Evaluates every promise-satisfying pair.
pub fn verify_model(model: Model, opts: &VerifyOptions) -> Result<VerifyReport, OracleError> {
    let start = Instant::now();
    let layout = model.layout;
    let pairs = count_pairs(layout);
    if pairs > opts.pair_cap {
        return Err(OracleError::BudgetExceeded { pairs, cap: opts.pair_cap });
    }
    let m = layout.m;
    let pr = &layout.promises;
    let comp = Compiled::new(model.spec, layout)?;
    if pairs == 0 {
        return Ok(report(&model, VerifyMode::Exhaustive, Partial::default(), false, start));
    }
    let zs: Vec<(u64, Vec<u8>)> = (0..1u64 << m).map(|v| (v, int_bits(m, v))).filter(|(_, z)| pr.z_ok(z)).collect();
    let suffixes: Vec<_> = zs.par_iter().map(|(_, z)| comp.suffix(z)).collect();
    let ys: Vec<u64> = (0..1u64 << m).filter(|&v| pr.y_ok(&int_bits(m, v))).collect();
    let keep = opts.max_examples;
    let stop = opts.stop_after.unwrap_or(u64::MAX);
    let mut acc = Partial::default();
    let mut stopped = false;
    for (ci, chunk) in ys.chunks(Y_CHUNK).enumerate() {
        if acc.count >= stop {
            stopped = ci * Y_CHUNK < ys.len();
            break;
        }
        let part = chunk
            .par_iter()
            .map(|&yv| {
                let mut part = Partial::default();
                let y = int_bits(m, yv);
                let pre = comp.prefix(&y);
                let first = zs.partition_point(|(zv, _)| *zv < yv);
                for ((_, z), suf) in zs[first..].iter().zip(&suffixes[first..]) {
                    let res = match (&pre, suf) {
                        (Ok(p), Ok(s)) => comp.complete(p, s),
                        (Err(e), _) | (_, Err(e)) => Err(e.clone()),
                    };
                    part.add(judge(res, &y, z), keep);
                }
                part
            })
            .reduce(Partial::default, |a, b| a.merge(b, keep));
        acc = acc.merge(part, keep);
    }
    Ok(report(&model, VerifyMode::Exhaustive, acc, stopped, start))
}

/// Evaluates every promise-satisfying pair of a built construction.
pub fn verify_construction(c: &Construction, opts: &VerifyOptions) -> Result<VerifyReport, OracleError> {
    verify_model(Model::from(c), opts)
}

/// Builds a construction and verifies it exhaustively.
pub fn verify_exhaustive(id: ConstructionId, params: &Params, opts: &VerifyOptions) -> Result<VerifyReport, OracleError> {
    let c = build(id, params)?;
    verify_construction(&c, opts)
}

fn random_bits(rng: &mut ChaCha8Rng, m: usize) -> Vec<u8> {
    (0..m).map(|_| rng.gen_range(0..2u8)).collect()
}

/// Seeded sample of promise pairs: `samples` uniform draws (by rejection) followed by every
/// single-bit-flip neighbour of 64 random valid y, and each of those y paired with itself.
pub fn sample_pairs(layout: &ReprLayout, samples: usize, seed: u64) -> Vec<(Vec<u8>, Vec<u8>)> {
    let m = layout.m;
    let pr = &layout.promises;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(samples + 64 * (m + 1));
    if samples == 0 {
        return out;
    }
    let ok = |y: &[u8], z: &[u8]| pr.violations(&EqInstance { y: y.to_vec(), z: z.to_vec() }).is_empty();
    let budget = 1000 * samples as u64 + 100_000;
    let mut tries = 0u64;
    while out.len() < samples && tries < budget {
        tries += 1;
        let (y, z) = (random_bits(&mut rng, m), random_bits(&mut rng, m));
        if ok(&y, &z) {
            out.push((y, z));
        }
    }
    let mut picked = 0;
    while picked < 64 && tries < budget {
        tries += 1;
        let y = random_bits(&mut rng, m);
        if !ok(&y, &y) {
            continue;
        }
        picked += 1;
        out.push((y.clone(), y.clone()));
        for i in 0..m {
            let mut z = y.clone();
            z[i] ^= 1;
            let (a, b) = if y <= z { (y.clone(), z) } else { (z, y.clone()) };
            if ok(&a, &b) {
                out.push((a, b));
            }
        }
    }
    out
}

/// Evaluates an explicit list of pairs.
pub fn verify_pairs(model: Model, pairs: &[(Vec<u8>, Vec<u8>)], mode: VerifyMode, opts: &VerifyOptions) -> Result<VerifyReport, OracleError> {
    let start = Instant::now();
    let comp = Compiled::new(model.spec, model.layout)?;
    let keep = opts.max_examples;
    let part = pairs
        .par_iter()
        .map(|(y, z)| {
            let mut p = Partial::default();
            p.add(judge(comp.eval(y, z), y, z), keep);
            p
        })
        .reduce(Partial::default, |a, b| a.merge(b, keep));
    Ok(report(&model, mode, part, false, start))
}

/// Verifies a construction on a seeded sample plus the single-flip adversarial set.
pub fn verify_sampled_construction(c: &Construction, samples: usize, seed: u64, opts: &VerifyOptions) -> Result<VerifyReport, OracleError> {
    verify_pairs(Model::from(c), &sample_pairs(&c.layout, samples, seed), VerifyMode::Sampled, opts)
}

pub fn verify_sampled(id: ConstructionId, params: &Params, samples: usize, seed: u64, opts: &VerifyOptions) -> Result<VerifyReport, OracleError> {
    let c = build(id, params)?;
    verify_sampled_construction(&c, samples, seed, opts)
}
