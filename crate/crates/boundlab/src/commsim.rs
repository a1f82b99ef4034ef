//! One-way protocols compiled from a transformer, and fooling-set counting.

use std::collections::HashMap;
use std::fmt;

use serde::Serialize;

use rayon::prelude::*;

use crate::attn::{forward_tokens, mlp_eval, output_bit, AttentionKind, AttnError, FoldState, TransformerSpec};
use crate::bitnum::Num;
use crate::constructs::{bits_str, int_bits, Construction, EqInstance};
use crate::oracle::{self, Compiled};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CommError {
    #[error("Alice's token set must be a contiguous prefix 0..k of the sequence")]
    SplitNotPrefix,
    #[error("construction uses {actual} attention, protocol requested {requested}")]
    KindMismatch { requested: &'static str, actual: &'static str },
    #[error("{0} exceeds the enumeration budget")]
    BudgetExceeded(String),
    #[error("invalid parameters: {0}")]
    BadParams(String),
    #[error(transparent)]
    Attn(#[from] AttnError),
}

/// Transcript of the one-way protocol on one instance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProtocolRun {
    /// Sequence positions (0-based offsets, not embedding indices) held by Alice.
    pub split: Vec<usize>,
    /// Alice's denominator fold (softmax only).
    pub l1: Option<Num>,
    /// Alice's numerator fold, one scalar per value coordinate.
    pub l2: Vec<Num>,
    pub bit_cost: u32,
    pub bob_output: Option<u8>,
    pub sa: Vec<Num>,
}

impl fmt::Display for ProtocolRun {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let l2: Vec<String> = self.l2.iter().map(Num::to_string).collect();
        write!(f, "alice tokens 0..{}", self.split.len())?;
        if let Some(l1) = &self.l1 {
            write!(f, " L1={l1}")?;
        }
        write!(f, " L2=[{}] cost={} bits output=", l2.join(" "), self.bit_cost)?;
        match self.bob_output {
            Some(b) => write!(f, "{b}"),
            None => f.write_str("none"),
        }
    }
}

/// Runs the protocol with Alice holding the layout's y-prefix.
pub fn run_protocol(c: &Construction, inst: &EqInstance, kind: AttentionKind) -> Result<ProtocolRun, CommError> {
    let split: Vec<usize> = (0..c.layout.alice_len()).collect();
    run_protocol_split(c, inst, kind, &split)
}

/// Runs the protocol for an explicit Alice token set, which must be the prefix the y-part occupies.
pub fn run_protocol_split(
    c: &Construction,
    inst: &EqInstance,
    kind: AttentionKind,
    split: &[usize],
) -> Result<ProtocolRun, CommError> {
    let spec = &c.spec;
    if spec.kind != kind {
        return Err(CommError::KindMismatch { requested: kind.as_str(), actual: spec.kind.as_str() });
    }
    if split.len() != c.layout.alice_len() || split.iter().enumerate().any(|(i, &s)| i != s) {
        return Err(CommError::SplitNotPrefix);
    }
    let comp = Compiled::of(c)?;
    protocol_with(&comp, spec, inst, split)
}

fn protocol_with(comp: &Compiled, spec: &TransformerSpec, inst: &EqInstance, split: &[usize]) -> Result<ProtocolRun, CommError> {
    // Alice: left folds over her tokens.
    let alice: FoldState = comp.prefix(&inst.y)?;
    let p = spec.num_fmt.precision_bits();
    let (l1, bit_cost) = match spec.kind {
        AttentionKind::Softmax => (Some(alice.den), p * (spec.d_v() as u32 + 1)),
        AttentionKind::Linear => (None, p * spec.d_v() as u32),
    };
    let l2 = alice.num.clone();
    // Bob: rebuilds the fold state from the messages alone and continues over his tokens.
    let received = FoldState { num: l2.clone(), den: l1.unwrap_or(Num::Zero), started: alice.started };
    let suffix = comp.suffix(&inst.z)?;
    let mut st = received;
    for (j, t) in &suffix {
        st.push(spec, t, *j)?;
    }
    let sa = st.finish(spec)?;
    let (_, out) = mlp_eval(&sa, &spec.mlp, &spec.out_fmt)?;
    Ok(ProtocolRun { split: split.to_vec(), l1, l2, bit_cost, bob_output: output_bit(&out), sa })
}

/// Agreement between the protocol and the direct forward pass over every promise pair.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ProtocolCheck {
    pub construction: String,
    pub m: usize,
    pub pairs: u64,
    /// Pairs where Bob's bit and attention output both equal the forward pass.
    pub agree: u64,
    /// Pairs where Bob's bit equals EQ(y, z).
    pub correct: u64,
    pub bit_cost: u32,
    /// First disagreeing pair, if any.
    pub mismatch: Option<(String, String)>,
}

impl ProtocolCheck {
    pub fn passed(&self) -> bool {
        self.agree == self.pairs
    }
}

impl fmt::Display for ProtocolCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} m={} pairs={} agree={} correct={} cost={} bits",
            self.construction, self.m, self.pairs, self.agree, self.correct, self.bit_cost
        )?;
        if let Some((y, z)) = &self.mismatch {
            write!(f, " first mismatch y={y} z={z}")?;
        }
        Ok(())
    }
}

/// Runs the protocol on every promise pair and compares it with the uncompiled forward pass.
pub fn check_protocol(c: &Construction, cap: u64) -> Result<ProtocolCheck, CommError> {
    let spec = &c.spec;
    let pairs = oracle::promise_pairs(&c.layout, cap).map_err(|e| CommError::BudgetExceeded(e.to_string()))?;
    let comp = Compiled::of(c)?;
    let split: Vec<usize> = (0..c.layout.alice_len()).collect();
    let results: Vec<(bool, bool, u32)> = pairs
        .par_iter()
        .map(|(y, z)| {
            let inst = EqInstance { y: y.clone(), z: z.clone() };
            let run = protocol_with(&comp, spec, &inst, &split);
            let direct = forward_tokens(spec, &c.layout.encode_unchecked(&inst));
            let expected = u8::from(y == z);
            match (run, direct) {
                (Ok(r), Ok(d)) => (r.bob_output == d.bit && r.sa == d.sa, r.bob_output == Some(expected), r.bit_cost),
                (Err(_), Err(_)) => (true, false, 0),
                _ => (false, false, 0),
            }
        })
        .collect();
    let mismatch = results.iter().position(|r| !r.0).map(|i| (bits_str(&pairs[i].0), bits_str(&pairs[i].1)));
    let p = spec.num_fmt.precision_bits();
    let bit_cost = match spec.kind {
        AttentionKind::Softmax => p * (spec.d_v() as u32 + 1),
        AttentionKind::Linear => p * spec.d_v() as u32,
    };
    Ok(ProtocolCheck {
        construction: c.id.to_string(),
        m: c.m(),
        pairs: pairs.len() as u64,
        agree: results.iter().filter(|r| r.0).count() as u64,
        correct: results.iter().filter(|r| r.1).count() as u64,
        bit_cost,
        mismatch,
    })
}

/// Size of the fooling set used for the floating-point lower bound, counted and compared.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FoolingReport {
    pub m: usize,
    pub e: usize,
    pub enumerated: u64,
    /// `3 · 2^{m−2} · (1 − 2^{−e})`, exact.
    pub formula: f64,
    /// `⌈log₂ enumerated⌉`.
    pub bound: u32,
}

impl FoolingReport {
    pub fn formula_matches(&self) -> bool {
        self.formula.fract() == 0.0 && self.enumerated as f64 == self.formula
    }
}

impl fmt::Display for FoolingReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "m={} e={} size={} formula={} bound={}", self.m, self.e, self.enumerated, self.formula, self.bound)
    }
}

/// Membership in the fooling set: the first `e` bits are not all zero and the last two
/// bits are not `10`.
pub fn in_fooling_set(x: &[u8], e: usize) -> bool {
    let m = x.len();
    x[..e].contains(&1) && !(x[m - 2] == 1 && x[m - 1] == 0)
}

/// Counts the diagonal fooling set `{(x, x)}` for strings of length `m`.
pub fn enumerate_fooling(m: usize, e: usize) -> Result<FoolingReport, CommError> {
    if m > 24 {
        return Err(CommError::BudgetExceeded(format!("m={m} (limit 24)")));
    }
    if e <= 1 || e >= m {
        return Err(CommError::BadParams(format!("need 1 < e < m, got m={m}, e={e}")));
    }
    let enumerated = (0..1u64 << m).filter(|&v| in_fooling_set(&int_bits(m, v), e)).count() as u64;
    let formula = 3.0 * 2f64.powi(m as i32 - 2) * (1.0 - 2f64.powi(-(e as i32)));
    let bound = if enumerated <= 1 { 0 } else { 64 - (enumerated - 1).leading_zeros() };
    Ok(FoolingReport { m, e, enumerated, formula, bound })
}

/// Two inputs Alice cannot tell apart through the message, and a z on which the answers differ.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PigeonholeWitness {
    pub y: String,
    pub y_prime: String,
    pub z: String,
    pub message: String,
}

impl fmt::Display for PigeonholeWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "y={} y'={} share message {:?}; z={} separates them", self.y, self.y_prime, self.message, self.z)
    }
}

/// Scans y in lexicographic order and returns the first pair with equal transcripts.
/// `message` maps y to Alice's message bits.
pub fn verify_pigeonhole<F>(m: usize, message: F) -> Result<Option<PigeonholeWitness>, CommError>
where
    F: Fn(&[u8]) -> Vec<u8>,
{
    if m > 20 {
        return Err(CommError::BudgetExceeded(format!("m={m} (limit 20)")));
    }
    let mut seen: HashMap<Vec<u8>, Vec<u8>> = HashMap::new();
    for v in 0..1u64 << m {
        let y = int_bits(m, v);
        let msg = message(&y);
        if let Some(prev) = seen.get(&msg) {
            return Ok(Some(PigeonholeWitness {
                y: bits_str(prev),
                y_prime: bits_str(&y),
                z: bits_str(&y),
                message: bits_str(&msg),
            }));
        }
        seen.insert(msg, y);
    }
    Ok(None)
}

/// The default message: the first `m − 1` bits of y.
pub fn truncate_message(y: &[u8]) -> Vec<u8> {
    y[..y.len().saturating_sub(1)].to_vec()
}
