//! One-layer softmax and linear self-attention with a ReLU MLP head, evaluated entirely
//! in bounded precision.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::bitnum::{self, exp_logit, BitnumError, Format, Logit, Num};
use crate::lintens::BMat;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AttentionKind {
    Softmax,
    Linear,
}

impl AttentionKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            AttentionKind::Softmax => "softmax",
            AttentionKind::Linear => "linear",
        }
    }
}

/// How the weighted value `A_j · X_j W^V` of one token is formed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NumeratorOrder {
    /// Scale every coordinate of `X_j` by `A_j`, then take the left dot product with `W^V`.
    #[default]
    TokenThenValue,
    /// Compute `V_j = X_j W^V` first, then multiply by `A_j`.
    ValueFirst,
}

/// A token value; tuple tokens join their parts with `|`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Token(pub String);

impl Token {
    pub const QUERY: &'static str = "?";

    pub fn bit(b: u8) -> Token {
        Token(if b == 0 { "0" } else { "1" }.to_string())
    }

    pub fn query() -> Token {
        Token(Token::QUERY.to_string())
    }

    pub fn tuple(parts: &[String]) -> Token {
        Token(parts.join("|"))
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MlpSpec {
    /// `d_v × d_ff`.
    pub w1: BMat,
    pub b1: Vec<Num>,
    /// `d_ff × d_out`.
    pub w2: BMat,
    pub b2: Vec<Num>,
}

impl MlpSpec {
    /// Single-input, single-output MLP from hidden weights, hidden biases, output weights and bias.
    pub fn scalar(w1: Vec<Num>, b1: Vec<Num>, w2: Vec<Num>, b2: Num, fmt: Format) -> MlpSpec {
        let d_ff = w1.len();
        MlpSpec {
            w1: BMat::new(1, d_ff, w1, fmt).expect("w1 shape"),
            b1: b1.iter().map(|x| fmt.round_num(x)).collect(),
            w2: BMat::column(w2, fmt),
            b2: vec![fmt.round_num(&b2)],
        }
    }

    pub fn d_ff(&self) -> usize {
        self.w1.cols
    }
}

/// Embedding table keyed by (position, token value); positions start at `index_base`.
pub type Embedding = BTreeMap<(i32, Token), Vec<Num>>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransformerSpec {
    pub id: String,
    pub kind: AttentionKind,
    pub m: usize,
    pub t: Option<u32>,
    pub e: Option<u32>,
    pub index_base: i32,
    /// Number of token positions including the trailing query position.
    pub n_tokens: usize,
    pub d: usize,
    pub embed: Embedding,
    /// `d × d_q`; logits are coefficients of `ln 2`.
    pub wq: BMat,
    pub wk: BMat,
    /// `d × d_v`.
    pub wv: BMat,
    pub mlp: MlpSpec,
    pub num_fmt: Format,
    pub den_fmt: Format,
    pub out_fmt: Format,
    pub numerator_order: NumeratorOrder,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AttnError {
    #[error("{stage} (token {token:?}): {source}")]
    Scalar {
        stage: Stage,
        token: Option<usize>,
        #[source]
        source: BitnumError,
    },
    #[error("no embedding for token {token:?} at position {index}")]
    UnknownToken { index: i32, token: String },
    #[error("expected {expected} tokens, got {got}")]
    Length { expected: usize, got: usize },
    #[error("invalid spec: {0}")]
    InvalidSpec(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stage {
    Query,
    Key,
    Logit,
    Exp,
    Value,
    Numerator,
    Denominator,
    Output,
    Mlp,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Stage::Query => "query",
            Stage::Key => "key",
            Stage::Logit => "logit",
            Stage::Exp => "exp",
            Stage::Value => "value",
            Stage::Numerator => "numerator",
            Stage::Denominator => "denominator",
            Stage::Output => "attention output",
            Stage::Mlp => "mlp",
        };
        f.write_str(s)
    }
}

fn at(stage: Stage, token: Option<usize>) -> impl Fn(BitnumError) -> AttnError {
    move |source| AttnError::Scalar { stage, token, source }
}

impl TransformerSpec {
    pub fn d_q(&self) -> usize {
        self.wq.cols
    }

    pub fn d_v(&self) -> usize {
        self.wv.cols
    }

    pub fn validate(&self) -> Result<(), AttnError> {
        let bad = |s: String| Err(AttnError::InvalidSpec(s));
        if self.wq.rows != self.d || self.wk.rows != self.d || self.wv.rows != self.d {
            return bad("weight matrices must have d rows".into());
        }
        if self.wq.cols != self.wk.cols {
            return bad("wq and wk must have equal column counts".into());
        }
        if self.mlp.w1.rows != self.d_v() || self.mlp.b1.len() != self.mlp.d_ff() {
            return bad("mlp w1/b1 shape does not match d_v".into());
        }
        if self.mlp.w2.rows != self.mlp.d_ff() || self.mlp.b2.len() != self.mlp.w2.cols || self.mlp.w2.cols == 0 {
            return bad("mlp w2/b2 shape mismatch".into());
        }
        if let Some(((i, t), _)) = self.embed.iter().find(|(_, v)| v.len() != self.d) {
            return bad(format!("embedding ({i}, {t}) has wrong length"));
        }
        for f in [&self.num_fmt, &self.den_fmt, &self.out_fmt] {
            f.validate().map_err(|e| AttnError::InvalidSpec(e.to_string()))?;
        }
        Ok(())
    }

    /// Looks up the embedding rows of a token sequence.
    pub fn embed_tokens(&self, tokens: &[Token]) -> Result<BMat, AttnError> {
        if tokens.len() != self.n_tokens {
            return Err(AttnError::Length { expected: self.n_tokens, got: tokens.len() });
        }
        let mut entries = Vec::with_capacity(tokens.len() * self.d);
        for (k, tok) in tokens.iter().enumerate() {
            let index = self.index_base + k as i32;
            entries.extend_from_slice(self.row_of(index, tok)?);
        }
        Ok(BMat { rows: tokens.len(), cols: self.d, entries, fmt: self.num_fmt })
    }

    pub fn row_of(&self, index: i32, tok: &Token) -> Result<&[Num], AttnError> {
        self.embed
            .get(&(index, tok.clone()))
            .map(Vec::as_slice)
            .ok_or_else(|| AttnError::UnknownToken { index, token: tok.0.clone() })
    }

    /// Capacity product `H·(d_v + 1)·p` with `H = 1`.
    pub fn capacity(&self) -> u64 {
        (self.d_v() as u64 + 1) * self.num_fmt.precision_bits() as u64
    }

    /// `Q = X_query · W^Q` for one query row.
    pub fn query(&self, row: &[Num]) -> Result<Vec<Num>, AttnError> {
        (0..self.d_q())
            .map(|c| bitnum::dot_left(row, &self.wq.col(c), &self.num_fmt).map_err(at(Stage::Query, None)))
            .collect()
    }
}

/// Everything one token contributes to the attention sums.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TokenTerm {
    pub logit: Num,
    /// Exponentiated logit in the numerator format (softmax) or the raw coefficient (linear).
    pub a_num: Num,
    /// Exponentiated logit in the denominator format; zero for linear attention.
    pub a_den: Num,
    /// Weighted value per output coordinate.
    pub contrib: Vec<Num>,
}

/// Computes the term of token `j` with embedding `row` against query vector `q`.
pub fn token_term(spec: &TransformerSpec, q: &[Num], row: &[Num], j: usize) -> Result<TokenTerm, AttnError> {
    let f = &spec.num_fmt;
    let tok = Some(j);
    let key: Vec<Num> = (0..spec.d_q())
        .map(|c| bitnum::dot_left(row, &spec.wk.col(c), f).map_err(at(Stage::Key, tok)))
        .collect::<Result<_, _>>()?;
    let logit = bitnum::dot_left(q, &key, f).map_err(at(Stage::Logit, tok))?;
    let (a_num, a_den) = match spec.kind {
        AttentionKind::Softmax => (
            exp_logit(&Logit::Value(logit), f).map_err(at(Stage::Exp, tok))?,
            exp_logit(&Logit::Value(logit), &spec.den_fmt).map_err(at(Stage::Exp, tok))?,
        ),
        AttentionKind::Linear => (logit, Num::Zero),
    };
    let contrib = match spec.numerator_order {
        NumeratorOrder::TokenThenValue => {
            let scaled: Vec<Num> =
                row.iter().map(|x| bitnum::mul(&a_num, x, f)).collect::<Result<_, _>>().map_err(at(Stage::Value, tok))?;
            (0..spec.d_v())
                .map(|c| bitnum::dot_left(&scaled, &spec.wv.col(c), f).map_err(at(Stage::Value, tok)))
                .collect::<Result<_, _>>()?
        }
        NumeratorOrder::ValueFirst => (0..spec.d_v())
            .map(|c| {
                let v = bitnum::dot_left(row, &spec.wv.col(c), f)?;
                bitnum::mul(&a_num, &v, f)
            })
            .collect::<Result<_, _>>()
            .map_err(at(Stage::Value, tok))?,
    };
    Ok(TokenTerm { logit, a_num, a_den, contrib })
}

/// Running left folds of the numerator (per value coordinate) and denominator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FoldState {
    pub num: Vec<Num>,
    pub den: Num,
    pub started: bool,
}

impl FoldState {
    pub fn new(d_v: usize) -> FoldState {
        FoldState { num: vec![Num::Zero; d_v], den: Num::Zero, started: false }
    }

    pub fn push(&mut self, spec: &TransformerSpec, term: &TokenTerm, j: usize) -> Result<(), AttnError> {
        if !self.started {
            self.num.clone_from(&term.contrib);
            self.den = term.a_den;
            self.started = true;
            return Ok(());
        }
        for (acc, c) in self.num.iter_mut().zip(&term.contrib) {
            *acc = bitnum::add(acc, c, &spec.num_fmt).map_err(at(Stage::Numerator, Some(j)))?;
        }
        if spec.kind == AttentionKind::Softmax {
            self.den = bitnum::add(&self.den, &term.a_den, &spec.den_fmt).map_err(at(Stage::Denominator, Some(j)))?;
        }
        Ok(())
    }

    /// Attention output from the completed folds.
    pub fn finish(&self, spec: &TransformerSpec) -> Result<Vec<Num>, AttnError> {
        let f = &spec.out_fmt;
        self.num
            .iter()
            .map(|n| match spec.kind {
                AttentionKind::Softmax => bitnum::div(n, &self.den, f),
                AttentionKind::Linear => Ok(f.round_num(n)),
            })
            .collect::<Result<_, _>>()
            .map_err(at(Stage::Output, None))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EvalTrace {
    pub x: BMat,
    pub query_index: usize,
    pub q: Vec<Num>,
    pub logits: Vec<Num>,
    pub a_num: Vec<Num>,
    pub a_den: Vec<Num>,
    pub contributions: Vec<Vec<Num>>,
    /// Numerator fold after each token.
    pub num_partials: Vec<Vec<Num>>,
    pub numerator: Vec<Num>,
    pub denominator: Option<Num>,
    pub sa: Vec<Num>,
    pub hidden: Vec<Num>,
    pub outputs: Vec<Num>,
    pub bit: Option<u8>,
}

/// Hidden and output layers of the MLP head, evaluated in `fmt`.
pub fn mlp_eval(v: &[Num], mlp: &MlpSpec, fmt: &Format) -> Result<(Vec<Num>, Vec<Num>), AttnError> {
    let err = at(Stage::Mlp, None);
    let hidden: Vec<Num> = (0..mlp.d_ff())
        .map(|i| {
            let s = bitnum::dot_left(v, &mlp.w1.col(i), fmt)?;
            Ok(bitnum::relu(&bitnum::add(&s, &mlp.b1[i], fmt)?))
        })
        .collect::<Result<_, BitnumError>>()
        .map_err(&err)?;
    let outputs = (0..mlp.w2.cols)
        .map(|o| {
            let s = bitnum::dot_left(&hidden, &mlp.w2.col(o), fmt)?;
            Ok(bitnum::relu(&bitnum::add(&s, &mlp.b2[o], fmt)?))
        })
        .collect::<Result<_, BitnumError>>()
        .map_err(&err)?;
    Ok((hidden, outputs))
}

/// Reads the answer bit from the first MLP output: exactly 1 or exactly 0, else undecided.
pub fn output_bit(outputs: &[Num]) -> Option<u8> {
    match outputs.first()? {
        Num::Zero => Some(0),
        x if *x == Num::ONE => Some(1),
        _ => None,
    }
}

fn forward_at(spec: &TransformerSpec, x: &BMat, query_index: usize) -> Result<EvalTrace, AttnError> {
    if x.cols != spec.d {
        return Err(AttnError::InvalidSpec(format!("token matrix has {} columns, spec d = {}", x.cols, spec.d)));
    }
    let q = spec.query(x.row(query_index))?;
    let mut st = FoldState::new(spec.d_v());
    let n = x.rows;
    let mut tr = EvalTrace {
        x: x.clone(),
        query_index,
        q: q.clone(),
        logits: Vec::with_capacity(n),
        a_num: Vec::with_capacity(n),
        a_den: Vec::with_capacity(n),
        contributions: Vec::with_capacity(n),
        num_partials: Vec::with_capacity(n),
        numerator: vec![],
        denominator: None,
        sa: vec![],
        hidden: vec![],
        outputs: vec![],
        bit: None,
    };
    for j in 0..n {
        let term = token_term(spec, &q, x.row(j), j)?;
        st.push(spec, &term, j)?;
        tr.logits.push(term.logit);
        tr.a_num.push(term.a_num);
        tr.a_den.push(term.a_den);
        tr.contributions.push(term.contrib);
        tr.num_partials.push(st.num.clone());
    }
    tr.numerator = st.num.clone();
    if spec.kind == AttentionKind::Softmax {
        tr.denominator = Some(st.den);
    }
    tr.sa = st.finish(spec)?;
    let (hidden, outputs) = mlp_eval(&tr.sa, &spec.mlp, &spec.out_fmt)?;
    tr.bit = output_bit(&outputs);
    tr.hidden = hidden;
    tr.outputs = outputs;
    Ok(tr)
}

fn check_kind(spec: &TransformerSpec, kind: AttentionKind) -> Result<(), AttnError> {
    if spec.kind != kind {
        return Err(AttnError::InvalidSpec(format!("spec is {}, not {}", spec.kind.as_str(), kind.as_str())));
    }
    Ok(())
}

/// Softmax attention output at the last (query) token, then the MLP head.
pub fn forward_softmax(spec: &TransformerSpec, x: &BMat) -> Result<EvalTrace, AttnError> {
    check_kind(spec, AttentionKind::Softmax)?;
    forward_at(spec, x, x.rows - 1)
}

/// Linear attention output at the last (query) token, then the MLP head.
pub fn forward_linear(spec: &TransformerSpec, x: &BMat) -> Result<EvalTrace, AttnError> {
    check_kind(spec, AttentionKind::Linear)?;
    forward_at(spec, x, x.rows - 1)
}

/// Dispatches on the spec's attention kind.
pub fn forward(spec: &TransformerSpec, x: &BMat) -> Result<EvalTrace, AttnError> {
    forward_at(spec, x, x.rows - 1)
}

/// Embeds a token sequence and runs the forward pass.
pub fn forward_tokens(spec: &TransformerSpec, tokens: &[Token]) -> Result<EvalTrace, AttnError> {
    forward(spec, &spec.embed_tokens(tokens)?)
}

/// Output rows for every position, for debugging; each row uses that position as the query.
pub fn forward_all_rows(spec: &TransformerSpec, x: &BMat) -> Vec<Result<EvalTrace, AttnError>> {
    (0..x.rows).map(|i| forward_at(spec, x, i)).collect()
}

fn join(xs: &[Num]) -> String {
    xs.iter().map(Num::to_string).collect::<Vec<_>>().join(" ")
}

impl fmt::Display for EvalTrace {
    /// One stage per line, scalars in exact dyadic text.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.x.rows {
            writeln!(f, "x[{i}] {}", join(self.x.row(i)))?;
        }
        writeln!(f, "q {}", join(&self.q))?;
        writeln!(f, "logits {}", join(&self.logits))?;
        writeln!(f, "a_num {}", join(&self.a_num))?;
        writeln!(f, "a_den {}", join(&self.a_den))?;
        for (j, c) in self.contributions.iter().enumerate() {
            writeln!(f, "term[{j}] {} partial {}", join(c), join(&self.num_partials[j]))?;
        }
        writeln!(f, "numerator {}", join(&self.numerator))?;
        if let Some(d) = &self.denominator {
            writeln!(f, "denominator {d}")?;
        }
        writeln!(f, "sa {}", join(&self.sa))?;
        writeln!(f, "hidden {}", join(&self.hidden))?;
        writeln!(f, "outputs {}", join(&self.outputs))?;
        match self.bit {
            Some(b) => writeln!(f, "bit {b}"),
            None => writeln!(f, "bit none"),
        }
    }
}
