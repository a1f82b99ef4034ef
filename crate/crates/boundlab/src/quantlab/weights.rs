use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::attn::{AttentionKind, Embedding, MlpSpec, NumeratorOrder, Token, TransformerSpec};
use crate::bitnum::{Format, Num};
use crate::constructs::{ReprLayout, Variant};
use crate::lintens::BMat;

pub const WEIGHTS_VERSION: u32 = 1;

/// A problem with a weights document, located by line/column or by field path.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub struct SchemaError {
    pub line: Option<usize>,
    pub column: Option<usize>,
    pub field: Option<String>,
    pub message: String,
}

impl fmt::Display for SchemaError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("schema error")?;
        if let (Some(l), Some(c)) = (self.line, self.column) {
            write!(f, " at line {l} column {c}")?;
        }
        if let Some(field) = &self.field {
            write!(f, " in field `{field}`")?;
        }
        write!(f, ": {}", self.message)
    }
}

fn field_err(field: impl Into<String>, message: impl Into<String>) -> SchemaError {
    SchemaError { line: None, column: None, field: Some(field.into()), message: message.into() }
}

/// A scalar is exact dyadic text (or any literal `Num` parses) or a JSON number.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum Scalar {
    Text(String),
    Number(f64),
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Formats {
    num: String,
    den: String,
    out: String,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EmbeddingEntry {
    index: i32,
    token: String,
    row: Vec<Scalar>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MlpFile {
    w1: Vec<Vec<Scalar>>,
    b1: Vec<Scalar>,
    w2: Vec<Vec<Scalar>>,
    b2: Vec<Scalar>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WeightsFile {
    version: u32,
    #[serde(default = "default_id")]
    id: String,
    m: usize,
    /// Non-query token count.
    n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    t: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    e: Option<u32>,
    #[serde(default = "default_repr")]
    representation: String,
    attention_kind: AttentionKind,
    #[serde(default)]
    numerator_order: NumeratorOrder,
    formats: Formats,
    embedding: Vec<EmbeddingEntry>,
    wq: Vec<Vec<Scalar>>,
    wk: Vec<Vec<Scalar>>,
    wv: Vec<Vec<Scalar>>,
    mlp: MlpFile,
}

fn default_id() -> String {
    "imported".into()
}

fn default_repr() -> String {
    "T0".into()
}

/// An imported spec with the representation it expects.
#[derive(Clone, Debug)]
pub struct ImportedModel {
    pub spec: TransformerSpec,
    pub layout: ReprLayout,
}

fn scalar(s: &Scalar, field: &str) -> Result<Num, SchemaError> {
    match s {
        Scalar::Text(t) => t.parse().map_err(|e| field_err(field, format!("{e}"))),
        Scalar::Number(v) => Num::from_f64(*v).ok_or_else(|| field_err(field, "NaN is not a scalar")),
    }
}

fn vector(v: &[Scalar], field: &str) -> Result<Vec<Num>, SchemaError> {
    v.iter().enumerate().map(|(i, s)| scalar(s, &format!("{field}[{i}]"))).collect()
}

fn matrix(rows: &[Vec<Scalar>], field: &str, want_rows: usize, fmt: Format) -> Result<BMat, SchemaError> {
    if rows.len() != want_rows {
        return Err(field_err(field, format!("expected {want_rows} rows, found {}", rows.len())));
    }
    let cols = rows.first().map_or(0, Vec::len);
    if cols == 0 {
        return Err(field_err(field, "matrix has no columns"));
    }
    let mut entries = Vec::with_capacity(want_rows * cols);
    for (i, r) in rows.iter().enumerate() {
        if r.len() != cols {
            return Err(field_err(format!("{field}[{i}]"), format!("expected {cols} columns, found {}", r.len())));
        }
        entries.extend(vector(r, &format!("{field}[{i}]"))?);
    }
    BMat::new(want_rows, cols, entries, fmt).map_err(|e| field_err(field, e.to_string()))
}

fn format_field(s: &str, field: &str) -> Result<Format, SchemaError> {
    s.parse().map_err(|e| field_err(field, format!("{e}")))
}

/// Parses and validates a weights document.
pub fn import_weights_str(text: &str) -> Result<ImportedModel, SchemaError> {
    let w: WeightsFile = serde_json::from_str(text).map_err(|e| SchemaError {
        line: Some(e.line()),
        column: Some(e.column()),
        field: None,
        message: e.to_string(),
    })?;
    if w.version != WEIGHTS_VERSION {
        return Err(field_err("version", format!("unsupported version {} (expected {WEIGHTS_VERSION})", w.version)));
    }
    let num_fmt = format_field(&w.formats.num, "formats.num")?;
    let den_fmt = format_field(&w.formats.den, "formats.den")?;
    let out_fmt = format_field(&w.formats.out, "formats.out")?;
    // The model width comes from the embedding so a bad projection is blamed on itself.
    let d = w.embedding.first().map_or(w.wq.len(), |e| e.row.len());
    if d == 0 {
        return Err(field_err("embedding", "model dimension is zero"));
    }
    let wq = matrix(&w.wq, "wq", d, num_fmt)?;
    let wk = matrix(&w.wk, "wk", d, num_fmt)?;
    if wk.cols != wq.cols {
        return Err(field_err("wk", format!("expected {} columns to match wq, found {}", wq.cols, wk.cols)));
    }
    let wv = matrix(&w.wv, "wv", d, num_fmt)?;
    let w1 = matrix(&w.mlp.w1, "mlp.w1", wv.cols, out_fmt)?;
    let b1 = vector(&w.mlp.b1, "mlp.b1")?;
    if b1.len() != w1.cols {
        return Err(field_err("mlp.b1", format!("expected {} entries, found {}", w1.cols, b1.len())));
    }
    let w2 = matrix(&w.mlp.w2, "mlp.w2", w1.cols, out_fmt)?;
    let b2 = vector(&w.mlp.b2, "mlp.b2")?;
    if b2.len() != w2.cols {
        return Err(field_err("mlp.b2", format!("expected {} entries, found {}", w2.cols, b2.len())));
    }
    let variant: Variant = w.representation.parse().map_err(|e| field_err("representation", format!("{e}")))?;
    let mut embed = Embedding::new();
    for (i, ent) in w.embedding.iter().enumerate() {
        let field = format!("embedding[{i}]");
        if ent.row.len() != d {
            return Err(field_err(format!("{field}.row"), format!("expected {d} entries, found {}", ent.row.len())));
        }
        let row = vector(&ent.row, &format!("{field}.row"))?.iter().map(|x| num_fmt.round_num(x)).collect();
        if embed.insert((ent.index, Token(ent.token.clone())), row).is_some() {
            return Err(field_err(field, format!("duplicate entry ({}, {:?})", ent.index, ent.token)));
        }
    }
    let spec = TransformerSpec {
        id: w.id,
        kind: w.attention_kind,
        m: w.m,
        t: w.t,
        e: w.e,
        index_base: variant.index_base(),
        n_tokens: w.n + 1,
        d,
        embed,
        wq,
        wk,
        wv,
        mlp: MlpSpec { w1, b1: b1.iter().map(|x| out_fmt.round_num(x)).collect(), w2, b2: b2.iter().map(|x| out_fmt.round_num(x)).collect() },
        num_fmt,
        den_fmt,
        out_fmt,
        numerator_order: w.numerator_order,
    };
    spec.validate().map_err(|e| field_err("spec", e.to_string()))?;
    let layout = ReprLayout::with_fp(variant, w.m, w.n, w.t.unwrap_or(0) as usize, w.e.unwrap_or(0) as usize)
        .map_err(|e| field_err("representation", e.to_string()))?;
    Ok(ImportedModel { spec, layout })
}

pub fn import_weights(path: &Path) -> Result<ImportedModel, SchemaError> {
    let text = std::fs::read_to_string(path).map_err(|e| SchemaError {
        line: None,
        column: None,
        field: None,
        message: format!("{}: {e}", path.display()),
    })?;
    import_weights_str(&text)
}

fn text(v: &[Num]) -> Vec<Scalar> {
    v.iter().map(|x| Scalar::Text(x.to_string())).collect()
}

fn rows(m: &BMat) -> Vec<Vec<Scalar>> {
    (0..m.rows).map(|i| text(m.row(i))).collect()
}

/// Serialises a spec and its representation as a weights document; scalars use exact text.
pub fn export_weights(spec: &TransformerSpec, layout: &ReprLayout) -> String {
    let w = WeightsFile {
        version: WEIGHTS_VERSION,
        id: spec.id.clone(),
        m: spec.m,
        n: spec.n_tokens - 1,
        t: spec.t,
        e: spec.e,
        representation: layout.variant.to_string(),
        attention_kind: spec.kind,
        numerator_order: spec.numerator_order,
        formats: Formats { num: spec.num_fmt.to_string(), den: spec.den_fmt.to_string(), out: spec.out_fmt.to_string() },
        embedding: spec
            .embed
            .iter()
            .map(|((index, tok), row)| EmbeddingEntry { index: *index, token: tok.0.clone(), row: text(row) })
            .collect(),
        wq: rows(&spec.wq),
        wk: rows(&spec.wk),
        wv: rows(&spec.wv),
        mlp: MlpFile { w1: rows(&spec.mlp.w1), b1: text(&spec.mlp.b1), w2: rows(&spec.mlp.w2), b2: text(&spec.mlp.b2) },
    };
    let mut s = serde_json::to_string_pretty(&w).expect("weights serialise");
    s.push('\n');
    s
}
