//! Input representations and the four analytic equality constructions.

mod builders;
mod instance;
mod layout;

use std::fmt;
use std::str::FromStr;

pub use builders::{build_fp_linear, build_fp_softmax, build_fx_simple, build_fx_tight, fp_softmax_shape, render_table};
pub use instance::{bits_int, bits_str, int_bits, parse_bits, EqInstance};
pub use layout::{validate, Promise, PromiseSet, ReprLayout, Variant};

use crate::attn::TransformerSpec;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ConstructError {
    #[error("unsupported parameters: {0}")]
    Unsupported(String),
    #[error("bad instance: {0}")]
    BadInstance(String),
    #[error("promise violated: {}", .0.iter().map(Promise::name).collect::<Vec<_>>().join(", "))]
    PromiseViolated(Vec<Promise>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConstructionId {
    FxSimple,
    FxTight,
    FpLinear,
    FpSoftmax,
}

impl ConstructionId {
    pub const ALL: [ConstructionId; 4] =
        [ConstructionId::FxSimple, ConstructionId::FxTight, ConstructionId::FpLinear, ConstructionId::FpSoftmax];

    pub fn as_str(&self) -> &'static str {
        match self {
            ConstructionId::FxSimple => "fx-simple",
            ConstructionId::FxTight => "fx-tight",
            ConstructionId::FpLinear => "fp-linear",
            ConstructionId::FpSoftmax => "fp-softmax",
        }
    }

    pub fn is_fixed_point(&self) -> bool {
        matches!(self, ConstructionId::FxSimple | ConstructionId::FxTight)
    }
}

impl fmt::Display for ConstructionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ConstructionId {
    type Err = ConstructError;
    fn from_str(s: &str) -> Result<ConstructionId, ConstructError> {
        ConstructionId::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| ConstructError::Unsupported(format!("unknown construction {s:?}")))
    }
}

/// Parameters selecting one instance of a construction family.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Params {
    /// String length (fixed-point constructions; derived from (t, e) otherwise).
    pub m: Option<usize>,
    pub t: Option<usize>,
    pub e: Option<usize>,
    /// Bits added to every stage precision (p for fixed point, t for floating point).
    pub precision_delta: i32,
    /// Token count override; defaults to the smallest count the representation needs.
    pub n: Option<usize>,
}

impl Params {
    pub fn m(m: usize) -> Params {
        Params { m: Some(m), ..Params::default() }
    }

    pub fn te(t: usize, e: usize) -> Params {
        Params { t: Some(t), e: Some(e), ..Params::default() }
    }

    pub fn delta(mut self, d: i32) -> Params {
        self.precision_delta = d;
        self
    }
}

/// A built construction: the transformer plus the representation it reads.
#[derive(Clone, Debug)]
pub struct Construction {
    pub id: ConstructionId,
    pub spec: TransformerSpec,
    pub layout: ReprLayout,
    /// Native precision in bits (p, or t + e).
    pub native_bits: u32,
}

impl Construction {
    pub fn m(&self) -> usize {
        self.layout.m
    }
}

/// Builds any construction from its id and parameters.
pub fn build(id: ConstructionId, params: &Params) -> Result<Construction, ConstructError> {
    let need = |x: Option<usize>, what: &str| {
        x.ok_or_else(|| ConstructError::Unsupported(format!("{id} requires {what}")))
    };
    match id {
        ConstructionId::FxSimple => build_fx_simple(need(params.m, "m")?, params.precision_delta, params.n),
        ConstructionId::FxTight => build_fx_tight(need(params.m, "m")?, params.precision_delta, params.n),
        ConstructionId::FpLinear => {
            let (t, e) = (need(params.t, "t")?, need(params.e, "e")?);
            if let Some(m) = params.m {
                if m != t + e {
                    return Err(ConstructError::Unsupported(format!("fp-linear needs m = t + e, got m={m}")));
                }
            }
            build_fp_linear(t, e, params.precision_delta, params.n)
        }
        ConstructionId::FpSoftmax => {
            let (t, e) = (need(params.t, "t")?, need(params.e, "e")?);
            let c = build_fp_softmax(t, e, params.precision_delta, params.n)?;
            if let Some(m) = params.m {
                if m != c.m() {
                    return Err(ConstructError::Unsupported(format!(
                        "fp-softmax with (t,e)=({t},{e}) has m={}, not {m}",
                        c.m()
                    )));
                }
            }
            Ok(c)
        }
    }
}
