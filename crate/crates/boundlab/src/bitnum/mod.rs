//! Bit-exact scalar arithmetic in bounded fixed-point and floating-point formats.

mod demo;
mod exact;
mod fields;
mod format;
mod logit;
mod num;
mod ops;

pub use demo::arith_demo;
pub use exact::ExactRat;
pub use fields::{FpFields, FxFields};
pub use format::{Format, FpFormat, FxFormat, Rounding, Wide, MAX_SIG_BITS};
pub use logit::{exp_logit, Logit};
pub use num::Num;
pub use ops::{add, div, dot_left, mul, prod_left, relu, round_exact, sub, sum_left};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BitnumError {
    #[error("indeterminate form: {0}")]
    IndeterminateForm(&'static str),
    #[error("logit {0} is not an integer power of two exponent")]
    NonDyadicLogit(String),
    #[error("invalid format: {0}")]
    BadFormat(String),
    #[error("bad format descriptor: {0}")]
    BadDescriptor(String),
    #[error("bad scalar literal {0:?}")]
    BadScalar(String),
    #[error("empty sequence")]
    EmptySequence,
}
