use super::format::Format;
use super::num::Num;
use super::BitnumError;

/// Exponents beyond this magnitude saturate every supported format.
const EXP_CUTOFF: i64 = 1 << 24;

/// An attention logit stored as its coefficient of `ln 2`, so `exp` of it is a power of two.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Logit {
    Value(Num),
    /// A logit whose exponential is exactly zero.
    NegLarge,
}

/// `round(2^k)` into `fmt`, where `k` is the logit coefficient.
pub fn exp_logit(l: &Logit, fmt: &Format) -> Result<Num, BitnumError> {
    let k = match l {
        Logit::NegLarge | Logit::Value(Num::NegInf) => return Ok(Num::Zero),
        Logit::Value(Num::PosInf) => return Ok(Num::PosInf),
        Logit::Value(v) => v,
    };
    if !k.is_integer() {
        return Err(BitnumError::NonDyadicLogit(k.to_string()));
    }
    let k = match k.to_i64() {
        Some(k) => k.clamp(-EXP_CUTOFF, EXP_CUTOFF),
        None if k.is_neg() => -EXP_CUTOFF,
        None => EXP_CUTOFF,
    };
    Ok(fmt.round_num(&Num::pow2(k as i32)))
}
