use super::format::{FpFormat, FxFormat};
use super::num::Num;

/// Sign / significand / exponent view of a finite fixed-point value:
/// `(-1)^sign · significand · 2^binexp · λ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FxFields {
    pub sign: bool,
    pub significand: u64,
    pub binexp: i32,
}

impl FxFields {
    /// Splits `x` using the widest significand the format allows, or `None` if `x` is
    /// infinite or not a value of `fmt`.
    pub fn encode(x: &Num, fmt: &FxFormat) -> Option<FxFields> {
        let b = fmt.sig_bits() as i32;
        match *x {
            Num::Zero => Some(FxFields { sign: false, significand: 0, binexp: -b }),
            Num::Fin { neg, mant, exp } => {
                let top = x.top_bit()? - fmt.scale_log2;
                let binexp = (top - b + 1).max(-b);
                let rel = exp - fmt.scale_log2 - binexp;
                if rel < 0 || top - binexp >= b {
                    return None;
                }
                Some(FxFields { sign: neg, significand: mant << rel, binexp })
            }
            _ => None,
        }
    }

    pub fn decode(&self, fmt: &FxFormat) -> Num {
        Num::from_parts(self.sign, self.significand, self.binexp + fmt.scale_log2)
    }
}

/// `⟨s_a, a, s_b, b⟩` view of a finite nonzero floating-point value:
/// `(-1)^{s_a} · 1.a · 2^{(-1)^{s_b} b}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FpFields {
    pub mant_sign: bool,
    /// The `t − 1` fraction bits after the implicit leading one.
    pub fraction: u64,
    pub exp_sign: bool,
    pub exp_mag: u32,
}

impl FpFields {
    pub fn encode(x: &Num, fmt: &FpFormat) -> Option<FpFields> {
        let Num::Fin { neg, mant, exp } = *x else { return None };
        let top = x.top_bit()?;
        let q = fmt.q();
        let frac_bits = fmt.t as i32 - 1;
        if top.abs() > q || exp < top - frac_bits {
            return None;
        }
        let full = mant << (exp - (top - frac_bits));
        Some(FpFields {
            mant_sign: neg,
            fraction: full & ((1u64 << frac_bits) - 1),
            exp_sign: top < 0,
            exp_mag: top.unsigned_abs(),
        })
    }

    pub fn decode(&self, fmt: &FpFormat) -> Num {
        let frac_bits = fmt.t as i32 - 1;
        let e = if self.exp_sign { -(self.exp_mag as i32) } else { self.exp_mag as i32 };
        Num::from_parts(self.mant_sign, (1u64 << frac_bits) | self.fraction, e - frac_bits)
    }
}
