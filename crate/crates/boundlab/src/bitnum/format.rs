use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use super::num::Num;
use super::BitnumError;

/// Largest significand budget supported by the fast arithmetic path.
pub const MAX_SIG_BITS: u32 = 40;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum Rounding {
    /// Round to nearest; exact ties go to the candidate of smaller magnitude.
    #[default]
    NearestTiesTruncate,
    /// Round toward zero.
    Truncate,
}

impl Rounding {
    pub fn as_str(&self) -> &'static str {
        match self {
            Rounding::NearestTiesTruncate => "nearest",
            Rounding::Truncate => "trunc",
        }
    }
}

impl FromStr for Rounding {
    type Err = BitnumError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "nearest" => Ok(Rounding::NearestTiesTruncate),
            "trunc" => Ok(Rounding::Truncate),
            _ => Err(BitnumError::BadDescriptor(format!("unknown rounding {s:?}"))),
        }
    }
}

/// Fixed-point format: sign plus a significand of `B` bits, scaled by `2^scale_log2`.
///
/// Representable magnitudes are `k * 2^lsb * λ` with `k < 2^B` significant bits and `lsb >= -B`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct FxFormat {
    pub p: u32,
    pub scale_log2: i32,
    pub rounding: Rounding,
    pub significand_override: Option<u32>,
}

impl FxFormat {
    pub fn new(p: u32) -> FxFormat {
        FxFormat { p, scale_log2: 0, rounding: Rounding::default(), significand_override: None }
    }

    pub fn scaled(p: u32, scale_log2: i32) -> FxFormat {
        FxFormat { scale_log2, ..FxFormat::new(p) }
    }

    pub fn with_rounding(mut self, rounding: Rounding) -> FxFormat {
        self.rounding = rounding;
        self
    }

    pub fn with_significand(mut self, bits: u32) -> FxFormat {
        self.significand_override = Some(bits);
        self
    }

    /// Significand budget B.
    pub fn sig_bits(&self) -> u32 {
        self.significand_override.unwrap_or(self.p.saturating_sub(1))
    }

    pub fn validate(&self) -> Result<(), BitnumError> {
        let b = self.sig_bits();
        if self.p < 2 || !(1..=MAX_SIG_BITS).contains(&b) {
            return Err(BitnumError::BadFormat(format!(
                "fixed-point format needs p >= 2 and 1 <= B <= {MAX_SIG_BITS} (p={}, B={b})",
                self.p
            )));
        }
        Ok(())
    }

    /// λ·(2^B − 1).
    pub fn max_value(&self) -> Num {
        let b = self.sig_bits();
        Num::from_parts(false, (1u64 << b) - 1, self.scale_log2)
    }

    /// Smallest positive value λ·2^{-B}.
    pub fn min_positive(&self) -> Num {
        Num::pow2(self.scale_log2 - self.sig_bits() as i32)
    }
}

/// Floating-point format `±1.a · 2^{±b}` with `t` mantissa bits and `e` exponent bits,
/// each budget counting its sign bit. Exponents lie in `[-q, q]` with `q = 2^{e-1} − 1`;
/// no subnormals.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct FpFormat {
    pub t: u32,
    pub e: u32,
    pub rounding: Rounding,
}

impl FpFormat {
    pub fn new(t: u32, e: u32) -> FpFormat {
        FpFormat { t, e, rounding: Rounding::default() }
    }

    pub fn with_rounding(mut self, rounding: Rounding) -> FpFormat {
        self.rounding = rounding;
        self
    }

    pub fn q(&self) -> i32 {
        (1i32 << (self.e - 1)) - 1
    }

    pub fn validate(&self) -> Result<(), BitnumError> {
        if self.t < 2 || self.e < 2 || self.t > MAX_SIG_BITS + 1 || self.e > 20 {
            return Err(BitnumError::BadFormat(format!(
                "floating-point format needs 2 <= t <= {} and 2 <= e <= 20 (t={}, e={})",
                MAX_SIG_BITS + 1,
                self.t,
                self.e
            )));
        }
        Ok(())
    }

    /// (2 − 2^{-(t-1)})·2^q.
    pub fn max_value(&self) -> Num {
        let t = self.t as i32;
        Num::from_parts(false, (1u64 << t) - 1, self.q() - (t - 1))
    }

    /// 2^{-q}.
    pub fn min_positive(&self) -> Num {
        Num::pow2(-self.q())
    }
}

/// A format descriptor for either precision family.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Format {
    Fx(FxFormat),
    Fp(FpFormat),
}

impl From<FxFormat> for Format {
    fn from(f: FxFormat) -> Format {
        Format::Fx(f)
    }
}

impl From<FpFormat> for Format {
    fn from(f: FpFormat) -> Format {
        Format::Fp(f)
    }
}

impl Format {
    pub fn validate(&self) -> Result<(), BitnumError> {
        match self {
            Format::Fx(f) => f.validate(),
            Format::Fp(f) => f.validate(),
        }
    }

    pub fn rounding(&self) -> Rounding {
        match self {
            Format::Fx(f) => f.rounding,
            Format::Fp(f) => f.rounding,
        }
    }

    /// Total precision in bits: p for fixed point, t + e for floating point.
    pub fn precision_bits(&self) -> u32 {
        match self {
            Format::Fx(f) => f.p,
            Format::Fp(f) => f.t + f.e,
        }
    }

    /// Significant bits a finite value may carry.
    pub fn sig_bits(&self) -> u32 {
        match self {
            Format::Fx(f) => f.sig_bits(),
            Format::Fp(f) => f.t,
        }
    }

    pub fn max_value(&self) -> Num {
        match self {
            Format::Fx(f) => f.max_value(),
            Format::Fp(f) => f.max_value(),
        }
    }

    pub fn min_positive(&self) -> Num {
        match self {
            Format::Fx(f) => f.min_positive(),
            Format::Fp(f) => f.min_positive(),
        }
    }

    /// The same format with its precision changed by `delta` bits: p for fixed point,
    /// the mantissa budget t for floating point. A significand override moves with it.
    pub fn with_precision_delta(&self, delta: i32) -> Result<Format, BitnumError> {
        let f = match *self {
            Format::Fx(mut f) => {
                f.p = (f.p as i32 + delta).max(0) as u32;
                if let Some(b) = f.significand_override {
                    f.significand_override = Some((b as i32 + delta).max(0) as u32);
                }
                Format::Fx(f)
            }
            Format::Fp(mut f) => {
                f.t = (f.t as i32 + delta).max(0) as u32;
                Format::Fp(f)
            }
        };
        f.validate()?;
        Ok(f)
    }

    /// True when `x` is already a value of this format (infinities included).
    pub fn contains(&self, x: &Num) -> bool {
        match x {
            Num::PosInf | Num::NegInf | Num::Zero => true,
            Num::Fin { .. } => self.round_num(x) == *x,
        }
    }

    /// Rounds an exact finite dyadic into this format.
    pub fn round_num(&self, x: &Num) -> Num {
        match *x {
            Num::Fin { neg, mant, exp } => self.round_wide(&Wide { neg, mag: mant as u128, exp, sticky: false }),
            other => other,
        }
    }

    /// Rounds an exact value given as a wide mantissa with sticky remainder.
    pub fn round_wide(&self, w: &Wide) -> Num {
        if w.mag == 0 {
            debug_assert!(!w.sticky, "sticky remainder without leading bits");
            return Num::Zero;
        }
        if w.cmp_abs(&self.max_value()) == Ordering::Greater {
            return Num::inf(w.neg);
        }
        let h = w.top_bit();
        let rounding = self.rounding();
        let lsb = match self {
            Format::Fx(f) => {
                let b = f.sig_bits() as i32;
                let hu = h - f.scale_log2;
                (hu - b + 1).max(-b) + f.scale_log2
            }
            Format::Fp(f) => {
                let q = f.q();
                if h < -q {
                    return underflow_fp(w, q, rounding);
                }
                h - (f.t as i32 - 1)
            }
        };
        w.round_at(lsb, rounding)
    }
}

fn underflow_fp(w: &Wide, q: i32, rounding: Rounding) -> Num {
    if rounding == Rounding::Truncate {
        return Num::Zero;
    }
    // Nearest: ±min when |x| > min/2, else zero.
    let half = Num::pow2(-q - 1);
    if w.cmp_abs(&half) == Ordering::Greater {
        Num::from_parts(w.neg, 1, -q)
    } else {
        Num::Zero
    }
}

/// An exact value `±(mag + r)·2^exp` with `0 <= r < 1`; `sticky` records whether `r > 0`.
///
/// Enough leading bits are kept so that rounding to any supported format is exact.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Wide {
    pub neg: bool,
    pub mag: u128,
    pub exp: i32,
    pub sticky: bool,
}

impl Wide {
    pub fn top_bit(&self) -> i32 {
        self.exp + 127 - self.mag.leading_zeros() as i32
    }

    /// Compares |self| with |x| for a finite nonzero `x`.
    pub fn cmp_abs(&self, x: &Num) -> Ordering {
        let Num::Fin { mant, exp, .. } = *x else {
            return match x {
                Num::Zero => {
                    if self.mag == 0 && !self.sticky {
                        Ordering::Equal
                    } else {
                        Ordering::Greater
                    }
                }
                _ => Ordering::Less,
            };
        };
        let tx = exp + 63 - mant.leading_zeros() as i32;
        let ts = self.top_bit();
        if ts != tx {
            return ts.cmp(&tx);
        }
        let m = mant as u128;
        let ord = if self.exp >= exp {
            (self.mag << (self.exp - exp) as u32).cmp(&m)
        } else {
            let s = (exp - self.exp) as u32;
            // Same top bit, so m << s fits in 128 bits.
            self.mag.cmp(&(m << s))
        };
        if ord == Ordering::Equal && self.sticky {
            Ordering::Greater
        } else {
            ord
        }
    }

    /// Rounds to a multiple of `2^lsb`.
    pub fn round_at(&self, lsb: i32, rounding: Rounding) -> Num {
        if lsb <= self.exp {
            debug_assert!(!self.sticky, "rounding position below retained bits");
            let shift = (self.exp - lsb) as u32;
            let m = self.mag << shift;
            return from_u128(self.neg, m, lsb);
        }
        let s = (lsb - self.exp) as u32;
        let (q, rem_cmp) = if s > 128 {
            (0u128, Ordering::Less)
        } else if s == 128 {
            (0u128, cmp_half(self.mag, 1u128 << 127, self.sticky))
        } else {
            let q = self.mag >> s;
            let rem = self.mag & ((1u128 << s) - 1);
            (q, cmp_half(rem, 1u128 << (s - 1), self.sticky))
        };
        let q = match rounding {
            Rounding::Truncate => q,
            Rounding::NearestTiesTruncate => {
                if rem_cmp == Ordering::Greater {
                    q + 1
                } else {
                    q
                }
            }
        };
        from_u128(self.neg, q, lsb)
    }
}

fn cmp_half(rem: u128, half: u128, sticky: bool) -> Ordering {
    match rem.cmp(&half) {
        Ordering::Equal if sticky => Ordering::Greater,
        o => o,
    }
}

fn from_u128(neg: bool, m: u128, exp: i32) -> Num {
    if m == 0 {
        return Num::Zero;
    }
    let tz = m.trailing_zeros();
    let odd = m >> tz;
    debug_assert!(odd <= u64::MAX as u128, "rounded mantissa exceeds 64 bits");
    Num::Fin { neg, mant: odd as u64, exp: exp + tz as i32 }
}

impl fmt::Display for Format {
    /// `fx:p=<n>,scale=2^<k>,round=<mode>[,sig=<B>]` or `fp:t=<n>,e=<n>,round=<mode>`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Format::Fx(x) => {
                write!(f, "fx:p={},scale=2^{},round={}", x.p, x.scale_log2, x.rounding.as_str())?;
                if let Some(b) = x.significand_override {
                    write!(f, ",sig={b}")?;
                }
                Ok(())
            }
            Format::Fp(x) => write!(f, "fp:t={},e={},round={}", x.t, x.e, x.rounding.as_str()),
        }
    }
}

impl FromStr for Format {
    type Err = BitnumError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = |msg: &str| BitnumError::BadDescriptor(format!("{msg} in {s:?}"));
        let (kind, rest) = s.split_once(':').ok_or_else(|| bad("missing kind"))?;
        let mut fields = std::collections::BTreeMap::new();
        for kv in rest.split(',').filter(|kv| !kv.is_empty()) {
            let (k, v) = kv.split_once('=').ok_or_else(|| bad("expected key=value"))?;
            fields.insert(k.trim(), v.trim());
        }
        let int = |k: &str| -> Result<Option<i64>, BitnumError> {
            fields.get(k).map(|v| v.parse::<i64>().map_err(|_| bad(&format!("bad {k}")))).transpose()
        };
        let rounding = match fields.get("round") {
            Some(r) => r.parse()?,
            None => Rounding::default(),
        };
        let fmt = match kind {
            "fx" => {
                let p = int("p")?.ok_or_else(|| bad("missing p"))?;
                let scale = match fields.get("scale") {
                    Some(v) => v
                        .strip_prefix("2^")
                        .and_then(|k| k.parse::<i32>().ok())
                        .ok_or_else(|| bad("scale must be 2^<k>"))?,
                    None => 0,
                };
                let sig = int("sig")?.map(|b| b as u32);
                Format::Fx(FxFormat { p: p as u32, scale_log2: scale, rounding, significand_override: sig })
            }
            "fp" => {
                let t = int("t")?.ok_or_else(|| bad("missing t"))?;
                let e = int("e")?.ok_or_else(|| bad("missing e"))?;
                Format::Fp(FpFormat { t: t as u32, e: e as u32, rounding })
            }
            _ => return Err(bad("unknown kind")),
        };
        fmt.validate()?;
        Ok(fmt)
    }
}
