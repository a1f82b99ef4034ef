use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero as _};

/// A scalar of either precision format: an exact dyadic rational or a signed infinity.
///
/// Finite values are stored with an odd mantissa so that equal values have equal
/// representations. Exact zero is its own variant.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Num {
    Zero,
    Fin { neg: bool, mant: u64, exp: i32 },
    PosInf,
    NegInf,
}

impl Num {
    pub const ONE: Num = Num::Fin { neg: false, mant: 1, exp: 0 };

    /// `(-1)^neg * mant * 2^exp`, normalised.
    pub fn from_parts(neg: bool, mant: u64, exp: i32) -> Num {
        if mant == 0 {
            return Num::Zero;
        }
        let tz = mant.trailing_zeros();
        Num::Fin { neg, mant: mant >> tz, exp: exp + tz as i32 }
    }

    pub fn from_int(v: i64) -> Num {
        Num::from_parts(v < 0, v.unsigned_abs(), 0)
    }

    /// `num / 2^k`.
    pub fn dyadic(num: i64, k: i32) -> Num {
        Num::from_parts(num < 0, num.unsigned_abs(), -k)
    }

    pub fn pow2(k: i32) -> Num {
        Num::Fin { neg: false, mant: 1, exp: k }
    }

    pub fn inf(neg: bool) -> Num {
        if neg {
            Num::NegInf
        } else {
            Num::PosInf
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Num::Zero)
    }

    pub fn is_inf(&self) -> bool {
        matches!(self, Num::PosInf | Num::NegInf)
    }

    pub fn is_finite(&self) -> bool {
        !self.is_inf()
    }

    pub fn is_neg(&self) -> bool {
        matches!(self, Num::NegInf | Num::Fin { neg: true, .. })
    }

    pub fn is_pos(&self) -> bool {
        matches!(self, Num::PosInf | Num::Fin { neg: false, .. })
    }

    #[allow(clippy::should_implement_trait)]
    pub fn neg(self) -> Num {
        match self {
            Num::Zero => Num::Zero,
            Num::Fin { neg, mant, exp } => Num::Fin { neg: !neg, mant, exp },
            Num::PosInf => Num::NegInf,
            Num::NegInf => Num::PosInf,
        }
    }

    pub fn abs(self) -> Num {
        if self.is_neg() {
            self.neg()
        } else {
            self
        }
    }

    /// Position of the leading one bit, i.e. floor(log2 |x|), for finite nonzero values.
    pub fn top_bit(&self) -> Option<i32> {
        match *self {
            Num::Fin { mant, exp, .. } => Some(exp + 63 - mant.leading_zeros() as i32),
            _ => None,
        }
    }

    /// Number of significant bits of the odd mantissa (0 for zero).
    pub fn sig_bits(&self) -> u32 {
        match *self {
            Num::Fin { mant, .. } => 64 - mant.leading_zeros(),
            _ => 0,
        }
    }

    /// Exponent of the least significant one bit.
    pub fn low_bit(&self) -> Option<i32> {
        match *self {
            Num::Fin { exp, .. } => Some(exp),
            _ => None,
        }
    }

    /// True when the value is an integer (zero included).
    pub fn is_integer(&self) -> bool {
        match *self {
            Num::Zero => true,
            Num::Fin { exp, .. } => exp >= 0,
            _ => false,
        }
    }

    /// The value as an i64 when it is an integer that fits.
    pub fn to_i64(&self) -> Option<i64> {
        match *self {
            Num::Zero => Some(0),
            Num::Fin { neg, mant, exp } if exp >= 0 => {
                if exp >= 63 || (mant >> (63 - exp)) != 0 {
                    return None;
                }
                let v = (mant << exp) as i64;
                Some(if neg { -v } else { v })
            }
            _ => None,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match *self {
            Num::Zero => 0.0,
            Num::Fin { neg, mant, exp } => {
                let v = (mant as f64) * 2f64.powi(exp);
                if neg {
                    -v
                } else {
                    v
                }
            }
            Num::PosInf => f64::INFINITY,
            Num::NegInf => f64::NEG_INFINITY,
        }
    }

    /// Exact conversion of a finite f64.
    pub fn from_f64(v: f64) -> Option<Num> {
        if !v.is_finite() {
            return if v.is_nan() {
                None
            } else {
                Some(Num::inf(v < 0.0))
            };
        }
        if v == 0.0 {
            return Some(Num::Zero);
        }
        let bits = v.to_bits();
        let neg = bits >> 63 == 1;
        let biased = ((bits >> 52) & 0x7ff) as i32;
        let frac = bits & ((1u64 << 52) - 1);
        let (mant, exp) = if biased == 0 {
            (frac, -1074)
        } else {
            (frac | (1u64 << 52), biased - 1075)
        };
        Some(Num::from_parts(neg, mant, exp))
    }

    /// Exact rational value; `None` for infinities.
    pub fn to_rat(&self) -> Option<BigRational> {
        match *self {
            Num::Zero => Some(BigRational::zero()),
            Num::Fin { neg, mant, exp } => {
                let mut n = BigInt::from(mant);
                if neg {
                    n = -n;
                }
                let r = if exp >= 0 {
                    BigRational::from_integer(n << exp as usize)
                } else {
                    BigRational::new(n, BigInt::one() << (-exp) as usize)
                };
                Some(r)
            }
            _ => None,
        }
    }

    /// Exact conversion of a dyadic rational; `None` if the denominator is not a power of two
    /// or the mantissa does not fit in 64 bits.
    pub fn from_rat(r: &BigRational) -> Option<Num> {
        if r.is_zero() {
            return Some(Num::Zero);
        }
        let den = r.denom();
        let dz = den.trailing_zeros()?;
        if (den >> dz as usize) != BigInt::one() {
            return None;
        }
        let numer = r.numer();
        let neg = numer < &BigInt::zero();
        let mag = numer.magnitude();
        let nz = mag.trailing_zeros().unwrap_or(0);
        let odd = mag >> nz as usize;
        let mant: u64 = odd.try_into().ok()?;
        Some(Num::Fin { neg, mant, exp: nz as i32 - dz as i32 })
    }

    /// Positional base-2 text such as `100.1` or `-0.011`; infinities as `+inf`/`-inf`.
    pub fn to_binary(&self) -> String {
        match *self {
            Num::Zero => "0".into(),
            Num::PosInf => "+inf".into(),
            Num::NegInf => "-inf".into(),
            Num::Fin { neg, mant, exp } => {
                let digits = format!("{mant:b}");
                let body = if exp >= 0 {
                    format!("{digits}{}", "0".repeat(exp as usize))
                } else {
                    let frac = (-exp) as usize;
                    let padded = format!("{}{digits}", "0".repeat((frac + 1).saturating_sub(digits.len())));
                    let (int, f) = padded.split_at(padded.len() - frac);
                    format!("{int}.{f}")
                };
                if neg {
                    format!("-{body}")
                } else {
                    body
                }
            }
        }
    }

    /// Total order: -inf < finite < +inf.
    pub fn total_cmp(&self, other: &Num) -> Ordering {
        fn rank(x: &Num) -> i8 {
            match x {
                Num::NegInf => -2,
                Num::PosInf => 2,
                Num::Zero => 0,
                Num::Fin { neg: true, .. } => -1,
                Num::Fin { neg: false, .. } => 1,
            }
        }
        let (ra, rb) = (rank(self), rank(other));
        if ra != rb || ra.abs() != 1 {
            return ra.cmp(&rb);
        }
        let mag = cmp_mag(self, other);
        if ra < 0 {
            mag.reverse()
        } else {
            mag
        }
    }
}

/// Compares |a| and |b| for finite nonzero values.
fn cmp_mag(a: &Num, b: &Num) -> Ordering {
    let (Num::Fin { mant: ma, exp: ea, .. }, Num::Fin { mant: mb, exp: eb, .. }) = (*a, *b) else {
        unreachable!("cmp_mag on non-finite")
    };
    let ta = a.top_bit().unwrap();
    let tb = b.top_bit().unwrap();
    if ta != tb {
        return ta.cmp(&tb);
    }
    // Same leading position: align the shorter mantissa.
    let shift = ea - eb;
    if shift >= 0 {
        ((ma as u128) << shift).cmp(&(mb as u128))
    } else {
        (ma as u128).cmp(&((mb as u128) << (-shift)))
    }
}

impl PartialOrd for Num {
    fn partial_cmp(&self, other: &Num) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Num {
    fn cmp(&self, other: &Num) -> Ordering {
        self.total_cmp(other)
    }
}

impl From<i64> for Num {
    fn from(v: i64) -> Num {
        Num::from_int(v)
    }
}

impl fmt::Display for Num {
    /// Exact dyadic text: `+<int>/2^<k>`, `0`, `+inf`, `-inf`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Num::Zero => f.write_str("0"),
            Num::PosInf => f.write_str("+inf"),
            Num::NegInf => f.write_str("-inf"),
            Num::Fin { neg, mant, exp } => {
                let s = if neg { '-' } else { '+' };
                if exp >= 0 {
                    let v = BigInt::from(mant) << exp as usize;
                    write!(f, "{s}{v}/2^0")
                } else {
                    write!(f, "{s}{mant}/2^{}", -exp)
                }
            }
        }
    }
}

impl std::str::FromStr for Num {
    type Err = super::BitnumError;

    /// Accepts the exact dyadic text, plain integers and decimal literals. Decimals are
    /// converted exactly through their binary64 value.
    fn from_str(s: &str) -> Result<Num, Self::Err> {
        let bad = || super::BitnumError::BadScalar(s.to_string());
        let t = s.trim();
        match t {
            "0" | "+0" | "-0" => return Ok(Num::Zero),
            "+inf" | "inf" => return Ok(Num::PosInf),
            "-inf" => return Ok(Num::NegInf),
            _ => {}
        }
        if let Some((n, k)) = t.split_once("/2^") {
            let n: BigInt = n.trim_start_matches('+').parse().map_err(|_| bad())?;
            let k: i64 = k.parse().map_err(|_| bad())?;
            let r = if k >= 0 {
                BigRational::new(n, BigInt::one() << k as usize)
            } else {
                BigRational::from_integer(n << (-k) as usize)
            };
            return Num::from_rat(&r).ok_or_else(bad);
        }
        if let Ok(n) = t.trim_start_matches('+').parse::<BigInt>() {
            return Num::from_rat(&BigRational::from_integer(n)).ok_or_else(bad);
        }
        let v: f64 = t.parse().map_err(|_| bad())?;
        if v.is_nan() {
            return Err(bad());
        }
        Num::from_f64(v).ok_or_else(bad)
    }
}
