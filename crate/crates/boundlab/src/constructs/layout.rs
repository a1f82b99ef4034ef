use std::fmt;
use std::str::FromStr;

use super::instance::{bits_int, bits_str, EqInstance};
use super::ConstructError;
use crate::attn::Token;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Variant {
    T0,
    T1,
    T2,
    T3,
}

impl Variant {
    pub fn index_base(&self) -> i32 {
        match self {
            Variant::T1 => -1,
            _ => 0,
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Variant::T0 => "T0",
            Variant::T1 => "T1",
            Variant::T2 => "T2",
            Variant::T3 => "T3",
        };
        f.write_str(s)
    }
}

impl FromStr for Variant {
    type Err = ConstructError;
    fn from_str(s: &str) -> Result<Variant, ConstructError> {
        match s.to_ascii_uppercase().as_str() {
            "T0" => Ok(Variant::T0),
            "T1" => Ok(Variant::T1),
            "T2" => Ok(Variant::T2),
            "T3" => Ok(Variant::T3),
            _ => Err(ConstructError::BadInstance(format!("unknown representation {s:?}"))),
        }
    }
}

/// Input restrictions under which a construction must be correct.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Promise {
    /// m is odd.
    MOdd,
    /// y ≤ z as binary numbers.
    YLeZ,
    /// The exponent field y_2 … y_{e+1} is nonzero.
    YExpPositive,
    /// y_{m-1} y_m ≠ 10.
    YTailOk,
    /// z_1 … z_e is not all ones.
    ZHeadOk,
}

impl Promise {
    pub fn name(&self) -> &'static str {
        match self {
            Promise::MOdd => "m_odd",
            Promise::YLeZ => "y_le_z",
            Promise::YExpPositive => "y_exp_positive",
            Promise::YTailOk => "y_tail_ok",
            Promise::ZHeadOk => "z_head_ok",
        }
    }

    pub fn holds(&self, inst: &EqInstance, e: usize) -> bool {
        let m = inst.m();
        match self {
            Promise::MOdd => m % 2 == 1,
            Promise::YLeZ => inst.y <= inst.z,
            Promise::YExpPositive => e < m && inst.y[1..=e].contains(&1),
            Promise::YTailOk => m < 2 || !(inst.y[m - 2] == 1 && inst.y[m - 1] == 0),
            Promise::ZHeadOk => e <= m && inst.z[..e].contains(&0),
        }
    }
}

impl fmt::Display for Promise {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PromiseSet {
    pub variant: Variant,
    pub flags: Vec<Promise>,
    /// Exponent budget used by the floating-point flags.
    pub e: usize,
}

impl PromiseSet {
    pub fn new(variant: Variant, flags: &[Promise], e: usize) -> PromiseSet {
        PromiseSet { variant, flags: flags.to_vec(), e }
    }

    /// Default promises of a representation: `m` odd and `y ≤ z` for T⁰/T¹,
    /// plus the floating-point conditions for T²/T³.
    pub fn for_variant(variant: Variant, e: usize) -> PromiseSet {
        let flags: &[Promise] = match variant {
            Variant::T0 | Variant::T1 => &[Promise::MOdd, Promise::YLeZ],
            Variant::T2 => &[Promise::YLeZ, Promise::YExpPositive, Promise::YTailOk],
            Variant::T3 => &[Promise::MOdd, Promise::YLeZ, Promise::ZHeadOk],
        };
        PromiseSet::new(variant, flags, e)
    }

    /// Every violated flag; empty iff the instance satisfies the promise.
    pub fn violations(&self, inst: &EqInstance) -> Vec<Promise> {
        self.flags.iter().copied().filter(|p| !p.holds(inst, self.e)).collect()
    }

    /// True when `y` alone can be completed to some promise-satisfying pair, ignoring `y ≤ z`.
    pub fn y_ok(&self, y: &[u8]) -> bool {
        let inst = EqInstance { y: y.to_vec(), z: y.to_vec() };
        self.flags
            .iter()
            .filter(|p| matches!(p, Promise::MOdd | Promise::YExpPositive | Promise::YTailOk))
            .all(|p| p.holds(&inst, self.e))
    }

    /// True when `z` alone satisfies the flags that only mention z.
    pub fn z_ok(&self, z: &[u8]) -> bool {
        let inst = EqInstance { y: z.to_vec(), z: z.to_vec() };
        self.flags.iter().filter(|p| matches!(p, Promise::ZHeadOk)).all(|p| p.holds(&inst, self.e))
    }
}

/// Checks an instance against a promise set.
pub fn validate(inst: &EqInstance, promises: &PromiseSet) -> Result<(), Vec<Promise>> {
    let v = promises.violations(inst);
    if v.is_empty() {
        Ok(())
    } else {
        Err(v)
    }
}

/// Token layout of one input representation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReprLayout {
    pub variant: Variant,
    pub m: usize,
    /// Number of non-query tokens; the query placeholder follows them.
    pub n: usize,
    pub t: usize,
    pub e: usize,
    /// Length of the second exponent segment (T³ only).
    pub r: usize,
    pub promises: PromiseSet,
}

impl ReprLayout {
    /// Tokens occupied by the representation itself, before padding.
    pub fn min_len(variant: Variant, m: usize, t: usize) -> usize {
        match variant {
            Variant::T0 => 2 * m,
            Variant::T1 => 2 * m + 4,
            Variant::T2 => 4 * t - 4,
            Variant::T3 => 2 * m + 2,
        }
    }

    pub fn new(variant: Variant, m: usize, n: usize) -> Result<ReprLayout, ConstructError> {
        ReprLayout::with_fp(variant, m, n, 0, 0)
    }

    pub fn with_fp(variant: Variant, m: usize, n: usize, t: usize, e: usize) -> Result<ReprLayout, ConstructError> {
        let min = ReprLayout::min_len(variant, m, t);
        if n < min {
            return Err(ConstructError::Unsupported(format!("{variant} at m={m} needs at least {min} tokens, got n={n}")));
        }
        let r = match variant {
            Variant::T3 => (m + 3).checked_sub(e + 2 * t).filter(|&r| r >= 1).ok_or_else(|| {
                ConstructError::Unsupported(format!("T3 at m={m}, (t,e)=({t},{e}) leaves no second exponent segment"))
            })?,
            _ => 0,
        };
        if matches!(variant, Variant::T2) && (t < 4 || e < 2 || t + e != m) {
            return Err(ConstructError::Unsupported(format!("T2 needs t >= 4, e >= 2 and t + e = m (t={t}, e={e}, m={m})")));
        }
        Ok(ReprLayout { variant, m, n, t, e, r, promises: PromiseSet::for_variant(variant, e) })
    }

    pub fn index_base(&self) -> i32 {
        self.variant.index_base()
    }

    /// Total positions including the query.
    pub fn n_tokens(&self) -> usize {
        self.n + 1
    }

    /// Number of leading tokens that depend on y only (Alice's tokens in the protocol).
    pub fn alice_len(&self) -> usize {
        match self.variant {
            Variant::T0 => self.m,
            Variant::T1 => self.m + 2,
            Variant::T2 => 2 * self.t,
            Variant::T3 => self.m,
        }
    }

    /// Tokens for the y-dependent prefix.
    pub fn encode_y(&self, y: &[u8]) -> Vec<Token> {
        let m = self.m;
        let b = |i: usize| Token::bit(y[i - 1]);
        match self.variant {
            Variant::T0 => (1..=m).map(b).collect(),
            Variant::T1 => {
                let mut v = vec![Token::bit(0), b(1), b(1)];
                v.extend((2..=m).map(b));
                v
            }
            Variant::T2 => {
                let t = self.t;
                let mut v: Vec<Token> = (0..2 * t - 4).map(|i| self.t2_token(y, i)).collect();
                v.resize(2 * t, Token::bit(0));
                v
            }
            Variant::T3 => self.t3_half(y, false),
        }
    }

    /// Tokens for the z-dependent suffix, including every non-query token after Alice's prefix.
    pub fn encode_z(&self, z: &[u8]) -> Vec<Token> {
        let m = self.m;
        let b = |i: usize| Token::bit(z[i - 1]);
        let mut v: Vec<Token> = match self.variant {
            Variant::T0 => (1..=m).map(b).collect(),
            Variant::T1 => {
                let mut v = vec![b(1), b(1), Token::bit(0)];
                v.extend((2..=m).map(b));
                v
            }
            Variant::T2 => {
                let t = self.t;
                (2 * t..4 * t - 4).map(|i| self.t2_token(z, i)).collect()
            }
            Variant::T3 => self.t3_half(z, true),
        };
        let total = self.n - self.alice_len();
        v.resize(total, Token::bit(0));
        v
    }

    /// The full token sequence with the query placeholder last.
    pub fn encode(&self, inst: &EqInstance) -> Result<Vec<Token>, ConstructError> {
        if inst.m() != self.m {
            return Err(ConstructError::BadInstance(format!("instance has m={}, layout m={}", inst.m(), self.m)));
        }
        validate(inst, &self.promises).map_err(ConstructError::PromiseViolated)?;
        Ok(self.encode_unchecked(inst))
    }

    /// Encoding without promise validation (used for don't-care inputs).
    pub fn encode_unchecked(&self, inst: &EqInstance) -> Vec<Token> {
        let mut v = self.encode_y(&inst.y);
        v.extend(self.encode_z(&inst.z));
        v.push(Token::query());
        v
    }

    /// T² tuple at position `i`: (sign, exponent field, bit). `x` is y for `i < 2t`, else z.
    fn t2_token(&self, x: &[u8], i: usize) -> Token {
        let (t, e) = (self.t, self.e);
        let s = bits_str(&x[..1]);
        let field = bits_str(&x[1..=e]);
        // Fraction bit k is x_{e+1+k}.
        let f = |k: usize| x[e + k];
        let bit = if i < 2 * t {
            match i {
                0 => f(2),
                _ if i == 2 * t - 6 => 1 - f(t - 1),
                _ if i == 2 * t - 5 => f(1),
                _ if i % 2 == 1 => 0,
                _ => f(2 + i / 2),
            }
        } else {
            let j = i - 2 * t;
            match j {
                0 => f(t - 1),
                _ if j % 2 == 1 => f(j.div_ceil(2)),
                _ => 0,
            }
        };
        Token::tuple(&[s, field, bit.to_string()])
    }

    fn t3_half(&self, x: &[u8], is_z: bool) -> Vec<Token> {
        let (m, t, e, r) = (self.m, self.t, self.e, self.r);
        let e1 = bits_str(&x[..e - 1]);
        let e2 = bits_str(&x[e + t - 2..e + t - 2 + r]);
        let tail0 = e + t - 2 + r;
        let tup = |seg: &str, bit: u8| Token::tuple(&[seg.to_string(), bit.to_string()]);
        let mut v = vec![tup(&e1, 0)];
        v.extend((1..t).map(|i| tup(&e1, x[e + i - 2])));
        v.extend((1..t).map(|i| tup(&e2, x[tail0 + i - 1])));
        if is_z {
            v.resize(m + 1, Token::bit(0));
            v.push(tup(&e2, 0));
        } else {
            v.push(tup(&e2, 0));
            v.resize(m, Token::bit(0));
        }
        v
    }

    /// First exponent segment value `y_1 … y_{e-1}` (T³).
    pub fn e1(&self, x: &[u8]) -> u64 {
        bits_int(&x[..self.e - 1])
    }

    /// Second exponent segment value (T³).
    pub fn e2(&self, x: &[u8]) -> u64 {
        bits_int(&x[self.e + self.t - 2..self.e + self.t - 2 + self.r])
    }
}
