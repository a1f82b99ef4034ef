use num_integer::Integer;
use num_traits::{Signed, Zero};

use super::exact::ExactRat;
use super::format::{Format, Wide};
use super::num::Num;
use super::BitnumError;

fn parts(x: &Num) -> (bool, u64, i32) {
    match *x {
        Num::Fin { neg, mant, exp } => (neg, mant, exp),
        _ => unreachable!("parts of a non-finite value"),
    }
}

fn bits(m: u64) -> i32 {
    64 - m.leading_zeros() as i32
}

/// Exact sum of two finite nonzero values, truncated to 127 bits with a sticky flag.
fn add_wide(a: &Num, b: &Num) -> Wide {
    let (mut a, mut b) = (*a, *b);
    if a.abs() < b.abs() {
        std::mem::swap(&mut a, &mut b);
    }
    let (na, ma, ea) = parts(&a);
    let (nb, mb, eb) = parts(&b);
    // Place a's leading bit at position 126.
    let top_a = ea + bits(ma) - 1;
    let base = top_a - 126;
    let amag = (ma as u128) << (ea - base) as u32;
    let (bmag, lost) = if eb >= base {
        ((mb as u128) << (eb - base) as u32, false)
    } else {
        let s = (base - eb) as u32;
        if s >= 64 {
            (0, true)
        } else {
            ((mb >> s) as u128, mb & ((1u64 << s) - 1) != 0)
        }
    };
    if na == nb {
        Wide { neg: na, mag: amag + bmag, exp: base, sticky: lost }
    } else if lost {
        Wide { neg: na, mag: amag - bmag - 1, exp: base, sticky: true }
    } else {
        Wide { neg: na, mag: amag - bmag, exp: base, sticky: false }
    }
}

/// `a + b` rounded into `fmt`.
pub fn add(a: &Num, b: &Num, fmt: &Format) -> Result<Num, BitnumError> {
    match (a, b) {
        (Num::PosInf, Num::NegInf) | (Num::NegInf, Num::PosInf) => Err(BitnumError::IndeterminateForm("inf - inf")),
        (x, _) if x.is_inf() => Ok(*x),
        (_, y) if y.is_inf() => Ok(*y),
        (Num::Zero, y) => Ok(fmt.round_num(y)),
        (x, Num::Zero) => Ok(fmt.round_num(x)),
        (x, y) => Ok(fmt.round_wide(&add_wide(x, y))),
    }
}

/// `a - b` rounded into `fmt`.
pub fn sub(a: &Num, b: &Num, fmt: &Format) -> Result<Num, BitnumError> {
    add(a, &b.neg(), fmt)
}

/// `a · b` rounded into `fmt`.
pub fn mul(a: &Num, b: &Num, fmt: &Format) -> Result<Num, BitnumError> {
    if a.is_inf() || b.is_inf() {
        if a.is_zero() || b.is_zero() {
            return Err(BitnumError::IndeterminateForm("0 * inf"));
        }
        return Ok(Num::inf(a.is_neg() != b.is_neg()));
    }
    if a.is_zero() || b.is_zero() {
        return Ok(Num::Zero);
    }
    let (na, ma, ea) = parts(a);
    let (nb, mb, eb) = parts(b);
    let w = Wide { neg: na != nb, mag: ma as u128 * mb as u128, exp: ea + eb, sticky: false };
    Ok(fmt.round_wide(&w))
}

/// `a / b` rounded into `fmt`.
pub fn div(a: &Num, b: &Num, fmt: &Format) -> Result<Num, BitnumError> {
    match (a.is_inf(), b.is_inf()) {
        (true, true) => return Err(BitnumError::IndeterminateForm("inf / inf")),
        (true, false) => return Ok(Num::inf(a.is_neg() != b.is_neg())),
        (false, true) => return Ok(Num::Zero),
        _ => {}
    }
    if b.is_zero() {
        if a.is_zero() {
            return Err(BitnumError::IndeterminateForm("0 / 0"));
        }
        return Ok(Num::inf(a.is_neg()));
    }
    if a.is_zero() {
        return Ok(Num::Zero);
    }
    let (na, ma, ea) = parts(a);
    let (nb, mb, eb) = parts(b);
    // Numerator leading bit at 126 leaves at least 63 quotient bits.
    let shift = 127 - bits(ma);
    let n = (ma as u128) << shift as u32;
    let d = mb as u128;
    let w = Wide { neg: na != nb, mag: n / d, exp: ea - shift - eb, sticky: n % d != 0 };
    Ok(fmt.round_wide(&w))
}

/// Rectified linear unit; `relu(-inf) = 0`.
pub fn relu(x: &Num) -> Num {
    if x.is_neg() {
        Num::Zero
    } else {
        *x
    }
}

/// Left fold `((x1 + x2) + x3) + …`, rounding after every step.
pub fn sum_left<'a, I>(xs: I, fmt: &Format) -> Result<Num, BitnumError>
where
    I: IntoIterator<Item = &'a Num>,
{
    let mut it = xs.into_iter();
    let first = it.next().ok_or(BitnumError::EmptySequence)?;
    let mut acc = fmt.round_num(first);
    for x in it {
        acc = add(&acc, x, fmt)?;
    }
    Ok(acc)
}

/// Left fold of products, rounding after every step.
pub fn prod_left<'a, I>(xs: I, fmt: &Format) -> Result<Num, BitnumError>
where
    I: IntoIterator<Item = &'a Num>,
{
    let mut it = xs.into_iter();
    let first = it.next().ok_or(BitnumError::EmptySequence)?;
    let mut acc = fmt.round_num(first);
    for x in it {
        acc = mul(&acc, x, fmt)?;
    }
    Ok(acc)
}

/// `Σ_k xs[k]·ws[k]` with every product and every partial sum rounded, ascending `k`.
pub fn dot_left(xs: &[Num], ws: &[Num], fmt: &Format) -> Result<Num, BitnumError> {
    debug_assert_eq!(xs.len(), ws.len());
    let mut acc: Option<Num> = None;
    for (x, w) in xs.iter().zip(ws) {
        let p = mul(x, w, fmt)?;
        acc = Some(match acc {
            None => p,
            Some(a) => add(&a, &p, fmt)?,
        });
    }
    acc.ok_or(BitnumError::EmptySequence)
}

/// Rounds an arbitrary exact value into `fmt`.
pub fn round_exact(x: &ExactRat, fmt: &Format) -> Num {
    let r = match x {
        ExactRat::PosInf => return Num::PosInf,
        ExactRat::NegInf => return Num::NegInf,
        ExactRat::Fin(r) => r,
    };
    if r.is_zero() {
        return Num::Zero;
    }
    let neg = r.is_negative();
    let n = r.numer().abs();
    let d = r.denom().clone();
    // Choose s so that floor(n·2^s / d) has 126 or 127 bits.
    let s = 127 - (n.bits() as i64 - d.bits() as i64) - 1;
    let (num, den) = if s >= 0 { (n << s as usize, d) } else { (n, d << (-s) as usize) };
    let (q, rem) = num.div_rem(&den);
    let mag: u128 = u128::try_from(&q).expect("quotient fits in 128 bits");
    let w = Wide { neg, mag, exp: -(s as i32), sticky: !rem.is_zero() };
    fmt.round_wide(&w)
}
