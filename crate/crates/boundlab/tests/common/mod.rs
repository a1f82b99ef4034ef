#![allow(dead_code)]
//! Independent reference arithmetic built directly on big rationals.

use boundlab::bitnum::{ExactRat, Format, Num, Rounding};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::{Rng as _, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn pow2(k: i64) -> BigRational {
    if k >= 0 {
        BigRational::from_integer(BigInt::one() << k as usize)
    } else {
        BigRational::new(BigInt::one(), BigInt::one() << (-k) as usize)
    }
}

/// floor(log2 u) for u > 0.
pub fn flog2(u: &BigRational) -> i64 {
    let mut h = u.numer().bits() as i64 - u.denom().bits() as i64;
    while pow2(h) > *u {
        h -= 1;
    }
    while pow2(h + 1) <= *u {
        h += 1;
    }
    h
}

fn round_grid(u: &BigRational, lsb: i64, rounding: Rounding) -> BigRational {
    let ulp = pow2(lsb);
    let q = u / &ulp;
    let fl = q.numer().div_floor(q.denom());
    let rem = &q - BigRational::from_integer(fl.clone());
    let r = match rounding {
        Rounding::Truncate => fl,
        Rounding::NearestTiesTruncate => {
            if rem > BigRational::new(1.into(), 2.into()) {
                fl + 1
            } else {
                fl
            }
        }
    };
    BigRational::from_integer(r) * ulp
}

/// Reference rounding of an exact value into `fmt`.
pub fn ref_round(x: &ExactRat, fmt: &Format) -> ExactRat {
    let r = match x {
        ExactRat::Fin(r) => r,
        inf => return inf.clone(),
    };
    if r.is_zero() {
        return ExactRat::zero();
    }
    let neg = r.is_negative();
    let u = r.abs();
    let sgn = |v: BigRational| ExactRat::Fin(if neg { -v } else { v });
    match fmt {
        Format::Fx(f) => {
            let b = f.sig_bits() as i64;
            let lam = pow2(f.scale_log2 as i64);
            let v = &u / &lam;
            if v > pow2(b) - BigRational::one() {
                return ExactRat::inf(neg);
            }
            let h = flog2(&v);
            let lsb = (h - b + 1).max(-b);
            sgn(round_grid(&v, lsb, f.rounding) * lam)
        }
        Format::Fp(f) => {
            let q = f.q() as i64;
            let max = (BigRational::from_integer(2.into()) - pow2(-(f.t as i64 - 1))) * pow2(q);
            let min = pow2(-q);
            if u > max {
                return ExactRat::inf(neg);
            }
            if u < min {
                if f.rounding == Rounding::Truncate {
                    return ExactRat::zero();
                }
                return if u > &min / BigRational::from_integer(2.into()) { sgn(min) } else { ExactRat::zero() };
            }
            let h = flog2(&u);
            sgn(round_grid(&u, h - (f.t as i64 - 1), f.rounding))
        }
    }
}

pub fn ex(x: &Num) -> ExactRat {
    ExactRat::from(x)
}

pub fn ref_add(a: &Num, b: &Num, fmt: &Format) -> Option<ExactRat> {
    ex(a).add(&ex(b)).ok().map(|s| ref_round(&s, fmt))
}

pub fn ref_mul(a: &Num, b: &Num, fmt: &Format) -> Option<ExactRat> {
    ex(a).mul(&ex(b)).ok().map(|s| ref_round(&s, fmt))
}

pub fn ref_div(a: &Num, b: &Num, fmt: &Format) -> Option<ExactRat> {
    ex(a).div(&ex(b)).ok().map(|s| ref_round(&s, fmt))
}

/// Step-by-step exact replay of a left fold with reference rounding.
pub fn ref_sum_left(xs: &[Num], fmt: &Format) -> Option<ExactRat> {
    let mut acc = ref_round(&ex(&xs[0]), fmt);
    for x in &xs[1..] {
        acc = ref_round(&acc.add(&ex(x)).ok()?, fmt);
    }
    Some(acc)
}

/// Unit in the last place at the magnitude of `x` (for the error-bound property).
pub fn ulp_at(x: &BigRational, fmt: &Format) -> BigRational {
    match fmt {
        Format::Fx(f) => {
            let b = f.sig_bits() as i64;
            let lam = pow2(f.scale_log2 as i64);
            let v = x.abs() / &lam;
            let lsb = if v.is_zero() { -b } else { (flog2(&v) - b + 1).max(-b) };
            pow2(lsb) * lam
        }
        Format::Fp(f) => {
            let h = if x.is_zero() { -(f.q() as i64) } else { flog2(&x.abs()) };
            pow2(h - (f.t as i64 - 1))
        }
    }
}

pub type Rng = ChaCha8Rng;

pub fn rng(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A random finite value with a short mantissa near the dynamic range of `fmt`.
pub fn random_num(rng: &mut Rng, fmt: &Format) -> Num {
    if rng.gen_ratio(1, 16) {
        return Num::Zero;
    }
    let bits = rng.gen_range(1..=fmt.sig_bits() + 6);
    let mant = (rng.gen::<u64>() >> (64 - bits)) | 1;
    let (lo, hi) = match fmt {
        Format::Fx(f) => {
            let b = f.sig_bits() as i64;
            (f.scale_log2 as i64 - b - 4, f.scale_log2 as i64 + b + 1)
        }
        Format::Fp(f) => (-(f.q() as i64) - 3, f.q() as i64 + 1),
    };
    let top = rng.gen_range(lo..=hi);
    Num::from_parts(rng.gen(), mant, (top - bits as i64 + 1) as i32)
}

pub fn random_format(rng: &mut Rng, fp: bool, rounding: Rounding) -> Format {
    use boundlab::bitnum::{FpFormat, FxFormat};
    if fp {
        Format::Fp(FpFormat::new(rng.gen_range(2..=12), rng.gen_range(2..=7)).with_rounding(rounding))
    } else {
        Format::Fx(FxFormat::scaled(rng.gen_range(2..=20), rng.gen_range(-6..=6)).with_rounding(rounding))
    }
}
