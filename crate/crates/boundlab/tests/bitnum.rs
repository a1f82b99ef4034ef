mod common;

use boundlab::bitnum::*;
use common::*;
use num_rational::BigRational;
use num_traits::Signed;
use proptest::prelude::*;

fn fx(p: u32) -> Format {
    Format::Fx(FxFormat::new(p))
}

fn n(s: &str) -> Num {
    s.parse().unwrap()
}

#[test]
fn worked_multiplication_rounds_to_nearest() {
    let f = Format::Fx(FxFormat::new(4).with_significand(4));
    let a = Num::dyadic(0b1101, 3);
    let b = Num::dyadic(0b1011, 2);
    assert_eq!(mul(&a, &b, &f).unwrap(), Num::dyadic(9, 1));
    assert_eq!(round_exact(&ExactRat::ratio(143, 32), &f), Num::dyadic(9, 1));
}

#[test]
fn worked_associativity_under_truncation() {
    let f = Format::Fx(FxFormat::new(3).with_significand(3).with_rounding(Rounding::Truncate));
    let xs = [Num::from_int(2), Num::dyadic(5, 2), Num::dyadic(7, 2)];
    assert_eq!(sum_left(&xs, &f).unwrap(), Num::from_int(4));
    let inner = add(&xs[1], &xs[2], &f).unwrap();
    assert_eq!(add(&xs[0], &inner, &f).unwrap(), Num::from_int(5));
}

#[test]
fn fixed_point_examples() {
    assert_eq!(round_exact(&ExactRat::ratio(75, 16), &fx(5)), Num::dyadic(9, 1));
    assert_eq!(round_exact(&ExactRat::zero(), &fx(5)), Num::Zero);
    assert_eq!(div(&Num::from_int(7), &Num::dyadic(7, 1), &fx(5)).unwrap(), Num::from_int(2));
    let x = Num::dyadic(13, 2);
    assert_eq!(add(&x, &Num::Zero, &fx(5)).unwrap(), x);
    assert_eq!(sum_left(&[x], &fx(5)).unwrap(), x);
}

#[test]
fn floating_point_examples() {
    let f = Format::Fp(FpFormat::new(4, 3));
    assert_eq!(round_exact(&ExactRat::from_int(1), &f), Num::ONE);
    assert_eq!(add(&Num::dyadic(7, 2), &Num::dyadic(23, 3), &f).unwrap(), Num::dyadic(9, 1));
    assert_eq!(round_exact(&ExactRat::from_int(16), &f), Num::PosInf);
    let ff = FpFormat::new(4, 3);
    assert_eq!(FpFields::encode(&Num::ONE, &ff), Some(FpFields { mant_sign: false, fraction: 0, exp_sign: false, exp_mag: 0 }));
}

#[test]
fn fixed_point_saturates_and_underflows() {
    let f = fx(4);
    assert_eq!(round_exact(&ExactRat::from_int(8), &f), Num::PosInf);
    assert_eq!(round_exact(&ExactRat::from_int(-8), &f), Num::NegInf);
    assert_eq!(round_exact(&ExactRat::ratio(15, 2), &f), Num::PosInf);
    assert_eq!(round_exact(&ExactRat::ratio(13, 2), &f), Num::from_int(6));
    // Smallest positive value is 2^-3; a tie at 2^-4 rounds to zero.
    assert_eq!(round_exact(&ExactRat::ratio(1, 16), &f), Num::Zero);
    assert_eq!(round_exact(&ExactRat::ratio(3, 32), &f), Num::dyadic(1, 3));
}

#[test]
fn inf_algebra() {
    let f = fx(6);
    let one = Num::ONE;
    assert_eq!(add(&Num::PosInf, &one, &f).unwrap(), Num::PosInf);
    assert!(matches!(add(&Num::PosInf, &Num::NegInf, &f), Err(BitnumError::IndeterminateForm(_))));
    assert!(mul(&Num::Zero, &Num::PosInf, &f).is_err());
    assert_eq!(mul(&Num::from_int(-2), &Num::PosInf, &f).unwrap(), Num::NegInf);
    assert_eq!(div(&one, &Num::PosInf, &f).unwrap(), Num::Zero);
    assert_eq!(div(&one.neg(), &Num::Zero, &f).unwrap(), Num::NegInf);
    assert!(div(&Num::Zero, &Num::Zero, &f).is_err());
    assert!(div(&Num::PosInf, &Num::NegInf, &f).is_err());
    assert_eq!(relu(&Num::NegInf), Num::Zero);
    assert_eq!(relu(&Num::PosInf), Num::PosInf);
}

#[test]
fn exp_logit_examples() {
    let f = fx(9);
    assert_eq!(exp_logit(&Logit::Value(Num::Zero), &f).unwrap(), Num::ONE);
    assert_eq!(exp_logit(&Logit::NegLarge, &f).unwrap(), Num::Zero);
    assert_eq!(exp_logit(&Logit::Value(Num::from_int(-6)), &f).unwrap(), Num::pow2(-6));
    let coarse = Format::Fx(FxFormat::scaled(9, 4));
    assert_eq!(exp_logit(&Logit::Value(Num::from_int(-6)), &coarse).unwrap(), Num::Zero);
    assert_eq!(exp_logit(&Logit::Value(Num::from_int(40)), &f).unwrap(), Num::PosInf);
    assert!(exp_logit(&Logit::Value(Num::dyadic(1, 1)), &f).is_err());
}

#[test]
fn scalar_text_round_trip() {
    for s in ["0", "+inf", "-inf", "+9/2^1", "-1/2^7", "+12/2^0"] {
        let x = n(s);
        let again: Num = x.to_string().parse().unwrap();
        assert_eq!(again, x, "{s}");
    }
    assert_eq!(n("+12/2^0"), Num::from_int(12));
    assert_eq!(n("+12/2^2"), Num::from_int(3));
    assert_eq!(n("0.1"), Num::from_f64(0.1).unwrap());
    assert_eq!(n("-2.5"), Num::dyadic(-5, 1));
    assert!("1/3".parse::<Num>().is_err());
}

#[test]
fn descriptor_round_trip() {
    for s in ["fx:p=5,scale=2^-1,round=nearest", "fx:p=4,scale=2^0,round=trunc,sig=4", "fp:t=4,e=7,round=nearest"] {
        let f: Format = s.parse().unwrap();
        assert_eq!(f.to_string(), s);
    }
    assert!("fx:p=1,scale=2^0,round=nearest".parse::<Format>().is_err());
    assert!("fp:t=4".parse::<Format>().is_err());
}

#[test]
fn precision_delta_moves_p_or_t() {
    let f: Format = "fx:p=5,scale=2^1,round=nearest".parse().unwrap();
    assert_eq!(f.with_precision_delta(-1).unwrap().to_string(), "fx:p=4,scale=2^1,round=nearest");
    let g = Format::Fp(FpFormat::new(4, 3));
    assert_eq!(g.with_precision_delta(-1).unwrap(), Format::Fp(FpFormat::new(3, 3)));
    assert!(Format::Fx(FxFormat::new(2)).with_precision_delta(-1).is_err());
}

fn format_strategy() -> impl Strategy<Value = Format> {
    let rounding = prop_oneof![Just(Rounding::NearestTiesTruncate), Just(Rounding::Truncate)];
    prop_oneof![
        (2u32..20, -6i32..6, rounding.clone()).prop_map(|(p, s, r)| Format::Fx(FxFormat::scaled(p, s).with_rounding(r))),
        (2u32..12, 2u32..7, rounding).prop_map(|(t, e, r)| Format::Fp(FpFormat::new(t, e).with_rounding(r))),
    ]
}

fn case() -> impl Strategy<Value = (Format, u64)> {
    (format_strategy(), any::<u64>())
}

proptest! {
    #[test]
    fn rounding_matches_reference((f, seed) in case()) {
        let mut rng = rng(seed);
        let x = random_num(&mut rng, &f);
        prop_assert_eq!(ExactRat::from(f.round_num(&x)), ref_round(&ex(&x), &f));
    }

    #[test]
    fn round_trip((f, seed) in case()) {
        let mut rng = rng(seed);
        let v = f.round_num(&random_num(&mut rng, &f));
        prop_assert_eq!(f.round_num(&v), v);
        prop_assert!(f.contains(&v));
    }

    #[test]
    fn error_within_ulp_bound((f, seed) in case()) {
        let mut rng = rng(seed);
        let x = random_num(&mut rng, &f);
        let r = f.round_num(&x);
        let in_range = |v: &BigRational| *v <= f.max_value().to_rat().unwrap() && *v >= f.min_positive().to_rat().unwrap();
        if r.is_finite() && !x.is_zero() && in_range(&x.to_rat().unwrap().abs()) {
            let err = (r.to_rat().unwrap() - x.to_rat().unwrap()).abs();
            let ulp = ulp_at(&x.to_rat().unwrap().abs(), &f);
            let bound = match f.rounding() {
                Rounding::NearestTiesTruncate => ulp / BigRational::from_integer(2.into()),
                Rounding::Truncate => ulp,
            };
            prop_assert!(err <= bound, "x={} r={}", x, r);
        }
    }

    #[test]
    fn monotone((f, seed) in case()) {
        let mut rng = rng(seed);
        let (a, b) = (random_num(&mut rng, &f), random_num(&mut rng, &f));
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(f.round_num(&lo) <= f.round_num(&hi));
    }

    #[test]
    fn binary_ops_match_reference((f, seed) in case()) {
        let mut rng = rng(seed);
        let (a, b) = (f.round_num(&random_num(&mut rng, &f)), f.round_num(&random_num(&mut rng, &f)));
        prop_assert_eq!(add(&a, &b, &f).ok().map(ExactRat::from), ref_add(&a, &b, &f));
        prop_assert_eq!(mul(&a, &b, &f).ok().map(ExactRat::from), ref_mul(&a, &b, &f));
        prop_assert_eq!(div(&a, &b, &f).ok().map(ExactRat::from), ref_div(&a, &b, &f));
    }

    #[test]
    fn sum_left_matches_replay((f, seed) in case(), len in 1usize..12) {
        let mut rng = rng(seed);
        let xs: Vec<Num> = (0..len).map(|_| f.round_num(&random_num(&mut rng, &f))).collect();
        prop_assert_eq!(sum_left(&xs, &f).ok().map(ExactRat::from), ref_sum_left(&xs, &f));
    }

    #[test]
    fn inf_absorbs((f, seed) in case()) {
        let mut rng = rng(seed);
        let x = f.round_num(&random_num(&mut rng, &f));
        if x.is_finite() {
            prop_assert_eq!(add(&Num::PosInf, &x, &f).unwrap(), Num::PosInf);
            prop_assert_eq!(add(&x, &Num::NegInf, &f).unwrap(), Num::NegInf);
        }
    }

    #[test]
    fn fields_round_trip((f, seed) in case()) {
        let mut rng = rng(seed);
        let v = f.round_num(&random_num(&mut rng, &f));
        match f {
            Format::Fx(ff) if v.is_finite() => {
                let enc = FxFields::encode(&v, &ff).unwrap();
                prop_assert!(enc.significand < 1u64 << ff.sig_bits());
                prop_assert_eq!(enc.decode(&ff), v);
            }
            Format::Fp(ff) if v.is_finite() && !v.is_zero() => {
                let enc = FpFields::encode(&v, &ff).unwrap();
                prop_assert_eq!(enc.decode(&ff), v);
            }
            _ => {}
        }
    }
}
