mod common;

use boundlab::attn::forward_tokens;
use boundlab::bitnum::{ExactRat, Format, FxFormat, Num, Rounding};
use boundlab::constructs::{build, ConstructionId, EqInstance, Params};
use boundlab::lintens::*;
use common::*;
use proptest::prelude::*;

fn fx(p: u32) -> Format {
    Format::Fx(FxFormat::new(p))
}

fn ints(v: &[i64]) -> Vec<Num> {
    v.iter().map(|&x| Num::from_int(x)).collect()
}

#[test]
fn identity_is_neutral() {
    let f = fx(8);
    let b = BMat::from_rows(&[ints(&[3, -5, 7]), ints(&[0, 1, -2])], f).unwrap();
    assert_eq!(matmul_left(&BMat::identity(2, f), &b, &f).unwrap(), b);
}

#[test]
fn intermediate_overflow_saturates() {
    let f = fx(4);
    let a = BMat::from_rows(&[ints(&[6, 6, -6])], f).unwrap();
    let b = BMat::column(ints(&[1, 1, 1]), f);
    // 6 + 6 overflows the 3-bit range and stays infinite.
    assert_eq!(matmul_left(&a, &b, &f).unwrap().get(0, 0), Num::PosInf);
}

#[test]
fn shape_and_index_errors() {
    let f = fx(5);
    let a = BMat::zeros(2, 3, f);
    assert!(matches!(matmul_left(&a, &a, &f), Err(LintensError::ShapeMismatch(_))));
    assert!(matches!(row_sum_left(&a, 2, &f), Err(LintensError::IndexOutOfRange { index: 2, len: 2 })));
    assert!(BMat::new(2, 2, ints(&[1]), f).is_err());
}

#[test]
fn row_sums() {
    let f = fx(8);
    assert_eq!(row_sum_left(&BMat::zeros(1, 5, f), 0, &f).unwrap(), Num::Zero);
    let ones = BMat::from_rows(&[ints(&[1; 9])], f).unwrap();
    assert_eq!(row_sum_left(&ones, 0, &f).unwrap(), Num::from_int(9));
}

#[test]
fn summation_order_matters() {
    let f = Format::Fx(FxFormat::new(3).with_significand(3).with_rounding(Rounding::Truncate));
    let fwd = BMat::from_rows(&[vec![Num::from_int(2), Num::dyadic(5, 2), Num::dyadic(7, 2)]], f).unwrap();
    let rev = BMat::from_rows(&[vec![Num::dyadic(7, 2), Num::dyadic(5, 2), Num::from_int(2)]], f).unwrap();
    assert_ne!(row_sum_left(&fwd, 0, &f).unwrap(), row_sum_left(&rev, 0, &f).unwrap());
    assert_eq!(row_sum_left(&fwd, 0, &f).unwrap(), row_sum_left(&fwd, 0, &f).unwrap());
}

#[test]
fn query_column_of_simple_construction() {
    let c = build(ConstructionId::FxSimple, &Params::m(3)).unwrap();
    let inst = EqInstance::parse("011", "011").unwrap();
    let x = c.spec.embed_tokens(&c.layout.encode(&inst).unwrap()).unwrap();
    let q = matmul_left(&x, &c.spec.wq, &c.spec.num_fmt).unwrap();
    assert_eq!(q.cols, 1);
    for i in 0..x.rows {
        assert_eq!(q.row(i), c.spec.query(x.row(i)).unwrap().as_slice());
    }
    // The first embedding coordinate is the constant 1 that the query weight reads.
    assert!(q.entries.iter().all(|v| *v == Num::ONE));
}

#[test]
fn tight_denominator_row() {
    for m in [5usize, 7, 9] {
        let c = build(ConstructionId::FxTight, &Params::m(m)).unwrap();
        let inst = EqInstance::parse(&"1".repeat(m), &"1".repeat(m)).unwrap();
        let tr = forward_tokens(&c.spec, &c.layout.encode(&inst).unwrap()).unwrap();
        let a = BMat::new(1, tr.a_den.len(), tr.a_den.clone(), c.spec.den_fmt).unwrap();
        let d = row_sum_left(&a, 0, &c.spec.den_fmt).unwrap();
        assert_eq!(d, Num::from_int((1 << (m.div_ceil(2) - 1)) - 1), "m={m}");
        assert_eq!(Some(d), tr.denominator);
    }
}

fn reference_entry(a: &[Num], b: &[Num], f: &Format) -> Option<ExactRat> {
    let mut acc = ref_mul(&a[0], &b[0], f)?;
    for k in 1..a.len() {
        let p = ref_mul(&a[k], &b[k], f)?;
        acc = ref_round(&acc.add(&p).ok()?, f);
    }
    Some(acc)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn matmul_matches_replay(seed in any::<u64>(), fp in any::<bool>(), trunc in any::<bool>(),
                             r in 1usize..4, k in 1usize..5, c in 1usize..4) {
        let mut rng = rng(seed);
        let rounding = if trunc { Rounding::Truncate } else { Rounding::NearestTiesTruncate };
        let f = random_format(&mut rng, fp, rounding);
        let mut mat = |rows: usize, cols: usize| {
            let v: Vec<Num> = (0..rows * cols).map(|_| random_num(&mut rng, &f)).collect();
            BMat::new(rows, cols, v, f).unwrap()
        };
        let (a, b) = (mat(r, k), mat(k, c));
        match matmul_left(&a, &b, &f) {
            Ok(out) => {
                for i in 0..r {
                    for j in 0..c {
                        prop_assert_eq!(Some(ExactRat::from(&out.get(i, j))), reference_entry(a.row(i), &b.col(j), &f));
                    }
                }
            }
            Err(LintensError::Scalar { row, col, .. }) => {
                prop_assert!(reference_entry(a.row(row), &b.col(col), &f).is_none());
            }
            Err(e) => prop_assert!(false, "{}", e),
        }
    }
}
