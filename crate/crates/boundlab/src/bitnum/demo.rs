use std::fmt::Write;

use super::{add, mul, round_exact, sum_left, ExactRat, Format, FxFormat, Num, Rounding};

fn show(x: &Num) -> String {
    format!("{} ({})", x.to_binary(), x.to_f64())
}

fn fmt_sig(p: u32, rounding: Rounding) -> Format {
    Format::Fx(FxFormat::new(p).with_significand(p).with_rounding(rounding))
}

const POLICIES: [Rounding; 2] = [Rounding::NearestTiesTruncate, Rounding::Truncate];

/// The pinned worked examples: one rounded product and a sum whose value depends on grouping.
pub fn arith_demo() -> String {
    let mut s = String::new();
    let a = Num::dyadic(0b1101, 3);
    let b = Num::dyadic(0b1011, 2);
    let exact = ExactRat::Fin(a.to_rat().unwrap() * b.to_rat().unwrap());
    let exact_num = exact.to_num().expect("dyadic product");
    writeln!(s, "product {} * {} at p=4, 4 significant bits", a.to_binary(), b.to_binary()).unwrap();
    writeln!(s, "  exact: {}", show(&exact_num)).unwrap();
    for r in POLICIES {
        let f = fmt_sig(4, r);
        let v = mul(&a, &b, &f).expect("finite product");
        debug_assert_eq!(v, round_exact(&exact, &f));
        writeln!(s, "  {}: {}", r.as_str(), show(&v)).unwrap();
    }
    let xs = [Num::from_int(2), Num::dyadic(5, 2), Num::dyadic(7, 2)];
    let names: Vec<String> = xs.iter().map(Num::to_binary).collect();
    writeln!(s, "sum {} at p=3, 3 significant bits", names.join(" + ")).unwrap();
    for r in POLICIES {
        let f = fmt_sig(3, r);
        let left = sum_left(&xs, &f).expect("finite sum");
        let inner = add(&xs[1], &xs[2], &f).expect("finite sum");
        let right = add(&xs[0], &inner, &f).expect("finite sum");
        writeln!(s, "  {}:", r.as_str()).unwrap();
        writeln!(s, "    left: {}", show(&left)).unwrap();
        writeln!(s, "    right: {}", show(&right)).unwrap();
    }
    s
}
