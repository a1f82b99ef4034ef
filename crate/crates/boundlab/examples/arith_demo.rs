//! The pinned worked examples: a product rounded to 4 significant bits, and a three-term
//! sum whose value depends on how it is grouped.

fn main() {
    print!("{}", boundlab::bitnum::arith_demo());
}
