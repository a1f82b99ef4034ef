//! The floating-point constructions: linear attention checked exhaustively, softmax attention
//! on a seeded sample plus every single-bit-flip pair around 64 random strings.

use boundlab::constructs::{build, fp_softmax_shape, ConstructionId, Params};
use boundlab::oracle::{verify_construction, verify_sampled_construction, VerifyOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let opts = VerifyOptions { max_examples: 2, ..VerifyOptions::default() };
    for (t, e) in [(4, 3), (5, 3), (4, 4)] {
        let c = build(ConstructionId::FpLinear, &Params::te(t, e))?;
        println!("{}", verify_construction(&c, &opts)?);
    }
    let shape = fp_softmax_shape(4, 7)?;
    println!("softmax shape for (t,e)=(4,7): {shape:?}");
    let c = build(ConstructionId::FpSoftmax, &Params::te(4, 7))?;
    println!("{}", verify_sampled_construction(&c, 20_000, 7, &opts)?);
    Ok(())
}
