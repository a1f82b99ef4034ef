//! Compares bounded forward passes with the same networks evaluated in exact rational
//! arithmetic. The constructions rely on rounding, so their exact outputs differ.

use boundlab::attn::forward;
use boundlab::constructs::{build, ConstructionId, EqInstance, Params};
use boundlab::oracle::{check_consistency, exact_forward};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for (id, params) in [(ConstructionId::FxSimple, Params::m(5)), (ConstructionId::FxTight, Params::m(5))] {
        let c = build(id, &params)?;
        for (y, z) in [("01101", "01101"), ("01101", "01111")] {
            let x = c.spec.embed_tokens(&c.layout.encode(&EqInstance::parse(y, z)?)?)?;
            let bounded = forward(&c.spec, &x)?;
            let exact = exact_forward(&c.spec, &x)?;
            println!("{id} y={y} z={z}");
            println!("  bounded sa={} den={} out={:?}", bounded.sa[0], bounded.denominator.unwrap(), bounded.bit);
            println!("  exact   sa={} den={} out={:?}", exact.sa[0], exact.denominator.as_ref().unwrap(), exact.bit);
            println!("  {:?}", check_consistency(&c.spec, &x)?);
        }
    }
    Ok(())
}
