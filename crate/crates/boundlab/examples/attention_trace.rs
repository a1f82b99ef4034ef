//! Builds the tight fixed-point construction and traces one forward pass token by token.

use boundlab::attn::forward_tokens;
use boundlab::constructs::{build, ConstructionId, EqInstance, Params};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let c = build(ConstructionId::FxTight, &Params::m(5))?;
    for (y, z) in [("01101", "01101"), ("01101", "01111")] {
        let inst = EqInstance::parse(y, z)?;
        let tokens = c.layout.encode(&inst)?;
        let tr = forward_tokens(&c.spec, &tokens)?;
        println!("y={y} z={z}");
        for (j, tok) in tokens.iter().enumerate() {
            println!("  {j:2} {:>6} logit={:<10} weight={:<10} num={}", tok.0, tr.logits[j], tr.a_num[j], tr.num_partials[j][0]);
        }
        println!("  denominator={} sa={} output={:?}", tr.denominator.unwrap(), tr.sa[0], tr.bit);
    }
    Ok(())
}
