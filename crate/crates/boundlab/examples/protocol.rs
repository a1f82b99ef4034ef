//! The one-way protocol obtained by splitting the attention folds between Alice and Bob.

use boundlab::commsim::{check_protocol, run_protocol};
use boundlab::constructs::{build, ConstructionId, EqInstance, Params};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let c = build(ConstructionId::FxTight, &Params::m(7))?;
    for (y, z) in [("0101101", "0101101"), ("0101101", "0111101")] {
        let run = run_protocol(&c, &EqInstance::parse(y, z)?, c.spec.kind)?;
        println!("y={y} z={z}: {run}");
    }
    for m in [5, 7, 9] {
        let c = build(ConstructionId::FxTight, &Params::m(m))?;
        println!("{}", check_protocol(&c, 1 << 20)?);
    }
    let c = build(ConstructionId::FpLinear, &Params::te(4, 3))?;
    println!("{}", check_protocol(&c, 1 << 20)?);
    Ok(())
}
