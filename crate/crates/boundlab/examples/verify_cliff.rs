//! Exhaustive verification of both fixed-point constructions at their native precision and
//! one bit below it.

use boundlab::constructs::{ConstructionId, Params};
use boundlab::oracle::{verify_exhaustive, VerifyOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let opts = VerifyOptions { max_examples: 1, ..VerifyOptions::default() };
    for id in [ConstructionId::FxSimple, ConstructionId::FxTight] {
        for m in [5, 7, 9] {
            for delta in [0, -1] {
                let r = verify_exhaustive(id, &Params::m(m).delta(delta), &opts)?;
                println!("{r}");
            }
        }
    }
    Ok(())
}
