//! Fooling-set sizes against the closed form, and a pigeonhole witness for a short message.

use boundlab::commsim::{enumerate_fooling, truncate_message, verify_pigeonhole};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    println!("m,e,size,bound,formula,matches");
    for m in 4..=10 {
        for e in 2..m {
            let r = enumerate_fooling(m, e)?;
            println!("{},{},{},{},{},{}", r.m, r.e, r.enumerated, r.bound, r.formula, r.formula_matches());
        }
    }
    if let Some(w) = verify_pigeonhole(8, truncate_message)? {
        println!("{w}");
    }
    Ok(())
}
