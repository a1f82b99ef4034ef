//! The seeded equality dataset and a quantized model's accuracy on it.

use boundlab::constructs::{build, bits_str, ConstructionId, Params};
use boundlab::oracle::Model;
use boundlab::quantlab::{eval_accuracy, gen_dataset, quantize_construction, QuantFormat};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let ds = gen_dataset(15, 10_000, 0);
    println!("m={} flips={} equal fraction={:.4}", ds.m, ds.flips, ds.equal_fraction());
    for p in ds.pairs.iter().take(4) {
        println!("  {} {} label={}", bits_str(&p.y), bits_str(&p.z), p.label);
    }
    let c = build(ConstructionId::FxTight, &Params::m(15))?;
    for f in [QuantFormat::Relative(0), QuantFormat::Relative(-1)] {
        let (qc, q) = quantize_construction(&c, f)?;
        let row = eval_accuracy(Model::from(&qc), &ds, true)?;
        println!("{f} ({}): {}/{} correct", q.format, row.correct, row.total);
    }
    Ok(())
}
