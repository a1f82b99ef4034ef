//! Post-training quantization of the tight construction to its own format family and to
//! common integer and floating formats, scored on every promise pair.

use boundlab::constructs::{build, ConstructionId, Params};
use boundlab::quantlab::{sweep, EvalSet, QuantFormat};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut subjects = vec![];
    for m in [7, 9] {
        let c = build(ConstructionId::FxTight, &Params::m(m))?;
        subjects.push((format!("fx-tight-m{m}"), c.spec, c.layout));
    }
    let formats: Vec<QuantFormat> = ["p", "p-1", "p-2", "int8", "fp16", "fp8-e4m3"]
        .iter()
        .map(|s| s.parse())
        .collect::<Result<_, _>>()?;
    let report = sweep(&subjects, &formats, EvalSet::Exhaustive, 0)?;
    print!("{}", report.to_csv(true));
    Ok(())
}
