//! Exports a construction as a weights document, imports it back and verifies the copy.

use boundlab::constructs::{build, ConstructionId, Params};
use boundlab::oracle::{verify_model, Model, VerifyOptions};
use boundlab::quantlab::{export_weights, import_weights_str};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let c = build(ConstructionId::FpLinear, &Params::te(4, 3))?;
    let doc = export_weights(&c.spec, &c.layout);
    println!("{} bytes, first lines:", doc.len());
    for line in doc.lines().take(12) {
        println!("  {line}");
    }
    let imp = import_weights_str(&doc)?;
    println!("identical after round trip: {}", imp.spec == c.spec);
    let r = verify_model(Model { label: "imported", spec: &imp.spec, layout: &imp.layout }, &VerifyOptions::default())?;
    println!("{r}");

    let broken = doc.replacen("\"version\": 1", "\"version\": 2", 1);
    if let Err(e) = import_weights_str(&broken) {
        println!("rejected: {e}");
    }
    Ok(())
}
