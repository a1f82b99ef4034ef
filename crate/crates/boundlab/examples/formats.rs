//! Fixed-point and floating-point formats: rounding, saturation, field views and
//! left-to-right folds.

use boundlab::bitnum::*;

fn main() -> Result<(), BitnumError> {
    let fx: Format = "fx:p=5,scale=2^0,round=nearest".parse()?;
    let fp = Format::Fp(FpFormat::new(4, 3));
    for f in [&fx, &fp] {
        println!("{f}: max {} min positive {}", f.max_value().to_binary(), f.min_positive().to_binary());
    }

    let x: Num = "75/2^4".parse()?;
    for r in [Rounding::NearestTiesTruncate, Rounding::Truncate] {
        let f = Format::Fx(FxFormat::new(5).with_rounding(r));
        println!("round {} at p=5 ({}): {}", x.to_binary(), r.as_str(), f.round_num(&x).to_binary());
    }

    let big = Num::from_int(1000);
    println!("1000 in {fx} saturates to {}", fx.round_num(&big));
    println!("1000 in {fp} rounds to {}", fp.round_num(&big).to_binary());

    let v = fp.round_num(&"4.625".parse()?);
    if let (Format::Fp(f), Some(fields)) = (fp, FpFields::encode(&v, &FpFormat::new(4, 3))) {
        println!("{} = {fields:?} (decodes to {})", v.to_binary(), fields.decode(&f).to_binary());
    }

    let xs: Vec<Num> = ["1", "1/2^3", "1/2^3", "1/2^3", "1/2^3"].iter().map(|s| s.parse()).collect::<Result<_, _>>()?;
    let mut rev = xs.clone();
    rev.reverse();
    let f = Format::Fx(FxFormat::new(4));
    println!("sum small-last {} vs small-first {}", sum_left(&xs, &f)?.to_binary(), sum_left(&rev, &f)?.to_binary());

    println!("exp of logit -3 in {fp}: {}", exp_logit(&Logit::Value(Num::from_int(-3)), &fp)?.to_binary());
    println!("exp of logit 9 in {fp}: {}", exp_logit(&Logit::Value(Num::from_int(9)), &fp)?);
    Ok(())
}
