use boundlab::bitnum::{Format, FxFormat, Num};
use boundlab::constructs::{build, ConstructionId, Params};
use boundlab::lintens::BMat;
use boundlab::oracle::Model;
use boundlab::quantlab::*;
use proptest::prelude::*;

#[test]
fn format_names() {
    for (s, q) in [
        ("int8", QuantFormat::INT8),
        ("fp16", QuantFormat::FP16),
        ("fp8-e5m2", QuantFormat::FP8_E5M2),
        ("fp8-e4m3", QuantFormat::FP8_E4M3),
        ("e3m2", QuantFormat::Float { exp: 3, man: 2 }),
        ("p", QuantFormat::Relative(0)),
        ("p-1", QuantFormat::Relative(-1)),
        ("p+2", QuantFormat::Relative(2)),
    ] {
        assert_eq!(s.parse::<QuantFormat>().unwrap(), q);
        assert_eq!(q.to_string(), s);
    }
    assert_eq!("INT4".parse::<QuantFormat>().unwrap(), QuantFormat::INT4);
    for bad in ["int1", "int", "fp7", "e1m2", "e3m0", "q8"] {
        assert!(bad.parse::<QuantFormat>().is_err(), "{bad}");
    }
}

#[test]
fn int4_calibration() {
    assert_eq!(calibrate_scale(&Num::from_f64(1.2).unwrap(), 4), Some(-2));
    assert_eq!(calibrate_scale(&Num::Zero, 4), None);
    let f = Format::Fx(FxFormat::scaled(4, -2));
    let got: Vec<f64> = [0.3, -1.2, 0.7].iter().map(|&v| f.round_num(&Num::from_f64(v).unwrap()).to_f64()).collect();
    assert_eq!(got, vec![0.3125, -1.25, 0.75]);
    // Largest magnitude never saturates after calibration.
    for v in [0.001, 0.3, 1.0, 7.0, 100.5, 1e6] {
        let x = Num::from_f64(v).unwrap();
        let s = calibrate_scale(&x, 6).unwrap();
        assert!(Format::Fx(FxFormat::scaled(6, s)).round_num(&x).is_finite(), "{v}");
    }
}

#[test]
fn native_precision_is_bit_identical() {
    for id in [ConstructionId::FxSimple, ConstructionId::FxTight] {
        let c = build(id, &Params::m(9)).unwrap();
        let q = quantize_spec(&c.spec, QuantFormat::Relative(0)).unwrap();
        assert_eq!(q.spec, c.spec, "{id}");
    }
    let c = build(ConstructionId::FpLinear, &Params::te(4, 3)).unwrap();
    assert_eq!(quantize_spec(&c.spec, "p".parse().unwrap()).unwrap().spec, c.spec);
}

#[test]
fn quantizing_twice_changes_nothing() {
    let c = build(ConstructionId::FxTight, &Params::m(13)).unwrap();
    for f in [QuantFormat::INT8, QuantFormat::INT6, QuantFormat::INT4, QuantFormat::FP16, QuantFormat::FP8_E4M3] {
        let once = quantize_spec(&c.spec, f).unwrap().spec;
        let twice = quantize_spec(&once, f).unwrap().spec;
        assert_eq!(once, twice, "{f}");
    }
}

#[test]
fn all_zero_tensor_is_noted() {
    let mut c = build(ConstructionId::FxTight, &Params::m(5)).unwrap();
    c.spec.wv = BMat::zeros(c.spec.wv.rows, 1, c.spec.num_fmt);
    let q = quantize_spec(&c.spec, QuantFormat::INT8).unwrap();
    assert_eq!(q.notes, vec![QuantNote::DegenerateTensor("wv".into())]);
    assert!(q.spec.wv.entries.iter().all(Num::is_zero));
}

#[test]
fn invalid_targets() {
    let c = build(ConstructionId::FxSimple, &Params::m(5)).unwrap();
    assert!(matches!(quantize_spec(&c.spec, QuantFormat::Relative(-3)), Err(QuantError::BadFormat(_) | QuantError::InvalidTarget(_))));
}

#[test]
fn dataset_shape() {
    let ds = gen_dataset(16, 4000, 9);
    assert_eq!(ds.flips, 12);
    assert_eq!(ds.pairs.len(), 4000);
    for p in &ds.pairs {
        let d = p.y.iter().zip(&p.z).filter(|(a, b)| a != b).count();
        assert!(d == 0 || d == 12);
        assert_eq!(p.label, u8::from(d == 0));
    }
    assert!((ds.equal_fraction() - 0.5).abs() < 0.05);
    assert_eq!(gen_dataset(16, 4000, 9), ds);
    assert_ne!(gen_dataset(16, 4000, 10), ds);
    assert_eq!(gen_dataset(3, 5, 1).flips, 2);
    assert_eq!(gen_dataset(1, 1, 0).pairs.len(), 1);
}

#[test]
fn native_accuracy_on_dataset() {
    let c = build(ConstructionId::FxTight, &Params::m(13)).unwrap();
    let row = eval_accuracy(Model::from(&c), &gen_dataset(13, 5000, 1), true).unwrap();
    assert!(row.total > 0);
    assert_eq!(row.accuracy, 1.0);
    assert_eq!(row.capacity, 14);
}

#[test]
fn constant_model_scores_about_half() {
    let mut c = build(ConstructionId::FxSimple, &Params::m(9)).unwrap();
    let f = c.spec.out_fmt;
    c.spec.mlp.w2 = BMat::zeros(c.spec.mlp.w2.rows, 1, f);
    c.spec.mlp.b2 = vec![Num::ONE];
    let ds = gen_dataset(9, 4000, 3);
    let row = eval_accuracy(Model::from(&c), &ds, false).unwrap();
    assert_eq!(row.correct as usize, ds.pairs.iter().filter(|p| p.label == 1).count());
    assert!((row.accuracy - 0.5).abs() < 0.05);
}

#[test]
fn empty_sweep() {
    let c = build(ConstructionId::FxSimple, &Params::m(5)).unwrap();
    let r = sweep(&[("fx-simple".into(), c.spec, c.layout)], &[], EvalSet::Exhaustive, 0).unwrap();
    assert!(r.rows.is_empty());
    assert_eq!(r.to_csv(false), format!("{}\n", QuantRow::CSV_HEADER));
}

#[test]
fn sweep_rows_name_resolved_formats() {
    let c = build(ConstructionId::FxTight, &Params::m(7)).unwrap();
    let fmts = [QuantFormat::Relative(0), QuantFormat::Relative(-1)];
    let r = sweep(&[("fx-tight".into(), c.spec, c.layout)], &fmts, EvalSet::Exhaustive, 0).unwrap();
    let names: Vec<&str> = r.rows.iter().map(|x| x.format.as_str()).collect();
    assert_eq!(names, ["p/int4", "p-1/int3"]);
    assert_eq!(r.rows[0].accuracy, 1.0);
    assert!(r.rows[1].accuracy < 1.0);
    assert_eq!((r.rows[0].capacity, r.rows[1].capacity), (8, 6));
}

#[test]
fn weights_round_trip() {
    for (id, p) in [(ConstructionId::FxTight, Params::m(7)), (ConstructionId::FpLinear, Params::te(4, 3)), (ConstructionId::FpSoftmax, Params::te(4, 7))] {
        let c = build(id, &p).unwrap();
        let text = export_weights(&c.spec, &c.layout);
        let back = import_weights_str(&text).unwrap();
        assert_eq!(back.spec, c.spec, "{id}");
        assert_eq!(back.layout, c.layout, "{id}");
        assert_eq!(export_weights(&back.spec, &back.layout), text);
    }
}

#[test]
fn import_errors_name_the_field() {
    let c = build(ConstructionId::FxSimple, &Params::m(3)).unwrap();
    let mut v: serde_json::Value = serde_json::from_str(&export_weights(&c.spec, &c.layout)).unwrap();
    v["wq"][0].as_array_mut().unwrap().push("1".into());
    let err = import_weights_str(&v.to_string()).unwrap_err();
    assert_eq!(err.field.as_deref(), Some("wq[1]"));
    let err = import_weights_str("{\"version\": 1,\n \"m\": }").unwrap_err();
    assert_eq!(err.line, Some(2));
    let mut v: serde_json::Value = serde_json::from_str(&export_weights(&c.spec, &c.layout)).unwrap();
    v["formats"]["num"] = "fx:p=0".into();
    assert_eq!(import_weights_str(&v.to_string()).unwrap_err().field.as_deref(), Some("formats.num"));
    let mut v: serde_json::Value = serde_json::from_str(&export_weights(&c.spec, &c.layout)).unwrap();
    v["version"] = 9.into();
    assert_eq!(import_weights_str(&v.to_string()).unwrap_err().field.as_deref(), Some("version"));
}

const TOY: &str = r#"{
  "version": 1,
  "m": 1,
  "n": 2,
  "attention_kind": "linear",
  "formats": { "num": "fx:p=4", "den": "fx:p=4", "out": "fx:p=4" },
  "embedding": [
    { "index": 0, "token": "0", "row": ["1", "0"] },
    { "index": 0, "token": "1", "row": ["1", "1"] },
    { "index": 1, "token": "0", "row": ["1", "0"] },
    { "index": 1, "token": "1", "row": ["1", -1] },
    { "index": 2, "token": "?", "row": [1, 0] }
  ],
  "wq": [["1"], ["0"]],
  "wk": [["1"], ["0"]],
  "wv": [["0"], ["1"]],
  "mlp": { "w1": [["1", "-1"]], "b1": ["0", "0"], "w2": [["-1"], ["-1"]], "b2": ["1"] }
}"#;

#[test]
fn hand_written_model() {
    let model = import_weights_str(TOY).unwrap();
    let m = Model { label: "toy", spec: &model.spec, layout: &model.layout };
    let row = eval_exhaustive(m).unwrap();
    assert_eq!((row.total, row.correct), (3, 3));
    let q = quantize_spec(&model.spec, QuantFormat::INT4).unwrap();
    assert_eq!(eval_exhaustive(Model { spec: &q.spec, ..m }).unwrap().correct, 3);
}

fn num_strategy() -> impl Strategy<Value = Num> {
    (-4000i64..4000, -6i32..6).prop_map(|(v, k)| Num::dyadic(v, k))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn fx_grid_is_idempotent(vals in prop::collection::vec(num_strategy(), 1..12), k in 2u32..12) {
        let mut c = build(ConstructionId::FxSimple, &Params::m(3)).unwrap();
        let f = c.spec.num_fmt;
        let rows = c.spec.wv.rows;
        let entries: Vec<Num> = (0..rows).map(|i| vals[i % vals.len()]).collect();
        c.spec.wv = BMat { rows, cols: 1, entries, fmt: f };
        let once = quantize_spec(&c.spec, QuantFormat::IntK(k)).unwrap().spec;
        let twice = quantize_spec(&once, QuantFormat::IntK(k)).unwrap().spec;
        prop_assert_eq!(&once.wv, &twice.wv);
        prop_assert!(once.wv.entries.iter().all(|x| once.num_fmt.contains(x)));
    }

    #[test]
    fn fp_grid_membership(v in num_strategy(), exp in 2u32..6, man in 1u32..8) {
        let q = QuantFormat::Float { exp, man };
        let mut c = build(ConstructionId::FxSimple, &Params::m(3)).unwrap();
        c.spec.mlp.b2 = vec![v];
        let s = quantize_spec(&c.spec, q).unwrap().spec;
        prop_assert!(s.out_fmt.contains(&s.mlp.b2[0]));
        prop_assert_eq!(s.out_fmt.round_num(&s.mlp.b2[0]), s.mlp.b2[0]);
    }
}
