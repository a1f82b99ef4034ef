//! Post-training quantization of transformer specs, the equality dataset, and accuracy sweeps.

mod dataset;
mod weights;

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::attn::TransformerSpec;
use crate::bitnum::{Format, FpFormat, FxFormat, Num};
use crate::constructs::{Construction, ReprLayout};
use crate::lintens::BMat;
use crate::oracle::{self, Model, OracleError, VerifyMode, VerifyOptions, VerifyReport};

pub use dataset::{gen_dataset, Dataset, LabeledPair};
pub use weights::{export_weights, import_weights, import_weights_str, ImportedModel, SchemaError};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum QuantError {
    #[error("unknown quantization format {0:?}")]
    BadFormat(String),
    #[error("quantized format is invalid: {0}")]
    InvalidTarget(String),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

/// Quantization target: a signed fixed-point width or a floating-point (exponent, mantissa) split.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum QuantFormat {
    /// k bits including sign.
    IntK(u32),
    /// Exponent and mantissa bit counts, sign bits excluded.
    Float { exp: u32, man: u32 },
    /// The subject's own format family with its precision shifted by the given number of bits.
    Relative(i32),
}

impl QuantFormat {
    pub const INT12: QuantFormat = QuantFormat::IntK(12);
    pub const INT8: QuantFormat = QuantFormat::IntK(8);
    pub const INT6: QuantFormat = QuantFormat::IntK(6);
    pub const INT4: QuantFormat = QuantFormat::IntK(4);
    pub const FP16: QuantFormat = QuantFormat::Float { exp: 5, man: 10 };
    pub const FP8_E5M2: QuantFormat = QuantFormat::Float { exp: 5, man: 2 };
    pub const FP8_E4M3: QuantFormat = QuantFormat::Float { exp: 4, man: 3 };

    pub fn validate(&self) -> Result<(), QuantError> {
        match *self {
            QuantFormat::IntK(k) if k < 2 => Err(QuantError::BadFormat(format!("int{k}: need k >= 2"))),
            QuantFormat::Float { exp, man } if exp < 2 || man < 1 => {
                Err(QuantError::BadFormat(format!("fp e{exp}m{man}: need exp >= 2, mantissa >= 1")))
            }
            _ => Ok(()),
        }
    }

    /// Resolves a relative format against the spec's numerator format.
    pub fn resolve(&self, spec: &TransformerSpec) -> QuantFormat {
        match (*self, spec.num_fmt) {
            (QuantFormat::Relative(d), Format::Fx(f)) => QuantFormat::IntK((f.p as i32 + d).max(0) as u32),
            (QuantFormat::Relative(d), Format::Fp(f)) => {
                QuantFormat::Float { exp: f.e, man: (f.t as i32 - 1 + d).max(0) as u32 }
            }
            (q, _) => q,
        }
    }
}

impl fmt::Display for QuantFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            QuantFormat::IntK(k) => write!(f, "int{k}"),
            QuantFormat::Float { exp: 5, man: 10 } => f.write_str("fp16"),
            QuantFormat::Float { exp, man } if exp + man + 1 == 8 => write!(f, "fp8-e{exp}m{man}"),
            QuantFormat::Float { exp, man } => write!(f, "e{exp}m{man}"),
            QuantFormat::Relative(0) => f.write_str("p"),
            QuantFormat::Relative(d) => write!(f, "p{d:+}"),
        }
    }
}

impl FromStr for QuantFormat {
    type Err = QuantError;

    /// `int<k>`, `fp16`, `fp8-e5m2`, `fp8-e4m3`, `e<a>m<b>`, `p`, `p-1`, `p+2`.
    fn from_str(s: &str) -> Result<QuantFormat, QuantError> {
        let bad = || QuantError::BadFormat(s.to_string());
        let l = s.trim().to_ascii_lowercase().replace('_', "-");
        let q = match l.as_str() {
            "fp16" => QuantFormat::FP16,
            "fp8-e5m2" => QuantFormat::FP8_E5M2,
            "fp8-e4m3" => QuantFormat::FP8_E4M3,
            "p" | "native" => QuantFormat::Relative(0),
            _ => {
                if let Some(k) = l.strip_prefix("int") {
                    QuantFormat::IntK(k.parse().map_err(|_| bad())?)
                } else if let Some(d) = l.strip_prefix('p') {
                    QuantFormat::Relative(d.parse().map_err(|_| bad())?)
                } else if let Some(rest) = l.strip_prefix("fp8-").or(Some(l.as_str())).and_then(|r| r.strip_prefix('e')) {
                    let (a, b) = rest.split_once('m').ok_or_else(bad)?;
                    QuantFormat::Float { exp: a.parse().map_err(|_| bad())?, man: b.parse().map_err(|_| bad())? }
                } else {
                    return Err(bad());
                }
            }
        };
        q.validate()?;
        Ok(q)
    }
}

/// Notes raised while quantizing; none of them stop quantization.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum QuantNote {
    /// All entries are zero, so the scale defaults to 1.
    DegenerateTensor(String),
}

impl fmt::Display for QuantNote {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QuantNote::DegenerateTensor(t) => write!(f, "tensor {t} is all zero; scale defaults to 1"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Quantized {
    pub spec: TransformerSpec,
    pub format: QuantFormat,
    pub notes: Vec<QuantNote>,
}

fn max_abs(xs: &[Num]) -> Num {
    xs.iter().filter(|x| x.is_finite()).map(|x| x.abs()).max().unwrap_or(Num::Zero)
}

/// Power-of-two scale exponent for a k-bit tensor with the given max-abs value:
/// `maxabs / (2^{k−1} − 1)` rounded to the nearest power of two (ties to the smaller), then
/// raised until `maxabs` no longer saturates.
pub fn calibrate_scale(maxabs: &Num, k: u32) -> Option<i32> {
    let r = maxabs.to_rat().filter(|r| !r.is_zero())?;
    let levels = BigRational::from_integer(((1i64 << (k - 1)) - 1).into());
    let lam = r.clone() / levels.clone();
    let mut a = floor_log2(&lam);
    let lo = Num::pow2(a).to_rat().unwrap();
    // Nearest of 2^a and 2^{a+1}: choose the upper one only when strictly past the midpoint.
    if lam > lo.clone() * BigRational::new(3.into(), 2.into()) {
        a += 1;
    }
    while Num::pow2(a).to_rat().unwrap() * levels.clone() < r {
        a += 1;
    }
    Some(a)
}

fn floor_log2(r: &BigRational) -> i32 {
    let r = r.abs();
    let n = r.numer().bits() as i32;
    let d = r.denom().bits() as i32;
    let mut a = n - d;
    let p = |a: i32| Num::pow2(a).to_rat().unwrap();
    while p(a) > r {
        a -= 1;
    }
    while p(a + 1) <= r {
        a += 1;
    }
    a
}

struct Tensor<'a> {
    name: &'static str,
    values: Vec<&'a mut Num>,
}

fn quantize_fx(spec: &mut TransformerSpec, k: u32, notes: &mut Vec<QuantNote>) -> Result<(), QuantError> {
    let Format::Fx(num0) = spec.num_fmt else { unreachable!() };
    let den_shift = match spec.den_fmt {
        Format::Fx(d) => d.scale_log2 - num0.scale_log2,
        Format::Fp(_) => 0,
    };
    let rounding = spec.num_fmt.rounding();
    let mut embed: Vec<(_, Vec<Num>)> = std::mem::take(&mut spec.embed).into_iter().collect();
    let mut stage_scale = [None::<i32>; 2];
    {
        let mut tensors: Vec<(usize, Tensor)> = vec![
            (0, Tensor { name: "embedding", values: embed.iter_mut().flat_map(|(_, r)| r.iter_mut()).collect() }),
            (0, Tensor { name: "wq", values: spec.wq.entries.iter_mut().collect() }),
            (0, Tensor { name: "wk", values: spec.wk.entries.iter_mut().collect() }),
            (0, Tensor { name: "wv", values: spec.wv.entries.iter_mut().collect() }),
            (1, Tensor { name: "mlp.w1", values: spec.mlp.w1.entries.iter_mut().collect() }),
            (1, Tensor { name: "mlp.b1", values: spec.mlp.b1.iter_mut().collect() }),
            (1, Tensor { name: "mlp.w2", values: spec.mlp.w2.entries.iter_mut().collect() }),
            (1, Tensor { name: "mlp.b2", values: spec.mlp.b2.iter_mut().collect() }),
        ];
        for (stage, t) in tensors.iter_mut() {
            let vals: Vec<Num> = t.values.iter().map(|v| **v).collect();
            let scale = match calibrate_scale(&max_abs(&vals), k) {
                Some(s) => s,
                None => {
                    notes.push(QuantNote::DegenerateTensor(t.name.to_string()));
                    0
                }
            };
            let f = Format::Fx(FxFormat::scaled(k, scale).with_rounding(rounding));
            for v in t.values.iter_mut() {
                **v = f.round_num(v);
            }
            if !vals.iter().all(Num::is_zero) {
                stage_scale[*stage] = Some(stage_scale[*stage].map_or(scale, |s: i32| s.max(scale)));
            }
        }
    }
    let num_scale = stage_scale[0].unwrap_or(0);
    let out_scale = stage_scale[1].unwrap_or(0);
    spec.num_fmt = Format::Fx(FxFormat::scaled(k, num_scale).with_rounding(rounding));
    spec.den_fmt = Format::Fx(FxFormat::scaled(k, num_scale + den_shift).with_rounding(spec.den_fmt.rounding()));
    spec.out_fmt = Format::Fx(FxFormat::scaled(k, out_scale).with_rounding(spec.out_fmt.rounding()));
    spec.embed = embed.into_iter().collect();
    Ok(())
}

/// Rounds every weight into the stage formats of `spec`.
fn regrid(spec: &mut TransformerSpec) {
    let (nf, of) = (spec.num_fmt, spec.out_fmt);
    for row in spec.embed.values_mut() {
        for v in row.iter_mut() {
            *v = nf.round_num(v);
        }
    }
    for m in [&mut spec.wq, &mut spec.wk, &mut spec.wv] {
        *m = BMat::new(m.rows, m.cols, std::mem::take(&mut m.entries), nf).expect("shape preserved");
    }
    let mlp = &mut spec.mlp;
    for m in [&mut mlp.w1, &mut mlp.w2] {
        *m = BMat::new(m.rows, m.cols, std::mem::take(&mut m.entries), of).expect("shape preserved");
    }
    for v in mlp.b1.iter_mut().chain(mlp.b2.iter_mut()) {
        *v = of.round_num(v);
    }
}

/// True when every stage is already k-bit fixed point and every weight lies on its stage grid.
fn on_fx_grid(spec: &TransformerSpec, k: u32) -> bool {
    let is_k = |f: &Format| matches!(f, Format::Fx(x) if x.p == k);
    if !(is_k(&spec.num_fmt) && is_k(&spec.den_fmt) && is_k(&spec.out_fmt)) {
        return false;
    }
    let (nf, of) = (&spec.num_fmt, &spec.out_fmt);
    let mlp = &spec.mlp;
    spec.embed.values().flatten().chain(&spec.wq.entries).chain(&spec.wk.entries).chain(&spec.wv.entries).all(|x| nf.contains(x))
        && mlp.w1.entries.iter().chain(&mlp.w2.entries).chain(&mlp.b1).chain(&mlp.b2).all(|x| of.contains(x))
}

/// Quantizes all weights and replaces every stage format by the target format.
///
/// Fixed-point targets calibrate a power-of-two scale per tensor from its max-abs value; the
/// numerator stage takes the largest scale among the embedding and attention matrices, the
/// output stage the largest among the MLP tensors, and the denominator keeps its original
/// offset from the numerator. Floating-point targets round every value to the target grid.
pub fn quantize_spec(spec: &TransformerSpec, fmt: QuantFormat) -> Result<Quantized, QuantError> {
    let target = fmt.resolve(spec);
    target.validate()?;
    let mut out = spec.clone();
    let mut notes = vec![];
    match target {
        QuantFormat::IntK(k) => {
            let probe = Format::Fx(FxFormat::new(k));
            probe.validate().map_err(|e| QuantError::InvalidTarget(e.to_string()))?;
            if on_fx_grid(spec, k) {
                return Ok(Quantized { spec: out, format: target, notes });
            }
            if matches!(spec.num_fmt, Format::Fx(_)) {
                quantize_fx(&mut out, k, &mut notes)?;
            } else {
                // A floating-point subject gets a unit-scale fixed-point format per stage.
                let mut fx_spec = out.clone();
                fx_spec.num_fmt = Format::Fx(FxFormat::new(k));
                fx_spec.den_fmt = fx_spec.num_fmt;
                fx_spec.out_fmt = fx_spec.num_fmt;
                quantize_fx(&mut fx_spec, k, &mut notes)?;
                out = fx_spec;
            }
        }
        QuantFormat::Float { exp, man } => {
            let f = Format::Fp(FpFormat::new(man + 1, exp).with_rounding(spec.num_fmt.rounding()));
            f.validate().map_err(|e| QuantError::InvalidTarget(e.to_string()))?;
            out.num_fmt = f;
            out.den_fmt = f;
            out.out_fmt = f;
        }
        QuantFormat::Relative(_) => unreachable!("resolved above"),
    }
    regrid(&mut out);
    Ok(Quantized { spec: out, format: target, notes })
}

/// Quantizes a construction, keeping its representation.
pub fn quantize_construction(c: &Construction, fmt: QuantFormat) -> Result<(Construction, Quantized), QuantError> {
    let q = quantize_spec(&c.spec, fmt)?;
    let mut qc = c.clone();
    qc.spec = q.spec.clone();
    Ok((qc, q))
}

/// One row of a quantization report.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QuantRow {
    pub construction: String,
    pub m: usize,
    pub t: Option<u32>,
    pub e: Option<u32>,
    pub format: String,
    /// `H·(d_v + 1)·p` with one head.
    pub capacity: u64,
    pub total: u64,
    pub correct: u64,
    pub accuracy: f64,
    pub inf_count: u64,
    pub seconds: f64,
}

impl QuantRow {
    pub const CSV_HEADER: &'static str = "construction,m,t,e,format,capacity,total,correct,accuracy,inf_count,seconds";

    fn from_report(r: &VerifyReport, spec: &TransformerSpec, format: String) -> QuantRow {
        let correct = r.total - r.failure_count;
        QuantRow {
            construction: r.construction.clone(),
            m: r.m,
            t: r.t,
            e: r.e,
            format,
            capacity: spec.capacity(),
            total: r.total,
            correct,
            accuracy: if r.total == 0 { 1.0 } else { correct as f64 / r.total as f64 },
            inf_count: r.inf_count,
            seconds: r.seconds,
        }
    }

    pub fn csv_row(&self, timing: bool) -> String {
        let opt = |x: Option<u32>| x.map(|v| v.to_string()).unwrap_or_default();
        let secs = if timing { format!("{:.3}", self.seconds) } else { String::new() };
        format!(
            "{},{},{},{},{},{},{},{},{:.6},{},{}",
            self.construction,
            self.m,
            opt(self.t),
            opt(self.e),
            self.format,
            self.capacity,
            self.total,
            self.correct,
            self.accuracy,
            self.inf_count,
            secs
        )
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct QuantReport {
    pub source: String,
    pub rows: Vec<QuantRow>,
}

impl QuantReport {
    pub fn to_csv(&self, timing: bool) -> String {
        let mut s = String::from(QuantRow::CSV_HEADER);
        s.push('\n');
        for r in &self.rows {
            s.push_str(&r.csv_row(timing));
            s.push('\n');
        }
        s
    }
}

/// Accuracy of a model on a labelled dataset. With `enforce_promise`, pairs are reordered so
/// that y ≤ z and pairs still violating the promise are skipped.
pub fn eval_accuracy(model: Model, ds: &Dataset, enforce_promise: bool) -> Result<QuantRow, QuantError> {
    let pr = &model.layout.promises;
    let pairs: Vec<(Vec<u8>, Vec<u8>)> = ds
        .pairs
        .iter()
        .filter_map(|p| {
            let (mut y, mut z) = (p.y.clone(), p.z.clone());
            if enforce_promise {
                if y > z {
                    std::mem::swap(&mut y, &mut z);
                }
                let inst = crate::constructs::EqInstance { y: y.clone(), z: z.clone() };
                if !pr.violations(&inst).is_empty() {
                    return None;
                }
            }
            Some((y, z))
        })
        .collect();
    let opts = VerifyOptions { max_examples: 0, ..VerifyOptions::default() };
    let r = oracle::verify_pairs(model, &pairs, VerifyMode::Sampled, &opts)?;
    Ok(QuantRow::from_report(&r, model.spec, model.spec.num_fmt.to_string()))
}

/// Accuracy over every promise-satisfying pair.
pub fn eval_exhaustive(model: Model) -> Result<QuantRow, QuantError> {
    let opts = VerifyOptions { max_examples: 0, ..VerifyOptions::default() };
    let r = oracle::verify_model(model, &opts)?;
    Ok(QuantRow::from_report(&r, model.spec, model.spec.num_fmt.to_string()))
}

/// Where sweep accuracies are measured.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EvalSet {
    /// All promise pairs.
    Exhaustive,
    /// A generated dataset of this size, promise enforced.
    Dataset(usize),
}

/// Quantizes each subject to each format and measures accuracy. Rows are ordered subject-major.
pub fn sweep(subjects: &[(String, TransformerSpec, ReprLayout)], formats: &[QuantFormat], set: EvalSet, seed: u64) -> Result<QuantReport, QuantError> {
    let mut report = QuantReport { source: subjects.iter().map(|s| s.0.clone()).collect::<Vec<_>>().join(" "), rows: vec![] };
    for (label, spec, layout) in subjects {
        for f in formats {
            let start = Instant::now();
            let q = quantize_spec(spec, *f)?;
            let model = Model { label, spec: &q.spec, layout };
            let mut row = match set {
                EvalSet::Exhaustive => eval_exhaustive(model)?,
                EvalSet::Dataset(n) => eval_accuracy(model, &gen_dataset(layout.m, n, seed), true)?,
            };
            row.format = match f {
                QuantFormat::Relative(_) => format!("{f}/{}", q.format),
                _ => q.format.to_string(),
            };
            row.seconds = start.elapsed().as_secs_f64();
            report.rows.push(row);
        }
    }
    Ok(report)
}
