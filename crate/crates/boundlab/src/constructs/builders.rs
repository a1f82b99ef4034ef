use std::fmt::Write as _;

use super::instance::bits_str;
use super::layout::{ReprLayout, Variant};
use super::{ConstructError, Construction, ConstructionId};
use crate::attn::{AttentionKind, Embedding, MlpSpec, NumeratorOrder, Token, TransformerSpec};
use crate::bitnum::{Format, FpFormat, FxFormat, Num};
use crate::lintens::BMat;

fn num(v: f64) -> Num {
    Num::from_f64(v).expect("builder constants are finite")
}

fn p2(k: i32) -> f64 {
    2f64.powi(k)
}

/// Smallest `s` with `2^s >= max(1, k - 2)`.
fn sig(k: usize) -> i32 {
    let target = k.saturating_sub(2).max(1);
    let mut s = 0;
    while (1usize << s) < target {
        s += 1;
    }
    s
}

fn unsupported<T>(msg: String) -> Result<T, ConstructError> {
    Err(ConstructError::Unsupported(msg))
}

fn fx_formats(p: i32) -> Result<(Format, Format, Format), ConstructError> {
    if p < 2 {
        return unsupported(format!("fixed-point precision p={p} is below 2"));
    }
    let p = p as u32;
    Ok((Format::Fx(FxFormat::scaled(p, 0)), Format::Fx(FxFormat::scaled(p, 1)), Format::Fx(FxFormat::scaled(p, 0))))
}

fn fp_format(t: i32, e: usize) -> Result<Format, ConstructError> {
    let f = Format::Fp(FpFormat::new(t.max(0) as u32, e as u32));
    f.validate().map_err(|err| ConstructError::Unsupported(err.to_string()))?;
    Ok(f)
}

struct Parts {
    id: ConstructionId,
    kind: AttentionKind,
    layout: ReprLayout,
    embed: Embedding,
    d: usize,
    wq: Vec<f64>,
    wk: Vec<f64>,
    wv: Vec<Vec<f64>>,
    mlp: (Vec<f64>, Vec<f64>, Vec<f64>, f64),
    fmts: (Format, Format, Format),
    native_bits: u32,
    t: Option<u32>,
    e: Option<u32>,
}

fn assemble(p: Parts) -> Construction {
    let (num_fmt, den_fmt, out_fmt) = p.fmts;
    let col = |v: &[f64]| BMat::column(v.iter().map(|&x| num(x)).collect(), num_fmt);
    let d_v = p.wv[0].len();
    let wv = BMat::new(p.d, d_v, p.wv.concat().into_iter().map(num).collect(), num_fmt).expect("wv shape");
    let (w1, b1, w2, b2) = p.mlp;
    let nums = |v: Vec<f64>| v.into_iter().map(num).collect::<Vec<_>>();
    let mlp = MlpSpec::scalar(nums(w1), nums(b1), nums(w2), num(b2), out_fmt);
    let embed = p.embed.into_iter().map(|(k, row)| (k, row.iter().map(|x| num_fmt.round_num(x)).collect())).collect();
    let spec = TransformerSpec {
        id: p.id.as_str().to_string(),
        kind: p.kind,
        m: p.layout.m,
        t: p.t,
        e: p.e,
        index_base: p.layout.index_base(),
        n_tokens: p.layout.n_tokens(),
        d: p.d,
        embed,
        wq: col(&p.wq),
        wk: col(&p.wk),
        wv,
        mlp,
        num_fmt,
        den_fmt,
        out_fmt,
        numerator_order: NumeratorOrder::TokenThenValue,
    };
    Construction { id: p.id, spec, layout: p.layout, native_bits: p.native_bits }
}

fn insert(embed: &mut Embedding, pos: i32, tok: Token, row: Vec<f64>) {
    embed.insert((pos, tok), row.into_iter().map(num).collect());
}

/// Fixed-point softmax construction on T⁰ at precision `⌈m/2⌉ + 1`.
pub fn build_fx_simple(m: usize, delta: i32, n: Option<usize>) -> Result<Construction, ConstructError> {
    if m % 2 == 0 {
        return unsupported(format!("m must be odd (m={m})"));
    }
    if m < 3 {
        return unsupported(format!("fx-simple needs m >= 3 (m={m})"));
    }
    let k = m.div_ceil(2);
    let native = k as i32 + 1;
    let fmts = fx_formats(native + delta)?;
    let neg = -fmts.0.max_value().to_f64();
    let s = p2(sig(k + 1));
    let row = |key: Option<f64>, v: f64| vec![1.0, key.map_or(neg, |kk| kk / s), v];
    let min_n = (2 * m + 1).max(4 * native as usize + 1);
    let layout = ReprLayout::new(Variant::T0, m, n.unwrap_or(min_n).max(2 * m + 1))?;
    let ki = k as i32;
    let mut embed = Embedding::new();
    for i in 1..=m {
        for b in 0..=1u8 {
            let bf = b as f64;
            let (ry, rz) = if i <= k {
                let w = p2(ki - i as i32);
                (row(Some(-(k as f64)), -bf * w), row(Some(-(k as f64)), bf * w))
            } else {
                let key = Some((m - i) as f64);
                (row(if b == 0 { key } else { None }, 0.0), row(if b == 1 { key } else { None }, 0.0))
            };
            insert(&mut embed, i as i32 - 1, Token::bit(b), ry);
            insert(&mut embed, (m + i) as i32 - 1, Token::bit(b), rz);
        }
    }
    insert(&mut embed, 2 * m as i32, Token::bit(0), row(Some(-1.0), 4.0 - p2(2 - ki)));
    for pos in 2 * m + 1..layout.n {
        insert(&mut embed, pos as i32, Token::bit(0), row(None, 0.0));
    }
    insert(&mut embed, layout.n as i32, Token::query(), row(None, 0.0));
    let c = p2(ki - 1);
    Ok(assemble(Parts {
        id: ConstructionId::FxSimple,
        kind: AttentionKind::Softmax,
        layout,
        embed,
        d: 3,
        wq: vec![s, 0.0, 0.0],
        wk: vec![0.0, 1.0, 0.0],
        wv: vec![vec![0.0], vec![0.0], vec![c]],
        mlp: (vec![-1.0, 1.0], vec![2.0, -2.0], vec![-c, -c], 1.0),
        fmts,
        native_bits: native as u32,
        t: None,
        e: None,
    }))
}

/// Fixed-point softmax construction on T¹ at precision `⌈m/2⌉`.
pub fn build_fx_tight(m: usize, delta: i32, n: Option<usize>) -> Result<Construction, ConstructError> {
    if m % 2 == 0 {
        return unsupported(format!("m must be odd (m={m})"));
    }
    if m < 5 {
        return unsupported(format!("fx-tight needs m >= 5 (m={m})"));
    }
    let k = m.div_ceil(2);
    let ki = k as i32;
    let native = ki;
    let fmts = fx_formats(native + delta)?;
    let neg = -fmts.0.max_value().to_f64();
    let s = p2(sig(k));
    let big_b = (k - 1) as f64;
    let row = |key: Option<f64>, v: f64| vec![1.0, key.map_or(neg, |kk| kk / s), v];
    let min_n = (2 * m + 5).max(4 * native as usize + 1);
    let layout = ReprLayout::new(Variant::T1, m, n.unwrap_or(min_n).max(2 * m + 5))?;
    let mut embed = Embedding::new();
    let zero = Token::bit(0);
    insert(&mut embed, -1, zero.clone(), row(None, 0.0));
    insert(&mut embed, m as i32 + 3, zero.clone(), row(None, 0.0));
    let c = p2(ki - 2);
    for b in 0..=1u8 {
        let bf = b as f64;
        for pos in [0, 1] {
            insert(&mut embed, pos, Token::bit(b), row(Some(-big_b), -(1.0 - bf) * c));
        }
        for pos in [m + 1, m + 2] {
            insert(&mut embed, pos as i32, Token::bit(b), row(Some(-big_b), (1.0 - bf) * c));
        }
        for i in 2..=m {
            let (ry, rz) = if i <= k {
                let w = p2(ki - i as i32);
                (row(Some(-big_b), bf * w), row(Some(-big_b), -bf * w))
            } else {
                let key = Some((2 * k - 1 - i) as f64);
                (row(if b == 0 { key } else { None }, 0.0), row(if b == 1 { key } else { None }, 0.0))
            };
            insert(&mut embed, i as i32, Token::bit(b), ry);
            insert(&mut embed, (m + 2 + i) as i32, Token::bit(b), rz);
        }
    }
    let last = 2 * m as i32 + 3;
    insert(&mut embed, last, zero.clone(), row(Some(1.0 - big_b), 0.5));
    let end = layout.n as i32 - 1;
    for pos in last + 1..end {
        insert(&mut embed, pos, zero.clone(), row(None, 0.0));
    }
    insert(&mut embed, end, Token::query(), row(None, 0.0));
    let w = p2(1 - ki);
    Ok(assemble(Parts {
        id: ConstructionId::FxTight,
        kind: AttentionKind::Softmax,
        layout,
        embed,
        d: 3,
        wq: vec![s, 0.0, 0.0],
        wk: vec![0.0, 1.0, 0.0],
        wv: vec![vec![0.0], vec![0.0], vec![c]],
        mlp: (vec![-1.0, -1.0, 1.0, 1.0], vec![w, w, -w, -w], vec![-c; 4], 1.0),
        fmts,
        native_bits: native as u32,
        t: None,
        e: None,
    }))
}

fn all_strings(len: usize) -> Vec<String> {
    (0..1u64 << len).map(|v| bits_str(&super::instance::int_bits(len, v))).collect()
}

/// Value term of a y token of the linear construction at position `i`, given sign `s`,
/// unbiased exponent `ex` and the fraction bit `f` the token carries.
fn fp_linear_y_term(t: usize, q: i32, i: usize, s: f64, ex: i32, f: f64) -> f64 {
    let l = p2(-(t as i32 - 1));
    let k = 2 + i / 2;
    if ex != -q {
        match i {
            0 => s * (1.5 + f / 4.0),
            _ if i == 2 * t - 6 => s * (1.0 + f * l),
            _ if i == 2 * t - 5 => {
                if f == 1.0 {
                    0.0
                } else {
                    -s * 0.5
                }
            }
            _ if i % 2 == 1 => -s,
            _ => s * (1.0 + f * p2(-(k as i32))),
        }
    } else {
        match i {
            0 => s * (3.5 + f / 4.0),
            _ if i == 2 * t - 6 => s * (1.0 + f * l),
            _ if i == 2 * t - 5 => s * (2.5 + f / 2.0),
            _ if i == 2 * t - 7 => -6.0 * s,
            _ if i % 2 == 1 => -2.0 * s,
            _ => s * (2.0 + f * p2(-(k as i32))),
        }
    }
}

/// Value term of a z token at relative position `j = i - 2t`.
fn fp_linear_z_term(t: usize, q: i32, j: usize, s: f64, ex: i32, g: f64) -> f64 {
    let l = p2(-(t as i32 - 1));
    let kk = if j % 2 == 1 { j.div_ceil(2) } else { j / 2 + 1 };
    let is_last = kk == t - 2;
    let gk = g * p2(-(kk as i32));
    if ex >= q {
        match j {
            0 => -s * (0.5 + g * l),
            1 => -s * g / 2.0,
            _ if j % 2 == 0 => s,
            _ if is_last => -s * (1.5 + gk),
            _ => -s * (1.0 + gk),
        }
    } else {
        let (first, last_fill, top) = if ex == -q {
            (s * (2.0 - g * l), 1.0, 3.5)
        } else {
            let d = p2(-q - 1 - ex);
            (s * (1.0 - g * l), 0.5, 1.5 + if d >= l { d } else { 0.0 })
        };
        match j {
            0 => first,
            1 => -s * (1.0 + g / 2.0),
            _ if j % 2 == 0 && is_last => s * last_fill,
            _ if j % 2 == 0 => s,
            _ if is_last => -s * (top + gk),
            _ => -s * (1.0 + gk),
        }
    }
}

/// Floating-point linear-attention construction on T² with precision (t, e), m = t + e.
pub fn build_fp_linear(t: usize, e: usize, delta: i32, n: Option<usize>) -> Result<Construction, ConstructError> {
    if t < 4 || e < 3 {
        return unsupported(format!("fp-linear needs t >= 4 and e >= 3 (t={t}, e={e})"));
    }
    if e > 10 {
        return unsupported(format!("fp-linear supports e <= 10 (e={e})"));
    }
    let m = t + e;
    let native = (t + e) as u32;
    let f = fp_format(t as i32 + delta, e)?;
    let q = (1i32 << (e - 1)) - 1;
    let min_n = (4 * t - 4).max(2 * native as usize + 1);
    let layout = ReprLayout::with_fp(Variant::T2, m, n.unwrap_or(min_n).max(4 * t - 4), t, e)?;
    let zero_row = vec![1.0, 0.0, 0.0, 0.0];
    let mut embed = Embedding::new();
    let row_for = |ex: i32, term: f64| {
        let (hi, lo) = if ex >= 0 { (p2(ex - q), 0.0) } else { (0.0, p2(ex)) };
        vec![1.0, hi, lo, term]
    };
    let fields = all_strings(e);
    for (fi, field) in fields.iter().enumerate() {
        let ex = fi as i32 - (1 << (e - 1));
        for sb in 0..=1u8 {
            let s = if sb == 1 { -1.0 } else { 1.0 };
            for bit in 0..=1u8 {
                let tok = Token::tuple(&[sb.to_string(), field.clone(), bit.to_string()]);
                for i in 0..2 * t - 4 {
                    // Position 2t-6 carries the complemented fraction bit.
                    let fb = if i == 2 * t - 6 { 1 - bit } else { bit } as f64;
                    let row = if fi == 0 { zero_row.clone() } else { row_for(ex, fp_linear_y_term(t, q, i, s, ex, fb)) };
                    insert(&mut embed, i as i32, tok.clone(), row);
                }
                for j in 0..2 * t - 4 {
                    let row = if fi == 0 { zero_row.clone() } else { row_for(ex, fp_linear_z_term(t, q, j, s, ex, bit as f64)) };
                    insert(&mut embed, (2 * t + j) as i32, tok.clone(), row);
                }
            }
        }
    }
    for pos in (2 * t - 4..2 * t).chain(4 * t - 4..layout.n) {
        insert(&mut embed, pos as i32, Token::bit(0), zero_row.clone());
    }
    insert(&mut embed, layout.n as i32, Token::query(), zero_row);
    let w = p2(q);
    Ok(assemble(Parts {
        id: ConstructionId::FpLinear,
        kind: AttentionKind::Linear,
        layout,
        embed,
        d: 4,
        wq: vec![1.0, 0.0, 0.0, 0.0],
        wk: vec![0.0, w, 1.0, 0.0],
        wv: vec![vec![0.0], vec![0.0], vec![0.0], vec![1.0]],
        mlp: (vec![w, -w], vec![0.0, 0.0], vec![-1.0, -1.0], 1.0),
        fmts: (f, f, f),
        native_bits: native,
        t: Some(t as u32),
        e: Some(e as u32),
    }))
}

/// Derived shape of the floating-point softmax construction.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SoftmaxShape {
    pub m: usize,
    /// Second exponent segment length.
    pub r: usize,
    /// Exponent offset separating the two halves of the denominator from the numerator checks.
    pub s: i32,
    /// Logit of the numerator-carrying tokens is `-b`; the value weight is `2^b`.
    pub b: i32,
}

/// Checks the parameter constraints and derives m and the internal offsets.
pub fn fp_softmax_shape(t: usize, e: usize) -> Result<SoftmaxShape, ConstructError> {
    if t < 3 || !(3..=10).contains(&e) {
        return unsupported(format!("fp-softmax needs t >= 3 and 3 <= e <= 10 (t={t}, e={e})"));
    }
    // t + e = c + log2 c with c = ceil(m/2) a power of two.
    let mut lg = 0usize;
    while (1usize << lg) + lg < t + e {
        lg += 1;
    }
    let c = 1usize << lg;
    if c + lg != t + e {
        return unsupported(format!("t + e = {} is not of the form c + log2 c with c a power of two", t + e));
    }
    if e <= lg + 2 {
        return unsupported(format!("fp-softmax needs e > log2(ceil(m/2)) + 2 (e={e}, log={lg})"));
    }
    let m = 2 * c - 1;
    let r = (m + 3).checked_sub(e + 2 * t).filter(|&r| r >= 1);
    let Some(r) = r else {
        return unsupported(format!("no room for the second exponent segment at m={m}"));
    };
    let q = (1i32 << (e - 1)) - 1;
    let ti = t as i32;
    let big_r = (1i32 << r) - 1;
    let s = ti + 1;
    let mut lg_tokens = 0;
    while (1i32 << lg_tokens) < 2 * ti + 2 {
        lg_tokens += 1;
    }
    // Keys must be exact in t significant bits, so round b up to such a value.
    let mut b = big_r + s + 2 * ti + lg_tokens + 1;
    while 32 - (b as u32 >> b.trailing_zeros()).leading_zeros() > t as u32 {
        b += 1;
    }
    if b + big_r + s > q {
        return unsupported(format!("exponent range q={q} too small for offsets (b={b}, R={big_r}, s={s})"));
    }
    Ok(SoftmaxShape { m, r, s, b })
}

/// Floating-point softmax construction on T³ with precision (t, e).
pub fn build_fp_softmax(t: usize, e: usize, delta: i32, n: Option<usize>) -> Result<Construction, ConstructError> {
    let sh = fp_softmax_shape(t, e)?;
    let m = sh.m;
    let native = (t + e) as u32;
    let f = fp_format(t as i32 + delta, e)?;
    let neg = -f.max_value().to_f64();
    let min_n = (2 * m + 2).max(4 * native as usize + 1);
    let layout = ReprLayout::with_fp(Variant::T3, m, n.unwrap_or(min_n).max(2 * m + 2), t, e)?;
    let (s, b) = (sh.s, sh.b);
    let c0 = 2.0 - p2(-(t as i32 - 1));
    let mut embed = Embedding::new();
    let tup = |seg: &str, bit: u8| Token::tuple(&[seg.to_string(), bit.to_string()]);
    let neutral = vec![1.0, neg, 0.0];
    for seg in all_strings(e - 1) {
        let e1 = i32::from_str_radix(&seg, 2).unwrap();
        insert(&mut embed, 0, tup(&seg, 0), vec![1.0, -b as f64, p2(e1)]);
        insert(&mut embed, m as i32, tup(&seg, 0), vec![1.0, -b as f64, -p2(e1)]);
        for i in 1..t {
            for bit in 0..=1u8 {
                let v = bit as f64 * p2(e1 - i as i32);
                insert(&mut embed, i as i32, tup(&seg, bit), vec![1.0, -b as f64, v]);
                insert(&mut embed, (m + i) as i32, tup(&seg, bit), vec![1.0, -b as f64, -v]);
            }
        }
    }
    for seg in all_strings(sh.r) {
        let e2 = i32::from_str_radix(&seg, 2).unwrap();
        for i in 1..t {
            let key = -(e2 + s + i as i32) as f64;
            for bit in 0..=1u8 {
                let ky = if bit == 0 { key } else { neg };
                let kz = if bit == 1 { key } else { neg };
                insert(&mut embed, (t - 1 + i) as i32, tup(&seg, bit), vec![1.0, ky, 0.0]);
                insert(&mut embed, (m + t - 1 + i) as i32, tup(&seg, bit), vec![1.0, kz, 0.0]);
            }
        }
        insert(&mut embed, 2 * t as i32 - 1, tup(&seg, 0), vec![1.0, -(e2 + s) as f64, 0.0]);
        insert(&mut embed, 2 * m as i32 + 1, tup(&seg, 0), vec![1.0, -b as f64, c0 * p2(-e2 - s)]);
    }
    for pos in (2 * t..m).chain(m + 2 * t - 1..2 * m + 1).chain(2 * m + 2..layout.n) {
        insert(&mut embed, pos as i32, Token::bit(0), neutral.clone());
    }
    insert(&mut embed, layout.n as i32, Token::query(), neutral);
    let w = p2(t as i32);
    Ok(assemble(Parts {
        id: ConstructionId::FpSoftmax,
        kind: AttentionKind::Softmax,
        layout,
        embed,
        d: 3,
        wq: vec![1.0, 0.0, 0.0],
        wk: vec![0.0, 1.0, 0.0],
        wv: vec![vec![0.0], vec![0.0], vec![p2(b)]],
        mlp: (vec![w, -w], vec![-w, w], vec![-1.0, -1.0], 1.0),
        fmts: (f, f, f),
        native_bits: native,
        t: Some(t as u32),
        e: Some(e as u32),
    }))
}

/// Text rendering of a construction's embedding table and weights, one position per block.
/// `positions` restricts the rendered positions when given.
pub fn render_table(c: &Construction, positions: Option<&[i32]>) -> String {
    let spec = &c.spec;
    let mut out = String::new();
    let _ = writeln!(out, "construction {} m={} n={} variant={}", c.id, c.m(), c.layout.n, c.layout.variant);
    let _ = writeln!(out, "formats num={} den={} out={}", spec.num_fmt, spec.den_fmt, spec.out_fmt);
    let join = |v: &[Num]| v.iter().map(Num::to_string).collect::<Vec<_>>().join(" ");
    let _ = writeln!(out, "wq {}", join(&spec.wq.entries));
    let _ = writeln!(out, "wk {}", join(&spec.wk.entries));
    let _ = writeln!(out, "wv {}", join(&spec.wv.entries));
    let _ = writeln!(out, "mlp.w1 {}", join(&spec.mlp.w1.entries));
    let _ = writeln!(out, "mlp.b1 {}", join(&spec.mlp.b1));
    let _ = writeln!(out, "mlp.w2 {}", join(&spec.mlp.w2.entries));
    let _ = writeln!(out, "mlp.b2 {}", join(&spec.mlp.b2));
    for ((pos, tok), row) in &spec.embed {
        if positions.is_some_and(|ps| !ps.contains(pos)) {
            continue;
        }
        let _ = writeln!(out, "{pos} {tok} : {}", join(row));
    }
    out
}
