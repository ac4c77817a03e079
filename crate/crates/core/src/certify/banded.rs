//! Banded operators on the one-sided sequence space `ℓ²(ℕ)`.
//!
//! Every band is a sequence over the row index with a finite head followed by
//! a finite sum of geometric terms, so products, shifts and adjoints stay
//! inside the representation and are computed without truncation.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use faer::{Mat, MatRef};
use serde::{Deserialize, Serialize};

use crate::{Error, Result, C64};

const ZERO: C64 = C64::new(0.0, 0.0);

/// `coef · ratio^t`, `t` counted from the end of the head.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TailTerm {
    pub coef: C64,
    pub ratio: C64,
}

/// `s(i) = head[i]` for `i < head.len()`, `Σ coef · ratio^{i − head.len()}` after.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Seq {
    pub head: Vec<C64>,
    pub tail: Vec<TailTerm>,
}

impl Seq {
    pub fn zero() -> Self {
        Seq::default()
    }

    pub fn constant(c: C64) -> Self {
        Seq { head: Vec::new(), tail: vec![TailTerm { coef: c, ratio: C64::new(1.0, 0.0) }] }.normalized()
    }

    pub fn geometric(coef: C64, ratio: C64) -> Self {
        Seq { head: Vec::new(), tail: vec![TailTerm { coef, ratio }] }.normalized()
    }

    pub fn finite(head: Vec<C64>) -> Self {
        Seq { head, tail: Vec::new() }.normalized()
    }

    pub fn value(&self, i: usize) -> C64 {
        match self.head.get(i) {
            Some(&v) => v,
            None => self.tail_value(i - self.head.len()),
        }
    }

    fn tail_value(&self, t: usize) -> C64 {
        self.tail.iter().map(|term| term.coef * pow(term.ratio, t)).sum()
    }

    /// Same sequence with a head of length `h ≥ head.len()`.
    pub fn rebase(&self, h: usize) -> Seq {
        let h0 = self.head.len();
        if h <= h0 {
            return self.clone();
        }
        let mut head = self.head.clone();
        head.extend((0..h - h0).map(|t| self.tail_value(t)));
        let tail = self.tail.iter().map(|t| TailTerm { coef: t.coef * pow(t.ratio, h - h0), ratio: t.ratio }).collect();
        Seq { head, tail }
    }

    /// `i ↦ s(i + s)`, zero where `i + s < 0`.
    pub fn shift(&self, s: i64) -> Seq {
        if s >= 0 {
            let s = s as usize;
            let mut r = self.rebase(s);
            r.head.drain(..s);
            r
        } else {
            let mut head = vec![ZERO; s.unsigned_abs() as usize];
            head.extend_from_slice(&self.head);
            Seq { head, tail: self.tail.clone() }
        }
    }

    /// Zeroes the first `z` entries.
    pub fn mask(&self, z: usize) -> Seq {
        if z == 0 {
            return self.clone();
        }
        let mut r = self.rebase(z);
        r.head[..z].fill(ZERO);
        r.normalized()
    }

    pub fn add(&self, other: &Seq) -> Seq {
        let h = self.head.len().max(other.head.len());
        let (a, b) = (self.rebase(h), other.rebase(h));
        let head = a.head.iter().zip(&b.head).map(|(x, y)| x + y).collect();
        let mut tail = a.tail;
        tail.extend(b.tail);
        Seq { head, tail }.normalized()
    }

    pub fn scale(&self, c: C64) -> Seq {
        Seq {
            head: self.head.iter().map(|x| x * c).collect(),
            tail: self.tail.iter().map(|t| TailTerm { coef: t.coef * c, ratio: t.ratio }).collect(),
        }
        .normalized()
    }

    pub fn mul(&self, other: &Seq) -> Seq {
        let h = self.head.len().max(other.head.len());
        let (a, b) = (self.rebase(h), other.rebase(h));
        let head = a.head.iter().zip(&b.head).map(|(x, y)| x * y).collect();
        let tail = a
            .tail
            .iter()
            .flat_map(|s| b.tail.iter().map(move |t| TailTerm { coef: s.coef * t.coef, ratio: s.ratio * t.ratio }))
            .collect();
        Seq { head, tail }.normalized()
    }

    pub fn conj(&self) -> Seq {
        Seq {
            head: self.head.iter().map(|x| x.conj()).collect(),
            tail: self.tail.iter().map(|t| TailTerm { coef: t.coef.conj(), ratio: t.ratio.conj() }).collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.tail.is_empty() && self.head.iter().all(|x| *x == ZERO)
    }

    /// Upper bound on `sup_i |s(i)|`; infinite when a tail term grows.
    pub fn sup_bound(&self) -> f64 {
        let head = self.head.iter().map(|x| x.norm()).fold(0.0, f64::max);
        if self.tail.iter().any(|t| t.ratio.norm() > 1.0) {
            return f64::INFINITY;
        }
        head.max(self.tail.iter().map(|t| t.coef.norm()).sum())
    }

    /// Merges tail terms with equal ratios and drops exact zeros.
    fn normalized(mut self) -> Seq {
        if self.tail.iter().any(|t| t.ratio == ZERO && t.coef != ZERO) {
            self = self.rebase(self.head.len() + 1);
        }
        let mut merged: Vec<TailTerm> = Vec::with_capacity(self.tail.len());
        for t in self.tail.drain(..) {
            match merged.iter_mut().find(|m| m.ratio == t.ratio) {
                Some(m) => m.coef += t.coef,
                None => merged.push(t),
            }
        }
        merged.retain(|t| t.coef != ZERO && t.ratio != ZERO);
        merged.sort_by(|a, b| {
            (a.ratio.re, a.ratio.im).partial_cmp(&(b.ratio.re, b.ratio.im)).unwrap_or(std::cmp::Ordering::Equal)
        });
        self.tail = merged;
        loop {
            let Some(&last) = self.head.last() else { break };
            let next = match self.tail.as_slice() {
                [] => ZERO,
                [t] if t.ratio == C64::new(1.0, 0.0) => t.coef,
                _ => break,
            };
            if last != next {
                break;
            }
            self.head.pop();
        }
        self
    }

    /// `|s(i) − t(i)| ≤ tol` for every `i`, checked on the representation.
    pub fn approx_eq(&self, other: &Seq, tol: f64) -> bool {
        let d = self.add(&other.scale(C64::new(-1.0, 0.0)));
        d.sup_bound() <= tol
    }
}

fn pow(r: C64, t: usize) -> C64 {
    if r == C64::new(1.0, 0.0) {
        r
    } else {
        r.powu(t as u32)
    }
}

/// A finite-band operator on `ℓ²(ℕ)`: `x(i, i+k) = bands[k](i)`.
#[derive(Clone, Debug, PartialEq)]
pub struct BandedOp {
    bands: BTreeMap<i64, Seq>,
    hermitian: bool,
}

impl BandedOp {
    pub fn new(bands: impl IntoIterator<Item = (i64, Seq)>) -> Self {
        let mut map: BTreeMap<i64, Seq> = BTreeMap::new();
        for (k, s) in bands {
            let s = s.mask(k.min(0).unsigned_abs() as usize);
            let e = map.entry(k).or_default();
            *e = e.add(&s);
        }
        map.retain(|_, s| !s.is_zero());
        let mut out = BandedOp { bands: map, hermitian: false };
        out.hermitian = out.check_hermitian();
        out
    }

    pub fn zero() -> Self {
        BandedOp::new([])
    }

    pub fn identity() -> Self {
        BandedOp::new([(0, Seq::constant(C64::new(1.0, 0.0)))])
    }

    pub fn diagonal(d: Seq) -> Self {
        BandedOp::new([(0, d)])
    }

    /// `e_i e_j*`.
    pub fn matrix_unit(i: usize, j: usize) -> Self {
        let mut head = vec![ZERO; i + 1];
        head[i] = C64::new(1.0, 0.0);
        BandedOp::new([(j as i64 - i as i64, Seq::finite(head))])
    }

    /// The unilateral shift `S e_i = e_{i+1}`.
    pub fn shift() -> Self {
        BandedOp::new([(-1, Seq::constant(C64::new(1.0, 0.0)))])
    }

    /// `Re S = (S + S*)/2`.
    pub fn re_shift() -> Self {
        let s = BandedOp::shift();
        s.add(&s.adjoint()).scale(C64::new(0.5, 0.0))
    }

    /// `Im S = (S − S*)/2i`.
    pub fn im_shift() -> Self {
        let s = BandedOp::shift();
        s.sub(&s.adjoint()).scale(C64::new(0.0, -0.5))
    }

    /// The operator with finitely many entries given by `m`.
    pub fn from_dense(m: MatRef<'_, C64>) -> Self {
        let mut bands: BTreeMap<i64, Vec<C64>> = BTreeMap::new();
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                let v = m[(i, j)];
                if v != ZERO {
                    let head = bands.entry(j as i64 - i as i64).or_default();
                    if head.len() <= i {
                        head.resize(i + 1, ZERO);
                    }
                    head[i] = v;
                }
            }
        }
        BandedOp::new(bands.into_iter().map(|(k, h)| (k, Seq::finite(h))))
    }

    pub fn bands(&self) -> &BTreeMap<i64, Seq> {
        &self.bands
    }

    pub fn band(&self, k: i64) -> Option<&Seq> {
        self.bands.get(&k)
    }

    pub fn bandwidth(&self) -> usize {
        self.bands.keys().map(|k| k.unsigned_abs() as usize).max().unwrap_or(0)
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn is_zero(&self) -> bool {
        self.bands.is_empty()
    }

    pub fn entry(&self, i: usize, j: usize) -> C64 {
        self.bands.get(&(j as i64 - i as i64)).map_or(ZERO, |s| s.value(i))
    }

    /// Leading `n × n` corner.
    pub fn corner(&self, n: usize) -> Mat<C64> {
        Mat::from_fn(n, n, |i, j| self.entry(i, j))
    }

    pub fn add(&self, other: &Self) -> Self {
        BandedOp::new(self.bands.iter().chain(&other.bands).map(|(&k, s)| (k, s.clone())))
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, c: C64) -> Self {
        BandedOp::new(self.bands.iter().map(|(&k, s)| (k, s.scale(c))))
    }

    /// `(xy)(i, i+k) = Σ_{k₁+k₂=k} x(i, i+k₁) y(i+k₁, i+k)`.
    pub fn mul(&self, other: &Self) -> Self {
        let mut terms = Vec::new();
        for (&k1, x) in &self.bands {
            for (&k2, y) in &other.bands {
                terms.push((k1 + k2, x.mul(&y.shift(k1))));
            }
        }
        BandedOp::new(terms)
    }

    pub fn adjoint(&self) -> Self {
        BandedOp::new(self.bands.iter().map(|(&k, s)| (-k, s.conj().shift(-k))))
    }

    /// `[x, y] = xy − yx`.
    pub fn commutator(&self, other: &Self) -> Self {
        self.mul(other).sub(&other.mul(self))
    }

    fn scale_bound(&self) -> f64 {
        self.bands.values().map(Seq::sup_bound).fold(1.0, f64::max)
    }

    fn check_hermitian(&self) -> bool {
        let tol = 1e-14 * self.scale_bound();
        let zero = Seq::zero();
        let keys: std::collections::BTreeSet<i64> = self.bands.keys().map(|k| k.abs()).collect();
        keys.into_iter().all(|k| {
            let up = self.bands.get(&k).unwrap_or(&zero);
            let down = self.bands.get(&-k).unwrap_or(&zero).shift(k);
            up.approx_eq(&down.conj(), tol)
        })
    }
}

/// `‖x‖_∞ ≤ Σ_k sup_i |x(i, i+k)|`.
pub fn schur_band_bound(x: &BandedOp) -> f64 {
    x.bands.values().map(Seq::sup_bound).sum()
}

/// Why the diagonal of an operator is summable.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DecayCertificate {
    /// `x(i, i) = 0` for `i ≥ from`.
    EventuallyZero { from: usize },
    /// `|x(i, i)| ≤ bound · ratio^{i − from}` for `i ≥ from`, `ratio < 1`.
    Geometric { from: usize, bound: f64, ratio: f64 },
}

impl DecayCertificate {
    /// A certificate read off the diagonal band, if it has one.
    pub fn infer(x: &BandedOp) -> Option<Self> {
        let d = x.band(0).cloned().unwrap_or_default();
        if d.tail.is_empty() {
            let from = d.head.iter().rposition(|v| *v != ZERO).map_or(0, |i| i + 1);
            return Some(DecayCertificate::EventuallyZero { from });
        }
        let ratio = d.tail.iter().map(|t| t.ratio.norm()).fold(0.0, f64::max);
        (ratio < 1.0).then(|| DecayCertificate::Geometric {
            from: d.head.len(),
            bound: d.tail.iter().map(|t| t.coef.norm()).sum(),
            ratio,
        })
    }

    /// Checks the claim against the diagonal of `x`.
    pub fn verify(&self, x: &BandedOp) -> bool {
        let d = x.band(0).cloned().unwrap_or_default();
        match *self {
            DecayCertificate::EventuallyZero { from } => {
                d.tail.is_empty() && d.head.iter().skip(from).all(|v| *v == ZERO)
            }
            DecayCertificate::Geometric { from, bound, ratio } => {
                if !(0.0..1.0).contains(&ratio) || !(bound >= 0.0) {
                    return false;
                }
                let d = d.rebase(from);
                let h = d.head.len();
                let slack = 1.0 + 1e-12;
                let head_ok = (from..h).all(|i| d.head[i].norm() <= bound * ratio.powi((i - from) as i32) * slack);
                let tail_ok = d.tail.iter().all(|t| t.ratio.norm() <= ratio)
                    && d.tail.iter().map(|t| t.coef.norm()).sum::<f64>() <= bound * ratio.powi((h - from) as i32) * slack;
                head_ok && tail_ok
            }
        }
    }
}

/// `Σ_i x(i, i)` with a bound on the omitted tail.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceValue {
    pub value: f64,
    pub imag: f64,
    pub terms: usize,
    pub tail_bound: f64,
}

const MAX_TRACE_TERMS: usize = 1 << 20;

/// Trace of a banded operator whose diagonal carries a verified decay
/// certificate; refuses otherwise.
pub fn banded_trace(x: &BandedOp, cert: Option<&DecayCertificate>) -> Result<TraceValue> {
    let cert = cert.ok_or_else(|| Error::Refused("trace needs a decay certificate for the diagonal".into()))?;
    if !cert.verify(x) {
        return Err(Error::Refused(format!("decay certificate {cert:?} does not hold for the diagonal")));
    }
    let d = x.band(0).cloned().unwrap_or_default();
    match *cert {
        DecayCertificate::EventuallyZero { from } => {
            let s: C64 = (0..from).map(|i| d.value(i)).sum();
            Ok(TraceValue { value: s.re, imag: s.im, terms: from, tail_bound: 0.0 })
        }
        DecayCertificate::Geometric { from, bound, ratio } => {
            let mut s: C64 = (0..from).map(|i| d.value(i)).sum();
            let mut i = from;
            let mut tail = bound / (1.0 - ratio);
            while i - from < MAX_TRACE_TERMS && tail > 1e-17 * s.norm().max(1.0) {
                s += d.value(i);
                i += 1;
                tail *= ratio;
            }
            Ok(TraceValue { value: s.re, imag: s.im, terms: i, tail_bound: tail })
        }
    }
}

fn fmt_c64(f: &mut fmt::Formatter<'_>, v: C64) -> fmt::Result {
    if v.im == 0.0 {
        write!(f, "{}", v.re)
    } else {
        write!(f, "({}, {})", v.re, v.im)
    }
}

/// One line per band: `band(k): seq [a, b] then const c + geom c r`.
impl fmt::Display for BandedOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, s) in &self.bands {
            write!(f, "band({k}):")?;
            if !s.head.is_empty() {
                write!(f, " seq [")?;
                for (i, v) in s.head.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    fmt_c64(f, *v)?;
                }
                write!(f, "] then")?;
            }
            if s.tail.is_empty() {
                write!(f, " const 0")?;
            }
            for (i, t) in s.tail.iter().enumerate() {
                if i > 0 {
                    write!(f, " +")?;
                }
                if t.ratio == C64::new(1.0, 0.0) {
                    write!(f, " const ")?;
                    fmt_c64(f, t.coef)?;
                } else {
                    write!(f, " geom ")?;
                    fmt_c64(f, t.coef)?;
                    write!(f, " ")?;
                    fmt_c64(f, t.ratio)?;
                }
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

impl FromStr for BandedOp {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_banded(s)
    }
}

struct Cursor<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn err<T>(&self, message: impl Into<String>) -> Result<T> {
        Err(Error::Parse { offset: self.pos, message: message.into() })
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn skip_ws(&mut self) {
        let r = self.rest();
        self.pos += r.len() - r.trim_start_matches([' ', '\t']).len();
    }

    fn eat(&mut self, tok: &str) -> bool {
        self.skip_ws();
        if self.rest().starts_with(tok) {
            self.pos += tok.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: &str) -> Result<()> {
        if self.eat(tok) {
            Ok(())
        } else {
            self.err(format!("expected `{tok}`"))
        }
    }

    fn real(&mut self) -> Result<f64> {
        self.skip_ws();
        let r = self.rest();
        let len = r
            .find(|c: char| !(c.is_ascii_digit() || matches!(c, '.' | '-' | '+' | 'e' | 'E')))
            .unwrap_or(r.len());
        let mut len = len;
        while len > 0 {
            if let Ok(v) = r[..len].parse::<f64>() {
                self.pos += len;
                return Ok(v);
            }
            len -= 1;
        }
        self.err("expected a number")
    }

    fn fraction(&mut self) -> Result<f64> {
        let v = self.real()?;
        if self.eat("/") {
            let d = self.real()?;
            if d == 0.0 {
                return self.err("division by zero");
            }
            return Ok(v / d);
        }
        Ok(v)
    }

    fn complex(&mut self) -> Result<C64> {
        if self.eat("(") {
            let re = self.fraction()?;
            self.expect(",")?;
            let im = self.fraction()?;
            self.expect(")")?;
            return Ok(C64::new(re, im));
        }
        let v = self.fraction()?;
        if self.eat("i") {
            Ok(C64::new(0.0, v))
        } else {
            Ok(C64::new(v, 0.0))
        }
    }
}

/// Parses the line format written by `Display`; `#` starts a comment.
pub fn parse_banded(src: &str) -> Result<BandedOp> {
    let mut bands: BTreeMap<i64, Seq> = BTreeMap::new();
    let mut offset = 0;
    for line in src.split_inclusive('\n') {
        let body = line.split('#').next().unwrap_or("").trim_end();
        let mut c = Cursor { src: body, pos: 0 };
        c.skip_ws();
        if c.rest().is_empty() {
            offset += line.len();
            continue;
        }
        let parsed = (|| -> Result<(i64, Seq)> {
            c.expect("band(")?;
            let k = c.real()?;
            if k.fract() != 0.0 {
                return c.err("band offset must be an integer");
            }
            c.expect(")")?;
            c.expect(":")?;
            let mut head = Vec::new();
            if c.eat("seq") {
                c.expect("[")?;
                if !c.eat("]") {
                    loop {
                        head.push(c.complex()?);
                        if c.eat("]") {
                            break;
                        }
                        c.expect(",")?;
                    }
                }
                if !c.eat("then") {
                    c.skip_ws();
                    return if c.rest().is_empty() { Ok((k as i64, Seq::finite(head))) } else { c.err("expected `then`") };
                }
            }
            let mut tail = Vec::new();
            loop {
                if c.eat("const") {
                    tail.push(TailTerm { coef: c.complex()?, ratio: C64::new(1.0, 0.0) });
                } else if c.eat("geom") {
                    let coef = c.complex()?;
                    tail.push(TailTerm { coef, ratio: c.complex()? });
                } else {
                    return c.err("expected `const` or `geom`");
                }
                if !c.eat("+") {
                    break;
                }
            }
            c.skip_ws();
            if !c.rest().is_empty() {
                return c.err("trailing input");
            }
            Ok((k as i64, Seq { head, tail }.normalized()))
        })();
        let (k, seq) = parsed.map_err(|e| match e {
            Error::Parse { offset: o, message } => Error::Parse { offset: offset + o, message },
            e => e,
        })?;
        if bands.insert(k, seq).is_some() {
            return Err(Error::Parse { offset, message: format!("band {k} given twice") });
        }
        offset += line.len();
    }
    Ok(BandedOp::new(bands))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn shift_relations() {
        let s = BandedOp::shift();
        let st = s.adjoint();
        assert_eq!(st.mul(&s), BandedOp::identity());
        let comm = s.commutator(&st);
        assert_eq!(comm, BandedOp::matrix_unit(0, 0).scale(c(-1.0)));
    }

    #[test]
    fn re_im_commutator() {
        let y = BandedOp::re_shift().commutator(&BandedOp::im_shift()).scale(C64::new(0.0, 1.0));
        assert_eq!(y, BandedOp::matrix_unit(0, 0).scale(c(0.5)));
        assert!(y.is_hermitian());
        assert!(BandedOp::re_shift().is_hermitian());
        assert!(BandedOp::im_shift().is_hermitian());
        assert!(!BandedOp::shift().is_hermitian());
    }

    #[test]
    fn corner_matches_dense_product() {
        let x: BandedOp = "band(-1): seq [0, 1, 2] then geom 1 0.5\nband(0): const 2\nband(2): seq [(1, 1)] then const -1\n"
            .parse()
            .unwrap();
        let y: BandedOp = "band(1): const 3\nband(-2): seq [4, 5] then geom 1 (0, 0.5)\n".parse().unwrap();
        let n = 40;
        let xy = x.mul(&y).corner(n);
        let dense = x.corner(n) * y.corner(n);
        let bw = x.bandwidth() + y.bandwidth();
        for i in 0..n - bw {
            for j in 0..n - bw {
                assert!((xy[(i, j)] - dense[(i, j)]).norm() < 1e-13, "({i}, {j})");
            }
        }
    }

    #[test]
    fn traces() {
        let e = BandedOp::matrix_unit(0, 0);
        let t = banded_trace(&e, DecayCertificate::infer(&e).as_ref()).unwrap();
        assert_eq!(t.value, 1.0);
        let g = BandedOp::diagonal(Seq::geometric(c(1.0), c(0.5)));
        let cert = DecayCertificate::infer(&g).unwrap();
        let t = banded_trace(&g, Some(&cert)).unwrap();
        assert!((t.value - 2.0).abs() <= 1e-15 + t.tail_bound);
        assert!(t.tail_bound > 0.0 && t.tail_bound < 1e-15);
        assert!(banded_trace(&g, None).is_err());
        assert!(DecayCertificate::infer(&BandedOp::identity()).is_none());
        let wrong = DecayCertificate::EventuallyZero { from: 3 };
        assert!(banded_trace(&g, Some(&wrong)).is_err());
    }

    #[test]
    fn display_round_trip() {
        let x: BandedOp = "# test\nband(-1): const 1\nband(0): seq [1, 2, 3] then const 0\nband(3): seq [0.5i] then geom 2 1/4\n"
            .parse()
            .unwrap();
        let y: BandedOp = x.to_string().parse().unwrap();
        assert_eq!(x, y);
        assert!(matches!("band(1) const 1".parse::<BandedOp>(), Err(Error::Parse { .. })));
        assert!(matches!("band(0): const 1\nband(0): const 2".parse::<BandedOp>(), Err(Error::Parse { .. })));
    }

    #[test]
    fn schur_bound_of_im_shift() {
        assert_eq!(schur_band_bound(&BandedOp::im_shift()), 1.0);
    }

    #[test]
    fn dense_embedding_is_traceless_commutator() {
        let a = Mat::from_fn(3, 3, |i, j| C64::new((i + 2 * j) as f64, (i as f64) - (j as f64)));
        let b = Mat::from_fn(3, 3, |i, j| C64::new(1.0 / (1 + i + j) as f64, 0.0));
        let comm = BandedOp::from_dense(a.as_ref()).commutator(&BandedOp::from_dense(b.as_ref()));
        let t = banded_trace(&comm, DecayCertificate::infer(&comm).as_ref()).unwrap();
        assert!(t.value.abs() < 1e-13);
    }
}
