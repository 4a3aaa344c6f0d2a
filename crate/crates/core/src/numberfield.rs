//! Exact arithmetic in Q(θ) for a monic irreducible θ-polynomial, plus complex embeddings.
//!
//! Elements live in the power basis 1, θ, …, θ^{d−1} with rational coefficients.

use crate::error::{Error, Result};
use crate::qmat::{self, Q, QMat};
use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{FromPrimitive, One, Signed, ToPrimitive, Zero};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

pub const DEFAULT_PRECISION: u32 = 30;

pub type Field = Arc<NumberField>;

/// Parse `"p/q"`, `"p"` or `"-p/q"`.
pub fn parse_rational(s: &str) -> Result<Q> {
    let s = s.trim();
    let bad = || Error::Parse(format!("bad rational {s:?}"));
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(Error::DivisionByZero);
            }
            Ok(Q::new(n, d))
        }
        None => Ok(Q::from_integer(s.parse().map_err(|_| bad())?)),
    }
}

/// Fixed-point complex number with `bits` fractional bits.
#[derive(Clone, Debug)]
pub struct HpComplex {
    pub re: BigInt,
    pub im: BigInt,
    pub bits: u64,
}

impl HpComplex {
    pub fn zero(bits: u64) -> Self {
        HpComplex { re: BigInt::zero(), im: BigInt::zero(), bits }
    }

    pub fn from_q(x: &Q, bits: u64) -> Self {
        let re = (x.numer() << bits) / x.denom();
        HpComplex { re, im: BigInt::zero(), bits }
    }

    pub fn from_c64(z: Complex64, bits: u64) -> Self {
        let scale = 2f64.powi(52);
        let conv = |v: f64| BigInt::from_f64((v * scale).round()).unwrap_or_default() << (bits - 52);
        HpComplex { re: conv(z.re), im: conv(z.im), bits }
    }

    pub fn add(&self, o: &Self) -> Self {
        HpComplex { re: &self.re + &o.re, im: &self.im + &o.im, bits: self.bits }
    }

    pub fn sub(&self, o: &Self) -> Self {
        HpComplex { re: &self.re - &o.re, im: &self.im - &o.im, bits: self.bits }
    }

    pub fn mul(&self, o: &Self) -> Self {
        let re = (&self.re * &o.re - &self.im * &o.im) >> self.bits;
        let im = (&self.re * &o.im + &self.im * &o.re) >> self.bits;
        HpComplex { re, im, bits: self.bits }
    }

    pub fn div(&self, o: &Self) -> Self {
        let den = &o.re * &o.re + &o.im * &o.im;
        let re = ((&self.re * &o.re + &self.im * &o.im) << self.bits) / &den;
        let im = ((&self.im * &o.re - &self.re * &o.im) << self.bits) / &den;
        HpComplex { re, im, bits: self.bits }
    }

    pub fn to_c64(&self) -> Complex64 {
        let f = |v: &BigInt| v.to_f64().unwrap_or(f64::NAN) * 2f64.powi(-(self.bits as i32));
        Complex64::new(f(&self.re), f(&self.im))
    }

    pub fn abs(&self) -> f64 {
        self.to_c64().norm()
    }
}

/// One complex embedding τ, given by the image of θ.
#[derive(Clone, Debug)]
pub struct Embedding {
    pub root: Complex64,
    pub is_real: bool,
    pub conjugate_index: usize,
    hp_root: HpComplex,
}

impl Embedding {
    pub fn hp_root(&self) -> &HpComplex {
        &self.hp_root
    }
}

#[derive(Debug)]
pub struct NumberField {
    degree: usize,
    min_poly: Vec<Q>,
    // θ^{d+k} in the power basis, k = 0..d-2
    reduction: Vec<Vec<Q>>,
    precision: u32,
    hp_bits: u64,
    embeddings: Vec<Embedding>,
}

impl NumberField {
    /// Build a field from ascending coefficients `c_0, …, c_d` (c_d = 1).
    pub fn new(min_poly: Vec<Q>, precision: u32) -> Result<Field> {
        if min_poly.len() < 2 {
            return Err(Error::UnsupportedDegree("degree must be at least 1".into()));
        }
        if !min_poly.last().unwrap().is_one() {
            return Err(Error::NonMonic);
        }
        let degree = min_poly.len() - 1;
        let hp_bits = (precision as f64 * std::f64::consts::LOG2_10).ceil() as u64 + 64;
        let roots = complex_roots(&min_poly, hp_bits, precision)?;
        check_irreducible(&min_poly, &roots)?;
        let mut reduction: Vec<Vec<Q>> = Vec::new();
        let mut cur: Vec<Q> = min_poly[..degree].iter().map(|c| -c.clone()).collect();
        for _ in 0..degree.saturating_sub(1) {
            reduction.push(cur.clone());
            let top = cur[degree - 1].clone();
            let mut next = vec![Q::zero(); degree];
            for i in 1..degree {
                next[i] = cur[i - 1].clone();
            }
            for i in 0..degree {
                next[i] -= &top * &min_poly[i];
            }
            cur = next;
        }
        let embeddings = pair_roots(roots);
        Ok(Arc::new(NumberField { degree, min_poly, reduction, precision, hp_bits, embeddings }))
    }

    pub fn from_strings<S: AsRef<str>>(min_poly: &[S], precision: u32) -> Result<Field> {
        let coeffs = min_poly.iter().map(|s| parse_rational(s.as_ref())).collect::<Result<Vec<_>>>()?;
        Self::new(coeffs, precision)
    }

    /// Q presented as Q(θ) with θ = 0.
    pub fn rationals() -> Field {
        Self::new(vec![Q::zero(), Q::one()], DEFAULT_PRECISION).expect("x is irreducible")
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn min_poly(&self) -> &[Q] {
        &self.min_poly
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    pub fn hp_bits(&self) -> u64 {
        self.hp_bits
    }

    pub fn embeddings(&self) -> &[Embedding] {
        &self.embeddings
    }

    /// Real embeddings r1 and complex pairs r2.
    pub fn signature(&self) -> (usize, usize) {
        let r1 = self.embeddings.iter().filter(|e| e.is_real).count();
        (r1, (self.degree - r1) / 2)
    }

    /// Representatives of the classes [τ] = {τ, τ̄}: indices of real embeddings and of
    /// the embedding with positive imaginary part in each pair.
    pub fn embedding_classes(&self) -> Vec<usize> {
        (0..self.degree)
            .filter(|&i| {
                let e = &self.embeddings[i];
                e.is_real || e.root.im > 0.0
            })
            .collect()
    }

    pub fn min_poly_string(&self) -> String {
        let mut terms = Vec::new();
        for (i, c) in self.min_poly.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let mono = match i {
                0 => String::new(),
                1 => "x".to_string(),
                _ => format!("x^{i}"),
            };
            let coeff = if c.is_one() && i > 0 { String::new() } else if i > 0 { format!("{c}*") } else { c.to_string() };
            terms.push(format!("{coeff}{mono}"));
        }
        terms.join(" + ").replace("+ -", "- ")
    }
}

pub fn field_element(field: &Field, coeffs: Vec<Q>) -> FieldElement {
    FieldElement::new(field, coeffs)
}

/// An element of Q(θ).
#[derive(Clone)]
pub struct FieldElement {
    field: Field,
    coeffs: Vec<Q>,
}

impl PartialEq for FieldElement {
    fn eq(&self, other: &Self) -> bool {
        self.coeffs == other.coeffs
    }
}

impl Eq for FieldElement {}

impl Hash for FieldElement {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.coeffs.hash(state);
    }
}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut out = String::new();
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            let a = c.abs();
            if out.is_empty() {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            match i {
                0 => out.push_str(&a.to_string()),
                _ => {
                    if !a.is_one() {
                        out.push_str(&format!("{a}*"));
                    }
                    out.push('w');
                    if i > 1 {
                        out.push_str(&format!("^{i}"));
                    }
                }
            }
        }
        if out.is_empty() {
            out.push('0');
        }
        f.write_str(&out)
    }
}

impl FieldElement {
    pub fn new(field: &Field, mut coeffs: Vec<Q>) -> Self {
        coeffs.resize(field.degree, Q::zero());
        FieldElement { field: field.clone(), coeffs }
    }

    pub fn zero(field: &Field) -> Self {
        Self::new(field, vec![])
    }

    pub fn one(field: &Field) -> Self {
        Self::from_q(field, Q::one())
    }

    pub fn from_q(field: &Field, x: Q) -> Self {
        Self::new(field, vec![x])
    }

    pub fn from_int(field: &Field, n: i64) -> Self {
        Self::from_q(field, qmat::q(n))
    }

    /// The generator θ (equal to the rational root when the degree is 1).
    pub fn generator(field: &Field) -> Self {
        if field.degree == 1 {
            return Self::from_q(field, -field.min_poly[0].clone());
        }
        let mut c = vec![Q::zero(); field.degree];
        c[1] = Q::one();
        Self::new(field, c)
    }

    pub fn parse(field: &Field, s: &str) -> Result<Self> {
        parse_element(field, s)
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn coeffs(&self) -> &[Q] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    pub fn is_one(&self) -> bool {
        self.coeffs[0].is_one() && self.coeffs[1..].iter().all(Zero::is_zero)
    }

    pub fn as_rational(&self) -> Option<Q> {
        self.coeffs[1..].iter().all(Zero::is_zero).then(|| self.coeffs[0].clone())
    }

    pub fn scale(&self, k: &Q) -> Self {
        FieldElement { field: self.field.clone(), coeffs: self.coeffs.iter().map(|c| c * k).collect() }
    }

    fn mul_impl(&self, o: &Self) -> Self {
        let d = self.field.degree;
        let mut prod = vec![Q::zero(); 2 * d - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.coeffs.iter().enumerate() {
                if !b.is_zero() {
                    prod[i + j] += a * b;
                }
            }
        }
        let mut out: Vec<Q> = prod[..d].to_vec();
        for (k, c) in prod[d..].iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            for (i, r) in self.field.reduction[k].iter().enumerate() {
                out[i] += c * r;
            }
        }
        FieldElement { field: self.field.clone(), coeffs: out }
    }

    /// Matrix of multiplication by `self`; row i holds the coordinates of self·θ^i.
    pub fn mul_matrix(&self) -> QMat {
        let d = self.field.degree;
        let theta = Self::generator(&self.field);
        let mut rows = Vec::with_capacity(d);
        let mut cur = self.clone();
        for _ in 0..d {
            rows.push(cur.coeffs.clone());
            if d > 1 {
                cur = cur.mul_impl(&theta);
            }
        }
        rows
    }

    pub fn norm(&self) -> Q {
        qmat::det(&self.mul_matrix())
    }

    pub fn trace(&self) -> Q {
        let m = self.mul_matrix();
        (0..m.len()).fold(Q::zero(), |acc, i| acc + &m[i][i])
    }

    pub fn norm_and_trace(&self) -> (Q, Q) {
        (self.norm(), self.trace())
    }

    /// Characteristic polynomial of multiplication by `self`, ascending and monic.
    pub fn charpoly(&self) -> Vec<Q> {
        // Faddeev-LeVerrier
        let a = self.mul_matrix();
        let n = a.len();
        let mut coeffs = vec![Q::zero(); n + 1];
        coeffs[n] = Q::one();
        let mut m = qmat::identity(n);
        for k in 1..=n {
            let am = qmat::mat_mul(&a, &m);
            let tr = (0..n).fold(Q::zero(), |acc, i| acc + &am[i][i]);
            let c = -tr / qmat::q(k as i64);
            coeffs[n - k] = c.clone();
            m = am;
            for i in 0..n {
                m[i][i] += &c;
            }
        }
        coeffs
    }

    pub fn inv(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        if let Some(r) = self.as_rational() {
            return Ok(Self::from_q(&self.field, r.recip()));
        }
        // solve x · M = e_0 where row i of M is self·θ^i
        let inv = qmat::inverse(&self.mul_matrix()).ok_or(Error::DivisionByZero)?;
        let mut e0 = vec![Q::zero(); self.field.degree];
        e0[0] = Q::one();
        Ok(Self::new(&self.field, qmat::vec_mul(&e0, &inv)))
    }

    pub fn div(&self, o: &Self) -> Result<Self> {
        Ok(self * &o.inv()?)
    }

    pub fn pow(&self, e: i64) -> Result<Self> {
        let base = if e < 0 { self.inv()? } else { self.clone() };
        Ok(base.pow_u(e.unsigned_abs()))
    }

    pub fn pow_u(&self, mut e: u64) -> Self {
        let mut acc = Self::one(&self.field);
        let mut b = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul_impl(&b);
            }
            e >>= 1;
            if e > 0 {
                b = b.mul_impl(&b);
            }
        }
        acc
    }

    /// τ_i(self) in double precision.
    pub fn embed(&self, i: usize) -> Complex64 {
        let z = self.field.embeddings[i].root;
        let mut acc = Complex64::new(0.0, 0.0);
        for c in self.coeffs.iter().rev() {
            acc = acc * z + Complex64::new(c.to_f64().unwrap_or(f64::NAN), 0.0);
        }
        acc
    }

    /// τ_i(self) at the field's working precision.
    pub fn embed_hp(&self, i: usize) -> HpComplex {
        let bits = self.field.hp_bits;
        let z = &self.field.embeddings[i].hp_root;
        let mut acc = HpComplex::zero(bits);
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(z).add(&HpComplex::from_q(c, bits));
        }
        acc
    }

    /// Common denominator of the power-basis coordinates.
    pub fn denominator(&self) -> BigInt {
        self.coeffs.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()))
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $body:expr) => {
        impl<'a> $tr<&'a FieldElement> for &'a FieldElement {
            type Output = FieldElement;
            fn $m(self, o: &'a FieldElement) -> FieldElement {
                let f: fn(&FieldElement, &FieldElement) -> FieldElement = $body;
                f(self, o)
            }
        }
        impl $tr<FieldElement> for FieldElement {
            type Output = FieldElement;
            fn $m(self, o: FieldElement) -> FieldElement {
                (&self).$m(&o)
            }
        }
        impl<'a> $tr<&'a FieldElement> for FieldElement {
            type Output = FieldElement;
            fn $m(self, o: &'a FieldElement) -> FieldElement {
                (&self).$m(o)
            }
        }
    };
}

binop!(Add, add, |a, b| FieldElement {
    field: a.field.clone(),
    coeffs: a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| x + y).collect()
});
binop!(Sub, sub, |a, b| FieldElement {
    field: a.field.clone(),
    coeffs: a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| x - y).collect()
});
binop!(Mul, mul, |a, b| a.mul_impl(b));

impl Neg for &FieldElement {
    type Output = FieldElement;
    fn neg(self) -> FieldElement {
        FieldElement { field: self.field.clone(), coeffs: self.coeffs.iter().map(|c| -c).collect() }
    }
}

impl Neg for FieldElement {
    type Output = FieldElement;
    fn neg(self) -> FieldElement {
        -&self
    }
}

fn parse_element(field: &Field, s: &str) -> Result<FieldElement> {
    let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if compact.is_empty() {
        return Err(Error::Parse("empty element".into()));
    }
    let mut terms: Vec<String> = Vec::new();
    let mut cur = String::new();
    let chars: Vec<char> = compact.chars().collect();
    for (i, &ch) in chars.iter().enumerate() {
        let prev = if i > 0 { Some(chars[i - 1]) } else { None };
        if (ch == '+' || ch == '-') && !matches!(prev, None | Some('^') | Some('*') | Some('/') | Some('(')) {
            terms.push(std::mem::take(&mut cur));
        }
        cur.push(ch);
    }
    terms.push(cur);
    let theta = FieldElement::generator(field);
    let mut acc = FieldElement::zero(field);
    for t in terms {
        let (sign, body) = match t.strip_prefix('-') {
            Some(rest) => (-1, rest.to_string()),
            None => (1, t.trim_start_matches('+').to_string()),
        };
        let gen_pos = body.find(|c: char| matches!(c, 'w' | 'x' | 't' | 'a'));
        let term = match gen_pos {
            None => FieldElement::from_q(field, parse_rational(&body)?),
            Some(p) => {
                let coeff_str = body[..p].trim_end_matches('*');
                let coeff = if coeff_str.is_empty() { Q::one() } else { parse_rational(coeff_str)? };
                let rest = &body[p + 1..];
                let k: i64 = match rest.strip_prefix('^') {
                    Some(e) => e.parse().map_err(|_| Error::Parse(format!("bad exponent in {s:?}")))?,
                    None if rest.is_empty() => 1,
                    None => return Err(Error::Parse(format!("bad term {body:?}"))),
                };
                theta.pow(k)?.scale(&coeff)
            }
        };
        acc = if sign < 0 { acc - term } else { acc + term };
    }
    Ok(acc)
}

fn eval_f64(coeffs: &[f64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &c in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

fn aberth(coeffs: &[f64]) -> Vec<Complex64> {
    let n = coeffs.len() - 1;
    let radius = 1.0 + coeffs[..n].iter().fold(0.0f64, |m, c| m.max(c.abs()));
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| Complex64::from_polar(radius, 2.0 * std::f64::consts::PI * k as f64 / n as f64 + 0.4))
        .collect();
    for _ in 0..1000 {
        let mut worst = 0.0f64;
        for k in 0..n {
            let (p, dp) = eval_f64(coeffs, z[k]);
            if p.norm() == 0.0 {
                continue;
            }
            let ratio = p / dp;
            let s: Complex64 = (0..n).filter(|&j| j != k).map(|j| 1.0 / (z[k] - z[j])).sum();
            let step = ratio / (1.0 - ratio * s);
            if step.is_finite() {
                z[k] -= step;
                worst = worst.max(step.norm() / (1.0 + z[k].norm()));
            }
        }
        if worst < 1e-15 {
            break;
        }
    }
    z
}

fn eval_hp(coeffs: &[HpComplex], z: &HpComplex) -> (HpComplex, HpComplex) {
    let bits = z.bits;
    let mut p = HpComplex::zero(bits);
    let mut dp = HpComplex::zero(bits);
    for c in coeffs.iter().rev() {
        dp = dp.mul(z).add(&p);
        p = p.mul(z).add(c);
    }
    (p, dp)
}

fn complex_roots(min_poly: &[Q], bits: u64, precision: u32) -> Result<Vec<HpComplex>> {
    let n = min_poly.len() - 1;
    let hp_coeffs: Vec<HpComplex> = min_poly.iter().map(|c| HpComplex::from_q(c, bits)).collect();
    if n == 1 {
        return Ok(vec![HpComplex::from_q(&-min_poly[0].clone(), bits)]);
    }
    let f64_coeffs: Vec<f64> = min_poly.iter().map(|c| c.to_f64().unwrap_or(f64::NAN)).collect();
    let seeds = aberth(&f64_coeffs);
    let tol = 10f64.powi(-(precision as i32) + 4);
    let mut out = Vec::with_capacity(n);
    for seed in seeds {
        let mut z = HpComplex::from_c64(seed, bits);
        let mut real = false;
        for _ in 0..200 {
            let (p, dp) = eval_hp(&hp_coeffs, &z);
            if dp.re.is_zero() && dp.im.is_zero() {
                break;
            }
            let step = p.div(&dp);
            z = z.sub(&step);
            if !real && z.to_c64().im.abs() < 10f64.powi(-(precision as i32) / 2) {
                z.im = BigInt::zero();
                real = true;
            }
            if step.abs() < 2f64.powi(-(bits as i32 - 16)) && p.abs() < tol {
                break;
            }
        }
        let (p, _) = eval_hp(&hp_coeffs, &z);
        if p.abs() >= tol {
            return Err(Error::Anomaly(format!("root refinement did not converge (|f(z)| = {:e})", p.abs())));
        }
        out.push(z);
    }
    for i in 0..n {
        for j in 0..i {
            if (out[i].to_c64() - out[j].to_c64()).norm() < 1e-12 {
                return Err(Error::ReduciblePolynomial("repeated root".into()));
            }
        }
    }
    Ok(out)
}

fn pair_roots(mut roots: Vec<HpComplex>) -> Vec<Embedding> {
    roots.sort_by(|a, b| {
        let (x, y) = (a.to_c64(), b.to_c64());
        let key = |z: Complex64| (z.im != 0.0, -z.re, -z.im);
        key(x).partial_cmp(&key(y)).unwrap()
    });
    let approx: Vec<Complex64> = roots.iter().map(|r| r.to_c64()).collect();
    roots
        .into_iter()
        .enumerate()
        .map(|(i, hp_root)| {
            let root = approx[i];
            let conj = root.conj();
            let conjugate_index = (0..approx.len())
                .min_by(|&a, &b| (approx[a] - conj).norm().partial_cmp(&(approx[b] - conj).norm()).unwrap())
                .unwrap();
            Embedding { root, is_real: hp_root.im.is_zero(), conjugate_index, hp_root }
        })
        .collect()
}

fn poly_rem(num: &[Q], den: &[Q]) -> Vec<Q> {
    let mut r = num.to_vec();
    let dd = den.len() - 1;
    let lead = den[dd].clone();
    while r.len() > dd {
        let top = r.pop().unwrap();
        if top.is_zero() {
            continue;
        }
        let f = top / &lead;
        let shift = r.len() - dd;
        for i in 0..dd {
            r[shift + i] -= &f * &den[i];
        }
    }
    r
}

fn check_irreducible(min_poly: &[Q], roots: &[HpComplex]) -> Result<()> {
    let n = min_poly.len() - 1;
    if n == 1 {
        return Ok(());
    }
    // θ' = dθ has a monic integer minimal polynomial; rational roots of it are integer divisors
    let d = min_poly.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
    let scaled: Vec<BigInt> = min_poly
        .iter()
        .enumerate()
        .map(|(i, c)| (c * Q::from_integer(num_traits::pow(d.clone(), n - i))).to_integer())
        .collect();
    if scaled[0].is_zero() {
        return Err(Error::ReduciblePolynomial("x divides the polynomial".into()));
    }
    let eval = |x: &BigInt| scaled.iter().rev().fold(BigInt::zero(), |acc, c| acc * x + c);
    if let Ok(fs) = crate::intmath::factor_bigint(&scaled[0]) {
        let mut divisors = vec![BigInt::one()];
        for (p, e) in fs {
            let mut next = Vec::new();
            for dv in &divisors {
                let mut pk = BigInt::one();
                for _ in 0..=e {
                    next.push(dv * &pk);
                    pk *= p;
                }
            }
            divisors = next;
        }
        for dv in divisors {
            for cand in [dv.clone(), -dv] {
                if eval(&cand).is_zero() {
                    return Err(Error::ReduciblePolynomial(format!("rational root {}", Q::new(cand, d.clone()))));
                }
            }
        }
    }
    if n <= 3 {
        return Ok(());
    }
    // higher degree: every monic factor is a product of (x − root) over a subset of roots;
    // round candidate coefficients and confirm by exact division
    let bits = roots[0].bits;
    for mask in 1u64..(1u64 << n) {
        let k = mask.count_ones() as usize;
        if k > n / 2 {
            continue;
        }
        let mut poly = vec![HpComplex::from_q(&Q::one(), bits)];
        for (i, r) in roots.iter().enumerate() {
            if mask >> i & 1 == 0 {
                continue;
            }
            let mut next = vec![HpComplex::zero(bits); poly.len() + 1];
            for (j, c) in poly.iter().enumerate() {
                next[j + 1] = next[j + 1].add(c);
                next[j] = next[j].sub(&c.mul(r));
            }
            poly = next;
        }
        let mut cand = Vec::with_capacity(k + 1);
        let mut ok = true;
        for (i, c) in poly.iter().enumerate() {
            let z = c.to_c64();
            let scale = num_traits::pow(d.clone(), k - i).to_f64().unwrap_or(f64::INFINITY);
            let v = z.re * scale;
            if z.im.abs() * scale > 1e-6 || !v.is_finite() || v.abs() > 1e15 {
                ok = false;
                break;
            }
            let int = BigInt::from_f64(v.round()).unwrap();
            cand.push(Q::new(int, num_traits::pow(d.clone(), k - i)));
        }
        if ok && poly_rem(min_poly, &cand).iter().all(Zero::is_zero) {
            return Err(Error::ReduciblePolynomial(format!("factor of degree {k}")));
        }
    }
    Ok(())
}
