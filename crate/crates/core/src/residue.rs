//! Residue rings O_w/𝔞 for 𝔞 = 𝔮^s or q^s, the orders t_w and u_w, and the CRT splitting.

use crate::error::{Error, Result};
use crate::intmath::{self, lcm_u64, order_from_multiple};
use crate::numberfield::FieldElement;
use crate::valuation::{OwRing, PrimeIdeal, Val};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::ToPrimitive;
use std::fmt;

/// The ideal a residue ring is taken modulo, before raising to the power s.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Modulus {
    Prime(PrimeIdeal),
    Rational(u64),
}

impl fmt::Display for Modulus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Modulus::Prime(p) => write!(f, "{}", p.label()),
            Modulus::Rational(q) => write!(f, "({q})"),
        }
    }
}

/// O/𝔞 realised as Z^n modulo the HNF lattice of 𝔞 in integral-basis coordinates.
#[derive(Clone, Debug)]
pub struct ResidueRing {
    ow: OwRing,
    modulus: Modulus,
    s: u32,
    /// Prime-power components 𝔮_i^{k_i} of 𝔞.
    components: Vec<(PrimeIdeal, u32)>,
    hnf: Vec<Vec<i64>>,
    strides: Vec<u64>,
    size: u64,
    // D ∈ 𝔞 ∩ Z, a power of the residue characteristic
    d: i64,
    digits: Vec<i64>,
    w_code: u64,
}

fn egcd(a: i128, b: i128) -> (i128, i128, i128) {
    if b == 0 {
        if a < 0 {
            (-a, -1, 0)
        } else {
            (a, 1, 0)
        }
    } else {
        let (g, x, y) = egcd(b, a.rem_euclid(b));
        (g, y, x - a.div_euclid(b) * y)
    }
}

/// Upper-triangular Hermite normal form of the lattice spanned by `rows` and D·Z^n.
pub fn hnf_mod(rows: &[Vec<i128>], n: usize, d: i128) -> Vec<Vec<i64>> {
    let mut rows: Vec<Vec<i128>> = rows.iter().map(|r| r.iter().map(|x| x.rem_euclid(d)).collect()).collect();
    for i in 0..n {
        let mut r = vec![0i128; n];
        r[i] = d;
        rows.push(r);
    }
    let mut out: Vec<Vec<i128>> = Vec::with_capacity(n);
    for col in 0..n {
        let mut pivot: Option<Vec<i128>> = None;
        let mut rest = Vec::new();
        for r in rows.drain(..) {
            if r[col] == 0 {
                rest.push(r);
                continue;
            }
            match pivot.take() {
                None => pivot = Some(r),
                Some(p) => {
                    let (g, x, y) = egcd(p[col], r[col]);
                    let (pa, ra) = (p[col] / g, r[col] / g);
                    let mut np: Vec<i128> = (0..n).map(|k| x * p[k] + y * r[k]).collect();
                    let mut other: Vec<i128> = (0..n).map(|k| ra * p[k] - pa * r[k]).collect();
                    for k in col + 1..n {
                        np[k] = np[k].rem_euclid(d);
                        other[k] = other[k].rem_euclid(d);
                    }
                    pivot = Some(np);
                    if other.iter().any(|&v| v != 0) {
                        rest.push(other);
                    }
                }
            }
        }
        let mut p = pivot.expect("D·e_col is always present");
        if p[col] < 0 {
            p.iter_mut().for_each(|v| *v = -*v);
        }
        out.push(p);
        rows = rest;
    }
    for i in (0..n).rev() {
        for j in 0..i {
            let k = out[j][i].div_euclid(out[i][i]);
            if k != 0 {
                let ri = out[i].clone();
                for c in i..n {
                    out[j][c] -= k * ri[c];
                }
            }
        }
    }
    out.into_iter().map(|r| r.into_iter().map(|v| v as i64).collect()).collect()
}

/// Elementary divisors of a square integer matrix of full rank.
pub fn elementary_divisors(m: &[Vec<i64>]) -> Vec<u64> {
    let n = m.len();
    let mut a: Vec<Vec<i128>> = m.iter().map(|r| r.iter().map(|&v| v as i128).collect()).collect();
    for t in 0..n {
        loop {
            // move the smallest nonzero entry of the trailing block to (t, t)
            let mut best: Option<(usize, usize)> = None;
            for i in t..n {
                for j in t..n {
                    if a[i][j] != 0 && best.map_or(true, |(bi, bj)| a[i][j].abs() < a[bi][bj].abs()) {
                        best = Some((i, j));
                    }
                }
            }
            let Some((bi, bj)) = best else { break };
            a.swap(t, bi);
            for row in a.iter_mut() {
                row.swap(t, bj);
            }
            let p = a[t][t];
            let mut clean = true;
            for i in t + 1..n {
                let q = a[i][t].div_euclid(p);
                for j in t..n {
                    a[i][j] -= q * a[t][j];
                }
                clean &= a[i][t] == 0;
            }
            for j in t + 1..n {
                let q = a[t][j].div_euclid(p);
                for i in t..n {
                    a[i][j] -= q * a[i][t];
                }
                clean &= a[t][j] == 0;
            }
            if !clean {
                continue;
            }
            // divisibility condition
            let bad = (t + 1..n).flat_map(|i| (t + 1..n).map(move |j| (i, j))).find(|&(i, j)| a[i][j] % p != 0);
            match bad {
                Some((i, _)) => {
                    for j in t..n {
                        a[t][j] += a[i][j];
                    }
                }
                None => break,
            }
        }
    }
    (0..n).map(|i| a[i][i].unsigned_abs() as u64).collect()
}

impl ResidueRing {
    /// O_w/𝔮^s or O_w/q^s O_w.
    pub fn new(ow: &OwRing, modulus: Modulus, s: u32) -> Result<Self> {
        if s == 0 {
            return Err(Error::Parse("exponent s must be positive".into()));
        }
        let ring = ow.ring().clone();
        let n = ring.degree();
        let (components, p) = match &modulus {
            Modulus::Prime(pr) => (vec![(pr.clone(), s)], pr.p),
            Modulus::Rational(q) => {
                let primes = ring.primes_above(*q)?;
                (primes.iter().map(|pr| (pr.clone(), s * pr.e)).collect(), *q)
            }
        };
        for (pr, _) in &components {
            if ow.valuation(ow.w(), pr) != Val::Fin(0) {
                return Err(Error::WNotUnitModQ(pr.label()));
            }
        }
        let d_exp = components.iter().map(|(pr, k)| (k + pr.e - 1) / pr.e).max().unwrap();
        let d = (p as i128)
            .checked_pow(d_exp)
            .filter(|&d| d < 1i128 << 40)
            .ok_or(Error::GroupTooLarge { order: u64::MAX, cap: 1 << 40 })?;
        let hnf = match &modulus {
            Modulus::Rational(_) => {
                let mut h = vec![vec![0i64; n]; n];
                for (i, row) in h.iter_mut().enumerate() {
                    row[i] = d as i64;
                }
                h
            }
            Modulus::Prime(pr) => {
                let base = two_element_hnf(ow, pr, d)?;
                let mut acc = base.clone();
                for _ in 1..s {
                    acc = ideal_product(ow, &acc, &base, d);
                }
                acc
            }
        };
        let mut strides = Vec::with_capacity(n);
        let mut size: u64 = 1;
        for row in hnf.iter().enumerate() {
            strides.push(size);
            size = size.checked_mul(row.1[row.0] as u64).ok_or(Error::GroupTooLarge { order: u64::MAX, cap: u64::MAX })?;
        }
        let mut rr = ResidueRing {
            ow: ow.clone(),
            modulus,
            s,
            components,
            hnf,
            strides,
            size,
            d: d as i64,
            digits: Vec::new(),
            w_code: 0,
        };
        rr.w_code = rr.from_element(ow.w())?;
        Ok(rr)
    }

    pub fn ow(&self) -> &OwRing {
        &self.ow
    }

    pub fn modulus(&self) -> &Modulus {
        &self.modulus
    }

    pub fn exponent(&self) -> u32 {
        self.s
    }

    pub fn components(&self) -> &[(PrimeIdeal, u32)] {
        &self.components
    }

    pub fn size(&self) -> u64 {
        self.size
    }

    pub fn dim(&self) -> usize {
        self.hnf.len()
    }

    pub fn hnf(&self) -> &[Vec<i64>] {
        &self.hnf
    }

    /// Elementary divisors of the additive group.
    pub fn additive_orders(&self) -> Vec<u64> {
        elementary_divisors(&self.hnf).into_iter().filter(|&v| v != 1).collect()
    }

    /// Multiplication by w as an integer matrix acting on row vectors of coordinates.
    pub fn mult_by_w(&self) -> Vec<Vec<i64>> {
        let n = self.dim();
        (0..n)
            .map(|i| {
                let mut e = vec![0i64; n];
                e[i] = 1;
                let c = self.encode(&e);
                self.decode(self.mul(c, self.w_code))
            })
            .collect()
    }

    pub fn w_code(&self) -> u64 {
        self.w_code
    }

    /// Precomputes a decode table; worthwhile before heavy use.
    pub fn with_table(mut self) -> Self {
        if self.size <= 1 << 22 {
            let n = self.dim();
            let mut digits = vec![0i64; self.size as usize * n];
            for code in 0..self.size {
                let v = self.decode_slow(code);
                digits[code as usize * n..(code as usize + 1) * n].copy_from_slice(&v);
            }
            self.digits = digits;
        }
        self
    }

    pub fn reduce(&self, x: &mut [i128]) {
        for (i, row) in self.hnf.iter().enumerate() {
            let k = x[i].div_euclid(row[i] as i128);
            if k != 0 {
                for (c, &r) in row.iter().enumerate().skip(i) {
                    x[c] -= k * r as i128;
                }
            }
        }
    }

    pub fn encode(&self, x: &[i64]) -> u64 {
        let mut v: Vec<i128> = x.iter().map(|&a| a as i128).collect();
        self.reduce(&mut v);
        v.iter().zip(&self.strides).map(|(&a, &s)| a as u64 * s).sum()
    }

    fn encode_reduced(&self, x: &[i128]) -> u64 {
        x.iter().zip(&self.strides).map(|(&a, &s)| a as u64 * s).sum()
    }

    fn decode_slow(&self, code: u64) -> Vec<i64> {
        let mut out = Vec::with_capacity(self.dim());
        let mut rest = code;
        for (i, row) in self.hnf.iter().enumerate() {
            let h = row[i] as u64;
            out.push((rest % h) as i64);
            rest /= h;
        }
        out
    }

    pub fn decode(&self, code: u64) -> Vec<i64> {
        if self.digits.is_empty() {
            self.decode_slow(code)
        } else {
            let n = self.dim();
            self.digits[code as usize * n..(code as usize + 1) * n].to_vec()
        }
    }

    pub fn add(&self, a: u64, b: u64) -> u64 {
        let (x, y) = (self.decode(a), self.decode(b));
        let mut v: Vec<i128> = x.iter().zip(&y).map(|(&p, &q)| p as i128 + q as i128).collect();
        self.reduce(&mut v);
        self.encode_reduced(&v)
    }

    pub fn neg(&self, a: u64) -> u64 {
        let mut v: Vec<i128> = self.decode(a).iter().map(|&p| -(p as i128)).collect();
        self.reduce(&mut v);
        self.encode_reduced(&v)
    }

    pub fn sub(&self, a: u64, b: u64) -> u64 {
        self.add(a, self.neg(b))
    }

    pub fn mul(&self, a: u64, b: u64) -> u64 {
        let (x, y) = (self.decode(a), self.decode(b));
        let sc = self.ow.ring().struct_consts();
        let n = self.dim();
        let mut v = vec![0i128; n];
        for i in 0..n {
            if x[i] == 0 {
                continue;
            }
            for j in 0..n {
                if y[j] == 0 {
                    continue;
                }
                let xy = x[i] as i128 * y[j] as i128 % self.d as i128;
                for (k, vk) in v.iter_mut().enumerate() {
                    *vk += xy * sc[i][j][k] as i128;
                }
            }
        }
        for vk in v.iter_mut() {
            *vk = vk.rem_euclid(self.d as i128);
        }
        self.reduce(&mut v);
        self.encode_reduced(&v)
    }

    pub fn one(&self) -> u64 {
        self.encode(&self.ow.ring().basis_coords(&FieldElement::one(self.ow.field())).iter().map(|c| c.to_integer().to_i64().unwrap()).collect::<Vec<_>>())
    }

    pub fn pow(&self, a: u64, mut e: u64) -> u64 {
        let mut acc = self.one();
        let mut base = a;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// Image of x ∈ O_w; denominators must be prime to the residue characteristic.
    pub fn from_element(&self, x: &FieldElement) -> Result<u64> {
        let (coords, den) = self.ow.ring().integral_parts(x);
        let d = BigInt::from(self.d);
        let den_mod = (&den % &d).to_i64().unwrap();
        let inv = intmath::inv_mod(den_mod, self.d).ok_or(Error::NotInOw)?;
        let v: Vec<i64> = coords
            .iter()
            .map(|c| ((c.mod_floor(&d) * BigInt::from(inv)) % &d).to_i64().unwrap())
            .collect();
        Ok(self.encode(&v))
    }

    /// The representative of a class as an element of O.
    pub fn lift(&self, code: u64) -> FieldElement {
        let v: Vec<BigInt> = self.decode(code).into_iter().map(BigInt::from).collect();
        self.ow.ring().from_basis_coords(&v)
    }

    /// |(O/𝔞)^×| = ∏ N(𝔮_i)^{k_i − 1}(N(𝔮_i) − 1).
    pub fn unit_group_order(&self) -> u64 {
        self.components.iter().map(|(pr, k)| pr.norm().pow(k - 1) * (pr.norm() - 1)).product()
    }

    pub fn is_unit(&self, a: u64) -> bool {
        let x = self.lift(a);
        if x.is_zero() {
            return false;
        }
        self.components.iter().all(|(pr, _)| self.ow.valuation(&x, pr) == Val::Fin(0))
    }

    pub fn inverse(&self, a: u64) -> Option<u64> {
        if !self.is_unit(a) {
            return None;
        }
        Some(self.pow(a, self.unit_group_order() - 1))
    }

    /// Multiplicative order of a unit.
    pub fn unit_order(&self, a: u64) -> u64 {
        let one = self.one();
        order_from_multiple(self.unit_group_order(), |d| self.pow(a, d) == one)
    }

    /// t_w(𝔞) = order of w in (O_w/𝔞)^×.
    pub fn t_order(&self) -> u64 {
        self.unit_order(self.w_code)
    }
}

fn coords_i128(ow: &OwRing, x: &FieldElement) -> Result<Vec<i128>> {
    ow.ring()
        .basis_coords(x)
        .iter()
        .map(|c| {
            if c.is_integer() {
                c.to_integer().to_i128().ok_or_else(|| Error::Anomaly("coordinate overflow".into()))
            } else {
                Err(Error::Anomaly(format!("{x} is not integral")))
            }
        })
        .collect()
}

fn two_element_hnf(ow: &OwRing, pr: &PrimeIdeal, d: i128) -> Result<Vec<Vec<i64>>> {
    let ring = ow.ring();
    let n = ring.degree();
    let alpha = coords_i128(ow, &pr.generator)?;
    let mut rows = Vec::new();
    for j in 0..n {
        let mut e = vec![0i128; n];
        e[j] = pr.p as i128;
        rows.push(e);
        rows.push(mul_coords(ow, &alpha, &unit_vec(n, j)));
    }
    Ok(hnf_mod(&rows, n, d))
}

fn unit_vec(n: usize, j: usize) -> Vec<i128> {
    let mut e = vec![0i128; n];
    e[j] = 1;
    e
}

fn mul_coords(ow: &OwRing, x: &[i128], y: &[i128]) -> Vec<i128> {
    let sc = ow.ring().struct_consts();
    let n = x.len();
    let mut v = vec![0i128; n];
    for i in 0..n {
        for j in 0..n {
            for (k, vk) in v.iter_mut().enumerate() {
                *vk += x[i] * y[j] * sc[i][j][k] as i128;
            }
        }
    }
    v
}

fn ideal_product(ow: &OwRing, a: &[Vec<i64>], b: &[Vec<i64>], d: i128) -> Vec<Vec<i64>> {
    let n = a.len();
    let mut rows = Vec::new();
    for x in a {
        for y in b {
            let xv: Vec<i128> = x.iter().map(|&v| v as i128).collect();
            let yv: Vec<i128> = y.iter().map(|&v| v as i128).collect();
            rows.push(mul_coords(ow, &xv, &yv).into_iter().map(|v| v.rem_euclid(d)).collect());
        }
    }
    hnf_mod(&rows, n, d)
}

/// t_w(𝔮, s).
pub fn t_order_prime(ow: &OwRing, prime: &PrimeIdeal, s: u32) -> Result<u64> {
    Ok(ResidueRing::new(ow, Modulus::Prime(prime.clone()), s)?.t_order())
}

/// t_w(q, s).
pub fn t_order_rational(ow: &OwRing, q: u64, s: u32) -> Result<u64> {
    Ok(ResidueRing::new(ow, Modulus::Rational(q), s)?.t_order())
}

/// u_w(q) = lcm of t_w(𝔮_i, 1) over the primes above q.
pub fn u_order(ow: &OwRing, q: u64) -> Result<u64> {
    let mut u = 1;
    for pr in ow.ring().primes_above(q)?.iter() {
        u = lcm_u64(u, t_order_prime(ow, pr, 1)?);
    }
    Ok(u)
}

/// O_w/q^s ≅ ⊕ O_w/𝔮_i^{s e_i}.
#[derive(Clone, Debug)]
pub struct CrtSplit {
    pub whole: ResidueRing,
    pub parts: Vec<ResidueRing>,
    idempotents: Vec<u64>,
}

impl CrtSplit {
    pub fn new(ow: &OwRing, q: u64, s: u32) -> Result<Self> {
        let whole = ResidueRing::new(ow, Modulus::Rational(q), s)?.with_table();
        let parts: Vec<ResidueRing> = whole
            .components()
            .iter()
            .map(|(pr, k)| ResidueRing::new(ow, Modulus::Prime(pr.clone()), *k).map(|r| r.with_table()))
            .collect::<Result<_>>()?;
        let idempotents = if parts.len() == 1 {
            vec![whole.one()]
        } else {
            let max_k = whole.components().iter().map(|c| c.1 as u64).max().unwrap();
            whole
                .components()
                .iter()
                .map(|(pr, k)| {
                    // u = β^e / p^{e-1} is a unit at 𝔮_i and lies in every other 𝔮_j
                    let beta = pr
                        .witness()
                        .ok_or_else(|| Error::UnsupportedDegree(format!("no witness for {}", pr.label())))?;
                    let u = beta.pow_u(pr.e as u64).scale(&crate::qmat::Q::new(1.into(), BigInt::from(pr.p).pow(pr.e - 1)));
                    let mut exp = (pr.norm() - 1) * pr.norm().pow(*k);
                    while exp < max_k {
                        exp *= pr.norm();
                    }
                    Ok(whole.pow(whole.from_element(&u)?, exp))
                })
                .collect::<Result<Vec<_>>>()?
        };
        let split = CrtSplit { whole, parts, idempotents };
        for (i, &e) in split.idempotents.iter().enumerate() {
            let img = split.forward(e);
            for (j, part) in split.parts.iter().enumerate() {
                let want = if i == j { part.one() } else { 0 };
                if img[j] != want {
                    return Err(Error::Anomaly("CRT idempotent check failed".into()));
                }
            }
        }
        Ok(split)
    }

    pub fn forward(&self, code: u64) -> Vec<u64> {
        let v = self.whole.decode(code);
        self.parts.iter().map(|p| p.encode(&v)).collect()
    }

    pub fn backward(&self, parts: &[u64]) -> u64 {
        let mut acc = 0;
        for ((part, &x), &e) in self.parts.iter().zip(parts).zip(&self.idempotents) {
            let lifted = self.whole.encode(&part.decode(x));
            acc = self.whole.add(acc, self.whole.mul(e, lifted));
        }
        acc
    }

    pub fn idempotents(&self) -> &[u64] {
        &self.idempotents
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numberfield::NumberField;
    use crate::valuation::IntegerRing;

    fn ow(poly: &[&str], w: &str) -> OwRing {
        let ring = IntegerRing::new(&NumberField::from_strings(poly, 30).unwrap()).unwrap();
        let w = FieldElement::parse(ring.field(), w).unwrap();
        OwRing::new(&ring, &w).unwrap()
    }

    #[test]
    fn hnf_and_divisors() {
        let h = hnf_mod(&[vec![2, 4], vec![6, 3]], 2, 100);
        // lattice det divides 2·3 − 4·6 = −18 together with 100·Z^2
        assert_eq!(h[0][0] * h[1][1], 2);
        assert_eq!(elementary_divisors(&[vec![2, 0], vec![0, 3]]), vec![1, 6]);
        assert_eq!(elementary_divisors(&[vec![4, 2], vec![0, 6]]), vec![2, 12]);
    }

    #[test]
    fn order_examples() {
        let q2 = ow(&["0", "1"], "2");
        assert_eq!(t_order_rational(&q2, 5, 1).unwrap(), 4);
        assert_eq!(t_order_rational(&q2, 5, 2).unwrap(), 20);
        assert_eq!(u_order(&q2, 5).unwrap(), 4);
        assert_eq!(u_order(&q2, 7).unwrap(), 3);
        assert!(matches!(t_order_rational(&q2, 2, 1), Err(Error::WNotUnitModQ(_))));
        let q32 = ow(&["0", "1"], "3/2");
        assert_eq!(t_order_rational(&q32, 5, 1).unwrap(), 2);
    }

    #[test]
    fn prime_rings_are_fields() {
        let r = ow(&["-2", "0", "1"], "w");
        for q in [3u64, 5, 7] {
            for pr in r.ring().primes_above(q).unwrap().iter() {
                let rr = ResidueRing::new(&r, Modulus::Prime(pr.clone()), 1).unwrap();
                assert_eq!(rr.size(), pr.norm());
                for a in 1..rr.size() {
                    assert!(rr.inverse(a).is_some());
                }
            }
        }
    }

    #[test]
    fn crt_examples() {
        let q2 = ow(&["0", "1"], "2");
        let c = CrtSplit::new(&q2, 5, 2).unwrap();
        assert_eq!(c.parts.len(), 1);
        for x in 0..c.whole.size() {
            assert_eq!(c.backward(&c.forward(x)), x);
        }
        let r = ow(&["-2", "0", "1"], "w");
        for s in 1..=2 {
            let c = CrtSplit::new(&r, 7, s).unwrap();
            assert_eq!(c.parts.iter().map(|p| p.size()).product::<u64>(), c.whole.size());
            for x in 0..c.whole.size() {
                assert_eq!(c.backward(&c.forward(x)), x);
            }
        }
        // w = √2 goes to a pair of square roots of 2 mod 7, negatives of each other
        let c = CrtSplit::new(&r, 7, 1).unwrap();
        let img = c.forward(c.whole.w_code());
        let vals: Vec<i64> = img
            .iter()
            .zip(&c.parts)
            .map(|(&x, p)| (0..7).find(|&k| p.from_element(&FieldElement::from_int(p.ow().field(), k)).unwrap() == x).unwrap())
            .collect();
        assert_eq!((vals[0] * vals[0]) % 7, 2);
        assert_eq!((vals[0] + vals[1]) % 7, 0);
    }
}
