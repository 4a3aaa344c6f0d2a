//! The Bruhat–Tits tree T(v_𝔭) of rank-2 lattice classes.
//!
//! A class is stored by its canonical basis [[π^a, c], [0, 1]] (columns generate the
//! O_𝔭-lattice), where c is a π-adic digit expansion reduced modulo π^a.

use crate::error::{Error, Result};
use crate::numberfield::FieldElement;
use crate::valuation::{PrimeIdeal, Ring, Val};
use num_bigint::BigInt;
use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt::Write as _;

/// Residue fields larger than this are rejected.
pub const MAX_RESIDUE_FIELD: u64 = 1 << 16;

/// A 2×2 matrix of field elements, `m[row][col]`; the columns span the lattice.
pub type Mat2 = [[FieldElement; 2]; 2];

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LatticeClass {
    prime: (u64, usize),
    a: i64,
    c: FieldElement,
}

impl LatticeClass {
    /// Exponent a of the (1,1) entry π^a.
    pub fn a(&self) -> i64 {
        self.a
    }

    /// Reduced corner entry c.
    pub fn c(&self) -> &FieldElement {
        &self.c
    }

    pub fn label(&self) -> String {
        format!("[a={}, c={}]", self.a, self.c)
    }
}

/// T(v_𝔭) for one prime 𝔭.
#[derive(Clone, Debug)]
pub struct Tree {
    ring: Ring,
    prime: PrimeIdeal,
    digits: Vec<FieldElement>,
}

impl Tree {
    pub fn new(ring: &Ring, prime: &PrimeIdeal) -> Result<Self> {
        let n = prime.norm();
        if n > MAX_RESIDUE_FIELD {
            return Err(Error::UnsupportedField(format!("residue field of {} has {n} elements", prime.label())));
        }
        let mut tree = Tree { ring: ring.clone(), prime: prime.clone(), digits: Vec::new() };
        tree.digits = tree.residue_digits()?;
        Ok(tree)
    }

    // Pairwise incongruent small elements of O, one per residue class of O/𝔭, zero first.
    fn residue_digits(&self) -> Result<Vec<FieldElement>> {
        let deg = self.ring.degree();
        let p = self.prime.p;
        let want = self.prime.norm() as usize;
        let mut out: Vec<FieldElement> = Vec::with_capacity(want);
        let total = (p as u128).pow(deg as u32);
        let mut code: u128 = 0;
        while out.len() < want && code < total {
            let mut rest = code;
            let coords: Vec<BigInt> = (0..deg)
                .map(|_| {
                    let d = rest % p as u128;
                    rest /= p as u128;
                    BigInt::from(d as u64)
                })
                .collect();
            let x = self.ring.from_basis_coords(&coords);
            if out.iter().all(|r| self.v(&(&x - r)) < Val::Fin(1)) {
                out.push(x);
            }
            code += 1;
        }
        if out.len() != want {
            return Err(Error::Anomaly(format!("found {} residues mod {}, expected {want}", out.len(), self.prime.label())));
        }
        Ok(out)
    }

    pub fn prime(&self) -> &PrimeIdeal {
        &self.prime
    }

    pub fn ring(&self) -> &Ring {
        &self.ring
    }

    /// Representatives of O/𝔭 used as π-adic digits.
    pub fn digits(&self) -> &[FieldElement] {
        &self.digits
    }

    pub fn v(&self, x: &FieldElement) -> Val {
        self.ring.valuation(x, &self.prime)
    }

    fn pi_pow(&self, k: i64) -> FieldElement {
        self.prime.uniformizer.pow(k).expect("uniformizer is nonzero")
    }

    fn key(&self) -> (u64, usize) {
        (self.prime.p, self.prime.index)
    }

    // Canonical representative of c + π^a O_𝔭.
    fn reduce_corner(&self, c: &FieldElement, a: i64) -> FieldElement {
        let field = self.ring.field();
        let mut rem = c.clone();
        let mut out = FieldElement::zero(field);
        loop {
            let j = match self.v(&rem) {
                Val::Inf => break,
                Val::Fin(j) if j >= a => break,
                Val::Fin(j) => j,
            };
            let pj = self.pi_pow(j);
            let unit = rem.div(&pj).expect("nonzero");
            let r = self
                .digits
                .iter()
                .find(|r| self.v(&(&unit - *r)) >= Val::Fin(1))
                .expect("digit set covers O/p");
            let term = r * &pj;
            out = out + &term;
            rem = rem - term;
        }
        out
    }

    /// Canonical class of the lattice spanned by the columns of `m`.
    pub fn normalize(&self, m: &Mat2) -> Result<LatticeClass> {
        let det = &m[0][0] * &m[1][1] - &m[0][1] * &m[1][0];
        if det.is_zero() {
            return Err(Error::SingularBasis);
        }
        let (mut u, mut w) = ([m[0][0].clone(), m[1][0].clone()], [m[0][1].clone(), m[1][1].clone()]);
        if self.v(&u[1]) < self.v(&w[1]) {
            std::mem::swap(&mut u, &mut w);
        }
        // w[1] now has minimal valuation in the bottom row; clear u[1]
        let f = u[1].div(&w[1])?;
        let alpha = &u[0] - &(&f * &w[0]);
        let a = self.v(&alpha).fin() - self.v(&w[1]).fin();
        let c = w[0].div(&w[1])?;
        Ok(LatticeClass { prime: self.key(), a, c: self.reduce_corner(&c, a) })
    }

    /// Canonical class with basis [[π^a, c], [0, 1]].
    pub fn class(&self, a: i64, c: &FieldElement) -> LatticeClass {
        LatticeClass { prime: self.key(), a, c: self.reduce_corner(c, a) }
    }

    pub fn identity(&self) -> LatticeClass {
        self.standard(0)
    }

    /// [L_𝔭(n)], the class of π^{-n} O_𝔭 ⊕ O_𝔭.
    pub fn standard(&self, n: i64) -> LatticeClass {
        LatticeClass { prime: self.key(), a: -n, c: FieldElement::zero(self.ring.field()) }
    }

    /// The canonical basis matrix.
    pub fn matrix(&self, l: &LatticeClass) -> Mat2 {
        let field = self.ring.field();
        [[self.pi_pow(l.a), l.c.clone()], [FieldElement::zero(field), FieldElement::one(field)]]
    }

    fn check(&self, l: &LatticeClass) -> Result<()> {
        if l.prime != self.key() {
            return Err(Error::PrimeMismatch);
        }
        Ok(())
    }

    /// d([A], [B]) = v(det M) − 2·min v(M_ij) for M = A⁻¹B.
    pub fn distance(&self, x: &LatticeClass, y: &LatticeClass) -> Result<u64> {
        self.check(x)?;
        self.check(y)?;
        let shift = y.a - x.a;
        let corner = match self.v(&(&y.c - &x.c)) {
            Val::Inf => shift.max(0),
            Val::Fin(v) => v - x.a,
        };
        let min = shift.min(corner).min(0);
        Ok((shift - 2 * min) as u64)
    }

    /// The class of [[y, x], [0, 1]]·L.
    pub fn act(&self, x: &FieldElement, y: &FieldElement, l: &LatticeClass) -> Result<LatticeClass> {
        self.check(l)?;
        if y.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let field = self.ring.field();
        let m = [
            [y * &self.pi_pow(l.a), &(y * &l.c) + x],
            [FieldElement::zero(field), FieldElement::one(field)],
        ];
        self.normalize(&m)
    }

    /// f_𝔭(A) = lim n − d(A, [L_𝔭(n)]).
    pub fn busemann(&self, l: &LatticeClass) -> Result<i64> {
        let d0 = self.distance(l, &self.identity())? as i64;
        let cap = 2 * d0 + 4;
        let mut n = -d0 - 1;
        let mut prev = n - self.distance(l, &self.standard(n))? as i64;
        loop {
            n += 1;
            if n > cap {
                return Err(Error::BusemannCap(n));
            }
            let cur = n - self.distance(l, &self.standard(n))? as i64;
            if cur == prev {
                return Ok(cur);
            }
            prev = cur;
        }
    }

    /// (z₁, z₂, z₂') read off the canonical basis.
    pub fn z_invariants(&self, l: &LatticeClass) -> (i64, i64, i64) {
        let z2 = match self.v(&l.c) {
            Val::Inf => 0,
            Val::Fin(v) => (l.a - v).max(0),
        };
        (l.a, z2, 0)
    }

    /// The N(𝔭) + 1 neighbours of a vertex.
    pub fn neighbors(&self, l: &LatticeClass) -> Vec<LatticeClass> {
        let pia = self.pi_pow(l.a);
        let mut out: Vec<LatticeClass> = self
            .digits
            .iter()
            .map(|r| {
                // B·[[π, r], [0, 1]]
                let c = &(&pia * r) + &l.c;
                self.class(l.a + 1, &c)
            })
            .collect();
        out.push(self.class(l.a - 1, &l.c));
        out
    }

    /// Vertices of the geodesic from x to y, both ends included.
    pub fn geodesic(&self, x: &LatticeClass, y: &LatticeClass) -> Result<Vec<LatticeClass>> {
        let mut d = self.distance(x, y)?;
        let mut path = vec![x.clone()];
        let mut cur = x.clone();
        while d > 0 {
            let next = self
                .neighbors(&cur)
                .into_iter()
                .find(|nb| self.distance(nb, y).map(|e| e + 1 == d).unwrap_or(false))
                .ok_or_else(|| Error::Anomaly("no neighbour closer to target".into()))?;
            d -= 1;
            path.push(next.clone());
            cur = next;
        }
        Ok(path)
    }

    /// All vertices within distance r of a centre, in breadth-first order.
    pub fn ball(&self, center: &LatticeClass, r: u64) -> Vec<LatticeClass> {
        let mut seen: HashSet<LatticeClass> = HashSet::from([center.clone()]);
        let mut order = vec![center.clone()];
        let mut queue = VecDeque::from([(center.clone(), 0u64)]);
        while let Some((v, d)) = queue.pop_front() {
            if d == r {
                continue;
            }
            for nb in self.neighbors(&v) {
                if seen.insert(nb.clone()) {
                    order.push(nb.clone());
                    queue.push_back((nb, d + 1));
                }
            }
        }
        order
    }

    /// DOT rendering of the radius-r neighbourhood of a vertex.
    pub fn to_dot(&self, center: &LatticeClass, r: u64) -> String {
        let ball = self.ball(center, r);
        let index: HashMap<&LatticeClass, usize> = ball.iter().enumerate().map(|(i, v)| (v, i)).collect();
        let mut s = String::from("graph tree {\n");
        for (i, v) in ball.iter().enumerate() {
            let _ = writeln!(s, "  v{i} [label=\"{}\"];", v.label().replace('"', "'"));
        }
        for (i, v) in ball.iter().enumerate() {
            for nb in self.neighbors(v) {
                if let Some(&j) = index.get(&nb) {
                    if i < j {
                        let _ = writeln!(s, "  v{i} -- v{j};");
                    }
                }
            }
        }
        s.push_str("}\n");
        s
    }
}

/// v(det M) − 2·min v(M_ij) for M = A⁻¹B with arbitrary invertible bases.
pub fn matrix_distance(tree: &Tree, a: &Mat2, b: &Mat2) -> Result<u64> {
    let det = &a[0][0] * &a[1][1] - &a[0][1] * &a[1][0];
    if det.is_zero() {
        return Err(Error::SingularBasis);
    }
    let inv = [
        [a[1][1].div(&det)?, -a[0][1].div(&det)?],
        [-a[1][0].div(&det)?, a[0][0].div(&det)?],
    ];
    let m: Vec<Vec<FieldElement>> = (0..2)
        .map(|i| (0..2).map(|j| &(&inv[i][0] * &b[0][j]) + &(&inv[i][1] * &b[1][j])).collect())
        .collect();
    let dm = &m[0][0] * &m[1][1] - &m[0][1] * &m[1][0];
    let vd = tree.v(&dm).finite().ok_or(Error::SingularBasis)?;
    let min = m.iter().flatten().map(|x| tree.v(x)).min().unwrap().fin();
    Ok((vd - 2 * min) as u64)
}
