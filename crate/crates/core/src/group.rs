//! The finite groups A ⋊ Z/t with A = O_w/𝔞, their subgroups, and the hyper-elementary
//! classification.

use crate::error::{Error, Result};
use crate::intmath::{factor_u64, gcd_u64};
use crate::numberfield::FieldElement;
use crate::residue::{CrtSplit, ResidueRing};
use std::collections::HashMap;
use std::sync::Arc;

pub const DEFAULT_ORDER_CAP: u64 = 50_000;

/// A finite group O_w/𝔞 ⋊ Z/t, t the order of w, with (a₁,b₁)(a₂,b₂) = (a₁ + w^{b₁}a₂, b₁+b₂).
///
/// Elements are coded as b·|A| + a.
#[derive(Clone, Debug)]
pub struct SemidirectGroup {
    ring: Arc<ResidueRing>,
    t: u64,
    asize: u64,
    mulw: Vec<u32>,
    add: Option<Vec<u32>>,
    neg: Vec<u32>,
}

/// Adds via a table when |A|² stays below this.
const ADD_TABLE_LIMIT: u64 = 1 << 22;

impl SemidirectGroup {
    pub fn new(ring: ResidueRing, cap: u64) -> Result<Self> {
        let ring = ring.with_table();
        let t = ring.t_order();
        Self::with_t(ring, t, cap)
    }

    /// A ⋊ Z/t for a multiple t of the order of w.
    pub fn with_t(ring: ResidueRing, t: u64, cap: u64) -> Result<Self> {
        let asize = ring.size();
        let order = asize.saturating_mul(t);
        if order > cap || order > u32::MAX as u64 {
            return Err(Error::GroupTooLarge { order, cap });
        }
        if ring.pow(ring.w_code(), t) != ring.one() {
            return Err(Error::Anomaly(format!("w^{t} is not 1 in the residue ring")));
        }
        let ring = ring.with_table();
        let mut mulw = vec![0u32; order as usize];
        let mut wb = ring.one();
        for b in 0..t {
            for a in 0..asize {
                mulw[(b * asize + a) as usize] = ring.mul(wb, a) as u32;
            }
            wb = ring.mul(wb, ring.w_code());
        }
        let add = (asize * asize <= ADD_TABLE_LIMIT).then(|| {
            let mut tab = vec![0u32; (asize * asize) as usize];
            for x in 0..asize {
                for y in 0..asize {
                    tab[(x * asize + y) as usize] = ring.add(x, y) as u32;
                }
            }
            tab
        });
        let neg = (0..asize).map(|a| ring.neg(a) as u32).collect();
        Ok(SemidirectGroup { ring: Arc::new(ring), t, asize, mulw, add, neg })
    }

    pub fn ring(&self) -> &ResidueRing {
        &self.ring
    }

    pub fn t(&self) -> u64 {
        self.t
    }

    pub fn order(&self) -> u64 {
        self.asize * self.t
    }

    pub fn ring_size(&self) -> u64 {
        self.asize
    }

    pub fn identity(&self) -> u32 {
        0
    }

    pub fn make(&self, a: u64, b: u64) -> u32 {
        ((b % self.t) * self.asize + a) as u32
    }

    pub fn split(&self, g: u32) -> (u64, u64) {
        (g as u64 % self.asize, g as u64 / self.asize)
    }

    fn radd(&self, x: u32, y: u32) -> u32 {
        match &self.add {
            Some(tab) => tab[(x as u64 * self.asize + y as u64) as usize],
            None => self.ring.add(x as u64, y as u64) as u32,
        }
    }

    /// w^b·a in A.
    pub fn twist(&self, b: u64, a: u64) -> u64 {
        self.mulw[((b % self.t) * self.asize + a) as usize] as u64
    }

    pub fn mul(&self, g: u32, h: u32) -> u32 {
        let (a1, b1) = self.split(g);
        let (a2, b2) = self.split(h);
        let a = self.radd(a1 as u32, self.mulw[(b1 * self.asize + a2) as usize]);
        ((b1 + b2) % self.t * self.asize) as u32 + a
    }

    pub fn inv(&self, g: u32) -> u32 {
        let (a, b) = self.split(g);
        let nb = (self.t - b) % self.t;
        let na = self.neg[self.mulw[(nb * self.asize + a) as usize] as usize];
        (nb * self.asize) as u32 + na
    }

    pub fn element_order(&self, g: u32) -> u64 {
        let mut k = 1;
        let mut x = g;
        while x != 0 {
            x = self.mul(x, g);
            k += 1;
        }
        k
    }

    /// α_n(x, z) = (x mod 𝔞, z mod t).
    pub fn reduce(&self, x: &FieldElement, z: i64) -> Result<u32> {
        let a = self.ring.from_element(x)?;
        Ok(self.make(a, z.rem_euclid(self.t as i64) as u64))
    }

    /// The subgroup generated by `gens`.
    pub fn closure(&self, gens: &[u32]) -> Subgroup {
        self.extend(&Subgroup::trivial(self.order()), gens)
    }

    /// The subgroup generated by H and `extra`.
    pub fn extend(&self, h: &Subgroup, extra: &[u32]) -> Subgroup {
        let mut gens = h.gens.clone();
        for &g in extra {
            if !gens.contains(&g) && g != 0 {
                gens.push(g);
            }
        }
        let mut bits = h.bits.clone();
        let mut elems = h.elems.clone();
        let mut i = 0;
        // products of known elements with all generators, then new elements with all generators
        while i < elems.len() {
            let e = elems[i];
            for &g in &gens {
                let p = self.mul(e, g);
                if !bit(&bits, p) {
                    set_bit(&mut bits, p);
                    elems.push(p);
                }
            }
            i += 1;
        }
        elems.sort_unstable();
        Subgroup { elems, bits, gens }
    }

    /// All cyclic subgroups, each once.
    pub fn cyclic_subgroups(&self) -> Vec<Subgroup> {
        let n = self.order();
        let mut covered = vec![false; n as usize];
        let mut out = Vec::new();
        for g in 0..n as u32 {
            if covered[g as usize] {
                continue;
            }
            let mut powers = vec![0u32];
            let mut x = g;
            while x != 0 {
                powers.push(x);
                x = self.mul(x, g);
            }
            let ord = powers.len() as u64;
            // every generator of <g> gives the same subgroup
            for (k, &p) in powers.iter().enumerate() {
                if gcd_u64(k as u64, ord) == 1 {
                    covered[p as usize] = true;
                }
            }
            let mut bits = vec![0u64; n.div_ceil(64) as usize];
            for &p in &powers {
                set_bit(&mut bits, p);
            }
            powers.sort_unstable();
            out.push(Subgroup { elems: powers, bits, gens: if g == 0 { vec![] } else { vec![g] } });
        }
        out
    }

    /// Every subgroup exactly once, sorted by order then elements.
    pub fn enumerate_subgroups(&self, cap: u64) -> Result<Vec<Subgroup>> {
        if self.order() > cap {
            return Err(Error::GroupTooLarge { order: self.order(), cap });
        }
        let cyclic = self.cyclic_subgroups();
        let mut seen: HashMap<Vec<u64>, usize> = HashMap::new();
        let mut all: Vec<Subgroup> = Vec::new();
        for c in &cyclic {
            seen.insert(c.bits.clone(), all.len());
            all.push(c.clone());
        }
        let mut i = 0;
        while i < all.len() {
            let h = all[i].clone();
            for c in &cyclic {
                let Some(&g) = c.gens.first() else { continue };
                if h.contains(g) {
                    continue;
                }
                let j = self.extend(&h, &[g]);
                if !seen.contains_key(&j.bits) {
                    seen.insert(j.bits.clone(), all.len());
                    all.push(j);
                }
            }
            i += 1;
        }
        all.sort_by(|a, b| a.order().cmp(&b.order()).then_with(|| a.elems.cmp(&b.elems)));
        for h in all.iter_mut() {
            h.gens = self.minimal_generators(h);
        }
        Ok(all)
    }

    /// A generating list of H with no redundant member, built greedily from small codes.
    pub fn minimal_generators(&self, h: &Subgroup) -> Vec<u32> {
        let mut cur = Subgroup::trivial(self.order());
        let mut gens = Vec::new();
        // prefer elements of large order
        let mut cand: Vec<(u64, u32)> = h.elems.iter().map(|&g| (self.element_order(g), g)).collect();
        cand.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
        for (_, g) in cand {
            if cur.order() == h.order() {
                break;
            }
            if !cur.contains(g) {
                cur = self.extend(&cur, &[g]);
                gens.push(g);
            }
        }
        gens
    }

    pub fn is_normal_in(&self, c: &Subgroup, h: &Subgroup) -> bool {
        h.gens
            .iter()
            .all(|&x| c.gens.iter().all(|&g| c.contains(self.mul(self.mul(x, g), self.inv(x)))))
    }

    /// A normal cyclic C ≤ H with H/C a p-group and p ∤ |C|, if one exists.
    pub fn is_hyperelementary(&self, h: &Subgroup) -> Option<HyperWitness> {
        let mut cands: Vec<Subgroup> = Vec::new();
        let mut covered = vec![false; self.order() as usize];
        for &g in &h.elems {
            if covered[g as usize] {
                continue;
            }
            let c = self.closure(&[g]);
            for &x in &c.elems {
                covered[x as usize] = true;
            }
            cands.push(c);
        }
        cands.sort_by(|a, b| b.order().cmp(&a.order()).then(a.elems.cmp(&b.elems)));
        cands.dedup_by(|a, b| a.elems == b.elems);
        let ho = h.order();
        for c in cands {
            let co = c.order();
            let idx = ho / co;
            let p = if idx == 1 {
                (2u64..).find(|&p| crate::intmath::is_prime(p) && co % p != 0).unwrap()
            } else {
                let f = factor_u64(idx);
                if f.len() != 1 {
                    continue;
                }
                f[0].0
            };
            if co % p == 0 || !self.is_normal_in(&c, h) {
                continue;
            }
            return Some(HyperWitness { c_generator: c.gens.first().copied().unwrap_or(0), c_order: co, p, quotient_order: idx });
        }
        None
    }

    /// Conjugates by (x, 0): (x,0)(a,b)(x,0)⁻¹ = (x + a − w^b x, b).
    pub fn conjugate_by_translation(&self, x: u64, g: u32) -> u32 {
        let (a, b) = self.split(g);
        let r = &self.ring;
        let v = r.sub(r.add(x, a), self.twist(b, x));
        self.make(v, b)
    }

    /// x ∈ A with (w^b − 1)x = a for every generator (a, b) of H, so (x,0)H(x,0)⁻¹ ⊆ {0} ⋊ Z/t.
    pub fn axis_conjugator(&self, h: &Subgroup) -> Option<u64> {
        let r = &self.ring;
        let one = r.one();
        let gens: Vec<(u64, u64)> = h.gens.iter().map(|&g| self.split(g)).collect();
        let works = |x: u64| gens.iter().all(|&(a, b)| r.mul(r.sub(self.twist(b, one), one), x) == a);
        for &(a, b) in &gens {
            if let Some(inv) = r.inverse(r.sub(self.twist(b, one), one)) {
                let x = r.mul(inv, a);
                return works(x).then_some(x);
            }
        }
        (0..self.asize).find(|&x| works(x))
    }

    /// Case split for A = O_w/𝔮^s: kernel part, prime-to-q part, or conjugate into the axis.
    pub fn classify(&self, h: &Subgroup, t1: u64) -> Result<Verdict> {
        if self.is_hyperelementary(h).is_none() {
            return Err(Error::NotHyperElementary);
        }
        let bs: Vec<u64> = h.elems.iter().map(|&g| self.split(g).1).collect();
        if bs.iter().all(|b| b % t1 == 0) {
            return Ok(Verdict::InKernel);
        }
        let co = self.t / t1;
        if bs.iter().all(|b| b % co == 0) {
            return Ok(Verdict::InPrimeToQ);
        }
        if let Some(x) = self.axis_conjugator(h) {
            let ok = h.elems.iter().all(|&g| self.split(self.conjugate_by_translation(x, g)).0 == 0);
            if ok {
                return Ok(Verdict::ConjugateToCyclic { x });
            }
        }
        Ok(Verdict::NotClassifiable)
    }

    /// Index [Z/t : π(H)].
    pub fn axis_index(&self, h: &Subgroup) -> u64 {
        h.gens.iter().fold(self.t, |g, &x| gcd_u64(g, self.split(x).1))
    }

    /// A conjugator (x, y) in A ⋊ A^× with (x,y)H(x,y)⁻¹ ⊆ {0} ⋊ Z/t, built componentwise
    /// through the CRT splitting of A = O_w/q^s.
    pub fn find_conjugator_into_cyclic(&self, h: &Subgroup, crt: &CrtSplit) -> Result<ExtendedConjugator> {
        let whole = &crt.whole;
        if whole.size() != self.asize {
            return Err(Error::ShapeMismatch);
        }
        let gens: Vec<(u64, u64)> = h.gens.iter().map(|&g| self.split(g)).collect();
        let mut xs = Vec::with_capacity(crt.parts.len());
        for (i, part) in crt.parts.iter().enumerate() {
            let one = part.one();
            let wp = part.w_code();
            let local: Vec<(u64, u64)> = gens.iter().map(|&(a, b)| (crt.forward(a)[i], part.sub(part.pow(wp, b), one))).collect();
            let works = |x: u64| local.iter().all(|&(a, m)| part.mul(m, x) == a);
            let mut found = None;
            for &(a, m) in &local {
                if let Some(inv) = part.inverse(m) {
                    let x = part.mul(inv, a);
                    found = works(x).then_some(x);
                    break;
                }
            }
            if found.is_none() {
                found = (0..part.size()).find(|&x| works(x));
            }
            xs.push(found.ok_or(Error::NoConjugatorFound)?);
        }
        let x = crt.backward(&xs);
        let y = whole.one();
        let conj = ExtendedConjugator { x, y };
        for &g in &h.elems {
            let (a, b) = self.split(g);
            // (x,y)(a,u)(x,y)⁻¹ = (x + y a − u x, u), u = w^b
            let u = self.twist(b, whole.one());
            let v = whole.sub(whole.add(x, whole.mul(y, a)), whole.mul(u, x));
            if v != 0 {
                return Err(Error::NoConjugatorFound);
            }
        }
        Ok(conj)
    }
}

/// An element (x, y) of A ⋊ A^×.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExtendedConjugator {
    pub x: u64,
    pub y: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HyperWitness {
    pub c_generator: u32,
    pub c_order: u64,
    pub p: u64,
    pub quotient_order: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    InKernel,
    InPrimeToQ,
    ConjugateToCyclic { x: u64 },
    NotClassifiable,
}

impl Verdict {
    pub fn name(&self) -> &'static str {
        match self {
            Verdict::InKernel => "InKernelCase",
            Verdict::InPrimeToQ => "InPrimeToQCase",
            Verdict::ConjugateToCyclic { .. } => "ConjugateToCyclic",
            Verdict::NotClassifiable => "NotClassifiable",
        }
    }
}

fn bit(bits: &[u64], i: u32) -> bool {
    bits[(i / 64) as usize] >> (i % 64) & 1 == 1
}

fn set_bit(bits: &mut [u64], i: u32) {
    bits[(i / 64) as usize] |= 1 << (i % 64);
}

/// A subgroup as a sorted element list plus membership bitset.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Subgroup {
    elems: Vec<u32>,
    bits: Vec<u64>,
    gens: Vec<u32>,
}

impl Subgroup {
    pub fn trivial(group_order: u64) -> Self {
        let mut bits = vec![0u64; group_order.div_ceil(64) as usize];
        set_bit(&mut bits, 0);
        Subgroup { elems: vec![0], bits, gens: vec![] }
    }

    pub fn order(&self) -> u64 {
        self.elems.len() as u64
    }

    pub fn elements(&self) -> &[u32] {
        &self.elems
    }

    pub fn generators(&self) -> &[u32] {
        &self.gens
    }

    pub fn contains(&self, g: u32) -> bool {
        bit(&self.bits, g)
    }

    pub fn is_subgroup_of(&self, other: &Subgroup) -> bool {
        self.elems.iter().all(|&g| other.contains(g))
    }

    /// Membership bitset, usable as a hash key.
    pub fn key(&self) -> &[u64] {
        &self.bits
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numberfield::NumberField;
    use crate::residue::Modulus;
    use crate::valuation::{IntegerRing, OwRing};
    use std::collections::HashSet;

    fn group(poly: &[&str], w: &str, q: u64, m: u32) -> SemidirectGroup {
        let ring = IntegerRing::new(&NumberField::from_strings(poly, 30).unwrap()).unwrap();
        let w = FieldElement::parse(ring.field(), w).unwrap();
        let ow = OwRing::new(&ring, &w).unwrap();
        SemidirectGroup::new(ResidueRing::new(&ow, Modulus::Rational(q), m).unwrap(), DEFAULT_ORDER_CAP).unwrap()
    }

    fn pair_census(g: &SemidirectGroup) -> usize {
        let cyc = g.cyclic_subgroups();
        let mut seen: HashSet<Vec<u64>> = HashSet::new();
        for a in &cyc {
            for b in &cyc {
                let gens: Vec<u32> = a.generators().iter().chain(b.generators()).copied().collect();
                seen.insert(g.closure(&gens).key().to_vec());
            }
        }
        seen.len()
    }

    #[test]
    fn group_laws() {
        let g = group(&["0", "1"], "2", 5, 1);
        assert_eq!(g.order(), 20);
        let n = g.order() as u32;
        for x in 0..n {
            assert_eq!(g.mul(x, g.inv(x)), 0);
            assert_eq!(g.mul(g.inv(x), x), 0);
            for y in (0..n).step_by(3) {
                for z in (0..n).step_by(7) {
                    assert_eq!(g.mul(g.mul(x, y), z), g.mul(x, g.mul(y, z)));
                }
            }
        }
        assert_eq!(group(&["0", "1"], "2", 5, 2).order(), 500);
    }

    #[test]
    fn axis_subgroups() {
        // {0} ⋊ Z/4 has exactly the 3 subgroups of a cyclic group of order 4
        let g = group(&["0", "1"], "2", 5, 1);
        let axis = g.closure(&[g.make(0, 1)]);
        assert_eq!(axis.order(), 4);
        let subs = g.enumerate_subgroups(DEFAULT_ORDER_CAP).unwrap();
        let inside: Vec<_> = subs.iter().filter(|h| h.is_subgroup_of(&axis)).collect();
        assert_eq!(inside.len(), 3);
    }

    #[test]
    fn enumeration_matches_census() {
        for (poly, w, q, m) in [(&["0", "1"][..], "2", 5, 1), (&["0", "1"][..], "2", 3, 2), (&["0", "1"][..], "3/2", 5, 1)] {
            let g = group(poly, w, q, m);
            let subs = g.enumerate_subgroups(DEFAULT_ORDER_CAP).unwrap();
            assert_eq!(subs.len(), pair_census(&g), "w={w} q={q} m={m}");
            assert_eq!(subs.first().unwrap().order(), 1);
            assert_eq!(subs.last().unwrap().order(), g.order());
        }
    }

    #[test]
    fn hyperelementary_examples() {
        let g = group(&["0", "1"], "2", 5, 1);
        let whole = g.closure(&[g.make(1, 0), g.make(0, 1)]);
        let w = g.is_hyperelementary(&whole).unwrap();
        assert_eq!((w.c_order, w.p, w.quotient_order), (5, 2, 4));
        let cyc = g.closure(&[g.make(0, 1)]);
        assert_eq!(g.is_hyperelementary(&cyc).unwrap().c_order, 4);
        // the order-54 group for w=2, q=3, m=2 has subgroups that are not hyper-elementary
        let g = group(&["0", "1"], "2", 3, 2);
        let subs = g.enumerate_subgroups(DEFAULT_ORDER_CAP).unwrap();
        assert!(subs.iter().any(|h| g.is_hyperelementary(h).is_none()));
    }

    #[test]
    fn classify_examples() {
        let g = group(&["0", "1"], "2", 5, 2);
        let t1 = 4;
        let sylow = g.closure(&[g.make(1, 0), g.make(0, 4)]);
        assert_eq!(sylow.order(), 125);
        assert_eq!(g.classify(&sylow, t1).unwrap(), Verdict::InKernel);
        let axis = g.closure(&[g.make(0, 1)]);
        assert_eq!(g.classify(&axis, t1).unwrap(), Verdict::ConjugateToCyclic { x: 0 });
        let h = g.closure(&[g.make(3, 1)]);
        let Verdict::ConjugateToCyclic { x } = g.classify(&h, t1).unwrap() else { panic!() };
        // x = (w − 1)^{-1}·3 = 3 in Z/25
        assert_eq!(x, 3);
        assert_eq!(g.conjugate_by_translation(x, g.make(3, 1)), g.make(0, 1));
    }
}
