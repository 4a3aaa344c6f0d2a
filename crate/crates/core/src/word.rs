//! G_w = O_w ⋊ Z with (x₁,z₁)(x₂,z₂) = (x₁ + w^{z₁}x₂, z₁+z₂), word lengths and balls.

use crate::error::{Error, Result};
use crate::numberfield::FieldElement;
use crate::valuation::{Membership, OwRing};
use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;
use std::sync::Mutex;

pub const DEFAULT_BFS_CAP: usize = 2_000_000;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GwElement {
    pub x: FieldElement,
    pub z: i64,
}

impl fmt::Display for GwElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.z)
    }
}

impl Ord for GwElement {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.z.cmp(&other.z).then_with(|| self.x.coeffs().cmp(other.x.coeffs()))
    }
}

impl PartialOrd for GwElement {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// The group G_w with a cache of powers of w.
#[derive(Debug)]
pub struct Gw {
    ow: OwRing,
    powers: Mutex<HashMap<i64, FieldElement>>,
}

impl Clone for Gw {
    fn clone(&self) -> Self {
        Gw { ow: self.ow.clone(), powers: Mutex::new(self.powers.lock().unwrap().clone()) }
    }
}

impl Gw {
    pub fn new(ow: &OwRing) -> Result<Self> {
        if ow.w().is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(Gw { ow: ow.clone(), powers: Mutex::new(HashMap::new()) })
    }

    pub fn ow(&self) -> &OwRing {
        &self.ow
    }

    pub fn w_pow(&self, k: i64) -> FieldElement {
        if let Some(p) = self.powers.lock().unwrap().get(&k) {
            return p.clone();
        }
        let p = self.ow.w().pow(k).expect("w is nonzero");
        self.powers.lock().unwrap().insert(k, p.clone());
        p
    }

    pub fn identity(&self) -> GwElement {
        GwElement { x: FieldElement::zero(self.ow.field()), z: 0 }
    }

    /// An element after checking x ∈ O_w.
    pub fn element(&self, x: FieldElement, z: i64) -> Result<GwElement> {
        if !self.ow.contains(&x, Membership::Ow)? {
            return Err(Error::NotInOw);
        }
        Ok(GwElement { x, z })
    }

    pub fn int_element(&self, x: i64, z: i64) -> GwElement {
        GwElement { x: FieldElement::from_int(self.ow.field(), x), z }
    }

    pub fn mul(&self, a: &GwElement, b: &GwElement) -> GwElement {
        let shifted = if b.x.is_zero() { b.x.clone() } else { &self.w_pow(a.z) * &b.x };
        GwElement { x: &a.x + &shifted, z: a.z + b.z }
    }

    pub fn inv(&self, a: &GwElement) -> GwElement {
        GwElement { x: -(&self.w_pow(-a.z) * &a.x), z: -a.z }
    }

    /// {(0,0), (±1,0), (0,±1)}.
    pub fn standard_generators(&self) -> GeneratingSet {
        GeneratingSet::new(self, vec![self.int_element(1, 0), self.int_element(0, 1)])
    }

    /// S^n = all products of n elements of S.
    pub fn power_set(&self, s: &GeneratingSet, n: u32, cap: usize) -> Result<GeneratingSet> {
        let mut cur: HashSet<GwElement> = HashSet::from([self.identity()]);
        for _ in 0..n {
            let mut next = HashSet::with_capacity(cur.len() * s.len());
            for a in &cur {
                for b in &s.elements {
                    next.insert(self.mul(a, b));
                    if next.len() > cap {
                        return Err(Error::BallTooLarge(cap));
                    }
                }
            }
            cur = next;
        }
        let mut elements: Vec<GwElement> = cur.into_iter().collect();
        elements.sort();
        Ok(GeneratingSet { elements })
    }

    /// Breadth-first word lengths of every element within `radius`.
    pub fn ball(&self, s: &GeneratingSet, radius: u32, cap: usize) -> Result<Ball> {
        let mut dist: HashMap<GwElement, u32> = HashMap::from([(self.identity(), 0)]);
        let mut frontier = vec![self.identity()];
        for r in 1..=radius {
            let mut next = Vec::new();
            for a in &frontier {
                for g in &s.elements {
                    let b = self.mul(a, g);
                    if !dist.contains_key(&b) {
                        dist.insert(b.clone(), r);
                        next.push(b);
                        if dist.len() > cap {
                            return Err(Error::CapExceeded(cap));
                        }
                    }
                }
            }
            frontier = next;
        }
        Ok(Ball { radius, dist })
    }

    /// Word length of g with respect to S, searching at most `cap` elements.
    pub fn word_length(&self, g: &GwElement, s: &GeneratingSet, cap: usize) -> Result<u32> {
        let id = self.identity();
        if *g == id {
            return Ok(0);
        }
        let mut seen: HashSet<GwElement> = HashSet::from([id.clone()]);
        let mut queue = VecDeque::from([(id, 0u32)]);
        while let Some((a, d)) = queue.pop_front() {
            for gen in &s.elements {
                let b = self.mul(&a, gen);
                if b == *g {
                    return Ok(d + 1);
                }
                if seen.insert(b.clone()) {
                    if seen.len() > cap {
                        return Err(Error::CapExceeded(cap));
                    }
                    queue.push_back((b, d + 1));
                }
            }
        }
        Err(Error::Anomaly(format!("{g} is not reachable from the generating set")))
    }

    /// {g·k : k ∈ S^{2n}}.
    pub fn sn_genuine(&self, g: &GwElement, s: &GeneratingSet, n: u32, cap: usize) -> Result<Vec<GwElement>> {
        let s2n = self.power_set(s, 2 * n, cap)?;
        let mut out: Vec<GwElement> = s2n.elements.iter().map(|k| self.mul(g, k)).collect();
        out.sort();
        out.dedup();
        Ok(out)
    }
}

/// A finite symmetric set containing the identity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeneratingSet {
    elements: Vec<GwElement>,
}

impl GeneratingSet {
    /// Symmetric closure of `gens` together with the identity.
    pub fn new(gw: &Gw, gens: Vec<GwElement>) -> Self {
        let mut set: HashSet<GwElement> = HashSet::from([gw.identity()]);
        for g in gens {
            set.insert(gw.inv(&g));
            set.insert(g);
        }
        let mut elements: Vec<GwElement> = set.into_iter().collect();
        elements.sort();
        GeneratingSet { elements }
    }

    pub fn elements(&self) -> &[GwElement] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// m₂ = max |z| over the set.
    pub fn m2(&self) -> u64 {
        self.elements.iter().map(|g| g.z.unsigned_abs()).max().unwrap_or(0)
    }
}

/// Word lengths of all elements in a ball around the identity.
#[derive(Clone, Debug)]
pub struct Ball {
    pub radius: u32,
    dist: HashMap<GwElement, u32>,
}

impl Ball {
    pub fn len(&self) -> usize {
        self.dist.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dist.is_empty()
    }

    pub fn length(&self, g: &GwElement) -> Option<u32> {
        self.dist.get(g).copied()
    }

    /// Elements sorted for reproducible iteration.
    pub fn elements(&self) -> Vec<(GwElement, u32)> {
        let mut v: Vec<(GwElement, u32)> = self.dist.iter().map(|(g, &d)| (g.clone(), d)).collect();
        v.sort();
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numberfield::NumberField;
    use crate::valuation::IntegerRing;
    use proptest::prelude::*;

    fn gw(poly: &[&str], w: &str) -> Gw {
        let ring = IntegerRing::new(&NumberField::from_strings(poly, 30).unwrap()).unwrap();
        let w = FieldElement::parse(ring.field(), w).unwrap();
        Gw::new(&OwRing::new(&ring, &w).unwrap()).unwrap()
    }

    #[test]
    fn law_examples() {
        let g = gw(&["0", "1"], "2");
        let a = g.int_element(1, 1);
        assert_eq!(g.mul(&g.identity(), &a), a);
        assert_eq!(g.mul(&a, &g.int_element(1, 0)), g.int_element(3, 1));
        assert_eq!(g.mul(&a, &g.inv(&a)), g.identity());
        assert!(matches!(g.element(FieldElement::parse(g.ow().field(), "1/3").unwrap(), 0), Err(Error::NotInOw)));
    }

    #[test]
    fn power_sets() {
        let g = gw(&["0", "1"], "2");
        let trivial = GeneratingSet::new(&g, vec![]);
        assert_eq!(g.power_set(&trivial, 3, 100).unwrap().len(), 1);
        let s = g.standard_generators();
        assert_eq!(s.len(), 5);
        assert_eq!(g.power_set(&s, 1, 1000).unwrap().m2(), 1);
        assert_eq!(g.power_set(&s, 2, 1000).unwrap().m2(), 2);
        assert!(matches!(g.power_set(&s, 6, 50), Err(Error::BallTooLarge(50))));
    }

    #[test]
    fn word_lengths() {
        let g = gw(&["0", "1"], "2");
        let s = g.standard_generators();
        assert_eq!(g.word_length(&g.identity(), &s, 1000).unwrap(), 0);
        // (3,1): no product of two generators gives it, (1,0)(0,1)(1,0) does
        assert_eq!(g.word_length(&g.int_element(3, 1), &s, 100_000).unwrap(), 3);
        let ball = g.ball(&s, 4, 1_000_000).unwrap();
        assert_eq!(ball.length(&g.int_element(3, 1)), Some(3));
        assert!(matches!(g.word_length(&g.int_element(1000, 0), &s, 50), Err(Error::CapExceeded(50))));
    }

    #[test]
    fn sn_genuine_examples() {
        let g = gw(&["0", "1"], "2");
        let trivial = GeneratingSet::new(&g, vec![]);
        let a = g.int_element(5, -2);
        assert_eq!(g.sn_genuine(&a, &trivial, 2, 100).unwrap(), vec![a.clone()]);
        let s = g.standard_generators();
        let set = g.sn_genuine(&a, &s, 1, 10_000).unwrap();
        let s2 = g.power_set(&s, 2, 10_000).unwrap();
        assert!(set.len() <= s2.len());
        for h in &set {
            assert!(s2.elements().contains(&g.mul(&g.inv(&a), h)));
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn group_axioms(x1 in -20i64..20, z1 in -4i64..4, x2 in -20i64..20, z2 in -4i64..4, x3 in -20i64..20, z3 in -4i64..4, k in 0i64..3) {
            let g = gw(&["-2", "0", "1"], "w");
            let f = g.ow().field().clone();
            let mk = |x: i64, z: i64| GwElement { x: &FieldElement::from_int(&f, x) * &g.w_pow(-k), z };
            let (a, b, c) = (mk(x1, z1), mk(x2, z2), mk(x3, z3));
            prop_assert_eq!(g.mul(&g.mul(&a, &b), &c), g.mul(&a, &g.mul(&b, &c)));
            prop_assert_eq!(g.mul(&g.inv(&a), &a), g.identity());
        }
    }
}
