//! Prime and exponent selection, the quotient F_n = O_w/q^m ⋊ Z/t, and per-subgroup verdicts
//! for every hyper-elementary H ≤ F_n.

use crate::error::{Error, Result};
use crate::group::{SemidirectGroup, Subgroup};
use crate::intmath::next_prime;
use crate::numberfield::FieldElement;
use crate::residue::{t_order_prime, CrtSplit, Modulus, ResidueRing};
use crate::valuation::{OwRing, Val};
use crate::word::{GeneratingSet, Gw, GwElement};
use num_rational::Rational64;
use num_traits::Signed;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::collections::HashMap;

/// Largest exponent m tried before giving up.
pub const MAX_EXPONENT: u32 = 64;

/// Random base elements added to the ball around the identity in the case-2 check.
pub const DEFAULT_BASE_SAMPLES: usize = 50;

/// w^k = 1 for some k ≥ 1. Orders of roots of unity in degree d satisfy φ(k) ≤ d, so k ≤ 2d².
pub fn is_root_of_unity(w: &FieldElement) -> bool {
    if w.is_zero() {
        return false;
    }
    let d = w.field().degree() as u64;
    let mut p = w.clone();
    for _ in 1..=(2 * d * d).max(2) {
        if p.is_one() {
            return true;
        }
        p = &p * w;
    }
    false
}

/// One prime 𝔮 | q with its ramification index and the orders t(𝔮,1), t(𝔮, m·e).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SplitPrime {
    pub label: String,
    pub e: u32,
    pub f: u32,
    pub t1: u64,
    pub tm: u64,
}

/// Smallest prime q outside the residue characteristics of M_w such that no prime above q
/// divides (w^k − 1) for 1 ≤ k ≤ 2·n·m₂.
pub fn select_prime(ow: &OwRing, n: u32, m2: u64) -> Result<u64> {
    let w = ow.w();
    if is_root_of_unity(w) {
        return Err(Error::RootOfUnity);
    }
    let bound = 2 * n as u64 * m2;
    let excluded = ow.mw_chars();
    let mut powers = Vec::with_capacity(bound as usize);
    let one = FieldElement::one(ow.field());
    let mut p = one.clone();
    for _ in 0..bound {
        p = &p * w;
        powers.push(&p - &one);
    }
    let mut q = 2;
    loop {
        if !excluded.contains(&q) && admissible(ow, q, &powers)? {
            return Ok(q);
        }
        q = next_prime(q);
    }
}

fn admissible(ow: &OwRing, q: u64, w_minus_one: &[FieldElement]) -> Result<bool> {
    for pr in ow.ring().primes_above(q)?.iter() {
        if ow.valuation(ow.w(), pr) != Val::Fin(0) {
            return Ok(false);
        }
        if w_minus_one.iter().any(|x| ow.valuation(x, pr) > Val::Fin(0)) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Smallest m with 2·n·m₂ < t(𝔮_i, m·e_i)/t(𝔮_i, 1) for every 𝔮_i | q.
pub fn select_exponent(ow: &OwRing, q: u64, n: u32, m2: u64) -> Result<u32> {
    let bound = 2 * n as u64 * m2;
    let primes = ow.ring().primes_above(q)?;
    let t1: Vec<u64> = primes.iter().map(|p| t_order_prime(ow, p, 1)).collect::<Result<_>>()?;
    for m in 1..=MAX_EXPONENT {
        let mut ok = true;
        for (p, t) in primes.iter().zip(&t1) {
            if t_order_prime(ow, p, m * p.e)? / t <= bound {
                ok = false;
                break;
            }
        }
        if ok {
            return Ok(m);
        }
    }
    Err(Error::Anomaly(format!("no exponent m <= {MAX_EXPONENT} satisfies the growth condition for q = {q}")))
}

/// The barycentric l¹ distance on R subdivided at lZ.
pub fn line_metric(l: u64, a: Rational64, b: Rational64) -> Rational64 {
    let l = Rational64::from_integer(l as i64);
    let coords = |r: Rational64| {
        let k = (r / l).floor();
        let s = r / l - k;
        (k.to_integer(), s)
    };
    let (ka, sa) = coords(a);
    let (kb, sb) = coords(b);
    let one = Rational64::from_integer(1);
    // weights on vertices k and k+1
    let mut weights: HashMap<i64, Rational64> = HashMap::new();
    *weights.entry(ka).or_default() += one - sa;
    *weights.entry(ka + 1).or_default() += sa;
    *weights.entry(kb).or_default() -= one - sb;
    *weights.entry(kb + 1).or_default() -= sb;
    weights.values().map(|x| x.abs()).sum()
}

/// Options for building a certificate.
#[derive(Clone, Debug)]
pub struct CertificateConfig {
    pub cap_order: u64,
    pub cap_bfs: usize,
    pub seed: u64,
    pub base_samples: usize,
}

impl Default for CertificateConfig {
    fn default() -> Self {
        CertificateConfig {
            cap_order: crate::group::DEFAULT_ORDER_CAP,
            cap_bfs: crate::word::DEFAULT_BFS_CAP,
            seed: 0,
            base_samples: DEFAULT_BASE_SAMPLES,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "case")]
pub enum CaseVerdict {
    /// (x,y)H(x,y)⁻¹ ⊆ {0} ⋊ Z/t.
    Case1 { x: String, y: String },
    /// The estimate n·d¹(z_g, z_h) ≤ l_{S^{2n}}(h⁻¹g) on every sampled pair.
    Case2 { pairs: usize, max_ratio: f64 },
    /// A failed check.
    Counterexample { reason: String },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SubgroupVerdict {
    pub generators: Vec<String>,
    pub order: u64,
    pub index: u64,
    #[serde(flatten)]
    pub verdict: CaseVerdict,
}

#[derive(Clone, Debug, Serialize)]
pub struct Certificate {
    pub field: String,
    pub w: String,
    pub n: u32,
    #[serde(rename = "S")]
    pub s: Vec<String>,
    pub m2: u64,
    pub q: u64,
    pub splitting: Vec<SplitPrime>,
    pub m: u32,
    pub t: u64,
    pub group_order: u64,
    pub subgroup_count: usize,
    pub hyperelementary_count: usize,
    pub base_elements: usize,
    pub verdicts: Vec<SubgroupVerdict>,
    pub skipped_conditions: Vec<String>,
    pub absent: Vec<String>,
}

impl Certificate {
    pub fn counterexamples(&self) -> Vec<&SubgroupVerdict> {
        self.verdicts.iter().filter(|v| matches!(v.verdict, CaseVerdict::Counterexample { .. })).collect()
    }

    pub fn verified(&self) -> bool {
        self.counterexamples().is_empty()
    }
}

/// Re-checks the arithmetic conditions on q and m recorded in a certificate.
pub fn check_admissibility(ow: &OwRing, cert: &Certificate) -> Result<()> {
    let bound = 2 * cert.n as u64 * cert.m2;
    if ow.mw_chars().contains(&cert.q) {
        return Err(Error::HypothesisViolated(format!("q = {} lies under a prime of M_w", cert.q)));
    }
    for (pr, sp) in ow.ring().primes_above(cert.q)?.iter().zip(&cert.splitting) {
        let t1 = t_order_prime(ow, pr, 1)?;
        let tm = t_order_prime(ow, pr, cert.m * pr.e)?;
        if t1 != sp.t1 || tm != sp.tm {
            return Err(Error::HypothesisViolated(format!("recorded orders for {} do not match", sp.label)));
        }
        if bound >= t1 || bound >= tm / t1 {
            return Err(Error::HypothesisViolated(format!("2nm2 = {bound} too large at {}", sp.label)));
        }
    }
    Ok(())
}

/// `(a, b)` with a lifted to O_w.
pub fn element_label(g: &SemidirectGroup, code: u32) -> String {
    let (a, b) = g.split(code);
    format!("({}, {})", g.ring().lift(a), b)
}

// (z_h, z_g, l_{S^{2n}}(h⁻¹g)) for every sampled pair.
fn case2_pairs(gw: &Gw, s: &GeneratingSet, n: u32, cfg: &CertificateConfig) -> Result<(usize, Vec<(i64, i64, u32)>)> {
    let sn = gw.power_set(s, n, cfg.cap_bfs)?;
    let s2n = gw.power_set(s, 2 * n, cfg.cap_bfs)?;
    let ball = gw.ball(s, n, cfg.cap_bfs)?;
    let mut bases: Vec<GwElement> = ball.elements().into_iter().map(|(g, _)| g).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for _ in 0..cfg.base_samples {
        bases.push(gw.int_element(rng.gen_range(-1000..=1000), rng.gen_range(-1000..=1000)));
    }
    let mut lengths: HashMap<GwElement, u32> = HashMap::new();
    let mut out = Vec::with_capacity(bases.len() * sn.len());
    for h in &bases {
        let hinv = gw.inv(h);
        for k in sn.elements() {
            let g = gw.mul(h, k);
            let diff = gw.mul(&hinv, &g);
            let len = match lengths.get(&diff) {
                Some(&d) => d,
                None => {
                    let d = gw.word_length(&diff, &s2n, cfg.cap_bfs)?;
                    lengths.insert(diff, d);
                    d
                }
            };
            out.push((h.z, g.z, len));
        }
    }
    Ok((bases.len(), out))
}

fn check_case2(pairs: &[(i64, i64, u32)], n: u32, l: u64) -> CaseVerdict {
    let mut max_ratio: f64 = 0.0;
    for &(hz, gz, len) in pairs {
        let d1 = line_metric(l, Rational64::from_integer(gz), Rational64::from_integer(hz));
        let lhs = d1 * Rational64::from_integer(n as i64);
        if lhs > Rational64::from_integer(len as i64) {
            return CaseVerdict::Counterexample {
                reason: format!("n*d1({gz}, {hz}) = {lhs} exceeds word length {len} at spacing {l}"),
            };
        }
        if len > 0 {
            max_ratio = max_ratio.max(*lhs.numer() as f64 / *lhs.denom() as f64 / len as f64);
        }
    }
    CaseVerdict::Case2 { pairs: pairs.len(), max_ratio }
}

/// Selects q and m for (w, n, S), builds F_n and classifies every hyper-elementary subgroup.
pub fn build_and_verify(ow: &OwRing, n: u32, s: &GeneratingSet, cfg: &CertificateConfig) -> Result<Certificate> {
    if n == 0 {
        return Err(Error::Parse("n must be positive".into()));
    }
    let gw = Gw::new(ow)?;
    let m2 = gw.power_set(s, n, cfg.cap_bfs)?.m2();
    let q = select_prime(ow, n, m2)?;
    let m = select_exponent(ow, q, n, m2)?;
    let ring = ResidueRing::new(ow, Modulus::Rational(q), m)?;
    let group = SemidirectGroup::new(ring, cfg.cap_order)?;
    let crt = CrtSplit::new(ow, q, m)?;
    let mut splitting = Vec::new();
    for pr in ow.ring().primes_above(q)?.iter() {
        splitting.push(SplitPrime {
            label: pr.label(),
            e: pr.e,
            f: pr.f,
            t1: t_order_prime(ow, pr, 1)?,
            tm: t_order_prime(ow, pr, m * pr.e)?,
        });
    }
    let subgroups = group.enumerate_subgroups(cfg.cap_order)?;
    let hyper: Vec<&Subgroup> = subgroups.iter().filter(|h| group.is_hyperelementary(h).is_some()).collect();
    let bound = 2 * n as u64 * m2;
    let (base_elements, pairs) = case2_pairs(&gw, s, n, cfg)?;
    let verdicts: Vec<SubgroupVerdict> = hyper
        .par_iter()
        .map(|h| {
            let l = group.axis_index(h);
            let verdict = if l <= bound {
                match group.find_conjugator_into_cyclic(h, &crt) {
                    Ok(c) => CaseVerdict::Case1 { x: group.ring().lift(c.x).to_string(), y: group.ring().lift(c.y).to_string() },
                    Err(e) => CaseVerdict::Counterexample { reason: format!("index {l} <= {bound} but {e}") },
                }
            } else {
                check_case2(&pairs, n, l)
            };
            SubgroupVerdict {
                generators: h.generators().iter().map(|&g| element_label(&group, g)).collect(),
                order: h.order(),
                index: l,
                verdict,
            }
        })
        .collect();
    let cert = Certificate {
        field: ow.field().min_poly_string(),
        w: ow.w().to_string(),
        n,
        s: s.elements().iter().map(|g| g.to_string()).collect(),
        m2,
        q,
        splitting,
        m,
        t: group.t(),
        group_order: group.order(),
        subgroup_count: subgroups.len(),
        hyperelementary_count: hyper.len(),
        base_elements,
        verdicts,
        skipped_conditions: vec!["q^-m<=B".into()],
        absent: vec!["N".into(), "Lambda".into()],
    };
    check_admissibility(ow, &cert)?;
    Ok(cert)
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

    fn r(x: i64) -> Rational64 {
        Rational64::from_integer(x)
    }

    #[test]
    fn prime_selection() {
        let o = ow(&["0", "1"], "2");
        assert_eq!(select_prime(&o, 1, 1).unwrap(), 5);
        assert_eq!(select_prime(&o, 2, 2).unwrap(), 11);
        assert_eq!(select_prime(&o, 1, 0).unwrap(), 3);
        // 3/2: 2, 3 excluded; (3/2 − 1) = 1/2, (9/4 − 1) = 5/4, so 5 fails and 7 works
        assert_eq!(select_prime(&ow(&["0", "1"], "3/2"), 1, 1).unwrap(), 7);
        assert!(matches!(select_prime(&ow(&["0", "1"], "-1"), 1, 1), Err(Error::RootOfUnity)));
        assert!(matches!(select_prime(&ow(&["1", "0", "1"], "w"), 1, 1), Err(Error::RootOfUnity)));
    }

    #[test]
    fn exponent_selection() {
        let o = ow(&["0", "1"], "2");
        assert_eq!(select_exponent(&o, 5, 1, 1).unwrap(), 2);
        assert_eq!(select_exponent(&o, 5, 2, 2).unwrap(), 3);
        assert_eq!(select_exponent(&o, 3, 1, 0).unwrap(), 1);
    }

    #[test]
    fn line_metric_examples() {
        assert_eq!(line_metric(4, r(3), r(3)), r(0));
        assert_eq!(line_metric(4, r(0), r(2)), r(1));
        assert_eq!(line_metric(4, r(0), r(4)), r(2));
        assert_eq!(line_metric(4, r(1), r(13)), r(2));
        assert_eq!(line_metric(4, r(-1), r(1)), Rational64::new(1, 2));
    }

    #[test]
    fn trivial_generating_set() {
        let o = ow(&["0", "1"], "2");
        let gw = Gw::new(&o).unwrap();
        let s = GeneratingSet::new(&gw, vec![]);
        let cert = build_and_verify(&o, 1, &s, &CertificateConfig::default()).unwrap();
        assert_eq!((cert.q, cert.m, cert.group_order), (3, 1, 6));
        assert!(cert.verified());
        assert!(cert.verdicts.iter().all(|v| matches!(v.verdict, CaseVerdict::Case2 { .. })));
    }

    #[test]
    fn standard_pipeline() {
        let o = ow(&["0", "1"], "2");
        let gw = Gw::new(&o).unwrap();
        let cert = build_and_verify(&o, 1, &gw.standard_generators(), &CertificateConfig::default()).unwrap();
        assert_eq!((cert.q, cert.m, cert.t, cert.group_order), (5, 2, 20, 500));
        assert!(cert.verified());
        assert_eq!(cert.verdicts.len(), cert.hyperelementary_count);
        let case1 = cert.verdicts.iter().filter(|v| matches!(v.verdict, CaseVerdict::Case1 { .. })).count();
        assert_eq!((cert.subgroup_count, cert.hyperelementary_count, case1), (138, 126, 50));
    }

    #[test]
    fn too_large() {
        let o = ow(&["0", "1"], "2");
        let gw = Gw::new(&o).unwrap();
        let s = gw.standard_generators();
        assert!(matches!(build_and_verify(&o, 3, &s, &CertificateConfig::default()), Err(Error::GroupTooLarge { .. })));
    }

    proptest::proptest! {
        #[test]
        fn line_metric_bounds(l in 1u64..30, a in -200i64..200, b in -200i64..200, den in 1i64..5) {
            let (a, b) = (Rational64::new(a, den), Rational64::new(b, den));
            let d = line_metric(l, a, b);
            proptest::prop_assert!(d <= r(2));
            proptest::prop_assert!(d <= Rational64::new(2, l as i64) * (a - b).abs());
            proptest::prop_assert_eq!(d, line_metric(l, b, a));
        }
    }
}
