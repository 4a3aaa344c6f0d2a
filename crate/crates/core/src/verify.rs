//! Randomized self-checks over one (field, w), as run by `verify-all`.

use crate::bt_tree::{LatticeClass, Tree};
use crate::certificate::{build_and_verify, Certificate, CertificateConfig};
use crate::error::{Error, Result};
use crate::geometry::{fs_distance, fs_flow, Acting, GeneralizedGeodesic, ModelPoint, ModelSpace, Quadrature};
use crate::group::{SemidirectGroup, Verdict};
use crate::intmath::{gcd_u64, next_prime};
use crate::numberfield::FieldElement;
use crate::residue::{t_order_prime, t_order_rational, u_order, Modulus, ResidueRing};
use crate::valuation::{OwRing, Val};
use crate::word::{GeneratingSet, Gw};
use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

/// Outcome of one suite.
#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub name: String,
    pub checks: usize,
    pub failures: usize,
    pub skipped: Option<String>,
    pub notes: Vec<String>,
}

impl SuiteReport {
    fn new(name: &str) -> Self {
        SuiteReport { name: name.into(), checks: 0, failures: 0, skipped: None, notes: Vec::new() }
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.failures += 1;
            if self.notes.len() < 10 {
                self.notes.push(what());
            }
        }
    }

    fn skip(name: &str, e: &Error) -> Self {
        SuiteReport { skipped: Some(e.to_string()), ..SuiteReport::new(name) }
    }
}

#[derive(Clone, Debug)]
pub struct VerifyConfig {
    pub seed: u64,
    pub samples: usize,
    pub n: u32,
    pub cap_order: u64,
    pub cap_bfs: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            seed: 0,
            samples: 100,
            n: 1,
            cap_order: crate::group::DEFAULT_ORDER_CAP,
            cap_bfs: crate::word::DEFAULT_BFS_CAP,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub schema: u32,
    pub seed: u64,
    pub field: String,
    pub w: String,
    pub suites: Vec<SuiteReport>,
    pub certificate: Option<Certificate>,
}

impl VerifyReport {
    pub fn failures(&self) -> usize {
        let cert = self.certificate.as_ref().map_or(0, |c| c.counterexamples().len());
        self.suites.iter().map(|s| s.failures).sum::<usize>() + cert
    }

    pub fn skips(&self) -> usize {
        self.suites.iter().filter(|s| s.skipped.is_some()).count()
    }
}

/// A random element of O_w: a small integral combination divided by a power of w.
pub fn random_ow_element<R: Rng>(ow: &OwRing, rng: &mut R) -> FieldElement {
    let coords: Vec<BigInt> = (0..ow.ring().degree()).map(|_| BigInt::from(rng.gen_range(-20i64..=20))).collect();
    let x = ow.ring().from_basis_coords(&coords);
    let k = rng.gen_range(0..=2);
    x.div(&ow.w().pow_u(k)).expect("w is nonzero")
}

/// A random unit ζ^j ∏ e_i^{a_i} ∏ y_𝔭^{b_𝔭} of O_w.
pub fn random_unit<R: Rng>(ow: &OwRing, rng: &mut R) -> Result<FieldElement> {
    let units = ow.unit_data()?;
    let mut y = units.torsion_generator.pow_u(rng.gen_range(0..units.torsion_order.max(1)) as u64);
    for e in &units.fundamental_units {
        y = y * e.pow(rng.gen_range(-3..=3))?;
    }
    for (_, g) in ow.mw_generators()? {
        y = y * g.pow(rng.gen_range(-3..=3))?;
    }
    Ok(y)
}

/// A vertex reached by a random walk of at most `steps` steps from the identity class.
pub fn random_class<R: Rng>(tree: &Tree, rng: &mut R, steps: u32) -> LatticeClass {
    let mut v = tree.identity();
    for _ in 0..rng.gen_range(0..=steps) {
        let nb = tree.neighbors(&v);
        v = nb[rng.gen_range(0..nb.len())].clone();
    }
    v
}

// Smallest k ≥ 1 with w^k = 1 in the ring, by stepping through powers.
fn brute_order(r: &ResidueRing) -> u64 {
    let (one, w) = (r.one(), r.w_code());
    let mut p = w;
    let mut k = 1;
    while p != one {
        p = r.mul(p, w);
        k += 1;
    }
    k
}

/// The first `count` primes q with q outside the residue characteristics of M_w.
pub fn admissible_primes(ow: &OwRing, count: usize) -> Result<Vec<u64>> {
    let mut out = Vec::new();
    let mut q = 2;
    while out.len() < count {
        if !ow.mw_chars().contains(&q)
            && ow.ring().primes_above(q)?.iter().all(|p| ow.valuation(ow.w(), p) == Val::Fin(0))
        {
            out.push(q);
        }
        q = next_prime(q);
    }
    Ok(out)
}

/// t_w(𝔮,s), t_w(q,s) against stepping through powers, plus the growth and coprimality laws.
pub fn suite_orders(ow: &OwRing) -> Result<SuiteReport> {
    let mut rep = SuiteReport::new("orders");
    for q in admissible_primes(ow, 3)? {
        let mut prev = None;
        for s in 1..=3u32 {
            let r = ResidueRing::new(ow, Modulus::Rational(q), s)?.with_table();
            let t = t_order_rational(ow, q, s)?;
            rep.check(t == brute_order(&r), || format!("t({q},{s})"));
            if let Some(p) = prev {
                rep.check(t == p || t == q * p, || format!("growth at q={q}, s={s}"));
            }
            prev = Some(t);
            let mut qfree = t;
            while qfree % q == 0 {
                qfree /= q;
            }
            rep.check(u_order(ow, q)? == qfree, || format!("u({q}) at s={s}"));
            for pr in ow.ring().primes_above(q)?.iter() {
                let r = ResidueRing::new(ow, Modulus::Prime(pr.clone()), s)?.with_table();
                let t = t_order_prime(ow, pr, s)?;
                rep.check(t == brute_order(&r), || format!("t({},{s})", pr.label()));
                if s == 1 {
                    rep.check(gcd_u64(t, q) == 1, || format!("t({},1) not prime to q", pr.label()));
                }
            }
        }
    }
    Ok(rep)
}

/// Prime-ideal quotients O_w/𝔮^s ⋊ Z/t: every hyper-elementary subgroup gets a verdict.
pub fn suite_subgroups(ow: &OwRing, cap: u64) -> Result<SuiteReport> {
    let mut rep = SuiteReport::new("subgroups");
    let cap = cap.min(2000);
    for q in admissible_primes(ow, 2)? {
        for pr in ow.ring().primes_above(q)?.iter() {
            for s in 1..=2 {
                let ring = ResidueRing::new(ow, Modulus::Prime(pr.clone()), s)?;
                let group = match SemidirectGroup::new(ring, cap) {
                    Ok(g) => g,
                    Err(Error::GroupTooLarge { .. }) => continue,
                    Err(e) => return Err(e),
                };
                let t1 = t_order_prime(ow, pr, 1)?;
                for h in group.enumerate_subgroups(cap)? {
                    if group.is_hyperelementary(&h).is_none() {
                        continue;
                    }
                    let v = group.classify(&h, t1)?;
                    rep.check(v != Verdict::NotClassifiable, || format!("{} s={s}: subgroup of order {}", pr.label(), h.order()));
                }
            }
        }
    }
    Ok(rep)
}

/// Busemann equivariance, stabilizer sufficiency and f(L(n)) = n on each tree of M_w.
pub fn suite_tree(space: &ModelSpace, cfg: &VerifyConfig) -> Result<SuiteReport> {
    let mut rep = SuiteReport::new("tree");
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x7472);
    let ow = space.ow();
    for tree in space.trees() {
        for n in -8..=8 {
            rep.check(tree.busemann(&tree.standard(n))? == n, || format!("f(L({n}))"));
        }
        for _ in 0..cfg.samples {
            let l = random_class(tree, &mut rng, 6);
            let x = random_ow_element(ow, &mut rng);
            let y = random_unit(ow, &mut rng)?;
            let vy = tree.v(&y).fin();
            let lhs = tree.busemann(&tree.act(&x, &y, &l)?)?;
            rep.check(lhs == tree.busemann(&l)? - vy, || format!("equivariance at {}", l.label()));
            let (z1, _, z2p) = tree.z_invariants(&l);
            let pi = &tree.prime().uniformizer;
            let stab = &random_ow_element(ow, &mut rng) * &pi.pow(z1 - z2p + rng.gen_range(0..3))?;
            if tree.v(&stab) >= Val::Fin(z1 - z2p) {
                rep.check(tree.act(&stab, &FieldElement::one(ow.field()), &l)? == l, || format!("stabilizer at {}", l.label()));
            }
        }
    }
    Ok(rep)
}

/// The warping identity per embedding and the exact power reconstruction.
pub fn suite_warp(space: &ModelSpace, cfg: &VerifyConfig) -> Result<SuiteReport> {
    let mut rep = SuiteReport::new("warp");
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x7761);
    let ow = space.ow();
    for _ in 0..cfg.samples {
        let y = random_unit(ow, &mut rng)?;
        for tau in 0..ow.field().degree() {
            let lhs = space.unit_warp_product(&y, tau)?;
            let rhs = y.embed(tau).norm();
            rep.check((lhs / rhs - 1.0).abs() < 1e-9, || format!("identity for {y} at embedding {tau}"));
        }
        let dec = ow.decompose(&y)?;
        rep.check(ow.reconstruct(&dec)? == y.pow_u(dec.power), || format!("reconstruction of {y}"));
        let p = space.sample_point(&mut rng, 3);
        let g = space.acting(random_ow_element(ow, &mut rng), y.clone())?;
        for tau in ow.field().embedding_classes() {
            let moved = space.warp_factor(tau, &space.act(&g, &p)?)? * y.embed(tau).norm();
            rep.check((moved / space.warp_factor(tau, &p)? - 1.0).abs() < 1e-9, || format!("warp equivariance for {y}"));
        }
    }
    Ok(rep)
}

fn random_word<R: Rng>(space: &ModelSpace, gw: &Gw, rng: &mut R, len: usize) -> Result<Vec<Acting>> {
    (0..len)
        .map(|_| {
            if rng.gen_bool(0.2) {
                Ok(space.acting_identity())
            } else {
                let x = random_ow_element(space.ow(), rng);
                space.gw_acting(gw, &crate::word::GwElement { x, z: rng.gen_range(-2..=2) })
            }
        })
        .collect()
}

/// Word [g_j, …, g_0] and times [t_j, …, t_1]; position l ↔ index j − l.
pub fn sha_axiom_checks(space: &ModelSpace, gs: &[Acting], ts: &[f64], x: &ModelPoint, r: f64, base: &ModelPoint) -> Result<Vec<(String, f64)>> {
    let psi = |gs: &[Acting], ts: &[f64], x: &ModelPoint| space.sha_eval(gs, ts, x, r, base);
    let dist = |a: &ModelPoint, b: &ModelPoint| space.distance(a, b);
    let j = gs.len() - 1;
    let e = space.acting_identity();
    let mut out = Vec::new();
    for l in 1..=j {
        let i = j - l;
        // (1) t_l = 0 splits the word
        let mut t0 = ts.to_vec();
        t0[i] = 0.0;
        let inner = psi(&gs[i + 1..], &ts[i + 1..], x)?;
        out.push(("axiom1".into(), dist(&psi(gs, &t0, x)?, &psi(&gs[..=i], &ts[..i], &inner)?)?));
        // (2) t_l = 1 merges g_l g_{l−1}
        let mut t1 = ts.to_vec();
        t1[i] = 1.0;
        let mut merged: Vec<Acting> = gs[..i].to_vec();
        merged.push(space.compose(&gs[i], &gs[i + 1]));
        merged.extend_from_slice(&gs[i + 2..]);
        let mut mt = ts[..i].to_vec();
        mt.extend_from_slice(&ts[i + 1..]);
        out.push(("axiom2".into(), dist(&psi(gs, &t1, x)?, &psi(&merged, &mt, x)?)?));
    }
    if j >= 1 {
        // (3) a leading identity is absorbed
        let mut lead = gs.to_vec();
        lead[0] = e.clone();
        out.push(("axiom3".into(), dist(&psi(&lead, ts, x)?, &psi(&gs[1..], &ts[1..], x)?)?));
        // (5) a trailing identity is absorbed
        let mut trail = gs.to_vec();
        trail[j] = e.clone();
        out.push(("axiom5".into(), dist(&psi(&trail, ts, x)?, &psi(&gs[..j], &ts[..j - 1], x)?)?));
    }
    for l in 1..j {
        // (4) an interior identity multiplies the adjacent times
        let i = j - l;
        let mut mid = gs.to_vec();
        mid[i] = e.clone();
        let mut fused_g = gs[..i].to_vec();
        fused_g.extend_from_slice(&gs[i + 1..]);
        let mut fused_t = ts[..i - 1].to_vec();
        fused_t.push(ts[i - 1] * ts[i]);
        fused_t.extend_from_slice(&ts[i + 1..]);
        out.push(("axiom4".into(), dist(&psi(&mid, ts, x)?, &psi(&fused_g, &fused_t, x)?)?));
    }
    out.push(("axiom6".into(), dist(&psi(&[e], &[], x)?, x)?));
    Ok(out)
}

/// The six axioms on random words of length ≤ 4 and the H^R semigroup law.
pub fn suite_sha(space: &ModelSpace, cfg: &VerifyConfig) -> Result<SuiteReport> {
    let mut rep = SuiteReport::new("homotopy-action");
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x7368);
    let gw = Gw::new(space.ow())?;
    let base = space.base_point();
    for k in 0..cfg.samples {
        let r = if k % 2 == 0 { 1.0 } else { 5.0 };
        let len = rng.gen_range(1..=4);
        let gs = random_word(space, &gw, &mut rng, len)?;
        let ts: Vec<f64> = (1..len).map(|_| rng.gen_range(0.0..=1.0)).collect();
        let x = space.retraction(&space.sample_point(&mut rng, 6), 0.0, r, &base)?;
        for (name, d) in sha_axiom_checks(space, &gs, &ts, &x, r, &base)? {
            rep.check(d < 1e-9, || format!("{name} off by {d:e}"));
        }
        let y = space.sample_point(&mut rng, 6);
        let (t1, t2) = (rng.gen_range(0.0..=1.0), rng.gen_range(0.0..=1.0));
        let lhs = space.retraction(&space.retraction(&y, t2, r, &base)?, t1, r, &base)?;
        let rhs = space.retraction(&y, t1 * t2, r, &base)?;
        let d = space.distance(&lhs, &rhs)?;
        rep.check(d < 1e-9, || format!("semigroup law off by {d:e}"));
    }
    Ok(rep)
}

/// BFS lengths against single-target searches, inverse symmetry, triangle inequality, m₂ growth.
pub fn suite_word(gw: &Gw, s: &GeneratingSet, cfg: &VerifyConfig) -> Result<SuiteReport> {
    let mut rep = SuiteReport::new("word-metric");
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x776d);
    let ball = gw.ball(s, 4, cfg.cap_bfs)?;
    let elems = ball.elements();
    let inner: Vec<_> = elems.iter().filter(|(_, d)| *d <= 2).collect();
    for _ in 0..cfg.samples {
        let (g, d) = &elems[rng.gen_range(0..elems.len())];
        rep.check(gw.word_length(g, s, cfg.cap_bfs)? == *d, || format!("length of {g}"));
        rep.check(ball.length(&gw.inv(g)) == Some(*d), || format!("inverse length of {g}"));
        let (a, da) = inner[rng.gen_range(0..inner.len())];
        let (b, db) = inner[rng.gen_range(0..inner.len())];
        let dab = ball.length(&gw.mul(&gw.inv(a), b));
        rep.check(dab.is_some_and(|x| x <= da + db), || format!("triangle at {a}, {b}"));
    }
    let m1 = gw.power_set(s, 1, cfg.cap_bfs)?.m2();
    for n in 1..=3 {
        rep.check(gw.power_set(s, n, cfg.cap_bfs)?.m2() <= n as u64 * m1, || format!("m2 growth at n={n}"));
    }
    Ok(rep)
}

/// Constant generalized geodesics and the flow group law.
pub fn suite_flow(space: &ModelSpace, cfg: &VerifyConfig) -> Result<SuiteReport> {
    let mut rep = SuiteReport::new("flow-space");
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x666c);
    let samples = cfg.samples.min(30);
    for _ in 0..samples {
        let (p, q) = (space.sample_point(&mut rng, 3), space.sample_point(&mut rng, 3));
        let c = GeneralizedGeodesic::constant(p.clone());
        let d = GeneralizedGeodesic::constant(q.clone());
        let fs = fs_distance(space, &c, &d, Quadrature::default())?;
        let dx = space.distance(&p, &q)?;
        rep.check((fs - dx).abs() < 1e-6, || format!("constant pair: {fs} vs {dx}"));
        let seg = GeneralizedGeodesic::segment(p, q, BigRational::new(rng.gen_range(-9..=9).into(), 4.into()));
        let a = BigRational::new(rng.gen_range(-20..=20).into(), rng.gen_range(1..=7).into());
        let b = BigRational::new(rng.gen_range(-20..=20).into(), rng.gen_range(1..=7).into());
        rep.check(fs_flow(&fs_flow(&seg, &a), &b) == fs_flow(&seg, &(&a + &b)), || "flow group law".into());
    }
    Ok(rep)
}

fn run<F: FnOnce() -> Result<SuiteReport>>(name: &str, f: F) -> Result<SuiteReport> {
    match f() {
        Ok(r) => Ok(r),
        Err(e @ (Error::GroupTooLarge { .. } | Error::CapExceeded(_) | Error::BallTooLarge(_))) => Ok(SuiteReport::skip(name, &e)),
        Err(e) => Err(e),
    }
}

/// All suites plus the certificate for (w, n, S).
pub fn verify_all(ow: &OwRing, s: &GeneratingSet, cfg: &VerifyConfig) -> Result<VerifyReport> {
    let space = ModelSpace::new(ow)?;
    let gw = Gw::new(ow)?;
    let suites = vec![
        run("orders", || suite_orders(ow))?,
        run("subgroups", || suite_subgroups(ow, cfg.cap_order))?,
        run("tree", || suite_tree(&space, cfg))?,
        run("warp", || suite_warp(&space, cfg))?,
        run("homotopy-action", || suite_sha(&space, cfg))?,
        run("word-metric", || suite_word(&gw, s, cfg))?,
        run("flow-space", || suite_flow(&space, cfg))?,
    ];
    let cc = CertificateConfig { cap_order: cfg.cap_order, cap_bfs: cfg.cap_bfs, seed: cfg.seed, ..Default::default() };
    let (certificate, mut suites) = match build_and_verify(ow, cfg.n, s, &cc) {
        Ok(c) => (Some(c), suites),
        Err(e @ (Error::GroupTooLarge { .. } | Error::CapExceeded(_) | Error::BallTooLarge(_))) => {
            let mut v = suites;
            v.push(SuiteReport::skip("certificate", &e));
            (None, v)
        }
        Err(e) => return Err(e),
    };
    if let Some(c) = &certificate {
        let mut rep = SuiteReport::new("certificate");
        for v in &c.verdicts {
            rep.check(!matches!(v.verdict, crate::certificate::CaseVerdict::Counterexample { .. }), || {
                format!("subgroup {:?}", v.generators)
            });
        }
        suites.push(rep);
    }
    Ok(VerifyReport {
        schema: 1,
        seed: cfg.seed,
        field: ow.field().min_poly_string(),
        w: ow.w().to_string(),
        suites,
        certificate,
    })
}
