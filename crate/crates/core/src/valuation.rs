//! Prime ideals of O, 𝔭-adic valuations, the set M_w, the ring O_w and its unit group.

use crate::error::{Error, Result};
use crate::intmath::{self, exact_sqrt, factor_bigint, vp_bigint};
use crate::numberfield::{Field, FieldElement};
use crate::qmat::{self, Q, QMat};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::{Arc, Mutex};

pub const DEFAULT_CLASS_BOUND: u32 = 12;

/// A valuation value; `Inf` is the valuation of zero.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Val {
    Fin(i64),
    Inf,
}

impl Val {
    pub fn finite(self) -> Option<i64> {
        match self {
            Val::Fin(v) => Some(v),
            Val::Inf => None,
        }
    }

    /// Finite value; panics on the valuation of zero.
    pub fn fin(self) -> i64 {
        self.finite().expect("valuation of zero")
    }
}

impl fmt::Display for Val {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Val::Fin(v) => write!(f, "{v}"),
            Val::Inf => f.write_str("inf"),
        }
    }
}

#[derive(Clone, Debug)]
enum ValMethod {
    // β ∈ O with v_𝔭(β) = e − 1 and v_𝔮(β) ≥ e_𝔮 for the other 𝔮 | p:
    // for a ∈ O, a ∈ 𝔭 iff aβ/p ∈ O
    Witness(FieldElement),
    // 𝔭 is the only prime above p
    Norm,
}

/// A nonzero prime ideal 𝔭 = (p, α) of O.
#[derive(Clone, Debug)]
pub struct PrimeIdeal {
    pub p: u64,
    /// Position among the primes above p.
    pub index: usize,
    pub e: u32,
    pub f: u32,
    pub generator: FieldElement,
    pub uniformizer: FieldElement,
    method: ValMethod,
    /// (k, y) with yO = 𝔭^k, when known.
    pub principal_power: Option<(u32, FieldElement)>,
}

impl PartialEq for PrimeIdeal {
    fn eq(&self, o: &Self) -> bool {
        self.p == o.p && self.index == o.index
    }
}

impl Eq for PrimeIdeal {}

impl PrimeIdeal {
    /// Absolute norm N(𝔭) = p^f.
    pub fn norm(&self) -> u64 {
        self.p.pow(self.f)
    }

    pub fn label(&self) -> String {
        if self.generator.as_rational().is_some() {
            format!("({})", self.p)
        } else {
            format!("({}, {})", self.p, self.generator)
        }
    }

    /// An element β of O with v_𝔭(β) = e − 1 and large valuation at the other primes above p.
    pub fn witness(&self) -> Option<&FieldElement> {
        match &self.method {
            ValMethod::Witness(b) => Some(b),
            ValMethod::Norm => None,
        }
    }
}

impl fmt::Display for PrimeIdeal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// Splitting data supplied by a field-spec file for one prime.
#[derive(Clone, Debug)]
pub struct UserPrime {
    pub e: u32,
    pub f: u32,
    pub generator: FieldElement,
    pub uniformizer: FieldElement,
    pub witness: Option<FieldElement>,
    pub principal_power: Option<(u32, FieldElement)>,
}

/// Optional data for fields outside the automatic range.
#[derive(Clone, Debug, Default)]
pub struct RingData {
    pub integral_basis: Option<Vec<FieldElement>>,
    pub prime_splittings: BTreeMap<u64, Vec<UserPrime>>,
    pub fundamental_units: Option<Vec<FieldElement>>,
    pub torsion_order: Option<u32>,
    pub class_bound: Option<u32>,
}

/// The ring of integers O of a number field.
pub struct IntegerRing {
    field: Field,
    basis: Vec<FieldElement>,
    inv_basis: QMat,
    struct_consts: Vec<Vec<Vec<i64>>>,
    // squarefree d with K = Q(√d), and √d as a field element
    quad: Option<(i64, FieldElement)>,
    data: RingData,
    class_bound: u32,
    primes: Mutex<HashMap<u64, Arc<Vec<PrimeIdeal>>>>,
    units: Mutex<Option<Arc<UnitGroupData>>>,
}

pub type Ring = Arc<IntegerRing>;

impl fmt::Debug for IntegerRing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "IntegerRing({})", self.field.min_poly_string())
    }
}

impl IntegerRing {
    /// Ring of integers of a field of degree at most 2.
    pub fn new(field: &Field) -> Result<Ring> {
        Self::with_data(field, RingData::default())
    }

    pub fn with_data(field: &Field, data: RingData) -> Result<Ring> {
        let deg = field.degree();
        let mut quad = None;
        let basis = match (&data.integral_basis, deg) {
            (Some(b), _) => {
                if b.len() != deg {
                    return Err(Error::Parse(format!("integral basis needs {deg} elements")));
                }
                b.clone()
            }
            (None, 1) => vec![FieldElement::one(field)],
            (None, 2) => {
                let (d, sqrt_d) = quadratic_data(field)?;
                let one = FieldElement::one(field);
                let theta = if d.rem_euclid(4) == 1 {
                    (&one + &sqrt_d).scale(&Q::new(1.into(), 2.into()))
                } else {
                    sqrt_d.clone()
                };
                quad = Some((d, sqrt_d));
                vec![one, theta]
            }
            (None, _) => {
                return Err(Error::UnsupportedDegree(format!(
                    "degree {deg} needs an integral basis in the field-spec file"
                )))
            }
        };
        let mat: QMat = basis.iter().map(|b| b.coeffs().to_vec()).collect();
        let inv_basis = qmat::inverse(&mat).ok_or_else(|| Error::Parse("integral basis is singular".into()))?;
        let mut struct_consts = vec![vec![vec![0i64; deg]; deg]; deg];
        for i in 0..deg {
            for j in 0..deg {
                let c = qmat::vec_mul((&basis[i] * &basis[j]).coeffs(), &inv_basis);
                for (k, v) in c.iter().enumerate() {
                    if !v.is_integer() {
                        return Err(Error::Parse("integral basis is not closed under multiplication".into()));
                    }
                    struct_consts[i][j][k] = v.to_integer().to_i64().ok_or_else(|| Error::Parse("structure constant overflow".into()))?;
                }
            }
        }
        let class_bound = data.class_bound.unwrap_or(DEFAULT_CLASS_BOUND);
        let ring = Arc::new(IntegerRing {
            field: field.clone(),
            basis,
            inv_basis,
            struct_consts,
            quad,
            data,
            class_bound,
            primes: Mutex::new(HashMap::new()),
            units: Mutex::new(None),
        });
        for &p in ring.data.prime_splittings.keys() {
            ring.primes_above(p)?;
        }
        Ok(ring)
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn degree(&self) -> usize {
        self.field.degree()
    }

    pub fn integral_basis(&self) -> &[FieldElement] {
        &self.basis
    }

    /// Structure constants c with ω_i ω_j = Σ_k c[i][j][k] ω_k.
    pub fn struct_consts(&self) -> &[Vec<Vec<i64>>] {
        &self.struct_consts
    }

    /// Squarefree d with K = Q(√d), for quadratic fields.
    pub fn quadratic_d(&self) -> Option<i64> {
        self.quad.as_ref().map(|q| q.0)
    }

    pub fn class_bound(&self) -> u32 {
        self.class_bound
    }

    pub fn basis_coords(&self, x: &FieldElement) -> Vec<Q> {
        qmat::vec_mul(x.coeffs(), &self.inv_basis)
    }

    pub fn from_basis_coords(&self, c: &[BigInt]) -> FieldElement {
        let mut acc = FieldElement::zero(&self.field);
        for (ci, b) in c.iter().zip(&self.basis) {
            if !ci.is_zero() {
                acc = acc + b.scale(&Q::from_integer(ci.clone()));
            }
        }
        acc
    }

    /// x = (Σ a_i ω_i) / d with a_i ∈ Z and the least positive d.
    pub fn integral_parts(&self, x: &FieldElement) -> (Vec<BigInt>, BigInt) {
        let c = self.basis_coords(x);
        let d = c.iter().fold(BigInt::one(), |acc, v| acc.lcm(v.denom()));
        let a = c.iter().map(|v| (v * Q::from_integer(d.clone())).to_integer()).collect();
        (a, d)
    }

    pub fn is_integral(&self, x: &FieldElement) -> bool {
        self.basis_coords(x).iter().all(|c| c.is_integer())
    }

    /// The complete list of primes above the rational prime p.
    pub fn primes_above(&self, p: u64) -> Result<Arc<Vec<PrimeIdeal>>> {
        if let Some(v) = self.primes.lock().unwrap().get(&p) {
            return Ok(v.clone());
        }
        if !intmath::is_prime(p) {
            return Err(Error::Parse(format!("{p} is not prime")));
        }
        let mut list = if let Some(user) = self.data.prime_splittings.get(&p) {
            self.user_primes(p, user)?
        } else {
            match self.degree() {
                1 => vec![PrimeIdeal {
                    p,
                    index: 0,
                    e: 1,
                    f: 1,
                    generator: FieldElement::from_int(&self.field, p as i64),
                    uniformizer: FieldElement::from_int(&self.field, p as i64),
                    method: ValMethod::Witness(FieldElement::one(&self.field)),
                    principal_power: Some((1, FieldElement::from_int(&self.field, p as i64))),
                }],
                2 => self.dedekind_quadratic(p)?,
                d => return Err(Error::UnsupportedDegree(format!("no splitting data for p = {p} in degree {d}"))),
            }
        };
        if self.degree() == 2 {
            for i in 0..list.len() {
                if list[i].principal_power.is_none() {
                    list[i].principal_power = self.search_principal_power(&list[i], &list)?;
                }
            }
        }
        let arc = Arc::new(list);
        self.primes.lock().unwrap().insert(p, arc.clone());
        Ok(arc)
    }

    fn user_primes(&self, p: u64, user: &[UserPrime]) -> Result<Vec<PrimeIdeal>> {
        let total: u32 = user.iter().map(|u| u.e * u.f).sum();
        if total as usize != self.degree() {
            return Err(Error::Parse(format!("splitting of {p}: sum of e*f is {total}, degree is {}", self.degree())));
        }
        let mut out = Vec::new();
        for (index, u) in user.iter().enumerate() {
            let method = match (&u.witness, user.len()) {
                (Some(b), _) => ValMethod::Witness(b.clone()),
                (None, 1) => ValMethod::Norm,
                (None, _) => {
                    return Err(Error::UnsupportedField(format!(
                        "prime {p} splits; each entry needs a valuation_witness"
                    )))
                }
            };
            let ideal = PrimeIdeal {
                p,
                index,
                e: u.e,
                f: u.f,
                generator: u.generator.clone(),
                uniformizer: u.uniformizer.clone(),
                method,
                principal_power: u.principal_power.clone(),
            };
            if self.valuation(&ideal.uniformizer, &ideal) != Val::Fin(1) {
                return Err(Error::Parse(format!("uniformizer for prime {index} above {p} has valuation != 1")));
            }
            out.push(ideal);
        }
        Ok(out)
    }

    fn dedekind_quadratic(&self, p: u64) -> Result<Vec<PrimeIdeal>> {
        let field = &self.field;
        let theta = self.basis[1].clone();
        // θ² − tθ + n = 0
        let t = theta.trace().to_integer();
        let n = theta.norm().to_integer();
        let pb = BigInt::from(p);
        let roots: Vec<u64> = (0..p)
            .filter(|&r| {
                let r = BigInt::from(r);
                ((&r * &r - &t * &r + &n) % &pb).is_zero()
            })
            .collect();
        let lin = |r: u64| &theta - &FieldElement::from_int(field, r as i64);
        let pe = FieldElement::from_int(field, p as i64);
        let mut out = Vec::new();
        match roots.len() {
            2 => {
                for (index, (&r, &other)) in [(&roots[0], &roots[1]), (&roots[1], &roots[0])].into_iter().enumerate() {
                    let mut ideal = PrimeIdeal {
                        p,
                        index,
                        e: 1,
                        f: 1,
                        generator: lin(r),
                        uniformizer: lin(r),
                        method: ValMethod::Witness(lin(other)),
                        principal_power: None,
                    };
                    if self.valuation(&ideal.uniformizer, &ideal) != Val::Fin(1) {
                        ideal.uniformizer = &ideal.uniformizer + &pe;
                    }
                    out.push(ideal);
                }
            }
            1 => {
                let r = roots[0];
                out.push(PrimeIdeal {
                    p,
                    index: 0,
                    e: 2,
                    f: 1,
                    generator: lin(r),
                    uniformizer: lin(r),
                    method: ValMethod::Witness(lin(r)),
                    principal_power: None,
                });
            }
            _ => out.push(PrimeIdeal {
                p,
                index: 0,
                e: 1,
                f: 2,
                generator: pe.clone(),
                uniformizer: pe.clone(),
                method: ValMethod::Witness(FieldElement::one(field)),
                principal_power: None,
            }),
        }
        for ideal in &out {
            if self.valuation(&ideal.uniformizer, ideal) != Val::Fin(1) {
                return Err(Error::Anomaly(format!("uniformizer of {} has wrong valuation", ideal.label())));
            }
        }
        Ok(out)
    }

    /// v_𝔭(x), with v_𝔭(0) = ∞.
    pub fn valuation(&self, x: &FieldElement, ideal: &PrimeIdeal) -> Val {
        if x.is_zero() {
            return Val::Inf;
        }
        let p = ideal.p;
        match &ideal.method {
            ValMethod::Norm => {
                let nrm = x.norm();
                let v = vp_bigint(nrm.numer(), p) as i64 - vp_bigint(nrm.denom(), p) as i64;
                Val::Fin(v / ideal.f as i64)
            }
            ValMethod::Witness(beta) => {
                let (coords, d) = self.integral_parts(x);
                let vd = vp_bigint(&d, p) as i64 * ideal.e as i64;
                if self.degree() == 1 {
                    return Val::Fin(vp_bigint(&coords[0], p) as i64 - vd);
                }
                let mut a = self.from_basis_coords(&coords);
                let nrm = a.norm().to_integer();
                if !(nrm % BigInt::from(p)).is_zero() {
                    return Val::Fin(-vd);
                }
                let inv_p = Q::new(1.into(), p.into());
                let mut k = 0i64;
                loop {
                    let next = (&a * beta).scale(&inv_p);
                    if !self.is_integral(&next) {
                        break;
                    }
                    a = next;
                    k += 1;
                }
                Val::Fin(k - vd)
            }
        }
    }

    /// All primes with v_𝔭(x) ≠ 0 together with the valuation, for x ≠ 0.
    pub fn support(&self, x: &FieldElement) -> Result<Vec<(PrimeIdeal, i64)>> {
        if x.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let (coords, d) = self.integral_parts(x);
        let a = self.from_basis_coords(&coords);
        let mut ps: BTreeSet<u64> = BTreeSet::new();
        for (p, _) in factor_bigint(&d)? {
            ps.insert(p);
        }
        for (p, _) in factor_bigint(&a.norm().to_integer())? {
            ps.insert(p);
        }
        let mut out = Vec::new();
        for p in ps {
            for ideal in self.primes_above(p)?.iter() {
                let v = self.valuation(x, ideal).fin();
                if v != 0 {
                    out.push((ideal.clone(), v));
                }
            }
        }
        Ok(out)
    }

    /// M_w: the primes with v_𝔭(w) ≠ 0, ordered by residue characteristic.
    pub fn mw_set(&self, w: &FieldElement) -> Result<Vec<PrimeIdeal>> {
        Ok(self.support(w)?.into_iter().map(|(p, _)| p).collect())
    }

    fn search_principal_power(&self, ideal: &PrimeIdeal, siblings: &[PrimeIdeal]) -> Result<Option<(u32, FieldElement)>> {
        let field = &self.field;
        let theta = &self.basis[1];
        let t = theta.trace().to_integer();
        let n = theta.norm().to_integer();
        let disc = (&t * &t - BigInt::from(4) * &n).abs().to_f64().unwrap();
        let stretch = match self.fundamental_units_raw()?.first() {
            Some(u) => (0..2).map(|i| u.embed(i).norm()).fold(1.0f64, f64::max),
            None => 1.0,
        };
        for k in 1..=self.class_bound {
            let target = BigInt::from(ideal.p).pow(ideal.f * k);
            let bound = (2.0 * (target.to_f64().unwrap() * stretch).sqrt() / disc.sqrt()).floor() as i64 + 1;
            for yabs in 0..=bound {
                for y in if yabs == 0 { vec![0] } else { vec![yabs, -yabs] } {
                    let yb = BigInt::from(y);
                    for sgn in [1, -1] {
                        let nt = &target * sgn;
                        let dd = &t * &t * &yb * &yb - BigInt::from(4) * (&n * &yb * &yb - &nt);
                        let Some(r) = exact_sqrt(&dd) else { continue };
                        for num in [-&t * &yb + &r, -&t * &yb - &r] {
                            if num.is_odd() {
                                continue;
                            }
                            let x = num / 2;
                            let cand = self.from_basis_coords(&[x, yb.clone()]);
                            if cand.is_zero() {
                                continue;
                            }
                            let ok = siblings.iter().all(|s| {
                                let v = self.valuation(&cand, s);
                                if s == ideal {
                                    v == Val::Fin(k as i64)
                                } else {
                                    v == Val::Fin(0)
                                }
                            });
                            if ok {
                                return Ok(Some((k, cand)));
                            }
                        }
                    }
                }
            }
        }
        let _ = field;
        Ok(None)
    }

    fn fundamental_units_raw(&self) -> Result<Vec<FieldElement>> {
        if let Some(u) = &self.data.fundamental_units {
            return Ok(u.clone());
        }
        match (&self.quad, self.degree()) {
            (_, 1) => Ok(vec![]),
            (Some((d, _)), 2) if *d < 0 => Ok(vec![]),
            (Some((d, sqrt_d)), 2) => Ok(vec![real_quadratic_unit(&self.field, *d, sqrt_d)?]),
            _ => Err(Error::UnsupportedField("fundamental units must be supplied for this degree".into())),
        }
    }

    /// Torsion order, torsion generator, fundamental units and Dirichlet rank of O^×.
    pub fn unit_data(&self) -> Result<Arc<UnitGroupData>> {
        if let Some(u) = self.units.lock().unwrap().as_ref() {
            return Ok(u.clone());
        }
        let field = &self.field;
        let (r1, r2) = field.signature();
        let rank = r1 + r2 - 1;
        let units = self.fundamental_units_raw()?;
        if units.len() != rank {
            return Err(Error::UnsupportedField(format!("expected {rank} fundamental units, got {}", units.len())));
        }
        for u in &units {
            let nrm = u.norm();
            if !(nrm == qmat::q(1) || nrm == qmat::q(-1)) || !self.is_integral(u) {
                return Err(Error::Parse(format!("{u} is not a unit of O")));
            }
        }
        let torsion_order = match (self.data.torsion_order, &self.quad) {
            (Some(t), _) => t,
            (None, Some((-1, _))) => 4,
            (None, Some((-3, _))) => 6,
            (None, _) if r1 > 0 => 2,
            (None, _) => return Err(Error::UnsupportedField("torsion_order must be supplied".into())),
        };
        let torsion_generator = match torsion_order {
            1 => FieldElement::one(field),
            2 => FieldElement::from_int(field, -1),
            t => self.find_root_of_unity(t)?,
        };
        let data = Arc::new(UnitGroupData { torsion_order, torsion_generator, fundamental_units: units, rank });
        *self.units.lock().unwrap() = Some(data.clone());
        Ok(data)
    }

    fn find_root_of_unity(&self, t: u32) -> Result<FieldElement> {
        let n = self.degree();
        let primes: Vec<u64> = intmath::factor_u64(t as u64).into_iter().map(|(p, _)| p).collect();
        let span = 5i64.pow(n as u32);
        for code in 0..span {
            let coords: Vec<BigInt> = (0..n).map(|i| BigInt::from((code / 5i64.pow(i as u32)) % 5 - 2)).collect();
            let x = self.from_basis_coords(&coords);
            if x.is_zero() || !x.pow_u(t as u64).is_one() {
                continue;
            }
            if primes.iter().all(|&p| !x.pow_u(t as u64 / p).is_one()) {
                return Ok(x);
            }
        }
        Err(Error::UnsupportedField(format!("no root of unity of order {t} found")))
    }
}

/// Torsion and free part of O^×.
#[derive(Clone, Debug)]
pub struct UnitGroupData {
    pub torsion_order: u32,
    pub torsion_generator: FieldElement,
    pub fundamental_units: Vec<FieldElement>,
    pub rank: usize,
}

fn squarefree_split(n: &BigInt) -> Result<(BigInt, BigInt)> {
    let mut core = if n.is_negative() { BigInt::from(-1) } else { BigInt::one() };
    let mut root = BigInt::one();
    for (p, e) in factor_bigint(n)? {
        if e % 2 == 1 {
            core *= p;
        }
        root *= BigInt::from(p).pow(e / 2);
    }
    Ok((core, root))
}

fn quadratic_data(field: &Field) -> Result<(i64, FieldElement)> {
    let c = field.min_poly();
    let disc = &c[1] * &c[1] - qmat::q(4) * &c[0];
    let num = disc.numer() * disc.denom();
    let (d, s) = squarefree_split(&num)?;
    let d = d.to_i64().ok_or_else(|| Error::UnsupportedField("discriminant too large".into()))?;
    let w = FieldElement::generator(field);
    let two_w_plus = w.scale(&qmat::q(2)) + FieldElement::from_q(field, c[1].clone());
    let sqrt_d = two_w_plus.scale(&Q::new(disc.denom().clone(), s));
    debug_assert_eq!(&sqrt_d * &sqrt_d, FieldElement::from_int(field, d));
    Ok((d, sqrt_d))
}

fn real_quadratic_unit(field: &Field, d: i64, sqrt_d: &FieldElement) -> Result<FieldElement> {
    let dd = BigInt::from(d);
    let (sigma, targets) = if d.rem_euclid(4) == 1 { (2, [4, -4]) } else { (1, [1, -1]) };
    for b in 1i64..10_000_000 {
        let bb = BigInt::from(b);
        for t in targets {
            if let Some(a) = exact_sqrt(&(&dd * &bb * &bb + BigInt::from(t))) {
                if a.is_zero() {
                    continue;
                }
                let half = Q::new(1.into(), sigma.into());
                let u = FieldElement::from_q(field, Q::from_integer(a) * &half) + sqrt_d.scale(&(qmat::q(b) * &half));
                return Ok(u);
            }
        }
    }
    Err(Error::UnsupportedField(format!("fundamental unit search exhausted for d = {d}")))
}

/// Which ring a membership test refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Membership {
    O,
    Ow,
    OwUnits,
}

/// Exponents from the decomposition y^l = ζ^j · ∏ e_i^{a_i} · ∏ y_𝔭^{b_𝔭}.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AlphaDecomposition {
    pub power: u64,
    pub torsion_exponent: u32,
    pub unit_exponents: Vec<i64>,
    pub mw_exponents: Vec<i64>,
    pub valuations: Vec<i64>,
}

impl AlphaDecomposition {
    /// α_w(y) ∈ Z^{n_w}.
    pub fn alpha(&self) -> Result<Vec<i64>> {
        let l = self.power as i64;
        if self.unit_exponents.iter().any(|a| a % l != 0) {
            return Err(Error::NonIntegralProjection(self.power));
        }
        Ok(self.unit_exponents.iter().map(|a| a / l).collect())
    }
}

/// O_w = {x : v_𝔭(x) ≥ 0 for all 𝔭 ∉ M_w} together with M_w and the unit data.
#[derive(Clone, Debug)]
pub struct OwRing {
    ring: Ring,
    w: FieldElement,
    mw: Vec<PrimeIdeal>,
}

impl OwRing {
    pub fn new(ring: &Ring, w: &FieldElement) -> Result<Self> {
        if w.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let mw = ring.mw_set(w)?;
        Ok(OwRing { ring: ring.clone(), w: w.clone(), mw })
    }

    pub fn ring(&self) -> &Ring {
        &self.ring
    }

    pub fn field(&self) -> &Field {
        self.ring.field()
    }

    pub fn w(&self) -> &FieldElement {
        &self.w
    }

    pub fn mw(&self) -> &[PrimeIdeal] {
        &self.mw
    }

    /// Residue characteristics of the primes in M_w.
    pub fn mw_chars(&self) -> BTreeSet<u64> {
        self.mw.iter().map(|p| p.p).collect()
    }

    pub fn valuation(&self, x: &FieldElement, p: &PrimeIdeal) -> Val {
        self.ring.valuation(x, p)
    }

    pub fn contains(&self, x: &FieldElement, which: Membership) -> Result<bool> {
        if which == Membership::O {
            return Ok(self.ring.is_integral(x));
        }
        if x.is_zero() {
            return Ok(which == Membership::Ow);
        }
        for (p, v) in self.ring.support(x)? {
            let in_mw = self.mw.contains(&p);
            if !in_mw && (v < 0 || which == Membership::OwUnits) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn unit_data(&self) -> Result<Arc<UnitGroupData>> {
        self.ring.unit_data()
    }

    /// Rank n_w of the free part of O^×.
    pub fn rank_nw(&self) -> Result<usize> {
        Ok(self.unit_data()?.rank)
    }

    /// The witnesses (k_𝔭, y_𝔭) for 𝔭 ∈ M_w.
    pub fn mw_generators(&self) -> Result<Vec<(u32, FieldElement)>> {
        self.mw
            .iter()
            .map(|p| {
                p.principal_power.clone().ok_or_else(|| {
                    Error::UnsupportedField(format!("no principal power of {} within the class bound", p.label()))
                })
            })
            .collect()
    }

    pub fn decompose(&self, y: &FieldElement) -> Result<AlphaDecomposition> {
        if !self.contains(y, Membership::OwUnits)? {
            return Err(Error::NotAUnit);
        }
        let units = self.unit_data()?;
        let gens = self.mw_generators()?;
        let valuations: Vec<i64> = self.mw.iter().map(|p| self.valuation(y, p).fin()).collect();
        let mut l: u64 = 1;
        for ((k, _), v) in gens.iter().zip(&valuations) {
            let k = *k as u64;
            l = intmath::lcm_u64(l, k / intmath::gcd_u64(k, v.unsigned_abs()));
        }
        let mw_exponents: Vec<i64> = gens.iter().zip(&valuations).map(|((k, _), v)| v * l as i64 / *k as i64).collect();
        let mut u = y.pow_u(l);
        for ((_, g), b) in gens.iter().zip(&mw_exponents) {
            u = u.div(&g.pow(*b)?)?;
        }
        let field = self.field();
        let rank = units.rank;
        let unit_exponents = if rank == 0 {
            vec![]
        } else {
            let classes = field.embedding_classes();
            let log = |x: &FieldElement, c: usize| x.embed(c).norm().ln();
            let a: Vec<Vec<f64>> = (0..rank)
                .map(|r| units.fundamental_units.iter().map(|e| log(e, classes[r])).collect())
                .collect();
            let b: Vec<f64> = (0..rank).map(|r| log(&u, classes[r])).collect();
            solve_f64(a, b).iter().map(|x| x.round() as i64).collect()
        };
        let mut zeta_part = u.clone();
        for (e, a) in units.fundamental_units.iter().zip(&unit_exponents) {
            zeta_part = zeta_part.div(&e.pow(*a)?)?;
        }
        let torsion_exponent = (0..units.torsion_order)
            .find(|&j| units.torsion_generator.pow_u(j as u64) == zeta_part)
            .ok_or_else(|| Error::Anomaly(format!("discrete logarithm failed for {y}")))?;
        let dec = AlphaDecomposition { power: l, torsion_exponent, unit_exponents, mw_exponents, valuations };
        if self.reconstruct(&dec)? != y.pow_u(l) {
            return Err(Error::Anomaly(format!("reconstruction failed for {y}")));
        }
        Ok(dec)
    }

    /// ζ^j · ∏ e_i^{a_i} · ∏ y_𝔭^{b_𝔭}.
    pub fn reconstruct(&self, dec: &AlphaDecomposition) -> Result<FieldElement> {
        let units = self.unit_data()?;
        let gens = self.mw_generators()?;
        let mut acc = units.torsion_generator.pow_u(dec.torsion_exponent as u64);
        for (e, a) in units.fundamental_units.iter().zip(&dec.unit_exponents) {
            acc = acc * e.pow(*a)?;
        }
        for ((_, g), b) in gens.iter().zip(&dec.mw_exponents) {
            acc = acc * g.pow(*b)?;
        }
        Ok(acc)
    }

    /// α_w(y) ∈ Z^{n_w}.
    pub fn alpha(&self, y: &FieldElement) -> Result<Vec<i64>> {
        self.decompose(y)?.alpha()
    }
}

fn solve_f64(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap()).unwrap();
        a.swap(piv, col);
        b.swap(piv, col);
        for r in 0..n {
            if r != col {
                let f = a[r][col] / a[col][col];
                for c in col..n {
                    a[r][c] -= f * a[col][c];
                }
                b[r] -= f * b[col];
            }
        }
    }
    (0..n).map(|i| b[i] / a[i][i]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numberfield::NumberField;
    use proptest::prelude::*;

    fn q_ring() -> Ring {
        IntegerRing::new(&NumberField::rationals()).unwrap()
    }

    fn sqrt2_ring() -> Ring {
        IntegerRing::new(&NumberField::from_strings(&["-2", "0", "1"], 30).unwrap()).unwrap()
    }

    fn el(r: &Ring, s: &str) -> FieldElement {
        FieldElement::parse(r.field(), s).unwrap()
    }

    #[test]
    fn splitting_examples() {
        let q = q_ring();
        let p5 = q.primes_above(5).unwrap();
        assert_eq!(p5.len(), 1);
        assert_eq!((p5[0].e, p5[0].f), (1, 1));
        assert_eq!(p5[0].uniformizer, el(&q, "5"));

        let r = sqrt2_ring();
        let p2 = r.primes_above(2).unwrap();
        assert_eq!(p2.len(), 1);
        assert_eq!((p2[0].e, p2[0].f), (2, 1));
        assert_eq!(r.valuation(&el(&r, "w"), &p2[0]), Val::Fin(1));
        let p7 = r.primes_above(7).unwrap();
        assert_eq!(p7.len(), 2);
        assert!(p7.iter().all(|p| p.e == 1 && p.f == 1));
        assert_eq!(r.primes_above(3).unwrap()[0].f, 2);
    }

    #[test]
    fn sum_ef_is_degree() {
        let r = sqrt2_ring();
        for p in [2u64, 3, 5, 7, 11, 17, 23] {
            let s: u32 = r.primes_above(p).unwrap().iter().map(|i| i.e * i.f).sum();
            assert_eq!(s, 2);
        }
        let golden = IntegerRing::new(&NumberField::from_strings(&["-1", "-1", "1"], 30).unwrap()).unwrap();
        for p in [2u64, 3, 5, 11, 19] {
            let s: u32 = golden.primes_above(p).unwrap().iter().map(|i| i.e * i.f).sum();
            assert_eq!(s, 2);
        }
        assert_eq!(golden.primes_above(5).unwrap()[0].e, 2);
    }

    #[test]
    fn valuation_examples() {
        let q = q_ring();
        let p5 = q.primes_above(5).unwrap()[0].clone();
        assert_eq!(q.valuation(&FieldElement::zero(q.field()), &p5), Val::Inf);
        assert_eq!(q.valuation(&el(&q, "20"), &p5), Val::Fin(1));
        assert_eq!(q.valuation(&el(&q, "3/50"), &p5), Val::Fin(-2));
    }

    #[test]
    fn mw_examples() {
        let q = q_ring();
        let labels = |w: &str| q.mw_set(&el(&q, w)).unwrap().iter().map(|p| p.p).collect::<Vec<_>>();
        assert_eq!(labels("2"), vec![2]);
        assert_eq!(labels("3/2"), vec![2, 3]);
        let r = sqrt2_ring();
        let m = r.mw_set(&el(&r, "w")).unwrap();
        assert_eq!(m.len(), 1);
        assert_eq!((m[0].p, m[0].e), (2, 2));
    }

    #[test]
    fn support_sees_cancelling_norms() {
        // (3 + w)/(3 - w) has norm 1 but valuations ±1 at the two primes above 7
        let r = sqrt2_ring();
        let x = el(&r, "3 + w").div(&el(&r, "3 - w")).unwrap();
        assert_eq!(x.norm(), qmat::q(1));
        let s = r.support(&x).unwrap();
        assert_eq!(s.len(), 2);
        assert!(s.iter().all(|(p, v)| p.p == 7 && v.abs() == 1));
    }

    #[test]
    fn membership_examples() {
        let q = q_ring();
        let ow = OwRing::new(&q, &el(&q, "2")).unwrap();
        assert!(ow.contains(&el(&q, "1/2"), Membership::Ow).unwrap());
        assert!(!ow.contains(&el(&q, "1/2"), Membership::O).unwrap());
        assert!(!ow.contains(&el(&q, "1/3"), Membership::Ow).unwrap());
        let ow = OwRing::new(&q, &el(&q, "3/2")).unwrap();
        assert!(ow.contains(&el(&q, "3/16"), Membership::OwUnits).unwrap());
        assert!(!ow.contains(&el(&q, "5/16"), Membership::OwUnits).unwrap());
    }

    #[test]
    fn unit_examples() {
        let r = sqrt2_ring();
        let units = r.unit_data().unwrap();
        assert_eq!(units.rank, 1);
        let e = &units.fundamental_units[0];
        assert!(e == &el(&r, "1 + w") || e == &el(&r, "1 - w"), "{e}");
        let ow = OwRing::new(&r, &el(&r, "w")).unwrap();
        let d = ow.decompose(e).unwrap();
        assert_eq!(d.alpha().unwrap(), vec![1]);
        assert_eq!(d.torsion_exponent, 0);

        let q = q_ring();
        let ow = OwRing::new(&q, &el(&q, "2")).unwrap();
        let d = ow.decompose(&el(&q, "-8")).unwrap();
        assert_eq!(d.torsion_exponent, 1);
        assert_eq!(d.mw_exponents, vec![3]);
        assert!(d.alpha().unwrap().is_empty());
        let d = ow.decompose(&el(&q, "1")).unwrap();
        assert_eq!((d.torsion_exponent, d.mw_exponents.clone()), (0, vec![0]));
        assert!(matches!(ow.decompose(&el(&q, "3")), Err(Error::NotAUnit)));
    }

    #[test]
    fn imaginary_torsion() {
        let gauss = IntegerRing::new(&NumberField::from_strings(&["1", "0", "1"], 30).unwrap()).unwrap();
        assert_eq!(gauss.unit_data().unwrap().torsion_order, 4);
        let eis = IntegerRing::new(&NumberField::from_strings(&["1", "1", "1"], 30).unwrap()).unwrap();
        let u = eis.unit_data().unwrap();
        assert_eq!(u.torsion_order, 6);
        assert!(u.torsion_generator.pow_u(6).is_one());
        // class number 2: the prime above 2 in Q(√−5) is not principal
        let m5 = IntegerRing::new(&NumberField::from_strings(&["5", "0", "1"], 30).unwrap()).unwrap();
        let p2 = m5.primes_above(2).unwrap();
        assert_eq!(p2[0].principal_power.as_ref().unwrap().0, 2);
    }

    #[test]
    fn principal_powers_generate() {
        let r = sqrt2_ring();
        for p in [2u64, 3, 7, 17] {
            let all = r.primes_above(p).unwrap();
            for ideal in all.iter() {
                let (k, y) = ideal.principal_power.clone().unwrap();
                assert_eq!(k, 1);
                for other in all.iter() {
                    let expect = if other == ideal { 1 } else { 0 };
                    assert_eq!(r.valuation(&y, other), Val::Fin(expect));
                }
                assert_eq!(y.norm().abs(), qmat::q(ideal.norm() as i64));
            }
        }
    }

    fn small_elem() -> impl Strategy<Value = (i64, i64, i64)> {
        (-30i64..30, -30i64..30, 1i64..13)
    }

    proptest! {
        #[test]
        fn valuation_laws(a in small_elem(), b in small_elem()) {
            let r = sqrt2_ring();
            let mk = |(x, y, d): (i64, i64, i64)| FieldElement::new(r.field(), vec![Q::new(x.into(), d.into()), Q::new(y.into(), d.into())]);
            let (x, y) = (mk(a), mk(b));
            for p in [2u64, 3, 7] {
                for ideal in r.primes_above(p).unwrap().iter() {
                    let (vx, vy) = (r.valuation(&x, ideal), r.valuation(&y, ideal));
                    let vxy = r.valuation(&(&x * &y), ideal);
                    match (vx, vy) {
                        (Val::Fin(a), Val::Fin(b)) => prop_assert_eq!(vxy, Val::Fin(a + b)),
                        _ => prop_assert_eq!(vxy, Val::Inf),
                    }
                    prop_assert!(r.valuation(&(&x + &y), ideal) >= vx.min(vy));
                }
            }
        }

        #[test]
        fn decomposition_roundtrip(a in -4i64..4, b in -6i64..6, s in 0u32..2) {
            let r = sqrt2_ring();
            let ow = OwRing::new(&r, &el(&r, "w")).unwrap();
            let e = r.unit_data().unwrap().fundamental_units[0].clone();
            let y = e.pow(a).unwrap() * el(&r, "w").pow(b).unwrap() * FieldElement::from_int(r.field(), if s == 0 { 1 } else { -1 });
            let d = ow.decompose(&y).unwrap();
            prop_assert_eq!(ow.reconstruct(&d).unwrap(), y.pow_u(d.power));
            // α is a homomorphism; α(w) depends on the chosen generator y_𝔭
            let aw = ow.alpha(&el(&r, "w")).unwrap()[0];
            prop_assert_eq!(d.alpha().unwrap(), vec![a + b * aw]);
        }
    }
}
