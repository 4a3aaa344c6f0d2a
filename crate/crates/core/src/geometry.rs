//! The model space X_w = R^{n_w} × ∏_{𝔭∈M_w} T(v_𝔭), the retraction action Ψ^R,
//! Minkowski space, warp functions and flow-space primitives.

use crate::bt_tree::{LatticeClass, Tree};
use crate::error::{Error, Result};
use crate::numberfield::{Field, FieldElement};
use crate::residue::hnf_mod;
use crate::valuation::{Membership, OwRing, Ring};
use crate::word::{Gw, GwElement};
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;
use std::cmp::Ordering;

// Offsets this close to an endpoint snap to the vertex.
const SNAP: f64 = 1e-12;

fn class_cmp(a: &LatticeClass, b: &LatticeClass) -> Ordering {
    a.a().cmp(&b.a()).then_with(|| a.c().coeffs().cmp(b.c().coeffs()))
}

/// A point on an edge {from, to} of a tree at distance `offset` from `from`, or a vertex.
#[derive(Clone, Debug, PartialEq)]
pub struct TreePoint {
    from: LatticeClass,
    to: LatticeClass,
    offset: f64,
}

impl TreePoint {
    pub fn vertex(v: LatticeClass) -> Self {
        TreePoint { from: v.clone(), to: v, offset: 0.0 }
    }

    /// The point at `offset` ∈ [0,1] along the edge from `from` to the neighbour `to`.
    pub fn on_edge(tree: &Tree, from: LatticeClass, to: LatticeClass, offset: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&offset) {
            return Err(Error::HypothesisViolated(format!("edge offset {offset} outside [0,1]")));
        }
        if from != to && tree.distance(&from, &to)? != 1 {
            return Err(Error::HypothesisViolated("edge endpoints are not adjacent".into()));
        }
        Ok(Self::canonical(from, to, offset))
    }

    fn canonical(from: LatticeClass, to: LatticeClass, offset: f64) -> Self {
        if from == to || offset <= SNAP {
            return Self::vertex(from);
        }
        if offset >= 1.0 - SNAP {
            return Self::vertex(to);
        }
        if class_cmp(&from, &to) == Ordering::Greater {
            TreePoint { from: to, to: from, offset: 1.0 - offset }
        } else {
            TreePoint { from, to, offset }
        }
    }

    pub fn is_vertex(&self) -> bool {
        self.offset == 0.0
    }

    pub fn from(&self) -> &LatticeClass {
        &self.from
    }

    pub fn to(&self) -> &LatticeClass {
        &self.to
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    // Endpoints of the carrier edge with their distance from the point.
    fn ends(&self) -> Vec<(&LatticeClass, f64)> {
        if self.is_vertex() {
            vec![(&self.from, 0.0)]
        } else {
            vec![(&self.from, self.offset), (&self.to, 1.0 - self.offset)]
        }
    }

    fn same_edge(&self, o: &TreePoint) -> bool {
        !self.is_vertex() && !o.is_vertex() && self.from == o.from && self.to == o.to
    }
}

/// Distance between points of one tree, edges included.
pub fn tree_point_distance(tree: &Tree, p: &TreePoint, q: &TreePoint) -> Result<f64> {
    if p.same_edge(q) {
        return Ok((p.offset - q.offset).abs());
    }
    let mut best = f64::INFINITY;
    for (u, du) in p.ends() {
        for (v, dv) in q.ends() {
            best = best.min(du + tree.distance(u, v)? as f64 + dv);
        }
    }
    Ok(best)
}

/// The point at arc length t ∈ [0, d(p,q)] on the geodesic from p to q.
pub fn tree_geodesic_eval(tree: &Tree, p: &TreePoint, q: &TreePoint, t: f64) -> Result<TreePoint> {
    if p.same_edge(q) {
        let dir = if q.offset >= p.offset { 1.0 } else { -1.0 };
        let s = p.offset + dir * t.clamp(0.0, (q.offset - p.offset).abs());
        return Ok(TreePoint::canonical(p.from.clone(), p.to.clone(), s));
    }
    let mut best: Option<(f64, &LatticeClass, f64, &LatticeClass, f64)> = None;
    for (u, du) in p.ends() {
        for (v, dv) in q.ends() {
            let total = du + tree.distance(u, v)? as f64 + dv;
            if best.map_or(true, |b| total < b.0 - SNAP) {
                best = Some((total, u, du, v, dv));
            }
        }
    }
    let (total, u, du, v, dv) = best.expect("every point has an endpoint");
    let mut t = t.clamp(0.0, total);
    if t <= du {
        // still on p's edge, moving towards u
        let s = if *u == p.from { p.offset - t } else { p.offset + t };
        return Ok(TreePoint::canonical(p.from.clone(), p.to.clone(), s));
    }
    t -= du;
    let path = tree.geodesic(u, v)?;
    let len = (path.len() - 1) as f64;
    if t <= len {
        let k = (t.floor() as usize).min(path.len() - 1);
        if k == path.len() - 1 {
            return Ok(TreePoint::vertex(path[k].clone()));
        }
        return Ok(TreePoint::canonical(path[k].clone(), path[k + 1].clone(), t - k as f64));
    }
    t = (t - len).min(dv);
    if q.is_vertex() {
        return Ok(q.clone());
    }
    let s = if *v == q.from { t } else { 1.0 - t };
    Ok(TreePoint::canonical(q.from.clone(), q.to.clone(), s))
}

/// f_𝔭 interpolated linearly along the carrier edge.
pub fn tree_point_busemann(tree: &Tree, p: &TreePoint) -> Result<f64> {
    let f0 = tree.busemann(&p.from)? as f64;
    if p.is_vertex() {
        return Ok(f0);
    }
    let f1 = tree.busemann(&p.to)? as f64;
    Ok((1.0 - p.offset) * f0 + p.offset * f1)
}

fn tree_point_act(tree: &Tree, x: &FieldElement, y: &FieldElement, p: &TreePoint) -> Result<TreePoint> {
    let from = tree.act(x, y, &p.from)?;
    if p.is_vertex() {
        return Ok(TreePoint::vertex(from));
    }
    Ok(TreePoint::canonical(from, tree.act(x, y, &p.to)?, p.offset))
}

/// A point of X_w.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelPoint {
    pub euclid: Vec<f64>,
    pub trees: Vec<TreePoint>,
}

/// An element (x, y) of Q(w) ⋊ O_w^× with α_w(y) precomputed.
#[derive(Clone, Debug, PartialEq)]
pub struct Acting {
    pub x: FieldElement,
    pub y: FieldElement,
    alpha: Vec<i64>,
}

impl Acting {
    pub fn alpha(&self) -> &[i64] {
        &self.alpha
    }
}

/// X_w together with the data needed to act on it and to warp it.
#[derive(Clone, Debug)]
pub struct ModelSpace {
    ow: OwRing,
    trees: Vec<Tree>,
    units: Vec<FieldElement>,
    mw_gens: Vec<(u32, FieldElement)>,
}

impl ModelSpace {
    pub fn new(ow: &OwRing) -> Result<Self> {
        let trees = ow.mw().iter().map(|p| Tree::new(ow.ring(), p)).collect::<Result<Vec<_>>>()?;
        let units = ow.unit_data()?.fundamental_units.clone();
        let mw_gens = ow.mw_generators()?;
        Ok(ModelSpace { ow: ow.clone(), trees, units, mw_gens })
    }

    pub fn ow(&self) -> &OwRing {
        &self.ow
    }

    pub fn field(&self) -> &Field {
        self.ow.field()
    }

    pub fn trees(&self) -> &[Tree] {
        &self.trees
    }

    pub fn nw(&self) -> usize {
        self.units.len()
    }

    /// x₀: the Euclidean origin and the identity class in every tree.
    pub fn base_point(&self) -> ModelPoint {
        ModelPoint {
            euclid: vec![0.0; self.nw()],
            trees: self.trees.iter().map(|t| TreePoint::vertex(t.identity())).collect(),
        }
    }

    fn check_shape(&self, p: &ModelPoint) -> Result<()> {
        if p.euclid.len() != self.nw() || p.trees.len() != self.trees.len() {
            return Err(Error::ShapeMismatch);
        }
        Ok(())
    }

    fn factor_distances(&self, a: &ModelPoint, b: &ModelPoint) -> Result<(f64, Vec<f64>)> {
        self.check_shape(a)?;
        self.check_shape(b)?;
        let e2: f64 = a.euclid.iter().zip(&b.euclid).map(|(x, y)| (x - y) * (x - y)).sum();
        let td = self
            .trees
            .iter()
            .zip(a.trees.iter().zip(&b.trees))
            .map(|(t, (p, q))| tree_point_distance(t, p, q))
            .collect::<Result<Vec<_>>>()?;
        Ok((e2.sqrt(), td))
    }

    /// l² combination of the factor distances.
    pub fn distance(&self, a: &ModelPoint, b: &ModelPoint) -> Result<f64> {
        let (e, td) = self.factor_distances(a, b)?;
        Ok((e * e + td.iter().map(|d| d * d).sum::<f64>()).sqrt())
    }

    /// c_{a,b}(t) for the unit-speed geodesic, with t clamped to [0, d(a,b)].
    pub fn geodesic_eval(&self, a: &ModelPoint, b: &ModelPoint, t: f64) -> Result<ModelPoint> {
        let (e, td) = self.factor_distances(a, b)?;
        let total = (e * e + td.iter().map(|d| d * d).sum::<f64>()).sqrt();
        if total == 0.0 {
            return Ok(a.clone());
        }
        let s = t.clamp(0.0, total) / total;
        let euclid = a.euclid.iter().zip(&b.euclid).map(|(x, y)| x + s * (y - x)).collect();
        let trees = self
            .trees
            .iter()
            .zip(a.trees.iter().zip(&b.trees))
            .zip(&td)
            .map(|((tr, (p, q)), d)| tree_geodesic_eval(tr, p, q, s * d))
            .collect::<Result<Vec<_>>>()?;
        Ok(ModelPoint { euclid, trees })
    }

    /// H^R(x,t) = c_{x,base}((d(x,base) − R)(1−t)); a nonpositive arc leaves x fixed.
    pub fn retraction(&self, x: &ModelPoint, t: f64, r: f64, base: &ModelPoint) -> Result<ModelPoint> {
        let arc = (self.distance(x, base)? - r) * (1.0 - t);
        if arc <= 0.0 {
            return Ok(x.clone());
        }
        self.geodesic_eval(x, base, arc)
    }

    pub fn acting(&self, x: FieldElement, y: FieldElement) -> Result<Acting> {
        if !self.ow.contains(&y, Membership::OwUnits)? {
            return Err(Error::NotInActingGroup(format!("{y} is not a unit of O_w")));
        }
        let alpha = self.ow.alpha(&y)?;
        Ok(Acting { x, y, alpha })
    }

    /// (x, z) ∈ G_w acts as (x, w^z).
    pub fn gw_acting(&self, gw: &Gw, g: &GwElement) -> Result<Acting> {
        self.acting(g.x.clone(), gw.w_pow(g.z))
    }

    pub fn acting_identity(&self) -> Acting {
        let f = self.field();
        Acting { x: FieldElement::zero(f), y: FieldElement::one(f), alpha: vec![0; self.nw()] }
    }

    pub fn compose(&self, g: &Acting, h: &Acting) -> Acting {
        Acting {
            x: &g.x + &(&g.y * &h.x),
            y: &g.y * &h.y,
            alpha: g.alpha.iter().zip(&h.alpha).map(|(a, b)| a + b).collect(),
        }
    }

    /// Translation by α_w(y) on R^{n_w}, the lattice action on each tree.
    pub fn act(&self, g: &Acting, p: &ModelPoint) -> Result<ModelPoint> {
        self.check_shape(p)?;
        let euclid = p.euclid.iter().zip(&g.alpha).map(|(r, a)| r + *a as f64).collect();
        let trees = self
            .trees
            .iter()
            .zip(&p.trees)
            .map(|(t, q)| tree_point_act(t, &g.x, &g.y, q))
            .collect::<Result<Vec<_>>>()?;
        Ok(ModelPoint { euclid, trees })
    }

    /// Ψ^R(g_j, t_j, …, t_1, g_0, x) with `gs` = [g_j, …, g_0] and `ts` = [t_j, …, t_1].
    pub fn sha_eval(&self, gs: &[Acting], ts: &[f64], x: &ModelPoint, r: f64, base: &ModelPoint) -> Result<ModelPoint> {
        if gs.is_empty() || ts.len() + 1 != gs.len() {
            return Err(Error::ShapeMismatch);
        }
        let n = gs.len();
        let mut cur = self.act(&gs[n - 1], x)?;
        for i in (0..n - 1).rev() {
            let h = self.retraction(&cur, ts[i], r, base)?;
            cur = self.act(&gs[i], &h)?;
        }
        self.retraction(&cur, 0.0, r, base)
    }

    /// A random point: Euclidean part uniform in [−radius, radius], tree parts reached by
    /// a random walk of at most `radius` steps from the identity class plus an edge offset.
    pub fn sample_point<R: Rng>(&self, rng: &mut R, radius: u32) -> ModelPoint {
        let r = radius as f64;
        let euclid = (0..self.nw()).map(|_| rng.gen_range(-r..=r)).collect();
        let trees = self
            .trees
            .iter()
            .map(|t| {
                let mut v = t.identity();
                for _ in 0..rng.gen_range(0..=radius) {
                    let nb = t.neighbors(&v);
                    v = nb[rng.gen_range(0..nb.len())].clone();
                }
                let nb = t.neighbors(&v);
                let to = nb[rng.gen_range(0..nb.len())].clone();
                TreePoint::canonical(v, to, rng.gen_range(0.0..1.0))
            })
            .collect();
        ModelPoint { euclid, trees }
    }

    /// ln |τ(x)| for embedding index τ.
    fn log_abs(x: &FieldElement, tau: usize) -> f64 {
        x.embed(tau).norm().ln()
    }

    /// f^{[τ]}(r, (p_𝔭)) = ∏ |τ(e_i)|^{−r_i} · ∏ |τ(y_𝔭)|^{f_𝔭(p_𝔭)/v_𝔭(y_𝔭)}.
    pub fn warp_factor(&self, tau: usize, p: &ModelPoint) -> Result<f64> {
        self.check_shape(p)?;
        let mut log = 0.0;
        for (e, r) in self.units.iter().zip(&p.euclid) {
            log -= r * Self::log_abs(e, tau);
        }
        for ((tree, q), (k, y)) in self.trees.iter().zip(&p.trees).zip(&self.mw_gens) {
            log += tree_point_busemann(tree, q)? / *k as f64 * Self::log_abs(y, tau);
        }
        Ok(log.exp())
    }

    /// ∏ |τ(e_i)|^{α_w(y)_i} · ∏ |τ(y_𝔭)|^{v_𝔭(y)/v_𝔭(y_𝔭)}, which should equal |τ(y)|.
    pub fn unit_warp_product(&self, y: &FieldElement, tau: usize) -> Result<f64> {
        let alpha = self.ow.alpha(y)?;
        let mut log = 0.0;
        for (e, a) in self.units.iter().zip(&alpha) {
            log += *a as f64 * Self::log_abs(e, tau);
        }
        for (p, (k, yp)) in self.ow.mw().iter().zip(&self.mw_gens) {
            let v = self.ow.valuation(y, p).fin() as f64;
            log += v / *k as f64 * Self::log_abs(yp, tau);
        }
        Ok(log.exp())
    }
}

/// A point of Q(w)_R ⊂ ∏_τ C.
#[derive(Clone, Debug, PartialEq)]
pub struct MinkowskiVector {
    pub coords: Vec<Complex64>,
}

impl MinkowskiVector {
    pub fn add(&self, o: &Self) -> Self {
        MinkowskiVector { coords: self.coords.iter().zip(&o.coords).map(|(a, b)| a + b).collect() }
    }

    pub fn mul(&self, o: &Self) -> Self {
        MinkowskiVector { coords: self.coords.iter().zip(&o.coords).map(|(a, b)| a * b).collect() }
    }

    pub fn scale(&self, s: f64) -> Self {
        MinkowskiVector { coords: self.coords.iter().map(|a| a * s).collect() }
    }

    /// z_{τ̄} = conj(z_τ) within `tol`.
    pub fn is_conjugation_symmetric(&self, field: &Field, tol: f64) -> bool {
        field
            .embeddings()
            .iter()
            .enumerate()
            .all(|(i, e)| (self.coords[e.conjugate_index] - self.coords[i].conj()).norm() <= tol)
    }

    /// Hermitian norm of the coordinates in the class [τ] of embedding `tau`.
    pub fn class_norm(&self, field: &Field, tau: usize) -> f64 {
        let conj = field.embeddings()[tau].conjugate_index;
        if conj == tau {
            self.coords[tau].norm()
        } else {
            (self.coords[tau].norm_sqr() + self.coords[conj].norm_sqr()).sqrt()
        }
    }

    /// (x, y)·z = τ(y)z + τ(x).
    pub fn act(&self, g: &Acting) -> Self {
        let (x, y) = (minkowski_embed(&g.x), minkowski_embed(&g.y));
        y.mul(self).add(&x)
    }
}

/// j(x) = (τ(x))_τ.
pub fn minkowski_embed(x: &FieldElement) -> MinkowskiVector {
    MinkowskiVector { coords: (0..x.field().degree()).map(|i| x.embed(i)).collect() }
}

/// Embeddings of a Z-basis of the ideal generated by `gens` ⊂ O.
pub fn ideal_lattice_basis(ring: &Ring, gens: &[FieldElement]) -> Result<Vec<MinkowskiVector>> {
    let n = ring.degree();
    let basis = ring.integral_basis();
    if basis.len() != n {
        return Err(Error::UnsupportedDegree(format!("no integral basis known in degree {n}")));
    }
    let nonzero: Vec<&FieldElement> = gens.iter().filter(|g| !g.is_zero()).collect();
    if nonzero.is_empty() {
        return Err(Error::HypothesisViolated("the zero ideal has no lattice basis".into()));
    }
    if nonzero.iter().any(|g| !ring.is_integral(g)) {
        return Err(Error::HypothesisViolated("ideal generators must be integral".into()));
    }
    // the ideal contains D = |N(g)| for any generator g
    let d = num_traits::Signed::abs(&nonzero[0].norm());
    let d = d.to_integer().to_i128().filter(|d| *d > 0 && *d < (1i128 << 40)).ok_or_else(|| {
        Error::UnsupportedField("ideal norm out of range".into())
    })?;
    let mut rows = Vec::new();
    for g in &nonzero {
        for b in basis {
            let coords = ring.basis_coords(&(*g * b));
            let row = coords
                .iter()
                .map(|q| {
                    debug_assert!(q.denom().is_one());
                    q.to_integer().mod_floor(&d.into()).to_i128().expect("reduced below d")
                })
                .collect();
            rows.push(row);
        }
    }
    let hnf = hnf_mod(&rows, n, d);
    Ok(hnf
        .iter()
        .map(|row| {
            let coords: Vec<num_bigint::BigInt> = row.iter().map(|&c| c.into()).collect();
            minkowski_embed(&ring.from_basis_coords(&coords))
        })
        .collect())
}

/// A polygonal path in X_w × Q(w)_R; node i sits at time i/(n−1).
#[derive(Clone, Debug)]
pub struct WarpedPath {
    pub nodes: Vec<(ModelPoint, MinkowskiVector)>,
}

/// Length of a path for one partition.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WarpedLength {
    /// Minimum of the increment sum over coarsenings that keep every node time.
    pub length: f64,
    /// The increment sum over the partition as given.
    pub partition_sum: f64,
    /// Largest gap of the partition.
    pub granularity: f64,
}

impl WarpedPath {
    pub fn act(&self, space: &ModelSpace, g: &Acting) -> Result<Self> {
        let nodes = self
            .nodes
            .iter()
            .map(|(p, z)| Ok((space.act(g, p)?, z.act(g))))
            .collect::<Result<Vec<_>>>()?;
        Ok(WarpedPath { nodes })
    }

    fn segments(&self) -> usize {
        self.nodes.len().saturating_sub(1)
    }

    /// The path at time t ∈ [0,1].
    pub fn eval(&self, space: &ModelSpace, t: f64) -> Result<(ModelPoint, MinkowskiVector)> {
        let m = self.segments();
        if m == 0 {
            return self.nodes.first().cloned().ok_or(Error::ShapeMismatch);
        }
        let pos = t.clamp(0.0, 1.0) * m as f64;
        let i = (pos.floor() as usize).min(m - 1);
        let s = pos - i as f64;
        let (a, za) = &self.nodes[i];
        let (b, zb) = &self.nodes[i + 1];
        let p = space.geodesic_eval(a, b, s * space.distance(a, b)?)?;
        let z = za.scale(1.0 - s).add(&zb.scale(s));
        Ok((p, z))
    }
}

/// Increment sums of a polygonal path in the warped product X_w ×_{f^{[τ]}} Q(w)_{R,[τ]}.
pub fn warped_path_length(space: &ModelSpace, path: &WarpedPath, partition: &[f64], tau: usize) -> Result<WarpedLength> {
    if partition.len() < 2
        || partition[0] != 0.0
        || *partition.last().unwrap() != 1.0
        || partition.windows(2).any(|w| w[0] >= w[1])
    {
        return Err(Error::HypothesisViolated("partition must increase from 0 to 1".into()));
    }
    let field = space.field();
    let pts = partition.iter().map(|&t| path.eval(space, t)).collect::<Result<Vec<_>>>()?;
    let warps = pts.iter().map(|(p, _)| space.warp_factor(tau, p)).collect::<Result<Vec<_>>>()?;
    let inc = |i: usize, j: usize| -> Result<f64> {
        let dx = space.distance(&pts[i].0, &pts[j].0)?;
        let dz = pts[j].1.add(&pts[i].1.scale(-1.0)).class_norm(field, tau);
        Ok((dx * dx + warps[i] * warps[i] * dz * dz).sqrt())
    };
    let m = path.segments().max(1) as f64;
    let is_node = |t: f64| ((t * m).round() - t * m).abs() < 1e-12;
    let mut partition_sum = 0.0;
    for i in 0..pts.len() - 1 {
        partition_sum += inc(i, i + 1)?;
    }
    // best[j]: minimal sum up to point j; a coarsening may not skip a node time
    let mut best = vec![f64::INFINITY; pts.len()];
    best[0] = 0.0;
    let mut last_node = 0;
    for j in 1..pts.len() {
        for i in last_node..j {
            let cand = best[i] + inc(i, j)?;
            if cand < best[j] {
                best[j] = cand;
            }
        }
        if is_node(partition[j]) {
            last_node = j;
        }
    }
    let granularity = partition.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
    Ok(WarpedLength { length: best[pts.len() - 1], partition_sum, granularity })
}

/// The shape of a generalized geodesic before its time shift.
#[derive(Clone, Debug, PartialEq)]
pub enum GeodesicShape {
    /// Constant a on (−∞, 0], the unit-speed segment to b, then constant b.
    Segment { a: ModelPoint, b: ModelPoint },
    /// A full Euclidean line through `point` with unit `direction`; tree parts fixed.
    Line { point: ModelPoint, direction: Vec<f64> },
}

/// c(t) = shape(t − start).
#[derive(Clone, Debug, PartialEq)]
pub struct GeneralizedGeodesic {
    pub shape: GeodesicShape,
    pub start: BigRational,
}

impl GeneralizedGeodesic {
    pub fn segment(a: ModelPoint, b: ModelPoint, start: BigRational) -> Self {
        GeneralizedGeodesic { shape: GeodesicShape::Segment { a, b }, start }
    }

    pub fn constant(p: ModelPoint) -> Self {
        Self::segment(p.clone(), p, BigRational::zero())
    }

    pub fn line(space: &ModelSpace, point: ModelPoint, direction: Vec<f64>, start: BigRational) -> Result<Self> {
        space.check_shape(&point)?;
        let norm = direction.iter().map(|x| x * x).sum::<f64>().sqrt();
        if direction.len() != space.nw() || norm == 0.0 {
            return Err(Error::ShapeMismatch);
        }
        let direction = direction.iter().map(|x| x / norm).collect();
        Ok(GeneralizedGeodesic { shape: GeodesicShape::Line { point, direction }, start })
    }

    fn start_f64(&self) -> f64 {
        self.start.to_f64().unwrap_or(0.0)
    }

    /// (c₋, c₊).
    pub fn bounds(&self, space: &ModelSpace) -> Result<(f64, f64)> {
        let s = self.start_f64();
        match &self.shape {
            GeodesicShape::Segment { a, b } => Ok((s, s + space.distance(a, b)?)),
            GeodesicShape::Line { .. } => Ok((f64::NEG_INFINITY, f64::INFINITY)),
        }
    }

    pub fn eval(&self, space: &ModelSpace, t: f64) -> Result<ModelPoint> {
        let u = t - self.start_f64();
        match &self.shape {
            GeodesicShape::Segment { a, b } => space.geodesic_eval(a, b, u),
            GeodesicShape::Line { point, direction } => Ok(ModelPoint {
                euclid: point.euclid.iter().zip(direction).map(|(x, d)| x + u * d).collect(),
                trees: point.trees.clone(),
            }),
        }
    }
}

/// Φ_τ(c)(t) = c(t + τ).
pub fn fs_flow(c: &GeneralizedGeodesic, tau: &BigRational) -> GeneralizedGeodesic {
    GeneralizedGeodesic { shape: c.shape.clone(), start: &c.start - tau }
}

/// Step and tail tolerance for the flow-space integral.
#[derive(Clone, Copy, Debug)]
pub struct Quadrature {
    pub step: f64,
    pub tail: f64,
}

impl Default for Quadrature {
    fn default() -> Self {
        Quadrature { step: 1e-2, tail: 1e-9 }
    }
}

/// ∫ d(c(t), d(t)) / (2e^{|t|}) dt by composite Simpson on [−T, T], split at the kinks.
/// T is chosen so that the tail bound (d₀ + 2T + 2)e^{−T} is below `q.tail`.
pub fn fs_distance(space: &ModelSpace, c: &GeneralizedGeodesic, d: &GeneralizedGeodesic, q: Quadrature) -> Result<f64> {
    let ((clo, chi), (dlo, dhi)) = (c.bounds(space)?, d.bounds(space)?);
    let (lo, hi) = (clo.min(dlo), chi.max(dhi));
    let dist_at = |t: f64| -> Result<f64> { space.distance(&c.eval(space, t)?, &d.eval(space, t)?) };
    let f = |t: f64| -> Result<f64> { Ok(dist_at(t)? * 0.5 * (-t.abs()).exp()) };
    let (mut total, from, to) = if lo.is_finite() && hi.is_finite() {
        // both curves are constant outside [lo, hi]: the tails integrate exactly
        let left = if lo <= 0.0 { 0.5 * lo.exp() } else { 1.0 - 0.5 * (-lo).exp() };
        let right = if hi >= 0.0 { 0.5 * (-hi).exp() } else { 1.0 - 0.5 * hi.exp() };
        (dist_at(lo)? * left + dist_at(hi)? * right, lo, hi)
    } else {
        let d0 = dist_at(0.0)?;
        let mut cut = 1.0f64;
        while (d0 + 2.0 * cut + 2.0) * (-cut).exp() > q.tail {
            cut += 0.5;
        }
        (0.0, -cut, cut)
    };
    let mut breaks = vec![from, to];
    breaks.extend([0.0, clo, chi, dlo, dhi].into_iter().filter(|x| x.is_finite() && *x > from && *x < to));
    breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
    breaks.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
    for w in breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        let mut n = ((b - a) / q.step).ceil() as usize;
        n += n % 2;
        let n = n.max(2);
        let h = (b - a) / n as f64;
        let mut s = f(a)? + f(b)?;
        for k in 1..n {
            s += if k % 2 == 1 { 4.0 } else { 2.0 } * f(a + k as f64 * h)?;
        }
        total += s * h / 3.0;
    }
    Ok(total)
}
