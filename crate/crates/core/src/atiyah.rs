//! Connection extensions, pair curvature and Atiyah classes of Lie pairs.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::algebroid::{
    check_algebroid, curvature, derham_differential, mask_sign, masks_of_degree, Connection, Form,
    LieAlgebroidSpec,
};
use crate::curved::{atiyah_class, AtiyahClass, CurvedDga, CurvedError, CurvedPair, TraceData};
use crate::dg::{cohomology, CochainComplex};
use crate::exact::{q, zero_vec, Matrix, Subspace, Q};
use crate::liepair::{graded_piece, kron, GradedPiece, LiePair, PairError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AtiyahError {
    #[error(transparent)]
    Pair(#[from] PairError),
    #[error(transparent)]
    Curved(#[from] CurvedError),
    #[error("extension has {found} matrices, expected {expected}")]
    Shape { expected: usize, found: usize },
}

/// A Lie pair with a flat module of the subalgebra.
#[derive(Debug, Clone)]
pub struct AtiyahProblem {
    pub pair: LiePair,
    pub module: Connection,
}

impl AtiyahProblem {
    pub fn new(pair: LiePair, module: Connection) -> Result<Self, AtiyahError> {
        pair.check_module(&module)?;
        Ok(AtiyahProblem { pair, module })
    }

    pub fn dim_e(&self) -> usize {
        self.module.dim
    }
}

/// Matrices on the complement basis; the subalgebra part is the given module.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConnectionExtension {
    pub complement: Vec<Matrix>,
}

impl ConnectionExtension {
    pub fn full(&self, prob: &AtiyahProblem) -> Connection {
        prob.pair.extend(&prob.module, &self.complement)
    }
}

/// Extends the module to an ambient connection, zero on the complement by default.
pub fn extend_connection(prob: &AtiyahProblem, choice: Option<Vec<Matrix>>) -> Result<ConnectionExtension, AtiyahError> {
    let k = prob.pair.quotient_rank();
    let n = prob.dim_e();
    let complement = choice.unwrap_or_else(|| vec![Matrix::zeros(n, n); k]);
    if complement.len() != k || complement.iter().any(|m| m.rows != n || m.cols != n) {
        return Err(AtiyahError::Shape { expected: k, found: complement.len() });
    }
    Ok(ConnectionExtension { complement })
}

/// Curvature of an extension split by the number of complement directions.
#[derive(Debug, Clone)]
pub struct PairCurvature {
    pub total: Form<Matrix>,
    /// `parts[p]` collects components with exactly `p` complement directions.
    pub parts: [Form<Matrix>; 3],
}

impl PairCurvature {
    /// Whether the curvature lies in `G₂²`.
    pub fn in_g2(&self) -> bool {
        self.parts[0].is_zero() && self.parts[1].is_zero()
    }
}

pub fn pair_curvature(prob: &AtiyahProblem, ext: &ConnectionExtension) -> PairCurvature {
    let conn = ext.full(prob);
    let total = curvature(&prob.pair.ambient, &conn);
    let r = prob.pair.rank();
    let mut parts = [Form::zero(r), Form::zero(r), Form::zero(r)];
    for (m, c) in &total.terms {
        parts[prob.pair.m_degree(*m)].add_term(*m, c);
    }
    PairCurvature { total, parts }
}

/// All masks of `Ω*(L)` ordered by degree, then lexicographically.
pub fn global_masks(rank: usize) -> Vec<u32> {
    (0..=rank).flat_map(|k| masks_of_degree(rank, k)).collect()
}

/// The curved pair `(Ω*(L) ⊗ End E, [∇', -], ∇'²)` with ideal `G₁ ⊗ End E` and the trace into `Ω*(L)`.
#[derive(Debug, Clone)]
pub struct PairAlgebra {
    pub spec: LieAlgebroidSpec,
    pub dim_e: usize,
    pub connection: Connection,
    pub masks: Vec<u32>,
    mask_index: BTreeMap<u32, usize>,
    pub curved: CurvedPair,
    pub trace: TraceData,
    complement_mask: u32,
}

impl PairAlgebra {
    /// Basis index of `e_S ⊗ E_{ab}`.
    pub fn index(&self, mask: u32, a: usize, b: usize) -> usize {
        (self.mask_index[&mask] * self.dim_e + a) * self.dim_e + b
    }

    pub fn decode(&self, i: usize) -> (u32, usize, usize) {
        let n = self.dim_e;
        (self.masks[i / (n * n)], (i / n) % n, i % n)
    }

    pub fn form_index(&self, mask: u32) -> usize {
        self.mask_index[&mask]
    }

    pub fn element(&self, f: &Form<Matrix>) -> Vec<Q> {
        let mut v = zero_vec(self.curved.algebra.dim());
        for (m, x) in &f.terms {
            for a in 0..self.dim_e {
                for b in 0..self.dim_e {
                    v[self.index(*m, a, b)] = x.get(a, b).clone();
                }
            }
        }
        v
    }

    pub fn to_form(&self, v: &[Q]) -> Form<Matrix> {
        let n = self.dim_e;
        let mut acc: BTreeMap<u32, Matrix> = BTreeMap::new();
        for (i, c) in v.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let (m, a, b) = self.decode(i);
            acc.entry(m).or_insert_with(|| Matrix::zeros(n, n)).set(a, b, c.clone());
        }
        let mut f = Form::zero(self.spec.rank());
        for (m, x) in acc {
            f.add_term(m, &x);
        }
        f
    }

    /// Scalar form as a vector in the trace target.
    pub fn scalar_vector(&self, f: &Form<Q>) -> Vec<Q> {
        let mut v = zero_vec(self.masks.len());
        for (m, c) in &f.terms {
            v[self.form_index(*m)] = c.clone();
        }
        v
    }

    pub fn scalar_form(&self, v: &[Q]) -> Form<Q> {
        let mut f = Form::zero(self.spec.rank());
        for (i, c) in v.iter().enumerate() {
            f.add_term(self.masks[i], c);
        }
        f
    }

    /// `G_p` of the trace target `Ω*(L)`.
    pub fn target_filtration(&self, p: usize) -> Subspace {
        let n = self.masks.len();
        Subspace::span(
            n,
            (0..n).filter(|&i| (self.masks[i] & self.complement_mask).count_ones() as usize >= p).map(|i| crate::exact::unit_vec(n, i)),
        )
    }

    /// Complement degree of a trace-target basis element.
    pub fn target_m_degree(&self, i: usize) -> usize {
        (self.masks[i] & self.complement_mask).count_ones() as usize
    }

    /// The de Rham complex of `L` on the global mask basis.
    pub fn target_delta(&self) -> &Matrix {
        &self.trace.delta
    }
}

/// Builds the pair algebra of an ambient connection (not necessarily flat).
pub fn pair_algebra(pair: &LiePair, conn: &Connection) -> Result<PairAlgebra, AtiyahError> {
    build_pair_algebra(pair, conn, true)
}

fn build_pair_algebra(pair: &LiePair, conn: &Connection, validate: bool) -> Result<PairAlgebra, AtiyahError> {
    let spec = pair.ambient.clone();
    let r = spec.rank();
    let n = conn.dim;
    let masks = global_masks(r);
    let mask_index: BTreeMap<u32, usize> = masks.iter().enumerate().map(|(i, &m)| (m, i)).collect();
    let nn = n * n;
    let dim = masks.len() * nn;
    let idx = |m: u32, a: usize, b: usize| (mask_index[&m] * n + a) * n + b;

    let mut names = Vec::with_capacity(dim);
    let mut degrees = Vec::with_capacity(dim);
    for &m in &masks {
        for a in 0..n {
            for b in 0..n {
                names.push(format!("{}⊗E{a}{b}", crate::algebroid::mask_label(&spec, m)));
                degrees.push(m.count_ones() as i32);
            }
        }
    }

    let mut table = vec![vec![Vec::new(); dim]; dim];
    for &s in &masks {
        for &t in &masks {
            if s & t != 0 {
                continue;
            }
            let sign = q(mask_sign(s, t) as i64);
            for a in 0..n {
                for b in 0..n {
                    for d in 0..n {
                        table[idx(s, a, b)][idx(t, b, d)] = vec![(idx(s | t, a, d), sign.clone())];
                    }
                }
            }
        }
    }

    let mut dmat = Matrix::zeros(dim, dim);
    for &s in &masks {
        let mut e = Form::<Q>::zero(r);
        e.add_term(s, &Q::one());
        let ds = derham_differential(&spec, &e);
        let k = s.count_ones();
        let ks = if k % 2 == 0 { Q::one() } else { -Q::one() };
        for a in 0..n {
            for b in 0..n {
                let col = idx(s, a, b);
                for (m, c) in &ds.terms {
                    dmat.add_at(idx(*m, a, b), col, c);
                }
                for i in 0..r {
                    if s & (1 << i) != 0 {
                        continue;
                    }
                    let t = s | (1 << i);
                    let sg = &ks * q(mask_sign(s, 1 << i) as i64);
                    let mi = &conn.mats[i];
                    // [M, E_ab] = Σ_c M_ca E_cb - Σ_d M_bd E_ad
                    for c in 0..n {
                        let x = mi.get(c, a);
                        if !x.is_zero() {
                            dmat.add_at(idx(t, c, b), col, &(&sg * x));
                        }
                    }
                    for d in 0..n {
                        let x = mi.get(b, d);
                        if !x.is_zero() {
                            dmat.add_at(idx(t, a, d), col, &(-(&sg * x)));
                        }
                    }
                }
            }
        }
    }

    let curv = curvature(&spec, conn);
    let mut rvec = zero_vec(dim);
    for (m, x) in &curv.terms {
        for a in 0..n {
            for b in 0..n {
                rvec[idx(*m, a, b)] = x.get(a, b).clone();
            }
        }
    }

    let cm = pair.complement_mask();
    let ideal = Subspace::span(
        dim,
        (0..dim).filter(|&i| masks[i / nn] & cm != 0).map(|i| crate::exact::unit_vec(dim, i)),
    );
    let algebra = CurvedDga { names, degrees, table, d: dmat, r: rvec };
    let curved = if validate {
        CurvedPair::new(algebra, ideal).map_err(|v| AtiyahError::Curved(CurvedError::Violation(v)))?
    } else {
        CurvedPair { algebra, ideal }
    };

    let nm = masks.len();
    let mut delta = Matrix::zeros(nm, nm);
    for (j, &s) in masks.iter().enumerate() {
        let mut e = Form::<Q>::zero(r);
        e.add_term(s, &Q::one());
        for (m, c) in &derham_differential(&spec, &e).terms {
            delta.set(mask_index[m], j, c.clone());
        }
    }
    let mut tr = Matrix::zeros(nm, dim);
    for (i, &s) in masks.iter().enumerate() {
        for a in 0..n {
            tr.set(i, idx(s, a, a), Q::one());
        }
    }
    let target_degrees = masks.iter().map(|m| m.count_ones() as i32).collect();
    let trace = TraceData { target_degrees, delta, tr };
    Ok(PairAlgebra { spec, dim_e: n, connection: conn.clone(), masks, mask_index, curved, trace, complement_mask: cm })
}

/// `End E` as a module of the subalgebra, `∇_a f = [∇_a, f]`, basis `E_{ab} ↦ a·n + b`.
pub fn end_module(e: &Connection) -> Connection {
    let id = Matrix::identity(e.dim);
    Connection::new(e.dim * e.dim, e.mats.iter().map(|m| kron(m, &id).sub(&kron(&id, &m.transpose()))).collect())
}

/// The Atiyah class of a pair with its Bott-complex representative.
#[derive(Debug, Clone)]
pub struct AtiyahClassValue {
    /// `R mod I^(2)` as a class in `H²(I/I^(2))`.
    pub curved: AtiyahClass,
    /// Representative in `C¹(A; (L/A)^∨ ⊗ End E)`.
    pub cocycle: Vec<Q>,
    /// Coordinates in the deterministic basis of `H¹(A; (L/A)^∨ ⊗ End E)`.
    pub class: Vec<Q>,
    pub vanishes: bool,
    /// An extension whose curvature lies in `G₂²`, when the class vanishes.
    pub witness: Option<ConnectionExtension>,
    pub piece: GradedPiece,
}

/// The Atiyah class of the default extension, in both models.
pub fn atiyah_class_pair(prob: &AtiyahProblem) -> Result<AtiyahClassValue, AtiyahError> {
    atiyah_class_with(prob, &extend_connection(prob, None)?)
}

pub fn atiyah_class_with(prob: &AtiyahProblem, ext: &ConnectionExtension) -> Result<AtiyahClassValue, AtiyahError> {
    let pa = build_pair_algebra(&prob.pair, &ext.full(prob), false)?;
    let curved = atiyah_class(&pa.curved)?;
    let end = end_module(&prob.module);
    let piece = graded_piece(&prob.pair, &end, 1)?;
    let cocycle = bott_representative(prob, &pa, &piece, &pa.curved.algebra.r);
    let h = cohomology(&piece.bott).map_err(|e| AtiyahError::Curved(CurvedError::Complex(e)))?;
    let g = h.group(1);
    let class = g.class_of(&cocycle);
    let vanishes = class.iter().all(Zero::is_zero);
    let witness = match &curved.witness {
        Some(x) if vanishes => {
            let form = pa.to_form(x);
            let complement = prob
                .pair
                .complement
                .iter()
                .zip(&ext.complement)
                .map(|(&j, m)| match form.coeff(1 << j) {
                    Some(c) => m.add(c),
                    None => m.clone(),
                })
                .collect();
            Some(ConnectionExtension { complement })
        }
        _ => None,
    };
    Ok(AtiyahClassValue { curved, cocycle, class, vanishes, witness, piece })
}

/// Image of the degree-2, one-complement-direction part of `v` in the Bott complex.
fn bott_representative(prob: &AtiyahProblem, pa: &PairAlgebra, piece: &GradedPiece, v: &[Q]) -> Vec<Q> {
    let n = prob.dim_e();
    let rows: Vec<(u32, usize)> = masks_of_degree(prob.pair.rank(), 2)
        .into_iter()
        .filter(|&m| prob.pair.m_degree(m) == 1)
        .flat_map(|m| (0..n * n).map(move |ab| (m, ab)))
        .collect();
    let src: Vec<Q> = rows.iter().map(|&(m, ab)| v[pa.index(m, ab / n, ab % n)].clone()).collect();
    piece.phi[&1].mul_vec(&src)
}

/// Recomputes the class with a random extension and compares class coordinates.
pub fn extension_independent(prob: &AtiyahProblem, seed: u64) -> Result<bool, AtiyahError> {
    let base = atiyah_class_pair(prob)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = prob.dim_e();
    let choice = (0..prob.pair.quotient_rank())
        .map(|_| {
            Matrix::from_rows((0..n).map(|_| (0..n).map(|_| q(rng.gen_range(-3..=3))).collect()).collect())
        })
        .collect();
    let other = atiyah_class_with(prob, &extend_connection(prob, Some(choice))?)?;
    Ok(other.class == base.class && other.curved.class == base.curved.class)
}

/// Result of the projection criterion.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "result", rename_all = "kebab-case")]
pub enum ProjectionOutcome {
    VerifiedZero,
    HypothesisFailure { identity: String, x: String, y: String },
}

/// Checks the projection hypotheses and, when they hold, certifies that `∇ ∘ p` has curvature in `G₂²`.
/// `p` has one column per ambient basis element, expressed in the ambient basis.
pub fn vanishing_by_projection(
    prob: &AtiyahProblem,
    p: &Matrix,
) -> Result<(ProjectionOutcome, Option<ConnectionExtension>), AtiyahError> {
    let pair = &prob.pair;
    let spec = &pair.ambient;
    let r = spec.rank();
    let name = |i: usize| spec.names[i].clone();
    for &a in &pair.sub {
        let col = p.column(a);
        if col != crate::exact::unit_vec(r, a) {
            return Ok((ProjectionOutcome::HypothesisFailure { identity: "identity-on-sub".into(), x: name(a), y: name(a) }, None));
        }
    }
    for j in 0..r {
        if pair.complement.iter().any(|&m| !p.get(m, j).is_zero()) {
            return Ok((ProjectionOutcome::HypothesisFailure { identity: "image-in-sub".into(), x: name(j), y: name(j) }, None));
        }
    }
    for &x in &pair.sub {
        for y in 0..r {
            let ex = crate::exact::unit_vec(r, x);
            let lhs = p.mul_vec(&spec.bracket(&ex, &crate::exact::unit_vec(r, y)));
            let rhs = spec.bracket(&ex, &p.column(y));
            if lhs != rhs {
                return Ok((ProjectionOutcome::HypothesisFailure { identity: "equivariance".into(), x: name(x), y: name(y) }, None));
            }
        }
    }
    let complement = pair
        .complement
        .iter()
        .map(|&m| {
            let mut acc = Matrix::zeros(prob.dim_e(), prob.dim_e());
            for (a, &i) in pair.sub.iter().enumerate() {
                let c = p.get(i, m);
                if !c.is_zero() {
                    acc = acc.add(&prob.module.mats[a].scale(c));
                }
            }
            acc
        })
        .collect();
    let ext = ConnectionExtension { complement };
    if pair_curvature(prob, &ext).in_g2() {
        Ok((ProjectionOutcome::VerifiedZero, Some(ext)))
    } else {
        Ok((ProjectionOutcome::HypothesisFailure { identity: "curvature-in-G2".into(), x: String::new(), y: String::new() }, None))
    }
}

/// The reduced class on the point tier: on a one-open cover `d_Tot ∇` vanishes, so the class is zero.
#[derive(Debug, Clone)]
pub struct ReducedClass {
    pub representative: Vec<Q>,
    pub vanishes: bool,
    /// Whether the pair class vanishes; the reduced class must vanish whenever it does.
    pub pair_vanishes: bool,
}

pub fn reduced_atiyah(prob: &AtiyahProblem) -> Result<ReducedClass, AtiyahError> {
    let pair_class = atiyah_class_pair(prob)?;
    let k = prob.pair.quotient_rank() * prob.dim_e() * prob.dim_e();
    Ok(ReducedClass { representative: zero_vec(k), vanishes: true, pair_vanishes: pair_class.vanishes })
}

/// Bounds of the nonvanishing search.
#[derive(Debug, Clone)]
pub struct SearchBounds {
    pub max_dim: usize,
    pub max_entries: usize,
    pub values: Vec<i64>,
    pub module_dims: Vec<usize>,
}

impl Default for SearchBounds {
    fn default() -> Self {
        SearchBounds { max_dim: 4, max_entries: 2, values: vec![-2, -1, 1, 2], module_dims: vec![1, 2] }
    }
}

/// A pair and module found by the search.
#[derive(Debug, Clone)]
pub struct Fixture {
    pub problem: AtiyahProblem,
    pub entries: Vec<(usize, usize, usize, i64)>,
    pub sub: Vec<usize>,
}

fn module_candidates(dim: usize) -> Vec<Matrix> {
    match dim {
        1 => [-1, 0, 1, 2].iter().map(|&v| Matrix::from_i64(&[&[v]])).collect(),
        _ => vec![
            Matrix::zeros(2, 2),
            Matrix::identity(2),
            Matrix::from_i64(&[&[0, 1], &[0, 0]]),
            Matrix::from_i64(&[&[1, 0], &[0, 0]]),
            Matrix::from_i64(&[&[1, 0], &[0, -1]]),
        ],
    }
}

fn cartesian(len: usize, choices: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..len {
        out = out.into_iter().flat_map(|v| (0..choices).map(move |c| [v.clone(), vec![c]].concat())).collect();
    }
    out
}

/// Enumerates small Lie pairs with modules in a fixed order and returns the first instance
/// passing `accept` whose Atiyah class does not vanish.
pub fn search_nonvanishing(bounds: &SearchBounds, accept: impl Fn(&AtiyahProblem) -> bool) -> Option<Fixture> {
    for dim in 2..=bounds.max_dim {
        let slots: Vec<(usize, usize, usize)> =
            (0..dim).flat_map(|i| (i + 1..dim).flat_map(move |j| (0..dim).map(move |k| (i, j, k)))).collect();
        for count in 1..=bounds.max_entries {
            for positions in combinations(slots.len(), count) {
                for vals in cartesian(count, bounds.values.len()) {
                    let entries: Vec<(usize, usize, usize, i64)> = positions
                        .iter()
                        .zip(&vals)
                        .map(|(&p, &v)| (slots[p].0, slots[p].1, slots[p].2, bounds.values[v]))
                        .collect();
                    let spec = spec_from_entries(dim, &entries);
                    if check_algebroid(&spec).is_err() {
                        continue;
                    }
                    for sub_dim in (1..dim).rev() {
                        let sub: Vec<usize> = (0..sub_dim).collect();
                        let Ok(pair) = LiePair::new(spec.clone(), &sub) else { continue };
                        for &edim in &bounds.module_dims {
                            let cands = module_candidates(edim);
                            for choice in cartesian(sub_dim, cands.len()) {
                                let module = Connection::new(edim, choice.iter().map(|&c| cands[c].clone()).collect());
                                let Ok(prob) = AtiyahProblem::new(pair.clone(), module) else { continue };
                                if !accept(&prob) {
                                    continue;
                                }
                                let Ok(value) = atiyah_class_pair(&prob) else { continue };
                                if !value.vanishes {
                                    return Some(Fixture { problem: prob, entries, sub });
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    None
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for first in 0..n {
        for rest in combinations(n - first - 1, k - 1) {
            let mut v = vec![first];
            v.extend(rest.into_iter().map(|x| x + first + 1));
            out.push(v);
        }
    }
    out
}

/// Point algebra with basis `l0, l1, ...` and entries `[l_i, l_j] ∋ c·l_k`.
pub fn spec_from_entries(dim: usize, entries: &[(usize, usize, usize, i64)]) -> LieAlgebroidSpec {
    let names: Vec<String> = (0..dim).map(|i| format!("l{i}")).collect();
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    let mut grouped: BTreeMap<(usize, usize), Vec<(usize, Q)>> = BTreeMap::new();
    for &(i, j, k, c) in entries {
        grouped.entry((i, j)).or_default().push((k, q(c)));
    }
    let list: Vec<(usize, usize, Vec<(usize, Q)>)> = grouped.into_iter().map(|((i, j), v)| (i, j, v)).collect();
    LieAlgebroidSpec::point(&refs, &list)
}

/// Standard complex of the subalgebra with coefficients in `End E`.
pub fn deformation_complex(prob: &AtiyahProblem) -> Result<CochainComplex, AtiyahError> {
    let sub = prob.pair.sub_spec();
    crate::algebroid::standard_complex(&sub, &end_module(&prob.module)).map_err(|_| AtiyahError::Pair(PairError::NotFlat))
}
