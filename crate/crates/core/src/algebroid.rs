//! Lie algebroids over a point or a coordinate chart, their de Rham algebras, connections and curvature.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Debug;

use num_traits::{One, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::dg::{CochainComplex, DgError, GradedVectorSpace};
use crate::exact::{q, Laurent, Matrix, Q};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Tier {
    Point,
    Chart,
}

/// The first failing axiom of a Lie algebroid presentation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Error)]
#[serde(tag = "identity", rename_all = "kebab-case")]
pub enum Violation {
    #[error("antisymmetry fails at ({i}, {j})")]
    Antisymmetry { i: String, j: String },
    #[error("anchor does not preserve the bracket at ({i}, {j})")]
    Anchor { i: String, j: String },
    #[error("Jacobi identity fails at ({i}, {j}, {k})")]
    Jacobi { i: String, j: String, k: String },
    #[error("Leibniz rule fails at ({i}, {j}, t*{k})")]
    Leibniz { i: String, j: String, k: String },
    #[error("nonconstant data on the point tier at {at}")]
    PointTier { at: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlgebroidError {
    #[error("connection is not flat")]
    NotFlat,
    #[error("connection has {found} matrices for an algebroid of rank {rank}")]
    Shape { rank: usize, found: usize },
    #[error(transparent)]
    Complex(#[from] DgError),
}

/// A finite presentation of a Lie algebroid: a frame `l_1..l_r`, brackets `[l_i, l_j] = Σ c^k_{ij} l_k`
/// and anchors `a(l_i) = α_i ∂_t`. Point-tier data is constant with zero anchor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LieAlgebroidSpec {
    pub tier: Tier,
    pub names: Vec<String>,
    brackets: Vec<Vec<Vec<Laurent>>>,
    anchor: Vec<Laurent>,
}

impl LieAlgebroidSpec {
    /// Point tier from a full table `c[i][j][k]`, taken as written.
    pub fn point_table(names: &[&str], table: Vec<Vec<Vec<Q>>>) -> Self {
        let r = names.len();
        let brackets = table
            .into_iter()
            .map(|row| row.into_iter().map(|v| v.into_iter().map(Laurent::constant).collect()).collect())
            .collect();
        LieAlgebroidSpec {
            tier: Tier::Point,
            names: names.iter().map(|s| s.to_string()).collect(),
            brackets,
            anchor: vec![Laurent::zero(); r],
        }
    }

    /// Point tier from bracket entries `[l_i, l_j] = Σ c l_k`. An entry whose reverse
    /// pair is not listed also fixes `[l_j, l_i] = -[l_i, l_j]`.
    pub fn point(names: &[&str], entries: &[(usize, usize, Vec<(usize, Q)>)]) -> Self {
        let laurent: Vec<_> = entries
            .iter()
            .map(|(i, j, v)| (*i, *j, v.iter().map(|(k, c)| (*k, Laurent::constant(c.clone()))).collect()))
            .collect();
        let mut s = Self::chart(names, &laurent, vec![Laurent::zero(); names.len()]);
        s.tier = Tier::Point;
        s
    }

    /// Chart tier over `K[t]`-type coefficients.
    pub fn chart(names: &[&str], entries: &[(usize, usize, Vec<(usize, Laurent)>)], anchor: Vec<Laurent>) -> Self {
        let r = names.len();
        assert_eq!(anchor.len(), r, "one anchor coefficient per basis element");
        let mut brackets = vec![vec![vec![Laurent::zero(); r]; r]; r];
        let mut explicit = vec![vec![false; r]; r];
        for (i, j, v) in entries {
            let mut c = vec![Laurent::zero(); r];
            for (k, x) in v {
                c[*k] = c[*k].add(x);
            }
            brackets[*i][*j] = c;
            explicit[*i][*j] = true;
        }
        for i in 0..r {
            for j in 0..r {
                if explicit[i][j] && !explicit[j][i] {
                    brackets[j][i] = brackets[i][j].iter().map(|x| x.scale(&-Q::one())).collect();
                }
            }
        }
        LieAlgebroidSpec { tier: Tier::Chart, names: names.iter().map(|s| s.to_string()).collect(), brackets, anchor }
    }

    pub fn rank(&self) -> usize {
        self.names.len()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn c(&self, i: usize, j: usize, k: usize) -> &Laurent {
        &self.brackets[i][j][k]
    }

    /// Constant structure constant; panics on nonconstant chart data.
    pub fn cq(&self, i: usize, j: usize, k: usize) -> Q {
        let l = &self.brackets[i][j][k];
        assert!(l.0.keys().all(|&e| e == 0), "nonconstant structure constant");
        l.coeff(0)
    }

    pub fn anchor(&self, i: usize) -> &Laurent {
        &self.anchor[i]
    }

    pub fn is_constant(&self) -> bool {
        let flat = self.brackets.iter().flatten().flatten();
        flat.chain(self.anchor.iter()).all(|l| l.0.keys().all(|&e| e == 0)) && self.anchor.iter().all(|a| a.is_zero())
    }

    /// Bracket of constant combinations on the point tier.
    pub fn bracket(&self, x: &[Q], y: &[Q]) -> Vec<Q> {
        let r = self.rank();
        let mut out = vec![Q::zero(); r];
        for i in 0..r {
            if Zero::is_zero(&x[i]) {
                continue;
            }
            for j in 0..r {
                if Zero::is_zero(&y[j]) {
                    continue;
                }
                let xy = &x[i] * &y[j];
                for (k, o) in out.iter_mut().enumerate() {
                    let c = self.brackets[i][j][k].coeff(0);
                    if !Zero::is_zero(&c) {
                        *o += &xy * c;
                    }
                }
            }
        }
        out
    }

    /// `a(l)(f)` for a section `l = Σ f_i l_i`.
    pub fn anchor_apply(&self, l: &[Laurent], f: &Laurent) -> Laurent {
        let df = f.derivative();
        let mut out = Laurent::zero();
        for (li, a) in l.iter().zip(&self.anchor) {
            out = out.add(&li.mul(a).mul(&df));
        }
        out
    }

    /// Bracket of sections: `[f l_i, g l_j] = fg[l_i,l_j] + f a(l_i)(g) l_j - g a(l_j)(f) l_i`.
    pub fn bracket_sections(&self, x: &[Laurent], y: &[Laurent]) -> Vec<Laurent> {
        let r = self.rank();
        let mut out = vec![Laurent::zero(); r];
        for i in 0..r {
            if x[i].is_zero() {
                continue;
            }
            for j in 0..r {
                if y[j].is_zero() {
                    continue;
                }
                let fg = x[i].mul(&y[j]);
                for (k, o) in out.iter_mut().enumerate() {
                    *o = o.add(&fg.mul(&self.brackets[i][j][k]));
                }
            }
        }
        for (j, o) in out.iter_mut().enumerate() {
            *o = o.add(&self.anchor_apply(x, &y[j])).sub(&self.anchor_apply(y, &x[j]));
        }
        out
    }

    pub fn unit_section(&self, i: usize) -> Vec<Laurent> {
        let mut v = vec![Laurent::zero(); self.rank()];
        v[i] = Laurent::constant(Q::one());
        v
    }

    /// Point-tier presentation in the basis `l'_a = Σ_i p[i][a] l_i`.
    pub fn change_basis(&self, p: &Matrix, names: &[&str]) -> Option<Self> {
        let inv = p.inverse()?;
        let r = self.rank();
        let mut table = vec![vec![vec![Q::zero(); r]; r]; r];
        for a in 0..r {
            for b in 0..r {
                let br = self.bracket(&p.column(a), &p.column(b));
                table[a][b] = inv.mul_vec(&br);
            }
        }
        Some(Self::point_table(names, table))
    }

    /// The subalgebra spanned by the given basis elements, when closed under the bracket.
    pub fn restrict_to(&self, idx: &[usize]) -> Option<Self> {
        let pos: HashMap<usize, usize> = idx.iter().enumerate().map(|(a, &i)| (i, a)).collect();
        let n = idx.len();
        let mut brackets = vec![vec![vec![Laurent::zero(); n]; n]; n];
        for (a, &i) in idx.iter().enumerate() {
            for (b, &j) in idx.iter().enumerate() {
                for k in 0..self.rank() {
                    let c = &self.brackets[i][j][k];
                    if c.is_zero() {
                        continue;
                    }
                    brackets[a][b][*pos.get(&k)?] = c.clone();
                }
            }
        }
        Some(LieAlgebroidSpec {
            tier: self.tier,
            names: idx.iter().map(|&i| self.names[i].clone()).collect(),
            brackets,
            anchor: idx.iter().map(|&i| self.anchor[i].clone()).collect(),
        })
    }
}

fn jacobiator(spec: &LieAlgebroidSpec, x: &[Laurent], y: &[Laurent], z: &[Laurent]) -> Vec<Laurent> {
    let a = spec.bracket_sections(&spec.bracket_sections(x, y), z);
    let b = spec.bracket_sections(&spec.bracket_sections(y, z), x);
    let c = spec.bracket_sections(&spec.bracket_sections(z, x), y);
    a.iter().zip(&b).zip(&c).map(|((a, b), c)| a.add(b).add(c)).collect()
}

/// Verifies antisymmetry, anchor compatibility, Jacobi and (chart tier) Leibniz, in that order.
pub fn check_algebroid(spec: &LieAlgebroidSpec) -> Result<(), Violation> {
    let r = spec.rank();
    let n = |i: usize| spec.names[i].clone();
    if spec.tier == Tier::Point && !spec.is_constant() {
        return Err(Violation::PointTier { at: "structure constants or anchor".into() });
    }
    for i in 0..r {
        for j in i..r {
            let ok = (0..r).all(|k| spec.c(i, j, k).add(spec.c(j, i, k)).is_zero());
            if !ok {
                return Err(Violation::Antisymmetry { i: n(i), j: n(j) });
            }
        }
    }
    for i in 0..r {
        for j in i + 1..r {
            let lhs = (0..r).fold(Laurent::zero(), |acc, k| acc.add(&spec.c(i, j, k).mul(spec.anchor(k))));
            let (ai, aj) = (spec.anchor(i), spec.anchor(j));
            let rhs = ai.mul(&aj.derivative()).sub(&aj.mul(&ai.derivative()));
            if lhs != rhs {
                return Err(Violation::Anchor { i: n(i), j: n(j) });
            }
        }
    }
    for i in 0..r {
        for j in i + 1..r {
            for k in j + 1..r {
                let jac = jacobiator(spec, &spec.unit_section(i), &spec.unit_section(j), &spec.unit_section(k));
                if jac.iter().any(|x| !x.is_zero()) {
                    return Err(Violation::Jacobi { i: n(i), j: n(j), k: n(k) });
                }
            }
        }
    }
    if spec.tier == Tier::Chart {
        let t = Laurent::monomial(Q::one(), 1);
        for i in 0..r {
            for j in 0..r {
                for k in 0..r {
                    let tk: Vec<Laurent> = spec.unit_section(k).iter().map(|x| x.mul(&t)).collect();
                    let jac = jacobiator(spec, &spec.unit_section(i), &spec.unit_section(j), &tk);
                    if jac.iter().any(|x| !x.is_zero()) {
                        return Err(Violation::Leibniz { i: n(i), j: n(j), k: n(k) });
                    }
                }
            }
        }
    }
    Ok(())
}

/// Coefficient values for forms.
pub trait Coeff: Clone + PartialEq + Debug {
    fn is_null(&self) -> bool;
    fn plus(&self, other: &Self) -> Self;
    fn scaled(&self, c: &Q) -> Self;
}

/// Commutative coefficient rings with the derivation `d/dt`.
pub trait Scalar: Coeff {
    fn unit() -> Self;
    fn times(&self, other: &Self) -> Self;
    fn deriv(&self) -> Self;
    fn from_laurent(l: &Laurent) -> Self;
}

impl Coeff for Q {
    fn is_null(&self) -> bool {
        Zero::is_zero(self)
    }
    fn plus(&self, other: &Self) -> Self {
        self + other
    }
    fn scaled(&self, c: &Q) -> Self {
        self * c
    }
}

impl Scalar for Q {
    fn unit() -> Self {
        One::one()
    }
    fn times(&self, other: &Self) -> Self {
        self * other
    }
    fn deriv(&self) -> Self {
        Q::zero()
    }
    fn from_laurent(l: &Laurent) -> Self {
        assert!(l.0.keys().all(|&e| e == 0), "nonconstant coefficient on the point tier");
        l.coeff(0)
    }
}

impl Coeff for Laurent {
    fn is_null(&self) -> bool {
        Laurent::is_zero(self)
    }
    fn plus(&self, other: &Self) -> Self {
        Laurent::add(self, other)
    }
    fn scaled(&self, c: &Q) -> Self {
        Laurent::scale(self, c)
    }
}

impl Scalar for Laurent {
    fn unit() -> Self {
        Laurent::constant(Q::one())
    }
    fn times(&self, other: &Self) -> Self {
        Laurent::mul(self, other)
    }
    fn deriv(&self) -> Self {
        Laurent::derivative(self)
    }
    fn from_laurent(l: &Laurent) -> Self {
        l.clone()
    }
}

impl Coeff for Matrix {
    fn is_null(&self) -> bool {
        Matrix::is_zero(self)
    }
    fn plus(&self, other: &Self) -> Self {
        Matrix::add(self, other)
    }
    fn scaled(&self, c: &Q) -> Self {
        Matrix::scale(self, c)
    }
}

impl Coeff for Vec<Q> {
    fn is_null(&self) -> bool {
        self.iter().all(Zero::is_zero)
    }
    fn plus(&self, other: &Self) -> Self {
        crate::exact::add_vec(self, other)
    }
    fn scaled(&self, c: &Q) -> Self {
        crate::exact::scale_vec(c, self)
    }
}

impl<C: Coeff> Coeff for Form<C> {
    fn is_null(&self) -> bool {
        self.is_zero()
    }
    fn plus(&self, other: &Self) -> Self {
        self.add(other)
    }
    fn scaled(&self, c: &Q) -> Self {
        self.scale(c)
    }
}

/// Sign of `e_s ∧ e_t` relative to `e_{s∪t}` for disjoint masks.
pub fn mask_sign(s: u32, t: u32) -> i32 {
    let mut inversions = 0;
    let mut rest = t;
    while rest != 0 {
        let j = rest.trailing_zeros();
        rest &= rest - 1;
        inversions += (s >> (j + 1)).count_ones();
    }
    if inversions % 2 == 0 {
        1
    } else {
        -1
    }
}

pub fn mask_of(indices: &[usize]) -> u32 {
    indices.iter().fold(0, |m, &i| m | (1 << i))
}

pub fn mask_indices(m: u32) -> Vec<usize> {
    (0..32).filter(|i| m & (1 << i) != 0).collect()
}

/// Masks with `k` bits among `r`, ordered lexicographically by their sorted index tuples.
pub fn masks_of_degree(r: usize, k: usize) -> Vec<u32> {
    let mut out: Vec<u32> = (0u32..(1u32 << r)).filter(|m| m.count_ones() as usize == k).collect();
    out.sort_by_key(|&m| mask_indices(m));
    out
}

/// Index of each mask within its degree.
#[derive(Debug, Clone)]
pub struct FormBasis {
    pub rank: usize,
    pub by_degree: Vec<Vec<u32>>,
    index: HashMap<u32, usize>,
}

impl FormBasis {
    pub fn new(rank: usize) -> Self {
        let by_degree: Vec<Vec<u32>> = (0..=rank).map(|k| masks_of_degree(rank, k)).collect();
        let index = by_degree.iter().flat_map(|ms| ms.iter().enumerate().map(|(i, &m)| (m, i))).collect();
        FormBasis { rank, by_degree, index }
    }

    pub fn dim(&self, k: usize) -> usize {
        self.by_degree.get(k).map_or(0, |v| v.len())
    }

    pub fn index(&self, m: u32) -> usize {
        self.index[&m]
    }
}

/// A form with coefficients on strictly increasing index tuples, encoded as bit masks.
#[derive(Debug, Clone, PartialEq)]
pub struct Form<C> {
    pub rank: usize,
    pub terms: BTreeMap<u32, C>,
}

impl<C: Coeff> Form<C> {
    pub fn zero(rank: usize) -> Self {
        Form { rank, terms: BTreeMap::new() }
    }

    pub fn term(rank: usize, indices: &[usize], c: C) -> Self {
        let mut sorted = indices.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        let mut f = Self::zero(rank);
        if sorted.len() != indices.len() {
            return f;
        }
        let s = crate::dg::koszul_sign(&argsort(indices), &vec![1; indices.len()]);
        f.add_term(mask_of(indices), &c.scaled(&q(s as i64)));
        f
    }

    pub fn add_term(&mut self, m: u32, c: &C) {
        if c.is_null() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(x) => {
                *x = x.plus(c);
                if x.is_null() {
                    self.terms.remove(&m);
                }
            }
            None => {
                self.terms.insert(m, c.clone());
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut f = self.clone();
        for (m, c) in &other.terms {
            f.add_term(*m, c);
        }
        f
    }

    pub fn scale(&self, c: &Q) -> Self {
        let mut f = Self::zero(self.rank);
        for (m, x) in &self.terms {
            f.add_term(*m, &x.scaled(c));
        }
        f
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&-Q::one()))
    }

    /// Degree when homogeneous.
    pub fn degree(&self) -> Option<usize> {
        let mut ds = self.terms.keys().map(|m| m.count_ones() as usize);
        let first = ds.next()?;
        ds.all(|d| d == first).then_some(first)
    }

    pub fn coeff(&self, m: u32) -> Option<&C> {
        self.terms.get(&m)
    }

    /// Alternating evaluation on basis elements `l_{idx[0]}, ...`.
    pub fn eval(&self, idx: &[usize]) -> Option<C> {
        let mut sorted = idx.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != idx.len() {
            return None;
        }
        let c = self.terms.get(&mask_of(idx))?;
        let s = crate::dg::koszul_sign(&argsort(idx), &vec![1; idx.len()]);
        Some(c.scaled(&q(s as i64)))
    }

    pub fn homogeneous_part(&self, k: usize) -> Self {
        Form {
            rank: self.rank,
            terms: self.terms.iter().filter(|(m, _)| m.count_ones() as usize == k).map(|(m, c)| (*m, c.clone())).collect(),
        }
    }
}

fn argsort(idx: &[usize]) -> Vec<usize> {
    let mut p: Vec<usize> = (0..idx.len()).collect();
    p.sort_by_key(|&i| idx[i]);
    p
}

impl<S: Scalar> Form<S> {
    pub fn one(rank: usize) -> Self {
        let mut f = Self::zero(rank);
        f.add_term(0, &S::unit());
        f
    }

    /// The dual basis element `l_i^∨`.
    pub fn dual(rank: usize, i: usize) -> Self {
        let mut f = Self::zero(rank);
        f.add_term(1 << i, &S::unit());
        f
    }

    pub fn to_vector(&self, basis: &FormBasis, k: usize) -> Vec<Q>
    where
        S: Into<Q>,
    {
        let mut v = vec![Q::zero(); basis.dim(k)];
        for (m, c) in &self.terms {
            if m.count_ones() as usize == k {
                v[basis.index(*m)] = c.clone().into();
            }
        }
        v
    }
}

impl Form<Q> {
    pub fn from_vector(basis: &FormBasis, k: usize, v: &[Q]) -> Self {
        let mut f = Self::zero(basis.rank);
        for (i, c) in v.iter().enumerate() {
            f.add_term(basis.by_degree[k][i], c);
        }
        f
    }
}

/// The unshuffle product with a caller-supplied coefficient pairing.
pub fn wedge_with<A: Coeff, B: Coeff, C: Coeff>(
    omega: &Form<A>,
    eta: &Form<B>,
    mul: impl Fn(&A, &B) -> C,
) -> Form<C> {
    let mut out = Form::zero(omega.rank);
    for (s, a) in &omega.terms {
        for (t, b) in &eta.terms {
            if s & t != 0 {
                continue;
            }
            let c = mul(a, b);
            out.add_term(s | t, &c.scaled(&q(mask_sign(*s, *t) as i64)));
        }
    }
    out
}

pub fn wedge<S: Scalar>(omega: &Form<S>, eta: &Form<S>) -> Form<S> {
    wedge_with(omega, eta, |a, b| a.times(b))
}

/// Wedge of End-valued forms composing the endomorphisms.
pub fn compose_wedge(omega: &Form<Matrix>, eta: &Form<Matrix>) -> Form<Matrix> {
    wedge_with(omega, eta, |a, b| a.mul(b))
}

/// Scalar form times module-valued form.
pub fn scalar_wedge(omega: &Form<Q>, eta: &Form<Vec<Q>>) -> Form<Vec<Q>> {
    wedge_with(omega, eta, |a, b| crate::exact::scale_vec(a, b))
}

/// `(l ⌟ ω)(l_1, ...) = ω(l, l_1, ...)` for `l = Σ c_i l_i`.
pub fn contract<S: Scalar>(l: &[S], omega: &Form<S>) -> Form<S> {
    let mut out = Form::zero(omega.rank);
    for (m, c) in &omega.terms {
        for i in mask_indices(*m) {
            if l[i].is_null() {
                continue;
            }
            let below = (m & ((1u32 << i) - 1)).count_ones();
            let s = if below % 2 == 0 { 1 } else { -1 };
            out.add_term(m & !(1 << i), &l[i].times(c).scaled(&q(s)));
        }
    }
    out
}

/// Contraction with a basis element for arbitrary coefficients.
pub fn contract_basis<C: Coeff>(i: usize, omega: &Form<C>) -> Form<C> {
    let mut out = Form::zero(omega.rank);
    for (m, c) in &omega.terms {
        if m & (1 << i) == 0 {
            continue;
        }
        let below = (m & ((1u32 << i) - 1)).count_ones();
        let s = if below % 2 == 0 { 1 } else { -1 };
        out.add_term(m & !(1 << i), &c.scaled(&q(s)));
    }
    out
}

/// `ω(l_m, rest)` where `rest` is a sorted mask, as a coefficient of `e_{rest ∪ m}` with sign.
fn insert_front(m: usize, rest: u32) -> Option<(u32, i64)> {
    if rest & (1 << m) != 0 {
        return None;
    }
    let below = (rest & ((1u32 << m) - 1)).count_ones();
    Some((rest | (1 << m), if below % 2 == 0 { 1 } else { -1 }))
}

/// The de Rham differential of `Ω*(L)` with anchor and bracket terms.
pub fn derham_differential<S: Scalar>(spec: &LieAlgebroidSpec, omega: &Form<S>) -> Form<S> {
    let r = spec.rank();
    let mut out = Form::zero(r);
    let degrees: std::collections::BTreeSet<usize> = omega.terms.keys().map(|m| m.count_ones() as usize).collect();
    for k in degrees {
        for target in masks_of_degree(r, k + 1) {
            let idx = mask_indices(target);
            let mut acc: Option<S> = None;
            let mut push = |x: S| {
                acc = Some(match acc.take() {
                    Some(a) => a.plus(&x),
                    None => x,
                })
            };
            for (p, &ip) in idx.iter().enumerate() {
                let anchor = spec.anchor(ip);
                if anchor.is_zero() {
                    continue;
                }
                if let Some(c) = omega.terms.get(&(target & !(1 << ip))) {
                    let s = q(if p % 2 == 0 { 1 } else { -1 });
                    push(S::from_laurent(anchor).times(&c.deriv()).scaled(&s));
                }
            }
            for p in 0..idx.len() {
                for qq in p + 1..idx.len() {
                    let rest = target & !(1 << idx[p]) & !(1 << idx[qq]);
                    let s = if (p + qq) % 2 == 0 { 1 } else { -1 };
                    for m in 0..r {
                        let c = spec.c(idx[p], idx[qq], m);
                        if c.is_zero() {
                            continue;
                        }
                        let Some((mask, s2)) = insert_front(m, rest) else { continue };
                        if let Some(w) = omega.terms.get(&mask) {
                            push(S::from_laurent(c).times(w).scaled(&q(s * s2)));
                        }
                    }
                }
            }
            if let Some(a) = acc {
                out.add_term(target, &a);
            }
        }
    }
    out
}

/// Matrix of `d_L : Ω^k(L) -> Ω^{k+1}(L)` on the point tier.
pub fn derham_matrix(spec: &LieAlgebroidSpec, basis: &FormBasis, k: usize) -> Matrix {
    let mut m = Matrix::zeros(basis.dim(k + 1), basis.dim(k));
    for (j, &mask) in basis.by_degree[k].iter().enumerate() {
        let mut f = Form::<Q>::zero(spec.rank());
        f.add_term(mask, &Q::one());
        m.set_column(j, &derham_differential(spec, &f).to_vector(basis, k + 1));
    }
    m
}

/// The Chevalley–Eilenberg (de Rham) complex `Ω*(L)` with trivial coefficients.
pub fn derham_complex(spec: &LieAlgebroidSpec) -> CochainComplex {
    standard_complex(spec, &Connection::trivial(spec.rank(), 1)).expect("trivial connection is flat")
}

/// An L-connection on a free module of rank `dim` over the point: one matrix per basis element.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Connection {
    pub dim: usize,
    pub mats: Vec<Matrix>,
}

impl Connection {
    pub fn new(dim: usize, mats: Vec<Matrix>) -> Self {
        for m in &mats {
            assert_eq!((m.rows, m.cols), (dim, dim), "connection matrix shape");
        }
        Connection { dim, mats }
    }

    pub fn trivial(rank: usize, dim: usize) -> Self {
        Connection { dim, mats: vec![Matrix::zeros(dim, dim); rank] }
    }

    /// `∇_l = Σ c_i ∇_{l_i}`.
    pub fn along(&self, l: &[Q]) -> Matrix {
        let mut m = Matrix::zeros(self.dim, self.dim);
        for (c, a) in l.iter().zip(&self.mats) {
            if !Zero::is_zero(c) {
                m = m.add(&a.scale(c));
            }
        }
        m
    }

    /// The connection as an End-valued 1-form.
    pub fn as_form(&self) -> Form<Matrix> {
        let mut f = Form::zero(self.mats.len());
        for (i, m) in self.mats.iter().enumerate() {
            f.add_term(1 << i, m);
        }
        f
    }
}

/// `∇²(l_i, l_j) = ∇_i∇_j - ∇_j∇_i - ∇_{[l_i,l_j]}`.
pub fn curvature(spec: &LieAlgebroidSpec, conn: &Connection) -> Form<Matrix> {
    let r = spec.rank();
    let mut out = Form::zero(r);
    for i in 0..r {
        for j in i + 1..r {
            let br: Vec<Q> = (0..r).map(|k| spec.cq(i, j, k)).collect();
            let m = conn.mats[i].commutator(&conn.mats[j]).sub(&conn.along(&br));
            out.add_term((1 << i) | (1 << j), &m);
        }
    }
    out
}

pub fn is_flat(spec: &LieAlgebroidSpec, conn: &Connection) -> bool {
    curvature(spec, conn).is_zero()
}

/// Basis index of `e_S ⊗ v_a` in `Ω^k(L) ⊗ E`.
pub fn tensor_index(basis: &FormBasis, dim: usize, mask: u32, a: usize) -> usize {
    basis.index(mask) * dim + a
}

/// Matrix of the extended operator `Ω^k(L)⊗E -> Ω^{k+1}(L)⊗E`,
/// `∇(f·e) = d_L f·e + (-1)^{|f|} f·∇e`, flat or not.
pub fn covariant_matrix(spec: &LieAlgebroidSpec, conn: &Connection, basis: &FormBasis, k: usize) -> Matrix {
    let n = conn.dim;
    let r = spec.rank();
    let mut out = Matrix::zeros(basis.dim(k + 1) * n, basis.dim(k) * n);
    for &mask in &basis.by_degree[k] {
        let mut f = Form::<Q>::zero(r);
        f.add_term(mask, &Q::one());
        let df = derham_differential(spec, &f);
        for a in 0..n {
            let col = tensor_index(basis, n, mask, a);
            for (m, c) in &df.terms {
                out.add_at(tensor_index(basis, n, *m, a), col, c);
            }
            if k < r {
                let s = if k % 2 == 0 { 1 } else { -1 };
                for i in 0..r {
                    if mask & (1 << i) != 0 {
                        continue;
                    }
                    let sg = s * mask_sign(mask, 1 << i);
                    let target = mask | (1 << i);
                    for b in 0..n {
                        let v = conn.mats[i].get(b, a);
                        if !Zero::is_zero(v) {
                            out.add_at(tensor_index(basis, n, target, b), col, &(v * q(sg as i64)));
                        }
                    }
                }
            }
        }
    }
    out
}

/// The standard complex `(Ω*(L)⊗E, ∇)` of a flat connection.
pub fn standard_complex(spec: &LieAlgebroidSpec, conn: &Connection) -> Result<CochainComplex, AlgebroidError> {
    if conn.mats.len() != spec.rank() {
        return Err(AlgebroidError::Shape { rank: spec.rank(), found: conn.mats.len() });
    }
    if !is_flat(spec, conn) {
        return Err(AlgebroidError::NotFlat);
    }
    Ok(twisted_complex_unchecked(spec, conn)?)
}

/// The graded space `Ω*(L)⊗E` with the extended operator, checked only for `d² = 0`.
pub fn twisted_complex_unchecked(spec: &LieAlgebroidSpec, conn: &Connection) -> Result<CochainComplex, DgError> {
    let basis = FormBasis::new(spec.rank());
    let n = conn.dim;
    let mut bases = BTreeMap::new();
    let mut diffs = BTreeMap::new();
    for k in 0..=spec.rank() {
        let names: Vec<String> = basis.by_degree[k]
            .iter()
            .flat_map(|&m| {
                let label = mask_label(spec, m);
                (0..n).map(move |a| format!("{label}⊗e{a}"))
            })
            .collect();
        bases.insert(k as i32, names);
        if k < spec.rank() {
            diffs.insert(k as i32, covariant_matrix(spec, conn, &basis, k));
        }
    }
    CochainComplex::new(GradedVectorSpace { bases }, diffs)
}

pub fn mask_label(spec: &LieAlgebroidSpec, m: u32) -> String {
    if m == 0 {
        return "1".into();
    }
    mask_indices(m).iter().map(|&i| format!("{}^", spec.names[i])).collect::<Vec<_>>().join("∧")
}

/// A chart-tier connection `∇_{l_i}(f e_a) = α_i f' e_a + f Σ_b Γ_i[b][a] e_b`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChartConnection {
    pub dim: usize,
    pub gamma: Vec<Vec<Vec<Laurent>>>,
}

impl ChartConnection {
    /// `∇_l s` for a section `l` of L and a section `s` of E.
    pub fn apply(&self, spec: &LieAlgebroidSpec, l: &[Laurent], s: &[Laurent]) -> Vec<Laurent> {
        let mut out: Vec<Laurent> = s.iter().map(|f| spec.anchor_apply(l, f)).collect();
        for (i, li) in l.iter().enumerate() {
            if li.is_zero() {
                continue;
            }
            for b in 0..self.dim {
                for a in 0..self.dim {
                    let g = &self.gamma[i][b][a];
                    if !g.is_zero() {
                        out[b] = out[b].add(&li.mul(g).mul(&s[a]));
                    }
                }
            }
        }
        out
    }

    pub fn curvature_apply(&self, spec: &LieAlgebroidSpec, l: &[Laurent], m: &[Laurent], s: &[Laurent]) -> Vec<Laurent> {
        let lm = self.apply(spec, l, &self.apply(spec, m, s));
        let ml = self.apply(spec, m, &self.apply(spec, l, s));
        let br = self.apply(spec, &spec.bracket_sections(l, m), s);
        lm.iter().zip(&ml).zip(&br).map(|((a, b), c)| a.sub(b).sub(c)).collect()
    }

    /// Curvature matrices `R_{ij}[b][a]` on the frame.
    pub fn curvature(&self, spec: &LieAlgebroidSpec) -> BTreeMap<(usize, usize), Vec<Vec<Laurent>>> {
        let r = spec.rank();
        let mut out = BTreeMap::new();
        for i in 0..r {
            for j in i + 1..r {
                let mut m = vec![vec![Laurent::zero(); self.dim]; self.dim];
                for a in 0..self.dim {
                    let e = unit_laurent(self.dim, a);
                    let col = self.curvature_apply(spec, &spec.unit_section(i), &spec.unit_section(j), &e);
                    for b in 0..self.dim {
                        m[b][a] = col[b].clone();
                    }
                }
                out.insert((i, j), m);
            }
        }
        out
    }

    /// Checks `R(l_i, t l_j)(t e_a) = t² R(l_i, l_j) e_a` and the same in the first slot.
    pub fn curvature_is_linear(&self, spec: &LieAlgebroidSpec) -> bool {
        let t = Laurent::monomial(Q::one(), 1);
        let r = spec.rank();
        let times = |v: Vec<Laurent>, f: &Laurent| -> Vec<Laurent> { v.iter().map(|x| x.mul(f)).collect() };
        for i in 0..r {
            for j in 0..r {
                for a in 0..self.dim {
                    let e = unit_laurent(self.dim, a);
                    let base = self.curvature_apply(spec, &spec.unit_section(i), &spec.unit_section(j), &e);
                    let tj = times(spec.unit_section(j), &t);
                    let ti = times(spec.unit_section(i), &t);
                    let lhs = self.curvature_apply(spec, &spec.unit_section(i), &tj, &times(e.clone(), &t));
                    if lhs != times(base.clone(), &t.mul(&t)) {
                        return false;
                    }
                    if self.curvature_apply(spec, &ti, &spec.unit_section(j), &e) != times(base, &t) {
                        return false;
                    }
                }
            }
        }
        true
    }
}

fn unit_laurent(n: usize, a: usize) -> Vec<Laurent> {
    let mut v = vec![Laurent::zero(); n];
    v[a] = Laurent::constant(Q::one());
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    #[test]
    fn asymmetric_input_is_rejected() {
        let spec = LieAlgebroidSpec::point(&["x", "y"], &[(0, 1, vec![(1, q(1))]), (1, 0, vec![])]);
        assert_eq!(check_algebroid(&spec), Err(Violation::Antisymmetry { i: "x".into(), j: "y".into() }));
    }

    #[test]
    fn known_algebras_are_valid() {
        assert!(check_algebroid(&catalog::sl2()).is_ok());
        assert!(check_algebroid(&catalog::abelian(4)).is_ok());
        assert!(check_algebroid(&catalog::theta_chart()).is_ok());
    }

    #[test]
    fn wedge_and_contract_examples() {
        let x = Form::<Q>::dual(2, 0);
        let y = Form::<Q>::dual(2, 1);
        assert_eq!(wedge(&x, &Form::one(2)), x);
        assert_eq!(wedge(&x, &y), wedge(&y, &x).scale(&q(-1)));
        assert!(wedge(&x, &x).is_zero());
        assert_eq!(wedge(&x, &y).eval(&[0, 1]), Some(q(1)));
        assert_eq!(contract(&[q(1), q(0)], &x), Form::one(2));
        assert_eq!(contract(&[q(0), q(1)], &wedge(&x, &y)), x.scale(&q(-1)));
        assert!(contract(&[q(1), q(1)], &Form::<Q>::one(2)).is_zero());
    }

    #[test]
    fn aff1_differential() {
        let spec = catalog::aff1();
        let x = Form::<Q>::dual(2, 0);
        let y = Form::<Q>::dual(2, 1);
        assert!(derham_differential(&spec, &x).is_zero());
        assert_eq!(derham_differential(&spec, &y), wedge(&x, &y).scale(&q(-1)));
    }

    #[test]
    fn abelian_curvature_is_commutator() {
        let spec = catalog::abelian(2);
        let a = Matrix::from_i64(&[&[0, 1], &[0, 0]]);
        let b = Matrix::from_i64(&[&[0, 0], &[1, 0]]);
        let conn = Connection::new(2, vec![a.clone(), b.clone()]);
        let r = curvature(&spec, &conn);
        assert_eq!(r.eval(&[0, 1]), Some(a.commutator(&b)));
        assert_eq!(standard_complex(&spec, &conn), Err(AlgebroidError::NotFlat));
    }

    #[test]
    fn adjoint_is_flat() {
        let spec = catalog::sl2();
        assert!(is_flat(&spec, &catalog::adjoint(&spec)));
    }

    #[test]
    fn chart_connection_curvature_is_linear() {
        let spec = catalog::theta_chart();
        let g = Laurent::monomial(q(3), 2);
        let conn = ChartConnection { dim: 1, gamma: vec![vec![vec![g]]] };
        assert!(conn.curvature_is_linear(&spec));
        assert!(conn.curvature(&spec).is_empty());
    }

    #[test]
    fn chevalley_eilenberg_dims() {
        let dims = |s: &LieAlgebroidSpec| crate::dg::cohomology(&derham_complex(s)).unwrap().dims();
        assert_eq!(dims(&catalog::sl2()), vec![1, 0, 0, 1]);
        assert_eq!(dims(&catalog::aff1()), vec![1, 1, 0]);
        assert_eq!(dims(&catalog::abelian(3)), vec![1, 3, 3, 1]);
        assert_eq!(dims(&catalog::heisenberg()), vec![1, 2, 2, 1]);
    }
}
