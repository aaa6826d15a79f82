//! Polynomial forms on simplices, semicosimplicial complexes, Thom–Whitney totalization,
//! Whitney integration to Čech cochains and the two-chart model of the projective line.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::algebroid::{derham_differential, mask_sign, Coeff, Form, LieAlgebroidSpec};
use crate::curved::CurvedAlgebra;
use crate::dg::{cohomology, CochainComplex, Cohomology, DgError};
use crate::exact::{
    add_vec, factorial, is_zero_vec, q, rank_kernel_image, scale_vec, unit_vec, zero_vec, Laurent, LaurentWindow, Matrix,
    Subspace, Q,
};

/// Default truncation level of Tot elements.
pub const DEFAULT_NMAX: usize = 3;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TotError {
    #[error("face index {k} out of range at level {n}")]
    FaceIndex { k: usize, n: usize },
    #[error("components violate the face condition for δ_{k} at level {n}")]
    Incompatible { k: usize, n: usize },
    #[error("cosimplicial identity fails at level {n} for (i, j) = ({i}, {j})")]
    CofaceIdentity { n: usize, i: usize, j: usize },
    #[error("coface δ_{k} into level {n} is not a chain map")]
    NotChainMap { k: usize, n: usize },
    #[error("differential of level {n} is not a degree-one square-zero map")]
    Differential { n: usize },
    #[error("local sections disagree on the overlap {mask:#b}")]
    Disagree { mask: u32 },
    #[error("a section leaves the exponent window or the chart")]
    OutsideWindow,
    #[error("transition matrix is not invertible over Laurent polynomials")]
    Transition,
    #[error("connection does not extend the subalgebra connection on open {open}")]
    NotLifting { open: usize },
    #[error("level {n} is not determined by its faces")]
    NotFaithful { n: usize },
    #[error(transparent)]
    Complex(#[from] DgError),
}

// ---------------------------------------------------------------- simplex forms

/// A monomial `t_1^{e_1}…t_n^{e_n} dt_S` on `Δⁿ`, with `t_0` and `dt_0` eliminated.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SimplexKey {
    pub exps: Vec<u32>,
    /// Bit `i - 1` marks `dt_i`.
    pub dts: u32,
}

impl SimplexKey {
    pub fn degree(&self) -> u32 {
        self.dts.count_ones()
    }
}

/// A polynomial form on the standard `n`-simplex with coefficients in `C`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplexForm<C> {
    pub n: usize,
    pub terms: BTreeMap<SimplexKey, C>,
}

impl<C: Coeff> SimplexForm<C> {
    pub fn zero(n: usize) -> Self {
        SimplexForm { n, terms: BTreeMap::new() }
    }

    pub fn add_term(&mut self, k: SimplexKey, c: &C) {
        if c.is_null() {
            return;
        }
        match self.terms.get_mut(&k) {
            Some(x) => {
                *x = x.plus(c);
                if x.is_null() {
                    self.terms.remove(&k);
                }
            }
            None => {
                self.terms.insert(k, c.clone());
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut r = self.clone();
        for (k, c) in &o.terms {
            r.add_term(k.clone(), c);
        }
        r
    }

    pub fn scale(&self, c: &Q) -> Self {
        let mut r = Self::zero(self.n);
        for (k, x) in &self.terms {
            r.add_term(k.clone(), &x.scaled(c));
        }
        r
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(&-Q::one()))
    }

    /// Form degree when homogeneous.
    pub fn degree(&self) -> Option<u32> {
        let mut ds = self.terms.keys().map(SimplexKey::degree);
        let first = ds.next()?;
        ds.all(|d| d == first).then_some(first)
    }

    pub fn map<D: Coeff>(&self, f: impl Fn(&C) -> D) -> SimplexForm<D> {
        let mut r = SimplexForm::zero(self.n);
        for (k, c) in &self.terms {
            r.add_term(k.clone(), &f(c));
        }
        r
    }

    /// Same form with the coefficient of each term transformed by its key.
    pub fn map_keyed<D: Coeff>(&self, f: impl Fn(&SimplexKey, &C) -> D) -> SimplexForm<D> {
        let mut r = SimplexForm::zero(self.n);
        for (k, c) in &self.terms {
            r.add_term(k.clone(), &f(k, c));
        }
        r
    }

    /// The polynomial de Rham differential.
    pub fn d(&self) -> Self {
        let mut r = Self::zero(self.n);
        for (k, c) in &self.terms {
            for i in 0..self.n {
                let e = k.exps[i];
                if e == 0 || k.dts & (1 << i) != 0 {
                    continue;
                }
                let mut exps = k.exps.clone();
                exps[i] -= 1;
                let s = mask_sign(1 << i, k.dts);
                r.add_term(SimplexKey { exps, dts: k.dts | (1 << i) }, &c.scaled(&q(s as i64 * e as i64)));
            }
        }
        r
    }

    /// `δ_k^*`: substitutes `t_i ↦ t_i (i < k), 0 (i = k), t_{i-1} (i > k)`.
    pub fn pullback(&self, k: usize) -> Result<Self, TotError> {
        if self.n == 0 || k > self.n {
            return Err(TotError::FaceIndex { k, n: self.n });
        }
        let mut r = Self::zero(self.n - 1);
        for (key, c) in &self.terms {
            let image = monomial_pullback(self.n, k, key);
            for (k2, s) in &image.terms {
                r.add_term(k2.clone(), &c.scaled(s));
            }
        }
        Ok(r)
    }

    /// `∫_{Δⁿ}` of the top-degree part.
    pub fn integrate(&self) -> Option<C> {
        let full = (1u32 << self.n) - 1;
        let mut acc: Option<C> = None;
        for (k, c) in &self.terms {
            if k.dts != full {
                continue;
            }
            let total: u32 = k.exps.iter().sum();
            let mut w = factorial(self.n + total as usize).recip();
            for &e in &k.exps {
                w *= factorial(e as usize);
            }
            let x = c.scaled(&w);
            acc = Some(match acc {
                Some(a) => a.plus(&x),
                None => x,
            });
        }
        acc
    }
}

impl SimplexForm<Q> {
    pub fn constant(n: usize, c: Q) -> Self {
        let mut r = Self::zero(n);
        r.add_term(SimplexKey { exps: vec![0; n], dts: 0 }, &c);
        r
    }

    pub fn one(n: usize) -> Self {
        Self::constant(n, Q::one())
    }

    /// The barycentric coordinate `t_i`, with `t_0 = 1 - t_1 - … - t_n`.
    pub fn t(n: usize, i: usize) -> Self {
        let mut r = Self::zero(n);
        if i == 0 {
            r = Self::one(n);
            for j in 1..=n {
                r = r.sub(&Self::t(n, j));
            }
            return r;
        }
        let mut exps = vec![0; n];
        exps[i - 1] = 1;
        r.add_term(SimplexKey { exps, dts: 0 }, &Q::one());
        r
    }

    /// `dt_i`, with `dt_0 = -dt_1 - … - dt_n`.
    pub fn dt(n: usize, i: usize) -> Self {
        let mut r = Self::zero(n);
        if i == 0 {
            for j in 1..=n {
                r = r.sub(&Self::dt(n, j));
            }
            return r;
        }
        r.add_term(SimplexKey { exps: vec![0; n], dts: 1 << (i - 1) }, &Q::one());
        r
    }

    pub fn mul(&self, o: &Self) -> Self {
        mul_with(self, o, |a, b, _| a * b)
    }

    pub fn tensor<C: Coeff>(&self, c: &C) -> SimplexForm<C> {
        self.map(|a| c.scaled(a))
    }
}

/// Wedge product with a coefficient pairing that also sees the form degree of the right factor.
pub fn mul_with<A: Coeff, B: Coeff, C: Coeff>(
    a: &SimplexForm<A>,
    b: &SimplexForm<B>,
    f: impl Fn(&A, &B, u32) -> C,
) -> SimplexForm<C> {
    let mut r = SimplexForm::zero(a.n);
    for (ka, x) in &a.terms {
        for (kb, y) in &b.terms {
            if ka.dts & kb.dts != 0 {
                continue;
            }
            let s = mask_sign(ka.dts, kb.dts);
            let exps = ka.exps.iter().zip(&kb.exps).map(|(u, v)| u + v).collect();
            r.add_term(SimplexKey { exps, dts: ka.dts | kb.dts }, &f(x, y, kb.degree()).scaled(&q(s as i64)));
        }
    }
    r
}

fn face_t(n: usize, k: usize, i: usize) -> SimplexForm<Q> {
    match i.cmp(&k) {
        std::cmp::Ordering::Less => SimplexForm::t(n - 1, i),
        std::cmp::Ordering::Equal => SimplexForm::zero(n - 1),
        std::cmp::Ordering::Greater => SimplexForm::t(n - 1, i - 1),
    }
}

fn face_dt(n: usize, k: usize, i: usize) -> SimplexForm<Q> {
    match i.cmp(&k) {
        std::cmp::Ordering::Less => SimplexForm::dt(n - 1, i),
        std::cmp::Ordering::Equal => SimplexForm::zero(n - 1),
        std::cmp::Ordering::Greater => SimplexForm::dt(n - 1, i - 1),
    }
}

fn monomial_pullback(n: usize, k: usize, key: &SimplexKey) -> SimplexForm<Q> {
    let mut image = SimplexForm::one(n - 1);
    for i in 1..=n {
        for _ in 0..key.exps[i - 1] {
            image = image.mul(&face_t(n, k, i));
        }
    }
    for i in 1..=n {
        if key.dts & (1 << (i - 1)) != 0 {
            image = image.mul(&face_dt(n, k, i));
        }
    }
    image
}

/// The Whitney form `k!·Σ_m (-1)^m t_{a_m} dt_{a_0}∧…∧\widehat{dt_{a_m}}∧…∧dt_{a_k}` on `Δⁿ`.
pub fn whitney_form(n: usize, a: &[usize]) -> SimplexForm<Q> {
    let k = a.len() - 1;
    let mut r = SimplexForm::zero(n);
    for m in 0..=k {
        let mut term = SimplexForm::t(n, a[m]);
        for (j, &aj) in a.iter().enumerate() {
            if j != m {
                term = term.mul(&SimplexForm::dt(n, aj));
            }
        }
        r = if m % 2 == 0 { r.add(&term) } else { r.sub(&term) };
    }
    r.scale(&factorial(k))
}

/// `Σ_a ω_a ⊗ ε_a·value(σ_a)` over vertex subsets `a` of `Δⁿ` whose opens `τ_a` are distinct,
/// where `σ_a` is `τ_a` sorted and `ε_a` the sign of the sorting permutation.
pub fn whitney_component<C: Coeff>(n: usize, tuple: &[usize], value: impl Fn(&[usize]) -> Option<C>) -> SimplexForm<C> {
    let mut r = SimplexForm::zero(n);
    for sel in 1u32..(1 << (n + 1)) {
        let a: Vec<usize> = (0..=n).filter(|i| sel & (1 << i) != 0).collect();
        let opens: Vec<usize> = a.iter().map(|&i| tuple[i]).collect();
        let mut sorted = opens.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            continue;
        }
        let inversions = (0..opens.len())
            .flat_map(|i| (i + 1..opens.len()).map(move |j| (i, j)))
            .filter(|&(i, j)| opens[i] > opens[j])
            .count();
        let Some(c) = value(&sorted) else { continue };
        let s = if inversions % 2 == 0 { Q::one() } else { -Q::one() };
        r = r.add(&whitney_form(n, &a).tensor(&c.scaled(&s)));
    }
    r
}

// ---------------------------------------------------------------- tuples

/// All `(n+1)`-tuples of opens in lexicographic order.
pub fn tuples(opens: usize, n: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..=n {
        out = out.into_iter().flat_map(|t| (0..opens).map(move |i| [t.clone(), vec![i]].concat())).collect();
    }
    out
}

pub fn tuple_index(opens: usize, tuple: &[usize]) -> usize {
    tuple.iter().fold(0, |acc, &i| acc * opens + i)
}

pub fn tuple_mask(tuple: &[usize]) -> u32 {
    tuple.iter().fold(0, |m, &i| m | (1 << i))
}

fn drop_index(tuple: &[usize], k: usize) -> Vec<usize> {
    let mut t = tuple.to_vec();
    t.remove(k);
    t
}

/// Strictly increasing tuples of opens of every length.
pub fn increasing_tuples(opens: usize) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = (1u32..(1 << opens)).map(|m| (0..opens).filter(|i| m & (1 << i) != 0).collect()).collect();
    out.sort_by(|a, b| a.len().cmp(&b.len()).then(a.cmp(b)));
    out
}

// ---------------------------------------------------------------- semicosimplicial objects

/// A finite graded space with a differential, each basis vector carrying a degree.
#[derive(Debug, Clone, PartialEq)]
pub struct DgSpace {
    pub degrees: Vec<i32>,
    pub d: Matrix,
}

impl DgSpace {
    pub fn dim(&self) -> usize {
        self.degrees.len()
    }

    pub fn discrete(degree: i32, dim: usize) -> Self {
        DgSpace { degrees: vec![degree; dim], d: Matrix::zeros(dim, dim) }
    }

    /// `d` raises degree by one and squares to zero.
    pub fn check(&self) -> bool {
        for r in 0..self.d.rows {
            for c in 0..self.d.cols {
                if !self.d.get(r, c).is_zero() && self.degrees[r] != self.degrees[c] + 1 {
                    return false;
                }
            }
        }
        self.d.mul(&self.d).is_zero()
    }

    /// Block sum.
    pub fn direct_sum(parts: &[&DgSpace]) -> DgSpace {
        let dim: usize = parts.iter().map(|p| p.dim()).sum();
        let mut d = Matrix::zeros(dim, dim);
        let mut degrees = Vec::with_capacity(dim);
        let mut off = 0;
        for p in parts {
            for r in 0..p.dim() {
                for c in 0..p.dim() {
                    d.set(off + r, off + c, p.d.get(r, c).clone());
                }
            }
            degrees.extend_from_slice(&p.degrees);
            off += p.dim();
        }
        DgSpace { degrees, d }
    }
}

/// Levels `V_0, …, V_N` with cofaces `δ_k : V_{n-1} → V_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Semicosimplicial {
    pub levels: Vec<DgSpace>,
    /// `cofaces[n][k]` maps level `n - 1` to level `n`; `cofaces[0]` is empty.
    pub cofaces: Vec<Vec<Matrix>>,
}

impl Semicosimplicial {
    pub fn n_max(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn coface(&self, n: usize, k: usize) -> &Matrix {
        &self.cofaces[n][k]
    }

    /// Cosimplicial identities, chain-map property of each coface and degree preservation.
    pub fn check(&self) -> Result<(), TotError> {
        for (n, l) in self.levels.iter().enumerate() {
            if !l.check() {
                return Err(TotError::Differential { n });
            }
        }
        for n in 1..=self.n_max() {
            for k in 0..=n {
                let m = self.coface(n, k);
                let chain = self.levels[n].d.mul(m) == m.mul(&self.levels[n - 1].d);
                let graded = (0..m.rows).all(|r| {
                    (0..m.cols).all(|c| m.get(r, c).is_zero() || self.levels[n].degrees[r] == self.levels[n - 1].degrees[c])
                });
                if !chain || !graded {
                    return Err(TotError::NotChainMap { k, n });
                }
            }
        }
        for n in 2..=self.n_max() {
            for j in 1..=n {
                for i in 0..j {
                    let lhs = self.coface(n, j).mul(self.coface(n - 1, i));
                    let rhs = self.coface(n, i).mul(self.coface(n - 1, j - 1));
                    if lhs != rhs {
                        return Err(TotError::CofaceIdentity { n, i, j });
                    }
                }
            }
        }
        Ok(())
    }
}

/// A complex of sheaves on a finite cover, described by its sections over intersections.
pub trait SheafDatum {
    fn opens(&self) -> usize;
    /// Sections over the intersection of the opens in `set`.
    fn space(&self, set: u32) -> DgSpace;
    /// Restriction from `from` to a larger index set `to` (a smaller open).
    fn restrict(&self, from: u32, to: u32) -> Matrix;
}

/// Position of the sections over one tuple inside a flat vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Block {
    pub tuple: Vec<usize>,
    pub mask: u32,
    pub offset: usize,
    pub dim: usize,
}

/// The alternating Čech hypercomplex `⊕ C^n(U, E^q)` with `D = Σ(-1)^k δ_k + (-1)^n d_E`.
#[derive(Debug, Clone)]
pub struct CechComplex {
    pub blocks: Vec<Block>,
    /// Total degree `n + q` of each flat coordinate.
    pub degrees: Vec<i32>,
    pub d: Matrix,
    /// Flat coordinates of each total degree.
    pub positions: BTreeMap<i32, Vec<usize>>,
    pub complex: CochainComplex,
}

impl CechComplex {
    pub fn dim(&self) -> usize {
        self.degrees.len()
    }

    pub fn block(&self, tuple: &[usize]) -> Option<&Block> {
        self.blocks.iter().find(|b| b.tuple == tuple)
    }

    /// Homogeneous flat vector from degree coordinates.
    pub fn from_degree(&self, n: i32, v: &[Q]) -> Vec<Q> {
        let mut out = zero_vec(self.dim());
        for (i, &p) in self.positions.get(&n).into_iter().flatten().enumerate() {
            out[p] = v[i].clone();
        }
        out
    }

    pub fn to_degree(&self, n: i32, v: &[Q]) -> Vec<Q> {
        self.positions.get(&n).into_iter().flatten().map(|&p| v[p].clone()).collect()
    }

    pub fn apply(&self, v: &[Q]) -> Vec<Q> {
        self.d.mul_vec(v)
    }

    /// Total degree of a nonzero homogeneous flat vector.
    pub fn degree_of(&self, v: &[Q]) -> Option<i32> {
        let mut ds = v.iter().zip(&self.degrees).filter(|(x, _)| !x.is_zero()).map(|(_, &d)| d);
        let first = ds.next()?;
        ds.all(|d| d == first).then_some(first)
    }
}

/// The semicosimplicial Čech object of a sheaf datum (all tuples) with its alternating complex.
#[derive(Debug, Clone)]
pub struct CechObject {
    pub opens: usize,
    pub spaces: BTreeMap<u32, DgSpace>,
    restrictions: BTreeMap<(u32, u32), Matrix>,
    /// `blocks[n]` lists the tuples of level `n` in lexicographic order.
    pub blocks: Vec<Vec<Block>>,
    pub object: Semicosimplicial,
    pub cech: CechComplex,
}

impl CechObject {
    pub fn new(sheaf: &dyn SheafDatum, n_max: usize) -> Result<Self, TotError> {
        let opens = sheaf.opens();
        let all = (1u32 << opens) - 1;
        let spaces: BTreeMap<u32, DgSpace> = (1..=all).map(|m| (m, sheaf.space(m))).collect();
        let mut restrictions = BTreeMap::new();
        for &from in spaces.keys() {
            for &to in spaces.keys() {
                if from & to == from {
                    restrictions.insert((from, to), sheaf.restrict(from, to));
                }
            }
        }
        let mut blocks = Vec::new();
        let mut levels = Vec::new();
        for n in 0..=n_max {
            let mut off = 0;
            let mut level = Vec::new();
            for t in tuples(opens, n) {
                let mask = tuple_mask(&t);
                let dim = spaces[&mask].dim();
                level.push(Block { tuple: t, mask, offset: off, dim });
                off += dim;
            }
            let parts: Vec<&DgSpace> = level.iter().map(|b| &spaces[&b.mask]).collect();
            levels.push(DgSpace::direct_sum(&parts));
            blocks.push(level);
        }
        let mut cofaces = vec![vec![]];
        for n in 1..=n_max {
            let mut faces = Vec::new();
            for k in 0..=n {
                let mut m = Matrix::zeros(levels[n].dim(), levels[n - 1].dim());
                for b in &blocks[n] {
                    let src = &blocks[n - 1][tuple_index(opens, &drop_index(&b.tuple, k))];
                    let r = &restrictions[&(src.mask, b.mask)];
                    for i in 0..b.dim {
                        for j in 0..src.dim {
                            m.set(b.offset + i, src.offset + j, r.get(i, j).clone());
                        }
                    }
                }
                faces.push(m);
            }
            cofaces.push(faces);
        }
        let object = Semicosimplicial { levels, cofaces };
        object.check()?;
        let cech = alternating_complex(opens, &spaces, &restrictions)?;
        Ok(CechObject { opens, spaces, restrictions, blocks, object, cech })
    }

    pub fn n_max(&self) -> usize {
        self.object.n_max()
    }

    pub fn restriction(&self, from: u32, to: u32) -> &Matrix {
        &self.restrictions[&(from, to)]
    }

    pub fn level_block(&self, tuple: &[usize]) -> &Block {
        &self.blocks[tuple.len() - 1][tuple_index(self.opens, tuple)]
    }

    /// Embeds block coordinates into the level vector.
    pub fn embed(&self, tuple: &[usize], v: &[Q]) -> Vec<Q> {
        let b = self.level_block(tuple);
        let mut out = zero_vec(self.object.levels[tuple.len() - 1].dim());
        out[b.offset..b.offset + b.dim].clone_from_slice(v);
        out
    }

    pub fn cohomology(&self) -> Result<Cohomology, TotError> {
        Ok(cohomology(&self.cech.complex)?)
    }
}

fn alternating_complex(
    opens: usize,
    spaces: &BTreeMap<u32, DgSpace>,
    restrictions: &BTreeMap<(u32, u32), Matrix>,
) -> Result<CechComplex, TotError> {
    let mut blocks = Vec::new();
    let mut degrees = Vec::new();
    for t in increasing_tuples(opens) {
        let mask = tuple_mask(&t);
        let s = &spaces[&mask];
        blocks.push(Block { tuple: t.clone(), mask, offset: degrees.len(), dim: s.dim() });
        degrees.extend(s.degrees.iter().map(|q| q + t.len() as i32 - 1));
    }
    let dim = degrees.len();
    let mut d = Matrix::zeros(dim, dim);
    for b in &blocks {
        let n = b.tuple.len() - 1;
        let inner = &spaces[&b.mask].d;
        let s = if n % 2 == 0 { Q::one() } else { -Q::one() };
        for i in 0..b.dim {
            for j in 0..b.dim {
                d.add_at(b.offset + i, b.offset + j, &(inner.get(i, j) * &s));
            }
        }
        for c in &blocks {
            if c.tuple.len() != n + 2 || c.mask & b.mask != b.mask {
                continue;
            }
            let k = (0..c.tuple.len()).find(|&k| drop_index(&c.tuple, k) == b.tuple).expect("face");
            let sk = if k % 2 == 0 { Q::one() } else { -Q::one() };
            let r = &restrictions[&(b.mask, c.mask)];
            for i in 0..c.dim {
                for j in 0..b.dim {
                    d.add_at(c.offset + i, b.offset + j, &(r.get(i, j) * &sk));
                }
            }
        }
    }
    let mut positions: BTreeMap<i32, Vec<usize>> = BTreeMap::new();
    for (i, &g) in degrees.iter().enumerate() {
        positions.entry(g).or_default().push(i);
    }
    let mut diffs = BTreeMap::new();
    let mut dims = BTreeMap::new();
    for (&g, ps) in &positions {
        dims.insert(g, ps.len());
        if let Some(next) = positions.get(&(g + 1)) {
            let mut m = Matrix::zeros(next.len(), ps.len());
            for (r, &pr) in next.iter().enumerate() {
                for (c, &pc) in ps.iter().enumerate() {
                    m.set(r, c, d.get(pr, pc).clone());
                }
            }
            diffs.insert(g, m);
        }
    }
    for i in 0..dim {
        for j in 0..dim {
            if !d.get(i, j).is_zero() && degrees[i] != degrees[j] + 1 {
                return Err(TotError::Differential { n: 0 });
            }
        }
    }
    let complex = CochainComplex::from_dims(&dims, diffs)?;
    Ok(CechComplex { blocks, degrees, d, positions, complex })
}

// ---------------------------------------------------------------- Tot

/// An element of `Tot(V)` truncated at level `levels.len() - 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct TotElement {
    pub levels: Vec<SimplexForm<Vec<Q>>>,
}

impl TotElement {
    pub fn zero(n_max: usize) -> Self {
        TotElement { levels: (0..=n_max).map(SimplexForm::zero).collect() }
    }

    pub fn n_max(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn add(&self, o: &Self) -> Self {
        TotElement { levels: self.levels.iter().zip(&o.levels).map(|(a, b)| a.add(b)).collect() }
    }

    pub fn scale(&self, c: &Q) -> Self {
        TotElement { levels: self.levels.iter().map(|a| a.scale(c)).collect() }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(&-Q::one()))
    }

    pub fn is_zero(&self) -> bool {
        self.levels.iter().all(SimplexForm::is_zero)
    }

    pub fn truncate(&self, n: usize) -> Self {
        TotElement { levels: self.levels[..=n].to_vec() }
    }

    /// `(δ_k^* ⊗ Id) x_n = (Id ⊗ δ_k) x_{n-1}` for all `k ≤ n`.
    pub fn check_compatible(&self, obj: &Semicosimplicial) -> Result<(), TotError> {
        for n in 1..self.levels.len() {
            for k in 0..=n {
                let lhs = self.levels[n].pullback(k)?;
                let m = obj.coface(n, k);
                let rhs = self.levels[n - 1].map(|v| m.mul_vec(v));
                if !lhs.sub(&rhs).is_zero() {
                    return Err(TotError::Incompatible { k, n });
                }
            }
        }
        Ok(())
    }

    /// `d_Tot = d_A ⊗ Id + (-1)^{|φ|} Id ⊗ d_V` levelwise.
    pub fn d_tot(&self, obj: &Semicosimplicial) -> Self {
        let levels = self
            .levels
            .iter()
            .enumerate()
            .map(|(n, x)| {
                let dv = x.map_keyed(|k, v| {
                    let w = obj.levels[n].d.mul_vec(v);
                    if k.degree() % 2 == 0 {
                        w
                    } else {
                        scale_vec(&-Q::one(), &w)
                    }
                });
                x.d().add(&dv)
            })
            .collect();
        TotElement { levels }
    }

    /// Total degree (form degree plus inner degree) when homogeneous.
    pub fn degree(&self, obj: &Semicosimplicial) -> Option<i32> {
        let mut ds = Vec::new();
        for (n, x) in self.levels.iter().enumerate() {
            for (k, v) in &x.terms {
                for (i, c) in v.iter().enumerate() {
                    if !c.is_zero() {
                        ds.push(k.degree() as i32 + obj.levels[n].degrees[i]);
                    }
                }
            }
        }
        let first = *ds.first()?;
        ds.iter().all(|&d| d == first).then_some(first)
    }
}

/// Assembles a Tot element from its components after checking compatibility.
pub fn tot_assemble(obj: &Semicosimplicial, levels: Vec<SimplexForm<Vec<Q>>>) -> Result<TotElement, TotError> {
    let x = TotElement { levels };
    x.check_compatible(obj)?;
    Ok(x)
}

/// `I`: integrates each level over the simplex and keeps the strictly increasing tuples.
pub fn whitney_integrate(co: &CechObject, x: &TotElement) -> Vec<Q> {
    let mut out = zero_vec(co.cech.dim());
    let ints: Vec<Option<Vec<Q>>> = x.levels.iter().map(SimplexForm::integrate).collect();
    for b in &co.cech.blocks {
        let n = b.tuple.len() - 1;
        let Some(Some(v)) = ints.get(n) else { continue };
        let lb = co.level_block(&b.tuple);
        out[b.offset..b.offset + b.dim].clone_from_slice(&v[lb.offset..lb.offset + lb.dim]);
    }
    out
}

/// The Whitney section `E(c)` at the truncation level of `co`.
pub fn elementary_section(co: &CechObject, c: &[Q]) -> TotElement {
    let levels = (0..=co.n_max())
        .map(|n| {
            let mut x = SimplexForm::zero(n);
            for b in &co.blocks[n] {
                let part = whitney_component(n, &b.tuple, |sigma| {
                    let cb = co.cech.block(sigma)?;
                    let local = &c[cb.offset..cb.offset + cb.dim];
                    if is_zero_vec(local) {
                        return None;
                    }
                    let r = co.restriction(cb.mask, b.mask).mul_vec(local);
                    Some(co.embed(&b.tuple, &r))
                });
                x = x.add(&part);
            }
            x
        })
        .collect();
    TotElement { levels }
}

/// `ι`: the constant Tot element of a family of local sections that agree on overlaps.
pub fn iota(co: &CechObject, sections: &[Vec<Q>]) -> Result<TotElement, TotError> {
    for i in 0..co.opens {
        for j in i + 1..co.opens {
            let m = (1 << i) | (1 << j);
            let a = co.restriction(1 << i, m).mul_vec(&sections[i]);
            let b = co.restriction(1 << j, m).mul_vec(&sections[j]);
            if a != b {
                return Err(TotError::Disagree { mask: m });
            }
        }
    }
    let levels = (0..=co.n_max())
        .map(|n| {
            let mut v = zero_vec(co.object.levels[n].dim());
            for b in &co.blocks[n] {
                let first = b.tuple[0];
                let r = co.restriction(1 << first, b.mask).mul_vec(&sections[first]);
                v[b.offset..b.offset + b.dim].clone_from_slice(&r);
            }
            SimplexForm::one(n).tensor(&v)
        })
        .collect();
    Ok(TotElement { levels })
}

/// The global-section element of `C^0` for a family of local sections.
pub fn cech_zero_cochain(co: &CechObject, sections: &[Vec<Q>]) -> Vec<Q> {
    let mut out = zero_vec(co.cech.dim());
    for (i, s) in sections.iter().enumerate() {
        let b = co.cech.block(&[i]).expect("open");
        out[b.offset..b.offset + b.dim].clone_from_slice(s);
    }
    out
}

/// Checks that `x` is the Whitney section of its own integral and that this section,
/// built on the object `co` one level higher, is compatible there.
pub fn faithful_at(co: &CechObject, x: &TotElement) -> Result<(), TotError> {
    let n = x.n_max();
    if co.n_max() != n + 1 {
        return Err(TotError::NotFaithful { n });
    }
    let rebuilt = elementary_section(co, &whitney_integrate(co, x));
    rebuilt.check_compatible(&co.object)?;
    if rebuilt.truncate(n) != *x {
        return Err(TotError::NotFaithful { n });
    }
    Ok(())
}

/// Scalar polynomial forms indexed by level and tuple, acting on Tot elements blockwise.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarTot {
    pub opens: usize,
    pub levels: Vec<Vec<SimplexForm<Q>>>,
}

impl ScalarTot {
    /// `Σ_a t_a λ_{τ_a}` from a function on the opens.
    pub fn whitney(opens: usize, n_max: usize, lambda: &[Q]) -> Self {
        let levels = (0..=n_max)
            .map(|n| {
                tuples(opens, n)
                    .iter()
                    .map(|t| whitney_component(n, t, |s| (s.len() == 1).then(|| lambda[s[0]].clone())))
                    .collect()
            })
            .collect();
        ScalarTot { opens, levels }
    }

    pub fn mul(&self, o: &Self) -> Self {
        let levels = self.levels.iter().zip(&o.levels).map(|(a, b)| a.iter().zip(b).map(|(x, y)| x.mul(y)).collect()).collect();
        ScalarTot { opens: self.opens, levels }
    }

    pub fn d(&self) -> Self {
        ScalarTot { opens: self.opens, levels: self.levels.iter().map(|l| l.iter().map(SimplexForm::d).collect()).collect() }
    }

    /// Left multiplication on a Tot element of `co`.
    pub fn act(&self, co: &CechObject, x: &TotElement) -> TotElement {
        let levels = x
            .levels
            .iter()
            .enumerate()
            .map(|(n, xn)| {
                let mut out = SimplexForm::zero(n);
                for (i, b) in co.blocks[n].iter().enumerate() {
                    let part = xn.map(|v| {
                        let mut w = zero_vec(v.len());
                        w[b.offset..b.offset + b.dim].clone_from_slice(&v[b.offset..b.offset + b.dim]);
                        w
                    });
                    out = out.add(&mul_with(&self.levels[n][i], &part, |a, v, _| scale_vec(a, v)));
                }
                out
            })
            .collect();
        TotElement { levels }
    }
}

// ---------------------------------------------------------------- Laurent matrices

/// A square matrix of Laurent polynomials in `t`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LMatrix {
    pub n: usize,
    pub entries: Vec<Laurent>,
}

impl LMatrix {
    pub fn zero(n: usize) -> Self {
        LMatrix { n, entries: vec![Laurent::zero(); n * n] }
    }

    pub fn identity(n: usize) -> Self {
        Self::scalar(n, &Laurent::constant(Q::one()))
    }

    pub fn scalar(n: usize, l: &Laurent) -> Self {
        let mut m = Self::zero(n);
        for i in 0..n {
            m.entries[i * n + i] = l.clone();
        }
        m
    }

    pub fn from_matrix(m: &Matrix) -> Self {
        LMatrix { n: m.rows, entries: (0..m.rows * m.cols).map(|i| Laurent::constant(m.get(i / m.cols, i % m.cols).clone())).collect() }
    }

    pub fn get(&self, i: usize, j: usize) -> &Laurent {
        &self.entries[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, l: Laurent) {
        self.entries[i * self.n + j] = l;
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(Laurent::is_zero)
    }

    pub fn add(&self, o: &Self) -> Self {
        LMatrix { n: self.n, entries: self.entries.iter().zip(&o.entries).map(|(a, b)| a.add(b)).collect() }
    }

    pub fn sub(&self, o: &Self) -> Self {
        LMatrix { n: self.n, entries: self.entries.iter().zip(&o.entries).map(|(a, b)| a.sub(b)).collect() }
    }

    pub fn scale(&self, c: &Q) -> Self {
        LMatrix { n: self.n, entries: self.entries.iter().map(|a| a.scale(c)).collect() }
    }

    pub fn scale_laurent(&self, l: &Laurent) -> Self {
        LMatrix { n: self.n, entries: self.entries.iter().map(|a| a.mul(l)).collect() }
    }

    pub fn mul(&self, o: &Self) -> Self {
        let n = self.n;
        let mut r = Self::zero(n);
        for i in 0..n {
            for j in 0..n {
                let mut acc = Laurent::zero();
                for k in 0..n {
                    acc = acc.add(&self.get(i, k).mul(o.get(k, j)));
                }
                r.set(i, j, acc);
            }
        }
        r
    }

    pub fn commutator(&self, o: &Self) -> Self {
        self.mul(o).sub(&o.mul(self))
    }

    pub fn derivative(&self) -> Self {
        LMatrix { n: self.n, entries: self.entries.iter().map(Laurent::derivative).collect() }
    }

    pub fn transpose(&self) -> Self {
        let mut r = Self::zero(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                r.set(j, i, self.get(i, j).clone());
            }
        }
        r
    }

    pub fn apply(&self, v: &[Laurent]) -> Vec<Laurent> {
        (0..self.n)
            .map(|i| (0..self.n).fold(Laurent::zero(), |acc, j| acc.add(&self.get(i, j).mul(&v[j]))))
            .collect()
    }

    /// Kronecker product, acting on row-major vectorizations.
    pub fn kron(&self, o: &Self) -> Self {
        let n = self.n * o.n;
        let mut r = Self::zero(n);
        for i in 0..self.n {
            for j in 0..self.n {
                for k in 0..o.n {
                    for l in 0..o.n {
                        r.set(i * o.n + k, j * o.n + l, self.get(i, j).mul(o.get(k, l)));
                    }
                }
            }
        }
        r
    }

    fn minor(&self, row: usize, col: usize) -> Self {
        let n = self.n - 1;
        let mut entries = Vec::with_capacity(n * n);
        for i in (0..self.n).filter(|&i| i != row) {
            for j in (0..self.n).filter(|&j| j != col) {
                entries.push(self.get(i, j).clone());
            }
        }
        LMatrix { n, entries }
    }

    pub fn det(&self) -> Laurent {
        match self.n {
            0 => Laurent::constant(Q::one()),
            1 => self.entries[0].clone(),
            _ => (0..self.n).fold(Laurent::zero(), |acc, j| {
                let term = self.get(0, j).mul(&self.minor(0, j).det());
                if j % 2 == 0 {
                    acc.add(&term)
                } else {
                    acc.sub(&term)
                }
            }),
        }
    }

    /// Inverse when the determinant is a unit monomial `c t^e`.
    pub fn inverse(&self) -> Option<Self> {
        let (c, e) = self.det().as_monomial()?;
        let inv_det = Laurent::monomial(c.recip(), -e);
        if self.n == 1 {
            return Some(LMatrix { n: 1, entries: vec![inv_det] });
        }
        let mut r = Self::zero(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                let cof = self.minor(j, i).det().mul(&inv_det);
                r.set(i, j, if (i + j) % 2 == 0 { cof } else { cof.scale(&-Q::one()) });
            }
        }
        Some(r)
    }
}

impl Coeff for LMatrix {
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

impl std::fmt::Display for LMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let rows: Vec<String> = (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j).to_string()).collect::<Vec<_>>().join(", "))
            .collect();
        write!(f, "[{}]", rows.join("; "))
    }
}

// ---------------------------------------------------------------- two-chart model

/// Window-truncated Laurent data that can be rebuilt on a wider window.
pub trait Windowed: SheafDatum + Sized {
    fn window(&self) -> (i64, i64);
    fn with_window(&self, lo: i64, hi: i64) -> Self;
}

/// A free module of rank `r` on the cover of the projective line by the chart at infinity
/// (open 0, coordinate `s = t⁻¹`) and the chart at zero (open 1, coordinate `t`).
///
/// Sections are written in the frame of the chart at zero; a section over the chart at infinity
/// is `G·g(t⁻¹)` with `g` polynomial. Coefficients are kept in the window `[lo, hi]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoChartModel {
    pub rank: usize,
    pub transition: LMatrix,
    inverse: LMatrix,
    /// Inner degree of the sections.
    pub degree: i32,
    pub window: (i64, i64),
}

impl TwoChartModel {
    pub fn new(transition: LMatrix, degree: i32, window: (i64, i64)) -> Result<Self, TotError> {
        let inverse = transition.inverse().ok_or(TotError::Transition)?;
        if window.0 > window.1 {
            return Err(TotError::OutsideWindow);
        }
        Ok(TwoChartModel { rank: transition.n, transition, inverse, degree, window })
    }

    /// `O(n)`: sections over the chart at infinity are `t^n g(t⁻¹)`.
    pub fn line_bundle(n: i64, window: (i64, i64)) -> Self {
        let g = LMatrix { n: 1, entries: vec![Laurent::monomial(Q::one(), n)] };
        Self::new(g, 0, window).expect("unit monomial")
    }

    /// Window wide enough for every cohomology class of the model, from the transition exponents.
    pub fn default_window(&self) -> (i64, i64) {
        let exps = self.transition.entries.iter().chain(&self.inverse.entries).flat_map(|l| [l.min_exp(), l.max_exp()]).flatten();
        let reach = exps.map(i64::abs).max().unwrap_or(0);
        (-reach - 2, reach + 2)
    }

    /// `End E` with transition `G ⊗ G⁻ᵀ` on row-major vectorizations.
    pub fn end(&self) -> Self {
        let g = self.transition.kron(&self.inverse.transpose());
        Self::new(g, self.degree, self.window).expect("invertible")
    }

    /// `Ω¹ ⊗ E` in the frame `dt`, shifted to inner degree `degree + 1`: `ds = -t⁻² dt`.
    pub fn omega1(&self) -> Self {
        let g = self.transition.scale_laurent(&Laurent::monomial(-Q::one(), -2));
        Self::new(g, self.degree + 1, (self.window.0 - 1, self.window.1 - 1)).expect("invertible")
    }

    fn width(&self) -> usize {
        (self.window.1 - self.window.0 + 1) as usize
    }

    /// Window coordinates of a vector of Laurent polynomials.
    pub fn vector(&self, v: &[Laurent]) -> Option<Vec<Q>> {
        let mut out = Vec::with_capacity(self.rank * self.width());
        for l in v {
            let (w, truncated) = LaurentWindow::from_laurent("t", self.window.0, self.window.1, l);
            if truncated {
                return None;
            }
            out.extend((self.window.0..=self.window.1).map(|e| w.coeff(e)));
        }
        Some(out)
    }

    pub fn laurent(&self, v: &[Q]) -> Vec<Laurent> {
        let w = self.width();
        (0..self.rank)
            .map(|i| {
                let mut l = Laurent::zero();
                for (j, c) in v[i * w..(i + 1) * w].iter().enumerate() {
                    l.add_term(self.window.0 + j as i64, c);
                }
                l
            })
            .collect()
    }

    /// Sections over the intersection `set`, as a subspace of the window coordinates.
    pub fn subspace(&self, set: u32) -> Subspace {
        let w = self.width();
        let ambient = self.rank * w;
        match set {
            0b10 => Subspace::span(
                ambient,
                (0..self.rank).flat_map(|i| {
                    (0..w).filter(|&j| self.window.0 + j as i64 >= 0).map(move |j| unit_vec(ambient, i * w + j))
                }),
            ),
            0b01 => {
                let mut rows: BTreeMap<(usize, i64), Vec<Q>> = BTreeMap::new();
                for col in 0..ambient {
                    let mut v = vec![Laurent::zero(); self.rank];
                    v[col / w] = Laurent::monomial(Q::one(), self.window.0 + (col % w) as i64);
                    for (i, l) in self.inverse.apply(&v).iter().enumerate() {
                        for (&e, c) in &l.0 {
                            if e > 0 {
                                rows.entry((i, e)).or_insert_with(|| zero_vec(ambient))[col] = c.clone();
                            }
                        }
                    }
                }
                let m = Matrix::from_rows(rows.into_values().collect());
                if m.rows == 0 {
                    Subspace::full(ambient)
                } else {
                    Subspace::span(ambient, rank_kernel_image(&m).kernel)
                }
            }
            _ => Subspace::full(ambient),
        }
    }

    /// Block coordinates of a Laurent section over `set`.
    pub fn section_coords(&self, set: u32, v: &[Laurent]) -> Result<Vec<Q>, TotError> {
        let x = self.vector(v).ok_or(TotError::OutsideWindow)?;
        let s = self.subspace(set);
        if !s.contains(&x) {
            return Err(TotError::OutsideWindow);
        }
        Ok(s.coords(&x))
    }

    pub fn section_laurent(&self, set: u32, coords: &[Q]) -> Vec<Laurent> {
        let s = self.subspace(set);
        let mut v = zero_vec(self.rank * self.width());
        for (c, b) in coords.iter().zip(s.basis()) {
            v = add_vec(&v, &scale_vec(c, b));
        }
        self.laurent(&v)
    }
}

fn inclusion_matrix(from: &Subspace, to: &Subspace) -> Matrix {
    let cols: Vec<Vec<Q>> = from.basis().iter().map(|b| to.coords(b)).collect();
    Matrix::from_columns(to.dim(), &cols)
}

impl SheafDatum for TwoChartModel {
    fn opens(&self) -> usize {
        2
    }
    fn space(&self, set: u32) -> DgSpace {
        DgSpace::discrete(self.degree, self.subspace(set).dim())
    }
    fn restrict(&self, from: u32, to: u32) -> Matrix {
        inclusion_matrix(&self.subspace(from), &self.subspace(to))
    }
}

impl Windowed for TwoChartModel {
    fn window(&self) -> (i64, i64) {
        self.window
    }
    fn with_window(&self, lo: i64, hi: i64) -> Self {
        Self::new(self.transition.clone(), self.degree, (lo, hi)).expect("invertible")
    }
}

/// The algebraic de Rham complex `O → Ω¹` of the projective line on the two-chart cover.
#[derive(Debug, Clone, PartialEq)]
pub struct P1DeRham {
    pub functions: TwoChartModel,
    pub forms: TwoChartModel,
}

impl P1DeRham {
    pub fn new(window: (i64, i64)) -> Self {
        let functions = TwoChartModel::line_bundle(0, window);
        let forms = functions.omega1();
        P1DeRham { functions, forms }
    }
}

impl SheafDatum for P1DeRham {
    fn opens(&self) -> usize {
        2
    }
    fn space(&self, set: u32) -> DgSpace {
        let so = self.functions.subspace(set);
        let sw = self.forms.subspace(set);
        let (a, b) = (so.dim(), sw.dim());
        let mut d = Matrix::zeros(a + b, a + b);
        for (j, v) in so.basis().iter().enumerate() {
            let f = &self.functions.laurent(v)[0];
            let df = self.forms.vector(&[f.derivative()]).expect("derivative stays in the shifted window");
            for (i, c) in sw.coords(&df).into_iter().enumerate() {
                d.set(a + i, j, c);
            }
        }
        let mut degrees = vec![0; a];
        degrees.extend(vec![1; b]);
        DgSpace { degrees, d }
    }
    fn restrict(&self, from: u32, to: u32) -> Matrix {
        let f = SheafDatum::restrict(&self.functions, from, to);
        let w = SheafDatum::restrict(&self.forms, from, to);
        let mut m = Matrix::zeros(f.rows + w.rows, f.cols + w.cols);
        for i in 0..f.rows {
            for j in 0..f.cols {
                m.set(i, j, f.get(i, j).clone());
            }
        }
        for i in 0..w.rows {
            for j in 0..w.cols {
                m.set(f.rows + i, f.cols + j, w.get(i, j).clone());
            }
        }
        m
    }
}

impl Windowed for P1DeRham {
    fn window(&self) -> (i64, i64) {
        self.functions.window
    }
    fn with_window(&self, lo: i64, hi: i64) -> Self {
        P1DeRham::new((lo, hi))
    }
}

/// Hypercohomology of a windowed sheaf datum with a window-stability check.
#[derive(Debug, Clone)]
pub struct CechReport {
    pub window: (i64, i64),
    pub dims: BTreeMap<i32, usize>,
    /// Representatives as flat alternating cochains.
    pub representatives: BTreeMap<i32, Vec<Vec<Q>>>,
    pub widened: (i64, i64),
    pub widened_dims: BTreeMap<i32, usize>,
    pub stable: bool,
}

fn nonzero_dims(h: &Cohomology) -> BTreeMap<i32, usize> {
    h.groups.iter().map(|(&n, g)| (n, g.dim)).filter(|&(_, d)| d > 0).collect()
}

pub fn cech_cohomology<S: Windowed>(sheaf: &S) -> Result<CechReport, TotError> {
    let co = CechObject::new(sheaf, 1)?;
    let h = co.cohomology()?;
    let window = sheaf.window();
    let widened = LaurentWindow::widened(window.0, window.1);
    let wide = CechObject::new(&sheaf.with_window(widened.0, widened.1), 1)?;
    let wide_h = wide.cohomology()?;
    let dims = nonzero_dims(&h);
    let widened_dims = nonzero_dims(&wide_h);
    let representatives = h
        .groups
        .iter()
        .filter(|(_, g)| g.dim > 0)
        .map(|(&n, g)| (n, g.representatives.iter().map(|r| co.cech.from_degree(n, r)).collect()))
        .collect();
    Ok(CechReport { window, stable: dims == widened_dims, dims, representatives, widened, widened_dims })
}

// ---------------------------------------------------------------- simplicial connections

/// Local connection matrices `∇_i = d + Γ_i dt` per open, in a common frame.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplicialConnection {
    pub local: Vec<LMatrix>,
}

/// Coordinate connections of a two-chart model: `Γ_∞ = -dG·G⁻¹` and `Γ_0 = 0`.
pub fn coordinate_connections(model: &TwoChartModel) -> Vec<LMatrix> {
    vec![model.transition.derivative().mul(&model.inverse).scale(&-Q::one()), LMatrix::zero(model.rank)]
}

pub fn build_simplicial_connection(local: Vec<LMatrix>) -> SimplicialConnection {
    SimplicialConnection { local }
}

impl SimplicialConnection {
    /// `Σ_a t_a ⊗ Γ_{τ_a}` at one tuple, the `dt`-coefficient of the level-`n` component.
    pub fn component(&self, n: usize, tuple: &[usize]) -> SimplexForm<LMatrix> {
        whitney_component(n, tuple, |s| (s.len() == 1).then(|| self.local[s[0]].clone()))
    }

    /// `d_Tot ∇` at one tuple: `Σ_a dt_a ⊗ (Γ_{τ_a} - Γ_{τ_0})`.
    pub fn d_tot_component(&self, n: usize, tuple: &[usize]) -> SimplexForm<LMatrix> {
        let mut r = SimplexForm::zero(n);
        for (a, &i) in tuple.iter().enumerate() {
            let diff = self.local[i].sub(&self.local[tuple[0]]);
            r = r.add(&SimplexForm::dt(n, a).tensor(&diff));
        }
        r
    }

    /// `d_Tot ∇` as an element of `Tot(U, Ω¹ ⊗ End E)` for the target model.
    pub fn d_tot(&self, co: &CechObject, target: &TwoChartModel) -> Result<TotElement, TotError> {
        let mut levels = Vec::new();
        for n in 0..=co.n_max() {
            let mut x = SimplexForm::zero(n);
            for b in &co.blocks[n] {
                for (k, m) in &self.d_tot_component(n, &b.tuple).terms {
                    let coords = target.section_coords(b.mask, &m.entries)?;
                    x.add_term(k.clone(), &co.embed(&b.tuple, &coords));
                }
            }
            levels.push(x);
        }
        Ok(TotElement { levels })
    }
}

/// The Atiyah class of a two-chart module through `d_Tot ∇` and Whitney integration.
#[derive(Debug, Clone)]
pub struct TwoChartAtiyah {
    pub target: TwoChartModel,
    /// `I(d_Tot ∇)` as a flat Čech cochain of `Ω¹ ⊗ End E`.
    pub cocycle: Vec<Q>,
    /// The `(0, 1)` component as a Laurent matrix.
    pub transition_part: LMatrix,
    pub class: Vec<Q>,
    pub h1_dim: usize,
}

pub fn two_chart_atiyah(model: &TwoChartModel, n_max: usize) -> Result<TwoChartAtiyah, TotError> {
    let target = model.end().omega1();
    let (lo, hi) = target.default_window();
    let target = target.with_window(lo.min(target.window.0), hi.max(target.window.1));
    let co = CechObject::new(&target, n_max)?;
    let conn = build_simplicial_connection(coordinate_connections(model));
    let x = conn.d_tot(&co, &target)?;
    x.check_compatible(&co.object)?;
    let cocycle = whitney_integrate(&co, &x);
    let b = co.cech.block(&[0, 1]).expect("overlap");
    let entries = target.section_laurent(0b11, &cocycle[b.offset..b.offset + b.dim]);
    let transition_part = LMatrix { n: model.rank, entries };
    let h = co.cohomology()?;
    let deg = target.degree + 1;
    let g = h.group(deg);
    let class = g.class_of(&co.cech.to_degree(deg, &cocycle));
    Ok(TwoChartAtiyah { target, cocycle, transition_part, class, h1_dim: g.dim })
}

/// The class in `H¹(Ω¹ ⊗ End E)` of the Čech cocycle with overlap component `m`.
pub fn class_of_overlap(target: &TwoChartModel, m: &LMatrix) -> Result<Vec<Q>, TotError> {
    let co = CechObject::new(target, 1)?;
    let coords = target.section_coords(0b11, &m.entries)?;
    let b = co.cech.block(&[0, 1]).expect("overlap");
    let mut c = zero_vec(co.cech.dim());
    c[b.offset..b.offset + b.dim].clone_from_slice(&coords);
    let deg = target.degree + 1;
    let h = co.cohomology()?;
    Ok(h.group(deg).class_of(&co.cech.to_degree(deg, &c)))
}

// ---------------------------------------------------------------- curved Tot algebra

/// `Tot(U, Ω*(L) ⊗ End E)` on chart data with a simplicial connection, as a curved algebra.
///
/// Elements are per level and tuple polynomial forms with coefficients `Ω*(L) ⊗ End E`
/// over Laurent polynomials; no window truncation is involved.
#[derive(Debug, Clone, PartialEq)]
pub struct ChartTot {
    pub spec: LieAlgebroidSpec,
    pub opens: usize,
    pub n_max: usize,
    /// `local[i]` is the connection form of open `i`, a degree-one `End E`-valued form.
    pub local: Vec<Form<LMatrix>>,
    /// Directions of the subalgebroid; the ideal is generated by the dual forms of the others.
    pub sub: Vec<usize>,
}

/// Components indexed by level and lexicographic tuple.
#[derive(Debug, Clone, PartialEq)]
pub struct ChartTotElem {
    pub levels: Vec<Vec<SimplexForm<Form<LMatrix>>>>,
}

fn form_degree_parity(m: u32, psi: u32) -> Q {
    if (m.count_ones() * psi) % 2 == 0 {
        Q::one()
    } else {
        -Q::one()
    }
}

fn lform_mul(a: &Form<LMatrix>, b: &Form<LMatrix>, psi: u32) -> Form<LMatrix> {
    let mut out = Form::zero(a.rank);
    for (s, x) in &a.terms {
        for (t, y) in &b.terms {
            if s & t != 0 {
                continue;
            }
            let sign = q(mask_sign(*s, *t) as i64) * form_degree_parity(*s, psi);
            out.add_term(s | t, &x.mul(y).scale(&sign));
        }
    }
    out
}

/// Entrywise algebroid de Rham differential.
pub fn lform_derham(spec: &LieAlgebroidSpec, a: &Form<LMatrix>) -> Form<LMatrix> {
    let n = a.terms.values().next().map_or(0, |m| m.n);
    let mut out = Form::zero(a.rank);
    for idx in 0..n * n {
        let mut scalar = Form::zero(a.rank);
        for (m, x) in &a.terms {
            scalar.add_term(*m, &x.entries[idx]);
        }
        for (m, l) in &derham_differential(spec, &scalar).terms {
            let mut e = LMatrix::zero(n);
            e.entries[idx] = l.clone();
            out.add_term(*m, &e);
        }
    }
    out
}

impl ChartTot {
    /// Checks that on each open the connection restricts along the subalgebroid to `sub_connection`.
    pub fn new(
        spec: LieAlgebroidSpec,
        local: Vec<Form<LMatrix>>,
        n_max: usize,
        sub: Vec<usize>,
        sub_connection: Option<&Form<LMatrix>>,
    ) -> Result<Self, TotError> {
        if let Some(a) = sub_connection {
            let sub_mask = sub.iter().fold(0u32, |m, &i| m | (1 << i));
            for (open, g) in local.iter().enumerate() {
                let mut restricted = Form::zero(spec.rank());
                for (m, x) in &g.terms {
                    if m & !sub_mask == 0 {
                        restricted.add_term(*m, x);
                    }
                }
                if !restricted.sub(a).is_zero() {
                    return Err(TotError::NotLifting { open });
                }
            }
        }
        Ok(ChartTot { spec, opens: local.len(), n_max, local, sub })
    }

    fn complement_mask(&self) -> u32 {
        let sub_mask = self.sub.iter().fold(0u32, |m, &i| m | (1 << i));
        ((1u32 << self.spec.rank()) - 1) & !sub_mask
    }

    /// `Γ` at one tuple: `Σ_a t_a ⊗ Γ_{τ_a}`.
    pub fn gamma(&self, n: usize, tuple: &[usize]) -> SimplexForm<Form<LMatrix>> {
        whitney_component(n, tuple, |s| (s.len() == 1).then(|| self.local[s[0]].clone()))
    }

    pub fn gamma_elem(&self) -> ChartTotElem {
        self.from_fn(|n, t| self.gamma(n, t))
    }

    pub fn from_fn(&self, f: impl Fn(usize, &[usize]) -> SimplexForm<Form<LMatrix>>) -> ChartTotElem {
        ChartTotElem { levels: (0..=self.n_max).map(|n| tuples(self.opens, n).iter().map(|t| f(n, t)).collect()).collect() }
    }

    /// `ι` of a global form.
    pub fn constant(&self, f: &Form<LMatrix>) -> ChartTotElem {
        self.from_fn(|n, _| SimplexForm::one(n).tensor(f))
    }

    /// Whitney section of an alternating cochain of forms.
    pub fn whitney(&self, c: impl Fn(&[usize]) -> Option<Form<LMatrix>>) -> ChartTotElem {
        self.from_fn(|n, t| whitney_component(n, t, &c))
    }

    pub fn compatible(&self, x: &ChartTotElem) -> bool {
        (1..=self.n_max).all(|n| {
            tuples(self.opens, n).iter().enumerate().all(|(i, t)| {
                (0..=n).all(|k| {
                    let face = &x.levels[n - 1][tuple_index(self.opens, &drop_index(t, k))];
                    x.levels[n][i].pullback(k).map(|p| p.sub(face).is_zero()).unwrap_or(false)
                })
            })
        })
    }

    /// Every coefficient form lies in the ideal generated by the complement directions.
    pub fn in_ideal(&self, x: &ChartTotElem) -> bool {
        let c = self.complement_mask();
        x.levels.iter().flatten().flat_map(|f| f.terms.values()).flat_map(|g| g.terms.keys()).all(|m| m & c != 0)
    }

    fn zip(&self, a: &ChartTotElem, b: &ChartTotElem, f: impl Fn(&SimplexForm<Form<LMatrix>>, &SimplexForm<Form<LMatrix>>) -> SimplexForm<Form<LMatrix>>) -> ChartTotElem {
        ChartTotElem { levels: a.levels.iter().zip(&b.levels).map(|(x, y)| x.iter().zip(y).map(|(u, v)| f(u, v)).collect()).collect() }
    }

    fn map(&self, a: &ChartTotElem, f: impl Fn(&SimplexForm<Form<LMatrix>>) -> SimplexForm<Form<LMatrix>>) -> ChartTotElem {
        ChartTotElem { levels: a.levels.iter().map(|x| x.iter().map(&f).collect()).collect() }
    }

    /// `d_A + (-1)^{|φ|} d_L`, without the connection term.
    pub fn d0(&self, a: &ChartTotElem) -> ChartTotElem {
        self.map(a, |x| {
            let inner = x.map_keyed(|k, f| {
                let g = lform_derham(&self.spec, f);
                if k.degree() % 2 == 0 {
                    g
                } else {
                    g.scale(&-Q::one())
                }
            });
            x.d().add(&inner)
        })
    }

    fn split(&self, a: &ChartTotElem) -> BTreeMap<i32, ChartTotElem> {
        let mut out: BTreeMap<i32, ChartTotElem> = BTreeMap::new();
        for (n, level) in a.levels.iter().enumerate() {
            for (i, x) in level.iter().enumerate() {
                for (k, f) in &x.terms {
                    for (m, c) in &f.terms {
                        let deg = (k.degree() + m.count_ones()) as i32;
                        let e = out.entry(deg).or_insert_with(|| self.zero());
                        let mut g = Form::zero(f.rank);
                        g.add_term(*m, c);
                        e.levels[n][i].add_term(k.clone(), &g);
                    }
                }
            }
        }
        out
    }

}

impl CurvedAlgebra for ChartTot {
    type Elem = ChartTotElem;

    fn zero(&self) -> ChartTotElem {
        self.from_fn(|n, _| SimplexForm::zero(n))
    }

    fn add(&self, a: &ChartTotElem, b: &ChartTotElem) -> ChartTotElem {
        self.zip(a, b, |x, y| x.add(y))
    }

    fn scale(&self, a: &ChartTotElem, c: &Q) -> ChartTotElem {
        self.map(a, |x| x.scale(c))
    }

    fn is_zero(&self, a: &ChartTotElem) -> bool {
        a.levels.iter().flatten().all(SimplexForm::is_zero)
    }

    fn mul(&self, a: &ChartTotElem, b: &ChartTotElem) -> ChartTotElem {
        self.zip(a, b, |x, y| mul_with(x, y, |f, g, psi| lform_mul(f, g, psi)))
    }

    fn d(&self, a: &ChartTotElem) -> ChartTotElem {
        let gamma = self.gamma_elem();
        let mut out = self.d0(a);
        for (deg, part) in self.split(a) {
            let s = if deg % 2 == 0 { -Q::one() } else { Q::one() };
            let br = self.add(&self.mul(&gamma, &part), &self.scale(&self.mul(&part, &gamma), &s));
            out = self.add(&out, &br);
        }
        out
    }

    fn curvature(&self) -> ChartTotElem {
        let g = self.gamma_elem();
        self.add(&self.d0(&g), &self.mul(&g, &g))
    }

    fn degree(&self, a: &ChartTotElem) -> Option<i32> {
        let parts = self.split(a);
        if parts.len() == 1 {
            parts.keys().next().copied()
        } else {
            None
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::qr;

    #[test]
    fn integrals_on_the_interval() {
        assert_eq!(SimplexForm::dt(1, 1).integrate(), Some(q(1)));
        assert_eq!(SimplexForm::t(1, 1).mul(&SimplexForm::dt(1, 1)).integrate(), Some(qr(1, 2)));
        let vol2 = SimplexForm::dt(2, 1).mul(&SimplexForm::dt(2, 2));
        assert_eq!(vol2.integrate(), Some(qr(1, 2)));
    }

    #[test]
    fn face_pullbacks() {
        let t1 = SimplexForm::t(1, 1);
        assert_eq!(t1.pullback(0).unwrap(), SimplexForm::one(0));
        assert!(t1.pullback(1).unwrap().is_zero());
        let x = SimplexForm::t(2, 0).mul(&SimplexForm::dt(2, 1));
        let p = x.pullback(1).unwrap();
        assert!(p.is_zero());
        let p = x.pullback(2).unwrap();
        assert_eq!(p, SimplexForm::t(1, 0).mul(&SimplexForm::dt(1, 1)));
        assert!(SimplexForm::t(1, 0).pullback(2).is_err());
    }

    #[test]
    fn cosimplicial_identities_on_forms() {
        let x = SimplexForm::t(3, 1).mul(&SimplexForm::t(3, 2)).mul(&SimplexForm::dt(3, 3)).add(&SimplexForm::dt(3, 0));
        for j in 1..=3 {
            for i in 0..j {
                let lhs = x.pullback(j).unwrap().pullback(i).unwrap();
                let rhs = x.pullback(i).unwrap().pullback(j - 1).unwrap();
                assert_eq!(lhs, rhs);
            }
        }
        assert_eq!(x.d().pullback(1).unwrap(), x.pullback(1).unwrap().d());
    }

    #[test]
    fn whitney_form_on_an_edge() {
        let w = whitney_form(1, &[0, 1]);
        let expected = SimplexForm::t(1, 0).mul(&SimplexForm::dt(1, 1)).sub(&SimplexForm::t(1, 1).mul(&SimplexForm::dt(1, 0)));
        assert_eq!(w, expected);
        assert_eq!(w, SimplexForm::dt(1, 1));
    }

    #[test]
    fn line_bundle_cohomology() {
        for n in 0..=3 {
            let r = cech_cohomology(&TwoChartModel::line_bundle(n, (-6, 6))).unwrap();
            assert_eq!(r.dims.get(&0).copied().unwrap_or(0), n as usize + 1);
            assert!(r.stable);
        }
        let r = cech_cohomology(&TwoChartModel::line_bundle(-3, (-6, 6))).unwrap();
        assert_eq!(r.dims.get(&1).copied(), Some(2));
        assert_eq!(r.dims.get(&0), None);
    }

    #[test]
    fn de_rham_of_the_line() {
        let r = cech_cohomology(&P1DeRham::new((-4, 4))).unwrap();
        assert_eq!(r.dims, BTreeMap::from([(0, 1), (2, 1)]));
        assert!(r.stable);
    }

    #[test]
    fn integration_inverts_whitney_sections() {
        let co = CechObject::new(&P1DeRham::new((-3, 3)), 3).unwrap();
        let c: Vec<Q> = (0..co.cech.dim()).map(|i| q((i as i64 * 7) % 5 - 2)).collect();
        let e = elementary_section(&co, &c);
        e.check_compatible(&co.object).unwrap();
        assert_eq!(whitney_integrate(&co, &e), c);
        let lhs = whitney_integrate(&co, &e.d_tot(&co.object));
        assert_eq!(lhs, co.cech.apply(&c));
    }

    #[test]
    fn iota_integrates_to_restrictions() {
        let m = TwoChartModel::line_bundle(2, (-4, 4));
        let co = CechObject::new(&m, 2).unwrap();
        let f = [Laurent::monomial(q(1), 0).add(&Laurent::monomial(q(3), 2))];
        let secs = vec![m.section_coords(0b01, &f).unwrap(), m.section_coords(0b10, &f).unwrap()];
        let x = iota(&co, &secs).unwrap();
        x.check_compatible(&co.object).unwrap();
        assert_eq!(whitney_integrate(&co, &x), cech_zero_cochain(&co, &secs));
        let mut bad = x.clone();
        bad.levels[1] = bad.levels[1].scale(&q(2));
        assert_eq!(bad.check_compatible(&co.object), Err(TotError::Incompatible { k: 0, n: 1 }));
    }

    #[test]
    fn atiyah_of_line_bundles() {
        for n in -2..=3 {
            let m = TwoChartModel::line_bundle(n, (-4, 4));
            let at = two_chart_atiyah(&m, 2).unwrap();
            let expected = LMatrix { n: 1, entries: vec![Laurent::monomial(q(n), -1)] };
            assert_eq!(at.transition_part, expected);
            assert_eq!(at.class, class_of_overlap(&at.target, &expected).unwrap());
            assert_eq!(is_zero_vec(&at.class), n == 0);
        }
    }

    #[test]
    fn chart_tot_is_curved() {
        use crate::curved::check_curved_on;
        let spec = LieAlgebroidSpec::point(&["x", "y"], &[]);
        let a = LMatrix::from_matrix(&Matrix::from_i64(&[&[0, 1], &[0, 0]]));
        let b = LMatrix::from_matrix(&Matrix::from_i64(&[&[1, 0], &[0, -1]]));
        let g0 = Form::term(2, &[0], a.clone()).add(&Form::term(2, &[1], b.clone()));
        let g1 = Form::term(2, &[0], a.clone());
        let alg = ChartTot::new(spec, vec![g0, g1], 2, vec![0], Some(&Form::term(2, &[0], a.clone()))).unwrap();
        let samples = vec![
            alg.constant(&Form::term(2, &[1], b.clone())),
            alg.constant(&Form::term(2, &[], a.clone())),
            alg.whitney(|s| (s.len() == 2).then(|| Form::term(2, &[], b.clone()))),
        ];
        for s in &samples {
            assert!(alg.compatible(s));
        }
        check_curved_on(&alg, &samples).unwrap();
        assert!(alg.in_ideal(&alg.curvature()));
        let wrong = ChartTot::new(alg.spec.clone(), alg.local.clone(), 2, vec![0], Some(&Form::term(2, &[0], b)));
        assert_eq!(wrong.unwrap_err(), TotError::NotLifting { open: 0 });
    }

    fn lform(f: &Form<Matrix>) -> Form<LMatrix> {
        let mut out = Form::zero(f.rank);
        for (m, x) in &f.terms {
            out.add_term(*m, &LMatrix::from_matrix(x));
        }
        out
    }

    #[test]
    fn one_open_collapses_to_the_point() {
        use crate::algebroid::{curvature, Connection};
        let spec = crate::catalog::sl2();
        let conn = Connection::new(
            2,
            vec![
                Matrix::from_i64(&[&[1, 2], &[0, 1]]),
                Matrix::from_i64(&[&[0, 0], &[3, 0]]),
                Matrix::from_i64(&[&[1, 0], &[1, -1]]),
            ],
        );
        let alg = ChartTot::new(spec.clone(), vec![lform(&conn.as_form())], 2, vec![0, 1, 2], None).unwrap();
        let expected = alg.constant(&lform(&curvature(&spec, &conn)));
        assert_eq!(alg.curvature(), expected);
        let x = alg.constant(&lform(&Form::term(3, &[1], Matrix::from_i64(&[&[0, 1], &[1, 0]]))));
        crate::curved::check_curved_on(&alg, &[x]).unwrap();
    }

    #[test]
    fn whitney_sections_are_faithful() {
        let m = TwoChartModel::line_bundle(-2, (-3, 3));
        let small = CechObject::new(&m, 2).unwrap();
        let big = CechObject::new(&m, 3).unwrap();
        let c: Vec<Q> = (0..small.cech.dim()).map(|i| q(i as i64 % 3)).collect();
        let x = elementary_section(&small, &c);
        faithful_at(&big, &x).unwrap();
        let mut y = x.clone();
        y.levels[2] = y.levels[2].add(&SimplexForm::t(2, 1).mul(&SimplexForm::t(2, 2)).tensor(&unit_vec(small.object.levels[2].dim(), 0)));
        assert!(faithful_at(&big, &y).is_err());
    }
}
