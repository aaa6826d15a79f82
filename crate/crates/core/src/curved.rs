//! Curved DG-algebras, curved ideals, Atiyah classes, twisting and trace maps.

use std::collections::BTreeMap;
use std::fmt::Debug;

use num_traits::{One, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::dg::{cohomology, CochainComplex, DgError, GradedVectorSpace};
use crate::exact::{add_scaled, factorial, is_zero_vec, q, solve, sub_vec, unit_vec, zero_vec, Matrix, Quotient, Subspace, Q};

/// The first failing axiom of a curved algebra or pair.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Error)]
#[serde(tag = "identity", rename_all = "kebab-case")]
pub enum CurvedViolation {
    #[error("curvature is not homogeneous of degree 2")]
    CurvatureDegree,
    #[error("d does not raise degree by one on sample {sample}")]
    DifferentialDegree { sample: usize },
    #[error("d(R) ≠ 0")]
    Bianchi,
    #[error("d²(x) ≠ [R, x] on sample {sample}")]
    SquareNotCurvature { sample: usize },
    #[error("d is not a derivation on samples ({left}, {right})")]
    Leibniz { left: usize, right: usize },
    #[error("ideal is not closed under multiplication by sample {sample}")]
    NotIdeal { sample: usize },
    #[error("d(I) is not contained in I")]
    NotDifferential,
    #[error("R is not in I")]
    CurvatureOutsideIdeal,
    #[error("twisting element is not a degree-1 element of I")]
    BadTwist,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CurvedError {
    #[error(transparent)]
    Violation(#[from] CurvedViolation),
    #[error(transparent)]
    Complex(#[from] DgError),
}

/// A graded algebra with a degree-one derivation and a curvature element, possibly infinite-dimensional.
pub trait CurvedAlgebra {
    type Elem: Clone + PartialEq + Debug;
    fn zero(&self) -> Self::Elem;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn scale(&self, a: &Self::Elem, c: &Q) -> Self::Elem;
    fn is_zero(&self, a: &Self::Elem) -> bool;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn d(&self, a: &Self::Elem) -> Self::Elem;
    fn curvature(&self) -> Self::Elem;
    /// Degree of a nonzero homogeneous element, `None` when mixed.
    fn degree(&self, a: &Self::Elem) -> Option<i32>;

    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        self.add(a, &self.scale(b, &-Q::one()))
    }

    /// Graded commutator of homogeneous elements.
    fn bracket(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        if self.is_zero(a) || self.is_zero(b) {
            return self.zero();
        }
        let da = self.degree(a).expect("homogeneous");
        let db = self.degree(b).expect("homogeneous");
        let s = if (da * db) % 2 == 0 { -Q::one() } else { Q::one() };
        self.add(&self.mul(a, b), &self.scale(&self.mul(b, a), &s))
    }
}

/// Checks the curved axioms on homogeneous samples: `R` of degree 2, `dR = 0`,
/// `d² = [R, -]`, and the graded Leibniz rule on sample pairs.
pub fn check_curved_on<A: CurvedAlgebra>(alg: &A, samples: &[A::Elem]) -> Result<(), CurvedViolation> {
    let r = alg.curvature();
    if !alg.is_zero(&r) && alg.degree(&r) != Some(2) {
        return Err(CurvedViolation::CurvatureDegree);
    }
    if !alg.is_zero(&alg.d(&r)) {
        return Err(CurvedViolation::Bianchi);
    }
    for (i, x) in samples.iter().enumerate() {
        if alg.is_zero(x) {
            continue;
        }
        let dx = alg.d(x);
        if !alg.is_zero(&dx) && alg.degree(&dx) != alg.degree(x).map(|d| d + 1) {
            return Err(CurvedViolation::DifferentialDegree { sample: i });
        }
        if !alg.is_zero(&alg.sub(&alg.d(&dx), &alg.bracket(&r, x))) {
            return Err(CurvedViolation::SquareNotCurvature { sample: i });
        }
    }
    for (i, x) in samples.iter().enumerate() {
        let Some(dgx) = alg.degree(x) else { continue };
        let s = if dgx % 2 == 0 { Q::one() } else { -Q::one() };
        for (j, y) in samples.iter().enumerate() {
            let lhs = alg.d(&alg.mul(x, y));
            let rhs = alg.add(&alg.mul(&alg.d(x), y), &alg.scale(&alg.mul(x, &alg.d(y)), &s));
            if !alg.is_zero(&alg.sub(&lhs, &rhs)) {
                return Err(CurvedViolation::Leibniz { left: i, right: j });
            }
        }
    }
    Ok(())
}

/// A finite-dimensional curved DG-algebra given by a multiplication table on a homogeneous basis.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvedDga {
    pub names: Vec<String>,
    pub degrees: Vec<i32>,
    /// `table[i][j]` is the product of basis elements `i` and `j` as sparse coordinates.
    pub table: Vec<Vec<Vec<(usize, Q)>>>,
    pub d: Matrix,
    pub r: Vec<Q>,
}

impl CurvedDga {
    pub fn dim(&self) -> usize {
        self.degrees.len()
    }

    pub fn basis(&self, i: usize) -> Vec<Q> {
        unit_vec(self.dim(), i)
    }

    pub fn basis_of_degree(&self, n: i32) -> Vec<usize> {
        (0..self.dim()).filter(|&i| self.degrees[i] == n).collect()
    }

    /// Restriction to the homogeneous component of degree `n`.
    pub fn component(&self, v: &[Q], n: i32) -> Vec<Q> {
        v.iter().enumerate().map(|(i, c)| if self.degrees[i] == n { c.clone() } else { Q::zero() }).collect()
    }

    /// Subspace of all elements of degree `n`.
    pub fn degree_subspace(&self, n: i32) -> Subspace {
        Subspace::span(self.dim(), self.basis_of_degree(n).into_iter().map(|i| self.basis(i)))
    }

    pub fn apply_d(&self, v: &[Q]) -> Vec<Q> {
        self.d.mul_vec(v)
    }

    pub fn left_mul_matrix(&self, x: &[Q]) -> Matrix {
        let mut m = Matrix::zeros(self.dim(), self.dim());
        for j in 0..self.dim() {
            m.set_column(j, &self.product(x, &self.basis(j)));
        }
        m
    }

    pub fn right_mul_matrix(&self, x: &[Q]) -> Matrix {
        let mut m = Matrix::zeros(self.dim(), self.dim());
        for j in 0..self.dim() {
            m.set_column(j, &self.product(&self.basis(j), x));
        }
        m
    }

    pub fn product(&self, x: &[Q], y: &[Q]) -> Vec<Q> {
        let mut out = zero_vec(self.dim());
        for (i, a) in x.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in y.iter().enumerate() {
                if b.is_zero() {
                    continue;
                }
                let ab = a * b;
                for (k, c) in &self.table[i][j] {
                    out[*k] += &ab * c;
                }
            }
        }
        out
    }

    /// Graded commutator extended bilinearly over homogeneous components.
    pub fn commutator(&self, x: &[Q], y: &[Q]) -> Vec<Q> {
        let mut out = zero_vec(self.dim());
        for dx in self.degrees_present(x) {
            let xa = self.component(x, dx);
            for dy in self.degrees_present(y) {
                let yb = self.component(y, dy);
                let s = if (dx * dy) % 2 == 0 { -Q::one() } else { Q::one() };
                add_scaled(&mut out, &Q::one(), &self.product(&xa, &yb));
                add_scaled(&mut out, &s, &self.product(&yb, &xa));
            }
        }
        out
    }

    fn degrees_present(&self, v: &[Q]) -> Vec<i32> {
        let mut ds: Vec<i32> = v.iter().enumerate().filter(|(_, c)| !c.is_zero()).map(|(i, _)| self.degrees[i]).collect();
        ds.sort_unstable();
        ds.dedup();
        ds
    }

    pub fn homogeneous_degree(&self, v: &[Q]) -> Option<i32> {
        match self.degrees_present(v).as_slice() {
            [d] => Some(*d),
            _ => None,
        }
    }
}

impl CurvedAlgebra for CurvedDga {
    type Elem = Vec<Q>;
    fn zero(&self) -> Vec<Q> {
        zero_vec(self.dim())
    }
    fn add(&self, a: &Vec<Q>, b: &Vec<Q>) -> Vec<Q> {
        crate::exact::add_vec(a, b)
    }
    fn scale(&self, a: &Vec<Q>, c: &Q) -> Vec<Q> {
        crate::exact::scale_vec(c, a)
    }
    fn is_zero(&self, a: &Vec<Q>) -> bool {
        is_zero_vec(a)
    }
    fn mul(&self, a: &Vec<Q>, b: &Vec<Q>) -> Vec<Q> {
        self.product(a, b)
    }
    fn d(&self, a: &Vec<Q>) -> Vec<Q> {
        self.apply_d(a)
    }
    fn curvature(&self) -> Vec<Q> {
        self.r.clone()
    }
    fn degree(&self, a: &Vec<Q>) -> Option<i32> {
        self.homogeneous_degree(a)
    }
}

type Sparse = BTreeMap<usize, Q>;

fn axpy(acc: &mut Sparse, c: &Q, v: &[(usize, Q)]) {
    for (k, x) in v {
        let e = acc.entry(*k).or_insert_with(Q::zero);
        *e += c * x;
        if e.is_zero() {
            acc.remove(k);
        }
    }
}

/// Checks the curved axioms on the whole basis, using the sparse table directly.
pub fn check_curved(a: &CurvedDga) -> Result<(), CurvedViolation> {
    let n = a.dim();
    if !is_zero_vec(&a.r) && a.homogeneous_degree(&a.r) != Some(2) {
        return Err(CurvedViolation::CurvatureDegree);
    }
    if !is_zero_vec(&a.apply_d(&a.r)) {
        return Err(CurvedViolation::Bianchi);
    }
    let dcols: Vec<Vec<(usize, Q)>> =
        (0..n).map(|j| (0..n).filter(|&i| !a.d.get(i, j).is_zero()).map(|i| (i, a.d.get(i, j).clone())).collect()).collect();
    let r: Vec<(usize, Q)> = a.r.iter().cloned().enumerate().filter(|(_, c)| !c.is_zero()).collect();
    for i in 0..n {
        if dcols[i].iter().any(|(k, _)| a.degrees[*k] != a.degrees[i] + 1) {
            return Err(CurvedViolation::DifferentialDegree { sample: i });
        }
        let mut dd = Sparse::new();
        for (k, c) in &dcols[i] {
            axpy(&mut dd, c, &dcols[*k]);
        }
        // [R, e_i] = R e_i - e_i R for even R
        for (k, c) in &r {
            axpy(&mut dd, &-c, &a.table[*k][i]);
            axpy(&mut dd, c, &a.table[i][*k]);
        }
        if !dd.is_empty() {
            return Err(CurvedViolation::SquareNotCurvature { sample: i });
        }
    }
    for i in 0..n {
        let s = if a.degrees[i] % 2 == 0 { Q::one() } else { -Q::one() };
        for j in 0..n {
            let mut acc = Sparse::new();
            for (k, c) in &a.table[i][j] {
                axpy(&mut acc, c, &dcols[*k]);
            }
            for (k, c) in &dcols[i] {
                axpy(&mut acc, &-c, &a.table[*k][j]);
            }
            for (k, c) in &dcols[j] {
                axpy(&mut acc, &-(c * &s), &a.table[i][*k]);
            }
            if !acc.is_empty() {
                return Err(CurvedViolation::Leibniz { left: i, right: j });
            }
        }
    }
    Ok(())
}

/// A curved algebra with a curved ideal.
#[derive(Debug, Clone)]
pub struct CurvedPair {
    pub algebra: CurvedDga,
    pub ideal: Subspace,
}

impl CurvedPair {
    pub fn new(algebra: CurvedDga, ideal: Subspace) -> Result<Self, CurvedViolation> {
        let p = CurvedPair { algebra, ideal };
        p.check()?;
        Ok(p)
    }

    /// Verifies the curved axioms, bilateral ideal, `d(I) ⊆ I` and `R ∈ I`.
    pub fn check(&self) -> Result<(), CurvedViolation> {
        let a = &self.algebra;
        check_curved(a)?;
        for i in 0..a.dim() {
            let e = a.basis(i);
            for v in self.ideal.basis() {
                if !self.ideal.contains(&a.product(&e, v)) || !self.ideal.contains(&a.product(v, &e)) {
                    return Err(CurvedViolation::NotIdeal { sample: i });
                }
            }
        }
        if !self.ideal.image_under(&a.d).is_subspace_of(&self.ideal) {
            return Err(CurvedViolation::NotDifferential);
        }
        if !self.ideal.contains(&a.r) {
            return Err(CurvedViolation::CurvatureOutsideIdeal);
        }
        Ok(())
    }

    /// `I^(k)`, with `I^(0) = A`.
    pub fn ideal_power(&self, k: usize) -> Subspace {
        ideal_power(&self.algebra, &self.ideal, k)
    }

    pub fn powers(&self, upto: usize) -> Vec<Subspace> {
        let mut out = vec![Subspace::full(self.algebra.dim())];
        for _ in 1..=upto {
            let next = product_span(&self.algebra, out.last().unwrap(), &self.ideal);
            out.push(next);
        }
        out
    }
}

fn product_span(a: &CurvedDga, x: &Subspace, y: &Subspace) -> Subspace {
    let mut s = Subspace::zero(a.dim());
    for u in x.basis() {
        for v in y.basis() {
            let p = a.product(u, v);
            if !is_zero_vec(&p) {
                s.insert(p);
            }
        }
    }
    s
}

/// The span of `k`-fold products of elements of `I`.
pub fn ideal_power(a: &CurvedDga, ideal: &Subspace, k: usize) -> Subspace {
    let mut p = Subspace::full(a.dim());
    for _ in 0..k {
        p = product_span(a, &p, ideal);
    }
    p
}

/// `big / small` for subspaces `small ⊆ big` of a common ambient space.
#[derive(Debug, Clone)]
pub struct SubQuotient {
    pub big: Subspace,
    pub quotient: Quotient,
}

impl SubQuotient {
    pub fn new(big: Subspace, small: &Subspace) -> Self {
        let inner = Subspace::span(big.dim(), small.basis().iter().map(|v| big.coords(v)));
        SubQuotient { big, quotient: Quotient::new(inner) }
    }

    pub fn dim(&self) -> usize {
        self.quotient.dim()
    }

    pub fn coords(&self, v: &[Q]) -> Vec<Q> {
        self.quotient.coords(&self.big.coords(v))
    }

    pub fn lift(&self, c: &[Q]) -> Vec<Q> {
        let inner = self.quotient.lift(c);
        let mut out = zero_vec(self.big.ambient);
        for (b, x) in self.big.basis().iter().zip(&inner) {
            add_scaled(&mut out, x, b);
        }
        out
    }
}

/// The complex `big/small` with the induced differential of a curved algebra, graded by degree.
pub fn subquotient_complex(a: &CurvedDga, big: &Subspace, small: &Subspace) -> (CochainComplex, BTreeMap<i32, SubQuotient>) {
    let mut degs: Vec<i32> = a.degrees.clone();
    degs.sort_unstable();
    degs.dedup();
    let mut pieces = BTreeMap::new();
    for &n in &degs {
        let dn = a.degree_subspace(n);
        pieces.insert(n, SubQuotient::new(big.intersection(&dn), &small.intersection(&dn)));
    }
    let mut bases = BTreeMap::new();
    let mut diffs = BTreeMap::new();
    for (&n, sq) in &pieces {
        bases.insert(n, (0..sq.dim()).map(|i| format!("c{n}_{i}")).collect());
        if let Some(target) = pieces.get(&(n + 1)) {
            let mut m = Matrix::zeros(target.dim(), sq.dim());
            for j in 0..sq.dim() {
                let v = sq.lift(&unit_vec(sq.dim(), j));
                m.set_column(j, &target.coords(&a.apply_d(&v)));
            }
            diffs.insert(n, m);
        }
    }
    let c = CochainComplex::new_unchecked(GradedVectorSpace { bases }, diffs).expect("shapes agree");
    (c, pieces)
}

/// `(A, d)` as a complex; degree-`n` coordinates follow the basis order of that degree.
pub fn underlying_complex(a: &CurvedDga) -> Result<CochainComplex, DgError> {
    let (c, _) = subquotient_complex(a, &Subspace::full(a.dim()), &Subspace::zero(a.dim()));
    c.check()?;
    Ok(c)
}

/// The class of `R` in `H²(I/I^(2))` with a witness when it vanishes.
#[derive(Debug, Clone)]
pub struct AtiyahClass {
    pub representative: Vec<Q>,
    /// Coordinates of the class in the deterministic basis of `H²(I/I^(2))`.
    pub class: Vec<Q>,
    pub cohomology_dim: usize,
    pub vanishes: bool,
    /// A degree-1 `x ∈ I` with `R + dx ∈ I^(2)` when the class vanishes.
    pub witness: Option<Vec<Q>>,
}

pub fn atiyah_class(p: &CurvedPair) -> Result<AtiyahClass, CurvedError> {
    let a = &p.algebra;
    let i2 = p.ideal_power(2);
    let (complex, pieces) = subquotient_complex(a, &p.ideal, &i2);
    complex.check()?;
    let h = cohomology(&complex)?;
    let group = h.group(2);
    let r = &a.r;
    let class = match pieces.get(&2) {
        Some(sq) => group.class_of(&sq.coords(r)),
        None => vec![],
    };
    let vanishes = class.iter().all(Zero::is_zero);
    let witness = if vanishes { Some(atiyah_witness(p, &i2).expect("vanishing class has a witness")) } else { None };
    Ok(AtiyahClass { representative: r.clone(), class, cohomology_dim: group.dim, vanishes, witness })
}

/// Solves `R + dx ∈ I^(2)` for degree-1 `x ∈ I`.
pub fn atiyah_witness(p: &CurvedPair, i2: &Subspace) -> Option<Vec<Q>> {
    let a = &p.algebra;
    let i1 = p.ideal.intersection(&a.degree_subspace(1));
    let q2 = Quotient::new(i2.clone());
    let cols: Vec<Vec<Q>> = i1.basis().iter().map(|x| q2.coords(&a.apply_d(x))).collect();
    let m = Matrix::from_columns(q2.dim(), &cols);
    let rhs: Vec<Q> = q2.coords(&a.r).iter().map(|c| -c).collect();
    let sol = solve(&m, &rhs).ok()??;
    let mut x = zero_vec(a.dim());
    for (c, b) in sol.iter().zip(i1.basis()) {
        add_scaled(&mut x, c, b);
    }
    Some(x)
}

/// `d_x = d + [x, -]`, `R_x = R + dx + x²`.
pub fn twist(p: &CurvedPair, x: &[Q]) -> Result<CurvedPair, CurvedViolation> {
    let a = &p.algebra;
    if !is_zero_vec(x) && (!p.ideal.contains(x) || a.homogeneous_degree(x) != Some(1)) {
        return Err(CurvedViolation::BadTwist);
    }
    let mut d = a.d.clone();
    for j in 0..a.dim() {
        let c = a.commutator(x, &a.basis(j));
        let col = crate::exact::add_vec(&d.column(j), &c);
        d.set_column(j, &col);
    }
    let r = crate::exact::add_vec(&crate::exact::add_vec(&a.r, &a.apply_d(x)), &a.product(x, x));
    let algebra = CurvedDga { d, r, ..a.clone() };
    CurvedPair::new(algebra, p.ideal.clone())
}

/// The quotient `A/I` with induced product, differential and zero curvature.
pub fn quotient_algebra(p: &CurvedPair) -> (CurvedDga, Quotient) {
    let a = &p.algebra;
    let quot = Quotient::new(p.ideal.clone());
    let reps: Vec<usize> = quot.free().to_vec();
    let n = reps.len();
    let names = reps.iter().map(|&i| a.names[i].clone()).collect();
    let degrees = reps.iter().map(|&i| a.degrees[i]).collect();
    let mut table = vec![vec![Vec::new(); n]; n];
    for (x, &i) in reps.iter().enumerate() {
        for (y, &j) in reps.iter().enumerate() {
            let c = quot.coords(&a.product(&a.basis(i), &a.basis(j)));
            table[x][y] = c.into_iter().enumerate().filter(|(_, v)| !v.is_zero()).collect();
        }
    }
    let mut d = Matrix::zeros(n, n);
    for (x, &i) in reps.iter().enumerate() {
        d.set_column(x, &quot.coords(&a.apply_d(&a.basis(i))));
    }
    (CurvedDga { names, degrees, table, d, r: zero_vec(n) }, quot)
}

/// A degree-preserving map `Tr : A -> C` into a complex given on a homogeneous basis.
#[derive(Debug, Clone)]
pub struct TraceData {
    pub target_degrees: Vec<i32>,
    /// Differential of `C` on its whole basis.
    pub delta: Matrix,
    pub tr: Matrix,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Error)]
#[serde(tag = "identity", rename_all = "kebab-case")]
pub enum TraceViolation {
    #[error("Tr∘d ≠ δ∘Tr on basis element {sample}")]
    NotChainMap { sample: usize },
    #[error("Tr does not vanish on the commutator of basis elements ({left}, {right})")]
    Commutator { left: usize, right: usize },
    #[error("Tr does not preserve degree on basis element {sample}")]
    Degree { sample: usize },
}

impl TraceData {
    pub fn apply(&self, v: &[Q]) -> Vec<Q> {
        self.tr.mul_vec(v)
    }

    /// `C_k = Tr(I^(k))`.
    pub fn filtration(&self, p: &CurvedPair, upto: usize) -> Vec<Subspace> {
        p.powers(upto).iter().map(|s| s.image_under(&self.tr)).collect()
    }
}

pub fn check_trace(t: &TraceData, p: &CurvedPair) -> Result<(), TraceViolation> {
    let a = &p.algebra;
    for i in 0..a.dim() {
        let e = a.basis(i);
        let img = t.apply(&e);
        if img.iter().enumerate().any(|(j, c)| !c.is_zero() && t.target_degrees[j] != a.degrees[i]) {
            return Err(TraceViolation::Degree { sample: i });
        }
        if t.apply(&a.apply_d(&e)) != t.delta.mul_vec(&img) {
            return Err(TraceViolation::NotChainMap { sample: i });
        }
    }
    for i in 0..a.dim() {
        for j in 0..a.dim() {
            if !is_zero_vec(&t.apply(&a.commutator(&a.basis(i), &a.basis(j)))) {
                return Err(TraceViolation::Commutator { left: i, right: j });
            }
        }
    }
    Ok(())
}

/// `σ_k¹(x) = Tr(R^k x)/k!` on a lift `x`, as a representative in `C`.
pub fn sigma_k1(p: &CurvedPair, t: &TraceData, k: usize, x: &[Q]) -> Vec<Q> {
    let a = &p.algebra;
    let mut y = x.to_vec();
    for _ in 0..k {
        y = a.product(&a.r, &y);
    }
    crate::exact::scale_vec(&(Q::one() / factorial(k)), &t.apply(&y))
}

/// Checks that `σ_k¹` is well defined on `A/I` and a chain map into `C/C_{k+1}` on the basis.
pub fn sigma_chain_check(p: &CurvedPair, t: &TraceData, k: usize) -> bool {
    let a = &p.algebra;
    let ck1 = p.ideal_power(k + 1).image_under(&t.tr);
    for v in p.ideal.basis() {
        if !ck1.contains(&sigma_k1(p, t, k, v)) {
            return false;
        }
    }
    for i in 0..a.dim() {
        let e = a.basis(i);
        let lhs = sigma_k1(p, t, k, &a.apply_d(&e));
        let rhs = t.delta.mul_vec(&sigma_k1(p, t, k, &e));
        if !ck1.contains(&sub_vec(&lhs, &rhs)) {
            return false;
        }
    }
    true
}

/// The exterior algebra on one odd generator, zero differential.
pub fn exterior_one() -> CurvedDga {
    let mut table = vec![vec![Vec::new(); 2]; 2];
    table[0][0] = vec![(0, q(1))];
    table[0][1] = vec![(1, q(1))];
    table[1][0] = vec![(1, q(1))];
    CurvedDga { names: vec!["1".into(), "ε".into()], degrees: vec![0, 1], table, d: Matrix::zeros(2, 2), r: zero_vec(2) }
}
