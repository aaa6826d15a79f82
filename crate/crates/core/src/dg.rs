//! Cochain complexes, cohomology, shifts, Koszul signs and spectral sequences of filtered complexes.

use std::collections::BTreeMap;

use num_traits::Zero;
use serde::Serialize;
use thiserror::Error;

use crate::exact::{rank_kernel_image, sign, Matrix, Quotient, Subspace, Q};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DgError {
    #[error("d^{next} ∘ d^{degree} is nonzero")]
    NotComplex { degree: i32, next: i32 },
    #[error("differential in degree {degree} has shape {found:?}, expected {expected:?}")]
    Shape { degree: i32, expected: (usize, usize), found: (usize, usize) },
    #[error("filtration step {p} in degree {degree}: {reason}")]
    Filtration { p: usize, degree: i32, reason: String },
}

/// Per-degree named bases.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct GradedVectorSpace {
    pub bases: BTreeMap<i32, Vec<String>>,
}

impl GradedVectorSpace {
    pub fn dim(&self, n: i32) -> usize {
        self.bases.get(&n).map_or(0, |b| b.len())
    }
}

/// A bounded cochain complex with `d^n : C^n -> C^{n+1}` stored as `dim C^{n+1} x dim C^n` matrices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CochainComplex {
    pub space: GradedVectorSpace,
    diffs: BTreeMap<i32, Matrix>,
}

impl CochainComplex {
    /// Builds and verifies `d² = 0`. Missing differentials are zero.
    pub fn new(space: GradedVectorSpace, diffs: BTreeMap<i32, Matrix>) -> Result<Self, DgError> {
        let c = Self::new_unchecked(space, diffs)?;
        c.check()?;
        Ok(c)
    }

    /// Builds with shape checks only.
    pub fn new_unchecked(space: GradedVectorSpace, mut diffs: BTreeMap<i32, Matrix>) -> Result<Self, DgError> {
        for (&n, m) in &diffs {
            let expected = (space.dim(n + 1), space.dim(n));
            if (m.rows, m.cols) != expected {
                return Err(DgError::Shape { degree: n, expected, found: (m.rows, m.cols) });
            }
        }
        diffs.retain(|_, m| !m.is_zero());
        Ok(CochainComplex { space, diffs })
    }

    /// Complex with basis names `deg:index`.
    pub fn from_dims(dims: &BTreeMap<i32, usize>, diffs: BTreeMap<i32, Matrix>) -> Result<Self, DgError> {
        let bases = dims
            .iter()
            .filter(|(_, &d)| d > 0)
            .map(|(&n, &d)| (n, (0..d).map(|i| format!("{n}:{i}")).collect()))
            .collect();
        Self::new(GradedVectorSpace { bases }, diffs)
    }

    pub fn check(&self) -> Result<(), DgError> {
        for (&n, m) in &self.diffs {
            if let Some(next) = self.diffs.get(&(n + 1)) {
                if !next.mul(m).is_zero() {
                    return Err(DgError::NotComplex { degree: n, next: n + 1 });
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self, n: i32) -> usize {
        self.space.dim(n)
    }

    pub fn degrees(&self) -> Vec<i32> {
        self.space.bases.iter().filter(|(_, b)| !b.is_empty()).map(|(&n, _)| n).collect()
    }

    pub fn min_degree(&self) -> i32 {
        self.degrees().first().copied().unwrap_or(0)
    }

    pub fn max_degree(&self) -> i32 {
        self.degrees().last().copied().unwrap_or(0)
    }

    pub fn d(&self, n: i32) -> Matrix {
        self.diffs.get(&n).cloned().unwrap_or_else(|| Matrix::zeros(self.dim(n + 1), self.dim(n)))
    }

    pub fn apply_d(&self, n: i32, v: &[Q]) -> Vec<Q> {
        match self.diffs.get(&n) {
            Some(m) => m.mul_vec(v),
            None => vec![Q::zero(); self.dim(n + 1)],
        }
    }
}

/// Cohomology in one degree.
#[derive(Debug, Clone)]
pub struct CohomologyGroup {
    pub degree: i32,
    pub dim: usize,
    /// Deterministic representative cocycles.
    pub representatives: Vec<Vec<Q>>,
    cocycles: Subspace,
    coboundaries: Quotient,
    classes: Subspace,
}

impl CohomologyGroup {
    pub fn is_cocycle(&self, z: &[Q]) -> bool {
        self.cocycles.contains(z)
    }

    pub fn is_coboundary(&self, z: &[Q]) -> bool {
        self.coboundaries.sub.contains(z)
    }

    pub fn coboundaries(&self) -> &Subspace {
        &self.coboundaries.sub
    }

    pub fn cocycles(&self) -> &Subspace {
        &self.cocycles
    }

    /// Coordinates of the class of a cocycle in the representative basis.
    pub fn class_of(&self, z: &[Q]) -> Vec<Q> {
        assert!(self.is_cocycle(z), "class_of called on a non-cocycle");
        self.classes.coords(&self.coboundaries.coords(z))
    }

    /// Projection matrix from cocycles to class coordinates.
    pub fn projection(&self) -> Matrix {
        let n = self.coboundaries.sub.ambient;
        let mut m = Matrix::zeros(self.dim, n);
        for j in 0..n {
            let e = crate::exact::unit_vec(n, j);
            let c = self.classes.coords(&self.coboundaries.coords(&e));
            m.set_column(j, &c);
        }
        m
    }
}

#[derive(Debug, Clone)]
pub struct Cohomology {
    pub groups: BTreeMap<i32, CohomologyGroup>,
    zero: CohomologyGroup,
}

impl Cohomology {
    pub fn dim(&self, n: i32) -> usize {
        self.groups.get(&n).map_or(0, |g| g.dim)
    }

    /// The group in degree `n`; degrees where the complex vanishes give the zero group.
    pub fn group(&self, n: i32) -> &CohomologyGroup {
        self.groups.get(&n).unwrap_or(&self.zero)
    }

    /// Dimensions from the lowest to the highest degree of the complex.
    pub fn dims(&self) -> Vec<usize> {
        self.groups.values().map(|g| g.dim).collect()
    }
}

pub fn cohomology_in_degree(c: &CochainComplex, n: i32) -> CohomologyGroup {
    let dim = c.dim(n);
    let cocycles = Subspace::span(dim, rank_kernel_image(&c.d(n)).kernel);
    let prev = c.d(n - 1);
    let bounds = Subspace::span(dim, (0..prev.cols).map(|j| prev.column(j)));
    let coboundaries = Quotient::new(bounds);
    let classes = Subspace::span(coboundaries.dim(), cocycles.basis().iter().map(|z| coboundaries.coords(z)));
    let representatives = classes.basis().iter().map(|w| coboundaries.lift(w)).collect();
    CohomologyGroup { degree: n, dim: classes.dim(), representatives, cocycles, coboundaries, classes }
}

pub fn cohomology(c: &CochainComplex) -> Result<Cohomology, DgError> {
    c.check()?;
    let mut groups = BTreeMap::new();
    let zero = CohomologyGroup {
        degree: 0,
        dim: 0,
        representatives: vec![],
        cocycles: Subspace::span(0, vec![]),
        coboundaries: Quotient::new(Subspace::span(0, vec![])),
        classes: Subspace::span(0, vec![]),
    };
    if c.degrees().is_empty() {
        return Ok(Cohomology { groups, zero });
    }
    for n in c.min_degree()..=c.max_degree() {
        groups.insert(n, cohomology_in_degree(c, n));
    }
    Ok(Cohomology { groups, zero })
}

/// `C[p]^n = C^{n+p}` with differential `(-1)^p d`.
pub fn shift(c: &CochainComplex, p: i32) -> CochainComplex {
    let bases = c.space.bases.iter().map(|(&n, b)| (n - p, b.clone())).collect();
    let s = sign(p as i64);
    let diffs = c.diffs.iter().map(|(&n, m)| (n - p, m.scale(&s))).collect();
    CochainComplex { space: GradedVectorSpace { bases }, diffs }
}

/// Koszul sign of rearranging `(x_0, ..., x_m)` into `(x_{perm[0]}, ..., x_{perm[m]})`.
pub fn koszul_sign(perm: &[usize], degrees: &[i32]) -> i32 {
    assert_eq!(perm.len(), degrees.len(), "permutation and degree lengths differ");
    let mut s = 1;
    for i in 0..perm.len() {
        for j in i + 1..perm.len() {
            if perm[i] > perm[j] && (degrees[perm[i]] * degrees[perm[j]]).rem_euclid(2) == 1 {
                s = -s;
            }
        }
    }
    s
}

/// A complex with a finite decreasing filtration `C = F_0 ⊇ F_1 ⊇ ... ⊇ F_N = 0`.
#[derive(Debug, Clone)]
pub struct FilteredComplex {
    pub complex: CochainComplex,
    /// `steps[p][n]` is `F_p` in degree `n`; `steps[0]` is everything and the last step is zero.
    steps: Vec<BTreeMap<i32, Subspace>>,
}

impl FilteredComplex {
    pub fn new(complex: CochainComplex, steps: Vec<BTreeMap<i32, Subspace>>) -> Result<Self, DgError> {
        complex.check()?;
        let f = FilteredComplex { complex, steps };
        f.validate()?;
        Ok(f)
    }

    pub fn length(&self) -> usize {
        self.steps.len() - 1
    }

    /// `F_p` in degree `n`, with `F_p = C` for `p ≤ 0` and `F_p = 0` past the end.
    pub fn step(&self, p: i64, n: i32) -> Subspace {
        let dim = self.complex.dim(n);
        if p <= 0 {
            return Subspace::full(dim);
        }
        match self.steps.get(p as usize) {
            Some(s) => s.get(&n).cloned().unwrap_or_else(|| Subspace::zero(dim)),
            None => Subspace::zero(dim),
        }
    }

    fn validate(&self) -> Result<(), DgError> {
        let err = |p: usize, degree: i32, reason: &str| DgError::Filtration { p, degree, reason: reason.into() };
        if self.steps.is_empty() {
            return Err(err(0, 0, "empty filtration"));
        }
        let c = &self.complex;
        for n in c.degrees() {
            for (p, s) in self.steps.iter().enumerate() {
                if let Some(sub) = s.get(&n) {
                    if sub.ambient != c.dim(n) {
                        return Err(err(p, n, "ambient dimension mismatch"));
                    }
                }
            }
            if self.steps[0].get(&n).is_some_and(|s| s.dim() != c.dim(n)) {
                return Err(err(0, n, "F_0 must be the whole complex"));
            }
            let last = self.length() as i64;
            if self.step(last, n).dim() != 0 {
                return Err(err(last as usize, n, "last step must be zero"));
            }
            for p in 0..last {
                let fp = self.step(p, n);
                let next = self.step(p + 1, n);
                if !next.is_subspace_of(&fp) {
                    return Err(err(p as usize + 1, n, "filtration is not decreasing"));
                }
                let image = fp.image_under(&c.d(n));
                if !image.is_subspace_of(&self.step(p, n + 1)) {
                    return Err(err(p as usize, n, "d(F_p) is not contained in F_p"));
                }
            }
        }
        Ok(())
    }

    /// `Z_r^{p,n} = F_p^n ∩ d^{-1}(F_{p+r}^{n+1})`.
    fn z(&self, r: i64, p: i64, n: i32) -> Subspace {
        let fp = self.step(p, n);
        let target = self.step(p + r, n + 1);
        fp.intersection(&target.preimage(&self.complex.d(n)))
    }

    fn boundary_part(&self, r: i64, p: i64, n: i32) -> Subspace {
        let z_next = self.z(r - 1, p + 1, n);
        let z_src = self.z(r - 1, p - r + 1, n - 1);
        z_next.sum(&z_src.image_under(&self.complex.d(n - 1)))
    }
}

/// One entry `E_r^{p,q}` with `n = p + q`.
#[derive(Debug, Clone)]
pub struct PageEntry {
    pub p: i64,
    pub n: i32,
    pub dim: usize,
    pub representatives: Vec<Vec<Q>>,
    numerator: Subspace,
    denominator: Quotient,
    classes: Subspace,
}

impl PageEntry {
    pub fn q(&self) -> i64 {
        self.n as i64 - self.p
    }

    fn coords(&self, v: &[Q]) -> Vec<Q> {
        self.classes.coords(&self.denominator.coords(v))
    }
}

#[derive(Debug, Clone)]
pub struct SpectralPage {
    pub r: i64,
    pub entries: BTreeMap<(i64, i32), PageEntry>,
    /// `d_r : E_r^{p,n} -> E_r^{p+r,n+1}` keyed by the source.
    pub differentials: BTreeMap<(i64, i32), Matrix>,
}

impl SpectralPage {
    pub fn dim(&self, p: i64, q: i64) -> usize {
        let n = (p + q) as i32;
        self.entries.get(&(p, n)).map_or(0, |e| e.dim)
    }

    pub fn total_dim(&self, n: i32) -> usize {
        self.entries.iter().filter(|((_, m), _)| *m == n).map(|(_, e)| e.dim).sum()
    }

    /// Dimensions as `(p, q, dim)` for nonzero entries.
    pub fn table(&self) -> Vec<(i64, i64, usize)> {
        self.entries.values().filter(|e| e.dim > 0).map(|e| (e.p, e.q(), e.dim)).collect()
    }
}

#[derive(Debug, Clone)]
pub struct SpectralSequence {
    pub pages: Vec<SpectralPage>,
    pub degenerates_at_e1: bool,
    pub total: BTreeMap<i32, usize>,
}

#[derive(Debug, Clone, Serialize, PartialEq, Eq)]
pub struct PageCheckFailure {
    pub r: i64,
    pub p: i64,
    pub n: i32,
    pub reason: String,
}

fn page(f: &FilteredComplex, r: i64) -> SpectralPage {
    let c = &f.complex;
    let mut entries = BTreeMap::new();
    for n in c.degrees() {
        for p in 0..f.length() as i64 {
            let numerator = f.z(r, p, n);
            let denominator = Quotient::new(f.boundary_part(r, p, n));
            let classes = Subspace::span(denominator.dim(), numerator.basis().iter().map(|z| denominator.coords(z)));
            let representatives = classes.basis().iter().map(|w| denominator.lift(w)).collect();
            entries.insert(
                (p, n),
                PageEntry { p, n, dim: classes.dim(), representatives, numerator, denominator, classes },
            );
        }
    }
    let mut differentials = BTreeMap::new();
    for (&(p, n), e) in &entries {
        let Some(target) = entries.get(&(p + r, n + 1)) else {
            continue;
        };
        let mut m = Matrix::zeros(target.dim, e.dim);
        for (j, x) in e.representatives.iter().enumerate() {
            let dx = c.apply_d(n, x);
            debug_assert!(target.numerator.contains(&dx));
            m.set_column(j, &target.coords(&dx));
        }
        differentials.insert((p, n), m);
    }
    SpectralPage { r, entries, differentials }
}

/// Pages `E_0 ..= E_{r_max}` from the `Z_r / (Z_{r-1} + d Z_{r-1})` formulas.
pub fn spectral_sequence(f: &FilteredComplex, r_max: i64) -> Result<SpectralSequence, DgError> {
    let h = cohomology(&f.complex)?;
    let pages: Vec<SpectralPage> = (0..=r_max.max(1)).map(|r| page(f, r)).collect();
    let total: BTreeMap<i32, usize> = f.complex.degrees().into_iter().map(|n| (n, h.dim(n))).collect();
    let e1 = &pages[1];
    let degenerates_at_e1 = total.iter().all(|(&n, &d)| e1.total_dim(n) == d);
    Ok(SpectralSequence { pages, degenerates_at_e1, total })
}

impl SpectralSequence {
    /// Checks `d_r² = 0` and `E_{r+1} = H(E_r, d_r)` dimensionwise, plus convergence on the last page.
    pub fn verify(&self, filtration_length: usize) -> Vec<PageCheckFailure> {
        let mut out = Vec::new();
        for w in self.pages.windows(2) {
            let (a, b) = (&w[0], &w[1]);
            for (&(p, n), e) in &a.entries {
                let incoming = a.differentials.get(&(p - a.r, n - 1));
                let outgoing = a.differentials.get(&(p, n));
                if let (Some(i), Some(o)) = (incoming, outgoing) {
                    if !o.mul(i).is_zero() {
                        out.push(PageCheckFailure { r: a.r, p, n, reason: "d_r ∘ d_r ≠ 0".into() });
                    }
                }
                let rank_out = outgoing.map_or(0, |m| m.rank());
                let rank_in = incoming.map_or(0, |m| m.rank());
                let expected = e.dim - rank_out - rank_in;
                let found = b.entries.get(&(p, n)).map_or(0, |x| x.dim);
                if expected != found {
                    out.push(PageCheckFailure {
                        r: b.r,
                        p,
                        n,
                        reason: format!("page dimension {found}, homology of previous page {expected}"),
                    });
                }
                if found > e.dim {
                    out.push(PageCheckFailure { r: b.r, p, n, reason: "page dimension increased".into() });
                }
            }
        }
        if let Some(last) = self.pages.last() {
            if last.r as usize > filtration_length {
                for (&n, &d) in &self.total {
                    if last.total_dim(n) != d {
                        out.push(PageCheckFailure { r: last.r, p: 0, n, reason: "E_∞ does not sum to H".into() });
                    }
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{q, unit_vec};

    fn identity_complex() -> CochainComplex {
        let dims = BTreeMap::from([(0, 1), (1, 1)]);
        CochainComplex::from_dims(&dims, BTreeMap::from([(0, Matrix::identity(1))])).unwrap()
    }

    #[test]
    fn identity_has_no_cohomology() {
        let h = cohomology(&identity_complex()).unwrap();
        assert_eq!(h.dims(), vec![0, 0]);
    }

    #[test]
    fn rejects_nonzero_square() {
        let dims = BTreeMap::from([(0, 1), (1, 1), (2, 1)]);
        let diffs = BTreeMap::from([(0, Matrix::identity(1)), (1, Matrix::identity(1))]);
        assert_eq!(CochainComplex::from_dims(&dims, diffs), Err(DgError::NotComplex { degree: 0, next: 1 }));
    }

    #[test]
    fn shift_signs_compose() {
        let c = identity_complex();
        assert_eq!(shift(&c, 0), c);
        assert_eq!(shift(&shift(&c, 1), 1), shift(&c, 2));
        assert_eq!(shift(&c, 1).d(-1), Matrix::identity(1).scale(&q(-1)));
    }

    #[test]
    fn koszul_examples() {
        assert_eq!(koszul_sign(&[0, 1, 2], &[1, 1, 1]), 1);
        assert_eq!(koszul_sign(&[1, 0], &[-1, -1]), -1);
        assert_eq!(koszul_sign(&[1, 2, 0], &[-1, -1, -1]), 1);
        assert_eq!(koszul_sign(&[1, 0], &[2, 1]), 1);
    }

    #[test]
    fn two_step_filtration_not_degenerate() {
        let c = identity_complex();
        let steps = vec![
            BTreeMap::new(),
            BTreeMap::from([(0, Subspace::zero(1)), (1, Subspace::span(1, [unit_vec(1, 0)]))]),
            BTreeMap::new(),
        ];
        let f = FilteredComplex::new(c, steps).unwrap();
        let ss = spectral_sequence(&f, 3).unwrap();
        assert_eq!(ss.pages[1].dim(0, 0), 1);
        assert_eq!(ss.pages[1].dim(1, 0), 1);
        assert!(!ss.degenerates_at_e1);
        assert!(ss.verify(f.length()).is_empty());
        assert_eq!(ss.pages[2].total_dim(0) + ss.pages[2].total_dim(1), 0);
    }

    #[test]
    fn trivial_filtration_degenerates() {
        let c = identity_complex();
        let f = FilteredComplex::new(c, vec![BTreeMap::new(), BTreeMap::new()]).unwrap();
        let ss = spectral_sequence(&f, 2).unwrap();
        assert!(ss.degenerates_at_e1);
    }

    #[test]
    fn rejects_unstable_filtration() {
        let c = identity_complex();
        let steps = vec![
            BTreeMap::new(),
            BTreeMap::from([(0, Subspace::span(1, [unit_vec(1, 0)])), (1, Subspace::zero(1))]),
            BTreeMap::new(),
        ];
        assert!(matches!(FilteredComplex::new(c, steps), Err(DgError::Filtration { .. })));
    }
}
