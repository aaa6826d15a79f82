//! Lie pairs, the Leray filtration, Bott connections and the Leray `E₁` page.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::algebroid::{
    check_algebroid, covariant_matrix, is_flat, mask_indices, mask_sign, masks_of_degree, standard_complex, Coeff,
    Connection, Form, FormBasis, LieAlgebroidSpec, Tier, Violation,
};
use crate::dg::{cohomology, spectral_sequence, CochainComplex, DgError, FilteredComplex, GradedVectorSpace};
use crate::exact::{q, Matrix, Subspace, Q};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PairError {
    #[error("ambient algebroid is invalid: {0}")]
    Ambient(Violation),
    #[error("subalgebra is not closed: [{i}, {j}] has a component along {k}")]
    NotClosed { i: String, j: String, k: String },
    #[error("index {0} is out of range or repeated")]
    BadIndex(usize),
    #[error("pairs are supported on the point tier only")]
    Tier,
    #[error("module is not flat over the subalgebra")]
    NotFlat,
    #[error("module has {found} matrices, expected {expected}")]
    Shape { expected: usize, found: usize },
    #[error(transparent)]
    Complex(#[from] DgError),
}

/// A Lie subalgebra spanned by basis elements, with the remaining basis elements as splitting.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LiePair {
    pub ambient: LieAlgebroidSpec,
    pub sub: Vec<usize>,
    pub complement: Vec<usize>,
}

impl LiePair {
    pub fn new(ambient: LieAlgebroidSpec, sub: &[usize]) -> Result<Self, PairError> {
        if ambient.tier != Tier::Point {
            return Err(PairError::Tier);
        }
        check_algebroid(&ambient).map_err(PairError::Ambient)?;
        let r = ambient.rank();
        let mut sub = sub.to_vec();
        sub.sort_unstable();
        for w in sub.windows(2) {
            if w[0] == w[1] {
                return Err(PairError::BadIndex(w[0]));
            }
        }
        if let Some(&i) = sub.iter().find(|&&i| i >= r) {
            return Err(PairError::BadIndex(i));
        }
        let complement: Vec<usize> = (0..r).filter(|i| !sub.contains(i)).collect();
        for &i in &sub {
            for &j in &sub {
                for &k in &complement {
                    if !ambient.c(i, j, k).is_zero() {
                        let n = |x: usize| ambient.names[x].clone();
                        return Err(PairError::NotClosed { i: n(i), j: n(j), k: n(k) });
                    }
                }
            }
        }
        Ok(LiePair { ambient, sub, complement })
    }

    pub fn rank(&self) -> usize {
        self.ambient.rank()
    }

    pub fn quotient_rank(&self) -> usize {
        self.complement.len()
    }

    pub fn sub_spec(&self) -> LieAlgebroidSpec {
        self.ambient.restrict_to(&self.sub).expect("subalgebra is closed")
    }

    pub fn sub_mask(&self) -> u32 {
        self.sub.iter().fold(0, |m, &i| m | (1 << i))
    }

    pub fn complement_mask(&self) -> u32 {
        self.complement.iter().fold(0, |m, &i| m | (1 << i))
    }

    /// Number of complement directions in a basis form.
    pub fn m_degree(&self, mask: u32) -> usize {
        (mask & self.complement_mask()).count_ones() as usize
    }

    /// The part of a mask along the subalgebra, renumbered within it.
    pub fn sub_part(&self, mask: u32) -> u32 {
        renumber(mask, &self.sub)
    }

    /// The part of a mask along the complement, renumbered within it.
    pub fn complement_part(&self, mask: u32) -> u32 {
        renumber(mask, &self.complement)
    }

    /// The ambient mask of a subalgebra mask.
    pub fn lift_sub(&self, m: u32) -> u32 {
        mask_indices(m).iter().fold(0, |acc, &a| acc | (1 << self.sub[a]))
    }

    pub fn lift_complement(&self, m: u32) -> u32 {
        mask_indices(m).iter().fold(0, |acc, &a| acc | (1 << self.complement[a]))
    }

    /// The ambient connection agreeing with `conn` on the subalgebra and given by `extra` on the complement.
    pub fn extend(&self, conn: &Connection, extra: &[Matrix]) -> Connection {
        let mut mats = vec![Matrix::zeros(conn.dim, conn.dim); self.rank()];
        for (a, &i) in self.sub.iter().enumerate() {
            mats[i] = conn.mats[a].clone();
        }
        for (b, &j) in self.complement.iter().enumerate() {
            if let Some(m) = extra.get(b) {
                mats[j] = m.clone();
            }
        }
        Connection::new(conn.dim, mats)
    }

    /// Restriction of an ambient connection to the subalgebra.
    pub fn restrict_connection(&self, conn: &Connection) -> Connection {
        Connection::new(conn.dim, self.sub.iter().map(|&i| conn.mats[i].clone()).collect())
    }

    pub fn check_module(&self, conn: &Connection) -> Result<(), PairError> {
        if conn.mats.len() != self.sub.len() {
            return Err(PairError::Shape { expected: self.sub.len(), found: conn.mats.len() });
        }
        if !is_flat(&self.sub_spec(), conn) {
            return Err(PairError::NotFlat);
        }
        Ok(())
    }
}

fn renumber(mask: u32, idx: &[usize]) -> u32 {
    idx.iter().enumerate().filter(|(_, &i)| mask & (1 << i) != 0).fold(0, |m, (a, _)| m | (1 << a))
}

/// The restriction `Ω*(L) -> Ω*(A)`.
pub fn restrict<C: Coeff>(pair: &LiePair, omega: &Form<C>) -> Form<C> {
    let mut out = Form::zero(pair.sub.len());
    for (m, c) in &omega.terms {
        if m & pair.complement_mask() == 0 {
            out.add_term(pair.sub_part(*m), c);
        }
    }
    out
}

/// `G_p^k ⊗ E` inside `Ω^k(L) ⊗ E`, as spans of basis tensors.
#[derive(Debug, Clone)]
pub struct LerayFiltration {
    pub dim_e: usize,
    /// `steps[p][k]`; `steps` runs up to the first zero step.
    pub steps: Vec<BTreeMap<i32, Subspace>>,
}

impl LerayFiltration {
    pub fn dim(&self, p: usize, k: i32) -> usize {
        self.steps.get(p).and_then(|s| s.get(&k)).map_or(0, |s| s.dim())
    }

    pub fn contains(&self, p: usize, k: i32, v: &[Q]) -> bool {
        match self.steps.get(p).and_then(|s| s.get(&k)) {
            Some(s) => s.contains(v),
            None => v.iter().all(Zero::is_zero),
        }
    }
}

pub fn leray_filtration(pair: &LiePair, dim_e: usize) -> LerayFiltration {
    let basis = FormBasis::new(pair.rank());
    let top = pair.quotient_rank() + 1;
    let steps = (0..=top)
        .map(|p| {
            (0..=pair.rank())
                .map(|k| {
                    let amb = basis.dim(k) * dim_e;
                    let vs = basis.by_degree[k].iter().enumerate().filter(|(_, &m)| pair.m_degree(m) >= p).flat_map(
                        |(i, _)| (0..dim_e).map(move |a| crate::exact::unit_vec(amb, i * dim_e + a)),
                    );
                    (k as i32, Subspace::span(amb, vs))
                })
                .collect()
        })
        .collect();
    LerayFiltration { dim_e, steps }
}

/// The standard complex of a flat ambient connection with its Leray filtration.
pub fn filtered_complex(pair: &LiePair, conn: &Connection) -> Result<FilteredComplex, PairError> {
    let c = standard_complex(&pair.ambient, conn).map_err(|_| PairError::NotFlat)?;
    let f = leray_filtration(pair, conn.dim);
    Ok(FilteredComplex::new(c, f.steps)?)
}

/// The Bott action of the subalgebra on `L/A` in the complement basis: `∇_a π(m_j) = π([a, m_j])`.
pub fn bott_connection(pair: &LiePair) -> Connection {
    let n = pair.quotient_rank();
    let mats = pair
        .sub
        .iter()
        .map(|&a| {
            let mut m = Matrix::zeros(n, n);
            for (j, &mj) in pair.complement.iter().enumerate() {
                for (k, &mk) in pair.complement.iter().enumerate() {
                    m.set(k, j, pair.ambient.cq(a, mj, mk));
                }
            }
            m
        })
        .collect();
    Connection::new(n, mats)
}

/// The dual module `(L/A)^∨`: `∇_a m_j^∨ = -Σ_k c^{m_j}_{a, m_k} m_k^∨`.
pub fn bott_dual(pair: &LiePair) -> Connection {
    let b = bott_connection(pair);
    Connection::new(b.dim, b.mats.iter().map(|m| m.transpose().scale(&-Q::one())).collect())
}

/// `⋀^r` of a module, basis `r`-subsets in lexicographic order, acting as a derivation.
pub fn exterior_power(conn: &Connection, r: usize) -> Connection {
    let n = conn.dim;
    let subsets = masks_of_degree(n, r);
    let index: BTreeMap<u32, usize> = subsets.iter().enumerate().map(|(i, &m)| (m, i)).collect();
    let mats = conn
        .mats
        .iter()
        .map(|a| {
            let mut out = Matrix::zeros(subsets.len(), subsets.len());
            for (col, &s) in subsets.iter().enumerate() {
                for j in mask_indices(s) {
                    let rest = s & !(1 << j);
                    for k in 0..n {
                        let c = a.get(k, j);
                        if c.is_zero() || rest & (1 << k) != 0 {
                            continue;
                        }
                        // e_j replaced by e_k in place, then moved into sorted position
                        let target = rest | (1 << k);
                        let sign = position_sign(rest, j) * position_sign(rest, k);
                        out.add_at(index[&target], col, &(c * q(sign as i64)));
                    }
                }
            }
            out
        })
        .collect();
    Connection::new(subsets.len(), mats)
}

/// `(-1)^{#{x ∈ rest : x < i}}`.
fn position_sign(rest: u32, i: usize) -> i32 {
    if (rest & ((1u32 << i) - 1)).count_ones() % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Tensor product of two modules over the same algebra, basis `(x, y) ↦ x * dim(y) + y`.
pub fn tensor(a: &Connection, b: &Connection) -> Connection {
    let ia = Matrix::identity(a.dim);
    let ib = Matrix::identity(b.dim);
    let mats = a.mats.iter().zip(&b.mats).map(|(x, y)| kron(x, &ib).add(&kron(&ia, y))).collect();
    Connection::new(a.dim * b.dim, mats)
}

pub fn kron(a: &Matrix, b: &Matrix) -> Matrix {
    let mut out = Matrix::zeros(a.rows * b.rows, a.cols * b.cols);
    for i in 0..a.rows {
        for j in 0..a.cols {
            let x = a.get(i, j);
            if x.is_zero() {
                continue;
            }
            for k in 0..b.rows {
                for l in 0..b.cols {
                    let y = b.get(k, l);
                    if !y.is_zero() {
                        out.set(i * b.rows + k, j * b.cols + l, x * y);
                    }
                }
            }
        }
    }
    out
}

/// The module `⋀^r(L/A)^∨ ⊗ E` over the subalgebra.
pub fn bott_module(pair: &LiePair, r: usize, e: &Connection) -> Connection {
    tensor(&exterior_power(&bott_dual(pair), r), e)
}

/// `G_r/G_{r+1}[r]` of `Ω*(L)⊗E`, its Bott model, and the comparison map.
#[derive(Debug, Clone)]
pub struct GradedPiece {
    pub r: usize,
    pub quotient: CochainComplex,
    pub bott: CochainComplex,
    /// `phi[n]` maps degree `n` of `quotient` to degree `n` of `bott`.
    pub phi: BTreeMap<i32, Matrix>,
}

impl GradedPiece {
    /// Largest entry-count of `φ d - d φ` (zero for a chain map).
    pub fn chain_residual(&self) -> usize {
        let mut bad = 0;
        for (&n, phi) in &self.phi {
            let Some(next) = self.phi.get(&(n + 1)) else { continue };
            let lhs = next.mul(&self.quotient.d(n));
            let rhs = self.bott.d(n).mul(phi);
            let diff = lhs.sub(&rhs);
            bad += (0..diff.rows).flat_map(|i| (0..diff.cols).map(move |j| (i, j))).filter(|&(i, j)| !diff.get(i, j).is_zero()).count();
        }
        bad
    }

    pub fn is_bijective(&self) -> bool {
        self.phi.values().all(|m| m.rows == m.cols && m.rank() == m.rows)
    }
}

/// Basis of `G_r/G_{r+1}` in form degree `k`: tensors `e_S ⊗ v_a` with exactly `r` complement directions.
fn piece_basis(pair: &LiePair, basis: &FormBasis, k: usize, r: usize, dim_e: usize) -> Vec<(u32, usize)> {
    basis.by_degree[k]
        .iter()
        .filter(|&&m| pair.m_degree(m) == r)
        .flat_map(|&m| (0..dim_e).map(move |a| (m, a)))
        .collect()
}

/// Builds the graded piece of the Leray filtration with coefficients in a flat module of the subalgebra.
pub fn graded_piece(pair: &LiePair, e: &Connection, r: usize) -> Result<GradedPiece, PairError> {
    pair.check_module(e)?;
    let n = e.dim;
    let basis = FormBasis::new(pair.rank());
    let ext = pair.extend(e, &[]);
    let sub = pair.sub_spec();
    let module = bott_module(pair, r, e);
    let bott = standard_complex(&sub, &module).map_err(|_| PairError::NotFlat)?;
    let sub_basis = FormBasis::new(pair.sub.len());
    let mu_index: BTreeMap<u32, usize> =
        masks_of_degree(pair.quotient_rank(), r).into_iter().enumerate().map(|(i, m)| (m, i)).collect();
    let sign_r = if r % 2 == 0 { Q::one() } else { -Q::one() };

    let mut bases = BTreeMap::new();
    let mut diffs = BTreeMap::new();
    let mut phi = BTreeMap::new();
    let (lo, hi) = (r, pair.rank());
    for k in lo..=hi {
        let deg = (k - r) as i32;
        let rows = piece_basis(pair, &basis, k, r, n);
        bases.insert(deg, rows.iter().map(|(m, a)| format!("{}⊗e{a}", crate::algebroid::mask_label(&pair.ambient, *m))).collect());
        if k < hi {
            let full = covariant_matrix(&pair.ambient, &ext, &basis, k);
            let targets = piece_basis(pair, &basis, k + 1, r, n);
            let mut d = Matrix::zeros(targets.len(), rows.len());
            for (j, &(m, a)) in rows.iter().enumerate() {
                let col = basis.index(m) * n + a;
                for (i, &(tm, b)) in targets.iter().enumerate() {
                    let v = full.get(basis.index(tm) * n + b, col);
                    if !v.is_zero() {
                        d.set(i, j, v * &sign_r);
                    }
                }
            }
            diffs.insert(deg, d);
        }
        let qdeg = k - r;
        let target_dim = sub_basis.dim(qdeg) * module.dim;
        let mut m = Matrix::zeros(target_dim, rows.len());
        let shift = if (r * k) % 2 == 0 { 1 } else { -1 };
        for (j, &(mask, a)) in rows.iter().enumerate() {
            let alpha_amb = mask & pair.sub_mask();
            let mu_amb = mask & pair.complement_mask();
            let sign = mask_sign(alpha_amb, mu_amb) * shift;
            let alpha = pair.sub_part(mask);
            let mu = pair.complement_part(mask);
            let row = sub_basis.index(alpha) * module.dim + mu_index[&mu] * n + a;
            m.set(row, j, q(sign as i64));
        }
        phi.insert(deg, m);
    }
    let quotient = CochainComplex::new(GradedVectorSpace { bases }, diffs)?;
    Ok(GradedPiece { r, quotient, bott, phi })
}

/// `E₁` dimensions computed from the filtered complex and from the Bott standard complexes.
#[derive(Debug, Clone)]
pub struct LerayE1 {
    /// `(p, q) -> dim` from the generic spectral sequence.
    pub generic: BTreeMap<(i64, i64), usize>,
    /// `(p, q) -> dim H^q(A; ⋀^p(L/A)^∨ ⊗ E)`.
    pub via_pieces: BTreeMap<(i64, i64), usize>,
    pub agree: bool,
    pub degenerate: bool,
    pub total: BTreeMap<i32, usize>,
}

impl LerayE1 {
    pub fn column_sum(&self, n: i32) -> usize {
        self.generic.iter().filter(|((p, q), _)| (p + q) as i32 == n).map(|(_, d)| d).sum()
    }
}

/// Leray `E₁` of a pair with coefficients in a flat ambient module (trivial when `None`).
pub fn leray_e1(pair: &LiePair, conn: Option<&Connection>) -> Result<LerayE1, PairError> {
    let trivial = Connection::trivial(pair.rank(), 1);
    let conn = conn.unwrap_or(&trivial);
    let f = filtered_complex(pair, conn)?;
    let ss = spectral_sequence(&f, 1)?;
    let mut generic = BTreeMap::new();
    for e in ss.pages[1].entries.values() {
        if e.dim > 0 {
            generic.insert((e.p, e.q()), e.dim);
        }
    }
    let restricted = pair.restrict_connection(conn);
    let mut via_pieces = BTreeMap::new();
    for r in 0..=pair.quotient_rank() {
        let piece = graded_piece(pair, &restricted, r)?;
        let h = cohomology(&piece.bott)?;
        for qd in piece.bott.degrees() {
            let d = h.dim(qd);
            if d > 0 {
                via_pieces.insert((r as i64, qd as i64), d);
            }
        }
    }
    Ok(LerayE1 { agree: generic == via_pieces, generic, via_pieces, degenerate: ss.degenerates_at_e1, total: ss.total })
}

/// Checks `G_p ∧ G_q ⊆ G_{p+q}` on basis forms.
pub fn filtration_is_multiplicative(pair: &LiePair) -> bool {
    let r = pair.rank();
    for s in 0u32..(1 << r) {
        for t in 0u32..(1 << r) {
            let a = Form::<Q>::term(r, &mask_indices(s), Q::one());
            let b = Form::<Q>::term(r, &mask_indices(t), Q::one());
            let w = crate::algebroid::wedge(&a, &b);
            let p = pair.m_degree(s) + pair.m_degree(t);
            if w.terms.keys().any(|&m| pair.m_degree(m) < p) {
                return false;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    fn aff_pair() -> LiePair {
        LiePair::new(catalog::aff1(), &[0]).unwrap()
    }

    #[test]
    fn restriction_examples() {
        let p = aff_pair();
        let x = Form::<Q>::dual(2, 0);
        let y = Form::<Q>::dual(2, 1);
        assert!(restrict(&p, &crate::algebroid::wedge(&x, &y)).is_zero());
        assert_eq!(restrict(&p, &x), Form::dual(1, 0));
        assert!(restrict(&p, &y).is_zero());
        assert_eq!(restrict(&p, &Form::<Q>::one(2)), Form::one(1));
    }

    #[test]
    fn aff_filtration_dims() {
        let f = leray_filtration(&aff_pair(), 1);
        assert_eq!((f.dim(1, 1), f.dim(1, 2), f.dim(2, 2)), (1, 1, 0));
    }

    #[test]
    fn bott_examples() {
        let b = bott_connection(&aff_pair());
        assert_eq!(b.mats[0], Matrix::from_i64(&[&[1]]));
        let borel = LiePair::new(catalog::sl2(), &[0, 1]).unwrap();
        let b = bott_connection(&borel);
        assert_eq!(b.mats[0], Matrix::from_i64(&[&[-2]]));
        assert!(is_flat(&borel.sub_spec(), &b));
        assert_eq!(bott_dual(&aff_pair()).mats[0], Matrix::from_i64(&[&[-1]]));
    }

    #[test]
    fn non_closed_sub_is_rejected() {
        assert!(matches!(LiePair::new(catalog::sl2(), &[1, 2]), Err(PairError::NotClosed { .. })));
    }

    #[test]
    fn exterior_power_of_adjoint_is_flat() {
        let g = catalog::sl2();
        let ad = catalog::adjoint(&g);
        for r in 0..=3 {
            assert!(is_flat(&g, &exterior_power(&ad, r)));
        }
        let top = exterior_power(&ad, 3);
        assert!(top.mats.iter().all(|m| m.trace().is_zero()));
    }

    #[test]
    fn graded_pieces_are_chain_isomorphisms() {
        let pairs = vec![
            aff_pair(),
            LiePair::new(catalog::sl2(), &[0, 1]).unwrap(),
            LiePair::new(catalog::sl2(), &[]).unwrap(),
            LiePair::new(catalog::heisenberg(), &[2]).unwrap(),
            LiePair::new(catalog::gl2(), &[0, 1, 2]).unwrap(),
        ];
        for p in pairs {
            let e = Connection::trivial(p.sub.len(), 1);
            for r in 0..=p.quotient_rank() + 1 {
                let g = graded_piece(&p, &e, r).unwrap();
                assert_eq!(g.chain_residual(), 0, "{:?} r={r}", p.sub);
                assert!(g.is_bijective());
            }
        }
    }

    #[test]
    fn e1_agrees_both_ways() {
        for p in [aff_pair(), LiePair::new(catalog::sl2(), &[]).unwrap(), LiePair::new(catalog::sl2(), &[0, 1, 2]).unwrap()] {
            let e1 = leray_e1(&p, None).unwrap();
            assert!(e1.agree, "{:?} {:?}", e1.generic, e1.via_pieces);
        }
    }
}
