//! Standard small Lie algebras, chart algebroids and modules used as fixtures.

use crate::algebroid::{Connection, LieAlgebroidSpec};
use crate::exact::{q, Laurent, Matrix, Q};
use num_traits::One;

/// `sl2` with basis `h, e, f`: `[h,e] = 2e`, `[h,f] = -2f`, `[e,f] = h`.
pub fn sl2() -> LieAlgebroidSpec {
    LieAlgebroidSpec::point(
        &["h", "e", "f"],
        &[(0, 1, vec![(1, q(2))]), (0, 2, vec![(2, q(-2))]), (1, 2, vec![(0, q(1))])],
    )
}

/// `gl2` with basis `h, e, f, z`, `z` central.
pub fn gl2() -> LieAlgebroidSpec {
    LieAlgebroidSpec::point(
        &["h", "e", "f", "z"],
        &[(0, 1, vec![(1, q(2))]), (0, 2, vec![(2, q(-2))]), (1, 2, vec![(0, q(1))])],
    )
}

/// The affine line algebra: `[x, y] = y`.
pub fn aff1() -> LieAlgebroidSpec {
    LieAlgebroidSpec::point(&["x", "y"], &[(0, 1, vec![(1, q(1))])])
}

pub fn heisenberg() -> LieAlgebroidSpec {
    LieAlgebroidSpec::point(&["x", "y", "z"], &[(0, 1, vec![(2, q(1))])])
}

pub fn abelian(n: usize) -> LieAlgebroidSpec {
    let names: Vec<String> = (1..=n).map(|i| format!("a{i}")).collect();
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    LieAlgebroidSpec::point(&refs, &[])
}

/// The tangent algebroid of the affine line, frame `∂_t`.
pub fn theta_chart() -> LieAlgebroidSpec {
    LieAlgebroidSpec::chart(&["dt"], &[], vec![Laurent::constant(Q::one())])
}

pub fn trivial(spec: &LieAlgebroidSpec, dim: usize) -> Connection {
    Connection::trivial(spec.rank(), dim)
}

/// The adjoint representation, `ad(l_i)[k][j] = c^k_{ij}`.
pub fn adjoint(spec: &LieAlgebroidSpec) -> Connection {
    let r = spec.rank();
    let mats = (0..r)
        .map(|i| {
            let mut m = Matrix::zeros(r, r);
            for j in 0..r {
                for k in 0..r {
                    m.set(k, j, spec.cq(i, j, k));
                }
            }
            m
        })
        .collect();
    Connection::new(r, mats)
}

/// The defining representation of `sl2` on `ℚ²`.
pub fn sl2_standard() -> Connection {
    Connection::new(
        2,
        vec![
            Matrix::from_i64(&[&[1, 0], &[0, -1]]),
            Matrix::from_i64(&[&[0, 1], &[0, 0]]),
            Matrix::from_i64(&[&[0, 0], &[1, 0]]),
        ],
    )
}

/// The defining representation of `gl2`.
pub fn gl2_standard() -> Connection {
    let mut c = sl2_standard();
    c.mats.push(Matrix::identity(2));
    c
}

/// The module of binary quadratic forms `x², xy, y²` of `sl2`.
pub fn sl2_sym2() -> Connection {
    Connection::new(
        3,
        vec![
            Matrix::from_i64(&[&[2, 0, 0], &[0, 0, 0], &[0, 0, -2]]),
            Matrix::from_i64(&[&[0, 1, 0], &[0, 0, 2], &[0, 0, 0]]),
            Matrix::from_i64(&[&[0, 0, 0], &[2, 0, 0], &[0, 1, 0]]),
        ],
    )
}

/// A one-dimensional module where every basis element acts by the given scalar.
pub fn scalar_module(weights: &[Q]) -> Connection {
    Connection::new(1, weights.iter().map(|w| Matrix::from_rows(vec![vec![w.clone()]])).collect())
}

/// `[l0, l2] = -2 l0` with the pair `⟨l0, l1⟩` and `∇_{l0} = I₂`, `∇_{l1} = 0`.
///
/// Its Atiyah class is nonzero and `H²(A; End E)` carries a commutator obstruction.
pub fn nonvanishing_fixture() -> crate::atiyah::AtiyahProblem {
    let spec = crate::atiyah::spec_from_entries(3, &[(0, 2, 0, -2)]);
    let pair = crate::liepair::LiePair::new(spec, &[0, 1]).expect("subalgebra");
    let module = Connection::new(2, vec![Matrix::identity(2), Matrix::zeros(2, 2)]);
    crate::atiyah::AtiyahProblem::new(pair, module).expect("flat module")
}
