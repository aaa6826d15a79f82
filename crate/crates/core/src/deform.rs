//! Maurer–Cartan elements over Artin rings, gauge action, obstructions and semiregularity maps.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::algebroid::{Connection, Form, FormBasis};
use crate::atiyah::{extend_connection, pair_algebra, AtiyahError, AtiyahProblem, PairAlgebra};
use crate::curved::{quotient_algebra, sigma_k1, underlying_complex, CurvedDga};
use crate::dg::{cohomology, CochainComplex, Cohomology, DgError};
use crate::exact::{add_scaled, factorial, is_zero_vec, q, solve, sub_vec, zero_vec, Matrix, Quotient, Q};
use crate::liepair::{graded_piece, leray_e1, PairError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DeformError {
    #[error("ring is not artinian: no power of `{0}` lies in the ideal")]
    NotArtinian(String),
    #[error("ring is not local: the ideal contains a unit")]
    NotLocal,
    #[error("malformed small extension: {0}")]
    BadExtension(String),
    #[error("element does not satisfy the Maurer–Cartan equation")]
    NotMaurerCartan,
    #[error("element has a nonzero constant term")]
    NotNilpotent,
    #[error("algebra has nonzero curvature")]
    Curved,
    #[error("algebra has no unit")]
    NoUnit,
    #[error("obstruction does not come from a lifting problem")]
    NotGenuine,
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error(transparent)]
    Atiyah(#[from] AtiyahError),
    #[error(transparent)]
    Pair(#[from] PairError),
    #[error(transparent)]
    Complex(#[from] DgError),
}

/// `K[u_1..u_m]/J` for a monomial ideal `J` of finite codimension inside `(u)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArtinRing {
    pub vars: Vec<String>,
    pub relations: Vec<Vec<u32>>,
    /// Standard monomials ordered by degree, then lexicographically; index 0 is `1`.
    pub monomials: Vec<Vec<u32>>,
    index: BTreeMap<Vec<u32>, usize>,
}

fn divides(a: &[u32], b: &[u32]) -> bool {
    a.iter().zip(b).all(|(x, y)| x <= y)
}

impl ArtinRing {
    pub fn new(vars: &[&str], relations: &[Vec<u32>]) -> Result<Self, DeformError> {
        let m = vars.len();
        if relations.iter().any(|r| r.len() != m) {
            return Err(DeformError::BadExtension("relation length".into()));
        }
        if relations.iter().any(|r| r.iter().all(|&e| e == 0)) {
            return Err(DeformError::NotLocal);
        }
        for (i, v) in vars.iter().enumerate() {
            let pure = relations.iter().any(|r| r[i] > 0 && r.iter().enumerate().all(|(j, &e)| j == i || e == 0));
            if !pure {
                return Err(DeformError::NotArtinian(v.to_string()));
            }
        }
        let standard = |e: &[u32]| !relations.iter().any(|r| divides(r, e));
        let mut seen: BTreeSet<Vec<u32>> = BTreeSet::new();
        let mut frontier = vec![vec![0; m]];
        seen.insert(vec![0; m]);
        while let Some(e) = frontier.pop() {
            for i in 0..m {
                let mut f = e.clone();
                f[i] += 1;
                if standard(&f) && seen.insert(f.clone()) {
                    frontier.push(f);
                }
            }
        }
        let mut monomials: Vec<Vec<u32>> = seen.into_iter().collect();
        monomials.sort_by_key(|e| (e.iter().sum::<u32>(), std::cmp::Reverse(e.clone())));
        let index = monomials.iter().enumerate().map(|(i, e)| (e.clone(), i)).collect();
        Ok(ArtinRing { vars: vars.iter().map(|s| s.to_string()).collect(), relations: relations.to_vec(), monomials, index })
    }

    /// `K[name]/(name^n)`.
    pub fn truncated(name: &str, n: u32) -> Self {
        ArtinRing::new(&[name], &[vec![n]]).expect("truncated polynomial ring")
    }

    pub fn dim(&self) -> usize {
        self.monomials.len()
    }

    pub fn index_of(&self, e: &[u32]) -> Option<usize> {
        self.index.get(e).copied()
    }

    pub fn mul_index(&self, i: usize, j: usize) -> Option<usize> {
        let e: Vec<u32> = self.monomials[i].iter().zip(&self.monomials[j]).map(|(a, b)| a + b).collect();
        self.index_of(&e)
    }

    /// Smallest `N` with `m^N = 0`.
    pub fn nilpotency_order(&self) -> u32 {
        self.monomials.iter().map(|e| e.iter().sum::<u32>()).max().unwrap_or(0) + 1
    }

    pub fn label(&self, i: usize) -> String {
        let parts: Vec<String> = self.monomials[i]
            .iter()
            .zip(&self.vars)
            .filter(|(e, _)| **e > 0)
            .map(|(e, v)| if *e == 1 { v.clone() } else { format!("{v}^{e}") })
            .collect();
        if parts.is_empty() {
            "1".into()
        } else {
            parts.join("·")
        }
    }
}

/// `0 → (μ) → B → B/(μ) → 0` with `μ·m_B = 0`.
#[derive(Debug, Clone)]
pub struct SmallExtension {
    pub big: ArtinRing,
    pub small: ArtinRing,
    /// Index of `μ` among the monomials of `big`.
    pub kernel: usize,
    /// Index in `big` of each monomial of `small`.
    pub embed: Vec<usize>,
}

impl SmallExtension {
    pub fn new(big: ArtinRing, kernel: &[u32]) -> Result<Self, DeformError> {
        let k = big.index_of(kernel).ok_or_else(|| DeformError::BadExtension("kernel is not a standard monomial".into()))?;
        if k == 0 {
            return Err(DeformError::BadExtension("kernel is the unit".into()));
        }
        for i in 0..big.vars.len() {
            let mut e = kernel.to_vec();
            e[i] += 1;
            if big.index_of(&e).is_some() {
                return Err(DeformError::BadExtension(format!("kernel times {} is nonzero", big.vars[i])));
            }
        }
        let mut relations = big.relations.clone();
        relations.push(kernel.to_vec());
        let vars: Vec<&str> = big.vars.iter().map(String::as_str).collect();
        let small = ArtinRing::new(&vars, &relations)?;
        let embed = small.monomials.iter().map(|e| big.index_of(e).expect("small monomial is standard in big")).collect();
        Ok(SmallExtension { big, small, kernel: k, embed })
    }

    /// `K[u]/(u^{n+1}) → K[u]/(u^n)`.
    pub fn truncation(name: &str, n: u32) -> Self {
        SmallExtension::new(ArtinRing::truncated(name, n + 1), &[n]).expect("truncation tower step")
    }
}

/// An element of `L ⊗ B`: one vector of `L` per standard monomial.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tensor {
    pub parts: Vec<Vec<Q>>,
}

impl Tensor {
    pub fn zero(ring_dim: usize, dim: usize) -> Self {
        Tensor { parts: vec![zero_vec(dim); ring_dim] }
    }

    pub fn is_zero(&self) -> bool {
        self.parts.iter().all(|p| is_zero_vec(p))
    }

    pub fn add(&self, other: &Tensor) -> Tensor {
        Tensor { parts: self.parts.iter().zip(&other.parts).map(|(a, b)| crate::exact::add_vec(a, b)).collect() }
    }

    pub fn sub(&self, other: &Tensor) -> Tensor {
        Tensor { parts: self.parts.iter().zip(&other.parts).map(|(a, b)| sub_vec(a, b)).collect() }
    }

    pub fn scale(&self, c: &Q) -> Tensor {
        Tensor { parts: self.parts.iter().map(|a| crate::exact::scale_vec(c, a)).collect() }
    }
}

/// A DG-Lie algebra given as an uncurved graded algebra with commutator bracket, tensored with an Artin ring.
#[derive(Debug, Clone, Copy)]
pub struct Deformations<'a> {
    pub dgla: &'a CurvedDga,
    pub ring: &'a ArtinRing,
}

impl<'a> Deformations<'a> {
    pub fn new(dgla: &'a CurvedDga, ring: &'a ArtinRing) -> Result<Self, DeformError> {
        if !is_zero_vec(&dgla.r) {
            return Err(DeformError::Curved);
        }
        Ok(Deformations { dgla, ring })
    }

    pub fn zero(&self) -> Tensor {
        Tensor::zero(self.ring.dim(), self.dgla.dim())
    }

    /// `v ⊗ m` for the monomial with the given exponents.
    pub fn monomial(&self, exps: &[u32], v: &[Q]) -> Tensor {
        let mut t = self.zero();
        if let Some(i) = self.ring.index_of(exps) {
            t.parts[i] = v.to_vec();
        }
        t
    }

    pub fn is_nilpotent(&self, x: &Tensor) -> bool {
        is_zero_vec(&x.parts[0])
    }

    pub fn d(&self, x: &Tensor) -> Tensor {
        Tensor { parts: x.parts.iter().map(|p| self.dgla.apply_d(p)).collect() }
    }

    fn combine(&self, x: &Tensor, y: &Tensor, f: impl Fn(&[Q], &[Q]) -> Vec<Q>) -> Tensor {
        let mut out = self.zero();
        for (i, a) in x.parts.iter().enumerate() {
            if is_zero_vec(a) {
                continue;
            }
            for (j, b) in y.parts.iter().enumerate() {
                if is_zero_vec(b) {
                    continue;
                }
                if let Some(k) = self.ring.mul_index(i, j) {
                    add_scaled(&mut out.parts[k], &Q::one(), &f(a, b));
                }
            }
        }
        out
    }

    pub fn bracket(&self, x: &Tensor, y: &Tensor) -> Tensor {
        self.combine(x, y, |a, b| self.dgla.commutator(a, b))
    }

    pub fn product(&self, x: &Tensor, y: &Tensor) -> Tensor {
        self.combine(x, y, |a, b| self.dgla.product(a, b))
    }

    /// `dx + ½[x, x]`.
    pub fn mc_residual(&self, x: &Tensor) -> Tensor {
        self.d(x).add(&self.bracket(x, x).scale(&Q::new(1.into(), 2.into())))
    }

    pub fn is_maurer_cartan(&self, x: &Tensor) -> bool {
        self.is_nilpotent(x) && self.mc_residual(x).is_zero()
    }

    /// Checks `(d + [x,-])² = [dx + ½[x,x], -]` on every basis element.
    pub fn perturbed_square_check(&self, x: &Tensor) -> bool {
        let res = self.mc_residual(x);
        let dx = |y: &Tensor| self.d(y).add(&self.bracket(x, y));
        (0..self.dgla.dim()).all(|j| {
            let y = self.monomial(&vec![0; self.ring.vars.len()], &self.dgla.basis(j));
            dx(&dx(&y)) == self.bracket(&res, &y)
        })
    }

    /// `e^a ∗ x = x + Σ_n ad_a^n/(n+1)! ([a, x] - da)`.
    pub fn gauge_act(&self, a: &Tensor, x: &Tensor) -> Tensor {
        let mut term = self.bracket(a, x).sub(&self.d(a));
        let mut out = x.clone();
        let mut n = 0;
        while !term.is_zero() {
            out = out.add(&term.scale(&(Q::one() / factorial(n + 1))));
            term = self.bracket(a, &term);
            n += 1;
        }
        out
    }

    fn unit_tensor(&self, unit: &[Q]) -> Tensor {
        self.monomial(&vec![0; self.ring.vars.len()], unit)
    }

    /// `exp(a) = Σ a^n/n!` for nilpotent `a`.
    pub fn exp(&self, unit: &[Q], a: &Tensor) -> Tensor {
        let mut out = self.unit_tensor(unit);
        let mut term = out.clone();
        let mut n = 0;
        loop {
            n += 1;
            term = self.product(&term, a).scale(&(Q::one() / q(n)));
            if term.is_zero() {
                return out;
            }
            out = out.add(&term);
        }
    }

    /// `log(g) = Σ (-1)^{n+1} (g-1)^n/n` for unipotent `g`.
    pub fn log(&self, unit: &[Q], g: &Tensor) -> Tensor {
        let z = g.sub(&self.unit_tensor(unit));
        let mut out = self.zero();
        let mut power = z.clone();
        let mut n = 1;
        while !power.is_zero() {
            let c = if n % 2 == 1 { Q::one() } else { -Q::one() } / q(n);
            out = out.add(&power.scale(&c));
            power = self.product(&power, &z);
            n += 1;
        }
        out
    }

    /// `BCH(a, b) = log(e^a e^b)`.
    pub fn bch(&self, unit: &[Q], a: &Tensor, b: &Tensor) -> Tensor {
        self.log(unit, &self.product(&self.exp(unit, a), &self.exp(unit, b)))
    }

    /// `e^a ∗ (e^b ∗ x) = e^{BCH(a,b)} ∗ x`.
    pub fn gauge_composition_check(&self, unit: &[Q], a: &Tensor, b: &Tensor, x: &Tensor) -> bool {
        self.gauge_act(a, &self.gauge_act(b, x)) == self.gauge_act(&self.bch(unit, a, b), x)
    }
}

/// The unit of a graded algebra, if any.
pub fn algebra_unit(a: &CurvedDga) -> Option<Vec<Q>> {
    let n = a.dim();
    let zero_deg = a.basis_of_degree(0);
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for j in 0..n {
        for k in 0..n {
            let target = if j == k { Q::one() } else { Q::zero() };
            let left: Vec<Q> = zero_deg.iter().map(|&i| coeff(&a.table[i][j], k)).collect();
            let right: Vec<Q> = zero_deg.iter().map(|&i| coeff(&a.table[j][i], k)).collect();
            rows.push(left);
            rhs.push(target.clone());
            rows.push(right);
            rhs.push(target);
        }
    }
    let m = Matrix::from_rows(rows);
    let sol = solve(&m, &rhs).ok()??;
    let mut u = zero_vec(n);
    for (c, &i) in sol.iter().zip(&zero_deg) {
        u[i] = c.clone();
    }
    Some(u)
}

fn coeff(entries: &[(usize, Q)], k: usize) -> Q {
    entries.iter().find(|(i, _)| *i == k).map(|(_, c)| c.clone()).unwrap_or_else(Q::zero)
}

/// Coordinates of the degree-`n` part of `v` in the basis order of that degree.
pub fn degree_coords(a: &CurvedDga, v: &[Q], n: i32) -> Vec<Q> {
    a.basis_of_degree(n).iter().map(|&i| v[i].clone()).collect()
}

pub fn from_degree_coords(a: &CurvedDga, c: &[Q], n: i32) -> Vec<Q> {
    let mut v = zero_vec(a.dim());
    for (x, &i) in c.iter().zip(&a.basis_of_degree(n)) {
        v[i] = x.clone();
    }
    v
}

/// First-order deformations over `K[u]/(u²)` and the checks identifying gauge orbits with `H¹`.
#[derive(Debug, Clone)]
pub struct FirstOrder {
    pub h1_dim: usize,
    /// Cocycle representatives of a basis of `H¹`.
    pub representatives: Vec<Vec<Q>>,
    /// `mc_residual(u·x) = u·dx` and `[u·x, u·y] = 0` on degree-1 basis elements.
    pub mc_is_cocycles: bool,
    /// `e^{u a} ∗ (u x) = u (x - da)` on basis elements.
    pub gauge_is_translation: bool,
    pub well_defined: bool,
    pub injective: bool,
    pub surjective: bool,
}

impl FirstOrder {
    pub fn bijective(&self) -> bool {
        self.mc_is_cocycles && self.gauge_is_translation && self.well_defined && self.injective && self.surjective
    }
}

pub fn first_order_classes(dgla: &CurvedDga) -> Result<FirstOrder, DeformError> {
    let ring = ArtinRing::truncated("u", 2);
    let ctx = Deformations::new(dgla, &ring)?;
    let complex = underlying_complex(dgla)?;
    let h = cohomology(&complex)?;
    let g1 = h.group(1);
    let ones = dgla.basis_of_degree(1);
    let zeros = dgla.basis_of_degree(0);
    let u = |v: &[Q]| ctx.monomial(&[1], v);

    let mc_is_cocycles = ones.iter().all(|&i| {
        let b = dgla.basis(i);
        ctx.mc_residual(&u(&b)) == u(&dgla.apply_d(&b)) && ones.iter().all(|&j| ctx.bracket(&u(&b), &u(&dgla.basis(j))).is_zero())
    });
    let gauge_is_translation = zeros.iter().all(|&a| {
        let av = dgla.basis(a);
        ones.iter().all(|&i| {
            let b = dgla.basis(i);
            ctx.gauge_act(&u(&av), &u(&b)) == u(&sub_vec(&b, &dgla.apply_d(&av)))
        })
    });

    let to_c1 = |v: &[Q]| degree_coords(dgla, v, 1);
    let z1 = g1.cocycles().clone();
    let well_defined = z1.basis().iter().all(|z| {
        let zv = from_degree_coords(dgla, z, 1);
        let cz = g1.class_of(z);
        zeros.iter().all(|&a| {
            let moved = ctx.gauge_act(&u(&dgla.basis(a)), &u(&zv));
            g1.class_of(&to_c1(&moved.parts[1])) == cz
        })
    });

    // Cocycles with zero class are gauge equivalent to 0.
    let proj = g1.projection();
    let kernel_cols: Vec<Vec<Q>> = z1.basis().to_vec();
    let image = Matrix::from_columns(g1.dim, &kernel_cols.iter().map(|z| proj.mul_vec(z)).collect::<Vec<_>>());
    let kernel = crate::exact::rank_kernel_image(&image).kernel;
    let d0 = complex.d(0);
    let mut injective = true;
    for k in &kernel {
        let mut z = vec![Q::zero(); complex.dim(1)];
        for (c, b) in k.iter().zip(&kernel_cols) {
            add_scaled(&mut z, c, b);
        }
        let a = if zeros.is_empty() { None } else { solve(&d0, &z).ok().flatten() };
        let ok = match a {
            Some(a) => {
                let av = from_degree_coords(dgla, &a, 0);
                let zv = from_degree_coords(dgla, &z, 1);
                ctx.gauge_act(&u(&av), &u(&zv)).is_zero()
            }
            None => is_zero_vec(&z),
        };
        injective &= ok;
    }

    let surjective = g1.representatives.iter().enumerate().all(|(i, r)| {
        let rv = from_degree_coords(dgla, r, 1);
        let mut e = zero_vec(g1.dim);
        e[i] = Q::one();
        ctx.is_maurer_cartan(&u(&rv)) && g1.class_of(r) == e
    });

    let representatives = g1.representatives.iter().map(|r| from_degree_coords(dgla, r, 1)).collect();
    Ok(FirstOrder { h1_dim: g1.dim, representatives, mc_is_cocycles, gauge_is_translation, well_defined, injective, surjective })
}

/// An obstruction class `[h] ∈ H² ⊗ (μ)` of a small extension.
#[derive(Debug, Clone)]
pub struct ObstructionClass {
    /// Label of the kernel monomial `μ`.
    pub kernel: String,
    /// Closed degree-2 representative `h`.
    pub representative: Vec<Q>,
    pub class: Vec<Q>,
    /// A second, randomly chosen set-lift gave the same class.
    pub lift_independent: bool,
    genuine: bool,
}

impl ObstructionClass {
    /// A class that does not come from a lifting problem.
    pub fn exploratory(dgla: &CurvedDga, representative: Vec<Q>) -> Result<Self, DeformError> {
        let h = cohomology(&underlying_complex(dgla)?)?;
        let class = h.group(2).class_of(&degree_coords(dgla, &representative, 2));
        Ok(ObstructionClass { kernel: String::new(), representative, class, lift_independent: false, genuine: false })
    }

    pub fn genuine(&self) -> bool {
        self.genuine
    }

    pub fn vanishes(&self) -> bool {
        self.class.iter().all(Zero::is_zero)
    }
}

#[derive(Debug, Clone)]
pub enum LiftOutcome {
    Lifted(Tensor),
    Obstructed(ObstructionClass),
}

fn set_lift(ext: &SmallExtension, x: &Tensor, dim: usize) -> Tensor {
    let mut t = Tensor::zero(ext.big.dim(), dim);
    for (i, p) in x.parts.iter().enumerate() {
        t.parts[ext.embed[i]] = p.clone();
    }
    t
}

/// Lifts a Maurer–Cartan element through a small extension or returns its obstruction.
pub fn lift_obstruction(dgla: &CurvedDga, ext: &SmallExtension, x: &Tensor, seed: u64) -> Result<LiftOutcome, DeformError> {
    let small = Deformations::new(dgla, &ext.small)?;
    if x.parts.len() != ext.small.dim() || !small.is_maurer_cartan(x) {
        return Err(DeformError::NotMaurerCartan);
    }
    let big = Deformations::new(dgla, &ext.big)?;
    let complex = underlying_complex(dgla)?;
    let h2 = cohomology(&complex)?;
    let g2 = h2.group(2);

    let residual_at_kernel = |lift: &Tensor| -> Result<Vec<Q>, DeformError> {
        let res = big.mc_residual(lift);
        for (i, p) in res.parts.iter().enumerate() {
            if i != ext.kernel && !is_zero_vec(p) {
                return Err(DeformError::Invariant("residual outside the kernel".into()));
            }
        }
        let h = res.parts[ext.kernel].clone();
        if !is_zero_vec(&dgla.apply_d(&h)) {
            return Err(DeformError::Invariant("obstruction representative is not closed".into()));
        }
        Ok(h)
    };

    let lift = set_lift(ext, x, dgla.dim());
    let h = residual_at_kernel(&lift)?;
    let class = g2.class_of(&degree_coords(dgla, &h, 2));

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut other = lift.clone();
    for i in dgla.basis_of_degree(1) {
        other.parts[ext.kernel][i] = q(rng.gen_range(-3..=3));
    }
    let h_other = residual_at_kernel(&other)?;
    let lift_independent = g2.class_of(&degree_coords(dgla, &h_other, 2)) == class;
    if !lift_independent {
        return Err(DeformError::Invariant("obstruction class depends on the set-lift".into()));
    }

    if class.iter().all(Zero::is_zero) {
        if is_zero_vec(&h) {
            return Ok(LiftOutcome::Lifted(lift));
        }
        let minus: Vec<Q> = degree_coords(dgla, &h, 2).iter().map(|c| -c).collect();
        let y = solve(&complex.d(1), &minus).ok().flatten().ok_or_else(|| DeformError::Invariant("exact class without primitive".into()))?;
        let mut corrected = lift;
        add_scaled(&mut corrected.parts[ext.kernel], &Q::one(), &from_degree_coords(dgla, &y, 1));
        if !big.is_maurer_cartan(&corrected) {
            return Err(DeformError::Invariant("corrected lift is not Maurer–Cartan".into()));
        }
        return Ok(LiftOutcome::Lifted(corrected));
    }
    Ok(LiftOutcome::Obstructed(ObstructionClass {
        kernel: ext.big.label(ext.kernel),
        representative: h,
        class,
        lift_independent,
        genuine: true,
    }))
}

/// Deformations of `(E, ∇^A)` as a module of the subalgebra, inside the pair algebra of an extension.
#[derive(Debug, Clone)]
pub struct ModuleProblem {
    pub problem: AtiyahProblem,
    pub algebra: PairAlgebra,
    /// `Ω*(A) ⊗ End E` with `d_{∇^A}`.
    pub dgla: CurvedDga,
    pub quotient: Quotient,
}

impl ModuleProblem {
    pub fn new(problem: AtiyahProblem) -> Result<Self, DeformError> {
        let ext = extend_connection(&problem, None)?;
        let algebra = pair_algebra(&problem.pair, &ext.full(&problem))?;
        let (dgla, quotient) = quotient_algebra(&algebra.curved);
        Ok(ModuleProblem { problem, algebra, dgla, quotient })
    }

    /// Zero extension of an element of `Ω*(A) ⊗ End E` into the pair algebra.
    pub fn lift(&self, v: &[Q]) -> Vec<Q> {
        self.quotient.lift(v)
    }

    /// An `End E`-valued form on the ambient basis whose masks lie in the subalgebra.
    pub fn element(&self, f: &Form<Matrix>) -> Vec<Q> {
        self.quotient.coords(&self.algebra.element(f))
    }

    pub fn complex(&self) -> Result<CochainComplex, DeformError> {
        Ok(underlying_complex(&self.dgla)?)
    }

    pub fn cohomology(&self) -> Result<Cohomology, DeformError> {
        Ok(cohomology(&self.complex()?)?)
    }
}

/// `τ_k(ob)` in `H^{k+2}(A; ⋀^k(L/A)^∨)` with the cochain `σ_k¹(ob)` it came from.
#[derive(Debug, Clone)]
pub struct SemiregularityValue {
    pub k: usize,
    /// `Tr(R^k h)/k!` in `Ω^{2k+2}(L)`.
    pub sigma: Vec<Q>,
    /// Bott-complex cocycle of the `G_k/G_{k+1}` part of `sigma`.
    pub cocycle: Vec<Q>,
    pub class: Vec<Q>,
    pub vanishes: bool,
}

pub fn tau_k(mp: &ModuleProblem, ob: &ObstructionClass, k: usize) -> Result<SemiregularityValue, DeformError> {
    let pa = &mp.algebra;
    let pair = &mp.problem.pair;
    let x = mp.lift(&ob.representative);
    let sigma = sigma_k1(&pa.curved, &pa.trace, k, &x);
    if !pa.target_filtration(k).contains(&sigma) {
        return Err(DeformError::Invariant("σ does not lie in G_k".into()));
    }
    let top = 2 * k + 2;
    if top > pair.rank() {
        return Ok(SemiregularityValue { k, sigma, cocycle: vec![], class: vec![], vanishes: true });
    }
    let piece = graded_piece(pair, &Connection::trivial(pair.sub.len(), 1), k)?;
    let deg = (k + 2) as i32;
    let basis = FormBasis::new(pair.rank());
    let coords: Vec<Q> =
        basis.by_degree[top].iter().filter(|&&m| pair.m_degree(m) == k).map(|&m| sigma[pa.form_index(m)].clone()).collect();
    let cocycle = piece.phi[&deg].mul_vec(&coords);
    if !is_zero_vec(&piece.bott.apply_d(deg, &cocycle)) {
        return Err(DeformError::Invariant("τ representative is not closed".into()));
    }
    let class = cohomology(&piece.bott)?.group(deg).class_of(&cocycle);
    let vanishes = class.iter().all(Zero::is_zero);
    Ok(SemiregularityValue { k, sigma, cocycle, class, vanishes })
}

/// Outcome of checking that `σ_k¹(ob)` is exact in `Ω*(L)/G_{k+1}`.
#[derive(Debug, Clone)]
pub struct AnnihilationReport {
    pub k: usize,
    pub tau: SemiregularityValue,
    /// `y` with `d_L y ≡ σ_k¹(ob)` modulo `G_{k+1}`.
    pub primitive: Option<Vec<Q>>,
    pub degenerate: bool,
    pub exploratory: bool,
    pub passed: bool,
}

pub fn annihilation_check(mp: &ModuleProblem, ob: &ObstructionClass, k: usize, exploratory: bool) -> Result<AnnihilationReport, DeformError> {
    if !ob.genuine && !exploratory {
        return Err(DeformError::NotGenuine);
    }
    let pa = &mp.algebra;
    let tau = tau_k(mp, ob, k)?;
    let sigma = &tau.sigma;
    let quot = Quotient::new(pa.target_filtration(k + 1));
    let delta = pa.target_delta();
    let sources: Vec<usize> = (0..pa.masks.len()).filter(|&i| pa.masks[i].count_ones() as usize == 2 * k + 1).collect();
    let cols: Vec<Vec<Q>> = sources.iter().map(|&j| quot.coords(&delta.column(j))).collect();
    let m = Matrix::from_columns(quot.dim(), &cols);
    let primitive = solve(&m, &quot.coords(sigma)).ok().flatten().map(|c| {
        let mut y = zero_vec(pa.masks.len());
        for (x, &j) in c.iter().zip(&sources) {
            y[j] = x.clone();
        }
        y
    });
    if let Some(y) = &primitive {
        let diff = sub_vec(&delta.mul_vec(y), sigma);
        if !pa.target_filtration(k + 1).contains(&diff) {
            return Err(DeformError::Invariant("primitive does not solve the coboundary equation".into()));
        }
    }
    let degenerate = leray_e1(&mp.problem.pair, None)?.degenerate;
    let passed = primitive.is_some() && (!degenerate || tau.vanishes);
    Ok(AnnihilationReport { k, tau, primitive, degenerate, exploratory, passed })
}

/// A first-order deformation of a module, to be lifted through `u² → u³`.
#[derive(Debug, Clone)]
pub struct Tower {
    pub name: String,
    pub problem: AtiyahProblem,
    pub first_order: FirstOrderSeed,
}

/// Coefficient of `u` in a tower.
#[derive(Debug, Clone)]
pub enum FirstOrderSeed {
    /// An `End E`-valued 1-form on the subalgebra.
    Form(Form<Matrix>),
    /// `d_{∇^A}(1 ⊗ M)`.
    Exact(Matrix),
}

fn one_form(rank: usize, terms: &[(usize, Matrix)]) -> Form<Matrix> {
    let mut f = Form::zero(rank);
    for (i, m) in terms {
        f.add_term(1 << i, m);
    }
    f
}

/// The towers used for the obstruction suite.
pub fn curated_towers() -> Vec<Tower> {
    use crate::catalog;
    use crate::liepair::LiePair;
    let a = Matrix::from_i64(&[&[0, 1], &[0, 0]]);
    let b = Matrix::from_i64(&[&[0, 0], &[1, 0]]);
    let commuting = |rank: usize, sub: &[usize]| {
        let pair = LiePair::new(catalog::abelian(rank), sub).expect("abelian pair");
        AtiyahProblem::new(pair, Connection::trivial(sub.len(), 2)).expect("trivial module")
    };
    let sl2 = AtiyahProblem::new(LiePair::new(catalog::sl2(), &[0, 1, 2]).expect("pair"), catalog::sl2_standard()).expect("module");
    let e = Matrix::from_i64(&[&[0, 1], &[0, 0]]);
    let form = |rank: usize| FirstOrderSeed::Form(one_form(rank, &[(0, a.clone()), (1, b.clone())]));
    vec![
        Tower { name: "abelian-h".into(), problem: commuting(2, &[0, 1]), first_order: form(2) },
        Tower { name: "abelian-h-in-3".into(), problem: commuting(3, &[0, 1]), first_order: form(3) },
        Tower { name: "fixture".into(), problem: catalog::nonvanishing_fixture(), first_order: form(3) },
        Tower { name: "sl2-standard".into(), problem: sl2, first_order: FirstOrderSeed::Exact(e) },
    ]
}

/// Outcome of one tower step: the module problem, the first-order element and the lift or obstruction.
#[derive(Debug, Clone)]
pub struct TowerStep {
    pub module: ModuleProblem,
    pub first_order: Tensor,
    pub outcome: LiftOutcome,
}

/// Lifts `u·x₁` from `K[u]/(u²)` to `K[u]/(u³)`.
pub fn run_tower(t: &Tower, seed: u64) -> Result<TowerStep, DeformError> {
    let module = ModuleProblem::new(t.problem.clone())?;
    let ext = SmallExtension::truncation("u", 2);
    let dgla = &module.dgla;
    let x1 = match &t.first_order {
        FirstOrderSeed::Form(f) => module.element(f),
        FirstOrderSeed::Exact(m) => {
            let mut f = Form::zero(t.problem.pair.rank());
            f.add_term(0, m);
            dgla.apply_d(&module.element(&f))
        }
    };
    if !is_zero_vec(&dgla.apply_d(&x1)) {
        return Err(DeformError::NotMaurerCartan);
    }
    let ctx = Deformations::new(dgla, &ext.small)?;
    let first_order = ctx.monomial(&[1], &x1);
    let outcome = lift_obstruction(dgla, &ext, &first_order, seed)?;
    Ok(TowerStep { module, first_order, outcome })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::liepair::LiePair;

    fn self_pair(spec: crate::algebroid::LieAlgebroidSpec, dim_e: usize) -> ModuleProblem {
        let r = spec.rank();
        let pair = LiePair::new(spec, &(0..r).collect::<Vec<_>>()).unwrap();
        ModuleProblem::new(AtiyahProblem::new(pair, Connection::trivial(r, dim_e)).unwrap()).unwrap()
    }

    #[test]
    fn artin_ring_monomials() {
        let r = ArtinRing::new(&["u", "v"], &[vec![2, 0], vec![0, 2]]).unwrap();
        assert_eq!(r.dim(), 4);
        assert_eq!(r.nilpotency_order(), 3);
        assert_eq!(r.label(3), "u·v");
        assert!(ArtinRing::new(&["u", "v"], &[vec![2, 0]]).is_err());
        assert!(SmallExtension::new(r.clone(), &[1, 0]).is_err());
        let ext = SmallExtension::new(r, &[1, 1]).unwrap();
        assert_eq!(ext.small.dim(), 3);
    }

    #[test]
    fn commutator_residual() {
        let mp = self_pair(catalog::abelian(2), 2);
        let a = Matrix::from_i64(&[&[0, 1], &[0, 0]]);
        let b = Matrix::from_i64(&[&[0, 0], &[1, 0]]);
        let ring = ArtinRing::truncated("u", 3);
        let ctx = Deformations::new(&mp.dgla, &ring).unwrap();
        let x = ctx.monomial(&[1], &mp.element(&one_form(2, &[(0, a.clone()), (1, b.clone())])));
        let mut expected = Form::zero(2);
        expected.add_term(0b11, &a.commutator(&b));
        let want = ctx.monomial(&[2], &mp.element(&expected));
        assert_eq!(ctx.mc_residual(&x), want);
        assert!(ctx.perturbed_square_check(&x));
    }

    #[test]
    fn gauge_composition_on_sl2() {
        let pair = LiePair::new(catalog::sl2(), &[0, 1, 2]).unwrap();
        let mp = ModuleProblem::new(AtiyahProblem::new(pair, catalog::sl2_standard()).unwrap()).unwrap();
        let unit = algebra_unit(&mp.dgla).unwrap();
        let ring = ArtinRing::truncated("u", 4);
        let ctx = Deformations::new(&mp.dgla, &ring).unwrap();
        let zeros = mp.dgla.basis_of_degree(0);
        let a = ctx.monomial(&[1], &mp.dgla.basis(zeros[1]));
        let b = ctx.monomial(&[1], &mp.dgla.basis(zeros[2]));
        let x = ctx.zero();
        assert!(ctx.gauge_composition_check(&unit, &a, &b, &x));
        let y = ctx.gauge_act(&a, &ctx.gauge_act(&b, &x));
        assert!(!y.is_zero() && ctx.is_maurer_cartan(&y));
        assert!(ctx.perturbed_square_check(&y));
    }

    #[test]
    fn first_order_dims() {
        for (spec, dim) in [(catalog::abelian(2), 2), (catalog::sl2(), 0), (catalog::aff1(), 1)] {
            let fo = first_order_classes(&self_pair(spec, 1).dgla).unwrap();
            assert_eq!(fo.h1_dim, dim);
            assert!(fo.bijective());
        }
    }

    #[test]
    fn towers() {
        for t in curated_towers() {
            let step = run_tower(&t, 3).unwrap();
            match (&t.name[..], &step.outcome) {
                ("sl2-standard", LiftOutcome::Lifted(_)) => {}
                (_, LiftOutcome::Obstructed(ob)) if t.name != "sl2-standard" => {
                    assert!(!ob.vanishes() && ob.lift_independent);
                    for k in 0..=1 {
                        let rep = annihilation_check(&step.module, ob, k, false).unwrap();
                        assert!(rep.passed, "{} k={k}", t.name);
                    }
                    assert!(tau_k(&step.module, ob, 0).unwrap().vanishes);
                }
                _ => panic!("unexpected outcome for {}", t.name),
            }
        }
    }

    #[test]
    fn exploratory_refused() {
        let mp = self_pair(catalog::abelian(2), 2);
        let mut f = Form::zero(2);
        f.add_term(0b11, &Matrix::identity(2));
        let ob = ObstructionClass::exploratory(&mp.dgla, mp.element(&f)).unwrap();
        assert_eq!(annihilation_check(&mp, &ob, 0, false).unwrap_err(), DeformError::NotGenuine);
        let rep = annihilation_check(&mp, &ob, 0, true).unwrap();
        assert!(!rep.passed);
    }
}
