//! Root systems, matrix realizations and Z-gradings by simple roots.
//!
//! Conventions:
//! - `Family::A` with rank `n` is `gl(n)` (root system `A_{n-1}`); `Family::SL`
//!   is `sl(n)`. B, C, D and G2 use the Lie rank.
//! - The grading element satisfies `(ad h) X = p X` on `g_p`. A positive root
//!   containing `α_i` with multiplicity `m` sits in degree `-m`; the dual
//!   grading flips the sign. For `gl(n)` graded by `α_1` the first row is
//!   `g_{-1}`.
//! - G2 acts on `Q^7` through a rationally rescaled form of the block
//!   realization (first row `(0, -b2ᵗ, -b1ᵗ)`, first column `(0, 2b1, 2b2)`),
//!   which is conjugate to the `√2` form by `diag(1/√2, 1, ..., 1)`.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::exact::{Coordinates, Mat, Q};
use crate::Error;

/// Lie algebra family.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    /// `gl(n)`.
    A,
    /// `sl(n)`.
    SL,
    /// `so(2n+1)`.
    B,
    /// `sp(2n)`.
    C,
    /// `so(2n)`.
    D,
    G2,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Family::A => "A",
            Family::SL => "SL",
            Family::B => "B",
            Family::C => "C",
            Family::D => "D",
            Family::G2 => "G2",
        };
        f.write_str(s)
    }
}

impl core::str::FromStr for Family {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        match s.to_ascii_uppercase().as_str() {
            "A" | "GL" => Ok(Family::A),
            "SL" => Ok(Family::SL),
            "B" => Ok(Family::B),
            "C" => Ok(Family::C),
            "D" => Ok(Family::D),
            "G2" | "G" => Ok(Family::G2),
            _ => Err(Error::Unsupported("unknown family")),
        }
    }
}

fn check_rank(family: Family, rank: usize) -> Result<(), Error> {
    let ok = match family {
        Family::A => rank >= 1,
        Family::SL => rank >= 2,
        Family::B | Family::C => rank >= 1,
        Family::D => rank >= 2,
        Family::G2 => rank == 2,
    };
    if ok {
        Ok(())
    } else {
        Err(Error::Unsupported("family/rank combination"))
    }
}

/// Element `a + b√3` of `Q(√3)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Q3 {
    pub a: Q,
    pub b: Q,
}

impl Q3 {
    pub fn rational(a: Q) -> Self {
        Q3 { a, b: Q::zero() }
    }
    pub fn zero() -> Self {
        Self::rational(Q::zero())
    }
    pub fn add(&self, o: &Q3) -> Q3 {
        Q3 { a: &self.a + &o.a, b: &self.b + &o.b }
    }
    pub fn scale(&self, s: &Q) -> Q3 {
        Q3 { a: &self.a * s, b: &self.b * s }
    }
    pub fn mul(&self, o: &Q3) -> Q3 {
        Q3 {
            a: &self.a * &o.a + Q::int(3) * &self.b * &o.b,
            b: &self.a * &o.b + &self.b * &o.a,
        }
    }
    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }
}

fn dot(u: &[Q3], v: &[Q3]) -> Q3 {
    u.iter().zip(v).fold(Q3::zero(), |acc, (x, y)| acc.add(&x.mul(y)))
}

/// Root system with roots in an ambient `Q(√3)`-space.
#[derive(Clone, Debug)]
pub struct RootSystem {
    pub family: Family,
    pub rank: usize,
    pub simple_roots: Vec<Vec<Q3>>,
    pub positive_roots: Vec<Vec<Q3>>,
    /// Coefficients of each positive root over the simple roots.
    pub expansions: Vec<Vec<i64>>,
    pub highest_root: Vec<Q3>,
    pub highest_expansion: Vec<i64>,
    /// Cartan matrix `a_ij = 2(α_i, α_j)/(α_j, α_j)`.
    pub cartan: Vec<Vec<i64>>,
}

fn e(n: usize, i: usize) -> Vec<Q3> {
    let mut v = vec![Q3::zero(); n];
    v[i] = Q3::rational(Q::one());
    v
}

fn e_comb(n: usize, terms: &[(usize, i64)]) -> Vec<Q3> {
    let mut v = vec![Q3::zero(); n];
    for &(i, c) in terms {
        v[i] = v[i].add(&Q3::rational(Q::int(c)));
    }
    v
}

fn simple_roots(family: Family, rank: usize) -> Vec<Vec<Q3>> {
    match family {
        Family::A | Family::SL => {
            (0..rank - 1).map(|i| e_comb(rank, &[(i, 1), (i + 1, -1)])).collect()
        }
        Family::B | Family::C | Family::D => {
            let n = rank;
            let mut s: Vec<Vec<Q3>> =
                (0..n - 1).map(|i| e_comb(n, &[(i, 1), (i + 1, -1)])).collect();
            s.push(match family {
                Family::B => e(n, n - 1),
                Family::C => e_comb(n, &[(n - 1, 2)]),
                _ => e_comb(n, &[(n - 2, 1), (n - 1, 1)]),
            });
            s
        }
        Family::G2 => vec![
            vec![Q3::rational(Q::one()), Q3::zero()],
            vec![Q3::rational(Q::frac(-3, 2)), Q3 { a: Q::zero(), b: Q::frac(1, 2) }],
        ],
    }
}

/// Builds the root system; positive roots are generated from the simple
/// roots by root strings.
pub fn build_root_system(family: Family, rank: usize) -> Result<RootSystem, Error> {
    check_rank(family, rank)?;
    let simple = simple_roots(family, rank);
    let r = simple.len();
    let cartan: Vec<Vec<i64>> = (0..r)
        .map(|i| {
            (0..r)
                .map(|j| {
                    let num = dot(&simple[i], &simple[j]);
                    let den = dot(&simple[j], &simple[j]);
                    debug_assert!(num.b.is_zero() && den.b.is_zero());
                    (Q::int(2) * num.a / den.a).to_i64().expect("integral Cartan entry")
                })
                .collect()
        })
        .collect();

    // Breadth-first by height.
    let mut expansions: Vec<Vec<i64>> =
        (0..r).map(|i| (0..r).map(|j| i64::from(i == j)).collect()).collect();
    let mut frontier = expansions.clone();
    while !frontier.is_empty() {
        let mut next: Vec<Vec<i64>> = Vec::new();
        for beta in &frontier {
            for i in 0..r {
                // q = largest with beta - q α_i a root.
                let mut q = 0;
                loop {
                    let mut t = beta.clone();
                    t[i] -= q + 1;
                    if expansions.contains(&t) {
                        q += 1;
                    } else {
                        break;
                    }
                }
                let pairing: i64 = (0..r).map(|j| beta[j] * cartan[j][i]).sum();
                let p = q - pairing;
                if p > 0 {
                    let mut t = beta.clone();
                    t[i] += 1;
                    if !expansions.contains(&t) && !next.contains(&t) {
                        next.push(t);
                    }
                }
            }
        }
        expansions.extend(next.iter().cloned());
        frontier = next;
    }

    let to_vec = |c: &[i64]| -> Vec<Q3> {
        let dim = simple[0].len();
        let mut v = vec![Q3::zero(); dim];
        for (ci, s) in c.iter().zip(&simple) {
            for (vk, sk) in v.iter_mut().zip(s) {
                *vk = vk.add(&sk.scale(&Q::int(*ci)));
            }
        }
        v
    };
    let positive_roots: Vec<Vec<Q3>> = expansions.iter().map(|c| to_vec(c)).collect();
    let hi = expansions
        .iter()
        .max_by_key(|c| c.iter().sum::<i64>())
        .cloned()
        .unwrap_or_default();
    Ok(RootSystem {
        family,
        rank,
        highest_root: if hi.is_empty() { Vec::new() } else { to_vec(&hi) },
        highest_expansion: hi,
        simple_roots: simple,
        positive_roots,
        expansions,
        cartan,
    })
}

/// Degrees of positive roots for the grading by simple root `i` (0-based),
/// and the depth `k`.
pub fn grading_by_simple_root(rs: &RootSystem, i: usize, dual: bool) -> Result<(Vec<i64>, usize), Error> {
    if i >= rs.simple_roots.len() {
        return Err(Error::Unsupported("simple root index out of range"));
    }
    let sign = if dual { 1 } else { -1 };
    let degrees = rs.expansions.iter().map(|c| sign * c[i]).collect();
    Ok((degrees, rs.highest_expansion[i] as usize))
}

/// A matrix Lie algebra with an exact basis.
#[derive(Clone, Debug)]
pub struct MatrixAlgebra {
    pub family: Family,
    pub rank: usize,
    pub rep_dim: usize,
    pub basis: Vec<Mat>,
    /// Invariant bilinear form (`Xᵗσ + σX = 0`); identity for A/SL.
    pub sigma: Mat,
    pub cartan_basis: Vec<Mat>,
    /// Root vector for each positive root of [`build_root_system`], same order.
    pub positive_root_vectors: Vec<Mat>,
    pub negative_root_vectors: Vec<Mat>,
    pub roots: RootSystem,
    coords: Coordinates,
}

fn flat(m: &Mat) -> Vec<Q> {
    m.data.clone()
}

impl MatrixAlgebra {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Basis coordinates of `x`, or `None` if `x` is not in the algebra.
    pub fn coords(&self, x: &Mat) -> Option<Vec<Q>> {
        self.coords.coords(&x.data)
    }

    pub fn contains(&self, x: &Mat) -> bool {
        x.rows == self.rep_dim && x.cols == self.rep_dim && self.coords(x).is_some()
    }

    pub fn combine(&self, c: &[Q]) -> Mat {
        Mat { rows: self.rep_dim, cols: self.rep_dim, data: self.coords.combine(c) }
    }

    /// Whether `x` preserves `sigma` infinitesimally (always true for A/SL,
    /// where `sigma` only records the trace form).
    pub fn preserves_form(&self, x: &Mat) -> bool {
        if matches!(self.family, Family::A | Family::SL) {
            return true;
        }
        (&(&x.transpose() * &self.sigma) + &(&self.sigma * x)).is_zero()
    }
}

fn root_vector_classical(family: Family, n: usize, v: &[Q3]) -> Mat {
    // v in e-coordinates with integer entries.
    let c: Vec<i64> = v.iter().map(|x| x.a.to_i64().expect("integral root")).collect();
    let nz: Vec<(usize, i64)> = c.iter().copied().enumerate().filter(|&(_, x)| x != 0).collect();
    let dim = match family {
        Family::A | Family::SL => n,
        Family::B => 2 * n + 1,
        _ => 2 * n,
    };
    let u = |i: usize, j: usize| Mat::unit(dim, i, j);
    let off = if family == Family::B { n + 1 } else { n };
    let plus_minus = |a: Mat, b: Mat, sign: i64| if sign > 0 { &a + &b } else { &a - &b };
    match family {
        Family::A | Family::SL => {
            let i = nz.iter().find(|x| x.1 == 1).unwrap().0;
            let j = nz.iter().find(|x| x.1 == -1).unwrap().0;
            u(i, j)
        }
        _ => {
            // sign of the second term for "e_i + e_j" type roots
            let sym = if family == Family::C { 1 } else { -1 };
            match nz.as_slice() {
                [(i, 1), (j, -1)] => &u(*i, *j) - &u(off + j, off + i),
                [(i, -1), (j, 1)] => &u(*j, *i) - &u(off + i, off + j),
                [(i, 1), (j, 1)] => plus_minus(u(*i, off + j), u(*j, off + i), sym),
                [(i, -1), (j, -1)] => plus_minus(u(off + j, *i), u(off + i, *j), sym),
                [(i, 2)] => u(*i, off + i),
                [(i, -2)] => u(off + i, *i),
                [(i, 1)] => &u(*i, n) - &u(n, off + i),
                [(i, -1)] => &u(off + i, n) - &u(n, *i),
                _ => unreachable!("unexpected root shape"),
            }
        }
    }
}

/// G2 element in the rescaled 7-dimensional realization.
pub fn g2_element(a: &Mat, b1: &[Q], b2: &[Q]) -> Mat {
    let mut x = Mat::zeros(7, 7);
    let cross = |v: &[Q]| -> Mat {
        Mat::from_fn(3, 3, |r, c| match (r, c) {
            (0, 1) => v[2].clone(),
            (0, 2) => -&v[1],
            (1, 0) => -&v[2],
            (1, 2) => v[0].clone(),
            (2, 0) => v[1].clone(),
            (2, 1) => -&v[0],
            _ => Q::zero(),
        })
    };
    let cb1 = cross(b1);
    let cb2 = cross(b2);
    for i in 0..3 {
        x[(0, 1 + i)] = -&b2[i];
        x[(0, 4 + i)] = -&b1[i];
        x[(1 + i, 0)] = Q::int(2) * &b1[i];
        x[(4 + i, 0)] = Q::int(2) * &b2[i];
        for j in 0..3 {
            x[(1 + i, 1 + j)] = a[(i, j)].clone();
            x[(4 + i, 4 + j)] = -&a[(j, i)];
            x[(1 + i, 4 + j)] = cb2[(i, j)].clone();
            x[(4 + i, 1 + j)] = cb1[(i, j)].clone();
        }
    }
    x
}

fn g2_root_vector(expansion: &[i64], positive: bool) -> Mat {
    let z = [Q::zero(), Q::zero(), Q::zero()];
    let ev = |i: usize| {
        let mut v = z.clone();
        v[i] = Q::one();
        v
    };
    let a0 = Mat::zeros(3, 3);
    let au = |i, j| Mat::unit(3, i, j);
    match (expansion, positive) {
        ([1, 0], true) => g2_element(&a0, &ev(0), &z),
        ([0, 1], true) => g2_element(&au(1, 0), &z, &z),
        ([1, 1], true) => g2_element(&a0, &ev(1), &z),
        ([2, 1], true) => g2_element(&a0, &z, &ev(2)),
        ([3, 1], true) => g2_element(&au(0, 2), &z, &z),
        ([3, 2], true) => g2_element(&au(1, 2), &z, &z),
        ([1, 0], false) => g2_element(&a0, &z, &ev(0)),
        ([0, 1], false) => g2_element(&au(0, 1), &z, &z),
        ([1, 1], false) => g2_element(&a0, &z, &ev(1)),
        ([2, 1], false) => g2_element(&a0, &ev(2), &z),
        ([3, 1], false) => g2_element(&au(2, 0), &z, &z),
        ([3, 2], false) => g2_element(&au(2, 1), &z, &z),
        _ => unreachable!("not a G2 root"),
    }
}

/// Invariant form of a family's realization.
pub fn invariant_form(family: Family, rank: usize) -> Mat {
    let n = rank;
    match family {
        Family::A | Family::SL => Mat::identity(n),
        Family::D => Mat::from_fn(2 * n, 2 * n, |r, c| {
            if (r + n == c) || (c + n == r) { Q::one() } else { Q::zero() }
        }),
        Family::C => Mat::from_fn(2 * n, 2 * n, |r, c| {
            if r + n == c {
                Q::one()
            } else if c + n == r {
                -Q::one()
            } else {
                Q::zero()
            }
        }),
        Family::B => Mat::from_fn(2 * n + 1, 2 * n + 1, |r, c| {
            if (r == n && c == n) || r + n + 1 == c || c + n + 1 == r {
                Q::one()
            } else {
                Q::zero()
            }
        }),
        Family::G2 => Mat::from_fn(7, 7, |r, c| {
            if r == 0 && c == 0 {
                Q::int(2)
            } else if r > 0 && c > 0 && (r + 3 == c || c + 3 == r) {
                Q::one()
            } else {
                Q::zero()
            }
        }),
    }
}

/// Builds the matrix realization and verifies commutator closure exactly.
pub fn matrix_realization(family: Family, rank: usize) -> Result<MatrixAlgebra, Error> {
    let roots = build_root_system(family, rank)?;
    let n = rank;
    let rep_dim = match family {
        Family::A | Family::SL => n,
        Family::B => 2 * n + 1,
        Family::C | Family::D => 2 * n,
        Family::G2 => 7,
    };
    let cartan_basis: Vec<Mat> = match family {
        Family::A => (0..n).map(|i| Mat::unit(n, i, i)).collect(),
        Family::SL => {
            (0..n - 1).map(|i| &Mat::unit(n, i, i) - &Mat::unit(n, i + 1, i + 1)).collect()
        }
        Family::B | Family::C | Family::D => {
            let off = if family == Family::B { n + 1 } else { n };
            (0..n).map(|i| &Mat::unit(rep_dim, i, i) - &Mat::unit(rep_dim, off + i, off + i)).collect()
        }
        Family::G2 => {
            let h1 = Mat::diag(&[Q::int(1), Q::int(-1), Q::zero()]);
            let h2 = Mat::diag(&[Q::zero(), Q::int(1), Q::int(-1)]);
            let z = [Q::zero(), Q::zero(), Q::zero()];
            vec![g2_element(&h1, &z, &z), g2_element(&h2, &z, &z)]
        }
    };
    let (pos, neg): (Vec<Mat>, Vec<Mat>) = if family == Family::G2 {
        roots
            .expansions
            .iter()
            .map(|c| (g2_root_vector(c, true), g2_root_vector(c, false)))
            .unzip()
    } else {
        roots
            .positive_roots
            .iter()
            .map(|v| {
                let negv: Vec<Q3> = v.iter().map(|x| x.scale(&Q::int(-1))).collect();
                (root_vector_classical(family, n, v), root_vector_classical(family, n, &negv))
            })
            .unzip()
    };
    let mut basis = cartan_basis.clone();
    basis.extend(pos.iter().cloned());
    basis.extend(neg.iter().cloned());
    let coords = Coordinates::new(&basis.iter().map(flat).collect::<Vec<_>>())
        .ok_or(Error::Internal("realization basis is linearly dependent"))?;
    let alg = MatrixAlgebra {
        family,
        rank,
        rep_dim,
        sigma: invariant_form(family, rank),
        basis,
        cartan_basis,
        positive_root_vectors: pos,
        negative_root_vectors: neg,
        roots,
        coords,
    };
    for (i, x) in alg.basis.iter().enumerate() {
        if !alg.preserves_form(x) {
            return Err(Error::Internal("basis element does not preserve the invariant form"));
        }
        for y in &alg.basis[i + 1..] {
            if alg.coords(&x.commutator(y)).is_none() {
                return Err(Error::Internal("realization is not closed under commutator"));
            }
        }
    }
    Ok(alg)
}

/// Exact structure constants `[b_i, b_j] = Σ c_ijk b_k`.
pub fn structure_constants(alg: &MatrixAlgebra) -> Vec<Vec<Vec<Q>>> {
    alg.basis
        .iter()
        .map(|x| alg.basis.iter().map(|y| alg.coords(&x.commutator(y)).expect("closed")).collect())
        .collect()
}

/// Eigenspace decomposition of `g` under `ad h`.
#[derive(Clone, Debug)]
pub struct GradedDecomposition {
    pub algebra: Arc<MatrixAlgebra>,
    pub h: Mat,
    pub depth: usize,
    /// Graded basis, ordered by degree.
    pub basis: Vec<Mat>,
    pub degrees: Vec<i64>,
    coords: Coordinates,
    diag: Option<Vec<Q>>,
}

impl GradedDecomposition {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn n(&self) -> usize {
        self.algebra.rep_dim
    }

    pub fn k(&self) -> i64 {
        self.depth as i64
    }

    pub fn dim_g(&self, p: i64) -> usize {
        self.degrees.iter().filter(|&&d| d == p).count()
    }

    /// `dim g̃_p = Σ_{q ≤ p} dim g_q`.
    pub fn dim_filtration(&self, p: i64) -> usize {
        self.degrees.iter().filter(|&&d| d <= p).count()
    }

    pub fn subspace(&self, p: i64) -> Vec<&Mat> {
        self.basis.iter().zip(&self.degrees).filter(|(_, &d)| d == p).map(|(b, _)| b).collect()
    }

    pub fn filtration(&self, p: i64) -> Vec<&Mat> {
        self.basis.iter().zip(&self.degrees).filter(|(_, &d)| d <= p).map(|(b, _)| b).collect()
    }

    /// Coordinates in the graded basis, `None` when outside `g`.
    pub fn coords(&self, x: &Mat) -> Option<Vec<Q>> {
        self.coords.coords(&x.data)
    }

    pub fn combine(&self, c: &[Q]) -> Mat {
        let n = self.n();
        Mat { rows: n, cols: n, data: self.coords.combine(c) }
    }

    /// `g_s`-component of `x ∈ g`.
    pub fn project(&self, x: &Mat, s: i64) -> Mat {
        if let Some(d) = &self.diag {
            let n = self.n();
            let s = Q::int(s);
            return Mat::from_fn(n, n, |r, c| {
                if &d[r] - &d[c] == s { x[(r, c)].clone() } else { Q::zero() }
            });
        }
        let c = self.coords.coords_unchecked(&x.data);
        let c: Vec<Q> = c
            .into_iter()
            .zip(&self.degrees)
            .map(|(v, &dg)| if dg == s { v } else { Q::zero() })
            .collect();
        self.combine(&c)
    }

    /// Projection onto `⊕_{q > p} g_q`.
    pub fn project_above(&self, x: &Mat, p: i64) -> Mat {
        let mut acc = Mat::zeros(self.n(), self.n());
        for s in (p + 1)..=self.k() {
            let c = self.project(x, s);
            acc = &acc + &c;
        }
        acc
    }

    pub fn in_filtration(&self, x: &Mat, p: i64) -> bool {
        self.project_above(x, p).is_zero()
    }

    /// Nonzero graded components of `x` as `(degree, component)`.
    pub fn components(&self, x: &Mat) -> Vec<(i64, Mat)> {
        (-self.k()..=self.k())
            .map(|s| (s, self.project(x, s)))
            .filter(|(_, c)| !c.is_zero())
            .collect()
    }

    /// Basis elements of `g_p`, with their index in `basis`.
    pub fn indexed(&self, p: i64) -> Vec<usize> {
        (0..self.dim()).filter(|&i| self.degrees[i] == p).collect()
    }

    /// `Σ_{i=-k}^{-1} dim g̃_i`.
    pub fn sum_negative_filtration(&self) -> usize {
        (-self.k()..=-1).map(|i| self.dim_filtration(i)).sum()
    }
}

/// Eigenspaces of `ad h`; fails if `h` is outside the Cartan subalgebra or
/// has a non-integer eigenvalue.
pub fn graded_subspaces(alg: Arc<MatrixAlgebra>, h: &Mat) -> Result<GradedDecomposition, Error> {
    let in_cartan = alg.contains(h) && alg.cartan_basis.iter().all(|c| c.commutator(h).is_zero());
    if !in_cartan {
        return Err(Error::InvalidGrading("grading element is not in the Cartan subalgebra"));
    }
    let dim = alg.dim();
    let ad: Vec<Vec<Q>> = alg.basis.iter().map(|b| alg.coords(&h.commutator(b)).expect("closed")).collect();
    // ad[j] are coordinates of [h, b_j]: column j of the ad-matrix.
    let bound = (0..dim)
        .map(|i| ad.iter().map(|col| col[i].abs()).fold(Q::zero(), |a, b| a + b))
        .max()
        .unwrap_or_else(Q::zero)
        .floor_i64()
        + 1;
    let mut basis = Vec::new();
    let mut degrees = Vec::new();
    for p in -bound..=bound {
        let rows: Vec<Vec<Q>> = (0..dim)
            .map(|i| {
                (0..dim)
                    .map(|j| if i == j { &ad[j][i] - &Q::int(p) } else { ad[j][i].clone() })
                    .collect()
            })
            .collect();
        for v in crate::exact::nullspace(rows, dim) {
            basis.push(alg.combine(&v));
            degrees.push(p);
        }
    }
    if basis.len() != dim {
        return Err(Error::InvalidGrading("ad h has a non-integer eigenvalue"));
    }
    let depth = degrees.iter().map(|d| d.unsigned_abs() as usize).max().unwrap_or(0);
    let coords = Coordinates::new(&basis.iter().map(flat).collect::<Vec<_>>())
        .ok_or(Error::Internal("graded basis is dependent"))?;
    let diag = h.is_diagonal().then(|| h.diagonal());
    Ok(GradedDecomposition { algebra: alg, h: h.clone(), depth, basis, degrees, coords, diag })
}

/// Grading element for simple root `i` (0-based): `[h, E_{α_j}] = ∓δ_ij E_{α_j}`.
pub fn grading_element(alg: &MatrixAlgebra, i: usize, dual: bool) -> Result<Mat, Error> {
    let r = alg.roots.simple_roots.len();
    if i >= r {
        return Err(Error::Unsupported("simple root index out of range"));
    }
    let target = if dual { Q::one() } else { -Q::one() };
    let nc = alg.cartan_basis.len();
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for j in 0..r {
        let ej = &alg.positive_root_vectors[j];
        let cols: Vec<Mat> = alg.cartan_basis.iter().map(|hc| hc.commutator(ej)).collect();
        let want = if i == j { ej.scale(&target) } else { Mat::zeros(alg.rep_dim, alg.rep_dim) };
        for idx in 0..ej.data.len() {
            rows.push(cols.iter().map(|c| c.data[idx].clone()).collect());
            rhs.push(want.data[idx].clone());
        }
    }
    let c = crate::exact::solve(&rows, &rhs, nc).ok_or(Error::Internal("no grading element"))?;
    let mut h = Mat::zeros(alg.rep_dim, alg.rep_dim);
    for (ci, hc) in c.iter().zip(&alg.cartan_basis) {
        h.axpy(ci, hc);
    }
    Ok(h)
}

/// Decomposition for the grading by simple root `root` (1-based, as in the CLI).
pub fn grading(family: Family, rank: usize, root: usize, dual: bool) -> Result<GradedDecomposition, Error> {
    let alg = Arc::new(matrix_realization(family, rank)?);
    if root == 0 {
        return Err(Error::Unsupported("simple root index out of range"));
    }
    let h = grading_element(&alg, root - 1, dual)?;
    graded_subspaces(alg, &h)
}

/// Gradings used by the closure suite: `(family, rank, root)`.
pub fn catalog() -> Vec<(Family, usize, usize)> {
    let mut v = Vec::new();
    for n in 2..=4 {
        v.push((Family::A, n, 1));
    }
    for n in 2..=4 {
        v.push((Family::D, n, 1));
    }
    for n in 2..=3 {
        v.push((Family::C, n, 1));
        v.push((Family::C, n, n));
    }
    for n in 2..=3 {
        v.push((Family::B, n, 1));
        v.push((Family::B, n, n));
    }
    v.push((Family::G2, 2, 2));
    v
}

/// `times_dim · dim g − (Σ_{i=-k}^{-1} dim g̃_i + 1) · gamma_count`.
pub fn mist_residual_with(dec: &GradedDecomposition, times_dim: i64, gamma_count: i64) -> i64 {
    times_dim * dec.dim() as i64 - (dec.sum_negative_filtration() as i64 + 1) * gamma_count
}

/// `dim g − (Σ_{i=-k}^{-1} dim g̃_i + 1) · rank`.
pub fn check_mist_identity(dec: &GradedDecomposition) -> i64 {
    mist_residual_with(dec, 1, dec.algebra.rank as i64)
}

/// `Σ_{p=-k}^{k-1} codim g̃_p`.
pub fn c_gamma(dec: &GradedDecomposition) -> usize {
    (-dec.k()..dec.k()).map(|p| dec.dim() - dec.dim_filtration(p)).sum()
}

/// Dimension of the algebra from family data alone.
pub fn algebra_dim(family: Family, rank: usize) -> usize {
    let n = rank;
    match family {
        Family::A => n * n,
        Family::SL => n * n - 1,
        Family::B | Family::C => n * (2 * n + 1),
        Family::D => n * (2 * n - 1),
        Family::G2 => 14,
    }
}

/// Lie rank (reductive rank for `gl(n)`).
pub fn lie_rank(family: Family, rank: usize) -> usize {
    match family {
        Family::SL => rank - 1,
        _ => rank,
    }
}

/// Degrees of the basic invariant polynomials.
pub fn invariant_degrees(family: Family, rank: usize) -> Result<Vec<i64>, Error> {
    check_rank(family, rank)?;
    let n = rank as i64;
    Ok(match family {
        Family::A => (1..=n).collect(),
        Family::SL => (2..=n).collect(),
        Family::B | Family::C => (1..=n).map(|i| 2 * i).collect(),
        Family::D => {
            let mut d: Vec<i64> = (1..n).map(|i| 2 * i).collect();
            d.push(n);
            d.sort_unstable();
            d
        }
        Family::G2 => vec![2, 6],
    })
}

/// `Σ(2d_i − 1) − dim g`; for `gl(n)` evaluated on the `sl(n)` part.
pub fn check_tozh(family: Family, rank: usize) -> Result<i64, Error> {
    let (fam, degs) = if family == Family::A {
        (Family::SL, invariant_degrees(Family::A, rank)?.into_iter().filter(|&d| d != 1).collect())
    } else {
        (family, invariant_degrees(family, rank)?)
    };
    let dim = if family == Family::A { rank * rank - 1 } else { algebra_dim(fam, rank) };
    Ok(degs.iter().map(|d| 2 * d - 1).sum::<i64>() - dim as i64)
}

/// Number of independent Hamiltonians `N = degD (dim g + r)/2 − r(genus − 1)`,
/// together with the parity check `2N = dim g·degD + r(degD − 2(genus − 1))`.
pub fn hamiltonian_count(family: Family, rank: usize, deg_d: i64, genus: i64) -> Result<(i64, bool), Error> {
    check_rank(family, rank)?;
    let dim = algebra_dim(family, rank) as i64;
    let r = lie_rank(family, rank) as i64;
    let twice = deg_d * (dim + r) - 2 * r * (genus - 1);
    let check = twice == dim * deg_d + r * (deg_d - 2 * (genus - 1));
    Ok((twice / 2, check && twice % 2 == 0))
}

/// `Σ_i h^0(d_i D)` at genus `g` for `deg D > 2g − 2`, from the degree table.
pub fn hamiltonian_count_from_degrees(family: Family, rank: usize, deg_d: i64, genus: i64) -> Result<i64, Error> {
    Ok(invariant_degrees(family, rank)?.iter().map(|d| d * deg_d - genus + 1).sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn d4_roots() {
        let rs = build_root_system(Family::D, 4).unwrap();
        assert_eq!(rs.positive_roots.len(), 12);
        assert_eq!(rs.highest_expansion, vec![1, 2, 1, 1]);
    }

    #[test]
    fn g2_highest_root() {
        let rs = build_root_system(Family::G2, 2).unwrap();
        assert_eq!(rs.positive_roots.len(), 6);
        assert_eq!(rs.highest_expansion, vec![3, 2]);
        assert_eq!(rs.cartan, vec![vec![2, -1], vec![-3, 2]]);
    }

    #[test]
    fn gl3_grading_dims() {
        let dec = grading(Family::A, 3, 1, false).unwrap();
        assert_eq!(dec.h, Mat::diag(&[Q::int(-1), Q::zero(), Q::zero()]));
        assert_eq!((dec.dim_g(-1), dec.dim_g(0), dec.dim_g(1)), (2, 5, 2));
    }

    #[test]
    fn zero_grading_element() {
        let alg = Arc::new(matrix_realization(Family::C, 2).unwrap());
        let dec = graded_subspaces(alg, &Mat::zeros(4, 4)).unwrap();
        assert_eq!(dec.depth, 0);
        assert_eq!(dec.dim_g(0), 10);
    }

    #[test]
    fn rejects_non_cartan_element() {
        let alg = Arc::new(matrix_realization(Family::A, 2).unwrap());
        assert!(graded_subspaces(alg, &Mat::unit(2, 0, 1)).is_err());
    }

    #[test]
    fn rejects_half_integer_eigenvalues() {
        let alg = Arc::new(matrix_realization(Family::A, 2).unwrap());
        let h = Mat::diag(&[Q::frac(1, 2), Q::zero()]);
        assert!(matches!(graded_subspaces(alg, &h), Err(Error::InvalidGrading(_))));
    }
}
