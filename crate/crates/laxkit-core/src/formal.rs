//! Truncated matrix Laurent series at a point of Γ.
//!
//! A series stores coefficients for degrees `pmin..=trunc`; `trunc` is the
//! highest degree known exactly. Arithmetic lowers `trunc` to what the inputs
//! determine, and comparisons never look past it.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::exact::{Mat, Q};
use crate::liealg::{grading_element, Family, GradedDecomposition};
use crate::Error;

/// Matrix-valued Laurent series `Σ_{p=pmin}^{trunc} c_p z^p`.
#[derive(Clone, Debug)]
pub struct MatrixLaurent {
    pub dec: Arc<GradedDecomposition>,
    pub pmin: i64,
    pub coeffs: Vec<Mat>,
}

/// A coefficient `p` whose graded component `s > p` is nonzero.
#[derive(Clone, Debug, PartialEq)]
pub struct Violation {
    pub degree: i64,
    pub component: i64,
    pub value: Mat,
}

fn same_dec(a: &GradedDecomposition, b: &GradedDecomposition) -> bool {
    core::ptr::eq(a, b)
        || (a.algebra.family == b.algebra.family && a.algebra.rank == b.algebra.rank && a.h == b.h)
}

impl MatrixLaurent {
    pub fn new(dec: Arc<GradedDecomposition>, pmin: i64, coeffs: Vec<Mat>) -> Self {
        MatrixLaurent { dec, pmin, coeffs }
    }

    pub fn zero(dec: Arc<GradedDecomposition>, pmin: i64, trunc: i64) -> Self {
        let n = dec.n();
        let len = (trunc - pmin + 1).max(0) as usize;
        MatrixLaurent { dec, pmin, coeffs: vec![Mat::zeros(n, n); len] }
    }

    /// Highest reliable degree.
    pub fn trunc(&self) -> i64 {
        self.pmin + self.coeffs.len() as i64 - 1
    }

    /// Coefficient at `z^p`; zero below `pmin`. Panics above `trunc`.
    pub fn coeff(&self, p: i64) -> Mat {
        assert!(p <= self.trunc(), "degree {p} beyond truncation");
        if p < self.pmin {
            Mat::zeros(self.dec.n(), self.dec.n())
        } else {
            self.coeffs[(p - self.pmin) as usize].clone()
        }
    }

    fn coeff_ref(&self, p: i64) -> Option<&Mat> {
        if p < self.pmin || p > self.trunc() {
            None
        } else {
            Some(&self.coeffs[(p - self.pmin) as usize])
        }
    }

    pub fn set(&mut self, p: i64, m: Mat) {
        let i = (p - self.pmin) as usize;
        self.coeffs[i] = m;
    }

    /// Lowest degree with a nonzero coefficient.
    pub fn order(&self) -> Option<i64> {
        self.coeffs.iter().position(|c| !c.is_zero()).map(|i| self.pmin + i as i64)
    }

    pub fn truncate(&self, trunc: i64) -> MatrixLaurent {
        let mut out = self.clone();
        let len = (trunc - self.pmin + 1).max(0) as usize;
        out.coeffs.truncate(len);
        out
    }

    /// Every coefficient lies in `g`.
    pub fn in_algebra(&self) -> bool {
        self.coeffs.iter().all(|c| self.dec.coords(c).is_some())
    }

    pub fn map(&self, f: impl Fn(&Mat) -> Mat) -> MatrixLaurent {
        MatrixLaurent { dec: self.dec.clone(), pmin: self.pmin, coeffs: self.coeffs.iter().map(f).collect() }
    }

    /// Coefficient-wise difference up to the common truncation.
    pub fn sub(&self, other: &MatrixLaurent) -> MatrixLaurent {
        let pmin = self.pmin.min(other.pmin);
        let trunc = self.trunc().min(other.trunc());
        let coeffs = (pmin..=trunc).map(|p| &self.coeff(p) - &other.coeff(p)).collect();
        MatrixLaurent { dec: self.dec.clone(), pmin, coeffs }
    }

    /// Equality of all coefficients up to the common truncation.
    pub fn agrees_with(&self, other: &MatrixLaurent) -> bool {
        self.sub(other).coeffs.iter().all(Mat::is_zero)
    }

    /// Degrees `< bound` carrying a nonzero coefficient.
    pub fn degrees_below(&self, bound: i64) -> Vec<i64> {
        (self.pmin..bound.min(self.trunc() + 1)).filter(|&p| !self.coeff(p).is_zero()).collect()
    }
}

/// Pointwise commutator, reliable up to `min(T_a + pmin_b, T_b + pmin_a)`.
pub fn commutator(a: &MatrixLaurent, b: &MatrixLaurent) -> Result<MatrixLaurent, Error> {
    if !same_dec(&a.dec, &b.dec) {
        return Err(Error::DecompositionMismatch);
    }
    let pmin = a.pmin + b.pmin;
    let trunc = (a.trunc() + b.pmin).min(b.trunc() + a.pmin);
    let n = a.dec.n();
    let mut coeffs = Vec::new();
    for p in pmin..=trunc {
        let mut acc = Mat::zeros(n, n);
        for i in a.pmin..=a.trunc() {
            let j = p - i;
            let (Some(x), Some(y)) = (a.coeff_ref(i), b.coeff_ref(j)) else { continue };
            if x.is_zero() || y.is_zero() {
                continue;
            }
            acc = &acc + &x.commutator(y);
        }
        coeffs.push(acc);
    }
    Ok(MatrixLaurent { dec: a.dec.clone(), pmin, coeffs })
}

/// Checks `L_p ∈ g̃_p` for every reliable degree `p < k`.
pub fn validate_lax(e: &MatrixLaurent) -> Result<(), Vec<Violation>> {
    let dec = &e.dec;
    let k = dec.k();
    let mut out = Vec::new();
    for p in e.pmin..=e.trunc().min(k - 1) {
        let c = e.coeff(p);
        if c.is_zero() {
            continue;
        }
        for s in (p + 1).max(-k)..=k {
            let comp = dec.project(&c, s);
            if !comp.is_zero() {
                out.push(Violation { degree: p, component: s, value: comp });
            }
        }
    }
    if out.is_empty() {
        Ok(())
    } else {
        Err(out)
    }
}

/// A series certified to satisfy `L_p ∈ g̃_p`.
#[derive(Clone, Debug)]
pub struct LaxExpansion(MatrixLaurent);

impl LaxExpansion {
    pub fn new(series: MatrixLaurent) -> Result<Self, Vec<Violation>> {
        validate_lax(&series)?;
        Ok(LaxExpansion(series))
    }

    pub fn series(&self) -> &MatrixLaurent {
        &self.0
    }

    pub fn into_series(self) -> MatrixLaurent {
        self.0
    }
}

/// M-operator expansion: `ν h/z + Σ_{i ≥ -k} M_i z^i`, `M_i ∈ g̃_i` for `i < 0`.
#[derive(Clone, Debug)]
pub struct MOpExpansion {
    pub nu: Q,
    pub series: MatrixLaurent,
}

impl MOpExpansion {
    pub fn new(nu: Q, series: MatrixLaurent) -> Result<Self, Vec<Violation>> {
        let neg = series.truncate(series.trunc().min(-1));
        if neg.coeffs.is_empty() {
            return Ok(MOpExpansion { nu, series });
        }
        validate_lax(&neg)?;
        Ok(MOpExpansion { nu, series })
    }

    /// The series with `ν h` added at `z^{-1}`.
    pub fn full_series(&self) -> MatrixLaurent {
        let pmin = self.series.pmin.min(-1);
        let trunc = self.series.trunc();
        let coeffs = (pmin..=trunc)
            .map(|p| {
                let c = self.series.coeff(p);
                if p == -1 {
                    &c + &self.series.dec.h.scale(&self.nu)
                } else {
                    c
                }
            })
            .collect();
        MatrixLaurent { dec: self.series.dec.clone(), pmin, coeffs }
    }
}

/// The commutator `[L, M]` assembled term by term: `Σ_{i+j=p}[L_i, M_j] +
/// ν Σ_s (p+1−s) L^s_{p+1} − (p+1) ν L_{p+1}` at `z^p`, from `p = −k−1`.
pub fn expansion_of_commutator(l: &LaxExpansion, m: &MOpExpansion) -> Result<MatrixLaurent, Error> {
    let (l, ms) = (l.series(), &m.series);
    if !same_dec(&l.dec, &ms.dec) {
        return Err(Error::DecompositionMismatch);
    }
    let dec = &l.dec;
    let k = dec.k();
    let n = dec.n();
    let pmin = l.pmin + ms.pmin.min(-1);
    let trunc = (l.trunc() + ms.pmin).min(ms.trunc() + l.pmin).min(l.trunc() - 1);
    let mut coeffs = Vec::new();
    for p in pmin..=trunc {
        let mut acc = Mat::zeros(n, n);
        for i in l.pmin..=l.trunc() {
            let j = p - i;
            if j < ms.pmin || j > ms.trunc() {
                continue;
            }
            acc = &acc + &l.coeff(i).commutator(&ms.coeff(j));
        }
        let next = l.coeff(p + 1);
        for s in -k..=k {
            let w = Q::int(p + 1 - s);
            acc.axpy(&(&m.nu * &w), &dec.project(&next, s));
        }
        acc.axpy(&(-(&m.nu * &Q::int(p + 1))), &next);
        coeffs.push(acc);
    }
    Ok(MatrixLaurent { dec: l.dec.clone(), pmin, coeffs })
}

/// `Ad e^{∓h ln z}` as a grade-wise degree shift: the `g_s` part of the
/// coefficient at `z^i` moves to `z^{i − sign·s}`. Reliable up to `trunc − k`.
pub fn conjugate_pole_elimination_signed(e: &MatrixLaurent, sign: i64) -> MatrixLaurent {
    let dec = &e.dec;
    let k = dec.k();
    let pmin = e.pmin - k;
    let trunc = e.trunc() - k;
    let mut out = MatrixLaurent::zero(dec.clone(), pmin, trunc);
    for i in e.pmin..=e.trunc() {
        let c = e.coeff(i);
        if c.is_zero() {
            continue;
        }
        for s in -k..=k {
            let d = i - sign * s;
            if d > trunc {
                continue;
            }
            let comp = dec.project(&c, s);
            if !comp.is_zero() {
                let idx = (d - pmin) as usize;
                out.coeffs[idx] = &out.coeffs[idx] + &comp;
            }
        }
    }
    out
}

/// `Ad e^{−h ln z}` applied to a Lax expansion; the result has no negative degrees.
pub fn conjugate_pole_elimination(e: &LaxExpansion) -> MatrixLaurent {
    conjugate_pole_elimination_signed(e.series(), 1)
}

/// Residuals of the tangency relations at one point of Γ.
#[derive(Clone, Debug)]
pub struct TangencyResidual {
    /// `ż + ν`.
    pub zdot_plus_nu: Q,
    /// `(p, L̇_p − Σ[L_i, M_j] − ν Σ_s (p+1−s) L^s_{p+1})` for `p = −k..0`.
    pub residuals: Vec<(i64, Mat)>,
}

impl TangencyResidual {
    pub fn is_zero(&self) -> bool {
        self.zdot_plus_nu.is_zero() && self.residuals.iter().all(|(_, m)| m.is_zero())
    }
}

fn tangency_rhs(l: &MatrixLaurent, m: &MOpExpansion, p: i64) -> Mat {
    let dec = &l.dec;
    let k = dec.k();
    let n = dec.n();
    let mut acc = Mat::zeros(n, n);
    for i in l.pmin..=l.trunc() {
        let j = p - i;
        if j < m.series.pmin || j > m.series.trunc() {
            continue;
        }
        acc = &acc + &l.coeff(i).commutator(&m.series.coeff(j));
    }
    let next = l.coeff(p + 1);
    for s in -k..=p {
        acc.axpy(&(&m.nu * &Q::int(p + 1 - s)), &dec.project(&next, s));
    }
    acc
}

pub fn tangency_relations_residual(
    l: &LaxExpansion,
    ldot: &MatrixLaurent,
    m: &MOpExpansion,
    zdot: &Q,
) -> Result<TangencyResidual, Error> {
    let ls = l.series();
    if !same_dec(&ls.dec, &ldot.dec) || !same_dec(&ls.dec, &m.series.dec) {
        return Err(Error::DecompositionMismatch);
    }
    let k = ls.dec.k();
    let residuals = (-k..=0).map(|p| (p, &ldot.coeff(p) - &tangency_rhs(ls, m, p))).collect();
    Ok(TangencyResidual { zdot_plus_nu: zdot + &m.nu, residuals })
}

/// `L̇` and `ż` defined by the tangency relations.
pub fn tangency_solution(l: &LaxExpansion, m: &MOpExpansion) -> (MatrixLaurent, Q) {
    let ls = l.series();
    let k = ls.dec.k();
    let coeffs = (-k..=0).map(|p| tangency_rhs(ls, m, p)).collect();
    (MatrixLaurent::new(ls.dec.clone(), -k, coeffs), -m.nu.clone())
}

/// Degree-wise `L̇ = −k L_{−k} ż z^{−k−1} + Σ (L̇_p + (p+1) L_{p+1} ż) z^p` for `p` up to 0.
pub fn expansion_of_time_derivative(l: &LaxExpansion, ldot: &MatrixLaurent, zdot: &Q) -> MatrixLaurent {
    let ls = l.series();
    let k = ls.dec.k();
    let mut coeffs = vec![ls.coeff(-k).scale(&(-(Q::int(k) * zdot)))];
    for p in -k..=0 {
        let mut c = ldot.coeff(p);
        c.axpy(&(Q::int(p + 1) * zdot), &ls.coeff(p + 1));
        coeffs.push(c);
    }
    MatrixLaurent::new(ls.dec.clone(), -k - 1, coeffs)
}

fn random_in(dec: &GradedDecomposition, p: i64, rng: &mut impl Rng, amp: i64) -> Mat {
    let c: Vec<Q> = dec
        .degrees
        .iter()
        .map(|&d| if d <= p && rng.gen_bool(0.7) { Q::random(rng, amp, 3) } else { Q::zero() })
        .collect();
    dec.combine(&c)
}

/// Random Lax expansion with degrees `−k..=trunc`.
pub fn random_lax(dec: &Arc<GradedDecomposition>, trunc: i64, rng: &mut impl Rng) -> LaxExpansion {
    let k = dec.k();
    let coeffs = (-k..=trunc).map(|p| random_in(dec, p, rng, 4)).collect();
    LaxExpansion(MatrixLaurent::new(dec.clone(), -k, coeffs))
}

/// Random M-operator expansion with degrees `−k..=trunc` and random `ν`.
pub fn random_mop(dec: &Arc<GradedDecomposition>, trunc: i64, rng: &mut impl Rng) -> MOpExpansion {
    let k = dec.k();
    let coeffs = (-k..=trunc).map(|p| random_in(dec, if p < 0 { p } else { k }, rng, 4)).collect();
    MOpExpansion { nu: Q::random(rng, 4, 3), series: MatrixLaurent::new(dec.clone(), -k, coeffs) }
}

/// Outcome of one Tyurin-form check.
#[derive(Clone, Debug, PartialEq)]
pub struct TyurinCheck {
    pub name: &'static str,
    pub passed: bool,
}

/// Result of [`validate_tyurin_form`].
#[derive(Clone, Debug)]
pub struct TyurinReport {
    pub family: Family,
    pub checks: Vec<TyurinCheck>,
    pub alpha: Vec<Q>,
    pub beta: Option<Vec<Q>>,
    pub kappa: Option<Q>,
}

impl TyurinReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

fn col(m: &Mat, j: usize) -> Vec<Q> {
    (0..m.rows).map(|i| m[(i, j)].clone()).collect()
}

fn matvec(m: &Mat, v: &[Q]) -> Vec<Q> {
    (0..m.rows)
        .map(|i| (0..m.cols).fold(Q::zero(), |acc, j| acc + &m[(i, j)] * &v[j]))
        .collect()
}

fn vdot(u: &[Q], v: &[Q]) -> Q {
    u.iter().zip(v).fold(Q::zero(), |acc, (a, b)| acc + a * b)
}

fn outer(u: &[Q], v: &[Q]) -> Mat {
    Mat::from_fn(u.len(), v.len(), |i, j| &u[i] * &v[j])
}

/// `κ` with `m α = κ α`, if `α` is an eigenvector.
fn eigen_scalar(m: &Mat, alpha: &[Q]) -> Option<Q> {
    let r = alpha.iter().position(|x| !x.is_zero())?;
    let ma = matvec(m, alpha);
    let kappa = &ma[r] / &alpha[r];
    ma.iter().zip(alpha).all(|(x, a)| *x == &kappa * a).then_some(kappa)
}

fn check(name: &'static str, passed: bool) -> TyurinCheck {
    TyurinCheck { name, passed }
}

/// Validates the residue form of a Lax expansion conjugated from the catalog
/// grading by `g`. Supported: gl/sl, so(2n), so(2n+1) and sp(2n) graded by
/// `α_1`, and G2 graded by `α_2`.
pub fn validate_tyurin_form(e: &MatrixLaurent, g: &Mat) -> Result<TyurinReport, Error> {
    let dec = &e.dec;
    let alg = &dec.algebra;
    let family = alg.family;
    let k = dec.k();
    if family == Family::G2 {
        if k != 2 {
            return Err(Error::Unsupported("no catalogued residue form for this G2 grading"));
        }
        return Ok(tyurin_g2(e, g));
    }
    if dec.h != grading_element(alg, 0, false)? {
        return Err(Error::Unsupported("residue forms are catalogued for the α_1 grading only"));
    }
    let n = alg.rep_dim;
    let alpha = col(g, 0);
    let r = alpha.iter().position(|x| !x.is_zero()).ok_or(Error::InvalidArgument("singular conjugator"))?;
    let mut u = vec![Q::zero(); n];
    u[r] = alpha[r].recip();
    let sigma = &alg.sigma;
    let sigma_inv = sigma.inverse().expect("invertible form");
    let mut checks = Vec::new();
    let beta;
    let kappa = eigen_scalar(&e.coeff(0), &alpha);
    match family {
        Family::A | Family::SL => {
            let l1 = e.coeff(-1);
            let b: Vec<Q> = (0..n).map(|j| &l1[(r, j)] / &alpha[r]).collect();
            checks.push(check("L_-1 = α βᵗ", l1 == outer(&alpha, &b)));
            checks.push(check("βᵗα = 0", vdot(&b, &alpha).is_zero()));
            checks.push(check("rank L_-1 <= 1", l1.rank() <= 1));
            checks.push(check("L_-1² = 0", (&l1 * &l1).is_zero()));
            beta = Some(b);
        }
        Family::B | Family::D => {
            let s = &e.coeff(-1) * &sigma_inv;
            let b: Vec<Q> = matvec(&s, &u).into_iter().map(|x| -x).collect();
            checks.push(check("L_-1 σ⁻¹ skew", s.transpose() == -&s));
            checks.push(check("L_-1 = (αβᵗ − βαᵗ)σ", s == &outer(&alpha, &b) - &outer(&b, &alpha)));
            checks.push(check("βᵗσα = 0", vdot(&b, &matvec(sigma, &alpha)).is_zero()));
            checks.push(check("αᵗσα = 0", vdot(&alpha, &matvec(sigma, &alpha)).is_zero()));
            beta = Some(b);
        }
        Family::C => {
            let s2 = &e.coeff(-2) * &sigma_inv;
            let nu = &s2[(r, r)] / &(&alpha[r] * &alpha[r]);
            checks.push(check("L_-2 = ν ααᵗσ", s2 == outer(&alpha, &alpha).scale(&nu)));
            let s1 = &e.coeff(-1) * &sigma_inv;
            let su = matvec(&s1, &u);
            let c = vdot(&u, &su) * Q::frac(1, 2);
            let b: Vec<Q> = su.iter().zip(&alpha).map(|(x, a)| x - &(&c * a)).collect();
            checks.push(check("L_-1 = (αβᵗ + βαᵗ)σ", s1 == &outer(&alpha, &b) + &outer(&b, &alpha)));
            let l1a = matvec(&e.coeff(1), &alpha);
            checks.push(check("αᵗσ L_1 α = 0", vdot(&alpha, &matvec(sigma, &l1a)).is_zero()));
            beta = Some(b);
        }
        Family::G2 => unreachable!(),
    }
    checks.push(check("L_0 α = κ α", kappa.is_some()));
    Ok(TyurinReport { family, checks, alpha, beta, kappa })
}

/// Splits a G2 element into `(A, b1, b2)`.
fn g2_parts(x: &Mat) -> (Mat, Vec<Q>, Vec<Q>) {
    let a = Mat::from_fn(3, 3, |i, j| x[(1 + i, 1 + j)].clone());
    let half = Q::frac(1, 2);
    let b1 = (0..3).map(|i| &x[(1 + i, 0)] * &half).collect();
    let b2 = (0..3).map(|i| &x[(4 + i, 0)] * &half).collect();
    (a, b1, b2)
}

fn tyurin_g2(e: &MatrixLaurent, g: &Mat) -> TyurinReport {
    let ginv = g.inverse().expect("invertible conjugator");
    let back = |p: i64| &(&ginv * &e.coeff(p)) * g;
    let mut checks = Vec::new();
    let l2 = back(-2);
    let (a2, b12, b22) = g2_parts(&l2);
    let shape2 = l2 == crate::liealg::g2_element(&a2, &b12, &b22)
        && b12.iter().chain(&b22).all(Q::is_zero)
        && (0..3).all(|i| (0..3).all(|j| (i, j) == (1, 2) || a2[(i, j)].is_zero()));
    checks.push(check("L_-2 = μ (ã1ã2ᵗ ⊕ −ã2ã1ᵗ)", shape2));
    let l1 = back(-1);
    let (a1, b11, b21) = g2_parts(&l1);
    checks.push(check("L_-1 block shape", l1 == crate::liealg::g2_element(&a1, &b11, &b21)));
    checks.push(check("b1 ∥ ã1, b2 ∥ ã2", b11[0].is_zero() && b11[2].is_zero() && b21[0].is_zero() && b21[1].is_zero()));
    let a_shape = (0..3).all(|i| (0..3).all(|j| i == 1 || j == 2 || a1[(i, j)].is_zero()));
    checks.push(check("A = ã1β2ᵗ − β1ã2ᵗ", a_shape));
    checks.push(check("ã1ᵗβ2 = 0, ã2ᵗβ1 = 0", a1[(1, 1)].is_zero() && a1[(2, 2)].is_zero()));
    let l0 = back(0);
    let (a0, b10, b20) = g2_parts(&l0);
    checks.push(check("L_0 block shape", l0 == crate::liealg::g2_element(&a0, &b10, &b20)));
    checks.push(check("ã1ᵗa2 = 0, ã2ᵗa1 = 0", b20[1].is_zero() && b10[2].is_zero()));
    let e1 = [Q::zero(), Q::one(), Q::zero()];
    let e2 = [Q::zero(), Q::zero(), Q::one()];
    let k1 = eigen_scalar(&a0, &e1);
    let k2 = eigen_scalar(&(-&a0.transpose()), &e2);
    checks.push(check("A ã1 = κ1 ã1", k1.is_some()));
    checks.push(check("−Aᵗ ã2 = κ2 ã2", k2.is_some()));
    TyurinReport { family: Family::G2, checks, alpha: col(g, 2), beta: None, kappa: k1 }
}

/// Random group element preserving the structure of `dec`'s algebra:
/// unimodular integer matrices for gl/sl, Cayley transforms for B/C/D, and
/// products of unipotent root exponentials for G2.
pub fn random_conjugator(dec: &GradedDecomposition, rng: &mut impl Rng) -> Mat {
    let alg = &dec.algebra;
    let n = alg.rep_dim;
    match alg.family {
        Family::A | Family::SL => {
            let mut g = Mat::identity(n);
            for _ in 0..3 * n {
                let i = rng.gen_range(0..n);
                let j = rng.gen_range(0..n);
                if i == j {
                    continue;
                }
                let c = Q::int(rng.gen_range(-2..=2));
                let mut el = Mat::identity(n);
                el[(i, j)] = c;
                g = &g * &el;
            }
            if rng.gen_bool(0.5) && n > 1 {
                // permutation keeps the determinant ±1
                let mut p = Mat::zeros(n, n);
                for i in 0..n {
                    p[(i, (i + 1) % n)] = Q::one();
                }
                g = &g * &p;
            }
            g
        }
        Family::B | Family::C | Family::D => loop {
            let c: Vec<Q> = (0..alg.dim()).map(|_| Q::random(rng, 2, 3)).collect();
            let x = alg.combine(&c);
            let id = Mat::identity(n);
            if let Some(inv) = (&id - &x).inverse() {
                break &inv * &(&id + &x);
            }
        },
        Family::G2 => {
            let mut g = Mat::identity(n);
            let roots: Vec<&Mat> =
                alg.positive_root_vectors.iter().chain(&alg.negative_root_vectors).collect();
            for _ in 0..6 {
                let x = roots[rng.gen_range(0..roots.len())].scale(&Q::random(rng, 2, 2));
                g = &g * &unipotent_exp(&x);
            }
            g
        }
    }
}

/// `exp(x)` for nilpotent `x`.
pub fn unipotent_exp(x: &Mat) -> Mat {
    let n = x.rows;
    let mut acc = Mat::identity(n);
    let mut term = Mat::identity(n);
    for j in 1..=n as i64 {
        term = (&term * x).scale(&Q::frac(1, j));
        if term.is_zero() {
            break;
        }
        acc = &acc + &term;
    }
    acc
}

/// Conjugates every coefficient: `g c g⁻¹`.
pub fn conjugate_series(e: &MatrixLaurent, g: &Mat) -> MatrixLaurent {
    let ginv = g.inverse().expect("invertible conjugator");
    e.map(|c| &(g * c) * &ginv)
}
