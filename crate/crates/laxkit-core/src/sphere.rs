//! Exact genus-0 realization of the Lax operator algebra.
//!
//! Matrix-valued rational functions on the Riemann sphere are kept in
//! partial-fraction form
//! `C + Σ_x Σ_j C_{x,j} (z − x)^{−j} + Σ_j P_j z^j`, which is canonical, so
//! pole orders, residues and Laurent expansions are read off exactly.
//!
//! With a graded basis `X_b ∈ g_{s(b)}`, the expansion condition at `γ ∈ Γ`
//! says `ord_γ f_b ≥ s(b)` for the coordinate `f_b`, so a homogeneous
//! subspace is a sum of scalar Riemann–Roch spaces, one per degree `s`.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::exact::{binom, nullspace, solve, Coordinates, Mat, Rref, Q};
use crate::formal::{expansion_of_commutator, LaxExpansion, MOpExpansion, MatrixLaurent};
use crate::liealg::{Family, GradedDecomposition};
use crate::Error;

/// A point of the rational line or `∞`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Point {
    Finite(Q),
    Infinity,
}

impl Point {
    pub fn at(n: i64) -> Self {
        Point::Finite(Q::int(n))
    }
    pub fn finite(&self) -> Option<&Q> {
        match self {
            Point::Finite(x) => Some(x),
            Point::Infinity => None,
        }
    }
}

/// Matrix of rational functions in partial-fraction form.
#[derive(Clone, Debug, PartialEq)]
pub struct Rmf {
    pub rows: usize,
    pub cols: usize,
    pub constant: Mat,
    /// `(x, [C_{x,1}, C_{x,2}, ...])`, sorted by `x`, last coefficient nonzero.
    pub poles: Vec<(Q, Vec<Mat>)>,
    /// `[P_1, P_2, ...]`, coefficient of `z^j`, last nonzero.
    pub poly: Vec<Mat>,
}

fn trim(v: &mut Vec<Mat>) {
    while v.last().is_some_and(Mat::is_zero) {
        v.pop();
    }
}

impl Rmf {
    pub fn zero(rows: usize, cols: usize) -> Self {
        Rmf { rows, cols, constant: Mat::zeros(rows, cols), poles: Vec::new(), poly: Vec::new() }
    }

    pub fn constant(m: Mat) -> Self {
        Rmf { rows: m.rows, cols: m.cols, constant: m, poles: Vec::new(), poly: Vec::new() }
    }

    pub fn scalar(c: Q) -> Self {
        Self::constant(Mat { rows: 1, cols: 1, data: vec![c] })
    }

    /// `m (z − x)^{−j}` for finite `x`, or `m z^j` at `∞`; `j ≥ 1`.
    pub fn pole_term(at: &Point, j: usize, m: Mat) -> Self {
        let mut out = Self::zero(m.rows, m.cols);
        let mut coeffs = vec![Mat::zeros(m.rows, m.cols); j];
        coeffs[j - 1] = m;
        trim(&mut coeffs);
        if coeffs.is_empty() {
            return out;
        }
        match at {
            Point::Finite(x) => out.poles.push((x.clone(), coeffs)),
            Point::Infinity => out.poly = coeffs,
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.constant.is_zero() && self.poles.is_empty() && self.poly.is_empty()
    }

    fn normalize(mut self) -> Self {
        for (_, c) in self.poles.iter_mut() {
            trim(c);
        }
        self.poles.retain(|(_, c)| !c.is_empty());
        self.poles.sort_by(|a, b| a.0.cmp(&b.0));
        trim(&mut self.poly);
        self
    }

    fn pole(&self, x: &Q) -> Option<&Vec<Mat>> {
        self.poles.iter().find(|(y, _)| y == x).map(|(_, c)| c)
    }

    /// Pole order at a point (0 if regular there).
    pub fn pole_order(&self, at: &Point) -> usize {
        match at {
            Point::Finite(x) => self.pole(x).map_or(0, Vec::len),
            Point::Infinity => self.poly.len(),
        }
    }

    /// Finite poles.
    pub fn finite_poles(&self) -> Vec<Q> {
        self.poles.iter().map(|(x, _)| x.clone()).collect()
    }

    fn total_pole_degree(&self) -> usize {
        self.poles.iter().map(|(_, c)| c.len()).sum::<usize>() + self.poly.len()
    }

    pub fn add(&self, o: &Rmf) -> Rmf {
        let mut out = self.clone();
        out.constant = &out.constant + &o.constant;
        for (x, c) in &o.poles {
            match out.poles.iter_mut().find(|(y, _)| y == x) {
                Some((_, d)) => {
                    if d.len() < c.len() {
                        d.resize(c.len(), Mat::zeros(self.rows, self.cols));
                    }
                    for (a, b) in d.iter_mut().zip(c) {
                        *a = &*a + b;
                    }
                }
                None => out.poles.push((x.clone(), c.clone())),
            }
        }
        if out.poly.len() < o.poly.len() {
            out.poly.resize(o.poly.len(), Mat::zeros(self.rows, self.cols));
        }
        for (a, b) in out.poly.iter_mut().zip(&o.poly) {
            *a = &*a + b;
        }
        out.normalize()
    }

    pub fn scale(&self, s: &Q) -> Rmf {
        self.map(|m| m.scale(s))
    }

    pub fn sub(&self, o: &Rmf) -> Rmf {
        self.add(&o.scale(&-Q::one()))
    }

    /// Applies a linear map to every coefficient.
    pub fn map(&self, f: impl Fn(&Mat) -> Mat) -> Rmf {
        let constant = f(&self.constant);
        let (rows, cols) = (constant.rows, constant.cols);
        Rmf {
            rows,
            cols,
            constant,
            poles: self.poles.iter().map(|(x, c)| (x.clone(), c.iter().map(&f).collect())).collect(),
            poly: self.poly.iter().map(&f).collect(),
        }
        .normalize()
    }

    /// Laurent coefficients at `at` for degrees `lo..=hi`, in the local
    /// coordinate `z − x` (or `1/z` at `∞`).
    pub fn laurent(&self, at: &Point, lo: i64, hi: i64) -> Vec<Mat> {
        let zero = Mat::zeros(self.rows, self.cols);
        let mut out = vec![zero; (hi - lo + 1).max(0) as usize];
        let mut put = |d: i64, m: &Mat, s: &Q| {
            if d >= lo && d <= hi && !s.is_zero() {
                let i = (d - lo) as usize;
                out[i].axpy(s, m);
            }
        };
        match at {
            Point::Finite(y) => {
                put(0, &self.constant, &Q::one());
                for (x, c) in &self.poles {
                    if x == y {
                        for (j, m) in c.iter().enumerate() {
                            put(-(j as i64 + 1), m, &Q::one());
                        }
                        continue;
                    }
                    let dx = y - x;
                    for (j, m) in c.iter().enumerate() {
                        let j = j as i64 + 1;
                        for d in lo.max(0)..=hi {
                            put(d, m, &(binom(-j, d as u32) * dx.pow(-(j + d) as i32)));
                        }
                    }
                }
                for (j, m) in self.poly.iter().enumerate() {
                    let j = j as i64 + 1;
                    for d in lo.max(0)..=hi.min(j) {
                        put(d, m, &(binom(j, d as u32) * y.pow((j - d) as i32)));
                    }
                }
            }
            Point::Infinity => {
                put(0, &self.constant, &Q::one());
                for (j, m) in self.poly.iter().enumerate() {
                    put(-(j as i64 + 1), m, &Q::one());
                }
                for (x, c) in &self.poles {
                    for (j, m) in c.iter().enumerate() {
                        let j = j as i64 + 1;
                        for d in lo.max(j)..=hi {
                            put(d, m, &(binom(d - 1, (d - j) as u32) * x.pow((d - j) as i32)));
                        }
                    }
                }
            }
        }
        out
    }

    /// Order of vanishing at `at` (negative for poles); `None` for the zero function.
    pub fn order(&self, at: &Point) -> Option<i64> {
        if self.is_zero() {
            return None;
        }
        let p = self.pole_order(at) as i64;
        if p > 0 {
            return Some(-p);
        }
        // A nonzero function has at most `total pole degree` zeros.
        let bound = self.total_pole_degree() as i64;
        let coeffs = self.laurent(at, 0, bound);
        coeffs.iter().position(|c| !c.is_zero()).map(|i| i as i64)
    }

    pub fn residue(&self, at: &Point) -> Mat {
        match at {
            Point::Finite(x) => self.pole(x).map_or_else(|| Mat::zeros(self.rows, self.cols), |c| c[0].clone()),
            Point::Infinity => -&self.laurent(at, 1, 1)[0],
        }
    }

    /// Product of matrix functions.
    pub fn mul(&self, o: &Rmf) -> Rmf {
        assert_eq!(self.cols, o.rows);
        let (rows, cols) = (self.rows, o.cols);
        let mut xs: BTreeSet<Q> = self.finite_poles().into_iter().collect();
        xs.extend(o.finite_poles());
        let conv = |a: &[Mat], b: &[Mat], a_lo: i64, b_lo: i64, d: i64| -> Mat {
            let mut acc = Mat::zeros(rows, cols);
            for (i, ai) in a.iter().enumerate() {
                if ai.is_zero() {
                    continue;
                }
                let j = d - a_lo - i as i64 - b_lo;
                if j < 0 || j >= b.len() as i64 {
                    continue;
                }
                let bj = &b[j as usize];
                if !bj.is_zero() {
                    acc = &acc + &(ai * bj);
                }
            }
            acc
        };
        let mut poles = Vec::new();
        for x in xs {
            let pt = Point::Finite(x.clone());
            let a = self.pole_order(&pt) as i64;
            let b = o.pole_order(&pt) as i64;
            let fa = self.laurent(&pt, -a, b - 1);
            let gb = o.laurent(&pt, -b, a - 1);
            let c: Vec<Mat> = (1..=a + b).map(|j| conv(&fa, &gb, -a, -b, -j)).collect();
            poles.push((x, c));
        }
        let a = self.poly.len() as i64;
        let b = o.poly.len() as i64;
        let fa = self.laurent(&Point::Infinity, -a, b);
        let gb = o.laurent(&Point::Infinity, -b, a);
        let constant = conv(&fa, &gb, -a, -b, 0);
        let poly = (1..=a + b).map(|j| conv(&fa, &gb, -a, -b, -j)).collect();
        Rmf { rows, cols, constant, poles, poly }.normalize()
    }

    pub fn commutator(&self, o: &Rmf) -> Rmf {
        self.mul(o).sub(&o.mul(self))
    }

    /// `d/dz`.
    pub fn derivative(&self) -> Rmf {
        let z = Mat::zeros(self.rows, self.cols);
        let poles = self
            .poles
            .iter()
            .map(|(x, c)| {
                let mut d = vec![z.clone(); c.len() + 1];
                for (j, m) in c.iter().enumerate() {
                    d[j + 1] = m.scale(&Q::int(-(j as i64 + 1)));
                }
                (x.clone(), d)
            })
            .collect();
        let constant = self.poly.first().cloned().unwrap_or_else(|| z.clone());
        let poly = self.poly.iter().enumerate().skip(1).map(|(j, m)| m.scale(&Q::int(j as i64 + 1))).collect();
        Rmf { rows: self.rows, cols: self.cols, constant, poles, poly }.normalize()
    }

    /// Entrywise trace, as a scalar function.
    pub fn trace(&self) -> Rmf {
        self.map(|m| Mat { rows: 1, cols: 1, data: vec![m.trace()] })
    }

    /// Value at a finite point that is not a pole.
    pub fn eval(&self, z: &Q) -> Mat {
        let mut acc = self.constant.clone();
        for (x, c) in &self.poles {
            let d = z - x;
            assert!(!d.is_zero(), "evaluation at a pole");
            for (j, m) in c.iter().enumerate() {
                acc.axpy(&d.pow(-(j as i32 + 1)), m);
            }
        }
        for (j, m) in self.poly.iter().enumerate() {
            acc.axpy(&z.pow(j as i32 + 1), m);
        }
        acc
    }

    /// The scalar value of a `1×1` function's coefficient.
    pub fn scalar_coeff(m: &Mat) -> Q {
        m.data[0].clone()
    }

    /// Multiplies by a constant matrix on the right (`F·X`) for scalar `F`.
    pub fn times_matrix(&self, x: &Mat) -> Rmf {
        self.map(|m| x.scale(&m.data[0]))
    }

    /// `self^e` for square functions, `e ≥ 0`.
    pub fn pow(&self, e: u32) -> Rmf {
        let mut acc = Rmf::constant(Mat::identity(self.rows));
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    /// Flattened coefficient vector over a fixed monomial layout.
    fn flatten(&self, layout: &Layout) -> Option<Vec<Q>> {
        let mut v = self.constant.data.clone();
        for (x, ord) in &layout.poles {
            let c = self.pole(x);
            for j in 0..*ord {
                match c.and_then(|c| c.get(j)) {
                    Some(m) => v.extend(m.data.iter().cloned()),
                    None => v.extend(core::iter::repeat_n(Q::zero(), self.rows * self.cols)),
                }
            }
        }
        if self.poles.iter().any(|(x, c)| layout.poles.iter().find(|(y, _)| y == x).is_none_or(|(_, o)| *o < c.len())) {
            return None;
        }
        if self.poly.len() > layout.poly {
            return None;
        }
        for j in 0..layout.poly {
            match self.poly.get(j) {
                Some(m) => v.extend(m.data.iter().cloned()),
                None => v.extend(core::iter::repeat_n(Q::zero(), self.rows * self.cols)),
            }
        }
        Some(v)
    }
}

struct Layout {
    poles: Vec<(Q, usize)>,
    poly: usize,
}

impl Layout {
    fn covering(fs: &[&Rmf]) -> Layout {
        let mut poles: Vec<(Q, usize)> = Vec::new();
        let mut poly = 0;
        for f in fs {
            for (x, c) in &f.poles {
                match poles.iter_mut().find(|(y, _)| y == x) {
                    Some((_, o)) => *o = (*o).max(c.len()),
                    None => poles.push((x.clone(), c.len())),
                }
            }
            poly = poly.max(f.poly.len());
        }
        Layout { poles, poly }
    }
}

/// Scalar functions with poles bounded by `poles` and zeros forced by `zeros`,
/// holomorphic elsewhere (including `∞` unless listed).
pub fn scalar_space(poles: &[(Point, usize)], zeros: &[(Point, usize)]) -> Vec<Rmf> {
    let mut params: Vec<Rmf> = vec![Rmf::scalar(Q::one())];
    for (pt, ord) in poles {
        for j in 1..=*ord {
            params.push(Rmf::pole_term(pt, j, Mat::identity(1)));
        }
    }
    let mut rows: Vec<Vec<Q>> = Vec::new();
    for (pt, ord) in zeros {
        if *ord == 0 {
            continue;
        }
        let exps: Vec<Vec<Mat>> = params.iter().map(|f| f.laurent(pt, 0, *ord as i64 - 1)).collect();
        for d in 0..*ord {
            rows.push(exps.iter().map(|e| Rmf::scalar_coeff(&e[d])).collect());
        }
    }
    let ns = if rows.is_empty() {
        (0..params.len())
            .map(|i| (0..params.len()).map(|j| if i == j { Q::one() } else { Q::zero() }).collect())
            .collect()
    } else {
        nullspace(rows, params.len())
    };
    ns.into_iter()
        .map(|v| {
            let mut f = Rmf::zero(1, 1);
            for (c, p) in v.iter().zip(&params) {
                if !c.is_zero() {
                    f = f.add(&p.scale(c));
                }
            }
            f
        })
        .collect()
}

/// The point data `Π = P ∪ Q`, `Γ` and weights `a_j` defining `D_m` for all `m`.
#[derive(Clone, Debug)]
pub struct DivisorFamily {
    pub p_points: Vec<Point>,
    pub q_points: Vec<(Point, Q)>,
    pub gamma: Vec<Point>,
}

/// `D_m = −m Σ P_i + Σ (a_j m + b_{m,j}) Q_j + k Σ γ` at genus 0.
#[derive(Clone, Debug)]
pub struct DivisorSpec {
    pub p_points: Vec<Point>,
    /// `(Q_j, a_j, b_{m,j})`.
    pub q_points: Vec<(Point, Q, Q)>,
    pub gamma: Vec<Point>,
    pub m: i64,
}

impl DivisorFamily {
    pub fn new(p_points: Vec<Point>, q_points: Vec<(Point, Q)>, gamma: Vec<Point>) -> Result<Self, Error> {
        let n = p_points.len();
        if n == 0 || q_points.is_empty() {
            return Err(Error::InvalidDivisor("P and Q must be nonempty"));
        }
        let sum_a = q_points.iter().fold(Q::zero(), |acc, (_, a)| acc + a);
        if sum_a != Q::int(n as i64) || q_points.iter().any(|(_, a)| !(a > &Q::zero())) {
            return Err(Error::InvalidDivisor("a_j must be positive with Σ a_j = N"));
        }
        let mut all: Vec<&Point> = p_points.iter().chain(q_points.iter().map(|(p, _)| p)).collect();
        all.extend(gamma.iter());
        let distinct: BTreeSet<&Point> = all.iter().copied().collect();
        if distinct.len() != all.len() {
            return Err(Error::InvalidDivisor("points must be distinct and Γ ∩ Π = ∅"));
        }
        if gamma.contains(&Point::Infinity) {
            return Err(Error::InvalidDivisor("Γ points must be finite"));
        }
        Ok(DivisorFamily { p_points, q_points, gamma })
    }

    /// Two-point family `P = {p}`, `Q = {q}` with `a = 1`.
    pub fn two_point(p: Point, q: Point, gamma: Vec<Point>) -> Result<Self, Error> {
        Self::new(vec![p], vec![(q, Q::one())], gamma)
    }

    pub fn n(&self) -> usize {
        self.p_points.len()
    }

    /// `B = N + max_j a_j`.
    pub fn bound_b(&self) -> Q {
        let max_a = self.q_points.iter().map(|(_, a)| a.clone()).max().unwrap_or_else(Q::zero);
        Q::int(self.n() as i64) + max_a
    }

    /// Divisor at grading index `m`: balanced largest-remainder rounding of
    /// `a_j m + (N − 1)/M` to integers with total `N m + N − 1`.
    pub fn divisor(&self, m: i64) -> DivisorSpec {
        let n = self.n() as i64;
        let mm = self.q_points.len() as i64;
        let share = Q::frac(n - 1, mm);
        let xs: Vec<Q> = self.q_points.iter().map(|(_, a)| a * &Q::int(m) + &share).collect();
        let floors: Vec<i64> = xs.iter().map(Q::floor_i64).collect();
        let total = n * m + n - 1;
        let mut extra = total - floors.iter().sum::<i64>();
        let mut order: Vec<usize> = (0..xs.len()).collect();
        order.sort_by(|&i, &j| {
            let fi = &xs[i] - &Q::int(floors[i]);
            let fj = &xs[j] - &Q::int(floors[j]);
            fj.cmp(&fi).then(i.cmp(&j))
        });
        let mut vals = floors.clone();
        for &i in &order {
            if extra == 0 {
                break;
            }
            vals[i] += 1;
            extra -= 1;
        }
        let q_points = self
            .q_points
            .iter()
            .zip(&vals)
            .map(|((p, a), v)| (p.clone(), a.clone(), Q::int(*v) - a * &Q::int(m)))
            .collect();
        DivisorSpec { p_points: self.p_points.clone(), q_points, gamma: self.gamma.clone(), m }
    }
}

impl DivisorSpec {
    /// Coefficients of `D_m` on `Π`.
    pub fn pi_degrees(&self) -> Vec<(Point, i64)> {
        let mut v: Vec<(Point, i64)> = self.p_points.iter().map(|p| (p.clone(), -self.m)).collect();
        for (p, a, b) in &self.q_points {
            let d = a * &Q::int(self.m) + b;
            v.push((p.clone(), d.to_i64().expect("integral divisor")));
        }
        v
    }

    /// `deg D_m` without the Γ part.
    pub fn degree(&self) -> i64 {
        self.pi_degrees().iter().map(|(_, d)| d).sum()
    }

    pub fn n(&self) -> usize {
        self.p_points.len()
    }

    /// Checks `Σ a_j = N`, `Σ b_{m,j} = N − 1` and `|b_{m,j}| ≤ B`.
    pub fn validate(&self, bound_b: &Q) -> Result<(), Error> {
        let n = Q::int(self.n() as i64);
        let sa = self.q_points.iter().fold(Q::zero(), |acc, q| acc + &q.1);
        let sb = self.q_points.iter().fold(Q::zero(), |acc, q| acc + &q.2);
        if sa != n {
            return Err(Error::InvalidDivisor("Σ a_j ≠ N"));
        }
        if sb != &n - &Q::one() {
            return Err(Error::InvalidDivisor("Σ b_{m,j} ≠ N − 1"));
        }
        if self.q_points.iter().any(|q| &q.2.abs() > bound_b) {
            return Err(Error::InvalidDivisor("|b_{m,j}| > B"));
        }
        Ok(())
    }
}

/// Basis of `L_m = {L : (L) + D_m ≥ 0, expansion condition at Γ}`.
#[derive(Clone, Debug)]
pub struct AlgebraSlice {
    pub divisor: DivisorSpec,
    pub basis: Vec<Rmf>,
}

impl AlgebraSlice {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }
}

/// Scalar constraint data for graded degree `s`.
fn scalar_constraints(d: &DivisorSpec, s: i64) -> (Vec<(Point, usize)>, Vec<(Point, usize)>) {
    let mut poles = Vec::new();
    let mut zeros = Vec::new();
    for (pt, deg) in d.pi_degrees() {
        if deg > 0 {
            poles.push((pt, deg as usize));
        } else if deg < 0 {
            zeros.push((pt, (-deg) as usize));
        }
    }
    for g in &d.gamma {
        if s < 0 {
            poles.push((g.clone(), (-s) as usize));
        } else if s > 0 {
            zeros.push((g.clone(), s as usize));
        }
    }
    (poles, zeros)
}

/// Builds the slice without checking its dimension.
pub fn build_homogeneous_subspace_unchecked(dec: &GradedDecomposition, d: &DivisorSpec) -> AlgebraSlice {
    let mut basis = Vec::new();
    for s in -dec.k()..=dec.k() {
        let idx = dec.indexed(s);
        if idx.is_empty() {
            continue;
        }
        let (poles, zeros) = scalar_constraints(d, s);
        let fs = scalar_space(&poles, &zeros);
        for &b in &idx {
            for f in &fs {
                basis.push(f.times_matrix(&dec.basis[b]));
            }
        }
    }
    AlgebraSlice { divisor: d.clone(), basis }
}

/// Builds `L_m` and checks `dim L_m = N · dim g`.
pub fn build_homogeneous_subspace(dec: &GradedDecomposition, d: &DivisorSpec) -> Result<AlgebraSlice, Error> {
    let slice = build_homogeneous_subspace_unchecked(dec, d);
    let expected = d.n() * dec.dim();
    if slice.dim() != expected {
        return Err(Error::RankDeficient { expected, found: slice.dim() });
    }
    Ok(slice)
}

/// Predicted `Σ_s dim g_s · max(0, deg D_m − s|Γ| + 1)` at genus 0.
pub fn predicted_dimension(dec: &GradedDecomposition, d: &DivisorSpec) -> usize {
    let deg = d.degree();
    let gam = d.gamma.len() as i64;
    (-dec.k()..=dec.k()).map(|s| dec.dim_g(s) * (deg - s * gam + 1).max(0) as usize).sum()
}

/// Local expansion of `f` at `at` as a [`MatrixLaurent`] with degrees `lo..=hi`.
pub fn local_expansion(dec: &Arc<GradedDecomposition>, f: &Rmf, at: &Point, lo: i64, hi: i64) -> MatrixLaurent {
    MatrixLaurent::new(dec.clone(), lo, f.laurent(at, lo, hi))
}

/// Independent membership test for `L_m`: values in `g`, divisor bound on
/// `Π`, holomorphic elsewhere outside `Γ`, and `L_p ∈ g̃_p` at each `γ`.
pub fn in_slice(dec: &Arc<GradedDecomposition>, d: &DivisorSpec, l: &Rmf) -> bool {
    if l.is_zero() {
        return true;
    }
    let k = dec.k();
    let coeffs_ok = core::iter::once(&l.constant)
        .chain(l.poles.iter().flat_map(|(_, c)| c.iter()))
        .chain(l.poly.iter())
        .all(|m| dec.coords(m).is_some());
    if !coeffs_ok {
        return false;
    }
    let pis = d.pi_degrees();
    for (pt, deg) in &pis {
        if l.order(pt).is_some_and(|o| o < -deg) {
            return false;
        }
    }
    let mut special: Vec<Point> = pis.iter().map(|(p, _)| p.clone()).collect();
    special.extend(d.gamma.iter().cloned());
    for x in l.finite_poles() {
        if !special.contains(&Point::Finite(x)) {
            return false;
        }
    }
    if !special.contains(&Point::Infinity) && !l.poly.is_empty() {
        return false;
    }
    d.gamma.iter().all(|g| {
        let e = local_expansion(dec, l, g, -k - 1, k);
        e.coeff(-k - 1).is_zero() && crate::formal::validate_lax(&e.truncate(k)).is_ok()
    })
}

/// Result of expanding `[L_m, L_n]` over consecutive slices.
#[derive(Clone, Debug)]
pub struct AlmostGradedReport {
    pub m: i64,
    pub n: i64,
    /// Smallest `S` with `[L_m, L_n] ⊆ ⊕_{r=m+n}^{m+n+S} L_r`.
    pub s: Option<i64>,
}

/// Measures `S` for `[L_m, L_n]` using slices `L_r`, `r ∈ [m+n, m+n+s_max]`.
pub fn almost_graded_bound(
    dec: &GradedDecomposition,
    fam: &DivisorFamily,
    m: i64,
    n: i64,
    s_max: i64,
) -> Result<AlmostGradedReport, Error> {
    let lm = build_homogeneous_subspace(dec, &fam.divisor(m))?;
    let ln = build_homogeneous_subspace(dec, &fam.divisor(n))?;
    let products: Vec<Rmf> = lm
        .basis
        .iter()
        .flat_map(|x| ln.basis.iter().map(move |y| x.commutator(y)))
        .filter(|c| !c.is_zero())
        .collect();
    let mut window: Vec<Rmf> = Vec::new();
    for s in 0..=s_max {
        window.extend(build_homogeneous_subspace(dec, &fam.divisor(m + n + s))?.basis);
        let mut all: Vec<&Rmf> = window.iter().collect();
        all.extend(products.iter());
        let layout = Layout::covering(&all);
        let cols: Vec<Vec<Q>> = window.iter().map(|w| w.flatten(&layout).expect("covered")).collect();
        let rows: Vec<Vec<Q>> = (0..cols.first().map_or(0, Vec::len))
            .map(|i| cols.iter().map(|c| c[i].clone()).collect())
            .collect();
        let ok = products.iter().all(|p| {
            let b = p.flatten(&layout).expect("covered");
            solve(&rows, &b, cols.len()).is_some()
        });
        if ok {
            return Ok(AlmostGradedReport { m, n, s: Some(s) });
        }
    }
    Ok(AlmostGradedReport { m, n, s: None })
}

/// Whether the slices `L_r`, `r ∈ range`, are linearly independent as a family.
pub fn slices_independent(slices: &[AlgebraSlice]) -> bool {
    let all: Vec<&Rmf> = slices.iter().flat_map(|s| s.basis.iter()).collect();
    let layout = Layout::covering(&all);
    let rows: Vec<Vec<Q>> = all.iter().map(|f| f.flatten(&layout).expect("covered")).collect();
    let cols = rows.first().map_or(0, Vec::len);
    Rref::new(rows, cols).rank() == all.len()
}

/// The canonical connection form `ω = Σ_γ h/(z − γ) dz`, corrected by
/// `−|Γ| h/(z − π_0) dz` when `∞ ∉ Π` (`π_0` the first finite point of `Π`).
pub fn canonical_omega(dec: &GradedDecomposition, d: &DivisorSpec) -> Rmf {
    let n = dec.n();
    let mut w = Rmf::zero(n, n);
    for g in &d.gamma {
        w = w.add(&Rmf::pole_term(g, 1, dec.h.clone()));
    }
    let pis: Vec<Point> = d.pi_degrees().into_iter().map(|(p, _)| p).collect();
    if !pis.contains(&Point::Infinity) && !d.gamma.is_empty() {
        let pi0 = pis.iter().find(|p| p.finite().is_some()).expect("finite Π point");
        w = w.sub(&Rmf::pole_term(pi0, 1, dec.h.scale(&Q::int(d.gamma.len() as i64))));
    }
    w
}

/// Checks that `ω` is `(h/z + holomorphic) dz` at each `γ` and has no other
/// poles outside `Π`.
pub fn omega_is_admissible(dec: &GradedDecomposition, d: &DivisorSpec, omega: &Rmf) -> bool {
    let pis: Vec<Point> = d.pi_degrees().into_iter().map(|(p, _)| p).collect();
    let gamma_ok = d.gamma.iter().all(|g| {
        let x = g.finite().expect("finite Γ");
        omega.pole(x).is_some_and(|c| c.len() == 1 && c[0] == dec.h)
    });
    let others_ok = omega
        .finite_poles()
        .into_iter()
        .all(|x| d.gamma.contains(&Point::Finite(x.clone())) || pis.contains(&Point::Finite(x)));
    let inf_ok = omega.poly.is_empty() || pis.contains(&Point::Infinity);
    gamma_ok && others_ok && inf_ok
}

/// The scalar function `⟨L, L′_z − [ω, L′]⟩`.
pub fn cocycle_density(l: &Rmf, lp: &Rmf, omega: &Rmf) -> Rmf {
    let inner = lp.derivative().sub(&omega.commutator(lp));
    l.mul(&inner).trace()
}

/// `η(L, L′) = Σ_i res_{P_i} ⟨L, (d − ad ω) L′⟩`.
pub fn cocycle_eta(
    dec: &GradedDecomposition,
    d: &DivisorSpec,
    l: &Rmf,
    lp: &Rmf,
    omega: &Rmf,
) -> Result<Q, Error> {
    if !omega_is_admissible(dec, d, omega) {
        return Err(Error::InvalidArgument("ω violates the required expansion at Γ"));
    }
    let f = cocycle_density(l, lp, omega);
    Ok(d.p_points.iter().fold(Q::zero(), |acc, p| acc + Rmf::scalar_coeff(&f.residue(p))))
}

/// Negative-degree part `[(degree, coefficient)]` of the cocycle density at `γ`.
pub fn cocycle_holomorphy_check(l: &Rmf, lp: &Rmf, omega: &Rmf, gamma: &Point) -> Vec<(i64, Q)> {
    let f = cocycle_density(l, lp, omega);
    let ord = f.pole_order(gamma) as i64;
    if ord == 0 {
        return Vec::new();
    }
    f.laurent(gamma, -ord, -1)
        .into_iter()
        .enumerate()
        .map(|(i, m)| (i as i64 - ord, Rmf::scalar_coeff(&m)))
        .filter(|(_, c)| !c.is_zero())
        .collect()
}

/// `Σ` over all poles (including `∞`) of `res tr(L dL′)`.
pub fn residue_sum(l: &Rmf, lp: &Rmf) -> Q {
    let f = l.mul(&lp.derivative()).trace();
    let mut pts: Vec<Point> = f.finite_poles().into_iter().map(Point::Finite).collect();
    pts.push(Point::Infinity);
    pts.iter().fold(Q::zero(), |acc, p| acc + Rmf::scalar_coeff(&f.residue(p)))
}

/// `δχ(L) = p L^{p−1}` for `χ = tr^p`, projected to `g`.
pub fn gradient_invariant(family: Family, l: &Mat, p: u32) -> Result<Mat, Error> {
    check_power(family, p)?;
    let g = l.pow(p - 1).scale(&Q::int(p as i64));
    Ok(project_sl(family, g))
}

fn check_power(family: Family, p: u32) -> Result<(), Error> {
    if p == 0 {
        return Err(Error::InvalidArgument("power must be positive"));
    }
    match family {
        Family::B | Family::C | Family::D if p % 2 == 1 => {
            Err(Error::InvalidArgument("odd powers are not invariant gradients for B/C/D"))
        }
        Family::G2 => Err(Error::Unsupported("gradient of tr^p is not catalogued for G2")),
        _ => Ok(()),
    }
}

fn project_sl(family: Family, g: Mat) -> Mat {
    if family != Family::SL {
        return g;
    }
    let n = g.rows;
    let t = g.trace() / Q::int(n as i64);
    &g - &Mat::identity(n).scale(&t)
}

/// Function-valued gradient `p L(z)^{p−1}`.
pub fn gradient_invariant_fn(family: Family, l: &Rmf, p: u32) -> Result<Rmf, Error> {
    check_power(family, p)?;
    let g = l.pow(p - 1).scale(&Q::int(p as i64));
    Ok(if family == Family::SL { g.map(|m| project_sl(family, m.clone())) } else { g })
}

/// `l` from `(Σ_{i=−k}^{−1} dim g̃_i + 1)|Γ| = (dim g) l`, if integral.
pub fn normalization_l(dec: &GradedDecomposition, gamma_count: usize) -> Option<usize> {
    let lhs = (dec.sum_negative_filtration() + 1) * gamma_count;
    (lhs % dec.dim() == 0).then(|| lhs / dec.dim())
}

/// How M-operators are normalized at the extra points `P_j`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Normalization {
    /// `M(P_j) = 0` at `l + 1` points.
    Pointwise,
    /// Each graded coordinate (with `h` as its own `g_0` slot) vanishes at as
    /// many points as it has free parameters in a pole-free-outside-Γ M-operator.
    Graded,
}

/// Free parameters of one coordinate of an M-operator without poles outside Γ.
fn slot_parameter_count(degree: i64, is_h: bool, gamma_count: usize) -> usize {
    let poles = if is_h { 1 } else { (-degree).max(0) as usize };
    1 + poles * gamma_count
}

/// Number of normalization points used by [`Normalization::Graded`].
pub fn graded_normalization_count(dec: &GradedDecomposition, gamma_count: usize) -> usize {
    let deepest = dec.degrees.iter().map(|&s| slot_parameter_count(s, false, gamma_count)).max().unwrap_or(1);
    let h = if dec.h.is_zero() { 1 } else { slot_parameter_count(0, true, gamma_count) };
    deepest.max(h)
}

/// Output of [`construct_m_operator`].
#[derive(Clone, Debug)]
pub struct MOperator {
    pub m_op: Rmf,
    /// `ν_γ` at each point of Γ.
    pub nu: Vec<Q>,
    /// Order `d` of the pole at `P`.
    pub pole_order: usize,
    pub l: usize,
    /// Dimension of M-operators with pole `≤ d` at `P` (before matching and normalization).
    pub pre_normalization_dim: usize,
    /// `dim g · (d + l + 1)`.
    pub expected_pre_normalization_dim: usize,
    /// Dimension of the remaining freedom after all constraints (0 when unique).
    pub affine_freedom: usize,
}

/// Constructs the M-operator `M_a` for `a = (tr^p, P, m)`: pole only at `P`
/// outside Γ with principal part equal to that of `w^{−m} δχ(L)`, the
/// expansion condition at each `γ`, and the chosen normalization at the extra
/// points.
pub fn construct_m_operator(
    dec: &GradedDecomposition,
    l: &Rmf,
    power: u32,
    p_point: &Point,
    m: i64,
    gamma: &[Point],
    norm_points: &[Q],
    normalization: Normalization,
) -> Result<MOperator, Error> {
    let family = dec.algebra.family;
    let x_p = p_point.finite().ok_or(Error::InvalidArgument("P must be finite"))?.clone();
    let lval = normalization_l(dec, gamma.len()).ok_or(Error::InvalidArgument("l is not integral for this |Γ|"))?;
    let needed = match normalization {
        Normalization::Pointwise => lval + 1,
        Normalization::Graded => graded_normalization_count(dec, gamma.len()),
    };
    if norm_points.len() != needed {
        return Err(Error::InvalidArgument("wrong number of normalization points"));
    }
    for z in norm_points {
        let pt = Point::Finite(z.clone());
        if pt == *p_point || gamma.contains(&pt) || l.pole_order(&pt) > 0 {
            return Err(Error::InvalidArgument("normalization point collides with Π ∪ Γ"));
        }
    }
    let grad = gradient_invariant_fn(family, l, power)?;
    if grad.pole_order(p_point) > 0 {
        return Err(Error::InvalidArgument("L is not regular at P"));
    }
    let d = m.max(0) as usize;
    // Principal part of w^{-m} δχ(L) at P: coefficient of w^{-j} is G_{m-j}.
    let g_exp = grad.laurent(p_point, 0, m.max(0) - 1);
    let target: Vec<Mat> = (1..=d).map(|j| g_exp[d - j].clone()).collect();

    let dim = dec.dim();
    let k = dec.k() as usize;
    let h_coords = dec.coords(&dec.h).expect("h in g");
    // Unknown layout: C0 | C_{P,1..d} | per γ: C_{γ,1..k}, ν_γ.
    let n_gamma_block = k * dim + 1;
    let n_unknowns = dim * (1 + d) + gamma.len() * n_gamma_block;
    let off_p = |j: usize| dim * j; // j = 1..d
    let off_g = |gi: usize, i: usize| dim * (1 + d) + gi * n_gamma_block + (i - 1) * dim;
    let off_nu = |gi: usize| dim * (1 + d) + gi * n_gamma_block + k * dim;

    let mut hom: Vec<Vec<Q>> = Vec::new();
    for gi in 0..gamma.len() {
        for i in 1..=k {
            for b in 0..dim {
                let deg = dec.degrees[b];
                if i >= 2 && deg > -(i as i64) {
                    let mut row = vec![Q::zero(); n_unknowns];
                    row[off_g(gi, i) + b] = Q::one();
                    hom.push(row);
                }
                if i == 1 && deg >= 0 {
                    let mut row = vec![Q::zero(); n_unknowns];
                    row[off_g(gi, 1) + b] = Q::one();
                    row[off_nu(gi)] = -&h_coords[b];
                    hom.push(row);
                }
            }
        }
    }
    let pre_dim = n_unknowns - Rref::new(hom.clone(), n_unknowns).rank();

    let mut rows = hom.clone();
    let mut rhs = vec![Q::zero(); hom.len()];
    for (j, t) in target.iter().enumerate() {
        let c = dec.coords(t).ok_or(Error::Internal("gradient outside g"))?;
        for b in 0..dim {
            let mut row = vec![Q::zero(); n_unknowns];
            row[off_p(j + 1) + b] = Q::one();
            rows.push(row);
            rhs.push(c[b].clone());
        }
    }
    // Coordinates adapted to the normalization: the graded basis with one
    // g_0 element replaced by h, so that ν_γ only feeds the h slot.
    let h_slot = (0..dim).find(|&b| dec.degrees[b] == 0 && !h_coords[b].is_zero());
    let mut adapted: Vec<Vec<Q>> = dec.basis.iter().map(|b| b.data.clone()).collect();
    if let Some(r) = h_slot {
        adapted[r] = dec.h.data.clone();
    }
    let adapted = Coordinates::new(&adapted).ok_or(Error::Internal("adapted basis is singular"))?;
    let phi_e: Vec<Vec<Q>> = dec.basis.iter().map(|b| adapted.coords_unchecked(&b.data)).collect();
    let phi_h = adapted.coords_unchecked(&dec.h.data);
    let eval_row = |z: &Q, b: usize| -> Vec<Q> {
        let mut row = vec![Q::zero(); n_unknowns];
        let dp = z - &x_p;
        for c in 0..dim {
            let w = &phi_e[c][b];
            if w.is_zero() {
                continue;
            }
            row[c] = w.clone();
            for j in 1..=d {
                row[off_p(j) + c] = w * &dp.pow(-(j as i32));
            }
            for (gi, g) in gamma.iter().enumerate() {
                let dg = z - g.finite().expect("finite Γ");
                for i in 1..=k {
                    row[off_g(gi, i) + c] = w * &dg.pow(-(i as i32));
                }
            }
        }
        for (gi, g) in gamma.iter().enumerate() {
            let dg = z - g.finite().expect("finite Γ");
            row[off_nu(gi)] = &phi_h[b] * &dg.recip();
        }
        row
    };
    for b in 0..dim {
        let count = match normalization {
            Normalization::Pointwise => norm_points.len(),
            Normalization::Graded => slot_parameter_count(dec.degrees[b], Some(b) == h_slot, gamma.len()),
        };
        for z in &norm_points[..count] {
            rows.push(eval_row(z, b));
            rhs.push(Q::zero());
        }
    }
    let sol = solve(&rows, &rhs, n_unknowns).ok_or(Error::Inconsistent("M-operator system"))?;
    let affine_freedom = n_unknowns - Rref::new(rows, n_unknowns).rank();

    let elem = |off: usize| -> Mat { dec.combine(&sol[off..off + dim]) };
    let mut mop = Rmf::constant(elem(0));
    for j in 1..=d {
        mop = mop.add(&Rmf::pole_term(p_point, j, elem(off_p(j))));
    }
    let mut nus = Vec::new();
    for (gi, g) in gamma.iter().enumerate() {
        let nu = sol[off_nu(gi)].clone();
        for i in 1..=k {
            let mut c = elem(off_g(gi, i));
            if i == 1 {
                c.axpy(&nu, &dec.h);
            }
            mop = mop.add(&Rmf::pole_term(g, i, c));
        }
        nus.push(nu);
    }
    Ok(MOperator {
        m_op: mop,
        nu: nus,
        pole_order: d,
        l: lval,
        pre_normalization_dim: pre_dim,
        expected_pre_normalization_dim: dim * (d + lval + 1),
        affine_freedom,
    })
}

/// A located failure of [`lax_tangency_check`].
#[derive(Clone, Debug, PartialEq)]
pub struct TangencyViolation {
    pub point: Point,
    pub degree: i64,
    pub what: String,
}

/// Report of [`lax_tangency_check`].
#[derive(Clone, Debug)]
pub struct TangencyReport {
    pub nu: Vec<Option<Q>>,
    pub violations: Vec<TangencyViolation>,
}

impl TangencyReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// `ν` with `C_{−1}` having `g_{≥0}`-part `ν h`, if any.
fn extract_nu(dec: &GradedDecomposition, c: &Mat) -> Option<Q> {
    let mut upper = Mat::zeros(dec.n(), dec.n());
    for s in 0..=dec.k() {
        upper = &upper + &dec.project(c, s);
    }
    if upper.is_zero() {
        return Some(Q::zero());
    }
    let hc = dec.coords(&dec.h)?;
    let uc = dec.coords(&upper)?;
    let i = hc.iter().position(|x| !x.is_zero())?;
    let nu = &uc[i] / &hc[i];
    (upper == dec.h.scale(&nu)).then_some(nu)
}

/// Checks that `[L, M]` lies in the tangent space: at each `γ` the expansion
/// starts at `z^{−k−1}` with coefficient `k ν L_{−k}` and agrees with the
/// term-wise commutator expansion; outside Γ, `([L, M]) + D ≥ 0`.
pub fn lax_tangency_check(dec: &Arc<GradedDecomposition>, l: &Rmf, m: &Rmf, d: &DivisorSpec) -> TangencyReport {
    let k = dec.k();
    let comm = l.commutator(m);
    let mut violations = Vec::new();
    let mut nus = Vec::new();
    let t = k + 1;
    for g in &d.gamma {
        let lo_m = -(m.pole_order(g) as i64).max(k);
        let le = local_expansion(dec, l, g, -k, t + 1);
        let me = local_expansion(dec, m, g, lo_m, t);
        let bad = |degree: i64, what: &str| TangencyViolation { point: g.clone(), degree, what: what.into() };
        for p in lo_m..-k {
            if !me.coeff(p).is_zero() {
                violations.push(bad(p, "M has a pole of order > k"));
            }
        }
        let nu = extract_nu(dec, &me.coeff(-1));
        if nu.is_none() {
            violations.push(bad(-1, "M_{-1} ∉ g̃_{-1} ⊕ C h"));
        }
        for p in (-k..-1).rev() {
            if !dec.in_filtration(&me.coeff(p), p) {
                violations.push(bad(p, "M_p ∉ g̃_p"));
            }
        }
        let lo_c = -(comm.pole_order(g) as i64);
        let ce = local_expansion(dec, &comm, g, lo_c.min(-k - 1), 0);
        for p in lo_c..(-k - 1) {
            if !ce.coeff(p).is_zero() {
                violations.push(bad(p, "[L, M] has a term below z^{-k-1}"));
            }
        }
        if let Some(nu) = &nu {
            let lead = le.coeff(-k).scale(&(Q::int(k) * nu));
            if ce.coeff(-k - 1) != lead {
                violations.push(bad(-k - 1, "leading coefficient ≠ k ν L_{-k}"));
            }
            let mut ms = me.truncate(t).map(Mat::clone);
            if lo_m < -k {
                ms = MatrixLaurent::new(dec.clone(), -k, (-k..=t).map(|p| me.coeff(p)).collect());
            }
            let mut c1 = ms.coeff(-1);
            c1.axpy(&-nu.clone(), &dec.h);
            ms.set(-1, c1);
            if let (Ok(lx), Ok(mx)) = (LaxExpansion::new(le.clone()), MOpExpansion::new(nu.clone(), ms)) {
                if let Ok(formal) = expansion_of_commutator(&lx, &mx) {
                    for p in -k - 1..=0 {
                        if p <= formal.trunc() && formal.coeff(p) != ce.coeff(p) {
                            violations.push(bad(p, "[L, M] differs from the term-wise expansion"));
                        }
                    }
                }
            } else {
                violations.push(bad(-k, "local expansion of L violates the Lax condition"));
            }
        }
        nus.push(nu);
    }
    let pis = d.pi_degrees();
    let mut pts: Vec<Point> = comm.finite_poles().into_iter().map(Point::Finite).collect();
    pts.extend(pis.iter().map(|(p, _)| p.clone()));
    pts.push(Point::Infinity);
    pts.sort();
    pts.dedup();
    for pt in pts {
        if d.gamma.contains(&pt) {
            continue;
        }
        let bound = pis.iter().find(|(p, _)| *p == pt).map_or(0, |(_, deg)| *deg);
        if let Some(o) = comm.order(&pt) {
            if o < -bound {
                violations.push(TangencyViolation { point: pt, degree: o, what: "([L, M]) + D ≥ 0 fails".into() });
            }
        }
    }
    TangencyReport { nu: nus, violations }
}

/// Random distinct small rational points avoiding `avoid`.
pub fn random_points(rng: &mut impl Rng, count: usize, avoid: &[Point]) -> Vec<Point> {
    let mut out: Vec<Point> = Vec::new();
    while out.len() < count {
        let p = Point::Finite(Q::random(rng, 9, 4));
        if !avoid.contains(&p) && !out.contains(&p) {
            out.push(p);
        }
    }
    out
}

/// Random element of a slice with small rational coefficients.
pub fn random_element(slice: &AlgebraSlice, rng: &mut impl Rng) -> Rmf {
    let (r, c) = slice.basis.first().map_or((0, 0), |b| (b.rows, b.cols));
    slice.basis.iter().fold(Rmf::zero(r, c), |acc, b| acc.add(&b.scale(&Q::random(rng, 3, 2))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::liealg::grading;

    fn q(n: i64) -> Q {
        Q::int(n)
    }

    #[test]
    fn laurent_and_product_agree_with_evaluation() {
        let a = Rmf::pole_term(&Point::at(1), 2, Mat::from_i64(2, 2, &[1, 2, 0, 1]))
            .add(&Rmf::pole_term(&Point::Infinity, 1, Mat::from_i64(2, 2, &[0, 1, 1, 0])))
            .add(&Rmf::constant(Mat::identity(2)));
        let b = Rmf::pole_term(&Point::at(-1), 1, Mat::from_i64(2, 2, &[3, 0, 1, 1]))
            .add(&Rmf::pole_term(&Point::at(1), 1, Mat::from_i64(2, 2, &[0, 0, 2, 0])));
        let p = a.mul(&b);
        for z in [q(3), Q::frac(1, 2), q(-5)] {
            assert_eq!(p.eval(&z), &a.eval(&z) * &b.eval(&z));
        }
        assert_eq!(p.pole_order(&Point::at(1)), 3);
        assert_eq!(p.pole_order(&Point::Infinity), 0);
    }

    #[test]
    fn residues_sum_to_zero() {
        let f = Rmf::pole_term(&Point::at(2), 3, Mat::identity(1))
            .add(&Rmf::pole_term(&Point::Infinity, 2, Mat::identity(1)));
        let g = Rmf::pole_term(&Point::at(0), 1, Mat::identity(1));
        assert!(residue_sum(&f, &g).is_zero());
    }

    #[test]
    fn order_at_regular_zero() {
        // (z - 1)/z = 1 - 1/z vanishes to first order at 1.
        let f = Rmf::scalar(q(1)).sub(&Rmf::pole_term(&Point::at(0), 1, Mat::identity(1)));
        assert_eq!(f.order(&Point::at(1)), Some(1));
        assert_eq!(f.order(&Point::at(0)), Some(-1));
        assert_eq!(f.order(&Point::Infinity), Some(0));
    }

    #[test]
    fn gl2_slice_dimension() {
        let dec = grading(Family::A, 2, 1, false).unwrap();
        let fam = DivisorFamily::two_point(Point::at(0), Point::Infinity, vec![Point::at(1)]).unwrap();
        let s = build_homogeneous_subspace(&dec, &fam.divisor(0)).unwrap();
        assert_eq!(s.dim(), 4);
    }

    #[test]
    fn trace_gradient_is_identity() {
        let l = Mat::from_i64(2, 2, &[1, 2, 3, 4]);
        assert_eq!(gradient_invariant(Family::A, &l, 1).unwrap(), Mat::identity(2));
        assert!(gradient_invariant(Family::D, &l, 3).is_err());
    }
}
