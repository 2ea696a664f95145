//! Exact rational scalars, dense matrices and Gauss-Jordan elimination.
//!
//! [`Q`] keeps an `i128` fraction while it fits and promotes to a big
//! rational on overflow, so typical small-entry computations avoid bignum
//! allocation without ever losing exactness.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;
use core::ops::{Add, AddAssign, Div, Index, IndexMut, Mul, Neg, Sub, SubAssign};

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{CheckedAdd, CheckedDiv, CheckedMul, CheckedSub, One, Signed, ToPrimitive, Zero};
use rand::Rng;

/// Exact rational number.
#[derive(Clone)]
pub enum Q {
    Small(Ratio<i128>),
    Big(BigRational),
}

fn to_big(r: &Ratio<i128>) -> BigRational {
    BigRational::new_raw(BigInt::from(*r.numer()), BigInt::from(*r.denom()))
}

impl Q {
    pub fn zero() -> Self {
        Q::Small(Ratio::from_integer(0))
    }
    pub fn one() -> Self {
        Q::Small(Ratio::from_integer(1))
    }
    pub fn int(n: i64) -> Self {
        Q::Small(Ratio::from_integer(n as i128))
    }
    /// `n / d`; panics when `d == 0`.
    pub fn frac(n: i64, d: i64) -> Self {
        Q::Small(Ratio::new(n as i128, d as i128))
    }

    fn big(&self) -> BigRational {
        match self {
            Q::Small(r) => to_big(r),
            Q::Big(b) => b.clone(),
        }
    }

    fn demote(b: BigRational) -> Self {
        match (b.numer().to_i128(), b.denom().to_i128()) {
            (Some(n), Some(d)) => Q::Small(Ratio::new_raw(n, d)),
            _ => Q::Big(b),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Q::Small(r) => r.numer() == &0,
            Q::Big(b) => b.is_zero(),
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            Q::Small(r) => r.is_one(),
            Q::Big(b) => b.is_one(),
        }
    }

    pub fn is_integer(&self) -> bool {
        match self {
            Q::Small(r) => r.is_integer(),
            Q::Big(b) => b.is_integer(),
        }
    }

    pub fn is_negative(&self) -> bool {
        match self {
            Q::Small(r) => r.is_negative(),
            Q::Big(b) => b.is_negative(),
        }
    }

    /// The value as an `i64` when it is an integer in range.
    pub fn to_i64(&self) -> Option<i64> {
        if !self.is_integer() {
            return None;
        }
        match self {
            Q::Small(r) => r.numer().to_i64(),
            Q::Big(b) => b.numer().to_i64(),
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Q::Small(r) => *r.numer() as f64 / *r.denom() as f64,
            Q::Big(b) => b.to_f64().unwrap_or(f64::NAN),
        }
    }

    pub fn abs(&self) -> Q {
        if self.is_negative() {
            -self
        } else {
            self.clone()
        }
    }

    pub fn recip(&self) -> Q {
        Q::one() / self
    }

    pub fn pow(&self, e: i32) -> Q {
        let mut base = if e < 0 { self.recip() } else { self.clone() };
        let mut e = e.unsigned_abs();
        let mut acc = Q::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            e >>= 1;
        }
        acc
    }

    /// Floor as an `i64` (values are assumed to fit).
    pub fn floor_i64(&self) -> i64 {
        let b = self.big().floor();
        b.numer().to_i64().expect("floor out of range")
    }

    /// Uniformly random fraction `a/b` with `|a| <= amp`, `1 <= b <= den`.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, amp: i64, den: i64) -> Q {
        let a = rng.gen_range(-amp..=amp);
        let b = rng.gen_range(1..=den);
        Q::frac(a, b)
    }

    /// Fraction string `"n/d"` or `"n"`.
    pub fn to_fraction_string(&self) -> String {
        alloc::format!("{}", self)
    }
}

impl Default for Q {
    fn default() -> Self {
        Q::zero()
    }
}

impl From<i64> for Q {
    fn from(n: i64) -> Self {
        Q::int(n)
    }
}

impl From<i32> for Q {
    fn from(n: i32) -> Self {
        Q::int(n as i64)
    }
}

impl fmt::Display for Q {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Q::Small(r) => write!(f, "{}", r),
            Q::Big(b) => write!(f, "{}", b),
        }
    }
}

impl fmt::Debug for Q {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl PartialEq for Q {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Q::Small(a), Q::Small(b)) => a == b,
            _ => self.big() == other.big(),
        }
    }
}
impl Eq for Q {}

impl PartialOrd for Q {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Q {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Q::Small(a), Q::Small(b)) => a.cmp(b),
            _ => self.big().cmp(&other.big()),
        }
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $checked:ident, $op:tt) => {
        impl<'a> $tr<&'a Q> for &'a Q {
            type Output = Q;
            fn $m(self, rhs: &'a Q) -> Q {
                if let (Q::Small(a), Q::Small(b)) = (self, rhs) {
                    if let Some(r) = a.$checked(b) {
                        return Q::Small(r);
                    }
                }
                Q::demote(self.big() $op rhs.big())
            }
        }
        impl $tr<Q> for Q {
            type Output = Q;
            fn $m(self, rhs: Q) -> Q {
                (&self).$m(&rhs)
            }
        }
        impl<'a> $tr<&'a Q> for Q {
            type Output = Q;
            fn $m(self, rhs: &'a Q) -> Q {
                (&self).$m(rhs)
            }
        }
        impl<'a> $tr<Q> for &'a Q {
            type Output = Q;
            fn $m(self, rhs: Q) -> Q {
                self.$m(&rhs)
            }
        }
    };
}

binop!(Add, add, checked_add, +);
binop!(Sub, sub, checked_sub, -);
binop!(Mul, mul, checked_mul, *);

impl<'a> Div<&'a Q> for &'a Q {
    type Output = Q;
    fn div(self, rhs: &'a Q) -> Q {
        assert!(!rhs.is_zero(), "division by zero");
        if let (Q::Small(a), Q::Small(b)) = (self, rhs) {
            if let Some(r) = a.checked_div(b) {
                return Q::Small(r);
            }
        }
        Q::demote(self.big() / rhs.big())
    }
}
impl Div<Q> for Q {
    type Output = Q;
    fn div(self, rhs: Q) -> Q {
        &self / &rhs
    }
}
impl<'a> Div<&'a Q> for Q {
    type Output = Q;
    fn div(self, rhs: &'a Q) -> Q {
        &self / rhs
    }
}

impl Neg for &Q {
    type Output = Q;
    fn neg(self) -> Q {
        match self {
            Q::Small(r) => match r.numer().checked_neg() {
                Some(n) => Q::Small(Ratio::new_raw(n, *r.denom())),
                None => Q::demote(-to_big(r)),
            },
            Q::Big(b) => Q::Big(-b.clone()),
        }
    }
}
impl Neg for Q {
    type Output = Q;
    fn neg(self) -> Q {
        -&self
    }
}

impl AddAssign<&Q> for Q {
    fn add_assign(&mut self, rhs: &Q) {
        *self = &*self + rhs;
    }
}
impl SubAssign<&Q> for Q {
    fn sub_assign(&mut self, rhs: &Q) {
        *self = &*self - rhs;
    }
}

/// Generalized binomial coefficient `binom(a, n)` for integer `a`, `n >= 0`.
pub fn binom(a: i64, n: u32) -> Q {
    let mut acc = Q::one();
    for i in 0..n as i64 {
        acc = acc * Q::frac(a - i, i + 1);
    }
    acc
}

/// Dense matrix with exact rational entries, row-major.
#[derive(Clone, PartialEq, Eq)]
pub struct Mat {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<Q>,
}

impl fmt::Debug for Mat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Mat {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            write!(f, "  ")?;
            for c in 0..self.cols {
                write!(f, "{:>6} ", self[(r, c)])?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl Index<(usize, usize)> for Mat {
    type Output = Q;
    fn index(&self, (r, c): (usize, usize)) -> &Q {
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for Mat {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Q {
        &mut self.data[r * self.cols + c]
    }
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat { rows, cols, data: vec![Q::zero(); rows * cols] }
    }

    pub fn square_zeros(n: usize) -> Self {
        Self::zeros(n, n)
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Q::one();
        }
        m
    }

    /// Matrix unit `E_{ij}` of size `n`.
    pub fn unit(n: usize, i: usize, j: usize) -> Self {
        let mut m = Self::zeros(n, n);
        m[(i, j)] = Q::one();
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Q) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Mat { rows, cols, data }
    }

    pub fn from_i64(rows: usize, cols: usize, vals: &[i64]) -> Self {
        assert_eq!(vals.len(), rows * cols);
        Mat { rows, cols, data: vals.iter().map(|&v| Q::int(v)).collect() }
    }

    pub fn diag(d: &[Q]) -> Self {
        let mut m = Self::zeros(d.len(), d.len());
        for (i, v) in d.iter().enumerate() {
            m[(i, i)] = v.clone();
        }
        m
    }

    pub fn column(v: &[Q]) -> Self {
        Mat { rows: v.len(), cols: 1, data: v.to_vec() }
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Q::is_zero)
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.rows).all(|r| (0..self.cols).all(|c| r == c || self[(r, c)].is_zero()))
    }

    pub fn diagonal(&self) -> Vec<Q> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)].clone()).collect()
    }

    pub fn trace(&self) -> Q {
        let mut t = Q::zero();
        for i in 0..self.rows.min(self.cols) {
            t += &self[(i, i)];
        }
        t
    }

    pub fn transpose(&self) -> Mat {
        Mat::from_fn(self.cols, self.rows, |r, c| self[(c, r)].clone())
    }

    pub fn scale(&self, s: &Q) -> Mat {
        if s.is_zero() {
            return Mat::zeros(self.rows, self.cols);
        }
        Mat { rows: self.rows, cols: self.cols, data: self.data.iter().map(|x| x * s).collect() }
    }

    /// `self += s * other`.
    pub fn axpy(&mut self, s: &Q, other: &Mat) {
        debug_assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        if s.is_zero() {
            return;
        }
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            if !b.is_zero() {
                *a += &(s * b);
            }
        }
    }

    pub fn commutator(&self, other: &Mat) -> Mat {
        &(self * other) - &(other * self)
    }

    /// `self^e` for `e >= 0`.
    pub fn pow(&self, e: u32) -> Mat {
        let mut acc = Mat::identity(self.rows);
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    /// Frobenius-style trace pairing `tr(self * other)`.
    pub fn trace_pair(&self, other: &Mat) -> Q {
        let mut t = Q::zero();
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                let b = &other[(k, i)];
                if !b.is_zero() {
                    t += &(a * b);
                }
            }
        }
        t
    }

    /// Exact rank.
    pub fn rank(&self) -> usize {
        let rows: Vec<Vec<Q>> = (0..self.rows).map(|r| self.row(r)).collect();
        Rref::new(rows, self.cols).rank()
    }

    pub fn row(&self, r: usize) -> Vec<Q> {
        self.data[r * self.cols..(r + 1) * self.cols].to_vec()
    }

    /// Exact inverse, `None` when singular.
    pub fn inverse(&self) -> Option<Mat> {
        assert!(self.is_square());
        let n = self.rows;
        let rows: Vec<Vec<Q>> = (0..n)
            .map(|r| {
                let mut row = self.row(r);
                row.extend((0..n).map(|c| if c == r { Q::one() } else { Q::zero() }));
                row
            })
            .collect();
        let rr = Rref::new(rows, 2 * n);
        if rr.pivots.iter().take_while(|&&p| p < n).count() != n {
            return None;
        }
        Some(Mat::from_fn(n, n, |r, c| rr.rows[r][n + c].clone()))
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.data.iter().map(Q::to_f64).collect()
    }

    pub fn map(&self, f: impl Fn(&Q) -> Q) -> Mat {
        Mat { rows: self.rows, cols: self.cols, data: self.data.iter().map(f).collect() }
    }
}

impl<'a> Add<&'a Mat> for &'a Mat {
    type Output = Mat;
    fn add(self, rhs: &'a Mat) -> Mat {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl<'a> Sub<&'a Mat> for &'a Mat {
    type Output = Mat;
    fn sub(self, rhs: &'a Mat) -> Mat {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Neg for &Mat {
    type Output = Mat;
    fn neg(self) -> Mat {
        self.map(|x| -x)
    }
}

impl<'a> Mul<&'a Mat> for &'a Mat {
    type Output = Mat;
    fn mul(self, rhs: &'a Mat) -> Mat {
        assert_eq!(self.cols, rhs.rows, "shape mismatch");
        let mut out = Mat::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let b = &rhs[(k, j)];
                    if !b.is_zero() {
                        let prod = a * b;
                        out[(i, j)] += &prod;
                    }
                }
            }
        }
        out
    }
}

/// Reduced row echelon form of a dense system.
#[derive(Clone, Debug)]
pub struct Rref {
    pub rows: Vec<Vec<Q>>,
    pub cols: usize,
    /// Pivot column of each nonzero row, increasing.
    pub pivots: Vec<usize>,
}

impl Rref {
    /// Gauss-Jordan elimination; zero rows are dropped.
    pub fn new(mut rows: Vec<Vec<Q>>, cols: usize) -> Self {
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..cols {
            if r == rows.len() {
                break;
            }
            let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else {
                continue;
            };
            rows.swap(r, p);
            let inv = rows[r][c].recip();
            if !inv.is_one() {
                for x in rows[r][c..].iter_mut() {
                    if !x.is_zero() {
                        *x = &*x * &inv;
                    }
                }
            }
            let pivot_row = rows[r].clone();
            let nz: Vec<usize> = (c..cols).filter(|&j| !pivot_row[j].is_zero()).collect();
            for (i, row) in rows.iter_mut().enumerate() {
                if i == r || row[c].is_zero() {
                    continue;
                }
                let f = row[c].clone();
                for &j in &nz {
                    let d = &f * &pivot_row[j];
                    row[j] -= &d;
                }
            }
            pivots.push(c);
            r += 1;
        }
        rows.truncate(r);
        Rref { rows, cols, pivots }
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    /// Basis of the right nullspace, one vector per free column.
    pub fn nullspace(&self) -> Vec<Vec<Q>> {
        let mut is_pivot = vec![false; self.cols];
        for &p in &self.pivots {
            is_pivot[p] = true;
        }
        let mut out = Vec::new();
        for free in (0..self.cols).filter(|&c| !is_pivot[c]) {
            let mut v = vec![Q::zero(); self.cols];
            v[free] = Q::one();
            for (row, &p) in self.rows.iter().zip(&self.pivots) {
                if !row[free].is_zero() {
                    v[p] = -&row[free];
                }
            }
            out.push(v);
        }
        out
    }
}

/// Basis of `{x : A x = 0}` for `A` given by rows over `cols` unknowns.
pub fn nullspace(rows: Vec<Vec<Q>>, cols: usize) -> Vec<Vec<Q>> {
    Rref::new(rows, cols).nullspace()
}

/// One solution of `A x = b` (free variables set to zero), `None` if inconsistent.
pub fn solve(rows: &[Vec<Q>], b: &[Q], cols: usize) -> Option<Vec<Q>> {
    let aug: Vec<Vec<Q>> = rows
        .iter()
        .zip(b)
        .map(|(r, bi)| {
            let mut r = r.clone();
            r.push(bi.clone());
            r
        })
        .collect();
    let rr = Rref::new(aug, cols + 1);
    if rr.pivots.last() == Some(&cols) {
        return None;
    }
    let mut x = vec![Q::zero(); cols];
    for (row, &p) in rr.rows.iter().zip(&rr.pivots) {
        x[p] = row[cols].clone();
    }
    Some(x)
}

/// Linear span membership and coordinates with respect to a fixed list of
/// vectors, via a precomputed pivot-row inverse.
#[derive(Clone, Debug)]
pub struct Coordinates {
    dim: usize,
    len: usize,
    pivot_rows: Vec<usize>,
    inv: Mat,
    basis: Vec<Vec<Q>>,
}

impl Coordinates {
    /// `vectors` must be linearly independent; returns `None` otherwise.
    pub fn new(vectors: &[Vec<Q>]) -> Option<Self> {
        let dim = vectors.len();
        let len = vectors.first().map_or(0, Vec::len);
        // Columns are the vectors; select `dim` independent rows.
        let transposed: Vec<Vec<Q>> =
            (0..len).map(|r| vectors.iter().map(|v| v[r].clone()).collect()).collect();
        let mut chosen = Vec::new();
        let mut acc: Vec<Vec<Q>> = Vec::new();
        for (r, row) in transposed.iter().enumerate() {
            let mut trial = acc.clone();
            trial.push(row.clone());
            if Rref::new(trial.clone(), dim).rank() > acc.len() {
                acc = trial;
                chosen.push(r);
                if chosen.len() == dim {
                    break;
                }
            }
        }
        if chosen.len() != dim {
            return None;
        }
        let sub = Mat::from_fn(dim, dim, |i, j| transposed[chosen[i]][j].clone());
        let inv = sub.inverse()?;
        Some(Coordinates { dim, len, pivot_rows: chosen, inv, basis: vectors.to_vec() })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Coordinates of `v` assuming it lies in the span.
    pub fn coords_unchecked(&self, v: &[Q]) -> Vec<Q> {
        debug_assert_eq!(v.len(), self.len);
        let mut out = vec![Q::zero(); self.dim];
        for (j, &r) in self.pivot_rows.iter().enumerate() {
            let x = &v[r];
            if x.is_zero() {
                continue;
            }
            for (i, o) in out.iter_mut().enumerate() {
                let a = &self.inv[(i, j)];
                if !a.is_zero() {
                    *o += &(a * x);
                }
            }
        }
        out
    }

    /// Coordinates of `v`, or `None` when `v` is outside the span.
    pub fn coords(&self, v: &[Q]) -> Option<Vec<Q>> {
        let c = self.coords_unchecked(v);
        let back = self.combine(&c);
        (back.as_slice() == v).then_some(c)
    }

    pub fn combine(&self, c: &[Q]) -> Vec<Q> {
        let mut out = vec![Q::zero(); self.len];
        for (ci, b) in c.iter().zip(&self.basis) {
            if ci.is_zero() {
                continue;
            }
            for (o, x) in out.iter_mut().zip(b) {
                if !x.is_zero() {
                    *o += &(ci * x);
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overflow_promotes_and_demotes() {
        let big = Q::int(i64::MAX);
        let sq = &big * &big;
        let sq2 = &sq * &big;
        assert!(matches!(sq2, Q::Big(_)));
        let back = &sq2 / &sq;
        assert!(matches!(back, Q::Small(_)));
        assert_eq!(back, big);
    }

    #[test]
    fn inverse_round_trip() {
        let m = Mat::from_i64(3, 3, &[2, 1, 0, 1, 3, 1, 0, 1, 4]);
        let inv = m.inverse().unwrap();
        assert_eq!(&m * &inv, Mat::identity(3));
        assert!(Mat::from_i64(2, 2, &[1, 2, 2, 4]).inverse().is_none());
    }

    #[test]
    fn nullspace_of_rank_one() {
        let rows = vec![vec![Q::int(1), Q::int(2), Q::int(3)]];
        let ns = nullspace(rows, 3);
        assert_eq!(ns.len(), 2);
        for v in ns {
            assert!((&v[0] + &(Q::int(2) * &v[1]) + Q::int(3) * &v[2]).is_zero());
        }
    }

    #[test]
    fn binomials() {
        assert_eq!(binom(5, 2), Q::int(10));
        assert_eq!(binom(-2, 3), Q::int(-4));
        assert_eq!(binom(3, 0), Q::one());
    }

    #[test]
    fn coordinates_detect_outside_span() {
        let vs = vec![vec![Q::int(1), Q::int(0), Q::int(1)], vec![Q::int(0), Q::int(1), Q::int(1)]];
        let c = Coordinates::new(&vs).unwrap();
        assert_eq!(c.coords(&[Q::int(2), Q::int(3), Q::int(5)]), Some(vec![Q::int(2), Q::int(3)]));
        assert_eq!(c.coords(&[Q::int(2), Q::int(3), Q::int(4)]), None);
    }
}
