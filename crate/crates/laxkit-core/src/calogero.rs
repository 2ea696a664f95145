//! Elliptic Calogero–Moser systems for the root systems `A_n`, `B_n`, `C_n`, `D_n`.
//!
//! Lax matrices are products of `σ`-ratios, so their `q`-derivatives are the
//! same ratios times sums of `ζ` values; this gives analytic gradients of the
//! residue Hamiltonians `res_{z=0} z^{−m} tr L(z)^p`.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;

use nalgebra::DMatrix;
#[allow(unused_imports)]
use num_traits::Float;

use crate::elliptic::{Lattice, C};
use crate::Error;

const ZERO: C = C::new(0.0, 0.0);
const ONE: C = C::new(1.0, 0.0);

/// Root system of a Calogero–Moser system.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CmFamily {
    A,
    B,
    C,
    D,
}

impl fmt::Display for CmFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            CmFamily::A => "A",
            CmFamily::B => "B",
            CmFamily::C => "C",
            CmFamily::D => "D",
        };
        f.write_str(s)
    }
}

impl core::str::FromStr for CmFamily {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        match s.trim() {
            "A" | "a" => Ok(CmFamily::A),
            "B" | "b" => Ok(CmFamily::B),
            "C" | "c" => Ok(CmFamily::C),
            "D" | "d" => Ok(CmFamily::D),
            _ => Err(Error::InvalidArgument("family must be one of A, B, C, D")),
        }
    }
}

/// Coupling constants of the Lax matrix.
///
/// `f` couples the `A` block; `fb` is used above (and on) the diagonal of
/// the `B` block, `fc` below (and on) the diagonal of the `C` block; `fa`,
/// `fbv` are the column couplings of the `B_n` family.
#[derive(Clone, Debug, PartialEq)]
pub struct Couplings {
    pub f: Vec<Vec<C>>,
    pub fb: Vec<Vec<C>>,
    pub fc: Vec<Vec<C>>,
    pub fa: Vec<C>,
    pub fbv: Vec<C>,
}

impl Couplings {
    /// Defaults: `f_ij = 1`, `f^B = 1`, `f^C = −1`, diagonal `f^B_ii = 1`,
    /// `f^C_ii = −2`, `f^a = f^b = 1`.
    pub fn standard(n: usize) -> Self {
        let mut fc = vec![vec![C::new(-1.0, 0.0); n]; n];
        for (i, row) in fc.iter_mut().enumerate() {
            row[i] = C::new(-2.0, 0.0);
        }
        Couplings {
            f: vec![vec![ONE; n]; n],
            fb: vec![vec![ONE; n]; n],
            fc,
            fa: vec![ONE; n],
            fbv: vec![ONE; n],
        }
    }

    /// Multiplies every off-diagonal coupling by `g` (products scale by `g²`).
    pub fn scaled(&self, g: C) -> Self {
        let s = |m: &Vec<Vec<C>>| m.iter().map(|r| r.iter().map(|x| x * g).collect()).collect();
        Couplings {
            f: s(&self.f),
            fb: s(&self.fb),
            fc: s(&self.fc),
            fa: self.fa.iter().map(|x| x * g).collect(),
            fbv: self.fbv.iter().map(|x| x * g).collect(),
        }
    }

    /// `c_ij = f_ij f_ji`.
    pub fn c(&self, i: usize, j: usize) -> C {
        self.f[i][j] * self.f[j][i]
    }
    /// `e_ij = f^B_ij f^C_ji` for `i < j`.
    pub fn e(&self, i: usize, j: usize) -> C {
        self.fb[i][j] * self.fc[j][i]
    }
    /// `t_i = f^B_ii f^C_ii`.
    pub fn t(&self, i: usize) -> C {
        self.fb[i][i] * self.fc[i][i]
    }
    /// `u_i = f^a_i f^b_i`.
    pub fn u(&self, i: usize) -> C {
        self.fa[i] * self.fbv[i]
    }
}

/// Positions and momenta.
#[derive(Clone, Debug, PartialEq)]
pub struct CMState {
    pub q: Vec<C>,
    pub p: Vec<C>,
}

impl CMState {
    pub fn real(q: &[f64], p: &[f64]) -> Self {
        CMState { q: q.iter().map(|&x| C::new(x, 0.0)).collect(), p: p.iter().map(|&x| C::new(x, 0.0)).collect() }
    }
}

/// A sampled Lax matrix.
#[derive(Clone, Debug)]
pub struct LaxSample {
    pub z: C,
    pub matrix: DMatrix<C>,
}

/// An elliptic Calogero–Moser system.
#[derive(Clone, Debug)]
pub struct CMSystem {
    pub family: CmFamily,
    pub n: usize,
    pub lattice: Lattice,
    pub couplings: Couplings,
    /// Fixed point of the `B_n` family.
    pub q0: C,
    /// Negate `H` to the positive-kinetic convention.
    pub physical_sign: bool,
    /// Minimum distance of collision arguments to the lattice.
    pub collision_guard: f64,
    /// Trapezoid nodes for contour residues.
    pub quadrature_nodes: usize,
}

/// `Σ_k c_k q_k + c_z z + c_0 q_0`.
#[derive(Clone, Copy, Debug)]
struct Arg {
    z: f64,
    q0: f64,
    /// Up to two `(index, coefficient)` terms.
    q: [(usize, f64); 2],
}

impl Arg {
    fn new(z: f64, q: &[(usize, f64)], q0: f64) -> Self {
        let mut a = Arg { z, q0, q: [(0, 0.0); 2] };
        for (slot, t) in a.q.iter_mut().zip(q) {
            *slot = *t;
        }
        a
    }
    fn eval(&self, z: C, qs: &[C], q0: C) -> C {
        let mut v = z * self.z + q0 * self.q0;
        for &(i, c) in &self.q {
            if c != 0.0 {
                v += qs[i] * c;
            }
        }
        v
    }
}

/// `coupling · Π σ(arg)^{±1}`.
#[derive(Clone, Debug)]
struct Entry {
    row: usize,
    col: usize,
    coupling: C,
    num: Vec<Arg>,
    den: Vec<Arg>,
}

/// Which entry of `L` carries `p_k`, with sign.
fn momentum_slots(family: CmFamily, n: usize) -> Vec<Vec<(usize, f64)>> {
    (0..n)
        .map(|k| match family {
            CmFamily::A => vec![(k, 1.0)],
            CmFamily::C | CmFamily::D => vec![(k, 1.0), (n + k, -1.0)],
            CmFamily::B => vec![(k, 1.0), (n + 1 + k, -1.0)],
        })
        .collect()
}

impl CMSystem {
    /// System with the default couplings on the default lattice.
    pub fn new(family: CmFamily, n: usize) -> Result<Self, Error> {
        Self::with_lattice(family, n, Lattice::default())
    }

    pub fn with_lattice(family: CmFamily, n: usize, lattice: Lattice) -> Result<Self, Error> {
        if n == 0 {
            return Err(Error::InvalidArgument("n must be positive"));
        }
        let guard = 1e-3 * lattice.omega1().norm();
        let q0 = lattice.omega1() * C::new(0.37, 0.0) + lattice.omega2() * C::new(0.61, 0.0);
        Ok(CMSystem {
            family,
            n,
            lattice,
            couplings: Couplings::standard(n),
            q0,
            physical_sign: false,
            collision_guard: guard,
            quadrature_nodes: 64,
        })
    }

    /// The repulsive real system: couplings scaled by `i`, positive kinetic term.
    pub fn physical(family: CmFamily, n: usize) -> Result<Self, Error> {
        Self::physical_on(family, n, Lattice::default())
    }

    pub fn physical_on(family: CmFamily, n: usize, lattice: Lattice) -> Result<Self, Error> {
        let mut s = Self::with_lattice(family, n, lattice)?;
        s.couplings = s.couplings.scaled(C::new(0.0, 1.0));
        s.physical_sign = true;
        Ok(s)
    }

    /// Size of the Lax matrix.
    pub fn dim(&self) -> usize {
        match self.family {
            CmFamily::A => self.n,
            CmFamily::C | CmFamily::D => 2 * self.n,
            CmFamily::B => 2 * self.n + 1,
        }
    }

    fn sign(&self) -> f64 {
        if self.physical_sign {
            -1.0
        } else {
            1.0
        }
    }

    fn entries(&self) -> Vec<Entry> {
        let n = self.n;
        let cp = &self.couplings;
        let a = Arg::new;
        let mut out = Vec::new();
        // A block: f_ij σ(z+q_j−q_i)σ(z−q_j)σ(q_i) / (σ(z)σ(z−q_i)σ(q_i−q_j)σ(q_j)).
        let a_block = |i: usize, j: usize, coupling: C, row: usize, col: usize, neg: bool| Entry {
            row,
            col,
            coupling: if neg { -coupling } else { coupling },
            num: vec![a(1.0, &[(j, 1.0), (i, -1.0)], 0.0), a(1.0, &[(j, -1.0)], 0.0), a(0.0, &[(i, 1.0)], 0.0)],
            den: vec![a(1.0, &[], 0.0), a(1.0, &[(i, -1.0)], 0.0), a(0.0, &[(i, 1.0), (j, -1.0)], 0.0), a(0.0, &[(j, 1.0)], 0.0)],
        };
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    out.push(a_block(i, j, cp.f[i][j], i, j, false));
                    if self.family != CmFamily::A {
                        // −A^t block.
                        let off = if self.family == CmFamily::B { n + 1 } else { n };
                        out.push(a_block(i, j, cp.f[i][j], off + j, off + i, true));
                    }
                }
            }
        }
        if self.family == CmFamily::A {
            return out;
        }
        let boff = if self.family == CmFamily::B { n + 1 } else { n };
        let symmetric = self.family == CmFamily::C;
        // B_ji (j < i or j = i for C): σ(z−q_j−q_i)σ(z+q_i) / (σ(z)σ(z−q_j)σ(q_i+q_j)).
        let b_entry = |j: usize, i: usize, coupling: C| -> (Vec<Arg>, Vec<Arg>, C) {
            let pair = if i == j { vec![(i, 2.0)] } else { vec![(j, 1.0), (i, 1.0)] };
            let neg: Vec<(usize, f64)> = pair.iter().map(|&(k, c)| (k, -c)).collect();
            (
                vec![a(1.0, &neg, 0.0), a(1.0, &[(i, 1.0)], 0.0)],
                vec![a(1.0, &[], 0.0), a(1.0, &[(j, -1.0)], 0.0), a(0.0, &pair, 0.0)],
                coupling,
            )
        };
        // C_ij: σ(z+q_j+q_i)σ(z−q_j) / (σ(z)σ(z+q_i)σ(q_i+q_j)).
        let c_entry = |i: usize, j: usize, coupling: C| -> (Vec<Arg>, Vec<Arg>, C) {
            let pair = if i == j { vec![(i, 2.0)] } else { vec![(j, 1.0), (i, 1.0)] };
            (
                vec![a(1.0, &pair, 0.0), a(1.0, &[(j, -1.0)], 0.0)],
                vec![a(1.0, &[], 0.0), a(1.0, &[(i, 1.0)], 0.0), a(0.0, &pair, 0.0)],
                coupling,
            )
        };
        let cstart = if self.family == CmFamily::B { n + 1 } else { n };
        for i in 0..n {
            for j in 0..=i {
                if j == i && !symmetric {
                    continue;
                }
                let (num, den, cpl) = b_entry(j, i, cp.fb[j][i]);
                out.push(Entry { row: j, col: boff + i, coupling: cpl, num: num.clone(), den: den.clone() });
                if i != j {
                    let s = if symmetric { cpl } else { -cpl };
                    out.push(Entry { row: i, col: boff + j, coupling: s, num, den });
                }
                let (num, den, cpl) = c_entry(i, j, cp.fc[i][j]);
                out.push(Entry { row: cstart + i, col: j, coupling: cpl, num: num.clone(), den: den.clone() });
                if i != j {
                    let s = if symmetric { cpl } else { -cpl };
                    out.push(Entry { row: cstart + j, col: i, coupling: s, num, den });
                }
            }
        }
        if self.family == CmFamily::B {
            for i in 0..n {
                // a_i = f^a_i σ(z−q0−q_i)σ(z) / (σ(z−q0)σ(z−q_i)σ(q_i)).
                let anum = vec![a(1.0, &[(i, -1.0)], -1.0), a(1.0, &[], 0.0)];
                let aden = vec![a(1.0, &[], -1.0), a(1.0, &[(i, -1.0)], 0.0), a(0.0, &[(i, 1.0)], 0.0)];
                // b_i = f^b_i σ(z−q0+q_i)σ(z−q_i) / (σ(z)σ(z−q0)σ(q_i)).
                let bnum = vec![a(1.0, &[(i, 1.0)], -1.0), a(1.0, &[(i, -1.0)], 0.0)];
                let bden = vec![a(1.0, &[], 0.0), a(1.0, &[], -1.0), a(0.0, &[(i, 1.0)], 0.0)];
                let (fa, fb) = (cp.fa[i], cp.fbv[i]);
                out.push(Entry { row: i, col: n, coupling: fa, num: anum.clone(), den: aden.clone() });
                out.push(Entry { row: n, col: n + 1 + i, coupling: -fa, num: anum, den: aden });
                out.push(Entry { row: n + 1 + i, col: n, coupling: fb, num: bnum.clone(), den: bden.clone() });
                out.push(Entry { row: n, col: i, coupling: -fb, num: bnum, den: bden });
            }
        }
        out
    }

    /// Rejects states where the potential is singular.
    pub fn check_state(&self, s: &CMState) -> Result<(), Error> {
        if s.q.len() != self.n || s.p.len() != self.n {
            return Err(Error::InvalidArgument("state has the wrong size"));
        }
        let close = |w: C| self.lattice.lattice_distance(w) < self.collision_guard;
        for i in 0..self.n {
            for j in 0..i {
                if close(s.q[i] - s.q[j]) {
                    return Err(Error::Collision("q_i = q_j"));
                }
                if self.family != CmFamily::A && close(s.q[i] + s.q[j]) {
                    return Err(Error::Collision("q_i = −q_j"));
                }
            }
            if self.family == CmFamily::C && close(s.q[i] * 2.0) {
                return Err(Error::Collision("2q_i on the lattice"));
            }
            if self.family == CmFamily::B && close(s.q[i]) {
                return Err(Error::Collision("q_i on the lattice"));
            }
        }
        Ok(())
    }

    /// Lattice distance from `s` to the nearest singular configuration of the potential.
    pub fn singular_distance(&self, s: &CMState) -> f64 {
        let d = |w: C| self.lattice.lattice_distance(w);
        let mut best = f64::INFINITY;
        for i in 0..self.n {
            for j in 0..i {
                best = best.min(d(s.q[i] - s.q[j]));
                if self.family != CmFamily::A {
                    best = best.min(d(s.q[i] + s.q[j]));
                }
            }
            match self.family {
                CmFamily::C => best = best.min(d(s.q[i] * 2.0)),
                CmFamily::B => best = best.min(d(s.q[i])),
                _ => {}
            }
        }
        best
    }

    /// Rejects states where the Lax matrix itself is singular: besides the
    /// potential singularities, `q_i` on the lattice and (`B_n`) `q_i = ±q_0`.
    /// The latter are singularities of the gauge only, so they get a much
    /// tighter guard than collisions.
    pub fn check_lax_state(&self, s: &CMState) -> Result<(), Error> {
        self.check_state(s)?;
        let close = |w: C| self.lattice.lattice_distance(w) < self.collision_guard * 1e-6;
        if self.family == CmFamily::B && self.lattice.lattice_distance(self.q0) < self.collision_guard {
            return Err(Error::Collision("q_0 on the lattice"));
        }
        if s.q.iter().any(|&q| close(q)) {
            return Err(Error::Collision("q_i on the lattice"));
        }
        if self.family == CmFamily::B && s.q.iter().any(|&q| close(q - self.q0) || close(q + self.q0)) {
            return Err(Error::Collision("q_i = ±q_0"));
        }
        Ok(())
    }

    /// Poles of `L(z)` in `z` other than `0`.
    pub fn pole_set(&self, s: &CMState) -> Vec<C> {
        let mut v: Vec<C> = s.q.clone();
        if self.family != CmFamily::A {
            v.extend(s.q.iter().map(|x| -x));
        }
        if self.family == CmFamily::B {
            v.push(self.q0);
        }
        v
    }

    fn check_z(&self, s: &CMState, z: C) -> Result<(), Error> {
        let lat = &self.lattice;
        let guard = lat.pole_guard();
        if lat.lattice_distance(z) < guard || self.pole_set(s).iter().any(|&w| lat.lattice_distance(z - w) < guard) {
            return Err(Error::PoleProximity { re: z.re, im: z.im });
        }
        Ok(())
    }

    fn eval_entries(&self, s: &CMState, z: C, grad: bool) -> Result<(DMatrix<C>, Vec<DMatrix<C>>), Error> {
        let d = self.dim();
        let n = self.n;
        let mut l = DMatrix::from_element(d, d, ZERO);
        let mut g = if grad { vec![DMatrix::from_element(d, d, ZERO); n] } else { Vec::new() };
        for (k, slots) in momentum_slots(self.family, n).into_iter().enumerate() {
            for (idx, sg) in slots {
                l[(idx, idx)] = s.p[k] * sg;
            }
        }
        let lat = &self.lattice;
        // collisions and z-poles are screened by the callers; what is left near
        // the lattice is a gauge argument, whose guard is tighter
        let gauge = lat.clone().with_pole_guard(self.collision_guard * 1e-6);
        for e in self.entries() {
            let mut val = e.coupling;
            let mut dq = vec![ZERO; if grad { n } else { 0 }];
            for (args, pw) in [(&e.num, 1.0), (&e.den, -1.0)] {
                for arg in args {
                    let w = arg.eval(z, &s.q, self.q0);
                    let sv = lat.sigma(w)?;
                    if pw > 0.0 {
                        val *= sv;
                    } else {
                        val /= sv;
                    }
                    if grad {
                        let zt = gauge.zeta(w)?;
                        for &(i, c) in &arg.q {
                            if c != 0.0 {
                                dq[i] += zt * (c * pw);
                            }
                        }
                    }
                }
            }
            l[(e.row, e.col)] = val;
            for (k, dk) in dq.iter().enumerate() {
                g[k][(e.row, e.col)] = val * dk;
            }
        }
        Ok((l, g))
    }

    /// `L(z)`.
    pub fn lax_matrix(&self, s: &CMState, z: C) -> Result<LaxSample, Error> {
        self.check_lax_state(s)?;
        self.check_z(s, z)?;
        Ok(LaxSample { z, matrix: self.eval_entries(s, z, false)?.0 })
    }

    /// `L(z)` and `∂L/∂q_k` for each `k`.
    pub fn lax_with_q_gradient(&self, s: &CMState, z: C) -> Result<(DMatrix<C>, Vec<DMatrix<C>>), Error> {
        self.check_lax_state(s)?;
        self.check_z(s, z)?;
        self.eval_entries(s, z, true)
    }

    /// `∂L/∂p_k` (a constant diagonal matrix).
    pub fn lax_p_gradient(&self, k: usize) -> DMatrix<C> {
        let d = self.dim();
        let mut m = DMatrix::from_element(d, d, ZERO);
        for (idx, sg) in &momentum_slots(self.family, self.n)[k] {
            m[(*idx, *idx)] = C::new(*sg, 0.0);
        }
        m
    }

    /// The invariant form `σ` of the Lax matrices (`X^tσ + σX = 0`).
    pub fn invariant_form(&self) -> DMatrix<C> {
        let d = self.dim();
        let n = self.n;
        let mut m = DMatrix::from_element(d, d, ZERO);
        match self.family {
            CmFamily::A => {}
            CmFamily::D => {
                for i in 0..n {
                    m[(i, n + i)] = ONE;
                    m[(n + i, i)] = ONE;
                }
            }
            CmFamily::C => {
                for i in 0..n {
                    m[(i, n + i)] = ONE;
                    m[(n + i, i)] = -ONE;
                }
            }
            CmFamily::B => {
                m[(n, n)] = ONE;
                for i in 0..n {
                    m[(i, n + 1 + i)] = ONE;
                    m[(n + 1 + i, i)] = ONE;
                }
            }
        }
        m
    }

    fn kinetic_factor(&self) -> f64 {
        if self.family == CmFamily::A {
            0.5
        } else {
            1.0
        }
    }

    /// Potential terms `(weight, argument coefficients)` with `V = Σ w ℘(arg)`.
    fn potential_terms(&self) -> Vec<(C, Vec<(usize, f64)>)> {
        let n = self.n;
        let cp = &self.couplings;
        let mut v = Vec::new();
        let pair = if self.family == CmFamily::A { 1.0 } else { 2.0 };
        for i in 0..n {
            for j in i + 1..n {
                v.push((cp.c(i, j) * pair, vec![(i, 1.0), (j, -1.0)]));
                if self.family != CmFamily::A {
                    v.push((-cp.e(i, j) * 2.0, vec![(i, 1.0), (j, 1.0)]));
                }
            }
            match self.family {
                CmFamily::C => v.push((-cp.t(i), vec![(i, 2.0)])),
                CmFamily::B => v.push((cp.u(i) * 2.0, vec![(i, 1.0)])),
                _ => {}
            }
        }
        v
    }

    /// Closed-form second-order Hamiltonian (negative kinetic term unless `physical_sign`).
    pub fn hamiltonian(&self, s: &CMState) -> Result<C, Error> {
        self.check_state(s)?;
        let kin: C = s.p.iter().map(|p| p * p).sum::<C>() * -self.kinetic_factor();
        let mut h = kin;
        for (w, arg) in self.potential_terms() {
            let x: C = arg.iter().map(|&(i, c)| s.q[i] * c).sum();
            h += w * self.lattice.wp(x)?;
        }
        Ok(h * self.sign())
    }

    /// `(∂H/∂q, ∂H/∂p)` of the closed-form Hamiltonian.
    pub fn hamiltonian_gradient(&self, s: &CMState) -> Result<(Vec<C>, Vec<C>), Error> {
        self.check_state(s)?;
        let sg = self.sign();
        let dp: Vec<C> = s.p.iter().map(|p| p * (-2.0 * self.kinetic_factor() * sg)).collect();
        let mut dq = vec![ZERO; self.n];
        for (w, arg) in self.potential_terms() {
            let x: C = arg.iter().map(|&(i, c)| s.q[i] * c).sum();
            let d = w * self.lattice.wp_prime(x)? * sg;
            for &(i, c) in &arg {
                dq[i] += d * c;
            }
        }
        Ok((dq, dp))
    }

    /// Hamilton's equations `(q̇, ṗ) = (∂H/∂p, −∂H/∂q)`.
    pub fn equations_of_motion(&self, s: &CMState) -> Result<(Vec<C>, Vec<C>), Error> {
        let (dq, dp) = self.hamiltonian_gradient(s)?;
        Ok((dp, dq.into_iter().map(|x| -x).collect()))
    }

    /// Constant dropped from the `B_n` closed form: the residue route equals
    /// the closed form plus this value (`−2 Σ u_i ℘(q_0)`, sign-adjusted).
    pub fn dropped_constant(&self) -> Result<C, Error> {
        if self.family != CmFamily::B {
            return Ok(ZERO);
        }
        let u: C = (0..self.n).map(|i| self.couplings.u(i)).sum();
        Ok(u * self.lattice.wp(self.q0)? * -2.0 * self.sign())
    }

    /// Contour radius around `centre`: a third of the distance to the nearest other pole.
    pub fn contour_radius(&self, s: &CMState, centre: C) -> Result<f64, Error> {
        let lat = &self.lattice;
        let mut poles = self.pole_set(s);
        poles.push(ZERO);
        let mut dist = lat.min_period();
        for w in poles {
            let d = lat.lattice_distance(w - centre);
            if d > 1e-12 {
                dist = dist.min(d);
            }
        }
        let r = dist / 3.0;
        if r < 1e-6 {
            return Err(Error::PoleProximity { re: centre.re, im: centre.im });
        }
        Ok(r)
    }

    /// Contour radius for residues of gauge-invariant traces at a lattice point.
    /// `tr L(z)^p` has no poles off the lattice (and `±q_0` for `B_n`), so the
    /// circle only has to keep clear of the gauge poles `±q_i` of the entries;
    /// the widest gap is taken.
    fn trace_contour_radius(&self, s: &CMState, centre: C) -> Result<f64, Error> {
        let lat = &self.lattice;
        if lat.lattice_distance(centre) > 1e-12 {
            return self.contour_radius(s, centre);
        }
        let poles = self.pole_set(s);
        let mut reach = lat.min_period();
        if self.family == CmFamily::B {
            reach = reach.min(lat.lattice_distance(self.q0 - centre));
        }
        let gap = |r: f64| {
            poles.iter().map(|&w| (lat.lattice_distance(w - centre) - r).abs()).fold(f64::INFINITY, f64::min)
        };
        let best = (0..=20)
            .map(|k| reach * (0.12 + 0.01 * k as f64))
            .max_by(|a, b| gap(*a).total_cmp(&gap(*b)))
            .unwrap_or(reach / 4.0);
        Ok(best)
    }

    fn nodes(&self, r: f64) -> Vec<C> {
        let n = self.quadrature_nodes;
        (0..n).map(|k| C::from_polar(r, 2.0 * PI * k as f64 / n as f64)).collect()
    }

    /// `res_{z=P} (z−P)^{−m} F(z) dz` by the trapezoid rule on a circle.
    pub fn contour_residue(
        &self,
        s: &CMState,
        centre: C,
        m: i64,
        mut f: impl FnMut(C) -> Result<C, Error>,
    ) -> Result<C, Error> {
        let r = self.contour_radius(s, centre)?;
        let nodes = self.nodes(r);
        let mut acc = ZERO;
        for w in &nodes {
            acc += f(centre + w)? * w.powi((1 - m) as i32);
        }
        Ok(acc / nodes.len() as f64)
    }

    /// Matrix-valued residue `res_{z=P} L(z) dz`.
    pub fn matrix_residue(&self, s: &CMState, centre: C) -> Result<DMatrix<C>, Error> {
        let r = self.contour_radius(s, centre)?;
        let nodes = self.nodes(r);
        let d = self.dim();
        let mut acc = DMatrix::from_element(d, d, ZERO);
        for w in &nodes {
            let l = self.eval_entries(s, centre + w, false)?.0;
            acc += l * *w;
        }
        Ok(acc / C::new(nodes.len() as f64, 0.0))
    }

    fn check_power(&self, p: u32) -> Result<(), Error> {
        if p == 0 {
            return Err(Error::InvalidArgument("power must be positive"));
        }
        if self.family != CmFamily::A && p % 2 == 1 {
            return Err(Error::InvalidArgument("odd powers vanish identically for B/C/D"));
        }
        Ok(())
    }

    /// `H_{p,m} = res_{z=P} z^{−m} tr L(z)^p dz`, `P = 0` by default.
    pub fn residue_hamiltonian(&self, s: &CMState, centre: C, m: i64, p: u32) -> Result<C, Error> {
        self.check_lax_state(s)?;
        self.check_power(p)?;
        let nodes = self.nodes(self.trace_contour_radius(s, centre)?);
        let mut acc = ZERO;
        for w in &nodes {
            acc += trace_power(&self.eval_entries(s, centre + w, false)?.0, p) * w.powi((1 - m) as i32);
        }
        Ok(acc / nodes.len() as f64)
    }

    /// `(∂H_{p,m}/∂q, ∂H_{p,m}/∂p)` with `∂ tr L^p = p tr(L^{p−1} ∂L)` under the contour integral.
    pub fn residue_hamiltonian_gradient(&self, s: &CMState, centre: C, m: i64, p: u32) -> Result<(Vec<C>, Vec<C>), Error> {
        self.check_lax_state(s)?;
        self.check_power(p)?;
        let nodes = self.nodes(self.trace_contour_radius(s, centre)?);
        let n = self.n;
        let mut gq = vec![ZERO; n];
        let mut gp = vec![ZERO; n];
        let dps: Vec<DMatrix<C>> = (0..n).map(|k| self.lax_p_gradient(k)).collect();
        for w in &nodes {
            let (l, dl) = self.eval_entries(s, centre + w, true)?;
            let lp = matrix_power(&l, p - 1);
            let weight = w.powi((1 - m) as i32) * p as f64;
            for k in 0..n {
                gq[k] += trace_product(&lp, &dl[k]) * weight;
                gp[k] += trace_product(&lp, &dps[k]) * weight;
            }
        }
        let inv = C::new(1.0 / nodes.len() as f64, 0.0);
        Ok((gq.into_iter().map(|x| x * inv).collect(), gp.into_iter().map(|x| x * inv).collect()))
    }

    /// `[tr L(z)^p, p = 1..pmax]`.
    pub fn spectral_invariants(&self, s: &CMState, z: C, pmax: u32) -> Result<Vec<C>, Error> {
        let l = self.lax_matrix(s, z)?.matrix;
        let mut acc = l.clone();
        let mut out = Vec::new();
        for _ in 0..pmax {
            out.push(acc.trace());
            acc = &acc * &l;
        }
        Ok(out)
    }

    /// Eigenvalues of `L(z)`.
    pub fn eigenvalues(&self, s: &CMState, z: C) -> Result<Vec<C>, Error> {
        eigenvalues(&self.lax_matrix(s, z)?.matrix)
    }
}

impl Lattice {
    /// Length of the shortest nonzero period.
    pub fn min_period(&self) -> f64 {
        let (a, b) = (self.omega1() * 2.0, self.omega2() * 2.0);
        let mut best = f64::INFINITY;
        for i in -3i32..=3 {
            for j in -3i32..=3 {
                if i != 0 || j != 0 {
                    best = best.min((a * i as f64 + b * j as f64).norm());
                }
            }
        }
        best
    }
}

/// `tr X^p`.
pub fn trace_power(x: &DMatrix<C>, p: u32) -> C {
    if p == 0 {
        return C::new(x.nrows() as f64, 0.0);
    }
    let h = matrix_power(x, p - 1);
    trace_product(&h, x)
}

/// `X^p`.
pub fn matrix_power(x: &DMatrix<C>, p: u32) -> DMatrix<C> {
    let mut acc = DMatrix::identity(x.nrows(), x.ncols());
    for _ in 0..p {
        acc = &acc * x;
    }
    acc
}

/// `tr(XY)` without forming the product.
pub fn trace_product(x: &DMatrix<C>, y: &DMatrix<C>) -> C {
    let mut acc = ZERO;
    for i in 0..x.nrows() {
        for j in 0..x.ncols() {
            acc += x[(i, j)] * y[(j, i)];
        }
    }
    acc
}

/// Characteristic polynomial coefficients `det(κ − X) = Σ c_k κ^{d−k}`, `c_0 = 1`,
/// via Newton's identities.
pub fn characteristic_coefficients(x: &DMatrix<C>) -> Vec<C> {
    let d = x.nrows();
    let mut pw = Vec::with_capacity(d);
    let mut acc = x.clone();
    for _ in 0..d {
        pw.push(acc.trace());
        acc = &acc * x;
    }
    let mut e = vec![ONE];
    for k in 1..=d {
        let mut s = ZERO;
        for i in 1..=k {
            let sign = if i % 2 == 1 { 1.0 } else { -1.0 };
            s += e[k - i] * pw[i - 1] * sign;
        }
        e.push(s / k as f64);
    }
    e.iter().enumerate().map(|(k, v)| if k % 2 == 1 { -v } else { *v }).collect()
}

/// Eigenvalues by complex Schur decomposition.
pub fn eigenvalues(x: &DMatrix<C>) -> Result<Vec<C>, Error> {
    let schur = x.clone().try_schur(1e-15, 10_000).ok_or(Error::Internal("Schur iteration did not converge"))?;
    let ev = schur.eigenvalues().ok_or(Error::Internal("Schur form is not triangular"))?;
    Ok(ev.iter().copied().collect())
}

/// Largest distance between two multisets after greedy nearest matching,
/// relative to `max(1, |a|)`.
pub fn multiset_distance(a: &[C], b: &[C]) -> f64 {
    let mut used = vec![false; b.len()];
    let mut worst: f64 = 0.0;
    for x in a {
        let mut best = (f64::INFINITY, usize::MAX);
        for (j, y) in b.iter().enumerate() {
            if !used[j] {
                let d = (x - y).norm();
                if d < best.0 {
                    best = (d, j);
                }
            }
        }
        if best.1 == usize::MAX {
            return f64::INFINITY;
        }
        used[best.1] = true;
        worst = worst.max(best.0 / x.norm().max(1.0));
    }
    worst
}

/// A Hamiltonian function on phase space.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HamSpec {
    /// The closed-form second-order Hamiltonian.
    Closed,
    /// `res_{z=0} z^{−m} tr L^p`.
    Residue { p: u32, m: i64 },
    /// `Σ p_i`.
    TotalMomentum,
}

/// How phase-space gradients are obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GradientMethod {
    /// Fourth-order five-point central differences with step `1e−3 (1 + |x|)`.
    CentralDifference,
    /// Analytic gradients (`℘′` for the closed form, `ζ`-weighted Lax derivatives for residues).
    Analytic,
}

impl CMSystem {
    /// Value of a Hamiltonian.
    pub fn evaluate(&self, h: HamSpec, s: &CMState) -> Result<C, Error> {
        match h {
            HamSpec::Closed => self.hamiltonian(s),
            HamSpec::Residue { p, m } => self.residue_hamiltonian(s, ZERO, m, p),
            HamSpec::TotalMomentum => Ok(s.p.iter().sum()),
        }
    }

    /// `(∂H/∂q, ∂H/∂p)`.
    pub fn gradient(&self, h: HamSpec, s: &CMState, method: GradientMethod) -> Result<(Vec<C>, Vec<C>), Error> {
        match (h, method) {
            (HamSpec::TotalMomentum, _) => Ok((vec![ZERO; self.n], vec![ONE; self.n])),
            (HamSpec::Closed, GradientMethod::Analytic) => self.hamiltonian_gradient(s),
            (HamSpec::Residue { p, m }, GradientMethod::Analytic) => self.residue_hamiltonian_gradient(s, ZERO, m, p),
            (_, GradientMethod::CentralDifference) => {
                let n = self.n;
                let mut gq = vec![ZERO; n];
                let mut gp = vec![ZERO; n];
                for k in 0..n {
                    for (which, out) in [(0, &mut gq), (1, &mut gp)] {
                        let x = if which == 0 { s.q[k] } else { s.p[k] };
                        let step = 1e-3 * (1.0 + x.norm());
                        let at = |offset: f64| -> Result<C, Error> {
                            let mut t = s.clone();
                            if which == 0 {
                                t.q[k] += offset;
                            } else {
                                t.p[k] += offset;
                            }
                            self.evaluate(h, &t)
                        };
                        let (p1, m1) = (at(step)?, at(-step)?);
                        let (p2, m2) = (at(2.0 * step)?, at(-2.0 * step)?);
                        out[k] = ((p1 - m1) * 8.0 - (p2 - m2)) / (12.0 * step);
                    }
                }
                Ok((gq, gp))
            }
        }
    }

    /// `{H_a, H_b} = Σ_i ∂_{q_i}H_a ∂_{p_i}H_b − ∂_{p_i}H_a ∂_{q_i}H_b`.
    pub fn poisson_bracket(&self, a: HamSpec, b: HamSpec, s: &CMState, method: GradientMethod) -> Result<C, Error> {
        if a == b {
            return Ok(ZERO);
        }
        let (aq, ap) = self.gradient(a, s, method)?;
        let (bq, bp) = self.gradient(b, s, method)?;
        Ok((0..self.n).map(|i| aq[i] * bp[i] - ap[i] * bq[i]).sum())
    }
}

/// Time integration scheme.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scheme {
    Rk4,
    Leapfrog,
}

impl core::str::FromStr for Scheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "rk4" => Ok(Scheme::Rk4),
            "leapfrog" => Ok(Scheme::Leapfrog),
            _ => Err(Error::InvalidArgument("scheme must be rk4 or leapfrog")),
        }
    }
}

/// Sampled trajectory; `abort` holds the error that stopped integration early.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<CMState>,
    pub abort: Option<Error>,
}

fn axpy(s: &CMState, h: f64, d: &(Vec<C>, Vec<C>)) -> CMState {
    CMState {
        q: s.q.iter().zip(&d.0).map(|(x, v)| x + v * h).collect(),
        p: s.p.iter().zip(&d.1).map(|(x, v)| x + v * h).collect(),
    }
}

impl CMSystem {
    fn rk4_step(&self, s: &CMState, dt: f64) -> Result<CMState, Error> {
        let k1 = self.equations_of_motion(s)?;
        let k2 = self.equations_of_motion(&axpy(s, dt / 2.0, &k1))?;
        let k3 = self.equations_of_motion(&axpy(s, dt / 2.0, &k2))?;
        let k4 = self.equations_of_motion(&axpy(s, dt, &k3))?;
        let comb = |a: &[C], b: &[C], c: &[C], d: &[C]| -> Vec<C> {
            (0..a.len()).map(|i| (a[i] + b[i] * 2.0 + c[i] * 2.0 + d[i]) * (dt / 6.0)).collect()
        };
        let dq = comb(&k1.0, &k2.0, &k3.0, &k4.0);
        let dp = comb(&k1.1, &k2.1, &k3.1, &k4.1);
        let out = CMState {
            q: s.q.iter().zip(&dq).map(|(x, d)| x + d).collect(),
            p: s.p.iter().zip(&dp).map(|(x, d)| x + d).collect(),
        };
        self.check_state(&out)?;
        Ok(out)
    }

    fn leapfrog_step(&self, s: &CMState, dt: f64) -> Result<CMState, Error> {
        let (_, f) = self.equations_of_motion(s)?;
        let half = CMState { q: s.q.clone(), p: s.p.iter().zip(&f).map(|(p, f)| p + f * (dt / 2.0)).collect() };
        let (v, _) = self.equations_of_motion(&half)?;
        let moved = CMState { q: half.q.iter().zip(&v).map(|(q, v)| q + v * dt).collect(), p: half.p.clone() };
        let (_, f2) = self.equations_of_motion(&moved)?;
        let out = CMState { q: moved.q.clone(), p: moved.p.iter().zip(&f2).map(|(p, f)| p + f * (dt / 2.0)).collect() };
        self.check_state(&out)?;
        Ok(out)
    }

    /// Integrates Hamilton's equations for time `t_end`, keeping every
    /// `sample_every`-th state. A collision, or a step long enough to jump over
    /// one, stops the run with the last good state kept.
    pub fn integrate(&self, s0: &CMState, t_end: f64, dt: f64, scheme: Scheme, sample_every: usize) -> Result<Trajectory, Error> {
        if !(dt > 0.0) || !(t_end >= 0.0) {
            return Err(Error::InvalidArgument("need dt > 0 and T ≥ 0"));
        }
        self.check_state(s0)?;
        let steps = (t_end / dt).round() as usize;
        let every = sample_every.max(1);
        let mut traj = Trajectory { times: vec![0.0], states: vec![s0.clone()], abort: None };
        let mut s = s0.clone();
        for k in 1..=steps {
            let next = match scheme {
                Scheme::Rk4 => self.rk4_step(&s, dt),
                Scheme::Leapfrog => self.leapfrog_step(&s, dt),
            };
            let next = next.and_then(|x| {
                // a pair coordinate moves by at most twice the largest single displacement
                let moved = x.q.iter().zip(&s.q).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
                if 2.0 * moved > self.singular_distance(&s) {
                    Err(Error::Collision("step crosses a singular configuration"))
                } else {
                    Ok(x)
                }
            });
            match next {
                Ok(x) => s = x,
                Err(e) => {
                    if traj.times.last() != Some(&((k - 1) as f64 * dt)) {
                        traj.times.push((k - 1) as f64 * dt);
                        traj.states.push(s.clone());
                    }
                    traj.abort = Some(e);
                    return Ok(traj);
                }
            }
            if k % every == 0 || k == steps {
                traj.times.push(k as f64 * dt);
                traj.states.push(s.clone());
            }
        }
        Ok(traj)
    }
}

/// Residue structure of an `A`-family Lax matrix at `z = q_i`.
#[derive(Clone, Debug)]
pub struct TyurinResidue {
    pub index: usize,
    /// `s_2 / s_1` of the residue matrix.
    pub singular_ratio: f64,
    /// `‖R²‖ / ‖R‖²`.
    pub square_ratio: f64,
    pub norm: f64,
}

impl CMSystem {
    /// Residues of `L` at each `q_i` (`A` family): rank ≤ 1 and square zero.
    pub fn tyurin_residue_check(&self, s: &CMState) -> Result<Vec<TyurinResidue>, Error> {
        if self.family != CmFamily::A {
            return Err(Error::Unsupported("residue structure check is for the A family"));
        }
        self.check_lax_state(s)?;
        let mut out = Vec::new();
        for i in 0..self.n {
            let r = self.matrix_residue(s, s.q[i])?;
            let norm = r.norm();
            let sv = r.clone().svd(false, false).singular_values;
            let mut v: Vec<f64> = sv.iter().copied().collect();
            v.sort_by(|a, b| b.partial_cmp(a).unwrap_or(core::cmp::Ordering::Equal));
            let ratio = if v.len() > 1 && v[0] > 0.0 { v[1] / v[0] } else { 0.0 };
            let sq = if norm > 0.0 { (&r * &r).norm() / (norm * norm) } else { 0.0 };
            out.push(TyurinResidue { index: i, singular_ratio: ratio, square_ratio: sq, norm });
        }
        Ok(out)
    }
}

/// Evenly spread real positions in `(0, ω_1)` (or `(0, 2ω_1)` for `A`) with a jitter.
pub fn spread_positions(family: CmFamily, n: usize, lattice: &Lattice, jitter: &[f64]) -> Vec<f64> {
    let span = if family == CmFamily::A { 2.0 } else { 1.0 } * lattice.omega1().re;
    (0..n).map(|i| span * ((i as f64 + 0.5 + 0.2 * jitter.get(i).copied().unwrap_or(0.0)) / n as f64)).collect()
}

impl CMSystem {
    /// Relaxes real positions towards a minimum of the potential by
    /// backtracking gradient descent (momenta set to zero).
    pub fn relax_positions(&self, q: &[f64], iterations: usize) -> Result<Vec<f64>, Error> {
        let mut s = CMState::real(q, &vec![0.0; self.n]);
        // at p = 0 both sign conventions give the repulsive potential
        let potential = |s: &CMState| -> Result<f64, Error> { Ok(self.hamiltonian(s)?.re) };
        let mut v = potential(&s)?;
        let mut step = 1e-3 * self.lattice.omega1().norm();
        for _ in 0..iterations {
            let (g, _) = self.hamiltonian_gradient(&s)?;
            let g: Vec<f64> = g.iter().map(|x| x.re).collect();
            let norm = g.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm < 1e-12 {
                break;
            }
            loop {
                let trial = CMState {
                    q: s.q.iter().zip(&g).map(|(q, g)| q - g * (step / norm)).collect(),
                    p: s.p.clone(),
                };
                match potential(&trial) {
                    Ok(vt) if vt < v => {
                        s = trial;
                        v = vt;
                        step *= 1.5;
                        break;
                    }
                    _ => {
                        step *= 0.5;
                        if step < 1e-15 {
                            return Ok(s.q.iter().map(|x| x.re).collect());
                        }
                    }
                }
            }
        }
        Ok(s.q.iter().map(|x| x.re).collect())
    }

    /// A real state near equilibrium: relaxed spread positions displaced by up to
    /// `displacement · ω_1`, momenta uniform in `[−momentum, momentum]`.
    pub fn sample_state<R: rand::Rng>(&self, rng: &mut R, displacement: f64, momentum: f64) -> Result<CMState, Error> {
        let w1 = self.lattice.omega1().re;
        let jitter: Vec<f64> = (0..self.n).map(|_| rng.gen_range(-0.5..0.5)).collect();
        let q = self.relax_positions(&spread_positions(self.family, self.n, &self.lattice, &jitter), 500)?;
        let q: Vec<f64> = q.iter().map(|x| x + displacement * w1 * rng.gen_range(-1.0..1.0)).collect();
        let p: Vec<f64> = (0..self.n).map(|_| momentum * rng.gen_range(-1.0..1.0)).collect();
        let s = CMState::real(&q, &p);
        self.check_state(&s)?;
        Ok(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn a_family_addition_identity() {
        let sys = CMSystem::new(CmFamily::A, 3).unwrap();
        let s = CMState::real(&[0.1, 0.45, 0.8], &[0.3, -0.1, 0.2]);
        let z = C::new(0.13, 0.21);
        let l = sys.lax_matrix(&s, z).unwrap().matrix;
        let lat = &sys.lattice;
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    let lhs = -l[(i, j)] * l[(j, i)];
                    let rhs = lat.wp(s.q[i] - s.q[j]).unwrap() - lat.wp(z).unwrap();
                    assert!((lhs - rhs).norm() < 1e-10 * rhs.norm().max(1.0));
                }
            }
        }
    }

    #[test]
    fn characteristic_polynomial_of_diagonal() {
        let x = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![C::new(1.0, 0.0), C::new(2.0, 0.0)]));
        let c = characteristic_coefficients(&x);
        assert!((c[1] - C::new(-3.0, 0.0)).norm() < 1e-14);
        assert!((c[2] - C::new(2.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn multiset_matching() {
        let a = [C::new(1.0, 0.0), C::new(2.0, 0.0)];
        let b = [C::new(2.0, 1e-9), C::new(1.0, 0.0)];
        assert!(multiset_distance(&a, &b) < 1e-8);
    }
}
