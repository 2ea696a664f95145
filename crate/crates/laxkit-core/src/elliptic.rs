//! Weierstrass functions through Jacobi theta series.

use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::Error;

pub type C = Complex64;

const I: C = C::new(0.0, 1.0);

/// A period lattice `2ω_1 Z + 2ω_2 Z` with precomputed constants.
///
/// Evaluation uses a reduced basis (`τ` in the standard fundamental domain);
/// `η_1`, `η_2` are reported for the basis the lattice was built from.
#[derive(Clone, Debug)]
pub struct Lattice {
    omega1: C,
    omega2: C,
    eta1: C,
    eta2: C,
    g2: C,
    g3: C,
    /// Reduced half-periods and their quasi-periods.
    w1: C,
    w2: C,
    e1: C,
    e2: C,
    q: C,
    th1p0: C,
    pole_guard: f64,
}

/// `θ_1(v)` and its first three `v`-derivatives.
#[derive(Clone, Copy, Debug)]
struct Theta {
    t0: C,
    t1: C,
    t2: C,
    t3: C,
}

fn theta1(v: C, q: C) -> Theta {
    let (mut t0, mut t1, mut t2, mut t3) = (C::new(0.0, 0.0), C::new(0.0, 0.0), C::new(0.0, 0.0), C::new(0.0, 0.0));
    let lq = q.ln();
    for n in 0..64 {
        let k = (2 * n + 1) as f64;
        let e = (n as f64 + 0.5) * (n as f64 + 0.5);
        let qn = (lq * e).exp();
        let sign = if n % 2 == 0 { 2.0 } else { -2.0 };
        let c = qn * sign;
        let (s, co) = ((v * k).sin(), (v * k).cos());
        let d0 = c * s;
        let d1 = c * co * k;
        t0 += d0;
        t1 += d1;
        t2 -= d0 * (k * k);
        t3 -= d1 * (k * k);
        if n > 1 && (d1 * (k * k)).norm() < 1e-18 * t1.norm().max(t3.norm()).max(1e-300) {
            break;
        }
    }
    Theta { t0, t1, t2, t3 }
}

/// `Σ_{n≥1} σ_p(n) x^n` by Lambert series `Σ n^p x^n/(1 − x^n)`.
fn lambert(x: C, p: i32) -> C {
    let mut acc = C::new(0.0, 0.0);
    let mut xn = x;
    for n in 1..400 {
        let term = xn * (n as f64).powi(p) / (C::new(1.0, 0.0) - xn);
        acc += term;
        if term.norm() < 1e-18 * acc.norm().max(1e-300) {
            break;
        }
        xn *= x;
    }
    acc
}

impl Default for Lattice {
    /// Square lattice `ω_1 = 1/2`, `τ = i`.
    fn default() -> Self {
        Lattice::from_tau(C::new(0.5, 0.0), I).expect("valid default lattice")
    }
}

impl Lattice {
    /// Lattice with half-periods `ω_1`, `ω_2`.
    pub fn new(omega1: C, omega2: C) -> Result<Self, Error> {
        let tau = omega2 / omega1;
        if !(tau.im > 0.0) || !tau.is_finite() {
            return Err(Error::InvalidArgument("Im(ω2/ω1) must be positive"));
        }
        // Reduce the basis; track (ω1, ω2) = M (w1, w2) with integer M.
        let (mut w1, mut w2) = (omega1, omega2);
        let mut m = [[1i64, 0], [0, 1]];
        for _ in 0..1000 {
            let t = w2 / w1;
            let r = t.re.round();
            if r != 0.0 {
                w2 -= w1 * r;
                // ω = M (w1, w2_old) and w2_old = w2_new + r w1.
                for row in m.iter_mut() {
                    row[0] += row[1] * r as i64;
                }
            }
            if (w2 / w1).norm() < 1.0 - 1e-15 {
                // (w1, w2) -> (w2, -w1): old w1 = -new w2, old w2 = new w1.
                let (a, b) = (w1, w2);
                w1 = b;
                w2 = -a;
                for row in m.iter_mut() {
                    let (c0, c1) = (row[0], row[1]);
                    row[0] = c1;
                    row[1] = -c0;
                }
            } else {
                break;
            }
        }
        let tau_r = w2 / w1;
        let q = (I * PI * tau_r).exp();
        let th = theta1(C::new(0.0, 0.0), q);
        let e1 = -th.t3 * (PI * PI) / (w1 * th.t1 * 12.0);
        let e2 = (e1 * w2 - I * (PI / 2.0)) / w1;
        let qt = q * q;
        let e4 = C::new(1.0, 0.0) + lambert(qt, 3) * 240.0;
        let e6 = C::new(1.0, 0.0) - lambert(qt, 5) * 504.0;
        let g2 = e4 * PI.powi(4) / (w1.powi(4) * 12.0);
        let g3 = e6 * PI.powi(6) / (w1.powi(6) * 216.0);
        let eta = |row: [i64; 2]| e1 * row[0] as f64 + e2 * row[1] as f64;
        Ok(Lattice {
            omega1,
            omega2,
            eta1: eta(m[0]),
            eta2: eta(m[1]),
            g2,
            g3,
            w1,
            w2,
            e1,
            e2,
            q,
            th1p0: th.t1,
            pole_guard: 1e-3 * omega1.norm(),
        })
    }

    pub fn from_tau(omega1: C, tau: C) -> Result<Self, Error> {
        Self::new(omega1, omega1 * tau)
    }

    /// Sets the pole guard radius.
    pub fn with_pole_guard(mut self, radius: f64) -> Self {
        self.pole_guard = radius;
        self
    }

    pub fn omega1(&self) -> C {
        self.omega1
    }
    pub fn omega2(&self) -> C {
        self.omega2
    }
    pub fn tau(&self) -> C {
        self.omega2 / self.omega1
    }
    pub fn eta1(&self) -> C {
        self.eta1
    }
    pub fn eta2(&self) -> C {
        self.eta2
    }
    pub fn g2(&self) -> C {
        self.g2
    }
    pub fn g3(&self) -> C {
        self.g3
    }
    pub fn pole_guard(&self) -> f64 {
        self.pole_guard
    }

    /// `z = z0 + 2m w1 + 2n w2` with `z0` in the cell centred at 0.
    fn reduce(&self, z: C) -> (C, f64, f64) {
        // Solve z = x (2w1) + y (2w2) for real x, y.
        let (a, b) = (self.w1 * 2.0, self.w2 * 2.0);
        let det = a.re * b.im - a.im * b.re;
        let x = (z.re * b.im - z.im * b.re) / det;
        let y = (a.re * z.im - a.im * z.re) / det;
        let (m, n) = (x.round(), y.round());
        (z - a * m - b * n, m, n)
    }

    /// Distance from `z` to the nearest lattice point.
    pub fn lattice_distance(&self, z: C) -> f64 {
        let (z0, _, _) = self.reduce(z);
        let (a, b) = (self.w1 * 2.0, self.w2 * 2.0);
        let mut best = f64::INFINITY;
        for i in -1..=1 {
            for j in -1..=1 {
                best = best.min((z0 - a * i as f64 - b * j as f64).norm());
            }
        }
        best
    }

    fn guard(&self, z: C) -> Result<(), Error> {
        if !z.is_finite() {
            return Err(Error::InvalidArgument("non-finite argument"));
        }
        if self.lattice_distance(z) < self.pole_guard {
            return Err(Error::PoleProximity { re: z.re, im: z.im });
        }
        Ok(())
    }

    fn theta_at(&self, z0: C) -> (C, Theta) {
        let c = PI / (self.w1 * 2.0);
        (c, theta1(z0 * c, self.q))
    }

    /// `ζ(z)`.
    pub fn zeta(&self, z: C) -> Result<C, Error> {
        self.guard(z)?;
        let (z0, m, n) = self.reduce(z);
        let (c, th) = self.theta_at(z0);
        let base = self.e1 * z0 / self.w1 + c * th.t1 / th.t0;
        Ok(base + self.e1 * (2.0 * m) + self.e2 * (2.0 * n))
    }

    /// `℘(z)`.
    pub fn wp(&self, z: C) -> Result<C, Error> {
        self.guard(z)?;
        let (z0, _, _) = self.reduce(z);
        let (c, th) = self.theta_at(z0);
        let r = th.t1 / th.t0;
        Ok(-self.e1 / self.w1 - c * c * (th.t2 / th.t0 - r * r))
    }

    /// `℘′(z)`.
    pub fn wp_prime(&self, z: C) -> Result<C, Error> {
        self.guard(z)?;
        let (z0, _, _) = self.reduce(z);
        let (c, th) = self.theta_at(z0);
        let r = th.t1 / th.t0;
        Ok(-c * c * c * (th.t3 / th.t0 - th.t2 * r * 3.0 / th.t0 + r * r * r * 2.0))
    }

    /// `℘(z)` and `℘′(z)` together.
    pub fn wp_pair(&self, z: C) -> Result<(C, C), Error> {
        self.guard(z)?;
        let (z0, _, _) = self.reduce(z);
        let (c, th) = self.theta_at(z0);
        let r = th.t1 / th.t0;
        let wp = -self.e1 / self.w1 - c * c * (th.t2 / th.t0 - r * r);
        let wpp = -c * c * c * (th.t3 / th.t0 - th.t2 * r * 3.0 / th.t0 + r * r * r * 2.0);
        Ok((wp, wpp))
    }

    /// `σ(z)`; zero on the lattice.
    pub fn sigma(&self, z: C) -> Result<C, Error> {
        if !z.is_finite() {
            return Err(Error::InvalidArgument("non-finite argument"));
        }
        let (z0, m, n) = self.reduce(z);
        let (c, th) = self.theta_at(z0);
        let base = (self.e1 * z0 * z0 / (self.w1 * 2.0)).exp() * th.t0 / (self.th1p0 * c);
        // σ(z0 + λ) = ε e^{η(λ)(z0 + λ/2)} σ(z0), ε = −1 unless λ/2 ∈ Λ.
        let lam = self.w1 * (2.0 * m) + self.w2 * (2.0 * n);
        let eta = self.e1 * (2.0 * m) + self.e2 * (2.0 * n);
        let even = (m as i64) % 2 == 0 && (n as i64) % 2 == 0;
        let eps = if even { 1.0 } else { -1.0 };
        Ok(base * (eta * (z0 + lam * 0.5)).exp() * eps)
    }

    /// `log σ(z)` up to `2πi Z`, stable for arguments far from the cell.
    pub fn ln_sigma(&self, z: C) -> Result<C, Error> {
        let (z0, m, n) = self.reduce(z);
        let (c, th) = self.theta_at(z0);
        if th.t0.norm() == 0.0 {
            return Err(Error::PoleProximity { re: z.re, im: z.im });
        }
        let lam = self.w1 * (2.0 * m) + self.w2 * (2.0 * n);
        let eta = self.e1 * (2.0 * m) + self.e2 * (2.0 * n);
        let even = (m as i64) % 2 == 0 && (n as i64) % 2 == 0;
        let eps = if even { C::new(0.0, 0.0) } else { I * PI };
        Ok(self.e1 * z0 * z0 / (self.w1 * 2.0) + (th.t0 / (self.th1p0 * c)).ln() + eta * (z0 + lam * 0.5) + eps)
    }
}

/// `|σ(z+u)σ(z−u)/(σ(z)²σ(u)²) − ℘(u) + ℘(z)|`.
pub fn addition_identity_residual(lat: &Lattice, z: C, u: C) -> Result<f64, Error> {
    for w in [z, u, z + u, z - u] {
        if lat.lattice_distance(w) < lat.pole_guard() {
            return Err(Error::PoleProximity { re: w.re, im: w.im });
        }
    }
    let s = |w: C| lat.sigma(w);
    let lhs = s(z + u)? * s(z - u)? / (s(z)?.powi(2) * s(u)?.powi(2));
    Ok((lhs - lat.wp(u)? + lat.wp(z)?).norm())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lemniscatic_constants() {
        let lat = Lattice::default();
        // G4(Z[i]) = ϖ^4/15 with ϖ the lemniscate constant.
        let varpi: f64 = 2.622_057_554_292_119_8;
        assert!((lat.g2() - C::new(4.0 * varpi.powi(4), 0.0)).norm() < 1e-9);
        assert!(lat.g3().norm() < 1e-9);
    }

    #[test]
    fn legendre_relation() {
        let lat = Lattice::new(C::new(0.7, 0.1), C::new(1.3, 2.9)).unwrap();
        let r = lat.eta1() * lat.omega2() - lat.eta2() * lat.omega1();
        assert!((r - I * (PI / 2.0)).norm() < 1e-12);
    }

    #[test]
    fn pole_guard() {
        let lat = Lattice::default();
        assert!(matches!(lat.wp(C::new(1.0 + 1e-5, 0.0)), Err(Error::PoleProximity { .. })));
        assert_eq!(lat.sigma(C::new(0.0, 0.0)).unwrap(), C::new(0.0, 0.0));
    }
}
