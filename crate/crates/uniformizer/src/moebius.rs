//! Möbius maps, the hyperbolic geometry of the unit disc and the Schwarzian.

use std::fmt;
use std::ops::Mul;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::Estimate;

pub const CLASSIFY_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PointExt {
    Finite(C64),
    Infinity,
}

impl PointExt {
    pub fn finite(self) -> Option<C64> {
        match self {
            PointExt::Finite(z) => Some(z),
            PointExt::Infinity => None,
        }
    }
}

impl From<C64> for PointExt {
    fn from(z: C64) -> Self {
        PointExt::Finite(z)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    Identity,
    Elliptic,
    Parabolic,
    Loxodromic,
}

/// A unit-determinant matrix acting by fractional linear transformation.
///
/// `lift_sign` tracks the SL(2) representative relative to the one the map
/// was built from; it flips under `negated` and multiplies under composition.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Moebius {
    pub a: C64,
    pub b: C64,
    pub c: C64,
    pub d: C64,
    pub lift_sign: i8,
}

impl fmt::Display for Moebius {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[[{}, {}], [{}, {}]]", self.a, self.b, self.c, self.d)
    }
}

impl Moebius {
    pub const IDENTITY: Moebius = Moebius {
        a: C64::new(1.0, 0.0),
        b: C64::new(0.0, 0.0),
        c: C64::new(0.0, 0.0),
        d: C64::new(1.0, 0.0),
        lift_sign: 1,
    };

    /// Builds a map from arbitrary entries, scaling by the principal square
    /// root of the determinant.
    pub fn new(a: C64, b: C64, c: C64, d: C64) -> Result<Self> {
        let det = a * d - b * c;
        if det.norm() < 1e-300 || !det.is_finite() {
            return Err(Error::Domain(format!("singular matrix, det = {det}")));
        }
        let k = det.sqrt().inv();
        Ok(Moebius { a: a * k, b: b * k, c: c * k, d: d * k, lift_sign: 1 })
    }

    pub fn real(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        Self::new(a.into(), b.into(), c.into(), d.into())
    }

    /// Rotation z -> e^{iθ} z.
    pub fn rotation(theta: f64) -> Self {
        let h = C64::from_polar(1.0, theta / 2.0);
        Moebius { a: h, b: C64::new(0.0, 0.0), c: C64::new(0.0, 0.0), d: h.conj(), lift_sign: 1 }
    }

    /// Disc automorphism z -> (z + p)/(1 + p̄ z), sending 0 to p.
    pub fn disc_translation(p: C64) -> Result<Self> {
        if p.norm() >= 1.0 {
            return Err(Error::OutsideDisc(p.to_string()));
        }
        let k = 1.0 / (1.0 - p.norm_sqr()).sqrt();
        Ok(Moebius { a: k.into(), b: p * k, c: p.conj() * k, d: k.into(), lift_sign: 1 })
    }

    /// Cayley map from the upper half-plane to the disc, z -> (z - i)/(z + i).
    pub fn cayley() -> Self {
        let i = C64::i();
        Self::new(1.0.into(), -i, 1.0.into(), i).expect("cayley is regular")
    }

    pub fn det(&self) -> C64 {
        self.a * self.d - self.b * self.c
    }

    pub fn trace(&self) -> C64 {
        self.a + self.d
    }

    pub fn trace_squared(&self) -> C64 {
        let t = self.trace();
        t * t
    }

    pub fn inverse(&self) -> Self {
        Moebius { a: self.d, b: -self.b, c: -self.c, d: self.a, lift_sign: self.lift_sign }
    }

    pub fn negated(&self) -> Self {
        Moebius { a: -self.a, b: -self.b, c: -self.c, d: -self.d, lift_sign: -self.lift_sign }
    }

    pub fn compose(&self, rhs: &Moebius) -> Moebius {
        Moebius {
            a: self.a * rhs.a + self.b * rhs.c,
            b: self.a * rhs.b + self.b * rhs.d,
            c: self.c * rhs.a + self.d * rhs.c,
            d: self.c * rhs.b + self.d * rhs.d,
            lift_sign: self.lift_sign * rhs.lift_sign,
        }
    }

    pub fn conjugate_by(&self, h: &Moebius) -> Moebius {
        h.compose(self).compose(&h.inverse())
    }

    pub fn apply(&self, z: PointExt) -> PointExt {
        match z {
            PointExt::Infinity => {
                if self.c == C64::new(0.0, 0.0) {
                    PointExt::Infinity
                } else {
                    PointExt::Finite(self.a / self.c)
                }
            }
            PointExt::Finite(z) => {
                let den = self.c * z + self.d;
                if den == C64::new(0.0, 0.0) {
                    PointExt::Infinity
                } else {
                    PointExt::Finite((self.a * z + self.b) / den)
                }
            }
        }
    }

    /// Fast path for points that are known not to hit the pole.
    #[inline]
    pub fn apply_c(&self, z: C64) -> C64 {
        (self.a * z + self.b) / (self.c * z + self.d)
    }

    pub fn max_norm_distance(&self, other: &Moebius) -> f64 {
        [self.a - other.a, self.b - other.b, self.c - other.c, self.d - other.d]
            .iter()
            .map(|x| x.norm())
            .fold(0.0, f64::max)
    }

    /// Distance in matrix max-norm between the projective classes.
    pub fn projective_distance(&self, other: &Moebius) -> f64 {
        self.max_norm_distance(other).min(self.max_norm_distance(&other.negated()))
    }

    pub fn is_identity(&self, tol: f64) -> bool {
        self.projective_distance(&Moebius::IDENTITY) <= tol
    }

    pub fn classify(&self) -> Kind {
        self.classify_tol(CLASSIFY_TOL)
    }

    pub fn classify_tol(&self, tol: f64) -> Kind {
        if self.is_identity(tol) {
            return Kind::Identity;
        }
        let t2 = self.trace_squared();
        if (t2 - 4.0).norm() <= tol {
            Kind::Parabolic
        } else if t2.im.abs() <= tol && t2.re >= 0.0 && t2.re < 4.0 {
            Kind::Elliptic
        } else {
            Kind::Loxodromic
        }
    }

    /// g'(z) = (cz + d)^{-2}.
    pub fn derivative(&self, z: C64) -> Result<C64> {
        let q = self.c * z + self.d;
        if q.norm() < 1e-14 {
            return Err(Error::DerivativePole(q.norm()));
        }
        Ok((q * q).inv())
    }

    /// True when the map preserves the unit circle and the disc.
    pub fn preserves_disc(&self, tol: f64) -> bool {
        let inside = match self.apply(PointExt::Finite(C64::new(0.0, 0.0))) {
            PointExt::Finite(w) => w.norm() < 1.0,
            PointExt::Infinity => false,
        };
        inside
            && (0..8).all(|k| {
                let u = C64::from_polar(1.0, k as f64 * std::f64::consts::FRAC_PI_4 + 0.1);
                match self.apply(PointExt::Finite(u)) {
                    PointExt::Finite(w) => (w.norm() - 1.0).abs() <= tol,
                    PointExt::Infinity => false,
                }
            })
    }
}

impl Mul for Moebius {
    type Output = Moebius;
    fn mul(self, rhs: Moebius) -> Moebius {
        self.compose(&rhs)
    }
}

impl Mul for &Moebius {
    type Output = Moebius;
    fn mul(self, rhs: &Moebius) -> Moebius {
        self.compose(rhs)
    }
}

fn check_disc(z: C64) -> Result<()> {
    if z.norm() < 1.0 && z.is_finite() {
        Ok(())
    } else {
        Err(Error::OutsideDisc(z.to_string()))
    }
}

/// λ(z) = 1/(1 - |z|²).
pub fn poincare_density(z: C64) -> Result<f64> {
    check_disc(z)?;
    Ok(1.0 / (1.0 - z.norm_sqr()))
}

/// artanh |(z - w)/(1 - z̄w)|, the distance of the metric λ|dz|.
pub fn hyperbolic_distance(z: C64, w: C64) -> Result<f64> {
    check_disc(z)?;
    check_disc(w)?;
    Ok(pseudo_chordal(z, w).atanh())
}

#[inline]
pub(crate) fn pseudo_chordal(z: C64, w: C64) -> f64 {
    ((z - w) / (C64::new(1.0, 0.0) - z.conj() * w)).norm().min(1.0)
}

/// Derivatives f^(k)(z), k = 0..=kmax, from `n` samples on the circle |ζ - z| = r.
pub fn cauchy_derivatives<F>(f: &F, z: C64, r: f64, n: usize, kmax: usize) -> Result<Vec<C64>>
where
    F: Fn(C64) -> C64 + ?Sized,
{
    let samples: Vec<(C64, C64)> = (0..n)
        .map(|j| {
            let e = C64::from_polar(1.0, 2.0 * std::f64::consts::PI * j as f64 / n as f64);
            (e, f(z + e * r))
        })
        .collect();
    if let Some((e, _)) = samples.iter().find(|(_, v)| !v.is_finite()) {
        return Err(Error::ContourEscape((z + e * r).to_string()));
    }
    let mut out = Vec::with_capacity(kmax + 1);
    let mut fact = 1.0;
    for k in 0..=kmax {
        if k > 0 {
            fact *= k as f64;
        }
        let s: C64 = samples.iter().map(|(e, v)| v * e.powi(-(k as i32))).sum();
        out.push(s * (fact / (n as f64 * r.powi(k as i32))));
    }
    Ok(out)
}

fn schwarzian_from(d: &[C64], z: C64) -> Result<C64> {
    let scale = d[0].norm().max(1.0);
    if d[1].norm() <= 1e-13 * scale {
        return Err(Error::DerivativeVanishes(z.to_string()));
    }
    let p = d[2] / d[1];
    Ok(d[3] / d[1] - 1.5 * p * p)
}

/// S_f = (f''/f')' - (f''/f')²/2 from contour derivatives with 64 and 128 nodes.
pub fn schwarzian<F>(f: &F, z: C64, r: f64) -> Result<Estimate<C64>>
where
    F: Fn(C64) -> C64 + ?Sized,
{
    if r <= 0.0 {
        return Err(Error::Domain(format!("contour radius {r}")));
    }
    let coarse = schwarzian_from(&cauchy_derivatives(f, z, r, 64, 3)?, z)?;
    let fine = schwarzian_from(&cauchy_derivatives(f, z, r, 128, 3)?, z)?;
    Ok(Estimate::new(fine, (fine - coarse).norm()))
}

/// max (1 - |z|²)² |f(z)| over the grid.
pub fn b2_norm_estimate<F>(f: &F, grid: &[C64]) -> f64
where
    F: Fn(C64) -> C64 + ?Sized,
{
    grid.iter()
        .map(|&z| {
            let w = 1.0 - z.norm_sqr();
            w * w * f(z).norm()
        })
        .fold(0.0, f64::max)
}

/// Points t·e^{iθ} for `radial` radii up to `r_max` along each of `angles` rays.
pub fn radial_grid(radial: usize, r_max: f64, angles: usize) -> Vec<C64> {
    let mut g = Vec::with_capacity(radial * angles);
    for k in 0..angles {
        let e = C64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / angles as f64);
        for j in 0..radial {
            let r = r_max * j as f64 / (radial - 1).max(1) as f64;
            g.push(e * r);
        }
    }
    g
}

/// (φ*_s f)(z) = f(φ(z)) φ'(z)^s.
///
/// For 2s not an integer the caller passes `log_d`, a logarithm of d fixing
/// the branch of log(cz + d) = log_d + Log(1 + (c/d) z).
pub fn pullback<F>(f: &F, phi: &Moebius, s: f64, z: C64, log_d: Option<C64>) -> Result<C64>
where
    F: Fn(C64) -> C64 + ?Sized,
{
    let w = phi.apply_c(z);
    let q = phi.c * z + phi.d;
    if q.norm() < 1e-14 {
        return Err(Error::DerivativePole(q.norm()));
    }
    let two_s = 2.0 * s;
    let factor = if s == 0.0 {
        C64::new(1.0, 0.0)
    } else if two_s.fract() == 0.0 && two_s.abs() < 1e9 {
        q.powi(-(two_s as i32))
    } else {
        let ld = log_d.ok_or(Error::BranchUndefined(s))?;
        let l = ld + (C64::new(1.0, 0.0) + phi.c / phi.d * z).ln();
        (-two_s * l).exp()
    };
    Ok(f(w) * factor)
}
