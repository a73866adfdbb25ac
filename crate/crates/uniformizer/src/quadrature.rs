//! Weighted node sets on the disc and on Dirichlet fundamental domains.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fuchsian::EnumeratedGroup;
use crate::moebius::pseudo_chordal;
use crate::Estimate;

const MEMBERSHIP_TOL: f64 = 1e-12;

/// Orbit points of the basepoint, sorted by distance, for Dirichlet tests.
#[derive(Clone, Debug)]
pub struct DirichletTester {
    /// (g·0, |g·0|) for nontrivial g, ascending in modulus.
    points: Vec<(C64, f64)>,
}

impl DirichletTester {
    pub fn new(e: &EnumeratedGroup) -> Self {
        let mut pts: Vec<(C64, f64)> = e
            .iter()
            .map(|el| el.m.apply_c(C64::new(0.0, 0.0)))
            .filter(|w| w.norm() > 1e-12)
            .map(|w| (w, w.norm()))
            .collect();
        pts.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
        pts.dedup_by(|a, b| (a.0 - b.0).norm() < 1e-13);
        DirichletTester { points: pts }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    /// Values of t = artanh r where a circle about 0 touches a face of the
    /// domain; ring arc lengths have square-root singularities there.
    pub fn tangency_radii(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self
            .points
            .iter()
            .filter_map(|&(w, rw)| {
                let t = 0.5 * rw.atanh();
                let foot = w / rw * t.tanh();
                let probe = foot * (1.0 - 1e-9);
                self.contains(probe).then_some(t)
            })
            .collect();
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
        v
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// d(z, 0) ≤ d(z, g·0) + 1e-12 for every listed orbit point.
    pub fn contains(&self, z: C64) -> bool {
        let r0 = z.norm();
        if r0 >= 1.0 {
            return false;
        }
        let d0 = r0.atanh();
        let thr = (d0 - MEMBERSHIP_TOL).max(0.0).tanh();
        // d(0, w) > 2 d(0, z) rules w out by the triangle inequality
        let reach = (2.0 * d0 + MEMBERSHIP_TOL).tanh();
        for &(w, rw) in &self.points {
            if rw > reach {
                break;
            }
            if pseudo_chordal(z, w) < thr {
                return false;
            }
        }
        true
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TailFlag {
    pub excluded: bool,
    pub description: String,
}

#[derive(Clone, Debug)]
enum Recipe {
    Disc { n_r: usize, n_theta: usize, t_max: f64 },
    Fundamental { tester: Arc<DirichletTester>, n_r: usize, n_theta: usize, cutoff: f64 },
    Explicit,
}

/// Nodes with Euclidean area weights.
#[derive(Clone, Debug)]
pub struct QuadratureDomain {
    pub nodes: Vec<C64>,
    pub weights: Vec<f64>,
    pub tail: TailFlag,
    /// λ²-area of the outermost ring of a fundamental-domain grid, a scale
    /// for the cutoff error (zero for full-disc grids).
    pub error_estimate: f64,
    recipe: Recipe,
}

fn cell_area(r0: f64, r1: f64, dtheta: f64) -> f64 {
    0.5 * dtheta * (r1 * r1 - r0 * r0)
}

impl QuadratureDomain {
    pub fn explicit(nodes: Vec<C64>, weights: Vec<f64>) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::EmptyDomain);
        }
        if nodes.len() != weights.len() || nodes.iter().any(|z| z.norm() >= 1.0) || weights.iter().any(|&w| !(w > 0.0))
        {
            return Err(Error::Domain("explicit nodes must lie in the disc with positive weights".into()));
        }
        Ok(QuadratureDomain {
            nodes,
            weights,
            tail: TailFlag { excluded: false, description: String::new() },
            error_estimate: 0.0,
            recipe: Recipe::Explicit,
        })
    }

    /// Polar grid on |z| < tanh(t_max), uniform in t = artanh r and θ.
    pub fn disc(n_r: usize, n_theta: usize, t_max: f64) -> Result<Self> {
        if n_r < 1 || n_theta < 1 || !(t_max > 0.0) {
            return Err(Error::Domain(format!("disc grid {n_r}x{n_theta}, t_max {t_max}")));
        }
        let dt = t_max / n_r as f64;
        let dth = 2.0 * PI / n_theta as f64;
        let mut nodes = Vec::with_capacity(n_r * n_theta);
        let mut weights = Vec::with_capacity(n_r * n_theta);
        for i in 0..n_r {
            let r0 = (i as f64 * dt).tanh();
            let r1 = ((i + 1) as f64 * dt).tanh();
            let r = ((i as f64 + 0.5) * dt).tanh();
            let w = cell_area(r0, r1, dth);
            for j in 0..n_theta {
                nodes.push(C64::from_polar(r, (j as f64 + 0.5) * dth));
                weights.push(w);
            }
        }
        let rmax = t_max.tanh();
        Ok(QuadratureDomain {
            nodes,
            weights,
            tail: TailFlag {
                excluded: true,
                description: format!("annulus |z| > {rmax:.17} (lambda > {:.6e})", t_max.cosh().powi(2)),
            },
            error_estimate: 0.0,
            recipe: Recipe::Disc { n_r, n_theta, t_max },
        })
    }

    /// Polar rings uniform in t = artanh r, each intersected with the
    /// Dirichlet domain. The arcs of every ring are located by sampling plus
    /// bisection, and thin arcs (cusp horns) are tracked from the previous
    /// ring. Points with λ > 1/cutoff are excluded.
    pub fn fundamental(tester: Arc<DirichletTester>, n_r: usize, n_theta: usize, cutoff: f64) -> Result<Self> {
        if n_r < 16 || n_theta < 16 {
            return Err(Error::Domain(format!("fundamental grid needs ≥ 16 nodes per axis, got {n_r}x{n_theta}")));
        }
        if !(cutoff > 0.0 && cutoff < 1.0) {
            return Err(Error::Domain(format!("cusp cutoff {cutoff} not in (0, 1)")));
        }
        let t_max = (1.0 / cutoff).sqrt().acosh();
        let dt = t_max / n_r as f64;
        let dth = 2.0 * PI / n_theta as f64;
        let kinks = tester.tangency_radii();
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        let mut prev: Vec<(f64, f64)> = Vec::new();
        let mut outer = 0.0;
        for i in 0..n_r {
            let (t0, t1) = (i as f64 * dt, (i + 1) as f64 * dt);
            let mut cuts = vec![t0];
            cuts.extend(kinks.iter().copied().filter(|&k| k > t0 + 1e-9 * dt && k < t1 - 1e-9 * dt));
            cuts.push(t1);
            // (t, radial weight) pairs with ∫ r dr ≈ Σ weight
            let mut rings: Vec<(f64, f64)> = Vec::new();
            if cuts.len() == 2 {
                let w = 0.5 * (t1.tanh().powi(2) - t0.tanh().powi(2));
                rings.push((0.5 * (t0 + t1), w));
            } else {
                for seg in cuts.windows(2) {
                    let (a, b) = (seg[0], seg[1]);
                    let m = 0.5 * (a + b);
                    if a > t0 {
                        graded(&mut rings, a, m);
                    } else {
                        rings.push((0.5 * (a + m), 0.5 * (m.tanh().powi(2) - a.tanh().powi(2))));
                    }
                    if b < t1 {
                        graded(&mut rings, b, m);
                    } else {
                        rings.push((0.5 * (m + b), 0.5 * (b.tanh().powi(2) - m.tanh().powi(2))));
                    }
                }
            }
            outer = 0.0;
            for (t, band) in rings {
                let r = t.tanh();
                let arcs = ring_arcs(&tester, r, n_theta, &prev);
                let lam2 = (1.0 - r * r).powi(-2);
                outer = 0.0;
                for &(a, b) in &arcs {
                    let len = b - a;
                    let n = ((len / dth).ceil() as usize).max(1);
                    let h = len / n as f64;
                    for k in 0..n {
                        nodes.push(C64::from_polar(r, a + (k as f64 + 0.5) * h));
                        weights.push(band * h);
                    }
                    outer += band * len * lam2;
                }
                prev = arcs;
            }
        }
        if nodes.is_empty() {
            return Err(Error::EmptyDomain);
        }
        Ok(QuadratureDomain {
            nodes,
            weights,
            tail: TailFlag {
                excluded: true,
                description: format!("points with lambda > {:.6e} (cusp cutoff {cutoff:e})", 1.0 / cutoff),
            },
            error_estimate: outer,
            recipe: Recipe::Fundamental { tester, n_r, n_theta, cutoff },
        })
    }

    /// Same region, node counts doubled along both axes.
    pub fn doubled(&self) -> Result<Self> {
        match &self.recipe {
            Recipe::Disc { n_r, n_theta, t_max } => Self::disc(2 * n_r, 2 * n_theta, *t_max),
            Recipe::Fundamental { tester, n_r, n_theta, cutoff } => {
                Self::fundamental(tester.clone(), 2 * n_r, 2 * n_theta, *cutoff)
            }
            Recipe::Explicit => Err(Error::Domain("explicit node sets cannot be refined".into())),
        }
    }

    /// Disc grid reaching twice as far in t at the same step; used to detect
    /// divergence of integrals that blow up at the boundary circle.
    pub fn extended(&self) -> Result<Self> {
        match &self.recipe {
            Recipe::Disc { n_r, n_theta, t_max } => Self::disc(2 * n_r, *n_theta, 2.0 * t_max),
            _ => Err(Error::Domain("only disc grids can be extended".into())),
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Σ w λ², the λ-convention hyperbolic area.
    pub fn hyperbolic_area(&self) -> f64 {
        self.integrate(|z| (1.0 - z.norm_sqr()).powi(-2))
    }

    pub fn integrate<F>(&self, f: F) -> f64
    where
        F: Fn(C64) -> f64 + Sync,
    {
        // evaluate in parallel, sum in node order so results are reproducible
        let terms: Vec<f64> = self.nodes.par_iter().zip(self.weights.par_iter()).map(|(&z, &w)| w * f(z)).collect();
        terms.iter().sum()
    }

    pub fn integrate_c<F>(&self, f: F) -> C64
    where
        F: Fn(C64) -> C64 + Sync,
    {
        let terms: Vec<C64> = self.nodes.par_iter().zip(self.weights.par_iter()).map(|(&z, &w)| f(z) * w).collect();
        terms.iter().sum()
    }

    /// Value on the doubled grid with error |fine − coarse|.
    pub fn estimate<F>(&self, f: F) -> Result<Estimate<f64>>
    where
        F: Fn(C64) -> f64 + Sync,
    {
        let coarse = self.integrate(&f);
        let fine = self.doubled()?.integrate(&f);
        Ok(Estimate::new(fine, (fine - coarse).abs()))
    }

    pub fn estimate_c<F>(&self, f: F) -> Result<Estimate<C64>>
    where
        F: Fn(C64) -> C64 + Sync,
    {
        let coarse = self.integrate_c(&f);
        let fine = self.doubled()?.integrate_c(&f);
        Ok(Estimate::new(fine, (fine - coarse).norm()))
    }
}

/// Rings on [k, m] graded quadratically toward the singular end k.
fn graded(rings: &mut Vec<(f64, f64)>, k: f64, m: f64) {
    const N: usize = 4;
    let len = m - k;
    for j in 0..N {
        let s = (j as f64 + 0.5) / N as f64;
        let t = k + len * s * s;
        let r = t.tanh();
        let dr_dt = 1.0 - r * r;
        rings.push((t, r * dr_dt * 2.0 * len.abs() * s / N as f64));
    }
}

fn bisect_edge(tester: &DirichletTester, r: f64, inside: f64, outside: f64) -> f64 {
    let (mut a, mut b) = (inside, outside);
    for _ in 0..60 {
        let m = 0.5 * (a + b);
        if (b - a).abs() < 1e-14 {
            break;
        }
        if tester.contains(C64::from_polar(r, m)) {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Grows an arc around an interior angle until both ends leave the domain.
fn arc_around(tester: &DirichletTester, r: f64, theta: f64, step: f64) -> (f64, f64) {
    let inside = |th: f64| tester.contains(C64::from_polar(r, th));
    let mut lo = theta;
    let mut s = step;
    while inside(lo - s) {
        lo -= s;
        s *= 2.0;
        if theta - lo > 2.0 * PI {
            return (0.0, 2.0 * PI);
        }
    }
    let a = bisect_edge(tester, r, lo, lo - s);
    let mut hi = theta;
    let mut s = step;
    while inside(hi + s) {
        hi += s;
        s *= 2.0;
    }
    let b = bisect_edge(tester, r, hi, hi + s);
    (a, b)
}

/// Arcs of the circle |z| = r inside the domain, as increasing angle pairs.
fn ring_arcs(tester: &DirichletTester, r: f64, n: usize, prev: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let dth = 2.0 * PI / n as f64;
    let inside: Vec<bool> = (0..n).map(|j| tester.contains(C64::from_polar(r, j as f64 * dth))).collect();
    let Some(start) = inside.iter().position(|&b| !b) else {
        return vec![(0.0, 2.0 * PI)];
    };
    let mut arcs = Vec::new();
    let mut j = start;
    for _ in 0..n {
        let k = (j + 1) % n;
        if !inside[j] && inside[k] {
            // run of interior samples beginning at k
            let mut m = k;
            let mut steps = 0;
            while inside[(m + 1) % n] {
                m = (m + 1) % n;
                steps += 1;
            }
            let th_k = (start + ((k + n - start) % n)) as f64 * dth;
            let th_m = th_k + steps as f64 * dth;
            let a = bisect_edge(tester, r, th_k, th_k - dth);
            let b = bisect_edge(tester, r, th_m, th_m + dth);
            arcs.push((a, b));
        }
        j = k;
    }
    // thin arcs that fell between samples, followed from the previous ring
    for &(pa, pb) in prev {
        let mid = 0.5 * (pa + pb);
        let w = pb - pa;
        let covered = arcs.iter().any(|&(a, b)| overlaps(a, b, pa - w, pb + w));
        if covered || w >= 2.0 * dth {
            continue;
        }
        let probes = [0.0, -0.5, 0.5, -1.0, 1.0, -2.0, 2.0];
        if let Some(th) = probes
            .iter()
            .map(|k| mid + k * w)
            .find(|&th| tester.contains(C64::from_polar(r, th)))
        {
            let arc = arc_around(tester, r, th, (w / 8.0).max(1e-15));
            if !arcs.iter().any(|&(a, b)| overlaps(a, b, arc.0, arc.1)) {
                arcs.push(arc);
            }
        }
    }
    arcs
}

fn overlaps(a: f64, b: f64, c: f64, d: f64) -> bool {
    let shift = |x: f64| x - 2.0 * PI * ((x - a) / (2.0 * PI)).floor();
    let (c, d) = (shift(c), shift(c) + (d - c));
    c <= b || d >= a + 2.0 * PI
}
