//! Norms, Weil–Petersson pairings, Bergman kernels, Poincaré series and the
//! embedding constant.

use std::f64::consts::PI;
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::factors::{canonical_factor, log_factor, AutomorphyFactor};
use crate::fuchsian::{for_each_element, EnumeratedGroup, Truncation, Word};
use crate::quadrature::QuadratureDomain;
use crate::{Estimate, C64};

fn zero() -> C64 {
    C64::new(0.0, 0.0)
}

fn lambda(z: C64) -> f64 {
    1.0 / (1.0 - z.norm_sqr())
}

fn in_disc(z: C64) -> Result<()> {
    if !(z.norm() < 1.0) {
        return Err(Error::OutsideDisc(format!("{z}")));
    }
    Ok(())
}

fn kernel_unchecked(z: C64, w: C64, s: f64) -> C64 {
    let base = C64::new(1.0, 0.0) - z * w.conj();
    (2.0 * s - 1.0) * PI.powf(-1.0) * (-2.0 * s * base.ln()).exp()
}

/// K_s(z, w) = (2s − 1)π^{s−1}(π(1 − z w̄)²)^{−s}, principal branch.
pub fn bergman_kernel(z: C64, w: C64, s: f64) -> Result<C64> {
    in_disc(z)?;
    in_disc(w)?;
    if !(s > 1.0) {
        return Err(Error::Domain(format!("Bergman kernel needs s > 1, got {s}")));
    }
    Ok(kernel_unchecked(z, w, s))
}

/// c_s = (2s − 1)/(s − 1).
pub fn c_s(s: f64) -> Result<f64> {
    if s == 1.0 {
        return Err(Error::Pole);
    }
    if !(s > 1.0) {
        return Err(Error::Domain(format!("c_s needs s > 1, got {s}")));
    }
    Ok((2.0 * s - 1.0) / (s - 1.0))
}

/// A quadrature value next to its analytic reference.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MassReport {
    pub value: f64,
    pub error: f64,
    pub reference: f64,
}

impl MassReport {
    pub fn relative_deviation(&self) -> f64 {
        (self.value - self.reference).abs() / self.reference.abs()
    }
}

// refinement error: node doubling plus, on disc grids, the truncated annulus
fn refined<F>(q: &QuadratureDomain, f: F) -> Result<Estimate<f64>>
where
    F: Fn(C64) -> f64 + Sync,
{
    let v = q.integrate(&f);
    let mut err = 0.0;
    if let Ok(d) = q.doubled() {
        err += (d.integrate(&f) - v).abs();
    }
    if let Ok(e) = q.extended() {
        err += (e.integrate(&f) - v).abs();
    }
    Ok(Estimate::new(v, err))
}

fn refined_c<F>(q: &QuadratureDomain, f: F) -> Result<Estimate<C64>>
where
    F: Fn(C64) -> C64 + Sync,
{
    let v = q.integrate_c(&f);
    let mut err = 0.0;
    if let Ok(d) = q.doubled() {
        err += (d.integrate_c(&f) - v).norm();
    }
    if let Ok(e) = q.extended() {
        err += (e.integrate_c(&f) - v).norm();
    }
    Ok(Estimate::new(v, err))
}

/// ∫ λ^{2−s}|K_s(·, w)| against c_s λ^s(w).
pub fn kernel_mass(w: C64, s: f64, q: &QuadratureDomain) -> Result<MassReport> {
    in_disc(w)?;
    let cs = c_s(s)?;
    let e = refined(q, |z| lambda(z).powf(2.0 - s) * kernel_unchecked(z, w, s).norm())?;
    Ok(MassReport { value: e.value, error: e.error, reference: cs * lambda(w).powf(s) })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PoincareMass {
    pub value: f64,
    /// Value on the grid reaching twice as far toward the circle.
    pub extended: f64,
    pub error: f64,
    /// π/(s − 1) when s > 1.
    pub reference: Option<f64>,
    pub divergent: bool,
}

/// ∫ λ^{2−s} over the disc; for s ≤ 1 the value is flagged divergent.
pub fn poincare_mass(s: f64, q: &QuadratureDomain) -> Result<PoincareMass> {
    let f = |z: C64| lambda(z).powf(2.0 - s);
    let value = q.integrate(f);
    let extended = q.extended()?.integrate(f);
    let divergent = !(s > 1.0);
    let error = if divergent { f64::INFINITY } else { refined(q, f)?.error };
    Ok(PoincareMass { value, extended, error, reference: (s > 1.0).then(|| PI / (s - 1.0)), divergent })
}

pub(crate) fn horner(seed: &[C64], z: C64) -> C64 {
    seed.iter().rev().fold(zero(), |acc, &c| acc * z + c)
}

/// An automorphic form Θ[h] given by a polynomial seed.
#[derive(Clone, Debug)]
pub struct FormSpec {
    pub seed: Vec<C64>,
    pub factor: AutomorphyFactor,
    pub enumeration: Arc<EnumeratedGroup>,
    pub s: f64,
    /// Stop summing once a shell falls below rel_tol times the partial sum.
    pub rel_tol: f64,
    chars: Vec<C64>,
    shells: Vec<Vec<u32>>,
}

impl FormSpec {
    pub fn new(seed: Vec<C64>, factor: AutomorphyFactor, enumeration: Arc<EnumeratedGroup>) -> Result<Self> {
        if seed.is_empty() {
            return Err(Error::Domain("empty seed".into()));
        }
        factor.require_s_factor()?;
        let s = factor.s;
        if !(s >= 2.0) {
            return Err(Error::Domain(format!("forms need s ≥ 2, got {s}")));
        }
        let same = factor.group.generators.len() == enumeration.group.generators.len()
            && factor
                .group
                .generators
                .iter()
                .zip(&enumeration.group.generators)
                .all(|(a, b)| a.max_norm_distance(b) <= 1e-12);
        if !same {
            return Err(Error::GroupMismatch);
        }
        let chars = factor.node_characters(&enumeration);
        let mut shells = vec![Vec::new(); enumeration.n_shells.max(1)];
        for (k, &i) in enumeration.members.iter().enumerate() {
            shells[enumeration.shell_of[k] as usize].push(i);
        }
        Ok(FormSpec { seed, factor, enumeration, s, rel_tol: 0.0, chars, shells })
    }

    /// Θ[h] for the canonical s-factor.
    pub fn canonical(seed: Vec<C64>, enumeration: Arc<EnumeratedGroup>, s: f64) -> Result<Self> {
        let f = canonical_factor(&enumeration.group, s)?;
        Self::new(seed, f, enumeration)
    }

    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    fn term(&self, node: u32, z: C64) -> C64 {
        let el = &self.enumeration.nodes[node as usize];
        let gz = el.m.apply_c(z);
        horner(&self.seed, gz) * self.factor.inverse_at(el, self.chars[node as usize], z)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ThetaValue {
    pub value: C64,
    /// Magnitude sum of the last shell summed.
    pub tail: f64,
    pub shell_sums: Vec<f64>,
    pub shells_used: usize,
    /// The last two shells did not decrease.
    pub diverging: bool,
}

/// Θ[h](z) = Σ_g h(gz) ρ_g(z)⁻¹ over the truncation, shell by shell.
pub fn theta_series(f: &FormSpec, z: C64) -> Result<ThetaValue> {
    in_disc(z)?;
    Ok(theta_unchecked(f, z))
}

fn theta_unchecked(f: &FormSpec, z: C64) -> ThetaValue {
    let mut value = zero();
    let mut partial = 0.0;
    let mut shell_sums = Vec::with_capacity(f.shells.len());
    for shell in &f.shells {
        let mut mag = 0.0;
        for &i in shell {
            let t = f.term(i, z);
            value += t;
            mag += t.norm();
        }
        partial += mag;
        shell_sums.push(mag);
        if f.rel_tol > 0.0 && shell_sums.len() >= 3 && mag < f.rel_tol * partial {
            break;
        }
    }
    let n = shell_sums.len();
    let tail = shell_sums.last().copied().unwrap_or(0.0);
    let diverging = n >= 3 && shell_sums[n - 1] >= shell_sums[n - 2] && shell_sums[n - 1] > 0.0;
    ThetaValue { value, tail, shell_sums, shells_used: n, diverging }
}

pub fn theta_many(f: &FormSpec, zs: &[C64]) -> Result<Vec<ThetaValue>> {
    zs.iter().try_for_each(|&z| in_disc(z))?;
    Ok(zs.par_iter().map(|&z| theta_unchecked(f, z)).collect())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AutomorphyResidual {
    pub residual: f64,
    /// tail(gz) + |ρ_g(z)|·tail(z).
    pub tail_bound: f64,
}

/// |Θ(gz) − ρ_g(z)Θ(z)| for the element g given by a word.
pub fn automorphy_residual(f: &FormSpec, g: &Word, z: C64) -> Result<AutomorphyResidual> {
    in_disc(z)?;
    let gz = f.factor.group.word_matrix(g)?.apply_c(z);
    in_disc(gz)?;
    let rho = f.factor.eval(g, z)?;
    let a = theta_unchecked(f, gz);
    let b = theta_unchecked(f, z);
    Ok(AutomorphyResidual { residual: (a.value - rho * b.value).norm(), tail_bound: a.tail + rho.norm() * b.tail })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Norm {
    L1,
    L2,
    Sup,
}

fn norm_on(q: &QuadratureDomain, vals: &[C64], p: Norm, s: f64) -> f64 {
    let it = q.nodes.iter().zip(&q.weights).zip(vals);
    match p {
        Norm::L1 => it.map(|((&z, &w), v)| w * lambda(z).powf(2.0 - s) * v.norm()).sum(),
        Norm::L2 => it.map(|((&z, &w), v)| w * lambda(z).powf(2.0 - 2.0 * s) * v.norm_sqr()).sum::<f64>().sqrt(),
        Norm::Sup => it.map(|((&z, _), v)| lambda(z).powf(-s) * v.norm()).fold(0.0, f64::max),
    }
}

/// L^p_s norm with the node-doubling difference as error.
pub fn lp_norm<F>(f: F, p: Norm, s: f64, q: &QuadratureDomain) -> Result<Estimate<f64>>
where
    F: Fn(C64) -> C64 + Sync,
{
    let vals: Vec<C64> = q.nodes.par_iter().map(|&z| f(z)).collect();
    let v = norm_on(q, &vals, p, s);
    let err = match q.doubled() {
        Ok(d) => {
            let dv: Vec<C64> = d.nodes.par_iter().map(|&z| f(z)).collect();
            (norm_on(&d, &dv, p, s) - v).abs()
        }
        Err(_) => 0.0,
    };
    Ok(Estimate::new(v, err))
}

/// L¹, L² and L^∞ norms from one set of samples, without refinement.
pub fn lp_norms_sampled(vals: &[C64], s: f64, q: &QuadratureDomain) -> [f64; 3] {
    [norm_on(q, vals, Norm::L1, s), norm_on(q, vals, Norm::L2, s), norm_on(q, vals, Norm::Sup, s)]
}

/// ⟨f, g⟩ = ∫ f ḡ λ^{2−2s}.
pub fn wp_pairing<F, G>(f: F, g: G, s: f64, q: &QuadratureDomain) -> Result<Estimate<C64>>
where
    F: Fn(C64) -> C64 + Sync,
    G: Fn(C64) -> C64 + Sync,
{
    refined_c(q, |z| f(z) * g(z).conj() * lambda(z).powf(2.0 - 2.0 * s))
}

/// ∫_𝔻 |z|^{2m}(1 − |z|²)^{2s−2} = π B(m + 1, 2s − 1).
pub fn monomial_mass(m: usize, s: f64) -> f64 {
    let b = 2.0 * s - 1.0;
    let mut beta = 1.0 / b;
    for k in 1..=m {
        beta *= k as f64 / (b + k as f64);
    }
    PI * beta
}

/// Taylor coefficients at 0 of the truncated Θ[h] for several seeds.
#[derive(Clone, Debug)]
pub struct ThetaTaylor {
    pub s: f64,
    /// coeffs[i][m] is the z^m coefficient of Θ[h_i].
    pub coeffs: Vec<Vec<C64>>,
    /// Per seed, the coefficient magnitude carried by the outermost shell.
    pub tail: Vec<f64>,
    pub elements: usize,
}

/// Sums the power series of h(gz)ρ_g(z)⁻¹ at 0 over the truncation, up to
/// z^order, expanding (az + b)^k d^{−k} (1 + (c/d)z)^{−(2s+k)} binomially.
pub fn theta_taylor(
    factor: &AutomorphyFactor,
    seeds: &[Vec<C64>],
    trunc: Truncation,
    order: usize,
    cap: usize,
) -> Result<ThetaTaylor> {
    factor.require_s_factor()?;
    let s = factor.s;
    let kmax = seeds.iter().map(|h| h.len()).max().unwrap_or(0);
    let nm = order + 1;
    let mut coeffs = vec![vec![zero(); nm]; seeds.len()];
    let mut shell_mag: Vec<Vec<f64>> = Vec::new();
    let mut elements = 0usize;
    // per-element scratch: basis[k][m] = z^m coefficient of (az+b)^k d^{-k} (1+qz)^{-(2s+k)}
    let mut basis = vec![vec![zero(); nm]; kmax];
    let mut pw = vec![zero(); nm];
    let mut ser = vec![zero(); nm];
    let chi = factor.chi.clone();
    let n_shells = for_each_element(&factor.group, trunc, &chi, cap, |v| {
        elements += 1;
        let m = &v.m;
        let pref = (-2.0 * s * log_factor(m, v.log_d, zero())).exp() / v.chi;
        let q = m.c / m.d;
        let (a, b) = (m.a / m.d, m.b / m.d);
        // (a'z + b')^k with a' = a/d, b' = b/d, built up in k
        pw.iter_mut().for_each(|x| *x = zero());
        pw[0] = C64::new(1.0, 0.0);
        for k in 0..kmax {
            if k > 0 {
                for j in (0..nm).rev() {
                    pw[j] = pw[j] * b + if j > 0 { pw[j - 1] * a } else { zero() };
                }
            }
            let n = 2.0 * s + k as f64;
            ser[0] = C64::new(1.0, 0.0);
            for j in 1..nm {
                ser[j] = ser[j - 1] * q * (-(n + j as f64 - 1.0) / j as f64);
            }
            for mm in 0..nm {
                let mut acc = zero();
                for j in 0..=mm {
                    acc += pw[j] * ser[mm - j];
                }
                basis[k][mm] = acc * pref;
            }
        }
        if shell_mag.len() <= v.shell {
            shell_mag.resize(v.shell + 1, vec![0.0; seeds.len()]);
        }
        for (i, h) in seeds.iter().enumerate() {
            let mut mag = 0.0;
            for mm in 0..nm {
                let mut t = zero();
                for (k, &hk) in h.iter().enumerate() {
                    t += hk * basis[k][mm];
                }
                coeffs[i][mm] += t;
                mag += t.norm();
            }
            shell_mag[v.shell][i] += mag;
        }
    })?;
    shell_mag.resize(n_shells.max(shell_mag.len()), vec![0.0; seeds.len()]);
    let tail = shell_mag.last().cloned().unwrap_or_else(|| vec![0.0; seeds.len()]);
    Ok(ThetaTaylor { s, coeffs, tail, elements })
}

impl ThetaTaylor {
    /// ∫_𝔻 Θ[h_i] h̄ λ^{2−2s}, exact for the truncated series.
    pub fn pairing_with(&self, i: usize, h: &[C64]) -> C64 {
        h.iter()
            .enumerate()
            .take(self.coeffs[i].len())
            .map(|(m, hm)| hm.conj() * monomial_mass(m, self.s) * self.coeffs[i][m])
            .sum()
    }

    /// Bound on the pairing error from the outermost shell.
    pub fn pairing_tail(&self, i: usize, h: &[C64]) -> f64 {
        let wmax = h.iter().enumerate().map(|(m, hm)| hm.norm() * monomial_mass(m, self.s)).fold(0.0, f64::max);
        self.tail[i] * wmax
    }
}

/// Scalar route: ⟨Θ[h₁], Θ[h₂]⟩ over a fundamental domain equals
/// ∫_𝔻 Θ[h₁] h̄₂ λ^{2−2s}, evaluated through Taylor coefficients.
pub fn scalar_pairing(f: &FormSpec, h2: &[C64]) -> Result<Estimate<C64>> {
    let t = theta_taylor(&f.factor, &[f.seed.clone()], f.enumeration.truncation, h2.len().max(1) - 1, usize::MAX)?;
    Ok(Estimate::new(t.pairing_with(0, h2), t.pairing_tail(0, h2)))
}

/// (βf)(z) = ∫ λ^{2−2s}(w) K_s(z, w) f(w) d²w.
pub fn bergman_projection<F>(f: F, s: f64, z: C64, q: &QuadratureDomain) -> Result<Estimate<C64>>
where
    F: Fn(C64) -> C64 + Sync,
{
    in_disc(z)?;
    if !(s > 1.0) {
        return Err(Error::Domain(format!("projection needs s > 1, got {s}")));
    }
    refined_c(q, |w| lambda(w).powf(2.0 - 2.0 * s) * kernel_unchecked(z, w, s) * f(w))
}

/// max |∂f/∂z̄| over the points, by central differences of step h.
pub fn cr_residual<F>(f: F, points: &[C64], h: f64) -> f64
where
    F: Fn(C64) -> C64,
{
    points
        .iter()
        .map(|&z| {
            let fx = (f(z + h) - f(z - h)) / (2.0 * h);
            let fy = (f(z + C64::new(0.0, h)) - f(z - C64::new(0.0, h))) / (2.0 * h);
            0.5 * (fx + C64::new(0.0, 1.0) * fy).norm()
        })
        .fold(0.0, f64::max)
}

/// α_s(z, w) = Σ_g K_s(gz, w) g′(z)^s over the enumeration.
pub fn alpha_s(z: C64, w: C64, e: &EnumeratedGroup, s: f64) -> Result<C64> {
    in_disc(z)?;
    in_disc(w)?;
    if !(s > 1.0) {
        return Err(Error::Domain(format!("α_s needs s > 1, got {s}")));
    }
    Ok(alpha_unchecked(z, w, e, s).0)
}

// value and the magnitude carried by the outermost shell
fn alpha_unchecked(z: C64, w: C64, e: &EnumeratedGroup, s: f64) -> (C64, f64) {
    let last = e.n_shells.saturating_sub(1) as u16;
    let mut sum = zero();
    let mut outer = 0.0;
    for (k, el) in e.iter().enumerate() {
        let t = kernel_unchecked(el.m.apply_c(z), w, s) * (-2.0 * s * log_factor(&el.m, el.log_d, z)).exp();
        sum += t;
        if e.shell_of[k] == last {
            outer += t.norm();
        }
    }
    (sum, outer)
}

/// Per node: λ^{−2s}(z) Re α_s(z, z) and the outermost-shell share of it.
pub fn embedding_profile(e: &EnumeratedGroup, s: f64, grid: &[C64]) -> Vec<(f64, f64)> {
    grid.par_iter()
        .map(|&z| {
            let (a, outer) = alpha_unchecked(z, z, e, s);
            let v = lambda(z).powf(-2.0 * s) * a.re;
            (v, outer / a.norm().max(1e-300))
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EmbeddingConstant {
    /// max of λ^{−2s} Re α_s(z, z) over the grid.
    pub value: f64,
    pub at: C64,
    /// Outermost-shell share of |α_s| at the maximizer.
    pub tail: f64,
}

/// max over the grid of λ^{−2s}(z) Re α_s(z, z).
///
/// A ball of radius R resolves α_s at z only while 2d(0, z) stays well below
/// R, so grids should avoid the deep cusp regions of a fundamental domain.
pub fn embedding_constant(e: &EnumeratedGroup, s: f64, grid: &[C64]) -> Result<EmbeddingConstant> {
    if grid.is_empty() {
        return Err(Error::EmptyDomain);
    }
    grid.iter().try_for_each(|&z| in_disc(z))?;
    if !(s > 1.0) {
        return Err(Error::Domain(format!("embedding constant needs s > 1, got {s}")));
    }
    let prof = embedding_profile(e, s, grid);
    let mut best = EmbeddingConstant { value: f64::NEG_INFINITY, at: zero(), tail: 0.0 };
    for (&z, &(v, t)) in grid.iter().zip(&prof) {
        if v > best.value {
            best = EmbeddingConstant { value: v, at: z, tail: t };
        }
    }
    Ok(best)
}

/// Nodes of a quadrature with λ(z) ≤ max_lambda.
pub fn thick_part(q: &QuadratureDomain, max_lambda: f64) -> Vec<C64> {
    q.nodes.iter().copied().filter(|&z| lambda(z) <= max_lambda).collect()
}

/// (ℒψ)(z) = ∫_𝔻 λ^{2−2s}(w) conj(ψ(w)) (w − z)^{−2s} d²w for |z| > 1.
pub fn l_operator<F>(psi: F, s: f64, z: C64, q: &QuadratureDomain) -> Result<C64>
where
    F: Fn(C64) -> C64 + Sync,
{
    if s.fract() != 0.0 || s < 2.0 {
        return Err(Error::NonIntegerS(s));
    }
    if !(z.norm() > 1.0) {
        return Err(Error::Domain(format!("ℒ is evaluated outside the closed disc, got {z}")));
    }
    let n = (2.0 * s) as i32;
    Ok(q.integrate_c(|w| lambda(w).powf(2.0 - 2.0 * s) * psi(w).conj() * (w - z).powi(-n)))
}

/// Both sides of c_s⁻¹‖ψ‖ ≤ ‖l_ψ‖ ≤ ‖ψ‖, with ‖l_ψ‖ bounded below by test functions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DualitySandwich {
    pub lower: f64,
    /// max |⟨φ, ψ⟩| / ‖φ‖_{L¹_s} over the test functions.
    pub functional: f64,
    pub upper: f64,
    pub slack: f64,
}

impl DualitySandwich {
    pub fn holds(&self) -> bool {
        self.lower <= self.functional + self.slack && self.functional <= self.upper + self.slack
    }
}

pub fn duality_sandwich<F>(
    psi: F,
    tests: &[Box<dyn Fn(C64) -> C64 + Sync>],
    s: f64,
    q: &QuadratureDomain,
) -> Result<DualitySandwich>
where
    F: Fn(C64) -> C64 + Sync,
{
    let cs = c_s(s)?;
    let sup = lp_norm(&psi, Norm::Sup, s, q)?;
    let mut best: f64 = 0.0;
    let mut slack = sup.error;
    for phi in tests {
        let n1 = lp_norm(|z| phi(z), Norm::L1, s, q)?;
        let pr = wp_pairing(|z| phi(z), &psi, s, q)?;
        if n1.value > 0.0 {
            let r = pr.value.norm() / n1.value;
            if r > best {
                best = r;
                slack = sup.error + r * (pr.error / pr.value.norm().max(1e-300) + n1.error / n1.value);
            }
        }
    }
    Ok(DualitySandwich { lower: sup.value / cs, functional: best, upper: sup.value, slack })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fuchsian::{
        enumerate_ball, enumerate_elements, fundamental_domain_grid, punctured_torus_group, GroupPresentation,
    };
    use rand::{Rng, SeedableRng};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn disc_grid() -> QuadratureDomain {
        QuadratureDomain::disc(96, 64, 6.0).unwrap()
    }

    fn torus() -> GroupPresentation {
        punctured_torus_group(3.0, 3.0).unwrap()
    }

    #[test]
    fn kernel_examples() {
        assert!((bergman_kernel(c(0.0, 0.0), c(0.0, 0.0), 2.0).unwrap().re - 3.0 / PI).abs() < 1e-15);
        assert!((bergman_kernel(c(0.5, 0.0), c(0.0, 0.0), 2.0).unwrap() - 3.0 / PI).norm() < 1e-15);
        let (z, w) = (c(0.3, -0.5), c(-0.6, 0.1));
        for s in [2.0, 2.5, 3.7] {
            let k1 = bergman_kernel(z, w, s).unwrap();
            let k2 = bergman_kernel(w, z, s).unwrap();
            assert!((k1 - k2.conj()).norm() < 1e-14 * k1.norm());
        }
        assert!(bergman_kernel(c(1.0, 0.0), w, 2.0).is_err());
        assert!(bergman_kernel(z, w, 1.0).is_err());
    }

    #[test]
    fn c_s_examples() {
        assert_eq!(c_s(2.0).unwrap(), 3.0);
        assert_eq!(c_s(3.0).unwrap(), 2.5);
        assert_eq!(c_s(1.0), Err(Error::Pole));
        let mut prev = c_s(1.5).unwrap();
        for k in 2..50 {
            let v = c_s(k as f64).unwrap();
            assert!(v < prev && v > 2.0);
            prev = v;
        }
        assert!((c_s(1e9).unwrap() - 2.0).abs() < 1e-8);
    }

    #[test]
    fn kernel_mass_identity() {
        let q = disc_grid();
        for (w, s, expect) in [(c(0.0, 0.0), 2.0, 3.0), (c(0.5, 0.0), 2.0, 16.0 / 3.0), (c(0.0, 0.0), 3.0, 2.5)] {
            let r = kernel_mass(w, s, &q).unwrap();
            assert!((r.reference - expect).abs() < 1e-12);
            assert!(r.relative_deviation() < 0.01, "{w} {s}: {r:?}");
        }
    }

    #[test]
    fn poincare_mass_values() {
        let q = QuadratureDomain::disc(64, 32, 5.0).unwrap();
        for s in [2.0, 3.0] {
            let m = poincare_mass(s, &q).unwrap();
            let r = m.reference.unwrap();
            assert!(!m.divergent);
            assert!((m.value - r).abs() < 0.01 * r, "{s}: {m:?}");
        }
        let m = poincare_mass(1.0, &QuadratureDomain::disc(64, 32, 8.0).unwrap()).unwrap();
        assert!(m.divergent && m.reference.is_none());
        assert!(m.extended >= 2.0 * m.value, "{m:?}");
    }

    #[test]
    fn theta_trivial_group_is_seed() {
        let e = Arc::new(enumerate_elements(&GroupPresentation::trivial(), 5).unwrap());
        let f = FormSpec::canonical(vec![c(1.0, 0.0), c(0.0, 2.0), c(-1.0, 0.5)], e, 2.0).unwrap();
        let z = c(0.3, 0.4);
        let t = theta_series(&f, z).unwrap();
        assert!((t.value - horner(&f.seed, z)).norm() < 1e-15);
    }

    #[test]
    fn form_spec_validation() {
        let g = torus();
        let e = Arc::new(enumerate_elements(&g, 2).unwrap());
        assert!(FormSpec::canonical(vec![c(1.0, 0.0)], e.clone(), 1.5).is_err());
        let nu = crate::factors::flat_factor(&g, &[c(2.0, 0.0), c(1.0, 0.0)]).unwrap();
        assert!(matches!(FormSpec::new(vec![c(1.0, 0.0)], nu, e.clone()), Err(Error::NotSFactor(_))));
        let other = Arc::new(enumerate_elements(&punctured_torus_group(3.0, 4.0).unwrap(), 2).unwrap());
        let f = canonical_factor(&g, 2.0).unwrap();
        assert_eq!(FormSpec::new(vec![c(1.0, 0.0)], f, other).unwrap_err(), Error::GroupMismatch);
    }

    #[test]
    fn theta_automorphy_and_shells() {
        let e = Arc::new(enumerate_elements(&torus(), 8).unwrap());
        let mut rng = rand::rngs::StdRng::seed_from_u64(1);
        for seed in [vec![c(1.0, 0.0)], vec![c(0.0, 0.0), c(1.0, 0.0)]] {
            let f = FormSpec::canonical(seed, e.clone(), 2.0).unwrap();
            for _ in 0..5 {
                let z = C64::from_polar(rng.gen_range(0.0..0.6), rng.gen_range(0.0..6.3));
                for g in ["A", "B", "a", "b"] {
                    let r = automorphy_residual(&f, &g.parse().unwrap(), z).unwrap();
                    assert!(r.residual <= 10.0 * r.tail_bound, "{g} {z}: {r:?}");
                }
            }
            let t = theta_series(&f, c(0.1, 0.05)).unwrap();
            for l in 4..t.shell_sums.len() - 1 {
                assert!(t.shell_sums[l + 1] < t.shell_sums[l], "{:?}", t.shell_sums);
            }
            assert!(!t.diverging);
        }
    }

    #[test]
    fn theta_early_stop() {
        let e = Arc::new(enumerate_elements(&torus(), 8).unwrap());
        let f = FormSpec::canonical(vec![c(1.0, 0.0)], e, 2.0).unwrap().with_rel_tol(1e-2);
        let t = theta_series(&f, c(0.0, 0.1)).unwrap();
        assert!(t.shells_used < 9);
        assert!(t.tail < 1e-2 * t.shell_sums.iter().sum::<f64>());
    }

    #[test]
    fn trivial_group_norms() {
        let q = disc_grid();
        let zero = lp_norm(|_| c(0.0, 0.0), Norm::L1, 2.0, &q).unwrap();
        assert_eq!(zero.value, 0.0);
        let one = lp_norm(|_| c(1.0, 0.0), Norm::L1, 2.0, &q).unwrap();
        assert!((one.value - PI).abs() < 0.01 * PI);
        let sup = lp_norm(|_| c(1.0, 0.0), Norm::Sup, 2.0, &q).unwrap();
        assert!(sup.value <= 1.0 && sup.value > 0.99);
    }

    #[test]
    fn pairing_hermitian() {
        let q = disc_grid();
        let f = |z: C64| c(1.0, 0.0) + z * z * c(0.0, 2.0);
        let g = |z: C64| z - c(0.3, 0.1);
        let fg = wp_pairing(f, g, 2.0, &q).unwrap().value;
        let gf = wp_pairing(g, f, 2.0, &q).unwrap().value;
        assert!((fg - gf.conj()).norm() < 1e-10);
        let ff = wp_pairing(f, f, 2.0, &q).unwrap().value;
        assert!(ff.re > 0.0 && ff.im.abs() < 1e-12);
    }

    #[test]
    fn monomial_masses() {
        // ∫(1 − |z|²)² = π/3, ∫|z|²(1 − |z|²)² = π/12
        assert!((monomial_mass(0, 2.0) - PI / 3.0).abs() < 1e-15);
        assert!((monomial_mass(1, 2.0) - PI / 12.0).abs() < 1e-15);
        let q = disc_grid();
        let v = q.integrate(|z| z.norm_sqr().powi(3) * (1.0 - z.norm_sqr()).powf(3.0));
        assert!((v - monomial_mass(3, 2.5)).abs() < 1e-4);
    }

    #[test]
    fn taylor_matches_direct_sum() {
        let e = Arc::new(enumerate_elements(&torus(), 5).unwrap());
        let seed = vec![c(0.5, 0.0), c(0.0, 1.0), c(1.0, 1.0)];
        let f = FormSpec::canonical(seed.clone(), e, 2.5).unwrap();
        let t = theta_taylor(&f.factor, &[seed], Truncation::WordLength(5), 12, usize::MAX).unwrap();
        let z = c(0.1, -0.15);
        let series: C64 = t.coeffs[0].iter().rev().fold(c(0.0, 0.0), |acc, &a| acc * z + a);
        let direct = theta_series(&f, z).unwrap().value;
        assert!((series - direct).norm() < 1e-8 * direct.norm(), "{series} {direct}");
    }

    #[test]
    fn scalar_two_routes() {
        let g = torus();
        let ball = Arc::new(enumerate_ball(&g, 4.0, 4.0).unwrap());
        let q = fundamental_domain_grid(&enumerate_ball(&g, 4.5, 4.0).unwrap(), 48, 48, 1e-5).unwrap();
        let h1 = vec![c(1.0, 0.0)];
        let h2 = vec![c(0.0, 0.0), c(1.0, 0.0)];
        let f1 = FormSpec::canonical(h1.clone(), ball.clone(), 2.0).unwrap();
        let f2 = FormSpec::canonical(h2.clone(), ball, 2.0).unwrap();
        for (fa, fb, hb) in [(&f1, &f1, &h1), (&f1, &f2, &h2), (&f2, &f2, &h2)] {
            let disc = scalar_pairing(fa, hb).unwrap();
            let fd = wp_pairing(|z| theta_series(fa, z).unwrap().value, |z| theta_series(fb, z).unwrap().value, 2.0, &q)
                .unwrap();
            let tol = disc.error + fd.error;
            assert!((disc.value - fd.value).norm() <= tol, "{disc:?} {fd:?}");
        }
    }

    #[test]
    fn projection_reproduces() {
        let q = QuadratureDomain::disc(64, 64, 5.0).unwrap();
        let one = bergman_projection(|_| c(1.0, 0.0), 2.0, c(0.0, 0.0), &q).unwrap();
        assert!((one.value - 1.0).norm() < 0.01);
        let z = c(0.3, 0.0);
        let id = bergman_projection(|w| w, 2.0, z, &q).unwrap();
        assert!((id.value - z).norm() < 0.01 * z.norm());
        let pts = [c(0.1, 0.1), c(-0.2, 0.3), c(0.4, -0.1)];
        let r = cr_residual(|z| bergman_projection(|w| w.conj(), 2.0, z, &q).unwrap().value, &pts, 1e-3);
        assert!(r <= 1e-3, "{r}");
        let r = cr_residual(|z| bergman_projection(|w| w.conj() + w * w, 2.0, z, &q).unwrap().value, &pts, 1e-3);
        assert!(r <= 1e-3, "{r}");
    }

    #[test]
    fn cr_residual_detects_antiholomorphic() {
        let pts = [c(0.1, 0.2)];
        assert!(cr_residual(|z| z * z, &pts, 1e-4) < 1e-8);
        assert!((cr_residual(|z| z.conj(), &pts, 1e-4) - 1.0).abs() < 1e-8);
    }

    #[test]
    fn alpha_properties() {
        let triv = enumerate_elements(&GroupPresentation::trivial(), 3).unwrap();
        let (z, w) = (c(0.2, 0.1), c(-0.4, 0.3));
        assert!((alpha_s(z, w, &triv, 2.0).unwrap() - bergman_kernel(z, w, 2.0).unwrap()).norm() < 1e-15);

        let e = enumerate_ball(&torus(), 5.0, 4.0).unwrap();
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        for _ in 0..10 {
            let z = C64::from_polar(rng.gen_range(0.0..0.6), rng.gen_range(0.0..6.3));
            let w = C64::from_polar(rng.gen_range(0.0..0.6), rng.gen_range(0.0..6.3));
            let azz = alpha_s(z, z, &e, 2.0).unwrap();
            let aww = alpha_s(w, w, &e, 2.0).unwrap();
            assert!(azz.re > 0.0 && azz.im.abs() < 1e-6 * azz.re, "{azz}");
            let azw = alpha_s(z, w, &e, 2.0).unwrap();
            assert!(azw.norm() <= (azz.re * aww.re).sqrt() + 1e-3 * azz.re.max(aww.re));
        }
    }

    #[test]
    fn embedding_constant_trivial_group() {
        let triv = enumerate_elements(&GroupPresentation::trivial(), 3).unwrap();
        let grid = crate::moebius::radial_grid(10, 0.9, 8);
        let m = embedding_constant(&triv, 2.0, &grid).unwrap();
        assert!((m.value - 3.0 / PI).abs() < 1e-12);
        assert!(embedding_constant(&triv, 2.0, &[]).is_err());
    }

    #[test]
    fn embedding_profile_averages_to_dimension() {
        // ∫_F λ^{2−2s} α_s(z, z) is the trace of the projection onto cusp forms;
        // the cusp beyond λ = 10 carries almost nothing
        let g = torus();
        let e = enumerate_ball(&g, 5.0, 4.0).unwrap();
        let q = fundamental_domain_grid(&enumerate_ball(&g, 4.5, 4.0).unwrap(), 32, 32, 0.1).unwrap();
        let prof = embedding_profile(&e, 2.0, &q.nodes);
        let trace: f64 =
            prof.iter().zip(&q.nodes).zip(&q.weights).map(|((p, z), w)| w * p.0 * lambda(*z).powi(2)).sum();
        assert!((trace - 1.0).abs() < 0.02, "{trace}");
    }

    #[test]
    fn embedding_constant_on_torus() {
        let g = torus();
        let q = fundamental_domain_grid(&enumerate_ball(&g, 4.5, 4.0).unwrap(), 32, 32, 1e-5).unwrap();
        let grid = thick_part(&q, 2.0);
        let m8 = embedding_constant(&enumerate_elements(&g, 8).unwrap(), 2.0, &grid).unwrap();
        let m10 = embedding_constant(&enumerate_elements(&g, 10).unwrap(), 2.0, &grid).unwrap();
        assert!(m8.value.is_finite());
        assert!((m10.value - m8.value).abs() <= 0.05 * m10.value, "{m8:?} {m10:?}");
        assert!(m10.value >= 3.0 / PI);
    }

    #[test]
    fn l_operator_properties() {
        let q = QuadratureDomain::disc(48, 48, 4.0).unwrap();
        let z = c(1.5, 0.5);
        assert_eq!(l_operator(|_| c(0.0, 0.0), 2.0, z, &q).unwrap(), c(0.0, 0.0));
        let psi = |w: C64| c(1.0, 0.0) + w * c(0.3, -0.2);
        let a = l_operator(psi, 2.0, z, &q).unwrap();
        let b = l_operator(|w| c(0.0, 1.0) * psi(w), 2.0, z, &q).unwrap();
        assert!((b + c(0.0, 1.0) * a).norm() < 1e-10);
        assert_eq!(l_operator(psi, 2.5, z, &q).unwrap_err(), Error::NonIntegerS(2.5));
        assert!(l_operator(psi, 2.0, c(0.5, 0.0), &q).is_err());
        let ring: Vec<C64> = (0..8).map(|k| C64::from_polar(1.6, k as f64 * 0.8)).collect();
        let r = cr_residual(|z| l_operator(psi, 2.0, z, &q).unwrap(), &ring, 1e-3);
        assert!(r <= 1e-3, "{r}");
    }

    #[test]
    fn duality_sandwich_trivial_group() {
        let q = QuadratureDomain::disc(64, 32, 5.0).unwrap();
        let psi = |z: C64| bergman_kernel(z, c(0.0, 0.0), 2.0).unwrap();
        let mut tests: Vec<Box<dyn Fn(C64) -> C64 + Sync>> = vec![Box::new(|_| c(1.0, 0.0)), Box::new(|z| z)];
        for w in [c(0.3, 0.0), c(-0.2, 0.5), c(0.6, -0.3)] {
            tests.push(Box::new(move |z| bergman_kernel(z, w, 2.0).unwrap()));
        }
        let sw = duality_sandwich(psi, &tests, 2.0, &q).unwrap();
        assert!(sw.holds(), "{sw:?}");
        assert!((sw.functional - 1.0 / PI).abs() < 0.01 / PI);
    }
}
