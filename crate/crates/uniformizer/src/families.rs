//! Families of Poincaré series over paths of Fuchsian groups.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::analysis::{embedding_constant, lp_norm, theta_series, theta_taylor, thick_part, FormSpec, Norm, ThetaValue};
use crate::dimensions::{dim_cusp_forms, SurfaceType};
use crate::error::{Error, Result};
use crate::factors::canonical_factor;
use crate::fuchsian::{
    enumerate, fundamental_domain_grid, geodesic_length, pinch_path, GroupPresentation, Letter, Truncation, Word,
    DEFAULT_ELEMENT_CAP,
};
use crate::moebius::cauchy_derivatives;
use crate::quadrature::QuadratureDomain;
use crate::{Estimate, C64};

#[derive(Clone, Debug)]
pub enum GroupPath {
    /// The punctured-torus pinching path, pinching the first generator.
    Pinch,
    /// The same group at every parameter.
    Constant(GroupPresentation),
}

/// A path u ↦ G^u over (u_min, u_max] with fixed polynomial seeds.
#[derive(Clone, Debug)]
pub struct FamilyPath {
    pub u_min: f64,
    pub u_max: f64,
    pub path: GroupPath,
    pub s: f64,
    pub seeds: Vec<Vec<C64>>,
}

impl FamilyPath {
    pub fn new(path: GroupPath, u_min: f64, u_max: f64, s: f64, seeds: Vec<Vec<C64>>) -> Result<Self> {
        if !(u_min < u_max) || !u_min.is_finite() || !u_max.is_finite() {
            return Err(Error::Domain(format!("parameter range ({u_min}, {u_max}]")));
        }
        if matches!(path, GroupPath::Pinch) && !(u_min >= 0.0 && u_max <= 1.0) {
            return Err(Error::Domain(format!("pinch range ({u_min}, {u_max}] leaves (0, 1]")));
        }
        if !(s >= 2.0) {
            return Err(Error::Domain(format!("families need s ≥ 2, got {s}")));
        }
        if seeds.is_empty() || seeds.iter().any(|h| h.is_empty()) {
            return Err(Error::Domain("seeds must be nonempty polynomials".into()));
        }
        Ok(FamilyPath { u_min, u_max, path, s, seeds })
    }

    pub fn pinch(s: f64, seeds: Vec<Vec<C64>>) -> Result<Self> {
        Self::new(GroupPath::Pinch, 0.0, 1.0, s, seeds)
    }

    pub fn constant(g: GroupPresentation, s: f64, seeds: Vec<Vec<C64>>) -> Result<Self> {
        Self::new(GroupPath::Constant(g), 0.0, 1.0, s, seeds)
    }

    fn check(&self, u: f64) -> Result<()> {
        if !(u > self.u_min && u <= self.u_max) {
            return Err(Error::Domain(format!("u = {u} outside ({}, {}]", self.u_min, self.u_max)));
        }
        Ok(())
    }

    pub fn group(&self, u: f64) -> Result<GroupPresentation> {
        self.check(u)?;
        match &self.path {
            GroupPath::Pinch => pinch_path(u),
            GroupPath::Constant(g) => Ok(g.clone()),
        }
    }

    /// dim of cusp forms of weight s on the fibre, None when the signature is
    /// not a stable surface (e.g. the trivial group).
    pub fn fibre_dimension(&self, u: f64) -> Result<Option<u64>> {
        let g = self.group(u)?;
        let t = SurfaceType { genus: g.signature.genus, punctures: g.signature.punctures };
        if !t.is_stable() {
            return Ok(None);
        }
        dim_cusp_forms(t, self.s).map(Some)
    }

    /// Evenly spaced parameters u_min + (u_max − u_min)(k + 1)/n, k < n.
    pub fn samples(&self, n: usize) -> Vec<f64> {
        (0..n)
            .map(|k| if k + 1 == n { self.u_max } else { self.u_min + (self.u_max - self.u_min) * (k + 1) as f64 / n as f64 })
            .collect()
    }
}

/// The sections Θ[h_i] on one fibre, over a stored truncation.
#[derive(Clone, Debug)]
pub struct Fibre {
    pub u: f64,
    pub forms: Vec<FormSpec>,
}

impl FamilyPath {
    pub fn fibre(&self, u: f64, trunc: Truncation) -> Result<Fibre> {
        let g = self.group(u)?;
        let e = Arc::new(enumerate(&g, trunc, DEFAULT_ELEMENT_CAP)?);
        let factor = canonical_factor(&g, self.s)?;
        let forms = self
            .seeds
            .iter()
            .map(|h| FormSpec::new(h.clone(), factor.clone(), e.clone()))
            .collect::<Result<Vec<_>>>()?;
        Ok(Fibre { u, forms })
    }
}

impl Fibre {
    pub fn section(&self, i: usize, z: C64) -> Result<ThetaValue> {
        let f = self.forms.get(i).ok_or_else(|| Error::Domain(format!("no seed {i}")))?;
        theta_series(f, z)
    }
}

/// Ψ_i(u, z) = Θ[h_i](z) on the fibre over u.
pub fn extended_section(p: &FamilyPath, i: usize, u: f64, z: C64, trunc: Truncation) -> Result<ThetaValue> {
    p.fibre(u, trunc)?.section(i, z)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GramSettings {
    pub trunc: Truncation,
    pub cap: usize,
    /// Eigenvalues above rank_tol · max count toward the rank.
    pub rank_tol: f64,
}

impl Default for GramSettings {
    fn default() -> Self {
        GramSettings { trunc: Truncation::Ball { radius: 7.5, slack: 4.0 }, cap: DEFAULT_ELEMENT_CAP, rank_tol: 1e-8 }
    }
}

#[derive(Clone, Debug)]
pub struct GramReport {
    pub u: f64,
    /// Hermitian matrix of ⟨Ψ_i, Ψ_j⟩ on the fibre.
    pub matrix: DMatrix<C64>,
    /// Descending.
    pub eigenvalues: Vec<f64>,
    pub rank: usize,
    /// Largest outermost-shell bound among the entries.
    pub error: f64,
    /// Largest |G − G*| entry before averaging.
    pub asymmetry: f64,
    pub elements: usize,
}

impl GramReport {
    /// Smallest eigenvalue relative to the largest.
    pub fn min_relative_eigenvalue(&self) -> f64 {
        let max = self.eigenvalues.first().copied().unwrap_or(0.0);
        let min = self.eigenvalues.last().copied().unwrap_or(0.0);
        if max > 0.0 {
            min / max
        } else {
            min
        }
    }
}

/// Gram matrix on the fibre over u, G_ij = ∫_𝔻 Ψ_i h̄_j λ^{2−2s}.
pub fn gram_matrix(p: &FamilyPath, u: f64, settings: &GramSettings) -> Result<GramReport> {
    let g = p.group(u)?;
    let factor = canonical_factor(&g, p.s)?;
    let order = p.seeds.iter().map(|h| h.len()).max().unwrap_or(1) - 1;
    let t = theta_taylor(&factor, &p.seeds, settings.trunc, order, settings.cap)?;
    let n = p.seeds.len();
    let raw = DMatrix::from_fn(n, n, |i, j| t.pairing_with(i, &p.seeds[j]));
    let error = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| t.pairing_tail(i, &p.seeds[j]))
        .fold(0.0, f64::max);
    let asymmetry = (&raw - raw.adjoint()).iter().map(|x| x.norm()).fold(0.0, f64::max);
    let matrix = (&raw + raw.adjoint()).map(|x| x * 0.5);
    let mut eigenvalues: Vec<f64> = matrix.clone().symmetric_eigenvalues().iter().copied().collect();
    eigenvalues.sort_by(|a, b| b.total_cmp(a));
    let max = eigenvalues.first().copied().unwrap_or(0.0);
    let rank = if max > 0.0 { eigenvalues.iter().filter(|&&e| e > settings.rank_tol * max).count() } else { 0 };
    Ok(GramReport { u, matrix, eigenvalues, rank, error, asymmetry, elements: t.elements })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WronskianSettings {
    pub trunc: Truncation,
    pub radius: f64,
    pub nodes: usize,
}

impl Default for WronskianSettings {
    fn default() -> Self {
        WronskianSettings { trunc: Truncation::WordLength(8), radius: 0.4, nodes: 64 }
    }
}

/// det (d^k Ψ_i/dz^k)(z0), k = 0..N−1, with contour derivatives.
pub fn wronskian(p: &FamilyPath, u: f64, z0: C64, settings: &WronskianSettings) -> Result<C64> {
    if z0.norm() + settings.radius >= 1.0 {
        return Err(Error::ContourEscape(format!("circle of radius {} about {z0}", settings.radius)));
    }
    let fibre = p.fibre(u, settings.trunc)?;
    let n = p.seeds.len();
    let cols = fibre
        .forms
        .iter()
        .map(|f| {
            let psi = |z: C64| theta_series(f, z).map(|t| t.value).unwrap_or(C64::new(f64::NAN, 0.0));
            cauchy_derivatives(&psi, z0, settings.radius, settings.nodes, n - 1)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DMatrix::from_fn(n, n, |k, i| cols[i][k]).determinant())
}

/// The same determinant at 0 from Taylor coefficients, k! c_k.
pub fn wronskian_taylor(p: &FamilyPath, u: f64, trunc: Truncation) -> Result<C64> {
    let g = p.group(u)?;
    let factor = canonical_factor(&g, p.s)?;
    let n = p.seeds.len();
    let t = theta_taylor(&factor, &p.seeds, trunc, n - 1, DEFAULT_ELEMENT_CAP)?;
    let fact = |k: usize| (1..=k).map(|j| j as f64).product::<f64>();
    Ok(DMatrix::from_fn(n, n, |k, i| t.coeffs[i][k] * fact(k)).determinant())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RankSample {
    pub u: f64,
    pub rank: usize,
    /// min(seed count, fibre dimension).
    pub expected: usize,
    /// rank fell below expected.
    pub drop: bool,
    /// More seeds than the fibre dimension.
    pub surplus: bool,
}

/// Gram rank at `samples` evenly spaced parameters.
pub fn rank_drop_scan(p: &FamilyPath, samples: usize, settings: &GramSettings) -> Result<Vec<RankSample>> {
    if samples < 2 {
        return Err(Error::Domain(format!("rank scan needs at least 2 samples, got {samples}")));
    }
    p.samples(samples)
        .into_par_iter()
        .map(|u| {
            let r = gram_matrix(p, u, settings)?;
            let dim = p.fibre_dimension(u)?;
            let n = p.seeds.len();
            let expected = dim.map_or(n, |d| n.min(d as usize));
            Ok(RankSample { u, rank: r.rank, expected, drop: r.rank < expected, surplus: dim.is_some_and(|d| n > d as usize) })
        })
        .collect()
}

/// Core geodesic length 2π²/|log|t|| of the collar glued by zw = t.
pub fn plumbing_length(t: C64) -> Result<f64> {
    let r = t.norm();
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::Domain(format!("plumbing parameter |t| = {r} not in (0, 1)")));
    }
    Ok(2.0 * PI * PI / r.ln().abs())
}

/// |t| = exp(−2π²/ℓ). Underflows to 0 for ℓ below about 0.028; use
/// [`plumbing_log_parameter`] there.
pub fn plumbing_parameter(length: f64) -> Result<f64> {
    Ok(plumbing_log_parameter(length)?.exp())
}

/// log|t| = −2π²/ℓ.
pub fn plumbing_log_parameter(length: f64) -> Result<f64> {
    if !(length > 0.0) {
        return Err(Error::Domain(format!("length {length} must be positive")));
    }
    Ok(-2.0 * PI * PI / length)
}

/// π/modulus of the round annulus |t| < |z| < 1, modulus log(1/|t|)/2π.
pub fn annulus_core_length(t: C64) -> Result<f64> {
    let r = t.norm();
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::Domain(format!("plumbing parameter |t| = {r} not in (0, 1)")));
    }
    let modulus = (1.0 / r).ln() / (2.0 * PI);
    Ok(PI / modulus)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepSettings {
    pub gram: GramSettings,
    /// Truncation for α_s in the embedding constant.
    pub alpha_trunc: Truncation,
    /// Ball for the Dirichlet tester of the fibre.
    pub tester_radius: f64,
    pub grid: (usize, usize),
    /// Grid nodes with λ above this are dropped from the sup.
    pub max_lambda: f64,
    /// Disc quadrature (n_r, n_θ, t_max) for the seed norms.
    pub disc: (usize, usize, f64),
}

impl Default for SweepSettings {
    fn default() -> Self {
        SweepSettings {
            gram: GramSettings { trunc: Truncation::Ball { radius: 6.0, slack: 4.0 }, ..GramSettings::default() },
            alpha_trunc: Truncation::Ball { radius: 5.0, slack: 4.0 },
            tester_radius: 4.5,
            grid: (32, 32),
            max_lambda: 2.0,
            disc: (96, 64, 8.0),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SweepRow {
    pub u: f64,
    /// Length of the pinched geodesic A.
    pub length: f64,
    pub trace_sq: f64,
    /// exp(−2π²/ℓ).
    pub plumbing: f64,
    /// Embedding constant M(u) over the thick part of the fibre domain.
    pub embedding: f64,
    pub gram: GramReport,
    /// ‖h_i‖ in A¹_s(𝔻).
    pub seed_norms: Vec<Estimate<f64>>,
}

impl SweepRow {
    /// |G₁₂| ≤ M ‖h₁‖ ‖h₂‖, with the Gram and norm errors as slack.
    pub fn pairing_bound_holds(&self) -> bool {
        if self.seed_norms.len() < 2 {
            return true;
        }
        let (a, b) = (self.seed_norms[0], self.seed_norms[1]);
        let lhs = self.gram.matrix[(0, 1)].norm();
        lhs <= self.embedding * (a.value + a.error) * (b.value + b.error) + self.gram.error
    }
}

/// Per parameter: pinched length, tr², plumbing parameter, M(u) and the Gram matrix.
pub fn asymptotic_sweep(p: &FamilyPath, us: &[f64], settings: &SweepSettings) -> Result<Vec<SweepRow>> {
    if !matches!(p.path, GroupPath::Pinch) {
        return Err(Error::Domain("asymptotic sweep needs the pinch path".into()));
    }
    let disc = QuadratureDomain::disc(settings.disc.0, settings.disc.1, settings.disc.2)?;
    let seed_norms = p
        .seeds
        .iter()
        .map(|h| lp_norm(|z| crate::analysis::horner(h, z), Norm::L1, p.s, &disc))
        .collect::<Result<Vec<_>>>()?;
    us.iter()
        .map(|&u| {
            let g = p.group(u)?;
            let a = g.word_matrix(&Word(vec![Letter { generator: 0, inverse: false }]))?;
            let length = geodesic_length(&a)?;
            let trace_sq = a.trace_squared().re;
            let tester = enumerate(&g, Truncation::Ball { radius: settings.tester_radius, slack: 4.0 }, DEFAULT_ELEMENT_CAP)?;
            let q = fundamental_domain_grid(&tester, settings.grid.0, settings.grid.1, 1e-5)?;
            let grid = thick_part(&q, settings.max_lambda);
            let e = enumerate(&g, settings.alpha_trunc, DEFAULT_ELEMENT_CAP)?;
            let embedding = embedding_constant(&e, p.s, &grid)?.value;
            let gram = gram_matrix(p, u, &settings.gram)?;
            Ok(SweepRow { u, length, trace_sq, plumbing: plumbing_parameter(length)?, embedding, gram, seed_norms: seed_norms.clone() })
        })
        .collect()
}
