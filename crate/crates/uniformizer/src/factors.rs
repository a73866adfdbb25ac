//! Factors of automorphy ρ_g(z) and the unitary-flat solver.
//!
//! Every constructible factor has the normal form ρ_g(z) = χ(g)·(cz + d)^{2s}
//! with χ a character of the group. The power is taken through the logarithm
//! L_g(z) = log d + Log(1 + (c/d)z), where log d is continued along words, so
//! L_{g₁g₂}(z) = L_{g₁}(g₂z) + L_{g₂}(z) holds exactly for every real s.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::fuchsian::{Element, Letter, EnumeratedGroup, GroupKind, GroupPresentation, Word};
use crate::moebius::Moebius;
use crate::C64;

const SAME_GROUP_TOL: f64 = 1e-12;
const BRANCH_TOL: f64 = 1e-6;
const UNITARY_TOL: f64 = 1e-12;
pub const FLAT_SOLVE_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub enum FactorForm {
    Canonical { s: f64 },
    Flat { values: Vec<C64> },
    Product(Vec<FactorForm>),
}

#[derive(Clone, Debug)]
pub struct AutomorphyFactor {
    pub form: FactorForm,
    pub group: GroupPresentation,
    /// Exponent: |ρ_g(z)| = |g′(z)|^{−s}·|χ(g)|.
    pub s: f64,
    /// Character values on the generators.
    pub chi: Vec<C64>,
}

fn one() -> C64 {
    C64::new(1.0, 0.0)
}

/// L_g(z) for the element m carrying the continued logarithm log_d.
pub fn log_factor(m: &Moebius, log_d: C64, z: C64) -> C64 {
    if m.c == C64::new(0.0, 0.0) {
        return log_d;
    }
    log_d + (one() + m.c / m.d * z).ln()
}

pub fn canonical_factor(g: &GroupPresentation, s: f64) -> Result<AutomorphyFactor> {
    if !s.is_finite() {
        return Err(Error::Domain(format!("s = {s}")));
    }
    if let GroupKind::Surface { .. } = g.kind {
        // the relator must carry a trivial value, otherwise the branch choice is inconsistent
        let mut rel = Word::identity();
        for k in 0..g.rank() / 2 {
            let a = Word(vec![Letter { generator: 2 * k as u16, inverse: false }]);
            let b = Word(vec![Letter { generator: 2 * k as u16 + 1, inverse: false }]);
            rel = Word(rel.0.into_iter().chain(Word::commutator(&a, &b).0).collect());
        }
        let (m, ld) = g.word_log_d(&rel)?;
        let v = (2.0 * s * log_factor(&m, ld, C64::new(0.0, 0.0))).exp();
        let dev = (v - one()).norm();
        if dev > BRANCH_TOL {
            return Err(Error::BranchConflict(dev));
        }
    }
    Ok(AutomorphyFactor {
        form: FactorForm::Canonical { s },
        group: g.clone(),
        s,
        chi: vec![one(); g.rank()],
    })
}

/// The flat factor given by a homomorphism G → ℂ*; abelian targets satisfy any relator.
pub fn flat_factor(g: &GroupPresentation, values: &[C64]) -> Result<AutomorphyFactor> {
    if values.len() != g.rank() {
        return Err(Error::InvalidGroup(format!("{} values for {} generators", values.len(), g.rank())));
    }
    if let Some(v) = values.iter().find(|v| !(v.norm() > 0.0) || !v.is_finite()) {
        return Err(Error::Domain(format!("flat value {v} must be finite and nonzero")));
    }
    Ok(AutomorphyFactor {
        form: FactorForm::Flat { values: values.to_vec() },
        group: g.clone(),
        s: 0.0,
        chi: values.to_vec(),
    })
}

pub fn factor_product(r1: &AutomorphyFactor, r2: &AutomorphyFactor) -> Result<AutomorphyFactor> {
    let same = r1.group.generators.len() == r2.group.generators.len()
        && r1
            .group
            .generators
            .iter()
            .zip(&r2.group.generators)
            .all(|(a, b)| a.max_norm_distance(b) <= SAME_GROUP_TOL);
    if !same {
        return Err(Error::GroupMismatch);
    }
    let parts = |f: &FactorForm| match f {
        FactorForm::Product(v) => v.clone(),
        other => vec![other.clone()],
    };
    let mut forms = parts(&r1.form);
    forms.extend(parts(&r2.form));
    Ok(AutomorphyFactor {
        form: FactorForm::Product(forms),
        group: r1.group.clone(),
        s: r1.s + r2.s,
        chi: r1.chi.iter().zip(&r2.chi).map(|(a, b)| a * b).collect(),
    })
}

impl AutomorphyFactor {
    pub fn is_unitary(&self) -> bool {
        self.chi.iter().all(|v| (v.norm() - 1.0).abs() <= UNITARY_TOL)
    }

    /// Err(NotSFactor) unless |ρ_g(z)| = |g′(z)|^{−s} for all g.
    pub fn require_s_factor(&self) -> Result<()> {
        let dev = self.chi.iter().map(|v| (v.norm() - 1.0).abs()).fold(0.0, f64::max);
        if dev > UNITARY_TOL {
            return Err(Error::NotSFactor(dev));
        }
        Ok(())
    }

    fn word_character(&self, w: &Word) -> Result<C64> {
        w.0.iter().try_fold(one(), |acc, l| {
            let v = *self
                .chi
                .get(l.generator as usize)
                .ok_or_else(|| Error::InvalidWord(format!("generator index {}", l.generator)))?;
            Ok(acc * if l.inverse { v.inv() } else { v })
        })
    }

    /// ρ_w(z) for a word.
    pub fn eval(&self, w: &Word, z: C64) -> Result<C64> {
        check_disc(z)?;
        let (m, ld) = self.group.word_log_d(w)?;
        Ok(self.word_character(w)? * (2.0 * self.s * log_factor(&m, ld, z)).exp())
    }

    /// Character values on every node of an enumeration.
    pub fn node_characters(&self, e: &EnumeratedGroup) -> Vec<C64> {
        e.homomorphism_values(&self.chi)
    }

    /// ρ_g(z)⁻¹ for an enumerated element whose character value is chi.
    pub fn inverse_at(&self, el: &Element, chi: C64, z: C64) -> C64 {
        (-2.0 * self.s * log_factor(&el.m, el.log_d, z)).exp() / chi
    }
}

fn check_disc(z: C64) -> Result<()> {
    if !(z.norm() < 1.0) {
        return Err(Error::OutsideDisc(format!("{z}")));
    }
    Ok(())
}

/// |ρ_{g₁g₂}(z) − ρ_{g₁}(g₂z)ρ_{g₂}(z)| / max(1, |ρ_{g₁g₂}(z)|).
pub fn cocycle_residual(rho: &AutomorphyFactor, g1: &Word, g2: &Word, z: C64) -> Result<f64> {
    let g2z = rho.group.word_matrix(g2)?.apply_c(z);
    let lhs = rho.eval(&g1.concat(g2), z)?;
    let rhs = rho.eval(g1, g2z)? * rho.eval(g2, z)?;
    Ok((lhs - rhs).norm() / lhs.norm().max(1.0))
}

/// max | |ρ_g(z)| − |g′(z)|^{−s} | / max(1, |g′(z)|^{−s}) over the samples.
pub fn s_factor_check(rho: &AutomorphyFactor, s: f64, samples: &[(Word, C64)]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for (w, z) in samples {
        let m = rho.group.word_matrix(w)?;
        let gp = m.derivative(*z)?;
        let target = gp.norm().powf(-s);
        worst = worst.max((rho.eval(w, *z)?.norm() - target).abs() / target.max(1.0));
    }
    Ok(worst)
}

/// Period matrix τ with exponents σ (a-cycles) and σ′ (b-cycles).
#[derive(Clone, Debug)]
pub struct PeriodData {
    pub tau: DMatrix<C64>,
    pub sigma: DVector<C64>,
    pub sigma_prime: DVector<C64>,
}

impl PeriodData {
    pub fn new(tau: DMatrix<C64>, sigma: DVector<C64>, sigma_prime: DVector<C64>) -> Result<Self> {
        let g = tau.nrows();
        if g == 0 || tau.ncols() != g || sigma.len() != g || sigma_prime.len() != g {
            return Err(Error::Domain("period data must be g×g with length-g exponents".into()));
        }
        let asym = (&tau - tau.transpose()).iter().map(|v| v.norm()).fold(0.0, f64::max);
        if asym > 1e-10 {
            return Err(Error::Domain(format!("τ not symmetric ({asym:e})")));
        }
        if nalgebra::Cholesky::new(tau.map(|v| v.im)).is_none() {
            return Err(Error::Domain("Im τ is not positive definite".into()));
        }
        Ok(PeriodData { tau, sigma, sigma_prime })
    }

    pub fn genus(&self) -> usize {
        self.tau.nrows()
    }

    /// Flat values exp(2πiσ_k), exp(2πiσ′_k), interleaved as a₁, b₁, a₂, b₂, ….
    pub fn flat_values(&self) -> Vec<C64> {
        let e = |x: C64| (C64::new(0.0, 2.0 * std::f64::consts::PI) * x).exp();
        (0..self.genus()).flat_map(|k| [e(self.sigma[k]), e(self.sigma_prime[k])]).collect()
    }

    /// Exponents of the modified factor on a_k and b_k for a given C.
    pub fn twisted_exponents(&self, c: &DMatrix<C64>) -> (DVector<C64>, DVector<C64>) {
        let v = c * &self.sigma;
        let a = &v + &self.sigma;
        let b = self.tau.transpose() * &v + &self.sigma_prime;
        (a, b)
    }

    /// Largest |Im| over both equation families.
    pub fn residual(&self, c: &DMatrix<C64>) -> f64 {
        let (a, b) = self.twisted_exponents(c);
        a.iter().chain(b.iter()).map(|x| x.im.abs()).fold(0.0, f64::max)
    }
}

#[derive(Clone, Debug)]
pub struct FlatSolution {
    pub c: DMatrix<C64>,
    pub residual: f64,
    pub rank: usize,
    /// Set when the residual exceeds tolerance; c is then the least-squares minimizer.
    pub rank_deficient: bool,
}

/// Finds C making the twisted factor unitary, as one real least-squares system.
pub fn unitary_flat_solve(p: &PeriodData) -> Result<FlatSolution> {
    let g = p.genus();
    let n = 2 * g * g;
    // unknown layout: Re C^{ji} at 2(j g + i), Im C^{ji} at 2(j g + i) + 1
    let mut a = DMatrix::<f64>::zeros(2 * g, n);
    let mut rhs = DVector::<f64>::zeros(2 * g);
    for k in 0..g {
        // Im(Σ_i C^{ki} σ_i) = −Im σ_k
        for i in 0..g {
            let s = p.sigma[i];
            a[(k, 2 * (k * g + i))] = s.im;
            a[(k, 2 * (k * g + i) + 1)] = s.re;
        }
        rhs[k] = -p.sigma[k].im;
        // Im(Σ_{j,i} C^{ji} σ_i τ_{jk}) = −Im σ′_k
        for j in 0..g {
            for i in 0..g {
                let s = p.sigma[i] * p.tau[(j, k)];
                a[(g + k, 2 * (j * g + i))] = s.im;
                a[(g + k, 2 * (j * g + i) + 1)] = s.re;
            }
        }
        rhs[g + k] = -p.sigma_prime[k].im;
    }
    let svd = a.svd(true, true);
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let eps = (smax * 1e-12).max(1e-300);
    let rank = svd.singular_values.iter().filter(|&&v| v > eps).count();
    let x = svd.solve(&rhs, eps).map_err(|e| Error::Degenerate(e.to_string()))?;
    let c = DMatrix::from_fn(g, g, |j, i| C64::new(x[2 * (j * g + i)], x[2 * (j * g + i) + 1]));
    let residual = p.residual(&c);
    Ok(FlatSolution { c, residual, rank, rank_deficient: !(residual <= FLAT_SOLVE_TOL) })
}

/// max over generators of ||ρ̃_γ(z)| − 1| for ρ̃_γ = h(γz)ρ_γ h(z)⁻¹ with
/// h = exp(2πi Σ C^{ji}σ_i w_j). The generators are interleaved a₁, b₁, a₂, b₂, …
/// and ρ is the flat factor of the period data.
pub fn equivalent_factor_deviation<W, G>(c: &DMatrix<C64>, p: &PeriodData, w: W, generators: &[G], z: C64) -> Result<f64>
where
    W: Fn(usize, C64) -> C64,
    G: Fn(C64) -> C64,
{
    let g = p.genus();
    if generators.len() != 2 * g {
        return Err(Error::InvalidGroup(format!("{} generators for genus {g}", generators.len())));
    }
    let v = c * &p.sigma;
    let two_pi_i = C64::new(0.0, 2.0 * std::f64::consts::PI);
    let log_h = |z: C64| two_pi_i * (0..g).map(|j| v[j] * w(j, z)).sum::<C64>();
    let rho = p.flat_values();
    let mut worst: f64 = 0.0;
    for (gamma, r) in generators.iter().zip(rho) {
        let t = (log_h(gamma(z)) - log_h(z)).exp() * r;
        worst = worst.max((t.norm() - 1.0).abs());
    }
    Ok(worst)
}
