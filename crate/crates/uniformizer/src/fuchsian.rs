//! Finitely generated Fuchsian groups acting on the unit disc.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::moebius::{Kind, Moebius};
use crate::quadrature::{DirichletTester, QuadratureDomain};

const PRESERVE_TOL: f64 = 1e-10;
const RELATION_TOL: f64 = 1e-9;
pub const DEFAULT_ELEMENT_CAP: usize = 20_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GroupKind {
    Free { rank: usize },
    Surface { genus: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Signature {
    pub genus: u32,
    pub punctures: u32,
}

/// A generator or its inverse.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Letter {
    pub generator: u16,
    pub inverse: bool,
}

impl Letter {
    pub fn inv(self) -> Letter {
        Letter { generator: self.generator, inverse: !self.inverse }
    }

    fn code(self, rank: usize) -> usize {
        self.generator as usize + if self.inverse { rank } else { 0 }
    }

    fn from_code(code: usize, rank: usize) -> Letter {
        Letter { generator: (code % rank) as u16, inverse: code >= rank }
    }
}

/// A word in the generators; uppercase letters are generators, lowercase their inverses.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Word(pub Vec<Letter>);

impl Word {
    pub fn identity() -> Word {
        Word(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn inverse(&self) -> Word {
        Word(self.0.iter().rev().map(|l| l.inv()).collect())
    }

    /// Free reduction.
    pub fn reduced(&self) -> Word {
        let mut out: Vec<Letter> = Vec::with_capacity(self.0.len());
        for &l in &self.0 {
            if out.last() == Some(&l.inv()) {
                out.pop();
            } else {
                out.push(l);
            }
        }
        Word(out)
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Word(v).reduced()
    }

    pub fn commutator(a: &Word, b: &Word) -> Word {
        a.concat(b).concat(&a.inverse()).concat(&b.inverse())
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        for l in &self.0 {
            let ch = (b'A' + l.generator as u8) as char;
            write!(f, "{}", if l.inverse { ch.to_ascii_lowercase() } else { ch })?;
        }
        Ok(())
    }
}

impl FromStr for Word {
    type Err = Error;
    fn from_str(s: &str) -> Result<Word> {
        if s == "1" {
            return Ok(Word::identity());
        }
        s.chars()
            .map(|ch| {
                if ch.is_ascii_uppercase() {
                    Ok(Letter { generator: (ch as u8 - b'A') as u16, inverse: false })
                } else if ch.is_ascii_lowercase() {
                    Ok(Letter { generator: (ch as u8 - b'a') as u16, inverse: true })
                } else {
                    Err(Error::InvalidWord(s.to_string()))
                }
            })
            .collect::<Result<Vec<_>>>()
            .map(Word)
    }
}

#[derive(Clone, Debug)]
pub struct GroupPresentation {
    pub generators: Vec<Moebius>,
    pub kind: GroupKind,
    pub signature: Signature,
    pub basepoint: C64,
}

impl GroupPresentation {
    pub fn new(generators: Vec<Moebius>, kind: GroupKind, signature: Signature) -> Result<Self> {
        for (k, g) in generators.iter().enumerate() {
            if !g.preserves_disc(PRESERVE_TOL) {
                return Err(Error::InvalidGroup(format!("generator {k} does not preserve the disc")));
            }
            if g.apply_c(C64::new(0.0, 0.0)).norm() < 1e-12 {
                return Err(Error::InvalidGroup(format!("generator {k} fixes the basepoint")));
            }
        }
        match kind {
            GroupKind::Free { rank } if rank != generators.len() => {
                return Err(Error::InvalidGroup("rank does not match generator count".into()))
            }
            GroupKind::Surface { genus } if 2 * genus != generators.len() => {
                return Err(Error::InvalidGroup("surface group needs 2g generators".into()))
            }
            _ => {}
        }
        let g = GroupPresentation { generators, kind, signature, basepoint: C64::new(0.0, 0.0) };
        if let GroupKind::Surface { .. } = kind {
            g.relation_sign()?;
        }
        Ok(g)
    }

    pub fn trivial() -> Self {
        GroupPresentation {
            generators: Vec::new(),
            kind: GroupKind::Free { rank: 0 },
            signature: Signature { genus: 0, punctures: 0 },
            basepoint: C64::new(0.0, 0.0),
        }
    }

    /// The cyclic group generated by one disc automorphism.
    pub fn cyclic(m: Moebius) -> Result<Self> {
        Self::new(vec![m], GroupKind::Free { rank: 1 }, Signature { genus: 0, punctures: 0 })
    }

    pub fn rank(&self) -> usize {
        self.generators.len()
    }

    pub fn letter_matrix(&self, l: Letter) -> Result<Moebius> {
        let g = self
            .generators
            .get(l.generator as usize)
            .ok_or_else(|| Error::InvalidWord(format!("generator index {}", l.generator)))?;
        Ok(if l.inverse { g.inverse() } else { *g })
    }

    pub fn word_matrix(&self, w: &Word) -> Result<Moebius> {
        w.0.iter().try_fold(Moebius::IDENTITY, |acc, &l| Ok(acc * self.letter_matrix(l)?))
    }

    /// Branch data log d along a word, continued letter by letter.
    pub fn word_log_d(&self, w: &Word) -> Result<(Moebius, C64)> {
        let logs = self.letter_logs();
        let mut m = Moebius::IDENTITY;
        let mut ld = C64::new(0.0, 0.0);
        for &l in &w.0 {
            let x = self.letter_matrix(l)?;
            ld = extend_log(&m, ld, &x, logs[l.code(self.rank())]);
            m = m * x;
        }
        Ok((m, ld))
    }

    fn letter_logs(&self) -> Vec<C64> {
        let k = self.rank();
        let mut v = vec![C64::new(0.0, 0.0); 2 * k];
        for (i, g) in self.generators.iter().enumerate() {
            let l = (g.d * g.d).ln() / 2.0;
            v[i] = l;
            let gi = g.inverse();
            let x0 = gi.apply_c(C64::new(0.0, 0.0));
            v[i + k] = -l - (C64::new(1.0, 0.0) + g.c / g.d * x0).ln();
        }
        v
    }

    /// Product of commutators a1 b1 a1⁻¹ b1⁻¹ ⋯ over consecutive generator pairs.
    pub fn relation_product(&self) -> Moebius {
        self.generators.chunks(2).fold(Moebius::IDENTITY, |acc, p| {
            if p.len() == 2 {
                acc * p[0] * p[1] * p[0].inverse() * p[1].inverse()
            } else {
                acc
            }
        })
    }

    fn relation_sign(&self) -> Result<i8> {
        let p = self.relation_product();
        let dp = p.max_norm_distance(&Moebius::IDENTITY);
        let dm = p.max_norm_distance(&Moebius::IDENTITY.negated());
        if dp <= RELATION_TOL {
            Ok(1)
        } else if dm <= RELATION_TOL {
            Ok(-1)
        } else {
            Err(Error::RelationNotSatisfied(dp.min(dm)))
        }
    }
}

/// ε with Π [a_i, b_i] = ε·I for surface groups; +1 for free groups.
pub fn sl2_lift_sign(g: &GroupPresentation) -> Result<i8> {
    match g.kind {
        GroupKind::Free { .. } => Ok(1),
        GroupKind::Surface { .. } => g.relation_sign(),
    }
}

/// The trace-identity root z = tr(AB) for tr A = x, tr B = y (the smaller root).
pub fn markov_third(x: f64, y: f64) -> Result<f64> {
    let disc = x * x * y * y - 4.0 * (x * x + y * y);
    if disc < 0.0 {
        return Err(Error::NoRealSolution(disc));
    }
    Ok((x * y - disc.sqrt()) / 2.0)
}

/// Once-punctured torus group with tr A = x, tr B = y and parabolic commutator.
///
/// The axes of A and B cross at i in the upper half-plane, which the Cayley
/// map sends to the basepoint 0.
pub fn punctured_torus_group(x: f64, y: f64) -> Result<GroupPresentation> {
    if !(x > 2.0) || !(y > 2.0) {
        return Err(Error::Degenerate(format!("traces must exceed 2, got ({x}, {y})")));
    }
    let z = markov_third(x, y)?;
    let mu = (x + (x * x - 4.0).sqrt()) / 2.0;
    let p = (z - y / mu) / (mu - 1.0 / mu);
    let t = y - p;
    if p * t <= 1.0 {
        return Err(Error::Degenerate(format!("no real B for (x, y, z) = ({x}, {y}, {z})")));
    }
    let q = (p * t - 1.0).sqrt();
    let a = Moebius::real(mu, 0.0, 0.0, 1.0 / mu)?;
    let b = Moebius::real(p, q, q, t)?;
    let cay = Moebius::cayley();
    let gens = vec![a.conjugate_by(&cay), b.conjugate_by(&cay)];
    GroupPresentation::new(gens, GroupKind::Free { rank: 2 }, Signature { genus: 1, punctures: 1 })
}

/// Trace coordinates (x, y, z) of the pinching path at u.
pub fn pinch_traces(u: f64) -> Result<(f64, f64, f64)> {
    if !(u > 0.0 && u <= 1.0) {
        return Err(Error::Domain(format!("pinch parameter u = {u} not in (0, 1]")));
    }
    let x = 2.0 + u;
    let y = x / u.sqrt();
    Ok((x, y, y))
}

/// x = 2 + u, y = z = x/√(x − 2); the A-geodesic shrinks as u → 0.
pub fn pinch_path(u: f64) -> Result<GroupPresentation> {
    let (x, y, _) = pinch_traces(u)?;
    punctured_torus_group(x, y)
}

/// Genus-two group pairing the sides of the regular octagon with angles π/4.
pub fn genus_two_octagon() -> Result<GroupPresentation> {
    let rho = (1.0 + 2f64.sqrt()).acosh();
    let t = Moebius::real(rho.cosh(), rho.sinh(), rho.sinh(), rho.cosh())?;
    let theta = |j: usize| j as f64 * std::f64::consts::FRAC_PI_4;
    let pair = |j: usize, k: usize| {
        Moebius::rotation(theta(k)) * t * Moebius::rotation(std::f64::consts::PI - theta(j))
    };
    let gens = vec![pair(2, 0), pair(1, 3), pair(6, 4), pair(5, 7)];
    GroupPresentation::new(gens, GroupKind::Surface { genus: 2 }, Signature { genus: 2, punctures: 0 })
}

pub fn trace_squared(g: &GroupPresentation, w: &Word) -> Result<C64> {
    Ok(g.word_matrix(w)?.trace_squared())
}

/// 2 arccosh(|tr|/2), the translation length for curvature −1.
pub fn geodesic_length(m: &Moebius) -> Result<f64> {
    let t = m.trace();
    if m.classify() != Kind::Loxodromic || t.im.abs() > 1e-9 * t.norm().max(1.0) {
        return Err(Error::NotHyperbolic(format!("{:?} with trace {t}", m.classify())));
    }
    Ok(2.0 * (t.re.abs() / 2.0).acosh())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Truncation {
    /// All reduced words of length ≤ L.
    WordLength(usize),
    /// Elements with d(0, g·0) ≤ radius (λ-convention distance), found by a
    /// word search that keeps exploring while |d|² ≤ slack·cosh²(radius).
    Ball { radius: f64, slack: f64 },
}

#[derive(Clone, Copy, Debug)]
pub struct Element {
    pub m: Moebius,
    /// log d continued along the word from the generators.
    pub log_d: C64,
    pub parent: u32,
    pub letter: Letter,
    pub len: u16,
}

/// A finite truncation of a group, stored as a word tree.
#[derive(Clone, Debug)]
pub struct EnumeratedGroup {
    pub group: GroupPresentation,
    pub truncation: Truncation,
    pub dedup_tol: f64,
    /// Every node reached by the search; parents precede children.
    pub nodes: Vec<Element>,
    /// Indices of nodes inside the truncation.
    pub members: Vec<u32>,
    /// Shell index of each member; the last shell is the outermost.
    pub shell_of: Vec<u16>,
    pub n_shells: usize,
}

fn extend_log(w: &Moebius, log_w: C64, x: &Moebius, log_x: C64) -> C64 {
    if w.c == C64::new(0.0, 0.0) {
        return log_w + log_x;
    }
    let x0 = x.b / x.d;
    log_w + (C64::new(1.0, 0.0) + w.c / w.d * x0).ln() + log_x
}

struct Dedup {
    buckets: HashMap<(i64, i64), Vec<u32>>,
    tol: f64,
}

impl Dedup {
    fn key(m: &Moebius, scale: f64) -> (i64, i64) {
        ((m.a.norm() / scale).floor() as i64, (m.b.norm() / scale).floor() as i64)
    }

    fn find(&self, m: &Moebius, nodes: &[Element]) -> bool {
        let scale = 1e-6;
        let (ka, kb) = Self::key(m, scale);
        for da in -1..=1 {
            for db in -1..=1 {
                if let Some(v) = self.buckets.get(&(ka + da, kb + db)) {
                    if v.iter().any(|&i| nodes[i as usize].m.projective_distance(m) <= self.tol) {
                        return true;
                    }
                }
            }
        }
        false
    }

    fn insert(&mut self, m: &Moebius, idx: u32) {
        self.buckets.entry(Self::key(m, 1e-6)).or_default().push(idx);
    }
}

pub fn enumerate_elements(g: &GroupPresentation, max_len: usize) -> Result<EnumeratedGroup> {
    enumerate(g, Truncation::WordLength(max_len), DEFAULT_ELEMENT_CAP)
}

pub fn enumerate_ball(g: &GroupPresentation, radius: f64, slack: f64) -> Result<EnumeratedGroup> {
    enumerate(g, Truncation::Ball { radius, slack }, DEFAULT_ELEMENT_CAP)
}

pub fn enumerate(g: &GroupPresentation, trunc: Truncation, cap: usize) -> Result<EnumeratedGroup> {
    let rank = g.rank();
    let letters: Vec<Moebius> = (0..2 * rank)
        .map(|c| g.letter_matrix(Letter::from_code(c, rank)).expect("valid letter"))
        .collect();
    let logs = g.letter_logs();
    let surface = matches!(g.kind, GroupKind::Surface { .. });
    let dedup_tol = 1e-8;
    let mut dedup = Dedup { buckets: HashMap::new(), tol: dedup_tol };

    let (max_len, limit, explore) = match trunc {
        Truncation::WordLength(l) => (l, f64::INFINITY, f64::INFINITY),
        Truncation::Ball { radius, slack } => {
            let (t, e, _) = ball_limits(radius, slack)?;
            (usize::MAX, t, e)
        }
    };

    let root = Element {
        m: Moebius::IDENTITY,
        log_d: C64::new(0.0, 0.0),
        parent: u32::MAX,
        letter: Letter { generator: 0, inverse: false },
        len: 0,
    };
    let mut nodes = vec![root];
    if surface {
        dedup.insert(&root.m, 0);
    }
    let mut frontier: Vec<u32> = vec![0];
    let mut len = 0usize;
    while !frontier.is_empty() && len < max_len && rank > 0 {
        let mut next = Vec::new();
        for &pi in &frontier {
            let p = nodes[pi as usize];
            for code in 0..2 * rank {
                let l = Letter::from_code(code, rank);
                if p.len > 0 && p.letter == l.inv() {
                    continue;
                }
                let m = p.m * letters[code];
                if m.d.norm_sqr() > explore {
                    continue;
                }
                if surface && dedup.find(&m, &nodes) {
                    continue;
                }
                if nodes.len() >= cap {
                    return Err(Error::ElementBudget(cap));
                }
                let log_d = extend_log(&p.m, p.log_d, &letters[code], logs[code]);
                let idx = nodes.len() as u32;
                nodes.push(Element { m, log_d, parent: pi, letter: l, len: p.len + 1 });
                if surface {
                    dedup.insert(&m, idx);
                }
                next.push(idx);
            }
        }
        frontier = next;
        len += 1;
    }

    let (members, shell_of, n_shells) = match trunc {
        Truncation::WordLength(_) => {
            let members: Vec<u32> = (0..nodes.len() as u32).collect();
            let shell_of = nodes.iter().map(|e| e.len).collect();
            let n = nodes.last().map(|e| e.len as usize + 1).unwrap_or(1);
            (members, shell_of, n)
        }
        Truncation::Ball { .. } => {
            // dyadic bands in |d|², outermost band last
            let n = (limit.log2().floor() as usize + 1).max(1);
            let mut members = Vec::new();
            let mut shell_of = Vec::new();
            for (i, e) in nodes.iter().enumerate() {
                let d2 = e.m.d.norm_sqr();
                if d2 <= limit {
                    members.push(i as u32);
                    shell_of.push(ball_shell(d2, limit, n) as u16);
                }
            }
            (members, shell_of, n)
        }
    };
    Ok(EnumeratedGroup { group: g.clone(), truncation: trunc, dedup_tol, nodes, members, shell_of, n_shells })
}

fn ball_limits(radius: f64, slack: f64) -> Result<(f64, f64, usize)> {
    if !(radius >= 0.0) || !(slack >= 1.0) {
        return Err(Error::Domain(format!("ball radius {radius}, slack {slack}")));
    }
    let t = radius.cosh().powi(2);
    Ok((t, t * slack, (t.log2().floor() as usize + 1).max(1)))
}

// dyadic band of |d|² below the limit, outermost band last
fn ball_shell(d2: f64, limit: f64, n: usize) -> usize {
    let k = ((limit / d2.max(1.0)).log2().floor() as usize).min(n - 1);
    n - 1 - k
}

/// A group element met by [`for_each_element`].
#[derive(Clone, Copy, Debug)]
pub struct Visit {
    pub m: Moebius,
    pub log_d: C64,
    /// Value of the character given to the walk.
    pub chi: C64,
    pub shell: usize,
}

/// Calls `f` on every element of the truncation without storing them, and
/// returns the shell count. Free groups are walked depth first; surface groups
/// go through the deduplicated enumeration.
pub fn for_each_element<F>(g: &GroupPresentation, trunc: Truncation, chi: &[C64], cap: usize, mut f: F) -> Result<usize>
where
    F: FnMut(&Visit),
{
    let rank = g.rank();
    if chi.len() != rank {
        return Err(Error::InvalidGroup(format!("{} character values for {rank} generators", chi.len())));
    }
    if let GroupKind::Surface { .. } = g.kind {
        let e = enumerate(g, trunc, cap)?;
        let vals = e.homomorphism_values(chi);
        for (k, &i) in e.members.iter().enumerate() {
            let el = &e.nodes[i as usize];
            f(&Visit { m: el.m, log_d: el.log_d, chi: vals[i as usize], shell: e.shell_of[k] as usize });
        }
        return Ok(e.n_shells);
    }
    let letters: Vec<Moebius> = (0..2 * rank)
        .map(|c| g.letter_matrix(Letter::from_code(c, rank)).expect("valid letter"))
        .collect();
    let chis: Vec<C64> = (0..2 * rank).map(|c| if c < rank { chi[c] } else { chi[c - rank].inv() }).collect();
    let logs = g.letter_logs();
    let (max_len, limit, explore, n_shells) = match trunc {
        Truncation::WordLength(l) => (l, f64::INFINITY, f64::INFINITY, l + 1),
        Truncation::Ball { radius, slack } => {
            let (t, e, n) = ball_limits(radius, slack)?;
            (usize::MAX, t, e, n)
        }
    };
    let shell = |len: usize, m: &Moebius| match trunc {
        Truncation::WordLength(_) => len,
        Truncation::Ball { .. } => ball_shell(m.d.norm_sqr(), limit, n_shells),
    };
    let one = C64::new(1.0, 0.0);
    f(&Visit { m: Moebius::IDENTITY, log_d: C64::new(0.0, 0.0), chi: one, shell: shell(0, &Moebius::IDENTITY) });
    let mut count = 1usize;
    // (matrix, log d, character, length, last letter code)
    let mut stack: Vec<(Moebius, C64, C64, usize, usize)> = vec![(Moebius::IDENTITY, C64::new(0.0, 0.0), one, 0, usize::MAX)];
    while let Some((pm, pl, pc, len, last)) = stack.pop() {
        if len >= max_len {
            continue;
        }
        for code in 0..2 * rank {
            if last != usize::MAX && (code + rank) % (2 * rank) == last {
                continue;
            }
            let m = pm * letters[code];
            let d2 = m.d.norm_sqr();
            if d2 > explore {
                continue;
            }
            count += 1;
            if count > cap {
                return Err(Error::ElementBudget(cap));
            }
            let ld = extend_log(&pm, pl, &letters[code], logs[code]);
            let c = pc * chis[code];
            if d2 <= limit {
                f(&Visit { m, log_d: ld, chi: c, shell: shell(len + 1, &m) });
            }
            stack.push((m, ld, c, len + 1, code));
        }
    }
    Ok(n_shells)
}

impl EnumeratedGroup {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn member(&self, k: usize) -> &Element {
        &self.nodes[self.members[k] as usize]
    }

    pub fn iter(&self) -> impl Iterator<Item = &Element> + '_ {
        self.members.iter().map(move |&i| &self.nodes[i as usize])
    }

    pub fn word(&self, node: u32) -> Word {
        let mut v = Vec::new();
        let mut i = node;
        while i != 0 && i != u32::MAX {
            let e = &self.nodes[i as usize];
            v.push(e.letter);
            i = e.parent;
        }
        v.reverse();
        Word(v)
    }

    /// Evaluates a homomorphism on every node, given its values on generators.
    pub fn homomorphism_values(&self, values: &[C64]) -> Vec<C64> {
        let mut out = vec![C64::new(1.0, 0.0); self.nodes.len()];
        for i in 1..self.nodes.len() {
            let e = &self.nodes[i];
            let v = values[e.letter.generator as usize];
            let v = if e.letter.inverse { v.inv() } else { v };
            out[i] = out[e.parent as usize] * v;
        }
        out
    }
}

pub fn dirichlet_membership(e: &EnumeratedGroup, z: C64) -> bool {
    DirichletTester::new(e).contains(z)
}

pub fn fundamental_domain_grid(
    e: &EnumeratedGroup,
    radial_nodes: usize,
    angular_nodes: usize,
    cusp_cutoff: f64,
) -> Result<QuadratureDomain> {
    QuadratureDomain::fundamental(Arc::new(DirichletTester::new(e)), radial_nodes, angular_nodes, cusp_cutoff)
}

pub fn orbit(e: &EnumeratedGroup, z0: C64) -> Vec<C64> {
    e.iter().map(|el| el.m.apply_c(z0)).collect()
}

/// Attracting fixed points of the loxodromic members, projected to the circle.
pub fn limit_set_sample(e: &EnumeratedGroup) -> Vec<C64> {
    let mut pts: Vec<C64> = Vec::new();
    for el in e.iter() {
        let m = el.m;
        if m.classify() != Kind::Loxodromic {
            continue;
        }
        let Some(p) = attracting_fixed_point(&m) else { continue };
        let p = p / p.norm();
        if !pts.iter().any(|q| (q - p).norm() < 1e-9) {
            pts.push(p);
        }
    }
    pts
}

pub fn attracting_fixed_point(m: &Moebius) -> Option<C64> {
    if m.c.norm() < 1e-300 {
        return None;
    }
    let disc = ((m.d - m.a) * (m.d - m.a) + 4.0 * m.b * m.c).sqrt();
    let roots = [(m.a - m.d + disc) / (2.0 * m.c), (m.a - m.d - disc) / (2.0 * m.c)];
    roots.into_iter().min_by(|p, q| {
        (m.c * p + m.d).norm().partial_cmp(&(m.c * q + m.d).norm()).unwrap().reverse()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn w(s: &str) -> Word {
        s.parse().unwrap()
    }

    #[test]
    fn streaming_walk_matches_enumeration() {
        let g = punctured_torus_group(3.0, 3.0).unwrap();
        for trunc in [Truncation::WordLength(5), Truncation::Ball { radius: 3.0, slack: 4.0 }] {
            let e = enumerate(&g, trunc, DEFAULT_ELEMENT_CAP).unwrap();
            let chi = [C64::new(0.0, 1.0), C64::new(2.0, 0.0)];
            let vals = e.homomorphism_values(&chi);
            let mut sum_e = C64::new(0.0, 0.0);
            for (k, &i) in e.members.iter().enumerate() {
                let el = &e.nodes[i as usize];
                sum_e += el.m.d * el.log_d * vals[i as usize] * (e.shell_of[k] as f64 + 1.0);
            }
            let mut sum_w = C64::new(0.0, 0.0);
            let mut n = 0;
            let shells = for_each_element(&g, trunc, &chi, DEFAULT_ELEMENT_CAP, |v| {
                sum_w += v.m.d * v.log_d * v.chi * (v.shell as f64 + 1.0);
                n += 1;
            })
            .unwrap();
            assert_eq!(n, e.len());
            assert_eq!(shells, e.n_shells);
            assert!((sum_e - sum_w).norm() < 1e-9 * sum_e.norm());
        }
        let oct = genus_two_octagon().unwrap();
        let mut n = 0;
        for_each_element(&oct, Truncation::WordLength(2), &[C64::new(1.0, 0.0); 4], 1000, |_| n += 1).unwrap();
        assert_eq!(n, enumerate_elements(&oct, 2).unwrap().len());
    }

    #[test]
    fn modular_torus_traces() {
        let g = punctured_torus_group(3.0, 3.0).unwrap();
        assert!((trace_squared(&g, &w("A")).unwrap() - 9.0).norm() < 1e-12);
        assert!((trace_squared(&g, &w("B")).unwrap() - 9.0).norm() < 1e-12);
        let tab = g.word_matrix(&w("AB")).unwrap().trace();
        assert!((tab.re.abs() - 3.0).abs() < 1e-12);
        let comm = g.word_matrix(&w("ABab")).unwrap();
        assert!((comm.trace() + 2.0).norm() < 1e-9);
        assert_eq!(comm.classify(), Kind::Parabolic);
        assert!((trace_squared(&g, &w("ABab")).unwrap() - 4.0).norm() < 1e-9);
        assert_eq!(g.signature, Signature { genus: 1, punctures: 1 });
    }

    #[test]
    fn explicit_modular_realization() {
        let a = Moebius::real(1.0, 1.0, 1.0, 2.0).unwrap();
        let b = Moebius::real(1.0, -1.0, -1.0, 2.0).unwrap();
        let comm = a * b * a.inverse() * b.inverse();
        assert!((comm.trace() + 2.0).norm() < 1e-12);
        assert!(((a * b).trace() - 3.0).norm() < 1e-12);
        assert_eq!(markov_third(3.0, 3.0).unwrap(), 3.0);
    }

    #[test]
    fn torus_errors() {
        assert!(matches!(punctured_torus_group(2.0, 3.0), Err(Error::Degenerate(_))));
        assert!(matches!(punctured_torus_group(2.5, 2.5), Err(Error::NoRealSolution(_))));
        assert!(matches!(pinch_path(0.0), Err(Error::Domain(_))));
        assert!(matches!(pinch_path(1.5), Err(Error::Domain(_))));
    }

    #[test]
    fn short_geodesic_fixture() {
        let x = 2.1;
        let y = x / 0.1f64.sqrt();
        let g = punctured_torus_group(x, y).unwrap();
        let la = geodesic_length(&g.generators[0]).unwrap();
        assert!((la - 2.0 * 1.05f64.acosh()).abs() < 1e-12);
        assert!((markov_third(x, y).unwrap() - y).abs() < 1e-9);
        let comm = g.word_matrix(&w("ABab")).unwrap();
        assert!((comm.trace() + 2.0).norm() < 1e-9);
    }

    #[test]
    fn pinch_path_examples() {
        let (x, y, z) = pinch_traces(1.0).unwrap();
        assert_eq!((x, y, z), (3.0, 3.0, 3.0));
        let g = pinch_path(0.0005).unwrap();
        let la = geodesic_length(&g.generators[0]).unwrap();
        assert!((la - 2.0 * 1.00025f64.acosh()).abs() < 1e-12);
        assert!((la - 0.044721).abs() < 1e-5);
        let us: Vec<f64> = (1..=50).map(|k| k as f64 / 50.0).collect();
        let mut prev_len = 0.0;
        let mut prev_tr = 0.0;
        for &u in &us {
            let g = pinch_path(u).unwrap();
            let l = geodesic_length(&g.generators[0]).unwrap();
            let t = (trace_squared(&g, &w("A")).unwrap() - 4.0).norm();
            assert!(l > prev_len && t > prev_tr);
            prev_len = l;
            prev_tr = t;
            let comm = g.word_matrix(&w("ABab")).unwrap();
            assert!((comm.trace() + 2.0).norm() < 1e-8, "u = {u}");
        }
        let g = pinch_path(1e-3).unwrap();
        assert!(((trace_squared(&g, &w("A")).unwrap()).re - 2.001f64.powi(2)).abs() < 1e-10);
    }

    #[test]
    fn word_parsing_and_errors() {
        assert_eq!(w("ABab").to_string(), "ABab");
        assert_eq!(w("AaB").reduced(), w("B"));
        assert!("A1".parse::<Word>().is_err());
        let g = punctured_torus_group(3.0, 3.0).unwrap();
        assert!(matches!(trace_squared(&g, &w("C")), Err(Error::InvalidWord(_))));
    }

    #[test]
    fn enumeration_counts() {
        let g = punctured_torus_group(3.0, 3.0).unwrap();
        assert_eq!(enumerate_elements(&g, 0).unwrap().len(), 1);
        assert_eq!(enumerate_elements(&g, 1).unwrap().len(), 5);
        assert_eq!(enumerate_elements(&g, 2).unwrap().len(), 17);
        for l in 0..=6 {
            let expect = 1 + (1..=l).map(|k| 4 * 3usize.pow(k as u32 - 1)).sum::<usize>();
            assert_eq!(enumerate_elements(&g, l).unwrap().len(), expect);
        }
    }

    #[test]
    fn enumeration_budget() {
        let g = punctured_torus_group(3.0, 3.0).unwrap();
        assert!(matches!(enumerate(&g, Truncation::WordLength(8), 1000), Err(Error::ElementBudget(1000))));
    }

    #[test]
    fn enumeration_is_closed_under_inversion() {
        let g = punctured_torus_group(3.0, 3.0).unwrap();
        let e = enumerate_elements(&g, 4).unwrap();
        for el in e.iter() {
            let inv = el.m.inverse();
            assert!(e.iter().any(|o| o.m.projective_distance(&inv) < 1e-9));
        }
        for (i, el) in e.iter().enumerate().skip(1).step_by(7) {
            let word = e.word(e.members[i]);
            assert_eq!(word.len(), el.len as usize);
            assert!(g.word_matrix(&word).unwrap().max_norm_distance(&el.m) < 1e-12);
        }
    }

    #[test]
    fn log_branch_matches_word_continuation() {
        let g = punctured_torus_group(3.0, 3.0).unwrap();
        let e = enumerate_elements(&g, 5).unwrap();
        for k in (0..e.len()).step_by(13) {
            let el = e.member(k);
            let (_, ld) = g.word_log_d(&e.word(e.members[k])).unwrap();
            assert!((ld - el.log_d).norm() < 1e-10);
            let r = (el.log_d.exp() / el.m.d).re;
            assert!((r.abs() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn ball_enumeration_contains_all_short_elements() {
        let g = punctured_torus_group(3.0, 3.0).unwrap();
        let r = 3.0;
        let ball = enumerate_ball(&g, r, 4.0).unwrap();
        let t = r.cosh().powi(2);
        assert!(ball.iter().all(|e| e.m.d.norm_sqr() <= t));
        let words = enumerate_elements(&g, 8).unwrap();
        for w in words.iter().filter(|e| e.m.d.norm_sqr() <= t) {
            assert!(ball.iter().any(|b| b.m.max_norm_distance(&w.m) < 1e-9));
        }
        let wide = enumerate_ball(&g, r, 50.0).unwrap();
        assert_eq!(wide.len(), ball.len());
        assert_eq!(ball.shell_of.iter().map(|&s| s as usize).max().unwrap() + 1, ball.n_shells);
    }

    #[test]
    fn surface_group_dedup_and_sign() {
        let g = genus_two_octagon().unwrap();
        assert_eq!(sl2_lift_sign(&g).unwrap(), 1);
        let e = enumerate_elements(&g, 3).unwrap();
        // no duplicates up to sign
        let v: Vec<Moebius> = e.iter().map(|x| x.m).collect();
        for i in 0..v.len() {
            for j in 0..i {
                assert!(v[i].projective_distance(&v[j]) > 1e-8);
            }
        }
        // words of length ≤ 3 of a surface group with one relation of length 8 are distinct
        assert_eq!(e.len(), 1 + 8 + 8 * 7 + 8 * 49);
        let free = punctured_torus_group(3.0, 3.0).unwrap();
        assert_eq!(sl2_lift_sign(&free).unwrap(), 1);
    }

    #[test]
    fn surface_relation_negative() {
        let mut g = genus_two_octagon().unwrap();
        g.generators[0] = g.generators[0] * Moebius::disc_translation(c(0.01, 0.0)).unwrap();
        assert!(matches!(sl2_lift_sign(&g), Err(Error::RelationNotSatisfied(_))));
        let gens = g.generators.clone();
        assert!(GroupPresentation::new(gens, GroupKind::Surface { genus: 2 }, g.signature).is_err());
    }

    #[test]
    fn invalid_generators_rejected() {
        let not_disc = Moebius::real(2.0, 0.0, 0.0, 0.5).unwrap();
        assert!(GroupPresentation::cyclic(not_disc).is_err());
        assert!(GroupPresentation::cyclic(Moebius::rotation(0.5)).is_err());
    }

    #[test]
    fn geodesic_length_examples() {
        let m = Moebius::real(1.5, 0.0, 0.0, 1.0 / 1.5).unwrap();
        let t = m.trace().re;
        assert!((geodesic_length(&m).unwrap() - 2.0 * (t / 2.0).acosh()).abs() < 1e-14);
        let three = Moebius::real(1.0, 1.0, 1.0, 2.0).unwrap();
        assert!((geodesic_length(&three).unwrap() - 1.9248473002384139).abs() < 1e-12);
        assert_eq!(geodesic_length(&three.negated()).unwrap(), geodesic_length(&three).unwrap());
        assert!(geodesic_length(&Moebius::real(1.0, 1.0, 0.0, 1.0).unwrap()).is_err());
        let eps = Moebius::real(1.0 + 1e-3, 0.0, 0.0, 1.0 / (1.0 + 1e-3)).unwrap();
        assert!(geodesic_length(&eps).unwrap() < 3e-3);
        let mut rng = rand::rngs::StdRng::seed_from_u64(9);
        for _ in 0..20 {
            let h = Moebius::disc_translation(C64::from_polar(rng.gen_range(0.0..0.9), rng.gen_range(0.0..6.3)))
                .unwrap();
            let l0 = geodesic_length(&three).unwrap();
            assert!((geodesic_length(&three.conjugate_by(&h)).unwrap() - l0).abs() < 1e-10);
        }
    }

    #[test]
    fn orbit_examples() {
        let z0 = c(0.2, 0.1);
        let triv = enumerate_elements(&GroupPresentation::trivial(), 5).unwrap();
        assert_eq!(orbit(&triv, z0), vec![z0]);
        let g = punctured_torus_group(3.0, 3.0).unwrap();
        let e = enumerate_elements(&g, 5).unwrap();
        assert!(orbit(&e, z0).iter().all(|p| p.norm() < 1.0));
        // parabolic cyclic group: the orbit of 0 runs into the fixed point
        let par = g.word_matrix(&w("ABab")).unwrap();
        let fp = (par.a - par.d) / (2.0 * par.c);
        assert!((fp.norm() - 1.0).abs() < 1e-6);
        let cyc = GroupPresentation::cyclic(par).unwrap();
        let pts: Vec<C64> = {
            let mut m = Moebius::IDENTITY;
            (0..200)
                .map(|_| {
                    m = m * par;
                    m.apply_c(c(0.0, 0.0))
                })
                .collect()
        };
        let dists: Vec<f64> = pts.iter().map(|p| (p - fp).norm()).collect();
        assert!(dists[199] < dists[20] && dists[20] < dists[2] && dists[199] < 0.05);
        let ec = enumerate_elements(&cyc, 10).unwrap();
        assert_eq!(ec.len(), 21);
    }

    #[test]
    fn limit_set_examples() {
        let lox = Moebius::disc_translation(c(0.5, 0.0)).unwrap();
        let e = enumerate_elements(&GroupPresentation::cyclic(lox).unwrap(), 6).unwrap();
        let pts = limit_set_sample(&e);
        assert_eq!(pts.len(), 2);
        let g = punctured_torus_group(3.0, 3.0).unwrap();
        let p6 = limit_set_sample(&enumerate_elements(&g, 6).unwrap());
        let p8 = limit_set_sample(&enumerate_elements(&g, 8).unwrap());
        assert!(p8.len() > p6.len());
        assert!(p8.iter().all(|p| (p.norm() - 1.0).abs() < 1e-9));
    }

    #[test]
    fn dirichlet_examples() {
        let g = punctured_torus_group(3.0, 3.0).unwrap();
        let e = enumerate_elements(&g, 4).unwrap();
        assert!(dirichlet_membership(&e, c(0.0, 0.0)));
        for el in e.iter().skip(1).take(30) {
            assert!(!dirichlet_membership(&e, el.m.apply_c(c(0.0, 0.0))));
        }
    }

    #[test]
    fn dirichlet_tiling() {
        let g = punctured_torus_group(3.0, 3.0).unwrap();
        let e = enumerate_ball(&g, 4.0, 4.0).unwrap();
        let tester = DirichletTester::new(&e);
        let mut rng = rand::rngs::StdRng::seed_from_u64(11);
        let mut ties = 0;
        for _ in 0..1000 {
            let z = C64::from_polar(rng.gen_range(0.0f64..0.8).sqrt(), rng.gen_range(0.0..6.3));
            let hits = e.iter().filter(|el| tester.contains(el.m.apply_c(z))).count();
            if hits != 1 {
                ties += 1;
                assert!(hits >= 1);
            }
        }
        assert!(ties <= 5, "{ties}");
    }
}
