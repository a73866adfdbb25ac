//! Dimension and area formulas, with bookkeeping for pinching curves.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// A surface of genus g with n punctures.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SurfaceType {
    pub genus: u32,
    pub punctures: u32,
}

impl SurfaceType {
    pub fn new(genus: u32, punctures: u32) -> Result<Self> {
        let t = SurfaceType { genus, punctures };
        t.check()?;
        Ok(t)
    }

    /// −χ = 2g − 2 + n.
    pub fn neg_euler(&self) -> i64 {
        2 * self.genus as i64 - 2 + self.punctures as i64
    }

    pub fn is_stable(&self) -> bool {
        self.neg_euler() > 0
    }

    fn check(&self) -> Result<()> {
        if !self.is_stable() {
            return Err(Error::Unstable(self.genus, self.punctures));
        }
        Ok(())
    }
}

/// [s], the largest integer strictly below s.
pub fn floor_strict(s: f64) -> i64 {
    s.ceil() as i64 - 1
}

/// (2s − 1)(g − 1) + n[s].
pub fn dim_cusp_forms(t: SurfaceType, s: f64) -> Result<u64> {
    t.check()?;
    if !(s > 1.0) {
        return Err(Error::Domain(format!("cusp form dimension needs s > 1, got {s}")));
    }
    let v = (2.0 * s - 1.0) * (t.genus as f64 - 1.0) + t.punctures as f64 * floor_strict(s) as f64;
    let r = v.round();
    if (v - r).abs() > 1e-9 || r < 0.0 {
        return Err(Error::NonIntegralDimension(v));
    }
    Ok(r as u64)
}

/// h⁰ = deg + 1 − g, asserted only for deg ≥ 2g − 1.
pub fn riemann_roch_h0(deg: i64, genus: u32) -> Result<i64> {
    if deg < 2 * genus as i64 - 1 {
        return Err(Error::OutsideTopologicalRange { deg, genus });
    }
    Ok(deg + 1 - genus as i64)
}

/// h⁰ of the canonical bundle, which has degree 2g − 2.
pub fn h0_canonical(genus: u32) -> i64 {
    genus as i64
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PinchMove {
    /// Pinch a nonseparating curve on the given part: (g, n) → (g − 1, n + 2).
    Nonseparating { part: usize },
    /// Pinch a separating curve: (g, n) → (g₁, n₁) + (g₂, n₂).
    Separating { part: usize, left: SurfaceType, right: SurfaceType },
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PinchPlan {
    pub moves: Vec<PinchMove>,
}

impl PinchPlan {
    pub fn new(moves: Vec<PinchMove>) -> Self {
        PinchPlan { moves }
    }

    pub fn len(&self) -> usize {
        self.moves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.moves.is_empty()
    }
}

/// The parts left after carrying out the plan, in order of creation.
pub fn pinch_parts(t: SurfaceType, plan: &PinchPlan) -> Result<Vec<SurfaceType>> {
    t.check()?;
    let mut parts = vec![t];
    for (k, mv) in plan.moves.iter().enumerate() {
        match *mv {
            PinchMove::Nonseparating { part } => {
                let p = *parts.get(part).ok_or_else(|| Error::InvalidPlan(format!("move {k}: no part {part}")))?;
                if p.genus == 0 {
                    return Err(Error::InvalidPlan(format!("move {k}: genus-zero part has no nonseparating curve")));
                }
                let child = SurfaceType { genus: p.genus - 1, punctures: p.punctures + 2 };
                if !child.is_stable() {
                    return Err(Error::InvalidPlan(format!("move {k}: unstable child {child:?}")));
                }
                parts[part] = child;
            }
            PinchMove::Separating { part, left, right } => {
                let p = *parts.get(part).ok_or_else(|| Error::InvalidPlan(format!("move {k}: no part {part}")))?;
                if left.genus + right.genus != p.genus || left.punctures + right.punctures != p.punctures + 2 {
                    return Err(Error::InvalidPlan(format!("move {k}: {left:?} + {right:?} does not split {p:?}")));
                }
                if !left.is_stable() || !right.is_stable() {
                    return Err(Error::InvalidPlan(format!("move {k}: unstable child")));
                }
                // each side keeps at least the node as a puncture
                if left.punctures == 0 || right.punctures == 0 {
                    return Err(Error::InvalidPlan(format!("move {k}: a child lacks the node puncture")));
                }
                parts[part] = left;
                parts.push(right);
            }
        }
    }
    Ok(parts)
}

/// N_s(T) − |P|, checked against the sum over the parts.
pub fn boundary_dimension(t: SurfaceType, s: f64, plan: &PinchPlan) -> Result<i64> {
    if s.fract() != 0.0 || s < 2.0 {
        return Err(Error::NonIntegerS(s));
    }
    let parts = pinch_parts(t, plan)?;
    let top = dim_cusp_forms(t, s)? as i64 - plan.len() as i64;
    let bottom = parts.iter().map(|&p| dim_cusp_forms(p, s).map(|d| d as i64)).sum::<Result<i64>>()?;
    if top != bottom {
        return Err(Error::InvalidPlan(format!("dimension bookkeeping {top} ≠ {bottom}")));
    }
    Ok(top)
}

/// 2π(2g − 2 + n), curvature −1.
pub fn hyperbolic_area(t: SurfaceType) -> Result<f64> {
    t.check()?;
    Ok(2.0 * PI * t.neg_euler() as f64)
}

/// Σ area(parts) = area(T), compared exactly through 2g − 2 + n.
pub fn area_conservation_check(t: SurfaceType, plan: &PinchPlan) -> Result<bool> {
    let parts = pinch_parts(t, plan)?;
    Ok(parts.iter().map(|p| p.neg_euler()).sum::<i64>() == t.neg_euler())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn st(g: u32, n: u32) -> SurfaceType {
        SurfaceType::new(g, n).unwrap()
    }

    #[test]
    fn floor_strict_examples() {
        assert_eq!(floor_strict(2.0), 1);
        assert_eq!(floor_strict(2.5), 2);
        assert_eq!(floor_strict(1.0001), 1);
        assert_eq!(floor_strict(3.0), 2);
    }

    #[test]
    fn dimension_examples() {
        assert_eq!(dim_cusp_forms(st(2, 0), 2.0).unwrap(), 3);
        assert_eq!(dim_cusp_forms(st(1, 1), 2.0).unwrap(), 1);
        assert_eq!(dim_cusp_forms(st(1, 1), 3.0).unwrap(), 2);
        assert_eq!(dim_cusp_forms(st(2, 0), 2.5).unwrap(), 4);
        assert!(matches!(dim_cusp_forms(st(2, 0), 2.25), Err(Error::NonIntegralDimension(_))));
        assert_eq!(SurfaceType::new(1, 0), Err(Error::Unstable(1, 0)));
        assert_eq!(SurfaceType::new(0, 2), Err(Error::Unstable(0, 2)));
    }

    #[test]
    fn quadratic_differentials_match_teichmuller_dimension() {
        for g in 0..8 {
            for n in 0..8 {
                let t = SurfaceType { genus: g, punctures: n };
                if t.is_stable() {
                    assert_eq!(dim_cusp_forms(t, 2.0).unwrap() as i64, 3 * g as i64 - 3 + n as i64);
                }
            }
        }
    }

    #[test]
    fn riemann_roch_examples() {
        assert!(matches!(riemann_roch_h0(2, 2), Err(Error::OutsideTopologicalRange { deg: 2, genus: 2 })));
        assert_eq!(h0_canonical(2), 2);
        assert_eq!(riemann_roch_h0(3, 1).unwrap(), 3);
        assert_eq!(riemann_roch_h0(3, 2).unwrap(), 2);
        assert_eq!(riemann_roch_h0(-1, 0).unwrap(), 0);
    }

    #[test]
    fn boundary_examples() {
        let t = st(2, 0);
        let ns = PinchPlan::new(vec![PinchMove::Nonseparating { part: 0 }]);
        assert_eq!(boundary_dimension(t, 2.0, &ns).unwrap(), 2);
        assert_eq!(dim_cusp_forms(st(1, 2), 2.0).unwrap(), 2);
        let sep = PinchPlan::new(vec![PinchMove::Separating { part: 0, left: st(1, 1), right: st(1, 1) }]);
        assert_eq!(boundary_dimension(t, 2.0, &sep).unwrap(), 2);
        assert_eq!(boundary_dimension(t, 2.0, &PinchPlan::default()).unwrap(), 3);
        assert_eq!(boundary_dimension(t, 2.5, &ns), Err(Error::NonIntegerS(2.5)));
    }

    #[test]
    fn area_examples() {
        assert!((hyperbolic_area(st(2, 0)).unwrap() - 4.0 * PI).abs() < 1e-15);
        assert!((hyperbolic_area(st(1, 1)).unwrap() - 2.0 * PI).abs() < 1e-15);
        assert!((hyperbolic_area(st(0, 3)).unwrap() - 2.0 * PI).abs() < 1e-15);
        let t = st(2, 0);
        let ns = PinchPlan::new(vec![PinchMove::Nonseparating { part: 0 }]);
        assert!(area_conservation_check(t, &ns).unwrap());
        let sep = PinchPlan::new(vec![PinchMove::Separating { part: 0, left: st(1, 1), right: st(1, 1) }]);
        assert!(area_conservation_check(t, &sep).unwrap());
        // maximal pinching: three curves leave two pairs of pants
        let max = PinchPlan::new(vec![
            PinchMove::Separating { part: 0, left: st(1, 1), right: st(1, 1) },
            PinchMove::Nonseparating { part: 0 },
            PinchMove::Nonseparating { part: 1 },
        ]);
        assert_eq!(pinch_parts(t, &max).unwrap(), vec![st(0, 3), st(0, 3)]);
        assert!(area_conservation_check(t, &max).unwrap());
        assert_eq!(boundary_dimension(t, 2.0, &max).unwrap(), 0);
    }

    #[test]
    fn over_pinching_is_rejected() {
        let t = st(2, 0);
        let four = PinchPlan::new(vec![
            PinchMove::Separating { part: 0, left: st(1, 1), right: st(1, 1) },
            PinchMove::Separating { part: 0, left: st(0, 3), right: st(0, 3) },
        ]);
        assert!(matches!(area_conservation_check(t, &four), Err(Error::InvalidPlan(_))));
        let too_many = PinchPlan::new(vec![
            PinchMove::Nonseparating { part: 0 },
            PinchMove::Nonseparating { part: 0 },
            PinchMove::Nonseparating { part: 0 },
        ]);
        assert!(matches!(pinch_parts(t, &too_many), Err(Error::InvalidPlan(_))));
        let missing = PinchPlan::new(vec![PinchMove::Nonseparating { part: 3 }]);
        assert!(pinch_parts(t, &missing).is_err());
    }

    fn random_plan<R: Rng>(rng: &mut R, t: SurfaceType) -> PinchPlan {
        let mut parts = vec![t];
        let mut moves = Vec::new();
        for _ in 0..rng.gen_range(0..6) {
            let part = rng.gen_range(0..parts.len());
            let p = parts[part];
            if rng.gen_bool(0.5) && p.genus > 0 && (SurfaceType { genus: p.genus - 1, punctures: p.punctures + 2 }).is_stable() {
                moves.push(PinchMove::Nonseparating { part });
                parts[part] = SurfaceType { genus: p.genus - 1, punctures: p.punctures + 2 };
            } else {
                let g1 = rng.gen_range(0..=p.genus);
                let n1 = rng.gen_range(1..=p.punctures + 1);
                let l = SurfaceType { genus: g1, punctures: n1 };
                let r = SurfaceType { genus: p.genus - g1, punctures: p.punctures + 2 - n1 };
                if l.is_stable() && r.is_stable() {
                    moves.push(PinchMove::Separating { part, left: l, right: r });
                    parts[part] = l;
                    parts.push(r);
                }
            }
        }
        PinchPlan::new(moves)
    }

    #[test]
    fn random_plans_keep_books() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(11);
        for _ in 0..1000 {
            let t = SurfaceType { genus: rng.gen_range(0..5), punctures: rng.gen_range(0..5) };
            if !t.is_stable() {
                continue;
            }
            let plan = random_plan(&mut rng, t);
            for s in [2.0, 3.0] {
                let parts = pinch_parts(t, &plan).unwrap();
                let bottom: i64 = parts.iter().map(|&p| dim_cusp_forms(p, s).unwrap() as i64).sum();
                assert_eq!(boundary_dimension(t, s, &plan).unwrap(), bottom);
            }
            assert!(area_conservation_check(t, &plan).unwrap());
        }
    }
}
