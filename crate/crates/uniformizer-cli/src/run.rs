use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde_json::{json, Value};

use uniformizer::analysis::{
    automorphy_residual, bergman_kernel, c_s, kernel_mass, lp_norm, scalar_pairing, theta_series, wp_pairing,
    FormSpec, Norm,
};
use uniformizer::dimensions::{
    area_conservation_check, boundary_dimension, dim_cusp_forms, floor_strict, hyperbolic_area, pinch_parts,
    PinchMove, PinchPlan, SurfaceType,
};
use uniformizer::factors::{unitary_flat_solve, PeriodData};
use uniformizer::families::{
    asymptotic_sweep, gram_matrix, plumbing_length, plumbing_log_parameter, plumbing_parameter, FamilyPath,
    GramSettings, GroupPath, SweepSettings,
};
use uniformizer::fuchsian::{
    enumerate, fundamental_domain_grid, genus_two_octagon, geodesic_length, limit_set_sample, pinch_path,
    pinch_traces, punctured_torus_group, EnumeratedGroup, GroupKind, GroupPresentation, Letter, Truncation, Word,
    DEFAULT_ELEMENT_CAP,
};
use uniformizer::moebius::{b2_norm_estimate, radial_grid, schwarzian, Moebius};
use uniformizer::quadrature::QuadratureDomain;
use uniformizer::C64;

use crate::config::{Command, EnumerationSpec, GroupSpec, MapSpec, MoveSpec, QuadratureMode, RunConfig};
use crate::output::{svg_points, Table};

pub struct Output {
    pub results: Value,
    pub table: Table,
    pub svgs: Vec<(String, String)>,
}

type Res<T> = uniformizer::Result<T>;

fn cx(c: [f64; 2]) -> C64 {
    C64::new(c[0], c[1])
}

fn cval(z: C64, error: f64) -> Value {
    json!({ "re": z.re, "im": z.im, "error": error })
}

fn rval(v: f64, error: f64) -> Value {
    json!({ "value": v, "error": error })
}

fn group(cfg: &RunConfig) -> Res<GroupPresentation> {
    match cfg.group {
        GroupSpec::Trivial => Ok(GroupPresentation::trivial()),
        GroupSpec::PuncturedTorus { x, y } => punctured_torus_group(x, y),
        GroupSpec::Pinch { u } => pinch_path(u),
        GroupSpec::GenusTwoOctagon => genus_two_octagon(),
    }
}

fn truncation(cfg: &RunConfig) -> Truncation {
    match cfg.enumeration {
        EnumerationSpec::WordLength { length } => Truncation::WordLength(length),
        EnumerationSpec::Ball { radius, slack } => Truncation::Ball { radius, slack },
    }
}

fn enumeration(cfg: &RunConfig, g: &GroupPresentation) -> Res<EnumeratedGroup> {
    enumerate(g, truncation(cfg), DEFAULT_ELEMENT_CAP)
}

fn seeds(cfg: &RunConfig) -> Vec<Vec<C64>> {
    cfg.seeds.iter().map(|h| h.iter().map(|&c| cx(c)).collect()).collect()
}

fn is_trivial(g: &GroupPresentation) -> bool {
    matches!(g.kind, GroupKind::Free { rank: 0 }) || g.generators.is_empty()
}

// fundamental-domain grid, or the disc grid for the trivial group
fn domain(cfg: &RunConfig, g: &GroupPresentation) -> Res<QuadratureDomain> {
    let q = &cfg.quadrature;
    if is_trivial(g) {
        return QuadratureDomain::disc(q.radial, q.angular, q.t_max);
    }
    let tester = enumeration(cfg, g)?;
    fundamental_domain_grid(&tester, q.radial, q.angular, q.cusp_cutoff)
}

fn forms(cfg: &RunConfig, g: &GroupPresentation) -> Res<Vec<FormSpec>> {
    let e = Arc::new(enumeration(cfg, g)?);
    seeds(cfg).into_iter().map(|h| FormSpec::canonical(h, e.clone(), cfg.s)).collect()
}

fn word_text(w: &Word) -> String {
    if w.is_empty() {
        "1".into()
    } else {
        w.to_string()
    }
}

pub fn run(cmd: Command, cfg: &RunConfig, seed: u64) -> Res<Output> {
    match cmd {
        Command::Orbit => orbit(cfg),
        Command::LimitSet => limit_set(cfg),
        Command::FundamentalDomain => fundamental_domain(cfg),
        Command::ThetaEval => theta_eval(cfg),
        Command::AutomorphyCheck => automorphy_check(cfg),
        Command::KernelMass => kernel_mass_cmd(cfg, seed),
        Command::Norms => norms(cfg),
        Command::Pairing => pairing(cfg),
        Command::Gram => gram(cfg),
        Command::Dimension => dimension(cfg),
        Command::BoundaryDimension => boundary(cfg),
        Command::FlatSolve => flat_solve(cfg),
        Command::SchwarzianCheck => schwarzian_check(cfg),
        Command::PinchSweep => pinch_sweep(cfg),
        Command::AsymptoticSweep => sweep(cfg),
    }
}

fn orbit(cfg: &RunConfig) -> Res<Output> {
    let g = group(cfg)?;
    let e = enumeration(cfg, &g)?;
    let z0 = cx(cfg.points[0]);
    let mut table = Table::new(&["word", "re", "im"]);
    let mut pts = Vec::with_capacity(e.len());
    for (k, el) in e.iter().enumerate() {
        let z = el.m.apply_c(z0);
        pts.push(z);
        table.push(vec![word_text(&e.word(e.members[k])), Table::num(z.re), Table::num(z.im)]);
    }
    let max_r = pts.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let svgs = if cfg.output.svg { vec![("orbit.svg".to_string(), svg_points(&pts, 0.004, "#1f4e9c"))] } else { vec![] };
    Ok(Output {
        results: json!({ "points": e.len(), "max_modulus": rval(max_r, 0.0), "shells": e.n_shells }),
        table,
        svgs,
    })
}

fn limit_set(cfg: &RunConfig) -> Res<Output> {
    let g = group(cfg)?;
    let e = enumeration(cfg, &g)?;
    let pts = limit_set_sample(&e);
    let mut table = Table::new(&["re", "im"]);
    for z in &pts {
        table.push(vec![Table::num(z.re), Table::num(z.im)]);
    }
    let gap = pts.iter().map(|z| 1.0 - z.norm()).fold(0.0, f64::max);
    Ok(Output {
        results: json!({ "points": pts.len(), "max_distance_to_circle": rval(gap, 0.0) }),
        table,
        svgs: vec![("limit-set.svg".to_string(), svg_points(&pts, 0.003, "#7a1f1f"))],
    })
}

fn fundamental_domain(cfg: &RunConfig) -> Res<Output> {
    let g = group(cfg)?;
    let q = domain(cfg, &g)?;
    let area = q.hyperbolic_area();
    let refined = q.doubled()?.hyperbolic_area();
    let mut table = Table::new(&["re", "im", "weight"]);
    for (z, w) in q.nodes.iter().zip(&q.weights) {
        table.push(vec![Table::num(z.re), Table::num(z.im), Table::num(*w)]);
    }
    let t = SurfaceType { genus: g.signature.genus, punctures: g.signature.punctures };
    let reference = hyperbolic_area(t).ok().map(|a| a / 4.0);
    Ok(Output {
        results: json!({
            "nodes": q.len(),
            "lambda_area": rval(refined, (refined - area).abs() + q.error_estimate),
            "reference": reference,
            "excluded": q.tail.description,
        }),
        table,
        svgs: vec![("fundamental-domain.svg".to_string(), svg_points(&q.nodes, 0.0035, "#2b6b2b"))],
    })
}

fn theta_eval(cfg: &RunConfig) -> Res<Output> {
    let g = group(cfg)?;
    let fs = forms(cfg, &g)?;
    let mut table = Table::new(&["seed", "z_re", "z_im", "re", "im", "tail", "shells", "diverging"]);
    let mut out = Vec::new();
    for (i, f) in fs.iter().enumerate() {
        for &p in &cfg.points {
            let z = cx(p);
            let t = theta_series(f, z)?;
            table.push(vec![
                i.to_string(),
                Table::num(z.re),
                Table::num(z.im),
                Table::num(t.value.re),
                Table::num(t.value.im),
                Table::num(t.tail),
                t.shells_used.to_string(),
                t.diverging.to_string(),
            ]);
            out.push(json!({ "seed": i, "z": p, "value": cval(t.value, t.tail), "diverging": t.diverging }));
        }
    }
    Ok(Output { results: json!({ "values": out }), table, svgs: vec![] })
}

fn automorphy_check(cfg: &RunConfig) -> Res<Output> {
    let g = group(cfg)?;
    let fs = forms(cfg, &g)?;
    let words = cfg
        .words
        .iter()
        .map(|w| w.parse::<Word>())
        .collect::<Result<Vec<_>, _>>()?;
    let mut table = Table::new(&["seed", "word", "z_re", "z_im", "residual", "tail_bound", "within_10x_tail"]);
    let mut worst: f64 = 0.0;
    for (i, f) in fs.iter().enumerate() {
        for w in &words {
            for &p in &cfg.points {
                let z = cx(p);
                let r = automorphy_residual(f, w, z)?;
                let ratio = r.residual / r.tail_bound.max(f64::MIN_POSITIVE);
                worst = worst.max(ratio);
                table.push(vec![
                    i.to_string(),
                    word_text(w),
                    Table::num(z.re),
                    Table::num(z.im),
                    Table::num(r.residual),
                    Table::num(r.tail_bound),
                    (r.residual <= 10.0 * r.tail_bound).to_string(),
                ]);
            }
        }
    }
    Ok(Output { results: json!({ "max_residual_over_tail": worst, "passes": worst <= 10.0 }), table, svgs: vec![] })
}

// Monte-Carlo mass: t = artanh r uniform on [0, t_max], θ uniform
fn monte_carlo_mass(w: C64, s: f64, t_max: f64, n: usize, seed: u64) -> Res<(f64, f64)> {
    let mut rng = StdRng::seed_from_u64(seed);
    let (mut sum, mut sum2) = (0.0, 0.0);
    for _ in 0..n {
        let t = rng.gen_range(0.0..t_max);
        let z = C64::from_polar(t.tanh(), rng.gen_range(0.0..2.0 * PI));
        let jac = t_max * 2.0 * PI * t.tanh() / t.cosh().powi(2);
        let v = jac * (1.0 - z.norm_sqr()).powf(s - 2.0) * bergman_kernel(z, w, s)?.norm();
        sum += v;
        sum2 += v * v;
    }
    let mean = sum / n as f64;
    let var = (sum2 / n as f64 - mean * mean).max(0.0);
    Ok((mean, 3.0 * (var / n as f64).sqrt()))
}

fn kernel_mass_cmd(cfg: &RunConfig, seed: u64) -> Res<Output> {
    let q = &cfg.quadrature;
    let mut table = Table::new(&["w_re", "w_im", "value", "error", "reference", "relative_deviation"]);
    let mut out = Vec::new();
    let grid = match q.mode {
        QuadratureMode::Grid => Some(QuadratureDomain::disc(q.radial, q.angular, q.t_max)?),
        QuadratureMode::MonteCarlo => None,
    };
    for &p in &cfg.points {
        let w = cx(p);
        let (value, error, reference) = match &grid {
            Some(d) => {
                let m = kernel_mass(w, cfg.s, d)?;
                (m.value, m.error, m.reference)
            }
            None => {
                let (v, e) = monte_carlo_mass(w, cfg.s, q.t_max, q.samples, seed)?;
                (v, e, c_s(cfg.s)? * (1.0 - w.norm_sqr()).powf(-cfg.s))
            }
        };
        let dev = (value - reference).abs() / reference;
        table.push(vec![
            Table::num(w.re),
            Table::num(w.im),
            Table::num(value),
            Table::num(error),
            Table::num(reference),
            Table::num(dev),
        ]);
        out.push(json!({ "w": p, "mass": rval(value, error), "reference": reference, "relative_deviation": dev }));
    }
    Ok(Output { results: json!({ "c_s": c_s(cfg.s)?, "masses": out }), table, svgs: vec![] })
}

fn norms(cfg: &RunConfig) -> Res<Output> {
    let g = group(cfg)?;
    let q = domain(cfg, &g)?;
    let fs = forms(cfg, &g)?;
    let mut table = Table::new(&["seed", "norm", "value", "error"]);
    let mut out = Vec::new();
    for (i, f) in fs.iter().enumerate() {
        let theta = |z: C64| theta_series(f, z).map(|t| t.value).unwrap_or(C64::new(f64::NAN, 0.0));
        let mut row = serde_json::Map::new();
        for (name, p) in [("L1", Norm::L1), ("L2", Norm::L2), ("Linf", Norm::Sup)] {
            let e = lp_norm(theta, p, cfg.s, &q)?;
            table.push(vec![i.to_string(), name.into(), Table::num(e.value), Table::num(e.error)]);
            row.insert(name.into(), rval(e.value, e.error));
        }
        out.push(Value::Object(row));
    }
    Ok(Output { results: json!({ "norms": out, "domain_nodes": q.len() }), table, svgs: vec![] })
}

fn pairing(cfg: &RunConfig) -> Res<Output> {
    let g = group(cfg)?;
    let fs = forms(cfg, &g)?;
    let hs = seeds(cfg);
    let q = domain(cfg, &g)?;
    let mut table = Table::new(&["i", "j", "scalar_re", "scalar_im", "scalar_error", "domain_re", "domain_im", "domain_error"]);
    let mut out = Vec::new();
    for i in 0..fs.len() {
        for j in i..fs.len() {
            let a = scalar_pairing(&fs[i], &hs[j])?;
            let (fa, fb) = (&fs[i], &fs[j]);
            let th = |f: &FormSpec, z: C64| theta_series(f, z).map(|t| t.value).unwrap_or(C64::new(f64::NAN, 0.0));
            let b = wp_pairing(|z| th(fa, z), |z| th(fb, z), cfg.s, &q)?;
            table.push(vec![
                i.to_string(),
                j.to_string(),
                Table::num(a.value.re),
                Table::num(a.value.im),
                Table::num(a.error),
                Table::num(b.value.re),
                Table::num(b.value.im),
                Table::num(b.error),
            ]);
            out.push(json!({
                "i": i, "j": j,
                "scalar_route": cval(a.value, a.error),
                "domain_route": cval(b.value, b.error),
                "agree": (a.value - b.value).norm() <= a.error + b.error,
            }));
        }
    }
    Ok(Output { results: json!({ "pairings": out }), table, svgs: vec![] })
}

fn gram(cfg: &RunConfig) -> Res<Output> {
    let g = group(cfg)?;
    let p = FamilyPath::constant(g.clone(), cfg.s, seeds(cfg))?;
    let settings = GramSettings {
        trunc: Truncation::Ball { radius: cfg.gram.ball_radius, slack: cfg.gram.slack },
        cap: DEFAULT_ELEMENT_CAP,
        rank_tol: cfg.gram.rank_tol,
    };
    let r = gram_matrix(&p, 1.0, &settings)?;
    let mut table = Table::new(&["i", "j", "re", "im", "error"]);
    for i in 0..r.matrix.nrows() {
        for j in 0..r.matrix.ncols() {
            let v = r.matrix[(i, j)];
            table.push(vec![i.to_string(), j.to_string(), Table::num(v.re), Table::num(v.im), Table::num(r.error)]);
        }
    }
    Ok(Output {
        results: json!({
            "eigenvalues": r.eigenvalues.iter().map(|&e| rval(e, r.error)).collect::<Vec<_>>(),
            "rank": r.rank,
            "fibre_dimension": p.fibre_dimension(1.0)?,
            "elements": r.elements,
            "asymmetry": r.asymmetry,
        }),
        table,
        svgs: vec![],
    })
}

fn surface(cfg: &RunConfig) -> SurfaceType {
    SurfaceType { genus: cfg.surface.genus, punctures: cfg.surface.punctures }
}

fn dimension(cfg: &RunConfig) -> Res<Output> {
    let t = SurfaceType::new(cfg.surface.genus, cfg.surface.punctures)?;
    let d = dim_cusp_forms(t, cfg.s)?;
    let area = hyperbolic_area(t)?;
    let mut table = Table::new(&["genus", "punctures", "s", "floor_strict_s", "dimension", "area_curvature_-1"]);
    table.push(vec![
        t.genus.to_string(),
        t.punctures.to_string(),
        Table::num(cfg.s),
        floor_strict(cfg.s).to_string(),
        d.to_string(),
        Table::num(area),
    ]);
    Ok(Output {
        results: json!({ "dimension": rval(d as f64, 0.0), "floor_strict_s": floor_strict(cfg.s), "area": rval(area, 0.0) }),
        table,
        svgs: vec![],
    })
}

fn boundary(cfg: &RunConfig) -> Res<Output> {
    let t = surface(cfg);
    let st = |s: crate::config::SurfaceSpec| SurfaceType { genus: s.genus, punctures: s.punctures };
    let plan = PinchPlan::new(
        cfg.plan
            .iter()
            .map(|m| match *m {
                MoveSpec::Nonseparating { part } => PinchMove::Nonseparating { part },
                MoveSpec::Separating { part, left, right } => PinchMove::Separating { part, left: st(left), right: st(right) },
            })
            .collect(),
    );
    let d = boundary_dimension(t, cfg.s, &plan)?;
    let parts = pinch_parts(t, &plan)?;
    let conserved = area_conservation_check(t, &plan)?;
    let mut table = Table::new(&["part", "genus", "punctures", "dimension", "area_curvature_-1"]);
    for (k, p) in parts.iter().enumerate() {
        table.push(vec![
            k.to_string(),
            p.genus.to_string(),
            p.punctures.to_string(),
            dim_cusp_forms(*p, cfg.s)?.to_string(),
            Table::num(hyperbolic_area(*p)?),
        ]);
    }
    Ok(Output {
        results: json!({
            "top_down": rval(d as f64, 0.0),
            "bottom_up": rval(parts.iter().map(|&p| dim_cusp_forms(p, cfg.s).map(|d| d as f64)).sum::<Res<f64>>()?, 0.0),
            "pinched_curves": plan.len(),
            "area_conserved": conserved,
        }),
        table,
        svgs: vec![],
    })
}

fn flat_solve(cfg: &RunConfig) -> Res<Output> {
    let p = cfg.period.as_ref().expect("validated");
    let g = p.tau.len();
    let tau = DMatrix::from_fn(g, g, |i, j| cx(p.tau[i][j]));
    let sigma = DVector::from_iterator(g, p.sigma.iter().map(|&c| cx(c)));
    let sp = DVector::from_iterator(g, p.sigma_prime.iter().map(|&c| cx(c)));
    let data = PeriodData::new(tau, sigma, sp)?;
    let sol = unitary_flat_solve(&data)?;
    let mut table = Table::new(&["i", "j", "re", "im"]);
    for i in 0..g {
        for j in 0..g {
            let v = sol.c[(i, j)];
            table.push(vec![i.to_string(), j.to_string(), Table::num(v.re), Table::num(v.im)]);
        }
    }
    Ok(Output {
        results: json!({
            "residual": sol.residual,
            "rank": sol.rank,
            "rank_deficient": sol.rank_deficient,
            "unitary_character": data.flat_values().iter().map(|v| cval(*v, 0.0)).collect::<Vec<_>>(),
        }),
        table,
        svgs: vec![],
    })
}

fn schwarzian_check(cfg: &RunConfig) -> Res<Output> {
    let grid = radial_grid(cfg.grid.radial, cfg.grid.r_max, cfg.grid.angles);
    let (f, poles, reference): (Box<dyn Fn(C64) -> C64 + Sync>, Vec<C64>, Option<f64>) = match &cfg.map {
        MapSpec::Koebe => (Box::new(|z: C64| z / ((1.0 - z) * (1.0 - z))), vec![C64::new(1.0, 0.0)], Some(6.0)),
        MapSpec::Moebius { a, b, c, d } => {
            let m = Moebius::new(cx(*a), cx(*b), cx(*c), cx(*d))?;
            let poles = if m.c.norm() > 0.0 { vec![-m.d / m.c] } else { vec![] };
            (Box::new(move |z| m.apply_c(z)), poles, Some(0.0))
        }
        MapSpec::Polynomial { coefficients } => {
            let cs: Vec<C64> = coefficients.iter().map(|&c| cx(c)).collect();
            (Box::new(move |z| cs.iter().rev().fold(C64::new(0.0, 0.0), |acc, &k| acc * z + k)), vec![], None)
        }
    };
    let radius = |z: C64| {
        let d = poles.iter().map(|p| (z - p).norm()).fold(1.0 - z.norm(), f64::min);
        0.5 * d
    };
    let mut table = Table::new(&["re", "im", "S_re", "S_im", "error", "weighted_modulus"]);
    let mut worst_err: f64 = 0.0;
    for &z in &grid {
        let s = schwarzian(&*f, z, radius(z))?;
        let wgt = (1.0 - z.norm_sqr()).powi(2);
        worst_err = worst_err.max(wgt * s.error);
        table.push(vec![
            Table::num(z.re),
            Table::num(z.im),
            Table::num(s.value.re),
            Table::num(s.value.im),
            Table::num(s.error),
            Table::num(wgt * s.value.norm()),
        ]);
    }
    let sf = |z: C64| schwarzian(&*f, z, radius(z)).map(|s| s.value).unwrap_or(C64::new(f64::NAN, 0.0));
    let b2 = b2_norm_estimate(&sf, &grid);
    Ok(Output {
        results: json!({ "b2_norm": rval(b2, worst_err), "reference": reference, "grid_points": grid.len() }),
        table,
        svgs: vec![],
    })
}

fn pinch_sweep(cfg: &RunConfig) -> Res<Output> {
    let mut table = Table::new(&[
        "u",
        "trace_x",
        "trace_y",
        "trace_z",
        "trace_sq_A",
        "length_A_curvature_-1",
        "length_expected",
        "log_plumbing_parameter",
        "plumbing_round_trip_length",
    ]);
    let mut rows = Vec::new();
    for u in cfg.path_samples() {
        let (x, y, z) = pinch_traces(u)?;
        let g = pinch_path(u)?;
        let a = g.word_matrix(&Word(vec![Letter { generator: 0, inverse: false }]))?;
        let len = geodesic_length(&a)?;
        let expected = 2.0 * ((2.0 + u) / 2.0).acosh();
        let log_t = plumbing_log_parameter(len)?;
        let t = plumbing_parameter(len)?;
        let back = if t > 0.0 { plumbing_length(C64::new(t, 0.0))? } else { f64::NAN };
        table.push(vec![
            Table::num(u),
            Table::num(x),
            Table::num(y),
            Table::num(z),
            Table::num(a.trace_squared().re),
            Table::num(len),
            Table::num(expected),
            Table::num(log_t),
            Table::num(back),
        ]);
        rows.push(json!({
            "u": u,
            "trace_sq": rval(a.trace_squared().re, 0.0),
            "length": rval(len, (len - expected).abs()),
            "log_plumbing_parameter": rval(log_t, 0.0),
        }));
    }
    Ok(Output { results: json!({ "samples": rows }), table, svgs: vec![] })
}

fn sweep(cfg: &RunConfig) -> Res<Output> {
    let p = FamilyPath::new(GroupPath::Pinch, 0.0, 1.0, cfg.s, seeds(cfg))?;
    let e = &cfg.embedding;
    let q = &cfg.quadrature;
    let settings = SweepSettings {
        gram: GramSettings {
            trunc: Truncation::Ball { radius: cfg.gram.ball_radius, slack: cfg.gram.slack },
            cap: DEFAULT_ELEMENT_CAP,
            rank_tol: cfg.gram.rank_tol,
        },
        alpha_trunc: Truncation::Ball { radius: e.ball_radius, slack: 4.0 },
        tester_radius: e.tester_radius,
        grid: (e.radial, e.angular),
        max_lambda: e.max_lambda,
        disc: (q.radial, q.angular, q.t_max),
    };
    let rows = asymptotic_sweep(&p, &cfg.path_samples(), &settings)?;
    let mut table = Table::new(&[
        "u",
        "length_A_curvature_-1",
        "trace_sq_A",
        "log_plumbing_parameter",
        "embedding_constant",
        "gram_11",
        "gram_12_re",
        "gram_12_im",
        "gram_22",
        "gram_error",
        "bound_rhs",
        "bound_holds",
    ]);
    let mut out = Vec::new();
    for r in &rows {
        let (a, b) = (r.seed_norms[0].value, r.seed_norms[1].value);
        let g12 = r.gram.matrix[(0, 1)];
        table.push(vec![
            Table::num(r.u),
            Table::num(r.length),
            Table::num(r.trace_sq),
            Table::num(plumbing_log_parameter(r.length)?),
            Table::num(r.embedding),
            Table::num(r.gram.matrix[(0, 0)].re),
            Table::num(g12.re),
            Table::num(g12.im),
            Table::num(r.gram.matrix[(1, 1)].re),
            Table::num(r.gram.error),
            Table::num(r.embedding * a * b),
            r.pairing_bound_holds().to_string(),
        ]);
        out.push(json!({
            "u": r.u,
            "length": rval(r.length, 0.0),
            "embedding_constant": r.embedding,
            "gram_12": cval(g12, r.gram.error),
            "seed_norms": r.seed_norms.iter().map(|n| rval(n.value, n.error)).collect::<Vec<_>>(),
            "bound_holds": r.pairing_bound_holds(),
        }));
    }
    Ok(Output { results: json!({ "samples": out }), table, svgs: vec![] })
}
