//! Verification suites run by the `verify` command and the acceptance
//! tests. Each suite counts its checks and collects failures as JSON.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::arith::LogValue;
use crate::flow::{build_gradient_tree, inverse_moment, kahler_potential, moment_map, integrate_trajectory};
use crate::homs::{exceptional_max_r, generator_degree, hilbert_dim_oracle, weighted_compositions, GenDegree, LatticeK};
use crate::lattice::{chart_transform, Weights};
use crate::mirror::{max_modulus_scan, random_interior_point, verify_functor};
use crate::morse::{
    associativity_failures, build_category_with, eval_potential, lift_with_unit, rat_f64, ratio_check,
    relative_potential_from_lift, unit_vector, CategoryData, LagrangianLift,
};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Dims,
    Exceptional,
    Assoc,
    Functor,
    Ratio,
    Charts,
    Flow,
}

impl Suite {
    pub const ALL: [Suite; 7] =
        [Suite::Dims, Suite::Exceptional, Suite::Assoc, Suite::Functor, Suite::Ratio, Suite::Charts, Suite::Flow];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Dims => "dims",
            Suite::Exceptional => "exceptional",
            Suite::Assoc => "assoc",
            Suite::Functor => "functor",
            Suite::Ratio => "ratio",
            Suite::Charts => "charts",
            Suite::Flow => "flow",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Parses a suite name; `all` expands to every suite.
pub fn parse_suites(s: &str) -> Result<Vec<Suite>> {
    if s == "all" {
        return Ok(Suite::ALL.to_vec());
    }
    s.split(',').map(|p| p.trim().parse()).collect()
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::Domain(format!("unknown suite {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyOptions {
    pub base: i64,
    pub chart: usize,
    /// Grid resolution for the max-modulus scan; `None` picks one by dimension.
    pub grid: Option<usize>,
    pub seed: u64,
    pub dt: f64,
    /// Degrees checked against the oracle in the `dims` suite.
    pub max_degree: i64,
    /// Random points per generator in the pointwise functor check.
    pub functor_samples: usize,
    /// Random points for the moment-map checks in the `flow` suite.
    pub flow_samples: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            base: 0,
            chart: 0,
            grid: None,
            seed: 0,
            dt: 1e-3,
            max_degree: 30,
            functor_samples: 5,
            flow_samples: 100,
        }
    }
}

/// Grid resolution used when none is given: 100 on a segment, 50 on a
/// triangle, 20 above.
pub fn default_grid(n: usize) -> usize {
    match n {
        1 => 100,
        2 => 50,
        _ => 20,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub checks: usize,
    pub failures: Vec<Value>,
    pub pass: bool,
}

impl SuiteReport {
    fn new(suite: Suite, checks: usize, failures: Vec<Value>) -> Self {
        SuiteReport { suite, checks, pass: failures.is_empty(), failures }
    }
}

pub fn run_suites(w: &Weights, suites: &[Suite], opts: &VerifyOptions) -> Result<Vec<SuiteReport>> {
    let needs_cat = suites.iter().any(|s| matches!(s, Suite::Assoc | Suite::Functor | Suite::Ratio));
    let cat = if needs_cat {
        Some(build_category_with(w, opts.base, opts.chart, &unit_vector(w))?)
    } else {
        None
    };
    suites
        .iter()
        .map(|&s| match s {
            Suite::Dims => check_dims(w, opts),
            Suite::Exceptional => check_exceptional(w, opts),
            Suite::Assoc => Ok(check_assoc(cat.as_ref().unwrap())),
            Suite::Functor => check_functor(cat.as_ref().unwrap(), opts),
            Suite::Ratio => check_ratio(cat.as_ref().unwrap()),
            Suite::Charts => check_charts(w, opts),
            Suite::Flow => check_flow(w, opts),
        })
        .collect()
}

/// Composition counts against the brute-force oracle for all degrees up to
/// `max_degree`, and hom dimensions of the collection against `dim S_{b-a}`.
pub fn check_dims(w: &Weights, opts: &VerifyOptions) -> Result<SuiteReport> {
    let mut checks = 0;
    let mut failures = Vec::new();
    for d in 0..=opts.max_degree {
        checks += 1;
        let got = weighted_compositions(w, d).len() as u64;
        let expected = hilbert_dim_oracle(w, d);
        if got != expected {
            failures.push(json!({ "degree": d, "expected": expected, "got": got }));
        }
    }
    let r = exceptional_max_r(w);
    for a in opts.base..=opts.base + r {
        for b in opts.base..=opts.base + r {
            checks += 1;
            let got = crate::homs::hom_basis_in_chart(w, a, b, opts.chart)?.dim as u64;
            let expected = match a.cmp(&b) {
                std::cmp::Ordering::Less => hilbert_dim_oracle(w, b - a),
                std::cmp::Ordering::Equal => 1,
                std::cmp::Ordering::Greater => 0,
            };
            if got != expected {
                failures.push(json!({ "pair": [a, b], "expected": expected, "got": got }));
            }
        }
    }
    Ok(SuiteReport::new(Suite::Dims, checks, failures))
}

/// Both directions of the bound `R <= Σq - 1`: no interior intersection
/// point for `|b - a| <= Σq - 1`, and `(1, ..., 1)` is an interior
/// (backward) generator at `|b - a| = Σq`.
pub fn check_exceptional(w: &Weights, opts: &VerifyOptions) -> Result<SuiteReport> {
    let mut checks = 0;
    let mut failures = Vec::new();
    let r = exceptional_max_r(w);
    for d in 1..=r {
        for k in weighted_compositions(w, d) {
            checks += 1;
            let backward = generator_degree(w, opts.base + d, opts.base, &k)?;
            if k.is_interior() || backward != GenDegree::NotGenerator {
                failures.push(json!({ "distance": d, "K": k.k(), "reason": "interior point inside the collection" }));
            }
        }
    }
    checks += 1;
    let ones = LatticeK::new(w, vec![1; w.q().len()])?;
    let at_sum = weighted_compositions(w, w.sum_q());
    let backward = generator_degree(w, opts.base + w.sum_q(), opts.base, &ones)?;
    if !at_sum.contains(&ones) || !ones.is_interior() || backward != GenDegree::Degree(w.dim() as i64) {
        failures.push(json!({ "distance": w.sum_q(), "K": ones.k(), "reason": "(1,...,1) is not an interior generator" }));
    }
    Ok(SuiteReport::new(Suite::Exceptional, checks, failures))
}

pub fn check_assoc(cat: &CategoryData) -> SuiteReport {
    let failures: Vec<Value> = associativity_failures(cat)
        .into_iter()
        .map(|f| serde_json::to_value(f).expect("serializable"))
        .collect();
    let triples = count_triples(cat);
    SuiteReport::new(Suite::Assoc, triples, failures)
}

fn count_triples(cat: &CategoryData) -> usize {
    let labels = cat.object_labels();
    let mut count = 0;
    for (ia, &a) in labels.iter().enumerate() {
        for (ib, &b) in labels.iter().enumerate().skip(ia) {
            for (ic, &c) in labels.iter().enumerate().skip(ib) {
                for &d in &labels[ic..] {
                    count += cat.hom(a, b).dim * cat.hom(b, c).dim * cat.hom(c, d).dim;
                }
            }
        }
    }
    count
}

/// Product compatibility, pointwise identities, constancy of
/// `f_ab + f_bc - f_ac`, and the max-modulus scan of every generator.
pub fn check_functor(cat: &CategoryData, opts: &VerifyOptions) -> Result<SuiteReport> {
    let w = &cat.weights;
    let report = verify_functor(cat, opts.seed, opts.functor_samples)?;
    let mut checks = report.checks;
    let mut failures: Vec<Value> =
        report.failures.iter().map(|f| serde_json::to_value(f).expect("serializable")).collect();

    let constancy = potential_constancy_failures(cat, opts.seed, 3)?;
    checks += cat.products.len();
    failures.extend(constancy);

    let m = opts.grid.unwrap_or_else(|| default_grid(w.dim()));
    let gens: Vec<_> = cat.forward_generators().collect();
    let scans = gens
        .par_iter()
        .map(|g| max_modulus_scan(w, g.a, g.b, &g.k, m, cat.chart))
        .collect::<Result<Vec<_>>>()?;
    checks += scans.len();
    failures.extend(scans.into_iter().filter(|s| !s.pass).map(|s| serde_json::to_value(s).expect("serializable")));
    Ok(SuiteReport::new(Suite::Functor, checks, failures))
}

/// `f_ab + f_bc - f_ac` takes the same exact value at `points` random
/// interior points, for every product with `a < b < c`.
pub fn potential_constancy_failures(cat: &CategoryData, seed: u64, points: usize) -> Result<Vec<Value>> {
    let w = &cat.weights;
    let pairs: Vec<_> = cat.products.keys().filter(|(g1, g2)| g1.a < g1.b && g2.a < g2.b).collect();
    let results = pairs
        .par_iter()
        .enumerate()
        .map(|(idx, (g1, g2))| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (idx as u64).wrapping_mul(0x9e37_79b9));
            let k_ab = LatticeK::new(w, g1.k.clone())?;
            let k_bc = LatticeK::new(w, g2.k.clone())?;
            let lift_a = lift_with_unit(w, g1.a, &cat.unit)?;
            let lift_b = LagrangianLift {
                a: g1.b,
                ka: lift_a.ka.iter().zip(&g1.k).map(|(x, y)| x + y).collect(),
            };
            let f_ab = relative_potential_from_lift(w, &lift_a, g1.b, &k_ab, cat.chart)?;
            let f_bc = relative_potential_from_lift(w, &lift_b, g2.b, &k_bc, cat.chart)?;
            let f_ac = relative_potential_from_lift(w, &lift_a, g2.b, &k_ab.add(&k_bc), cat.chart)?;
            let mut values: Vec<LogValue> = Vec::with_capacity(points);
            for _ in 0..points {
                let x = random_interior_point(w, cat.chart, &mut rng);
                let v = eval_potential(&f_ab, &x)?
                    .add(&eval_potential(&f_bc, &x)?)
                    .sub(&eval_potential(&f_ac, &x)?);
                values.push(v);
            }
            let ok = values.windows(2).all(|p| p[0] == p[1]);
            Ok((!ok).then(|| json!({ "pair": [g1, g2], "reason": "f_ab + f_bc - f_ac is not constant" })))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(results.into_iter().flatten().collect())
}

pub fn check_ratio(cat: &CategoryData) -> Result<SuiteReport> {
    let w = &cat.weights;
    let mut checks = 0;
    let mut failures = Vec::new();
    for (g1, g2) in cat.composable_pairs() {
        if g1.is_identity() || g2.is_identity() {
            continue;
        }
        checks += 1;
        if !ratio_check(w, g1.a, g1.b, g2.b, &g1.k, &g2.k, cat.chart)? {
            failures.push(json!({ "pair": [g1.id(), g2.id()] }));
        }
    }
    Ok(SuiteReport::new(Suite::Ratio, checks, failures))
}

/// Rebuilds the category in every chart and compares it with chart 0 after
/// [`chart_transform`].
pub fn check_charts(w: &Weights, opts: &VerifyOptions) -> Result<SuiteReport> {
    let unit = unit_vector(w);
    let reference = build_category_with(w, opts.base, 0, &unit)?;
    let mut ref_weights: Vec<_> = reference.products.values().map(|p| p.weight.clone()).collect();
    ref_weights.sort();
    let mut checks = 0;
    let mut failures = Vec::new();
    for j in 1..=w.dim() {
        let other = build_category_with(w, opts.base, j, &unit)?;
        let t = chart_transform(w, 0, j)?;
        for (key, h0) in &reference.homs {
            let hj = &other.homs[key];
            checks += 1;
            if h0.dim != hj.dim {
                failures.push(json!({ "chart": j, "pair": [key.0, key.1], "reason": "hom dimension differs" }));
                continue;
            }
            for (g0, gj) in h0.gens.iter().zip(&hj.gens) {
                checks += 1;
                let moved = g0.v.as_ref().map(|v| t.apply(v));
                if g0.id() != gj.id() || moved != gj.v {
                    failures.push(json!({ "chart": j, "generator": g0.id(), "reason": "point does not transform" }));
                }
            }
        }
        let mut weights: Vec<_> = other.products.values().map(|p| p.weight.clone()).collect();
        weights.sort();
        checks += 1;
        if weights != ref_weights || other.products != reference.products {
            failures.push(json!({ "chart": j, "reason": "product weights differ" }));
        }
    }
    Ok(SuiteReport::new(Suite::Charts, checks, failures))
}

pub const RK4_TOL: f64 = 1e-8;
pub const COLLINEAR_TOL: f64 = 1e-9;
pub const MEETING_TOL: f64 = 1e-8;
pub const AREA_TOL: f64 = 1e-9;
pub const FD_TOL: f64 = 1e-6;
pub const ROUNDTRIP_TOL: f64 = 1e-10;

/// Numeric checks: RK4 against the closed form, straightness of
/// trajectories, gradient trees against exact roots and areas, and the
/// moment map against finite differences of the Kähler potential.
pub fn check_flow(w: &Weights, opts: &VerifyOptions) -> Result<SuiteReport> {
    let mut checks = 0;
    let mut failures = Vec::new();
    let chart = opts.chart;
    let unit = unit_vector(w);
    let cat = build_category_with(w, opts.base, chart, &unit)?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);

    // trajectories out of every forward generator, |λt| <= 10
    let gens: Vec<_> = cat.forward_generators().cloned().collect();
    let starts: Vec<Vec<f64>> = gens
        .iter()
        .map(|_| random_interior_point(w, chart, &mut rng).iter().map(rat_f64).collect())
        .collect();
    let traj_failures = gens
        .par_iter()
        .zip(starts)
        .map(|(g, y)| {
            let v: Vec<f64> = g.v.as_ref().unwrap().iter().map(rat_f64).collect();
            let lambda = 2.0 * std::f64::consts::PI * (g.b - g.a) as f64 / w.scale() as f64;
            let span = crate::flow::FLOW_SPAN;
            let x0: Vec<f64> = v.iter().zip(&y).map(|(vi, yi)| vi + (-span).exp() * (yi - vi)).collect();
            let steps = (span / lambda / opts.dt).ceil() as usize;
            let traj = integrate_trajectory(w, g.a, g.b, g.k.k(), chart, &x0, span / lambda / steps as f64, steps)?;
            let rk4 = traj.max_error();
            let dir: Vec<f64> = x0.iter().zip(&v).map(|(a, b)| a - b).collect();
            let norm = dir.iter().map(|d| d * d).sum::<f64>().sqrt();
            let off_line = traj
                .samples
                .iter()
                .map(|(_, x)| {
                    let rel: Vec<f64> = x.iter().zip(&v).map(|(a, b)| a - b).collect();
                    let proj = rel.iter().zip(&dir).map(|(r, d)| r * d).sum::<f64>() / (norm * norm);
                    rel.iter().zip(&dir).map(|(r, d)| (r - proj * d).abs()).fold(0.0, f64::max)
                })
                .fold(0.0, f64::max);
            let ok = rk4 < RK4_TOL && off_line < COLLINEAR_TOL;
            Ok((!ok).then(|| json!({ "generator": g.id(), "rk4_error": rk4, "off_line": off_line })))
        })
        .collect::<Result<Vec<_>>>()?;
    checks += gens.len();
    failures.extend(traj_failures.into_iter().flatten());

    // gradient trees for every product with a < b < c
    let pairs: Vec<_> = cat
        .composable_pairs()
        .into_iter()
        .filter(|(g1, g2)| !g1.is_identity() && !g2.is_identity())
        .collect();
    let tree_failures = pairs
        .par_iter()
        .map(|(g1, g2)| {
            let tree = build_gradient_tree(w, g1.a, g1.b, g2.b, &g1.k, &g2.k, chart, opts.dt)?;
            let weight = &cat.products[&(g1.id(), g2.id())].weight;
            let area_vs_weight = (tree.area_exact_float + weight.to_float().ln()).abs();
            let ok = tree.meeting_residual < MEETING_TOL
                && tree.area_error < AREA_TOL
                && tree.root_field < MEETING_TOL
                && area_vs_weight < AREA_TOL
                && tree.area_exact == weight.ln().neg();
            Ok((!ok).then(|| {
                json!({
                    "pair": [g1.id(), g2.id()],
                    "meeting_residual": tree.meeting_residual,
                    "area_error": tree.area_error,
                    "root_field": tree.root_field,
                })
            }))
        })
        .collect::<Result<Vec<_>>>()?;
    checks += pairs.len();
    failures.extend(tree_failures.into_iter().flatten());

    // moment map against finite differences, Hessian positivity, inverse
    let s = w.scale() as f64;
    let labels = w.chart_labels(chart);
    for _ in 0..opts.flow_samples {
        let xc: Vec<f64> = labels.iter().map(|&l| rng.gen_range(-3.0..3.0) * w.q()[l] as f64 / s).collect();
        checks += 1;
        let fd = fd_gradient(w, chart, &xc);
        let mm = moment_map(w, chart, &xc);
        let err = fd.iter().zip(&mm).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        if err >= FD_TOL {
            failures.push(json!({ "check": "moment_map", "point": xc, "error": err }));
        }
        checks += 1;
        if !fd_hessian_positive(w, chart, &xc) {
            failures.push(json!({ "check": "hessian", "point": xc }));
        }
    }
    for _ in 0..opts.flow_samples {
        let x: Vec<f64> = random_interior_point(w, chart, &mut rng).iter().map(rat_f64).collect();
        checks += 1;
        let err = match inverse_moment(w, chart, &x) {
            Ok(xc) => moment_map(w, chart, &xc).iter().zip(&x).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max),
            Err(_) => f64::INFINITY,
        };
        if err >= ROUNDTRIP_TOL {
            failures.push(json!({ "check": "inverse_moment", "point": x, "error": err }));
        }
    }
    Ok(SuiteReport::new(Suite::Flow, checks, failures))
}

/// Central differences of the Kähler potential.
pub fn fd_gradient(w: &Weights, chart: usize, xc: &[f64]) -> Vec<f64> {
    let h = 1e-6 / w.scale() as f64;
    (0..xc.len())
        .map(|i| {
            let mut p = xc.to_vec();
            let mut m = xc.to_vec();
            p[i] += h;
            m[i] -= h;
            (kahler_potential(w, chart, &p) - kahler_potential(w, chart, &m)) / (2.0 * h)
        })
        .collect()
}

/// Finite-difference Hessian of the Kähler potential is symmetric and
/// positive definite (Cholesky succeeds).
pub fn fd_hessian_positive(w: &Weights, chart: usize, xc: &[f64]) -> bool {
    let n = xc.len();
    let h = 1e-3 / w.scale() as f64;
    let grad_at = |x: &[f64]| moment_map(w, chart, x);
    let mut hess = vec![vec![0.0; n]; n];
    for j in 0..n {
        let mut p = xc.to_vec();
        let mut m = xc.to_vec();
        p[j] += h;
        m[j] -= h;
        let gp = grad_at(&p);
        let gm = grad_at(&m);
        for i in 0..n {
            hess[i][j] = (gp[i] - gm[i]) / (2.0 * h);
        }
    }
    let scale = hess.iter().flatten().map(|v| v.abs()).fold(0.0, f64::max);
    for i in 0..n {
        for j in 0..n {
            if (hess[i][j] - hess[j][i]).abs() > 1e-6 * scale {
                return false;
            }
        }
    }
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let s: f64 = (0..j).map(|k| l[i][k] * l[j][k]).sum();
            if i == j {
                let d = hess[i][i] - s;
                if !(d > 0.0) {
                    return false;
                }
                l[i][i] = d.sqrt();
            } else {
                l[i][j] = (hess[i][j] - s) / l[j][j];
            }
        }
    }
    true
}

/// Whether every suite passed.
pub fn all_pass(reports: &[SuiteReport]) -> bool {
    reports.iter().all(|r| r.pass)
}
