//! Mirror-side generators `ψ_{ab;K}`, their max-modulus rescaling constants,
//! and the check that `V_{ab;K} ↦ e_{ab;K} = c_{ab;K} ψ_{ab;K}` respects
//! products exactly.
//!
//! Phases `e^{i K·y̌}` are carried only as the label `K`; every identity
//! compared here factors into a modulus identity and equality of labels.

use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::arith::{factor_positive, int, pe_eq, pe_mul_pow, PosExact, Rational};
use crate::error::{Error, Result};
use crate::homs::LatticeK;
use crate::lattice::{facet_values, ser_point, Weights};
use crate::morse::{
    eval_potential, intersection_point, relative_potential_from_lift, lift_with_unit, CategoryData, GenId,
};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MirrorGen {
    pub a: i64,
    pub b: i64,
    #[serde(rename = "K")]
    pub k: LatticeK,
    pub c: PosExact,
    pub chart: usize,
    pub phase_k: Vec<i64>,
}

pub fn mirror_generator(w: &Weights, a: i64, b: i64, k: &LatticeK, chart: usize) -> Result<MirrorGen> {
    w.check_chart(chart)?;
    Ok(MirrorGen {
        a,
        b,
        k: k.clone(),
        c: rescale_const(w, a, b, k)?,
        chart,
        phase_k: k.k().to_vec(),
    })
}

/// `|ψ_{ab;K}(x)| = Π_j (u_j / 2Πq)^{q_j k_j / 2Πq}` with `0^0 = 1`.
pub fn psi_abs_at(
    w: &Weights,
    _a: i64,
    _b: i64,
    k: &LatticeK,
    chart: usize,
    x: &[Rational],
) -> Result<PosExact> {
    w.check_chart(chart)?;
    let s = int(w.scale());
    let u = facet_values(w, chart, x);
    let mut terms = Vec::new();
    for ((&q, &kj), uj) in w.q().iter().zip(k.k()).zip(&u) {
        if kj == 0 {
            continue;
        }
        if *uj <= Rational::zero() {
            return Err(Error::Domain(format!("non-positive base {uj} under exponent")));
        }
        terms.push((factor_positive(&(uj / &s))?, Rational::new((q * kj).into(), w.scale().into())));
    }
    Ok(pe_mul_pow(&terms))
}

/// `c_{ab;K} = 1 / |ψ_{ab;K}(v_{ab;K})|`, so that `max_P |c ψ| = 1`.
pub fn rescale_const(w: &Weights, a: i64, b: i64, k: &LatticeK) -> Result<PosExact> {
    if a == b && k.is_zero() {
        return Ok(PosExact::one());
    }
    if a > b {
        return Err(Error::Domain(format!("rescaling constant needs a <= b, got {a} > {b}")));
    }
    let v = intersection_point(w, a, b, k, 0)?;
    Ok(psi_abs_at(w, a, b, k, 0, &v)?.recip())
}

/// `c_ab c_bc / c_ac` with `K_ac = K_ab + K_bc`; one when either factor is
/// an identity.
pub fn mirror_structure_constant(
    w: &Weights,
    a: i64,
    b: i64,
    c: i64,
    k_ab: &LatticeK,
    k_bc: &LatticeK,
) -> Result<PosExact> {
    if a > b || b > c {
        return Err(Error::Domain(format!("need a <= b <= c, got {a}, {b}, {c}")));
    }
    if a == b || b == c {
        return Ok(PosExact::one());
    }
    let c_ab = rescale_const(w, a, b, k_ab)?;
    let c_bc = rescale_const(w, b, c, k_bc)?;
    let c_ac = rescale_const(w, a, c, &k_ab.add(k_bc))?;
    Ok(c_ab.mul(&c_bc).div(&c_ac))
}

/// A random rational point strictly inside the polytope, drawn through
/// positive barycentric weights on the vertices.
pub fn random_interior_point<R: Rng>(w: &Weights, chart: usize, rng: &mut R) -> Vec<Rational> {
    let r: Vec<i64> = (0..=w.dim()).map(|_| rng.gen_range(1..=97)).collect();
    let total: i64 = r.iter().sum();
    w.chart_labels(chart)
        .into_iter()
        .map(|l| Rational::new((r[l] * w.scale()).into(), (total * w.q()[l]).into()))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    Product,
    Pointwise,
    Identity,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FunctorCheck {
    pub kind: CheckKind,
    /// The generators involved: two for a product, one otherwise.
    pub pair: Vec<GenId>,
    pub triple: Option<[i64; 3]>,
    #[serde(serialize_with = "ser_opt_point")]
    pub point: Option<Vec<Rational>>,
    pub expected: PosExact,
    pub got: PosExact,
    pub pass: bool,
}

fn ser_opt_point<S: serde::Serializer>(
    p: &Option<Vec<Rational>>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    match p {
        Some(p) => ser_point(p, s),
        None => s.serialize_none(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FunctorReport {
    pub checks: usize,
    pub failures: Vec<FunctorCheck>,
    pub pass: bool,
}

/// Compares every Morse product weight with `c_ab c_bc / c_ac`, and checks
/// `exp(-f_ab(x)/2π) = c |ψ(x)|` at `samples` random interior points per
/// generator.
pub fn verify_functor(cat: &CategoryData, seed: u64, samples: usize) -> Result<FunctorReport> {
    let w = &cat.weights;
    let product_checks = cat
        .products
        .par_iter()
        .map(|((g1, g2), prod)| {
            let expected = mirror_structure_constant(
                w,
                g1.a,
                g1.b,
                g2.b,
                &LatticeK::new(w, g1.k.clone())?,
                &LatticeK::new(w, g2.k.clone())?,
            )?;
            let phase_ok = prod.dst.k.iter().zip(g1.k.iter().zip(&g2.k)).all(|(t, (x, y))| *t == x + y);
            let pass = phase_ok && pe_eq(&expected, &prod.weight);
            Ok(FunctorCheck {
                kind: CheckKind::Product,
                pair: vec![g1.clone(), g2.clone()],
                triple: Some([g1.a, g1.b, g2.b]),
                point: None,
                expected,
                got: prod.weight.clone(),
                pass,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let gens: Vec<_> = cat.homs.values().flat_map(|h| h.gens.iter()).filter(|g| g.a <= g.b).collect();
    let pointwise = gens
        .par_iter()
        .enumerate()
        .map(|(idx, g)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(idx as u64));
            if g.is_identity() {
                // f_aa = 0 and e_aa = 1
                return Ok(vec![FunctorCheck {
                    kind: CheckKind::Identity,
                    pair: vec![g.id()],
                    triple: None,
                    point: None,
                    expected: PosExact::one(),
                    got: PosExact::one(),
                    pass: true,
                }]);
            }
            let lift_a = lift_with_unit(w, g.a, &cat.unit)?;
            let f = relative_potential_from_lift(w, &lift_a, g.b, &g.k, cat.chart)?;
            let c = rescale_const(w, g.a, g.b, &g.k)?;
            (0..samples)
                .map(|_| {
                    let x = random_interior_point(w, cat.chart, &mut rng);
                    let got = eval_potential(&f, &x)?.neg().exp();
                    let expected = c.mul(&psi_abs_at(w, g.a, g.b, &g.k, cat.chart, &x)?);
                    Ok(FunctorCheck {
                        kind: CheckKind::Pointwise,
                        pair: vec![g.id()],
                        triple: None,
                        pass: pe_eq(&expected, &got),
                        point: Some(x),
                        expected,
                        got,
                    })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;

    let all: Vec<FunctorCheck> = product_checks.into_iter().chain(pointwise.into_iter().flatten()).collect();
    let checks = all.len();
    let failures: Vec<_> = all.into_iter().filter(|c| !c.pass).collect();
    Ok(FunctorReport { checks, pass: failures.is_empty(), failures })
}

/// Margin by which `|c ψ|` must stay below one away from the grid cell of
/// `v`.
pub const SCAN_MARGIN: f64 = 1e-9;
/// Allowed floating-point excess over one anywhere on the grid.
pub const SCAN_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanReport {
    pub generator: GenId,
    pub grid: usize,
    pub nodes: usize,
    /// `a = b`: `|e| = 1` on the whole polytope.
    pub identity: bool,
    pub max_value: f64,
    #[serde(serialize_with = "ser_point")]
    pub argmax: Vec<Rational>,
    pub argmax_near_v: bool,
    /// Largest value at nodes outside the grid cell containing `v`.
    pub max_far: f64,
    pub exact_one_at_v: bool,
    pub pass: bool,
}

/// Scan `|c ψ_{ab;K}|` on the grid `x = Σ (t_l / m) v^{il}`, `Σ t_l <= m`.
pub fn max_modulus_scan(w: &Weights, a: i64, b: i64, k: &LatticeK, m: usize, chart: usize) -> Result<ScanReport> {
    w.check_chart(chart)?;
    let generator = GenId { a, b, k: k.k().to_vec() };
    let n = w.dim();
    if a == b && k.is_zero() {
        return Ok(ScanReport {
            generator,
            grid: m,
            nodes: 0,
            identity: true,
            max_value: 1.0,
            argmax: vec![Rational::zero(); n],
            argmax_near_v: true,
            max_far: 1.0,
            exact_one_at_v: true,
            pass: true,
        });
    }
    if a >= b {
        return Err(Error::Domain(format!("max-modulus scan needs a < b, got {a}, {b}")));
    }
    if m == 0 {
        return Err(Error::Domain("grid resolution must be positive".into()));
    }
    let c = rescale_const(w, a, b, k)?;
    let v = intersection_point(w, a, b, k, chart)?;
    let exact_one_at_v = pe_eq(&c.mul(&psi_abs_at(w, a, b, k, chart, &v)?), &PosExact::one());

    let labels = w.chart_labels(chart);
    let d = b - a;
    let target: Vec<f64> = labels.iter().map(|&l| (m as i64 * w.q()[l] * k.k()[l]) as f64 / d as f64).collect();

    let mut nodes = Vec::new();
    let mut t = vec![0usize; n];
    loop {
        if t.iter().sum::<usize>() <= m {
            nodes.push(t.clone());
        }
        let mut pos = 0;
        while pos < n {
            if t[pos] < m {
                t[pos] += 1;
                break;
            }
            t[pos] = 0;
            pos += 1;
        }
        if pos == n {
            break;
        }
    }

    let values = nodes
        .par_iter()
        .map(|t| {
            let x: Vec<Rational> = labels
                .iter()
                .zip(t)
                .map(|(&l, &tl)| Rational::new((tl as i64 * w.scale()).into(), (m as i64 * w.q()[l]).into()))
                .collect();
            let value = match psi_abs_at(w, a, b, k, chart, &x) {
                Ok(p) => c.mul(&p).to_float(),
                // a facet with nonzero exponent vanishes here
                Err(Error::Domain(_)) => 0.0,
                Err(e) => return Err(e),
            };
            let near = t.iter().zip(&target).all(|(&tl, &tv)| (tl as f64 - tv).abs() < 1.0);
            Ok((x, value, near))
        })
        .collect::<Result<Vec<_>>>()?;

    let (argmax, max_value, argmax_near_v) = values
        .iter()
        .max_by(|x, y| x.1.total_cmp(&y.1))
        .map(|(x, v, near)| (x.clone(), *v, *near))
        .expect("grid is never empty");
    let max_far = values.iter().filter(|(_, _, near)| !near).map(|(_, v, _)| *v).fold(0.0, f64::max);
    let pass = exact_one_at_v && max_value <= 1.0 + SCAN_SLACK && argmax_near_v && max_far < 1.0 - SCAN_MARGIN;
    Ok(ScanReport {
        generator,
        grid: m,
        nodes: values.len(),
        identity: false,
        max_value,
        argmax,
        argmax_near_v,
        max_far,
        exact_one_at_v,
        pass,
    })
}
