//! Lagrangian sections, their potentials, intersection points and the
//! exact `m_2` structure constants of the Morse homotopy category on the
//! exceptional collection `(L_q, ..., L_{q+Σq-1})`.
//!
//! Potentials are stored in units of `f / 2π`, so a product weight is
//! `exp(-(f_ab + f_bc)(v_ac) / 2π)`.

use std::collections::BTreeMap;

use num_integer::Integer;
use num_traits::Zero;
use rayon::prelude::*;
use serde::Serialize;

use crate::arith::{int, LogValue, PosExact, Rational};
use crate::error::{Error, Result};
use crate::homs::{exceptional_max_r, hom_basis_in_chart, HomBasis, LatticeK};
use crate::lattice::{facet_values, in_closed_polytope, ser_point, Weights};

/// A lift `s_{a;K_a}` of the Lagrangian section mirror to `O(a)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct LagrangianLift {
    pub a: i64,
    #[serde(rename = "Ka")]
    pub ka: Vec<i64>,
}

/// Integer vector `u` with `Σ q_j u_j = 1`, from the extended Euclidean
/// algorithm folded left to right over the weights.
pub fn unit_vector(w: &Weights) -> Vec<i64> {
    let q = w.q();
    let mut coeffs = vec![1i64];
    let mut g = q[0];
    for &qj in &q[1..] {
        let e = g.extended_gcd(&qj);
        for c in coeffs.iter_mut() {
            *c *= e.x;
        }
        coeffs.push(e.y);
        g = e.gcd;
    }
    if g < 0 {
        coeffs.iter_mut().for_each(|c| *c = -*c);
    }
    debug_assert_eq!(w.degree_of(&coeffs), 1);
    coeffs
}

/// A second unit vector, `u + (q_1, -q_0, 0, ..., 0)`, differing from
/// [`unit_vector`] by an element of `β*(M)`.
pub fn alternative_unit_vector(w: &Weights) -> Vec<i64> {
    let mut u = unit_vector(w);
    u[0] += w.q()[1];
    u[1] -= w.q()[0];
    u
}

pub fn canonical_lift(w: &Weights, a: i64) -> LagrangianLift {
    let u = unit_vector(w);
    LagrangianLift { a, ka: u.iter().map(|x| a * x).collect() }
}

pub fn lift_with_unit(w: &Weights, a: i64, unit: &[i64]) -> Result<LagrangianLift> {
    if unit.len() != w.q().len() || w.degree_of(unit) != 1 {
        return Err(Error::Domain(format!("{unit:?} does not satisfy Σ q_j u_j = 1")));
    }
    Ok(LagrangianLift { a, ka: unit.iter().map(|x| a * x).collect() })
}

/// `s_{a;K_a}(x) / 2π = (a / 2Πq) x - K_a^{(i)}` on chart `i`.
pub fn section_value(
    w: &Weights,
    lift: &LagrangianLift,
    chart: usize,
    x: &[Rational],
) -> Result<Vec<Rational>> {
    w.check_chart(chart)?;
    if !in_closed_polytope(w, chart, x) {
        return Err(Error::OutsidePolytope);
    }
    let slope = Rational::new(lift.a.into(), w.scale().into());
    Ok(w.chart_labels(chart)
        .into_iter()
        .zip(x)
        .map(|(l, xl)| &slope * xl - int(lift.ka[l]))
        .collect())
}

/// Solve `s_b(x) = s_a(x)` on chart `i`: `x = 2Πq (K_b - K_a)^{(i)} / (b - a)`.
pub fn section_crossing(
    w: &Weights,
    lift_a: &LagrangianLift,
    lift_b: &LagrangianLift,
    chart: usize,
) -> Result<Vec<Rational>> {
    w.check_chart(chart)?;
    let d = lift_b.a - lift_a.a;
    if d == 0 {
        return Err(Error::Domain("sections of the same object do not cross transversally".into()));
    }
    let diff: Vec<i64> = lift_b.ka.iter().zip(&lift_a.ka).map(|(b, a)| b - a).collect();
    if w.degree_of(&diff) != d {
        return Err(Error::DegreeMismatch { k: diff.clone(), got: w.degree_of(&diff), expected: d });
    }
    Ok(w.chart_labels(chart)
        .into_iter()
        .map(|l| Rational::new((w.scale() * diff[l]).into(), d.into()))
        .collect())
}

/// The point `v_{ab;K}` with `x^{il} = 2Πq k_l / |b - a|`.
pub fn intersection_point(
    w: &Weights,
    a: i64,
    b: i64,
    k: &LatticeK,
    chart: usize,
) -> Result<Vec<Rational>> {
    w.check_chart(chart)?;
    let d = (b - a).abs();
    if a == b || k.degree() != d {
        return Err(Error::DegreeMismatch { k: k.k().to_vec(), got: k.degree(), expected: d });
    }
    Ok(w.chart_labels(chart)
        .into_iter()
        .map(|l| Rational::new((w.scale() * k.k()[l]).into(), d.into()))
        .collect())
}

/// A basis morphism `V_{ab;K}`; the identity `P` has no point `v`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MorphismGen {
    pub a: i64,
    pub b: i64,
    #[serde(rename = "K")]
    pub k: LatticeK,
    #[serde(serialize_with = "ser_opt_point")]
    pub v: Option<Vec<Rational>>,
    pub degree: i64,
    pub chart: usize,
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

/// Key identifying a generator independently of chart.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct GenId {
    pub a: i64,
    pub b: i64,
    #[serde(rename = "K")]
    pub k: Vec<i64>,
}

impl MorphismGen {
    pub fn identity(w: &Weights, a: i64, chart: usize) -> Self {
        MorphismGen { a, b: a, k: LatticeK::zero(w), v: None, degree: 0, chart }
    }

    pub fn forward(w: &Weights, a: i64, b: i64, k: Vec<i64>, chart: usize) -> Result<Self> {
        if a >= b {
            return Err(Error::Domain(format!("expected a < b, got a = {a}, b = {b}")));
        }
        let k = LatticeK::new(w, k)?;
        let v = intersection_point(w, a, b, &k, chart)?;
        Ok(MorphismGen { a, b, k, v: Some(v), degree: 0, chart })
    }

    pub fn is_identity(&self) -> bool {
        self.a == self.b
    }

    pub fn id(&self) -> GenId {
        GenId { a: self.a, b: self.b, k: self.k.k().to_vec() }
    }
}

/// `f / 2π = Σ_j c_j log u_j + constant`, where `u_j` are the facet
/// functions of the chart (see [`facet_values`]).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Potential {
    #[serde(skip)]
    weights: Weights,
    pub chart: usize,
    /// Coefficient of `log(2Πq - Σ q_l x^{il})`.
    #[serde(serialize_with = "ser_rat")]
    pub coeff_boundary: Rational,
    /// Coefficients of `log(q_l x^{il})` for `l != i`, in chart order.
    #[serde(serialize_with = "ser_point")]
    pub coeff_l: Vec<Rational>,
    #[serde(rename = "const")]
    pub constant: LogValue,
}

fn ser_rat<S: serde::Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&r.to_string())
}

impl Potential {
    pub fn weights(&self) -> &Weights {
        &self.weights
    }

    /// Coefficient of `log u_j`, indexed by facet label `j`.
    pub fn facet_coefficients(&self) -> Vec<Rational> {
        let mut out = vec![Rational::zero(); self.weights.q().len()];
        out[self.chart] = self.coeff_boundary.clone();
        for (l, c) in self.weights.chart_labels(self.chart).into_iter().zip(&self.coeff_l) {
            out[l] = c.clone();
        }
        out
    }

    fn from_facet_coefficients(w: &Weights, chart: usize, c: Vec<Rational>, constant: LogValue) -> Self {
        let coeff_l = w.chart_labels(chart).into_iter().map(|l| c[l].clone()).collect();
        Potential { weights: w.clone(), chart, coeff_boundary: c[chart].clone(), coeff_l, constant }
    }

    pub fn sub(&self, other: &Potential) -> Potential {
        assert_eq!(self.chart, other.chart);
        let c = self
            .facet_coefficients()
            .into_iter()
            .zip(other.facet_coefficients())
            .map(|(a, b)| a - b)
            .collect();
        Potential::from_facet_coefficients(
            &self.weights,
            self.chart,
            c,
            self.constant.sub(&other.constant),
        )
    }

    /// Partial derivatives `∂(f/2π)/∂x^{il}` in floating point.
    pub fn gradient_f64(&self, x: &[f64]) -> Vec<f64> {
        let w = &self.weights;
        let labels = w.chart_labels(self.chart);
        let boundary: f64 =
            w.scale() as f64 - labels.iter().zip(x).map(|(&l, xl)| w.q()[l] as f64 * xl).sum::<f64>();
        let cb = rat_f64(&self.coeff_boundary);
        labels
            .iter()
            .zip(x)
            .zip(&self.coeff_l)
            .map(|((&l, xl), c)| {
                let ql = w.q()[l] as f64;
                let mut g = 0.0;
                if !c.is_zero() {
                    g += rat_f64(c) / xl;
                }
                if !self.coeff_boundary.is_zero() {
                    g -= cb * ql / boundary;
                }
                g
            })
            .collect()
    }
}

/// Nearest float to an exact rational.
pub fn rat_f64(r: &Rational) -> f64 {
    num_traits::ToPrimitive::to_f64(r).unwrap_or(f64::NAN)
}

/// Potential of a single lift `s_{a;K_a}` on chart `i`:
/// `-Σ_j (q_j a_j / 2Πq) log u_j + (a / 2Πq) log 2Πq`.
pub fn lift_potential(w: &Weights, lift: &LagrangianLift, chart: usize) -> Result<Potential> {
    w.check_chart(chart)?;
    let s = w.scale();
    let c = w
        .q()
        .iter()
        .zip(&lift.ka)
        .map(|(&q, &a)| Rational::new((-q * a).into(), s.into()))
        .collect();
    let constant = LogValue::log_of(&int(s))?.scale(&Rational::new(lift.a.into(), s.into()));
    Ok(Potential::from_facet_coefficients(w, chart, c, constant))
}

/// `f_{ab;K}` built from the canonical lift of `a`.
pub fn relative_potential(w: &Weights, a: i64, b: i64, k: &LatticeK, chart: usize) -> Result<Potential> {
    relative_potential_from_lift(w, &canonical_lift(w, a), b, k, chart)
}

/// `f_{ab;K}` with `d f_{ab;K} = d(f_{b;K_a+K} - f_{a;K_a})`, normalised so
/// that it vanishes at `v_{ab;K}`.
pub fn relative_potential_from_lift(
    w: &Weights,
    lift_a: &LagrangianLift,
    b: i64,
    k: &LatticeK,
    chart: usize,
) -> Result<Potential> {
    let a = lift_a.a;
    if a >= b {
        return Err(Error::Domain(format!("relative potential needs a < b, got a = {a}, b = {b}")));
    }
    let v = intersection_point(w, a, b, k, chart)?;
    let lift_b = LagrangianLift {
        a: b,
        ka: lift_a.ka.iter().zip(k.k()).map(|(x, y)| x + y).collect(),
    };
    let diff = lift_potential(w, &lift_b, chart)?.sub(&lift_potential(w, lift_a, chart)?);
    let at_v = eval_potential(&diff, &v)?;
    let mut p = diff;
    p.constant = p.constant.sub(&at_v);
    Ok(p)
}

/// Exact value of `f / 2π` at a rational point, with `0·log 0 = 0`.
pub fn eval_potential(p: &Potential, x: &[Rational]) -> Result<LogValue> {
    let u = facet_values(&p.weights, p.chart, x);
    let mut acc = p.constant.clone();
    for (c, uj) in p.facet_coefficients().iter().zip(&u) {
        if c.is_zero() {
            continue;
        }
        if *uj <= Rational::zero() {
            return Err(Error::Domain(format!("log of non-positive argument {uj}")));
        }
        acc = acc.add_scaled(&LogValue::log_of(uj)?, c);
    }
    Ok(acc)
}

/// `m_2(g_ab, g_bc)` using the canonical lifts.
pub fn compose(w: &Weights, g_ab: &MorphismGen, g_bc: &MorphismGen) -> Result<(MorphismGen, PosExact)> {
    compose_with_unit(w, &unit_vector(w), g_ab, g_bc)
}

/// `m_2(V_ab, V_bc) = exp(-(f_ab + f_bc)(v_ac)/2π) V_{ac; K_ab + K_bc}`;
/// identities compose with weight one.
pub fn compose_with_unit(
    w: &Weights,
    unit: &[i64],
    g_ab: &MorphismGen,
    g_bc: &MorphismGen,
) -> Result<(MorphismGen, PosExact)> {
    if g_ab.b != g_bc.a {
        return Err(Error::NotComposable(format!(
            "target {} differs from source {}",
            g_ab.b, g_bc.a
        )));
    }
    if g_ab.chart != g_bc.chart {
        return Err(Error::NotComposable("generators live in different charts".into()));
    }
    if g_ab.a > g_ab.b || g_bc.a > g_bc.b {
        return Err(Error::NotComposable(
            "backward generators lie outside the exceptional collection".into(),
        ));
    }
    if g_ab.is_identity() {
        return Ok((g_bc.clone(), PosExact::one()));
    }
    if g_bc.is_identity() {
        return Ok((g_ab.clone(), PosExact::one()));
    }
    let chart = g_ab.chart;
    let (a, b, c) = (g_ab.a, g_ab.b, g_bc.b);
    let k_ac = g_ab.k.add(&g_bc.k);
    let v_ac = intersection_point(w, a, c, &k_ac, chart)?;
    let lift_a = lift_with_unit(w, a, unit)?;
    let lift_b = LagrangianLift {
        a: b,
        ka: lift_a.ka.iter().zip(g_ab.k.k()).map(|(x, y)| x + y).collect(),
    };
    let f_ab = relative_potential_from_lift(w, &lift_a, b, &g_ab.k, chart)?;
    let f_bc = relative_potential_from_lift(w, &lift_b, c, &g_bc.k, chart)?;
    let area = eval_potential(&f_ab, &v_ac)?.add(&eval_potential(&f_bc, &v_ac)?);
    let target = MorphismGen { a, b: c, k: k_ac, v: Some(v_ac), degree: 0, chart };
    Ok((target, area.neg().exp()))
}

/// `(c - a) v_ac == (b - a) v_ab + (c - b) v_bc`, exactly.
pub fn ratio_check(
    w: &Weights,
    a: i64,
    b: i64,
    c: i64,
    k_ab: &LatticeK,
    k_bc: &LatticeK,
    chart: usize,
) -> Result<bool> {
    if !(a < b && b < c) {
        return Err(Error::Domain(format!("ratio identity needs a < b < c, got {a}, {b}, {c}")));
    }
    let v_ab = intersection_point(w, a, b, k_ab, chart)?;
    let v_bc = intersection_point(w, b, c, k_bc, chart)?;
    let v_ac = intersection_point(w, a, c, &k_ab.add(k_bc), chart)?;
    let (ba, cb, ca) = (int(b - a), int(c - b), int(c - a));
    Ok(v_ac
        .iter()
        .zip(v_ab.iter().zip(&v_bc))
        .all(|(ac, (ab, bc))| ac * &ca == ab * &ba + bc * &cb))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Product {
    pub dst: GenId,
    pub weight: PosExact,
}

/// The full subcategory on `(L_q, ..., L_{q+R})`, `R = Σq - 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct CategoryData {
    pub weights: Weights,
    pub base: i64,
    pub chart: usize,
    pub unit: Vec<i64>,
    pub objects: Vec<LagrangianLift>,
    pub homs: BTreeMap<(i64, i64), HomBasis>,
    pub products: BTreeMap<(GenId, GenId), Product>,
}

impl CategoryData {
    pub fn object_labels(&self) -> Vec<i64> {
        self.objects.iter().map(|o| o.a).collect()
    }

    pub fn hom(&self, a: i64, b: i64) -> &HomBasis {
        &self.homs[&(a, b)]
    }

    /// Generators with `a < b`.
    pub fn forward_generators(&self) -> impl Iterator<Item = &MorphismGen> {
        self.homs.values().flat_map(|h| h.gens.iter()).filter(|g| g.a < g.b)
    }

    pub fn product(&self, g1: &GenId, g2: &GenId) -> Option<&Product> {
        self.products.get(&(g1.clone(), g2.clone()))
    }

    /// Every composable pair `(g_ab, g_bc)` with `a <= b <= c`.
    pub fn composable_pairs(&self) -> Vec<(&MorphismGen, &MorphismGen)> {
        let labels = self.object_labels();
        let mut out = Vec::new();
        for (ia, &a) in labels.iter().enumerate() {
            for (ib, &b) in labels.iter().enumerate().skip(ia) {
                for &c in &labels[ib..] {
                    for g1 in &self.hom(a, b).gens {
                        for g2 in &self.hom(b, c).gens {
                            out.push((g1, g2));
                        }
                    }
                }
            }
        }
        out
    }
}

pub fn build_category(w: &Weights, base: i64) -> Result<CategoryData> {
    build_category_with(w, base, 0, &unit_vector(w))
}

pub fn build_category_with(w: &Weights, base: i64, chart: usize, unit: &[i64]) -> Result<CategoryData> {
    w.check_chart(chart)?;
    let r = exceptional_max_r(w);
    let labels: Vec<i64> = (base..=base + r).collect();
    let objects = labels
        .iter()
        .map(|&a| lift_with_unit(w, a, unit))
        .collect::<Result<Vec<_>>>()?;
    let mut homs = BTreeMap::new();
    for &a in &labels {
        for &b in &labels {
            homs.insert((a, b), hom_basis_in_chart(w, a, b, chart)?);
        }
    }
    let mut cat = CategoryData {
        weights: w.clone(),
        base,
        chart,
        unit: unit.to_vec(),
        objects,
        homs,
        products: BTreeMap::new(),
    };
    let products = cat
        .composable_pairs()
        .into_par_iter()
        .map(|(g1, g2)| {
            let (dst, weight) = compose_with_unit(w, unit, g1, g2)?;
            Ok(((g1.id(), g2.id()), Product { dst: dst.id(), weight }))
        })
        .collect::<Result<Vec<_>>>()?;
    cat.products = products.into_iter().collect();
    Ok(cat)
}

/// A composable triple whose two bracketings disagree.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssocFailure {
    pub gens: [GenId; 3],
    pub left: Option<Product>,
    pub right: Option<Product>,
}

/// Checks `(g1 g2) g3 = g1 (g2 g3)` on targets and exact weights for every
/// composable triple.
pub fn associativity_failures(cat: &CategoryData) -> Vec<AssocFailure> {
    let labels = cat.object_labels();
    let mut triples = Vec::new();
    for (ia, &a) in labels.iter().enumerate() {
        for (ib, &b) in labels.iter().enumerate().skip(ia) {
            for (ic, &c) in labels.iter().enumerate().skip(ib) {
                for &d in &labels[ic..] {
                    for g1 in &cat.hom(a, b).gens {
                        for g2 in &cat.hom(b, c).gens {
                            for g3 in &cat.hom(c, d).gens {
                                triples.push([g1.id(), g2.id(), g3.id()]);
                            }
                        }
                    }
                }
            }
        }
    }
    triples
        .into_par_iter()
        .filter_map(|[g1, g2, g3]| {
            let bracket = |x: &GenId, y: &GenId, z: &GenId, first_left: bool| -> Option<Product> {
                let (p, q) = if first_left {
                    let p = cat.product(x, y)?;
                    (p.clone(), cat.product(&p.dst, z)?.clone())
                } else {
                    let p = cat.product(y, z)?;
                    (p.clone(), cat.product(x, &p.dst)?.clone())
                };
                Some(Product { dst: q.dst, weight: p.weight.mul(&q.weight) })
            };
            let left = bracket(&g1, &g2, &g3, true);
            let right = bracket(&g1, &g2, &g3, false);
            match (&left, &right) {
                (Some(l), Some(r)) if l == r => None,
                _ => Some(AssocFailure { gens: [g1, g2, g3], left, right }),
            }
        })
        .collect()
}

pub fn check_associativity(cat: &CategoryData) -> bool {
    associativity_failures(cat).is_empty()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{factor_positive, rat};

    fn w32() -> Weights {
        Weights::new(&[3, 2]).unwrap()
    }

    fn lk(w: &Weights, k: &[i64]) -> LatticeK {
        LatticeK::new(w, k.to_vec()).unwrap()
    }

    #[test]
    fn lifts() {
        let w = w32();
        assert_eq!(unit_vector(&w), vec![1, -1]);
        assert_eq!(canonical_lift(&w, 1).ka, vec![1, -1]);
        assert_eq!(canonical_lift(&w, 3).ka, vec![3, -3]);
        assert_eq!(canonical_lift(&w, 0).ka, vec![0, 0]);
        for q in [vec![1, 1, 2], vec![2, 3, 5], vec![6, 10, 15], vec![4, 6, 9, 1]] {
            let w = Weights::new(&q).unwrap();
            assert_eq!(w.degree_of(&unit_vector(&w)), 1);
            assert_eq!(w.degree_of(&alternative_unit_vector(&w)), 1);
            assert_ne!(unit_vector(&w), alternative_unit_vector(&w));
        }
        assert!(lift_with_unit(&w, 1, &[1, 0]).is_err());
    }

    #[test]
    fn section_values() {
        let w = w32();
        let zero = [rat(0, 1)];
        let s1 = section_value(&w, &canonical_lift(&w, 1), 0, &zero).unwrap();
        assert_eq!(s1, vec![rat(1, 1)]);
        let s4 = LagrangianLift { a: 4, ka: vec![2, -1] };
        assert_eq!(section_value(&w, &s4, 0, &zero).unwrap(), vec![rat(1, 1)]);
        let s0 = canonical_lift(&w, 0);
        assert_eq!(section_value(&w, &s0, 0, &[rat(7, 2)]).unwrap(), vec![rat(0, 1)]);
        assert_eq!(section_value(&w, &s0, 0, &[rat(7, 1)]), Err(Error::OutsidePolytope));
    }

    #[test]
    fn intersection_points() {
        let w = Weights::new(&[1, 1, 2]).unwrap();
        let v = intersection_point(&w, 0, 3, &lk(&w, &[0, 1, 1]), 0).unwrap();
        assert_eq!(v, vec![rat(4, 3), rat(4, 3)]);
        let w = w32();
        assert_eq!(intersection_point(&w, 0, 2, &lk(&w, &[0, 1]), 0).unwrap(), vec![rat(6, 1)]);
        assert!(intersection_point(&w, 0, 3, &lk(&w, &[0, 1]), 0).is_err());
        // barycentric interior point at |b - a| = Σq
        let w = Weights::new(&[1, 2, 3]).unwrap();
        let v = intersection_point(&w, 0, 6, &lk(&w, &[1, 1, 1]), 0).unwrap();
        assert_eq!(v, vec![rat(2, 1), rat(2, 1)]);
    }

    #[test]
    fn crossing_matches_intersection_point() {
        let w = Weights::new(&[1, 2, 3]).unwrap();
        let la = canonical_lift(&w, 2);
        let k = lk(&w, &[1, 2, 0]);
        let lb = LagrangianLift { a: 7, ka: la.ka.iter().zip(k.k()).map(|(x, y)| x + y).collect() };
        for chart in 0..3 {
            let x = section_crossing(&w, &la, &lb, chart).unwrap();
            assert_eq!(x, intersection_point(&w, 2, 7, &k, chart).unwrap());
            assert_eq!(
                section_value(&w, &la, chart, &x).unwrap(),
                section_value(&w, &lb, chart, &x).unwrap()
            );
        }
    }

    #[test]
    fn potential_examples() {
        let w = w32();
        // -(1/6) log(x/6)
        let f = relative_potential(&w, 0, 2, &lk(&w, &[0, 1]), 0).unwrap();
        assert_eq!(f.coeff_l, vec![rat(-1, 6)]);
        assert!(f.coeff_boundary.is_zero());
        assert!(eval_potential(&f, &[rat(6, 1)]).unwrap().is_zero());
        let at = eval_potential(&f, &[rat(12, 5)]).unwrap();
        assert_eq!(at, LogValue::log_of(&rat(5, 2)).unwrap().scale(&rat(1, 6)));
        // -(1/4) log((12 - 2x)/12)
        let g = relative_potential(&w, 2, 5, &lk(&w, &[1, 0]), 0).unwrap();
        assert_eq!(g.coeff_boundary, rat(-1, 4));
        assert!(eval_potential(&g, &[rat(0, 1)]).unwrap().is_zero());
        let at = eval_potential(&g, &[rat(12, 5)]).unwrap();
        assert_eq!(at, LogValue::log_of(&rat(5, 3)).unwrap().scale(&rat(1, 4)));
        assert!(relative_potential(&w, 2, 2, &lk(&w, &[0, 0]), 0).is_err());
    }

    #[test]
    fn eval_rejects_log_of_zero() {
        let w = w32();
        let f = relative_potential(&w, 0, 2, &lk(&w, &[0, 1]), 0).unwrap();
        assert!(matches!(eval_potential(&f, &[rat(0, 1)]), Err(Error::Domain(_))));
    }

    #[test]
    fn compose_examples() {
        let w = w32();
        let g1 = MorphismGen::forward(&w, 0, 2, vec![0, 1], 0).unwrap();
        let g2 = MorphismGen::forward(&w, 2, 4, vec![0, 1], 0).unwrap();
        let (t, wt) = compose(&w, &g1, &g2).unwrap();
        assert_eq!(t.k.k(), &[0, 2]);
        assert!(wt.is_one());

        let g3 = MorphismGen::forward(&w, 2, 5, vec![1, 0], 0).unwrap();
        let (t, wt) = compose(&w, &g1, &g3).unwrap();
        assert_eq!(t.k.k(), &[1, 1]);
        assert_eq!(t.v, Some(vec![rat(12, 5)]));
        let expected = PosExact::from_exponents([(2, rat(1, 6)), (3, rat(1, 4)), (5, rat(-5, 12))]);
        assert_eq!(wt, expected);
        let by_hand = crate::arith::pe_mul_pow(&[
            (factor_positive(&rat(2, 5)).unwrap(), rat(1, 6)),
            (factor_positive(&rat(3, 5)).unwrap(), rat(1, 4)),
        ]);
        assert_eq!(wt, by_hand);

        let id = MorphismGen::identity(&w, 0, 0);
        let (t, wt) = compose(&w, &id, &g1).unwrap();
        assert_eq!(t, g1);
        assert!(wt.is_one());
        assert!(matches!(compose(&w, &g2, &g1), Err(Error::NotComposable(_))));
    }

    #[test]
    fn ratio_examples() {
        let w = Weights::new(&[1, 1, 2]).unwrap();
        assert!(ratio_check(&w, 0, 1, 3, &lk(&w, &[0, 1, 0]), &lk(&w, &[0, 0, 1]), 0).unwrap());
        let w = w32();
        assert!(ratio_check(&w, 0, 2, 5, &lk(&w, &[0, 1]), &lk(&w, &[1, 0]), 0).unwrap());
        assert!(ratio_check(&w, 0, 2, 4, &lk(&w, &[0, 1]), &lk(&w, &[0, 1]), 0).unwrap());
        assert!(ratio_check(&w, 2, 2, 4, &lk(&w, &[0, 0]), &lk(&w, &[0, 1]), 0).is_err());
    }

    #[test]
    fn category_sizes() {
        let w = w32();
        let cat = build_category(&w, 0).unwrap();
        assert_eq!(cat.objects.len(), 5);
        assert_eq!(cat.forward_generators().count(), 6);
        let ids = cat.homs.iter().filter(|((a, b), _)| a == b).map(|(_, h)| h.dim).sum::<usize>();
        assert_eq!(ids, 5);
        assert!(cat.homs.iter().filter(|((a, b), _)| a > b).all(|(_, h)| h.dim == 0));

        let cat = build_category(&Weights::new(&[1, 1, 2]).unwrap(), 0).unwrap();
        assert_eq!(cat.objects.len(), 4);
        for (d, dim) in [(1, 2), (2, 4), (3, 6)] {
            assert_eq!(cat.hom(0, d).dim, dim);
        }
        let cat = build_category(&Weights::new(&[1, 1]).unwrap(), 0).unwrap();
        assert_eq!(cat.objects.len(), 2);
        assert_eq!(cat.hom(0, 1).dim, 2);
    }

    #[test]
    fn associativity_small() {
        for q in [vec![3, 2], vec![1, 2, 3]] {
            let cat = build_category(&Weights::new(&q).unwrap(), 0).unwrap();
            assert!(check_associativity(&cat), "{q:?}");
        }
    }
}
