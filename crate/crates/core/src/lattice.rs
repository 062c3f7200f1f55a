//! Weights, stacky vectors, chart polytopes and chart-to-chart transforms
//! for a weighted projective space `P(q_0, ..., q_n)`.
//!
//! A point of the moment polytope is described in chart `i` by the
//! coordinates `x^{il}` for `l != i`, stored in increasing `l`. The
//! polytope in chart `i` is `{x >= 0, Σ q_l x^{il} <= 2 q_0 ... q_n}`.

use num_integer::Integer;
use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::arith::{int, Rational};
use crate::error::{Error, Result};

/// Validated weight vector together with its derived constants.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Weights {
    q: Vec<i64>,
    n: usize,
    lcm: i64,
    prodq: i64,
    scale: i64,
}

impl Weights {
    /// Validate `q`: at least two entries, all positive, gcd one.
    pub fn new(q: &[i64]) -> Result<Self> {
        if q.len() < 2 {
            return Err(Error::InvalidWeights(format!(
                "need at least 2 weights, got {}",
                q.len()
            )));
        }
        if let Some(bad) = q.iter().find(|&&v| v < 1) {
            return Err(Error::InvalidWeights(format!("weights must be positive, got {bad}")));
        }
        let g = q.iter().fold(0i64, |g, &v| g.gcd(&v));
        if g != 1 {
            return Err(Error::InvalidWeights(format!("gcd must be 1, got gcd {g}")));
        }
        let lcm = q.iter().fold(1i64, |l, &v| l.lcm(&v));
        let prodq = q
            .iter()
            .try_fold(1i64, |p, &v| p.checked_mul(v))
            .ok_or_else(|| Error::InvalidWeights("product of weights overflows".into()))?;
        let scale = prodq
            .checked_mul(2)
            .ok_or_else(|| Error::InvalidWeights("product of weights overflows".into()))?;
        Ok(Weights { q: q.to_vec(), n: q.len() - 1, lcm, prodq, scale })
    }

    pub fn q(&self) -> &[i64] {
        &self.q
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn lcm(&self) -> i64 {
        self.lcm
    }

    pub fn prodq(&self) -> i64 {
        self.prodq
    }

    /// The constant `2 q_0 ... q_n`.
    pub fn scale(&self) -> i64 {
        self.scale
    }

    pub fn sum_q(&self) -> i64 {
        self.q.iter().sum()
    }

    /// `Σ q_j k_j`
    pub fn degree_of(&self, k: &[i64]) -> i64 {
        self.q.iter().zip(k).map(|(q, k)| q * k).sum()
    }

    pub fn check_chart(&self, i: usize) -> Result<()> {
        if i > self.n {
            Err(Error::ChartIndex { index: i, n: self.n })
        } else {
            Ok(())
        }
    }

    /// Labels `l != i` of the coordinates of chart `i`.
    pub fn chart_labels(&self, i: usize) -> Vec<usize> {
        (0..=self.n).filter(|&l| l != i).collect()
    }
}

/// Stacky vectors `b_0 = -(l/q_0) Σ e_i`, `b_i = (l/q_i) e_i`.
pub fn stacky_vectors(w: &Weights) -> Vec<Vec<Rational>> {
    let n = w.n;
    let mut out = Vec::with_capacity(n + 1);
    out.push(vec![int(-(w.lcm / w.q[0])); n]);
    for i in 1..=n {
        let mut b = vec![Rational::zero(); n];
        b[i - 1] = int(w.lcm / w.q[i]);
        out.push(b);
    }
    for c in 0..n {
        let s: Rational = out.iter().zip(&w.q).map(|(b, &q)| &b[c] * int(q)).sum();
        assert!(s.is_zero(), "stacky relation Σ q_i b_i = 0 violated");
    }
    out
}

/// A chart polytope `P_{σ_i}` and the stacky vectors spanning its cone.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Chart {
    pub index: usize,
    /// Origin first, then `v^{ik}` for `k != i` in increasing `k`.
    #[serde(serialize_with = "ser_points")]
    pub vertices: Vec<Vec<Rational>>,
    #[serde(serialize_with = "ser_points")]
    pub stacky_basis: Vec<Vec<Rational>>,
}

pub fn chart_polytope(w: &Weights, i: usize) -> Result<Chart> {
    w.check_chart(i)?;
    let n = w.n;
    let mut vertices = vec![vec![Rational::zero(); n]];
    for (pos, &k) in w.chart_labels(i).iter().enumerate() {
        let mut v = vec![Rational::zero(); n];
        v[pos] = Rational::new(w.scale.into(), w.q[k].into());
        vertices.push(v);
    }
    let b = stacky_vectors(w);
    let stacky_basis = w.chart_labels(i).into_iter().map(|k| b[k].clone()).collect();
    Ok(Chart { index: i, vertices, stacky_basis })
}

/// Vertex of chart `i` at the torus-fixed point labelled `k`; label `i` is
/// the origin of the chart.
pub fn labelled_vertex(w: &Weights, i: usize, k: usize) -> Vec<Rational> {
    let mut v = vec![Rational::zero(); w.n];
    if k != i {
        let pos = w.chart_labels(i).iter().position(|&l| l == k).unwrap();
        v[pos] = Rational::new(w.scale.into(), w.q[k].into());
    }
    v
}

/// Values of the facet functions `u_0, ..., u_n` at a point of chart `i`:
/// `u_l = q_l x^{il}` for `l != i` and `u_i = 2Πq - Σ q_l x^{il}`.
/// They sum to `2Πq` identically.
pub fn facet_values(w: &Weights, i: usize, x: &[Rational]) -> Vec<Rational> {
    let mut u = vec![Rational::zero(); w.n + 1];
    let mut rest = int(w.scale);
    for (l, xl) in w.chart_labels(i).into_iter().zip(x) {
        let v = xl * int(w.q[l]);
        rest -= &v;
        u[l] = v;
    }
    u[i] = rest;
    u
}

pub fn in_closed_polytope(w: &Weights, i: usize, x: &[Rational]) -> bool {
    x.len() == w.n && facet_values(w, i, x).iter().all(|u| !u.is_negative())
}

pub fn in_interior(w: &Weights, i: usize, x: &[Rational]) -> bool {
    x.len() == w.n && facet_values(w, i, x).iter().all(|u| u.is_positive())
}

/// Exact determinant by fraction-free elimination over the rationals.
pub fn determinant(m: &[Vec<Rational>]) -> Rational {
    let n = m.len();
    let mut a: Vec<Vec<Rational>> = m.to_vec();
    let mut det = int(1);
    for col in 0..n {
        let Some(piv) = (col..n).find(|&r| !a[r][col].is_zero()) else {
            return Rational::zero();
        };
        if piv != col {
            a.swap(piv, col);
            det = -det;
        }
        let p = a[col][col].clone();
        det *= &p;
        for r in col + 1..n {
            if a[r][col].is_zero() {
                continue;
            }
            let f = &a[r][col] / &p;
            for c in col..n {
                let sub = &f * &a[col][c];
                a[r][c] -= sub;
            }
        }
    }
    det
}

/// Index `[N : N_{σ_i}]`, computed as `|det(b_k, k != i)|` divided by the
/// covolume of `N`. The covolume of the lattice generated by all `n+1`
/// stacky vectors is the gcd of the maximal minors.
pub fn local_group_order(w: &Weights, i: usize) -> Result<u64> {
    w.check_chart(i)?;
    let b = stacky_vectors(w);
    let minors: Vec<Rational> = (0..=w.n)
        .map(|skip| {
            let cols: Vec<&Vec<Rational>> = (0..=w.n).filter(|&k| k != skip).map(|k| &b[k]).collect();
            let m: Vec<Vec<Rational>> =
                (0..w.n).map(|r| cols.iter().map(|c| c[r].clone()).collect()).collect();
            determinant(&m).abs()
        })
        .collect();
    let covolume = minors
        .iter()
        .fold(num_bigint::BigInt::zero(), |g, d| g.gcd(&d.to_integer()));
    let order = minors[i].to_integer() / covolume;
    let order: u64 = order.try_into().expect("group order fits in u64");
    assert_eq!(order as i64, w.q[i], "local group order must equal q_i");
    Ok(order)
}

/// Affine map `x ↦ linear·x + offset` between two chart presentations of
/// the same polytope.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChartTransform {
    #[serde(serialize_with = "ser_points")]
    pub linear: Vec<Vec<Rational>>,
    #[serde(serialize_with = "ser_point")]
    pub offset: Vec<Rational>,
    pub from: usize,
    pub to: usize,
}

impl ChartTransform {
    pub fn identity(n: usize, chart: usize) -> Self {
        let linear = (0..n)
            .map(|r| (0..n).map(|c| if r == c { int(1) } else { Rational::zero() }).collect())
            .collect();
        ChartTransform { linear, offset: vec![Rational::zero(); n], from: chart, to: chart }
    }

    pub fn apply(&self, x: &[Rational]) -> Vec<Rational> {
        self.linear
            .iter()
            .zip(&self.offset)
            .map(|(row, o)| row.iter().zip(x).map(|(a, b)| a * b).sum::<Rational>() + o)
            .collect()
    }

    /// `other ∘ self`: first `self`, then `other`.
    pub fn then(&self, other: &ChartTransform) -> ChartTransform {
        assert_eq!(self.to, other.from, "transforms are not composable");
        let n = self.offset.len();
        let linear = (0..n)
            .map(|r| {
                (0..n)
                    .map(|c| (0..n).map(|k| &other.linear[r][k] * &self.linear[k][c]).sum())
                    .collect()
            })
            .collect();
        let offset = other.apply(&self.offset);
        ChartTransform { linear, offset, from: self.from, to: other.to }
    }

    pub fn is_identity(&self) -> bool {
        *self == ChartTransform::identity(self.offset.len(), self.from) && self.from == self.to
    }
}

/// The affine map from chart `i` to chart `j` fixed by sending each
/// torus-fixed vertex to the vertex with the same label.
pub fn chart_transform(w: &Weights, i: usize, j: usize) -> Result<ChartTransform> {
    w.check_chart(i)?;
    w.check_chart(j)?;
    let n = w.n;
    if i == j {
        return Ok(ChartTransform::identity(n, i));
    }
    // the origin of chart i is vertex i
    let offset = labelled_vertex(w, j, i);
    let mut linear = vec![vec![Rational::zero(); n]; n];
    for (col, k) in w.chart_labels(i).into_iter().enumerate() {
        // v^{ik} = (2Πq/q_k) e_col
        let image = labelled_vertex(w, j, k);
        let factor = Rational::new(w.q[k].into(), w.scale.into());
        for r in 0..n {
            linear[r][col] = (&image[r] - &offset[r]) * &factor;
        }
    }
    Ok(ChartTransform { linear, offset, from: i, to: j })
}

pub(crate) fn ser_point<S: serde::Serializer>(
    p: &[Rational],
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(p.iter().map(|r| r.to_string()))
}

pub(crate) fn ser_points<S: serde::Serializer>(
    ps: &[Vec<Rational>],
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(ps.iter().map(|p| p.iter().map(|r| r.to_string()).collect::<Vec<_>>()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rat;

    fn pts(v: &[&[(i64, i64)]]) -> Vec<Vec<Rational>> {
        v.iter().map(|p| p.iter().map(|&(a, b)| rat(a, b)).collect()).collect()
    }

    #[test]
    fn weights_constants() {
        let w = Weights::new(&[3, 2]).unwrap();
        assert_eq!((w.dim(), w.lcm(), w.scale()), (1, 6, 12));
        let w = Weights::new(&[1, 1, 2]).unwrap();
        assert_eq!((w.dim(), w.lcm(), w.scale()), (2, 2, 4));
    }

    #[test]
    fn weights_errors() {
        assert!(matches!(Weights::new(&[2, 4]), Err(Error::InvalidWeights(m)) if m.contains("gcd must be 1")));
        assert!(Weights::new(&[0, 1]).is_err());
        assert!(Weights::new(&[-1, 1]).is_err());
        assert!(Weights::new(&[1]).is_err());
    }

    #[test]
    fn stacky_vector_examples() {
        let w = Weights::new(&[3, 2]).unwrap();
        assert_eq!(stacky_vectors(&w), pts(&[&[(-2, 1)], &[(3, 1)]]));
        let w = Weights::new(&[1, 1, 2]).unwrap();
        assert_eq!(
            stacky_vectors(&w),
            pts(&[&[(-2, 1), (-2, 1)], &[(2, 1), (0, 1)], &[(0, 1), (1, 1)]])
        );
    }

    #[test]
    fn polytope_examples() {
        let w = Weights::new(&[3, 2]).unwrap();
        assert_eq!(chart_polytope(&w, 0).unwrap().vertices, pts(&[&[(0, 1)], &[(6, 1)]]));
        let w = Weights::new(&[1, 1, 2]).unwrap();
        assert_eq!(
            chart_polytope(&w, 0).unwrap().vertices,
            pts(&[&[(0, 1), (0, 1)], &[(4, 1), (0, 1)], &[(0, 1), (2, 1)]])
        );
        let w = Weights::new(&[1, 1, 1]).unwrap();
        assert_eq!(
            chart_polytope(&w, 0).unwrap().vertices,
            pts(&[&[(0, 1), (0, 1)], &[(2, 1), (0, 1)], &[(0, 1), (2, 1)]])
        );
        assert!(matches!(chart_polytope(&w, 3), Err(Error::ChartIndex { .. })));
    }

    #[test]
    fn group_orders() {
        let w = Weights::new(&[3, 2]).unwrap();
        assert_eq!(local_group_order(&w, 0).unwrap(), 3);
        assert_eq!(local_group_order(&w, 1).unwrap(), 2);
        let w = Weights::new(&[1, 1, 2]).unwrap();
        assert_eq!(local_group_order(&w, 0).unwrap(), 1);
        assert_eq!(local_group_order(&w, 2).unwrap(), 2);
        let w = Weights::new(&[2, 3, 5, 7]).unwrap();
        for i in 0..4 {
            assert_eq!(local_group_order(&w, i).unwrap() as i64, w.q()[i]);
        }
    }

    #[test]
    fn transform_one_dimensional() {
        let w = Weights::new(&[3, 2]).unwrap();
        let t = chart_transform(&w, 0, 1).unwrap();
        assert_eq!(t.apply(&[rat(6, 1)]), vec![rat(0, 1)]);
        assert_eq!(t.apply(&[rat(0, 1)]), vec![rat(4, 1)]);
        // solved by hand through the two vertex images: x ↦ 4 - 2x/3
        assert_eq!(t.linear, pts(&[&[(-2, 3)]]));
        assert_eq!(t.offset, vec![rat(4, 1)]);
    }

    #[test]
    fn transform_two_dimensional() {
        let w = Weights::new(&[1, 1, 2]).unwrap();
        let t = chart_transform(&w, 0, 1).unwrap();
        assert_eq!(t.apply(&[rat(4, 1), rat(0, 1)]), vec![rat(0, 1), rat(0, 1)]);
        assert_eq!(t.apply(&[rat(0, 1), rat(0, 1)]), vec![rat(4, 1), rat(0, 1)]);
        assert_eq!(t.apply(&[rat(0, 1), rat(2, 1)]), vec![rat(0, 1), rat(2, 1)]);
    }

    #[test]
    fn transform_identity_and_inverse() {
        let w = Weights::new(&[1, 2, 3]).unwrap();
        assert!(chart_transform(&w, 1, 1).unwrap().is_identity());
        for i in 0..3 {
            for j in 0..3 {
                let there = chart_transform(&w, i, j).unwrap();
                let back = chart_transform(&w, j, i).unwrap();
                assert!(there.then(&back).is_identity());
            }
        }
    }

    #[test]
    fn transforms_preserve_facet_values() {
        // facet functions are intrinsic to the polytope, so any chart change
        // must leave them unchanged
        let w = Weights::new(&[1, 2, 3]).unwrap();
        let x = vec![rat(7, 5), rat(2, 3)];
        let u0 = facet_values(&w, 0, &x);
        for j in 1..3 {
            let y = chart_transform(&w, 0, j).unwrap().apply(&x);
            assert_eq!(facet_values(&w, j, &y), u0);
        }
    }

    #[test]
    fn determinant_small() {
        let m = pts(&[&[(1, 1), (2, 1)], &[(3, 1), (4, 1)]]);
        assert_eq!(determinant(&m), rat(-2, 1));
        let m = pts(&[&[(0, 1), (1, 1)], &[(1, 1), (0, 1)]]);
        assert_eq!(determinant(&m), rat(-1, 1));
    }
}
