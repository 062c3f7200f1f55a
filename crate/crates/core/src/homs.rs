//! Morphism-space bases as lattice points of weighted degree `b - a`,
//! their degrees, and the exceptional-collection bound.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::Weights;
use crate::morse::{intersection_point, MorphismGen};

/// A nonnegative lattice vector `K = (k_0, ..., k_n)` with its weighted
/// degree `Σ q_j k_j`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct LatticeK {
    k: Vec<i64>,
    degree: i64,
}

impl LatticeK {
    pub fn new(w: &Weights, k: Vec<i64>) -> Result<Self> {
        if k.len() != w.q().len() {
            return Err(Error::Domain(format!(
                "lattice vector has {} entries, expected {}",
                k.len(),
                w.q().len()
            )));
        }
        if k.iter().any(|&v| v < 0) {
            return Err(Error::Domain(format!("lattice vector {k:?} has a negative entry")));
        }
        let degree = w.degree_of(&k);
        Ok(LatticeK { k, degree })
    }

    pub fn zero(w: &Weights) -> Self {
        LatticeK { k: vec![0; w.q().len()], degree: 0 }
    }

    pub fn k(&self) -> &[i64] {
        &self.k
    }

    pub fn degree(&self) -> i64 {
        self.degree
    }

    pub fn is_zero(&self) -> bool {
        self.degree == 0
    }

    /// All entries at least one, i.e. the point `v` is interior.
    pub fn is_interior(&self) -> bool {
        self.k.iter().all(|&v| v >= 1)
    }

    pub fn add(&self, other: &LatticeK) -> LatticeK {
        LatticeK {
            k: self.k.iter().zip(&other.k).map(|(a, b)| a + b).collect(),
            degree: self.degree + other.degree,
        }
    }
}

/// All `K >= 0` with `Σ q_j k_j = d`, in ascending lexicographic order.
pub fn weighted_compositions(w: &Weights, d: i64) -> Vec<LatticeK> {
    fn descend(q: &[i64], pos: usize, rest: i64, cur: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
        if pos + 1 == q.len() {
            if rest % q[pos] == 0 {
                cur.push(rest / q[pos]);
                out.push(cur.clone());
                cur.pop();
            }
            return;
        }
        let mut k = 0;
        while q[pos] * k <= rest {
            cur.push(k);
            descend(q, pos + 1, rest - q[pos] * k, cur, out);
            cur.pop();
            k += 1;
        }
    }
    if d < 0 {
        return Vec::new();
    }
    let mut out = Vec::new();
    descend(w.q(), 0, d, &mut Vec::new(), &mut out);
    out.into_iter().map(|k| LatticeK { k, degree: d }).collect()
}

/// `dim S_d` of the graded ring `C[z_0..z_n]`, `deg z_j = q_j`, by
/// brute-force enumeration of the box `0 <= k_j <= d / q_j`.
pub fn hilbert_dim_oracle(w: &Weights, d: i64) -> u64 {
    if d < 0 {
        return 0;
    }
    let q = w.q();
    let bounds: Vec<i64> = q.iter().map(|&qj| d / qj).collect();
    let mut k = vec![0i64; q.len()];
    let mut count = 0;
    loop {
        if q.iter().zip(&k).map(|(a, b)| a * b).sum::<i64>() == d {
            count += 1;
        }
        let mut pos = 0;
        loop {
            if pos == k.len() {
                return count;
            }
            if k[pos] < bounds[pos] {
                k[pos] += 1;
                break;
            }
            k[pos] = 0;
            pos += 1;
        }
    }
}

/// Largest `R` for which `(L_q, ..., L_{q+R})` has no interior intersection
/// points, namely `Σ q_j - 1`.
pub fn exceptional_max_r(w: &Weights) -> i64 {
    w.sum_q() - 1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GenDegree {
    NotGenerator,
    Degree(i64),
}

/// Whether `V_{ab;K}` is a generator, and of which degree.
///
/// Backward generators (`a > b`) exist only at interior points and are
/// assigned degree `n`, the dimension of their stable manifold.
pub fn generator_degree(w: &Weights, a: i64, b: i64, k: &LatticeK) -> Result<GenDegree> {
    let expected = (b - a).abs();
    if k.degree() != expected {
        return Err(Error::DegreeMismatch { k: k.k().to_vec(), got: k.degree(), expected });
    }
    Ok(if a <= b {
        GenDegree::Degree(0)
    } else if k.is_interior() {
        GenDegree::Degree(w.dim() as i64)
    } else {
        GenDegree::NotGenerator
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HomBasis {
    pub a: i64,
    pub b: i64,
    pub gens: Vec<MorphismGen>,
    pub dim: usize,
}

pub fn hom_basis(w: &Weights, a: i64, b: i64) -> Result<HomBasis> {
    hom_basis_in_chart(w, a, b, 0)
}

pub fn hom_basis_in_chart(w: &Weights, a: i64, b: i64, chart: usize) -> Result<HomBasis> {
    w.check_chart(chart)?;
    let gens = if a == b {
        vec![MorphismGen::identity(w, a, chart)]
    } else {
        let mut gens = Vec::new();
        for k in weighted_compositions(w, (b - a).abs()) {
            if let GenDegree::Degree(degree) = generator_degree(w, a, b, &k)? {
                let v = intersection_point(w, a, b, &k, chart)?;
                gens.push(MorphismGen { a, b, k, v: Some(v), degree, chart });
            }
        }
        gens
    };
    Ok(HomBasis { a, b, dim: gens.len(), gens })
}
