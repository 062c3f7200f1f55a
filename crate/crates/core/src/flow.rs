//! Floating-point side: Kähler potential and moment map of each chart,
//! gradient flows of the potentials `f_{ab;K}` in moment coordinates, and
//! the trivalent gradient trees behind `m_2`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::arith::LogValue;
use crate::error::{Error, Result};
use crate::homs::LatticeK;
use crate::lattice::Weights;
use crate::morse::{canonical_lift, eval_potential, intersection_point, rat_f64, relative_potential_from_lift, Potential};

/// Exponents `z_l = (2Πq / q_l) x̌_l` over the chart labels.
fn exponents(w: &Weights, chart: usize, xc: &[f64]) -> Vec<f64> {
    let s = w.scale() as f64;
    w.chart_labels(chart).iter().zip(xc).map(|(&l, x)| s / w.q()[l] as f64 * x).collect()
}

/// `φ̌_i = log(1 + Σ_{l != i} e^{2(Πq/q_l) x̌_l})`, evaluated as a
/// log-sum-exp.
pub fn kahler_potential(w: &Weights, chart: usize, xc: &[f64]) -> f64 {
    let z = exponents(w, chart, xc);
    let m = z.iter().copied().fold(0.0, f64::max);
    m + ((-m).exp() + z.iter().map(|zl| (zl - m).exp()).sum::<f64>()).ln()
}

/// Softmax weights `e^{z_l} / (1 + Σ e^{z})`.
fn softmax(z: &[f64]) -> Vec<f64> {
    let m = z.iter().copied().fold(0.0, f64::max);
    let denom = (-m).exp() + z.iter().map(|zl| (zl - m).exp()).sum::<f64>();
    z.iter().map(|zl| (zl - m).exp() / denom).collect()
}

/// `x^{il} = ∂φ̌_i / ∂x̌_l = (2Πq / q_l) e^{z_l} / (1 + Σ e^{z})`.
pub fn moment_map(w: &Weights, chart: usize, xc: &[f64]) -> Vec<f64> {
    let s = w.scale() as f64;
    let p = softmax(&exponents(w, chart, xc));
    w.chart_labels(chart).iter().zip(p).map(|(&l, pl)| s / w.q()[l] as f64 * pl).collect()
}

/// Hessian of `φ̌_i`, i.e. the Jacobian of [`moment_map`].
pub fn moment_jacobian(w: &Weights, chart: usize, xc: &[f64]) -> Vec<Vec<f64>> {
    let s = w.scale() as f64;
    let labels = w.chart_labels(chart);
    let p = softmax(&exponents(w, chart, xc));
    let n = labels.len();
    (0..n)
        .map(|r| {
            (0..n)
                .map(|c| {
                    let delta = if r == c { p[r] } else { 0.0 };
                    s / w.q()[labels[r]] as f64 * (delta - p[r] * p[c]) * s / w.q()[labels[c]] as f64
                })
                .collect()
        })
        .collect()
}

pub const NEWTON_MAX_ITER: usize = 100;

/// Inverse of [`moment_map`] on the open polytope, by damped Newton
/// iteration on `φ̌(x̌) - <x, x̌>`.
pub fn inverse_moment(w: &Weights, chart: usize, x: &[f64]) -> Result<Vec<f64>> {
    w.check_chart(chart)?;
    let s = w.scale() as f64;
    let labels = w.chart_labels(chart);
    let boundary = s - labels.iter().zip(x).map(|(&l, xl)| w.q()[l] as f64 * xl).sum::<f64>();
    if x.len() != labels.len() || x.iter().any(|&xl| !(xl > 0.0)) || !(boundary > 0.0) {
        return Err(Error::NotInterior);
    }
    let objective = |xc: &[f64]| kahler_potential(w, chart, xc) - xc.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
    let residual = |xc: &[f64]| {
        moment_map(w, chart, xc).iter().zip(x).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    };
    let tol = 1e-13 * s;
    let mut xc = vec![0.0; x.len()];
    for _ in 0..NEWTON_MAX_ITER {
        let grad: Vec<f64> = moment_map(w, chart, &xc).iter().zip(x).map(|(a, b)| a - b).collect();
        if grad.iter().all(|g| g.abs() < tol) {
            return Ok(xc);
        }
        let step = solve_dense(moment_jacobian(w, chart, &xc), grad.iter().map(|g| -g).collect())
            .ok_or(Error::NonConvergence(0))?;
        let f0 = objective(&xc);
        let slope: f64 = grad.iter().zip(&step).map(|(g, d)| g * d).sum();
        let mut t = 1.0;
        loop {
            let trial: Vec<f64> = xc.iter().zip(&step).map(|(a, d)| a + t * d).collect();
            // near the root the objective is flat to rounding, so a step that
            // shrinks the residual is accepted as well
            let shrinks = t == 1.0 && residual(&trial) < residual(&xc);
            if shrinks || objective(&trial) <= f0 + 1e-4 * t * slope || t < 1e-12 {
                xc = trial;
                break;
            }
            t *= 0.5;
        }
    }
    let grad_ok = moment_map(w, chart, &xc).iter().zip(x).all(|(a, b)| (a - b).abs() < tol);
    if grad_ok {
        Ok(xc)
    } else {
        Err(Error::NonConvergence(NEWTON_MAX_ITER))
    }
}

/// Gaussian elimination with partial pivoting.
fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col] == 0.0 {
            return None;
        }
        a.swap(piv, col);
        b.swap(piv, col);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            for c in col..n {
                a[r][c] -= f * a[col][c];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Some(x)
}

/// `2π((b - a) x^{il} / 2Πq - k_l)` for each chart coordinate.
pub fn gradient_field(w: &Weights, a: i64, b: i64, k: &[i64], chart: usize, x: &[f64]) -> Vec<f64> {
    let s = w.scale() as f64;
    let d = (b - a) as f64;
    w.chart_labels(chart)
        .iter()
        .zip(x)
        .map(|(&l, xl)| 2.0 * PI * (d * xl / s - k[l] as f64))
        .collect()
}

/// Zero of [`gradient_field`], `x^{il} = 2Πq k_l / (b - a)`.
pub fn fixed_point(w: &Weights, a: i64, b: i64, k: &[i64], chart: usize) -> Vec<f64> {
    let s = w.scale() as f64;
    w.chart_labels(chart)
        .iter()
        .map(|&l| s * k[l] as f64 / (b - a) as f64)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub samples: Vec<(f64, Vec<f64>)>,
    pub lambda: f64,
    pub fixed_point: Vec<f64>,
}

impl Trajectory {
    /// `v + e^{λt} (x_0 - v)`
    pub fn closed_form(&self, t: f64) -> Vec<f64> {
        let x0 = &self.samples[0].1;
        let e = (self.lambda * t).exp();
        self.fixed_point.iter().zip(x0).map(|(v, x)| v + e * (x - v)).collect()
    }

    /// Largest deviation of any sample from the closed form.
    pub fn max_error(&self) -> f64 {
        self.samples
            .iter()
            .map(|(t, x)| {
                self.closed_form(*t)
                    .iter()
                    .zip(x)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max)
    }

    pub fn end(&self) -> &[f64] {
        &self.samples.last().expect("trajectory has samples").1
    }
}

/// Classical RK4 for the affine field of `f_{ab;K}`. A negative `dt`
/// integrates backwards in time.
#[allow(clippy::too_many_arguments)]
pub fn integrate_trajectory(
    w: &Weights,
    a: i64,
    b: i64,
    k: &[i64],
    chart: usize,
    x0: &[f64],
    dt: f64,
    steps: usize,
) -> Result<Trajectory> {
    w.check_chart(chart)?;
    if dt == 0.0 || !dt.is_finite() {
        return Err(Error::Domain(format!("time step must be finite and nonzero, got {dt}")));
    }
    if x0.len() != w.dim() {
        return Err(Error::Domain(format!("start point has {} coordinates, expected {}", x0.len(), w.dim())));
    }
    let field = |x: &[f64]| gradient_field(w, a, b, k, chart, x);
    let axpy = |x: &[f64], h: f64, v: &[f64]| -> Vec<f64> { x.iter().zip(v).map(|(p, q)| p + h * q).collect() };
    let mut samples = Vec::with_capacity(steps + 1);
    let mut x = x0.to_vec();
    samples.push((0.0, x.clone()));
    for step in 1..=steps {
        let k1 = field(&x);
        let k2 = field(&axpy(&x, dt / 2.0, &k1));
        let k3 = field(&axpy(&x, dt / 2.0, &k2));
        let k4 = field(&axpy(&x, dt, &k3));
        for i in 0..x.len() {
            x[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        samples.push((step as f64 * dt, x.clone()));
    }
    Ok(Trajectory {
        samples,
        lambda: 2.0 * PI * (b - a) as f64 / w.scale() as f64,
        fixed_point: fixed_point(w, a, b, k, chart),
    })
}

/// One leaf edge of a gradient tree, flowing out of `from` into the root.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TreeEdge {
    pub from: Vec<f64>,
    pub to: Vec<f64>,
    pub flow_time: f64,
    pub steps: usize,
    /// Distance between the integrated end point and the exact root.
    pub residual: f64,
    /// Largest deviation from the closed-form trajectory.
    pub rk4_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GradientTree {
    pub v_ab: Vec<f64>,
    pub v_bc: Vec<f64>,
    pub v_ac: Vec<f64>,
    pub edges: Vec<TreeEdge>,
    /// `|grad(f_ab + f_bc)(v_ac)|`, zero since the root is stationary.
    pub root_field: f64,
    pub meeting_residual: f64,
    /// `(f_ab + f_bc)(v_ac) / 2π` by quadrature along the tree edges.
    pub area_numeric: f64,
    pub area_exact: LogValue,
    pub area_exact_float: f64,
    pub area_error: f64,
}

/// Flow parameter range covered by each edge: `|λ t| <= FLOW_SPAN`.
pub const FLOW_SPAN: f64 = 10.0;

fn line_integral(p: &Potential, from: &[f64], to: &[f64]) -> f64 {
    // composite Simpson; the integrand is smooth on the closed segment
    let panels = 4096;
    let dir: Vec<f64> = to.iter().zip(from).map(|(a, b)| a - b).collect();
    let f = |s: f64| {
        let x: Vec<f64> = from.iter().zip(&dir).map(|(a, d)| a + s * d).collect();
        p.gradient_f64(&x).iter().zip(&dir).map(|(g, d)| g * d).sum::<f64>()
    };
    let h = 1.0 / panels as f64;
    let mut acc = f(0.0) + f(1.0);
    for i in 1..panels {
        acc += if i % 2 == 1 { 4.0 } else { 2.0 } * f(i as f64 * h);
    }
    acc * h / 3.0
}

/// Assemble the gradient tree for `m_2(V_{ab;K_ab}, V_{bc;K_bc})`: straight
/// flows out of `v_ab` and `v_bc` meeting at the stationary root `v_ac`.
#[allow(clippy::too_many_arguments)]
pub fn build_gradient_tree(
    w: &Weights,
    a: i64,
    b: i64,
    c: i64,
    k_ab: &LatticeK,
    k_bc: &LatticeK,
    chart: usize,
    dt: f64,
) -> Result<GradientTree> {
    if !(a < b && b < c) {
        return Err(Error::Domain(format!("gradient tree needs a < b < c, got {a}, {b}, {c}")));
    }
    let k_ac = k_ab.add(k_bc);
    let exact_ac = intersection_point(w, a, c, &k_ac, chart)?;
    let v_ac: Vec<f64> = exact_ac.iter().map(rat_f64).collect();
    let v_ab = fixed_point(w, a, b, k_ab.k(), chart);
    let v_bc = fixed_point(w, b, c, k_bc.k(), chart);

    let mut edges = Vec::new();
    for (lo, hi, k, leaf) in [(a, b, k_ab, &v_ab), (b, c, k_bc, &v_bc)] {
        let exact_leaf = intersection_point(w, lo, hi, k, chart)?;
        if exact_leaf == exact_ac {
            edges.push(TreeEdge {
                from: leaf.clone(),
                to: v_ac.clone(),
                flow_time: 0.0,
                steps: 0,
                residual: 0.0,
                rk4_error: 0.0,
            });
            continue;
        }
        let lambda = 2.0 * PI * (hi - lo) as f64 / w.scale() as f64;
        let flow_time = FLOW_SPAN / lambda;
        let steps = (flow_time / dt).ceil() as usize;
        let h = flow_time / steps as f64;
        let eps = (-FLOW_SPAN).exp();
        let x0: Vec<f64> = leaf.iter().zip(&v_ac).map(|(l, r)| l + eps * (r - l)).collect();
        let traj = integrate_trajectory(w, lo, hi, k.k(), chart, &x0, h, steps)?;
        let residual = traj.end().iter().zip(&v_ac).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        edges.push(TreeEdge {
            from: leaf.clone(),
            to: v_ac.clone(),
            flow_time,
            steps,
            residual,
            rk4_error: traj.max_error(),
        });
    }

    let root_field = gradient_field(w, a, c, k_ac.k(), chart, &v_ac)
        .iter()
        .map(|g| g.abs())
        .fold(0.0, f64::max);
    let meeting_residual = edges.iter().map(|e| e.residual).fold(0.0, f64::max);

    let lift_a = canonical_lift(w, a);
    let f_ab = relative_potential_from_lift(w, &lift_a, b, k_ab, chart)?;
    let lift_b = crate::morse::LagrangianLift {
        a: b,
        ka: lift_a.ka.iter().zip(k_ab.k()).map(|(x, y)| x + y).collect(),
    };
    let f_bc = relative_potential_from_lift(w, &lift_b, c, k_bc, chart)?;
    let area_exact = eval_potential(&f_ab, &exact_ac)?.add(&eval_potential(&f_bc, &exact_ac)?);
    let area_exact_float = area_exact.to_float();
    let area_numeric = line_integral(&f_ab, &v_ab, &v_ac) + line_integral(&f_bc, &v_bc, &v_ac);

    Ok(GradientTree {
        v_ab,
        v_bc,
        v_ac,
        edges,
        root_field,
        meeting_residual,
        area_numeric,
        area_error: (area_numeric - area_exact_float).abs(),
        area_exact,
        area_exact_float,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w32() -> Weights {
        Weights::new(&[3, 2]).unwrap()
    }

    #[test]
    fn potential_values() {
        let w = w32();
        assert!(kahler_potential(&w, 0, &[-50.0]).abs() < 1e-12);
        assert!((kahler_potential(&w, 0, &[0.0]) - 2f64.ln()).abs() < 1e-15);
        let w = Weights::new(&[1, 1, 2]).unwrap();
        assert!((kahler_potential(&w, 0, &[0.0, 0.0]) - 3f64.ln()).abs() < 1e-15);
        // no overflow for large arguments
        assert!(kahler_potential(&w, 0, &[400.0, 0.0]).is_finite());
    }

    #[test]
    fn moment_values() {
        let w = w32();
        assert!((moment_map(&w, 0, &[0.0])[0] - 3.0).abs() < 1e-14);
        assert!(moment_map(&w, 0, &[-40.0])[0] < 1e-12);
        let w = Weights::new(&[1, 1, 2]).unwrap();
        assert!(moment_map(&w, 0, &[-40.0, -40.0]).iter().all(|x| x.abs() < 1e-12));
    }

    #[test]
    fn inverse_examples() {
        let w = w32();
        assert!(inverse_moment(&w, 0, &[3.0]).unwrap()[0].abs() < 1e-12);
        assert_eq!(inverse_moment(&w, 0, &[0.0]), Err(Error::NotInterior));
        assert_eq!(inverse_moment(&w, 0, &[6.0]), Err(Error::NotInterior));
        let w = Weights::new(&[1, 2, 3]).unwrap();
        let x = [0.3, 1.1];
        let xc = inverse_moment(&w, 1, &x).unwrap();
        let back = moment_map(&w, 1, &xc);
        assert!(back.iter().zip(&x).all(|(a, b)| (a - b).abs() < 1e-10));
    }

    #[test]
    fn field_examples() {
        let w = w32();
        assert!((gradient_field(&w, 0, 2, &[0, 1], 0, &[0.0])[0] + 2.0 * PI).abs() < 1e-14);
        assert_eq!(gradient_field(&w, 0, 2, &[0, 1], 0, &[6.0]), vec![0.0]);
    }

    #[test]
    fn stationary_trajectory() {
        let w = w32();
        let t = integrate_trajectory(&w, 0, 2, &[0, 1], 0, &[6.0], 1e-3, 100).unwrap();
        assert!(t.samples.iter().all(|(_, x)| x[0] == 6.0));
        assert!(integrate_trajectory(&w, 0, 2, &[0, 1], 0, &[6.0], 0.0, 1).is_err());
    }

    #[test]
    fn backward_flow_contracts() {
        let w = Weights::new(&[1, 1, 2]).unwrap();
        let t = integrate_trajectory(&w, 0, 3, &[0, 1, 1], 0, &[0.5, 0.2], -1e-3, 5000).unwrap();
        let v = [4.0 / 3.0, 4.0 / 3.0];
        let end = t.end();
        assert!(end.iter().zip(&v).all(|(a, b)| (a - b).abs() < 1e-3));
        assert!(t.max_error() < 1e-8);
    }

    #[test]
    fn tree_one_dimensional() {
        let w = w32();
        let k_ab = LatticeK::new(&w, vec![0, 1]).unwrap();
        let k_bc = LatticeK::new(&w, vec![1, 0]).unwrap();
        let tree = build_gradient_tree(&w, 0, 2, 5, &k_ab, &k_bc, 0, 1e-3).unwrap();
        assert!((tree.v_ac[0] - 2.4).abs() < 1e-15);
        assert!(tree.meeting_residual < 1e-8);
        let expected = (2.5f64).ln() / 6.0 + (5.0f64 / 3.0).ln() / 4.0;
        assert!((tree.area_exact_float - expected).abs() < 1e-14);
        assert!(tree.area_error < 1e-9, "{}", tree.area_error);
    }

    #[test]
    fn degenerate_tree() {
        let w = w32();
        let k = LatticeK::new(&w, vec![0, 1]).unwrap();
        let tree = build_gradient_tree(&w, 0, 2, 4, &k, &k, 0, 1e-3).unwrap();
        assert!(tree.edges.iter().all(|e| e.steps == 0));
        assert!(tree.area_exact.is_zero());
        assert!(tree.area_numeric.abs() < 1e-12);
    }
}
