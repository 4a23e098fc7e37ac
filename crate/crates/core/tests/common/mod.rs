#![allow(dead_code)]

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use rand::Rng;
use slsgle::graph::{laplacian_build, LaplacianMatrix, PrecisionEstimate};
use slsgle::sampling::{standard_normal_matrix, standard_normal_vector};
use slsgle::solver::RegressionProblem;
use slsgle::RngSeed;

/// Dense Gaussian elimination with partial pivoting; `None` if singular.
pub fn gauss_solve(a: &Array2<f64>, b: &Array1<f64>) -> Option<Array1<f64>> {
    let n = b.len();
    let mut m = a.clone();
    let mut v = b.clone();
    for c in 0..n {
        let piv = (c..n).max_by(|&i, &j| m[[i, c]].abs().total_cmp(&m[[j, c]].abs()))?;
        if m[[piv, c]].abs() < 1e-300 {
            return None;
        }
        for k in 0..n {
            m.swap([c, k], [piv, k]);
        }
        v.swap(c, piv);
        for r in c + 1..n {
            let f = m[[r, c]] / m[[c, c]];
            for k in c..n {
                m[[r, k]] -= f * m[[c, k]];
            }
            v[r] -= f * v[c];
        }
    }
    let mut x = Array1::zeros(n);
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|k| m[[r, k]] * x[k]).sum();
        x[r] = (v[r] - s) / m[[r, r]];
    }
    Some(x)
}

fn oracle_objective(
    y: ArrayView1<f64>,
    x: ArrayView2<f64>,
    q: &Array2<f64>,
    l1: f64,
    b: &Array1<f64>,
) -> f64 {
    let r = &y - &x.dot(b);
    0.5 * r.dot(&r) + l1 * b.iter().map(|v| v.abs()).sum::<f64>() + 0.5 * b.dot(&q.dot(b))
}

/// Minimizer of `½‖y − Xβ‖² + λ₁‖β‖₁ + ½βᵀQβ` by FISTA, then polished by
/// solving the stationarity equations on the detected support and signs.
pub fn oracle_fit(y: ArrayView1<f64>, x: ArrayView2<f64>, q: &Array2<f64>, l1: f64) -> Array1<f64> {
    let p = x.ncols();
    let h = x.t().dot(&x) + q;
    // Lipschitz constant by power iteration
    let mut v = Array1::from_elem(p, 1.0);
    let mut lip = 1.0;
    for _ in 0..500 {
        let w = h.dot(&v);
        lip = w.dot(&w).sqrt();
        if lip == 0.0 {
            lip = 1.0;
            break;
        }
        v = w / lip;
    }
    let step = 1.0 / (lip * 1.01);
    let xty = x.t().dot(&y);
    let mut b = Array1::<f64>::zeros(p);
    let mut z = b.clone();
    let mut t = 1.0f64;
    for _ in 0..200_000 {
        let grad = h.dot(&z) - &xty;
        let u = &z - &(grad * step);
        let nb = u.mapv(|a| a.signum() * (a.abs() - l1 * step).max(0.0));
        let tn = (1.0 + (1.0 + 4.0 * t * t).sqrt()) / 2.0;
        let diff = &nb - &b;
        z = &nb + &(&diff * ((t - 1.0) / tn));
        let moved = diff.iter().map(|d| d.abs()).fold(0.0, f64::max);
        b = nb;
        t = tn;
        if moved < 1e-13 {
            break;
        }
    }
    polish(y, x, q, l1, b)
}

fn polish(
    y: ArrayView1<f64>,
    x: ArrayView2<f64>,
    q: &Array2<f64>,
    l1: f64,
    b: Array1<f64>,
) -> Array1<f64> {
    let p = b.len();
    let support: Vec<usize> = (0..p).filter(|&j| b[j].abs() > 1e-9).collect();
    if support.is_empty() {
        return Array1::zeros(p);
    }
    let h = x.t().dot(&x) + q;
    let xty = x.t().dot(&y);
    let k = support.len();
    let a = Array2::from_shape_fn((k, k), |(i, j)| h[[support[i], support[j]]]);
    let rhs = Array1::from_shape_fn(k, |i| xty[support[i]] - l1 * b[support[i]].signum());
    let Some(sol) = gauss_solve(&a, &rhs) else {
        return b;
    };
    let mut cand = Array1::zeros(p);
    for (i, &j) in support.iter().enumerate() {
        if sol[i].signum() != b[j].signum() {
            return b;
        }
        cand[j] = sol[i];
    }
    if oracle_objective(y, x, q, l1, &cand) <= oracle_objective(y, x, q, l1, &b) {
        cand
    } else {
        b
    }
}

/// Random Gaussian design, sparse truth and noise.
pub fn random_regression(n: usize, p: usize, seed: u64) -> (Array1<f64>, Array2<f64>) {
    let mut rng = RngSeed(seed).rng();
    let x: Array2<f64> = standard_normal_matrix(n, p, &mut rng);
    let mut beta = Array1::zeros(p);
    for j in 0..p.min(5) {
        beta[j] = rng.random_range(-2.0..2.0);
    }
    let e: Array1<f64> = standard_normal_vector(n, &mut rng);
    (x.dot(&beta) + e, x)
}

/// Random sparse, diagonally dominant precision matrix with mixed signs.
pub fn random_precision(p: usize, seed: u64) -> PrecisionEstimate<f64> {
    let mut rng = RngSeed(seed).rng();
    let mut theta = Array2::<f64>::zeros((p, p));
    for j in 0..p {
        for k in j + 1..p {
            if rng.random::<f64>() < 0.3 {
                let v = rng.random_range(-0.5..0.5);
                theta[[j, k]] = v;
                theta[[k, j]] = v;
            }
        }
    }
    for j in 0..p {
        let off: f64 = theta.row(j).iter().map(|v| v.abs()).sum();
        theta[[j, j]] = off + rng.random_range(0.5..1.5);
    }
    PrecisionEstimate::from_theta(theta).unwrap()
}

pub fn random_laplacian(p: usize, seed: u64) -> LaplacianMatrix<f64> {
    laplacian_build(&random_precision(p, seed)).unwrap()
}

pub fn random_problem(n: usize, p: usize, seed: u64) -> RegressionProblem<f64> {
    let (y, x) = random_regression(n, p, seed);
    RegressionProblem::new(y, x, random_laplacian(p, seed ^ 0xabc)).unwrap()
}
