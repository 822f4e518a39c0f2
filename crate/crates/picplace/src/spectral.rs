//! Spectral Poisson solver on the bin grid.
//!
//! The density grid is expanded in a cosine basis (zero normal derivative at
//! the die edges), the potential divides each mode by the discrete Laplacian
//! eigenvalue, and the field comes from differentiating the cosine
//! interpolant, which turns the x-expansion into a sine series.

use rustdct::{DctPlanner, TransformType2And3};
use std::sync::Arc;

pub struct PoissonSolver {
    m: usize,
    transform: Arc<dyn TransformType2And3<f64>>,
    /// Discrete Neumann Laplacian eigenvalues per mode, x and y.
    lambda_x: Vec<f64>,
    lambda_y: Vec<f64>,
    /// Continuous derivative factors pi*u/W and pi*v/H.
    wx: Vec<f64>,
    wy: Vec<f64>,
    scratch: Vec<f64>,
}

pub struct PoissonSolution {
    pub psi: Vec<f64>,
    pub ex: Vec<f64>,
    pub ey: Vec<f64>,
}

impl PoissonSolver {
    pub fn new(m: usize, die_w: f64, die_h: f64) -> Self {
        assert!(m >= 2, "grid must have at least 2 bins per side");
        let transform = DctPlanner::new().plan_dct2(m);
        let bin_w = die_w / m as f64;
        let bin_h = die_h / m as f64;
        let eig = |u: usize, h: f64| (2.0 - 2.0 * (std::f64::consts::PI * u as f64 / m as f64).cos()) / (h * h);
        let lambda_x = (0..m).map(|u| eig(u, bin_w)).collect();
        let lambda_y = (0..m).map(|v| eig(v, bin_h)).collect();
        let wx = (0..m).map(|u| std::f64::consts::PI * u as f64 / die_w).collect();
        let wy = (0..m).map(|v| std::f64::consts::PI * v as f64 / die_h).collect();
        let scratch = vec![0.0; transform.get_scratch_len()];
        PoissonSolver { m, transform, lambda_x, lambda_y, wx, wy, scratch }
    }

    pub fn grid_dim(&self) -> usize {
        self.m
    }

    /// Solve -Laplace(psi) = rho for a mean-free right-hand side and return
    /// the potential and field sampled at bin centers. Layout: index
    /// `iy * m + ix`.
    pub fn solve(&mut self, rho_mean_free: &[f64]) -> PoissonSolution {
        let m = self.m;
        assert_eq!(rho_mean_free.len(), m * m);

        // Forward cosine series coefficients a[v*m + u].
        let mut a = rho_mean_free.to_vec();
        self.rows_dct2(&mut a);
        transpose(&mut a, m);
        self.rows_dct2(&mut a);
        transpose(&mut a, m);
        let norm = 4.0 / (m as f64 * m as f64);
        for v in 0..m {
            for u in 0..m {
                let cu = if u == 0 { 0.5 } else { 1.0 };
                let cv = if v == 0 { 0.5 } else { 1.0 };
                a[v * m + u] *= norm * cu * cv;
            }
        }

        // Potential coefficients.
        let mut phi = vec![0.0; m * m];
        for v in 0..m {
            for u in 0..m {
                if u == 0 && v == 0 {
                    continue;
                }
                phi[v * m + u] = a[v * m + u] / (self.lambda_x[u] + self.lambda_y[v]);
            }
        }

        // psi = sum phi cos cos.
        let mut psi = phi.clone();
        self.rows_cos_eval(&mut psi);
        transpose(&mut psi, m);
        self.rows_cos_eval(&mut psi);
        transpose(&mut psi, m);

        // ex = -d psi / dx: sine series in x, cosine in y.
        let mut ex = vec![0.0; m * m];
        for v in 0..m {
            for u in 0..m {
                ex[v * m + u] = phi[v * m + u] * self.wx[u];
            }
        }
        self.rows_sin_eval(&mut ex);
        transpose(&mut ex, m);
        self.rows_cos_eval(&mut ex);
        transpose(&mut ex, m);

        // ey: cosine in x, sine in y.
        let mut ey = vec![0.0; m * m];
        for v in 0..m {
            for u in 0..m {
                ey[v * m + u] = phi[v * m + u] * self.wy[v];
            }
        }
        self.rows_cos_eval(&mut ey);
        transpose(&mut ey, m);
        self.rows_sin_eval(&mut ey);
        transpose(&mut ey, m);

        PoissonSolution { psi, ex, ey }
    }

    fn rows_dct2(&mut self, buf: &mut [f64]) {
        let m = self.m;
        for row in buf.chunks_exact_mut(m) {
            self.transform.process_dct2_with_scratch(row, &mut self.scratch);
        }
    }

    /// Evaluate sum_u series[u] * cos(pi u (j+1/2)/m) in place per row.
    fn rows_cos_eval(&mut self, buf: &mut [f64]) {
        let m = self.m;
        for row in buf.chunks_exact_mut(m) {
            row[0] *= 2.0; // DCT-III halves its first input
            self.transform.process_dct3_with_scratch(row, &mut self.scratch);
        }
    }

    /// Evaluate sum_{u>=1} series[u] * sin(pi u (j+1/2)/m) in place per row.
    fn rows_sin_eval(&mut self, buf: &mut [f64]) {
        let m = self.m;
        for row in buf.chunks_exact_mut(m) {
            // DST-III consumes sin((n+1) ...) coefficients; shift down by one.
            for n in 0..m - 1 {
                row[n] = row[n + 1];
            }
            row[m - 1] = 0.0;
            self.transform.process_dst3_with_scratch(row, &mut self.scratch);
        }
    }
}

fn transpose(buf: &mut [f64], m: usize) {
    for i in 0..m {
        for j in i + 1..m {
            buf.swap(i * m + j, j * m + i);
        }
    }
}
