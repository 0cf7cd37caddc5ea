//! Chebyshev-Lobatto grids on an interval, in ascending node order.

use nalgebra::DMatrix;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::C64;

#[derive(Clone, Debug, PartialEq)]
pub struct ChebGrid {
    pub a: f64,
    pub b: f64,
    /// Polynomial degree; there are `degree + 1` nodes.
    pub degree: usize,
    pub nodes: Vec<f64>,
    bary: Vec<f64>,
}

impl ChebGrid {
    pub fn new(degree: usize, a: f64, b: f64) -> Result<Self> {
        if degree < 2 || !(b > a) {
            return Err(Error::InvalidGrid(format!("Chebyshev grid needs degree >= 2 and a < b, got {degree}, [{a}, {b}]")));
        }
        let nodes = (0..=degree).map(|j| 0.5 * (a + b) - 0.5 * (b - a) * (PI * j as f64 / degree as f64).cos()).collect();
        let bary = (0..=degree)
            .map(|j| {
                let s = if j % 2 == 0 { 1.0 } else { -1.0 };
                if j == 0 || j == degree { 0.5 * s } else { s }
            })
            .collect();
        Ok(Self { a, b, degree, nodes, bary })
    }

    pub fn len(&self) -> usize {
        self.degree + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// First-derivative collocation matrix.
    pub fn diff_matrix(&self) -> DMatrix<f64> {
        let n = self.len();
        let x = &self.nodes;
        let w = &self.bary;
        let mut d = DMatrix::zeros(n, n);
        for i in 0..n {
            let mut s = 0.0;
            for j in 0..n {
                if i != j {
                    let v = (w[j] / w[i]) / (x[i] - x[j]);
                    d[(i, j)] = v;
                    s += v;
                }
            }
            d[(i, i)] = -s;
        }
        d
    }

    /// Clenshaw-Curtis weights.
    pub fn weights(&self) -> Vec<f64> {
        let n = self.degree;
        let mut w = vec![0.0; n + 1];
        for (j, wj) in w.iter_mut().enumerate() {
            let theta = PI * j as f64 / n as f64;
            let mut s = 1.0;
            for k in 1..=n / 2 {
                let b = if 2 * k == n { 1.0 } else { 2.0 };
                s -= b * (2.0 * k as f64 * theta).cos() / (4.0 * (k * k) as f64 - 1.0);
            }
            let c = if j == 0 || j == n { 1.0 } else { 2.0 };
            *wj = c * s / n as f64 * 0.5 * (self.b - self.a);
        }
        w
    }

    /// Chebyshev coefficients of the interpolant through nodal values.
    pub fn coefficients(&self, values: &[C64]) -> Vec<C64> {
        let n = self.degree;
        (0..=n)
            .map(|k| {
                let mut s = C64::new(0.0, 0.0);
                for (j, v) in values.iter().enumerate() {
                    // nodes ascending: x_j = -cos(pi j / n), T_k(x_j) = (-1)^k cos(pi j k / n)
                    let c = if j == 0 || j == n { 0.5 } else { 1.0 };
                    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                    s += v * (c * sign * (PI * (j * k) as f64 / n as f64).cos());
                }
                let scale = if k == 0 || k == n { 1.0 } else { 2.0 };
                s * (scale / n as f64)
            })
            .collect()
    }

    fn to_reference(&self, x: f64) -> f64 {
        (2.0 * x - self.a - self.b) / (self.b - self.a)
    }

    /// Clenshaw evaluation of a Chebyshev series anywhere on the real line.
    pub fn eval_series(&self, coeffs: &[C64], x: f64) -> C64 {
        let s = self.to_reference(x);
        let mut b1 = C64::new(0.0, 0.0);
        let mut b2 = C64::new(0.0, 0.0);
        for c in coeffs.iter().skip(1).rev() {
            let b0 = c + b1 * (2.0 * s) - b2;
            b2 = b1;
            b1 = b0;
        }
        coeffs[0] + b1 * s - b2
    }

    /// Barycentric interpolation matrix from the nodes to `xs` inside the interval.
    pub fn interpolation_matrix(&self, xs: &[f64]) -> DMatrix<f64> {
        let n = self.len();
        let mut m = DMatrix::zeros(xs.len(), n);
        for (r, &x) in xs.iter().enumerate() {
            if let Some(j) = self.nodes.iter().position(|&y| (x - y).abs() < 1e-15 * (1.0 + y.abs())) {
                m[(r, j)] = 1.0;
                continue;
            }
            let terms: Vec<f64> = (0..n).map(|j| self.bary[j] / (x - self.nodes[j])).collect();
            let total: f64 = terms.iter().sum();
            for j in 0..n {
                m[(r, j)] = terms[j] / total;
            }
        }
        m
    }
}

/// Real matrix promoted to complex.
pub fn complexify(m: &DMatrix<f64>) -> DMatrix<C64> {
    m.map(|v| C64::new(v, 0.0))
}
