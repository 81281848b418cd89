//! Newton-form interpolation with one double node.

use serde::Serialize;

use crate::C64;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NewtonPoly {
    pub nodes: Vec<C64>,
    pub coeffs: Vec<C64>,
}

impl NewtonPoly {
    /// Interpolates `values` at `nodes`; where a node repeats its predecessor
    /// the divided difference is `derivative`.
    pub fn hermite(nodes: &[C64], values: &[C64], derivative: C64) -> Self {
        let n = nodes.len();
        let mut d = values.to_vec();
        for j in 1..n {
            for i in (j..n).rev() {
                let h = nodes[i] - nodes[i - j];
                d[i] = if h.norm() == 0.0 { derivative } else { (d[i] - d[i - 1]) / h };
            }
        }
        Self { nodes: nodes.to_vec(), coeffs: d }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn eval(&self, w: C64) -> C64 {
        self.eval_with_derivative(w).0
    }

    pub fn eval_with_derivative(&self, w: C64) -> (C64, C64) {
        let n = self.coeffs.len();
        if n == 0 {
            return (C64::new(0.0, 0.0), C64::new(0.0, 0.0));
        }
        let mut p = self.coeffs[n - 1];
        let mut dp = C64::new(0.0, 0.0);
        for k in (0..n - 1).rev() {
            dp = dp * (w - self.nodes[k]) + p;
            p = p * (w - self.nodes[k]) + self.coeffs[k];
        }
        (p, dp)
    }

    /// Ascending monomial coefficients.
    pub fn monomial(&self) -> Vec<C64> {
        let n = self.coeffs.len();
        if n == 0 {
            return Vec::new();
        }
        let mut p = vec![self.coeffs[n - 1]];
        for k in (0..n - 1).rev() {
            let mut next = vec![C64::new(0.0, 0.0); p.len() + 1];
            for (i, c) in p.iter().enumerate() {
                next[i + 1] += c;
                next[i] -= c * self.nodes[k];
            }
            next[0] += self.coeffs[k];
            p = next;
        }
        p
    }
}
