//! Greedy Leja sequences on sampled curves.

use serde::Serialize;

use crate::C64;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LejaSet {
    pub nodes: Vec<C64>,
    /// `Π_{j<k} |z_k − z_j|` for each node after the first.
    pub products: Vec<f64>,
    /// `max |P_N|` over the samples, `P_N` the node polynomial.
    pub next: f64,
}

impl LejaSet {
    /// Monic node polynomial, ascending coefficients.
    pub fn monic_coefficients(&self) -> Vec<C64> {
        let mut p = vec![C64::new(1.0, 0.0)];
        for &z in &self.nodes {
            let mut next = vec![C64::new(0.0, 0.0); p.len() + 1];
            for (k, c) in p.iter().enumerate() {
                next[k + 1] += c;
                next[k] -= c * z;
            }
            p = next;
        }
        p
    }

    /// Product-form evaluation of the node polynomial.
    pub fn eval(&self, w: C64) -> C64 {
        self.nodes.iter().fold(C64::new(1.0, 0.0), |acc, z| acc * (w - z))
    }

    /// `(max |P_N|)^{1/N}` over the samples.
    pub fn capacity_estimate(&self) -> f64 {
        if self.nodes.is_empty() {
            return 0.0;
        }
        self.next.powf(1.0 / self.nodes.len() as f64)
    }
}

/// `n` Leja points among `samples`, starting from `seed` (taken as the
/// first node as given).
pub fn leja_points(samples: &[C64], n: usize, seed: C64) -> LejaSet {
    let mut nodes = Vec::with_capacity(n);
    let mut products = Vec::with_capacity(n.saturating_sub(1));
    if n == 0 {
        return LejaSet { nodes, products, next: 0.0 };
    }
    nodes.push(seed);
    // Running log-products keep the greedy step free of under/overflow.
    let mut logs: Vec<f64> = samples.iter().map(|z| (z - seed).norm().ln()).collect();
    while nodes.len() < n {
        let (j, best) = logs
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(j, &l)| (j, l))
            .expect("sample set is non-empty");
        let z = samples[j];
        nodes.push(z);
        products.push(best.exp());
        for (l, s) in logs.iter_mut().zip(samples) {
            *l += (s - z).norm().ln();
        }
    }
    let next = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max).exp();
    LejaSet { nodes, products, next }
}
