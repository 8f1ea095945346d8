//! Sampled functions on uniform planar grids.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::weights::Weight;

/// Values at the nodes corner + (i h_x, j h_y), 0 ≤ i < shape[0], 0 ≤ j < shape[1].
/// Stored with j varying fastest. Zero outside the box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridFunction {
    pub corner: [f64; 2],
    pub spacing: [f64; 2],
    pub shape: [usize; 2],
    pub values: Vec<Complex64>,
}

impl GridFunction {
    /// Zero function on the box [corner, corner + side] with `shape` nodes.
    pub fn zeros(corner: [f64; 2], side: [f64; 2], shape: [usize; 2]) -> Result<Self> {
        if shape[0] < 2 || shape[1] < 2 {
            return domain(format!("grid needs at least 2 nodes per axis, got {shape:?}"));
        }
        if !(side[0] > 0.0 && side[1] > 0.0) {
            return domain(format!("grid sides must be positive, got {side:?}"));
        }
        let spacing = [side[0] / (shape[0] - 1) as f64, side[1] / (shape[1] - 1) as f64];
        Ok(GridFunction { corner, spacing, shape, values: vec![Complex64::new(0.0, 0.0); shape[0] * shape[1]] })
    }

    /// Square grid centered at the origin.
    pub fn centered(side: f64, nodes: usize) -> Result<Self> {
        Self::zeros([-0.5 * side, -0.5 * side], [side, side], [nodes, nodes])
    }

    pub fn from_fn(
        corner: [f64; 2],
        side: [f64; 2],
        shape: [usize; 2],
        f: impl Fn([f64; 2]) -> Complex64,
    ) -> Result<Self> {
        let mut g = Self::zeros(corner, side, shape)?;
        for k in 0..g.len() {
            g.values[k] = f(g.node_at(k));
        }
        Ok(g)
    }

    /// Same grid, new values.
    pub fn with_fn(&self, f: impl Fn([f64; 2]) -> Complex64) -> Self {
        let mut g = self.clone();
        for k in 0..g.len() {
            g.values[k] = f(g.node_at(k));
        }
        g
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.shape[1] + j
    }

    pub fn node(&self, i: usize, j: usize) -> [f64; 2] {
        [self.corner[0] + i as f64 * self.spacing[0], self.corner[1] + j as f64 * self.spacing[1]]
    }

    pub fn node_at(&self, k: usize) -> [f64; 2] {
        self.node(k / self.shape[1], k % self.shape[1])
    }

    pub fn cell_area(&self) -> f64 {
        self.spacing[0] * self.spacing[1]
    }

    pub fn same_grid(&self, other: &GridFunction) -> bool {
        self.corner == other.corner && self.spacing == other.spacing && self.shape == other.shape
    }

    pub fn abs(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm()).collect()
    }

    pub fn from_real(&self, values: Vec<f64>) -> Self {
        GridFunction { values: values.into_iter().map(|v| Complex64::new(v, 0.0)).collect(), ..self.clone() }
    }

    pub fn real(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.re).collect()
    }

    pub fn scaled(&self, c: f64) -> Self {
        GridFunction { values: self.values.iter().map(|v| v * c).collect(), ..self.clone() }
    }

    pub fn add(&self, other: &GridFunction) -> Result<Self> {
        if !self.same_grid(other) {
            return domain("grid functions live on different grids");
        }
        Ok(GridFunction { values: self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect(), ..self.clone() })
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// (Σ |g|^p w h_x h_y)^{1/p}.
    pub fn weighted_norm(&self, p: f64, w: &Weight) -> f64 {
        let s: f64 = (0..self.len()).map(|k| self.values[k].norm().powf(p) * w.eval(&self.node_at(k))).sum();
        (s * self.cell_area()).powf(1.0 / p)
    }
}

/// Sum of `count` Gaussian bumps with random centers, widths, amplitudes and signs
/// inside the middle half of the grid.
pub fn random_bumps<R: Rng + ?Sized>(grid: &GridFunction, count: usize, rng: &mut R) -> GridFunction {
    let lo = [grid.corner[0], grid.corner[1]];
    let side = [
        grid.spacing[0] * (grid.shape[0] - 1) as f64,
        grid.spacing[1] * (grid.shape[1] - 1) as f64,
    ];
    let bumps: Vec<([f64; 2], f64, f64)> = (0..count)
        .map(|_| {
            let c = [lo[0] + side[0] * rng.gen_range(0.25..0.75), lo[1] + side[1] * rng.gen_range(0.25..0.75)];
            let width = side[0].min(side[1]) * rng.gen_range(0.02..0.15);
            let amp = rng.gen_range(0.2..2.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            (c, width, amp)
        })
        .collect();
    grid.with_fn(|x| {
        let v: f64 = bumps
            .iter()
            .map(|(c, w, a)| a * (-((x[0] - c[0]).powi(2) + (x[1] - c[1]).powi(2)) / (2.0 * w * w)).exp())
            .sum();
        Complex64::new(v, 0.0)
    })
}
