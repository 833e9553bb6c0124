//! Uniform periodic grid and its frequency lattice.

use crate::{validate, Result};
use serde::{Deserialize, Serialize};

/// Periodic box `[-L/2, L/2)` sampled at `n` equispaced points.
///
/// Physical nodes are `x_m = -L/2 + m dx`, frequencies are
/// `xi_j = 2 pi j / L` for `j = -n/2 .. n/2 - 1`. Spectral data is always
/// stored in ascending `j` order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    n: usize,
    box_length: f64,
}

pub fn make_grid(n: usize, box_length: f64) -> Result<Grid> {
    validate(n >= 4, format!("grid size {n} too small, need at least 4"))?;
    validate(n % 2 == 0, format!("grid size {n} must be even"))?;
    validate(
        box_length.is_finite() && box_length > 0.0,
        format!("box length {box_length} must be positive and finite"),
    )?;
    Ok(Grid { n, box_length })
}

impl Grid {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn box_length(&self) -> f64 {
        self.box_length
    }

    pub fn dx(&self) -> f64 {
        self.box_length / self.n as f64
    }

    /// Frequency spacing `2 pi / L`.
    pub fn dxi(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.box_length
    }

    pub fn x(&self, m: usize) -> f64 {
        -0.5 * self.box_length + m as f64 * self.dx()
    }

    /// Frequency at storage index `idx`, i.e. `xi = 2 pi (idx - n/2) / L`.
    pub fn xi(&self, idx: usize) -> f64 {
        (idx as f64 - (self.n / 2) as f64) * self.dxi()
    }

    /// Signed mode number at storage index: `j = idx - n/2`.
    pub fn mode(&self, idx: usize) -> i64 {
        idx as i64 - (self.n / 2) as i64
    }

    /// Storage index of mode `j`, if it is on the lattice.
    pub fn index_of_mode(&self, j: i64) -> Option<usize> {
        let half = (self.n / 2) as i64;
        if (-half..half).contains(&j) {
            Some((j + half) as usize)
        } else {
            None
        }
    }

    /// Storage index of the lattice frequency closest to `xi`.
    pub fn nearest_index(&self, xi: f64) -> usize {
        let half = (self.n / 2) as i64;
        let j = (xi / self.dxi()).round() as i64;
        let j = j.clamp(-half, half - 1);
        (j + half) as usize
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.n).map(|m| self.x(m)).collect()
    }

    pub fn xis(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.xi(i)).collect()
    }

    /// Largest frequency magnitude on the lattice, `pi n / L`.
    pub fn xi_max(&self) -> f64 {
        (self.n / 2) as f64 * self.dxi()
    }
}
