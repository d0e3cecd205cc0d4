//! Axis-aligned boxes standing in for open working regions.

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Region {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl Region {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() || lower.is_empty() {
            return Err(Error::InvalidSystem(format!(
                "box bounds have mismatched or zero length ({} vs {})",
                lower.len(),
                upper.len()
            )));
        }
        for (i, (lo, hi)) in lower.iter().zip(&upper).enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::InvalidSystem(format!(
                    "box dimension {} must satisfy finite lower < upper, got [{lo}, {hi}]",
                    i + 1
                )));
            }
        }
        Ok(Self { lower, upper })
    }

    pub fn from_bounds(bounds: &[(f64, f64)]) -> Result<Self> {
        Self::new(
            bounds.iter().map(|b| b.0).collect(),
            bounds.iter().map(|b| b.1).collect(),
        )
    }

    /// The cube `[-r, r]^n`.
    pub fn cube(n: usize, r: f64) -> Self {
        Self::new(vec![-r; n], vec![r; n]).expect("valid cube")
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn width(&self, i: usize) -> f64 {
        self.upper[i] - self.lower[i]
    }

    pub fn contains(&self, z: &[f64]) -> bool {
        z.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .all(|(v, (lo, hi))| *v >= *lo && *v <= *hi)
    }

    /// Distance from an interior point to the nearest face (negative outside).
    pub fn distance_to_boundary(&self, z: &[f64]) -> f64 {
        z.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .map(|(v, (lo, hi))| (v - lo).min(hi - v))
            .fold(f64::INFINITY, f64::min)
    }

    /// Sub-box over the coordinate range `dims`.
    pub fn project(&self, dims: std::ops::Range<usize>) -> Region {
        Region {
            lower: self.lower[dims.clone()].to_vec(),
            upper: self.upper[dims].to_vec(),
        }
    }

    /// Each side pushed outwards by `amount[i]`.
    pub fn inflate(&self, amount: &[f64]) -> Region {
        Region {
            lower: self.lower.iter().zip(amount).map(|(l, a)| l - a).collect(),
            upper: self.upper.iter().zip(amount).map(|(u, a)| u + a).collect(),
        }
    }

    /// Point with coordinates `lower + frac * width`.
    pub fn at(&self, frac: &[f64]) -> Vec<f64> {
        frac.iter()
            .enumerate()
            .map(|(i, f)| self.lower[i] + f * self.width(i))
            .collect()
    }

    /// Regular grid of `per_dim^n` points, including the corners, in
    /// lexicographic order with the last coordinate varying fastest.
    pub fn grid(&self, per_dim: usize) -> Vec<Vec<f64>> {
        let n = self.dim();
        let per_dim = per_dim.max(2);
        let total = per_dim.pow(n as u32);
        (0..total)
            .map(|mut idx| {
                let mut frac = vec![0.0; n];
                for d in (0..n).rev() {
                    frac[d] = (idx % per_dim) as f64 / (per_dim - 1) as f64;
                    idx /= per_dim;
                }
                self.at(&frac)
            })
            .collect()
    }

    /// Halton points (bases 2, 3, 5, ...) mapped into the box.
    pub fn halton(&self, count: usize) -> Vec<Vec<f64>> {
        let bases = first_primes(self.dim());
        (1..=count)
            .map(|i| {
                let frac: Vec<f64> = bases.iter().map(|&b| radical_inverse(i, b)).collect();
                self.at(&frac)
            })
            .collect()
    }

    /// Sample points on the boundary faces: for each face a `per_dim^(n-1)` grid.
    pub fn boundary_samples(&self, per_dim: usize) -> Vec<Vec<f64>> {
        let n = self.dim();
        let mut out = Vec::new();
        if n == 1 {
            return vec![vec![self.lower[0]], vec![self.upper[0]]];
        }
        for fixed in 0..n {
            let rest: Vec<usize> = (0..n).filter(|&d| d != fixed).collect();
            let face = Region {
                lower: rest.iter().map(|&d| self.lower[d]).collect(),
                upper: rest.iter().map(|&d| self.upper[d]).collect(),
            };
            for side in [self.lower[fixed], self.upper[fixed]] {
                for pt in face.grid(per_dim) {
                    let mut z = Vec::with_capacity(n);
                    let mut it = pt.iter();
                    for d in 0..n {
                        z.push(if d == fixed { side } else { *it.next().unwrap() });
                    }
                    out.push(z);
                }
            }
        }
        out
    }
}

fn radical_inverse(mut i: usize, base: usize) -> f64 {
    let mut inv = 1.0 / base as f64;
    let mut out = 0.0;
    while i > 0 {
        out += (i % base) as f64 * inv;
        i /= base;
        inv /= base as f64;
    }
    out
}

fn first_primes(n: usize) -> Vec<usize> {
    let mut primes = Vec::with_capacity(n);
    let mut c = 2;
    while primes.len() < n {
        if primes.iter().all(|p| c % p != 0) {
            primes.push(c);
        }
        c += 1;
    }
    primes
}
