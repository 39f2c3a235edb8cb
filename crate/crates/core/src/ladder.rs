//! Discrete sine bases spanning the nested subspaces of the variational
//! machinery.
//!
//! On the midpoint grid the sine modes `sin(jπ(i+½)/n)` are exactly
//! orthogonal, so the basis is orthonormal in the discrete `L²` inner
//! product. `Y_k` is the span of the first `k` modes and `Z_k` the span
//! from mode `k` on, both realized by coefficient masking.

use crate::error::{Error, Result};
use crate::grid::{BoxDomain, GridFunction};
use rand::Rng;

#[derive(Debug, Clone)]
pub struct SubspaceLadder {
    pub domain: BoxDomain,
    /// orthonormal modes, lowest frequency first
    pub basis: Vec<GridFunction>,
}

impl SubspaceLadder {
    /// Sine ladder with `k_max` modes; 2-D uses tensor modes ordered by
    /// total frequency.
    pub fn sine(domain: BoxDomain, k_max: usize) -> Result<SubspaceLadder> {
        if k_max == 0 || k_max >= domain.n {
            return Err(Error::InvalidSpec(format!(
                "k_max must be in [1, n-1], got {k_max} with n = {}",
                domain.n
            )));
        }
        let n = domain.n;
        let vol = domain.volume();
        let mode1 = |j: usize, i: usize| {
            (j as f64 * std::f64::consts::PI * (i as f64 + 0.5) / n as f64).sin()
        };
        let mut basis = Vec::with_capacity(k_max);
        match domain.d {
            1 => {
                let c = (2.0 / vol).sqrt();
                for j in 1..=k_max {
                    let values = (0..n).map(|i| c * mode1(j, i)).collect();
                    basis.push(GridFunction::new(domain.clone(), values)?);
                }
            }
            _ => {
                let mut freq: Vec<(usize, usize)> = (1..n)
                    .flat_map(|jx| (1..n).map(move |jy| (jx, jy)))
                    .collect();
                freq.sort_by_key(|&(jx, jy)| (jx * jx + jy * jy, jx));
                let c = (4.0 / vol).sqrt();
                for &(jx, jy) in freq.iter().take(k_max) {
                    let values = (0..domain.num_points())
                        .map(|i| c * mode1(jx, i / n) * mode1(jy, i % n))
                        .collect();
                    basis.push(GridFunction::new(domain.clone(), values)?);
                }
            }
        }
        Ok(SubspaceLadder { domain, basis })
    }

    pub fn k_max(&self) -> usize {
        self.basis.len()
    }

    /// Linear combination `Σ coeffs[t]·e_{offset+t+1}` (offset 0 starts at
    /// the first mode).
    pub fn combine(&self, offset: usize, coeffs: &[f64]) -> Result<GridFunction> {
        if offset + coeffs.len() > self.basis.len() {
            return Err(Error::Shape(format!(
                "ladder has {} modes, requested up to {}",
                self.basis.len(),
                offset + coeffs.len()
            )));
        }
        let mut out = GridFunction::zeros(self.domain.clone());
        for (t, &c) in coeffs.iter().enumerate() {
            for (o, b) in out.values.iter_mut().zip(&self.basis[offset + t].values) {
                *o += c * b;
            }
        }
        Ok(out)
    }

    /// Standard-normal coefficients over modes `offset..offset+dim`.
    pub fn random_member(
        &self,
        offset: usize,
        dim: usize,
        rng: &mut impl Rng,
    ) -> Result<GridFunction> {
        let coeffs: Vec<f64> = (0..dim)
            .map(|_| {
                // Box-Muller keeps the dependency surface small
                let u1: f64 = rng.gen_range(1e-12..1.0);
                let u2: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
                (-2.0 * u1.ln()).sqrt() * u2.cos()
            })
            .collect();
        self.combine(offset, &coeffs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sine_modes_are_orthonormal() {
        let dom = BoxDomain::interval(-2.0, 2.0, 32).unwrap();
        let ladder = SubspaceLadder::sine(dom.clone(), 8).unwrap();
        let w = dom.cell_weight();
        for a in 0..8 {
            for b in 0..8 {
                let dot: f64 = ladder.basis[a]
                    .values
                    .iter()
                    .zip(&ladder.basis[b].values)
                    .map(|(x, y)| x * y)
                    .sum::<f64>()
                    * w;
                let want = if a == b { 1.0 } else { 0.0 };
                assert!((dot - want).abs() < 1e-10, "({a},{b}): {dot}");
            }
        }
    }

    #[test]
    fn tensor_modes_are_orthonormal() {
        let dom = BoxDomain::new(vec![0.0, 0.0], vec![1.0, 1.0], 16).unwrap();
        let ladder = SubspaceLadder::sine(dom.clone(), 6).unwrap();
        let w = dom.cell_weight();
        for a in 0..6 {
            for b in a..6 {
                let dot: f64 = ladder.basis[a]
                    .values
                    .iter()
                    .zip(&ladder.basis[b].values)
                    .map(|(x, y)| x * y)
                    .sum::<f64>()
                    * w;
                let want = if a == b { 1.0 } else { 0.0 };
                assert!((dot - want).abs() < 1e-10, "({a},{b}): {dot}");
            }
        }
    }

    #[test]
    fn combine_respects_offsets() {
        let dom = BoxDomain::interval(0.0, 1.0, 16).unwrap();
        let ladder = SubspaceLadder::sine(dom, 5).unwrap();
        let u = ladder.combine(2, &[1.0]).unwrap();
        assert_eq!(u.values, ladder.basis[2].values);
        assert!(ladder.combine(4, &[1.0, 1.0]).is_err());
    }
}
