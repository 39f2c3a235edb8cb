//! Discrete function spaces on box domains.
//!
//! Functions are sampled at the midpoints of a uniform cell grid, so every
//! quadrature weight is one cell volume: positive, second-order accurate
//! and exact on constants, which keeps the Luxemburg bisection well posed.

use crate::error::{Error, Result};
use crate::nfunc::{ConjugateNFunction, NFunction};
use crate::numeric::{golden_min, invert_decreasing, log_grid};
use std::io::{BufRead, BufWriter, Write};
use std::path::Path;

/// Relative tolerance of the Luxemburg bisection.
pub const LUXEMBURG_REL_TOL: f64 = 1e-10;

/// A uniform box `[lo, hi]` in one or two dimensions with `n` cells per
/// axis.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxDomain {
    pub d: usize,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub n: usize,
}

impl BoxDomain {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>, n: usize) -> Result<BoxDomain> {
        let d = lo.len();
        if d == 0 || d > 2 || hi.len() != d {
            return Err(Error::InvalidSpec(format!(
                "box dimension must be 1 or 2, got lo of len {d}, hi of len {}",
                hi.len()
            )));
        }
        if !(n.is_power_of_two() && (8..=256).contains(&n)) {
            return Err(Error::InvalidSpec(format!(
                "points per axis must be a power of two in [8, 256], got {n}"
            )));
        }
        for k in 0..d {
            if !(lo[k].is_finite() && hi[k].is_finite() && lo[k] < hi[k]) {
                return Err(Error::InvalidSpec(format!(
                    "need lo < hi componentwise, got {:?} .. {:?}",
                    lo, hi
                )));
            }
        }
        Ok(BoxDomain { d, lo, hi, n })
    }

    /// 1-D interval helper.
    pub fn interval(lo: f64, hi: f64, n: usize) -> Result<BoxDomain> {
        BoxDomain::new(vec![lo], vec![hi], n)
    }

    pub fn num_points(&self) -> usize {
        self.n.pow(self.d as u32)
    }

    pub fn side(&self, axis: usize) -> f64 {
        self.hi[axis] - self.lo[axis]
    }

    pub fn step(&self, axis: usize) -> f64 {
        self.side(axis) / self.n as f64
    }

    pub fn volume(&self) -> f64 {
        (0..self.d).map(|k| self.side(k)).product()
    }

    /// Euclidean diameter of the box.
    pub fn diameter(&self) -> f64 {
        (0..self.d).map(|k| self.side(k).powi(2)).sum::<f64>().sqrt()
    }

    /// Quadrature weight of every cell (midpoint rule).
    pub fn cell_weight(&self) -> f64 {
        (0..self.d).map(|k| self.step(k)).product()
    }

    /// Surface area of the unit sphere in dimension `d` (2 for d = 1,
    /// 2π for d = 2).
    pub fn unit_sphere_area(&self) -> f64 {
        match self.d {
            1 => 2.0,
            _ => 2.0 * std::f64::consts::PI,
        }
    }

    /// Volume of the unit ball in dimension `d`.
    pub fn unit_ball_volume(&self) -> f64 {
        match self.d {
            1 => 2.0,
            _ => std::f64::consts::PI,
        }
    }

    /// Cell-center coordinates of flat index `idx` (x-major for d = 2).
    pub fn point(&self, idx: usize) -> [f64; 2] {
        match self.d {
            1 => [self.lo[0] + (idx as f64 + 0.5) * self.step(0), 0.0],
            _ => {
                let iy = idx % self.n;
                let ix = idx / self.n;
                [
                    self.lo[0] + (ix as f64 + 0.5) * self.step(0),
                    self.lo[1] + (iy as f64 + 0.5) * self.step(1),
                ]
            }
        }
    }
}

/// Real samples of a function at the cell centers of a [`BoxDomain`].
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    pub domain: BoxDomain,
    pub values: Vec<f64>,
}

impl GridFunction {
    pub fn new(domain: BoxDomain, values: Vec<f64>) -> Result<GridFunction> {
        if values.len() != domain.num_points() {
            return Err(Error::Shape(format!(
                "{} values for a grid of {} points",
                values.len(),
                domain.num_points()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("grid values must be finite".into()));
        }
        Ok(GridFunction { domain, values })
    }

    pub fn zeros(domain: BoxDomain) -> GridFunction {
        let n = domain.num_points();
        GridFunction {
            domain,
            values: vec![0.0; n],
        }
    }

    pub fn from_fn(domain: BoxDomain, f: impl Fn(&[f64]) -> f64) -> Result<GridFunction> {
        let values: Vec<f64> = (0..domain.num_points())
            .map(|i| {
                let p = domain.point(i);
                f(&p[..domain.d])
            })
            .collect();
        GridFunction::new(domain, values)
    }

    pub fn weight(&self) -> f64 {
        self.domain.cell_weight()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |a, &v| a.max(v.abs()))
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    pub fn scaled(&self, c: f64) -> GridFunction {
        GridFunction {
            domain: self.domain.clone(),
            values: self.values.iter().map(|v| c * v).collect(),
        }
    }

    /// `self + c * other` on a shared domain.
    pub fn axpy(&self, c: f64, other: &GridFunction) -> Result<GridFunction> {
        same_domain(self, other)?;
        Ok(GridFunction {
            domain: self.domain.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + c * b)
                .collect(),
        })
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> GridFunction {
        GridFunction {
            domain: self.domain.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Writes `x1[,x2],value` rows.
    pub fn to_csv(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path)?;
        let mut w = BufWriter::new(file);
        if self.domain.d == 1 {
            writeln!(w, "x1,value")?;
        } else {
            writeln!(w, "x1,x2,value")?;
        }
        for (i, v) in self.values.iter().enumerate() {
            let p = self.domain.point(i);
            if self.domain.d == 1 {
                writeln!(w, "{:.17e},{:.17e}", p[0], v)?;
            } else {
                writeln!(w, "{:.17e},{:.17e},{:.17e}", p[0], p[1], v)?;
            }
        }
        Ok(())
    }

    /// Reads rows written by [`GridFunction::to_csv`]; the domain metadata
    /// comes from the caller and the coordinates are cross-checked.
    pub fn from_csv(domain: BoxDomain, path: &Path) -> Result<GridFunction> {
        let file = std::fs::File::open(path)?;
        let reader = std::io::BufReader::new(file);
        let mut values = Vec::with_capacity(domain.num_points());
        let mut idx = 0usize;
        for (lineno, line) in reader.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || lineno == 0 && line.starts_with('x') {
                continue;
            }
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != domain.d + 1 {
                return Err(Error::Parse(format!(
                    "line {}: expected {} columns, got {}",
                    lineno + 1,
                    domain.d + 1,
                    cols.len()
                )));
            }
            let parse = |s: &str| -> Result<f64> {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))
            };
            if idx >= domain.num_points() {
                return Err(Error::Shape("more rows than grid points".into()));
            }
            let p = domain.point(idx);
            for k in 0..domain.d {
                let x = parse(cols[k])?;
                let tol = 1e-9 * domain.side(k).abs().max(1.0);
                if (x - p[k]).abs() > tol {
                    return Err(Error::Shape(format!(
                        "row {idx}: coordinate {x} does not match grid point {}",
                        p[k]
                    )));
                }
            }
            values.push(parse(cols[domain.d])?);
            idx += 1;
        }
        GridFunction::new(domain, values)
    }
}

pub fn same_domain(u: &GridFunction, v: &GridFunction) -> Result<()> {
    if u.domain != v.domain {
        return Err(Error::Shape("grid functions live on different domains".into()));
    }
    Ok(())
}

/// Modular `ρ(u, M) = Σ M(u(x)) w(x)`.
pub fn modular(u: &GridFunction, f: &impl NFunction) -> Result<f64> {
    let w = u.weight();
    Ok(crate::numeric::chunked_sum(u.values.iter().map(|&v| f.value(v))) * w)
}

/// Weighted modular `Σ V(x) M(u(x)) w(x)`.
pub fn weighted_modular(u: &GridFunction, f: &impl NFunction, vw: &GridFunction) -> Result<f64> {
    same_domain(u, vw)?;
    let w = u.weight();
    Ok(crate::numeric::chunked_sum(
        u.values.iter().zip(&vw.values).map(|(&v, &vv)| vv * f.value(v)),
    ) * w)
}

fn luxemburg_of(modular_at: impl Fn(f64) -> f64, scale: f64) -> Result<f64> {
    // bracket per the doubling policy: [scale/2^40, scale*2^40]
    let lam = invert_decreasing(
        &modular_at,
        1.0,
        scale / (1u64 << 40) as f64,
        scale * (1u64 << 40) as f64,
        LUXEMBURG_REL_TOL,
    )
    .ok_or_else(|| Error::Range("Luxemburg bisection could not bracket the unit modular".into()))?;
    let check = modular_at(lam);
    if !(0.999_999_99..=1.000_000_01).contains(&check) {
        return Err(Error::Range(format!(
            "Luxemburg post-check failed: modular(u/lambda) = {check}"
        )));
    }
    Ok(lam)
}

/// Luxemburg norm `inf { λ > 0 : ρ(u/λ) ≤ 1 }` by bisection; 0 for the
/// zero function.
pub fn luxemburg_norm(u: &GridFunction, f: &impl NFunction) -> Result<f64> {
    if u.is_zero() {
        return Ok(0.0);
    }
    let w = u.weight();
    let values = &u.values;
    luxemburg_of(
        |lam| crate::numeric::chunked_sum(values.iter().map(|&v| f.value(v / lam))) * w,
        u.max_abs(),
    )
}

/// Luxemburg norm of the `V`-weighted modular; requires `inf V > 0`.
pub fn weighted_luxemburg(
    u: &GridFunction,
    f: &impl NFunction,
    v_weight: &GridFunction,
) -> Result<f64> {
    same_domain(u, v_weight)?;
    let vmin = v_weight.values.iter().cloned().fold(f64::INFINITY, f64::min);
    if !(vmin > 0.0) {
        return Err(Error::Precondition(format!(
            "(V1): potential must be bounded below by a positive constant, min V = {vmin}"
        )));
    }
    if u.is_zero() {
        return Ok(0.0);
    }
    let w = u.weight();
    luxemburg_of(
        |lam| {
            crate::numeric::chunked_sum(
                u.values
                    .iter()
                    .zip(&v_weight.values)
                    .map(|(&v, &vv)| vv * f.value(v / lam)),
            ) * w
        },
        u.max_abs(),
    )
}

/// Orlicz (Amemiya) norm `inf_{k>0} (1 + ρ(k·u))/k`, minimized by
/// golden-section over `log k`. Sits within `[1, 2]` times the Luxemburg
/// norm.
pub fn orlicz_norm(u: &GridFunction, f: &impl NFunction) -> Result<f64> {
    if u.is_zero() {
        return Ok(0.0);
    }
    let lux = luxemburg_norm(u, f)?;
    let w = u.weight();
    let objective = |k: f64| {
        (1.0 + crate::numeric::chunked_sum(u.values.iter().map(|&v| f.value(k * v))) * w) / k
    };
    // the minimizer lies near 1/lux; scan three decades around it, refine
    let k0 = 1.0 / lux;
    let scan = log_grid(k0 / 32.0, k0 * 32.0, 121);
    let mut best_i = 0;
    let mut best = f64::INFINITY;
    for (i, &k) in scan.iter().enumerate() {
        let v = objective(k);
        if v < best {
            best = v;
            best_i = i;
        }
    }
    let a = scan[best_i.saturating_sub(1)].ln();
    let b = scan[(best_i + 1).min(scan.len() - 1)].ln();
    let (_, refined) = golden_min(|lk| objective(lk.exp()), a, b, 80);
    Ok(best.min(refined))
}

/// `L^μ` norm `(Σ |u|^μ w)^{1/μ}`.
pub fn lmu_norm(u: &GridFunction, mu: f64) -> Result<f64> {
    if !(mu.is_finite() && mu >= 1.0) {
        return Err(Error::Domain(format!("lmu_norm needs mu >= 1, got {mu}")));
    }
    let w = u.weight();
    Ok(
        (crate::numeric::chunked_sum(u.values.iter().map(|&v| v.abs().powf(mu))) * w)
            .powf(1.0 / mu),
    )
}

/// Both sides of the Orlicz Hölder inequality
/// `∫|uv| ≤ ‖u‖_{L^M} ‖v‖_{L^M̄}`.
#[derive(Debug, Clone, Copy)]
pub struct HolderReport {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

pub fn holder_check(
    u: &GridFunction,
    v: &GridFunction,
    f: &impl NFunction,
) -> Result<HolderReport> {
    same_domain(u, v)?;
    let w = u.weight();
    let lhs = crate::numeric::chunked_sum(
        u.values.iter().zip(&v.values).map(|(&a, &b)| (a * b).abs()),
    ) * w;
    let conj = ConjugateNFunction { base: f };
    let rhs = orlicz_norm(u, f)? * orlicz_norm(v, &conj)?;
    Ok(HolderReport {
        lhs,
        rhs,
        holds: lhs <= rhs + 1e-8,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nfunc::NFunctionSpec;

    fn unit_interval(n: usize) -> BoxDomain {
        BoxDomain::interval(0.0, 1.0, n).unwrap()
    }

    #[test]
    fn weights_sum_to_volume() {
        let dom = BoxDomain::new(vec![-1.0, 0.0], vec![2.0, 0.5], 16).unwrap();
        let total = dom.cell_weight() * dom.num_points() as f64;
        assert!(((total - dom.volume()) / dom.volume()).abs() < 1e-12);
    }

    #[test]
    fn modular_examples() {
        let p2 = NFunctionSpec::power(2.0).unwrap();
        let p3 = NFunctionSpec::power(3.0).unwrap();
        let dom = unit_interval(64);
        let zero = GridFunction::zeros(dom.clone());
        assert_eq!(modular(&zero, &p2).unwrap(), 0.0);
        // constants are integrated exactly by the midpoint rule
        let c = GridFunction::from_fn(dom.clone(), |_| 1.7).unwrap();
        assert!((modular(&c, &p2).unwrap() - 1.7 * 1.7).abs() < 1e-12);
        // midpoint-rule oracle: ∫₀¹ x³ = 1/4
        let lin = GridFunction::from_fn(unit_interval(256), |x| x[0]).unwrap();
        assert!((modular(&lin, &p3).unwrap() - 0.25).abs() < 1e-4);
    }

    #[test]
    fn luxemburg_examples() {
        let p2 = NFunctionSpec::power(2.0).unwrap();
        let dom = unit_interval(32);
        let c = GridFunction::from_fn(dom.clone(), |_| -3.0).unwrap();
        assert!((luxemburg_norm(&c, &p2).unwrap() - 3.0).abs() < 1e-9);
        let dom2 = BoxDomain::interval(0.0, 2.0, 32).unwrap();
        let c2 = GridFunction::from_fn(dom2, |_| 3.0).unwrap();
        assert!((luxemburg_norm(&c2, &p2).unwrap() - 3.0 * 2f64.sqrt()).abs() < 1e-9);
        assert_eq!(luxemburg_norm(&GridFunction::zeros(dom), &p2).unwrap(), 0.0);
    }

    #[test]
    fn weighted_reduces_to_plain_and_scales() {
        let p2 = NFunctionSpec::power(2.0).unwrap();
        let dom = unit_interval(32);
        let u = GridFunction::from_fn(dom.clone(), |x| 1.0 + x[0]).unwrap();
        let ones = GridFunction::from_fn(dom.clone(), |_| 1.0).unwrap();
        let a = weighted_luxemburg(&u, &p2, &ones).unwrap();
        let b = luxemburg_norm(&u, &p2).unwrap();
        assert!((a - b).abs() < 1e-9);
        // V = 4, u = c: lambda solves 4 c^2 / lambda^2 = 1
        let four = GridFunction::from_fn(dom.clone(), |_| 4.0).unwrap();
        let c = GridFunction::from_fn(dom.clone(), |_| 0.7).unwrap();
        assert!((weighted_luxemburg(&c, &p2, &four).unwrap() - 1.4).abs() < 1e-9);
        assert_eq!(
            weighted_luxemburg(&GridFunction::zeros(dom.clone()), &p2, &four).unwrap(),
            0.0
        );
        // violating (V1)
        let bad = GridFunction::from_fn(dom, |x| x[0] - 0.5).unwrap();
        assert!(matches!(
            weighted_luxemburg(&c, &p2, &bad),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn orlicz_norm_examples() {
        let p2 = NFunctionSpec::power(2.0).unwrap();
        let dom = unit_interval(32);
        assert_eq!(orlicz_norm(&GridFunction::zeros(dom.clone()), &p2).unwrap(), 0.0);
        // min_k (1 + k^2)/k = 2 at k = 1
        let one = GridFunction::from_fn(dom, |_| 1.0).unwrap();
        assert!((orlicz_norm(&one, &p2).unwrap() - 2.0).abs() < 1e-8);
    }

    #[test]
    fn lmu_examples() {
        let dom = unit_interval(256);
        let one = GridFunction::from_fn(dom.clone(), |_| 1.0).unwrap();
        assert!((lmu_norm(&one, 2.0).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(lmu_norm(&GridFunction::zeros(dom.clone()), 2.0).unwrap(), 0.0);
        let lin = GridFunction::from_fn(dom.clone(), |x| x[0]).unwrap();
        assert!((lmu_norm(&lin, 2.0).unwrap() - 1.0 / 3f64.sqrt()).abs() < 1e-4);
        assert!(lmu_norm(&one, 0.5).is_err());
    }

    #[test]
    fn holder_examples() {
        let p2 = NFunctionSpec::power(2.0).unwrap();
        let dom = unit_interval(32);
        let u = GridFunction::from_fn(dom.clone(), |_| 1.0).unwrap();
        let zero = GridFunction::zeros(dom.clone());
        let rep = holder_check(&u, &zero, &p2).unwrap();
        assert!(rep.lhs == 0.0 && rep.holds);
        let rep = holder_check(&u, &u, &p2).unwrap();
        assert!((rep.lhs - 1.0).abs() < 1e-12);
        assert!(rep.rhs >= 1.0 && rep.holds);
    }

    #[test]
    fn csv_round_trip() {
        let dom = BoxDomain::new(vec![-1.0, -1.0], vec![1.0, 1.0], 8).unwrap();
        let u = GridFunction::from_fn(dom.clone(), |x| x[0] * x[1] + 0.25).unwrap();
        let dir = std::env::temp_dir().join("foslab_grid_csv_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("u.csv");
        u.to_csv(&path).unwrap();
        let back = GridFunction::from_csv(dom, &path).unwrap();
        assert_eq!(u.values, back.values);
    }
}
