//! Run configuration: one JSON document describing the N-function, the
//! fractional parameters, the grids, the potentials and the
//! command-specific options. Validation fails fast with the name of the
//! violated structural condition.

use crate::expr::Expr;
use anyhow::{anyhow, bail, Context, Result};
use foslab_core::grid::{BoxDomain, GridFunction};
use foslab_core::nfunc::{estimate_indices, IndexPair, NFunctionSpec};
use foslab_core::sobolev::FractionalParams;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum NfunConfig {
    Power { q: f64 },
    PowerSum { p: f64, q: f64 },
    LogWeighted { q: f64 },
    /// two-column CSV `t,m(t)`, strictly increasing in both columns
    Tabulated { csv: PathBuf },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FractionalConfig {
    pub s: f64,
    /// grid dimension (1 or 2)
    pub d: usize,
    pub s_prime: f64,
    /// dimension for the N-function-level analysis (growth indices,
    /// Sobolev conjugate); grids stay at desk scale while the analysis may
    /// need a larger ambient dimension. Defaults to `max(d, 2)`.
    #[serde(default)]
    pub analysis_d: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DomainConfig {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub n: usize,
}

/// A scalar field over the domain: an expression string or a CSV path.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FieldConfig {
    Expression(String),
    Csv { csv: PathBuf },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolverConfig {
    #[serde(default = "default_seeds")]
    pub seeds: usize,
    #[serde(default = "default_count_target")]
    pub count_target: usize,
    #[serde(default = "default_k_max")]
    pub k_max: usize,
    #[serde(default = "default_theta")]
    pub theta: f64,
    /// sample count for the verify suite
    #[serde(default = "default_samples")]
    pub samples: usize,
}

fn default_seeds() -> usize {
    24
}
fn default_count_target() -> usize {
    4
}
fn default_k_max() -> usize {
    9
}
fn default_theta() -> f64 {
    2.5
}
fn default_samples() -> usize {
    50
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            seeds: default_seeds(),
            count_target: default_count_target(),
            k_max: default_k_max(),
            theta: default_theta(),
            samples: default_samples(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    pub nfun: NfunConfig,
    #[serde(default)]
    pub eval_range: Option<(f64, f64)>,
    pub fractional: FractionalConfig,
    pub domain: DomainConfig,
    /// quadrature box standing in for the whole space; defaults to `domain`
    #[serde(default)]
    pub outer: Option<DomainConfig>,
    pub potential: FieldConfig,
    pub source_weight: FieldConfig,
    pub p: f64,
    pub mu: f64,
    #[serde(default = "default_lambda")]
    pub lambda: f64,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_out_dir")]
    pub out_dir: PathBuf,
    /// operator-command overrides (bump width, test-function width)
    #[serde(default)]
    pub operator: Option<OperatorConfig>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OperatorConfig {
    pub u_sigma: Option<f64>,
    pub v_width: Option<f64>,
}

fn default_lambda() -> f64 {
    1.0
}
fn default_seed() -> u64 {
    42
}
fn default_out_dir() -> PathBuf {
    PathBuf::from("out")
}

/// Everything a command needs, resolved and validated.
pub struct Resolved {
    pub config: RunConfig,
    pub config_hash: String,
    pub nfun: NFunctionSpec,
    pub indices: IndexPair,
    pub fp: FractionalParams,
    pub analysis_d: usize,
    pub domain: BoxDomain,
    pub outer: BoxDomain,
    pub potential: GridFunction,
    pub source_weight: GridFunction,
    pub out_dir: PathBuf,
    pub seed: u64,
}

fn build_domain(dc: &DomainConfig) -> Result<BoxDomain> {
    BoxDomain::new(dc.lo.clone(), dc.hi.clone(), dc.n).map_err(|e| anyhow!("domain: {e}"))
}

fn build_field(fc: &FieldConfig, dom: &BoxDomain, base: &Path) -> Result<GridFunction> {
    match fc {
        FieldConfig::Expression(src) => {
            let expr = Expr::parse(src).with_context(|| format!("in expression '{src}'"))?;
            GridFunction::from_fn(dom.clone(), |x| expr.eval(x)).map_err(|e| anyhow!("{e}"))
        }
        FieldConfig::Csv { csv } => {
            let path = if csv.is_absolute() {
                csv.clone()
            } else {
                base.join(csv)
            };
            GridFunction::from_csv(dom.clone(), &path).map_err(|e| anyhow!("{e}"))
        }
    }
}

fn load_knots(path: &Path) -> Result<Vec<(f64, f64)>> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading tabulated density {}", path.display()))?;
    let mut knots = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || (i == 0 && line.starts_with(|c: char| c.is_alphabetic())) {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 2 {
            bail!("knot line {} must have two columns", i + 1);
        }
        knots.push((cols[0].trim().parse()?, cols[1].trim().parse()?));
    }
    Ok(knots)
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<(RunConfig, String)> {
        let bytes = std::fs::read(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let config: RunConfig = serde_json::from_slice(&bytes)
            .with_context(|| format!("parsing config {}", path.display()))?;
        use sha2::Digest;
        let hash = hex_string(&sha2::Sha256::digest(&bytes));
        Ok((config, hash))
    }

    /// Builds all derived objects and checks the structural preconditions;
    /// the error message starts with the name of the violated condition.
    pub fn resolve(mut self, hash: String, base: &Path) -> Result<Resolved> {
        let mut nfun = match &self.nfun {
            NfunConfig::Power { q } => NFunctionSpec::power(*q),
            NfunConfig::PowerSum { p, q } => NFunctionSpec::power_sum(*p, *q),
            NfunConfig::LogWeighted { q } => NFunctionSpec::log_weighted(*q),
            NfunConfig::Tabulated { csv } => {
                let path = if csv.is_absolute() {
                    csv.clone()
                } else {
                    base.join(csv)
                };
                NFunctionSpec::tabulated(load_knots(&path)?)
            }
        }
        .map_err(|e| anyhow!("nfun: {e}"))?;
        if let Some(range) = self.eval_range {
            nfun = nfun.with_eval_range(range).map_err(|e| anyhow!("nfun: {e}"))?;
        }
        let fp = FractionalParams::new(self.fractional.s, self.fractional.d, self.fractional.s_prime)
            .map_err(|e| anyhow!("fractional: {e}"))?;
        let domain = build_domain(&self.domain)?;
        let outer = match &self.outer {
            Some(oc) => build_domain(oc)?,
            None => domain.clone(),
        };
        if domain.d != fp.d || outer.d != fp.d {
            bail!("fractional d = {} does not match the grid dimension", fp.d);
        }
        let potential = build_field(&self.potential, &domain, base)?;
        let source_weight = build_field(&self.source_weight, &domain, base)?;
        // structural conditions, named
        let vmin = potential.values.iter().cloned().fold(f64::INFINITY, f64::min);
        if !(vmin > 0.0) {
            bail!("(V1): inf V = {vmin} on the grid, must be positive");
        }
        if source_weight.values.iter().any(|&x| x < 0.0) {
            bail!("(f1): the source weight must be nonnegative");
        }
        if !(self.p > 1.0 && self.p < self.mu) {
            bail!("(f1): need 1 < p < mu, got p = {}, mu = {}", self.p, self.mu);
        }
        let analysis_d = self.fractional.analysis_d.unwrap_or(fp.d.max(2));
        if analysis_d < 2 {
            bail!("fractional.analysis_d must be at least 2");
        }
        let indices = estimate_indices(&nfun, analysis_d).map_err(|e| anyhow!("nfun: {e}"))?;
        if !(indices.m0 > 1.0) {
            bail!("(m1): m0 = {} must exceed 1", indices.m0);
        }
        if !(self.mu < indices.m0) {
            bail!("(M1): need mu < m0, got mu = {} and m0 = {}", self.mu, indices.m0);
        }
        if !(1.0..=2.0).contains(&self.lambda) {
            bail!("lambda must lie in [1, 2], got {}", self.lambda);
        }
        if self.solver.k_max + 1 >= domain.n {
            bail!("solver.k_max = {} too large for n = {}", self.solver.k_max, domain.n);
        }
        let out_dir = std::mem::take(&mut self.out_dir);
        let seed = self.seed;
        Ok(Resolved {
            config: self,
            config_hash: hash,
            nfun,
            indices,
            fp,
            analysis_d,
            domain,
            outer,
            potential,
            source_weight,
            out_dir,
            seed,
        })
    }
}

pub fn hex_string(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}
