//! TOML system files.
//!
//! ```toml
//! dim_x = 1
//! dim_y = 1
//! period = "2*pi"          # number or constant expression
//! f = ["-y1"]
//! g = ["x1 - y1^3/3 + y1"]
//! h = ["-sin(t)"]          # optional, zeros by default
//! box = [[-2, 2], [-0.95, 0.95]]
//!
//! [tolerances]             # optional, any subset
//! steps = 1024
//! ```

use std::path::Path;

use anyhow::{bail, Context, Result};
use semidae::expr::var_list;
use semidae::{Region, SystemDef, Tolerances};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Period {
    Number(f64),
    Expr(String),
}

impl Period {
    pub fn value(&self) -> Result<f64> {
        match self {
            Period::Number(v) => Ok(*v),
            Period::Expr(src) => {
                let e =
                    semidae::parse(src, var_list(Vec::<String>::new())).with_context(|| format!("period '{src}'"))?;
                Ok(e.eval(&[]).with_context(|| format!("period '{src}'"))?)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemFile {
    pub dim_x: usize,
    pub dim_y: usize,
    pub period: Period,
    pub f: Vec<String>,
    pub g: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub h: Vec<String>,
    #[serde(rename = "box")]
    pub bounds: Vec<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerances: Option<Tolerances>,
}

/// Index-2 input for `reduce-hessenberg`: `gamma` replaces `g`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HessenbergFile {
    pub dim_x: usize,
    pub dim_y: usize,
    pub period: Period,
    pub f: Vec<String>,
    pub gamma: Vec<String>,
    #[serde(default)]
    pub h: Vec<String>,
    #[serde(rename = "box")]
    pub bounds: Vec<[f64; 2]>,
}

/// Implicit input for `reduce-implicit`: `phi` over `x1..xk, y1..yk`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImplicitFile {
    pub dim_x: usize,
    pub period: Period,
    pub phi: Vec<String>,
    #[serde(default)]
    pub h: Vec<String>,
    #[serde(rename = "box")]
    pub bounds: Vec<[f64; 2]>,
}

pub fn read<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

pub fn strs(v: &[String]) -> Vec<&str> {
    v.iter().map(String::as_str).collect()
}

pub fn region(bounds: &[[f64; 2]], dim: usize) -> Result<Region> {
    if bounds.len() != dim {
        bail!("box has {} intervals, expected {dim}", bounds.len());
    }
    let pairs: Vec<(f64, f64)> = bounds.iter().map(|b| (b[0], b[1])).collect();
    Ok(Region::from_bounds(&pairs)?)
}

impl SystemFile {
    pub fn load(path: &Path) -> Result<SystemDef> {
        read::<SystemFile>(path)?
            .build()
            .with_context(|| format!("system file {}", path.display()))
    }

    pub fn build(&self) -> Result<SystemDef> {
        let region = region(&self.bounds, self.dim_x + self.dim_y)?;
        let sys = SystemDef::from_strs(
            self.dim_x,
            self.dim_y,
            self.period.value()?,
            &strs(&self.f),
            &strs(&self.g),
            &strs(&self.h),
            region,
        )?;
        Ok(sys.with_tolerances(self.tolerances.clone().unwrap_or_default()))
    }

    pub fn from_system(sys: &SystemDef) -> Self {
        let show = |v: &[semidae::Expression]| v.iter().map(|e| e.to_string()).collect::<Vec<_>>();
        let region = sys.region();
        let h = if sys.has_forcing() { show(sys.h()) } else { Vec::new() };
        let tolerances = (sys.tol != Tolerances::default()).then(|| sys.tol.clone());
        Self {
            dim_x: sys.k(),
            dim_y: sys.s(),
            period: Period::Number(sys.period()),
            f: show(sys.f()),
            g: show(sys.g()),
            h,
            bounds: region
                .lower()
                .iter()
                .zip(region.upper())
                .map(|(&a, &b)| [a, b])
                .collect(),
            tolerances,
        }
    }
}
