use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::domain::{bessel_zero, DomainKind, DomainSpec};
use crate::error::{Error, Result};

/// Where the fields of a sweep come from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    ClosedForm,
    Eigensolve,
}

/// One experiment family. See the README for the file format.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub name: String,
    pub domain: DomainSpec,
    pub source: Source,
    /// Closed-form mode indices, one entry per sweep row.
    pub modes: Vec<Vec<i64>>,
    /// 1-based eigen indices when solving numerically.
    pub eigen_indices: Vec<usize>,
    /// Cells along the longest side of the bounding box.
    pub resolution: usize,
    /// Multiply the resolution by the largest |mode index| of each row.
    pub resolution_per_mode: bool,
    /// Ball radii for the asymmetry scan, in units of `1/√λ`.
    pub radii: Vec<f64>,
    pub eps0: f64,
    pub max_centers: usize,
    pub seed: u64,
    pub doubling: bool,
    /// Run the asymmetry-constant and box checks (3D only).
    pub capacity_checks: bool,
    /// Nodal domains checked per row when `capacity_checks` is set.
    pub capacity_components: usize,
    /// Ball radii for the asymmetry constant, in units of the spacing.
    pub alpha_radii: Vec<f64>,
    pub output: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            name: "sweep".into(),
            domain: DomainSpec::rectangle(&[PI, PI]),
            source: Source::ClosedForm,
            modes: Vec::new(),
            eigen_indices: Vec::new(),
            resolution: 64,
            resolution_per_mode: false,
            radii: vec![0.5, 1.0, 2.0],
            eps0: 1.0,
            max_centers: 256,
            seed: 0,
            doubling: true,
            capacity_checks: false,
            capacity_components: 2,
            alpha_radii: vec![4.0, 6.0],
            output: PathBuf::from("out"),
        }
    }
}

/// Parses `pi`, `2pi`, `2*pi`, `pi/2` and plain numbers.
pub fn parse_real(s: &str) -> Result<f64> {
    let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if s.is_empty() {
        return Err(Error::Config("empty number".into()));
    }
    let mut value = 1.0;
    let mut divide = false;
    let mut rest = s.as_str();
    loop {
        let end = rest.find(['*', '/']).unwrap_or(rest.len());
        let factor = parse_factor(&rest[..end])?;
        if divide {
            value /= factor;
        } else {
            value *= factor;
        }
        if end == rest.len() {
            break;
        }
        divide = rest.as_bytes()[end] == b'/';
        rest = &rest[end + 1..];
    }
    Ok(value)
}

fn parse_factor(t: &str) -> Result<f64> {
    let bad = || Error::Config(format!("cannot parse number '{t}'"));
    let (neg, body) = match t.strip_prefix('-') {
        Some(b) => (true, b),
        None => (false, t),
    };
    let v = if let Some(coef) = body.strip_suffix("pi") {
        if coef.is_empty() {
            PI
        } else {
            coef.parse::<f64>().map_err(|_| bad())? * PI
        }
    } else {
        body.parse::<f64>().map_err(|_| bad())?
    };
    Ok(if neg { -v } else { v })
}

fn parse_list(v: &str) -> Result<Vec<f64>> {
    v.split(',').map(parse_real).collect()
}

fn parse_bool(key: &str, v: &str) -> Result<bool> {
    match v {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(Error::Config(format!(
            "{key}: expected true or false, got '{v}'"
        ))),
    }
}

fn parse_uint<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| Error::Config(format!("{key}: expected a non-negative integer, got '{v}'")))
}

fn parse_range(key: &str, v: &str) -> Result<Option<(i64, i64)>> {
    let Some((a, b)) = v.split_once("..") else {
        return Ok(None);
    };
    let lo = a
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("{key}: bad range '{v}'")))?;
    let hi = b
        .trim()
        .trim_start_matches('=')
        .parse()
        .map_err(|_| Error::Config(format!("{key}: bad range '{v}'")))?;
    if lo > hi {
        return Err(Error::Config(format!("{key}: empty range '{v}'")));
    }
    Ok(Some((lo, hi)))
}

impl ExperimentConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Reads `key = value` lines; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut kv = BTreeMap::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", n + 1)))?;
            if kv
                .insert(k.trim().to_string(), v.trim().to_string())
                .is_some()
            {
                return Err(Error::Config(format!(
                    "line {}: duplicate key '{}'",
                    n + 1,
                    k.trim()
                )));
            }
        }
        let mut c = Self::default();
        let get = |k: &str| kv.get(k).map(String::as_str);
        let dims = get("dims").map(parse_list).transpose()?;
        let radius = get("radius").map(parse_real).transpose()?;
        let domain = get("domain").unwrap_or("rectangle");
        let need_dims = || {
            dims.clone()
                .ok_or_else(|| Error::Config(format!("domain {domain} needs dims")))
        };
        let need_radius =
            || radius.ok_or_else(|| Error::Config(format!("domain {domain} needs radius")));
        c.domain = match domain {
            "rectangle" => DomainSpec::rectangle(&need_dims()?),
            "torus" => DomainSpec::torus(&need_dims()?),
            "disk" => DomainSpec::disk(
                need_radius()?,
                get("dim")
                    .map(|v| parse_uint("dim", v))
                    .transpose()?
                    .unwrap_or(2),
            ),
            "stadium" => DomainSpec::stadium(
                get("straight").map(parse_real).transpose()?.unwrap_or(0.0),
                need_radius()?,
            ),
            other => return Err(Error::Config(format!("unknown domain '{other}'"))),
        };
        c.domain
            .validate()
            .map_err(|e| Error::Config(e.to_string()))?;
        let dim = c.domain.dimension();
        if let Some(v) = get("name") {
            c.name = v.to_string();
        }
        c.source = match get("source").unwrap_or("closed_form") {
            "closed_form" => Source::ClosedForm,
            "eigensolve" => Source::Eigensolve,
            other => return Err(Error::Config(format!("unknown source '{other}'"))),
        };
        if let Some(v) = get("modes") {
            c.modes = match parse_range("modes", v)? {
                Some((lo, hi)) => (lo..=hi).map(|m| vec![m; dim]).collect(),
                None => v
                    .split(',')
                    .map(|m| {
                        m.split(':')
                            .map(|t| {
                                t.trim().parse::<i64>().map_err(|_| {
                                    Error::Config(format!("modes: bad index in '{m}'"))
                                })
                            })
                            .collect::<Result<Vec<_>>>()
                    })
                    .collect::<Result<_>>()?,
            };
        }
        if let Some(v) = get("eigen") {
            let (lo, hi) = parse_range("eigen", v)?
                .ok_or_else(|| Error::Config("eigen: expected a range a..b".into()))?;
            if lo < 1 {
                return Err(Error::Config("eigen indices start at 1".into()));
            }
            c.eigen_indices = (lo as usize..=hi as usize).collect();
        }
        if let Some(v) = get("resolution") {
            c.resolution = parse_uint("resolution", v)?;
        }
        if let Some(v) = get("resolution_per_mode") {
            c.resolution_per_mode = parse_bool("resolution_per_mode", v)?;
        }
        if let Some(v) = get("radii") {
            c.radii = parse_list(v)?;
        }
        if let Some(v) = get("eps0") {
            c.eps0 = parse_real(v)?;
        }
        if let Some(v) = get("max_centers") {
            c.max_centers = parse_uint("max_centers", v)?;
        }
        if let Some(v) = get("seed") {
            c.seed = parse_uint("seed", v)?;
        }
        if let Some(v) = get("doubling") {
            c.doubling = parse_bool("doubling", v)?;
        }
        if let Some(v) = get("capacity_checks") {
            c.capacity_checks = parse_bool("capacity_checks", v)?;
        }
        if let Some(v) = get("capacity_components") {
            c.capacity_components = parse_uint("capacity_components", v)?;
        }
        if let Some(v) = get("alpha_radii") {
            c.alpha_radii = parse_list(v)?;
        }
        if let Some(v) = get("output") {
            c.output = PathBuf::from(v);
        }
        const KNOWN: [&str; 20] = [
            "name",
            "domain",
            "dims",
            "radius",
            "dim",
            "straight",
            "source",
            "modes",
            "eigen",
            "resolution",
            "resolution_per_mode",
            "radii",
            "eps0",
            "max_centers",
            "seed",
            "doubling",
            "capacity_checks",
            "capacity_components",
            "alpha_radii",
            "output",
        ];
        if let Some(k) = kv.keys().find(|k| !KNOWN.contains(&k.as_str())) {
            return Err(Error::Config(format!("unknown key '{k}'")));
        }
        Ok(c)
    }

    /// Number of rows the sweep produces.
    pub fn row_count(&self) -> usize {
        match self.source {
            Source::ClosedForm => self.modes.len(),
            Source::Eigensolve => self.eigen_indices.len(),
        }
    }

    /// Cells along the longest side for row `i`.
    pub fn cells_for(&self, i: usize) -> usize {
        match (self.source, self.resolution_per_mode) {
            (Source::ClosedForm, true) => {
                self.resolution
                    * self.modes[i]
                        .iter()
                        .map(|m| m.unsigned_abs() as usize)
                        .max()
                        .unwrap_or(1)
                        .max(1)
            }
            _ => self.resolution,
        }
    }

    /// Row label: mode indices joined by `:`, or the eigen index.
    pub fn label_for(&self, i: usize) -> String {
        match self.source {
            Source::ClosedForm => self.modes[i]
                .iter()
                .map(i64::to_string)
                .collect::<Vec<_>>()
                .join(":"),
            Source::Eigensolve => self.eigen_indices[i].to_string(),
        }
    }

    /// Eigenvalue of row `i`: exact for closed forms, a Weyl-law estimate
    /// for numerically solved rows.
    pub fn expected_lambda(&self, i: usize) -> Result<f64> {
        let d = &self.domain;
        match self.source {
            Source::ClosedForm => {
                let m = &self.modes[i];
                if m.len() != d.dimension() && d.kind != DomainKind::Disk {
                    return Err(Error::Config(format!(
                        "mode {m:?} does not match dimension {}",
                        d.dimension()
                    )));
                }
                Ok(match d.kind {
                    DomainKind::Rectangle => m
                        .iter()
                        .zip(&d.dims)
                        .map(|(&k, l)| (k as f64 * PI / l).powi(2))
                        .sum(),
                    DomainKind::Torus => m
                        .iter()
                        .zip(&d.dims)
                        .map(|(&k, l)| (k as f64 * 2.0 * PI / l).powi(2))
                        .sum(),
                    DomainKind::Disk if m.len() == 2 && m[1] >= 1 => {
                        (bessel_zero(m[0].unsigned_abs() as u32, m[1] as u32)? / d.radius).powi(2)
                    }
                    _ => {
                        return Err(Error::Config(format!(
                            "no closed-form mode {m:?} for {:?}",
                            d.kind
                        )))
                    }
                })
            }
            Source::Eigensolve => {
                let k = self.eigen_indices[i] as f64;
                let vol = self.domain_volume();
                Ok(match d.dimension() {
                    1 => (PI * k / vol).powi(2),
                    2 => 4.0 * PI * k / vol,
                    _ => (6.0 * PI * PI * k / vol).powf(2.0 / 3.0),
                })
            }
        }
    }

    fn domain_volume(&self) -> f64 {
        let d = &self.domain;
        match d.kind {
            DomainKind::Disk if d.dimension() == 2 => PI * d.radius * d.radius,
            DomainKind::Disk => 4.0 / 3.0 * PI * d.radius.powi(3),
            DomainKind::Stadium => {
                PI * d.radius * d.radius + (d.dims[0] - 2.0 * d.radius) * 2.0 * d.radius
            }
            _ => d.dims.iter().product(),
        }
    }

    /// Rejects configurations that would under-resolve any row.
    pub fn validate(&self) -> Result<()> {
        if self.row_count() == 0 {
            return Err(Error::Config("no modes or eigen indices given".into()));
        }
        if self.source == Source::ClosedForm && self.domain.kind == DomainKind::Stadium {
            return Err(Error::Config(
                "stadium has no closed-form modes; use source = eigensolve".into(),
            ));
        }
        if !(self.eps0 > 0.0) {
            return Err(Error::Config("eps0 must be positive".into()));
        }
        if self.radii.is_empty() || self.radii.iter().any(|&r| !(r > 0.0)) {
            return Err(Error::Config("radii must be positive".into()));
        }
        if self.capacity_checks && self.alpha_radii.iter().any(|&r| !(r >= 2.0)) {
            return Err(Error::Config(
                "alpha_radii are in units of h and must be at least 2".into(),
            ));
        }
        let longest = self.domain.dims.iter().cloned().fold(0.0, f64::max);
        for i in 0..self.row_count() {
            let lambda = self.expected_lambda(i)?;
            let h = longest / self.cells_for(i) as f64;
            let per_wavelength = 2.0 * PI / lambda.sqrt() / h;
            if per_wavelength < 8.0 {
                return Err(Error::Config(format!(
                    "row {} ({}): {per_wavelength:.2} cells per wavelength, need at least 8",
                    i,
                    self.label_for(i)
                )));
            }
            let smallest = self.radii.iter().cloned().fold(f64::INFINITY, f64::min) / lambda.sqrt();
            if smallest < 4.0 * h {
                return Err(Error::Config(format!(
                    "row {}: radius {smallest:.4e} is below 4h",
                    self.label_for(i)
                )));
            }
            if self.doubling && (self.eps0 / lambda).sqrt() < 8.0 * h {
                return Err(Error::Config(format!(
                    "row {}: wavelength ball is below 8h",
                    self.label_for(i)
                )));
            }
        }
        Ok(())
    }

    /// Normalized text of the settings that affect results.
    pub fn canonical(&self) -> String {
        let mut c = self.clone();
        c.output = PathBuf::new();
        serde_json::to_string(&c).expect("config serializes")
    }

    /// First 16 hex digits of the SHA-256 of [`Self::canonical`].
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.canonical().as_bytes());
        hex::encode(&digest[..8])
    }
}
