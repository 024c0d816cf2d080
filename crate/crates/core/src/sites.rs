//! Sensitive-site semantics matrix: parameters, their semantic types and
//! value counts, and the counting rules derived from them.
//!
//! For parameters `x_i` with `J_i` semantic types of `s_ij` values each:
//!
//! ```text
//! s_i = Σ_j s_ij        total sites      n  = Π_i s_i
//!                       sensitive sites  s0 = Π_i J_i
//! ```
//!
//! and the initial semantic mean is `1/s0`.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SiteError {
    #[error("{path}: {reason}")]
    Invalid { path: String, reason: String },
    #[error("{0} exceeds the representable count range")]
    Overflow(&'static str),
    #[error("{0}")]
    Domain(String),
    #[error("{path}: {source}")]
    Json {
        path: String,
        source: serde_json::Error,
    },
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

fn invalid(path: impl Into<String>, reason: impl Into<String>) -> SiteError {
    SiteError::Invalid {
        path: path.into(),
        reason: reason.into(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SemanticType {
    pub name: String,
    #[serde(rename = "values")]
    pub value_count: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SiteParameter {
    pub name: String,
    pub types: Vec<SemanticType>,
}

impl SiteParameter {
    /// `s_i`, the parameter's total value count.
    pub fn value_count(&self) -> Option<u64> {
        self.types
            .iter()
            .try_fold(0u64, |acc, t| acc.checked_add(t.value_count))
    }

    /// `J_i`
    pub fn type_count(&self) -> u64 {
        self.types.len() as u64
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SiteMatrix {
    parameters: Vec<SiteParameter>,
}

impl SiteMatrix {
    pub fn new(parameters: Vec<SiteParameter>) -> Result<Self, SiteError> {
        if parameters.is_empty() {
            return Err(invalid("parameters", "at least one parameter is required"));
        }
        for (i, param) in parameters.iter().enumerate() {
            if param.types.is_empty() {
                return Err(invalid(
                    format!("parameters[{i}].types"),
                    format!("parameter '{}' has no semantic types", param.name),
                ));
            }
            for (j, ty) in param.types.iter().enumerate() {
                if ty.value_count == 0 {
                    return Err(invalid(
                        format!("parameters[{i}].types[{j}].values"),
                        format!(
                            "type '{}' of parameter '{}' must have at least one value",
                            ty.name, param.name
                        ),
                    ));
                }
            }
            if param.value_count().is_none() {
                return Err(SiteError::Overflow("parameter value count"));
            }
        }
        Ok(Self { parameters })
    }

    pub fn parameters(&self) -> &[SiteParameter] {
        &self.parameters
    }

    /// `n = Π s_i`
    pub fn total_sites(&self) -> Result<u64, SiteError> {
        self.parameters.iter().try_fold(1u64, |acc, p| {
            p.value_count()
                .and_then(|s| acc.checked_mul(s))
                .ok_or(SiteError::Overflow("total site count"))
        })
    }

    /// `n` as a real number; usable when the integer product overflows.
    pub fn total_sites_real(&self) -> f64 {
        self.parameters
            .iter()
            .map(|p| {
                p.types
                    .iter()
                    .map(|t| t.value_count as f64)
                    .sum::<f64>()
            })
            .product()
    }

    /// `s0 = Π J_i`
    pub fn sensitive_sites(&self) -> Result<u64, SiteError> {
        self.parameters.iter().try_fold(1u64, |acc, p| {
            acc.checked_mul(p.type_count())
                .ok_or(SiteError::Overflow("sensitive site count"))
        })
    }

    /// `p_S(0) = 1/s0`
    pub fn initial_semantic_mean(&self) -> Result<f64, SiteError> {
        semantic_mean_of(self.sensitive_sites()?)
    }
}

/// `1/s0`, which must stay below one half.
pub fn semantic_mean_of(sensitive_sites: u64) -> Result<f64, SiteError> {
    if sensitive_sites < 3 {
        return Err(SiteError::Domain(format!(
            "{sensitive_sites} sensitive sites give a semantic mean of at least 0.5"
        )));
    }
    Ok(1.0 / sensitive_sites as f64)
}

/// Sensitive-site count for a black box: the fixed point `s0/n = 1/s0`,
/// i.e. `√n` rounded half-up.
pub fn blackbox_sensitive_sites(n: u64) -> Result<u64, SiteError> {
    if n < 4 {
        return Err(SiteError::Domain(format!(
            "black-box estimation needs at least 4 sites, got {n}"
        )));
    }
    let root = n.isqrt();
    // round half-up: root + 1 when n >= (root + 1/2)²
    let twice = 2 * root as u128 + 1;
    if 4 * n as u128 >= twice * twice {
        Ok(root + 1)
    } else {
        Ok(root)
    }
}

/// Math-time unit `τ_s = 1/n`.
pub fn tau_unit(n: f64) -> Result<f64, SiteError> {
    if !(n.is_finite() && n >= 1.0) {
        return Err(SiteError::Domain(format!("site count {n} must be at least 1")));
    }
    Ok(1.0 / n)
}

/// Occurrence probabilities of the sensitive sites in use, with the total
/// site count they were measured against.
#[derive(Debug, Clone, PartialEq)]
pub struct SiteProbabilityProfile {
    probabilities: Vec<f64>,
    total_sites: u64,
}

impl SiteProbabilityProfile {
    pub fn new(probabilities: Vec<f64>, total_sites: u64) -> Result<Self, SiteError> {
        if total_sites == 0 {
            return Err(SiteError::Domain("total site count must be positive".into()));
        }
        if probabilities.is_empty() {
            return Err(invalid("site_probabilities", "empty profile"));
        }
        for (v, &p) in probabilities.iter().enumerate() {
            if !(p > 0.0 && p < 1.0) {
                return Err(invalid(
                    format!("site_probabilities[{v}]"),
                    format!("{p} is outside (0, 1)"),
                ));
            }
        }
        Ok(Self {
            probabilities,
            total_sites,
        })
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn total_sites(&self) -> u64 {
        self.total_sites
    }

    /// Extrapolated coverage `c_e = Σ (p_v - 1/n)`.
    pub fn extrapolated_coverage(&self) -> Result<f64, SiteError> {
        let unit = 1.0 / self.total_sites as f64;
        if let Some((v, p)) = self
            .probabilities
            .iter()
            .enumerate()
            .find(|(_, &p)| p < unit)
        {
            return Err(SiteError::Domain(format!(
                "site {v} probability {p} is below 1/n = {unit}"
            )));
        }
        let total: f64 = self.probabilities.iter().sum();
        let coverage = total - self.probabilities.len() as f64 * unit;
        if !(coverage > 0.0 && coverage < 1.0) {
            return Err(SiteError::Domain(format!(
                "extrapolated coverage {coverage} is outside (0, 1)"
            )));
        }
        Ok(coverage)
    }
}

/// A matrix as loaded from file, with the optional literal site-count
/// override and measured site probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct SiteModel {
    pub matrix: SiteMatrix,
    pub override_total_sites: Option<u64>,
    pub site_probabilities: Option<Vec<f64>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SiteModelFile {
    parameters: Vec<SiteParameter>,
    #[serde(default)]
    override_total_sites: Option<u64>,
    #[serde(default)]
    site_probabilities: Option<Vec<f64>>,
}

impl SiteModel {
    pub fn from_json(text: &str) -> Result<Self, SiteError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let file: SiteModelFile =
            serde_path_to_error::deserialize(de).map_err(|e| SiteError::Json {
                path: e.path().to_string(),
                source: e.into_inner(),
            })?;
        let matrix = SiteMatrix::new(file.parameters)?;
        if file.override_total_sites == Some(0) {
            return Err(invalid("override_total_sites", "must be positive"));
        }
        let model = Self {
            matrix,
            override_total_sites: file.override_total_sites,
            site_probabilities: file.site_probabilities,
        };
        if let Some(probs) = &model.site_probabilities {
            let s0 = model.sensitive_sites()?;
            if probs.len() as u64 != s0 {
                return Err(invalid(
                    "site_probabilities",
                    format!("{} entries for {s0} sensitive sites", probs.len()),
                ));
            }
            SiteProbabilityProfile::new(probs.clone(), model.total_sites()?)?;
        }
        Ok(model)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, SiteError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| SiteError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn total_sites(&self) -> Result<u64, SiteError> {
        match self.override_total_sites {
            Some(n) => Ok(n),
            None => self.matrix.total_sites(),
        }
    }

    pub fn sensitive_sites(&self) -> Result<u64, SiteError> {
        self.matrix.sensitive_sites()
    }

    pub fn profile(&self) -> Result<Option<SiteProbabilityProfile>, SiteError> {
        match &self.site_probabilities {
            Some(p) => Ok(Some(SiteProbabilityProfile::new(
                p.clone(),
                self.total_sites()?,
            )?)),
            None => Ok(None),
        }
    }
}
