use num_rational::BigRational;
use serde::{Serialize, Serializer};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CertificateKind {
    /// `a - d = a' - d' - b` (ergodicity of `T × T`).
    Txt,
    /// `a + a' = d + d' + 1` (obstruction for `T × T⁻¹`).
    UObstruction,
    /// `a - d = d' - a' ∈ nℤ \ {0}` (conservativity of `Tⁿ × T⁻ⁿ`).
    InverseConservative,
    /// `d_ℓ = a_ℓ - b_ℓ - α_ℓ m` with `m ≠ 0` for every coordinate.
    General,
}

impl CertificateKind {
    pub fn label(self) -> &'static str {
        match self {
            CertificateKind::Txt => "txt",
            CertificateKind::UObstruction => "u-obstruction",
            CertificateKind::InverseConservative => "inverse-conservative",
            CertificateKind::General => "general",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundKind {
    Lower,
    Upper,
    None,
}

impl BoundKind {
    pub fn label(self) -> &'static str {
        match self {
            BoundKind::Lower => "lower",
            BoundKind::Upper => "upper",
            BoundKind::None => "none",
        }
    }
}

/// One named assertion evaluated by a census.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub(crate) fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertificateReport {
    pub certificate: CertificateKind,
    /// `"exhaustive"` or `"estimate"` (sampled).
    pub mode: &'static str,
    pub base_stage: usize,
    pub target_stage: usize,
    pub b: Option<u64>,
    pub n: Option<i64>,
    pub alphas: Vec<i64>,
    pub bs: Vec<i64>,
    pub total_count: u64,
    pub satisfied_count: u64,
    #[serde(serialize_with = "ser_ratio")]
    pub fraction: BigRational,
    pub constructive_count: Option<u64>,
    #[serde(serialize_with = "ser_opt_ratio")]
    pub constructive_fraction: Option<BigRational>,
    #[serde(serialize_with = "ser_opt_ratio")]
    pub analytic_bound: Option<BigRational>,
    pub bound_kind: BoundKind,
    pub checks: Vec<Check>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub elapsed_ms: Option<u64>,
}

/// Column header matching [`CertificateReport::csv_row`].
pub const CSV_HEADER: &str =
    "j,total,satisfied,fraction_num,fraction_den,bound_num,bound_den,bound_kind,elapsed_ms";

impl CertificateReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failed_checks(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn is_estimate(&self) -> bool {
        self.mode == "estimate"
    }

    /// The CSV row; `elapsed_ms` is left empty when not recorded.
    pub fn csv_row(&self) -> String {
        let (bn, bd) = match &self.analytic_bound {
            Some(b) => (b.numer().to_string(), b.denom().to_string()),
            None => (String::new(), String::new()),
        };
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.target_stage,
            self.total_count,
            self.satisfied_count,
            self.fraction.numer(),
            self.fraction.denom(),
            bn,
            bd,
            self.bound_kind.label(),
            self.elapsed_ms.map(|m| m.to_string()).unwrap_or_default()
        )
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports always serialize")
    }
}

pub(crate) fn ratio_string(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

fn ser_ratio<S: Serializer>(r: &BigRational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&ratio_string(r))
}

fn ser_opt_ratio<S: Serializer>(r: &Option<BigRational>, s: S) -> Result<S::Ok, S::Error> {
    match r {
        Some(r) => s.serialize_str(&ratio_string(r)),
        None => s.serialize_none(),
    }
}
