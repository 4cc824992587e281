//! Core domain records: assets, threats, vulnerabilities, register entries,
//! and the two ordinal scales (asset value 1-5, likelihood 1-10).

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{check_range, Result, RiskError};
use crate::scoring::compute_risk;

pub const ASSET_VALUE_MIN: u32 = 1;
pub const ASSET_VALUE_MAX: u32 = 5;
pub const LIKELIHOOD_MIN: u32 = 1;
pub const LIKELIHOOD_MAX: u32 = 10;
pub const RISK_MAX: u32 = ASSET_VALUE_MAX * LIKELIHOOD_MAX * LIKELIHOOD_MAX;

/// Appetite used when a register carries no explicit one: the midpoint of
/// the (1,10,10) and (2,10,10) anchors.
pub const DEFAULT_APPETITE: u32 = 150;

/// Severity labels of the impact matrix rows, indexed by level - 1.
pub const IMPACT_LABELS: [&str; 5] = ["Insignificant", "Minor", "Significant", "Major", "Acute"];

/// Ratings of one asset across the six incident-impact categories.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ImpactAssessment {
    pub embarrassment: u32,
    pub safety: u32,
    pub privacy: u32,
    pub legal: u32,
    pub financial_loss: u32,
    pub disruption: u32,
}

impl ImpactAssessment {
    pub fn levels(&self) -> [(&'static str, u32); 6] {
        [
            ("embarrassment", self.embarrassment),
            ("safety", self.safety),
            ("privacy", self.privacy),
            ("legal", self.legal),
            ("financial_loss", self.financial_loss),
            ("disruption", self.disruption),
        ]
    }
}

/// Asset value implied by an impact assessment: the worst (maximum)
/// category level.
pub fn asset_value_from_impacts(impacts: &ImpactAssessment) -> Result<u32> {
    let mut value = ASSET_VALUE_MIN;
    for (field, level) in impacts.levels() {
        check_range(field, level, ASSET_VALUE_MIN, ASSET_VALUE_MAX)?;
        value = value.max(level);
    }
    Ok(value)
}

/// Impact level for a monetary loss (financial loss or disruption cost), in
/// pounds. Bands are half-open: `[0, 10k)` is level 1, `[10k, 100k)` level 2,
/// `[100k, 500k)` level 3, `[500k, 1000k)` level 4, and `1000k` up is level 5.
pub fn impact_level_for_amount(pounds: u64) -> u32 {
    const LOWER_BOUNDS: [u64; 4] = [10_000, 100_000, 500_000, 1_000_000];
    1 + LOWER_BOUNDS.iter().filter(|&&b| pounds >= b).count() as u32
}

pub fn impact_label(level: u32) -> Option<&'static str> {
    IMPACT_LABELS.get(level.checked_sub(1)? as usize).copied()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum AssetCategory {
    PureInformation,
    PhysicalHardware,
    Software,
    Reputation,
    HumanResource,
}

impl AssetCategory {
    pub const ALL: [AssetCategory; 5] = [
        AssetCategory::PureInformation,
        AssetCategory::PhysicalHardware,
        AssetCategory::Software,
        AssetCategory::Reputation,
        AssetCategory::HumanResource,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            AssetCategory::PureInformation => "PureInformation",
            AssetCategory::PhysicalHardware => "PhysicalHardware",
            AssetCategory::Software => "Software",
            AssetCategory::Reputation => "Reputation",
            AssetCategory::HumanResource => "HumanResource",
        }
    }
}

impl fmt::Display for AssetCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AssetCategory {
    type Err = RiskError;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|c| c.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| RiskError::UnknownEnumValue {
                kind: "asset category",
                value: s.to_string(),
            })
    }
}

/// Role accountable for an asset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum OwnerRole {
    Ceo,
    Cio,
    Coo,
    Cfo,
    Cto,
    Ciso,
}

impl OwnerRole {
    pub const ALL: [OwnerRole; 6] = [
        OwnerRole::Ceo,
        OwnerRole::Cio,
        OwnerRole::Coo,
        OwnerRole::Cfo,
        OwnerRole::Cto,
        OwnerRole::Ciso,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            OwnerRole::Ceo => "CEO",
            OwnerRole::Cio => "CIO",
            OwnerRole::Coo => "COO",
            OwnerRole::Cfo => "CFO",
            OwnerRole::Cto => "CTO",
            OwnerRole::Ciso => "CISO",
        }
    }
}

impl fmt::Display for OwnerRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for OwnerRole {
    type Err = RiskError;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|o| o.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| RiskError::UnknownEnumValue {
                kind: "owner role",
                value: s.to_string(),
            })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Asset {
    pub name: String,
    pub category: AssetCategory,
    pub owner: OwnerRole,
    /// Asset value A, 1-5.
    pub value: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub impacts: Option<ImpactAssessment>,
}

impl Asset {
    pub fn new(name: impl Into<String>, category: AssetCategory, owner: OwnerRole, value: u32) -> Self {
        Asset {
            name: name.into(),
            category,
            owner,
            value,
            impacts: None,
        }
    }

    /// Builds an asset whose value is derived from its impact ratings.
    pub fn from_impacts(
        name: impl Into<String>,
        category: AssetCategory,
        owner: OwnerRole,
        impacts: ImpactAssessment,
    ) -> Result<Self> {
        let value = asset_value_from_impacts(&impacts)?;
        Ok(Asset {
            name: name.into(),
            category,
            owner,
            value,
            impacts: Some(impacts),
        })
    }
}

/// One row of the likelihood scale.
struct ScaleRow {
    label: &'static str,
    interpretation: &'static str,
    per_year: f64,
}

const SCALE: [ScaleRow; 10] = [
    ScaleRow {
        label: "Negligible",
        interpretation: "Once every 1000 years or less",
        per_year: 0.001,
    },
    ScaleRow {
        label: "Extremely Unlikely",
        interpretation: "Once every 200 years",
        per_year: 0.005,
    },
    ScaleRow {
        label: "Very Unlikely",
        interpretation: "Once every 50 years",
        per_year: 0.02,
    },
    ScaleRow {
        label: "Unlikely",
        interpretation: "Once every 20 years",
        per_year: 0.05,
    },
    ScaleRow {
        label: "Feasible",
        interpretation: "Once every 5 years",
        per_year: 0.2,
    },
    ScaleRow {
        label: "Probable",
        interpretation: "Annually",
        per_year: 1.0,
    },
    ScaleRow {
        label: "Very Probable",
        interpretation: "Quarterly",
        per_year: 4.0,
    },
    ScaleRow {
        label: "Expected",
        interpretation: "Monthly",
        per_year: 12.0,
    },
    ScaleRow {
        label: "Confidently Expected",
        interpretation: "Weekly",
        per_year: 52.0,
    },
    ScaleRow {
        label: "Certain",
        interpretation: "Daily",
        per_year: 365.0,
    },
];

/// A threat or vulnerability likelihood level, 1 (negligible) to 10 (certain).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Likelihood(u32);

impl Likelihood {
    pub fn new(level: u32) -> Result<Self> {
        check_range("likelihood", level, LIKELIHOOD_MIN, LIKELIHOOD_MAX).map(Likelihood)
    }

    pub fn all() -> impl Iterator<Item = Likelihood> {
        (LIKELIHOOD_MIN..=LIKELIHOOD_MAX).map(Likelihood)
    }

    pub fn level(self) -> u32 {
        self.0
    }

    fn row(self) -> &'static ScaleRow {
        &SCALE[(self.0 - 1) as usize]
    }

    pub fn label(self) -> &'static str {
        self.row().label
    }

    /// Frequency phrase, e.g. "Quarterly".
    pub fn interpretation(self) -> &'static str {
        self.row().interpretation
    }

    /// Events per year the level stands for.
    pub fn anchor_frequency(self) -> f64 {
        self.row().per_year
    }

    pub fn from_label(label: &str) -> Option<Likelihood> {
        Self::all().find(|l| l.label().eq_ignore_ascii_case(label.trim()))
    }
}

impl fmt::Display for Likelihood {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({} / {})", self.0, self.label(), self.interpretation())
    }
}

/// Maps an observed event rate (events per year) to the likelihood level
/// whose anchor is nearest in log space. Exact ties go to the higher level.
pub fn likelihood_from_frequency(rate: f64) -> Result<Likelihood> {
    if !(rate.is_finite() && rate > 0.0) {
        return Err(RiskError::Domain(format!(
            "event rate must be a positive number of events per year, got {rate}"
        )));
    }
    let target = rate.ln();
    let mut best = Likelihood(LIKELIHOOD_MIN);
    let mut best_distance = f64::INFINITY;
    for level in Likelihood::all() {
        let distance = (target - level.anchor_frequency().ln()).abs();
        if distance <= best_distance {
            best = level;
            best_distance = distance;
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Threat {
    pub name: String,
    /// Threat likelihood T, 1-10.
    pub likelihood: u32,
}

impl Threat {
    pub fn new(name: impl Into<String>, likelihood: u32) -> Self {
        Threat {
            name: name.into(),
            likelihood,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Vulnerability {
    pub name: String,
    /// Vulnerability likelihood V, 1-10.
    pub likelihood: u32,
}

impl Vulnerability {
    pub fn new(name: impl Into<String>, likelihood: u32) -> Self {
        Vulnerability {
            name: name.into(),
            likelihood,
        }
    }
}

/// One register row: an asset exposed to a threat through a vulnerability.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RiskEntry {
    pub id: u32,
    pub asset: Asset,
    pub threat: Threat,
    pub vulnerability: Vulnerability,
    /// A x T x V. Kept in sync by `score_register`.
    pub risk: u32,
}

impl RiskEntry {
    /// Builds an entry with its risk computed from the three factors.
    pub fn new(id: u32, asset: Asset, threat: Threat, vulnerability: Vulnerability) -> Result<Self> {
        let mut entry = RiskEntry {
            id,
            asset,
            threat,
            vulnerability,
            risk: 0,
        };
        entry.risk = entry.recomputed_risk()?;
        Ok(entry)
    }

    pub fn recomputed_risk(&self) -> Result<u32> {
        compute_risk(self.asset.value, self.threat.likelihood, self.vulnerability.likelihood)
            .map_err(|e| e.for_entry(self.id))
    }

    /// (A, T, V) triple.
    pub fn factors(&self) -> (u32, u32, u32) {
        (self.asset.value, self.threat.likelihood, self.vulnerability.likelihood)
    }
}

/// Presentation order: risk descending, then id ascending.
pub fn presentation_order(a: &RiskEntry, b: &RiskEntry) -> Ordering {
    b.risk.cmp(&a.risk).then(a.id.cmp(&b.id))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RiskRegister {
    pub entries: Vec<RiskEntry>,
    pub appetite: u32,
}

impl Default for RiskRegister {
    fn default() -> Self {
        RiskRegister {
            entries: Vec::new(),
            appetite: DEFAULT_APPETITE,
        }
    }
}

impl RiskRegister {
    pub fn new(entries: Vec<RiskEntry>, appetite: u32) -> Self {
        RiskRegister { entries, appetite }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, id: u32) -> Option<&RiskEntry> {
        self.entries.iter().find(|e| e.id == id)
    }

    pub fn ids(&self) -> impl Iterator<Item = u32> + '_ {
        self.entries.iter().map(|e| e.id)
    }

    pub fn is_sorted(&self) -> bool {
        self.entries
            .windows(2)
            .all(|w| presentation_order(&w[0], &w[1]) != Ordering::Greater)
    }

    pub fn total_risk(&self) -> u64 {
        self.entries.iter().map(|e| u64::from(e.risk)).sum()
    }

    /// Smallest id not yet used.
    pub fn next_id(&self) -> u32 {
        self.ids().max().map_or(1, |m| m + 1)
    }
}
