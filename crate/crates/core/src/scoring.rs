//! Risk scoring (A x T x V), register ordering, and register validation.

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{check_range, Result};
use crate::model::{
    asset_value_from_impacts, presentation_order, Asset, RiskEntry, RiskRegister, ASSET_VALUE_MAX, ASSET_VALUE_MIN,
    LIKELIHOOD_MAX, LIKELIHOOD_MIN,
};

/// Risk score of an (asset value, threat likelihood, vulnerability
/// likelihood) triple: the exact product, in `[1, 500]`.
pub fn compute_risk(asset_value: u32, threat_likelihood: u32, vulnerability_likelihood: u32) -> Result<u32> {
    let a = check_range("asset_value", asset_value, ASSET_VALUE_MIN, ASSET_VALUE_MAX)?;
    let t = check_range("threat_likelihood", threat_likelihood, LIKELIHOOD_MIN, LIKELIHOOD_MAX)?;
    let v = check_range(
        "vulnerability_likelihood",
        vulnerability_likelihood,
        LIKELIHOOD_MIN,
        LIKELIHOOD_MAX,
    )?;
    Ok(a * t * v)
}

/// Recomputes every entry's risk and sorts by (risk desc, id asc).
pub fn score_register(mut register: RiskRegister) -> Result<RiskRegister> {
    for entry in &mut register.entries {
        entry.risk = entry.recomputed_risk()?;
    }
    register.entries.sort_by(presentation_order);
    Ok(register)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum FindingCode {
    RangeError,
    DuplicateId,
    UnknownLabel,
    ImpactMismatch,
    RiskMismatch,
    AssetInconsistent,
    OrderMismatch,
    PartitionMismatch,
    LayoutUnknownId,
}

impl FindingCode {
    pub fn as_str(self) -> &'static str {
        match self {
            FindingCode::RangeError => "RangeError",
            FindingCode::DuplicateId => "DuplicateId",
            FindingCode::UnknownLabel => "UnknownLabel",
            FindingCode::ImpactMismatch => "ImpactMismatch",
            FindingCode::RiskMismatch => "RiskMismatch",
            FindingCode::AssetInconsistent => "AssetInconsistent",
            FindingCode::OrderMismatch => "OrderMismatch",
            FindingCode::PartitionMismatch => "PartitionMismatch",
            FindingCode::LayoutUnknownId => "LayoutUnknownId",
        }
    }
}

impl fmt::Display for FindingCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Finding {
    /// Entry the finding is about; `None` for register-level findings.
    pub entry: Option<u32>,
    pub code: FindingCode,
    pub message: String,
}

impl Finding {
    pub fn new(entry: Option<u32>, code: FindingCode, message: impl Into<String>) -> Self {
        Finding {
            entry,
            code,
            message: message.into(),
        }
    }
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.entry {
            Some(id) => write!(f, "entry {id}: {}: {}", self.code, self.message),
            None => write!(f, "register: {}: {}", self.code, self.message),
        }
    }
}

/// Errors block assessment; warnings do not.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub errors: Vec<Finding>,
    pub warnings: Vec<Finding>,
}

impl ValidationReport {
    pub fn is_acceptable(&self) -> bool {
        self.errors.is_empty()
    }

    pub fn error(&mut self, entry: Option<u32>, code: FindingCode, message: impl Into<String>) {
        self.errors.push(Finding::new(entry, code, message));
    }

    pub fn warn(&mut self, entry: Option<u32>, code: FindingCode, message: impl Into<String>) {
        self.warnings.push(Finding::new(entry, code, message));
    }

    pub fn merge(&mut self, other: ValidationReport) {
        self.errors.extend(other.errors);
        self.warnings.extend(other.warnings);
    }

    pub fn has(&self, code: FindingCode) -> bool {
        self.errors.iter().chain(&self.warnings).any(|f| f.code == code)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} error(s), {} warning(s)", self.errors.len(), self.warnings.len())?;
        for e in &self.errors {
            writeln!(f, "error: {e}")?;
        }
        for w in &self.warnings {
            writeln!(f, "warning: {w}")?;
        }
        Ok(())
    }
}

/// Above/below placement of a register as it was originally presented,
/// e.g. a printed register with its appetite line.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PresentedLayout {
    pub appetite: u32,
    pub above: Vec<u32>,
    pub below: Vec<u32>,
}

fn check_entry_ranges(entry: &RiskEntry, report: &mut ValidationReport) -> bool {
    let checks = [
        ("asset_value", entry.asset.value, ASSET_VALUE_MIN, ASSET_VALUE_MAX),
        (
            "threat_likelihood",
            entry.threat.likelihood,
            LIKELIHOOD_MIN,
            LIKELIHOOD_MAX,
        ),
        (
            "vulnerability_likelihood",
            entry.vulnerability.likelihood,
            LIKELIHOOD_MIN,
            LIKELIHOOD_MAX,
        ),
    ];
    let mut ok = true;
    for (field, value, min, max) in checks {
        if let Err(e) = check_range(field, value, min, max) {
            report.error(Some(entry.id), FindingCode::RangeError, e.to_string());
            ok = false;
        }
    }
    ok
}

/// Checks a register for consistency. Never fails; findings go in the report.
pub fn validate_register(register: &RiskRegister) -> ValidationReport {
    let mut report = ValidationReport::default();

    if register.appetite == 0 {
        report.error(None, FindingCode::RangeError, "appetite must be at least 1");
    }

    let mut seen = HashSet::new();
    let mut assets: BTreeMap<&str, (&Asset, u32)> = BTreeMap::new();
    let mut recomputed = Vec::with_capacity(register.len());

    for entry in &register.entries {
        let id = Some(entry.id);
        if entry.id == 0 {
            report.error(id, FindingCode::RangeError, "entry id must be a positive integer");
        }
        if !seen.insert(entry.id) {
            report.error(
                id,
                FindingCode::DuplicateId,
                format!("id {} appears more than once", entry.id),
            );
        }

        let in_range = check_entry_ranges(entry, &mut report);

        if let Some(impacts) = &entry.asset.impacts {
            match asset_value_from_impacts(impacts) {
                Ok(derived) if derived != entry.asset.value => report.error(
                    id,
                    FindingCode::ImpactMismatch,
                    format!(
                        "asset value {} differs from the value {derived} derived from its impacts",
                        entry.asset.value
                    ),
                ),
                Ok(_) => {}
                Err(e) => report.error(id, FindingCode::RangeError, format!("impacts: {e}")),
            }
        }

        match assets.get(entry.asset.name.as_str()) {
            Some((first, first_id)) => {
                let other = &entry.asset;
                if first.category != other.category || first.owner != other.owner || first.value != other.value {
                    report.warn(
                        id,
                        FindingCode::AssetInconsistent,
                        format!(
                            "asset `{}` recorded as ({}, {}, {}) here but ({}, {}, {}) in entry {first_id}",
                            other.name,
                            other.category,
                            other.owner,
                            other.value,
                            first.category,
                            first.owner,
                            first.value
                        ),
                    );
                }
            }
            None => {
                assets.insert(entry.asset.name.as_str(), (&entry.asset, entry.id));
            }
        }

        if in_range {
            let (a, t, v) = entry.factors();
            let expected = a * t * v;
            if entry.risk != expected {
                report.warn(
                    id,
                    FindingCode::RiskMismatch,
                    format!("stated risk {} but A*T*V = {a}*{t}*{v} = {expected}", entry.risk),
                );
            }
            recomputed.push((expected, entry.id));
        }
    }

    // presented order vs (risk desc, id asc) over recomputed risks
    if let Some(pair) = recomputed
        .windows(2)
        .find(|w| (w[1].0, std::cmp::Reverse(w[1].1)) > (w[0].0, std::cmp::Reverse(w[0].1)))
    {
        report.warn(
            Some(pair[1].1),
            FindingCode::OrderMismatch,
            format!(
                "entry {} (risk {}) is presented after entry {} (risk {})",
                pair[1].1, pair[1].0, pair[0].1, pair[0].0
            ),
        );
    }

    report
}

/// Compares a presented above/below placement with the partition implied by
/// the recomputed risks at the layout's appetite.
pub fn check_layout(register: &RiskRegister, layout: &PresentedLayout) -> ValidationReport {
    let mut report = ValidationReport::default();
    let placements = layout
        .above
        .iter()
        .map(|&id| (id, true))
        .chain(layout.below.iter().map(|&id| (id, false)));

    for (id, presented_above) in placements {
        let Some(entry) = register.get(id) else {
            report.warn(
                Some(id),
                FindingCode::LayoutUnknownId,
                format!("layout places id {id} which is not in the register"),
            );
            continue;
        };
        let Ok(risk) = entry.recomputed_risk() else {
            continue;
        };
        let above = risk > layout.appetite;
        if above != presented_above {
            let (was, is) = if presented_above {
                ("above", "below")
            } else {
                ("below", "above")
            };
            report.warn(
                Some(id),
                FindingCode::PartitionMismatch,
                format!(
                    "presented {was} the appetite line but risk {risk} places it {is} appetite {}",
                    layout.appetite
                ),
            );
        }
    }

    let presented: Vec<u32> = layout.above.iter().chain(&layout.below).copied().collect();
    let mut expected: Vec<&RiskEntry> = register.entries.iter().filter(|e| presented.contains(&e.id)).collect();
    expected.sort_by(|a, b| presentation_order(a, b));
    if let Some((pos, _)) = expected
        .iter()
        .zip(&presented)
        .enumerate()
        .find(|(_, (e, &id))| e.id != id)
    {
        report.warn(
            Some(presented[pos]),
            FindingCode::OrderMismatch,
            format!(
                "layout position {} holds id {} but (risk desc, id asc) order expects id {}",
                pos + 1,
                presented[pos],
                expected[pos].id
            ),
        );
    }

    report
}
