//! Control catalog, control application, recommendation, defense-in-depth
//! layering, compensating controls, and residual-risk what-if snapshots.
//!
//! Controls lower threat and/or vulnerability likelihood by whole levels.
//! Several controls on one entry add their reductions, and the sum is clamped
//! once per dimension to `[1, 10]`, so application order never matters.
//! Asset value is never changed by a control.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::appetite::{BandThresholds, SeverityBand};
use crate::error::{Result, RiskError};
use crate::model::{RiskEntry, RiskRegister, LIKELIHOOD_MAX, LIKELIHOOD_MIN};
use crate::scoring::{compute_risk, score_register};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ControlCategory {
    Administrative,
    Technical,
    Physical,
}

impl ControlCategory {
    pub const ALL: [ControlCategory; 3] = [
        ControlCategory::Administrative,
        ControlCategory::Technical,
        ControlCategory::Physical,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ControlCategory::Administrative => "administrative",
            ControlCategory::Technical => "technical",
            ControlCategory::Physical => "physical",
        }
    }
}

impl fmt::Display for ControlCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ControlCategory {
    type Err = RiskError;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|c| c.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| RiskError::UnknownEnumValue {
                kind: "control category",
                value: s.to_string(),
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ControlFunction {
    Prevent,
    Deter,
    Deflect,
    Mitigate,
    Detect,
    Recover,
}

impl ControlFunction {
    pub const ALL: [ControlFunction; 6] = [
        ControlFunction::Prevent,
        ControlFunction::Deter,
        ControlFunction::Deflect,
        ControlFunction::Mitigate,
        ControlFunction::Detect,
        ControlFunction::Recover,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ControlFunction::Prevent => "prevent",
            ControlFunction::Deter => "deter",
            ControlFunction::Deflect => "deflect",
            ControlFunction::Mitigate => "mitigate",
            ControlFunction::Detect => "detect",
            ControlFunction::Recover => "recover",
        }
    }
}

impl fmt::Display for ControlFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ControlFunction {
    type Err = RiskError;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|c| c.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| RiskError::UnknownEnumValue {
                kind: "control function",
                value: s.to_string(),
            })
    }
}

/// Likelihood levels a control removes from T and V.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ControlEffect {
    pub threat_reduction: u32,
    pub vulnerability_reduction: u32,
}

impl ControlEffect {
    pub const fn new(threat_reduction: u32, vulnerability_reduction: u32) -> Self {
        ControlEffect {
            threat_reduction,
            vulnerability_reduction,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.threat_reduction == 0 && self.vulnerability_reduction == 0
    }

    pub fn magnitude(&self) -> u64 {
        u64::from(self.threat_reduction) + u64::from(self.vulnerability_reduction)
    }

    fn combine(self, other: ControlEffect) -> ControlEffect {
        ControlEffect {
            threat_reduction: self.threat_reduction.saturating_add(other.threat_reduction),
            vulnerability_reduction: self
                .vulnerability_reduction
                .saturating_add(other.vulnerability_reduction),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Control {
    /// Catalog code, e.g. `C-ADM-01`.
    pub id: String,
    pub name: String,
    pub category: ControlCategory,
    pub functions: BTreeSet<ControlFunction>,
    /// Threat and/or vulnerability names the control addresses. Empty means
    /// it applies to every entry.
    #[serde(default)]
    pub applies_to: Vec<String>,
    pub effect: ControlEffect,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub compensating_for: Option<String>,
    /// Security principles the control supports (metadata only).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub principles: Vec<String>,
}

impl Control {
    pub fn validate(&self) -> Result<()> {
        if self.id.trim().is_empty() {
            return Err(RiskError::Domain("control id must not be empty".into()));
        }
        if self.functions.is_empty() {
            return Err(RiskError::Domain(format!("control {} has no functions", self.id)));
        }
        let detect_or_recover_only = self
            .functions
            .iter()
            .all(|f| matches!(f, ControlFunction::Detect | ControlFunction::Recover));
        if self.effect.is_zero() && !detect_or_recover_only {
            return Err(RiskError::Domain(format!(
                "control {} reduces neither likelihood; only detect/recover controls may have no effect",
                self.id
            )));
        }
        Ok(())
    }

    pub fn is_universal(&self) -> bool {
        self.applies_to.is_empty()
    }

    pub fn applies_to_entry(&self, entry: &RiskEntry) -> bool {
        self.is_universal()
            || self.applies_to.iter().any(|tag| {
                let tag = tag.trim();
                tag.eq_ignore_ascii_case(entry.threat.name.trim())
                    || tag.eq_ignore_ascii_case(entry.vulnerability.name.trim())
            })
    }

    pub fn has_function(&self, function: ControlFunction) -> bool {
        self.functions.contains(&function)
    }
}

/// Checks catalog-level invariants: each control valid, ids unique.
pub fn validate_catalog(catalog: &[Control]) -> Result<()> {
    let mut ids = BTreeSet::new();
    for control in catalog {
        control.validate()?;
        if !ids.insert(control.id.as_str()) {
            return Err(RiskError::Domain(format!("duplicate control id {}", control.id)));
        }
    }
    Ok(())
}

fn find_control<'a>(catalog: &'a [Control], id: &str) -> Result<&'a Control> {
    catalog
        .iter()
        .find(|c| c.id == id)
        .ok_or_else(|| RiskError::UnknownControl(id.to_string()))
}

fn reduce(level: u32, by: u32) -> u32 {
    level.saturating_sub(by).clamp(LIKELIHOOD_MIN, LIKELIHOOD_MAX)
}

fn apply_effect(entry: &RiskEntry, effect: ControlEffect) -> Result<RiskEntry> {
    let mut out = entry.clone();
    out.threat.likelihood = reduce(entry.threat.likelihood, effect.threat_reduction);
    out.vulnerability.likelihood = reduce(entry.vulnerability.likelihood, effect.vulnerability_reduction);
    out.risk = compute_risk(out.asset.value, out.threat.likelihood, out.vulnerability.likelihood)
        .map_err(|e| e.for_entry(entry.id))?;
    Ok(out)
}

/// Residual entry after one control.
pub fn apply_control(entry: &RiskEntry, control: &Control) -> Result<RiskEntry> {
    if !control.applies_to_entry(entry) {
        return Err(RiskError::NotApplicable {
            control: control.id.clone(),
            entry: entry.id,
        });
    }
    apply_effect(entry, control.effect)
}

/// Entry id -> control ids to apply to it.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ControlPlan {
    pub assignments: BTreeMap<u32, Vec<String>>,
}

impl ControlPlan {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn assign(&mut self, entry: u32, control: impl Into<String>) -> &mut Self {
        self.assignments.entry(entry).or_default().push(control.into());
        self
    }

    pub fn is_empty(&self) -> bool {
        self.assignments.values().all(Vec::is_empty)
    }

    /// Every referenced entry and control must exist.
    pub fn check(&self, register: &RiskRegister, catalog: &[Control]) -> Result<()> {
        for (&entry, controls) in &self.assignments {
            if register.get(entry).is_none() {
                return Err(RiskError::UnknownEntry(entry));
            }
            for id in controls {
                find_control(catalog, id)?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntryDelta {
    pub id: u32,
    pub risk_before: u32,
    pub risk_after: u32,
    pub band_before: SeverityBand,
    pub band_after: SeverityBand,
    /// Control ids applied to the entry, in catalog-id order.
    pub controls: Vec<String>,
}

impl EntryDelta {
    pub fn reduction(&self) -> u32 {
        self.risk_before - self.risk_after
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DefenseReport {
    pub entry: u32,
    pub above_appetite: bool,
    pub satisfied: bool,
    pub present: Vec<ControlCategory>,
    pub missing: Vec<ControlCategory>,
}

/// Paired before/after register states for a control plan.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WhatIfSnapshot {
    pub before: RiskRegister,
    pub after: RiskRegister,
    /// One per entry, in the before register's order.
    pub deltas: Vec<EntryDelta>,
    pub total_before: u64,
    pub total_after: u64,
    /// Layering check for every entry the plan touches.
    pub defense: Vec<DefenseReport>,
}

pub fn apply_plan(register: &RiskRegister, catalog: &[Control], plan: &ControlPlan) -> Result<WhatIfSnapshot> {
    apply_plan_with(register, catalog, plan, &BandThresholds::default())
}

pub fn apply_plan_with(
    register: &RiskRegister,
    catalog: &[Control],
    plan: &ControlPlan,
    thresholds: &BandThresholds,
) -> Result<WhatIfSnapshot> {
    plan.check(register, catalog)?;
    let before = score_register(register.clone())?;
    let appetite = before.appetite;

    let mut after_entries = Vec::with_capacity(before.len());
    let mut deltas = Vec::with_capacity(before.len());
    let mut defense = Vec::new();

    for entry in &before.entries {
        let mut controls: Vec<&Control> = match plan.assignments.get(&entry.id) {
            Some(ids) => ids.iter().map(|id| find_control(catalog, id)).collect::<Result<_>>()?,
            None => Vec::new(),
        };
        controls.sort_by(|a, b| a.id.cmp(&b.id));
        controls.dedup_by(|a, b| a.id == b.id);

        let mut total = ControlEffect::default();
        for control in &controls {
            if !control.applies_to_entry(entry) {
                return Err(RiskError::NotApplicable {
                    control: control.id.clone(),
                    entry: entry.id,
                });
            }
            total = total.combine(control.effect);
        }
        let residual = apply_effect(entry, total)?;

        if plan.assignments.contains_key(&entry.id) {
            defense.push(defense_in_depth_check(entry, &controls, appetite));
        }
        deltas.push(EntryDelta {
            id: entry.id,
            risk_before: entry.risk,
            risk_after: residual.risk,
            band_before: thresholds.band(entry.risk, appetite),
            band_after: thresholds.band(residual.risk, appetite),
            controls: controls.iter().map(|c| c.id.clone()).collect(),
        });
        after_entries.push(residual);
    }

    let after = score_register(RiskRegister::new(after_entries, appetite))?;
    Ok(WhatIfSnapshot {
        total_before: before.total_risk(),
        total_after: after.total_risk(),
        before,
        after,
        deltas,
        defense,
    })
}

/// Applicable controls ranked for an entry: largest risk reduction first,
/// then controls adding a category not already ranked, then id. For an
/// entry above the appetite the list leads with a preventive control when
/// one applies.
pub fn recommend_controls<'a>(entry: &RiskEntry, catalog: &'a [Control], appetite: u32) -> Vec<&'a Control> {
    let mut candidates: Vec<(&Control, u32)> = catalog
        .iter()
        .filter_map(|c| {
            let residual = apply_control(entry, c).ok()?;
            Some((c, entry.risk.saturating_sub(residual.risk)))
        })
        .collect();

    let mut ranked: Vec<&Control> = Vec::with_capacity(candidates.len());
    let mut categories = BTreeSet::new();
    while !candidates.is_empty() {
        let (idx, _) = candidates
            .iter()
            .enumerate()
            .max_by_key(|(_, (c, reduction))| (*reduction, !categories.contains(&c.category), Reverse(c.id.as_str())))
            .expect("candidates is non-empty");
        let (control, _) = candidates.swap_remove(idx);
        categories.insert(control.category);
        ranked.push(control);
    }

    if entry.risk > appetite {
        if let Some(pos) = ranked.iter().position(|c| c.has_function(ControlFunction::Prevent)) {
            let preventive = ranked.remove(pos);
            ranked.insert(0, preventive);
        }
    }
    ranked
}

/// Above-appetite entries need controls from at least two categories.
pub fn defense_in_depth_check(entry: &RiskEntry, applied: &[&Control], appetite: u32) -> DefenseReport {
    let present: BTreeSet<ControlCategory> = applied.iter().map(|c| c.category).collect();
    let missing = ControlCategory::ALL
        .into_iter()
        .filter(|c| !present.contains(c))
        .collect();
    let above_appetite = entry.risk > appetite;
    DefenseReport {
        entry: entry.id,
        above_appetite,
        satisfied: !above_appetite || present.len() >= 2,
        present: present.into_iter().collect(),
        missing,
    }
}

/// Controls registered as compensating for `unavailable`, strongest first.
pub fn compensating_substitute<'a>(catalog: &'a [Control], unavailable: &str) -> Result<Vec<&'a Control>> {
    find_control(catalog, unavailable)?;
    let mut subs: Vec<&Control> = catalog
        .iter()
        .filter(|c| c.compensating_for.as_deref() == Some(unavailable))
        .collect();
    subs.sort_by(|a, b| {
        b.effect
            .magnitude()
            .cmp(&a.effect.magnitude())
            .then_with(|| a.id.cmp(&b.id))
    });
    Ok(subs)
}
