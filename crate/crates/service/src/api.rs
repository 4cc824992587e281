//! JSON documents exchanged with clients.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use riskreg::{
    parse_anchor_pair, treatment_for_band, Appetite, AppetiteAnchor, AssetCategory, Control, DefenseReport, EntryDelta,
    HeatCell, OwnerRole, RiskEntry, SeverityBand, TreatmentAction, WhatIfSnapshot,
};

use crate::error::{ApiError, FieldError};
use crate::store::StoreState;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssetDoc {
    pub name: String,
    pub category: AssetCategory,
    pub owner: OwnerRole,
    pub value: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorDoc {
    pub name: String,
    pub likelihood: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntryDoc {
    pub id: u32,
    pub asset: AssetDoc,
    pub threat: FactorDoc,
    pub vulnerability: FactorDoc,
    pub risk: u32,
    pub band: SeverityBand,
    pub treatment: TreatmentAction,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegisterDoc {
    pub revision: u64,
    pub appetite: u32,
    pub entries: Vec<EntryDoc>,
}

impl RegisterDoc {
    pub fn from_state(state: &StoreState) -> Self {
        RegisterDoc {
            revision: state.revision,
            appetite: state.appetite.value,
            entries: state.register.entries.iter().map(|e| entry_doc(state, e)).collect(),
        }
    }
}

pub fn entry_doc(state: &StoreState, e: &RiskEntry) -> EntryDoc {
    let band = state.bands.band(e.risk, state.appetite.value);
    EntryDoc {
        id: e.id,
        asset: AssetDoc {
            name: e.asset.name.clone(),
            category: e.asset.category,
            owner: e.asset.owner,
            value: e.asset.value,
        },
        threat: FactorDoc {
            name: e.threat.name.clone(),
            likelihood: e.threat.likelihood,
        },
        vulnerability: FactorDoc {
            name: e.vulnerability.name.clone(),
            likelihood: e.vulnerability.likelihood,
        },
        risk: e.risk,
        band,
        treatment: treatment_for_band(band),
    }
}

/// Incoming entry. Numbers and labels are taken loosely so that range and
/// label problems come back as field-level 422s rather than decode errors.
#[derive(Debug, Clone, Deserialize)]
pub struct EntryInput {
    #[serde(default)]
    pub id: Option<i64>,
    pub asset: AssetInput,
    pub threat: FactorInput,
    pub vulnerability: FactorInput,
}

#[derive(Debug, Clone, Deserialize)]
pub struct AssetInput {
    pub name: String,
    pub category: String,
    pub owner: String,
    pub value: i64,
}

#[derive(Debug, Clone, Deserialize)]
pub struct FactorInput {
    pub name: String,
    pub likelihood: i64,
}

fn ranged(field: &str, value: i64, min: i64, max: i64, errors: &mut Vec<FieldError>) -> u32 {
    if (min..=max).contains(&value) {
        value as u32
    } else {
        errors.push(FieldError::new(
            "RangeError",
            field,
            format!("{field} = {value} is outside [{min}, {max}]"),
        ));
        0
    }
}

fn named(field: &str, value: &str, errors: &mut Vec<FieldError>) -> String {
    if value.trim().is_empty() {
        errors.push(FieldError::new(
            "RangeError",
            field,
            format!("{field} must not be empty"),
        ));
    }
    value.to_string()
}

impl EntryInput {
    /// Validates every field and builds the entry with its risk computed.
    pub fn into_entry(self, id: u32) -> Result<RiskEntry, ApiError> {
        let mut errors = Vec::new();
        let asset_name = named("asset.name", &self.asset.name, &mut errors);
        let category = self.asset.category.parse::<AssetCategory>().map_err(|e| {
            errors.push(FieldError::new("UnknownEnumValue", "asset.category", e.to_string()));
        });
        let owner = self.asset.owner.parse::<OwnerRole>().map_err(|e| {
            errors.push(FieldError::new("UnknownEnumValue", "asset.owner", e.to_string()));
        });
        let value = ranged("asset.value", self.asset.value, 1, 5, &mut errors);
        let threat_name = named("threat.name", &self.threat.name, &mut errors);
        let threat_likelihood = ranged("threat.likelihood", self.threat.likelihood, 1, 10, &mut errors);
        let vulnerability_name = named("vulnerability.name", &self.vulnerability.name, &mut errors);
        let vulnerability_likelihood = ranged(
            "vulnerability.likelihood",
            self.vulnerability.likelihood,
            1,
            10,
            &mut errors,
        );

        match (category, owner) {
            (Ok(category), Ok(owner)) if errors.is_empty() => RiskEntry::new(
                id,
                riskreg::Asset::new(asset_name, category, owner, value),
                riskreg::Threat::new(threat_name, threat_likelihood),
                riskreg::Vulnerability::new(vulnerability_name, vulnerability_likelihood),
            )
            .map_err(ApiError::from),
            _ => Err(ApiError::validation(errors)),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
pub struct UpsertRequest {
    pub expected_revision: u64,
    pub entry: EntryInput,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct UpsertResponse {
    pub revision: u64,
    pub entry: EntryDoc,
}

#[derive(Debug, Clone, Deserialize)]
pub struct DeleteQuery {
    pub expected_revision: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RevisionDoc {
    pub revision: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnchorsDoc {
    pub low: AppetiteAnchor,
    pub high: AppetiteAnchor,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AppetiteDoc {
    pub revision: u64,
    pub appetite: u32,
    pub anchors: Option<AnchorsDoc>,
    /// Band fractions as `red,yellow,green`.
    pub bands: String,
}

impl AppetiteDoc {
    pub fn from_state(state: &StoreState) -> Self {
        AppetiteDoc {
            revision: state.revision,
            appetite: state.appetite.value,
            anchors: state.appetite.anchors.map(|(low, high)| AnchorsDoc { low, high }),
            bands: state.bands.to_string(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum AnchorsInput {
    Pair {
        low: AnchorInput,
        high: AnchorInput,
    },
    /// `a,t,v:a,t,v`
    Text(String),
}

#[derive(Debug, Clone, Deserialize)]
pub struct AnchorInput {
    pub asset_value: i64,
    pub threat_likelihood: i64,
    pub vulnerability_likelihood: i64,
}

impl AnchorInput {
    fn to_anchor(&self, side: &str, errors: &mut Vec<FieldError>) -> AppetiteAnchor {
        AppetiteAnchor::new(
            ranged(&format!("anchors.{side}.asset_value"), self.asset_value, 1, 5, errors),
            ranged(
                &format!("anchors.{side}.threat_likelihood"),
                self.threat_likelihood,
                1,
                10,
                errors,
            ),
            ranged(
                &format!("anchors.{side}.vulnerability_likelihood"),
                self.vulnerability_likelihood,
                1,
                10,
                errors,
            ),
        )
    }
}

#[derive(Debug, Clone, Deserialize)]
pub struct AppetiteRequest {
    pub expected_revision: u64,
    #[serde(default)]
    pub anchors: Option<AnchorsInput>,
    #[serde(default)]
    pub value: Option<i64>,
}

impl AppetiteRequest {
    pub fn appetite(&self) -> Result<Appetite, ApiError> {
        match (&self.anchors, self.value) {
            (Some(_), Some(_)) | (None, None) => Err(ApiError::validation(vec![FieldError::new(
                "RangeError",
                "anchors",
                "give exactly one of `anchors` or `value`",
            )])),
            (None, Some(v)) => {
                let mut errors = Vec::new();
                let v = ranged("value", v, 1, i64::from(u32::MAX), &mut errors);
                if errors.is_empty() {
                    Appetite::explicit(v).map_err(ApiError::from)
                } else {
                    Err(ApiError::validation(errors))
                }
            }
            (Some(AnchorsInput::Text(text)), None) => {
                let (low, high) = parse_anchor_pair(text).map_err(|e| ApiError::from(e).with_field("anchors"))?;
                Appetite::from_anchors(low, high).map_err(ApiError::from)
            }
            (Some(AnchorsInput::Pair { low, high }), None) => {
                let mut errors = Vec::new();
                let low = low.to_anchor("low", &mut errors);
                let high = high.to_anchor("high", &mut errors);
                if !errors.is_empty() {
                    return Err(ApiError::validation(errors));
                }
                Appetite::from_anchors(low, high).map_err(ApiError::from)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeatRowDoc {
    pub asset_value: u32,
    pub cells: Vec<HeatCell>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeatmapDoc {
    pub revision: u64,
    pub appetite: u32,
    /// Asset value 1 first.
    pub rows: Vec<HeatRowDoc>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct WhatIfRequest {
    #[serde(default)]
    pub assignments: BTreeMap<u32, Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaDoc {
    pub id: u32,
    pub risk_before: u32,
    pub risk_after: u32,
    pub band_before: SeverityBand,
    pub band_after: SeverityBand,
    pub treatment_before: TreatmentAction,
    pub treatment_after: TreatmentAction,
    pub controls: Vec<String>,
}

impl From<&EntryDelta> for DeltaDoc {
    fn from(d: &EntryDelta) -> Self {
        DeltaDoc {
            id: d.id,
            risk_before: d.risk_before,
            risk_after: d.risk_after,
            band_before: d.band_before,
            band_after: d.band_after,
            treatment_before: treatment_for_band(d.band_before),
            treatment_after: treatment_for_band(d.band_after),
            controls: d.controls.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WhatIfDoc {
    pub revision: u64,
    pub appetite: u32,
    pub total_before: u64,
    pub total_after: u64,
    pub deltas: Vec<DeltaDoc>,
    pub defense: Vec<DefenseReport>,
}

impl WhatIfDoc {
    pub fn new(revision: u64, snapshot: &WhatIfSnapshot) -> Self {
        WhatIfDoc {
            revision,
            appetite: snapshot.before.appetite,
            total_before: snapshot.total_before,
            total_after: snapshot.total_after,
            deltas: snapshot.deltas.iter().map(DeltaDoc::from).collect(),
            defense: snapshot.defense.clone(),
        }
    }
}

pub type CatalogDoc = Vec<Control>;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SaveDoc {
    pub revision: u64,
    pub path: String,
    pub entries: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HealthDoc {
    pub status: String,
    pub revision: u64,
    pub entries: usize,
}
