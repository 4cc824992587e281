use std::collections::BTreeSet;

use serde::Deserialize;

use crate::controls::{validate_catalog, Control, ControlCategory, ControlEffect, ControlFunction};
use crate::error::{Result, RiskError};

use super::{check_format_marker, toml_error};

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCatalog {
    #[serde(default)]
    control: Vec<RawControl>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawControl {
    id: String,
    name: String,
    category: String,
    functions: Vec<String>,
    #[serde(default)]
    applies_to: Vec<String>,
    #[serde(default)]
    threat_reduction: u32,
    #[serde(default)]
    vulnerability_reduction: u32,
    compensating_for: Option<String>,
    #[serde(default)]
    principles: Vec<String>,
}

impl RawControl {
    fn into_control(self) -> Result<Control> {
        let functions = self
            .functions
            .iter()
            .map(|f| f.parse::<ControlFunction>())
            .collect::<Result<BTreeSet<_>>>()?;
        Ok(Control {
            id: self.id,
            name: self.name,
            category: self.category.parse::<ControlCategory>()?,
            functions,
            applies_to: self.applies_to,
            effect: ControlEffect::new(self.threat_reduction, self.vulnerability_reduction),
            compensating_for: self.compensating_for,
            principles: self.principles,
        })
    }
}

/// Parses a TOML control catalog made of `[[control]]` tables.
///
/// Unknown category or function names fail with `UnknownEnumValue`; a
/// control breaking the catalog invariants fails with `Domain`. A
/// `compensating_for` reference must name a control in the same catalog.
pub fn parse_catalog(bytes: &[u8]) -> Result<Vec<Control>> {
    let text = std::str::from_utf8(bytes).map_err(|_| RiskError::Parse {
        line: 0,
        message: "invalid UTF-8".into(),
    })?;
    check_format_marker(text)?;
    let raw: RawCatalog = toml::from_str(text).map_err(|e| toml_error(text, e))?;
    let catalog = raw
        .control
        .into_iter()
        .map(RawControl::into_control)
        .collect::<Result<Vec<_>>>()?;
    validate_catalog(&catalog)?;
    for control in &catalog {
        if let Some(target) = &control.compensating_for {
            if !catalog.iter().any(|c| &c.id == target) {
                return Err(RiskError::Domain(format!(
                    "control {} compensates for unknown control {target}",
                    control.id
                )));
            }
        }
    }
    Ok(catalog)
}
