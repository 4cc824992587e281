use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{Result, RiskError};
use crate::model::{
    presentation_order, Asset, AssetCategory, OwnerRole, RiskEntry, RiskRegister, Threat, Vulnerability,
    DEFAULT_APPETITE,
};
use crate::scoring::{validate_register, FindingCode, PresentedLayout, ValidationReport};

use super::{check_format_marker, toml_error};

pub const REGISTER_HEADER: [&str; 10] = [
    "id",
    "asset",
    "category",
    "owner",
    "asset_value",
    "threat",
    "threat_likelihood",
    "vulnerability",
    "vulnerability_likelihood",
    "risk",
];

fn parse_error(line: u64, message: impl Into<String>) -> RiskError {
    RiskError::Parse {
        line,
        message: message.into(),
    }
}

fn csv_error(err: csv::Error) -> RiskError {
    let line = err.position().map_or(0, |p| p.line());
    let message = match err.kind() {
        csv::ErrorKind::Utf8 { .. } => "invalid UTF-8".to_string(),
        csv::ErrorKind::UnequalLengths { expected_len, len, .. } => {
            format!("expected {expected_len} fields, found {len}")
        }
        _ => err.to_string(),
    };
    parse_error(line, message)
}

fn number(field: &str, raw: &str, line: u64) -> Result<u32> {
    raw.trim()
        .parse()
        .map_err(|_| parse_error(line, format!("{field} `{raw}` is not a non-negative integer")))
}

fn text(field: &str, raw: &str, line: u64) -> Result<String> {
    if raw.trim().is_empty() {
        return Err(parse_error(line, format!("{field} must not be empty")));
    }
    Ok(raw.to_string())
}

/// Parses a register CSV.
///
/// Structural problems (bad header, wrong field count, non-numeric values,
/// invalid UTF-8) fail with a line-numbered `Parse` error. Domain problems
/// come back in the report: out-of-range values are errors, a stated risk
/// that disagrees with A*T*V is a warning and the recomputed value is
/// stored. Rows with unknown category or owner labels are reported and left
/// out of the register. Entries keep file order.
pub fn parse_register_csv(bytes: &[u8]) -> Result<(RiskRegister, ValidationReport)> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(bytes);
    let headers = reader.headers().map_err(csv_error)?.clone();
    let has_risk = match headers.len() {
        10 => true,
        9 => false,
        _ => return Err(header_error(&headers)),
    };
    if headers
        .iter()
        .zip(REGISTER_HEADER)
        .any(|(got, want)| got.trim() != want)
    {
        return Err(header_error(&headers));
    }

    let mut report = ValidationReport::default();
    let mut entries = Vec::new();
    for record in reader.records() {
        let record = record.map_err(csv_error)?;
        let line = record.position().map_or(0, |p| p.line());
        let id = number("id", &record[0], line)?;
        let asset_value = number("asset_value", &record[4], line)?;
        let threat_likelihood = number("threat_likelihood", &record[6], line)?;
        let vulnerability_likelihood = number("vulnerability_likelihood", &record[8], line)?;
        let stated = match has_risk {
            true if !record[9].trim().is_empty() => Some(number("risk", &record[9], line)?),
            _ => None,
        };
        let asset_name = text("asset", &record[1], line)?;
        let threat_name = text("threat", &record[5], line)?;
        let vulnerability_name = text("vulnerability", &record[7], line)?;

        let category = record[2].parse::<AssetCategory>();
        let owner = record[3].parse::<OwnerRole>();
        let (category, owner) = match (category, owner) {
            (Ok(c), Ok(o)) => (c, o),
            (c, o) => {
                for err in [c.err(), o.err()].into_iter().flatten() {
                    report.error(Some(id), FindingCode::UnknownLabel, format!("line {line}: {err}"));
                }
                continue;
            }
        };

        let mut entry = RiskEntry {
            id,
            asset: Asset::new(asset_name, category, owner, asset_value),
            threat: Threat::new(threat_name, threat_likelihood),
            vulnerability: Vulnerability::new(vulnerability_name, vulnerability_likelihood),
            risk: 0,
        };
        entry.risk = match (stated, entry.recomputed_risk()) {
            (Some(s), _) => s,
            (None, Ok(r)) => r,
            (None, Err(_)) => 0,
        };
        entries.push(entry);
    }

    let mut register = RiskRegister::new(entries, DEFAULT_APPETITE);
    report.merge(validate_register(&register));
    for entry in &mut register.entries {
        if let Ok(risk) = entry.recomputed_risk() {
            entry.risk = risk;
        }
    }
    Ok((register, report))
}

fn header_error(headers: &csv::StringRecord) -> RiskError {
    parse_error(
        1,
        format!(
            "header must be `{}` (risk column optional), found `{}`",
            REGISTER_HEADER.join(","),
            headers.iter().collect::<Vec<_>>().join(",")
        ),
    )
}

/// Writes the register as CSV with the full header, rows in (risk desc,
/// id asc) order and the risk column recomputed.
pub fn emit_register_csv(register: &RiskRegister) -> Vec<u8> {
    let mut entries: Vec<RiskEntry> = register.entries.clone();
    for entry in &mut entries {
        if let Ok(risk) = entry.recomputed_risk() {
            entry.risk = risk;
        }
    }
    entries.sort_by(presentation_order);

    let mut writer = csv::Writer::from_writer(Vec::new());
    writer
        .write_record(REGISTER_HEADER)
        .expect("writing to a Vec cannot fail");
    for e in &entries {
        writer
            .write_record([
                e.id.to_string(),
                e.asset.name.clone(),
                e.asset.category.to_string(),
                e.asset.owner.to_string(),
                e.asset.value.to_string(),
                e.threat.name.clone(),
                e.threat.likelihood.to_string(),
                e.vulnerability.name.clone(),
                e.vulnerability.likelihood.to_string(),
                e.risk.to_string(),
            ])
            .expect("writing to a Vec cannot fail");
    }
    writer.into_inner().expect("writing to a Vec cannot fail")
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLayout {
    appetite: u32,
    above: Vec<u32>,
    below: Vec<u32>,
}

/// Parses a layout sidecar (TOML with `appetite`, `above`, `below`).
pub fn parse_layout(bytes: &[u8]) -> Result<PresentedLayout> {
    let text = std::str::from_utf8(bytes).map_err(|_| parse_error(0, "invalid UTF-8"))?;
    check_format_marker(text)?;
    let raw: RawLayout = toml::from_str(text).map_err(|e| toml_error(text, e))?;
    Ok(PresentedLayout {
        appetite: raw.appetite,
        above: raw.above,
        below: raw.below,
    })
}

/// Sidecar path for a register file: `table.csv` -> `table.layout.toml`.
pub fn layout_path_for(register_path: &Path) -> PathBuf {
    register_path.with_extension("layout.toml")
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEADER: &str =
        "id,asset,category,owner,asset_value,threat,threat_likelihood,vulnerability,vulnerability_likelihood,risk\n";

    #[test]
    fn header_only_is_empty_register() {
        let (reg, report) = parse_register_csv(HEADER.as_bytes()).unwrap();
        assert!(reg.is_empty());
        assert!(report.errors.is_empty() && report.warnings.is_empty());
        assert_eq!(emit_register_csv(&reg), HEADER.as_bytes());
    }

    #[test]
    fn stated_risk_mismatch_is_repaired() {
        let csv = format!("{HEADER}16,Electronic Data,PureInformation,CIO,5,Human error,8,Mental Stress,9,999\n");
        let (reg, report) = parse_register_csv(csv.as_bytes()).unwrap();
        assert_eq!(reg.entries[0].risk, 360);
        assert!(report.is_acceptable());
        assert_eq!(report.warnings.len(), 1);
        assert_eq!(report.warnings[0].code, FindingCode::RiskMismatch);
    }

    #[test]
    fn risk_column_is_optional() {
        let csv =
            "id,asset,category,owner,asset_value,threat,threat_likelihood,vulnerability,vulnerability_likelihood\n\
                   32,IT Hardware,PhysicalHardware,CIO,2,Humidity,4,Rust,5\n";
        let (reg, report) = parse_register_csv(csv.as_bytes()).unwrap();
        assert_eq!(reg.entries[0].risk, 40);
        assert!(report.warnings.is_empty());
    }

    #[test]
    fn out_of_range_is_a_finding_not_a_parse_error() {
        let csv = format!("{HEADER}16,Electronic Data,PureInformation,CIO,5,Human error,11,Mental Stress,9,\n");
        let (reg, report) = parse_register_csv(csv.as_bytes()).unwrap();
        assert_eq!(reg.len(), 1);
        assert!(!report.is_acceptable());
        assert_eq!(report.errors[0].code, FindingCode::RangeError);
        assert_eq!(report.errors[0].entry, Some(16));
    }

    #[test]
    fn unknown_labels_are_reported() {
        let csv = format!(
            "{HEADER}1,Data,Logical,CIO,5,Theft,6,Weak,6,180\n2,Data,PureInformation,Janitor,5,Theft,6,Weak,6,180\n"
        );
        let (reg, report) = parse_register_csv(csv.as_bytes()).unwrap();
        assert!(reg.is_empty());
        assert_eq!(report.errors.len(), 2);
        assert!(report.errors.iter().all(|f| f.code == FindingCode::UnknownLabel));
    }

    #[test]
    fn structural_errors_carry_line_numbers() {
        let bad_header = "id,asset\n1,x\n";
        assert!(matches!(
            parse_register_csv(bad_header.as_bytes()),
            Err(RiskError::Parse { line: 1, .. })
        ));

        let short_row = format!("{HEADER}1,Data,PureInformation,CIO,5\n");
        assert!(matches!(
            parse_register_csv(short_row.as_bytes()),
            Err(RiskError::Parse { line: 2, .. })
        ));

        let non_numeric = format!("{HEADER}1,Data,PureInformation,CIO,5,Theft,six,Weak,6,180\n");
        match parse_register_csv(non_numeric.as_bytes()) {
            Err(RiskError::Parse { line, message }) => {
                assert_eq!(line, 2);
                assert!(message.contains("threat_likelihood"));
            }
            other => panic!("unexpected {other:?}"),
        }

        let mut bytes = HEADER.as_bytes().to_vec();
        bytes.extend_from_slice(b"1,\xff\xfe,PureInformation,CIO,5,Theft,6,Weak,6,180\n");
        assert!(matches!(parse_register_csv(&bytes), Err(RiskError::Parse { .. })));
    }

    #[test]
    fn commas_in_names_are_quoted() {
        let csv = format!(
            "{HEADER}45,Staff,HumanResource,COO,2,Accidents,6,\"Tendency to take risks, being fearless\",7,84\n"
        );
        let (reg, _) = parse_register_csv(csv.as_bytes()).unwrap();
        let out = emit_register_csv(&reg);
        assert!(String::from_utf8_lossy(&out).contains("\"Tendency to take risks, being fearless\""));
        let (again, _) = parse_register_csv(&out).unwrap();
        assert_eq!(again, reg);
    }

    #[test]
    fn layout_sidecar() {
        let layout = parse_layout(b"# riskreg-format: 1\nappetite = 150\nabove = [1]\nbelow = [2, 3]\n").unwrap();
        assert_eq!(layout.below, vec![2, 3]);
        assert!(parse_layout(b"# riskreg-format: 2\nappetite = 1\nabove = []\nbelow = []\n").is_err());
        assert!(parse_layout(b"appetite = 150\n").is_err());
        assert_eq!(
            layout_path_for(Path::new("/x/sca_register.csv")),
            PathBuf::from("/x/sca_register.layout.toml")
        );
    }
}
