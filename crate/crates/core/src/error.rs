/// Errors raised by the register engine.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RiskError {
    #[error("{}", range_message(.field, *.value, *.min, *.max, *.entry))]
    Range {
        field: &'static str,
        value: u32,
        min: u32,
        max: u32,
        entry: Option<u32>,
    },

    #[error("{0}")]
    Domain(String),

    #[error("control {control} does not apply to entry {entry}")]
    NotApplicable { control: String, entry: u32 },

    #[error("unknown entry id {0}")]
    UnknownEntry(u32),

    #[error("unknown control id {0}")]
    UnknownControl(String),

    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("unknown {kind} `{value}`")]
    UnknownEnumValue { kind: &'static str, value: String },
}

fn range_message(field: &str, value: u32, min: u32, max: u32, entry: Option<u32>) -> String {
    let mut s = String::new();
    if let Some(id) = entry {
        s.push_str(&format!("entry {id}: "));
    }
    s.push_str(&format!("{field} = {value} is outside [{min}, {max}]"));
    s
}

impl RiskError {
    pub(crate) fn range(field: &'static str, value: u32, min: u32, max: u32) -> Self {
        RiskError::Range {
            field,
            value,
            min,
            max,
            entry: None,
        }
    }

    /// Attaches an entry id to a range error; other variants pass through.
    pub fn for_entry(self, id: u32) -> Self {
        match self {
            RiskError::Range {
                field, value, min, max, ..
            } => RiskError::Range {
                field,
                value,
                min,
                max,
                entry: Some(id),
            },
            other => other,
        }
    }

    /// Stable machine-readable code, used by the CLI and the HTTP error body.
    pub fn code(&self) -> &'static str {
        match self {
            RiskError::Range { .. } => "RangeError",
            RiskError::Domain(_) => "DomainError",
            RiskError::NotApplicable { .. } => "NotApplicable",
            RiskError::UnknownEntry(_) => "UnknownEntry",
            RiskError::UnknownControl(_) => "UnknownControl",
            RiskError::Parse { .. } => "ParseError",
            RiskError::UnknownEnumValue { .. } => "UnknownEnumValue",
        }
    }
}

pub type Result<T, E = RiskError> = std::result::Result<T, E>;

/// Checks `value` against an inclusive range.
pub(crate) fn check_range(field: &'static str, value: u32, min: u32, max: u32) -> Result<u32> {
    if (min..=max).contains(&value) {
        Ok(value)
    } else {
        Err(RiskError::range(field, value, min, max))
    }
}
