//! File formats: register CSV, layout sidecar, control catalog, text
//! reports, and SVG heat maps.
//!
//! Formats that allow comments carry a `riskreg-format: 1` marker.

mod catalog;
mod register_csv;
mod report;
mod svg;

pub use catalog::parse_catalog;
pub use register_csv::{emit_register_csv, layout_path_for, parse_layout, parse_register_csv, REGISTER_HEADER};
pub use report::{render_heatmap_ascii, render_report, ReportFormat, ReportOptions};
pub use svg::render_heatmap_svg;

pub const FORMAT_VERSION: u32 = 1;
pub(crate) const FORMAT_MARKER: &str = "riskreg-format:";

/// Reads an optional `# riskreg-format: N` line and rejects other versions.
pub(crate) fn check_format_marker(text: &str) -> crate::Result<()> {
    for (idx, line) in text.lines().enumerate() {
        let Some(rest) = line.trim_start().strip_prefix('#') else {
            continue;
        };
        if let Some(version) = rest.trim().strip_prefix(FORMAT_MARKER) {
            let version = version.trim();
            if version != FORMAT_VERSION.to_string() {
                return Err(crate::RiskError::Parse {
                    line: idx as u64 + 1,
                    message: format!("unsupported format version `{version}`, expected {FORMAT_VERSION}"),
                });
            }
        }
    }
    Ok(())
}

/// Maps a TOML error to a line-numbered parse error.
pub(crate) fn toml_error(text: &str, err: toml::de::Error) -> crate::RiskError {
    let line = err
        .span()
        .map(|span| text[..span.start.min(text.len())].matches('\n').count() as u64 + 1)
        .unwrap_or(0);
    crate::RiskError::Parse {
        line,
        message: err.message().trim().to_string(),
    }
}
