use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::appetite::{
    build_heatmap_with, partition_register, treatment_for_band, Appetite, BandThresholds, Fraction, HeatMap,
    SeverityBand,
};
use crate::model::{RiskEntry, RiskRegister};

use super::{FORMAT_MARKER, FORMAT_VERSION};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum ReportFormat {
    #[default]
    Markdown,
    PlainText,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportOptions {
    pub format: ReportFormat,
    pub include_heatmap: bool,
    pub include_treatments: bool,
    pub bands: BandThresholds,
}

impl Default for ReportOptions {
    fn default() -> Self {
        ReportOptions {
            format: ReportFormat::Markdown,
            include_heatmap: false,
            include_treatments: true,
            bands: BandThresholds::default(),
        }
    }
}

fn scaled(fraction: Fraction, appetite: u32) -> String {
    let num = u64::from(fraction.num) * u64::from(appetite);
    let den = u64::from(fraction.den);
    if num % den == 0 {
        (num / den).to_string()
    } else {
        format!("{:.2}", num as f64 / den as f64)
    }
}

/// Headline summary, e.g. `appetite = 150; 25 above / 20 below`.
pub(crate) fn headline(appetite: u32, above: usize, below: usize) -> String {
    format!("appetite = {appetite}; {above} above / {below} below")
}

/// Renders the assessment report: appetite and its anchors, the above/below
/// tables with band and treatment per entry, and optionally the heat map.
/// Output depends only on the inputs.
pub fn render_report(register: &RiskRegister, appetite: &Appetite, options: &ReportOptions) -> String {
    let (above, below) = partition_register(register, appetite.value);
    let bands = &options.bands;
    let md = options.format == ReportFormat::Markdown;
    let mut out = String::new();

    if md {
        let _ = writeln!(out, "<!-- {FORMAT_MARKER} {FORMAT_VERSION} -->");
        out.push_str("# Risk assessment report\n\n");
    } else {
        let _ = writeln!(out, "# {FORMAT_MARKER} {FORMAT_VERSION}");
        out.push_str("RISK ASSESSMENT REPORT\n\n");
    }
    let _ = writeln!(out, "{}\n", headline(appetite.value, above.len(), below.len()));

    let bullet = if md { "- " } else { "  " };
    match appetite.anchors {
        Some((low, high)) => {
            let _ = writeln!(
                out,
                "{bullet}Appetite: {} (midpoint of anchors {low} -> {} and {high} -> {})",
                appetite.value,
                low.risk().unwrap_or(0),
                high.risk().unwrap_or(0)
            );
        }
        None => {
            let _ = writeln!(out, "{bullet}Appetite: {} (set explicitly)", appetite.value);
        }
    }
    let _ = writeln!(
        out,
        "{bullet}Bands: RED > {}, YELLOW > {}, GREEN > {}, MONITOR otherwise",
        scaled(bands.red, appetite.value),
        scaled(bands.yellow, appetite.value),
        scaled(bands.green, appetite.value)
    );
    let _ = writeln!(
        out,
        "{bullet}Entries: {} ({} entries above appetite, {} at or below)",
        register.len(),
        above.len(),
        below.len()
    );
    let mut counts = [0usize; 4];
    for e in &register.entries {
        counts[bands.band(e.risk, appetite.value) as usize] += 1;
    }
    let summary: Vec<String> = SeverityBand::ALL
        .iter()
        .map(|b| format!("{b} {}", counts[*b as usize]))
        .collect();
    let _ = writeln!(out, "{bullet}Band counts: {}", summary.join(", "));
    out.push('\n');

    let sections = [
        (format!("Above risk appetite ({} entries)", above.len()), &above),
        (format!("At or below risk appetite ({} entries)", below.len()), &below),
    ];
    for (i, (title, entries)) in sections.iter().enumerate() {
        if md {
            let _ = writeln!(out, "## {title}\n");
        } else {
            let _ = writeln!(out, "{title}\n{}\n", "-".repeat(title.len()));
        }
        let table = entry_table(entries, appetite.value, options);
        out.push_str(&if md {
            markdown_table(&table)
        } else {
            plain_table(&table)
        });
        out.push('\n');
        if i == 0 {
            let line = format!("RISK APPETITE LINE: {}", appetite.value);
            if md {
                let _ = writeln!(out, "**{line}**\n");
            } else {
                let _ = writeln!(out, "{}\n{line}\n{}\n", "=".repeat(line.len()), "=".repeat(line.len()));
            }
        }
    }

    if options.include_heatmap {
        let map = build_heatmap_with(register, appetite.value, bands);
        if md {
            let _ = writeln!(out, "## Heat map\n\n```text\n{}```", render_heatmap_ascii(&map));
        } else {
            let _ = writeln!(out, "Heat map\n--------\n\n{}", render_heatmap_ascii(&map));
        }
    }
    out
}

struct Table {
    header: Vec<&'static str>,
    numeric: Vec<bool>,
    rows: Vec<Vec<String>>,
}

fn entry_table(entries: &[RiskEntry], appetite: u32, options: &ReportOptions) -> Table {
    let mut header = vec![
        "ID",
        "Asset",
        "Owner",
        "A",
        "Threat",
        "T",
        "Vulnerability",
        "V",
        "Risk",
        "Band",
    ];
    let mut numeric = vec![true, false, false, true, false, true, false, true, true, false];
    if options.include_treatments {
        header.push("Treatment");
        numeric.push(false);
    }
    let rows = entries
        .iter()
        .map(|e| {
            let band = options.bands.band(e.risk, appetite);
            let mut row = vec![
                e.id.to_string(),
                e.asset.name.clone(),
                e.asset.owner.to_string(),
                e.asset.value.to_string(),
                e.threat.name.clone(),
                e.threat.likelihood.to_string(),
                e.vulnerability.name.clone(),
                e.vulnerability.likelihood.to_string(),
                e.risk.to_string(),
                band.to_string(),
            ];
            if options.include_treatments {
                row.push(treatment_for_band(band).to_string());
            }
            row
        })
        .collect();
    Table { header, numeric, rows }
}

fn markdown_table(table: &Table) -> String {
    let escape = |s: &str| s.replace('|', "\\|").replace('\n', " ");
    let mut out = String::new();
    let _ = writeln!(out, "| {} |", table.header.join(" | "));
    let align: Vec<&str> = table.numeric.iter().map(|&n| if n { "---:" } else { "---" }).collect();
    let _ = writeln!(out, "|{}|", align.join("|"));
    for row in &table.rows {
        let cells: Vec<String> = row.iter().map(|c| escape(c)).collect();
        let _ = writeln!(out, "| {} |", cells.join(" | "));
    }
    if table.rows.is_empty() {
        out.push_str("\n_No entries._\n");
    }
    out
}

fn plain_table(table: &Table) -> String {
    let flat = |s: &str| s.replace('\n', " ");
    let mut widths: Vec<usize> = table.header.iter().map(|h| h.chars().count()).collect();
    for row in &table.rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(flat(cell).chars().count());
        }
    }
    let fmt_row = |cells: &[String]| -> String {
        let parts: Vec<String> = cells
            .iter()
            .zip(&widths)
            .zip(&table.numeric)
            .map(|((c, &w), &num)| {
                let c = flat(c);
                if num {
                    format!("{c:>w$}")
                } else {
                    format!("{c:<w$}")
                }
            })
            .collect();
        parts.join("  ").trim_end().to_string()
    };
    let mut out = String::new();
    let header: Vec<String> = table.header.iter().map(|h| h.to_string()).collect();
    let _ = writeln!(out, "{}", fmt_row(&header));
    let rule: Vec<String> = widths.iter().map(|&w| "-".repeat(w)).collect();
    let _ = writeln!(out, "{}", rule.join("  "));
    for row in &table.rows {
        let _ = writeln!(out, "{}", fmt_row(row));
    }
    if table.rows.is_empty() {
        out.push_str("(no entries)\n");
    }
    out
}

/// Text heat map: asset value 5 (top) to 1, combined-likelihood columns 1-10.
/// Each cell is one band letter (R, Y, G, M), upper case when the cell holds
/// entries and lower case when empty.
pub fn render_heatmap_ascii(map: &HeatMap) -> String {
    let mut out = String::new();
    out.push_str("A\\TV");
    for c in 1..=map.rows.first().map_or(0, Vec::len) {
        let _ = write!(out, "{c:>3}");
    }
    out.push('\n');
    for row in map.rows.iter().rev() {
        let value = row.first().map_or(0, |c| c.asset_value);
        let _ = write!(out, "{value:>4}");
        for cell in row {
            let symbol = cell.band.symbol();
            let symbol = if cell.entries.is_empty() {
                symbol.to_ascii_lowercase()
            } else {
                symbol
            };
            let _ = write!(out, "{symbol:>3}");
        }
        out.push('\n');
    }
    let _ = writeln!(
        out,
        "appetite {}; R=RED Y=YELLOW G=GREEN M=MONITOR; upper case = occupied; {} entries",
        map.appetite,
        map.entry_count()
    );
    out
}
