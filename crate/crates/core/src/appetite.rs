//! Risk appetite, register partitioning, severity bands with their
//! treatments, and the asset-value x likelihood heat map.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Result, RiskError};
use crate::model::{presentation_order, RiskEntry, RiskRegister, ASSET_VALUE_MAX, LIKELIHOOD_MAX};
use crate::scoring::compute_risk;

/// An (asset value, threat likelihood, vulnerability likelihood) triple
/// management points at when placing the appetite line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AppetiteAnchor {
    pub asset_value: u32,
    pub threat_likelihood: u32,
    pub vulnerability_likelihood: u32,
}

impl AppetiteAnchor {
    pub const fn new(asset_value: u32, threat_likelihood: u32, vulnerability_likelihood: u32) -> Self {
        AppetiteAnchor {
            asset_value,
            threat_likelihood,
            vulnerability_likelihood,
        }
    }

    pub fn risk(&self) -> Result<u32> {
        compute_risk(self.asset_value, self.threat_likelihood, self.vulnerability_likelihood)
    }
}

impl fmt::Display for AppetiteAnchor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({}, {}, {})",
            self.asset_value, self.threat_likelihood, self.vulnerability_likelihood
        )
    }
}

impl FromStr for AppetiteAnchor {
    type Err = RiskError;

    /// Parses `a,t,v`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        let [a, t, v] = parts.as_slice() else {
            return Err(RiskError::Domain(format!("anchor `{s}` must be `a,t,v`")));
        };
        let num = |x: &str| {
            x.parse::<u32>()
                .map_err(|_| RiskError::Domain(format!("anchor component `{x}` is not a non-negative integer")))
        };
        let anchor = AppetiteAnchor::new(num(a)?, num(t)?, num(v)?);
        anchor.risk()?;
        Ok(anchor)
    }
}

pub const DEFAULT_ANCHORS: (AppetiteAnchor, AppetiteAnchor) =
    (AppetiteAnchor::new(1, 10, 10), AppetiteAnchor::new(2, 10, 10));

/// Parses the `a,t,v:a,t,v` anchor-pair syntax.
pub fn parse_anchor_pair(s: &str) -> Result<(AppetiteAnchor, AppetiteAnchor)> {
    let (low, high) = s
        .split_once(':')
        .ok_or_else(|| RiskError::Domain(format!("anchor pair `{s}` must be `a,t,v:a,t,v`")))?;
    Ok((low.parse()?, high.parse()?))
}

/// Midpoint of the two anchors' risk products, rounded half up.
pub fn appetite_midpoint(low: &AppetiteAnchor, high: &AppetiteAnchor) -> Result<u32> {
    let sum = low.risk()? + high.risk()?;
    Ok(sum.div_ceil(2))
}

/// An appetite value together with the anchors it was derived from, if any.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Appetite {
    pub value: u32,
    pub anchors: Option<(AppetiteAnchor, AppetiteAnchor)>,
}

impl Appetite {
    pub fn from_anchors(low: AppetiteAnchor, high: AppetiteAnchor) -> Result<Self> {
        Ok(Appetite {
            value: appetite_midpoint(&low, &high)?,
            anchors: Some((low, high)),
        })
    }

    pub fn explicit(value: u32) -> Result<Self> {
        if value == 0 {
            return Err(RiskError::range("appetite", value, 1, u32::MAX));
        }
        Ok(Appetite { value, anchors: None })
    }
}

impl Default for Appetite {
    fn default() -> Self {
        let (low, high) = DEFAULT_ANCHORS;
        Appetite::from_anchors(low, high).expect("default anchors are in range")
    }
}

/// Splits a register into entries strictly above the appetite and entries
/// at or below it. Both halves keep (risk desc, id asc) order.
pub fn partition_register(register: &RiskRegister, appetite: u32) -> (Vec<RiskEntry>, Vec<RiskEntry>) {
    let (mut above, mut below): (Vec<_>, Vec<_>) = register.entries.iter().cloned().partition(|e| e.risk > appetite);
    above.sort_by(presentation_order);
    below.sort_by(presentation_order);
    (above, below)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum SeverityBand {
    Monitor,
    Green,
    Yellow,
    Red,
}

impl SeverityBand {
    /// Highest first.
    pub const ALL: [SeverityBand; 4] = [
        SeverityBand::Red,
        SeverityBand::Yellow,
        SeverityBand::Green,
        SeverityBand::Monitor,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SeverityBand::Red => "RED",
            SeverityBand::Yellow => "YELLOW",
            SeverityBand::Green => "GREEN",
            SeverityBand::Monitor => "MONITOR",
        }
    }

    pub fn symbol(self) -> char {
        match self {
            SeverityBand::Red => 'R',
            SeverityBand::Yellow => 'Y',
            SeverityBand::Green => 'G',
            SeverityBand::Monitor => 'M',
        }
    }

    /// Fill colour used for rendered heat maps.
    pub fn fill(self) -> &'static str {
        match self {
            SeverityBand::Red => "#d9534f",
            SeverityBand::Yellow => "#f0ad4e",
            SeverityBand::Green => "#5cb85c",
            SeverityBand::Monitor => "#d8d8d8",
        }
    }
}

impl fmt::Display for SeverityBand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TreatmentAction {
    AvoidEliminate,
    Mitigate,
    Transfer,
    AcceptMonitor,
}

impl TreatmentAction {
    pub fn as_str(self) -> &'static str {
        match self {
            TreatmentAction::AvoidEliminate => "avoid_eliminate",
            TreatmentAction::Mitigate => "mitigate",
            TreatmentAction::Transfer => "transfer",
            TreatmentAction::AcceptMonitor => "accept_monitor",
        }
    }

    pub fn describe(self) -> &'static str {
        match self {
            TreatmentAction::AvoidEliminate => "Avoid / eliminate",
            TreatmentAction::Mitigate => "Mitigate",
            TreatmentAction::Transfer => "Transfer (insure)",
            TreatmentAction::AcceptMonitor => "Accept and monitor",
        }
    }
}

impl fmt::Display for TreatmentAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

pub fn treatment_for_band(band: SeverityBand) -> TreatmentAction {
    match band {
        SeverityBand::Red => TreatmentAction::AvoidEliminate,
        SeverityBand::Yellow => TreatmentAction::Mitigate,
        SeverityBand::Green => TreatmentAction::Transfer,
        SeverityBand::Monitor => TreatmentAction::AcceptMonitor,
    }
}

/// Exact non-negative rational, `num / den`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Fraction {
    pub num: u32,
    pub den: u32,
}

impl Fraction {
    pub const fn new(num: u32, den: u32) -> Self {
        Fraction { num, den }
    }

    /// `risk > self * appetite`, in integer arithmetic.
    fn exceeded_by(self, risk: u32, appetite: u32) -> bool {
        u64::from(risk) * u64::from(self.den) > u64::from(appetite) * u64::from(self.num)
    }

    fn le(self, other: Fraction) -> bool {
        u64::from(self.num) * u64::from(other.den) <= u64::from(other.num) * u64::from(self.den)
    }
}

impl fmt::Display for Fraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

impl FromStr for Fraction {
    type Err = RiskError;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || RiskError::Domain(format!("`{s}` is not a fraction like `2/3`"));
        let (num, den) = match s.trim().split_once('/') {
            Some((n, d)) => (
                n.trim().parse().map_err(|_| bad())?,
                d.trim().parse().map_err(|_| bad())?,
            ),
            None => (s.trim().parse().map_err(|_| bad())?, 1),
        };
        if den == 0 {
            return Err(bad());
        }
        Ok(Fraction { num, den })
    }
}

/// Fractions of the appetite that separate the severity bands: a risk above
/// `red * appetite` is RED, above `yellow * appetite` YELLOW, above
/// `green * appetite` GREEN, and MONITOR otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BandThresholds {
    pub red: Fraction,
    pub yellow: Fraction,
    pub green: Fraction,
}

impl Default for BandThresholds {
    fn default() -> Self {
        BandThresholds {
            red: Fraction::new(1, 1),
            yellow: Fraction::new(2, 3),
            green: Fraction::new(1, 3),
        }
    }
}

impl BandThresholds {
    pub fn new(red: Fraction, yellow: Fraction, green: Fraction) -> Result<Self> {
        if !(green.le(yellow) && yellow.le(red)) {
            return Err(RiskError::Domain(format!(
                "band fractions must satisfy green <= yellow <= red, got {green}, {yellow}, {red}"
            )));
        }
        Ok(BandThresholds { red, yellow, green })
    }

    pub fn band(&self, risk: u32, appetite: u32) -> SeverityBand {
        if self.red.exceeded_by(risk, appetite) {
            SeverityBand::Red
        } else if self.yellow.exceeded_by(risk, appetite) {
            SeverityBand::Yellow
        } else if self.green.exceeded_by(risk, appetite) {
            SeverityBand::Green
        } else {
            SeverityBand::Monitor
        }
    }
}

impl fmt::Display for BandThresholds {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{}", self.red, self.yellow, self.green)
    }
}

impl FromStr for BandThresholds {
    type Err = RiskError;

    /// Parses `red,yellow,green`, e.g. `1,2/3,1/3`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').collect();
        let [r, y, g] = parts.as_slice() else {
            return Err(RiskError::Domain(format!(
                "band fractions `{s}` must be `red,yellow,green`"
            )));
        };
        BandThresholds::new(r.parse()?, y.parse()?, g.parse()?)
    }
}

/// Band of a risk score under the default thresholds (1, 2/3, 1/3).
pub fn severity_band(risk: u32, appetite: u32) -> SeverityBand {
    BandThresholds::default().band(risk, appetite)
}

pub const HEATMAP_ROWS: u32 = ASSET_VALUE_MAX;
pub const HEATMAP_COLUMNS: u32 = LIKELIHOOD_MAX;

/// Heat-map column for a threat/vulnerability likelihood pair: the decile of
/// the combined likelihood T x V, i.e. `ceil(T*V / 10)`.
pub fn heatmap_column(threat_likelihood: u32, vulnerability_likelihood: u32) -> u32 {
    (threat_likelihood * vulnerability_likelihood)
        .div_ceil(10)
        .clamp(1, HEATMAP_COLUMNS)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HeatCell {
    pub asset_value: u32,
    pub column: u32,
    /// `asset_value * column * 10`, the risk the cell stands for.
    pub nominal_risk: u32,
    pub band: SeverityBand,
    pub entries: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HeatMap {
    /// `rows[a - 1][c - 1]` is the cell for asset value `a`, column `c`.
    pub rows: Vec<Vec<HeatCell>>,
    pub appetite: u32,
}

impl HeatMap {
    pub fn cell(&self, asset_value: u32, column: u32) -> Option<&HeatCell> {
        self.rows
            .get(asset_value.checked_sub(1)? as usize)?
            .get(column.checked_sub(1)? as usize)
    }

    pub fn cells(&self) -> impl Iterator<Item = &HeatCell> {
        self.rows.iter().flatten()
    }

    pub fn entry_count(&self) -> usize {
        self.cells().map(|c| c.entries.len()).sum()
    }
}

pub fn build_heatmap(register: &RiskRegister, appetite: u32) -> HeatMap {
    build_heatmap_with(register, appetite, &BandThresholds::default())
}

/// Places each entry at (row = A, column = ceil(T*V/10)); a cell's band is
/// the band of its nominal risk.
pub fn build_heatmap_with(register: &RiskRegister, appetite: u32, thresholds: &BandThresholds) -> HeatMap {
    let mut rows: Vec<Vec<HeatCell>> = (1..=HEATMAP_ROWS)
        .map(|a| {
            (1..=HEATMAP_COLUMNS)
                .map(|c| {
                    let nominal_risk = a * c * 10;
                    HeatCell {
                        asset_value: a,
                        column: c,
                        nominal_risk,
                        band: thresholds.band(nominal_risk, appetite),
                        entries: Vec::new(),
                    }
                })
                .collect()
        })
        .collect();

    for entry in &register.entries {
        let (a, t, v) = entry.factors();
        let row = a.clamp(1, HEATMAP_ROWS) as usize - 1;
        let col = heatmap_column(t, v) as usize - 1;
        rows[row][col].entries.push(entry.id);
    }
    for cell in rows.iter_mut().flatten() {
        cell.entries.sort_unstable();
    }

    HeatMap { rows, appetite }
}
