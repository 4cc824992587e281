//! Bundled data: the SCA case-study register with its printed layout, and
//! the seed control catalog.

use crate::controls::Control;
use crate::io::{parse_catalog, parse_layout, parse_register_csv};
use crate::model::RiskRegister;
use crate::scoring::{PresentedLayout, ValidationReport};

/// The 45-row SCA register, in printed order.
pub const SCA_REGISTER_CSV: &str = include_str!("../data/sca_register.csv");

/// Printed above/below placement of [`SCA_REGISTER_CSV`].
pub const SCA_LAYOUT: &str = include_str!("../data/sca_register.layout.toml");

/// Seed control catalog. Effect magnitudes are illustrative.
pub const SEED_CATALOG: &str = include_str!("../data/seed_catalog.toml");

pub fn sca_register() -> (RiskRegister, ValidationReport) {
    parse_register_csv(SCA_REGISTER_CSV.as_bytes()).expect("bundled register parses")
}

pub fn sca_layout() -> PresentedLayout {
    parse_layout(SCA_LAYOUT.as_bytes()).expect("bundled layout parses")
}

pub fn seed_catalog() -> Vec<Control> {
    parse_catalog(SEED_CATALOG.as_bytes()).expect("bundled catalog parses")
}
