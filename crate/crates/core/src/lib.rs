//! Qualitative information-security risk register engine.
//!
//! Assets carry a value A (1-5), threats and vulnerabilities a likelihood
//! T and V (1-10), and each register entry scores `A * T * V`. On top of the
//! scored register this crate derives the risk appetite, partitions and
//! bands entries, builds heat maps, and runs control what-if analysis for
//! residual risk.

pub mod appetite;
pub mod controls;
mod error;
pub mod golden;
pub mod io;
pub mod model;
pub mod scoring;

pub use appetite::{
    appetite_midpoint, build_heatmap, build_heatmap_with, heatmap_column, parse_anchor_pair, partition_register,
    severity_band, treatment_for_band, Appetite, AppetiteAnchor, BandThresholds, Fraction, HeatCell, HeatMap,
    SeverityBand, TreatmentAction, DEFAULT_ANCHORS,
};
pub use controls::{
    apply_control, apply_plan, apply_plan_with, compensating_substitute, defense_in_depth_check, recommend_controls,
    validate_catalog, Control, ControlCategory, ControlEffect, ControlFunction, ControlPlan, DefenseReport, EntryDelta,
    WhatIfSnapshot,
};
pub use error::{Result, RiskError};
pub use model::{
    asset_value_from_impacts, likelihood_from_frequency, Asset, AssetCategory, ImpactAssessment, Likelihood, OwnerRole,
    RiskEntry, RiskRegister, Threat, Vulnerability, DEFAULT_APPETITE,
};
pub use scoring::{
    check_layout, compute_risk, score_register, validate_register, Finding, FindingCode, PresentedLayout,
    ValidationReport,
};
