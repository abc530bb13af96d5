//! Remote renewable energy hub toolkit: a typed hub model with derived
//! commodity sets and validation, a text format with diagnostics, structural
//! diffs, exports, and linear sizing of hub capacities.

pub mod diff;
pub mod dsl;
pub mod model;
pub mod optimize;
pub mod par;
pub mod synth;
