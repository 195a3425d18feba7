//! Joint product selection and inventory optimization for capacity-limited
//! front-end warehouses: exact single-day solver, learned selection models,
//! and an end-to-end planning pipeline.

pub mod core;
pub mod features;
pub mod labeling;
pub mod mlcore;
pub mod datagen;
pub mod om1;
pub mod om2;
pub mod pipeline;
pub mod predict;
pub mod testgen;
