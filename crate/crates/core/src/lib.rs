//! Endotracheal-tube tip and carina localisation from instance-segmentation
//! outputs, plus the evaluation metrics used to score it.
//!
//! The pipeline consumes per-image detections (scored masks for the tube end
//! and the tracheal bifurcation, scored boxes around the two feature points),
//! turns each source into a feature point, fuses them, and reports the
//! tip-to-carina distance.

pub mod annotation;
pub mod error;
pub mod extraction;
pub mod fixtures;
pub mod metrics;
pub mod raster;
pub mod render;

pub use error::{Error, Result};
