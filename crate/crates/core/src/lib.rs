//! Online 3D multi-object tracking on 4D radar data: a point-object
//! GNN-PMB tracker, a GGIW-PMBM extended-object tracker, the three pipelines
//! that connect them to detections and point clouds, a synthetic scenario
//! simulator, and CLEAR/HOTA evaluation.

// `!(x > 0.0)` is how validation rejects NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod assignment;
pub mod config;
pub mod eot;
pub mod error;
pub mod format;
pub mod geometry;
pub mod kinematics;
pub mod linalg;
pub mod metrics;
pub mod partitioning;
pub mod per_class;
pub mod pipelines;
pub mod pot;
pub mod scenario;
pub mod types;
