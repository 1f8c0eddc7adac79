//! Multi-person pose estimation and tracking from joint heatmaps, part
//! affinity fields and temporal affinity fields.
//!
//! Ground-truth fields are synthesized from annotations ([`synth`]), joints
//! are recovered by peak extraction ([`peaks`]), grouped into skeletons with
//! spatio-temporal limb scores ([`assoc`]) and linked into tracklets
//! ([`tracker`]). [`simgen`] generates synthetic pedestrian scenes and
//! [`metrics`] scores the results.

pub mod assoc;
pub mod config;
mod error;
pub mod field;
pub mod geometry;
pub mod io;
pub mod metrics;
pub mod model;
pub mod peaks;
pub mod pipeline;
pub mod prediction;
pub mod simgen;
pub mod synth;
pub mod tracker;

pub use assoc::{AssembledPose, PlacedJoint};
pub use config::{AssocConfig, MaskPolicy, SynthConfig};
pub use error::{Error, Result};
pub use field::{FieldStack, Grid, ScalarField, VectorField};
pub use geometry::{BoundingBox, Point2};
pub use metrics::{EvalConfig, EvalReport};
pub use model::{
    default_topology, FrameAnnotation, JointKind, Keypoint, PoseAnnotation, SequenceAnnotation,
    SkeletonTopology, NUM_JOINTS,
};
pub use peaks::{Candidate, CandidateSet};
pub use pipeline::PipelineConfig;
pub use prediction::{PosePrediction, PredictedJoint};
pub use simgen::SceneConfig;
pub use tracker::{AffinityKind, AffinityNormalization, TrackerConfig, Tracklet};
