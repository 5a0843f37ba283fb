//! Rotated bounding box toolkit.
//!
//! Geometry for oriented boxes under the OpenCV (`Oc`) and long-edge (`Le`)
//! angle conventions, rotated IoU by convex clipping, Gaussian box losses
//! (Wasserstein and KL), angle classification codecs (circular smooth label
//! and dense coded label), greedy rotated NMS, DOTA annotation and
//! submission I/O with image tiling, and VOC/DOTA-style mAP evaluation.
//!
//! All public angles are in degrees. Internally everything lives in a y-up
//! frame; the flip from image space (y-down) happens in [`dota_io`] only.

pub mod angle_codec;
pub mod autodiff;
pub mod cli;
pub mod dota_io;
pub mod error;
pub mod evaluation;
pub mod gaussian;
pub mod geometry;
pub mod postprocess;

pub use error::{Error, Result};
pub use geometry::{Convention, Point, Quad, RBox, Shape};
