//! Functional object-oriented networks (FOON) for video understanding.
//!
//! Annotated videos are stored as subgraphs of functional units (input
//! objects, a motion, output objects) and merged into a universal network.
//! Perception traces of new videos are turned into objects-in-action, which
//! are probed against the network to rank the functional unit of every
//! action segment. The ranked units feed a leave-one-out evaluation harness
//! and a recipe classifier.
//!
//! ```
//! use foon_core::{format, tracegen, recognition, taxonomy::MotionTaxonomy, config::PipelineConfig};
//! use foon_core::foon::{merge, RecipeClass};
//!
//! let corpus = tracegen::synthetic_corpus(&[RecipeClass::Omelette], 3, 7).unwrap();
//! let foon = merge(&corpus);
//! let tax = MotionTaxonomy::default();
//! let trace = tracegen::gen_trace(&corpus[0], &tracegen::Layout::default(),
//!                                 &tracegen::NoiseParams::noiseless(1), &tax);
//! let cfg = PipelineConfig::default();
//! let weights = cfg.scoring.resolve(trace.frame_width, trace.frame_height);
//! let ranked = recognition::recognize(&foon, &trace.segments[0], &weights, &cfg.fusion, &tax).unwrap();
//! assert_eq!(ranked[0].key, corpus[0].units[0].key());
//! # let _ = format::serialize_foon(&foon);
//! ```

pub mod config;
pub mod error;
pub mod evaluation;
pub mod foon;
pub mod format;
pub mod objects;
pub mod recognition;
pub mod task;
pub mod taxonomy;
pub mod trace;
pub mod tracegen;

pub use error::{Error, Result};
