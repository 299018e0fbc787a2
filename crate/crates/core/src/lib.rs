//! Frame-semantic similarity over a FrameNet-style frame graph.
//!
//! The pipeline: load a frame database ([`fn_graph`]), spread activation
//! from evoked frames to build per-frame relatedness tables
//! ([`activation`]), expand annotations into associative arrays and compare
//! them by cosine ([`similarity`]), disambiguate caption text into evoked
//! frames ([`daisy`]), pair corpus records by image ([`corpus`]), and test
//! differences for significance ([`stats`]).

pub mod activation;
pub mod corpus;
pub mod daisy;
pub mod fn_graph;
pub mod similarity;
pub mod stats;
