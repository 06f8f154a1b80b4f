//! Toolkit for sentence-level Uniform Meaning Representation graphs.

pub mod amr2umr;
pub mod conllu;
pub mod corpus;
pub mod graph;
pub mod metrics;
pub mod repair;
pub mod ud2umr;
