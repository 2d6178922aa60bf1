//! Multilingual distributional semantics toolkit.
//!
//! This crate trains four distributional semantic models (ESA, LSA, Word2Vec,
//! GloVe) from plain-text corpora, computes word-pair relatedness either with
//! a language-specific model or by translating the pair into a reference
//! language first, and evaluates the results against the MC, RG and WS-353
//! gold standards with Spearman correlation.
//!
//! Modules map onto the pipeline stages:
//!
//! - [`corpus`]: streaming document readers, preprocessing, vocabularies.
//! - [`vecspace`]: dense/sparse embedding spaces, cosine similarity, persistence.
//! - [`training`]: the four model trainers and the co-occurrence counter.
//! - [`goldsets`]: word-pair benchmark loading and validation.
//! - [`translate`]: pluggable word-pair translation backends with a persistent cache.
//! - [`eval`]: Spearman correlation, the experiment grid, and derived reports.

pub mod corpus;
pub mod eval;
pub mod goldsets;
pub mod training;
pub mod translate;
pub mod vecspace;
