//! Bilingual navigator over the ACM Computing Classification System.
//!
//! The crate maps the CCS tree into a keyword-bearing ontology, keeps a
//! French/English lexicon maintained by community proposals, classifies a
//! local pseudo-corpus of bibliographic records against the tree, and renders
//! meta-query URLs for remote digital libraries from the navigation focus.

pub mod bundled;
pub mod corpus;
pub mod engine;
pub mod error;
pub mod eval;
pub mod lexicon;
pub mod metaquery;
pub mod service;
pub mod taxonomy;
pub mod textproc;

pub use error::{Error, Result};
