//! Two-phase Tsetlin Machine autoencoder.
//!
//! Phase 1 trains one single-output Coalesced Tsetlin Machine per vocabulary
//! word on supporting and non-supporting documents and stores the resulting
//! clauses as that word's knowledge. Phase 2 builds inputs by expanding stored
//! clauses two levels deep and trains a multi-output machine whose clause
//! weights give each target word an embedding over the literal space.
//!
//! ```
//! use tmae::corpus::{build_vocabulary, vectorize};
//! use tmae::phase1::{build_x_from_documents, word_rng};
//!
//! let raw = vec![vec!["road", "driver"], vec!["car", "road"]];
//! let vocab = build_vocabulary(&raw, 10).unwrap();
//! let docs = vectorize(&raw, &vocab);
//! let road = vocab.index_of("road").unwrap();
//! let ex = build_x_from_documents(&docs, road, true, 25, &mut word_rng(0, road)).unwrap();
//! assert!(ex.x.is_negation_closed());
//! assert_eq!(ex.documents.len(), 2);
//! ```

pub mod augment;
pub mod corpus;
pub mod cotm;
pub mod embedding;
pub mod error;
pub mod eval;
pub mod knowledge;
pub mod phase1;
pub mod phase2;
pub mod synthetic;

pub use error::{Error, Result};
