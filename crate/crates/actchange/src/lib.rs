//! Change operations on action theories in multimodal K.
//!
//! An action theory is a set of static laws (`phi`), effect laws
//! (`phi -> [a] psi`) and executability laws (`phi -> <a> true`). Models are
//! Kripke structures whose worlds are distinct propositional valuations.
//!
//! The crate provides:
//!
//! * [`syntax`]: formula and law ASTs, the theory DSL and rendering;
//! * [`boolean`]: valuations, prime implicants, essential atoms and prime
//!   subvaluations;
//! * [`kripke`]: models, truth checking, the big model and closeness orders;
//! * [`entail`]: law entailment, modularity and an exhaustive oracle;
//! * [`contract_sem`] and [`contract_syn`]: semantic and syntactic contraction;
//! * [`revise`]: semantic revision;
//! * [`postulates`]: checks of the rationality postulates for contraction.

pub mod boolean;
pub mod contract_sem;
pub mod contract_syn;
pub mod entail;
pub mod error;
pub mod kripke;
pub mod postulates;
pub mod revise;
pub mod syntax;

pub use error::{Error, ParseError, Result};
