//! Free generating sets in `SL2(Z)` and the girth of their Cayley graphs
//! over `SL2(F_p)`.

pub mod error;
pub mod exact2;
pub mod forge;
pub mod girth;
pub mod harness;
pub mod labeled;
pub mod lattice;

pub use error::{Error, Result};
pub use exact2::{eval_word, ExactMatrix, FreeWord, Letter, ModMatrix, Prime};
pub use forge::{build_genset, enum_omega, verify_genset, GeneratorSet, OmegaSet};
pub use girth::{CayleySpec, GirthResult};
pub use harness::{GensetSource, SurveyCell};
pub use labeled::{GraphPath, LabeledGraph};
pub use lattice::CountMode;
