//! Completes partial behavioral models ("sketches" with integer holes)
//! against assertion and LTL properties. All hole completions are encoded as
//! a model family over numerical features; an abstraction-refinement loop
//! classifies sub-families as correct or incorrect using an embedded
//! explicit-state model checker.

pub mod featexp;

pub use featexp::{Config, ConfigSpace, FeatExp, FeatureDecl};
