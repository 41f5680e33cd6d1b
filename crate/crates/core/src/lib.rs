//! Meta-optimization for language-conditioned task and motion planning.
//!
//! Three nested levels: a proposer emits plan templates ([`dsl`]), a
//! black-box optimizer tunes their continuous parameters ([`bbo`]), and an
//! Augmented Lagrangian solver turns each instantiated program into a
//! trajectory ([`trajopt`]) that is rolled out and scored by a domain
//! ([`draw`], [`push`]). [`orchestrator`] ties the loop together.

pub mod bbo;
pub mod draw;
pub mod dsl;
pub mod nlp;
pub mod orchestrator;
pub mod proposer;
pub mod push;
pub mod scene;
pub mod task;
pub mod trajopt;
