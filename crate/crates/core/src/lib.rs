//! Synthetic reading-comprehension corpora from semi-structured tables.
//!
//! Tables are typed and filtered ([`table`]), turned into question/context/
//! answer triplets by sixteen example generators ([`eg`], [`context`]) and
//! serialized by the [`pipeline`]. The [`sampler`] decides how training
//! batches mix those tasks and [`sim`] exercises it against simulated
//! learners.

pub mod context;
pub mod eg;
pub mod par;
pub mod pipeline;
pub mod sampler;
pub mod sim;
pub mod table;
