//! Sampling primitives: reservoir sampling, Gumbel-max and lazy Gumbel
//! softmax sampling, and the one-dimensional sublinear-space stream state
//! built from them.

mod gumbel;
mod reservoir;
mod scalar_stream;

pub use gumbel::{
    binomial_inversion, conditional_gumbel_above, gumbel_draw, gumbel_max_sample,
    lazy_gumbel_sample, sample_conditional_gumbel_above, sample_gumbel, LazyGumbelSample,
};
pub use reservoir::Reservoir;
pub use scalar_stream::{ScalarEntry, ScalarStreamState};
