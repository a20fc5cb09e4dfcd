//! Covariant estimation for group-parameterized quantum states.
//!
//! Isotypic decomposition of unitary representations, closed-form optimal
//! maximum-likelihood quantities, a numerical SDP oracle, and the
//! continuous-variable displacement scenarios.

pub mod cli;
pub mod cvdisplace;
pub mod error;
pub mod estimation;
pub mod grouprep;
pub mod isotypic;
pub mod json;
pub mod linalg;
pub mod oracle;
pub mod quadrature;

pub use error::{Error, Result};

/// Maps `f` over `items`, in parallel when the `parallel` feature is on.
pub(crate) fn par_map<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}
