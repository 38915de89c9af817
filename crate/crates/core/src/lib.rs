pub mod blowup;
pub mod error;
pub mod fft;
pub mod field;
pub mod grid;
pub mod initial;
pub mod io;
pub mod lp;
pub mod mild;
pub mod profile;
pub mod quadrature;
pub mod spectral;
pub mod trajectory;

pub use error::{Error, Result};
pub use field::{FieldKind, SpectralField};
pub use grid::{Grid, GridSpec};
pub use trajectory::Trajectory;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/fields.md")]
    mod fields {}
    #[doc = include_str!("../../../book/src/littlewood_paley.md")]
    mod littlewood_paley {}
    #[doc = include_str!("../../../book/src/mild_solutions.md")]
    mod mild_solutions {}
    #[doc = include_str!("../../../book/src/blowup.md")]
    mod blowup {}
    #[doc = include_str!("../../../book/src/profiles.md")]
    mod profiles {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
