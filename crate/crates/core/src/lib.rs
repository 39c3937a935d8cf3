pub mod cg;
pub mod lpcore;
pub mod mixtures;
pub mod model;
pub mod numeric;
pub mod oracles;
pub mod polyalg;
pub mod shape;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/piecewise.md")]
    mod piecewise {}
    #[doc = include_str!("../../../book/src/column-generation.md")]
    mod column_generation {}
    #[doc = include_str!("../../../book/src/mixtures.md")]
    mod mixtures {}
    #[doc = include_str!("../../../book/src/shape.md")]
    mod shape {}
    #[doc = include_str!("../../../book/src/options.md")]
    mod options {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
