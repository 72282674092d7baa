pub mod chemgraph;
pub mod construct;
pub mod corpus;
pub mod depictgen;
pub mod detect;
pub mod evalbench;
pub mod labelparse;
pub mod mcs;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    pub mod introduction {}
    #[doc = include_str!("../../../book/src/molecules.md")]
    pub mod molecules {}
    #[doc = include_str!("../../../book/src/depictions.md")]
    pub mod depictions {}
    #[doc = include_str!("../../../book/src/detections.md")]
    pub mod detections {}
    #[doc = include_str!("../../../book/src/labels.md")]
    pub mod labels {}
    #[doc = include_str!("../../../book/src/construction.md")]
    pub mod construction {}
    #[doc = include_str!("../../../book/src/scoring.md")]
    pub mod scoring {}
    #[doc = include_str!("../../../book/src/cli.md")]
    pub mod cli {}
    #[doc = include_str!("../../../book/src/service.md")]
    pub mod service {}
}
