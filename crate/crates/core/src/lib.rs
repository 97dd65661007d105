pub mod dispatch;
pub mod gen;
pub mod harness;
pub mod num;
pub mod sem;
pub mod spectest;
pub mod syntax;
pub mod vcgen;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/language.md")]
    mod language {}
    #[doc = include_str!("../../../book/src/execution.md")]
    mod execution {}
    #[doc = include_str!("../../../book/src/spec-testing.md")]
    mod spec_testing {}
    #[doc = include_str!("../../../book/src/invariant-testing.md")]
    mod invariant_testing {}
    #[doc = include_str!("../../../book/src/verification.md")]
    mod verification {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
    #[doc = include_str!("../../../book/src/formats.md")]
    mod formats {}
}
