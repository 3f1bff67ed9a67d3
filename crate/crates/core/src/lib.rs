//! Reference-free truthfulness scores for answers of a retrieval-augmented
//! help-desk chatbot.
//!
//! The guide in `book/` walks through each module.

pub mod classify;
pub mod corpus;
pub mod eval;
pub mod features;
pub mod score;
pub mod synthetic;
pub mod textprep;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/intro.md")]
    mod intro {}
    #[doc = include_str!("../../../book/src/corpus.md")]
    mod corpus {}
    #[doc = include_str!("../../../book/src/textprep.md")]
    mod textprep {}
    #[doc = include_str!("../../../book/src/classify.md")]
    mod classify {}
    #[doc = include_str!("../../../book/src/features.md")]
    mod features {}
    #[doc = include_str!("../../../book/src/score.md")]
    mod score {}
    #[doc = include_str!("../../../book/src/eval.md")]
    mod eval {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
