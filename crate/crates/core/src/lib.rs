pub mod analyzer;
pub mod atoms;
pub mod cardinal;
pub mod cli;
pub mod counting;
pub mod element;
pub mod fixpoint;
pub mod fscore;
pub mod fsfun;
pub mod oracle;
pub mod text;
