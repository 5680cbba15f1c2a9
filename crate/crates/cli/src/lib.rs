//! Program corpus, random generation and the property suites behind the
//! `slc` command.

pub mod gen;
pub mod corpus;
pub mod suites;
