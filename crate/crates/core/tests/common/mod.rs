#![allow(dead_code)]

pub mod corpus;
pub mod gen;
pub mod inference;
pub mod oracle;
pub mod rules;
