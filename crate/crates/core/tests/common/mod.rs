//! Test oracles shared by the integration tests.
#![allow(dead_code)]

pub mod db;
pub mod gen;
pub mod laws;
pub mod com;
pub mod fol;
pub mod golden;
