//! Configuration, orchestration and artifact emission for harmonic map heat
//! flow scenarios.

pub mod config;
pub mod encode;
pub mod maps;
pub mod oracle;
pub mod run;
pub mod verify;
