//! Pointer-machine simulator with step-exact metering, and real-time
//! recognizers for the block-equality language on both machine models.

pub mod cli;
pub mod differential;
pub mod engine;
pub mod gadgets;
pub mod kum;
pub mod lang;
pub mod runtime;
pub mod smm;
