//! Twin-language semantics for fault-tolerant distributed protocols.
//!
//! Protocols are written once as choreographies ([`hll`]) with a set-valued
//! denotational semantics ([`denote`]), and compiled by endpoint projection into
//! per-node monadic programs ([`lll`]) that run against single-use adversarial
//! channels ([`channel`]) inside a composed transition system ([`global`]).
//! The explorer in [`global`] checks that every operational outcome is contained
//! in the denotation; [`protocols`] carries the built-in consensus protocols and
//! their safety checks.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod channel;
pub mod denote;
pub mod global;
pub mod hll;
pub mod lll;
pub mod protocols;
pub mod values;
