//! Structural recognition of analog subcircuits in flat SPICE netlists.
//!
//! This crate is `no_std` (with `alloc`) and holds everything that does not
//! touch a filesystem, a process or a socket: parsing, net roles,
//! anonymization, the rule-based detectors, metrics, corpus normalization and
//! the provider-agnostic generation pipeline. The `subckt` crate supplies the
//! IO around it.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod anonymize;
pub mod annotation;
pub mod benchmark;
pub mod demos;
pub mod detect;
pub mod metrics;
pub mod netlist;
pub mod pipeline;
pub mod roles;

pub use anonymize::{anonymize, default_reserved, RenameMap};
pub use annotation::{AnnotationSet, Label, Level, SubcircuitInstance};
pub use netlist::{Channel, Device, DeviceKind, Netlist, NetlistError, Role};
pub use roles::{NetRoles, RoleOverrides, RolesError};
