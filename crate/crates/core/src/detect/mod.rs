//! Rule-based detectors for the three hierarchy levels.

mod hl1;
mod inverter;
mod mirror;
mod oracle;
mod pair;
mod stages;

pub use hl1::{capacitor_role, detect_capacitor_roles, detect_diode_connected, CapRole};
pub use inverter::detect_inverters;
pub use mirror::detect_current_mirrors;
pub use oracle::{brute_force_cm_oracle, OracleError, ORACLE_LIMIT};
pub use pair::detect_diff_pairs;
pub use stages::detect_hl3;

use crate::annotation::{AnnotationSet, Level};
use crate::netlist::Netlist;
use crate::roles::NetRoles;

pub fn detect_hl1(netlist: &Netlist, roles: &NetRoles) -> AnnotationSet {
    let mut set = AnnotationSet::new();
    set.extend(detect_diode_connected(netlist));
    set.extend(detect_capacitor_roles(netlist, roles));
    set
}

/// Mirrors, pairs and inverters; overlap between labels is kept.
pub fn detect_hl2(netlist: &Netlist, roles: &NetRoles) -> AnnotationSet {
    let mut set = AnnotationSet::new();
    set.extend(detect_current_mirrors(netlist));
    set.extend(detect_diff_pairs(netlist, roles));
    set.extend(detect_inverters(netlist, roles));
    set
}

/// Runs the detectors for `levels`. HL3 needs HL2, which is computed
/// internally whether or not it is requested.
pub fn detect(netlist: &Netlist, roles: &NetRoles, levels: &[Level]) -> AnnotationSet {
    let mut set = AnnotationSet::new();
    if levels.contains(&Level::HL1) {
        set.union(&detect_hl1(netlist, roles));
    }
    if levels.contains(&Level::HL2) || levels.contains(&Level::HL3) {
        let hl2 = detect_hl2(netlist, roles);
        if levels.contains(&Level::HL3) {
            set.union(&detect_hl3(netlist, roles, &hl2));
        }
        if levels.contains(&Level::HL2) {
            set.union(&hl2);
        }
    }
    set
}
