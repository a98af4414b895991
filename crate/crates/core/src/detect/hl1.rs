use alloc::vec::Vec;

use crate::annotation::{Label, SubcircuitInstance};
use crate::netlist::Netlist;
use crate::roles::NetRoles;

/// All diode-connected mosfets as one grouped instance.
pub fn detect_diode_connected(netlist: &Netlist) -> Vec<SubcircuitInstance> {
    let names: Vec<&str> = netlist
        .mosfets()
        .filter(|d| d.is_diode_connected())
        .map(|d| d.name.as_str())
        .collect();
    if names.is_empty() {
        return Vec::new();
    }
    alloc::vec![SubcircuitInstance::new(Label::MosfetDiode, names)]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CapRole {
    Load,
    Compensation,
}

pub fn capacitor_role(pos: &str, neg: &str, roles: &NetRoles) -> Option<CapRole> {
    let out = |n: &str| roles.is_output(n);
    let rail = |n: &str| roles.is_rail(n);
    let internal = |n: &str| roles.is_internal(n);
    if (out(pos) && rail(neg)) || (out(neg) && rail(pos)) {
        Some(CapRole::Load)
    } else if (out(pos) && internal(neg)) || (out(neg) && internal(pos)) || (internal(pos) && internal(neg)) {
        Some(CapRole::Compensation)
    } else {
        None
    }
}

/// `load_cap` and `compensation_cap`, each as at most one grouped instance.
pub fn detect_capacitor_roles(netlist: &Netlist, roles: &NetRoles) -> Vec<SubcircuitInstance> {
    let mut load = Vec::new();
    let mut comp = Vec::new();
    for cap in netlist.capacitors() {
        let mut t = cap.terminals();
        let (_, pos) = t.next().unwrap();
        let (_, neg) = t.next().unwrap();
        match capacitor_role(pos, neg, roles) {
            Some(CapRole::Load) => load.push(cap.name.as_str()),
            Some(CapRole::Compensation) => comp.push(cap.name.as_str()),
            None => {}
        }
    }
    let mut out = Vec::new();
    if !load.is_empty() {
        out.push(SubcircuitInstance::new(Label::LoadCap, load));
    }
    if !comp.is_empty() {
        out.push(SubcircuitInstance::new(Label::CompensationCap, comp));
    }
    out
}
