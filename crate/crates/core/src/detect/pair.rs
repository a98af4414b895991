use alloc::vec::Vec;

use crate::annotation::{Label, SubcircuitInstance};
use crate::netlist::{Device, Netlist};
use crate::roles::NetRoles;

/// The single same-channel device stacked on `d`'s drain, if exactly one.
fn cascode_of<'a>(devs: &[&'a Device], d: &Device, pair: [&Device; 2]) -> Option<&'a Device> {
    let mut it = devs
        .iter()
        .filter(|c| !pair.iter().any(|p| core::ptr::eq(*p, **c)))
        .filter(|c| c.channel() == d.channel() && c.source() == d.drain());
    let first = it.next()?;
    if it.next().is_some() {
        return None;
    }
    Some(*first)
}

/// Same-channel pairs sharing source and bulk with gates on two different
/// input nets. Cascode devices stacked on both drains and biased from one
/// bias net are included.
pub fn detect_diff_pairs(netlist: &Netlist, roles: &NetRoles) -> Vec<SubcircuitInstance> {
    let devs: Vec<&Device> = netlist.mosfets().collect();
    let mut out: Vec<SubcircuitInstance> = Vec::new();
    for (i, a) in devs.iter().enumerate() {
        for b in &devs[i + 1..] {
            if a.channel() != b.channel()
                || a.source() != b.source()
                || a.bulk() != b.bulk()
                || a.gate() == b.gate()
                || !roles.is_input(a.gate())
                || !roles.is_input(b.gate())
            {
                continue;
            }
            let mut members = alloc::vec![a.name.as_str(), b.name.as_str()];
            let pair = [*a, *b];
            if let (Some(ca), Some(cb)) = (cascode_of(&devs, a, pair), cascode_of(&devs, b, pair)) {
                if !core::ptr::eq(ca, cb) && ca.gate() == cb.gate() && roles.is_bias(ca.gate()) {
                    members.push(ca.name.as_str());
                    members.push(cb.name.as_str());
                }
            }
            let inst = SubcircuitInstance::new(Label::DiffPair, members);
            if !out.contains(&inst) {
                out.push(inst);
            }
        }
    }
    out
}
