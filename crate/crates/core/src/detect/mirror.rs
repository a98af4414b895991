use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use crate::annotation::{merge_groups, Label, SubcircuitInstance};
use crate::netlist::{Channel, Device, Netlist};

/// Groups `items` by `key`, keeping groups in order of first appearance.
pub(crate) fn group_by<'a, K: PartialEq>(
    items: &[&'a Device],
    key: impl Fn(&Device) -> K,
) -> Vec<(K, Vec<&'a Device>)> {
    let mut groups: Vec<(K, Vec<&'a Device>)> = Vec::new();
    for d in items {
        let k = key(d);
        match groups.iter_mut().find(|(g, _)| *g == k) {
            Some((_, v)) => v.push(d),
            None => groups.push((k, alloc::vec![*d])),
        }
    }
    groups
}

fn names<'a>(devs: impl IntoIterator<Item = &'a Device>) -> BTreeSet<String> {
    devs.into_iter().map(|d| d.name.clone()).collect()
}

fn same<T: PartialEq>(mut it: impl Iterator<Item = T>) -> bool {
    match it.next() {
        Some(first) => it.all(|x| x == first),
        None => true,
    }
}

/// The cascode "mains" of a gate group: every same-channel non-member whose
/// source sits on a member's drain. `None` unless every member has one, the
/// mains share a single gate, and there are at least two of them.
fn cascode_mains<'a>(channel: &[&'a Device], group: &[&'a Device]) -> Option<Vec<&'a Device>> {
    if group.len() < 2 || !same(group.iter().map(|d| d.source())) || !same(group.iter().map(|d| d.bulk())) {
        return None;
    }
    let outside = |d: &Device| !group.iter().any(|g| core::ptr::eq(*g, d));
    let mut mains: Vec<&'a Device> = Vec::new();
    for member in group {
        let found: Vec<&'a Device> = channel
            .iter()
            .copied()
            .filter(|d| outside(d) && d.source() == member.drain())
            .collect();
        if found.is_empty() {
            return None;
        }
        for d in found {
            if !mains.iter().any(|m| core::ptr::eq(*m, d)) {
                mains.push(d);
            }
        }
    }
    if mains.len() < 2 || !same(mains.iter().map(|d| d.gate())) {
        return None;
    }
    Some(mains)
}

/// Cascoded mirrors first, then simple mirrors on the gate nets the cascoded
/// pass did not claim; mirrors sharing a diode-connected device are merged.
pub fn detect_current_mirrors(netlist: &Netlist) -> Vec<SubcircuitInstance> {
    let mut found: Vec<BTreeSet<String>> = Vec::new();
    for channel in [Channel::Nmos, Channel::Pmos] {
        let devs: Vec<&Device> = netlist.mosfets().filter(|d| d.channel() == Some(channel)).collect();
        let by_gate = group_by(&devs, |d| String::from(d.gate()));
        let mut suppressed: BTreeSet<&str> = BTreeSet::new();

        for (gate, group) in &by_gate {
            if let Some(mains) = cascode_mains(&devs, group) {
                found.push(names(group.iter().chain(mains.iter()).copied()));
                suppressed.insert(gate.as_str());
                suppressed.insert(mains[0].gate());
            }
        }

        for (gate, group) in &by_gate {
            if suppressed.contains(gate.as_str()) {
                continue;
            }
            for (_, sub) in group_by(group, |d| (String::from(d.source()), String::from(d.bulk()))) {
                if sub.len() >= 2 && sub.iter().any(|d| d.is_diode_connected()) {
                    found.push(names(sub));
                }
            }
        }
    }
    let is_diode = |name: &str| netlist.device(name).is_some_and(Device::is_diode_connected);
    merge_groups(found, is_diode)
        .into_iter()
        .map(|components| SubcircuitInstance { label: Label::CM, variant: None, components })
        .collect()
}
