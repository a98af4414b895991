use alloc::vec::Vec;

use crate::annotation::{Label, SubcircuitInstance};
use crate::netlist::{Channel, Device, Netlist};
use crate::roles::NetRoles;

/// Chains of one or two `channel` devices from `net` down (or up) to a rail
/// accepted by `rail`. The middle net of a two-device chain must touch only
/// those two devices.
fn rail_paths<'a>(
    netlist: &'a Netlist,
    roles: &NetRoles,
    net: &str,
    channel: Channel,
    rail: impl Fn(&str) -> bool,
) -> Vec<Vec<&'a Device>> {
    let on = |drain: &str| {
        netlist
            .mosfets()
            .filter(move |d| d.channel() == Some(channel) && d.drain() == drain && d.source() != drain)
            .collect::<Vec<_>>()
    };
    let mut paths = Vec::new();
    for top in on(net) {
        let mid = top.source();
        if rail(mid) {
            paths.push(alloc::vec![top]);
        } else if !roles.is_rail(mid) && mid != net && netlist.device_degree(mid) == 2 {
            for bottom in on(mid) {
                if !core::ptr::eq(top, bottom) && rail(bottom.source()) {
                    paths.push(alloc::vec![top, bottom]);
                }
            }
        }
    }
    paths.retain(|p| p.iter().any(|d| roles.is_signal(d.gate())));
    paths
}

/// Pull-up/pull-down stacks meeting on a common drive net.
pub fn detect_inverters(netlist: &Netlist, roles: &NetRoles) -> Vec<SubcircuitInstance> {
    let mut out: Vec<SubcircuitInstance> = Vec::new();
    for net in netlist.nets() {
        if roles.is_rail(net) {
            continue;
        }
        let ups = rail_paths(netlist, roles, net, Channel::Pmos, |n| roles.is_supply(n));
        if ups.is_empty() {
            continue;
        }
        let downs = rail_paths(netlist, roles, net, Channel::Nmos, |n| roles.is_ground(n));
        for up in &ups {
            for down in &downs {
                let inst = SubcircuitInstance::new(
                    Label::Inverter,
                    up.iter().chain(down.iter()).map(|d| d.name.as_str()),
                );
                if !out.contains(&inst) {
                    out.push(inst);
                }
            }
        }
    }
    out
}
