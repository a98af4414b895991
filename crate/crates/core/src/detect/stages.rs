use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use crate::annotation::{AnnotationSet, Label, SubcircuitInstance};
use crate::netlist::{Device, Netlist};
use crate::roles::NetRoles;

use super::hl1::capacitor_role;

const MAX_STAGES: usize = 3;

struct Ctx<'a> {
    devs: &'a [Device],
    roles: &'a NetRoles,
}

impl<'a> Ctx<'a> {
    fn mosfets(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.devs.len()).filter(|&i| self.devs[i].is_mosfet())
    }

    /// Stage drains plus the drains of unclaimed devices stacked on them.
    fn effective_outputs(&self, stage: &BTreeSet<usize>, claimed: &BTreeSet<usize>) -> BTreeSet<&'a str> {
        let drains: BTreeSet<&str> = stage.iter().map(|&i| self.devs[i].drain()).collect();
        let mut eff = drains.clone();
        for i in self.mosfets().filter(|i| !claimed.contains(i)) {
            let d = &self.devs[i];
            if drains.contains(d.source()) && !self.roles.is_rail(d.drain()) {
                eff.insert(d.drain());
            }
        }
        eff
    }

    /// `net` is an output or drives (through gates) a chain that ends on one.
    fn reaches_output(&self, net: &str, seen: &mut BTreeSet<&'a str>) -> bool {
        if self.roles.is_output(net) {
            return true;
        }
        let devs = self.devs;
        for i in self.mosfets() {
            let d = &devs[i];
            if d.gate() == net && seen.insert(d.drain()) && self.reaches_output(d.drain(), seen) {
                return true;
            }
        }
        false
    }

    /// Devices of every chain from `net` down to a rail through unclaimed
    /// devices (drain to source); `None` when there is no such chain.
    fn rail_chain(&self, net: &str, claimed: &BTreeSet<usize>, path: &mut Vec<usize>) -> Option<BTreeSet<usize>> {
        if self.roles.is_rail(net) {
            return Some(BTreeSet::new());
        }
        let mut found: Option<BTreeSet<usize>> = None;
        for j in self.mosfets() {
            let d = &self.devs[j];
            if claimed.contains(&j) || path.contains(&j) || d.drain() != net {
                continue;
            }
            path.push(j);
            if let Some(rest) = self.rail_chain(d.source(), claimed, path) {
                let f = found.get_or_insert_with(BTreeSet::new);
                f.insert(j);
                f.extend(rest);
            }
            path.pop();
        }
        found
    }
}

/// Stage-level grouping: amplification stages traced from the input pair,
/// then feedback, load and bias parts, each label as one grouped instance.
pub fn detect_hl3(netlist: &Netlist, roles: &NetRoles, hl2: &AnnotationSet) -> AnnotationSet {
    let devs = netlist.devices();
    let ctx = Ctx { devs, roles };
    let index: BTreeMap<&str, usize> = devs.iter().enumerate().map(|(i, d)| (d.name.as_str(), i)).collect();
    let resolve = |inst: &SubcircuitInstance| -> Vec<usize> {
        inst.components.iter().filter_map(|c| index.get(c.as_str()).copied()).collect()
    };

    let first: BTreeSet<usize> = hl2
        .with_label(Label::DiffPair)
        .map(&resolve)
        .filter(|members| members.iter().any(|&i| roles.is_input(devs[i].gate())))
        .flatten()
        .collect();
    let mut out = AnnotationSet::new();
    if first.is_empty() {
        return out;
    }

    let mut claimed = first.clone();
    let mut stages = alloc::vec![first];
    let mut effs = alloc::vec![ctx.effective_outputs(&stages[0], &claimed)];
    while stages.len() < MAX_STAGES {
        let current = stages.last().unwrap();
        if current.iter().any(|&i| roles.is_output(devs[i].drain())) {
            break;
        }
        let prev = effs.last().unwrap();
        let next: BTreeSet<usize> = ctx
            .mosfets()
            .filter(|i| !claimed.contains(i))
            .filter(|&i| {
                let d = &devs[i];
                prev.contains(d.gate())
                    && !roles.is_output(d.gate())
                    && !prev.contains(d.drain())
                    && ctx.reaches_output(d.drain(), &mut BTreeSet::new())
            })
            .collect();
        if next.is_empty() {
            break;
        }
        claimed.extend(next.iter().copied());
        effs.push(ctx.effective_outputs(&next, &claimed));
        stages.push(next);
    }

    // Nets carried by the stages, excluding rails and outputs.
    let mut stage_nets: BTreeSet<&str> = BTreeSet::new();
    for (stage, eff) in stages.iter().zip(&effs) {
        for &i in stage {
            let d = &devs[i];
            stage_nets.extend([d.drain(), d.gate(), d.source()]);
        }
        stage_nets.extend(eff.iter().copied());
    }
    stage_nets.retain(|n| !roles.is_rail(n) && !roles.is_output(n));

    let mut feedback: BTreeSet<usize> = BTreeSet::new();
    let sense: Vec<usize> = ctx
        .mosfets()
        .filter(|i| !claimed.contains(i) && roles.is_output(devs[*i].gate()))
        .collect();
    for &s in &sense {
        feedback.insert(s);
        let sd = &devs[s];
        for j in ctx.mosfets().filter(|j| !claimed.contains(j)) {
            let d = &devs[j];
            if d.channel() == sd.channel() && d.source() == sd.source() && d.bulk() == sd.bulk() {
                feedback.insert(j);
            }
        }
    }
    for i in ctx.mosfets().filter(|i| !claimed.contains(i)) {
        let d = &devs[i];
        let forward = stage_nets.contains(d.gate()) && roles.is_output(d.drain());
        let links = |a: &str, b: &str| roles.is_output(a) && stage_nets.contains(b);
        if !forward && (links(d.drain(), d.source()) || links(d.source(), d.drain())) {
            feedback.insert(i);
        }
    }
    for (i, cap) in devs.iter().enumerate().filter(|(_, d)| d.is_capacitor()) {
        let mut t = cap.terminals();
        let (_, p) = t.next().unwrap();
        let (_, n) = t.next().unwrap();
        let links = (roles.is_output(p) && stage_nets.contains(n)) || (roles.is_output(n) && stage_nets.contains(p));
        if links && capacitor_role(p, n, roles).is_none() {
            feedback.insert(i);
        }
    }
    claimed.extend(feedback.iter().copied());

    let mut load: BTreeSet<usize> = BTreeSet::new();
    for i in ctx.mosfets().filter(|i| !claimed.contains(i)) {
        let d = &devs[i];
        if !effs[0].contains(d.drain()) || roles.is_bias(d.gate()) {
            continue;
        }
        let mut path = alloc::vec![i];
        if let Some(chain) = ctx.rail_chain(d.source(), &claimed, &mut path) {
            load.insert(i);
            load.extend(chain);
        }
    }
    let seeds = load.clone();
    for cm in hl2.with_label(Label::CM) {
        let members = resolve(cm);
        if !members.iter().any(|i| seeds.contains(i)) {
            continue;
        }
        if members.iter().any(|&i| roles.is_bias(devs[i].gate())) {
            continue;
        }
        load.extend(members.into_iter().filter(|i| !claimed.contains(i)));
    }
    claimed.extend(load.iter().copied());

    let bias: BTreeSet<usize> = ctx.mosfets().filter(|i| !claimed.contains(i)).collect();

    let stage_labels = [Label::FirstStage, Label::SecondStage, Label::ThirdStage];
    let groups = stages
        .iter()
        .zip(stage_labels)
        .map(|(s, l)| (l, s))
        .chain([(Label::FeedBack, &feedback), (Label::LoadPart, &load), (Label::BiasPart, &bias)]);
    for (label, members) in groups {
        out.insert(SubcircuitInstance::new(label, members.iter().map(|&i| devs[i].name.as_str())));
    }
    out
}
