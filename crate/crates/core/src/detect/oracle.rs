//! Exhaustive current-mirror enumeration for small netlists, used to
//! cross-check the pass-based detector.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::annotation::{Label, SubcircuitInstance};
use crate::netlist::{Channel, Device, Netlist};

pub const ORACLE_LIMIT: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OracleError {
    TooLarge(usize),
}

impl fmt::Display for OracleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OracleError::TooLarge(n) => {
                write!(f, "{n} devices exceed the oracle limit of {ORACLE_LIMIT}")
            }
        }
    }
}

impl core::error::Error for OracleError {}

fn members<'a>(devs: &[&'a Device], mask: u32) -> Vec<&'a Device> {
    (0..devs.len()).filter(|i| mask & (1 << i) != 0).map(|i| devs[i]).collect()
}

fn all_equal(vals: &[&str]) -> bool {
    vals.windows(2).all(|w| w[0] == w[1])
}

/// S = C ∪ M where C is a complete gate group with a common source and bulk,
/// M is exactly the set of other devices sourced from C's drains, every drain
/// of C feeds some device of M, and M shares one gate.
fn is_cascode(devs: &[&Device], set: &[&Device]) -> bool {
    let gates: BTreeSet<&str> = set.iter().map(|d| d.gate()).collect();
    gates.into_iter().any(|g| {
        let c: Vec<&Device> = devs.iter().filter(|d| d.gate() == g).copied().collect();
        if c.len() < 2 || !c.iter().all(|x| set.iter().any(|s| core::ptr::eq(*s, *x))) {
            return false;
        }
        if !all_equal(&c.iter().map(|d| d.source()).collect::<Vec<_>>())
            || !all_equal(&c.iter().map(|d| d.bulk()).collect::<Vec<_>>())
        {
            return false;
        }
        let in_c = |d: &Device| c.iter().any(|x| core::ptr::eq(*x, d));
        let m: Vec<&Device> = set.iter().filter(|d| !in_c(d)).copied().collect();
        let drains: BTreeSet<&str> = c.iter().map(|d| d.drain()).collect();
        let expected: Vec<&Device> =
            devs.iter().filter(|d| !in_c(d) && drains.contains(d.source())).copied().collect();
        let same_set = m.len() == expected.len() && m.iter().all(|x| expected.iter().any(|e| core::ptr::eq(*e, *x)));
        let sources: BTreeSet<&str> = m.iter().map(|d| d.source()).collect();
        same_set
            && m.len() >= 2
            && c.iter().all(|d| sources.contains(d.drain()))
            && all_equal(&m.iter().map(|d| d.gate()).collect::<Vec<_>>())
    })
}

fn is_simple(set: &[&Device]) -> bool {
    set.len() >= 2
        && all_equal(&set.iter().map(|d| d.gate()).collect::<Vec<_>>())
        && all_equal(&set.iter().map(|d| d.source()).collect::<Vec<_>>())
        && all_equal(&set.iter().map(|d| d.bulk()).collect::<Vec<_>>())
        && set.iter().any(|d| d.is_diode_connected())
}

fn names(set: &[&Device]) -> BTreeSet<String> {
    set.iter().map(|d| d.name.clone()).collect()
}

/// Same contract as `detect_current_mirrors`, computed by enumerating every
/// subset of each channel's mosfets.
pub fn brute_force_cm_oracle(netlist: &Netlist) -> Result<Vec<SubcircuitInstance>, OracleError> {
    let count = netlist.devices().len();
    if count > ORACLE_LIMIT {
        return Err(OracleError::TooLarge(count));
    }
    let mut found: Vec<BTreeSet<String>> = Vec::new();
    for channel in [Channel::Nmos, Channel::Pmos] {
        let devs: Vec<&Device> = netlist.mosfets().filter(|d| d.channel() == Some(channel)).collect();
        let mut cascodes: Vec<Vec<&Device>> = Vec::new();
        let mut simples: Vec<u32> = Vec::new();
        for mask in 1u32..(1u32 << devs.len()) {
            if mask.count_ones() < 2 {
                continue;
            }
            let set = members(&devs, mask);
            if is_cascode(&devs, &set) {
                cascodes.push(set);
            } else if is_simple(&set) {
                simples.push(mask);
            }
        }
        let suppressed: BTreeSet<&str> = cascodes.iter().flatten().map(|d| d.gate()).collect();
        simples.retain(|&m| !suppressed.contains(members(&devs, m)[0].gate()));
        let maximal: Vec<u32> = simples
            .iter()
            .copied()
            .filter(|&m| !simples.iter().any(|&o| o != m && o & m == m))
            .collect();
        found.extend(cascodes.iter().map(|s| names(s)));
        found.extend(maximal.into_iter().map(|m| names(&members(&devs, m))));
    }

    // Merge until no two groups share a diode-connected device.
    let is_diode = |name: &String| netlist.device(name).is_some_and(Device::is_diode_connected);
    'outer: loop {
        for i in 0..found.len() {
            for j in i + 1..found.len() {
                if found[i] == found[j] {
                    found.remove(j);
                    continue 'outer;
                }
                if found[i].intersection(&found[j]).any(is_diode) {
                    let other = found.remove(j);
                    found[i].extend(other);
                    continue 'outer;
                }
            }
        }
        break;
    }
    Ok(found
        .into_iter()
        .map(|components| SubcircuitInstance { label: Label::CM, variant: None, components })
        .collect())
}
