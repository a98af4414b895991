use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};

use serde::{Deserialize, Serialize};

use crate::netlist::Netlist;

pub const DEFAULT_RESERVED: [&str; 14] = [
    "supply", "ground", "vdd", "vss", "gnd", "0", "out", "out1", "out2", "in", "in1", "in2",
    "ibias", "vref",
];

pub fn default_reserved() -> BTreeSet<String> {
    DEFAULT_RESERVED.iter().map(|s| s.to_string()).collect()
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RenameMap {
    pub forward: BTreeMap<String, String>,
    /// Nets of the input that were left untouched.
    pub reserved: BTreeSet<String>,
}

impl RenameMap {
    pub fn apply<'a>(&'a self, net: &'a str) -> &'a str {
        self.forward.get(net).map(String::as_str).unwrap_or(net)
    }

    pub fn is_identity(&self) -> bool {
        self.forward.iter().all(|(k, v)| k == v)
    }
}

/// `a, b, …, z, aa, ab, …` — bijective base 26.
pub fn identifier(mut index: usize) -> String {
    let mut bytes = alloc::vec::Vec::new();
    loop {
        bytes.push(b'a' + (index % 26) as u8);
        if index < 26 {
            break;
        }
        index = index / 26 - 1;
    }
    bytes.reverse();
    String::from_utf8(bytes).unwrap()
}

/// Renames every net not in `reserved` (compared case-insensitively) in order
/// of first appearance.
pub fn anonymize(netlist: &Netlist, reserved: &BTreeSet<String>) -> (Netlist, RenameMap) {
    let reserved_lower: BTreeSet<String> = reserved.iter().map(|s| s.to_ascii_lowercase()).collect();
    let is_reserved = |net: &str| reserved_lower.contains(&net.to_ascii_lowercase());

    let mut map = RenameMap::default();
    let mut next = 0usize;
    for net in netlist.nets() {
        if is_reserved(net) {
            map.reserved.insert(net.clone());
            continue;
        }
        let fresh = loop {
            let candidate = identifier(next);
            next += 1;
            if is_reserved(&candidate) {
                log::debug!("anonymize: skipping identifier '{candidate}', it is a reserved net name");
                continue;
            }
            break candidate;
        };
        map.forward.insert(net.clone(), fresh);
    }
    let renamed = netlist.map_nets(|net| map.apply(net).to_string());
    (renamed, map)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::demos;

    #[test]
    fn identifiers() {
        assert_eq!(identifier(0), "a");
        assert_eq!(identifier(25), "z");
        assert_eq!(identifier(26), "aa");
        assert_eq!(identifier(27), "ab");
        assert_eq!(identifier(26 + 26 * 26), "aaa");
    }

    #[test]
    fn long_internal_name_becomes_a_letter() {
        let n = Netlist::parse("m1 out1FirstStage in1 x ground nmos\nm2 out out1FirstStage supply supply pmos").unwrap();
        let (a, map) = anonymize(&n, &default_reserved());
        assert_eq!(map.forward["out1FirstStage"], "a");
        assert_eq!(map.forward["x"], "b");
        assert_eq!(a.devices()[0].drain(), "a");
        assert_eq!(a.devices()[1].gate(), "a");
    }

    #[test]
    fn all_reserved_is_identity() {
        let n = Netlist::parse("m1 out in1 ground ground nmos\nc1 out ground").unwrap();
        let (a, map) = anonymize(&n, &default_reserved());
        assert!(map.forward.is_empty());
        assert_eq!(a, n);
    }

    #[test]
    fn second_pass_is_identity() {
        let n = Netlist::parse(demos::REFERENCE_CODE_TEST).unwrap();
        let r = default_reserved();
        let (once, _) = anonymize(&n, &r);
        let (twice, map) = anonymize(&once, &r);
        assert!(map.is_identity());
        assert_eq!(once, twice);
    }

    #[test]
    fn collisions_are_skipped() {
        let n = Netlist::parse("m1 p q r s nmos").unwrap();
        let reserved: BTreeSet<String> = ["b", "C"].iter().map(|s| s.to_string()).collect();
        let (_, map) = anonymize(&n, &reserved);
        assert_eq!(map.forward["p"], "a");
        assert_eq!(map.forward["q"], "d");
        assert_eq!(map.forward["r"], "e");
    }

    #[test]
    fn reserved_match_is_case_insensitive() {
        let n = Netlist::parse("m1 OUT x VDD VDD pmos").unwrap();
        let (a, map) = anonymize(&n, &default_reserved());
        assert_eq!(map.forward.len(), 1);
        assert!(map.reserved.contains("VDD"));
        assert_eq!(a.devices()[0].source(), "VDD");
    }
}
