//! Name-based net role classification.

use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::netlist::Netlist;

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetRoles {
    pub supply: BTreeSet<String>,
    pub ground: BTreeSet<String>,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    pub bias: BTreeSet<String>,
    /// Every net of the netlist not in one of the five explicit roles.
    pub internal: BTreeSet<String>,
}

/// Partial roles supplied by the caller. A `Some` field replaces the inferred
/// set wholesale.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoleOverrides {
    pub supply: Option<Vec<String>>,
    pub ground: Option<Vec<String>>,
    pub inputs: Option<Vec<String>>,
    pub outputs: Option<Vec<String>>,
    pub bias: Option<Vec<String>>,
}

impl RoleOverrides {
    pub fn is_empty(&self) -> bool {
        self.supply.is_none()
            && self.ground.is_none()
            && self.inputs.is_none()
            && self.outputs.is_none()
            && self.bias.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RolesError {
    ConflictingOverride(String),
}

impl fmt::Display for RolesError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RolesError::ConflictingOverride(net) => {
                write!(f, "net '{net}' is assigned to more than one role")
            }
        }
    }
}

impl core::error::Error for RolesError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Supply,
    Ground,
    Input,
    Output,
    Bias,
}

fn digits_after<'a>(name: &'a str, prefixes: &[&str]) -> bool {
    prefixes.iter().any(|p| {
        name.strip_prefix(p)
            .is_some_and(|rest| rest.bytes().all(|b| b.is_ascii_digit()))
    })
}

fn infer(net: &str) -> Option<Kind> {
    let lower = net.to_ascii_lowercase();
    let name = lower.as_str();
    if matches!(name, "supply" | "vdd" | "vcc") {
        Some(Kind::Supply)
    } else if matches!(name, "ground" | "gnd" | "vss" | "0") {
        Some(Kind::Ground)
    } else if name == "vref" || digits_after(name, &["in"]) {
        Some(Kind::Input)
    } else if digits_after(name, &["output", "vout", "out"]) {
        Some(Kind::Output)
    } else if ["ibias", "vbias", "bias"].iter().any(|p| name.starts_with(p)) {
        Some(Kind::Bias)
    } else {
        None
    }
}

impl NetRoles {
    /// Classifies every net of `netlist` by name, then applies `overrides`.
    pub fn classify(netlist: &Netlist, overrides: &RoleOverrides) -> Result<NetRoles, RolesError> {
        let mut claimed: BTreeSet<&str> = BTreeSet::new();
        let override_sets = [
            (Kind::Supply, &overrides.supply),
            (Kind::Ground, &overrides.ground),
            (Kind::Input, &overrides.inputs),
            (Kind::Output, &overrides.outputs),
            (Kind::Bias, &overrides.bias),
        ];
        for (_, set) in &override_sets {
            if let Some(nets) = set {
                let mut local = BTreeSet::new();
                for net in nets {
                    if !local.insert(net.as_str()) {
                        continue;
                    }
                    if !claimed.insert(net.as_str()) {
                        return Err(RolesError::ConflictingOverride(net.clone()));
                    }
                }
            }
        }

        let mut roles = NetRoles::default();
        let overridden = |k: Kind| override_sets.iter().any(|(kind, s)| *kind == k && s.is_some());
        for net in netlist.nets() {
            if claimed.contains(net.as_str()) {
                continue;
            }
            match infer(net) {
                Some(k) if !overridden(k) => roles.push(k, net),
                _ => {}
            }
        }
        for (kind, set) in &override_sets {
            if let Some(nets) = set {
                for net in nets {
                    roles.push(*kind, net);
                }
            }
        }
        roles.internal = netlist
            .nets()
            .iter()
            .filter(|n| !roles.is_reserved(n))
            .cloned()
            .collect();
        Ok(roles)
    }

    fn push(&mut self, kind: Kind, net: &str) {
        match kind {
            Kind::Supply => {
                self.supply.insert(net.to_string());
            }
            Kind::Ground => {
                self.ground.insert(net.to_string());
            }
            Kind::Bias => {
                self.bias.insert(net.to_string());
            }
            Kind::Input => {
                if !self.inputs.iter().any(|n| n == net) {
                    self.inputs.push(net.to_string());
                }
            }
            Kind::Output => {
                if !self.outputs.iter().any(|n| n == net) {
                    self.outputs.push(net.to_string());
                }
            }
        }
    }

    pub fn is_supply(&self, net: &str) -> bool {
        self.supply.contains(net)
    }
    pub fn is_ground(&self, net: &str) -> bool {
        self.ground.contains(net)
    }
    pub fn is_rail(&self, net: &str) -> bool {
        self.is_supply(net) || self.is_ground(net)
    }
    pub fn is_input(&self, net: &str) -> bool {
        self.inputs.iter().any(|n| n == net)
    }
    pub fn is_output(&self, net: &str) -> bool {
        self.outputs.iter().any(|n| n == net)
    }
    pub fn is_bias(&self, net: &str) -> bool {
        self.bias.contains(net)
    }
    pub fn is_internal(&self, net: &str) -> bool {
        self.internal.contains(net)
    }

    /// Carries a signal: neither a rail nor a bias net.
    pub fn is_signal(&self, net: &str) -> bool {
        !self.is_rail(net) && !self.is_bias(net)
    }

    fn is_reserved(&self, net: &str) -> bool {
        self.is_rail(net) || self.is_input(net) || self.is_output(net) || self.is_bias(net)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::demos;
    use alloc::vec;

    fn set(items: &[&str]) -> BTreeSet<String> {
        items.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn prompt_netlist_roles() {
        let n = Netlist::parse(demos::PROMPT_HL1_HL2).unwrap();
        let r = NetRoles::classify(&n, &RoleOverrides::default()).unwrap();
        assert_eq!(r.supply, set(&["supply"]));
        assert_eq!(r.ground, set(&["ground"]));
        assert_eq!(r.inputs, vec!["in1", "in2"]);
        assert_eq!(r.outputs, vec!["out"]);
        assert_eq!(r.bias, set(&["ibias"]));
        assert_eq!(r.internal, set(&["a", "b", "c", "d", "e", "f", "g"]));
    }

    #[test]
    fn plain_nets_are_internal() {
        let n = Netlist::parse("m1 a b a a nmos").unwrap();
        let r = NetRoles::classify(&n, &RoleOverrides::default()).unwrap();
        assert!(r.supply.is_empty() && r.ground.is_empty() && r.bias.is_empty());
        assert!(r.inputs.is_empty() && r.outputs.is_empty());
        assert_eq!(r.internal, set(&["a", "b"]));
    }

    #[test]
    fn name_rules() {
        let n = Netlist::parse(
            "m1 VOUT2 IN vdd 0 nmos\nm2 output inp vcc gnd pmos\nm3 vbias_n bias2 vss out1 nmos\nc1 outx vref",
        )
        .unwrap();
        let r = NetRoles::classify(&n, &RoleOverrides::default()).unwrap();
        assert_eq!(r.supply, set(&["vdd", "vcc"]));
        assert_eq!(r.ground, set(&["0", "gnd", "vss"]));
        assert_eq!(r.inputs, vec!["IN", "vref"]);
        assert_eq!(r.outputs, vec!["VOUT2", "output", "out1"]);
        assert_eq!(r.bias, set(&["vbias_n", "bias2"]));
        assert_eq!(r.internal, set(&["inp", "outx"]));
    }

    #[test]
    fn override_replaces_wholesale() {
        let n = Netlist::parse(demos::PROMPT_HL1_HL2).unwrap();
        let o = RoleOverrides {
            outputs: Some(vec!["c".into()]),
            ..Default::default()
        };
        let r = NetRoles::classify(&n, &o).unwrap();
        assert_eq!(r.outputs, vec!["c"]);
        assert!(r.internal.contains("out"));
        assert!(!r.internal.contains("c"));
    }

    #[test]
    fn override_wins_over_inferred_role() {
        let n = Netlist::parse("m1 in1 x y y nmos").unwrap();
        let o = RoleOverrides {
            outputs: Some(vec!["in1".into()]),
            ..Default::default()
        };
        let r = NetRoles::classify(&n, &o).unwrap();
        assert!(r.inputs.is_empty());
        assert_eq!(r.outputs, vec!["in1"]);
    }

    #[test]
    fn conflicting_override() {
        let n = Netlist::parse("m1 a b c c nmos").unwrap();
        let o = RoleOverrides {
            outputs: Some(vec!["a".into()]),
            bias: Some(vec!["a".into()]),
            ..Default::default()
        };
        assert_eq!(
            NetRoles::classify(&n, &o),
            Err(RolesError::ConflictingOverride("a".into()))
        );
    }
}
