//! Flat SPICE netlists as device-terminal graphs.
//!
//! The accepted grammar is deliberately small: one device per line,
//! `m<name> <drain> <gate> <source> <bulk> <model>` for MOSFETs and
//! `c<name> <n1> <n2> [value]` for capacitors. Blank lines and `*` comments
//! are skipped. MOSFET lines may carry trailing `key=value` parameters, which
//! are ignored.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Channel {
    Nmos,
    Pmos,
}

impl Channel {
    pub fn as_str(self) -> &'static str {
        match self {
            Channel::Nmos => "nmos",
            Channel::Pmos => "pmos",
        }
    }
}

/// Terminal role. Its meaning is fixed by the position in the device line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Drain,
    Gate,
    Source,
    Bulk,
    Pos,
    Neg,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::Drain => "drain",
            Role::Gate => "gate",
            Role::Source => "source",
            Role::Bulk => "bulk",
            Role::Pos => "pos",
            Role::Neg => "neg",
        }
    }
}

const MOSFET_ROLES: [Role; 4] = [Role::Drain, Role::Gate, Role::Source, Role::Bulk];
const CAPACITOR_ROLES: [Role; 2] = [Role::Pos, Role::Neg];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum DeviceKind {
    Mosfet { channel: Channel, model: String },
    Capacitor,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Device {
    pub name: String,
    pub kind: DeviceKind,
    /// Nets in line order: d, g, s, b for MOSFETs; pos, neg for capacitors.
    nets: Vec<String>,
}

impl Device {
    pub fn mosfet(name: &str, channel: Channel, d: &str, g: &str, s: &str, b: &str) -> Self {
        Device {
            name: name.to_string(),
            kind: DeviceKind::Mosfet {
                channel,
                model: channel.as_str().to_string(),
            },
            nets: [d, g, s, b].iter().map(|n| n.to_string()).collect(),
        }
    }

    pub fn capacitor(name: &str, pos: &str, neg: &str) -> Self {
        Device {
            name: name.to_string(),
            kind: DeviceKind::Capacitor,
            nets: alloc::vec![pos.to_string(), neg.to_string()],
        }
    }

    pub fn is_mosfet(&self) -> bool {
        matches!(self.kind, DeviceKind::Mosfet { .. })
    }

    pub fn is_capacitor(&self) -> bool {
        matches!(self.kind, DeviceKind::Capacitor)
    }

    pub fn channel(&self) -> Option<Channel> {
        match &self.kind {
            DeviceKind::Mosfet { channel, .. } => Some(*channel),
            DeviceKind::Capacitor => None,
        }
    }

    pub fn roles(&self) -> &'static [Role] {
        match self.kind {
            DeviceKind::Mosfet { .. } => &MOSFET_ROLES,
            DeviceKind::Capacitor => &CAPACITOR_ROLES,
        }
    }

    /// `(role, net)` pairs in line order.
    pub fn terminals(&self) -> impl Iterator<Item = (Role, &str)> + '_ {
        self.roles()
            .iter()
            .copied()
            .zip(self.nets.iter().map(String::as_str))
    }

    pub fn net(&self, role: Role) -> Option<&str> {
        self.terminals().find(|(r, _)| *r == role).map(|(_, n)| n)
    }

    // Accessors below panic on capacitors; detectors only call them on MOSFETs.
    pub fn drain(&self) -> &str {
        self.net(Role::Drain).expect("drain of a non-mosfet")
    }
    pub fn gate(&self) -> &str {
        self.net(Role::Gate).expect("gate of a non-mosfet")
    }
    pub fn source(&self) -> &str {
        self.net(Role::Source).expect("source of a non-mosfet")
    }
    pub fn bulk(&self) -> &str {
        self.net(Role::Bulk).expect("bulk of a non-mosfet")
    }

    /// Gate and drain share a net.
    pub fn is_diode_connected(&self) -> bool {
        self.is_mosfet() && self.drain() == self.gate()
    }

    pub(crate) fn nets_mut(&mut self) -> &mut Vec<String> {
        &mut self.nets
    }

    fn to_line(&self) -> String {
        let mut line = self.name.clone();
        for net in &self.nets {
            line.push(' ');
            line.push_str(net);
        }
        if let DeviceKind::Mosfet { model, .. } = &self.kind {
            line.push(' ');
            line.push_str(model);
        }
        line
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NetlistError {
    MalformedLine { line: usize, reason: String },
    DuplicateDevice(String),
    UnknownChannel(String),
    UnknownNet(String),
}

impl fmt::Display for NetlistError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NetlistError::MalformedLine { line, reason } => {
                write!(f, "line {line}: {reason}")
            }
            NetlistError::DuplicateDevice(name) => write!(f, "duplicate device name '{name}'"),
            NetlistError::UnknownChannel(model) => {
                write!(f, "model '{model}' names neither nmos nor pmos")
            }
            NetlistError::UnknownNet(net) => write!(f, "no device touches net '{net}'"),
        }
    }
}

impl core::error::Error for NetlistError {}

/// A parsed flat netlist. Immutable once built.
#[derive(Debug, Clone, Default)]
pub struct Netlist {
    devices: Vec<Device>,
    /// 1-based source line of each device.
    source_lines: Vec<usize>,
    /// Nets in order of first appearance.
    net_order: Vec<String>,
    index: BTreeMap<String, usize>,
}

/// Structural equality: same devices in the same order. Source line numbers
/// are provenance and do not take part.
impl PartialEq for Netlist {
    fn eq(&self, other: &Self) -> bool {
        self.devices == other.devices
    }
}

impl Eq for Netlist {}

impl Netlist {
    pub fn parse(text: &str) -> Result<Netlist, NetlistError> {
        let mut devices = Vec::new();
        let mut lines = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('*') {
                continue;
            }
            if line.eq_ignore_ascii_case(".end") {
                continue;
            }
            devices.push(parse_line(line, line_no)?);
            lines.push(line_no);
        }
        Netlist::build(devices, lines)
    }

    /// Builds a netlist from already-constructed devices. Line numbers are
    /// assigned sequentially.
    pub fn from_devices(devices: Vec<Device>) -> Result<Netlist, NetlistError> {
        let lines = (1..=devices.len()).collect();
        Netlist::build(devices, lines)
    }

    fn build(devices: Vec<Device>, source_lines: Vec<usize>) -> Result<Netlist, NetlistError> {
        let mut index = BTreeMap::new();
        let mut net_order: Vec<String> = Vec::new();
        let mut seen_nets = BTreeSet::new();
        for (i, dev) in devices.iter().enumerate() {
            let key = dev.name.to_ascii_lowercase();
            if index.insert(key, i).is_some() {
                return Err(NetlistError::DuplicateDevice(dev.name.clone()));
            }
            for (_, net) in dev.terminals() {
                if seen_nets.insert(net) {
                    net_order.push(net.to_string());
                }
            }
        }
        Ok(Netlist {
            devices,
            source_lines,
            net_order,
            index,
        })
    }

    pub fn devices(&self) -> &[Device] {
        &self.devices
    }

    pub fn mosfets(&self) -> impl Iterator<Item = &Device> {
        self.devices.iter().filter(|d| d.is_mosfet())
    }

    pub fn capacitors(&self) -> impl Iterator<Item = &Device> {
        self.devices.iter().filter(|d| d.is_capacitor())
    }

    pub fn mosfet_count(&self) -> usize {
        self.mosfets().count()
    }

    pub fn source_line(&self, device: usize) -> usize {
        self.source_lines[device]
    }

    /// Case-insensitive lookup.
    pub fn device(&self, name: &str) -> Option<&Device> {
        self.index
            .get(&name.to_ascii_lowercase())
            .map(|&i| &self.devices[i])
    }

    pub fn contains_device(&self, name: &str) -> bool {
        self.index.contains_key(&name.to_ascii_lowercase())
    }

    /// Nets in order of first appearance.
    pub fn nets(&self) -> &[String] {
        &self.net_order
    }

    pub fn net_set(&self) -> BTreeSet<&str> {
        self.net_order.iter().map(String::as_str).collect()
    }

    pub fn has_net(&self, net: &str) -> bool {
        self.net_order.iter().any(|n| n == net)
    }

    pub fn terminal_count(&self) -> usize {
        self.devices.iter().map(|d| d.roles().len()).sum()
    }

    /// Every `(device, role)` touching `net`, in source order.
    pub fn devices_on_net(&self, net: &str) -> Result<Vec<(&Device, Role)>, NetlistError> {
        if !self.has_net(net) {
            return Err(NetlistError::UnknownNet(net.to_string()));
        }
        Ok(self
            .devices
            .iter()
            .flat_map(|d| {
                d.terminals()
                    .filter(move |(_, n)| *n == net)
                    .map(move |(r, _)| (d, r))
            })
            .collect())
    }

    /// Number of distinct devices with any terminal on `net`.
    pub fn device_degree(&self, net: &str) -> usize {
        self.devices
            .iter()
            .filter(|d| d.terminals().any(|(_, n)| n == net))
            .count()
    }

    /// One device per line, `\n`-terminated, in source order.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        for dev in &self.devices {
            out.push_str(&dev.to_line());
            out.push('\n');
        }
        out
    }

    /// Applies `rename` to every terminal net.
    pub(crate) fn map_nets(&self, mut rename: impl FnMut(&str) -> String) -> Netlist {
        let devices = self
            .devices
            .iter()
            .map(|d| {
                let mut d = d.clone();
                for net in d.nets_mut().iter_mut() {
                    *net = rename(net);
                }
                d
            })
            .collect();
        Netlist::build(devices, self.source_lines.clone())
            .expect("renaming nets cannot introduce duplicate device names")
    }
}

impl core::str::FromStr for Netlist {
    type Err = NetlistError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Netlist::parse(s)
    }
}

impl fmt::Display for Netlist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.serialize())
    }
}

fn malformed(line: usize, reason: impl Into<String>) -> NetlistError {
    NetlistError::MalformedLine {
        line,
        reason: reason.into(),
    }
}

fn parse_line(line: &str, line_no: usize) -> Result<Device, NetlistError> {
    let tokens: Vec<&str> = line.split_whitespace().collect();
    let name = tokens[0];
    match name.as_bytes()[0].to_ascii_lowercase() {
        b'm' => {
            let positional: Vec<&str> = tokens
                .iter()
                .copied()
                .take_while(|t| !t.contains('='))
                .collect();
            if tokens[positional.len()..].iter().any(|t| !t.contains('=')) {
                return Err(malformed(line_no, "positional token after parameters"));
            }
            if positional.len() != 6 {
                return Err(malformed(
                    line_no,
                    alloc::format!(
                        "mosfet '{name}' needs 4 nets and a model, found {} tokens",
                        positional.len()
                    ),
                ));
            }
            let model = positional[5];
            let lower = model.to_ascii_lowercase();
            let channel = if lower.contains("nmos") {
                Channel::Nmos
            } else if lower.contains("pmos") {
                Channel::Pmos
            } else {
                return Err(NetlistError::UnknownChannel(model.to_string()));
            };
            Ok(Device {
                name: name.to_string(),
                kind: DeviceKind::Mosfet {
                    channel,
                    model: model.to_string(),
                },
                nets: positional[1..5].iter().map(|n| n.to_string()).collect(),
            })
        }
        b'c' => {
            if tokens.len() != 3 && tokens.len() != 4 {
                return Err(malformed(
                    line_no,
                    alloc::format!(
                        "capacitor '{name}' needs 2 nets and an optional value, found {} tokens",
                        tokens.len()
                    ),
                ));
            }
            Ok(Device::capacitor(name, tokens[1], tokens[2]))
        }
        _ => Err(malformed(
            line_no,
            alloc::format!("unknown device prefix in '{name}'"),
        )),
    }
}
