//! Labels, subcircuit instances and per-level annotation sets.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Level {
    HL1,
    HL2,
    HL3,
}

impl Level {
    pub const ALL: [Level; 3] = [Level::HL1, Level::HL2, Level::HL3];

    pub fn as_str(self) -> &'static str {
        match self {
            Level::HL1 => "HL1",
            Level::HL2 => "HL2",
            Level::HL3 => "HL3",
        }
    }

    /// File extension used by corpus directories (`hl1`, `hl2`, `hl3`).
    pub fn extension(self) -> &'static str {
        match self {
            Level::HL1 => "hl1",
            Level::HL2 => "hl2",
            Level::HL3 => "hl3",
        }
    }

    pub fn parse(s: &str) -> Option<Level> {
        Level::ALL.into_iter().find(|l| l.as_str().eq_ignore_ascii_case(s.trim()))
    }

    pub fn labels(self) -> &'static [Label] {
        match self {
            Level::HL1 => &Label::ALL[0..3],
            Level::HL2 => &Label::ALL[3..6],
            Level::HL3 => &Label::ALL[6..12],
        }
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Label {
    MosfetDiode,
    LoadCap,
    CompensationCap,
    CM,
    DiffPair,
    Inverter,
    FirstStage,
    SecondStage,
    ThirdStage,
    FeedBack,
    LoadPart,
    BiasPart,
}

impl Label {
    pub const ALL: [Label; 12] = [
        Label::MosfetDiode,
        Label::LoadCap,
        Label::CompensationCap,
        Label::CM,
        Label::DiffPair,
        Label::Inverter,
        Label::FirstStage,
        Label::SecondStage,
        Label::ThirdStage,
        Label::FeedBack,
        Label::LoadPart,
        Label::BiasPart,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Label::MosfetDiode => "MosfetDiode",
            Label::LoadCap => "load_cap",
            Label::CompensationCap => "compensation_cap",
            Label::CM => "CM",
            Label::DiffPair => "DiffPair",
            Label::Inverter => "Inverter",
            Label::FirstStage => "firstStage",
            Label::SecondStage => "secondStage",
            Label::ThirdStage => "thirdStage",
            Label::FeedBack => "feedBack",
            Label::LoadPart => "loadPart",
            Label::BiasPart => "biasPart",
        }
    }

    /// Exact canonical name lookup.
    pub fn from_name(name: &str) -> Option<Label> {
        Label::ALL.into_iter().find(|l| l.as_str() == name)
    }

    pub fn level(self) -> Level {
        match self {
            Label::MosfetDiode | Label::LoadCap | Label::CompensationCap => Level::HL1,
            Label::CM | Label::DiffPair | Label::Inverter => Level::HL2,
            _ => Level::HL3,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Orders `m2` before `m10`.
pub fn natural_cmp(a: &str, b: &str) -> Ordering {
    fn split(s: &str) -> (&str, Option<u64>) {
        let cut = s.trim_end_matches(|c: char| c.is_ascii_digit()).len();
        let (head, tail) = s.split_at(cut);
        (head, tail.parse().ok())
    }
    let (ha, na) = split(a);
    let (hb, nb) = split(b);
    ha.cmp(hb).then(na.cmp(&nb)).then(a.cmp(b))
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SubcircuitInstance {
    pub label: Label,
    /// Original variant name when loaded from a document that used one.
    pub variant: Option<String>,
    pub components: BTreeSet<String>,
}

impl SubcircuitInstance {
    pub fn new<I, S>(label: Label, components: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        SubcircuitInstance {
            label,
            variant: None,
            components: components.into_iter().map(|s| s.as_ref().to_string()).collect(),
        }
    }

    pub fn level(&self) -> Level {
        self.label.level()
    }

    /// The name written to documents: the variant if one is kept.
    pub fn name(&self) -> &str {
        self.variant.as_deref().unwrap_or(self.label.as_str())
    }

    pub fn size(&self) -> usize {
        self.components.len()
    }

    pub fn sorted_components(&self) -> Vec<&str> {
        let mut v: Vec<&str> = self.components.iter().map(String::as_str).collect();
        v.sort_by(|a, b| natural_cmp(a, b));
        v
    }
}

impl fmt::Display for SubcircuitInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {:?}", self.name(), self.sorted_components())
    }
}

#[derive(Serialize, Deserialize)]
pub(crate) struct DocEntry {
    pub sub_circuit_name: String,
    pub components: Vec<String>,
}

/// Instances grouped by level. Within a level no two instances carry the same
/// (name, components).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AnnotationSet {
    levels: BTreeMap<Level, Vec<SubcircuitInstance>>,
}

impl AnnotationSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds `inst` unless an identical instance is present. Empty instances
    /// are dropped.
    pub fn insert(&mut self, inst: SubcircuitInstance) -> bool {
        if inst.components.is_empty() {
            return false;
        }
        let list = self.levels.entry(inst.level()).or_default();
        if list.contains(&inst) {
            return false;
        }
        list.push(inst);
        true
    }

    pub fn extend(&mut self, insts: impl IntoIterator<Item = SubcircuitInstance>) {
        for i in insts {
            self.insert(i);
        }
    }

    pub fn union(&mut self, other: &AnnotationSet) {
        self.extend(other.iter().cloned());
    }

    pub fn level(&self, level: Level) -> &[SubcircuitInstance] {
        self.levels.get(&level).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn with_label(&self, label: Label) -> impl Iterator<Item = &SubcircuitInstance> {
        self.level(label.level()).iter().filter(move |i| i.label == label)
    }

    pub fn iter(&self) -> impl Iterator<Item = &SubcircuitInstance> {
        self.levels.values().flatten()
    }

    pub fn levels(&self) -> impl Iterator<Item = Level> + '_ {
        self.levels.iter().filter(|(_, v)| !v.is_empty()).map(|(l, _)| *l)
    }

    pub fn len(&self) -> usize {
        self.levels.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Only the given levels.
    pub fn restrict(&self, levels: &[Level]) -> AnnotationSet {
        let mut out = AnnotationSet::new();
        out.extend(self.iter().filter(|i| levels.contains(&i.level())).cloned());
        out
    }

    pub(crate) fn replace_level(&mut self, level: Level, insts: Vec<SubcircuitInstance>) {
        self.levels.remove(&level);
        self.extend(insts);
    }

    /// Order-insensitive view: (name, components) pairs per level.
    pub fn canonical_form(&self) -> BTreeSet<(Level, String, BTreeSet<String>)> {
        self.iter()
            .map(|i| (i.level(), i.name().to_string(), i.components.clone()))
            .collect()
    }

    /// The list-of-objects document for one level, or for every level when
    /// `level` is `None`.
    pub fn to_document(&self, level: Option<Level>) -> String {
        let insts: Vec<&SubcircuitInstance> = match level {
            Some(l) => self.level(l).iter().collect(),
            None => self.iter().collect(),
        };
        if insts.is_empty() {
            return "[]\n".to_string();
        }
        let mut out = String::from("[\n");
        for (k, inst) in insts.iter().enumerate() {
            let entry = DocEntry {
                sub_circuit_name: inst.name().to_string(),
                components: inst.sorted_components().into_iter().map(String::from).collect(),
            };
            out.push_str("  ");
            out.push_str(&serde_json::to_string(&entry).expect("plain strings serialize"));
            if k + 1 < insts.len() {
                out.push(',');
            }
            out.push('\n');
        }
        out.push_str("]\n");
        out
    }
}

impl FromIterator<SubcircuitInstance> for AnnotationSet {
    fn from_iter<T: IntoIterator<Item = SubcircuitInstance>>(iter: T) -> Self {
        let mut s = AnnotationSet::new();
        s.extend(iter);
        s
    }
}

/// Union-find merge: two groups join when they share a member for which
/// `joins` holds. Groups keep the order of their earliest member group;
/// identical results are deduplicated.
pub fn merge_groups(
    groups: Vec<BTreeSet<String>>,
    joins: impl Fn(&str) -> bool,
) -> Vec<BTreeSet<String>> {
    let n = groups.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let mut owner: BTreeMap<&str, usize> = BTreeMap::new();
    for (i, g) in groups.iter().enumerate() {
        for m in g {
            if !joins(m) {
                continue;
            }
            if let Some(&j) = owner.get(m.as_str()) {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            } else {
                owner.insert(m, i);
            }
        }
    }
    let mut merged: BTreeMap<usize, BTreeSet<String>> = BTreeMap::new();
    for (i, g) in groups.iter().enumerate() {
        let root = find(&mut parent, i);
        merged.entry(root).or_default().extend(g.iter().cloned());
    }
    let mut out: Vec<BTreeSet<String>> = Vec::new();
    for g in merged.into_values() {
        if !out.contains(&g) {
            out.push(g);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn set(items: &[&str]) -> BTreeSet<String> {
        items.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn label_levels() {
        for l in Level::ALL {
            for label in l.labels() {
                assert_eq!(label.level(), l);
                assert_eq!(Label::from_name(label.as_str()), Some(*label));
            }
        }
        assert_eq!(Label::from_name("cm"), None);
    }

    #[test]
    fn natural_order() {
        let inst = SubcircuitInstance::new(Label::CM, ["m10", "m2", "m1", "c3"]);
        assert_eq!(inst.sorted_components(), vec!["c3", "m1", "m2", "m10"]);
    }

    #[test]
    fn set_dedups_within_level() {
        let mut s = AnnotationSet::new();
        assert!(s.insert(SubcircuitInstance::new(Label::CM, ["m1", "m2"])));
        assert!(!s.insert(SubcircuitInstance::new(Label::CM, ["m2", "m1"])));
        assert!(s.insert(SubcircuitInstance::new(Label::DiffPair, ["m1", "m2"])));
        assert!(!s.insert(SubcircuitInstance::new(Label::CM, Vec::<&str>::new())));
        assert_eq!(s.len(), 2);
        assert_eq!(s.levels().collect::<Vec<_>>(), vec![Level::HL2]);
    }

    #[test]
    fn document_shape() {
        let s: AnnotationSet = [SubcircuitInstance::new(Label::CM, ["m4", "m19"])].into_iter().collect();
        assert_eq!(
            s.to_document(Some(Level::HL2)),
            "[\n  {\"sub_circuit_name\":\"CM\",\"components\":[\"m4\",\"m19\"]}\n]\n"
        );
        assert_eq!(s.to_document(Some(Level::HL1)), "[]\n");
    }

    #[test]
    fn merge_through_shared_members() {
        let groups = vec![set(&["m1", "m2"]), set(&["m3", "m4"]), set(&["m1", "m5"]), set(&["m4", "m6"])];
        let merged = merge_groups(groups.clone(), |d| d == "m1");
        assert_eq!(merged, vec![set(&["m1", "m2", "m5"]), set(&["m3", "m4"]), set(&["m4", "m6"])]);
        let all = merge_groups(groups, |_| true);
        assert_eq!(all, vec![set(&["m1", "m2", "m5"]), set(&["m3", "m4", "m6"])]);
    }

    #[test]
    fn merge_chains_transitively() {
        let groups = vec![set(&["a", "x"]), set(&["b", "y"]), set(&["x", "y"])];
        assert_eq!(merge_groups(groups, |d| d.len() == 1 && d != "a" && d != "b").len(), 1);
    }
}
