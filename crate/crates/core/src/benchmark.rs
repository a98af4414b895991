//! Corpus normalization: variant taxonomy, label documents, mirror merging,
//! size buckets and statistics.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::anonymize::{anonymize, RenameMap};
use crate::annotation::{merge_groups, AnnotationSet, Label, Level, SubcircuitInstance};
use crate::demos::DEMOS;
use crate::netlist::{Channel, Device, Netlist};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LabelError {
    UnknownLabel(String),
    MalformedDocument(String),
}

impl fmt::Display for LabelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LabelError::UnknownLabel(name) => write!(f, "unknown subcircuit label '{name}'"),
            LabelError::MalformedDocument(why) => write!(f, "malformed annotation document: {why}"),
        }
    }
}

impl core::error::Error for LabelError {}

pub const VARIANTS: [(&str, Label); 27] = [
    ("MosfetDiodeArray", Label::MosfetDiode),
    ("CapacitorArray(type=load)", Label::LoadCap),
    ("CapacitorArray(type=compensation)", Label::CompensationCap),
    ("MosfetSimpleCurrentMirror", Label::CM),
    ("MosfetCascodeCurrentMirror", Label::CM),
    ("MosfetWideSwingCascodeCurrentMirror", Label::CM),
    ("MosfetFourTransistorCurrentMirror", Label::CM),
    ("MosfetWilsonCurrentMirror", Label::CM),
    ("MosfetImprovedWilsonCurrentMirror", Label::CM),
    ("MosfetDifferentialPair", Label::DiffPair),
    ("MosfetCascodedDifferentialPair", Label::DiffPair),
    ("MosfetFoldedCascodeDifferentialPair", Label::DiffPair),
    ("MosfetAnalogInverter", Label::Inverter),
    ("MosfetCascodedAnalogInverter", Label::Inverter),
    ("MosfetCascodedPMOSAnalogInverter", Label::Inverter),
    ("MosfetCascodedNMOSAnalogInverter", Label::Inverter),
    ("MosfetCascodePMOSAnalogInverterOneDiodeTransistor", Label::Inverter),
    ("MosfetCascodeNMOSAnalogInverterOneDiodeTransistor", Label::Inverter),
    ("MosfetCascodeAnalogInverterNmosDiodeTransistor", Label::Inverter),
    ("MosfetCascodeAnalogInverterPmosDiodeTransistor", Label::Inverter),
    ("MosfetCascodeAnalogInverterNmosCurrentMirrorLoad", Label::Inverter),
    ("firstStage", Label::FirstStage),
    ("secondStage", Label::SecondStage),
    ("thirdStage", Label::ThirdStage),
    ("loadPart", Label::LoadPart),
    ("biasPart", Label::BiasPart),
    ("feedBack", Label::FeedBack),
];

/// Variant name → canonical label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaxonomyMap {
    map: BTreeMap<String, Label>,
}

/// Drops whitespace and a leading "with " inside parentheses, so
/// "CapacitorArray (with type=load)" and "CapacitorArray(type=load)" agree.
fn normalize(name: &str) -> String {
    let compact: String = name.chars().filter(|c| !c.is_whitespace()).collect();
    compact.replace("(with", "(")
}

impl Default for TaxonomyMap {
    fn default() -> Self {
        TaxonomyMap { map: VARIANTS.iter().map(|(k, v)| (normalize(k), *v)).collect() }
    }
}

impl TaxonomyMap {
    pub fn insert(&mut self, variant: &str, label: Label) {
        self.map.insert(normalize(variant), label);
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    /// Canonical names resolve to themselves; otherwise the variant table.
    pub fn lookup(&self, name: &str) -> Option<Label> {
        Label::from_name(name).or_else(|| self.map.get(&normalize(name)).copied())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, Label)> {
        self.map.iter().map(|(k, v)| (k.as_str(), *v))
    }
}

fn malformed(why: impl Into<String>) -> LabelError {
    LabelError::MalformedDocument(why.into())
}

fn entry_of(v: &Value) -> Result<(String, Vec<String>), LabelError> {
    let (name, comps) = match v {
        Value::Object(o) => (
            o.get("sub_circuit_name").ok_or_else(|| malformed("missing 'sub_circuit_name'"))?,
            o.get("components").ok_or_else(|| malformed("missing 'components'"))?,
        ),
        Value::Array(a) if a.len() == 2 => (&a[0], &a[1]),
        other => return Err(malformed(alloc::format!("unexpected entry {other}"))),
    };
    let name = name.as_str().ok_or_else(|| malformed("label is not a string"))?;
    let comps = comps
        .as_array()
        .ok_or_else(|| malformed("components is not a list"))?
        .iter()
        .map(|c| c.as_str().map(str::to_string).ok_or_else(|| malformed("component is not a string")))
        .collect::<Result<Vec<_>, _>>()?;
    Ok((name.to_string(), comps))
}

/// Parses a label document: a list of `{"sub_circuit_name", "components"}`
/// objects (or `[name, components]` pairs). Variant names are kept on the
/// instances until [`canonicalize`].
pub fn load_labels(text: &str, taxonomy: &TaxonomyMap) -> Result<AnnotationSet, LabelError> {
    let doc: Value = serde_json::from_str(text).map_err(|e| malformed(e.to_string()))?;
    let entries = doc.as_array().ok_or_else(|| malformed("top level is not a list"))?;
    let mut set = AnnotationSet::new();
    for e in entries {
        let (name, comps) = entry_of(e)?;
        let label = taxonomy.lookup(&name).ok_or_else(|| LabelError::UnknownLabel(name.clone()))?;
        let variant = if Label::from_name(&name).is_some() { None } else { Some(name) };
        let mut inst = SubcircuitInstance::new(label, comps);
        inst.variant = variant;
        set.insert(inst);
    }
    Ok(set)
}

/// Document for every level; [`load_labels`] inverts it.
pub fn serialize_labels(set: &AnnotationSet) -> String {
    set.to_document(None)
}

/// Replaces variant names with canonical labels and deduplicates.
pub fn canonicalize(set: &AnnotationSet, taxonomy: &TaxonomyMap) -> Result<AnnotationSet, LabelError> {
    let mut out = AnnotationSet::new();
    for inst in set.iter() {
        let label = match &inst.variant {
            Some(v) => taxonomy.lookup(v).ok_or_else(|| LabelError::UnknownLabel(v.clone()))?,
            None => inst.label,
        };
        out.insert(SubcircuitInstance { label, variant: None, components: inst.components.clone() });
    }
    Ok(out)
}

/// Joins CM instances that share a device diode-connected in `netlist`.
/// Other labels are untouched.
pub fn merge_shared_diode_cms(set: &AnnotationSet, netlist: &Netlist) -> AnnotationSet {
    let cms: Vec<&SubcircuitInstance> = set.with_label(Label::CM).collect();
    let groups: Vec<BTreeSet<String>> = cms.iter().map(|i| i.components.clone()).collect();
    let is_diode = |name: &str| netlist.device(name).is_some_and(Device::is_diode_connected);
    let merged = merge_groups(groups, is_diode);

    let mut level: Vec<SubcircuitInstance> =
        set.level(Level::HL2).iter().filter(|i| i.label != Label::CM).cloned().collect();
    for components in merged {
        let channels: BTreeSet<Option<Channel>> =
            components.iter().map(|c| netlist.device(c).and_then(Device::channel)).collect();
        if channels.len() > 1 {
            log::warn!("current mirror {components:?} mixes channel types");
        }
        let original = cms.iter().find(|i| i.components == components);
        level.push(match original {
            Some(i) => (*i).clone(),
            None => SubcircuitInstance { label: Label::CM, variant: None, components },
        });
    }
    let mut out = set.clone();
    out.replace_level(Level::HL2, level);
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SizeBucket {
    Small,
    Medium,
    Large,
}

impl SizeBucket {
    pub const ALL: [SizeBucket; 3] = [SizeBucket::Small, SizeBucket::Medium, SizeBucket::Large];

    pub fn from_count(transistors: usize) -> SizeBucket {
        match transistors {
            0..=19 => SizeBucket::Small,
            20..=30 => SizeBucket::Medium,
            _ => SizeBucket::Large,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SizeBucket::Small => "Small",
            SizeBucket::Medium => "Medium",
            SizeBucket::Large => "Large",
        }
    }
}

/// Buckets by mosfet count only.
pub fn size_bucket(netlist: &Netlist) -> SizeBucket {
    SizeBucket::from_count(netlist.mosfet_count())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BenchmarkEntry {
    pub id: String,
    pub netlist: Netlist,
    pub truth: AnnotationSet,
    pub size_bucket: SizeBucket,
    pub transistor_count: usize,
}

impl BenchmarkEntry {
    pub fn new(id: impl Into<String>, netlist: Netlist, truth: AnnotationSet) -> Self {
        let transistor_count = netlist.mosfet_count();
        BenchmarkEntry {
            id: id.into(),
            size_bucket: SizeBucket::from_count(transistor_count),
            transistor_count,
            netlist,
            truth,
        }
    }
}

/// Anonymize, canonicalize, merge shared-diode mirrors, bucket — in that
/// order.
pub fn prepare(
    id: &str,
    netlist: &Netlist,
    truth: &AnnotationSet,
    reserved: &BTreeSet<String>,
    taxonomy: &TaxonomyMap,
) -> Result<(BenchmarkEntry, RenameMap), LabelError> {
    let (anon, map) = anonymize(netlist, reserved);
    let canonical = canonicalize(truth, taxonomy)?;
    let merged = merge_shared_diode_cms(&canonical, &anon);
    Ok((BenchmarkEntry::new(id, anon, merged), map))
}

/// The bundled demonstration netlists with their annotations.
pub fn bundled_corpus() -> Vec<BenchmarkEntry> {
    let taxonomy = TaxonomyMap::default();
    DEMOS
        .iter()
        .map(|d| {
            let netlist = Netlist::parse(d.netlist).expect("bundled netlist parses");
            let mut truth = AnnotationSet::new();
            for doc in [d.hl1, d.hl2, d.hl3] {
                truth.union(&load_labels(doc, &taxonomy).expect("bundled labels parse"));
            }
            BenchmarkEntry::new(d.id, netlist, truth)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelStats {
    pub instances: usize,
    pub circuits: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub circuits: usize,
    pub labels: BTreeMap<Label, LabelStats>,
    pub buckets: BTreeMap<SizeBucket, usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmptyCorpus;

impl fmt::Display for EmptyCorpus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("corpus is empty")
    }
}

impl core::error::Error for EmptyCorpus {}

pub fn corpus_stats(entries: &[BenchmarkEntry]) -> Result<CorpusStats, EmptyCorpus> {
    if entries.is_empty() {
        return Err(EmptyCorpus);
    }
    let mut labels: BTreeMap<Label, LabelStats> = Label::ALL.iter().map(|l| (*l, LabelStats::default())).collect();
    let mut buckets: BTreeMap<SizeBucket, usize> = SizeBucket::ALL.iter().map(|b| (*b, 0)).collect();
    for e in entries {
        *buckets.get_mut(&e.size_bucket).unwrap() += 1;
        let mut seen = BTreeSet::new();
        for inst in e.truth.iter() {
            let s = labels.get_mut(&inst.label).unwrap();
            s.instances += 1;
            if seen.insert(inst.label) {
                s.circuits += 1;
            }
        }
    }
    Ok(CorpusStats { circuits: entries.len(), labels, buckets })
}

impl fmt::Display for CorpusStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<6} {:<18} {:>10} {:>9}", "level", "label", "#instances", "#circuits")?;
        for (label, s) in &self.labels {
            writeln!(f, "{:<6} {:<18} {:>10} {:>9}", label.level().as_str(), label.as_str(), s.instances, s.circuits)?;
        }
        writeln!(f)?;
        writeln!(f, "{:<8} {:>9}", "bucket", "#circuits")?;
        for (b, n) in &self.buckets {
            writeln!(f, "{:<8} {:>9}", b.as_str(), n)?;
        }
        writeln!(f, "{:<8} {:>9}", "total", self.circuits)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::demos;

    fn set(items: &[&str]) -> BTreeSet<String> {
        items.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn taxonomy_is_total() {
        let t = TaxonomyMap::default();
        assert_eq!(t.len(), 27);
        assert_eq!(t.lookup("MosfetWilsonCurrentMirror"), Some(Label::CM));
        assert_eq!(t.lookup("MosfetFoldedCascodeDifferentialPair"), Some(Label::DiffPair));
        assert_eq!(t.lookup("MosfetCascodedAnalogInverter"), Some(Label::Inverter));
        assert_eq!(t.lookup("MosfetDiodeArray"), Some(Label::MosfetDiode));
        assert_eq!(t.lookup("CapacitorArray (with type=load)"), Some(Label::LoadCap));
        assert_eq!(t.lookup("CM"), Some(Label::CM));
        assert_eq!(t.lookup("Resistor"), None);
    }

    #[test]
    fn load_one_cm() {
        let s = load_labels(r#"[{"sub_circuit_name":"CM","components":["m4","m19"]}]"#, &TaxonomyMap::default()).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s.level(Level::HL2)[0].components, set(&["m4", "m19"]));
        assert!(load_labels("[]", &TaxonomyMap::default()).unwrap().is_empty());
    }

    #[test]
    fn load_pairs_and_errors() {
        let t = TaxonomyMap::default();
        let s = load_labels(r#"[["MosfetDiode", ["m2", "m18"]], ["load_cap", ["c1"]]]"#, &t).unwrap();
        assert_eq!(s.level(Level::HL1).len(), 2);
        assert_eq!(
            load_labels(r#"[{"sub_circuit_name":"Resistor","components":["r1"]}]"#, &t),
            Err(LabelError::UnknownLabel("Resistor".into()))
        );
        assert!(matches!(load_labels("{}", &t), Err(LabelError::MalformedDocument(_))));
        assert!(matches!(load_labels("[1]", &t), Err(LabelError::MalformedDocument(_))));
    }

    #[test]
    fn variants_canonicalize() {
        let t = TaxonomyMap::default();
        let s = load_labels(
            r#"[{"sub_circuit_name":"MosfetWilsonCurrentMirror","components":["m1","m2","m3"]},
                {"sub_circuit_name":"MosfetSimpleCurrentMirror","components":["m3","m2","m1"]}]"#,
            &t,
        )
        .unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.level(Level::HL2)[0].name(), "MosfetWilsonCurrentMirror");
        let c = canonicalize(&s, &t).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c.level(Level::HL2)[0].label, Label::CM);
        assert_eq!(canonicalize(&c, &t).unwrap(), c);
    }

    #[test]
    fn round_trip_document() {
        let t = TaxonomyMap::default();
        for d in DEMOS {
            for doc in [d.hl1, d.hl2, d.hl3] {
                let s = load_labels(doc, &t).unwrap();
                assert_eq!(load_labels(&serialize_labels(&s), &t).unwrap(), s);
            }
        }
    }

    #[test]
    fn merge_cases() {
        let n = Netlist::parse("m1 a a g g nmos\nm2 b a g g nmos\nm3 c a g g nmos\nm4 d e g g nmos\nm5 f e g g nmos").unwrap();
        let s: AnnotationSet = [
            SubcircuitInstance::new(Label::CM, ["m1", "m2"]),
            SubcircuitInstance::new(Label::CM, ["m1", "m3"]),
            SubcircuitInstance::new(Label::DiffPair, ["m1", "m3"]),
        ]
        .into_iter()
        .collect();
        let m = merge_shared_diode_cms(&s, &n);
        let cms: Vec<_> = m.with_label(Label::CM).collect();
        assert_eq!(cms.len(), 1);
        assert_eq!(cms[0].components, set(&["m1", "m2", "m3"]));
        assert_eq!(m.with_label(Label::DiffPair).count(), 1);
        assert_eq!(merge_shared_diode_cms(&m, &n), m);

        // sharing a non-diode device does not merge
        let s: AnnotationSet = [
            SubcircuitInstance::new(Label::CM, ["m2", "m4"]),
            SubcircuitInstance::new(Label::CM, ["m2", "m5"]),
        ]
        .into_iter()
        .collect();
        assert_eq!(merge_shared_diode_cms(&s, &n), s);
    }

    #[test]
    fn buckets() {
        assert_eq!(size_bucket(&Netlist::parse(demos::PROMPT_HL1_HL2).unwrap()), SizeBucket::Small);
        assert_eq!(SizeBucket::from_count(19), SizeBucket::Small);
        assert_eq!(SizeBucket::from_count(20), SizeBucket::Medium);
        assert_eq!(SizeBucket::from_count(30), SizeBucket::Medium);
        assert_eq!(SizeBucket::from_count(31), SizeBucket::Large);
        assert_eq!(size_bucket(&Netlist::parse(demos::REFERENCE_CODE_TEST).unwrap()), SizeBucket::Medium);
    }

    #[test]
    fn stats_single_and_duplicate() {
        let n = Netlist::parse("m1 a a g g nmos\nm2 b a g g nmos").unwrap();
        let truth: AnnotationSet = [SubcircuitInstance::new(Label::CM, ["m1", "m2"])].into_iter().collect();
        let e = BenchmarkEntry::new("x", n, truth);
        let s = corpus_stats(core::slice::from_ref(&e)).unwrap();
        assert_eq!(s.labels[&Label::CM], LabelStats { instances: 1, circuits: 1 });
        let s2 = corpus_stats(&[e.clone(), e]).unwrap();
        assert_eq!(s2.labels[&Label::CM], LabelStats { instances: 2, circuits: 2 });
        assert_eq!(s2.buckets[&SizeBucket::Small], 2);
        assert_eq!(corpus_stats(&[]), Err(EmptyCorpus));
    }

    #[test]
    fn bundled_corpus_covers_every_label() {
        let s = corpus_stats(&bundled_corpus()).unwrap();
        for (label, st) in &s.labels {
            assert!(st.circuits >= 1, "{label} not covered");
        }
    }
}
