//! Strict cluster-level and node-level scoring.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::annotation::{AnnotationSet, Label, Level, SubcircuitInstance};

pub const NONE_LABEL: &str = "<none>";

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MetricsError {
    LevelMismatch { expected: Level, label: Label },
    EmptyCorpus,
}

impl fmt::Display for MetricsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MetricsError::LevelMismatch { expected, label } => {
                write!(f, "label {label} belongs to {}, expected {expected}", label.level())
            }
            MetricsError::EmptyCorpus => f.write_str("no netlists to aggregate"),
        }
    }
}

impl core::error::Error for MetricsError {}

/// Raw numerators and denominators, kept so corpora can be micro-averaged.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub matched_pred: usize,
    pub pred: usize,
    pub matched_truth: usize,
    pub truth: usize,
}

impl Counts {
    pub fn add(&mut self, other: &Counts) {
        self.matched_pred += other.matched_pred;
        self.pred += other.pred;
        self.matched_truth += other.matched_truth;
        self.truth += other.truth;
    }
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Scores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub counts: Counts,
}

impl Scores {
    pub fn from_counts(counts: Counts) -> Scores {
        let precision = ratio(counts.matched_pred, counts.pred);
        let recall = ratio(counts.matched_truth, counts.truth);
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        Scores { precision, recall, f1, counts }
    }
}

fn check_level(insts: &[SubcircuitInstance], level: Level) -> Result<(), MetricsError> {
    match insts.iter().find(|i| i.level() != level) {
        Some(i) => Err(MetricsError::LevelMismatch { expected: level, label: i.label }),
        None => Ok(()),
    }
}

/// Exact (label, component set) matching, weighted by device count. Each
/// truth instance can be matched by at most one prediction.
pub fn strict_scores(
    pred: &[SubcircuitInstance],
    truth: &[SubcircuitInstance],
    level: Level,
) -> Result<Scores, MetricsError> {
    check_level(pred, level)?;
    check_level(truth, level)?;
    let mut used = vec![false; truth.len()];
    let mut counts = Counts {
        pred: pred.iter().map(SubcircuitInstance::size).sum(),
        truth: truth.iter().map(SubcircuitInstance::size).sum(),
        ..Counts::default()
    };
    for p in pred {
        let hit = truth
            .iter()
            .enumerate()
            .find(|(k, t)| !used[*k] && t.label == p.label && t.components == p.components);
        if let Some((k, t)) = hit {
            used[k] = true;
            counts.matched_pred += p.size();
            counts.matched_truth += t.size();
        }
    }
    Ok(Scores::from_counts(counts))
}

fn pair_counts<'a>(
    insts: &'a [SubcircuitInstance],
    universe: &BTreeSet<String>,
) -> BTreeMap<(&'a str, Label), usize> {
    let mut m = BTreeMap::new();
    for inst in insts {
        for c in &inst.components {
            if universe.contains(c) {
                *m.entry((c.as_str(), inst.label)).or_insert(0) += 1;
            } else {
                log::warn!("device {c} is outside the scoring universe and is ignored");
            }
        }
    }
    m
}

/// Per-device multi-label scoring over the multisets of (device, label)
/// pairs, micro-averaged over the labels of `level`. Devices outside
/// `universe` are ignored.
pub fn node_scores(
    pred: &[SubcircuitInstance],
    truth: &[SubcircuitInstance],
    level: Level,
    universe: &BTreeSet<String>,
) -> Result<Scores, MetricsError> {
    check_level(pred, level)?;
    check_level(truth, level)?;
    let p = pair_counts(pred, universe);
    let t = pair_counts(truth, universe);
    let tp: usize = p.iter().map(|(k, n)| (*n).min(t.get(k).copied().unwrap_or(0))).sum();
    Ok(Scores::from_counts(Counts {
        matched_pred: tp,
        pred: p.values().sum(),
        matched_truth: tp,
        truth: t.values().sum(),
    }))
}

/// Rows are ground truth, columns predictions; the last label is `<none>`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub labels: Vec<String>,
    pub counts: Vec<Vec<usize>>,
}

impl ConfusionMatrix {
    pub fn empty(level: Level) -> ConfusionMatrix {
        let mut labels: Vec<String> = level.labels().iter().map(|l| l.as_str().to_string()).collect();
        labels.push(NONE_LABEL.to_string());
        let n = labels.len();
        ConfusionMatrix { labels, counts: vec![vec![0; n]; n] }
    }

    fn index(&self, name: &str) -> usize {
        self.labels.iter().position(|l| l == name).expect("label of this level")
    }

    pub fn get(&self, truth: &str, pred: &str) -> usize {
        self.counts[self.index(truth)][self.index(pred)]
    }

    pub fn row_sum(&self, truth: &str) -> usize {
        self.counts[self.index(truth)].iter().sum()
    }

    pub fn add(&mut self, other: &ConfusionMatrix) {
        assert_eq!(self.labels, other.labels, "confusion matrices of different levels");
        for (row, orow) in self.counts.iter_mut().zip(&other.counts) {
            for (c, o) in row.iter_mut().zip(orow) {
                *c += o;
            }
        }
    }
}

impl fmt::Display for ConfusionMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let w = self.labels.iter().map(String::len).max().unwrap_or(6).max(6);
        write!(f, "{:w$}", "truth\\pred")?;
        for l in &self.labels {
            write!(f, " {l:>w$}")?;
        }
        writeln!(f)?;
        for (l, row) in self.labels.iter().zip(&self.counts) {
            write!(f, "{l:w$}")?;
            for c in row {
                write!(f, " {c:>w$}")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

fn device_labels(insts: &[SubcircuitInstance]) -> BTreeMap<&str, BTreeSet<Label>> {
    let mut m: BTreeMap<&str, BTreeSet<Label>> = BTreeMap::new();
    for inst in insts {
        for c in &inst.components {
            m.entry(c.as_str()).or_default().insert(inst.label);
        }
    }
    m
}

/// One count per (device, truth label). A matching prediction wins over any
/// other predicted label; devices predicted but unlabeled land in the
/// `<none>` row, and universe devices with neither land on `<none>/<none>`.
pub fn confusion(
    pred: &[SubcircuitInstance],
    truth: &[SubcircuitInstance],
    level: Level,
    universe: &BTreeSet<String>,
) -> Result<ConfusionMatrix, MetricsError> {
    check_level(pred, level)?;
    check_level(truth, level)?;
    let mut m = ConfusionMatrix::empty(level);
    let none = m.index(NONE_LABEL);
    let p = device_labels(pred);
    let t = device_labels(truth);
    let empty = BTreeSet::new();
    for (dev, labels) in &t {
        let predicted = p.get(dev).unwrap_or(&empty);
        for l in labels {
            let row = m.index(l.as_str());
            if predicted.contains(l) {
                m.counts[row][row] += 1;
            } else if predicted.is_empty() {
                m.counts[row][none] += 1;
            } else {
                for other in predicted {
                    let col = m.index(other.as_str());
                    m.counts[row][col] += 1;
                }
            }
        }
    }
    for (dev, labels) in &p {
        if t.contains_key(dev) {
            continue;
        }
        for l in labels {
            let col = m.index(l.as_str());
            m.counts[none][col] += 1;
        }
    }
    for dev in universe {
        if !t.contains_key(dev.as_str()) && !p.contains_key(dev.as_str()) {
            m.counts[none][none] += 1;
        }
    }
    Ok(m)
}

/// Scores of one netlist at one level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetlistScores {
    pub id: String,
    pub level: Level,
    pub strict: Scores,
    pub node: Scores,
}

/// Scores a prediction against ground truth for each of `levels`, returning
/// per-level scores and confusion matrices.
pub fn evaluate_netlist(
    id: &str,
    pred: &AnnotationSet,
    truth: &AnnotationSet,
    levels: &[Level],
    universe: &BTreeSet<String>,
) -> (Vec<NetlistScores>, Vec<ConfusionMatrix>) {
    let mut scores = Vec::new();
    let mut matrices = Vec::new();
    for &level in levels {
        let (p, t) = (pred.level(level), truth.level(level));
        // Slices from an AnnotationSet level never mix levels.
        let strict = strict_scores(p, t, level).expect("level-grouped instances");
        let node = node_scores(p, t, level, universe).expect("level-grouped instances");
        scores.push(NetlistScores { id: id.to_string(), level, strict, node });
        matrices.push(confusion(p, t, level, universe).expect("level-grouped instances"));
    }
    (scores, matrices)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelSummary {
    pub level: Level,
    pub netlists: usize,
    /// Micro-averaged over the corpus.
    pub strict: Scores,
    pub node: Scores,
    /// Unweighted means of per-netlist F1.
    pub mean_strict_f1: f64,
    pub mean_node_f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub levels: Vec<LevelSummary>,
    pub confusion: BTreeMap<Level, ConfusionMatrix>,
    pub per_netlist: Vec<NetlistScores>,
}

pub fn aggregate(per_netlist: Vec<NetlistScores>) -> Result<EvalReport, MetricsError> {
    if per_netlist.is_empty() {
        return Err(MetricsError::EmptyCorpus);
    }
    let mut levels = Vec::new();
    for level in Level::ALL {
        let rows: Vec<&NetlistScores> = per_netlist.iter().filter(|s| s.level == level).collect();
        if rows.is_empty() {
            continue;
        }
        let (mut strict, mut node) = (Counts::default(), Counts::default());
        for r in &rows {
            strict.add(&r.strict.counts);
            node.add(&r.node.counts);
        }
        let n = rows.len() as f64;
        levels.push(LevelSummary {
            level,
            netlists: rows.len(),
            strict: Scores::from_counts(strict),
            node: Scores::from_counts(node),
            mean_strict_f1: rows.iter().map(|r| r.strict.f1).sum::<f64>() / n,
            mean_node_f1: rows.iter().map(|r| r.node.f1).sum::<f64>() / n,
        });
    }
    Ok(EvalReport { levels, confusion: BTreeMap::new(), per_netlist })
}

impl EvalReport {
    pub fn add_confusion(&mut self, matrix: &ConfusionMatrix, level: Level) {
        self.confusion
            .entry(level)
            .or_insert_with(|| ConfusionMatrix::empty(level))
            .add(matrix);
    }

    pub fn level(&self, level: Level) -> Option<&LevelSummary> {
        self.levels.iter().find(|l| l.level == level)
    }
}

impl fmt::Display for EvalReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{:<6} {:>4} {:>9} {:>9} {:>9} {:>9} {:>9} {:>9} {:>12}",
            "level", "n", "PR_strict", "RC_strict", "F1_strict", "PR_node", "RC_node", "F1_node", "meanF1_strict"
        )?;
        for l in &self.levels {
            writeln!(
                f,
                "{:<6} {:>4} {:>9.4} {:>9.4} {:>9.4} {:>9.4} {:>9.4} {:>9.4} {:>12.4}",
                l.level.as_str(),
                l.netlists,
                l.strict.precision,
                l.strict.recall,
                l.strict.f1,
                l.node.precision,
                l.node.recall,
                l.node.f1,
                l.mean_strict_f1
            )?;
        }
        for (level, m) in &self.confusion {
            writeln!(f, "\nconfusion {level}")?;
            write!(f, "{m}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inst(label: Label, c: &[&str]) -> SubcircuitInstance {
        SubcircuitInstance::new(label, c.iter().copied())
    }

    fn universe(n: usize) -> BTreeSet<String> {
        (1..=n).map(|i| alloc::format!("m{i}")).collect()
    }

    #[test]
    fn identity_scores_one() {
        let t = [inst(Label::CM, &["m1", "m2"]), inst(Label::DiffPair, &["m3", "m4"])];
        let s = strict_scores(&t, &t, Level::HL2).unwrap();
        assert_eq!((s.precision, s.recall, s.f1), (1.0, 1.0, 1.0));
        let n = node_scores(&t, &t, Level::HL2, &universe(4)).unwrap();
        assert_eq!((n.precision, n.recall, n.f1), (1.0, 1.0, 1.0));
    }

    #[test]
    fn empty_prediction_is_zero() {
        let t = [inst(Label::CM, &["m1", "m2"])];
        let s = node_scores(&[], &t, Level::HL2, &universe(2)).unwrap();
        assert_eq!((s.precision, s.recall, s.f1), (0.0, 0.0, 0.0));
        let s = strict_scores(&[], &[], Level::HL2).unwrap();
        assert_eq!(s.f1, 0.0);
    }

    #[test]
    fn level_mismatch() {
        let t = [inst(Label::CM, &["m1", "m2"])];
        assert_eq!(
            strict_scores(&t, &t, Level::HL1),
            Err(MetricsError::LevelMismatch { expected: Level::HL1, label: Label::CM })
        );
    }

    #[test]
    fn truth_instance_matches_once() {
        let t = [inst(Label::CM, &["m1", "m2"])];
        let p = [inst(Label::CM, &["m1", "m2"]), inst(Label::CM, &["m1", "m2"])];
        let s = strict_scores(&p, &t, Level::HL2).unwrap();
        assert_eq!(s.precision, 0.5);
        assert_eq!(s.recall, 1.0);
    }

    #[test]
    fn partial_cluster_is_strict_miss_but_node_hit() {
        let t = [inst(Label::CM, &["m1", "m2", "m3"])];
        let p = [inst(Label::CM, &["m1", "m2"])];
        let s = strict_scores(&p, &t, Level::HL2).unwrap();
        let n = node_scores(&p, &t, Level::HL2, &universe(3)).unwrap();
        assert_eq!(s.precision, 0.0);
        assert_eq!(n.precision, 1.0);
        assert!((n.recall - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn confusion_sentinel_and_misclass() {
        let u = universe(3);
        let m = confusion(&[], &[inst(Label::CM, &["m1"])], Level::HL2, &u).unwrap();
        assert_eq!(m.get("CM", NONE_LABEL), 1);
        assert_eq!(m.get(NONE_LABEL, NONE_LABEL), 2);
        let m = confusion(&[inst(Label::CM, &["m1"])], &[inst(Label::Inverter, &["m1"])], Level::HL2, &u).unwrap();
        assert_eq!(m.get("Inverter", "CM"), 1);
        let m = confusion(&[inst(Label::CM, &["m2"])], &[], Level::HL2, &u).unwrap();
        assert_eq!(m.get(NONE_LABEL, "CM"), 1);
    }

    #[test]
    fn confusion_matching_label_wins() {
        let u = universe(2);
        let pred = [inst(Label::CM, &["m1"]), inst(Label::Inverter, &["m1"])];
        let truth = [inst(Label::CM, &["m1"])];
        let m = confusion(&pred, &truth, Level::HL2, &u).unwrap();
        assert_eq!(m.get("CM", "CM"), 1);
        assert_eq!(m.row_sum("CM"), 1);
    }

    #[test]
    fn confusion_diagonal_on_identity() {
        let t = [inst(Label::CM, &["m1", "m2"]), inst(Label::DiffPair, &["m3", "m4"])];
        let m = confusion(&t, &t, Level::HL2, &universe(4)).unwrap();
        assert_eq!(m.get("CM", "CM"), 2);
        assert_eq!(m.get("DiffPair", "DiffPair"), 2);
        let off: usize = m.counts.iter().enumerate().flat_map(|(r, row)| row.iter().enumerate().filter(move |(c, _)| *c != r).map(|(_, v)| *v)).sum();
        assert_eq!(off, 0);
    }

    fn ns(id: &str, strict: Counts) -> NetlistScores {
        NetlistScores {
            id: id.to_string(),
            level: Level::HL2,
            strict: Scores::from_counts(strict),
            node: Scores::from_counts(strict),
        }
    }

    #[test]
    fn aggregate_single_equals_own() {
        let c = Counts { matched_pred: 3, pred: 4, matched_truth: 3, truth: 6 };
        let r = aggregate(alloc::vec![ns("a", c)]).unwrap();
        assert_eq!(r.level(Level::HL2).unwrap().strict, Scores::from_counts(c));
    }

    #[test]
    fn aggregate_micro_average() {
        let good = Counts { matched_pred: 4, pred: 4, matched_truth: 4, truth: 4 };
        let bad = Counts { matched_pred: 0, pred: 4, matched_truth: 0, truth: 4 };
        let r = aggregate(alloc::vec![ns("a", good), ns("b", bad)]).unwrap();
        let l = r.level(Level::HL2).unwrap();
        assert_eq!(l.strict.precision, 0.5);
        assert_eq!(l.strict.recall, 0.5);
        assert_eq!(l.mean_strict_f1, 0.5);
        assert_eq!(aggregate(alloc::vec![]), Err(MetricsError::EmptyCorpus));
    }
}
