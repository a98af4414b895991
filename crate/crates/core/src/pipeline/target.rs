use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::annotation::{natural_cmp, AnnotationSet, Label, SubcircuitInstance};
use crate::netlist::Netlist;

/// A unit of generation: one identifier script per target.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Target {
    pub name: String,
    pub labels: Vec<Label>,
    /// Phrase substituted for `{subcircuit}` in prompts.
    pub description: String,
}

impl Target {
    pub fn new(name: &str, labels: &[Label], description: &str) -> Self {
        Target { name: name.to_string(), labels: labels.to_vec(), description: description.to_string() }
    }

    pub fn builtins() -> Vec<Target> {
        alloc::vec![
            Target::new(
                "HL1",
                &[Label::MosfetDiode, Label::LoadCap, Label::CompensationCap],
                "diode-connected transistors and load/compensation capacitors",
            ),
            Target::new("CM", &[Label::CM], "Current Mirrors"),
            Target::new("DiffPair", &[Label::DiffPair], "Differential Pairs"),
            Target::new("Inverter", &[Label::Inverter], "Inverters"),
            Target::new(
                "HL3",
                &[
                    Label::FirstStage,
                    Label::SecondStage,
                    Label::ThirdStage,
                    Label::FeedBack,
                    Label::LoadPart,
                    Label::BiasPart,
                ],
                "amplification stages (first, second, third stage), feedback stage, load and bias parts",
            ),
        ]
    }

    pub fn builtin(name: &str) -> Option<Target> {
        Target::builtins().into_iter().find(|t| t.name.eq_ignore_ascii_case(name))
    }

    /// Whether `truth` holds at least one instance of this target's labels.
    pub fn covered_by(&self, truth: &AnnotationSet) -> bool {
        self.labels.iter().any(|l| truth.with_label(*l).next().is_some())
    }
}

/// A labeled demonstration netlist.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Demo {
    pub id: String,
    pub netlist: Netlist,
    pub truth: AnnotationSet,
}

fn py_list(inst: &SubcircuitInstance) -> String {
    let items: Vec<String> = inst.sorted_components().iter().map(|c| format!("'{c}'")).collect();
    format!("[{}]", items.join(", "))
}

fn noun(label: Label) -> &'static str {
    match label {
        Label::MosfetDiode => "diode-connected transistors",
        Label::LoadCap => "load capacitor",
        Label::CompensationCap => "compensation capacitor",
        Label::CM => "Current Mirrors",
        Label::DiffPair => "Differential Pairs",
        Label::Inverter => "Inverters",
        Label::FirstStage => "the first amplification stage",
        Label::SecondStage => "the second amplification stage",
        Label::ThirdStage => "the third amplification stage",
        Label::FeedBack => "the feedback stage",
        Label::LoadPart => "load parts",
        Label::BiasPart => "bias parts",
    }
}

/// The "Ground Truth" section of an instruction-generation prompt.
pub fn render_ground_truth(target: &Target, truth: &AnnotationSet) -> String {
    let mut lines = Vec::new();
    for &label in &target.labels {
        let insts: Vec<&SubcircuitInstance> = truth.with_label(label).collect();
        match label.level() {
            crate::Level::HL1 => {
                let mut devs: Vec<&str> =
                    insts.iter().flat_map(|i| i.components.iter().map(String::as_str)).collect();
                devs.sort_by(|a, b| natural_cmp(a, b));
                devs.dedup();
                let list: Vec<String> = devs.iter().map(|d| format!("'{d}'")).collect();
                let list = if list.is_empty() { String::new() } else { format!("[{}]", list.join(", ")) };
                lines.push(format!(
                    "- In the given SPICE netlist, there are a total of {} **{}**: {}",
                    devs.len(),
                    noun(label),
                    list
                ));
            }
            crate::Level::HL2 => {
                let groups: Vec<String> = insts.iter().map(|i| py_list(i)).collect();
                lines.push(format!(
                    "In the given SPICE netlist, there are a total of {} **{}**: {}",
                    insts.len(),
                    noun(label),
                    groups.join(", ")
                ));
            }
            crate::Level::HL3 => {
                for inst in insts {
                    lines.push(format!(
                        "- In the given SPICE netlist, there are a total of {} transistor(s) belong to **{}**: {}",
                        inst.size(),
                        noun(label),
                        py_list(inst)
                    ));
                }
            }
        }
    }
    lines.join("\n\n")
}

/// The expected result of `findSubCircuit` for `target` on `truth`, written
/// as a Python literal.
pub fn render_expected(target: &Target, truth: &AnnotationSet) -> String {
    let items: Vec<String> = target
        .labels
        .iter()
        .flat_map(|l| truth.with_label(*l))
        .map(|i| format!("['{}', {}]", i.label.as_str(), py_list(i)))
        .collect();
    format!("[{}]", items.join(", "))
}

/// The test-case block appended to a code-generation prompt.
pub fn render_test_cases(target: &Target, demo: &Demo) -> String {
    format!(
        "**Test Case 1**\n\n**Input SPICE Netlist**\n\n```\n{}```\n\n**Expected Output**  (order of list elements does not matter)\n\n```\n{}\n```",
        demo.netlist.serialize(),
        render_expected(target, &demo.truth)
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::benchmark::bundled_corpus;

    fn demo(i: usize) -> Demo {
        let e = &bundled_corpus()[i];
        Demo { id: e.id.clone(), netlist: e.netlist.clone(), truth: e.truth.clone() }
    }

    #[test]
    fn hl1_ground_truth_text() {
        let gt = render_ground_truth(&Target::builtin("HL1").unwrap(), &demo(0).truth);
        assert_eq!(
            gt,
            "- In the given SPICE netlist, there are a total of 3 **diode-connected transistors**: ['m13', 'm14', 'm15']\n\n\
             - In the given SPICE netlist, there are a total of 1 **load capacitor**: ['c1']\n\n\
             - In the given SPICE netlist, there are a total of 0 **compensation capacitor**: "
        );
    }

    #[test]
    fn cm_ground_truth_text() {
        let gt = render_ground_truth(&Target::builtin("CM").unwrap(), &demo(0).truth);
        assert_eq!(
            gt,
            "In the given SPICE netlist, there are a total of 3 **Current Mirrors**: \
             ['m3', 'm4', 'm5', 'm6'], ['m1', 'm2', 'm7', 'm8', 'm15'], ['m10', 'm14']"
        );
    }

    #[test]
    fn hl3_ground_truth_text() {
        let gt = render_ground_truth(&Target::builtin("HL3").unwrap(), &demo(1).truth);
        assert!(gt.starts_with("- In the given SPICE netlist, there are a total of 2 transistor(s) belong to **the first amplification stage**: ['m7', 'm8']"));
        assert!(gt.contains("9 transistor(s) belong to **bias parts**"));
    }

    #[test]
    fn expected_output_literal() {
        let t = Target::builtin("HL1").unwrap();
        assert_eq!(
            render_expected(&t, &demo(2).truth),
            "[['MosfetDiode', ['m2', 'm3', 'm17', 'm18']], ['load_cap', ['c1', 'c2']]]"
        );
    }
}
