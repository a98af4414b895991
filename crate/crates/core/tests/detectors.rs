use std::collections::BTreeSet;

use subckt_core::benchmark::bundled_corpus;
use subckt_core::demos;
use subckt_core::detect::*;
use subckt_core::*;

fn parse(text: &str) -> Netlist {
    Netlist::parse(text).unwrap()
}

fn roles(n: &Netlist) -> NetRoles {
    NetRoles::classify(n, &RoleOverrides::default()).unwrap()
}

fn groups(insts: &[SubcircuitInstance]) -> BTreeSet<Vec<&str>> {
    insts.iter().map(|i| i.sorted_components()).collect()
}

fn one(items: &[&[&'static str]]) -> BTreeSet<Vec<&'static str>> {
    items.iter().map(|g| {
        let mut v = g.to_vec();
        v.sort_by(|a, b| subckt_core::annotation::natural_cmp(a, b));
        v
    }).collect()
}

#[test]
fn capacitor_roles_on_generated_code_netlist() {
    let n = parse("c1 a out\nc2 out ground\nm1 a b ground ground nmos");
    let caps = detect_capacitor_roles(&n, &roles(&n));
    let load: Vec<_> = caps.iter().filter(|i| i.label == Label::LoadCap).collect();
    let comp: Vec<_> = caps.iter().filter(|i| i.label == Label::CompensationCap).collect();
    assert_eq!(load.len(), 1);
    assert_eq!(load[0].sorted_components(), ["c2"]);
    assert_eq!(comp[0].sorted_components(), ["c1"]);
}

#[test]
fn capacitor_free_and_diode_free() {
    let n = parse("m1 a b ground ground nmos");
    assert!(detect_capacitor_roles(&n, &roles(&n)).is_empty());
    assert!(detect_diode_connected(&n).is_empty());
}

#[test]
fn minimal_simple_mirror() {
    let n = parse("m1 g g ground ground nmos\nm2 x g ground ground nmos");
    assert_eq!(groups(&detect_current_mirrors(&n)), one(&[&["m1", "m2"]]));
}

#[test]
fn diode_less_gate_group_is_not_a_mirror() {
    let n = parse("m1 a g ground ground nmos\nm2 b g ground ground nmos");
    assert!(detect_current_mirrors(&n).is_empty());
}

#[test]
fn mirror_members_share_channel() {
    let n = parse("m1 g g ground ground nmos\nm2 x g ground ground pmos");
    assert!(detect_current_mirrors(&n).is_empty());
}

#[test]
fn diff_pairs_on_prompt_netlists() {
    let n = parse(demos::PROMPT_HL1_HL2);
    assert_eq!(groups(&detect_diff_pairs(&n, &roles(&n))), one(&[&["m11", "m12"]]));
    let n = parse(demos::PROMPT_HL3);
    assert_eq!(groups(&detect_diff_pairs(&n, &roles(&n))), one(&[&["m7", "m8"]]));
    let n = parse(demos::REFERENCE_CODE_TEST);
    assert_eq!(groups(&detect_diff_pairs(&n, &roles(&n))), one(&[&["m12", "m13"]]));
}

#[test]
fn single_input_has_no_pair() {
    let n = parse("m1 a in1 t t nmos\nm2 b in1 t t nmos");
    assert!(detect_diff_pairs(&n, &roles(&n)).is_empty());
}

#[test]
fn cascoded_inverter_fragment() {
    let n = parse("m3 out b supply supply pmos\nm6 out a e e nmos\nm7 e d ground ground nmos");
    assert_eq!(groups(&detect_inverters(&n, &roles(&n))), one(&[&["m3", "m6", "m7"]]));
}

#[test]
fn pmos_only_has_no_inverter() {
    let n = parse("m1 x a supply supply pmos\nm2 x b supply supply pmos");
    assert!(detect_inverters(&n, &roles(&n)).is_empty());
}

#[test]
fn two_independent_inverters() {
    let n = parse(
        "m1 x a supply supply pmos\nm2 x a ground ground nmos\nm3 y b supply supply pmos\nm4 y b ground ground nmos",
    );
    assert_eq!(groups(&detect_inverters(&n, &roles(&n))), one(&[&["m1", "m2"], &["m3", "m4"]]));
}

#[test]
fn hl2_union_on_prompt_netlist() {
    let n = parse(demos::PROMPT_HL1_HL2);
    let hl2 = detect_hl2(&n, &roles(&n));
    assert_eq!(hl2.with_label(Label::CM).count(), 3);
    assert_eq!(hl2.with_label(Label::DiffPair).count(), 1);
    assert!(detect_hl2(&Netlist::default(), &NetRoles::default()).is_empty());
}

#[test]
fn no_inputs_means_no_stages() {
    let n = parse("m1 a a ground ground nmos\nm2 out a ground ground nmos\nm3 out b supply supply pmos");
    let r = roles(&n);
    assert!(detect_hl3(&n, &r, &detect_hl2(&n, &r)).is_empty());
}

#[test]
fn minimal_two_stage() {
    let n = parse(
        "m1 x in1 t t nmos\nm2 y in2 t t nmos\nm3 t ibias ground ground nmos\nm4 x x supply supply pmos\nm5 y x supply supply pmos\nm6 out y supply supply pmos\nm7 out ibias ground ground nmos",
    );
    let r = roles(&n);
    let hl3 = detect_hl3(&n, &r, &detect_hl2(&n, &r));
    let get = |l| hl3.with_label(l).next().map(|i| i.sorted_components());
    assert_eq!(get(Label::FirstStage), Some(vec!["m1", "m2"]));
    assert_eq!(get(Label::SecondStage), Some(vec!["m6"]));
}

#[test]
fn oracle_small_cases() {
    assert!(brute_force_cm_oracle(&Netlist::default()).unwrap().is_empty());
    assert!(brute_force_cm_oracle(&parse("m1 a a ground ground nmos")).unwrap().is_empty());
    let n = parse(demos::PROMPT_HL1_HL2);
    let oracle: BTreeSet<_> = brute_force_cm_oracle(&n).unwrap().into_iter().map(|i| i.components).collect();
    let fast: BTreeSet<_> = detect_current_mirrors(&n).into_iter().map(|i| i.components).collect();
    assert_eq!(oracle, fast);
    let big = parse(demos::REFERENCE_CODE_TEST);
    assert!(matches!(brute_force_cm_oracle(&big), Err(OracleError::TooLarge(_))));
}

#[test]
fn structural_invariants_on_bundled_demos() {
    for e in bundled_corpus() {
        let r = roles(&e.netlist);
        let hl2 = detect_hl2(&e.netlist, &r);
        let channel = |name: &str| e.netlist.device(name).and_then(Device::channel);
        for inst in hl2.iter() {
            let channels: BTreeSet<_> = inst.components.iter().map(|c| channel(c)).collect();
            match inst.label {
                Label::Inverter => assert_eq!(channels.len(), 2, "{}", e.id),
                _ => assert_eq!(channels.len(), 1, "{}", e.id),
            }
        }
        let cms: Vec<_> = hl2.with_label(Label::CM).collect();
        for (i, a) in cms.iter().enumerate() {
            for b in &cms[i + 1..] {
                let shared_diode = a.components.intersection(&b.components).any(|c| {
                    e.netlist.device(c).is_some_and(Device::is_diode_connected)
                });
                assert!(!shared_diode, "{}", e.id);
            }
        }
        let hl3 = detect_hl3(&e.netlist, &r, &hl2);
        let stages: Vec<BTreeSet<String>> = [Label::FirstStage, Label::SecondStage, Label::ThirdStage]
            .iter()
            .map(|l| hl3.with_label(*l).flat_map(|i| i.components.clone()).collect())
            .collect();
        for i in 0..3 {
            for j in i + 1..3 {
                assert!(stages[i].is_disjoint(&stages[j]), "{}", e.id);
            }
        }
        assert_eq!(detect(&e.netlist, &r, &Level::ALL), detect(&e.netlist, &r, &Level::ALL));
    }
}
