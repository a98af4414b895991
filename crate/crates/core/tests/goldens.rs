use subckt_core::benchmark::bundled_corpus;
use subckt_core::detect::detect;
use subckt_core::{Level, NetRoles, RoleOverrides};

#[test]
fn detectors_reproduce_bundled_annotations() {
    let mut failures = Vec::new();
    for entry in bundled_corpus() {
        let roles = NetRoles::classify(&entry.netlist, &RoleOverrides::default()).unwrap();
        for level in Level::ALL {
            let got = detect(&entry.netlist, &roles, &[level]).canonical_form();
            let want = entry.truth.restrict(&[level]).canonical_form();
            if got != want {
                failures.push(format!(
                    "{} {}:\n  missing {:?}\n  extra   {:?}",
                    entry.id,
                    level.as_str(),
                    want.difference(&got).collect::<Vec<_>>(),
                    got.difference(&want).collect::<Vec<_>>()
                ));
            }
        }
    }
    assert!(failures.is_empty(), "{}", failures.join("\n"));
}
