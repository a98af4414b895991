//! The bundled six-netlist demonstration corpus.
//!
//! Netlists are plain text; annotations are JSON documents in the
//! `[{"sub_circuit_name": .., "components": [..]}]` schema, one per level.
//! Parsing the documents is left to callers with a JSON reader.

/// Single-ended folded amplifier used for the HL1 and HL2 instruction prompts.
pub const PROMPT_HL1_HL2: &str = include_str!("../demos/demo1.sp");
/// Two-stage Miller amplifier used for the HL3 instruction prompt.
pub const PROMPT_HL3: &str = include_str!("../demos/demo2.sp");
/// Fully differential amplifier used as the code-generation test case.
pub const CODEGEN_TEST_CASE: &str = include_str!("../demos/demo3.sp");
/// Folded-cascode two-stage amplifier embedded in the reference CM script.
pub const REFERENCE_CODE_TEST: &str = include_str!("../demos/demo4.sp");
/// Folded-cascode one-stage amplifier used by the baseline prompts.
pub const INSTRUCTION_FOLLOWING: &str = include_str!("../demos/demo5.sp");
/// Three-stage single-ended amplifier with nested compensation.
pub const THREE_STAGE: &str = include_str!("../demos/demo6.sp");

#[derive(Debug, Clone, Copy)]
pub struct DemoFiles {
    pub id: &'static str,
    pub netlist: &'static str,
    pub hl1: &'static str,
    pub hl2: &'static str,
    pub hl3: &'static str,
}

macro_rules! demo {
    ($id:literal) => {
        DemoFiles {
            id: $id,
            netlist: include_str!(concat!("../demos/", $id, ".sp")),
            hl1: include_str!(concat!("../demos/", $id, ".hl1")),
            hl2: include_str!(concat!("../demos/", $id, ".hl2")),
            hl3: include_str!(concat!("../demos/", $id, ".hl3")),
        }
    };
}

pub const DEMOS: [DemoFiles; 6] = [
    demo!("demo1"),
    demo!("demo2"),
    demo!("demo3"),
    demo!("demo4"),
    demo!("demo5"),
    demo!("demo6"),
];
