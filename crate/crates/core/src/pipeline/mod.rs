//! The two-phase generation pipeline: instructions from demonstrations,
//! merged into one, then an identifier script repaired against execution
//! feedback. Providers and script execution are traits; the `subckt` crate
//! supplies HTTP and subprocess implementations.

mod exec;
mod extract;
mod provider;
mod run;
mod target;
pub mod templates;

pub use exec::{
    classify_exit, ExecStatus, ExecutionResult, IdentifierScript, ProcessExit, RunnerError, ScriptRunner,
    ENTRY_SIGNATURE,
};
pub use extract::{code_blocks, extract_code, extract_instruction};
pub use provider::{FnProvider, Message, Provider, ProviderError, ScriptedProvider, Speaker, Unreachable};
pub use run::{
    fold_instructions, generate_identifier, generate_instruction, identify_with_codebase, merge_instructions,
    repair_identifier, run_pipeline, Codebase, CodebaseEntry, IdentifyFailure, Instruction, LogRecord, Outcome,
    PipelineConfig, PipelineError, RunLog, Session, Step, DEFAULT_RETRY_LIMIT,
};
pub use target::{render_expected, render_ground_truth, render_test_cases, Demo, Target};
pub use templates::{render, template, PromptTemplate, RenderError, TemplateId};

/// The bundled demonstrations as pipeline demos.
pub fn bundled_demos() -> alloc::vec::Vec<Demo> {
    crate::benchmark::bundled_corpus()
        .into_iter()
        .map(|e| Demo { id: e.id, netlist: e.netlist, truth: e.truth })
        .collect()
}
