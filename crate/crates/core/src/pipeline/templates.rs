//! Prompt templates and `{placeholder}` rendering. `{{` and `}}` render as
//! literal braces; any other `{` not starting a placeholder is kept as is.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum TemplateId {
    InstructionGen,
    InstructionMerge,
    CodeGen,
    CodeRepair,
    InstructionFollowing,
    DirectPrompting,
    DirectCodeGen,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PromptTemplate {
    pub id: TemplateId,
    pub body: &'static str,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RenderError {
    MissingBinding(String),
}

impl fmt::Display for RenderError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RenderError::MissingBinding(name) => write!(f, "no binding for placeholder {{{name}}}"),
        }
    }
}

impl core::error::Error for RenderError {}

pub const INSTRUCTION_GEN: &str = "\
You are an experienced analog designer. You are developing an instruction on how to identify **{subcircuit}** in flat SPICE netlists.
The instruction should be in a step-by-step format and will be used by other LLMs to find **{subcircuit}** in new, unseen SPICE netlists.

A labeled example is provided, consisting of a flat SPICE netlist and the corresponding ground truth:

SPICE netlist:

{netlist}

Ground Truth:

{ground_truth}

Your task is to:

- Analyze the example to extract reusable, step-by-step instructions that can be used to identify the same **{subcircuit}** in new, unseen SPICE netlists.

- Use a clear, step-by-step format in Markdown, and wrap the generated instruction between `<instruction>` and `</instruction>` tags. The instruction should be general and applicable to new, unseen SPICE netlists.

- Do not include any explanation, description, or comments related to the demonstration example.
";

pub const INSTRUCTION_MERGE: &str = "\
You are an experienced analog designer. You are developing an instruction on how to identify {subcircuit} in flat SPICE netlists.
The instruction should be in a step-by-step format and will be used by other LLMs to identify {subcircuit} in new, unseen SPICE netlists.

You are given two step-by-step instructions derived from previous, different examples:

**Instruction 1**:

{instruction_1}

**Instruction 2**:

{instruction_2}

Your task is to:

- Analyze and combine these two instructions into a reusable, step-by-step instruction that can be used to identify the same {subcircuit} in new, unseen SPICE netlists.

- Do not include any duplicated information in the new instruction (e.g., duplicate steps).

- Use a clear, step-by-step format in Markdown, and wrap the generated instruction between `<instruction>` and `</instruction>` tags. The instruction should be general and easy for other large language models to follow when applied to new, unseen SPICE netlists.

- Do not include any explanation, description, or comments related to the demonstration examples.
";

pub const CODE_GEN: &str = "\
You are an experienced Python programmer working on identifying {subcircuit} in a SPICE netlist.
You are given the following step-by-step instructions on how to identify {subcircuit} in a SPICE netlist.

Your task is to:

- Translate the given instructions for identifying {subcircuit} into a Python script.

- The generated Python script should extract a list of all available {subcircuit} from a new, unseen SPICE netlist.

- The generated Python script should follow the function template below:

```python
def findSubCircuit(netlist: str):
    \"\"\"
    Find all {subcircuit} subcircuits.

    Args:
        netlist (str): A flat SPICE netlist as a string, where each line defines a component and its connections in the circuit.

    Returns:
        List of tuples containing identified {subcircuit} and the corresponding transistors.
    \"\"\"
    # add your code here
```

- For each given test case, write an assertion to ensure the returned output matches the expected output.

- In addition to the assertion, print the expected output, actual output, and any relevant information to assist in debugging if the result is not as expected.

Provided Identification Instructions:

{instruction_final}

{test_cases}

Let's think step by step.
";

pub const CODE_REPAIR: &str = "\
When I executed the provided Python code, I got the following error message:

**Error Message**

```
{error_message}
```

Your task is to revise the previously generated Python code and fix any bugs or incorrect logic so that the returned output matches the expected output.

In addition, add relevant assertions with detailed debugging information to assist future revisions and avoid repeating the same error.

Let's think step by step.
";

pub const INSTRUCTION_FOLLOWING: &str = "\
You are an experienced analog circuit designer. Given a SPICE netlist, your task is to identify and extract {subcircuit}.
When answering the question, use the provided instructions to improve the identification accuracy. Provide your answer in JSON format.
The output should be a list of dictionaries. Each dictionary must have two keys:

- 'sub_circuit_name': the type of device, which must be one of the following: {label_names}

- 'components': a list of component names that belong to this subcircuit.

Wrap your response between `<json>` and `</json>` tags. Do not include any explanation, description, or comments.

Provided Identification Instructions:

{instruction_final}

Input SPICE netlist:
{netlist}

Let's think step by step.
";

pub const DIRECT_PROMPTING: &str = "\
You are an experienced analog circuit designer. Given a SPICE netlist, your task is to identify and extract {subcircuit}.
Provide your answer in JSON format.
The output should be a list of dictionaries. Each dictionary must have two keys:

- 'sub_circuit_name': the type of device, which must be one of the following: {label_names}

- 'components': a list of component names that belong to this subcircuit.

Wrap your response between `<json>` and `</json>` tags. Do not include any explanation, description, or comments.

Input SPICE netlist:
{netlist}

Let's think step by step.
";

pub const DIRECT_CODE_GEN: &str = "\
You are an experienced Python programmer working on identifying **{subcircuit}** in a SPICE netlist.

Your task is to:

- Write a Python script for identifying **{subcircuit}**.

- The generated Python script should extract a list of all available **{subcircuit}** from a new, unseen SPICE netlist.

- The generated Python script should follow the function template below:

```python
def findSubCircuit(netlist: str):
    \"\"\"
    Find all **{subcircuit}** subcircuits.

    Args:
        netlist (str): A flat SPICE netlist as a string, where each line defines a component and its connections in the circuit.

    Returns:
        List of tuples containing identified subcircuit names and the corresponding transistors.
    \"\"\"
    # add your code here
```

- For each given test case, write an assertion to ensure the returned output matches the expected output.

- In addition to the assertion, print the expected output, actual output, and any relevant information to assist in debugging if the result is not as expected.

- Always raise an assertion error if the output does not match the expected output.

{test_cases}

Let's think step by step.
";

pub fn template(id: TemplateId) -> PromptTemplate {
    let body = match id {
        TemplateId::InstructionGen => INSTRUCTION_GEN,
        TemplateId::InstructionMerge => INSTRUCTION_MERGE,
        TemplateId::CodeGen => CODE_GEN,
        TemplateId::CodeRepair => CODE_REPAIR,
        TemplateId::InstructionFollowing => INSTRUCTION_FOLLOWING,
        TemplateId::DirectPrompting => DIRECT_PROMPTING,
        TemplateId::DirectCodeGen => DIRECT_CODE_GEN,
    };
    PromptTemplate { id, body }
}

enum Piece<'a> {
    Text(&'a str),
    Slot(&'a str),
}

fn pieces(body: &str) -> Vec<Piece<'_>> {
    let mut out = Vec::new();
    let bytes = body.as_bytes();
    let (mut i, mut start) = (0, 0);
    while i < bytes.len() {
        match bytes[i] {
            b'{' | b'}' if bytes.get(i + 1) == Some(&bytes[i]) => {
                out.push(Piece::Text(&body[start..=i]));
                i += 2;
                start = i;
            }
            b'{' => {
                let len = bytes[i + 1..]
                    .iter()
                    .take_while(|b| b.is_ascii_alphanumeric() || **b == b'_')
                    .count();
                if len > 0 && bytes.get(i + 1 + len) == Some(&b'}') {
                    out.push(Piece::Text(&body[start..i]));
                    out.push(Piece::Slot(&body[i + 1..i + 1 + len]));
                    i += len + 2;
                    start = i;
                } else {
                    i += 1;
                }
            }
            _ => i += 1,
        }
    }
    out.push(Piece::Text(&body[start..]));
    out
}

/// Placeholder names in order of appearance (with repeats).
pub fn placeholders(body: &str) -> Vec<&str> {
    pieces(body)
        .into_iter()
        .filter_map(|p| match p {
            Piece::Slot(s) => Some(s),
            Piece::Text(_) => None,
        })
        .collect()
}

/// Substitutes every placeholder verbatim; substituted text is not rescanned.
pub fn render(body: &str, bindings: &BTreeMap<&str, &str>) -> Result<String, RenderError> {
    let mut out = String::with_capacity(body.len());
    for p in pieces(body) {
        match p {
            Piece::Text(t) => out.push_str(t),
            Piece::Slot(name) => match bindings.get(name) {
                Some(v) => out.push_str(v),
                None => return Err(RenderError::MissingBinding(name.into())),
            },
        }
    }
    Ok(out)
}
