use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::exec::ENTRY_SIGNATURE;

const OPEN: &str = "<instruction>";
const CLOSE: &str = "</instruction>";

/// The text between the first `<instruction>` tag and the closing tag after it.
pub fn extract_instruction(reply: &str) -> Result<String, String> {
    let start = reply.find(OPEN).ok_or("reply has no <instruction> tag")? + OPEN.len();
    let len = reply[start..].find(CLOSE).ok_or("reply has no </instruction> tag")?;
    let body = reply[start..start + len].trim();
    if body.is_empty() {
        return Err("instruction tags are empty".to_string());
    }
    Ok(body.to_string())
}

/// Fenced code blocks of a Markdown reply, in order.
pub fn code_blocks(reply: &str) -> Vec<String> {
    let mut blocks = Vec::new();
    let mut current: Option<String> = None;
    for line in reply.lines() {
        let fence = line.trim_start().starts_with("```");
        match (&mut current, fence) {
            (None, true) => current = Some(String::new()),
            (Some(_), true) => blocks.push(current.take().unwrap()),
            (Some(buf), false) => {
                buf.push_str(line);
                buf.push('\n');
            }
            (None, false) => {}
        }
    }
    blocks
}

/// The first fenced block that defines the entry function.
pub fn extract_code(reply: &str) -> Result<String, String> {
    let blocks = code_blocks(reply);
    if blocks.is_empty() {
        return Err("reply has no fenced code block".to_string());
    }
    blocks
        .into_iter()
        .find(|b| b.contains(ENTRY_SIGNATURE))
        .ok_or_else(|| "code block does not define findSubCircuit(netlist)".to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn instruction_tags() {
        assert_eq!(extract_instruction("x <instruction>\n1. a\n</instruction> y").unwrap(), "1. a");
        assert!(extract_instruction("1. a").is_err());
        assert!(extract_instruction("<instruction> 1. a").is_err());
    }

    #[test]
    fn code_fences() {
        let reply = "Here:\n```\nprint(1)\n```\nand\n```python\ndef findSubCircuit(netlist: str):\n    return []\n```\n";
        assert_eq!(extract_code(reply).unwrap(), "def findSubCircuit(netlist: str):\n    return []\n");
        assert!(extract_code("just prose").is_err());
        assert!(extract_code("```python\ndef other():\n    pass\n```").is_err());
    }
}
