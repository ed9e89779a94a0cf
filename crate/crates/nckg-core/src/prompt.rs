//! Slot substitution for prompt templates.
//!
//! Slots are written `{name}` in the template body. Substitution is
//! literal: slot values are inserted verbatim, with no escaping and no
//! truncation. A doubled brace `{{` or `}}` emits a literal brace.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RenderError {
    #[error("template slot {{{0}}} has no value")]
    MissingSlot(String),
    #[error("unclosed slot brace at byte {0}")]
    UnclosedSlot(usize),
}

/// Slot names appearing in a template body, in order of first occurrence.
pub fn slot_names(body: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut chars = body.char_indices().peekable();
    while let Some((_, c)) = chars.next() {
        if c != '{' {
            continue;
        }
        if let Some((_, '{')) = chars.peek() {
            chars.next();
            continue;
        }
        let mut name = String::new();
        for (_, c) in chars.by_ref() {
            if c == '}' {
                break;
            }
            name.push(c);
        }
        if !name.is_empty() && !out.contains(&name) {
            out.push(name);
        }
    }
    out
}

pub fn render(body: &str, slots: &BTreeMap<String, String>) -> Result<String, RenderError> {
    let mut out = String::with_capacity(body.len());
    let mut chars = body.char_indices().peekable();
    while let Some((i, c)) = chars.next() {
        match c {
            '{' => {
                if let Some((_, '{')) = chars.peek() {
                    chars.next();
                    out.push('{');
                    continue;
                }
                let mut name = String::new();
                let mut closed = false;
                for (_, c) in chars.by_ref() {
                    if c == '}' {
                        closed = true;
                        break;
                    }
                    name.push(c);
                }
                if !closed {
                    return Err(RenderError::UnclosedSlot(i));
                }
                match slots.get(&name) {
                    Some(value) => out.push_str(value),
                    None => return Err(RenderError::MissingSlot(name)),
                }
            }
            '}' => {
                if let Some((_, '}')) = chars.peek() {
                    chars.next();
                }
                out.push('}');
            }
            _ => out.push(c),
        }
    }
    Ok(out)
}

/// Convenience wrapper for string-literal slot maps.
pub fn render_pairs(body: &str, slots: &[(&str, &str)]) -> Result<String, RenderError> {
    let map = slots
        .iter()
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect();
    render(body, &map)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn substitutes_literally() {
        let out = render_pairs("Review this clause: {input_clause}", &[("input_clause", "x \"y\"")])
            .unwrap();
        assert_eq!(out, "Review this clause: x \"y\"");
    }

    #[test]
    fn missing_slot_is_an_error() {
        assert_eq!(
            render_pairs("{a} and {b}", &[("a", "1")]),
            Err(RenderError::MissingSlot("b".to_string()))
        );
    }

    #[test]
    fn extra_slots_are_ignored() {
        assert_eq!(render_pairs("{a}", &[("a", "1"), ("b", "2")]).unwrap(), "1");
    }

    #[test]
    fn doubled_braces_escape() {
        let out = render_pairs("format of {{Risk category}}-{{Risk type}} for {c}", &[("c", "x")])
            .unwrap();
        assert_eq!(out, "format of {Risk category}-{Risk type} for x");
    }

    #[test]
    fn unclosed_brace_is_an_error() {
        assert_eq!(render_pairs("{oops", &[]), Err(RenderError::UnclosedSlot(0)));
    }

    #[test]
    fn slot_names_in_order_without_duplicates() {
        assert_eq!(
            slot_names("{b} then {a} then {b} and {{not_a_slot}}"),
            ["b".to_string(), "a".to_string()]
        );
    }
}
