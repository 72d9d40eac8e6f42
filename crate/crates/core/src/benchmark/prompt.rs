use super::PromptEntry;
use crate::color::try_lookup;

pub fn single_prompt(color: &str, object: &str) -> String {
    format!("a {color} colored {object}.")
}

pub fn pair_prompt(c1: &str, o1: &str, c2: &str, o2: &str) -> String {
    format!("a {c1} colored {o1} and a {c2} colored {o2}.")
}

pub fn triple_prompt(c1: &str, o1: &str, c2: &str, o2: &str, c3: &str, o3: &str) -> String {
    format!("a {c1} colored {o1} and a {c2} colored {o2} and a {c3} colored {o3}.")
}

fn split_punct(token: &str) -> (&str, &str) {
    let core = token.trim_end_matches(['.', ',', ';', ':', '!', '?']);
    (core, &token[core.len()..])
}

/// Longest run (up to three words) starting at `i` that names an HTML color.
fn color_run(words: &[(&str, &str)], i: usize) -> Option<usize> {
    for len in (1..=3).rev() {
        if i + len > words.len() || words[i..i + len - 1].iter().any(|(_, p)| !p.is_empty()) {
            continue;
        }
        let joined: String = words[i..i + len].iter().map(|(w, _)| *w).collect();
        if try_lookup(&joined).is_some() {
            return Some(len);
        }
    }
    None
}

/// Removes color names (any spelling, including multi-word) and the word
/// `colored`, keeping nouns, connectives and trailing punctuation.
pub fn simplify_text(text: &str) -> String {
    let words: Vec<(&str, &str)> = text.split_whitespace().map(split_punct).collect();
    let mut kept: Vec<String> = Vec::with_capacity(words.len());
    let mut i = 0;
    while i < words.len() {
        let drop = if words[i].0.eq_ignore_ascii_case("colored") {
            Some(1)
        } else {
            color_run(&words, i)
        };
        match drop {
            Some(len) => {
                let punct = words[i + len - 1].1;
                if let Some(last) = kept.last_mut() {
                    last.push_str(punct);
                }
                i += len;
            }
            None => {
                kept.push(format!("{}{}", words[i].0, words[i].1));
                i += 1;
            }
        }
    }
    kept.join(" ")
}

pub fn simplify_prompt(entry: &PromptEntry) -> String {
    simplify_text(&entry.text)
}
