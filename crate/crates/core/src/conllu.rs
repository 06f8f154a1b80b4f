//! CoNLL-U reading and tokenization clean-up for dialogue corpora.
//!
//! Multiword-token ranges (`3-4`) and empty nodes (`5.1`) are skipped.

use std::collections::BTreeMap;
use std::fmt::Write;

use regex::Regex;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConlluToken {
    pub id: usize,
    pub form: String,
    pub lemma: String,
    pub upos: String,
    pub xpos: String,
    pub feats: BTreeMap<String, String>,
    /// 0 for the root.
    pub head: usize,
    pub deprel: String,
    pub deps: String,
    pub misc: String,
}

impl ConlluToken {
    pub fn feat(&self, key: &str) -> Option<&str> {
        self.feats.get(key).map(String::as_str)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ConlluSentence {
    pub sent_id: String,
    pub text: String,
    pub tokens: Vec<ConlluToken>,
}

impl ConlluSentence {
    pub fn root(&self) -> Option<&ConlluToken> {
        self.tokens.iter().find(|t| t.head == 0)
    }

    pub fn token(&self, id: usize) -> Option<&ConlluToken> {
        id.checked_sub(1).and_then(|i| self.tokens.get(i))
    }

    /// Dependents of `id` in token order.
    pub fn children(&self, id: usize) -> impl Iterator<Item = &ConlluToken> {
        self.tokens.iter().filter(move |t| t.head == id)
    }

    /// Checks id contiguity, head range, a single root and acyclicity.
    pub fn check(&self) -> Result<(), TreeError> {
        for (i, t) in self.tokens.iter().enumerate() {
            if t.id != i + 1 {
                return Err(TreeError::NonContiguousIds { found: t.id, expected: i + 1 });
            }
            if t.head > self.tokens.len() {
                return Err(TreeError::HeadOutOfRange { id: t.id, head: t.head });
            }
        }
        for t in &self.tokens {
            let mut cur = t.head;
            let mut steps = 0;
            while cur != 0 {
                if cur == t.id || steps > self.tokens.len() {
                    return Err(TreeError::CyclicHeads { id: t.id });
                }
                cur = self.tokens[cur - 1].head;
                steps += 1;
            }
        }
        let roots = self.tokens.iter().filter(|t| t.head == 0).count();
        if !self.tokens.is_empty() && roots != 1 {
            return Err(TreeError::MultipleRoots(roots));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TreeError {
    #[error("token ids are not contiguous (found {found}, expected {expected})")]
    NonContiguousIds { found: usize, expected: usize },
    #[error("token {id} has head {head} outside the sentence")]
    HeadOutOfRange { id: usize, head: usize },
    #[error("sentence has {0} roots")]
    MultipleRoots(usize),
    #[error("token {id} is on a head cycle")]
    CyclicHeads { id: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConlluError {
    #[error("line {line}: expected 10 tab-separated columns, found {found}")]
    WrongColumnCount { line: usize, found: usize },
    #[error("line {line}: bad {field} `{value}`")]
    BadField {
        line: usize,
        field: &'static str,
        value: String,
    },
    #[error("sentence starting at line {line}: {source}")]
    Tree {
        line: usize,
        #[source]
        source: TreeError,
    },
}

impl ConlluError {
    pub fn line(&self) -> usize {
        match self {
            ConlluError::WrongColumnCount { line, .. }
            | ConlluError::BadField { line, .. }
            | ConlluError::Tree { line, .. } => *line,
        }
    }
}

fn parse_feats(s: &str) -> BTreeMap<String, String> {
    if s == "_" {
        return BTreeMap::new();
    }
    s.split('|')
        .filter_map(|kv| kv.split_once('='))
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect()
}

fn finish(
    sentences: &mut Vec<ConlluSentence>,
    current: &mut ConlluSentence,
    start_line: usize,
    saw_content: &mut bool,
) -> Result<(), ConlluError> {
    if *saw_content {
        let sentence = std::mem::take(current);
        sentence.check().map_err(|source| ConlluError::Tree {
            line: start_line,
            source,
        })?;
        if !sentence.tokens.is_empty() {
            sentences.push(sentence);
        }
    }
    *current = ConlluSentence::default();
    *saw_content = false;
    Ok(())
}

/// Parses CoNLL-U text. Comment lines `# sent_id = ...` and `# text = ...`
/// fill the sentence fields; other comments are ignored.
pub fn parse_conllu(text: &str) -> Result<Vec<ConlluSentence>, ConlluError> {
    let mut sentences = Vec::new();
    let mut current = ConlluSentence::default();
    let mut start_line = 1;
    let mut saw_content = false;
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() {
            finish(&mut sentences, &mut current, start_line, &mut saw_content)?;
            continue;
        }
        if !saw_content {
            start_line = line_no;
            saw_content = true;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if let Some((key, value)) = comment.split_once('=') {
                match key.trim() {
                    "sent_id" => current.sent_id = value.trim().to_string(),
                    "text" => current.text = value.trim().to_string(),
                    _ => {}
                }
            }
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 10 {
            return Err(ConlluError::WrongColumnCount {
                line: line_no,
                found: cols.len(),
            });
        }
        if cols[0].contains('-') || cols[0].contains('.') {
            continue;
        }
        let id = cols[0].parse().map_err(|_| ConlluError::BadField {
            line: line_no,
            field: "id",
            value: cols[0].to_string(),
        })?;
        let head = cols[6].parse().map_err(|_| ConlluError::BadField {
            line: line_no,
            field: "head",
            value: cols[6].to_string(),
        })?;
        current.tokens.push(ConlluToken {
            id,
            form: cols[1].to_string(),
            lemma: cols[2].to_string(),
            upos: cols[3].to_string(),
            xpos: cols[4].to_string(),
            feats: parse_feats(cols[5]),
            head,
            deprel: cols[7].to_string(),
            deps: cols[8].to_string(),
            misc: cols[9].to_string(),
        });
    }
    finish(&mut sentences, &mut current, start_line, &mut saw_content)?;
    Ok(sentences)
}

/// Writes sentences back as CoNLL-U; `parse_conllu` reads the output back
/// to equal sentences.
pub fn serialize_conllu(sentences: &[ConlluSentence]) -> String {
    let mut out = String::new();
    for s in sentences {
        if !s.sent_id.is_empty() {
            writeln!(out, "# sent_id = {}", s.sent_id).unwrap();
        }
        if !s.text.is_empty() {
            writeln!(out, "# text = {}", s.text).unwrap();
        }
        for t in &s.tokens {
            let feats = if t.feats.is_empty() {
                "_".to_string()
            } else {
                t.feats
                    .iter()
                    .map(|(k, v)| format!("{k}={v}"))
                    .collect::<Vec<_>>()
                    .join("|")
            };
            writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
                t.id, t.form, t.lemma, t.upos, t.xpos, feats, t.head, t.deprel, t.deps, t.misc
            )
            .unwrap();
        }
        out.push('\n');
    }
    out
}

/// A token pattern to merge: an opening bracket token, a word matching
/// `inner`, and optionally a closing bracket token.
#[derive(Debug, Clone)]
pub struct TagMergeRule {
    pub open: String,
    pub inner: Regex,
    pub close: Option<String>,
}

impl TagMergeRule {
    /// `<` WORD `>` becomes `<WORD>` and `[` WORD becomes `[WORD`.
    pub fn defaults() -> Vec<TagMergeRule> {
        let word = Regex::new(r"^[A-Za-z][A-Za-z0-9_-]*$").unwrap();
        vec![
            TagMergeRule {
                open: "<".into(),
                inner: word.clone(),
                close: Some(">".into()),
            },
            TagMergeRule {
                open: "[".into(),
                inner: word,
                close: None,
            },
        ]
    }

    fn span(&self, tokens: &[ConlluToken], at: usize) -> Option<usize> {
        let open = tokens.get(at)?;
        let inner = tokens.get(at + 1)?;
        if open.form != self.open || !self.inner.is_match(&inner.form) {
            return None;
        }
        match &self.close {
            None => Some(2),
            Some(close) => (tokens.get(at + 2)?.form == *close).then_some(3),
        }
    }
}

/// [`normalize_tags_with`] using [`TagMergeRule::defaults`].
pub fn normalize_tags(sentence: &ConlluSentence) -> ConlluSentence {
    normalize_tags_with(sentence, &TagMergeRule::defaults())
}

/// Merges bracketed dialogue tags that a tokenizer split apart (`<`,
/// `Architect`, `>`) into one token carrying the inner word's analysis.
/// Heads are re-indexed; dependents of any merged piece attach to the
/// merged token. Idempotent.
pub fn normalize_tags_with(sentence: &ConlluSentence, rules: &[TagMergeRule]) -> ConlluSentence {
    let tokens = &sentence.tokens;
    // group[k] = (first old index, length)
    let mut groups: Vec<(usize, usize)> = Vec::new();
    let mut i = 0;
    while i < tokens.len() {
        let len = rules
            .iter()
            .find_map(|r| r.span(tokens, i))
            .unwrap_or(1);
        groups.push((i, len));
        i += len;
    }
    if groups.len() == tokens.len() {
        return sentence.clone();
    }
    // Old id -> new id.
    let mut new_id = vec![0usize; tokens.len() + 1];
    for (k, &(start, len)) in groups.iter().enumerate() {
        for old in start..start + len {
            new_id[old + 1] = k + 1;
        }
    }
    let mut out = Vec::with_capacity(groups.len());
    for (k, &(start, len)) in groups.iter().enumerate() {
        if len == 1 {
            let mut t = tokens[start].clone();
            t.id = k + 1;
            t.head = new_id[t.head];
            out.push(t);
            continue;
        }
        let members = &tokens[start..start + len];
        let inner = &members[1];
        let form: String = members.iter().map(|t| t.form.as_str()).collect();
        // Head of the merged token: the inner word's head if it leaves the
        // group, else any member's outside head, else root.
        let inside = |h: usize| h > start && h <= start + len;
        let outside = std::iter::once(inner)
            .chain(members.iter())
            .find(|t| !inside(t.head));
        let (head, deprel) = match outside {
            Some(t) => (new_id[t.head], t.deprel.clone()),
            None => (0, "root".to_string()),
        };
        out.push(ConlluToken {
            id: k + 1,
            form: form.clone(),
            lemma: form,
            upos: inner.upos.clone(),
            xpos: inner.xpos.clone(),
            feats: inner.feats.clone(),
            head,
            deprel,
            deps: "_".into(),
            misc: inner.misc.clone(),
        });
    }
    ConlluSentence {
        sent_id: sentence.sent_id.clone(),
        text: sentence.text.clone(),
        tokens: out,
    }
}
