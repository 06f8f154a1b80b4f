//! Reading and writing graph files.

use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use umr_core::corpus::{is_block_format, split_blocks};

use crate::UsageError;

/// One graph as it appeared in an input file.
#[derive(Debug, Clone)]
pub struct GraphBlock {
    pub id: Option<String>,
    pub sentence: Option<String>,
    /// Comment lines kept for output, without trailing newlines.
    pub meta: Vec<String>,
    pub text: String,
    /// 1-based line of the first graph line.
    pub line: usize,
}

impl GraphBlock {
    pub fn label(&self, index: usize) -> String {
        self.id.clone().unwrap_or_else(|| format!("#{}", index + 1))
    }

    /// Metadata lines followed by `graph`.
    pub fn render(&self, graph: &str) -> String {
        let mut out = String::new();
        for m in &self.meta {
            out.push_str(m);
            out.push('\n');
        }
        out.push_str(graph.trim_end_matches('\n'));
        out
    }
}

/// Missing input paths are usage errors rather than data errors.
pub fn ensure_exists(path: &Path) -> Result<()> {
    if path.exists() {
        Ok(())
    } else {
        Err(UsageError(format!("{} does not exist", path.display())).into())
    }
}

pub fn read_text(path: &Path) -> Result<String> {
    if path == Path::new("-") {
        let mut s = String::new();
        std::io::stdin()
            .read_to_string(&mut s)
            .context("cannot read standard input")?;
        return Ok(s);
    }
    ensure_exists(path)?;
    std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn metadata(comment: &str) -> (Option<String>, Option<String>) {
    let c = comment.trim_start_matches('#').trim();
    if let Some(id) = c.strip_prefix("::id") {
        let id = id.split_whitespace().next().unwrap_or("").to_string();
        return (Some(id), None);
    }
    if let Some(rest) = c.strip_prefix("::").map(str::trim_start) {
        if let Some(s) = rest.strip_prefix("snt") {
            let s = s.trim_start_matches(|ch: char| ch.is_ascii_digit()).trim();
            return (None, Some(s.to_string()));
        }
    }
    (None, None)
}

/// Blank-line separated graphs. Leading `#` lines of a block are
/// metadata; `# ::id` and `# ::snt` are recognized.
pub fn split_penman_blocks(text: &str) -> Vec<GraphBlock> {
    let mut blocks = Vec::new();
    let mut cur: Option<GraphBlock> = None;
    let flush = |cur: &mut Option<GraphBlock>, blocks: &mut Vec<GraphBlock>| {
        if let Some(b) = cur.take() {
            if !b.text.trim().is_empty() || !b.meta.is_empty() {
                blocks.push(b);
            }
        }
    };
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim_end();
        if line.trim().is_empty() {
            flush(&mut cur, &mut blocks);
            continue;
        }
        let b = cur.get_or_insert_with(|| GraphBlock {
            id: None,
            sentence: None,
            meta: Vec::new(),
            text: String::new(),
            line: i + 1,
        });
        if b.text.is_empty() && line.trim_start().starts_with('#') {
            let (id, snt) = metadata(line);
            b.id = id.or(b.id.take());
            b.sentence = snt.or(b.sentence.take());
            b.meta.push(line.to_string());
            b.line = i + 2;
        } else {
            if !b.text.is_empty() {
                b.text.push('\n');
            }
            b.text.push_str(line);
        }
    }
    flush(&mut cur, &mut blocks);
    blocks
}

/// Graph blocks from a PENMAN file or a corpus block file.
pub fn read_blocks(path: &Path) -> Result<Vec<GraphBlock>> {
    let text = read_text(path)?;
    if !is_block_format(&text) {
        return Ok(split_penman_blocks(&text));
    }
    let raw = split_blocks(&text);
    Ok(raw
        .blocks
        .into_iter()
        .map(|b| {
            let mut meta = vec![format!("# ::id {}", b.sent_id)];
            if let Some(s) = &b.sentence {
                meta.push(format!("# ::snt {s}"));
            }
            let (line, text) = b.graph.unwrap_or((b.line, String::new()));
            GraphBlock {
                id: Some(b.sent_id),
                sentence: b.sentence,
                meta,
                text: text.trim_end().to_string(),
                line,
            }
        })
        .collect())
}

/// Writes to `path`, or to standard output when `path` is `None`.
pub fn write_output(path: Option<&PathBuf>, content: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, content).with_context(|| format!("cannot write {}", p.display())),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(content.as_bytes())?;
            out.flush()?;
            Ok(())
        }
    }
}

/// Blocks joined by blank lines, newline-terminated; empty for no blocks.
pub fn join_blocks<I: IntoIterator<Item = String>>(blocks: I) -> String {
    let mut out = String::new();
    for b in blocks {
        if !out.is_empty() {
            out.push('\n');
        }
        out.push_str(&b);
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn blocks_with_metadata() {
        let text = "# ::id a\n# ::snt Hi there.\n(h / hi)\n\n\n(b / bye\n  :mod (x / y))\n";
        let b = split_penman_blocks(text);
        assert_eq!(b.len(), 2);
        assert_eq!(b[0].id.as_deref(), Some("a"));
        assert_eq!(b[0].sentence.as_deref(), Some("Hi there."));
        assert_eq!(b[0].line, 3);
        assert_eq!(b[1].text, "(b / bye\n  :mod (x / y))");
        assert_eq!(b[1].line, 6);
        assert_eq!(join_blocks(b.iter().map(|x| x.render(&x.text))), "# ::id a\n# ::snt Hi there.\n(h / hi)\n\n(b / bye\n  :mod (x / y))\n");
    }
}
