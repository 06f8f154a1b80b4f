//! UMR corpus files, filters and train/dev/test splits.
//!
//! # Block format
//!
//! A file is a sequence of sentence blocks. A block starts at a line
//! `# ::id <sent_id>` and runs to the next such line or end of file:
//!
//! ```text
//! # ::id <sent_id>
//! # ::doc <doc_id>            optional; defaults to the file stem
//! # ::lang <code>             optional; defaults to "en"
//! # ::snt <sentence>          or "# :: snt<N>\t<sentence>"
//! # sentence level graph:
//! <PENMAN graph, any number of lines>
//! # alignment:                optional, skipped
//! # document level annotation:   optional, skipped
//! ```
//!
//! Other `#` lines are ignored. Skipped sections are counted.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt::Write;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{parse_penman, serialize_penman, SemanticGraph};

pub const MINECRAFT_TAG: &str = "minecraft";
pub const DEFAULT_MINECRAFT_PATTERNS: [&str; 2] = ["Builder", "Architect"];
pub const BUILDER_PREFIX: &str = "[Builder";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UmrEntry {
    pub doc_id: String,
    pub sent_id: String,
    pub sentence: String,
    pub graph: SemanticGraph,
    pub language: String,
    pub tags: BTreeSet<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{file}:{line}: {message}")]
pub struct MalformedBlock {
    pub file: String,
    pub line: usize,
    pub sent_id: Option<String>,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CorpusRead {
    pub entries: Vec<UmrEntry>,
    pub malformed: Vec<MalformedBlock>,
    /// Alignment and document-level sections that were skipped.
    pub skipped_sections: usize,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Section {
    Header,
    Graph,
    Skipped,
}

/// One block as written, before its graph is parsed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawBlock {
    /// Line of the `# ::id` header (1-based).
    pub line: usize,
    pub sent_id: String,
    pub doc_id: Option<String>,
    pub language: Option<String>,
    pub sentence: Option<String>,
    /// First line of the graph section and its text.
    pub graph: Option<(usize, String)>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RawCorpus {
    pub blocks: Vec<RawBlock>,
    /// Non-comment lines outside any graph section, with the enclosing
    /// block's id if there is one.
    pub stray_lines: Vec<(usize, Option<String>)>,
    pub skipped_sections: usize,
}

/// Whether text looks like the corpus block format rather than bare
/// PENMAN graphs.
pub fn is_block_format(text: &str) -> bool {
    text.lines().any(|l| {
        l.trim_start()
            .strip_prefix('#')
            .is_some_and(|c| c.trim().to_lowercase().starts_with("sentence level graph"))
    })
}

fn sentence_line(comment: &str) -> Option<String> {
    let rest = comment.strip_prefix("::")?.trim_start();
    let rest = rest.strip_prefix("snt")?;
    let rest = rest.trim_start_matches(|c: char| c.is_ascii_digit());
    Some(rest.trim().to_string())
}

/// Splits block-format text into blocks without parsing graphs.
pub fn split_blocks(text: &str) -> RawCorpus {
    let mut out = RawCorpus::default();
    let mut section = Section::Header;
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim_end();
        if let Some(comment) = line.trim_start().strip_prefix('#') {
            let comment = comment.trim();
            if let Some(id) = comment.strip_prefix("::id") {
                out.blocks.push(RawBlock {
                    line: line_no,
                    sent_id: id.trim().to_string(),
                    doc_id: None,
                    language: None,
                    sentence: None,
                    graph: None,
                });
                section = Section::Header;
                continue;
            }
            let lower = comment.to_lowercase();
            if lower.starts_with("sentence level graph") {
                section = Section::Graph;
                continue;
            }
            if lower.starts_with("alignment") || lower.starts_with("document level") {
                out.skipped_sections += 1;
                section = Section::Skipped;
                continue;
            }
            if let Some(b) = out.blocks.last_mut() {
                if let Some(doc) = comment.strip_prefix("::doc") {
                    b.doc_id = Some(doc.trim().to_string());
                } else if let Some(lang) = comment.strip_prefix("::lang") {
                    b.language = Some(lang.trim().to_string());
                } else if let Some(s) = sentence_line(comment) {
                    b.sentence = Some(s);
                }
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        match (out.blocks.last_mut(), section) {
            (Some(b), Section::Graph) => {
                let g = b.graph.get_or_insert_with(|| (line_no, String::new()));
                g.1.push_str(line);
                g.1.push('\n');
            }
            (_, Section::Skipped) => {}
            (b, _) => out
                .stray_lines
                .push((line_no, b.map(|b| b.sent_id.clone()))),
        }
    }
    out
}

/// Parses one corpus file. `file` names the file in reports and supplies
/// the default document id.
pub fn parse_umr_corpus(text: &str, file: &str) -> CorpusRead {
    let default_doc = Path::new(file)
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| file.to_string());
    let raw = split_blocks(text);
    let mut out = CorpusRead {
        skipped_sections: raw.skipped_sections,
        ..CorpusRead::default()
    };
    let malformed = |line: usize, sent_id: Option<String>, message: String| MalformedBlock {
        file: file.to_string(),
        line,
        sent_id,
        message,
    };
    for (line, sent_id) in raw.stray_lines {
        out.malformed
            .push(malformed(line, sent_id, "content outside a graph section".into()));
    }
    for b in raw.blocks {
        let id = Some(b.sent_id.clone());
        let Some(sentence) = b.sentence.filter(|s| !s.is_empty()) else {
            out.malformed
                .push(malformed(b.line, id, "block has no sentence line".into()));
            continue;
        };
        let Some((graph_line, graph_text)) = b.graph.filter(|(_, g)| !g.trim().is_empty()) else {
            out.malformed
                .push(malformed(b.line, id, "block has no sentence level graph".into()));
            continue;
        };
        match parse_penman(&graph_text) {
            Ok(graph) => out.entries.push(UmrEntry {
                doc_id: b.doc_id.unwrap_or_else(|| default_doc.clone()),
                sent_id: b.sent_id,
                sentence,
                graph,
                language: b.language.unwrap_or_else(|| "en".into()),
                tags: BTreeSet::new(),
            }),
            Err(e) => out.malformed.push(malformed(
                graph_line,
                id,
                format!("graph does not parse: {e}"),
            )),
        }
    }
    out.malformed.sort_by_key(|m| m.line);
    out
}

#[derive(Debug, Error)]
#[error("cannot read {path}: {source}")]
pub struct ReadError {
    pub path: String,
    #[source]
    pub source: std::io::Error,
}

/// Reads files in the given order and concatenates their results. Files
/// are parsed in parallel when the `parallel` feature is on.
pub fn read_umr_corpus(paths: &[PathBuf]) -> Result<CorpusRead, ReadError> {
    let read_one = |p: &PathBuf| -> Result<CorpusRead, ReadError> {
        let text = std::fs::read_to_string(p).map_err(|source| ReadError {
            path: p.display().to_string(),
            source,
        })?;
        Ok(parse_umr_corpus(&text, &p.display().to_string()))
    };
    #[cfg(feature = "parallel")]
    let parts: Vec<Result<CorpusRead, ReadError>> = {
        use rayon::prelude::*;
        paths.par_iter().map(read_one).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let parts: Vec<Result<CorpusRead, ReadError>> = paths.iter().map(read_one).collect();
    let mut all = CorpusRead::default();
    for part in parts {
        let part = part?;
        all.entries.extend(part.entries);
        all.malformed.extend(part.malformed);
        all.skipped_sections += part.skipped_sections;
    }
    Ok(all)
}

/// Writes entries in the block format. Reading the output back gives the
/// same entries, minus tags.
pub fn write_umr_corpus(entries: &[UmrEntry]) -> String {
    let mut out = String::new();
    for e in entries {
        writeln!(out, "# ::id {}", e.sent_id).unwrap();
        writeln!(out, "# ::doc {}", e.doc_id).unwrap();
        writeln!(out, "# ::lang {}", e.language).unwrap();
        writeln!(out, "# ::snt {}", e.sentence).unwrap();
        out.push_str("# sentence level graph:\n");
        out.push_str(&serialize_penman(&e.graph).expect("corpus graphs are connected"));
        out.push_str("\n\n");
    }
    out
}

/// Lowercase, collapse whitespace, strip trailing punctuation.
pub fn normalize_sentence(s: &str) -> String {
    let collapsed = s
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
        .to_lowercase();
    collapsed
        .trim_end_matches(|c: char| c.is_ascii_punctuation() || c == '…' || c.is_whitespace())
        .to_string()
}

/// Splits entries into (kept, excluded) by normalized match against
/// `amr_sentences`. Both halves keep corpus order.
pub fn exclude_overlap<S: AsRef<str>>(
    entries: Vec<UmrEntry>,
    amr_sentences: &[S],
) -> (Vec<UmrEntry>, Vec<UmrEntry>) {
    let banned: HashSet<String> = amr_sentences
        .iter()
        .map(|s| normalize_sentence(s.as_ref()))
        .collect();
    entries
        .into_iter()
        .partition(|e| !banned.contains(&normalize_sentence(&e.sentence)))
}

/// Adds `tag` to entries whose sentence contains any of `patterns`.
pub fn tag_by_patterns<S: AsRef<str>>(entries: &mut [UmrEntry], tag: &str, patterns: &[S]) {
    for e in entries {
        if patterns.iter().any(|p| e.sentence.contains(p.as_ref())) {
            e.tags.insert(tag.to_string());
        }
    }
}

/// Tags Minecraft dialogue sentences (those mentioning Builder or
/// Architect) with `minecraft`.
pub fn tag_minecraft(entries: &mut [UmrEntry]) {
    tag_by_patterns(entries, MINECRAFT_TAG, &DEFAULT_MINECRAFT_PATTERNS);
}

/// Keeps at most `cap` entries whose sentence starts with `[Builder`.
/// Without a seed the first `cap` in corpus order are kept; with a seed a
/// seeded random subset. Output stays in corpus order.
pub fn downsample_builder(entries: Vec<UmrEntry>, cap: usize, seed: Option<u64>) -> Vec<UmrEntry> {
    let builder: Vec<usize> = entries
        .iter()
        .enumerate()
        .filter(|(_, e)| e.sentence.starts_with(BUILDER_PREFIX))
        .map(|(i, _)| i)
        .collect();
    let mut chosen = builder;
    if let Some(seed) = seed {
        chosen.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    }
    chosen.truncate(cap);
    let chosen: HashSet<usize> = chosen.into_iter().collect();
    entries
        .into_iter()
        .enumerate()
        .filter(|(i, e)| !e.sentence.starts_with(BUILDER_PREFIX) || chosen.contains(i))
        .map(|(_, e)| e)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Filter {
    /// Drop entries overlapping a sentence list. `sentences_file` is read
    /// relative to the spec file; the list is filled in on load.
    ExcludeOverlap {
        sentences_file: String,
        #[serde(default, skip_serializing)]
        sentences: Vec<String>,
    },
    BuilderDownsample {
        cap: usize,
        #[serde(default)]
        shuffle: bool,
    },
    Language {
        language: String,
    },
}

impl Filter {
    pub fn name(&self) -> String {
        match self {
            Filter::ExcludeOverlap { sentences_file, .. } => {
                format!("exclude-overlap({sentences_file})")
            }
            Filter::BuilderDownsample { cap, .. } => format!("builder-downsample({cap})"),
            Filter::Language { language } => format!("language({language})"),
        }
    }

    fn apply(&self, entries: Vec<UmrEntry>, seed: u64) -> Vec<UmrEntry> {
        match self {
            Filter::ExcludeOverlap { sentences, .. } => exclude_overlap(entries, sentences).0,
            Filter::BuilderDownsample { cap, shuffle } => {
                downsample_builder(entries, *cap, shuffle.then_some(seed))
            }
            Filter::Language { language } => entries
                .into_iter()
                .filter(|e| e.language == *language)
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ratios {
    pub train: f64,
    pub dev: f64,
    pub test: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct IdLists {
    pub train: Vec<String>,
    pub dev: Vec<String>,
    pub test: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub ratios: Option<Ratios>,
    #[serde(default)]
    pub ids: Option<IdLists>,
    #[serde(default)]
    pub filters: Vec<Filter>,
}

#[derive(Debug, Error)]
pub enum SplitError {
    #[error("split spec: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("ratios must be non-negative and sum to 1 (got {0})")]
    RatiosInvalid(String),
    #[error("split spec needs exactly one of `ratios` or `ids`")]
    NoPartitioning,
    #[error("sentence id `{0}` occurs more than once")]
    DuplicateSentId(String),
    #[error("sentence id `{0}` is listed in more than one partition")]
    OverlappingIds(String),
    #[error("manifest: {0}")]
    Manifest(#[from] serde_json::Error),
}

impl SplitSpec {
    /// Parses TOML and loads any sentence lists named by filters, relative
    /// to `base_dir`. One sentence per line.
    pub fn from_toml(text: &str, base_dir: &Path) -> Result<Self, SplitError> {
        let mut spec: SplitSpec = toml::from_str(text)?;
        for f in &mut spec.filters {
            if let Filter::ExcludeOverlap {
                sentences_file,
                sentences,
            } = f
            {
                let path = base_dir.join(&*sentences_file);
                let text = std::fs::read_to_string(&path).map_err(|source| SplitError::Io {
                    path: path.display().to_string(),
                    source,
                })?;
                *sentences = text
                    .lines()
                    .map(str::trim)
                    .filter(|l| !l.is_empty())
                    .map(str::to_string)
                    .collect();
            }
        }
        Ok(spec)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilterCount {
    pub filter: String,
    pub before: usize,
    pub after: usize,
}

/// Everything needed to rebuild a split: partition ids in output order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitManifest {
    pub seed: u64,
    pub filters: Vec<FilterCount>,
    pub train: Vec<String>,
    pub dev: Vec<String>,
    pub test: Vec<String>,
    /// Ids from explicit lists that were not among the filtered entries.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub missing: Vec<String>,
}

impl SplitManifest {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes") + "\n"
    }

    pub fn from_json(text: &str) -> Result<Self, SplitError> {
        Ok(serde_json::from_str(text)?)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Split {
    pub train: Vec<UmrEntry>,
    pub dev: Vec<UmrEntry>,
    pub test: Vec<UmrEntry>,
    pub manifest: SplitManifest,
}

fn check_unique(entries: &[UmrEntry]) -> Result<(), SplitError> {
    let mut seen = HashSet::new();
    for e in entries {
        if !seen.insert(e.sent_id.as_str()) {
            return Err(SplitError::DuplicateSentId(e.sent_id.clone()));
        }
    }
    Ok(())
}

fn ratio_partition(entries: &[UmrEntry], ratios: &Ratios, seed: u64) -> Result<Vec<u8>, SplitError> {
    let parts = [ratios.train, ratios.dev, ratios.test];
    let sum: f64 = parts.iter().sum();
    if parts.iter().any(|r| !r.is_finite() || *r < 0.0) || (sum - 1.0).abs() > 1e-9 {
        return Err(SplitError::RatiosInvalid(format!(
            "{}/{}/{}",
            ratios.train, ratios.dev, ratios.test
        )));
    }
    // Documents in first-appearance order, then shuffled.
    let mut doc_sizes: Vec<(&str, usize)> = Vec::new();
    let mut doc_index: HashMap<&str, usize> = HashMap::new();
    for e in entries {
        let i = *doc_index.entry(&e.doc_id).or_insert_with(|| {
            doc_sizes.push((&e.doc_id, 0));
            doc_sizes.len() - 1
        });
        doc_sizes[i].1 += 1;
    }
    let mut order: Vec<usize> = (0..doc_sizes.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let n = entries.len() as f64;
    let targets = [
        (ratios.train * n).round() as usize,
        (ratios.dev * n).round() as usize,
    ];
    let mut filled = [0usize; 3];
    let mut doc_part = vec![0u8; doc_sizes.len()];
    for d in order {
        let part = (0..2).find(|&p| filled[p] < targets[p]).unwrap_or(2);
        doc_part[d] = part as u8;
        filled[part] += doc_sizes[d].1;
    }
    Ok(entries
        .iter()
        .map(|e| doc_part[doc_index[e.doc_id.as_str()]])
        .collect())
}

fn assemble(
    entries: Vec<UmrEntry>,
    assignment: &[Option<u8>],
    seed: u64,
    filters: Vec<FilterCount>,
    missing: Vec<String>,
) -> Split {
    let mut split = Split {
        train: Vec::new(),
        dev: Vec::new(),
        test: Vec::new(),
        manifest: SplitManifest {
            seed,
            filters,
            train: Vec::new(),
            dev: Vec::new(),
            test: Vec::new(),
            missing,
        },
    };
    for (e, part) in entries.into_iter().zip(assignment) {
        let (list, ids) = match part {
            Some(0) => (&mut split.train, &mut split.manifest.train),
            Some(1) => (&mut split.dev, &mut split.manifest.dev),
            Some(_) => (&mut split.test, &mut split.manifest.test),
            None => continue,
        };
        ids.push(e.sent_id.clone());
        list.push(e);
    }
    split
}

fn explicit_assignment(
    entries: &[UmrEntry],
    lists: [&[String]; 3],
) -> Result<(Vec<Option<u8>>, Vec<String>), SplitError> {
    let mut part_of: HashMap<&str, u8> = HashMap::new();
    for (p, ids) in lists.iter().enumerate() {
        for id in *ids {
            if part_of.insert(id, p as u8).is_some() {
                return Err(SplitError::OverlappingIds(id.clone()));
            }
        }
    }
    let present: HashSet<&str> = entries.iter().map(|e| e.sent_id.as_str()).collect();
    let missing = lists
        .iter()
        .flat_map(|l| l.iter())
        .filter(|id| !present.contains(id.as_str()))
        .cloned()
        .collect();
    let assignment = entries
        .iter()
        .map(|e| part_of.get(e.sent_id.as_str()).copied())
        .collect();
    Ok((assignment, missing))
}

/// Applies the spec's filters in order, then partitions.
///
/// With ratios, whole documents are assigned to partitions in a seeded
/// shuffled order: each goes to train until train reaches its target
/// size, then dev, then test. With explicit id lists, entries go where
/// their id is listed and unlisted entries are left out. Partitions keep
/// corpus order.
pub fn build_split(entries: Vec<UmrEntry>, spec: &SplitSpec) -> Result<Split, SplitError> {
    let mut entries = entries;
    let mut counts = Vec::with_capacity(spec.filters.len());
    for f in &spec.filters {
        let before = entries.len();
        entries = f.apply(entries, spec.seed);
        counts.push(FilterCount {
            filter: f.name(),
            before,
            after: entries.len(),
        });
    }
    check_unique(&entries)?;
    match (&spec.ratios, &spec.ids) {
        (Some(r), None) => {
            let parts = ratio_partition(&entries, r, spec.seed)?;
            let assignment: Vec<Option<u8>> = parts.into_iter().map(Some).collect();
            Ok(assemble(entries, &assignment, spec.seed, counts, Vec::new()))
        }
        (None, Some(ids)) => {
            let (assignment, missing) =
                explicit_assignment(&entries, [&ids.train, &ids.dev, &ids.test])?;
            Ok(assemble(entries, &assignment, spec.seed, counts, missing))
        }
        _ => Err(SplitError::NoPartitioning),
    }
}

/// Rebuilds the partitions named by a manifest from unfiltered entries.
/// Writing the result gives the same bytes as writing the original split.
pub fn replay_manifest(entries: Vec<UmrEntry>, manifest: &SplitManifest) -> Result<Split, SplitError> {
    let lists = [&manifest.train[..], &manifest.dev[..], &manifest.test[..]];
    let (assignment, _) = explicit_assignment(&entries, lists)?;
    let mut by_id: BTreeMap<String, UmrEntry> = BTreeMap::new();
    for (e, part) in entries.into_iter().zip(&assignment) {
        if part.is_some() {
            if by_id.contains_key(&e.sent_id) {
                return Err(SplitError::DuplicateSentId(e.sent_id));
            }
            by_id.insert(e.sent_id.clone(), e);
        }
    }
    let take = |ids: &[String], by_id: &mut BTreeMap<String, UmrEntry>| -> Vec<UmrEntry> {
        ids.iter().filter_map(|id| by_id.remove(id)).collect()
    };
    let train = take(&manifest.train, &mut by_id);
    let dev = take(&manifest.dev, &mut by_id);
    let test = take(&manifest.test, &mut by_id);
    Ok(Split {
        train,
        dev,
        test,
        manifest: manifest.clone(),
    })
}
