use std::path::Path;

use anyhow::{bail, Context, Result};
use umr_core::corpus::{build_split, read_umr_corpus, replay_manifest, write_umr_corpus, SplitManifest, SplitSpec};

use crate::input::{ensure_exists, read_text};
use crate::SplitArgs;

pub fn run(args: &SplitArgs) -> Result<()> {
    for p in &args.corpus {
        ensure_exists(p)?;
    }
    let read = read_umr_corpus(&args.corpus)?;
    for m in &read.malformed {
        eprintln!("warning: skipped malformed block: {m}");
    }
    if read.entries.is_empty() {
        bail!("no graphs found in the corpus files");
    }

    let split = match (&args.spec, &args.replay) {
        (Some(spec_path), _) => {
            let base = spec_path.parent().unwrap_or(Path::new("."));
            let spec = SplitSpec::from_toml(&read_text(spec_path)?, base)
                .with_context(|| format!("{}", spec_path.display()))?;
            build_split(read.entries, &spec)?
        }
        (None, Some(manifest_path)) => {
            let manifest = SplitManifest::from_json(&read_text(manifest_path)?)
                .with_context(|| format!("{}", manifest_path.display()))?;
            let split = replay_manifest(read.entries, &manifest)?;
            let listed = manifest.train.len() + manifest.dev.len() + manifest.test.len();
            let found = split.train.len() + split.dev.len() + split.test.len();
            if found != listed {
                bail!("manifest lists {listed} sentences but only {found} are in the corpus");
            }
            split
        }
        (None, None) => unreachable!("clap requires --spec or --replay"),
    };

    for f in &split.manifest.filters {
        eprintln!("{}: {} -> {}", f.filter, f.before, f.after);
    }
    if !split.manifest.missing.is_empty() {
        eprintln!(
            "warning: {} listed ids are not in the filtered corpus: {}",
            split.manifest.missing.len(),
            split.manifest.missing.join(", ")
        );
    }
    eprintln!(
        "train {}, dev {}, test {}",
        split.train.len(),
        split.dev.len(),
        split.test.len()
    );

    let dir = &args.out_dir;
    std::fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    let write = |name: &str, content: String| {
        let p = dir.join(name);
        std::fs::write(&p, content).with_context(|| format!("cannot write {}", p.display()))
    };
    write("train.umr", write_umr_corpus(&split.train))?;
    write("dev.umr", write_umr_corpus(&split.dev))?;
    write("test.umr", write_umr_corpus(&split.test))?;
    write("manifest.json", split.manifest.to_json())?;
    Ok(())
}
