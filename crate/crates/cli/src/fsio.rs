//! File helpers: atomic writes and corpus directory loading.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use dlview::ingest::{parse_dltree, serialize_dltree};
use dlview::{BinaryTree, Region};
use rayon::prelude::*;

/// Writes through a temporary file in the target directory, then renames.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)
        .with_context(|| format!("cannot create a temporary file in {}", dir.display()))?;
    tmp.write_all(contents)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path)
        .map_err(|e| anyhow!(e.error))
        .with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

pub fn ensure_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).with_context(|| format!("cannot create {}", path.display()))
}

/// `dir/<stem>.<ext>` for an input file.
pub fn output_path(dir: &Path, input: &Path, ext: &str) -> Result<PathBuf> {
    let stem = input
        .file_stem()
        .ok_or_else(|| anyhow!("{} has no file name", input.display()))?;
    Ok(dir.join(stem).with_extension(ext))
}

/// Every `*.dltree` file directly inside `dir`, sorted by name.
pub fn tree_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir).with_context(|| format!("cannot list {}", dir.display()))? {
        let path = entry?.path();
        if path.is_file() && path.extension().is_some_and(|e| e == "dltree") {
            out.push(path);
        }
    }
    out.sort();
    Ok(out)
}

pub fn load_tree(path: &Path) -> Result<BinaryTree> {
    let text = read_text(path)?;
    parse_dltree(&text).map_err(|e| anyhow!("{}:{e}", path.display()))
}

/// Loads a corpus directory in parallel; ordered by (subject, region).
pub fn load_corpus(dir: &Path) -> Result<Vec<BinaryTree>> {
    let files = tree_files(dir)?;
    let trees: Vec<(PathBuf, BinaryTree)> = files
        .into_par_iter()
        .map(|p| load_tree(&p).map(|t| (p, t)))
        .collect::<Result<_>>()?;
    let mut seen: BTreeMap<(String, Region), PathBuf> = BTreeMap::new();
    let mut out = Vec::with_capacity(trees.len());
    for (path, tree) in trees {
        let key = (tree.subject_id.clone(), tree.region);
        if let Some(first) = seen.insert(key, path.clone()) {
            bail!(
                "{}: duplicate tree {} {} (also in {})",
                path.display(),
                tree.subject_id,
                tree.region,
                first.display()
            );
        }
        out.push(tree);
    }
    out.sort_by(|a, b| (&a.subject_id, a.region).cmp(&(&b.subject_id, b.region)));
    Ok(out)
}

/// Writes each tree as `<subject>_<R>.dltree` under `dir`.
pub fn write_corpus<'a>(dir: &Path, trees: impl IntoParallelIterator<Item = &'a BinaryTree>) -> Result<()> {
    ensure_dir(dir)?;
    trees.into_par_iter().try_for_each(|t| {
        let name = dlview::corpus::tree_file_name(&t.subject_id, t.region);
        write_atomic(&dir.join(name), serialize_dltree(t).as_bytes())
    })
}
