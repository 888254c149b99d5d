//! Correction edits and replayable edit scripts.
//!
//! Script format, one command per line (`#` comments and blank lines are
//! ignored):
//!
//! ```text
//! <subject> <region> DELETE_SUBTREE <node>
//! <subject> <region> TRIM_ROOT <node>
//! <subject> <region> DELETE_LEAF <node>
//! <subject> * EXCLUDE
//! ```

use std::fmt;

use crate::error::{Error, Result};
use crate::tree::{BinaryTree, CorpusEntry, NodeRef, Region};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EditOp {
    DeleteSubtree(String),
    TrimRoot(String),
    DeleteLeaf(String),
    ExcludeCase,
}

impl fmt::Display for EditOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EditOp::DeleteSubtree(n) => write!(f, "DELETE_SUBTREE {n}"),
            EditOp::TrimRoot(n) => write!(f, "TRIM_ROOT {n}"),
            EditOp::DeleteLeaf(n) => write!(f, "DELETE_LEAF {n}"),
            EditOp::ExcludeCase => f.write_str("EXCLUDE"),
        }
    }
}

/// Child positions from the root down to `target`.
fn path_to(tree: &BinaryTree, target: NodeRef) -> Vec<usize> {
    let mut path = Vec::new();
    let mut cur = target;
    while let Some(p) = tree.nodes()[cur.0].parent() {
        let pos = if tree.nodes()[p.0].left() == Some(cur) { 0 } else { 1 };
        path.push(pos);
        cur = p;
    }
    path.reverse();
    path
}

/// Removes the subtree rooted at `node_id`. When the parent is left with a
/// single child it merges with it: the merged trunk keeps the parent's id
/// and takes the mean of the two thicknesses. A phantom parent is simply
/// replaced by the remaining child.
pub fn delete_subtree(tree: &BinaryTree, node_id: &str) -> Result<BinaryTree> {
    let target = tree.require(node_id)?;
    if target == BinaryTree::ROOT {
        return Err(Error::Edit(format!("cannot delete the root `{node_id}`")));
    }
    let path = path_to(tree, target);
    let (&last, parent_path) = path.split_last().expect("non-root has a path");
    let mut root = tree.to_subtree(BinaryTree::ROOT);
    let mut parent = &mut root;
    for &step in parent_path {
        parent = &mut parent.children[step];
    }
    let had_two = parent.children.len() == 2;
    parent.children.remove(last);
    if had_two {
        let remaining = parent.children.pop().expect("one child left");
        match parent.thickness {
            None => *parent = remaining,
            Some(pt) => {
                let ct = remaining.thickness.expect("non-root has thickness");
                parent.thickness = Some((pt + ct) / 2.0);
                parent.children = remaining.children;
            }
        }
    }
    tree.with_root(root)
}

/// Keeps only the subtree rooted at `node_id`, discarding its ancestors and
/// their side branches.
pub fn trim_root(tree: &BinaryTree, node_id: &str) -> Result<BinaryTree> {
    let target = tree.require(node_id)?;
    tree.with_root(tree.to_subtree(target))
}

pub fn delete_leaf(tree: &BinaryTree, node_id: &str) -> Result<BinaryTree> {
    let target = tree.require(node_id)?;
    if !tree.nodes()[target.0].is_leaf() {
        return Err(Error::Edit(format!("`{node_id}` is not a leaf")));
    }
    delete_subtree(tree, node_id)
}

pub fn apply_op(tree: &BinaryTree, op: &EditOp) -> Result<BinaryTree> {
    match op {
        EditOp::DeleteSubtree(n) => delete_subtree(tree, n),
        EditOp::TrimRoot(n) => trim_root(tree, n),
        EditOp::DeleteLeaf(n) => delete_leaf(tree, n),
        EditOp::ExcludeCase => Err(Error::Edit("EXCLUDE applies to a whole case".into())),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EditCommand {
    /// 1-based line in the source script (0 when built in code).
    pub line: usize,
    pub subject: String,
    /// `None` only for [`EditOp::ExcludeCase`].
    pub region: Option<Region>,
    pub op: EditOp,
}

impl fmt::Display for EditCommand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.region {
            Some(r) => write!(f, "{} {} {}", self.subject, r, self.op),
            None => write!(f, "{} * {}", self.subject, self.op),
        }
    }
}

/// An ordered list of edit commands, applied sequentially.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EditScript {
    pub commands: Vec<EditCommand>,
}

impl EditScript {
    pub fn parse(text: &str) -> Result<Self> {
        let mut commands = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let err = |m: &str| Error::Script { line, message: m.to_string() };
            let toks: Vec<&str> = trimmed.split_whitespace().collect();
            let cmd = match toks.as_slice() {
                [subject, "*", "EXCLUDE"] => EditCommand {
                    line,
                    subject: subject.to_string(),
                    region: None,
                    op: EditOp::ExcludeCase,
                },
                [subject, region, verb, node] => {
                    let region: Region = region.parse().map_err(|e: String| err(&e))?;
                    let node = node.to_string();
                    let op = match *verb {
                        "DELETE_SUBTREE" => EditOp::DeleteSubtree(node),
                        "TRIM_ROOT" => EditOp::TrimRoot(node),
                        "DELETE_LEAF" => EditOp::DeleteLeaf(node),
                        other => return Err(err(&format!("unknown operation `{other}`"))),
                    };
                    EditCommand { line, subject: subject.to_string(), region: Some(region), op }
                }
                _ => return Err(err("expected `<subject> <region> <OP> <node>` or `<subject> * EXCLUDE`")),
            };
            commands.push(cmd);
        }
        Ok(Self { commands })
    }

    pub fn to_text(&self) -> String {
        self.commands.iter().map(|c| format!("{c}\n")).collect()
    }
}

/// Applies `script` to a corpus. Trees not named by any command are passed
/// through untouched; `EXCLUDE` removes every tree of the subject.
pub fn apply_script(corpus: Vec<CorpusEntry>, script: &EditScript) -> Result<Vec<CorpusEntry>> {
    let mut entries = corpus;
    for cmd in &script.commands {
        let fail = |message: String| Error::Script { line: cmd.line, message: format!("{message} (`{cmd}`)") };
        match cmd.region {
            None => {
                let before = entries.len();
                entries.retain(|e| e.tree.subject_id != cmd.subject);
                if entries.len() == before {
                    return Err(fail(format!("subject `{}` not in corpus", cmd.subject)));
                }
            }
            Some(region) => {
                let entry = entries
                    .iter_mut()
                    .find(|e| e.tree.subject_id == cmd.subject && e.tree.region == region)
                    .ok_or_else(|| fail(format!("no tree for {} {}", cmd.subject, region)))?;
                entry.tree = apply_op(&entry.tree, &cmd.op).map_err(|e| fail(e.to_string()))?;
            }
        }
    }
    Ok(entries)
}
