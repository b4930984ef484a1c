//! Failure call tree: the caller/callee hierarchy of the failing run with
//! SIBs attached where they occurred.
//!
//! The tree is the prefix merge of every event's stack extended with the
//! event's callee, so a node stands for a full call path from the entry
//! point. The same method reached through two different callers yields two
//! nodes. SIBs are attached to the node their anchor stack leads to and are
//! reachable from every ancestor of that node.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;

use thiserror::Error;

use crate::diff::Sib;
use crate::model::{MethodRef, Origin, StackFrame, Trace};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TreeError {
    #[error("no suspicious invocation blocks to localize")]
    NoSibs,
    #[error("anchor of SIB {sib} ({path}) does not occur in the failure trace")]
    AnchorNotInTrace { sib: usize, path: String },
}

pub type NodeId = usize;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeNode {
    pub method: MethodRef,
    pub origin: Origin,
    pub parent: Option<NodeId>,
    /// In order of first occurrence in the failure trace.
    pub children: Vec<NodeId>,
    pub attached_sibs: Vec<usize>,
    pub depth: usize,
    /// Seq of the first failure event whose path passes through this node.
    pub first_seq: Option<u64>,
}

#[derive(Debug, Clone)]
pub struct FailureCallTree {
    nodes: Vec<TreeNode>,
    sibs: Vec<Sib>,
    total_sib_weight: u64,
    max_depth: usize,
    app_package: String,
}

pub const ROOT: NodeId = 0;

impl FailureCallTree {
    fn with_root(root: MethodRef, app_package: &str) -> Self {
        FailureCallTree {
            nodes: vec![TreeNode {
                origin: root.origin(app_package),
                method: root,
                parent: None,
                children: Vec::new(),
                attached_sibs: Vec::new(),
                depth: 0,
                first_seq: None,
            }],
            sibs: Vec::new(),
            total_sib_weight: 0,
            max_depth: 0,
            app_package: app_package.to_owned(),
        }
    }

    fn child(&self, parent: NodeId, method: &MethodRef) -> Option<NodeId> {
        self.nodes[parent]
            .children
            .iter()
            .copied()
            .find(|&c| &self.nodes[c].method == method)
    }

    fn child_or_insert(&mut self, parent: NodeId, method: &MethodRef, seq: u64) -> NodeId {
        if let Some(c) = self.child(parent, method) {
            return c;
        }
        let id = self.nodes.len();
        let depth = self.nodes[parent].depth + 1;
        self.max_depth = self.max_depth.max(depth);
        self.nodes.push(TreeNode {
            method: method.clone(),
            origin: method.origin(&self.app_package),
            parent: Some(parent),
            children: Vec::new(),
            attached_sibs: Vec::new(),
            depth,
            first_seq: Some(seq),
        });
        self.nodes[parent].children.push(id);
        id
    }

    /// Follows `stack` from the root; `stack[0]` must be the root method.
    pub fn find_path(&self, stack: &[StackFrame]) -> Option<NodeId> {
        let (first, rest) = stack.split_first()?;
        if first.method != self.nodes[ROOT].method {
            return None;
        }
        rest.iter()
            .try_fold(ROOT, |node, frame| self.child(node, &frame.method))
    }

    pub fn root(&self) -> &TreeNode {
        &self.nodes[ROOT]
    }

    pub fn node(&self, id: NodeId) -> &TreeNode {
        &self.nodes[id]
    }

    pub fn nodes(&self) -> &[TreeNode] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn sibs(&self) -> &[Sib] {
        &self.sibs
    }

    pub fn sib(&self, id: usize) -> Option<&Sib> {
        self.sibs.iter().find(|s| s.id == id)
    }

    pub fn total_sib_weight(&self) -> u64 {
        self.total_sib_weight
    }

    pub fn max_depth(&self) -> usize {
        self.max_depth
    }

    pub fn app_package(&self) -> &str {
        &self.app_package
    }

    /// Methods from the root down to `id`.
    pub fn path(&self, id: NodeId) -> Vec<&MethodRef> {
        let mut path = Vec::with_capacity(self.nodes[id].depth + 1);
        let mut cur = Some(id);
        while let Some(n) = cur {
            path.push(&self.nodes[n].method);
            cur = self.nodes[n].parent;
        }
        path.reverse();
        path
    }

    pub fn path_text(&self, id: NodeId) -> String {
        self.path(id)
            .iter()
            .map(|m| m.to_string())
            .collect::<Vec<_>>()
            .join(" > ")
    }

    /// Node ids in depth-first pre-order, children in first-occurrence order.
    pub fn preorder(&self) -> Vec<NodeId> {
        let mut out = Vec::with_capacity(self.nodes.len());
        let mut stack = vec![ROOT];
        while let Some(n) = stack.pop() {
            out.push(n);
            stack.extend(self.nodes[n].children.iter().rev());
        }
        out
    }

    pub fn weight_of(&self, sib_ids: &BTreeSet<usize>) -> u64 {
        sib_ids
            .iter()
            .filter_map(|&id| self.sib(id))
            .map(|s| s.weight)
            .sum()
    }
}

pub fn build_failure_tree(failure: &Trace, sibs: &[Sib]) -> Result<FailureCallTree, TreeError> {
    if sibs.is_empty() {
        return Err(TreeError::NoSibs);
    }
    let root = failure
        .entry_point()
        .cloned()
        .or_else(|| sibs[0].anchor_stack.first().map(|f| f.method.clone()))
        .unwrap_or_else(MethodRef::synthetic_root);
    let mut tree = FailureCallTree::with_root(root, &failure.app_package);

    for ev in &failure.events {
        let mut node = ROOT;
        if tree.nodes[ROOT].first_seq.is_none() {
            tree.nodes[ROOT].first_seq = Some(ev.seq);
        }
        let frames = ev.stack.iter().skip(1).map(|f| &f.method);
        for method in frames.chain(std::iter::once(&ev.callee)) {
            node = tree.child_or_insert(node, method, ev.seq);
        }
    }

    for sib in sibs {
        let node =
            tree.find_path(&sib.anchor_stack)
                .ok_or_else(|| TreeError::AnchorNotInTrace {
                    sib: sib.id,
                    path: sib
                        .anchor_stack
                        .iter()
                        .map(|f| f.method.to_string())
                        .collect::<Vec<_>>()
                        .join(" > "),
                })?;
        tree.nodes[node].attached_sibs.push(sib.id);
        tree.total_sib_weight += sib.weight;
    }
    tree.sibs = sibs.to_vec();
    Ok(tree)
}

/// Union of the SIBs attached to `node` and all of its descendants.
pub fn reachable_sibs(tree: &FailureCallTree, node: NodeId) -> BTreeSet<usize> {
    let mut out = BTreeSet::new();
    let mut stack = vec![node];
    while let Some(n) = stack.pop() {
        let n = tree.node(n);
        out.extend(n.attached_sibs.iter().copied());
        stack.extend(n.children.iter().copied());
    }
    out
}

/// Reachable SIB sets for every node, computed bottom-up in one pass.
pub fn reachable_sibs_all(tree: &FailureCallTree) -> Vec<BTreeSet<usize>> {
    let mut sets: Vec<BTreeSet<usize>> = tree
        .nodes()
        .iter()
        .map(|n| n.attached_sibs.iter().copied().collect())
        .collect();
    // Children always have larger ids than their parents.
    for id in (1..tree.len()).rev() {
        let parent = tree.node(id).parent.expect("non-root node has a parent");
        let child = std::mem::take(&mut sets[id]);
        sets[parent].extend(child.iter().copied());
        sets[id] = child;
    }
    sets
}

fn dot_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Renders the tree as a DOT digraph. Vertices are numbered in pre-order;
/// SIB-carrying vertices get an extra `sibs=<ids>` label line.
pub fn emit_dot(tree: &FailureCallTree) -> String {
    let order = tree.preorder();
    let mut name = HashMap::with_capacity(order.len());
    for (i, &id) in order.iter().enumerate() {
        name.insert(id, i);
    }
    let mut out = String::from("digraph failure_call_tree {\n  node [shape=box];\n");
    for &id in &order {
        let n = tree.node(id);
        let mut label = dot_escape(&n.method.to_string());
        if !n.attached_sibs.is_empty() {
            let ids = n
                .attached_sibs
                .iter()
                .map(|s| s.to_string())
                .collect::<Vec<_>>()
                .join(",");
            write!(label, "\\nsibs={ids}").unwrap();
            writeln!(
                out,
                "  n{} [label=\"{label}\", style=filled, fillcolor=salmon];",
                name[&id]
            )
            .unwrap();
        } else {
            writeln!(out, "  n{} [label=\"{label}\"];", name[&id]).unwrap();
        }
    }
    for &id in &order {
        for &c in &tree.node(id).children {
            writeln!(out, "  n{} -> n{};", name[&id], name[&c]).unwrap();
        }
    }
    out.push_str("}\n");
    out
}
