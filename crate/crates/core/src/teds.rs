//! Ordered tree edit distance (Zhang–Shasha) and TEDS similarity.

use serde::{Deserialize, Serialize};

use crate::html::HtmlTree;
use crate::metrics::levenshtein;

/// How text nodes with different content are charged when relabeled.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TextCost {
    /// Levenshtein distance divided by the longer text's length.
    #[default]
    Normalized,
    /// 0 for equal texts, 1 otherwise.
    Strict,
}

/// Unit insert/delete costs plus a relabel cost.
///
/// Relabeling between different labels costs 1. Text nodes are charged by
/// [`TextCost`]; cells whose spans disagree cost 1.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CostModel {
    pub text: TextCost,
}

impl CostModel {
    pub const INSERT: f64 = 1.0;
    pub const DELETE: f64 = 1.0;

    pub fn strict() -> Self {
        Self {
            text: TextCost::Strict,
        }
    }

    pub fn relabel(&self, a: &HtmlTree, b: &HtmlTree) -> f64 {
        match (a.text_value(), b.text_value()) {
            (Some(x), Some(y)) => {
                if x == y {
                    0.0
                } else {
                    match self.text {
                        TextCost::Strict => 1.0,
                        TextCost::Normalized => normalized_distance(x, y),
                    }
                }
            }
            (None, None) if a.label() == b.label() => {
                if a.is_cell() && a.effective_span() != b.effective_span() {
                    1.0
                } else {
                    0.0
                }
            }
            _ => 1.0,
        }
    }
}

/// Codepoint Levenshtein distance over the longer length, in [0, 1].
pub fn normalized_distance(a: &str, b: &str) -> f64 {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let longest = a.len().max(b.len());
    if longest == 0 {
        return 0.0;
    }
    levenshtein(&a, &b) as f64 / longest as f64
}

/// Postorder view of a tree: nodes plus leftmost-leaf indices.
struct Postorder<'a> {
    nodes: Vec<&'a HtmlTree>,
    leftmost: Vec<usize>,
}

impl<'a> Postorder<'a> {
    fn new(root: &'a HtmlTree) -> Self {
        let mut p = Postorder {
            nodes: Vec::with_capacity(root.size()),
            leftmost: Vec::with_capacity(root.size()),
        };
        p.visit(root);
        p
    }

    fn visit(&mut self, node: &'a HtmlTree) -> usize {
        let mut first_leaf = None;
        for child in node.children() {
            let l = self.visit(child);
            first_leaf.get_or_insert(l);
        }
        let idx = self.nodes.len();
        self.nodes.push(node);
        let l = first_leaf.unwrap_or(idx);
        self.leftmost.push(l);
        l
    }

    /// Nodes that are the highest-numbered with their leftmost leaf.
    fn keyroots(&self) -> Vec<usize> {
        let n = self.nodes.len();
        let mut seen = vec![false; n];
        let mut roots = Vec::new();
        for i in (0..n).rev() {
            let l = self.leftmost[i];
            if !seen[l] {
                seen[l] = true;
                roots.push(i);
            }
        }
        roots.reverse();
        roots
    }
}

/// Minimal edit script cost turning `t1` into `t2`.
pub fn tree_edit_distance(t1: &HtmlTree, t2: &HtmlTree, cost: &CostModel) -> f64 {
    let a = Postorder::new(t1);
    let b = Postorder::new(t2);
    let (n, m) = (a.nodes.len(), b.nodes.len());
    let mut td = vec![vec![0.0f64; m]; n];
    let mut fd = vec![vec![0.0f64; m + 1]; n + 1];

    for &i in &a.keyroots() {
        for &j in &b.keyroots() {
            let (li, lj) = (a.leftmost[i], b.leftmost[j]);
            // fd[x][y] is the forest distance for a[li..li+x] vs b[lj..lj+y].
            fd[0][0] = 0.0;
            for x in 1..=i - li + 1 {
                fd[x][0] = fd[x - 1][0] + CostModel::DELETE;
            }
            for y in 1..=j - lj + 1 {
                fd[0][y] = fd[0][y - 1] + CostModel::INSERT;
            }
            for x in 1..=i - li + 1 {
                let ni = li + x - 1;
                for y in 1..=j - lj + 1 {
                    let nj = lj + y - 1;
                    let del = fd[x - 1][y] + CostModel::DELETE;
                    let ins = fd[x][y - 1] + CostModel::INSERT;
                    if a.leftmost[ni] == li && b.leftmost[nj] == lj {
                        let rel = fd[x - 1][y - 1] + cost.relabel(a.nodes[ni], b.nodes[nj]);
                        let best = del.min(ins).min(rel);
                        fd[x][y] = best;
                        td[ni][nj] = best;
                    } else {
                        let px = a.leftmost[ni] - li;
                        let py = b.leftmost[nj] - lj;
                        fd[x][y] = del.min(ins).min(fd[px][py] + td[ni][nj]);
                    }
                }
            }
        }
    }
    td[n - 1][m - 1]
}

/// `1 - TED / max(size)`, clamped to [0, 1].
pub fn teds_similarity(t1: &HtmlTree, t2: &HtmlTree) -> f64 {
    teds_similarity_with(t1, t2, &CostModel::default())
}

pub fn teds_similarity_with(t1: &HtmlTree, t2: &HtmlTree, cost: &CostModel) -> f64 {
    let largest = t1.size().max(t2.size()) as f64;
    let d = tree_edit_distance(t1, t2, cost);
    (1.0 - d / largest).clamp(0.0, 1.0)
}
