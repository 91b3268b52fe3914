use serde::{Deserialize, Serialize};

use super::LabeledMatrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TreeParams {
    pub max_depth: usize,
    pub min_leaf: usize,
}

impl Default for TreeParams {
    fn default() -> Self {
        Self {
            max_depth: 5,
            min_leaf: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum Node {
    Leaf {
        label: u8,
        counts: [usize; 2],
    },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

/// Sum of squared class counts over size, `(a² + b²) / n`, kept as an exact
/// fraction. Larger means purer.
#[derive(Debug, Clone, Copy)]
struct Purity {
    num: u128,
    den: u128,
}

impl Purity {
    fn node(c: [usize; 2]) -> Self {
        let (a, b) = (c[0] as u128, c[1] as u128);
        Self {
            num: a * a + b * b,
            den: a + b,
        }
    }

    fn split(l: [usize; 2], r: [usize; 2]) -> Self {
        let (pl, pr) = (Self::node(l), Self::node(r));
        Self {
            num: pl.num * pr.den + pr.num * pl.den,
            den: pl.den * pr.den,
        }
    }

    fn beats(self, other: Self) -> bool {
        self.num * other.den > other.num * self.den
    }
}

fn majority(c: [usize; 2]) -> u8 {
    u8::from(c[1] > c[0])
}

/// CART with Gini impurity. Candidate thresholds are midpoints between
/// consecutive distinct values; the first strictly best split in (feature,
/// threshold) order wins.
pub(crate) fn fit(data: &LabeledMatrix, p: &TreeParams) -> Vec<Node> {
    let mut nodes = Vec::new();
    let all: Vec<usize> = (0..data.len()).collect();
    grow(data, p, &all, 0, &mut nodes);
    nodes
}

fn counts(data: &LabeledMatrix, idx: &[usize]) -> [usize; 2] {
    let pos = idx.iter().filter(|&&i| data.labels[i] == 1).count();
    [idx.len() - pos, pos]
}

fn grow(data: &LabeledMatrix, p: &TreeParams, idx: &[usize], depth: usize, nodes: &mut Vec<Node>) -> usize {
    let c = counts(data, idx);
    let me = nodes.len();
    nodes.push(Node::Leaf {
        label: majority(c),
        counts: c,
    });
    if depth >= p.max_depth || c[0] == 0 || c[1] == 0 || idx.len() < 2 * p.min_leaf.max(1) {
        return me;
    }
    let min_leaf = p.min_leaf.max(1);
    let mut best: Option<(Purity, usize, f64)> = None;
    let parent = Purity::node(c);
    let mut order = idx.to_vec();
    for f in 0..data.dim() {
        order.sort_by(|&a, &b| data.row(a)[f].total_cmp(&data.row(b)[f]).then(a.cmp(&b)));
        let mut left = [0usize; 2];
        for k in 0..order.len() - 1 {
            left[data.labels[order[k]] as usize] += 1;
            let n_left = k + 1;
            if n_left < min_leaf || order.len() - n_left < min_leaf {
                continue;
            }
            let lo = data.row(order[k])[f];
            let hi = data.row(order[k + 1])[f];
            if lo >= hi {
                continue;
            }
            let right = [c[0] - left[0], c[1] - left[1]];
            let score = Purity::split(left, right);
            if best.as_ref().is_none_or(|(b, _, _)| score.beats(*b)) {
                let mid = lo + (hi - lo) / 2.0;
                let threshold = if mid < hi { mid } else { lo };
                best = Some((score, f, threshold));
            }
        }
    }
    let Some((score, feature, threshold)) = best else {
        return me;
    };
    if !score.beats(parent) {
        return me;
    }
    let (l, r): (Vec<usize>, Vec<usize>) = idx.iter().partition(|&&i| data.row(i)[feature] <= threshold);
    let left = grow(data, p, &l, depth + 1, nodes);
    let right = grow(data, p, &r, depth + 1, nodes);
    nodes[me] = Node::Split {
        feature,
        threshold,
        left,
        right,
    };
    me
}

pub(crate) fn predict(nodes: &[Node], x: &[f64]) -> u8 {
    let mut i = 0;
    loop {
        match &nodes[i] {
            Node::Leaf { label, .. } => return *label,
            Node::Split {
                feature,
                threshold,
                left,
                right,
            } => i = if x[*feature] <= *threshold { *left } else { *right },
        }
    }
}

pub(crate) fn depth(nodes: &[Node]) -> usize {
    fn walk(nodes: &[Node], i: usize) -> usize {
        match &nodes[i] {
            Node::Leaf { .. } => 0,
            Node::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
        }
    }
    walk(nodes, 0)
}
