use alloc::vec::Vec;

/// Tree node. Rows with `x[feature] < threshold` go left.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(untagged)]
pub enum Node {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
        /// Loss reduction of the split, net of `gamma`.
        gain: f64,
        /// Hessian sum reaching the node.
        cover: f64,
    },
    Leaf {
        leaf: f64,
        cover: f64,
    },
}

/// Binary regression tree stored as a node array rooted at index 0.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    pub fn leaf(value: f64) -> Self {
        Self {
            nodes: alloc::vec![Node::Leaf {
                leaf: value,
                cover: 0.0
            }],
        }
    }

    pub fn predict(&self, row: &[f64]) -> f64 {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                Node::Leaf { leaf, .. } => return leaf,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                    ..
                } => i = if row[feature] < threshold { left } else { right },
            }
        }
    }

    /// Edges on the longest root-to-leaf path.
    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], i: usize) -> usize {
            match nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, left).max(walk(nodes, right)),
            }
        }
        walk(&self.nodes, 0)
    }

    pub fn split_count(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Split { .. })).count()
    }

    /// Structural check: child indices in range, every node reachable once
    /// and features below `n_features`.
    pub fn is_well_formed(&self, n_features: usize) -> bool {
        let mut seen = alloc::vec![false; self.nodes.len()];
        let mut stack = alloc::vec![0usize];
        while let Some(i) = stack.pop() {
            if i >= self.nodes.len() || seen[i] {
                return false;
            }
            seen[i] = true;
            if let Node::Split {
                feature, left, right, ..
            } = self.nodes[i]
            {
                if feature >= n_features {
                    return false;
                }
                stack.push(left);
                stack.push(right);
            }
        }
        seen.iter().all(|&s| s)
    }
}

/// Per-row statistics seen by the tree builder.
#[derive(Debug, Clone, Copy)]
pub(crate) struct GradPair {
    pub g: f64,
    pub h: f64,
}

pub(crate) struct TreeParams {
    pub max_depth: usize,
    pub gamma: f64,
    pub alpha: f64,
    pub lambda: f64,
    pub min_child_weight: f64,
    pub learning_rate: f64,
}

impl TreeParams {
    fn soft_threshold(&self, g: f64) -> f64 {
        if g > self.alpha {
            g - self.alpha
        } else if g < -self.alpha {
            g + self.alpha
        } else {
            0.0
        }
    }

    fn score(&self, g: f64, h: f64) -> f64 {
        let d = h + self.lambda;
        if d <= 0.0 {
            return 0.0;
        }
        let t = self.soft_threshold(g);
        t * t / d
    }

    fn leaf_value(&self, g: f64, h: f64) -> f64 {
        let d = h + self.lambda;
        if d <= 0.0 {
            return 0.0;
        }
        -self.soft_threshold(g) / d * self.learning_rate
    }
}

struct BestSplit {
    feature: usize,
    threshold: f64,
    gain: f64,
}

/// Builds one tree over `rows` (indices into `x`) using only `features`.
pub(crate) fn build_tree(
    x: &[Vec<f64>],
    grads: &[GradPair],
    rows: Vec<usize>,
    features: &[usize],
    params: &TreeParams,
) -> Tree {
    let mut nodes = Vec::new();
    grow(x, grads, rows, features, params, 0, &mut nodes);
    Tree { nodes }
}

/// Gradient and hessian sums in an order that does not depend on how rows
/// are numbered, so permuting the table reproduces the same floats.
fn canonical_sums(grads: &[GradPair], rows: &[usize]) -> (f64, f64) {
    let mut pairs: Vec<(f64, f64)> = rows.iter().map(|&r| (grads[r].g, grads[r].h)).collect();
    pairs.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    pairs.iter().fold((0.0, 0.0), |(g, h), p| (g + p.0, h + p.1))
}

fn grow(
    x: &[Vec<f64>],
    grads: &[GradPair],
    rows: Vec<usize>,
    features: &[usize],
    params: &TreeParams,
    depth: usize,
    nodes: &mut Vec<Node>,
) -> usize {
    let (g, h) = canonical_sums(grads, &rows);
    let id = nodes.len();
    nodes.push(Node::Leaf {
        leaf: params.leaf_value(g, h),
        cover: h,
    });
    if depth >= params.max_depth || rows.len() < 2 {
        return id;
    }
    let Some(best) = find_split(x, grads, &rows, features, params, g, h) else {
        return id;
    };
    let (left_rows, right_rows): (Vec<usize>, Vec<usize>) =
        rows.iter().partition(|&&r| x[r][best.feature] < best.threshold);
    drop(rows);
    let left = grow(x, grads, left_rows, features, params, depth + 1, nodes);
    let right = grow(x, grads, right_rows, features, params, depth + 1, nodes);
    nodes[id] = Node::Split {
        feature: best.feature,
        threshold: best.threshold,
        left,
        right,
        gain: best.gain,
        cover: h,
    };
    id
}

fn find_split(
    x: &[Vec<f64>],
    grads: &[GradPair],
    rows: &[usize],
    features: &[usize],
    params: &TreeParams,
    g: f64,
    h: f64,
) -> Option<BestSplit> {
    let parent = params.score(g, h);
    let mut best: Option<BestSplit> = None;
    let mut items: Vec<(f64, f64, f64)> = Vec::with_capacity(rows.len());
    for &f in features {
        items.clear();
        items.extend(rows.iter().map(|&r| (x[r][f], grads[r].g, grads[r].h)));
        items.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)).then(a.2.total_cmp(&b.2)));
        let (mut gl, mut hl) = (0.0, 0.0);
        for i in 0..items.len() - 1 {
            gl += items[i].1;
            hl += items[i].2;
            let (a, b) = (items[i].0, items[i + 1].0);
            if a == b {
                continue;
            }
            let (gr, hr) = (g - gl, h - hl);
            if hl < params.min_child_weight || hr < params.min_child_weight {
                continue;
            }
            let gain = 0.5 * (params.score(gl, hl) + params.score(gr, hr) - parent) - params.gamma;
            if !(gain > 0.0) {
                continue;
            }
            if best.as_ref().is_none_or(|bs| gain > bs.gain) {
                let mut threshold = a + (b - a) / 2.0;
                if !(threshold > a) {
                    threshold = b;
                }
                best = Some(BestSplit {
                    feature: f,
                    threshold,
                    gain,
                });
            }
        }
    }
    best
}
