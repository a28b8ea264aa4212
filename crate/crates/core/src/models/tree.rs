use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::Task;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreeParams {
    pub max_depth: usize,
    pub min_leaf: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Node {
    Leaf { value: f64 },
    Split { feature: usize, threshold: f64, left: usize, right: usize },
}

/// CART tree: squared error for regression, Gini impurity for ±1 classes.
/// Rows with `x[feature] <= threshold` go left.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub task: Task,
    pub nodes: Vec<Node>,
}

/// Summed impurity of a node: squared error about the mean, or Gini times
/// the row count.
fn impurity(task: Task, count: f64, sum: f64, sumsq: f64) -> f64 {
    if count == 0.0 {
        return 0.0;
    }
    match task {
        Task::Regression => (sumsq - sum * sum / count).max(0.0),
        Task::Classification => {
            // targets are ±1, so sum = pos - neg
            let pos = (count + sum) / 2.0;
            let q = pos / count;
            count * 2.0 * q * (1.0 - q)
        }
    }
}

fn leaf_value(task: Task, y: &[f64], idx: &[usize]) -> f64 {
    let sum: f64 = idx.iter().map(|&i| y[i]).sum();
    match task {
        Task::Regression => sum / idx.len() as f64,
        Task::Classification => {
            if sum > 0.0 {
                1.0
            } else {
                -1.0
            }
        }
    }
}

struct Builder<'a> {
    rows: &'a [Vec<f64>],
    y: &'a [f64],
    task: Task,
    params: TreeParams,
    nodes: Vec<Node>,
}

impl Builder<'_> {
    fn stats(&self, idx: &[usize]) -> (f64, f64, f64) {
        let mut s = 0.0;
        let mut ss = 0.0;
        for &i in idx {
            s += self.y[i];
            ss += self.y[i] * self.y[i];
        }
        (idx.len() as f64, s, ss)
    }

    /// Lowest-impurity split as (feature, threshold), first found on ties.
    fn best_split(&self, idx: &[usize]) -> Option<(usize, f64)> {
        let (n, s, ss) = self.stats(idx);
        let parent = impurity(self.task, n, s, ss);
        let min_leaf = self.params.min_leaf;
        let mut best: Option<(f64, usize, f64)> = None;
        let p = self.rows[0].len();
        let mut order = idx.to_vec();
        for f in 0..p {
            order.sort_by(|&a, &b| self.rows[a][f].total_cmp(&self.rows[b][f]).then(a.cmp(&b)));
            let (mut ls, mut lss) = (0.0, 0.0);
            for k in 0..order.len() - 1 {
                let yi = self.y[order[k]];
                ls += yi;
                lss += yi * yi;
                let left_n = k + 1;
                let right_n = order.len() - left_n;
                if left_n < min_leaf || right_n < min_leaf {
                    continue;
                }
                let here = self.rows[order[k]][f];
                let next = self.rows[order[k + 1]][f];
                if here == next {
                    continue;
                }
                let child = impurity(self.task, left_n as f64, ls, lss)
                    + impurity(self.task, right_n as f64, s - ls, ss - lss);
                if child < parent * (1.0 - 1e-12) && best.is_none_or(|(b, _, _)| child < b) {
                    best = Some((child, f, here + (next - here) / 2.0));
                }
            }
        }
        best.map(|(_, f, t)| (f, t))
    }

    fn build(&mut self, idx: Vec<usize>, depth: usize) -> usize {
        let at = self.nodes.len();
        self.nodes.push(Node::Leaf {
            value: leaf_value(self.task, self.y, &idx),
        });
        if depth >= self.params.max_depth || idx.len() < 2 * self.params.min_leaf {
            return at;
        }
        if let Some((feature, threshold)) = self.best_split(&idx) {
            let (l, r): (Vec<usize>, Vec<usize>) = idx.iter().partition(|&&i| self.rows[i][feature] <= threshold);
            let left = self.build(l, depth + 1);
            let right = self.build(r, depth + 1);
            self.nodes[at] = Node::Split {
                feature,
                threshold,
                left,
                right,
            };
        }
        at
    }
}

impl DecisionTree {
    /// Grows greedily from the root. For classification `y` holds ±1.
    pub fn fit(rows: &[Vec<f64>], y: &[f64], task: Task, params: TreeParams) -> Result<DecisionTree> {
        if rows.is_empty() || rows.len() != y.len() {
            return Err(Error::Argument(format!("{} rows and {} targets", rows.len(), y.len())));
        }
        let mut b = Builder {
            rows,
            y,
            task,
            params,
            nodes: Vec::new(),
        };
        b.build((0..rows.len()).collect(), 0);
        Ok(DecisionTree { task, nodes: b.nodes })
    }

    /// Index of the leaf that `x` falls into.
    pub fn leaf_of(&self, x: &[f64]) -> usize {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                Node::Leaf { .. } => return at,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => at = if x[*feature] <= *threshold { *left } else { *right },
            }
        }
    }

    pub fn predict(&self, x: &[f64]) -> f64 {
        match self.nodes[self.leaf_of(x)] {
            Node::Leaf { value } => value,
            Node::Split { .. } => unreachable!(),
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], at: usize) -> usize {
            match &nodes[at] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
            }
        }
        walk(&self.nodes, 0)
    }
}
