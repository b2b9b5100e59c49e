//! Random forest of CART trees: Gini impurity, bootstrap samples of size n,
//! √p candidate features per split, majority vote across trees.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Node {
    Leaf {
        valid: bool,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    pub fn predict(&self, x: &[f64]) -> bool {
        let mut at = 0;
        loop {
            match self.nodes[at] {
                Node::Leaf { valid } => return valid,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => at = if x[feature] <= threshold { left } else { right },
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], at: usize) -> usize {
            match nodes[at] {
                Node::Leaf { .. } => 1,
                Node::Split { left, right, .. } => 1 + walk(nodes, left).max(walk(nodes, right)),
            }
        }
        walk(&self.nodes, 0)
    }
}

fn gini(valid: usize, total: usize) -> f64 {
    if total == 0 {
        return 0.0;
    }
    let p = valid as f64 / total as f64;
    2.0 * p * (1.0 - p)
}

struct Builder<'a> {
    rows: &'a [Vec<f64>],
    labels: &'a [bool],
    mtry: usize,
}

impl Builder<'_> {
    /// Best split of `idx` on `feature`: (weighted child impurity, threshold).
    fn best_on(&self, idx: &[usize], feature: usize) -> Option<(f64, f64)> {
        let mut pairs: Vec<(f64, bool)> =
            idx.iter().map(|&i| (self.rows[i][feature], self.labels[i])).collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let total = pairs.len();
        let total_valid = pairs.iter().filter(|p| p.1).count();
        let mut left_valid = 0;
        let mut best: Option<(f64, f64)> = None;
        for i in 0..total - 1 {
            if pairs[i].1 {
                left_valid += 1;
            }
            let (a, b) = (pairs[i].0, pairs[i + 1].0);
            if a == b {
                continue;
            }
            let nl = i + 1;
            let nr = total - nl;
            let score = nl as f64 * gini(left_valid, nl) + nr as f64 * gini(total_valid - left_valid, nr);
            if best.is_none_or(|(s, _)| score < s) {
                let mut t = 0.5 * (a + b);
                if t >= b {
                    t = a;
                }
                best = Some((score, t));
            }
        }
        best
    }

    fn grow(&self, sample: Vec<usize>, rng: &mut ChaCha8Rng) -> Tree {
        let width = self.rows[0].len();
        let mut nodes = vec![Node::Leaf { valid: true }];
        let mut stack = vec![(0usize, sample)];
        let mut features: Vec<usize> = (0..width).collect();
        while let Some((at, idx)) = stack.pop() {
            let valid = idx.iter().filter(|&&i| self.labels[i]).count();
            let majority = 2 * valid >= idx.len();
            if valid == 0 || valid == idx.len() || idx.len() < 2 {
                nodes[at] = Node::Leaf { valid: majority };
                continue;
            }
            // Draw √p candidates; keep drawing past them only while none
            // of the candidates can split the node.
            features.shuffle(rng);
            let mut best: Option<(f64, usize, f64)> = None;
            for (tried, &f) in features.iter().enumerate() {
                if tried >= self.mtry && best.is_some() {
                    break;
                }
                if let Some((score, t)) = self.best_on(&idx, f) {
                    if best.is_none_or(|(s, _, _)| score < s) {
                        best = Some((score, f, t));
                    }
                }
            }
            let Some((_, feature, threshold)) = best else {
                nodes[at] = Node::Leaf { valid: majority };
                continue;
            };
            let (l, r): (Vec<usize>, Vec<usize>) =
                idx.iter().partition(|&&i| self.rows[i][feature] <= threshold);
            let left = nodes.len();
            nodes.push(Node::Leaf { valid: true });
            nodes.push(Node::Leaf { valid: true });
            nodes[at] = Node::Split {
                feature,
                threshold,
                left,
                right: left + 1,
            };
            stack.push((left + 1, r));
            stack.push((left, l));
        }
        Tree { nodes }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub trees: Vec<Tree>,
    pub seed: u64,
}

impl ForestModel {
    pub fn train(rows: &[Vec<f64>], labels: &[bool], trees: usize, seed: u64) -> Result<Self> {
        if rows.len() != labels.len() {
            return Err(Error::arg("rows and labels differ in length"));
        }
        if rows.is_empty() || trees == 0 {
            return Err(Error::arg("random forest needs rows and at least one tree"));
        }
        if labels.iter().all(|&l| l) || labels.iter().all(|&l| !l) {
            return Err(Error::data("random forest needs both classes present"));
        }
        let width = rows[0].len();
        let builder = Builder {
            rows,
            labels,
            mtry: ((width as f64).sqrt().floor() as usize).max(1),
        };
        let n = rows.len();
        let trees = (0..trees)
            .into_par_iter()
            .map(|t| {
                let mut r = rng::stream(seed, "forest-tree", t as u64);
                let sample: Vec<usize> = (0..n).map(|_| r.random_range(0..n)).collect();
                builder.grow(sample, &mut r)
            })
            .collect();
        Ok(ForestModel { trees, seed })
    }

    /// Fraction of trees voting for the valid class.
    pub fn valid_fraction(&self, x: &[f64]) -> f64 {
        let votes = self.trees.iter().filter(|t| t.predict(x)).count();
        votes as f64 / self.trees.len() as f64
    }

    pub fn predict(&self, x: &[f64]) -> bool {
        self.valid_fraction(x) >= 0.5
    }
}
