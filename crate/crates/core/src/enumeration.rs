//! Non-isomorphic trees, named families and random Toucher configurations.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::board::{Board, Edge};
use crate::game::{bit, Player, Tree};
use crate::strategy::cases::{case_applies, CaseId};

pub const MAX_ENUMERATION: usize = 16;
const MAX_REJECTIONS: usize = 1000;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EnumerationError {
    #[error("tree size {n} outside 1..={max}", max = MAX_ENUMERATION)]
    Bound { n: usize },
    #[error("{family} needs at least {min} vertices, got {n}")]
    TooSmall { family: &'static str, n: usize, min: usize },
    #[error("cannot pick {k} of {m} edges")]
    TooManyEdges { k: usize, m: usize },
    #[error("no admissible configuration after {0} attempts")]
    NoAdmissible(usize),
}

/// Center-rooted level sequence; equal exactly for isomorphic trees.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CanonicalCode(pub Vec<u8>);

impl std::fmt::Display for CanonicalCode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let (kind, seq) = self.0.split_first().expect("nonempty code");
        f.write_str(if *kind == 0 { "u" } else { "b" })?;
        for d in seq {
            write!(f, "{}", char::from_digit(*d as u32, 36).unwrap_or('?'))?;
        }
        Ok(())
    }
}

fn adjacency(tree: &Tree) -> Vec<Vec<usize>> {
    (0..tree.n()).map(|v| tree.neighbors(v).collect()).collect()
}

fn centers(adj: &[Vec<usize>]) -> Vec<usize> {
    let n = adj.len();
    if n <= 2 {
        return (0..n).collect();
    }
    let mut deg: Vec<usize> = adj.iter().map(Vec::len).collect();
    let mut layer: Vec<usize> = (0..n).filter(|&v| deg[v] == 1).collect();
    let mut left = n;
    while left > 2 {
        left -= layer.len();
        let mut next = Vec::new();
        for &v in &layer {
            for &w in &adj[v] {
                deg[w] -= 1;
                if deg[w] == 1 {
                    next.push(w);
                }
            }
        }
        layer = next;
    }
    let mut c = layer;
    c.sort_unstable();
    c
}

/// Level sequence of the subtree at `v` away from `parent`, children in
/// descending order.
fn rooted(adj: &[Vec<usize>], v: usize, parent: usize, depth: u8) -> Vec<u8> {
    let mut kids: Vec<Vec<u8>> = adj[v]
        .iter()
        .filter(|&&w| w != parent)
        .map(|&w| rooted(adj, w, v, depth + 1))
        .collect();
    kids.sort_unstable_by(|a, b| b.cmp(a));
    let mut out = vec![depth];
    for k in kids {
        out.extend(k);
    }
    out
}

pub fn canonical_code(tree: &Tree) -> CanonicalCode {
    let adj = adjacency(tree);
    let c = centers(&adj);
    let none = usize::MAX;
    if c.len() == 1 {
        let mut code = vec![0];
        code.extend(rooted(&adj, c[0], none, 0));
        CanonicalCode(code)
    } else {
        let mut a = rooted(&adj, c[0], c[1], 0);
        let mut b = rooted(&adj, c[1], c[0], 0);
        if a < b {
            std::mem::swap(&mut a, &mut b);
        }
        let mut code = vec![1];
        code.extend(a);
        code.extend(b);
        CanonicalCode(code)
    }
}

/// Builds the tree a code describes, labeling vertices in sequence order.
pub fn tree_from_code(code: &CanonicalCode) -> Tree {
    let seq = &code.0[1..];
    let mut edges = Vec::new();
    let mut last_at_depth: Vec<usize> = Vec::new();
    let mut first_root = None;
    for (i, &d) in seq.iter().enumerate() {
        let d = d as usize;
        last_at_depth.truncate(d);
        if d == 0 {
            match first_root {
                None => first_root = Some(i),
                Some(r) => edges.push((r, i)),
            }
        } else {
            edges.push((last_at_depth[d - 1], i));
        }
        last_at_depth.push(i);
    }
    Tree::new(seq.len(), &edges).expect("valid level sequence")
}

/// One tree per isomorphism class on `n` vertices, in code order.
pub fn all_trees(n: usize) -> Result<Vec<Tree>, EnumerationError> {
    Ok(all_codes(n)?.iter().map(tree_from_code).collect())
}

pub fn all_codes(n: usize) -> Result<Vec<CanonicalCode>, EnumerationError> {
    if n == 0 || n > MAX_ENUMERATION {
        return Err(EnumerationError::Bound { n });
    }
    let mut level = vec![canonical_code(&Tree::new(1, &[]).expect("single vertex"))];
    for size in 2..=n {
        let mut next = BTreeMap::new();
        for code in &level {
            let t = tree_from_code(code);
            let mut edges = t.edges().to_vec();
            for v in 0..t.n() {
                edges.push((v, size - 1));
                let grown = Tree::new(size, &edges).expect("leaf extension");
                next.insert(canonical_code(&grown), ());
                edges.pop();
            }
        }
        level = next.into_keys().collect();
    }
    Ok(level)
}

pub fn path(n: usize) -> Result<Tree, EnumerationError> {
    if n == 0 {
        return Err(EnumerationError::TooSmall { family: "path", n, min: 1 });
    }
    let edges: Vec<(usize, usize)> = (1..n).map(|i| (i - 1, i)).collect();
    Ok(Tree::new(n, &edges).expect("path"))
}

/// `K_{1,n-1}` with center 0.
pub fn star(n: usize) -> Result<Tree, EnumerationError> {
    if n < 3 {
        return Err(EnumerationError::TooSmall { family: "star", n, min: 3 });
    }
    let edges: Vec<(usize, usize)> = (1..n).map(|i| (0, i)).collect();
    Ok(Tree::new(n, &edges).expect("star"))
}

/// Path `0..n-2` plus leaf `n-1` on vertex 1.
pub fn s_n(n: usize) -> Result<Tree, EnumerationError> {
    if n < 4 {
        return Err(EnumerationError::TooSmall { family: "S_n", n, min: 4 });
    }
    let mut edges: Vec<(usize, usize)> = (1..n - 1).map(|i| (i - 1, i)).collect();
    edges.push((1, n - 1));
    Ok(Tree::new(n, &edges).expect("S_n"))
}

/// Board for `F(T, C, L)` with the Toucher edges given as an index mask.
pub fn config_board(tree: &Tree, c: u64) -> Board {
    let mut b = Board::from_tree(tree);
    for (e, &(u, v)) in tree.edges().iter().enumerate() {
        if c & bit(e) != 0 {
            b.claim(Edge::new(u, v), Player::Toucher);
        }
    }
    b.with_leaves_excluded()
}

/// Seeded uniform `k`-subset of edges on which none of `exclusions` applies.
pub fn random_config(tree: &Tree, k: usize, seed: u64, exclusions: &[CaseId]) -> Result<u64, EnumerationError> {
    let m = tree.edge_count();
    if k > m {
        return Err(EnumerationError::TooManyEdges { k, m });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..MAX_REJECTIONS {
        let c = rand::seq::index::sample(&mut rng, m, k)
            .into_iter()
            .fold(0u64, |acc, e| acc | bit(e));
        let b = config_board(tree, c);
        if exclusions.iter().all(|&case| !case_applies(&b, case)) {
            return Ok(c);
        }
    }
    Err(EnumerationError::NoAdmissible(MAX_REJECTIONS))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_counts() {
        let counts: Vec<usize> = (1..=10).map(|n| all_trees(n).unwrap().len()).collect();
        assert_eq!(counts, vec![1, 1, 1, 2, 3, 6, 11, 23, 47, 106]);
    }

    #[test]
    fn code_round_trip() {
        for t in all_trees(8).unwrap() {
            assert_eq!(tree_from_code(&canonical_code(&t)), t);
        }
    }

    #[test]
    fn families() {
        assert_eq!(path(5).unwrap().to_string(), "5; 0-1, 1-2, 2-3, 3-4");
        assert_eq!(star(4).unwrap().degree(0), 3);
        let s6 = s_n(6).unwrap();
        assert!(s6.edge_between(1, 5).is_some());
        assert_eq!(s6.edge_count(), 5);
        assert!(s_n(3).is_err());
        assert!(star(2).is_err());
        assert!(all_trees(17).is_err());
    }

    #[test]
    fn random_config_cases() {
        let p6 = path(6).unwrap();
        assert_eq!(random_config(&p6, 0, 3, &[]), Ok(0));
        let s5 = star(5).unwrap();
        assert!(random_config(&s5, 2, 7, &[CaseId::L4C4]).is_err());
        let c = random_config(&p6, 2, 11, &[]).unwrap();
        assert_eq!(c.count_ones(), 2);
        assert_eq!(random_config(&p6, 2, 11, &[]).unwrap(), c);
    }
}
