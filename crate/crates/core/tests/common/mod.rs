//! Brute-force helpers shared by the integration tests.
#![allow(dead_code)]

use toucher_core::Tree;

/// Every labeled tree on `n` vertices, decoded from Prüfer sequences.
pub fn prufer_trees(n: usize) -> Vec<Tree> {
    if n <= 2 {
        let edges: Vec<(usize, usize)> = (1..n).map(|i| (0, i)).collect();
        return vec![Tree::new(n, &edges).unwrap()];
    }
    let total = n.pow(n as u32 - 2);
    let mut out = Vec::with_capacity(total);
    let mut seq = vec![0usize; n - 2];
    for mut code in 0..total {
        for s in seq.iter_mut() {
            *s = code % n;
            code /= n;
        }
        let mut degree = vec![1usize; n];
        for &s in &seq {
            degree[s] += 1;
        }
        let mut edges = Vec::with_capacity(n - 1);
        for &s in &seq {
            let leaf = (0..n).find(|&v| degree[v] == 1).unwrap();
            edges.push((leaf, s));
            degree[leaf] -= 1;
            degree[s] -= 1;
        }
        let rest: Vec<usize> = (0..n).filter(|&v| degree[v] == 1).collect();
        edges.push((rest[0], rest[1]));
        out.push(Tree::new(n, &edges).unwrap());
    }
    out
}

fn adjacency(t: &Tree) -> Vec<Vec<bool>> {
    let n = t.n();
    let mut m = vec![vec![false; n]; n];
    for &(u, v) in t.edges() {
        m[u][v] = true;
        m[v][u] = true;
    }
    m
}

/// Counts bijections `a → b` preserving adjacency, stopping after `cap`.
fn count_maps(a: &Tree, b: &Tree, cap: usize) -> usize {
    let n = a.n();
    if n != b.n() {
        return 0;
    }
    let (ma, mb) = (adjacency(a), adjacency(b));
    let mut image = vec![usize::MAX; n];
    let mut used = vec![false; n];
    #[allow(clippy::too_many_arguments)]
    fn go(
        v: usize,
        a: &Tree,
        b: &Tree,
        ma: &[Vec<bool>],
        mb: &[Vec<bool>],
        image: &mut [usize],
        used: &mut [bool],
        cap: usize,
    ) -> usize {
        let n = image.len();
        if v == n {
            return 1;
        }
        let mut found = 0;
        for w in 0..n {
            if used[w] || a.degree(v) != b.degree(w) {
                continue;
            }
            if (0..v).any(|u| ma[u][v] != mb[image[u]][w]) {
                continue;
            }
            image[v] = w;
            used[w] = true;
            found += go(v + 1, a, b, ma, mb, image, used, cap - found);
            used[w] = false;
            if found >= cap {
                break;
            }
        }
        found
    }
    go(0, a, b, &ma, &mb, &mut image, &mut used, cap)
}

pub fn isomorphic(a: &Tree, b: &Tree) -> bool {
    count_maps(a, b, 1) > 0
}

pub fn automorphisms(t: &Tree) -> usize {
    count_maps(t, t, usize::MAX)
}

fn degree_key(t: &Tree) -> Vec<usize> {
    let mut d: Vec<usize> = (0..t.n()).map(|v| t.degree(v)).collect();
    d.sort_unstable();
    d
}

/// One representative per isomorphism class, found by filtering every
/// labeled tree through pairwise isomorphism tests.
pub fn oracle_classes(n: usize) -> Vec<Tree> {
    let mut reps: Vec<(Vec<usize>, Tree)> = Vec::new();
    for t in prufer_trees(n) {
        let key = degree_key(&t);
        if !reps.iter().any(|(k, r)| *k == key && isomorphic(r, &t)) {
            reps.push((key, t));
        }
    }
    reps.into_iter().map(|(_, t)| t).collect()
}

/// Random relabeling of `t` by the permutation `perm`.
pub fn relabel(t: &Tree, perm: &[usize]) -> Tree {
    let edges: Vec<(usize, usize)> = t.edges().iter().map(|&(u, v)| (perm[u], perm[v])).collect();
    Tree::new(t.n(), &edges).unwrap()
}
