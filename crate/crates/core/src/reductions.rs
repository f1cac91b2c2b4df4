//! Reduction certificates, the size ledger, the score bound and the
//! forest splitting argument behind the terminal case.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::board::{Board, Edge};
use crate::game::{bit, bits, Player, Tree};
use crate::solver::{SolveError, Solver};
use crate::strategy::cases::{case_applies, first_case, first_reducing_case, CaseId};

/// Signed changes from a baseline board to a target board.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Ledger {
    pub dn: i64,
    pub dl: i64,
    pub dk: i64,
    pub ds: i64,
    pub big_d: i64,
}

impl Ledger {
    pub fn between(base: &Board, target: &Board) -> Ledger {
        let (n0, l0, k0, s0) = base.bound_terms();
        let (n1, l1, k1, s1) = target.bound_terms();
        let (dn, dl, dk, ds) = (n0 - n1, l0 - l1, k0 - k1, s0 - s1);
        Ledger {
            dn,
            dl,
            dk,
            ds,
            big_d: dn - 3 * dl - 3 * dk + ds,
        }
    }
}

impl fmt::Display for Ledger {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "dn={} dl={} dk={} ds={} D={}",
            self.dn, self.dl, self.dk, self.ds, self.big_d
        )
    }
}

/// A source position, its reduced target, and the edge injection between them.
///
/// `edge_map` lists only the target edges whose image differs from
/// themselves; every other free target edge maps to the same pair in the
/// source. Vertices map identically.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReductionCertificate {
    pub rule: String,
    pub source: Board,
    /// Board the ledger is measured from when it differs from `source`
    /// (the position at the start of a scripted episode).
    pub baseline: Option<Board>,
    pub target: Board,
    pub edge_map: BTreeMap<Edge, Edge>,
    pub ledger: Ledger,
}

impl ReductionCertificate {
    pub fn new(rule: impl Into<String>, source: Board, target: Board, edge_map: BTreeMap<Edge, Edge>) -> Self {
        let ledger = Ledger::between(&source, &target);
        ReductionCertificate {
            rule: rule.into(),
            source,
            baseline: None,
            target,
            edge_map,
            ledger,
        }
    }

    pub fn with_baseline(mut self, baseline: Board) -> Self {
        self.ledger = Ledger::between(&baseline, &self.target);
        self.baseline = Some(baseline);
        self
    }

    pub fn identity(board: &Board) -> Self {
        ReductionCertificate::new("identity", board.clone(), board.clone(), BTreeMap::new())
    }

    pub fn ledger_base(&self) -> &Board {
        self.baseline.as_ref().unwrap_or(&self.source)
    }

    /// Image of a target edge in the source.
    pub fn f_e(&self, e: Edge) -> Edge {
        self.edge_map.get(&e).copied().unwrap_or(e)
    }

    /// Target edge whose image is the source edge `e`, if any.
    pub fn preimage(&self, e: Edge) -> Option<Edge> {
        if let Some((&t, _)) = self.edge_map.iter().find(|(_, &s)| s == e) {
            return Some(t);
        }
        (self.target.is_free(e) && !self.edge_map.contains_key(&e)).then_some(e)
    }

    /// Vertices isolated in the source, which Isolator banks by reducing.
    pub fn isolated_in_source(&self) -> usize {
        self.source.classify().isolated.count_ones() as usize
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("rule {}\nsource {}\n", self.rule, self.source);
        if let Some(b) = &self.baseline {
            out += &format!("baseline {b}\n");
        }
        out += &format!("target {}\n", self.target);
        let map: Vec<String> = self.edge_map.iter().map(|(t, s)| format!("{t}>{s}")).collect();
        out += &format!("map {{{}}}\nledger {}\n", map.join(","), self.ledger);
        out
    }
}

impl fmt::Display for ReductionCertificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    TargetNotTree,
    TargetHasIsolatorEdges,
    MapOutsideDomain(Edge),
    ImageNotFree { target: Edge, source: Edge },
    NotInjective(Edge),
    PatternMismatch { target: Edge, source: Edge, p_target: u8, p_source: u8 },
    UnoccupiedNotPreserved(usize),
    Neighborhood(usize),
    Ledger { stored: Ledger, recomputed: Ledger },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::TargetNotTree => f.write_str("target is not a tree"),
            Violation::TargetHasIsolatorEdges => f.write_str("target has Isolator edges"),
            Violation::MapOutsideDomain(e) => write!(f, "map key {e} is not a free target edge"),
            Violation::ImageNotFree { target, source } => {
                write!(f, "target edge {target} maps to {source}, not a free source edge")
            }
            Violation::NotInjective(e) => write!(f, "source edge {e} is hit twice"),
            Violation::PatternMismatch {
                target,
                source,
                p_target,
                p_source,
            } => write!(
                f,
                "pattern mismatch: {target} has {p_target}, image {source} has {p_source}"
            ),
            Violation::UnoccupiedNotPreserved(v) => {
                write!(f, "vertex {v} is unoccupied in the target only")
            }
            Violation::Neighborhood(v) => write!(f, "free edges at vertex {v} are not carried over"),
            Violation::Ledger { stored, recomputed } => {
                write!(f, "ledger mismatch: stored {stored}, recomputed {recomputed}")
            }
        }
    }
}

impl std::error::Error for Violation {}

/// Checks the certificate against the definition of a reduction; returns
/// the first problem found.
pub fn check_reduction(cert: &ReductionCertificate) -> Result<(), Violation> {
    let (src, tgt) = (&cert.source, &cert.target);
    if !tgt.is_tree() {
        return Err(Violation::TargetNotTree);
    }
    if tgt.d_count() != 0 {
        return Err(Violation::TargetHasIsolatorEdges);
    }
    for &k in cert.edge_map.keys() {
        if !tgt.is_free(k) {
            return Err(Violation::MapOutsideDomain(k));
        }
    }
    let mut hit = BTreeSet::new();
    for t in tgt.free_edges() {
        let s = cert.f_e(t);
        if !src.is_free(s) {
            return Err(Violation::ImageNotFree { target: t, source: s });
        }
        if !hit.insert(s) {
            return Err(Violation::NotInjective(s));
        }
        let (pt, ps) = (tgt.pattern(t).unwrap(), src.pattern(s).unwrap());
        if pt != ps {
            return Err(Violation::PatternMismatch {
                target: t,
                source: s,
                p_target: pt,
                p_source: ps,
            });
        }
    }
    let src_unocc = src.classify().unoccupied;
    for v in bits(tgt.classify().unoccupied) {
        if src_unocc & bit(v) == 0 {
            return Err(Violation::UnoccupiedNotPreserved(v));
        }
        let image: BTreeSet<Edge> = bits(tgt.neighbors(v)).map(|w| cert.f_e(Edge::new(v, w))).collect();
        let here: BTreeSet<Edge> = bits(src.free_neighbors(v)).map(|w| Edge::new(v, w)).collect();
        if image != here {
            return Err(Violation::Neighborhood(v));
        }
    }
    let recomputed = Ledger::between(cert.ledger_base(), tgt);
    if recomputed != cert.ledger {
        return Err(Violation::Ledger {
            stored: cert.ledger,
            recomputed,
        });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Lemma2Check {
    pub holds: bool,
    pub source_value: usize,
    pub isolated: usize,
    pub target_value: usize,
}

/// Solves source and target exactly (Isolator to move) and checks that
/// the source value covers the banked isolations plus the target value.
pub fn lemma2_bound_check(cert: &ReductionCertificate, solver: &Solver) -> Result<Lemma2Check, SolveError> {
    let source_value = solver.alpha(&cert.source.to_dense(Player::Isolator).game)?.value;
    let target_value = solver.alpha(&cert.target.to_dense(Player::Isolator).game)?.value;
    let isolated = cert.isolated_in_source();
    Ok(Lemma2Check {
        holds: source_value >= isolated + target_value,
        source_value,
        isolated,
        target_value,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BoundError {
    #[error("score bound needs every leaf excluded and no Isolator edges")]
    NotLeafExcluded,
}

/// `⌊(n − 3l − 3k + 7 + Σ_{v∈O}(d(v) − 2)) / 5⌋`.
pub fn score_bound(board: &Board) -> Result<i64, BoundError> {
    if !board.is_leaf_excluded() {
        return Err(BoundError::NotLeafExcluded);
    }
    Ok(score_numerator(board).div_euclid(5))
}

fn score_numerator(board: &Board) -> i64 {
    let (n, l, k, s) = board.bound_terms();
    n - 3 * l - 3 * k + 7 + s
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Lemma5 {
    pub hypothesis: bool,
    pub conclusion_holds: bool,
}

/// No two adjacent degree-2 vertices and no leaf next to a degree-2 vertex;
/// conclusion is `3l ≥ n + 5`.
pub fn lemma5_check(tree: &Tree) -> Lemma5 {
    let deg2 = |v: usize| tree.degree(v) == 2;
    let hypothesis = tree.edges().iter().all(|&(u, v)| {
        let (du, dv) = (tree.degree(u), tree.degree(v));
        !(deg2(u) && dv <= 2) && !(deg2(v) && du <= 2)
    });
    Lemma5 {
        hypothesis,
        conclusion_holds: 3 * tree.leaf_count() >= tree.n() + 5,
    }
}

fn lemma5_adj(adj: &[Vec<usize>], comp: &[usize]) -> Lemma5 {
    let deg = |v: usize| adj[v].len();
    let hypothesis = comp
        .iter()
        .all(|&u| adj[u].iter().all(|&v| !(deg(u) == 2 && deg(v) <= 2)));
    let leaves = comp.iter().filter(|&&v| deg(v) == 1).count();
    Lemma5 {
        hypothesis,
        conclusion_holds: 3 * leaves >= comp.len() + 5,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitComponent {
    /// Board labels; new leaves are numbered past the largest board label.
    pub vertices: Vec<usize>,
    pub edges: Vec<(usize, usize)>,
    pub leaves: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ForestSplit {
    pub components: Vec<SplitComponent>,
    /// `(a_i, b_i, d_i)` in the order processed.
    pub per_edge: Vec<(usize, usize, usize)>,
    pub n: usize,
    pub l: usize,
    pub k: usize,
}

impl ForestSplit {
    pub fn component_count(&self) -> usize {
        self.components.len()
    }

    pub fn sum_d(&self) -> usize {
        self.per_edge.iter().map(|t| t.2).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SplitError {
    #[error("configuration falls under {0}")]
    Precondition(CaseId),
    #[error("bad edge set: {0}")]
    BadEdges(String),
    #[error("splitting identity failed: {0}")]
    Identity(String),
}

fn board_with(tree: &Tree, c: &[(usize, usize)]) -> Result<Board, SplitError> {
    let mut b = Board::from_tree(tree);
    for &(u, v) in c {
        let e = Edge::new(u, v);
        if !b.has_edge(e) || b.in_c(e) {
            return Err(SplitError::BadEdges(format!("{e}")));
        }
        b.claim(e, Player::Toucher);
    }
    Ok(b.with_leaves_excluded())
}

/// Cuts every Toucher edge out of the tree, hanging a fresh leaf on each
/// former neighbor, and checks the component, vertex and leaf counts.
pub fn forest_split(tree: &Tree, c: &[(usize, usize)]) -> Result<ForestSplit, SplitError> {
    let board = board_with(tree, c)?;
    if let Some(case) = first_reducing_case(&board) {
        return Err(SplitError::Precondition(case));
    }
    split_board(&board)
}

fn split_board(board: &Board) -> Result<ForestSplit, SplitError> {
    let n = board.n();
    let span = 64 - board.vertices().leading_zeros() as usize;
    let mut adj: Vec<Vec<usize>> = (0..span).map(|v| bits(board.neighbors(v)).collect()).collect();
    let mut alive: Vec<bool> = (0..span).map(|v| board.contains(v)).collect();
    let c_edges = board.c_edges();
    let mut per_edge = Vec::new();
    let fail = |m: String| Err(SplitError::Identity(m));
    for e in &c_edges {
        let (a, b) = (e.a(), e.b());
        let d = board.degree(a) + board.degree(b) - 2;
        if adj[a].len() != board.degree(a) || adj[b].len() != board.degree(b) {
            return fail(format!("endpoint of {e} lost an edge before its turn"));
        }
        if adj[a].len() < 2 || adj[b].len() < 2 {
            return fail(format!("endpoint of {e} is a leaf"));
        }
        let mut outer = Vec::new();
        for (x, y) in [(a, b), (b, a)] {
            for &w in &adj[x] {
                if w != y {
                    outer.push(w);
                }
            }
        }
        for x in [a, b] {
            for w in std::mem::take(&mut adj[x]) {
                adj[w].retain(|&z| z != x);
            }
            alive[x] = false;
        }
        for w in outer {
            let leaf = adj.len();
            adj.push(vec![w]);
            alive.push(true);
            adj[w].push(leaf);
        }
        per_edge.push((a, b, d));
    }
    let mut seen = vec![false; adj.len()];
    let mut components = Vec::new();
    for s in 0..adj.len() {
        if !alive[s] || seen[s] {
            continue;
        }
        let mut stack = vec![s];
        seen[s] = true;
        let mut vs = Vec::new();
        while let Some(v) = stack.pop() {
            vs.push(v);
            for &w in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        vs.sort_unstable();
        let mut edges = Vec::new();
        for &v in &vs {
            for &w in &adj[v] {
                if v < w {
                    edges.push((v, w));
                }
            }
        }
        let leaves = vs.iter().filter(|&&v| adj[v].len() == 1).count();
        components.push(SplitComponent { vertices: vs, edges, leaves });
    }
    let split = ForestSplit {
        components,
        per_edge,
        n,
        l: board.leaves().count_ones() as usize,
        k: c_edges.len(),
    };
    let (k, sd) = (split.k as i64, split.sum_d() as i64);
    let count = split.components.len() as i64;
    let sum_n: i64 = split.components.iter().map(|c| c.vertices.len() as i64).sum();
    let sum_l: i64 = split.components.iter().map(|c| c.leaves as i64).sum();
    if count != 1 - k + sd {
        return fail(format!("component count {count} != 1 - {k} + {sd}"));
    }
    if sum_n != n as i64 - 2 * k + sd {
        return fail(format!("vertex total {sum_n} != {n} - 2*{k} + {sd}"));
    }
    if sum_l != split.l as i64 + sd {
        return fail(format!("leaf total {sum_l} != {} + {sd}", split.l));
    }
    if let Some(small) = split.components.iter().find(|c| c.vertices.len() < 4) {
        return fail(format!("component {:?} has fewer than 4 vertices", small.vertices));
    }
    Ok(split)
}

/// The numbers behind `S(T) ≤ 0` on a terminal configuration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FinalBound {
    pub split: ForestSplit,
    pub n: i64,
    pub l: i64,
    pub k: i64,
    pub sum_d: i64,
    /// `Σ_{v∈O}(d(v) − 2)`.
    pub excess: i64,
    /// `3l + 3k` against `n + 5 + 3Σd − 4k`.
    pub m4: (i64, i64),
    /// `3l + 3k` against `n + 5 + excess + 2Σd − 2k`.
    pub m45: (i64, i64),
    pub score_bound: i64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FinalCase {
    Certified(Box<FinalBound>),
    Inapplicable(CaseId),
}

pub fn final_case_bound(tree: &Tree, c: &[(usize, usize)]) -> Result<FinalCase, SplitError> {
    let board = board_with(tree, c)?;
    final_case_bound_board(&board)
}

pub fn final_case_bound_board(board: &Board) -> Result<FinalCase, SplitError> {
    let case = first_case(board);
    if case != CaseId::TerminalNoCase {
        return Ok(FinalCase::Inapplicable(case));
    }
    debug_assert!(CaseId::ALL.iter().all(|&c| !case_applies(board, c)));
    let split = split_board(board)?;
    let fail = |m: String| Err(SplitError::Identity(m));
    let mut adj: Vec<Vec<usize>> = Vec::new();
    for comp in &split.components {
        for &(u, v) in &comp.edges {
            if adj.len() <= u.max(v) {
                adj.resize(u.max(v) + 1, Vec::new());
            }
            adj[u].push(v);
            adj[v].push(u);
        }
    }
    for comp in &split.components {
        let l5 = lemma5_adj(&adj, &comp.vertices);
        if !l5.hypothesis {
            return fail(format!("component {:?} has a degree-2 pattern", comp.vertices));
        }
        if !l5.conclusion_holds {
            return fail(format!("component {:?} has too few leaves", comp.vertices));
        }
    }
    let (n, l, k, excess) = board.bound_terms();
    let sum_d = split.sum_d() as i64;
    let pair_excess: i64 = split.per_edge.iter().map(|t| t.2 as i64 - 2).sum();
    if excess != pair_excess {
        return fail(format!("occupied excess {excess} != {pair_excess}"));
    }
    let m4 = (3 * l + 3 * k, n + 5 + 3 * sum_d - 4 * k);
    let m45 = (3 * l + 3 * k, n + 5 + excess + 2 * sum_d - 2 * k);
    if m4.0 < m4.1 {
        return fail(format!("leaf count inequality {} < {}", m4.0, m4.1));
    }
    if m45.0 < m45.1 {
        return fail(format!("rearranged inequality {} < {}", m45.0, m45.1));
    }
    let s = score_numerator(board).div_euclid(5);
    if s > 0 {
        return fail(format!("score bound {s} is positive"));
    }
    Ok(FinalCase::Certified(Box::new(FinalBound {
        split,
        n,
        l,
        k,
        sum_d,
        excess,
        m4,
        m45,
        score_bound: s,
    })))
}
