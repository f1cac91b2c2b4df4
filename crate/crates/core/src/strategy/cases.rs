//! Structural detection of the six phase-two configurations and the
//! pre-game reductions for the first four.

use std::collections::BTreeMap;
use std::fmt;

use crate::board::{Board, Edge};
use crate::game::{bit, bits, Player};
use crate::reductions::ReductionCertificate;

use super::StrategyError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CaseId {
    L4C1,
    L4C2,
    L4C3,
    L4C4,
    L4C5,
    L4C6,
    TerminalNoCase,
}

impl CaseId {
    pub const ALL: [CaseId; 6] = [
        CaseId::L4C1,
        CaseId::L4C2,
        CaseId::L4C3,
        CaseId::L4C4,
        CaseId::L4C5,
        CaseId::L4C6,
    ];

    /// Cases resolved by shrinking the board before any move.
    pub const REDUCING: [CaseId; 4] = [CaseId::L4C1, CaseId::L4C2, CaseId::L4C3, CaseId::L4C4];

    pub fn number(self) -> Option<u8> {
        match self {
            CaseId::L4C1 => Some(1),
            CaseId::L4C2 => Some(2),
            CaseId::L4C3 => Some(3),
            CaseId::L4C4 => Some(4),
            CaseId::L4C5 => Some(5),
            CaseId::L4C6 => Some(6),
            CaseId::TerminalNoCase => None,
        }
    }

    pub fn from_number(k: u8) -> Option<CaseId> {
        CaseId::ALL.get((k as usize).wrapping_sub(1)).copied()
    }
}

impl fmt::Display for CaseId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.number() {
            Some(k) => write!(f, "L4C{k}"),
            None => f.write_str("TerminalNoCase"),
        }
    }
}

/// An unoccupied degree-2 vertex `v` between touched `u` and `w`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Case1 {
    pub u: usize,
    pub v: usize,
    pub w: usize,
    /// `u` is a leaf; otherwise both neighbors are occupied.
    pub leaf: bool,
}

/// A free edge `uv` with both endpoints touched.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Case2 {
    pub u: usize,
    pub v: usize,
    pub leaf: bool,
}

/// A Toucher edge `uv` at the leaf `u`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Case3 {
    pub u: usize,
    pub v: usize,
}

/// Toucher edges `uv` and `uw` sharing `u`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Case4 {
    pub u: usize,
    pub v: usize,
    pub w: usize,
}

/// The run `v0..vm` of unoccupied degree-2 vertices leaving touched `v0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Case5 {
    pub path: Vec<usize>,
    /// `v0` is occupied and must first be turned into a leaf.
    pub needs_rewire: bool,
}

fn lowest(mask: u64) -> Option<usize> {
    (mask != 0).then(|| mask.trailing_zeros() as usize)
}

pub fn find_case1(b: &Board) -> Option<Case1> {
    let cls = b.classify();
    let touched = cls.touched();
    let mut fallback = None;
    for v in bits(cls.unoccupied) {
        let nb = b.neighbors(v);
        if nb.count_ones() != 2 || nb & !touched != 0 {
            continue;
        }
        let (p, q) = (nb.trailing_zeros() as usize, 63 - nb.leading_zeros() as usize);
        let leaves = cls.excluded & nb;
        if leaves != 0 && leaves != nb {
            let u = leaves.trailing_zeros() as usize;
            let w = if u == p { q } else { p };
            return Some(Case1 { u, v, w, leaf: true });
        }
        if fallback.is_none() {
            fallback = Some(Case1 {
                u: p,
                v,
                w: q,
                leaf: leaves == nb,
            });
        }
    }
    fallback
}

pub fn find_case2(b: &Board) -> Option<Case2> {
    let cls = b.classify();
    let touched = cls.touched();
    let mut fallback = None;
    for e in b.free_edges() {
        if touched & bit(e.a()) == 0 || touched & bit(e.b()) == 0 {
            continue;
        }
        let (xa, xb) = (cls.excluded & bit(e.a()) != 0, cls.excluded & bit(e.b()) != 0);
        if xa != xb {
            let (u, v) = if xa { (e.a(), e.b()) } else { (e.b(), e.a()) };
            return Some(Case2 { u, v, leaf: true });
        }
        if fallback.is_none() {
            fallback = Some(Case2 {
                u: e.a(),
                v: e.b(),
                leaf: xa,
            });
        }
    }
    fallback
}

pub fn find_case3(b: &Board) -> Option<Case3> {
    for u in bits(b.leaves()) {
        if let Some(v) = lowest(b.c_neighbors(u)) {
            return Some(Case3 { u, v });
        }
    }
    None
}

pub fn find_case4(b: &Board) -> Option<Case4> {
    for u in bits(b.vertices()) {
        let c = b.c_neighbors(u);
        if c.count_ones() >= 2 {
            let v = c.trailing_zeros() as usize;
            let w = (c & (c - 1)).trailing_zeros() as usize;
            return Some(Case4 { u, v, w });
        }
    }
    None
}

fn unoccupied_deg2(b: &Board) -> u64 {
    bits(b.classify().unoccupied)
        .filter(|&v| b.degree(v) == 2)
        .fold(0, |m, v| m | bit(v))
}

/// Walks from `prev` through `cur` while the current vertex is an
/// unoccupied degree-2 vertex; returns the visited vertices including the stop.
fn walk(b: &Board, chain: u64, prev: usize, cur: usize) -> Vec<usize> {
    let mut path = vec![prev, cur];
    let (mut p, mut c) = (prev, cur);
    while chain & bit(c) != 0 {
        let next = (b.neighbors(c) & !bit(p)).trailing_zeros() as usize;
        path.push(next);
        p = c;
        c = next;
    }
    path
}

pub fn find_case5(b: &Board) -> Option<Case5> {
    let cls = b.classify();
    let touched = cls.touched();
    let chain = unoccupied_deg2(b);
    let mut fallback = None;
    for v1 in bits(chain) {
        let nb = b.neighbors(v1) & touched;
        let Some(v0) = lowest(nb & cls.excluded).or_else(|| lowest(nb)) else {
            continue;
        };
        let other = (b.neighbors(v1) & !bit(v0)).trailing_zeros() as usize;
        let path = walk(b, chain, v0, v1);
        debug_assert_eq!(path[2], other);
        let needs_rewire = cls.excluded & bit(v0) == 0;
        if !needs_rewire {
            return Some(Case5 {
                path,
                needs_rewire,
            });
        }
        if fallback.is_none() {
            fallback = Some(Case5 {
                path,
                needs_rewire,
            });
        }
    }
    fallback
}

/// A maximal run `v0..vm`, `m ≥ 3`, of unoccupied degree-2 vertices between
/// unoccupied vertices of degree at least 3; `v0` is the lower end label.
pub fn find_case6(b: &Board) -> Option<Vec<usize>> {
    let cls = b.classify();
    let chain = unoccupied_deg2(b);
    let mut done = 0u64;
    for v in bits(chain) {
        if done & bit(v) != 0 || b.neighbors(v) & chain == 0 {
            continue;
        }
        let nb = b.neighbors(v);
        let (p, q) = (nb.trailing_zeros() as usize, 63 - nb.leading_zeros() as usize);
        let mut left = walk(b, chain, v, p);
        let right = walk(b, chain, v, q);
        left.reverse();
        let mut path = left;
        path.extend(right.into_iter().skip(1));
        for &w in &path {
            done |= bit(w);
        }
        let (s, t) = (path[0], *path.last().unwrap());
        let good_end = |x: usize| cls.unoccupied & bit(x) != 0 && b.degree(x) >= 3;
        if path.len() >= 4 && good_end(s) && good_end(t) {
            if s > t {
                path.reverse();
            }
            return Some(path);
        }
    }
    None
}

pub fn case_applies(b: &Board, case: CaseId) -> bool {
    match case {
        CaseId::L4C1 => find_case1(b).is_some(),
        CaseId::L4C2 => find_case2(b).is_some(),
        CaseId::L4C3 => find_case3(b).is_some(),
        CaseId::L4C4 => find_case4(b).is_some(),
        CaseId::L4C5 => find_case5(b).is_some(),
        CaseId::L4C6 => find_case6(b).is_some(),
        CaseId::TerminalNoCase => CaseId::ALL.iter().all(|&c| !case_applies(b, c)),
    }
}

/// First applicable case in the order 1..6.
pub fn first_case(b: &Board) -> CaseId {
    CaseId::ALL
        .into_iter()
        .find(|&c| case_applies(b, c))
        .unwrap_or(CaseId::TerminalNoCase)
}

/// First applicable case among 1..4.
pub fn first_reducing_case(b: &Board) -> Option<CaseId> {
    CaseId::REDUCING.into_iter().find(|&c| case_applies(b, c))
}

/// Incremental construction of a target board with its edge map.
pub(crate) struct Rewrite {
    source: Board,
    target: Board,
    map: BTreeMap<Edge, Edge>,
    rule: String,
}

impl Rewrite {
    pub(crate) fn new(source: &Board, rule: impl Into<String>) -> Rewrite {
        Rewrite {
            source: source.clone(),
            target: source.clone(),
            map: BTreeMap::new(),
            rule: rule.into(),
        }
    }

    pub(crate) fn set_rule(&mut self, rule: String) {
        self.rule = rule;
    }

    pub(crate) fn target(&self) -> &Board {
        &self.target
    }

    pub(crate) fn delete(&mut self, v: usize) {
        for w in bits(self.target.neighbors(v)) {
            self.map.remove(&Edge::new(v, w));
        }
        self.target.remove_vertex(v);
    }

    pub(crate) fn delete_all(&mut self, vs: &[usize]) {
        for &v in vs {
            self.delete(v);
        }
    }

    /// Re-attaches edge `from` as `to`; a free edge keeps pointing at its
    /// original source edge.
    pub(crate) fn move_edge(&mut self, from: Edge, to: Edge) {
        debug_assert!(self.target.has_edge(from) && !self.target.has_edge(to));
        let origin = self.map.remove(&from).unwrap_or(from);
        let free = self.target.is_free(from);
        self.target.move_edge(from, to);
        if free {
            self.map.insert(to, origin);
        }
    }

    pub(crate) fn add_toucher_edge(&mut self, a: usize, b: usize) {
        self.target.add_edge(a, b, Some(Player::Toucher));
    }

    pub(crate) fn finish_with(mut self, x: u64) -> ReductionCertificate {
        self.target.set_excluded(x);
        ReductionCertificate::new(self.rule, self.source, self.target, self.map)
    }

    /// Finishes with every target leaf excluded.
    pub(crate) fn finish(self) -> ReductionCertificate {
        let x = self.target.leaves();
        self.finish_with(x)
    }
}

fn degenerate(what: &str, b: &Board) -> StrategyError {
    StrategyError::Degenerate(format!("{what} on {b}"))
}

/// Lowest leaf reachable from `start` without passing `blocked`.
pub(crate) fn leaf_beyond(b: &Board, start: usize, blocked: usize) -> Option<usize> {
    lowest(b.reach(start, bit(blocked)) & b.leaves() & !bit(blocked))
}

/// Moves every edge at the occupied vertex `u` except `u keep` onto a leaf
/// on the far side of `keep`, leaving `u` a leaf.
pub fn rewire_to_leaf(b: &Board, u: usize, keep: usize, tag: &str) -> Result<ReductionCertificate, StrategyError> {
    let a = leaf_beyond(b, keep, u).ok_or_else(|| degenerate("no leaf beyond the kept neighbor", b))?;
    let mut rw = Rewrite::new(b, format!("{tag} rewire u={u} a={a}"));
    for ui in bits(b.neighbors(u) & !bit(keep)) {
        rw.move_edge(Edge::new(u, ui), Edge::new(a, ui));
    }
    Ok(rw.finish())
}

fn sorted(mask: u64) -> Vec<usize> {
    bits(mask).collect()
}

/// Shared regrouping step of the occupied-pair sub-cases: `p` and `q` are
/// joined by a Toucher edge; `p` keeps only its first listed neighbor.
fn regroup(rw: &mut Rewrite, p: usize, q: usize, p_side: &[usize], q_side: &[usize]) {
    if !p_side.is_empty() {
        for &a in &p_side[1..] {
            rw.move_edge(Edge::new(p, a), Edge::new(q, a));
        }
    } else {
        let a1 = q_side[0];
        rw.move_edge(Edge::new(q, a1), Edge::new(p, a1));
    }
}

pub fn reduce_case1(b: &Board, cfg: Case1) -> Result<(ReductionCertificate, String), StrategyError> {
    if !cfg.leaf {
        return Ok((rewire_to_leaf(b, cfg.u, cfg.v, "1")?, "1.0".into()));
    }
    let Case1 { u, v, w, .. } = cfg;
    let w1 = lowest(b.c_neighbors(w)).ok_or_else(|| degenerate("occupied vertex without Toucher edge", b))?;
    let (dw, dw1) = (b.degree(w), b.degree(w1));
    let mut rw;
    let sub = match (dw, dw1) {
        (2, 2) => {
            rw = Rewrite::new(b, "1.a delete u,v,w");
            rw.delete_all(&[u, v, w]);
            "1.a"
        }
        (3, 1) => {
            rw = Rewrite::new(b, "1.b delete u,v,w1");
            rw.delete_all(&[u, v, w1]);
            "1.b"
        }
        _ if dw + dw1 >= 5 => {
            let p_side = sorted(b.neighbors(w1) & !bit(w));
            let q_side = sorted(b.neighbors(w) & !bit(v) & !bit(w1));
            rw = Rewrite::new(b, "1.c delete u,v and regroup at w,w1");
            rw.delete_all(&[u, v]);
            regroup(&mut rw, w1, w, &p_side, &q_side);
            "1.c"
        }
        _ => return Err(degenerate("case 1 degree pattern", b)),
    };
    Ok((rw.finish(), sub.into()))
}

pub fn reduce_case2(b: &Board, cfg: Case2) -> Result<(ReductionCertificate, String), StrategyError> {
    if !cfg.leaf {
        return Ok((rewire_to_leaf(b, cfg.u, cfg.v, "2")?, "2.0".into()));
    }
    let Case2 { u, v, .. } = cfg;
    let w = lowest(b.c_neighbors(v)).ok_or_else(|| degenerate("occupied vertex without Toucher edge", b))?;
    let (dv, dw) = (b.degree(v), b.degree(w));
    let mut rw;
    let sub = match (dv, dw) {
        (2, 2) => {
            rw = Rewrite::new(b, "2.a delete u,v");
            rw.delete_all(&[u, v]);
            "2.a"
        }
        (3, 1) => {
            rw = Rewrite::new(b, "2.b delete u,w");
            rw.delete_all(&[u, w]);
            "2.b"
        }
        _ if dv + dw >= 5 => {
            let p_side = sorted(b.neighbors(v) & !bit(u) & !bit(w));
            let q_side = sorted(b.neighbors(w) & !bit(v));
            rw = Rewrite::new(b, "2.c delete u and regroup at v,w");
            rw.delete(u);
            regroup(&mut rw, v, w, &p_side, &q_side);
            "2.c"
        }
        _ => return Err(degenerate("case 2 degree pattern", b)),
    };
    Ok((rw.finish(), sub.into()))
}

pub fn reduce_case3(b: &Board, cfg: Case3) -> Result<(ReductionCertificate, String), StrategyError> {
    let Case3 { u, v } = cfg;
    match b.degree(v) {
        2 => {
            let mut rw = Rewrite::new(b, "3.a delete u");
            rw.delete(u);
            Ok((rw.finish(), "3.a".into()))
        }
        d if d >= 3 => {
            let v1 = lowest(b.neighbors(v) & !bit(u)).expect("degree at least 3");
            let mut rw = Rewrite::new(b, format!("3.b move {v}-{v1} to {u}-{v1}"));
            rw.move_edge(Edge::new(v, v1), Edge::new(u, v1));
            Ok((rw.finish(), "3.b".into()))
        }
        _ => Err(degenerate("case 3 on a single edge", b)),
    }
}

pub fn reduce_case4(b: &Board, cfg: Case4) -> Result<(ReductionCertificate, String), StrategyError> {
    let Case4 { u, v, w } = cfg;
    let mut rw = Rewrite::new(b, format!("4 contract {u} into {v}"));
    for ui in bits(b.neighbors(u) & !bit(v) & !bit(w)) {
        rw.move_edge(Edge::new(u, ui), Edge::new(v, ui));
    }
    rw.delete(u);
    rw.add_toucher_edge(v, w);
    Ok((rw.finish(), "4".into()))
}

/// Applies the reduction for the first of Cases 1..4 present, if any.
pub fn reduce_once(b: &Board) -> Result<Option<(CaseId, ReductionCertificate, String)>, StrategyError> {
    if let Some(cfg) = find_case1(b) {
        let (cert, sub) = reduce_case1(b, cfg)?;
        return Ok(Some((CaseId::L4C1, cert, sub)));
    }
    if let Some(cfg) = find_case2(b) {
        let (cert, sub) = reduce_case2(b, cfg)?;
        return Ok(Some((CaseId::L4C2, cert, sub)));
    }
    if let Some(cfg) = find_case3(b) {
        let (cert, sub) = reduce_case3(b, cfg)?;
        return Ok(Some((CaseId::L4C3, cert, sub)));
    }
    if let Some(cfg) = find_case4(b) {
        let (cert, sub) = reduce_case4(b, cfg)?;
        return Ok(Some((CaseId::L4C4, cert, sub)));
    }
    Ok(None)
}
