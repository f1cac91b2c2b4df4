//! Boards, positions and scoring for the Toucher-Isolator game.
//!
//! Vertices are labeled `0..n`, edges are indices into the edge list and every
//! vertex or edge set is a `u64` bitmask. Boards therefore hold at most 64
//! vertices and 64 edges, which is far beyond what exhaustive search can reach.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// Largest vertex or edge count representable by the bitmask encoding.
pub const MAX_ELEMENTS: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GameError {
    #[error("a tree needs at least one vertex")]
    Empty,
    #[error("{0} elements exceed the bitmask capacity of 64")]
    TooLarge(usize),
    #[error("vertex {vertex} is out of range for n = {n}")]
    OutOfRange { vertex: usize, n: usize },
    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),
    #[error("duplicate edge {0}-{1}")]
    DuplicateEdge(usize, usize),
    #[error("edge {0}-{1} closes a cycle")]
    Cyclic(usize, usize),
    #[error("graph is disconnected")]
    Disconnected,
    #[error("Toucher and Isolator both claim edge {0}")]
    OverlappingClaims(usize),
    #[error("set refers to element {0} outside the board")]
    SetOutOfRange(usize),
    #[error("edge {0} is not a legal move")]
    IllegalMove(usize),
    #[error("the game is already over")]
    GameOver,
    #[error("the game is not over yet")]
    NotOver,
    #[error("edge {0} is already claimed")]
    Claimed(usize),
    #[error("no edge joins {0} and {1}")]
    NoSuchEdge(usize, usize),
    #[error("parse error: {0}")]
    Parse(String),
}

#[inline]
pub(crate) fn bit(i: usize) -> u64 {
    1u64 << i
}

/// Iterates the set bits of a mask in increasing order.
pub fn bits(mut mask: u64) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        if mask == 0 {
            None
        } else {
            let i = mask.trailing_zeros() as usize;
            mask &= mask - 1;
            Some(i)
        }
    })
}

fn full_mask(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        bit(n) - 1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Player {
    Toucher,
    Isolator,
}

impl Player {
    pub fn other(self) -> Player {
        match self {
            Player::Toucher => Player::Isolator,
            Player::Isolator => Player::Toucher,
        }
    }

    pub fn letter(self) -> char {
        match self {
            Player::Toucher => 'T',
            Player::Isolator => 'I',
        }
    }
}

impl fmt::Display for Player {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Player::Toucher => f.write_str("Toucher"),
            Player::Isolator => f.write_str("Isolator"),
        }
    }
}

/// A simple undirected graph with incidence masks. The solver accepts any
/// `Graph`; game positions require a [`Tree`].
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
    incidence: Vec<u64>,
}

impl Graph {
    /// Builds a simple graph, rejecting loops, duplicates and bad labels.
    pub fn new(n: usize, edges: &[(usize, usize)]) -> Result<Graph, GameError> {
        if n > MAX_ELEMENTS {
            return Err(GameError::TooLarge(n));
        }
        if edges.len() > MAX_ELEMENTS {
            return Err(GameError::TooLarge(edges.len()));
        }
        let mut incidence = vec![0u64; n];
        let mut adjacency = vec![0u64; n];
        let mut normalized = Vec::with_capacity(edges.len());
        for (i, &(u, v)) in edges.iter().enumerate() {
            for w in [u, v] {
                if w >= n {
                    return Err(GameError::OutOfRange { vertex: w, n });
                }
            }
            if u == v {
                return Err(GameError::SelfLoop(u));
            }
            if adjacency[u] & bit(v) != 0 {
                return Err(GameError::DuplicateEdge(u, v));
            }
            adjacency[u] |= bit(v);
            adjacency[v] |= bit(u);
            incidence[u] |= bit(i);
            incidence[v] |= bit(i);
            normalized.push((u.min(v), u.max(v)));
        }
        Ok(Graph {
            n,
            edges: normalized,
            incidence,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Edge endpoints, smaller label first.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn endpoints(&self, e: usize) -> (usize, usize) {
        self.edges[e]
    }

    /// Mask of edge indices incident to `v`.
    pub fn incident_mask(&self, v: usize) -> u64 {
        self.incidence[v]
    }

    pub fn incident(&self, v: usize) -> impl Iterator<Item = usize> {
        bits(self.incidence[v])
    }

    pub fn degree(&self, v: usize) -> usize {
        self.incidence[v].count_ones() as usize
    }

    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.incident(v).map(move |e| {
            let (a, b) = self.edges[e];
            if a == v {
                b
            } else {
                a
            }
        })
    }

    pub fn edge_between(&self, u: usize, v: usize) -> Option<usize> {
        if u >= self.n || v >= self.n {
            return None;
        }
        let common = self.incidence[u] & self.incidence[v];
        (common != 0).then(|| common.trailing_zeros() as usize)
    }

    pub fn all_vertices(&self) -> u64 {
        full_mask(self.n)
    }

    pub fn all_edges(&self) -> u64 {
        full_mask(self.edges.len())
    }
}

/// An undirected labeled tree: the board of the game.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Tree {
    graph: Graph,
}

impl Tree {
    /// Validates `edges` as a spanning tree on `0..n`.
    pub fn new(n: usize, edges: &[(usize, usize)]) -> Result<Tree, GameError> {
        if n == 0 {
            return Err(GameError::Empty);
        }
        let graph = Graph::new(n, edges)?;
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for &(u, v) in graph.edges() {
            let (ru, rv) = (find(&mut parent, u), find(&mut parent, v));
            if ru == rv {
                return Err(GameError::Cyclic(u, v));
            }
            parent[ru] = rv;
        }
        if graph.edge_count() != n - 1 {
            return Err(GameError::Disconnected);
        }
        Ok(Tree { graph })
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn n(&self) -> usize {
        self.graph.n
    }

    pub fn edge_count(&self) -> usize {
        self.graph.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        self.graph.edges()
    }

    pub fn endpoints(&self, e: usize) -> (usize, usize) {
        self.graph.endpoints(e)
    }

    pub fn incident_mask(&self, v: usize) -> u64 {
        self.graph.incident_mask(v)
    }

    pub fn degree(&self, v: usize) -> usize {
        self.graph.degree(v)
    }

    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.graph.neighbors(v)
    }

    pub fn edge_between(&self, u: usize, v: usize) -> Option<usize> {
        self.graph.edge_between(u, v)
    }

    /// Mask of degree-one vertices.
    pub fn leaves(&self) -> u64 {
        (0..self.n())
            .filter(|&v| self.degree(v) == 1)
            .fold(0, |m, v| m | bit(v))
    }

    pub fn leaf_count(&self) -> usize {
        self.leaves().count_ones() as usize
    }

    pub fn all_vertices(&self) -> u64 {
        self.graph.all_vertices()
    }

    pub fn all_edges(&self) -> u64 {
        self.graph.all_edges()
    }
}

impl fmt::Display for Tree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{};", self.n())?;
        for (i, (u, v)) in self.edges().iter().enumerate() {
            let sep = if i == 0 { " " } else { ", " };
            write!(f, "{sep}{u}-{v}")?;
        }
        Ok(())
    }
}

fn parse_usize(s: &str) -> Result<usize, GameError> {
    s.trim()
        .parse()
        .map_err(|_| GameError::Parse(format!("expected a number, found {s:?}")))
}

fn parse_edge(s: &str) -> Result<(usize, usize), GameError> {
    let (a, b) = s
        .split_once('-')
        .ok_or_else(|| GameError::Parse(format!("expected u-v, found {s:?}")))?;
    Ok((parse_usize(a)?, parse_usize(b)?))
}

impl FromStr for Tree {
    type Err = GameError;

    fn from_str(s: &str) -> Result<Tree, GameError> {
        let (n, rest) = s
            .trim()
            .split_once(';')
            .ok_or_else(|| GameError::Parse("missing ';' after vertex count".into()))?;
        let n = parse_usize(n)?;
        let edges = rest
            .split(',')
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .map(parse_edge)
            .collect::<Result<Vec<_>, _>>()?;
        Tree::new(n, &edges)
    }
}

/// Parses a tree given either inline (`"n; u-v, ..."`) or on the first
/// non-empty, non-comment line of a text.
pub fn parse_tree_text(text: &str) -> Result<Tree, GameError> {
    let line = text
        .lines()
        .map(str::trim)
        .find(|l| !l.is_empty() && !l.starts_with('#'))
        .ok_or_else(|| GameError::Parse("no tree record found".into()))?;
    line.parse()
}

/// A delayed game `F(T, C, D, X, s)`: Toucher already owns `c`, Isolator owns
/// `d`, vertices in `x` never score and `to_move` plays next.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DelayedGame {
    tree: Tree,
    c: u64,
    d: u64,
    x: u64,
    to_move: Player,
}

impl DelayedGame {
    pub fn new(tree: Tree, c: u64, d: u64, x: u64, to_move: Player) -> Result<Self, GameError> {
        if c & d != 0 {
            return Err(GameError::OverlappingClaims((c & d).trailing_zeros() as usize));
        }
        let stray_edges = (c | d) & !tree.all_edges();
        if stray_edges != 0 {
            return Err(GameError::SetOutOfRange(stray_edges.trailing_zeros() as usize));
        }
        let stray_vertices = x & !tree.all_vertices();
        if stray_vertices != 0 {
            return Err(GameError::SetOutOfRange(
                stray_vertices.trailing_zeros() as usize
            ));
        }
        Ok(DelayedGame {
            tree,
            c,
            d,
            x,
            to_move,
        })
    }

    /// The ordinary game `F(T)`: nothing claimed, Toucher first.
    pub fn plain(tree: Tree) -> DelayedGame {
        DelayedGame {
            tree,
            c: 0,
            d: 0,
            x: 0,
            to_move: Player::Toucher,
        }
    }

    /// `F(T, C, L)`: leaves excluded, Isolator to move.
    pub fn with_leaves_excluded(tree: Tree, c: u64) -> Result<Self, GameError> {
        let x = tree.leaves();
        DelayedGame::new(tree, c, 0, x, Player::Isolator)
    }

    pub fn tree(&self) -> &Tree {
        &self.tree
    }

    pub fn toucher_edges(&self) -> u64 {
        self.c
    }

    pub fn isolator_edges(&self) -> u64 {
        self.d
    }

    pub fn excluded(&self) -> u64 {
        self.x
    }

    pub fn to_move(&self) -> Player {
        self.to_move
    }

    /// `Ê`: edges claimed by neither player.
    pub fn free_edges(&self) -> u64 {
        self.tree.all_edges() & !(self.c | self.d)
    }

    pub fn classify(&self) -> VertexClassification {
        classify(self)
    }

    /// Number of isolated vertices outside `X` if the game ended now.
    pub fn isolated_count(&self) -> usize {
        self.classify().isolated.count_ones() as usize
    }
}

impl fmt::Display for DelayedGame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} C:{} D:{} X:{} s:{}",
            self.tree,
            fmt_set(self.c),
            fmt_set(self.d),
            fmt_set(self.x),
            self.to_move.letter()
        )
    }
}

pub(crate) fn fmt_set(mask: u64) -> String {
    let items: Vec<String> = bits(mask).map(|i| i.to_string()).collect();
    format!("{{{}}}", items.join(","))
}

fn parse_set(s: &str) -> Result<u64, GameError> {
    let inner = s
        .trim()
        .strip_prefix('{')
        .and_then(|t| t.strip_suffix('}'))
        .ok_or_else(|| GameError::Parse(format!("expected {{...}}, found {s:?}")))?;
    let mut mask = 0u64;
    for item in inner.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        let i = parse_usize(item)?;
        if i >= MAX_ELEMENTS {
            return Err(GameError::SetOutOfRange(i));
        }
        mask |= bit(i);
    }
    Ok(mask)
}

impl FromStr for DelayedGame {
    type Err = GameError;

    fn from_str(s: &str) -> Result<DelayedGame, GameError> {
        let s = s.trim();
        let c_at = s
            .find(" C:")
            .ok_or_else(|| GameError::Parse("missing C:{...}".into()))?;
        let tree: Tree = s[..c_at].parse()?;
        let mut rest = &s[c_at + 1..];
        let mut field = |name: &str| -> Result<&str, GameError> {
            let body = rest
                .strip_prefix(name)
                .ok_or_else(|| GameError::Parse(format!("expected {name}")))?;
            let end = body.find(' ').unwrap_or(body.len());
            let (value, tail) = body.split_at(end);
            rest = tail.trim_start();
            Ok(value)
        };
        let c = parse_set(field("C:")?)?;
        let d = parse_set(field("D:")?)?;
        let x = parse_set(field("X:")?)?;
        let to_move = match field("s:")? {
            "T" => Player::Toucher,
            "I" => Player::Isolator,
            other => return Err(GameError::Parse(format!("unknown player {other:?}"))),
        };
        if !rest.is_empty() {
            return Err(GameError::Parse(format!("trailing input {rest:?}")));
        }
        DelayedGame::new(tree, c, d, x, to_move)
    }
}

/// Partition of the vertices into isolated, occupied, excluded and
/// unoccupied sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VertexClassification {
    pub isolated: u64,
    pub occupied: u64,
    pub excluded: u64,
    pub unoccupied: u64,
}

impl VertexClassification {
    /// Occupied or excluded vertices.
    pub fn touched(&self) -> u64 {
        self.occupied | self.excluded
    }
}

pub fn classify(game: &DelayedGame) -> VertexClassification {
    classify_parts(game.tree.graph(), game.c, game.d, game.x)
}

pub(crate) fn classify_parts(graph: &Graph, c: u64, d: u64, x: u64) -> VertexClassification {
    let mut cls = VertexClassification {
        isolated: 0,
        occupied: 0,
        excluded: x,
        unoccupied: 0,
    };
    for v in 0..graph.n() {
        if x & bit(v) != 0 {
            continue;
        }
        let inc = graph.incident_mask(v);
        if inc & c != 0 {
            cls.occupied |= bit(v);
        } else if inc & !d == 0 {
            cls.isolated |= bit(v);
        } else {
            cls.unoccupied |= bit(v);
        }
    }
    cls
}

/// Endpoint pattern of a free edge: one plus the number of touched endpoints.
pub fn endpoint_pattern(game: &DelayedGame, e: usize) -> Result<u8, GameError> {
    if e >= game.tree.edge_count() {
        return Err(GameError::SetOutOfRange(e));
    }
    if game.free_edges() & bit(e) == 0 {
        return Err(GameError::Claimed(e));
    }
    let touched = game.classify().touched();
    let (u, v) = game.tree.endpoints(e);
    let count = (touched >> u & 1) + (touched >> v & 1);
    Ok(1 + count as u8)
}

/// A game in progress: a starting position plus the moves played since.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlayState {
    game: DelayedGame,
    moves_t: Vec<usize>,
    moves_i: Vec<usize>,
    to_move: Player,
    claimed_t: u64,
    claimed_i: u64,
}

impl PlayState {
    pub fn new(game: DelayedGame) -> PlayState {
        PlayState {
            to_move: game.to_move,
            claimed_t: game.c,
            claimed_i: game.d,
            game,
            moves_t: Vec::new(),
            moves_i: Vec::new(),
        }
    }

    pub fn start(&self) -> &DelayedGame {
        &self.game
    }

    pub fn tree(&self) -> &Tree {
        &self.game.tree
    }

    pub fn to_move(&self) -> Player {
        self.to_move
    }

    pub fn toucher_moves(&self) -> &[usize] {
        &self.moves_t
    }

    pub fn isolator_moves(&self) -> &[usize] {
        &self.moves_i
    }

    /// Every edge owned by Toucher, including the starting claims.
    pub fn toucher_claims(&self) -> u64 {
        self.claimed_t
    }

    pub fn isolator_claims(&self) -> u64 {
        self.claimed_i
    }

    pub fn legal_mask(&self) -> u64 {
        self.game.tree.all_edges() & !(self.claimed_t | self.claimed_i)
    }

    pub fn legal_moves(&self) -> Vec<usize> {
        bits(self.legal_mask()).collect()
    }

    pub fn is_over(&self) -> bool {
        self.legal_mask() == 0
    }

    pub fn apply_move(&self, e: usize) -> Result<PlayState, GameError> {
        if self.is_over() {
            return Err(GameError::GameOver);
        }
        if e >= self.game.tree.edge_count() {
            return Err(GameError::IllegalMove(e));
        }
        if (self.claimed_t | self.claimed_i) & bit(e) != 0 {
            return Err(GameError::Claimed(e));
        }
        let mut next = self.clone();
        match self.to_move {
            Player::Toucher => {
                next.moves_t.push(e);
                next.claimed_t |= bit(e);
            }
            Player::Isolator => {
                next.moves_i.push(e);
                next.claimed_i |= bit(e);
            }
        }
        next.to_move = self.to_move.other();
        Ok(next)
    }

    /// Applies a move given by its endpoints.
    pub fn apply_pair(&self, u: usize, v: usize) -> Result<PlayState, GameError> {
        let e = self
            .game
            .tree
            .edge_between(u, v)
            .ok_or(GameError::NoSuchEdge(u, v))?;
        self.apply_move(e)
    }

    /// The current position as a delayed game.
    pub fn position(&self) -> DelayedGame {
        DelayedGame {
            tree: self.game.tree.clone(),
            c: self.claimed_t,
            d: self.claimed_i,
            x: self.game.x,
            to_move: self.to_move,
        }
    }

    pub fn classify(&self) -> VertexClassification {
        classify_parts(
            self.game.tree.graph(),
            self.claimed_t,
            self.claimed_i,
            self.game.x,
        )
    }

    /// Vertices outside `X` with no Toucher edge, counted as if the game ended now.
    pub fn current_isolated(&self) -> usize {
        self.classify().isolated.count_ones() as usize
    }

    pub fn final_score(&self) -> Result<usize, GameError> {
        if !self.is_over() {
            return Err(GameError::NotOver);
        }
        Ok(score(self.game.tree.graph(), self.claimed_t, self.game.x))
    }

    /// Free edges whose claim by Isolator isolates a new vertex right away.
    pub fn isolatable_edges(&self) -> Vec<usize> {
        bits(self.isolatable_mask()).collect()
    }

    pub fn isolatable_mask(&self) -> u64 {
        let cls = self.classify();
        let tree = &self.game.tree;
        let mut out = 0;
        for e in bits(self.legal_mask()) {
            let (u, v) = tree.endpoints(e);
            let isolates = [u, v].into_iter().any(|w| {
                cls.unoccupied & bit(w) != 0
                    && tree.incident_mask(w) & !self.claimed_i == bit(e)
            });
            if isolates {
                out |= bit(e);
            }
        }
        out
    }
}

/// Vertices outside `excluded` with no edge in `toucher`.
pub fn score(graph: &Graph, toucher: u64, excluded: u64) -> usize {
    (0..graph.n())
        .filter(|&v| excluded & bit(v) == 0 && graph.incident_mask(v) & toucher == 0)
        .count()
}
