//! Label-preserving boards for reductions.
//!
//! A reduction deletes vertices and moves edge endpoints; keeping the
//! original vertex labels makes the default edge and vertex maps the
//! identity. Edges are named by their endpoints.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::game::{bit, bits, fmt_set, DelayedGame, GameError, Player, Tree, VertexClassification};

pub const CAPACITY: usize = 64;

/// An unordered edge, smaller label first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edge(pub u8, pub u8);

impl Edge {
    pub fn new(a: usize, b: usize) -> Edge {
        debug_assert!(a != b && a < CAPACITY && b < CAPACITY);
        Edge(a.min(b) as u8, a.max(b) as u8)
    }

    pub fn a(self) -> usize {
        self.0 as usize
    }

    pub fn b(self) -> usize {
        self.1 as usize
    }

    pub fn has(self, v: usize) -> bool {
        self.a() == v || self.b() == v
    }

    pub fn other(self, v: usize) -> usize {
        if self.a() == v {
            self.b()
        } else {
            self.a()
        }
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.0, self.1)
    }
}

impl FromStr for Edge {
    type Err = GameError;

    fn from_str(s: &str) -> Result<Edge, GameError> {
        let bad = || GameError::Parse(format!("expected u-v, found {s:?}"));
        let (a, b) = s.trim().split_once('-').ok_or_else(bad)?;
        let a: usize = a.trim().parse().map_err(|_| bad())?;
        let b: usize = b.trim().parse().map_err(|_| bad())?;
        if a == b || a >= CAPACITY || b >= CAPACITY {
            return Err(bad());
        }
        Ok(Edge::new(a, b))
    }
}

/// A delayed-game position over a subset of the labels `0..64`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Board {
    verts: u64,
    adj: Vec<u64>,
    cadj: Vec<u64>,
    dadj: Vec<u64>,
    x: u64,
}

/// A board converted to a dense [`DelayedGame`] for solving.
#[derive(Debug, Clone)]
pub struct DenseBoard {
    pub game: DelayedGame,
    /// Original label of each dense vertex.
    pub labels: Vec<usize>,
    /// Dense edge index of each board edge.
    pub index: BTreeMap<Edge, usize>,
}

impl DenseBoard {
    pub fn edge(&self, e: usize) -> Edge {
        let (a, b) = self.game.tree().endpoints(e);
        Edge::new(self.labels[a], self.labels[b])
    }
}

impl Board {
    pub fn empty() -> Board {
        Board {
            verts: 0,
            adj: vec![0; CAPACITY],
            cadj: vec![0; CAPACITY],
            dadj: vec![0; CAPACITY],
            x: 0,
        }
    }

    pub fn from_tree(tree: &Tree) -> Board {
        let mut b = Board::empty();
        b.verts = tree.all_vertices();
        for &(u, v) in tree.edges() {
            b.add_edge(u, v, None);
        }
        b
    }

    pub fn from_game(game: &DelayedGame) -> Board {
        let tree = game.tree();
        let mut b = Board::from_tree(tree);
        for (e, &(u, v)) in tree.edges().iter().enumerate() {
            if game.toucher_edges() & bit(e) != 0 {
                b.claim(Edge::new(u, v), Player::Toucher);
            } else if game.isolator_edges() & bit(e) != 0 {
                b.claim(Edge::new(u, v), Player::Isolator);
            }
        }
        b.x = game.excluded();
        b
    }

    /// `F(T, C, L)` for an already-built tree board.
    pub fn with_leaves_excluded(mut self) -> Board {
        self.x = self.leaves();
        self
    }

    pub fn vertices(&self) -> u64 {
        self.verts
    }

    pub fn n(&self) -> usize {
        self.verts.count_ones() as usize
    }

    pub fn contains(&self, v: usize) -> bool {
        v < CAPACITY && self.verts & bit(v) != 0
    }

    pub fn neighbors(&self, v: usize) -> u64 {
        self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].count_ones() as usize
    }

    pub fn has_edge(&self, e: Edge) -> bool {
        self.adj[e.a()] & bit(e.b()) != 0
    }

    pub fn in_c(&self, e: Edge) -> bool {
        self.cadj[e.a()] & bit(e.b()) != 0
    }

    pub fn in_d(&self, e: Edge) -> bool {
        self.dadj[e.a()] & bit(e.b()) != 0
    }

    pub fn is_free(&self, e: Edge) -> bool {
        self.has_edge(e) && !self.in_c(e) && !self.in_d(e)
    }

    /// Neighbors joined to `v` by a Toucher edge.
    pub fn c_neighbors(&self, v: usize) -> u64 {
        self.cadj[v]
    }

    pub fn d_neighbors(&self, v: usize) -> u64 {
        self.dadj[v]
    }

    pub fn free_neighbors(&self, v: usize) -> u64 {
        self.adj[v] & !self.cadj[v] & !self.dadj[v]
    }

    fn collect(&self, masks: &[u64]) -> Vec<Edge> {
        let mut out = Vec::new();
        for u in bits(self.verts) {
            for w in bits(masks[u] & !(bit(u + 1) - 1)) {
                out.push(Edge::new(u, w));
            }
        }
        out
    }

    pub fn edges(&self) -> Vec<Edge> {
        self.collect(&self.adj)
    }

    pub fn c_edges(&self) -> Vec<Edge> {
        self.collect(&self.cadj)
    }

    pub fn d_edges(&self) -> Vec<Edge> {
        self.collect(&self.dadj)
    }

    pub fn free_edges(&self) -> Vec<Edge> {
        self.edges().into_iter().filter(|&e| self.is_free(e)).collect()
    }

    pub fn edge_count(&self) -> usize {
        bits(self.verts).map(|v| self.degree(v)).sum::<usize>() / 2
    }

    pub fn c_count(&self) -> usize {
        bits(self.verts).map(|v| self.cadj[v].count_ones() as usize).sum::<usize>() / 2
    }

    pub fn d_count(&self) -> usize {
        bits(self.verts).map(|v| self.dadj[v].count_ones() as usize).sum::<usize>() / 2
    }

    pub fn excluded(&self) -> u64 {
        self.x
    }

    pub fn set_excluded(&mut self, x: u64) {
        self.x = x & self.verts;
    }

    pub fn leaves(&self) -> u64 {
        bits(self.verts)
            .filter(|&v| self.degree(v) == 1)
            .fold(0, |m, v| m | bit(v))
    }

    pub fn classify(&self) -> VertexClassification {
        let mut cls = VertexClassification {
            isolated: 0,
            occupied: 0,
            excluded: self.x,
            unoccupied: 0,
        };
        for v in bits(self.verts & !self.x) {
            if self.cadj[v] != 0 {
                cls.occupied |= bit(v);
            } else if self.adj[v] & !self.dadj[v] == 0 {
                cls.isolated |= bit(v);
            } else {
                cls.unoccupied |= bit(v);
            }
        }
        cls
    }

    pub fn touched(&self) -> u64 {
        self.classify().touched()
    }

    /// Endpoint pattern of a free edge.
    pub fn pattern(&self, e: Edge) -> Option<u8> {
        if !self.is_free(e) {
            return None;
        }
        let t = self.touched();
        Some(1 + (t >> e.a() & 1) as u8 + (t >> e.b() & 1) as u8)
    }

    pub fn add_vertex(&mut self, v: usize) {
        self.verts |= bit(v);
    }

    pub fn add_edge(&mut self, a: usize, b: usize, owner: Option<Player>) {
        self.verts |= bit(a) | bit(b);
        self.adj[a] |= bit(b);
        self.adj[b] |= bit(a);
        if let Some(p) = owner {
            self.claim(Edge::new(a, b), p);
        }
    }

    pub fn remove_edge(&mut self, e: Edge) {
        let (a, b) = (e.a(), e.b());
        for m in [&mut self.adj, &mut self.cadj, &mut self.dadj] {
            m[a] &= !bit(b);
            m[b] &= !bit(a);
        }
    }

    /// Deletes `v` and every edge at it.
    pub fn remove_vertex(&mut self, v: usize) {
        for w in bits(self.adj[v]) {
            self.remove_edge(Edge::new(v, w));
        }
        self.verts &= !bit(v);
        self.x &= !bit(v);
    }

    pub fn claim(&mut self, e: Edge, p: Player) {
        let (a, b) = (e.a(), e.b());
        let m = match p {
            Player::Toucher => &mut self.cadj,
            Player::Isolator => &mut self.dadj,
        };
        m[a] |= bit(b);
        m[b] |= bit(a);
    }

    pub fn owner(&self, e: Edge) -> Option<Player> {
        if self.in_c(e) {
            Some(Player::Toucher)
        } else if self.in_d(e) {
            Some(Player::Isolator)
        } else {
            None
        }
    }

    /// Moves edge `from` to `to`, keeping its owner.
    pub fn move_edge(&mut self, from: Edge, to: Edge) {
        let owner = self.owner(from);
        self.remove_edge(from);
        self.add_edge(to.a(), to.b(), owner);
    }

    /// Vertices reachable from `start` without entering `blocked`.
    pub fn reach(&self, start: usize, blocked: u64) -> u64 {
        let mut seen = bit(start);
        let mut frontier = bit(start);
        while frontier != 0 {
            let mut next = 0;
            for v in bits(frontier) {
                next |= self.adj[v];
            }
            next &= !seen & !blocked;
            seen |= next;
            frontier = next;
        }
        seen
    }

    pub fn is_tree(&self) -> bool {
        let n = self.n();
        n >= 1
            && self.edge_count() == n - 1
            && self.reach(self.verts.trailing_zeros() as usize, 0) == self.verts
    }

    pub fn is_path(&self) -> bool {
        self.is_tree() && bits(self.verts).all(|v| self.degree(v) <= 2)
    }

    /// Claims sets and exclusions agree with `F(T, C, L)`.
    pub fn is_leaf_excluded(&self) -> bool {
        self.x == self.leaves() && self.d_count() == 0
    }

    pub fn to_dense(&self, to_move: Player) -> DenseBoard {
        let labels: Vec<usize> = bits(self.verts).collect();
        let mut pos = [usize::MAX; CAPACITY];
        for (i, &v) in labels.iter().enumerate() {
            pos[v] = i;
        }
        let edges = self.edges();
        let pairs: Vec<(usize, usize)> = edges.iter().map(|e| (pos[e.a()], pos[e.b()])).collect();
        let tree = Tree::new(labels.len(), &pairs).expect("board is a tree");
        let mut c = 0;
        let mut d = 0;
        let mut index = BTreeMap::new();
        for (i, &e) in edges.iter().enumerate() {
            index.insert(e, i);
            if self.in_c(e) {
                c |= bit(i);
            }
            if self.in_d(e) {
                d |= bit(i);
            }
        }
        let x = bits(self.x).fold(0, |m, v| m | bit(pos[v]));
        let game = DelayedGame::new(tree, c, d, x, to_move).expect("claims are disjoint");
        DenseBoard { game, labels, index }
    }

    /// `(n, l, k, Σ_{v∈O} (d(v) − 2))` for the score bound.
    pub fn bound_terms(&self) -> (i64, i64, i64, i64) {
        let occupied = self.classify().occupied;
        let excess: i64 = bits(occupied).map(|v| self.degree(v) as i64 - 2).sum();
        (
            self.n() as i64,
            self.leaves().count_ones() as i64,
            self.c_count() as i64,
            excess,
        )
    }
}

fn fmt_edges(edges: &[Edge]) -> String {
    let items: Vec<String> = edges.iter().map(|e| e.to_string()).collect();
    format!("{{{}}}", items.join(","))
}

impl fmt::Display for Board {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "V:{} E:{} C:{} D:{} X:{}",
            fmt_set(self.verts),
            fmt_edges(&self.edges()),
            fmt_edges(&self.c_edges()),
            fmt_edges(&self.d_edges()),
            fmt_set(self.x)
        )
    }
}

fn braced<'a>(s: &'a str, name: &str) -> Result<(&'a str, &'a str), GameError> {
    let s = s.trim_start();
    let body = s
        .strip_prefix(name)
        .and_then(|t| t.strip_prefix('{'))
        .ok_or_else(|| GameError::Parse(format!("expected {name}{{...}}")))?;
    let end = body
        .find('}')
        .ok_or_else(|| GameError::Parse(format!("unterminated {name}")))?;
    Ok((&body[..end], &body[end + 1..]))
}

fn items(s: &str) -> impl Iterator<Item = &str> {
    s.split(',').map(str::trim).filter(|t| !t.is_empty())
}

impl FromStr for Board {
    type Err = GameError;

    fn from_str(s: &str) -> Result<Board, GameError> {
        let mut b = Board::empty();
        let (vs, rest) = braced(s, "V:")?;
        for v in items(vs) {
            let v: usize = v
                .parse()
                .map_err(|_| GameError::Parse(format!("bad vertex {v:?}")))?;
            if v >= CAPACITY {
                return Err(GameError::SetOutOfRange(v));
            }
            b.add_vertex(v);
        }
        let (es, rest) = braced(rest, "E:")?;
        for e in items(es) {
            let e: Edge = e.parse()?;
            if !b.contains(e.a()) || !b.contains(e.b()) {
                return Err(GameError::Parse(format!("edge {e} leaves the vertex set")));
            }
            b.add_edge(e.a(), e.b(), None);
        }
        let (cs, rest) = braced(rest, "C:")?;
        let (ds, rest) = braced(rest, "D:")?;
        for (list, p) in [(cs, Player::Toucher), (ds, Player::Isolator)] {
            for e in items(list) {
                let e: Edge = e.parse()?;
                if !b.has_edge(e) || b.owner(e).is_some() {
                    return Err(GameError::Parse(format!("cannot claim {e}")));
                }
                b.claim(e, p);
            }
        }
        let (xs, rest) = braced(rest, "X:")?;
        for v in items(xs) {
            let v: usize = v
                .parse()
                .map_err(|_| GameError::Parse(format!("bad vertex {v:?}")))?;
            if !b.contains(v) {
                return Err(GameError::SetOutOfRange(v));
            }
            b.x |= bit(v);
        }
        if !rest.trim().is_empty() {
            return Err(GameError::Parse(format!("trailing input {:?}", rest.trim())));
        }
        Ok(b)
    }
}
