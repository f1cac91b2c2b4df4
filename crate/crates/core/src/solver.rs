//! Exhaustive minimax over edge claims.
//!
//! Positions are keyed by the pair of claim masks restricted to the edges
//! that were free at the root; the player to move follows from the number
//! of claims made since the root. Up to [`DENSE_MAX`] free edges the memo is
//! a flat base-3 table, beyond that a hash map.

use rustc_hash::FxHashMap;
use thiserror::Error;

use crate::game::{bit, bits, DelayedGame, GameError, Graph, PlayState, Player, Tree};

pub const DEFAULT_LIMIT: usize = 22;
const DENSE_MAX: usize = 13;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolveError {
    #[error("{free} free edges exceed the search limit of {limit}")]
    LimitExceeded { free: usize, limit: usize },
    #[error("policy chose edge {edge}, which is not legal in position {position}")]
    IllegalPolicyMove { edge: usize, position: String },
    #[error(transparent)]
    Game(#[from] GameError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SolveResult {
    pub value: usize,
    /// Positions expanded (memo misses).
    pub nodes: u64,
    /// Lowest-index optimal move from the root, if any move exists.
    pub best_move: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Solver {
    limit: usize,
}

impl Default for Solver {
    fn default() -> Self {
        Solver {
            limit: DEFAULT_LIMIT,
        }
    }
}

/// Root data shared by every search variant.
struct Arena {
    free: Vec<usize>,
    /// Per scoring vertex: mask of compact free indices incident to it.
    live: Vec<u64>,
    root_player: Player,
}

impl Arena {
    fn new(graph: &Graph, c: u64, d: u64, x: u64, to_move: Player) -> Arena {
        let free: Vec<usize> = bits(graph.all_edges() & !(c | d)).collect();
        let mut live = Vec::new();
        for v in 0..graph.n() {
            let inc = graph.incident_mask(v);
            if x & bit(v) != 0 || inc & c != 0 {
                continue;
            }
            let mut m = 0u64;
            for (k, &e) in free.iter().enumerate() {
                if inc & bit(e) != 0 {
                    m |= bit(k);
                }
            }
            live.push(m);
        }
        Arena {
            free,
            live,
            root_player: to_move,
        }
    }

    fn width(&self) -> usize {
        self.free.len()
    }

    fn full(&self) -> u64 {
        if self.width() == 64 {
            u64::MAX
        } else {
            bit(self.width()) - 1
        }
    }

    fn player(&self, t: u64, i: u64) -> Player {
        if (t | i).count_ones().is_multiple_of(2) {
            self.root_player
        } else {
            self.root_player.other()
        }
    }

    fn score(&self, t: u64) -> usize {
        self.live.iter().filter(|&&m| m & t == 0).count()
    }
}

enum Memo {
    Dense { table: Vec<u8>, pow3: Vec<usize> },
    Sparse(FxHashMap<u64, u8>),
}

struct Search {
    arena: Arena,
    memo: Memo,
    nodes: u64,
}

impl Search {
    fn new(arena: Arena) -> Search {
        let w = arena.width();
        let memo = if w <= DENSE_MAX {
            let pow3: Vec<usize> = (0..=w).map(|k| 3usize.pow(k as u32)).collect();
            Memo::Dense {
                table: vec![0; pow3[w]],
                pow3,
            }
        } else {
            Memo::Sparse(FxHashMap::default())
        };
        Search {
            arena,
            memo,
            nodes: 0,
        }
    }

    fn value(&mut self, t: u64, i: u64, idx: usize) -> usize {
        let open = self.arena.full() & !(t | i);
        if open == 0 {
            return self.arena.score(t);
        }
        let w = self.arena.width();
        match &self.memo {
            Memo::Dense { table, .. } => {
                if table[idx] != 0 {
                    return table[idx] as usize - 1;
                }
            }
            Memo::Sparse(map) => {
                if let Some(&v) = map.get(&(t | i << w)) {
                    return v as usize;
                }
            }
        }
        self.nodes += 1;
        let player = self.arena.player(t, i);
        let mut best: Option<usize> = None;
        for k in bits(open) {
            let v = match player {
                Player::Toucher => {
                    let step = self.step(k, 1);
                    self.value(t | bit(k), i, idx + step)
                }
                Player::Isolator => {
                    let step = self.step(k, 2);
                    self.value(t, i | bit(k), idx + step)
                }
            };
            best = Some(match (best, player) {
                (None, _) => v,
                (Some(b), Player::Toucher) => b.min(v),
                (Some(b), Player::Isolator) => b.max(v),
            });
        }
        let best = best.unwrap_or(0);
        match &mut self.memo {
            Memo::Dense { table, .. } => table[idx] = best as u8 + 1,
            Memo::Sparse(map) => {
                map.insert(t | i << w, best as u8);
            }
        }
        best
    }

    fn step(&self, k: usize, digit: usize) -> usize {
        match &self.memo {
            Memo::Dense { pow3, .. } => digit * pow3[k],
            Memo::Sparse(_) => 0,
        }
    }

    /// Root value plus the lowest-index move achieving it.
    fn root(&mut self) -> (usize, Option<usize>) {
        let value = self.value(0, 0, 0);
        let player = self.arena.root_player;
        let mut best_move = None;
        for k in bits(self.arena.full()) {
            let child = match player {
                Player::Toucher => self.value(bit(k), 0, self.step(k, 1)),
                Player::Isolator => self.value(0, bit(k), self.step(k, 2)),
            };
            if child == value {
                best_move = Some(self.arena.free[k]);
                break;
            }
        }
        (value, best_move)
    }
}

fn plain_value(arena: &Arena, t: u64, i: u64) -> usize {
    let open = arena.full() & !(t | i);
    if open == 0 {
        return arena.score(t);
    }
    let values = bits(open).map(|k| match arena.player(t, i) {
        Player::Toucher => plain_value(arena, t | bit(k), i),
        Player::Isolator => plain_value(arena, t, i | bit(k)),
    });
    match arena.player(t, i) {
        Player::Toucher => values.min().unwrap_or(0),
        Player::Isolator => values.max().unwrap_or(0),
    }
}

fn pruned_value(arena: &Arena, t: u64, i: u64, mut lo: usize, mut hi: usize, nodes: &mut u64) -> usize {
    let open = arena.full() & !(t | i);
    if open == 0 {
        return arena.score(t);
    }
    *nodes += 1;
    match arena.player(t, i) {
        Player::Isolator => {
            let mut best = 0;
            for k in bits(open) {
                best = best.max(pruned_value(arena, t, i | bit(k), lo, hi, nodes));
                lo = lo.max(best);
                if lo >= hi {
                    break;
                }
            }
            best
        }
        Player::Toucher => {
            let mut best = usize::MAX;
            for k in bits(open) {
                best = best.min(pruned_value(arena, t | bit(k), i, lo, hi, nodes));
                hi = hi.min(best);
                if lo >= hi {
                    break;
                }
            }
            best
        }
    }
}

impl Solver {
    pub fn new(limit: usize) -> Solver {
        Solver { limit }
    }

    pub fn limit(&self) -> usize {
        self.limit
    }

    fn arena(&self, graph: &Graph, c: u64, d: u64, x: u64, to_move: Player) -> Result<Arena, SolveError> {
        let free = (graph.all_edges() & !(c | d)).count_ones() as usize;
        if free > self.limit {
            return Err(SolveError::LimitExceeded {
                free,
                limit: self.limit,
            });
        }
        Ok(Arena::new(graph, c, d, x, to_move))
    }

    /// Optimal score of a delayed game on any simple graph.
    pub fn alpha_graph(
        &self,
        graph: &Graph,
        c: u64,
        d: u64,
        x: u64,
        to_move: Player,
    ) -> Result<SolveResult, SolveError> {
        let mut search = Search::new(self.arena(graph, c, d, x, to_move)?);
        let (value, best_move) = search.root();
        Ok(SolveResult {
            value,
            nodes: search.nodes,
            best_move,
        })
    }

    pub fn alpha(&self, game: &DelayedGame) -> Result<SolveResult, SolveError> {
        self.alpha_graph(
            game.tree().graph(),
            game.toucher_edges(),
            game.isolator_edges(),
            game.excluded(),
            game.to_move(),
        )
    }

    pub fn u(&self, tree: &Tree) -> Result<usize, SolveError> {
        self.u_graph(tree.graph())
    }

    pub fn u_graph(&self, graph: &Graph) -> Result<usize, SolveError> {
        Ok(self.alpha_graph(graph, 0, 0, 0, Player::Toucher)?.value)
    }

    /// A move achieving the minimax value, lowest edge index on ties.
    pub fn optimal_move(&self, state: &PlayState) -> Result<usize, SolveError> {
        if state.is_over() {
            return Err(GameError::GameOver.into());
        }
        let result = self.alpha(&state.position())?;
        Ok(result.best_move.expect("a non-terminal position has a move"))
    }

    /// Optimal play from `game` to the end, as edge indices.
    pub fn principal_line(&self, game: &DelayedGame) -> Result<Vec<usize>, SolveError> {
        let mut state = PlayState::new(game.clone());
        let mut line = Vec::new();
        while !state.is_over() {
            let e = self.optimal_move(&state)?;
            line.push(e);
            state = state.apply_move(e)?;
        }
        Ok(line)
    }

    /// Reference search without memo or pruning.
    pub fn alpha_unmemoized(&self, game: &DelayedGame) -> Result<usize, SolveError> {
        let arena = self.arena(
            game.tree().graph(),
            game.toucher_edges(),
            game.isolator_edges(),
            game.excluded(),
            game.to_move(),
        )?;
        Ok(plain_value(&arena, 0, 0))
    }

    /// Alpha-beta search without memo; must agree with [`Solver::alpha`].
    pub fn alpha_pruned(&self, game: &DelayedGame) -> Result<SolveResult, SolveError> {
        let arena = self.arena(
            game.tree().graph(),
            game.toucher_edges(),
            game.isolator_edges(),
            game.excluded(),
            game.to_move(),
        )?;
        let mut nodes = 0;
        let value = pruned_value(&arena, 0, 0, 0, usize::MAX, &mut nodes);
        Ok(SolveResult {
            value,
            nodes,
            best_move: None,
        })
    }
}

/// Problems found by a policy while it played, surfaced by [`best_response`].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PolicyAudit {
    pub violations: Vec<String>,
    pub certificates_checked: usize,
    pub episodes_checked: usize,
}

impl PolicyAudit {
    fn absorb(&mut self, other: PolicyAudit) {
        for v in other.violations {
            if self.violations.len() < 32 && !self.violations.contains(&v) {
                self.violations.push(v);
            }
        }
        self.certificates_checked += other.certificates_checked;
        self.episodes_checked += other.episodes_checked;
    }
}

/// A deterministic Isolator. Policies may keep state; the adversary search
/// clones them at every branch.
pub trait IsolatorPolicy: Clone {
    fn choose(&mut self, state: &PlayState) -> usize;

    fn audit(&self) -> PolicyAudit {
        PolicyAudit::default()
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct LowestEdge;

impl IsolatorPolicy for LowestEdge {
    fn choose(&mut self, state: &PlayState) -> usize {
        state.legal_mask().trailing_zeros() as usize
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct OptimalIsolator {
    pub solver: Solver,
}

impl IsolatorPolicy for OptimalIsolator {
    fn choose(&mut self, state: &PlayState) -> usize {
        self.solver
            .optimal_move(state)
            .expect("position within solver limits")
    }
}

/// Wraps a plain function of the position.
#[derive(Clone)]
pub struct FnPolicy<F>(pub F);

impl<F: Fn(&PlayState) -> usize + Clone> IsolatorPolicy for FnPolicy<F> {
    fn choose(&mut self, state: &PlayState) -> usize {
        (self.0)(state)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BestResponse {
    /// Minimum final score over every Toucher line.
    pub score: usize,
    /// A full move sequence reaching that score, lowest Toucher edges on ties.
    pub moves: Vec<usize>,
    /// Audits merged over every line explored.
    pub audit: PolicyAudit,
}

/// Strongest Toucher against a fixed Isolator policy on the plain game.
pub fn best_response_score<P: IsolatorPolicy>(tree: &Tree, policy: P) -> Result<usize, SolveError> {
    Ok(best_response(&DelayedGame::plain(tree.clone()), policy)?.score)
}

/// Searches every Toucher branch from `game`; Isolator always follows `policy`.
pub fn best_response<P: IsolatorPolicy>(game: &DelayedGame, policy: P) -> Result<BestResponse, SolveError> {
    let state = PlayState::new(game.clone());
    let mut line = Vec::new();
    let (score, moves, audit) = respond(&state, policy, &mut line)?;
    Ok(BestResponse { score, moves, audit })
}

fn respond<P: IsolatorPolicy>(
    state: &PlayState,
    mut policy: P,
    line: &mut Vec<usize>,
) -> Result<(usize, Vec<usize>, PolicyAudit), SolveError> {
    if state.is_over() {
        return Ok((state.final_score()?, line.clone(), policy.audit()));
    }
    match state.to_move() {
        Player::Isolator => {
            let e = policy.choose(state);
            if e >= 64 || state.legal_mask() & bit(e) == 0 {
                return Err(SolveError::IllegalPolicyMove {
                    edge: e,
                    position: state.position().to_string(),
                });
            }
            line.push(e);
            let out = respond(&state.apply_move(e)?, policy, line);
            line.pop();
            out
        }
        Player::Toucher => {
            let mut best: Option<(usize, Vec<usize>)> = None;
            let mut audit = PolicyAudit::default();
            for e in state.legal_moves() {
                line.push(e);
                let (score, moves, a) = respond(&state.apply_move(e)?, policy.clone(), line)?;
                line.pop();
                audit.absorb(a);
                if best.as_ref().is_none_or(|(b, _)| score < *b) {
                    best = Some((score, moves));
                }
            }
            let (score, moves) = best.expect("non-terminal position has a move");
            Ok((score, moves, audit))
        }
    }
}
