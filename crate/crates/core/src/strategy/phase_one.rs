//! Greedy isolation while isolatable edges exist, and the clean-up chain
//! that turns the resulting position into one with every leaf excluded.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::board::{Board, Edge};
use crate::game::{bit, bits, PlayState, Player, Tree};
use crate::reductions::ReductionCertificate;

use super::cases::Rewrite;
use super::StrategyError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhaseOneMove {
    Claim(usize),
    PhaseEnd,
}

/// Lowest isolatable edge, or the end of the phase.
pub fn phase1_move(state: &PlayState) -> PhaseOneMove {
    match state.isolatable_mask() {
        0 => PhaseOneMove::PhaseEnd,
        y => PhaseOneMove::Claim(y.trailing_zeros() as usize),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhaseOneTrace {
    pub tree: Tree,
    pub r: usize,
    /// `v1..vr` in the order they were isolated.
    pub isolated: Vec<usize>,
    pub c: u64,
    pub d: u64,
}

impl PhaseOneTrace {
    /// Reads the trace off a position where phase one has just ended.
    pub fn from_state(state: &PlayState, isolated: Vec<usize>) -> Result<Self, StrategyError> {
        let trace = PhaseOneTrace {
            tree: state.tree().clone(),
            r: isolated.len(),
            isolated,
            c: state.toucher_claims(),
            d: state.isolator_claims(),
        };
        trace.validate()?;
        Ok(trace)
    }

    pub fn validate(&self) -> Result<(), StrategyError> {
        let bad = |m: String| Err(StrategyError::Precondition(m));
        if self.c.count_ones() as usize != self.r + 1 {
            return bad(format!("{} Toucher edges after {} Isolator moves", self.c.count_ones(), self.r));
        }
        let mut b = Board::from_tree(&self.tree);
        for &v in &self.isolated {
            if b.degree(v) > 1 || (b.n() > 1 && b.degree(v) == 0) {
                return bad(format!("vertex {v} is not a leaf when removed"));
            }
            b.remove_vertex(v);
        }
        Ok(())
    }

    pub fn board(&self) -> Board {
        let mut b = Board::from_tree(&self.tree);
        for (e, &(u, v)) in self.tree.edges().iter().enumerate() {
            if self.c & bit(e) != 0 {
                b.claim(Edge::new(u, v), Player::Toucher);
            } else if self.d & bit(e) != 0 {
                b.claim(Edge::new(u, v), Player::Isolator);
            }
        }
        b
    }
}

#[derive(Debug, Clone)]
pub struct Lemma3Outcome {
    /// Final board: every leaf excluded, no Isolator edges.
    pub board: Board,
    pub chain: Vec<ReductionCertificate>,
    /// Applications of the three clean-up rules.
    pub case_counts: [usize; 3],
    /// `|T| − 3|X| − 3|C|` after the deletion step and after each rule.
    pub g: Vec<i64>,
    /// `|T_t| − 3|L_t| − 3|C_t|` against `|T| − 5r − 4`.
    pub final_check: (i64, i64),
}

fn g_value(b: &Board) -> i64 {
    b.n() as i64 - 3 * b.excluded().count_ones() as i64 - 3 * b.c_count() as i64
}

/// Deletes the isolated vertices, then repeatedly removes or reattaches
/// leaves that are not yet excluded until every leaf is excluded.
pub fn lemma3_reduce(trace: &PhaseOneTrace) -> Result<Lemma3Outcome, StrategyError> {
    trace.validate()?;
    let inv = |m: String| StrategyError::Invariant(m);
    let b0 = trace.board();
    let n0 = b0.n();
    let mut rw = Rewrite::new(&b0, format!("delete isolated {:?}", trace.isolated));
    rw.delete_all(&trace.isolated);
    let first = rw.finish_with(0);
    let mut chain = vec![first];
    let mut cur = chain[0].target.clone();
    if cur.d_count() != 0 {
        return Err(inv(format!("Isolator edges survive deletion: {cur}")));
    }
    let mut g = vec![g_value(&cur)];
    let mut counts = [0usize; 3];
    let budget = n0 * n0;
    let mut steps = 0;
    loop {
        let leaves = cur.leaves();
        let x = cur.excluded();
        let occupied = cur.classify().occupied;
        if x & !leaves != 0 || leaves & !(x | occupied) != 0 {
            return Err(inv(format!("excluded set drifted from the leaves: {cur}")));
        }
        let pending = leaves & !x;
        if pending == 0 {
            break;
        }
        steps += 1;
        if steps > budget {
            return Err(inv(format!("no termination within {budget} steps")));
        }
        let v = pending.trailing_zeros() as usize;
        let w = bits(cur.c_neighbors(v))
            .next()
            .ok_or_else(|| inv(format!("leaf {v} is neither excluded nor occupied on {cur}")))?;
        let dw = cur.degree(w);
        let before = g_value(&cur);
        let (cert, which) = if dw == 2 {
            let mut rw = Rewrite::new(&cur, format!("leaf {v} via degree-2 {w}"));
            rw.delete(v);
            let nx = (x & !bit(v)) | bit(w);
            (rw.finish_with(nx), 0)
        } else if dw >= 3 && cur.c_neighbors(w).count_ones() >= 2 {
            let mut rw = Rewrite::new(&cur, format!("leaf {v} at shared {w}"));
            rw.delete(v);
            (rw.finish_with(x & !bit(v)), 1)
        } else if dw >= 3 {
            let v1 = (cur.neighbors(w) & !bit(v)).trailing_zeros() as usize;
            let mut rw = Rewrite::new(&cur, format!("move {w}-{v1} to {v}-{v1}"));
            rw.move_edge(Edge::new(w, v1), Edge::new(v, v1));
            (rw.finish_with(x & !bit(v)), 2)
        } else {
            return Err(StrategyError::Degenerate(format!("single Toucher edge {cur}")));
        };
        cur = cert.target.clone();
        chain.push(cert);
        counts[which] += 1;
        let after = g_value(&cur);
        let floor = before + [-1, 2, 0][which];
        if after < floor {
            return Err(inv(format!("g fell from {before} to {after} in rule {}", which + 1)));
        }
        g.push(after);
    }
    if counts[0] > trace.r + 1 {
        return Err(inv(format!("{} degree-2 steps exceed r+1 = {}", counts[0], trace.r + 1)));
    }
    let lhs = cur.n() as i64 - 3 * cur.leaves().count_ones() as i64 - 3 * cur.c_count() as i64;
    let rhs = n0 as i64 - 5 * trace.r as i64 - 4;
    if lhs < rhs {
        return Err(inv(format!("final size measure {lhs} below {rhs}")));
    }
    Ok(Lemma3Outcome {
        board: cur,
        chain,
        case_counts: counts,
        g,
        final_check: (lhs, rhs),
    })
}

/// Plays phase one with a seeded random Toucher; `None` if the game ends
/// before the phase does.
pub fn random_phase_one(tree: &Tree, seed: u64) -> Result<Option<PhaseOneTrace>, StrategyError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut state = PlayState::new(crate::game::DelayedGame::plain(tree.clone()));
    let mut isolated = Vec::new();
    loop {
        if state.is_over() {
            return Ok(None);
        }
        let e = match state.to_move() {
            Player::Toucher => *state.legal_moves().choose(&mut rng).expect("moves remain"),
            Player::Isolator => match phase1_move(&state) {
                PhaseOneMove::PhaseEnd => return PhaseOneTrace::from_state(&state, isolated).map(Some),
                PhaseOneMove::Claim(e) => {
                    let before = state.classify().isolated;
                    let next = state.apply_move(e).map_err(StrategyError::Game)?;
                    let fresh = next.classify().isolated & !before;
                    if fresh.count_ones() != 1 {
                        return Err(StrategyError::Invariant(format!("claim isolated {} vertices", fresh.count_ones())));
                    }
                    isolated.push(fresh.trailing_zeros() as usize);
                    state = next;
                    continue;
                }
            },
        };
        state = state.apply_move(e).map_err(StrategyError::Game)?;
    }
}
