//! The constructive Isolator: greedy isolation first, then play on a
//! reduced inner board whose moves are carried back to the real one.

pub mod cases;
pub mod episode;
pub mod phase_one;

use std::sync::Arc;

use crate::board::{Board, Edge};
use crate::game::{bit, GameError, PlayState, Player};
use crate::reductions::{check_reduction, final_case_bound_board, FinalCase, ReductionCertificate};
use crate::solver::{IsolatorPolicy, PolicyAudit, Solver};

pub use cases::{case_applies, first_case, CaseId};
pub use episode::Episode;
pub use phase_one::{lemma3_reduce, phase1_move, Lemma3Outcome, PhaseOneMove, PhaseOneTrace};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum StrategyError {
    #[error("precondition: {0}")]
    Precondition(String),
    #[error("invariant: {0}")]
    Invariant(String),
    #[error("degenerate configuration: {0}")]
    Degenerate(String),
    #[error(transparent)]
    Game(#[from] GameError),
}

/// Classifies a leaf-excluded position with Isolator to move.
pub fn phase2_case(board: &Board) -> Result<CaseId, StrategyError> {
    if !board.is_leaf_excluded() {
        return Err(StrategyError::Precondition(format!("not leaf-excluded: {board}")));
    }
    Ok(first_case(board))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Phase {
    One,
    Two,
    /// Lowest legal edge for the rest of the game.
    Fallback,
}

/// One game's worth of strategy state. Cheap to clone: the reduction
/// stack is shared.
#[derive(Debug, Clone)]
pub struct StrategySession {
    phase: Phase,
    seen: usize,
    isolated: Vec<usize>,
    stack: Vec<Arc<ReductionCertificate>>,
    inner: Option<Board>,
    episode: Option<Episode>,
    transcript: Vec<String>,
    audit: PolicyAudit,
    solver: Solver,
}

impl Default for StrategySession {
    fn default() -> Self {
        StrategySession::full()
    }
}

impl StrategySession {
    /// Strategy for the plain game, starting in phase one.
    pub fn full() -> Self {
        StrategySession {
            phase: Phase::One,
            seen: 0,
            isolated: Vec::new(),
            stack: Vec::new(),
            inner: None,
            episode: None,
            transcript: Vec::new(),
            audit: PolicyAudit::default(),
            solver: Solver::default(),
        }
    }

    /// Strategy for a leaf-excluded delayed game; the first position seen
    /// becomes the inner board.
    pub fn phase_two() -> Self {
        StrategySession {
            phase: Phase::Two,
            ..StrategySession::full()
        }
    }

    pub fn transcript(&self) -> &[String] {
        &self.transcript
    }

    pub fn violations(&self) -> &[String] {
        &self.audit.violations
    }

    pub fn certificates(&self) -> impl Iterator<Item = &ReductionCertificate> {
        self.stack.iter().map(|c| c.as_ref())
    }

    pub fn inner(&self) -> Option<&Board> {
        self.inner.as_ref()
    }

    fn violation(&mut self, msg: String) {
        if self.audit.violations.len() < 32 && !self.audit.violations.contains(&msg) {
            self.audit.violations.push(msg);
        }
    }

    fn push(&mut self, cert: ReductionCertificate, note: String) {
        self.audit.certificates_checked += 1;
        if let Err(v) = check_reduction(&cert) {
            self.violation(format!("{}: {v}", cert.rule));
        }
        self.transcript.push(format!("R {note} {}", cert.ledger));
        self.inner = Some(cert.target.clone());
        self.stack.push(Arc::new(cert));
    }

    /// Carries a real edge inward; `None` when it has no inner preimage.
    fn inward(&self, mut e: Edge) -> Option<Edge> {
        for cert in &self.stack {
            e = cert.preimage(e)?;
        }
        Some(e)
    }

    fn outward(&self, mut e: Edge) -> Edge {
        for cert in self.stack.iter().rev() {
            e = cert.f_e(e);
        }
        e
    }

    /// Chooses Isolator's move in `state`.
    pub fn next_move(&mut self, state: &PlayState) -> usize {
        let tree = state.tree().clone();
        let edge_of = |i: usize| {
            let (u, v) = tree.endpoints(i);
            Edge::new(u, v)
        };
        if self.phase == Phase::Two && self.inner.is_none() {
            self.inner = Some(Board::from_game(&state.position()));
            self.seen = state.toucher_moves().len();
        }
        for &t in &state.toucher_moves()[self.seen..] {
            let e = edge_of(t);
            self.transcript.push(format!("T {e}"));
            if self.phase != Phase::Two {
                continue;
            }
            match self.inward(e) {
                Some(ie) => {
                    let inner = self.inner.as_mut().expect("inner board in phase two");
                    if inner.is_free(ie) {
                        inner.claim(ie, Player::Toucher);
                    } else {
                        let msg = format!("Toucher edge {e} lands on claimed inner edge {ie}");
                        self.violation(msg);
                    }
                }
                None => self.transcript.push(format!("  pass {e}")),
            }
        }
        self.seen = state.toucher_moves().len();
        let chosen = match self.phase {
            Phase::One => self.phase_one_move(state),
            Phase::Two => self.phase_two_move(),
            Phase::Fallback => None,
        };
        let lowest = state.legal_mask().trailing_zeros() as usize;
        let mv = match chosen {
            Some(e) => match tree.edge_between(e.a(), e.b()) {
                Some(i) if state.legal_mask() & bit(i) != 0 => i,
                _ => {
                    self.violation(format!("mapped move {e} is not legal on the real board"));
                    self.phase = Phase::Fallback;
                    lowest
                }
            },
            None => {
                self.phase = Phase::Fallback;
                self.transcript.push(format!("I {} fallback", edge_of(lowest)));
                return lowest;
            }
        };
        if let Some(last) = self.transcript.last_mut() {
            if last.starts_with("I ?") {
                *last = last.replacen('?', &edge_of(mv).to_string(), 1);
            }
        }
        mv
    }

    fn phase_one_move(&mut self, state: &PlayState) -> Option<Edge> {
        match phase1_move(state) {
            PhaseOneMove::Claim(e) => {
                let before = state.classify().isolated;
                let fresh = match state.apply_move(e) {
                    Ok(next) => next.classify().isolated & !before,
                    Err(_) => 0,
                };
                if fresh.count_ones() != 1 {
                    self.violation(format!("phase-one claim isolated {} vertices", fresh.count_ones()));
                }
                self.isolated.push(fresh.trailing_zeros() as usize);
                self.transcript.push("I ? phase=1".to_string());
                let (u, v) = state.tree().endpoints(e);
                Some(Edge::new(u, v))
            }
            PhaseOneMove::PhaseEnd => {
                self.phase = Phase::Two;
                let outcome = PhaseOneTrace::from_state(state, self.isolated.clone()).and_then(|t| lemma3_reduce(&t));
                match outcome {
                    Ok(out) => {
                        self.transcript.push(format!("P phase end r={} rules={:?}", self.isolated.len(), out.case_counts));
                        for cert in out.chain {
                            let note = format!("cleanup {}", cert.rule);
                            self.push(cert, note);
                        }
                        self.phase_two_move()
                    }
                    Err(err) => {
                        self.violation(format!("phase transition: {err}"));
                        None
                    }
                }
            }
        }
    }

    fn phase_two_move(&mut self) -> Option<Edge> {
        loop {
            let inner = self.inner.clone().expect("inner board in phase two");
            if inner.free_edges().is_empty() {
                return None;
            }
            if let Some(mut ep) = self.episode.take() {
                if let Some(e) = ep.next(&inner) {
                    self.transcript.push(format!("I ? phase=2 case={} {}", ep.case, ep.annotation()));
                    self.episode = Some(ep);
                    return Some(self.claim_inner(e));
                }
                self.audit.episodes_checked += 1;
                match ep.finish(&inner) {
                    Ok((cert, sub)) => self.push(cert, format!("{} end {sub}", ep.case)),
                    Err(err) => {
                        self.violation(format!("{} episode: {err}", ep.case));
                        return None;
                    }
                }
                continue;
            }
            if inner.is_path() {
                return self.base_move(&inner);
            }
            if inner.n() <= 5 {
                return None;
            }
            let case = first_case(&inner);
            let step = match case {
                CaseId::L4C1 => cases::find_case1(&inner).map(|c| cases::reduce_case1(&inner, c)),
                CaseId::L4C2 => cases::find_case2(&inner).map(|c| cases::reduce_case2(&inner, c)),
                CaseId::L4C3 => cases::find_case3(&inner).map(|c| cases::reduce_case3(&inner, c)),
                CaseId::L4C4 => cases::find_case4(&inner).map(|c| cases::reduce_case4(&inner, c)),
                CaseId::L4C5 => {
                    let c5 = cases::find_case5(&inner).expect("case detected");
                    if c5.needs_rewire {
                        Some(cases::rewire_to_leaf(&inner, c5.path[0], c5.path[1], "5").map(|c| (c, "5.0".into())))
                    } else {
                        return Some(self.start_episode(case, c5.path, &inner));
                    }
                }
                CaseId::L4C6 => {
                    let path = cases::find_case6(&inner).expect("case detected");
                    return Some(self.start_episode(case, path, &inner));
                }
                CaseId::TerminalNoCase => {
                    match final_case_bound_board(&inner) {
                        Ok(FinalCase::Certified(_)) => {}
                        Ok(FinalCase::Inapplicable(c)) => self.violation(format!("terminal board matches {c}")),
                        Err(err) => self.violation(format!("terminal bound: {err}")),
                    }
                    return None;
                }
            };
            match step.expect("case detected") {
                Ok((cert, sub)) => {
                    if cert.ledger.big_d > 0 {
                        self.violation(format!("{case} {sub} has D={}", cert.ledger.big_d));
                    }
                    self.push(cert, format!("{case} {sub}"));
                }
                Err(err) => {
                    self.violation(format!("{case}: {err}"));
                    return None;
                }
            }
        }
    }

    fn start_episode(&mut self, case: CaseId, path: Vec<usize>, inner: &Board) -> Edge {
        let (ep, e) = Episode::start(case, path, inner);
        self.transcript.push(format!("I ? phase=2 case={case} {}", ep.annotation()));
        self.episode = Some(ep);
        self.claim_inner(e)
    }

    fn claim_inner(&mut self, e: Edge) -> Edge {
        self.inner.as_mut().expect("inner board").claim(e, Player::Isolator);
        self.outward(e)
    }

    /// Exact play on an inner path.
    fn base_move(&mut self, inner: &Board) -> Option<Edge> {
        if inner.free_edges().len() > self.solver.limit() {
            return None;
        }
        let dense = inner.to_dense(Player::Isolator);
        let best = self.solver.alpha(&dense.game).ok()?.best_move?;
        let e = dense.edge(best);
        self.transcript.push("I ? phase=2 base=path".to_string());
        Some(self.claim_inner(e))
    }
}

impl IsolatorPolicy for StrategySession {
    fn choose(&mut self, state: &PlayState) -> usize {
        self.next_move(state)
    }

    fn audit(&self) -> PolicyAudit {
        self.audit.clone()
    }
}
