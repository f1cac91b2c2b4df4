//! Scripted Isolator sequences along a run of degree-2 vertices and the
//! reductions that close them.

use crate::board::{Board, Edge};
use crate::game::{bit, bits};
use crate::reductions::ReductionCertificate;

use super::cases::{CaseId, Rewrite};
use super::StrategyError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Episode {
    pub case: CaseId,
    /// `v0..vm`.
    pub path: Vec<usize>,
    /// Isolator holds `v_i v_{i+1} .. v_j v_{j+1}`.
    pub i: usize,
    pub j: usize,
    /// Position when the episode started; the ledger is measured from here.
    pub baseline: Board,
    pub claimed: Vec<Edge>,
}

impl Episode {
    /// Starts the episode and returns Isolator's first edge.
    pub fn start(case: CaseId, path: Vec<usize>, board: &Board) -> (Episode, Edge) {
        let m = path.len() - 1;
        let s = if case == CaseId::L4C5 && m >= 4 { 2 } else { 1 };
        let e = Edge::new(path[s], path[s + 1]);
        let ep = Episode {
            case,
            path,
            i: s,
            j: s,
            baseline: board.clone(),
            claimed: vec![e],
        };
        (ep, e)
    }

    pub fn m(&self) -> usize {
        self.path.len() - 1
    }

    fn edge(&self, k: usize) -> Edge {
        Edge::new(self.path[k], self.path[k + 1])
    }

    /// Next edge to claim, extending right first, or `None` when blocked.
    pub fn next(&mut self, board: &Board) -> Option<Edge> {
        if self.j + 1 < self.m() && board.is_free(self.edge(self.j + 1)) {
            self.j += 1;
            let e = self.edge(self.j);
            self.claimed.push(e);
            return Some(e);
        }
        if self.i >= 1 && board.is_free(self.edge(self.i - 1)) {
            self.i -= 1;
            let e = self.edge(self.i);
            self.claimed.push(e);
            return Some(e);
        }
        None
    }

    pub fn annotation(&self) -> String {
        format!("m={} i={} j={}", self.m(), self.i, self.j)
    }

    /// Builds the closing reduction from the current board; returns the
    /// certificate and the sub-case label.
    pub fn finish(&self, board: &Board) -> Result<(ReductionCertificate, String), StrategyError> {
        let d_count = self.claimed.len();
        let isolated = board.classify().isolated.count_ones() as usize;
        if isolated + 1 != d_count {
            return Err(StrategyError::Invariant(format!(
                "episode {} isolated {isolated} vertices with {d_count} edges",
                self.annotation()
            )));
        }
        let (cert, sub) = match self.case {
            CaseId::L4C5 => self.finish_case5(board)?,
            CaseId::L4C6 => self.finish_case6(board)?,
            other => return Err(StrategyError::Invariant(format!("episode for {other}"))),
        };
        let cert = cert.with_baseline(self.baseline.clone());
        let budget = 5 * (d_count as i64 - 1);
        if cert.ledger.big_d > budget {
            return Err(StrategyError::Invariant(format!(
                "episode {sub} has D={} above {budget}",
                cert.ledger.big_d
            )));
        }
        Ok((cert, sub))
    }

    fn degenerate(&self, board: &Board) -> StrategyError {
        StrategyError::Degenerate(format!("episode {} on {board}", self.annotation()))
    }

    /// Lowest neighbor of `v` other than `not`.
    fn other_neighbor(board: &Board, v: usize, not: usize) -> usize {
        (board.neighbors(v) & !bit(not)).trailing_zeros() as usize
    }

    fn finish_case5(&self, board: &Board) -> Result<(ReductionCertificate, String), StrategyError> {
        let p = &self.path;
        let m = self.m();
        let base = &self.baseline;
        let mut rw = Rewrite::new(board, "");
        let deg = |v: usize| base.degree(v);
        let del = |rw: &mut Rewrite, upto: usize| rw.delete_all(&p[..=upto]);
        let shift = |rw: &mut Rewrite, from: usize, to: usize, prev: usize| {
            let u1 = Self::other_neighbor(base, from, prev);
            rw.move_edge(Edge::new(from, u1), Edge::new(to, u1));
        };
        let sub = match m {
            2 => {
                del(&mut rw, 1);
                "5.1"
            }
            3 if base.touched() & bit(p[3]) != 0 => match deg(p[3]) {
                2 => {
                    let v4 = Self::other_neighbor(base, p[3], p[2]);
                    match deg(v4) {
                        2 => {
                            del(&mut rw, 3);
                            "5.2.1.1"
                        }
                        d if d >= 3 => {
                            del(&mut rw, 2);
                            shift(&mut rw, v4, p[3], p[3]);
                            "5.2.1.2"
                        }
                        _ => return Err(self.degenerate(board)),
                    }
                }
                d if d >= 3 => {
                    del(&mut rw, 2);
                    "5.2.2"
                }
                _ => return Err(self.degenerate(board)),
            },
            3 => {
                if board.in_d(Edge::new(p[2], p[3])) {
                    del(&mut rw, 2);
                    "5.3.1"
                } else {
                    del(&mut rw, 1);
                    shift(&mut rw, p[3], p[2], p[2]);
                    "5.3.2"
                }
            }
            _ => {
                let j = self.j;
                if j + 2 < m {
                    del(&mut rw, j + 1);
                    "5.4.1"
                } else if j + 2 == m {
                    match deg(p[m]) {
                        2 => {
                            del(&mut rw, m - 1);
                            "5.4.2"
                        }
                        d if d >= 3 => {
                            del(&mut rw, m - 2);
                            shift(&mut rw, p[m], p[m - 1], p[m - 1]);
                            "5.4.3"
                        }
                        _ => return Err(self.degenerate(board)),
                    }
                } else {
                    match deg(p[m]) {
                        d if d >= 3 => {
                            del(&mut rw, m - 1);
                            "5.4.4"
                        }
                        2 => {
                            let next = Self::other_neighbor(base, p[m], p[m - 1]);
                            match deg(next) {
                                2 => {
                                    del(&mut rw, m);
                                    "5.4.5.1"
                                }
                                d if d >= 3 => {
                                    del(&mut rw, m - 1);
                                    shift(&mut rw, next, p[m], p[m]);
                                    "5.4.5.2"
                                }
                                _ => return Err(self.degenerate(board)),
                            }
                        }
                        _ => return Err(self.degenerate(board)),
                    }
                }
            }
        };
        Ok((self.relabel(rw, sub), sub.to_string()))
    }

    fn finish_case6(&self, board: &Board) -> Result<(ReductionCertificate, String), StrategyError> {
        let m = self.m();
        let (i, j) = (self.i, self.j);
        let mut p = self.path.clone();
        let mut jj = j;
        let sub = match (i, j + 1 == m) {
            (0, true) => "6.1",
            (0, false) => "6.2",
            (1, true) => {
                p.reverse();
                jj = m - 2;
                "6.3"
            }
            (1, false) => "6.4",
            _ => return Err(self.degenerate(board)),
        };
        let mut rw = Rewrite::new(board, "");
        if sub == "6.1" {
            rw.delete_all(&p[1..m]);
            let t = rw.target();
            let a = lowest_leaf_in(t, p[0]).ok_or_else(|| self.degenerate(board))?;
            let b = lowest_leaf_in(t, p[m]).ok_or_else(|| self.degenerate(board))?;
            rw.add_toucher_edge(a, b);
        } else {
            rw.delete_all(&p[1..=jj + 1]);
            let a = if sub == "6.4" {
                p[0]
            } else {
                lowest_leaf_in(rw.target(), p[0]).ok_or_else(|| self.degenerate(board))?
            };
            rw.add_toucher_edge(a, p[jj + 2]);
        }
        Ok((self.relabel(rw, sub), sub.to_string()))
    }

    fn relabel(&self, mut rw: Rewrite, sub: &str) -> ReductionCertificate {
        rw.set_rule(format!("{sub} {}", self.annotation()));
        rw.finish()
    }
}

fn lowest_leaf_in(b: &Board, v: usize) -> Option<usize> {
    bits(b.reach(v, 0) & b.leaves()).next()
}
