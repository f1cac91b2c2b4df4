//! Exhaustive and sampled checks of the value bounds, with CSV and text reports.

use std::fmt::Write as _;
use std::io;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::enumeration::{EnumerationError, all_codes, all_trees, canonical_code, config_board, path, random_config, s_n, star, tree_from_code};
use crate::game::{DelayedGame, PlayState, Player, Tree};
use crate::reductions::score_bound;
use crate::solver::{best_response, SolveError, Solver};
use crate::strategy::StrategySession;

#[derive(Debug, thiserror::Error)]
pub enum VerifyError {
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Enumeration(#[from] EnumerationError),
}

/// `⌊(n + 3) / 5⌋`.
pub fn tree_bound(n: usize) -> i64 {
    (n as i64 + 3) / 5
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReportRow {
    pub label: String,
    pub n: usize,
    pub tree: String,
    pub value: Option<usize>,
    pub bound: i64,
    pub strategy: Option<usize>,
    pub pass: bool,
    pub note: String,
    #[serde(skip)]
    pub transcript: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerificationReport {
    pub suite: String,
    pub seed: Option<u64>,
    pub solver_limit: usize,
    pub wall_ms: u128,
    pub rows: Vec<ReportRow>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &ReportRow> {
        self.rows.iter().filter(|r| !r.pass)
    }

    pub fn write_csv<W: io::Write>(&self, out: W) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(out);
        for row in &self.rows {
            w.serialize(row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn pretty(&self) -> String {
        let mut s = String::new();
        let fail = self.failures().count();
        let _ = writeln!(
            s,
            "{}: {} rows, {} failed, limit {}, {} ms{}",
            self.suite,
            self.rows.len(),
            fail,
            self.solver_limit,
            self.wall_ms,
            self.seed.map(|x| format!(", seed {x}")).unwrap_or_default()
        );
        for r in &self.rows {
            let opt = |v: Option<usize>| v.map_or("-".to_string(), |x| x.to_string());
            let _ = writeln!(
                s,
                "{:<5} n={:<2} value={:<2} bound={:<2} strategy={:<2} {:<24} {}{}",
                if r.pass { "ok" } else { "FAIL" },
                r.n,
                opt(r.value),
                r.bound,
                opt(r.strategy),
                r.label,
                r.tree,
                if r.note.is_empty() { String::new() } else { format!("  [{}]", r.note) }
            );
            if !r.pass {
                for line in &r.transcript {
                    let _ = writeln!(s, "      {line}");
                }
            }
        }
        s
    }
}

/// Plays `moves` against a fresh session and returns the score and transcript.
pub fn replay(game: &DelayedGame, mut session: StrategySession, moves: &[usize]) -> (Option<usize>, Vec<String>) {
    let mut state = PlayState::new(game.clone());
    for &m in moves {
        if state.to_move() == Player::Isolator {
            let _ = session.next_move(&state);
        }
        match state.apply_move(m) {
            Ok(next) => state = next,
            Err(_) => return (None, session.transcript().to_vec()),
        }
    }
    (state.final_score().ok(), session.transcript().to_vec())
}

struct StrategyResult {
    score: usize,
    transcript: Vec<String>,
    violations: Vec<String>,
    episodes: usize,
}

fn run_strategy(game: &DelayedGame, session: StrategySession) -> Result<StrategyResult, SolveError> {
    let br = best_response(game, session.clone())?;
    let (_, transcript) = replay(game, session, &br.moves);
    Ok(StrategyResult {
        score: br.score,
        transcript,
        violations: br.audit.violations,
        episodes: br.audit.episodes_checked,
    })
}

/// Every tree on `3..=n_max` vertices against `⌊(n+3)/5⌋`; trees up to
/// `strategy_max` vertices also play the constructive strategy against a
/// best-response Toucher.
pub fn verify_theorem1(n_max: usize, strategy_max: usize) -> Result<VerificationReport, VerifyError> {
    let start = Instant::now();
    let solver = Solver::default();
    let mut items = Vec::new();
    for n in 3..=n_max {
        items.extend(all_codes(n)?);
    }
    let rows: Result<Vec<ReportRow>, VerifyError> = items
        .par_iter()
        .map(|code| {
            let tree = tree_from_code(code);
            let n = tree.n();
            let bound = tree_bound(n);
            let u = solver.u(&tree)?;
            let mut pass = u as i64 >= bound;
            let mut note = Vec::new();
            let (mut strategy, mut transcript) = (None, Vec::new());
            if n <= strategy_max {
                let r = run_strategy(&DelayedGame::plain(tree.clone()), StrategySession::full())?;
                pass &= r.score as i64 >= bound && r.violations.is_empty();
                note.extend(r.violations);
                strategy = Some(r.score);
                transcript = r.transcript;
            }
            Ok(ReportRow {
                label: code.to_string(),
                n,
                tree: tree.to_string(),
                value: Some(u),
                bound,
                strategy,
                pass,
                note: note.join("; "),
                transcript,
            })
        })
        .collect();
    Ok(VerificationReport {
        suite: "theorem".into(),
        seed: None,
        solver_limit: solver.limit(),
        wall_ms: start.elapsed().as_millis(),
        rows: rows?,
    })
}

fn family_row(label: &str, tree: &Tree, value: usize, expected: i64) -> ReportRow {
    ReportRow {
        label: label.into(),
        n: tree.n(),
        tree: tree.to_string(),
        value: Some(value),
        bound: expected,
        strategy: None,
        pass: value as i64 == expected,
        note: String::new(),
        transcript: Vec::new(),
    }
}

/// Exact values of paths, stars and `S_n`, plus the general envelope
/// `⌈(n+2)/8⌉ ≤ u ≤ ⌊(n−1)/2⌋` over every tree on `3..=envelope_max` vertices.
pub fn verify_families(n_max: usize, envelope_max: usize) -> Result<VerificationReport, VerifyError> {
    let start = Instant::now();
    let solver = Solver::default();
    let mut rows = Vec::new();
    for n in 3..=n_max {
        let p = path(n).expect("n >= 3");
        let up = solver.u(&p)?;
        rows.push(family_row(&format!("path {n}"), &p, up, tree_bound(n)));
        let s = star(n).expect("n >= 3");
        rows.push(family_row(&format!("star {n}"), &s, solver.u(&s)?, (n as i64 - 1) / 2));
        if n >= 4 {
            let t = s_n(n).expect("n >= 4");
            rows.push(family_row(&format!("S_n {n}"), &t, solver.u(&t)?, up as i64));
        }
    }
    let mut codes = Vec::new();
    for n in 3..=envelope_max {
        codes.extend(all_codes(n)?);
    }
    let env: Result<Vec<ReportRow>, VerifyError> = codes
        .par_iter()
        .map(|code| {
            let t = tree_from_code(code);
            let n = t.n() as i64;
            let u = solver.u(&t)? as i64;
            let (lo, hi) = ((n + 2 + 7) / 8, (n - 1) / 2);
            Ok(ReportRow {
                label: format!("envelope {code}"),
                n: t.n(),
                tree: t.to_string(),
                value: Some(u as usize),
                bound: lo,
                strategy: None,
                pass: lo <= u && u <= hi,
                note: format!("upper {hi}"),
                transcript: Vec::new(),
            })
        })
        .collect();
    rows.extend(env?);
    Ok(VerificationReport {
        suite: "families".into(),
        seed: None,
        solver_limit: solver.limit(),
        wall_ms: start.elapsed().as_millis(),
        rows,
    })
}

/// Seeded leaf-excluded positions with Isolator to move: the exact value and
/// the reduction-driven strategy must both reach the score bound.
pub fn verify_lemma4(n_max: usize, samples: usize, seed: u64) -> Result<VerificationReport, VerifyError> {
    let start = Instant::now();
    let solver = Solver::default();
    let n_max = n_max.clamp(3, crate::enumeration::MAX_ENUMERATION);
    let pools = (3..=n_max).map(all_trees).collect::<Result<Vec<_>, _>>()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let picks: Vec<(Tree, u64)> = (0..samples)
        .map(|_| {
            let pool = &pools[rng.gen_range(0..pools.len())];
            let tree = pool[rng.gen_range(0..pool.len())].clone();
            let k = rng.gen_range(0..tree.n());
            let c = random_config(&tree, k, rng.gen(), &[])?;
            Ok((tree, c))
        })
        .collect::<Result<_, EnumerationError>>()?;
    let rows: Result<Vec<ReportRow>, VerifyError> = picks
        .par_iter()
        .map(|(tree, c)| {
            let board = config_board(tree, *c);
            let bound = score_bound(&board).expect("leaf-excluded");
            let game = DelayedGame::with_leaves_excluded(tree.clone(), *c)
                .and_then(|g| DelayedGame::new(g.tree().clone(), *c, 0, g.excluded(), Player::Isolator))
                .map_err(SolveError::Game)?;
            let alpha = solver.alpha(&game)?.value;
            let r = run_strategy(&game, StrategySession::phase_two())?;
            let pass = alpha as i64 >= bound && r.score as i64 >= bound && r.violations.is_empty();
            let mut note = format!("episodes {}", r.episodes);
            for v in &r.violations {
                note += "; ";
                note += v;
            }
            Ok(ReportRow {
                label: format!("{} C={c:#x}", canonical_code(tree)),
                n: tree.n(),
                tree: game.to_string(),
                value: Some(alpha),
                bound,
                strategy: Some(r.score),
                pass,
                note,
                transcript: r.transcript,
            })
        })
        .collect();
    Ok(VerificationReport {
        suite: "lemma4".into(),
        seed: Some(seed),
        solver_limit: solver.limit(),
        wall_ms: start.elapsed().as_millis(),
        rows: rows?,
    })
}
