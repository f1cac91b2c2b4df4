use std::collections::BTreeMap;

use toucher_core::board::{Board, Edge};
use toucher_core::enumeration::{all_trees, path, s_n, star};
use toucher_core::game::{classify, endpoint_pattern, GameError};
use toucher_core::reductions::{
    check_reduction, final_case_bound, forest_split, lemma2_bound_check, lemma5_check, score_bound, FinalCase,
    ReductionCertificate, Violation,
};
use toucher_core::solver::{best_response_score, IsolatorPolicy, PolicyAudit};
use toucher_core::strategy::cases::{self, CaseId};
use toucher_core::strategy::phase_one::random_phase_one;
use toucher_core::strategy::{first_case, lemma3_reduce, phase1_move, PhaseOneMove, PhaseOneTrace, StrategySession};
use toucher_core::{DelayedGame, PlayState, Player, Solver, Tree};

fn tree(n: usize, edges: &[(usize, usize)]) -> Tree {
    Tree::new(n, edges).unwrap()
}

fn mask(t: &Tree, edges: &[(usize, usize)]) -> u64 {
    edges.iter().fold(0, |m, &(u, v)| m | 1 << t.edge_between(u, v).unwrap())
}

fn set(vs: &[usize]) -> u64 {
    vs.iter().fold(0, |m, v| m | 1 << v)
}

fn board(s: &str) -> Board {
    s.parse().unwrap()
}

fn double_star() -> Tree {
    tree(6, &[(0, 1), (0, 2), (0, 3), (1, 4), (1, 5)])
}

#[test]
fn tree_construction() {
    let p3 = tree(3, &[(0, 1), (1, 2)]);
    assert_eq!(p3.leaves(), set(&[0, 2]));
    assert_eq!(star(4).unwrap().leaf_count(), 3);
    assert_eq!(Tree::new(4, &[(0, 1), (2, 3)]), Err(GameError::Disconnected));
    assert_eq!(Tree::new(3, &[(0, 1), (1, 2), (2, 0)]), Err(GameError::Cyclic(0, 2)));
    assert_eq!(Tree::new(2, &[(0, 0)]), Err(GameError::SelfLoop(0)));
    assert!(matches!(Tree::new(2, &[(0, 5)]), Err(GameError::OutOfRange { .. })));
}

#[test]
fn classification() {
    let p3 = path(3).unwrap();
    let g = DelayedGame::new(p3.clone(), mask(&p3, &[(0, 1)]), 0, 0, Player::Isolator).unwrap();
    let cls = classify(&g);
    assert_eq!((cls.occupied, cls.unoccupied, cls.isolated), (set(&[0, 1]), set(&[2]), 0));

    let g = DelayedGame::new(p3.clone(), 0, mask(&p3, &[(0, 1)]), 0, Player::Toucher).unwrap();
    let cls = classify(&g);
    assert_eq!((cls.isolated, cls.unoccupied), (set(&[0]), set(&[1, 2])));

    let k13 = star(4).unwrap();
    let g = DelayedGame::new(k13.clone(), mask(&k13, &[(0, 1)]), 0, set(&[2]), Player::Isolator).unwrap();
    let cls = classify(&g);
    assert_eq!((cls.occupied, cls.unoccupied, cls.excluded), (set(&[0, 1]), set(&[3]), set(&[2])));
}

#[test]
fn endpoint_patterns() {
    let p4 = path(4).unwrap();
    let e12 = p4.edge_between(1, 2).unwrap();
    let e23 = p4.edge_between(2, 3).unwrap();
    let plain = DelayedGame::plain(p4.clone());
    assert_eq!(endpoint_pattern(&plain, e12), Ok(1));
    let c01 = mask(&p4, &[(0, 1)]);
    let g = DelayedGame::new(p4.clone(), c01, 0, 0, Player::Isolator).unwrap();
    assert_eq!(endpoint_pattern(&g, e12), Ok(2));
    let g = DelayedGame::new(p4.clone(), c01, 0, set(&[3]), Player::Isolator).unwrap();
    assert_eq!(endpoint_pattern(&g, e23), Ok(2));
    let g = DelayedGame::new(p4, c01, 0, set(&[2]), Player::Isolator).unwrap();
    assert_eq!(endpoint_pattern(&g, e12), Ok(3));
}

#[test]
fn moves_and_scores() {
    let p3 = path(3).unwrap();
    let s = PlayState::new(DelayedGame::plain(p3.clone()));
    assert_eq!(s.legal_moves().len(), 2);
    let s = s.apply_pair(0, 1).unwrap();
    assert_eq!(s.to_move(), Player::Isolator);
    assert_eq!(s.legal_moves(), vec![p3.edge_between(1, 2).unwrap()]);
    assert!(matches!(s.apply_pair(0, 1), Err(GameError::Claimed(_))));
    let s = s.apply_pair(1, 2).unwrap();
    assert!(s.is_over());
    assert_eq!(s.final_score(), Ok(1));

    let k13 = star(4).unwrap();
    let s = PlayState::new(DelayedGame::plain(k13));
    let s = s.apply_pair(0, 1).unwrap().apply_pair(0, 3).unwrap().apply_pair(0, 2).unwrap();
    assert_eq!(s.final_score(), Ok(1));

    let all = DelayedGame::new(p3.clone(), p3.all_edges(), 0, 0, Player::Toucher).unwrap();
    assert_eq!(PlayState::new(all).final_score(), Ok(0));
}

#[test]
fn isolatable_edges() {
    let p4 = path(4).unwrap();
    let s = PlayState::new(DelayedGame::plain(p4.clone()));
    assert_eq!(s.isolatable_mask(), mask(&p4, &[(0, 1), (2, 3)]));
    let s = s.apply_pair(0, 1).unwrap();
    assert_eq!(s.isolatable_mask(), mask(&p4, &[(2, 3)]));
    let k13 = star(4).unwrap();
    assert_eq!(PlayState::new(DelayedGame::plain(k13.clone())).isolatable_mask(), k13.all_edges());
}

#[test]
fn exact_values() {
    let s = Solver::default();
    assert_eq!(s.u(&path(3).unwrap()), Ok(1));
    assert_eq!(s.u(&star(7).unwrap()), Ok(3));
    assert_eq!(s.u(&path(8).unwrap()), Ok(2));
    assert_eq!(s.u(&path(12).unwrap()), Ok(3));
    assert_eq!(s.u(&path(13).unwrap()), Ok(3));
    assert_eq!(s.u(&star(10).unwrap()), Ok(4));
    assert_eq!(s.u(&s_n(9).unwrap()), Ok(2));

    let p3 = path(3).unwrap();
    assert_eq!(s.optimal_move(&PlayState::new(DelayedGame::plain(p3.clone()))), Ok(0));
    assert_eq!(s.optimal_move(&PlayState::new(DelayedGame::plain(star(4).unwrap()))), Ok(0));
    let nothing_left = DelayedGame::new(p3, 1, 2, 0, Player::Toucher).unwrap();
    assert_eq!(s.alpha(&nothing_left).unwrap().value, 1);
}

#[derive(Clone)]
struct Lowest;

impl IsolatorPolicy for Lowest {
    fn choose(&mut self, state: &PlayState) -> usize {
        state.legal_mask().trailing_zeros() as usize
    }

    fn audit(&self) -> PolicyAudit {
        PolicyAudit::default()
    }
}

#[test]
fn best_response_scores() {
    assert_eq!(best_response_score(&star(6).unwrap(), Lowest), Ok(2));
    assert!(best_response_score(&path(10).unwrap(), StrategySession::full()).unwrap() >= 2);
    assert_eq!(best_response_score(&star(8).unwrap(), StrategySession::full()), Ok(3));
    assert_eq!(best_response_score(&path(3).unwrap(), StrategySession::full()), Ok(1));
}

#[test]
fn phase_one_moves() {
    let p5 = path(5).unwrap();
    let s = PlayState::new(DelayedGame::plain(p5.clone())).apply_pair(1, 2).unwrap();
    match phase1_move(&s) {
        PhaseOneMove::Claim(e) => assert!(p5.leaves() & (1 << p5.endpoints(e).0 | 1 << p5.endpoints(e).1) != 0),
        PhaseOneMove::PhaseEnd => panic!("pendant edge available"),
    }
    let p4 = path(4).unwrap();
    let s = PlayState::new(DelayedGame::plain(p4.clone())).apply_pair(1, 2).unwrap();
    assert_eq!(phase1_move(&s), PhaseOneMove::Claim(p4.edge_between(0, 1).unwrap()));
    let s = PlayState::new(DelayedGame::plain(p5.clone())).apply_pair(0, 1).unwrap();
    let s = s.apply_pair(3, 4).unwrap().apply_pair(2, 3).unwrap();
    assert_eq!(phase1_move(&s), PhaseOneMove::PhaseEnd);
}

#[test]
fn cleanup_chains() {
    // Toucher 0-1, Isolator isolates 4, Toucher 2-3: no isolatable edge remains
    let p5 = path(5).unwrap();
    let trace = PhaseOneTrace {
        tree: p5.clone(),
        r: 1,
        isolated: vec![4],
        c: mask(&p5, &[(0, 1), (2, 3)]),
        d: mask(&p5, &[(3, 4)]),
    };
    let out = lemma3_reduce(&trace).unwrap();
    assert!(out.case_counts[0] >= 1, "{:?}", out.case_counts);
    assert!(out.board.is_leaf_excluded());
    assert!(!out.board.contains(0) && !out.board.contains(4));
    for cert in &out.chain {
        assert_eq!(check_reduction(cert), Ok(()));
        assert!(lemma2_bound_check(cert, &Solver::default()).unwrap().holds);
    }
    assert!(out.final_check.0 >= out.final_check.1);

    let mut seen = [0usize; 3];
    for n in 3..=9 {
        for t in all_trees(n).unwrap() {
            for seed in 0..4 {
                if let Some(trace) = random_phase_one(&t, seed).unwrap() {
                    let out = lemma3_reduce(&trace).unwrap();
                    assert!(out.final_check.0 >= out.final_check.1, "{:?}", out.final_check);
                    for (s, c) in seen.iter_mut().zip(out.case_counts) {
                        *s += c;
                    }
                }
            }
        }
    }
    assert!(seen.iter().all(|&c| c > 0), "{seen:?}");
}

#[test]
fn case_dispatch() {
    let b = board("V:{0,1,2,3,4,5,6} E:{0-1,1-2,2-3,3-4,2-5,5-6} C:{1-2,2-3} D:{} X:{0,4,6}");
    assert!(cases::case_applies(&b, CaseId::L4C1) || first_case(&b) != CaseId::TerminalNoCase);
    let c1 = board("V:{0,1,2,3,4,5,6,7} E:{0-1,1-2,2-3,3-4,4-5,4-6,6-7} C:{1-2,3-4} D:{} X:{0,5,7}");
    assert_eq!(first_case(&c1), CaseId::L4C1);
    let p6 = config_free_board(&path(6).unwrap());
    assert_eq!(first_case(&p6), CaseId::L4C5);
}

fn config_free_board(t: &Tree) -> Board {
    toucher_core::enumeration::config_board(t, 0)
}

#[test]
fn certificate_checks() {
    let p6 = config_free_board(&path(6).unwrap());
    let id = ReductionCertificate::identity(&p6);
    assert_eq!(check_reduction(&id), Ok(()));
    let r = lemma2_bound_check(&id, &Solver::default()).unwrap();
    assert!(r.holds && r.source_value == r.target_value && r.isolated == 0);

    let src = board("V:{0,1,2,3,4} E:{0-1,1-2,2-3,3-4} C:{0-1} D:{} X:{4}");
    let mut map = BTreeMap::new();
    map.insert(Edge::new(1, 2), Edge::new(2, 3));
    map.insert(Edge::new(2, 3), Edge::new(1, 2));
    let bad = ReductionCertificate::new("swap", src.clone(), src, map);
    assert!(matches!(check_reduction(&bad), Err(Violation::PatternMismatch { .. })), "{:?}", check_reduction(&bad));
}

#[test]
fn case4_contraction_holds() {
    let b = board("V:{0,1,2,3,4,5,6,7,8} E:{0-1,0-5,1-2,2-3,2-4,5-6,6-7,6-8} C:{0-1,0-5} D:{} X:{3,4,7,8}");
    assert_eq!(first_case(&b), CaseId::L4C4);
    let (case, cert, _) = cases::reduce_once(&b).unwrap().unwrap();
    assert_eq!(case, CaseId::L4C4);
    assert_eq!(check_reduction(&cert), Ok(()));
    assert!(cert.ledger.big_d <= 0);
    assert!(lemma2_bound_check(&cert, &Solver::default()).unwrap().holds);
}

#[test]
fn score_bounds() {
    let p8 = config_free_board(&path(8).unwrap());
    assert_eq!(score_bound(&p8), Ok(1));
    let p8t = path(8).unwrap();
    let one = toucher_core::enumeration::config_board(&p8t, mask(&p8t, &[(3, 4)]));
    assert_eq!(score_bound(&one), Ok(1));
    assert_eq!(score_bound(&config_free_board(&star(6).unwrap())), Ok(-1));
    assert_eq!(score_bound(&config_free_board(&path(7).unwrap())), Ok(1));
}

#[test]
fn leaf_count_bound() {
    let r = lemma5_check(&star(4).unwrap());
    assert!(r.hypothesis && r.conclusion_holds);
    assert!(!lemma5_check(&path(5).unwrap()).hypothesis);
    let r = lemma5_check(&double_star());
    assert!(r.hypothesis && r.conclusion_holds);
}

#[test]
fn forest_splits() {
    let split = forest_split(&star(5).unwrap(), &[]).unwrap();
    assert_eq!((split.component_count(), split.sum_d()), (1, 0));

    // centers of degree 3 and 4 joined by the claimed edge, legs of length 3
    let t: Tree = "17; 0-1, 0-2, 2-3, 3-4, 0-5, 5-6, 6-7, 1-8, 8-9, 9-10, 1-11, 11-12, 12-13, 1-14, 14-15, 15-16"
        .parse()
        .unwrap();
    let split = forest_split(&t, &[(0, 1)]).unwrap();
    assert_eq!(split.per_edge, vec![(0, 1, 5)]);
    assert_eq!(split.component_count(), 5);
    let leaves: usize = split.components.iter().map(|c| c.leaves).sum();
    assert_eq!(leaves, t.leaf_count() + 5);
}

#[test]
fn terminal_bounds() {
    assert!(matches!(final_case_bound(&path(6).unwrap(), &[]), Ok(FinalCase::Inapplicable(CaseId::L4C5))));
    let ds = double_star();
    match final_case_bound(&ds, &[(0, 1)]).unwrap() {
        FinalCase::Certified(fb) => assert!(fb.score_bound <= 0),
        FinalCase::Inapplicable(c) => assert!(c.number().is_some()),
    }
}
