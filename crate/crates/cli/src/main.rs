use std::fs;
use std::io::{self, BufRead, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use toucher_core::board::{Board, Edge};
use toucher_core::enumeration::{all_trees, canonical_code};
use toucher_core::game::{bits, parse_tree_text};
use toucher_core::reductions::{final_case_bound_board, FinalCase};
use toucher_core::strategy::cases::{self, CaseId};
use toucher_core::strategy::{phase2_case, StrategySession};
use toucher_core::verify::{verify_families, verify_lemma4, verify_theorem1, VerificationReport};
use toucher_core::{DelayedGame, PlayState, Player, Solver, Tree};

#[derive(Parser)]
#[command(name = "toucher", version, about = "Exact values and an explicit Isolator strategy for the Toucher-Isolator game on trees")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact value of a tree or delayed position, with a principal line.
    Solve {
        /// Tree as `n; u-v, ...` or a file holding one.
        #[arg(long, conflicts_with = "position", required_unless_present = "position")]
        tree: Option<String>,
        /// Delayed position `tree C:{..} D:{..} X:{..} s:T|I`, inline or file.
        #[arg(long)]
        position: Option<String>,
        #[arg(long, default_value_t = toucher_core::solver::DEFAULT_LIMIT)]
        limit: usize,
    },
    /// Checks the lower bound on every tree, and the strategy on small ones.
    Verify {
        #[arg(long, default_value_t = 12)]
        n_max: usize,
        #[arg(long, default_value_t = 10)]
        strategy_max: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact values for paths, stars and S_n, and the general envelope.
    Families {
        #[arg(long, default_value_t = 12)]
        n_max: usize,
        #[arg(long, default_value_t = 11)]
        envelope_max: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sampled delayed positions against the score bound.
    Lemma4 {
        #[arg(long, default_value_t = 10)]
        n_max: usize,
        #[arg(long, default_value_t = 500)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Lists one tree per isomorphism class.
    Enumerate {
        #[arg(long)]
        n: usize,
    },
    /// Shows the case dispatch and reduction chain for a position.
    Reduce {
        #[arg(long)]
        position: String,
    },
    /// Turn-based play against the engine; moves are typed as `u-v`.
    Play {
        #[arg(long)]
        tree: String,
        #[arg(long = "as", value_enum)]
        side: Side,
        #[arg(long, value_enum, default_value_t = Opponent::Strategy)]
        opponent: Opponent,
        /// Read moves from a file instead of standard input.
        #[arg(long)]
        script: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Side {
    Toucher,
    Isolator,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Opponent {
    Strategy,
    Optimal,
}

fn read_arg(arg: &str) -> Result<String> {
    let p = Path::new(arg);
    if p.is_file() {
        fs::read_to_string(p).with_context(|| format!("reading {arg}"))
    } else {
        Ok(arg.to_string())
    }
}

fn load_tree(arg: &str) -> Result<Tree> {
    Ok(parse_tree_text(&read_arg(arg)?)?)
}

fn load_position(arg: &str) -> Result<DelayedGame> {
    let text = read_arg(arg)?;
    let line = text
        .lines()
        .map(str::trim)
        .find(|l| !l.is_empty() && !l.starts_with('#'))
        .context("no position record found")?;
    Ok(line.parse()?)
}

fn edge_name(tree: &Tree, e: usize) -> String {
    let (u, v) = tree.endpoints(e);
    format!("{u}-{v}")
}

fn solve(game: &DelayedGame, limit: usize) -> Result<()> {
    let solver = Solver::new(limit);
    let value = solver.alpha(game)?.value;
    let line = solver.principal_line(game)?;
    let mut player = game.to_move();
    let moves: Vec<String> = line
        .iter()
        .map(|&e| {
            let s = format!("{} {}", player.letter(), edge_name(game.tree(), e));
            player = player.other();
            s
        })
        .collect();
    println!("u = {value}");
    println!("line: {}", if moves.is_empty() { "-".to_string() } else { moves.join(", ") });
    Ok(())
}

fn finish_report(report: &VerificationReport, out: Option<&Path>) -> Result<ExitCode> {
    print!("{}", report.pretty());
    if let Some(path) = out {
        let file = fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
        report.write_csv(file)?;
    }
    Ok(if report.passed() { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

fn reduce(game: &DelayedGame) -> Result<()> {
    let mut board = Board::from_game(game);
    if !board.is_leaf_excluded() {
        bail!("reduce expects every leaf excluded and no Isolator edges");
    }
    let mut step = 0;
    loop {
        println!("board {board}");
        if board.is_path() {
            let value = Solver::default().alpha(&board.to_dense(Player::Isolator).game)?.value;
            println!("path: solved exactly, value {value}");
            return Ok(());
        }
        let case = phase2_case(&board)?;
        println!("case {case}");
        match case {
            CaseId::L4C5 => {
                let c5 = cases::find_case5(&board).expect("detected");
                println!("path {:?}{}", c5.path, if c5.needs_rewire { " (end rewired to a leaf first)" } else { "" });
                return Ok(());
            }
            CaseId::L4C6 => {
                println!("path {:?}", cases::find_case6(&board).expect("detected"));
                return Ok(());
            }
            CaseId::TerminalNoCase => {
                match final_case_bound_board(&board)? {
                    FinalCase::Certified(fb) => println!(
                        "terminal: components {} sum_d {} excess {} S = {}",
                        fb.split.component_count(),
                        fb.sum_d,
                        fb.excess,
                        fb.score_bound
                    ),
                    FinalCase::Inapplicable(c) => println!("terminal check found {c}"),
                }
                return Ok(());
            }
            _ => {}
        }
        let (_, cert, sub) = cases::reduce_once(&board)?.expect("case 1-4 applies");
        step += 1;
        println!("step {step} sub-case {sub}");
        for line in cert.to_text().lines() {
            println!("  {line}");
        }
        match toucher_core::reductions::check_reduction(&cert) {
            Ok(()) => println!("  check ok"),
            Err(v) => println!("  check FAILED: {v}"),
        }
        board = cert.target;
    }
}

fn describe(state: &PlayState) -> String {
    let cls = state.classify();
    let set = |m: u64| {
        let items: Vec<String> = bits(m).map(|v| v.to_string()).collect();
        format!("{{{}}}", items.join(","))
    };
    format!(
        "isolated {} touched {} unoccupied {}",
        state.current_isolated(),
        set(cls.touched()),
        set(cls.unoccupied)
    )
}

enum Engine {
    Strategy(Box<StrategySession>),
    Optimal(Solver),
}

impl Engine {
    fn choose(&mut self, state: &PlayState) -> Result<usize> {
        match self {
            Engine::Strategy(s) => Ok(s.next_move(state)),
            Engine::Optimal(solver) => Ok(solver.optimal_move(state)?),
        }
    }
}

fn play(tree: Tree, side: Side, opponent: Opponent, input: Box<dyn BufRead>, out: &mut dyn Write) -> Result<()> {
    let solver = Solver::default();
    let mut engine = match opponent {
        Opponent::Strategy if side == Side::Isolator => {
            bail!("the strategy engine plays Isolator only; use --opponent optimal")
        }
        Opponent::Strategy => Engine::Strategy(Box::default()),
        Opponent::Optimal if tree.edge_count() > solver.limit() => {
            bail!("tree has more than {} edges; use --opponent strategy", solver.limit())
        }
        Opponent::Optimal => Engine::Optimal(solver),
    };
    let human = match side {
        Side::Toucher => Player::Toucher,
        Side::Isolator => Player::Isolator,
    };
    let mut state = PlayState::new(DelayedGame::plain(tree.clone()));
    writeln!(out, "tree {tree}")?;
    let mut lines = input.lines();
    while !state.is_over() {
        if state.to_move() != human {
            let e = engine.choose(&state)?;
            state = state.apply_move(e)?;
            writeln!(out, "{} claims {}", human.other(), edge_name(&tree, e))?;
            writeln!(out, "  {}", describe(&state))?;
            continue;
        }
        writeln!(out, "{human} to move")?;
        let Some(line) = lines.next() else {
            writeln!(out, "input ended")?;
            return Ok(());
        };
        let line = line?;
        let text = line.trim();
        if text.is_empty() || text.starts_with('#') {
            continue;
        }
        if text == "quit" {
            writeln!(out, "quit")?;
            return Ok(());
        }
        let parsed = text.parse::<Edge>().ok().and_then(|e| tree.edge_between(e.a(), e.b()));
        match parsed.map(|e| state.apply_move(e)) {
            Some(Ok(next)) => {
                state = next;
                writeln!(out, "{human} claims {text}")?;
                writeln!(out, "  {}", describe(&state))?;
            }
            Some(Err(err)) => writeln!(out, "error: {err}")?,
            None => writeln!(out, "error: {text:?} is not an edge of the tree")?,
        }
    }
    writeln!(out, "final isolated = {}", state.final_score()?)?;
    Ok(())
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Solve { tree, position, limit } => {
            let game = match (tree, position) {
                (Some(t), _) => DelayedGame::plain(load_tree(&t)?),
                (None, Some(p)) => load_position(&p)?,
                (None, None) => bail!("give --tree or --position"),
            };
            solve(&game, limit)?;
        }
        Command::Verify { n_max, strategy_max, out } => {
            return finish_report(&verify_theorem1(n_max, strategy_max)?, out.as_deref());
        }
        Command::Families { n_max, envelope_max, out } => {
            return finish_report(&verify_families(n_max, envelope_max)?, out.as_deref());
        }
        Command::Lemma4 { n_max, samples, seed, out } => {
            return finish_report(&verify_lemma4(n_max, samples, seed)?, out.as_deref());
        }
        Command::Enumerate { n } => {
            for t in all_trees(n)? {
                println!("{}  # {}", t, canonical_code(&t));
            }
        }
        Command::Reduce { position } => reduce(&load_position(&position)?)?,
        Command::Play {
            tree,
            side,
            opponent,
            script,
        } => {
            let tree = load_tree(&tree)?;
            let input: Box<dyn BufRead> = match script {
                Some(p) => Box::new(io::BufReader::new(
                    fs::File::open(&p).with_context(|| format!("opening {}", p.display()))?,
                )),
                None => Box::new(io::stdin().lock()),
            };
            let stdout = io::stdout();
            play(tree, side, opponent, input, &mut stdout.lock())?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}
