//! The Swing Lattice Game as a deterministic fold over [`GameEvent`]s.
//!
//! The board `L` is a good slim diagram. The player may add one eye to a cell
//! of `L`, giving the displayed diagram `L′`. A monkey walks over the edges of
//! `L′` along cell-perspectivities, swings and tilts, never stepping straight
//! back. Time only advances through `Tick` events, so every rule that depends
//! on the clock is replayable.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::builder::{self, BuildError, GoodnessCriteria};
use crate::diagram::{Diagram, DiagramError, DiagramJson, ElementId, FourCell, PrimeInterval};
use crate::swing::{RelationKind, SequenceVariant, Step, StepGraph};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GameConfig {
    pub board_length: usize,
    pub initial_lives: u32,
    pub start_choice_ms: u64,
    pub bonus_window_moves: u32,
    pub candidate_window_moves: u32,
    pub adventure_window_moves: u32,
    pub bonus_reward_lives: u32,
    pub adventure_reward_lives: u32,
    pub initial_move_period_ms: u64,
    pub speedup_factor_per_move: f64,
    pub min_move_period_ms: u64,
    pub bonus_spawn_probability: f64,
    pub candidate_spawn_probability: f64,
    /// Whether losing a life to a failed adventure also replaces the board.
    pub replace_board_on_adventure_failure: bool,
    pub rng_seed: u64,
}

impl Default for GameConfig {
    fn default() -> Self {
        GameConfig {
            board_length: 6,
            initial_lives: 3,
            start_choice_ms: 3000,
            bonus_window_moves: 10,
            candidate_window_moves: 3,
            adventure_window_moves: 20,
            bonus_reward_lives: 1,
            adventure_reward_lives: 2,
            initial_move_period_ms: 1000,
            speedup_factor_per_move: 0.995,
            min_move_period_ms: 250,
            bonus_spawn_probability: 0.05,
            candidate_spawn_probability: 0.05,
            replace_board_on_adventure_failure: true,
            rng_seed: 0,
        }
    }
}

impl GameConfig {
    pub fn with_seed(seed: u64) -> Self {
        GameConfig {
            rng_seed: seed,
            ..GameConfig::default()
        }
    }

    pub fn validate(&self) -> Result<(), GameError> {
        let bad = |m: &str| Err(GameError::InvalidConfig(m.to_string()));
        if self.board_length < 3 {
            return bad("board_length must be at least 3");
        }
        if self.initial_lives == 0 {
            return bad("initial_lives must be positive");
        }
        if self.start_choice_ms == 0 || self.initial_move_period_ms == 0 || self.min_move_period_ms == 0 {
            return bad("periods must be positive");
        }
        if self.bonus_window_moves == 0 || self.candidate_window_moves == 0 || self.adventure_window_moves == 0 {
            return bad("windows must be positive");
        }
        if !(self.speedup_factor_per_move > 0.0 && self.speedup_factor_per_move <= 1.0) {
            return bad("speedup_factor_per_move must lie in (0, 1]");
        }
        for p in [self.bonus_spawn_probability, self.candidate_spawn_probability] {
            if !(0.0..=1.0).contains(&p) {
                return bad("spawn probabilities must lie in [0, 1]");
            }
        }
        Ok(())
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GameError {
    #[error("invalid game config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Build(#[from] BuildError),
    #[error(transparent)]
    Diagram(#[from] DiagramError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    ChoosingStart,
    Running,
    GameOver,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureKind {
    Bonus,
    Candidate,
    Adventure,
}

impl FeatureKind {
    pub fn color(self) -> &'static str {
        match self {
            FeatureKind::Bonus => "grey",
            FeatureKind::Candidate => "blue",
            FeatureKind::Adventure => "purple",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Feature {
    pub cell: FourCell,
    pub moves_left: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum GameEvent {
    ClickCell { cell: FourCell },
    ChooseStartEdge { edge: PrimeInterval },
    Tick { ms: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LifeCause {
    Bonus,
    Adventure,
    AdventureFailed,
    Stuck,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Chooser {
    Player,
    Timer,
}

/// A notification produced by the engine. Every change of lives, board, eye
/// or features is reported by exactly one effect.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "effect", rename_all = "snake_case")]
pub enum Effect {
    StartChosen { edge: PrimeInterval, by: Chooser },
    Moved { from: PrimeInterval, to: PrimeInterval, kind: RelationKind },
    EyeChanged { cell: FourCell, element: ElementId },
    EyePending { cell: FourCell },
    EyeUnchanged { cell: FourCell },
    FeatureSpawned { feature: FeatureKind, cell: FourCell, moves_left: u32 },
    CandidateAccepted { cell: FourCell, moves_left: u32 },
    FeatureResolved { feature: FeatureKind, cell: FourCell },
    FeatureExpired { feature: FeatureKind, cell: FourCell },
    /// The feature's cell vanished because the eye moved.
    FeatureCleared { feature: FeatureKind, cell: FourCell },
    LifeGained { cause: LifeCause, amount: u32, lives: u32 },
    LifeLost { cause: LifeCause, lives: u32 },
    BoardReplaced { size: usize, edges: usize },
    GameOver,
    /// Written by the simulator when it starts a game.
    GameStarted { game: u32, seed: u64 },
    Rejected { reason: String },
}

/// One line of the effect log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EffectRecord {
    #[serde(rename = "move")]
    pub move_count: u64,
    #[serde(flatten)]
    pub effect: Effect,
}

#[derive(Debug, Clone)]
pub struct GameState {
    config: GameConfig,
    rng: ChaCha8Rng,
    base: Diagram,
    board: Diagram,
    cells: Vec<FourCell>,
    eye_cell: Option<FourCell>,
    eye_element: Option<ElementId>,
    pending_eye_cell: Option<FourCell>,
    monkey_current: Option<PrimeInterval>,
    monkey_previous: Option<PrimeInterval>,
    phase: Phase,
    lives: u32,
    move_count: u64,
    move_period_ms: u64,
    bonus: Option<Feature>,
    candidate: Option<Feature>,
    adventure: Option<Feature>,
    clock_ms: u64,
    phase_started_ms: u64,
    next_move_ms: u64,
    boards: u32,
    seq: u64,
}

pub fn new_game(config: GameConfig) -> Result<GameState, GameError> {
    GameState::new(config)
}

/// Pure form of [`GameState::handle_event`].
pub fn handle_event(state: &GameState, event: &GameEvent) -> (GameState, Vec<Effect>) {
    let mut next = state.clone();
    let effects = next.handle_event(event);
    (next, effects)
}

impl GameState {
    pub fn new(config: GameConfig) -> Result<Self, GameError> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
        let base = random_board(&config, &mut rng)?;
        Self::assemble(config, rng, base)
    }

    /// A game on a given board, for tests and fixtures. The board is not
    /// required to be good; later boards are generated as usual.
    pub fn with_board(config: GameConfig, board: Diagram) -> Result<Self, GameError> {
        config.validate()?;
        let rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
        Self::assemble(config, rng, board)
    }

    fn assemble(config: GameConfig, rng: ChaCha8Rng, base: Diagram) -> Result<Self, GameError> {
        let cells = base.enumerate_cells()?;
        Ok(GameState {
            lives: config.initial_lives,
            move_period_ms: config.initial_move_period_ms,
            config,
            rng,
            board: base.clone(),
            base,
            cells,
            eye_cell: None,
            eye_element: None,
            pending_eye_cell: None,
            monkey_current: None,
            monkey_previous: None,
            phase: Phase::ChoosingStart,
            move_count: 0,
            bonus: None,
            candidate: None,
            adventure: None,
            clock_ms: 0,
            phase_started_ms: 0,
            next_move_ms: 0,
            boards: 1,
            seq: 0,
        })
    }

    pub fn config(&self) -> &GameConfig {
        &self.config
    }
    pub fn base(&self) -> &Diagram {
        &self.base
    }
    /// The displayed diagram `L′`.
    pub fn board(&self) -> &Diagram {
        &self.board
    }
    pub fn cells(&self) -> &[FourCell] {
        &self.cells
    }
    pub fn phase(&self) -> Phase {
        self.phase
    }
    pub fn lives(&self) -> u32 {
        self.lives
    }
    pub fn move_count(&self) -> u64 {
        self.move_count
    }
    pub fn move_period_ms(&self) -> u64 {
        self.move_period_ms
    }
    pub fn clock_ms(&self) -> u64 {
        self.clock_ms
    }
    pub fn seq(&self) -> u64 {
        self.seq
    }
    pub fn eye_cell(&self) -> Option<FourCell> {
        self.eye_cell
    }
    pub fn eye_element(&self) -> Option<ElementId> {
        self.eye_element
    }
    pub fn pending_eye_cell(&self) -> Option<FourCell> {
        self.pending_eye_cell
    }
    pub fn monkey_current(&self) -> Option<PrimeInterval> {
        self.monkey_current
    }
    pub fn monkey_previous(&self) -> Option<PrimeInterval> {
        self.monkey_previous
    }
    pub fn feature(&self, kind: FeatureKind) -> Option<Feature> {
        match kind {
            FeatureKind::Bonus => self.bonus,
            FeatureKind::Candidate => self.candidate,
            FeatureKind::Adventure => self.adventure,
        }
    }

    /// Clock value at which the next timed rule fires, if any.
    pub fn next_deadline_ms(&self) -> Option<u64> {
        match self.phase {
            Phase::ChoosingStart => Some(self.phase_started_ms + self.config.start_choice_ms),
            Phase::Running => Some(self.next_move_ms),
            Phase::GameOver => None,
        }
    }

    /// An edge of `L′` that is not an edge of `L`.
    pub fn is_new_edge(&self, e: PrimeInterval) -> bool {
        self.eye_element.is_some_and(|x| e.lower == x || e.upper == x)
    }

    /// Steps available to the monkey: SL-steps in `L′` except straight back.
    pub fn legal_steps(&self) -> Vec<Step> {
        let Some(current) = self.monkey_current else {
            return Vec::new();
        };
        let graph = StepGraph::new(&self.board).expect("board cells were enumerated");
        let mut out: Vec<Step> = Vec::new();
        for (_, step) in graph.moves(current, SequenceVariant::Sl).expect("monkey on an edge") {
            if Some(step.target) != self.monkey_previous && !out.iter().any(|s| s.target == step.target) {
                out.push(*step);
            }
        }
        out
    }

    pub fn legal_moves(&self) -> Vec<PrimeInterval> {
        self.legal_steps().into_iter().map(|s| s.target).collect()
    }

    pub fn handle_event(&mut self, event: &GameEvent) -> Vec<Effect> {
        self.seq += 1;
        let mut fx = Vec::new();
        match *event {
            GameEvent::Tick { ms } => self.tick(ms, &mut fx),
            GameEvent::ChooseStartEdge { edge } => self.choose_start(edge, &mut fx),
            GameEvent::ClickCell { cell } => self.click_cell(cell, &mut fx),
        }
        fx
    }

    fn reject(fx: &mut Vec<Effect>, reason: impl Into<String>) {
        fx.push(Effect::Rejected {
            reason: reason.into(),
        });
    }

    fn tick(&mut self, ms: u64, fx: &mut Vec<Effect>) {
        self.clock_ms += ms;
        loop {
            match self.phase {
                Phase::GameOver => return,
                Phase::ChoosingStart => {
                    if self.clock_ms < self.phase_started_ms + self.config.start_choice_ms {
                        return;
                    }
                    let edges = self.base.edges();
                    let edge = edges[self.rng.gen_range(0..edges.len())];
                    self.start(edge, Chooser::Timer, fx);
                }
                Phase::Running => {
                    if self.clock_ms < self.next_move_ms {
                        return;
                    }
                    self.next_move_ms += self.move_period_ms;
                    self.step_monkey(fx);
                }
            }
        }
    }

    fn choose_start(&mut self, edge: PrimeInterval, fx: &mut Vec<Effect>) {
        if self.phase != Phase::ChoosingStart {
            return Self::reject(fx, "start edge can only be chosen while choosing the start");
        }
        if !self.base.is_edge(edge) {
            return Self::reject(fx, format!("{edge} is not an edge of the board"));
        }
        self.start(edge, Chooser::Player, fx);
    }

    fn start(&mut self, edge: PrimeInterval, by: Chooser, fx: &mut Vec<Effect>) {
        self.monkey_current = Some(edge);
        self.monkey_previous = None;
        self.phase = Phase::Running;
        self.next_move_ms = self.clock_ms + self.move_period_ms;
        fx.push(Effect::StartChosen { edge, by });
    }

    fn click_cell(&mut self, cell: FourCell, fx: &mut Vec<Effect>) {
        if self.phase == Phase::GameOver {
            return Self::reject(fx, "the game is over");
        }
        if let Some(c) = self.candidate {
            if c.cell == cell {
                self.candidate = None;
                let moves_left = self.config.adventure_window_moves;
                self.adventure = Some(Feature { cell, moves_left });
                fx.push(Effect::CandidateAccepted { cell, moves_left });
                return;
            }
        }
        // Map the clicked cell of L′ (or of L) to a cell of L.
        let target = match self.eye_element {
            Some(eye) if cell.elements().contains(&eye) && self.cells.contains(&cell) => {
                self.eye_cell.expect("eye cell set with eye element")
            }
            _ if self.base.is_cell(cell) => cell,
            _ => return Self::reject(fx, format!("{cell} is not a cell of the board")),
        };
        if self.monkey_current.is_some_and(|e| self.is_new_edge(e)) {
            self.pending_eye_cell = Some(target);
            fx.push(Effect::EyePending { cell: target });
        } else {
            self.pending_eye_cell = None;
            self.place_eye(target, fx);
        }
    }

    fn place_eye(&mut self, target: FourCell, fx: &mut Vec<Effect>) {
        if self.eye_cell == Some(target) {
            fx.push(Effect::EyeUnchanged { cell: target });
            return;
        }
        let (board, element) = builder::add_eye(&self.base, target).expect("target is a cell of L");
        if self.monkey_previous.is_some_and(|e| self.is_new_edge(e)) {
            // That edge no longer exists, so there is nothing to step back to.
            self.monkey_previous = None;
        }
        self.cells = board.enumerate_cells().expect("L′ is planar semimodular");
        self.board = board;
        self.eye_cell = Some(target);
        self.eye_element = Some(element);
        fx.push(Effect::EyeChanged { cell: target, element });
        for kind in [FeatureKind::Bonus, FeatureKind::Candidate, FeatureKind::Adventure] {
            let slot = self.slot(kind);
            if let Some(f) = *slot {
                if !self.cells.contains(&f.cell) {
                    *self.slot(kind) = None;
                    fx.push(Effect::FeatureCleared { feature: kind, cell: f.cell });
                }
            }
        }
    }

    fn slot(&mut self, kind: FeatureKind) -> &mut Option<Feature> {
        match kind {
            FeatureKind::Bonus => &mut self.bonus,
            FeatureKind::Candidate => &mut self.candidate,
            FeatureKind::Adventure => &mut self.adventure,
        }
    }

    /// One monkey move (or a lost life when stuck), followed by the feature
    /// bookkeeping for that move.
    pub fn step_monkey(&mut self, fx: &mut Vec<Effect>) {
        if self.phase != Phase::Running {
            return;
        }
        let steps = self.legal_steps();
        if steps.is_empty() {
            self.lose_life(LifeCause::Stuck, true, fx);
            return;
        }
        let step = steps[self.rng.gen_range(0..steps.len())];
        let from = self.monkey_current.expect("running monkey has an edge");
        self.monkey_previous = Some(from);
        self.monkey_current = Some(step.target);
        self.move_count += 1;
        self.move_period_ms = ((self.move_period_ms as f64 * self.config.speedup_factor_per_move).floor() as u64)
            .max(self.config.min_move_period_ms);
        fx.push(Effect::Moved {
            from,
            to: step.target,
            kind: step.relation.kind,
        });
        if let Some(cell) = self.pending_eye_cell {
            if !self.is_new_edge(step.target) {
                self.pending_eye_cell = None;
                self.place_eye(cell, fx);
            }
        }

        let counts = matches!(step.relation.kind, RelationKind::CellPerspective | RelationKind::Swing);
        let within = |f: &Feature| counts && f.cell.has_side(from) && f.cell.has_side(step.target);
        if let Some(f) = self.bonus {
            if within(&f) {
                self.bonus = None;
                fx.push(Effect::FeatureResolved { feature: FeatureKind::Bonus, cell: f.cell });
                self.gain_life(LifeCause::Bonus, self.config.bonus_reward_lives, fx);
            }
        }
        if let Some(f) = self.adventure {
            if within(&f) {
                self.adventure = None;
                fx.push(Effect::FeatureResolved { feature: FeatureKind::Adventure, cell: f.cell });
                self.gain_life(LifeCause::Adventure, self.config.adventure_reward_lives, fx);
            }
        }

        // Countdowns: a window of N moves includes move N.
        for kind in [FeatureKind::Bonus, FeatureKind::Candidate, FeatureKind::Adventure] {
            if let Some(f) = self.slot(kind).as_mut() {
                f.moves_left -= 1;
                if f.moves_left == 0 {
                    let cell = f.cell;
                    *self.slot(kind) = None;
                    fx.push(Effect::FeatureExpired { feature: kind, cell });
                    if kind == FeatureKind::Adventure {
                        let replace = self.config.replace_board_on_adventure_failure;
                        self.lose_life(LifeCause::AdventureFailed, replace, fx);
                        if self.phase != Phase::Running || replace {
                            return;
                        }
                    }
                }
            }
        }
        self.spawn_features(fx);
    }

    fn spawn_features(&mut self, fx: &mut Vec<Effect>) {
        if self.bonus.is_none() && self.rng.gen_bool(self.config.bonus_spawn_probability) {
            if let Some(cell) = self.free_cell() {
                let moves_left = self.config.bonus_window_moves;
                self.bonus = Some(Feature { cell, moves_left });
                fx.push(Effect::FeatureSpawned { feature: FeatureKind::Bonus, cell, moves_left });
            }
        }
        if self.candidate.is_none()
            && self.adventure.is_none()
            && self.rng.gen_bool(self.config.candidate_spawn_probability)
        {
            if let Some(cell) = self.free_cell() {
                let moves_left = self.config.candidate_window_moves;
                self.candidate = Some(Feature { cell, moves_left });
                fx.push(Effect::FeatureSpawned { feature: FeatureKind::Candidate, cell, moves_left });
            }
        }
    }

    /// A uniformly chosen cell of `L′` not holding a feature.
    fn free_cell(&mut self) -> Option<FourCell> {
        let taken: Vec<FourCell> = [self.bonus, self.candidate, self.adventure]
            .into_iter()
            .flatten()
            .map(|f| f.cell)
            .collect();
        let free: Vec<FourCell> = self.cells.iter().copied().filter(|c| !taken.contains(c)).collect();
        if free.is_empty() {
            None
        } else {
            Some(free[self.rng.gen_range(0..free.len())])
        }
    }

    fn gain_life(&mut self, cause: LifeCause, amount: u32, fx: &mut Vec<Effect>) {
        self.lives += amount;
        fx.push(Effect::LifeGained {
            cause,
            amount,
            lives: self.lives,
        });
    }

    fn lose_life(&mut self, cause: LifeCause, replace_board: bool, fx: &mut Vec<Effect>) {
        self.lives -= 1;
        fx.push(Effect::LifeLost {
            cause,
            lives: self.lives,
        });
        if self.lives == 0 {
            self.phase = Phase::GameOver;
            fx.push(Effect::GameOver);
        } else if replace_board {
            self.replace_board(fx);
        }
    }

    fn replace_board(&mut self, fx: &mut Vec<Effect>) {
        let base = random_board(&self.config, &mut self.rng).expect("board generation succeeded before");
        self.cells = base.enumerate_cells().expect("good boards are slim semimodular");
        self.board = base.clone();
        self.base = base;
        self.eye_cell = None;
        self.eye_element = None;
        self.pending_eye_cell = None;
        self.monkey_current = None;
        self.monkey_previous = None;
        self.bonus = None;
        self.candidate = None;
        self.adventure = None;
        self.phase = Phase::ChoosingStart;
        self.phase_started_ms = self.clock_ms;
        self.boards += 1;
        fx.push(Effect::BoardReplaced {
            size: self.board.size(),
            edges: self.board.edge_count(),
        });
    }

    /// Checks the state invariants, returning the first one broken.
    pub fn check_invariants(&self) -> Result<(), String> {
        let eye = self.eye_cell.is_some() as usize;
        if self.eye_cell.is_some() != self.eye_element.is_some() {
            return Err("eye cell and eye element disagree".into());
        }
        if self.board.size() != self.base.size() + eye || self.board.edge_count() != self.base.edge_count() + 2 * eye {
            return Err(format!(
                "L′ has {} elements and {} edges, L has {} and {}, eye count {eye}",
                self.board.size(),
                self.board.edge_count(),
                self.base.size(),
                self.base.edge_count()
            ));
        }
        if let (Some(c), Some(p)) = (self.monkey_current, self.monkey_previous) {
            if c == p {
                return Err(format!("monkey_previous equals monkey_current {c}"));
            }
        }
        if let Some(c) = self.monkey_current {
            if !self.board.is_edge(c) {
                return Err(format!("monkey on {c}, which is not an edge of L′"));
            }
        }
        match self.phase {
            Phase::Running if self.monkey_current.is_none() => return Err("running without a monkey".into()),
            Phase::ChoosingStart if self.monkey_current.is_some() => {
                return Err("monkey placed while choosing the start".into())
            }
            _ => {}
        }
        if (self.phase == Phase::GameOver) != (self.lives == 0) {
            return Err(format!("phase {:?} with {} lives", self.phase, self.lives));
        }
        for f in [self.bonus, self.candidate, self.adventure].into_iter().flatten() {
            if !self.cells.contains(&f.cell) {
                return Err(format!("feature cell {} is not a cell of L′", f.cell));
            }
            if f.moves_left == 0 {
                return Err(format!("feature cell {} has an expired window", f.cell));
            }
        }
        if self.candidate.is_some() && self.adventure.is_some() {
            return Err("candidate and adventure active together".into());
        }
        Ok(())
    }

    pub fn snapshot(&self) -> Snapshot {
        let edges = self
            .board
            .edges()
            .iter()
            .map(|&edge| TaggedEdge {
                edge,
                tag: if self.is_new_edge(edge) { EdgeTag::New } else { EdgeTag::Old },
            })
            .collect();
        let features = [FeatureKind::Bonus, FeatureKind::Candidate, FeatureKind::Adventure]
            .into_iter()
            .filter_map(|kind| {
                self.feature(kind).map(|f| FeatureView {
                    kind,
                    color: kind.color().to_string(),
                    cell: f.cell,
                    moves_left: f.moves_left,
                })
            })
            .collect();
        Snapshot {
            version: SNAPSHOT_VERSION,
            seq: self.seq,
            phase: self.phase,
            lives: self.lives,
            move_count: self.move_count,
            move_period_ms: self.move_period_ms,
            clock_ms: self.clock_ms,
            deadline_ms: self.next_deadline_ms(),
            board_number: self.boards,
            diagram: self.board.layout().to_json(),
            edges,
            cells: self.cells.clone(),
            eye_cell: self.eye_cell,
            eye_element: self.eye_element,
            pending_eye_cell: self.pending_eye_cell,
            monkey_current: self.monkey_current,
            monkey_previous: self.monkey_previous,
            highlight: self.monkey_current.map(|edge| Highlight {
                edge,
                color: "red".to_string(),
            }),
            features,
        }
    }
}

fn random_board(config: &GameConfig, rng: &mut ChaCha8Rng) -> Result<Diagram, GameError> {
    let seed: u64 = rng.gen();
    Ok(builder::random_good_with(config.board_length, &GoodnessCriteria::default(), seed)?.0)
}

pub const SNAPSHOT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeTag {
    Old,
    New,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaggedEdge {
    pub edge: PrimeInterval,
    pub tag: EdgeTag,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureView {
    pub kind: FeatureKind,
    pub color: String,
    pub cell: FourCell,
    pub moves_left: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Highlight {
    pub edge: PrimeInterval,
    pub color: String,
}

/// Everything a client needs to draw the game.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub version: u32,
    pub seq: u64,
    pub phase: Phase,
    pub lives: u32,
    pub move_count: u64,
    pub move_period_ms: u64,
    pub clock_ms: u64,
    pub deadline_ms: Option<u64>,
    pub board_number: u32,
    pub diagram: DiagramJson,
    pub edges: Vec<TaggedEdge>,
    pub cells: Vec<FourCell>,
    pub eye_cell: Option<FourCell>,
    pub eye_element: Option<ElementId>,
    pub pending_eye_cell: Option<FourCell>,
    pub monkey_current: Option<PrimeInterval>,
    pub monkey_previous: Option<PrimeInterval>,
    pub highlight: Option<Highlight>,
    pub features: Vec<FeatureView>,
}

/// The screen-saver player: picks an interior start edge, accepts every
/// candidate, and moves the eye next to the monkey when it is about to get
/// stuck. Otherwise it lets time pass until the next move.
#[derive(Debug, Clone)]
pub struct AutoPlayer {
    rng: ChaCha8Rng,
    rescued_at: Option<(u32, u64)>,
}

impl AutoPlayer {
    pub fn new(seed: u64) -> Self {
        AutoPlayer {
            rng: ChaCha8Rng::seed_from_u64(seed ^ 0x5157_494e_4721),
            rescued_at: None,
        }
    }

    /// The next event, or `None` once the game is over.
    pub fn next_event(&mut self, state: &GameState) -> Option<GameEvent> {
        match state.phase() {
            Phase::GameOver => None,
            Phase::ChoosingStart => {
                // Now and then let the timer choose.
                if self.rng.gen_bool(0.2) {
                    let wait = state.next_deadline_ms().expect("deadline") - state.clock_ms();
                    return Some(GameEvent::Tick { ms: wait });
                }
                let boundary = state.base().boundary_edges();
                let interior: Vec<PrimeInterval> = state
                    .base()
                    .edges()
                    .iter()
                    .copied()
                    .filter(|e| !boundary.contains(e))
                    .collect();
                let pool = if interior.is_empty() { state.base().edges().to_vec() } else { interior };
                Some(GameEvent::ChooseStartEdge {
                    edge: pool[self.rng.gen_range(0..pool.len())],
                })
            }
            Phase::Running => {
                if let Some(c) = state.feature(FeatureKind::Candidate) {
                    return Some(GameEvent::ClickCell { cell: c.cell });
                }
                let key = (state.boards, state.move_count());
                if state.legal_moves().len() <= 1
                    && state.pending_eye_cell().is_none()
                    && self.rescued_at != Some(key)
                {
                    self.rescued_at = Some(key);
                    let current = state.monkey_current().expect("running");
                    let mut near: Vec<FourCell> = state
                        .base()
                        .enumerate_cells()
                        .expect("board cells")
                        .into_iter()
                        .filter(|c| Some(*c) != state.eye_cell())
                        .collect();
                    let adjacent: Vec<FourCell> = near
                        .iter()
                        .copied()
                        .filter(|c| c.elements().contains(&current.lower) || c.elements().contains(&current.upper))
                        .collect();
                    if !adjacent.is_empty() {
                        near = adjacent;
                    }
                    if !near.is_empty() {
                        let cell = near[self.rng.gen_range(0..near.len())];
                        return Some(GameEvent::ClickCell { cell });
                    }
                }
                let wait = state.next_deadline_ms().expect("deadline").saturating_sub(state.clock_ms()).max(1);
                Some(GameEvent::Tick { ms: wait })
            }
        }
    }
}

/// Result of a headless autoplay run.
#[derive(Debug, Clone, PartialEq)]
pub struct Simulation {
    pub log: Vec<EffectRecord>,
    pub events: usize,
    pub games: u32,
    pub final_lives: u32,
}

impl Simulation {
    /// The log as JSON lines, newline terminated.
    pub fn to_json_lines(&self) -> String {
        let mut out = String::new();
        for r in &self.log {
            out.push_str(&serde_json::to_string(r).expect("effects serialize"));
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimulationError {
    #[error(transparent)]
    Game(#[from] GameError),
    #[error("invariant violated after event {event}: {message}\nstate: {state}")]
    Invariant {
        event: usize,
        message: String,
        state: String,
    },
}

/// Feeds `events` autoplay events to the engine, starting a new game with
/// the next seed whenever one ends. Every engine invariant, the no-backtrack
/// rule and the lives ledger are checked after each event.
pub fn simulate(config: &GameConfig, events: usize) -> Result<Simulation, SimulationError> {
    let mut game_no = 1;
    let mut config = config.clone();
    let mut state = GameState::new(config.clone())?;
    let mut player = AutoPlayer::new(config.rng_seed);
    let mut log = vec![EffectRecord {
        move_count: 0,
        effect: Effect::GameStarted {
            game: game_no,
            seed: config.rng_seed,
        },
    }];
    let mut ledger = LedgerCheck::new(state.lives());
    let mut done = 0;
    while done < events {
        let Some(event) = player.next_event(&state) else {
            game_no += 1;
            config.rng_seed = config.rng_seed.wrapping_add(1);
            state = GameState::new(config.clone())?;
            player = AutoPlayer::new(config.rng_seed);
            ledger = LedgerCheck::new(state.lives());
            log.push(EffectRecord {
                move_count: 0,
                effect: Effect::GameStarted {
                    game: game_no,
                    seed: config.rng_seed,
                },
            });
            continue;
        };
        let effects = state.handle_event(&event);
        done += 1;
        let fail = |message: String, state: &GameState| SimulationError::Invariant {
            event: done,
            message,
            state: serde_json::to_string(&state.snapshot()).expect("snapshot serializes"),
        };
        for effect in effects {
            ledger.observe(&effect).map_err(|m| fail(m, &state))?;
            log.push(EffectRecord {
                move_count: state.move_count(),
                effect,
            });
        }
        ledger.reconcile(state.lives()).map_err(|m| fail(m, &state))?;
        state.check_invariants().map_err(|m| fail(m, &state))?;
    }
    Ok(Simulation {
        log,
        events: done,
        games: game_no,
        final_lives: state.lives(),
    })
}

/// Replays effects to check the lives ledger and the no-backtrack rule.
#[derive(Debug, Clone)]
struct LedgerCheck {
    lives: i64,
    last_move: Option<(PrimeInterval, PrimeInterval)>,
}

impl LedgerCheck {
    fn new(lives: u32) -> Self {
        LedgerCheck {
            lives: lives as i64,
            last_move: None,
        }
    }

    fn observe(&mut self, effect: &Effect) -> Result<(), String> {
        match effect {
            Effect::LifeGained { amount, lives, .. } => {
                self.lives += *amount as i64;
                if self.lives != *lives as i64 {
                    return Err(format!("ledger says {} lives, effect says {lives}", self.lives));
                }
            }
            Effect::LifeLost { lives, .. } => {
                self.lives -= 1;
                if self.lives != *lives as i64 {
                    return Err(format!("ledger says {} lives, effect says {lives}", self.lives));
                }
            }
            Effect::Moved { from, to, .. } => {
                if let Some((before, at)) = self.last_move {
                    if at == *from && before == *to {
                        return Err(format!("monkey stepped straight back from {from} to {to}"));
                    }
                }
                self.last_move = Some((*from, *to));
            }
            // These remove the edge the monkey came from (or the monkey).
            Effect::BoardReplaced { .. } | Effect::EyeChanged { .. } | Effect::StartChosen { .. } => {
                self.last_move = None;
            }
            _ => {}
        }
        Ok(())
    }

    fn reconcile(&self, lives: u32) -> Result<(), String> {
        if self.lives == lives as i64 {
            Ok(())
        } else {
            Err(format!("ledger says {} lives, state has {lives}", self.lives))
        }
    }
}
