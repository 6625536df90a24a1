use crate::scenario::{CellPos, Grid};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Move {
    Left,
    Right,
    Forward,
    Backward,
    Stay,
}

impl Move {
    pub const ALL: [Move; 5] = [Move::Left, Move::Right, Move::Forward, Move::Backward, Move::Stay];

    /// Target cell of the move; leaving the grid leaves the cell unchanged.
    pub fn apply(self, grid: &Grid, cell: usize) -> usize {
        let p = grid.pos(cell).expect("valid cell");
        let (cols, rows) = (grid.cols(), grid.rows());
        let next = match self {
            Move::Left if p.col > 0 => CellPos { col: p.col - 1, ..p },
            Move::Right if p.col + 1 < cols => CellPos { col: p.col + 1, ..p },
            Move::Forward if p.row + 1 < rows => CellPos { row: p.row + 1, ..p },
            Move::Backward if p.row > 0 => CellPos { row: p.row - 1, ..p },
            _ => p,
        };
        grid.index(next)
    }
}

/// One UAV's per-stage choice.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Action {
    pub movement: Move,
    /// 1-based power level.
    pub power_level: usize,
    /// 1-based rank in the nearest-BS list.
    pub assoc: usize,
}

/// Ordered action set: move-major, then power level, then association rank.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ActionSpace {
    pub power_levels: usize,
    pub nearest: usize,
}

impl ActionSpace {
    pub fn new(power_levels: usize, nearest: usize) -> Self {
        ActionSpace { power_levels, nearest }
    }

    pub fn len(&self) -> usize {
        Move::ALL.len() * self.power_levels * self.nearest
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn action(&self, index: usize) -> Action {
        assert!(index < self.len(), "action index {index} out of range");
        let per_move = self.power_levels * self.nearest;
        Action {
            movement: Move::ALL[index / per_move],
            power_level: (index % per_move) / self.nearest + 1,
            assoc: index % self.nearest + 1,
        }
    }

    pub fn index(&self, a: Action) -> usize {
        let m = Move::ALL.iter().position(|&m| m == a.movement).unwrap();
        (m * self.power_levels + a.power_level - 1) * self.nearest + a.assoc - 1
    }

    pub fn actions(&self) -> Vec<Action> {
        (0..self.len()).map(|i| self.action(i)).collect()
    }
}

pub fn enumerate_actions(cfg: &crate::scenario::ScenarioConfig) -> Vec<Action> {
    ActionSpace::new(cfg.power_levels, cfg.nearest_bs_count).actions()
}
