use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Horizontal position in meters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn distance(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn distance_sq(self, other: Point) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }
}

/// Column/row coordinates of a cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct CellPos {
    pub col: usize,
    pub row: usize,
}

/// Row-major grid of square unit areas. Cell `i` sits at column `i % cols`,
/// row `i / cols`, with its center half a step in from the cell corner.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    cols: usize,
    rows: usize,
    step_m: f64,
}

impl Grid {
    pub fn new(cols: usize, rows: usize, step_m: f64) -> Self {
        Grid { cols, rows, step_m }
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn step_m(&self) -> f64 {
        self.step_m
    }

    pub fn len(&self) -> usize {
        self.cols * self.rows
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn width_m(&self) -> f64 {
        self.cols as f64 * self.step_m
    }

    pub fn height_m(&self) -> f64 {
        self.rows as f64 * self.step_m
    }

    pub fn diagonal_m(&self) -> f64 {
        self.width_m().hypot(self.height_m())
    }

    pub fn check(&self, index: usize) -> Result<()> {
        if index < self.len() {
            Ok(())
        } else {
            Err(Error::CellOutOfRange {
                index,
                cells: self.len(),
            })
        }
    }

    pub fn pos(&self, index: usize) -> Result<CellPos> {
        self.check(index)?;
        Ok(CellPos {
            col: index % self.cols,
            row: index / self.cols,
        })
    }

    pub fn index(&self, pos: CellPos) -> usize {
        pos.row * self.cols + pos.col
    }

    pub fn cell_center(&self, index: usize) -> Result<Point> {
        let p = self.pos(index)?;
        Ok(Point::new(
            (p.col as f64 + 0.5) * self.step_m,
            (p.row as f64 + 0.5) * self.step_m,
        ))
    }

    /// Manhattan distance in cells.
    pub fn manhattan(&self, a: usize, b: usize) -> Result<usize> {
        let (pa, pb) = (self.pos(a)?, self.pos(b)?);
        Ok(pa.col.abs_diff(pb.col) + pa.row.abs_diff(pb.row))
    }
}
