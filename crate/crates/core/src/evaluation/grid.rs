use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::agents::JointPolicy;
use crate::environments::mountain_car::{MountainCarState, POSITION_RANGE, VELOCITY_RANGE};
use crate::error::{Error, Result};

/// Axis ranges of a policy grid, inside the Mountain Car state space.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridRanges {
    pub position: (f64, f64),
    pub velocity: (f64, f64),
}

impl Default for GridRanges {
    fn default() -> Self {
        GridRanges {
            position: POSITION_RANGE,
            velocity: VELOCITY_RANGE,
        }
    }
}

impl GridRanges {
    fn validate(&self) -> Result<()> {
        let inside = |(lo, hi): (f64, f64), (dlo, dhi): (f64, f64)| {
            lo.is_finite() && hi.is_finite() && dlo <= lo && lo < hi && hi <= dhi
        };
        if !inside(self.position, POSITION_RANGE) || !inside(self.velocity, VELOCITY_RANGE) {
            return Err(Error::Config(format!(
                "grid ranges {self:?} must be non-empty and inside the state space"
            )));
        }
        Ok(())
    }
}

/// Actions of a single agent at cell centers. `cells[i][j]` is position bin
/// `i`, velocity bin `j`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PolicyGrid {
    pub resolution: (usize, usize),
    pub ranges: GridRanges,
    pub alphabet: Vec<String>,
    pub cells: Vec<Vec<String>>,
}

fn center((lo, hi): (f64, f64), bins: usize, k: usize) -> f64 {
    lo + (hi - lo) * (k as f64 + 0.5) / bins as f64
}

/// Evaluates `policy` (a one-agent team) at the center of every cell of a
/// `rows` x `cols` grid over position x velocity.
pub fn policy_grid(
    policy: &dyn JointPolicy,
    alphabet: &BTreeSet<String>,
    (rows, cols): (usize, usize),
    ranges: GridRanges,
) -> Result<PolicyGrid> {
    if rows == 0 || cols == 0 {
        return Err(Error::Config("grid resolution must be at least 1x1".into()));
    }
    ranges.validate()?;
    if policy.team_size() != 1 {
        return Err(Error::TeamSizeMismatch {
            expected: 1,
            found: policy.team_size(),
        });
    }
    let mut cells = Vec::with_capacity(rows);
    for i in 0..rows {
        let mut row = Vec::with_capacity(cols);
        for j in 0..cols {
            let state = MountainCarState {
                position: center(ranges.position, rows, i),
                velocity: center(ranges.velocity, cols, j),
            };
            let action = policy.joint_action(&state.to_state_vector())?.remove(0);
            if !alphabet.contains(&action) {
                return Err(Error::UnknownAction(action));
            }
            row.push(action);
        }
        cells.push(row);
    }
    Ok(PolicyGrid {
        resolution: (rows, cols),
        ranges,
        alphabet: alphabet.iter().cloned().collect(),
        cells,
    })
}

const GLYPHS: &[u8] = b"0123456789abcdefghijklmnopqrstuvwxyz";

impl PolicyGrid {
    fn index_of(&self, label: &str) -> usize {
        self.alphabet
            .iter()
            .position(|a| a == label)
            .expect("cell labels come from the alphabet")
    }

    fn glyph(&self, label: &str) -> char {
        GLYPHS
            .get(self.index_of(label))
            .map(|&b| b as char)
            .unwrap_or('?')
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("position_bin,velocity_bin,action\n");
        for (i, row) in self.cells.iter().enumerate() {
            for (j, action) in row.iter().enumerate() {
                writeln!(out, "{i},{j},{action}").expect("writing to a String");
            }
        }
        out
    }

    fn raster_lines(&self) -> Vec<String> {
        let (rows, cols) = self.resolution;
        (0..cols)
            .rev()
            .map(|j| (0..rows).map(|i| self.glyph(&self.cells[i][j])).collect())
            .collect()
    }

    /// Position runs left to right, velocity bottom to top. A legend follows.
    pub fn render_ascii(&self) -> String {
        let mut out = self.raster_lines().join("\n");
        out.push('\n');
        for label in &self.alphabet {
            writeln!(out, "{} = {label}", self.glyph(label)).expect("writing to a String");
        }
        out
    }

    /// Plain PGM with the same layout as [`render_ascii`](Self::render_ascii).
    /// Gray levels follow the alphabet's alphabetical order, darkest first.
    pub fn to_pgm(&self) -> String {
        let (rows, cols) = self.resolution;
        let levels = self.alphabet.len().max(2) - 1;
        let mut out = format!("P2\n{rows} {cols}\n255\n");
        for j in (0..cols).rev() {
            let line: Vec<String> = (0..rows)
                .map(|i| (self.index_of(&self.cells[i][j]) * 255 / levels).to_string())
                .collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }

    /// Number of cells whose actions differ.
    pub fn diff(&self, other: &PolicyGrid) -> Result<usize> {
        if self.resolution != other.resolution || self.ranges != other.ranges {
            return Err(Error::Config("grids cover different cells".into()));
        }
        Ok(self
            .cells
            .iter()
            .flatten()
            .zip(other.cells.iter().flatten())
            .filter(|(a, b)| a != b)
            .count())
    }

    /// Both grids next to each other, then a row marking differing cells.
    pub fn render_side_by_side(&self, other: &PolicyGrid) -> Result<String> {
        let mismatches = self.diff(other)?;
        let (rows, cols) = self.resolution;
        let left = self.raster_lines();
        let right = other.raster_lines();
        let mut out = String::new();
        for (k, (l, r)) in left.iter().zip(&right).enumerate() {
            let j = cols - 1 - k;
            let marks: String = (0..rows)
                .map(|i| {
                    if self.cells[i][j] == other.cells[i][j] {
                        ' '
                    } else {
                        'x'
                    }
                })
                .collect();
            writeln!(out, "{l}  {r}  {marks}").expect("writing to a String");
        }
        writeln!(out, "{mismatches} of {} cells differ", rows * cols).expect("writing to a String");
        Ok(out)
    }
}
