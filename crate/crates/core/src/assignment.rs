//! Optimal and k-best 2D assignment.
//!
//! Rows are assigned to distinct columns; a matrix with more columns than
//! rows leaves the surplus columns unused. Forbidden pairs carry
//! `f64::INFINITY`. Among equal-cost optima the lexicographically smallest
//! row-to-column mapping is returned, so results are reproducible.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AssignmentError {
    #[error("no complete assignment with finite cost exists")]
    Infeasible,
    #[error("cost matrix data has {len} entries, expected {rows}x{cols}")]
    Shape { rows: usize, cols: usize, len: usize },
    #[error("cost matrix contains NaN or -inf at ({row}, {col})")]
    InvalidCost { row: usize, col: usize },
}

/// Dense row-major cost matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl CostMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self, AssignmentError> {
        if data.len() != rows * cols {
            return Err(AssignmentError::Shape {
                rows,
                cols,
                len: data.len(),
            });
        }
        if let Some(k) = data.iter().position(|c| c.is_nan() || *c == f64::NEG_INFINITY) {
            return Err(AssignmentError::InvalidCost {
                row: k / cols.max(1),
                col: k % cols.max(1),
            });
        }
        Ok(Self { rows, cols, data })
    }

    /// Matrix filled with `+inf`.
    pub fn forbidden(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![f64::INFINITY; rows * cols],
        }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, AssignmentError> {
        let n = rows.len();
        let m = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(n * m);
        for r in rows {
            if r.len() != m {
                return Err(AssignmentError::Shape {
                    rows: n,
                    cols: m,
                    len: data.len() + r.len(),
                });
            }
            data.extend_from_slice(r);
        }
        Self::new(n, m, data)
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, value: f64) {
        debug_assert!(!value.is_nan());
        self.data[r * self.cols + c] = value;
    }

    /// Sum of the selected entries.
    pub fn total(&self, row_to_col: &[usize]) -> f64 {
        row_to_col
            .iter()
            .enumerate()
            .map(|(r, &c)| self.get(r, c))
            .sum()
    }

    fn tolerance(&self) -> f64 {
        let scale = self
            .data
            .iter()
            .filter(|c| c.is_finite())
            .fold(0.0f64, |m, c| m.max(c.abs()));
        1e-9 * (1.0 + scale) * (1.0 + self.rows as f64)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    pub row_to_col: Vec<usize>,
    pub total: f64,
}

struct RawSolution {
    row_to_col: Vec<usize>,
    row_pot: Vec<f64>,
    col_pot: Vec<f64>,
}

/// Shortest augmenting path Hungarian method for `rows <= cols`.
///
/// Returns the optimal assignment together with dual potentials satisfying
/// `u[r] + v[c] <= cost(r, c)` with equality on the assignment and `v[c] <= 0`
/// everywhere (zero on unassigned columns).
fn hungarian(costs: &CostMatrix) -> Result<RawSolution, AssignmentError> {
    let n = costs.rows;
    let m = costs.cols;
    if n == 0 {
        return Ok(RawSolution {
            row_to_col: Vec::new(),
            row_pot: Vec::new(),
            col_pot: vec![0.0; m],
        });
    }
    if n > m {
        return Err(AssignmentError::Infeasible);
    }
    // 1-based with index 0 as the virtual source
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; m + 1];
    let mut p = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];
    let mut minv = vec![0.0; m + 1];
    let mut used = vec![false; m + 1];

    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0usize;
        minv.iter_mut().for_each(|x| *x = f64::INFINITY);
        used.iter_mut().for_each(|x| *x = false);
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=m {
                if used[j] {
                    continue;
                }
                let c = costs.get(i0 - 1, j - 1);
                if c.is_finite() {
                    let cur = c - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            if !delta.is_finite() {
                return Err(AssignmentError::Infeasible);
            }
            for j in 0..=m {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut row_to_col = vec![0usize; n];
    for j in 1..=m {
        if p[j] != 0 {
            row_to_col[p[j] - 1] = j - 1;
        }
    }
    Ok(RawSolution {
        row_to_col,
        row_pot: u[1..].to_vec(),
        col_pot: v[1..].to_vec(),
    })
}

/// Minimum-cost assignment of every row to a distinct column.
pub fn solve_assignment(costs: &CostMatrix) -> Result<Assignment, AssignmentError> {
    let raw = hungarian(costs)?;
    let n = costs.rows;
    let tol = costs.tolerance();
    let optimum = costs.total(&raw.row_to_col);

    // Every optimal assignment lives on zero reduced-cost edges.
    let tight: Vec<Vec<usize>> = (0..n)
        .map(|r| {
            (0..costs.cols)
                .filter(|&c| {
                    let x = costs.get(r, c);
                    x.is_finite() && (x - raw.row_pot[r] - raw.col_pot[c]).abs() <= tol
                })
                .collect()
        })
        .collect();
    if tight.iter().all(|t| t.len() <= 1) {
        return Ok(Assignment {
            row_to_col: raw.row_to_col,
            total: optimum,
        });
    }

    // Lexicographic refinement: fix rows one at a time to the smallest column
    // that still admits an optimal completion.
    let mut current = raw.row_to_col;
    let mut fixed_sum = 0.0;
    let mut taken = vec![false; costs.cols];
    for r in 0..n {
        for &c in &tight[r] {
            if taken[c] {
                continue;
            }
            if c == current[r] {
                break;
            }
            let head = fixed_sum + costs.get(r, c);
            taken[c] = true;
            let completion = solve_remaining(costs, r + 1, &taken);
            taken[c] = false;
            if let Some((tail, tail_cost)) = completion {
                if (head + tail_cost - optimum).abs() <= tol {
                    current[r] = c;
                    current[r + 1..].copy_from_slice(&tail);
                    break;
                }
            }
        }
        taken[current[r]] = true;
        fixed_sum += costs.get(r, current[r]);
    }
    Ok(Assignment {
        total: costs.total(&current),
        row_to_col: current,
    })
}

/// Optimal assignment of rows `first..` to columns not yet taken.
fn solve_remaining(costs: &CostMatrix, first: usize, taken: &[bool]) -> Option<(Vec<usize>, f64)> {
    let free: Vec<usize> = (0..costs.cols).filter(|&c| !taken[c]).collect();
    let rows = costs.rows - first;
    let mut sub = CostMatrix::forbidden(rows, free.len());
    for r in 0..rows {
        for (k, &c) in free.iter().enumerate() {
            sub.set(r, k, costs.get(first + r, c));
        }
    }
    let raw = hungarian(&sub).ok()?;
    let cost = sub.total(&raw.row_to_col);
    Some((raw.row_to_col.into_iter().map(|k| free[k]).collect(), cost))
}

struct MurtyNode {
    solution: Assignment,
    forced: Vec<(usize, usize)>,
    forbidden: Vec<(usize, usize)>,
}

impl PartialEq for MurtyNode {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for MurtyNode {}

impl PartialOrd for MurtyNode {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for MurtyNode {
    // reversed: BinaryHeap is a max-heap
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .solution
            .total
            .total_cmp(&self.solution.total)
            .then_with(|| other.solution.row_to_col.cmp(&self.solution.row_to_col))
    }
}

fn constrained(costs: &CostMatrix, forced: &[(usize, usize)], forbidden: &[(usize, usize)]) -> CostMatrix {
    let mut m = costs.clone();
    for &(r, c) in forbidden {
        m.set(r, c, f64::INFINITY);
    }
    for &(r, c) in forced {
        let keep = costs.get(r, c);
        for k in 0..m.cols {
            m.set(r, k, f64::INFINITY);
        }
        for k in 0..m.rows {
            m.set(k, c, f64::INFINITY);
        }
        m.set(r, c, keep);
    }
    m
}

/// Up to `k` distinct assignments in non-decreasing total cost (Murty's
/// partitioning method). The first entry equals [`solve_assignment`].
pub fn murty_k_best(costs: &CostMatrix, k: usize) -> Result<Vec<Assignment>, AssignmentError> {
    let first = solve_assignment(costs)?;
    let mut out = Vec::with_capacity(k);
    if k == 0 {
        return Ok(out);
    }
    let mut heap = BinaryHeap::new();
    heap.push(MurtyNode {
        solution: first,
        forced: Vec::new(),
        forbidden: Vec::new(),
    });
    while let Some(node) = heap.pop() {
        let assignment = node.solution.row_to_col.clone();
        out.push(node.solution);
        if out.len() == k {
            break;
        }
        let mut forced = node.forced.clone();
        for (r, &c) in assignment.iter().enumerate() {
            if node.forced.iter().any(|&(fr, _)| fr == r) {
                continue;
            }
            let mut forbidden = node.forbidden.clone();
            forbidden.push((r, c));
            let sub = constrained(costs, &forced, &forbidden);
            if let Ok(sol) = solve_assignment(&sub) {
                let total = costs.total(&sol.row_to_col);
                if total.is_finite() {
                    heap.push(MurtyNode {
                        solution: Assignment {
                            row_to_col: sol.row_to_col,
                            total,
                        },
                        forced: forced.clone(),
                        forbidden,
                    });
                }
            }
            forced.push((r, c));
        }
    }
    Ok(out)
}
