//! Exact transportation simplex.
//!
//! Solves min Σ c·x over the transportation polytope (row sums = supply,
//! column sums = demand, x ≥ 0) with some arcs excluded. Pivots are exact
//! rational; Bland's rule (lexicographically first entering arc, smallest
//! arc among ratio ties leaving) guarantees termination.
//!
//! The initial basis is the north-west-corner staircase restricted to
//! allowed arcs; when that staircase would step on an excluded arc, the
//! whole problem is re-run on the full grid with excluded arcs priced at an
//! exact big-M that provably dominates every finite rerouting, and
//! exclusion-feasibility is read off the optimal solution instead.

use crate::ext::Rat;
use num::traits::{Signed, Zero};

/// A transportation problem over an allowed-arc subset.
///
/// Callers must pass strictly positive supplies and demands with equal
/// totals; zero-mass points are the caller's business to drop.
pub(crate) struct TransportProblem<'a> {
    pub supply: &'a [Rat],
    pub demand: &'a [Rat],
    /// `None` marks an excluded arc.
    pub cost: &'a [Vec<Option<Rat>>],
}

pub(crate) struct TransportSolution {
    /// True iff the optimum puts zero mass on every excluded arc — i.e. the
    /// polytope restricted to allowed arcs is nonempty and was optimized.
    pub allowed_feasible: bool,
    /// Optimal value over allowed arcs (meaningful when `allowed_feasible`).
    pub value: Rat,
    pub mass: Vec<Vec<Rat>>,
    /// Simplex multipliers from the final basis tree, `row_pot[0] = 0`.
    /// They satisfy `row_pot[i] + col_pot[j] ≤ cost[i][j]` on every allowed
    /// arc, with equality on the basis.
    pub row_pot: Vec<Rat>,
    pub col_pot: Vec<Rat>,
}

pub(crate) fn solve_transport(p: &TransportProblem) -> TransportSolution {
    let m = p.supply.len();
    let n = p.demand.len();
    debug_assert!(p.supply.iter().all(|s| s.is_positive()));
    debug_assert!(p.demand.iter().all(|d| d.is_positive()));
    debug_assert_eq!(
        p.supply.iter().cloned().sum::<Rat>(),
        p.demand.iter().cloned().sum::<Rat>()
    );

    if let Some(start) = northwest(p.supply, p.demand, Some(p.cost)) {
        let eff: Vec<Vec<Option<Rat>>> = p.cost.to_vec();
        let (mass, row_pot, col_pot) = pivot_to_optimal(p, &eff, start);
        let value = allowed_value(p, &mass);
        TransportSolution {
            allowed_feasible: true,
            value,
            mass,
            row_pot,
            col_pot,
        }
    } else {
        // Penalized run on the full grid. M = 1 + Σ|c| strictly exceeds the
        // finite cost change of rerouting one unit of mass along any simple
        // cycle, so the optimum uses excluded arcs iff it has no choice.
        let mut big_m = Rat::from_integer(1.into());
        for row in p.cost {
            for c in row.iter().flatten() {
                big_m += c.abs();
            }
        }
        let eff: Vec<Vec<Option<Rat>>> = p
            .cost
            .iter()
            .map(|row| {
                row.iter()
                    .map(|c| Some(c.clone().unwrap_or_else(|| big_m.clone())))
                    .collect()
            })
            .collect();
        let start = northwest(p.supply, p.demand, None).expect("full grid staircase");
        let (mass, row_pot, col_pot) = pivot_to_optimal(p, &eff, start);
        let allowed_feasible = (0..m).all(|i| {
            (0..n).all(|j| p.cost[i][j].is_some() || mass[i][j].is_zero())
        });
        let value = allowed_value(p, &mass);
        TransportSolution {
            allowed_feasible,
            value,
            mass,
            row_pot,
            col_pot,
        }
    }
}

fn allowed_value(p: &TransportProblem, mass: &[Vec<Rat>]) -> Rat {
    let mut v = Rat::zero();
    for (i, row) in p.cost.iter().enumerate() {
        for (j, c) in row.iter().enumerate() {
            if let Some(c) = c {
                v += c * &mass[i][j];
            }
        }
    }
    v
}

/// North-west-corner staircase. Returns the starting mass and basis (always
/// exactly m+n−1 cells forming a tree), or `None` if the staircase steps on
/// an excluded arc of `restrict`.
fn northwest(
    supply: &[Rat],
    demand: &[Rat],
    restrict: Option<&[Vec<Option<Rat>>]>,
) -> Option<(Vec<Vec<Rat>>, Vec<(usize, usize)>)> {
    let m = supply.len();
    let n = demand.len();
    let mut rs = supply.to_vec();
    let mut cd = demand.to_vec();
    let mut mass = vec![vec![Rat::zero(); n]; m];
    let mut basis = Vec::with_capacity(m + n - 1);
    let (mut i, mut j) = (0usize, 0usize);
    loop {
        if let Some(cost) = restrict {
            if cost[i][j].is_none() {
                return None;
            }
        }
        let x = rs[i].clone().min(cd[j].clone());
        rs[i] -= &x;
        cd[j] -= &x;
        mass[i][j] = x;
        basis.push((i, j));
        if i == m - 1 && j == n - 1 {
            break;
        }
        if rs[i].is_zero() && i < m - 1 {
            i += 1;
        } else {
            j += 1;
        }
    }
    debug_assert_eq!(basis.len(), m + n - 1);
    Some((mass, basis))
}

/// Run Bland-rule pivots to optimality. `eff[i][j] = None` means the arc may
/// never enter the basis (excluded in restricted mode); the starting basis
/// must consist of priced arcs.
fn pivot_to_optimal(
    p: &TransportProblem,
    eff: &[Vec<Option<Rat>>],
    start: (Vec<Vec<Rat>>, Vec<(usize, usize)>),
) -> (Vec<Vec<Rat>>, Vec<Rat>, Vec<Rat>) {
    let m = p.supply.len();
    let n = p.demand.len();
    let (mut mass, basis) = start;
    let mut in_basis = vec![vec![false; n]; m];
    for &(i, j) in &basis {
        in_basis[i][j] = true;
    }

    loop {
        let (row_pot, col_pot) = tree_potentials(m, n, &in_basis, eff);
        let entering = find_entering(eff, &in_basis, &row_pot, &col_pot);
        let (ei, ej) = match entering {
            Some(cell) => cell,
            None => return (mass, row_pot, col_pot),
        };

        // The unique tree cycle closed by the entering arc: walk from the
        // entering column node back to the entering row node; cells along
        // the walk alternate −, +, −, … starting opposite the entering arc.
        let path = tree_path(m, n, &in_basis, ei, m + ej);
        let mut minus_cells = Vec::new();
        let mut plus_cells = vec![(ei, ej)];
        for (idx, cell) in path.iter().enumerate() {
            if idx % 2 == 0 {
                minus_cells.push(*cell);
            } else {
                plus_cells.push(*cell);
            }
        }

        let theta = minus_cells
            .iter()
            .map(|&(i, j)| mass[i][j].clone())
            .min()
            .expect("cycle has a leaving candidate");
        let &leaving = minus_cells
            .iter()
            .filter(|&&(i, j)| mass[i][j] == theta)
            .min()
            .expect("nonempty argmin");

        for &(i, j) in &plus_cells {
            mass[i][j] += &theta;
        }
        for &(i, j) in &minus_cells {
            mass[i][j] -= &theta;
        }
        in_basis[leaving.0][leaving.1] = false;
        in_basis[ei][ej] = true;
    }
}

/// Basis-tree multipliers: row_pot[0] = 0, propagated along basic arcs so
/// that row_pot[i] + col_pot[j] = eff[i][j] on the basis.
fn tree_potentials(
    m: usize,
    n: usize,
    in_basis: &[Vec<bool>],
    eff: &[Vec<Option<Rat>>],
) -> (Vec<Rat>, Vec<Rat>) {
    let mut row_pot = vec![Rat::zero(); m];
    let mut col_pot = vec![Rat::zero(); n];
    let mut seen = vec![false; m + n];
    seen[0] = true;
    let mut queue = vec![0usize];
    while let Some(u) = queue.pop() {
        if u < m {
            for j in 0..n {
                if in_basis[u][j] && !seen[m + j] {
                    seen[m + j] = true;
                    let c = eff[u][j].as_ref().expect("basic arc is priced");
                    col_pot[j] = c - &row_pot[u];
                    queue.push(m + j);
                }
            }
        } else {
            let j = u - m;
            for i in 0..m {
                if in_basis[i][j] && !seen[i] {
                    seen[i] = true;
                    let c = eff[i][j].as_ref().expect("basic arc is priced");
                    row_pot[i] = c - &col_pot[j];
                    queue.push(i);
                }
            }
        }
    }
    debug_assert!(seen.iter().all(|&s| s), "basis must span all nodes");
    (row_pot, col_pot)
}

/// Bland entering rule: first arc in row-major order with negative reduced
/// cost.
fn find_entering(
    eff: &[Vec<Option<Rat>>],
    in_basis: &[Vec<bool>],
    row_pot: &[Rat],
    col_pot: &[Rat],
) -> Option<(usize, usize)> {
    for (i, row) in eff.iter().enumerate() {
        for (j, c) in row.iter().enumerate() {
            if in_basis[i][j] {
                continue;
            }
            if let Some(c) = c {
                if *c < &row_pot[i] + &col_pot[j] {
                    return Some((i, j));
                }
            }
        }
    }
    None
}

/// Cells of the unique basis-tree path from node `from_row` (a row index)
/// to node `to` (offset column index), listed from the `to` end backward.
fn tree_path(
    m: usize,
    n: usize,
    in_basis: &[Vec<bool>],
    from_row: usize,
    to: usize,
) -> Vec<(usize, usize)> {
    let total = m + n;
    let mut parent = vec![usize::MAX; total];
    parent[from_row] = from_row;
    let mut queue = std::collections::VecDeque::from([from_row]);
    while let Some(u) = queue.pop_front() {
        if u == to {
            break;
        }
        if u < m {
            for j in 0..n {
                if in_basis[u][j] && parent[m + j] == usize::MAX {
                    parent[m + j] = u;
                    queue.push_back(m + j);
                }
            }
        } else {
            let j = u - m;
            for i in 0..m {
                if in_basis[i][j] && parent[i] == usize::MAX {
                    parent[i] = m + j;
                    queue.push_back(i);
                }
            }
        }
    }
    let mut cells = Vec::new();
    let mut u = to;
    while u != from_row {
        let p = parent[u];
        debug_assert_ne!(p, usize::MAX, "basis tree is connected");
        let cell = if u < m { (u, p - m) } else { (p, u - m) };
        cells.push(cell);
        u = p;
    }
    cells
}
