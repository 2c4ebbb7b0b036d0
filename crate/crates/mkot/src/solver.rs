//! Exact primal solving and desk-scale verification oracles.
//!
//! [`solve_primal`] minimizes expected cost over finite plans with the
//! transportation simplex restricted to finite-cost arcs; when no finite
//! plan exists the value is `+inf` (the infimum over an empty set).
//! [`enumerate_couplings`] is an independent brute-force oracle over a
//! rational grid, [`finite_feasible`] an independent max-flow feasibility
//! check, and [`vertex_plans`] enumerates every vertex of the finite-arc
//! transportation polytope for exhaustive small-scale arguments.

use crate::error::Error;
use crate::ext::{ExtRat, Rat};
use crate::instance::{cost_of_plan, Instance, Plan};
#[cfg(test)]
use crate::lp::{solve_lp, Lp, LpResult};
use crate::simplex::{solve_transport, TransportProblem, TransportSolution};
use num::traits::{One, Signed, Zero};
use std::collections::HashSet;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PrimalStatus {
    Optimal,
    InfeasibleFinite,
}

/// Outcome of the primal problem.
#[derive(Clone, Debug)]
pub struct PrimalResult {
    pub value: ExtRat,
    pub plan: Option<Plan>,
    pub status: PrimalStatus,
}

/// The instance with zero-mass points dropped, plus its simplex solution.
pub(crate) struct ReducedSolution {
    /// Original indices of the kept (positive-mass) A-points.
    pub rows: Vec<usize>,
    /// Original indices of the kept B-points.
    pub cols: Vec<usize>,
    pub sol: TransportSolution,
}

pub(crate) fn solve_reduced(inst: &Instance) -> ReducedSolution {
    solve_reduced_with(inst, |a, b| inst.cost[a][b].as_rat().cloned())
}

/// Solve the reduced transportation problem with an arbitrary arc pricing
/// (`None` = excluded); used by the primal solve and by per-arc mass
/// maximization.
pub(crate) fn solve_reduced_with(
    inst: &Instance,
    price: impl Fn(usize, usize) -> Option<Rat>,
) -> ReducedSolution {
    let rows: Vec<usize> = (0..inst.m).filter(|&a| inst.mu[a].is_positive()).collect();
    let cols: Vec<usize> = (0..inst.n).filter(|&b| inst.nu[b].is_positive()).collect();
    let supply: Vec<Rat> = rows.iter().map(|&a| inst.mu[a].clone()).collect();
    let demand: Vec<Rat> = cols.iter().map(|&b| inst.nu[b].clone()).collect();
    let cost: Vec<Vec<Option<Rat>>> = rows
        .iter()
        .map(|&a| cols.iter().map(|&b| price(a, b)).collect())
        .collect();
    let sol = solve_transport(&TransportProblem {
        supply: &supply,
        demand: &demand,
        cost: &cost,
    });
    ReducedSolution { rows, cols, sol }
}

impl ReducedSolution {
    /// Re-inflate the reduced mass matrix to full size with zero rows and
    /// columns at the dropped points.
    pub fn full_mass(&self, inst: &Instance) -> Vec<Vec<Rat>> {
        let mut mass = vec![vec![Rat::zero(); inst.n]; inst.m];
        for (ri, &a) in self.rows.iter().enumerate() {
            for (ci, &b) in self.cols.iter().enumerate() {
                mass[a][b] = self.sol.mass[ri][ci].clone();
            }
        }
        mass
    }
}

/// Minimize expected cost over finite plans.
pub fn solve_primal(inst: &Instance) -> PrimalResult {
    let red = solve_reduced(inst);
    if !red.sol.allowed_feasible {
        return PrimalResult {
            value: ExtRat::PlusInf,
            plan: None,
            status: PrimalStatus::InfeasibleFinite,
        };
    }
    let plan = Plan::new(inst, red.full_mass(inst)).expect("simplex output is a valid plan");
    debug_assert!(plan.is_finite(inst));
    PrimalResult {
        value: ExtRat::Fin(red.sol.value.clone()),
        plan: Some(plan),
        status: PrimalStatus::Optimal,
    }
}

/// All plans whose masses are multiples of `1/denom`, by exhaustive
/// enumeration of integer contingency tables with the prescribed margins.
/// Includes plans with mass on forbidden arcs.
pub fn enumerate_couplings(inst: &Instance, denom: u64) -> Result<Vec<Plan>, Error> {
    if denom == 0 {
        return Err(Error::BadDenom("denominator must be positive".into()));
    }
    if inst.m * inst.n > 16 || denom > 6 {
        return Err(Error::TooLarge(format!(
            "guard is m·n ≤ 16 and denom ≤ 6; got {}·{} at denom {}",
            inst.m, inst.n, denom
        )));
    }
    let scale = Rat::from_integer(denom.into());
    let to_units = |v: &Rat| -> Result<i64, Error> {
        let scaled = v * &scale;
        if !scaled.denom().is_one() {
            return Err(Error::BadDenom(format!(
                "{} is not a multiple of 1/{}",
                v, denom
            )));
        }
        Ok(num::ToPrimitive::to_i64(scaled.numer()).expect("marginal fits in i64"))
    };
    let row_units: Vec<i64> = inst.mu.iter().map(&to_units).collect::<Result<_, _>>()?;
    let col_units: Vec<i64> = inst.nu.iter().map(&to_units).collect::<Result<_, _>>()?;

    let mut plans = Vec::new();
    let mut table = vec![vec![0i64; inst.n]; inst.m];
    let mut col_left = col_units.clone();
    fill_tables(
        inst,
        &row_units,
        &mut col_left,
        &mut table,
        0,
        denom,
        &mut plans,
    );
    Ok(plans)
}

fn fill_tables(
    inst: &Instance,
    row_units: &[i64],
    col_left: &mut Vec<i64>,
    table: &mut Vec<Vec<i64>>,
    row: usize,
    denom: u64,
    out: &mut Vec<Plan>,
) {
    if row == inst.m {
        let mass: Vec<Vec<Rat>> = table
            .iter()
            .map(|r| {
                r.iter()
                    .map(|&v| Rat::new(v.into(), (denom as i64).into()))
                    .collect()
            })
            .collect();
        out.push(Plan::new(inst, mass).expect("enumerated table has the margins"));
        return;
    }
    fill_row(inst, row_units, col_left, table, row, 0, row_units[row], denom, out);
}

#[allow(clippy::too_many_arguments)]
fn fill_row(
    inst: &Instance,
    row_units: &[i64],
    col_left: &mut Vec<i64>,
    table: &mut Vec<Vec<i64>>,
    row: usize,
    col: usize,
    row_left: i64,
    denom: u64,
    out: &mut Vec<Plan>,
) {
    if col == inst.n {
        if row_left == 0 {
            fill_tables(inst, row_units, col_left, table, row + 1, denom, out);
        }
        return;
    }
    // Remaining column capacity after this one bounds what must be placed.
    let later_cap: i64 = col_left[col + 1..].iter().sum();
    let lo = (row_left - later_cap).max(0);
    let hi = row_left.min(col_left[col]);
    for v in lo..=hi {
        table[row][col] = v;
        col_left[col] -= v;
        fill_row(
            inst, row_units, col_left, table, row, col + 1, row_left - v, denom, out,
        );
        col_left[col] += v;
        table[row][col] = 0;
    }
}

/// True iff some finite plan exists, by Edmonds–Karp max-flow with exact
/// rational capacities on the finite-arc bipartite graph.
pub fn finite_feasible(inst: &Instance) -> bool {
    let m = inst.m;
    let n = inst.n;
    let nodes = m + n + 2;
    let source = m + n;
    let sink = m + n + 1;
    let mut cap = vec![vec![Rat::zero(); nodes]; nodes];
    for a in 0..m {
        cap[source][a] = inst.mu[a].clone();
    }
    for b in 0..n {
        cap[m + b][sink] = inst.nu[b].clone();
    }
    for a in 0..m {
        for b in 0..n {
            if !inst.is_forbidden(a, b) {
                // Any capacity ≥ total mass is effectively unbounded.
                cap[a][m + b] = Rat::from_integer(2.into());
            }
        }
    }
    let mut flow = Rat::zero();
    loop {
        // BFS for a shortest augmenting path.
        let mut parent = vec![usize::MAX; nodes];
        parent[source] = source;
        let mut queue = std::collections::VecDeque::from([source]);
        while let Some(u) = queue.pop_front() {
            for v in 0..nodes {
                if parent[v] == usize::MAX && cap[u][v].is_positive() {
                    parent[v] = u;
                    queue.push_back(v);
                }
            }
        }
        if parent[sink] == usize::MAX {
            break;
        }
        let mut bottleneck: Option<Rat> = None;
        let mut v = sink;
        while v != source {
            let u = parent[v];
            let c = cap[u][v].clone();
            bottleneck = Some(match bottleneck {
                None => c,
                Some(b) => b.min(c),
            });
            v = u;
        }
        let aug = bottleneck.expect("path has at least one arc");
        let mut v = sink;
        while v != source {
            let u = parent[v];
            cap[u][v] -= &aug;
            cap[v][u] += &aug;
            v = u;
        }
        flow += aug;
    }
    flow.is_one()
}

/// Every vertex of the transportation polytope restricted to finite arcs
/// (over the positive-mass points), as full-size plans. Exhaustive: only
/// meant for small instances.
pub fn vertex_plans(inst: &Instance) -> Vec<Plan> {
    let rows: Vec<usize> = (0..inst.m).filter(|&a| inst.mu[a].is_positive()).collect();
    let cols: Vec<usize> = (0..inst.n).filter(|&b| inst.nu[b].is_positive()).collect();
    let arcs: Vec<(usize, usize)> = {
        let mut v = Vec::new();
        for (ri, &a) in rows.iter().enumerate() {
            for (ci, &b) in cols.iter().enumerate() {
                if !inst.is_forbidden(a, b) {
                    v.push((ri, ci));
                }
            }
        }
        v
    };
    let k = rows.len() + cols.len() - 1;
    let mut plans = Vec::new();
    let mut seen: HashSet<Vec<Vec<Rat>>> = HashSet::new();
    if arcs.len() < k {
        return plans;
    }
    let mut choice: Vec<usize> = (0..k).collect();
    loop {
        let tree: Vec<(usize, usize)> = choice.iter().map(|&i| arcs[i]).collect();
        if let Some(mass) = solve_tree(&rows, &cols, inst, &tree) {
            if seen.insert(mass.clone()) {
                let mut full = vec![vec![Rat::zero(); inst.n]; inst.m];
                for (ri, &a) in rows.iter().enumerate() {
                    for (ci, &b) in cols.iter().enumerate() {
                        full[a][b] = mass[ri][ci].clone();
                    }
                }
                plans.push(Plan::new(inst, full).expect("tree solve has the margins"));
            }
        }
        // Next k-combination in lexicographic order.
        let mut i = k;
        loop {
            if i == 0 {
                return plans;
            }
            i -= 1;
            if choice[i] != i + arcs.len() - k {
                break;
            }
        }
        choice[i] += 1;
        for j in i + 1..k {
            choice[j] = choice[j - 1] + 1;
        }
    }
}

/// Solve the basic solution supported on a candidate spanning tree of
/// reduced arcs; `None` when the arcs do not form a spanning tree or the
/// solution goes negative.
fn solve_tree(
    rows: &[usize],
    cols: &[usize],
    inst: &Instance,
    tree: &[(usize, usize)],
) -> Option<Vec<Vec<Rat>>> {
    let m = rows.len();
    let n = cols.len();
    let mut mass = vec![vec![Rat::zero(); n]; m];
    let mut row_left: Vec<Rat> = rows.iter().map(|&a| inst.mu[a].clone()).collect();
    let mut col_left: Vec<Rat> = cols.iter().map(|&b| inst.nu[b].clone()).collect();
    let mut alive: Vec<(usize, usize)> = tree.to_vec();
    let mut row_deg = vec![0usize; m];
    let mut col_deg = vec![0usize; n];
    for &(i, j) in &alive {
        row_deg[i] += 1;
        col_deg[j] += 1;
    }
    // Peel leaves; a spanning tree resolves completely.
    while !alive.is_empty() {
        let pos = alive.iter().position(|&(i, j)| {
            (row_deg[i] == 1) || (col_deg[j] == 1)
        })?;
        let (i, j) = alive.swap_remove(pos);
        let v = if row_deg[i] == 1 {
            row_left[i].clone()
        } else {
            col_left[j].clone()
        };
        if v.is_negative() {
            return None;
        }
        mass[i][j] = v.clone();
        row_left[i] -= &v;
        col_left[j] -= &v;
        row_deg[i] -= 1;
        col_deg[j] -= 1;
    }
    if row_left.iter().any(|r| !r.is_zero()) || col_left.iter().any(|c| !c.is_zero()) {
        return None;
    }
    Some(mass)
}

/// Primal value and marginal multipliers via the dense general simplex, as
/// an independent cross-check of the transportation code path. Returns
/// `None` when no finite plan exists.
#[cfg(test)]
pub(crate) fn primal_by_lp(inst: &Instance) -> Option<(Rat, Vec<Rat>, Vec<Rat>)> {
    let rows: Vec<usize> = (0..inst.m).filter(|&a| inst.mu[a].is_positive()).collect();
    let cols: Vec<usize> = (0..inst.n).filter(|&b| inst.nu[b].is_positive()).collect();
    let mut arcs = Vec::new();
    for (ri, &a) in rows.iter().enumerate() {
        for (ci, &b) in cols.iter().enumerate() {
            if let ExtRat::Fin(c) = &inst.cost[a][b] {
                arcs.push((ri, ci, c.clone()));
            }
        }
    }
    let mut lp_rows: Vec<(Vec<(usize, Rat)>, Rat)> = Vec::new();
    for (ri, &a) in rows.iter().enumerate() {
        let coeffs = arcs
            .iter()
            .enumerate()
            .filter(|(_, (r, _, _))| *r == ri)
            .map(|(v, _)| (v, Rat::one()))
            .collect();
        lp_rows.push((coeffs, inst.mu[a].clone()));
    }
    for (ci, &b) in cols.iter().enumerate() {
        let coeffs = arcs
            .iter()
            .enumerate()
            .filter(|(_, (_, c, _))| *c == ci)
            .map(|(v, _)| (v, Rat::one()))
            .collect();
        lp_rows.push((coeffs, inst.nu[b].clone()));
    }
    let lp = Lp {
        num_vars: arcs.len(),
        rows: lp_rows,
        objective: arcs.iter().map(|(_, _, c)| c.clone()).collect(),
    };
    match solve_lp(&lp) {
        LpResult::Optimal { value, dual, .. } => {
            let mut f = vec![Rat::zero(); inst.m];
            let mut g = vec![Rat::zero(); inst.n];
            for (ri, &a) in rows.iter().enumerate() {
                f[a] = dual[ri].clone();
            }
            for (ci, &b) in cols.iter().enumerate() {
                g[b] = dual[rows.len() + ci].clone();
            }
            Some((value, f, g))
        }
        LpResult::Infeasible => None,
        LpResult::Unbounded => unreachable!("bounded by nonnegative costs on a polytope"),
    }
}

/// Minimum enumerated cost over the oracle grid, for tests: `+inf` when no
/// finite plan lies on the grid.
pub fn oracle_value(inst: &Instance, denom: u64) -> Result<ExtRat, Error> {
    let plans = enumerate_couplings(inst, denom)?;
    Ok(plans
        .iter()
        .map(|p| cost_of_plan(inst, p))
        .min()
        .unwrap_or(ExtRat::PlusInf))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ext::rat;

    fn fin(v: i64) -> ExtRat {
        ExtRat::Fin(rat(v, 1))
    }

    /// Two-point instance with a point mass on each side and cost rows
    /// [[0,0],[0,1]]: the only plan pairs the two mass points at cost 1.
    fn point_mass_2x2() -> Instance {
        Instance::new(
            vec![rat(0, 1), rat(1, 1)],
            vec![rat(0, 1), rat(1, 1)],
            vec![vec![fin(0), fin(0)], vec![fin(0), fin(1)]],
        )
        .unwrap()
    }

    fn staircase3() -> Instance {
        let third = rat(1, 3);
        Instance::new(
            vec![third.clone(); 3],
            vec![third.clone(); 3],
            vec![
                vec![fin(1), ExtRat::PlusInf, ExtRat::PlusInf],
                vec![fin(0), fin(1), ExtRat::PlusInf],
                vec![fin(0), fin(0), fin(1)],
            ],
        )
        .unwrap()
    }

    #[test]
    fn point_masses_pay_their_single_arc() {
        let res = solve_primal(&point_mass_2x2());
        assert_eq!(res.status, PrimalStatus::Optimal);
        assert_eq!(res.value, fin(1));
        let plan = res.plan.unwrap();
        assert_eq!(plan.mass[1][1], rat(1, 1));
        assert_eq!(plan.support(), vec![(1, 1)]);
    }

    #[test]
    fn staircase_three_is_forced_onto_the_diagonal() {
        let inst = staircase3();
        let res = solve_primal(&inst);
        assert_eq!(res.value, fin(1));
        let plan = res.plan.unwrap();
        for i in 0..3 {
            assert_eq!(plan.mass[i][i], rat(1, 3));
        }
        // The oracle agrees: exactly one finite plan on the 1/3 grid.
        let finite: Vec<Plan> = enumerate_couplings(&inst, 3)
            .unwrap()
            .into_iter()
            .filter(|p| p.is_finite(&inst))
            .collect();
        assert_eq!(finite.len(), 1);
        assert_eq!(finite[0].mass, plan.mass);
    }

    #[test]
    fn all_forbidden_row_is_infeasible() {
        let inst = Instance::new(
            vec![rat(1, 1), rat(0, 1)],
            vec![rat(1, 2), rat(1, 2)],
            vec![
                vec![ExtRat::PlusInf, ExtRat::PlusInf],
                vec![fin(0), fin(0)],
            ],
        )
        .unwrap();
        let res = solve_primal(&inst);
        assert_eq!(res.status, PrimalStatus::InfeasibleFinite);
        assert_eq!(res.value, ExtRat::PlusInf);
        assert!(res.plan.is_none());
        assert!(!finite_feasible(&inst));
    }

    #[test]
    fn enumerates_the_two_uniform_half_tables() {
        let inst = Instance::new(
            vec![rat(1, 2), rat(1, 2)],
            vec![rat(1, 2), rat(1, 2)],
            vec![vec![fin(1), fin(2)], vec![fin(2), fin(1)]],
        )
        .unwrap();
        let plans = enumerate_couplings(&inst, 2).unwrap();
        assert_eq!(plans.len(), 2);
        let diag = vec![
            vec![rat(1, 2), rat(0, 1)],
            vec![rat(0, 1), rat(1, 2)],
        ];
        let anti = vec![
            vec![rat(0, 1), rat(1, 2)],
            vec![rat(1, 2), rat(0, 1)],
        ];
        assert!(plans.iter().any(|p| p.mass == diag));
        assert!(plans.iter().any(|p| p.mass == anti));
    }

    #[test]
    fn enumerates_the_unique_delta_coupling() {
        let inst = Instance::new(
            vec![rat(1, 1)],
            vec![rat(1, 1)],
            vec![vec![fin(7)]],
        )
        .unwrap();
        let plans = enumerate_couplings(&inst, 1).unwrap();
        assert_eq!(plans.len(), 1);
        assert_eq!(plans[0].mass[0][0], rat(1, 1));
    }

    #[test]
    fn enumeration_guard_rejects_large_requests() {
        let inst = staircase3();
        assert!(matches!(
            enumerate_couplings(&inst, 7),
            Err(Error::TooLarge(_))
        ));
        assert!(matches!(
            enumerate_couplings(&inst, 2),
            Err(Error::BadDenom(_))
        ));
    }

    #[test]
    fn feasibility_matches_the_solver_and_product_plans() {
        assert!(finite_feasible(&staircase3()));
        // All-finite: the product coupling works.
        let inst = Instance::new(
            vec![rat(1, 4), rat(3, 4)],
            vec![rat(2, 3), rat(1, 3)],
            vec![vec![fin(5), fin(1)], vec![fin(2), fin(8)]],
        )
        .unwrap();
        assert!(finite_feasible(&inst));
    }

    #[test]
    fn vertices_of_the_uniform_square_are_the_two_permutations() {
        let inst = Instance::new(
            vec![rat(1, 2), rat(1, 2)],
            vec![rat(1, 2), rat(1, 2)],
            vec![vec![fin(1), fin(2)], vec![fin(2), fin(1)]],
        )
        .unwrap();
        let verts = vertex_plans(&inst);
        assert_eq!(verts.len(), 2);
    }

    #[test]
    fn vertex_costs_bound_the_optimum_from_above() {
        let inst = staircase3();
        let verts = vertex_plans(&inst);
        assert!(!verts.is_empty());
        let best = verts
            .iter()
            .map(|p| cost_of_plan(&inst, p))
            .min()
            .unwrap();
        assert_eq!(best, solve_primal(&inst).value);
    }

    #[test]
    fn lp_cross_check_agrees_with_the_simplex() {
        for inst in [staircase3(), point_mass_2x2()] {
            let (value, _, _) = primal_by_lp(&inst).unwrap();
            assert_eq!(ExtRat::Fin(value), solve_primal(&inst).value);
        }
    }
}
