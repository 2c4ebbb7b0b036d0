//! Dense exact-rational two-phase simplex.
//!
//! Solves min c·x subject to A·x = b, x ≥ 0, for the small dense LPs this
//! crate needs beyond plain transportation structure (signed couplings,
//! band duals, canonicalization, face sampling). Bland's rule on both the
//! entering and leaving choices guarantees termination; every number is an
//! exact rational.
//!
//! The optimal dual vector is read off the artificial columns of the final
//! tableau, so primal/dual value equality holds by construction.

use crate::ext::Rat;
use num::traits::{Signed, Zero};

/// An LP in standard equality form.
pub(crate) struct Lp {
    pub num_vars: usize,
    /// Each row: sparse (variable, coefficient) list and right-hand side.
    pub rows: Vec<(Vec<(usize, Rat)>, Rat)>,
    /// Minimized objective, one coefficient per variable.
    pub objective: Vec<Rat>,
}

pub(crate) enum LpResult {
    Optimal {
        value: Rat,
        x: Vec<Rat>,
        /// One multiplier per input row (zero for redundant rows); satisfies
        /// `objective[j] ≥ Σ_r dual[r]·A[r][j]` with equality on basic
        /// variables, and `dual·b = value`.
        dual: Vec<Rat>,
    },
    Infeasible,
    Unbounded,
}

struct Tableau {
    /// `rows × (num_vars + num_rows + 1)`: variables, artificials, rhs.
    t: Vec<Vec<Rat>>,
    /// Basic variable of each row (column index into `t`).
    basis: Vec<usize>,
    /// Objective row over all columns, kept canonical w.r.t. the basis.
    obj: Vec<Rat>,
    /// Negated objective constant: current objective value.
    value: Rat,
}

impl Tableau {
    fn width(&self) -> usize {
        self.t[0].len()
    }

    fn rhs_col(&self) -> usize {
        self.width() - 1
    }

    /// Install a fresh objective (length = all columns) and make it
    /// canonical by eliminating the basic columns.
    fn set_objective(&mut self, cost: &[Rat]) {
        self.obj = cost.to_vec();
        self.obj.push(Rat::zero());
        self.value = Rat::zero();
        for r in 0..self.t.len() {
            let cb = self.obj[self.basis[r]].clone();
            if cb.is_zero() {
                continue;
            }
            for col in 0..self.width() {
                let delta = &cb * &self.t[r][col];
                self.obj[col] -= delta;
            }
            self.value += &cb * &self.t[r][self.rhs_col()];
        }
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let inv = self.t[row][col].clone();
        for c in 0..self.width() {
            self.t[row][c] = &self.t[row][c] / &inv;
        }
        for r in 0..self.t.len() {
            if r == row || self.t[r][col].is_zero() {
                continue;
            }
            let factor = self.t[r][col].clone();
            for c in 0..self.width() {
                let delta = &factor * &self.t[row][c];
                self.t[r][c] -= delta;
            }
        }
        if !self.obj[col].is_zero() {
            let factor = self.obj[col].clone();
            for c in 0..self.width() {
                let delta = &factor * &self.t[row][c];
                self.obj[c] -= delta;
            }
            self.value += &factor * &self.t[row][self.rhs_col()];
        }
        self.basis[row] = col;
    }

    /// Bland iteration until optimal or unbounded. `allowed` bounds the
    /// entering columns (artificials are banned in phase 2).
    fn run(&mut self, allowed: usize) -> bool {
        loop {
            let entering = (0..allowed).find(|&j| self.obj[j].is_negative());
            let col = match entering {
                Some(j) => j,
                None => return true,
            };
            let rhs_col = self.rhs_col();
            let mut best: Option<(Rat, usize)> = None;
            for r in 0..self.t.len() {
                if !self.t[r][col].is_positive() {
                    continue;
                }
                let ratio = &self.t[r][rhs_col] / &self.t[r][col];
                let better = match &best {
                    None => true,
                    Some((b, brow)) => {
                        ratio < *b || (ratio == *b && self.basis[r] < self.basis[*brow])
                    }
                };
                if better {
                    best = Some((ratio, r));
                }
            }
            let row = match best {
                Some((_, r)) => r,
                None => return false,
            };
            self.pivot(row, col);
        }
    }
}

pub(crate) fn solve_lp(lp: &Lp) -> LpResult {
    let num_rows = lp.rows.len();
    if num_rows == 0 {
        // Unconstrained: the origin is optimal unless some coefficient
        // still wants to grow a variable.
        return if lp.objective.iter().any(|c| c.is_negative()) {
            LpResult::Unbounded
        } else {
            LpResult::Optimal {
                value: Rat::zero(),
                x: vec![Rat::zero(); lp.num_vars],
                dual: Vec::new(),
            }
        };
    }
    let num_cols = lp.num_vars + num_rows + 1;
    let mut t = vec![vec![Rat::zero(); num_cols]; num_rows];
    let mut flipped = vec![false; num_rows];
    for (r, (coeffs, rhs)) in lp.rows.iter().enumerate() {
        let flip = rhs.is_negative();
        flipped[r] = flip;
        for (var, coef) in coeffs {
            debug_assert!(*var < lp.num_vars);
            let v = if flip { -coef } else { coef.clone() };
            t[r][*var] += v;
        }
        t[r][lp.num_vars + r] = Rat::from_integer(1.into());
        t[r][num_cols - 1] = if flip { -rhs } else { rhs.clone() };
    }
    let mut tab = Tableau {
        t,
        basis: (0..num_rows).map(|r| lp.num_vars + r).collect(),
        obj: Vec::new(),
        value: Rat::zero(),
    };

    // Phase 1: minimize the sum of artificials.
    let mut phase1_cost = vec![Rat::zero(); lp.num_vars + num_rows];
    for c in phase1_cost.iter_mut().skip(lp.num_vars) {
        *c = Rat::from_integer(1.into());
    }
    tab.set_objective(&phase1_cost);
    let bounded = tab.run(lp.num_vars + num_rows);
    debug_assert!(bounded, "phase 1 is bounded below by zero");
    if !tab.value.is_zero() {
        return LpResult::Infeasible;
    }

    // Drive remaining artificials out of the basis; rows that admit no
    // pivot are redundant and are neutralized (their artificial stays basic
    // at zero and the row can never change any real variable again).
    let mut redundant = vec![false; num_rows];
    for r in 0..num_rows {
        if tab.basis[r] < lp.num_vars {
            continue;
        }
        let col = (0..lp.num_vars).find(|&j| !tab.t[r][j].is_zero());
        match col {
            Some(j) => tab.pivot(r, j),
            None => redundant[tab.basis[r] - lp.num_vars] = true,
        }
    }

    // Phase 2 on the true objective, artificial columns banned.
    let mut phase2_cost = lp.objective.clone();
    phase2_cost.resize(lp.num_vars + num_rows, Rat::zero());
    tab.set_objective(&phase2_cost);
    if !tab.run(lp.num_vars) {
        return LpResult::Unbounded;
    }

    let rhs_col = tab.rhs_col();
    let mut x = vec![Rat::zero(); lp.num_vars];
    for (r, &bv) in tab.basis.iter().enumerate() {
        if bv < lp.num_vars {
            x[bv] = tab.t[r][rhs_col].clone();
        }
    }
    // Dual multipliers from the artificial columns' reduced costs, with the
    // row-flip signs undone. Redundant rows get zero.
    let mut dual = vec![Rat::zero(); num_rows];
    for r in 0..num_rows {
        if redundant[r] {
            continue;
        }
        let y = -tab.obj[lp.num_vars + r].clone();
        dual[r] = if flipped[r] { -y } else { y };
    }
    LpResult::Optimal {
        value: tab.value.clone(),
        x,
        dual,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ext::rat;

    fn lp(
        num_vars: usize,
        rows: Vec<(Vec<(usize, i64)>, i64)>,
        objective: Vec<i64>,
    ) -> Lp {
        Lp {
            num_vars,
            rows: rows
                .into_iter()
                .map(|(cs, b)| {
                    (
                        cs.into_iter().map(|(v, c)| (v, rat(c, 1))).collect(),
                        rat(b, 1),
                    )
                })
                .collect(),
            objective: objective.into_iter().map(|c| rat(c, 1)).collect(),
        }
    }

    #[test]
    fn solves_a_small_assignment() {
        // min x0 + 2x1 + 2x2 + x3 ; x0+x1 = 1, x2+x3 = 1, x0+x2 = 1, x1+x3 = 1.
        let p = lp(
            4,
            vec![
                (vec![(0, 1), (1, 1)], 1),
                (vec![(2, 1), (3, 1)], 1),
                (vec![(0, 1), (2, 1)], 1),
                (vec![(1, 1), (3, 1)], 1),
            ],
            vec![1, 2, 2, 1],
        );
        match solve_lp(&p) {
            LpResult::Optimal { value, x, dual } => {
                assert_eq!(value, rat(2, 1));
                assert_eq!(x[0], rat(1, 1));
                assert_eq!(x[3], rat(1, 1));
                // Dual value matches: one constraint is redundant.
                let b = [rat(1, 1), rat(1, 1), rat(1, 1), rat(1, 1)];
                let dv: Rat = dual.iter().zip(&b).map(|(y, b)| y * b).sum();
                assert_eq!(dv, rat(2, 1));
            }
            _ => panic!("expected optimum"),
        }
    }

    #[test]
    fn detects_infeasibility() {
        // x0 = 1 and x0 = 2 cannot both hold.
        let p = lp(1, vec![(vec![(0, 1)], 1), (vec![(0, 1)], 2)], vec![0]);
        assert!(matches!(solve_lp(&p), LpResult::Infeasible));
    }

    #[test]
    fn detects_unboundedness() {
        // min −x0 with x0 − x1 = 0: both can grow without bound.
        let p = lp(2, vec![(vec![(0, 1), (1, -1)], 0)], vec![-1, 0]);
        assert!(matches!(solve_lp(&p), LpResult::Unbounded));
    }

    #[test]
    fn handles_negative_rhs_by_flipping() {
        // −x0 = −3 ⇒ x0 = 3.
        let p = lp(1, vec![(vec![(0, -1)], -3)], vec![1]);
        match solve_lp(&p) {
            LpResult::Optimal { value, x, dual } => {
                assert_eq!(x[0], rat(3, 1));
                assert_eq!(value, rat(3, 1));
                // objective[0] = 1 = dual·A[·][0] = dual[0]·(−1) ⇒ dual = −1,
                // and dual·b = (−1)(−3) = 3 = value.
                assert_eq!(dual[0], rat(-1, 1));
            }
            _ => panic!("expected optimum"),
        }
    }

    #[test]
    fn dual_certifies_optimality_on_a_degenerate_lp() {
        // min x0 + x1 subject to x0 + x1 + x2 = 2, x0 − x1 = 0, and a
        // redundant duplicate of the second row.
        let p = lp(
            3,
            vec![
                (vec![(0, 1), (1, 1), (2, 1)], 2),
                (vec![(0, 1), (1, -1)], 0),
                (vec![(0, 1), (1, -1)], 0),
            ],
            vec![1, 1, 0],
        );
        match solve_lp(&p) {
            LpResult::Optimal { value, x, dual } => {
                assert_eq!(value, rat(0, 1));
                assert!(x[0].is_zero() && x[1].is_zero());
                // Dual feasibility on every column.
                let a = [
                    [rat(1, 1), rat(1, 1), rat(1, 1)],
                    [rat(1, 1), rat(-1, 1), rat(0, 1)],
                    [rat(1, 1), rat(-1, 1), rat(0, 1)],
                ];
                let c = [rat(1, 1), rat(1, 1), rat(0, 1)];
                for j in 0..3 {
                    let lhs: Rat = (0..3).map(|r| &dual[r] * &a[r][j]).sum();
                    assert!(lhs <= c[j]);
                }
            }
            _ => panic!("expected optimum"),
        }
    }
}
