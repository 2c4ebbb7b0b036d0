//! Cyclical-monotonicity checking and optimality certificates.
//!
//! A plan is c-cyclically monotone when no finite cycle of support arcs
//! can lower the total cost by shifting each arc's B-point to the next
//! arc's. Strong certificates pair the plan with potentials dominated by
//! the cost on every finite arc between positive-mass points and tight on
//! the support; weak certificates relax domination to the essential arcs —
//! those that some finite plan actually uses.

use crate::error::Error;
use crate::ext::{ExtRat, PotVal, Rat};
use crate::instance::{cost_of_plan, Instance, Plan, Potentials};
use crate::lp::{solve_lp, Lp, LpResult};
use crate::solver::{solve_primal, solve_reduced_with};
use num::traits::{Signed, Zero};
use std::collections::BTreeSet;

/// A cycle of support arcs witnessing a cyclical-monotonicity violation:
/// reassigning each arc's B-point to the next arc's B-point changes the
/// total cost by `defect` < 0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cycle {
    pub arcs: Vec<(usize, usize)>,
    pub defect: Rat,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CyclicalResult {
    Valid,
    Violation(Cycle),
}

/// Search support cycles of length 2..=`max_len` for a negative defect.
///
/// Cycles visit pairwise-distinct A-points (longer repetitions reduce to
/// this case), and a shifted arc of infinite cost makes the defect +∞,
/// which is never a violation. Lengths are tried in increasing order with
/// depth-first lexicographic arc order, so the first hit is the shortest,
/// lexicographically smallest witness.
pub fn check_cyclical(inst: &Instance, pi: &Plan, max_len: usize) -> CyclicalResult {
    debug_assert!(max_len >= 2);
    debug_assert!(pi.is_finite(inst));
    let support = pi.support();
    let distinct_rows = support.iter().map(|&(a, _)| a).collect::<BTreeSet<_>>().len();
    let limit = max_len.min(distinct_rows);
    if limit < 2 {
        return CyclicalResult::Valid;
    }
    let targets: Vec<usize> = support
        .iter()
        .map(|&(_, b)| b)
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    // Best possible contribution of each arc to a defect: its cheapest
    // finite shift minus its own cost. None when every shift is forbidden,
    // which bars the arc from violating cycles entirely.
    let deltas: Vec<Option<Rat>> = support
        .iter()
        .map(|&(a, b)| {
            let own = inst.cost[a][b].as_rat().expect("support of a finite plan");
            targets
                .iter()
                .filter_map(|&t| inst.cost[a][t].as_rat())
                .min()
                .map(|best| best - own)
        })
        .collect();
    // Unless some single term can dip below zero, no defect can.
    let global_min = match deltas.iter().flatten().min().cloned() {
        Some(g) if g.is_negative() => g,
        _ => return CyclicalResult::Valid,
    };

    let mut chosen: Vec<usize> = Vec::new();
    let mut used_rows: BTreeSet<usize> = BTreeSet::new();
    for len in 2..=limit {
        if let Some(cycle) = dfs(
            inst,
            &support,
            &deltas,
            &global_min,
            len,
            &mut chosen,
            &mut used_rows,
            &Rat::zero(),
        ) {
            return CyclicalResult::Violation(cycle);
        }
    }
    CyclicalResult::Valid
}

/// Extend the arc prefix in `chosen` to a violating cycle of exactly
/// `len` arcs; `partial` carries the defect terms settled so far.
#[allow(clippy::too_many_arguments)]
fn dfs(
    inst: &Instance,
    support: &[(usize, usize)],
    deltas: &[Option<Rat>],
    global_min: &Rat,
    len: usize,
    chosen: &mut Vec<usize>,
    used_rows: &mut BTreeSet<usize>,
    partial: &Rat,
) -> Option<Cycle> {
    if chosen.len() == len {
        // Close the cycle back to the first arc's B-point.
        let (a_last, b_last) = support[*chosen.last().unwrap()];
        let b_first = support[chosen[0]].1;
        let shifted = inst.cost[a_last][b_first].as_rat()?;
        let own = inst.cost[a_last][b_last].as_rat().unwrap();
        let defect = partial + shifted - own;
        if defect.is_negative() {
            return Some(Cycle {
                arcs: chosen.iter().map(|&s| support[s]).collect(),
                defect,
            });
        }
        return None;
    }
    // Remaining contributions can't push the defect below zero: prune.
    let outstanding = len - chosen.len() + 1;
    let bound = partial + global_min * Rat::from_integer(outstanding.into());
    if !bound.is_negative() {
        return None;
    }
    let start = match chosen.first() {
        None => 0,
        Some(&first) => first + 1,
    };
    for s in start..support.len() {
        let (a, b) = support[s];
        if used_rows.contains(&a) || deltas[s].is_none() {
            continue;
        }
        // The predecessor's term becomes known once this arc is fixed.
        let step = match chosen.last() {
            None => Rat::zero(),
            Some(&prev) => {
                let (pa, pb) = support[prev];
                match inst.cost[pa][b].as_rat() {
                    Some(shifted) => shifted - inst.cost[pa][pb].as_rat().unwrap(),
                    // Infinite shifted cost: defect is +∞ however the
                    // cycle continues through this pair.
                    None => continue,
                }
            }
        };
        chosen.push(s);
        used_rows.insert(a);
        let next = partial + step;
        let hit = dfs(
            inst, support, deltas, global_min, len, chosen, used_rows, &next,
        );
        used_rows.remove(&a);
        chosen.pop();
        if hit.is_some() {
            return hit;
        }
    }
    None
}

/// Potentials paired with the two defining clauses of a strong
/// certificate.
#[derive(Clone, Debug)]
pub struct StrongCertificate {
    pub potentials: Potentials,
    /// f⊕g ≤ c on every finite arc between positive-mass points.
    pub domination_everywhere: bool,
    /// f⊕g = c on every positive-mass arc of the plan.
    pub tight_on_support: bool,
}

impl StrongCertificate {
    pub fn is_valid(&self) -> bool {
        self.domination_everywhere && self.tight_on_support
    }
}

/// Evaluate both strong-certificate clauses for given potentials.
pub fn evaluate_strong(inst: &Instance, pi: &Plan, phi: &Potentials) -> StrongCertificate {
    let domination_everywhere = inst
        .active_arcs()
        .iter()
        .all(|&(a, b)| phi.sum(a, b).le_cost(&inst.cost[a][b]));
    let tight_on_support = pi.support().iter().all(|&(a, b)| {
        matches!(
            (phi.sum(a, b), &inst.cost[a][b]),
            (PotVal::Fin(s), ExtRat::Fin(c)) if s == *c
        )
    });
    StrongCertificate {
        potentials: phi.clone(),
        domination_everywhere,
        tight_on_support,
    }
}

/// Construct strong-certificate potentials for the plan, or `None` when
/// no admissible pair exists.
///
/// Tightness forces the potentials along support arcs, so each support
/// component is propagated from its lowest A-point (pinned to f = 0) and
/// any inconsistent support loop refutes the certificate outright. The
/// remaining freedom is one shift per component, constrained by
/// domination on component-crossing arcs: a difference-constraint system
/// solved by Bellman–Ford, infeasible exactly when it has a negative
/// cycle.
pub fn build_strong_potentials(inst: &Instance, pi: &Plan) -> Option<StrongCertificate> {
    debug_assert!(pi.is_finite(inst));
    let rows: Vec<usize> = (0..inst.m).filter(|&a| inst.mu[a].is_positive()).collect();
    let cols: Vec<usize> = (0..inst.n).filter(|&b| inst.nu[b].is_positive()).collect();
    let row_pos = |a: usize| rows.iter().position(|&r| r == a).unwrap();
    let col_pos = |b: usize| cols.iter().position(|&c| c == b).unwrap();
    let m = rows.len();
    let n = cols.len();
    let support = pi.support();

    // Propagate tight values over each support component.
    let mut f: Vec<Option<Rat>> = vec![None; m];
    let mut g: Vec<Option<Rat>> = vec![None; n];
    let mut comp = vec![usize::MAX; m + n];
    let mut ncomp = 0;
    for root in 0..m {
        if comp[root] != usize::MAX {
            continue;
        }
        comp[root] = ncomp;
        f[root] = Some(Rat::zero());
        let mut queue = vec![root];
        while let Some(node) = queue.pop() {
            for &(a, b) in &support {
                let (i, j) = (row_pos(a), col_pos(b));
                if node < m && i != node {
                    continue;
                }
                if node >= m && j != node - m {
                    continue;
                }
                let c = inst.cost[a][b].as_rat().expect("support of a finite plan");
                let (fi, gj) = (f[i].clone(), g[j].clone());
                match (fi, gj) {
                    (Some(fi), Some(gj)) => {
                        if fi + gj != *c {
                            // An inconsistent support loop: tightness is
                            // unsatisfiable however the gauge is chosen.
                            return None;
                        }
                    }
                    (Some(fi), None) => {
                        g[j] = Some(c - fi);
                        comp[m + j] = comp[node];
                        queue.push(m + j);
                    }
                    (None, Some(gj)) => {
                        f[i] = Some(c - gj);
                        comp[i] = comp[node];
                        queue.push(i);
                    }
                    (None, None) => unreachable!("one endpoint is already reached"),
                }
            }
        }
        ncomp += 1;
    }
    // Every positive-mass column is covered by some support arc.
    debug_assert!(comp.iter().all(|&c| c != usize::MAX));
    let f: Vec<Rat> = f.into_iter().map(Option::unwrap).collect();
    let g: Vec<Rat> = g.into_iter().map(Option::unwrap).collect();

    // Domination across all finite active arcs, as difference constraints
    // on the per-component shifts τ: τ_u − τ_v ≤ slack for an arc from
    // component u to component v. Same-component arcs admit no freedom.
    let mut edges: Vec<(usize, usize, Rat)> = Vec::new();
    for (i, &a) in rows.iter().enumerate() {
        for (j, &b) in cols.iter().enumerate() {
            let Some(c) = inst.cost[a][b].as_rat() else {
                continue;
            };
            let slack = c - &f[i] - &g[j];
            let (u, v) = (comp[i], comp[m + j]);
            if u == v {
                if slack.is_negative() {
                    return None;
                }
            } else {
                // τ_u ≤ τ_v + slack: an edge v → u of length slack.
                edges.push((v, u, slack));
            }
        }
    }
    // Bellman–Ford from a virtual source at distance zero to every
    // component; n−1 relaxation rounds, then one more to detect negative
    // cycles.
    let mut tau = vec![Rat::zero(); ncomp];
    for round in 0..ncomp {
        let mut moved = false;
        for (v, u, w) in &edges {
            let cand = &tau[*v] + w;
            if cand < tau[*u] {
                if round + 1 == ncomp {
                    return None;
                }
                tau[*u] = cand;
                moved = true;
            }
        }
        if !moved {
            break;
        }
    }
    // One uniform shift keeps the system feasible; spend it to restore
    // f = 0 at the overall lowest positive-mass A-point.
    let base = tau[comp[0]].clone();
    let mut full_f = vec![PotVal::NegInf; inst.m];
    let mut full_g = vec![PotVal::NegInf; inst.n];
    for (i, &a) in rows.iter().enumerate() {
        full_f[a] = PotVal::Fin(&f[i] + &tau[comp[i]] - &base);
    }
    for (j, &b) in cols.iter().enumerate() {
        full_g[b] = PotVal::Fin(&g[j] - &tau[comp[m + j]] + &base);
    }
    let phi = Potentials::new(inst, full_f, full_g).expect("construction is admissible");
    let cert = evaluate_strong(inst, pi, &phi);
    debug_assert!(cert.is_valid());
    Some(cert)
}

/// The arcs that some finite plan gives positive mass, i.e. the complement
/// of the largest arc set negligible for every finite plan. Found by
/// maximizing each arc's mass over the finite-arc polytope, one exact LP
/// per arc.
pub fn essential_arcs(inst: &Instance) -> Result<Vec<(usize, usize)>, Error> {
    if !crate::solver::finite_feasible(inst) {
        return Err(Error::NotFeasible);
    }
    let mut out = Vec::new();
    for (a, b) in inst.active_arcs() {
        let red = solve_reduced_with(inst, |x, y| {
            if inst.is_forbidden(x, y) {
                None
            } else if (x, y) == (a, b) {
                Some(-Rat::from_integer(1.into()))
            } else {
                Some(Rat::zero())
            }
        });
        debug_assert!(red.sol.allowed_feasible);
        if red.sol.value.is_negative() {
            out.push((a, b));
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CrossCheck {
    /// The certified value matches an independent primal solve.
    Confirmed,
    /// It does not; a solver defect, never a property of the input.
    InternalBug,
}

/// Potentials paired with the two weak-certificate clauses and the
/// essential-arc set they were judged against.
#[derive(Clone, Debug)]
pub struct WeakCertificate {
    pub potentials: Potentials,
    pub essential_arcs: Vec<(usize, usize)>,
    /// f⊕g ≤ c on every essential arc.
    pub domination_on_essential: bool,
    /// f⊕g = c on every positive-mass arc of the plan.
    pub tight_on_support: bool,
    /// Populated for valid certificates: the implied optimality claim is
    /// re-verified against `solve_primal`.
    pub cross_check: Option<CrossCheck>,
}

impl WeakCertificate {
    pub fn is_valid(&self) -> bool {
        self.domination_on_essential && self.tight_on_support
    }
}

/// Judge the weak-certificate clauses: domination may fail on arcs no
/// finite plan can use without invalidating the certificate.
pub fn check_weak_certificate(
    inst: &Instance,
    pi: &Plan,
    phi: &Potentials,
) -> Result<WeakCertificate, Error> {
    let essential = essential_arcs(inst)?;
    let domination_on_essential = essential
        .iter()
        .all(|&(a, b)| phi.sum(a, b).le_cost(&inst.cost[a][b]));
    let tight_on_support = pi.support().iter().all(|&(a, b)| {
        matches!(
            (phi.sum(a, b), &inst.cost[a][b]),
            (PotVal::Fin(s), ExtRat::Fin(c)) if s == *c
        )
    });
    let cross_check = (domination_on_essential && tight_on_support).then(|| {
        if cost_of_plan(inst, pi) == solve_primal(inst).value {
            CrossCheck::Confirmed
        } else {
            CrossCheck::InternalBug
        }
    });
    Ok(WeakCertificate {
        potentials: phi.clone(),
        essential_arcs: essential,
        domination_on_essential,
        tight_on_support,
        cross_check,
    })
}

/// Minimum over valid strong certificates of the f⊕g range across finite
/// arcs between positive-mass points; `None` when no strong certificate
/// exists.
///
/// Instances whose support is the diagonal of a lower-triangular cost get
/// a closed-form optimum: tightness pins g = c(i,i) − f(i), chaining the
/// first-subdiagonal constraints maximizes every f difference at once,
/// and the result is optimal whenever it is feasible (checked exactly).
/// Everything else falls back to a small exact LP.
pub fn minimal_certificate_spread(inst: &Instance, pi: &Plan) -> Option<Rat> {
    if let Some(spread) = triangular_spread(inst, pi) {
        return Some(spread);
    }
    spread_by_lp(inst, pi)
}

fn triangular_spread(inst: &Instance, pi: &Plan) -> Option<Rat> {
    let n = inst.m;
    if inst.n != n || n < 2 {
        return None;
    }
    let all_positive = inst.mu.iter().chain(inst.nu.iter()).all(|v| v.is_positive());
    let diagonal_support = pi.support() == (0..n).map(|i| (i, i)).collect::<Vec<_>>();
    let lower_triangular = (0..n).all(|i| (i + 1..n).all(|j| inst.is_forbidden(i, j)));
    let subdiagonal_finite = (1..n).all(|i| !inst.is_forbidden(i, i - 1));
    if !(all_positive && diagonal_support && lower_triangular && subdiagonal_finite) {
        return None;
    }
    let cost = |i: usize, j: usize| inst.cost[i][j].as_rat();
    let mut f = vec![Rat::zero(); n];
    for i in 1..n {
        let step = cost(i, i - 1).unwrap() - cost(i - 1, i - 1).unwrap();
        if step.is_positive() {
            // A positive step breaks the chain argument; let the LP decide.
            return None;
        }
        f[i] = &f[i - 1] + step;
    }
    // Feasibility of the chained candidate on every finite arc; failure
    // here defers to the LP rather than proving non-existence.
    let g: Vec<Rat> = (0..n).map(|i| cost(i, i).unwrap() - &f[i]).collect();
    let mut lo: Option<Rat> = None;
    let mut hi: Option<Rat> = None;
    for i in 0..n {
        for j in 0..=i {
            let c = cost(i, j).unwrap();
            let sum = &f[i] + &g[j];
            if &sum > c {
                return None;
            }
            lo = Some(match lo {
                None => sum.clone(),
                Some(l) => l.min(sum.clone()),
            });
            hi = Some(match hi {
                None => sum,
                Some(h) => h.max(sum),
            });
        }
    }
    // Every certificate satisfies f(i) − f(j) ≤ the chained sum, so its
    // minimum tensor value sits at or below the candidate's, while the
    // maximum is pinned to the diagonal: the candidate's range is optimal.
    Some(hi.unwrap() - lo.unwrap())
}

/// Exact LP: minimize t_hi − t_lo subject to tightness on support,
/// domination on active arcs, and t_lo ≤ f⊕g ≤ t_hi across active arcs.
fn spread_by_lp(inst: &Instance, pi: &Plan) -> Option<Rat> {
    let rows: Vec<usize> = (0..inst.m).filter(|&a| inst.mu[a].is_positive()).collect();
    let cols: Vec<usize> = (0..inst.n).filter(|&b| inst.nu[b].is_positive()).collect();
    let active = inst.active_arcs();
    let support = pi.support();
    let nf = rows.len();
    let ng = cols.len();
    // Split variables: f±, g±, t_hi±, t_lo±, then one slack per
    // inequality row.
    let fp = |i: usize| 2 * i;
    let gp = |j: usize| 2 * nf + 2 * j;
    let thi = 2 * nf + 2 * ng;
    let tlo = thi + 2;
    let mut num_vars = tlo + 2;
    let mut lp_rows: Vec<(Vec<(usize, Rat)>, Rat)> = Vec::new();
    let one = || Rat::from_integer(1.into());
    let pair = |base: usize, sign: i64| {
        let w = Rat::from_integer(sign.into());
        [(base, w.clone()), (base + 1, -w)]
    };
    for &(a, b) in &active {
        let i = rows.iter().position(|&r| r == a).unwrap();
        let j = cols.iter().position(|&c| c == b).unwrap();
        let c = inst.cost[a][b].as_rat().unwrap().clone();
        let fg = || {
            pair(fp(i), 1)
                .into_iter()
                .chain(pair(gp(j), 1))
                .collect::<Vec<_>>()
        };
        if support.contains(&(a, b)) {
            lp_rows.push((fg(), c.clone()));
        } else {
            // f + g + s = c
            let mut coeffs = fg();
            coeffs.push((num_vars, one()));
            num_vars += 1;
            lp_rows.push((coeffs, c.clone()));
        }
        // f + g − t_hi + s = 0
        let mut coeffs = fg();
        coeffs.extend(pair(thi, -1));
        coeffs.push((num_vars, one()));
        num_vars += 1;
        lp_rows.push((coeffs, Rat::zero()));
        // f + g − t_lo − s = 0
        let mut coeffs = fg();
        coeffs.extend(pair(tlo, -1));
        coeffs.push((num_vars, -one()));
        num_vars += 1;
        lp_rows.push((coeffs, Rat::zero()));
    }
    let mut objective = vec![Rat::zero(); num_vars];
    objective[thi] = one();
    objective[thi + 1] = -one();
    objective[tlo] = -one();
    objective[tlo + 1] = one();
    match solve_lp(&Lp {
        num_vars,
        rows: lp_rows,
        objective,
    }) {
        LpResult::Optimal { value, .. } => Some(value),
        LpResult::Infeasible => None,
        LpResult::Unbounded => unreachable!("range is nonnegative on a nonempty arc set"),
    }
}
