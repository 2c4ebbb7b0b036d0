//! Problem instances, transport plans, potentials, and signed couplings.
//!
//! An [`Instance`] is a cost matrix over `A×B` together with probability
//! marginals on each side; arcs of cost `+inf` are forbidden. A [`Plan`] is a
//! nonnegative matrix with those exact marginals; a plan is *finite* when it
//! puts no mass on forbidden arcs. [`Potentials`] are the dual variables, and
//! a [`SignedCoupling`] is the Jordan decomposition of a signed matrix with
//! the prescribed marginals, the domain of the relaxed functional.
//!
//! All types validate on construction and are immutable afterwards; all
//! functions here are pure.

use crate::error::Error;
use crate::ext::{ExtRat, PotVal, Rat};
use num::traits::{One, Signed, Zero};

/// A discrete transport problem: marginals `mu` on `A`, `nu` on `B`, and an
/// `m×n` extended-rational cost matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Instance {
    pub m: usize,
    pub n: usize,
    pub mu: Vec<Rat>,
    pub nu: Vec<Rat>,
    pub cost: Vec<Vec<ExtRat>>,
}

impl Instance {
    /// Build and validate an instance.
    pub fn new(mu: Vec<Rat>, nu: Vec<Rat>, cost: Vec<Vec<ExtRat>>) -> Result<Self, Error> {
        let inst = Instance {
            m: mu.len(),
            n: nu.len(),
            mu,
            nu,
            cost,
        };
        validate_instance(&inst)?;
        Ok(inst)
    }

    pub fn is_forbidden(&self, a: usize, b: usize) -> bool {
        !self.cost[a][b].is_finite()
    }

    /// Finite-cost arcs in row-major order.
    pub fn finite_arcs(&self) -> Vec<(usize, usize)> {
        let mut arcs = Vec::new();
        for a in 0..self.m {
            for b in 0..self.n {
                if !self.is_forbidden(a, b) {
                    arcs.push((a, b));
                }
            }
        }
        arcs
    }

    /// Finite-cost arcs joining points of strictly positive marginal mass.
    pub fn active_arcs(&self) -> Vec<(usize, usize)> {
        self.finite_arcs()
            .into_iter()
            .filter(|&(a, b)| self.mu[a].is_positive() && self.nu[b].is_positive())
            .collect()
    }
}

/// Check every `Instance` invariant; returns the instance untouched.
///
/// Idempotent: validating a valid instance changes nothing and succeeds.
pub fn validate_instance(inst: &Instance) -> Result<(), Error> {
    if inst.mu.len() != inst.m || inst.nu.len() != inst.n {
        return Err(Error::ShapeMismatch(format!(
            "marginal lengths {}x{} disagree with declared sizes {}x{}",
            inst.mu.len(),
            inst.nu.len(),
            inst.m,
            inst.n
        )));
    }
    if inst.m == 0 || inst.n == 0 {
        return Err(Error::ShapeMismatch("empty side".into()));
    }
    if inst.cost.len() != inst.m {
        return Err(Error::ShapeMismatch(format!(
            "cost has {} rows, expected {}",
            inst.cost.len(),
            inst.m
        )));
    }
    for (a, row) in inst.cost.iter().enumerate() {
        if row.len() != inst.n {
            return Err(Error::ShapeMismatch(format!(
                "cost row {} has {} columns, expected {}",
                a,
                row.len(),
                inst.n
            )));
        }
    }
    for (a, v) in inst.mu.iter().enumerate() {
        if v.is_negative() {
            return Err(Error::NegativeEntry(format!("mu[{}] = {}", a, v)));
        }
    }
    for (b, v) in inst.nu.iter().enumerate() {
        if v.is_negative() {
            return Err(Error::NegativeEntry(format!("nu[{}] = {}", b, v)));
        }
    }
    let mu_sum: Rat = inst.mu.iter().cloned().sum();
    if !mu_sum.is_one() {
        return Err(Error::MarginalSum(format!("mu sums to {}", mu_sum)));
    }
    let nu_sum: Rat = inst.nu.iter().cloned().sum();
    if !nu_sum.is_one() {
        return Err(Error::MarginalSum(format!("nu sums to {}", nu_sum)));
    }
    for a in 0..inst.m {
        for b in 0..inst.n {
            if let ExtRat::Fin(c) = &inst.cost[a][b] {
                if c.is_negative() {
                    return Err(Error::NegativeEntry(format!("cost[{}][{}] = {}", a, b, c)));
                }
            }
        }
    }
    Ok(())
}

/// A transport plan: nonnegative `m×n` mass with the instance's marginals.
///
/// Plans may put mass on forbidden arcs (their cost is then `+inf`);
/// [`Plan::is_finite`] distinguishes the finite ones. Validation happens at
/// construction against a specific instance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Plan {
    pub mass: Vec<Vec<Rat>>,
}

impl Plan {
    /// Build a plan for `inst`, checking shape, nonnegativity, and that row
    /// and column sums equal the marginals exactly.
    pub fn new(inst: &Instance, mass: Vec<Vec<Rat>>) -> Result<Self, Error> {
        if mass.len() != inst.m || mass.iter().any(|r| r.len() != inst.n) {
            return Err(Error::ShapeMismatch(format!(
                "plan must be {}x{}",
                inst.m, inst.n
            )));
        }
        for (a, row) in mass.iter().enumerate() {
            for (b, v) in row.iter().enumerate() {
                if v.is_negative() {
                    return Err(Error::NegativeEntry(format!("mass[{}][{}] = {}", a, b, v)));
                }
            }
        }
        for a in 0..inst.m {
            let s: Rat = mass[a].iter().cloned().sum();
            if s != inst.mu[a] {
                return Err(Error::MarginalSum(format!(
                    "row {} sums to {}, mu[{}] = {}",
                    a, s, a, inst.mu[a]
                )));
            }
        }
        for b in 0..inst.n {
            let s: Rat = (0..inst.m).map(|a| mass[a][b].clone()).sum();
            if s != inst.nu[b] {
                return Err(Error::MarginalSum(format!(
                    "column {} sums to {}, nu[{}] = {}",
                    b, s, b, inst.nu[b]
                )));
            }
        }
        Ok(Plan { mass })
    }

    /// Arcs with strictly positive mass, row-major.
    pub fn support(&self) -> Vec<(usize, usize)> {
        let mut arcs = Vec::new();
        for (a, row) in self.mass.iter().enumerate() {
            for (b, v) in row.iter().enumerate() {
                if v.is_positive() {
                    arcs.push((a, b));
                }
            }
        }
        arcs
    }

    /// True iff the plan puts zero mass on every forbidden arc.
    pub fn is_finite(&self, inst: &Instance) -> bool {
        self.support().iter().all(|&(a, b)| !inst.is_forbidden(a, b))
    }
}

/// Expected cost of a plan, with the convention `0 · inf = 0`.
///
/// Returns `+inf` exactly when the plan puts positive mass on a forbidden
/// arc.
pub fn cost_of_plan(inst: &Instance, pi: &Plan) -> ExtRat {
    let mut total = ExtRat::zero();
    for a in 0..inst.m {
        for b in 0..inst.n {
            total = total.add(&inst.cost[a][b].mul_mass(&pi.mass[a][b]));
        }
    }
    total
}

/// Least common denominator of all marginal entries, saturating at
/// `u64::MAX` when it does not fit.
pub fn marginal_denominator(inst: &Instance) -> u64 {
    let mut lcm = num::BigInt::from(1u8);
    for v in inst.mu.iter().chain(inst.nu.iter()) {
        lcm = num::Integer::lcm(&lcm, v.denom());
    }
    num::ToPrimitive::to_u64(&lcm).unwrap_or(u64::MAX)
}

/// Dual potentials: `f` on `A`, `g` on `B`, entries rational or `-inf`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Potentials {
    pub f: Vec<PotVal>,
    pub g: Vec<PotVal>,
}

impl Potentials {
    /// Build potentials for `inst`; `-inf` entries are only allowed at
    /// points of zero marginal mass.
    pub fn new(inst: &Instance, f: Vec<PotVal>, g: Vec<PotVal>) -> Result<Self, Error> {
        if f.len() != inst.m || g.len() != inst.n {
            return Err(Error::ShapeMismatch(format!(
                "potentials must have lengths {} and {}",
                inst.m, inst.n
            )));
        }
        for (a, v) in f.iter().enumerate() {
            if !v.is_finite() && inst.mu[a].is_positive() {
                return Err(Error::NegativeEntry(format!(
                    "f[{}] = -inf at positive-mass point",
                    a
                )));
            }
        }
        for (b, v) in g.iter().enumerate() {
            if !v.is_finite() && inst.nu[b].is_positive() {
                return Err(Error::NegativeEntry(format!(
                    "g[{}] = -inf at positive-mass point",
                    b
                )));
            }
        }
        Ok(Potentials { f, g })
    }

    /// All-finite potentials from plain rationals.
    pub fn from_rats(f: Vec<Rat>, g: Vec<Rat>) -> Self {
        Potentials {
            f: f.into_iter().map(PotVal::Fin).collect(),
            g: g.into_iter().map(PotVal::Fin).collect(),
        }
    }

    /// The tensor sum `f⊕g(a,b) = f[a] + g[b]`, `-inf` absorbing.
    pub fn sum(&self, a: usize, b: usize) -> PotVal {
        self.f[a].add(&self.g[b])
    }
}

/// Integral of `f⊕g` against a finite plan, with `0 · (-inf) = 0`.
///
/// Fails with [`Error::DominationViolated`] when `f⊕g > c` on an arc the
/// plan actually uses; on valid inputs the value does not depend on which
/// finite plan of the instance is integrated.
pub fn pairing_integral(inst: &Instance, phi: &Potentials, pi: &Plan) -> Result<PotVal, Error> {
    let mut total = PotVal::Fin(Rat::zero());
    for a in 0..inst.m {
        for b in 0..inst.n {
            let mass = &pi.mass[a][b];
            if !mass.is_positive() {
                continue;
            }
            let s = phi.sum(a, b);
            if !s.le_cost(&inst.cost[a][b]) {
                return Err(Error::DominationViolated { a, b });
            }
            total = match (&total, &s) {
                (PotVal::Fin(t), PotVal::Fin(v)) => PotVal::Fin(t + v * mass),
                _ => PotVal::NegInf,
            };
        }
    }
    Ok(total)
}

/// Jordan decomposition `q = pos − neg` of a signed coupling: both parts
/// nonnegative, arcwise complementary, vanishing on forbidden arcs, with the
/// difference having the instance's marginals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SignedCoupling {
    pub pos: Vec<Vec<Rat>>,
    pub neg: Vec<Vec<Rat>>,
}

impl SignedCoupling {
    pub fn new(inst: &Instance, pos: Vec<Vec<Rat>>, neg: Vec<Vec<Rat>>) -> Result<Self, Error> {
        let shape_ok = |mat: &Vec<Vec<Rat>>| {
            mat.len() == inst.m && mat.iter().all(|r| r.len() == inst.n)
        };
        if !shape_ok(&pos) || !shape_ok(&neg) {
            return Err(Error::ShapeMismatch(format!(
                "coupling parts must be {}x{}",
                inst.m, inst.n
            )));
        }
        for a in 0..inst.m {
            for b in 0..inst.n {
                if pos[a][b].is_negative() || neg[a][b].is_negative() {
                    return Err(Error::NegativeEntry(format!(
                        "coupling part at ({}, {})",
                        a, b
                    )));
                }
                if pos[a][b].is_positive() && neg[a][b].is_positive() {
                    return Err(Error::NegativeEntry(format!(
                        "pos and neg overlap at ({}, {}): Jordan parts must be complementary",
                        a, b
                    )));
                }
                if inst.is_forbidden(a, b) && (pos[a][b].is_positive() || neg[a][b].is_positive())
                {
                    return Err(Error::NegativeEntry(format!(
                        "coupling mass on forbidden arc ({}, {})",
                        a, b
                    )));
                }
            }
        }
        for a in 0..inst.m {
            let s: Rat = (0..inst.n).map(|b| &pos[a][b] - &neg[a][b]).sum();
            if s != inst.mu[a] {
                return Err(Error::MarginalSum(format!(
                    "signed row {} sums to {}, mu[{}] = {}",
                    a, s, a, inst.mu[a]
                )));
            }
        }
        for b in 0..inst.n {
            let s: Rat = (0..inst.m).map(|a| &pos[a][b] - &neg[a][b]).sum();
            if s != inst.nu[b] {
                return Err(Error::MarginalSum(format!(
                    "signed column {} sums to {}, nu[{}] = {}",
                    b, s, b, inst.nu[b]
                )));
            }
        }
        Ok(SignedCoupling { pos, neg })
    }

    /// The signed matrix `pos − neg`.
    pub fn signed(&self) -> Vec<Vec<Rat>> {
        self.pos
            .iter()
            .zip(&self.neg)
            .map(|(pr, nr)| pr.iter().zip(nr).map(|(p, q)| p - q).collect())
            .collect()
    }
}
