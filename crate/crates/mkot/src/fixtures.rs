//! Canned instance families used by the test suites and the CLI.

use crate::error::Error;
use crate::ext::{ExtRat, Rat};
use crate::instance::Instance;
use crate::solver::finite_feasible;
use num::traits::{One, Zero};
use num::{BigInt, Integer};
use rand::RngCore;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

/// Two points per side with all mass concentrated on the second pair and
/// cost rows [[0,0],[0,1]]: the unique plan pays 1 even though three of
/// the four arcs are free.
pub fn remark2x2() -> Instance {
    let zero = || Rat::zero();
    let one = || Rat::one();
    let c = |v: i64| ExtRat::Fin(Rat::from_integer(v.into()));
    Instance::new(
        vec![zero(), one()],
        vec![zero(), one()],
        vec![vec![c(0), c(0)], vec![c(0), c(1)]],
    )
    .expect("constant fixture is valid")
}

/// Uniform marginals on `n` points; cost forbidden above the diagonal,
/// 1 on it, 0 below. The only finite plan is the diagonal, paying 1,
/// while every below-diagonal arc dangles at cost 0.
pub fn staircase(n: usize) -> Result<Instance, Error> {
    if n < 2 {
        return Err(Error::ShapeMismatch("staircase needs n ≥ 2".into()));
    }
    let w = Rat::new(BigInt::one(), n.into());
    let cost = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if j > i {
                        ExtRat::PlusInf
                    } else if j == i {
                        ExtRat::Fin(Rat::one())
                    } else {
                        ExtRat::Fin(Rat::zero())
                    }
                })
                .collect()
        })
        .collect();
    Instance::new(vec![w.clone(); n], vec![w; n], cost)
}

/// Like [`staircase`] but the below-diagonal costs decay smoothly:
/// `c(i,j) = 1 − round_up(√((i−j)/n))` for `j ≤ i`, with the square root
/// rounded up to 6 decimal places so all entries stay rational. Costs
/// above the diagonal are forbidden.
pub fn diag_sqrt(n: usize) -> Result<Instance, Error> {
    if n < 2 {
        return Err(Error::ShapeMismatch("diag_sqrt needs n ≥ 2".into()));
    }
    let w = Rat::new(BigInt::one(), n.into());
    let cost = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if j > i {
                        ExtRat::PlusInf
                    } else {
                        ExtRat::Fin(Rat::one() - sqrt_ceil_millionths(i - j, n))
                    }
                })
                .collect()
        })
        .collect();
    Instance::new(vec![w.clone(); n], vec![w; n], cost)
}

/// `⌈10⁶·√(num/den)⌉ / 10⁶` computed exactly: the integer square root of
/// `⌈10¹²·num/den⌉` rounded up.
fn sqrt_ceil_millionths(num: usize, den: usize) -> Rat {
    let million = BigInt::from(1_000_000u64);
    let scaled = (&million * &million * BigInt::from(num)).div_ceil(&BigInt::from(den));
    let mut root = scaled.sqrt();
    if &root * &root < scaled {
        root += 1;
    }
    Rat::new(root, million)
}

/// How many times [`gen_random`] redraws before giving up.
const MAX_REDRAWS: u32 = 10_000;

/// A reproducible random instance: marginals with denominators ≤ 6,
/// integer costs in 1..=5, and each arc independently forbidden with
/// probability `density`. Draws are redrawn until some finite plan exists.
pub fn gen_random(m: usize, n: usize, seed: u64, density: Rat) -> Result<Instance, Error> {
    if m == 0 || n == 0 {
        return Err(Error::ShapeMismatch("need at least one point per side".into()));
    }
    if m > 8 || n > 8 {
        return Err(Error::TooLarge(format!(
            "random instances go up to 8 points per side; got {}×{}",
            m, n
        )));
    }
    if density < Rat::zero() || density >= Rat::one() {
        return Err(Error::BadDenom(format!(
            "forbidden-arc density {} is outside [0, 1)",
            density
        )));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    for _ in 0..MAX_REDRAWS {
        let mu = random_marginal(&mut rng, m);
        let nu = random_marginal(&mut rng, n);
        let cost = (0..m)
            .map(|_| {
                (0..n)
                    .map(|_| {
                        if bernoulli(&mut rng, &density) {
                            ExtRat::PlusInf
                        } else {
                            ExtRat::Fin(Rat::from_integer(
                                (1 + uniform_below(&mut rng, 5) as i64).into(),
                            ))
                        }
                    })
                    .collect()
            })
            .collect();
        let inst = Instance::new(mu, nu, cost).expect("random draw satisfies the shape rules");
        if finite_feasible(&inst) {
            return Ok(inst);
        }
    }
    Err(Error::NoFeasibleAfterRetries {
        seed,
        retries: MAX_REDRAWS,
    })
}

/// A probability vector with denominator at most 6: draw d from 1..=6 and
/// scatter d unit weights over the points, so entries are multiples of 1/d
/// and zero-mass points occur naturally.
fn random_marginal(rng: &mut ChaCha20Rng, len: usize) -> Vec<Rat> {
    let d = 1 + uniform_below(rng, 6);
    let mut units = vec![0u64; len];
    for _ in 0..d {
        units[uniform_below(rng, len as u64) as usize] += 1;
    }
    units
        .into_iter()
        .map(|u| Rat::new(u.into(), d.into()))
        .collect()
}

/// Unbiased uniform draw from `0..bound` by rejection on `next_u64`.
fn uniform_below(rng: &mut ChaCha20Rng, bound: u64) -> u64 {
    let limit = u64::MAX - u64::MAX % bound;
    loop {
        let v = rng.next_u64();
        if v < limit {
            return v % bound;
        }
    }
}

/// Bernoulli draw with exact rational success probability `p`.
fn bernoulli(rng: &mut ChaCha20Rng, p: &Rat) -> bool {
    if p.is_zero() {
        return false;
    }
    // v/2^64 < p  ⟺  v·denom < numer·2^64, exactly in big integers.
    let v = BigInt::from(rng.next_u64());
    let scale = BigInt::from(u128::from(u64::MAX) + 1);
    v * p.denom() < p.numer() * scale
}
