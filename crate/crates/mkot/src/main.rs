//! Command-line front end: solve instances, check certificates, run the
//! relaxation, and emit fixtures, all over plain-text files.
//!
//! Exit codes: 0 for any computed verdict (including FAIL verdicts), 1 for
//! malformed input or violated preconditions, 2 for internal cross-check
//! failures (primal ≠ dual, or a certificate the library revalidates
//! inconsistently).

use std::io::Read;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use num::traits::Signed;

use mkot::duality::{check_dual_equality, solve_dual, DualStatus};
use mkot::ext::Rat;
use mkot::Error;
use mkot::fixtures::{diag_sqrt, gen_random, remark2x2, staircase};
use mkot::instance::{Instance, Plan, Potentials};
use mkot::monotonicity::{
    build_strong_potentials, check_cyclical, check_weak_certificate, essential_arcs,
    CrossCheck, CyclicalResult,
};
use mkot::relaxation::{
    build_necessary_certificate, solve_relaxed, sweep_k, WeightMode, K_CAP,
};
use mkot::solver::{enumerate_couplings, solve_primal, PrimalStatus};
use mkot::textio::{
    ext_str, mass_lines, parse_instance, parse_mass_matrix, parse_plan, parse_potential_vec,
    parse_rat, pot_str, rat_str, serialize_instance,
};

#[derive(Parser)]
#[command(name = "mkot", about = "Exact discrete optimal transport with forbidden arcs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct InstanceArg {
    /// Instance file, `-` for standard input.
    file: String,
}

#[derive(Subcommand)]
enum Command {
    /// Minimize expected cost over finite plans.
    Solve(InstanceArg),
    /// Maximize the dual over admissible potentials.
    Dual(InstanceArg),
    /// Cross-check primal, dual, and an independent dual LP for equality.
    CheckEquality(InstanceArg),
    /// Search a plan for cyclical-monotonicity violations.
    CheckCyclical {
        #[command(flatten)]
        inst: InstanceArg,
        /// Plan file (sparse `arc <a> <b> <mass>` lines), `-` for stdin.
        #[arg(long)]
        plan: String,
        /// Longest cycle length to try (default: number of support rows).
        #[arg(long)]
        max_len: Option<usize>,
    },
    /// Build potentials tight on the plan's support and dominated
    /// everywhere, if they exist.
    CheckStrong {
        #[command(flatten)]
        inst: InstanceArg,
        #[arg(long)]
        plan: String,
    },
    /// Validate supplied potentials as a weak certificate for a plan.
    CertifyWeak {
        #[command(flatten)]
        inst: InstanceArg,
        #[arg(long)]
        plan: String,
        /// A-side potential file: whitespace-separated values, `-inf` allowed.
        #[arg(long)]
        f: String,
        /// B-side potential file.
        #[arg(long)]
        g: String,
    },
    /// List the arcs some finite plan must use.
    EssentialArcs(InstanceArg),
    /// Minimize the penalized relaxation over signed couplings.
    Relax {
        #[command(flatten)]
        inst: InstanceArg,
        /// Penalty multiplier on negative mass.
        #[arg(long)]
        k: u64,
        /// Weigh arcs by the raw cost instead of cost + 1.
        #[arg(long)]
        raw: bool,
    },
    /// Run the relaxation over a doubling penalty schedule.
    Sweep {
        #[command(flatten)]
        inst: InstanceArg,
        /// Stop the schedule at 2^E.
        #[arg(long, default_value_t = 20)]
        k_cap: u32,
    },
    /// Build the necessary optimality certificate for an optimal plan.
    Necessary {
        #[command(flatten)]
        inst: InstanceArg,
        #[arg(long)]
        plan: String,
        /// Reference measure file (sparse `arc` lines, a probability on
        /// finite arcs).
        #[arg(long)]
        p: String,
        /// Tolerance, a positive rational such as 1/10.
        #[arg(long)]
        epsilon: String,
    },
    /// Write a named fixture instance to standard output.
    Fixture {
        /// One of `remark2x2`, `staircase`, `diag-sqrt`, `random`.
        name: String,
        /// Size for staircase/diag-sqrt, columns for random.
        #[arg(long)]
        n: Option<usize>,
        /// Rows for random (defaults to `--n`).
        #[arg(long)]
        m: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Forbidden-arc density in [0, 1) for random, e.g. 2/5.
        #[arg(long)]
        density: Option<String>,
    },
    /// List every plan on the 1/denom grid with its cost.
    Enumerate {
        #[command(flatten)]
        inst: InstanceArg,
        #[arg(long)]
        denom: u64,
    },
}

fn read_input(path: &str) -> Result<String, Error> {
    let mut text = String::new();
    if path == "-" {
        std::io::stdin()
            .read_to_string(&mut text)
            .map_err(|e| Error::Parse {
                line: 0,
                msg: format!("reading standard input: {}", e),
            })?;
    } else {
        text = std::fs::read_to_string(path).map_err(|e| Error::Parse {
            line: 0,
            msg: format!("reading {}: {}", path, e),
        })?;
    }
    Ok(text)
}

fn load_instance(path: &str) -> Result<Instance, Error> {
    parse_instance(&read_input(path)?)
}

fn load_plan(path: &str, inst: &Instance) -> Result<Plan, Error> {
    parse_plan(&read_input(path)?, inst)
}

fn potentials_line(tag: &str, vals: &[mkot::ext::PotVal]) -> String {
    let toks: Vec<String> = vals.iter().map(pot_str).collect();
    format!("{}: {}\n", tag, toks.join(" "))
}

fn rat_vec_line(tag: &str, vals: &[Rat]) -> String {
    let toks: Vec<String> = vals.iter().map(rat_str).collect();
    format!("{}: {}\n", tag, toks.join(" "))
}

/// Worked result of a subcommand: the report text and the exit code.
struct Report {
    text: String,
    code: u8,
}

impl Report {
    fn ok(text: String) -> Self {
        Report { text, code: 0 }
    }
}

fn run(cmd: Command) -> Result<Report, Error> {
    match cmd {
        Command::Solve(arg) => {
            let inst = load_instance(&arg.file)?;
            let r = solve_primal(&inst);
            let mut out = String::new();
            out.push_str(&format!(
                "status: {}\n",
                match r.status {
                    PrimalStatus::Optimal => "OPTIMAL",
                    PrimalStatus::InfeasibleFinite => "INFEASIBLE_FINITE",
                }
            ));
            out.push_str(&format!("value: {}\n", ext_str(&r.value)));
            if let Some(plan) = r.plan {
                out.push_str(&mass_lines(&plan.mass));
            }
            Ok(Report::ok(out))
        }
        Command::Dual(arg) => {
            let inst = load_instance(&arg.file)?;
            let r = solve_dual(&inst);
            let mut out = String::new();
            out.push_str(&format!(
                "status: {}\n",
                match r.status {
                    DualStatus::Optimal => "OPTIMAL",
                    DualStatus::Unbounded => "UNBOUNDED",
                }
            ));
            out.push_str(&format!("value: {}\n", ext_str(&r.value)));
            if let Some(phi) = r.potentials {
                out.push_str(&potentials_line("f", &phi.f));
                out.push_str(&potentials_line("g", &phi.g));
            }
            Ok(Report::ok(out))
        }
        Command::CheckEquality(arg) => {
            let inst = load_instance(&arg.file)?;
            let r = check_dual_equality(&inst, true);
            let mut out = String::new();
            out.push_str(&format!("primal: {}\n", ext_str(&r.primal)));
            out.push_str(&format!("dual: {}\n", ext_str(&r.dual)));
            if let Some(lp) = &r.lp_value {
                out.push_str(&format!("lp: {}\n", ext_str(lp)));
            }
            out.push_str(&format!(
                "verdict: {}\n",
                if r.equal { "EQUAL" } else { "UNEQUAL" }
            ));
            Ok(Report {
                text: out,
                code: if r.equal { 0 } else { 2 },
            })
        }
        Command::CheckCyclical {
            inst,
            plan,
            max_len,
        } => {
            let inst = load_instance(&inst.file)?;
            let pi = load_plan(&plan, &inst)?;
            let limit = max_len.unwrap_or(usize::MAX);
            let mut out = String::new();
            match check_cyclical(&inst, &pi, limit) {
                CyclicalResult::Valid => out.push_str("verdict: VALID\n"),
                CyclicalResult::Violation(cycle) => {
                    out.push_str("verdict: VIOLATION\n");
                    for (a, b) in &cycle.arcs {
                        out.push_str(&format!("cycle-arc {} {}\n", a, b));
                    }
                    out.push_str(&format!("defect: {}\n", rat_str(&cycle.defect)));
                }
            }
            Ok(Report::ok(out))
        }
        Command::CheckStrong { inst, plan } => {
            let inst = load_instance(&inst.file)?;
            let pi = load_plan(&plan, &inst)?;
            let mut out = String::new();
            match build_strong_potentials(&inst, &pi) {
                Some(cert) => {
                    out.push_str("verdict: VALID\n");
                    out.push_str(&potentials_line("f", &cert.potentials.f));
                    out.push_str(&potentials_line("g", &cert.potentials.g));
                }
                None => out.push_str("verdict: INVALID\n"),
            }
            Ok(Report::ok(out))
        }
        Command::CertifyWeak { inst, plan, f, g } => {
            let inst = load_instance(&inst.file)?;
            let pi = load_plan(&plan, &inst)?;
            let fv = parse_potential_vec(&read_input(&f)?, inst.m, "f")?;
            let gv = parse_potential_vec(&read_input(&g)?, inst.n, "g")?;
            let phi = Potentials::new(&inst, fv, gv)?;
            let cert = check_weak_certificate(&inst, &pi, &phi)?;
            let mut out = String::new();
            for (a, b) in &cert.essential_arcs {
                out.push_str(&format!("essential-arc {} {}\n", a, b));
            }
            out.push_str(&format!(
                "domination-on-essential: {}\n",
                cert.domination_on_essential
            ));
            out.push_str(&format!("tight-on-support: {}\n", cert.tight_on_support));
            let mut code = 0;
            if let Some(cross) = &cert.cross_check {
                let (label, c) = match cross {
                    CrossCheck::Confirmed => ("CONFIRMED", 0),
                    CrossCheck::InternalBug => ("INTERNAL_BUG", 2),
                };
                out.push_str(&format!("cross-check: {}\n", label));
                code = c;
            }
            out.push_str(&format!(
                "verdict: {}\n",
                if cert.is_valid() { "VALID" } else { "INVALID" }
            ));
            Ok(Report { text: out, code })
        }
        Command::EssentialArcs(arg) => {
            let inst = load_instance(&arg.file)?;
            let arcs = essential_arcs(&inst)?;
            let mut out = String::new();
            for (a, b) in &arcs {
                out.push_str(&format!("essential-arc {} {}\n", a, b));
            }
            out.push_str(&format!("count: {}\n", arcs.len()));
            Ok(Report::ok(out))
        }
        Command::Relax { inst, k, raw } => {
            let inst = load_instance(&inst.file)?;
            let mode = if raw {
                WeightMode::Raw
            } else {
                WeightMode::Normalized
            };
            let r = solve_relaxed(&inst, k, mode)?;
            let mut out = String::new();
            out.push_str(&format!("k: {}\n", r.k));
            out.push_str(&format!(
                "weight-mode: {}\n",
                match r.weight_mode {
                    WeightMode::Normalized => "NORMALIZED",
                    WeightMode::Raw => "RAW",
                }
            ));
            out.push_str(&format!("value: {}\n", rat_str(&r.value)));
            for (a, row) in r.coupling.pos.iter().enumerate() {
                for (b, q) in row.iter().enumerate() {
                    if q.is_positive() {
                        out.push_str(&format!("pos {} {} {}\n", a, b, rat_str(q)));
                    }
                }
            }
            for (a, row) in r.coupling.neg.iter().enumerate() {
                for (b, q) in row.iter().enumerate() {
                    if q.is_positive() {
                        out.push_str(&format!("neg {} {} {}\n", a, b, rat_str(q)));
                    }
                }
            }
            out.push_str(&potentials_line("f", &r.dual_potentials.f));
            out.push_str(&potentials_line("g", &r.dual_potentials.g));
            Ok(Report::ok(out))
        }
        Command::Sweep { inst, k_cap } => {
            let inst = load_instance(&inst.file)?;
            let cap = 1u64
                .checked_shl(k_cap)
                .filter(|&c| c <= K_CAP)
                .ok_or_else(|| Error::BadDenom(format!("k cap 2^{} is out of range", k_cap)))?;
            let schedule: Vec<u64> = (0..=k_cap).map(|e| 1u64 << e).collect();
            debug_assert_eq!(*schedule.last().unwrap(), cap);
            let s = sweep_k(&inst, &schedule)?;
            let mut out = String::new();
            out.push_str(&format!("primal: {}\n", rat_str(&s.primal)));
            for (k, v) in &s.steps {
                out.push_str(&format!("step {} {}\n", k, rat_str(v)));
            }
            match s.k_star {
                Some(k) => out.push_str(&format!("k-star: {}\n", k)),
                None => out.push_str("k-star: NOT_REACHED\n"),
            }
            Ok(Report::ok(out))
        }
        Command::Necessary {
            inst,
            plan,
            p,
            epsilon,
        } => {
            let inst = load_instance(&inst.file)?;
            let pi = load_plan(&plan, &inst)?;
            let p_mass = parse_mass_matrix(&read_input(&p)?, inst.m, inst.n)?;
            let eps = parse_rat(&epsilon, 0)?;
            let cert = build_necessary_certificate(&inst, &pi, &p_mass, &eps)?;
            let mut out = String::new();
            out.push_str(&format!("epsilon: {}\n", rat_str(&cert.epsilon)));
            out.push_str(&format!("k: {}\n", cert.k));
            out.push_str(&rat_vec_line("u", &cert.u));
            out.push_str(&rat_vec_line("v", &cert.v));
            for (a, b) in &cert.d {
                out.push_str(&format!("defect-arc {} {}\n", a, b));
            }
            for (i, pass) in cert.clauses.iter().enumerate() {
                out.push_str(&format!(
                    "clause {}: {}\n",
                    i + 1,
                    if *pass { "PASS" } else { "FAIL" }
                ));
            }
            out.push_str(&format!(
                "verdict: {}\n",
                if cert.all_pass() { "PASS" } else { "FAIL" }
            ));
            Ok(Report::ok(out))
        }
        Command::Fixture {
            name,
            n,
            m,
            seed,
            density,
        } => {
            let need_n = || {
                n.ok_or_else(|| Error::BadDenom(format!("fixture {} needs --n", name)))
            };
            let inst = match name.as_str() {
                "remark2x2" => remark2x2(),
                "staircase" => staircase(need_n()?)?,
                "diag-sqrt" | "diag_sqrt" => diag_sqrt(need_n()?)?,
                "random" => {
                    let n = need_n()?;
                    let m = m.unwrap_or(n);
                    let d = match &density {
                        Some(tok) => parse_rat(tok, 0)?,
                        None => Rat::new(3.into(), 10.into()),
                    };
                    gen_random(m, n, seed.unwrap_or(0), d)?
                }
                other => {
                    return Err(Error::Parse {
                        line: 0,
                        msg: format!(
                            "unknown fixture {:?} (expected remark2x2, staircase, diag-sqrt, random)",
                            other
                        ),
                    })
                }
            };
            Ok(Report::ok(serialize_instance(&inst)))
        }
        Command::Enumerate { inst, denom } => {
            let inst = load_instance(&inst.file)?;
            let plans = enumerate_couplings(&inst, denom)?;
            let mut out = String::new();
            out.push_str(&format!("count: {}\n", plans.len()));
            for (i, plan) in plans.iter().enumerate() {
                out.push_str(&format!("plan {}\n", i));
                out.push_str(&format!(
                    "cost: {}\n",
                    ext_str(&mkot::instance::cost_of_plan(&inst, plan))
                ));
                out.push_str(&mass_lines(&plan.mass));
            }
            Ok(Report::ok(out))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap's help/version output is not an error.
            if e.use_stderr() {
                eprintln!("{}", e);
                return ExitCode::from(1);
            }
            print!("{}", e);
            return ExitCode::SUCCESS;
        }
    };
    match run(cli.command) {
        Ok(report) => {
            print!("{}", report.text);
            ExitCode::from(report.code)
        }
        Err(e) => {
            eprintln!("error: {}", e);
            ExitCode::from(1)
        }
    }
}
