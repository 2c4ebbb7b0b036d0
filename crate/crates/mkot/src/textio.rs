//! Plain-text file formats: instances, plans, reference measures, and
//! potential vectors.
//!
//! Everything is line-oriented and exact — rationals are written `p/q` in
//! lowest terms (bare `p` when the denominator is 1), forbidden costs as
//! `inf`, and potentials that sit at minus infinity as `-inf`. Parsing
//! then serializing canonical text reproduces it byte for byte.

use num::BigInt;
use num::traits::{One, Signed, Zero};

use crate::error::Error;
use crate::ext::{ExtRat, PotVal, Rat};
use crate::instance::{validate_instance, Instance, Plan};

/// Render a rational in canonical form: lowest terms, `p` when integral.
pub fn rat_str(r: &Rat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Render an extended rational; forbidden is `inf`.
pub fn ext_str(x: &ExtRat) -> String {
    match x {
        ExtRat::Fin(r) => rat_str(r),
        ExtRat::PlusInf => "inf".into(),
    }
}

/// Render a potential value; minus infinity is `-inf`.
pub fn pot_str(p: &PotVal) -> String {
    match p {
        PotVal::Fin(r) => rat_str(r),
        PotVal::NegInf => "-inf".into(),
    }
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

/// Parse a rational token `p` or `p/q`.
pub fn parse_rat(tok: &str, line: usize) -> Result<Rat, Error> {
    let (num, den) = match tok.split_once('/') {
        Some((n, d)) => (n, d),
        None => (tok, "1"),
    };
    let n: BigInt = num
        .parse()
        .map_err(|_| parse_err(line, format!("bad rational numerator in {:?}", tok)))?;
    let d: BigInt = den
        .parse()
        .map_err(|_| parse_err(line, format!("bad rational denominator in {:?}", tok)))?;
    if d.is_zero() {
        return Err(parse_err(line, format!("zero denominator in {:?}", tok)));
    }
    Ok(Rat::new(n, d))
}

fn parse_ext(tok: &str, line: usize) -> Result<ExtRat, Error> {
    if tok == "inf" {
        Ok(ExtRat::PlusInf)
    } else {
        Ok(ExtRat::Fin(parse_rat(tok, line)?))
    }
}

fn parse_pot(tok: &str, line: usize) -> Result<PotVal, Error> {
    if tok == "-inf" {
        Ok(PotVal::NegInf)
    } else {
        Ok(PotVal::Fin(parse_rat(tok, line)?))
    }
}

/// Serialize an instance in canonical form.
pub fn serialize_instance(inst: &Instance) -> String {
    let mut out = String::new();
    out.push_str("mk-instance v1\n");
    out.push_str(&format!("A {}\n", inst.m));
    out.push_str(&format!("B {}\n", inst.n));
    out.push_str("mu\n");
    let mu: Vec<String> = inst.mu.iter().map(rat_str).collect();
    out.push_str(&mu.join(" "));
    out.push('\n');
    out.push_str("nu\n");
    let nu: Vec<String> = inst.nu.iter().map(rat_str).collect();
    out.push_str(&nu.join(" "));
    out.push('\n');
    out.push_str("cost\n");
    for row in &inst.cost {
        let toks: Vec<String> = row.iter().map(ext_str).collect();
        out.push_str(&toks.join(" "));
        out.push('\n');
    }
    out
}

struct Lines<'a> {
    iter: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        Lines {
            iter: text.lines().enumerate(),
        }
    }

    /// Next line with its 1-based number, or an error naming what was
    /// expected.
    fn next(&mut self, expected: &str) -> Result<(usize, &'a str), Error> {
        match self.iter.next() {
            Some((i, l)) => Ok((i + 1, l)),
            None => Err(parse_err(0, format!("unexpected end of file, expected {}", expected))),
        }
    }

    fn finish(&mut self) -> Result<(), Error> {
        for (i, l) in self.iter.by_ref() {
            if !l.trim().is_empty() {
                return Err(parse_err(i + 1, format!("trailing content {:?}", l)));
            }
        }
        Ok(())
    }
}

fn parse_count(line: &str, lineno: usize, tag: &str) -> Result<usize, Error> {
    let rest = line
        .strip_prefix(tag)
        .and_then(|r| r.strip_prefix(' '))
        .ok_or_else(|| parse_err(lineno, format!("expected {:?} <count>, got {:?}", tag, line)))?;
    rest.trim()
        .parse()
        .map_err(|_| parse_err(lineno, format!("bad count {:?}", rest)))
}

fn parse_rat_row(line: &str, lineno: usize, len: usize, what: &str) -> Result<Vec<Rat>, Error> {
    let toks: Vec<&str> = line.split_whitespace().collect();
    if toks.len() != len {
        return Err(parse_err(
            lineno,
            format!("{} needs {} entries, got {}", what, len, toks.len()),
        ));
    }
    toks.iter().map(|t| parse_rat(t, lineno)).collect()
}

/// Parse and validate an instance file.
pub fn parse_instance(text: &str) -> Result<Instance, Error> {
    let mut lines = Lines::new(text);
    let (n1, header) = lines.next("header")?;
    if header.trim_end() != "mk-instance v1" {
        return Err(parse_err(n1, format!("expected \"mk-instance v1\", got {:?}", header)));
    }
    let (n2, a_line) = lines.next("A <m>")?;
    let m = parse_count(a_line, n2, "A")?;
    let (n3, b_line) = lines.next("B <n>")?;
    let n = parse_count(b_line, n3, "B")?;
    let (n4, mu_tag) = lines.next("mu")?;
    if mu_tag.trim_end() != "mu" {
        return Err(parse_err(n4, format!("expected \"mu\", got {:?}", mu_tag)));
    }
    let (n5, mu_line) = lines.next("mu entries")?;
    let mu = parse_rat_row(mu_line, n5, m, "mu")?;
    let (n6, nu_tag) = lines.next("nu")?;
    if nu_tag.trim_end() != "nu" {
        return Err(parse_err(n6, format!("expected \"nu\", got {:?}", nu_tag)));
    }
    let (n7, nu_line) = lines.next("nu entries")?;
    let nu = parse_rat_row(nu_line, n7, n, "nu")?;
    let (n8, cost_tag) = lines.next("cost")?;
    if cost_tag.trim_end() != "cost" {
        return Err(parse_err(n8, format!("expected \"cost\", got {:?}", cost_tag)));
    }
    let mut cost = Vec::with_capacity(m);
    for row in 0..m {
        let (ln, cost_line) = lines.next("cost row")?;
        let toks: Vec<&str> = cost_line.split_whitespace().collect();
        if toks.len() != n {
            return Err(parse_err(
                ln,
                format!("cost row {} needs {} entries, got {}", row, n, toks.len()),
            ));
        }
        let row: Result<Vec<ExtRat>, Error> = toks.iter().map(|t| parse_ext(t, ln)).collect();
        cost.push(row?);
    }
    lines.finish()?;
    let inst = Instance::new(mu, nu, cost)?;
    validate_instance(&inst)?;
    Ok(inst)
}

/// Parse a sparse mass matrix: one `arc <a> <b> <mass>` line per entry.
/// Unmentioned arcs are zero; duplicates are rejected.
pub fn parse_mass_matrix(text: &str, m: usize, n: usize) -> Result<Vec<Vec<Rat>>, Error> {
    let mut mass = vec![vec![Rat::zero(); n]; m];
    let mut seen = vec![vec![false; n]; m];
    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() != 4 || toks[0] != "arc" {
            return Err(parse_err(
                lineno,
                format!("expected \"arc <a> <b> <mass>\", got {:?}", line),
            ));
        }
        let a: usize = toks[1]
            .parse()
            .map_err(|_| parse_err(lineno, format!("bad row index {:?}", toks[1])))?;
        let b: usize = toks[2]
            .parse()
            .map_err(|_| parse_err(lineno, format!("bad column index {:?}", toks[2])))?;
        if a >= m || b >= n {
            return Err(parse_err(
                lineno,
                format!("arc ({}, {}) outside a {}x{} instance", a, b, m, n),
            ));
        }
        if seen[a][b] {
            return Err(parse_err(lineno, format!("duplicate arc ({}, {})", a, b)));
        }
        seen[a][b] = true;
        mass[a][b] = parse_rat(toks[3], lineno)?;
    }
    Ok(mass)
}

/// Parse a plan file (sparse arc lines) against an instance.
pub fn parse_plan(text: &str, inst: &Instance) -> Result<Plan, Error> {
    let mass = parse_mass_matrix(text, inst.m, inst.n)?;
    Plan::new(inst, mass)
}

/// Serialize a mass matrix as sorted sparse arc lines (positive entries
/// only, row-major).
pub fn mass_lines(mass: &[Vec<Rat>]) -> String {
    let mut out = String::new();
    for (a, row) in mass.iter().enumerate() {
        for (b, q) in row.iter().enumerate() {
            if q.is_positive() {
                out.push_str(&format!("arc {} {} {}\n", a, b, rat_str(q)));
            }
        }
    }
    out
}

/// Parse a potential vector: exactly `len` whitespace-separated tokens,
/// `-inf` allowed.
pub fn parse_potential_vec(text: &str, len: usize, what: &str) -> Result<Vec<PotVal>, Error> {
    let toks: Vec<&str> = text.split_whitespace().collect();
    if toks.len() != len {
        return Err(parse_err(
            0,
            format!("{} needs {} entries, got {}", what, len, toks.len()),
        ));
    }
    toks.iter().map(|t| parse_pot(t, 0)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ext::rat;
    use crate::fixtures::{diag_sqrt, gen_random, remark2x2, staircase};

    #[test]
    fn fixture_round_trips_are_byte_identical() {
        let fixtures = vec![
            remark2x2(),
            staircase(3).unwrap(),
            staircase(8).unwrap(),
            diag_sqrt(4).unwrap(),
            gen_random(4, 5, 11, rat(2, 5)).unwrap(),
        ];
        for inst in fixtures {
            let text = serialize_instance(&inst);
            let parsed = parse_instance(&text).unwrap();
            assert_eq!(serialize_instance(&parsed), text);
        }
    }

    #[test]
    fn staircase_serialization_is_as_expected() {
        let text = serialize_instance(&staircase(3).unwrap());
        assert_eq!(
            text,
            "mk-instance v1\nA 3\nB 3\nmu\n1/3 1/3 1/3\nnu\n1/3 1/3 1/3\ncost\n\
             1 inf inf\n0 1 inf\n0 0 1\n"
        );
    }

    #[test]
    fn non_canonical_rationals_parse_and_renormalize() {
        let text = "mk-instance v1\nA 1\nB 2\nmu\n2/2\nnu\n2/4 50/100\ncost\n3/1 inf\n";
        let inst = parse_instance(text).unwrap();
        assert_eq!(inst.mu[0], rat(1, 1));
        assert_eq!(inst.nu, vec![rat(1, 2), rat(1, 2)]);
        assert!(serialize_instance(&inst).contains("1/2 1/2"));
        assert!(serialize_instance(&inst).contains("\n3 inf\n"));
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let missing = parse_instance("mk-instance v2\n");
        assert!(matches!(missing, Err(Error::Parse { line: 1, .. })));
        let bad_mu = parse_instance("mk-instance v1\nA 1\nB 1\nmu\nx\nnu\n1\ncost\n0\n");
        assert!(matches!(bad_mu, Err(Error::Parse { line: 5, .. })));
        let short_cost = parse_instance("mk-instance v1\nA 2\nB 1\nmu\n1/2 1/2\nnu\n1\ncost\n0\n");
        assert!(matches!(short_cost, Err(Error::Parse { line: 0, .. })));
        let trailing =
            parse_instance("mk-instance v1\nA 1\nB 1\nmu\n1\nnu\n1\ncost\n0\nextra\n");
        assert!(matches!(trailing, Err(Error::Parse { line: 10, .. })));
        let zero_denom = parse_instance("mk-instance v1\nA 1\nB 1\nmu\n1/0\nnu\n1\ncost\n0\n");
        assert!(matches!(zero_denom, Err(Error::Parse { line: 5, .. })));
    }

    #[test]
    fn validation_runs_after_parsing() {
        // Marginals that do not sum to one are a semantic error, not a
        // parse error.
        let text = "mk-instance v1\nA 1\nB 1\nmu\n1/2\nnu\n1\ncost\n0\n";
        assert!(matches!(parse_instance(text), Err(Error::MarginalSum(_))));
    }

    #[test]
    fn plan_files_round_trip_sparsely() {
        let inst = staircase(3).unwrap();
        let pi = crate::solver::solve_primal(&inst).plan.unwrap();
        let text = mass_lines(&pi.mass);
        assert_eq!(text, "arc 0 0 1/3\narc 1 1 1/3\narc 2 2 1/3\n");
        let back = parse_plan(&text, &inst).unwrap();
        assert_eq!(back.mass, pi.mass);
    }

    #[test]
    fn plan_parsing_rejects_duplicates_and_stray_lines() {
        let inst = staircase(3).unwrap();
        let dup = "arc 0 0 1/6\narc 0 0 1/6\narc 1 1 1/3\narc 2 2 1/3\n";
        assert!(matches!(
            parse_plan(dup, &inst),
            Err(Error::Parse { line: 2, .. })
        ));
        let stray = "arc 0 0 1/3\nplan ok\n";
        assert!(matches!(
            parse_plan(stray, &inst),
            Err(Error::Parse { line: 2, .. })
        ));
        let outside = "arc 5 0 1/3\n";
        assert!(matches!(
            parse_plan(outside, &inst),
            Err(Error::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn potential_vectors_accept_minus_infinity() {
        let v = parse_potential_vec("0 -inf 5/3", 3, "f").unwrap();
        assert_eq!(v[0], PotVal::Fin(rat(0, 1)));
        assert_eq!(v[1], PotVal::NegInf);
        assert_eq!(v[2], PotVal::Fin(rat(5, 3)));
        assert!(parse_potential_vec("0 1", 3, "f").is_err());
    }
}
