//! Toy CNF-SAT instances: the inner NP language for the concrete protocols.
//!
//! Formulas are deliberately tiny (at most 3 variables and 4 clauses) so
//! that certificates, strategies, and tapes all stay fully enumerable.
//! Instances load from a DIMACS-subset text format and encode to fixed-width
//! bit strings, which is how they travel as protocol inputs.

use std::fmt;

use crate::protocol::Input;
use crate::{Error, Result};

/// Maximum number of variables in a toy formula.
pub const MAX_VARS: usize = 3;
/// Maximum number of clauses in a toy formula.
pub const MAX_CLAUSES: usize = 4;

/// A clause as one polarity slot per variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Polarity {
    Absent,
    Positive,
    Negative,
}

/// A CNF formula over at most [`MAX_VARS`] variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CnfFormula {
    var_count: usize,
    /// `clauses[c][v]` is the polarity of variable `v + 1` in clause `c`.
    clauses: Vec<[Polarity; MAX_VARS]>,
}

impl CnfFormula {
    /// Builds a formula from DIMACS-style literal lists: nonzero integers,
    /// positive for a variable, negative for its negation.
    pub fn from_clauses(var_count: usize, clauses: &[Vec<i32>]) -> Result<Self> {
        if var_count == 0 || var_count > MAX_VARS {
            return Err(Error::Formula(format!(
                "variable count {var_count} outside 1..={MAX_VARS}"
            )));
        }
        if clauses.len() > MAX_CLAUSES {
            return Err(Error::Formula(format!(
                "{} clauses exceed the limit of {MAX_CLAUSES}",
                clauses.len()
            )));
        }
        let mut rows = Vec::with_capacity(clauses.len());
        for (ci, clause) in clauses.iter().enumerate() {
            let mut row = [Polarity::Absent; MAX_VARS];
            for &lit in clause {
                if lit == 0 {
                    return Err(Error::Formula(format!("clause {ci} contains literal 0")));
                }
                let var = lit.unsigned_abs() as usize;
                if var > var_count {
                    return Err(Error::Formula(format!(
                        "clause {ci} references variable {var} beyond count {var_count}"
                    )));
                }
                let polarity = if lit > 0 {
                    Polarity::Positive
                } else {
                    Polarity::Negative
                };
                match row[var - 1] {
                    Polarity::Absent => row[var - 1] = polarity,
                    existing if existing == polarity => {}
                    _ => {
                        return Err(Error::Formula(format!(
                            "clause {ci} uses variable {var} in both polarities"
                        )));
                    }
                }
            }
            rows.push(row);
        }
        Ok(CnfFormula {
            var_count,
            clauses: rows,
        })
    }

    pub fn var_count(&self) -> usize {
        self.var_count
    }

    pub fn clause_count(&self) -> usize {
        self.clauses.len()
    }

    /// Evaluates the formula under an assignment (`assignment[v]` gives
    /// variable `v + 1`; extra entries are ignored).
    pub fn eval(&self, assignment: &[bool]) -> bool {
        self.clauses.iter().all(|clause| {
            clause.iter().enumerate().any(|(v, pol)| match pol {
                Polarity::Absent => false,
                Polarity::Positive => assignment.get(v).copied().unwrap_or(false),
                Polarity::Negative => !assignment.get(v).copied().unwrap_or(false),
            })
        })
    }

    /// Brute-force satisfiability over all `2^var_count` assignments.
    pub fn satisfiable(&self) -> bool {
        self.satisfying_assignment().is_some()
    }

    /// First satisfying assignment in lexicographic order, if any.
    pub fn satisfying_assignment(&self) -> Option<Vec<bool>> {
        for value in 0..(1u32 << self.var_count) {
            let assignment: Vec<bool> = (0..self.var_count)
                .map(|v| (value >> (self.var_count - 1 - v)) & 1 == 1)
                .collect();
            if self.eval(&assignment) {
                return Some(assignment);
            }
        }
        None
    }

    /// Parses the DIMACS subset: optional `c` comment lines, a `p cnf V C`
    /// header, then `C` clause lines of nonzero integers terminated by `0`.
    pub fn parse_dimacs(text: &str) -> Result<Self> {
        let mut header: Option<(usize, usize)> = None;
        let mut clauses: Vec<Vec<i32>> = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('c') {
                continue;
            }
            if let Some(rest) = line.strip_prefix('p') {
                if header.is_some() {
                    return Err(Error::Formula("duplicate DIMACS header".into()));
                }
                let fields: Vec<&str> = rest.split_whitespace().collect();
                if fields.len() != 3 || fields[0] != "cnf" {
                    return Err(Error::Formula(format!(
                        "line {}: header must read 'p cnf V C'",
                        lineno + 1
                    )));
                }
                let vars: usize = fields[1].parse().map_err(|_| {
                    Error::Formula(format!("line {}: bad variable count", lineno + 1))
                })?;
                let count: usize = fields[2].parse().map_err(|_| {
                    Error::Formula(format!("line {}: bad clause count", lineno + 1))
                })?;
                header = Some((vars, count));
                continue;
            }
            if header.is_none() {
                return Err(Error::Formula(format!(
                    "line {}: clause before 'p cnf' header",
                    lineno + 1
                )));
            }
            let mut lits = Vec::new();
            let mut terminated = false;
            for tok in line.split_whitespace() {
                let lit: i32 = tok.parse().map_err(|_| {
                    Error::Formula(format!("line {}: bad literal {tok:?}", lineno + 1))
                })?;
                if lit == 0 {
                    terminated = true;
                    break;
                }
                lits.push(lit);
            }
            if !terminated {
                return Err(Error::Formula(format!(
                    "line {}: clause not terminated by 0",
                    lineno + 1
                )));
            }
            clauses.push(lits);
        }
        let (vars, declared) =
            header.ok_or_else(|| Error::Formula("missing 'p cnf' header".into()))?;
        if clauses.len() != declared {
            return Err(Error::Formula(format!(
                "header declares {declared} clauses, found {}",
                clauses.len()
            )));
        }
        CnfFormula::from_clauses(vars, &clauses)
    }

    /// Fixed-width bit encoding: 2 bits of variable count, 3 bits of clause
    /// count, then 2 bits of polarity per variable slot per clause.
    pub fn encode_bits(&self) -> Vec<bool> {
        let mut bits = Vec::with_capacity(5 + 6 * self.clauses.len());
        push_uint(&mut bits, self.var_count as u64, 2);
        push_uint(&mut bits, self.clauses.len() as u64, 3);
        for clause in &self.clauses {
            for pol in clause {
                let code = match pol {
                    Polarity::Absent => 0,
                    Polarity::Positive => 1,
                    Polarity::Negative => 2,
                };
                push_uint(&mut bits, code, 2);
            }
        }
        bits
    }

    /// Protocol input carrying exactly this formula.
    pub fn to_input(&self) -> Input {
        Input::new(self.encode_bits())
    }

    /// Decodes one formula from a bit cursor, advancing it.
    pub fn decode_bits(bits: &[bool], cursor: &mut usize) -> Result<Self> {
        let var_count = take_uint(bits, cursor, 2)? as usize;
        if var_count == 0 || var_count > MAX_VARS {
            return Err(Error::Formula(format!(
                "encoded variable count {var_count} outside 1..={MAX_VARS}"
            )));
        }
        let clause_count = take_uint(bits, cursor, 3)? as usize;
        if clause_count > MAX_CLAUSES {
            return Err(Error::Formula(format!(
                "encoded clause count {clause_count} exceeds {MAX_CLAUSES}"
            )));
        }
        let mut clauses = Vec::with_capacity(clause_count);
        for _ in 0..clause_count {
            let mut row = [Polarity::Absent; MAX_VARS];
            for slot in &mut row {
                *slot = match take_uint(bits, cursor, 2)? {
                    0 => Polarity::Absent,
                    1 => Polarity::Positive,
                    2 => Polarity::Negative,
                    code => {
                        return Err(Error::Formula(format!("invalid polarity code {code}")));
                    }
                };
            }
            clauses.push(row);
        }
        Ok(CnfFormula { var_count, clauses })
    }

    /// Decodes an input holding exactly one formula.
    pub fn from_input(input: &Input) -> Result<Self> {
        let mut cursor = 0;
        let formula = Self::decode_bits(input.bits(), &mut cursor)?;
        if cursor != input.len() {
            return Err(Error::Formula(format!(
                "{} trailing bits after one encoded formula",
                input.len() - cursor
            )));
        }
        Ok(formula)
    }
}

impl fmt::Display for CnfFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.clauses.is_empty() {
            return write!(f, "(empty)");
        }
        for (ci, clause) in self.clauses.iter().enumerate() {
            if ci > 0 {
                write!(f, " & ")?;
            }
            write!(f, "(")?;
            let mut first = true;
            for (v, pol) in clause.iter().enumerate() {
                let text = match pol {
                    Polarity::Absent => continue,
                    Polarity::Positive => format!("x{}", v + 1),
                    Polarity::Negative => format!("!x{}", v + 1),
                };
                if !first {
                    write!(f, " | ")?;
                }
                write!(f, "{text}")?;
                first = false;
            }
            write!(f, ")")?;
        }
        Ok(())
    }
}

/// Encodes a tuple of formulas as one concatenated input.
pub fn encode_tuple(formulas: &[CnfFormula]) -> Input {
    assert!(!formulas.is_empty(), "a tuple needs at least one formula");
    let mut bits = Vec::new();
    for formula in formulas {
        bits.extend(formula.encode_bits());
    }
    Input::new(bits)
}

/// Decodes an input holding exactly `count` concatenated formulas.
pub fn decode_tuple(input: &Input, count: usize) -> Result<Vec<CnfFormula>> {
    let mut cursor = 0;
    let mut formulas = Vec::with_capacity(count);
    for _ in 0..count {
        formulas.push(CnfFormula::decode_bits(input.bits(), &mut cursor)?);
    }
    if cursor != input.len() {
        return Err(Error::Formula(format!(
            "{} trailing bits after {count} encoded formulas",
            input.len() - cursor
        )));
    }
    Ok(formulas)
}

fn push_uint(bits: &mut Vec<bool>, value: u64, width: usize) {
    for pos in 0..width {
        bits.push((value >> (width - 1 - pos)) & 1 == 1);
    }
}

fn take_uint(bits: &[bool], cursor: &mut usize, width: usize) -> Result<u64> {
    if *cursor + width > bits.len() {
        return Err(Error::Formula("encoded formula truncated".into()));
    }
    let mut v = 0u64;
    for _ in 0..width {
        v = (v << 1) | u64::from(bits[*cursor]);
        *cursor += 1;
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn phi1() -> CnfFormula {
        // (x1 | x2) & (!x1): satisfiable by x1=0, x2=1.
        CnfFormula::from_clauses(2, &[vec![1, 2], vec![-1]]).unwrap()
    }

    fn phi2() -> CnfFormula {
        // x1 & !x1: unsatisfiable.
        CnfFormula::from_clauses(1, &[vec![1], vec![-1]]).unwrap()
    }

    #[test]
    fn satisfiability_by_brute_force() {
        assert!(phi1().satisfiable());
        assert_eq!(phi1().satisfying_assignment(), Some(vec![false, true]));
        assert!(!phi2().satisfiable());
        let empty = CnfFormula::from_clauses(1, &[]).unwrap();
        assert!(empty.satisfiable());
        let empty_clause = CnfFormula::from_clauses(2, &[vec![]]).unwrap();
        assert!(!empty_clause.satisfiable());
    }

    #[test]
    fn dimacs_round_trip() {
        let text = "c toy instance\np cnf 2 2\n1 2 0\n-1 0\n";
        let parsed = CnfFormula::parse_dimacs(text).unwrap();
        assert_eq!(parsed, phi1());
    }

    #[test]
    fn dimacs_rejects_malformed() {
        assert!(CnfFormula::parse_dimacs("1 2 0\n").is_err());
        assert!(CnfFormula::parse_dimacs("p cnf 2 1\n1 2\n").is_err());
        assert!(CnfFormula::parse_dimacs("p cnf 2 2\n1 0\n").is_err());
        assert!(CnfFormula::parse_dimacs("p cnf 9 1\n1 0\n").is_err());
        assert!(CnfFormula::parse_dimacs("p cnf 2 1\n1 -1 0\n").is_err());
    }

    #[test]
    fn encoding_round_trip() {
        for formula in [
            phi1(),
            phi2(),
            CnfFormula::from_clauses(3, &[vec![1, -2, 3]]).unwrap(),
        ] {
            let input = formula.to_input();
            assert_eq!(CnfFormula::from_input(&input).unwrap(), formula);
        }
        let tuple = [phi1(), phi2()];
        let input = encode_tuple(&tuple);
        assert_eq!(decode_tuple(&input, 2).unwrap(), tuple.to_vec());
        assert!(decode_tuple(&input, 1).is_err());
    }
}
