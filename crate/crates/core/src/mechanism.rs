//! Sequential decision-making mechanisms: agents acting in order, each
//! fixing the values of its own ordered variable set, judged against a
//! quantifier-free deontic constraint.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::formula::{parse_formula_at, Assignment, Formula, VarName};

/// Default cap on the total variable count for exhaustive enumeration.
pub const DEFAULT_VAR_BUDGET: u32 = 24;

/// Hard cap regardless of budget overrides; beyond this the tables stop
/// fitting in memory anyway.
pub const MAX_VAR_BUDGET: u32 = 32;

/// A mechanism `(n, v, gamma)`: `n` agents, a family of pairwise disjoint
/// ordered variable sets, and a quantifier-free constraint over their
/// union.
///
/// Bit-index convention, fixed across the whole crate: profiles are
/// indexed by the flattened bit string with agent 1's bits most
/// significant and bits within an agent in the family's declared order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mechanism {
    families: Vec<Vec<VarName>>,
    gamma: Formula,
    /// Flattened variables in index order.
    flat_vars: Vec<VarName>,
    /// Bits preceding each agent's block in the flattened order;
    /// `prefix_bits[n]` is the total variable count.
    prefix_bits: Vec<usize>,
}

impl Mechanism {
    /// Validates and builds a mechanism. `n` is checked against the
    /// family list, the families against each other, and `gamma` against
    /// the union of the families.
    pub fn new(n: usize, families: Vec<Vec<VarName>>, gamma: Formula) -> Result<Self> {
        if n != families.len() {
            return Err(Error::AgentCountMismatch {
                declared: n,
                actual: families.len(),
            });
        }
        let mut seen: HashMap<&VarName, ()> = HashMap::new();
        for family in &families {
            for v in family {
                if seen.insert(v, ()).is_some() {
                    return Err(Error::DuplicateVariable(v.clone()));
                }
            }
        }
        if !gamma.is_quantifier_free() {
            return Err(Error::QuantifiedConstraint);
        }
        for v in gamma.free_vars() {
            if !seen.contains_key(&v) {
                return Err(Error::UnknownVariable(v));
            }
        }
        let flat_vars: Vec<VarName> = families.iter().flatten().cloned().collect();
        let mut prefix_bits = Vec::with_capacity(families.len() + 1);
        let mut total = 0;
        for family in &families {
            prefix_bits.push(total);
            total += family.len();
        }
        prefix_bits.push(total);
        Ok(Mechanism {
            families,
            gamma,
            flat_vars,
            prefix_bits,
        })
    }

    pub fn agent_count(&self) -> usize {
        self.families.len()
    }

    pub fn families(&self) -> &[Vec<VarName>] {
        &self.families
    }

    pub fn gamma(&self) -> &Formula {
        &self.gamma
    }

    /// Total variable count `m`; profiles are the `2^m` bit strings.
    pub fn var_count(&self) -> usize {
        *self.prefix_bits.last().unwrap()
    }

    /// Variables in the global bit-index order.
    pub fn flat_vars(&self) -> &[VarName] {
        &self.flat_vars
    }

    /// Number of bits before agent `i`'s block (agents are 1-based).
    pub fn prefix_bit_count(&self, i: usize) -> usize {
        self.prefix_bits[i - 1]
    }

    /// Width of agent `i`'s block.
    pub fn family_bit_count(&self, i: usize) -> usize {
        self.families[i - 1].len()
    }

    pub(crate) fn check_budget(&self, budget: u32) -> Result<()> {
        let vars = self.var_count();
        let effective = budget.min(MAX_VAR_BUDGET);
        if vars > effective as usize {
            return Err(Error::BudgetExceeded {
                vars,
                budget: effective,
            });
        }
        Ok(())
    }

    /// Number of profiles, `2^m`. Only valid within budget.
    pub(crate) fn profile_space(&self) -> usize {
        1usize << self.var_count()
    }

    /// The profile at index `k` under the global bit-index convention.
    pub fn profile_at(&self, k: usize) -> ActionProfile {
        let m = self.var_count();
        debug_assert!(m == 0 || k >> m == 0);
        let parts = self
            .families
            .iter()
            .enumerate()
            .map(|(agent0, family)| {
                let offset = self.prefix_bits[agent0];
                (0..family.len())
                    .map(|j| k >> (m - 1 - (offset + j)) & 1 == 1)
                    .collect()
            })
            .collect();
        ActionProfile { parts }
    }

    /// Index of a profile; inverse of [`profile_at`](Self::profile_at).
    pub fn index_of(&self, s: &ActionProfile) -> Result<usize> {
        self.check_shape(s)?;
        let m = self.var_count();
        let mut k = 0usize;
        let mut pos = 0;
        for part in &s.parts {
            for &bit in part {
                if bit {
                    k |= 1 << (m - 1 - pos);
                }
                pos += 1;
            }
        }
        Ok(k)
    }

    pub fn check_shape(&self, s: &ActionProfile) -> Result<()> {
        if s.parts.len() != self.families.len()
            || s.parts
                .iter()
                .zip(&self.families)
                .any(|(p, f)| p.len() != f.len())
        {
            return Err(Error::ShapeMismatch);
        }
        Ok(())
    }

    /// Enumerates all `2^m` profiles in lexicographic order of the
    /// flattened bit string.
    pub fn all_profiles(&self, budget: u32) -> Result<impl ExactSizeIterator<Item = ActionProfile> + '_> {
        self.check_budget(budget)?;
        Ok((0..self.profile_space()).map(|k| self.profile_at(k)))
    }

    /// The assignment a profile induces on the mechanism's variables.
    pub fn assignment_of(&self, s: &ActionProfile) -> Result<Assignment> {
        self.check_shape(s)?;
        let mut a = Assignment::new();
        for (family, part) in self.families.iter().zip(&s.parts) {
            for (v, &bit) in family.iter().zip(part) {
                a.insert(v.clone(), bit);
            }
        }
        Ok(a)
    }

    /// `phi[s/v]`: the Boolean value of `phi` under the valuation that
    /// assigns each variable its bit from the profile.
    pub fn substitute(&self, phi: &Formula, s: &ActionProfile) -> Result<bool> {
        let a = self.assignment_of(s)?;
        for v in phi.free_vars() {
            if !a.contains_key(&v) {
                return Err(Error::UnknownVariable(v));
            }
        }
        phi.eval(&a)
    }

    /// Renders a profile in the CLI literal syntax, `pa=1,pb=0`.
    pub fn profile_literal(&self, s: &ActionProfile) -> Result<String> {
        self.check_shape(s)?;
        let mut out = String::new();
        for (family, part) in self.families.iter().zip(&s.parts) {
            for (v, &bit) in family.iter().zip(part) {
                if !out.is_empty() {
                    out.push(',');
                }
                let _ = write!(out, "{}={}", v, bit as u8);
            }
        }
        Ok(out)
    }

    /// Parses a profile literal (`pa=1,pb=0,pc=0`). Every variable of the
    /// mechanism must appear exactly once.
    pub fn parse_profile_literal(&self, text: &str) -> Result<ActionProfile> {
        let mut values: HashMap<VarName, bool> = HashMap::new();
        for piece in text.split(',') {
            let piece = piece.trim();
            let (name, value) = piece.split_once('=').ok_or_else(|| Error::Parse {
                line: 1,
                col: 1,
                msg: format!("expected `var=bit`, found `{piece}`"),
            })?;
            let var = VarName::new(name.trim())?;
            let bit = match value.trim() {
                "0" => false,
                "1" => true,
                other => {
                    return Err(Error::Parse {
                        line: 1,
                        col: 1,
                        msg: format!("expected bit 0 or 1 for `{name}`, found `{other}`"),
                    })
                }
            };
            if values.insert(var.clone(), bit).is_some() {
                return Err(Error::ProfileMismatch(format!("`{var}` given twice")));
            }
        }
        let mut parts = Vec::with_capacity(self.families.len());
        for family in &self.families {
            let mut part = Vec::with_capacity(family.len());
            for v in family {
                match values.remove(v) {
                    Some(b) => part.push(b),
                    None => return Err(Error::ProfileMismatch(format!("`{v}` missing"))),
                }
            }
            parts.push(part);
        }
        if let Some(extra) = values.into_keys().next() {
            return Err(Error::ProfileMismatch(format!(
                "`{extra}` is not a mechanism variable"
            )));
        }
        Ok(ActionProfile { parts })
    }

    /// Serializes to the line-oriented mechanism file format.
    pub fn to_file_string(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "agents {}", self.agent_count());
        for (i, family) in self.families.iter().enumerate() {
            let _ = write!(out, "agent {} vars", i + 1);
            for v in family {
                let _ = write!(out, " {v}");
            }
            out.push('\n');
        }
        let _ = writeln!(out, "constraint {}", self.gamma);
        out
    }
}

/// One action per agent: a family of bit vectors shape-matching the
/// mechanism's variable families.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ActionProfile {
    pub parts: Vec<Vec<bool>>,
}

impl ActionProfile {
    pub fn new(parts: Vec<Vec<bool>>) -> Self {
        ActionProfile { parts }
    }

    /// Flattened bits in the global index order.
    pub fn flat_bits(&self) -> Vec<bool> {
        self.parts.iter().flatten().copied().collect()
    }
}

/// Parses the line-oriented mechanism file format:
///
/// ```text
/// agents <n>
/// agent <i> vars <name> <name> ...
/// constraint <formula>
/// ```
///
/// `#` starts a comment; blank lines are ignored.
pub fn parse_mechanism_file(text: &str) -> Result<Mechanism> {
    let mut lines = significant_lines(text);
    let (line_no, first) = lines
        .next()
        .ok_or(Error::EmptyInput)?;
    let n: usize = match first.strip_prefix("agents") {
        Some(rest) => rest.trim().parse().map_err(|_| Error::Parse {
            line: line_no,
            col: 1,
            msg: format!("expected `agents <n>`, found `{first}`"),
        })?,
        None => {
            return Err(Error::Parse {
                line: line_no,
                col: 1,
                msg: format!("expected `agents <n>`, found `{first}`"),
            })
        }
    };
    let mut families = Vec::with_capacity(n);
    for expected in 1..=n {
        let (line_no, line) = lines.next().ok_or_else(|| Error::Parse {
            line: 0,
            col: 1,
            msg: format!("missing `agent {expected} vars ...` line"),
        })?;
        let rest = line.strip_prefix("agent").ok_or_else(|| Error::Parse {
            line: line_no,
            col: 1,
            msg: format!("expected `agent {expected} vars ...`, found `{line}`"),
        })?;
        let mut words = rest.split_whitespace();
        let index: usize = words
            .next()
            .and_then(|w| w.parse().ok())
            .ok_or_else(|| Error::Parse {
                line: line_no,
                col: 1,
                msg: "expected an agent number after `agent`".to_string(),
            })?;
        if index != expected {
            return Err(Error::Parse {
                line: line_no,
                col: 1,
                msg: format!("expected agent {expected}, found agent {index}"),
            });
        }
        if words.next() != Some("vars") {
            return Err(Error::Parse {
                line: line_no,
                col: 1,
                msg: "expected `vars` after the agent number".to_string(),
            });
        }
        let family: Vec<VarName> = words.map(VarName::new).collect::<Result<_>>()?;
        families.push(family);
    }
    let (line_no, line) = lines.next().ok_or_else(|| Error::Parse {
        line: 0,
        col: 1,
        msg: "missing `constraint <formula>` line".to_string(),
    })?;
    let body = line.strip_prefix("constraint").ok_or_else(|| Error::Parse {
        line: line_no,
        col: 1,
        msg: format!("expected `constraint <formula>`, found `{line}`"),
    })?;
    let col = line.len() - body.len() + 1;
    let gamma = parse_formula_at(body, line_no, col)?;
    if let Some((line_no, line)) = lines.next() {
        return Err(Error::Parse {
            line: line_no,
            col: 1,
            msg: format!("unexpected trailing line `{line}`"),
        });
    }
    Mechanism::new(n, families, gamma)
}

/// Yields `(1-based line number, comment-stripped trimmed line)` for
/// non-blank lines.
fn significant_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let stripped = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        };
        let trimmed = stripped.trim();
        if trimmed.is_empty() {
            None
        } else {
            Some((i + 1, trimmed))
        }
    })
}
