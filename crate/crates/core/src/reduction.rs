//! The canonical QBF-to-mechanism construction: a closed formula
//! `forall x_1 exists x_2 ... forall x_{2d+1} phi` maps to a `2d+1`-agent
//! mechanism whose order-`d` gap is empty exactly when the formula is
//! true. `verify_reduction` runs both sides and reports whether they
//! agree; a disagreement would be a bug, never a valid outcome.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::formula::{parse_formula_at, Formula, VarName};
use crate::mechanism::Mechanism;
use crate::responsibility::is_gap_free;

/// A prenex instance with an odd number of alternating blocks starting
/// and ending with `forall`, and a quantifier-free matrix whose
/// variables are exactly the union of the blocks. Blocks may be empty.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QbfInstance {
    blocks: Vec<Vec<VarName>>,
    matrix: Formula,
}

impl QbfInstance {
    pub fn new(blocks: Vec<Vec<VarName>>, matrix: Formula) -> Result<Self> {
        if blocks.len() % 2 == 0 {
            return Err(Error::BlockStructure(format!(
                "need an odd number of blocks, got {}",
                blocks.len()
            )));
        }
        if !matrix.is_quantifier_free() {
            return Err(Error::BlockStructure(
                "matrix must be quantifier-free".to_string(),
            ));
        }
        let mut union = BTreeSet::new();
        for block in &blocks {
            for v in block {
                if !union.insert(v.clone()) {
                    return Err(Error::BlockStructure(format!(
                        "variable `{v}` appears in two blocks"
                    )));
                }
            }
        }
        let free = matrix.free_vars();
        if let Some(missing) = free.difference(&union).next() {
            return Err(Error::BlockStructure(format!(
                "matrix variable `{missing}` is in no block"
            )));
        }
        if let Some(extra) = union.difference(&free).next() {
            return Err(Error::BlockStructure(format!(
                "block variable `{extra}` does not occur in the matrix"
            )));
        }
        Ok(QbfInstance { blocks, matrix })
    }

    pub fn blocks(&self) -> &[Vec<VarName>] {
        &self.blocks
    }

    pub fn matrix(&self) -> &Formula {
        &self.matrix
    }

    /// `d`, derived from the block count (`2d+1` blocks).
    pub fn degree(&self) -> usize {
        (self.blocks.len() - 1) / 2
    }

    /// The closed formula: `forall`/`exists` alternating over the
    /// blocks, around the matrix.
    pub fn prenex_closure(&self) -> Formula {
        let mut f = self.matrix.clone();
        for (j, block) in self.blocks.iter().enumerate().rev() {
            let universal = j % 2 == 0;
            for v in block.iter().rev() {
                f = if universal {
                    Formula::forall(v.clone(), f)
                } else {
                    Formula::exists(v.clone(), f)
                };
            }
        }
        f
    }
}

/// The mechanism a QBF instance reduces to, together with the fresh
/// control variables appended to the even agents.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReducedMechanism {
    pub mechanism: Mechanism,
    /// `q_2, q_4, ..., q_2d` in agent order.
    pub q_vars: Vec<VarName>,
}

/// Builds the canonical mechanism: odd agents take the odd blocks
/// unchanged, even agent `2i` takes block `2i` with a fresh `q_2i`
/// appended, and the constraint is the matrix conjoined with all the
/// `q` variables.
pub fn reduce(instance: &QbfInstance) -> ReducedMechanism {
    let degree = instance.degree();
    let taken: BTreeSet<String> = instance
        .blocks
        .iter()
        .flatten()
        .map(|v| v.as_str().to_string())
        .collect();
    let mut q_vars = Vec::with_capacity(degree);
    for i in 1..=degree {
        // Append underscores until the name is fresh.
        let mut name = format!("q{}", 2 * i);
        while taken.contains(&name) || q_vars.iter().any(|q: &VarName| q.as_str() == name) {
            name.push('_');
        }
        q_vars.push(VarName::new(&name).expect("generated identifier is valid"));
    }
    let mut families = Vec::with_capacity(instance.blocks.len());
    for (j, block) in instance.blocks.iter().enumerate() {
        let mut family = block.clone();
        if j % 2 == 1 {
            family.push(q_vars[(j - 1) / 2].clone());
        }
        families.push(family);
    }
    let gamma = q_vars
        .iter()
        .fold(instance.matrix.clone(), |acc, q| {
            Formula::and(acc, Formula::Var(q.clone()))
        });
    let mechanism = Mechanism::new(families.len(), families, gamma)
        .expect("blocks are disjoint and the constraint covers only block and q variables");
    ReducedMechanism { mechanism, q_vars }
}

/// Both sides of the correspondence for one instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReductionReport {
    pub qbf_truth: bool,
    pub gap_free: bool,
    pub agree: bool,
}

/// Evaluates the closed formula by expansion, decides gap-freeness of
/// the reduced mechanism with the table engine, and compares.
pub fn verify_reduction(instance: &QbfInstance, budget: u32) -> Result<ReductionReport> {
    let qbf_truth = instance.prenex_closure().eval_qbf()?;
    let reduced = reduce(instance);
    let verdict = is_gap_free(&reduced.mechanism, instance.degree(), budget)?;
    Ok(ReductionReport {
        qbf_truth,
        gap_free: verdict.gap_free,
        agree: qbf_truth == verdict.gap_free,
    })
}

/// Parses the line-oriented QBF file format:
///
/// ```text
/// forall <names...>
/// exists <names...>
/// ...
/// matrix <formula>
/// ```
///
/// Lines alternate `forall`/`exists`, starting and ending with `forall`
/// (a quantifier line with no names is an empty block); `#` starts a
/// comment.
pub fn parse_qbf_file(text: &str) -> Result<QbfInstance> {
    let mut blocks: Vec<Vec<VarName>> = Vec::new();
    let mut matrix: Option<Formula> = None;
    let mut lines = text
        .lines()
        .enumerate()
        .filter_map(|(i, raw)| {
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
        .peekable();
    if lines.peek().is_none() {
        return Err(Error::EmptyInput);
    }
    while let Some((line_no, line)) = lines.next() {
        if let Some(rest) = line.strip_prefix("matrix") {
            let col = line.len() - rest.len() + 1;
            matrix = Some(parse_formula_at(rest, line_no, col)?);
            if let Some((line_no, line)) = lines.next() {
                return Err(Error::Parse {
                    line: line_no,
                    col: 1,
                    msg: format!("unexpected trailing line `{line}`"),
                });
            }
            break;
        }
        let (keyword, rest) = match line.split_once(char::is_whitespace) {
            Some((k, rest)) => (k, rest),
            None => (line, ""),
        };
        let expected = if blocks.len() % 2 == 0 { "forall" } else { "exists" };
        if keyword != expected {
            return Err(Error::Parse {
                line: line_no,
                col: 1,
                msg: format!("expected `{expected}` or `matrix`, found `{keyword}`"),
            });
        }
        let block: Vec<VarName> = rest
            .split_whitespace()
            .map(VarName::new)
            .collect::<Result<_>>()?;
        blocks.push(block);
    }
    let matrix = matrix.ok_or_else(|| Error::Parse {
        line: 0,
        col: 1,
        msg: "missing `matrix <formula>` line".to_string(),
    })?;
    QbfInstance::new(blocks, matrix)
}
