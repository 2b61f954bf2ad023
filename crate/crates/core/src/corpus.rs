//! Seeded random instance generators for the property and cross-check
//! suites. Everything is driven by a caller-supplied RNG so corpora are
//! reproducible from a single seed.

use rand::Rng;

use crate::formula::{Formula, VarName};
use crate::mechanism::Mechanism;
use crate::reduction::QbfInstance;

/// Random quantifier-free formula over `vars` with tree depth at most
/// `max_depth`. `vars` must be non-empty.
pub fn random_formula<R: Rng + ?Sized>(rng: &mut R, vars: &[VarName], max_depth: usize) -> Formula {
    assert!(!vars.is_empty(), "need at least one variable");
    if max_depth == 0 {
        return Formula::Var(vars[rng.random_range(0..vars.len())].clone());
    }
    match rng.random_range(0..10) {
        0..=2 => Formula::Var(vars[rng.random_range(0..vars.len())].clone()),
        3 | 4 => Formula::not(random_formula(rng, vars, max_depth - 1)),
        5 | 6 => Formula::and(
            random_formula(rng, vars, max_depth - 1),
            random_formula(rng, vars, max_depth - 1),
        ),
        _ => Formula::or(
            random_formula(rng, vars, max_depth - 1),
            random_formula(rng, vars, max_depth - 1),
        ),
    }
}

/// Random formula that may also contain quantifiers, possibly shadowing
/// names from `vars`.
pub fn random_quantified_formula<R: Rng + ?Sized>(
    rng: &mut R,
    vars: &[VarName],
    max_depth: usize,
) -> Formula {
    assert!(!vars.is_empty(), "need at least one variable");
    if max_depth == 0 {
        return Formula::Var(vars[rng.random_range(0..vars.len())].clone());
    }
    match rng.random_range(0..12) {
        0..=2 => Formula::Var(vars[rng.random_range(0..vars.len())].clone()),
        3 | 4 => Formula::not(random_quantified_formula(rng, vars, max_depth - 1)),
        5 | 6 => Formula::and(
            random_quantified_formula(rng, vars, max_depth - 1),
            random_quantified_formula(rng, vars, max_depth - 1),
        ),
        7 | 8 => Formula::or(
            random_quantified_formula(rng, vars, max_depth - 1),
            random_quantified_formula(rng, vars, max_depth - 1),
        ),
        9 | 10 => Formula::exists(
            vars[rng.random_range(0..vars.len())].clone(),
            random_quantified_formula(rng, vars, max_depth - 1),
        ),
        _ => Formula::forall(
            vars[rng.random_range(0..vars.len())].clone(),
            random_quantified_formula(rng, vars, max_depth - 1),
        ),
    }
}

/// Random mechanism with at most `max_agents` agents and at most
/// `max_vars` variables in total (at least one variable overall; agents
/// may get empty variable lists).
pub fn random_mechanism<R: Rng + ?Sized>(
    rng: &mut R,
    max_agents: usize,
    max_vars: usize,
) -> Mechanism {
    let n = rng.random_range(1..=max_agents);
    let mut sizes = vec![0usize; n];
    let mut total = 0;
    for size in sizes.iter_mut() {
        let cap = (max_vars - total).min(3);
        *size = rng.random_range(0..=cap);
        total += *size;
    }
    if total == 0 {
        sizes[0] = 1;
        total = 1;
    }
    let mut families = Vec::with_capacity(n);
    let mut next = 1;
    for size in sizes {
        let family: Vec<VarName> = (0..size)
            .map(|_| {
                let v = VarName::new(&format!("p{next}")).unwrap();
                next += 1;
                v
            })
            .collect();
        families.push(family);
    }
    let flat: Vec<VarName> = families.iter().flatten().cloned().collect();
    let depth = rng.random_range(1..=6usize.min(total + 2));
    let gamma = random_formula(rng, &flat, depth);
    Mechanism::new(n, families, gamma).expect("generated families are disjoint by construction")
}

/// Like [`random_mechanism`] but discards mechanisms whose constraint is
/// unsatisfiable over the profile space.
pub fn random_satisfiable_mechanism<R: Rng + ?Sized>(
    rng: &mut R,
    max_agents: usize,
    max_vars: usize,
) -> Mechanism {
    loop {
        let m = random_mechanism(rng, max_agents, max_vars);
        let satisfiable = m
            .all_profiles(crate::mechanism::DEFAULT_VAR_BUDGET)
            .unwrap()
            .any(|s| m.substitute(m.gamma(), &s).unwrap());
        if satisfiable {
            return m;
        }
    }
}

/// Random QBF instance with `2*degree + 1` alternating blocks (at most
/// two variables per block, at most `max_total_vars` overall) and a
/// random matrix of depth at most 6 mentioning every block variable.
pub fn random_qbf<R: Rng + ?Sized>(
    rng: &mut R,
    degree: usize,
    max_total_vars: usize,
) -> QbfInstance {
    let block_count = 2 * degree + 1;
    let mut sizes = vec![0usize; block_count];
    let mut total = 0;
    for size in sizes.iter_mut() {
        let cap = (max_total_vars - total).min(2);
        *size = rng.random_range(0..=cap);
        total += *size;
    }
    if total == 0 {
        sizes[rng.random_range(0..block_count)] = 1;
    }
    let mut blocks = Vec::with_capacity(block_count);
    let mut next = 1;
    for size in sizes {
        let block: Vec<VarName> = (0..size)
            .map(|_| {
                let v = VarName::new(&format!("x{next}")).unwrap();
                next += 1;
                v
            })
            .collect();
        blocks.push(block);
    }
    let flat: Vec<VarName> = blocks.iter().flatten().cloned().collect();
    let depth = rng.random_range(1..=6);
    let mut matrix = random_formula(rng, &flat, depth);
    // The blocks must cover the matrix variables exactly; splice in any
    // variable the random tree missed without changing the function.
    let used = matrix.free_vars();
    for v in &flat {
        if !used.contains(v) {
            let var = Formula::Var(v.clone());
            matrix = if rng.random_bool(0.5) {
                Formula::and(matrix, Formula::or(var.clone(), Formula::not(var)))
            } else {
                Formula::or(matrix, Formula::and(var.clone(), Formula::not(var)))
            };
        }
    }
    QbfInstance::new(blocks, matrix).expect("generated blocks cover the matrix by construction")
}
