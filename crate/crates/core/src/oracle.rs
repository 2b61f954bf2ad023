//! Slow, literal route: builds the responsibility and gap predicates as
//! formula ASTs, quantifier shadowing and all, and evaluates them by
//! expansion. Ground truth for the table-based engine.
//!
//! The construction reuses variable names across quantifier scopes the
//! same way the source formulas do; a second, alpha-renamed construction
//! path is provided so the two can be asserted equal, which guards
//! against shadowing bugs in the evaluator.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::formula::{Formula, VarName};
use crate::mechanism::Mechanism;

/// Reject constructions whose estimated node count exceeds this.
pub const FORMULA_NODE_GUARD: u64 = 10_000_000;

/// Negation smart constructor: collapses a double negation so that the
/// built ASTs match the conventional way the predicates are written
/// (e.g. the first conjunct of a first-order responsibility formula is
/// the bare violation condition, not a double-negated constraint).
fn negated(f: Formula) -> Formula {
    match f {
        Formula::Not(inner) => *inner,
        other => Formula::not(other),
    }
}

/// Left fold of a conjunction list, matching the parser's associativity.
fn conjoin(mut parts: impl Iterator<Item = Formula>) -> Formula {
    let first = parts.next().expect("conjunction of at least one formula");
    parts.fold(first, Formula::and)
}

fn disjoin(mut parts: impl Iterator<Item = Formula>) -> Formula {
    let first = parts.next().expect("disjunction of at least one formula");
    parts.fold(first, Formula::or)
}

/// `R^d_i` from the order-`d-1` gap formula: the gap conjunct, and the
/// block `exists v_i forall v_{i+1} .. forall v_n` applied to the negated
/// gap. Bound names deliberately reuse the free names.
fn resp_from_gap(mech: &Mechanism, gap: &Formula, agent: usize) -> Formula {
    let mut body = negated(gap.clone());
    for j in (agent..=mech.agent_count()).rev() {
        for var in mech.families()[j - 1].iter().rev() {
            body = if j == agent {
                Formula::exists(var.clone(), body)
            } else {
                Formula::forall(var.clone(), body)
            };
        }
    }
    Formula::and(gap.clone(), body)
}

/// Gap formulas `B_0 .. B_degree` as ASTs, built incrementally.
fn build_gap_chain(mech: &Mechanism, degree: usize) -> Vec<Formula> {
    let mut gaps = vec![negated(mech.gamma().clone())];
    for d in 1..=degree {
        let prev = &gaps[d - 1];
        let conjuncts = std::iter::once(prev.clone()).chain(
            (1..=mech.agent_count()).map(|i| Formula::not(resp_from_gap(mech, prev, i))),
        );
        gaps.push(conjoin(conjuncts));
    }
    gaps
}

/// The syntactic `R^d_i` (`d >= 1`).
pub fn build_resp_formula(mech: &Mechanism, degree: usize, agent: usize) -> Result<Formula> {
    if degree == 0 {
        return Err(Error::DegreeOutOfRange);
    }
    let n = mech.agent_count();
    if agent == 0 || agent > n {
        return Err(Error::AgentOutOfRange { agent, agents: n });
    }
    check_size(estimate_resp_size(mech, degree, agent))?;
    let gaps = build_gap_chain(mech, degree - 1);
    Ok(resp_from_gap(mech, &gaps[degree - 1], agent))
}

/// The syntactic order-`d` gap formula; for `d = 0` it is just the
/// negated constraint.
pub fn build_gap_formula(mech: &Mechanism, degree: usize) -> Result<Formula> {
    check_size(estimate_gap_size(mech, degree))?;
    Ok(build_gap_chain(mech, degree).pop().unwrap())
}

/// Alpha-renamed twin of [`build_resp_formula`]: every quantifier binds a
/// fresh variable, so no shadowing occurs anywhere in the result.
pub fn build_resp_formula_renamed(
    mech: &Mechanism,
    degree: usize,
    agent: usize,
) -> Result<Formula> {
    if degree == 0 {
        return Err(Error::DegreeOutOfRange);
    }
    let n = mech.agent_count();
    if agent == 0 || agent > n {
        return Err(Error::AgentOutOfRange { agent, agents: n });
    }
    check_size(estimate_resp_size(mech, degree, agent))?;
    let mut namer = FreshNamer::for_mechanism(mech);
    let gaps = build_gap_chain_renamed(mech, degree - 1, &mut namer);
    Ok(resp_from_gap_renamed(
        mech,
        &gaps[degree - 1],
        agent,
        &mut namer,
    ))
}

fn build_gap_chain_renamed(
    mech: &Mechanism,
    degree: usize,
    namer: &mut FreshNamer,
) -> Vec<Formula> {
    let mut gaps = vec![negated(mech.gamma().clone())];
    for d in 1..=degree {
        let prev = &gaps[d - 1];
        let conjuncts: Vec<Formula> = std::iter::once(prev.clone())
            .chain(
                (1..=mech.agent_count())
                    .map(|i| Formula::not(resp_from_gap_renamed(mech, prev, i, namer))),
            )
            .collect();
        gaps.push(conjoin(conjuncts.into_iter()));
    }
    gaps
}

fn resp_from_gap_renamed(
    mech: &Mechanism,
    gap: &Formula,
    agent: usize,
    namer: &mut FreshNamer,
) -> Formula {
    let quantified: Vec<(usize, VarName, VarName)> = (agent..=mech.agent_count())
        .flat_map(|j| {
            mech.families()[j - 1]
                .iter()
                .map(move |v| (j, v.clone()))
                .collect::<Vec<_>>()
        })
        .map(|(j, v)| {
            let fresh = namer.fresh(&v);
            (j, v, fresh)
        })
        .collect();
    let mut body = negated(gap.clone());
    for (_, old, fresh) in &quantified {
        body = rename_free(&body, old, fresh);
    }
    for (j, _, fresh) in quantified.iter().rev() {
        body = if *j == agent {
            Formula::exists(fresh.clone(), body)
        } else {
            Formula::forall(fresh.clone(), body)
        };
    }
    Formula::and(gap.clone(), body)
}

/// Renames the free occurrences of `old` to `fresh`, leaving occurrences
/// bound by an inner quantifier of the same name untouched.
fn rename_free(f: &Formula, old: &VarName, fresh: &VarName) -> Formula {
    match f {
        Formula::Const(_) => f.clone(),
        Formula::Var(v) => {
            if v == old {
                Formula::Var(fresh.clone())
            } else {
                f.clone()
            }
        }
        Formula::Not(g) => Formula::not(rename_free(g, old, fresh)),
        Formula::And(a, b) => Formula::and(rename_free(a, old, fresh), rename_free(b, old, fresh)),
        Formula::Or(a, b) => Formula::or(rename_free(a, old, fresh), rename_free(b, old, fresh)),
        Formula::Forall(v, g) | Formula::Exists(v, g) => {
            let body = if v == old {
                (**g).clone()
            } else {
                rename_free(g, old, fresh)
            };
            if matches!(f, Formula::Forall(_, _)) {
                Formula::forall(v.clone(), body)
            } else {
                Formula::exists(v.clone(), body)
            }
        }
    }
}

struct FreshNamer {
    used: BTreeSet<String>,
    counter: usize,
}

impl FreshNamer {
    fn for_mechanism(mech: &Mechanism) -> Self {
        FreshNamer {
            used: mech
                .flat_vars()
                .iter()
                .map(|v| v.as_str().to_string())
                .collect(),
            counter: 0,
        }
    }

    fn fresh(&mut self, base: &VarName) -> VarName {
        loop {
            let candidate = format!("{}__r{}", base, self.counter);
            self.counter += 1;
            if self.used.insert(candidate.clone()) {
                return VarName::new(&candidate).expect("suffixed identifier stays valid");
            }
        }
    }
}

/// Evaluates the closed gap-freeness formula
/// `forall v_1 .. forall v_n (gamma | OR of all R^d'_j, d' <= degree)`
/// by full expansion. Must agree with the table engine's verdict.
pub fn oracle_check(mech: &Mechanism, degree: usize) -> Result<bool> {
    check_size(estimate_check_size(mech, degree))?;
    let gaps = build_gap_chain(mech, degree);
    let mut parts = vec![mech.gamma().clone()];
    for d in 1..=degree {
        for agent in 1..=mech.agent_count() {
            parts.push(resp_from_gap(mech, &gaps[d - 1], agent));
        }
    }
    let mut closed = disjoin(parts.into_iter());
    for v in mech.flat_vars().iter().rev() {
        closed = Formula::forall(v.clone(), closed);
    }
    closed.eval_qbf()
}

fn check_size(estimated: u128) -> Result<()> {
    if estimated > FORMULA_NODE_GUARD as u128 {
        return Err(Error::FormulaTooLarge {
            estimated,
            limit: FORMULA_NODE_GUARD,
        });
    }
    Ok(())
}

/// Node-count recurrences, saturating; safe to evaluate before building.
fn gap_and_resp_sizes(mech: &Mechanism, degree: usize) -> (Vec<u128>, Vec<Vec<u128>>) {
    let n = mech.agent_count();
    let gamma_nodes = mech.gamma().node_count() as u128;
    let mut gap_sizes = vec![gamma_nodes.saturating_add(1)];
    let mut resp_sizes: Vec<Vec<u128>> = Vec::new();
    for d in 1..=degree {
        let prev = gap_sizes[d - 1];
        let level: Vec<u128> = (1..=n)
            .map(|i| {
                let quantifiers: usize = (i..=n).map(|j| mech.family_bit_count(j)).sum();
                prev.saturating_mul(2).saturating_add(quantifiers as u128 + 2)
            })
            .collect();
        let mut total = prev;
        for r in &level {
            total = total.saturating_add(r.saturating_add(2));
        }
        gap_sizes.push(total);
        resp_sizes.push(level);
    }
    (gap_sizes, resp_sizes)
}

fn estimate_gap_size(mech: &Mechanism, degree: usize) -> u128 {
    gap_and_resp_sizes(mech, degree).0[degree]
}

fn estimate_resp_size(mech: &Mechanism, degree: usize, agent: usize) -> u128 {
    if degree == 0 {
        return 0;
    }
    gap_and_resp_sizes(mech, degree).1[degree - 1][agent - 1]
}

fn estimate_check_size(mech: &Mechanism, degree: usize) -> u128 {
    let (_, resps) = gap_and_resp_sizes(mech, degree);
    let mut total = (mech.gamma().node_count() + mech.var_count()) as u128;
    for level in &resps {
        for r in level {
            total = total.saturating_add(r.saturating_add(1));
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse_formula;
    use crate::mechanism::ActionProfile;

    fn v(name: &str) -> VarName {
        VarName::new(name).unwrap()
    }

    fn three_factory() -> Mechanism {
        Mechanism::new(
            3,
            vec![vec![v("pa")], vec![v("pb")], vec![v("pc")]],
            parse_formula("!(pa | pb | pc)").unwrap(),
        )
        .unwrap()
    }

    fn two_factory() -> Mechanism {
        Mechanism::new(
            2,
            vec![vec![v("pa")], vec![v("pb")]],
            parse_formula("!(pa | pb)").unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn first_order_responsibility_of_the_first_factory() {
        let m = three_factory();
        let built = build_resp_formula(&m, 1, 1).unwrap();
        let expected = parse_formula(
            "(pa | pb | pc) & (exists pa . forall pb . forall pc . !(pa | pb | pc))",
        )
        .unwrap();
        assert_eq!(built, expected);
    }

    #[test]
    fn last_agent_formula_has_no_universal_quantifier() {
        let m = three_factory();
        let built = build_resp_formula(&m, 1, 3).unwrap();
        let expected =
            parse_formula("(pa | pb | pc) & (exists pc . !(pa | pb | pc))").unwrap();
        assert_eq!(built, expected);
        fn contains_forall(f: &Formula) -> bool {
            match f {
                Formula::Forall(_, _) => true,
                Formula::Const(_) | Formula::Var(_) => false,
                Formula::Not(g) | Formula::Exists(_, g) => contains_forall(g),
                Formula::And(a, b) | Formula::Or(a, b) => {
                    contains_forall(a) || contains_forall(b)
                }
            }
        }
        assert!(!contains_forall(&built));
    }

    #[test]
    fn second_order_formula_is_gap_conjunct_and_quantified_negation() {
        let m = two_factory();
        let gap1 = build_gap_formula(&m, 1).unwrap();
        let built = build_resp_formula(&m, 2, 1).unwrap();
        match built {
            Formula::And(left, right) => {
                assert_eq!(*left, gap1);
                match *right {
                    Formula::Exists(ref x, ref inner) => {
                        assert_eq!(x.as_str(), "pa");
                        match **inner {
                            Formula::Forall(ref y, ref body) => {
                                assert_eq!(y.as_str(), "pb");
                                assert_eq!(**body, Formula::not(gap1.clone()));
                            }
                            ref other => panic!("expected forall, got {other:?}"),
                        }
                    }
                    ref other => panic!("expected exists, got {other:?}"),
                }
            }
            other => panic!("expected conjunction, got {other:?}"),
        }
    }

    #[test]
    fn gap_formula_matches_the_worked_example() {
        let m = two_factory();
        let gap1 = build_gap_formula(&m, 1).unwrap();
        let hits: Vec<usize> = (0..4)
            .filter(|&k| m.substitute(&gap1, &m.profile_at(k)).unwrap())
            .collect();
        // Profiles (1,0) and (1,1), indices 2 and 3.
        assert_eq!(hits, vec![2, 3]);
    }

    #[test]
    fn order_zero_gap_formula_is_the_negated_constraint() {
        let m = two_factory();
        assert_eq!(
            build_gap_formula(&m, 0).unwrap(),
            parse_formula("pa | pb").unwrap()
        );
    }

    #[test]
    fn mixed_example_second_order_gap_formula_is_everywhere_false() {
        let m = Mechanism::new(
            3,
            vec![vec![v("pa")], vec![v("pb")], vec![v("pc")]],
            parse_formula("!(pa | (pb & pc))").unwrap(),
        )
        .unwrap();
        let gap2 = build_gap_formula(&m, 2).unwrap();
        for k in 0..8 {
            assert!(!m.substitute(&gap2, &m.profile_at(k)).unwrap());
        }
    }

    #[test]
    fn oracle_check_examples() {
        let m = three_factory();
        assert!(oracle_check(&m, 3).unwrap());
        assert!(!oracle_check(&m, 2).unwrap());
        let tautological = Mechanism::new(
            1,
            vec![vec![v("pa")]],
            parse_formula("pa | !pa").unwrap(),
        )
        .unwrap();
        assert!(oracle_check(&tautological, 0).unwrap());
    }

    #[test]
    fn renamed_path_agrees_with_the_shadowing_path() {
        let m = three_factory();
        for d in 1..=2 {
            for agent in 1..=3 {
                let shadowed = build_resp_formula(&m, d, agent).unwrap();
                let renamed = build_resp_formula_renamed(&m, d, agent).unwrap();
                assert_eq!(shadowed.free_vars(), renamed.free_vars());
                for k in 0..8usize {
                    let s: ActionProfile = m.profile_at(k);
                    assert_eq!(
                        m.substitute(&shadowed, &s).unwrap(),
                        m.substitute(&renamed, &s).unwrap(),
                        "d={d} agent={agent} profile={k}"
                    );
                }
            }
        }
    }

    #[test]
    fn size_guard_rejects_exploding_constructions() {
        let m = three_factory();
        assert!(matches!(
            build_gap_formula(&m, 12),
            Err(Error::FormulaTooLarge { .. })
        ));
        assert!(matches!(
            build_resp_formula(&m, 13, 1),
            Err(Error::FormulaTooLarge { .. })
        ));
    }
}
