//! The semantic responsibility engine. Responsibility and gap predicates
//! are computed as memoized truth tables over the full profile space
//! instead of materializing the nested formulas, which grow
//! multiplicatively with the order. The syntactic route survives in the
//! oracle module as the correctness anchor.

use crate::bitset::Bitset;
use crate::error::{Error, Result};
use crate::formula::Formula;
use crate::mechanism::{ActionProfile, Mechanism};

/// The semantic extension of a predicate over all `2^m` profiles,
/// indexed by profile index under the global bit-index convention.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruthTable {
    pub(crate) bits: Bitset,
    vars: usize,
}

impl TruthTable {
    /// Tabulates a quantifier-free formula over a mechanism's profile
    /// space with word-parallel operations.
    pub fn of_formula(mech: &Mechanism, f: &Formula) -> Result<TruthTable> {
        let m = mech.var_count();
        let bits = Self::tabulate(mech, f, m)?;
        Ok(TruthTable { bits, vars: m })
    }

    fn tabulate(mech: &Mechanism, f: &Formula, m: usize) -> Result<Bitset> {
        let len = 1usize << m;
        match f {
            Formula::Const(b) => {
                let mut bits = Bitset::zeros(len);
                if *b {
                    bits.negate();
                }
                Ok(bits)
            }
            Formula::Var(v) => {
                let pos = mech
                    .flat_vars()
                    .iter()
                    .position(|w| w == v)
                    .ok_or_else(|| Error::UnknownVariable(v.clone()))?;
                Ok(Self::var_pattern(m, pos))
            }
            Formula::Not(g) => {
                let mut bits = Self::tabulate(mech, g, m)?;
                bits.negate();
                Ok(bits)
            }
            Formula::And(a, b) => {
                let mut bits = Self::tabulate(mech, a, m)?;
                bits.and_assign(&Self::tabulate(mech, b, m)?);
                Ok(bits)
            }
            Formula::Or(a, b) => {
                let mut bits = Self::tabulate(mech, a, m)?;
                bits.or_assign(&Self::tabulate(mech, b, m)?);
                Ok(bits)
            }
            Formula::Forall(_, _) | Formula::Exists(_, _) => Err(Error::QuantifiedConstraint),
        }
    }

    /// Table of the variable at flat position `pos`: profile index bit
    /// `m-1-pos`, i.e. runs of `2^(m-1-pos)` zeros and ones alternating.
    fn var_pattern(m: usize, pos: usize) -> Bitset {
        let len = 1usize << m;
        let run = 1usize << (m - 1 - pos);
        let mut bits = Bitset::zeros(len);
        let mut start = run;
        while start < len {
            for i in start..start + run {
                bits.set(i);
            }
            start += 2 * run;
        }
        bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_all_zero()
    }

    pub fn get(&self, idx: usize) -> bool {
        self.bits.get(idx)
    }

    pub fn count_ones(&self) -> usize {
        self.bits.count_ones()
    }

    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits.iter_ones()
    }
}

/// All gap tables `B_0..B_d` and responsibility tables `R^d'_i` for a
/// mechanism up to a requested order.
///
/// `B_0` is the complement of the constraint's table; each next level is
/// `B_k = B_{k-1} & all-agents-not-responsible`, and `R^k_i` holds at a
/// profile iff `B_{k-1}` does and some action of agent `i` forces
/// `B_{k-1}` false for every continuation of the later agents.
#[derive(Debug, Clone)]
pub struct RespLevels {
    mech: Mechanism,
    degree: usize,
    bad: Vec<TruthTable>,
    resp: Vec<Vec<TruthTable>>,
}

impl RespLevels {
    pub fn mechanism(&self) -> &Mechanism {
        &self.mech
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Gap table `B_d` for `0 <= d <= degree`.
    pub fn bad(&self, d: usize) -> &TruthTable {
        &self.bad[d]
    }

    /// Responsibility table `R^d_i` for `1 <= d <= degree`, `1 <= i <= n`.
    pub fn resp(&self, d: usize, agent: usize) -> &TruthTable {
        &self.resp[d - 1][agent - 1]
    }

    /// Reads one responsibility bit, validating the agent, order, and
    /// profile shape.
    pub fn is_responsible(&self, d: usize, agent: usize, s: &ActionProfile) -> Result<bool> {
        if d == 0 || d > self.degree {
            return Err(Error::DegreeOutOfRange);
        }
        let n = self.mech.agent_count();
        if agent == 0 || agent > n {
            return Err(Error::AgentOutOfRange { agent, agents: n });
        }
        let idx = self.mech.index_of(s)?;
        Ok(self.resp(d, agent).get(idx))
    }

    /// All `(agent, order)` pairs responsible at the given profile index.
    pub fn responsibility_pairs(&self, idx: usize) -> Vec<(usize, usize)> {
        let mut pairs = Vec::new();
        for d in 1..=self.degree {
            for agent in 1..=self.mech.agent_count() {
                if self.resp(d, agent).get(idx) {
                    pairs.push((agent, d));
                }
            }
        }
        pairs
    }
}

/// Computes every `B` and `R` table up to `degree` (which may be 0).
pub fn compute_levels(mech: &Mechanism, degree: usize, budget: u32) -> Result<RespLevels> {
    mech.check_budget(budget)?;
    let mut b0 = TruthTable::of_formula(mech, mech.gamma())?;
    b0.bits.negate();
    let mut bad = vec![b0];
    let mut resp = Vec::with_capacity(degree);
    for _ in 1..=degree {
        let prev = bad.last().unwrap();
        let (level, next) = next_level(mech, prev);
        resp.push(level);
        bad.push(next);
    }
    Ok(RespLevels {
        mech: mech.clone(),
        degree,
        bad,
        resp,
    })
}

/// One induction step: from `B_{k-1}` to all `R^k_i` and `B_k`.
///
/// For agent `i` the quantified conjunct of `R^k_i` depends only on the
/// actions of agents before `i`, so the table is computed by scanning
/// `B_{k-1}` grouped by prefix: the conjunct holds for a prefix iff some
/// action block of agent `i` has `B_{k-1}` identically false across all
/// continuations.
fn next_level(mech: &Mechanism, prev: &TruthTable) -> (Vec<TruthTable>, TruthTable) {
    let m = mech.var_count();
    let n = mech.agent_count();
    let mut next = prev.clone();
    let mut level = Vec::with_capacity(n);
    if prev.is_empty() {
        // Empty gap: nobody is responsible and the gap stays empty.
        let zero = TruthTable {
            bits: Bitset::zeros(prev.len()),
            vars: m,
        };
        return (vec![zero; n], next);
    }
    for i in 1..=n {
        let pre = mech.prefix_bit_count(i);
        let blk = mech.family_bit_count(i);
        let suf = m - pre - blk;
        let suffix_size = 1usize << suf;
        let group_size = 1usize << (blk + suf);
        let mut table = prev.clone();
        for p in 0..1usize << pre {
            let base = p * group_size;
            let escapable = (0..1usize << blk)
                .any(|mid| prev.bits.range_all_zero(base + mid * suffix_size, suffix_size));
            if !escapable {
                table.bits.zero_range(base, group_size);
            }
        }
        next.bits.and_not_assign(&table.bits);
        level.push(table);
    }
    (level, next)
}

/// Whether agent `i` is responsible of order `d` (`d >= 1`) under `s`.
pub fn is_responsible(
    mech: &Mechanism,
    d: usize,
    agent: usize,
    s: &ActionProfile,
    budget: u32,
) -> Result<bool> {
    if d == 0 {
        return Err(Error::DegreeOutOfRange);
    }
    let n = mech.agent_count();
    if agent == 0 || agent > n {
        return Err(Error::AgentOutOfRange { agent, agents: n });
    }
    mech.check_shape(s)?;
    let levels = compute_levels(mech, d, budget)?;
    levels.is_responsible(d, agent, s)
}

/// The order-`d` gap: profiles violating the constraint with no agent
/// responsible at any order `<= d`, plus, for every violating profile,
/// the responsible `(agent, order)` pairs.
#[derive(Debug, Clone)]
pub struct GapReport {
    pub degree: usize,
    /// Profiles where `B_d` holds, in lexicographic order.
    pub gap_profiles: Vec<ActionProfile>,
    /// For each constraint-violating profile, the responsible pairs.
    pub per_profile_responsibility: Vec<(ActionProfile, Vec<(usize, usize)>)>,
}

pub fn gap_set(mech: &Mechanism, degree: usize, budget: u32) -> Result<GapReport> {
    let levels = compute_levels(mech, degree, budget)?;
    let gap_profiles = levels
        .bad(degree)
        .iter_ones()
        .map(|k| mech.profile_at(k))
        .collect();
    let per_profile_responsibility = levels
        .bad(0)
        .iter_ones()
        .map(|k| (mech.profile_at(k), levels.responsibility_pairs(k)))
        .collect();
    Ok(GapReport {
        degree,
        gap_profiles,
        per_profile_responsibility,
    })
}

/// Outcome of the order-`d` gap-freeness check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GapFreedom {
    pub gap_free: bool,
    /// Lexicographically least gap profile when not gap-free.
    pub witness: Option<ActionProfile>,
}

pub fn is_gap_free(mech: &Mechanism, degree: usize, budget: u32) -> Result<GapFreedom> {
    let levels = compute_levels(mech, degree, budget)?;
    let table = levels.bad(degree);
    Ok(GapFreedom {
        gap_free: table.is_empty(),
        witness: table.bits.first_one().map(|k| mech.profile_at(k)),
    })
}

/// Smallest order at which the mechanism is gap-free.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MinDegree {
    Degree(usize),
    /// The constraint is unsatisfiable over the profile space: every
    /// profile violates it and no agent can ever force an escape.
    Never,
}

pub fn min_gap_free_degree(mech: &Mechanism, budget: u32) -> Result<MinDegree> {
    mech.check_budget(budget)?;
    let mut prev = TruthTable::of_formula(mech, mech.gamma())?;
    prev.bits.negate();
    if prev.is_empty() {
        return Ok(MinDegree::Degree(0));
    }
    let mut d = 1;
    loop {
        let (_, next) = next_level(mech, &prev);
        if next.is_empty() {
            return Ok(MinDegree::Degree(d));
        }
        // A non-empty fixed point can never empty: each level depends
        // only on the previous table.
        if next == prev {
            return Ok(MinDegree::Never);
        }
        prev = next;
        d += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{parse_formula, VarName};

    fn v(name: &str) -> VarName {
        VarName::new(name).unwrap()
    }

    fn two_factory() -> Mechanism {
        Mechanism::new(
            2,
            vec![vec![v("pa")], vec![v("pb")]],
            parse_formula("!(pa | pb)").unwrap(),
        )
        .unwrap()
    }

    fn three_factory() -> Mechanism {
        Mechanism::new(
            3,
            vec![vec![v("pa")], vec![v("pb")], vec![v("pc")]],
            parse_formula("!(pa | pb | pc)").unwrap(),
        )
        .unwrap()
    }

    fn mixed_three_factory() -> Mechanism {
        Mechanism::new(
            3,
            vec![vec![v("pa")], vec![v("pb")], vec![v("pc")]],
            parse_formula("!(pa | (pb & pc))").unwrap(),
        )
        .unwrap()
    }

    fn table_profiles(mech: &Mechanism, t: &TruthTable) -> Vec<String> {
        t.iter_ones()
            .map(|k| mech.profile_literal(&mech.profile_at(k)).unwrap())
            .collect()
    }

    #[test]
    fn two_factory_first_order_responsibility_is_the_late_dumper() {
        let m = two_factory();
        let levels = compute_levels(&m, 2, 24).unwrap();
        assert_eq!(table_profiles(&m, levels.resp(1, 2)), vec!["pa=0,pb=1"]);
        assert!(levels.resp(1, 1).is_empty());
    }

    #[test]
    fn two_factory_second_order_responsibility_is_the_first_mover() {
        let m = two_factory();
        let levels = compute_levels(&m, 2, 24).unwrap();
        assert_eq!(
            table_profiles(&m, levels.resp(2, 1)),
            vec!["pa=1,pb=0", "pa=1,pb=1"]
        );
        assert!(levels.resp(2, 2).is_empty());
    }

    #[test]
    fn nobody_is_responsible_when_the_constraint_holds() {
        let m = three_factory();
        let levels = compute_levels(&m, 3, 24).unwrap();
        let ok = m.parse_profile_literal("pa=0,pb=0,pc=0").unwrap();
        let idx = m.index_of(&ok).unwrap();
        for d in 1..=3 {
            for agent in 1..=3 {
                assert!(!levels.resp(d, agent).get(idx));
            }
        }
    }

    #[test]
    fn three_factory_is_responsible_examples() {
        let m = three_factory();
        let s100 = m.parse_profile_literal("pa=1,pb=0,pc=0").unwrap();
        assert!(is_responsible(&m, 3, 1, &s100, 24).unwrap());
        let s001 = m.parse_profile_literal("pa=0,pb=0,pc=1").unwrap();
        assert!(is_responsible(&m, 1, 3, &s001, 24).unwrap());
        let s111 = m.parse_profile_literal("pa=1,pb=1,pc=1").unwrap();
        for agent in 1..=3 {
            assert!(!is_responsible(&m, 1, agent, &s111, 24).unwrap());
        }
    }

    #[test]
    fn degree_and_agent_ranges_are_validated() {
        let m = two_factory();
        let s = m.parse_profile_literal("pa=0,pb=0").unwrap();
        assert_eq!(
            is_responsible(&m, 0, 1, &s, 24),
            Err(Error::DegreeOutOfRange)
        );
        assert_eq!(
            is_responsible(&m, 1, 3, &s, 24),
            Err(Error::AgentOutOfRange { agent: 3, agents: 2 })
        );
    }

    #[test]
    fn two_factory_gap_matches_the_worked_example() {
        let m = two_factory();
        let report = gap_set(&m, 1, 24).unwrap();
        let literals: Vec<String> = report
            .gap_profiles
            .iter()
            .map(|p| m.profile_literal(p).unwrap())
            .collect();
        assert_eq!(literals, vec!["pa=1,pb=0", "pa=1,pb=1"]);
    }

    #[test]
    fn three_factory_second_order_gap_is_the_first_dumper_block() {
        let m = three_factory();
        let report = gap_set(&m, 2, 24).unwrap();
        let literals: Vec<String> = report
            .gap_profiles
            .iter()
            .map(|p| m.profile_literal(p).unwrap())
            .collect();
        assert_eq!(
            literals,
            vec![
                "pa=1,pb=0,pc=0",
                "pa=1,pb=0,pc=1",
                "pa=1,pb=1,pc=0",
                "pa=1,pb=1,pc=1"
            ]
        );
    }

    #[test]
    fn mixed_three_factory_second_order_gap_is_empty() {
        let m = mixed_three_factory();
        let report = gap_set(&m, 2, 24).unwrap();
        assert!(report.gap_profiles.is_empty());
        // At order 1 the gap is exactly the (1,*,*) block.
        let d1 = gap_set(&m, 1, 24).unwrap();
        assert_eq!(d1.gap_profiles.len(), 4);
        assert!(d1
            .gap_profiles
            .iter()
            .all(|p| p.parts[0] == vec![true]));
    }

    #[test]
    fn order_zero_gap_is_every_violation() {
        let m = two_factory();
        let report = gap_set(&m, 0, 24).unwrap();
        assert_eq!(report.gap_profiles.len(), 3);
        assert!(report
            .per_profile_responsibility
            .iter()
            .all(|(_, pairs)| pairs.is_empty()));
    }

    #[test]
    fn gap_freeness_with_witness() {
        let m = three_factory();
        assert!(is_gap_free(&m, 3, 24).unwrap().gap_free);
        let verdict = is_gap_free(&m, 2, 24).unwrap();
        assert!(!verdict.gap_free);
        let witness = verdict.witness.unwrap();
        assert_eq!(m.profile_literal(&witness).unwrap(), "pa=1,pb=0,pc=0");
    }

    #[test]
    fn reduction_example_mechanism_is_first_order_gap_free() {
        let m = Mechanism::new(
            3,
            vec![vec![v("x1")], vec![v("x2"), v("q2")], vec![v("x3")]],
            parse_formula("(x1 | x2 | x3) & q2").unwrap(),
        )
        .unwrap();
        assert!(is_gap_free(&m, 1, 24).unwrap().gap_free);
    }

    #[test]
    fn min_gap_free_degrees_of_the_worked_examples() {
        assert_eq!(
            min_gap_free_degree(&two_factory(), 24).unwrap(),
            MinDegree::Degree(2)
        );
        assert_eq!(
            min_gap_free_degree(&three_factory(), 24).unwrap(),
            MinDegree::Degree(3)
        );
        let unsat = Mechanism::new(
            1,
            vec![vec![v("p")]],
            parse_formula("p & !p").unwrap(),
        )
        .unwrap();
        assert_eq!(min_gap_free_degree(&unsat, 24).unwrap(), MinDegree::Never);
    }

    #[test]
    fn agents_with_no_variables_are_never_responsible() {
        let m = Mechanism::new(
            3,
            vec![vec![v("pa")], vec![], vec![v("pb")]],
            parse_formula("!(pa | pb)").unwrap(),
        )
        .unwrap();
        let levels = compute_levels(&m, 3, 24).unwrap();
        for d in 1..=3 {
            assert!(levels.resp(d, 2).is_empty(), "order {d}");
        }
        // The mechanism still behaves like the two-factory one.
        assert_eq!(min_gap_free_degree(&m, 24).unwrap(), MinDegree::Degree(2));
    }

    #[test]
    fn gap_tables_shrink_monotonically() {
        let m = three_factory();
        let levels = compute_levels(&m, 4, 24).unwrap();
        for d in 1..=4 {
            for k in 0..levels.bad(d).len() {
                assert!(!levels.bad(d).get(k) || levels.bad(d - 1).get(k));
            }
        }
    }

    #[test]
    fn gap_table_definition_is_consistent() {
        let m = mixed_three_factory();
        let levels = compute_levels(&m, 3, 24).unwrap();
        for d in 1..=3 {
            for k in 0..levels.bad(d).len() {
                let rhs = levels.bad(0).get(k)
                    && (1..=d).all(|dd| (1..=3).all(|i| !levels.resp(dd, i).get(k)));
                assert_eq!(levels.bad(d).get(k), rhs);
            }
        }
    }
}
