//! The two-player sequential game over a mechanism's variables: one side
//! (Devil) tries to violate the constraint, the other (Moralist) to
//! satisfy it. Win sets are computed by backward induction over implicit
//! prefix-indexed nodes; no tree is materialized.
//!
//! The construction the game comes from assigns Devil the odd agents and
//! Moralist the even ones; the explicit controller map generalizing this
//! to arbitrary mechanisms is artifact-added.

use std::collections::BTreeMap;

use crate::bitset::Bitset;
use crate::error::{Error, Result};
use crate::formula::Formula;
use crate::mechanism::{ActionProfile, Mechanism};
use crate::reduction::ReducedMechanism;
use crate::responsibility::TruthTable;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Controller {
    Devil,
    Moralist,
}

/// Devil moves for odd agents, Moralist for even ones.
pub fn default_controller(agents: usize) -> Vec<Controller> {
    (1..=agents)
        .map(|i| {
            if i % 2 == 1 {
                Controller::Devil
            } else {
                Controller::Moralist
            }
        })
        .collect()
}

/// A game node: the actions of the first `k` agents. Depth `k` and the
/// prefix index under the global bit-index convention identify it.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct GameNode {
    pub depth: usize,
    pub prefix_index: usize,
}

/// The set of nodes at which Moralist can force the constraint,
/// stratified by depth. A leaf is winning iff its profile satisfies the
/// constraint; a Devil node is winning iff all children are; a Moralist
/// node is winning iff some child is.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WinSet {
    /// Bits of the first `k` agents, for each depth `k = 0..=n`.
    level_bits: Vec<usize>,
    levels: Vec<Bitset>,
}

impl WinSet {
    pub fn depth(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn contains(&self, node: &GameNode) -> bool {
        self.levels[node.depth].get(node.prefix_index)
    }

    pub fn contains_root(&self) -> bool {
        self.levels[0].get(0)
    }

    pub fn node_count(&self) -> usize {
        self.levels.iter().map(Bitset::count_ones).sum()
    }

    /// Node label: the concatenated action bits, `e` for the root.
    pub fn label(&self, node: &GameNode) -> String {
        label_for(node.depth, node.prefix_index, &self.level_bits)
    }

    /// Labels of all winning nodes, one list per depth, ascending.
    pub fn labels(&self) -> Vec<Vec<String>> {
        self.levels
            .iter()
            .enumerate()
            .map(|(k, level)| {
                level
                    .iter_ones()
                    .map(|p| label_for(k, p, &self.level_bits))
                    .collect()
            })
            .collect()
    }
}

fn label_for(depth: usize, prefix_index: usize, level_bits: &[usize]) -> String {
    let width = level_bits[depth];
    if width == 0 {
        return "e".to_string();
    }
    (0..width)
        .map(|b| {
            if prefix_index >> (width - 1 - b) & 1 == 1 {
                '1'
            } else {
                '0'
            }
        })
        .collect()
}

fn check_controller(mech: &Mechanism, controller: &[Controller]) -> Result<()> {
    if controller.len() != mech.agent_count() {
        return Err(Error::StrategyMismatch(format!(
            "controller map covers {} agents, mechanism has {}",
            controller.len(),
            mech.agent_count()
        )));
    }
    Ok(())
}

/// Backward induction from the leaves up.
pub fn win_moralist(
    mech: &Mechanism,
    controller: &[Controller],
    budget: u32,
) -> Result<WinSet> {
    check_controller(mech, controller)?;
    mech.check_budget(budget)?;
    let n = mech.agent_count();
    let level_bits: Vec<usize> = (0..=n)
        .map(|k| {
            if k == n {
                mech.var_count()
            } else {
                mech.prefix_bit_count(k + 1)
            }
        })
        .collect();
    let gamma = TruthTable::of_formula(mech, mech.gamma())?;
    let mut levels = vec![Bitset::zeros(1); n + 1];
    levels[n] = gamma.bits;
    for k in (0..n).rev() {
        let child_bits = mech.family_bit_count(k + 1);
        let child_count = 1usize << child_bits;
        let mut level = Bitset::zeros(1usize << level_bits[k]);
        for p in 0..level.len() {
            let start = p * child_count;
            let winning = match controller[k] {
                Controller::Devil => levels[k + 1].range_all_one(start, child_count),
                Controller::Moralist => !levels[k + 1].range_all_zero(start, child_count),
            };
            if winning {
                level.set(p);
            }
        }
        levels[k] = level;
    }
    Ok(WinSet { level_bits, levels })
}

/// A Devil strategy: for every Devil-controlled node outside the
/// Moralist win set, the chosen action keeping the play outside it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DevilStrategy {
    controller: Vec<Controller>,
    level_bits: Vec<usize>,
    choices: BTreeMap<(usize, usize), usize>,
}

impl DevilStrategy {
    pub fn controller(&self) -> &[Controller] {
        &self.controller
    }

    /// The chosen action bits at a Devil node, if covered.
    pub fn action(&self, node: &GameNode) -> Option<usize> {
        self.choices.get(&(node.depth, node.prefix_index)).copied()
    }

    pub fn covered_nodes(&self) -> impl Iterator<Item = GameNode> + '_ {
        self.choices.keys().map(|&(depth, prefix_index)| GameNode {
            depth,
            prefix_index,
        })
    }
}

/// Extracts a winning Devil strategy, or `None` when the root is
/// Moralist-winning. The choice at each node is the lexicographically
/// least action that stays outside the win set.
pub fn devil_strategy(
    mech: &Mechanism,
    controller: &[Controller],
    budget: u32,
) -> Result<Option<DevilStrategy>> {
    let win = win_moralist(mech, controller, budget)?;
    if win.contains_root() {
        return Ok(None);
    }
    let n = mech.agent_count();
    let mut choices = BTreeMap::new();
    for k in 0..n {
        if controller[k] != Controller::Devil {
            continue;
        }
        let child_bits = mech.family_bit_count(k + 1);
        let child_count = 1usize << child_bits;
        for p in 0..win.levels[k].len() {
            if win.levels[k].get(p) {
                continue;
            }
            // A losing Devil node has at least one losing child.
            let action = (0..child_count)
                .find(|a| !win.levels[k + 1].get(p * child_count + a))
                .expect("devil node outside the win set has a losing child");
            choices.insert((k, p), action);
        }
    }
    Ok(Some(DevilStrategy {
        controller: controller.to_vec(),
        level_bits: win.level_bits.clone(),
        choices,
    }))
}

fn action_bits(part: &[bool]) -> usize {
    part.iter().fold(0, |acc, &b| acc << 1 | b as usize)
}

/// Whether the Devil moves in `s` follow `sigma` at every Devil node the
/// play reaches.
fn follows_strategy(
    mech: &Mechanism,
    controller: &[Controller],
    s: &ActionProfile,
    sigma: &DevilStrategy,
) -> Result<bool> {
    let mut prefix = 0usize;
    for k in 0..mech.agent_count() {
        let bits = mech.family_bit_count(k + 1);
        let action = action_bits(&s.parts[k]);
        if controller[k] == Controller::Devil {
            match sigma.choices.get(&(k, prefix)) {
                Some(&chosen) => {
                    if chosen != action {
                        return Ok(false);
                    }
                }
                // Plays that follow a valid strategy stay outside the
                // win set, where the strategy is total; reaching an
                // uncovered node means the strategy is malformed.
                None => {
                    return Err(Error::StrategyUndefined(label_for(
                        k,
                        prefix,
                        &sigma.level_bits,
                    )))
                }
            }
        }
        prefix = prefix << bits | action;
    }
    Ok(true)
}

/// The "degree of immorality" of a profile of a reduced mechanism: one
/// sin per control variable set to 0, plus one sin if Devil's moves
/// follow `sigma` throughout.
pub fn immorality_degree(
    reduced: &ReducedMechanism,
    s: &ActionProfile,
    sigma: &DevilStrategy,
) -> Result<usize> {
    let mech = &reduced.mechanism;
    let controller = default_controller(mech.agent_count());
    if sigma.controller != controller {
        return Err(Error::StrategyMismatch(
            "immorality counting assumes the default odd/even controller".to_string(),
        ));
    }
    mech.check_shape(s)?;
    let mut sins = 0;
    for (i, _q) in reduced.q_vars.iter().enumerate() {
        let agent = 2 * (i + 1);
        // The control variable is appended last in its agent's family.
        let bit = *s.parts[agent - 1]
            .last()
            .expect("even agents of a reduced mechanism have at least the control variable");
        if !bit {
            sins += 1;
        }
    }
    if follows_strategy(mech, &controller, s, sigma)? {
        sins += 1;
    }
    Ok(sins)
}

/// The profile committing every possible sin: Devil follows `sigma`,
/// Moralist plays all zeros (control variables included).
pub fn all_sins_profile(
    reduced: &ReducedMechanism,
    sigma: &DevilStrategy,
) -> Result<ActionProfile> {
    let mech = &reduced.mechanism;
    let controller = default_controller(mech.agent_count());
    if sigma.controller != controller {
        return Err(Error::StrategyMismatch(
            "the all-sins profile assumes the default odd/even controller".to_string(),
        ));
    }
    let mut parts = Vec::with_capacity(mech.agent_count());
    let mut prefix = 0usize;
    for k in 0..mech.agent_count() {
        let bits = mech.family_bit_count(k + 1);
        let action = match controller[k] {
            Controller::Devil => match sigma.choices.get(&(k, prefix)) {
                Some(&a) => a,
                None => {
                    return Err(Error::StrategyUndefined(label_for(
                        k,
                        prefix,
                        &sigma.level_bits,
                    )))
                }
            },
            Controller::Moralist => 0,
        };
        parts.push((0..bits).map(|b| action >> (bits - 1 - b) & 1 == 1).collect());
        prefix = prefix << bits | action;
    }
    Ok(ActionProfile::new(parts))
}

/// The closed formula whose truth is equivalent to the root being
/// Moralist-winning: the constraint under a quantifier per agent,
/// universal for Devil and existential for Moralist.
pub fn root_win_formula(mech: &Mechanism, controller: &[Controller]) -> Result<Formula> {
    check_controller(mech, controller)?;
    let mut f = mech.gamma().clone();
    for k in (0..mech.agent_count()).rev() {
        for v in mech.families()[k].iter().rev() {
            f = match controller[k] {
                Controller::Devil => Formula::forall(v.clone(), f),
                Controller::Moralist => Formula::exists(v.clone(), f),
            };
        }
    }
    Ok(f)
}
