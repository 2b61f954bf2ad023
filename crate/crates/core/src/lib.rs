//! Analysis of higher-order counterfactual responsibility in sequential
//! decision-making mechanisms.
//!
//! A mechanism is a number of agents acting in a fixed order, each
//! choosing Boolean values for its own variables, judged against a
//! quantifier-free deontic constraint. The library computes which agent
//! is responsible at which order under a given action profile, the
//! responsibility gap at each order, whether a mechanism is gap-free up
//! to an order, and the least such order. It also realizes the canonical
//! QBF-to-mechanism construction together with the Devil/Moralist game
//! that certifies it, and a slow syntactic oracle that cross-checks the
//! fast table engine.

mod bitset;

pub mod corpus;
pub mod error;
pub mod formula;
pub mod game;
pub mod mechanism;
pub mod oracle;
pub mod reduction;
pub mod responsibility;

pub use error::{Error, Result};
pub use formula::{parse_formula, Assignment, Formula, VarName};
pub use game::{
    all_sins_profile, default_controller, devil_strategy, immorality_degree, root_win_formula,
    win_moralist, Controller, DevilStrategy, GameNode, WinSet,
};
pub use mechanism::{
    parse_mechanism_file, ActionProfile, Mechanism, DEFAULT_VAR_BUDGET, MAX_VAR_BUDGET,
};
pub use reduction::{
    parse_qbf_file, reduce, verify_reduction, QbfInstance, ReducedMechanism, ReductionReport,
};
pub use responsibility::{
    compute_levels, gap_set, is_gap_free, is_responsible, min_gap_free_degree, GapFreedom,
    GapReport, MinDegree, RespLevels, TruthTable,
};
