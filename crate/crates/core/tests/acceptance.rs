//! Acceptance suite: one test per criterion, each printing a PASS/FAIL
//! line. Run with `cargo test --test acceptance -- --nocapture` to see
//! the lines for passing criteria too.

use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use respgap::corpus::{random_qbf, random_satisfiable_mechanism};
use respgap::game::{all_sins_profile, default_controller, devil_strategy, immorality_degree, win_moralist};
use respgap::mechanism::Mechanism;
use respgap::oracle::build_resp_formula;
use respgap::reduction::{reduce, verify_reduction};
use respgap::responsibility::{compute_levels, gap_set, is_gap_free, min_gap_free_degree, MinDegree};
use respgap::{parse_mechanism_file, QbfInstance};

const BUDGET: u32 = 24;

fn criterion(name: &str, deadline: Option<Duration>, run: impl FnOnce() -> Result<(), String>) {
    let start = Instant::now();
    let mut outcome = run();
    let elapsed = start.elapsed();
    if let (Ok(()), Some(limit)) = (&outcome, deadline) {
        if elapsed > limit {
            outcome = Err(format!("took {elapsed:?}, limit {limit:?}"));
        }
    }
    match outcome {
        Ok(()) => println!("acceptance {name}: PASS ({elapsed:.2?})"),
        Err(msg) => {
            println!("acceptance {name}: FAIL - {msg}");
            panic!("criterion {name} failed: {msg}");
        }
    }
}

fn expect(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn two_factory() -> Mechanism {
    parse_mechanism_file("agents 2\nagent 1 vars pa\nagent 2 vars pb\nconstraint !(pa | pb)\n")
        .unwrap()
}

fn three_factory() -> Mechanism {
    parse_mechanism_file(
        "agents 3\nagent 1 vars pa\nagent 2 vars pb\nagent 3 vars pc\nconstraint !(pa | pb | pc)\n",
    )
    .unwrap()
}

fn mixed_three_factory() -> Mechanism {
    parse_mechanism_file(
        "agents 3\nagent 1 vars pa\nagent 2 vars pb\nagent 3 vars pc\nconstraint !(pa | (pb & pc))\n",
    )
    .unwrap()
}

fn gap_literals(mech: &Mechanism, degree: usize) -> Result<Vec<String>, String> {
    let report = gap_set(mech, degree, BUDGET).map_err(|e| e.to_string())?;
    Ok(report
        .gap_profiles
        .iter()
        .map(|p| mech.profile_literal(p).unwrap())
        .collect())
}

#[test]
fn criterion_1_two_factory_example() {
    criterion("1 two-factory", Some(Duration::from_secs(1)), || {
        let m = two_factory();
        let gap = gap_literals(&m, 1)?;
        expect(
            gap == ["pa=1,pb=0", "pa=1,pb=1"],
            format!("order-1 gap was {gap:?}"),
        )?;
        let s01 = m.parse_profile_literal("pa=0,pb=1").unwrap();
        expect(
            respgap::is_responsible(&m, 1, 2, &s01, BUDGET).unwrap(),
            "agent 2 not order-1 responsible at (0,1)",
        )?;
        for literal in ["pa=1,pb=0", "pa=1,pb=1"] {
            let s = m.parse_profile_literal(literal).unwrap();
            expect(
                respgap::is_responsible(&m, 2, 1, &s, BUDGET).unwrap(),
                format!("agent 1 not order-2 responsible at {literal}"),
            )?;
        }
        expect(
            min_gap_free_degree(&m, BUDGET).unwrap() == MinDegree::Degree(2),
            "min gap-free degree is not 2",
        )
    });
}

#[test]
fn criterion_2_three_factory_example() {
    criterion("2 three-factory", Some(Duration::from_secs(1)), || {
        let m = three_factory();
        let g1 = gap_literals(&m, 1)?;
        let expected_g1 = [
            "pa=0,pb=1,pc=0",
            "pa=0,pb=1,pc=1",
            "pa=1,pb=0,pc=0",
            "pa=1,pb=0,pc=1",
            "pa=1,pb=1,pc=0",
            "pa=1,pb=1,pc=1",
        ];
        expect(g1 == expected_g1, format!("order-1 gap was {g1:?}"))?;
        let g2 = gap_literals(&m, 2)?;
        let expected_g2 = [
            "pa=1,pb=0,pc=0",
            "pa=1,pb=0,pc=1",
            "pa=1,pb=1,pc=0",
            "pa=1,pb=1,pc=1",
        ];
        expect(g2 == expected_g2, format!("order-2 gap was {g2:?}"))?;
        let g3 = gap_literals(&m, 3)?;
        expect(g3.is_empty(), format!("order-3 gap was {g3:?}"))?;
        expect(
            min_gap_free_degree(&m, BUDGET).unwrap() == MinDegree::Degree(3),
            "min gap-free degree is not 3",
        )
    });
}

#[test]
fn criterion_3_mixed_example() {
    criterion("3 mixed-capacity", None, || {
        let m = mixed_three_factory();
        let g1 = gap_literals(&m, 1)?;
        let expected_g1 = [
            "pa=1,pb=0,pc=0",
            "pa=1,pb=0,pc=1",
            "pa=1,pb=1,pc=0",
            "pa=1,pb=1,pc=1",
        ];
        expect(g1 == expected_g1, format!("order-1 gap was {g1:?}"))?;
        let g2 = gap_literals(&m, 2)?;
        expect(g2.is_empty(), format!("order-2 gap was {g2:?}"))
    });
}

#[test]
fn criterion_4_figure_one_game() {
    criterion("4 figure-1 win set", None, || {
        let m = parse_mechanism_file(
            "agents 3\nagent 1 vars x1\nagent 2 vars x2 q2\nagent 3 vars x3\nconstraint (x1 | x2 | x3) & q2\n",
        )
        .unwrap();
        let win = win_moralist(&m, &default_controller(3), BUDGET).unwrap();
        let labels: Vec<String> = win.labels().into_iter().flatten().collect();
        let expected = [
            "e", "0", "1", "011", "101", "111", "0011", "0110", "0111", "1010", "1011", "1110",
            "1111",
        ];
        expect(labels == expected, format!("win set was {labels:?}"))
    });
}

#[test]
fn criterion_5_gap_free_by_agent_count() {
    criterion("5 gap-free by n (200 mechanisms)", Some(Duration::from_secs(60)), || {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for trial in 0..200 {
            let m = random_satisfiable_mechanism(&mut rng, 4, 8);
            let verdict = is_gap_free(&m, m.agent_count(), BUDGET).unwrap();
            expect(
                verdict.gap_free,
                format!(
                    "trial {trial}: mechanism with satisfiable constraint not gap-free at n: {}",
                    m.to_file_string()
                ),
            )?;
        }
        Ok(())
    });
}

#[test]
fn criterion_6_gap_monotonicity() {
    criterion("6 gap monotonicity (200 mechanisms)", None, || {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for trial in 0..200 {
            let m = random_satisfiable_mechanism(&mut rng, 4, 8);
            let n = m.agent_count();
            let levels = compute_levels(&m, n + 1, BUDGET).unwrap();
            for d in 0..=n {
                for k in 0..levels.bad(d).len() {
                    expect(
                        !levels.bad(d + 1).get(k) || levels.bad(d).get(k),
                        format!("trial {trial}: B_{} not within B_{d} at profile {k}", d + 1),
                    )?;
                }
            }
        }
        Ok(())
    });
}

#[test]
fn criterion_7_reduction_soundness() {
    criterion("7 reduction soundness (100 instances)", Some(Duration::from_secs(120)), || {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for trial in 0..100 {
            let degree = 1 + trial % 2;
            let q = random_qbf(&mut rng, degree, 8);
            let report = verify_reduction(&q, BUDGET).unwrap();
            expect(
                report.agree,
                format!(
                    "trial {trial}: qbf_truth={} but gap_free={} for degree {degree}",
                    report.qbf_truth, report.gap_free
                ),
            )?;
        }
        Ok(())
    });
}

#[test]
fn criterion_8_oracle_equivalence() {
    criterion("8 oracle equivalence (50 mechanisms)", None, || {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for trial in 0..50 {
            let m = respgap::corpus::random_mechanism(&mut rng, 3, 6);
            let levels = compute_levels(&m, 2, BUDGET).unwrap();
            for d in 1..=2 {
                for agent in 1..=m.agent_count() {
                    let formula = build_resp_formula(&m, d, agent).unwrap();
                    for k in 0..levels.bad(0).len() {
                        let s = m.profile_at(k);
                        let syntactic = m.substitute(&formula, &s).unwrap();
                        let semantic = levels.resp(d, agent).get(k);
                        expect(
                            syntactic == semantic,
                            format!(
                                "trial {trial}: engine={semantic} oracle={syntactic} at d={d} \
                                 agent={agent} profile {k} of {}",
                                m.to_file_string()
                            ),
                        )?;
                    }
                }
            }
        }
        Ok(())
    });
}

#[test]
fn criterion_9_immorality_claims() {
    criterion("9 immorality degrees (20 instances)", None, || {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut found = 0;
        while found < 20 {
            let q = random_qbf(&mut rng, 1, 6);
            if q.prenex_closure().eval_qbf().unwrap() {
                continue;
            }
            found += 1;
            check_immorality(&q)?;
        }
        Ok(())
    });
}

fn check_immorality(q: &QbfInstance) -> Result<(), String> {
    let r = reduce(q);
    let mech = &r.mechanism;
    let controller = default_controller(mech.agent_count());
    let sigma = devil_strategy(mech, &controller, BUDGET)
        .unwrap()
        .ok_or("devil should win a false instance")?;
    let worst = all_sins_profile(&r, &sigma).unwrap();
    let degree = immorality_degree(&r, &worst, &sigma).unwrap();
    expect(degree == 2, format!("all-sins degree was {degree}"))?;
    expect(
        !mech.substitute(mech.gamma(), &worst).unwrap(),
        "all-sins profile satisfies the constraint",
    )?;
    let levels = compute_levels(mech, 1, BUDGET).unwrap();
    let worst_idx = mech.index_of(&worst).unwrap();
    for agent in 1..=mech.agent_count() {
        expect(
            !levels.resp(1, agent).get(worst_idx),
            format!("agent {agent} responsible under the all-sins profile"),
        )?;
    }
    // One-flip claim, exhaustively over single-agent changes.
    let space = mech.all_profiles(BUDGET).unwrap().len();
    for k in 0..space {
        let s = mech.profile_at(k);
        let base = immorality_degree(&r, &s, &sigma).unwrap();
        for agent0 in 0..mech.agent_count() {
            let width = s.parts[agent0].len();
            for action in 0..1usize << width {
                let mut flipped = s.clone();
                flipped.parts[agent0] = (0..width)
                    .map(|b| action >> (width - 1 - b) & 1 == 1)
                    .collect();
                let other = immorality_degree(&r, &flipped, &sigma).unwrap();
                expect(
                    base <= other + 1 && other <= base + 1,
                    format!("one-flip violated at profile {k}, agent {}", agent0 + 1),
                )?;
            }
        }
    }
    Ok(())
}
