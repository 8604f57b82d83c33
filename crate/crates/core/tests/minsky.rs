mod common;

use std::collections::BTreeSet;

use common::props::{decoded, encoding_agrees, first_index, peak};

use drcheck::coverability::{backward_reach, error_target, forward_explore, reachable_states, Verdict};
use drcheck::drcore::monotone_closure;
use drcheck::minsky::{decode_config, encode_minsky, enumerator_machine, simulate_minsky, Config, CounterMachine};

const MACHINES: [&str; 6] = ["enumerator", "transfer_halt", "countdown", "blocked", "pingpong", "doubler"];
const STEPS: usize = 20;

fn machine(name: &str) -> CounterMachine {
    CounterMachine::from_json_str(&common::read(&format!("machines/{name}.json"))).unwrap()
}

#[test]
fn enumerator_machine_matches_corpus() {
    assert_eq!(enumerator_machine(), machine("enumerator"));
}

#[test]
fn runs_agree_for_twenty_steps() {
    for name in MACHINES {
        assert!(encoding_agrees(&machine(name), STEPS), "{name}");
    }
}

#[test]
fn too_few_threads_only_cut_the_run_short() {
    for name in MACHINES {
        let m = machine(name);
        let run = simulate_minsky(&m, STEPS);
        let want = first_index(&run);
        for n in 2..peak(&run).max(2) {
            let got = decoded(&m, n, STEPS);
            for (c, k) in &got {
                assert_eq!(want.get(c), Some(k), "{name} n={n} {c:?}");
            }
        }
    }
}

#[test]
fn zero_tests_see_every_counter_thread() {
    // countdown only reaches its zero test after both decrements
    let m = machine("countdown");
    let d = encode_minsky(&m).unwrap();
    let configs: BTreeSet<Config> = reachable_states(&d, 4, None).unwrap().keys().filter_map(|v| decode_config(v)).collect();
    assert!(configs.contains(&(3, 0, 0)));
    assert!(!configs.iter().any(|&(q, _, c2)| q == 3 && c2 > 0));
}

#[test]
fn halting_is_coverability() {
    for name in MACHINES {
        let m = machine(name);
        let run = simulate_minsky(&m, 50);
        let halts = m.halt.is_some_and(|h| run.last().unwrap().0 == h);
        let d = encode_minsky(&m).unwrap();
        let target = error_target(&d);
        let n = (peak(&run) + 1).max(2);
        let fwd = forward_explore(&d, n, &target, Some(run.len() + 1)).unwrap();
        assert_eq!(fwd.verdict.is_coverable(), halts, "{name}");
        if let Verdict::Coverable(t) = &fwd.verdict {
            assert!(t.replays(&d, &target));
        }
        let closed = monotone_closure(&d).unwrap();
        let back = backward_reach(&closed, &error_target(&closed)).unwrap();
        if halts {
            let t = back.verdict.trace().unwrap_or_else(|| panic!("{name}"));
            assert!(t.replays(&closed, &error_target(&closed)));
        }
    }
}
