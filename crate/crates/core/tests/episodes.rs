use hrm_core::plans::{builtin_document, serialize_plan};
use hrm_core::{builtin_plan, load_plan, run_episode, EnvConfig, MockEnv, TaskKind};
use proptest::prelude::*;

fn task_strategy() -> impl Strategy<Value = TaskKind> {
    prop::sample::select(TaskKind::ALL.to_vec())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn episode_invariants(task in task_strategy(), seed in any::<u64>()) {
        let plan = builtin_plan(task);
        let ep = run_episode(task, &plan, &EnvConfig::default(), seed).unwrap();
        prop_assert!(ep.steps <= 200);
        prop_assert_eq!(ep.trajectory.len(), ep.steps);
        prop_assert!(ep.subtask_trace.windows(2).all(|w| w[0] <= w[1]));
        prop_assert_eq!(ep.subtask_calls.iter().sum::<usize>(), ep.steps);
        for (i, r) in ep.trajectory.iter().enumerate() {
            prop_assert_eq!(r.observation.step_index, i);
            prop_assert!(!plan.entries[r.subtask].is_marker());
            prop_assert!(r.action.values().iter().all(|v| (-1.0..=1.0).contains(v)));
        }
        let marker = plan.entries.iter().position(|e| e.is_marker());
        for r in &ep.trajectory {
            match marker {
                Some(m) if r.subtask > m => prop_assert!(r.stabilizer.is_some()),
                _ => prop_assert!(r.stabilizer.is_none()),
            }
        }
    }

    #[test]
    fn replaying_actions_reproduces_observations(task in task_strategy(), seed in 0u64..10_000) {
        let config = EnvConfig::default();
        let ep = run_episode(task, &builtin_plan(task), &config, seed).unwrap();
        let (mut env, first) = MockEnv::reset(task, config, seed).unwrap();
        prop_assert_eq!(&first, &ep.initial_observation);
        for (i, r) in ep.trajectory.iter().enumerate() {
            let next = env.step(&r.action).unwrap().observation;
            let expected = ep.trajectory.get(i + 1).map(|n| &n.observation).unwrap_or(&ep.final_observation);
            prop_assert_eq!(&next, expected);
        }
    }

    #[test]
    fn episodes_are_deterministic(task in task_strategy(), seed in any::<u64>()) {
        let plan = builtin_plan(task);
        let a = run_episode(task, &plan, &EnvConfig::default(), seed).unwrap();
        let b = run_episode(task, &plan, &EnvConfig::default(), seed).unwrap();
        prop_assert_eq!(a, b);
    }
}

#[test]
fn serialized_builtin_plans_behave_identically() {
    for task in TaskKind::ALL {
        let plan = builtin_plan(task);
        let reparsed = load_plan(&serialize_plan(&plan)).unwrap();
        assert_eq!(reparsed, plan);
        let a = run_episode(task, &plan, &EnvConfig::default(), 77).unwrap();
        let b = run_episode(task, &reparsed, &EnvConfig::default(), 77).unwrap();
        assert_eq!(a, b);
        assert!(builtin_document(task).contains(&format!("task = \"{task}\"")));
    }
}

#[test]
fn disturbance_free_runs_still_succeed() {
    let config = EnvConfig {
        disturbance_std: 0.0,
        ..EnvConfig::default()
    };
    for task in TaskKind::ALL {
        for seed in 0..10 {
            let ep = run_episode(task, &builtin_plan(task), &config, seed).unwrap();
            assert!(ep.success, "{task} seed {seed}");
        }
    }
}
