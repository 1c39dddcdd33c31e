use pathsplit::config::ExperimentConfig;
use proptest::prelude::*;

proptest! {
    #[test]
    fn drifted_config_round_trips(
        p in 0.01f64..0.49,
        steps in 0usize..50,
        reps in 1usize..1000,
        seed in any::<u64>(),
        horizon in prop::option::of(1usize..500),
    ) {
        let policy = match horizon {
            Some(h) => format!(r#"{{"truncated": {{"horizon": {h}}}}}"#),
            None => "\"exact\"".to_string(),
        };
        let text = format!(
            r#"{{"model": {{"name": "drifted-walk", "params": {{"p": {p}}}}}, "operation": "decompose",
                "steps": {steps}, "replications": {reps}, "seed": {seed}, "policy": {policy}}}"#
        );
        let c = ExperimentConfig::from_json(&text).unwrap();
        prop_assert!(c.validate().is_ok());
        let again = ExperimentConfig::from_json(&serde_json::to_string(&c).unwrap()).unwrap();
        prop_assert_eq!(again, c);
    }

    #[test]
    fn out_of_range_probability_is_rejected(p in 1.0f64..10.0) {
        let text = format!(r#"{{"model": {{"name": "drifted-walk", "params": {{"p": {p}}}}}, "operation": "simulate"}}"#);
        let e = ExperimentConfig::from_json(&text).and_then(|c| c.validate().map(|_| ()));
        prop_assert_eq!(e.unwrap_err().exit_code(), 2);
    }
}
