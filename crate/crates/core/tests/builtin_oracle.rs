use std::f64::consts::PI;

use popqc_core::oracle::{builtin_optimize, is_well_behaved_sample, SampleParams};
use popqc_core::verifier::check_equivalence;
use popqc_core::{synth, BuiltinOracle, Gate};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn segment() -> impl Strategy<Value = (u32, Vec<Gate>)> {
    (2u32..=8, 0usize..=64, 0.0f64..0.8, any::<u64>()).prop_map(|(q, len, density, seed)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (q, synth::random_gates(&mut rng, q, len, density))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn never_grows((q, gates) in segment()) {
        prop_assert!(builtin_optimize(q, &gates).unwrap().len() <= gates.len());
    }

    #[test]
    fn idempotent((q, gates) in segment()) {
        let once = builtin_optimize(q, &gates).unwrap();
        let twice = builtin_optimize(q, &once).unwrap();
        prop_assert_eq!(once, twice);
    }

    #[test]
    fn preserves_the_unitary((q, gates) in segment()) {
        let out = builtin_optimize(q, &gates).unwrap();
        let e = check_equivalence(q, &gates, &out, 1e-9).unwrap();
        prop_assert!(e.equivalent, "deviation {}", e.deviation);
    }
}

#[test]
fn worked_examples() {
    assert!(builtin_optimize(1, &[Gate::H(0), Gate::H(0)]).unwrap().is_empty());

    let five = [Gate::H(0), Gate::X(2), Gate::cnot(1, 2), Gate::X(2), Gate::H(1)];
    let out = builtin_optimize(3, &five).unwrap();
    assert_eq!(out, vec![Gate::H(0), Gate::cnot(1, 2), Gate::H(1)]);
    assert!(check_equivalence(3, &five, &out, 1e-12).unwrap().equivalent);

    let rz = [Gate::rz(0, PI / 3.0), Gate::H(1), Gate::rz(0, PI / 3.0)];
    let out = builtin_optimize(2, &rz).unwrap();
    assert_eq!(out.len(), 2);
    assert!(out.contains(&Gate::rz(0, 2.0 * PI / 3.0)));
    assert!(out.contains(&Gate::H(1)));
    assert!(check_equivalence(2, &rz, &out, 1e-12).unwrap().equivalent);
}

#[test]
fn deterministic_across_threads() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let inputs: Vec<Vec<Gate>> = (0..64).map(|_| synth::random_gates(&mut rng, 6, 200, 0.3)).collect();
    let reference: Vec<Vec<Gate>> = inputs.iter().map(|g| builtin_optimize(6, g).unwrap()).collect();
    for threads in [1, 2, 4] {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        let out: Vec<Vec<Gate>> = pool.install(|| {
            use rayon::prelude::*;
            inputs.par_iter().map(|g| builtin_optimize(6, g).unwrap()).collect()
        });
        assert_eq!(out, reference);
    }
}

#[test]
fn well_behaved_on_random_segments() {
    let report = is_well_behaved_sample(&BuiltinOracle, 200, 5, SampleParams::default());
    assert!(report.is_well_behaved(), "{:?}", report.counterexamples.first());
    assert_eq!(report.oracle_errors, 0);
}
