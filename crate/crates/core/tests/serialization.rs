use hamlearn::experiment::{read_records_csv, records_csv, AnisotropyAxis, ExperimentConfig, ModelConfig, SweepRecord, TermConfig};
use hamlearn::learner::{reconstruct, ReconstructOptions, ReconstructionResult};
use hamlearn::linalg::CMat;
use hamlearn::pauli::{enumerate_geometric_k_local, Pauli, PauliOperator, PauliString};
use hamlearn::sdp::{solve, SdpOptions, SdpProblem, SdpSolution};
use hamlearn::state::{add_noise, build_table, gibbs_density, required_strings, ExpectationTable};
use hamlearn::Error;
use num_complex::Complex64;
use proptest::prelude::*;

fn arb_string(n: usize) -> impl Strategy<Value = PauliString> {
    proptest::collection::vec(prop_oneof![Just(Pauli::I), Just(Pauli::X), Just(Pauli::Y), Just(Pauli::Z)], n)
        .prop_map(move |letters| PauliString::new(n, letters.into_iter().enumerate()).unwrap())
}

fn arb_table() -> impl Strategy<Value = ExpectationTable> {
    (1usize..5).prop_flat_map(|n| {
        (
            proptest::collection::vec((arb_string(n), -1.0f64..1.0), 0..20),
            0.0f64..1e-2,
            proptest::option::of(any::<u64>()),
        )
            .prop_map(move |(values, sigma, seed)| {
                let table = ExpectationTable::new(n, values).unwrap();
                match seed {
                    Some(s) => add_noise(&table, sigma, s).unwrap(),
                    None => table,
                }
            })
    })
}

fn arb_config() -> impl Strategy<Value = ExperimentConfig> {
    (
        3usize..8,
        proptest::collection::vec(0.05f64..50.0, 1..4),
        proptest::collection::vec(0.0f64..1e-2, 1..5),
        1usize..20,
        2usize..4,
        any::<u64>(),
        any::<bool>(),
        proptest::option::of(1e-12f64..1e-3),
        prop_oneof![
            (-2.0f64..2.0, any::<bool>()).prop_map(|(a, y)| ModelConfig::Xxz {
                anisotropy: a,
                anisotropy_axis: if y { AnisotropyAxis::Y } else { AnisotropyAxis::Z },
            }),
            (-3.0f64..3.0).prop_map(|c| ModelConfig::Custom {
                terms: vec![TermConfig { string: "X0 X1".into(), coefficient: c }, TermConfig { string: "Z1".into(), coefficient: 0.25 }],
            }),
        ],
    )
        .prop_map(|(n, temperatures, sigma_grid, runs_per_point, k_local, seed, project_delta, epsilon_w_override, model)| {
            ExperimentConfig {
                n,
                temperatures,
                sigma_grid,
                runs_per_point,
                k_local,
                seed,
                include_identity: false,
                project_delta,
                epsilon_w_override,
                model,
            }
        })
}

proptest! {
    #[test]
    fn table_text_round_trip(table in arb_table()) {
        let back = ExpectationTable::from_text(&table.to_text()).unwrap();
        prop_assert_eq!(back, table);
    }

    #[test]
    fn config_toml_round_trip(cfg in arb_config()) {
        let back = ExperimentConfig::from_toml(&cfg.to_toml()).unwrap();
        prop_assert_eq!(back, cfg);
    }

    #[test]
    fn sweep_csv_round_trip(rows in proptest::collection::vec(
        (0.0f64..1e-2, 0.1f64..10.0, 0usize..10, proptest::option::of(0.0f64..1.5), proptest::option::of(0.5f64..2.0),
         proptest::option::of(-1.0f64..1.0), 0usize..4, proptest::option::of(1usize..30), 0.0f64..1e4),
        0..12,
    )) {
        let verdicts = ["Candidate", "NotGibbs", "NotStationary", "GramDegenerate"];
        let records: Vec<SweepRecord> = rows
            .into_iter()
            .map(|(sigma_noise, temperature, run, theta, temp_ratio, mu_star, v, q, wall_ms)| SweepRecord {
                sigma_noise, temperature, run, theta, temp_ratio, mu_star, verdict: verdicts[v].into(), q, wall_ms,
            })
            .collect();
        let back = read_records_csv(&records_csv(&records).unwrap()).unwrap();
        prop_assert_eq!(back, records);
    }

    #[test]
    fn sdp_problem_json_round_trip(r in 1usize..6, q in 1usize..4, seed in any::<u64>()) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut herm = || {
            let a = CMat::from_fn(r, r, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
            (&a + a.adjoint()).scale(0.5)
        };
        let l0 = herm();
        let mats: Vec<CMat> = (0..q).map(|_| herm()).collect();
        let e: Vec<f64> = (0..q).map(|k| 1.0 + k as f64 / 3.0).collect();
        let p = SdpProblem::new(l0, mats, e, SdpOptions::default()).unwrap();
        prop_assert_eq!(SdpProblem::from_json(&p.to_json()).unwrap(), p);
    }
}

#[test]
fn solution_and_result_round_trips() {
    let diag = |v: [f64; 2]| CMat::from_diagonal(&nalgebra::DVector::from_iterator(2, v.iter().map(|&x| Complex64::new(x, 0.0))));
    let p = SdpProblem::new(diag([-1.0, -2.0]), vec![diag([1.0, 2.0])], vec![-1.0], SdpOptions::default()).unwrap();
    let sol = solve(&p).unwrap();
    assert_eq!(SdpSolution::from_json(&sol.to_json()).unwrap(), sol);

    let n = 3;
    let b = enumerate_geometric_k_local(n, 2, false).unwrap();
    let terms: Vec<PauliOperator> = b.iter().cloned().map(PauliOperator::from).collect();
    let h = hamlearn::models::xxz_chain(n, 0.5, false);
    let rho = gibbs_density(&h, 1.5).unwrap();
    let table = build_table(&rho, &required_strings(&b, &terms).unwrap()).unwrap();
    let res = reconstruct(&table, &b, &terms, &ReconstructOptions::default()).unwrap();
    assert_eq!(ReconstructionResult::from_toml(&res.to_toml()).unwrap(), res);
}

#[test]
fn malformed_inputs_name_the_line() {
    match ExpectationTable::from_text("# n = 2\nX0\t0.5\nX0 Y1\tnope\n") {
        Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
        other => panic!("{other:?}"),
    }
    match ExpectationTable::from_text("X0\t0.5\n") {
        Err(Error::Parse { line, .. }) => assert_eq!(line, 1),
        other => panic!("{other:?}"),
    }
    match ExperimentConfig::from_toml("n = 4\ntemperatures = [1.0]\nruns_per_point = \"ten\"\n") {
        Err(Error::Config { line, .. }) => assert_eq!(line, 3),
        other => panic!("{other:?}"),
    }
    match ReconstructionResult::from_toml("verdict = \"Maybe\"\n") {
        Err(Error::Parse { line, .. }) => assert_eq!(line, 1),
        other => panic!("{other:?}"),
    }
    match read_records_csv("sigma_noise,temperature,run,theta,temp_ratio,mu_star,verdict,q,wall_ms\n0,1,x,,,,Candidate,,1\n") {
        Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
        other => panic!("{other:?}"),
    }
}
