use dynpred::generate::{generate, ErrorModel, ProblemKind};
use dynpred::harness::{brute_force, run, Instance, Mode, RunOptions};
use dynpred::io;

#[test]
fn instances_survive_a_trip_through_the_file_formats() {
    for (i, problem) in ProblemKind::ALL.into_iter().enumerate() {
        let w = generate(problem, ErrorModel::HeavyTail { sigma: 3.0 }, 6, 96, i as u64).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = |f: &str| dir.path().join(f);
        io::write(&path("p"), &io::write_predictions(&w.predictions)).unwrap();
        io::write(&path("s"), &io::write_stream(&w.stream)).unwrap();
        io::write(&path("b"), &io::write_bundles(&w.bundles)).unwrap();

        let stream = io::parse_stream(&io::read(&path("s")).unwrap()).unwrap();
        let preds = io::parse_predictions(&io::read(&path("p")).unwrap()).unwrap();
        let bundles = io::parse_bundles(&io::read(&path("b")).unwrap()).unwrap();
        assert_eq!(stream, w.stream);
        assert_eq!(preds, w.predictions);
        assert_eq!(bundles, w.bundles);

        let loaded = Instance::new(problem, w.vertices, stream, preds, bundles).unwrap();
        let direct = Instance::from_workload(&w);
        assert_eq!(loaded.ground, direct.ground);
        for mode in [Mode::Predicted, Mode::Boosted] {
            let opts = RunOptions::new(mode, 11);
            let a = run(&loaded, &opts).unwrap();
            let b = run(&direct, &opts).unwrap();
            assert_eq!(a.outputs, b.outputs);
            assert_eq!(a.counters, b.counters);
            assert_eq!(a.outputs, brute_force(&direct).unwrap(), "{problem} {mode}");
        }
    }
}
