use vosbench_core::dataset::{DatasetIndex, LoadOptions};
use vosbench_core::evaluator::{evaluate_split, EvalConfig, SplitOutcome, Task};
use vosbench_core::rle::{decode_rle, encode_rle};
use vosbench_core::synth::{perturb, render_dataset, write_sequence, Perturbation, SynthSpec};

fn spec() -> SynthSpec {
    SynthSpec::from_json(
        r#"{"split": "tiny", "seed": 3,
            "generate": {"count": 4, "width": 48, "height": 32,
                         "min_frames": 4, "max_frames": 6, "min_objects": 1, "max_objects": 3}}"#,
    )
    .unwrap()
}

#[test]
fn rendered_dataset_reopens_with_same_sequences() {
    let dir = tempfile::tempdir().unwrap();
    let index = render_dataset(&spec(), dir.path()).unwrap();
    let reopened = DatasetIndex::open(dir.path(), "tiny").unwrap();
    let names = |i: &DatasetIndex| i.sequences().iter().map(|e| e.name.clone()).collect::<Vec<_>>();
    assert_eq!(names(&index), names(&reopened));
    for e in reopened.sequences() {
        let gt = reopened.load_ground_truth(&e.name, &LoadOptions::default()).unwrap();
        for frame in gt.frames() {
            let rle = encode_rle(frame);
            assert_eq!(&decode_rle(frame.width(), frame.height(), &rle).unwrap(), frame);
        }
    }
}

#[test]
fn ground_truth_as_results_scores_perfectly_in_both_tasks() {
    let dir = tempfile::tempdir().unwrap();
    let index = render_dataset(&spec(), &dir.path().join("data")).unwrap();
    let results = dir.path().join("results");
    for e in index.sequences() {
        let gt = index.load_ground_truth(&e.name, &LoadOptions::default()).unwrap();
        write_sequence(&results.join(&e.name), &gt).unwrap();
    }
    for task in [Task::Unsupervised, Task::SemiSupervised] {
        match evaluate_split(&index, &results, &EvalConfig::new(task)).unwrap() {
            SplitOutcome::Evaluated(r) => assert_eq!(r.global.jf_mean, 1.0),
            other => panic!("{other:?}"),
        }
    }
}

#[test]
fn shifted_results_score_below_one() {
    let dir = tempfile::tempdir().unwrap();
    let index = render_dataset(&spec(), &dir.path().join("data")).unwrap();
    let results = dir.path().join("results");
    for e in index.sequences() {
        let gt = index.load_ground_truth(&e.name, &LoadOptions::default()).unwrap();
        let pred = perturb(&gt, &Perturbation::Dropout(0.5), 1).unwrap();
        write_sequence(&results.join(&e.name), &pred).unwrap();
    }
    match evaluate_split(&index, &results, &EvalConfig::new(Task::Unsupervised)).unwrap() {
        SplitOutcome::Evaluated(r) => assert!(r.global.jf_mean < 1.0 && r.global.jf_mean >= 0.0),
        other => panic!("{other:?}"),
    }
}
