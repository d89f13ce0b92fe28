//! Runs a small experiment, then replays it from its manifest.

use syklab::experiment::{rerun, run_experiment, ExperimentConfig, MANIFEST_FILE};

fn main() -> syklab::Result<()> {
    let cfg = ExperimentConfig::from_json(
        r#"{"experiment":"gap","n":[4,5],"p":[0.5,1.0],"trials":2,"seed":3,"restarts":4,"theta_step":0.02}"#,
    )?;
    let root = std::env::temp_dir().join("syklab_example_experiment");
    let first = run_experiment(&cfg, &root.join("first"))?;
    print!("{}", std::fs::read_to_string(root.join("first").join("gap.csv"))?);
    for t in &first.manifest.timings {
        println!("stage {} took {:.2} s", t.stage, t.seconds);
    }
    let replay = rerun(&root.join("first").join(MANIFEST_FILE), &root.join("second"))?;
    println!("rerun identical: {}", replay.identical());
    Ok(())
}
