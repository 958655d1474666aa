//! Running experiments from JSON configs, as the `shrinkage experiment`
//! subcommand does, and reading back the written artifacts.

use shrinkage::harness::{run_experiment, ExperimentConfig};

fn main() -> shrinkage::Result<()> {
    let cfg = ExperimentConfig::from_json(
        r#"{
            "experiment": "onebit-vs-linear",
            "p": 200,
            "trials": 10,
            "seed": 7,
            "solver_config": {"max_iters": 100}
        }"#,
    )?;
    let out = std::env::temp_dir().join("shrinkage-example-onebit");
    let summary = run_experiment(&cfg, Some(&out))?;
    println!("{}", serde_json::to_string_pretty(&summary)?);
    let mut files: Vec<_> = std::fs::read_dir(&out)?.filter_map(|e| e.ok()).map(|e| e.file_name()).collect();
    files.sort();
    println!("{} files in {}, first {:?}", files.len(), out.display(), &files[..3]);

    let scaling = ExperimentConfig::from_json(r#"{"experiment": "psgd-scaling", "p_list": [40, 80], "trials": 10}"#)?;
    let summary = run_experiment(&scaling, None)?;
    for pt in summary["summary"]["points"].as_array().unwrap() {
        println!("p = {}: PSGD/PGD plateau ratio {:.3}, iterations to half {}", pt["p"], pt["ratio"].as_f64().unwrap(), pt["iters_to_half"]);
    }

    match ExperimentConfig::from_json(r#"{"experiment": "solve", "solver": "proxgd"}"#) {
        Err(e) => println!("rejected: {e}"),
        Ok(_) => unreachable!(),
    }
    Ok(())
}
