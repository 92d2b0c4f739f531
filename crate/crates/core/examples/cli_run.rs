// Driving a command through the library entry point of the command line:
// build a configuration, run `dirac-spectrum`, inspect the report and CSV.

use std::path::PathBuf;

use spinlab::cli::{run, Context, Profile, RunConfig};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let config = RunConfig::from_json(
        r#"{"dimension": 1, "signature": [1, 0], "grid": [64], "twist": [0.5], "options": {"count": 6}}"#,
    )?;
    let ctx = Context {
        profile: Profile::Default,
        base: PathBuf::from("."),
        signature: None,
    };
    let outcome = run("dirac-spectrum", Some(&config), &ctx)?;
    println!("{}", outcome.report.to_json());
    for (name, contents) in &outcome.files {
        println!("--- {name}\n{contents}");
    }
    assert_eq!(outcome.exit_code(), 0);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("cli example");
}
