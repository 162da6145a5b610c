//! Prints one PASS/FAIL line per acceptance criterion and fails if any
//! criterion fails.

fn main() {
    let verdicts = multiflow_validation::criteria::all();
    for v in &verdicts {
        println!("{v}");
    }
    let failed = verdicts.iter().filter(|v| !v.passed).count();
    println!("acceptance: {} passed, {failed} failed", verdicts.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
