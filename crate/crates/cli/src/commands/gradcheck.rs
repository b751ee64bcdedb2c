use clap::Parser;
use gaze_tensor::check::run_op_suite;

use crate::{CliError, CliResult};

#[derive(Parser)]
pub struct Args {
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Random cases per op argument.
    #[arg(long, default_value_t = 20)]
    cases: usize,
}

pub fn run(args: Args) -> CliResult<()> {
    if args.cases == 0 {
        return Err(CliError::Config("cases must be >= 1".into()));
    }
    let reports = run_op_suite(args.seed, args.cases);
    let mut failed = 0usize;
    for r in &reports {
        println!(
            "{:<34} {:>3} cases  max rel err {:.3e}  {}",
            r.op,
            r.cases,
            r.max_rel_err,
            if r.pass { "ok" } else { "FAIL" }
        );
        failed += usize::from(!r.pass);
    }
    if failed > 0 {
        return Err(CliError::Numeric(format!(
            "{failed}/{} op checks exceeded tolerance",
            reports.len()
        )));
    }
    println!("all {} op checks within tolerance", reports.len());
    Ok(())
}
