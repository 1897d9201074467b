//! The analytic oracle suite, as run by `cqad validate`.

use cqad::validation::{run_validation, ValidationOptions};

fn main() -> cqad::Result<()> {
    let report = run_validation(ValidationOptions::default())?;
    print!("{}", report.to_text());
    if !report.all_passed() {
        std::process::exit(1);
    }
    Ok(())
}
