//! Runs every randomized suite briefly and prints the machine report of one.

use procpolar::report::Format;
use procpolar::suites::{run, Suite};

fn main() {
    for suite in [Suite::Cbt, Suite::Fbt, Suite::Closure, Suite::Props, Suite::Market, Suite::Lp] {
        let r = run(suite, 10, 1);
        println!("{:8} {}/{} checks", suite.name(), r.checks.iter().filter(|c| c.passed).count(), r.checks.len());
    }
    print!("{}", run(Suite::Lp, 3, 1).body(Format::Machine));
}
