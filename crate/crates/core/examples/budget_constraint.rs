//! Which consumption streams can be financed from a given capital? The
//! primal LP and the dual over martingale measures must give the same answer.

use procpolar::fixtures::m2;
use procpolar::market::{budget_check, min_budget, BudgetCertificate, ConsumptionDensity};
use procpolar::process::AdaptedProcess;
use procpolar::report::fmt_values;
use procpolar::rat;

fn main() {
    let m = m2();
    let tree = m.tree();
    // Consume 3 in the top state at the horizon.
    let density = AdaptedProcess::new(tree, vec![rat(0, 1), rat(3, 1), rat(0, 1), rat(0, 1)]).unwrap();
    let c = ConsumptionDensity::terminal(tree, density).unwrap();
    println!("smallest capital: {}", min_budget(&c, &m).unwrap());

    for x in [rat(1, 1), rat(99, 100)] {
        let v = budget_check(&c, &x, &m).unwrap();
        match v.certificate {
            BudgetCertificate::Strategy { wealth, .. } => {
                println!("x = {x}: affordable, wealth {}", fmt_values(&wealth));
            }
            BudgetCertificate::ViolatingMeasure { weights, expected_cost } => {
                println!("x = {x}: too little, weights {} cost {expected_cost}", fmt_values(&weights));
            }
        }
    }

    // Spread consumption over both dates.
    let ones = AdaptedProcess::constant(tree, rat(1, 1));
    let spread = ConsumptionDensity::new(tree, ones, vec![rat(1, 4), rat(3, 4)]).unwrap();
    println!("spread stream costs {}", min_budget(&spread, &m).unwrap());
}
