//! Solves three small linear programs exactly and prints the certificate
//! that comes back with each outcome.

use procpolar::lp::{self, ConstraintSystem, LpOutcome, LpProblem, Relation, Sense};
use procpolar::report::fmt_values;
use procpolar::rat;

fn show(name: &str, problem: &LpProblem) {
    match lp::solve(problem).expect("well-formed problem") {
        LpOutcome::Optimal { value, point, duals } => {
            println!("{name}: optimal {value} at {}, duals {}", fmt_values(&point), fmt_values(&duals));
        }
        LpOutcome::Unbounded { point, ray } => {
            println!("{name}: unbounded along {} + s {}", fmt_values(&point), fmt_values(&ray));
        }
        LpOutcome::Infeasible { farkas } => {
            println!("{name}: infeasible, Farkas multipliers {}", fmt_values(&farkas));
        }
    }
}

fn main() {
    // max x + y  s.t.  x + 2y <= 4,  3x + y <= 6,  x, y >= 0
    let mut sys = ConstraintSystem::nonnegative(2);
    sys.push(vec![(0, rat(1, 1)), (1, rat(2, 1))], Relation::Le, rat(4, 1));
    sys.push(vec![(0, rat(3, 1)), (1, rat(1, 1))], Relation::Le, rat(6, 1));
    show("bounded", &LpProblem::new(Sense::Maximize, vec![rat(1, 1), rat(1, 1)], sys));

    let mut sys = ConstraintSystem::nonnegative(2);
    sys.push(vec![(0, rat(1, 1)), (1, rat(-1, 1))], Relation::Le, rat(1, 1));
    show("unbounded", &LpProblem::new(Sense::Maximize, vec![rat(0, 1), rat(1, 1)], sys));

    let mut sys = ConstraintSystem::nonnegative(1);
    sys.push(vec![(0, rat(1, 1))], Relation::Ge, rat(2, 1));
    sys.push(vec![(0, rat(1, 1))], Relation::Le, rat(1, 1));
    show("infeasible", &LpProblem::feasibility(sys));

    println!("certificates verified: {}", lp::certificates_verified());
}
