//! Superhedging a call in a complete and an incomplete one-step market.

use procpolar::fixtures::{m1, m2};
use procpolar::market::{superhedge_value, Claim};
use procpolar::report::fmt_values;
use procpolar::tree::NodeId;
use procpolar::rat;

fn main() {
    for (name, market, payoff) in [
        ("binomial", m1(), vec![rat(3, 1), rat(0, 1)]),
        ("trinomial", m2(), vec![rat(3, 1), rat(0, 1), rat(0, 1)]),
    ] {
        let sh = superhedge_value(&Claim::Terminal(payoff), &market).unwrap();
        println!("{name}: price {}", sh.value);
        println!("  hold {} shares", fmt_values(sh.strategy.at(NodeId(0))));
        println!("  wealth   {}", fmt_values(&sh.wealth));
        println!("  residual {}", fmt_values(&sh.residual));
        println!("  extremal weights {}", fmt_values(&sh.worst_measure));
    }
}
