//! Benchmark fixtures shared by the criterion benches.

use stopbound::MaxDistribution;

pub fn frechet_base() -> MaxDistribution {
    MaxDistribution::frechet(2.197, 0.613).expect("valid Fréchet parameters")
}

pub fn exp1() -> MaxDistribution {
    MaxDistribution::exponential(1.0).expect("valid rate")
}
