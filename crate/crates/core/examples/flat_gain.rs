//! Optimizes the reference design's reactance slope for flat 20 dB gain.

use jpa_forge::optimizer::{optimize, Bound, Objective, Param, ParameterSpace, DEFAULT_BUDGET};
use jpa_forge::reference::{reference_band, reference_config, reference_grid, TARGET_GAIN_DB};

fn main() -> jpa_forge::Result<()> {
    let objective = Objective::new(TARGET_GAIN_DB, reference_band(), reference_grid())?;
    let space = ParameterSpace::new(vec![Bound {
        param: Param::ReactanceSlope,
        lower: 0.0,
        upper: 3e-9,
    }])?;
    let out = optimize(&reference_config(), &space, &objective, DEFAULT_BUDGET, 0)?;
    let m = out.best.metrics.expect("best point has metrics");
    println!(
        "slope {:.4} nH  peak {:.2} dB  BW(3 dB) {:.0} MHz  ripple {:.2} dB  {:?}  feasible {}",
        out.best.values[0] * 1e9,
        m.peak_gain_db,
        m.bandwidth_3db_hz / 1e6,
        m.ripple_db,
        m.profile_class,
        out.feasible
    );
    Ok(())
}
