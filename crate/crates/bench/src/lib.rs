//! Fixed workloads shared by the benchmarks.

use tautsys_core::periods::{chart_period_series, toric_period_series};
use tautsys_core::systems::build_flag_system;
use tautsys_core::{Result, SparseSeries, TautSystem, ToricData, Variety};

pub fn g24() -> Variety {
    Variety::Grassmannian { d: 2, n: 4 }
}

/// Toric period series of the anticanonical cubic in `P^2`.
pub fn p2_toric_series(order: usize) -> Result<SparseSeries> {
    toric_period_series(&ToricData::projective(3)?, order)
}

/// System and chart period series of the G(2,4) hypersurface.
pub fn g24_pipeline(order: usize) -> Result<(TautSystem, SparseSeries)> {
    let x = g24();
    Ok((build_flag_system(&x, 0)?, chart_period_series(&x, order)?))
}
