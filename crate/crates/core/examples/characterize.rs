//! Prints duration and equivalent C-rate of the default protocols.

use spmid_core::protocols::equivalent_c_rate;
use spmid_core::{run_protocol, CyclerLimits, GroupedParameters, OcpPair, PhysicalConstants, ProfileSpec, SolverConfig, Spm};

fn main() -> spmid_core::Result<()> {
    let limits = CyclerLimits::default();
    for spec in ProfileSpec::default_set() {
        let mut spm = Spm::new(
            GroupedParameters::REFERENCE,
            PhysicalConstants::default(),
            SolverConfig::default(),
            OcpPair::default(),
        )?;
        let ts = run_protocol(&mut spm, &spec, &limits)?;
        let rate = equivalent_c_rate(&ts, limits.nominal_capacity_ah)?;
        let seg = &ts.segments[0];
        println!(
            "{:>4}  {:6.2} h  C/{:<5.2} samples {:6}  soc- {:.3}->{:.3}  soc+ {:.3}->{:.3}  warnings {:?}",
            spec.designation.as_str(),
            ts.duration_h(),
            1.0 / rate,
            ts.len(),
            seg.start_soc[0],
            seg.end_soc[0],
            seg.start_soc[1],
            seg.end_soc[1],
            ts.warnings
        );
    }
    Ok(())
}
