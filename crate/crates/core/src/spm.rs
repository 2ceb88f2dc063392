//! Grouped-parameter single particle model.
//!
//! # Model in grouped form
//!
//! Each electrode is one spherical particle. With the normalized radius
//! `x = r / R_s ∈ [0, 1]` and normalized concentration `c̃ = c_s / c_max`,
//! solid-phase diffusion becomes
//!
//! ```text
//! ∂c̃/∂t = (1/α) · (1/x²) · ∂/∂x (x² ∂c̃/∂x),        α = R_s² / D_s
//! ∂c̃/∂x |ₓ₌₀ = 0
//! ∂c̃/∂x |ₓ₌₁ = ± I·α / (3Q)
//! ```
//!
//! The surface condition comes from the molar flux `j = I / (F a A L)` with
//! specific area `a = 3ε / R_s` and capacity `Q = F A L ε c_max`:
//! `(R_s / c_max) · j / D_s = I R_s² / (3 D_s Q) = I α / (3Q)`.
//!
//! The overpotential denominator `2 a A L j₀`, with
//! `j₀ = r_eff c_max √(c_e c̃(1 − c̃))`, collapses the same way:
//! `2 · (3ε/R_s) · A L · r_eff c_max √c_e · √(c̃(1−c̃)) = 6 Q d √(c̃(1−c̃))`
//! where `d = r_eff √c_e / (F R_s)`. So
//!
//! ```text
//! η = (2RT/F) · asinh( s·I / (6 Q d √(c̃ₛₛ(1 − c̃ₛₛ))) )
//! V = OCP⁺(c̃ₛₛ⁺) − OCP⁻(c̃ₛₛ⁻) + η⁺ − η⁻ − R₀ I
//! ```
//!
//! and no individual physical constant (`D_s`, `R_s`, `A`, `L`, `ε`, `c_max`,
//! `r_eff`, `c_e`, `a`) survives: the model is a function of
//! [`GroupedParameters`] alone.
//!
//! # Sign convention
//!
//! `I > 0` is discharge. Signs follow lithium bookkeeping: on discharge the
//! positive particle gains lithium and the negative particle loses it,
//! `d(bulk SOC⁺)/dt = +I/Q⁺` and `d(bulk SOC⁻)/dt = −I/Q⁻`. Hence the
//! surface gradient is `+Iα⁺/(3Q⁺)` for the positive particle and
//! `−Iα⁻/(3Q⁻)` for the negative one, and `s = −1` (positive), `s = +1`
//! (negative) in the overpotential.
//!
//! # Discretization
//!
//! `N` uniform finite-volume shells on `x`, explicit Euler in time. Shell
//! `i` spans `[i h, (i+1) h]`, `h = 1/N`. Fluxes are exchanged across shell
//! faces with area `x²`, so the volume-weighted lithium content changes by
//! exactly the surface inflow every step. Steps are split into substeps
//! satisfying `dt_sub ≤ safety · α · h² / 2` for both particles.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ocp::OcpPair;
use crate::params::{Electrode, GroupedParameters, PhysicalConstants};
use crate::series::{Segment, TimeSeries};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub n_radial_shells: usize,
    pub dt_output_s: f64,
    pub stability_safety: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            n_radial_shells: 16,
            dt_output_s: 1.0,
            stability_safety: 0.5,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_radial_shells < 4 {
            return Err(Error::InvalidConfig(format!(
                "n_radial_shells must be >= 4, got {}",
                self.n_radial_shells
            )));
        }
        if !(self.dt_output_s > 0.0) || !self.dt_output_s.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "dt_output_s must be positive, got {}",
                self.dt_output_s
            )));
        }
        if !(self.stability_safety > 0.0 && self.stability_safety < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "stability_safety must lie in (0, 1), got {}",
                self.stability_safety
            )));
        }
        Ok(())
    }
}

/// Normalized concentration per radial shell, center to surface.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElectrodeState {
    pub shells: Vec<f64>,
}

impl ElectrodeState {
    pub fn uniform(n: usize, value: f64) -> Self {
        ElectrodeState {
            shells: vec![value; n],
        }
    }

    /// Surface stoichiometry by linear extrapolation from the two outermost
    /// shell centers to `x = 1`.
    pub fn surface_stoichiometry(&self) -> f64 {
        let n = self.shells.len();
        let outer = self.shells[n - 1];
        let inner = self.shells[n - 2];
        outer + 0.5 * (outer - inner)
    }

    /// Volume-weighted mean `3 ∫₀¹ c̃ x² dx`.
    pub fn bulk_soc(&self) -> f64 {
        let n = self.shells.len();
        let n3 = (n * n * n) as f64;
        self.shells
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let (a, b) = (i as f64, (i + 1) as f64);
                (b * b * b - a * a * a) / n3 * c
            })
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellState {
    pub negative: ElectrodeState,
    pub positive: ElectrodeState,
    pub time_s: f64,
}

impl CellState {
    pub fn electrode(&self, e: Electrode) -> &ElectrodeState {
        match e {
            Electrode::Negative => &self.negative,
            Electrode::Positive => &self.positive,
        }
    }

    pub fn bulk_soc(&self) -> [f64; 2] {
        [self.negative.bulk_soc(), self.positive.bulk_soc()]
    }
}

/// Uniform initial state at the parameters' full-charge stoichiometries.
pub fn init_state(params: &GroupedParameters, config: &SolverConfig) -> Result<CellState> {
    params.validate()?;
    config.validate()?;
    let n = config.n_radial_shells;
    Ok(CellState {
        negative: ElectrodeState::uniform(n, params.soc0_neg),
        positive: ElectrodeState::uniform(n, params.soc0_pos),
        time_s: 0.0,
    })
}

/// Surface overpotential in volts.
///
/// `electrode` selects the sign: `+1` for the negative particle, `−1` for
/// the positive particle, with `I > 0` on discharge.
pub fn overpotential(
    c_ss: f64,
    current_a: f64,
    q: f64,
    d: f64,
    consts: &PhysicalConstants,
    electrode: Electrode,
) -> Result<f64> {
    if !(c_ss > 0.0 && c_ss < 1.0) {
        return Err(Error::KineticSingularity(c_ss));
    }
    let sign = match electrode {
        Electrode::Negative => 1.0,
        Electrode::Positive => -1.0,
    };
    let denom = 6.0 * q * d * (c_ss * (1.0 - c_ss)).sqrt();
    Ok(consts.kinetic_prefactor() * (sign * current_a / denom).asinh())
}

/// Precomputed finite-volume coefficients for one shell count.
#[derive(Debug, Clone)]
struct ShellGeometry {
    n: usize,
    /// face-area / (h · shell volume) toward the center
    inner: Vec<f64>,
    /// face-area / (h · shell volume) toward the surface
    outer: Vec<f64>,
    /// 1 / (volume of the outermost shell)
    surface: f64,
}

impl ShellGeometry {
    fn new(n: usize) -> Self {
        let h = 1.0 / n as f64;
        let vol = |i: usize| {
            let (a, b) = (i as f64 * h, (i + 1) as f64 * h);
            (b * b * b - a * a * a) / 3.0
        };
        let area = |k: usize| {
            let r = k as f64 * h;
            r * r
        };
        let inner = (0..n).map(|i| area(i) / (h * vol(i))).collect();
        let outer = (0..n)
            .map(|i| if i + 1 < n { area(i + 1) / (h * vol(i)) } else { 0.0 })
            .collect();
        ShellGeometry {
            n,
            inner,
            outer,
            surface: 1.0 / vol(n - 1),
        }
    }

    fn h(&self) -> f64 {
        1.0 / self.n as f64
    }
}

/// A solver instance: parameters, curves and scratch space for stepping.
///
/// Not shareable during a run; create one per thread.
#[derive(Debug, Clone)]
pub struct Spm {
    params: GroupedParameters,
    consts: PhysicalConstants,
    config: SolverConfig,
    ocp: OcpPair,
    geom: ShellGeometry,
    max_substep: f64,
    scratch: Vec<f64>,
}

impl Spm {
    pub fn new(
        params: GroupedParameters,
        consts: PhysicalConstants,
        config: SolverConfig,
        ocp: OcpPair,
    ) -> Result<Self> {
        params.validate()?;
        consts.validate()?;
        config.validate()?;
        let geom = ShellGeometry::new(config.n_radial_shells);
        let h = geom.h();
        let alpha_min = params.alpha_neg.min(params.alpha_pos);
        let max_substep = config.stability_safety * alpha_min * h * h / 2.0;
        Ok(Spm {
            params,
            consts,
            config,
            ocp,
            scratch: vec![0.0; geom.n + 1],
            geom,
            max_substep,
        })
    }

    pub fn params(&self) -> &GroupedParameters {
        &self.params
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    pub fn consts(&self) -> &PhysicalConstants {
        &self.consts
    }

    pub fn ocp(&self) -> &OcpPair {
        &self.ocp
    }

    pub fn init_state(&self) -> CellState {
        let n = self.config.n_radial_shells;
        CellState {
            negative: ElectrodeState::uniform(n, self.params.soc0_neg),
            positive: ElectrodeState::uniform(n, self.params.soc0_pos),
            time_s: 0.0,
        }
    }

    /// Number of substeps used for a step of length `dt`.
    pub fn substeps(&self, dt: f64) -> usize {
        ((dt / self.max_substep).ceil() as usize).max(1)
    }

    /// Advances `state` by `dt` seconds at constant `current_a`.
    ///
    /// On error the state is left partially advanced; callers that need
    /// to retry should step a clone.
    pub fn step(&mut self, state: &mut CellState, current_a: f64, dt: f64) -> Result<()> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::InvalidConfig(format!("step dt must be positive, got {dt}")));
        }
        let n_sub = self.substeps(dt);
        let dt_sub = dt / n_sub as f64;
        let t_start = state.time_s;
        // surface inflow rate per unit normalized volume, bulk-preserving
        let inflow_neg = -current_a / (3.0 * self.params.q_neg);
        let inflow_pos = current_a / (3.0 * self.params.q_pos);
        for k in 0..n_sub {
            let t = t_start + (k + 1) as f64 * dt_sub;
            self.advance(
                &mut state.negative.shells,
                dt_sub / self.params.alpha_neg,
                dt_sub * inflow_neg,
            );
            check_bounds(&state.negative, Electrode::Negative, t)?;
            self.advance(
                &mut state.positive.shells,
                dt_sub / self.params.alpha_pos,
                dt_sub * inflow_pos,
            );
            check_bounds(&state.positive, Electrode::Positive, t)?;
        }
        state.time_s = t_start + dt;
        Ok(())
    }

    /// One explicit substep. `kappa = dt/α`; `inflow = dt · (±I/(3Q))`.
    fn advance(&mut self, c: &mut [f64], kappa: f64, inflow: f64) {
        let g = &self.geom;
        let n = g.n;
        let flux = &mut self.scratch;
        // flux[k] = (c_k − c_{k−1}) across face k; faces 0 and n are boundaries
        flux[0] = 0.0;
        for k in 1..n {
            flux[k] = c[k] - c[k - 1];
        }
        for i in 0..n - 1 {
            c[i] += kappa * (g.outer[i] * flux[i + 1] - g.inner[i] * flux[i]);
        }
        c[n - 1] += -kappa * g.inner[n - 1] * flux[n - 1] + inflow * g.surface;
    }

    pub fn surface_stoichiometry(&self, state: &CellState, e: Electrode) -> f64 {
        state.electrode(e).surface_stoichiometry()
    }

    pub fn overpotential(&self, c_ss: f64, current_a: f64, e: Electrode) -> Result<f64> {
        overpotential(
            c_ss,
            current_a,
            self.params.capacity(e),
            self.params.kinetic(e),
            &self.consts,
            e,
        )
    }

    /// Open-circuit voltage at the present surface stoichiometries.
    pub fn open_circuit_voltage(&self, state: &CellState) -> Result<f64> {
        let cp = state.positive.surface_stoichiometry();
        let cn = state.negative.surface_stoichiometry();
        Ok(self.ocp.positive.evaluate(cp)? - self.ocp.negative.evaluate(cn)?)
    }

    pub fn terminal_voltage(&self, state: &CellState, current_a: f64) -> Result<f64> {
        let cp = state.positive.surface_stoichiometry();
        let cn = state.negative.surface_stoichiometry();
        let eta_p = self.overpotential(cp, current_a, Electrode::Positive)?;
        let eta_n = self.overpotential(cn, current_a, Electrode::Negative)?;
        let ocv = self.ocp.positive.evaluate(cp)? - self.ocp.negative.evaluate(cn)?;
        Ok(ocv + eta_p - eta_n - self.params.r0 * current_a)
    }

    /// Steps once and returns the voltage at the end of the step.
    pub fn step_voltage(&mut self, state: &mut CellState, current_a: f64, dt: f64) -> Result<f64> {
        self.step(state, current_a, dt)?;
        self.terminal_voltage(state, current_a)
    }

    /// Replays the current of `profile` and returns the model voltages,
    /// segment by segment, each segment starting fully charged.
    pub fn simulate_current(&mut self, profile: &TimeSeries) -> Result<TimeSeries> {
        if profile.is_empty() {
            return Err(Error::Empty("profile has no samples"));
        }
        let mut out = TimeSeries {
            time_s: profile.time_s.clone(),
            current_a: profile.current_a.clone(),
            voltage_v: Vec::with_capacity(profile.len()),
            segments: Vec::with_capacity(profile.segments.len()),
            warnings: Vec::new(),
        };
        for seg in profile.replay_segments() {
            let mut state = self.init_state();
            let start_soc = state.bulk_soc();
            self.replay(&mut state, profile, &seg, |_, v| out.voltage_v.push(v))?;
            if !profile.segments.is_empty() {
                out.segments.push(Segment {
                    start_soc,
                    end_soc: state.bulk_soc(),
                    ..seg
                });
            }
        }
        Ok(out)
    }

    /// Sum of squared voltage residuals of one segment against `measured`.
    pub fn segment_sse(&mut self, measured: &TimeSeries, seg: &Segment) -> Result<f64> {
        let mut state = self.init_state();
        let mut sse = 0.0;
        self.replay(&mut state, measured, seg, |k, v| {
            let e = measured.voltage_v[k] - v;
            sse += e * e;
        })?;
        Ok(sse)
    }

    /// Sum of squared residuals over every segment of `measured`.
    pub fn sse(&mut self, measured: &TimeSeries) -> Result<f64> {
        let mut total = 0.0;
        for seg in measured.replay_segments() {
            total += self.segment_sse(measured, &seg)?;
        }
        Ok(total)
    }

    fn replay(
        &mut self,
        state: &mut CellState,
        profile: &TimeSeries,
        seg: &Segment,
        mut sink: impl FnMut(usize, f64),
    ) -> Result<()> {
        state.time_s = seg.t0;
        let mut t_prev = seg.t0;
        for k in seg.start..seg.end {
            let t = profile.time_s[k];
            let i = profile.current_a[k];
            let v = self.step_voltage(state, i, t - t_prev)?;
            sink(k, v);
            t_prev = t;
        }
        Ok(())
    }
}

fn check_bounds(e: &ElectrodeState, electrode: Electrode, t: f64) -> Result<()> {
    let surface = e.surface_stoichiometry();
    if !(0.0..=1.0).contains(&surface) {
        return Err(Error::Infeasible {
            electrode,
            time_s: t,
            value: surface,
        });
    }
    if let Some(&bad) = e.shells.iter().find(|c| !(0.0..=1.0).contains(*c)) {
        return Err(Error::Infeasible {
            electrode,
            time_s: t,
            value: bad,
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spm_with(n: usize) -> Spm {
        let cfg = SolverConfig {
            n_radial_shells: n,
            ..Default::default()
        };
        Spm::new(
            GroupedParameters::REFERENCE,
            PhysicalConstants::default(),
            cfg,
            OcpPair::default(),
        )
        .unwrap()
    }

    fn spm() -> Spm {
        spm_with(16)
    }

    #[test]
    fn alpha_is_radius_squared_over_diffusivity() {
        // α = R²/D; a 5.9 µm particle with D ≈ 1.121e-14 m²/s gives the reference α⁻
        let r: f64 = 5.9e-6;
        let d = r * r / 3105.3457;
        assert!((r * r / d - GroupedParameters::REFERENCE.alpha_neg).abs() < 1e-9);
    }

    #[test]
    fn init_state_is_uniform_at_soc0() {
        let s = init_state(&GroupedParameters::REFERENCE, &SolverConfig::default()).unwrap();
        assert!(s.negative.shells.iter().all(|&c| c == 0.9472));
        assert!(s.positive.shells.iter().all(|&c| c == 0.0188));
        assert_eq!(s.time_s, 0.0);

        let mut p = GroupedParameters::REFERENCE;
        p.soc0_neg = 0.5;
        p.soc0_pos = 0.5;
        let s = init_state(&p, &SolverConfig::default()).unwrap();
        assert!(s
            .negative
            .shells
            .iter()
            .chain(&s.positive.shells)
            .all(|&c| c == 0.5));

        p.soc0_neg = 1.2;
        assert!(init_state(&p, &SolverConfig::default()).is_err());
    }

    #[test]
    fn solver_config_rejects_coarse_grid() {
        let cfg = SolverConfig {
            n_radial_shells: 3,
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn zero_current_freezes_uniform_state() {
        let mut m = spm();
        let mut s = m.init_state();
        let before = s.clone();
        for _ in 0..100 {
            m.step(&mut s, 0.0, 1.0).unwrap();
        }
        assert_eq!(s.negative, before.negative);
        assert_eq!(s.positive, before.positive);
        assert_eq!(s.time_s, 100.0);
    }

    #[test]
    fn surface_and_bulk_of_uniform_profiles() {
        let e = ElectrodeState::uniform(16, 0.5);
        assert!((e.surface_stoichiometry() - 0.5).abs() < 1e-15);
        assert!((ElectrodeState::uniform(16, 0.25).bulk_soc() - 0.25).abs() < 1e-15);
        assert!((ElectrodeState::uniform(16, 1.0).bulk_soc() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn overpotential_zero_and_odd() {
        let c = PhysicalConstants::default();
        for e in [Electrode::Negative, Electrode::Positive] {
            assert_eq!(overpotential(0.3, 0.0, 1e4, 1e-4, &c, e).unwrap(), 0.0);
            let a = overpotential(0.3, 2.0, 1e4, 1e-4, &c, e).unwrap();
            let b = overpotential(0.3, -2.0, 1e4, 1e-4, &c, e).unwrap();
            assert_eq!(a, -b);
        }
    }

    #[test]
    fn overpotential_signs_on_discharge() {
        let c = PhysicalConstants::default();
        assert!(overpotential(0.5, 1.0, 1e4, 1e-4, &c, Electrode::Positive).unwrap() < 0.0);
        assert!(overpotential(0.5, 1.0, 1e4, 1e-4, &c, Electrode::Negative).unwrap() > 0.0);
    }

    #[test]
    fn overpotential_small_current_linearization() {
        // Taylor oracle: asinh(z) ≈ z for small z
        let c = PhysicalConstants::default();
        let p = GroupedParameters::REFERENCE;
        for (e, q, d) in [
            (Electrode::Negative, p.q_neg, p.d_neg),
            (Electrode::Positive, p.q_pos, p.d_pos),
        ] {
            for css in [0.05, 0.3, 0.5, 0.9] {
                let i = 1e-3;
                let s = if e == Electrode::Negative { 1.0 } else { -1.0 };
                let lin = c.kinetic_prefactor() * s * i / (6.0 * q * d * (css * (1.0 - css) as f64).sqrt());
                let eta = overpotential(css, i, q, d, &c, e).unwrap();
                assert!(((eta - lin) / lin).abs() < 1e-4, "{e} {css}: {eta} vs {lin}");
            }
        }
    }

    #[test]
    fn overpotential_rejects_boundary_stoichiometry() {
        let c = PhysicalConstants::default();
        for x in [0.0, 1.0, -0.1, 1.1] {
            assert!(matches!(
                overpotential(x, 1.0, 1e4, 1e-4, &c, Electrode::Negative),
                Err(Error::KineticSingularity(_))
            ));
        }
    }

    #[test]
    fn rest_voltage_is_ocv_difference() {
        let m = spm();
        let s = m.init_state();
        let v = m.terminal_voltage(&s, 0.0).unwrap();
        let ocp = OcpPair::default();
        let expect = ocp.positive.evaluate(0.0188).unwrap() - ocp.negative.evaluate(0.9472).unwrap();
        assert!((v - expect).abs() < 1e-12);
    }

    #[test]
    fn r0_enters_linearly() {
        let mut p = GroupedParameters::REFERENCE;
        let cfg = SolverConfig::default();
        let m0 = Spm::new(p, PhysicalConstants::default(), cfg, OcpPair::default()).unwrap();
        p.r0 += 0.01;
        let m1 = Spm::new(p, PhysicalConstants::default(), cfg, OcpPair::default()).unwrap();
        let s = m0.init_state();
        let i = 1.7;
        let dv = m0.terminal_voltage(&s, i).unwrap() - m1.terminal_voltage(&s, i).unwrap();
        assert!((dv - 0.01 * i).abs() < 1e-12);
    }

    #[test]
    fn discharge_bookkeeping_signs() {
        let mut m = spm();
        let mut s = m.init_state();
        let [n0, p0] = s.bulk_soc();
        m.step(&mut s, 2.9, 10.0).unwrap();
        let [n1, p1] = s.bulk_soc();
        assert!(n1 < n0);
        assert!(p1 > p0);
    }

    #[test]
    fn step_detects_overflow() {
        let mut p = GroupedParameters::REFERENCE;
        p.soc0_pos = 0.99;
        let mut m = Spm::new(p, PhysicalConstants::default(), SolverConfig::default(), OcpPair::default()).unwrap();
        let mut s = m.init_state();
        let mut err = None;
        for _ in 0..200 {
            if let Err(e) = m.step(&mut s, 2.9, 1.0) {
                err = Some(e);
                break;
            }
        }
        match err {
            Some(Error::Infeasible { electrode, time_s, .. }) => {
                assert_eq!(electrode, Electrode::Positive);
                assert!(time_s > 0.0);
            }
            other => panic!("expected infeasible state, got {other:?}"),
        }
    }

    #[test]
    fn substepping_respects_bound() {
        let m = spm();
        let h = 1.0 / 16.0;
        let bound = 0.5 * 1865.8674 * h * h / 2.0;
        let n = m.substeps(10.0);
        assert!(10.0 / n as f64 <= bound);
        assert!(10.0 / (n - 1) as f64 > bound);
    }

    #[test]
    fn replay_of_own_output_is_exact() {
        let mut m = spm();
        let mut ts = TimeSeries::default();
        let mut s = m.init_state();
        for k in 1..=300 {
            let i = if k < 200 { 2.0 } else { -0.5 };
            let v = m.step_voltage(&mut s, i, 1.0).unwrap();
            ts.push(k as f64, i, v);
        }
        assert_eq!(m.sse(&ts).unwrap(), 0.0);
        let sim = m.simulate_current(&ts).unwrap();
        assert_eq!(sim.voltage_v, ts.voltage_v);
    }
}
