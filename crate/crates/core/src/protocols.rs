//! Closed-loop cycler: runs test protocols against the model and records
//! the resulting series.
//!
//! Every voltage-limited transition is resolved within the sample in which
//! it occurs, so recorded voltages never leave `[v_min, v_max]` by more than
//! the controller's convergence tolerance.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spm::{CellState, Spm};
use crate::series::{Segment, TimeSeries};

/// The five base protocols, in canonical scenario order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Designation {
    #[serde(rename = "C/5")]
    C5,
    #[serde(rename = "C/2")]
    C2,
    #[serde(rename = "1C")]
    C1,
    #[serde(rename = "P")]
    Pulse,
    #[serde(rename = "DST")]
    Dst,
}

/// Broad kind of a protocol; dataset swaps are only recognized within a kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProtocolCategory {
    ConstantCurrent,
    Dynamic,
}

impl Designation {
    pub const ALL: [Designation; 5] = [
        Designation::C5,
        Designation::C2,
        Designation::C1,
        Designation::Pulse,
        Designation::Dst,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Designation::C5 => "C/5",
            Designation::C2 => "C/2",
            Designation::C1 => "1C",
            Designation::Pulse => "P",
            Designation::Dst => "DST",
        }
    }

    /// File-name friendly tag.
    pub fn slug(self) -> &'static str {
        match self {
            Designation::C5 => "cccv_c5",
            Designation::C2 => "cccv_c2",
            Designation::C1 => "cccv_1c",
            Designation::Pulse => "pulse",
            Designation::Dst => "dst",
        }
    }

    pub fn category(self) -> ProtocolCategory {
        match self {
            Designation::C5 | Designation::C2 | Designation::C1 => ProtocolCategory::ConstantCurrent,
            Designation::Pulse | Designation::Dst => ProtocolCategory::Dynamic,
        }
    }

    /// Nominal laboratory duration of the reference protocol, hours.
    pub fn reference_duration_h(self) -> f64 {
        match self {
            Designation::C5 => 10.1,
            Designation::C2 => 4.4,
            Designation::C1 => 2.7,
            Designation::Pulse => 29.1,
            Designation::Dst => 4.0,
        }
    }
}

impl fmt::Display for Designation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Designation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Designation::ALL
            .into_iter()
            .find(|d| d.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::InvalidConfig(format!("unknown protocol designation `{s}`")))
    }
}

/// One DST step. Positive `c_rate` discharges, negative charges, zero rests.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DstStep {
    pub duration_s: f64,
    pub c_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProtocolKind {
    CccvCycle {
        c_rate: f64,
    },
    PulseCycle {
        pulse_c_rate: f64,
        on_s: f64,
        off_s: f64,
    },
    Dst {
        steps: Vec<DstStep>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileSpec {
    pub designation: Designation,
    #[serde(flatten)]
    pub kind: ProtocolKind,
}

impl ProfileSpec {
    pub fn cccv(designation: Designation, c_rate: f64) -> Self {
        ProfileSpec {
            designation,
            kind: ProtocolKind::CccvCycle { c_rate },
        }
    }

    /// C/3 pulses, 9.5 min on and 35 min off.
    pub fn default_pulse() -> Self {
        ProfileSpec {
            designation: Designation::Pulse,
            kind: ProtocolKind::PulseCycle {
                pulse_c_rate: 1.0 / 3.0,
                on_s: 570.0,
                off_s: 2100.0,
            },
        }
    }

    /// 360 s dynamic cycle over {2C, 1C, C/2, C/5}, max 2C discharge and
    /// 1C charge, mean absolute rate C/3.
    pub fn default_dst() -> Self {
        let step = |duration_s, c_rate| DstStep { duration_s, c_rate };
        ProfileSpec {
            designation: Designation::Dst,
            kind: ProtocolKind::Dst {
                steps: vec![
                    step(45.0, 0.0),
                    step(60.0, 0.2),
                    step(60.0, 0.5),
                    step(40.0, 0.0),
                    step(30.0, 1.0),
                    step(12.0, -1.0),
                    step(40.0, 0.0),
                    step(15.0, 2.0),
                    step(12.0, -0.5),
                    step(46.0, 0.0),
                ],
            },
        }
    }

    pub fn default_for(d: Designation) -> Self {
        match d {
            Designation::C5 => Self::cccv(d, 0.2),
            Designation::C2 => Self::cccv(d, 0.5),
            Designation::C1 => Self::cccv(d, 1.0),
            Designation::Pulse => Self::default_pulse(),
            Designation::Dst => Self::default_dst(),
        }
    }

    pub fn default_set() -> Vec<ProfileSpec> {
        Designation::ALL.into_iter().map(Self::default_for).collect()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(format!("{}: {m}", self.designation)));
        match &self.kind {
            ProtocolKind::CccvCycle { c_rate } => {
                if !(*c_rate > 0.0) {
                    return bad(format!("c_rate must be positive, got {c_rate}"));
                }
            }
            ProtocolKind::PulseCycle {
                pulse_c_rate,
                on_s,
                off_s,
            } => {
                if !(*pulse_c_rate > 0.0) || !(*on_s > 0.0) || !(*off_s > 0.0) {
                    return bad("pulse rate and timings must be positive".into());
                }
            }
            ProtocolKind::Dst { steps } => {
                if steps.is_empty() {
                    return bad("DST step table is empty".into());
                }
                if steps.iter().any(|s| !(s.duration_s > 0.0) || !s.c_rate.is_finite()) {
                    return bad("DST steps need positive durations and finite rates".into());
                }
                if steps.iter().all(|s| s.c_rate <= 0.0) {
                    return bad("DST step table never discharges".into());
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CyclerLimits {
    pub v_max: f64,
    pub v_min: f64,
    pub cv_cutoff_a: f64,
    pub nominal_capacity_ah: f64,
    /// A/V
    pub cv_gain: f64,
    pub max_duration_s: f64,
}

impl Default for CyclerLimits {
    fn default() -> Self {
        CyclerLimits {
            v_max: 4.2,
            v_min: 2.5,
            cv_cutoff_a: 0.050,
            nominal_capacity_ah: 2.9,
            cv_gain: 10.0,
            max_duration_s: 72.0 * 3600.0,
        }
    }
}

impl CyclerLimits {
    pub fn validate(&self) -> Result<()> {
        if !(self.v_max > self.v_min) {
            return Err(Error::InvalidConfig(format!(
                "v_max ({}) must exceed v_min ({})",
                self.v_max, self.v_min
            )));
        }
        if !(self.cv_cutoff_a > 0.0) || !(self.nominal_capacity_ah > 0.0) {
            return Err(Error::InvalidConfig(
                "cv_cutoff_a and nominal_capacity_ah must be positive".into(),
            ));
        }
        if !(self.cv_gain > 0.0) || !(self.max_duration_s > 0.0) {
            return Err(Error::InvalidConfig(
                "cv_gain and max_duration_s must be positive".into(),
            ));
        }
        Ok(())
    }

    /// Current in amperes for a C-rate.
    pub fn current_for(&self, c_rate: f64) -> f64 {
        c_rate * self.nominal_capacity_ah
    }
}

/// Mean absolute current expressed as a C-rate.
pub fn equivalent_c_rate(series: &TimeSeries, capacity_ah: f64) -> Result<f64> {
    if series.is_empty() {
        return Err(Error::Empty("cannot rate an empty series"));
    }
    let mean = series.current_a.iter().map(|i| i.abs()).sum::<f64>() / series.len() as f64;
    Ok(mean / capacity_ah)
}

/// Runs a protocol from the fully charged state of `spm`'s parameters.
pub fn run_protocol(spm: &mut Spm, spec: &ProfileSpec, limits: &CyclerLimits) -> Result<TimeSeries> {
    spec.validate()?;
    limits.validate()?;
    let mut cy = Cycler::new(spm, limits, spec.designation);

    let rest = cy.spm.terminal_voltage(&cy.state, 0.0)?;
    if rest <= limits.v_min {
        let msg = format!(
            "{}: rest voltage {rest:.4} V is not above v_min {:.4} V; nothing to discharge",
            spec.designation, limits.v_min
        );
        log::warn!("{msg}");
        return Ok(cy.finish(Some(msg)));
    }

    match &spec.kind {
        ProtocolKind::CccvCycle { c_rate } => {
            let i_cc = limits.current_for(*c_rate);
            cy.cccv(i_cc, Direction::Discharge)?;
            cy.cccv(i_cc, Direction::Charge)?;
        }
        ProtocolKind::PulseCycle {
            pulse_c_rate,
            on_s,
            off_s,
        } => {
            let i_p = limits.current_for(*pulse_c_rate);
            let on = cy.samples_for(*on_s);
            let off = cy.samples_for(*off_s);
            loop {
                if cy.constant_until_limit(i_p, on, Direction::Discharge)? == Phase::LimitReached {
                    break;
                }
                cy.rest(off)?;
            }
            cy.rest(off)?;
            loop {
                if cy.constant_until_limit(-i_p, on, Direction::Charge)? == Phase::LimitReached {
                    cy.constant_voltage(i_p, Direction::Charge)?;
                    break;
                }
                cy.rest(off)?;
            }
        }
        ProtocolKind::Dst { steps } => {
            let table: Vec<(f64, usize)> = steps
                .iter()
                .map(|s| (limits.current_for(s.c_rate), cy.samples_for(s.duration_s)))
                .collect();
            'cycle: loop {
                for &(current, n) in &table {
                    if cy.dst_step(current, n)? == Phase::LimitReached {
                        break 'cycle;
                    }
                }
            }
        }
    }
    Ok(cy.finish(None))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Direction {
    Discharge,
    Charge,
}

impl Direction {
    fn sign(self) -> f64 {
        match self {
            Direction::Discharge => 1.0,
            Direction::Charge => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Phase {
    Completed,
    LimitReached,
}

/// Bulk negative stoichiometry below which the cell counts as empty.
const EXHAUSTED_SOC: f64 = 1e-3;
const CV_MAX_ITERS: usize = 60;
const CV_TOL_A: f64 = 1e-10;

struct Cycler<'a> {
    spm: &'a mut Spm,
    limits: &'a CyclerLimits,
    state: CellState,
    series: TimeSeries,
    dt: f64,
    label: Designation,
    start_soc: [f64; 2],
}

impl<'a> Cycler<'a> {
    fn new(spm: &'a mut Spm, limits: &'a CyclerLimits, label: Designation) -> Self {
        let state = spm.init_state();
        let dt = spm.config().dt_output_s;
        let start_soc = state.bulk_soc();
        Cycler {
            spm,
            limits,
            state,
            series: TimeSeries::default(),
            dt,
            label,
            start_soc,
        }
    }

    fn samples_for(&self, seconds: f64) -> usize {
        ((seconds / self.dt).round() as usize).max(1)
    }

    fn next_time(&self) -> f64 {
        (self.series.len() + 1) as f64 * self.dt
    }

    fn prev_time(&self) -> f64 {
        self.series.time_s.last().copied().unwrap_or(0.0)
    }

    /// Steps a copy of the state; `None` if the model cannot carry `current`.
    fn trial(&mut self, current: f64) -> Option<(CellState, f64)> {
        let mut s = self.state.clone();
        let dt = self.next_time() - self.prev_time();
        match self.spm.step_voltage(&mut s, current, dt) {
            Ok(v) => Some((s, v)),
            Err(e) if e.is_simulation_failure() => None,
            Err(e) => panic!("unexpected solver error during trial step: {e}"),
        }
    }

    fn commit(&mut self, state: CellState, current: f64, v: f64) -> Result<()> {
        let t = self.next_time();
        if t > self.limits.max_duration_s {
            return Err(Error::DurationExceeded {
                designation: self.label.to_string(),
                max_duration_s: self.limits.max_duration_s,
            });
        }
        self.state = state;
        self.series.push(t, current, v);
        Ok(())
    }

    fn within(&self, v: f64, dir: Direction) -> bool {
        match dir {
            Direction::Discharge => v >= self.limits.v_min,
            Direction::Charge => v <= self.limits.v_max,
        }
    }

    /// Applies `current` for up to `n` samples, stopping before the first
    /// sample that would cross the voltage limit of `dir`.
    fn constant_until_limit(&mut self, current: f64, n: usize, dir: Direction) -> Result<Phase> {
        for _ in 0..n {
            if dir == Direction::Discharge && self.state.negative.bulk_soc() <= EXHAUSTED_SOC {
                return Ok(Phase::LimitReached);
            }
            match self.trial(current) {
                Some((s, v)) if self.within(v, dir) => self.commit(s, current, v)?,
                _ => return Ok(Phase::LimitReached),
            }
        }
        Ok(Phase::Completed)
    }

    fn rest(&mut self, n: usize) -> Result<()> {
        for _ in 0..n {
            let (s, v) = self
                .trial(0.0)
                .ok_or_else(|| Error::InvalidSeries("model failed at rest".into()))?;
            self.commit(s, 0.0, v)?;
        }
        Ok(())
    }

    /// Constant current to the limit, then constant voltage to cutoff.
    fn cccv(&mut self, i_cc: f64, dir: Direction) -> Result<()> {
        // unbounded sample count: only the voltage limit or the duration cap ends it
        self.constant_until_limit(dir.sign() * i_cc, usize::MAX, dir)?;
        self.constant_voltage(i_cc, dir)
    }

    /// Holds the voltage limit of `dir` with a proportional current
    /// controller until the current magnitude falls below the cutoff.
    /// The magnitude never exceeds `i_max`.
    fn constant_voltage(&mut self, i_max: f64, dir: Direction) -> Result<()> {
        let mut current = dir.sign() * i_max;
        loop {
            let (s, i, v) = self.solve_limited(current, i_max, dir)?;
            self.commit(s, i, v)?;
            current = i;
            if i.abs() < self.limits.cv_cutoff_a {
                return Ok(());
            }
        }
    }

    /// One DST step of `n` samples. Discharge steps end the profile at
    /// `v_min`; charge steps are voltage-limited at `v_max`.
    fn dst_step(&mut self, current: f64, n: usize) -> Result<Phase> {
        if current > 0.0 {
            return self.constant_until_limit(current, n, Direction::Discharge);
        }
        if current == 0.0 {
            self.rest(n)?;
            return Ok(Phase::Completed);
        }
        for _ in 0..n {
            match self.trial(current) {
                Some((s, v)) if self.within(v, Direction::Charge) => self.commit(s, current, v)?,
                _ => {
                    let (s, i, v) = self.solve_limited(current, current.abs(), Direction::Charge)?;
                    self.commit(s, i, v)?;
                }
            }
        }
        Ok(Phase::Completed)
    }

    /// Current for the next sample that holds the voltage limit of `dir`,
    /// from the proportional law `I ← clamp(I + k·(V − V_set))` iterated to
    /// a fixed point within the sample. Falls back to bisection when the
    /// loop gain is too high for the iteration to converge.
    fn solve_limited(
        &mut self,
        start: f64,
        i_max: f64,
        dir: Direction,
    ) -> Result<(CellState, f64, f64)> {
        let v_set = match dir {
            Direction::Discharge => self.limits.v_min,
            Direction::Charge => self.limits.v_max,
        };
        let clamp = |i: f64| match dir {
            Direction::Discharge => i.clamp(0.0, i_max),
            Direction::Charge => i.clamp(-i_max, 0.0),
        };
        let gain = self.limits.cv_gain;
        let mut current = clamp(start);
        for _ in 0..CV_MAX_ITERS {
            let Some((s, v)) = self.trial(current) else {
                break;
            };
            let next = clamp(current + gain * (v - v_set));
            if (next - current).abs() < CV_TOL_A {
                if self.within(v, dir) || (v - v_set).abs() < 1e-6 {
                    return Ok((s, current, v));
                }
                break;
            }
            current = next;
        }
        self.bisect_limited(i_max, dir)
    }

    fn bisect_limited(&mut self, i_max: f64, dir: Direction) -> Result<(CellState, f64, f64)> {
        let sign = dir.sign();
        // magnitude bracket: `lo` within the limit, `hi` beyond it
        let ok = |cy: &mut Self, m: f64| cy.trial(sign * m).filter(|&(_, v)| cy.within(v, dir));
        if let Some((s, v)) = ok(self, i_max) {
            return Ok((s, sign * i_max, v));
        }
        let Some(mut best) = ok(self, 0.0) else {
            return Err(Error::InvalidSeries(format!(
                "{}: voltage limit cannot be held even at zero current",
                self.label
            )));
        };
        let (mut lo, mut hi) = (0.0, i_max);
        let mut best_m = 0.0;
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            match ok(self, mid) {
                Some(r) => {
                    lo = mid;
                    best = r;
                    best_m = mid;
                }
                None => hi = mid,
            }
        }
        Ok((best.0, sign * best_m, best.1))
    }

    fn finish(self, warning: Option<String>) -> TimeSeries {
        let mut series = self.series;
        series.segments.push(Segment {
            label: self.label.to_string(),
            start: 0,
            end: series.len(),
            t0: 0.0,
            start_soc: self.start_soc,
            end_soc: self.state.bulk_soc(),
        });
        series.warnings.extend(warning);
        series
    }
}

/// Time-shifts and joins series. At most one DST segment is allowed and it
/// must come last; adjoining segments must agree on bulk SOC within 0.01.
pub fn concat_profiles(parts: &[&TimeSeries]) -> Result<TimeSeries> {
    if parts.is_empty() {
        return Err(Error::Empty("nothing to concatenate"));
    }
    let segments: Vec<&Segment> = parts.iter().flat_map(|p| p.segments.iter()).collect();
    let dst = Designation::Dst.as_str();
    let n_dst = segments.iter().filter(|s| s.label == dst).count();
    if n_dst > 1 {
        return Err(Error::Concat("more than one DST segment".into()));
    }
    if n_dst == 1 && segments.last().map(|s| s.label.as_str()) != Some(dst) {
        return Err(Error::Concat("DST must be the final segment".into()));
    }
    for w in segments.windows(2) {
        let (a, b) = (w[0], w[1]);
        for e in 0..2 {
            if (a.end_soc[e] - b.start_soc[e]).abs() > 0.01 {
                return Err(Error::Concat(format!(
                    "SOC discontinuity between `{}` (ends at {:.4}) and `{}` (starts at {:.4})",
                    a.label, a.end_soc[e], b.label, b.start_soc[e]
                )));
            }
        }
    }

    let mut out = TimeSeries::default();
    let mut offset = 0.0;
    for part in parts {
        let base = out.len();
        let origin = part.segments.first().map_or(0.0, |s| s.t0);
        let shift = offset - origin;
        out.time_s.extend(part.time_s.iter().map(|t| t + shift));
        out.current_a.extend_from_slice(&part.current_a);
        out.voltage_v.extend_from_slice(&part.voltage_v);
        out.segments.extend(part.segments.iter().map(|s| Segment {
            start: s.start + base,
            end: s.end + base,
            t0: s.t0 + shift,
            ..s.clone()
        }));
        out.warnings.extend(part.warnings.iter().cloned());
        offset = out.time_s.last().copied().unwrap_or(offset);
        if let Some(last) = out.segments.last() {
            offset = offset.max(last.t0);
        }
    }
    out.validate()?;
    Ok(out)
}
