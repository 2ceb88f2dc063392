//! Open-circuit potential curves.
//!
//! Curves are tabulated `(stoichiometry, potential)` pairs evaluated by
//! piecewise-linear interpolation. Queries outside the tabulated range are
//! errors; there is no extrapolation.
//!
//! The built-in pair is a generic graphite anode and NMC cathode, generated
//! from published half-cell fits by `tools/gen_default_ocp.py`. They are
//! defaults for synthetic studies, not measurements of a particular cell.

use std::io::Read;
use std::path::Path;
use std::sync::Arc;

use serde::Deserialize;

use crate::error::{Error, Result};

const GRAPHITE_DEFAULT: &str = include_str!("../data/graphite_default.csv");
const NMC_DEFAULT: &str = include_str!("../data/nmc_default.csv");

const MIN_POINTS: usize = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct OcpCurve {
    name: String,
    stoich: Vec<f64>,
    potential: Vec<f64>,
}

#[derive(Deserialize)]
struct Row {
    stoichiometry: f64,
    potential_v: f64,
}

impl OcpCurve {
    /// Validates and builds a curve from `(stoichiometry, potential)` points.
    pub fn new(name: impl Into<String>, points: &[(f64, f64)]) -> Result<Self> {
        let name = name.into();
        let invalid = |reason: String| Error::InvalidCurve {
            curve: name.clone(),
            reason,
        };
        if points.len() < MIN_POINTS {
            return Err(invalid(format!(
                "needs at least {MIN_POINTS} points, got {}",
                points.len()
            )));
        }
        for (i, &(s, u)) in points.iter().enumerate() {
            if !s.is_finite() || !u.is_finite() {
                return Err(invalid(format!("non-finite value at row {i}")));
            }
            if !(0.0..=1.0).contains(&s) {
                return Err(invalid(format!("stoichiometry {s} at row {i} outside [0, 1]")));
            }
        }
        for (i, w) in points.windows(2).enumerate() {
            if w[1].0 <= w[0].0 {
                return Err(invalid(format!(
                    "stoichiometry not strictly increasing at row {}",
                    i + 1
                )));
            }
            if w[1].1 >= w[0].1 {
                return Err(invalid(format!(
                    "potential not strictly decreasing at row {}",
                    i + 1
                )));
            }
        }
        Ok(OcpCurve {
            name,
            stoich: points.iter().map(|p| p.0).collect(),
            potential: points.iter().map(|p| p.1).collect(),
        })
    }

    /// Reads a `stoichiometry,potential_v` CSV.
    pub fn from_reader(name: impl Into<String>, rdr: impl Read) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(rdr);
        let headers = reader.headers()?.clone();
        let name = name.into();
        if headers.len() != 2
            || &headers[0] != "stoichiometry"
            || &headers[1] != "potential_v"
        {
            return Err(Error::InvalidCurve {
                curve: name,
                reason: format!("expected header `stoichiometry,potential_v`, got `{}`", headers.iter().collect::<Vec<_>>().join(",")),
            });
        }
        let mut points = Vec::new();
        for row in reader.deserialize() {
            let row: Row = row?;
            points.push((row.stoichiometry, row.potential_v));
        }
        Self::new(name, &points)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| path.display().to_string());
        Self::from_reader(name, file)
    }

    pub fn default_graphite() -> Self {
        Self::from_reader("graphite_default", GRAPHITE_DEFAULT.as_bytes())
            .expect("bundled graphite curve is valid")
    }

    pub fn default_nmc() -> Self {
        Self::from_reader("nmc_default", NMC_DEFAULT.as_bytes())
            .expect("bundled NMC curve is valid")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.stoich[0], self.stoich[self.stoich.len() - 1])
    }

    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.stoich.iter().copied().zip(self.potential.iter().copied())
    }

    /// Potential at `x` by linear interpolation between bracketing knots.
    pub fn evaluate(&self, x: f64) -> Result<f64> {
        let (lo, hi) = self.domain();
        if !(x >= lo && x <= hi) {
            return Err(Error::OcpDomain {
                curve: self.name.clone(),
                query: x,
                min: lo,
                max: hi,
            });
        }
        // index of the first knot strictly greater than x
        let j = self.stoich.partition_point(|&s| s <= x);
        if j == 0 {
            return Ok(self.potential[0]);
        }
        if j == self.stoich.len() {
            return Ok(self.potential[j - 1]);
        }
        let (x0, x1) = (self.stoich[j - 1], self.stoich[j]);
        let (u0, u1) = (self.potential[j - 1], self.potential[j]);
        if x == x0 {
            return Ok(u0);
        }
        let t = (x - x0) / (x1 - x0);
        Ok(u0 + t * (u1 - u0))
    }
}

/// Curves for both electrodes. Cheap to clone.
#[derive(Debug, Clone)]
pub struct OcpPair {
    pub negative: Arc<OcpCurve>,
    pub positive: Arc<OcpCurve>,
}

impl OcpPair {
    pub fn new(negative: OcpCurve, positive: OcpCurve) -> Self {
        OcpPair {
            negative: Arc::new(negative),
            positive: Arc::new(positive),
        }
    }
}

impl Default for OcpPair {
    fn default() -> Self {
        Self::new(OcpCurve::default_graphite(), OcpCurve::default_nmc())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn four() -> OcpCurve {
        OcpCurve::new("t", &[(0.0, 1.0), (0.25, 0.8), (0.5, 0.4), (1.0, 0.1)]).unwrap()
    }

    #[test]
    fn accepts_four_point_decreasing_table() {
        let c = four();
        assert_eq!(c.domain(), (0.0, 1.0));
    }

    #[test]
    fn rejects_repeated_stoichiometry() {
        let r = OcpCurve::new("t", &[(0.0, 1.0), (0.25, 0.8), (0.25, 0.7), (1.0, 0.1)]);
        assert!(matches!(r, Err(Error::InvalidCurve { .. })));
    }

    #[test]
    fn rejects_increasing_potential() {
        let r = OcpCurve::new("t", &[(0.0, 1.0), (0.25, 0.8), (0.5, 0.9), (1.0, 0.1)]);
        assert!(matches!(r, Err(Error::InvalidCurve { .. })));
    }

    #[test]
    fn rejects_out_of_range_and_short_tables() {
        assert!(OcpCurve::new("t", &[(0.0, 1.0), (0.5, 0.8), (0.7, 0.7), (1.1, 0.1)]).is_err());
        assert!(OcpCurve::new("t", &[(0.0, 1.0), (0.5, 0.8), (1.0, 0.1)]).is_err());
    }

    #[test]
    fn knots_are_reproduced_exactly() {
        let c = four();
        for (s, u) in c.points().collect::<Vec<_>>() {
            assert_eq!(c.evaluate(s).unwrap(), u);
        }
    }

    #[test]
    fn midpoint_is_mean_of_neighbours() {
        let c = four();
        assert!((c.evaluate(0.375).unwrap() - 0.6).abs() < 1e-15);
        assert!((c.evaluate(0.75).unwrap() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn no_extrapolation() {
        let c = four();
        assert!(matches!(c.evaluate(1.05), Err(Error::OcpDomain { .. })));
        assert!(c.evaluate(-1e-9).is_err());
        assert!(c.evaluate(f64::NAN).is_err());
    }

    #[test]
    fn csv_header_is_checked() {
        let bad = "x,u\n0,1\n0.3,0.9\n0.6,0.5\n1,0.1\n";
        assert!(OcpCurve::from_reader("bad", bad.as_bytes()).is_err());
        let good = "stoichiometry,potential_v\n0,1\n0.3,0.9\n0.6,0.5\n1,0.1\n";
        assert_eq!(OcpCurve::from_reader("good", good.as_bytes()).unwrap().points().count(), 4);
    }

    #[test]
    fn bundled_curves_load_and_decrease() {
        let pair = OcpPair::default();
        for c in [&pair.negative, &pair.positive] {
            let mut prev = f64::INFINITY;
            for i in 0..=5000 {
                let u = c.evaluate(i as f64 / 5000.0).unwrap();
                assert!(u <= prev, "{} not monotone at {}", c.name(), i);
                prev = u;
            }
        }
        // full-charge rest voltage of the reference cell sits at the 4.2 V limit
        let ocv = pair.positive.evaluate(0.0188).unwrap() - pair.negative.evaluate(0.9472).unwrap();
        assert!((ocv - 4.2).abs() < 0.01, "{ocv}");
    }
}
