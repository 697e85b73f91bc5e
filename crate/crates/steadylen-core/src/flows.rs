//! Catalog of exact Ricci flow solutions and the flow-equation verifier.
//!
//! Three families separate the behaviors the verification harness needs:
//! flat static space (every inequality saturates), the shrinking round
//! sphere (compact, positively curved, finite-time), and the cigar in its
//! flow gauge (a steady soliton with genuinely position-dependent ∇Ric).

use crate::geom::{eval_geometry, ChartDomain, MetricFamily, MetricKind, Point, TimeInterval};
use crate::rng::Rng;
use crate::{Error, Result};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

/// Names of the catalog families as they appear in configs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlowName {
    Euclidean,
    ShrinkingSphere,
    Cigar,
}

impl FlowName {
    pub fn as_str(&self) -> &'static str {
        match self {
            FlowName::Euclidean => "euclidean",
            FlowName::ShrinkingSphere => "shrinking_sphere",
            FlowName::Cigar => "cigar",
        }
    }

    pub fn parse(s: &str) -> Option<FlowName> {
        match s {
            "euclidean" => Some(FlowName::Euclidean),
            "shrinking_sphere" => Some(FlowName::ShrinkingSphere),
            "cigar" => Some(FlowName::Cigar),
            _ => None,
        }
    }
}

/// Requested flow: family name, dimension and optional chart margins.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowSpec {
    pub name: FlowName,
    pub dim: usize,
    /// Pole exclusion for the sphere chart (polar angles kept inside
    /// (margin, π − margin)).
    pub sphere_margin: f64,
    /// Working radius of the cigar chart.
    pub cigar_radius: f64,
}

impl FlowSpec {
    pub fn euclidean(dim: usize) -> Self {
        FlowSpec {
            name: FlowName::Euclidean,
            dim,
            sphere_margin: 0.1,
            cigar_radius: 6.0,
        }
    }

    pub fn shrinking_sphere(dim: usize) -> Self {
        FlowSpec {
            name: FlowName::ShrinkingSphere,
            dim,
            sphere_margin: 0.1,
            cigar_radius: 6.0,
        }
    }

    pub fn cigar() -> Self {
        FlowSpec {
            name: FlowName::Cigar,
            dim: 2,
            sphere_margin: 0.1,
            cigar_radius: 6.0,
        }
    }
}

/// Build the closed-form metric family for a flow spec.
///
/// * euclidean: g = δ for all τ,
/// * shrinking_sphere: g(τ) = (1 − 2(n−1)τ)·g_round, τ < 1/(2(n−1)),
/// * cigar: g_ij = δ_ij / (e^{4τ} + |x|²) on ℝ².
pub fn make_flow(spec: &FlowSpec) -> Result<MetricFamily> {
    match spec.name {
        FlowName::Euclidean => {
            if spec.dim < 1 {
                return Err(Error::InvalidFlow(String::from("euclidean needs dim >= 1")));
            }
            Ok(MetricFamily {
                dim: spec.dim,
                time_domain: TimeInterval::ALL,
                chart_domain: ChartDomain::All,
                kind: MetricKind::Euclidean,
            })
        }
        FlowName::ShrinkingSphere => {
            if spec.dim < 2 {
                return Err(Error::InvalidFlow(String::from(
                    "shrinking_sphere needs dim >= 2",
                )));
            }
            if !(spec.sphere_margin > 0.0 && spec.sphere_margin < 1.0) {
                return Err(Error::InvalidFlow(format!(
                    "sphere_margin {} outside (0, 1)",
                    spec.sphere_margin
                )));
            }
            // Maximal existence time of the unit round sphere.
            let tau_star = 1.0 / (2.0 * (spec.dim as f64 - 1.0));
            Ok(MetricFamily {
                dim: spec.dim,
                time_domain: TimeInterval {
                    lo: f64::NEG_INFINITY,
                    hi: tau_star,
                },
                chart_domain: ChartDomain::PolarBand {
                    margin: spec.sphere_margin,
                },
                kind: MetricKind::ShrinkingSphere,
            })
        }
        FlowName::Cigar => {
            if spec.dim != 2 {
                return Err(Error::InvalidFlow(String::from("cigar is two-dimensional")));
            }
            if !(spec.cigar_radius > 0.0) {
                return Err(Error::InvalidFlow(format!(
                    "cigar_radius {} must be positive",
                    spec.cigar_radius
                )));
            }
            Ok(MetricFamily {
                dim: 2,
                time_domain: TimeInterval::ALL,
                chart_domain: ChartDomain::Ball {
                    radius: spec.cigar_radius,
                },
                kind: MetricKind::Cigar,
            })
        }
    }
}

/// Sampling window used when drawing random in-domain points and times for
/// a flow. Kept well inside the chart and the existence interval.
pub fn sample_window(m: &MetricFamily) -> (Vec<(f64, f64)>, (f64, f64)) {
    let coord_boxes: Vec<(f64, f64)> = match m.kind {
        MetricKind::Euclidean => (0..m.dim).map(|_| (-1.5, 1.5)).collect(),
        MetricKind::ShrinkingSphere => {
            let mut boxes: Vec<(f64, f64)> = (0..m.dim - 1)
                .map(|_| (core::f64::consts::FRAC_PI_2 - 0.8, core::f64::consts::FRAC_PI_2 + 0.8))
                .collect();
            boxes.push((-1.2, 1.2));
            boxes
        }
        MetricKind::Cigar => (0..2).map(|_| (-1.5, 1.5)).collect(),
    };
    let time_box = match m.kind {
        MetricKind::Euclidean => (0.0, 1.0),
        MetricKind::ShrinkingSphere => {
            let hi = m.time_domain.hi;
            (0.0, 0.85 * hi)
        }
        MetricKind::Cigar => (0.0, 1.0),
    };
    (coord_boxes, time_box)
}

/// Draw a random point inside the sampling window.
pub fn sample_point(m: &MetricFamily, rng: &mut Rng) -> Point {
    let (boxes, _) = sample_window(m);
    Point::new(boxes.iter().map(|&(lo, hi)| rng.range(lo, hi)).collect())
}

/// Draw a random time inside the sampling window.
pub fn sample_time(m: &MetricFamily, rng: &mut Rng) -> f64 {
    let (_, (lo, hi)) = sample_window(m);
    rng.range(lo, hi)
}

/// Max over seeded random in-domain samples of ‖∂g/∂τ + 2 Ric‖_∞, the
/// residual of the Ricci flow equation the whole artifact assumes.
pub fn verify_flow(m: &MetricFamily, samples: usize, seed: u64) -> Result<f64> {
    let mut rng = Rng::new(seed);
    let mut worst = 0.0f64;
    for _ in 0..samples.max(1) {
        let x = sample_point(m, &mut rng);
        let tau = sample_time(m, &mut rng);
        let geo = eval_geometry(m, &x, tau)?;
        let n = m.dim;
        for i in 0..n {
            for j in 0..n {
                let res = geo.dg_dtau.at(i, j) + 2.0 * geo.ricci.at(i, j);
                worst = worst.max(res.abs());
            }
        }
    }
    Ok(worst)
}
