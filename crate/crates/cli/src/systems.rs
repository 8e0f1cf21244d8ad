//! Builds systems and observables from their config descriptors.

use std::sync::Arc;

use corrlab::billiard::{
    find_corridor, free_path, reflection_angle, BilliardGeometry, CollisionCoordinate,
    HorizonStatus, Scatterer,
};
use corrlab::dynamics::{
    BinaryExpansion, Branch, BranchFormula, DoublingMap, FirstCoordinate, IntervalMap,
    Observable, PiecewiseExpandingMap, TentMap, ToralAutomorphism, TorusPoint, UnitIntervalPoint,
};

use crate::config::{BranchConfig, ObservableConfig, ObservableKind, SystemConfig};
use crate::error::CliError;

pub enum System {
    Doubling(DoublingMap),
    Tent(TentMap),
    Toral(ToralAutomorphism),
    Piecewise(PiecewiseExpandingMap),
    Billiard(Arc<BilliardGeometry>),
}

fn system_error(message: impl Into<String>) -> CliError {
    CliError::Config {
        field: Some("system".into()),
        message: message.into(),
    }
}

fn branch(i: usize, b: &BranchConfig) -> Result<Branch, CliError> {
    let formula = match (b.slope, b.intercept, &b.forward, &b.inverse, &b.derivative) {
        (Some(slope), Some(intercept), None, None, None) => {
            BranchFormula::Affine { slope, intercept }
        }
        (None, None, Some(f), Some(h), Some(d)) => {
            BranchFormula::expr(f, h, d).map_err(|e| system_error(format!("branch {i}: {e}")))?
        }
        _ => {
            return Err(system_error(format!(
                "branch {i}: give either slope and intercept or forward, inverse and derivative"
            )))
        }
    };
    Branch::new(b.lo, b.hi, formula).map_err(|e| system_error(format!("branch {i}: {e}")))
}

impl System {
    pub fn build(config: &SystemConfig) -> Result<Self, CliError> {
        let invalid = |e: corrlab::dynamics::DynamicsError| system_error(e.to_string());
        Ok(match config {
            SystemConfig::Doubling { power } => {
                System::Doubling(DoublingMap::new(*power).map_err(invalid)?)
            }
            SystemConfig::Tent { power } => System::Tent(TentMap::new(*power).map_err(invalid)?),
            SystemConfig::CatMap => System::Toral(ToralAutomorphism::cat_map()),
            SystemConfig::Toral { matrix } => {
                System::Toral(ToralAutomorphism::new(*matrix).map_err(invalid)?)
            }
            SystemConfig::Piecewise {
                name,
                branches,
                power,
                sampler_bins,
            } => {
                let branches = branches
                    .iter()
                    .enumerate()
                    .map(|(i, b)| branch(i, b))
                    .collect::<Result<Vec<_>, _>>()?;
                let mut map =
                    PiecewiseExpandingMap::new(name.clone(), branches, *power).map_err(invalid)?;
                if let Some(bins) = sampler_bins {
                    map = map.with_sampler_bins(*bins);
                }
                System::Piecewise(map)
            }
            SystemConfig::Billiard { scatterers, cap } => {
                let scatterers = scatterers
                    .iter()
                    .map(|s| Scatterer {
                        center: s.center,
                        radius: s.radius,
                    })
                    .collect();
                let geom = BilliardGeometry::new(scatterers, *cap).map_err(invalid)?;
                // The corridor probe is cheap; downstream reports inherit the flag.
                let geom = if find_corridor(&geom).is_some() {
                    geom.with_horizon(HorizonStatus::SuspectedInfinite)
                } else {
                    geom
                };
                System::Billiard(Arc::new(geom))
            }
        })
    }

    /// The system as an interval map, for transfer-operator commands.
    pub fn interval_map(&self) -> Option<&dyn IntervalMap> {
        match self {
            System::Doubling(m) => Some(m),
            System::Tent(m) => Some(m),
            System::Piecewise(m) => Some(m),
            _ => None,
        }
    }
}

fn observable_error(message: impl Into<String>) -> CliError {
    CliError::Config {
        field: Some("observable.kind".into()),
        message: message.into(),
    }
}

/// Builds a coordinate observable for maps whose points have a first
/// coordinate.
pub fn coordinate_observable<P: FirstCoordinate + 'static>(
    config: &ObservableConfig,
) -> Result<Observable<P>, CliError> {
    Ok(match config.kind {
        ObservableKind::CosFirstCoordinate => Observable::cos_first_coordinate(),
        ObservableKind::Sawtooth => Observable::sawtooth(),
        ObservableKind::FirstCoordinate => Observable::first_coordinate(),
        ObservableKind::Tabulated => Observable::tabulated(config.values.clone()),
        ObservableKind::FreePath | ObservableKind::ReflectionAngle => {
            return Err(observable_error(format!(
                "{:?} is defined for billiard systems only",
                config.kind
            )))
        }
    })
}

pub fn billiard_observable(
    geom: &Arc<BilliardGeometry>,
    config: &ObservableConfig,
) -> Result<Observable<CollisionCoordinate>, CliError> {
    match config.kind {
        ObservableKind::FreePath => Ok(free_path(geom.clone())),
        ObservableKind::ReflectionAngle => Ok(reflection_angle()),
        other => Err(observable_error(format!(
            "{other:?} needs a first coordinate; billiards support free-path and reflection-angle"
        ))),
    }
}

/// Numeric columns of a phase-space point, for orbit CSVs.
pub trait PointColumns {
    fn columns() -> &'static [&'static str];
    fn values(&self) -> Vec<f64>;
}

impl PointColumns for BinaryExpansion {
    fn columns() -> &'static [&'static str] {
        &["x"]
    }
    fn values(&self) -> Vec<f64> {
        vec![self.value()]
    }
}

impl PointColumns for UnitIntervalPoint {
    fn columns() -> &'static [&'static str] {
        &["x"]
    }
    fn values(&self) -> Vec<f64> {
        vec![self.x()]
    }
}

impl PointColumns for TorusPoint {
    fn columns() -> &'static [&'static str] {
        &["x1", "x2"]
    }
    fn values(&self) -> Vec<f64> {
        vec![self.x1(), self.x2()]
    }
}

impl PointColumns for CollisionCoordinate {
    fn columns() -> &'static [&'static str] {
        &["scatterer", "r", "phi"]
    }
    fn values(&self) -> Vec<f64> {
        vec![self.scatterer_id as f64, self.r, self.phi]
    }
}

/// Runs `$body` with `$s` bound to the concrete system and `$f` to the
/// configured observable on its points.
#[macro_export]
macro_rules! with_system {
    ($system:expr, $obs:expr, |$s:ident, $f:ident| $body:expr) => {
        match $system {
            $crate::systems::System::Doubling(m) => {
                let $s = m;
                let $f = $crate::systems::coordinate_observable($obs)?;
                $body
            }
            $crate::systems::System::Tent(m) => {
                let $s = m;
                let $f = $crate::systems::coordinate_observable($obs)?;
                $body
            }
            $crate::systems::System::Toral(m) => {
                let $s = m;
                let $f = $crate::systems::coordinate_observable($obs)?;
                $body
            }
            $crate::systems::System::Piecewise(m) => {
                let $s = m;
                let $f = $crate::systems::coordinate_observable($obs)?;
                $body
            }
            $crate::systems::System::Billiard(g) => {
                let $f = $crate::systems::billiard_observable(g, $obs)?;
                let $s = g.as_ref();
                $body
            }
        }
    };
}
