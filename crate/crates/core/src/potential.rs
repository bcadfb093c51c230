use std::str::FromStr;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::{GridFunction, RadialGrid};

/// Radial potential V: a positive constant, or the coercive `value + r²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PotentialKind {
    Constant(f64),
    Harmonic(f64),
}

impl PotentialKind {
    pub fn sample(&self, grid: &Arc<RadialGrid>) -> Result<GridFunction> {
        let v = match *self {
            PotentialKind::Constant(c) => GridFunction::constant(grid, c),
            PotentialKind::Harmonic(c) => GridFunction::from_fn(grid, |r| c + r * r),
        };
        crate::grid::check_potential(&v)?;
        Ok(v)
    }

    pub fn value(&self) -> f64 {
        match *self {
            PotentialKind::Constant(c) | PotentialKind::Harmonic(c) => c,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            PotentialKind::Constant(_) => "constant",
            PotentialKind::Harmonic(_) => "harmonic",
        }
    }

    pub fn from_parts(kind: &str, value: f64) -> Result<Self> {
        let k = match kind.parse::<KindTag>()? {
            KindTag::Constant => PotentialKind::Constant(value),
            KindTag::Harmonic => PotentialKind::Harmonic(value),
        };
        if !(value > 0.0) {
            return Err(Error::InvalidParameter {
                name: "potential.value".into(),
                reason: format!("the potential must be positive, got {value}"),
            });
        }
        Ok(k)
    }
}

enum KindTag {
    Constant,
    Harmonic,
}

impl FromStr for KindTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "constant" => Ok(KindTag::Constant),
            "harmonic" => Ok(KindTag::Harmonic),
            other => Err(Error::InvalidParameter {
                name: "potential.kind".into(),
                reason: format!("expected constant or harmonic, got `{other}`"),
            }),
        }
    }
}
