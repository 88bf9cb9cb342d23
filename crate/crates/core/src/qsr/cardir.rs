use super::QsrParams;
use crate::error::{invalid, Result};
use crate::geometry::{mbhr, Point2, Point3};

/// Which edge of each 45° compass sector belongs to it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SectorEdge {
    /// Sectors are `(c − 22.5°, c + 22.5°]`.
    #[default]
    Counterclockwise,
    /// Sectors are `[c − 22.5°, c + 22.5°)`.
    Clockwise,
}

impl SectorEdge {
    pub fn as_str(self) -> &'static str {
        match self {
            SectorEdge::Counterclockwise => "counterclockwise",
            SectorEdge::Clockwise => "clockwise",
        }
    }

    pub fn parse(s: &str) -> Result<SectorEdge> {
        match s {
            "counterclockwise" | "ccw" => Ok(SectorEdge::Counterclockwise),
            "clockwise" | "cw" => Ok(SectorEdge::Clockwise),
            other => invalid(format!("unknown sector edge convention `{other}`")),
        }
    }
}

/// 2D compass relation, +y is North and +x is East.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CardinalDir2D {
    N,
    NE,
    E,
    SE,
    S,
    SW,
    W,
    NW,
    Eq,
}

impl CardinalDir2D {
    pub const ALL: [CardinalDir2D; 9] = [
        CardinalDir2D::N,
        CardinalDir2D::NE,
        CardinalDir2D::E,
        CardinalDir2D::SE,
        CardinalDir2D::S,
        CardinalDir2D::SW,
        CardinalDir2D::W,
        CardinalDir2D::NW,
        CardinalDir2D::Eq,
    ];

    /// Sectors in counterclockwise order starting at East.
    const CCW_FROM_EAST: [CardinalDir2D; 8] = [
        CardinalDir2D::E,
        CardinalDir2D::NE,
        CardinalDir2D::N,
        CardinalDir2D::NW,
        CardinalDir2D::W,
        CardinalDir2D::SW,
        CardinalDir2D::S,
        CardinalDir2D::SE,
    ];

    pub fn index(self) -> usize {
        Self::ALL.iter().position(|&d| d == self).unwrap()
    }

    pub fn symbol(self) -> &'static str {
        match self {
            CardinalDir2D::N => "N",
            CardinalDir2D::NE => "NE",
            CardinalDir2D::E => "E",
            CardinalDir2D::SE => "SE",
            CardinalDir2D::S => "S",
            CardinalDir2D::SW => "SW",
            CardinalDir2D::W => "W",
            CardinalDir2D::NW => "NW",
            CardinalDir2D::Eq => "EQ",
        }
    }

    /// The direction rotated by 180°; `Eq` maps to itself.
    pub fn opposite(self) -> CardinalDir2D {
        match self {
            CardinalDir2D::Eq => CardinalDir2D::Eq,
            d => {
                let k = Self::CCW_FROM_EAST.iter().position(|&s| s == d).unwrap();
                Self::CCW_FROM_EAST[(k + 4) % 8]
            }
        }
    }
}

/// Compass direction of `target` seen from `reference`. Each sector is the
/// 45° arc centred on its bearing; `params.sector_edge` decides which
/// boundary it owns.
pub fn cardir2d(reference: Point2, target: Point2, params: &QsrParams) -> CardinalDir2D {
    let d = target - reference;
    if d.norm() < params.eps_pos {
        return CardinalDir2D::Eq;
    }
    sector_of_bearing(d.y.atan2(d.x).to_degrees(), params.sector_edge)
}

/// Sector of a bearing in degrees, counterclockwise from East.
fn sector_of_bearing(deg: f64, edge: SectorEdge) -> CardinalDir2D {
    let k = match edge {
        SectorEdge::Counterclockwise => ((deg - 22.5) / 45.0).ceil(),
        SectorEdge::Clockwise => ((deg + 22.5) / 45.0).floor(),
    } as i64;
    CardinalDir2D::CCW_FROM_EAST[k.rem_euclid(8) as usize]
}

/// Position of a coordinate relative to one axis interval of the box.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AxisSide {
    Below,
    Inside,
    Above,
}

impl AxisSide {
    fn of(v: f64, lo: f64, hi: f64) -> AxisSide {
        if v < lo {
            AxisSide::Below
        } else if v > hi {
            AxisSide::Above
        } else {
            AxisSide::Inside
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

/// One of the 27 voxels around a reference box. `ns` follows +y (N above,
/// S below), `ew` follows +x (E/W) and `ab` follows +z (A/B).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CardinalDir3D {
    pub ns: AxisSide,
    pub ew: AxisSide,
    pub ab: AxisSide,
}

impl CardinalDir3D {
    pub const COUNT: usize = 27;

    pub fn index(self) -> usize {
        self.ns.index() * 9 + self.ew.index() * 3 + self.ab.index()
    }

    pub fn is_interior(self) -> bool {
        self.ns == AxisSide::Inside && self.ew == AxisSide::Inside && self.ab == AxisSide::Inside
    }

    pub fn from_index(i: usize) -> CardinalDir3D {
        let side = |k: usize| [AxisSide::Below, AxisSide::Inside, AxisSide::Above][k];
        CardinalDir3D {
            ns: side(i / 9 % 3),
            ew: side(i / 3 % 3),
            ab: side(i % 3),
        }
    }

    pub fn symbol(self) -> String {
        let pick = |s: AxisSide, lo: &'static str, hi: &'static str| match s {
            AxisSide::Below => lo,
            AxisSide::Inside => "-",
            AxisSide::Above => hi,
        };
        format!(
            "{}{}{}",
            pick(self.ns, "S", "N"),
            pick(self.ew, "W", "E"),
            pick(self.ab, "B", "A")
        )
    }
}

/// Voxel of the target's centroid in the 3×3×3 grid around the reference
/// points' bounding box.
pub fn cardir3d(reference: &[Point3], target: &[Point3]) -> Result<CardinalDir3D> {
    let Some(c) = Point3::centroid(target) else {
        return invalid("cardinal direction needs a non-empty target");
    };
    let b = mbhr(reference)?;
    Ok(CardinalDir3D {
        ns: AxisSide::of(c.y, b.min.y, b.max.y),
        ew: AxisSide::of(c.x, b.min.x, b.max.x),
        ab: AxisSide::of(c.z, b.min.z, b.max.z),
    })
}
