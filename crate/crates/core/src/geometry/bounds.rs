use super::Point3;
use crate::error::{invalid, Result};

/// Axis-aligned minimum bounding hyper-rectangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mbhr {
    pub min: Point3,
    pub max: Point3,
}

impl Mbhr {
    pub fn contains(&self, p: Point3) -> bool {
        (0..3).all(|a| self.min.component(a) <= p.component(a) && p.component(a) <= self.max.component(a))
    }

    pub fn corners(&self) -> [Point3; 8] {
        let (lo, hi) = (self.min, self.max);
        std::array::from_fn(|i| {
            Point3::new(
                if i & 1 == 0 { lo.x } else { hi.x },
                if i & 2 == 0 { lo.y } else { hi.y },
                if i & 4 == 0 { lo.z } else { hi.z },
            )
        })
    }
}

pub fn mbhr(points: &[Point3]) -> Result<Mbhr> {
    let Some(&first) = points.first() else {
        return invalid("bounding box of an empty point set");
    };
    let (min, max) = points[1..]
        .iter()
        .fold((first, first), |(lo, hi), &p| (lo.min(p), hi.max(p)));
    Ok(Mbhr { min, max })
}
