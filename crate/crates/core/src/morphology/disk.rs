use crate::error::{Error, Result};

/// Disk-shaped structuring element.
///
/// The rasterized disk holds every integer offset whose distance from the origin
/// is at most `diameter / 2`. Diameters below 2 yield the origin alone.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiskSE {
    diameter: f64,
}

impl DiskSE {
    pub fn new(diameter: f64) -> Result<Self> {
        if !diameter.is_finite() || diameter < 0.0 {
            return Err(Error::param("diameter", format!("{diameter} is not a finite non-negative number")));
        }
        Ok(DiskSE { diameter })
    }

    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    #[inline]
    fn contains(&self, dx: isize, dy: isize) -> bool {
        // (2dx)^2 + (2dy)^2 <= d^2, exact for integer offsets
        ((4 * (dx * dx + dy * dy)) as f64) <= self.diameter * self.diameter
    }

    /// Largest vertical (and horizontal) extent of the disk.
    pub fn radius(&self) -> usize {
        let mut r = 0;
        while self.contains(r as isize + 1, 0) {
            r += 1;
        }
        r
    }

    /// Half-width of the disk's row at vertical offset `dy`, for `dy` in `-R..=R`.
    pub fn row_half_widths(&self) -> Vec<(isize, usize)> {
        let r = self.radius() as isize;
        (-r..=r)
            .map(|dy| {
                let mut hw = 0;
                while self.contains(hw as isize + 1, dy) {
                    hw += 1;
                }
                (dy, hw)
            })
            .collect()
    }

    /// Every offset `(dx, dy)` in the disk.
    pub fn offsets(&self) -> Vec<(isize, isize)> {
        self.row_half_widths()
            .into_iter()
            .flat_map(|(dy, hw)| (-(hw as isize)..=hw as isize).map(move |dx| (dx, dy)))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_diameter_is_origin() {
        assert_eq!(DiskSE::new(1.0).unwrap().offsets(), vec![(0, 0)]);
        assert_eq!(DiskSE::new(0.0).unwrap().offsets(), vec![(0, 0)]);
    }

    #[test]
    fn small_disks() {
        // radius 1: the 4-neighborhood cross
        assert_eq!(DiskSE::new(2.0).unwrap().offsets().len(), 5);
        // radius 1.5: the full 3x3 square
        assert_eq!(DiskSE::new(3.0).unwrap().offsets().len(), 9);
        // radius 2: 3x3 plus the four axis points at distance 2
        assert_eq!(DiskSE::new(4.0).unwrap().offsets().len(), 13);
    }

    #[test]
    fn symmetric_under_reflection() {
        for d in [1.0, 2.5, 4.0, 7.3, 11.0, 48.0] {
            let se = DiskSE::new(d).unwrap();
            let offs = se.offsets();
            for &(dx, dy) in &offs {
                assert!(offs.contains(&(-dx, -dy)));
                assert!(offs.contains(&(dy, dx)));
            }
        }
    }

    #[test]
    fn negative_rejected() {
        assert!(DiskSE::new(-1.0).is_err());
        assert!(DiskSE::new(f64::NAN).is_err());
    }
}
