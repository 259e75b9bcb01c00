use crate::error::{Error, Result};
use crate::raster::Connectivity;

/// Dataset-specific post-processing parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct PipelineParams {
    /// Marker probability threshold.
    pub t_m: f32,
    /// Minimal marker dynamics on the 0–255 scale.
    pub h: u8,
    /// Marker size ratio; the opening diameter is `k * d_inf`.
    pub k: f64,
    /// Smallest maximal inscribed cell diameter in the training set, pixels.
    pub d_inf: f64,
    /// Foreground threshold on the 0–255 scale.
    pub t_c: u8,
    pub connectivity: Connectivity,
    pub remove_border: bool,
}

impl Default for PipelineParams {
    fn default() -> Self {
        PipelineParams {
            t_m: 0.6,
            h: 5,
            k: 0.8,
            d_inf: 20.0,
            t_c: 128,
            connectivity: Connectivity::Eight,
            remove_border: false,
        }
    }
}

impl PipelineParams {
    /// DIC-C2DH-HeLa: k 0.8, t_c 216, h 5, d_inf 60.
    pub fn dic_hela() -> Self {
        PipelineParams {
            h: 5,
            k: 0.8,
            d_inf: 60.0,
            t_c: 216,
            ..Self::default()
        }
    }

    /// Fluo-N2DH-SIM+: k 0.8, t_c 229, h 30, d_inf 20.
    pub fn fluo_sim() -> Self {
        PipelineParams {
            h: 30,
            k: 0.8,
            d_inf: 20.0,
            t_c: 229,
            ..Self::default()
        }
    }

    /// PhC-C2DL-PSC: weak markers, t_c 156, h 3, d_inf 6. Weak markers carry no
    /// erosion ratio, so the opening uses half the minimal cell diameter.
    pub fn phc_psc() -> Self {
        PipelineParams {
            h: 3,
            k: 0.5,
            d_inf: 6.0,
            t_c: 156,
            ..Self::default()
        }
    }

    /// Diameter of the opening applied to the marker prediction.
    pub fn marker_diameter(&self) -> f64 {
        self.k * self.d_inf
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_m > 0.0 && self.t_m < 1.0) {
            return Err(Error::param("t_m", format!("{} is outside (0, 1)", self.t_m)));
        }
        if self.h == 0 {
            return Err(Error::param("h", "must be at least 1"));
        }
        if !(0.0..=1.0).contains(&self.k) {
            return Err(Error::param("k", format!("{} is outside [0, 1]", self.k)));
        }
        if !(self.d_inf > 0.0 && self.d_inf.is_finite()) {
            return Err(Error::param("d_inf", format!("{} must be positive", self.d_inf)));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_carry_table_values() {
        let dic = PipelineParams::dic_hela();
        assert_eq!((dic.t_c, dic.h, dic.d_inf, dic.k), (216, 5, 60.0, 0.8));
        let sim = PipelineParams::fluo_sim();
        assert_eq!((sim.t_c, sim.h, sim.d_inf, sim.k), (229, 30, 20.0, 0.8));
        let psc = PipelineParams::phc_psc();
        assert_eq!((psc.t_c, psc.h, psc.d_inf), (156, 3, 6.0));
        for p in [dic, sim, psc] {
            assert_eq!(p.t_m, 0.6);
            p.validate().unwrap();
        }
    }

    #[test]
    fn validation() {
        let bad = PipelineParams { t_m: 1.0, ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = PipelineParams { h: 0, ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = PipelineParams { d_inf: 0.0, ..Default::default() };
        assert!(bad.validate().is_err());
    }
}
