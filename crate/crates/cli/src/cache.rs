//! Per-wavelength sweep results kept under `PHOTON_FABRIC_CACHE`, keyed by the
//! design, the geometry and the wavelength bits.

use std::path::PathBuf;

use photon_fabric::devices::DeviceGeometry;
use photon_fabric::topopt::DensityField;
use sha2::{Digest, Sha256};

pub const ENV_VAR: &str = "PHOTON_FABRIC_CACHE";

pub struct SweepCache {
    dir: PathBuf,
    design: Sha256,
}

impl SweepCache {
    /// `None` when the variable is unset or empty.
    pub fn from_env(rho: &DensityField, geom: &DeviceGeometry) -> Option<Self> {
        let dir = PathBuf::from(std::env::var_os(ENV_VAR).filter(|v| !v.is_empty())?);
        std::fs::create_dir_all(&dir).ok()?;
        let mut design = Sha256::new();
        design.update(serde_json::to_vec(geom).expect("geometry serializes"));
        design.update((rho.px() as u64).to_le_bytes());
        design.update((rho.py() as u64).to_le_bytes());
        for v in rho.values() {
            design.update(v.to_le_bytes());
        }
        Some(Self { dir, design })
    }

    fn path(&self, wavelength: f64) -> PathBuf {
        let mut h = self.design.clone();
        h.update(wavelength.to_bits().to_le_bytes());
        self.dir.join(format!("{:x}.json", h.finalize()))
    }

    /// Cached `(through, drop)` powers at `wavelength`.
    pub fn get(&self, wavelength: f64) -> Option<(f64, f64)> {
        let text = std::fs::read_to_string(self.path(wavelength)).ok()?;
        let (through, drop): (u64, u64) = serde_json::from_str(&text).ok()?;
        Some((f64::from_bits(through), f64::from_bits(drop)))
    }

    /// Best effort; a failed write only costs a later recompute. Values are
    /// stored as raw bits so a hit reproduces the computed powers exactly.
    pub fn put(&self, wavelength: f64, powers: (f64, f64)) {
        let path = self.path(wavelength);
        let tmp = path.with_extension("tmp");
        let bits = (powers.0.to_bits(), powers.1.to_bits());
        if std::fs::write(&tmp, serde_json::to_vec(&bits).expect("pair serializes")).is_ok() {
            let _ = std::fs::rename(tmp, path);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn keys_depend_on_design_and_wavelength() {
        let geom = DeviceGeometry::desk();
        let a = DensityField::uniform(4, 4, 40e-9, 0.5);
        let b = DensityField::uniform(4, 4, 40e-9, 0.6);
        let dir = tempfile::tempdir().unwrap();
        std::env::set_var(ENV_VAR, dir.path());
        let ca = SweepCache::from_env(&a, &geom).unwrap();
        let cb = SweepCache::from_env(&b, &geom).unwrap();
        assert_ne!(ca.path(1.55e-6), cb.path(1.55e-6));
        assert_ne!(ca.path(1.55e-6), ca.path(1.551e-6));
        assert_eq!(ca.get(1.55e-6), None);
        let awkward = (0.09374600727989113, 0.1 + 0.2);
        ca.put(1.55e-6, awkward);
        assert_eq!(ca.get(1.55e-6), Some(awkward));
        assert_eq!(cb.get(1.55e-6), None);
    }
}
