//! Fixtures shared by the benchmark targets.

use spinbattery_core::model::{build_h0, normalize};
use spinbattery_core::{ModelParams, NormalizedHamiltonian};

/// Chain used by every benchmark: anisotropic XYZ at the centre of the
/// usual `J/h` sweep.
pub fn fixture(n_sites: usize) -> ModelParams {
    ModelParams::uniform(n_sites, 0.4, 0.75, 0.5)
}

pub fn normalized(n_sites: usize) -> NormalizedHamiltonian {
    normalize(&build_h0(&fixture(n_sites)).expect("valid chain")).expect("non-degenerate spectrum")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixture_spectrum_is_normalized() {
        let h = normalized(4);
        assert!((h.spectrum.min() + 1.0).abs() < 1e-12);
        assert!((h.spectrum.max() - 1.0).abs() < 1e-12);
    }
}
