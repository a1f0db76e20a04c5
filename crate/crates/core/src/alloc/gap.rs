use statrs::distribution::{ContinuousCDF, Normal};

use crate::{Error, Result};

/// SNR gap of uncoded QAM at a target symbol error rate:
/// `Γ = (1/3)·[Q⁻¹(BER/4)]²`.
pub fn snr_gap_from_ber(ber: f64) -> Result<f64> {
    if !(ber > 0.0 && ber < 1.0) {
        return Err(Error::invalid(format!("BER must lie in (0, 1), got {ber}")));
    }
    let normal = Normal::standard();
    let q_inv = -normal.inverse_cdf(ber / 4.0);
    Ok(q_inv * q_inv / 3.0)
}
