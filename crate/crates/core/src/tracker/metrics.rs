use ndarray::{Array1, ArrayView1};

use crate::error::{Error, Result};

pub const TRADING_DAYS: f64 = 252.0;

/// `r_t = (p_t − p_{t−1}) / p_{t−1}`, one shorter than the input.
pub fn simple_returns(prices: ArrayView1<f64>) -> Result<Array1<f64>> {
    if prices.len() < 2 {
        return Err(Error::TooShort {
            needed: 2,
            got: prices.len(),
        });
    }
    if let Some(i) = prices.iter().position(|p| !(*p > 0.0) || !p.is_finite()) {
        return Err(Error::NonPositivePrice {
            asset: "series".into(),
            date: format!("position {i}"),
        });
    }
    Ok(Array1::from_iter(
        prices.windows(2).into_iter().map(|w| (w[1] - w[0]) / w[0]),
    ))
}

/// `√252 · sd(r − r̂)`, sample standard deviation with `T − 1` in the denominator.
pub fn annual_tracking_error(realized: ArrayView1<f64>, predicted: ArrayView1<f64>) -> Result<f64> {
    if realized.len() != predicted.len() {
        return Err(Error::DimensionMismatch(format!(
            "realized has {} returns, predicted {}",
            realized.len(),
            predicted.len()
        )));
    }
    let t = realized.len();
    if t < 2 {
        return Err(Error::TooShort { needed: 2, got: t });
    }
    let e = &realized - &predicted;
    let mean = e.sum() / t as f64;
    let var = e.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (t - 1) as f64;
    Ok(TRADING_DAYS.sqrt() * var.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn returns_by_hand() {
        assert_eq!(
            simple_returns(array![100.0, 110.0].view()).unwrap(),
            array![0.1]
        );
        let r = simple_returns(array![100.0, 110.0, 99.0].view()).unwrap();
        assert!((r[0] - 0.1).abs() < 1e-15 && (r[1] + 0.1).abs() < 1e-15);
        assert!(simple_returns(array![5.0, 5.0, 5.0].view())
            .unwrap()
            .iter()
            .all(|v| *v == 0.0));
        assert!(matches!(
            simple_returns(array![5.0].view()),
            Err(Error::TooShort { .. })
        ));
    }

    #[test]
    fn tracking_error_is_centered() {
        let r = array![0.01, 0.02, -0.03];
        assert_eq!(annual_tracking_error(r.view(), r.view()).unwrap(), 0.0);
        let shifted = r.mapv(|v| v - 0.005);
        assert!(annual_tracking_error(r.view(), shifted.view()).unwrap() < 1e-15);
    }
}
