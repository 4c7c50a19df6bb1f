use rand::Rng;

use crate::error::{Error, Result};
use crate::numcore::{Tape, Tensor2, Var};

fn check_rate(rate: f64) -> Result<()> {
    if !(0.0..1.0).contains(&rate) {
        return Err(Error::Config(format!("dropout rate must be in [0, 1), got {rate}")));
    }
    Ok(())
}

/// Inverted-dropout mask: each entry is 0 with probability `rate`, otherwise
/// `1 / (1 - rate)`.
pub fn dropout_mask<R: Rng>(rows: usize, cols: usize, rate: f64, rng: &mut R) -> Result<Tensor2> {
    check_rate(rate)?;
    let keep = 1.0 / (1.0 - rate);
    let data = (0..rows * cols)
        .map(|_| if rng.gen::<f64>() < rate { 0.0 } else { keep })
        .collect();
    Tensor2::new(rows, cols, data)
}

pub fn dropout<R: Rng>(x: &Tensor2, rate: f64, training: bool, rng: &mut R) -> Result<Tensor2> {
    check_rate(rate)?;
    if !training || rate == 0.0 {
        return Ok(x.clone());
    }
    let mask = dropout_mask(x.rows(), x.cols(), rate, rng)?;
    let data = x.data().iter().zip(mask.data()).map(|(a, m)| a * m).collect();
    Tensor2::new(x.rows(), x.cols(), data)
}

/// Dropout as a tape op: multiplies by a fresh constant mask in training,
/// returns `x` itself otherwise.
pub fn dropout_on_tape<R: Rng>(
    tape: &mut Tape,
    x: Var,
    rate: f64,
    training: bool,
    rng: &mut R,
) -> Result<Var> {
    check_rate(rate)?;
    if !training || rate == 0.0 {
        return Ok(x);
    }
    let (r, c) = tape.shape(x);
    let mask = tape.constant(dropout_mask(r, c, rate, rng)?);
    tape.mul(x, mask)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    #[test]
    fn identity_cases() {
        let x = Tensor2::from_rows(&[[1.0, -2.0], [3.0, 4.0]]);
        let mut rng = seeded(1);
        assert_eq!(dropout(&x, 0.0, true, &mut rng).unwrap(), x);
        assert_eq!(dropout(&x, 0.9, false, &mut rng).unwrap(), x);
    }

    #[test]
    fn mean_is_preserved() {
        let x = Tensor2::filled(100, 100, 1.0);
        let y = dropout(&x, 0.5, true, &mut seeded(3)).unwrap();
        let mean = y.sum() / y.len() as f64;
        assert!((mean - 1.0).abs() < 0.05, "{mean}");
        assert!(y.data().iter().all(|&v| v == 0.0 || v == 2.0));
    }

    #[test]
    fn rejects_bad_rates() {
        let x = Tensor2::zeros(1, 1);
        assert!(matches!(dropout(&x, 1.0, true, &mut seeded(0)), Err(Error::Config(_))));
        assert!(matches!(dropout(&x, -0.1, false, &mut seeded(0)), Err(Error::Config(_))));
    }
}
