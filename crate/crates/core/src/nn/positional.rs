use crate::error::{Error, Result};
use crate::tensor::Matrix;

/// Sinusoidal 2-D encodings for the token grid (token `k·n_subband + j`).
///
/// Columns `0..d/2` encode the user index and `d/2..d` the subband index,
/// each with the usual ladder `sin(p/10000^(2i/h)), cos(p/10000^(2i/h))`,
/// `h = d/2`.
pub fn positional_encoding_2d(n_user: usize, n_subband: usize, d_model: usize) -> Result<Matrix> {
    if d_model == 0 || d_model % 4 != 0 {
        return Err(Error::config(format!(
            "positional encoding needs d_model divisible by 4, got {d_model}"
        )));
    }
    let half = d_model / 2;
    let mut pe = Matrix::zeros(n_user * n_subband, d_model);
    let ladder = |pos: usize, out: &mut [f64]| {
        for i in 0..half / 2 {
            let angle = pos as f64 / 10000f64.powf(2.0 * i as f64 / half as f64);
            out[2 * i] = angle.sin();
            out[2 * i + 1] = angle.cos();
        }
    };
    for k in 0..n_user {
        for j in 0..n_subband {
            let row = pe.row_mut(k * n_subband + j);
            ladder(k, &mut row[..half]);
            ladder(j, &mut row[half..]);
        }
    }
    Ok(pe)
}
