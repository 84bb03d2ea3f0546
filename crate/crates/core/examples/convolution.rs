//! Fold-accumulating 2D convolution on two delay-impulse kernels: the
//! output holds a single tap at the summed delay with the summed phase.

use ambit_channel::ambit_sim::conv2d_fold_accumulate;
use ndarray::Array2;
use num_complex::Complex64;

fn main() -> anyhow::Result<()> {
    let mut x = Array2::zeros((3, 6));
    x[(1, 2)] = Complex64::from_polar(1.0, 0.4);
    let mut y = Array2::zeros((4, 6));
    y[(2, 3)] = Complex64::from_polar(0.5, -1.0);

    let mut z = Array2::zeros((4 + 3 - 1, 6 + 6 - 1));
    conv2d_fold_accumulate(&x, &y, &mut z)?;
    for ((row, bin), v) in z.indexed_iter() {
        if v.norm() > 1e-12 {
            println!("row {row}, delay bin {bin}: |z| = {:.3}, arg = {:.3} rad", v.norm(), v.arg());
        }
    }
    Ok(())
}
