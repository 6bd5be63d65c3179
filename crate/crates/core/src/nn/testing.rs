use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::gradcheck::numeric_gradient;
pub(crate) use super::gradcheck::max_rel_err;
use super::init::{initialize_with_rng, InitScheme};
use super::loss::mse_loss;
use super::matrix::Matrix;
use super::mlp::Mlp;

pub(crate) fn random_matrix(rows: usize, cols: usize, seed: u64) -> Matrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Matrix::random_normal(rows, cols, &mut rng)
}

pub(crate) fn random_mlp(dims: &[usize], activate_last: bool, seed: u64) -> Mlp {
    let mut m = Mlp::with_dims(dims, activate_last);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    initialize_with_rng(&mut m, InitScheme::Xavier, &mut rng, None).unwrap();
    m
}

/// Max relative error between backprop and central differences of
/// `mse(m(x), target)` over every parameter and input.
pub(crate) fn fd_check_mlp(m: &Mlp, x: &Matrix, target: &Matrix) -> f64 {
    let (out, trace) = m.forward_traced(x).unwrap();
    let (_, dout) = mse_loss(&out, target).unwrap();
    let grads = m.backward_traced(&trace, &dout).unwrap();
    let loss = |m: &Mlp, x: &Matrix| mse_loss(&m.infer(x).unwrap(), target).unwrap().0;

    let params = numeric_gradient(m, |p| p.params_mut(), |p| loss(p, x));
    let input = numeric_gradient(x, |x| vec![x.as_mut_slice()], |x| loss(m, x));
    let mut analytic: Vec<f64> = grads.flat().concat();
    analytic.extend_from_slice(grads.input.as_slice());
    let numeric: Vec<f64> = params.into_iter().chain(input).flatten().collect();
    max_rel_err(&analytic, &numeric)
}
