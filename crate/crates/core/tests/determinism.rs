//! Results must not depend on the number of worker threads.

use polaron_core::fock::{discretize_modes_free, fiber_ground_energy, FockBasis, FockBudget, LanczosOptions};
use polaron_core::hessian::{hessian_ball, HessianOptions};
use rayon::ThreadPoolBuilder;

#[test]
fn one_thread_and_many_threads_agree_bitwise() {
    let one = ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let many = ThreadPoolBuilder::new().num_threads(4).build().unwrap();
    let opts = HessianOptions { l_max: 3, ..HessianOptions::default() };
    let a = one.install(|| hessian_ball(1.0, opts).unwrap());
    let b = many.install(|| hessian_ball(1.0, opts).unwrap());
    assert_eq!(a.trace_correction.to_bits(), b.trace_correction.to_bits());
    assert_eq!(a.eigenvalue_rows(), b.eigenvalue_rows());

    let budget = FockBudget::default();
    let modes = discretize_modes_free(0.5, 2.0, 1.0, budget.max_modes).unwrap();
    let basis = FockBasis::new(modes.len(), 2, budget.max_dimension).unwrap();
    let run = || fiber_ground_energy(&modes, &basis, 0.5, [0.0, 0.0, 0.1], &budget, &LanczosOptions::default()).unwrap().energy;
    assert_eq!(one.install(run).to_bits(), many.install(run).to_bits());
}
