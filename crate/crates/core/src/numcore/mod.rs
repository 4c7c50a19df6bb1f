//! Dense matrices, a reverse-mode tape and a finite-difference checker.

mod gradcheck;
mod tape;
mod tensor;

pub use gradcheck::{
    compare_gradients, grad_check, relative_error, GradCheckReport, TensorCheck, REL_FLOOR,
};
pub use tape::{softmax, Axis, Tape, Var};
pub use tensor::Tensor2;

#[cfg(test)]
mod property_tests {
    use super::*;
    use crate::rng::seeded;
    use proptest::prelude::*;
    use rand::Rng;

    fn random(rows: usize, cols: usize, seed: u64) -> Tensor2 {
        let mut rng = seeded(seed);
        let data = (0..rows * cols).map(|_| rng.gen_range(-1.5..1.5)).collect();
        Tensor2::new(rows, cols, data).unwrap()
    }

    fn named(ts: Vec<Tensor2>) -> Vec<(String, Tensor2)> {
        ts.into_iter()
            .enumerate()
            .map(|(i, t)| (format!("p{i}"), t))
            .collect()
    }

    // A fixed readout keeps every checked op's output mixed into a scalar
    // with distinct weights per entry.
    fn readout(t: &mut Tape, y: Var, seed: u64) -> Result<Var, crate::Error> {
        let (r, c) = t.shape(y);
        let w = t.constant(random(r, c, seed ^ 0xabc));
        let m = t.mul(y, w)?;
        t.sum_reduce(m)
    }

    #[test]
    fn softmax_simplex_on_random_inputs() {
        let mut rng = seeded(11);
        for _ in 0..1000 {
            let n = rng.gen_range(1..8);
            let data: Vec<f64> = (0..n).map(|_| rng.gen_range(-50.0..50.0)).collect();
            let s = softmax(&Tensor2::column(&data), Axis::Rows);
            assert!(s.data().iter().all(|&p| p >= 0.0));
            assert!((s.sum() - 1.0).abs() <= 1e-12);
        }
    }

    type OpFn = Box<dyn Fn(&mut Tape, &[Var]) -> Result<Var, crate::Error>>;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn every_op_matches_finite_differences(seed in 0u64..10_000, r in 1usize..4, c in 2usize..4) {
            let cases: Vec<(Vec<Tensor2>, OpFn)> = vec![
                (vec![random(r, c, seed), random(c, 2, seed + 1)], Box::new(|t, v| t.matmul(v[0], v[1]))),
                (vec![random(r, c, seed), random(r, c, seed + 1)], Box::new(|t, v| t.add(v[0], v[1]))),
                (vec![random(r, c, seed), random(r, 1, seed + 1)], Box::new(|t, v| t.add_column(v[0], v[1]))),
                (vec![random(r, c, seed), random(r, c, seed + 1)], Box::new(|t, v| t.mul(v[0], v[1]))),
                (vec![random(r, c, seed), random(1, c, seed + 1)], Box::new(|t, v| t.mul_row(v[0], v[1]))),
                (vec![random(r, c, seed), random(r, 1, seed + 1)], Box::new(|t, v| t.mul_column(v[0], v[1]))),
                (vec![random(r, c, seed)], Box::new(|t, v| t.scale(v[0], -1.7))),
                (vec![random(r, c, seed)], Box::new(|t, v| t.tanh(v[0]))),
                (vec![random(r, c, seed)], Box::new(|t, v| t.softmax(v[0], Axis::Rows))),
                (vec![random(r, c, seed)], Box::new(|t, v| t.softmax(v[0], Axis::Cols))),
                (vec![random(r, c, seed), random(2, c, seed + 1)], Box::new(|t, v| t.concat(&[v[0], v[1]], Axis::Rows))),
                (vec![random(r, c, seed), random(r, 1, seed + 1)], Box::new(|t, v| t.concat(&[v[0], v[1]], Axis::Cols))),
                (vec![random(r + 1, c, seed)], Box::new(|t, v| t.slice_rows(v[0], 1, 1))),
                (vec![random(r, c, seed), random(r, c, seed + 1), random(r, c, seed + 2)], Box::new(|t, v| t.mean(v))),
                (vec![random(r, c, seed)], Box::new(|t, v| t.sum_squares(v[0]))),
                (vec![random(r, c, seed)], Box::new(|t, v| t.max_pool_columns(v[0], &[vec![0, 1], vec![1], vec![]]))),
                (vec![random(r, c, seed), random(r, 1, seed + 1), random(r, 1, seed + 2)], Box::new(|t, v| {
                    Ok(t.batch_norm(v[0], v[1], v[2], 1e-5)?.0)
                })),
                (vec![random(3, c, seed)], Box::new(|t, v| {
                    let labels: Vec<usize> = (0..t.shape(v[0]).1).map(|j| j % 3).collect();
                    t.softmax_cross_entropy(v[0], &labels)
                })),
            ];
            for (i, (inputs, op)) in cases.into_iter().enumerate() {
                let params = named(inputs);
                let report = grad_check(&params, |t, v| {
                    let y = op(t, v)?;
                    readout(t, y, seed)
                }, 1e-5, 1e-4).unwrap();
                prop_assert!(report.passed(), "case {} failed: {:?}", i, report);
            }
        }

        #[test]
        fn relu_matches_away_from_kink(seed in 0u64..10_000) {
            let mut x = random(3, 3, seed);
            for v in x.data_mut() {
                if v.abs() < 1e-3 { *v = 0.5; }
            }
            let report = grad_check(&named(vec![x]), |t, v| {
                let y = t.relu(v[0])?;
                readout(t, y, seed)
            }, 1e-5, 1e-4).unwrap();
            prop_assert!(report.passed());
        }

        #[test]
        fn concat_then_split_is_lossless(seed in 0u64..10_000, ra in 1usize..4, rb in 1usize..4) {
            let mut t = Tape::new();
            let a = t.param(random(ra, 2, seed));
            let b = t.param(random(rb, 2, seed + 1));
            let c = t.concat(&[a, b], Axis::Rows).unwrap();
            let a2 = t.slice_rows(c, 0, ra).unwrap();
            let b2 = t.slice_rows(c, ra, rb).unwrap();
            prop_assert_eq!(t.value(a2), t.value(a));
            prop_assert_eq!(t.value(b2), t.value(b));
            let upstream = random(ra + rb, 2, seed + 2);
            let w = t.constant(upstream.clone());
            let m = t.mul(c, w).unwrap();
            let s = t.sum_reduce(m).unwrap();
            t.backward(s).unwrap();
            let split = t.grad(a).norm_sq() + t.grad(b).norm_sq();
            prop_assert!((split - upstream.norm_sq()).abs() < 1e-12);
        }
    }
}
