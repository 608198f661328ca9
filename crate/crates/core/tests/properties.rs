use num_complex::Complex64;
use proptest::prelude::*;

use nuclab::calibration::Calibration;
use nuclab::factorization::{conv_factor, verify_chain};
use nuclab::group::{
    conv_matrix, convolve, fourier, inverse_fourier, measure_fourier, FiniteAbelianGroup, GroupFunction, GroupMeasure,
};
use nuclab::io;
use nuclab::linalg::{kron, singular_values, CMatrix};
use nuclab::lorentz::{lorentz_quasinorm, outer_product, subsampled_quasinorm, LorentzParams, QuasiGeoSeq, RealSeq};
use nuclab::rng::{cell_rng, random_unitary};
use nuclab::schatten::schatten_quasinorm;

fn pq(p: f64, q: f64) -> LorentzParams {
    LorentzParams { p, q }
}

fn seq() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(prop_oneof![Just(0.0), 1e-6f64..10.0], 1..64)
}

fn params() -> impl Strategy<Value = LorentzParams> {
    prop::sample::select(vec![
        pq(1.0, 2.0),
        pq(2.0, 1.0),
        pq(0.5, 1.0),
        pq(1.0, 0.5),
        pq(2.0, 4.0),
        pq(1.0, f64::INFINITY),
    ])
}

fn complex() -> impl Strategy<Value = Complex64> {
    (-5.0f64..5.0, -5.0f64..5.0).prop_map(|(a, b)| Complex64::new(a, b))
}

fn small_group() -> impl Strategy<Value = FiniteAbelianGroup> {
    prop::collection::vec(2usize..6, 1..3).prop_map(|m| FiniteAbelianGroup::new(m).unwrap())
}

fn function_on(g: FiniteAbelianGroup) -> impl Strategy<Value = GroupFunction> {
    prop::collection::vec(complex(), g.order()).prop_map(move |v| GroupFunction::new(g.clone(), v).unwrap())
}

fn matrix(max: usize) -> impl Strategy<Value = CMatrix> {
    (1..=max, 1..=max).prop_flat_map(|(r, c)| {
        prop::collection::vec(complex(), r * c).prop_map(move |v| CMatrix::from_vec(r, c, v).unwrap())
    })
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn quasi_triangle_within_calibrated_constant(x in seq(), y in seq(), p in params()) {
        let k = Calibration::pinned().quasi_triangle_constant(p).unwrap();
        let len = x.len().max(y.len());
        let sum: Vec<f64> = (0..len).map(|i| x.get(i).unwrap_or(&0.0) + y.get(i).unwrap_or(&0.0)).collect();
        let (x, y, s) = (RealSeq::new(x).unwrap(), RealSeq::new(y).unwrap(), RealSeq::new(sum).unwrap());
        let lhs = lorentz_quasinorm(&s, p);
        let rhs = k * (lorentz_quasinorm(&x, p) + lorentz_quasinorm(&y, p));
        prop_assert!(lhs <= rhs * (1.0 + 1e-12));
    }

    #[test]
    fn diagonal_scale_is_plain_lp(x in seq(), p in 0.3f64..4.0) {
        let direct = x.iter().map(|v| v.powf(p)).sum::<f64>().powf(1.0 / p);
        let v = lorentz_quasinorm(&RealSeq::new(x).unwrap(), pq(p, p));
        prop_assert!(close(v, direct, 1e-12));
    }

    #[test]
    fn invariant_under_permutation_and_homogeneous(x in seq(), p in params(), c in 0.01f64..100.0, rot in 0usize..64) {
        let a = RealSeq::new(x.clone()).unwrap();
        let mut shuffled = x.clone();
        let n = shuffled.len();
        shuffled.rotate_left(rot % n);
        shuffled.reverse();
        let b = RealSeq::new(shuffled).unwrap();
        prop_assert_eq!(lorentz_quasinorm(&a, p), lorentz_quasinorm(&b, p));
        let scaled = RealSeq::new(x.iter().map(|v| c * v).collect()).unwrap();
        prop_assert!(close(lorentz_quasinorm(&scaled, p), c * lorentz_quasinorm(&a, p), 1e-12));
    }

    // constant one only in the regime q <= p
    #[test]
    fn monotone_in_second_index(x in seq(), p in 0.5f64..4.0, t in 0.1f64..1.0, grow in 1.0f64..4.0) {
        let q = p * t;
        let x = RealSeq::new(x).unwrap();
        let small = lorentz_quasinorm(&x, pq(p, q * grow));
        let big = lorentz_quasinorm(&x, pq(p, q));
        prop_assert!(small <= big * (1.0 + 1e-12));
    }

    #[test]
    fn subsampled_norms_are_equivalent(x in seq(), p in params()) {
        let cal = Calibration::pinned();
        let x = RealSeq::new(x).unwrap();
        let direct = lorentz_quasinorm(&x, p);
        prop_assume!(direct > 0.0);
        for (idx, c) in [
            (QuasiGeoSeq::dyadic(x.len()), cal.dyadic_constant(p).unwrap()),
            (QuasiGeoSeq::linear_dyadic(x.len()), cal.linear_dyadic_constant(p).unwrap()),
        ] {
            let r = subsampled_quasinorm(&x, p, &idx) / direct;
            prop_assert!(r <= c && r >= 1.0 / c, "ratio {} outside [1/{}, {}]", r, c, c);
        }
    }

    #[test]
    fn tensor_bounded_when_q_at_most_p(x in seq(), y in seq()) {
        let cal = Calibration::pinned();
        for p in [pq(1.0, 1.0), pq(2.0, 1.0), pq(2.0, 2.0), pq(3.0, 2.0)] {
            let (a, b) = (RealSeq::new(x.clone()).unwrap(), RealSeq::new(y.clone()).unwrap());
            let lhs = lorentz_quasinorm(&outer_product(&a, &b), p);
            let rhs = cal.tensor_constant(p).unwrap() * lorentz_quasinorm(&a, p) * lorentz_quasinorm(&b, p);
            prop_assert!(lhs <= rhs * (1.0 + 1e-12));
        }
    }

    #[test]
    fn schatten_norms_are_unitarily_invariant(m in matrix(8), seed in any::<u64>(), p in params()) {
        let mut rng = cell_rng(seed, 0);
        let u = random_unitary(&mut rng, m.rows());
        let v = random_unitary(&mut rng, m.cols());
        let w = u.matmul(&m).unwrap().matmul(&v).unwrap();
        let a = schatten_quasinorm(&m, p).unwrap();
        let b = schatten_quasinorm(&w, p).unwrap();
        prop_assert!(close(a, b, 1e-10));
    }

    #[test]
    fn kron_spectrum_is_outer_product(a in matrix(6), b in matrix(6)) {
        let got = singular_values(&kron(&a, &b).unwrap()).unwrap();
        let want = outer_product(&singular_values(&a).unwrap(), &singular_values(&b).unwrap());
        let scale = want.approx_number(1).max(1.0);
        for n in 1..=got.len() {
            prop_assert!((got.approx_number(n) - want.approx_number(n)).abs() <= 1e-10 * scale);
        }
    }

    #[test]
    fn fourier_inverts_and_diagonalizes(f in small_group().prop_flat_map(function_on)) {
        let g = f.group().clone();
        let back = inverse_fourier(&g, &fourier(&f)).unwrap();
        for (a, b) in back.values().iter().zip(f.values()) {
            prop_assert!((a - b).norm() <= 1e-12 * f.sup_norm().max(1.0));
        }
        // convolution theorem against a random measure
        let mu = GroupMeasure::new(g.clone(), f.values().iter().rev().copied().collect()).unwrap();
        let conv = convolve(&f, &mu).unwrap();
        let lhs = fourier(&conv);
        let (fh, mh) = (fourier(&f), measure_fourier(&mu));
        for k in 0..g.order() {
            prop_assert!((lhs[k] - fh[k] * mh[k]).norm() <= 1e-10 * (1.0 + fh[k].norm() * mh[k].norm()));
        }
    }

    #[test]
    fn conv_factor_exact_for_any_function(f in small_group().prop_flat_map(function_on), s in 0.2f64..=1.0) {
        prop_assume!(!f.is_zero());
        let chain = conv_factor(&f, s).unwrap();
        let rep = verify_chain(&chain, &conv_matrix(&f), chain.middle_params()).unwrap();
        let want = fourier(&f).iter().map(|z| z.norm().powf(s)).sum::<f64>().powf(1.0 / s);
        prop_assert!(rep.residual <= 1e-10 * f.sup_norm());
        prop_assert!(close(rep.product_of_norms, want, 1e-9));
    }

    #[test]
    fn sequence_csv_round_trip(x in seq()) {
        let a = RealSeq::new(x).unwrap();
        let back = io::read_sequence_csv(&io::write_sequence_csv(&a)).unwrap();
        prop_assert_eq!(back.values(), a.values());
    }

    #[test]
    fn matrix_formats_round_trip(m in matrix(7)) {
        prop_assert_eq!(&io::read_matrix_csv(&io::write_matrix_csv(&m)).unwrap(), &m);
        prop_assert_eq!(&io::read_matrix_binary(&io::write_matrix_binary(&m)).unwrap(), &m);
    }

    #[test]
    fn group_spec_round_trip(moduli in prop::collection::vec(2usize..40, 1..4)) {
        let g = FiniteAbelianGroup::new(moduli).unwrap();
        let back: FiniteAbelianGroup = g.to_string().parse().unwrap();
        prop_assert_eq!(back, g);
    }

    #[test]
    fn parsers_never_panic(text in ".{0,200}", bytes in prop::collection::vec(any::<u8>(), 0..80)) {
        let _ = text.parse::<FiniteAbelianGroup>();
        let _ = io::read_sequence_csv(&text);
        let _ = io::read_matrix_csv(&text);
        let _ = io::read_matrix_binary(&bytes);
        let _ = io::ChainManifest::parse(&text);
        let _ = nuclab::config::ConfigOverrides::parse(&text);
    }
}
