use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use wavebranch_core::dispersion::sigma;
use wavebranch_core::stream::{bernoulli_curve, solve_stream};
use wavebranch_core::vorticity::VorticityModel;

#[test]
#[ignore]
fn c6_progress() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xd15c0);
    let mut tested = 0;
    let mut iter = 0;
    while tested < 50 {
        iter += 1;
        let coeffs: Vec<f64> = (0..3).map(|_| rng.gen_range(-0.6..0.6)).collect();
        eprintln!("iter {iter}: coeffs {coeffs:?}");
        let Ok(model) = VorticityModel::new(&coeffs) else { continue };
        let t0 = std::time::Instant::now();
        let Ok(curve) = bernoulli_curve(&model) else {
            eprintln!("   curve failed");
            continue;
        };
        eprintln!("   curve {:.3}s s_c={:.4}", t0.elapsed().as_secs_f64(), curve.s_c);
        let span = rng.gen_range(0.05..3.0);
        let ss = model.s0() + 0.05 + span;
        let t1 = std::time::Instant::now();
        let Ok(stream) = solve_stream(&model, ss, 256) else {
            eprintln!("   stream failed");
            continue;
        };
        eprintln!("   stream {:.3}s F={:.4}", t1.elapsed().as_secs_f64(), stream.froude());
        if (stream.froude() - 1.0).abs() < 1e-3 {
            continue;
        }
        let t2 = std::time::Instant::now();
        let Ok(s0val) = sigma(&stream, 0.0) else {
            eprintln!("   sigma failed");
            continue;
        };
        eprintln!("   sigma {:.3}s -> {:.4}", t2.elapsed().as_secs_f64(), s0val);
        assert_eq!((s0val < 0.0), (stream.froude() < 1.0));
        tested += 1;
    }
}
