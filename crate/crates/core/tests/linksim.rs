use twdp::linksim::*;
use twdp::FadingParams;

/// Gaussian tail probability by the continued fraction of erfc for large
/// arguments and the Taylor series of erf for small ones.
fn q_function(x: f64) -> f64 {
    let z = x / std::f64::consts::SQRT_2;
    if z < 3.0 {
        let mut term = z;
        let mut sum = z;
        for n in 1..200 {
            term *= -z * z / n as f64;
            let add = term / (2 * n + 1) as f64;
            sum += add;
            if add.abs() < 1e-18 {
                break;
            }
        }
        0.5 * (1.0 - 2.0 / std::f64::consts::PI.sqrt() * sum)
    } else {
        let mut f = 0.0;
        for n in (1..200).rev() {
            f = (n as f64 / 2.0) / (z + f);
        }
        0.5 * (-z * z).exp() / (std::f64::consts::PI.sqrt() * (z + f))
    }
}

fn rayleigh_ber(snr: f64) -> f64 {
    0.5 * (1.0 - (snr / (2.0 + snr)).sqrt())
}

/// Standard error of a BER estimate from `n` symbols when bits are
/// independent with probability `p`.
fn binomial_se(p: f64, n: usize) -> f64 {
    (p * (1.0 - p) / (2 * n) as f64).sqrt()
}

#[test]
fn q_function_values() {
    assert!((q_function(0.0) - 0.5).abs() < 1e-15);
    assert!((q_function(1.0) - 0.158_655_253_931_457).abs() < 1e-12);
    assert!((q_function(10f64.sqrt()) - 7.827_011_290_012_7e-4).abs() < 1e-15);
    assert!((q_function(5.0) - 2.866_515_718_791_9e-7).abs() < 1e-18);
}

const SNR_DB: [f64; 4] = [0.0, 10.0, 20.0, 30.0];
const N: usize = 200_000;

#[test]
fn rayleigh_matches_closed_form() {
    let c = simulate_ber(&FadingParams::rayleigh(1.0).unwrap(), &SNR_DB, N, 1).unwrap();
    for i in 0..SNR_DB.len() {
        let want = rayleigh_ber(10f64.powf(SNR_DB[i] / 10.0));
        assert!((c.ber[i] - want).abs() <= 3.0 * c.std_err[i], "{} dB: {} vs {want}", SNR_DB[i], c.ber[i]);
    }
}

#[test]
fn strong_line_of_sight_matches_awgn() {
    let c = simulate_ber(&FadingParams::rice(1e6, 1.0).unwrap(), &SNR_DB, N, 2).unwrap();
    for i in 0..SNR_DB.len() {
        let want = q_function(10f64.powf(SNR_DB[i] / 20.0));
        let se = c.std_err[i].max(binomial_se(want, N));
        assert!((c.ber[i] - want).abs() <= 3.0 * se, "{} dB: {} vs {want}", SNR_DB[i], c.ber[i]);
    }
}

#[test]
fn ber_falls_with_snr() {
    let snr: Vec<f64> = (0..=8).map(|i| i as f64 * 4.0).collect();
    let c = simulate_ber(&FadingParams::new(5.0, 0.7, 1.0).unwrap(), &snr, 50_000, 3).unwrap();
    for i in 1..snr.len() {
        let slack = 3.0 * (c.std_err[i - 1].powi(2) + c.std_err[i].powi(2)).sqrt();
        assert!(c.ber[i] <= c.ber[i - 1] + slack);
    }
    assert!(c.ber.iter().all(|b| (0.0..=1.0).contains(b)));
    assert_eq!(c.ber.len(), snr.len());
}

#[test]
fn two_equal_waves_are_worse_than_rayleigh_at_high_snr() {
    let twdp = simulate_ber(&FadingParams::new(10.0, 1.0, 1.0).unwrap(), &[30.0], N, 4).unwrap();
    let rayleigh = simulate_ber(&FadingParams::rayleigh(1.0).unwrap(), &[30.0], N, 5).unwrap();
    assert!(twdp.ber[0] > rayleigh.ber[0]);
    assert!(twdp.ber[0] > rayleigh_ber(1000.0));
}

#[test]
fn capacity_loss_is_increasing() {
    let mut last = -1.0;
    for i in 0..=1000 {
        let v = capacity_loss(i as f64 / 1000.0).unwrap();
        assert!(v > last && v <= 1.0);
        last = v;
    }
    assert_eq!(capacity_loss(0.0).unwrap(), 0.0);
    assert_eq!(capacity_loss(1.0).unwrap(), 1.0);
}
