use mfxwt_core::*;

fn main() {
    let k = 16u32;
    let x = gen_binomial(&BinomialSpec { p_z: 0.3, iterations: k }).unwrap();
    let y = gen_binomial(&BinomialSpec { p_z: 0.4, iterations: k }).unwrap();
    let qs: Vec<f64> = (4..=40).map(|i| i as f64 * 0.25).collect();
    for smax in [256.0, 320.0, 384.0] {
        let cfg = WidthConfig {
            scale_grid: ScaleGrid::log_spaced(4.0, smax, 30).unwrap(),
            scaling_range: (4.0, smax),
            q_values: qs.clone(),
            ..WidthConfig::default_for(x.len()).unwrap()
        };
        let worig = pair_width(&x, &y, &cfg).unwrap();
        print!("smax={smax}: orig {worig:.4}");
        for kind in [SurrogateKind::ShuffleX, SurrogateKind::CoShuffle, SurrogateKind::IndependentShuffles] {
            let r = surrogate_ensemble(&x, &y, kind, 50, 77, &cfg).unwrap();
            print!(" | {} {:.4}+-{:.4}", kind.label(), r.mean, r.std_error);
        }
        println!();
    }
}
