use mfxwt_core::*;

fn main() {
    let x = gen_binomial(&BinomialSpec { p_z: 0.3, iterations: 16 }).unwrap();
    let y = gen_binomial(&BinomialSpec { p_z: 0.4, iterations: 16 }).unwrap();
    let cfg = WidthConfig {
        scale_grid: ScaleGrid::log_spaced(4.0, 384.0, 30).unwrap(),
        scaling_range: (4.0, 384.0),
        q_values: (4..=40).map(|i| i as f64 * 0.25).collect(),
        ..WidthConfig::default_for(x.len()).unwrap()
    };
    let worig = pair_width(&x, &y, &cfg).unwrap();
    println!("orig {worig:.4}");
    for kind in [SurrogateKind::ShuffleY, SurrogateKind::XLeads, SurrogateKind::YLeads] {
        let r = surrogate_ensemble(&x, &y, kind, 50, 31415, &cfg).unwrap();
        println!("{} {:.4}+-{:.4}", kind.label(), r.mean, r.std_error);
    }
}
