use mfxwt_core::*;
use std::time::Instant;

fn main() {
    let t0 = Instant::now();
    let k = 16u32;
    let x = gen_binomial(&BinomialSpec { p_z: 0.3, iterations: k }).unwrap();
    let y = gen_binomial(&BinomialSpec { p_z: 0.4, iterations: k }).unwrap();
    let n = x.len();
    let th = BinomialTheory::new(0.3, 0.4).unwrap();

    // --- criterion 1: T vs theory on [0,6]^2 step 0.5, default grid/range
    let sgrid = ScaleGrid::default_for(n).unwrap();
    let kern = KernelSpec::mexican_hat();
    let wx = cwt(&x, &sgrid, &kern).unwrap();
    let wy = cwt(&y, &sgrid, &kern).unwrap();
    let ogrid = OrderGrid::square(6.0, 0.5).unwrap();
    let table = joint_partition(&wx, &wy, &ogrid).unwrap();
    let surf = fit_mass_exponents(&table, sgrid.min(), sgrid.max()).unwrap();
    let mut worst = 0.0f64;
    for (ip, &p) in ogrid.p_values().iter().enumerate() {
        for (iq, &q) in ogrid.q_values().iter().enumerate() {
            let e = (surf.t(ip, iq) - th.wavelet_quantities(p, q).t).abs();
            worst = worst.max(e);
        }
    }
    println!("criterion1 max err: {worst:.4}  ({:?})", t0.elapsed());

    // --- criterion 2: WT scaled vs PF slopes, even orders [0,10]
    let even = OrderGrid::new(
        (0..=5).map(|i| i as f64 * 2.0).collect(),
        (0..=5).map(|i| i as f64 * 2.0).collect(),
    ).unwrap();
    let dy: Vec<usize> = (2..=13).map(|j| 1usize << j).collect();
    let mx = box_measures(&x, &dy).unwrap();
    let my = box_measures(&y, &dy).unwrap();
    let pf = joint_partition_pf(&mx, &my, &even).unwrap();
    let wt_even = joint_partition(&wx, &wy, &even).unwrap();
    let wt_scaled = scaled_partition_for_comparison(&wt_even).unwrap();
    let cmp = compare_wt_pf(&wt_scaled, &pf).unwrap();
    println!("criterion2 max slope diff: {:.4}  ({:?})", cmp.max_abs_difference(), t0.elapsed());

    // --- criterion 3: diagonal collapse q in [1,10]
    let qs: Vec<f64> = (4..=40).map(|i| i as f64 * 0.25).collect();
    let diag = diagonal_analysis(&wx, &wy, &qs, sgrid.min(), sgrid.max()).unwrap();
    let full = OrderGrid::square(10.0, 0.25).unwrap();
    let tfull = joint_partition(&wx, &wy, &full).unwrap();
    let sfull = fit_mass_exponents(&tfull, sgrid.min(), sgrid.max()).unwrap();
    let leg = legendre_spectrum(&sfull);
    let mut worst_dir = 0.0f64;
    let mut worst_leg = 0.0f64;
    for (i, &q) in qs.iter().enumerate() {
        let f = th.joint_spectrum(q, q);
        worst_dir = worst_dir.max((diag.d()[i] + 1.0 - f).abs());
        let gi = (q / 0.25).round() as usize;
        worst_leg = worst_leg.max((leg.d(gi, gi) + 1.0 - f).abs());
    }
    println!("criterion3 direct: {worst_dir:.4} legendre: {worst_leg:.4}  ({:?})", t0.elapsed());

    // --- criterion 7 probe: ordering margins at smax=448, 24 reps
    let cfg = WidthConfig {
        scale_grid: ScaleGrid::log_spaced(4.0, 448.0, 30).unwrap(),
        scaling_range: (4.0, 448.0),
        q_values: qs.clone(),
        ..WidthConfig::default_for(n).unwrap()
    };
    let worig = pair_width(&x, &y, &cfg).unwrap();
    println!("original width: {worig:.4}  ({:?})", t0.elapsed());
    for kind in [SurrogateKind::ShuffleX, SurrogateKind::ShuffleY, SurrogateKind::CoShuffle,
                 SurrogateKind::IndependentShuffles, SurrogateKind::XLeads, SurrogateKind::YLeads] {
        let r = surrogate_ensemble(&x, &y, kind, 50, 20260810, &cfg).unwrap();
        println!("{}: mean {:.4} se {:.4}  ({:?})", kind.label(), r.mean, r.std_error, t0.elapsed());
    }
}
