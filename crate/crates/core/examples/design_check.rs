use dpd_lasso::*;
use ndarray::Array1;

fn dist(b: &[f64], t: (f64, f64)) -> f64 {
    ((b[0] - t.0).powi(2) + (b[1] - t.1).powi(2)).sqrt()
}

fn main() {
    println!("=== contour suites (alpha=1, lambda=1e-4, default init) ===");
    for c in [0.0, 0.10, 0.20] {
        let mut worst_it = 0usize;
        let mut nconv = 0;
        let mut worst_w: f64 = 0.0;
        let mut worst_rise: f64 = f64::NEG_INFINITY;
        let mut worst_d: f64 = 0.0;
        for seed in 0..20u64 {
            let (data, truth) = contour_scenario(c, seed).unwrap();
            let settings = EstimatorSettings::new(1.0, 1e-4);
            let (fit, trace) = fit_dpd_lasso(&data, &settings).unwrap();
            nconv += fit.converged as usize;
            worst_it = worst_it.max(fit.n_iter);
            worst_rise = worst_rise.max(trace.records.last().unwrap().objective - trace.records[0].objective);
            worst_d = worst_d.max(dist(&fit.beta, (5.0, -5.0)));
            if c > 0.0 {
                let w = fit_weights(&data, &fit).unwrap();
                let mean_w: f64 = truth.contaminated_idx.iter().map(|&i| w.as_array()[i]).sum::<f64>()
                    / truth.contaminated_idx.len() as f64;
                worst_w = worst_w.max(mean_w);
            }
        }
        println!("c={c}: conv {nconv}/20 worst_iters {worst_it} worst_obj_rise {worst_rise:.2e} worst_dist {worst_d:.4} worst_cont_w {worst_w:.2e}");
    }

    println!("=== c=20% ols-init fit example ===");
    for seed in 0..8u64 {
        let (data, _) = contour_scenario(0.20, seed).unwrap();
        let mut s = EstimatorSettings::new(1.0, 1e-4);
        s.init = InitStrategy::Ols;
        let (fit, _) = fit_dpd_lasso(&data, &s).unwrap();
        let mut s0 = EstimatorSettings::new(0.0, 1e-4);
        s0.init = InitStrategy::Ols;
        let (fit0, _) = fit_dpd_lasso(&data, &s0).unwrap();
        println!(" seed {seed}: dpd {:.4} ls {:.4}", dist(&fit.beta, (5.0, -5.0)), dist(&fit0.beta, (5.0, -5.0)));
    }

    println!("=== desk-scale criterion 2 (n=300, 20 reps, both c) ===");
    for c in [0.0, 0.10] {
        let cfg = SimConfig { n: 300, n_reps: 20, contamination: c, rng_seed: 1, ..SimConfig::default() };
        let start = std::time::Instant::now();
        let recs = run_replications(&cfg, &[Method::DpdLasso { alpha: 1.0 }, Method::Lasso]).unwrap();
        let dpd: Vec<&SimRecord> = recs.iter().filter(|r| r.method.starts_with("dpd")).collect();
        let las: Vec<&SimRecord> = recs.iter().filter(|r| r.method == "lasso").collect();
        let med = |v: &mut Vec<f64>| { v.sort_by(|a, b| a.partial_cmp(b).unwrap()); (v[9] + v[10]) / 2.0 };
        let mut rd: Vec<f64> = dpd.iter().map(|r| r.rmspe).collect();
        let mut rl: Vec<f64> = las.iter().map(|r| r.rmspe).collect();
        let (md, ml) = (med(&mut rd), med(&mut rl));
        print!("c={c}: med rmspe dpd {md:.4} lasso {ml:.4} ratio {:.3} [{:.0}s]", ml / md, start.elapsed().as_secs_f64());
        if c > 0.0 {
            let wins_rmspe = dpd.iter().zip(las.iter()).filter(|(d, l)| d.rmspe < l.rmspe).count();
            let wins_l2 = dpd.iter().zip(las.iter()).filter(|(d, l)| d.l2_error < l.l2_error).count();
            let wins_g = dpd.iter().zip(las.iter()).filter(|(d, l)| d.gamma < l.gamma).count();
            let mut gd: Vec<f64> = dpd.iter().map(|r| r.gamma as f64).collect();
            let mut gl: Vec<f64> = las.iter().map(|r| r.gamma as f64).collect();
            println!(" wins rmspe {wins_rmspe}/20 l2 {wins_l2}/20 gamma {wins_g}/20; med gamma d {} l {}", med(&mut gd), med(&mut gl));
        } else {
            println!(" clean dpd/lasso {:.3}", md / ml);
        }
    }
}
