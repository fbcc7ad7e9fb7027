use falqon::*;
use falqon::seed::{derive_seed, SeedPurpose};

fn main() {
    let sg = SafeguardParams::default();
    for n in [6usize, 8, 10, 12, 14] {
        for inst in 0..3u64 {
            let g = generate_regular(n, 3, derive_seed(7, n as u64, inst, SeedPurpose::GraphGeneration)).unwrap();
            let d = build_cost_diagonal(&g).unwrap();
            let b = brute_force_max_cut(&g).unwrap();
            let ground = b.ground_energy as f64;
            let initial_ratio = (g.edge_count() as f64 / 2.0) / b.max_cut as f64;
            let mut curve = vec![];
            let mut k = 0;
            loop {
                let dt = 0.1 + 0.005 * k as f64;
                if dt > 1.0 + 1e-12 { break; }
                let (_, t) = run_feedback(&d, dt, 16, FeedbackOrder::Second, &sg, "x").unwrap();
                curve.push((dt, t.final_energy() / ground));
                k += 1;
            }
            let full_best = curve.iter().cloned().fold((0.0, f64::NEG_INFINITY), |acc, p| if p.1 > acc.1 { p } else { acc });
            // first collapse: first dt where ratio < initial ratio AFTER the curve has exceeded 0.7
            let mut seen_good = false;
            let mut cliff = None;
            for &(dt, r) in &curve {
                if r > 0.7 { seen_good = true; }
                if seen_good && r < initial_ratio { cliff = Some(dt); break; }
            }
            // best within pre-cliff window
            let window_best = match cliff {
                Some(c) => curve.iter().filter(|p| p.0 < c).cloned().fold((0.0, f64::NEG_INFINITY), |acc, p| if p.1 > acc.1 { p } else { acc }),
                None => full_best,
            };
            println!("n={n:2} i{inst} init={initial_ratio:.3} full_best=({:.3},{:.3}) cliff={:?} window_best=({:.3},{:.3})",
                full_best.0, full_best.1, cliff, window_best.0, window_best.1);
        }
    }
}
