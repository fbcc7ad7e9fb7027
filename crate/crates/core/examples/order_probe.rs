use falqon::*;
use falqon::seed::{derive_seed, SeedPurpose};

fn main() {
    let sg = SafeguardParams::default();
    println!("== first order scan probe");
    for n in [6usize, 8, 10, 12, 14] {
        let mut dts = vec![]; let mut rs = vec![];
        for inst in 0..5u64 {
            let g = generate_regular(n, 3, derive_seed(7, n as u64, inst, SeedPurpose::GraphGeneration)).unwrap();
            let d = build_cost_diagonal(&g).unwrap();
            let b = brute_force_max_cut(&g).unwrap();
            let ground = b.ground_energy as f64;
            let mut best = (0.0f64, f64::NEG_INFINITY);
            let mut k = 0;
            loop {
                let dt = 0.02 + 0.005 * k as f64;
                if dt > 1.0 + 1e-12 { break; }
                let (_, t) = run_feedback(&d, dt, 16, FeedbackOrder::First, &sg, "x").unwrap();
                let ratio = t.final_energy() / ground;
                if ratio > best.1 { best = (dt, ratio); }
                k += 1;
            }
            dts.push(best.0); rs.push(best.1);
        }
        println!("   n={n:2} mean_dt*={:.3} mean_ratio*={:.3}", dts.iter().sum::<f64>()/5.0, rs.iter().sum::<f64>()/5.0);
    }
    println!("== second order full curve, n=14 inst0, spec safeguards");
    let g = generate_regular(14, 3, derive_seed(7, 14, 0, SeedPurpose::GraphGeneration)).unwrap();
    let d = build_cost_diagonal(&g).unwrap();
    let b = brute_force_max_cut(&g).unwrap();
    let ground = b.ground_energy as f64;
    for k in 0..19 {
        let dt = 0.10 + 0.05 * k as f64;
        if dt > 1.0 { break; }
        let (s, t) = run_feedback(&d, dt, 16, FeedbackOrder::Second, &sg, "x").unwrap();
        println!("   dt={dt:.2} ratio={:.3} events={}", t.final_energy()/ground, s.safeguard_events);
    }
}
