use falqon::*;
use falqon::seed::{derive_seed, SeedPurpose};

fn main() {
    let sg = SafeguardParams::default();
    for n in [6usize, 10, 14] {
        let g = generate_regular(n, 3, derive_seed(7, n as u64, 0, SeedPurpose::GraphGeneration)).unwrap();
        let d = build_cost_diagonal(&g).unwrap();
        let b = brute_force_max_cut(&g).unwrap();
        let ground = b.ground_energy as f64;
        println!("n={n}:");
        let mut k = 0;
        loop {
            let dt = 0.12 + 0.005 * k as f64;
            if dt > 0.31 { break; }
            let (_, t) = run_feedback(&d, dt, 16, FeedbackOrder::Second, &sg, "x").unwrap();
            println!("  dt={dt:.3} ratio={:.3}", t.final_energy() / ground);
            k += 1;
        }
    }
}
