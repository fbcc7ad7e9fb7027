use falqon::*;

fn probe(d: &CostDiagonal, dt: f64, layers: usize, beta_max: f64, ground: f64) {
    let mut psi = StateVector::uniform(d.n()).unwrap();
    let mut ws = FeedbackWorkspace::new(d.n());
    println!("dt={dt} beta_max={beta_max}");
    for k in 1..=layers {
        let e = feedback_expectations_in(&psi, d, &mut ws).unwrap();
        let raw = if e.b_val.abs() < 1e-9 { -e.a_val } else { -(e.a_val + dt * e.c_val) / (2.0 * dt * e.b_val) };
        let beta = raw.clamp(-beta_max, beta_max);
        apply_cost_phase(&mut psi, d, dt).unwrap();
        apply_mixer(&mut psi, dt * beta).unwrap();
        let cost = expect_cost(&psi, d).unwrap();
        println!("  k={k:2} a={:>9.4} b={:>10.4} c={:>10.4} raw={:>10.3} beta={:>8.3} E={:>9.4} ratio={:.4}", e.a_val, e.b_val, e.c_val, raw, beta, cost, cost/ground);
    }
}

fn main() {
    let g = generate_regular(14, 3, falqon::seed::derive_seed(7, 14, 0, falqon::seed::SeedPurpose::GraphGeneration)).unwrap();
    let d = build_cost_diagonal(&g).unwrap();
    let b = brute_force_max_cut(&g).unwrap();
    let ground = b.ground_energy as f64;
    println!("n=14 graph, ground = {ground}");
    probe(&d, 0.13, 16, 10.0, ground);
    probe(&d, 0.20, 16, 10.0, ground);
}
