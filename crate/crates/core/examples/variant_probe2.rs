use falqon::*;
use falqon::seed::{derive_seed, SeedPurpose};

#[derive(Clone, Copy)]
struct Variant { name: &'static str, eta: f64, zero_fallback: bool, bmax: f64 }

fn run(d: &CostDiagonal, dt: f64, layers: usize, v: Variant) -> f64 {
    let mut psi = StateVector::uniform(d.n()).unwrap();
    let mut ws = FeedbackWorkspace::new(d.n());
    for _ in 0..layers {
        let e = feedback_expectations_in(&psi, d, &mut ws).unwrap();
        let raw = if e.b_val <= v.eta {
            if v.zero_fallback { 0.0 } else { -e.a_val }
        } else {
            -(e.a_val + dt * e.c_val) / (2.0 * dt * e.b_val)
        };
        let beta = raw.clamp(-v.bmax, v.bmax);
        apply_cost_phase(&mut psi, d, dt).unwrap();
        apply_mixer(&mut psi, dt * beta).unwrap();
    }
    expect_cost(&psi, d).unwrap()
}

fn main() {
    let variants = [
        Variant { name: "G0.5 zero-fb eta0.5", eta: 0.5, zero_fallback: true, bmax: 10.0 },
        Variant { name: "G1   zero-fb eta1  ", eta: 1.0, zero_fallback: true, bmax: 10.0 },
        Variant { name: "G2   zero-fb eta2  ", eta: 2.0, zero_fallback: true, bmax: 10.0 },
        Variant { name: "H1   first-fb eta1 ", eta: 1.0, zero_fallback: false, bmax: 10.0 },
        Variant { name: "H0.5 first-fb eta.5", eta: 0.5, zero_fallback: false, bmax: 10.0 },
    ];
    for v in variants {
        println!("== {}", v.name);
        for n in [6usize, 10, 14] {
            let mut dts = vec![]; let mut rs = vec![];
            for inst in 0..5u64 {
                let g = generate_regular(n, 3, derive_seed(7, n as u64, inst, SeedPurpose::GraphGeneration)).unwrap();
                let d = build_cost_diagonal(&g).unwrap();
                let b = brute_force_max_cut(&g).unwrap();
                let ground = b.ground_energy as f64;
                let mut best = (0.0f64, f64::NEG_INFINITY);
                let mut k = 0;
                loop {
                    let dt = 0.1 + 0.01 * k as f64;
                    if dt > 1.0 + 1e-12 { break; }
                    let ratio = run(&d, dt, 16, v) / ground;
                    if ratio > best.1 { best = (dt, ratio); }
                    k += 1;
                }
                dts.push(best.0); rs.push(best.1);
            }
            println!("   n={n:2} mean_dt*={:.3} mean_ratio*={:.3}", dts.iter().sum::<f64>()/5.0, rs.iter().sum::<f64>()/5.0);
        }
    }
}
