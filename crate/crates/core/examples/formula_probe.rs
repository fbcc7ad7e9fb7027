use falqon::*;
use falqon::seed::{derive_seed, SeedPurpose};

#[derive(Clone, Copy)]
struct F { name: &'static str, cs: f64, bs: f64, two: f64, cdt: u32 }

fn run(d: &CostDiagonal, dt: f64, layers: usize, f: F) -> f64 {
    let mut psi = StateVector::uniform(d.n()).unwrap();
    let mut ws = FeedbackWorkspace::new(d.n());
    for _ in 0..layers {
        let e = feedback_expectations_in(&psi, d, &mut ws).unwrap();
        let b = f.bs * e.b_val;
        let cterm = match f.cdt { 1 => dt * e.c_val, 2 => dt * dt * e.c_val, _ => e.c_val };
        let raw = if b.abs() < 1e-9 { -e.a_val } else { -(e.a_val + f.cs * cterm) / (f.two * dt * b) };
        let beta = raw.clamp(-10.0, 10.0);
        apply_cost_phase(&mut psi, d, dt).unwrap();
        apply_mixer(&mut psi, dt * beta).unwrap();
    }
    expect_cost(&psi, d).unwrap()
}

fn main() {
    let fs = [
        F { name: "S0 printed          ", cs: 1.0, bs: 1.0, two: 2.0, cdt: 1 },
        F { name: "S1 c-flip           ", cs: -1.0, bs: 1.0, two: 2.0, cdt: 1 },
        F { name: "S2 b-flip           ", cs: 1.0, bs: -1.0, two: 2.0, cdt: 1 },
        F { name: "S3 both-flip        ", cs: -1.0, bs: -1.0, two: 2.0, cdt: 1 },
        F { name: "S4 no-c             ", cs: 0.0, bs: 1.0, two: 2.0, cdt: 1 },
        F { name: "S5 no-factor-2      ", cs: 1.0, bs: 1.0, two: 1.0, cdt: 1 },
        F { name: "S6 c-times-dt2      ", cs: 1.0, bs: 1.0, two: 2.0, cdt: 2 },
    ];
    for f in fs {
        println!("== {}", f.name);
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
                    let ratio = run(&d, dt, 16, f) / ground;
                    if ratio > best.1 { best = (dt, ratio); }
                    k += 1;
                }
                dts.push(best.0); rs.push(best.1);
            }
            println!("   n={n:2} mean_dt*={:.3} mean_ratio*={:.3}", dts.iter().sum::<f64>()/5.0, rs.iter().sum::<f64>()/5.0);
        }
    }
}
