use falqon::*;
use falqon::seed::{derive_seed, SeedPurpose};

#[derive(Clone, Copy)]
struct Variant { name: &'static str, eps: f64, bmax: f64, neg_b_fallback: bool }

fn run(d: &CostDiagonal, dt: f64, layers: usize, v: Variant) -> f64 {
    let mut psi = StateVector::uniform(d.n()).unwrap();
    let mut ws = FeedbackWorkspace::new(d.n());
    for _ in 0..layers {
        let e = feedback_expectations_in(&psi, d, &mut ws).unwrap();
        let singular = if v.neg_b_fallback { e.b_val < v.eps } else { e.b_val.abs() < v.eps };
        let raw = if singular { -e.a_val } else { -(e.a_val + dt * e.c_val) / (2.0 * dt * e.b_val) };
        let beta = raw.clamp(-v.bmax, v.bmax);
        apply_cost_phase(&mut psi, d, dt).unwrap();
        apply_mixer(&mut psi, dt * beta).unwrap();
    }
    expect_cost(&psi, d).unwrap()
}

fn main() {
    let variants = [
        Variant { name: "A spec eps1e-9 bmax10   ", eps: 1e-9, bmax: 10.0, neg_b_fallback: false },
        Variant { name: "B bmax2                 ", eps: 1e-9, bmax: 2.0, neg_b_fallback: false },
        Variant { name: "C bmax1                 ", eps: 1e-9, bmax: 1.0, neg_b_fallback: false },
        Variant { name: "D noclamp               ", eps: 1e-9, bmax: 1e18, neg_b_fallback: false },
        Variant { name: "E negb->first bmax10    ", eps: 1e-9, bmax: 10.0, neg_b_fallback: true },
        Variant { name: "F negb->first bmax2     ", eps: 1e-9, bmax: 2.0, neg_b_fallback: true },
    ];
    for v in variants {
        println!("== {}", v.name);
        for n in [6usize, 10, 14] {
            let mut best_dts = vec![];
            let mut best_ratios = vec![];
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
                best_dts.push(best.0);
                best_ratios.push(best.1);
            }
            let mdt = best_dts.iter().sum::<f64>() / 5.0;
            let mr = best_ratios.iter().sum::<f64>() / 5.0;
            println!("   n={n:2} mean_dt*={mdt:.3} mean_ratio*={mr:.3}");
        }
    }
}
